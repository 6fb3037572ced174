//! Branch and bound over binary columns of a [`MipModel`].
//!
//! Nodes are explored by a depth-first dive (following the rounding direction
//! of the branching variable) with best-bound backtracking once a dive ends.
//! Every child LP starts from its parent's basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lp::{MipModel, ObjSense};
use crate::simplex::{Basis, LpParams, LpSolver, LpStatus};

#[derive(Clone, Debug)]
pub struct MipParams {
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which the
    /// search stops.
    pub gap_tol: f64,
    pub int_tol: f64,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub lp: LpParams,
}

impl Default for MipParams {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            int_tol: 1e-6,
            node_limit: None,
            time_limit: None,
            lp: LpParams::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The time limit stopped the search before the gap closed.
    GapLimit,
    NodeLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent objective; `±inf` when none was found.
    pub objective: f64,
    pub best_bound: f64,
    pub primal: Vec<f64>,
    pub nodes: usize,
    pub gap: f64,
    pub lp_iterations: usize,
}

/// One line of the optional node log.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeEvent {
    pub node: usize,
    pub depth: usize,
    pub lp_objective: Option<f64>,
    pub incumbent: f64,
    pub best_bound: f64,
}

struct Node {
    /// Bound on the node objective, minimization sense.
    bound: f64,
    seq: usize,
    depth: usize,
    fixings: Vec<(usize, f64)>,
    basis: Option<Basis>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

pub fn solve_mip(m: &MipModel, params: &MipParams) -> Result<MipSolution> {
    solve_mip_with_log(m, params, |_| {})
}

/// Like [`solve_mip`], calling `log` after every processed node.
pub fn solve_mip_with_log(
    m: &MipModel,
    params: &MipParams,
    mut log: impl FnMut(&NodeEvent),
) -> Result<MipSolution> {
    let start = Instant::now();
    let sign = match m.base.sense {
        ObjSense::Minimize => 1.0,
        ObjSense::Maximize => -1.0,
    };
    let mut root = m.base.clone();
    for &j in &m.binary_cols {
        root.col_lower[j] = root.col_lower[j].max(0.0);
        root.col_upper[j] = root.col_upper[j].min(1.0);
    }
    let root_bounds: Vec<(f64, f64)> = m.binary_cols.iter().map(|&j| (root.col_lower[j], root.col_upper[j])).collect();
    let mut solver = LpSolver::new(&root, params.lp.clone())?;

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut dive: Option<Node> = Some(Node {
        bound: f64::NEG_INFINITY,
        seq,
        depth: 0,
        fixings: Vec::new(),
        basis: None,
    });
    let mut incumbent = f64::INFINITY;
    let mut best_x: Vec<f64> = Vec::new();
    let mut best_bound = f64::NEG_INFINITY;
    let mut nodes = 0usize;
    let mut lp_iterations = 0usize;
    let mut stop: Option<MipStatus> = None;

    let gap_of = |inc: f64, bound: f64| {
        if inc == f64::INFINITY {
            f64::INFINITY
        } else if bound >= inc {
            0.0
        } else {
            (inc - bound) / inc.abs().max(1.0)
        }
    };

    loop {
        let open_min = heap.peek().map_or(f64::INFINITY, |n: &Node| n.bound);
        let frontier = dive.as_ref().map_or(open_min, |n| n.bound.min(open_min));
        best_bound = best_bound.max(frontier.min(incumbent));
        if dive.is_none() && heap.is_empty() {
            break;
        }
        if gap_of(incumbent, best_bound) <= params.gap_tol {
            break;
        }
        if params.node_limit.is_some_and(|l| nodes >= l) {
            stop = Some(MipStatus::NodeLimit);
            break;
        }
        if params.time_limit.is_some_and(|t| start.elapsed() >= t) {
            stop = Some(MipStatus::GapLimit);
            break;
        }
        let node = match dive.take() {
            Some(n) => n,
            None => heap.pop().unwrap(),
        };
        if node.bound >= cutoff(incumbent, params.gap_tol) {
            continue;
        }

        for (k, &j) in m.binary_cols.iter().enumerate() {
            solver.set_col_bounds(j, root_bounds[k].0, root_bounds[k].1);
        }
        for &(j, v) in &node.fixings {
            solver.set_col_bounds(j, v, v);
        }
        if let Some(b) = &node.basis {
            solver.set_basis(b);
        }
        let sol = solver.solve()?;
        nodes += 1;
        lp_iterations += sol.iterations;

        let mut lp_obj = None;
        match sol.status {
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => {
                return Ok(MipSolution {
                    status: MipStatus::Unbounded,
                    objective: -sign * f64::INFINITY,
                    best_bound: -sign * f64::INFINITY,
                    primal: Vec::new(),
                    nodes,
                    gap: f64::INFINITY,
                    lp_iterations,
                });
            }
            LpStatus::Optimal => {
                let z = sign * sol.objective;
                lp_obj = Some(sol.objective);
                if z < cutoff(incumbent, params.gap_tol) {
                    match most_fractional(&m.binary_cols, &sol.primal, params.int_tol) {
                        None => {
                            incumbent = z;
                            best_x = sol.primal.clone();
                            for &j in &m.binary_cols {
                                best_x[j] = best_x[j].round();
                            }
                        }
                        Some(j) => {
                            let basis = solver.basis();
                            let up_first = sol.primal[j] >= 0.5;
                            let mut children = [1.0, 0.0].map(|v| {
                                seq += 1;
                                let mut fixings = node.fixings.clone();
                                fixings.push((j, v));
                                Node {
                                    bound: z,
                                    seq,
                                    depth: node.depth + 1,
                                    fixings,
                                    basis: Some(basis.clone()),
                                }
                            });
                            if !up_first {
                                children.swap(0, 1);
                            }
                            let [first, second] = children;
                            heap.push(second);
                            dive = Some(first);
                        }
                    }
                }
            }
        }
        log(&NodeEvent {
            node: nodes,
            depth: node.depth,
            lp_objective: lp_obj,
            incumbent: sign * incumbent,
            best_bound: sign * best_bound,
        });
    }

    let has_inc = incumbent < f64::INFINITY;
    let status = match stop {
        Some(s) => s,
        None if has_inc => MipStatus::Optimal,
        None => MipStatus::Infeasible,
    };
    Ok(MipSolution {
        status,
        objective: sign * incumbent,
        best_bound: sign * if has_inc { best_bound.min(incumbent) } else { best_bound },
        primal: best_x,
        nodes,
        gap: gap_of(incumbent, best_bound),
        lp_iterations,
    })
}

/// Node bounds at or above this value cannot improve the incumbent enough.
fn cutoff(incumbent: f64, gap_tol: f64) -> f64 {
    if incumbent.is_finite() {
        incumbent - gap_tol * incumbent.abs().max(1.0)
    } else {
        incumbent
    }
}

/// Binary column whose value is farthest from integral; lowest index wins ties.
fn most_fractional(binary_cols: &[usize], x: &[f64], int_tol: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &j in binary_cols {
        let f = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if f > int_tol && best.is_none_or(|(bf, bj)| f > bf || (f == bf && j < bj)) {
            best = Some((f, j));
        }
    }
    best.map(|(_, j)| j)
}
