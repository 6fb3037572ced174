//! Sparse LU factorization of simplex bases with Markowitz pivot selection and
//! threshold partial pivoting.

use std::collections::BTreeSet;

/// Relative threshold a pivot must reach against the largest entry of its column.
const THRESHOLD: f64 = 0.01;
/// Entries below this magnitude never become pivots.
const ABS_PIVOT_TOL: f64 = 1e-11;
/// How many candidate columns and rows the Markowitz search inspects.
const SEARCH_DEPTH: usize = 4;

#[derive(Clone, Debug)]
struct URow {
    row: usize,
    col: usize,
    diag: f64,
    entries: Vec<(usize, f64)>,
}

/// `B = L U` with row and column permutations implied by the pivot sequence.
/// Columns are indexed by basis position, rows by constraint index.
#[derive(Clone, Debug, Default)]
pub(crate) struct LuFactors {
    m: usize,
    l_etas: Vec<(usize, Vec<(usize, f64)>)>,
    u_rows: Vec<URow>,
}

#[derive(Debug)]
pub(crate) struct Singular {
    /// Basis positions that could not be pivoted.
    pub cols: Vec<usize>,
    /// Rows left without a pivot, same length as `cols`.
    pub rows: Vec<usize>,
}

impl LuFactors {
    pub(crate) fn factorize(m: usize, columns: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        assert_eq!(columns.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (c, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    rows[r].push((c, v));
                    col_rows[c].push(r);
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
        let mut col_set: BTreeSet<(usize, usize)> = (0..m).map(|c| (col_count[c], c)).collect();
        let mut row_set: BTreeSet<(usize, usize)> = (0..m).map(|r| (rows[r].len(), r)).collect();

        let mut l_etas = Vec::new();
        let mut u_rows = Vec::with_capacity(m);
        let mut singular_cols = Vec::new();
        let mut mark = vec![usize::MAX; m];

        while let Some(&(cnt, _)) = col_set.iter().next() {
            if cnt == 0 {
                let (_, c) = col_set.pop_first().unwrap();
                col_active[c] = false;
                singular_cols.push(c);
                continue;
            }
            let Some((r, c)) = choose_pivot(&rows, &col_rows, &row_active, &col_count, &col_set, &row_set)
            else {
                // Every remaining entry is numerically negligible.
                singular_cols.extend(col_set.iter().map(|&(_, c)| c));
                break;
            };

            // Detach the pivot row and column from the active structure.
            let prow = std::mem::take(&mut rows[r]);
            row_set.remove(&(prow.len(), r));
            row_active[r] = false;
            col_set.remove(&(col_count[c], c));
            col_active[c] = false;
            let pivot = prow.iter().find(|e| e.0 == c).unwrap().1;
            for &(j, _) in &prow {
                if j != c {
                    col_set.remove(&(col_count[j], j));
                    col_count[j] -= 1;
                }
            }

            let mut eta = Vec::new();
            let targets: Vec<usize> = col_rows[c].iter().copied().filter(|&i| row_active[i]).collect();
            for i in targets {
                let row = &mut rows[i];
                row_set.remove(&(row.len(), i));
                let k = row.iter().position(|e| e.0 == c).unwrap();
                let mult = row[k].1 / pivot;
                row.swap_remove(k);
                eta.push((i, mult));
                for (p, &(j, _)) in row.iter().enumerate() {
                    mark[j] = p;
                }
                for &(j, v) in &prow {
                    if j == c {
                        continue;
                    }
                    if mark[j] != usize::MAX {
                        row[mark[j]].1 -= mult * v;
                    } else {
                        row.push((j, -mult * v));
                        col_rows[j].push(i);
                        col_count[j] += 1;
                    }
                }
                for &(j, _) in row.iter() {
                    mark[j] = usize::MAX;
                }
                row_set.insert((row.len(), i));
            }
            for &(j, _) in &prow {
                if j != c {
                    col_set.insert((col_count[j], j));
                    // Keep the row lists compact for later pivot searches.
                    if col_rows[j].len() > 2 * col_count[j] + 8 {
                        col_rows[j].retain(|&i| row_active[i]);
                    }
                }
            }
            if !eta.is_empty() {
                l_etas.push((r, eta));
            }
            let entries = prow.into_iter().filter(|e| e.0 != c).collect();
            u_rows.push(URow {
                row: r,
                col: c,
                diag: pivot,
                entries,
            });
        }

        if singular_cols.is_empty() {
            Ok(Self { m, l_etas, u_rows })
        } else {
            let rows_left: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
            Err(Singular {
                cols: singular_cols,
                rows: rows_left,
            })
        }
    }

    /// Solves `B x = b` in place: `b` is indexed by row on input and by basis
    /// position on output.
    pub(crate) fn solve(&self, b: &mut Vec<f64>) {
        for (r, eta) in &self.l_etas {
            let br = b[*r];
            if br != 0.0 {
                for &(i, l) in eta {
                    b[i] -= l * br;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for u in self.u_rows.iter().rev() {
            let mut s = b[u.row];
            for &(j, v) in &u.entries {
                s -= v * x[j];
            }
            x[u.col] = s / u.diag;
        }
        *b = x;
    }

    /// Solves `Bᵀ y = d` in place: `d` is indexed by basis position on input
    /// and by row on output.
    pub(crate) fn solve_transpose(&self, d: &mut Vec<f64>) {
        let mut z = vec![0.0; self.m];
        for u in &self.u_rows {
            let zr = d[u.col] / u.diag;
            z[u.row] = zr;
            if zr != 0.0 {
                for &(j, v) in &u.entries {
                    d[j] -= v * zr;
                }
            }
        }
        for (r, eta) in self.l_etas.iter().rev() {
            let mut s = 0.0;
            for &(i, l) in eta {
                s += l * z[i];
            }
            z[*r] -= s;
        }
        *d = z;
    }

    pub(crate) fn nnz(&self) -> usize {
        self.l_etas.iter().map(|e| e.1.len()).sum::<usize>()
            + self.u_rows.iter().map(|u| u.entries.len() + 1).sum::<usize>()
    }
}

fn entry(rows: &[Vec<(usize, f64)>], r: usize, c: usize) -> f64 {
    rows[r].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1)
}

fn col_max(rows: &[Vec<(usize, f64)>], col_rows: &[usize], row_active: &[bool], c: usize) -> f64 {
    col_rows
        .iter()
        .filter(|&&i| row_active[i])
        .map(|&i| entry(rows, i, c).abs())
        .fold(0.0, f64::max)
}

fn choose_pivot(
    rows: &[Vec<(usize, f64)>],
    col_rows: &[Vec<usize>],
    row_active: &[bool],
    col_count: &[usize],
    col_set: &BTreeSet<(usize, usize)>,
    row_set: &BTreeSet<(usize, usize)>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, f64, usize, usize)> = None; // (cost, -|a|, r, c)
    let better = |best: &Option<(usize, f64, usize, usize)>, cost: usize, mag: f64| match best {
        None => true,
        Some((bc, bm, _, _)) => cost < *bc || (cost == *bc && -mag < *bm),
    };

    for &(cnt, c) in col_set.iter().filter(|e| e.0 > 0).take(SEARCH_DEPTH) {
        let cmax = col_max(rows, &col_rows[c], row_active, c);
        if cmax < ABS_PIVOT_TOL {
            continue;
        }
        for &i in col_rows[c].iter().filter(|&&i| row_active[i]) {
            let a = entry(rows, i, c).abs();
            if a < THRESHOLD * cmax || a < ABS_PIVOT_TOL {
                continue;
            }
            let cost = (rows[i].len() - 1) * (cnt - 1);
            if better(&best, cost, a) {
                best = Some((cost, -a, i, c));
            }
        }
        if matches!(best, Some((0, ..))) {
            break;
        }
    }
    if !matches!(best, Some((0, ..))) {
        for &(rc, r) in row_set.iter().filter(|e| e.0 > 0).take(SEARCH_DEPTH) {
            for &(c, v) in &rows[r] {
                let a = v.abs();
                if a < ABS_PIVOT_TOL {
                    continue;
                }
                let cmax = col_max(rows, &col_rows[c], row_active, c);
                if a < THRESHOLD * cmax {
                    continue;
                }
                let cost = (rc - 1) * (col_count[c] - 1);
                if better(&best, cost, a) {
                    best = Some((cost, -a, r, c));
                }
            }
        }
    }
    if best.is_none() {
        // Fall back to an exhaustive scan before declaring the basis singular.
        for &(_, c) in col_set.iter().filter(|e| e.0 > 0) {
            let cmax = col_max(rows, &col_rows[c], row_active, c);
            if cmax < ABS_PIVOT_TOL {
                continue;
            }
            for &i in col_rows[c].iter().filter(|&&i| row_active[i]) {
                let a = entry(rows, i, c).abs();
                if a >= THRESHOLD * cmax && better(&best, (rows[i].len() - 1) * (col_count[c] - 1), a) {
                    best = Some(((rows[i].len() - 1) * (col_count[c] - 1), -a, i, c));
                }
            }
            if best.is_some() {
                break;
            }
        }
    }
    best.map(|(_, _, r, c)| (r, c))
}
