use super::*;
use crate::toys::t1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn t1_is_valid() {
    let r = validate_instance(&t1());
    assert!(r.ok, "{:?}", r.issues);
    assert_eq!(r.nnz_bh, 1);
    assert_eq!(r.dims.n_h, 1);
}

#[test]
fn unbounded_h_is_reported() {
    let mut inst = t1();
    inst.omega.h_upper = vec![INF];
    let r = validate_instance(&inst);
    assert!(!r.ok);
    assert!(r.errors().any(|m| m == "Ω not compact"));
}

#[test]
fn crossed_beta_bounds_are_reported() {
    let mut inst = t1();
    inst.third.beta_lower = vec![2.0];
    inst.third.beta_upper = vec![1.0];
    let r = validate_instance(&inst);
    assert!(!r.ok);
    assert!(r.errors().any(|m| m.starts_with("β bounds crossed")));
}

#[test]
fn dimension_and_convexity_errors() {
    let mut inst = t1();
    inst.third.b0 = vec![0.0, 1.0];
    inst.first.obj_quadratic_diag = vec![-1.0];
    let r = validate_instance(&inst);
    assert!(r.errors().any(|m| m.starts_with("b_0 length")));
    assert!(r.errors().any(|m| m.starts_with("nonconvex")));
    assert!(ensure_valid(&inst).is_err());
}

#[test]
fn standardize_unit_interval() {
    let om = standardize_omega(&Polytope::boxed(vec![0.0], vec![1.0])).unwrap();
    assert_eq!(om.a_omega.to_dense(), vec![vec![1.0]]);
    assert_eq!(om.b_omega, vec![1.0]);
    assert_eq!(om.slack_cols, vec![0]);
    assert_eq!((om.h_lower.clone(), om.h_upper.clone()), (vec![0.0], vec![1.0]));
}

#[test]
fn standardize_simplex() {
    let mut p = Polytope::boxed(vec![0.0; 2], vec![INF; 2]);
    p.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Le, 1.0);
    let om = standardize_omega(&p).unwrap();
    assert_eq!(om.a_omega.to_dense(), vec![vec![1.0, 1.0]]);
    assert_eq!(om.b_omega, vec![1.0]);
    assert_eq!(om.slack_cols, vec![0]);
    assert_eq!(om.h_lower, vec![0.0, 0.0]);
    assert_eq!(om.h_upper, vec![1.0, 1.0]);
}

#[test]
fn standardize_forecast_error_set() {
    // Two renewable units, technical limits (5, 5), forecasts (2, 3), R = 0.5.
    let mut p = Polytope::boxed(vec![0.0; 2], vec![5.0; 2]);
    p.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Ge, 0.5 * (2.0 + 3.0));
    let om = standardize_omega(&p).unwrap();
    assert_eq!(
        om.a_omega.to_dense(),
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]]
    );
    assert_eq!(om.b_omega, vec![5.0, 5.0, -2.5]);
    assert_eq!(om.slack_cols, vec![0, 1, 2]);
    assert_eq!(om.h_lower, vec![0.0, 0.0]);
    assert_eq!(om.h_upper, vec![5.0, 5.0]);
}

#[test]
fn standardize_rejects_unbounded_and_empty() {
    let p = Polytope::boxed(vec![0.0], vec![INF]);
    assert!(matches!(standardize_omega(&p), Err(Error::UnboundedOmega(0))));
    let mut q = Polytope::boxed(vec![0.0], vec![1.0]);
    q.add_row(&[(0, 1.0)], RowSense::Ge, 2.0);
    assert!(matches!(standardize_omega(&q), Err(Error::EmptyOmega)));
}

/// Feasibility LP over `(h fixed, η ≥ 0)` for a standard-form set.
fn standard_form_feasible(om: &OmegaStandard, h: &[f64]) -> bool {
    if (0..om.dim()).any(|j| h[j] < om.h_lower[j] - 1e-9) {
        return false;
    }
    let mut m = LpModel::new(ObjSense::Minimize);
    let eta: Vec<Option<usize>> = (0..om.num_rows())
        .map(|i| om.has_slack(i).then(|| m.add_col(format!("eta{i}"), 0.0, 0.0, INF)))
        .collect();
    for (i, r) in om.a_omega.compressed_rows().into_iter().enumerate() {
        let lhs: f64 = r.iter().map(|&(j, v)| v * h[j]).sum();
        let coeffs = eta[i].map(|e| vec![(e, 1.0)]).unwrap_or_default();
        m.add_row(format!("r{i}"), coeffs, RowSense::Eq, om.b_omega[i] - lhs);
    }
    let mut p = LpParams::default();
    p.feas_tol = 1e-9;
    solve_lp(&m, &p).unwrap().status == LpStatus::Optimal
}

#[test]
fn standard_form_preserves_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut p = Polytope::boxed(vec![0.0, -1.0, 0.0], vec![4.0, 3.0, INF]);
    p.add_row(&[(0, 1.0), (1, 1.0), (2, 1.0)], RowSense::Le, 5.0);
    p.add_row(&[(0, 1.0), (2, -2.0)], RowSense::Ge, -3.0);
    p.add_row(&[(1, 1.0), (2, 1.0)], RowSense::Ge, 0.5);
    let om = standardize_omega(&p).unwrap();
    let mut inside = 0;
    for _ in 0..1000 {
        // Snap to a coarse grid so boundary points are hit exactly.
        let ranges = [(-0.5, 4.5), (-1.5, 3.5), (-0.5, 5.0)];
        let h: Vec<f64> = ranges.iter().map(|&(a, b)| (rng.gen_range(a..b) * 4.0f64).round() / 4.0).collect();
        let a = p.contains(&h, 1e-9);
        assert_eq!(a, standard_form_feasible(&om, &h), "{h:?}");
        assert_eq!(a, om.contains(&h, 1e-9));
        inside += usize::from(a);
    }
    assert!(inside > 100 && inside < 900);
}

#[test]
fn shift_moves_lower_bound_into_rhs() {
    let mut inst = t1();
    inst.omega = standardize_omega(&Polytope::boxed(vec![1.0], vec![2.0])).unwrap();
    let (s, shift) = shift_h_lower_bound(&inst);
    assert_eq!(shift, vec![1.0]);
    assert_eq!(s.omega.h_lower, vec![0.0]);
    assert_eq!(s.omega.h_upper, vec![1.0]);
    assert_eq!(s.omega.b_omega, vec![1.0]);
    assert_eq!(s.third.b0, vec![1.0]);
}

#[test]
fn shift_is_identity_at_zero() {
    let inst = t1();
    let (s, shift) = shift_h_lower_bound(&inst);
    assert_eq!(shift, vec![0.0]);
    assert_eq!(s, inst);
}

fn quadratic(lo: f64, hi: f64, q: f64) -> FirstLevel {
    FirstLevel {
        n_x: 1,
        feasible_set: Polytope::boxed(vec![lo], vec![hi]),
        obj_linear: vec![0.0],
        obj_quadratic_diag: vec![q],
        obj_constant: 0.0,
    }
}

#[test]
fn two_secant_pieces() {
    let fl = piecewise_linearize_objective(&quadratic(0.0, 2.0, 1.0), 2).unwrap();
    assert_eq!(fl.n_x, 3);
    assert_eq!(fl.obj_linear, vec![0.0, 1.0, 3.0]);
    assert_eq!(fl.feasible_set.upper, vec![2.0, 1.0, 1.0]);
    assert!(fl.is_linear());
}

#[test]
fn zero_coefficient_is_unchanged() {
    let fl = quadratic(0.0, 2.0, 0.0);
    assert_eq!(piecewise_linearize_objective(&fl, 8).unwrap(), fl);
    assert!(matches!(
        piecewise_linearize_objective(&quadratic(0.0, INF, 1.0), 4),
        Err(Error::UnboundedVariable(0))
    ));
}

/// Minimizes the linearized cost with `x` fixed (or bounded below).
fn pwl_min(fl: &FirstLevel, sense: RowSense, x: f64) -> f64 {
    let mut m = fl.feasible_set.to_lp(ObjSense::Minimize, &fl.obj_linear);
    m.obj_constant = fl.obj_constant;
    m.add_row("x", vec![(0, 1.0)], sense, x);
    let s = solve_lp(&m, &LpParams::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    s.objective
}

#[test]
fn fine_pwl_tracks_the_square() {
    let fl = piecewise_linearize_objective(&quadratic(0.0, 2.0, 1.0), 64).unwrap();
    let v = pwl_min(&fl, RowSense::Ge, 0.7);
    assert!((v - 0.49).abs() < 1e-3, "{v}");
}

#[test]
fn pwl_overestimates_and_interpolates() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let lo = rng.gen_range(-3.0..1.0);
        let hi = lo + rng.gen_range(0.5..4.0);
        let q = rng.gen_range(0.1..3.0);
        let k = rng.gen_range(1..10);
        let fl = piecewise_linearize_objective(&quadratic(lo, hi, q), k).unwrap();
        for _ in 0..10 {
            let x: f64 = rng.gen_range(lo..hi);
            assert!(pwl_min(&fl, RowSense::Eq, x) >= q * x * x - 1e-9);
        }
        let w = (hi - lo) / k as f64;
        for b in 0..=k {
            let x = lo + b as f64 * w;
            assert!((pwl_min(&fl, RowSense::Eq, x) - q * x * x).abs() < 1e-9);
        }
    }
}
