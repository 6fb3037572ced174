//! Small instances with closed-form trilevel values.

use crate::model::{standardize_omega, FirstLevel, Polytope, ThirdLevel, WcaroInstance};
use crate::sparse::SparseMatrix;

fn unit_interval() -> crate::model::OmegaStandard {
    standardize_omega(&Polytope::boxed(vec![0.0], vec![1.0])).expect("unit interval")
}

/// `min_{x∈[0,2]} x + max_{h∈[0,1]} min{y : y ≥ 0, y ≥ h − x}`; value 1.
pub fn t1() -> WcaroInstance {
    WcaroInstance {
        name: "T1".into(),
        first: FirstLevel {
            n_x: 1,
            feasible_set: Polytope::boxed(vec![0.0], vec![2.0]),
            obj_linear: vec![1.0],
            obj_quadratic_diag: vec![0.0],
            obj_constant: 0.0,
        },
        omega: unit_interval(),
        third: ThirdLevel {
            n_cont: 1,
            n_bin: 0,
            c: vec![1.0],
            a_free: SparseMatrix::from_dense(&[vec![1.0]]),
            free_senses: Vec::new(),
            b_free: vec![0.0],
            b_coupled: SparseMatrix::from_dense(&[vec![1.0]]),
            b_x: SparseMatrix::from_dense(&[vec![-1.0]]),
            b_h: SparseMatrix::from_dense(&[vec![1.0]]),
            b0: vec![0.0],
            beta_lower: vec![0.0],
            beta_upper: vec![1.0],
        },
    }
}

/// `max_{h∈[0,1]} min{y₁ + 0.6 μ : y₁ ≥ 0, y₁ + μ ≥ h, μ ∈ {0,1}}`; value 0.6.
pub fn t2() -> WcaroInstance {
    WcaroInstance {
        name: "T2".into(),
        first: FirstLevel::empty(),
        omega: unit_interval(),
        third: ThirdLevel {
            n_cont: 1,
            n_bin: 1,
            c: vec![1.0, 0.6],
            a_free: SparseMatrix::from_dense(&[vec![1.0, 0.0]]),
            free_senses: Vec::new(),
            b_free: vec![0.0],
            b_coupled: SparseMatrix::from_dense(&[vec![1.0, 1.0]]),
            b_x: SparseMatrix::new(1, 0),
            b_h: SparseMatrix::from_dense(&[vec![1.0]]),
            b0: vec![0.0],
            beta_lower: vec![0.0],
            beta_upper: vec![1.0],
        },
    }
}
