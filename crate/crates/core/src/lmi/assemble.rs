//! Solver-side assembly: per-variable coefficient matrices of the vertex
//! blocks.
//!
//! Each projected block is linear homogeneous in the decision variables, so
//! it is represented as a stack of coefficient matrices indexed by the
//! variable layout of [`super::decode_variables`]. The entries are written
//! out structurally (basis matrix by basis matrix) rather than through full
//! matrix products; the numeric path in [`super::verify`] is the second,
//! independent route to the same blocks.

use nalgebra::DMatrix;

use super::{BlockLabel, BlockSense, ConstraintBlock, Mat6, BLOCK_DIM, NUM_VARS};
use crate::model::{error_dynamics, EquilibriumPoint, HalfCycleModel};
use crate::{Mat2, Vec2};

/// Symmetric basis matrices of the P0 upper triangle in variable order.
fn p0_basis(idx: usize) -> Mat2 {
    match idx {
        0 => Mat2::new(1.0, 0.0, 0.0, 0.0),
        1 => Mat2::new(0.0, 1.0, 1.0, 0.0),
        _ => Mat2::new(0.0, 0.0, 0.0, 1.0),
    }
}

/// Coefficient matrices (6x6, unprojected) of one vertex block, one per
/// decision variable. `theta` is the simplex-vertex index (0 -> e1,
/// 1 -> e2).
pub(super) fn unprojected_coefficients(
    model: &HalfCycleModel,
    x_eq: &EquilibriumPoint,
    alpha: [f64; 2],
    theta: usize,
) -> Vec<Mat6> {
    let a = [model.modes[0].a, model.modes[1].a];
    let k = [
        error_dynamics(&model.modes[0], x_eq).1,
        error_dynamics(&model.modes[1], x_eq).1,
    ];
    let mut coeffs = vec![Mat6::zeros(); NUM_VARS];

    // P0 variables: upper-left gets A_i'E + E A_j - (alpha_i + alpha_j) E,
    // the K-columns get E k_j.
    for var in 0..3 {
        let e = p0_basis(var);
        let f = &mut coeffs[var];
        for i in 0..2 {
            for j in 0..2 {
                let sub = a[i].transpose() * e + e * a[j] - e * (alpha[i] + alpha[j]);
                for r in 0..2 {
                    for c in 0..2 {
                        f[(2 * i + r, 2 * j + c)] += sub[(r, c)];
                    }
                }
            }
            for j in 0..2 {
                let col = e * k[j];
                for r in 0..2 {
                    f[(2 * i + r, 4 + j)] += col[r];
                    f[(4 + j, 2 * i + r)] += col[r];
                }
            }
        }
    }

    // S variables: S_c component r. Column 4+c of the cross block gets
    // (A_i' + 2 alpha_i I) e_r per mode row; the lower-right block gets the
    // symmetrized K' e_r e_c' term.
    for c in 0..2 {
        for r in 0..2 {
            let var = 3 + 2 * c + r;
            let f = &mut coeffs[var];
            let e_r = if r == 0 {
                Vec2::new(1.0, 0.0)
            } else {
                Vec2::new(0.0, 1.0)
            };
            for i in 0..2 {
                let col = a[i].transpose() * e_r + e_r * (2.0 * alpha[i]);
                for row in 0..2 {
                    f[(2 * i + row, 4 + c)] += col[row];
                    f[(4 + c, 2 * i + row)] += col[row];
                }
            }
            for mode in 0..2 {
                let val = k[mode][r];
                f[(4 + mode, 4 + c)] += val;
                f[(4 + c, 4 + mode)] += val;
            }
        }
    }

    // L variables: E_l C_b + C_b' E_l' puts C_b row c into row r.
    let cb = cb_row_data(theta);
    for r in 0..6 {
        for c in 0..2 {
            let var = 7 + 2 * r + c;
            let f = &mut coeffs[var];
            for col in 0..BLOCK_DIM {
                f[(r, col)] += cb[c][col];
                f[(col, r)] += cb[c][col];
            }
        }
    }

    coeffs
}

/// Rows of `C_b(theta) = [aleph_theta (x) I_n, 0]` at a simplex vertex.
fn cb_row_data(theta: usize) -> [[f64; 6]; 2] {
    // theta = e1: aleph = [0, -1] -> [0*I, -I, 0]
    // theta = e2: aleph = [1,  0] -> [I,  0*I, 0]
    match theta {
        0 => [[0.0, 0.0, -1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0, 0.0, 0.0]],
        _ => [[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0, 0.0, 0.0]],
    }
}

/// Project the coefficient stack with the null-space basis.
pub(super) fn vertex_block_coefficients(
    model: &HalfCycleModel,
    x_eq: &EquilibriumPoint,
    alpha: [f64; 2],
    theta: usize,
    qa: &DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    unprojected_coefficients(model, x_eq, alpha, theta)
        .into_iter()
        .map(|f| {
            let full = DMatrix::from_fn(BLOCK_DIM, BLOCK_DIM, |r, c| f[(r, c)]);
            qa.transpose() * full * qa
        })
        .collect()
}

/// The `P0 >= t I` block: coefficients are the symmetric basis matrices in
/// the P0 slots, zero elsewhere.
pub(super) fn positivity_block() -> ConstraintBlock {
    let mut coeffs = vec![DMatrix::zeros(2, 2); NUM_VARS];
    for var in 0..3 {
        let e = p0_basis(var);
        coeffs[var] = DMatrix::from_fn(2, 2, |r, c| e[(r, c)]);
    }
    ConstraintBlock {
        label: BlockLabel::Positivity,
        sense: BlockSense::LowerBounded,
        dim: super::STATE_DIM,
        coeffs,
        scale: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::PROJECTED_DIM;
    use crate::model::{half_cycle_model, ConverterParams, Polarity};

    #[test]
    fn coefficient_stack_has_expected_sparsity() {
        let params = ConverterParams::design_300w();
        let model = half_cycle_model(Polarity::Positive, &params, 170.0, 481.33).unwrap();
        let x_eq = EquilibriumPoint::new(1.771, 380.0).unwrap();
        let coeffs = unprojected_coefficients(&model, &x_eq, [1e4, 1e4], 0);
        assert_eq!(coeffs.len(), NUM_VARS);
        // every coefficient matrix is symmetric
        for f in &coeffs {
            assert!((f - f.transpose()).norm() < 1e-12 * (1.0 + f.norm()));
        }
        // L coefficients never touch the z-z corner (C_b has zero columns
        // in the z slots)
        for var in 7..NUM_VARS {
            let f = &coeffs[var];
            for r in 4..6 {
                for c in 4..6 {
                    assert_eq!(f[(r, c)], 0.0);
                }
            }
        }
        // S coefficients never touch the y-y block
        for var in 3..7 {
            let f = &coeffs[var];
            for r in 0..4 {
                for c in 0..4 {
                    assert_eq!(f[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn projected_blocks_have_projected_dim() {
        let params = ConverterParams::design_300w();
        let model = half_cycle_model(Polarity::Positive, &params, 100.0, 1000.0).unwrap();
        let x_eq = EquilibriumPoint::new(2.0, 380.0).unwrap();
        let qa = super::super::null_space_basis(2, 2);
        let coeffs = vertex_block_coefficients(&model, &x_eq, [1e4, 1e4], 1, &qa);
        for f in &coeffs {
            assert_eq!((f.nrows(), f.ncols()), (PROJECTED_DIM, PROJECTED_DIM));
        }
    }
}
