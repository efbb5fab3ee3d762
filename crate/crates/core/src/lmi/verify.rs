//! Verifier-side assembly and certificate checking.
//!
//! Everything here works on numeric certificate values and plain matrix
//! products, deliberately sharing no assembly code with the coefficient
//! path in [`super::assemble`].

use nalgebra::{DMatrix, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    block_scale, BlockLabel, BlockSpectrum, LmiCertificate, LmiProblem, Mat26, Mat6, Mat62,
};
use crate::model::{
    error_dynamics, half_cycle_model, EquilibriumPoint, HalfCycleModel,
};
use crate::{Mat2, Vec2};

type Mat24 = SMatrix<f64, 2, 4>;
type Mat42 = SMatrix<f64, 4, 2>;
type Mat44 = SMatrix<f64, 4, 4>;

/// Stack the vertex data: `A = [A_1 A_2]`, `K = [k_1 k_2]`.
fn stacked_data(model: &HalfCycleModel, x_eq: &EquilibriumPoint) -> (Mat24, Mat2) {
    let mut a = Mat24::zeros();
    a.fixed_view_mut::<2, 2>(0, 0).copy_from(&model.modes[0].a);
    a.fixed_view_mut::<2, 2>(0, 2).copy_from(&model.modes[1].a);
    let mut k = Mat2::zeros();
    k.set_column(0, &error_dynamics(&model.modes[0], x_eq).1);
    k.set_column(1, &error_dynamics(&model.modes[1], x_eq).1);
    (a, k)
}

fn compose(ul: Mat44, ur: Mat42, lr: Mat2) -> Mat6 {
    let mut g = Mat6::zeros();
    g.fixed_view_mut::<4, 4>(0, 0).copy_from(&ul);
    g.fixed_view_mut::<4, 2>(0, 4).copy_from(&ur);
    g.fixed_view_mut::<2, 4>(4, 0).copy_from(&ur.transpose());
    g.fixed_view_mut::<2, 2>(4, 4).copy_from(&lr);
    g
}

/// The quadratic/cross/affine-offset block
/// `Psi = [[A'P + P'A, P'K + A'S], [K'P + S'A, K'S + S'K]]` with
/// `P = [P0 P0]`.
pub fn assemble_psi(
    model: &HalfCycleModel,
    x_eq: &EquilibriumPoint,
    p0: &Mat2,
    s: &[Vec2; 2],
) -> Mat6 {
    let (a, k) = stacked_data(model, x_eq);
    let mut p = Mat24::zeros();
    p.fixed_view_mut::<2, 2>(0, 0).copy_from(p0);
    p.fixed_view_mut::<2, 2>(0, 2).copy_from(p0);
    let mut s_mat = Mat2::zeros();
    s_mat.set_column(0, &s[0]);
    s_mat.set_column(1, &s[1]);

    let ul: Mat44 = a.transpose() * p + p.transpose() * a;
    let ur: Mat42 = p.transpose() * k + a.transpose() * s_mat;
    let lr: Mat2 = k.transpose() * s_mat + s_mat.transpose() * k;
    compose(ul, ur, lr)
}

/// The sliding S-procedure block `Phi = [[0, 2 alpha' S], [2 S' alpha, 0]]`.
pub fn assemble_phi(alpha: [f64; 2], s: &[Vec2; 2]) -> Mat6 {
    let mut al = Mat24::zeros();
    al.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&(Mat2::identity() * alpha[0]));
    al.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(Mat2::identity() * alpha[1]));
    let mut s_mat = Mat2::zeros();
    s_mat.set_column(0, &s[0]);
    s_mat.set_column(1, &s[1]);
    let ur: Mat42 = al.transpose() * s_mat * 2.0;
    compose(Mat44::zeros(), ur, Mat2::zeros())
}

/// Mode-coupling of the shared quadratic term:
/// `-(alpha' P0 I_a + I_a' P0 alpha)`, i.e. `-(alpha_i + alpha_j) P0` on
/// every (i, j) sub-block of the upper-left corner.
///
/// This term survives the equal-`P_i` reduction of the general projected
/// stability condition; without it the design-point problem is only weakly
/// feasible (margin 0), so it is assembled as its own summand next to the
/// plain `Psi`/`Phi` forms.
pub fn assemble_alpha_coupling(alpha: [f64; 2], p0: &Mat2) -> Mat6 {
    let mut ul = Mat44::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let sub = -(alpha[i] + alpha[j]) * p0;
            ul.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&sub);
        }
    }
    compose(ul, Mat42::zeros(), Mat2::zeros())
}

/// `C_b(theta) = [aleph_theta (x) I_n, 0_{rn x m}]` for n = m = 2.
pub fn assemble_cb(theta: (f64, f64)) -> Mat26 {
    let mut cb = Mat26::zeros();
    cb.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&(Mat2::identity() * theta.1));
    cb.fixed_view_mut::<2, 2>(0, 2)
        .copy_from(&(Mat2::identity() * -theta.0));
    cb
}

/// Full unprojected block at a vertex: `Psi + Phi + coupling + L C_b +
/// C_b' L'`.
pub fn full_block(
    model: &HalfCycleModel,
    x_eq: &EquilibriumPoint,
    cert_p0: &Mat2,
    cert_s: &[Vec2; 2],
    cert_l: &Mat62,
    alpha: [f64; 2],
    theta: (f64, f64),
) -> Mat6 {
    let cb = assemble_cb(theta);
    let lcb: Mat6 = cert_l * cb;
    assemble_psi(model, x_eq, cert_p0, cert_s)
        + assemble_phi(alpha, cert_s)
        + assemble_alpha_coupling(alpha, cert_p0)
        + lcb
        + lcb.transpose()
}

/// Project and normalize a full block with the problem basis.
fn project(problem: &LmiProblem, g: &Mat6, scale: f64) -> DMatrix<f64> {
    let full = DMatrix::from_fn(6, 6, |r, c| g[(r, c)]);
    (problem.qa.transpose() * full * &problem.qa) / scale
}

fn sym_eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eigs = sym.symmetric_eigenvalues();
    (eigs.min(), eigs.max())
}

/// Extreme eigenvalues of every problem block at the certificate values,
/// recomputed through this module's assembly path.
pub(super) fn residual_spectra(cert: &LmiCertificate, problem: &LmiProblem) -> Vec<BlockSpectrum> {
    let mut spectra = Vec::with_capacity(problem.blocks.len());
    for block in &problem.blocks {
        match &block.label {
            BlockLabel::Vertex { delta, theta } => {
                let model = half_cycle_model(
                    problem.polarity,
                    &problem.params,
                    delta.v_in,
                    delta.r_l,
                )
                .expect("vertex data was validated at build time");
                let x_eq = EquilibriumPoint::new(delta.i_eq, problem.params.v_o)
                    .expect("vertex data was validated at build time");
                let theta_v = if *theta == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
                let g = full_block(
                    &model,
                    &x_eq,
                    &cert.p0,
                    &cert.s,
                    &cert.l,
                    problem.alpha,
                    theta_v,
                );
                let scale = block_scale(&model, &x_eq);
                let (lo, hi) = sym_eig_range(&project(problem, &g, scale));
                spectra.push(BlockSpectrum {
                    label: block.label.to_string(),
                    min_eig: lo,
                    max_eig: hi,
                });
            }
            BlockLabel::Positivity => {
                let p = DMatrix::from_fn(2, 2, |r, c| cert.p0[(r, c)]);
                let (lo, hi) = sym_eig_range(&p);
                spectra.push(BlockSpectrum {
                    label: block.label.to_string(),
                    min_eig: lo,
                    max_eig: hi,
                });
            }
        }
    }
    spectra
}

/// Margin implied by a spectrum list: smallest of `min_eig(P0)` and
/// `-max_eig` over the vertex blocks.
pub(super) fn achieved_margin(spectra: &[BlockSpectrum]) -> f64 {
    let mut margin = f64::INFINITY;
    for s in spectra {
        if s.label == "p0-positivity" {
            margin = margin.min(s.min_eig);
        } else {
            margin = margin.min(-s.max_eig);
        }
    }
    margin
}

/// Outcome of an independent certificate check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Worst (largest) max-eigenvalue over all normalized vertex blocks.
    pub worst_vertex_max_eig: f64,
    /// Smallest eigenvalue of P0.
    pub p0_min_eig: f64,
    /// Number of random interior points checked.
    pub interior_samples: usize,
    /// Worst max-eigenvalue over the sampled interior blocks (normalized).
    pub worst_interior_max_eig: f64,
    pub vertex_spectra: Vec<BlockSpectrum>,
    /// Human-readable descriptions of every violation found.
    pub violations: Vec<String>,
    pub passed: bool,
}

/// Re-check a certificate against a problem: all vertex blocks must clear
/// the strictness margin, and `sample_count` random interior points of the
/// (theta-simplex x delta-box) domain must give negative definite blocks.
pub fn verify_certificate(
    cert: &LmiCertificate,
    problem: &LmiProblem,
    sample_count: usize,
    seed: u64,
) -> VerificationReport {
    let spectra = residual_spectra(cert, problem);
    let mut violations = Vec::new();
    let mut worst_vertex = f64::NEG_INFINITY;
    let mut p0_min = f64::INFINITY;
    for s in &spectra {
        if s.label == "p0-positivity" {
            p0_min = p0_min.min(s.min_eig);
            if s.min_eig < problem.epsilon {
                violations.push(format!(
                    "{}: min eigenvalue {:.3e} below epsilon {:.1e}",
                    s.label, s.min_eig, problem.epsilon
                ));
            }
        } else {
            worst_vertex = worst_vertex.max(s.max_eig);
            if s.max_eig > -problem.epsilon {
                violations.push(format!(
                    "{}: max eigenvalue {:.3e} above -epsilon {:.1e}",
                    s.label, s.max_eig, -problem.epsilon
                ));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_interior = f64::NEG_INFINITY;
    for sample in 0..sample_count {
        let b = &problem.delta_box;
        let r_l = rng.gen_range(b.r_l_range.0..=b.r_l_range.1);
        let i_eq = sample_range(&mut rng, b.i_eq_range);
        let v_in = sample_range(&mut rng, b.v_in_range);
        let th = rng.gen_range(0.0..1.0);
        let theta = (th, 1.0 - th);

        let model = match half_cycle_model(problem.polarity, &problem.params, v_in, r_l) {
            Ok(m) => m,
            Err(e) => {
                violations.push(format!("sample {sample}: invalid vertex data: {e}"));
                continue;
            }
        };
        let x_eq = EquilibriumPoint::new(i_eq, problem.params.v_o)
            .expect("v_o validated at build time");
        let g = full_block(&model, &x_eq, &cert.p0, &cert.s, &cert.l, problem.alpha, theta);
        let scale = block_scale(&model, &x_eq);
        let (_, hi) = sym_eig_range(&project(problem, &g, scale));
        worst_interior = worst_interior.max(hi);
        if hi >= 0.0 {
            violations.push(format!(
                "sample {sample}: interior point (r_l={r_l:.3}, i_eq={i_eq:.3}, \
                 v_in={v_in:.3}, theta={:.3}) not negative definite, max eig {hi:.3e}",
                theta.0
            ));
        }
    }

    VerificationReport {
        worst_vertex_max_eig: worst_vertex,
        p0_min_eig: p0_min,
        interior_samples: sample_count,
        worst_interior_max_eig: worst_interior,
        vertex_spectra: spectra,
        passed: violations.is_empty(),
        violations,
    }
}

fn sample_range<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConverterParams, Polarity};

    fn setup() -> (ConverterParams, HalfCycleModel, EquilibriumPoint) {
        let params = ConverterParams::design_300w();
        let model = half_cycle_model(Polarity::Positive, &params, 170.0, 481.33).unwrap();
        let x_eq = EquilibriumPoint::new(1.771, 380.0).unwrap();
        (params, model, x_eq)
    }

    #[test]
    fn psi_is_symmetric_and_matches_trivial_cases() {
        let (_, model, x_eq) = setup();
        // S = 0, P0 = I: the upper-left block is A'[I I] + [I;I]'... i.e.
        // sub-block (i,j) = A_i' + A_j
        let s0 = [Vec2::zeros(), Vec2::zeros()];
        let psi = assemble_psi(&model, &x_eq, &Mat2::identity(), &s0);
        assert!((psi - psi.transpose()).norm() < 1e-12 * psi.norm());
        for i in 0..2 {
            for j in 0..2 {
                let expect = model.modes[i].a.transpose() + model.modes[j].a;
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((psi[(2 * i + r, 2 * j + c)] - expect[(r, c)]).abs() < 1e-9);
                    }
                }
            }
        }
        // K = 0 (zero equilibrium and zero input): lower-right 2x2 is zero
        let params = ConverterParams::design_300w();
        let model0 = half_cycle_model(Polarity::Positive, &params, 0.0, 481.33).unwrap();
        let zero_eq = EquilibriumPoint { i_eq: 0.0, v_eq: 0.0 };
        let s = [Vec2::new(0.3, -0.2), Vec2::new(-0.1, 0.4)];
        let psi = assemble_psi(&model0, &zero_eq, &Mat2::identity(), &s);
        for r in 4..6 {
            for c in 4..6 {
                assert_eq!(psi[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn phi_trivial_cases() {
        let zero = [Vec2::zeros(), Vec2::zeros()];
        assert_eq!(assemble_phi([1e4, 1e4], &zero), Mat6::zeros());
        let s = [Vec2::new(1.0, 0.5), Vec2::new(-0.5, 2.0)];
        assert_eq!(assemble_phi([0.0, 0.0], &s), Mat6::zeros());
        // alpha = (1e4, 1e4), S1 = e1, S2 = e2: off-diagonal entries are
        // 2e4 at the expected slots
        let s = [Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let phi = assemble_phi([1e4, 1e4], &s);
        assert_eq!(phi[(0, 4)], 2.0e4);
        assert_eq!(phi[(1, 5)], 2.0e4);
        assert_eq!(phi[(2, 4)], 2.0e4);
        assert_eq!(phi[(3, 5)], 2.0e4);
        assert_eq!(phi[(4, 0)], 2.0e4);
        assert!((phi - phi.transpose()).norm() < 1e-12);
        // upper-left nm x nm block stays zero
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(phi[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn cb_at_simplex_vertices() {
        let cb1 = assemble_cb((1.0, 0.0));
        // [0*I, -I, 0]
        for r in 0..2 {
            for c in 0..6 {
                let expect = if c == r + 2 { -1.0 } else { 0.0 };
                assert_eq!(cb1[(r, c)], expect);
            }
        }
        let cb2 = assemble_cb((0.0, 1.0));
        for r in 0..2 {
            for c in 0..6 {
                let expect = if c == r { 1.0 } else { 0.0 };
                assert_eq!(cb2[(r, c)], expect);
            }
        }
    }

    #[test]
    fn cb_annihilates_theta_consistent_stack() {
        // a stacked vector w = [theta_1 y; theta_2 y; z] is killed by
        // C_b(theta) for any y, z
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t0: f64 = rng.gen_range(0.0..1.0);
            let theta = (t0, 1.0 - t0);
            let y = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let w = nalgebra::SVector::<f64, 6>::from_column_slice(&[
                theta.0 * y[0],
                theta.0 * y[1],
                theta.1 * y[0],
                theta.1 * y[1],
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]);
            let out = assemble_cb(theta) * w;
            assert!(out.norm() < 1e-12);
        }
    }

    #[test]
    fn full_block_is_symmetric_at_random_values() {
        use rand::{Rng, SeedableRng};
        let (_, model, x_eq) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p0 = {
                let d = Mat2::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                (d + d.transpose()) * 0.5
            };
            let s = [
                Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ];
            let l = Mat62::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let th: f64 = rng.gen_range(0.0..1.0);
            let g = full_block(&model, &x_eq, &p0, &s, &l, [1e4, 1e4], (th, 1.0 - th));
            assert!((g - g.transpose()).norm() < 1e-10 * (1.0 + g.norm()));
        }
    }
}
