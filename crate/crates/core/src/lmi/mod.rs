//! Semidefinite feasibility synthesis of the switching rule.
//!
//! For each input-voltage polarity the rule is certified by a single shared
//! quadratic term `P0` and per-mode affine terms `S_i`. Feasibility is
//! checked at every corner of the uncertainty polytope (load resistance,
//! equilibrium current, input voltage) and at both vertices of the mode
//! simplex; a Finsler multiplier `L` adds the annihilator structure.
//!
//! Two fully independent assembly code paths exist on purpose: the
//! coefficient-matrix path in [`assemble`] feeds the solver, while the
//! numeric path in [`verify`] re-checks certificates entry by entry. A
//! transcription slip in either shows up as a mismatch between the two.

mod assemble;
mod solve;
mod verify;

pub use solve::{BackendSolution, FeasibilityBackend, InteriorPoint};
pub use verify::{
    assemble_alpha_coupling, assemble_cb, assemble_phi, assemble_psi, verify_certificate,
    VerificationReport,
};

use nalgebra::{DMatrix, DVector, SMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ConverterParams, DeltaVertex, EquilibriumPoint, HalfCycleModel, ModelError, Polarity,
    UncertaintyBox,
};
use crate::{Mat2, Vec2};

/// State dimension of the converter model.
pub const STATE_DIM: usize = 2;
/// Modes per polarity.
pub const MODES_PER_POLARITY: usize = 2;
/// Number of scalar decision variables: 3 (P0 upper triangle) + 4 (S
/// entries) + 12 (L entries).
pub const NUM_VARS: usize = 19;
/// Side of the unprojected constraint blocks, `n*m + m`.
pub const BLOCK_DIM: usize = 6;
/// Side of the projected blocks, `n*m + m - 1`.
pub const PROJECTED_DIM: usize = 5;

pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat62 = SMatrix<f64, 6, 2>;
pub type Mat26 = SMatrix<f64, 2, 6>;

#[derive(Debug, Error)]
pub enum LmiError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("annihilator needs at least two modes, got m={0}")]
    AnnihilatorDimension(usize),
    #[error("uncertainty polytope has no vertices")]
    EmptyPolytope,
    #[error("strictness margin must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("state scaling must have positive diagonal entries, got ({0}, {1})")]
    NonPositiveScaling(f64, f64),
    #[error("backend failed: {0}")]
    Backend(String),
    #[error("problem is infeasible or lacks the required margin: {0}")]
    Infeasible(Box<InfeasibleReport>),
    #[error("certificate i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("certificate format: {0}")]
    Format(#[from] serde_json::Error),
    #[error("certificate field {0} is malformed")]
    MalformedCertificate(&'static str),
}

/// Diagnostics attached to an infeasibility verdict so callers can tell a
/// genuinely infeasible problem from an ill-conditioned solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfeasibleReport {
    pub polarity: Polarity,
    pub requested_margin: f64,
    pub achieved_margin: f64,
    pub residual_spectra: Vec<BlockSpectrum>,
}

impl std::fmt::Display for InfeasibleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:?} polarity achieved margin {:.3e} < required {:.3e}",
            self.polarity, self.achieved_margin, self.requested_margin
        )
    }
}

/// Extreme eigenvalues of one normalized constraint block at the solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSpectrum {
    pub label: String,
    pub min_eig: f64,
    pub max_eig: f64,
}

/// Identifies a constraint block within a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockLabel {
    /// Projected vertex block at one polytope corner and simplex vertex.
    Vertex { delta: DeltaVertex, theta: usize },
    /// The `P0 >= t I` positivity block.
    Positivity,
}

impl std::fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockLabel::Vertex { delta, theta } => write!(
                f,
                "vertex(r_l={:.4}, i_eq={:.4}, v_in={:.4}, theta=e{})",
                delta.r_l,
                delta.i_eq,
                delta.v_in,
                theta + 1
            ),
            BlockLabel::Positivity => write!(f, "p0-positivity"),
        }
    }
}

/// Which side of the margin the block sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSense {
    /// `B(x) <= -t I`.
    UpperBounded,
    /// `B(x) >= t I`.
    LowerBounded,
}

/// One affine matrix-valued constraint `B(x) = sum_i x_i * coeffs[i]`,
/// already divided by `scale`.
#[derive(Debug, Clone)]
pub struct ConstraintBlock {
    pub label: BlockLabel,
    pub sense: BlockSense,
    pub dim: usize,
    pub coeffs: Vec<DMatrix<f64>>,
    pub scale: f64,
}

impl ConstraintBlock {
    /// Evaluate the normalized affine map at a decision vector.
    pub fn evaluate(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for (xi, f) in x.iter().zip(&self.coeffs) {
            acc += f * *xi;
        }
        acc
    }
}

/// Assembled feasibility problem for one polarity.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    pub polarity: Polarity,
    pub params: ConverterParams,
    pub alpha: [f64; 2],
    pub epsilon: f64,
    pub delta_box: UncertaintyBox,
    pub vertices: Vec<DeltaVertex>,
    /// 6x5 null-space basis the vertex blocks were projected with.
    pub qa: DMatrix<f64>,
    /// Vertex blocks followed by the positivity block.
    pub blocks: Vec<ConstraintBlock>,
}

/// Verified solution of an [`LmiProblem`].
#[derive(Debug, Clone)]
pub struct LmiCertificate {
    pub polarity: Polarity,
    pub p0: Mat2,
    pub s: [Vec2; 2],
    pub l: Mat62,
    pub margin: f64,
    pub epsilon: f64,
    pub alpha: [f64; 2],
    pub residual_spectra: Vec<BlockSpectrum>,
    pub solver: SolverInfo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverInfo {
    pub backend: String,
    pub iterations: usize,
    pub reported_margin: f64,
}

/// Linear annihilator of `theta`: a matrix with entries linear in `theta`
/// whose product with `theta` vanishes. Returns the `m(m-1)/2` standard
/// pairwise rows; for m = 2 this is the single row `[theta_2, -theta_1]`.
pub fn annihilator(theta: &[f64]) -> Result<DMatrix<f64>, LmiError> {
    let m = theta.len();
    if m < 2 {
        return Err(LmiError::AnnihilatorDimension(m));
    }
    let rows = m * (m - 1) / 2;
    let mut out = DMatrix::zeros(rows, m);
    let mut r = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            out[(r, i)] = theta[j];
            out[(r, j)] = -theta[i];
            r += 1;
        }
    }
    Ok(out)
}

/// Canonical basis for the null space of `C_a = [0_{1 x nm}, 1_m]`: the
/// first `nm` coordinate directions plus normalized successive differences
/// of the last `m` coordinates. Full column rank `nm + m - 1` by
/// construction.
pub fn null_space_basis(n: usize, m: usize) -> DMatrix<f64> {
    let rows = n * m + m;
    let cols = n * m + m - 1;
    let mut qa = DMatrix::zeros(rows, cols);
    for i in 0..n * m {
        qa[(i, i)] = 1.0;
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..m - 1 {
        qa[(n * m + j, n * m + j)] = s;
        qa[(n * m + j + 1, n * m + j)] = -s;
    }
    qa
}

/// A randomized orthonormal basis of the same null space, for checking that
/// solver verdicts do not depend on the basis choice.
pub fn random_null_basis<R: rand::Rng>(n: usize, m: usize, rng: &mut R) -> DMatrix<f64> {
    let rows = n * m + m;
    let cols = n * m + m - 1;
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v = DVector::from_fn(rows, |_, _| rng.gen_range(-1.0..1.0));
        // project onto null(C_a): last m entries sum to zero
        let mean: f64 = v.rows(n * m, m).iter().sum::<f64>() / m as f64;
        for i in 0..m {
            v[n * m + i] -= mean;
        }
        for b in &basis {
            let dot = v.dot(b);
            v -= b * dot;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    DMatrix::from_columns(&basis)
}

/// Normalization constant of one vertex block: the Frobenius norm of the
/// stacked vertex data `[A_1 A_2 K]`. Blocks are homogeneous in the decision
/// variables, so this data norm stands in for "the block at the zero
/// decision point" and levels the 1e0..1e5 spread of the raw SI entries.
pub fn block_scale(model: &HalfCycleModel, x_eq: &EquilibriumPoint) -> f64 {
    let mut sq = 0.0;
    for mode in &model.modes {
        sq += mode.a.norm_squared();
        let (_, k) = crate::model::error_dynamics(mode, x_eq);
        sq += k.norm_squared();
    }
    sq.sqrt().max(1.0)
}

pub(crate) fn decode_variables(x: &DVector<f64>) -> (Mat2, [Vec2; 2], Mat62) {
    let p0 = Mat2::new(x[0], x[1], x[1], x[2]);
    let s = [Vec2::new(x[3], x[4]), Vec2::new(x[5], x[6])];
    let l = Mat62::from_fn(|r, c| x[7 + 2 * r + c]);
    (p0, s, l)
}

pub(crate) fn encode_variables(p0: &Mat2, s: &[Vec2; 2], l: &Mat62) -> DVector<f64> {
    let mut x = DVector::zeros(NUM_VARS);
    x[0] = p0[(0, 0)];
    x[1] = p0[(0, 1)];
    x[2] = p0[(1, 1)];
    x[3] = s[0][0];
    x[4] = s[0][1];
    x[5] = s[1][0];
    x[6] = s[1][1];
    for r in 0..6 {
        for c in 0..2 {
            x[7 + 2 * r + c] = l[(r, c)];
        }
    }
    x
}

/// Build the feasibility problem over the full synthesis polytope of one
/// polarity (load range x current vertices x input-voltage axis).
pub fn build_feasibility_problem(
    params: &ConverterParams,
    polarity: Polarity,
    alpha: [f64; 2],
    epsilon: f64,
) -> Result<LmiProblem, LmiError> {
    let delta_box = UncertaintyBox::for_polarity(params, polarity)?;
    build_feasibility_problem_with_box(params, polarity, delta_box, alpha, epsilon)
}

/// Same as [`build_feasibility_problem`] but over an explicit uncertainty
/// box (degenerate axes reduce the vertex count accordingly).
pub fn build_feasibility_problem_with_box(
    params: &ConverterParams,
    polarity: Polarity,
    delta_box: UncertaintyBox,
    alpha: [f64; 2],
    epsilon: f64,
) -> Result<LmiProblem, LmiError> {
    build_problem_with_basis(
        params,
        polarity,
        delta_box,
        alpha,
        epsilon,
        null_space_basis(STATE_DIM, MODES_PER_POLARITY),
    )
}

/// Fully explicit builder: also takes the null-space basis used to project
/// the vertex blocks.
pub fn build_problem_with_basis(
    params: &ConverterParams,
    polarity: Polarity,
    delta_box: UncertaintyBox,
    alpha: [f64; 2],
    epsilon: f64,
    qa: DMatrix<f64>,
) -> Result<LmiProblem, LmiError> {
    params.validate()?;
    if !(epsilon > 0.0) {
        return Err(LmiError::NonPositiveEpsilon(epsilon));
    }
    let vertices = delta_box.enumerate_delta_vertices();
    if vertices.is_empty() {
        return Err(LmiError::EmptyPolytope);
    }
    let mut blocks = Vec::with_capacity(vertices.len() * MODES_PER_POLARITY + 1);
    for &vertex in &vertices {
        let model = crate::model::half_cycle_model(polarity, params, vertex.v_in, vertex.r_l)?;
        let x_eq = EquilibriumPoint::new(vertex.i_eq, params.v_o)?;
        let scale = block_scale(&model, &x_eq);
        for theta in 0..MODES_PER_POLARITY {
            let coeffs = assemble::vertex_block_coefficients(&model, &x_eq, alpha, theta, &qa);
            blocks.push(ConstraintBlock {
                label: BlockLabel::Vertex {
                    delta: vertex,
                    theta,
                },
                sense: BlockSense::UpperBounded,
                dim: PROJECTED_DIM,
                coeffs: coeffs.into_iter().map(|f| f / scale).collect(),
                scale,
            });
        }
    }
    blocks.push(assemble::positivity_block());
    Ok(LmiProblem {
        polarity,
        params: params.clone(),
        alpha,
        epsilon,
        delta_box,
        vertices,
        qa,
        blocks,
    })
}

/// Solve the feasibility problem through a backend and verify the result
/// through the independent assembly path. The reported `margin` is the
/// re-verified one, not the backend's claim.
pub fn solve_feasibility<B: FeasibilityBackend>(
    problem: &LmiProblem,
    backend: &B,
) -> Result<LmiCertificate, LmiError> {
    let solution = backend.solve(NUM_VARS, &problem.blocks)?;
    let (p0, s, l) = decode_variables(&solution.x);
    let candidate = LmiCertificate {
        polarity: problem.polarity,
        p0,
        s,
        l,
        margin: solution.margin,
        epsilon: problem.epsilon,
        alpha: problem.alpha,
        residual_spectra: Vec::new(),
        solver: SolverInfo {
            backend: solution.backend.clone(),
            iterations: solution.iterations,
            reported_margin: solution.margin,
        },
    };
    let spectra = verify::residual_spectra(&candidate, problem);
    let achieved = verify::achieved_margin(&spectra);
    if achieved < problem.epsilon {
        return Err(LmiError::Infeasible(Box::new(InfeasibleReport {
            polarity: problem.polarity,
            requested_margin: problem.epsilon,
            achieved_margin: achieved,
            residual_spectra: spectra,
        })));
    }
    Ok(LmiCertificate {
        margin: achieved,
        residual_spectra: spectra,
        ..candidate
    })
}

/// Transform a certificate for scaled states `z = D x` with `D = diag(d)`.
/// `P0 -> D^-1 P0 D^-1` and `S_i -> D^-1 S_i`, so per-mode values
/// `v_i(D e) = v_i(e)` and the argmax selection is unchanged. The Finsler
/// multiplier transforms congruently. Margins still refer to the original
/// coordinates.
pub fn scale_law(cert: &LmiCertificate, d: Vec2) -> Result<LmiCertificate, LmiError> {
    if !(d[0] > 0.0 && d[1] > 0.0) {
        return Err(LmiError::NonPositiveScaling(d[0], d[1]));
    }
    let d_inv = Mat2::new(1.0 / d[0], 0.0, 0.0, 1.0 / d[1]);
    let p0 = d_inv * cert.p0 * d_inv;
    let s = [d_inv * cert.s[0], d_inv * cert.s[1]];
    // rows transform by blkdiag(D^-1, D^-1, I), columns by D^-1
    let mut l = cert.l;
    for block in 0..2 {
        for r in 0..2 {
            for c in 0..2 {
                l[(2 * block + r, c)] /= d[r];
            }
        }
    }
    for r in 0..6 {
        for c in 0..2 {
            l[(r, c)] /= d[c];
        }
    }
    Ok(LmiCertificate {
        p0,
        s,
        l,
        ..cert.clone()
    })
}

/// On-disk JSON form of a certificate.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub polarity: Polarity,
    /// Upper triangle of P0: [p00, p01, p11].
    pub p0_upper: [f64; 3],
    /// Per-mode affine terms, conducting mode first.
    pub s: [[f64; 2]; 2],
    /// 6x2 Finsler multiplier, row major.
    pub l: [[f64; 2]; 6],
    pub margin: f64,
    pub epsilon: f64,
    pub alpha: [f64; 2],
    pub residual_spectra: Vec<BlockSpectrum>,
    pub solver: SolverInfo,
}

impl LmiCertificate {
    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            polarity: self.polarity,
            p0_upper: [self.p0[(0, 0)], self.p0[(0, 1)], self.p0[(1, 1)]],
            s: [
                [self.s[0][0], self.s[0][1]],
                [self.s[1][0], self.s[1][1]],
            ],
            l: std::array::from_fn(|r| [self.l[(r, 0)], self.l[(r, 1)]]),
            margin: self.margin,
            epsilon: self.epsilon,
            alpha: self.alpha,
            residual_spectra: self.residual_spectra.clone(),
            solver: self.solver.clone(),
        }
    }

    pub fn from_file(file: CertificateFile) -> Result<LmiCertificate, LmiError> {
        let p0 = Mat2::new(
            file.p0_upper[0],
            file.p0_upper[1],
            file.p0_upper[1],
            file.p0_upper[2],
        );
        if !p0.iter().all(|v| v.is_finite()) {
            return Err(LmiError::MalformedCertificate("p0_upper"));
        }
        let s = [
            Vec2::new(file.s[0][0], file.s[0][1]),
            Vec2::new(file.s[1][0], file.s[1][1]),
        ];
        if !s.iter().all(|v| v[0].is_finite() && v[1].is_finite()) {
            return Err(LmiError::MalformedCertificate("s"));
        }
        let l = Mat62::from_fn(|r, c| file.l[r][c]);
        if !l.iter().all(|v| v.is_finite()) {
            return Err(LmiError::MalformedCertificate("l"));
        }
        Ok(LmiCertificate {
            polarity: file.polarity,
            p0,
            s,
            l,
            margin: file.margin,
            epsilon: file.epsilon,
            alpha: file.alpha,
            residual_spectra: file.residual_spectra,
            solver: file.solver,
        })
    }

    pub fn save_json(&self, path: &std::path::Path) -> Result<(), LmiError> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_json(path: &std::path::Path) -> Result<LmiCertificate, LmiError> {
        let text = std::fs::read_to_string(path)?;
        let file: CertificateFile = serde_json::from_str(&text)?;
        LmiCertificate::from_file(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Polarity;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn annihilator_kills_theta() {
        let a = annihilator(&[1.0, 0.0]).unwrap();
        assert_eq!(a.nrows(), 1);
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(a[(0, 1)], -1.0);

        let a = annihilator(&[0.3, 0.7]).unwrap();
        assert_relative_eq!(a[(0, 0)], 0.7);
        assert_relative_eq!(a[(0, 1)], -0.3);
        let theta = DVector::from_column_slice(&[0.3, 0.7]);
        assert!((a * theta).norm() < 1e-15);

        let theta3 = [1.0, 2.0, 3.0];
        let a = annihilator(&theta3).unwrap();
        assert_eq!(a.nrows(), 3);
        let tv = DVector::from_column_slice(&theta3);
        // brute-force check of every pairwise row
        for r in 0..3 {
            let dot: f64 = (0..3).map(|c| a[(r, c)] * tv[c]).sum();
            assert!(dot.abs() < 1e-15);
        }

        assert!(annihilator(&[1.0]).is_err());
    }

    #[test]
    fn null_basis_spans_the_null_space() {
        let qa = null_space_basis(2, 2);
        assert_eq!((qa.nrows(), qa.ncols()), (6, 5));
        // C_a * Q_a = 0 with C_a = [0 0 0 0 1 1]
        for c in 0..5 {
            let sum = qa[(4, c)] + qa[(5, c)];
            assert!(sum.abs() < 1e-12);
        }
        assert_eq!(qa.rank(1e-12), 5);
    }

    #[test]
    fn random_null_basis_is_orthonormal_and_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let qa = random_null_basis(2, 2, &mut rng);
        let gram = qa.transpose() * &qa;
        for r in 0..5 {
            for c in 0..5 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((gram[(r, c)] - expect).abs() < 1e-10);
            }
        }
        for c in 0..5 {
            assert!((qa[(4, c)] + qa[(5, c)]).abs() < 1e-10);
        }
    }

    #[test]
    fn problem_has_expected_block_counts() {
        let params = ConverterParams::design_300w();
        let p = build_feasibility_problem(&params, Polarity::Positive, [1e4, 1e4], 1e-8).unwrap();
        assert_eq!(p.blocks.len(), 8 * 2 + 1);
        assert_eq!(p.vertices.len(), 8);

        let degenerate = UncertaintyBox::new(
            crate::model::load_range(&params),
            (0.0, params.peak_current()),
            (170.0, 170.0),
        )
        .unwrap();
        let p = build_feasibility_problem_with_box(
            &params,
            Polarity::Positive,
            degenerate,
            [1e4, 1e4],
            1e-8,
        )
        .unwrap();
        assert_eq!(p.blocks.len(), 4 * 2 + 1);
    }

    #[test]
    fn blocks_are_affine_and_symmetric() {
        let params = ConverterParams::design_300w();
        let p = build_feasibility_problem(&params, Polarity::Positive, [1e4, 1e4], 1e-8).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let xa = DVector::from_fn(NUM_VARS, |_, _| rng.gen_range(-1.0..1.0));
        let xb = DVector::from_fn(NUM_VARS, |_, _| rng.gen_range(-1.0..1.0));
        for block in &p.blocks {
            // evaluating at unit directions separately reproduces the sum
            let at_sum = block.evaluate(&(&xa + &xb));
            let split = block.evaluate(&xa) + block.evaluate(&xb);
            assert!((at_sum.clone() - split).norm() < 1e-9 * (1.0 + at_sum.norm()));
            let sym_err = (at_sum.clone() - at_sum.transpose()).norm();
            assert!(sym_err < 1e-10 * (1.0 + at_sum.norm()));
        }
    }

    #[test]
    fn variable_codec_round_trips() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let x = DVector::from_fn(NUM_VARS, |_, _| rng.gen_range(-2.0..2.0));
        let (p0, s, l) = decode_variables(&x);
        assert_eq!(encode_variables(&p0, &s, &l), x);
    }

    fn dummy_cert() -> LmiCertificate {
        LmiCertificate {
            polarity: Polarity::Positive,
            p0: Mat2::new(2.0, 0.5, 0.5, 3.0),
            s: [Vec2::new(1.0, -1.0), Vec2::new(0.5, 0.25)],
            l: Mat62::from_fn(|r, c| (r * 2 + c) as f64),
            margin: 1.0,
            epsilon: 1e-8,
            alpha: [1e4, 1e4],
            residual_spectra: vec![],
            solver: SolverInfo {
                backend: "test".into(),
                iterations: 0,
                reported_margin: 1.0,
            },
        }
    }

    #[test]
    fn scale_law_identity_and_errors() {
        let cert = dummy_cert();
        let id = scale_law(&cert, Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(id.p0, cert.p0);
        assert_eq!(id.s, cert.s);
        assert_eq!(id.l, cert.l);
        assert!(scale_law(&cert, Vec2::new(0.0, 1.0)).is_err());
        assert!(scale_law(&cert, Vec2::new(1.0, -2.0)).is_err());
    }

    #[test]
    fn scale_law_preserves_argmax() {
        use rand::{Rng, SeedableRng};
        let mut cert = dummy_cert();
        cert.s = [Vec2::new(-2.951e-6, -6.0e-8), Vec2::new(5.417e-9, 0.0)];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let d = Vec2::new(rng.gen_range(0.01..100.0), rng.gen_range(0.01..100.0));
            let scaled = scale_law(&cert, d).unwrap();
            let e = Vec2::new(rng.gen_range(-5.0..5.0), rng.gen_range(-50.0..50.0));
            let de = Vec2::new(d[0] * e[0], d[1] * e[1]);
            let pick = |s: &[Vec2; 2], e: &Vec2| usize::from(e.dot(&s[1]) > e.dot(&s[0]));
            assert_eq!(pick(&cert.s, &e), pick(&scaled.s, &de));
        }
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = LmiCertificate {
            polarity: Polarity::Negative,
            p0: Mat2::new(1.5e-3, 5.1e-5, 5.1e-5, 4.0e-4),
            s: [Vec2::new(2.4e-3, -3.7e-5), Vec2::new(-2.4e-3, 3.7e-5)],
            l: Mat62::from_fn(|r, c| 0.1 * (r as f64) - 0.05 * (c as f64)),
            margin: 1.19e-5,
            epsilon: 1e-8,
            alpha: [1e4, 1e4],
            residual_spectra: vec![BlockSpectrum {
                label: "p0-positivity".into(),
                min_eig: 3.9e-4,
                max_eig: 1.5e-3,
            }],
            solver: SolverInfo {
                backend: "interior-point".into(),
                iterations: 42,
                reported_margin: 1.19e-5,
            },
        };
        let dir = std::env::temp_dir().join("tpbr-cert-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cert.json");
        cert.save_json(&path).unwrap();
        let loaded = LmiCertificate::load_json(&path).unwrap();
        assert_eq!(loaded.polarity, cert.polarity);
        assert_eq!(loaded.p0, cert.p0);
        assert_eq!(loaded.s, cert.s);
        assert_eq!(loaded.l, cert.l);
        assert_eq!(loaded.margin, cert.margin);
    }
}
