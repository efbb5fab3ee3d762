//! Max-margin semidefinite feasibility backend.
//!
//! The decision blocks are linear homogeneous, so feasibility is posed as
//!
//! ```text
//! maximize t   s.t.   B_j(x) <= -t I   (vertex blocks)
//!                     P0(x)  >=  t I   (positivity block)
//!                     |x_i| <= box_bound,   t <= margin_cap
//! ```
//!
//! The box keeps the homogeneous problem bounded; any positive rescaling of
//! a solution is again a solution. The path-following barrier method below
//! is plenty for this size (~20 variables, ~17 blocks of side 5).

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{BlockSense, ConstraintBlock, LmiError};

/// Backend contract: maximize the slack `t` over the given affine blocks
/// and return the achieved margin together with the decision variables.
pub trait FeasibilityBackend {
    fn solve(
        &self,
        num_vars: usize,
        blocks: &[ConstraintBlock],
    ) -> Result<BackendSolution, LmiError>;
}

#[derive(Debug, Clone)]
pub struct BackendSolution {
    pub margin: f64,
    pub x: DVector<f64>,
    pub iterations: usize,
    pub backend: String,
}

/// Log-det barrier interior-point method on the margin formulation.
#[derive(Debug, Clone)]
pub struct InteriorPoint {
    /// Bound on each decision variable; fixes the scale of the homogeneous
    /// solution.
    pub box_bound: f64,
    /// Upper cap on the margin variable.
    pub margin_cap: f64,
    /// Target duality-gap estimate `nu / eta` at termination.
    pub gap_tol: f64,
    /// Multiplicative increase of the barrier weight per outer stage.
    pub eta_growth: f64,
    /// Newton iteration cap per stage.
    pub max_newton: usize,
}

impl Default for InteriorPoint {
    fn default() -> Self {
        InteriorPoint {
            box_bound: 1.0,
            margin_cap: 10.0,
            gap_tol: 1e-9,
            eta_growth: 8.0,
            max_newton: 80,
        }
    }
}

struct BarrierState<'a> {
    blocks: &'a [ConstraintBlock],
    num_vars: usize,
    box_bound: f64,
    margin_cap: f64,
}

impl BarrierState<'_> {
    /// Slack matrix of one block: `-B(x) - tI` or `B(x) - tI` depending on
    /// sense; feasible iff positive definite.
    fn slack(&self, block: &ConstraintBlock, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
        let b = block.evaluate(x);
        let mut g = match block.sense {
            BlockSense::UpperBounded => -b,
            BlockSense::LowerBounded => b,
        };
        for d in 0..block.dim {
            g[(d, d)] -= t;
        }
        g
    }

    fn is_strictly_feasible(&self, u: &DVector<f64>) -> bool {
        let (x, t) = split(u);
        if t >= self.margin_cap {
            return false;
        }
        if x.iter().any(|v| v.abs() >= self.box_bound) {
            return false;
        }
        self.blocks
            .iter()
            .all(|b| Cholesky::new(self.slack(b, &x, t)).is_some())
    }

    /// Barrier value; `None` when outside the domain.
    fn barrier(&self, u: &DVector<f64>) -> Option<f64> {
        let (x, t) = split(u);
        if t >= self.margin_cap {
            return None;
        }
        let mut phi = -(self.margin_cap - t).ln();
        for v in x.iter() {
            if v.abs() >= self.box_bound {
                return None;
            }
            phi -= (self.box_bound - v).ln() + (self.box_bound + v).ln();
        }
        for b in self.blocks {
            let chol = Cholesky::new(self.slack(b, &x, t))?;
            // log det G = 2 sum log diag(chol)
            let logdet: f64 = (0..b.dim).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
            phi -= 2.0 * logdet;
        }
        Some(phi)
    }

    /// Gradient and Hessian of `f = -eta * t + barrier`.
    fn derivatives(&self, u: &DVector<f64>, eta: f64) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.num_vars + 1;
        let (x, t) = split(u);
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        grad[self.num_vars] = -eta;

        for b in self.blocks {
            let g = self.slack(b, &x, t);
            let g_inv = Cholesky::new(g)
                .expect("derivatives called at an infeasible point")
                .inverse();
            let sense = match b.sense {
                BlockSense::UpperBounded => -1.0,
                BlockSense::LowerBounded => 1.0,
            };
            // W_a = G^-1 dG/du_a; dG/dx_a = sense * F_a, dG/dt = -I
            let mut w: Vec<DMatrix<f64>> = Vec::with_capacity(dim);
            for a in 0..self.num_vars {
                w.push(&g_inv * &b.coeffs[a] * sense);
            }
            w.push(-g_inv.clone());
            for (a, wa) in w.iter().enumerate() {
                grad[a] -= wa.trace();
                for (bb, wb) in w.iter().enumerate().skip(a) {
                    let tr = trace_product(wa, wb);
                    hess[(a, bb)] += tr;
                    if bb != a {
                        hess[(bb, a)] += tr;
                    }
                }
            }
        }

        for a in 0..self.num_vars {
            let lo = self.box_bound + x[a];
            let hi = self.box_bound - x[a];
            grad[a] += 1.0 / hi - 1.0 / lo;
            hess[(a, a)] += 1.0 / (hi * hi) + 1.0 / (lo * lo);
        }
        let cap = self.margin_cap - t;
        grad[self.num_vars] += 1.0 / cap;
        hess[(self.num_vars, self.num_vars)] += 1.0 / (cap * cap);

        (grad, hess)
    }
}

fn split(u: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = u.len() - 1;
    (u.rows(0, n).into_owned(), u[n])
}

fn trace_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

impl FeasibilityBackend for InteriorPoint {
    fn solve(
        &self,
        num_vars: usize,
        blocks: &[ConstraintBlock],
    ) -> Result<BackendSolution, LmiError> {
        for b in blocks {
            if b.coeffs.len() != num_vars {
                return Err(LmiError::Backend(format!(
                    "block {} has {} coefficient matrices, expected {}",
                    b.label,
                    b.coeffs.len(),
                    num_vars
                )));
            }
        }
        let state = BarrierState {
            blocks,
            num_vars,
            box_bound: self.box_bound,
            margin_cap: self.margin_cap,
        };
        // total barrier degree: matrix dims + 2 box ends per variable + cap
        let nu: f64 =
            blocks.iter().map(|b| b.dim as f64).sum::<f64>() + 2.0 * num_vars as f64 + 1.0;

        let mut u = DVector::zeros(num_vars + 1);
        u[num_vars] = -1.0;
        debug_assert!(state.is_strictly_feasible(&u));

        let mut eta = 1.0;
        let mut total_newton = 0usize;
        let mut f_curr = state
            .barrier(&u)
            .ok_or_else(|| LmiError::Backend("initial point infeasible".into()))?
            - eta * u[num_vars];

        while nu / eta > self.gap_tol {
            for _ in 0..self.max_newton {
                total_newton += 1;
                let (grad, mut hess) = state.derivatives(&u, eta);
                let step = loop {
                    match Cholesky::new(hess.clone()) {
                        Some(ch) => break ch.solve(&(-&grad)),
                        None => {
                            // regularize a numerically semidefinite Hessian
                            let ridge = 1e-10 * (1.0 + hess.diagonal().amax());
                            for d in 0..hess.nrows() {
                                hess[(d, d)] += ridge;
                            }
                        }
                    }
                };
                let decrement = -grad.dot(&step);
                if !decrement.is_finite() {
                    return Err(LmiError::Backend("newton step diverged".into()));
                }
                if decrement < 1e-11 * (1.0 + f_curr.abs()) {
                    break;
                }
                let mut alpha = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let trial = &u + &step * alpha;
                    if let Some(phi) = state.barrier(&trial) {
                        let f_trial = phi - eta * trial[num_vars];
                        if f_trial <= f_curr - 0.25 * alpha * decrement {
                            u = trial;
                            f_curr = f_trial;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            eta *= self.eta_growth;
            f_curr = state.barrier(&u).unwrap() - eta * u[num_vars];
        }

        let (x, t) = split(&u);
        Ok(BackendSolution {
            margin: t,
            x,
            iterations: total_newton,
            backend: "interior-point".into(),
        })
    }
}
