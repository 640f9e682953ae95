//! Local cost functions, their gradients, and the centralized-minimizer
//! oracle.
//!
//! Each agent holds a private cost. The networked dynamics only ever query
//! per-agent gradients, while diagnostics compare trajectories against the
//! minimizer of the summed cost computed here by an independent direct
//! solve (pure quadratic sets) or damped Newton iteration.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::sorted_eigenvalues;
use crate::stacked;

/// Shape of a trigonometric perturbation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigShape {
    Sin,
    Cos,
}

/// Additive perturbation `amplitude · Σ_k trig(z_k)`; the amplitude carries
/// the sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub shape: TrigShape,
    pub amplitude: f64,
}

impl TrigTerm {
    fn value(&self, z: &DVector<f64>) -> f64 {
        let s: f64 = z
            .iter()
            .map(|&zk| match self.shape {
                TrigShape::Sin => zk.sin(),
                TrigShape::Cos => zk.cos(),
            })
            .sum();
        self.amplitude * s
    }

    fn add_gradient(&self, z: &DVector<f64>, out: &mut DVector<f64>) {
        for (k, &zk) in z.iter().enumerate() {
            out[k] += match self.shape {
                TrigShape::Sin => self.amplitude * zk.cos(),
                TrigShape::Cos => -self.amplitude * zk.sin(),
            };
        }
    }

    fn add_hessian_diag(&self, z: &DVector<f64>, out: &mut DMatrix<f64>) {
        for (k, &zk) in z.iter().enumerate() {
            out[(k, k)] += match self.shape {
                TrigShape::Sin => -self.amplitude * zk.sin(),
                TrigShape::Cos => -self.amplitude * zk.cos(),
            };
        }
    }
}

/// `½ zᵀ Q z + qᵀ z` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    hessian: DMatrix<f64>,
    linear: DVector<f64>,
}

impl Quadratic {
    pub fn new(hessian: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        let n = hessian.nrows();
        if hessian.ncols() != n || linear.len() != n {
            return Err(Error::Shape(format!(
                "quadratic needs square Q and matching q, got {}x{} and {}",
                n,
                hessian.ncols(),
                linear.len()
            )));
        }
        let asym = (&hessian - hessian.transpose()).norm();
        if asym > 1e-12 {
            return Err(Error::InvalidObjective(format!(
                "Q is not symmetric: |Q − Qᵀ|F = {asym:.3e}"
            )));
        }
        let min_eig = sorted_eigenvalues(&hessian)[0];
        if min_eig < -1e-10 {
            return Err(Error::InvalidObjective(format!(
                "Q has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { hessian, linear })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.linear
    }
}

/// One agent's private cost.
#[derive(Debug, Clone)]
pub enum LocalObjective {
    Quadratic(Quadratic),
    /// Quadratic plus trigonometric perturbations; individual locals of this
    /// kind may be nonconvex even though the network-wide sum stays strongly
    /// convex.
    TrigPerturbed {
        quadratic: Quadratic,
        terms: Vec<TrigTerm>,
    },
}

impl LocalObjective {
    pub fn dim(&self) -> usize {
        self.quadratic().hessian.nrows()
    }

    fn quadratic(&self) -> &Quadratic {
        match self {
            LocalObjective::Quadratic(q) => q,
            LocalObjective::TrigPerturbed { quadratic, .. } => quadratic,
        }
    }

    fn check_dim(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point has dimension {}, objective expects {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn value(&self, z: &DVector<f64>) -> Result<f64> {
        self.check_dim(z)?;
        let q = self.quadratic();
        let mut v = 0.5 * (z.transpose() * &q.hessian * z)[(0, 0)] + q.linear.dot(z);
        if let LocalObjective::TrigPerturbed { terms, .. } = self {
            v += terms.iter().map(|t| t.value(z)).sum::<f64>();
        }
        Ok(v)
    }

    pub fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(z)?;
        let q = self.quadratic();
        let mut g = &q.hessian * z + &q.linear;
        if let LocalObjective::TrigPerturbed { terms, .. } = self {
            for t in terms {
                t.add_gradient(z, &mut g);
            }
        }
        Ok(g)
    }

    pub fn hessian_at(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(z)?;
        let mut h = self.quadratic().hessian.clone();
        if let LocalObjective::TrigPerturbed { terms, .. } = self {
            for t in terms {
                t.add_hessian_diag(z, &mut h);
            }
        }
        Ok(h)
    }
}

/// The `N` local costs together with the curvature constants of their sum.
///
/// `m_global` and `l_global` are the extreme eigenvalues of the summed
/// quadratic part; trigonometric perturbations are only admitted in
/// configurations whose perturbations cancel in the sum, so the constants
/// stay exact for the global cost.
#[derive(Debug, Clone)]
pub struct ObjectiveSet {
    locals: Vec<LocalObjective>,
    dim: usize,
    m_global: f64,
    l_global: f64,
}

impl ObjectiveSet {
    pub fn from_quadratics(quads: Vec<Quadratic>) -> Result<Self> {
        if quads.is_empty() {
            return Err(Error::InvalidObjective("objective set is empty".into()));
        }
        let dim = quads[0].hessian.nrows();
        let mut sum = DMatrix::zeros(dim, dim);
        for q in &quads {
            if q.hessian.nrows() != dim {
                return Err(Error::Shape(
                    "all local objectives must share one dimension".into(),
                ));
            }
            sum += &q.hessian;
        }
        let eigs = sorted_eigenvalues(&sum);
        let (m_global, l_global) = (eigs[0], eigs[dim - 1]);
        if m_global <= 0.0 {
            return Err(Error::InvalidObjective(format!(
                "summed cost is not strongly convex (min eigenvalue {m_global:.3e})"
            )));
        }
        Ok(Self {
            locals: quads.into_iter().map(LocalObjective::Quadratic).collect(),
            dim,
            m_global,
            l_global,
        })
    }

    /// Deterministic random quadratic benchmark set.
    ///
    /// Each `Q_i = A_iᵀ A_i` with `A_i` entries uniform on `[0, 1]` (drawn
    /// row-major), which guarantees symmetry and positive semidefiniteness;
    /// `q_i` entries are uniform on `[−5, 5]`. In the measure-zero event
    /// that the summed Hessian is degenerate the next seed is used, so the
    /// output is still a deterministic function of `seed`.
    pub fn random_quadratic(n_agents: usize, dim: usize, seed: u64) -> Result<Self> {
        if n_agents == 0 || dim == 0 {
            return Err(Error::InvalidObjective(
                "need at least one agent and one dimension".into(),
            ));
        }
        for attempt in 0..16 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
            let mut quads = Vec::with_capacity(n_agents);
            for _ in 0..n_agents {
                let entries: Vec<f64> = (0..dim * dim)
                    .map(|_| rng.random_range(0.0..1.0))
                    .collect();
                let a = DMatrix::from_row_slice(dim, dim, &entries);
                let q = a.transpose() * &a;
                let lin =
                    DVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(-5.0..5.0)));
                quads.push(Quadratic::new(q, lin)?);
            }
            match Self::from_quadratics(quads) {
                Ok(set) => return Ok(set),
                Err(Error::InvalidObjective(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::InvalidObjective(
            "16 consecutive seeds produced degenerate sets".into(),
        ))
    }

    /// Attaches the canceling trigonometric perturbations
    /// `(+sin, −sin, −5cos, +5cos)` to a base set of exactly four
    /// quadratics. The perturbations cancel pairwise in the sum, so the
    /// curvature constants carry over unchanged.
    pub fn example1_trig(base: &ObjectiveSet) -> Result<Self> {
        if base.locals.len() != 4 {
            return Err(Error::InvalidBenchmark(format!(
                "trig benchmark needs exactly 4 agents, got {}",
                base.locals.len()
            )));
        }
        let signs = [
            TrigTerm { shape: TrigShape::Sin, amplitude: 1.0 },
            TrigTerm { shape: TrigShape::Sin, amplitude: -1.0 },
            TrigTerm { shape: TrigShape::Cos, amplitude: -5.0 },
            TrigTerm { shape: TrigShape::Cos, amplitude: 5.0 },
        ];
        let locals = base
            .locals
            .iter()
            .zip(signs)
            .map(|(local, term)| match local {
                LocalObjective::Quadratic(q) => Ok(LocalObjective::TrigPerturbed {
                    quadratic: q.clone(),
                    terms: vec![term],
                }),
                LocalObjective::TrigPerturbed { .. } => Err(Error::InvalidBenchmark(
                    "base set must be purely quadratic".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            locals,
            dim: base.dim,
            m_global: base.m_global,
            l_global: base.l_global,
        })
    }

    pub fn locals(&self) -> &[LocalObjective] {
        &self.locals
    }

    pub fn local(&self, i: usize) -> &LocalObjective {
        &self.locals[i]
    }

    pub fn n_agents(&self) -> usize {
        self.locals.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m_global(&self) -> f64 {
        self.m_global
    }

    pub fn l_global(&self) -> f64 {
        self.l_global
    }

    pub fn is_pure_quadratic(&self) -> bool {
        self.locals
            .iter()
            .all(|l| matches!(l, LocalObjective::Quadratic(_)))
    }

    /// Stacked gradient: block `i` is `∇f_i` at agent `i`'s block of `x`.
    pub fn stacked_grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (n, d) = (self.n_agents(), self.dim);
        if x.len() != n * d {
            return Err(Error::Shape(format!(
                "stacked point has length {}, expected {}",
                x.len(),
                n * d
            )));
        }
        let mut out = DVector::zeros(n * d);
        for (i, local) in self.locals.iter().enumerate() {
            let g = local.gradient(&stacked::block(x, i, d).clone_owned())?;
            out.rows_mut(i * d, d).copy_from(&g);
        }
        Ok(out)
    }

    /// Value of the summed cost at a common point.
    pub fn sum_value(&self, z: &DVector<f64>) -> Result<f64> {
        self.locals.iter().map(|l| l.value(z)).sum()
    }

    /// Gradient of the summed cost at a common point.
    pub fn sum_gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        let mut g = DVector::zeros(self.dim);
        for l in &self.locals {
            g += l.gradient(z)?;
        }
        Ok(g)
    }

    /// Hessian of the summed cost at a common point.
    pub fn sum_hessian(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        let mut h = DMatrix::zeros(self.dim, self.dim);
        for l in &self.locals {
            h += l.hessian_at(z)?;
        }
        Ok(h)
    }

    /// Minimizer of the summed cost, independent of the network dynamics.
    ///
    /// Pure quadratic sets are solved directly via `(ΣQ_i) z = −Σq_i`;
    /// anything else runs damped Newton with the analytic Hessian
    /// (backtracking halving, at most 100 iterations). Succeeds when the
    /// summed gradient norm drops to `tol`.
    pub fn central_minimizer(&self, tol: f64) -> Result<DVector<f64>> {
        let h = self.sum_quadratic_hessian();
        let b = self.sum_quadratic_linear();
        let chol = nalgebra::Cholesky::new(h.clone()).ok_or_else(|| {
            Error::Numerical("summed quadratic Hessian is not positive definite".into())
        })?;
        let mut z = chol.solve(&(-&b));

        if self.is_pure_quadratic() {
            // One step of iterative refinement keeps the residual at the
            // roundoff floor even for ill-conditioned sums.
            let r = &h * &z + &b;
            z -= chol.solve(&r);
            let residual = (&h * &z + &b).norm();
            if residual > tol {
                return Err(Error::OracleFailure {
                    residual,
                    iterations: 1,
                });
            }
            return Ok(z);
        }

        let max_iterations = 100;
        for iteration in 0..max_iterations {
            let g = self.sum_gradient(&z)?;
            if g.norm() <= tol {
                return Ok(z);
            }
            let hess = self.sum_hessian(&z)?;
            let step = hess.lu().solve(&(-&g)).ok_or_else(|| Error::OracleFailure {
                residual: g.norm(),
                iterations: iteration,
            })?;
            let slope = g.dot(&step);
            let value = self.sum_value(&z)?;
            let mut t = 1.0;
            for _ in 0..60 {
                let candidate = &z + &step * t;
                if self.sum_value(&candidate)? <= value + 1e-4 * t * slope {
                    break;
                }
                t *= 0.5;
            }
            z += &step * t;
        }
        let residual = self.sum_gradient(&z)?.norm();
        Err(Error::OracleFailure {
            residual,
            iterations: max_iterations,
        })
    }

    fn sum_quadratic_hessian(&self) -> DMatrix<f64> {
        let mut sum = DMatrix::zeros(self.dim, self.dim);
        for l in &self.locals {
            sum += &l.quadratic().hessian;
        }
        sum
    }

    fn sum_quadratic_linear(&self) -> DVector<f64> {
        let mut sum = DVector::zeros(self.dim);
        for l in &self.locals {
            sum += &l.quadratic().linear;
        }
        sum
    }
}
