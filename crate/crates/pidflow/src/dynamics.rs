//! Vector fields of the PID-type distributed optimization dynamics.
//!
//! Four variants share the stacked state layout from [`SystemState`]:
//!
//! - `FirstOrderPid`: `ẋ = (I + c3·𝓛)⁻¹(−c1·∇f(x) − c2·𝓛x − λ)`,
//!   `λ̇ = c4·𝓛x`. The derivative feedback couples `ẋ` to itself across
//!   agents; the coupling matrix `(I + c3·L)` is symmetric positive
//!   definite, so a cached Cholesky factorization resolves it exactly.
//! - `SecondOrderPid`: `ẋ = v`,
//!   `v̇ = −c1·∇f(x) − c2·𝓛x − c3·λ − c4·𝓛v − c5·v`, `λ̇ = 𝓛x`.
//! - `Corollary`: as second-order but the integral feedback enters through
//!   the Laplacian, `−c3·𝓛λ`, which spares agents from sharing their dual
//!   variables directly.
//! - `Zhu2022`: the `Corollary` field with the friction gain pinned to
//!   `c5 = 0`, the friction-free baseline the comparisons run against.
//!
//! `𝓛 = L ⊗ I_n` throughout, applied blockwise and never materialized.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{kron_apply, LaplacianBundle};
use crate::objectives::ObjectiveSet;
use crate::stacked;

/// Feedback gains. `c5` is the friction coefficient of the second-order
/// dynamics and is unused by the first-order variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gains {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
}

impl Gains {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, c5: f64) -> Self {
        Self { c1, c2, c3, c4, c5 }
    }

    /// Checks that every gain the variant uses is strictly positive.
    pub fn validate_for(&self, variant: DynamicsVariant) -> Result<()> {
        let mut used = vec![
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
        ];
        match variant {
            DynamicsVariant::SecondOrderPid | DynamicsVariant::Corollary => {
                used.push(("c5", self.c5));
            }
            DynamicsVariant::FirstOrderPid | DynamicsVariant::Zhu2022 => {}
        }
        for (name, value) in used {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidGains(format!(
                    "gains.{name} must be strictly positive, got {value}"
                )));
            }
        }
        if variant == DynamicsVariant::Zhu2022 && self.c5 != 0.0 {
            return Err(Error::InvalidGains(format!(
                "gains.c5 is fixed to 0 for the zhu2022 baseline, got {}",
                self.c5
            )));
        }
        Ok(())
    }

    /// Degenerate configuration `c4 = 1`, `c2 = c3 = c5`: under the change
    /// of variables `v̂ = v + 𝓛x` the second-order dynamics reduce to a
    /// plain gradient-flow consensus algorithm.
    pub fn remark4_preset(&self) -> Gains {
        Gains {
            c1: self.c1,
            c2: self.c2,
            c3: self.c2,
            c4: 1.0,
            c5: self.c2,
        }
    }
}

/// Which vector field drives the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsVariant {
    FirstOrderPid,
    SecondOrderPid,
    Corollary,
    Zhu2022,
}

impl DynamicsVariant {
    /// Second-order variants carry the velocity state `v`.
    pub fn has_velocity(self) -> bool {
        !matches!(self, DynamicsVariant::FirstOrderPid)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsVariant::FirstOrderPid => "first_order_pid",
            DynamicsVariant::SecondOrderPid => "second_order_pid",
            DynamicsVariant::Corollary => "corollary",
            DynamicsVariant::Zhu2022 => "zhu2022",
        }
    }
}

/// Stacked network state: estimates `x`, integral (dual) state `λ`, and for
/// second-order variants the velocity `v`. Also used for state derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub x: DVector<f64>,
    pub lambda: DVector<f64>,
    pub v: Option<DVector<f64>>,
}

impl SystemState {
    /// `self + a · k`, blockwise over all present components.
    pub fn add_scaled(&self, k: &SystemState, a: f64) -> SystemState {
        SystemState {
            x: &self.x + &k.x * a,
            lambda: &self.lambda + &k.lambda * a,
            v: match (&self.v, &k.v) {
                (Some(v), Some(kv)) => Some(v + kv * a),
                (None, None) => None,
                _ => unreachable!("state and derivative layouts always match"),
            },
        }
    }

    /// Classical RK4 combination `self + h/6 · (k1 + 2k2 + 2k3 + k4)`.
    pub fn rk4_combine(
        &self,
        h: f64,
        k1: &SystemState,
        k2: &SystemState,
        k3: &SystemState,
        k4: &SystemState,
    ) -> SystemState {
        let sixth = h / 6.0;
        let third = h / 3.0;
        self.add_scaled(k1, sixth)
            .add_scaled(k2, third)
            .add_scaled(k3, third)
            .add_scaled(k4, sixth)
    }

    /// Euclidean norm over all components.
    pub fn norm(&self) -> f64 {
        let mut s = self.x.norm_squared() + self.lambda.norm_squared();
        if let Some(v) = &self.v {
            s += v.norm_squared();
        }
        s.sqrt()
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.x.amax().max(self.lambda.amax());
        if let Some(v) = &self.v {
            m = m.max(v.amax());
        }
        m
    }

    /// Index (in `x`, then `λ`, then `v` order) of the first non-finite
    /// component, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        let mut offset = 0;
        for part in [Some(&self.x), Some(&self.lambda), self.v.as_ref()]
            .into_iter()
            .flatten()
        {
            if let Some(k) = part.iter().position(|c| !c.is_finite()) {
                return Some(offset + k);
            }
            offset += part.len();
        }
        None
    }

    /// Index of the first component whose magnitude exceeds `limit`.
    pub fn first_exceeding(&self, limit: f64) -> Option<usize> {
        let mut offset = 0;
        for part in [Some(&self.x), Some(&self.lambda), self.v.as_ref()]
            .into_iter()
            .flatten()
        {
            if let Some(k) = part.iter().position(|c| c.abs() > limit) {
                return Some(offset + k);
            }
            offset += part.len();
        }
        None
    }
}

/// Builds a valid initial state for a variant.
///
/// The dual state must start with a zero blockwise sum — the dynamics
/// conserve `(1ᵀ ⊗ I) λ`, and only the zero value makes the equilibrium
/// optimal. Omitted `λ0` and `v0` default to zero, which always satisfies
/// the condition.
pub fn init_state(
    variant: DynamicsVariant,
    n_agents: usize,
    dim: usize,
    x0: DVector<f64>,
    lambda0: Option<DVector<f64>>,
    v0: Option<DVector<f64>>,
) -> Result<SystemState> {
    let len = n_agents * dim;
    if x0.len() != len {
        return Err(Error::Shape(format!(
            "x0 has length {}, expected {}",
            x0.len(),
            len
        )));
    }
    let lambda = match lambda0 {
        Some(l0) => {
            if l0.len() != len {
                return Err(Error::Shape(format!(
                    "lambda0 has length {}, expected {}",
                    l0.len(),
                    len
                )));
            }
            let sum = stacked::block_sum(&l0, dim);
            if sum.amax() > 1e-12 {
                return Err(Error::InvalidInit(format!(
                    "lambda0 blocks must sum to zero, |Σ λ_i|∞ = {:.3e}",
                    sum.amax()
                )));
            }
            l0
        }
        None => DVector::zeros(len),
    };
    let v = match (variant.has_velocity(), v0) {
        (true, Some(v0)) => {
            if v0.len() != len {
                return Err(Error::Shape(format!(
                    "v0 has length {}, expected {}",
                    v0.len(),
                    len
                )));
            }
            Some(v0)
        }
        (true, None) => Some(DVector::zeros(len)),
        (false, None) => None,
        (false, Some(_)) => {
            return Err(Error::InvalidInit(
                "v0 supplied but the first-order dynamics carry no velocity state".into(),
            ))
        }
    };
    Ok(SystemState { x: x0, lambda, v })
}

/// A variant's right-hand side bound to a graph and an objective set.
///
/// Evaluation is pure; the bundled operators are immutable, so one field
/// value can drive many concurrent integrations.
#[derive(Debug, Clone)]
pub struct DynamicsField {
    variant: DynamicsVariant,
    gains: Gains,
    bundle: Arc<LaplacianBundle>,
    set: Arc<ObjectiveSet>,
    /// Cholesky factorization of `(I + c3·L)`, present for the first-order
    /// variant. `L` is positive semidefinite and `c3 > 0`, so the matrix
    /// has eigenvalues at least 1 and always factors.
    derivative_coupling: Option<Cholesky<f64, Dyn>>,
}

impl DynamicsField {
    pub fn new(
        variant: DynamicsVariant,
        gains: Gains,
        bundle: Arc<LaplacianBundle>,
        set: Arc<ObjectiveSet>,
    ) -> Result<Self> {
        gains.validate_for(variant)?;
        if bundle.n_agents() != set.n_agents() {
            return Err(Error::Shape(format!(
                "graph has {} vertices but the objective set has {} agents",
                bundle.n_agents(),
                set.n_agents()
            )));
        }
        let derivative_coupling = if variant == DynamicsVariant::FirstOrderPid {
            let n = bundle.n_agents();
            let m = DMatrix::identity(n, n) + &bundle.l * gains.c3;
            Some(Cholesky::new(m).ok_or_else(|| {
                Error::Numerical("(I + c3·L) failed to factor despite being SPD".into())
            })?)
        } else {
            None
        };
        Ok(Self {
            variant,
            gains,
            bundle,
            set,
            derivative_coupling,
        })
    }

    pub fn variant(&self) -> DynamicsVariant {
        self.variant
    }

    pub fn gains(&self) -> Gains {
        self.gains
    }

    pub fn bundle(&self) -> &LaplacianBundle {
        &self.bundle
    }

    pub fn set(&self) -> &ObjectiveSet {
        &self.set
    }

    pub fn n_agents(&self) -> usize {
        self.bundle.n_agents()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Solves `((I + c3·L) ⊗ I_n) y = rhs` blockwise: the `N×N`
    /// factorization is applied independently to each of the `n` coordinate
    /// slices instead of factoring the full Kronecker matrix.
    fn solve_derivative_coupling(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let chol = self
            .derivative_coupling
            .as_ref()
            .expect("first-order field always carries the factorization");
        let (n_agents, dim) = (self.n_agents(), self.dim());
        let mut slices = DMatrix::zeros(n_agents, dim);
        for i in 0..n_agents {
            for k in 0..dim {
                slices[(i, k)] = rhs[i * dim + k];
            }
        }
        let solved = chol.solve(&slices);
        let mut out = DVector::zeros(n_agents * dim);
        for i in 0..n_agents {
            for k in 0..dim {
                out[i * dim + k] = solved[(i, k)];
            }
        }
        out
    }

    /// State derivative at `state`.
    pub fn eval(&self, state: &SystemState) -> Result<SystemState> {
        match self.variant {
            DynamicsVariant::FirstOrderPid => self.eval_first_order(state),
            DynamicsVariant::SecondOrderPid => self.eval_second_order(state),
            DynamicsVariant::Corollary | DynamicsVariant::Zhu2022 => self.eval_corollary(state),
        }
    }

    fn eval_first_order(&self, state: &SystemState) -> Result<SystemState> {
        if state.v.is_some() {
            return Err(Error::Shape(
                "first-order state must not carry a velocity component".into(),
            ));
        }
        let g = self.gains;
        let dim = self.dim();
        let grad = self.set.stacked_grad(&state.x)?;
        let lx = kron_apply(&self.bundle.l, dim, &state.x)?;
        let rhs = -(&grad * g.c1) - &lx * g.c2 - &state.lambda;
        let dx = self.solve_derivative_coupling(&rhs);
        let dlambda = &lx * g.c4;
        Ok(SystemState {
            x: dx,
            lambda: dlambda,
            v: None,
        })
    }

    fn eval_second_order(&self, state: &SystemState) -> Result<SystemState> {
        let v = state
            .v
            .as_ref()
            .ok_or_else(|| Error::Shape("second-order state needs a velocity component".into()))?;
        let g = self.gains;
        let dim = self.dim();
        let grad = self.set.stacked_grad(&state.x)?;
        let lx = kron_apply(&self.bundle.l, dim, &state.x)?;
        let lv = kron_apply(&self.bundle.l, dim, v)?;
        let dv = -(&grad * g.c1) - &lx * g.c2 - &state.lambda * g.c3 - &lv * g.c4 - v * g.c5;
        Ok(SystemState {
            x: v.clone(),
            lambda: lx,
            v: Some(dv),
        })
    }

    fn eval_corollary(&self, state: &SystemState) -> Result<SystemState> {
        let v = state
            .v
            .as_ref()
            .ok_or_else(|| Error::Shape("second-order state needs a velocity component".into()))?;
        let g = self.gains;
        let dim = self.dim();
        let grad = self.set.stacked_grad(&state.x)?;
        let lx = kron_apply(&self.bundle.l, dim, &state.x)?;
        let lv = kron_apply(&self.bundle.l, dim, v)?;
        let llambda = kron_apply(&self.bundle.l, dim, &state.lambda)?;
        let dv = -(&grad * g.c1) - &lx * g.c2 - &llambda * g.c3 - &lv * g.c4 - v * g.c5;
        Ok(SystemState {
            x: v.clone(),
            lambda: lx,
            v: Some(dv),
        })
    }

    /// Norm of the full state derivative; zero exactly at equilibria.
    pub fn equilibrium_residual(&self, state: &SystemState) -> Result<f64> {
        Ok(self.eval(state)?.norm())
    }

    /// The analytical equilibrium built from the centralized minimizer:
    /// consensus on `z*` with the dual state balancing the gradients.
    pub fn analytical_equilibrium(&self, z_star: &DVector<f64>) -> Result<SystemState> {
        let x = stacked::consensus_stack(z_star, self.n_agents());
        let grad = self.set.stacked_grad(&x)?;
        let g = self.gains;
        let (lambda, v) = match self.variant {
            DynamicsVariant::FirstOrderPid => (-&grad * g.c1, None),
            DynamicsVariant::SecondOrderPid => {
                (-&grad * (g.c1 / g.c3), Some(DVector::zeros(x.len())))
            }
            DynamicsVariant::Corollary | DynamicsVariant::Zhu2022 => {
                // The integral term enters through 𝓛, so the balancing dual
                // state is the Γ-weighted gradient; Γ𝓛 = Π and the summed
                // gradient vanishes at z*, hence 𝓛λ* = −(c1/c3)·∇f(x*).
                let gamma_grad = kron_apply(&self.bundle.gamma, self.dim(), &grad)?;
                (-gamma_grad * (g.c1 / g.c3), Some(DVector::zeros(x.len())))
            }
        };
        Ok(SystemState { x, lambda, v })
    }
}
