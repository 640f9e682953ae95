//! Fixed-step classical Runge–Kutta integration with trajectory recording.
//!
//! The dynamics are smooth and moderately stiff at the benchmark gains, so
//! a deterministic fixed-step RK4 suffices; a stability heuristic warns
//! when the step looks too large for the fastest feedback terms.

use serde::Serialize;

use crate::dynamics::{DynamicsField, DynamicsVariant, Gains, SystemState};
use crate::error::{Error, Result};

/// Any state-derivative map usable by the integrator.
pub trait VectorField {
    fn eval(&self, state: &SystemState) -> Result<SystemState>;
}

impl VectorField for DynamicsField {
    fn eval(&self, state: &SystemState) -> Result<SystemState> {
        DynamicsField::eval(self, state)
    }
}

impl<F> VectorField for F
where
    F: Fn(&SystemState) -> Result<SystemState>,
{
    fn eval(&self, state: &SystemState) -> Result<SystemState> {
        self(state)
    }
}

/// Step size, horizon, and recording stride.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Step size.
    pub h: f64,
    /// Final time.
    pub t_end: f64,
    /// Record every k-th step (the initial and final states are always
    /// recorded).
    pub record_stride: usize,
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "integrator.h must be positive, got {}",
                self.h
            )));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "integrator.t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.t_end / self.h < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "integrator.t_end/h = {} is below one step",
                self.t_end / self.h
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig(
                "integrator.record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of RK4 steps covering `[0, t_end]`; the final step may be
    /// shorter than `h`.
    pub fn step_count(&self) -> usize {
        let steps = (self.t_end / self.h).ceil();
        // Guard against t_end/h landing a hair above an integer.
        if (steps - 1.0) * self.h >= self.t_end - 1e-12 * self.t_end {
            (steps as usize - 1).max(1)
        } else {
            steps as usize
        }
    }
}

/// Heuristic step-size stability factor `h · (c1·l + (c2 + c4)·λmax(L) + c5)`.
pub fn stability_factor(h: f64, gains: &Gains, l_global: f64, lambda_max_l: f64) -> f64 {
    h * (gains.c1 * l_global + (gains.c2 + gains.c4) * lambda_max_l + gains.c5)
}

/// Values above this trigger a step-size warning (not an error).
pub const STABILITY_THRESHOLD: f64 = 2.5;

/// Warning text when the heuristic factor exceeds the threshold.
pub fn stability_warning(
    h: f64,
    gains: &Gains,
    l_global: f64,
    lambda_max_l: f64,
) -> Option<String> {
    let factor = stability_factor(h, gains, l_global, lambda_max_l);
    (factor > STABILITY_THRESHOLD).then(|| {
        format!(
            "step size h = {h} gives stability factor {factor:.3} > {STABILITY_THRESHOLD}; \
             expect inaccuracy or divergence"
        )
    })
}

/// Provenance carried alongside recorded states.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryMeta {
    pub variant: DynamicsVariant,
    pub gains: Gains,
    pub seed: Option<u64>,
    pub integrator: IntegratorConfig,
}

/// Time-stamped recorded states of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn final_state(&self) -> &SystemState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }
}

/// One classical RK4 step of size `h` from `state`; `t` only labels
/// divergence errors (the fields are autonomous).
pub fn rk4_step<F: VectorField>(
    field: &F,
    t: f64,
    state: &SystemState,
    h: f64,
) -> Result<SystemState> {
    let check = |k: &SystemState| match k.first_non_finite() {
        Some(component) => Err(Error::Divergence {
            time: t,
            component,
            partial: None,
        }),
        None => Ok(()),
    };
    let k1 = field.eval(state)?;
    check(&k1)?;
    let k2 = field.eval(&state.add_scaled(&k1, h / 2.0))?;
    check(&k2)?;
    let k3 = field.eval(&state.add_scaled(&k2, h / 2.0))?;
    check(&k3)?;
    let k4 = field.eval(&state.add_scaled(&k3, h))?;
    check(&k4)?;
    Ok(state.rk4_combine(h, &k1, &k2, &k3, &k4))
}

/// Components beyond this magnitude abort the run as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Integrates `field` over `[0, t_end]`, recording every
/// `record_stride`-th step plus the initial and final states.
///
/// On divergence the partial trajectory recorded so far is attached to the
/// error so callers can persist it.
pub fn integrate<F: VectorField>(
    field: &F,
    state0: SystemState,
    cfg: &IntegratorConfig,
    meta: TrajectoryMeta,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n_steps = cfg.step_count();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![state0.clone()],
        meta,
    };
    let mut state = state0;
    let mut t = 0.0;
    for step in 1..=n_steps {
        let target = if step == n_steps {
            cfg.t_end
        } else {
            step as f64 * cfg.h
        };
        let h = target - t;
        state = match rk4_step(field, t, &state, h) {
            Ok(s) => s,
            Err(Error::Divergence { time, component, .. }) => {
                return Err(Error::Divergence {
                    time,
                    component,
                    partial: Some(Box::new(traj)),
                })
            }
            Err(e) => return Err(e),
        };
        t = target;
        if let Some(component) = state
            .first_non_finite()
            .or_else(|| state.first_exceeding(DIVERGENCE_LIMIT))
        {
            return Err(Error::Divergence {
                time: t,
                component,
                partial: Some(Box::new(traj)),
            });
        }
        if step % cfg.record_stride == 0 || step == n_steps {
            traj.times.push(t);
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}
