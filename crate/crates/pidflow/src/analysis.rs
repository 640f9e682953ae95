//! Convergence diagnostics: error metrics, exponential-rate fitting, the
//! Lyapunov evaluator for the first-order dynamics, and the gain-condition
//! checker for the second-order variants.

use nalgebra::DVector;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::dynamics::{DynamicsVariant, Gains, SystemState};
use crate::error::{Error, Result};
use crate::graph::{kron_apply, LaplacianBundle};
use crate::integrator::Trajectory;
use crate::objectives::ObjectiveSet;
use crate::stacked;

/// Per-recorded-state convergence series.
///
/// `relative_error` is `‖x(t) − 1⊗z*‖ / ‖x(0) − 1⊗z*‖`; when the run
/// starts exactly at the optimum the series falls back to the absolute
/// error and `absolute_mode` is set.
#[derive(Debug, Clone)]
pub struct MetricsSeries {
    pub times: Vec<f64>,
    pub relative_error: Vec<f64>,
    pub consensus_error: Vec<f64>,
    pub optimality_residual: Vec<f64>,
    pub lambda_sum_drift: Vec<f64>,
    pub absolute_mode: bool,
    pub z_star: DVector<f64>,
    pub initial_error_norm: f64,
}

struct MetricsRow {
    relative_error: f64,
    consensus_error: f64,
    optimality_residual: f64,
    lambda_sum_drift: f64,
}

fn metrics_row(
    state: &SystemState,
    set: &ObjectiveSet,
    bundle: &LaplacianBundle,
    x_star: &DVector<f64>,
    scale: f64,
) -> Result<MetricsRow> {
    let dim = set.dim();
    let err = (&state.x - x_star).norm();
    let consensus = kron_apply(&bundle.l, dim, &state.x)?.norm();
    let mut grad_sum = DVector::zeros(dim);
    for i in 0..set.n_agents() {
        grad_sum += set
            .local(i)
            .gradient(&stacked::block(&state.x, i, dim).clone_owned())?;
    }
    Ok(MetricsRow {
        relative_error: err / scale,
        consensus_error: consensus,
        optimality_residual: grad_sum.norm(),
        lambda_sum_drift: stacked::block_sum(&state.lambda, dim).amax(),
    })
}

/// Computes the metric series against the centralized-minimizer oracle.
///
/// With the `parallel` feature the recorded states are processed with
/// rayon; the sequential path is [`metrics_sequential`].
pub fn metrics(
    traj: &Trajectory,
    set: &ObjectiveSet,
    bundle: &LaplacianBundle,
) -> Result<MetricsSeries> {
    let setup = metrics_setup(traj, set)?;
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<MetricsRow>> = traj
        .states
        .par_iter()
        .map(|s| metrics_row(s, set, bundle, &setup.x_star, setup.scale))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<MetricsRow>> = traj
        .states
        .iter()
        .map(|s| metrics_row(s, set, bundle, &setup.x_star, setup.scale))
        .collect();
    assemble_series(traj, rows?, setup)
}

/// Sequential twin of [`metrics`]; also the reference the parallel path is
/// benchmarked and tested against.
pub fn metrics_sequential(
    traj: &Trajectory,
    set: &ObjectiveSet,
    bundle: &LaplacianBundle,
) -> Result<MetricsSeries> {
    let setup = metrics_setup(traj, set)?;
    let rows: Result<Vec<MetricsRow>> = traj
        .states
        .iter()
        .map(|s| metrics_row(s, set, bundle, &setup.x_star, setup.scale))
        .collect();
    assemble_series(traj, rows?, setup)
}

struct MetricsSetup {
    z_star: DVector<f64>,
    x_star: DVector<f64>,
    absolute_mode: bool,
    scale: f64,
}

fn metrics_setup(traj: &Trajectory, set: &ObjectiveSet) -> Result<MetricsSetup> {
    let z_star = set.central_minimizer(1e-12)?;
    let x_star = stacked::consensus_stack(&z_star, set.n_agents());
    let initial = (&traj.states[0].x - &x_star).norm();
    let absolute_mode = initial == 0.0;
    Ok(MetricsSetup {
        z_star,
        x_star,
        absolute_mode,
        scale: if absolute_mode { 1.0 } else { initial },
    })
}

fn assemble_series(
    traj: &Trajectory,
    rows: Vec<MetricsRow>,
    setup: MetricsSetup,
) -> Result<MetricsSeries> {
    Ok(MetricsSeries {
        times: traj.times.clone(),
        relative_error: rows.iter().map(|r| r.relative_error).collect(),
        consensus_error: rows.iter().map(|r| r.consensus_error).collect(),
        optimality_residual: rows.iter().map(|r| r.optimality_residual).collect(),
        lambda_sum_drift: rows.iter().map(|r| r.lambda_sum_drift).collect(),
        absolute_mode: setup.absolute_mode,
        z_star: setup.z_star,
        initial_error_norm: if setup.absolute_mode { 0.0 } else { setup.scale },
    })
}

/// Result of a log-linear tail fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    /// Slope of `log(error)` against time; negative means decay.
    pub rate: f64,
    /// Coefficient of determination of the fit.
    pub r_squared: f64,
    /// Number of samples used after windowing and floor truncation.
    pub points_used: usize,
}

/// Least-squares slope of `log(error)` over the tail window.
///
/// `tail_fraction` selects the samples with `t` in the trailing fraction of
/// the time span (default callers use 0.5). Samples below `100·ε` times the
/// series maximum sit at the roundoff floor and are excluded, which keeps
/// the fit invariant under positive rescaling of the series.
pub fn fit_rate(times: &[f64], errors: &[f64], tail_fraction: f64) -> Result<RateFit> {
    if times.len() != errors.len() {
        return Err(Error::Shape(format!(
            "times and errors differ in length: {} vs {}",
            times.len(),
            errors.len()
        )));
    }
    if !(0.0..=1.0).contains(&tail_fraction) || tail_fraction == 0.0 {
        return Err(Error::InvalidConfig(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let max_err = errors.iter().copied().fold(0.0f64, f64::max);
    if max_err <= 0.0 || !max_err.is_finite() {
        return Err(Error::InsufficientData(
            "error series has no positive finite samples".into(),
        ));
    }
    let floor = 100.0 * f64::EPSILON * max_err;
    let t_first = times.first().copied().unwrap_or(0.0);
    let t_last = times.last().copied().unwrap_or(0.0);
    let cutoff = t_last - tail_fraction * (t_last - t_first);

    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(errors)
        .filter(|&(&t, &e)| t >= cutoff && e > floor && e.is_finite())
        .map(|(&t, &e)| (t, e.ln()))
        .collect();
    if points.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "only {} usable samples in the fit window (need 5)",
            points.len()
        )));
    }

    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for &(t, y) in &points {
        stt += (t - mean_t).powi(2);
        sty += (t - mean_t) * (y - mean_y);
    }
    if stt == 0.0 {
        return Err(Error::InsufficientData(
            "all usable samples share one timestamp".into(),
        ));
    }
    let rate = sty / stt;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for &(t, y) in &points {
        ss_res += (y - (mean_y + rate * (t - mean_t))).powi(2);
        ss_tot += (y - mean_y).powi(2);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        rate,
        r_squared,
        points_used: points.len(),
    })
}

/// Weights of the quadratic form evaluated by [`lyapunov_value`].
///
/// `w` couples the dual error into the auxiliary state, `q` is pinned to
/// `1/(w·(c4·w − c2))`, and `beta = c3·λmax(L) + 1` bounds the state map of
/// the auxiliary coordinate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LyapunovConfig {
    pub w: f64,
    pub q: f64,
    pub beta: f64,
}

impl LyapunovConfig {
    pub fn from_w(w: f64, gains: &Gains, bundle: &LaplacianBundle) -> Result<Self> {
        let margin = gains.c4 * w - gains.c2;
        if margin <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "Lyapunov weight needs c4·w − c2 > 0, got {margin}"
            )));
        }
        Ok(Self {
            w,
            q: 1.0 / (w * margin),
            beta: gains.c3 * bundle.lambda_max_l + 1.0,
        })
    }
}

/// Lyapunov function of the first-order dynamics at `state`:
///
/// `V = ½·(x−x*)ᵀ(c3·𝓛 + I)(x−x*) + (q/2)·θᵀ(Γ⊗I)θ` with the auxiliary
/// state `θ = (I + c3·𝓛)(x−x*) + w·(λ + c1·∇f(x*))`. Nonnegative, zero
/// exactly at the equilibrium.
pub fn lyapunov_value(
    state: &SystemState,
    x_star: &DVector<f64>,
    set: &ObjectiveSet,
    bundle: &LaplacianBundle,
    gains: &Gains,
    lcfg: &LyapunovConfig,
) -> Result<f64> {
    let dim = set.dim();
    let d = &state.x - x_star;
    let coupled = kron_apply(&bundle.l, dim, &d)? * gains.c3 + &d;
    let term1 = 0.5 * d.dot(&coupled);

    let grad_star = set.stacked_grad(x_star)?;
    let theta = &coupled + (&state.lambda + grad_star * gains.c1) * lcfg.w;
    let gamma_theta = kron_apply(&bundle.gamma, dim, &theta)?;
    let term2 = 0.5 * lcfg.q * theta.dot(&gamma_theta);
    Ok(term1 + term2)
}

/// Outcome of the doubling search for a monotone Lyapunov weight.
#[derive(Debug, Clone)]
pub struct MonotoneLyapunov {
    pub config: LyapunovConfig,
    /// `V` at every recorded state for the found weight.
    pub values: Vec<f64>,
}

/// Doubles `w` from `2·c2/c4 + 1` until the Lyapunov sequence over the
/// recorded states is non-increasing within `1e-10·V(0)`, giving up beyond
/// `2³⁰`.
pub fn monotone_w_search(
    traj: &Trajectory,
    x_star: &DVector<f64>,
    set: &ObjectiveSet,
    bundle: &LaplacianBundle,
    gains: &Gains,
) -> Result<MonotoneLyapunov> {
    let mut w = 2.0 * gains.c2 / gains.c4 + 1.0;
    let cap = (1u64 << 30) as f64;
    while w <= cap {
        let lcfg = LyapunovConfig::from_w(w, gains, bundle)?;
        let values: Result<Vec<f64>> = traj
            .states
            .iter()
            .map(|s| lyapunov_value(s, x_star, set, bundle, gains, &lcfg))
            .collect();
        let values = values?;
        let tol = 1e-10 * values[0];
        if values.windows(2).all(|pair| pair[1] <= pair[0] + tol) {
            return Ok(MonotoneLyapunov { config: lcfg, values });
        }
        w *= 2.0;
    }
    Err(Error::Numerical(format!(
        "no Lyapunov weight up to 2^30 made the sequence monotone (started at {})",
        2.0 * gains.c2 / gains.c4 + 1.0
    )))
}

/// Evaluation of the sufficient gain condition for exponential convergence
/// of the second-order variants.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub variant: DynamicsVariant,
    /// Contraction constant that must fall below `eta/gamma`.
    pub sigma: f64,
    /// Lipschitz constant of the state map bounding the contraction step.
    pub sigma1: f64,
    /// Decay exponent of `e^{−At}`, the smallest eigenvalue of `A`.
    pub eta: f64,
    /// Transient amplification of `e^{−At}`; 1 for the symmetric `A` here.
    pub gamma: f64,
    pub satisfied: bool,
    /// `eta − gamma·sigma`; negative when the condition fails.
    pub predicted_rate: f64,
    /// Whether `sigma < sigma1 − 1`, relating the two constants the
    /// contraction argument produces.
    pub sigma_below_sigma1_minus_1: bool,
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "variant = {}", self.variant.as_str())?;
        writeln!(f, "sigma = {:.12e}", self.sigma)?;
        writeln!(f, "sigma1 = {:.12e}", self.sigma1)?;
        writeln!(f, "eta = {:.12e}", self.eta)?;
        writeln!(f, "gamma = {:.12e}", self.gamma)?;
        writeln!(f, "satisfied = {}", self.satisfied)?;
        writeln!(f, "predicted_rate = {:.12e}", self.predicted_rate)?;
        write!(
            f,
            "sigma_below_sigma1_minus_1 = {}",
            self.sigma_below_sigma1_minus_1
        )
    }
}

/// Evaluates the gain condition for a second-order variant.
///
/// Reports only — gains violating the (sufficient, not necessary)
/// condition still simulate fine, so nothing here blocks a run.
pub fn check_condition(
    variant: DynamicsVariant,
    gains: &Gains,
    l_global: f64,
    bundle: &LaplacianBundle,
) -> Result<ConditionReport> {
    let (sigma_sq, sigma1) = match variant {
        DynamicsVariant::SecondOrderPid => {
            let coupling = ((1.0 + gains.c2.powi(2) + 2.0 * gains.c4.powi(2))
                * bundle.lambda_max_ltl)
                .sqrt();
            (
                gains.c1 * l_global + gains.c3.powi(2) + gains.c5.powi(2) + coupling,
                gains.c1 * l_global + (1.0 + gains.c3.powi(2) + gains.c5.powi(2)) + coupling,
            )
        }
        DynamicsVariant::Corollary | DynamicsVariant::Zhu2022 => {
            // The integral gain rides the Laplacian coupling here, so c3²
            // moves inside the square root.
            let coupling = ((1.0 + gains.c2.powi(2) + gains.c3.powi(2) + 2.0 * gains.c4.powi(2))
                * bundle.lambda_max_ltl)
                .sqrt();
            (
                gains.c1 * l_global + gains.c5.powi(2) + coupling,
                gains.c1 * l_global + (1.0 + gains.c5.powi(2)) + coupling,
            )
        }
        DynamicsVariant::FirstOrderPid => {
            return Err(Error::InvalidConfig(
                "the gain condition applies to second-order variants".into(),
            ))
        }
    };
    let sigma = sigma_sq.sqrt();

    // A = blockdiag(c4·L + I, I, I) is symmetric positive definite, so
    // ‖e^{−At}‖ = e^{−λmin(A)·t}: the transient constant is exactly 1 and
    // the decay exponent is the smallest eigenvalue, assembled from the
    // spectrum rather than assumed.
    let eta = crate::graph::sorted_eigenvalues(&bundle.l)
        .iter()
        .map(|lam| gains.c4 * lam + 1.0)
        .fold(1.0f64, f64::min);
    let gamma = 1.0;

    Ok(ConditionReport {
        variant,
        sigma,
        sigma1,
        eta,
        gamma,
        satisfied: sigma < eta / gamma,
        predicted_rate: eta - gamma * sigma,
        sigma_below_sigma1_minus_1: sigma < sigma1 - 1.0,
    })
}

/// Orthogonal split of the stacked error: `‖x − 1⊗z*‖²` decomposes into
/// the disagreement energy `‖(Π⊗I)x‖²` plus `N·‖x̄ − z*‖²`.
pub fn error_decomposition(
    x: &DVector<f64>,
    z_star: &DVector<f64>,
    bundle: &LaplacianBundle,
) -> Result<(f64, f64, f64)> {
    let n = bundle.n_agents();
    let dim = z_star.len();
    let total = (x - stacked::consensus_stack(z_star, n)).norm_squared();
    let disagreement = kron_apply(&bundle.pi, dim, x)?.norm_squared();
    let mean = stacked::block_mean(x, dim);
    let mean_part = n as f64 * (mean - z_star).norm_squared();
    Ok((total, disagreement, mean_part))
}
