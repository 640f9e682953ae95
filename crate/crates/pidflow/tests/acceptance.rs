//! Acceptance suite: the release criteria, each as one test that runs end
//! to end at its stated tolerance and prints one PASS line with the
//! measured values (visible with `--nocapture`).

use std::sync::LazyLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pidflow::analysis;
use pidflow::config::{build_experiment, presets};
use pidflow::dynamics::{DynamicsField, DynamicsVariant, Gains, SystemState};
use pidflow::graph::{kron_apply, Graph};
use pidflow::integrator::{self, IntegratorConfig, TrajectoryMeta};
use pidflow::objectives::{LocalObjective, ObjectiveSet, Quadratic, TrigShape, TrigTerm};
use pidflow::runner::{self, RunOutcome};
use pidflow::stacked;

static EX1: LazyLock<RunOutcome> = LazyLock::new(|| {
    let exp = build_experiment(&presets::example1()).expect("example1 builds");
    runner::execute(&exp).expect("example1 runs")
});

static EX1_TRIG: LazyLock<RunOutcome> = LazyLock::new(|| {
    let exp = build_experiment(&presets::example1_nonconvex()).expect("example1_nonconvex builds");
    runner::execute(&exp).expect("example1_nonconvex runs")
});

/// (second_order_pid, zhu2022) outcomes of the example-2 comparison.
static EX2: LazyLock<(RunOutcome, RunOutcome)> = LazyLock::new(|| {
    let cfg = presets::example2();
    let blocks: Vec<_> = cfg
        .expand()
        .expect("example2 expands")
        .into_iter()
        .map(|(name, run_cfg)| (name, build_experiment(&run_cfg).expect("block builds")))
        .collect();
    let mut results = runner::execute_blocks(blocks);
    let zhu = results
        .iter()
        .position(|r| r.name == "zhu2022")
        .expect("zhu block present");
    let zhu = results.remove(zhu).outcome.expect("zhu2022 runs");
    let pid = results.remove(0).outcome.expect("second_order_pid runs");
    (pid, zhu)
});

/// Largest per-block ∞-norm distance from consensus on `z_star`.
fn max_block_distance(x: &DVector<f64>, z_star: &DVector<f64>) -> f64 {
    let dim = z_star.len();
    (0..x.len() / dim)
        .map(|i| (stacked::block(x, i, dim) - z_star).amax())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_01_example1_reproduction() {
    let outcome = &*EX1;
    let final_rel = outcome.summary.final_relative_error;
    assert!(
        final_rel <= 1e-6,
        "final relative error {final_rel:.3e} exceeds 1e-6"
    );
    let fit = outcome.summary.fit.expect("rate fit available");
    assert!(fit.rate < 0.0, "fitted rate {:.3e} is not negative", fit.rate);
    assert!(
        fit.r_squared >= 0.95,
        "r² {:.4} below 0.95",
        fit.r_squared
    );
    let block_dist = max_block_distance(&outcome.trajectory.final_state().x, &outcome.metrics.z_star);
    assert!(
        block_dist <= 1e-5,
        "final block distance {block_dist:.3e} exceeds 1e-5"
    );
    println!(
        "ACCEPTANCE 1 PASS — example1: final rel err {final_rel:.3e} ≤ 1e-6, rate {:.4e} < 0, \
         r² {:.6} ≥ 0.95, block ∞-dist {block_dist:.3e} ≤ 1e-5, wall {:.2}s",
        fit.rate, fit.r_squared, outcome.summary.wall_clock_seconds
    );
}

#[test]
fn criterion_02_nonconvex_locals_converge_to_same_minimizer() {
    let base_set = ObjectiveSet::random_quadratic(4, 10, 1).unwrap();
    let trig_set = ObjectiveSet::example1_trig(&base_set).unwrap();
    let z_base = base_set.central_minimizer(1e-12).unwrap();
    let z_trig = trig_set.central_minimizer(1e-12).unwrap();
    let oracle_gap = (&z_base - &z_trig).norm();
    assert!(
        oracle_gap <= 1e-10,
        "central minimizers differ by {oracle_gap:.3e}"
    );

    let outcome = &*EX1_TRIG;
    let block_dist = max_block_distance(&outcome.trajectory.final_state().x, &z_base);
    assert!(
        block_dist <= 1e-5,
        "nonconvex run ends {block_dist:.3e} from the base minimizer"
    );
    println!(
        "ACCEPTANCE 2 PASS — nonconvex locals: oracle gap {oracle_gap:.3e} ≤ 1e-10, \
         final block ∞-dist {block_dist:.3e} ≤ 1e-5"
    );
}

#[test]
fn criterion_03_example2_reproduction_and_baseline_comparison() {
    let (pid, zhu) = &*EX2;
    let fit = pid.summary.fit.expect("rate fit available");
    assert!(fit.rate < 0.0, "PID rate {:.3e} not negative", fit.rate);
    assert!(fit.r_squared >= 0.9, "PID r² {:.4} below 0.9", fit.r_squared);
    let final_rel = pid.summary.final_relative_error;
    assert!(
        final_rel <= 1e-4,
        "PID final relative error {final_rel:.3e} exceeds 1e-4"
    );

    let pid_cross = runner::first_crossing(&pid.metrics.times, &pid.metrics.relative_error, 1e-4)
        .expect("PID reaches 1e-4");
    let zhu_cross = runner::first_crossing(&zhu.metrics.times, &zhu.metrics.relative_error, 1e-4);
    let strictly_earlier = match zhu_cross {
        Some(t_zhu) => pid_cross < t_zhu,
        None => true,
    };
    assert!(
        strictly_earlier,
        "PID crossing {pid_cross} not strictly earlier than baseline {zhu_cross:?}"
    );
    println!(
        "ACCEPTANCE 3 PASS — example2: PID final {final_rel:.3e} ≤ 1e-4, rate {:.4e}, r² {:.4}, \
         1e-4 crossing at t={pid_cross}; baseline crossing {}",
        fit.rate,
        fit.r_squared,
        zhu_cross.map_or("never".to_string(), |t| format!("t={t}")),
    );
}

#[test]
fn criterion_04_dual_sum_conservation_on_all_runs() {
    let mut worst: (f64, f64, &str) = (0.0, 1.0, "none");
    let runs: [(&str, &RunOutcome); 4] = [
        ("example1", &EX1),
        ("example1_nonconvex", &EX1_TRIG),
        ("example2_pid", &EX2.0),
        ("example2_zhu", &EX2.1),
    ];
    for (name, outcome) in runs {
        let lambda_inf = outcome
            .trajectory
            .states
            .iter()
            .map(|s| s.lambda.amax())
            .fold(0.0, f64::max);
        let bound = 1e-9 * lambda_inf.max(1.0);
        let drift = outcome
            .metrics
            .lambda_sum_drift
            .iter()
            .copied()
            .fold(0.0, f64::max);
        assert!(
            drift <= bound,
            "{name}: dual-sum drift {drift:.3e} exceeds {bound:.3e}"
        );
        if drift / bound > worst.0 / worst.1 {
            worst = (drift, bound, name);
        }
    }
    println!(
        "ACCEPTANCE 4 PASS — dual-sum conservation: worst drift {:.3e} ≤ {:.3e} ({})",
        worst.0, worst.1, worst.2
    );
}

#[test]
fn criterion_05_companion_identities_across_graphs() {
    let mut graphs: Vec<(String, Graph)> = vec![
        ("ring3".into(), Graph::ring(3).unwrap()),
        ("ring4".into(), Graph::ring(4).unwrap()),
        ("ring20".into(), Graph::ring(20).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for k in 0..10 {
        let n = rng.random_range(2..=12usize);
        let extra = rng.random_range(0..=6usize);
        let seed = rng.random_range(0..u64::MAX / 2);
        let mut edges = Vec::new();
        let mut tree_rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 2..=n {
            edges.push((tree_rng.random_range(1..v), v, tree_rng.random_range(0.2..2.0)));
        }
        for _ in 0..extra {
            let a = tree_rng.random_range(1..=n);
            let b = tree_rng.random_range(1..=n);
            if a != b {
                edges.push((a, b, tree_rng.random_range(0.2..2.0)));
            }
        }
        graphs.push((format!("random{k}(n={n})"), Graph::from_edges(n, &edges).unwrap()));
    }

    let mut worst = (0.0f64, String::new());
    for (name, graph) in &graphs {
        let b = graph.laplacian_bundle().unwrap();
        let lg = (&b.l * &b.gamma - &b.pi).norm();
        assert!(lg <= 1e-10, "{name}: |LΓ−Π|F = {lg:.3e}");
        let pi2 = (&b.pi * &b.pi - &b.pi).norm();
        assert!(pi2 <= 1e-10, "{name}: |Π²−Π|F = {pi2:.3e}");
        let gamma_min = nalgebra::SymmetricEigen::new(b.gamma.clone()).eigenvalues.min();
        assert!(gamma_min > 0.0, "{name}: Γ not positive definite");
        if lg.max(pi2) > worst.0 {
            worst = (lg.max(pi2), name.clone());
        }
    }
    println!(
        "ACCEPTANCE 5 PASS — companion identities on {} graphs: worst residual {:.3e} ≤ 1e-10 ({})",
        graphs.len(),
        worst.0,
        worst.1
    );
}

#[test]
fn criterion_06_analytical_equilibria_have_zero_residual() {
    let ex1 = build_experiment(&presets::example1()).unwrap();
    let first = DynamicsField::new(ex1.variant, ex1.gains, ex1.bundle.clone(), ex1.set.clone())
        .unwrap();
    let z1 = ex1.set.central_minimizer(1e-13).unwrap();
    let r1 = first
        .equilibrium_residual(&first.analytical_equilibrium(&z1).unwrap())
        .unwrap();
    assert!(r1 <= 1e-10, "first-order equilibrium residual {r1:.3e}");

    let cfg2 = presets::example2();
    let (_, pid_cfg) = cfg2.expand().unwrap().into_iter().next().unwrap();
    let ex2 = build_experiment(&pid_cfg).unwrap();
    let second = DynamicsField::new(ex2.variant, ex2.gains, ex2.bundle.clone(), ex2.set.clone())
        .unwrap();
    let z2 = ex2.set.central_minimizer(1e-13).unwrap();
    let r2 = second
        .equilibrium_residual(&second.analytical_equilibrium(&z2).unwrap())
        .unwrap();
    assert!(r2 <= 1e-10, "second-order equilibrium residual {r2:.3e}");

    println!(
        "ACCEPTANCE 6 PASS — analytical equilibria: residuals {r1:.3e} (first-order) and \
         {r2:.3e} (second-order) ≤ 1e-10"
    );
}

#[test]
fn criterion_07_lyapunov_monotone_and_decaying() {
    let exp = build_experiment(&presets::example1()).unwrap();
    let outcome = &*EX1;
    let x_star = stacked::consensus_stack(&outcome.metrics.z_star, exp.set.n_agents());
    let search = analysis::monotone_w_search(
        &outcome.trajectory,
        &x_star,
        &exp.set,
        &exp.bundle,
        &exp.gains,
    )
    .expect("doubling search finds a monotone weight");
    let v0 = search.values[0];
    let v_end = *search.values.last().unwrap();
    let tol = 1e-10 * v0;
    for (k, pair) in search.values.windows(2).enumerate() {
        assert!(
            pair[1] <= pair[0] + tol,
            "V increased at recorded step {k}: {} -> {}",
            pair[0],
            pair[1]
        );
    }
    assert!(
        v_end <= 1e-8 * v0,
        "V(t_end)/V(0) = {:.3e} exceeds 1e-8",
        v_end / v0
    );
    println!(
        "ACCEPTANCE 7 PASS — Lyapunov: w = {} monotone over {} steps, V(t_end)/V(0) = {:.3e} ≤ 1e-8",
        search.config.w,
        search.values.len(),
        v_end / v0
    );
}

/// Independent oracles for the vector fields, materializing the Kronecker
/// products the implementation avoids.
mod oracles {
    use super::*;

    pub fn first_order(
        l: &DMatrix<f64>,
        set: &ObjectiveSet,
        g: &Gains,
        s: &SystemState,
    ) -> (DVector<f64>, DVector<f64>) {
        let dim = set.dim();
        let eye = DMatrix::identity(dim, dim);
        let kron_l = l.kronecker(&eye);
        let nn = kron_l.nrows();
        let coupling = DMatrix::identity(nn, nn) + &kron_l * g.c3;
        let inverse = coupling.try_inverse().unwrap();
        let grad = naive_stacked_grad(set, &s.x);
        let dx = &inverse * (-(&grad * g.c1) - &kron_l * &s.x * g.c2 - &s.lambda);
        let dl = &kron_l * &s.x * g.c4;
        (dx, dl)
    }

    pub fn second_order_per_agent(
        graph: &Graph,
        set: &ObjectiveSet,
        g: &Gains,
        s: &SystemState,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let dim = set.dim();
        let n = graph.n_agents();
        let v = s.v.as_ref().unwrap();
        let mut dv = DVector::zeros(n * dim);
        let mut dl = DVector::zeros(n * dim);
        for i in 0..n {
            let mut mu = DVector::zeros(dim);
            let mut w = DVector::zeros(dim);
            for e in graph.edges() {
                for (me, other) in [(e.i, e.j), (e.j, e.i)] {
                    if me == i {
                        mu += (s.x.rows(me * dim, dim) - s.x.rows(other * dim, dim)) * e.weight;
                        w += (v.rows(me * dim, dim) - v.rows(other * dim, dim)) * e.weight;
                    }
                }
            }
            let gi = set
                .local(i)
                .gradient(&s.x.rows(i * dim, dim).clone_owned())
                .unwrap();
            let dvi = -gi * g.c1
                - &mu * g.c2
                - s.lambda.rows(i * dim, dim) * g.c3
                - &w * g.c4
                - v.rows(i * dim, dim) * g.c5;
            dv.rows_mut(i * dim, dim).copy_from(&dvi);
            dl.rows_mut(i * dim, dim).copy_from(&mu);
        }
        (v.clone(), dv, dl)
    }

    pub fn corollary_dense(
        l: &DMatrix<f64>,
        set: &ObjectiveSet,
        g: &Gains,
        s: &SystemState,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let dim = set.dim();
        let kron_l = l.kronecker(&DMatrix::identity(dim, dim));
        let v = s.v.as_ref().unwrap();
        let grad = naive_stacked_grad(set, &s.x);
        let dv = -(&grad * g.c1)
            - &kron_l * &s.x * g.c2
            - &kron_l * &s.lambda * g.c3
            - &kron_l * v * g.c4
            - v * g.c5;
        (v.clone(), dv, &kron_l * &s.x)
    }

    fn naive_stacked_grad(set: &ObjectiveSet, x: &DVector<f64>) -> DVector<f64> {
        let dim = set.dim();
        let mut out = DVector::zeros(x.len());
        for i in 0..set.n_agents() {
            let g = set
                .local(i)
                .gradient(&x.rows(i * dim, dim).clone_owned())
                .unwrap();
            out.rows_mut(i * dim, dim).copy_from(&g);
        }
        out
    }
}

#[test]
fn criterion_08_fields_match_independent_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = rng.random_range(2..=6usize);
        let dim = rng.random_range(1..=4usize);
        let graph = if n == 2 {
            Graph::from_edges(2, &[(1, 2, rng.random_range(0.5..1.5))]).unwrap()
        } else {
            Graph::ring(n).unwrap()
        };
        let bundle = std::sync::Arc::new(graph.laplacian_bundle().unwrap());
        let set = std::sync::Arc::new(
            ObjectiveSet::random_quadratic(n, dim, 9000 + trial).unwrap(),
        );
        let gains = Gains::new(
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
        );
        let len = n * dim;
        let mut draw = || DVector::from_iterator(len, (0..len).map(|_| rng.random_range(-2.0..2.0)));
        let state1 = SystemState { x: draw(), lambda: draw(), v: None };
        let state2 = SystemState { x: draw(), lambda: draw(), v: Some(draw()) };

        let first = DynamicsField::new(
            DynamicsVariant::FirstOrderPid,
            gains,
            bundle.clone(),
            set.clone(),
        )
        .unwrap();
        let d = first.eval(&state1).unwrap();
        let (dx, dl) = oracles::first_order(&bundle.l, &set, &gains, &state1);
        worst = worst.max((d.x - dx).amax()).max((d.lambda - dl).amax());

        let second = DynamicsField::new(
            DynamicsVariant::SecondOrderPid,
            gains,
            bundle.clone(),
            set.clone(),
        )
        .unwrap();
        let d = second.eval(&state2).unwrap();
        let (dx, dv, dl) = oracles::second_order_per_agent(&graph, &set, &gains, &state2);
        worst = worst
            .max((d.x - dx).amax())
            .max((d.v.unwrap() - dv).amax())
            .max((d.lambda - dl).amax());

        let corollary = DynamicsField::new(
            DynamicsVariant::Corollary,
            gains,
            bundle.clone(),
            set.clone(),
        )
        .unwrap();
        let d = corollary.eval(&state2).unwrap();
        let (dx, dv, dl) = oracles::corollary_dense(&bundle.l, &set, &gains, &state2);
        worst = worst
            .max((d.x - dx).amax())
            .max((d.v.unwrap() - dv).amax())
            .max((d.lambda - dl).amax());

        let zhu_gains = Gains::new(gains.c1, gains.c2, gains.c3, gains.c4, 0.0);
        let zhu = DynamicsField::new(
            DynamicsVariant::Zhu2022,
            zhu_gains,
            bundle.clone(),
            set.clone(),
        )
        .unwrap();
        let d = zhu.eval(&state2).unwrap();
        let (dx, dv, dl) = oracles::corollary_dense(&bundle.l, &set, &zhu_gains, &state2);
        worst = worst
            .max((d.x - dx).amax())
            .max((d.v.unwrap() - dv).amax())
            .max((d.lambda - dl).amax());

        assert!(
            worst <= 1e-12,
            "trial {trial}: field/oracle mismatch {worst:.3e} exceeds 1e-12"
        );
    }
    println!(
        "ACCEPTANCE 8 PASS — 50 random states, all variants vs independent oracles: \
         worst ∞-mismatch {worst:.3e} ≤ 1e-12"
    );
}

#[test]
fn criterion_09_integrator_is_fourth_order() {
    let decay = |s: &SystemState| {
        Ok(SystemState {
            x: -&s.x,
            lambda: DVector::zeros(1),
            v: None,
        })
    };
    let state = |x: f64| SystemState {
        x: DVector::from_vec(vec![x]),
        lambda: DVector::zeros(1),
        v: None,
    };
    let one_step = integrator::rk4_step(&decay, 0.0, &state(1.0), 0.1).unwrap().x[0];
    let step_err = (one_step - 0.9048375).abs();
    assert!(step_err <= 1e-7, "single-step value {one_step} off by {step_err:.3e}");

    let global_error = |h: f64| {
        let cfg = IntegratorConfig { h, t_end: 1.0, record_stride: 1 };
        let meta = TrajectoryMeta {
            variant: DynamicsVariant::FirstOrderPid,
            gains: Gains::new(1.0, 1.0, 1.0, 1.0, 1.0),
            seed: None,
            integrator: cfg,
        };
        let traj = integrator::integrate(&decay, state(1.0), &cfg, meta).unwrap();
        (traj.final_state().x[0] - (-1.0f64).exp()).abs()
    };
    let ratio = global_error(0.05) / global_error(0.025);
    assert!(
        (12.8..=19.2).contains(&ratio),
        "error ratio {ratio} outside 16 ± 20%"
    );
    println!(
        "ACCEPTANCE 9 PASS — RK4: single step {one_step:.9} (±{step_err:.2e}), \
         h→h/2 error ratio {ratio:.3} within 16 ± 20%"
    );
}

#[test]
fn criterion_10_condition_checker_closed_forms() {
    // Single agent, no integral/friction gain: the condition collapses.
    let single = Graph::from_edges(1, &[]).unwrap().laplacian_bundle().unwrap();
    let gains = Gains::new(2.0, 1.7, f64::MIN_POSITIVE, 1.2, 0.0);
    let l_global = 3.7;
    let report = analysis::check_condition(
        DynamicsVariant::SecondOrderPid,
        &gains,
        l_global,
        &single,
    )
    .unwrap();
    let expected = (gains.c1 * l_global).sqrt();
    assert!(
        (report.sigma - expected).abs() <= 1e-15,
        "σ = {} differs from sqrt(c1·l) = {expected}",
        report.sigma
    );

    // η, γ from the spectrum of blockdiag(c4·L + I, I, I).
    let ring20 = Graph::ring(20).unwrap().laplacian_bundle().unwrap();
    let gains2 = Gains::new(0.14, 0.65, 0.156, 0.52, 0.52);
    let report2 =
        analysis::check_condition(DynamicsVariant::SecondOrderPid, &gains2, 7.0, &ring20).unwrap();
    assert!((report2.eta - 1.0).abs() <= 1e-10, "η = {}", report2.eta);
    assert!((report2.gamma - 1.0).abs() <= 1e-10, "γ = {}", report2.gamma);

    let text = report2.to_string();
    assert!(text.contains("sigma = "));
    assert!(text.contains("sigma1 = "));
    assert!(text.contains("sigma_below_sigma1_minus_1 = "));
    println!(
        "ACCEPTANCE 10 PASS — condition checker: σ(L=0,c3=c5=0) = sqrt(c1·l) exact, \
         (η, γ) = ({}, {}) within 1e-10, report prints σ, σ₁, and the consistency flag",
        report2.eta, report2.gamma
    );
}

#[test]
fn criterion_11_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let quad_set = ObjectiveSet::random_quadratic(4, 6, 202).unwrap();
    let trig_set =
        ObjectiveSet::example1_trig(&ObjectiveSet::random_quadratic(4, 6, 203).unwrap()).unwrap();
    let explicit = LocalObjective::TrigPerturbed {
        quadratic: Quadratic::new(DMatrix::identity(3, 3) * 0.5, DVector::zeros(3)).unwrap(),
        terms: vec![
            TrigTerm { shape: TrigShape::Sin, amplitude: 2.0 },
            TrigTerm { shape: TrigShape::Cos, amplitude: -3.0 },
        ],
    };
    let mut objectives: Vec<&LocalObjective> = Vec::new();
    objectives.extend(quad_set.locals());
    objectives.extend(trig_set.locals());
    objectives.push(&explicit);

    let mut worst = 0.0f64;
    for obj in objectives {
        let dim = obj.dim();
        for _ in 0..20 {
            let z =
                DVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(-3.0..3.0)));
            let analytic = obj.gradient(&z).unwrap();
            let h = 1e-6 * (z.norm() + 1.0);
            let mut numeric = DVector::zeros(dim);
            for k in 0..dim {
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[k] += h;
                zm[k] -= h;
                numeric[k] = (obj.value(&zp).unwrap() - obj.value(&zm).unwrap()) / (2.0 * h);
            }
            let rel = (&analytic - &numeric).norm() / analytic.norm().max(1.0);
            worst = worst.max(rel);
            assert!(rel <= 1e-6, "gradient mismatch {rel:.3e} exceeds 1e-6");
        }
    }
    println!(
        "ACCEPTANCE 11 PASS — gradient checks: worst central-difference relative error \
         {worst:.3e} ≤ 1e-6 over all objective kinds"
    );
}

#[test]
fn criterion_12_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let flags = runner::EmitFlags { csv: true, svg: false };
    let mut paths = Vec::new();
    for run in ["a", "b"] {
        let exp = build_experiment(&presets::example1()).unwrap();
        let outcome = runner::execute(&exp).unwrap();
        let subdir = dir.path().join(run);
        runner::write_run_artifacts(&subdir, None, &outcome, flags).unwrap();
        paths.push(subdir.join("metrics.csv"));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    let b = std::fs::read(&paths[1]).unwrap();
    assert_eq!(a, b, "metrics CSVs differ between reruns");
    println!(
        "ACCEPTANCE 12 PASS — determinism: two example1 executions produced byte-identical \
         metrics CSVs ({} bytes)",
        a.len()
    );
}
