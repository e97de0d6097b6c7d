//! Acceptance suite: every benchmark criterion as one test with its
//! tolerance pinned in code. Run with `--nocapture` to see one summary line
//! per criterion.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lpv_dpc::control::{
    closed_loop, tracking_metrics, Bounds, Controller, DpcConfig, DpcController, LpvIoPlant,
    MpcController, PendulumSim, SchedulingInput, SchedulingPolicy,
};
use lpv_dpc::plantlab::{
    example1_model, example1_scheduling, generate_dictionary, pendulum_io_model, simulate_io,
    DataDictionary, DictionarySource, Excitation, IoWindow, LpvIoModel, PendulumPlant,
};
use lpv_dpc::predictor::{build_blocks, dd_simulate};
use lpv_dpc::qpcore::{self, QpProblem, QpStatus};
use lpv_dpc::signals::SignalSequence;

fn example1_dictionary(n_d: usize, pe_order: usize) -> DataDictionary<f64> {
    let model = example1_model::<f64>();
    let scheduling = example1_scheduling::<f64>(n_d).unwrap();
    generate_dictionary(
        &DictionarySource::LpvModel { model: &model, scheduling: &scheduling },
        &Excitation::Uniform { amplitude: 1.0 },
        n_d,
        42,
        pe_order,
    )
    .unwrap()
}

fn example2_dictionary() -> DataDictionary<f64> {
    let plant = PendulumPlant::<f64>::unbalanced_disc(0.0, 0.0);
    generate_dictionary(
        &DictionarySource::Pendulum { plant, substeps: 8 },
        &Excitation::Multisine { harmonics: 8, amplitude: 0.25 },
        34,
        42,
        7,
    )
    .unwrap()
}

fn example1_config() -> DpcConfig<f64> {
    DpcConfig::siso(
        5,
        2,
        10.0,
        0.001,
        (-5.0, 5.0),
        (-1.0, 1.0),
        Bounds::interval(2, 0.0, 1.0).unwrap(),
        SchedulingPolicy::KnownFuture,
    )
    .unwrap()
}

fn example2_config() -> DpcConfig<f64> {
    DpcConfig::siso(
        5,
        2,
        0.1,
        0.05,
        (-0.25, 0.25),
        (-1.0, 1.0),
        Bounds::interval(1, -0.22, 1.0).unwrap(),
        SchedulingPolicy::Frozen,
    )
    .unwrap()
}

/// Example-1 reference: piecewise constant inside the output box, new level
/// every 20 samples.
fn example1_reference(steps: usize) -> SignalSequence<f64> {
    let levels = [0.5, -0.5, 0.75, -0.25, 0.25];
    SignalSequence::from_fn(1, steps, |k| {
        DVector::from_element(1, levels[((k - 1) / 20) % levels.len()])
    })
    .unwrap()
}

/// Consistent (past, future) windows cut from a fresh seeded trajectory of
/// the model, with scheduling drawn inside the declared set.
fn consistent_windows(
    model: &LpvIoModel<f64>,
    n_ell: usize,
    horizon: usize,
    seed: u64,
) -> (IoWindow<f64>, SignalSequence<f64>, SignalSequence<f64>, SignalSequence<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = n_ell + horizon + 30;
    let u = SignalSequence::from_fn(1, total, |_| DVector::from_element(1, rng.gen_range(-1.0..1.0)))
        .unwrap();
    let p = match model.n_p() {
        0 => SignalSequence::from_matrix(DMatrix::<f64>::zeros(0, total)).unwrap(),
        2 => SignalSequence::from_fn(2, total, |_| {
            let base: f64 = rng.gen_range(0.0..1.0);
            DVector::from_column_slice(&[base, base * base])
        })
        .unwrap(),
        n => SignalSequence::from_fn(n, total, |_| {
            DVector::from_fn(n, |_, _| rng.gen_range(0.0..1.0))
        })
        .unwrap(),
    };
    let init = IoWindow::zeros(1, model.n_p(), 1, model.order());
    let y = simulate_io(model, &u, &p, &init).unwrap();
    let start = rng.gen_range(1..=total - n_ell - horizon + 1);
    let past = IoWindow::new(
        u.window(start, n_ell).unwrap(),
        p.window(start, n_ell).unwrap(),
        y.window(start, n_ell).unwrap(),
    )
    .unwrap();
    (
        past,
        u.window(start + n_ell, horizon).unwrap(),
        p.window(start + n_ell, horizon).unwrap(),
        y.window(start + n_ell, horizon).unwrap(),
    )
}

#[test]
fn criterion_1_dimensional_fidelity() {
    let started = Instant::now();
    let dict1 = example1_dictionary(48, 7);
    let blocks1 = build_blocks(&dict1, 2, 5).unwrap();
    assert_eq!(blocks1.n_cols(), 42, "example 1 decision dimension");
    let p_hat = example1_scheduling::<f64>(5).unwrap();
    assert_eq!(p_hat.to_col().len(), 10, "scheduling window dimension");

    let dict2 = example2_dictionary();
    let blocks2 = build_blocks(&dict2, 2, 5).unwrap();
    assert_eq!(blocks2.n_cols(), 28, "example 2 decision dimension");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?} exceeds 1 s");
    println!(
        "PASS criterion 1: g dimensions 42/28, scheduling window 10 ({elapsed:?})"
    );
}

#[test]
fn criterion_2_pe_certification() {
    let started = Instant::now();
    let cert1 = example1_dictionary(48, 7).certificate();
    assert!(cert1.passed);
    assert_eq!(cert1.order, 7);
    assert_eq!(cert1.rank, 21, "example 1 rank");
    assert_eq!(cert1.required_rank, 21);

    let cert2 = example2_dictionary().certificate();
    assert!(cert2.passed);
    assert_eq!(cert2.rank, 14, "example 2 rank");
    assert_eq!(cert2.required_rank, 14);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?} exceeds 1 s");
    println!("PASS criterion 2: PE ranks 21/21 and 14/14 at order 7 ({elapsed:?})");
}

#[test]
fn criterion_3_data_driven_simulation_oracle() {
    let started = Instant::now();
    let model = example1_model::<f64>();
    let mut worst = 0.0f64;
    // Horizon 5 on the benchmark-length dictionary; horizon 10 needs a
    // longer record for the deeper Hankel split to span its window space
    // (empirical threshold near N_d = 80), hence N_d = 96 there.
    for (horizon, n_d) in [(5usize, 48usize), (10, 96)] {
        let dict = example1_dictionary(n_d, 2 + horizon);
        let blocks = build_blocks(&dict, 2, horizon).unwrap();
        for trial in 0..100u64 {
            let (past, fut_u, fut_p, fut_y) =
                consistent_windows(&model, 2, horizon, 1000 + trial);
            let predicted = dd_simulate(&blocks, &past, &fut_u, &fut_p).unwrap();
            let scale = fut_y.to_col().amax().max(1e-9);
            let err = (predicted.to_col() - fut_y.to_col()).amax() / scale;
            assert!(
                err <= 1e-6,
                "horizon {horizon} trial {trial}: relative error {err:.3e}"
            );
            worst = worst.max(err);
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?} exceeds 10 s");
    println!("PASS criterion 3: 200 oracle trials, worst relative error {worst:.3e} ({elapsed:?})");
}

#[test]
fn criterion_4_lti_reduction() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    let mut trials = 0;
    while trials < 50 {
        // Random stable second-order LTI model via its pole pair.
        let (r1, r2): (f64, f64) = (rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9));
        let a1 = -(r1 + r2);
        let a2 = r1 * r2;
        let (b1, b2): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if b1.abs() < 0.1 {
            continue;
        }
        let model = LpvIoModel::<f64>::siso(&[&[a1], &[a2]], &[&[b1], &[b2]]).unwrap();

        let n_d = 40;
        let mut data_rng = ChaCha8Rng::seed_from_u64(9000 + trials as u64);
        let u = SignalSequence::from_fn(1, n_d, |_| {
            DVector::from_element(1, data_rng.gen_range(-1.0..1.0))
        })
        .unwrap();
        let p = SignalSequence::from_matrix(DMatrix::<f64>::zeros(0, n_d)).unwrap();
        let init = IoWindow::zeros(1, 0, 1, 2);
        let y = simulate_io(&model, &u, &p, &init).unwrap();
        let dict = DataDictionary::from_sequences(u, p, y, 7).unwrap();
        if !dict.certificate().passed {
            continue;
        }
        let blocks = build_blocks(&dict, 2, 5).unwrap();

        let (past, fut_u, fut_p, _) = consistent_windows(&model, 2, 5, 7000 + trials as u64);
        let predicted = dd_simulate(&blocks, &past, &fut_u, &fut_p).unwrap();

        // Independent oracle: direct scalar recursion, no shared code path.
        let mut hist_y = vec![past.y().at(1)[0], past.y().at(2)[0]];
        let mut hist_u = vec![past.u().at(1)[0], past.u().at(2)[0]];
        let mut expected = Vec::new();
        for k in 0..5 {
            let n = hist_y.len();
            let yk = -a1 * hist_y[n - 1] - a2 * hist_y[n - 2] + b1 * hist_u[n - 1]
                + b2 * hist_u[n - 2];
            expected.push(yk);
            hist_y.push(yk);
            hist_u.push(fut_u.at(k + 1)[0]);
        }
        for (k, e) in expected.iter().enumerate() {
            let err = (predicted.at(k + 1)[0] - e).abs();
            assert!(err <= 1e-8, "trial {trials}: step {k} error {err:.3e}");
            worst = worst.max(err);
        }
        trials += 1;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?} exceeds 5 s");
    println!("PASS criterion 4: 50 LTI completion trials, worst error {worst:.3e} ({elapsed:?})");
}

/// Exhaustive active-set enumeration over all 3^m bound patterns; the same
/// oracle construction as the solver's unit suite, kept separate so the
/// acceptance check does not share state with the implementation.
fn enumeration_objective(prob: &QpProblem<f64>) -> Option<f64> {
    let n = prob.n_vars();
    let m = prob.n_in();
    let p_eq = prob.n_eq();
    let mut best: Option<f64> = None;
    for code in 0..3usize.pow(m as u32) {
        let mut digits = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            digits.push(c % 3);
            c /= 3;
        }
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        let mut valid = true;
        for (i, d) in digits.iter().enumerate() {
            match d {
                0 => {}
                1 if prob.lb()[i].is_finite() => {
                    rows.push(i);
                    vals.push(prob.lb()[i]);
                }
                2 if prob.ub()[i].is_finite() => {
                    rows.push(i);
                    vals.push(prob.ub()[i]);
                }
                _ => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            continue;
        }
        let na = rows.len();
        let dim = n + p_eq + na;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        kkt.view_mut((0, 0), (n, n)).copy_from(prob.p());
        for r in 0..p_eq {
            for c in 0..n {
                kkt[(n + r, c)] = prob.a_eq()[(r, c)];
                kkt[(c, n + r)] = prob.a_eq()[(r, c)];
            }
        }
        for (r, &i) in rows.iter().enumerate() {
            for c in 0..n {
                kkt[(n + p_eq + r, c)] = prob.a_in()[(i, c)];
                kkt[(c, n + p_eq + r)] = prob.a_in()[(i, c)];
            }
        }
        let mut rhs = DVector::<f64>::zeros(dim);
        for i in 0..n {
            rhs[i] = -prob.q()[i];
        }
        for r in 0..p_eq {
            rhs[n + r] = prob.b_eq()[r];
        }
        for (r, v) in vals.iter().enumerate() {
            rhs[n + p_eq + r] = *v;
        }
        let svd = kkt.clone().svd(true, true);
        let x_full = svd.solve(&rhs, 1e-10).ok()?;
        if (kkt * &x_full - &rhs).norm() > 1e-8 * (1.0 + rhs.norm()) {
            continue;
        }
        let x = x_full.rows(0, n).into_owned();
        let ax = prob.a_in() * &x;
        let feasible = (0..m)
            .all(|i| ax[i] >= prob.lb()[i] - 1e-7 && ax[i] <= prob.ub()[i] + 1e-7);
        if !feasible {
            continue;
        }
        let mut signs_ok = true;
        for (r, &i) in rows.iter().enumerate() {
            let lam = x_full[n + p_eq + r];
            if digits[i] == 1 && lam > 1e-7 {
                signs_ok = false;
            }
            if digits[i] == 2 && lam < -1e-7 {
                signs_ok = false;
            }
        }
        if !signs_ok {
            continue;
        }
        let obj = prob.objective(&x);
        best = Some(best.map_or(obj, |b: f64| b.min(obj)));
    }
    best
}

#[test]
fn criterion_5_qp_solver_correctness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_gap = 0.0f64;
    let mut worst_kkt = 0.0f64;
    for case in 0..200 {
        let n = rng.gen_range(1..=6);
        let r = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let p = r.transpose() * &r + DMatrix::identity(n, n) * 0.05;
        let q = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let n_eq = if n >= 3 && rng.gen_bool(0.3) { 1 } else { 0 };
        let a_eq = DMatrix::<f64>::from_fn(n_eq, n, |_, _| rng.gen_range(-1.0..1.0));
        let x_feas = DVector::from_fn(n, |_, _| rng.gen_range(-0.4..0.4));
        let b_eq = &a_eq * &x_feas;
        let mut lb = DVector::from_fn(n, |_, _| -rng.gen_range(0.1..2.0));
        let mut ub = DVector::from_fn(n, |_, _| rng.gen_range(0.1..2.0));
        for i in 0..n {
            if rng.gen_bool(0.2) {
                lb[i] = f64::NEG_INFINITY;
            }
            if rng.gen_bool(0.2) {
                ub[i] = f64::INFINITY;
            }
        }
        let prob = QpProblem::new(
            p,
            q,
            rng.gen_range(-1.0..1.0),
            a_eq,
            b_eq,
            DMatrix::identity(n, n),
            lb,
            ub,
        )
        .unwrap();
        let sol = qpcore::solve(&prob, 1e-9, 50_000);
        assert_eq!(sol.status, QpStatus::Optimal, "case {case}: {:?}", sol.kkt);
        let kkt = sol.kkt.max();
        assert!(kkt <= 1e-9, "case {case}: KKT residual {kkt:.3e}");
        worst_kkt = worst_kkt.max(kkt);
        let oracle = enumeration_objective(&prob).expect("bounded random QP");
        let gap = (sol.objective - oracle).abs();
        assert!(gap <= 1e-8, "case {case}: objective gap {gap:.3e}");
        worst_gap = worst_gap.max(gap);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?} exceeds 30 s");
    println!(
        "PASS criterion 5: 200 QPs, worst objective gap {worst_gap:.3e}, worst KKT {worst_kkt:.3e} ({elapsed:?})"
    );
}

#[test]
fn criterion_6_dpc_mpc_equivalence_example1() {
    let started = Instant::now();
    let steps = 100;
    let dict = example1_dictionary(48, 7);
    let cfg = example1_config();
    let reference = example1_reference(steps);
    let model = example1_model::<f64>();
    let init = IoWindow::zeros(1, 2, 1, 2);

    let schedule = example1_scheduling::<f64>(steps + 5).unwrap();
    let mut plant = LpvIoPlant::new(model.clone(), schedule.clone(), &init, 1.0).unwrap();
    let blocks = build_blocks(&dict, 2, 5).unwrap();
    let mut dpc = DpcController::new(blocks, cfg.clone(), &init).unwrap();
    let dpc_log = closed_loop(&mut plant, &mut dpc, &reference, steps, &init).unwrap();

    let mut plant = LpvIoPlant::new(model.clone(), schedule, &init, 1.0).unwrap();
    let mut mpc = MpcController::new(model, cfg.clone(), &init).unwrap();
    let mpc_log = closed_loop(&mut plant, &mut mpc, &reference, steps, &init).unwrap();

    let mut y_gap = 0.0f64;
    let mut u_gap = 0.0f64;
    for (a, b) in dpc_log.records().iter().zip(mpc_log.records()) {
        y_gap = y_gap.max((&a.y - &b.y).amax());
        u_gap = u_gap.max((&a.u - &b.u).amax());
    }
    assert!(y_gap <= 1e-4, "output gap {y_gap:.3e}");
    assert!(u_gap <= 1e-3, "input gap {u_gap:.3e}");

    for (name, log) in [("dpc", &dpc_log), ("mpc", &mpc_log)] {
        let m = tracking_metrics(log, &cfg.q, &cfg.r, &cfg.u_box, &cfg.y_box);
        assert!(m.max_violation_u <= 1e-6, "{name} input violation {:.3e}", m.max_violation_u);
        assert!(m.max_violation_y <= 1e-6, "{name} output violation {:.3e}", m.max_violation_y);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?} exceeds 60 s");
    println!(
        "PASS criterion 6: 100-step equivalence, output gap {y_gap:.3e}, input gap {u_gap:.3e} ({elapsed:?})"
    );
}

#[test]
fn criterion_7_example2_closed_loop() {
    let started = Instant::now();
    let steps = 160;
    let dict = example2_dictionary();
    let cfg = example2_config();
    // Reference steps every 4 s (53 samples плюс the initial level).
    let segments: [(usize, usize, f64); 3] = [(1, 54, 0.0), (55, 107, 0.6), (108, 160, -0.4)];
    let reference = SignalSequence::from_fn(1, steps, |k| {
        let level = segments
            .iter()
            .rev()
            .find(|(s, _, _)| k >= *s)
            .map(|(_, _, v)| *v)
            .unwrap_or(0.0);
        DVector::from_element(1, level)
    })
    .unwrap();

    let start = PendulumPlant::<f64>::unbalanced_disc(-0.9, 0.0);
    let mut sim = PendulumSim::new(start, 8);
    let init = sim.replicated_init(2);
    let blocks = build_blocks(&dict, 2, 5).unwrap();
    let mut dpc = DpcController::new(blocks, cfg.clone(), &init).unwrap();
    let dpc_log = closed_loop(&mut sim, &mut dpc, &reference, steps, &init).unwrap();

    let mut sim = PendulumSim::new(start, 8);
    let mut mpc = MpcController::new(pendulum_io_model(&start), cfg.clone(), &init).unwrap();
    let mpc_log = closed_loop(&mut sim, &mut mpc, &reference, steps, &init).unwrap();

    // Sustained tracking: after a 2 s transient (27 samples) and excluding
    // the final N_p samples of each segment, where the previewing controller
    // already optimally leaves for the next level.
    let mut worst_settled = 0.0f64;
    for (seg_start, seg_end, level) in segments {
        let from = seg_start + 27;
        let to = seg_end.saturating_sub(5);
        for rec in &dpc_log.records()[from.min(steps) - 1..to.min(steps)] {
            worst_settled = worst_settled.max((rec.y[0] - level).abs());
        }
    }
    assert!(worst_settled < 0.05, "settled tracking error {worst_settled:.4} rad");

    let dm = tracking_metrics(&dpc_log, &cfg.q, &cfg.r, &cfg.u_box, &cfg.y_box);
    // Zero violations at the solver-chain measurement slack.
    assert!(dm.max_violation_u <= 1e-6, "input violation {:.3e}", dm.max_violation_u);

    let mm = tracking_metrics(&mpc_log, &cfg.q, &cfg.r, &cfg.u_box, &cfg.y_box);
    let ratio = dm.total_cost / mm.total_cost;
    assert!(
        ratio <= 1.10,
        "DPC cost {:.5} exceeds MPC cost {:.5} by more than 10%",
        dm.total_cost,
        mm.total_cost
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "runtime {elapsed:?} exceeds 120 s");
    println!(
        "PASS criterion 7: settled error {worst_settled:.4} rad, cost ratio {ratio:.4}, \
         input violation {:.1e} ({elapsed:?})",
        dm.max_violation_u
    );
}

#[test]
fn criterion_8_receding_horizon_consistency() {
    let started = Instant::now();
    let steps = 12;
    let dict = example1_dictionary(48, 7);
    let cfg = example1_config();
    let model = example1_model::<f64>();
    let schedule = example1_scheduling::<f64>(steps + 6).unwrap();
    let init = IoWindow::zeros(1, 2, 1, 2);
    let reference = example1_reference(steps);

    let mut plant = LpvIoPlant::new(model.clone(), schedule.clone(), &init, 1.0).unwrap();
    let blocks = build_blocks(&dict, 2, 5).unwrap();
    let mut ctrl = DpcController::new(blocks, cfg, &init).unwrap();
    closed_loop(&mut plant, &mut ctrl, &reference, steps, &init).unwrap();

    // One more step by hand: capture the full optimal plan and replay it
    // open-loop through the exact recursion.
    let past = ctrl.past_window();
    let p_hat = schedule.window(steps + 1, 5).unwrap();
    let r_window = reference.window_held(steps + 1, 5).unwrap();
    let outcome = ctrl
        .step(None, &r_window, &SchedulingInput::Future(p_hat.clone()))
        .unwrap();
    let replay = simulate_io(&model, &outcome.predicted_u, &p_hat, &past).unwrap();
    let gap = (replay.to_col() - outcome.predicted_y.to_col()).amax();
    assert!(gap <= 1e-6, "open-loop replay gap {gap:.3e}");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?} exceeds 5 s");
    println!("PASS criterion 8: open-loop replay gap {gap:.3e} ({elapsed:?})");
}

/// Strips the `solve_ms` field (wall-clock time, the one value that cannot
/// be bit-reproducible) from a trajectory CSV line.
fn strip_solve_ms(line: &str) -> String {
    let fields: Vec<&str> = line.split(',').collect();
    // Column layout: k,t,r,y,u,p...,status,solve_ms,objective
    if fields.len() < 3 {
        return line.to_string();
    }
    let mut kept: Vec<&str> = fields.clone();
    kept.remove(fields.len() - 2);
    kept.join(",")
}

#[test]
fn criterion_9_determinism() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_lpv-dpc");
    let tmp = std::env::temp_dir().join("lpv-dpc-acceptance-determinism");
    let _ = std::fs::remove_dir_all(&tmp);
    let run = |out: &Path| {
        let status = Command::new(bin)
            .args([
                "run",
                "--experiment",
                "example1",
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("binary runs");
        assert!(status.success(), "run failed with {status:?}");
    };
    let (out_a, out_b) = (tmp.join("a"), tmp.join("b"));
    run(&out_a);
    run(&out_b);

    let read = |dir: &Path, name: &str| {
        std::fs::read_to_string(dir.join("example1").join(name))
            .unwrap_or_else(|e| panic!("reading {name}: {e}"))
    };
    // Every artifact must be byte-identical; the trajectory CSVs are
    // compared with the wall-clock solve_ms column removed, since elapsed
    // time is the one physically nondeterministic output.
    for name in ["dictionary.csv", "dictionary.meta", "metrics.txt", "dpc_plot.svg", "mpc_plot.svg"] {
        assert_eq!(read(&out_a, name), read(&out_b, name), "{name} differs between runs");
    }
    for name in ["dpc_trajectory.csv", "mpc_trajectory.csv"] {
        let a = read(&out_a, name);
        let b = read(&out_b, name);
        let a_stripped: Vec<String> = a.lines().map(strip_solve_ms).collect();
        let b_stripped: Vec<String> = b.lines().map(strip_solve_ms).collect();
        assert_eq!(a_stripped, b_stripped, "{name} differs beyond solve_ms");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "runtime {elapsed:?} exceeds 2x criterion 6");
    println!("PASS criterion 9: byte-identical artifacts across seeded runs ({elapsed:?})");
}
