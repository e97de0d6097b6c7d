//! Wiring of the benchmark experiments: dictionary generation, controller
//! assembly, closed-loop execution and artifact emission.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use lpv_dpc::control::{
    closed_loop, tracking_metrics, Bounds, DpcConfig, DpcController, LpvIoPlant,
    MpcController, PendulumSim, Plant, TrajectoryLog,
};
use lpv_dpc::error::Error;
use lpv_dpc::plantlab::{
    example1_model, example1_scheduling, generate_dictionary, pendulum_io_model, read_dictionary_csv,
    read_dictionary_meta, simulate_io, write_dictionary_csv, write_dictionary_meta, DataDictionary,
    DictionaryMeta, DictionarySource, Excitation, IoWindow, LpvIoModel, PendulumPlant,
};
use lpv_dpc::predictor::{build_blocks, dd_solve, PredictorBlocks};
use lpv_dpc::qpcore::QpProblem;
use lpv_dpc::signals::SignalSequence;

use crate::config::{reference_level, ExperimentConfig, ExperimentId};

/// Anything that can abort a command, mapped to an exit code by `main`.
#[derive(Debug)]
pub enum CmdError {
    /// Exit 2: configuration or input-file parsing failed.
    Config(String),
    /// Exit 3: persistency of excitation (or the length bound) failed.
    Excitation(String),
    /// Exit 4: requested windows are inconsistent with the dictionary.
    Inconsistent(String),
    /// Exit 5: a control step was infeasible.
    Infeasible(String),
    /// Exit 1: I/O and other environment failures.
    Io(String),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(m) => write!(f, "{m}"),
            CmdError::Excitation(m) => write!(f, "{m}"),
            CmdError::Inconsistent(m) => write!(f, "{m}"),
            CmdError::Infeasible(m) => write!(f, "{m}"),
            CmdError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Io(_) => 1,
            CmdError::Config(_) => 2,
            CmdError::Excitation(_) => 3,
            CmdError::Inconsistent(_) => 4,
            CmdError::Infeasible(_) => 5,
        }
    }
}

fn map_core(e: Error) -> CmdError {
    match e {
        Error::ExcitationInsufficient { .. } | Error::UncertifiedDictionary => {
            CmdError::Excitation(e.to_string())
        }
        Error::InconsistentTrajectory { .. } => CmdError::Inconsistent(e.to_string()),
        Error::Infeasible { .. } => CmdError::Infeasible(e.to_string()),
        Error::Parse { .. } => CmdError::Config(e.to_string()),
        other => CmdError::Config(other.to_string()),
    }
}

fn io_err<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> CmdError + '_ {
    move |e| CmdError::Io(format!("{context}: {e}"))
}

/// Output directory: `--out`, else `$LPV_DPC_OUT`, else `./out`, with the
/// experiment name appended.
pub fn resolve_out_dir(cfg: &ExperimentConfig) -> PathBuf {
    let root = cfg
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("LPV_DPC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(cfg.experiment.as_str())
}

pub struct ExperimentParts {
    pub dictionary: DataDictionary<f64>,
    pub recipe: String,
}

/// Past window, future input, future scheduling, and the recorded future
/// output when one is available as oracle.
type WindowSet = (
    IoWindow<f64>,
    SignalSequence<f64>,
    SignalSequence<f64>,
    Option<SignalSequence<f64>>,
);

/// Generates the experiment's dictionary from its recipe.
pub fn build_dictionary(cfg: &ExperimentConfig) -> Result<ExperimentParts, CmdError> {
    if !cfg.n_d_sufficient() {
        return Err(CmdError::Excitation(format!(
            "dictionary length {} is below the minimum {} for np = {} (order {} with {} scheduling channels)",
            cfg.n_d,
            cfg.min_n_d(),
            cfg.horizon,
            cfg.n_x,
            cfg.n_p(),
        )));
    }
    match cfg.experiment {
        ExperimentId::Example1 | ExperimentId::Custom => {
            let model = example1_model::<f64>();
            let excitation = Excitation::Uniform { amplitude: 1.0 };
            let scheduling =
                example1_scheduling::<f64>(cfg.n_d).map_err(map_core)?;
            let dictionary = generate_dictionary(
                &DictionarySource::LpvModel { model: &model, scheduling: &scheduling },
                &excitation,
                cfg.n_d,
                cfg.seed,
                cfg.pe_order(),
            )
            .map_err(map_core)?;
            Ok(ExperimentParts {
                dictionary,
                recipe: format!("{} over lpv-io benchmark model", excitation.describe()),
            })
        }
        ExperimentId::Example2 => {
            let plant = PendulumPlant::<f64>::unbalanced_disc(0.0, 0.0);
            let excitation = Excitation::Multisine { harmonics: 8, amplitude: 0.25 };
            let dictionary = generate_dictionary(
                &DictionarySource::Pendulum { plant, substeps: cfg.substeps },
                &excitation,
                cfg.n_d,
                cfg.seed,
                cfg.pe_order(),
            )
            .map_err(map_core)?;
            Ok(ExperimentParts {
                dictionary,
                recipe: format!("{} over unbalanced-disc simulator", excitation.describe()),
            })
        }
    }
}

pub fn controller_config(cfg: &ExperimentConfig) -> Result<DpcConfig<f64>, CmdError> {
    let p_set = Bounds::interval(cfg.n_p(), cfg.p_min, cfg.p_max)
        .map_err(map_core)?;
    let mut out = DpcConfig::siso(
        cfg.horizon,
        cfg.n_ell,
        cfg.q,
        cfg.r,
        (cfg.u_min, cfg.u_max),
        (cfg.y_min, cfg.y_max),
        p_set,
        cfg.policy,
    )
    .map_err(map_core)?;
    out.reg = cfg.reg;
    Ok(out)
}

pub fn reference_sequence(cfg: &ExperimentConfig) -> SignalSequence<f64> {
    SignalSequence::from_fn(1, cfg.steps, |k| {
        DVector::from_element(1, reference_level(&cfg.reference, k))
    })
    .expect("reference sequence is well-formed")
}

fn write_file(path: &Path, content: &str) -> Result<(), CmdError> {
    fs::write(path, content).map_err(io_err(&format!("writing {}", path.display())))
}

pub fn export_dictionary(
    dir: &Path,
    cfg: &ExperimentConfig,
    parts: &ExperimentParts,
) -> Result<(PathBuf, PathBuf), CmdError> {
    fs::create_dir_all(dir).map_err(io_err(&format!("creating {}", dir.display())))?;
    let csv_path = dir.join("dictionary.csv");
    let meta_path = dir.join("dictionary.meta");
    let mut csv = Vec::new();
    write_dictionary_csv(&parts.dictionary, &mut csv).map_err(io_err("encoding dictionary"))?;
    write_file(&csv_path, std::str::from_utf8(&csv).expect("csv is utf8"))?;
    let meta = DictionaryMeta::for_dictionary(&parts.dictionary, cfg.seed, &parts.recipe);
    let mut meta_buf = Vec::new();
    write_dictionary_meta(&meta, &mut meta_buf).map_err(io_err("encoding metadata"))?;
    write_file(&meta_path, std::str::from_utf8(&meta_buf).expect("meta is utf8"))?;
    Ok((csv_path, meta_path))
}

/// Loads a dictionary from `dictionary.csv` + `dictionary.meta`, recomputing
/// the lifted signals and the certificate and cross-checking the metadata.
pub fn import_dictionary(csv_path: &Path, meta_path: &Path) -> Result<DataDictionary<f64>, CmdError> {
    let csv = fs::File::open(csv_path).map_err(io_err(&format!("opening {}", csv_path.display())))?;
    let (u, p, y) = read_dictionary_csv::<f64, _>(BufReader::new(csv)).map_err(map_core)?;
    let meta_file =
        fs::File::open(meta_path).map_err(io_err(&format!("opening {}", meta_path.display())))?;
    let meta = read_dictionary_meta(BufReader::new(meta_file)).map_err(map_core)?;
    let dict = DataDictionary::from_sequences(u, p, y, meta.pe_order).map_err(map_core)?;
    let cert = dict.certificate();
    if cert.rank != meta.pe_rank || cert.passed != meta.pe_passed {
        return Err(CmdError::Config(format!(
            "metadata certificate (rank {}) disagrees with recomputation (rank {})",
            meta.pe_rank, cert.rank
        )));
    }
    Ok(dict)
}

pub enum ControllerKind {
    Dpc,
    Mpc,
}

/// The experiment's exact or approximate prediction model for the baseline.
pub fn baseline_model(cfg: &ExperimentConfig) -> LpvIoModel<f64> {
    match cfg.experiment {
        ExperimentId::Example1 | ExperimentId::Custom => example1_model::<f64>(),
        ExperimentId::Example2 => {
            pendulum_io_model(&PendulumPlant::<f64>::unbalanced_disc(0.0, 0.0))
        }
    }
}

pub struct RunArtifacts {
    pub logs: Vec<(String, TrajectoryLog<f64>)>,
    pub metrics_text: String,
}

/// Runs the configured closed loop for the requested controllers.
pub fn run_closed_loops(
    cfg: &ExperimentConfig,
    dictionary: &DataDictionary<f64>,
    kinds: &[ControllerKind],
    qp_dump_dir: Option<&Path>,
) -> Result<RunArtifacts, CmdError> {
    let ctrl_cfg = controller_config(cfg)?;
    let reference = reference_sequence(cfg);
    let mut logs = Vec::new();

    for kind in kinds {
        let name = match kind {
            ControllerKind::Dpc => "dpc",
            ControllerKind::Mpc => "mpc",
        };
        let log = match cfg.experiment {
            ExperimentId::Example1 | ExperimentId::Custom => {
                let model = example1_model::<f64>();
                let schedule = example1_scheduling::<f64>(cfg.steps + cfg.horizon)
                    .map_err(map_core)?;
                let init = IoWindow::zeros(1, 2, 1, cfg.n_ell.max(2));
                let mut plant =
                    LpvIoPlant::new(model.clone(), schedule, &init, cfg.sample_time).map_err(map_core)?;
                run_one(cfg, dictionary, &ctrl_cfg, kind, &mut plant, &reference, &init, qp_dump_dir)?
            }
            ExperimentId::Example2 => {
                let start = PendulumPlant::<f64>::unbalanced_disc(-0.9, 0.0);
                let mut plant = PendulumSim::new(start, cfg.substeps);
                let init = plant.replicated_init(cfg.n_ell.max(2));
                run_one(cfg, dictionary, &ctrl_cfg, kind, &mut plant, &reference, &init, qp_dump_dir)?
            }
        };
        logs.push((name.to_string(), log));
    }

    let metrics_text = metrics_report(cfg, &ctrl_cfg, &logs);
    Ok(RunArtifacts { logs, metrics_text })
}

#[allow(clippy::too_many_arguments)]
fn run_one<P: Plant<f64>>(
    cfg: &ExperimentConfig,
    dictionary: &DataDictionary<f64>,
    ctrl_cfg: &DpcConfig<f64>,
    kind: &ControllerKind,
    plant: &mut P,
    reference: &SignalSequence<f64>,
    init: &IoWindow<f64>,
    qp_dump_dir: Option<&Path>,
) -> Result<TrajectoryLog<f64>, CmdError> {
    let result = match kind {
        ControllerKind::Dpc => {
            let blocks =
                build_blocks(dictionary, cfg.n_ell, cfg.horizon).map_err(map_core)?;
            if let Some(dir) = qp_dump_dir {
                dump_first_qp(cfg, &blocks, ctrl_cfg, reference, init, dir)?;
            }
            let mut ctrl = DpcController::new(blocks, ctrl_cfg.clone(), init).map_err(map_core)?;
            closed_loop(plant, &mut ctrl, reference, cfg.steps, init)
        }
        ControllerKind::Mpc => {
            let mut ctrl =
                MpcController::new(baseline_model(cfg), ctrl_cfg.clone(), init).map_err(map_core)?;
            closed_loop(plant, &mut ctrl, reference, cfg.steps, init)
        }
    };
    result.map_err(|e| {
        let exit = map_core(e.source.clone());
        match exit {
            CmdError::Infeasible(_) => {
                CmdError::Infeasible(format!("closed loop aborted at step {}: {}", e.step, e.source))
            }
            other => other,
        }
    })
}

/// Dumps the first-step QP matrices as dense row-major CSV, one file per
/// field, for offline inspection.
fn dump_first_qp(
    cfg: &ExperimentConfig,
    blocks: &PredictorBlocks<f64>,
    ctrl_cfg: &DpcConfig<f64>,
    reference: &SignalSequence<f64>,
    init: &IoWindow<f64>,
    dir: &Path,
) -> Result<(), CmdError> {
    let r_window = reference
        .window_held(1, cfg.horizon)
        .map_err(map_core)?;
    // Frozen scheduling at the init window's newest value as a representative
    // first step; the dump is diagnostic, not part of the run.
    let p_now = init.p().at(init.p().len()).into_owned();
    let p_hat = SignalSequence::from_fn(p_now.len(), cfg.horizon, |_| p_now.clone())
        .map_err(map_core)?;
    let prob = lpv_dpc::control::build_dpc_qp(blocks, init, &r_window, &p_hat, ctrl_cfg)
        .map_err(map_core)?;
    write_qp_dump(&prob, dir)
}

fn write_qp_dump(prob: &QpProblem<f64>, dir: &Path) -> Result<(), CmdError> {
    fs::create_dir_all(dir).map_err(io_err(&format!("creating {}", dir.display())))?;
    let matrix_csv = |m: &nalgebra::DMatrix<f64>| {
        let mut s = String::new();
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    };
    let vector_csv = |v: &nalgebra::DVector<f64>| {
        let mut s = String::new();
        for i in 0..v.len() {
            s.push_str(&format!("{}\n", v[i]));
        }
        s
    };
    write_file(&dir.join("p.csv"), &matrix_csv(prob.p()))?;
    write_file(&dir.join("q.csv"), &vector_csv(prob.q()))?;
    write_file(&dir.join("c0.csv"), &format!("{}\n", prob.c0()))?;
    write_file(&dir.join("a_eq.csv"), &matrix_csv(prob.a_eq()))?;
    write_file(&dir.join("b_eq.csv"), &vector_csv(prob.b_eq()))?;
    write_file(&dir.join("a_in.csv"), &matrix_csv(prob.a_in()))?;
    write_file(&dir.join("lb.csv"), &vector_csv(prob.lb()))?;
    write_file(&dir.join("ub.csv"), &vector_csv(prob.ub()))?;
    Ok(())
}

fn metrics_report(
    cfg: &ExperimentConfig,
    ctrl_cfg: &DpcConfig<f64>,
    logs: &[(String, TrajectoryLog<f64>)],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("experiment = {}\n", cfg.experiment.as_str()));
    out.push_str(&format!("seed = {}\n", cfg.seed));
    out.push_str(&format!("steps = {}\n", cfg.steps));
    for (name, log) in logs {
        let m = tracking_metrics(log, &ctrl_cfg.q, &ctrl_cfg.r, &ctrl_cfg.u_box, &ctrl_cfg.y_box);
        out.push_str(&format!(
            "{name}: rmse = {} | max_violation_u = {} | max_violation_y = {} | total_cost = {}\n",
            m.rmse, m.max_violation_u, m.max_violation_y, m.total_cost
        ));
        let degraded = log
            .records()
            .iter()
            .filter(|r| r.status != lpv_dpc::qpcore::QpStatus::Optimal)
            .count();
        out.push_str(&format!("{name}: non_optimal_solves = {degraded}\n"));
    }
    if logs.len() == 2 {
        let (a, b) = (&logs[0].1, &logs[1].1);
        let mut y_gap = 0.0f64;
        let mut u_gap = 0.0f64;
        for (ra, rb) in a.records().iter().zip(b.records()) {
            y_gap = y_gap.max((&ra.y - &rb.y).amax());
            u_gap = u_gap.max((&ra.u - &rb.u).amax());
        }
        out.push_str(&format!(
            "{}_vs_{}_max_output_gap = {}\n{}_vs_{}_max_input_gap = {}\n",
            logs[0].0, logs[1].0, y_gap, logs[0].0, logs[1].0, u_gap
        ));
    }
    out
}

/// Warns when the recorded scheduling leaves the declared set; data
/// collection may legitimately explore beyond the controller's certified
/// range, so this never fails.
fn warn_scheduling_range(cfg: &ExperimentConfig, dictionary: &DataDictionary<f64>) {
    let mut outside = 0usize;
    for k in 1..=dictionary.n_d() {
        let p = dictionary.p().at(k);
        if p.iter().any(|v| *v < cfg.p_min - 1e-12 || *v > cfg.p_max + 1e-12) {
            outside += 1;
        }
    }
    if outside > 0 {
        log::warn!(
            "{outside} of {} dictionary samples have scheduling outside [{}, {}]",
            dictionary.n_d(),
            cfg.p_min,
            cfg.p_max
        );
    }
}

/// `generate`: write dictionary CSV + metadata, print the certificate.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<(), CmdError> {
    cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let parts = build_dictionary(cfg)?;
    warn_scheduling_range(cfg, &parts.dictionary);
    let dir = resolve_out_dir(cfg);
    let (csv_path, meta_path) = export_dictionary(&dir, cfg, &parts)?;
    let cert = parts.dictionary.certificate();
    println!(
        "dictionary: {} samples -> {}",
        parts.dictionary.n_d(),
        csv_path.display()
    );
    println!("metadata: {}", meta_path.display());
    println!(
        "persistency of excitation: order {} rank {}/{} -> {}",
        cert.order,
        cert.rank,
        cert.required_rank,
        if cert.passed { "pass" } else { "FAIL" }
    );
    Ok(())
}

/// `check-pe`: recompute the excitation certificate, exit 3 when it fails.
pub fn cmd_check_pe(
    cfg: &ExperimentConfig,
    dict_paths: Option<(&Path, &Path)>,
) -> Result<(), CmdError> {
    cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let dictionary = match dict_paths {
        Some((csv, meta)) => import_dictionary(csv, meta)?,
        None => build_dictionary(cfg)?.dictionary,
    };
    let cert = dictionary.certificate();
    println!(
        "persistency of excitation: order {} rank {}/{} -> {}",
        cert.order,
        cert.rank,
        cert.required_rank,
        if cert.passed { "pass" } else { "FAIL" }
    );
    if !cert.passed {
        return Err(CmdError::Excitation(format!(
            "excitation insufficient: rank {}/{} at order {}",
            cert.rank, cert.required_rank, cert.order
        )));
    }
    Ok(())
}

/// `simulate`: data-driven simulation of given or generated windows, with the
/// exact-model oracle side by side when the model is available.
pub fn cmd_simulate(
    cfg: &ExperimentConfig,
    dict_paths: Option<(&Path, &Path)>,
    windows_path: Option<&Path>,
) -> Result<(), CmdError> {
    cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let dictionary = match dict_paths {
        Some((csv, meta)) => import_dictionary(csv, meta)?,
        None => build_dictionary(cfg)?.dictionary,
    };
    let blocks = build_blocks(&dictionary, cfg.n_ell, cfg.horizon).map_err(map_core)?;

    // Windows: from file (first n_ell rows past, rest future), or generated
    // from the benchmark model with the configured seed.
    let (past, fut_u, fut_p, oracle): WindowSet = match windows_path {
        Some(path) => {
            let file =
                fs::File::open(path).map_err(io_err(&format!("opening {}", path.display())))?;
            let (u, p, y) = read_dictionary_csv::<f64, _>(BufReader::new(file)).map_err(map_core)?;
            if u.len() < cfg.n_ell + 1 {
                return Err(CmdError::Config(format!(
                    "windows file needs more than n_ell = {} rows, found {}",
                    cfg.n_ell,
                    u.len()
                )));
            }
            let horizon = u.len() - cfg.n_ell;
            if horizon != cfg.horizon {
                return Err(CmdError::Config(format!(
                    "windows file provides a future of {} steps but np = {}",
                    horizon, cfg.horizon
                )));
            }
            let past = IoWindow::new(
                u.window(1, cfg.n_ell).map_err(map_core)?,
                p.window(1, cfg.n_ell).map_err(map_core)?,
                y.window(1, cfg.n_ell).map_err(map_core)?,
            )
            .map_err(map_core)?;
            let fut_u = u.window(cfg.n_ell + 1, horizon).map_err(map_core)?;
            let fut_p = p.window(cfg.n_ell + 1, horizon).map_err(map_core)?;
            (past, fut_u, fut_p, None)
        }
        None => generated_windows(cfg)?,
    };

    let solution = dd_solve(&blocks, &past, &fut_u, &fut_p, cfg.reg).map_err(map_core)?;

    // Oracle by the exact model where available (generated windows, or any
    // example1 windows).
    let oracle = oracle.or_else(|| {
        matches!(cfg.experiment, ExperimentId::Example1 | ExperimentId::Custom).then(|| {
            simulate_io(&example1_model::<f64>(), &fut_u, &fut_p, &past)
                .expect("oracle simulation of provided windows")
        })
    });

    let dir = resolve_out_dir(cfg);
    fs::create_dir_all(&dir).map_err(io_err(&format!("creating {}", dir.display())))?;
    let path = dir.join("prediction.csv");
    let mut out = String::from("k,y_hat");
    if oracle.is_some() {
        out.push_str(",y_oracle");
    }
    out.push('\n');
    for k in 1..=solution.predicted_y.len() {
        out.push_str(&format!("{k},{}", solution.predicted_y.at(k)[0]));
        if let Some(o) = &oracle {
            out.push_str(&format!(",{}", o.at(k)[0]));
        }
        out.push('\n');
    }
    write_file(&path, &out)?;
    println!("prediction: {}", path.display());
    println!("equality residual = {:.3e}", solution.residual);
    if let Some(o) = &oracle {
        let gap = (solution.predicted_y.to_col() - o.to_col()).amax();
        println!("max |y_hat - y_oracle| = {gap:.3e}");
    }
    Ok(())
}

/// Seeded consistent windows cut from a fresh benchmark-model trajectory.
fn generated_windows(cfg: &ExperimentConfig) -> Result<WindowSet, CmdError> {
    use rand::{Rng, SeedableRng};
    let total = cfg.n_ell + cfg.horizon + 20;
    let start = 11usize;
    match cfg.experiment {
        ExperimentId::Example1 | ExperimentId::Custom => {
            let model = example1_model::<f64>();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5157);
            let u = SignalSequence::from_fn(1, total, |_| {
                DVector::from_element(1, rng.gen_range(-1.0..1.0))
            })
            .map_err(map_core)?;
            let p = example1_scheduling::<f64>(total).map_err(map_core)?;
            let init = IoWindow::zeros(1, 2, 1, 2);
            let y = simulate_io(&model, &u, &p, &init).map_err(map_core)?;
            let past = IoWindow::new(
                u.window(start, cfg.n_ell).map_err(map_core)?,
                p.window(start, cfg.n_ell).map_err(map_core)?,
                y.window(start, cfg.n_ell).map_err(map_core)?,
            )
            .map_err(map_core)?;
            let fut_u = u.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            let fut_p = p.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            let fut_y = y.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            Ok((past, fut_u, fut_p, Some(fut_y)))
        }
        ExperimentId::Example2 => {
            // Sampled nonlinear plant: record a fresh multisine run and cut
            // windows from it; the recorded continuation serves as oracle.
            let plant = PendulumPlant::<f64>::unbalanced_disc(0.0, 0.0);
            let excitation = Excitation::Multisine { harmonics: 6, amplitude: 0.25 };
            let probe = generate_dictionary(
                &DictionarySource::Pendulum { plant, substeps: cfg.substeps },
                &excitation,
                total,
                cfg.seed ^ 0x5157,
                cfg.pe_order(),
            )
            .map_err(map_core)?;
            let (u, p, y) = (probe.u(), probe.p(), probe.y());
            let past = IoWindow::new(
                u.window(start, cfg.n_ell).map_err(map_core)?,
                p.window(start, cfg.n_ell).map_err(map_core)?,
                y.window(start, cfg.n_ell).map_err(map_core)?,
            )
            .map_err(map_core)?;
            let fut_u = u.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            let fut_p = p.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            let fut_y = y.window(start + cfg.n_ell, cfg.horizon).map_err(map_core)?;
            Ok((past, fut_u, fut_p, Some(fut_y)))
        }
    }
}

/// `run`: closed loops for the selected controllers plus artifacts.
pub fn cmd_run(
    cfg: &ExperimentConfig,
    kinds: &[ControllerKind],
    dump_qp: bool,
) -> Result<(), CmdError> {
    cfg.validate().map_err(|e| CmdError::Config(e.to_string()))?;
    let parts = build_dictionary(cfg)?;
    let dir = resolve_out_dir(cfg);
    export_dictionary(&dir, cfg, &parts)?;

    let dump_dir = dir.join("qp_dump");
    let artifacts = run_closed_loops(
        cfg,
        &parts.dictionary,
        kinds,
        dump_qp.then_some(dump_dir.as_path()),
    )?;

    for (name, log) in &artifacts.logs {
        let csv_path = dir.join(format!("{name}_trajectory.csv"));
        let file = fs::File::create(&csv_path)
            .map_err(io_err(&format!("creating {}", csv_path.display())))?;
        let mut writer = BufWriter::new(file);
        log.write_csv(&mut writer).map_err(io_err("writing trajectory"))?;
        writer.flush().map_err(io_err("flushing trajectory"))?;
        println!("trajectory: {}", csv_path.display());

        let svg_path = dir.join(format!("{name}_plot.svg"));
        let title = format!("{} – {}", cfg.experiment.as_str(), name);
        write_file(&svg_path, &crate::svg::render_log(log, &title))?;
        println!("plot: {}", svg_path.display());
    }

    let metrics_path = dir.join("metrics.txt");
    write_file(&metrics_path, &artifacts.metrics_text)?;
    println!("metrics: {}", metrics_path.display());
    print!("{}", artifacts.metrics_text);
    Ok(())
}
