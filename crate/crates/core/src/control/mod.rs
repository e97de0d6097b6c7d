//! Receding-horizon controllers.
//!
//! Two controllers share the same quadratic tracking cost, constraint sets
//! and rolling past buffer: the data-driven one optimizes the trajectory
//! coefficient vector subject to the dictionary equality stack, while the
//! model-based baseline unrolls the exact input/output recursion into affine
//! prediction maps and optimizes the input sequence directly. Under
//! noise-free data and known future scheduling the two feasible sets
//! coincide, which is what the equivalence benchmark exercises.

mod log;
mod sim;

pub use log::{tracking_metrics, LogRecord, TrackingMetrics, TrajectoryLog};
pub use sim::{closed_loop, ClosedLoopError, LpvIoPlant, PendulumSim, Plant};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::plantlab::{IoWindow, LpvIoModel};
use crate::predictor::{equality_stack, PredictorBlocks};
use crate::qpcore::{self, QpProblem, QpSolution, QpStatus};
use crate::scalar::{real, Scalar};
use crate::signals::SignalSequence;

/// How the unknown future scheduling is resolved at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulingPolicy {
    /// The future scheduling trajectory is supplied by the caller (exogenous
    /// scheduling known in advance).
    KnownFuture,
    /// Gain-scheduling: the current measured value is held over the horizon.
    Frozen,
}

/// Per-channel box constraints with ±∞ allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds<T: Scalar> {
    lower: DVector<T>,
    upper: DVector<T>,
}

impl<T: Scalar> Bounds<T> {
    pub fn new(lower: DVector<T>, upper: DVector<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                what: "bound lengths",
                expected: lower.len(),
                actual: upper.len(),
            });
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::NonFinite { what: "bounds (lower > upper)" });
        }
        Ok(Self { lower, upper })
    }

    /// `[−amplitude, amplitude]` on every channel.
    pub fn symmetric(dim: usize, amplitude: T) -> Self {
        Self {
            lower: DVector::from_element(dim, -amplitude),
            upper: DVector::from_element(dim, amplitude),
        }
    }

    /// The same `[lo, hi]` interval on every channel.
    pub fn interval(dim: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(DVector::from_element(dim, lo), DVector::from_element(dim, hi))
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: DVector::from_element(dim, -T::infinity()),
            upper: DVector::from_element(dim, T::infinity()),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<T> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<T> {
        &self.upper
    }

    /// Worst violation of `v` against the box (0 when inside).
    pub fn violation(&self, v: nalgebra::DVectorView<'_, T>) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim() {
            for excess in [self.lower[i] - v[i], v[i] - self.upper[i]] {
                if Float::is_finite(excess) && excess > worst {
                    worst = excess;
                }
            }
        }
        worst
    }

    pub fn contains(&self, v: nalgebra::DVectorView<'_, T>, slack: T) -> bool {
        self.violation(v) <= slack
    }
}

/// Configuration shared by the data-driven controller and the model-based
/// baseline: horizon, past-window length, weights, constraint sets,
/// scheduling policy and solver settings. The control horizon equals the
/// prediction horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DpcConfig<T: Scalar> {
    pub horizon: usize,
    pub n_ell: usize,
    /// Output-error weight, `n_y × n_y` PSD.
    pub q: DMatrix<T>,
    /// Input weight, `n_u × n_u` PSD.
    pub r: DMatrix<T>,
    pub u_box: Bounds<T>,
    pub y_box: Bounds<T>,
    /// Scheduling set; used for range monitoring, not enforced.
    pub p_set: Bounds<T>,
    pub policy: SchedulingPolicy,
    /// Tikhonov weight on the coefficient vector (data-driven controller
    /// only). The benchmarks run with 0.
    pub reg: T,
    pub qp_tol: T,
    pub qp_max_iter: usize,
}

impl<T: Scalar> DpcConfig<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        horizon: usize,
        n_ell: usize,
        q: DMatrix<T>,
        r: DMatrix<T>,
        u_box: Bounds<T>,
        y_box: Bounds<T>,
        p_set: Bounds<T>,
        policy: SchedulingPolicy,
    ) -> Result<Self> {
        if horizon < 1 || n_ell < 1 {
            return Err(Error::InvalidDepth { depth: horizon.min(n_ell), len: 1 });
        }
        for (name, m) in [("output weight", &q), ("input weight", &r)] {
            if m.nrows() != m.ncols() {
                return Err(Error::DimensionMismatch {
                    what: "weight shape",
                    expected: m.nrows(),
                    actual: m.ncols(),
                });
            }
            let tol = real::<T>(1e-10) * (T::one() + m.amax());
            if (m - m.transpose()).amax() > tol {
                return Err(Error::NonFinite { what: "weight matrix (not symmetric)" });
            }
            let eigs = m.clone().symmetric_eigenvalues();
            if eigs.iter().any(|e| *e < -tol) {
                let _ = name;
                return Err(Error::NonFinite { what: "weight matrix (not PSD)" });
            }
        }
        Ok(Self {
            horizon,
            n_ell,
            q,
            r,
            u_box,
            y_box,
            p_set,
            policy,
            reg: T::zero(),
            qp_tol: qpcore::default_tol(),
            qp_max_iter: qpcore::DEFAULT_MAX_ITER,
        })
    }

    /// SISO convenience: scalar weights, interval boxes.
    #[allow(clippy::too_many_arguments)]
    pub fn siso(
        horizon: usize,
        n_ell: usize,
        q: T,
        r: T,
        u_box: (T, T),
        y_box: (T, T),
        p_set: Bounds<T>,
        policy: SchedulingPolicy,
    ) -> Result<Self> {
        Self::new(
            horizon,
            n_ell,
            DMatrix::from_element(1, 1, q),
            DMatrix::from_element(1, 1, r),
            Bounds::interval(1, u_box.0, u_box.1)?,
            Bounds::interval(1, y_box.0, y_box.1)?,
            p_set,
            policy,
        )
    }

    fn tile(&self, bounds: &Bounds<T>) -> (DVector<T>, DVector<T>) {
        let dim = bounds.dim();
        let mut lb = DVector::<T>::zeros(dim * self.horizon);
        let mut ub = DVector::<T>::zeros(dim * self.horizon);
        for j in 0..self.horizon {
            lb.rows_mut(j * dim, dim).copy_from(bounds.lower());
            ub.rows_mut(j * dim, dim).copy_from(bounds.upper());
        }
        (lb, ub)
    }

    fn block_weight(&self, w: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::identity(self.horizon, self.horizon).kronecker(w)
    }
}

/// Builds the quadratic program of the data-driven controller.
///
/// The decision variable is the coefficient vector `g` alone; `û = Uf·g` and
/// `ŷ = Yf·g` are affine images. The cost is
/// `Σ (ŷ_i − r_i)ᵀQ(ŷ_i − r_i) + û_iᵀR û_i + reg·‖g‖²`, the equalities are
/// the past-pinning and scheduling-consistency stack (future inputs free),
/// and the inequalities put the per-step boxes on `û` and `ŷ`.
pub fn build_dpc_qp<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    r_window: &SignalSequence<T>,
    p_hat: &SignalSequence<T>,
    cfg: &DpcConfig<T>,
) -> Result<QpProblem<T>> {
    if blocks.horizon() != cfg.horizon || blocks.n_ell() != cfg.n_ell {
        return Err(Error::DimensionMismatch {
            what: "blocks vs config horizon",
            expected: cfg.horizon,
            actual: blocks.horizon(),
        });
    }
    if r_window.len() != cfg.horizon || r_window.dim() != blocks.n_y() {
        return Err(Error::DimensionMismatch {
            what: "reference window",
            expected: cfg.horizon,
            actual: r_window.len(),
        });
    }
    let (a_eq, b_eq) = equality_stack(blocks, past, None, p_hat)?;

    let q_blk = cfg.block_weight(&cfg.q);
    let r_blk = cfg.block_weight(&cfg.r);
    let yf = blocks.yf();
    let uf = blocks.uf();
    let r_col = r_window.to_col();

    let two = real::<T>(2.0);
    let p_raw = (yf.transpose() * &q_blk * yf + uf.transpose() * &r_blk * uf) * two
        + DMatrix::identity(blocks.n_cols(), blocks.n_cols()) * (cfg.reg * two);
    let p = (&p_raw + p_raw.transpose()) * real::<T>(0.5);
    let q_lin = -(yf.transpose() * &q_blk * &r_col) * two;
    let c0 = r_col.dot(&(&q_blk * &r_col));

    let mut a_in = DMatrix::<T>::zeros(uf.nrows() + yf.nrows(), blocks.n_cols());
    a_in.rows_mut(0, uf.nrows()).copy_from(uf);
    a_in.rows_mut(uf.nrows(), yf.nrows()).copy_from(yf);
    let (ulb, uub) = cfg.tile(&cfg.u_box);
    let (ylb, yub) = cfg.tile(&cfg.y_box);
    let mut lb = DVector::<T>::zeros(a_in.nrows());
    let mut ub = DVector::<T>::zeros(a_in.nrows());
    lb.rows_mut(0, ulb.len()).copy_from(&ulb);
    lb.rows_mut(ulb.len(), ylb.len()).copy_from(&ylb);
    ub.rows_mut(0, uub.len()).copy_from(&uub);
    ub.rows_mut(uub.len(), yub.len()).copy_from(&yub);

    QpProblem::new(p, q_lin, c0, a_eq, b_eq, a_in, lb, ub)
}

/// Affine prediction maps of the input/output recursion over the horizon:
/// `col(ŷ) = offset + gain · col(û)`, with the past window and the scheduling
/// trajectory fixed.
pub fn mpc_prediction_maps<T: Scalar>(
    model: &LpvIoModel<T>,
    past: &IoWindow<T>,
    p_hat: &SignalSequence<T>,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let horizon = p_hat.len();
    let (n_u, n_y) = (model.n_u(), model.n_y());
    if past.len() < model.order() {
        return Err(Error::InitWindowTooShort {
            required: model.order(),
            actual: past.len(),
        });
    }
    if past.u().dim() != n_u || past.y().dim() != n_y || past.p().dim() != model.n_p() {
        return Err(Error::DimensionMismatch {
            what: "past window dimensions",
            expected: n_u + n_y + model.n_p(),
            actual: past.u().dim() + past.y().dim() + past.p().dim(),
        });
    }
    if p_hat.dim() != model.n_p() {
        return Err(Error::DimensionMismatch {
            what: "scheduling dimension",
            expected: model.n_p(),
            actual: p_hat.dim(),
        });
    }

    let w = past.len();
    // Per-step affine representations ŷ_j = offset_j + gain_j · col(û).
    let mut offsets: Vec<DVector<T>> = Vec::with_capacity(horizon);
    let mut gains: Vec<DMatrix<T>> = Vec::with_capacity(horizon);

    for j in 0..horizon {
        let mut offset = DVector::<T>::zeros(n_y);
        let mut gain = DMatrix::<T>::zeros(n_y, horizon * n_u);
        for i in 1..=model.n_a() {
            let t = j as isize - i as isize;
            let p_lag = if t >= 0 {
                p_hat.at(t as usize + 1).into_owned()
            } else {
                past.p().at((w as isize + t + 1) as usize).into_owned()
            };
            let a_i = model.eval_a(i, p_lag.as_view());
            if t >= 0 {
                offset -= &a_i * &offsets[t as usize];
                gain -= &a_i * &gains[t as usize];
            } else {
                let y_lag = past.y().at((w as isize + t + 1) as usize);
                offset -= &a_i * y_lag;
            }
        }
        for i in 1..=model.n_b() {
            let t = j as isize - i as isize;
            let p_lag = if t >= 0 {
                p_hat.at(t as usize + 1).into_owned()
            } else {
                past.p().at((w as isize + t + 1) as usize).into_owned()
            };
            let b_i = model.eval_b(i, p_lag.as_view());
            if t >= 0 {
                let col0 = t as usize * n_u;
                for r in 0..n_y {
                    for c in 0..n_u {
                        gain[(r, col0 + c)] += b_i[(r, c)];
                    }
                }
            } else {
                let u_lag = past.u().at((w as isize + t + 1) as usize);
                offset += &b_i * u_lag;
            }
        }
        offsets.push(offset);
        gains.push(gain);
    }

    let mut offset_col = DVector::<T>::zeros(horizon * n_y);
    let mut gain_mat = DMatrix::<T>::zeros(horizon * n_y, horizon * n_u);
    for j in 0..horizon {
        offset_col.rows_mut(j * n_y, n_y).copy_from(&offsets[j]);
        gain_mat.rows_mut(j * n_y, n_y).copy_from(&gains[j]);
    }
    Ok((offset_col, gain_mat))
}

/// Builds the baseline controller's QP over the input sequence.
pub fn build_mpc_qp<T: Scalar>(
    model: &LpvIoModel<T>,
    past: &IoWindow<T>,
    r_window: &SignalSequence<T>,
    p_hat: &SignalSequence<T>,
    cfg: &DpcConfig<T>,
) -> Result<(QpProblem<T>, DVector<T>, DMatrix<T>)> {
    if r_window.len() != cfg.horizon || p_hat.len() != cfg.horizon {
        return Err(Error::DimensionMismatch {
            what: "window lengths",
            expected: cfg.horizon,
            actual: r_window.len().min(p_hat.len()),
        });
    }
    let (offset, gain) = mpc_prediction_maps(model, past, p_hat)?;
    let q_blk = cfg.block_weight(&cfg.q);
    let r_blk = cfg.block_weight(&cfg.r);
    let r_col = r_window.to_col();
    let err0 = &offset - &r_col;

    let two = real::<T>(2.0);
    let p_raw = (gain.transpose() * &q_blk * &gain + &r_blk) * two;
    let p = (&p_raw + p_raw.transpose()) * real::<T>(0.5);
    let q_lin = (gain.transpose() * &q_blk * &err0) * two;
    let c0 = err0.dot(&(&q_blk * &err0));

    let n_dec = gain.ncols();
    let mut a_in = DMatrix::<T>::zeros(n_dec + gain.nrows(), n_dec);
    a_in.view_mut((0, 0), (n_dec, n_dec)).copy_from(&DMatrix::identity(n_dec, n_dec));
    a_in.rows_mut(n_dec, gain.nrows()).copy_from(&gain);
    let (ulb, uub) = cfg.tile(&cfg.u_box);
    let (ylb, yub) = cfg.tile(&cfg.y_box);
    let mut lb = DVector::<T>::zeros(a_in.nrows());
    let mut ub = DVector::<T>::zeros(a_in.nrows());
    lb.rows_mut(0, n_dec).copy_from(&ulb);
    ub.rows_mut(0, n_dec).copy_from(&uub);
    lb.rows_mut(n_dec, ylb.len()).copy_from(&(&ylb - &offset));
    ub.rows_mut(n_dec, yub.len()).copy_from(&(&yub - &offset));

    let prob = QpProblem::new(
        p,
        q_lin,
        c0,
        DMatrix::zeros(0, n_dec),
        DVector::zeros(0),
        a_in,
        lb,
        ub,
    )?;
    Ok((prob, offset, gain))
}

/// One completed step record handed back to a controller.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement<T: Scalar> {
    pub u: DVector<T>,
    pub p: DVector<T>,
    pub y: DVector<T>,
}

/// The scheduling information available at a step.
#[derive(Debug, Clone, PartialEq)]
pub enum SchedulingInput<T: Scalar> {
    /// Future scheduling window of horizon length (known-future policy).
    Future(SignalSequence<T>),
    /// Current measured scheduling value (frozen policy).
    Current(DVector<T>),
}

/// Result of one controller step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T: Scalar> {
    /// First input of the optimal sequence, the one to apply.
    pub input: DVector<T>,
    pub objective: T,
    pub status: QpStatus,
    pub solve_time_ms: f64,
    pub predicted_u: SignalSequence<T>,
    pub predicted_y: SignalSequence<T>,
    pub p_hat: SignalSequence<T>,
}

/// Receding-horizon controller interface shared by both implementations.
pub trait Controller<T: Scalar> {
    fn config(&self) -> &DpcConfig<T>;

    /// Replaces the rolling past buffer with the given window.
    fn reset(&mut self, init: &IoWindow<T>) -> Result<()>;

    /// Newest `n_ell` records as a window (the controller's current past).
    fn past_window(&self) -> IoWindow<T>;

    /// Pushes the completed measurement (if any), resolves the scheduling
    /// forecast per policy, solves the step QP and returns the input to
    /// apply.
    fn step(
        &mut self,
        measurement: Option<Measurement<T>>,
        r_window: &SignalSequence<T>,
        scheduling: &SchedulingInput<T>,
    ) -> Result<StepOutcome<T>>;
}

/// Rolling buffer of the most recent records.
#[derive(Debug, Clone)]
struct PastBuffer<T: Scalar> {
    records: std::collections::VecDeque<Measurement<T>>,
    capacity: usize,
}

impl<T: Scalar> PastBuffer<T> {
    fn from_window(init: &IoWindow<T>, capacity: usize) -> Result<Self> {
        if init.len() < capacity {
            return Err(Error::InitWindowTooShort {
                required: capacity,
                actual: init.len(),
            });
        }
        let mut records = std::collections::VecDeque::with_capacity(capacity);
        for k in init.len() - capacity + 1..=init.len() {
            records.push_back(Measurement {
                u: init.u().at(k).into_owned(),
                p: init.p().at(k).into_owned(),
                y: init.y().at(k).into_owned(),
            });
        }
        Ok(Self { records, capacity })
    }

    fn push(&mut self, m: Measurement<T>) {
        if self.records.len() == self.capacity {
            self.records.pop_front();
        }
        self.records.push_back(m);
    }

    fn window(&self) -> IoWindow<T> {
        let stack = |f: fn(&Measurement<T>) -> &DVector<T>| {
            SignalSequence::new(self.records.iter().map(|m| f(m).clone()).collect())
                .expect("buffer records share dimensions")
        };
        IoWindow::new(stack(|m| &m.u), stack(|m| &m.p), stack(|m| &m.y))
            .expect("buffer windows are aligned")
    }

    fn newest(&self) -> Option<&Measurement<T>> {
        self.records.back()
    }
}

fn resolve_p_hat<T: Scalar>(
    policy: SchedulingPolicy,
    scheduling: &SchedulingInput<T>,
    horizon: usize,
    n_p: usize,
) -> Result<SignalSequence<T>> {
    let p_hat = match (policy, scheduling) {
        (SchedulingPolicy::KnownFuture, SchedulingInput::Future(w)) => w.clone(),
        (SchedulingPolicy::Frozen, SchedulingInput::Current(p)) => {
            SignalSequence::from_fn(p.len(), horizon, |_| p.clone())?
        }
        _ => {
            return Err(Error::DimensionMismatch {
                what: "scheduling input kind for policy",
                expected: horizon,
                actual: 0,
            })
        }
    };
    if p_hat.len() != horizon || p_hat.dim() != n_p {
        return Err(Error::DimensionMismatch {
            what: "scheduling forecast",
            expected: horizon * n_p,
            actual: p_hat.len() * p_hat.dim(),
        });
    }
    Ok(p_hat)
}

fn solve_and_check<T: Scalar>(
    prob: &QpProblem<T>,
    cfg: &DpcConfig<T>,
    step_index: usize,
) -> Result<QpSolution<T>> {
    let sol = qpcore::solve(prob, cfg.qp_tol, cfg.qp_max_iter);
    match sol.status {
        QpStatus::Optimal => Ok(sol),
        QpStatus::Infeasible => Err(Error::Infeasible { step: step_index }),
        QpStatus::MaxIterations => {
            ::log::warn!(
                "degraded solve at step {step_index}: kkt residual {:.3e} after {} iterations",
                sol.kkt.max().to_f64().unwrap_or(f64::NAN),
                sol.iterations
            );
            Ok(sol)
        }
    }
}

/// Data-driven receding-horizon controller.
pub struct DpcController<T: Scalar> {
    blocks: PredictorBlocks<T>,
    cfg: DpcConfig<T>,
    buffer: PastBuffer<T>,
    step_index: usize,
}

impl<T: Scalar> DpcController<T> {
    pub fn new(blocks: PredictorBlocks<T>, cfg: DpcConfig<T>, init: &IoWindow<T>) -> Result<Self> {
        if blocks.horizon() != cfg.horizon || blocks.n_ell() != cfg.n_ell {
            return Err(Error::DimensionMismatch {
                what: "blocks vs config",
                expected: cfg.horizon,
                actual: blocks.horizon(),
            });
        }
        let buffer = PastBuffer::from_window(init, cfg.n_ell)?;
        Ok(Self {
            blocks,
            cfg,
            buffer,
            step_index: 0,
        })
    }

    pub fn blocks(&self) -> &PredictorBlocks<T> {
        &self.blocks
    }

    /// Newest buffered record (test hook for the shift invariant).
    pub fn newest_record(&self) -> Option<&Measurement<T>> {
        self.buffer.newest()
    }
}

impl<T: Scalar> Controller<T> for DpcController<T> {
    fn config(&self) -> &DpcConfig<T> {
        &self.cfg
    }

    fn reset(&mut self, init: &IoWindow<T>) -> Result<()> {
        self.buffer = PastBuffer::from_window(init, self.cfg.n_ell)?;
        self.step_index = 0;
        Ok(())
    }

    fn past_window(&self) -> IoWindow<T> {
        self.buffer.window()
    }

    fn step(
        &mut self,
        measurement: Option<Measurement<T>>,
        r_window: &SignalSequence<T>,
        scheduling: &SchedulingInput<T>,
    ) -> Result<StepOutcome<T>> {
        if let Some(m) = measurement {
            self.buffer.push(m);
        }
        self.step_index += 1;
        let past = self.buffer.window();
        let p_hat = resolve_p_hat(self.cfg.policy, scheduling, self.cfg.horizon, self.blocks.n_p())?;
        let prob = build_dpc_qp(&self.blocks, &past, r_window, &p_hat, &self.cfg)?;
        let start = Instant::now();
        let sol = solve_and_check(&prob, &self.cfg, self.step_index)?;
        let solve_time_ms = start.elapsed().as_secs_f64() * 1e3;

        let u_col = self.blocks.uf() * &sol.x;
        let y_col = self.blocks.yf() * &sol.x;
        let predicted_u = SignalSequence::from_stacked(self.blocks.n_u(), &u_col)?;
        let predicted_y = SignalSequence::from_stacked(self.blocks.n_y(), &y_col)?;
        Ok(StepOutcome {
            input: predicted_u.at(1).into_owned(),
            objective: sol.objective,
            status: sol.status,
            solve_time_ms,
            predicted_u,
            predicted_y,
            p_hat,
        })
    }
}

/// Model-based baseline with the exact input/output recursion as predictor.
pub struct MpcController<T: Scalar> {
    model: LpvIoModel<T>,
    cfg: DpcConfig<T>,
    buffer: PastBuffer<T>,
    step_index: usize,
}

impl<T: Scalar> MpcController<T> {
    pub fn new(model: LpvIoModel<T>, cfg: DpcConfig<T>, init: &IoWindow<T>) -> Result<Self> {
        if cfg.n_ell < model.order() {
            return Err(Error::InitWindowTooShort {
                required: model.order(),
                actual: cfg.n_ell,
            });
        }
        let buffer = PastBuffer::from_window(init, cfg.n_ell)?;
        Ok(Self {
            model,
            cfg,
            buffer,
            step_index: 0,
        })
    }
}

impl<T: Scalar> Controller<T> for MpcController<T> {
    fn config(&self) -> &DpcConfig<T> {
        &self.cfg
    }

    fn reset(&mut self, init: &IoWindow<T>) -> Result<()> {
        self.buffer = PastBuffer::from_window(init, self.cfg.n_ell)?;
        self.step_index = 0;
        Ok(())
    }

    fn past_window(&self) -> IoWindow<T> {
        self.buffer.window()
    }

    fn step(
        &mut self,
        measurement: Option<Measurement<T>>,
        r_window: &SignalSequence<T>,
        scheduling: &SchedulingInput<T>,
    ) -> Result<StepOutcome<T>> {
        if let Some(m) = measurement {
            self.buffer.push(m);
        }
        self.step_index += 1;
        let past = self.buffer.window();
        let p_hat = resolve_p_hat(self.cfg.policy, scheduling, self.cfg.horizon, self.model.n_p())?;
        let (prob, offset, gain) = build_mpc_qp(&self.model, &past, r_window, &p_hat, &self.cfg)?;
        let start = Instant::now();
        let sol = solve_and_check(&prob, &self.cfg, self.step_index)?;
        let solve_time_ms = start.elapsed().as_secs_f64() * 1e3;

        let y_col = &offset + &gain * &sol.x;
        let predicted_u = SignalSequence::from_stacked(self.model.n_u(), &sol.x)?;
        let predicted_y = SignalSequence::from_stacked(self.model.n_y(), &y_col)?;
        Ok(StepOutcome {
            input: predicted_u.at(1).into_owned(),
            objective: sol.objective,
            status: sol.status,
            solve_time_ms,
            predicted_u,
            predicted_y,
            p_hat,
        })
    }
}
