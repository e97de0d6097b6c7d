//! Closed-loop execution: plants under zero-order hold and the
//! measure → schedule → control → actuate → log cycle.

use std::fmt;

use nalgebra::DVector;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::plantlab::{pendulum_sample_step, pendulum_scheduling, IoWindow, LpvIoModel, PendulumPlant};
use crate::scalar::{real, Scalar};
use crate::signals::SignalSequence;

use super::log::{LogRecord, TrajectoryLog};
use super::{Controller, Measurement, SchedulingInput, SchedulingPolicy};

/// A plant that can be driven one sampling interval at a time.
pub trait Plant<T: Scalar> {
    fn n_u(&self) -> usize;
    fn n_y(&self) -> usize;
    fn n_p(&self) -> usize;
    fn sample_time(&self) -> T;

    /// Output at the current step; depends only on the past, so it is
    /// available before the input is chosen.
    fn current_output(&mut self) -> Result<DVector<T>>;

    /// Scheduling value at the current step (exogenous lookup or a map of
    /// the measured output).
    fn current_scheduling(&mut self, y: &DVector<T>) -> Result<DVector<T>>;

    /// Known future scheduling over the horizon starting at the current
    /// step, when the scheduling is exogenous.
    fn future_scheduling(&self, horizon: usize) -> Option<SignalSequence<T>>;

    /// Applies the input for the current step (zero-order hold) and moves to
    /// the next one.
    fn advance(&mut self, u: &DVector<T>, p: &DVector<T>) -> Result<()>;
}

/// The LPV input/output recursion as a plant with a known exogenous
/// scheduling trajectory.
pub struct LpvIoPlant<T: Scalar> {
    model: LpvIoModel<T>,
    schedule: SignalSequence<T>,
    hist_u: Vec<DVector<T>>,
    hist_p: Vec<DVector<T>>,
    hist_y: Vec<DVector<T>>,
    /// 1-based index of the current step.
    k: usize,
    sample_time: T,
}

impl<T: Scalar> LpvIoPlant<T> {
    /// `init` provides the pre-history; `schedule` must cover every simulated
    /// step (held at its last value beyond the end).
    pub fn new(
        model: LpvIoModel<T>,
        schedule: SignalSequence<T>,
        init: &IoWindow<T>,
        sample_time: T,
    ) -> Result<Self> {
        if init.len() < model.order() {
            return Err(Error::InitWindowTooShort {
                required: model.order(),
                actual: init.len(),
            });
        }
        if schedule.dim() != model.n_p() {
            return Err(Error::DimensionMismatch {
                what: "schedule dimension",
                expected: model.n_p(),
                actual: schedule.dim(),
            });
        }
        let unpack = |s: &SignalSequence<T>| (1..=s.len()).map(|k| s.at(k).into_owned()).collect();
        Ok(Self {
            model,
            schedule,
            hist_u: unpack(init.u()),
            hist_p: unpack(init.p()),
            hist_y: unpack(init.y()),
            k: 1,
            sample_time,
        })
    }
}

impl<T: Scalar> Plant<T> for LpvIoPlant<T> {
    fn n_u(&self) -> usize {
        self.model.n_u()
    }

    fn n_y(&self) -> usize {
        self.model.n_y()
    }

    fn n_p(&self) -> usize {
        self.model.n_p()
    }

    fn sample_time(&self) -> T {
        self.sample_time
    }

    fn current_output(&mut self) -> Result<DVector<T>> {
        // y_k from the recursion; lags index the recorded history backwards.
        let h = self.hist_y.len();
        let mut acc = DVector::<T>::zeros(self.model.n_y());
        for i in 1..=self.model.n_a() {
            if i > h {
                break;
            }
            let p_lag = &self.hist_p[h - i];
            let y_lag = &self.hist_y[h - i];
            acc -= self.model.eval_a(i, p_lag.as_view()) * y_lag;
        }
        for i in 1..=self.model.n_b() {
            if i > h {
                break;
            }
            let p_lag = &self.hist_p[h - i];
            let u_lag = &self.hist_u[h - i];
            acc += self.model.eval_b(i, p_lag.as_view()) * u_lag;
        }
        if acc.iter().any(|x| !Float::is_finite(*x)) {
            return Err(Error::Divergence { step: self.k });
        }
        Ok(acc)
    }

    fn current_scheduling(&mut self, _y: &DVector<T>) -> Result<DVector<T>> {
        let k = self.k.min(self.schedule.len());
        Ok(self.schedule.at(k).into_owned())
    }

    fn future_scheduling(&self, horizon: usize) -> Option<SignalSequence<T>> {
        self.schedule.window_held(self.k, horizon).ok()
    }

    fn advance(&mut self, u: &DVector<T>, p: &DVector<T>) -> Result<()> {
        let y = self.current_output()?;
        self.hist_u.push(u.clone());
        self.hist_p.push(p.clone());
        self.hist_y.push(y);
        self.k += 1;
        Ok(())
    }
}

/// The continuous-time pendulum sampled under zero-order hold; scheduling is
/// the sinc map of the measured angle (endogenous).
pub struct PendulumSim<T: Scalar> {
    plant: PendulumPlant<T>,
    substeps: usize,
    k: usize,
}

impl<T: Scalar> PendulumSim<T> {
    pub fn new(plant: PendulumPlant<T>, substeps: usize) -> Self {
        Self {
            plant,
            substeps: substeps.max(1),
            k: 1,
        }
    }

    pub fn state(&self) -> (T, T) {
        (self.plant.theta(), self.plant.omega())
    }

    /// Window that replicates the current measurement with zero input,
    /// matching a plant at rest at its initial angle.
    pub fn replicated_init(&self, len: usize) -> IoWindow<T> {
        let theta = self.plant.theta();
        let p = pendulum_scheduling(theta);
        IoWindow::new(
            SignalSequence::from_fn(1, len, |_| DVector::zeros(1)).expect("window"),
            SignalSequence::from_fn(1, len, |_| DVector::from_element(1, p)).expect("window"),
            SignalSequence::from_fn(1, len, |_| DVector::from_element(1, theta)).expect("window"),
        )
        .expect("window dimensions agree")
    }
}

impl<T: Scalar> Plant<T> for PendulumSim<T> {
    fn n_u(&self) -> usize {
        1
    }

    fn n_y(&self) -> usize {
        1
    }

    fn n_p(&self) -> usize {
        1
    }

    fn sample_time(&self) -> T {
        self.plant.sample_time()
    }

    fn current_output(&mut self) -> Result<DVector<T>> {
        Ok(DVector::from_element(1, self.plant.theta()))
    }

    fn current_scheduling(&mut self, y: &DVector<T>) -> Result<DVector<T>> {
        Ok(DVector::from_element(1, pendulum_scheduling(y[0])))
    }

    fn future_scheduling(&self, _horizon: usize) -> Option<SignalSequence<T>> {
        None
    }

    fn advance(&mut self, u: &DVector<T>, _p: &DVector<T>) -> Result<()> {
        self.plant = pendulum_sample_step(&self.plant, u[0], self.substeps)
            .map_err(|_| Error::Divergence { step: self.k })?;
        self.k += 1;
        Ok(())
    }
}

/// A closed-loop failure with the partial log retained.
#[derive(Debug)]
pub struct ClosedLoopError<T: Scalar> {
    pub step: usize,
    pub source: Error,
    pub partial: TrajectoryLog<T>,
}

impl<T: Scalar> fmt::Display for ClosedLoopError<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "closed loop aborted at step {}: {}", self.step, self.source)
    }
}

impl<T: Scalar> std::error::Error for ClosedLoopError<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Runs the receding-horizon loop for `steps` steps: measure, evaluate the
/// scheduling map, control, actuate under zero-order hold, log.
///
/// `init` seeds the controller's past buffer; the plant carries its own
/// matching pre-history. Controller and plant errors abort the loop with the
/// partial log retained in the error.
pub fn closed_loop<T: Scalar, P: Plant<T> + ?Sized, C: Controller<T> + ?Sized>(
    plant: &mut P,
    ctrl: &mut C,
    reference: &SignalSequence<T>,
    steps: usize,
    init: &IoWindow<T>,
) -> std::result::Result<TrajectoryLog<T>, Box<ClosedLoopError<T>>> {
    let horizon = ctrl.config().horizon;
    let policy = ctrl.config().policy;
    let sample_time = plant.sample_time();
    let mut log = TrajectoryLog::new(sample_time);

    let fail = |step: usize, source: Error, partial: TrajectoryLog<T>| {
        Box::new(ClosedLoopError {
            step,
            source,
            partial,
        })
    };

    if let Err(e) = ctrl.reset(init) {
        return Err(fail(0, e, log));
    }

    let mut prev: Option<Measurement<T>> = None;
    for k in 1..=steps {
        let y = match plant.current_output() {
            Ok(y) => y,
            Err(e) => return Err(fail(k, e, log)),
        };
        let p = match plant.current_scheduling(&y) {
            Ok(p) => p,
            Err(e) => return Err(fail(k, e, log)),
        };
        if !ctrl.config().p_set.contains(p.as_view(), real::<T>(1e-9)) {
            ::log::warn!("scheduling value outside the declared set at step {k}");
        }

        let r_window = match reference.window_held(k, horizon) {
            Ok(w) => w,
            Err(e) => return Err(fail(k, e, log)),
        };
        let scheduling = match policy {
            SchedulingPolicy::KnownFuture => match plant.future_scheduling(horizon) {
                Some(w) => SchedulingInput::Future(w),
                None => {
                    return Err(fail(
                        k,
                        Error::DimensionMismatch {
                            what: "future scheduling unavailable for known-future policy",
                            expected: horizon,
                            actual: 0,
                        },
                        log,
                    ))
                }
            },
            SchedulingPolicy::Frozen => SchedulingInput::Current(p.clone()),
        };

        let outcome = match ctrl.step(prev.take(), &r_window, &scheduling) {
            Ok(o) => o,
            Err(e) => return Err(fail(k, e, log)),
        };

        if let Err(e) = plant.advance(&outcome.input, &p) {
            return Err(fail(k, e, log));
        }

        log.push(LogRecord {
            k,
            t: real::<T>((k - 1) as f64) * sample_time,
            r: r_window.at(1).into_owned(),
            y: y.clone(),
            u: outcome.input.clone(),
            p: p.clone(),
            status: outcome.status,
            solve_time_ms: outcome.solve_time_ms,
            objective: outcome.objective,
        });
        prev = Some(Measurement {
            u: outcome.input,
            p,
            y,
        });
    }
    Ok(log)
}
