//! Ground-truth systems and data-dictionary generation.
//!
//! Provides the affine-in-scheduling LPV input/output recursion used both as
//! a data-generating plant and as the prediction model of the model-based
//! baseline controller, the nonlinear unbalanced-disc (rotational pendulum)
//! plant with classical RK4 integration, and seeded excitation generators.

mod csv;
mod dictionary;

pub use csv::{
    read_dictionary_csv, read_dictionary_meta, write_dictionary_csv, write_dictionary_meta,
    DictionaryMeta,
};
pub use dictionary::{
    excitation_signal, generate_dictionary, DataDictionary, DictionarySource, Excitation,
    PeCertificate,
};

use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::signals::SignalSequence;

/// A matched (input, scheduling, output) window of equal length.
///
/// Used for initialization windows of [`simulate_io`], for the rolling past
/// buffer of the controllers and for the initial trajectory of the
/// data-driven predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct IoWindow<T: Scalar> {
    u: SignalSequence<T>,
    p: SignalSequence<T>,
    y: SignalSequence<T>,
}

impl<T: Scalar> IoWindow<T> {
    pub fn new(u: SignalSequence<T>, p: SignalSequence<T>, y: SignalSequence<T>) -> Result<Self> {
        if u.len() != p.len() || u.len() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "window lengths",
                expected: u.len(),
                actual: p.len().max(y.len()),
            });
        }
        Ok(Self { u, p, y })
    }

    /// All-zero window, the natural start-from-rest initialization.
    pub fn zeros(n_u: usize, n_p: usize, n_y: usize, len: usize) -> Self {
        let zero = |dim: usize| {
            SignalSequence::from_matrix(DMatrix::<T>::zeros(dim, len)).expect("zero window")
        };
        Self {
            u: zero(n_u),
            p: zero(n_p),
            y: zero(n_y),
        }
    }

    /// Window made of the last `len` steps of three equally long sequences.
    pub fn tail_of(
        u: &SignalSequence<T>,
        p: &SignalSequence<T>,
        y: &SignalSequence<T>,
        len: usize,
    ) -> Result<Self> {
        let start = u
            .len()
            .checked_sub(len - 1)
            .filter(|s| *s >= 1)
            .ok_or(Error::InvalidDepth { depth: len, len: u.len() })?;
        Self::new(
            u.window(start, len)?,
            p.window(start, len)?,
            y.window(start, len)?,
        )
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn u(&self) -> &SignalSequence<T> {
        &self.u
    }

    pub fn p(&self) -> &SignalSequence<T> {
        &self.p
    }

    pub fn y(&self) -> &SignalSequence<T> {
        &self.y
    }
}

/// Discrete-time LPV system in input/output form,
///
/// ```text
/// y_k + Σ_{i=1}^{n_a} a_i(p_{k−i}) y_{k−i} = Σ_{i=1}^{n_b} b_i(p_{k−i}) u_{k−i},
/// ```
///
/// with coefficient functions affine in the scheduling vector,
/// `a_i(p) = a_{i,0} + Σ_j [p]_j a_{i,j}` and likewise for `b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpvIoModel<T: Scalar> {
    n_u: usize,
    n_y: usize,
    n_p: usize,
    /// `a[i-1][j]`: the `n_y × n_y` block multiplying `[p]_j · y_{k−i}`.
    a: Vec<Vec<DMatrix<T>>>,
    /// `b[i-1][j]`: the `n_y × n_u` block multiplying `[p]_j · u_{k−i}`.
    b: Vec<Vec<DMatrix<T>>>,
}

impl<T: Scalar> LpvIoModel<T> {
    pub fn new(
        n_u: usize,
        n_y: usize,
        n_p: usize,
        a: Vec<Vec<DMatrix<T>>>,
        b: Vec<Vec<DMatrix<T>>>,
    ) -> Result<Self> {
        for blocks in &a {
            if blocks.len() != n_p + 1 {
                return Err(Error::DimensionMismatch {
                    what: "output coefficient blocks",
                    expected: n_p + 1,
                    actual: blocks.len(),
                });
            }
            for m in blocks {
                if m.shape() != (n_y, n_y) {
                    return Err(Error::DimensionMismatch {
                        what: "output coefficient shape",
                        expected: n_y,
                        actual: m.nrows().max(m.ncols()),
                    });
                }
                if m.iter().any(|x| !Float::is_finite(*x)) {
                    return Err(Error::NonFinite { what: "output coefficients" });
                }
            }
        }
        for blocks in &b {
            if blocks.len() != n_p + 1 {
                return Err(Error::DimensionMismatch {
                    what: "input coefficient blocks",
                    expected: n_p + 1,
                    actual: blocks.len(),
                });
            }
            for m in blocks {
                if m.shape() != (n_y, n_u) {
                    return Err(Error::DimensionMismatch {
                        what: "input coefficient shape",
                        expected: n_y,
                        actual: m.nrows().max(m.ncols()),
                    });
                }
                if m.iter().any(|x| !Float::is_finite(*x)) {
                    return Err(Error::NonFinite { what: "input coefficients" });
                }
            }
        }
        Ok(Self { n_u, n_y, n_p, a, b })
    }

    /// SISO model from per-lag coefficient rows `[c_{i,0}, …, c_{i,n_p}]`.
    pub fn siso(a_rows: &[&[f64]], b_rows: &[&[f64]]) -> Result<Self> {
        let n_p = a_rows
            .first()
            .or(b_rows.first())
            .map(|r| r.len() - 1)
            .unwrap_or(0);
        let to_blocks = |rows: &[&[f64]]| -> Result<Vec<Vec<DMatrix<T>>>> {
            rows.iter()
                .map(|row| {
                    if row.len() != n_p + 1 {
                        return Err(Error::DimensionMismatch {
                            what: "coefficient row length",
                            expected: n_p + 1,
                            actual: row.len(),
                        });
                    }
                    Ok(row
                        .iter()
                        .map(|c| DMatrix::from_element(1, 1, real::<T>(*c)))
                        .collect())
                })
                .collect()
        };
        Self::new(1, 1, n_p, to_blocks(a_rows)?, to_blocks(b_rows)?)
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    /// Number of output lags `n_a`.
    pub fn n_a(&self) -> usize {
        self.a.len()
    }

    /// Number of input lags `n_b`.
    pub fn n_b(&self) -> usize {
        self.b.len()
    }

    /// System order for SISO models: `max(n_a, n_b)`.
    pub fn order(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    /// `a_i(p)` for the 1-based lag `i`, with `[p]_0 = 1`.
    pub fn eval_a(&self, i: usize, p: nalgebra::DVectorView<'_, T>) -> DMatrix<T> {
        Self::eval_blocks(&self.a[i - 1], p)
    }

    /// `b_i(p)` for the 1-based lag `i`, with `[p]_0 = 1`.
    pub fn eval_b(&self, i: usize, p: nalgebra::DVectorView<'_, T>) -> DMatrix<T> {
        Self::eval_blocks(&self.b[i - 1], p)
    }

    fn eval_blocks(blocks: &[DMatrix<T>], p: nalgebra::DVectorView<'_, T>) -> DMatrix<T> {
        let mut out = blocks[0].clone();
        for (j, block) in blocks.iter().enumerate().skip(1) {
            out += block * p[j - 1];
        }
        out
    }
}

/// Simulates the LPV input/output recursion over the full length of `u`.
///
/// Lagged values at the left boundary are drawn from the initialization
/// window, which must be at least `max(n_a, n_b)` steps long. Returns the
/// output sequence of the same length as `u`.
pub fn simulate_io<T: Scalar>(
    model: &LpvIoModel<T>,
    u: &SignalSequence<T>,
    p: &SignalSequence<T>,
    init: &IoWindow<T>,
) -> Result<SignalSequence<T>> {
    if u.len() != p.len() {
        return Err(Error::DimensionMismatch {
            what: "input/scheduling lengths",
            expected: u.len(),
            actual: p.len(),
        });
    }
    if u.dim() != model.n_u {
        return Err(Error::DimensionMismatch {
            what: "input dimension",
            expected: model.n_u,
            actual: u.dim(),
        });
    }
    if p.dim() != model.n_p {
        return Err(Error::DimensionMismatch {
            what: "scheduling dimension",
            expected: model.n_p,
            actual: p.dim(),
        });
    }
    let lag = model.order();
    if init.len() < lag {
        return Err(Error::InitWindowTooShort {
            required: lag,
            actual: init.len(),
        });
    }
    if init.u().dim() != model.n_u || init.y().dim() != model.n_y || init.p().dim() != model.n_p {
        return Err(Error::DimensionMismatch {
            what: "initialization window dimensions",
            expected: model.n_u + model.n_y + model.n_p,
            actual: init.u().dim() + init.y().dim() + init.p().dim(),
        });
    }

    let n = u.len();
    let w = init.len();
    let mut y = DMatrix::<T>::zeros(model.n_y, n);

    // Value at the (possibly non-positive) time index `k`, 1-based; indices
    // k ≤ 0 address the initialization window from its right end.
    let fetch = |seq: &DMatrix<T>, init_seq: &SignalSequence<T>, k: isize| -> DVector<T> {
        if k >= 1 {
            seq.column(k as usize - 1).into_owned()
        } else {
            init_seq.at((w as isize + k) as usize).into_owned()
        }
    };

    for k in 1..=n {
        let mut acc = DVector::<T>::zeros(model.n_y);
        for i in 1..=model.n_a() {
            let ki = k as isize - i as isize;
            let p_lag = fetch(p.matrix(), init.p(), ki);
            let y_lag = fetch(&y, init.y(), ki);
            acc -= model.eval_a(i, p_lag.as_view()) * y_lag;
        }
        for i in 1..=model.n_b() {
            let ki = k as isize - i as isize;
            let p_lag = fetch(p.matrix(), init.p(), ki);
            let u_lag = fetch(u.matrix(), init.u(), ki);
            acc += model.eval_b(i, p_lag.as_view()) * u_lag;
        }
        if acc.iter().any(|x| !Float::is_finite(*x)) {
            return Err(Error::Divergence { step: k });
        }
        y.column_mut(k - 1).copy_from(&acc);
    }
    SignalSequence::from_matrix(y)
}

/// The SISO benchmark model with scheduling vector `[p, p²]`:
///
/// ```text
/// a_1(p) = 1 − 0.5 p − 0.1 p²     b_1(p) = 0.5 − 0.4 p + 0.01 p²
/// a_2(p) = 0.5 − 0.7 p − 0.1 p²   b_2(p) = 0.2 − 0.3 p − 0.2 p²
/// ```
///
/// Order and lag are both 2.
pub fn example1_model<T: Scalar>() -> LpvIoModel<T> {
    LpvIoModel::siso(
        &[&[1.0, -0.5, -0.1], &[0.5, -0.7, -0.1]],
        &[&[0.5, -0.4, 0.01], &[0.2, -0.3, -0.2]],
    )
    .expect("benchmark model coefficients are consistent")
}

/// Exogenous scheduling for the benchmark model: base signal
/// `p_k = 0.5 sin(0.35 π k) + 0.5`, returned as the 2-vector `[p_k, p_k²]`
/// per step.
pub fn example1_scheduling<T: Scalar>(len: usize) -> Result<SignalSequence<T>> {
    SignalSequence::from_fn(2, len, |k| {
        let base = 0.5 * (0.35 * std::f64::consts::PI * k as f64).sin() + 0.5;
        DVector::from_column_slice(&[real::<T>(base), real::<T>(base * base)])
    })
}

/// DC motor with an unbalanced disc (rotational pendulum),
///
/// ```text
/// θ̈ = −(m·g·l/J) sin θ − (1/τ) θ̇ + (K_m/τ) u.
/// ```
///
/// The default parameters are the unbalanced-disc bench values; note the
/// mass-to-center distance of 0.42 mm, stored here in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumPlant<T: Scalar> {
    mass: T,
    gravity: T,
    arm: T,
    inertia: T,
    back_emf: T,
    motor_constant: T,
    sample_time: T,
    theta: T,
    omega: T,
}

impl<T: Scalar> PendulumPlant<T> {
    /// Bench parameters: m = 0.07 kg, g = 9.8 m/s², l = 0.42 mm,
    /// J = 2.2·10⁻⁴ N·m², τ = 0.5971, K_m = 15.3145, T_s = 75 ms.
    pub fn unbalanced_disc(theta0: T, omega0: T) -> Self {
        Self::new(
            real(0.07),
            real(9.8),
            real(0.42e-3),
            real(2.2e-4),
            real(0.5971),
            real(15.3145),
            real(75e-3),
            theta0,
            omega0,
        )
        .expect("bench parameters are positive")
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new(
        mass: T,
        gravity: T,
        arm: T,
        inertia: T,
        back_emf: T,
        motor_constant: T,
        sample_time: T,
        theta: T,
        omega: T,
    ) -> Result<Self> {
        let params = [mass, gravity, arm, inertia, back_emf, motor_constant, sample_time];
        if params.iter().any(|x| *x <= T::zero() || !Float::is_finite(*x)) {
            return Err(Error::NonFinite { what: "pendulum parameters" });
        }
        if !Float::is_finite(theta) || !Float::is_finite(omega) {
            return Err(Error::NonFinite { what: "pendulum state" });
        }
        Ok(Self {
            mass,
            gravity,
            arm,
            inertia,
            back_emf,
            motor_constant,
            sample_time,
            theta,
            omega,
        })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn omega(&self) -> T {
        self.omega
    }

    pub fn sample_time(&self) -> T {
        self.sample_time
    }

    /// Returns a copy with a different state, keeping the parameters.
    pub fn with_state(&self, theta: T, omega: T) -> Self {
        Self { theta, omega, ..*self }
    }

    /// Angular acceleration at the given state and input voltage.
    pub fn accel(&self, theta: T, omega: T, input: T) -> T {
        -(self.mass * self.gravity * self.arm / self.inertia) * Float::sin(theta)
            - omega / self.back_emf
            + self.motor_constant / self.back_emf * input
    }
}

/// One classical fourth-order Runge–Kutta step of the pendulum dynamics with
/// the input held constant over the step (zero-order hold).
pub fn rk4_step<T: Scalar>(plant: &PendulumPlant<T>, input: T, dt: T) -> Result<PendulumPlant<T>> {
    let f = |theta: T, omega: T| -> (T, T) { (omega, plant.accel(theta, omega, input)) };
    let (theta, omega) = (plant.theta, plant.omega);
    let half = real::<T>(0.5);
    let sixth = T::one() / real::<T>(6.0);
    let two = real::<T>(2.0);

    let (k1t, k1w) = f(theta, omega);
    let (k2t, k2w) = f(theta + half * dt * k1t, omega + half * dt * k1w);
    let (k3t, k3w) = f(theta + half * dt * k2t, omega + half * dt * k2w);
    let (k4t, k4w) = f(theta + dt * k3t, omega + dt * k3w);

    let theta_next = theta + dt * sixth * (k1t + two * k2t + two * k3t + k4t);
    let omega_next = omega + dt * sixth * (k1w + two * k2w + two * k3w + k4w);
    if !Float::is_finite(theta_next) || !Float::is_finite(omega_next) {
        return Err(Error::Divergence { step: 1 });
    }
    Ok(plant.with_state(theta_next, omega_next))
}

/// Advances the pendulum by one sampling interval under zero-order hold,
/// using `substeps` RK4 sub-intervals to emulate the continuous-time plant.
pub fn pendulum_sample_step<T: Scalar>(
    plant: &PendulumPlant<T>,
    input: T,
    substeps: usize,
) -> Result<PendulumPlant<T>> {
    let n = substeps.max(1);
    let dt = plant.sample_time / real::<T>(n as f64);
    let mut state = *plant;
    for _ in 0..n {
        state = rk4_step(&state, input, dt)?;
    }
    Ok(state)
}

/// Scheduling map of the pendulum embedding: `sinc(θ) = sin(θ)/θ`, with the
/// removable singularity at `θ = 0` evaluated as 1.
pub fn pendulum_scheduling<T: Scalar>(theta: T) -> T {
    if theta == T::zero() {
        T::one()
    } else {
        Float::sin(theta) / theta
    }
}

/// Affine LPV input/output model of the sampled pendulum, used as the
/// prediction model of the model-based baseline.
///
/// Central-difference discretization of `θ̈ = −c·p·θ − d·θ̇ + e·u` with
/// `p = sinc(θ)` frozen per step:
///
/// ```text
/// y_k + a_1(p_{k−1}) y_{k−1} + a_2 y_{k−2} = b_1 u_{k−1},
/// a_1(p) = −(2/T² − c·p)/(1/T² + d/(2T)),   a_2 = (1/T² − d/(2T))/(1/T² + d/(2T)),
/// b_1 = e/(1/T² + d/(2T)).
/// ```
///
/// Second-order accurate in the sampling time and exact at equilibria
/// (`y·c·p = e·u` matches the continuous balance).
pub fn pendulum_io_model<T: Scalar>(plant: &PendulumPlant<T>) -> LpvIoModel<T> {
    let ts = plant.sample_time;
    let c = plant.mass * plant.gravity * plant.arm / plant.inertia;
    let d = T::one() / plant.back_emf;
    let e = plant.motor_constant / plant.back_emf;
    let inv_t2 = T::one() / (ts * ts);
    let half_dt = d / (real::<T>(2.0) * ts);
    let denom = inv_t2 + half_dt;

    let a1_const = -(real::<T>(2.0) * inv_t2) / denom;
    let a1_p = c / denom;
    let a2_const = (inv_t2 - half_dt) / denom;
    let b1_const = e / denom;

    let block = |v: T| DMatrix::from_element(1, 1, v);
    LpvIoModel::new(
        1,
        1,
        1,
        vec![
            vec![block(a1_const), block(a1_p)],
            vec![block(a2_const), block(T::zero())],
        ],
        vec![vec![block(b1_const), block(T::zero())]],
    )
    .expect("pendulum coefficients are consistent")
}
