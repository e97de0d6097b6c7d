//! Data-dictionary generation: seeded excitation, recording, lifting and the
//! excitation certificate.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};
use crate::signals::{aux_io, default_rank_tol, kron_lift, persistency_of_excitation, SignalSequence};

use super::{pendulum_sample_step, pendulum_scheduling, simulate_io, IoWindow, LpvIoModel, PendulumPlant};

/// Excitation recipe for dictionary generation.
///
/// The random generator is ChaCha8 (`rand_chacha`), seeded explicitly, so
/// identical seeds reproduce identical dictionaries on every platform.
#[derive(Debug, Clone, PartialEq)]
pub enum Excitation<T: Scalar> {
    /// Independent uniform samples on `[−amplitude, amplitude]`.
    Uniform { amplitude: T },
    /// Random-phase multisine: `harmonics` sine components at multiples of
    /// the fundamental `1/N_d`, phases uniform on `[0, 2π)`, scaled so the
    /// peak magnitude equals `amplitude`.
    Multisine { harmonics: usize, amplitude: T },
}

impl<T: Scalar> Excitation<T> {
    /// Short recipe description for metadata files.
    pub fn describe(&self) -> String {
        match self {
            Excitation::Uniform { amplitude } => format!("uniform amplitude={amplitude}"),
            Excitation::Multisine { harmonics, amplitude } => {
                format!("multisine harmonics={harmonics} amplitude={amplitude}")
            }
        }
    }
}

/// Generates a seeded excitation sequence of `n_u` channels and length `n_d`.
pub fn excitation_signal<T: Scalar>(
    excitation: &Excitation<T>,
    n_u: usize,
    n_d: usize,
    seed: u64,
) -> Result<SignalSequence<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match excitation {
        Excitation::Uniform { amplitude } => {
            let amp = *amplitude;
            SignalSequence::from_fn(n_u, n_d, |_| {
                DVector::from_fn(n_u, |_, _| amp * real::<T>(rng.gen_range(-1.0f64..1.0)))
            })
        }
        Excitation::Multisine { harmonics, amplitude } => {
            let mut data = DMatrix::<T>::zeros(n_u, n_d);
            for c in 0..n_u {
                let phases: Vec<f64> = (0..*harmonics)
                    .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                    .collect();
                let mut raw = vec![0.0f64; n_d];
                for (k, r) in raw.iter_mut().enumerate() {
                    for (h, phi) in phases.iter().enumerate() {
                        let arg = std::f64::consts::TAU * (h + 1) as f64 * k as f64 / n_d as f64;
                        *r += (arg + phi).sin();
                    }
                }
                let peak = raw.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
                for (k, r) in raw.iter().enumerate() {
                    data[(c, k)] = *amplitude * real::<T>(r / peak);
                }
            }
            SignalSequence::from_matrix(data)
        }
    }
}

/// What the dictionary is recorded from.
pub enum DictionarySource<'a, T: Scalar> {
    /// An LPV input/output model driven by a known exogenous scheduling
    /// sequence (at least `n_d` steps long). Recording starts from rest.
    LpvModel {
        model: &'a LpvIoModel<T>,
        scheduling: &'a SignalSequence<T>,
    },
    /// The nonlinear pendulum under zero-order-hold sampling; the scheduling
    /// channel is `sinc(θ)` of the recorded output.
    Pendulum {
        plant: PendulumPlant<T>,
        substeps: usize,
    },
}

/// Result of the persistency-of-excitation check on the lifted input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeCertificate {
    pub order: usize,
    pub required_rank: usize,
    pub rank: usize,
    pub passed: bool,
}

/// The recorded `(u, p, y)` triple plus its precomputed lifted sequences and
/// excitation certificate. Everything downstream is built from this value.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDictionary<T: Scalar> {
    u: SignalSequence<T>,
    p: SignalSequence<T>,
    y: SignalSequence<T>,
    u_lift: SignalSequence<T>,
    y_lift: SignalSequence<T>,
    aux_u: SignalSequence<T>,
    aux_y: SignalSequence<T>,
    pe: PeCertificate,
}

impl<T: Scalar> DataDictionary<T> {
    /// Builds a dictionary from recorded sequences, computing the lifted
    /// signals and running the excitation check of the given order on the
    /// lifted input. The certificate may be negative; consumers that need a
    /// certified dictionary check the `passed` flag.
    pub fn from_sequences(
        u: SignalSequence<T>,
        p: SignalSequence<T>,
        y: SignalSequence<T>,
        pe_order: usize,
    ) -> Result<Self> {
        if u.len() != p.len() || u.len() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "dictionary sequence lengths",
                expected: u.len(),
                actual: p.len().max(y.len()),
            });
        }
        let u_lift = kron_lift(&p, &u)?;
        let y_lift = kron_lift(&p, &y)?;
        let aux_u = aux_io(&u, &p)?;
        let aux_y = aux_io(&y, &p)?;
        let rows = aux_u.dim() * pe_order;
        let cols = u.len() + 1 - pe_order.min(u.len());
        let (passed, rank) =
            persistency_of_excitation(&aux_u, pe_order, default_rank_tol(rows, cols))?;
        let pe = PeCertificate {
            order: pe_order,
            required_rank: aux_u.dim() * pe_order,
            rank,
            passed,
        };
        Ok(Self {
            u,
            p,
            y,
            u_lift,
            y_lift,
            aux_u,
            aux_y,
            pe,
        })
    }

    pub fn n_d(&self) -> usize {
        self.u.len()
    }

    pub fn n_u(&self) -> usize {
        self.u.dim()
    }

    pub fn n_p(&self) -> usize {
        self.p.dim()
    }

    pub fn n_y(&self) -> usize {
        self.y.dim()
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

    /// Kronecker-lifted input `uᵖ`.
    pub fn u_lift(&self) -> &SignalSequence<T> {
        &self.u_lift
    }

    /// Kronecker-lifted output `yᵖ`.
    pub fn y_lift(&self) -> &SignalSequence<T> {
        &self.y_lift
    }

    /// Auxiliary input `[u; p ⊗ u]`.
    pub fn aux_u(&self) -> &SignalSequence<T> {
        &self.aux_u
    }

    /// Auxiliary output `[y; p ⊗ y]`.
    pub fn aux_y(&self) -> &SignalSequence<T> {
        &self.aux_y
    }

    pub fn certificate(&self) -> PeCertificate {
        self.pe
    }
}

/// Simulates the source under the excitation, records `(u, p, y)`, computes
/// the lifted sequences and certifies persistency of excitation of order
/// `pe_order` on the lifted input. Fails loudly when the certificate does not
/// pass, naming the achieved rank.
pub fn generate_dictionary<T: Scalar>(
    source: &DictionarySource<'_, T>,
    excitation: &Excitation<T>,
    n_d: usize,
    seed: u64,
    pe_order: usize,
) -> Result<DataDictionary<T>> {
    let (u, p, y) = match source {
        DictionarySource::LpvModel { model, scheduling } => {
            let u = excitation_signal(excitation, model.n_u(), n_d, seed)?;
            let p = scheduling.window(1, n_d)?;
            let init = IoWindow::zeros(model.n_u(), model.n_p(), model.n_y(), model.order());
            let y = simulate_io(model, &u, &p, &init)?;
            (u, p, y)
        }
        DictionarySource::Pendulum { plant, substeps } => {
            let u = excitation_signal(excitation, 1, n_d, seed)?;
            let mut state = *plant;
            let mut p_vals = Vec::with_capacity(n_d);
            let mut y_vals = Vec::with_capacity(n_d);
            for k in 1..=n_d {
                let theta = state.theta();
                y_vals.push(theta);
                p_vals.push(pendulum_scheduling(theta));
                state = pendulum_sample_step(&state, u.at(k)[0], *substeps)
                    .map_err(|_| Error::Divergence { step: k })?;
            }
            let p = SignalSequence::from_scalars(&p_vals)?;
            let y = SignalSequence::from_scalars(&y_vals)?;
            (u, p, y)
        }
    };

    let dict = DataDictionary::from_sequences(u, p, y, pe_order)?;
    let cert = dict.certificate();
    if !cert.passed {
        return Err(Error::ExcitationInsufficient {
            order: cert.order,
            required_rank: cert.required_rank,
            achieved_rank: cert.rank,
        });
    }
    Ok(dict)
}
