//! The data-driven LPV predictor.
//!
//! From a certified dictionary this module builds the split Hankel blocks of
//! the past/future trajectory representation, assembles the linear system
//! that pins an initial trajectory and a future input/scheduling pair to a
//! coefficient vector `g`, solves for the minimum-norm `g`, and reconstructs
//! the predicted outputs as `Yf·g`. This is data-driven simulation of the
//! unknown system; the same equality stack (with the future inputs left
//! free) is the constraint set of the predictive controller.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::plantlab::{DataDictionary, IoWindow};
use crate::scalar::{real, Scalar};
use crate::signals::{blockdiag_kron, hankel_split, SignalSequence};

/// Split Hankel blocks of the dictionary signals, precomputed once per
/// `(n_ell, horizon)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorBlocks<T: Scalar> {
    n_ell: usize,
    horizon: usize,
    n_u: usize,
    n_y: usize,
    n_p: usize,
    n_cols: usize,
    /// Past blocks (first `n_ell` block rows) of u, uᵖ, y, yᵖ.
    up: DMatrix<T>,
    upp: DMatrix<T>,
    yp: DMatrix<T>,
    ypp: DMatrix<T>,
    /// Future blocks (last `horizon` block rows).
    uf: DMatrix<T>,
    ufp: DMatrix<T>,
    yf: DMatrix<T>,
    yfp: DMatrix<T>,
}

impl<T: Scalar> PredictorBlocks<T> {
    pub fn n_ell(&self) -> usize {
        self.n_ell
    }

    pub fn horizon(&self) -> usize {
        self.horizon
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

    /// Length of the coefficient vector: `N_d − (n_ell + horizon) + 1`.
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Future Hankel block of the input, the map from `g` to `col(û)`.
    pub fn uf(&self) -> &DMatrix<T> {
        &self.uf
    }

    /// Future Hankel block of the output, the map from `g` to `col(ŷ)`.
    pub fn yf(&self) -> &DMatrix<T> {
        &self.yf
    }
}

/// Builds the split Hankel blocks for a past window of `n_ell` steps and a
/// future horizon of `horizon` steps.
///
/// The dictionary must carry a passing excitation certificate; `n_ell` is
/// trusted to be at least the lag of the data-generating system.
pub fn build_blocks<T: Scalar>(
    dict: &DataDictionary<T>,
    n_ell: usize,
    horizon: usize,
) -> Result<PredictorBlocks<T>> {
    if !dict.certificate().passed {
        return Err(Error::UncertifiedDictionary);
    }
    if n_ell < 1 || horizon < 1 || n_ell + horizon > dict.n_d() {
        return Err(Error::InvalidDepth {
            depth: n_ell + horizon,
            len: dict.n_d(),
        });
    }
    let (up, uf) = hankel_split(dict.u(), n_ell, horizon)?;
    let (upp, ufp) = hankel_split(dict.u_lift(), n_ell, horizon)?;
    let (yp, yf) = hankel_split(dict.y(), n_ell, horizon)?;
    let (ypp, yfp) = hankel_split(dict.y_lift(), n_ell, horizon)?;
    Ok(PredictorBlocks {
        n_ell,
        horizon,
        n_u: dict.n_u(),
        n_y: dict.n_y(),
        n_p: dict.n_p(),
        n_cols: dict.n_d() - (n_ell + horizon) + 1,
        up: up.matrix().clone(),
        upp: upp.matrix().clone(),
        yp: yp.matrix().clone(),
        ypp: ypp.matrix().clone(),
        uf: uf.matrix().clone(),
        ufp: ufp.matrix().clone(),
        yf: yf.matrix().clone(),
        yfp: yfp.matrix().clone(),
    })
}

fn vstack<T: Scalar>(parts: &[&DMatrix<T>]) -> DMatrix<T> {
    let cols = parts.iter().map(|m| m.ncols()).max().unwrap_or(0);
    let rows = parts.iter().map(|m| m.nrows()).sum();
    let mut out = DMatrix::<T>::zeros(rows, cols);
    let mut at = 0;
    for part in parts {
        out.rows_mut(at, part.nrows()).copy_from(*part);
        at += part.nrows();
    }
    out
}

fn vcat<T: Scalar>(parts: &[&DVector<T>]) -> DVector<T> {
    let len = parts.iter().map(|v| v.len()).sum();
    let mut out = DVector::<T>::zeros(len);
    let mut at = 0;
    for part in parts {
        out.rows_mut(at, part.len()).copy_from(*part);
        at += part.len();
    }
    out
}

fn check_windows<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    fut_p: &SignalSequence<T>,
) -> Result<()> {
    if past.len() != blocks.n_ell {
        return Err(Error::DimensionMismatch {
            what: "past window length",
            expected: blocks.n_ell,
            actual: past.len(),
        });
    }
    if fut_p.len() != blocks.horizon {
        return Err(Error::DimensionMismatch {
            what: "future scheduling length",
            expected: blocks.horizon,
            actual: fut_p.len(),
        });
    }
    if past.u().dim() != blocks.n_u || past.y().dim() != blocks.n_y {
        return Err(Error::DimensionMismatch {
            what: "past window dimensions",
            expected: blocks.n_u + blocks.n_y,
            actual: past.u().dim() + past.y().dim(),
        });
    }
    if past.p().dim() != blocks.n_p || fut_p.dim() != blocks.n_p {
        return Err(Error::DimensionMismatch {
            what: "scheduling dimension",
            expected: blocks.n_p,
            actual: past.p().dim().max(fut_p.dim()),
        });
    }
    Ok(())
}

/// The equality stack with the future input either pinned (data-driven
/// simulation) or left free (predictive control, where `û = Uf·g` is a
/// dependent decision variable).
pub(crate) fn equality_stack<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    fut_u: Option<&SignalSequence<T>>,
    fut_p: &SignalSequence<T>,
) -> Result<(DMatrix<T>, DVector<T>)> {
    check_windows(blocks, past, fut_p)?;
    if let Some(fu) = fut_u {
        if fu.len() != blocks.horizon || fu.dim() != blocks.n_u {
            return Err(Error::DimensionMismatch {
                what: "future input window",
                expected: blocks.horizon * blocks.n_u,
                actual: fu.len() * fu.dim().max(1),
            });
        }
    }

    // Block-diagonal Kronecker operators of the past and future scheduling.
    let past_pu = blockdiag_kron(past.p(), blocks.n_u);
    let past_py = blockdiag_kron(past.p(), blocks.n_y);
    let fut_pu = blockdiag_kron(fut_p, blocks.n_u);
    let fut_py = blockdiag_kron(fut_p, blocks.n_y);

    let upp_rows = &blocks.upp - &past_pu * &blocks.up;
    let ypp_rows = &blocks.ypp - &past_py * &blocks.yp;
    let ufp_rows = &blocks.ufp - &fut_pu * &blocks.uf;
    let yfp_rows = &blocks.yfp - &fut_py * &blocks.yf;

    let zeros = |n: usize| DVector::<T>::zeros(n);
    let (a, b) = if let Some(fu) = fut_u {
        (
            vstack(&[
                &blocks.up, &upp_rows, &blocks.yp, &ypp_rows, &blocks.uf, &ufp_rows, &yfp_rows,
            ]),
            vcat(&[
                &past.u().to_col(),
                &zeros(upp_rows.nrows()),
                &past.y().to_col(),
                &zeros(ypp_rows.nrows()),
                &fu.to_col(),
                &zeros(ufp_rows.nrows()),
                &zeros(yfp_rows.nrows()),
            ]),
        )
    } else {
        (
            vstack(&[&blocks.up, &upp_rows, &blocks.yp, &ypp_rows, &ufp_rows, &yfp_rows]),
            vcat(&[
                &past.u().to_col(),
                &zeros(upp_rows.nrows()),
                &past.y().to_col(),
                &zeros(ypp_rows.nrows()),
                &zeros(ufp_rows.nrows()),
                &zeros(yfp_rows.nrows()),
            ]),
        )
    };
    Ok((a, b))
}

/// Assembles the full equality system `A g = b` that pins the past window and
/// the future input/scheduling pair.
///
/// Row order: past input; past input-lift consistency; past output; past
/// output-lift consistency; future input; future input-lift consistency;
/// future output-lift consistency. No row constrains `Yf·g` to a given
/// value — the future outputs remain free and are recovered afterwards.
pub fn assemble_equality<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    fut_u: &SignalSequence<T>,
    fut_p: &SignalSequence<T>,
) -> Result<(DMatrix<T>, DVector<T>)> {
    equality_stack(blocks, past, Some(fut_u), fut_p)
}

/// Default consistency tolerance of [`solve_g`]: `1e-6 · (1 + ‖b‖)`.
pub fn consistency_tol<T: Scalar>(b: &DVector<T>) -> T {
    real::<T>(1e-6) * (T::one() + b.norm())
}

/// Solves `A g = b` for the trajectory coefficient vector.
///
/// With `reg = 0` this returns the minimum-norm vector among the least-squares
/// solutions, computed through a rank-revealing orthogonal factorization;
/// with `reg > 0` it minimizes `‖Ag − b‖² + reg·‖g‖²`. A residual above the
/// consistency tolerance means the requested windows are not a trajectory of
/// the data-generating system and is reported as an error.
pub fn solve_g<T: Scalar>(a: &DMatrix<T>, b: &DVector<T>, reg: T) -> Result<(DVector<T>, T)> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "equality system",
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    let (g, residual) = if reg > T::zero() {
        let n = a.ncols();
        let normal = a.transpose() * a + DMatrix::<T>::identity(n, n) * reg;
        let rhs = a.transpose() * b;
        let g = match normal.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => linalg::min_norm_lstsq(&normal, &rhs, None).x,
        };
        let residual = (a * &g - b).norm();
        (g, residual)
    } else {
        let sol = linalg::min_norm_lstsq(a, b, None);
        (sol.x, sol.residual)
    };
    let tol = consistency_tol(b);
    if residual > tol {
        return Err(Error::InconsistentTrajectory {
            residual: residual.to_f64().unwrap_or(f64::NAN),
            tol: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((g, residual))
}

/// A solved prediction: the coefficient vector, the equality residual and the
/// reconstructed future outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorSolution<T: Scalar> {
    pub g: DVector<T>,
    pub residual: T,
    pub predicted_y: SignalSequence<T>,
}

/// Data-driven simulation with an explicit regularization weight.
pub fn dd_solve<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    fut_u: &SignalSequence<T>,
    fut_p: &SignalSequence<T>,
    reg: T,
) -> Result<PredictorSolution<T>> {
    let (a, b) = assemble_equality(blocks, past, fut_u, fut_p)?;
    let (g, residual) = solve_g(&a, &b, reg)?;
    let predicted_y = SignalSequence::from_stacked(blocks.n_y, &(&blocks.yf * &g))?;
    Ok(PredictorSolution {
        g,
        residual,
        predicted_y,
    })
}

/// Data-driven simulation of the unknown system: the future outputs implied
/// by the dictionary, a past window and the future input/scheduling pair.
pub fn dd_simulate<T: Scalar>(
    blocks: &PredictorBlocks<T>,
    past: &IoWindow<T>,
    fut_u: &SignalSequence<T>,
    fut_p: &SignalSequence<T>,
) -> Result<SignalSequence<T>> {
    Ok(dd_solve(blocks, past, fut_u, fut_p, T::zero())?.predicted_y)
}
