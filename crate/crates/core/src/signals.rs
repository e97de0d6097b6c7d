//! Sequence containers and the matrix constructions everything else is built
//! from: Hankel matrices, column vectorization, Kronecker lifting, the
//! block-diagonal Kronecker operator and the persistency-of-excitation test.
//!
//! Time is 1-based throughout, matching the convention that a recorded
//! sequence starts at step `k = 1`. Sequences are immutable after
//! construction; derived sequences are new values.

use nalgebra::{DMatrix, DVector, DVectorView};
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::{real, Scalar};

/// A finite, uniformly sampled sequence of real vectors.
///
/// Stored column-wise: column `k-1` of the backing matrix is the value at
/// time step `k`. This makes [`SignalSequence::to_col`] (the `col(·)`
/// vectorization) a plain copy of the column-major storage.
///
/// A dimension of zero is allowed: it is the degenerate scheduling signal of
/// a parameter-free (LTI) system, for which all lifted companions are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSequence<T: Scalar> {
    data: DMatrix<T>,
}

impl<T: Scalar> SignalSequence<T> {
    /// Builds a sequence from per-step vectors. All steps must share the same
    /// dimension, there must be at least one step, and every entry must be
    /// finite.
    pub fn new(values: Vec<DVector<T>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch {
                what: "sequence length",
                expected: 1,
                actual: 0,
            });
        }
        let dim = values[0].len();
        let mut data = DMatrix::<T>::zeros(dim, values.len());
        for (k, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "signal dimension",
                    expected: dim,
                    actual: v.len(),
                });
            }
            data.column_mut(k).copy_from(v);
        }
        Self::from_matrix(data)
    }

    /// Builds a sequence from a `dim × len` matrix whose columns are the
    /// time steps.
    pub fn from_matrix(data: DMatrix<T>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "sequence length",
                expected: 1,
                actual: 0,
            });
        }
        if data.iter().any(|x| !Float::is_finite(*x)) {
            return Err(Error::NonFinite { what: "signal sequence" });
        }
        Ok(Self { data })
    }

    /// Scalar (1-dimensional) sequence from a slice.
    pub fn from_scalars(values: &[T]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_row_slice(1, values.len(), values))
    }

    /// Builds a sequence of length `len` by evaluating `f` at the 1-based
    /// time steps `1..=len`.
    pub fn from_fn(dim: usize, len: usize, mut f: impl FnMut(usize) -> DVector<T>) -> Result<Self> {
        let mut data = DMatrix::<T>::zeros(dim, len.max(1));
        if len == 0 {
            return Err(Error::DimensionMismatch {
                what: "sequence length",
                expected: 1,
                actual: 0,
            });
        }
        for k in 1..=len {
            let v = f(k);
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "signal dimension",
                    expected: dim,
                    actual: v.len(),
                });
            }
            data.column_mut(k - 1).copy_from(&v);
        }
        Self::from_matrix(data)
    }

    /// Rebuilds a sequence of dimension `dim` from its `col(·)` vectorization.
    pub fn from_stacked(dim: usize, stacked: &DVector<T>) -> Result<Self> {
        if dim == 0 || !stacked.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                what: "stacked vector length",
                expected: dim.max(1),
                actual: stacked.len(),
            });
        }
        let len = stacked.len() / dim;
        Self::from_matrix(DMatrix::from_column_slice(dim, len, stacked.as_slice()))
    }

    /// Signal dimension `n_s`.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Number of time steps `N`.
    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    /// Always false: a sequence holds at least one step.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at the 1-based time step `k`.
    ///
    /// Panics if `k` is outside `1..=N`.
    pub fn at(&self, k: usize) -> DVectorView<'_, T> {
        assert!(k >= 1 && k <= self.len(), "time step {k} outside 1..={}", self.len());
        self.data.column(k - 1)
    }

    /// Backing `dim × len` matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    /// Column vectorization `col(s) = [s_1ᵀ … s_Nᵀ]ᵀ`.
    pub fn to_col(&self) -> DVector<T> {
        DVector::from_column_slice(self.data.as_slice())
    }

    /// Sub-sequence of `len` steps starting at the 1-based step `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start < 1 || len < 1 || start + len - 1 > self.len() {
            return Err(Error::InvalidDepth {
                depth: start + len - 1,
                len: self.len(),
            });
        }
        Ok(Self {
            data: self.data.columns(start - 1, len).into_owned(),
        })
    }

    /// Like [`SignalSequence::window`], but holding the last value when the
    /// requested window runs past the end of the sequence.
    pub fn window_held(&self, start: usize, len: usize) -> Result<Self> {
        if start < 1 || len < 1 {
            return Err(Error::InvalidDepth { depth: start, len: self.len() });
        }
        let mut data = DMatrix::<T>::zeros(self.dim(), len);
        for i in 0..len {
            let k = (start + i).min(self.len());
            data.column_mut(i).copy_from(&self.data.column(k - 1));
        }
        Ok(Self { data })
    }

    /// Iterator over the per-step values.
    pub fn iter(&self) -> impl Iterator<Item = DVectorView<'_, T>> {
        self.data.column_iter()
    }
}

/// Block-Hankel matrix of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix<T: Scalar> {
    matrix: DMatrix<T>,
    depth: usize,
    signal_dim: usize,
}

impl<T: Scalar> HankelMatrix<T> {
    /// The `(n_s·L) × (N−L+1)` matrix.
    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    /// Block depth `L`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Dimension of the source signal.
    pub fn signal_dim(&self) -> usize {
        self.signal_dim
    }

    /// Number of columns (windows).
    pub fn n_cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Block entry `(i, j)` (1-based): the `n_s`-vector at block row `i`,
    /// column `j`, equal to the source value at time `i + j − 1`.
    pub fn block(&self, i: usize, j: usize) -> DVectorView<'_, T> {
        self.matrix.generic_view(
            ((i - 1) * self.signal_dim, j - 1),
            (nalgebra::Dyn(self.signal_dim), nalgebra::U1),
        )
    }
}

/// Hankel matrix of depth `L`: column `j` stacks the source values
/// `s_j, …, s_{j+L−1}`.
pub fn hankel<T: Scalar>(seq: &SignalSequence<T>, depth: usize) -> Result<HankelMatrix<T>> {
    let n = seq.len();
    if depth < 1 || depth > n {
        return Err(Error::InvalidDepth { depth, len: n });
    }
    let n_s = seq.dim();
    let n_cols = n - depth + 1;
    let mut matrix = DMatrix::<T>::zeros(n_s * depth, n_cols);
    for i in 0..depth {
        for j in 0..n_cols {
            matrix
                .view_mut((i * n_s, j), (n_s, 1))
                .copy_from(&seq.matrix().column(i + j));
        }
    }
    Ok(HankelMatrix {
        matrix,
        depth,
        signal_dim: n_s,
    })
}

/// Splits the depth-`(n_ell + horizon)` Hankel matrix of `seq` into its first
/// `n_ell` block rows (past) and last `horizon` block rows (future).
///
/// Stacking the two parts vertically reproduces
/// `hankel(seq, n_ell + horizon)` exactly.
pub fn hankel_split<T: Scalar>(
    seq: &SignalSequence<T>,
    n_ell: usize,
    horizon: usize,
) -> Result<(HankelMatrix<T>, HankelMatrix<T>)> {
    if n_ell < 1 || horizon < 1 {
        return Err(Error::InvalidDepth {
            depth: n_ell + horizon,
            len: seq.len(),
        });
    }
    let full = hankel(seq, n_ell + horizon)?;
    let n_s = seq.dim();
    let past = HankelMatrix {
        matrix: full.matrix.rows(0, n_ell * n_s).into_owned(),
        depth: n_ell,
        signal_dim: n_s,
    };
    let future = HankelMatrix {
        matrix: full.matrix.rows(n_ell * n_s, horizon * n_s).into_owned(),
        depth: horizon,
        signal_dim: n_s,
    };
    Ok((past, future))
}

/// Per-step Kronecker lifting: element `k` is `p_k ⊗ s_k`.
///
/// Satisfies `col(sᵖ) = blockdiag_kron(p, n_s) · col(s)`.
pub fn kron_lift<T: Scalar>(
    p: &SignalSequence<T>,
    s: &SignalSequence<T>,
) -> Result<SignalSequence<T>> {
    if p.len() != s.len() {
        return Err(Error::DimensionMismatch {
            what: "kron_lift lengths",
            expected: p.len(),
            actual: s.len(),
        });
    }
    let dim = p.dim() * s.dim();
    let mut data = DMatrix::<T>::zeros(dim, s.len());
    for k in 0..s.len() {
        let pk = p.matrix().column(k);
        let sk = s.matrix().column(k);
        data.column_mut(k).copy_from(&pk.kronecker(&sk));
    }
    SignalSequence::from_matrix(data)
}

/// The block-diagonal Kronecker operator `(p ⊛ I_n)`: a
/// `(n_p·n·N) × (N·n)` matrix whose `k`-th diagonal block is `p_k ⊗ I_n`.
///
/// For `n_p = 1`, `n = 1` this is `diag(p)`.
pub fn blockdiag_kron<T: Scalar>(p: &SignalSequence<T>, n: usize) -> DMatrix<T> {
    let n_p = p.dim();
    let len = p.len();
    let mut out = DMatrix::<T>::zeros(n_p * n * len, len * n);
    for k in 0..len {
        for i in 0..n_p {
            let pk_i = p.matrix()[(i, k)];
            for j in 0..n {
                out[(k * n_p * n + i * n + j, k * n + j)] = pk_i;
            }
        }
    }
    out
}

/// Auxiliary lifted signal: element `k` is `[s_k ; p_k ⊗ s_k]`, of dimension
/// `(n_p + 1)·n_s`. Applied to inputs it yields the sequence whose
/// persistency of excitation certifies the data dictionary.
pub fn aux_io<T: Scalar>(
    s: &SignalSequence<T>,
    p: &SignalSequence<T>,
) -> Result<SignalSequence<T>> {
    if p.len() != s.len() {
        return Err(Error::DimensionMismatch {
            what: "aux_io lengths",
            expected: s.len(),
            actual: p.len(),
        });
    }
    let n_s = s.dim();
    let n_p = p.dim();
    let mut data = DMatrix::<T>::zeros((n_p + 1) * n_s, s.len());
    for k in 0..s.len() {
        let sk = s.matrix().column(k);
        let pk = p.matrix().column(k);
        data.view_mut((0, k), (n_s, 1)).copy_from(&sk);
        data.view_mut((n_s, k), (n_p * n_s, 1))
            .copy_from(&pk.kronecker(&sk));
    }
    SignalSequence::from_matrix(data)
}

/// Persistency-of-excitation test of order `L`.
///
/// Computes the rank of `hankel(seq, L)` from its singular values, counting
/// `σ_i > rank_tol · σ_max`, and reports whether it reaches the full value
/// `n_s · L`. A rank-deficient input is a valid negative answer, not an
/// error. Note the implied minimum length: with fewer than
/// `(n_s + 1)·L − 1` samples the Hankel matrix has too few columns to ever
/// reach full rank (not enforced here).
pub fn persistency_of_excitation<T: Scalar>(
    seq: &SignalSequence<T>,
    order: usize,
    rank_tol: T,
) -> Result<(bool, usize)> {
    let h = hankel(seq, order)?;
    let rank = linalg::svd_rank(h.matrix(), rank_tol);
    Ok((rank == seq.dim() * order, rank))
}

/// Default relative rank tolerance for the PE test: `1e-9 · max(rows, cols)`.
///
/// The data handled here is noise-free, so rank decisions are sharp; the
/// cutoff only absorbs floating-point roundoff. The value is a documented
/// choice of this crate, not part of the PE definition.
pub fn default_rank_tol<T: Scalar>(rows: usize, cols: usize) -> T {
    real::<T>(1e-9) * real::<T>(rows.max(cols) as f64)
}

/// Smallest dictionary length that supports persistency of excitation of
/// order `n_x + horizon` for the lifted input:
/// `((n_p + 1)·n_u + 1)·(n_x + horizon) − 1`.
pub fn min_dictionary_length(n_u: usize, n_p: usize, n_x: usize, horizon: usize) -> usize {
    ((n_p + 1) * n_u + 1) * (n_x + horizon) - 1
}
