//! Dense complex linear algebra for quantum states: kets, density operators,
//! tensor products, partial traces, Kraus superoperators and measurements.
//!
//! Everything works on explicit row-major matrices over `Complex64`. Systems
//! are small (a handful of qubits), so no sparsity or structure is exploited.
//! Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
//! basis index.

mod gates;

pub use gates::{builtin_measurement, builtin_superoperator, coin_measurement};

use num_complex::Complex64;
use thiserror::Error;

/// Default comparison tolerance. Overridable via `LQCHECK_EPS` in the CLI.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Weight floor below which distribution entries are pruned as numerical dust.
pub const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QmathError {
    #[error("unknown ket label {0:?}")]
    UnknownKetLabel(String),
    #[error("arity mismatch: operator acts on {expected} qubits, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("qubit index {0} out of range for {1} qubits")]
    IndexOutOfRange(usize, usize),
    #[error("duplicate qubit index {0}")]
    DuplicateIndex(usize),
    #[error("Kraus operators are trace increasing (sum E\u{2020}E exceeds identity by {0:.3e})")]
    TraceIncreasing(f64),
    #[error("measurement operators violate completeness (max deviation {0:.3e})")]
    IncompleteMeasurement(f64),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("non-finite entry produced")]
    NonFinite,
}

pub type Result<T> = std::result::Result<T, QmathError>;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds a matrix from rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[Vec<(f64, f64)>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix literal");
            for (j, &(re, im)) in row.iter().enumerate() {
                m.set(i, j, Complex64::new(re, im));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Kronecker product, `self` on the left (most significant factor).
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, eps: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= eps
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn is_hermitian(&self, eps: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > eps {
                    return false;
                }
            }
        }
        true
    }

    /// Positive semidefiniteness within `eps`, tested as a Cholesky
    /// factorization of `self + eps*I` with a small pivot tolerance.
    pub fn is_psd(&self, eps: f64) -> bool {
        if !self.is_hermitian(eps.max(1e-7)) {
            return false;
        }
        let n = self.rows;
        let mut a = self.add(&CMatrix::identity(n).scale(eps));
        for k in 0..n {
            let mut d = a.get(k, k).re;
            for j in 0..k {
                d -= a.get(k, j).norm_sqr();
            }
            if d < -eps {
                return false;
            }
            let d = d.max(0.0).sqrt();
            a.set(k, k, Complex64::new(d, 0.0));
            for i in (k + 1)..n {
                let mut v = a.get(i, k);
                for j in 0..k {
                    v -= a.get(i, j) * a.get(k, j).conj();
                }
                let v = if d > 1e-12 { v / d } else { Complex64::new(0.0, 0.0) };
                a.set(i, k, v);
            }
        }
        true
    }

    /// `B - A` positive semidefinite within `eps`, written `A \u{2291} B`.
    pub fn dominated_by(&self, other: &CMatrix, eps: f64) -> bool {
        other.sub(self).is_psd(eps)
    }

    /// Rounds every entry onto a `grid`-spaced lattice and serializes the
    /// result. Used as a stable digest key for memoization.
    pub fn rounded_bytes(&self, grid: f64) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 16 + 8);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for c in &self.data {
            let re = (c.re / grid).round() as i64;
            let im = (c.im / grid).round() as i64;
            out.extend_from_slice(&re.to_le_bytes());
            out.extend_from_slice(&im.to_le_bytes());
        }
        out
    }
}

/// A pure state vector over some number of qubits (dimension a power of two;
/// dimension 1 for zero qubits).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amps(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(QmathError::NotPowerOfTwo(amps.len()));
        }
        if amps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(QmathError::NonFinite);
        }
        Ok(StateVector { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amp(&self, i: usize) -> Complex64 {
        self.amps[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                out.push(a * b);
            }
        }
        StateVector { amps: out }
    }
}

/// Parses a basis label into a unit state vector.
///
/// Single-qubit letters are `0 1 + - i` and `-i` (a minus directly followed
/// by `i` binds as the \u{2212}i state). Multi-letter labels tensor left to
/// right. `PhiPlus` names the Bell state.
pub fn ket(label: &str) -> Result<StateVector> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    if label == "PhiPlus" {
        return StateVector::from_amps(vec![c(s2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s2, 0.0)]);
    }
    let mut out: Option<StateVector> = None;
    let mut chars = label.chars().peekable();
    if label.is_empty() {
        return Err(QmathError::UnknownKetLabel(label.to_string()));
    }
    while let Some(ch) = chars.next() {
        let single = match ch {
            '0' => vec![c(1.0, 0.0), c(0.0, 0.0)],
            '1' => vec![c(0.0, 0.0), c(1.0, 0.0)],
            '+' => vec![c(s2, 0.0), c(s2, 0.0)],
            '-' => {
                if chars.peek() == Some(&'i') {
                    chars.next();
                    vec![c(s2, 0.0), c(0.0, -s2)]
                } else {
                    vec![c(s2, 0.0), c(-s2, 0.0)]
                }
            }
            'i' => vec![c(s2, 0.0), c(0.0, s2)],
            _ => return Err(QmathError::UnknownKetLabel(label.to_string())),
        };
        let sv = StateVector { amps: single };
        out = Some(match out {
            None => sv,
            Some(prev) => prev.tensor(&sv),
        });
    }
    Ok(out.unwrap())
}

/// A partial density operator over `n_qubits` (dimension `2^n`; `n = 0`
/// gives a 1x1 scalar). Trace in `[0, 1]` up to tolerance; sub-unit traces
/// represent probability-weighted states.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    n_qubits: usize,
    mat: CMatrix,
}

impl DensityOperator {
    pub fn from_matrix(mat: CMatrix) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(QmathError::NotSquare(mat.rows(), mat.cols()));
        }
        if !mat.rows().is_power_of_two() {
            return Err(QmathError::NotPowerOfTwo(mat.rows()));
        }
        if !mat.is_finite() {
            return Err(QmathError::NonFinite);
        }
        let op = DensityOperator { n_qubits: mat.rows().trailing_zeros() as usize, mat };
        op.debug_validate();
        Ok(op)
    }

    /// One-dimensional operator holding a bare probability weight.
    pub fn scalar(p: f64) -> Self {
        let mut m = CMatrix::zeros(1, 1);
        m.set(0, 0, Complex64::new(p, 0.0));
        DensityOperator { n_qubits: 0, mat: m }
    }

    pub fn zero(n_qubits: usize) -> Self {
        DensityOperator { n_qubits, mat: CMatrix::zeros(1 << n_qubits, 1 << n_qubits) }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        DensityOperator { n_qubits, mat: CMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn scale(&self, p: f64) -> DensityOperator {
        DensityOperator { n_qubits: self.n_qubits, mat: self.mat.scale(p) }
    }

    pub fn add(&self, other: &DensityOperator) -> DensityOperator {
        assert_eq!(self.n_qubits, other.n_qubits);
        DensityOperator { n_qubits: self.n_qubits, mat: self.mat.add(&other.mat) }
    }

    /// Hermiticity, positivity and trace bound checks; only active in debug
    /// and test builds.
    pub fn debug_validate(&self) {
        #[cfg(debug_assertions)]
        {
            debug_assert!(self.mat.is_hermitian(1e-7), "density operator not Hermitian");
            debug_assert!(self.mat.is_psd(1e-7), "density operator not PSD");
            debug_assert!(self.trace() <= 1.0 + 1e-7, "density operator trace above one");
        }
    }
}

/// `|psi><psi|` as a (partial, if `psi` is not normalized) density operator.
pub fn outer(psi: &StateVector) -> DensityOperator {
    let dim = psi.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, psi.amp(i) * psi.amp(j).conj());
        }
    }
    DensityOperator { n_qubits: psi.n_qubits(), mat: m }
}

/// Kronecker product of two density operators; qubit counts add.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    DensityOperator { n_qubits: a.n_qubits + b.n_qubits, mat: a.mat.kron(&b.mat) }
}

/// Entrywise comparison with tolerance `eps`.
pub fn approx_eq(a: &DensityOperator, b: &DensityOperator, eps: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(QmathError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(a.mat.max_abs_diff(&b.mat) <= eps)
}

/// A trace non-increasing superoperator in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    arity: usize,
    kraus: Vec<CMatrix>,
    trace_preserving: bool,
}

impl Superoperator {
    pub fn new(kraus: Vec<CMatrix>, eps: f64) -> Result<Self> {
        assert!(!kraus.is_empty(), "empty Kraus decomposition");
        let dim = kraus[0].rows();
        if !dim.is_power_of_two() {
            return Err(QmathError::NotPowerOfTwo(dim));
        }
        for k in &kraus {
            if k.rows() != k.cols() {
                return Err(QmathError::NotSquare(k.rows(), k.cols()));
            }
            if k.rows() != dim {
                return Err(QmathError::DimensionMismatch(k.rows(), dim));
            }
            if !k.is_finite() {
                return Err(QmathError::NonFinite);
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for k in &kraus {
            sum = sum.add(&k.dagger().mul(k));
        }
        let id = CMatrix::identity(dim);
        if !sum.dominated_by(&id, eps) {
            return Err(QmathError::TraceIncreasing(sum.sub(&id).max_abs()));
        }
        let trace_preserving = sum.approx_eq(&id, eps);
        Ok(Superoperator { arity: dim.trailing_zeros() as usize, kraus, trace_preserving })
    }

    /// Single-Kraus superoperator from a unitary (or any contraction).
    pub fn from_unitary(u: CMatrix, eps: f64) -> Result<Self> {
        Self::new(vec![u], eps)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }
}

/// `E(rho) = sum_i E_i rho E_i^dagger`.
pub fn apply(e: &Superoperator, rho: &DensityOperator) -> Result<DensityOperator> {
    if e.arity != rho.n_qubits {
        return Err(QmathError::ArityMismatch { expected: rho.n_qubits, got: e.arity });
    }
    let dim = rho.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for k in &e.kraus {
        out = out.add(&k.mul(&rho.mat).mul(&k.dagger()));
    }
    if !out.is_finite() {
        return Err(QmathError::NonFinite);
    }
    Ok(DensityOperator { n_qubits: rho.n_qubits, mat: out })
}

/// The permutation unitary sending qubit `order[j]` of the input to
/// position `j` of the output.
fn qubit_permutation(total: usize, order: &[usize]) -> CMatrix {
    let dim = 1usize << total;
    let mut p = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut b2 = 0usize;
        for (j, &src) in order.iter().enumerate() {
            let bit = (b >> (total - 1 - src)) & 1;
            b2 |= bit << (total - 1 - j);
        }
        p.set(b2, b, Complex64::new(1.0, 0.0));
    }
    p
}

/// Extends `e` to act on `total` qubits, touching only the wires listed in
/// `positions`. Built by conjugating with a SWAP network: permute the target
/// qubits to the front, tensor with the identity on the rest, permute back.
pub fn pad(e: &Superoperator, positions: &[usize], total: usize) -> Result<Superoperator> {
    if positions.len() != e.arity {
        return Err(QmathError::ArityMismatch { expected: e.arity, got: positions.len() });
    }
    let mut seen = vec![false; total];
    for &p in positions {
        if p >= total {
            return Err(QmathError::IndexOutOfRange(p, total));
        }
        if seen[p] {
            return Err(QmathError::DuplicateIndex(p));
        }
        seen[p] = true;
    }
    let mut order: Vec<usize> = positions.to_vec();
    for q in 0..total {
        if !seen[q] {
            order.push(q);
        }
    }
    let perm = qubit_permutation(total, &order);
    let perm_dag = perm.dagger();
    let rest = CMatrix::identity(1 << (total - e.arity));
    let kraus = e
        .kraus
        .iter()
        .map(|k| perm_dag.mul(&k.kron(&rest)).mul(&perm))
        .collect();
    Ok(Superoperator { arity: total, kraus, trace_preserving: e.trace_preserving })
}

/// Which qubits `partial_trace` removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceMode {
    Keep,
    Drop,
}

/// Traces out a subset of qubits, returning the reduced operator on the
/// remaining ones (a scalar when everything is traced out).
pub fn partial_trace(
    rho: &DensityOperator,
    indices: &[usize],
    mode: TraceMode,
) -> Result<DensityOperator> {
    let n = rho.n_qubits;
    let mut drop = vec![false; n];
    for &q in indices {
        if q >= n {
            return Err(QmathError::IndexOutOfRange(q, n));
        }
        drop[q] = match mode {
            TraceMode::Drop => true,
            TraceMode::Keep => false,
        };
    }
    if mode == TraceMode::Keep {
        for q in 0..n {
            if !indices.contains(&q) {
                drop[q] = true;
            }
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&q| !drop[q]).collect();
    let kdim = 1usize << kept.len();
    let full = rho.dim();
    let mut out = CMatrix::zeros(kdim, kdim);
    for r in 0..full {
        for c in 0..full {
            // row and column must agree on every dropped qubit
            let mut ok = true;
            for q in 0..n {
                if drop[q] && ((r >> (n - 1 - q)) & 1) != ((c >> (n - 1 - q)) & 1) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut kr = 0usize;
            let mut kc = 0usize;
            for (j, &q) in kept.iter().enumerate() {
                kr |= ((r >> (n - 1 - q)) & 1) << (kept.len() - 1 - j);
                kc |= ((c >> (n - 1 - q)) & 1) << (kept.len() - 1 - j);
            }
            let v = out.get(kr, kc) + rho.mat.get(r, c);
            out.set(kr, kc, v);
        }
    }
    Ok(DensityOperator { n_qubits: kept.len(), mat: out })
}

/// A quantum measurement `{M_m}` satisfying the completeness equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    arity: usize,
    outcomes: Vec<CMatrix>,
}

impl Measurement {
    pub fn new(outcomes: Vec<CMatrix>, eps: f64) -> Result<Self> {
        assert!(!outcomes.is_empty(), "measurement without outcomes");
        let dim = outcomes[0].rows();
        if !dim.is_power_of_two() {
            return Err(QmathError::NotPowerOfTwo(dim));
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for m in &outcomes {
            if m.rows() != m.cols() {
                return Err(QmathError::NotSquare(m.rows(), m.cols()));
            }
            if m.rows() != dim {
                return Err(QmathError::DimensionMismatch(m.rows(), dim));
            }
            sum = sum.add(&m.dagger().mul(m));
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(dim));
        if dev > eps {
            return Err(QmathError::IncompleteMeasurement(dev));
        }
        Ok(Measurement { arity: dim.trailing_zeros() as usize, outcomes })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome_matrix(&self, m: usize) -> CMatrix {
        self.outcomes[m].clone()
    }

    /// The trace non-increasing superoperator `sigma -> M_m sigma M_m^dagger`
    /// of a single outcome, padded onto `total` qubits at `positions`.
    pub fn outcome_superop(&self, m: usize, positions: &[usize], total: usize) -> Result<Superoperator> {
        let single = Superoperator {
            arity: self.arity,
            kraus: vec![self.outcomes[m].clone()],
            trace_preserving: false,
        };
        pad(&single, positions, total)
    }
}

/// One measurement branch: classical outcome, its weight and the normalized
/// post-measurement state.
#[derive(Clone, Debug)]
pub struct MeasureBranch {
    pub outcome: usize,
    pub weight: f64,
    pub post: DensityOperator,
}

/// Applies `m` to the qubits of `rho` listed in `positions`. Branches with
/// weight at most `eps` are omitted; the remaining weights sum to `tr(rho)`.
pub fn measure(
    m: &Measurement,
    rho: &DensityOperator,
    positions: &[usize],
    eps: f64,
) -> Result<Vec<MeasureBranch>> {
    if positions.len() != m.arity {
        return Err(QmathError::ArityMismatch { expected: m.arity, got: positions.len() });
    }
    let mut out = Vec::new();
    for idx in 0..m.outcomes.len() {
        let sop = m.outcome_superop(idx, positions, rho.n_qubits)?;
        let unnorm = apply(&sop, rho)?;
        let w = unnorm.trace();
        if w > eps {
            out.push(MeasureBranch { outcome: idx, weight: w, post: unnorm.scale(1.0 / w) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
