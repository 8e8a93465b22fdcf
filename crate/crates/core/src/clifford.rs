//! Local Clifford unitaries and the superoperators they induce on
//! product-Pauli coefficient vectors.
//!
//! A Clifford unitary `U` maps every basis element to a phase times another
//! basis element, so `O -> U O U^dagger` acts on coefficient vectors as a
//! permutation with phases. Columns of the superoperator are sources and rows
//! are images.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operator::{decompose_in, CoeffVector, DenseOperator};
use crate::pauli::{fourier_matrix, phase_matrix, product_pauli_matrix, snap_root, PauliOrder};
use crate::qudit::{is_prime, Dims};
use crate::{CMatrix, C64, MATRIX_TOL};

/// A named single-qudit unitary, usually a word over `{F, V}`.
#[derive(Clone, Debug)]
pub struct CliffordGen {
    d: usize,
    name: String,
    matrix: CMatrix,
}

impl CliffordGen {
    pub fn identity(d: usize) -> Result<Self> {
        clifford_matrix(d, "")
    }

    pub fn fourier(d: usize) -> Result<Self> {
        clifford_matrix(d, "F")
    }

    pub fn phase(d: usize) -> Result<Self> {
        clifford_matrix(d, "V")
    }

    /// Wraps an arbitrary unitary, e.g. an extra generator for `d > 3`.
    pub fn from_matrix(name: &str, matrix: CMatrix) -> Result<Self> {
        let d = matrix.nrows();
        if !is_prime(d) {
            return Err(Error::NotPrime(d));
        }
        if matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!("{}x{} generator", d, matrix.ncols())));
        }
        let err = unitarity_error(&matrix);
        if err > MATRIX_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { d, name: name.to_string(), matrix })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `self * other` (apply `other` first).
    pub fn then_after(&self, other: &CliffordGen) -> CliffordGen {
        CliffordGen { d: self.d, name: format!("{}{}", self.name, other.name), matrix: &self.matrix * &other.matrix }
    }
}

pub(crate) fn unitarity_error(m: &CMatrix) -> f64 {
    let d = m.nrows();
    (m * m.adjoint() - CMatrix::identity(d, d)).iter().map(|e| e.norm()).fold(0.0, f64::max)
}

/// Product of `F`/`V` matrices in word order: `"VF"` is `V F`. `I` letters
/// are ignored and the empty word is the identity.
pub fn clifford_matrix(d: usize, word: &str) -> Result<CliffordGen> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let (f, v) = (fourier_matrix(d), phase_matrix(d));
    let mut m = CMatrix::identity(d, d);
    for ch in word.chars() {
        match ch {
            'F' => m *= &f,
            'V' => m *= &v,
            'I' => {}
            other => return Err(Error::InvalidParameter(format!("unknown Clifford letter '{other}'"))),
        }
    }
    let name = if word.is_empty() { "I".to_string() } else { word.to_string() };
    Ok(CliffordGen { d, name, matrix: m })
}

/// Phased permutation on coefficient vectors: source index `i` is sent to
/// `perm[i]` with factor `phase[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjMatrix {
    order: Arc<PauliOrder>,
    perm: Vec<usize>,
    phase: Vec<C64>,
}

impl ConjMatrix {
    pub fn identity(order: Arc<PauliOrder>) -> Self {
        let n = order.len();
        Self { order, perm: (0..n).collect(), phase: vec![C64::new(1.0, 0.0); n] }
    }

    /// Reads a dense matrix that must be a phased permutation.
    pub fn from_dense(order: Arc<PauliOrder>, m: &CMatrix) -> Result<Self> {
        let n = order.len();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!("{}x{} superoperator for {n} labels", m.nrows(), m.ncols())));
        }
        let mut perm = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for col in 0..n {
            let (row, val) = single_entry(m.column(col).iter().copied())?;
            perm.push(row);
            phase.push(val);
        }
        let out = Self { order, perm, phase };
        out.check_permutation()?;
        Ok(out)
    }

    fn check_permutation(&self) -> Result<()> {
        let mut seen = vec![false; self.perm.len()];
        for &p in &self.perm {
            if std::mem::replace(&mut seen[p], true) {
                return Err(Error::NotClifford);
            }
        }
        Ok(())
    }

    pub fn order(&self) -> &Arc<PauliOrder> {
        &self.order
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[C64] {
        &self.phase
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
            && self.phase.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < MATRIX_TOL)
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.perm.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, (&p, &z)) in self.perm.iter().zip(&self.phase).enumerate() {
            m[(p, i)] = z;
        }
        m
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &ConjMatrix) -> Result<ConjMatrix> {
        if self.order != other.order {
            return Err(Error::DimensionMismatch("superoperators on different orders".into()));
        }
        let perm = other.perm.iter().map(|&p| self.perm[p]).collect();
        let n = phase_period(&self.order);
        let phase = other.perm.iter().zip(&other.phase).map(|(&p, &z)| snap_root(n, z * self.phase[p])).collect();
        Ok(ConjMatrix { order: self.order.clone(), perm, phase })
    }

    pub fn pow(&self, k: usize) -> ConjMatrix {
        (0..k).fold(ConjMatrix::identity(self.order.clone()), |acc, _| acc.compose(self).expect("same order"))
    }

    pub fn apply(&self, v: &CoeffVector) -> Result<CoeffVector> {
        if v.order() != &self.order {
            return Err(Error::DimensionMismatch(format!(
                "superoperator on {} applied to coefficients on {}",
                self.order.dims(),
                v.dims()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.perm.len()];
        self.apply_into(v.coeffs(), &mut out);
        CoeffVector::new(self.order.clone(), out)
    }

    /// Raw application on slices with matching length.
    pub fn apply_into(&self, src: &[C64], dst: &mut [C64]) {
        for ((&p, &z), &c) in self.perm.iter().zip(&self.phase).zip(src) {
            dst[p] = z * c;
        }
    }
}

/// Order of the roots of unity that can appear as phases on `order`.
fn phase_period(order: &PauliOrder) -> usize {
    let mut primes: Vec<usize> = (0..order.site_count()).map(|i| order.site_dim(i)).collect();
    primes.sort_unstable();
    primes.dedup();
    4 * primes.iter().filter(|&&p| p != 2).product::<usize>()
}

fn single_entry(col: impl Iterator<Item = C64>) -> Result<(usize, C64)> {
    let mut found = None;
    for (r, z) in col.enumerate() {
        if z.norm() > 1e-9 {
            if found.is_some() || (z.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::NotClifford);
            }
            found = Some((r, z));
        }
    }
    found.ok_or(Error::NotClifford)
}

/// Superoperator of a single-site generator, computed by dense conjugation
/// and decomposition.
pub fn conj_superop(g: &CliffordGen) -> Result<ConjMatrix> {
    let dims = Dims::new(vec![g.d])?;
    conj_superop_dense(Arc::new(PauliOrder::canonical(&dims)), g.matrix())
}

/// Superoperator of any unitary on the composite space.
pub fn conj_superop_dense(order: Arc<PauliOrder>, u: &CMatrix) -> Result<ConjMatrix> {
    let dims = order.dims().clone();
    if u.nrows() != dims.total() || u.ncols() != dims.total() {
        return Err(Error::DimensionMismatch(format!("{}x{} unitary on {}", u.nrows(), u.ncols(), dims)));
    }
    let err = unitarity_error(u);
    if err > MATRIX_TOL {
        return Err(Error::NotUnitary(err));
    }
    let period = phase_period(&order);
    let mut perm = Vec::with_capacity(order.len());
    let mut phase = Vec::with_capacity(order.len());
    for label in order.labels() {
        let lm = product_pauli_matrix(&label, &dims)?;
        let image = DenseOperator::new(dims.clone(), u * lm * u.adjoint())?;
        let coeffs = decompose_in(order.clone(), &image)?;
        let (row, z) = single_entry(coeffs.coeffs().iter().copied())?;
        perm.push(row);
        phase.push(snap_root(period, z));
    }
    let out = ConjMatrix { order, perm, phase };
    out.check_permutation()?;
    Ok(out)
}

/// Tensor product of single-site superoperators, one per subsystem.
pub fn product_superop(order: Arc<PauliOrder>, sites: &[&ConjMatrix]) -> Result<ConjMatrix> {
    if sites.len() != order.site_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} site superoperators for {} subsystems",
            sites.len(),
            order.site_count()
        )));
    }
    for (i, s) in sites.iter().enumerate() {
        if s.order.site_count() != 1 || s.order.site_dim(0) != order.site_dim(i) {
            return Err(Error::DimensionMismatch(format!("superoperator at site {i} has wrong local dimension")));
        }
    }
    let n = order.len();
    let period = phase_period(&order);
    let mut perm = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for flat in 0..n {
        let idx = order.split(flat);
        let mut z = C64::new(1.0, 0.0);
        let target: Vec<usize> = idx
            .iter()
            .zip(sites)
            .map(|(&k, s)| {
                z *= s.phase[k];
                s.perm[k]
            })
            .collect();
        perm.push(order.join(&target));
        phase.push(snap_root(period, z));
    }
    Ok(ConjMatrix { order, perm, phase })
}

/// Tensor product of single-site unitaries.
pub fn tensor_unitary(gens: &[&CliffordGen]) -> CMatrix {
    gens.iter().fold(CMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, g| acc.kronecker(g.matrix()))
}
