//! Dense operators and kets on the composite space, and their expansion in
//! the product-Pauli basis.
//!
//! An operator `O` is stored either densely or as its coefficient vector
//! `o_{x,z}` with `O = sum o_{x,z} L^(x,z)`. Since `tr(L'^dagger L) = D delta`,
//! the coefficients are `o = tr(L^dagger O) / D`.

use std::path::Path;
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{basis_phase, omega, Monomial, PauliLabel, PauliOrder};
use crate::qudit::{tuple_sub, Dims, Tuple};
use crate::{CMatrix, CVector, C64, MATRIX_TOL, PSD_TOL};

/// A vector in the composite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    dims: Dims,
    amps: CVector,
}

impl Ket {
    pub fn new(dims: Dims, amps: CVector) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                dims.total()
            )));
        }
        Ok(Self { dims, amps })
    }

    /// Scales to unit norm.
    pub fn normalized(dims: Dims, amps: CVector) -> Result<Self> {
        let n = amps.norm();
        if n < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(dims, amps.unscale(n))
    }

    /// Computational basis ket `|j>`.
    pub fn basis(dims: &Dims, j: &Tuple) -> Result<Self> {
        let idx = dims.flat_index(j)?;
        let mut amps = CVector::zeros(dims.total());
        amps[idx] = C64::new(1.0, 0.0);
        Self::new(dims.clone(), amps)
    }

    /// Tensor product of single-site kets.
    pub fn product(sites: &[CVector]) -> Result<Self> {
        let dims = Dims::new(sites.iter().map(|s| s.len()).collect())?;
        let mut amps = CVector::from_element(1, C64::new(1.0, 0.0));
        for s in sites {
            amps = amps.kronecker(s);
        }
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < MATRIX_TOL
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|self><self|`.
    pub fn projector(&self) -> DenseOperator {
        DenseOperator { dims: self.dims.clone(), m: &self.amps * self.amps.adjoint() }
    }

    pub fn apply(&self, op: &CMatrix) -> Ket {
        Ket { dims: self.dims.clone(), amps: op * &self.amps }
    }
}

/// A `D x D` complex matrix tied to its subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dims: Dims,
    m: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl DenseOperator {
    pub fn new(dims: Dims, m: CMatrix) -> Result<Self> {
        let d = dims.total();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { dims, m })
    }

    pub fn identity(dims: &Dims) -> Self {
        let d = dims.total();
        Self { dims: dims.clone(), m: CMatrix::identity(d, d) }
    }

    pub fn maximally_mixed(dims: &Dims) -> Self {
        let d = dims.total();
        Self { dims: dims.clone(), m: CMatrix::identity(d, d).unscale(d as f64) }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dims: self.dims.clone(), m: self.m.scale(s) }
    }

    /// `U O U^dagger`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        Self::new(self.dims.clone(), u * &self.m * u.adjoint())
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.m.nrows();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.m[(r, c)] - self.m[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn require_hermitian(&self) -> Result<()> {
        let e = self.hermiticity_error();
        if e >= MATRIX_TOL {
            return Err(Error::NotHermitian(e));
        }
        Ok(())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn require_psd(&self) -> Result<()> {
        self.require_hermitian()?;
        let m = self.min_eigenvalue();
        if m < -PSD_TOL {
            return Err(Error::NotPositive(m));
        }
        Ok(())
    }

    /// Hermitian, unit trace, positive semidefinite.
    pub fn require_state(&self) -> Result<()> {
        self.require_psd()?;
        let t = self.trace();
        if (t - C64::new(1.0, 0.0)).norm() > MATRIX_TOL {
            return Err(Error::InvalidState(format!("trace {t} differs from 1")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: OperatorFile = serde_json::from_str(text)?;
        let dims = Dims::new(f.dims)?;
        let d = dims.total();
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&f.re) || !rows_ok(&f.im) {
            return Err(Error::Format(format!("expected {d}x{d} re and im arrays")));
        }
        let m = CMatrix::from_fn(d, d, |r, c| C64::new(f.re[r][c], f.im[r][c]));
        Self::new(dims, m)
    }

    pub fn to_json(&self) -> String {
        let d = self.m.nrows();
        let rows = |f: &dyn Fn(C64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|r| (0..d).map(|c| f(self.m[(r, c)])).collect()).collect()
        };
        let file = OperatorFile { dims: self.dims.as_slice().to_vec(), re: rows(&|z| z.re), im: rows(&|z| z.im) };
        serde_json::to_string(&file).expect("plain numbers serialize")
    }

    /// Reads a density matrix and validates it as a state.
    pub fn load_state(path: &Path) -> Result<Self> {
        let op = Self::from_json(&std::fs::read_to_string(path)?)?;
        op.require_state()?;
        Ok(op)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Coefficients of an operator in the product-Pauli basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector {
    order: Arc<PauliOrder>,
    coeffs: Vec<C64>,
}

impl CoeffVector {
    pub fn new(order: Arc<PauliOrder>, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != order.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} basis elements",
                coeffs.len(),
                order.len()
            )));
        }
        Ok(Self { order, coeffs })
    }

    pub fn zeros(order: Arc<PauliOrder>) -> Self {
        let n = order.len();
        Self { order, coeffs: vec![C64::new(0.0, 0.0); n] }
    }

    /// Builds from `(label, coefficient)` pairs; repeated labels accumulate.
    pub fn from_terms(order: Arc<PauliOrder>, terms: &[(PauliLabel, C64)]) -> Result<Self> {
        let mut v = Self::zeros(order);
        for (l, c) in terms {
            let i = v.order.index_of(l)?;
            v.coeffs[i] += *c;
        }
        Ok(v)
    }

    pub fn order(&self) -> &Arc<PauliOrder> {
        &self.order
    }

    pub fn dims(&self) -> &Dims {
        self.order.dims()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn get(&self, label: &PauliLabel) -> Result<C64> {
        Ok(self.coeffs[self.order.index_of(label)?])
    }

    /// Indices of coefficients with modulus above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| self.coeffs[i].norm() > tol).collect()
    }

    pub fn support_labels(&self, tol: f64) -> Vec<PauliLabel> {
        self.support(tol).into_iter().map(|i| self.order.label(i).expect("in range")).collect()
    }

    pub fn max_distance(&self, other: &CoeffVector) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn same_order(&self, other: &CoeffVector) -> Result<()> {
        if self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "coefficient orders differ: {} vs {}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// `D sum conj(r) o` with `self = r`.
    pub fn hs_inner(&self, other: &CoeffVector) -> Result<C64> {
        self.same_order(other)?;
        let s: C64 = self.coeffs.iter().zip(&other.coeffs).map(|(r, o)| r.conj() * o).sum();
        Ok(s * self.dims().total() as f64)
    }
}

fn check_same_dims(a: &Dims, b: &Dims) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

/// `tr(A^dagger B)`.
pub fn hs_inner(a: &DenseOperator, b: &DenseOperator) -> Result<C64> {
    check_same_dims(&a.dims, &b.dims)?;
    Ok(a.m.iter().zip(b.m.iter()).map(|(x, y)| x.conj() * y).sum())
}

pub fn decompose(op: &DenseOperator) -> CoeffVector {
    decompose_in(Arc::new(PauliOrder::canonical(&op.dims)), op).expect("order built from the same dims")
}

/// Expansion with respect to a prebuilt order.
pub fn decompose_in(order: Arc<PauliOrder>, op: &DenseOperator) -> Result<CoeffVector> {
    check_same_dims(order.dims(), &op.dims)?;
    let dims = op.dims.clone();
    let scale = 1.0 / dims.total() as f64;
    let coeffs = order
        .labels()
        .map(|l| {
            let mono = Monomial::of(&l, &dims);
            let s: C64 = (0..dims.total()).map(|k| mono.phase[k].conj() * op.m[(mono.perm[k], k)]).sum();
            s * scale
        })
        .collect();
    CoeffVector::new(order, coeffs)
}

pub fn reconstruct(v: &CoeffVector) -> DenseOperator {
    let dims = v.dims().clone();
    let total = dims.total();
    let mut m = CMatrix::zeros(total, total);
    for (i, c) in v.coeffs.iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let mono = Monomial::of(&v.order.label(i).expect("in range"), &dims);
        for k in 0..total {
            m[(mono.perm[k], k)] += c * mono.phase[k];
        }
    }
    DenseOperator { dims, m }
}

/// Analytic expansion of `|j><k|`: `(1/D) prod_i w^{-z_i k_i}` on labels `(j - k, z)`.
pub fn ketbra_coeffs(order: Arc<PauliOrder>, j: &Tuple, k: &Tuple) -> Result<CoeffVector> {
    let dims = order.dims().clone();
    let x = tuple_sub(j, k, &dims)?;
    let mut v = CoeffVector::zeros(order);
    let scale = 1.0 / dims.total() as f64;
    for z in dims.tuples() {
        let mut c = C64::new(scale, 0.0);
        for (i, d) in dims.iter().enumerate() {
            // basis element carries an extra phase for the qubit Y label
            c *= omega(d, -((z.0[i] * k.0[i]) as i64)) / basis_phase(d, x.0[i], z.0[i]);
        }
        let label = PauliLabel { x: x.clone(), z };
        let idx = v.order.index_of(&label)?;
        v.coeffs[idx] = c;
    }
    Ok(v)
}

/// Transposes the tensor factors at the listed sites.
pub fn partial_transpose(rho: &DenseOperator, sites: &[usize]) -> Result<DenseOperator> {
    let dims = &rho.dims;
    if let Some(&s) = sites.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::OutOfRange { index: s, size: dims.len() });
    }
    let total = dims.total();
    let mut out = CMatrix::zeros(total, total);
    for r in 0..total {
        let rd = dims.digits(r);
        for c in 0..total {
            let cd = dims.digits(c);
            let (mut nr, mut nc) = (rd.clone(), cd.clone());
            for &s in sites {
                nr[s] = cd[s];
                nc[s] = rd[s];
            }
            out[(dims.flat_unchecked(&nr), dims.flat_unchecked(&nc))] = rho.m[(r, c)];
        }
    }
    DenseOperator::new(dims.clone(), out)
}

/// `tr(rho O)` for Hermitian `O`.
pub fn expectation(rho: &DenseOperator, op: &DenseOperator) -> Result<f64> {
    check_same_dims(&rho.dims, &op.dims)?;
    op.require_hermitian()?;
    let v: C64 = rho.m.iter().zip(op.m.transpose().iter()).map(|(a, b)| a * b).sum();
    Ok(v.re)
}
