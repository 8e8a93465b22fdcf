//! Generalized Pauli (Heisenberg-Weyl) operators.
//!
//! For a prime `d` the shift `X|j> = |j+1>` and clock `Z|j> = w^j |j>` with
//! `w = exp(2 pi i / d)` give `d^2` operators `X^x Z^z` that are orthogonal
//! under the Hilbert-Schmidt inner product. For `d = 2` the label `(1,1)` is
//! taken to be the Hermitian `Y = i X Z` rather than `XZ`, so every qubit
//! basis element is Hermitian and Clifford conjugations act on coefficient
//! vectors as signed permutations.
//!
//! The canonical single-site ordering lists the identity first, then the
//! commuting sets generated by `X, XZ, ..., XZ^{d-1}` and finally `Z`, each set
//! as the powers `k = 1..d-1` of its generator with phases dropped. Composite
//! orders are the lexicographic product, first site most significant.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::qudit::{is_prime, Dims, Tuple};
use crate::{CMatrix, CVector, C64, MATRIX_TOL};

/// `exp(2 pi i k / n)` from an exact integer exponent.
pub fn root_of_unity(n: usize, k: i64) -> C64 {
    let k = k.rem_euclid(n as i64);
    // reduce so that equal roots are bit-identical
    let g = gcd(k as usize, n) as i64;
    let (k, n_i) = (k / g, n as i64 / g);
    let n = n_i as usize;
    if k == 0 {
        return C64::new(1.0, 0.0);
    }
    // exact values on the real and imaginary axes
    if 4 * k == n_i {
        return C64::new(0.0, 1.0);
    }
    if 2 * k == n_i {
        return C64::new(-1.0, 0.0);
    }
    if 4 * k == 3 * n_i {
        return C64::new(0.0, -1.0);
    }
    C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Replaces `z` by the nearest `n`-th root of unity when within `1e-9`.
pub fn snap_root(n: usize, z: C64) -> C64 {
    let k = (z.arg() * n as f64 / (2.0 * PI)).round() as i64;
    let r = root_of_unity(n, k);
    if (r - z).norm() < 1e-9 {
        r
    } else {
        z
    }
}

/// `w_d^k`.
pub fn omega(d: usize, k: i64) -> C64 {
    root_of_unity(d, k)
}

/// Phase carried by the basis element at `(x, z)` relative to `X^x Z^z`.
pub(crate) fn basis_phase(d: usize, x: usize, z: usize) -> C64 {
    if d == 2 && x == 1 && z == 1 {
        C64::new(0.0, 1.0)
    } else {
        C64::new(1.0, 0.0)
    }
}

/// A product-Pauli label `(x, z)` with one exponent pair per subsystem.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliLabel {
    pub x: Tuple,
    pub z: Tuple,
}

impl PauliLabel {
    pub fn new(x: Tuple, z: Tuple, dims: &Dims) -> Result<Self> {
        dims.check(&x)?;
        dims.check(&z)?;
        Ok(Self { x, z })
    }

    /// Builds a label from per-site `(x, z)` pairs.
    pub fn from_sites(sites: &[(usize, usize)], dims: &Dims) -> Result<Self> {
        let x = Tuple::new(sites.iter().map(|s| s.0).collect(), dims)?;
        let z = Tuple::new(sites.iter().map(|s| s.1).collect(), dims)?;
        Ok(Self { x, z })
    }

    /// Parses a qubit label such as `"XIZ"` or `"YY"`.
    pub fn qubits(s: &str) -> Result<Self> {
        let sites: Vec<(usize, usize)> = s
            .chars()
            .map(|c| match c {
                'I' => Ok((0, 0)),
                'X' => Ok((1, 0)),
                'Y' => Ok((1, 1)),
                'Z' => Ok((0, 1)),
                other => Err(Error::InvalidParameter(format!("unknown qubit Pauli '{other}'"))),
            })
            .collect::<Result<_>>()?;
        Self::from_sites(&sites, &Dims::qubits(sites.len()))
    }

    pub fn identity(dims: &Dims) -> Self {
        Self { x: dims.zero(), z: dims.zero() }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn site(&self, i: usize) -> (usize, usize) {
        (self.x.0[i], self.z.0[i])
    }

    pub fn sites(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.x.0.iter().copied().zip(self.z.0.iter().copied())
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.sites().filter(|&s| s != (0, 0)).count()
    }

    pub fn name(&self, dims: &Dims) -> String {
        let parts: Vec<String> = self
            .sites()
            .zip(dims.iter())
            .map(|((x, z), d)| site_name(d, x, z))
            .collect();
        if dims.iter().all(|d| d == 2) {
            parts.concat()
        } else {
            parts.join(".")
        }
    }
}

fn site_name(d: usize, x: usize, z: usize) -> String {
    if d == 2 {
        return ["I", "Z", "X", "Y"][2 * x + z].to_string();
    }
    let power = |sym: &str, e: usize| match e {
        0 => String::new(),
        1 => sym.to_string(),
        e => format!("{sym}{e}"),
    };
    let s = format!("{}{}", power("X", x), power("Z", z));
    if s.is_empty() {
        "I".into()
    } else {
        s
    }
}

/// The shift operator `X` on `C^d`.
pub fn shift_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// The clock operator `Z` on `C^d`.
pub fn clock_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == c { omega(d, r as i64) } else { C64::new(0.0, 0.0) })
}

/// The raw Weyl operator `X^x Z^z` (no Hermitian correction for qubits).
pub fn weyl_matrix(d: usize, x: usize, z: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r == (c + x) % d {
            omega(d, (z * c) as i64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// The basis element at label `(x, z)`: `X^x Z^z`, or `Y` for `d = 2, (1,1)`.
pub fn pauli_matrix(d: usize, x: usize, z: usize) -> Result<CMatrix> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    if x >= d || z >= d {
        return Err(Error::OutOfRange { index: x.max(z), size: d });
    }
    Ok(weyl_matrix(d, x, z) * basis_phase(d, x, z))
}

/// Dense matrix of a product-Pauli basis element.
pub fn product_pauli_matrix(label: &PauliLabel, dims: &Dims) -> Result<CMatrix> {
    if label.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "label on {} sites for {} subsystems",
            label.len(),
            dims.len()
        )));
    }
    let mut out = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for ((x, z), d) in label.sites().zip(dims.iter()) {
        out = out.kronecker(&pauli_matrix(d, x, z)?);
    }
    Ok(out)
}

/// Monomial form of a basis element: `L|k> = phase[k] |perm[k]>`.
#[derive(Clone, Debug)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub phase: Vec<C64>,
}

impl Monomial {
    pub fn of(label: &PauliLabel, dims: &Dims) -> Self {
        let total = dims.total();
        let mut perm = Vec::with_capacity(total);
        let mut phase = Vec::with_capacity(total);
        for k in 0..total {
            let digits = dims.digits(k);
            let mut target = Vec::with_capacity(dims.len());
            let mut ph = C64::new(1.0, 0.0);
            for (i, (&j, d)) in digits.iter().zip(dims.iter()).enumerate() {
                let (x, z) = label.site(i);
                target.push((j + x) % d);
                ph *= omega(d, (z * j) as i64) * basis_phase(d, x, z);
            }
            perm.push(dims.flat_unchecked(&target));
            phase.push(ph);
        }
        Self { perm, phase }
    }
}

/// `x z' = x' z (mod d)`.
pub fn commutes(d: usize, a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 * b.1) % d == (b.0 * a.1) % d
}

/// `S^(x,z) = {(kx, kz) : k = 1..d-1}`, the nontrivial powers of `X^x Z^z`.
pub fn commuting_set(d: usize, x: usize, z: usize) -> Result<Vec<(usize, usize)>> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    if (x % d, z % d) == (0, 0) {
        return Err(Error::IdentityLabel);
    }
    Ok((1..d).map(|k| ((k * x) % d, (k * z) % d)).collect())
}

/// Canonical single-site label order.
pub fn single_site_order(d: usize) -> Vec<(usize, usize)> {
    let mut labels = vec![(0, 0)];
    for t in 0..d {
        labels.extend((1..d).map(|k| (k, (k * t) % d)));
    }
    labels.extend((1..d).map(|k| (0, k)));
    labels
}

/// Commuting-set index of a nonidentity single-site label: `t` for the set
/// generated by `X Z^t`, `d` for powers of `Z`.
pub fn commuting_set_index(d: usize, x: usize, z: usize) -> Option<usize> {
    match (x % d, z % d) {
        (0, 0) => None,
        (0, _) => Some(d),
        (x, z) => {
            // z = x t  =>  t = z x^{-1}
            let inv = (1..d).find(|&k| (k * x) % d == 1).expect("prime field");
            Some((z * inv) % d)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct SiteTable {
    d: usize,
    labels: Vec<(usize, usize)>,
    // x * d + z -> position
    position: Vec<usize>,
}

impl SiteTable {
    fn new(d: usize) -> Self {
        let labels = single_site_order(d);
        let mut position = vec![0; d * d];
        for (i, &(x, z)) in labels.iter().enumerate() {
            position[x * d + z] = i;
        }
        Self { d, labels, position }
    }
}

/// Bijection between product-Pauli labels and `[0, D^2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliOrder {
    dims: Dims,
    sites: Vec<SiteTable>,
}

/// Canonical ordering used throughout (file tag `"paper-v1"`).
pub fn canonical_order(dims: &Dims) -> PauliOrder {
    PauliOrder::canonical(dims)
}

impl PauliOrder {
    pub const TAG: &'static str = "paper-v1";

    pub fn canonical(dims: &Dims) -> Self {
        Self { dims: dims.clone(), sites: dims.iter().map(SiteTable::new).collect() }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    /// `D^2`.
    pub fn len(&self) -> usize {
        self.dims.total() * self.dims.total()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn site_count(&self) -> usize {
        self.sites.len()
    }

    pub fn site_dim(&self, site: usize) -> usize {
        self.sites[site].d
    }

    pub fn site_index(&self, site: usize, x: usize, z: usize) -> usize {
        let t = &self.sites[site];
        t.position[x * t.d + z]
    }

    pub fn site_label(&self, site: usize, index: usize) -> (usize, usize) {
        self.sites[site].labels[index]
    }

    /// Flat index to per-site indices.
    pub fn split(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites.len()];
        for (slot, t) in out.iter_mut().zip(&self.sites).rev() {
            let r = t.d * t.d;
            *slot = flat % r;
            flat /= r;
        }
        out
    }

    pub fn join(&self, site_indices: &[usize]) -> usize {
        site_indices
            .iter()
            .zip(&self.sites)
            .fold(0, |acc, (&i, t)| acc * t.d * t.d + i)
    }

    pub fn index_of(&self, label: &PauliLabel) -> Result<usize> {
        self.dims.check(&label.x)?;
        self.dims.check(&label.z)?;
        let idx: Vec<usize> = label.sites().enumerate().map(|(i, (x, z))| self.site_index(i, x, z)).collect();
        Ok(self.join(&idx))
    }

    pub fn label(&self, flat: usize) -> Result<PauliLabel> {
        if flat >= self.len() {
            return Err(Error::OutOfRange { index: flat, size: self.len() });
        }
        let sites: Vec<(usize, usize)> =
            self.split(flat).iter().enumerate().map(|(i, &k)| self.site_label(i, k)).collect();
        PauliLabel::from_sites(&sites, &self.dims)
    }

    pub fn labels(&self) -> impl Iterator<Item = PauliLabel> + '_ {
        (0..self.len()).map(|i| self.label(i).expect("in range"))
    }
}

/// Phase picked up by `target` under conjugation by `conjugator`:
/// `L' L L'^dagger = prod_i w_{d_i}^{x_i z'_i - x'_i z_i} L`, primes on the conjugator.
pub fn conj_phase(dims: &Dims, conjugator: &PauliLabel, target: &PauliLabel) -> Result<C64> {
    for l in [conjugator, target] {
        dims.check(&l.x)?;
        dims.check(&l.z)?;
    }
    Ok(conjugator
        .sites()
        .zip(target.sites())
        .zip(dims.iter())
        .map(|(((cx, cz), (tx, tz)), d)| omega(d, (tx * cz) as i64 - (cx * tz) as i64))
        .product())
}

/// Discrete Fourier transform `F = d^{-1/2} sum w^{j j'} |j'><j|`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |r, c| omega(d, (r * c) as i64) * s)
}

/// Diagonal phase gate `V`: `w^{j(j-1)/2}` for odd `d`, `w^{j/2}` for `d = 2`.
pub fn phase_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| {
        if r != c {
            C64::new(0.0, 0.0)
        } else if d == 2 {
            root_of_unity(4, r as i64)
        } else {
            omega(d, (r * r.saturating_sub(1) / 2) as i64)
        }
    })
}

/// The `d + 1` mutually unbiased bases of a prime-dimensional qudit.
///
/// Basis `t < d` is `V^t F` applied to the standard basis and diagonalizes
/// the commuting set generated by `X Z^t`; basis `d` is the standard basis.
/// Within each basis the ket with eigenvalue `w^k` of the defining operator
/// sits at position `k`.
#[derive(Clone, Debug)]
pub struct MubFamily {
    pub d: usize,
    pub bases: Vec<Vec<CVector>>,
}

impl MubFamily {
    pub fn basis(&self, t: usize) -> &[CVector] {
        &self.bases[t]
    }

    /// Basis element whose eigenbasis is basis `t`.
    pub fn defining_operator(&self, t: usize) -> CMatrix {
        defining_operator(self.d, t)
    }
}

fn defining_operator(d: usize, t: usize) -> CMatrix {
    if t == d {
        weyl_matrix(d, 0, 1)
    } else {
        weyl_matrix(d, 1, t) * basis_phase(d, 1, t)
    }
}

pub fn mub_family(d: usize) -> Result<MubFamily> {
    if !is_prime(d) {
        return Err(Error::NotPrime(d));
    }
    let f = fourier_matrix(d);
    let v = phase_matrix(d);
    let mut bases = Vec::with_capacity(d + 1);
    let mut u = f.clone();
    for t in 0..=d {
        let kets: Vec<CVector> = if t == d {
            (0..d).map(|j| CVector::from_fn(d, |r, _| C64::new(if r == j { 1.0 } else { 0.0 }, 0.0))).collect()
        } else {
            (0..d).map(|j| u.column(j).into_owned()).collect()
        };
        bases.push(order_by_eigenvalue(d, &defining_operator(d, t), kets)?);
        u = &v * &u;
    }
    Ok(MubFamily { d, bases })
}

fn order_by_eigenvalue(d: usize, op: &CMatrix, kets: Vec<CVector>) -> Result<Vec<CVector>> {
    let mut slots: Vec<Option<CVector>> = vec![None; d];
    for ket in kets {
        let image = op * &ket;
        let lambda = ket.dotc(&image);
        let k = (0..d)
            .find(|&k| (omega(d, k as i64) - lambda).norm() < 1e-8)
            .ok_or_else(|| Error::Unsupported(format!("eigenvalue {lambda} is not a power of w_{d}")))?;
        if (image - ket.scale(1.0) * lambda).norm() > MATRIX_TOL || slots[k].is_some() {
            return Err(Error::Unsupported("generated ket is not a nondegenerate eigenvector".into()));
        }
        slots[k] = Some(ket);
    }
    Ok(slots.into_iter().map(|s| s.expect("d distinct eigenvalues")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        a.shape() == b.shape() && (a - b).iter().all(|e| e.norm() < MATRIX_TOL)
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn matrix_examples() {
        let x = pauli_matrix(2, 1, 0).unwrap();
        assert!(close(&x, &CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])));
        let z3 = pauli_matrix(3, 0, 1).unwrap();
        let w = omega(3, 1);
        assert!(close(&z3, &CMatrix::from_diagonal(&CVector::from_vec(vec![c(1., 0.), w, w * w]))));
        let y = pauli_matrix(2, 1, 1).unwrap();
        assert!(close(&y, &CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])));
        assert!(matches!(pauli_matrix(4, 1, 0), Err(Error::NotPrime(4))));
    }

    #[test]
    fn commutation_examples() {
        assert!(!commutes(2, (1, 0), (0, 1)));
        assert!(commutes(3, (1, 1), (2, 2)));
        for d in [2, 3, 5] {
            for x in 0..d {
                for z in 0..d {
                    assert!(commutes(d, (x, z), (0, 0)));
                }
            }
        }
    }

    #[test]
    fn commutes_matches_dense_matrices() {
        for d in [2, 3, 5] {
            for a in single_site_order(d) {
                for b in single_site_order(d) {
                    let ma = pauli_matrix(d, a.0, a.1).unwrap();
                    let mb = pauli_matrix(d, b.0, b.1).unwrap();
                    assert_eq!(close(&(&ma * &mb), &(&mb * &ma)), commutes(d, a, b));
                }
            }
        }
    }

    #[test]
    fn commuting_set_examples() {
        assert_eq!(commuting_set(3, 1, 1).unwrap(), vec![(1, 1), (2, 2)]);
        assert_eq!(commuting_set(2, 1, 0).unwrap(), vec![(1, 0)]);
        // k = 1..4 of (1,2) modulo 5
        let expected: Vec<(usize, usize)> = (1..5).map(|k| (k % 5, (2 * k) % 5)).collect();
        assert_eq!(expected, vec![(1, 2), (2, 4), (3, 1), (4, 3)]);
        assert_eq!(commuting_set(5, 1, 2).unwrap(), expected);
        assert!(matches!(commuting_set(3, 0, 0), Err(Error::IdentityLabel)));
        // rescaling the generator gives the same set
        for d in [3, 5, 7] {
            for (x, z) in single_site_order(d).into_iter().skip(1) {
                let mut base = commuting_set(d, x, z).unwrap();
                base.sort();
                for l in 1..d {
                    let mut other = commuting_set(d, (l * x) % d, (l * z) % d).unwrap();
                    other.sort();
                    assert_eq!(base, other);
                }
            }
        }
    }

    #[test]
    fn canonical_order_examples() {
        let names = |d: usize| -> Vec<String> {
            single_site_order(d).into_iter().map(|(x, z)| site_name(d, x, z)).collect()
        };
        assert_eq!(names(2), ["I", "X", "Y", "Z"]);
        assert_eq!(names(3), ["I", "X", "X2", "XZ", "X2Z2", "XZ2", "X2Z", "Z", "Z2"]);
        let order = canonical_order(&Dims::qubits(2));
        assert_eq!(order.index_of(&PauliLabel::qubits("XZ").unwrap()).unwrap(), 7);
        assert_eq!(order.index_of(&PauliLabel::qubits("II").unwrap()).unwrap(), 0);
        for i in 0..order.len() {
            assert_eq!(order.index_of(&order.label(i).unwrap()).unwrap(), i);
        }
    }

    #[test]
    fn conj_phase_examples() {
        let d2 = Dims::qubits(1);
        let id = PauliLabel::identity(&d2);
        let x = PauliLabel::qubits("X").unwrap();
        let z = PauliLabel::qubits("Z").unwrap();
        assert_eq!(conj_phase(&d2, &id, &x).unwrap(), c(1., 0.));
        assert!((conj_phase(&d2, &z, &x).unwrap() - c(-1., 0.)).norm() < 1e-15);

        // dense oracle for every pair of labels at d = 3 and d = 5
        for d in [2, 3, 5] {
            let dims = Dims::new(vec![d]).unwrap();
            for a in single_site_order(d) {
                for b in single_site_order(d) {
                    let ma = pauli_matrix(d, a.0, a.1).unwrap();
                    let mb = pauli_matrix(d, b.0, b.1).unwrap();
                    let conj = &ma * &mb * ma.adjoint();
                    let la = PauliLabel::from_sites(&[a], &dims).unwrap();
                    let lb = PauliLabel::from_sites(&[b], &dims).unwrap();
                    let phase = conj_phase(&dims, &la, &lb).unwrap();
                    assert!(close(&conj, &(mb * phase)));
                }
            }
        }
        let d3 = Dims::new(vec![3]).unwrap();
        let x3 = PauliLabel::from_sites(&[(1, 0)], &d3).unwrap();
        let z3 = PauliLabel::from_sites(&[(0, 1)], &d3).unwrap();
        assert!((conj_phase(&d3, &x3, &z3).unwrap() - omega(3, -1)).norm() < 1e-15);
    }

    #[test]
    fn weyl_relation() {
        for d in [2, 3, 5] {
            for x in 0..d {
                for z in 0..d {
                    let zx = weyl_matrix(d, 0, z) * weyl_matrix(d, x, 0);
                    let xz = weyl_matrix(d, x, z) * omega(d, (x * z) as i64);
                    assert!(close(&zx, &xz));
                }
            }
        }
    }

    #[test]
    fn hilbert_schmidt_orthogonality() {
        for v in [vec![2], vec![3], vec![2, 2], vec![2, 3], vec![3, 2], vec![5]] {
            let dims = Dims::new(v).unwrap();
            let order = canonical_order(&dims);
            let mats: Vec<CMatrix> = order.labels().map(|l| product_pauli_matrix(&l, &dims).unwrap()).collect();
            for (i, a) in mats.iter().enumerate() {
                for (j, b) in mats.iter().enumerate() {
                    let ip = (a.adjoint() * b).trace();
                    let expected = if i == j { dims.total() as f64 } else { 0.0 };
                    assert!((ip - c(expected, 0.)).norm() < MATRIX_TOL);
                }
            }
        }
    }

    #[test]
    fn commuting_sets_partition_labels() {
        for d in [2, 3, 5, 7] {
            let mut seen = vec![false; d * d];
            seen[0] = true;
            let gens: Vec<(usize, usize)> = (0..d).map(|t| (1, t)).chain([(0, 1)]).collect();
            for (t, &(x, z)) in gens.iter().enumerate() {
                let set = commuting_set(d, x, z).unwrap();
                for &(a, b) in &set {
                    assert!(!seen[a * d + b], "sets overlap");
                    seen[a * d + b] = true;
                    assert_eq!(commuting_set_index(d, a, b), Some(t));
                }
                for other in single_site_order(d).into_iter().skip(1) {
                    if !set.contains(&other) {
                        assert!(set.iter().any(|&s| !commutes(d, s, other)));
                    }
                }
            }
            assert!(seen.into_iter().all(|s| s));
        }
    }

    #[test]
    fn periods() {
        for d in [2, 3, 5] {
            let id = CMatrix::identity(d, d);
            for (x, z) in single_site_order(d).into_iter().skip(1) {
                let m = weyl_matrix(d, x, z);
                let mut p = CMatrix::identity(d, d);
                for _ in 0..d {
                    p = &p * &m;
                }
                let sign = if d == 2 && x * z % 2 == 1 { -1.0 } else { 1.0 };
                assert!(close(&p, &(&id * c(sign, 0.))));
            }
            let mut xd = CMatrix::identity(d, d);
            for _ in 0..d {
                xd *= shift_matrix(d);
            }
            assert!(close(&xd, &id));
        }
    }

    #[test]
    fn mub_examples() {
        let f2 = mub_family(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((f2.basis(0)[0].clone() - CVector::from_vec(vec![c(s, 0.), c(s, 0.)])).norm() < 1e-12);
        assert!((f2.basis(0)[1].clone() - CVector::from_vec(vec![c(s, 0.), c(-s, 0.)])).norm() < 1e-12);
        for d in [2, 3, 5, 7] {
            let fam = mub_family(d).unwrap();
            assert_eq!(fam.bases.len(), d + 1);
            for (t, basis) in fam.bases.iter().enumerate() {
                for (i, a) in basis.iter().enumerate() {
                    for (j, b) in basis.iter().enumerate() {
                        let ip = a.dotc(b).norm();
                        assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
                    }
                }
                for other in &fam.bases[t + 1..] {
                    for a in basis {
                        for b in other {
                            assert!((a.dotc(b).norm_sqr() - 1.0 / d as f64).abs() < 1e-10);
                        }
                    }
                }
            }
        }
        // eigen-check against pauli_matrix at d = 3
        let fam = mub_family(3).unwrap();
        for t in 0..3 {
            let op = pauli_matrix(3, 1, t).unwrap();
            for (k, ket) in fam.basis(t).iter().enumerate() {
                assert!((&op * ket - ket * omega(3, k as i64)).norm() < 1e-10);
            }
        }
        assert!(mub_family(9).is_err());
    }
}
