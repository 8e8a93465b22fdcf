//! Prime-field arithmetic and mixed-radix indexing of N-tuples.
//!
//! Tuples are flattened with the first subsystem most significant, so the
//! computational basis `|j_1 ... j_N>` sits at row `((j_1 d_2 + j_2) d_3 + ...)`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Ordered local dimensions `(d_1, ..., d_N)` of a composite system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims {
    dims: Vec<usize>,
    total: usize,
}

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidParameter("at least one subsystem is required".into()));
        }
        if let Some(&d) = dims.iter().find(|&&d| !is_prime(d)) {
            return Err(Error::NotPrime(d));
        }
        let total = dims.iter().product();
        Ok(Self { dims, total })
    }

    /// `n` copies of the prime `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn qubits(n: usize) -> Self {
        Self::uniform(2, n).expect("2 is prime")
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Composite dimension `D = prod d_i`.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn get(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.dims
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.dims.iter().copied()
    }

    pub fn zero(&self) -> Tuple {
        Tuple(vec![0; self.len()])
    }

    /// Mixed-radix flattening, first subsystem most significant.
    pub fn flat_index(&self, t: &Tuple) -> Result<usize> {
        self.check(t)?;
        Ok(self.flat_unchecked(&t.0))
    }

    pub(crate) fn flat_unchecked(&self, entries: &[usize]) -> usize {
        entries.iter().zip(&self.dims).fold(0, |acc, (&j, &d)| acc * d + j)
    }

    pub fn unflatten(&self, index: usize) -> Result<Tuple> {
        if index >= self.total {
            return Err(Error::OutOfRange { index, size: self.total });
        }
        Ok(Tuple(self.digits(index)))
    }

    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    /// All tuples in flat-index order.
    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        (0..self.total).map(|i| Tuple(self.digits(i)))
    }

    pub fn check(&self, t: &Tuple) -> Result<()> {
        if t.0.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} subsystems",
                t.0.len(),
                self.len()
            )));
        }
        for (&j, &d) in t.0.iter().zip(&self.dims) {
            if j >= d {
                return Err(Error::OutOfRange { index: j, size: d });
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.dims
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// An element of `Z_{d_1} x ... x Z_{d_N}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tuple(pub(crate) Vec<usize>);

impl Tuple {
    pub fn new(entries: Vec<usize>, dims: &Dims) -> Result<Self> {
        let t = Tuple(entries);
        dims.check(&t)?;
        Ok(t)
    }

    /// Reduces arbitrary integers into range site by site.
    pub fn reduced(entries: &[i64], dims: &Dims) -> Result<Self> {
        if entries.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "tuple of length {} for {} subsystems",
                entries.len(),
                dims.len()
            )));
        }
        Ok(Tuple(
            entries
                .iter()
                .zip(dims.iter())
                .map(|(&e, d)| e.rem_euclid(d as i64) as usize)
                .collect(),
        ))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

/// Componentwise addition modulo each `d_i`.
pub fn tuple_add(a: &Tuple, b: &Tuple, dims: &Dims) -> Result<Tuple> {
    dims.check(a)?;
    dims.check(b)?;
    Ok(Tuple(
        a.0.iter()
            .zip(&b.0)
            .zip(dims.iter())
            .map(|((&x, &y), d)| (x + y) % d)
            .collect(),
    ))
}

pub fn tuple_neg(a: &Tuple, dims: &Dims) -> Result<Tuple> {
    dims.check(a)?;
    Ok(Tuple(a.0.iter().zip(dims.iter()).map(|(&x, d)| (d - x) % d).collect()))
}

pub fn tuple_sub(a: &Tuple, b: &Tuple, dims: &Dims) -> Result<Tuple> {
    tuple_add(a, &tuple_neg(b, dims)?, dims)
}
