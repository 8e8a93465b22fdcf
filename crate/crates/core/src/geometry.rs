//! Separable bound `P_E` and the geometry of the separable probability set.
//!
//! For a product ket `|Psi>` the overlap `<Psi|O|Psi>` is maximized by
//! alternating over sites: with all other factors fixed the objective is a
//! Hermitian form in one site's ket, maximized by its top eigenvector.

use nalgebra::{SymmetricEigen, SVD};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{DenseOperator, Ket};
use crate::qudit::Dims;
use crate::{CMatrix, CVector, C64};

#[derive(Clone, Debug)]
pub struct OverlapOptions {
    pub restarts: usize,
    /// Stop once a sweep improves the value by less than this.
    pub tol: f64,
    pub max_sweeps: usize,
    pub prng_seed: u64,
}

impl Default for OverlapOptions {
    fn default() -> Self {
        Self { restarts: 64, tol: 1e-10, max_sweeps: 500, prng_seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct OverlapResult {
    pub value: f64,
    /// One ket per site.
    pub argmax: Vec<CVector>,
    pub restarts: usize,
    /// Sweeps of the winning restart.
    pub sweeps: usize,
    /// Whether the winning restart met the tolerance.
    pub converged: bool,
    /// Value of the Schmidt cross-check when it applied.
    pub schmidt: Option<f64>,
}

impl OverlapResult {
    pub fn product_ket(&self) -> Ket {
        Ket::product(&self.argmax).expect("site kets have prime lengths")
    }
}

/// Haar-random normalized ket from complex Gaussians.
pub fn random_site_ket(d: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    });
    let n = v.norm();
    v.unscale(n)
}

pub fn random_product_ket(dims: &Dims, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    dims.iter().map(|d| random_site_ket(d, rng)).collect()
}

fn expectation_on(op: &CMatrix, kets: &[CVector]) -> f64 {
    let psi = kets.iter().skip(1).fold(kets[0].clone(), |acc, k| acc.kronecker(k));
    psi.dotc(&(op * &psi)).re
}

/// `D x d_i` embedding whose column `a` is the product ket with `|a>` at `site`.
fn environment(dims: &Dims, kets: &[CVector], site: usize) -> CMatrix {
    let d = dims.get(site);
    let mut w = CMatrix::zeros(dims.total(), d);
    for a in 0..d {
        let mut col = CVector::from_element(1, C64::new(1.0, 0.0));
        for (j, k) in kets.iter().enumerate() {
            if j == site {
                let mut e = CVector::zeros(d);
                e[a] = C64::new(1.0, 0.0);
                col = col.kronecker(&e);
            } else {
                col = col.kronecker(k);
            }
        }
        w.set_column(a, &col);
    }
    w
}

fn top_eigenvector(h: CMatrix) -> (f64, CVector) {
    let h = (&h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let (i, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    (val, eig.eigenvectors.column(i).into_owned())
}

struct Run {
    value: f64,
    kets: Vec<CVector>,
    sweeps: usize,
    converged: bool,
}

fn alternate(op: &CMatrix, dims: &Dims, mut kets: Vec<CVector>, opts: &OverlapOptions) -> Run {
    let mut value = expectation_on(op, &kets);
    for sweep in 1..=opts.max_sweeps {
        for site in 0..dims.len() {
            let w = environment(dims, &kets, site);
            let local = w.adjoint() * op * &w;
            kets[site] = top_eigenvector(local).1;
        }
        let next = expectation_on(op, &kets);
        let gain = next - value;
        value = next;
        if gain.abs() < opts.tol {
            return Run { value, kets, sweeps: sweep, converged: true };
        }
    }
    Run { value, kets, sweeps: opts.max_sweeps, converged: false }
}

/// Largest `<Psi|seed|Psi>` over product kets.
pub fn max_overlap(seed: &DenseOperator, opts: &OverlapOptions) -> Result<OverlapResult> {
    seed.require_psd()?;
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let dims = seed.dims().clone();
    let op = seed.matrix();
    let runs: Vec<Run> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.prng_seed);
            rng.set_stream(r as u64);
            alternate(op, &dims, random_product_ket(&dims, &mut rng), opts)
        })
        .collect();
    // first maximum in restart order keeps the result scheduling-independent
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");
    let mut out = OverlapResult {
        value: best.value,
        argmax: best.kets,
        restarts: opts.restarts,
        sweeps: best.sweeps,
        converged: best.converged,
        schmidt: None,
    };
    if dims.len() == 2 {
        if let Some((value, kets)) = schmidt_overlap(seed) {
            out.schmidt = Some(value);
            if value > out.value {
                out.value = value;
                out.argmax = kets;
            }
        }
    }
    Ok(out)
}

/// For a rank-1 bipartite seed `lambda |psi><psi|`: `lambda` times the squared
/// largest Schmidt coefficient of `psi`, with its product ket.
pub fn schmidt_overlap(seed: &DenseOperator) -> Option<(f64, Vec<CVector>)> {
    let dims = seed.dims();
    if dims.len() != 2 {
        return None;
    }
    let eig = SymmetricEigen::new(seed.matrix().clone());
    let mut vals: Vec<(usize, f64)> = eig.eigenvalues.iter().copied().enumerate().collect();
    vals.sort_by(|a, b| b.1.total_cmp(&a.1));
    if vals.len() > 1 && vals[1].1.abs() > 1e-9 {
        return None;
    }
    let (i, lambda) = vals[0];
    let psi = eig.eigenvectors.column(i);
    let (d1, d2) = (dims.get(0), dims.get(1));
    let m = CMatrix::from_fn(d1, d2, |a, b| psi[a * d2 + b]);
    let svd = SVD::new(m, true, true);
    let (k, &s) = svd.singular_values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let u = svd.u?.column(k).into_owned();
    let v = svd.v_t?.row(k).transpose();
    Some((lambda * s * s, vec![u, v]))
}

/// `{p in simplex : p_k <= bound}` in `d_outcomes` dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparablePolytope {
    pub d_outcomes: usize,
    pub bound: f64,
}

impl SeparablePolytope {
    pub fn new(d_outcomes: usize, bound: f64) -> Result<Self> {
        if d_outcomes == 0 {
            return Err(Error::InvalidParameter("no outcomes".into()));
        }
        if !(0.0..=1.0).contains(&bound) {
            return Err(Error::InvalidParameter(format!("bound {bound} outside [0, 1]")));
        }
        if bound * (d_outcomes as f64) < 1.0 - 1e-12 {
            return Err(Error::InvalidParameter(format!("bound {bound} below 1/{d_outcomes} leaves the set empty")));
        }
        Ok(Self { d_outcomes, bound })
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.d_outcomes
            && p.iter().all(|&x| x >= -tol && x <= self.bound + tol)
            && (p.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// An extreme point `(bound, .., bound, 1 - m bound, 0, ..)` and the number of
/// extreme points (its distinct coordinate permutations).
pub fn extreme_point(bound: f64, d_outcomes: usize) -> Result<(Vec<f64>, u128)> {
    let poly = SeparablePolytope::new(d_outcomes, bound)?;
    if bound == 0.0 {
        return Err(Error::InvalidParameter("zero bound".into()));
    }
    let mut m = (1.0 / bound).floor() as usize;
    while (m + 1) as f64 * bound <= 1.0 + 1e-12 {
        m += 1;
    }
    while m > 0 && m as f64 * bound > 1.0 + 1e-12 {
        m -= 1;
    }
    let m = m.min(poly.d_outcomes);
    let rest = 1.0 - m as f64 * bound;
    let mut point = vec![0.0; d_outcomes];
    point[..m].iter_mut().for_each(|x| *x = bound);
    let count = if rest.abs() <= 1e-12 {
        binomial(d_outcomes, m)
    } else {
        point[m] = rest;
        binomial(d_outcomes, m) * (d_outcomes - m) as u128
    };
    Ok((point, count))
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if let Some(x) = p.iter().find(|&&x| x < -1e-9 || !x.is_finite()) {
        return Err(Error::NotInSimplex(format!("entry {x}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::NotInSimplex(format!("sum {s}")));
    }
    Ok(())
}

/// Euclidean projection onto the polytope.
pub fn project(p: &[f64], poly: &SeparablePolytope) -> Result<Vec<f64>> {
    if p.len() != poly.d_outcomes {
        return Err(Error::DimensionMismatch(format!("{} probabilities for {} outcomes", p.len(), poly.d_outcomes)));
    }
    let u = poly.bound;
    let clip = |tau: f64| -> Vec<f64> { p.iter().map(|&x| (x - tau).clamp(0.0, u)).collect() };
    let mass = |tau: f64| -> f64 { clip(tau).iter().sum() };
    let lo_start = p.iter().copied().fold(f64::INFINITY, f64::min) - u;
    let hi_start = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (lo_start, hi_start);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut tau = 0.5 * (lo + hi);
    // exact threshold on the active set
    let (mut free_sum, mut free, mut capped) = (0.0, 0usize, 0usize);
    for &x in p {
        let s = x - tau;
        if s >= u {
            capped += 1;
        } else if s > 0.0 {
            free_sum += x;
            free += 1;
        }
    }
    if free > 0 {
        let exact = (free_sum + capped as f64 * u - 1.0) / free as f64;
        if (mass(exact) - 1.0).abs() <= (mass(tau) - 1.0).abs() {
            tau = exact;
        }
    }
    Ok(clip(tau))
}

/// Distance from `p` to the polytope, with the nearest point.
pub fn violation_distance(p: &[f64], poly: &SeparablePolytope) -> Result<(f64, Vec<f64>)> {
    check_simplex(p)?;
    if poly.contains(p, 1e-12) {
        return Ok((0.0, p.to_vec()));
    }
    let s = project(p, poly)?;
    let eps = p.iter().zip(&s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((eps, s))
}

/// `(sum sqrt(p_k), -sum p_k ln p_k)`.
pub fn uncertainty(p: &[f64]) -> (f64, f64) {
    let u = p.iter().map(|&x| x.max(0.0).sqrt()).sum();
    let h = -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
    (u, h)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyTest {
    pub u: f64,
    pub h: f64,
    pub u_min: f64,
    pub h_min: f64,
    /// Either measure falls below its value at an extreme point.
    pub violated: bool,
}

/// Compares `u(p), h(p)` with their minima over the separable set.
pub fn uncertainty_test(p: &[f64], poly: &SeparablePolytope) -> Result<UncertaintyTest> {
    check_simplex(p)?;
    let (e, _) = extreme_point(poly.bound, poly.d_outcomes)?;
    let (u_min, h_min) = uncertainty(&e);
    let (u, h) = uncertainty(p);
    Ok(UncertaintyTest { u, h, u_min, h_min, violated: u < u_min - 1e-12 || h < h_min - 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn bell_projector(d: usize) -> DenseOperator {
        let dims = Dims::uniform(d, 2).unwrap();
        let amps = CVector::from_fn(d * d, |i, _| C64::new(if i / d == i % d { 1.0 } else { 0.0 }, 0.0));
        Ket::normalized(dims, amps).unwrap().projector()
    }

    #[test]
    fn bell_overlap() {
        for d in [2, 3] {
            let r = max_overlap(&bell_projector(d), &OverlapOptions { restarts: 8, ..Default::default() }).unwrap();
            assert!((r.value - 1.0 / d as f64).abs() < 1e-9);
            let at = r.product_ket().projector();
            let v = crate::operator::expectation(&at, &bell_projector(d)).unwrap();
            assert!((v - r.value).abs() < 1e-8);
        }
    }

    #[test]
    fn schmidt_matches_alternation_on_random_kets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (d1, d2) in [(2, 2), (2, 3), (3, 3), (3, 2)] {
            let dims = Dims::new(vec![d1, d2]).unwrap();
            let psi = random_site_ket(d1 * d2, &mut rng);
            let seed = Ket::new(dims, psi).unwrap().projector();
            let (s, kets) = schmidt_overlap(&seed).unwrap();
            let direct = max_overlap(&seed, &OverlapOptions { restarts: 16, ..Default::default() }).unwrap();
            assert!((s - direct.value).abs() < 1e-9);
            let at = Ket::product(&kets).unwrap().projector();
            assert!((crate::operator::expectation(&at, &seed).unwrap() - s).abs() < 1e-9);
        }
    }

    #[test]
    fn overlap_rejects_non_psd() {
        let dims = Dims::qubits(2);
        let m = -bell_projector(2).into_matrix();
        let op = DenseOperator::new(dims, m).unwrap();
        assert!(matches!(max_overlap(&op, &OverlapOptions::default()), Err(Error::NotPositive(_))));
    }

    #[test]
    fn overlap_is_deterministic() {
        let seed = bell_projector(3);
        let opts = OverlapOptions { restarts: 4, prng_seed: 17, ..Default::default() };
        let a = max_overlap(&seed, &opts).unwrap();
        let b = max_overlap(&seed, &opts).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(a.argmax, b.argmax);
    }

    #[test]
    fn extreme_point_examples() {
        let (p, n) = extreme_point(0.5, 4).unwrap();
        assert_eq!(p, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(n, 6);
        let (p, n) = extreme_point(1.0 / 3.0, 9).unwrap();
        assert_eq!(n, 84);
        assert!(p[..3].iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15) && p[3..].iter().all(|&x| x == 0.0));
        let (p, n) = extreme_point(1.0, 5).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(n, 5);
        // m bound < 1: (0.4, 0.4, 0.2, 0) and 4!/(2! 1!) = 12 permutations
        let (p, n) = extreme_point(0.4, 4).unwrap();
        assert!((p[2] - 0.2).abs() < 1e-15);
        assert_eq!(n, 12);
        assert!(extreme_point(1.5, 4).is_err());
        assert!(extreme_point(-0.1, 4).is_err());
    }

    #[test]
    fn violation_distance_examples() {
        let poly = SeparablePolytope::new(4, 0.5).unwrap();
        assert_eq!(violation_distance(&[0.5, 0.5, 0.0, 0.0], &poly).unwrap().0, 0.0);
        let (eps, s) = violation_distance(&[1.0, 0.0, 0.0, 0.0], &poly).unwrap();
        assert!((eps - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        for (a, b) in s.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        for bound in [0.25, 0.3, 0.5, 1.0] {
            let poly = SeparablePolytope::new(4, bound).unwrap();
            assert_eq!(violation_distance(&[0.25; 4], &poly).unwrap().0, 0.0);
        }
        assert!(violation_distance(&[0.5, 0.6, 0.0, 0.0], &poly).is_err());
        assert!(violation_distance(&[1.1, -0.1, 0.0, 0.0], &poly).is_err());
    }

    #[test]
    fn projection_beats_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let poly = SeparablePolytope::new(4, 0.5).unwrap();
        let p = [0.7, 0.2, 0.1, 0.0];
        let (eps, s) = violation_distance(&p, &poly).unwrap();
        assert!(poly.contains(&s, 1e-9));
        for _ in 0..2000 {
            let mut q: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let t: f64 = q.iter().sum();
            q.iter_mut().for_each(|x| *x /= t);
            if poly.contains(&q, 0.0) {
                let d = p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                assert!(eps <= d + 1e-12);
            }
        }
    }

    #[test]
    fn uncertainty_examples() {
        let (u, h) = uncertainty(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!((u, h), (1.0, 0.0));
        let (u, h) = uncertainty(&[0.25; 4]);
        assert!((u - 2.0).abs() < 1e-15 && (h - 4f64.ln()).abs() < 1e-15);
        let (u, h) = uncertainty(&[0.5, 0.5, 0.0, 0.0]);
        assert!((u - 2f64.sqrt()).abs() < 1e-15 && (h - 2f64.ln()).abs() < 1e-15);

        let poly = SeparablePolytope::new(4, 0.5).unwrap();
        assert!(uncertainty_test(&[1.0, 0.0, 0.0, 0.0], &poly).unwrap().violated);
        assert!(!uncertainty_test(&[0.25; 4], &poly).unwrap().violated);
    }
}
