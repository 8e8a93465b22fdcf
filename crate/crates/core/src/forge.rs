//! Orbit closure of a seed operator under local Clifford conjugations.
//!
//! The forge repeatedly applies every tensor product of per-site
//! superoperators to the newest members of the set until no new coefficient
//! vector appears. Members are compared by their coefficients rounded to nine
//! decimals; a guard rejects any set in which rounding could have merged or
//! split members.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::clifford::{clifford_matrix, conj_superop, product_superop, ConjMatrix};
use crate::error::{Error, Result};
use crate::operator::{decompose_in, reconstruct, CoeffVector, DenseOperator};
use crate::pauli::PauliOrder;
use crate::qudit::Dims;
use crate::C64;

/// Tolerance of the violation and sanity tests.
pub const VERDICT_TOL: f64 = 1e-9;
/// Minimal separation of distinct rounded coefficient values.
pub const KEY_GAP: f64 = 1e-6;
const KEY_SCALE: f64 = 1e9;

/// The pair of inequalities `0 <= <O> <= upper_bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition {
    pub coeffs: CoeffVector,
    pub upper_bound: f64,
}

impl Condition {
    pub fn lower_bound(&self) -> f64 {
        0.0
    }

    pub fn operator(&self) -> DenseOperator {
        reconstruct(&self.coeffs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated,
    SanityFail,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub verdict: Verdict,
}

/// Generators available at one site, the identity included.
#[derive(Clone, Debug)]
pub struct SiteGenerators {
    pub names: Vec<String>,
    pub maps: Vec<ConjMatrix>,
}

impl SiteGenerators {
    /// `{I, F, V}` on a `d`-level site.
    pub fn standard(d: usize) -> Result<Self> {
        let mut names = Vec::new();
        let mut maps = Vec::new();
        for w in ["I", "F", "V"] {
            names.push(w.to_string());
            maps.push(conj_superop(&clifford_matrix(d, w)?)?);
        }
        Ok(Self { names, maps })
    }

    fn identity_position(&self) -> Option<usize> {
        self.maps.iter().position(|m| m.is_identity())
    }
}

pub fn standard_generators(dims: &Dims) -> Result<Vec<SiteGenerators>> {
    dims.iter().map(SiteGenerators::standard).collect()
}

#[derive(Clone, Debug)]
pub struct ForgeOptions {
    pub max_rounds: usize,
}

impl Default for ForgeOptions {
    fn default() -> Self {
        Self { max_rounds: 64 }
    }
}

/// Deduplicated orbit sharing one upper bound.
#[derive(Clone, Debug)]
pub struct ConditionSet {
    pub dims: Dims,
    pub seed: String,
    pub bound: f64,
    pub generators: String,
    pub conditions: Vec<Condition>,
    /// Number of breadth-first rounds that produced new members.
    pub rounds: usize,
}

impl ConditionSet {
    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn order(&self) -> &Arc<PauliOrder> {
        self.conditions[0].coeffs.order()
    }

    /// Support sizes present among the members.
    pub fn support_sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.conditions.iter().map(|c| c.coeffs.support(1e-9).len()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// "Clifford orbit" for qubits and qutrits, "<F,V>-orbit" beyond.
    pub fn orbit_kind(&self) -> &'static str {
        if self.dims.iter().all(|d| d <= 3) {
            "Clifford orbit"
        } else {
            "<F,V>-orbit"
        }
    }
}

type Key = Vec<(i64, i64)>;

fn key_of(c: &[C64]) -> Key {
    c.iter().map(|z| ((z.re * KEY_SCALE).round() as i64, (z.im * KEY_SCALE).round() as i64)).collect()
}

fn check_hermitian_seed(seed: &CoeffVector) -> Result<()> {
    reconstruct(seed).require_hermitian()
}

/// All nontrivial tensor products of the per-site generators.
pub fn generator_products(order: &Arc<PauliOrder>, gens: &[SiteGenerators]) -> Result<Vec<ConjMatrix>> {
    if gens.len() != order.site_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} generator sets for {} subsystems",
            gens.len(),
            order.site_count()
        )));
    }
    for (i, g) in gens.iter().enumerate() {
        if g.identity_position().is_none() {
            return Err(Error::InvalidParameter(format!("generator set at site {i} lacks the identity")));
        }
    }
    let mut out = Vec::new();
    let counts: Vec<usize> = gens.iter().map(|g| g.maps.len()).collect();
    let total: usize = counts.iter().product();
    for mut code in 0..total {
        let mut pick = vec![0; gens.len()];
        for (slot, &n) in pick.iter_mut().zip(&counts).rev() {
            *slot = code % n;
            code /= n;
        }
        let sites: Vec<&ConjMatrix> = pick.iter().zip(gens).map(|(&k, g)| &g.maps[k]).collect();
        if sites.iter().all(|m| m.is_identity()) {
            continue;
        }
        out.push(product_superop(order.clone(), &sites)?);
    }
    Ok(out)
}

fn describe(gens: &[SiteGenerators]) -> String {
    gens.iter().map(|g| format!("{{{}}}", g.names.join(","))).collect::<Vec<_>>().join("x")
}

/// Breadth-first closure of `seed` under the per-site generator sets.
pub fn forge(
    seed: &CoeffVector,
    seed_name: &str,
    gens: &[SiteGenerators],
    bound: f64,
    opts: &ForgeOptions,
) -> Result<ConditionSet> {
    check_hermitian_seed(seed)?;
    let order = seed.order().clone();
    let products = generator_products(&order, gens)?;

    let mut seen: HashSet<Key> = HashSet::new();
    let mut members: Vec<Vec<C64>> = Vec::new();
    seen.insert(key_of(seed.coeffs()));
    members.push(seed.coeffs().to_vec());
    let mut frontier = vec![0usize];
    let mut rounds = 0;
    while !frontier.is_empty() {
        if rounds == opts.max_rounds {
            return Err(Error::NonClosure(opts.max_rounds));
        }
        let images: Vec<(Key, Vec<C64>)> = frontier
            .par_iter()
            .flat_map_iter(|&m| {
                let src = &members[m];
                products.iter().map(move |g| {
                    let mut dst = vec![C64::new(0.0, 0.0); src.len()];
                    g.apply_into(src, &mut dst);
                    (key_of(&dst), dst)
                })
            })
            .collect();
        let mut next = Vec::new();
        for (k, v) in images {
            if seen.insert(k) {
                next.push(members.len());
                members.push(v);
            }
        }
        if !next.is_empty() {
            rounds += 1;
        }
        frontier = next;
    }

    guard_rounding(&members)?;
    let mut keyed: Vec<(Key, Vec<C64>)> = members.into_iter().map(|v| (key_of(&v), v)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let conditions = keyed
        .into_iter()
        .map(|(_, v)| {
            Ok(Condition { coeffs: CoeffVector::new(order.clone(), v)?, upper_bound: bound })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionSet {
        dims: order.dims().clone(),
        seed: seed_name.to_string(),
        bound,
        generators: describe(gens),
        conditions,
        rounds,
    })
}

/// Rejects sets in which distinct rounded values lie closer than
/// [`KEY_GAP`], or where a coefficient is not within `1e-9` of its key.
fn guard_rounding(members: &[Vec<C64>]) -> Result<()> {
    let mut values: Vec<i64> = Vec::new();
    for v in members {
        for z in v {
            for x in [z.re, z.im] {
                let k = (x * KEY_SCALE).round();
                let off = (x - k / KEY_SCALE).abs();
                if off >= 1e-9 {
                    return Err(Error::AmbiguousRounding(off));
                }
                values.push(k as i64);
            }
        }
    }
    values.sort_unstable();
    values.dedup();
    for w in values.windows(2) {
        let gap = (w[1] - w[0]) as f64 / KEY_SCALE;
        if gap <= KEY_GAP {
            return Err(Error::AmbiguousRounding(gap));
        }
    }
    Ok(())
}

/// True iff every generator product maps every member into the set.
pub fn verify_closure(set: &ConditionSet, gens: &[SiteGenerators]) -> Result<bool> {
    if set.is_empty() {
        return Ok(true);
    }
    let order = set.order().clone();
    let products = generator_products(&order, gens)?;
    let keys: HashSet<Key> = set.conditions.iter().map(|c| key_of(c.coeffs.coeffs())).collect();
    Ok(set.conditions.par_iter().all(|c| {
        products.iter().all(|g| {
            let mut dst = vec![C64::new(0.0, 0.0); c.coeffs.coeffs().len()];
            g.apply_into(c.coeffs.coeffs(), &mut dst);
            keys.contains(&key_of(&dst))
        })
    }))
}

/// All elements of the group generated by `maps` on one site.
pub fn site_group(maps: &[ConjMatrix]) -> Result<Vec<ConjMatrix>> {
    let first = maps.first().ok_or_else(|| Error::InvalidParameter("no generators".into()))?;
    let elem_key = |m: &ConjMatrix| -> Vec<(usize, i64, i64)> {
        m.perm()
            .iter()
            .zip(m.phases())
            .map(|(&p, z)| (p, (z.re * KEY_SCALE).round() as i64, (z.im * KEY_SCALE).round() as i64))
            .collect()
    };
    let id = ConjMatrix::identity(first.order().clone());
    let mut seen = HashSet::new();
    seen.insert(elem_key(&id));
    let mut group = vec![id];
    let mut frontier = vec![0];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &i in &frontier {
            for g in maps {
                let h = g.compose(&group[i])?;
                if seen.insert(elem_key(&h)) {
                    next.push(group.len());
                    group.push(h);
                }
            }
        }
        frontier = next;
    }
    Ok(group)
}

/// Orbit size and support sizes obtained by applying every element of the
/// product group to the seed.
///
/// Members are stored only as 64-bit hashes of their rounded keys, so much
/// larger orbits fit in memory than with [`forge`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitCensus {
    pub group_order: usize,
    pub orbit_size: usize,
    pub support_sizes: Vec<usize>,
}

pub fn orbit_census(seed: &CoeffVector, site_groups: &[Vec<ConjMatrix>]) -> Result<OrbitCensus> {
    let order = seed.order().clone();
    if site_groups.len() != order.site_count() {
        return Err(Error::DimensionMismatch("one group per site expected".into()));
    }
    let n = order.len();
    let sites = order.site_count();
    let sizes: Vec<usize> = site_groups.iter().map(|g| g.len()).collect();
    let group_order: usize = sizes.iter().product();
    let split: Vec<Vec<usize>> = (0..n).map(|f| order.split(f)).collect();
    let src: Vec<(usize, C64)> = seed.coeffs().iter().copied().enumerate().filter(|(_, z)| z.norm() > 1e-12).collect();

    // outer loop over the first site's group keeps each task independent
    let results: Vec<(Vec<u64>, Vec<usize>)> = (0..sizes[0])
        .into_par_iter()
        .map(|g0| {
            let mut hashes = Vec::new();
            let mut supports = Vec::new();
            let rest: usize = sizes[1..].iter().product();
            let mut pick = vec![0; sites];
            for mut code in 0..rest {
                pick[0] = g0;
                for s in (1..sites).rev() {
                    pick[s] = code % sizes[s];
                    code /= sizes[s];
                }
                let mut image: Vec<(usize, C64)> = src
                    .iter()
                    .map(|&(f, z)| {
                        let mut target = vec![0; sites];
                        let mut ph = z;
                        for s in 0..sites {
                            let m = &site_groups[s][pick[s]];
                            let k = split[f][s];
                            target[s] = m.perm()[k];
                            ph *= m.phases()[k];
                        }
                        (order.join(&target), ph)
                    })
                    .collect();
                image.sort_by_key(|e| e.0);
                let mut h = DefaultHasher::new();
                let mut support = 0;
                for (f, z) in &image {
                    let (re, im) = ((z.re * KEY_SCALE).round() as i64, (z.im * KEY_SCALE).round() as i64);
                    if (re, im) != (0, 0) {
                        (f, re, im).hash(&mut h);
                        support += 1;
                    }
                }
                hashes.push(h.finish());
                supports.push(support);
            }
            (hashes, supports)
        })
        .collect();
    let mut all: HashSet<u64> = HashSet::new();
    let mut support_sizes: Vec<usize> = Vec::new();
    for (h, s) in results {
        all.extend(h);
        support_sizes.extend(s);
    }
    support_sizes.sort_unstable();
    support_sizes.dedup();
    Ok(OrbitCensus { group_order, orbit_size: all.len(), support_sizes })
}

/// `D sum conj(r) o` against the state coefficients `r`.
pub fn evaluate(cond: &Condition, rho: &CoeffVector) -> Result<Evaluation> {
    let value = rho.hs_inner(&cond.coeffs)?.re;
    let verdict = if value > cond.upper_bound + VERDICT_TOL {
        Verdict::Violated
    } else if value < -VERDICT_TOL {
        Verdict::SanityFail
    } else {
        Verdict::Satisfied
    };
    Ok(Evaluation { value, verdict })
}

/// Outcome of testing one state against a whole set.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub bound: f64,
    pub values: Vec<f64>,
    pub violated: Vec<usize>,
    pub sanity_failures: Vec<usize>,
    pub max_value: f64,
    /// `max_value - bound`; positive exactly when something is violated.
    pub max_margin: f64,
    /// Index of the condition attaining `max_value`.
    pub argmax: usize,
}

impl CheckReport {
    pub fn detected(&self) -> bool {
        !self.violated.is_empty()
    }
}

pub fn check_state(set: &ConditionSet, rho: &DenseOperator) -> Result<CheckReport> {
    rho.require_state()?;
    if set.is_empty() {
        return Err(Error::InvalidParameter("empty condition set".into()));
    }
    if rho.dims() != &set.dims {
        return Err(Error::DimensionMismatch(format!("state on {} for set on {}", rho.dims(), set.dims)));
    }
    let r = decompose_in(set.order().clone(), rho)?;
    let evals: Vec<Evaluation> = set.conditions.par_iter().map(|c| evaluate(c, &r)).collect::<Result<_>>()?;
    let mut violated = Vec::new();
    let mut sanity_failures = Vec::new();
    let (mut argmax, mut max_value) = (0, f64::NEG_INFINITY);
    for (i, e) in evals.iter().enumerate() {
        match e.verdict {
            Verdict::Violated => violated.push(i),
            Verdict::SanityFail => sanity_failures.push(i),
            Verdict::Satisfied => {}
        }
        if e.value > max_value {
            max_value = e.value;
            argmax = i;
        }
    }
    Ok(CheckReport {
        bound: set.bound,
        values: evals.iter().map(|e| e.value).collect(),
        violated,
        sanity_failures,
        max_value,
        max_margin: max_value - set.bound,
        argmax,
    })
}

pub const FORMAT_TAG: &str = "condset-v1";

#[derive(Serialize, Deserialize)]
struct SetFile {
    format: String,
    dims: Vec<usize>,
    order: String,
    seed: String,
    bound: f64,
    generators: String,
    conditions: Vec<Vec<(usize, f64, f64)>>,
}

impl ConditionSet {
    pub fn to_json(&self) -> String {
        let conditions = self
            .conditions
            .iter()
            .map(|c| {
                c.coeffs
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| z.norm() > 1e-12)
                    .map(|(i, z)| (i, z.re, z.im))
                    .collect()
            })
            .collect();
        let f = SetFile {
            format: FORMAT_TAG.into(),
            dims: self.dims.as_slice().to_vec(),
            order: PauliOrder::TAG.into(),
            seed: self.seed.clone(),
            bound: self.bound,
            generators: self.generators.clone(),
            conditions,
        };
        serde_json::to_string(&f).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Value = serde_json::from_str(text)?;
        match raw.get("format").and_then(Value::as_str) {
            Some(FORMAT_TAG) => {}
            other => return Err(Error::Format(format!("unsupported format tag {other:?}"))),
        }
        match raw.get("order").and_then(Value::as_str) {
            Some(PauliOrder::TAG) => {}
            other => return Err(Error::Format(format!("unsupported order tag {other:?}"))),
        }
        let f: SetFile = serde_json::from_value(raw)?;
        let dims = Dims::new(f.dims)?;
        let order = Arc::new(PauliOrder::canonical(&dims));
        let n = order.len();
        if !(0.0..=1.0).contains(&f.bound) {
            return Err(Error::Format(format!("bound {} outside [0, 1]", f.bound)));
        }
        let mut conditions = Vec::with_capacity(f.conditions.len());
        for (ci, rec) in f.conditions.into_iter().enumerate() {
            let mut coeffs = vec![C64::new(0.0, 0.0); n];
            let mut last = None;
            for (i, re, im) in rec {
                if i >= n {
                    return Err(Error::Format(format!("condition {ci}: index {i} outside [0, {n})")));
                }
                if last.is_some_and(|l| l >= i) {
                    return Err(Error::Format(format!("condition {ci}: indices not ascending")));
                }
                last = Some(i);
                coeffs[i] = C64::new(re, im);
            }
            conditions.push(Condition { coeffs: CoeffVector::new(order.clone(), coeffs)?, upper_bound: f.bound });
        }
        if conditions.is_empty() {
            return Err(Error::Format("no conditions".into()));
        }
        Ok(Self { dims, seed: f.seed, bound: f.bound, generators: f.generators, conditions, rounds: 0 })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Loads and requires the given dims.
    pub fn load_for(path: &Path, dims: &Dims) -> Result<Self> {
        let set = Self::load(path)?;
        if &set.dims != dims {
            return Err(Error::DimensionMismatch(format!("file holds {} but {} was expected", set.dims, dims)));
        }
        Ok(set)
    }
}

/// Count of members per support size, for reporting.
pub fn support_histogram(set: &ConditionSet) -> Vec<(usize, usize)> {
    let mut h: HashMap<usize, usize> = HashMap::new();
    for c in &set.conditions {
        *h.entry(c.coeffs.support(1e-9).len()).or_default() += 1;
    }
    let mut v: Vec<(usize, usize)> = h.into_iter().collect();
    v.sort_unstable();
    v
}
