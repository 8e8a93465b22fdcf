//! Local-MUB measurement settings.
//!
//! A setting picks one of the `d_i + 1` mutually unbiased bases at every
//! site: `t_i < d_i` is the eigenbasis of `X Z^{t_i}` and `t_i = d_i` the
//! eigenbasis of `Z`. A product-Pauli operator can be estimated from a
//! setting iff each nonidentity factor lies in the chosen commuting set, so
//! two labels share a setting iff they commute site by site.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operator::{CoeffVector, DenseOperator, Ket};
use crate::pauli::{commutes, commuting_set_index, mub_family, pauli_matrix, PauliLabel};
use crate::qudit::Dims;
use crate::{CVector, C64};

/// Default branch budget of [`min_settings`].
pub const SEARCH_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Setting {
    pub t: Vec<usize>,
}

impl Setting {
    pub fn new(t: Vec<usize>, dims: &Dims) -> Result<Self> {
        if t.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!("setting of length {} for {} subsystems", t.len(), dims.len())));
        }
        for (&ti, d) in t.iter().zip(dims.iter()) {
            if ti > d {
                return Err(Error::OutOfRange { index: ti, size: d + 1 });
            }
        }
        Ok(Self { t })
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = self.t.iter().map(|t| t.to_string()).collect();
        format!("{{{}}}", parts.join(","))
    }
}

/// `prod (d_i + 1)`.
pub fn total_settings(dims: &Dims) -> usize {
    dims.iter().map(|d| d + 1).product()
}

/// Every setting, first site most significant.
pub fn all_settings(dims: &Dims) -> Vec<Setting> {
    let radix: Vec<usize> = dims.iter().map(|d| d + 1).collect();
    (0..total_settings(dims))
        .map(|mut code| {
            let mut t = vec![0; radix.len()];
            for (slot, &r) in t.iter_mut().zip(&radix).rev() {
                *slot = code % r;
                code /= r;
            }
            Setting { t }
        })
        .collect()
}

pub fn covers(s: &Setting, label: &PauliLabel, dims: &Dims) -> bool {
    label.sites().zip(&s.t).zip(dims.iter()).all(|(((x, z), &t), d)| match commuting_set_index(d, x, z) {
        None => true,
        Some(set) => set == t,
    })
}

pub fn single_setting_compatible(a: &PauliLabel, b: &PauliLabel, dims: &Dims) -> bool {
    a.sites().zip(b.sites()).zip(dims.iter()).all(|((p, q), d)| commutes(d, p, q))
}

/// Nonidentity labels carrying a nonzero coefficient.
pub fn support_of(v: &CoeffVector, tol: f64) -> Vec<PauliLabel> {
    v.support_labels(tol).into_iter().filter(|l| !l.is_identity()).collect()
}

#[derive(Clone, Debug)]
pub struct SettingPlan {
    pub settings: Vec<Setting>,
    /// For each support label, the index of its setting.
    pub assignment: Vec<(PauliLabel, usize)>,
    /// Settings fixed by labels without identity factors.
    pub forced: usize,
    /// Certified minimum (search finished within budget).
    pub minimal: bool,
    pub nodes: u64,
}

impl SettingPlan {
    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn validate(&self, dims: &Dims) -> bool {
        self.assignment.iter().all(|(l, i)| covers(&self.settings[*i], l, dims))
    }

    pub fn to_json(&self, dims: &Dims) -> String {
        #[derive(Serialize)]
        struct Entry {
            setting: Vec<usize>,
            labels: Vec<String>,
        }
        #[derive(Serialize)]
        struct Export {
            minimal: bool,
            settings: Vec<Entry>,
        }
        let settings = self
            .settings
            .iter()
            .enumerate()
            .map(|(i, s)| Entry {
                setting: s.t.clone(),
                labels: self.assignment.iter().filter(|(_, j)| *j == i).map(|(l, _)| l.name(dims)).collect(),
            })
            .collect();
        serde_json::to_string(&Export { minimal: self.minimal, settings }).expect("plain data serializes")
    }
}

/// The setting forced by a label with no identity factor.
fn forced_setting(label: &PauliLabel, dims: &Dims) -> Option<Setting> {
    label
        .sites()
        .zip(dims.iter())
        .map(|((x, z), d)| commuting_set_index(d, x, z))
        .collect::<Option<Vec<_>>>()
        .map(|t| Setting { t })
}

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn count_new(cover: &Bits, covered: &Bits) -> u32 {
    cover.iter().zip(covered).map(|(a, c)| (a & !c).count_ones()).sum()
}

struct Search<'a> {
    n: usize,
    candidates: Vec<Bits>,
    per_label: Vec<Vec<usize>>,
    incompatible: &'a [Vec<bool>],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn lower_bound(&self, covered: &Bits) -> usize {
        // labels pairwise unable to share a setting need distinct settings
        let mut clique: Vec<usize> = Vec::new();
        for i in 0..self.n {
            if !bit(covered, i) && clique.iter().all(|&j| self.incompatible[i][j]) {
                clique.push(i);
            }
        }
        let left = (0..self.n).filter(|&i| !bit(covered, i)).count();
        let widest = self.candidates.iter().map(|c| count_new(c, covered)).max().unwrap_or(1).max(1) as usize;
        clique.len().max(left.div_ceil(widest))
    }

    fn run(&mut self, covered: &mut Bits, chosen: &mut Vec<usize>) {
        if self.nodes >= self.budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        let next = (0..self.n)
            .filter(|&i| !bit(covered, i))
            .min_by_key(|&i| self.per_label[i].iter().filter(|&&c| count_new(&self.candidates[c], covered) > 0).count());
        let Some(label) = next else {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        };
        if chosen.len() + self.lower_bound(covered) >= self.best.len() {
            return;
        }
        let mut options = self.per_label[label].clone();
        options.sort_by_key(|&c| std::cmp::Reverse(count_new(&self.candidates[c], covered)));
        for c in options {
            let saved = covered.clone();
            for (w, a) in covered.iter_mut().zip(&self.candidates[c]) {
                *w |= a;
            }
            chosen.push(c);
            self.run(covered, chosen);
            chosen.pop();
            *covered = saved;
            if self.exhausted {
                return;
            }
        }
    }
}

/// Fewest settings covering `support`, searched within `budget` branch nodes.
pub fn min_settings(support: &[PauliLabel], dims: &Dims, budget: u64) -> Result<SettingPlan> {
    let labels: Vec<PauliLabel> = {
        let mut v: Vec<PauliLabel> = support.iter().filter(|l| !l.is_identity()).cloned().collect();
        v.sort();
        v.dedup();
        v
    };
    if labels.is_empty() {
        return Err(Error::EmptySupport);
    }
    for l in &labels {
        dims.check(&l.x)?;
        dims.check(&l.z)?;
    }
    let mut forced: Vec<Setting> = labels.iter().filter_map(|l| forced_setting(l, dims)).collect();
    forced.sort();
    forced.dedup();
    let residual: Vec<&PauliLabel> =
        labels.iter().filter(|l| !forced.iter().any(|s| covers(s, l, dims))).collect();

    let n = residual.len();
    let settings = all_settings(dims);
    let mut candidates = Vec::new();
    let mut cand_setting = Vec::new();
    let mut per_label = vec![Vec::new(); n];
    for s in &settings {
        let mut b = bits_new(n);
        let mut any = false;
        for (i, l) in residual.iter().enumerate() {
            if covers(s, l, dims) {
                set_bit(&mut b, i);
                per_label[i].push(candidates.len());
                any = true;
            }
        }
        if any {
            candidates.push(b);
            cand_setting.push(s.clone());
        }
    }
    let incompatible: Vec<Vec<bool>> = residual
        .iter()
        .map(|a| residual.iter().map(|b| !single_setting_compatible(a, b, dims)).collect())
        .collect();

    // greedy upper bound
    let mut covered = bits_new(n);
    let mut greedy = Vec::new();
    while (0..n).any(|i| !bit(&covered, i)) {
        let (c, _) = candidates
            .iter()
            .enumerate()
            .max_by_key(|(i, b)| (count_new(b, &covered), std::cmp::Reverse(*i)))
            .expect("every label has a covering setting");
        for (w, a) in covered.iter_mut().zip(&candidates[c]) {
            *w |= a;
        }
        greedy.push(c);
    }

    let mut search = Search {
        n,
        candidates,
        per_label,
        incompatible: &incompatible,
        best: greedy,
        nodes: 0,
        budget,
        exhausted: false,
    };
    search.run(&mut bits_new(n), &mut Vec::new());
    let chosen = search.best.clone();
    let mut plan_settings = forced.clone();
    plan_settings.extend(chosen.iter().map(|&c| cand_setting[c].clone()));

    let assignment = labels
        .iter()
        .map(|l| {
            let i = plan_settings.iter().position(|s| covers(s, l, dims)).expect("plan covers support");
            (l.clone(), i)
        })
        .collect();
    Ok(SettingPlan {
        settings: plan_settings,
        assignment,
        forced: forced.len(),
        minimal: !search.exhausted,
        nodes: search.nodes,
    })
}

/// `p_k = <e_k|rho|e_k>` for an orthonormal basis.
pub fn born_probabilities(rho: &DenseOperator, basis: &[Ket]) -> Result<Vec<f64>> {
    let d = rho.dims().total();
    if basis.len() != d {
        return Err(Error::DimensionMismatch(format!("{} basis kets for dimension {d}", basis.len())));
    }
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        if a.dims() != rho.dims() {
            return Err(Error::DimensionMismatch(format!("basis ket on {} for state on {}", a.dims(), rho.dims())));
        }
        for (j, b) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - C64::new(target, 0.0)).norm());
        }
    }
    if worst > 1e-9 {
        return Err(Error::NotOrthonormal(worst));
    }
    let mut p = Vec::with_capacity(d);
    for e in basis {
        let v = e.amplitudes();
        let pk = v.dotc(&(rho.matrix() * v)).re;
        if pk < -1e-12 {
            return Err(Error::InvalidState(format!("negative probability {pk:.3e}")));
        }
        p.push(pk.max(0.0));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() < 1e-9 {
        p.iter_mut().for_each(|x| *x /= s);
    }
    Ok(p)
}

/// Product basis of a setting, kets in mixed-radix order of the local indices.
pub fn setting_basis(s: &Setting, dims: &Dims) -> Result<Vec<Ket>> {
    let fams = dims.iter().map(mub_family).collect::<Result<Vec<_>>>()?;
    dims.tuples()
        .map(|j| {
            let sites: Vec<CVector> =
                j.entries().iter().enumerate().map(|(i, &k)| fams[i].basis(s.t[i])[k].clone()).collect();
            Ket::product(&sites)
        })
        .collect()
}

/// `<L>` from the outcome distribution of a setting that covers `label`.
pub fn estimate_expectation(probs: &[f64], s: &Setting, label: &PauliLabel, dims: &Dims) -> Result<C64> {
    if !covers(s, label, dims) {
        return Err(Error::InvalidParameter(format!("setting {} does not cover {}", s.label(), label.name(dims))));
    }
    // eigenvalue of each local factor on each local basis ket
    let mut local: Vec<Vec<C64>> = Vec::with_capacity(dims.len());
    for (i, d) in dims.iter().enumerate() {
        let (x, z) = label.site(i);
        let m = pauli_matrix(d, x, z)?;
        let fam = mub_family(d)?;
        local.push(fam.basis(s.t[i]).iter().map(|e| e.dotc(&(&m * e))).collect());
    }
    Ok(dims
        .tuples()
        .zip(probs)
        .map(|(j, &p)| j.entries().iter().enumerate().map(|(i, &k)| local[i][k]).product::<C64>() * p)
        .sum())
}
