//! Built-in entangled kets, entangled bases, entangling unitaries, the
//! Clifford word lists that produce basis families, and test states.
//!
//! Catalog entries are addressed by string ids such as `bell:3`, `ghz:4`,
//! `w:3`, `h:3`, `upb3`, `werner:0.5`, `rho_a:0.25` or `sigma_b:0.05`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::forge::{forge, standard_generators, ConditionSet, ForgeOptions};
use crate::geometry::{max_overlap, OverlapOptions};
use crate::operator::{decompose, DenseOperator, Ket};
use crate::pauli::{fourier_matrix, product_pauli_matrix, shift_matrix, PauliLabel};
use crate::qudit::{is_prime, Dims, Tuple};
use crate::clifford::{clifford_matrix, tensor_unitary};
use crate::{CMatrix, CVector, C64};

const MAX_QUBITS: usize = 10;
const MAX_BELL_DIM: usize = 31;

/// Entangled seeds known to the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Two qudits of prime dimension `d`.
    Bell(usize),
    /// `(|00> + |11>)/sqrt 2` in a qubit-qutrit system.
    BellQubitQutrit,
    Ghz(usize),
    /// Three or four qubits.
    W(usize),
    /// Hypergraph ket on `N` qubits.
    H(usize),
    /// Complement projector of the three-qubit unextendible product basis.
    Upb3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateKind {
    Werner,
    RhoA,
    SigmaB,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CatalogId {
    Family(Family),
    State(StateKind, f64),
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn parse_count(s: &str, what: &str) -> Result<usize> {
    s.parse::<usize>().map_err(|_| Error::InvalidParameter(format!("{what}: expected an integer, got '{s}'")))
}

fn parse_param(s: &str) -> Result<f64> {
    let v = s.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("expected a number, got '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("parameter '{s}' is not finite")));
    }
    Ok(v)
}

impl Family {
    fn validate(self) -> Result<Self> {
        match self {
            Family::Bell(d) if !is_prime(d) => Err(Error::NotPrime(d)),
            Family::Bell(d) if d > MAX_BELL_DIM => Err(Error::Unsupported(format!("bell:{d} exceeds d = {MAX_BELL_DIM}"))),
            Family::Ghz(n) | Family::H(n) if !(2..=MAX_QUBITS).contains(&n) => {
                Err(Error::Unsupported(format!("{self} needs 2 to {MAX_QUBITS} qubits")))
            }
            Family::W(n) if n != 3 && n != 4 => Err(Error::Unsupported(format!("w:{n}: W bases exist here only for 3 or 4 qubits"))),
            f => Ok(f),
        }
    }

    pub fn dims(&self) -> Dims {
        match *self {
            Family::Bell(d) => Dims::uniform(d, 2).expect("prime"),
            Family::BellQubitQutrit => Dims::new(vec![2, 3]).expect("primes"),
            Family::Ghz(n) | Family::W(n) | Family::H(n) => Dims::qubits(n),
            Family::Upb3 => Dims::qubits(3),
        }
    }

    /// The entangled ket, in the computational product basis.
    pub fn ket(&self) -> Result<Ket> {
        let dims = self.dims();
        let total = dims.total();
        let amps = match *self {
            Family::Bell(d) => CVector::from_fn(total, |i, _| if i / d == i % d { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            Family::BellQubitQutrit => {
                CVector::from_fn(total, |i, _| if i == 0 || i == 4 { c(1.0, 0.0) } else { c(0.0, 0.0) })
            }
            Family::Ghz(_) => CVector::from_fn(total, |i, _| if i == 0 || i == total - 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            Family::W(_) => CVector::from_fn(total, |i, _| if i.count_ones() == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }),
            Family::H(n) => {
                let plus = 1.0 / (total as f64).sqrt();
                let mut v = CVector::from_element(total, c(plus, 0.0));
                v[total - 1] -= c(2.0 / 2f64.powi(n as i32).sqrt(), 0.0);
                v
            }
            Family::Upb3 => return Err(Error::Unsupported("upb3 is a rank-4 projector, not a ket".into())),
        };
        Ket::normalized(dims, amps)
    }

    /// Seed operator: the ket projector, or the UPB complement projector.
    pub fn seed(&self) -> Result<DenseOperator> {
        match self {
            Family::Upb3 => Ok(upb_complement()),
            _ => Ok(self.ket()?.projector()),
        }
    }

    /// Generators `g_i` with `L_k = g_1^{k_1} ... g_N^{k_N}`.
    pub fn generators(&self) -> Result<Vec<PauliLabel>> {
        let q = |s: &str| PauliLabel::qubits(s).expect("valid label");
        match *self {
            Family::Bell(_) => {
                let dims = self.dims();
                Ok(vec![PauliLabel::from_sites(&[(0, 1), (0, 0)], &dims)?, PauliLabel::from_sites(&[(0, 0), (1, 0)], &dims)?])
            }
            Family::Ghz(n) => Ok((0..n)
                .map(|i| {
                    let s: String = (0..n).map(|j| if j != i { 'I' } else if i == 0 { 'Z' } else { 'X' }).collect();
                    q(&s)
                })
                .collect()),
            Family::W(3) => Ok(vec![q("XIZ"), q("ZXI"), q("IZX")]),
            Family::W(4) => Ok(vec![q("ZZII"), q("ZIZI"), q("XIII"), q("IXXX")]),
            Family::H(n) => Ok((0..n).map(|i| q(&(0..n).map(|j| if j == i { 'Z' } else { 'I' }).collect::<String>())).collect()),
            _ => Err(Error::Unsupported(format!("{self} has no entangled basis"))),
        }
    }

    /// Index range of basis labels `k`.
    pub fn label_dims(&self) -> Dims {
        match *self {
            Family::Bell(d) => Dims::uniform(d, 2).expect("prime"),
            _ => Dims::qubits(self.dims().len()),
        }
    }

    /// Dense `L_k`.
    pub fn local_operator(&self, k: &Tuple) -> Result<CMatrix> {
        let gens = self.generators()?;
        let labels = self.label_dims();
        labels.check(k)?;
        let dims = self.dims();
        let total = dims.total();
        let mut out = CMatrix::identity(total, total);
        for (g, &e) in gens.iter().zip(k.entries()) {
            let m = product_pauli_matrix(g, &dims)?;
            for _ in 0..e {
                out *= &m;
            }
        }
        Ok(out)
    }

    /// Entangled basis `L_k |E>`, ordered by the flat index of `k`.
    pub fn basis(&self) -> Result<Vec<Ket>> {
        let ket = self.ket()?;
        self.label_dims().tuples().map(|k| Ok(ket.apply(&self.local_operator(&k)?))).collect()
    }

    /// Unitary whose `k`-th column is the `k`-th basis ket.
    pub fn entangler(&self) -> Result<DenseOperator> {
        let dims = self.dims();
        let total = dims.total();
        let m = match *self {
            Family::Bell(d) => {
                let mut ctrl = CMatrix::zeros(total, total);
                let x = shift_matrix(d);
                let mut xl = CMatrix::identity(d, d);
                for l in 0..d {
                    let mut proj = CMatrix::zeros(d, d);
                    proj[(l, l)] = c(1.0, 0.0);
                    ctrl += proj.kronecker(&xl);
                    xl = &x * xl;
                }
                ctrl * fourier_matrix(d).kronecker(&CMatrix::identity(d, d))
            }
            Family::Ghz(n) => {
                let rest = total / 2;
                let xs = (1..n).fold(CMatrix::identity(1, 1), |acc, _| acc.kronecker(&shift_matrix(2)));
                let p0 = CMatrix::from_fn(2, 2, |r, cc| if r == 0 && cc == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let p1 = CMatrix::from_fn(2, 2, |r, cc| if r == 1 && cc == 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
                let ctrl = p0.kronecker(&CMatrix::identity(rest, rest)) + p1.kronecker(&xs);
                ctrl * fourier_matrix(2).kronecker(&CMatrix::identity(rest, rest))
            }
            Family::H(n) => {
                let mut diag = CMatrix::identity(total, total);
                diag[(total - 1, total - 1)] = c(-1.0, 0.0);
                let f = (0..n).fold(CMatrix::identity(1, 1), |acc, _| acc.kronecker(&fourier_matrix(2)));
                diag * f
            }
            Family::W(_) => {
                let basis = self.basis()?;
                CMatrix::from_fn(total, total, |r, col| basis[col].amplitudes()[r])
            }
            _ => return Err(Error::Unsupported(format!("{self} has no entangling unitary"))),
        };
        DenseOperator::new(dims, m)
    }

    /// Maximum product overlap where a closed form is known.
    pub fn known_bound(&self) -> Option<f64> {
        match *self {
            Family::Bell(d) => Some(1.0 / d as f64),
            Family::BellQubitQutrit | Family::Ghz(_) => Some(0.5),
            Family::W(n) => Some(((n - 1) as f64 / n as f64).powi(n as i32 - 1)),
            Family::H(_) | Family::Upb3 => None,
        }
    }

    /// Known bound, or the numerical maximum overlap.
    pub fn separable_bound(&self, opts: &OverlapOptions) -> Result<f64> {
        match self.known_bound() {
            Some(b) => Ok(b),
            None => Ok(max_overlap(&self.seed()?, opts)?.value),
        }
    }

    /// Forges the product-Clifford orbit of the seed with the given bound.
    pub fn forge_conditions(&self, bound: f64, opts: &ForgeOptions) -> Result<ConditionSet> {
        let seed = decompose(&self.seed()?);
        let gens = standard_generators(&self.dims())?;
        forge(&seed, &self.to_string(), &gens, bound, opts)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bell(d) => write!(f, "bell:{d}"),
            Family::BellQubitQutrit => write!(f, "bell:2x3"),
            Family::Ghz(n) => write!(f, "ghz:{n}"),
            Family::W(n) => write!(f, "w:{n}"),
            Family::H(n) => write!(f, "h:{n}"),
            Family::Upb3 => write!(f, "upb3"),
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateKind::Werner => "werner",
            StateKind::RhoA => "rho_a",
            StateKind::SigmaB => "sigma_b",
        })
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogId::Family(fam) => fam.fmt(f),
            CatalogId::State(k, p) => write!(f, "{k}:{p}"),
        }
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "upb3" {
            return Ok(CatalogId::Family(Family::Upb3));
        }
        let (head, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("unknown catalog id '{s}'")))?;
        let fam = match head {
            "bell" if arg == "2x3" => Family::BellQubitQutrit,
            "bell" => Family::Bell(parse_count(arg, "bell")?),
            "ghz" => Family::Ghz(parse_count(arg, "ghz")?),
            "w" => Family::W(parse_count(arg, "w")?),
            "h" => Family::H(parse_count(arg, "h")?),
            "werner" | "rho_a" | "sigma_b" => {
                let kind = match head {
                    "werner" => StateKind::Werner,
                    "rho_a" => StateKind::RhoA,
                    _ => StateKind::SigmaB,
                };
                let p = parse_param(arg)?;
                check_param(kind, p)?;
                return Ok(CatalogId::State(kind, p));
            }
            _ => return Err(Error::InvalidParameter(format!("unknown catalog id '{s}'"))),
        };
        Ok(CatalogId::Family(fam.validate()?))
    }
}

impl CatalogId {
    pub fn dims(&self) -> Dims {
        match self {
            CatalogId::Family(f) => f.dims(),
            CatalogId::State(StateKind::Werner, _) => Dims::qubits(2),
            CatalogId::State(StateKind::RhoA, _) => Dims::uniform(3, 2).expect("prime"),
            CatalogId::State(StateKind::SigmaB, _) => Dims::qubits(3),
        }
    }

    /// The state or seed operator the id denotes.
    pub fn operator(&self) -> Result<DenseOperator> {
        match *self {
            CatalogId::Family(f) => f.seed(),
            CatalogId::State(k, p) => Ok(make_test_state(k, p)?.state),
        }
    }

    pub fn family(&self) -> Option<Family> {
        match *self {
            CatalogId::Family(f) => Some(f),
            CatalogId::State(..) => None,
        }
    }
}

/// Catalog ids with one-line descriptions.
pub fn catalog_entries() -> Vec<(&'static str, &'static str)> {
    vec![
        ("bell:<d>", "two-qudit Bell ket, d prime"),
        ("bell:2x3", "qubit-qutrit Bell ket (|00> + |11>)/sqrt 2"),
        ("ghz:<N>", "N-qubit GHZ ket"),
        ("w:3, w:4", "W ket"),
        ("h:<N>", "N-qubit hypergraph ket"),
        ("upb3", "complement projector of the three-qubit UPB"),
        ("werner:<w>", "two-qubit Werner state, 0 <= w <= 1"),
        ("rho_a:<a>", "two-qutrit PPT entangled state, 0 < a < 1"),
        ("sigma_b:<b>", "three-qubit PPT entangled state, 0 < b < 1"),
    ]
}

pub fn make_ket(family: Family) -> Result<Ket> {
    family.validate()?.ket()
}

pub fn make_basis(family: Family) -> Result<Vec<Ket>> {
    family.validate()?.basis()
}

pub fn make_entangler(family: Family) -> Result<DenseOperator> {
    family.validate()?.entangler()
}

fn qubit_proj(m: [[f64; 2]; 2]) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, col| c(m[r][col], 0.0))
}

fn upb_complement() -> DenseOperator {
    let p0 = qubit_proj([[1.0, 0.0], [0.0, 0.0]]);
    let p1 = qubit_proj([[0.0, 0.0], [0.0, 1.0]]);
    let pp = qubit_proj([[0.5, 0.5], [0.5, 0.5]]);
    let pm = qubit_proj([[0.5, -0.5], [-0.5, 0.5]]);
    let t = |a: &CMatrix, b: &CMatrix, cc: &CMatrix| a.kronecker(b).kronecker(cc);
    let span = t(&p0, &p1, &pp) + t(&p1, &pp, &p0) + t(&pp, &p0, &p1) + t(&pm, &pm, &pm);
    DenseOperator::new(Dims::qubits(3), CMatrix::identity(8, 8) - span).expect("8x8")
}

#[derive(Clone, Debug)]
pub struct TestState {
    pub kind: StateKind,
    pub param: f64,
    pub state: DenseOperator,
}

fn check_param(kind: StateKind, p: f64) -> Result<()> {
    let ok = match kind {
        StateKind::Werner => (0.0..=1.0).contains(&p),
        StateKind::RhoA | StateKind::SigmaB => p > 0.0 && p < 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{kind}:{p} is out of range")))
    }
}

pub fn make_test_state(kind: StateKind, param: f64) -> Result<TestState> {
    check_param(kind, param)?;
    let state = match kind {
        StateKind::Werner => {
            let bell = Family::Bell(2);
            let singlet = bell.ket()?.apply(&bell.local_operator(&Tuple::new(vec![1, 1], &bell.label_dims())?)?);
            let m = CMatrix::identity(4, 4).scale((1.0 - param) / 4.0) + singlet.projector().matrix().scale(param);
            DenseOperator::new(Dims::qubits(2), m)?
        }
        StateKind::RhoA => {
            let a = param;
            let mut m = CMatrix::zeros(9, 9);
            for i in 0..9 {
                m[(i, i)] = c(a, 0.0);
            }
            for &(r, col) in &[(0, 4), (0, 8), (4, 0), (4, 8), (8, 0), (8, 4)] {
                m[(r, col)] = c(a, 0.0);
            }
            m[(6, 6)] = c((1.0 + a) / 2.0, 0.0);
            m[(8, 8)] = c((1.0 + a) / 2.0, 0.0);
            let off = (1.0 - a * a).sqrt() / 2.0;
            m[(6, 8)] = c(off, 0.0);
            m[(8, 6)] = c(off, 0.0);
            DenseOperator::new(Dims::uniform(3, 2)?, m.unscale(8.0 * a + 1.0))?
        }
        StateKind::SigmaB => {
            let b = param;
            let mut m = CMatrix::zeros(8, 8);
            for i in 0..8 {
                m[(i, i)] = c(b, 0.0);
            }
            for &(r, col) in &[(0, 5), (5, 0), (1, 6), (6, 1), (2, 7), (7, 2)] {
                m[(r, col)] = c(b, 0.0);
            }
            m[(4, 4)] = c((1.0 + b) / 2.0, 0.0);
            m[(7, 7)] = c((1.0 + b) / 2.0, 0.0);
            let off = (1.0 - b * b).sqrt() / 2.0;
            m[(4, 7)] = c(off, 0.0);
            m[(7, 4)] = c(off, 0.0);
            DenseOperator::new(Dims::qubits(3), m.unscale(7.0 * b + 1.0))?
        }
    };
    Ok(TestState { kind, param, state })
}

/// A product of single-site Clifford words, e.g. `T x T2 x V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductWord {
    /// Symbolic site names such as `T`, `T2`, `Q`, `U5`.
    pub names: Vec<String>,
    /// The same sites written as `F`/`V` words (empty for the identity).
    pub words: Vec<String>,
}

impl ProductWord {
    pub fn name(&self) -> String {
        self.names.join("x")
    }

    pub fn unitary(&self, d: usize) -> Result<CMatrix> {
        let gens = self.words.iter().map(|w| clifford_matrix(d, w)).collect::<Result<Vec<_>>>()?;
        Ok(tensor_unitary(&gens.iter().collect::<Vec<_>>()))
    }

    /// `self * other` site by site (`other` acts first).
    pub fn then(&self, other: &ProductWord) -> ProductWord {
        let names = self
            .names
            .iter()
            .zip(&other.names)
            .map(|(a, b)| match (a.as_str(), b.as_str()) {
                ("I", _) => b.clone(),
                (_, "I") => a.clone(),
                _ => format!("{a}{b}"),
            })
            .collect();
        let words = self.words.iter().zip(&other.words).map(|(a, b)| format!("{a}{b}")).collect();
        ProductWord { names, words }
    }
}

/// Operator lists that generate the documented basis families.
#[derive(Clone, Debug)]
pub struct CliffordFamilies {
    /// `T = VF`, `T2`, `Q = VFV`, `F`, `V`.
    pub qubit_singles: Vec<(String, String)>,
    /// Identity plus the five singles on the first qubit.
    pub qubit_bell_bases: Vec<ProductWord>,
    pub qubit_bell_trios: Vec<Vec<usize>>,
    /// `U1` .. `U11`.
    pub qutrit_singles: Vec<(String, String)>,
    /// Identity, `U_i x I` for i = 1..11, then the twelve product pairs.
    pub qutrit_bell_bases: Vec<ProductWord>,
    pub qutrit_bell_octets: Vec<Vec<usize>>,
    /// The 54 three-qubit GHZ basis operators.
    pub ghz_bases: Vec<ProductWord>,
    /// Six 6-element and six 3-element groups of mutually unbiased GHZ bases.
    pub ghz_mub_sets: Vec<Vec<usize>>,
    /// Paulis producing the W quartet (identity first).
    pub w_quartet: Vec<PauliLabel>,
    /// Paulis producing the H octet (identity first).
    pub h_octet: Vec<PauliLabel>,
}

const QUBIT_SINGLES: [(&str, &str); 5] = [("T", "VF"), ("T2", "VFVF"), ("Q", "VFV"), ("F", "F"), ("V", "V")];

const QUTRIT_SINGLES: [(&str, &str); 11] = [
    ("U1", "F"),
    ("U2", "VFVV"),
    ("U3", "VVFV"),
    ("U4", "V"),
    ("U5", "VF"),
    ("U6", "FV"),
    ("U7", "VVFVV"),
    ("U8", "VV"),
    ("U9", "VVF"),
    ("U10", "FVV"),
    ("U11", "VFV"),
];

const QUTRIT_PAIRS: [(usize, usize); 12] =
    [(1, 1), (2, 2), (3, 1), (1, 3), (1, 5), (3, 5), (2, 7), (1, 6), (1, 9), (1, 11), (2, 10), (3, 9)];

const GHZ_MUB_SET: [&str; 6] = ["I I I", "T T T", "T2 T2 T2", "V T T2", "T2 V T", "T T2 V"];
const GHZ_CONVERTERS: [&str; 6] = ["I I I", "I I T", "I I T2", "I I Q", "I I F", "I I V"];
const GHZ_EXTRA: [[&str; 3]; 6] = [
    ["V T2 T2", "T2 Q T", "T I V"],
    ["I T2 I", "T I T", "T2 T T2"],
    ["T V T", "T2 T T", "I F I"],
    ["T V V", "T2 Q T2", "V F T2"],
    ["T V T2", "T2 T V", "V F Q"],
    ["I F Q", "T2 Q V", "T V F"],
];

fn qubit_word(sym: &str) -> &'static str {
    if sym == "I" {
        return "";
    }
    QUBIT_SINGLES.iter().find(|(n, _)| *n == sym).map(|(_, w)| *w).expect("known qubit symbol")
}

fn qubit_product(spec: &str) -> ProductWord {
    let names: Vec<String> = spec.split_whitespace().map(String::from).collect();
    let words = names.iter().map(|n| qubit_word(n).to_string()).collect();
    ProductWord { names, words }
}

fn site_product(n: usize, site: usize, name: &str, word: &str) -> ProductWord {
    let mut names = vec!["I".to_string(); n];
    let mut words = vec![String::new(); n];
    names[site] = name.into();
    words[site] = word.into();
    ProductWord { names, words }
}

fn build_families() -> CliffordFamilies {
    let qubit_singles = QUBIT_SINGLES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let mut qubit_bell_bases = vec![qubit_product("I I")];
    qubit_bell_bases.extend(QUBIT_SINGLES.iter().map(|(n, w)| site_product(2, 0, n, w)));

    let qutrit_singles = QUTRIT_SINGLES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    let mut qutrit_bell_bases = vec![ProductWord { names: vec!["I".into(); 2], words: vec![String::new(); 2] }];
    qutrit_bell_bases.extend(QUTRIT_SINGLES.iter().map(|(n, w)| site_product(2, 0, n, w)));
    for &(a, b) in &QUTRIT_PAIRS {
        let (na, wa) = QUTRIT_SINGLES[a - 1];
        let (nb, wb) = QUTRIT_SINGLES[b - 1];
        qutrit_bell_bases.push(ProductWord { names: vec![na.into(), nb.into()], words: vec![wa.into(), wb.into()] });
    }
    let qutrit_bell_octets = vec![
        vec![0, 1, 2, 3, 12, 13, 14, 15],
        vec![4, 5, 6, 7, 16, 17, 18, 19],
        vec![8, 9, 10, 11, 20, 21, 22, 23],
    ];

    let mut ghz_bases = Vec::new();
    let mut ghz_mub_sets = Vec::new();
    for conv in GHZ_CONVERTERS {
        let cw = qubit_product(conv);
        let start = ghz_bases.len();
        ghz_bases.extend(GHZ_MUB_SET.iter().map(|m| cw.then(&qubit_product(m))));
        ghz_mub_sets.push((start..ghz_bases.len()).collect());
    }
    for trio in GHZ_EXTRA {
        let start = ghz_bases.len();
        ghz_bases.extend(trio.iter().map(|s| qubit_product(s)));
        ghz_mub_sets.push((start..ghz_bases.len()).collect());
    }

    let q = |s: &str| PauliLabel::qubits(s).expect("valid label");
    CliffordFamilies {
        qubit_singles,
        qubit_bell_bases,
        qubit_bell_trios: vec![vec![0, 1, 2], vec![3, 4, 5]],
        qutrit_singles,
        qutrit_bell_bases,
        qutrit_bell_octets,
        ghz_bases,
        ghz_mub_sets,
        w_quartet: ["III", "XII", "YII", "ZII"].iter().map(|s| q(s)).collect(),
        h_octet: ["III", "XII", "IXI", "IIX", "IXX", "XIX", "XXI", "XXX"].iter().map(|s| q(s)).collect(),
    }
}

/// Cached operator lists.
pub fn clifford_families() -> &'static CliffordFamilies {
    static CACHE: OnceLock<CliffordFamilies> = OnceLock::new();
    CACHE.get_or_init(build_families)
}

/// `{U |e>}` for every ket of `basis`.
pub fn transformed_basis(basis: &[Ket], u: &CMatrix) -> Vec<Ket> {
    basis.iter().map(|k| k.apply(u)).collect()
}

/// Maximum Gram-matrix deviation from the identity.
pub fn orthonormality_error(basis: &[Ket]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.inner(b) - c(target, 0.0)).norm());
        }
    }
    worst
}

/// All squared overlaps `|<a|b>|^2` between two bases.
pub fn overlaps(a: &[Ket], b: &[Ket]) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x.inner(y).norm_sqr())).collect()
}

/// True when every cross overlap equals `1/D` to `tol`.
pub fn mutually_unbiased(a: &[Ket], b: &[Ket], tol: f64) -> bool {
    let target = 1.0 / a.len() as f64;
    overlaps(a, b).iter().all(|&o| (o - target).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{partial_transpose, reconstruct};
    use crate::pauli::pauli_matrix;

    fn id(s: &str) -> Family {
        s.parse::<CatalogId>().unwrap().family().unwrap()
    }

    fn dense_close(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    fn kron_all(ms: &[CMatrix]) -> CMatrix {
        ms.iter().fold(CMatrix::identity(1, 1), |acc, m| acc.kronecker(m))
    }

    fn power(m: &CMatrix, n: usize) -> CMatrix {
        kron_all(&vec![m.clone(); n])
    }

    fn qubit(s: char) -> CMatrix {
        let (x, z) = match s {
            'I' => (0, 0),
            'X' => (1, 0),
            'Y' => (1, 1),
            _ => (0, 1),
        };
        pauli_matrix(2, x, z).unwrap()
    }

    #[test]
    fn parses_and_prints_ids() {
        for s in ["bell:3", "bell:2x3", "ghz:4", "w:3", "h:3", "upb3", "werner:0.5", "rho_a:0.25", "sigma_b:0.05"] {
            assert_eq!(s.parse::<CatalogId>().unwrap().to_string(), s);
        }
        for bad in ["bell:4", "w:5", "ghz:1", "foo:3", "werner:1.5", "rho_a:0", "sigma_b:x", "ghz"] {
            assert!(bad.parse::<CatalogId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn kets_match_printed_forms() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let b = make_ket(Family::Bell(2)).unwrap();
        let want = [s, 0.0, 0.0, s];
        for (a, w) in b.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-15);
        }
        let w = make_ket(Family::W(3)).unwrap();
        let t = 1.0 / 3f64.sqrt();
        for (i, a) in w.amplitudes().iter().enumerate() {
            let e = if [1, 2, 4].contains(&i) { t } else { 0.0 };
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
        let h = make_ket(Family::H(3)).unwrap();
        assert!((h.norm() - 1.0).abs() < 1e-12);
        let p = 1.0 / 8f64.sqrt();
        assert!((h.amplitudes()[7] - c(p - 2.0 / 8f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(make_ket(Family::Upb3).is_err());
        assert!(make_ket(Family::W(5)).is_err());
    }

    #[test]
    fn bases_are_orthonormal_and_start_with_seed() {
        for f in ["bell:2", "bell:3", "bell:5", "ghz:3", "ghz:4", "w:3", "w:4", "h:3", "h:4"] {
            let fam = id(f);
            let basis = fam.basis().unwrap();
            assert_eq!(basis.len(), fam.dims().total());
            assert!(orthonormality_error(&basis) < 1e-10, "{f}");
            assert_eq!(&basis[0], &fam.ket().unwrap());
        }
        assert!(Family::Upb3.basis().is_err());
        assert!(Family::BellQubitQutrit.basis().is_err());
    }

    #[test]
    fn entanglers_map_product_basis_onto_entangled_basis() {
        for f in ["bell:2", "bell:3", "ghz:3", "ghz:4", "w:3", "w:4", "h:3"] {
            let fam = id(f);
            let u = fam.entangler().unwrap();
            let m = u.matrix();
            let n = m.nrows();
            assert!(dense_close(&(m.adjoint() * m), &CMatrix::identity(n, n)) < 1e-10, "{f}");
            for (k, ket) in fam.basis().unwrap().iter().enumerate() {
                let col = m.column(k).into_owned();
                assert!((col - ket.amplitudes()).norm() < 1e-10, "{f} column {k}");
            }
        }
    }

    #[test]
    fn ghz_basis_is_joint_eigenbasis_of_its_paulis() {
        let fam = Family::Ghz(3);
        let labels = decompose(&fam.seed().unwrap()).support_labels(1e-12);
        assert_eq!(labels.len(), 8);
        let dims = fam.dims();
        for ket in fam.basis().unwrap() {
            for l in &labels {
                let v = ket.apply(&product_pauli_matrix(l, &dims).unwrap());
                let lam = ket.inner(&v);
                assert!((lam.norm() - 1.0).abs() < 1e-10);
                assert!((v.amplitudes() - ket.amplitudes() * lam).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn w3_basis_is_eigenbasis_of_zzz() {
        let zzz = power(&qubit('Z'), 3);
        for ket in Family::W(3).basis().unwrap() {
            let lam = ket.inner(&ket.apply(&zzz));
            assert!((lam.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn projector_expansions_match_closed_forms() {
        let id2 = CMatrix::identity(2, 2);
        let (x, y, z) = (qubit('X'), qubit('Y'), qubit('Z'));
        let i = c(0.0, 1.0);
        let half = |m: CMatrix| m.unscale(2.0);
        for n in [3, 4] {
            let pz = half(&id2 + &z);
            let mz = half(&id2 - &z);
            let up = half(&x + &y * i);
            let dn = half(&x - &y * i);
            let g = (power(&pz, n) + power(&mz, n) + power(&up, n) + power(&dn, n)).unscale(2.0);
            assert!(dense_close(&g, Family::Ghz(n).seed().unwrap().matrix()) < 1e-12);

            let plus_x = half(&id2 + &x);
            let a = half(&id2 + &x + &y * i - &z);
            let b = half(&id2 + &x - &y * i - &z);
            let h = power(&plus_x, n) + power(&mz, n).unscale(2f64.powi(n as i32 - 2))
                - (power(&a, n) + power(&b, n)).unscale(2f64.powi(n as i32 - 1));
            assert!(dense_close(&h, Family::H(n).seed().unwrap().matrix()) < 1e-12);

            let mut w = CMatrix::zeros(1 << n, 1 << n);
            for p in 0..n {
                w += kron_all(&(0..n).map(|s| if s == p { mz.clone() } else { pz.clone() }).collect::<Vec<_>>());
                for q in p + 1..n {
                    for pair in [&x, &y] {
                        let f: Vec<CMatrix> =
                            (0..n).map(|s| if s == p || s == q { pair.clone() } else { pz.clone() }).collect();
                        w += half(kron_all(&f));
                    }
                }
            }
            assert!(dense_close(&w.unscale(n as f64), Family::W(n).seed().unwrap().matrix()) < 1e-12);
        }
        let upb = Family::Upb3.seed().unwrap();
        let r = reconstruct(&decompose(&upb));
        assert!(dense_close(r.matrix(), upb.matrix()) < 1e-12);
        let rank = upb.eigenvalues().iter().filter(|&&e| e > 0.5).count();
        assert_eq!(rank, 4);
    }

    #[test]
    fn support_sizes_of_seeds() {
        let sizes = |f: Family| decompose(&f.seed().unwrap()).support(1e-12).len();
        assert_eq!(sizes(Family::Bell(3)), 9);
        assert_eq!(sizes(Family::Ghz(3)), 8);
        assert_eq!(sizes(Family::W(3)), 20);
        assert_eq!(sizes(Family::H(3)), 29);
        assert_eq!(sizes(Family::H(4)), 121);
    }

    #[test]
    fn test_states_are_valid() {
        for kind in [StateKind::Werner, StateKind::RhoA, StateKind::SigmaB] {
            for p in [0.05, 0.25, 0.5, 0.95] {
                let s = make_test_state(kind, p).unwrap();
                assert!((s.state.trace() - c(1.0, 0.0)).norm() < 1e-12);
                s.state.require_state().unwrap();
            }
        }
        assert!(make_test_state(StateKind::RhoA, 1.0).is_err());
        assert!(make_test_state(StateKind::Werner, -0.1).is_err());
    }

    #[test]
    fn werner_one_is_singlet_projector() {
        let w = make_test_state(StateKind::Werner, 1.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = Ket::new(Dims::qubits(2), CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]))
            .unwrap();
        assert!(dense_close(w.state.matrix(), singlet.projector().matrix()) < 1e-12);
    }

    #[test]
    fn rho_a_is_ppt() {
        let r = make_test_state(StateKind::RhoA, 0.5).unwrap().state;
        assert!(partial_transpose(&r, &[0]).unwrap().min_eigenvalue() > -1e-9);
    }

    #[test]
    fn sigma_b_partial_transpose_signs() {
        for b in [0.05, 0.1, 0.5] {
            let s = make_test_state(StateKind::SigmaB, b).unwrap().state;
            assert!(partial_transpose(&s, &[0]).unwrap().min_eigenvalue() > -1e-9);
            assert!(partial_transpose(&s, &[1]).unwrap().min_eigenvalue() < -1e-6);
            assert!(partial_transpose(&s, &[2]).unwrap().min_eigenvalue() < -1e-6);
        }
    }

    #[test]
    fn w_prime_overlap_with_sigma_b() {
        let xxi = power(&qubit('X'), 2).kronecker(&CMatrix::identity(2, 2));
        let wp = Family::W(3).ket().unwrap().apply(&xxi);
        for b in [0.05, 0.1, 1.0 / 8.1] {
            let s = make_test_state(StateKind::SigmaB, b).unwrap().state;
            let v = wp.inner(&wp.apply(s.matrix())).re;
            let want = (1.0 + 4.0 * b + (1.0 - b * b).sqrt()) / (3.0 * (7.0 * b + 1.0));
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_bell_trios() {
        let fams = clifford_families();
        let base = Family::Bell(2).basis().unwrap();
        let bases: Vec<Vec<Ket>> =
            fams.qubit_bell_bases.iter().map(|w| transformed_basis(&base, &w.unitary(2).unwrap())).collect();
        for trio in &fams.qubit_bell_trios {
            for (i, &a) in trio.iter().enumerate() {
                for &b in &trio[i + 1..] {
                    assert!(mutually_unbiased(&bases[a], &bases[b], 1e-9), "{a} {b}");
                }
            }
        }
        let across = fams.qubit_bell_trios[0].iter().any(|&a| {
            fams.qubit_bell_trios[1].iter().any(|&b| !mutually_unbiased(&bases[a], &bases[b], 1e-9))
        });
        assert!(across);
    }

    #[test]
    fn family_list_sizes() {
        let f = clifford_families();
        assert_eq!(f.qubit_singles.len(), 5);
        assert_eq!(f.qutrit_singles.len(), 11);
        assert_eq!(f.qutrit_bell_bases.len(), 24);
        assert_eq!(f.ghz_bases.len(), 54);
        assert_eq!(f.ghz_mub_sets.iter().map(Vec::len).sum::<usize>(), 54);
        assert_eq!(f.w_quartet.len(), 4);
        assert_eq!(f.h_octet.len(), 8);
        assert_eq!(f.qubit_bell_bases[1].name(), "TxI");
    }

    #[test]
    fn known_bounds() {
        assert_eq!(Family::Bell(3).known_bound(), Some(1.0 / 3.0));
        assert!((Family::W(3).known_bound().unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(Family::H(3).known_bound(), None);
    }
}
