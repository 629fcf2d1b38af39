//! States presented by their moments `ω(s_J s_K*)`.
//!
//! Every constructor returns a [`MomentFunctional`]: an evaluator plus the
//! family parameters and whatever analytic facts the family guarantees
//! (purity, a minimality certificate, a properly infinite sequence).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::linalg::{self, is_unitary, Mat, PsdReport};
use crate::scalar::{common_mode, is_unit, norm_sqr, Mode, Scalar, Tol};
use crate::symalg::{gauge_apply, is_isometry_in_plus, reduce_starred_pair, CuntzElement, Reduced};
use crate::words::{EventuallyPeriodicWord, LazyWord, Word};

/// Which equation set determined the low-moment table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PinnedBy {
    /// The fixed-point equations `ω(s_C) = ω(u* s_C)` alone.
    FixedPoint,
    /// Fixed-point equations plus `ω(s_C) = ω(u* s_C u)`.
    WithSandwich,
    /// Neither set pins a unique table; the minimum-norm solution is used.
    NotPinned,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeKind {
    SubCuntz { m: usize },
    GeometricProgression { k: usize },
    General,
}

/// A state fixed by `π(u)Ω = Ω` for `u = Σ_{W∈P} z_W s_W`.
#[derive(Debug)]
pub struct PrefixCodeState {
    pub n: usize,
    pub code: Vec<Word>,
    pub z: Vec<Scalar>,
    pub kind: CodeKind,
    /// `v_C = ω(s_C)` for `1 ≤ |C| ≤ max|W|`.
    pub table: BTreeMap<Word, Scalar>,
    /// Dimension of the solution space of the fixed-point system alone.
    pub fixed_point_dim: usize,
    /// Dimension after the sandwich equations were added (equal to
    /// `fixed_point_dim` when they were not needed).
    pub solution_dim: usize,
    pub pinned_by: PinnedBy,
    pub u: CuntzElement,
    expansions: Mutex<HashMap<Word, Arc<BTreeMap<Word, Scalar>>>>,
}

impl PrefixCodeState {
    pub fn unique(&self) -> bool {
        self.solution_dim == 1
    }

    pub fn max_len(&self) -> usize {
        self.code.iter().map(Word::len).max().unwrap_or(0)
    }

    fn v(&self, c: &Word) -> Scalar {
        if c.is_empty() {
            return Scalar::one(self.mode());
        }
        if let Some(x) = self.table.get(c) {
            return x.clone();
        }
        // longer words reduce through the fixed-point equation
        let mut acc = Scalar::zero(self.mode());
        for (w, zw) in self.code.iter().zip(&self.z) {
            if let Some(rest) = c.strip_prefix(w) {
                acc = acc + zw.conj() * self.v(&rest);
            }
        }
        acc
    }

    fn mode(&self) -> Mode {
        common_mode(&self.z)
    }

    /// `π(s_J)* Ω = Σ_D c_D π(s_D) Ω` with `|D| < max|W|`.
    fn expansion(&self, j: &Word) -> Arc<BTreeMap<Word, Scalar>> {
        if let Some(e) = self.expansions.lock().expect("lock").get(j) {
            return e.clone();
        }
        let mut out: BTreeMap<Word, Scalar> = BTreeMap::new();
        if j.is_empty() {
            out.insert(Word::empty(), Scalar::one(self.mode()));
        } else {
            for (w, zw) in self.code.iter().zip(&self.z) {
                if zw.is_exact_zero() {
                    continue;
                }
                if w.len() < j.len() {
                    if let Some(rest) = j.strip_prefix(w) {
                        for (d, c) in self.expansion(&rest).iter() {
                            add_to(&mut out, d.clone(), zw * c);
                        }
                    }
                } else if let Some(rest) = w.strip_prefix(j) {
                    add_to(&mut out, rest, zw.clone());
                }
            }
        }
        let out = Arc::new(out);
        self.expansions
            .lock()
            .expect("lock")
            .insert(j.clone(), out.clone());
        out
    }

    fn eval(&self, j: &Word, k: &Word) -> Scalar {
        let a = self.expansion(j);
        let b = self.expansion(k);
        let mut acc = Scalar::zero(self.mode());
        for (d, cd) in a.iter() {
            for (e, ce) in b.iter() {
                let m = match reduce_starred_pair(d, e) {
                    Reduced::Identity => Scalar::one(self.mode()),
                    Reduced::Monomial(e2) => self.v(&e2),
                    Reduced::Starred(d2) => self.v(&d2).conj(),
                    Reduced::Zero => continue,
                };
                acc = acc + &(&cd.conj() * ce) * &m;
            }
        }
        acc
    }
}

fn add_to(map: &mut BTreeMap<Word, Scalar>, key: Word, c: Scalar) {
    let v = match map.remove(&key) {
        Some(x) => x + c,
        None => c,
    };
    if !v.is_exact_zero() {
        map.insert(key, v);
    }
}

/// `Σ ω(s_J s_K*)` for `ω` the sandwiched base state; only the base is
/// needed at evaluation time.
#[derive(Clone, Debug)]
pub enum SandwichKind {
    /// `A = Σ_l c_l A_l` with finitely many explicit terms.
    Explicit {
        a: CuntzElement,
        terms: Vec<(Scalar, CuntzElement)>,
    },
    /// `A = Σ_{l≥1} 2^{-l/2} s_2^{l-1} s_1 s_2^l` over the Cuntz state with
    /// `ω(s_1) = 1`.
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceSource {
    /// Established by the constructor.
    Proved,
    /// Supplied by the user.
    Asserted,
}

#[derive(Clone, Debug)]
pub struct SandwichState {
    pub base: MomentFunctional,
    pub kind: SandwichKind,
    pub equivalence_to_base: Option<EquivalenceSource>,
}

/// The `s_2^{l-1} s_1 s_2^l` building block of the dyadic sandwich.
pub fn dyadic_block(l: usize) -> Word {
    let mut w = vec![2u8; l - 1];
    w.push(1);
    w.extend(std::iter::repeat(2u8).take(l));
    Word(w)
}

/// `Σ_{l ≤ t} 2^{-l/2} A_l`.
pub fn dyadic_partial_sum(n: usize, t: usize) -> CuntzElement {
    CuntzElement::creation_sum(
        n,
        (1..=t).map(|l| (dyadic_block(l), Scalar::inv_sqrt2().powi(l))),
    )
}

/// A sequence `a_1, a_2, …` of elements, eventually periodic or read off a
/// lazy word (`a_i = s_{x_i}`).
#[derive(Clone, Debug)]
pub enum ElementSeq {
    Periodic {
        pre: Vec<CuntzElement>,
        per: Vec<CuntzElement>,
    },
    LazyLetters(LazyWord),
}

impl ElementSeq {
    pub fn constant(a: CuntzElement) -> Self {
        ElementSeq::Periodic {
            pre: Vec::new(),
            per: vec![a],
        }
    }

    /// `a_i` for `i ≥ 1`.
    pub fn get(&self, i: usize) -> Option<CuntzElement> {
        match self {
            ElementSeq::Periodic { pre, per } => {
                if i <= pre.len() {
                    Some(pre[i - 1].clone())
                } else {
                    Some(per[(i - 1 - pre.len()) % per.len()].clone())
                }
            }
            ElementSeq::LazyLetters(w) => w.letter(i - 1).map(|c| CuntzElement::s(w.n(), c)),
        }
    }

    pub fn map(&self, f: impl Fn(&CuntzElement) -> CuntzElement) -> ElementSeq {
        match self {
            ElementSeq::Periodic { pre, per } => ElementSeq::Periodic {
                pre: pre.iter().map(&f).collect(),
                per: per.iter().map(&f).collect(),
            },
            other => other.clone(),
        }
    }
}

/// A properly infinite sequence with its status.
#[derive(Clone, Debug)]
pub struct PiSequence {
    pub seq: ElementSeq,
    /// True when the family's analytic argument covers all `l, k`.
    pub proved: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub pure: Option<bool>,
    pub minimal_certificate: Option<CuntzElement>,
    pub properly_infinite: Option<PiSequence>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum StateData {
    Cuntz {
        z: Vec<Scalar>,
    },
    PrefixCode(Arc<PrefixCodeState>),
    InducedProduct {
        pre: Vec<Vec<Scalar>>,
        per: Vec<Vec<Scalar>>,
    },
    Shift {
        word: EventuallyPeriodicWord,
    },
    LazyShift {
        word: LazyWord,
    },
    Grid,
    Sandwich(Arc<SandwichState>),
    Gauge {
        base: Box<MomentFunctional>,
        g: Mat,
    },
    Mixture {
        components: Vec<(Scalar, MomentFunctional)>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cuntz,
    SubCuntz,
    GeometricProgression,
    PrefixCode,
    InducedProduct,
    Shift,
    LazyShift,
    Grid,
    Sandwich,
    Gauge,
    Mixture,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Cuntz => "cuntz",
            Family::SubCuntz => "sub_cuntz",
            Family::GeometricProgression => "geometric_progression",
            Family::PrefixCode => "prefix_code",
            Family::InducedProduct => "induced_product",
            Family::Shift => "shift",
            Family::LazyShift => "lazy_shift",
            Family::Grid => "grid",
            Family::Sandwich => "sandwich",
            Family::Gauge => "gauge",
            Family::Mixture => "mixture",
        }
    }
}

/// A state on O_n given by its moment evaluator.
#[derive(Clone, Debug)]
pub struct MomentFunctional {
    n: usize,
    mode: Mode,
    tol: Tol,
    data: StateData,
    flags: Flags,
    cache: Arc<Mutex<HashMap<(Word, Word), Scalar>>>,
}

impl MomentFunctional {
    fn new(n: usize, mode: Mode, data: StateData, flags: Flags) -> Self {
        MomentFunctional {
            n,
            mode,
            tol: Tol::default(),
            data,
            flags,
            cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn tol(&self) -> &Tol {
        &self.tol
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.flags.notes.push(note.into());
        self
    }

    pub fn family(&self) -> Family {
        match &self.data {
            StateData::Cuntz { .. } => Family::Cuntz,
            StateData::PrefixCode(p) => match p.kind {
                CodeKind::SubCuntz { .. } => Family::SubCuntz,
                CodeKind::GeometricProgression { .. } => Family::GeometricProgression,
                CodeKind::General => Family::PrefixCode,
            },
            StateData::InducedProduct { .. } => Family::InducedProduct,
            StateData::Shift { .. } => Family::Shift,
            StateData::LazyShift { .. } => Family::LazyShift,
            StateData::Grid => Family::Grid,
            StateData::Sandwich(_) => Family::Sandwich,
            StateData::Gauge { .. } => Family::Gauge,
            StateData::Mixture { .. } => Family::Mixture,
        }
    }

    pub fn prefix_code(&self) -> Option<&PrefixCodeState> {
        match &self.data {
            StateData::PrefixCode(p) => Some(p),
            _ => None,
        }
    }

    /// Results rest on a finite horizon rather than a proof.
    pub fn is_evidence_only(&self) -> bool {
        match &self.data {
            StateData::LazyShift { .. } => true,
            StateData::Gauge { base, .. } => base.is_evidence_only(),
            StateData::Sandwich(s) => s.base.is_evidence_only(),
            StateData::Mixture { components } => {
                components.iter().any(|(_, c)| c.is_evidence_only())
            }
            _ => false,
        }
    }

    /// `ω(s_J s_K*)`.
    pub fn eval(&self, j: &Word, k: &Word) -> Scalar {
        // closed-form families are cheaper to recompute than to look up
        if matches!(
            self.data,
            StateData::Cuntz { .. }
                | StateData::InducedProduct { .. }
                | StateData::Shift { .. }
                | StateData::LazyShift { .. }
                | StateData::Grid
        ) {
            return self.eval_uncached(j, k);
        }
        let key = (j.clone(), k.clone());
        if let Some(v) = self.cache.lock().expect("lock").get(&key) {
            return v.clone();
        }
        let v = self.eval_uncached(j, k);
        self.cache.lock().expect("lock").insert(key, v.clone());
        v
    }

    /// `ω(a)` for a symbolic element.
    pub fn eval_element(&self, a: &CuntzElement) -> Scalar {
        a.iter()
            .map(|(j, k, c)| c * &self.eval(j, k))
            .fold(Scalar::zero(self.mode), |x, y| x + y)
    }

    fn zero(&self) -> Scalar {
        Scalar::zero(self.mode)
    }

    fn one(&self) -> Scalar {
        Scalar::one(self.mode)
    }

    fn indicator(&self, b: bool) -> Scalar {
        if b {
            self.one()
        } else {
            self.zero()
        }
    }

    fn eval_uncached(&self, j: &Word, k: &Word) -> Scalar {
        match &self.data {
            StateData::Cuntz { z } => {
                let zj = word_product(z, j, self.mode);
                let zk = word_product(z, k, self.mode);
                zj.conj() * zk
            }
            StateData::PrefixCode(p) => p.eval(j, k),
            StateData::InducedProduct { pre, per } => {
                if j.len() != k.len() {
                    return self.zero();
                }
                let mut acc = self.one();
                for t in 0..j.len() {
                    let zt = if t < pre.len() {
                        &pre[t]
                    } else {
                        &per[(t - pre.len()) % per.len()]
                    };
                    let a = &zt[j.letters()[t] as usize - 1];
                    let b = &zt[k.letters()[t] as usize - 1];
                    acc = acc * (a.conj() * b.clone());
                    if acc.is_exact_zero() {
                        break;
                    }
                }
                acc
            }
            StateData::Shift { word } => {
                let a = word.strip_prefix(j);
                let b = word.strip_prefix(k);
                self.indicator(matches!((a, b), (Some(x), Some(y)) if x == y))
            }
            StateData::LazyShift { word } => {
                let ok = j == k && word.prefix(j.len()).map(|p| &p == j).unwrap_or(false);
                self.indicator(ok)
            }
            StateData::Grid => {
                let ones = |w: &Word| w.letters().iter().all(|&c| c == 1);
                self.indicator(j.len() == k.len() && ones(j) && ones(k))
            }
            StateData::Sandwich(s) => self.eval_sandwich(s, j, k),
            StateData::Gauge { base, g } => {
                let mut acc = self.zero();
                let js = Word::all_of_length(self.n, j.len());
                let ks = Word::all_of_length(self.n, k.len());
                for j2 in &js {
                    let cj = crate::symalg::gauge_coefficient(g, j2, j);
                    if cj.is_exact_zero() {
                        continue;
                    }
                    for k2 in &ks {
                        let ck = crate::symalg::gauge_coefficient(g, k2, k).conj();
                        if ck.is_exact_zero() {
                            continue;
                        }
                        acc = acc + &(&cj * &ck) * &base.eval(j2, k2);
                    }
                }
                acc
            }
            StateData::Mixture { components } => components
                .iter()
                .map(|(w, c)| w * &c.eval(j, k))
                .fold(self.zero(), |a, b| a + b),
        }
    }

    fn eval_sandwich(&self, s: &SandwichState, j: &Word, k: &Word) -> Scalar {
        let x = CuntzElement::monomial(self.n, j.clone(), k.clone(), Scalar::one(self.mode));
        match &s.kind {
            SandwichKind::Explicit { a, .. } => {
                let y = a.adjoint().multiply(&x).and_then(|y| y.multiply(a));
                s.base.eval_element(&y.expect("same alphabet"))
            }
            SandwichKind::Dyadic => {
                // AΩ = Σ_l 2^{-l/2} e_{A_l 1^∞} in the shift representation of 1^∞
                let t = j.len().max(k.len()) + 1;
                let x = EventuallyPeriodicWord::periodic(self.n, Word::letter(1)).expect("n ≥ 2");
                let star = |w: &Word| -> Vec<(EventuallyPeriodicWord, Scalar)> {
                    (1..=t)
                        .filter_map(|l| {
                            x.prepend(&dyadic_block(l))
                                .strip_prefix(w)
                                .map(|y| (y, Scalar::inv_sqrt2().powi(l)))
                        })
                        .collect()
                };
                let (a, b) = (star(j), star(k));
                let mut head = Scalar::zero(self.mode);
                for (ya, ca) in &a {
                    for (yb, cb) in &b {
                        if ya == yb {
                            head = head + &ca.conj() * cb;
                        }
                    }
                }
                // blocks with l > t contribute only on the diagonal J = K = 2^a,
                // where they sum to 2^{-t}
                let twos = j.letters().iter().all(|&c| c == 2);
                if j == k && twos {
                    head + Scalar::ratio(1, 2).powi(t)
                } else {
                    head
                }
            }
        }
    }

    /// Gram matrix `G[J,K] = ω(s_J s_K*)` over the given words.
    pub fn gram(&self, words: &[Word]) -> Mat {
        words
            .iter()
            .map(|j| words.iter().map(|k| self.eval(j, k)).collect())
            .collect()
    }
}

fn word_product(z: &[Scalar], w: &Word, mode: Mode) -> Scalar {
    w.letters()
        .iter()
        .fold(Scalar::one(mode), |acc, &c| acc * z[c as usize - 1].clone())
}

fn check_unit(z: &[Scalar], tol: f64) -> Result<()> {
    if is_unit(z, tol) {
        Ok(())
    } else {
        Err(Error::NotUnit(norm_sqr(z).render()))
    }
}

fn unit_tol(mode: Mode) -> f64 {
    match mode {
        Mode::Exact => 0.0,
        Mode::Float => crate::scalar::DEFAULT_EPS,
    }
}

fn to_mode(v: &[Scalar], mode: Mode) -> Vec<Scalar> {
    v.iter().map(|x| x.to_mode(mode)).collect()
}

/// The Cuntz state `ω_z(s_j) = conj(z_j)`.
pub fn make_cuntz(z: &[Scalar]) -> Result<MomentFunctional> {
    let n = z.len();
    if n < 2 {
        return Err(crate::error::schema("z", "need n ≥ 2"));
    }
    let mode = common_mode(z);
    let z = to_mode(z, mode);
    check_unit(&z, unit_tol(mode))?;
    let u = CuntzElement::creation_sum(
        n,
        (1..=n as u8).map(|i| (Word::letter(i), z[i as usize - 1].clone())),
    );
    let flags = Flags {
        pure: Some(true),
        minimal_certificate: Some(u),
        ..Default::default()
    };
    Ok(MomentFunctional::new(
        n,
        mode,
        StateData::Cuntz { z },
        flags,
    ))
}

/// Checks that no word of `code` is a prefix of another.
pub fn check_prefix_free(code: &[Word]) -> Result<()> {
    for (a, wa) in code.iter().enumerate() {
        if wa.is_empty() {
            return Err(Error::EmptyWord);
        }
        for (b, wb) in code.iter().enumerate() {
            if a != b && wb.starts_with(wa) {
                return Err(Error::NotPrefixFree(wa.to_string(), wb.to_string()));
            }
        }
    }
    Ok(())
}

/// The uniform code `{1..n}^m`, lexicographic.
pub fn uniform_code(n: usize, m: usize) -> Vec<Word> {
    Word::all_of_length(n, m)
}

/// The code `{n^r i : r < k, i < n} ∪ {n^k}`, indexed by `(n−1)r + i`.
pub fn geometric_progression_code(n: usize, k: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for r in 0..k {
        for i in 1..n as u8 {
            out.push(Word::power_of(n as u8, r).push(i));
        }
    }
    out.push(Word::power_of(n as u8, k));
    out
}

/// A linear expression `c·t + Σ a_C v_C + Σ b_C conj(v_C)` in the unknown
/// low moments, with `t` standing for `v_∅ = 1`.
#[derive(Clone, Debug)]
struct LinExpr {
    t: Scalar,
    lin: BTreeMap<Word, Scalar>,
    conj: BTreeMap<Word, Scalar>,
}

impl LinExpr {
    fn zero(mode: Mode) -> Self {
        LinExpr {
            t: Scalar::zero(mode),
            lin: BTreeMap::new(),
            conj: BTreeMap::new(),
        }
    }

    fn var(w: &Word, c: Scalar, mode: Mode) -> Self {
        let mut e = LinExpr::zero(mode);
        if w.is_empty() {
            e.t = c;
        } else {
            e.lin.insert(w.clone(), c);
        }
        e
    }

    fn conj_var(w: &Word, c: Scalar, mode: Mode) -> Self {
        let mut e = LinExpr::zero(mode);
        if w.is_empty() {
            e.t = c;
        } else {
            e.conj.insert(w.clone(), c);
        }
        e
    }

    fn add_scaled(&mut self, other: &LinExpr, c: &Scalar) {
        self.t = self.t.clone() + c * &other.t;
        for (w, a) in &other.lin {
            add_to(&mut self.lin, w.clone(), c * a);
        }
        for (w, a) in &other.conj {
            add_to(&mut self.conj, w.clone(), c * a);
        }
    }
}

struct Solver<'a> {
    code: &'a [Word],
    z: &'a [Scalar],
    max_len: usize,
    mode: Mode,
    long: HashMap<Word, LinExpr>,
}

impl<'a> Solver<'a> {
    /// `ω(s_D)` as an expression; words longer than the code reduce through
    /// the fixed-point equation.
    fn creation(&mut self, d: &Word) -> LinExpr {
        if d.len() <= self.max_len {
            return LinExpr::var(d, Scalar::one(self.mode), self.mode);
        }
        if let Some(e) = self.long.get(d) {
            return e.clone();
        }
        let mut e = LinExpr::zero(self.mode);
        for (w, zw) in self.code.iter().zip(self.z) {
            if let Some(rest) = d.strip_prefix(w) {
                let sub = self.creation(&rest);
                e.add_scaled(&sub, &zw.conj());
            }
        }
        self.long.insert(d.clone(), e.clone());
        e
    }

    /// `ω(s_A* s_B)`.
    fn pair(&mut self, a: &Word, b: &Word) -> LinExpr {
        let one = Scalar::one(self.mode);
        match reduce_starred_pair(a, b) {
            Reduced::Identity => LinExpr::var(&Word::empty(), one, self.mode),
            Reduced::Monomial(b2) => self.creation(&b2),
            Reduced::Starred(a2) => LinExpr::conj_var(&a2, one, self.mode),
            Reduced::Zero => LinExpr::zero(self.mode),
        }
    }

    /// `Σ_W conj(z_W) ω(s_W* s_C)`.
    fn fixed_point_rhs(&mut self, c: &Word) -> LinExpr {
        let mut e = LinExpr::zero(self.mode);
        for (w, zw) in self.code.iter().zip(self.z) {
            let p = self.pair(w, c);
            e.add_scaled(&p, &zw.conj());
        }
        e
    }

    /// `Σ_{A,B} conj(z_A) z_B ω(s_A* s_C s_B)`.
    fn sandwich_rhs(&mut self, c: &Word) -> LinExpr {
        let mut e = LinExpr::zero(self.mode);
        for (a, za) in self.code.iter().zip(self.z) {
            if za.is_exact_zero() {
                continue;
            }
            for (b, zb) in self.code.iter().zip(self.z) {
                if zb.is_exact_zero() {
                    continue;
                }
                let coef = &za.conj() * zb;
                let term = match reduce_starred_pair(a, c) {
                    Reduced::Identity => self.creation(b),
                    Reduced::Monomial(c2) => self.creation(&c2.concat(b)),
                    Reduced::Starred(a2) => self.pair(&a2, b),
                    Reduced::Zero => continue,
                };
                e.add_scaled(&term, &coef);
            }
        }
        e
    }
}

/// Appends the real and imaginary parts of `lhs_var − rhs = 0`.
fn push_rows(rows: &mut Mat, index: &BTreeMap<Word, usize>, c: &Word, rhs: &LinExpr, mode: Mode) {
    let cols = 2 * index.len() + 1;
    let mut coef = vec![Scalar::zero(mode); cols];
    let i = Scalar::i().to_mode(mode);
    let put = |w: &Word, a: &Scalar, b: &Scalar, coef: &mut Vec<Scalar>| {
        let idx = index[w];
        coef[2 * idx] = coef[2 * idx].clone() + a.clone() + b.clone();
        coef[2 * idx + 1] = coef[2 * idx + 1].clone() + &i * &(a.clone() - b.clone());
    };
    let zero = Scalar::zero(mode);
    put(c, &Scalar::one(mode), &zero, &mut coef);
    for (w, a) in &rhs.lin {
        put(w, &(-a.clone()), &zero, &mut coef);
    }
    for (w, b) in &rhs.conj {
        put(w, &zero, &(-b.clone()), &mut coef);
    }
    coef[cols - 1] = coef[cols - 1].clone() - rhs.t.clone();
    rows.push(coef.iter().map(Scalar::re).collect());
    rows.push(coef.iter().map(Scalar::im).collect());
}

/// Low moments `v_C = ω(s_C)`, `|C| ≤ max|W|`, of the state fixed by
/// `u = Σ z_W s_W`, and the dimension of the solution space.
pub struct LowMoments {
    pub table: BTreeMap<Word, Scalar>,
    pub fixed_point_dim: usize,
    pub solution_dim: usize,
    pub pinned_by: PinnedBy,
}

fn null_with_t(rows: &Mat, cols: usize, mode: Mode, tol: &Tol) -> Vec<Vec<Scalar>> {
    linalg::nullspace(rows, cols, mode, tol.rank)
}

/// Solves the fixed-point system (and the sandwich system when needed).
pub fn solve_low_moments(n: usize, code: &[Word], z: &[Scalar], tol: &Tol) -> Result<LowMoments> {
    let mode = common_mode(z);
    let max_len = code.iter().map(Word::len).max().unwrap_or(0);
    let vars: Vec<Word> = (1..=max_len)
        .flat_map(|l| Word::all_of_length(n, l))
        .collect();
    let index: BTreeMap<Word, usize> = vars
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    let cols = 2 * vars.len() + 1;
    let mut solver = Solver {
        code,
        z,
        max_len,
        mode,
        long: HashMap::new(),
    };
    let mut rows: Mat = Vec::new();
    for c in &vars {
        let rhs = solver.fixed_point_rhs(c);
        push_rows(&mut rows, &index, c, &rhs, mode);
    }
    let mut null = null_with_t(&rows, cols, mode, tol);
    let fixed_point_dim = null.len();
    let mut pinned_by = PinnedBy::FixedPoint;
    if null.len() > 1 {
        for c in &vars {
            let rhs = solver.sandwich_rhs(c);
            push_rows(&mut rows, &index, c, &rhs, mode);
        }
        null = null_with_t(&rows, cols, mode, tol);
        pinned_by = if null.len() == 1 {
            PinnedBy::WithSandwich
        } else {
            PinnedBy::NotPinned
        };
    }
    let solution_dim = null.len();
    let t_col = cols - 1;
    if null.iter().all(|v| v[t_col].is_zero_tol(tol.rank)) {
        return Err(Error::Inconsistent);
    }
    let sol: Vec<Scalar> = if null.len() == 1 {
        let t = null[0][t_col].clone();
        null[0]
            .iter()
            .map(|x| x.checked_div(&t).expect("t ≠ 0"))
            .collect()
    } else {
        min_norm_solution(&null, t_col, tol)?
    };
    let i = Scalar::i().to_mode(mode);
    let table = vars
        .iter()
        .enumerate()
        .map(|(k, w)| (w.clone(), sol[2 * k].clone() + &i * &sol[2 * k + 1]))
        .collect();
    Ok(LowMoments {
        table,
        fixed_point_dim,
        solution_dim,
        pinned_by,
    })
}

/// The point of `{N α : (N α)_t = 1}` closest to the origin.
fn min_norm_solution(null: &[Vec<Scalar>], t_col: usize, tol: &Tol) -> Result<Vec<Scalar>> {
    let k = null.len();
    let g: Mat = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| crate::scalar::inner(&null[a], &null[b]).re())
                .collect()
        })
        .collect();
    let tv: Vec<Scalar> = null.iter().map(|v| v[t_col].clone()).collect();
    let y = linalg::solve(&g, &tv, tol.rank).ok_or(Error::Inconsistent)?;
    let denom = crate::scalar::inner(&tv, &y).re();
    let alpha: Vec<Scalar> = y
        .iter()
        .map(|x| x.checked_div(&denom).ok_or(Error::Inconsistent))
        .collect::<Result<_>>()?;
    let len = null[0].len();
    Ok((0..len)
        .map(|c| {
            alpha
                .iter()
                .zip(null)
                .map(|(a, v)| a * &v[c])
                .fold(Scalar::zero(alpha[0].mode()), |x, y| x + y)
        })
        .collect())
}

/// The state with `π(u)Ω = Ω`, `u = Σ_{W∈P} z_W s_W`.
pub fn make_prefix_code_state(
    n: usize,
    code: Vec<Word>,
    z: &[Scalar],
    kind: CodeKind,
) -> Result<MomentFunctional> {
    make_prefix_code_state_tol(n, code, z, kind, &Tol::default())
}

pub fn make_prefix_code_state_tol(
    n: usize,
    code: Vec<Word>,
    z: &[Scalar],
    kind: CodeKind,
    tol: &Tol,
) -> Result<MomentFunctional> {
    if code.len() != z.len() {
        return Err(crate::error::schema(
            "z",
            format!("expected {} coefficients, got {}", code.len(), z.len()),
        ));
    }
    for w in &code {
        w.validate(n)?;
    }
    check_prefix_free(&code)?;
    let mode = common_mode(z);
    let z = to_mode(z, mode);
    check_unit(
        &z,
        unit_tol(mode).max(if mode == Mode::Float { tol.eq } else { 0.0 }),
    )?;
    let u = CuntzElement::creation_sum(n, code.iter().cloned().zip(z.iter().cloned()));
    let itol = if mode == Mode::Exact { 0.0 } else { tol.eq };
    if is_isometry_in_plus(&u, itol) != (true, true) {
        return Err(Error::NotIsometry);
    }
    let low = solve_low_moments(n, &code, &z, tol)?;
    let mut flags = Flags {
        minimal_certificate: Some(u.clone()),
        ..Default::default()
    };
    if low.solution_dim > 1 {
        flags.notes.push(format!(
            "NonUniqueState: solution space has dimension {}; using the minimum-norm (symmetric) solution",
            low.solution_dim
        ));
    }
    flags.pure = match &kind {
        CodeKind::SubCuntz { .. } => Some(low.solution_dim == 1),
        CodeKind::GeometricProgression { .. } => {
            let zm = z.last().expect("nonempty").norm_sqr();
            match zm.real_cmp(&Scalar::one(mode)) {
                std::cmp::Ordering::Less if !zm.approx_eq(&Scalar::one(mode), itol) => Some(true),
                _ => None,
            }
        }
        CodeKind::General => None,
    };
    let state = PrefixCodeState {
        n,
        code,
        z,
        kind,
        table: low.table,
        fixed_point_dim: low.fixed_point_dim,
        solution_dim: low.solution_dim,
        pinned_by: low.pinned_by,
        u,
        expansions: Mutex::new(HashMap::new()),
    };
    let mut mf = MomentFunctional::new(n, mode, StateData::PrefixCode(Arc::new(state)), flags);
    mf.tol = *tol;
    Ok(mf)
}

/// Sub-Cuntz state: `ω(s_J) = conj(z_J)` for all `|J| = m`, `z` indexed
/// lexicographically.
pub fn make_sub_cuntz(n: usize, m: usize, z: &[Scalar]) -> Result<MomentFunctional> {
    make_prefix_code_state(n, uniform_code(n, m), z, CodeKind::SubCuntz { m })
}

/// Geometric progression state: `ω(s_n^r s_i) = conj(z_{(n−1)r+i})`,
/// `ω(s_n^k) = conj(z_m)`.
pub fn make_geometric_progression(n: usize, k: usize, z: &[Scalar]) -> Result<MomentFunctional> {
    make_prefix_code_state(
        n,
        geometric_progression_code(n, k),
        z,
        CodeKind::GeometricProgression { k },
    )
}

/// `ŷ = Σ_{r<k} Σ_{j<n} y_n^r y_j e_{(n−1)r+j} + y_n^k e_m`.
pub fn hat(y: &[Scalar], k: usize) -> Vec<Scalar> {
    let n = y.len();
    let yn = &y[n - 1];
    let mut out = Vec::new();
    for r in 0..k {
        for yj in &y[..n - 1] {
            out.push(yn.powi(r) * yj.clone());
        }
    }
    out.push(yn.powi(k));
    out
}

/// Recovers `y` with `ŷ = z` and `|y_n| < 1`, if one exists.
pub fn inverse_hat(z: &[Scalar], n: usize, k: usize, tol: f64) -> Option<Vec<Scalar>> {
    if z.len() != (n - 1) * k + 1 || n < 2 || k == 0 {
        return None;
    }
    let mut y: Vec<Scalar> = z[..n - 1].to_vec();
    let yn = if k == 1 {
        z[n - 1].clone()
    } else {
        let j = (0..n - 1).find(|&j| !y[j].is_zero_tol(tol))?;
        z[n - 1 + j].checked_div(&y[j])?
    };
    y.push(yn.clone());
    let h = hat(&y, k);
    let ok = h.iter().zip(z).all(|(a, b)| a.approx_eq(b, tol))
        && yn.norm_sqr().real_cmp(&Scalar::int(1)) == std::cmp::Ordering::Less
        && !yn.norm_sqr().approx_eq(&Scalar::int(1), tol);
    ok.then_some(y)
}

/// The state `ρ_c`: sub-Cuntz of order `d` with `z = conj(c) e_2^{⊗(d−1)} ⊗ e_1`,
/// so that `ρ_c(s_2^{d−1} s_1) = c`.
pub fn rho_c(n: usize, d: usize, c: &Scalar) -> Result<MomentFunctional> {
    let mut w = vec![2u8; d - 1];
    w.push(1);
    let idx = Word(w).lex_index(n);
    let mut z = vec![Scalar::zero(c.mode()); n.pow(d as u32)];
    z[idx] = c.conj();
    make_sub_cuntz(n, d, &z)
}

/// Basis tensor `e_J` as a sub-Cuntz parameter of order `|J|`.
pub fn basis_tensor(n: usize, j: &Word) -> Vec<Scalar> {
    let mut z = vec![Scalar::int(0); n.pow(j.len() as u32)];
    z[j.lex_index(n)] = Scalar::int(1);
    z
}

/// Induced product state by an eventually periodic sequence of unit vectors.
pub fn make_induced_product(pre: &[Vec<Scalar>], per: &[Vec<Scalar>]) -> Result<MomentFunctional> {
    let first = per
        .first()
        .ok_or_else(|| crate::error::schema("rep", "repeating block must be nonempty"))?;
    let n = first.len();
    if n < 2 {
        return Err(crate::error::schema("rep", "need n ≥ 2"));
    }
    let all: Vec<&Vec<Scalar>> = pre.iter().chain(per).collect();
    if all.iter().any(|v| v.len() != n) {
        return Err(crate::error::schema("rep", "vectors of different lengths"));
    }
    let mode = common_mode(all.iter().flat_map(|v| v.iter()));
    let pre: Vec<Vec<Scalar>> = pre.iter().map(|v| to_mode(v, mode)).collect();
    let per: Vec<Vec<Scalar>> = per.iter().map(|v| to_mode(v, mode)).collect();
    for v in pre.iter().chain(&per) {
        check_unit(v, unit_tol(mode))?;
    }
    let elem = |v: &Vec<Scalar>| {
        CuntzElement::creation_sum(
            n,
            (1..=n as u8).map(|j| (Word::letter(j), v[j as usize - 1].clone())),
        )
    };
    let flags = Flags {
        // an eventually periodic parameter is never aperiodic
        pure: Some(false),
        properly_infinite: Some(PiSequence {
            seq: ElementSeq::Periodic {
                pre: pre.iter().map(elem).collect(),
                per: per.iter().map(elem).collect(),
            },
            proved: true,
        }),
        ..Default::default()
    };
    Ok(MomentFunctional::new(
        n,
        mode,
        StateData::InducedProduct { pre, per },
        flags,
    ))
}

/// Vector state `ω_x = ⟨e_x|Π(·)e_x⟩` of the shift representation.
pub fn make_shift(word: EventuallyPeriodicWord) -> MomentFunctional {
    let n = word.n();
    let mut flags = Flags {
        pure: Some(true),
        ..Default::default()
    };
    if word.is_purely_periodic() {
        flags.minimal_certificate = Some(CuntzElement::creation_sum(
            n,
            [(word.per().clone(), Scalar::int(1))],
        ));
    }
    MomentFunctional::new(n, Mode::Exact, StateData::Shift { word }, flags)
}

/// Vector state of an aperiodic preset word; evidence only.
pub fn make_lazy_shift(word: LazyWord) -> MomentFunctional {
    let n = word.n();
    let flags = Flags {
        pure: Some(true),
        properly_infinite: Some(PiSequence {
            seq: ElementSeq::LazyLetters(word.clone()),
            proved: false,
        }),
        notes: vec![format!(
            "evidence only: word known to {} letters",
            word.horizon()
        )],
        ..Default::default()
    };
    MomentFunctional::new(n, Mode::Exact, StateData::LazyShift { word }, flags)
}

/// Vector state `⟨e_{1,0}|π(·)e_{1,0}⟩` of the grid representation.
pub fn make_grid(n: usize) -> MomentFunctional {
    let flags = Flags {
        properly_infinite: Some(PiSequence {
            seq: ElementSeq::constant(CuntzElement::s(n, 1)),
            proved: true,
        }),
        ..Default::default()
    };
    MomentFunctional::new(n, Mode::Exact, StateData::Grid, flags)
}

/// `ω'(x) = ω(A* x A)` with `A = Σ_l c_l A_l`.
pub fn transform_sandwich(
    base: &MomentFunctional,
    terms: &[(Scalar, CuntzElement)],
    assume_equivalent: bool,
) -> Result<MomentFunctional> {
    let n = base.n;
    let mut a = CuntzElement::zero(n);
    for (c, al) in terms {
        a = a.add(&al.scale(c))?;
    }
    let mode = common_mode(
        a.iter()
            .map(|(_, _, c)| c)
            .chain(std::iter::once(&Scalar::zero(base.mode))),
    );
    let mode = if base.mode == Mode::Float {
        Mode::Float
    } else {
        mode
    };
    let norm = base.eval_element(&a.adjoint().multiply(&a)?);
    if !norm.approx_eq(
        &Scalar::int(1),
        unit_tol(mode).max(if mode == Mode::Float {
            base.tol.eq
        } else {
            0.0
        }),
    ) {
        return Err(Error::NotUnit(norm.render()));
    }
    let state = SandwichState {
        base: base.clone(),
        kind: SandwichKind::Explicit {
            a,
            terms: terms.to_vec(),
        },
        equivalence_to_base: assume_equivalent.then_some(EquivalenceSource::Asserted),
    };
    let flags = Flags {
        pure: base.flags.pure,
        ..Default::default()
    };
    Ok(MomentFunctional::new(
        n,
        mode,
        StateData::Sandwich(Arc::new(state)),
        flags,
    ))
}

/// `ω'(x) = ω(A* x A)`, `A = Σ_{l≥1} 2^{-l/2} s_2^{l−1} s_1 s_2^l`, over the
/// Cuntz state with `ω(s_1) = 1`. Each `ω(A_l*·A_l)` is equivalent to `ω`,
/// and `A Ω` lies in the irreducible GNS space of `ω`.
pub fn transform_sandwich_dyadic(base: &MomentFunctional) -> Result<MomentFunctional> {
    let is_e1 = match &base.data {
        StateData::Cuntz { z } => {
            z[0].approx_eq(&Scalar::int(1), 0.0) && z[1..].iter().all(Scalar::is_exact_zero)
        }
        _ => false,
    };
    if !is_e1 {
        return Err(Error::TailNotCertified(
            "the dyadic tail bound needs the Cuntz base with ω(s_1) = 1".into(),
        ));
    }
    let state = SandwichState {
        base: base.clone(),
        kind: SandwichKind::Dyadic,
        equivalence_to_base: Some(EquivalenceSource::Proved),
    };
    let flags = Flags {
        pure: Some(true),
        ..Default::default()
    };
    Ok(MomentFunctional::new(
        base.n,
        Mode::Exact,
        StateData::Sandwich(Arc::new(state)),
        flags,
    ))
}

/// `ω ∘ α_g` evaluated by direct expansion, keeping only transported flags.
pub fn gauge_wrapper(base: &MomentFunctional, g: &Mat) -> Result<MomentFunctional> {
    let n = base.n;
    let gmode = common_mode(g.iter().flatten());
    let tol = if gmode == Mode::Exact && base.mode == Mode::Exact {
        0.0
    } else {
        base.tol.eq
    };
    if g.len() != n || !is_unitary(g, tol) {
        return Err(Error::NotUnitary);
    }
    let mode = if gmode == Mode::Float || base.mode == Mode::Float {
        Mode::Float
    } else {
        Mode::Exact
    };
    let ginv = linalg::adjoint(g);
    let transport = |a: &CuntzElement| gauge_apply(&ginv, a, tol).expect("unitary");
    let flags = Flags {
        pure: base.flags.pure,
        minimal_certificate: base.flags.minimal_certificate.as_ref().map(transport),
        properly_infinite: base.flags.properly_infinite.as_ref().map(|p| PiSequence {
            seq: p.seq.map(transport),
            proved: p.proved,
        }),
        notes: base.flags.notes.clone(),
    };
    let mut mf = MomentFunctional::new(
        n,
        mode,
        StateData::Gauge {
            base: Box::new(base.clone()),
            g: g.clone(),
        },
        flags,
    );
    mf.tol = base.tol;
    Ok(mf)
}

fn conj_transpose_apply(g: &Mat, z: &[Scalar]) -> Vec<Scalar> {
    linalg::mat_vec(&linalg::adjoint(g), z)
}

/// `ω ∘ α_g`. Families closed under the gauge action are re-parameterized
/// (Cuntz `z ↦ g*z`, sub-Cuntz `z ↦ (g*)^{⊗m} z`, induced product
/// `z^{(l)} ↦ g* z^{(l)}`); other states are wrapped.
pub fn transform_gauge(base: &MomentFunctional, g: &Mat) -> Result<MomentFunctional> {
    let wrapped = gauge_wrapper(base, g)?;
    match &base.data {
        StateData::Cuntz { z } => make_cuntz(&conj_transpose_apply(g, z)),
        StateData::PrefixCode(p) if matches!(p.kind, CodeKind::SubCuntz { .. }) => {
            let CodeKind::SubCuntz { m } = p.kind else {
                unreachable!()
            };
            let gstar = linalg::adjoint(g);
            let words = uniform_code(p.n, m);
            let z2: Vec<Scalar> = words
                .iter()
                .map(|j2| {
                    words
                        .iter()
                        .zip(&p.z)
                        .map(|(j, zj)| &crate::symalg::gauge_coefficient(&gstar, j2, j) * zj)
                        .fold(Scalar::zero(wrapped.mode), |a, b| a + b)
                })
                .collect();
            make_prefix_code_state_tol(p.n, words, &z2, p.kind.clone(), &base.tol)
        }
        StateData::InducedProduct { pre, per } => {
            let pre2: Vec<Vec<Scalar>> = pre.iter().map(|v| conj_transpose_apply(g, v)).collect();
            let per2: Vec<Vec<Scalar>> = per.iter().map(|v| conj_transpose_apply(g, v)).collect();
            make_induced_product(&pre2, &per2)
        }
        _ => Ok(wrapped),
    }
}

/// Convex combination `Σ w_i ω_i` with positive weights summing to one.
pub fn make_mixture(components: Vec<(Scalar, MomentFunctional)>) -> Result<MomentFunctional> {
    let first = components
        .first()
        .ok_or_else(|| crate::error::schema("components", "empty mixture"))?;
    let n = first.1.n;
    if components.iter().any(|(_, c)| c.n != n) {
        return Err(Error::AlphabetMismatch(
            n,
            components
                .iter()
                .map(|(_, c)| c.n)
                .find(|&m| m != n)
                .unwrap_or(n),
        ));
    }
    let mode = if components
        .iter()
        .all(|(w, c)| w.is_exact() && c.mode == Mode::Exact)
    {
        Mode::Exact
    } else {
        Mode::Float
    };
    let total: Scalar = components.iter().map(|(w, _)| w.clone()).sum();
    let tol = if mode == Mode::Exact {
        0.0
    } else {
        crate::scalar::DEFAULT_EPS
    };
    let bad_weight = components
        .iter()
        .any(|(w, _)| !w.im().is_zero_tol(tol) || w.real_sign(tol) != std::cmp::Ordering::Greater);
    if bad_weight || !total.approx_eq(&Scalar::int(1), tol) {
        return Err(crate::error::schema(
            "weights",
            "weights must be positive and sum to 1",
        ));
    }
    // two components that differ on some low moment make the mixture impure
    let words = Word::all_up_to(n, 2);
    let distinct = components.iter().skip(1).any(|(_, c)| {
        words.iter().any(|j| {
            words.iter().any(|k| {
                !c.eval(j, k)
                    .approx_eq(&first.1.eval(j, k), crate::scalar::DEFAULT_EPS)
            })
        })
    });
    let flags = Flags {
        pure: if distinct { Some(false) } else { None },
        ..Default::default()
    };
    Ok(MomentFunctional::new(
        n,
        mode,
        StateData::Mixture { components },
        flags,
    ))
}

/// All words of length at most `level`, shortlex.
pub fn level_words(n: usize, level: usize) -> Vec<Word> {
    Word::all_up_to(n, level)
}

/// PSD test of the Gram matrix over all words of length at most `level`.
pub fn positivity_check(omega: &MomentFunctional, level: usize) -> PsdReport {
    let g = omega.gram(&level_words(omega.n, level));
    linalg::psd_check(&g, omega.tol.eq)
}

/// Checks normalization, Hermitian symmetry and Cuntz consistency on all
/// words up to `level`. Returns the first violation.
pub fn consistency_violation(omega: &MomentFunctional, level: usize) -> Option<String> {
    let tol = if omega.mode == Mode::Exact {
        0.0
    } else {
        omega.tol.eq
    };
    let e = Word::empty();
    if !omega.eval(&e, &e).approx_eq(&Scalar::int(1), tol) {
        return Some("ω(I) ≠ 1".into());
    }
    let words = level_words(omega.n, level);
    for j in &words {
        for k in &words {
            let v = omega.eval(j, k);
            if !v.approx_eq(&omega.eval(k, j).conj(), tol) {
                return Some(format!("Hermitian symmetry fails at ({j}, {k})"));
            }
            let sum: Scalar = (1..=omega.n as u8)
                .map(|i| omega.eval(&j.push(i), &k.push(i)))
                .fold(Scalar::zero(omega.mode), |a, b| a + b);
            if !sum.approx_eq(&v, tol) {
                return Some(format!("Cuntz consistency fails at ({j}, {k})"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_exact_unit_vector, random_exact_unitary, random_float_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[u8]) -> Word {
        Word(v.to_vec())
    }

    fn e() -> Word {
        Word::empty()
    }

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::int(x)).collect()
    }

    #[test]
    fn cuntz_examples() {
        let om = make_cuntz(&ints(&[1, 0])).unwrap();
        assert_eq!(om.eval(&w(&[1]), &e()), Scalar::int(1));
        assert_eq!(om.eval(&w(&[2]), &e()), Scalar::int(0));
        let h = Scalar::inv_sqrt2();
        let om = make_cuntz(&[h.clone(), h]).unwrap();
        assert_eq!(om.eval(&w(&[1]), &w(&[2])), Scalar::ratio(1, 2));
        assert!(matches!(make_cuntz(&ints(&[1, 1])), Err(Error::NotUnit(_))));
    }

    #[test]
    fn order_one_code_is_a_cuntz_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = random_exact_unit_vector(&mut rng, 2);
        let p = make_sub_cuntz(2, 1, &z).unwrap();
        let c = make_cuntz(&z).unwrap();
        for j in Word::all_up_to(2, 3) {
            for k in Word::all_up_to(2, 3) {
                assert_eq!(p.eval(&j, &k), c.eval(&j, &k));
            }
        }
        let low = solve_low_moments(2, &uniform_code(2, 1), &z, &Tol::default()).unwrap();
        assert_eq!(low.table[&w(&[1])], z[0].conj());
        assert_eq!(low.table[&w(&[2])], z[1].conj());
    }

    #[test]
    fn sub_cuntz_basis_tensor_examples() {
        let om = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[1, 2]))).unwrap();
        assert_eq!(om.eval(&w(&[1, 2]), &e()), Scalar::int(1));
        assert_eq!(om.eval(&w(&[2, 1]), &e()), Scalar::int(0));
        let p = om.prefix_code().unwrap();
        assert_eq!(p.solution_dim, 1);
        assert_eq!(p.table[&w(&[1])], Scalar::int(0));
        assert_eq!(p.table[&w(&[2])], Scalar::int(0));
        let om2 = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[2, 1]))).unwrap();
        assert_eq!(om2.eval(&w(&[1, 2]), &e()), Scalar::int(0));
        assert_eq!(om2.eval(&w(&[2, 1]), &e()), Scalar::int(1));
    }

    #[test]
    fn geometric_progression_matches_definition() {
        // z = (1/2, 1/2, 1/√2) on the code {1, 21, 22}
        let z = vec![
            Scalar::ratio(1, 2),
            Scalar::ratio(1, 2),
            Scalar::inv_sqrt2(),
        ];
        let om = make_geometric_progression(2, 2, &z).unwrap();
        assert_eq!(om.eval(&w(&[1]), &e()), z[0].conj());
        assert_eq!(om.eval(&w(&[2, 1]), &e()), z[1].conj());
        assert_eq!(om.eval(&w(&[2, 2]), &e()), z[2].conj());
        assert_eq!(om.prefix_code().unwrap().solution_dim, 1);
        assert_eq!(om.flags().pure, Some(true));
    }

    #[test]
    fn geometric_progression_code_layout() {
        assert_eq!(
            geometric_progression_code(3, 2),
            vec![w(&[1]), w(&[2]), w(&[3, 1]), w(&[3, 2]), w(&[3, 3])]
        );
    }

    #[test]
    fn hat_roundtrip() {
        let y = vec![Scalar::ratio(3, 5), Scalar::ratio(4, 5)];
        let z = hat(&y, 3);
        assert_eq!(z.len(), 4);
        assert!(is_unit(&z, 0.0));
        assert_eq!(inverse_hat(&z, 2, 3, 0.0).unwrap(), y);
        assert!(inverse_hat(&ints(&[0, 0, 0, 1]), 2, 3, 0.0).is_none());
        let hs = make_geometric_progression(2, 3, &z).unwrap();
        let c = make_cuntz(&y).unwrap();
        for j in Word::all_up_to(2, 3) {
            for k in Word::all_up_to(2, 3) {
                assert_eq!(hs.eval(&j, &k), c.eval(&j, &k));
            }
        }
    }

    #[test]
    fn prefix_code_validation() {
        let code = vec![w(&[1]), w(&[1, 2])];
        assert!(matches!(
            make_prefix_code_state(2, code, &ints(&[1, 0]), CodeKind::General),
            Err(Error::NotPrefixFree(_, _))
        ));
        assert!(matches!(
            make_sub_cuntz(2, 1, &ints(&[1, 1])),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn periodic_parameters_are_not_unique() {
        let z = basis_tensor(2, &w(&[1, 1]));
        let low = solve_low_moments(2, &uniform_code(2, 2), &z, &Tol::default()).unwrap();
        assert_eq!(low.fixed_point_dim, 2);
        let om = make_sub_cuntz(2, 2, &z).unwrap();
        assert_eq!(om.flags().pure, Some(false));
        // symmetric solution is the average of the Cuntz states by ±e_1
        assert_eq!(om.eval(&w(&[1]), &e()), Scalar::int(0));
        assert_eq!(om.eval(&w(&[1, 1]), &e()), Scalar::int(1));
    }

    /// The states `ω_{ζx}` over all p-th roots ζ solve the fixed-point
    /// system of `x^{⊗p}` and span a p-dimensional space.
    fn convex_hull_oracle(x: &[Scalar], q: usize, p: usize, roots: &[Scalar]) {
        let n = 2;
        let mut z = vec![Scalar::int(1)];
        for _ in 0..p {
            z = z
                .iter()
                .flat_map(|a| x.iter().map(move |b| a * b))
                .collect();
        }
        let m = q * p;
        let low = solve_low_moments(n, &uniform_code(n, m), &z, &Tol::default()).unwrap();
        assert_eq!(low.fixed_point_dim, p);
        let vars: Vec<Word> = (1..=m).flat_map(|l| Word::all_of_length(n, l)).collect();
        let mut tables: Vec<Vec<Scalar>> = Vec::new();
        for zeta in roots {
            let xz: Vec<Scalar> = x.iter().map(|a| zeta * a).collect();
            let comp = make_sub_cuntz(n, q, &xz).unwrap();
            // each component satisfies ω(s_W) = conj(z_W) on the long code
            for (wd, zw) in uniform_code(n, m).iter().zip(&z) {
                assert!(comp.eval(wd, &e()).approx_eq(&zw.conj(), 1e-9));
            }
            tables.push(vars.iter().map(|v| comp.eval(v, &e())).collect());
        }
        // average equals the canonical solution
        let om = make_sub_cuntz(n, m, &z).unwrap();
        for (i, v) in vars.iter().enumerate() {
            let avg: Scalar = tables.iter().map(|t| t[i].clone()).sum::<Scalar>()
                * Scalar::float(1.0 / p as f64, 0.0);
            assert!(om.eval(v, &e()).approx_eq(&avg, 1e-9), "{v}");
        }
    }

    #[test]
    fn convex_hull_p2_and_p3() {
        // x = e_1 ⊗ e_2 (primitive), p = 2
        let x = basis_tensor(2, &w(&[1, 2]));
        convex_hull_oracle(&x, 2, 2, &[Scalar::int(1), Scalar::int(-1)]);
        // x = e_1, p = 3, cube roots of unity in float mode
        let x = vec![Scalar::float(1.0, 0.0), Scalar::float(0.0, 0.0)];
        let roots: Vec<Scalar> = (0..3)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
                Scalar::float(a.cos(), a.sin())
            })
            .collect();
        convex_hull_oracle(&x, 1, 3, &roots);
    }

    #[test]
    fn induced_product_examples() {
        let om = make_induced_product(&[], &[ints(&[1, 0])]).unwrap();
        assert_eq!(om.eval(&w(&[1, 1]), &w(&[1, 1])), Scalar::int(1));
        assert_eq!(om.eval(&w(&[1]), &w(&[2])), Scalar::int(0));
        assert_eq!(om.eval(&w(&[1]), &e()), Scalar::int(0));
        let alt = make_induced_product(&[], &[ints(&[1, 0]), ints(&[0, 1])]).unwrap();
        assert_eq!(alt.eval(&w(&[1, 2]), &w(&[1, 2])), Scalar::int(1));
        assert_eq!(alt.eval(&w(&[2, 1]), &w(&[2, 1])), Scalar::int(0));
    }

    #[test]
    fn sandwich_examples() {
        let base = make_cuntz(&ints(&[1, 0])).unwrap();
        let om =
            transform_sandwich(&base, &[(Scalar::int(1), CuntzElement::s(2, 2))], false).unwrap();
        assert_eq!(om.eval(&e(), &e()), Scalar::int(1));
        assert_eq!(om.eval(&w(&[2]), &w(&[2])), Scalar::int(1));
        assert_eq!(om.eval(&w(&[2]), &e()), Scalar::int(0));
        let bad = transform_sandwich(&base, &[(Scalar::int(2), CuntzElement::s(2, 2))], false);
        assert!(matches!(bad, Err(Error::NotUnit(_))));
    }

    #[test]
    fn dyadic_sandwich_orthogonal_system() {
        let base = make_cuntz(&ints(&[1, 0])).unwrap();
        let om = transform_sandwich_dyadic(&base).unwrap();
        for l in 1..=5 {
            for l2 in 1..=5 {
                let a = Word::power_of(2, l2 - 1).push(1);
                let b = Word::power_of(2, l - 1).push(1);
                let expect = if l == l2 {
                    Scalar::ratio(1, 2).powi(l)
                } else {
                    Scalar::int(0)
                };
                assert_eq!(om.eval(&a, &b), expect);
            }
        }
        let other = make_cuntz(&ints(&[0, 1])).unwrap();
        assert!(matches!(
            transform_sandwich_dyadic(&other),
            Err(Error::TailNotCertified(_))
        ));
    }

    /// Oracle: `ω(A_t* s_J s_K* A_t)` by symbolic rewriting over the Cuntz
    /// base, plus the diagonal tail `2^{-t}`.
    #[test]
    fn dyadic_sandwich_matches_symbolic_expansion() {
        let base = make_cuntz(&ints(&[1, 0])).unwrap();
        let om = transform_sandwich_dyadic(&base).unwrap();
        for j in Word::all_up_to(2, 3) {
            for k in Word::all_up_to(2, 3) {
                let t = j.len().max(k.len()) + 1;
                let a = dyadic_partial_sum(2, t);
                let x = CuntzElement::monomial(2, j.clone(), k.clone(), Scalar::int(1));
                let y = a.adjoint().multiply(&x).unwrap().multiply(&a).unwrap();
                let mut expect = base.eval_element(&y);
                if j == k && j.letters().iter().all(|&c| c == 2) {
                    expect = expect + Scalar::ratio(1, 2).powi(t);
                }
                assert_eq!(om.eval(&j, &k), expect, "({j},{k})");
            }
        }
    }

    /// Oracle: `A Ω` simulated in the shift representation of `1^∞` with
    /// the series cut far beyond the word lengths involved.
    #[test]
    fn dyadic_sandwich_matches_simulation() {
        use crate::shiftrep::{BasisKey, Representation, StateVector};
        let x = EventuallyPeriodicWord::periodic(2, w(&[1])).unwrap();
        let rep = Representation::Shift { word: x.clone() };
        let cut = 40;
        let mut aw = StateVector::zero();
        for l in 1..=cut {
            let y = x.prepend(&dyadic_block(l));
            aw = aw.add(&StateVector::basis(BasisKey::Tail(y)).scale(&Scalar::inv_sqrt2().powi(l)));
        }
        let om = transform_sandwich_dyadic(&make_cuntz(&ints(&[1, 0])).unwrap()).unwrap();
        let tail = Scalar::ratio(1, 2).powi(cut);
        for j in Word::all_up_to(2, 3) {
            let a = rep.apply_word_star(&aw, &j).unwrap();
            for k in Word::all_up_to(2, 3) {
                let b = rep.apply_word_star(&aw, &k).unwrap();
                let mut sim = a.inner(&b);
                if j == k && j.letters().iter().all(|&c| c == 2) {
                    sim = sim + tail.clone();
                }
                assert_eq!(om.eval(&j, &k), sim, "({j},{k})");
            }
        }
    }

    #[test]
    fn gauge_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = random_exact_unit_vector(&mut rng, 2);
        let om = make_cuntz(&z).unwrap();
        let id = linalg::identity(2, Mode::Exact);
        let same = gauge_wrapper(&om, &id).unwrap();
        let g = random_exact_unitary(&mut rng, 2);
        let wrapped = gauge_wrapper(&om, &g).unwrap();
        let direct = make_cuntz(&conj_transpose_apply(&g, &z)).unwrap();
        for j in Word::all_up_to(2, 3) {
            for k in Word::all_up_to(2, 3) {
                assert_eq!(same.eval(&j, &k), om.eval(&j, &k));
                assert_eq!(wrapped.eval(&j, &k), direct.eval(&j, &k));
            }
        }
        let swap = vec![ints(&[0, 1]), ints(&[1, 0])];
        let s = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[1, 2]))).unwrap();
        let t = transform_gauge(&s, &swap).unwrap();
        assert_eq!(t.eval(&w(&[2, 1]), &e()), Scalar::int(1));
        assert_eq!(
            gauge_wrapper(&s, &swap).unwrap().eval(&w(&[2, 1]), &e()),
            Scalar::int(1)
        );
        assert!(matches!(
            gauge_wrapper(&s, &vec![ints(&[1, 1]), ints(&[0, 1])]),
            Err(Error::NotUnitary)
        ));
    }

    #[test]
    fn gauge_reparameterization_agrees_with_wrapper() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = Scalar::inv_sqrt2();
        let sub = make_sub_cuntz(2, 2, &[Scalar::int(0), h.clone(), Scalar::int(0), h]).unwrap();
        let ip = make_induced_product(&[ints(&[0, 1])], &[ints(&[1, 0])]).unwrap();
        for base in [sub, ip] {
            let g = random_float_unitary(&mut rng, 2);
            let a = transform_gauge(&base, &g).unwrap();
            let b = gauge_wrapper(&base, &g).unwrap();
            for j in Word::all_up_to(2, 2) {
                for k in Word::all_up_to(2, 2) {
                    assert!(a.eval(&j, &k).approx_eq(&b.eval(&j, &k), 1e-9));
                }
            }
        }
    }

    #[test]
    fn positivity_examples() {
        let om = make_cuntz(&ints(&[0, 1])).unwrap();
        assert!(positivity_check(&om, 2).psd);
        let s = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[1, 2]))).unwrap();
        assert!(positivity_check(&s, 2).psd);
        // corrupt the table: v_2 := 2
        let p = s.prefix_code().unwrap();
        let mut table = p.table.clone();
        table.insert(w(&[2]), Scalar::int(2));
        let corrupt = PrefixCodeState {
            n: 2,
            code: p.code.clone(),
            z: p.z.clone(),
            kind: p.kind.clone(),
            table,
            fixed_point_dim: 1,
            solution_dim: 1,
            pinned_by: PinnedBy::FixedPoint,
            u: p.u.clone(),
            expansions: Mutex::new(HashMap::new()),
        };
        let bad = MomentFunctional::new(
            2,
            Mode::Exact,
            StateData::PrefixCode(Arc::new(corrupt)),
            Flags::default(),
        );
        let rep = positivity_check(&bad, 1);
        assert!(!rep.psd);
        assert!(rep.min_eig < 0.0);
    }

    #[test]
    fn mixture_of_distinct_states_is_not_pure() {
        let a = make_cuntz(&ints(&[1, 0])).unwrap();
        let b = make_cuntz(&ints(&[0, 1])).unwrap();
        let m = make_mixture(vec![
            (Scalar::ratio(1, 2), a.clone()),
            (Scalar::ratio(1, 2), b),
        ])
        .unwrap();
        assert_eq!(m.flags().pure, Some(false));
        assert_eq!(m.eval(&w(&[1]), &e()), Scalar::ratio(1, 2));
        assert!(make_mixture(vec![(Scalar::ratio(1, 3), a)]).is_err());
    }
}
