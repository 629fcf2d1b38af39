//! cdim, κ with certificates, equivalence and purity deciders.

use std::fmt;

use serde_json::{json, Value};

use crate::fcs::{rank_profile, RankProfile};
use crate::linalg;
use crate::moments::{
    inverse_hat, make_grid, make_lazy_shift, make_shift, CodeKind, ElementSeq, EquivalenceSource,
    MomentFunctional, StateData,
};
use crate::scalar::{Mode, Scalar, Tol};
use crate::schema::vector_json;
use crate::shiftrep::Representation;
use crate::symalg::{is_isometry_in_plus, CuntzElement};
use crate::words::{tail_equivalent, EventuallyPeriodicWord, Word};

/// Run parameters shared by the deciders.
#[derive(Clone, Copy, Debug)]
pub struct Config {
    pub max_level: usize,
    pub cutoff: usize,
    pub tol: Tol,
    /// Search uniform codes for a minimality certificate when the family
    /// supplies none.
    pub search_minimality: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_level: 8,
            cutoff: 12,
            tol: Tol::default(),
            search_minimality: false,
        }
    }
}

fn eps(omega: &MomentFunctional, tol: &Tol) -> f64 {
    match omega.mode() {
        Mode::Exact => 0.0,
        Mode::Float => tol.eq,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdimStatus {
    Stabilized,
    LowerBound,
}

#[derive(Clone, Debug)]
pub struct CdimResult {
    pub value: usize,
    pub status: CdimStatus,
    pub levels: Vec<usize>,
    /// Level at which `rank(L) = rank(L+1)` was first observed, or the last
    /// level computed.
    pub level: usize,
}

impl CdimResult {
    fn from_profile(p: &RankProfile) -> Self {
        match p.stable_at {
            Some(l) => CdimResult {
                value: p.ranks[l],
                status: CdimStatus::Stabilized,
                levels: p.ranks.clone(),
                level: l,
            },
            None => CdimResult {
                value: p.last_rank(),
                status: CdimStatus::LowerBound,
                levels: p.ranks.clone(),
                level: p.ranks.len().saturating_sub(1),
            },
        }
    }

    pub fn is_stabilized(&self) -> bool {
        self.status == CdimStatus::Stabilized
    }

    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value,
            "status": match self.status {
                CdimStatus::Stabilized => "stabilized",
                CdimStatus::LowerBound => "lower_bound",
            },
            "levels": self.levels,
        })
    }
}

impl fmt::Display for CdimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let levels: Vec<String> = self.levels.iter().map(|r| r.to_string()).collect();
        match self.status {
            CdimStatus::Stabilized => write!(
                f,
                "cdim = {} (stabilized at level {}; ranks {})",
                self.value,
                self.level,
                levels.join(", ")
            ),
            CdimStatus::LowerBound => write!(
                f,
                "cdim ≥ {} (lower bound at level {}; ranks {})",
                self.value,
                self.level,
                levels.join(", ")
            ),
        }
    }
}

/// Ranks of the level Gram matrices up to `max_level`, stopping at the
/// first repeat.
pub fn cdim(omega: &MomentFunctional, max_level: usize, tol: &Tol) -> CdimResult {
    CdimResult::from_profile(&rank_profile(omega, max_level.max(1), tol))
}

/// `u` is an isometry in O_n^+ with `ω(u) = 1`.
pub fn verify_minimality_certificate(
    omega: &MomentFunctional,
    u: &CuntzElement,
    tol: &Tol,
) -> bool {
    let e = eps(omega, tol);
    if u.n() != omega.n() || is_isometry_in_plus(u, e) != (true, true) {
        return false;
    }
    omega.eval_element(u).approx_eq(&Scalar::int(1), e)
}

/// Looks for `u = Σ_{|W|=m} z_W s_W` with `ω(u) = 1`, `m ≤ max_len`. Such a
/// `z` exists exactly when `Σ_W |ω(s_W)|² = 1`, and then `z_W = conj ω(s_W)`.
/// A miss means "no certificate found", not "not minimal".
pub fn search_minimality_certificate(
    omega: &MomentFunctional,
    max_len: usize,
    tol: &Tol,
) -> Option<CuntzElement> {
    let e = eps(omega, tol);
    let empty = Word::empty();
    for m in 1..=max_len {
        let words = Word::all_of_length(omega.n(), m);
        let vals: Vec<Scalar> = words.iter().map(|w| omega.eval(w, &empty)).collect();
        if crate::scalar::norm_sqr(&vals).approx_eq(&Scalar::int(1), e) {
            let u = CuntzElement::creation_sum(
                omega.n(),
                words.into_iter().zip(vals.iter().map(Scalar::conj)),
            );
            if verify_minimality_certificate(omega, &u, tol) {
                return Some(u);
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiStatus {
    /// The δ-table holds and the family's analytic argument covers all `l, k`.
    Proved,
    /// Only the finite δ-table was checked.
    Evidence,
    Failed,
}

#[derive(Clone, Debug)]
pub struct PiReport {
    pub status: PiStatus,
    /// Largest `c` with the full table `l, k ≤ c` evaluated.
    pub cutoff: usize,
    pub table: Vec<Vec<Scalar>>,
}

impl PiReport {
    pub fn table_is_identity(&self) -> bool {
        self.status != PiStatus::Failed
    }
}

/// Largest `|terms(a[l])| · |terms(a[k])|` evaluated in one table entry.
const PI_TERM_BUDGET: usize = 1 << 12;

/// `ω(x y*)`, summed term by term when both sides are creation sums.
fn pair_moment(omega: &MomentFunctional, x: &CuntzElement, y: &CuntzElement) -> Scalar {
    if !(x.in_plus() && y.in_plus()) {
        return omega.eval_element(&x.multiply(&y.adjoint()).expect("same alphabet"));
    }
    let mut acc = Scalar::zero(omega.mode());
    for (j, _, a) in x.iter() {
        for (k, _, b) in y.iter() {
            acc = acc + &(a * &b.conj()) * &omega.eval(j, k);
        }
    }
    acc
}

/// Checks `ω(a[l] a[k]*) = δ_lk` for `l, k ≤ cutoff`, `a[l] = a_1 ⋯ a_l`.
/// Rows stop early when an entry would exceed the evaluation budget or
/// the sequence runs past a lazy horizon; the achieved cutoff is reported.
pub fn verify_properly_infinite(
    omega: &MomentFunctional,
    seq: &ElementSeq,
    cutoff: usize,
    proved: bool,
    tol: &Tol,
) -> PiReport {
    let e = eps(omega, tol);
    let mut prods: Vec<CuntzElement> = Vec::new();
    let mut acc = CuntzElement::identity(omega.n());
    for i in 1..=cutoff {
        let Some(a) = seq.get(i) else { break };
        if is_isometry_in_plus(&a, e) != (true, true) {
            return PiReport {
                status: PiStatus::Failed,
                cutoff: prods.len(),
                table: Vec::new(),
            };
        }
        let next = acc.multiply(&a).expect("same alphabet");
        if next.terms().len().pow(2) > PI_TERM_BUDGET {
            break;
        }
        acc = next;
        prods.push(acc.clone());
    }
    let c = prods.len();
    let mut ok = c > 0;
    let mut table = vec![vec![Scalar::zero(omega.mode()); c]; c];
    for l in 0..c {
        for k in 0..c {
            let v = pair_moment(omega, &prods[l], &prods[k]);
            let want = Scalar::int(if l == k { 1 } else { 0 });
            ok &= v.approx_eq(&want, e);
            table[l][k] = v;
        }
    }
    let status = match (ok, proved) {
        (false, _) => PiStatus::Failed,
        (true, true) => PiStatus::Proved,
        (true, false) => PiStatus::Evidence,
    };
    PiReport {
        status,
        cutoff: c,
        table,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KappaValue {
    Finite(usize),
    Infinite,
    /// `lo ≤ κ ≤ hi`, `hi = None` meaning unbounded.
    Interval {
        lo: usize,
        hi: Option<usize>,
    },
}

impl fmt::Display for KappaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KappaValue::Finite(d) => write!(f, "{d}"),
            KappaValue::Infinite => write!(f, "∞"),
            KappaValue::Interval { lo, hi: Some(h) } => write!(f, "[{lo}, {h}]"),
            KappaValue::Interval { lo, hi: None } => write!(f, "[{lo}, ∞]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KappaStatus {
    Proved,
    Evidence {
        cutoff: usize,
    },
    /// Rests on an equivalence supplied by the user.
    Asserted,
    Unresolved,
}

#[derive(Clone, Debug)]
pub enum Certificate {
    Minimal { u: CuntzElement },
    ProperlyInfinite { seq: ElementSeq, cutoff: usize },
    ShiftPeriod { d: usize },
    EquivalentToCuntz { z: Vec<Scalar> },
    LowerBoundOnly,
}

impl Certificate {
    pub fn name(&self) -> &'static str {
        match self {
            Certificate::Minimal { .. } => "minimal",
            Certificate::ProperlyInfinite { .. } => "properly_infinite",
            Certificate::ShiftPeriod { .. } => "shift_period",
            Certificate::EquivalentToCuntz { .. } => "equivalent_to_cuntz",
            Certificate::LowerBoundOnly => "lower_bound_only",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Certificate::Minimal { .. } => "Minimal",
            Certificate::ProperlyInfinite { .. } => "ProperlyInfinite",
            Certificate::ShiftPeriod { .. } => "ShiftPeriod",
            Certificate::EquivalentToCuntz { .. } => "EquivalentToCuntz",
            Certificate::LowerBoundOnly => "LowerBoundOnly",
        }
    }
}

#[derive(Clone, Debug)]
pub struct KappaResult {
    pub value: KappaValue,
    pub certificate: Certificate,
    pub status: KappaStatus,
    pub reason: String,
    pub cdim: CdimResult,
}

impl KappaResult {
    pub fn is_resolved(&self) -> bool {
        !matches!(self.value, KappaValue::Interval { .. })
    }

    pub fn to_json(&self) -> Value {
        let value = match &self.value {
            KappaValue::Finite(d) => json!(d),
            KappaValue::Infinite => json!("infinity"),
            KappaValue::Interval { .. } => Value::Null,
        };
        let status = match self.status {
            KappaStatus::Proved => json!("proved"),
            KappaStatus::Evidence { cutoff } => json!(format!("evidence(cutoff {cutoff})")),
            KappaStatus::Asserted => json!("asserted"),
            KappaStatus::Unresolved => json!("unresolved"),
        };
        let mut out = json!({
            "value": value,
            "certificate": self.certificate.name(),
            "status": status,
            "reason": self.reason,
        });
        let obj = out.as_object_mut().expect("object");
        match &self.certificate {
            Certificate::Minimal { u } => {
                obj.insert("u".into(), u.to_json());
            }
            Certificate::ProperlyInfinite { cutoff, .. } => {
                obj.insert("cutoff".into(), json!(cutoff));
            }
            Certificate::ShiftPeriod { d } => {
                obj.insert("d".into(), json!(d));
            }
            Certificate::EquivalentToCuntz { z } => {
                obj.insert("z".into(), vector_json(z));
            }
            Certificate::LowerBoundOnly => {}
        }
        if let KappaValue::Interval { lo, hi } = &self.value {
            obj.insert("interval".into(), json!([lo, hi]));
        }
        out
    }
}

impl fmt::Display for KappaResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.value, self.status) {
            (KappaValue::Interval { .. }, _) => write!(f, "κ ∈ {} unresolved", self.value)?,
            (v, KappaStatus::Evidence { cutoff }) => write!(
                f,
                "κ={v} ({}; evidence, cutoff {cutoff})",
                self.certificate.display_name()
            )?,
            (v, KappaStatus::Asserted) => write!(
                f,
                "κ={v} ({}; asserted equivalence)",
                self.certificate.display_name()
            )?,
            (v, _) => write!(f, "κ={v} ({})", self.certificate.display_name())?,
        }
        match self.cdim.status {
            CdimStatus::Stabilized => write!(f, "; cdim {}", self.cdim.value),
            CdimStatus::LowerBound => write!(
                f,
                "; cdim lower bound {} at level {}",
                self.cdim.value, self.cdim.level
            ),
        }
    }
}

fn unresolved(cd: CdimResult, reason: impl Into<String>) -> KappaResult {
    let hi = cd.is_stabilized().then_some(cd.value);
    KappaResult {
        value: KappaValue::Interval { lo: 1, hi },
        certificate: Certificate::LowerBoundOnly,
        status: KappaStatus::Unresolved,
        reason: reason.into(),
        cdim: cd,
    }
}

/// κ(ω) by certificate dispatch. Values are only reported when a
/// certificate or a classification result covers the state; otherwise the
/// interval `[1, cdim]` is returned as unresolved.
pub fn kappa(omega: &MomentFunctional, cfg: &Config) -> KappaResult {
    let cd = cdim(omega, cfg.max_level, &cfg.tol);
    kappa_with_cdim(omega, cfg, cd)
}

fn kappa_with_cdim(omega: &MomentFunctional, cfg: &Config, cd: CdimResult) -> KappaResult {
    let tol = &cfg.tol;
    // shift states: κ(ω_x) = d(x)
    if let StateData::Shift { word } = omega.data() {
        let d = word.per().len();
        if let Some(u) = omega.flags().minimal_certificate.clone() {
            if verify_minimality_certificate(omega, &u, tol) {
                return KappaResult {
                    value: KappaValue::Finite(d),
                    certificate: Certificate::Minimal { u },
                    status: KappaStatus::Proved,
                    reason: "purely periodic word: ω(s_P) = 1 for the period P".into(),
                    cdim: cd,
                };
            }
        }
        return KappaResult {
            value: KappaValue::Finite(d),
            certificate: Certificate::ShiftPeriod { d },
            status: KappaStatus::Proved,
            reason: "shift state: κ equals the primitive period of the tail".into(),
            cdim: cd,
        };
    }
    let cert = omega.flags().minimal_certificate.clone().or_else(|| {
        cfg.search_minimality
            .then(|| search_minimality_certificate(omega, cfg.max_level, tol))
            .flatten()
    });
    if let Some(u) = cert {
        if verify_minimality_certificate(omega, &u, tol) {
            if cd.is_stabilized() {
                return KappaResult {
                    value: KappaValue::Finite(cd.value),
                    certificate: Certificate::Minimal { u },
                    status: KappaStatus::Proved,
                    reason: "isometry u in O_n^+ with ω(u) = 1: minimal, κ = cdim".into(),
                    cdim: cd,
                };
            }
            return unresolved(
                cd,
                "minimal, but cdim did not stabilize within the level budget",
            );
        }
    }
    if let Some(pi) = omega.flags().properly_infinite.clone() {
        // the transported sequence a'_i = α_{g*}(a_i) satisfies
        // (ω∘α_g)(a'[l] a'[k]*) = ω(a[l] a[k]*): check on the base
        let rep = match omega.data() {
            StateData::Gauge { base, .. } if base.flags().properly_infinite.is_some() => {
                let bpi = base.flags().properly_infinite.clone().expect("checked");
                verify_properly_infinite(base, &bpi.seq, cfg.cutoff, bpi.proved, tol)
            }
            _ => verify_properly_infinite(omega, &pi.seq, cfg.cutoff, pi.proved, tol),
        };
        match rep.status {
            PiStatus::Proved => {
                return KappaResult {
                    value: KappaValue::Infinite,
                    certificate: Certificate::ProperlyInfinite {
                        seq: pi.seq,
                        cutoff: rep.cutoff,
                    },
                    status: KappaStatus::Proved,
                    reason: format!(
                        "ω(a[l] a[k]*) = δ_lk for all l, k (family argument; table checked to {})",
                        rep.cutoff
                    ),
                    cdim: cd,
                }
            }
            PiStatus::Evidence => {
                return KappaResult {
                    value: KappaValue::Infinite,
                    certificate: Certificate::ProperlyInfinite {
                        seq: pi.seq,
                        cutoff: rep.cutoff,
                    },
                    status: KappaStatus::Evidence { cutoff: rep.cutoff },
                    reason: format!("δ-table holds for l, k ≤ {}", rep.cutoff),
                    cdim: cd,
                }
            }
            PiStatus::Failed => {}
        }
    }
    match omega.data() {
        StateData::Sandwich(s) => {
            if let Some(src) = s.equivalence_to_base {
                let status = match src {
                    EquivalenceSource::Proved => KappaStatus::Proved,
                    EquivalenceSource::Asserted => KappaStatus::Asserted,
                };
                if let StateData::Cuntz { z } = s.base.data() {
                    return KappaResult {
                        value: KappaValue::Finite(1),
                        certificate: Certificate::EquivalentToCuntz { z: z.clone() },
                        status,
                        reason: "equivalent to a Cuntz state, whose κ is 1".into(),
                        cdim: cd,
                    };
                }
                let mut base = kappa(&s.base, cfg);
                if base.is_resolved() {
                    base.reason = format!("equivalent to the base state; {}", base.reason);
                    if src == EquivalenceSource::Asserted {
                        base.status = KappaStatus::Asserted;
                    }
                    base.cdim = cd;
                    return base;
                }
            }
            return unresolved(cd, "no certificate; supply the equivalence to resolve κ");
        }
        StateData::PrefixCode(p) => {
            if let CodeKind::GeometricProgression { k } = p.kind {
                if let Some(y) = inverse_hat(&p.z, p.n, k, eps(omega, tol)) {
                    return KappaResult {
                        value: KappaValue::Finite(1),
                        certificate: Certificate::EquivalentToCuntz { z: y },
                        status: KappaStatus::Proved,
                        reason: "z = ŷ: equivalent to the Cuntz state by y".into(),
                        cdim: cd,
                    };
                }
            }
        }
        StateData::Gauge { base, .. } => {
            let mut r = kappa(base, cfg);
            if r.is_resolved() {
                r.reason = format!("κ is gauge invariant; {}", r.reason);
                r.cdim = cd;
                return r;
            }
        }
        _ => {}
    }
    unresolved(cd, "no certificate applies")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equivalent => "Equivalent",
            Verdict::Inequivalent => "Inequivalent",
            Verdict::Unknown => "Unknown",
        })
    }
}

#[derive(Clone, Debug)]
pub struct EquivDecision {
    pub verdict: Verdict,
    /// Short name of the rule that decided the pair.
    pub rule: &'static str,
    pub reason: String,
}

impl EquivDecision {
    fn new(rule: &'static str, verdict: Verdict, reason: impl Into<String>) -> Self {
        EquivDecision {
            verdict,
            rule,
            reason: reason.into(),
        }
    }

    fn yes_no(rule: &'static str, b: bool, reason: impl Into<String>) -> Self {
        let v = if b {
            Verdict::Equivalent
        } else {
            Verdict::Inequivalent
        };
        EquivDecision::new(rule, v, reason)
    }
}

impl fmt::Display for EquivDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.verdict, self.rule)
    }
}

/// A classified representative of the equivalence class of a state.
#[derive(Clone, Debug)]
enum Canon {
    /// Sub-Cuntz state by a nonperiodic `z` of order `m`; Cuntz states are
    /// order 1.
    SubCuntz {
        m: usize,
        z: Vec<Scalar>,
    },
    GeometricProgression {
        k: usize,
        z: Vec<Scalar>,
    },
    InducedProduct {
        pre: Vec<Vec<Scalar>>,
        per: Vec<Vec<Scalar>>,
    },
    Shift(EventuallyPeriodicWord),
    Other,
}

fn canon(omega: &MomentFunctional, tol: f64) -> (Canon, Option<EquivalenceSource>) {
    match omega.data() {
        StateData::Cuntz { z } => (Canon::SubCuntz { m: 1, z: z.clone() }, None),
        StateData::PrefixCode(p) => match p.kind {
            CodeKind::SubCuntz { m } if p.unique() => (Canon::SubCuntz { m, z: p.z.clone() }, None),
            CodeKind::GeometricProgression { k } if k == 1 => (
                Canon::SubCuntz {
                    m: 1,
                    z: p.z.clone(),
                },
                None,
            ),
            CodeKind::GeometricProgression { k } if omega.flags().pure == Some(true) => {
                match inverse_hat(&p.z, p.n, k, tol) {
                    Some(y) => (Canon::SubCuntz { m: 1, z: y }, None),
                    None => (Canon::GeometricProgression { k, z: p.z.clone() }, None),
                }
            }
            _ => (Canon::Other, None),
        },
        StateData::InducedProduct { pre, per } => (
            Canon::InducedProduct {
                pre: pre.clone(),
                per: per.clone(),
            },
            None,
        ),
        StateData::Shift { word } => (Canon::Shift(word.clone()), None),
        StateData::Sandwich(s) => match s.equivalence_to_base {
            Some(src) => {
                let (c, inner) = canon(&s.base, tol);
                let src = if inner == Some(EquivalenceSource::Asserted) {
                    inner
                } else {
                    Some(src)
                };
                (c, src)
            }
            None => (Canon::Other, None),
        },
        _ => (Canon::Other, None),
    }
}

fn vec_eq(a: &[Scalar], b: &[Scalar], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, tol))
}

/// `z = y`, or `z = x_1 ⊗ x_2` and `y = x_2 ⊗ x_1`. With `z` of rank one
/// at split `q`, `x_2 ⊗ x_1` is `z` with its letter positions rotated by
/// `q`, independent of how the scalar is distributed between the factors.
pub fn tensor_conjugate(
    n: usize,
    m: usize,
    z: &[Scalar],
    m2: usize,
    y: &[Scalar],
    tol: &Tol,
) -> bool {
    if m != m2 {
        return false;
    }
    let e = if z.iter().chain(y).all(Scalar::is_exact) {
        0.0
    } else {
        tol.eq
    };
    if vec_eq(z, y, e) {
        return true;
    }
    for q in 1..m {
        let rows = n.pow(q as u32);
        let cols = n.pow((m - q) as u32);
        let mat: linalg::Mat = (0..rows)
            .map(|a| z[a * cols..(a + 1) * cols].to_vec())
            .collect();
        if linalg::rref(mat, tol.rank).1.len() != 1 {
            continue;
        }
        let rotated =
            (0..rows).all(|a| (0..cols).all(|b| y[b * rows + a].approx_eq(&z[a * cols + b], e)));
        if rotated {
            return true;
        }
    }
    false
}

fn seq_at<'a>(pre: &'a [Vec<Scalar>], per: &'a [Vec<Scalar>], l: usize) -> &'a [Scalar] {
    if l <= pre.len() {
        &pre[l - 1]
    } else {
        &per[(l - 1 - pre.len()) % per.len()]
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

type Seq<'a> = (&'a [Vec<Scalar>], &'a [Vec<Scalar>]);

/// `Σ_l (1 − |⟨z^(l) | y^(l+k)⟩|) < ∞` for eventually periodic data: the
/// terms are eventually periodic, so the series converges iff they vanish
/// over one joint period beyond both preperiods.
fn series_converges(z: Seq, y: Seq, k: usize, tol: f64) -> bool {
    let start = z.0.len().max(y.0.len()) + 1;
    let (pz, py) = (z.1.len(), y.1.len());
    let joint = pz / gcd(pz, py) * py;
    (start..start + joint).all(|l| {
        let ip = crate::scalar::inner(seq_at(z.0, z.1, l), seq_at(y.0, y.1, l + k));
        ip.norm_sqr().approx_eq(&Scalar::int(1), tol)
    })
}

fn induced_equivalent(z: Seq, y: Seq, tol: f64) -> bool {
    let kz = z.0.len() + z.1.len();
    let ky = y.0.len() + y.1.len();
    (0..=ky).any(|k| series_converges(z, y, k, tol))
        || (0..=kz).any(|k| series_converges(y, z, k, tol))
}

fn decide(a: &Canon, b: &Canon, n: usize, tol: &Tol, e: f64) -> Option<EquivDecision> {
    use Canon::*;
    Some(match (a, b) {
        (SubCuntz { m: 1, z }, SubCuntz { m: 1, z: y }) => EquivDecision::yes_no(
            "Cuntz parameters",
            vec_eq(z, y, e),
            "Cuntz states are equivalent iff their parameters coincide",
        ),
        (SubCuntz { m, z }, SubCuntz { m: m2, z: y }) => EquivDecision::yes_no(
            "sub-Cuntz conjugacy",
            tensor_conjugate(n, *m, z, *m2, y, tol),
            "sub-Cuntz states with nonperiodic parameters are equivalent iff the parameters are conjugate",
        ),
        (GeometricProgression { k, z }, GeometricProgression { k: k2, z: y }) if k == k2 => {
            EquivDecision::yes_no(
            "geometric progression parameters",
                vec_eq(z, y, e),
                "geometric progression states of equal order with |z_m| < 1 are equivalent iff z = y",
            )
        }
        (GeometricProgression { .. }, SubCuntz { m: 1, .. })
        | (SubCuntz { m: 1, .. }, GeometricProgression { .. }) => EquivDecision::new("geometric progression hat form", 
            Verdict::Inequivalent,
            "a geometric progression state is equivalent to the Cuntz state by y iff z = ŷ with |y_n| < 1",
        ),
        (Shift(x), Shift(y)) => EquivDecision::yes_no(
            "tail equivalence",
            tail_equivalent(x, y).unwrap_or(false),
            "shift states are equivalent iff the words are tail equivalent",
        ),
        (Shift(x), SubCuntz { .. }) => {
            // x ∼ P^∞ for its primitive period P, and ω_{P^∞} is the
            // sub-Cuntz state by e_P
            let p = x.per().clone();
            let c = SubCuntz {
                m: p.len(),
                z: crate::moments::basis_tensor(n, &p),
            };
            let mut d = decide(&c, b, n, tol, e)?;
            d.reason = format!("shift state is equivalent to the sub-Cuntz state by e_{p}; {}", d.reason);
            d
        }
        (SubCuntz { .. }, Shift(_)) => decide(b, a, n, tol, e)?,
        (InducedProduct { pre, per }, InducedProduct { pre: p2, per: q2 }) => EquivDecision::yes_no(
            "induced-product series",
            induced_equivalent((pre, per), (p2, q2), e),
            "induced product states: equivalent iff Σ(1 − |⟨z^(l)|y^(l+k)⟩|) < ∞ for some shift k",
        ),
        _ => return None,
    })
}

/// Equivalence of GNS representations, decided inside classified family
/// pairs and by purity or κ mismatch; everything else is Unknown.
pub fn equivalent(a: &MomentFunctional, b: &MomentFunctional, cfg: &Config) -> EquivDecision {
    if a.n() != b.n() {
        return EquivDecision::new(
            "alphabet mismatch",
            Verdict::Unknown,
            "states on different algebras",
        );
    }
    let e = eps(a, &cfg.tol).max(eps(b, &cfg.tol));
    let (ca, sa) = canon(a, e);
    let (cb, sb) = canon(b, e);
    if let Some(mut d) = decide(&ca, &cb, a.n(), &cfg.tol, e) {
        if sa == Some(EquivalenceSource::Asserted) || sb == Some(EquivalenceSource::Asserted) {
            d.reason = format!("{}; relies on a user-supplied equivalence", d.reason);
        }
        return d;
    }
    let (pa, pb) = (pure(a), pure(b));
    if pa.verdict != PureVerdict::Unknown
        && pb.verdict != PureVerdict::Unknown
        && pa.verdict != pb.verdict
    {
        return EquivDecision::new(
            "purity mismatch",
            Verdict::Inequivalent,
            "one state is pure and the other is not (irreducible vs reducible GNS representation)",
        );
    }
    let (ka, kb) = (kappa(a, cfg), kappa(b, cfg));
    let firm = |k: &KappaResult| matches!(k.status, KappaStatus::Proved | KappaStatus::Asserted);
    if ka.is_resolved() && kb.is_resolved() && firm(&ka) && firm(&kb) && ka.value != kb.value {
        return EquivDecision::new(
            "κ mismatch",
            Verdict::Inequivalent,
            format!(
                "κ differs ({} vs {}) and κ is an equivalence invariant",
                ka.value, kb.value
            ),
        );
    }
    EquivDecision::new(
        "outside classified families",
        Verdict::Unknown,
        "pair outside the classified families",
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PureVerdict {
    Pure,
    NotPure,
    Unknown,
}

impl fmt::Display for PureVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PureVerdict::Pure => "pure",
            PureVerdict::NotPure => "not pure",
            PureVerdict::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PureDecision {
    pub verdict: PureVerdict,
    pub reason: String,
}

impl PureDecision {
    pub fn as_option(&self) -> Option<bool> {
        match self.verdict {
            PureVerdict::Pure => Some(true),
            PureVerdict::NotPure => Some(false),
            PureVerdict::Unknown => None,
        }
    }
}

pub fn pure(omega: &MomentFunctional) -> PureDecision {
    let reason = match omega.data() {
        StateData::Cuntz { .. } => "Cuntz states are pure",
        StateData::PrefixCode(p) => match p.kind {
            CodeKind::SubCuntz { .. } if p.unique() => "sub-Cuntz state by a nonperiodic parameter",
            CodeKind::SubCuntz { .. } => {
                "periodic parameter: symmetric mixture of the sub-Cuntz states by the roots"
            }
            CodeKind::GeometricProgression { .. } => "geometric progression state with |z_m| < 1",
            CodeKind::General => "general prefix code",
        },
        StateData::InducedProduct { .. } => {
            "eventually periodic parameter is not aperiodic: the series at k = period vanishes"
        }
        StateData::Shift { .. } | StateData::LazyShift { .. } => {
            "vector state of an irreducible shift representation"
        }
        StateData::Grid => "irreducibility of the grid representation is not decided",
        StateData::Sandwich(_) => "vector state in the GNS space of the base state",
        StateData::Gauge { .. } => "gauge automorphisms preserve purity",
        StateData::Mixture { .. } => "convex combination of distinct states",
    };
    let verdict = match omega.flags().pure {
        Some(true) => PureVerdict::Pure,
        Some(false) => PureVerdict::NotPure,
        None => PureVerdict::Unknown,
    };
    let reason = if verdict == PureVerdict::Unknown {
        format!("undecided: {reason}")
    } else {
        reason.to_string()
    };
    PureDecision { verdict, reason }
}

/// κ(π) through the vector state of a catalog representation. For shift
/// representations three tail-equivalent basis vectors are sampled and must
/// agree.
pub fn kappa_rep(rep: &Representation, cfg: &Config) -> crate::Result<KappaResult> {
    match rep {
        Representation::Shift { word } => {
            let samples = [
                word.clone(),
                word.shift(1),
                word.prepend(&Word::letter(if word.letter(0) == 1 { 2 } else { 1 })),
            ];
            let results: Vec<KappaResult> = samples
                .iter()
                .map(|x| kappa(&make_shift(x.clone()), cfg))
                .collect();
            assert!(
                results.windows(2).all(|w| w[0].value == w[1].value),
                "κ depends on the chosen vector"
            );
            Ok(results.into_iter().next().expect("three samples"))
        }
        Representation::Grid { n } => Ok(kappa(&make_grid(*n), cfg)),
        Representation::Lazy { word } => Ok(kappa(&make_lazy_shift(word.clone()), cfg)),
    }
}

/// Powers index and κ of the endomorphism `φ_π = Σ π(s_i)(·)π(s_i)*`.
pub fn endo_invariants(rep: &Representation, cfg: &Config) -> crate::Result<(usize, KappaResult)> {
    Ok((rep.n(), kappa_rep(rep, cfg)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bucket {
    Finite(usize),
    Infinite { evidence: Option<usize> },
    Unresolved,
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Finite(d) => write!(f, "{d}"),
            Bucket::Infinite { evidence: None } => write!(f, "∞"),
            Bucket::Infinite { evidence: Some(c) } => write!(f, "∞ (evidence, cutoff {c})"),
            Bucket::Unresolved => write!(f, "unresolved"),
        }
    }
}

/// The κ-stratum a state falls in.
pub fn decompose_spectrum_bucket(k: &KappaResult) -> Bucket {
    match (&k.value, k.status) {
        (KappaValue::Finite(d), _) => Bucket::Finite(*d),
        (KappaValue::Infinite, KappaStatus::Evidence { cutoff }) => Bucket::Infinite {
            evidence: Some(cutoff),
        },
        (KappaValue::Infinite, _) => Bucket::Infinite { evidence: None },
        (KappaValue::Interval { .. }, _) => Bucket::Unresolved,
    }
}

/// Everything the tool can say about one state.
#[derive(Clone, Debug)]
pub struct StateReport {
    pub family: String,
    pub kappa: KappaResult,
    pub pure: PureDecision,
    pub bucket: Bucket,
    pub notes: Vec<String>,
}

impl StateReport {
    pub fn build(omega: &MomentFunctional, cfg: &Config) -> Self {
        let kappa = kappa(omega, cfg);
        let bucket = decompose_spectrum_bucket(&kappa);
        StateReport {
            family: omega.family().name().to_string(),
            pure: pure(omega),
            bucket,
            kappa,
            notes: omega.flags().notes.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        let bucket = match &self.bucket {
            Bucket::Finite(d) => json!(d),
            Bucket::Infinite { evidence: None } => json!("infinity"),
            Bucket::Infinite { evidence: Some(c) } => {
                json!(format!("infinity (evidence, cutoff {c})"))
            }
            Bucket::Unresolved => json!("unresolved"),
        };
        json!({
            "family": self.family,
            "cdim": self.kappa.cdim.to_json(),
            "kappa": self.kappa.to_json(),
            "pure": self.pure.as_option(),
            "pure_reason": self.pure.reason,
            "bucket": bucket,
            "notes": self.notes,
        })
    }
}
