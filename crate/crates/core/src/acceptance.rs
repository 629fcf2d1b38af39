//! The acceptance suite: ten numbered criteria, each a self-contained
//! check returning a pass/fail line. Shared by the `acceptance` test target
//! and `cuntzlab selftest`.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;

use crate::classify::{
    cdim, equivalent, kappa, search_minimality_certificate, verify_minimality_certificate,
    verify_properly_infinite, CdimStatus, Certificate, Config, KappaStatus, KappaValue, PiStatus,
    Verdict,
};
use crate::fcs::level_rank;
use crate::moments::{
    basis_tensor, consistency_violation, hat, make_cuntz, make_geometric_progression, make_grid,
    make_induced_product, make_shift, make_sub_cuntz, positivity_check, rho_c, transform_gauge,
    transform_sandwich, transform_sandwich_dyadic, MomentFunctional,
};
use crate::random::{
    random_exact_phase, random_exact_unit_vector, random_exact_unitary, rng_from_env,
};
use crate::scalar::{Scalar, Tol};
use crate::symalg::CuntzElement;
use crate::words::{primitive_root, EventuallyPeriodicWord, Word};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {:>2} [{tag}] {}: {}",
            self.id, self.title, self.detail
        )
    }
}

pub const COUNT: usize = 10;

const TITLES: [&str; COUNT] = [
    "Cuntz baseline",
    "pure but not minimal",
    "minimal-model non-uniqueness",
    "κ = 2 pair",
    "continuum family",
    "geometric progression",
    "properly infinite",
    "dyadic sandwich state",
    "shift dictionary",
    "property suites",
];

/// Collects failures; the criterion passes when none were recorded.
struct Check {
    failures: Vec<String>,
    facts: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: Vec::new(),
            facts: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn fact(&mut self, s: impl Into<String>) {
        self.facts.push(s.into());
    }

    fn finish(self, id: usize) -> Outcome {
        let passed = self.failures.is_empty();
        let mut parts = self.facts;
        if !passed {
            let shown: Vec<String> = self.failures.iter().take(3).cloned().collect();
            let more = self.failures.len().saturating_sub(3);
            let mut s = format!("failed: {}", shown.join("; "));
            if more > 0 {
                s.push_str(&format!(" (+{more} more)"));
            }
            parts.push(s);
        }
        Outcome {
            id,
            title: TITLES[id - 1],
            passed,
            detail: parts.join("; "),
        }
    }
}

pub fn run(id: usize) -> Outcome {
    match id {
        1 => cuntz_baseline(),
        2 => pure_not_minimal(),
        3 => minimal_model_non_uniqueness(),
        4 => kappa_two_pair(),
        5 => continuum_family(),
        6 => geometric_progression(),
        7 => properly_infinite(),
        8 => dyadic_sandwich(),
        9 => shift_dictionary(),
        10 => property_suites(),
        _ => panic!("no criterion {id}"),
    }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=COUNT).map(run).collect()
}

fn cfg() -> Config {
    Config::default()
}

fn e() -> Word {
    Word::empty()
}

fn w(v: &[u8]) -> Word {
    Word::new(v)
}

fn cuntz_baseline() -> Outcome {
    let mut c = Check::new();
    let mut rng = rng_from_env(1);
    let tol = Tol::default();
    for i in 0..20 {
        let n = 2 + i % 2;
        let z = random_exact_unit_vector(&mut rng, n);
        let om = make_cuntz(&z).expect("unit vector");
        let r = cdim(&om, 8, &tol);
        c.expect(r.value == 1 && r.status == CdimStatus::Stabilized, || {
            format!("z #{i}: {r}")
        });
    }
    c.fact("20 exact random unit vectors, n ∈ {2,3}: cdim = 1, stabilized");
    c.finish(1)
}

fn sandwich_s2(assume: bool) -> MomentFunctional {
    let base = make_cuntz(&[Scalar::int(1), Scalar::int(0)]).expect("unit");
    transform_sandwich(&base, &[(Scalar::int(1), CuntzElement::s(2, 2))], assume)
        .expect("ω(s_2* s_2) = 1")
}

fn pure_not_minimal() -> Outcome {
    let mut c = Check::new();
    let om = sandwich_s2(false);
    let k = kappa(&om, &cfg());
    c.expect(k.cdim.value == 2 && k.cdim.is_stabilized(), || {
        format!("{}", k.cdim)
    });
    c.expect(
        k.value == KappaValue::Interval { lo: 1, hi: Some(2) }
            && k.status == KappaStatus::Unresolved,
        || format!("without the equivalence: {k}"),
    );
    c.fact(format!("without the equivalence: {k}"));
    let k = kappa(&sandwich_s2(true), &cfg());
    c.expect(
        k.value == KappaValue::Finite(1)
            && matches!(k.certificate, Certificate::EquivalentToCuntz { .. }),
        || format!("with the equivalence: {k}"),
    );
    c.fact(format!("with the supplied equivalence: {k}"));
    c.finish(2)
}

fn minimal_model_non_uniqueness() -> Outcome {
    let mut c = Check::new();
    let a = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[1, 2]))).expect("unit");
    let b = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[2, 1]))).expect("unit");
    for (name, om) in [("ω", &a), ("ω′", &b)] {
        let k = kappa(om, &cfg());
        c.expect(
            matches!(k.certificate, Certificate::Minimal { .. })
                && k.cdim.value == 2
                && k.cdim.is_stabilized(),
            || format!("{name}: {k}"),
        );
    }
    let d = equivalent(&a, &b, &cfg());
    c.expect(d.verdict == Verdict::Equivalent, || {
        format!("equivalence: {d}")
    });
    let v = b.eval(&w(&[1, 2]), &e());
    c.expect(v == Scalar::int(0) && v.is_exact(), || {
        format!("ω′(s_1 s_2) = {v}")
    });
    c.fact(format!("both Minimal with cdim 2; {d}; ω′(s_1 s_2) = {v}"));
    c.finish(3)
}

fn kappa_two_pair() -> Outcome {
    let mut c = Check::new();
    let h = Scalar::inv_sqrt2();
    let a = make_sub_cuntz(2, 2, &basis_tensor(2, &w(&[1, 2]))).expect("unit");
    let b = make_sub_cuntz(2, 2, &[h.clone(), h, Scalar::int(0), Scalar::int(0)]).expect("unit");
    for (name, om) in [("ω", &a), ("ω′", &b)] {
        let k = kappa(om, &cfg());
        c.expect(
            k.value == KappaValue::Finite(2) && k.cdim.value == 2,
            || format!("{name}: {k}"),
        );
        c.fact(format!("{name}: {k}"));
    }
    let d = equivalent(&a, &b, &cfg());
    c.expect(d.verdict == Verdict::Inequivalent, || {
        format!("equivalence: {d}")
    });
    c.fact(format!("{}", d.verdict));
    c.finish(4)
}

/// Eight distinct unit-modulus Gaussian rationals.
fn eight_phases(rng: &mut impl Rng) -> Vec<Scalar> {
    let mut out: Vec<Scalar> = Vec::new();
    while out.len() < 8 {
        let p = random_exact_phase(rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn continuum_family() -> Outcome {
    let mut c = Check::new();
    let mut rng = rng_from_env(5);
    let tol = Tol::default();
    for d in 2..=5 {
        let states: Vec<MomentFunctional> = eight_phases(&mut rng)
            .iter()
            .map(|p| rho_c(2, d, p).expect("phase"))
            .collect();
        for (i, s) in states.iter().enumerate() {
            let r = cdim(s, 8, &tol);
            c.expect(r.value == d && r.is_stabilized(), || {
                format!("d = {d}, phase #{i}: {r}")
            });
        }
        for i in 0..states.len() {
            for j in i + 1..states.len() {
                let v = equivalent(&states[i], &states[j], &cfg()).verdict;
                c.expect(v == Verdict::Inequivalent, || {
                    format!("d = {d}: pair ({i},{j}) gave {v}")
                });
            }
        }
    }
    c.fact("d = 2..5, 8 phases each: cdim = d, all 28 pairs per d Inequivalent");
    c.finish(5)
}

fn geometric_progression() -> Outcome {
    let mut c = Check::new();
    let mut rng = rng_from_env(6);
    let tol = Tol::default();
    let one = Scalar::int(1);
    let mut sampled = 0;
    let mut max_cdim = 0;
    while sampled < 10 {
        let z = random_exact_unit_vector(&mut rng, 4);
        if z[3].norm_sqr() == one {
            continue;
        }
        sampled += 1;
        let om = make_geometric_progression(2, 3, &z).expect("unit");
        let r = cdim(&om, 8, &tol);
        max_cdim = max_cdim.max(r.value);
        c.expect(r.value <= 3 && r.is_stabilized(), || {
            format!("z #{sampled}: {r}")
        });
        let u = om.flags().minimal_certificate.clone();
        c.expect(
            u.is_some_and(|u| verify_minimality_certificate(&om, &u, &tol)),
            || format!("z #{sampled}: minimal certificate did not verify"),
        );
    }
    let mut hats = 0;
    while hats < 5 {
        let y = random_exact_unit_vector(&mut rng, 2);
        if y[1].norm_sqr() == one {
            continue;
        }
        hats += 1;
        let om = make_geometric_progression(2, 3, &hat(&y, 3)).expect("ŷ is a unit vector");
        let r = cdim(&om, 8, &tol);
        c.expect(r.value == 1 && r.is_stabilized(), || {
            format!("ŷ #{hats}: {r}")
        });
    }
    c.fact(format!(
        "10 random z: cdim ≤ 3 (max {max_cdim}), certificates verify; 5 hat-form states: cdim = 1"
    ));
    c.finish(6)
}

fn properly_infinite() -> Outcome {
    let mut c = Check::new();
    let tol = Tol::default();
    let grid = make_grid(2);
    let pi = grid.flags().properly_infinite.clone().expect("grid flag");
    let r = verify_properly_infinite(&grid, &pi.seq, 12, pi.proved, &tol);
    c.expect(r.status == PiStatus::Proved && r.cutoff == 12, || {
        format!("grid: {:?} at cutoff {}", r.status, r.cutoff)
    });
    let k = kappa(&grid, &cfg());
    c.expect(
        k.value == KappaValue::Infinite && k.status == KappaStatus::Proved,
        || format!("grid: {k}"),
    );
    let mut rng = rng_from_env(7);
    let mut cutoffs = Vec::new();
    for i in 0..5 {
        let pre: Vec<Vec<Scalar>> = (0..rng.gen_range(0..=2))
            .map(|_| random_exact_unit_vector(&mut rng, 2))
            .collect();
        let per: Vec<Vec<Scalar>> = (0..rng.gen_range(1..=3))
            .map(|_| random_exact_unit_vector(&mut rng, 2))
            .collect();
        let om = make_induced_product(&pre, &per).expect("unit vectors");
        let k = kappa(&om, &cfg());
        if let Certificate::ProperlyInfinite { cutoff, .. } = &k.certificate {
            cutoffs.push(*cutoff);
        }
        c.expect(
            k.value == KappaValue::Infinite && k.status == KappaStatus::Proved,
            || format!("sequence #{i}: {k}"),
        );
    }
    c.fact(format!(
        "grid δ-table to 12; induced-product δ-tables to {cutoffs:?} (term budget); κ = ∞ proved for all"
    ));
    c.finish(7)
}

fn dyadic_sandwich() -> Outcome {
    let mut c = Check::new();
    let tol = Tol::default();
    let base = make_cuntz(&[Scalar::int(1), Scalar::int(0)]).expect("unit");
    let om = transform_sandwich_dyadic(&base).expect("Cuntz e_1 base");
    let k = kappa(
        &om,
        &Config {
            max_level: 6,
            ..cfg()
        },
    );
    c.expect(
        k.value == KappaValue::Finite(1)
            && k.status == KappaStatus::Proved
            && matches!(k.certificate, Certificate::EquivalentToCuntz { .. }),
        || format!("{k}"),
    );
    c.fact(format!("{k}"));
    let mut full = Vec::new();
    for l in 1..=6 {
        let (r, _) = level_rank(&om, l, &tol);
        full.push(r);
        c.expect(r == l + 1, || {
            format!("level {l}: Gram rank {r}, expected {}", l + 1)
        });
    }
    // ranks of the orthogonal system {Ω} ∪ {w_{2^{l-1}1} : l ≤ L}
    let sub: Vec<usize> = (1..=6)
        .map(|l| {
            let mut words = vec![Word::empty()];
            words.extend((1..=l).map(|i| {
                let mut v = vec![2u8; i - 1];
                v.push(1);
                Word::new(v)
            }));
            let g = om.gram(&words);
            crate::linalg::pivoted_cholesky(words.len(), |a, b| g[a][b].clone(), om.mode(), &tol)
                .pivots
                .len()
        })
        .collect();
    c.fact(format!(
        "full level-L Gram ranks L = 1..6: {full:?}; orthogonal-system ranks: {sub:?}"
    ));
    c.finish(8)
}

/// All canonical eventually periodic words over `n` letters with
/// `|pre| ≤ max_pre`, `|per| ≤ max_per`.
pub fn canonical_words(n: usize, max_pre: usize, max_per: usize) -> Vec<EventuallyPeriodicWord> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for per in (1..=max_per).flat_map(|l| Word::all_of_length(n, l)) {
        if primitive_root(&per).map(|(_, k)| k) != Ok(1) {
            continue;
        }
        for pre in Word::all_up_to(n, max_pre) {
            let x = EventuallyPeriodicWord::new(n, pre, per.clone()).expect("valid word");
            if seen.insert((x.pre().clone(), x.per().clone())) {
                out.push(x);
            }
        }
    }
    out
}

fn shift_dictionary() -> Outcome {
    let mut c = Check::new();
    let tol = Tol::default();
    let words = canonical_words(2, 2, 4);
    let mut minimal = 0;
    for x in &words {
        let om = make_shift(x.clone());
        let k = kappa(&om, &cfg());
        let count = x.pre().len() + x.per().len();
        c.expect(k.cdim.value == count && k.cdim.is_stabilized(), || {
            format!("{x:?}: {}", k.cdim)
        });
        c.expect(k.value == KappaValue::Finite(x.per().len()), || {
            format!("{x:?}: {k}")
        });
        let found = search_minimality_certificate(&om, 8, &tol);
        c.expect(found.is_some() == x.is_purely_periodic(), || {
            format!("{x:?}: certificate found = {}", found.is_some())
        });
        minimal += usize::from(found.is_some());
    }
    c.fact(format!(
        "{} words: cdim = |pre| + |per|, κ = |per|, {} minimal (exactly the purely periodic ones)",
        words.len(),
        minimal
    ));
    c.finish(9)
}

fn tensor_power(x: &[Scalar], p: usize) -> Vec<Scalar> {
    let mut z = vec![Scalar::int(1)];
    for _ in 0..p {
        z = z
            .iter()
            .flat_map(|a| x.iter().map(move |b| a * b))
            .collect();
    }
    z
}

/// One representative per family used by the property suites.
pub fn catalog(rng: &mut impl Rng) -> Vec<(&'static str, MomentFunctional)> {
    let h = Scalar::inv_sqrt2();
    let mut z4 = random_exact_unit_vector(rng, 4);
    while z4[3].norm_sqr() == Scalar::int(1) {
        z4 = random_exact_unit_vector(rng, 4);
    }
    let x = EventuallyPeriodicWord::new(2, w(&[2]), w(&[1, 1, 2])).expect("valid word");
    vec![
        (
            "cuntz",
            make_cuntz(&random_exact_unit_vector(rng, 2)).expect("unit"),
        ),
        (
            "sub_cuntz",
            make_sub_cuntz(2, 2, &[h.clone(), Scalar::int(0), Scalar::int(0), h]).expect("unit"),
        ),
        (
            "geometric_progression",
            make_geometric_progression(2, 3, &z4).expect("unit"),
        ),
        (
            "rho_c",
            rho_c(2, 3, &random_exact_phase(rng)).expect("phase"),
        ),
        (
            "induced_product",
            make_induced_product(
                &[random_exact_unit_vector(rng, 2)],
                &[random_exact_unit_vector(rng, 2)],
            )
            .expect("unit"),
        ),
        ("shift", make_shift(x)),
        ("grid", make_grid(2)),
        ("sandwich", sandwich_s2(false)),
    ]
}

fn property_suites() -> Outcome {
    let mut c = Check::new();
    let tol = Tol::default();
    let mut rng = rng_from_env(10);
    let fam = catalog(&mut rng);
    // moment-functional invariants
    for (name, om) in &fam {
        if let Some(v) = consistency_violation(om, 3) {
            c.expect(false, || format!("{name}: {v}"));
        }
        let p = positivity_check(om, 3);
        c.expect(p.psd, || {
            format!("{name}: Gram not PSD (min eigenvalue {:e})", p.min_eig)
        });
    }
    // gauge invariance of level ranks and κ
    let small = Config {
        max_level: 3,
        cutoff: 4,
        ..cfg()
    };
    for (name, om) in &fam {
        let ranks: Vec<usize> = (0..=3).map(|l| level_rank(om, l, &tol).0).collect();
        let k = kappa(om, &small);
        for t in 0..10 {
            let g = random_exact_unitary(&mut rng, 2);
            let og = transform_gauge(om, &g).expect("unitary");
            let rg: Vec<usize> = (0..=3).map(|l| level_rank(&og, l, &tol).0).collect();
            c.expect(rg == ranks, || {
                format!("{name}, unitary #{t}: ranks {rg:?} vs {ranks:?}")
            });
            let kg = kappa(&og, &small);
            c.expect(kg.value == k.value, || {
                format!("{name}, unitary #{t}: κ {} vs {}", kg.value, k.value)
            });
        }
    }
    // basis-tensor sub-Cuntz states against shift states
    let mut compared = 0;
    for m in 1..=3 {
        for j in Word::all_of_length(2, m) {
            if primitive_root(&j).map(|(_, k)| k) != Ok(1) {
                continue;
            }
            let sc = make_sub_cuntz(2, m, &basis_tensor(2, &j)).expect("unit");
            let sh = make_shift(EventuallyPeriodicWord::periodic(2, j.clone()).expect("valid"));
            let words = Word::all_up_to(2, 2 * m);
            for a in &words {
                for b in &words {
                    let (u, v) = (sc.eval(a, b), sh.eval(a, b));
                    c.expect(u == v, || format!("e_{j}: ({a}, {b}) gives {u} vs {v}"));
                    compared += 1;
                }
            }
        }
    }
    // solution-space dimension for p-th tensor powers
    let z2 = tensor_power(&basis_tensor(2, &w(&[1, 2])), 2);
    let z3 = tensor_power(&random_exact_unit_vector(&mut rng, 2), 3);
    let mut dims = Vec::new();
    for (p, m, z) in [(2usize, 4usize, z2), (3, 3, z3)] {
        let om = make_sub_cuntz(2, m, &z).expect("unit");
        let d = om.prefix_code().expect("prefix code").solution_dim;
        dims.push(d);
        c.expect(d == p, || format!("x^⊗{p}: solution_dim {d}"));
    }
    c.fact(format!(
        "{} families: Hermitian, consistent and PSD to level 3; 10 unitaries each preserve ranks and κ; {compared} sub-Cuntz/shift moments agree; solution_dim for p = 2, 3: {dims:?}",
        fam.len()
    ));
    c.finish(10)
}
