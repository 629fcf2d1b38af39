//! Permutative representations: the shift representation on `ℓ²(Λ)`
//! restricted to a tail class, its lazily generated aperiodic variant, and
//! the grid representation on `ℓ²(N×Z)`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{schema, Error, Result};
use crate::scalar::{Mode, Scalar};
use crate::symalg::CuntzElement;
use crate::words::{EventuallyPeriodicWord, LazyPreset, LazyWord, Word, DEFAULT_HORIZON};

/// A basis vector `e_y`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasisKey {
    /// `e_y` for an eventually periodic `y`, in canonical form.
    Tail(EventuallyPeriodicWord),
    /// `e_{prefix · x[offset..]}` for the lazy reference word `x`. The prefix
    /// never ends with the letter `x[offset-1]`, so keys are unique.
    Lazy { prefix: Word, offset: usize },
    /// `e_{k,m}` of the grid representation, `k ≥ 1`.
    Grid { k: u128, m: i64 },
}

/// A finitely supported vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct StateVector {
    coeffs: BTreeMap<BasisKey, Scalar>,
}

impl StateVector {
    pub fn zero() -> Self {
        StateVector::default()
    }

    pub fn basis(key: BasisKey) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(key, Scalar::int(1));
        StateVector { coeffs }
    }

    pub fn coeffs(&self) -> &BTreeMap<BasisKey, Scalar> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn add_term(&mut self, key: BasisKey, c: Scalar) {
        let v = match self.coeffs.remove(&key) {
            Some(x) => x + c,
            None => c,
        };
        if !v.is_exact_zero() {
            self.coeffs.insert(key, v);
        }
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> StateVector {
        let mut out = StateVector::zero();
        for (k, x) in &self.coeffs {
            out.add_term(k.clone(), c * x);
        }
        out
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Scalar {
        let mut acc = Scalar::int(0);
        for (k, a) in &self.coeffs {
            if let Some(b) = other.coeffs.get(k) {
                acc = acc + a.conj() * b.clone();
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> Scalar {
        self.inner(self)
    }
}

/// An irreducible permutative representation from the catalog, together
/// with its reference vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// The shift representation on the tail class of `word`; reference `e_word`.
    Shift { word: EventuallyPeriodicWord },
    /// The tail class of an aperiodic preset word, known to a horizon.
    Lazy { word: LazyWord },
    /// The grid representation; reference `e_{1,0}`.
    Grid { n: usize },
}

impl Representation {
    pub fn n(&self) -> usize {
        match self {
            Representation::Shift { word } => word.n(),
            Representation::Lazy { word } => word.n(),
            Representation::Grid { n } => *n,
        }
    }

    pub fn reference(&self) -> StateVector {
        StateVector::basis(match self {
            Representation::Shift { word } => BasisKey::Tail(word.clone()),
            Representation::Lazy { .. } => BasisKey::Lazy {
                prefix: Word::empty(),
                offset: 0,
            },
            Representation::Grid { .. } => BasisKey::Grid { k: 1, m: 0 },
        })
    }

    /// Results derived from a lazy word are only verified up to its horizon.
    pub fn is_evidence_only(&self) -> bool {
        matches!(self, Representation::Lazy { .. })
    }

    pub fn from_json(v: &Value) -> Result<Representation> {
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| schema("kind", "missing representation kind"))?;
        match kind {
            "shift" => {
                let n = v.get("n").and_then(Value::as_u64).unwrap_or(2) as usize;
                let w = v.get("word").ok_or_else(|| schema("word", "missing"))?;
                let word = EventuallyPeriodicWord::from_json(n, w)?;
                Ok(Representation::Shift { word })
            }
            "grid" => {
                let n = v.get("n").and_then(Value::as_u64).unwrap_or(2) as usize;
                if n < 2 {
                    return Err(schema("n", "alphabet size must be at least 2"));
                }
                Ok(Representation::Grid { n })
            }
            "lazy" => {
                let preset: LazyPreset =
                    serde_json::from_value(v.get("preset").cloned().unwrap_or(json!("thue_morse")))
                        .map_err(|e| schema("preset", e.to_string()))?;
                let horizon = v
                    .get("horizon")
                    .and_then(Value::as_u64)
                    .map_or(DEFAULT_HORIZON, |h| h as usize);
                Ok(Representation::Lazy {
                    word: LazyWord::new(preset, horizon),
                })
            }
            other => Err(schema(
                "kind",
                format!("unknown representation kind {other:?}"),
            )),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Representation::Shift { word } => {
                json!({"kind": "shift", "n": word.n(), "word": word.to_json()})
            }
            Representation::Grid { n } => json!({"kind": "grid", "n": n}),
            Representation::Lazy { word } => json!({
                "kind": "lazy",
                "preset": word.preset(),
                "horizon": word.horizon(),
            }),
        }
    }

    fn apply_basis(&self, key: &BasisKey, i: u8, dagger: bool) -> Result<Option<BasisKey>> {
        let n = self.n();
        match (self, key) {
            (Representation::Shift { .. }, BasisKey::Tail(y)) => Ok(if dagger {
                y.strip_prefix(&Word::letter(i)).map(BasisKey::Tail)
            } else {
                Some(BasisKey::Tail(y.prepend(&Word::letter(i))))
            }),
            (Representation::Lazy { word }, BasisKey::Lazy { prefix, offset }) => {
                if dagger {
                    if let Some(&first) = prefix.letters().first() {
                        return Ok((first == i).then(|| BasisKey::Lazy {
                            prefix: Word::new(&prefix.letters()[1..]),
                            offset: *offset,
                        }));
                    }
                    let c = word
                        .letter(*offset)
                        .ok_or(Error::HorizonExceeded(word.horizon()))?;
                    Ok((c == i).then(|| BasisKey::Lazy {
                        prefix: Word::empty(),
                        offset: offset + 1,
                    }))
                } else if prefix.is_empty() && *offset > 0 && word.letter(offset - 1) == Some(i) {
                    Ok(Some(BasisKey::Lazy {
                        prefix: Word::empty(),
                        offset: offset - 1,
                    }))
                } else {
                    Ok(Some(BasisKey::Lazy {
                        prefix: Word::letter(i).concat(prefix),
                        offset: *offset,
                    }))
                }
            }
            (Representation::Grid { .. }, BasisKey::Grid { k, m }) => {
                let nn = n as u128;
                let i = i as u128;
                if dagger {
                    if (k - 1) % nn == i - 1 {
                        Ok(Some(BasisKey::Grid {
                            k: (k - 1) / nn + 1,
                            m: m - 1,
                        }))
                    } else {
                        Ok(None)
                    }
                } else {
                    let k2 = (k - 1)
                        .checked_mul(nn)
                        .and_then(|x| x.checked_add(i))
                        .ok_or(Error::Overflow)?;
                    Ok(Some(BasisKey::Grid { k: k2, m: m + 1 }))
                }
            }
            _ => Err(Error::NotInCatalog(
                "basis vector from another representation".into(),
            )),
        }
    }

    /// `π(s_i) v`, or `π(s_i)* v` when `dagger`.
    pub fn apply_generator(&self, v: &StateVector, i: u8, dagger: bool) -> Result<StateVector> {
        if i == 0 || i as usize > self.n() {
            return Err(Error::InvalidLetter {
                letter: i,
                n: self.n(),
            });
        }
        let mut out = StateVector::zero();
        for (k, c) in &v.coeffs {
            if let Some(k2) = self.apply_basis(k, i, dagger)? {
                out.add_term(k2, c.clone());
            }
        }
        Ok(out)
    }

    /// `π(s_J) v`.
    pub fn apply_word(&self, v: &StateVector, j: &Word) -> Result<StateVector> {
        let mut out = v.clone();
        for &c in j.letters().iter().rev() {
            out = self.apply_generator(&out, c, false)?;
        }
        Ok(out)
    }

    /// `π(s_J)* v`.
    pub fn apply_word_star(&self, v: &StateVector, j: &Word) -> Result<StateVector> {
        let mut out = v.clone();
        for &c in j.letters() {
            if out.is_zero() {
                break;
            }
            out = self.apply_generator(&out, c, true)?;
        }
        Ok(out)
    }

    /// `π(a) v` for a symbolic element.
    pub fn apply_element(&self, a: &CuntzElement, v: &StateVector) -> Result<StateVector> {
        let mut out = StateVector::zero();
        for (j, k, c) in a.iter() {
            let w = self.apply_word_star(v, k)?;
            if w.is_zero() {
                continue;
            }
            out = out.add(&self.apply_word(&w, j)?.scale(c));
        }
        Ok(out)
    }
}

/// Orthogonal (not normalized) basis of a span, by Gram–Schmidt without
/// square roots so that exact inputs stay exact.
#[derive(Clone, Debug, Default)]
pub struct OrthoBasis {
    vecs: Vec<StateVector>,
    norms: Vec<Scalar>,
}

impl OrthoBasis {
    pub fn vectors(&self) -> &[StateVector] {
        &self.vecs
    }

    pub fn dim(&self) -> usize {
        self.vecs.len()
    }

    /// `v − P v`, the component orthogonal to the span.
    pub fn residual(&self, v: &StateVector) -> StateVector {
        let mut r = v.clone();
        for (u, nu) in self.vecs.iter().zip(&self.norms) {
            let c = u.inner(&r).checked_div(nu).expect("nonzero basis vector");
            r = r.add(&u.scale(&(-c)));
        }
        r
    }

    /// Adds `v` if it leaves the span; returns the new orthogonal vector.
    pub fn push(&mut self, v: &StateVector, tol: f64) -> Option<StateVector> {
        let r = self.residual(v);
        let nr = r.norm_sqr();
        if nr.is_zero_tol(tol * tol) {
            return None;
        }
        self.vecs.push(r.clone());
        self.norms.push(nr);
        Some(r)
    }

    pub fn contains(&self, v: &StateVector, tol: f64) -> bool {
        self.residual(v).norm_sqr().is_zero_tol(tol * tol)
    }
}

fn span_of(m: &[StateVector], tol: f64) -> OrthoBasis {
    let mut b = OrthoBasis::default();
    for v in m {
        b.push(v, tol);
    }
    b
}

/// Normalizes an orthogonal family in float mode.
pub fn normalize_float(vs: &[StateVector]) -> Vec<StateVector> {
    vs.iter()
        .map(|v| {
            let n = v.norm_sqr().to_c64().re.sqrt();
            v.scale(&Scalar::float(1.0 / n, 0.0))
        })
        .collect()
}

/// Checks that `span(M)` is invariant under every `s_i*`.
pub fn check_invariant(rep: &Representation, m: &[StateVector], tol: f64) -> Result<OrthoBasis> {
    let basis = span_of(m, tol);
    for v in basis.vectors() {
        for i in 1..=rep.n() as u8 {
            let w = rep.apply_generator(v, i, true)?;
            if !basis.contains(&w, tol) {
                return Err(Error::NotInvariant);
            }
        }
    }
    Ok(basis)
}

/// Grading `H_0, …, H_D` of `span{s_J v : v ∈ M}`: `H_0 = span M` and
/// `H_k` is the new part contributed by words of length `k`. Each level is
/// returned as an orthogonal basis (orthonormal in float mode).
pub fn dhj_grading(
    rep: &Representation,
    m: &[StateVector],
    depth: usize,
    mode: Mode,
    tol: f64,
) -> Result<Vec<Vec<StateVector>>> {
    let base = check_invariant(rep, m, tol)?;
    let mut acc = base.clone();
    let mut levels = vec![base.vectors().to_vec()];
    let mut frontier: Vec<StateVector> = base.vectors().to_vec();
    for _ in 1..=depth {
        let mut next = Vec::new();
        let mut level = Vec::new();
        for v in &frontier {
            for i in 1..=rep.n() as u8 {
                let w = rep.apply_generator(v, i, false)?;
                if let Some(r) = acc.push(&w, tol) {
                    level.push(r);
                }
                next.push(w);
            }
        }
        levels.push(level);
        frontier = next;
    }
    if mode == Mode::Float {
        levels = levels.iter().map(|l| normalize_float(l)).collect();
    }
    Ok(levels)
}

/// `‖P_M a[l]* v − a[l]* v‖` for `l = 1..L`, where `a[l] = a_1 ⋯ a_l`
/// (the sequence is reused cyclically when shorter than `L`).
pub fn lemma_convergence_check(
    rep: &Representation,
    m: &[StateVector],
    a: &[CuntzElement],
    v: &StateVector,
    levels: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let basis = check_invariant(rep, m, tol)?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let mut w = v.clone();
    let mut out = Vec::with_capacity(levels);
    for l in 0..levels {
        let al = &a[l % a.len()];
        w = rep.apply_element(&al.adjoint(), &w)?;
        let r = basis.residual(&w);
        out.push(r.norm_sqr().to_c64().re.max(0.0).sqrt());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn epw(pre: &[u8], per: &[u8]) -> EventuallyPeriodicWord {
        EventuallyPeriodicWord::new(2, Word::new(pre), Word::new(per)).unwrap()
    }

    fn tail(pre: &[u8], per: &[u8]) -> StateVector {
        StateVector::basis(BasisKey::Tail(epw(pre, per)))
    }

    #[test]
    fn shift_generator_examples() {
        let rep = Representation::Shift {
            word: epw(&[], &[1, 2]),
        };
        let e = rep.reference();
        assert_eq!(
            rep.apply_generator(&e, 1, true).unwrap(),
            tail(&[], &[2, 1])
        );
        assert!(rep.apply_generator(&e, 2, true).unwrap().is_zero());
        assert_eq!(
            rep.apply_generator(&tail(&[], &[2, 1]), 1, false).unwrap(),
            e
        );
    }

    #[test]
    fn grid_generator_examples() {
        for n in 2..=3 {
            let rep = Representation::Grid { n };
            let e = rep.reference();
            let d = rep.apply_generator(&e, 1, true).unwrap();
            assert_eq!(d, StateVector::basis(BasisKey::Grid { k: 1, m: -1 }));
            let s2 = rep.apply_generator(&e, 2, false).unwrap();
            assert_eq!(s2, StateVector::basis(BasisKey::Grid { k: 2, m: 1 }));
            assert_eq!(rep.apply_generator(&s2, 2, true).unwrap(), e);
            assert!(rep.apply_generator(&s2, 1, true).unwrap().is_zero());
        }
    }

    fn random_vector(rng: &mut ChaCha8Rng, rep: &Representation) -> StateVector {
        let mut v = StateVector::zero();
        let e = rep.reference();
        for _ in 0..3 {
            let len = rng.gen_range(0..4);
            let j = Word((0..len).map(|_| rng.gen_range(1..=rep.n() as u8)).collect());
            let len = rng.gen_range(0..4);
            let k = Word((0..len).map(|_| rng.gen_range(1..=rep.n() as u8)).collect());
            let w = rep
                .apply_word(&rep.apply_word_star(&e, &k).unwrap(), &j)
                .unwrap();
            v = v.add(&w.scale(&Scalar::int(rng.gen_range(-3..=3))));
        }
        v
    }

    #[test]
    fn cuntz_relations_hold_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let reps = [
            Representation::Shift {
                word: epw(&[2], &[1, 1, 2]),
            },
            Representation::Grid { n: 3 },
            Representation::Lazy {
                word: LazyWord::new(LazyPreset::ThueMorse, 64),
            },
        ];
        for rep in &reps {
            for _ in 0..100 {
                let v = random_vector(&mut rng, rep);
                let mut sum = StateVector::zero();
                for i in 1..=rep.n() as u8 {
                    let si = rep.apply_generator(&v, i, false).unwrap();
                    for j in 1..=rep.n() as u8 {
                        let back = rep.apply_generator(&si, j, true).unwrap();
                        if i == j {
                            assert_eq!(back, v);
                        } else {
                            assert!(back.is_zero());
                        }
                    }
                    let p = rep
                        .apply_generator(&rep.apply_generator(&v, i, true).unwrap(), i, false)
                        .unwrap();
                    sum = sum.add(&p);
                }
                assert_eq!(sum, v);
            }
        }
    }

    #[test]
    fn lazy_keys_stay_canonical() {
        let rep = Representation::Lazy {
            word: LazyWord::new(LazyPreset::ThueMorse, 32),
        };
        let e = rep.reference();
        let x1 = rep.apply_generator(&e, 1, true).unwrap();
        assert_eq!(
            x1,
            StateVector::basis(BasisKey::Lazy {
                prefix: Word::empty(),
                offset: 1
            })
        );
        assert_eq!(rep.apply_generator(&x1, 1, false).unwrap(), e);
        assert!(rep.apply_generator(&e, 2, true).unwrap().is_zero());
    }

    #[test]
    fn tail_classes_are_orthogonal() {
        let x = tail(&[], &[1, 2]);
        let y = tail(&[], &[1]);
        let rep = Representation::Shift {
            word: epw(&[], &[1, 2]),
        };
        for j in Word::all_up_to(2, 3) {
            let a = rep.apply_word(&x, &j).unwrap();
            for k in Word::all_up_to(2, 3) {
                let b = rep.apply_word(&y, &k).unwrap();
                assert!(a.inner(&b).is_exact_zero());
            }
        }
    }

    #[test]
    fn dhj_constant_word() {
        let rep = Representation::Shift {
            word: epw(&[], &[1]),
        };
        let e = rep.reference();
        let levels = dhj_grading(&rep, &[e.clone()], 2, Mode::Exact, 1e-9).unwrap();
        assert_eq!(levels[0].len(), 1);
        // π(s_1) H_0 = H_0, which is not inside H_1
        let s1e = rep.apply_generator(&e, 1, false).unwrap();
        assert_eq!(s1e, e);
        assert!(levels[1].iter().all(|h| h.inner(&s1e).is_exact_zero()));
        assert_eq!(levels[1], vec![tail(&[2], &[1])]);
    }

    #[test]
    fn dhj_period_two() {
        let rep = Representation::Shift {
            word: epw(&[], &[1, 2]),
        };
        let m = vec![tail(&[], &[1, 2]), tail(&[], &[2, 1])];
        let levels = dhj_grading(&rep, &m, 3, Mode::Exact, 1e-9).unwrap();
        assert_eq!(levels[1].len(), 2);
        for a in &levels[0] {
            for b in &levels[1] {
                assert!(a.inner(b).is_exact_zero());
            }
        }
        // levels are pairwise orthogonal
        for (p, lp) in levels.iter().enumerate() {
            for lq in levels.iter().skip(p + 1) {
                for a in lp {
                    for b in lq {
                        assert!(a.inner(b).is_exact_zero());
                    }
                }
            }
        }
        let float = dhj_grading(&rep, &m, 1, Mode::Float, 1e-9).unwrap();
        for v in &float[1] {
            assert!((v.norm_sqr().to_c64().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dhj_level_zero_is_the_span_of_m() {
        // a redundant spanning list collapses to its span
        let rep = Representation::Shift {
            word: epw(&[], &[1, 2]),
        };
        let a = tail(&[], &[1, 2]);
        let b = tail(&[], &[2, 1]);
        let m = vec![a.clone(), b.clone(), a.add(&b)];
        let levels = dhj_grading(&rep, &m, 0, Mode::Exact, 1e-9).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].len(), 2);
    }

    #[test]
    fn dhj_rejects_non_invariant_subspace() {
        let rep = Representation::Grid { n: 2 };
        let e = rep.reference();
        assert_eq!(
            dhj_grading(&rep, &[e], 1, Mode::Exact, 1e-9),
            Err(Error::NotInvariant)
        );
    }

    #[test]
    fn lemma_convergence_examples() {
        let rep = Representation::Shift {
            word: epw(&[], &[1]),
        };
        let e = rep.reference();
        let a = vec![CuntzElement::s(2, 1)];
        let v = rep.apply_word(&e, &Word::new([1, 2])).unwrap();
        let seq = lemma_convergence_check(&rep, &[e.clone()], &a, &v, 4, 1e-9).unwrap();
        assert_eq!(seq[0], 1.0);
        assert_eq!(&seq[1..], &[0.0, 0.0, 0.0]);
        let inside = lemma_convergence_check(&rep, &[e.clone()], &a, &e, 4, 1e-9).unwrap();
        assert!(inside.iter().all(|&x| x == 0.0));
        let grid = Representation::Grid { n: 2 };
        assert_eq!(
            lemma_convergence_check(&grid, &[grid.reference()], &a, &grid.reference(), 3, 1e-9),
            Err(Error::NotInvariant)
        );
    }

    #[test]
    fn representation_json() {
        let r = Representation::from_json(&json!({"kind": "grid", "n": 2})).unwrap();
        assert_eq!(r, Representation::Grid { n: 2 });
        let s = Representation::from_json(
            &json!({"kind": "shift", "word": {"pre": [], "per": [1, 2]}}),
        )
        .unwrap();
        assert_eq!(Representation::from_json(&s.to_json()).unwrap(), s);
        let l = Representation::from_json(
            &json!({"kind": "lazy", "preset": "thue_morse", "horizon": 64}),
        )
        .unwrap();
        assert!(l.is_evidence_only());
        assert!(Representation::from_json(&json!({"kind": "torus"})).is_err());
    }
}
