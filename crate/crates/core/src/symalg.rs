//! The dense *-subalgebra of O_n spanned by monomials `s_J s_K*`.
//!
//! Elements are kept in a unique normal form. Monomials sharing a root
//! `(J0, K0)` (last letters differ, or one side empty) form a tree under the
//! Cuntz relation `s_J s_K* = Σ_i s_{Ji} s_{Ki}*`; inside each tree the
//! coefficients are pushed down to disjoint leaves and then complete sibling
//! sets with equal coefficients are merged back up as far as possible.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{schema, Error, Result};
use crate::linalg::{is_unitary, Mat};
use crate::scalar::{Mode, Scalar, DEFAULT_EPS};
use crate::words::Word;

/// Normal form of `s_J* s_K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    /// `s_{K'}` where `K = J·K'`, `K'` nonempty.
    Monomial(Word),
    /// `s_{J'}*` where `J = K·J'`, `J'` nonempty.
    Starred(Word),
    Identity,
    Zero,
}

pub fn reduce_starred_pair(j: &Word, k: &Word) -> Reduced {
    if j == k {
        Reduced::Identity
    } else if let Some(rest) = k.strip_prefix(j) {
        Reduced::Monomial(rest)
    } else if let Some(rest) = j.strip_prefix(k) {
        Reduced::Starred(rest)
    } else {
        Reduced::Zero
    }
}

/// A finite combination `Σ c_{J,K} s_J s_K*` in normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct CuntzElement {
    n: usize,
    terms: BTreeMap<(Word, Word), Scalar>,
}

fn split_root(j: &Word, k: &Word) -> (Word, Word, Word) {
    let (a, b) = (j.letters(), k.letters());
    let mut s = 0;
    while s < a.len() && s < b.len() && a[a.len() - 1 - s] == b[b.len() - 1 - s] {
        s += 1;
    }
    (
        Word::new(&a[..a.len() - s]),
        Word::new(&b[..b.len() - s]),
        Word::new(&a[a.len() - s..]),
    )
}

fn has_descendant(tree: &BTreeMap<Word, Scalar>, w: &Word) -> bool {
    tree.range(w.clone()..)
        .skip(1)
        .next()
        .is_some_and(|(x, _)| x.starts_with(w))
}

fn normalize_tree(n: usize, mut tree: BTreeMap<Word, Scalar>, tol: f64) -> BTreeMap<Word, Scalar> {
    // push internal nodes down to their children
    loop {
        let internal = tree
            .keys()
            .filter(|w| has_descendant(&tree, w))
            .min_by(|a, b| a.shortlex_cmp(b))
            .cloned();
        let Some(w) = internal else { break };
        let c = tree.remove(&w).expect("present");
        for i in 1..=n as u8 {
            let child = w.push(i);
            let cur = tree.remove(&child);
            let v = match cur {
                Some(x) => x + c.clone(),
                None => c.clone(),
            };
            tree.insert(child, v);
        }
    }
    tree.retain(|_, c| !c.is_zero_tol(tol));
    // merge complete sibling sets with equal coefficients, deepest first
    loop {
        let mut merged = false;
        let mut parents: Vec<Word> = tree
            .keys()
            .filter(|w| !w.is_empty())
            .map(|w| Word::new(&w.letters()[..w.len() - 1]))
            .collect();
        parents.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        parents.dedup();
        for p in parents {
            let kids: Vec<Word> = (1..=n as u8).map(|i| p.push(i)).collect();
            let Some(c0) = tree.get(&kids[0]).cloned() else {
                continue;
            };
            let all_equal = kids.iter().all(|k| {
                tree.get(k).is_some_and(|c| c.approx_eq(&c0, tol)) && !has_descendant(&tree, k)
            });
            if all_equal {
                for k in &kids {
                    tree.remove(k);
                }
                tree.insert(p, c0);
                merged = true;
                break;
            }
        }
        if !merged {
            break;
        }
    }
    tree
}

impl CuntzElement {
    pub fn zero(n: usize) -> Self {
        CuntzElement {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::monomial(n, Word::empty(), Word::empty(), Scalar::int(1))
    }

    /// `c · s_J s_K*`.
    pub fn monomial(n: usize, j: Word, k: Word, c: Scalar) -> Self {
        Self::from_terms(n, vec![(j, k, c)])
    }

    /// The generator `s_i`.
    pub fn s(n: usize, i: u8) -> Self {
        Self::monomial(n, Word::letter(i), Word::empty(), Scalar::int(1))
    }

    /// `Σ_W z_W s_W`.
    pub fn creation_sum(n: usize, terms: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        Self::from_terms(n, terms.into_iter().map(|(w, c)| (w, Word::empty(), c)))
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Word, Word, Scalar)>) -> Self {
        Self::from_terms_tol(n, terms, DEFAULT_EPS)
    }

    pub fn from_terms_tol(
        n: usize,
        terms: impl IntoIterator<Item = (Word, Word, Scalar)>,
        tol: f64,
    ) -> Self {
        let mut roots: BTreeMap<(Word, Word), BTreeMap<Word, Scalar>> = BTreeMap::new();
        for (j, k, c) in terms {
            let (j0, k0, w) = split_root(&j, &k);
            let tree = roots.entry((j0, k0)).or_default();
            let v = match tree.remove(&w) {
                Some(x) => x + c,
                None => c,
            };
            tree.insert(w, v);
        }
        let mut out = BTreeMap::new();
        for ((j0, k0), tree) in roots {
            for (w, c) in normalize_tree(n, tree, tol) {
                out.insert((j0.concat(&w), k0.concat(&w)), c);
            }
        }
        CuntzElement { n, terms: out }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(Word, Word), Scalar> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Word, &Scalar)> {
        self.terms.iter().map(|((j, k), c)| (j, k, c))
    }

    pub fn mode(&self) -> Mode {
        crate::scalar::common_mode(self.terms.values())
    }

    pub fn to_mode(&self, mode: Mode) -> CuntzElement {
        CuntzElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.to_mode(mode)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn check_alphabet(&self, other: &CuntzElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::AlphabetMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &CuntzElement) -> Result<CuntzElement> {
        self.check_alphabet(other)?;
        Ok(Self::from_terms(
            self.n,
            self.iter()
                .chain(other.iter())
                .map(|(j, k, c)| (j.clone(), k.clone(), c.clone())),
        ))
    }

    pub fn sub(&self, other: &CuntzElement) -> Result<CuntzElement> {
        self.add(&other.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> CuntzElement {
        Self::from_terms(
            self.n,
            self.iter().map(|(j, k, x)| (j.clone(), k.clone(), c * x)),
        )
    }

    pub fn multiply(&self, other: &CuntzElement) -> Result<CuntzElement> {
        self.check_alphabet(other)?;
        let mut out = Vec::new();
        for (j, k, a) in self.iter() {
            for (l, m, b) in other.iter() {
                let c = a * b;
                match reduce_starred_pair(k, l) {
                    Reduced::Identity => out.push((j.clone(), m.clone(), c)),
                    Reduced::Monomial(l2) => out.push((j.concat(&l2), m.clone(), c)),
                    Reduced::Starred(k2) => out.push((j.clone(), m.concat(&k2), c)),
                    Reduced::Zero => {}
                }
            }
        }
        Ok(Self::from_terms(self.n, out))
    }

    pub fn adjoint(&self) -> CuntzElement {
        Self::from_terms(
            self.n,
            self.iter()
                .map(|(j, k, c)| (k.clone(), j.clone(), c.conj())),
        )
    }

    /// Equality of normal forms, coefficientwise within `tol`.
    pub fn approx_eq(&self, other: &CuntzElement, tol: f64) -> bool {
        self.n == other.n
            && self
                .sub(other)
                .is_ok_and(|d| d.iter().all(|(_, _, c)| c.is_zero_tol(tol)))
    }

    pub fn in_plus(&self) -> bool {
        !self.terms.is_empty() && self.iter().all(|(j, k, _)| k.is_empty() && !j.is_empty())
    }

    /// Maximum creation length in the element.
    pub fn max_len(&self) -> usize {
        self.iter()
            .map(|(j, k, _)| j.len().max(k.len()))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .iter()
            .map(|(j, k, c)| {
                let [re, im] = c.to_pair();
                let mut t = json!({"J": j.letters(), "K": k.letters(), "re": re, "im": im});
                if c.is_exact() {
                    t["exact"] = json!(c.render());
                }
                t
            })
            .collect();
        json!({"n": self.n, "terms": terms})
    }

    pub fn from_json(v: &Value) -> Result<CuntzElement> {
        let n = v
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| schema("n", "missing alphabet size"))? as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| schema("terms", "expected an array"))?;
        let mut out = Vec::new();
        for (idx, t) in terms.iter().enumerate() {
            let word = |key: &str| -> Result<Word> {
                let w: Vec<u8> =
                    serde_json::from_value(t.get(key).cloned().unwrap_or(json!([])))
                        .map_err(|e| schema(format!("terms[{idx}].{key}"), e.to_string()))?;
                let w = Word(w);
                w.validate(n)?;
                Ok(w)
            };
            let c = if let Some(c) = t.get("c") {
                crate::schema::parse_scalar(c, &format!("terms[{idx}].c"))?
            } else {
                let re = crate::schema::parse_scalar(t.get("re").unwrap_or(&json!(0)), "re")?;
                let im = crate::schema::parse_scalar(t.get("im").unwrap_or(&json!(0)), "im")?;
                re + Scalar::i() * im
            };
            out.push((word("J")?, word("K")?, c));
        }
        Ok(CuntzElement::from_terms(n, out))
    }
}

impl std::fmt::Display for CuntzElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .iter()
            .map(|(j, k, c)| {
                let mono = match (j.is_empty(), k.is_empty()) {
                    (true, true) => "I".to_string(),
                    (false, true) => format!("s_{j}"),
                    (true, false) => format!("s_{k}*"),
                    (false, false) => format!("s_{j} s_{k}*"),
                };
                format!("({}) {}", c.render(), mono)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `(u*u = I, u ∈ O_n^+)`.
pub fn is_isometry_in_plus(u: &CuntzElement, tol: f64) -> (bool, bool) {
    let uu = u.adjoint().multiply(u).expect("same alphabet");
    (uu.approx_eq(&CuntzElement::identity(u.n), tol), u.in_plus())
}

/// Coefficient of `s_{J'}` in `α_g(s_J)`, i.e. `Π_t g_{j'_t j_t}`.
pub fn gauge_coefficient(g: &Mat, target: &Word, source: &Word) -> Scalar {
    target
        .letters()
        .iter()
        .zip(source.letters())
        .fold(Scalar::int(1), |acc, (&a, &b)| {
            acc * g[a as usize - 1][b as usize - 1].clone()
        })
}

/// Applies the gauge automorphism `α_g(s_i) = Σ_j g_ji s_j`.
pub fn gauge_apply(g: &Mat, a: &CuntzElement, tol: f64) -> Result<CuntzElement> {
    if g.len() != a.n || !is_unitary(g, tol) {
        return Err(Error::NotUnitary);
    }
    let n = a.n;
    let mut out = Vec::new();
    for (j, k, c) in a.iter() {
        let js = Word::all_of_length(n, j.len());
        let ks = Word::all_of_length(n, k.len());
        for j2 in &js {
            let cj = gauge_coefficient(g, j2, j);
            if cj.is_exact_zero() {
                continue;
            }
            for k2 in &ks {
                let ck = gauge_coefficient(g, k2, k).conj();
                if ck.is_exact_zero() {
                    continue;
                }
                out.push((j2.clone(), k2.clone(), &(c * &cj) * &ck));
            }
        }
    }
    Ok(CuntzElement::from_terms_tol(n, out, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, mat_mul};
    use crate::random::{random_exact_element, random_float_unitary};
    use crate::scalar::Mode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(v: &[u8]) -> Word {
        Word(v.to_vec())
    }

    fn mono(j: &[u8], k: &[u8]) -> CuntzElement {
        CuntzElement::monomial(2, w(j), w(k), Scalar::int(1))
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce_starred_pair(&w(&[1]), &w(&[1])), Reduced::Identity);
        assert_eq!(
            reduce_starred_pair(&w(&[1]), &w(&[1, 2])),
            Reduced::Monomial(w(&[2]))
        );
        assert_eq!(reduce_starred_pair(&w(&[1, 2]), &w(&[2])), Reduced::Zero);
        assert_eq!(
            reduce_starred_pair(&w(&[1, 2]), &w(&[1])),
            Reduced::Starred(w(&[2]))
        );
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(
            mono(&[1], &[2]).multiply(&mono(&[2], &[1])).unwrap(),
            mono(&[1], &[1])
        );
        assert_eq!(
            mono(&[], &[1]).multiply(&mono(&[1], &[])).unwrap(),
            CuntzElement::identity(2)
        );
        let proj = CuntzElement::from_terms(2, (1..=2).map(|i| (w(&[i]), w(&[i]), Scalar::int(1))));
        assert_eq!(proj, CuntzElement::identity(2));
        let x = mono(&[1], &[2]);
        let d = proj.multiply(&x).unwrap().sub(&x).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn alphabet_mismatch_is_an_error() {
        let a = CuntzElement::s(2, 1);
        let b = CuntzElement::s(3, 1);
        assert_eq!(a.multiply(&b), Err(Error::AlphabetMismatch(2, 3)));
    }

    #[test]
    fn normal_form_merges_partial_refinements() {
        // s_1 s_1* + s_2 s_2* + s_1 s_2* is I + s_1 s_2*
        let a = CuntzElement::from_terms(
            2,
            vec![
                (w(&[1]), w(&[1]), Scalar::int(1)),
                (w(&[2]), w(&[2]), Scalar::int(1)),
                (w(&[1]), w(&[2]), Scalar::int(1)),
            ],
        );
        assert_eq!(a.terms().len(), 2);
        // I - s_1 s_1* = s_2 s_2*
        let b = CuntzElement::identity(2).sub(&mono(&[1], &[1])).unwrap();
        assert_eq!(b, mono(&[2], &[2]));
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(mono(&[1], &[2]).adjoint(), mono(&[2], &[1]));
        let c = Scalar::int(2) + Scalar::i();
        let a = CuntzElement::monomial(2, w(&[1, 2]), w(&[]), c.clone());
        assert_eq!(
            a.adjoint(),
            CuntzElement::monomial(2, w(&[]), w(&[1, 2]), c.conj())
        );
    }

    #[test]
    fn isometry_examples() {
        let h = Scalar::ratio(1, 2);
        let u = CuntzElement::creation_sum(
            2,
            Word::all_of_length(2, 2)
                .into_iter()
                .map(|x| (x, h.clone())),
        );
        assert_eq!(is_isometry_in_plus(&u, 0.0), (true, true));
        // geometric progression code {1, 21, 22}, z = (1/2, 1/2, 1/√2)
        let gp = CuntzElement::creation_sum(
            2,
            vec![
                (w(&[1]), Scalar::ratio(1, 2)),
                (w(&[2, 1]), Scalar::ratio(1, 2)),
                (w(&[2, 2]), Scalar::inv_sqrt2()),
            ],
        );
        assert_eq!(is_isometry_in_plus(&gp, 0.0), (true, true));
        let bad = CuntzElement::s(2, 1).add(&CuntzElement::s(2, 2)).unwrap();
        assert_eq!(is_isometry_in_plus(&bad, 0.0), (false, true));
    }

    #[test]
    fn gauge_examples() {
        let a = mono(&[1, 2], &[2]);
        assert_eq!(gauge_apply(&identity(2, Mode::Exact), &a, 0.0).unwrap(), a);
        let swap = vec![
            vec![Scalar::int(0), Scalar::int(1)],
            vec![Scalar::int(1), Scalar::int(0)],
        ];
        assert_eq!(
            gauge_apply(&swap, &CuntzElement::s(2, 1), 0.0).unwrap(),
            CuntzElement::s(2, 2)
        );
        let not_u = vec![
            vec![Scalar::int(1), Scalar::int(1)],
            vec![Scalar::int(0), Scalar::int(1)],
        ];
        assert_eq!(gauge_apply(&not_u, &a, 1e-9), Err(Error::NotUnitary));
    }

    #[test]
    fn gauge_preserves_isometries() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = Scalar::ratio(1, 2);
        let u = CuntzElement::creation_sum(
            2,
            Word::all_of_length(2, 2)
                .into_iter()
                .map(|x| (x, h.clone())),
        );
        for _ in 0..5 {
            let g = random_float_unitary(&mut rng, 2);
            let gu = gauge_apply(&g, &u, 1e-9).unwrap();
            assert!(is_isometry_in_plus(&gu, 1e-9).0);
        }
    }

    #[test]
    fn gauge_is_a_homomorphism_of_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let g = random_float_unitary(&mut rng, 2);
            let h = random_float_unitary(&mut rng, 2);
            let a = random_exact_element(&mut rng, 2, 2, 3).scale(&Scalar::float(1.0, 0.0));
            let lhs = gauge_apply(&g, &gauge_apply(&h, &a, 1e-9).unwrap(), 1e-9).unwrap();
            let rhs = gauge_apply(&mat_mul(&g, &h), &a, 1e-9).unwrap();
            assert!(lhs.approx_eq(&rhs, 1e-9));
        }
    }

    fn generator_product(j: &Word, k: &Word) -> CuntzElement {
        let mut acc = CuntzElement::identity(2);
        for &c in j.letters() {
            acc = acc.multiply(&CuntzElement::s(2, c)).unwrap();
        }
        for &c in k.letters().iter().rev() {
            acc = acc.multiply(&CuntzElement::s(2, c).adjoint()).unwrap();
        }
        acc
    }

    #[test]
    fn normal_form_uniqueness_exhaustive() {
        let words = Word::all_up_to(2, 3);
        for j in &words {
            for k in &words {
                let left = generator_product(j, k);
                for l in &words {
                    for m in &words {
                        let right = generator_product(l, m);
                        let direct = mono(j.letters(), k.letters())
                            .multiply(&mono(l.letters(), m.letters()))
                            .unwrap();
                        assert_eq!(left.multiply(&right).unwrap(), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn cuntz_relation_on_random_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let proj = CuntzElement::from_terms(2, (1..=2).map(|i| (w(&[i]), w(&[i]), Scalar::int(1))));
        let proj_raw: Vec<(Word, Word, Scalar)> = (1..=2)
            .map(|i| (w(&[i]), w(&[i]), Scalar::int(1)))
            .collect();
        for _ in 0..50 {
            let x = random_exact_element(&mut rng, 2, 3, 4);
            assert_eq!(proj.multiply(&x).unwrap(), x);
            // also without relying on the merged identity
            let mut sum = CuntzElement::zero(2);
            for (j, k, c) in &proj_raw {
                let t = CuntzElement::monomial(2, j.clone(), k.clone(), c.clone());
                sum = sum.add(&t.multiply(&x).unwrap()).unwrap();
            }
            assert_eq!(sum, x);
        }
    }

    #[test]
    fn adjoint_is_involutive_anti_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = random_exact_element(&mut rng, 2, 2, 3);
            let b = random_exact_element(&mut rng, 2, 2, 3);
            assert_eq!(a.adjoint().adjoint(), a);
            assert_eq!(
                a.multiply(&b).unwrap().adjoint(),
                b.adjoint().multiply(&a.adjoint()).unwrap()
            );
        }
    }

    #[test]
    fn json_roundtrip() {
        let a = CuntzElement::from_terms(
            2,
            vec![
                (w(&[1, 2]), w(&[]), Scalar::ratio(1, 2)),
                (w(&[2]), w(&[1]), Scalar::i()),
            ],
        );
        let back = CuntzElement::from_json(&a.to_json()).unwrap();
        assert!(back.approx_eq(&a, 1e-12));
    }
}
