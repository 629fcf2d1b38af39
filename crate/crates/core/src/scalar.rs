//! Scalars for moment computations.
//!
//! Exact scalars live in the field Q(i, √2): every element is `a + b√2`
//! with `a, b` Gaussian rationals. This covers the Gaussian-rational inputs
//! and the `1/√2` amplitudes that appear in the standard examples while
//! keeping arithmetic error-free. Float scalars are `Complex<f64>`; mixing
//! the two promotes to float.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::{Complex, One, Signed, ToPrimitive, Zero};

/// Default equality tolerance for float mode.
pub const DEFAULT_EPS: f64 = 1e-9;
/// Default pivot threshold for float rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

type Qi = Complex<BigRational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Tolerances used by float-mode decisions. Ignored in exact mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tol {
    pub eq: f64,
    pub rank: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            eq: DEFAULT_EPS,
            rank: DEFAULT_RANK_TOL,
        }
    }
}

/// An element `a + b√2` of Q(i, √2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    a: Qi,
    b: Qi,
}

fn qi_zero() -> Qi {
    Complex::new(BigRational::zero(), BigRational::zero())
}

fn qi_is_zero(q: &Qi) -> bool {
    q.re.is_zero() && q.im.is_zero()
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sign of `p + q√2` for rationals `p, q`.
fn sign_p_q_sqrt2(p: &BigRational, q: &BigRational) -> Ordering {
    let sp = p.cmp(&BigRational::zero());
    let sq = q.cmp(&BigRational::zero());
    if sq == Ordering::Equal {
        return sp;
    }
    if sp == Ordering::Equal || sp == sq {
        return sq;
    }
    let two = BigRational::from_integer(BigInt::from(2));
    if p * p > &two * q * q {
        sp
    } else {
        sq
    }
}

impl Surd {
    pub fn new(a: Qi, b: Qi) -> Self {
        Surd { a, b }
    }

    pub fn from_rational(r: BigRational) -> Self {
        Surd {
            a: Complex::new(r, BigRational::zero()),
            b: qi_zero(),
        }
    }

    pub fn from_parts(re: BigRational, im: BigRational) -> Self {
        Surd {
            a: Complex::new(re, im),
            b: qi_zero(),
        }
    }

    pub fn zero() -> Self {
        Surd {
            a: qi_zero(),
            b: qi_zero(),
        }
    }

    pub fn one() -> Self {
        Surd::from_rational(BigRational::one())
    }

    pub fn sqrt2() -> Self {
        Surd {
            a: qi_zero(),
            b: Complex::new(BigRational::one(), BigRational::zero()),
        }
    }

    pub fn is_zero(&self) -> bool {
        qi_is_zero(&self.a) && qi_is_zero(&self.b)
    }

    pub fn conj(&self) -> Self {
        Surd {
            a: self.a.conj(),
            b: self.b.conj(),
        }
    }

    pub fn re(&self) -> Self {
        Surd {
            a: Complex::new(self.a.re.clone(), BigRational::zero()),
            b: Complex::new(self.b.re.clone(), BigRational::zero()),
        }
    }

    pub fn im(&self) -> Self {
        Surd {
            a: Complex::new(self.a.im.clone(), BigRational::zero()),
            b: Complex::new(self.b.im.clone(), BigRational::zero()),
        }
    }

    pub fn is_real(&self) -> bool {
        self.a.im.is_zero() && self.b.im.is_zero()
    }

    /// Sign of the real part.
    pub fn real_sign(&self) -> Ordering {
        sign_p_q_sqrt2(&self.a.re, &self.b.re)
    }

    pub fn to_c64(&self) -> Complex64 {
        let s2 = std::f64::consts::SQRT_2;
        Complex64::new(
            rat_to_f64(&self.a.re) + s2 * rat_to_f64(&self.b.re),
            rat_to_f64(&self.a.im) + s2 * rat_to_f64(&self.b.im),
        )
    }

    fn mul_ref(&self, o: &Surd) -> Surd {
        match (qi_is_zero(&self.b), qi_is_zero(&o.b)) {
            (true, true) => {
                return Surd {
                    a: &self.a * &o.a,
                    b: qi_zero(),
                }
            }
            (true, false) => {
                return Surd {
                    a: &self.a * &o.a,
                    b: &self.a * &o.b,
                }
            }
            (false, true) => {
                return Surd {
                    a: &self.a * &o.a,
                    b: &self.b * &o.a,
                }
            }
            (false, false) => {}
        }
        let two = Complex::new(
            BigRational::from_integer(BigInt::from(2)),
            BigRational::zero(),
        );
        Surd {
            a: &self.a * &o.a + two * (&self.b * &o.b),
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn inv(&self) -> Option<Surd> {
        if self.is_zero() {
            return None;
        }
        let two = Complex::new(
            BigRational::from_integer(BigInt::from(2)),
            BigRational::zero(),
        );
        // (a + b√2)(a - b√2) = a² - 2b², nonzero because √2 ∉ Q(i)
        let den = &self.a * &self.a - two * (&self.b * &self.b);
        let nsq = &den.re * &den.re + &den.im * &den.im;
        let den_inv = Complex::new(&den.re / &nsq, -&den.im / &nsq);
        Some(Surd {
            a: &self.a * &den_inv,
            b: -(&self.b * &den_inv),
        })
    }

    fn fmt_real(p: &BigRational, q: &BigRational) -> Option<String> {
        match (p.is_zero(), q.is_zero()) {
            (true, true) => None,
            (false, true) => Some(fmt_rat(p)),
            (true, false) => Some(fmt_sqrt2_term(q)),
            (false, false) => {
                let qs = fmt_sqrt2_term(&q.abs());
                let sign = if q.is_negative() { "-" } else { "+" };
                Some(format!("{} {} {}", fmt_rat(p), sign, qs))
            }
        }
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_sqrt2_term(q: &BigRational) -> String {
    if q.is_one() {
        "√2".to_string()
    } else if (-q).is_one() {
        "-√2".to_string()
    } else {
        format!("{}*√2", fmt_rat(q))
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = Surd::fmt_real(&self.a.re, &self.b.re);
        let im = Surd::fmt_real(&self.a.im, &self.b.im);
        match (re, im) {
            (None, None) => write!(f, "0"),
            (Some(r), None) => write!(f, "{r}"),
            (None, Some(i)) => write!(f, "({i})i"),
            (Some(r), Some(i)) => write!(f, "{r} + ({i})i"),
        }
    }
}

/// A scalar coefficient, exact or floating.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(Surd),
    Float(Complex64),
}

impl Scalar {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Surd::zero()),
            Mode::Float => Scalar::Float(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(Surd::one()),
            Mode::Float => Scalar::Float(Complex64::new(1.0, 0.0)),
        }
    }

    pub fn int(v: i64) -> Self {
        Scalar::Exact(Surd::from_rational(BigRational::from_integer(
            BigInt::from(v),
        )))
    }

    /// Exact `num/den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Surd::from_rational(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }

    /// Exact Gaussian rational `re + i·im`.
    pub fn gauss(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(Surd::from_parts(re, im))
    }

    pub fn sqrt2() -> Self {
        Scalar::Exact(Surd::sqrt2())
    }

    /// Exact `1/√2`.
    pub fn inv_sqrt2() -> Self {
        Scalar::sqrt2() * Scalar::ratio(1, 2)
    }

    pub fn i() -> Self {
        Scalar::gauss(BigRational::zero(), BigRational::one())
    }

    pub fn float(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn zero_like(&self) -> Self {
        Scalar::zero(self.mode())
    }

    pub fn one_like(&self) -> Self {
        Scalar::one(self.mode())
    }

    /// Converts to the requested mode. Exact→float is lossy; float→exact
    /// goes through the shortest decimal representation of each part.
    pub fn to_mode(&self, mode: Mode) -> Scalar {
        match (self, mode) {
            (Scalar::Exact(s), Mode::Float) => Scalar::Float(s.to_c64()),
            (Scalar::Float(c), Mode::Exact) => {
                Scalar::gauss(f64_to_rational(c.re), f64_to_rational(c.im))
            }
            _ => self.clone(),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(s) => s.to_c64(),
            Scalar::Float(c) => *c,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.conj()),
            Scalar::Float(c) => Scalar::Float(c.conj()),
        }
    }

    pub fn re(&self) -> Self {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.re()),
            Scalar::Float(c) => Scalar::float(c.re, 0.0),
        }
    }

    pub fn im(&self) -> Self {
        match self {
            Scalar::Exact(s) => Scalar::Exact(s.im()),
            Scalar::Float(c) => Scalar::float(c.im, 0.0),
        }
    }

    /// |x|² as a (real) scalar.
    pub fn norm_sqr(&self) -> Self {
        self.conj() * self.clone()
    }

    pub fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Exact zero test in exact mode, `|x| ≤ tol` in float mode.
    pub fn is_zero_tol(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(s) => s.is_zero(),
            Scalar::Float(c) => c.norm() <= tol,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        match self {
            Scalar::Exact(s) => s.is_zero(),
            Scalar::Float(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        (self.clone() - other.clone()).is_zero_tol(tol)
    }

    /// Compares real parts. Exact when both sides are exact.
    pub fn real_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                let d = Surd::new(a.a.clone() - b.a.clone(), a.b.clone() - b.b.clone());
                d.real_sign()
            }
            _ => self
                .to_c64()
                .re
                .partial_cmp(&other.to_c64().re)
                .unwrap_or(Ordering::Equal),
        }
    }

    /// Sign of the real part; float values within `tol` of zero count as zero.
    pub fn real_sign(&self, tol: f64) -> Ordering {
        match self {
            Scalar::Exact(s) => s.real_sign(),
            Scalar::Float(c) => {
                if c.re.abs() <= tol {
                    Ordering::Equal
                } else if c.re > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        }
    }

    pub fn checked_div(&self, other: &Scalar) -> Option<Scalar> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => b.inv().map(|bi| Scalar::Exact(a.mul_ref(&bi))),
            _ => {
                let d = other.to_c64();
                if d.norm() == 0.0 {
                    None
                } else {
                    Some(Scalar::Float(self.to_c64() / d))
                }
            }
        }
    }

    /// `x^k` for `k ≥ 0`.
    pub fn powi(&self, k: usize) -> Scalar {
        let mut acc = self.one_like();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }

    /// Components as `[re, im]` floats.
    pub fn to_pair(&self) -> [f64; 2] {
        let c = self.to_c64();
        [c.re, c.im]
    }

    /// Human-readable form: exact surd notation or 12 significant digits.
    pub fn render(&self) -> String {
        match self {
            Scalar::Exact(s) => s.to_string(),
            Scalar::Float(c) => {
                if c.im == 0.0 || c.im.abs() < 1e-300 {
                    fmt_g12(c.re)
                } else if c.re == 0.0 {
                    format!("{}i", fmt_g12(c.im))
                } else {
                    let sign = if c.im < 0.0 { "-" } else { "+" };
                    format!("{} {} {}i", fmt_g12(c.re), sign, fmt_g12(c.im.abs()))
                }
            }
        }
    }
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            x.to_string()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{:.11e}", x);
        let (mant, e) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

/// Exact rational of the shortest decimal representation of `x`.
pub fn f64_to_rational(x: f64) -> BigRational {
    parse_decimal(&format!("{x:e}")).unwrap_or_else(BigRational::zero)
}

/// Parses decimal literals such as `-1.25`, `3`, `2.5e-3`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num::pow(ten, (-scale) as usize))
    };
    Some(r)
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_decimal(n)?;
            let d = parse_decimal(d)?;
            if d.is_zero() {
                None
            } else {
                Some(n / d)
            }
        }
        None => parse_decimal(s),
    }
}

/// Parses one real term: `p/q`, `sqrt2`, `p/q*sqrt2`, `sqrt2/q`.
/// Returns `(rational part, √2 part)`.
fn parse_real_term(term: &str) -> Option<(BigRational, BigRational)> {
    let t = term.trim().replace('√', "sqrt");
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b.trim().to_string()),
        None => (false, t.trim_start_matches('+').trim().to_string()),
    };
    let (p, q) = if let Some(idx) = body.find("sqrt2") {
        let before = body[..idx].trim().trim_end_matches('*').trim();
        let after = body[idx + 5..].trim();
        let mut coef = if before.is_empty() {
            BigRational::one()
        } else {
            parse_rational(before)?
        };
        if let Some(den) = after.strip_prefix('/') {
            let d = parse_rational(den)?;
            if d.is_zero() {
                return None;
            }
            coef /= d;
        } else if !after.is_empty() {
            return None;
        }
        (BigRational::zero(), coef)
    } else {
        (parse_rational(&body)?, BigRational::zero())
    };
    if neg {
        Some((-p, -q))
    } else {
        Some((p, q))
    }
}

/// Parses a real surd string such as `1/2`, `sqrt2/2`, `1 - 1/3*sqrt2`.
pub fn parse_real_surd(s: &str) -> Option<Surd> {
    let s = s.trim();
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes = s.as_bytes();
    for i in 1..bytes.len() {
        let c = bytes[i] as char;
        let prev = bytes[i - 1] as char;
        if (c == '+' || c == '-') && prev != 'e' && prev != 'E' && prev != '/' && prev != '*' {
            terms.push(&s[start..i]);
            start = i;
        }
    }
    terms.push(&s[start..]);
    let mut p = BigRational::zero();
    let mut q = BigRational::zero();
    for t in terms {
        let (tp, tq) = parse_real_term(t)?;
        p += tp;
        q += tq;
    }
    Some(Surd::new(
        Complex::new(p, BigRational::zero()),
        Complex::new(q, BigRational::zero()),
    ))
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(Surd {
                a: a.a + b.a,
                b: a.b + b.b,
            }),
            (x, y) => Scalar::Float(x.to_c64() + y.to_c64()),
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, o: Scalar) {
        let cur = std::mem::replace(self, Scalar::Float(Complex64::new(0.0, 0.0)));
        *self = cur + o;
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        self + (-o)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(Surd { a: -a.a, b: -a.b }),
            Scalar::Float(c) => Scalar::Float(-c),
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, o: Scalar) -> Scalar {
        &self * &o
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul_ref(b)),
            (x, y) => Scalar::Float(x.to_c64() * y.to_c64()),
        }
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.clone() + o.clone()
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        let mut acc: Option<Scalar> = None;
        for x in iter {
            acc = Some(match acc {
                None => x,
                Some(a) => a + x,
            });
        }
        acc.unwrap_or_else(|| Scalar::int(0))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Sum of `|x_i|²` over a vector.
pub fn norm_sqr(v: &[Scalar]) -> Scalar {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// `⟨a|b⟩ = Σ conj(a_i) b_i`.
pub fn inner(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * y.clone()).sum()
}

/// Unit-norm test: exact equality in exact mode, `tol` otherwise.
pub fn is_unit(v: &[Scalar], tol: f64) -> bool {
    norm_sqr(v).approx_eq(&Scalar::int(1), tol)
}

/// Common mode of a collection: exact only if every entry is exact.
pub fn common_mode<'a>(xs: impl IntoIterator<Item = &'a Scalar>) -> Mode {
    if xs.into_iter().all(|x| x.is_exact()) {
        Mode::Exact
    } else {
        Mode::Float
    }
}
