//! State and representation spec files.
//!
//! A state spec is an object with a `family` tag:
//!
//! ```json
//! {"n":2,"family":"cuntz","z":[[1,0],[0,0]]}
//! {"family":"sub_cuntz","m":2,"z":[0,1,0,0]}
//! {"family":"geometric_progression","k":2,"z":[...]}
//! {"family":"prefix_code","n":2,"code":[[1],[2,1],[2,2]],"z":[...]}
//! {"family":"rho_c","d":3,"c":[0,1]}
//! {"family":"induced_product","pre":[[...]],"rep":[[...]]}
//! {"family":"shift","word":{"pre":[],"per":[1,2]}}
//! {"family":"lazy_shift","preset":"thue_morse","horizon":256}
//! {"family":"grid","n":2}
//! {"family":"sandwich","base":{...},"terms":[{"J":[2],"K":[],"re":1}]}
//! {"family":"sandwich","base":{...},"tail":"dyadic"}
//! {"family":"gauge","base":{...},"g":[[0,1],[1,0]]}
//! {"family":"mixture","components":[{"weight":"1/2","state":{...}}, ...]}
//! ```
//!
//! An optional `"mode": "float"` converts every parameter to floating point.
//! A representation spec carries a `kind` tag instead (see
//! [`Representation::from_json`]).

use serde_json::Value;

use crate::error::{schema, Error, Result};
use crate::moments::{
    geometric_progression_code, make_cuntz, make_grid, make_induced_product, make_lazy_shift,
    make_mixture, make_prefix_code_state_tol, make_shift, positivity_check, rho_c, transform_gauge,
    transform_sandwich, transform_sandwich_dyadic, uniform_code, CodeKind, MomentFunctional,
};
use crate::scalar::{Mode, Scalar, Tol};
use crate::schema::{parse_matrix, parse_scalar, parse_vector};
use crate::shiftrep::Representation;
use crate::symalg::CuntzElement;
use crate::words::{EventuallyPeriodicWord, LazyPreset, LazyWord, Word, DEFAULT_HORIZON};

#[derive(Clone, Debug)]
pub enum Spec {
    State(MomentFunctional),
    Representation(Representation),
}

/// Overrides applied while building a state.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Force a mode; `None` keeps what the literals say.
    pub mode: Option<Mode>,
    pub tol: Tol,
}

/// Parses a spec document. Syntax errors carry the line and column.
pub fn parse_spec_str(text: &str, opts: &ParseOptions) -> Result<Spec> {
    let v: Value = serde_json::from_str(text).map_err(|e| {
        schema(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    parse_spec(&v, opts)
}

pub fn parse_spec(v: &Value, opts: &ParseOptions) -> Result<Spec> {
    if v.get("kind").is_some() {
        return Ok(Spec::Representation(Representation::from_json(v)?));
    }
    let omega = state_from_json(v, opts)?;
    let gate = positivity_check(&omega, 2);
    if !gate.psd {
        return Err(Error::GateFailed {
            min_eig: gate.min_eig,
        });
    }
    Ok(Spec::State(omega))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| schema(key, "missing"))
}

fn uint(v: &Value, key: &str) -> Result<Option<usize>> {
    match v.get(key) {
        None => Ok(None),
        Some(x) => x
            .as_u64()
            .map(|u| Some(u as usize))
            .ok_or_else(|| schema(key, "expected a nonnegative integer")),
    }
}

fn words(v: &Value, key: &str, n: usize) -> Result<Vec<Word>> {
    let raw: Vec<Vec<u8>> =
        serde_json::from_value(field(v, key)?.clone()).map_err(|e| schema(key, e.to_string()))?;
    raw.into_iter()
        .map(|w| {
            let w = Word(w);
            w.validate(n)?;
            Ok(w)
        })
        .collect()
}

/// Recovers `n` from `len = n^m`.
fn root(len: usize, m: usize) -> Option<usize> {
    (2..=len).find(|&n| n.checked_pow(m as u32) == Some(len))
}

/// Constructor errors about the parameter itself are schema errors of the
/// `z` field.
fn as_schema(e: Error, key: &str) -> Error {
    match e {
        Error::NotUnit(msg) => schema(key, format!("not a unit vector: {msg}")),
        Error::NotIsometry => schema(key, "u is not an isometry"),
        Error::Inconsistent => schema(key, "fixed-point system is inconsistent"),
        other => other,
    }
}

pub fn state_from_json(v: &Value, opts: &ParseOptions) -> Result<MomentFunctional> {
    let opts = ParseOptions {
        mode: match v.get("mode").and_then(Value::as_str) {
            Some("float") => Some(Mode::Float),
            Some("exact") => opts.mode.or(Some(Mode::Exact)),
            Some(other) => return Err(schema("mode", format!("unknown mode {other:?}"))),
            None => opts.mode,
        },
        tol: opts.tol,
    };
    let conv = |xs: Vec<Scalar>| -> Vec<Scalar> {
        match opts.mode {
            Some(Mode::Float) => xs.iter().map(|x| x.to_mode(Mode::Float)).collect(),
            _ => xs,
        }
    };
    let scalar = |x: Scalar| match opts.mode {
        Some(Mode::Float) => x.to_mode(Mode::Float),
        _ => x,
    };
    let family = field(v, "family")?
        .as_str()
        .ok_or_else(|| schema("family", "expected a string"))?;
    let n_given = uint(v, "n")?;
    let check_n = |n: usize| -> Result<usize> {
        if n < 2 {
            return Err(schema("n", "alphabet size must be at least 2"));
        }
        match n_given {
            Some(g) if g != n => Err(schema("n", format!("n = {g} but the parameters imply {n}"))),
            _ => Ok(n),
        }
    };
    match family {
        "cuntz" => {
            let z = conv(parse_vector(field(v, "z")?, "z")?);
            check_n(z.len())?;
            make_cuntz(&z).map_err(|e| as_schema(e, "z"))
        }
        "sub_cuntz" => {
            let m = uint(v, "m")?.ok_or_else(|| schema("m", "missing"))?;
            if m == 0 {
                return Err(schema("m", "order must be positive"));
            }
            let z = conv(parse_vector(field(v, "z")?, "z")?);
            let n = check_n(
                root(z.len(), m)
                    .ok_or_else(|| schema("z", format!("length {} is not n^{m}", z.len())))?,
            )?;
            make_prefix_code_state_tol(
                n,
                uniform_code(n, m),
                &z,
                CodeKind::SubCuntz { m },
                &opts.tol,
            )
            .map_err(|e| as_schema(e, "z"))
        }
        "geometric_progression" => {
            let k = uint(v, "k")?.ok_or_else(|| schema("k", "missing"))?;
            if k == 0 {
                return Err(schema("k", "order must be positive"));
            }
            let z = conv(parse_vector(field(v, "z")?, "z")?);
            if z.len() < 2 || (z.len() - 1) % k != 0 {
                return Err(schema("z", format!("length must be (n-1)k+1 with k = {k}")));
            }
            let n = check_n((z.len() - 1) / k + 1)?;
            make_prefix_code_state_tol(
                n,
                geometric_progression_code(n, k),
                &z,
                CodeKind::GeometricProgression { k },
                &opts.tol,
            )
            .map_err(|e| as_schema(e, "z"))
        }
        "prefix_code" => {
            let n = check_n(n_given.ok_or_else(|| schema("n", "missing"))?)?;
            let code = words(v, "code", n)?;
            let z = conv(parse_vector(field(v, "z")?, "z")?);
            make_prefix_code_state_tol(n, code, &z, CodeKind::General, &opts.tol)
                .map_err(|e| as_schema(e, "z"))
        }
        "rho_c" => {
            let d = uint(v, "d")?.ok_or_else(|| schema("d", "missing"))?;
            if d == 0 {
                return Err(schema("d", "must be positive"));
            }
            let c = scalar(parse_scalar(field(v, "c")?, "c")?);
            rho_c(check_n(n_given.unwrap_or(2))?, d, &c).map_err(|e| as_schema(e, "c"))
        }
        "induced_product" => {
            let seq = |key: &str| -> Result<Vec<Vec<Scalar>>> {
                match v.get(key) {
                    None => Ok(Vec::new()),
                    Some(Value::Array(a)) => a
                        .iter()
                        .enumerate()
                        .map(|(i, z)| parse_vector(z, &format!("{key}[{i}]")).map(conv))
                        .collect(),
                    Some(_) => Err(schema(key, "expected an array of vectors")),
                }
            };
            let pre = seq("pre")?;
            let per = if v.get("rep").is_some() {
                seq("rep")?
            } else {
                seq("per")?
            };
            if per.is_empty() {
                return Err(schema("rep", "periodic part must be nonempty"));
            }
            check_n(per[0].len())?;
            make_induced_product(&pre, &per).map_err(|e| as_schema(e, "rep"))
        }
        "shift" => {
            let w = field(v, "word")?;
            let n = n_given.unwrap_or_else(|| {
                let letters = ["pre", "per"]
                    .iter()
                    .filter_map(|k| w.get(*k).and_then(Value::as_array))
                    .flatten()
                    .filter_map(Value::as_u64)
                    .max()
                    .unwrap_or(2);
                letters.max(2) as usize
            });
            let word = EventuallyPeriodicWord::from_json(check_n(n)?, w)?;
            Ok(make_shift(word))
        }
        "lazy_shift" => {
            let preset: LazyPreset = match v.get("preset") {
                Some(p) => serde_json::from_value(p.clone())
                    .map_err(|e| schema("preset", e.to_string()))?,
                None => LazyPreset::ThueMorse,
            };
            let horizon = uint(v, "horizon")?.unwrap_or(DEFAULT_HORIZON);
            Ok(make_lazy_shift(LazyWord::new(preset, horizon)))
        }
        "grid" => Ok(make_grid(check_n(n_given.unwrap_or(2))?)),
        "sandwich" => {
            let base = state_from_json(field(v, "base")?, &opts)?;
            match v.get("tail").and_then(Value::as_str) {
                Some("dyadic") => return transform_sandwich_dyadic(&base),
                Some(other) => return Err(schema("tail", format!("unknown tail {other:?}"))),
                None => {}
            }
            let terms = field(v, "terms")?;
            let a = CuntzElement::from_json(&serde_json::json!({"n": base.n(), "terms": terms}))?;
            let a = match opts.mode {
                Some(Mode::Float) => a.to_mode(Mode::Float),
                _ => a,
            };
            let assume = v
                .get("assume_equivalent")
                .map(|b| {
                    b.as_bool()
                        .ok_or_else(|| schema("assume_equivalent", "expected a boolean"))
                })
                .transpose()?
                .unwrap_or(false);
            transform_sandwich(&base, &[(Scalar::one(a.mode()), a)], assume)
                .map_err(|e| as_schema(e, "terms"))
        }
        "gauge" => {
            let base = state_from_json(field(v, "base")?, &opts)?;
            let g = parse_matrix(field(v, "g")?, "g")?;
            let g: Vec<Vec<Scalar>> = g.into_iter().map(conv).collect();
            if g.len() != base.n() {
                return Err(schema("g", format!("expected a {0}x{0} matrix", base.n())));
            }
            transform_gauge(&base, &g).map_err(|e| match e {
                Error::NotUnitary => schema("g", "not unitary"),
                other => other,
            })
        }
        "mixture" => {
            let comps = field(v, "components")?
                .as_array()
                .ok_or_else(|| schema("components", "expected an array"))?;
            let mut out = Vec::new();
            for (i, c) in comps.iter().enumerate() {
                let key = format!("components[{i}]");
                let w = scalar(parse_scalar(
                    c.get("weight")
                        .ok_or_else(|| schema(format!("{key}.weight"), "missing"))?,
                    &format!("{key}.weight"),
                )?);
                let s = state_from_json(
                    c.get("state")
                        .ok_or_else(|| schema(format!("{key}.state"), "missing"))?,
                    &opts,
                )?;
                out.push((w, s));
            }
            make_mixture(out)
        }
        other => Err(schema("family", format!("unknown family {other:?}"))),
    }
}
