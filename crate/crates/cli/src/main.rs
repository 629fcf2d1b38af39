use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cuntzlab::acceptance;
use cuntzlab::classify::{
    cdim, endo_invariants, equivalent, kappa, kappa_rep, pure, Config, KappaResult, PureVerdict,
    StateReport, Verdict,
};
use cuntzlab::fcs::{extract_fcs, Extraction};
use cuntzlab::moments::{make_grid, make_lazy_shift, make_shift, MomentFunctional};
use cuntzlab::schema::scalar_json;
use cuntzlab::shiftrep::Representation;
use cuntzlab::statespec::{parse_spec_str, ParseOptions, Spec};
use cuntzlab::{Mode, Tol, Word};

#[derive(Parser, Debug)]
#[command(
    name = "cuntzlab",
    version,
    about = "Invariants of states on Cuntz algebras"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Arithmetic mode; by default exact unless a spec contains decimals
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Float comparison tolerance (rank decisions use a tenth of it)
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Highest Gram level examined for cdim
    #[arg(long, global = true, default_value_t = 8)]
    max_level: usize,
    /// Properly-infinite δ-table cutoff
    #[arg(long, global = true, default_value_t = 12)]
    cutoff: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Md)]
    format: Format,
    /// Exit with status 3 when a decision is Unknown or unresolved
    #[arg(long, global = true)]
    strict: bool,
    /// Search uniform prefix codes for a minimality certificate when the
    /// family supplies none
    #[arg(long, global = true)]
    search_minimality: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Gram ranks by level and the cdim status
    Cdim { spec: PathBuf },
    /// κ with its certificate
    Kappa { spec: PathBuf },
    /// Equivalence of the GNS representations of two states
    Equiv { a: PathBuf, b: PathBuf },
    /// Purity decision
    Pure { spec: PathBuf },
    /// Table of ω(s_J s_K*) for |J|, |K| ≤ level
    Moments {
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        level: usize,
    },
    /// Finitely correlated presentation (A_i, Ω, metric)
    Fcs { spec: PathBuf },
    /// Invariants of a representation spec and its endomorphism
    Rep { spec: PathBuf },
    /// Run the acceptance suite
    Selftest,
    /// Full report for one or more specs, with pairwise equivalence
    Report {
        #[arg(required = true)]
        specs: Vec<PathBuf>,
    },
}

struct Run {
    cfg: Config,
    opts: ParseOptions,
    format: Format,
    strict: bool,
}

/// Failure with exit status.
struct Fail(u8, String);

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(2, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tol {
        eq: cli.tol,
        rank: cli.tol / 10.0,
    };
    if !(cli.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    let run = Run {
        cfg: Config {
            max_level: cli.max_level,
            cutoff: cli.cutoff,
            tol,
            search_minimality: cli.search_minimality,
        },
        opts: ParseOptions {
            mode: cli.mode.map(|m| match m {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Float => Mode::Float,
            }),
            tol,
        },
        format: cli.format,
        strict: cli.strict,
    };
    match run.dispatch(&cli.cmd) {
        Ok((out, unknown)) => {
            print!("{out}");
            if unknown && run.strict {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Fail(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn pretty(v: &Value) -> String {
    format!(
        "{}\n",
        serde_json::to_string_pretty(v).expect("serializable")
    )
}

fn word_json(w: &Word) -> Value {
    json!(w.letters())
}

/// The reference vector state of a representation.
fn rep_state(rep: &Representation) -> MomentFunctional {
    match rep {
        Representation::Shift { word } => make_shift(word.clone()),
        Representation::Grid { n } => make_grid(*n),
        Representation::Lazy { word } => make_lazy_shift(word.clone()),
    }
}

fn kappa_md(k: &KappaResult) -> String {
    format!("{k}\nreason: {}\n", k.reason)
}

impl Run {
    fn load(&self, path: &Path) -> Result<Spec, Fail> {
        let text =
            fs::read_to_string(path).map_err(|e| Fail(2, format!("{}: {e}", path.display())))?;
        parse_spec_str(&text, &self.opts).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
    }

    fn state(&self, path: &Path) -> Result<MomentFunctional, Fail> {
        Ok(match self.load(path)? {
            Spec::State(s) => s,
            Spec::Representation(r) => rep_state(&r),
        })
    }

    fn dispatch(&self, cmd: &Cmd) -> Result<(String, bool), Fail> {
        let json = self.format == Format::Json;
        match cmd {
            Cmd::Cdim { spec } => {
                let r = cdim(&self.state(spec)?, self.cfg.max_level, &self.cfg.tol);
                let out = if json {
                    pretty(&r.to_json())
                } else {
                    format!("{r}\n")
                };
                Ok((out, false))
            }
            Cmd::Kappa { spec } => {
                let k = match self.load(spec)? {
                    Spec::State(s) => kappa(&s, &self.cfg),
                    Spec::Representation(r) => kappa_rep(&r, &self.cfg)?,
                };
                let out = if json {
                    pretty(&k.to_json())
                } else {
                    kappa_md(&k)
                };
                Ok((out, !k.is_resolved()))
            }
            Cmd::Equiv { a, b } => {
                let d = equivalent(&self.state(a)?, &self.state(b)?, &self.cfg);
                let out = if json {
                    pretty(
                        &json!({"verdict": d.verdict.to_string(), "rule": d.rule, "reason": d.reason}),
                    )
                } else {
                    format!("{d}\nreason: {}\n", d.reason)
                };
                Ok((out, d.verdict == Verdict::Unknown))
            }
            Cmd::Pure { spec } => {
                let p = pure(&self.state(spec)?);
                let out = if json {
                    pretty(&json!({"pure": p.as_option(), "reason": p.reason}))
                } else {
                    format!("{} ({})\n", p.verdict, p.reason)
                };
                Ok((out, p.verdict == PureVerdict::Unknown))
            }
            Cmd::Moments { spec, level } => Ok((self.moments(&self.state(spec)?, *level), false)),
            Cmd::Fcs { spec } => {
                let om = self.state(spec)?;
                let out = match extract_fcs(&om, self.cfg.max_level, &self.cfg.tol)? {
                    Extraction::Presentation { fcs, .. } => {
                        if json {
                            pretty(&fcs.to_json())
                        } else {
                            let basis: Vec<String> =
                                fcs.basis_words.iter().map(|w| w.to_string()).collect();
                            format!(
                                "d = {}\nbasis: {}\n\n```json\n{}\n```\n",
                                fcs.d,
                                basis.join(", "),
                                fcs.to_json()
                            )
                        }
                    }
                    Extraction::LowerBoundOnly { rank, level, .. } => {
                        if json {
                            pretty(&json!({"lower_bound": rank, "level": level}))
                        } else {
                            format!(
                                "no finite presentation found: cdim ≥ {rank} at level {level}\n"
                            )
                        }
                    }
                };
                Ok((out, false))
            }
            Cmd::Rep { spec } => {
                let Spec::Representation(rep) = self.load(spec)? else {
                    return Err(Fail(
                        2,
                        format!("{}: expected a representation spec", spec.display()),
                    ));
                };
                let (index, k) = endo_invariants(&rep, &self.cfg)?;
                let evidence = rep.is_evidence_only();
                let out = if json {
                    pretty(&json!({
                        "representation": rep.to_json(),
                        "endomorphism_index": index,
                        "kappa": k.to_json(),
                        "evidence_only": evidence,
                    }))
                } else {
                    let mut s =
                        format!("endomorphism φ_π = Σ π(s_i)(·)π(s_i)*: powers index {index}\n");
                    s.push_str(&kappa_md(&k));
                    if evidence {
                        s.push_str("note: lazy word, results verified up to the horizon only\n");
                    }
                    s
                };
                Ok((out, !k.is_resolved()))
            }
            Cmd::Selftest => {
                let outcomes = acceptance::run_all();
                let passed = outcomes.iter().filter(|o| o.passed).count();
                let out = if json {
                    pretty(&json!({
                        "criteria": outcomes.iter().map(|o| json!({
                            "id": o.id, "title": o.title, "passed": o.passed, "detail": o.detail,
                        })).collect::<Vec<_>>(),
                        "passed": passed,
                        "total": outcomes.len(),
                    }))
                } else {
                    let mut s: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
                    s.push_str(&format!("{passed}/{} criteria passed\n", outcomes.len()));
                    s
                };
                if passed == outcomes.len() {
                    Ok((out, false))
                } else {
                    print!("{out}");
                    Err(Fail(1, String::new()))
                }
            }
            Cmd::Report { specs } => self.report(specs),
        }
    }

    fn moments(&self, om: &MomentFunctional, level: usize) -> String {
        let words = Word::all_up_to(om.n(), level);
        let mut rows = Vec::new();
        for j in &words {
            for k in &words {
                rows.push((j, k, om.eval(j, k)));
            }
        }
        if self.format == Format::Json {
            let list: Vec<Value> = rows
                .iter()
                .map(|(j, k, v)| json!({"J": word_json(j), "K": word_json(k), "value": scalar_json(v)}))
                .collect();
            return pretty(&json!({"level": level, "moments": list}));
        }
        let mut s = String::from("| J | K | ω(s_J s_K*) |\n|---|---|---|\n");
        for (j, k, v) in rows {
            s.push_str(&format!("| {j} | {k} | {v} |\n"));
        }
        s
    }

    fn report(&self, specs: &[PathBuf]) -> Result<(String, bool), Fail> {
        let mut states = Vec::new();
        for p in specs {
            states.push((p.display().to_string(), self.state(p)?));
        }
        let reports: Vec<StateReport> = states
            .iter()
            .map(|(_, s)| StateReport::build(s, &self.cfg))
            .collect();
        let mut unknown = reports
            .iter()
            .any(|r| !r.kappa.is_resolved() || r.pure.verdict == PureVerdict::Unknown);
        let mut matrix = Vec::new();
        if states.len() > 1 {
            for (_, a) in &states {
                let row: Vec<_> = states
                    .iter()
                    .map(|(_, b)| equivalent(a, b, &self.cfg))
                    .collect();
                unknown |= row.iter().any(|d| d.verdict == Verdict::Unknown);
                matrix.push(row);
            }
        }
        if self.format == Format::Json {
            let list: Vec<Value> = states
                .iter()
                .zip(&reports)
                .map(|((name, _), r)| {
                    let mut v = r.to_json();
                    v.as_object_mut()
                        .expect("object")
                        .insert("file".into(), json!(name));
                    v
                })
                .collect();
            let doc = if states.len() == 1 {
                list.into_iter().next().expect("one report")
            } else {
                let m: Vec<Vec<Value>> = matrix
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|d| json!({"verdict": d.verdict.to_string(), "rule": d.rule}))
                            .collect()
                    })
                    .collect();
                json!({"states": list, "equivalence": m})
            };
            return Ok((pretty(&doc), unknown));
        }
        let mut s = String::from("# cuntzlab report\n");
        for ((name, _), r) in states.iter().zip(&reports) {
            s.push_str(&format!("\n## {name}\n\n"));
            s.push_str(&format!("- family: {}\n", r.family));
            s.push_str(&format!("- {}\n", r.kappa.cdim));
            s.push_str(&format!("- {}\n", r.kappa));
            s.push_str(&format!("- bucket: {}\n", r.bucket));
            s.push_str(&format!("- pure: {} ({})\n", r.pure.verdict, r.pure.reason));
            s.push_str(&format!("- κ reason: {}\n", r.kappa.reason));
            for n in &r.notes {
                s.push_str(&format!("- note: {n}\n"));
            }
            s.push_str(&format!(
                "\ncertificate:\n\n```json\n{}\n```\n",
                r.kappa.to_json()
            ));
        }
        if states.len() > 1 {
            s.push_str("\n## Pairwise equivalence\n\n|   |");
            for i in 0..states.len() {
                s.push_str(&format!(" {} |", i + 1));
            }
            s.push_str("\n|---|");
            s.push_str(&"---|".repeat(states.len()));
            s.push('\n');
            for (i, row) in matrix.iter().enumerate() {
                s.push_str(&format!("| {} |", i + 1));
                for d in row {
                    s.push_str(&format!(" {} |", d.verdict));
                }
                s.push('\n');
            }
            s.push('\n');
            for (i, (name, _)) in states.iter().enumerate() {
                s.push_str(&format!("{}. {name}\n", i + 1));
            }
            s.push_str("\nRules applied:\n\n");
            for i in 0..states.len() {
                for j in i + 1..states.len() {
                    let d = &matrix[i][j];
                    s.push_str(&format!("- ({}, {}): {}: {}\n", i + 1, j + 1, d, d.reason));
                }
            }
        }
        Ok((s, unknown))
    }
}
