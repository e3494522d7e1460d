//! Command-line front end. [`run`] executes one parsed invocation and
//! writes its report to the given sink, so the binary stays a thin shell.
//!
//! Inputs that name a file accept `-` for stdin. Automata can also be given
//! as `lang:NAME` to use a built-in reference DFA.

use std::io::{Read, Write};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::alphabet::{Alphabet, Sym};
use crate::automata::{classify_language, Dfa};
use crate::compilers::{podfa_to_ptl, podfa_to_transformer_lm, ptl_to_transformer};
use crate::fixedfloat::{parse_f64, SystemDesc};
use crate::langsuite::{generate, reference_dfa, LabeledSample, LangError, LanguageId};
use crate::logic::{eval_ltl, parse_ltl, satisfies_ltl, Ltl, LtlDag, Mode};
use crate::transformer::{
    classifier_score, forward_syms, lm_next_distribution_syms, AttentionMode, Head, TransformerSpec,
};
use crate::verify::{
    equiv_language, equiv_lm, DfaMembership, EquivReport, FormulaMembership, LanguageMembership, Membership,
    TransformerMembership, DEFAULT_BUDGET,
};
use crate::FloatSystem;

/// Environment variable consulted when `--system` is absent.
pub const SYSTEM_ENV: &str = "PTLC_SYSTEM";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

macro_rules! module_error {
    ($($ty:path => $locus:literal),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Input(format!(concat!($locus, ": {}"), e))
            }
        }
    )*};
}

module_error! {
    crate::logic::LogicError => "logic",
    crate::automata::AutomataError => "automata",
    crate::compilers::CompileError => "compile",
    crate::transformer::TransformerError => "transformer",
    crate::langsuite::LangError => "langsuite",
    crate::verify::VerifyError => "verify",
    crate::fixedfloat::FloatError => "float system",
    crate::alphabet::AlphabetError => "alphabet",
    serde_json::Error => "json",
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// How an invocation ended when it did not fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A verification found a counterexample.
    Counterexample,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Counterexample => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    AfterEnd,
    BeforeStart,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::AfterEnd => Mode::AfterEnd,
            ModeArg::BeforeStart => Mode::BeforeStart,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttentionArg {
    Soft,
    AverageHard,
    UniqueHard,
}

impl From<AttentionArg> for AttentionMode {
    fn from(m: AttentionArg) -> AttentionMode {
        match m {
            AttentionArg::Soft => AttentionMode::Soft,
            AttentionArg::AverageHard => AttentionMode::AverageHard,
            AttentionArg::UniqueHard => AttentionMode::UniqueHard,
        }
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    /// Float system: `minifloat:E,M`, `grid:STEP,MAX`, `explicit:V,V,...` or `file:PATH`.
    #[arg(long, global = true, env = SYSTEM_ENV, default_value = "minifloat:4,3")]
    pub system: String,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of strings an exhaustive check may enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Whole-string satisfaction mode; past-only formulas default to after-end.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Worker threads for `gen` and `verify`; output does not depend on it.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            system: "minifloat:4,3".into(),
            seed: 0,
            budget: DEFAULT_BUDGET,
            format: Format::Json,
            mode: None,
            jobs: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ptlc", version, about = "Past temporal logic, p.o. automata and fixed-precision transformers")]
pub struct Cli {
    #[command(flatten)]
    pub config: CliConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct FormulaArg {
    /// Formula text, e.g. `"P a & !b"`.
    #[arg(short = 'f', long, conflicts_with = "formula_file")]
    pub formula: Option<String>,
    /// File holding the formula text, or the JSON written by `compile dfa-to-ptl`.
    #[arg(long)]
    pub formula_file: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a formula on a string.
    Eval {
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(short = 'w', long, default_value = "")]
        word: String,
        /// Symbols, comma separated, or a run of one-character names.
        #[arg(long, default_value = "ab")]
        alphabet: String,
        /// Evaluate at this position (0..=N+1) instead of the whole string.
        #[arg(long)]
        pos: Option<usize>,
        /// Print every subformula at every position.
        #[arg(long)]
        trace: bool,
    },
    /// Place a DFA's language in the class hierarchy.
    Classify { dfa: String },
    #[command(subcommand)]
    Compile(CompileCommand),
    /// Run a recognizer spec on a string.
    Run {
        spec: String,
        #[arg(short = 'w', long, default_value = "")]
        word: String,
        /// Include the full activation trace.
        #[arg(long)]
        trace: bool,
    },
    /// Next-symbol distribution of a language-model spec after a prefix.
    LmNext {
        spec: String,
        #[arg(short = 'w', long, default_value = "")]
        prefix: String,
    },
    /// Generate labeled samples of a benchmark language.
    Gen {
        #[arg(long)]
        lang: String,
        /// Samples per length; polarities alternate, starting positive.
        #[arg(short = 'n', long, default_value_t = 10)]
        count: usize,
        /// Lengths, comma separated; `A..B` is an inclusive range.
        #[arg(long = "len", default_value = "10")]
        lengths: String,
        #[arg(long, value_enum, default_value = "both")]
        polarity: Polarity,
        /// Tab-separated rows instead of JSONL.
        #[arg(long)]
        tsv: bool,
    },
    /// Check two artifacts for agreement on every string up to a length.
    ///
    /// Sides are `formula:TEXT`, `formula-file:PATH`, `dfa:PATH`, `lang:NAME`
    /// or `spec:PATH`. A language-model spec is compared against a DFA's
    /// next-symbol distributions.
    Verify {
        a: String,
        b: String,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
        /// Alphabet for formula sides when no other side fixes one.
        #[arg(long)]
        alphabet: Option<String>,
        /// Allowed rounding steps between LM probabilities.
        #[arg(long, default_value_t = 1, conflicts_with = "support_only")]
        tolerance: u32,
        /// Compare LM supports only.
        #[arg(long)]
        support_only: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum CompileCommand {
    /// State formulas of a partially ordered DFA.
    DfaToPtl { dfa: String },
    /// Transformer recognizer for a PTL formula.
    PtlToTf {
        #[command(flatten)]
        formula: FormulaArg,
        #[arg(long, default_value = "ab")]
        alphabet: String,
        #[arg(long, value_enum, default_value = "soft")]
        attention: AttentionArg,
    },
    /// Transformer language model for a partially ordered DFA.
    DfaToLm { dfa: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Polarity {
    Both,
    Positive,
    Negative,
}

/// Parses a float-system selector.
pub fn parse_system(text: &str) -> Result<FloatSystem, CliError> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let numbers = |s: &str| -> Result<Vec<f64>, CliError> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| parse_f64(t).map_err(CliError::from))
            .collect()
    };
    let sys = match kind {
        "minifloat" => match numbers(rest)?.as_slice() {
            [e, m] if e.fract() == 0.0 && m.fract() == 0.0 && *e >= 0.0 && *m >= 0.0 => {
                FloatSystem::minifloat(*e as u32, *m as u32)?
            }
            _ => return Err(input(format!("expected minifloat:E,M, got '{text}'"))),
        },
        "grid" => match numbers(rest)?.as_slice() {
            [step, max] => FloatSystem::fixed_grid(*step, *max)?,
            _ => return Err(input(format!("expected grid:STEP,MAX, got '{text}'"))),
        },
        "explicit" => FloatSystem::explicit(&numbers(rest)?)?,
        "file" => {
            let body = read_source(rest)?;
            match serde_json::from_str::<SystemDesc>(&body) {
                Ok(desc) => FloatSystem::from_desc(&desc)?,
                Err(_) => FloatSystem::explicit(&numbers(&body)?)?,
            }
        }
        _ => return Err(input(format!("unknown float system '{text}'"))),
    };
    Ok(sys)
}

/// Parses `a,b,c` or, without separators, a run of one-character symbols.
pub fn parse_alphabet(text: &str) -> Result<Alphabet, CliError> {
    if text.contains(',') || text.contains(char::is_whitespace) {
        Ok(Alphabet::new(text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()))?)
    } else {
        Ok(Alphabet::chars(text)?)
    }
}

fn parse_lengths(text: &str) -> Result<Vec<usize>, CliError> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| input(format!("bad length '{s}'")));
    let mut out = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        match part.split_once("..") {
            Some((lo, hi)) => {
                let hi = hi.strip_prefix('=').unwrap_or(hi);
                out.extend(num(lo)?..=num(hi)?);
            }
            None => out.push(num(part)?),
        }
    }
    if out.is_empty() {
        return Err(input("no lengths given"));
    }
    Ok(out)
}

/// Reads a file, or stdin for `-`.
pub fn read_source(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| input(format!("{path}: {e}")))
    }
}

/// DFA from a JSON file, stdin, or `lang:NAME`.
pub fn load_dfa(source: &str) -> Result<Dfa, CliError> {
    match source.strip_prefix("lang:") {
        Some(name) => Ok(reference_dfa(name.parse()?)?),
        None => Ok(Dfa::from_json(&read_source(source)?)?),
    }
}

fn load_spec(source: &str) -> Result<TransformerSpec, CliError> {
    Ok(TransformerSpec::from_json(&read_source(source)?)?)
}

/// Formula text, accepting the `compile dfa-to-ptl` JSON as well.
fn formula_text(body: &str) -> Result<String, CliError> {
    let trimmed = body.trim();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed)?;
        return v["acceptance"].as_str().map(str::to_string).ok_or_else(|| input("JSON has no \"acceptance\" formula"));
    }
    Ok(trimmed.to_string())
}

fn load_formula(arg: &FormulaArg, alphabet: &Alphabet) -> Result<Arc<Ltl>, CliError> {
    let text = match (&arg.formula, &arg.formula_file) {
        (Some(f), _) => f.clone(),
        (None, Some(path)) => formula_text(&read_source(path)?)?,
        (None, None) => return Err(input("give a formula with -f or --formula-file")),
    };
    Ok(parse_ltl(&text, alphabet)?)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report serialization cannot fail")
}

/// Executes one invocation, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    match cli.config.jobs {
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| input(format!("thread pool: {e}")))?;
            // the report is buffered because the sink need not be `Send`
            let mut buf = Vec::new();
            let status = pool.install(|| dispatch(cli, &mut buf));
            out.write_all(&buf)?;
            status
        }
        None => dispatch(cli, out),
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Status, CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Eval { formula, word, alphabet, pos, trace } => {
            let a = parse_alphabet(alphabet)?;
            let phi = load_formula(formula, &a)?;
            let w = a.parse_word(word)?;
            eval_cmd(cfg, &phi, &a, &w, *pos, *trace, out)
        }
        Command::Classify { dfa } => {
            let c = classify_language(&load_dfa(dfa)?)?;
            match cfg.format {
                Format::Json => writeln!(out, "{}", pretty(&c))?,
                Format::Tsv | Format::Text => {
                    writeln!(out, "class\t{}", c.smallest_class())?;
                    for (k, v) in [
                        ("regular", c.regular),
                        ("star_free", c.star_free),
                        ("unambiguous_poly", c.unambiguous_poly),
                        ("left_det_poly", c.left_det_poly),
                        ("partially_ordered", c.partially_ordered),
                    ] {
                        writeln!(out, "{k}\t{v}")?;
                    }
                    writeln!(out, "monoid_size\t{}", c.monoid_size)?;
                    for (k, ws) in &c.witnesses {
                        writeln!(out, "witness {k}\t{}", ws.join(" "))?;
                    }
                }
            }
            Ok(Status::Ok)
        }
        Command::Compile(CompileCommand::DfaToPtl { dfa }) => {
            let set = podfa_to_ptl(&load_dfa(dfa)?)?;
            match cfg.format {
                Format::Json => writeln!(out, "{}", set.to_json())?,
                Format::Tsv | Format::Text => writeln!(out, "{}", set.acceptance)?,
            }
            Ok(Status::Ok)
        }
        Command::Compile(CompileCommand::PtlToTf { formula, alphabet, attention }) => {
            let a = parse_alphabet(alphabet)?;
            let phi = load_formula(formula, &a)?;
            let mut spec = ptl_to_transformer(&phi, &a, &parse_system(&cfg.system)?)?;
            spec.attention_mode = (*attention).into();
            writeln!(out, "{}", spec.to_json())?;
            Ok(Status::Ok)
        }
        Command::Compile(CompileCommand::DfaToLm { dfa }) => {
            let spec = podfa_to_transformer_lm(&load_dfa(dfa)?, &parse_system(&cfg.system)?)?;
            writeln!(out, "{}", spec.to_json())?;
            Ok(Status::Ok)
        }
        Command::Run { spec, word, trace } => {
            let spec = load_spec(spec)?;
            let w = spec.alphabet.parse_word(word)?;
            let sys = &spec.system;
            let score = classifier_score(&spec, &w)?;
            let accept = sys.value(score) > 0.0;
            match cfg.format {
                Format::Json => {
                    let mut v = json!({ "string": word, "accept": accept, "score": sys.format(score) });
                    if *trace {
                        v["trace"] = forward_syms(&spec, &w)?.to_json(sys);
                    }
                    writeln!(out, "{}", pretty(&v))?;
                }
                Format::Tsv | Format::Text => {
                    writeln!(out, "{}\t{}", if accept { "accept" } else { "reject" }, sys.format(score))?;
                }
            }
            Ok(Status::Ok)
        }
        Command::LmNext { spec, prefix } => {
            let spec = load_spec(spec)?;
            let w = spec.alphabet.parse_word(prefix)?;
            let dist = lm_next_distribution_syms(&spec, &w)?;
            let sys = &spec.system;
            match cfg.format {
                Format::Json => {
                    let probs: serde_json::Map<String, serde_json::Value> =
                        dist.symbols.iter().zip(&dist.probs).map(|(s, &p)| (s.clone(), json!(sys.format(p)))).collect();
                    let v = json!({ "prefix": prefix, "distribution": probs, "support": dist.support(sys) });
                    writeln!(out, "{}", pretty(&v))?;
                }
                Format::Tsv | Format::Text => {
                    for (s, &p) in dist.symbols.iter().zip(&dist.probs) {
                        writeln!(out, "{s}\t{}", sys.format(p))?;
                    }
                }
            }
            Ok(Status::Ok)
        }
        Command::Gen { lang, count, lengths, polarity, tsv } => {
            let id: LanguageId = lang.parse()?;
            let rows = gen_samples(id, *count, &parse_lengths(lengths)?, *polarity, cfg.seed)?;
            for row in rows {
                if *tsv || cfg.format == Format::Tsv {
                    writeln!(out, "{}", row.to_tsv())?;
                } else {
                    writeln!(out, "{}", serde_json::to_string(&row)?)?;
                }
            }
            Ok(Status::Ok)
        }
        Command::Verify { a, b, max_len, alphabet, tolerance, support_only } => {
            let tolerance = (!*support_only).then_some(*tolerance);
            let report = verify_cmd(cfg, a, b, *max_len, alphabet.as_deref(), tolerance)?;
            match cfg.format {
                Format::Json => writeln!(out, "{}", report.to_json())?,
                Format::Tsv | Format::Text => match &report.counterexample {
                    None => writeln!(out, "none\t{} strings checked", report.checked)?,
                    Some(c) => {
                        writeln!(out, "counterexample\t{:?}\texpected {}\tactual {}", c.string, c.expected, c.actual)?
                    }
                },
            }
            Ok(if report.passed() { Status::Ok } else { Status::Counterexample })
        }
    }
}

/// Distinct subformulas, children before parents.
fn subformulas(phi: &Arc<Ltl>) -> Vec<Arc<Ltl>> {
    fn walk(f: &Arc<Ltl>, seen: &mut Vec<String>, out: &mut Vec<Arc<Ltl>>) {
        for c in f.children() {
            walk(c, seen, out);
        }
        let text = f.to_string();
        if !seen.contains(&text) {
            seen.push(text);
            out.push(f.clone());
        }
    }
    let mut out = Vec::new();
    walk(phi, &mut Vec::new(), &mut out);
    out
}

fn eval_cmd(
    cfg: &CliConfig,
    phi: &Arc<Ltl>,
    a: &Alphabet,
    w: &[Sym],
    pos: Option<usize>,
    trace: bool,
    out: &mut dyn Write,
) -> Result<Status, CliError> {
    let mode = cfg.mode.map(Mode::from).unwrap_or_else(|| phi.default_mode());
    let value = match pos {
        Some(n) => eval_ltl(phi, a, w, n)?,
        None => satisfies_ltl(phi, a, w, mode)?,
    };
    let mode_name = match mode {
        Mode::AfterEnd => "after_end",
        Mode::BeforeStart => "before_start",
    };
    let rows = if trace {
        subformulas(phi)
            .iter()
            .map(|f| Ok((f.to_string(), LtlDag::build(f, a)?.eval_root(w))))
            .collect::<Result<Vec<_>, CliError>>()?
    } else {
        Vec::new()
    };
    match cfg.format {
        Format::Json => {
            let mut v = json!({ "formula": phi.to_string(), "string": a.format_word(w), "value": value });
            match pos {
                Some(n) => v["position"] = json!(n),
                None => v["mode"] = json!(mode_name),
            }
            if trace {
                v["table"] = rows.iter().map(|(f, r)| json!({ "formula": f, "values": r })).collect();
            }
            writeln!(out, "{}", pretty(&v))?;
        }
        Format::Tsv | Format::Text => {
            writeln!(out, "{value}")?;
            if trace {
                let header: Vec<String> = (0..=w.len() + 1).map(|p| p.to_string()).collect();
                writeln!(out, "position\t{}", header.join("\t"))?;
                for (f, r) in &rows {
                    let cells: Vec<&str> = r.iter().map(|&b| if b { "1" } else { "0" }).collect();
                    writeln!(out, "{f}\t{}", cells.join("\t"))?;
                }
            }
        }
    }
    Ok(Status::Ok)
}

/// Samples in (length, index) order; the seed of each row is derived from
/// the base seed, the length and the index, so `--jobs` never changes output.
pub fn gen_samples(
    id: LanguageId,
    count: usize,
    lengths: &[usize],
    polarity: Polarity,
    seed: u64,
) -> Result<Vec<LabeledSample>, CliError> {
    let al = id.alphabet();
    let jobs: Vec<(usize, usize)> = lengths.iter().flat_map(|&len| (0..count).map(move |i| (len, i))).collect();
    let rows: Vec<Result<Option<LabeledSample>, LangError>> = jobs
        .par_iter()
        .map(|&(len, i)| {
            let positive = match polarity {
                Polarity::Both => i % 2 == 0,
                Polarity::Positive => true,
                Polarity::Negative => false,
            };
            let s = seed.wrapping_add((len as u64) << 32).wrapping_add(i as u64);
            match generate(id, len, positive, s) {
                Ok(w) => Ok(Some(LabeledSample { lang: id, string: al.format_word(&w), label: positive, seed: s })),
                Err(LangError::Infeasible { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

enum Side {
    Formula(Arc<Ltl>),
    Dfa(Dfa),
    Lang(LanguageId),
    Spec(TransformerSpec),
}

enum RawSide {
    Formula(String),
    Dfa(Dfa),
    Lang(LanguageId),
    Spec(TransformerSpec),
}

impl RawSide {
    fn parse(text: &str) -> Result<Self, CliError> {
        let (kind, rest) =
            text.split_once(':').ok_or_else(|| input(format!("side '{text}' lacks a kind prefix such as dfa:")))?;
        Ok(match kind {
            "formula" => RawSide::Formula(rest.to_string()),
            "formula-file" => RawSide::Formula(formula_text(&read_source(rest)?)?),
            "dfa" => RawSide::Dfa(load_dfa(rest)?),
            "lang" => RawSide::Lang(rest.parse()?),
            "spec" => RawSide::Spec(load_spec(rest)?),
            _ => return Err(input(format!("unknown side kind '{kind}'"))),
        })
    }

    fn alphabet(&self) -> Option<Alphabet> {
        match self {
            RawSide::Formula(_) => None,
            RawSide::Dfa(d) => Some(d.alphabet().clone()),
            RawSide::Lang(id) => Some(id.alphabet()),
            RawSide::Spec(s) => Some(s.alphabet.clone()),
        }
    }

    fn resolve(self, alphabet: &Alphabet) -> Result<Side, CliError> {
        Ok(match self {
            RawSide::Formula(text) => Side::Formula(parse_ltl(&text, alphabet)?),
            RawSide::Dfa(d) => Side::Dfa(d),
            RawSide::Lang(id) => Side::Lang(id),
            RawSide::Spec(s) => Side::Spec(s),
        })
    }
}

impl Side {
    fn membership(&self, alphabet: &Alphabet, mode: Option<Mode>) -> Result<Box<dyn Membership + '_>, CliError> {
        Ok(match self {
            Side::Formula(phi) => {
                Box::new(FormulaMembership::new(phi, alphabet, mode.unwrap_or_else(|| phi.default_mode()))?)
            }
            Side::Dfa(d) => Box::new(DfaMembership(d)),
            Side::Lang(id) => Box::new(LanguageMembership(*id)),
            Side::Spec(s) => Box::new(TransformerMembership(s)),
        })
    }

    fn dfa(&self) -> Result<Option<Dfa>, CliError> {
        Ok(match self {
            Side::Dfa(d) => Some(d.clone()),
            Side::Lang(id) => Some(reference_dfa(*id)?),
            _ => None,
        })
    }
}

fn verify_cmd(
    cfg: &CliConfig,
    a: &str,
    b: &str,
    max_len: usize,
    alphabet: Option<&str>,
    tolerance: Option<u32>,
) -> Result<EquivReport, CliError> {
    let (ra, rb) = (RawSide::parse(a)?, RawSide::parse(b)?);
    let al = match alphabet {
        Some(text) => parse_alphabet(text)?,
        None => ra.alphabet().or_else(|| rb.alphabet()).ok_or_else(|| input("formula sides need --alphabet"))?,
    };
    for side in [&ra, &rb] {
        if let Some(other) = side.alphabet() {
            if other != al {
                return Err(input(format!("alphabets differ: {:?} vs {:?}", al.symbols(), other.symbols())));
            }
        }
    }
    let (sa, sb) = (ra.resolve(&al)?, rb.resolve(&al)?);
    let lm = |s: &Side| matches!(s, Side::Spec(spec) if matches!(spec.head, Head::Lm { .. }));
    if lm(&sa) || lm(&sb) {
        let (spec_side, dfa_side) = if lm(&sb) { (&sb, &sa) } else { (&sa, &sb) };
        let Side::Spec(spec) = spec_side else { unreachable!() };
        let d = dfa_side.dfa()?.ok_or_else(|| input("a language-model spec is checked against dfa: or lang:"))?;
        return Ok(equiv_lm(&d, spec, max_len, tolerance, cfg.budget)?);
    }
    let mode = cfg.mode.map(Mode::from);
    let (ma, mb) = (sa.membership(&al, mode)?, sb.membership(&al, mode)?);
    Ok(equiv_language(ma.as_ref(), mb.as_ref(), &al, max_len, cfg.budget)?)
}
