//! Command-line front end: JSON in, one JSON report out.
//!
//! Exit codes: 0 success or pass (including hypothesis-not-met), 1 a failed
//! verdict, 2 a usage, parse or domain error.

use std::ffi::OsString;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constructions::{
    build_dependent_pair, build_tight_witness, lemma14_check, lemma_f3_check, lemma_f3a_check, lemma_f4_check,
    ris_certify, BuildOptions, RisScc, SccData, Status,
};
use crate::error::{Error, Result};
use crate::families::{family_member, is_admissible, maximal_family_subset, AdmissibilityMode, FamilySpec, FiniteSet};
use crate::functionals::{
    evaluate, g_operation, validate_special_sequence_w4, validate_w, CodingFunction, CodingTable, HistoryCoder,
    HistoryEntry, Interval, TreeFunctional, WContext,
};
use crate::norm::{norm, norm_weight_restricted, NormOptions, DEFAULT_BUDGET};
use crate::parameters::{ParameterSystem, SpaceSpec};
use crate::rational::{self, Q};
use crate::report::{Report, Verdict};
use crate::vectors::{check_basic_scc, repeated_average, FinVector, IncreasingSeq};
use crate::verify::{run_suite, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(name = "tsirelson", version, about = "Schreier families, mixed Tsirelson norms and norming-set certificates")]
pub struct Cli {
    /// Space specification (JSON file); a "spec" field in the payload takes precedence.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Frozen coding table (JSON file).
    #[arg(long = "sigma-table", global = true)]
    pub sigma_table: Option<PathBuf>,
    /// Search budget for the norm engine.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Seed for `verify`.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Payload file; standard input when absent.
    #[arg(long = "in", global = true)]
    pub input: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaKind {
    #[value(name = "lemma14", alias = "1.4")]
    Lemma14,
    F3,
    F3a,
    F4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Membership of a finite set in A_k, S_n or S_n^M.
    Family,
    /// Greedy maximal initial subset of an increasing stream.
    Maximal,
    /// Admissibility or allowability of a sequence of sets.
    Admissible,
    /// Basic scc certificate, or a repeated average when "L" is given.
    Scc,
    /// Norm of a finitely supported vector, with a witness functional.
    Norm,
    /// Norm over functionals whose root weight is at least "minWeight".
    NormRestricted,
    /// Evaluates a tree functional on a vector.
    Eval,
    /// Checks a tree functional against the norming-set rules.
    ValidateW,
    /// Checks a W_4 special sequence.
    ValidateW4,
    /// Codes interval sequences, extending the given table.
    Sigma,
    /// Applies the G-operation to a functional.
    GOp,
    /// Certifies a rapidly increasing sequence of blocks.
    Ris,
    /// Desk-scale check of one of the quantitative estimates.
    Lemma {
        #[arg(long, value_enum)]
        kind: LemmaKind,
    },
    /// Builds and validates a dependent pair from two block sequences.
    BuildPair,
    /// Builds a tight witness x* with x*(x) = 1.
    BuildWitness,
    /// Runs a named property suite.
    Verify { suite: String },
}

/// Parses arguments, runs the command and returns the exit code and the
/// report text.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (0, e.to_string());
            }
            return (2, render(&json!({"error": {"kind": "usage", "message": e.to_string().trim_end()}})));
        }
    };
    let (code, value) = match dispatch(&cli) {
        Ok((verdict, v)) => (if verdict { 0 } else { 1 }, v),
        Err(e) => (2, json!({"error": {"kind": e.kind(), "message": e.to_string()}})),
    };
    let text = render(&value);
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &text) {
            return (2, render(&json!({"error": {"kind": "io", "message": e.to_string()}})));
        }
        return (code, String::new());
    }
    (code, text)
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn read_payload(cli: &Cli) -> Result<Value> {
    let text = match &cli.input {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(e.to_string()))?;
            s
        }
    };
    if text.trim().is_empty() {
        return Ok(json!({}));
    }
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Payload spec, then `--spec`, then the command default.
fn resolve_spec(cli: &Cli, payload: &mut Value, default: impl FnOnce() -> SpaceSpec) -> Result<SpaceSpec> {
    let spec = if let Some(s) = payload.as_object_mut().and_then(|o| o.remove("spec")) {
        parse(s)?
    } else if let Some(p) = &cli.spec {
        read_json(p)?
    } else {
        default()
    };
    spec.validate()?;
    Ok(spec)
}

fn coding(cli: &Cli, params: &ParameterSystem) -> Result<CodingFunction> {
    match &cli.sigma_table {
        Some(p) => {
            let table: CodingTable = read_json(p)?;
            if &table.params != params {
                return Err(Error::Domain("the coding table was built for other parameters".into()));
            }
            CodingFunction::import(&table)
        }
        None => Ok(CodingFunction::new(params.clone())),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyReq {
    #[serde(rename = "F")]
    f: FiniteSet,
    family: FamilySpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MaximalReq {
    #[serde(rename = "L")]
    l: IncreasingSeq,
    family: FamilySpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdmissibleReq {
    segments: Vec<FiniteSet>,
    family: FamilySpec,
    #[serde(default = "admissible_mode")]
    mode: AdmissibilityMode,
}

fn admissible_mode() -> AdmissibilityMode {
    AdmissibilityMode::Admissible
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SccReq {
    #[serde(default)]
    x: Option<FinVector>,
    #[serde(rename = "L", default)]
    l: Option<IncreasingSeq>,
    n: u64,
    #[serde(default, with = "rational::serde_q_opt")]
    eps: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormReq {
    x: FinVector,
    #[serde(default)]
    candidates: Vec<TreeFunctional>,
    #[serde(rename = "minWeight", default, with = "rational::serde_q_opt")]
    min_weight: Option<Q>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalReq {
    f: TreeFunctional,
    x: FinVector,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateReq {
    f: TreeFunctional,
    #[serde(default)]
    history: Option<Vec<HistoryEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateW4Req {
    fs: Vec<TreeFunctional>,
    j: usize,
    #[serde(default)]
    history: Vec<HistoryEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaReq {
    sequences: Vec<Vec<Interval>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GOpReq {
    f: FinVector,
    #[serde(rename = "F")]
    set: FiniteSet,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RisReq {
    blocks: Vec<FinVector>,
    jseq: Vec<usize>,
    #[serde(rename = "C", with = "rational::serde_q")]
    c: Q,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma14Req {
    x: SccData,
    j: usize,
    #[serde(rename = "C", with = "rational::serde_q")]
    c: Q,
    #[serde(default)]
    family: Vec<TreeFunctional>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightedLemmaReq {
    x: RisScc,
    j: usize,
    #[serde(default)]
    f: Option<TreeFunctional>,
    #[serde(default)]
    s: Option<usize>,
    #[serde(default)]
    family: Vec<TreeFunctional>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairReq {
    #[serde(rename = "blocksY")]
    blocks_y: Vec<FinVector>,
    #[serde(rename = "blocksZ")]
    blocks_z: Vec<FinVector>,
    j: usize,
    #[serde(rename = "perMember", default)]
    per_member: Option<usize>,
    #[serde(default)]
    members: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessReq {
    blocks: Vec<FinVector>,
    j: usize,
    #[serde(rename = "perMember", default)]
    per_member: Option<usize>,
    #[serde(default)]
    members: Option<usize>,
    #[serde(default)]
    group: Option<usize>,
}

fn report_exit(r: &Report) -> bool {
    r.verdict != Verdict::Fail
}

fn build_options(cli: &Cli, per_member: Option<usize>, members: Option<usize>, group: Option<usize>) -> BuildOptions {
    let d = BuildOptions::default();
    BuildOptions {
        budget: cli.budget,
        per_member: per_member.unwrap_or(d.per_member),
        members,
        group: group.unwrap_or(d.group),
    }
}

fn dispatch(cli: &Cli) -> Result<(bool, Value)> {
    if let Command::Verify { suite } = &cli.command {
        let s = run_suite(suite, cli.seed)?;
        return Ok((s.passed, to_value(&s)));
    }
    let mut payload = read_payload(cli)?;
    let xcr = || SpaceSpec::xcr(ParameterSystem::toy());
    match &cli.command {
        Command::Family => {
            let r: FamilyReq = parse(payload)?;
            Ok((true, json!({"member": family_member(&r.f, &r.family)})))
        }
        Command::Maximal => {
            let r: MaximalReq = parse(payload)?;
            let set = maximal_family_subset(r.l.iter(), &r.family)?;
            Ok((true, json!({"set": set})))
        }
        Command::Admissible => {
            let r: AdmissibleReq = parse(payload)?;
            Ok((true, json!({"admissible": is_admissible(&r.segments, &r.family, r.mode)?})))
        }
        Command::Scc => {
            let r: SccReq = parse(payload)?;
            let x = match (r.x, r.l) {
                (Some(x), None) => x,
                (None, Some(l)) => repeated_average(&l, r.n)?,
                _ => return Err(Error::Parse("give exactly one of \"x\" and \"L\"".into())),
            };
            match r.eps {
                Some(eps) => {
                    let c = check_basic_scc(&x, r.n, &eps)?;
                    Ok((c.passed, json!({"x": x, "check": c})))
                }
                None => Ok((true, json!({"x": x}))),
            }
        }
        Command::Norm | Command::NormRestricted => {
            let spec = resolve_spec(cli, &mut payload, SpaceSpec::tsirelson_toy)?;
            let r: NormReq = parse(payload)?;
            let opts = NormOptions { candidates: r.candidates, budget: cli.budget };
            let result = match (&cli.command, r.min_weight) {
                (Command::NormRestricted, Some(w)) => norm_weight_restricted(&r.x, &spec, &w, &opts)?,
                (Command::NormRestricted, None) => return Err(Error::Parse("missing field `minWeight`".into())),
                _ => norm(&r.x, &spec, &opts)?,
            };
            Ok((true, to_value(&result)))
        }
        Command::Eval => {
            let r: EvalReq = parse(payload)?;
            Ok((true, json!({"value": rational::to_string(&evaluate(&r.f, &r.x))})))
        }
        Command::ValidateW => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let r: ValidateReq = parse(payload)?;
            let cf = coding(cli, &spec.params)?;
            let hc = r.history.map(HistoryCoder::from_entries).transpose()?;
            let ctx = WContext { spec: &spec, sigma: Some(&cf), history: hc.as_ref() };
            let w = validate_w(&r.f, &ctx);
            Ok((w.valid, to_value(&w)))
        }
        Command::ValidateW4 => {
            let spec = resolve_spec(cli, &mut payload, || SpaceSpec::w4(ParameterSystem::toy()))?;
            let r: ValidateW4Req = parse(payload)?;
            let hc = HistoryCoder::from_entries(r.history)?;
            let rep = validate_special_sequence_w4(&r.fs, r.j, &spec, &hc);
            Ok((report_exit(&rep), to_value(&rep)))
        }
        Command::Sigma => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let r: SigmaReq = parse(payload)?;
            let mut cf = coding(cli, &spec.params)?;
            let mut values = Vec::new();
            for s in &r.sequences {
                values.push(cf.sigma(s)?);
            }
            Ok((true, json!({"values": values, "tableHash": cf.table_hash(), "table": cf.export()})))
        }
        Command::GOp => {
            let r: GOpReq = parse(payload)?;
            Ok((true, json!({"g": g_operation(&r.f, &r.set)?})))
        }
        Command::Ris => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let r: RisReq = parse(payload)?;
            let cert = ris_certify(&r.blocks, &r.jseq, &r.c, &spec, cli.budget)?;
            Ok((!matches!(cert.status, Status::Refuted { .. }), to_value(&cert)))
        }
        Command::Lemma { kind } => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let rep = match kind {
                LemmaKind::Lemma14 => {
                    let r: Lemma14Req = parse(payload)?;
                    lemma14_check(&r.x, r.j, &r.c, &r.family, &spec, cli.budget)?
                }
                LemmaKind::F3 | LemmaKind::F4 => {
                    let r: WeightedLemmaReq = parse(payload)?;
                    let f = r.f.ok_or_else(|| Error::Parse("missing field `f`".into()))?;
                    if *kind == LemmaKind::F3 {
                        lemma_f3_check(&r.x, r.j, &f, &spec, cli.budget)?
                    } else {
                        lemma_f4_check(&r.x, r.j, &f, &spec, cli.budget)?
                    }
                }
                LemmaKind::F3a => {
                    let r: WeightedLemmaReq = parse(payload)?;
                    let s = r.s.ok_or_else(|| Error::Parse("missing field `s`".into()))?;
                    lemma_f3a_check(&r.x, r.j, s, &r.family, &spec, cli.budget)?
                }
            };
            Ok((report_exit(&rep), to_value(&rep)))
        }
        Command::BuildPair => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let r: PairReq = parse(payload)?;
            let mut cf = coding(cli, &spec.params)?;
            let opts = build_options(cli, r.per_member, r.members, None);
            let t = build_dependent_pair(&r.blocks_y, &r.blocks_z, r.j, &spec, &mut cf, &opts)?;
            Ok((t.passed, to_value(&t)))
        }
        Command::BuildWitness => {
            let spec = resolve_spec(cli, &mut payload, xcr)?;
            let r: WitnessReq = parse(payload)?;
            let mut cf = coding(cli, &spec.params)?;
            let opts = build_options(cli, r.per_member, r.members, r.group);
            let t = build_tight_witness(&r.blocks, r.j, &spec, &mut cf, &opts)?;
            Ok((t.passed, to_value(&t)))
        }
        Command::Verify { .. } => unreachable!("handled above"),
    }
}
