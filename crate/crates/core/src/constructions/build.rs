//! The paired dependent construction and the tightness witness.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{ris_certify, RisCertificate};
use crate::error::{domain, Result};
use crate::families::{family_member, AdmissibilityMode, FamilySpec, FiniteSet};
use crate::functionals::{
    evaluate, validate_dependent, validate_w, CodingFunction, CodingTable, DependentCertificate, DependentData,
    Interval, Node, OpKind, TreeFunctional, WContext,
};
use crate::norm::{fragment_norm, Bound, NormOptions};
use crate::parameters::SpaceSpec;
use crate::rational::{self, q, recip, Q};
use crate::vectors::{is_block_sequence, make_scc, FinVector, SccCheck};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    pub budget: u64,
    /// Number of pieces `|K_i|` per member.
    #[serde(rename = "perMember")]
    pub per_member: usize,
    /// Number of members `|F|`; the largest admissible count when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<usize>,
    /// Blocks per `A_k` after the first piece of a member (tightness witness).
    pub group: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { budget: crate::norm::DEFAULT_BUDGET, per_member: 2, members: None, group: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    DependentPair,
    TightWitness,
}

/// `x_{i,k}` with its norming functional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnerPiece {
    pub i: usize,
    pub k: usize,
    /// Indices `r` of the intervals `E_r` the piece lives on.
    pub intervals: Vec<usize>,
    pub vector: FinVector,
    pub functional: TreeFunctional,
    pub scc: SccCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiddleLevel {
    pub i: usize,
    pub level: usize,
    #[serde(with = "rational::serde_q")]
    pub scale: Q,
    #[serde(with = "rational::serde_q_vec")]
    pub coeffs: Vec<Q>,
    pub vector: FinVector,
    pub functional: TreeFunctional,
    pub scc: SccCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterLevel {
    pub level: usize,
    #[serde(with = "rational::serde_q")]
    pub scale: Q,
    #[serde(with = "rational::serde_q_vec")]
    pub coeffs: Vec<Q>,
    pub vector: FinVector,
    pub functional: TreeFunctional,
    pub scc: SccCheck,
}

/// One side of a construction (`y` or `z`, or the single `x`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideTrace {
    pub name: String,
    pub inner: Vec<InnerPiece>,
    pub middle: Vec<MiddleLevel>,
    pub outer: OuterLevel,
    pub certificate: DependentCertificate,
    /// The inner pieces as a 2-RIS along the least feasible `(j_k)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris: Option<RisCertificate>,
    /// `x*(x)`.
    #[serde(with = "rational::serde_q")]
    pub value: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaAssignment {
    /// Number of leading intervals coded.
    pub prefix: usize,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TraceCheck {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        TraceCheck { name: name.into(), passed, detail: Some(detail.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub kind: TraceKind,
    pub j: usize,
    pub spec: SpaceSpec,
    pub intervals: Vec<Interval>,
    pub sigma: Vec<SigmaAssignment>,
    pub table: CodingTable,
    #[serde(rename = "tableHash")]
    pub table_hash: String,
    pub sides: Vec<SideTrace>,
    pub checks: Vec<TraceCheck>,
    /// Declared constants of the RIS chain and the finite partial sums.
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<String>,
    pub passed: bool,
}

/// A block normalized over the operation fragment, with its norming functional.
struct Normalized {
    vector: FinVector,
    functional: TreeFunctional,
}

enum Step<T> {
    Done(T),
    Partial(String),
}

fn normalize(x: &FinVector, spec: &SpaceSpec, opts: &NormOptions) -> Result<Step<Normalized>> {
    let r = fragment_norm(x, spec, opts)?;
    if r.bound == Bound::LowerBound {
        return Ok(Step::Partial(format!("norm budget exhausted on a block at {:?}", x.range())));
    }
    let witness = r.witness.expect("non-zero vector has a witness");
    Ok(Step::Done(Normalized { vector: x.scale(&r.fragment.recip()), functional: witness }))
}

fn even_kind(spec: &SpaceSpec, level: usize) -> Result<OpKind> {
    match spec.ops_at(level)?.first() {
        Some(op) if op.mode == AdmissibilityMode::Allowable => Ok(OpKind::Allowable),
        Some(_) => Ok(OpKind::Block),
        None => domain(format!("no operation is available at level {level}")),
    }
}

/// Least even `2j_1` with `j_1 ∈ L_1` and `m_{2j_1} > n_{2j+1}`.
fn first_level(spec: &SpaceSpec, j: usize) -> Result<usize> {
    let n = spec.params.n(2 * j + 1)?;
    for j1 in 1..=512u64 {
        if spec.params.in_l1(j1) && spec.params.m(2 * j1 as usize)? > n {
            return Ok(2 * j1 as usize);
        }
    }
    domain("no admissible first weight index below 1024")
}

fn uniform(k: usize) -> Vec<Q> {
    vec![q(1, k as i64); k]
}

/// Member plan: for every member, the interval indices of each `A_k`.
type Plan = Vec<Vec<Vec<usize>>>;

/// Longest prefix of members whose functional minima stay in `S_{n_{2j+1}}`.
fn header_prefix(supports: &[Vec<FiniteSet>], j: usize, spec: &SpaceSpec) -> Result<usize> {
    let family = FamilySpec::s(spec.params.n_index(2 * j + 1)?);
    let count = supports.first().map_or(0, Vec::len);
    let mut best = 0;
    for c in 1..=count {
        let ok = supports.iter().all(|side| {
            let mins: Vec<u64> = side[..c].iter().filter_map(FiniteSet::min).collect();
            FiniteSet::new(mins).is_ok_and(|m| family_member(&m, &family))
        });
        if !ok {
            break;
        }
        best = c;
    }
    Ok(best)
}

/// Builds one side from its pieces, the shared plan and the shared levels.
fn assemble_side(
    name: &str,
    pieces: Vec<Normalized>,
    plan: &Plan,
    levels: &[usize],
    intervals: &[Interval],
    j: usize,
    spec: &SpaceSpec,
    cf: &CodingFunction,
) -> Result<SideTrace> {
    let mut pieces = pieces.into_iter();
    let mut inner = Vec::new();
    let mut middle = Vec::new();
    for (i, (member, &level)) in plan.iter().zip(levels).enumerate() {
        let n = spec.params.n_index(level)?;
        let m = rational::from_big(&spec.params.m(level)?);
        let mut vectors = Vec::new();
        let mut children = Vec::new();
        for (k, a) in member.iter().enumerate() {
            let p = pieces.next().expect("one piece per block");
            let scc = make_scc(std::slice::from_ref(&p.vector), 0, &Q::one(), Some(&[Q::one()]))?.2;
            vectors.push(p.vector.clone());
            children.push(p.functional.clone());
            inner.push(InnerPiece { i, k, intervals: a.clone(), vector: p.vector, functional: p.functional, scc });
        }
        let coeffs = uniform(vectors.len());
        let (avg, _, scc) = make_scc(&vectors, n, &(&m * &m).recip(), Some(&coeffs))?;
        middle.push(MiddleLevel {
            i,
            level,
            vector: avg.scale(&m),
            scale: m,
            coeffs,
            functional: TreeFunctional::op(spec.theta(level)?, level, even_kind(spec, level)?, children),
            scc,
        });
    }
    let top = 2 * j + 1;
    let m = rational::from_big(&spec.params.m(top)?);
    let coeffs = uniform(middle.len());
    let mids: Vec<FinVector> = middle.iter().map(|l| l.vector.clone()).collect();
    let (avg, _, scc) = make_scc(&mids, spec.params.n_index(top)?, &(&m * &m).recip(), Some(&coeffs))?;
    let data = DependentData { intervals: intervals.to_vec(), blocks: plan.clone() };
    let members: Vec<TreeFunctional> = middle.iter().map(|l| l.functional.clone()).collect();
    let certificate = validate_dependent(&members, j, &data, cf, spec)?;
    let functional = TreeFunctional::Node(Node {
        w: spec.theta(top)?,
        j: Some(top),
        op: OpKind::OddDependent,
        children: members,
        set: None,
        dependent: Some(data),
    });
    let vector = avg.scale(&m);
    let value = evaluate(&functional, &vector);
    Ok(SideTrace {
        name: name.into(),
        inner,
        middle,
        outer: OuterLevel { level: top, scale: m, coeffs, vector, functional, scc },
        certificate,
        ris: None,
        value,
    })
}

/// Weight indices of the members: `2j_1` from `L_1`, then `σ` of the
/// intervals used so far.
fn assign_levels(
    plan: &Plan,
    intervals: &[Interval],
    j: usize,
    spec: &SpaceSpec,
    cf: &mut CodingFunction,
) -> Result<(Vec<usize>, Vec<SigmaAssignment>)> {
    let mut levels = vec![first_level(spec, j)?];
    let mut sigma = Vec::new();
    let mut used = 0;
    for member in &plan[..plan.len() - 1] {
        used += member.iter().map(Vec::len).sum::<usize>();
        let t = cf.sigma(&intervals[..used])?;
        sigma.push(SigmaAssignment { prefix: used, t });
        levels.push(t as usize);
    }
    Ok((levels, sigma))
}

/// `n_{2j_{i+1}} >= ρ(maxsupp y_i) + maxsupp y_i`.
fn growth_checks(side: &SideTrace, spec: &SpaceSpec) -> Result<Vec<TraceCheck>> {
    let mut out = Vec::new();
    for w in side.middle.windows(2) {
        let top = w[0].vector.max_supp().unwrap_or(0);
        let need = if top == 0 { BigUint::zero() } else { spec.params.rho(top)?.0 + BigUint::from(top) };
        let have = spec.params.n(w[1].level)?;
        out.push(TraceCheck::new(
            format!("(E) {} member {}", side.name, w[0].i + 1),
            have >= need,
            format!("n_{} = {have}, rho(maxsupp) + maxsupp = {need}", w[1].level),
        ));
    }
    Ok(out)
}

/// The least strictly increasing `(j_k)` keeping every piece a 2-RIS term.
fn least_ris(pieces: &[FinVector], spec: &SpaceSpec, budget: u64) -> Result<RisCertificate> {
    let two = q(2, 1);
    let mut jseq: Vec<usize> = Vec::new();
    for k in 0..pieces.len() {
        let start = jseq.last().map_or(1, |&p| p + 1);
        let mut chosen = None;
        for cand in start..start + 64 {
            if let Some(&prev) = jseq.last() {
                let top = Q::from_integer(pieces[k - 1].max_supp().unwrap_or(0).into());
                let ratio = rational::from_big(&spec.params.m(cand)?) / rational::from_big(&spec.params.m(prev)?);
                if top > ratio {
                    continue;
                }
            }
            let one = ris_certify(&pieces[k..=k], &[cand], &two, spec, budget)?;
            if !one.status.is_refuted() {
                chosen = Some(cand);
                break;
            }
        }
        match chosen {
            Some(c) => jseq.push(c),
            None => jseq.push(start),
        }
    }
    ris_certify(pieces, &jseq, &two, spec, budget)
}

fn finish(
    kind: TraceKind,
    j: usize,
    spec: &SpaceSpec,
    intervals: Vec<Interval>,
    sigma: Vec<SigmaAssignment>,
    cf: &CodingFunction,
    sides: Vec<SideTrace>,
    mut checks: Vec<TraceCheck>,
    notes: Vec<String>,
    stored_hash: Option<&str>,
) -> ConstructionTrace {
    let hash = cf.table_hash();
    checks.push(TraceCheck::new("table hash", stored_hash.is_none_or(|h| h == hash), hash.clone()));
    for s in &sides {
        let ctx = WContext { spec, sigma: Some(cf), history: None };
        let w = validate_w(&s.outer.functional, &ctx);
        let detail =
            w.failure.as_ref().map_or("valid".to_string(), |f| format!("{} at {:?}: {}", f.rule, f.path, f.message));
        checks.push(TraceCheck::new(format!("W {}*", s.name), w.valid, detail));
    }
    let passed = sides.iter().all(|s| s.certificate.passed) && checks.iter().all(|c| c.passed);
    ConstructionTrace {
        kind,
        j,
        spec: spec.clone(),
        intervals,
        sigma,
        table: cf.export(),
        table_hash: hash,
        sides,
        checks,
        notes,
        partial: None,
        passed,
    }
}

fn partial_trace(kind: TraceKind, j: usize, spec: &SpaceSpec, cf: &CodingFunction, why: String) -> ConstructionTrace {
    ConstructionTrace {
        kind,
        j,
        spec: spec.clone(),
        intervals: vec![],
        sigma: vec![],
        table: cf.export(),
        table_hash: cf.table_hash(),
        sides: vec![],
        checks: vec![],
        notes: vec![],
        partial: Some(why),
        passed: false,
    }
}

fn partial_sum_note(j: usize, spec: &SpaceSpec) -> Result<String> {
    Ok(if j == 0 {
        "partial sum of 1/m_{2j_n}: no term (j = 0)".to_string()
    } else {
        format!("partial sum of 1/m_{{2j_n}} over this level: {}", rational::to_string(&recip(&spec.params.m(2 * j)?)))
    })
}

/// One level `(u, v)` of the paired construction over the blocks `(ŷ_k)`
/// and `(ẑ_k)`.
///
/// The `k`-th pieces share the interval spanned by both blocks, so both
/// special functionals are coded by the same `σ` values.
pub fn build_dependent_pair(
    blocks_y: &[FinVector],
    blocks_z: &[FinVector],
    j: usize,
    spec: &SpaceSpec,
    cf: &mut CodingFunction,
    opts: &BuildOptions,
) -> Result<ConstructionTrace> {
    let kind = TraceKind::DependentPair;
    if blocks_y.len() < 2 || blocks_y.len() != blocks_z.len() {
        return domain("the pair needs two block sequences of the same length, at least 2");
    }
    if !is_block_sequence(blocks_y) || !is_block_sequence(blocks_z) {
        return domain("blocks must form block sequences");
    }
    if opts.per_member == 0 {
        return domain("perMember must be positive");
    }
    let intervals: Vec<Interval> = blocks_y
        .iter()
        .zip(blocks_z)
        .map(|(y, z)| {
            let (a, b) = (y.range().expect("non-zero"), z.range().expect("non-zero"));
            Interval(a.0.min(b.0), a.1.max(b.1))
        })
        .collect();
    if intervals.windows(2).any(|w| w[0].1 >= w[1].0) {
        return domain("the ranges of the paired blocks cannot be aligned");
    }
    let nopts = NormOptions::with_budget(opts.budget);
    let mut sides_pieces = Vec::new();
    for blocks in [blocks_y, blocks_z] {
        let mut pieces = Vec::new();
        for b in blocks {
            match normalize(b, spec, &nopts)? {
                Step::Done(p) => pieces.push(p),
                Step::Partial(why) => return Ok(partial_trace(kind, j, spec, cf, why)),
            }
        }
        sides_pieces.push(pieces);
    }
    let available = blocks_y.len() / opts.per_member;
    let supports: Vec<Vec<FiniteSet>> = sides_pieces
        .iter()
        .map(|ps| {
            ps.chunks(opts.per_member)
                .take(available)
                .map(|c| {
                    let all: Vec<u64> =
                        c.iter().flat_map(|p| p.functional.support().iter().collect::<Vec<_>>()).collect();
                    FiniteSet::from_unsorted(all).expect("finite")
                })
                .collect()
        })
        .collect();
    let count = pick_members(header_prefix(&supports, j, spec)?, opts)?;
    let plan: Plan =
        (0..count).map(|i| (0..opts.per_member).map(|k| vec![i * opts.per_member + k]).collect()).collect();
    let used = count * opts.per_member;
    let intervals = intervals[..used].to_vec();
    let (levels, sigma) = assign_levels(&plan, &intervals, j, spec, cf)?;
    let mut sides = Vec::new();
    let mut checks = Vec::new();
    for (name, mut pieces) in ["y", "z"].into_iter().zip(sides_pieces) {
        pieces.truncate(used);
        let ris_input: Vec<FinVector> = pieces.iter().map(|p| p.vector.clone()).collect();
        let mut side = assemble_side(name, pieces, &plan, &levels, &intervals, j, spec, cf)?;
        checks.extend(growth_checks(&side, spec)?);
        side.ris = Some(least_ris(&ris_input, spec, opts.budget)?);
        sides.push(side);
    }
    for k in 0..used {
        let same = sides.iter().all(|s| {
            let (a, b) = (s.inner[k].vector.range(), s.inner[k].functional.support());
            let e = &intervals[k];
            a.is_some_and(|(lo, hi)| e.contains(lo) && e.contains(hi)) && b.iter().all(|x| e.contains(x))
        });
        if !same {
            checks.push(TraceCheck::new("(C) ranges", false, format!("piece {} leaves its interval", k + 1)));
        }
    }
    let notes = vec![
        "inner pieces: declared 2-RIS; middle scaled combinations: declared 28-RIS".to_string(),
        partial_sum_note(j, spec)?,
    ];
    Ok(finish(kind, j, spec, intervals, sigma, cf, sides, checks, notes, None))
}

fn pick_members(max: usize, opts: &BuildOptions) -> Result<usize> {
    match opts.members {
        Some(0) => domain("members must be positive"),
        Some(c) if c > max => domain(format!("{c} members requested but at most {max} fit")),
        Some(c) => Ok(c),
        None if max == 0 => domain("not enough blocks for one member"),
        None => Ok(max),
    }
}

/// The pair `(x, x*)` with `x*(x) = 1` built over the blocks `(z_r)`; the
/// intervals of the special functional are exactly the block ranges.
pub fn build_tight_witness(
    blocks: &[FinVector],
    j: usize,
    spec: &SpaceSpec,
    cf: &mut CodingFunction,
    opts: &BuildOptions,
) -> Result<ConstructionTrace> {
    let kind = TraceKind::TightWitness;
    if blocks.is_empty() || !is_block_sequence(blocks) {
        return domain("blocks must form a non-empty block sequence");
    }
    if opts.per_member == 0 || opts.group == 0 {
        return domain("perMember and group must be positive");
    }
    let nopts = NormOptions::with_budget(opts.budget);
    let mut units = Vec::new();
    for b in blocks {
        match normalize(b, spec, &nopts)? {
            Step::Done(p) => units.push(p.vector),
            Step::Partial(why) => return Ok(partial_trace(kind, j, spec, cf, why)),
        }
    }
    let per = 1 + (opts.per_member - 1) * opts.group;
    let available = blocks.len() / per;
    let mut plan: Plan = Vec::new();
    let mut pieces = Vec::new();
    let mut supports = Vec::new();
    for i in 0..available {
        let base = i * per;
        let mut member = vec![vec![base]];
        for k in 1..opts.per_member {
            let start = base + 1 + (k - 1) * opts.group;
            member.push((start..start + opts.group).collect());
        }
        let mut support = Vec::new();
        for a in &member {
            let parts: Vec<FinVector> = a.iter().map(|&r| units[r].clone()).collect();
            let (raw, _, _) = make_scc(&parts, 0, &Q::one(), Some(&uniform(parts.len())))?;
            match normalize(&raw, spec, &nopts)? {
                Step::Done(p) => {
                    support.extend(p.functional.support().iter());
                    pieces.push(p);
                }
                Step::Partial(why) => return Ok(partial_trace(kind, j, spec, cf, why)),
            }
        }
        supports.push(FiniteSet::from_unsorted(support)?);
        plan.push(member);
    }
    let count = pick_members(header_prefix(&[supports], j, spec)?, opts)?;
    plan.truncate(count);
    pieces.truncate(count * opts.per_member);
    let intervals: Vec<Interval> = blocks[..count * per]
        .iter()
        .map(|b| {
            let (a, c) = b.range().expect("non-zero");
            Interval(a, c)
        })
        .collect();
    let (levels, sigma) = assign_levels(&plan, &intervals, j, spec, cf)?;
    let mut checks = Vec::new();
    let side = assemble_side("x", pieces, &plan, &levels, &intervals, j, spec, cf)?;
    for (p, prev) in side.inner.iter().skip(1).zip(&side.inner) {
        if p.k == 0 {
            continue;
        }
        let top = prev.vector.max_supp().unwrap_or(1);
        let rho = spec.params.rho(top)?.0;
        let index = u64::try_from(rho).unwrap_or(u64::MAX);
        let a = FiniteSet::new(p.intervals.iter().map(|&r| r as u64 + 1).collect())?;
        checks.push(TraceCheck::new(
            format!("(E') member {} piece {}", p.i + 1, p.k + 1),
            family_member(&a, &FamilySpec::s(index)),
            format!("A_k = {:?} against S_{index}", a.as_slice()),
        ));
    }
    checks.push(TraceCheck::new("x*(x) = 1", side.value.is_one(), rational::to_string(&side.value)));
    let notes = vec![partial_sum_note(j, spec)?];
    Ok(finish(kind, j, spec, intervals, sigma, cf, vec![side], checks, notes, None))
}

/// Re-derives every certificate of a trace from its serialized content.
///
/// Returns the trace with certificates, checks and verdict recomputed.
pub fn revalidate(trace: &ConstructionTrace) -> Result<ConstructionTrace> {
    let spec = &trace.spec;
    let cf = CodingFunction::import(&trace.table)?;
    let mut out = trace.clone();
    let mut checks: Vec<TraceCheck> = Vec::new();
    for side in &mut out.sides {
        let node =
            side.outer.functional.as_node().ok_or_else(|| crate::Error::Domain("outer functional is a leaf".into()))?;
        let data = node
            .dependent
            .clone()
            .ok_or_else(|| crate::Error::Domain("outer functional has no dependent data".into()))?;
        side.certificate = validate_dependent(&node.children, trace.j, &data, &cf, spec)?;
        side.value = evaluate(&side.outer.functional, &side.outer.vector);
    }
    for side in &out.sides {
        if trace.kind == TraceKind::DependentPair {
            checks.extend(growth_checks(side, spec)?);
        }
    }
    // checks that do not depend on the recomputed certificates are kept
    for c in &trace.checks {
        let recomputed =
            c.name.starts_with("(E) ") || c.name.starts_with("W ") || c.name == "x*(x) = 1" || c.name == "table hash";
        if !recomputed {
            checks.push(c.clone());
        }
    }
    if trace.kind == TraceKind::TightWitness {
        if let Some(side) = out.sides.first() {
            checks.push(TraceCheck::new("x*(x) = 1", side.value.is_one(), rational::to_string(&side.value)));
        }
    }
    let sides = std::mem::take(&mut out.sides);
    let mut fresh = finish(
        trace.kind,
        trace.j,
        spec,
        trace.intervals.clone(),
        trace.sigma.clone(),
        &cf,
        sides,
        checks,
        trace.notes.clone(),
        Some(&trace.table_hash),
    );
    fresh.partial = trace.partial.clone();
    if fresh.partial.is_some() {
        fresh.passed = false;
    }
    Ok(fresh)
}
