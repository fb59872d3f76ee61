//! Membership certificates for `W` and `W_4` and the structural lemmas.

use num_bigint::BigUint;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use super::coding::{check_successive, CodingFunction, HistoryCoder, Interval};
use super::{tag_ord, DependentData, OpKind, TreeFunctional};
use crate::error::{domain, Error, Result};
use crate::families::AdmissibilityMode;
use crate::families::{family_member, FamilySpec, FiniteSet};
use crate::parameters::{Rule, SpaceSpec};
use crate::rational::{self, q};
use crate::report::{Check, Report, Verdict};
use crate::vectors::FinVector;

/// Half-open intervals `[n_{2p-1}, n_{2p})` of a set `F = {n_1 < ... < n_{2q}}`.
pub fn schreier_intervals(f: &FiniteSet) -> Vec<(u64, u64)> {
    f.as_slice().chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[1])).collect()
}

fn check_schreier_pairing(f: &FiniteSet) -> Result<()> {
    if f.len() % 2 == 1 {
        return Err(Error::NotSchreier(format!("|F| = {} is odd", f.len())));
    }
    if let Some(min) = f.min() {
        if f.len() as u64 > min {
            return Err(Error::NotSchreier(format!("2q = {} exceeds min F = {min}", f.len())));
        }
    }
    Ok(())
}

/// `g = (1/2) S_F f`.
pub fn g_operation(f: &FinVector, set: &FiniteSet) -> Result<FinVector> {
    check_schreier_pairing(set)?;
    let keep = schreier_intervals(set);
    Ok(f.filter(|i| keep.iter().any(|&(a, b)| a <= i && i < b)).scale(&q(1, 2)))
}

/// Validation context: the space plus the frozen coding tables.
#[derive(Debug, Clone, Copy)]
pub struct WContext<'a> {
    pub spec: &'a SpaceSpec,
    pub sigma: Option<&'a CodingFunction>,
    pub history: Option<&'a HistoryCoder>,
}

impl<'a> WContext<'a> {
    pub fn new(spec: &'a SpaceSpec) -> Self {
        WContext { spec, sigma: None, history: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WFailure {
    pub path: Vec<usize>,
    pub rule: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WReport {
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<WFailure>,
}

/// Certified membership of a tree in the norming set of `ctx.spec`.
///
/// Reports the first failing node in preorder.
pub fn validate_w(f: &TreeFunctional, ctx: &WContext) -> WReport {
    let mut path = Vec::new();
    match walk(f, ctx, &mut path) {
        Ok(()) => WReport { valid: true, failure: None },
        Err((rule, message)) => WReport { valid: false, failure: Some(WFailure { path, rule, message }) },
    }
}

type NodeFail = (String, String);

fn fail<T>(rule: &str, msg: impl Into<String>) -> std::result::Result<T, NodeFail> {
    Err((rule.to_string(), msg.into()))
}

fn walk(t: &TreeFunctional, ctx: &WContext, path: &mut Vec<usize>) -> std::result::Result<(), NodeFail> {
    let node = match t {
        TreeFunctional::Leaf(l) => {
            return if l.leaf == 0 { fail("leaf", "indices start at 1") } else { Ok(()) };
        }
        TreeFunctional::Node(n) => n,
    };
    let spec = ctx.spec;
    match node.op {
        OpKind::GOp => {
            if !spec.has_rule(|r| matches!(r, Rule::GOperation)) {
                return fail("g-op", "the space has no G-operation");
            }
            if node.w != q(1, 2) {
                return fail("g-op", "G-operation weight must be 1/2");
            }
            let Some(set) = &node.set else { return fail("g-op", "missing F") };
            if let Err(e) = check_schreier_pairing(set) {
                return fail("g-op", e.to_string());
            }
            if node.children.len() != 1 {
                return fail("g-op", "G-operation takes exactly one functional");
            }
        }
        kind => {
            let Some(j) = node.j else { return fail("weight", "operation node without weight index") };
            match spec.theta(j) {
                Ok(th) if th == node.w => {}
                Ok(th) => {
                    return fail(
                        "weight",
                        format!("w = {} but theta_{j} = {}", rational::to_string(&node.w), rational::to_string(&th)),
                    )
                }
                Err(e) => return fail("weight", e.to_string()),
            }
            match kind {
                OpKind::Allowable | OpKind::Block => check_operation(node.op, j, &node.children, ctx)?,
                OpKind::OddDependent => {
                    if !spec.odd_enabled || !spec.has_rule(|r| matches!(r, Rule::Dependent)) {
                        return fail("dependent", "the space has no dependent operations");
                    }
                    if j % 2 == 0 {
                        return fail("dependent", "special functionals carry odd weight indices");
                    }
                    let Some(data) = &node.dependent else { return fail("dependent", "missing decomposition data") };
                    let Some(cf) = ctx.sigma else { return fail("dependent", "no coding table supplied") };
                    match validate_dependent(&node.children, (j - 1) / 2, data, cf, spec) {
                        Ok(c) if c.passed => {}
                        Ok(c) => {
                            let first = c.checks.iter().find(|c| !c.passed).expect("a failing clause");
                            return fail("dependent", format!("condition {} fails", first.clause.label()));
                        }
                        Err(e) => return fail("dependent", e.to_string()),
                    }
                }
                OpKind::OddSpecialW4 => {
                    if !spec.odd_enabled || !spec.has_rule(|r| matches!(r, Rule::SpecialW4)) {
                        return fail("special", "the space has no special operations");
                    }
                    if j % 2 == 0 {
                        return fail("special", "special functionals carry odd weight indices");
                    }
                    let Some(hc) = ctx.history else { return fail("special", "no history coder supplied") };
                    let r = validate_special_sequence_w4(&node.children, (j - 1) / 2, spec, hc);
                    if !r.passed() {
                        let first = r.checks.iter().find(|c| c.verdict != Verdict::Pass).expect("a failing check");
                        return fail("special", format!("condition {} fails", first.name));
                    }
                }
                OpKind::GOp => unreachable!(),
            }
        }
    }
    for (i, c) in node.children.iter().enumerate() {
        path.push(i);
        walk(c, ctx, path)?;
        path.pop();
    }
    Ok(())
}

fn check_operation(
    kind: OpKind,
    j: usize,
    children: &[TreeFunctional],
    ctx: &WContext,
) -> std::result::Result<(), NodeFail> {
    let ops = match ctx.spec.ops_at(j) {
        Ok(o) if !o.is_empty() => o,
        Ok(_) => return fail("operation", format!("no operation at level {j}")),
        Err(e) => return fail("operation", e.to_string()),
    };
    let supports: Vec<FiniteSet> = children.iter().map(TreeFunctional::support).filter(|s| !s.is_empty()).collect();
    let successive = supports.windows(2).all(|w| w[0].precedes(&w[1]));
    let disjoint = supports.iter().enumerate().all(|(i, a)| supports[i + 1..].iter().all(|b| a.is_disjoint(b)));
    if kind == OpKind::Block && !successive {
        return fail("operation", "children are not successive");
    }
    if !disjoint {
        return fail("operation", "children are not disjointly supported");
    }
    let mins = FiniteSet::from_unsorted(supports.iter().filter_map(FiniteSet::min).collect())
        .expect("disjoint supports have distinct minima");
    let ok = ops
        .iter()
        .any(|op| (op.mode == AdmissibilityMode::Allowable || successive) && family_member(&mins, &op.family));
    if ok {
        Ok(())
    } else {
        fail("operation", format!("children minima are not admissible at level {j}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clause {
    #[serde(rename = "header")]
    Header,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
    #[serde(rename = "4")]
    Four,
}

impl Clause {
    pub fn label(self) -> &'static str {
        match self {
            Clause::Header => "header",
            Clause::One => "1",
            Clause::Two => "2",
            Clause::Three => "3",
            Clause::Four => "4",
        }
    }
}

/// Zero-based position: member `i`, block `k` (global numbering), interval `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub i: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
}

impl Location {
    fn member(i: usize) -> Self {
        Location { i, k: None, r: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseCheck {
    pub clause: Clause,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ClauseCheck {
    fn pass(clause: Clause) -> Self {
        ClauseCheck { clause, passed: true, location: None, detail: None }
    }

    fn fail(clause: Clause, location: Option<Location>, detail: impl Into<String>) -> Self {
        ClauseCheck { clause, passed: false, location, detail: Some(detail.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependentCertificate {
    pub j: usize,
    /// Weight indices `2j_i` of the members.
    pub levels: Vec<Option<usize>>,
    pub intervals: Vec<Interval>,
    pub blocks: Vec<Vec<Vec<usize>>>,
    pub checks: Vec<ClauseCheck>,
    pub passed: bool,
}

impl DependentCertificate {
    pub fn first_failure(&self) -> Option<Clause> {
        self.checks.iter().find(|c| !c.passed).map(|c| c.clause)
    }
}

fn check_shape(fs: &[TreeFunctional], data: &DependentData) -> Result<()> {
    if fs.is_empty() {
        return domain("a dependent sequence needs at least one member");
    }
    if data.blocks.len() != fs.len() {
        return domain("one block list per member is required");
    }
    for (i, (f, blocks)) in fs.iter().zip(&data.blocks).enumerate() {
        let Some(node) = f.as_node() else { return domain(format!("member {i} is a leaf, not a weighted functional")) };
        if node.j.is_none() {
            return domain(format!("member {i} has no weight index"));
        }
        if node.children.len() != blocks.len() {
            return domain(format!(
                "member {i} has {} children but {} index blocks",
                node.children.len(),
                blocks.len()
            ));
        }
    }
    if !data.intervals.is_empty() {
        check_successive(&data.intervals)?;
    }
    let mut next = 0;
    for a in data.blocks.iter().flatten() {
        if a.is_empty() || a.iter().enumerate().any(|(p, &r)| r != next + p) {
            return domain("index blocks must be consecutive runs covering the intervals in order");
        }
        next += a.len();
    }
    if next != data.intervals.len() {
        return domain("index blocks must cover every interval");
    }
    Ok(())
}

/// Checks the header and the four conditions of a `(2j+1)`-dependent sequence
/// against a frozen coding table.
pub fn validate_dependent(
    fs: &[TreeFunctional],
    j: usize,
    data: &DependentData,
    cf: &CodingFunction,
    spec: &SpaceSpec,
) -> Result<DependentCertificate> {
    check_shape(fs, data)?;
    let params = &spec.params;
    let levels: Vec<Option<usize>> = fs.iter().map(TreeFunctional::level).collect();
    let supports: Vec<FiniteSet> = fs.iter().map(TreeFunctional::support).collect();
    let n_odd = params.n_index(2 * j + 1)?;
    let mut checks = Vec::new();

    // header: S_{n_{2j+1}}-admissible
    let nonempty: Vec<(usize, &FiniteSet)> = supports.iter().enumerate().filter(|(_, s)| !s.is_empty()).collect();
    let header = match nonempty.windows(2).find(|w| !w[0].1.precedes(w[1].1)) {
        Some(w) => ClauseCheck::fail(Clause::Header, Some(Location::member(w[1].0)), "members are not successive"),
        None => {
            let mins = FiniteSet::new(nonempty.iter().map(|(_, s)| FiniteSet::min(s).expect("non-empty")).collect())?;
            if family_member(&mins, &FamilySpec::s(n_odd)) {
                ClauseCheck::pass(Clause::Header)
            } else {
                ClauseCheck::fail(Clause::Header, None, format!("member minima are not in S_{n_odd}"))
            }
        }
    };
    checks.push(header);

    // (1)
    let first = levels[0].expect("shape checked");
    let one = if first % 2 != 0 {
        ClauseCheck::fail(Clause::One, Some(Location::member(0)), "weight index of f_1 is odd")
    } else if !params.in_l1(first as u64 / 2) {
        ClauseCheck::fail(Clause::One, Some(Location::member(0)), format!("j_1 = {} is not in L_1", first / 2))
    } else if fs[0].weight() != Some(&spec.theta(first)?) {
        ClauseCheck::fail(Clause::One, Some(Location::member(0)), "w(f_1) differs from 1/m_{2j_1}")
    } else if params.m(first)? <= BigUint::from(n_odd) {
        ClauseCheck::fail(Clause::One, Some(Location::member(0)), "m_{2j_1} does not exceed n_{2j+1}")
    } else {
        ClauseCheck::pass(Clause::One)
    };
    checks.push(one);

    // (2)
    let mut two = ClauseCheck::pass(Clause::Two);
    let mut used = 0;
    for i in 0..fs.len() - 1 {
        used += data.blocks[i].iter().map(Vec::len).sum::<usize>();
        let expected = cf.lookup(&data.intervals[..used]);
        let level = levels[i + 1].expect("shape checked");
        let loc = Some(Location::member(i + 1));
        if expected != Some(level as u64) {
            let want = expected.map_or("no coded value".to_string(), |t| t.to_string());
            two = ClauseCheck::fail(Clause::Two, loc, format!("weight index {level} but sigma gives {want}"));
            break;
        }
        if fs[i + 1].weight() != Some(&spec.theta(level)?) {
            two = ClauseCheck::fail(Clause::Two, loc, "weight differs from 1/m_{2j_i}");
            break;
        }
    }
    checks.push(two);

    // (3)
    let mut three = ClauseCheck::pass(Clause::Three);
    let mut k = 0;
    'outer3: for (i, f) in fs.iter().enumerate() {
        for (c, a) in f.children().iter().zip(&data.blocks[i]) {
            let cover: Vec<&Interval> = a.iter().map(|&r| &data.intervals[r]).collect();
            if let Some(bad) = c.support().iter().find(|&x| !cover.iter().any(|e| e.contains(x))) {
                three = ClauseCheck::fail(
                    Clause::Three,
                    Some(Location { i, k: Some(k), r: None }),
                    format!("index {bad} lies outside the intervals of A_k"),
                );
                break 'outer3;
            }
            k += 1;
        }
    }
    checks.push(three);

    // (4)
    let mut four = ClauseCheck::pass(Clause::Four);
    let mut k = 0;
    'outer4: for (i, blocks) in data.blocks.iter().enumerate() {
        for (p, a) in blocks.iter().enumerate() {
            let loc = Some(Location { i, k: Some(k), r: None });
            if p == 0 {
                if a.len() != 1 {
                    four = ClauseCheck::fail(Clause::Four, loc, "A_{min K_i} is not a singleton");
                    break 'outer4;
                }
            } else {
                let prev_top = data.intervals[*blocks[p - 1].last().expect("non-empty")].1;
                let rho = params.rho(prev_top)?.0;
                let index = u64::try_from(rho).unwrap_or(u64::MAX);
                let mins = FiniteSet::new(a.iter().map(|&r| data.intervals[r].0).collect())?;
                if !family_member(&mins, &FamilySpec::s(index)) {
                    four = ClauseCheck::fail(
                        Clause::Four,
                        Some(Location { i, k: Some(k), r: Some(a[0]) }),
                        format!("(E_r) over A_k is not S_{index}-admissible"),
                    );
                    break 'outer4;
                }
            }
            k += 1;
        }
    }
    checks.push(four);

    let passed = checks.iter().all(|c| c.passed);
    Ok(DependentCertificate {
        j,
        levels,
        intervals: data.intervals.clone(),
        blocks: data.blocks.clone(),
        checks,
        passed,
    })
}

/// Conditions of a `(2j+1)`-special sequence in `W_4`; condition (3) is read
/// from the history coder.
pub fn validate_special_sequence_w4(fs: &[TreeFunctional], j: usize, spec: &SpaceSpec, hc: &HistoryCoder) -> Report {
    match special_checks(fs, j, spec, hc) {
        Ok(checks) => Report::from_checks(checks),
        Err(e) => Report::from_checks(vec![Check::new("parameters", false, Some(e.to_string()))]),
    }
}

fn special_checks(fs: &[TreeFunctional], j: usize, spec: &SpaceSpec, hc: &HistoryCoder) -> Result<Vec<Check>> {
    let params = &spec.params;
    let mut checks = Vec::new();
    let supports: Vec<FiniteSet> = fs.iter().map(TreeFunctional::support).collect();
    let nonempty: Vec<&FiniteSet> = supports.iter().filter(|s| !s.is_empty()).collect();
    checks.push(Check::new("successive", nonempty.windows(2).all(|w| w[0].precedes(w[1])), None));
    let n_odd = params.n(2 * j + 1)?;
    checks.push(Check::new(
        "length",
        !fs.is_empty() && BigUint::from(fs.len()) <= n_odd,
        Some(format!("{} members, n_{} = {n_odd}", fs.len(), 2 * j + 1)),
    ));

    let mut one: Option<String> = None;
    let mut levels = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        match f.level() {
            Some(l) if l % 2 == 0 && f.weight() == Some(&spec.theta(l)?) => levels.push(l),
            _ => {
                one.get_or_insert(format!("member {i} is not weighted by 1/m_(2j_i)"));
                levels.push(0);
            }
        }
    }
    if one.is_none() {
        for (i, &l) in levels.iter().enumerate() {
            let half = l as u64 / 2;
            let in_part = if i == 0 { params.in_l1(half) } else { params.in_l2(half) };
            if !in_part {
                one = Some(format!("j_{} = {half} lies in the wrong part of the partition", i + 1));
                break;
            }
        }
    }
    if one.is_none() && params.m(levels[0])? <= n_odd {
        one = Some("m_(2j_1) does not exceed n_(2j+1)".into());
    }
    if one.is_none() {
        for (i, w) in levels.windows(2).enumerate() {
            if params.m(w[1])? <= params.m(w[0])? {
                one = Some(format!("weights are not increasing at member {}", i + 1));
                break;
            }
        }
    }
    checks.push(Check::new("(1)", one.is_none(), one));

    let mut two = None;
    if levels.iter().all(|&l| l > 0) {
        for i in 0..fs.len().saturating_sub(1) {
            let top = FiniteSet::max(&supports[i]).unwrap_or(0);
            if params.m(levels[i + 1])? <= BigUint::from(top) * params.m(levels[i])? {
                two = Some(format!("m_(2j_{}) <= maxsupp f_{} * m_(2j_{})", i + 2, i + 1, i + 1));
                break;
            }
        }
    }
    checks.push(Check::new("(2)", two.is_none(), two));

    let mut three = None;
    let vectors: Vec<FinVector> = fs.iter().map(TreeFunctional::to_vector).collect();
    for i in 1..fs.len() {
        if hc.lookup(&vectors[..i]) != Some(levels[i]) {
            three = Some(format!("the history of member {} does not determine its weight", i + 1));
            break;
        }
    }
    checks.push(Check::new("(3)", three.is_none(), three));
    Ok(checks)
}

/// The node set of the admissibility lemma at level `j`, with the depth bound
/// and allowability of its antichains checked.
pub fn admi_check(f: &TreeFunctional, j: usize, spec: &SpaceSpec) -> Report {
    match admi_inner(f, j, spec) {
        Ok(r) => r,
        Err(e) => Report::hypothesis_not_met(e.to_string()),
    }
}

const MAX_ANTICHAINS: usize = 200_000;

fn admi_inner(f: &TreeFunctional, j: usize, spec: &SpaceSpec) -> Result<Report> {
    if j < 2 {
        return Ok(Report::hypothesis_not_met("the lemma needs j >= 2"));
    }
    let params = &spec.params;
    let (m1, mj, mprev) = (params.m(1)?, params.m(j)?, params.m(j - 1)?);
    let tag_floor = rational::recip(&(&mj * &mj));
    let weight_floor = rational::recip(&mprev);
    let level = (params.n(j)? + BigUint::from(4u32)) / BigUint::from(5u32);
    let level = u64::try_from(level).unwrap_or(u64::MAX);

    let mut members: Vec<Vec<usize>> = Vec::new();
    for path in f.paths().into_iter().filter(|p| !p.is_empty()) {
        let (tag, _) = tag_ord(f, &path)?;
        let ancestors_ok = (0..path.len())
            .all(|d| f.node_at(&path[..d]).ok().and_then(TreeFunctional::weight).is_some_and(|w| w >= &weight_floor));
        if tag > tag_floor && ancestors_ok {
            members.push(path);
        }
    }

    let mut ord_fail = None;
    for p in &members {
        let ord = p.len();
        let log_ok = Pow::pow(&m1, ord as u32) <= &mj * &mj;
        let m_ok = BigUint::from(ord) <= mj;
        if !(log_ok && m_ok) {
            ord_fail = Some(format!("node {p:?} has ord {ord}"));
            break;
        }
    }

    let antichains = maximal_antichains(&members);
    let allow = match antichains {
        None => {
            Check { name: "allowable".into(), verdict: Verdict::Unknown, detail: Some("too many antichains".into()) }
        }
        Some(chains) => {
            let mut bad = None;
            for chain in &chains {
                let supports: Vec<FiniteSet> = chain
                    .iter()
                    .map(|p| f.node_at(p).map(TreeFunctional::support))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .filter(|s| !s.is_empty())
                    .collect();
                let disjoint =
                    supports.iter().enumerate().all(|(i, a)| supports[i + 1..].iter().all(|b| a.is_disjoint(b)));
                let mins = FiniteSet::from_unsorted(supports.iter().filter_map(FiniteSet::min).collect())?;
                if !disjoint || mins.len() != supports.len() || !family_member(&mins, &FamilySpec::s(level)) {
                    bad = Some(format!("antichain {chain:?} is not S_{level}-allowable"));
                    break;
                }
            }
            Check::new("allowable", bad.is_none(), bad.or(Some(format!("{} maximal antichains", chains.len()))))
        }
    };
    let mut report = Report::from_checks(vec![Check::new("ord", ord_fail.is_none(), ord_fail), allow]);
    report.note = Some(format!("{} qualifying nodes", members.len()));
    Ok(report)
}

/// Maximal antichains of a down-closed node set given by paths.
fn maximal_antichains(members: &[Vec<usize>]) -> Option<Vec<Vec<Vec<usize>>>> {
    fn children_of<'a>(members: &'a [Vec<usize>], p: &[usize]) -> Vec<&'a Vec<usize>> {
        members.iter().filter(|m| m.len() == p.len() + 1 && m.starts_with(p)).collect()
    }
    fn expand(members: &[Vec<usize>], p: &[usize], budget: &mut usize) -> Option<Vec<Vec<Vec<usize>>>> {
        let kids = children_of(members, p);
        let mut out = vec![vec![p.to_vec()]];
        if !kids.is_empty() {
            let mut prod: Vec<Vec<Vec<usize>>> = vec![vec![]];
            for k in kids {
                let sub = expand(members, k, budget)?;
                let mut next = Vec::new();
                for a in &prod {
                    for b in &sub {
                        *budget = budget.checked_sub(1)?;
                        next.push(a.iter().chain(b).cloned().collect());
                    }
                }
                prod = next;
            }
            out.extend(prod);
        }
        Some(out)
    }
    let mut budget = MAX_ANTICHAINS;
    let mut prod: Vec<Vec<Vec<usize>>> = vec![vec![]];
    for root in children_of(members, &[]) {
        let sub = expand(members, root, &mut budget)?;
        let mut next = Vec::new();
        for a in &prod {
            for b in &sub {
                budget = budget.checked_sub(1)?;
                next.push(a.iter().chain(b).cloned().collect());
            }
        }
        prod = next;
    }
    Some(prod.into_iter().filter(|c: &Vec<Vec<usize>>| !c.is_empty()).collect())
}
