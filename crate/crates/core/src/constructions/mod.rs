//! Rapidly increasing sequences, the lemma checkers and the paired
//! constructions used for quasi-minimality and tightness.

mod build;

pub use build::{
    build_dependent_pair, build_tight_witness, revalidate, BuildOptions, ConstructionTrace, InnerPiece, MiddleLevel,
    OuterLevel, SideTrace, SigmaAssignment, TraceCheck, TraceKind,
};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::families::{family_member, FamilySpec, FiniteSet};
use crate::functionals::{evaluate, TreeFunctional};
use crate::norm::{fragment_norm, level_class_sup, Bound, NormOptions};
use crate::parameters::SpaceSpec;
use crate::rational::{self, q, recip, Q};
use crate::report::{Report, Verdict};
use crate::vectors::{is_block_sequence, make_scc, FinVector, SccCheck};

/// Outcome of one certified condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Status {
    Certified,
    Refuted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        witness: Option<TreeFunctional>,
        detail: String,
    },
    Unknown {
        reason: String,
    },
}

impl Status {
    fn refuted(detail: impl Into<String>) -> Self {
        Status::Refuted { witness: None, detail: detail.into() }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Status::Certified)
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Status::Refuted { .. })
    }

    fn fold<'a>(all: impl IntoIterator<Item = &'a Status>) -> Status {
        let mut out = Status::Certified;
        for s in all {
            match s {
                Status::Refuted { .. } => return s.clone(),
                Status::Unknown { .. } if out.is_certified() => out = s.clone(),
                _ => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RisCertificate {
    pub blocks: Vec<FinVector>,
    pub jseq: Vec<usize>,
    #[serde(rename = "C", with = "rational::serde_q")]
    pub c: Q,
    /// `‖x_k‖ <= C`.
    pub bounded: Vec<Status>,
    /// `maxsupp x_k <= m_{j_{k+1}} / m_{j_k}`, one entry per consecutive pair.
    pub growth: Vec<Status>,
    /// `|f(x_k)| <= C w(f)` for `w(f) > 1/m_{j_k}`.
    pub weights: Vec<Status>,
    pub status: Status,
}

/// Certifies that `blocks` is a `C`-rapidly increasing sequence for `jseq`.
///
/// The weight condition is decided per weight class over the operation
/// fragment; classes carried by dependent or special functionals stay unknown
/// unless the block is a single coordinate, where `|f(c e_i)| <= |c| w(f)`.
pub fn ris_certify(
    blocks: &[FinVector],
    jseq: &[usize],
    c: &Q,
    spec: &SpaceSpec,
    budget: u64,
) -> Result<RisCertificate> {
    if blocks.is_empty() || !is_block_sequence(blocks) {
        return domain("blocks must form a non-empty block sequence");
    }
    if jseq.len() < blocks.len() {
        return domain("one weight index per block is required");
    }
    if jseq.windows(2).any(|w| w[0] >= w[1]) || jseq.first() == Some(&0) {
        return domain("jseq must be strictly increasing and positive");
    }
    if c.is_negative() {
        return domain("C must be non-negative");
    }
    let opts = NormOptions::with_budget(budget);
    let mut growth = Vec::new();
    for k in 0..blocks.len() {
        let Some(&next) = jseq.get(k + 1) else { break };
        let top = blocks[k].max_supp().expect("non-zero block");
        let ratio = rational::from_big(&spec.params.m(next)?) / rational::from_big(&spec.params.m(jseq[k])?);
        growth.push(if Q::from_integer(top.into()) <= ratio {
            Status::Certified
        } else {
            Status::refuted(format!("maxsupp x_{} = {top} exceeds {}", k + 1, rational::to_string(&ratio)))
        });
    }
    let mut bounded = Vec::new();
    let mut weights = Vec::new();
    for (x, &j) in blocks.iter().zip(jseq) {
        bounded.push(norm_at_most(x, c, spec, &opts)?);
        weights.push(weight_condition(x, j, c, spec, &opts)?);
    }
    let status = Status::fold(growth.iter().chain(&bounded).chain(&weights));
    Ok(RisCertificate { blocks: blocks.to_vec(), jseq: jseq.to_vec(), c: c.clone(), bounded, growth, weights, status })
}

fn single_coordinate(x: &FinVector) -> Option<Q> {
    (x.len() == 1).then(|| x.linf())
}

/// `‖x‖ <= c`, exact on single coordinates and on the operation fragment.
pub(crate) fn norm_at_most(x: &FinVector, c: &Q, spec: &SpaceSpec, opts: &NormOptions) -> Result<Status> {
    if let Some(a) = single_coordinate(x) {
        return Ok(if &a <= c { Status::Certified } else { Status::refuted("|x| exceeds C at its only coordinate") });
    }
    let r = match fragment_norm(x, spec, opts) {
        Ok(r) => r,
        Err(e @ crate::Error::LimitExceeded(_)) => return Ok(Status::Unknown { reason: e.to_string() }),
        Err(e) => return Err(e),
    };
    if r.bound == Bound::LowerBound && &r.fragment <= c {
        return Ok(Status::Unknown { reason: "norm budget exhausted".into() });
    }
    if &r.fragment > c {
        return Ok(Status::Refuted {
            witness: r.witness,
            detail: format!("a fragment functional gives {}", rational::to_string(&r.fragment)),
        });
    }
    if spec.has_dependent() {
        return Ok(Status::Unknown { reason: "dependent and special functionals are not enumerated".into() });
    }
    Ok(Status::Certified)
}

fn weight_condition(x: &FinVector, j: usize, c: &Q, spec: &SpaceSpec, opts: &NormOptions) -> Result<Status> {
    let floor = recip(&spec.params.m(j)?);
    if let Some(a) = single_coordinate(x) {
        if &a <= c {
            return Ok(Status::Certified);
        }
    }
    let top = spec.max_level();
    let mut unknown = None;
    let mut level = 1;
    loop {
        if top.is_some_and(|t| level > t) {
            break;
        }
        let theta = spec.theta(level)?;
        if theta <= floor {
            break;
        }
        if level % 2 == 1 && spec.has_dependent() {
            unknown.get_or_insert_with(|| format!("odd level {level} carries dependent or special functionals"));
        }
        match level_class_sup(x, spec, level, opts) {
            Ok(Some((v, witness))) => {
                if v > c * &theta {
                    return Ok(Status::Refuted {
                        witness: Some(witness),
                        detail: format!("a level {level} functional gives {} > C/m_{level}", rational::to_string(&v)),
                    });
                }
            }
            Ok(None) => {
                if !spec.ops_at(level)?.is_empty() {
                    unknown.get_or_insert_with(|| format!("budget exhausted at level {level}"));
                }
            }
            Err(crate::Error::LimitExceeded(m)) => {
                unknown.get_or_insert(m);
            }
            Err(e) => return Err(e),
        }
        level += 1;
    }
    Ok(match unknown {
        Some(reason) => Status::Unknown { reason },
        None => Status::Certified,
    })
}

/// A convex combination `Σ a_i x_i` given by its blocks and coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccData {
    pub blocks: Vec<FinVector>,
    #[serde(with = "rational::serde_q_vec")]
    pub coeffs: Vec<Q>,
}

impl SccData {
    pub fn vector(&self) -> FinVector {
        self.blocks.iter().zip(&self.coeffs).fold(FinVector::zero(), |acc, (b, a)| acc.add(&b.scale(a)))
    }

    fn certify(&self, n: u64, eps: &Q) -> Result<SccCheck> {
        Ok(make_scc(&self.blocks, n, eps, Some(&self.coeffs))?.2)
    }
}

fn allowable_mins(family: &[TreeFunctional]) -> Result<Option<FiniteSet>> {
    let supports: Vec<FiniteSet> = family.iter().map(TreeFunctional::support).filter(|s| !s.is_empty()).collect();
    for (a, s) in supports.iter().enumerate() {
        if supports[a + 1..].iter().any(|t| !s.is_disjoint(t)) {
            return Ok(None);
        }
    }
    Ok(Some(FiniteSet::from_unsorted(supports.iter().map(|s| FiniteSet::min(s).expect("non-empty")).collect())?))
}

/// `Σ_p f_p(x) <= 3C` for an `(n_j, m_j^{-2})`-scc `x` of blocks of norm at
/// most `C` and an `S_{n_j - 1}`-allowable family.
pub fn lemma14_check(
    x: &SccData,
    j: usize,
    c: &Q,
    family: &[TreeFunctional],
    spec: &SpaceSpec,
    budget: u64,
) -> Result<Report> {
    let n = spec.params.n_index(j)?;
    if n == 0 {
        return domain("n_j must be positive");
    }
    let m = rational::from_big(&spec.params.m(j)?);
    let eps = (&m * &m).recip();
    let scc = x.certify(n, &eps)?;
    if !scc.passed {
        return domain(format!("x is not an (n_{j}, m_{j}^-2)-scc: {}", scc.violations.join("; ")));
    }
    let opts = NormOptions::with_budget(budget);
    for (i, b) in x.blocks.iter().enumerate() {
        if !norm_at_most(b, c, spec, &opts)?.is_certified() {
            return domain(format!("‖x_{}‖ <= C is not certified", i + 1));
        }
    }
    match allowable_mins(family)? {
        Some(mins) if family_member(&mins, &FamilySpec::s(n - 1)) => {}
        _ => return domain(format!("the family is not S_{}-allowable", n - 1)),
    }
    let v = x.vector();
    let lhs = family.iter().map(|f| evaluate(f, &v)).fold(Q::zero(), |a, b| a + b);
    Ok(Report::inequality(lhs, c * q(3, 1)))
}

/// An scc of a rapidly increasing sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RisScc {
    #[serde(flatten)]
    pub scc: SccData,
    pub jseq: Vec<usize>,
    #[serde(rename = "C", with = "rational::serde_q")]
    pub c: Q,
}

/// Checks the hypotheses shared by the weighted lemmas. `Err` carries the
/// report to return.
fn ris_scc_hypotheses(
    x: &RisScc,
    j: usize,
    level: usize,
    spec: &SpaceSpec,
    budget: u64,
) -> Result<std::result::Result<(), Report>> {
    let fail = |why: String| Ok(Err(Report::hypothesis_not_met(why)));
    let Some(&j1) = x.jseq.first() else { return fail("jseq is empty".into()) };
    if j + 2 >= j1 {
        return fail(format!("j + 2 = {} is not below j_1 = {j1}", j + 2));
    }
    let m = rational::from_big(&spec.params.m(level)?);
    let scc = x.scc.certify(spec.params.n_index(level)?, &(&m * &m).recip())?;
    if !scc.passed {
        return fail(format!("x is not an (n_{level}, m_{level}^-2)-scc"));
    }
    let ris = ris_certify(&x.scc.blocks, &x.jseq, &x.c, spec, budget)?;
    match ris.status {
        Status::Certified => Ok(Ok(())),
        Status::Refuted { detail, .. } => fail(format!("the blocks are not a C-RIS: {detail}")),
        Status::Unknown { reason } => {
            Ok(Err(Report { verdict: Verdict::Unknown, lhs: None, bound: None, checks: vec![], note: Some(reason) }))
        }
    }
}

fn find_level(w: &Q, spec: &SpaceSpec) -> Result<Option<usize>> {
    let top = spec.max_level().unwrap_or(usize::MAX);
    let mut s = 1;
    while s <= top {
        let theta = spec.theta(s)?;
        if &theta == w {
            return Ok(Some(s));
        }
        if &theta < w {
            return Ok(None);
        }
        s += 1;
    }
    Ok(None)
}

/// `|f(x)|` against `14C/(m_s m_j)`, `8C/m_j` or `8C/m_j^2` by the weight `1/m_s` of `f`.
pub fn lemma_f3_check(x: &RisScc, j: usize, f: &TreeFunctional, spec: &SpaceSpec, budget: u64) -> Result<Report> {
    let Some(w) = f.weight() else { return Ok(Report::hypothesis_not_met("f is a leaf and has no weight")) };
    let Some(s) = find_level(w, spec)? else {
        return Ok(Report::hypothesis_not_met("w(f) is not of the form 1/m_s"));
    };
    let lhs = evaluate(f, &x.scc.vector()).abs();
    if let Err(r) = ris_scc_hypotheses(x, j, j, spec, budget)? {
        return Ok(Report { lhs: Some(lhs), ..r });
    }
    let mj = rational::from_big(&spec.params.m(j)?);
    let ms = rational::from_big(&spec.params.m(s)?);
    let c = &x.c;
    let bound = match s.cmp(&j) {
        std::cmp::Ordering::Less => c * q(14, 1) / (&ms * &mj),
        std::cmp::Ordering::Equal => c * q(8, 1) / &mj,
        std::cmp::Ordering::Greater => c * q(8, 1) / (&mj * &mj),
    };
    Ok(Report::inequality(lhs, bound).with_note(format!("s = {s}")))
}

/// `Σ_α f_α(m_j x) <= 14C` for an `S_{n_{2s}}`-allowable family with `2s < j`.
pub fn lemma_f3a_check(
    x: &RisScc,
    j: usize,
    s: usize,
    family: &[TreeFunctional],
    spec: &SpaceSpec,
    budget: u64,
) -> Result<Report> {
    let mj = rational::from_big(&spec.params.m(j)?);
    let scaled = x.scc.vector().scale(&mj);
    let lhs = family.iter().map(|f| evaluate(f, &scaled)).fold(Q::zero(), |a, b| a + b);
    if 2 * s >= j || s == 0 {
        return Ok(Report {
            lhs: Some(lhs),
            ..Report::hypothesis_not_met(format!("2s = {} is not below j = {j}", 2 * s))
        });
    }
    let n = spec.params.n_index(2 * s)?;
    match allowable_mins(family)? {
        Some(mins) if family_member(&mins, &FamilySpec::s(n)) => {}
        _ => {
            return Ok(Report {
                lhs: Some(lhs),
                ..Report::hypothesis_not_met(format!("the family is not S_{n}-allowable"))
            })
        }
    }
    if let Err(r) = ris_scc_hypotheses(x, j, j, spec, budget)? {
        return Ok(Report { lhs: Some(lhs), ..r });
    }
    Ok(Report::inequality(lhs, &x.c * q(14, 1)))
}

/// `f(u) <= 1/m_{2j}` for `u = m_{2j+1} x` with `x` an
/// `(n_{2j+1}, m_{2j+1}^{-2})`-scc of a 28-RIS and `f` with all weights above
/// `1/m_{2j+1}`.
pub fn lemma_f4_check(x: &RisScc, j: usize, f: &TreeFunctional, spec: &SpaceSpec, budget: u64) -> Result<Report> {
    let scale = rational::from_big(&spec.params.m(2 * j + 1)?);
    let u = x.scc.vector().scale(&scale);
    let lhs = evaluate(f, &u);
    let bound = recip(&spec.params.m(2 * j)?);
    if u.is_zero() {
        return Ok(Report::inequality(lhs, bound));
    }
    let with_lhs = |r: Report| Report { lhs: Some(lhs.clone()), bound: Some(bound.clone()), ..r };
    let floor = recip(&spec.params.m(2 * j + 1)?);
    for p in f.paths() {
        if let Some(w) = f.node_at(&p)?.weight() {
            if w <= &floor {
                return Ok(with_lhs(Report::hypothesis_not_met(format!(
                    "a node of weight {} is not above 1/m_{}",
                    rational::to_string(w),
                    2 * j + 1
                ))));
            }
        }
    }
    if j <= 5 {
        return Ok(with_lhs(Report::hypothesis_not_met(format!("j = {j} is not above 5"))));
    }
    if x.c > q(28, 1) {
        return Ok(with_lhs(Report::hypothesis_not_met("C exceeds 28")));
    }
    if let Err(r) = ris_scc_hypotheses(x, j, 2 * j + 1, spec, budget)? {
        return Ok(with_lhs(r));
    }
    Ok(Report::inequality(lhs, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::OpKind;
    use crate::parameters::ParameterSystem;
    use crate::rational::qi;

    fn units(idx: &[u64]) -> Vec<FinVector> {
        idx.iter().map(|&i| FinVector::unit(i)).collect()
    }

    #[test]
    fn unit_vectors_are_a_one_ris() {
        let spec = SpaceSpec::xcr(ParameterSystem::toy());
        let cert = ris_certify(&units(&[3, 7, 20]), &[2, 5, 10], &qi(1), &spec, 1_000_000).unwrap();
        assert_eq!(cert.status, Status::Certified);
    }

    #[test]
    fn growth_is_arithmetic() {
        let spec = SpaceSpec::xcr(ParameterSystem::toy());
        let refuted = ris_certify(&[FinVector::indicator([1, 3])], &[2, 3], &qi(1), &spec, 1000).unwrap();
        assert!(refuted.growth[0].is_refuted());
        assert!(refuted.status.is_refuted());
        let ok = ris_certify(&[FinVector::indicator([1, 2])], &[1, 3], &qi(2), &spec, 1000).unwrap();
        assert!(ok.growth[0].is_certified());
    }

    #[test]
    fn weight_refutation_carries_a_witness() {
        let spec = SpaceSpec::mixed(
            vec![2, 4, 8, 16],
            vec![1, 2, 3, 4],
            crate::families::FamilyKind::S,
            crate::families::AdmissibilityMode::Admissible,
        );
        let x = FinVector::indicator([4, 5, 6, 7]);
        let cert = ris_certify(std::slice::from_ref(&x), &[4], &qi(3), &spec, 1_000_000).unwrap();
        match &cert.weights[0] {
            Status::Refuted { witness: Some(w), .. } => assert_eq!(evaluate(w, &x), qi(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lemma14_on_unit_vectors() {
        let spec = SpaceSpec::mixed(
            vec![2, 4],
            vec![2, 3],
            crate::families::FamilyKind::S,
            crate::families::AdmissibilityMode::Admissible,
        );
        let avg = crate::vectors::repeated_average(&crate::vectors::IncreasingSeq::from(5), 2).unwrap();
        let blocks = avg.iter().map(|(i, _)| FinVector::unit(i)).collect();
        let coeffs = avg.coefficients();
        let a5 = avg.get(5);
        let a6 = avg.get(6);
        let x = SccData { blocks, coeffs };
        let fam: Vec<TreeFunctional> = [5, 6].iter().map(|&i| TreeFunctional::leaf(i)).collect();
        let r = lemma14_check(&x, 1, &qi(1), &fam, &spec, 100_000).unwrap();
        assert_eq!(r.lhs, Some(a5 + a6));
        assert!(r.passed());
        let empty = lemma14_check(&x, 1, &qi(1), &[], &spec, 100_000).unwrap();
        assert_eq!(empty.lhs, Some(Q::zero()));
        let overlapping = [TreeFunctional::leaf(5), TreeFunctional::leaf(5)];
        assert!(lemma14_check(&x, 1, &qi(1), &overlapping, &spec, 100_000).is_err());
    }

    fn f3_instance() -> (RisScc, SpaceSpec) {
        let spec = SpaceSpec::xcr(ParameterSystem::toy());
        let x = RisScc {
            scc: SccData { blocks: units(&[5, 6, 7, 8, 9]), coeffs: vec![q(1, 5); 5] },
            jseq: vec![4, 8, 12, 16, 20],
            c: qi(1),
        };
        (x, spec)
    }

    #[test]
    fn f3_cases() {
        let (x, spec) = f3_instance();
        let f =
            TreeFunctional::op(q(1, 2), 1, OpKind::Allowable, vec![TreeFunctional::leaf(5), TreeFunctional::leaf(6)]);
        let r = lemma_f3_check(&x, 1, &f, &spec, 100_000).unwrap();
        assert_eq!((r.lhs.clone(), r.bound.clone()), (Some(q(1, 5)), Some(qi(4))));
        assert!(r.passed());
        let leaf = lemma_f3_check(&x, 1, &TreeFunctional::leaf(5), &spec, 100_000).unwrap();
        assert_eq!(leaf.verdict, Verdict::HypothesisNotMet);
        let close = lemma_f3_check(&x, 2, &f, &spec, 100_000).unwrap();
        assert_eq!(close.verdict, Verdict::HypothesisNotMet);
    }

    #[test]
    fn f4_hypotheses() {
        let (x, spec) = f3_instance();
        let heavy = TreeFunctional::op(q(1, 2), 1, OpKind::Allowable, vec![TreeFunctional::leaf(5)]);
        let light = TreeFunctional::op(q(1, 1 << 20), 20, OpKind::Allowable, vec![TreeFunctional::leaf(5)]);
        let r = lemma_f4_check(&x, 6, &light, &spec, 100_000).unwrap();
        assert_eq!(r.verdict, Verdict::HypothesisNotMet);
        let zero = RisScc { scc: SccData { blocks: vec![], coeffs: vec![] }, ..x };
        let r = lemma_f4_check(&zero, 6, &heavy, &spec, 100_000).unwrap();
        assert!(r.passed());
        assert_eq!(r.lhs, Some(Q::zero()));
    }
}
