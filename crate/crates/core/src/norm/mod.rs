//! Exact norms of finitely supported vectors.

mod engine;
mod fragment;
mod oracle;

pub use engine::MAX_PARTITION_SUPPORT;
pub use fragment::W4Fragment;
pub use oracle::{brute_force_norm_oracle, ORACLE_MAX_DEPTH, ORACLE_MAX_SUPPORT};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::families::{family_member, is_admissible, AdmissibilityMode, FamilySpec, FiniteSet};
use crate::functionals::{evaluate, OpKind, TreeFunctional};
use crate::parameters::SpaceSpec;
use crate::rational::{self, Q};
use crate::report::Report;
use crate::vectors::FinVector;
use engine::{collect_ops, floor_of, Engine, OpInfo};

pub const DEFAULT_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    DpInterval,
    DpSchreier,
    BrutePartition,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    Exact,
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormResult {
    #[serde(with = "rational::serde_q")]
    pub value: Q,
    /// Exact norm over the operation fragment (no dependent or special rules).
    #[serde(with = "rational::serde_q")]
    pub fragment: Q,
    pub bound: Bound,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<TreeFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct NormOptions {
    /// Explicit functionals folded into the maximum.
    pub candidates: Vec<TreeFunctional>,
    /// Maximum number of recursion steps.
    pub budget: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { candidates: Vec::new(), budget: DEFAULT_BUDGET }
    }
}

impl NormOptions {
    pub fn with_budget(budget: u64) -> Self {
        NormOptions { candidates: Vec::new(), budget }
    }
}

/// `‖x‖` for the norming set of `spec`.
pub fn norm(x: &FinVector, spec: &SpaceSpec, opts: &NormOptions) -> Result<NormResult> {
    compute(x, spec, opts, None)
}

/// The supremum over leaves and over functionals whose root weight exceeds
/// `min_weight`; nodes below the root are unrestricted.
pub fn norm_weight_restricted(
    x: &FinVector,
    spec: &SpaceSpec,
    min_weight: &Q,
    opts: &NormOptions,
) -> Result<NormResult> {
    if min_weight <= &Q::zero() || min_weight >= &Q::one() {
        return domain("minWeight must lie in (0, 1)");
    }
    compute(x, spec, opts, Some(min_weight))
}

/// Shorthand for the value of [`norm`] with default options.
pub fn norm_value(x: &FinVector, spec: &SpaceSpec) -> Result<Q> {
    Ok(norm(x, spec, &NormOptions::default())?.value)
}

fn compute(x: &FinVector, spec: &SpaceSpec, opts: &NormOptions, min_weight: Option<&Q>) -> Result<NormResult> {
    let dependent = spec.has_dependent();
    if dependent && opts.candidates.is_empty() {
        return Err(Error::UnsupportedRule(
            "dependent or special operations need explicit candidate functionals".into(),
        ));
    }
    let ops = collect_ops(spec, &x.l1(), &floor_of(x), None)?;
    let mut engine = Engine::new(x, &ops, opts.budget);
    let partitions = engine.uses_partitions();
    if partitions && x.len() > MAX_PARTITION_SUPPORT {
        return Err(Error::LimitExceeded(format!(
            "partition search is capped at {MAX_PARTITION_SUPPORT} support points, got {}",
            x.len()
        )));
    }
    let method = if partitions {
        Method::BrutePartition
    } else if ops.iter().any(|o| o.family.kind != crate::families::FamilyKind::A) {
        Method::DpSchreier
    } else {
        Method::DpInterval
    };
    if x.is_zero() {
        return Ok(NormResult {
            value: Q::zero(),
            fragment: Q::zero(),
            bound: Bound::Exact,
            method,
            witness: None,
            note: None,
        });
    }
    let filter = min_weight.map(|w| move |o: &OpInfo| o.theta > *w);
    let solved = match &filter {
        Some(f) => engine.solve(Some(f)),
        None => engine.solve(None),
    };
    let (fragment, mut witness, mut bound, mut note) = match solved {
        Ok((v, w)) => (v, w, Bound::Exact, None),
        Err(_) => {
            let (i, v) = x.iter().max_by(|a, b| a.1.abs().cmp(&b.1.abs())).expect("non-zero vector");
            let leaf = TreeFunctional::signed_leaf(i, crate::functionals::Sign::of(v));
            (v.abs(), leaf, Bound::LowerBound, Some(format!("budget of {} steps exhausted", opts.budget)))
        }
    };
    let mut value = fragment.clone();
    for c in &opts.candidates {
        if let Some(w) = min_weight {
            if c.weight().is_some_and(|cw| cw <= w) {
                continue;
            }
        }
        let v = evaluate(c, x).abs();
        if v > value {
            value = v;
            witness = c.clone();
        }
    }
    if dependent {
        bound = Bound::LowerBound;
        note.get_or_insert_with(|| "dependent rules contribute only through the supplied candidates".into());
    }
    Ok(NormResult { value, fragment, bound, method, witness: Some(witness), note })
}

/// `spec` with dependent and special operations switched off.
pub fn fragment_spec(spec: &SpaceSpec) -> SpaceSpec {
    let mut s = spec.clone();
    s.odd_enabled = false;
    s
}

/// Exact norm over the operation fragment of `spec`.
pub fn fragment_norm(x: &FinVector, spec: &SpaceSpec, opts: &NormOptions) -> Result<NormResult> {
    norm(x, &fragment_spec(spec), opts)
}

/// `sup |f(x)|` over fragment functionals whose root is an operation at
/// `level` (a single child included). `None` when the level has no operations
/// or the budget runs out.
pub fn level_class_sup(
    x: &FinVector,
    spec: &SpaceSpec,
    level: usize,
    opts: &NormOptions,
) -> Result<Option<(Q, TreeFunctional)>> {
    let frag = fragment_spec(spec);
    let level_ops = frag.ops_at(level)?;
    let Some(first) = level_ops.first() else { return Ok(None) };
    if x.is_zero() {
        return Ok(Some((Q::zero(), TreeFunctional::op(frag.theta(level)?, level, OpKind::Block, vec![]))));
    }
    let ops = collect_ops(&frag, &x.l1(), &floor_of(x), Some(level))?;
    let mut engine = Engine::new(x, &ops, opts.budget);
    let Ok((whole, w)) = engine.solve(None) else { return Ok(None) };
    let theta = frag.theta(level)?;
    let kind = match first.mode {
        AdmissibilityMode::Admissible => OpKind::Block,
        AdmissibilityMode::Allowable => OpKind::Allowable,
    };
    let mut best = (&theta * whole, TreeFunctional::op(theta.clone(), level, kind, vec![w]));
    match engine.best_at_level(level) {
        Ok(Some((v, t))) if v > best.0 => best = (v, t),
        Ok(_) => {}
        Err(_) => return Ok(None),
    }
    Ok(Some(best))
}

/// Both sides of `θ_j Σ_i ‖E_i x‖ <= ‖x‖` for an admissible segmentation.
pub fn check_standard_inequality(x: &FinVector, spec: &SpaceSpec, j: usize, segments: &[FiniteSet]) -> Result<Report> {
    let family = match spec.ops_at(j)?.first() {
        Some(op) => op.family,
        None => FamilySpec::s(spec.params.n_index(j)?),
    };
    if !is_admissible(segments, &family, AdmissibilityMode::Admissible)? {
        return domain(format!("segments are not {family}-admissible"));
    }
    let opts = NormOptions::default();
    let mut sum = Q::zero();
    for e in segments {
        sum += norm(&x.project(e), spec, &opts)?.value;
    }
    let lhs = spec.theta(j)? * sum;
    let rhs = norm(x, spec, &opts)?.value;
    Ok(Report::inequality(lhs, rhs))
}

/// Smallest `C` with `C^{-1} Σ|a_i| <= ‖Σ a_i x_i‖` over a coefficient grid.
///
/// The grid is `{-2, ..., 2}^n` for up to four vectors and `{0, 1, 2}^n`
/// for up to eight; the result is a lower estimate of the true constant.
pub fn l1_allowable_constant(xs: &[FinVector], spec: &SpaceSpec) -> Result<Q> {
    if xs.is_empty() {
        return domain("at least one vector is required");
    }
    if xs.len() > 8 {
        return Err(Error::LimitExceeded("the coefficient grid is capped at 8 vectors".into()));
    }
    let supports: Vec<FiniteSet> = xs.iter().map(FinVector::support).collect();
    for (i, a) in supports.iter().enumerate() {
        if a.is_empty() {
            return domain("vectors must be non-zero");
        }
        if supports[i + 1..].iter().any(|b| !a.is_disjoint(b)) {
            return domain("vectors must be disjointly supported");
        }
    }
    let mins = FiniteSet::from_unsorted(supports.iter().filter_map(FiniteSet::min).collect())?;
    if !family_member(&mins, &FamilySpec::s(1)) {
        return domain("minimal supports must form an S_1 set");
    }
    let opts = NormOptions::default();
    for (i, x) in xs.iter().enumerate() {
        if norm(x, spec, &opts)?.value != Q::one() {
            return domain(format!("vector {i} is not normalized"));
        }
    }
    let grid: Vec<i64> = if xs.len() <= 4 { vec![-2, -1, 0, 1, 2] } else { vec![0, 1, 2] };
    let mut best = Q::one();
    let mut coeffs = vec![0usize; xs.len()];
    loop {
        let a: Vec<i64> = coeffs.iter().map(|&c| grid[c]).collect();
        if a.iter().any(|&v| v != 0) {
            let mut y = FinVector::zero();
            for (x, &ai) in xs.iter().zip(&a) {
                y = y.add(&x.scale(&Q::from_integer(ai.into())));
            }
            let l1: i64 = a.iter().map(|v| v.abs()).sum();
            let ratio = Q::from_integer(l1.into()) / norm(&y, spec, &opts)?.value;
            best = best.max(ratio);
        }
        let mut k = 0;
        loop {
            if k == coeffs.len() {
                return Ok(best);
            }
            coeffs[k] += 1;
            if coeffs[k] < grid.len() {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;
    use crate::functionals::{validate_w, WContext};
    use crate::parameters::ParameterSystem;
    use crate::rational::q;

    fn n(x: &FinVector, spec: &SpaceSpec) -> Q {
        let r = norm(x, spec, &NormOptions::default()).unwrap();
        let w = r.witness.as_ref().unwrap();
        assert_eq!(evaluate(w, x), r.value, "witness value");
        assert!(validate_w(w, &WContext::new(spec)).valid, "witness validity: {w:?}");
        r.value
    }

    #[test]
    fn toy_values() {
        let t = SpaceSpec::tsirelson_toy();
        assert_eq!(n(&FinVector::indicator(4..=7), &t), q(2, 1));
        assert_eq!(n(&FinVector::unit(9), &t), Q::one());
        assert_eq!(n(&FinVector::indicator(1..=9), &SpaceSpec::a3_toy()), q(9, 4));
        assert_eq!(n(&FinVector::indicator(1..=9), &SpaceSpec::a3_a9_toy()), q(9, 4));
        assert_eq!(n(&FinVector::indicator(1..=3), &t), Q::one());
        let r = norm(&FinVector::indicator(4..=7), &t, &NormOptions::default()).unwrap();
        assert_eq!(r.method, Method::DpSchreier);
    }

    #[test]
    fn restricted_values() {
        let s = SpaceSpec::a3_a9_toy();
        let x = FinVector::indicator(1..=9);
        let o = NormOptions::default();
        assert_eq!(norm_weight_restricted(&x, &s, &q(1, 8), &o).unwrap().value, q(9, 4));
        assert_eq!(norm_weight_restricted(&x, &s, &q(1, 2), &o).unwrap().value, Q::one());
        assert_eq!(norm_weight_restricted(&FinVector::unit(4), &s, &q(1, 3), &o).unwrap().value, Q::one());
        assert!(norm_weight_restricted(&x, &s, &Q::one(), &o).is_err());
    }

    #[test]
    fn allowable_partitions() {
        let s = SpaceSpec::mixed(vec![2], vec![1], FamilyKind::S, AdmissibilityMode::Allowable);
        assert_eq!(n(&FinVector::indicator(4..=7), &s), q(2, 1));
        let r = norm(&FinVector::indicator(4..=7), &s, &NormOptions::default()).unwrap();
        assert_eq!(r.method, Method::BrutePartition);
        let big = FinVector::indicator(1..=11);
        assert!(matches!(norm(&big, &s, &NormOptions::default()), Err(Error::LimitExceeded(_))));
    }

    #[test]
    fn dependent_rules_need_candidates() {
        let s = SpaceSpec::xcr(ParameterSystem::toy());
        let x = FinVector::indicator([3, 4]);
        assert!(matches!(norm(&x, &s, &NormOptions::default()), Err(Error::UnsupportedRule(_))));
        let opts = NormOptions { candidates: vec![TreeFunctional::leaf(3)], budget: DEFAULT_BUDGET };
        let r = norm(&x, &s, &opts).unwrap();
        assert_eq!(r.bound, Bound::LowerBound);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = norm(&FinVector::indicator(4..=12), &SpaceSpec::tsirelson_toy(), &NormOptions::with_budget(3)).unwrap();
        assert_eq!(r.bound, Bound::LowerBound);
        assert_eq!(r.value, Q::one());
    }

    #[test]
    fn standard_inequality() {
        let t = SpaceSpec::tsirelson_toy();
        let segs: Vec<FiniteSet> = (4..=7).map(|i| FiniteSet::new(vec![i]).unwrap()).collect();
        let r = check_standard_inequality(&FinVector::indicator(4..=7), &t, 1, &segs).unwrap();
        assert!(r.passed());
        assert_eq!(r.lhs, Some(q(2, 1)));
        assert_eq!(r.bound, Some(q(2, 1)));
        let one = [FiniteSet::new(vec![5]).unwrap()];
        let r = check_standard_inequality(&FinVector::unit(5), &t, 1, &one).unwrap();
        assert_eq!((r.lhs, r.bound), (Some(q(1, 2)), Some(Q::one())));
        let bad: Vec<FiniteSet> = (1..=3).map(|i| FiniteSet::new(vec![i]).unwrap()).collect();
        assert!(check_standard_inequality(&FinVector::indicator(1..=3), &t, 1, &bad).is_err());
    }

    #[test]
    fn l1_constant() {
        let t = SpaceSpec::tsirelson_toy();
        assert_eq!(l1_allowable_constant(&[FinVector::unit(3), FinVector::unit(4)], &t).unwrap(), q(2, 1));
        assert_eq!(l1_allowable_constant(&[FinVector::unit(7)], &t).unwrap(), Q::one());
        let overlap = [FinVector::indicator([3, 5]).scale(&q(1, 2)), FinVector::unit(5)];
        assert!(l1_allowable_constant(&overlap, &t).is_err());
    }
}
