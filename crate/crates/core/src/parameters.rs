//! Parameter systems (`m_j`, `n_j`, `s_j`, `l(n, ε)`, `L_1`/`L_2`) and the
//! space descriptions built on them.
//!
//! The published system grows far too fast for set-level computation
//! (`n_2 = 900`), so arbitrary toy systems are first-class and every
//! algorithm takes its parameters from a [`ParameterSystem`].

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::families::{AdmissibilityMode, FamilyKind, FamilySpec};
use crate::rational::{self, ceil_log2_recip, recip, Q};

/// Largest `j` for which the published `m_j = 2^(5^(j-1))` is materialized.
pub const PAPER_M_MAX_INDEX: usize = 10;

/// A positive integer sequence indexed from `j = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeqDef {
    /// `"paper"`: `m_1 = 2, m_{j+1} = m_j^5` and `n_1 = 4, n_{j+1} = 15 s_j n_j`.
    Named(String),
    Table(Vec<u64>),
    /// `first * ratio^(j-1)`.
    Geometric {
        first: u64,
        ratio: u64,
    },
    /// `first + step * (j-1)`.
    Arithmetic {
        first: u64,
        step: u64,
    },
}

impl SeqDef {
    pub fn paper() -> Self {
        SeqDef::Named("paper".into())
    }

    fn is_paper(&self) -> bool {
        matches!(self, SeqDef::Named(s) if s == "paper")
    }

    /// Number of defined terms, `None` if unbounded.
    pub fn len(&self) -> Option<usize> {
        match self {
            SeqDef::Table(t) => Some(t.len()),
            _ => None,
        }
    }
}

/// Choice of `l(n, ε)`; the published value is only known to exist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LDef {
    /// `"default"` (`n + ceil(log2(1/ε))`) or `"identity"` (`n`).
    Named(String),
    /// Explicit values; unlisted inputs fall back to the default formula.
    Table(Vec<LEntry>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LEntry {
    pub n: u64,
    #[serde(with = "rational::serde_q")]
    pub eps: Q,
    pub value: u64,
}

/// Membership rule for `L_1`; `L_2` is the complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PartitionDef {
    /// `"odds"` or `"evens"`.
    Named(String),
    /// Members of `L_1` up to the largest listed value; odd numbers beyond it.
    Prefix(Vec<u64>),
}

/// `l(n, ε) = n + ceil(log2(1/ε))`.
///
/// A search budget, not a certified constant: anything that relies on the
/// seminormalization it is supposed to guarantee has to re-check norms.
pub fn default_l(n: &BigUint, eps: &Q) -> Result<BigUint> {
    if eps <= &Q::zero() || eps >= &Q::one() {
        return domain("l(n, eps) requires 0 < eps < 1");
    }
    Ok(n + BigUint::from(ceil_log2_recip(eps)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    M,
    N,
    S,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterSystem {
    pub m: SeqDef,
    pub n: SeqDef,
    #[serde(default = "default_ldef")]
    pub l: LDef,
    #[serde(rename = "L1", default = "default_partition")]
    pub l1: PartitionDef,
}

fn default_ldef() -> LDef {
    LDef::Named("default".into())
}

fn default_partition() -> PartitionDef {
    PartitionDef::Named("odds".into())
}

impl ParameterSystem {
    /// `m_1 = 2, m_{j+1} = m_j^5, n_1 = 4, n_{j+1} = 15 s_j n_j`.
    pub fn paper() -> Self {
        ParameterSystem { m: SeqDef::paper(), n: SeqDef::paper(), l: default_ldef(), l1: default_partition() }
    }

    /// `m_j = 2^j`, `n_j = j`, `l(n, ε) = n`.
    pub fn toy() -> Self {
        ParameterSystem {
            m: SeqDef::Geometric { first: 2, ratio: 2 },
            n: SeqDef::Arithmetic { first: 1, step: 1 },
            l: LDef::Named("identity".into()),
            l1: default_partition(),
        }
    }

    pub fn with_tables(m: Vec<u64>, n: Vec<u64>) -> Self {
        ParameterSystem { m: SeqDef::Table(m), n: SeqDef::Table(n), l: default_ldef(), l1: default_partition() }
    }

    /// Number of levels with both `m_j` and `n_j` defined.
    pub fn levels(&self) -> Option<usize> {
        match (self.m.len(), self.n.len()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    }

    pub fn m(&self, j: usize) -> Result<BigUint> {
        if j == 0 {
            return domain("parameter index j must be >= 1");
        }
        if self.m.is_paper() {
            if j > PAPER_M_MAX_INDEX {
                return Err(Error::LimitExceeded(format!("m_{j} has 5^{} bits", j - 1)));
            }
            return Ok(BigUint::one() << 5u64.pow(j as u32 - 1));
        }
        eval_seq(&self.m, j, "m")
    }

    pub fn n(&self, j: usize) -> Result<BigUint> {
        if j == 0 {
            return domain("parameter index j must be >= 1");
        }
        if self.n.is_paper() {
            let mut n = BigUint::from(4u32);
            for i in 1..j {
                n = n * BigUint::from(15u32) * self.s(i)?;
            }
            return Ok(n);
        }
        eval_seq(&self.n, j, "n")
    }

    /// `s_j = log2(m_{j+1}^3)`, rounded up for systems where it is not integral.
    pub fn s(&self, j: usize) -> Result<BigUint> {
        if j == 0 {
            return domain("parameter index j must be >= 1");
        }
        if self.m.is_paper() {
            // m_{j+1}^3 = 2^(3 * 5^j)
            return Ok(BigUint::from(3u32) * BigUint::from(5u32).pow(j as u32));
        }
        let cube = self.m(j + 1)?.pow(3);
        Ok(BigUint::from((cube - BigUint::one()).bits()))
    }

    pub fn eval(&self, kind: ParamKind, j: usize) -> Result<BigUint> {
        match kind {
            ParamKind::M => self.m(j),
            ParamKind::N => self.n(j),
            ParamKind::S => self.s(j),
        }
    }

    /// `n_j` as a family index, saturating at `u64::MAX`.
    pub fn n_index(&self, j: usize) -> Result<u64> {
        Ok(self.n(j)?.to_u64().unwrap_or(u64::MAX))
    }

    pub fn l(&self, n: &BigUint, eps: &Q) -> Result<BigUint> {
        if eps <= &Q::zero() || eps >= &Q::one() {
            return domain("l(n, eps) requires 0 < eps < 1");
        }
        match &self.l {
            LDef::Named(s) if s == "identity" => Ok(n.clone()),
            LDef::Named(s) if s == "default" => default_l(n, eps),
            LDef::Named(s) => Err(Error::Parse(format!("unknown l function {s:?}"))),
            LDef::Table(entries) => {
                let hit = entries.iter().find(|e| &BigUint::from(e.n) == n && &e.eps == eps);
                match hit {
                    Some(e) if BigUint::from(e.value) >= *n => Ok(BigUint::from(e.value)),
                    Some(e) => domain(format!("table value l({}, ..) = {} is below n", e.n, e.value)),
                    None => default_l(n, eps),
                }
            }
        }
    }

    /// `ρ(n) = l(n_{2s}, m_{2s}^{-2})` for the least `s` with `n^2 <= m_{2s}`.
    /// Returns `(ρ(n), s)`.
    pub fn rho(&self, n: u64) -> Result<(BigUint, usize)> {
        if n == 0 {
            return domain("rho requires n >= 1");
        }
        let sq = BigUint::from(n) * BigUint::from(n);
        for s in 1.. {
            let m2s = self.m(2 * s)?;
            if sq <= m2s {
                let eps = recip(&(&m2s * &m2s));
                return Ok((self.l(&self.n(2 * s)?, &eps)?, s));
            }
        }
        unreachable!()
    }

    pub fn in_l1(&self, j: u64) -> bool {
        match &self.l1 {
            PartitionDef::Named(s) if s == "evens" => j % 2 == 0,
            PartitionDef::Named(_) => j % 2 == 1,
            PartitionDef::Prefix(v) => match v.iter().max() {
                Some(&top) if j <= top => v.contains(&j),
                _ => j % 2 == 1,
            },
        }
    }

    pub fn in_l2(&self, j: u64) -> bool {
        j >= 1 && !self.in_l1(j)
    }

    /// Checks the invariants on the first `prefix` terms.
    pub fn validate(&self, prefix: usize) -> Result<()> {
        let top = self.levels().map_or(prefix, |l| l.min(prefix));
        let mut prev_m = BigUint::zero();
        let mut prev_n = BigUint::zero();
        for j in 1..=top {
            let m = self.m(j)?;
            let n = self.n(j)?;
            if j == 1 && m < BigUint::from(2u32) {
                return domain("m_1 must be at least 2");
            }
            if j > 1 && (m <= prev_m || n <= prev_n) {
                return domain(format!("m and n must be strictly increasing (j = {j})"));
            }
            if n.is_zero() {
                return domain("n_j must be positive");
            }
            prev_m = m;
            prev_n = n;
        }
        let window = 1..=(2 * prefix as u64).max(16);
        let ones = window.clone().filter(|&j| self.in_l1(j)).count();
        if ones == 0 || ones == window.count() {
            return domain("L1 and L2 must both be infinite");
        }
        if let PartitionDef::Named(s) = &self.l1 {
            if s != "odds" && s != "evens" {
                return Err(Error::Parse(format!("unknown partition {s:?}")));
            }
        }
        Ok(())
    }
}

fn eval_seq(seq: &SeqDef, j: usize, name: &str) -> Result<BigUint> {
    match seq {
        SeqDef::Table(t) => t
            .get(j - 1)
            .map(|&v| BigUint::from(v))
            .ok_or_else(|| Error::Domain(format!("{name}_{j} is beyond the parameter table"))),
        SeqDef::Geometric { first, ratio } => Ok(BigUint::from(*first) * BigUint::from(*ratio).pow(j as u32 - 1)),
        SeqDef::Arithmetic { first, step } => Ok(BigUint::from(*first) + BigUint::from(*step) * BigUint::from(j - 1)),
        SeqDef::Named(s) => Err(Error::Parse(format!("unknown sequence {s:?}"))),
    }
}

/// Which levels `j` a rule applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Levels {
    /// `"all"`, `"even"` or `"odd"`.
    Named(String),
    List(Vec<usize>),
}

impl Levels {
    pub fn all() -> Self {
        Levels::Named("all".into())
    }

    pub fn even() -> Self {
        Levels::Named("even".into())
    }

    pub fn odd() -> Self {
        Levels::Named("odd".into())
    }

    pub fn contains(&self, j: usize) -> bool {
        match self {
            Levels::Named(s) if s == "even" => j % 2 == 0,
            Levels::Named(s) if s == "odd" => j % 2 == 1,
            Levels::Named(_) => true,
            Levels::List(v) => v.contains(&j),
        }
    }

    fn max(&self) -> Option<usize> {
        match self {
            Levels::List(v) => v.iter().max().copied(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionKind {
    Subsets,
    Intervals,
}

/// One closure rule of a norming set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// `(M_j, θ_j)`-operations with `M_j = S_{n_j}` or `A_{n_j}`, on
    /// admissible (block) or allowable (disjoint) sequences.
    Operations {
        levels: Levels,
        family: FamilyKind,
        mode: AdmissibilityMode,
    },
    /// `(S_{n_{2j+1}}, m_{2j+1}^{-1})`-operations on dependent sequences.
    Dependent,
    /// `(A_{n_{2j+1}}, m_{2j+1}^{-1})`-operations on special sequences.
    SpecialW4,
    /// The halving restriction `g = S_F f / 2` for Schreier `F`.
    GOperation,
    SignChange,
    Projection {
        on: ProjectionKind,
    },
}

/// Resolved operation at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelOp {
    pub level: usize,
    pub family: FamilySpec,
    pub mode: AdmissibilityMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    #[serde(flatten)]
    pub params: ParameterSystem,
    pub rules: Vec<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "theta_serde")]
    pub theta: Option<Vec<Q>>,
    #[serde(rename = "oddEnabled", default = "yes")]
    pub odd_enabled: bool,
}

fn yes() -> bool {
    true
}

mod theta_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<Vec<Q>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&v.iter().map(rational::to_string).collect::<Vec<_>>()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Q>>, D::Error> {
        use serde::de::Error as _;
        let v = Option::<Vec<String>>::deserialize(d)?;
        v.map(|v| v.iter().map(|s| rational::parse(s).map_err(D::Error::custom)).collect()).transpose()
    }
}

impl SpaceSpec {
    pub fn new(params: ParameterSystem, rules: Vec<Rule>) -> Self {
        SpaceSpec { params, rules, theta: None, odd_enabled: true }
    }

    /// `T[(S_1, 1/2)]`.
    pub fn tsirelson_toy() -> Self {
        Self::mixed(vec![2], vec![1], FamilyKind::S, AdmissibilityMode::Admissible)
    }

    /// `T[(A_3, 1/2)]`.
    pub fn a3_toy() -> Self {
        Self::mixed(vec![2], vec![3], FamilyKind::A, AdmissibilityMode::Admissible)
    }

    /// `T[(A_3, 1/2), (A_9, 1/8)]`.
    pub fn a3_a9_toy() -> Self {
        Self::mixed(vec![2, 8], vec![3, 9], FamilyKind::A, AdmissibilityMode::Admissible)
    }

    /// Mixed Tsirelson space over table parameters, `θ_j = 1/m_j`.
    pub fn mixed(m: Vec<u64>, n: Vec<u64>, family: FamilyKind, mode: AdmissibilityMode) -> Self {
        Self::new(
            ParameterSystem::with_tables(m, n),
            vec![Rule::Operations { levels: Levels::all(), family, mode }, Rule::SignChange],
        )
    }

    /// Norming set closed under (α)–(δ): sign changes, subset projections,
    /// even allowable Schreier operations and odd dependent operations.
    pub fn xcr(params: ParameterSystem) -> Self {
        Self::new(
            params,
            vec![
                Rule::SignChange,
                Rule::Projection { on: ProjectionKind::Subsets },
                Rule::Operations { levels: Levels::even(), family: FamilyKind::S, mode: AdmissibilityMode::Allowable },
                Rule::Dependent,
            ],
        )
    }

    /// The `W_4` rules: signs, interval projections, even `A`-block
    /// operations, odd special operations and the G-operation.
    pub fn w4(params: ParameterSystem) -> Self {
        Self::new(
            params,
            vec![
                Rule::SignChange,
                Rule::Projection { on: ProjectionKind::Intervals },
                Rule::Operations { levels: Levels::even(), family: FamilyKind::A, mode: AdmissibilityMode::Admissible },
                Rule::SpecialW4,
                Rule::GOperation,
            ],
        )
    }

    pub fn theta(&self, j: usize) -> Result<Q> {
        match &self.theta {
            Some(t) => {
                t.get(j.wrapping_sub(1)).cloned().ok_or_else(|| Error::Domain(format!("theta_{j} is not configured")))
            }
            None => Ok(recip(&self.params.m(j)?)),
        }
    }

    pub fn has_rule(&self, pred: impl Fn(&Rule) -> bool) -> bool {
        self.rules.iter().any(pred)
    }

    pub fn has_dependent(&self) -> bool {
        self.odd_enabled && self.has_rule(|r| matches!(r, Rule::Dependent | Rule::SpecialW4))
    }

    /// Highest level any operation can use, if bounded.
    pub fn max_level(&self) -> Option<usize> {
        let table = [self.params.levels(), self.theta.as_ref().map(Vec::len)].into_iter().flatten().min();
        let listed = self
            .rules
            .iter()
            .filter_map(|r| match r {
                Rule::Operations { levels, .. } => Some(levels.max()),
                _ => None,
            })
            .collect::<Vec<_>>();
        let listed = if listed.iter().all(Option::is_some) { listed.into_iter().flatten().max() } else { None };
        match (table, listed) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The plain operations available at level `j`.
    pub fn ops_at(&self, j: usize) -> Result<Vec<LevelOp>> {
        let mut out = Vec::new();
        for r in &self.rules {
            if let Rule::Operations { levels, family, mode } = r {
                if levels.contains(j) {
                    let index = self.params.n_index(j)?;
                    let family = FamilySpec::new(*family, index)?;
                    out.push(LevelOp { level: j, family, mode: *mode });
                }
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate(8)?;
        let top = self.max_level().unwrap_or(8).min(8);
        for j in 1..=top {
            let t = self.theta(j)?;
            if t <= Q::zero() || t > Q::one() {
                return domain(format!("theta_{j} must lie in (0, 1]"));
            }
            self.ops_at(j)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn paper_recurrences() {
        let p = ParameterSystem::paper();
        assert_eq!(p.m(1).unwrap(), big(2));
        assert_eq!(p.m(2).unwrap(), big(32));
        assert_eq!(p.s(1).unwrap(), big(15));
        assert_eq!(p.n(1).unwrap(), big(4));
        assert_eq!(p.n(2).unwrap(), big(900));
        for j in 1..=4 {
            assert_eq!(p.m(j + 1).unwrap(), p.m(j).unwrap().pow(5));
            assert_eq!(p.n(j + 1).unwrap(), big(15) * p.s(j).unwrap() * p.n(j).unwrap());
            // s_j = log2(m_{j+1}^3) exactly
            assert_eq!(BigUint::one() << p.s(j).unwrap().to_u64().unwrap(), p.m(j + 1).unwrap().pow(3));
        }
        assert!(p.m(0).is_err());
    }

    #[test]
    fn default_l_examples() {
        assert_eq!(default_l(&big(4), &q(1, 2)).unwrap(), big(5));
        assert_eq!(default_l(&big(4), &q(1, 1024)).unwrap(), big(14));
        assert_eq!(default_l(&big(1), &q(1, 3)).unwrap(), big(3));
        assert!(default_l(&big(1), &q(1, 1)).is_err());
        assert!(default_l(&big(1), &q(0, 1)).is_err());
    }

    #[test]
    fn rho_examples() {
        let p = ParameterSystem::paper();
        let (r, s) = p.rho(5).unwrap();
        assert_eq!(s, 1);
        assert_eq!(r, p.l(&big(900), &q(1, 1024)).unwrap());
        let (r, s) = p.rho(6).unwrap();
        assert_eq!(s, 2);
        let m4 = p.m(4).unwrap();
        assert_eq!(r, p.l(&p.n(4).unwrap(), &recip(&(&m4 * &m4))).unwrap());
        let toy = ParameterSystem::toy();
        assert_eq!(toy.rho(2).unwrap(), (big(2), 1));
    }

    #[test]
    fn rho_is_monotone() {
        let toy = ParameterSystem::toy();
        let vals: Vec<_> = (1..200).map(|n| toy.rho(n).unwrap().0).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn partitions() {
        let p = ParameterSystem::paper();
        assert!(p.in_l1(1) && p.in_l2(2));
        let mut custom = p.clone();
        custom.l1 = PartitionDef::Prefix(vec![2, 3]);
        assert!(custom.in_l1(2) && custom.in_l1(3) && !custom.in_l1(1) && custom.in_l1(5));
        assert!(custom.validate(4).is_ok());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SpaceSpec::xcr(ParameterSystem::toy());
        let s = serde_json::to_string(&spec).unwrap();
        let back: SpaceSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        let cfg = r#"{"m":"paper","n":"paper","rules":[{"rule":"operations","levels":"even","family":"S","mode":"allowable"}],"l":"default","L1":"odds"}"#;
        let spec: SpaceSpec = serde_json::from_str(cfg).unwrap();
        assert_eq!(spec.params, ParameterSystem::paper());
        assert_eq!(spec.theta(2).unwrap(), q(1, 32));
        let t: SpaceSpec = serde_json::from_str(r#"{"m":[2],"n":[1],"theta":["1/2"],"rules":[]}"#).unwrap();
        assert_eq!(t.theta(1).unwrap(), q(1, 2));
        assert!(t.theta(2).is_err());
    }

    #[test]
    fn validation_rejects_bad_systems() {
        assert!(ParameterSystem::with_tables(vec![2, 2], vec![1, 2]).validate(4).is_err());
        assert!(ParameterSystem::with_tables(vec![1, 2], vec![1, 2]).validate(4).is_err());
        assert!(ParameterSystem::toy().validate(8).is_ok());
        assert!(ParameterSystem::paper().validate(4).is_ok());
    }
}
