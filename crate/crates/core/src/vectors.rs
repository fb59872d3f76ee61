//! Finitely supported vectors and special convex combinations.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::families::{
    family_member, greedy_blocks, greedy_carrier, max_weight_subfamily, FamilySpec, FiniteSet, MAX_CARRIER,
};
use crate::rational::{self, Rat, Q};

/// A finitely supported map from positive integers to rationals.
///
/// Zero coefficients are never stored, so the key set is the support.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinVector {
    coords: BTreeMap<u64, Q>,
}

#[derive(Serialize)]
struct FinVectorRepr {
    coords: BTreeMap<u64, Rat>,
}

// String keys, so decoding also works behind buffered (flattened) input.
#[derive(Deserialize)]
struct FinVectorIn {
    coords: BTreeMap<String, Rat>,
}

impl Serialize for FinVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FinVectorRepr { coords: self.coords.iter().map(|(k, v)| (*k, Rat(v.clone()))).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = FinVectorIn::deserialize(d)?;
        let mut pairs = Vec::with_capacity(r.coords.len());
        for (k, v) in r.coords {
            let i: u64 = k.parse().map_err(|_| D::Error::custom(format!("bad index {k:?}")))?;
            if i == 0 {
                return Err(D::Error::custom("indices start at 1"));
            }
            pairs.push((i, v.0));
        }
        Ok(FinVector::from_pairs(pairs))
    }
}

impl FinVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn unit(i: u64) -> Self {
        Self::from_pairs([(i, Q::one())])
    }

    /// Builds a vector, summing repeated indices and dropping zeros.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, Q)>) -> Self {
        let mut coords: BTreeMap<u64, Q> = BTreeMap::new();
        for (i, v) in pairs {
            *coords.entry(i).or_insert_with(Q::zero) += v;
        }
        coords.retain(|_, v| !v.is_zero());
        FinVector { coords }
    }

    /// `Σ_{i∈set} e_i`.
    pub fn indicator(set: impl IntoIterator<Item = u64>) -> Self {
        Self::from_pairs(set.into_iter().map(|i| (i, Q::one())))
    }

    pub fn get(&self, i: u64) -> Q {
        self.coords.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Q)> {
        self.coords.iter().map(|(k, v)| (*k, v))
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::new(self.coords.keys().copied().collect()).expect("keys are sorted")
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn min_supp(&self) -> Option<u64> {
        self.coords.keys().next().copied()
    }

    pub fn max_supp(&self) -> Option<u64> {
        self.coords.keys().next_back().copied()
    }

    /// Minimal interval containing the support.
    pub fn range(&self) -> Option<(u64, u64)> {
        Some((self.min_supp()?, self.max_supp()?))
    }

    pub fn project(&self, e: &FiniteSet) -> Self {
        self.filter(|i| e.contains(i))
    }

    pub fn project_interval(&self, lo: u64, hi: u64) -> Self {
        FinVector { coords: self.coords.range(lo..=hi).map(|(k, v)| (*k, v.clone())).collect() }
    }

    pub fn filter(&self, keep: impl Fn(u64) -> bool) -> Self {
        FinVector { coords: self.coords.iter().filter(|(k, _)| keep(**k)).map(|(k, v)| (*k, v.clone())).collect() }
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_pairs(self.iter().map(|(k, v)| (k, v * c)))
    }

    pub fn add(&self, other: &FinVector) -> Self {
        Self::from_pairs(self.iter().chain(other.iter()).map(|(k, v)| (k, v.clone())))
    }

    pub fn sub(&self, other: &FinVector) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn abs(&self) -> Self {
        FinVector { coords: self.coords.iter().map(|(k, v)| (*k, v.abs())).collect() }
    }

    pub fn linf(&self) -> Q {
        self.coords.values().map(|v| v.abs()).max().unwrap_or_else(Q::zero)
    }

    pub fn l1(&self) -> Q {
        self.coords.values().map(|v| v.abs()).sum()
    }

    pub fn sum(&self) -> Q {
        self.coords.values().sum()
    }

    /// Duality pairing `Σ_i f_i x_i`.
    pub fn dot(&self, other: &FinVector) -> Q {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().filter_map(|(k, v)| big.coords.get(&k).map(|w| v * w)).sum()
    }

    pub fn coefficients(&self) -> Vec<Q> {
        self.coords.values().cloned().collect()
    }
}

/// `E x` for a set or an interval.
pub fn project(x: &FinVector, e: &Region) -> FinVector {
    match e {
        Region::Set(s) => x.project(s),
        Region::Interval { lo, hi } => x.project_interval(*lo, *hi),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Region {
    Set(FiniteSet),
    Interval { lo: u64, hi: u64 },
}

/// An increasing stream of positive integers: finite, or an infinite progression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IncreasingSeq {
    Finite(FiniteSet),
    Progression { start: u64, step: u64 },
}

impl IncreasingSeq {
    pub fn from(start: u64) -> Self {
        IncreasingSeq::Progression { start, step: 1 }
    }

    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            IncreasingSeq::Finite(s) => Box::new(s.iter()),
            IncreasingSeq::Progression { start, step } => {
                let (start, step) = (*start, (*step).max(1));
                Box::new((0..).map(move |i| start + i * step))
            }
        }
    }
}

/// Repeated average of order `n` on the greedy maximal `S_n`-subset of `l`.
///
/// Order 0 gives `e_{min L}`. Order `n` splits the carrier into its greedy
/// maximal `S_{n-1}` blocks `F_1, ..., F_k` and returns the uniform mixture
/// of the order `n-1` averages on each block.
pub fn repeated_average(l: &IncreasingSeq, n: u64) -> Result<FinVector> {
    let (carrier, saturated) = greedy_carrier(l.iter(), &FamilySpec::s(n), MAX_CARRIER)?;
    if !saturated {
        return Err(Error::CarrierExhausted(format!(
            "stream ended after {} elements before the S_{n} carrier was maximal",
            carrier.len()
        )));
    }
    Ok(average_on(&carrier, n))
}

fn average_on(carrier: &FiniteSet, n: u64) -> FinVector {
    if n == 0 {
        return FinVector::unit(carrier.min().expect("non-empty"));
    }
    let blocks = greedy_blocks(carrier, n);
    let share = Q::new(1.into(), (blocks.len() as i64).into());
    let mut out = FinVector::zero();
    for b in &blocks {
        out = out.add(&average_on(b, n - 1).scale(&share));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccCertificate {
    pub n: u64,
    #[serde(with = "rational::serde_q")]
    pub eps: Q,
    pub carrier: FiniteSet,
    /// Largest coefficient mass on an `S_{n-1}` subset of the carrier.
    #[serde(with = "rational::serde_q")]
    pub smallness: Q,
    #[serde(rename = "normLB", default, with = "rational::serde_q_opt", skip_serializing_if = "Option::is_none")]
    pub norm_lb: Option<Q>,
}

impl SccCertificate {
    /// A recorded lower bound of at least 1/2 makes the combination seminormalized.
    pub fn seminormalized(&self) -> bool {
        self.norm_lb.as_ref().is_some_and(|b| b * Q::from_integer(2.into()) >= Q::one())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SccCheck {
    pub passed: bool,
    pub certificate: SccCertificate,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

/// Checks that `x` is an `(n, eps)`-basic special convex combination.
pub fn check_basic_scc(x: &FinVector, n: u64, eps: &Q) -> Result<SccCheck> {
    if x.iter().any(|(_, v)| v.is_negative()) {
        return domain("scc coefficients must be non-negative");
    }
    let carrier = x.support();
    let mut violations = Vec::new();
    if !family_member(&carrier, &FamilySpec::s(n)) {
        violations.push(format!("carrier is not in S_{n}"));
    }
    let total = x.sum();
    if total != Q::one() {
        violations.push(format!("coefficients sum to {}", rational::to_string(&total)));
    }
    // S_{-1} = {∅}: the smallness sup is 0 for n = 0
    let smallness =
        if n == 0 { Q::zero() } else { max_weight_subfamily(&carrier, &x.coefficients(), &FamilySpec::s(n - 1))? };
    if &smallness >= eps {
        violations.push(format!(
            "mass {} on an S_{} set is not below {}",
            rational::to_string(&smallness),
            n.saturating_sub(1),
            rational::to_string(eps)
        ));
    }
    Ok(SccCheck {
        passed: violations.is_empty(),
        certificate: SccCertificate { n, eps: eps.clone(), carrier, smallness, norm_lb: None },
        violations,
    })
}

pub fn is_block_sequence(blocks: &[FinVector]) -> bool {
    blocks.iter().all(|b| !b.is_zero()) && blocks.windows(2).all(|w| w[0].max_supp() < w[1].min_supp())
}

/// `Σ a_i x_i` with `a` taken from the repeated average on the minimal
/// supports of the blocks (or given explicitly), plus the certificate of the
/// shadow vector `Σ a_i e_{minsupp x_i}`.
///
/// Blocks past the greedy carrier receive coefficient zero.
pub fn make_scc(blocks: &[FinVector], n: u64, eps: &Q, coeffs: Option<&[Q]>) -> Result<(FinVector, Vec<Q>, SccCheck)> {
    if blocks.is_empty() || !is_block_sequence(blocks) {
        return domain("blocks must form a non-empty block sequence");
    }
    let mins: Vec<u64> = blocks.iter().map(|b| b.min_supp().expect("non-zero")).collect();
    let a: Vec<Q> = match coeffs {
        Some(c) => {
            if c.len() != blocks.len() {
                return domain("one coefficient per block is required");
            }
            c.to_vec()
        }
        None => {
            let l = IncreasingSeq::Finite(FiniteSet::new(mins.clone())?);
            let shadow = repeated_average(&l, n)?;
            mins.iter().map(|&m| shadow.get(m)).collect()
        }
    };
    let shadow = FinVector::from_pairs(mins.iter().zip(&a).map(|(&m, c)| (m, c.clone())));
    let check = check_basic_scc(&shadow, n, eps)?;
    let mut x = FinVector::zero();
    for (b, c) in blocks.iter().zip(&a) {
        if !c.is_zero() {
            x = x.add(&b.scale(c));
        }
    }
    Ok((x, a, check))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn projections() {
        let x = FinVector::indicator([3, 5]);
        assert_eq!(x.project(&FiniteSet::new(vec![5]).unwrap()), FinVector::unit(5));
        assert!(x.project(&FiniteSet::empty()).is_zero());
        let y = FinVector::indicator([3, 5, 9]);
        assert_eq!(project(&y, &Region::Interval { lo: 4, hi: 9 }), FinVector::indicator([5, 9]));
    }

    #[test]
    fn zeros_are_dropped() {
        let x = FinVector::from_pairs([(1, q(1, 2)), (1, q(-1, 2)), (2, q(1, 3))]);
        assert_eq!(x.support().as_slice(), &[2]);
        assert_eq!(x.range(), Some((2, 2)));
    }

    #[test]
    fn repeated_average_examples() {
        let r = repeated_average(&IncreasingSeq::from(4), 1).unwrap();
        assert_eq!(r, FinVector::indicator(4..=7).scale(&q(1, 4)));
        assert_eq!(repeated_average(&IncreasingSeq::from(7), 0).unwrap(), FinVector::unit(7));
        let r = repeated_average(&IncreasingSeq::from(4), 2).unwrap();
        for (i, v) in r.iter() {
            let expect = match i {
                4..=7 => q(1, 16),
                8..=15 => q(1, 32),
                16..=31 => q(1, 64),
                32..=63 => q(1, 128),
                _ => panic!("unexpected index {i}"),
            };
            assert_eq!(v, &expect);
        }
        assert_eq!(r.len(), 60);
        assert_eq!(r.sum(), Q::one());
        let short = IncreasingSeq::Finite(FiniteSet::interval(4, 6));
        assert!(matches!(repeated_average(&short, 1), Err(Error::CarrierExhausted(_))));
    }

    #[test]
    fn basic_scc_examples() {
        let x = FinVector::indicator(4..=7).scale(&q(1, 4));
        let c = check_basic_scc(&x, 1, &q(1, 3)).unwrap();
        assert!(c.passed);
        assert_eq!(c.certificate.smallness, q(1, 4));
        let c = check_basic_scc(&x, 1, &q(1, 4)).unwrap();
        assert!(!c.passed);
        assert_eq!(c.certificate.smallness, q(1, 4));
        let c = check_basic_scc(&FinVector::unit(5), 0, &q(1, 2)).unwrap();
        assert!(c.passed);
        assert_eq!(c.certificate.smallness, Q::zero());
        assert!(check_basic_scc(&FinVector::unit(5).scale(&q(-1, 1)), 0, &q(1, 2)).is_err());
        let r = repeated_average(&IncreasingSeq::from(4), 2).unwrap();
        let c = check_basic_scc(&r, 2, &q(1, 3)).unwrap();
        assert!(c.passed);
        assert_eq!(c.certificate.smallness, q(1, 4));
    }

    #[test]
    fn make_scc_examples() {
        let blocks: Vec<_> = (0..4).map(|i| FinVector::indicator([4 + i])).collect();
        let (x, a, c) = make_scc(&blocks, 1, &q(1, 3), None).unwrap();
        assert!(c.passed);
        assert_eq!(a, vec![q(1, 4); 4]);
        assert_eq!(x, FinVector::indicator(4..=7).scale(&q(1, 4)));
        let single = [FinVector::indicator([3, 4]).scale(&q(2, 1))];
        let (x, a, c) = make_scc(&single, 0, &q(1, 2), None).unwrap();
        assert!(c.passed);
        assert_eq!(a, vec![Q::one()]);
        assert_eq!(x, single[0]);
        let overlapping = [FinVector::indicator([3, 6]), FinVector::indicator([5, 8])];
        assert!(make_scc(&overlapping, 1, &q(1, 2), None).is_err());
    }

    #[test]
    fn json_shape() {
        let x = FinVector::from_pairs([(3, q(1, 2)), (10, q(2, 1))]);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"coords":{"3":"1/2","10":"2/1"}}"#);
        assert_eq!(serde_json::from_str::<FinVector>(&s).unwrap(), x);
    }
}
