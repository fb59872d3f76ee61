//! Set families `A_k`, Schreier families `S_n` and modified Schreier
//! families `S_n^M`, with membership, greedy maximal subsets and
//! weight maximization.
//!
//! Schreier membership is decided online. A set `F = {f_1 < ... < f_k}` is
//! fed element by element into a [`SchreierState`] which keeps, for every
//! level `l = 1..=n`, the minimum of the current `S_l`-block and how many
//! `S_{l-1}`-blocks it already holds. A new element goes into the lowest
//! level that still has room (block count below block minimum). This is the
//! greedy decomposition into maximal initial `S_{n-1}`-segments. Because
//! `S_n` is hereditary and spreading, any decomposition of `F` can be
//! shifted so that its first block is a maximal initial segment without
//! increasing the block count, so the greedy count is the minimum count and
//! the online test is exact.
//!
//! Acceptance of the next element never depends on its value (only on the
//! counters), which is what makes [`FamilyState::saturated`] meaningful.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rational::Q;

/// Default size bound for exhaustive searches over subsets and partitions.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `A_k`: all sets of cardinality at most `k`.
    A,
    /// Schreier family `S_n`.
    S,
    /// Modified Schreier family `S_n^M`.
    SM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub index: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, index: u64) -> Result<Self> {
        if kind == FamilyKind::A && index == 0 {
            return domain("A_k requires k >= 1");
        }
        Ok(FamilySpec { kind, index })
    }

    pub fn a(k: u64) -> Self {
        Self::new(FamilyKind::A, k).expect("k >= 1")
    }

    pub fn s(n: u64) -> Self {
        FamilySpec { kind: FamilyKind::S, index: n }
    }

    pub fn sm(n: u64) -> Self {
        FamilySpec { kind: FamilyKind::SM, index: n }
    }

    /// Fresh online state for sets of at most `max_len` elements.
    ///
    /// For `S_n` and `S_n^M` the level count is clamped to `max_len`; on sets
    /// of that size `S_n` and `S_{max_len}` coincide for every `n >= max_len`.
    pub fn state(&self, max_len: usize) -> FamilyState {
        match self.kind {
            FamilyKind::A => FamilyState::Bounded { limit: self.index, count: 0 },
            FamilyKind::S | FamilyKind::SM => {
                let n = (self.index as usize).min(max_len.max(1));
                FamilyState::Schreier(SchreierState::new(n))
            }
        }
    }
}

impl std::fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            FamilyKind::A => write!(f, "A_{}", self.index),
            FamilyKind::S => write!(f, "S_{}", self.index),
            FamilyKind::SM => write!(f, "S^M_{}", self.index),
        }
    }
}

/// A finite strictly increasing set of positive integers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteSet(Vec<u64>);

impl TryFrom<Vec<u64>> for FiniteSet {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        FiniteSet::new(v)
    }
}

impl From<FiniteSet> for Vec<u64> {
    fn from(s: FiniteSet) -> Vec<u64> {
        s.0
    }
}

impl FiniteSet {
    /// Validates that `elements` is strictly increasing and positive.
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.first() == Some(&0) {
            return domain("set elements must be positive integers");
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return domain("set elements must be strictly increasing");
        }
        Ok(FiniteSet(elements))
    }

    /// Sorts and deduplicates arbitrary positive integers.
    pub fn from_unsorted(mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::new(elements)
    }

    pub fn interval(lo: u64, hi: u64) -> Self {
        FiniteSet((lo.max(1)..=hi).collect())
    }

    pub fn empty() -> Self {
        FiniteSet(Vec::new())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().copied()
    }

    pub fn is_disjoint(&self, other: &FiniteSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn is_subset(&self, other: &FiniteSet) -> bool {
        self.0.iter().all(|x| other.contains(*x))
    }

    /// `self < other`: every element of `self` is below every element of `other`.
    pub fn precedes(&self, other: &FiniteSet) -> bool {
        match (self.max(), other.min()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }
}

/// Online Schreier state; see the module docs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SchreierState {
    /// `levels[l]` is `(min, blocks)` of the current `S_{l+1}`-block.
    levels: Vec<(u64, u64)>,
    started: bool,
}

impl SchreierState {
    pub fn new(n: usize) -> Self {
        SchreierState { levels: vec![(0, 0); n], started: false }
    }

    pub fn push(&self, x: u64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        let mut next = self.clone();
        if !self.started {
            next.started = true;
            for lv in next.levels.iter_mut() {
                *lv = (x, 1);
            }
            return Some(next);
        }
        let l = self.levels.iter().position(|&(min, blocks)| blocks < min)?;
        next.levels[l].1 += 1;
        for lv in next.levels[..l].iter_mut() {
            *lv = (x, 1);
        }
        Some(next)
    }

    pub fn saturated(&self) -> bool {
        self.started && self.levels.iter().all(|&(min, blocks)| blocks >= min)
    }

    pub fn is_empty(&self) -> bool {
        !self.started
    }
}

/// Online membership state for an `A_k` or Schreier family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FamilyState {
    Bounded { limit: u64, count: u64 },
    Schreier(SchreierState),
}

impl FamilyState {
    /// Appends `x` (which must exceed every element pushed so far).
    pub fn push(&self, x: u64) -> Option<Self> {
        match self {
            FamilyState::Bounded { limit, count } => {
                (count < limit).then(|| FamilyState::Bounded { limit: *limit, count: count + 1 })
            }
            FamilyState::Schreier(s) => s.push(x).map(FamilyState::Schreier),
        }
    }

    /// True when no further element can be appended.
    pub fn saturated(&self) -> bool {
        match self {
            FamilyState::Bounded { limit, count } => count >= limit,
            FamilyState::Schreier(s) => s.saturated(),
        }
    }
}

fn schreier_member(f: &FiniteSet, spec: &FamilySpec) -> bool {
    let mut st = spec.state(f.len());
    for x in f.iter() {
        match st.push(x) {
            Some(next) => st = next,
            None => return false,
        }
    }
    true
}

/// Membership of `f` in the named family.
///
/// `S_n^M` is decided by exhaustive partition search for sets up to
/// [`DEFAULT_EXHAUSTIVE_CAP`] elements. Larger sets fall back to the `S_n`
/// test, which agrees with it wherever both are computed.
pub fn family_member(f: &FiniteSet, spec: &FamilySpec) -> bool {
    match spec.kind {
        FamilyKind::A => f.len() as u64 <= spec.index,
        FamilyKind::S => schreier_member(f, spec),
        FamilyKind::SM => {
            if f.len() <= DEFAULT_EXHAUSTIVE_CAP {
                let mut oracle = ModifiedSchreier::new(f.clone());
                oracle.member_mask(oracle.full_mask(), spec.index)
            } else {
                schreier_member(f, spec)
            }
        }
    }
}

/// Exhaustive `S_n^M` membership over the subsets of a fixed ground set.
///
/// `F ∈ S_n^M` iff `F` splits into at most `min F` pairwise disjoint
/// `S_{n-1}^M` sets; `S_0^M = S_0`. Memo tables are keyed by position masks
/// over the ground set and shared across queries.
#[derive(Debug, Clone)]
pub struct ModifiedSchreier {
    ground: FiniteSet,
    member: HashMap<(u32, u64), bool>,
    min_blocks: HashMap<(u32, u64), u32>,
}

impl ModifiedSchreier {
    pub fn new(ground: FiniteSet) -> Self {
        assert!(ground.len() <= 31, "ground set too large for exhaustive search");
        ModifiedSchreier { ground, member: HashMap::new(), min_blocks: HashMap::new() }
    }

    pub fn full_mask(&self) -> u32 {
        ((1u64 << self.ground.len()) - 1) as u32
    }

    /// Position mask of a subset of the ground set.
    pub fn mask_of(&self, f: &FiniteSet) -> Option<u32> {
        let g = self.ground.as_slice();
        let mut mask = 0u32;
        for x in f.iter() {
            mask |= 1 << g.binary_search(&x).ok()?;
        }
        Some(mask)
    }

    pub fn member(&mut self, f: &FiniteSet, n: u64) -> bool {
        match self.mask_of(f) {
            Some(m) => self.member_mask(m, n),
            None => {
                let mut local = ModifiedSchreier::new(f.clone());
                local.member_mask(local.full_mask(), n)
            }
        }
    }

    pub fn member_mask(&mut self, mask: u32, n: u64) -> bool {
        if mask.count_ones() <= 1 {
            return true;
        }
        if n == 0 {
            return false;
        }
        // S_n for n >= |F| behaves like S_{|F|}
        let n = n.min(mask.count_ones() as u64);
        if let Some(&b) = self.member.get(&(mask, n)) {
            return b;
        }
        let min = self.ground.as_slice()[mask.trailing_zeros() as usize];
        let blocks = self.fewest_blocks(mask, n - 1);
        let ans = (blocks as u64) <= min;
        self.member.insert((mask, n), ans);
        ans
    }

    /// Fewest pairwise disjoint `S_level^M` sets covering `mask`.
    fn fewest_blocks(&mut self, mask: u32, level: u64) -> u32 {
        if mask == 0 {
            return 0;
        }
        if let Some(&b) = self.min_blocks.get(&(mask, level)) {
            return b;
        }
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut best = u32::MAX;
        // every block containing the lowest element: low | sub for sub ⊆ rest
        let mut sub = rest;
        loop {
            let block = low | sub;
            if self.member_mask(block, level) {
                let r = self.fewest_blocks(rest & !sub, level);
                best = best.min(r.saturating_add(1));
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        self.min_blocks.insert((mask, level), best);
        best
    }
}

/// Greedy maximal family subset of an increasing stream.
///
/// Returns the set and whether it is saturated (no further element of any
/// value could be appended). Streams that end early give an unsaturated set.
pub fn greedy_carrier<I>(stream: I, spec: &FamilySpec, cap: usize) -> Result<(FiniteSet, bool)>
where
    I: IntoIterator<Item = u64>,
{
    if spec.kind == FamilyKind::SM {
        return domain("maximal subsets are defined for A and S families");
    }
    let mut st = spec.state(cap);
    let mut out = Vec::new();
    let mut last = 0u64;
    for x in stream {
        if x <= last {
            return domain("stream must be strictly increasing and positive");
        }
        last = x;
        match st.push(x) {
            Some(next) => {
                st = next;
                out.push(x);
                if out.len() > cap {
                    return Err(Error::LimitExceeded(format!("maximal {spec} subset exceeds {cap} elements")));
                }
            }
            None => return Ok((FiniteSet(out), true)),
        }
        if st.saturated() {
            return Ok((FiniteSet(out), true));
        }
    }
    if out.is_empty() {
        return domain("empty stream");
    }
    Ok((FiniteSet(out), false))
}

/// Size cap used by [`maximal_family_subset`] on infinite streams.
pub const MAX_CARRIER: usize = 1 << 20;

/// The greedy maximal `spec`-subset of `stream` (starting from its minimum).
///
/// If a finite stream runs out first, the whole stream is returned: it is
/// then trivially maximal inside the stream.
pub fn maximal_family_subset<I>(stream: I, spec: &FamilySpec) -> Result<FiniteSet>
where
    I: IntoIterator<Item = u64>,
{
    greedy_carrier(stream, spec, MAX_CARRIER).map(|(s, _)| s)
}

/// Greedy decomposition of an `S_n` set into maximal initial `S_{n-1}` segments.
pub fn greedy_blocks(f: &FiniteSet, n: u64) -> Vec<FiniteSet> {
    if n == 0 {
        return f.iter().map(|x| FiniteSet(vec![x])).collect();
    }
    let inner = FamilySpec::s(n - 1);
    let mut blocks = Vec::new();
    let mut cur: Vec<u64> = Vec::new();
    let mut st = inner.state(f.len());
    for x in f.iter() {
        match st.push(x) {
            Some(next) => {
                st = next;
                cur.push(x);
            }
            None => {
                blocks.push(FiniteSet(std::mem::take(&mut cur)));
                st = inner.state(f.len()).push(x).expect("fresh state accepts");
                cur.push(x);
            }
        }
    }
    if !cur.is_empty() {
        blocks.push(FiniteSet(cur));
    }
    blocks
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdmissibilityMode {
    /// Successive segments, minima in the family.
    Admissible,
    /// Pairwise disjoint segments, minima in the family.
    Allowable,
}

pub fn is_admissible(segments: &[FiniteSet], spec: &FamilySpec, mode: AdmissibilityMode) -> Result<bool> {
    if segments.iter().any(FiniteSet::is_empty) {
        return domain("segments must be non-empty");
    }
    let structural = match mode {
        AdmissibilityMode::Admissible => segments.windows(2).all(|w| w[0].precedes(&w[1])),
        AdmissibilityMode::Allowable => {
            segments.iter().enumerate().all(|(i, a)| segments[i + 1..].iter().all(|b| a.is_disjoint(b)))
        }
    };
    if !structural {
        return Ok(false);
    }
    let mins = FiniteSet::from_unsorted(segments.iter().filter_map(FiniteSet::min).collect())?;
    if mins.len() != segments.len() {
        return Ok(false);
    }
    Ok(family_member(&mins, spec))
}

/// `max { Σ_{i∈G} w_i : G ⊆ F, G ∈ spec }`, exactly.
///
/// `weights[i]` belongs to the `i`-th element of `f`.
pub fn max_weight_subfamily(f: &FiniteSet, weights: &[Q], spec: &FamilySpec) -> Result<Q> {
    if weights.len() != f.len() {
        return domain("one weight per element is required");
    }
    if weights.iter().any(|w| w < &Q::zero()) {
        return domain("weights must be non-negative");
    }
    match spec.kind {
        FamilyKind::A => {
            let mut w: Vec<&Q> = weights.iter().collect();
            w.sort_by(|a, b| b.cmp(a));
            Ok(w.into_iter().take(spec.index as usize).sum())
        }
        FamilyKind::S if spec.index == 0 => Ok(weights.iter().max().cloned().unwrap_or_else(Q::zero)),
        FamilyKind::S if spec.index == 1 => {
            // a set {a < ...} of at most a elements: a plus the heaviest a-1 after it
            let mut best = Q::zero();
            for (i, &a) in f.as_slice().iter().enumerate() {
                let mut rest: Vec<&Q> = weights[i + 1..].iter().collect();
                rest.sort_by(|x, y| y.cmp(x));
                let take = (a as usize).saturating_sub(1);
                let s: Q = &weights[i] + rest.into_iter().take(take).sum::<Q>();
                best = best.max(s);
            }
            Ok(best)
        }
        FamilyKind::S => {
            let mut memo = HashMap::new();
            Ok(best_from(0, spec.state(f.len()), f.as_slice(), weights, &mut memo))
        }
        FamilyKind::SM => {
            if f.len() > DEFAULT_EXHAUSTIVE_CAP {
                return Err(Error::LimitExceeded(format!(
                    "exhaustive S^M search is capped at {DEFAULT_EXHAUSTIVE_CAP} elements"
                )));
            }
            let mut oracle = ModifiedSchreier::new(f.clone());
            let mut best = Q::zero();
            for mask in 0..=oracle.full_mask() {
                if oracle.member_mask(mask, spec.index) {
                    let s: Q = (0..f.len()).filter(|i| mask >> i & 1 == 1).map(|i| &weights[i]).sum();
                    best = best.max(s);
                }
            }
            Ok(best)
        }
    }
}

fn best_from(i: usize, st: FamilyState, f: &[u64], w: &[Q], memo: &mut HashMap<(usize, FamilyState), Q>) -> Q {
    if i == f.len() || st.saturated() {
        return Q::zero();
    }
    if let Some(v) = memo.get(&(i, st.clone())) {
        return v.clone();
    }
    let mut best = best_from(i + 1, st.clone(), f, w, memo);
    if !w[i].is_zero() {
        if let Some(next) = st.push(f[i]) {
            let take = &w[i] + best_from(i + 1, next, f, w, memo);
            best = best.max(take);
        }
    }
    memo.insert((i, st), best.clone());
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn set(v: &[u64]) -> FiniteSet {
        FiniteSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn membership_examples() {
        assert!(family_member(&set(&[5]), &FamilySpec::s(0)));
        assert!(family_member(&set(&[]), &FamilySpec::s(0)));
        assert!(!family_member(&set(&[5, 6]), &FamilySpec::s(0)));
        assert!(family_member(&set(&[3, 4, 5]), &FamilySpec::s(1)));
        assert!(!family_member(&set(&[2, 3, 4]), &FamilySpec::s(1)));
        assert!(family_member(&set(&[2, 3, 4, 5, 6, 7]), &FamilySpec::s(2)));
        assert!(!family_member(&set(&[2, 3, 4, 5, 6, 7, 8]), &FamilySpec::s(2)));
        assert!(family_member(&set(&[1, 7]), &FamilySpec::a(2)));
        assert!(!family_member(&set(&[1, 7, 9]), &FamilySpec::a(2)));
        assert!(!family_member(&set(&[1, 2]), &FamilySpec::s(40)));
    }

    #[test]
    fn a_zero_rejected() {
        assert!(FamilySpec::new(FamilyKind::A, 0).is_err());
        assert!(FiniteSet::new(vec![3, 3]).is_err());
        assert!(FiniteSet::new(vec![0, 3]).is_err());
    }

    #[test]
    fn maximal_subsets() {
        let evens = (2..).map(|i| 2 * i);
        assert_eq!(maximal_family_subset(evens, &FamilySpec::s(1)).unwrap(), set(&[4, 6, 8, 10]));
        assert_eq!(maximal_family_subset(1.., &FamilySpec::s(0)).unwrap(), set(&[1]));
        let f = maximal_family_subset(4.., &FamilySpec::s(2)).unwrap();
        assert_eq!(f, FiniteSet::interval(4, 63));
        let blocks = greedy_blocks(&f, 2);
        assert_eq!(
            blocks,
            vec![
                FiniteSet::interval(4, 7),
                FiniteSet::interval(8, 15),
                FiniteSet::interval(16, 31),
                FiniteSet::interval(32, 63)
            ]
        );
        assert!(maximal_family_subset(std::iter::empty(), &FamilySpec::s(1)).is_err());
        assert!(maximal_family_subset(1.., &FamilySpec::sm(1)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        use AdmissibilityMode::*;
        let s1 = FamilySpec::s(1);
        assert!(is_admissible(&[set(&[3]), set(&[4, 5])], &s1, Admissible).unwrap());
        let inter = [set(&[4, 8]), set(&[5, 9]), set(&[6, 10])];
        assert!(is_admissible(&inter, &s1, Allowable).unwrap());
        assert!(!is_admissible(&inter, &s1, Admissible).unwrap());
        assert!(!is_admissible(&[set(&[2, 3]), set(&[3, 4])], &s1, Allowable).unwrap());
        assert!(is_admissible(&[set(&[]), set(&[3])], &s1, Allowable).is_err());
    }

    #[test]
    fn max_weight_examples() {
        let f = set(&[4, 5, 6, 7]);
        let w = vec![q(1, 4); 4];
        assert_eq!(max_weight_subfamily(&f, &w, &FamilySpec::s(0)).unwrap(), q(1, 4));
        assert_eq!(max_weight_subfamily(&f, &w, &FamilySpec::s(1)).unwrap(), q(1, 1));
        assert_eq!(max_weight_subfamily(&f, &w, &FamilySpec::a(3)).unwrap(), q(3, 4));
        assert_eq!(max_weight_subfamily(&f, &w, &FamilySpec::sm(1)).unwrap(), q(1, 1));
        assert!(max_weight_subfamily(&f, &[q(-1, 4), q(1, 4), q(1, 4), q(1, 4)], &FamilySpec::s(1)).is_err());
    }

    #[test]
    fn modified_matches_schreier_on_small_ground() {
        let ground = FiniteSet::interval(1, 9);
        let mut oracle = ModifiedSchreier::new(ground.clone());
        for mask in 0..=oracle.full_mask() {
            let f = FiniteSet::new((0..9).filter(|i| mask >> i & 1 == 1).map(|i| i as u64 + 1).collect()).unwrap();
            for n in 0..=2 {
                assert_eq!(oracle.member_mask(mask, n), family_member(&f, &FamilySpec::s(n)), "{f:?} n={n}");
            }
        }
    }
}
