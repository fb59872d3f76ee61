//! The coding function σ and the `W_4` history coder.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{domain, Error, Result};
use crate::parameters::ParameterSystem;
use crate::vectors::FinVector;

/// A closed interval `[a, b]` of positive integers, encoded as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval(pub u64, pub u64);

impl Interval {
    pub fn contains(&self, i: u64) -> bool {
        self.0 <= i && i <= self.1
    }
}

/// Non-empty, well-formed and successive.
pub fn check_successive(seq: &[Interval]) -> Result<()> {
    if seq.is_empty() {
        return domain("interval sequence must be non-empty");
    }
    for e in seq {
        if e.0 == 0 || e.0 > e.1 {
            return domain(format!("[{}, {}] is not an interval of positive integers", e.0, e.1));
        }
    }
    if seq.windows(2).any(|w| w[0].1 >= w[1].0) {
        return domain("intervals must be successive");
    }
    Ok(())
}

/// Sequences of successive intervals in canonical order: by the largest
/// endpoint, then by length, then lexicographically by endpoints.
pub fn canonical_sequences(limit: usize) -> Vec<Vec<Interval>> {
    let mut out: Vec<Vec<Interval>> = Vec::with_capacity(limit);
    // within[n] = every sequence (empty included) inside [1, n]
    let mut within: Vec<Vec<Vec<Interval>>> = vec![vec![vec![]]];
    let mut top = 1u64;
    while out.len() < limit {
        let mut ending: Vec<Vec<Interval>> = Vec::new();
        for a in 1..=top {
            for prefix in &within[(a - 1) as usize] {
                let mut s = prefix.clone();
                s.push(Interval(a, top));
                ending.push(s);
            }
        }
        ending.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        let mut next = within[(top - 1) as usize].clone();
        next.extend(ending.iter().cloned());
        within.push(next);
        out.extend(ending.into_iter().take(limit - out.len()));
        top += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingEntry {
    pub seq: Vec<Interval>,
    pub t: u64,
}

/// Serialized form of a coding function, entries in assignment order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingTable {
    pub params: ParameterSystem,
    pub entries: Vec<CodingEntry>,
}

/// Elements of `L_2` in increasing order, extended on demand.
#[derive(Debug, Clone, Default)]
struct L2List(Vec<u64>);

impl L2List {
    fn nth(&mut self, params: &ParameterSystem, k: usize) -> u64 {
        let mut j = self.0.last().copied().unwrap_or(0);
        while self.0.len() <= k {
            j += 1;
            if params.in_l2(j) {
                self.0.push(j);
            }
        }
        self.0[k]
    }

    fn ordinal(&mut self, params: &ParameterSystem, j: u64) -> Option<usize> {
        let mut k = 0;
        while self.nth(params, k) < j {
            k += 1;
        }
        (self.0[k] == j).then_some(k)
    }
}

/// `σ`: injective, values in `2L_2`, memoized least-unused assignment.
#[derive(Debug, Clone)]
pub struct CodingFunction {
    params: ParameterSystem,
    entries: Vec<CodingEntry>,
    index: HashMap<Vec<Interval>, u64>,
    used: HashMap<u64, Vec<Interval>>,
    // next-free pointers over ordinals of 2L_2
    next: HashMap<usize, usize>,
    start: HashMap<BigUint, usize>,
    l2: L2List,
}

impl CodingFunction {
    pub fn new(params: ParameterSystem) -> Self {
        CodingFunction {
            params,
            entries: Vec::new(),
            index: HashMap::new(),
            used: HashMap::new(),
            next: HashMap::new(),
            start: HashMap::new(),
            l2: L2List::default(),
        }
    }

    pub fn params(&self) -> &ParameterSystem {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `ρ(max E_n) + max E_n`.
    pub fn required_n(&self, seq: &[Interval]) -> Result<BigUint> {
        let top = seq.last().ok_or_else(|| Error::Domain("empty interval sequence".into()))?.1;
        Ok(self.params.rho(top)?.0 + BigUint::from(top))
    }

    fn candidate(&mut self, k: usize) -> u64 {
        2 * self.l2.nth(&self.params, k)
    }

    fn first_ordinal(&mut self, bound: &BigUint) -> Result<usize> {
        if let Some(&k) = self.start.get(bound) {
            return Ok(k);
        }
        let mut k = 0;
        loop {
            let t = self.candidate(k);
            if self.params.n(t as usize)? >= *bound {
                break;
            }
            k += 1;
        }
        self.start.insert(bound.clone(), k);
        Ok(k)
    }

    fn find_free(&mut self, k: usize) -> usize {
        let mut root = k;
        while let Some(&nx) = self.next.get(&root) {
            root = nx;
        }
        let mut cur = k;
        while cur != root {
            let nx = self.next[&cur];
            self.next.insert(cur, root);
            cur = nx;
        }
        root
    }

    /// `σ(E_1, ..., E_n)`, assigning a fresh value on first use.
    pub fn sigma(&mut self, seq: &[Interval]) -> Result<u64> {
        check_successive(seq)?;
        if let Some(&t) = self.index.get(seq) {
            return Ok(t);
        }
        let bound = self.required_n(seq)?;
        let k0 = self.first_ordinal(&bound)?;
        let k = self.find_free(k0);
        let t = self.candidate(k);
        self.next.insert(k, k + 1);
        self.record(seq.to_vec(), t);
        Ok(t)
    }

    fn record(&mut self, seq: Vec<Interval>, t: u64) {
        self.index.insert(seq.clone(), t);
        self.used.insert(t, seq.clone());
        self.entries.push(CodingEntry { seq, t });
    }

    /// Frozen lookup; never assigns.
    pub fn lookup(&self, seq: &[Interval]) -> Option<u64> {
        self.index.get(seq).copied()
    }

    pub fn entries(&self) -> &[CodingEntry] {
        &self.entries
    }

    pub fn export(&self) -> CodingTable {
        CodingTable { params: self.params.clone(), entries: self.entries.clone() }
    }

    /// Rebuilds a coding function, checking injectivity, the range `2L_2`
    /// and the growth condition on every entry.
    pub fn import(table: &CodingTable) -> Result<Self> {
        let mut cf = CodingFunction::new(table.params.clone());
        for e in &table.entries {
            check_successive(&e.seq)?;
            if cf.index.contains_key(&e.seq) {
                return domain("sequence listed twice in the coding table");
            }
            if cf.used.contains_key(&e.t) {
                return domain(format!("value {} assigned twice in the coding table", e.t));
            }
            if e.t % 2 != 0 {
                return domain(format!("value {} is odd", e.t));
            }
            let k = cf
                .l2
                .ordinal(&cf.params, e.t / 2)
                .ok_or_else(|| Error::Domain(format!("value {} is not in 2L_2", e.t)))?;
            if cf.params.n(e.t as usize)? < cf.required_n(&e.seq)? {
                return domain(format!("value {} violates the growth condition", e.t));
            }
            cf.next.insert(k, k + 1);
            cf.record(e.seq.clone(), e.t);
        }
        Ok(cf)
    }

    /// Hex SHA-256 of the canonical JSON export.
    pub fn table_hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.export()).expect("table serializes");
        format!("{:x}", Sha256::digest(bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub history: Vec<FinVector>,
    pub t: usize,
}

/// Assigns weight indices to histories `(|f_1|, ..., |f_{i-1}|)` so that the
/// history can be read back from the weight.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryCoder {
    entries: Vec<HistoryEntry>,
    #[serde(skip)]
    index: HashMap<Vec<FinVector>, usize>,
    #[serde(skip)]
    used: BTreeSet<usize>,
}

impl HistoryCoder {
    pub fn new() -> Self {
        Self::default()
    }

    fn profile(history: &[FinVector]) -> Vec<FinVector> {
        history.iter().map(FinVector::abs).collect()
    }

    /// The least unused `t` with `t/2 ∈ L_2` and `m_t > min_m`.
    pub fn assign(&mut self, params: &ParameterSystem, history: &[FinVector], min_m: &BigUint) -> Result<usize> {
        let key = Self::profile(history);
        if let Some(&t) = self.index.get(&key) {
            return Ok(t);
        }
        let mut t = 2;
        loop {
            if params.in_l2(t as u64 / 2) && !self.used.contains(&t) && params.m(t)? > *min_m {
                break;
            }
            t += 2;
        }
        self.index.insert(key.clone(), t);
        self.used.insert(t);
        self.entries.push(HistoryEntry { history: key, t });
        Ok(t)
    }

    pub fn lookup(&self, history: &[FinVector]) -> Option<usize> {
        self.index.get(&Self::profile(history)).copied()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    /// Rebuilds the lookup maps; duplicated weights are rejected.
    pub fn from_entries(entries: Vec<HistoryEntry>) -> Result<Self> {
        let mut hc = HistoryCoder::new();
        for e in entries {
            let key = Self::profile(&e.history);
            if hc.index.contains_key(&key) || !hc.used.insert(e.t) {
                return domain("history coder entries must be injective");
            }
            hc.index.insert(key.clone(), e.t);
            hc.entries.push(HistoryEntry { history: key, t: e.t });
        }
        Ok(hc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_sigma() {
        let mut cf = CodingFunction::new(ParameterSystem::toy());
        let a = cf.sigma(&[Interval(1, 2)]).unwrap();
        // ρ(2) = n_2 = 2 in the toy system, so n_t >= 4
        assert_eq!(a, 4);
        assert_eq!(cf.sigma(&[Interval(1, 2)]).unwrap(), 4);
        let b = cf.sigma(&[Interval(1, 1), Interval(2, 2)]).unwrap();
        assert_eq!(b, 8);
        assert!(cf.sigma(&[Interval(1, 3), Interval(3, 4)]).is_err());
        assert!(cf.sigma(&[]).is_err());
        assert_eq!(cf.lookup(&[Interval(1, 2)]), Some(4));
        assert_eq!(cf.lookup(&[Interval(5, 6)]), None);
    }

    #[test]
    fn canonical_order() {
        let s = canonical_sequences(6);
        assert_eq!(s[0], vec![Interval(1, 1)]);
        assert_eq!(s[1], vec![Interval(1, 2)]);
        assert_eq!(s[2], vec![Interval(2, 2)]);
        assert_eq!(s[3], vec![Interval(1, 1), Interval(2, 2)]);
        assert_eq!(s[4], vec![Interval(1, 3)]);
        assert_eq!(canonical_sequences(500).len(), 500);
    }

    #[test]
    fn export_import_round_trip() {
        let mut cf = CodingFunction::new(ParameterSystem::toy());
        for s in canonical_sequences(200) {
            cf.sigma(&s).unwrap();
        }
        let table = cf.export();
        let json = serde_json::to_string(&table).unwrap();
        let back = CodingFunction::import(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.export(), table);
        assert_eq!(back.table_hash(), cf.table_hash());
        let mut cont_a = cf.clone();
        let mut cont_b = back;
        for s in canonical_sequences(300).into_iter().skip(200) {
            assert_eq!(cont_a.sigma(&s).unwrap(), cont_b.sigma(&s).unwrap());
        }
        let mut bad = table.clone();
        bad.entries[1].t = bad.entries[0].t;
        assert!(CodingFunction::import(&bad).is_err());
    }

    #[test]
    fn history_coder_is_injective() {
        let p = ParameterSystem::toy();
        let mut hc = HistoryCoder::new();
        let h1 = vec![FinVector::unit(3)];
        let h2 = vec![FinVector::unit(4)];
        let a = hc.assign(&p, &h1, &BigUint::from(8u32)).unwrap();
        let b = hc.assign(&p, &h2, &BigUint::from(8u32)).unwrap();
        assert_ne!(a, b);
        assert_eq!(hc.assign(&p, &h1, &BigUint::from(8u32)).unwrap(), a);
        assert_eq!(a % 4, 0);
        assert!(p.m(a).unwrap() > BigUint::from(8u32));
        let neg = vec![FinVector::unit(3).scale(&crate::rational::q(-1, 1))];
        assert_eq!(hc.lookup(&neg), Some(a));
    }
}
