//! Memoized Bellman recursion for the implicit norm of the operation fragment.
//!
//! Values are computed on `|x|`. A level `j` contributes
//! `θ_j Σ_i v(E_i x)` over at least two pieces. Pieces start at some point of
//! the support and cover everything after it: a gap between two pieces can be
//! merged into the earlier one without changing any minimum, and norms are
//! monotone under projections.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::families::{AdmissibilityMode, FamilySpec, FamilyState};
use crate::functionals::{OpKind, Sign, TreeFunctional};
use crate::parameters::SpaceSpec;
use crate::rational::Q;
use crate::vectors::FinVector;

/// Hard cap on the support size for disjoint-set partition search.
pub const MAX_PARTITION_SUPPORT: usize = 10;
const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone)]
pub(crate) struct OpInfo {
    pub level: usize,
    pub theta: Q,
    pub family: FamilySpec,
    pub mode: AdmissibilityMode,
}

/// Operations that can matter for some restriction of a vector.
///
/// A level with `θ_j ‖x‖_1 <= min_i |x_i|` never beats a single coordinate on
/// any piece of `x`; for unbounded level lists the scan stops at the first such
/// level. Operations at `keep` are always included.
pub(crate) fn collect_ops(spec: &SpaceSpec, l1: &Q, floor: &Q, keep: Option<usize>) -> Result<Vec<OpInfo>> {
    let top = spec.max_level();
    let mut out = Vec::new();
    let mut j = 1;
    loop {
        if top.is_some_and(|t| j > t) {
            break;
        }
        let forced = keep == Some(j);
        if j > MAX_LEVELS && keep.is_none_or(|k| j > k) {
            return Err(Error::LimitExceeded(format!("more than {MAX_LEVELS} levels are relevant")));
        }
        let theta = spec.theta(j)?;
        let useful = &theta * l1 > *floor;
        if !useful && top.is_none() && keep.is_none_or(|k| j > k) {
            break;
        }
        if useful || forced {
            for op in spec.ops_at(j)? {
                out.push(OpInfo { level: j, theta: theta.clone(), family: op.family, mode: op.mode });
            }
        }
        j += 1;
    }
    Ok(out)
}

/// Smallest non-zero coordinate in absolute value.
pub(crate) fn floor_of(x: &FinVector) -> Q {
    x.iter().map(|(_, v)| v.abs()).min().unwrap_or_else(Q::zero)
}

pub(crate) struct Exhausted;
type R<T> = std::result::Result<T, Exhausted>;

#[derive(Debug, Clone)]
enum Choice<P> {
    Leaf(usize),
    Op(usize, Vec<P>),
}

pub(crate) struct Engine<'a> {
    idx: Vec<u64>,
    val: Vec<Q>,
    signs: Vec<Sign>,
    ops: &'a [OpInfo],
    steps: u64,
    budget: u64,
    prefix: Vec<Q>,
    iv: HashMap<(usize, usize), (Q, Choice<(usize, usize)>)>,
    ig: HashMap<(usize, usize, usize, FamilyState), Option<(Q, usize)>>,
    mv: HashMap<u32, (Q, Choice<u32>)>,
    mh: HashMap<(usize, u32, FamilyState), Option<(Q, u32)>>,
}

impl<'a> Engine<'a> {
    pub fn new(x: &FinVector, ops: &'a [OpInfo], budget: u64) -> Self {
        let idx: Vec<u64> = x.iter().map(|(i, _)| i).collect();
        let val: Vec<Q> = x.iter().map(|(_, v)| v.abs()).collect();
        let signs = x.iter().map(|(_, v)| Sign::of(v)).collect();
        let mut prefix = vec![Q::zero()];
        for v in &val {
            let next = prefix.last().expect("non-empty") + v;
            prefix.push(next);
        }
        Engine {
            idx,
            val,
            signs,
            ops,
            steps: 0,
            budget,
            prefix,
            iv: HashMap::new(),
            ig: HashMap::new(),
            mv: HashMap::new(),
            mh: HashMap::new(),
        }
    }

    pub fn uses_partitions(&self) -> bool {
        self.ops.iter().any(|o| o.mode == AdmissibilityMode::Allowable)
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Exhausted)
        } else {
            Ok(())
        }
    }

    fn leaf_best(&self, positions: impl Iterator<Item = usize>) -> (Q, usize) {
        let mut best: Option<(Q, usize)> = None;
        for p in positions {
            if best.as_ref().is_none_or(|(b, _)| self.val[p] > *b) {
                best = Some((self.val[p].clone(), p));
            }
        }
        best.expect("non-empty piece")
    }

    fn state(&self, op: usize) -> FamilyState {
        self.ops[op].family.state(self.idx.len())
    }

    // ---- successive pieces over runs of positions ----

    fn run_value(&mut self, a: usize, b: usize) -> R<Q> {
        if let Some((v, _)) = self.iv.get(&(a, b)) {
            return Ok(v.clone());
        }
        let (mut best, p) = self.leaf_best(a..=b);
        let mut choice = Choice::Leaf(p);
        if a < b {
            for op in 0..self.ops.len() {
                if let Some((v, pieces)) = self.run_op(op, a, b)? {
                    if v > best {
                        best = v;
                        choice = Choice::Op(op, pieces);
                    }
                }
            }
        }
        self.iv.insert((a, b), (best.clone(), choice));
        Ok(best)
    }

    fn run_op(&mut self, op: usize, a: usize, b: usize) -> R<Option<(Q, Vec<(usize, usize)>)>> {
        let l1 = &self.prefix[b + 1] - &self.prefix[a];
        let linf = self.leaf_best(a..=b).0;
        if &self.ops[op].theta * &l1 <= linf {
            return Ok(None);
        }
        self.run_op_unpruned(op, a, b)
    }

    fn run_op_unpruned(&mut self, op: usize, a: usize, b: usize) -> R<Option<(Q, Vec<(usize, usize)>)>> {
        let theta = self.ops[op].theta.clone();
        let init = self.state(op);
        let mut best: Option<(Q, usize, usize, FamilyState)> = None;
        for s in a..b {
            let Some(st) = init.push(self.idx[s]) else { continue };
            for e in s..b {
                self.tick()?;
                let Some((rest, _)) = self.run_tail(op, b, e + 1, st.clone())? else { continue };
                let total = self.run_value(s, e)? + rest;
                if best.as_ref().is_none_or(|(v, ..)| total > *v) {
                    best = Some((total, s, e, st.clone()));
                }
            }
        }
        let Some((sum, s, e, st)) = best else { return Ok(None) };
        let mut pieces = vec![(s, e)];
        let (mut pos, mut st) = (e + 1, st);
        while pos <= b {
            let (_, end) = self.ig[&(op, b, pos, st.clone())].clone().expect("feasible tail");
            st = st.push(self.idx[pos]).expect("feasible push");
            pieces.push((pos, end));
            pos = end + 1;
        }
        Ok(Some((theta * sum, pieces)))
    }

    /// Best sum over runs covering `[pos, b]`, each run's minimum pushed into `st`.
    fn run_tail(&mut self, op: usize, b: usize, pos: usize, st: FamilyState) -> R<Option<(Q, usize)>> {
        let key = (op, b, pos, st);
        if let Some(v) = self.ig.get(&key) {
            return Ok(v.clone());
        }
        let mut best: Option<(Q, usize)> = None;
        if let Some(next) = key.3.push(self.idx[pos]) {
            for e in pos..=b {
                self.tick()?;
                let rest =
                    if e == b { Some(Q::zero()) } else { self.run_tail(op, b, e + 1, next.clone())?.map(|(v, _)| v) };
                if let Some(rest) = rest {
                    let total = self.run_value(pos, e)? + rest;
                    if best.as_ref().is_none_or(|(v, _)| total > *v) {
                        best = Some((total, e));
                    }
                }
            }
        }
        self.ig.insert(key, best.clone());
        Ok(best)
    }

    // ---- disjoint pieces over subsets of positions ----

    fn mask_positions(mask: u32) -> impl Iterator<Item = usize> {
        (0..32).filter(move |p| mask >> p & 1 == 1)
    }

    fn mask_l1(&self, mask: u32) -> Q {
        Self::mask_positions(mask).map(|p| &self.val[p]).sum()
    }

    /// Candidate first blocks of `rem`: they contain its lowest position.
    fn blocks(rem: u32, mode: AdmissibilityMode) -> Vec<u32> {
        let low = rem & rem.wrapping_neg();
        match mode {
            AdmissibilityMode::Admissible => {
                let mut out = Vec::new();
                let mut acc = 0;
                for p in Self::mask_positions(rem) {
                    acc |= 1 << p;
                    out.push(acc);
                }
                out
            }
            AdmissibilityMode::Allowable => {
                let rest = rem & !low;
                let mut out = Vec::new();
                let mut sub = rest;
                loop {
                    out.push(sub | low);
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
                out
            }
        }
    }

    fn mask_value(&mut self, mask: u32) -> R<Q> {
        if let Some((v, _)) = self.mv.get(&mask) {
            return Ok(v.clone());
        }
        let (mut best, p) = self.leaf_best(Self::mask_positions(mask));
        let mut choice = Choice::Leaf(p);
        if mask.count_ones() >= 2 {
            for op in 0..self.ops.len() {
                if let Some((v, pieces)) = self.mask_op(op, mask)? {
                    if v > best {
                        best = v;
                        choice = Choice::Op(op, pieces);
                    }
                }
            }
        }
        self.mv.insert(mask, (best.clone(), choice));
        Ok(best)
    }

    fn mask_op(&mut self, op: usize, mask: u32) -> R<Option<(Q, Vec<u32>)>> {
        let linf = self.leaf_best(Self::mask_positions(mask)).0;
        if &self.ops[op].theta * self.mask_l1(mask) <= linf {
            return Ok(None);
        }
        self.mask_op_unpruned(op, mask)
    }

    fn mask_op_unpruned(&mut self, op: usize, mask: u32) -> R<Option<(Q, Vec<u32>)>> {
        let theta = self.ops[op].theta.clone();
        let mode = self.ops[op].mode;
        let init = self.state(op);
        let mut best: Option<(Q, u32, u32, FamilyState)> = None;
        for s in Self::mask_positions(mask).collect::<Vec<_>>() {
            let suffix = mask & !((1u32 << s) - 1);
            if suffix.count_ones() < 2 {
                break;
            }
            let Some(st) = init.push(self.idx[s]) else { continue };
            for first in Self::blocks(suffix, mode) {
                if first == suffix {
                    continue;
                }
                self.tick()?;
                let Some((rest, _)) = self.mask_tail(op, suffix & !first, st.clone())? else { continue };
                let total = self.mask_value(first)? + rest;
                if best.as_ref().is_none_or(|(v, ..)| total > *v) {
                    best = Some((total, first, suffix & !first, st.clone()));
                }
            }
        }
        let Some((sum, first, mut rem, mut st)) = best else { return Ok(None) };
        let mut pieces = vec![first];
        while rem != 0 {
            let (_, block) = self.mh[&(op, rem, st.clone())].clone().expect("feasible tail");
            let low = rem.trailing_zeros() as usize;
            st = st.push(self.idx[low]).expect("feasible push");
            pieces.push(block);
            rem &= !block;
        }
        Ok(Some((theta * sum, pieces)))
    }

    fn mask_tail(&mut self, op: usize, rem: u32, st: FamilyState) -> R<Option<(Q, u32)>> {
        if rem == 0 {
            return Ok(Some((Q::zero(), 0)));
        }
        let key = (op, rem, st);
        if let Some(v) = self.mh.get(&key) {
            return Ok(v.clone());
        }
        let mut best: Option<(Q, u32)> = None;
        let low = rem.trailing_zeros() as usize;
        if let Some(next) = key.2.push(self.idx[low]) {
            for block in Self::blocks(rem, self.ops[op].mode) {
                self.tick()?;
                if let Some((rest, _)) = self.mask_tail(op, rem & !block, next.clone())? {
                    let total = self.mask_value(block)? + rest;
                    if best.as_ref().is_none_or(|(v, _)| total > *v) {
                        best = Some((total, block));
                    }
                }
            }
        }
        self.mh.insert(key, best.clone());
        Ok(best)
    }

    // ---- public surface ----

    /// `‖x‖` of the fragment, optionally with the root restricted to operations
    /// accepted by `root_filter`. Returns the value and its witness.
    pub fn solve(&mut self, root_filter: Option<&dyn Fn(&OpInfo) -> bool>) -> R<(Q, TreeFunctional)> {
        let n = self.len();
        let partitions = self.uses_partitions();
        let full_mask = if partitions { (1u32 << n) - 1 } else { 0 };
        let (mut best, p) = self.leaf_best(0..n);
        let mut root: Option<(usize, Vec<Piece>)> = None;
        if n >= 2 {
            for op in 0..self.ops.len() {
                if root_filter.is_some_and(|f| !f(&self.ops[op])) {
                    continue;
                }
                let found = if partitions {
                    self.mask_op(op, full_mask)?.map(|(v, ps)| (v, ps.into_iter().map(Piece::Set).collect()))
                } else {
                    self.run_op(op, 0, n - 1)?
                        .map(|(v, ps)| (v, ps.into_iter().map(|(a, b)| Piece::Run(a, b)).collect()))
                };
                if let Some((v, pieces)) = found {
                    if v > best {
                        best = v;
                        root = Some((op, pieces));
                    }
                }
            }
        }
        let witness = match root {
            None => self.leaf(p),
            Some((op, pieces)) => self.node(op, &pieces),
        };
        Ok((best, witness))
    }

    /// Best functional with at least two pieces whose root is an operation at `level`.
    pub fn best_at_level(&mut self, level: usize) -> R<Option<(Q, TreeFunctional)>> {
        let n = self.len();
        if n < 2 {
            return Ok(None);
        }
        let partitions = self.uses_partitions();
        let mut best: Option<(Q, usize, Vec<Piece>)> = None;
        for op in 0..self.ops.len() {
            if self.ops[op].level != level {
                continue;
            }
            let found = if partitions {
                self.mask_op_unpruned(op, (1u32 << n) - 1)?.map(|(v, ps)| (v, ps.into_iter().map(Piece::Set).collect()))
            } else {
                self.run_op_unpruned(op, 0, n - 1)?
                    .map(|(v, ps)| (v, ps.into_iter().map(|(a, b)| Piece::Run(a, b)).collect()))
            };
            if let Some((v, pieces)) = found {
                if best.as_ref().is_none_or(|(b, ..)| v > *b) {
                    best = Some((v, op, pieces));
                }
            }
        }
        Ok(best.map(|(v, op, pieces)| (v, self.node(op, &pieces))))
    }

    fn leaf(&self, p: usize) -> TreeFunctional {
        TreeFunctional::signed_leaf(self.idx[p], self.signs[p])
    }

    fn node(&self, op: usize, pieces: &[Piece]) -> TreeFunctional {
        let info = &self.ops[op];
        let kind = match info.mode {
            AdmissibilityMode::Admissible => OpKind::Block,
            AdmissibilityMode::Allowable => OpKind::Allowable,
        };
        let children = pieces.iter().map(|p| self.piece_witness(p)).collect();
        TreeFunctional::op(info.theta.clone(), info.level, kind, children)
    }

    fn piece_witness(&self, piece: &Piece) -> TreeFunctional {
        let choice = match piece {
            Piece::Run(a, b) => match &self.iv[&(*a, *b)].1 {
                Choice::Leaf(p) => return self.leaf(*p),
                Choice::Op(op, ps) => (*op, ps.iter().map(|&(a, b)| Piece::Run(a, b)).collect::<Vec<_>>()),
            },
            Piece::Set(m) => match &self.mv[m].1 {
                Choice::Leaf(p) => return self.leaf(*p),
                Choice::Op(op, ps) => (*op, ps.iter().map(|&m| Piece::Set(m)).collect()),
            },
        };
        self.node(choice.0, &choice.1)
    }
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    Run(usize, usize),
    Set(u32),
}
