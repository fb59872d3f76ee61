//! Exhaustive enumeration of tree functionals on a small support.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::engine::{collect_ops, floor_of, OpInfo};
use crate::error::{Error, Result};
use crate::families::{AdmissibilityMode, FamilyState};
use crate::parameters::SpaceSpec;
use crate::rational::Q;
use crate::vectors::FinVector;

pub const ORACLE_MAX_SUPPORT: usize = 8;
pub const ORACLE_MAX_DEPTH: usize = 4;
const MAX_COMBINATIONS: u64 = 20_000_000;

/// Non-negative functionals on the support positions, grouped by support
/// mask; only coordinatewise-maximal vectors are kept for each support.
#[derive(Default)]
struct Front(BTreeMap<u32, Vec<Vec<Q>>>);

impl Front {
    fn insert(&mut self, mask: u32, v: Vec<Q>) -> bool {
        let list = self.0.entry(mask).or_default();
        if list.iter().any(|u| u.iter().zip(&v).all(|(a, b)| a >= b)) {
            return false;
        }
        list.retain(|u| !u.iter().zip(&v).all(|(a, b)| a <= b));
        list.push(v);
        true
    }

    fn items(&self) -> Vec<(u32, Vec<Q>)> {
        let mut out: Vec<(u32, Vec<Q>)> =
            self.0.iter().flat_map(|(m, vs)| vs.iter().map(move |v| (*m, v.clone()))).collect();
        out.sort_by_key(|(m, _)| (m.trailing_zeros(), *m));
        out
    }
}

/// Maximum of `f(|x|)` over every functional built from at most `max_depth`
/// nested operations, found by enumerating all compliant sequences.
pub fn brute_force_norm_oracle(x: &FinVector, spec: &SpaceSpec, max_depth: usize) -> Result<Q> {
    if x.len() > ORACLE_MAX_SUPPORT {
        return Err(Error::LimitExceeded(format!("the oracle accepts at most {ORACLE_MAX_SUPPORT} support points")));
    }
    if max_depth > ORACLE_MAX_DEPTH {
        return Err(Error::LimitExceeded(format!("the oracle accepts depth at most {ORACLE_MAX_DEPTH}")));
    }
    if spec.has_dependent() {
        return Err(Error::UnsupportedRule("the oracle enumerates the operation fragment only".into()));
    }
    let idx: Vec<u64> = x.iter().map(|(i, _)| i).collect();
    let val: Vec<Q> = x.iter().map(|(_, v)| v.abs()).collect();
    let s = idx.len();
    if s == 0 {
        return Ok(Q::zero());
    }
    let ops = collect_ops(spec, &x.l1(), &floor_of(x), None)?;
    let mut front = Front::default();
    for p in 0..s {
        let mut v = vec![Q::zero(); s];
        v[p] = Q::from_integer(1.into());
        front.insert(1 << p, v);
    }
    let mut counter = 0u64;
    for _ in 0..max_depth {
        let items = front.items();
        let mut fresh = Vec::new();
        for op in &ops {
            let mut acc = vec![Q::zero(); s];
            extend(&items, op, &idx, 0, 0, None, op.family.state(s), 0, &mut acc, &mut fresh, &mut counter)?;
        }
        let mut changed = false;
        for (m, v) in fresh {
            changed |= front.insert(m, v);
        }
        if !changed {
            break;
        }
    }
    Ok(front
        .items()
        .iter()
        .map(|(_, f)| f.iter().zip(&val).map(|(a, b)| a * b).sum::<Q>())
        .max()
        .unwrap_or_else(Q::zero))
}

#[allow(clippy::too_many_arguments)]
fn extend(
    items: &[(u32, Vec<Q>)],
    op: &OpInfo,
    idx: &[u64],
    from: usize,
    used: u32,
    last_max: Option<u32>,
    st: FamilyState,
    count: usize,
    acc: &mut Vec<Q>,
    out: &mut Vec<(u32, Vec<Q>)>,
    counter: &mut u64,
) -> Result<()> {
    if count >= 2 {
        out.push((used, acc.iter().map(|a| a * &op.theta).collect()));
    }
    for (k, (mask, f)) in items.iter().enumerate().skip(from) {
        let min = mask.trailing_zeros();
        let fits = match op.mode {
            AdmissibilityMode::Allowable => used & mask == 0,
            AdmissibilityMode::Admissible => last_max.is_none_or(|m| min > m),
        };
        if !fits {
            continue;
        }
        let Some(next) = st.push(idx[min as usize]) else { continue };
        *counter += 1;
        if *counter > MAX_COMBINATIONS {
            return Err(Error::LimitExceeded("oracle combination budget exhausted".into()));
        }
        for (a, b) in acc.iter_mut().zip(f) {
            *a += b;
        }
        let top = 31 - mask.leading_zeros();
        extend(items, op, idx, k + 1, used | mask, Some(top), next, count + 1, acc, out, counter)?;
        for (a, b) in acc.iter_mut().zip(f) {
            *a -= b;
        }
    }
    Ok(())
}
