//! A bounded piece of the `W_4` norming set over a small ground set.

use std::collections::HashMap;

use crate::error::{domain, Error, Result};
use crate::families::{AdmissibilityMode, FiniteSet};
use crate::functionals::{g_operation, OpKind, TreeFunctional};
use crate::parameters::{Rule, SpaceSpec};
use crate::vectors::FinVector;

/// Members reachable from the unit functionals on `{1, ..., ground}` in at
/// most `depth` rounds of: interval projections, even-level block operations
/// and G-operations. Members are stored by coefficient profile `|f|`.
#[derive(Debug, Clone)]
pub struct W4Fragment {
    pub ground: u64,
    rounds: Vec<HashMap<FinVector, TreeFunctional>>,
}

const MAX_MEMBERS: usize = 400_000;

impl W4Fragment {
    pub fn enumerate(spec: &SpaceSpec, ground: u64, depth: usize, max_level: usize) -> Result<Self> {
        if ground == 0 || ground > 16 {
            return domain("ground set size must lie in 1..=16");
        }
        let g_op = spec.has_rule(|r| matches!(r, Rule::GOperation));
        let mut ops = Vec::new();
        for j in 1..=max_level {
            for op in spec.ops_at(j)? {
                if op.mode == AdmissibilityMode::Admissible {
                    ops.push((j, spec.theta(j)?, op.family));
                }
            }
        }
        let masks = if g_op { g_sets(ground) } else { Vec::new() };
        let mut current: HashMap<FinVector, TreeFunctional> =
            (1..=ground).map(|i| (FinVector::unit(i), TreeFunctional::leaf(i))).collect();
        let mut rounds = vec![current.clone()];
        for _ in 0..depth {
            let items: Vec<(FinVector, TreeFunctional)> = sorted(&current);
            let mut next = current.clone();
            let add = |v: FinVector, t: TreeFunctional, next: &mut HashMap<FinVector, TreeFunctional>| -> Result<()> {
                if !v.is_zero() {
                    next.entry(v).or_insert(t);
                    if next.len() > MAX_MEMBERS {
                        return Err(Error::LimitExceeded("fragment exceeds its member cap".into()));
                    }
                }
                Ok(())
            };
            for (v, t) in &items {
                let (lo, hi) = v.range().expect("non-zero member");
                for a in lo..=hi {
                    for b in a..=hi {
                        if (a, b) != (lo, hi) {
                            add(v.project_interval(a, b), prune(t, a, b), &mut next)?;
                        }
                    }
                }
                for set in &masks {
                    add(g_operation(v, set)?, TreeFunctional::g_op(set.clone(), t.clone()), &mut next)?;
                }
            }
            for (j, theta, family) in &ops {
                let limit = match family.kind {
                    crate::families::FamilyKind::A => family.index as usize,
                    _ => items.len(),
                };
                let mut chain = Vec::new();
                combine(&items, 0, &mut chain, limit, &mut |chain: &[usize]| {
                    let mins =
                        FiniteSet::new(chain.iter().map(|&c| items[c].0.min_supp().expect("non-zero")).collect())
                            .expect("successive members");
                    if chain.len() >= 2 && crate::families::family_member(&mins, family) {
                        let mut v = FinVector::zero();
                        for &c in chain {
                            v = v.add(&items[c].0);
                        }
                        let kids = chain.iter().map(|&c| items[c].1.clone()).collect();
                        add(v.scale(theta), TreeFunctional::op(theta.clone(), *j, OpKind::Block, kids), &mut next)?;
                    }
                    Ok(())
                })?;
            }
            current = next;
            rounds.push(current.clone());
        }
        Ok(W4Fragment { ground, rounds })
    }

    pub fn depth(&self) -> usize {
        self.rounds.len() - 1
    }

    /// Members available after `round` rounds, in a fixed order.
    pub fn members(&self, round: usize) -> Vec<(FinVector, TreeFunctional)> {
        sorted(&self.rounds[round.min(self.depth())])
    }

    /// Membership of `f` (up to signs) after `round` rounds.
    pub fn contains(&self, f: &FinVector, round: usize) -> bool {
        self.rounds[round.min(self.depth())].contains_key(&f.abs())
    }
}

fn sorted(m: &HashMap<FinVector, TreeFunctional>) -> Vec<(FinVector, TreeFunctional)> {
    let mut v: Vec<(FinVector, TreeFunctional)> = m.iter().map(|(a, b)| (a.clone(), b.clone())).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

/// Successive chains of members, at most `limit` long.
fn combine(
    items: &[(FinVector, TreeFunctional)],
    from: usize,
    chain: &mut Vec<usize>,
    limit: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    visit(chain)?;
    if chain.len() == limit {
        return Ok(());
    }
    let after = chain.last().map(|&c| items[c].0.max_supp().expect("non-zero"));
    for k in from..items.len() {
        if after.is_some_and(|m| items[k].0.min_supp().expect("non-zero") <= m) {
            continue;
        }
        chain.push(k);
        combine(items, 0, chain, limit, visit)?;
        chain.pop();
    }
    Ok(())
}

/// Removes leaves outside `[a, b]` from a tree.
fn prune(t: &TreeFunctional, a: u64, b: u64) -> TreeFunctional {
    match t {
        TreeFunctional::Leaf(_) => t.clone(),
        TreeFunctional::Node(n) => {
            let mut n = n.clone();
            n.children = n
                .children
                .iter()
                .filter(|c| c.to_vector().iter().any(|(i, _)| a <= i && i <= b))
                .map(|c| prune(c, a, b))
                .collect();
            TreeFunctional::Node(n)
        }
    }
}

/// One Schreier set per distinct kept region inside the ground set.
fn g_sets(ground: u64) -> Vec<FiniteSet> {
    let top = ground + 1;
    let mut seen: HashMap<Vec<u64>, FiniteSet> = HashMap::new();
    let mut stack: Vec<Vec<u64>> = vec![vec![]];
    while let Some(s) = stack.pop() {
        if !s.is_empty() && s.len() % 2 == 0 && s.len() as u64 <= s[0] {
            let set = FiniteSet::new(s.clone()).expect("increasing");
            let keep: Vec<u64> = (1..=ground)
                .filter(|&i| crate::functionals::schreier_intervals(&set).iter().any(|&(a, b)| a <= i && i < b))
                .collect();
            if !keep.is_empty() {
                seen.entry(keep).or_insert(set);
            }
        }
        let start = s.last().map_or(1, |l| l + 1);
        for n in start..=top {
            let mut t = s.clone();
            t.push(n);
            stack.push(t);
        }
    }
    let mut out: Vec<(Vec<u64>, FiniteSet)> = seen.into_iter().collect();
    out.sort();
    out.into_iter().map(|(_, s)| s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{validate_w, WContext};
    use crate::parameters::ParameterSystem;

    #[test]
    fn small_fragment_is_closed_and_valid() {
        let spec = SpaceSpec::w4(ParameterSystem::toy());
        let frag = W4Fragment::enumerate(&spec, 5, 2, 2).unwrap();
        let ctx = WContext::new(&spec);
        for (v, t) in frag.members(1) {
            assert_eq!(t.to_vector().abs(), v);
            assert!(validate_w(&t, &ctx).valid, "{t:?}");
        }
        let set = FiniteSet::new(vec![2, 4]).unwrap();
        for (v, _) in frag.members(1).into_iter().take(50) {
            let g = g_operation(&v, &set).unwrap();
            assert!(g.is_zero() || frag.contains(&g, 2));
        }
    }
}
