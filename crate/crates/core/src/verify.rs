//! Seeded property suites behind the `verify` subcommand.

use std::collections::{BTreeMap, HashSet};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{build_dependent_pair, build_tight_witness, revalidate, BuildOptions, ConstructionTrace};
use crate::error::{Error, Result};
use crate::families::{
    family_member, is_admissible, max_weight_subfamily, AdmissibilityMode, FamilyKind, FamilySpec, FiniteSet,
};
use crate::functionals::{
    admi_check, canonical_sequences, g_operation, validate_w, Clause, CodingFunction, Interval, OpKind, TreeFunctional,
    WContext,
};
use crate::norm::{brute_force_norm_oracle, check_standard_inequality, norm_value, W4Fragment};
use crate::parameters::{ParameterSystem, SpaceSpec};
use crate::rational::{q, Q};
use crate::report::Verdict;
use crate::vectors::{check_basic_scc, repeated_average, FinVector, IncreasingSeq};

pub const DEFAULT_SEED: u64 = 20_241_017;

pub const SUITES: [&str; 9] =
    ["schreier-eq", "norm-axioms", "oracle-eq", "scc", "sigma", "dependent", "admi", "w4", "tight"];

/// Counts plus the first few counterexamples of a suite run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub passed: bool,
}

const MAX_REPORTED: usize = 5;

struct Tally {
    counts: BTreeMap<String, u64>,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Tally { counts: BTreeMap::new(), failures: Vec::new(), failed: 0 }
    }

    fn bump(&mut self, key: &str) {
        *self.counts.entry(key.to_string()).or_default() += 1;
    }

    fn fail(&mut self, key: &str, case: String) {
        self.bump(key);
        self.failed += 1;
        if self.failures.len() < MAX_REPORTED {
            self.failures.push(case);
        }
    }

    fn check(&mut self, ok: bool, key: &str, case: impl FnOnce() -> String) {
        if !ok {
            self.fail(key, case());
        }
    }

    fn finish(mut self, suite: &str, seed: u64, keys: &[&str]) -> Summary {
        for k in keys {
            self.counts.entry(k.to_string()).or_default();
        }
        Summary { suite: suite.into(), seed, counts: self.counts, failures: self.failures, passed: self.failed == 0 }
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<Summary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        "schreier-eq" => schreier_eq(seed),
        "norm-axioms" => norm_axioms(&mut rng, seed),
        "oracle-eq" => oracle_eq(&mut rng, seed),
        "scc" => scc_suite(&mut rng, seed),
        "sigma" => sigma_suite(seed),
        "dependent" => dependent_suite(seed),
        "admi" => admi_suite(&mut rng, seed),
        "w4" => w4_suite(&mut rng, seed),
        "tight" => tight_suite(&mut rng, seed),
        other => Err(Error::NotFound(format!("unknown suite {other:?}"))),
    }
}

fn random_q(rng: &mut ChaCha8Rng, signed: bool) -> Q {
    let p: i64 = rng.gen_range(1..=4);
    let d: i64 = rng.gen_range(1..=3);
    let sign = if signed && rng.gen_bool(0.5) { -1 } else { 1 };
    q(sign * p, d)
}

/// Random vector with `1..=max_len` coordinates in `1..=top`.
pub fn random_vector(rng: &mut ChaCha8Rng, max_len: usize, top: u64, signed: bool) -> FinVector {
    let len = rng.gen_range(1..=max_len);
    let mut idx: Vec<u64> = (1..=top).collect();
    idx.shuffle(rng);
    FinVector::from_pairs(idx[..len].iter().map(|&i| (i, random_q(rng, signed))))
}

fn schreier_eq(seed: u64) -> Result<Summary> {
    let mut t = Tally::new();
    for mask in 0u32..1 << 12 {
        let f = FiniteSet::new((1..=12).filter(|i| mask >> (i - 1) & 1 == 1).collect())?;
        for n in [1, 2] {
            t.bump("checked");
            let a = family_member(&f, &FamilySpec::s(n));
            let b = family_member(&f, &FamilySpec::sm(n));
            t.check(a == b, "mismatches", || format!("F = {:?}, n = {n}: S {a}, S^M {b}", f.as_slice()));
        }
    }
    Ok(t.finish("schreier-eq", seed, &["mismatches"]))
}

fn toy_specs() -> Vec<(&'static str, SpaceSpec)> {
    vec![
        ("T[(S_1,1/2)]", SpaceSpec::tsirelson_toy()),
        ("T[(A_3,1/2)]", SpaceSpec::a3_toy()),
        ("T[(A_3,1/2),(A_9,1/8)]", SpaceSpec::a3_a9_toy()),
    ]
}

fn norm_axioms(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let specs = toy_specs();
    let mut t = Tally::new();
    for s in 0..1000 {
        let (name, spec) = &specs[s % specs.len()];
        let x = random_vector(rng, 6, 12, true);
        let y = random_vector(rng, 6, 12, true);
        let c = random_q(rng, true);
        t.bump("samples");
        let nx = norm_value(&x, spec)?;
        let ny = norm_value(&y, spec)?;
        let nxy = norm_value(&x.add(&y), spec)?;
        let case = |what: &str| format!("{what} on {name}: x = {}", serde_json::to_string(&x).unwrap_or_default());
        t.check(nxy <= &nx + &ny, "violations", || case("triangle"));
        t.check(norm_value(&x.scale(&c), spec)? == c.abs() * &nx, "violations", || case("homogeneity"));
        let flips: Vec<u64> = x.support().iter().filter(|_| rng.gen_bool(0.5)).collect();
        let flipped =
            FinVector::from_pairs(x.iter().map(|(i, v)| (i, if flips.contains(&i) { -v.clone() } else { v.clone() })));
        t.check(norm_value(&flipped, spec)? == nx, "violations", || case("sign change"));
        let sub = FiniteSet::new(x.support().iter().filter(|_| rng.gen_bool(0.5)).collect())?;
        t.check(norm_value(&x.project(&sub), spec)? <= nx, "violations", || case("projection"));
        t.check(x.linf() <= nx && nx <= x.l1(), "violations", || case("l_inf <= norm <= l_1"));
    }
    // θ_j Σ ‖E_i x‖ <= ‖x‖ on admissible segmentations
    let eq_specs = [(SpaceSpec::tsirelson_toy(), 1), (SpaceSpec::a3_toy(), 1), (SpaceSpec::a3_a9_toy(), 2)];
    let mut pairs = 0;
    while pairs < 200 {
        let (spec, j) = &eq_specs[pairs % eq_specs.len()];
        let x = random_vector(rng, 7, 14, true);
        let support = x.support();
        let pts = support.as_slice();
        let pieces = rng.gen_range(1..=pts.len());
        let mut cuts: Vec<usize> = (1..pts.len()).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(pieces - 1).collect();
        cuts.sort_unstable();
        let mut segments = Vec::new();
        let mut start = 0;
        for c in cuts.into_iter().chain([pts.len()]) {
            segments.push(FiniteSet::new(pts[start..c].to_vec())?);
            start = c;
        }
        let family = spec.ops_at(*j)?[0].family;
        if !is_admissible(&segments, &family, AdmissibilityMode::Admissible)? {
            continue;
        }
        pairs += 1;
        t.bump("segmentations");
        let r = check_standard_inequality(&x, spec, *j, &segments)?;
        t.check(r.passed(), "violations", || format!("standard inequality at j = {j}: {r:?}"));
    }
    Ok(t.finish("norm-axioms", seed, &["violations"]))
}

fn oracle_eq(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let specs = [SpaceSpec::tsirelson_toy(), SpaceSpec::a3_toy()];
    let mut t = Tally::new();
    for s in 0..500 {
        let spec = &specs[s % 2];
        let x = random_vector(rng, 5, 10, true);
        t.bump("samples");
        let dp = norm_value(&x, spec)?;
        let oracle = brute_force_norm_oracle(&x, spec, 4)?;
        t.check(dp == oracle, "mismatches", || {
            format!("x = {}: dp {dp}, oracle {oracle}", serde_json::to_string(&x).unwrap_or_default())
        });
    }
    Ok(t.finish("oracle-eq", seed, &["mismatches"]))
}

/// Exhaustive `max Σ_{i∈G} w_i` over subsets `G` of the carrier in the family.
fn exhaustive_mass(x: &FinVector, family: &FamilySpec) -> Result<Q> {
    let pts: Vec<(u64, Q)> = x.iter().map(|(i, v)| (i, v.clone())).collect();
    let mut best = Q::zero();
    for mask in 0u32..1 << pts.len() {
        let g = FiniteSet::new(pts.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, p)| p.0).collect())?;
        if family_member(&g, family) {
            let s: Q = pts.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, p)| &p.1).sum();
            best = best.max(s);
        }
    }
    Ok(best)
}

fn scc_suite(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let mut t = Tally::new();
    let cases = (0..=1u64).flat_map(|n| (2..=12u64).map(move |s| (n, s))).chain((2..=5).map(|s| (2, s)));
    for (n, start) in cases {
        let avg = repeated_average(&IncreasingSeq::from(start), n)?;
        t.bump("averages");
        let eps = if start >= 4 { q(3, start as i64) } else { Q::from_integer(1.into()) };
        let c = check_basic_scc(&avg, n, &eps)?;
        t.check(c.passed, "violations", || format!("repeated average n = {n} from {start}: {:?}", c.violations));
        if avg.len() <= 10 && n > 0 {
            t.bump("exhaustive");
            let e = exhaustive_mass(&avg, &FamilySpec::s(n - 1))?;
            t.check(e == c.certificate.smallness, "mismatches", || format!("n = {n} from {start}: {e}"));
        }
    }
    // random carriers
    for _ in 0..200 {
        let n = rng.gen_range(1..=2u64);
        let x = random_vector(rng, 10, 16, false);
        let x = x.scale(&x.sum().recip());
        t.bump("exhaustive");
        let c = check_basic_scc(&x, n, &q(1, 2))?;
        let e = exhaustive_mass(&x, &FamilySpec::s(n - 1))?;
        t.check(e == c.certificate.smallness, "mismatches", || {
            format!("n = {n}, x = {}: {e}", serde_json::to_string(&x).unwrap_or_default())
        });
    }
    let example = repeated_average(&IncreasingSeq::from(4), 2)?;
    let c = check_basic_scc(&example, 2, &q(1, 3))?;
    t.check(c.certificate.smallness == q(1, 4), "mismatches", || "n = 2 from 4: smallness is not 1/4".into());
    let w: Vec<Q> = example.coefficients();
    t.check(max_weight_subfamily(&example.support(), &w, &FamilySpec::s(1))? == q(1, 4), "mismatches", || {
        "n = 2 from 4: subfamily mass is not 1/4".into()
    });
    Ok(t.finish("scc", seed, &["violations", "mismatches"]))
}

fn sigma_suite(seed: u64) -> Result<Summary> {
    let params = ParameterSystem::toy();
    let mut cf = CodingFunction::new(params.clone());
    let mut t = Tally::new();
    let mut seen = HashSet::new();
    let seqs = canonical_sequences(10_000);
    for s in &seqs {
        t.bump("sequences");
        let v = cf.sigma(s)?;
        t.check(seen.insert(v), "collisions", || format!("{s:?} reuses {v}"));
        let need = cf.required_n(s)?;
        t.check(params.n(v as usize)? >= need, "growth", || format!("{s:?} -> {v}: n_t below {need}"));
        t.check(v % 2 == 0 && params.in_l2(v / 2), "range", || format!("{s:?} -> {v} is not in 2L_2"));
    }
    let table = cf.export();
    let back = CodingFunction::import(&table)?;
    t.check(back.export() == table && back.table_hash() == cf.table_hash(), "reimport", || "export differs".into());
    for s in &seqs {
        t.check(back.lookup(s) == cf.lookup(s), "reimport", || format!("{s:?} changed"));
    }
    let mut again = CodingFunction::new(params);
    for s in &seqs {
        again.sigma(s)?;
    }
    t.check(again.table_hash() == cf.table_hash(), "reimport", || "a second run assigns differently".into());
    Ok(t.finish("sigma", seed, &["collisions", "growth", "range", "reimport"]))
}

/// The golden pair: `y = (e_3, e_6, ...)`, `z = (e_4, e_7, ...)` under the toy space, `j = 0`.
pub fn golden_pair() -> Result<ConstructionTrace> {
    let spec = SpaceSpec::xcr(ParameterSystem::toy());
    let mut cf = CodingFunction::new(spec.params.clone());
    let y: Vec<FinVector> = (1..=8).map(|k| FinVector::unit(3 * k)).collect();
    let z: Vec<FinVector> = (1..=8).map(|k| FinVector::unit(3 * k + 1)).collect();
    build_dependent_pair(&y, &z, 0, &spec, &mut cf, &BuildOptions::default())
}

fn y_star(t: &mut ConstructionTrace) -> Result<&mut crate::functionals::Node> {
    match &mut t.sides[0].outer.functional {
        TreeFunctional::Node(n) => Ok(n),
        TreeFunctional::Leaf(_) => Err(Error::Domain("outer functional is a leaf".into())),
    }
}

fn relevel(f: &mut TreeFunctional, level: usize, spec: &SpaceSpec) -> Result<()> {
    if let TreeFunctional::Node(n) = f {
        n.j = Some(level);
        n.w = spec.theta(level)?;
    }
    Ok(())
}

/// Single-clause mutations of the golden pair's `y*`.
pub fn dependent_mutations(golden: &ConstructionTrace) -> Result<Vec<(Clause, ConstructionTrace)>> {
    let spec = golden.spec.clone();
    let mut out = Vec::new();

    let mut t = golden.clone();
    let mut cf = CodingFunction::import(&t.table)?;
    let used = t.intervals.len();
    let top = t.intervals[used - 1].1;
    let mut intervals = t.intervals.clone();
    intervals.extend([Interval(top + 2, top + 3), Interval(top + 5, top + 6)]);
    let level = cf.sigma(&intervals[..used])? as usize;
    t.table = cf.export();
    t.table_hash = cf.table_hash();
    let node = y_star(&mut t)?;
    let data = node.dependent.as_mut().expect("dependent data");
    data.intervals = intervals;
    data.blocks.push(vec![vec![used], vec![used + 1]]);
    let kind = node.children[0].as_node().map_or(OpKind::Allowable, |n| n.op);
    node.children.push(TreeFunctional::op(
        spec.theta(level)?,
        level,
        kind,
        vec![TreeFunctional::leaf(top + 2), TreeFunctional::leaf(top + 5)],
    ));
    out.push((Clause::Header, t));

    let mut t = golden.clone();
    let first = t.sides[0].middle[0].level;
    let mut even = first + 2;
    while spec.params.in_l1(even as u64 / 2) {
        even += 2;
    }
    relevel(&mut y_star(&mut t)?.children[0], even, &spec)?;
    out.push((Clause::One, t));

    let mut t = golden.clone();
    let second = t.sides[0].middle[1].level;
    relevel(&mut y_star(&mut t)?.children[1], second + 4, &spec)?;
    out.push((Clause::Two, t));

    let mut t = golden.clone();
    let gap = t.intervals[0].1 + 1;
    if let TreeFunctional::Node(n) = &mut y_star(&mut t)?.children[0] {
        let piece = n.children[0].clone();
        n.children[0] = TreeFunctional::op(q(1, 2), 2, OpKind::Allowable, vec![piece, TreeFunctional::leaf(gap)]);
    }
    out.push((Clause::Three, t));

    let mut t = golden.clone();
    let node = y_star(&mut t)?;
    node.dependent.as_mut().expect("dependent data").blocks[0] = vec![vec![0, 1]];
    if let TreeFunctional::Node(n) = &mut node.children[0] {
        n.children.truncate(1);
    }
    out.push((Clause::Four, t));
    Ok(out)
}

fn dependent_suite(seed: u64) -> Result<Summary> {
    let mut t = Tally::new();
    let golden = golden_pair()?;
    t.bump("golden");
    t.check(golden.passed, "rejected-golden", || format!("{:?}", golden.checks));
    let again = revalidate(
        &serde_json::from_str(&serde_json::to_string(&golden).expect("serializes"))
            .map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    t.check(again == golden, "rejected-golden", || "re-validation differs from the built trace".into());
    for (clause, m) in dependent_mutations(&golden)? {
        t.bump("mutations");
        let cert = revalidate(&m)?.sides[0].certificate.clone();
        let failing: Vec<Clause> = cert.checks.iter().filter(|c| !c.passed).map(|c| c.clause).collect();
        t.check(failing == vec![clause], "misattributed", || {
            format!("mutation of {} fails {failing:?}", clause.label())
        });
    }
    Ok(t.finish("dependent", seed, &["rejected-golden", "misattributed"]))
}

/// Spec for the admissibility lemma: `m_j = 2^j`, fast-growing `n_j`.
pub fn admi_spec() -> SpaceSpec {
    SpaceSpec::mixed(vec![2, 4, 8, 16], vec![1, 20, 600, 24000], FamilyKind::S, AdmissibilityMode::Allowable)
}

/// Ordered tree shapes as child-count lists in preorder, up to `n` nodes.
fn shapes(n: usize) -> Vec<Vec<usize>> {
    fn forests(nodes: usize) -> Vec<Vec<usize>> {
        // sequences of trees using exactly `nodes` nodes
        if nodes == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=nodes {
            for head in trees(first) {
                for tail in forests(nodes - first) {
                    let mut v = head.clone();
                    v.extend(&tail);
                    out.push(v);
                }
            }
        }
        out
    }
    fn trees(nodes: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for body in forests(nodes - 1) {
            let roots = count_roots(&body);
            let mut v = vec![roots];
            v.extend(body);
            out.push(v);
        }
        out
    }
    fn count_roots(pre: &[usize]) -> usize {
        let (mut i, mut roots) = (0, 0);
        while i < pre.len() {
            i = skip(pre, i);
            roots += 1;
        }
        roots
    }
    fn skip(pre: &[usize], i: usize) -> usize {
        let mut next = i + 1;
        for _ in 0..pre[i] {
            next = skip(pre, next);
        }
        next
    }
    (1..=n).flat_map(trees).collect()
}

/// Builds a tree from a preorder child-count list with per-node levels.
fn tree_from(
    pre: &[usize],
    levels: &[usize],
    spec: &SpaceSpec,
    next_leaf: &mut u64,
    pos: &mut usize,
) -> Result<TreeFunctional> {
    let i = *pos;
    *pos += 1;
    if pre[i] == 0 {
        *next_leaf += 1;
        return Ok(TreeFunctional::leaf(*next_leaf));
    }
    let mut children = Vec::new();
    for _ in 0..pre[i] {
        children.push(tree_from(pre, levels, spec, next_leaf, pos)?);
    }
    Ok(TreeFunctional::op(spec.theta(levels[i])?, levels[i], OpKind::Allowable, children))
}

fn admi_suite(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let spec = admi_spec();
    let mut t = Tally::new();
    let run = |pre: &[usize], levels: &[usize], t: &mut Tally| -> Result<()> {
        let mut leaf = 1;
        let f = tree_from(pre, levels, &spec, &mut leaf, &mut 0)?;
        if !validate_w(&f, &WContext::new(&spec)).valid {
            t.bump("outside-W");
            return Ok(());
        }
        for j in [2, 3] {
            t.bump("trees");
            let r = admi_check(&f, j, &spec);
            t.check(r.verdict == Verdict::Pass, "violations", || {
                format!("j = {j}: {}: {:?}", serde_json::to_string(&f).unwrap_or_default(), r.checks)
            });
        }
        Ok(())
    };
    for pre in shapes(6) {
        let internal: Vec<usize> = (0..pre.len()).filter(|&i| pre[i] > 0).collect();
        for code in 0..3usize.pow(internal.len() as u32) {
            let mut levels = vec![0; pre.len()];
            let mut c = code;
            for &i in &internal {
                levels[i] = 1 + c % 3;
                c /= 3;
            }
            run(&pre, &levels, &mut t)?;
        }
    }
    for _ in 0..1000 {
        let nodes = rng.gen_range(7..=20);
        let pre = random_shape(rng, nodes);
        let levels: Vec<usize> = (0..pre.len()).map(|_| rng.gen_range(1..=3)).collect();
        run(&pre, &levels, &mut t)?;
    }
    Ok(t.finish("admi", seed, &["violations"]))
}

/// A uniformly grown random ordered tree with exactly `nodes` nodes.
fn random_shape(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX];
    for v in 1..nodes {
        parent.push(rng.gen_range(0..v));
    }
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for v in 1..nodes {
        kids[parent[v]].push(v);
    }
    let mut pre = Vec::new();
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        pre.push(kids[v].len());
        stack.extend(kids[v].iter().rev());
    }
    pre
}

fn halve_restrict(f: &FinVector, set: &FiniteSet) -> FinVector {
    let s = set.as_slice();
    FinVector::from_pairs(
        f.iter()
            .filter(|&(i, _)| s.chunks(2).any(|p| p.len() == 2 && p[0] <= i && i < p[1]))
            .map(|(i, v)| (i, v / Q::from_integer(2.into()))),
    )
}

fn w4_suite(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let mut t = Tally::new();
    for _ in 0..100 {
        let f = random_vector(rng, 6, 12, true);
        let size = 2 * rng.gen_range(0..=3);
        let mut pool: Vec<u64> = (1..=12).collect();
        pool.shuffle(rng);
        let set = FiniteSet::from_unsorted(pool[..size].to_vec())?;
        let valid = FiniteSet::min(&set).is_none_or(|m| set.len() as u64 <= m);
        t.bump("pairs");
        match g_operation(&f, &set) {
            Ok(g) => {
                t.check(valid && g == halve_restrict(&f, &set), "mismatches", || format!("F = {:?}", set.as_slice()))
            }
            Err(Error::NotSchreier(_)) => {
                t.check(!valid, "mismatches", || format!("F = {:?} rejected", set.as_slice()))
            }
            Err(e) => return Err(e),
        }
    }
    for bad in [vec![1, 2], vec![3], vec![2, 3, 4, 5]] {
        t.bump("invalid");
        let set = FiniteSet::new(bad)?;
        t.check(g_operation(&FinVector::unit(3), &set).is_err(), "accepted-invalid", || {
            format!("{:?}", set.as_slice())
        });
    }
    let spec = SpaceSpec::w4(ParameterSystem::toy());
    let frag = W4Fragment::enumerate(&spec, 5, 2, 2)?;
    let ctx = WContext::new(&spec);
    let members = frag.members(1);
    let sets: Vec<FiniteSet> = [vec![2, 3], vec![2, 4], vec![2, 5], vec![3, 4], vec![3, 5], vec![4, 5], vec![4, 5]]
        .into_iter()
        .map(FiniteSet::new)
        .collect::<Result<_>>()?;
    for _ in 0..100 {
        let (v, tree) = members.choose(rng).expect("non-empty fragment").clone();
        let set = sets.choose(rng).expect("non-empty").clone();
        let g = g_operation(&v, &set)?;
        t.bump("revalidated");
        t.check(g.is_zero() || frag.contains(&g, 2), "outside-fragment", || {
            format!("G_F f for F = {:?}, f = {}", set.as_slice(), serde_json::to_string(&v).unwrap_or_default())
        });
        let wrapped = TreeFunctional::g_op(set.clone(), tree);
        t.check(validate_w(&wrapped, &ctx).valid, "outside-fragment", || format!("tree for F = {:?}", set.as_slice()));
    }
    Ok(t.finish("w4", seed, &["mismatches", "accepted-invalid", "outside-fragment"]))
}

/// Random block sequence for the tightness witness.
pub fn random_blocks(rng: &mut ChaCha8Rng) -> Vec<FinVector> {
    let count = rng.gen_range(6..=10);
    let mut next = rng.gen_range(2..=5u64);
    let mut out = Vec::new();
    for _ in 0..count {
        let len = rng.gen_range(1..=3u64);
        let pts: Vec<(u64, Q)> = (0..len).map(|o| (next + o, random_q(rng, true))).collect();
        next += len + rng.gen_range(0..=1);
        out.push(FinVector::from_pairs(pts));
    }
    out
}

fn tight_suite(rng: &mut ChaCha8Rng, seed: u64) -> Result<Summary> {
    let spec = SpaceSpec::xcr(ParameterSystem::toy());
    let mut t = Tally::new();
    for _ in 0..20 {
        let blocks = random_blocks(rng);
        let mut cf = CodingFunction::new(spec.params.clone());
        let trace = build_tight_witness(&blocks, 0, &spec, &mut cf, &BuildOptions::default())?;
        t.bump("instances");
        let side = &trace.sides[0];
        let value = crate::functionals::evaluate(&side.outer.functional, &side.outer.vector);
        t.check(value.is_positive() && value == Q::from_integer(1.into()), "not-one", || {
            format!("x*(x) = {value} for {}", serde_json::to_string(&blocks).unwrap_or_default())
        });
        t.check(side.certificate.passed, "certificate", || format!("{:?}", side.certificate.first_failure()));
    }
    Ok(t.finish("tight", seed, &["not-one", "certificate"]))
}
