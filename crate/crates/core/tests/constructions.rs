use tsirelson::constructions::{
    build_dependent_pair, build_tight_witness, revalidate, BuildOptions, ConstructionTrace,
};
use tsirelson::functionals::{evaluate, Clause, CodingFunction, Interval, Node, OpKind, TreeFunctional};
use tsirelson::parameters::{ParameterSystem, SeqDef, SpaceSpec};
use tsirelson::rational::{q, qi};
use tsirelson::vectors::FinVector;

fn toy() -> SpaceSpec {
    SpaceSpec::xcr(ParameterSystem::toy())
}

fn units(idx: impl IntoIterator<Item = u64>) -> Vec<FinVector> {
    idx.into_iter().map(FinVector::unit).collect()
}

fn golden_pair() -> ConstructionTrace {
    let spec = toy();
    let mut cf = CodingFunction::new(spec.params.clone());
    let y = units((1..=8).map(|k| 3 * k));
    let z = units((1..=8).map(|k| 3 * k + 1));
    build_dependent_pair(&y, &z, 0, &spec, &mut cf, &BuildOptions::default()).unwrap()
}

fn y_star(t: &mut ConstructionTrace) -> &mut Node {
    match &mut t.sides[0].outer.functional {
        TreeFunctional::Node(n) => n,
        TreeFunctional::Leaf(_) => unreachable!(),
    }
}

fn first_failure(t: &ConstructionTrace) -> Option<Clause> {
    revalidate(t).unwrap().sides[0].certificate.first_failure()
}

#[test]
fn pair_over_unit_vectors_passes() {
    let t = golden_pair();
    assert!(t.passed, "{:#?}", t.checks);
    assert_eq!(t.sides.len(), 2);
    assert_eq!(t.sides[0].middle.len(), 3);
    for s in &t.sides {
        assert!(s.certificate.passed);
        assert_eq!(s.certificate.checks.len(), 5);
    }
    assert_eq!(t.sides[0].middle[0].level, 2);
    assert_eq!(t.sigma.len(), 2);
}

#[test]
fn pair_trace_round_trips() {
    let t = golden_pair();
    let json = serde_json::to_string(&t).unwrap();
    let back: ConstructionTrace = serde_json::from_str(&json).unwrap();
    assert_eq!(back, t);
    assert_eq!(revalidate(&back).unwrap(), t);
}

#[test]
fn sigma_mutation_fails_clause_two() {
    let mut t = golden_pair();
    let spec = t.spec.clone();
    let member = &mut y_star(&mut t).children[1];
    if let TreeFunctional::Node(n) = member {
        let level = n.j.unwrap() + 4;
        n.j = Some(level);
        n.w = spec.theta(level).unwrap();
    }
    assert_eq!(first_failure(&t), Some(Clause::Two));
}

#[test]
fn first_weight_mutation_fails_clause_one() {
    let mut t = golden_pair();
    let spec = t.spec.clone();
    if let TreeFunctional::Node(n) = &mut y_star(&mut t).children[0] {
        n.j = Some(4);
        n.w = spec.theta(4).unwrap();
    }
    assert_eq!(first_failure(&t), Some(Clause::One));
}

#[test]
fn gap_leaf_fails_clause_three() {
    let mut t = golden_pair();
    if let TreeFunctional::Node(n) = &mut y_star(&mut t).children[0] {
        let piece = n.children[0].clone();
        n.children[0] = TreeFunctional::op(q(1, 2), 2, OpKind::Allowable, vec![piece, TreeFunctional::leaf(5)]);
    }
    assert_eq!(first_failure(&t), Some(Clause::Three));
}

#[test]
fn merged_first_block_fails_clause_four() {
    let mut t = golden_pair();
    let node = y_star(&mut t);
    node.dependent.as_mut().unwrap().blocks[0] = vec![vec![0, 1]];
    if let TreeFunctional::Node(n) = &mut node.children[0] {
        n.children.truncate(1);
    }
    assert_eq!(first_failure(&t), Some(Clause::Four));
}

#[test]
fn extra_member_fails_header() {
    let mut t = golden_pair();
    let spec = t.spec.clone();
    let mut cf = CodingFunction::import(&t.table).unwrap();
    let used = t.intervals.len();
    let mut intervals = t.intervals.clone();
    intervals.extend([Interval(21, 22), Interval(24, 25)]);
    let level = cf.sigma(&intervals[..used]).unwrap() as usize;
    t.table = cf.export();
    t.table_hash = cf.table_hash();
    let node = y_star(&mut t);
    let data = node.dependent.as_mut().unwrap();
    data.intervals = intervals;
    data.blocks.push(vec![vec![used], vec![used + 1]]);
    node.children.push(TreeFunctional::op(
        spec.theta(level).unwrap(),
        level,
        OpKind::Allowable,
        vec![TreeFunctional::leaf(21), TreeFunctional::leaf(24)],
    ));
    let cert = &revalidate(&t).unwrap().sides[0].certificate;
    assert_eq!(cert.first_failure(), Some(Clause::Header));
    assert!(cert.checks[1..].iter().all(|c| c.passed));
}

#[test]
fn pair_rejects_short_or_unalignable_input() {
    let spec = toy();
    let mut cf = CodingFunction::new(spec.params.clone());
    let opts = BuildOptions::default();
    assert!(build_dependent_pair(&units([3]), &units([4]), 0, &spec, &mut cf, &opts).is_err());
    let y = vec![FinVector::indicator([3, 6]), FinVector::unit(7)];
    let z = units([4, 5]);
    assert!(build_dependent_pair(&y, &z, 0, &spec, &mut cf, &opts).is_err());
}

#[test]
fn tight_witness_norms_to_one() {
    let spec = toy();
    let mut cf = CodingFunction::new(spec.params.clone());
    let t = build_tight_witness(&units(3..=12), 0, &spec, &mut cf, &BuildOptions::default()).unwrap();
    assert!(t.passed, "{:#?}", t.checks);
    let side = &t.sides[0];
    assert_eq!(evaluate(&side.outer.functional, &side.outer.vector), qi(1));
    let ranges: Vec<Interval> = (3..=8).map(|i| Interval(i, i)).collect();
    assert_eq!(t.intervals, ranges);
    assert_eq!(revalidate(&t).unwrap(), t);
}

#[test]
fn tight_witness_over_wider_blocks() {
    let spec = toy();
    let mut cf = CodingFunction::new(spec.params.clone());
    let blocks = vec![
        FinVector::from_pairs([(4, qi(1)), (5, q(1, 2))]),
        FinVector::from_pairs([(6, qi(2)), (8, qi(1))]),
        FinVector::indicator([9, 10, 11]),
        FinVector::unit(12),
    ];
    let t = build_tight_witness(&blocks, 0, &spec, &mut cf, &BuildOptions::default()).unwrap();
    assert_eq!(t.sides[0].value, qi(1));
    assert!(t.sides[0].certificate.passed);
}

#[test]
fn oversized_block_group_fails_clause_four() {
    let mut n: Vec<u64> = vec![1, 1];
    n.extend((3..=40).map(|t| 100 * t));
    let mut params = ParameterSystem::toy();
    params.m = SeqDef::Geometric { first: 1 << 20, ratio: 1 << 20 };
    params.n = SeqDef::Table(n);
    let spec = SpaceSpec::xcr(params);
    let mut cf = CodingFunction::new(spec.params.clone());
    let opts = BuildOptions { group: 4, members: Some(1), ..BuildOptions::default() };
    let t = build_tight_witness(&units(2..=6), 0, &spec, &mut cf, &opts).unwrap();
    assert_eq!(t.sides[0].certificate.first_failure(), Some(Clause::Four));
    assert!(t.checks.iter().any(|c| c.name.starts_with("(E')") && !c.passed));
    assert_eq!(t.sides[0].value, qi(1));
}

#[test]
fn empty_blocks_are_rejected() {
    let spec = toy();
    let mut cf = CodingFunction::new(spec.params.clone());
    assert!(build_tight_witness(&[], 0, &spec, &mut cf, &BuildOptions::default()).is_err());
}
