//! Tree-analyses of norming functionals.

mod coding;
mod validate;

pub use coding::{canonical_sequences, CodingFunction, CodingTable, HistoryCoder, HistoryEntry, Interval};
pub use validate::{
    admi_check, g_operation, schreier_intervals, validate_dependent, validate_special_sequence_w4, validate_w, Clause,
    ClauseCheck, DependentCertificate, Location, WContext, WReport,
};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::FiniteSet;
use crate::rational::{self, Q};
use crate::vectors::FinVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("sign must be 1 or -1, got {v}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Sign {
    pub fn of(x: &Q) -> Sign {
        if x < &Q::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> Q {
        Q::from_integer(i8::from(self).into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    /// Pairwise disjoint children, minima in the level's family.
    #[serde(rename = "allowable", alias = "even-allowable")]
    Allowable,
    /// Successive children, minima in the level's family.
    #[serde(rename = "block", alias = "a-block")]
    Block,
    /// Special functional over a dependent sequence.
    #[serde(rename = "odd-dependent")]
    OddDependent,
    /// Special functional over a `W_4` special sequence.
    #[serde(rename = "odd-special-w4")]
    OddSpecialW4,
    /// `(1/2) χ_{∪[n_{2p-1}, n_{2p})} f`.
    #[serde(rename = "g-op")]
    GOp,
}

/// Decomposition data of a dependent node: the interval system `(E_r)` and,
/// for every member `f_i`, the index blocks `A_k` of its children in order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DependentData {
    pub intervals: Vec<Interval>,
    pub blocks: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leaf {
    pub leaf: u64,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    #[serde(with = "rational::serde_q")]
    pub w: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    pub op: OpKind,
    pub children: Vec<TreeFunctional>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub set: Option<FiniteSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependent: Option<DependentData>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeFunctional {
    Leaf(Leaf),
    Node(Node),
}

impl TreeFunctional {
    pub fn leaf(index: u64) -> Self {
        TreeFunctional::Leaf(Leaf { leaf: index, sign: Sign::Plus })
    }

    pub fn signed_leaf(index: u64, sign: Sign) -> Self {
        TreeFunctional::Leaf(Leaf { leaf: index, sign })
    }

    pub fn op(w: Q, j: usize, op: OpKind, children: Vec<TreeFunctional>) -> Self {
        TreeFunctional::Node(Node { w, j: Some(j), op, children, set: None, dependent: None })
    }

    pub fn g_op(set: FiniteSet, child: TreeFunctional) -> Self {
        TreeFunctional::Node(Node {
            w: rational::q(1, 2),
            j: None,
            op: OpKind::GOp,
            children: vec![child],
            set: Some(set),
            dependent: None,
        })
    }

    pub fn children(&self) -> &[TreeFunctional] {
        match self {
            TreeFunctional::Leaf(_) => &[],
            TreeFunctional::Node(n) => &n.children,
        }
    }

    pub fn as_node(&self) -> Option<&Node> {
        match self {
            TreeFunctional::Node(n) => Some(n),
            TreeFunctional::Leaf(_) => None,
        }
    }

    /// `w(f)`; leaves carry no weight.
    pub fn weight(&self) -> Option<&Q> {
        self.as_node().map(|n| &n.w)
    }

    pub fn level(&self) -> Option<usize> {
        self.as_node().and_then(|n| n.j)
    }

    /// The represented coefficient vector.
    pub fn to_vector(&self) -> FinVector {
        match self {
            TreeFunctional::Leaf(l) => FinVector::unit(l.leaf).scale(&l.sign.value()),
            TreeFunctional::Node(n) => {
                let mut sum = FinVector::zero();
                for c in &n.children {
                    sum = sum.add(&c.to_vector());
                }
                if let (OpKind::GOp, Some(f)) = (n.op, &n.set) {
                    let keep = schreier_intervals(f);
                    sum = sum.filter(|i| keep.iter().any(|&(a, b)| a <= i && i < b));
                }
                sum.scale(&n.w)
            }
        }
    }

    pub fn support(&self) -> FiniteSet {
        self.to_vector().support()
    }

    /// Node at a path of child positions; the empty path is the root.
    pub fn node_at(&self, path: &[usize]) -> Result<&TreeFunctional> {
        let mut cur = self;
        for &p in path {
            cur = cur
                .children()
                .get(p)
                .ok_or_else(|| Error::NotFound(format!("path {path:?} leaves the tree at child {p}")))?;
        }
        Ok(cur)
    }

    pub fn node_at_mut(&mut self, path: &[usize]) -> Result<&mut TreeFunctional> {
        let mut cur = self;
        for &p in path {
            cur = match cur {
                TreeFunctional::Node(n) if p < n.children.len() => &mut n.children[p],
                _ => return Err(Error::NotFound(format!("path {path:?} leaves the tree at child {p}"))),
            };
        }
        Ok(cur)
    }

    /// Number of nodes, leaves included.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(TreeFunctional::size).sum::<usize>()
    }

    /// Every node path in preorder.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn walk(t: &TreeFunctional, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            out.push(path.clone());
            for (i, c) in t.children().iter().enumerate() {
                path.push(i);
                walk(c, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

/// `f(x)`, exactly.
pub fn evaluate(f: &TreeFunctional, x: &FinVector) -> Q {
    match f {
        TreeFunctional::Leaf(l) => l.sign.value() * x.get(l.leaf),
        TreeFunctional::Node(n) => {
            let restricted;
            let x = match (n.op, &n.set) {
                (OpKind::GOp, Some(set)) => {
                    let keep = schreier_intervals(set);
                    restricted = x.filter(|i| keep.iter().any(|&(a, b)| a <= i && i < b));
                    &restricted
                }
                _ => x,
            };
            let s: Q = n.children.iter().map(|c| evaluate(c, x)).sum();
            &n.w * s
        }
    }
}

/// `(tag(α), ord(α))`: product of strict-ancestor weights and depth.
pub fn tag_ord(f: &TreeFunctional, path: &[usize]) -> Result<(Q, usize)> {
    let mut tag = Q::one();
    let mut cur = f;
    for (depth, &p) in path.iter().enumerate() {
        let node = cur
            .as_node()
            .ok_or_else(|| Error::NotFound(format!("path {path:?} passes through a leaf at depth {depth}")))?;
        tag *= &node.w;
        cur = node
            .children
            .get(p)
            .ok_or_else(|| Error::NotFound(format!("path {path:?} has no child {p} at depth {depth}")))?;
    }
    Ok((tag, path.len()))
}

/// Minimal nodes with `w(f_α) <= threshold` whose support meets `[lo, hi]`.
pub fn weight_cut_nodes(f: &TreeFunctional, threshold: &Q, range: (u64, u64)) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn walk(t: &TreeFunctional, th: &Q, range: (u64, u64), path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if let Some(w) = t.weight() {
            if w <= th {
                if t.to_vector().iter().any(|(i, _)| range.0 <= i && i <= range.1) {
                    out.push(path.clone());
                }
                return;
            }
        }
        for (i, c) in t.children().iter().enumerate() {
            path.push(i);
            walk(c, th, range, path, out);
            path.pop();
        }
    }
    walk(f, threshold, range, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn two_level() -> TreeFunctional {
        let inner = |a, b| {
            TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![TreeFunctional::leaf(a), TreeFunctional::leaf(b)])
        };
        TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![inner(4, 5), inner(6, 7)])
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(evaluate(&TreeFunctional::leaf(5), &FinVector::unit(5)), Q::one());
        let f = TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![TreeFunctional::leaf(4), TreeFunctional::leaf(5)]);
        assert_eq!(evaluate(&f, &FinVector::indicator([4, 5])), Q::one());
        assert_eq!(evaluate(&two_level(), &FinVector::indicator(4..=7)), Q::one());
        assert_eq!(two_level().to_vector(), FinVector::indicator(4..=7).scale(&q(1, 4)));
    }

    #[test]
    fn tags() {
        let f = two_level();
        assert_eq!(tag_ord(&f, &[]).unwrap(), (Q::one(), 0));
        assert_eq!(tag_ord(&f, &[1, 0]).unwrap(), (q(1, 4), 2));
        assert!(matches!(tag_ord(&f, &[2]), Err(Error::NotFound(_))));
        let g = TreeFunctional::op(
            q(1, 2),
            1,
            OpKind::Block,
            vec![TreeFunctional::op(
                q(1, 4),
                2,
                OpKind::Block,
                vec![TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![TreeFunctional::leaf(3)])],
            )],
        );
        assert_eq!(tag_ord(&g, &[0, 0]).unwrap(), (q(1, 8), 2));
    }

    #[test]
    fn cut_nodes() {
        let f = two_level();
        assert!(weight_cut_nodes(&f, &q(1, 4), (1, 100)).is_empty());
        assert_eq!(weight_cut_nodes(&f, &q(1, 2), (1, 100)), vec![Vec::<usize>::new()]);
        let inner = |a, b| {
            TreeFunctional::op(q(1, 8), 3, OpKind::Block, vec![TreeFunctional::leaf(a), TreeFunctional::leaf(b)])
        };
        let mid = |a: u64| TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![inner(a, a + 1), inner(a + 2, a + 3)]);
        let t = TreeFunctional::op(q(1, 2), 1, OpKind::Block, vec![mid(1), mid(5)]);
        let cut = weight_cut_nodes(&t, &q(1, 4), (3, 6));
        assert_eq!(cut, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn json_encoding() {
        let f = two_level();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""w":"1/2""#));
        assert!(s.contains(r#"{"leaf":4,"sign":1}"#));
        assert_eq!(serde_json::from_str::<TreeFunctional>(&s).unwrap(), f);
        let alias: TreeFunctional =
            serde_json::from_str(r#"{"w":"1/4","j":2,"op":"even-allowable","children":[{"leaf":2,"sign":-1}]}"#)
                .unwrap();
        assert_eq!(alias.as_node().unwrap().op, OpKind::Allowable);
        assert!(serde_json::from_str::<TreeFunctional>(r#"{"leaf":2,"sign":3}"#).is_err());
    }
}
