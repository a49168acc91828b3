//! Simple sets: the irreducible closed sets of the depth-`p` topology.
//!
//! A simple set of depth `p` is given by a partition of the `2^p` leaf
//! addresses (forced equalities between leaves) plus a maximal partial
//! assignment of constants to partition classes. Finite unions of simple
//! sets of depth `p` form the closed sets of a Noetherian topology on `M`.

use std::collections::BTreeMap;

use serde_json::json;

use crate::diagram::ParamDiagram;
use crate::error::{Error, Result};
use crate::grothendieck::K0Elem;
use crate::syntax::{unfold_formula, Address, Atom, AtomKind, Formula, Term};

/// Canonical form: `class_of_leaf` is a restricted-growth string over the
/// leaves in lexicographic address order, constants are keyed by class id,
/// classes sharing a diagram-equal constant are merged, and an inconsistent
/// constant assignment is normalized to the canonical empty set.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SimpleSet {
    depth: usize,
    class_of_leaf: Vec<u32>,
    constants: BTreeMap<u32, Term>,
    empty: bool,
}

impl SimpleSet {
    /// The whole space `M` seen at depth `p`: singleton classes, no constants.
    pub fn full_space(depth: usize) -> SimpleSet {
        assert!(depth >= 1, "simple sets live at depth >= 1");
        SimpleSet {
            depth,
            class_of_leaf: (0..1u32 << depth).collect(),
            constants: BTreeMap::new(),
            empty: false,
        }
    }

    /// The canonical empty simple set of depth `p`.
    pub fn empty_set(depth: usize) -> SimpleSet {
        SimpleSet { empty: true, ..SimpleSet::full_space(depth) }
    }

    /// Builds a simple set from leaf merges and leaf constants.
    pub fn from_parts(
        depth: usize,
        merges: &[(Address, Address)],
        constants: &[(Address, Term)],
        diagram: &ParamDiagram,
    ) -> SimpleSet {
        let n = 1usize << depth;
        let mut uf = UnionFind::new(n);
        for (a, b) in merges {
            debug_assert!(a.len() == depth && b.len() == depth);
            uf.union(a.to_index(), b.to_index());
        }
        let mut consts: Vec<Option<Term>> = vec![None; n];
        let mut empty = false;
        for (addr, term) in constants {
            let leaf = uf.find(addr.to_index());
            let canon = diagram.canonical(term);
            match &consts[leaf] {
                None => consts[leaf] = Some(canon),
                Some(existing) if *existing != canon => empty = true,
                _ => {}
            }
        }
        canonicalize(depth, uf, consts, empty, diagram)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn class_count(&self) -> usize {
        self.class_of_leaf.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Number of partition classes with no constant assigned.
    pub fn free_class_count(&self) -> usize {
        if self.empty {
            return 0;
        }
        self.class_count() - self.constants.len()
    }

    pub fn class_of(&self, leaf: &Address) -> u32 {
        debug_assert_eq!(leaf.len(), self.depth);
        self.class_of_leaf[leaf.to_index()]
    }

    pub fn constant_of_class(&self, class: u32) -> Option<&Term> {
        self.constants.get(&class)
    }

    /// The classes as leaf-address lists, in class-id order.
    pub fn classes(&self) -> Vec<Vec<Address>> {
        let mut out: Vec<Vec<Address>> = vec![Vec::new(); self.class_count()];
        for (idx, &cls) in self.class_of_leaf.iter().enumerate() {
            out[cls as usize].push(Address::from_index(idx, self.depth));
        }
        out
    }

    /// `0` when empty, `1` when every class is pinned to a constant, and `X`
    /// otherwise: a simple set is a point or a copy of a Cartesian power of
    /// `M`, and every such power is in definable bijection with `M`.
    pub fn class_in_k0(&self) -> K0Elem {
        if self.empty {
            K0Elem::zero()
        } else if self.free_class_count() == 0 {
            K0Elem::one()
        } else {
            K0Elem::x()
        }
    }

    /// Intersection: join of the partitions, union of the constants.
    pub fn intersect(&self, other: &SimpleSet, diagram: &ParamDiagram) -> Result<SimpleSet> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch { left: self.depth, right: other.depth });
        }
        if self.empty || other.empty {
            return Ok(SimpleSet::empty_set(self.depth));
        }
        let n = 1usize << self.depth;
        let mut uf = UnionFind::new(n);
        for set in [self, other] {
            let mut first_of_class: BTreeMap<u32, usize> = BTreeMap::new();
            for idx in 0..n {
                let cls = set.class_of_leaf[idx];
                match first_of_class.get(&cls) {
                    None => {
                        first_of_class.insert(cls, idx);
                    }
                    Some(&leader) => uf.union(leader, idx),
                }
            }
        }
        let mut consts: Vec<Option<Term>> = vec![None; n];
        let mut empty = false;
        for set in [self, other] {
            for idx in 0..n {
                let cls = set.class_of_leaf[idx];
                if let Some(term) = set.constants.get(&cls) {
                    let leaf = uf.find(idx);
                    match &consts[leaf] {
                        None => consts[leaf] = Some(term.clone()),
                        Some(existing) if existing != term => empty = true,
                        _ => {}
                    }
                }
            }
        }
        Ok(canonicalize(self.depth, uf, consts, empty, diagram))
    }

    /// Whether `other` is a subset of `self`, decided on canonical forms.
    pub fn includes(&self, other: &SimpleSet, diagram: &ParamDiagram) -> Result<bool> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch { left: self.depth, right: other.depth });
        }
        if other.empty {
            return Ok(true);
        }
        if self.empty {
            return Ok(false);
        }
        Ok(self.intersect(other, diagram)? == *other)
    }

    /// The same set presented at a greater depth: each class spawns one class
    /// per suffix, and constants extend along the suffixes.
    pub fn lift_depth(&self, target: usize, diagram: &ParamDiagram) -> SimpleSet {
        assert!(target >= self.depth);
        if target == self.depth {
            return self.clone();
        }
        if self.empty {
            return SimpleSet::empty_set(target);
        }
        let extra = target - self.depth;
        let n = 1usize << target;
        let mut uf = UnionFind::new(n);
        let mut first: BTreeMap<(u32, usize), usize> = BTreeMap::new();
        for idx in 0..n {
            let (old, suffix) = (idx >> extra, idx & ((1 << extra) - 1));
            let cls = self.class_of_leaf[old];
            match first.get(&(cls, suffix)) {
                None => {
                    first.insert((cls, suffix), idx);
                }
                Some(&leader) => uf.union(leader, idx),
            }
        }
        let mut consts: Vec<Option<Term>> = vec![None; n];
        for idx in 0..n {
            let (old, suffix) = (idx >> extra, idx & ((1 << extra) - 1));
            let cls = self.class_of_leaf[old];
            if let Some(term) = self.constants.get(&cls) {
                let leaf = uf.find(idx);
                if consts[leaf].is_none() {
                    let ext = Address::from_index(suffix, extra);
                    consts[leaf] = Some(diagram.canonical(&term.extend_by(&ext)));
                }
            }
        }
        canonicalize(target, uf, consts, false, diagram)
    }

    /// A positive primitive formula in `x` defining the set.
    pub fn formula(&self) -> Formula {
        if self.empty {
            return Formula::False;
        }
        let mut parts = Vec::new();
        for class in self.classes() {
            let leader = Term::var(0, class[0].clone());
            for addr in &class[1..] {
                parts.push(Formula::Atom(Atom::eq(leader.clone(), Term::var(0, addr.clone()))));
            }
        }
        for (cls, term) in &self.constants {
            let leaf = self
                .class_of_leaf
                .iter()
                .position(|c| c == cls)
                .expect("constant on a missing class");
            parts.push(Formula::Atom(Atom::eq(
                Term::var(0, Address::from_index(leaf, self.depth)),
                term.clone(),
            )));
        }
        Formula::and(parts)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let classes: Vec<Vec<String>> = self
            .classes()
            .into_iter()
            .map(|c| c.into_iter().map(|a| a.to_string()).collect())
            .collect();
        let constants: BTreeMap<String, String> = self
            .constants
            .iter()
            .map(|(cls, term)| (cls.to_string(), term.to_string()))
            .collect();
        json!({
            "depth": self.depth,
            "classes": classes,
            "constants": constants,
            "empty": self.empty,
        })
    }
}

/// Builds the simple set generated by a positive primitive formula at depth
/// `p`: the partition is the transitive closure of the leaf equalities and
/// constants propagate to whole classes.
pub fn from_positive_conjunction(
    f: &Formula,
    p: usize,
    diagram: &ParamDiagram,
) -> Result<SimpleSet> {
    let unfolded = unfold_formula(f, p, diagram)?;
    let mut merges = Vec::new();
    let mut consts = Vec::new();
    let mut falsified = false;
    collect_positive(&unfolded, &mut merges, &mut consts, &mut falsified)?;
    if falsified {
        return Ok(SimpleSet::empty_set(p));
    }
    Ok(SimpleSet::from_parts(p, &merges, &consts, diagram))
}

fn collect_positive(
    f: &Formula,
    merges: &mut Vec<(Address, Address)>,
    consts: &mut Vec<(Address, Term)>,
    falsified: &mut bool,
) -> Result<()> {
    match f {
        Formula::True => Ok(()),
        Formula::False => {
            *falsified = true;
            Ok(())
        }
        Formula::Atom(a) => match a.kind {
            AtomKind::Neq => Err(Error::NotPositivePrimitive(format!(
                "inequality {a} in a positive conjunction"
            ))),
            AtomKind::Eq => {
                match (a.lhs.var_id(), a.rhs.var_id()) {
                    (Some(_), Some(_)) => {
                        merges.push((a.lhs.path.clone(), a.rhs.path.clone()))
                    }
                    (Some(_), None) => consts.push((a.lhs.path.clone(), a.rhs.clone())),
                    (None, Some(_)) => consts.push((a.rhs.path.clone(), a.lhs.clone())),
                    (None, None) => unreachable!("ground atoms resolve during unfolding"),
                }
                Ok(())
            }
        },
        Formula::And(parts) => {
            for p in parts {
                collect_positive(p, merges, consts, falsified)?;
            }
            Ok(())
        }
        Formula::Or(_) | Formula::Not(_) => Err(Error::NotPositivePrimitive(
            "disjunction or negation in a positive conjunction".to_string(),
        )),
    }
}

fn canonicalize(
    depth: usize,
    mut uf: UnionFind,
    consts: Vec<Option<Term>>,
    mut empty: bool,
    diagram: &ParamDiagram,
) -> SimpleSet {
    let n = 1usize << depth;
    let mut consts = consts;
    // classes assigned the same constant collapse into one
    loop {
        let mut by_const: BTreeMap<Term, usize> = BTreeMap::new();
        let mut changed = false;
        for leaf in 0..n {
            let root = uf.find(leaf);
            if leaf != root {
                if let Some(term) = consts[leaf].take() {
                    match &consts[root] {
                        None => consts[root] = Some(term),
                        Some(existing) if *existing != term => empty = true,
                        _ => {}
                    }
                    changed = true;
                }
                continue;
            }
            if let Some(term) = consts[root].clone() {
                match by_const.get(&term) {
                    None => {
                        by_const.insert(term, root);
                    }
                    Some(&other) => {
                        if uf.find(other) != root {
                            uf.union(other, root);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if empty {
        return SimpleSet::empty_set(depth);
    }
    // restricted-growth numbering in leaf order
    let mut class_of_leaf = vec![0u32; n];
    let mut id_of_root: BTreeMap<usize, u32> = BTreeMap::new();
    let mut constants = BTreeMap::new();
    for leaf in 0..n {
        let root = uf.find(leaf);
        let next = id_of_root.len() as u32;
        let id = *id_of_root.entry(root).or_insert(next);
        class_of_leaf[leaf] = id;
        if let Some(term) = &consts[root] {
            constants.entry(id).or_insert_with(|| diagram.canonical(term));
        }
    }
    SimpleSet { depth, class_of_leaf, constants, empty: false }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller index as root so numbering stays stable
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

/// A finite union of simple sets of one depth, kept as the antichain of its
/// irreducible components.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ClosedSet {
    depth: usize,
    components: Vec<SimpleSet>,
}

impl ClosedSet {
    pub fn empty(depth: usize) -> ClosedSet {
        ClosedSet { depth, components: Vec::new() }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn components(&self) -> &[SimpleSet] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Whether the simple set is contained in the union; by irreducibility
    /// this happens iff it is contained in a single component.
    pub fn contains_simple(&self, s: &SimpleSet, diagram: &ParamDiagram) -> Result<bool> {
        for c in &self.components {
            if c.includes(s, diagram)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    pub fn formula(&self) -> Formula {
        Formula::or(self.components.iter().map(SimpleSet::formula).collect())
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "depth": self.depth,
            "components": self.components.iter().map(SimpleSet::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Drops empty and dominated members; the surviving antichain is the unique
/// irreducible decomposition of the union.
pub fn irreducible_components(
    sets: &[SimpleSet],
    depth: usize,
    diagram: &ParamDiagram,
) -> Result<ClosedSet> {
    let mut candidates: Vec<SimpleSet> = Vec::new();
    for s in sets {
        if s.depth() != depth {
            return Err(Error::DepthMismatch { left: depth, right: s.depth() });
        }
        if !s.is_empty() && !candidates.contains(s) {
            candidates.push(s.clone());
        }
    }
    // candidates are distinct canonical forms, so inclusion between two of
    // them is strict and domination is unambiguous
    let mut keep = Vec::new();
    'outer: for (i, s) in candidates.iter().enumerate() {
        for (j, t) in candidates.iter().enumerate() {
            if i != j && t.includes(s, diagram)? {
                continue 'outer;
            }
        }
        keep.push(s.clone());
    }
    keep.sort();
    Ok(ClosedSet { depth, components: keep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn generic() -> ParamDiagram {
        ParamDiagram::generic()
    }

    fn simple(src: &str, p: usize) -> SimpleSet {
        from_positive_conjunction(&parse(src).unwrap(), p, &generic()).unwrap()
    }

    #[test]
    fn merge_example() {
        let s = simple("l(x) = r(x)", 1);
        assert_eq!(s.class_count(), 1);
        assert_eq!(s.free_class_count(), 1);
        assert!(!s.is_empty());
    }

    #[test]
    fn same_constant_merges_classes() {
        let s = simple("l(x) = #c & r(x) = #c", 1);
        assert_eq!(s.class_count(), 1);
        assert_eq!(s.free_class_count(), 0);
        assert_eq!(s.class_in_k0(), K0Elem::one());
    }

    #[test]
    fn conflicting_constants_empty() {
        let s = simple("l(x) = #c & l(x) = #d", 1);
        assert!(s.is_empty());
        assert_eq!(s, SimpleSet::empty_set(1));
    }

    #[test]
    fn intersect_propagates_constants() {
        let d = generic();
        let a = simple("l(l(x)) = r(l(x))", 2);
        let b = simple("l(l(x)) = #c", 2);
        let c = a.intersect(&b, &d).unwrap();
        let class = c.class_of(&Address::parse("ll").unwrap());
        assert_eq!(class, c.class_of(&Address::parse("lr").unwrap()));
        assert_eq!(
            c.constant_of_class(class).map(Term::to_string),
            Some("#c".to_string())
        );
    }

    #[test]
    fn intersect_with_full_space_is_identity() {
        let d = generic();
        let s = simple("l(x) = #c", 1);
        assert_eq!(s.intersect(&SimpleSet::full_space(1), &d).unwrap(), s);
    }

    #[test]
    fn intersect_conflicting_is_empty() {
        let d = generic();
        let a = simple("l(x) = #c", 1);
        let b = simple("l(x) = #d", 1);
        assert!(a.intersect(&b, &d).unwrap().is_empty());
    }

    #[test]
    fn includes_examples() {
        let d = generic();
        let full = SimpleSet::full_space(1);
        let merged = simple("l(x) = r(x)", 1);
        let pinned = simple("l(x) = r(x) & l(x) = #c", 1);
        assert!(full.includes(&merged, &d).unwrap());
        assert!(merged.includes(&pinned, &d).unwrap());
        assert!(!pinned.includes(&merged, &d).unwrap());
        let lc = simple("l(x) = #c", 1);
        let rc = simple("r(x) = #c", 1);
        assert!(!lc.includes(&rc, &d).unwrap());
        assert!(!rc.includes(&lc, &d).unwrap());
    }

    #[test]
    fn lift_constant_splits_into_derived_constants() {
        let d = generic();
        let s = simple("l(x) = #c", 1);
        let lifted = s.lift_depth(2, &d);
        let ll = lifted.class_of(&Address::parse("ll").unwrap());
        let lr = lifted.class_of(&Address::parse("lr").unwrap());
        assert_eq!(
            lifted.constant_of_class(ll).map(Term::to_string),
            Some("l(#c)".to_string())
        );
        assert_eq!(
            lifted.constant_of_class(lr).map(Term::to_string),
            Some("r(#c)".to_string())
        );
        assert_eq!(lifted.free_class_count(), 2);
        // the lifted set is the same set
        assert_eq!(
            from_positive_conjunction(&parse("l(x) = #c").unwrap(), 2, &d).unwrap(),
            lifted
        );
    }

    #[test]
    fn lift_merge() {
        let d = generic();
        let s = simple("l(x) = r(x)", 1);
        let lifted = s.lift_depth(2, &d);
        assert_eq!(lifted.class_count(), 2);
        let ll = Address::parse("ll").unwrap();
        let rl = Address::parse("rl").unwrap();
        assert_eq!(lifted.class_of(&ll), lifted.class_of(&rl));
    }

    #[test]
    fn lift_full_space() {
        let d = generic();
        assert_eq!(SimpleSet::full_space(1).lift_depth(2, &d), SimpleSet::full_space(2));
    }

    #[test]
    fn class_examples() {
        assert_eq!(SimpleSet::full_space(1).class_in_k0(), K0Elem::x());
        assert_eq!(SimpleSet::empty_set(1).class_in_k0(), K0Elem::zero());
    }

    #[test]
    fn irreducible_component_examples() {
        let d = generic();
        let s = simple("l(x) = #c", 1);
        let dup = irreducible_components(&[s.clone(), s.clone()], 1, &d).unwrap();
        assert_eq!(dup.components().len(), 1);

        let full = SimpleSet::full_space(1);
        let absorbed = irreducible_components(&[full.clone(), s.clone()], 1, &d).unwrap();
        assert_eq!(absorbed.components(), &[full]);

        let t = simple("r(x) = #d", 1);
        let both = irreducible_components(&[s.clone(), t.clone()], 1, &d).unwrap();
        assert_eq!(both.components().len(), 2);
    }

    #[test]
    fn formula_round_trip() {
        let d = generic();
        for src in ["l(x) = r(x)", "l(x) = #c & r(x) = #c", "l(l(x)) = r(r(x)) & r(l(x)) = #d"] {
            let p = 2;
            let s = from_positive_conjunction(&parse(src).unwrap(), p, &d).unwrap();
            let back = from_positive_conjunction(&s.formula(), p, &d).unwrap();
            assert_eq!(s, back, "round trip failed for {src}");
        }
    }

    #[test]
    fn noetherian_chain_at_depth_one() {
        // full > merged > merged+const is a strict chain of length 3; with the
        // empty set excluded the bound 2^(p+1) = 4 leaves room for one more
        // strict step, which does not exist at depth 1.
        let d = generic();
        let full = SimpleSet::full_space(1);
        let merged = simple("l(x) = r(x)", 1);
        let pinned = simple("l(x) = r(x) & l(x) = #c", 1);
        assert!(full.includes(&merged, &d).unwrap() && full != merged);
        assert!(merged.includes(&pinned, &d).unwrap() && merged != pinned);
    }
}
