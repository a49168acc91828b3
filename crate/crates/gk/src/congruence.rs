//! Congruence closure over term-tree nodes.
//!
//! Nodes are variable nodes `x_w` or constant-term nodes. The closure
//! maintains three rules: merged nodes have merged children (congruence),
//! classes with equal left and right children merge (pairing is injective),
//! and a class carrying a constant pushes derived constants onto its
//! children. A conjunction of equalities is satisfiable iff closure produces
//! no class with two distinct canonical constants and the class graph is
//! acyclic; an added inequality is consistent iff its sides end up in
//! distinct classes.

use std::collections::{HashMap, VecDeque};

use crate::diagram::ParamDiagram;
use crate::error::{Error, Result};
use crate::syntax::{Address, Atom, AtomKind, Base, Formula, Letter, Term};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum NodeKey {
    Var(u32, Address),
    Const(Term),
}

pub(crate) struct Solver<'d> {
    diagram: Option<&'d ParamDiagram>,
    keys: HashMap<NodeKey, usize>,
    parent: Vec<usize>,
    size: Vec<u32>,
    children: Vec<[Option<usize>; 2]>,
    constant: Vec<Option<Term>>,
    queue: VecDeque<(usize, usize)>,
    conflict: Option<String>,
    /// Diagram construction merges constant classes instead of flagging them.
    merge_consts: bool,
}

impl<'d> Solver<'d> {
    pub fn new(diagram: &'d ParamDiagram) -> Solver<'d> {
        Solver {
            diagram: Some(diagram),
            keys: HashMap::new(),
            parent: Vec::new(),
            size: Vec::new(),
            children: Vec::new(),
            constant: Vec::new(),
            queue: VecDeque::new(),
            conflict: None,
            merge_consts: false,
        }
    }

    /// Engine used to close a set of ground equations; constants merge freely.
    pub(crate) fn for_diagram_construction() -> Solver<'static> {
        Solver {
            diagram: None,
            keys: HashMap::new(),
            parent: Vec::new(),
            size: Vec::new(),
            children: Vec::new(),
            constant: Vec::new(),
            queue: VecDeque::new(),
            conflict: None,
            merge_consts: true,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn fresh(&mut self, key: NodeKey) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.size.push(1);
        self.children.push([None, None]);
        self.constant.push(match (&key, self.merge_consts) {
            (NodeKey::Const(t), false) => Some(t.clone()),
            _ => None,
        });
        self.keys.insert(key, id);
        id
    }

    fn attach_child(&mut self, parent_id: usize, letter: Letter, child_id: usize) {
        let proot = self.find(parent_id);
        match self.children[proot][letter.index()] {
            None => self.children[proot][letter.index()] = Some(child_id),
            Some(existing) => self.queue.push_back((existing, child_id)),
        }
    }

    fn intern_var(&mut self, var: u32, addr: &Address) -> usize {
        if let Some(&id) = self.keys.get(&NodeKey::Var(var, addr.clone())) {
            return id;
        }
        let id = self.fresh(NodeKey::Var(var, addr.clone()));
        if let Some(parent_addr) = addr.parent() {
            let letter = *addr.letters().last().unwrap();
            let pid = self.intern_var(var, &parent_addr);
            self.attach_child(pid, letter, id);
        }
        id
    }

    fn intern_const(&mut self, term: &Term) -> usize {
        let canon = match self.diagram {
            Some(d) => d.canonical(term),
            None => term.clone(),
        };
        if let Some(&id) = self.keys.get(&NodeKey::Const(canon.clone())) {
            return id;
        }
        let id = self.fresh(NodeKey::Const(canon.clone()));
        if let Some(parent_path) = canon.path.parent() {
            let letter = *canon.path.letters().last().unwrap();
            let parent_term = Term { base: canon.base.clone(), path: parent_path };
            let pid = self.intern_const(&parent_term);
            self.attach_child(pid, letter, id);
        }
        id
    }

    pub fn node_of(&mut self, term: &Term) -> usize {
        match &term.base {
            Base::Var(v) => self.intern_var(*v, &term.path),
            Base::Const(_) => self.intern_const(term),
        }
    }

    pub fn add_eq(&mut self, lhs: &Term, rhs: &Term) {
        let a = self.node_of(lhs);
        let b = self.node_of(rhs);
        self.queue.push_back((a, b));
    }

    fn union(&mut self, a: usize, b: usize) {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        // rb is absorbed into ra
        match (self.constant[ra].clone(), self.constant[rb].clone()) {
            (Some(x), Some(y)) if x != y => {
                if self.merge_consts {
                    // unreachable: diagram mode keeps no constant marks
                } else {
                    self.conflict =
                        Some(format!("constants {x} and {y} forced equal"));
                }
            }
            (None, Some(y)) => self.constant[ra] = Some(y),
            _ => {}
        }
        for idx in 0..2 {
            match (self.children[ra][idx], self.children[rb][idx]) {
                (Some(x), Some(y)) => self.queue.push_back((x, y)),
                (None, Some(y)) => self.children[ra][idx] = Some(y),
                _ => {}
            }
        }
        self.size[ra] += self.size[rb];
        self.parent[rb] = ra;
    }

    pub fn close(&mut self) {
        loop {
            let mut changed = false;
            while let Some((a, b)) = self.queue.pop_front() {
                self.union(a, b);
                changed = true;
            }
            // push constants down to materialized children
            let n = self.parent.len();
            for node in 0..n {
                let root = self.find(node);
                if node != root {
                    continue;
                }
                let Some(cterm) = self.constant[root].clone() else { continue };
                for (idx, letter) in [(0, Letter::L), (1, Letter::R)] {
                    if let Some(slot) = self.children[root][idx] {
                        let child_term = cterm.extend(letter);
                        let cid = self.intern_const(&child_term);
                        if self.find(cid) != self.find(slot) {
                            self.queue.push_back((cid, slot));
                            changed = true;
                        }
                    }
                }
            }
            // injectivity: equal child pairs force equal parents
            let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
            let n = self.parent.len();
            for node in 0..n {
                let root = self.find(node);
                if node != root {
                    continue;
                }
                if let (Some(l), Some(r)) = (self.children[root][0], self.children[root][1]) {
                    let key = (self.find(l), self.find(r));
                    if let Some(&other) = seen.get(&key) {
                        if self.find(other) != root {
                            self.queue.push_back((other, root));
                            changed = true;
                        }
                    } else {
                        seen.insert(key, root);
                    }
                }
            }
            if !changed && self.queue.is_empty() {
                break;
            }
        }
        if self.conflict.is_none() {
            if let Some(cycle) = self.find_cycle() {
                self.conflict = Some(cycle);
            }
        }
    }

    /// A class reachable from itself through child edges realizes `t = w(t)`.
    fn find_cycle(&mut self) -> Option<String> {
        let n = self.parent.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        for start in 0..n {
            let root = self.find(start);
            if state[root] != 0 {
                continue;
            }
            // iterative DFS
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&(v, edge)) = stack.last() {
                if edge >= 2 {
                    state[v] = 2;
                    stack.pop();
                    continue;
                }
                stack.last_mut().unwrap().1 += 1;
                if let Some(child) = self.children[v][edge] {
                    let c = self.find(child);
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            stack.push((c, 0));
                        }
                        1 => return Some("no-cycle axiom violated".to_string()),
                        _ => {}
                    }
                }
            }
        }
        None
    }

    pub fn unsat_reason(&self) -> Option<&str> {
        self.conflict.as_deref()
    }

    pub fn same(&mut self, lhs: &Term, rhs: &Term) -> bool {
        let a = self.node_of(lhs);
        let b = self.node_of(rhs);
        self.close();
        self.find(a) == self.find(b)
    }

    /// The canonical constant forced onto the class of `term`, if any.
    pub fn const_of(&mut self, term: &Term) -> Option<Term> {
        let id = self.node_of(term);
        self.close();
        let root = self.find(id);
        self.constant[root].clone()
    }

    /// Final union-find tables restricted to constant nodes, used to freeze a
    /// parameter diagram after closure.
    pub(crate) fn freeze_const_tables(
        mut self,
    ) -> (HashMap<Term, usize>, Vec<usize>, HashMap<usize, [Option<usize>; 2]>) {
        let n = self.parent.len();
        let mut root = vec![0; n];
        for i in 0..n {
            root[i] = self.find(i);
        }
        let mut children = HashMap::new();
        for i in 0..n {
            if root[i] == i {
                children.insert(i, self.children[i]);
            }
        }
        let mut node_of_term = HashMap::new();
        for (key, &id) in &self.keys {
            if let NodeKey::Const(t) = key {
                node_of_term.insert(t.clone(), id);
            }
        }
        (node_of_term, root, children)
    }

    /// Number of classes that are free to vary: no constant and at most one
    /// child materialized. Each contributes one independent choice in `M`.
    pub fn free_count(&mut self) -> usize {
        let n = self.parent.len();
        let mut count = 0;
        for node in 0..n {
            if self.find(node) != node {
                continue;
            }
            if self.constant[node].is_some() {
                continue;
            }
            let slots =
                self.children[node].iter().filter(|c| c.is_some()).count();
            if slots < 2 {
                count += 1;
            }
        }
        count
    }
}

/// Decides satisfiability of a conjunction of literals.
pub(crate) fn literals_satisfiable(
    eqs: &[(Term, Term)],
    neqs: &[(Term, Term)],
    diagram: &ParamDiagram,
) -> bool {
    let mut solver = Solver::new(diagram);
    for (a, b) in eqs {
        solver.add_eq(a, b);
    }
    solver.close();
    if solver.unsat_reason().is_some() {
        return false;
    }
    for (a, b) in neqs {
        if solver.same(a, b) {
            return false;
        }
        if solver.unsat_reason().is_some() {
            return false;
        }
    }
    true
}

fn literals_of_atoms(atoms: &[Atom]) -> (Vec<(Term, Term)>, Vec<(Term, Term)>) {
    let mut eqs = Vec::new();
    let mut neqs = Vec::new();
    for a in atoms {
        let pair = (a.lhs.clone(), a.rhs.clone());
        match a.kind {
            AtomKind::Eq => eqs.push(pair),
            AtomKind::Neq => neqs.push(pair),
        }
    }
    (eqs, neqs)
}

/// Exact satisfiability for an arbitrary quantifier-free formula, by
/// disjunctive branching over its negation normal form.
pub fn satisfiable(f: &Formula, diagram: &ParamDiagram) -> bool {
    fn walk(pending: &[&Formula], literals: &mut Vec<Atom>, diagram: &ParamDiagram) -> bool {
        match pending.split_first() {
            None => {
                let (eqs, neqs) = literals_of_atoms(literals);
                literals_satisfiable(&eqs, &neqs, diagram)
            }
            Some((first, rest)) => match first {
                Formula::True => walk(rest, literals, diagram),
                Formula::False => false,
                Formula::Atom(a) => {
                    literals.push(a.clone());
                    let ok = walk(rest, literals, diagram);
                    literals.pop();
                    ok
                }
                Formula::And(parts) => {
                    let mut next: Vec<&Formula> = parts.iter().collect();
                    next.extend_from_slice(rest);
                    walk(&next, literals, diagram)
                }
                Formula::Or(parts) => parts.iter().any(|p| {
                    let mut next: Vec<&Formula> = vec![p];
                    next.extend_from_slice(rest);
                    walk(&next, literals, diagram)
                }),
                Formula::Not(_) => unreachable!("negation normal form"),
            },
        }
    }
    let nnf = f.nnf();
    walk(&[&nnf], &mut Vec::new(), diagram)
}

/// Splits a primitive formula (a conjunction of literals, `!` allowed only
/// directly on atoms) into its literal list.
pub(crate) fn primitive_literals(f: &Formula) -> Result<Vec<Atom>> {
    fn collect(f: &Formula, out: &mut Vec<Atom>) -> Result<()> {
        match f {
            Formula::True => Ok(()),
            Formula::Atom(a) => {
                out.push(a.clone());
                Ok(())
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a) => {
                    out.push(a.negated());
                    Ok(())
                }
                _ => Err(Error::NotPrimitive(
                    "negation of a non-atomic subformula".to_string(),
                )),
            },
            Formula::And(parts) => {
                for p in parts {
                    collect(p, out)?;
                }
                Ok(())
            }
            Formula::False => Err(Error::NotPrimitive("contains `false`".to_string())),
            Formula::Or(_) => Err(Error::NotPrimitive("contains a disjunction".to_string())),
        }
    }
    let mut out = Vec::new();
    collect(f, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn term(s: &str) -> Term {
        crate::syntax::parse_term(s).unwrap()
    }

    fn generic() -> ParamDiagram {
        ParamDiagram::generic()
    }

    #[test]
    fn detects_direct_cycle() {
        let d = generic();
        assert!(!satisfiable(&parse("l(x) = x").unwrap(), &d));
    }

    #[test]
    fn detects_hidden_cycle() {
        // l(x) = r(l(x)) after substitution: r(x) appears inside itself
        let d = generic();
        let f = parse("l(x) = l(r(x)) & r(x) = r(l(x))").unwrap();
        assert!(!satisfiable(&f, &d));
    }

    #[test]
    fn injectivity_forces_equality() {
        let d = generic();
        let f = parse("l(l(x)) = l(r(x)) & r(l(x)) = r(r(x)) & l(x) != r(x)").unwrap();
        assert!(!satisfiable(&f, &d));
    }

    #[test]
    fn constant_conflict() {
        let d = generic();
        assert!(!satisfiable(&parse("l(x) = #c & l(x) = #d").unwrap(), &d));
        assert!(satisfiable(&parse("l(x) = #c & r(x) = #d").unwrap(), &d));
    }

    #[test]
    fn constants_propagate_down() {
        let d = generic();
        // x = #c forces l(x) = l(#c)
        let f = parse("x = #c & l(x) != l(#c)").unwrap();
        assert!(!satisfiable(&f, &d));
    }

    #[test]
    fn constant_chain_cycle() {
        let d = generic();
        // x = #c and l(x) = #c force #c = l(#c)
        let f = parse("x = #c & l(x) = #c").unwrap();
        assert!(!satisfiable(&f, &d));
    }

    #[test]
    fn free_count_examples() {
        let d = generic();
        let mut s = Solver::new(&d);
        s.add_eq(&term("l(x)"), &term("r(x)"));
        s.close();
        assert_eq!(s.free_count(), 1);

        let mut s = Solver::new(&d);
        s.add_eq(&term("l(x)"), &term("#c"));
        s.add_eq(&term("r(x)"), &term("#c"));
        s.close();
        assert_eq!(s.free_count(), 0);
    }

    #[test]
    fn offset_equation_is_satisfiable() {
        let d = generic();
        assert!(satisfiable(&parse("l(l(x)) = r(x)").unwrap(), &d));
    }

    #[test]
    fn disjunction_branches() {
        let d = generic();
        let f = parse("l(x) = x | l(x) = #c").unwrap();
        assert!(satisfiable(&f, &d));
        let g = parse("(l(x) = x | x = l(x)) & x = x").unwrap();
        assert!(!satisfiable(&g, &d));
    }
}
