//! Parameter diagrams: ground equations between constant terms.
//!
//! The default diagram is empty, which reads syntactically distinct constant
//! terms as distinct elements in generic position. A user-supplied diagram is
//! closed under congruence and pairing injectivity at construction and is
//! rejected when it forces a constant onto its own subtree.

use std::collections::HashMap;

use crate::congruence::Solver;
use crate::error::{Error, Result};
use crate::syntax::{parse_term, Address, Base, Term};

#[derive(Clone, Debug, Default)]
struct Frozen {
    node_of_base: HashMap<String, usize>,
    root: Vec<usize>,
    rep: HashMap<usize, Term>,
    children: HashMap<usize, [Option<usize>; 2]>,
}

#[derive(Clone, Debug, Default)]
pub struct ParamDiagram {
    equations: Vec<(Term, Term)>,
    frozen: Frozen,
}

impl ParamDiagram {
    /// The empty diagram: generic position.
    pub fn generic() -> ParamDiagram {
        ParamDiagram::default()
    }

    pub fn new(equations: Vec<(Term, Term)>) -> Result<ParamDiagram> {
        for (lhs, rhs) in &equations {
            if !lhs.is_const() || !rhs.is_const() {
                return Err(Error::WrongShape(format!(
                    "diagram equation {lhs} = {rhs} must relate constant terms"
                )));
            }
        }
        let mut solver = Solver::for_diagram_construction();
        for (lhs, rhs) in &equations {
            solver.add_eq(lhs, rhs);
        }
        solver.close();
        if let Some(reason) = solver.unsat_reason() {
            return Err(Error::InconsistentDiagram(reason.to_string()));
        }
        let (node_of_term, root, children) = solver.freeze_const_tables();
        let mut rep: HashMap<usize, Term> = HashMap::new();
        let mut node_of_base = HashMap::new();
        for (term, &node) in &node_of_term {
            if term.path.is_empty() {
                if let Base::Const(name) = &term.base {
                    node_of_base.insert(name.clone(), node);
                }
            }
            let r = root[node];
            let better = match rep.get(&r) {
                None => true,
                Some(existing) => rep_key(term) < rep_key(existing),
            };
            if better {
                rep.insert(r, term.clone());
            }
        }
        Ok(ParamDiagram {
            equations,
            frozen: Frozen { node_of_base, root, rep, children },
        })
    }

    pub fn equations(&self) -> &[(Term, Term)] {
        &self.equations
    }

    /// Canonical form of a constant term under the diagram: two constant
    /// terms denote the same element iff their canonical forms are equal.
    pub fn canonical(&self, term: &Term) -> Term {
        let Base::Const(name) = &term.base else {
            return term.clone();
        };
        let Some(&base_node) = self.frozen.node_of_base.get(name) else {
            return term.clone();
        };
        let mut cur = self.frozen.root[base_node];
        let mut result = self.frozen.rep[&cur].clone();
        for (i, &letter) in term.path.letters().iter().enumerate() {
            let slot = self.frozen.children.get(&cur).and_then(|c| c[letter.index()]);
            match slot {
                Some(child) => {
                    cur = self.frozen.root[child];
                    result = self.frozen.rep[&cur].clone();
                }
                None => {
                    let rest = Address::new(term.path.letters()[i..].to_vec());
                    return result.extend_by(&rest);
                }
            }
        }
        result
    }

    /// Whether two constant terms denote the same element.
    pub fn const_eq(&self, lhs: &Term, rhs: &Term) -> bool {
        debug_assert!(lhs.is_const() && rhs.is_const());
        self.canonical(lhs) == self.canonical(rhs)
    }

    /// Reads `{ "equations": [["l(#c)", "#d"], ...] }`.
    pub fn from_json(src: &str) -> Result<ParamDiagram> {
        let value: serde_json::Value = serde_json::from_str(src)
            .map_err(|e| Error::WrongShape(format!("diagram file is not valid JSON: {e}")))?;
        let equations = value
            .get("equations")
            .and_then(|e| e.as_array())
            .ok_or_else(|| Error::WrongShape("diagram file needs an `equations` array".into()))?;
        let mut parsed = Vec::new();
        for eq in equations {
            let pair = eq.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                Error::WrongShape("each diagram equation must be a two-element array".into())
            })?;
            let lhs = pair[0]
                .as_str()
                .ok_or_else(|| Error::WrongShape("diagram terms must be strings".into()))?;
            let rhs = pair[1]
                .as_str()
                .ok_or_else(|| Error::WrongShape("diagram terms must be strings".into()))?;
            parsed.push((parse_term(lhs)?, parse_term(rhs)?));
        }
        ParamDiagram::new(parsed)
    }
}

fn rep_key(t: &Term) -> (usize, &Term) {
    (t.path.len(), t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn generic_diagram_is_syntactic() {
        let d = ParamDiagram::generic();
        assert!(d.const_eq(&term("l(#c)"), &term("l(#c)")));
        assert!(!d.const_eq(&term("l(#c)"), &term("r(#c)")));
        assert!(!d.const_eq(&term("#c"), &term("#d")));
    }

    #[test]
    fn equations_identify_terms() {
        let d = ParamDiagram::new(vec![(term("l(#c)"), term("#d"))]).unwrap();
        assert!(d.const_eq(&term("l(#c)"), &term("#d")));
        // congruence pushes below the equation
        assert!(d.const_eq(&term("r(l(#c))"), &term("r(#d)")));
        assert!(!d.const_eq(&term("#c"), &term("#d")));
    }

    #[test]
    fn injectivity_closes_upward() {
        let d = ParamDiagram::new(vec![
            (term("l(#c)"), term("l(#d)")),
            (term("r(#c)"), term("r(#d)")),
        ])
        .unwrap();
        assert!(d.const_eq(&term("#c"), &term("#d")));
    }

    #[test]
    fn cycles_are_rejected() {
        match ParamDiagram::new(vec![(term("#c"), term("l(#c)"))]) {
            Err(Error::InconsistentDiagram(_)) => {}
            other => panic!("expected inconsistent diagram, got {other:?}"),
        }
        match ParamDiagram::new(vec![
            (term("l(#c)"), term("#d")),
            (term("l(#d)"), term("#c")),
        ]) {
            Err(Error::InconsistentDiagram(_)) => {}
            other => panic!("expected inconsistent diagram, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let d =
            ParamDiagram::from_json(r##"{ "equations": [["l(#c)", "#d"]] }"##).unwrap();
        assert!(d.const_eq(&term("l(#c)"), &term("#d")));
    }
}
