//! Bounded brute-force semantics by exhaustive enumeration of equality
//! patterns.
//!
//! A diagram fixes, for every variable of the formula, the equality pattern
//! of its depth-`p` leaf terms: a set partition of the leaf slots plus an
//! injective partial assignment of partition classes to the constant terms
//! occurring in the unfolded formula. Free classes stand for pairwise
//! distinct values avoiding all named constants, so the diagrams partition
//! the space exactly. Counting how many ways the free classes can be filled
//! from a palette of `m` values gives a polynomial in `m`; summing the class
//! of each cell in `Z[X]/(X - X^2)` gives the Grothendieck class. Everything
//! here is deliberately independent of the algebraic engine so the two can
//! be tested against each other.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::congruence;
use crate::diagram::ParamDiagram;
use crate::error::{Error, Result};
use crate::grothendieck::{class_of_formula, K0Elem};
use crate::syntax::{
    max_var_depth, pack_variables, unfold_formula, Address, Atom, AtomKind, Base, Formula,
    Term,
};

/// Leaf-pattern enumeration is exhaustive in `Bell(slots)`; depth 4 would
/// mean 16 leaves per variable and is rejected.
pub const MAX_ORACLE_DEPTH: usize = 3;
/// Total leaf slots across all variables of one enumeration.
pub const MAX_SLOTS: usize = 12;

/// A polynomial in the palette size `m`, with ascending integer coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CountPoly {
    coeffs: Vec<i64>,
}

impl CountPoly {
    pub fn zero() -> CountPoly {
        CountPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> CountPoly {
        let mut p = CountPoly { coeffs: vec![c] };
        p.normalize();
        p
    }

    /// `(m - t)(m - t - 1) ... (m - t - k + 1)`.
    pub fn falling_factorial(t: i64, k: usize) -> Result<CountPoly> {
        let mut p = CountPoly::constant(1);
        for j in 0..k {
            p = p.mul_linear(-(t + j as i64))?;
        }
        Ok(p)
    }

    fn normalize(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn constant_value(&self) -> Option<i64> {
        match self.coeffs.len() {
            0 => Some(0),
            1 => Some(self.coeffs[0]),
            _ => None,
        }
    }

    pub fn add(&self, other: &CountPoly) -> Result<CountPoly> {
        let mut coeffs = vec![0i64; self.coeffs.len().max(other.coeffs.len())];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] = *c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] = coeffs[i]
                .checked_add(*c)
                .ok_or_else(|| Error::Overflow("counting polynomial".to_string()))?;
        }
        let mut p = CountPoly { coeffs };
        p.normalize();
        Ok(p)
    }

    /// Multiplication by `(m + c)`.
    fn mul_linear(&self, c: i64) -> Result<CountPoly> {
        let overflow = || Error::Overflow("counting polynomial".to_string());
        let mut coeffs = vec![0i64; self.coeffs.len() + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] = coeffs[i + 1].checked_add(a).ok_or_else(overflow)?;
            coeffs[i] =
                coeffs[i].checked_add(a.checked_mul(c).ok_or_else(overflow)?).ok_or_else(overflow)?;
        }
        let mut p = CountPoly { coeffs };
        p.normalize();
        Ok(p)
    }

    pub fn eval(&self, m: i64) -> i64 {
        let mut acc = 0i64;
        for &c in self.coeffs.iter().rev() {
            acc = acc * m + c;
        }
        acc
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }
}

impl std::fmt::Display for CountPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, "{}", if c < 0 { " - " } else { " + " })?;
            }
            let mag = c.unsigned_abs();
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != 1 {
                        write!(f, "{mag}")?;
                    }
                    write!(f, "m")?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// One equality pattern: a partition of the leaf slots and an injective
/// partial assignment of classes to constant-term indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diagram {
    pub class_of_slot: Vec<u32>,
    pub assignment: Vec<Option<usize>>,
}

impl Diagram {
    pub fn class_count(&self) -> usize {
        self.class_of_slot.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn free_class_count(&self) -> usize {
        self.class_count() - self.assignment.iter().filter(|a| a.is_some()).count()
    }
}

/// Slot layout of one enumeration: the variables in ascending order, each
/// contributing its `2^p` leaf addresses in lexicographic order.
#[derive(Clone, Debug)]
pub struct SlotLayout {
    pub vars: Vec<u32>,
    pub depth: usize,
    /// Canonical constant terms, sorted; diagram assignments index into this.
    pub constants: Vec<Term>,
}

impl SlotLayout {
    fn slot_of(&self, var: u32, leaf: usize) -> usize {
        let vi = self.vars.iter().position(|&v| v == var).expect("unknown variable");
        vi << self.depth | leaf
    }

    pub fn slot_count(&self) -> usize {
        self.vars.len().max(1) << self.depth
    }
}

fn next_rgs(a: &mut [u32]) -> bool {
    let n = a.len();
    for i in (1..n).rev() {
        let max_prefix = *a[..i].iter().max().unwrap();
        if a[i] <= max_prefix {
            a[i] += 1;
            for j in i + 1..n {
                a[j] = 0;
            }
            return true;
        }
    }
    false
}

fn assignments(classes: usize, k_len: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = Vec::new();
    let mut current: Vec<Option<usize>> = Vec::with_capacity(classes);
    fn rec(
        classes: usize,
        k_len: usize,
        used: &mut Vec<bool>,
        current: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if current.len() == classes {
            out.push(current.clone());
            return;
        }
        current.push(None);
        rec(classes, k_len, used, current, out);
        current.pop();
        for k in 0..k_len {
            if !used[k] {
                used[k] = true;
                current.push(Some(k));
                rec(classes, k_len, used, current, out);
                current.pop();
                used[k] = false;
            }
        }
    }
    let mut used = vec![false; k_len];
    rec(classes, k_len, &mut used, &mut current, &mut out);
    out
}

/// Streams every diagram over `slot_count` slots with constants from a set
/// of size `k_len`: partitions in restricted-growth-string order, and for
/// each partition the injective partial assignments in lexicographic order.
pub struct DiagramIter {
    rgs: Option<Vec<u32>>,
    k_len: usize,
    buffered: std::vec::IntoIter<Vec<Option<usize>>>,
}

impl std::fmt::Debug for DiagramIter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiagramIter").finish_non_exhaustive()
    }
}

impl DiagramIter {
    fn new(slot_count: usize, k_len: usize) -> DiagramIter {
        // the all-zero string is the first partition; it has one class
        let rgs = vec![0u32; slot_count];
        let classes = if slot_count == 0 { 0 } else { 1 };
        DiagramIter { rgs: Some(rgs), k_len, buffered: assignments(classes, k_len).into_iter() }
    }
}

impl Iterator for DiagramIter {
    type Item = Diagram;

    fn next(&mut self) -> Option<Diagram> {
        loop {
            let rgs = self.rgs.as_ref()?;
            if let Some(assignment) = self.buffered.next() {
                return Some(Diagram { class_of_slot: rgs.clone(), assignment });
            }
            let mut next = self.rgs.take().unwrap();
            if next_rgs(&mut next) {
                let classes = *next.iter().max().unwrap() as usize + 1;
                self.buffered = assignments(classes, self.k_len).into_iter();
                self.rgs = Some(next);
            } else {
                return None;
            }
        }
    }
}

/// Enumerates the diagrams of depth `p` over one variable with the given
/// constant terms (canonicalized and deduplicated under the diagram).
pub fn enumerate_diagrams(
    p: usize,
    constants: &[Term],
    diagram: &ParamDiagram,
) -> Result<(SlotLayout, DiagramIter)> {
    if p > MAX_ORACLE_DEPTH {
        return Err(Error::DepthBudgetExceeded {
            what: "oracle depth".to_string(),
            limit: MAX_ORACLE_DEPTH,
            requested: p,
        });
    }
    let canon: BTreeSet<Term> = constants.iter().map(|t| diagram.canonical(t)).collect();
    let layout = SlotLayout { vars: vec![0], depth: p, constants: canon.into_iter().collect() };
    let iter = DiagramIter::new(layout.slot_count(), layout.constants.len());
    Ok((layout, iter))
}

struct Prepared {
    layout: SlotLayout,
    compiled_atoms: Vec<CompiledAtom>,
    compiled: Compiled,
}

impl Prepared {
    fn holds(&self, diag: &Diagram) -> bool {
        eval_compiled(&self.compiled, &self.compiled_atoms, diag)
    }
}

/// Flat form of an unfolded formula: atoms become index pairs so that
/// evaluating a diagram is pure array arithmetic.
enum CompiledAtom {
    VarVar { lhs: usize, rhs: usize },
    VarConst { slot: usize, constant: usize },
}

enum Compiled {
    True,
    False,
    Atom { index: usize, negated: bool },
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Not(Box<Compiled>),
}

fn compile(
    f: &Formula,
    layout: &SlotLayout,
    const_index: &HashMap<Term, usize>,
    atoms: &mut Vec<CompiledAtom>,
) -> Compiled {
    match f {
        Formula::True => Compiled::True,
        Formula::False => Compiled::False,
        Formula::Not(inner) => {
            Compiled::Not(Box::new(compile(inner, layout, const_index, atoms)))
        }
        Formula::And(parts) => Compiled::And(
            parts.iter().map(|p| compile(p, layout, const_index, atoms)).collect(),
        ),
        Formula::Or(parts) => Compiled::Or(
            parts.iter().map(|p| compile(p, layout, const_index, atoms)).collect(),
        ),
        Formula::Atom(a) => {
            let index = atoms.len();
            let compiled = match (&a.lhs.base, &a.rhs.base) {
                (Base::Var(v1), Base::Var(v2)) => CompiledAtom::VarVar {
                    lhs: layout.slot_of(*v1, a.lhs.path.to_index()),
                    rhs: layout.slot_of(*v2, a.rhs.path.to_index()),
                },
                (Base::Var(v), Base::Const(_)) => CompiledAtom::VarConst {
                    slot: layout.slot_of(*v, a.lhs.path.to_index()),
                    constant: const_index[&a.rhs],
                },
                (Base::Const(_), Base::Var(v)) => CompiledAtom::VarConst {
                    slot: layout.slot_of(*v, a.rhs.path.to_index()),
                    constant: const_index[&a.lhs],
                },
                (Base::Const(_), Base::Const(_)) => {
                    unreachable!("ground atoms resolve during unfolding")
                }
            };
            atoms.push(compiled);
            Compiled::Atom { index, negated: a.kind == AtomKind::Neq }
        }
    }
}

fn eval_compiled(c: &Compiled, atoms: &[CompiledAtom], diag: &Diagram) -> bool {
    match c {
        Compiled::True => true,
        Compiled::False => false,
        Compiled::Atom { index, negated } => {
            let holds = match &atoms[*index] {
                CompiledAtom::VarVar { lhs, rhs } => {
                    diag.class_of_slot[*lhs] == diag.class_of_slot[*rhs]
                }
                CompiledAtom::VarConst { slot, constant } => {
                    diag.assignment[diag.class_of_slot[*slot] as usize] == Some(*constant)
                }
            };
            holds != *negated
        }
        Compiled::And(parts) => parts.iter().all(|p| eval_compiled(p, atoms, diag)),
        Compiled::Or(parts) => parts.iter().any(|p| eval_compiled(p, atoms, diag)),
        Compiled::Not(inner) => !eval_compiled(inner, atoms, diag),
    }
}

fn prepare(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<Prepared> {
    if p > MAX_ORACLE_DEPTH {
        return Err(Error::DepthBudgetExceeded {
            what: "oracle depth".to_string(),
            limit: MAX_ORACLE_DEPTH,
            requested: p,
        });
    }
    let unfolded = unfold_formula(f, p, diagram)?;
    // canonical constant terms make diagram equality a term equality
    let canonicalized = unfolded.map_terms(&|t| match t.base {
        Base::Const(_) => diagram.canonical(t),
        Base::Var(_) => t.clone(),
    });
    let mut vars: Vec<u32> = canonicalized.variables().into_iter().collect();
    if vars.is_empty() {
        vars.push(0);
    }
    let slot_count = vars.len() << p;
    if slot_count > MAX_SLOTS {
        return Err(Error::DepthBudgetExceeded {
            what: "oracle leaf slots".to_string(),
            limit: MAX_SLOTS,
            requested: slot_count,
        });
    }
    let consts: BTreeSet<Term> = canonicalized
        .terms()
        .into_iter()
        .filter(|t| t.is_const())
        .cloned()
        .collect();
    let constants: Vec<Term> = consts.into_iter().collect();
    let const_index: HashMap<Term, usize> =
        constants.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let layout = SlotLayout { vars, depth: p, constants };
    let mut compiled_atoms = Vec::new();
    let compiled = compile(&canonicalized, &layout, &const_index, &mut compiled_atoms);
    Ok(Prepared { layout, compiled_atoms, compiled })
}

fn for_each_satisfying(
    f: &Formula,
    p: usize,
    diagram: &ParamDiagram,
    mut visit: impl FnMut(&Prepared, &Diagram) -> Result<bool>,
) -> Result<()> {
    let prep = prepare(f, p, diagram)?;
    let iter = DiagramIter::new(prep.layout.slot_count(), prep.layout.constants.len());
    for diag in iter {
        if prep.holds(&diag) && !visit(&prep, &diag)? {
            return Ok(());
        }
    }
    Ok(())
}

/// Whether some equality pattern satisfies the formula.
pub fn oracle_sat(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<bool> {
    let mut found = false;
    for_each_satisfying(f, p, diagram, |_, _| {
        found = true;
        Ok(false)
    })?;
    Ok(found)
}

/// The number of satisfying assignments of leaf values drawn from a palette
/// of size `m`, as a polynomial in `m`. Free classes take pairwise distinct
/// values avoiding every named constant, hence the falling factorials.
pub fn oracle_count(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<CountPoly> {
    let mut total = CountPoly::zero();
    for_each_satisfying(f, p, diagram, |prep, diag| {
        let t = prep.layout.constants.len() as i64;
        let cell = CountPoly::falling_factorial(t, diag.free_class_count())?;
        total = total.add(&cell)?;
        Ok(true)
    })?;
    Ok(total)
}

/// The Grothendieck class as the sum of exact-pattern cell classes: a cell
/// with `k` free classes over `t` named constants contributes
/// `(X - t)(X - t - 1)...(X - t - k + 1)`.
pub fn oracle_class(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<K0Elem> {
    let mut total = K0Elem::zero();
    for_each_satisfying(f, p, diagram, |prep, diag| {
        let t = prep.layout.constants.len() as i64;
        let mut cell = K0Elem::one();
        for j in 0..diag.free_class_count() {
            cell = cell.mul(K0Elem::x().sub(K0Elem::from_int(t + j as i64))?)?;
        }
        total = total.add(cell)?;
        Ok(true)
    })?;
    Ok(total)
}

/// Whether `f` and `g` define the same set, decided exhaustively at depth `p`.
pub fn oracle_equivalent(
    f: &Formula,
    g: &Formula,
    p: usize,
    diagram: &ParamDiagram,
) -> Result<bool> {
    let delta = Formula::or(vec![
        Formula::and(vec![f.clone(), Formula::not(g.clone())]),
        Formula::and(vec![Formula::not(f.clone()), g.clone()]),
    ]);
    Ok(!oracle_sat(&delta, p, diagram)?)
}

/// A constant point inside the set defined by `f`, when the set is
/// non-empty: the first satisfying diagram is turned into a conjunction that
/// pins every leaf, with fresh constants for the free classes.
pub fn point_witness(f: &Formula, p: usize, diagram: &ParamDiagram) -> Result<Option<Formula>> {
    let mut witness = None;
    let used: BTreeSet<String> = f.constant_names();
    for_each_satisfying(f, p, diagram, |prep, diag| {
        let mut fresh = Vec::new();
        let mut counter = 0;
        for _ in 0..diag.class_count() {
            loop {
                let name = format!("w{counter}");
                counter += 1;
                if !used.contains(&name) {
                    fresh.push(name);
                    break;
                }
            }
        }
        let mut parts = Vec::new();
        for (slot, &class) in diag.class_of_slot.iter().enumerate() {
            let var = prep.layout.vars[slot >> prep.layout.depth];
            let leaf = slot & ((1 << prep.layout.depth) - 1);
            let value = match diag.assignment[class as usize] {
                Some(k) => prep.layout.constants[k].clone(),
                None => Term::constant(&fresh[class as usize], Address::root()),
            };
            parts.push(Formula::Atom(Atom::eq(
                Term::var(var, Address::from_index(leaf, prep.layout.depth)),
                value,
            )));
        }
        witness = Some(Formula::and(parts));
        Ok(false)
    })?;
    Ok(witness)
}

/// Controls the random formula generator. Atoms between two variable terms
/// are depth-balanced so that the leaf-pattern pipeline stays applicable
/// after packing.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Upper bound on the depth of the packed formula; at most 3.
    pub max_depth: usize,
    pub num_vars: u32,
    pub num_consts: usize,
    pub max_atoms: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { max_depth: 3, num_vars: 2, num_consts: 2, max_atoms: 6 }
    }
}

fn random_address<R: Rng>(rng: &mut R, len: usize) -> Address {
    Address::from_index(rng.gen_range(0..(1usize << len)), len)
}

fn random_atom<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Formula {
    // packing two or more variables prefixes one letter to every path
    let shift = if cfg.num_vars >= 2 { 1 } else { 0 };
    let var_depth = cfg.max_depth.saturating_sub(shift);
    let kind = if rng.gen_bool(0.5) { AtomKind::Eq } else { AtomKind::Neq };
    let with_const = cfg.num_consts > 0 && rng.gen_bool(0.4);
    let atom = if with_const {
        // constant atoms pin leaf-depth terms to bare constants, which keeps
        // the named-point set of the unfolded formula at `num_consts` terms
        // and the assignment enumeration affordable
        let var = rng.gen_range(0..cfg.num_vars) + 1;
        let name = format!("c{}", rng.gen_range(0..cfg.num_consts));
        Atom {
            kind,
            lhs: Term::var(var, random_address(rng, var_depth)),
            rhs: Term::constant(&name, Address::root()),
        }
    } else {
        let len = rng.gen_range(0..=var_depth);
        let v1 = rng.gen_range(0..cfg.num_vars) + 1;
        let v2 = rng.gen_range(0..cfg.num_vars) + 1;
        Atom {
            kind,
            lhs: Term::var(v1, random_address(rng, len)),
            rhs: Term::var(v2, random_address(rng, len)),
        }
    };
    Formula::Atom(atom)
}

/// A random quantifier-free formula within the oracle budget.
pub fn random_formula<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Formula {
    fn go<R: Rng>(rng: &mut R, cfg: &GenConfig, budget: &mut usize) -> Formula {
        if *budget <= 1 {
            *budget = budget.saturating_sub(1);
            return random_atom(rng, cfg);
        }
        match rng.gen_range(0..10) {
            0..=4 => {
                *budget -= 1;
                random_atom(rng, cfg)
            }
            5 | 6 => {
                let n = rng.gen_range(2..=3usize.min(*budget));
                let parts = (0..n).map(|_| go(rng, cfg, budget)).collect();
                Formula::and(parts)
            }
            7 | 8 => {
                let n = rng.gen_range(2..=3usize.min(*budget));
                let parts = (0..n).map(|_| go(rng, cfg, budget)).collect();
                Formula::or(parts)
            }
            _ => Formula::not(go(rng, cfg, budget)),
        }
    }
    let mut budget = rng.gen_range(1..=cfg.max_atoms);
    go(rng, cfg, &mut budget)
}

#[derive(Clone, Debug, Serialize)]
pub struct Disagreement {
    pub formula: String,
    pub check: String,
    pub engine: String,
    pub oracle: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzReport {
    pub seed: u64,
    pub cases: usize,
    pub max_depth: usize,
    pub disagreements: Vec<Disagreement>,
    pub ok: bool,
}

/// Differential fuzzing: engine class, satisfiability and cardinality verdict
/// against the enumeration oracle.
pub fn run_fuzz(
    count: usize,
    max_depth: usize,
    seed: u64,
    diagram: &ParamDiagram,
) -> Result<FuzzReport> {
    if max_depth > MAX_ORACLE_DEPTH {
        return Err(Error::DepthBudgetExceeded {
            what: "oracle depth".to_string(),
            limit: MAX_ORACLE_DEPTH,
            requested: max_depth,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = Vec::new();
    for case in 0..count {
        // alternate between one- and two-variable formulas; two trees of
        // depth 3 would overrun the slot budget, so those stay at depth 2
        let num_vars = if case % 2 == 0 { 1 } else { 2 };
        let cfg = GenConfig {
            max_depth: if num_vars == 2 { max_depth.min(2) } else { max_depth },
            num_vars,
            num_consts: 2,
            max_atoms: 6,
        };
        let f = random_formula(&mut rng, &cfg);
        let packed = pack_variables(&f);
        let p = max_var_depth(&packed).max(1);

        let engine_class = class_of_formula(&f, diagram)?;
        let oracle_cls = oracle_class(&packed, p, diagram)?;
        if engine_class != oracle_cls {
            disagreements.push(Disagreement {
                formula: f.to_string(),
                check: "class".to_string(),
                engine: engine_class.to_string(),
                oracle: oracle_cls.to_string(),
            });
        }

        let engine_sat = congruence::satisfiable(&packed, diagram);
        let oracle_satisfiable = oracle_sat(&packed, p, diagram)?;
        if engine_sat != oracle_satisfiable {
            disagreements.push(Disagreement {
                formula: f.to_string(),
                check: "sat".to_string(),
                engine: engine_sat.to_string(),
                oracle: oracle_satisfiable.to_string(),
            });
        }

        let card = crate::grothendieck::cardinality(&f, diagram)?;
        let poly = oracle_count(&packed, p, diagram)?;
        let expected = match poly.constant_value() {
            Some(0) => crate::grothendieck::Cardinality::Empty,
            Some(n) => crate::grothendieck::Cardinality::Finite(n as u64),
            None => crate::grothendieck::Cardinality::Infinite,
        };
        if card != expected {
            disagreements.push(Disagreement {
                formula: f.to_string(),
                check: "cardinality".to_string(),
                engine: card.to_string(),
                oracle: expected.to_string(),
            });
        }
    }
    Ok(FuzzReport {
        seed,
        cases: count,
        max_depth,
        ok: disagreements.is_empty(),
        disagreements,
    })
}

/// Convenience: the oracle-side count table for small palettes, used to
/// cross-check the falling-factorial counts against explicit labellings.
pub fn explicit_label_count(
    f: &Formula,
    p: usize,
    diagram: &ParamDiagram,
    palette: usize,
    named: &[Term],
) -> Result<usize> {
    // every function from leaf slots to palette values, where the first
    // `named.len()` values are the named constants
    let prep = prepare(f, p, diagram)?;
    if prep.layout.constants.iter().any(|c| !named.contains(c)) {
        return Err(Error::Internal("palette does not cover the named constants".to_string()));
    }
    let slots = prep.layout.slot_count();
    let mut count = 0usize;
    let mut labels = vec![0usize; slots];
    loop {
        // build the diagram of this labelling
        let mut class_of_slot = vec![0u32; slots];
        let mut class_of_value: BTreeMap<usize, u32> = BTreeMap::new();
        for (slot, &v) in labels.iter().enumerate() {
            let next = class_of_value.len() as u32;
            class_of_slot[slot] = *class_of_value.entry(v).or_insert(next);
        }
        let mut assignment = vec![None; class_of_value.len()];
        for (&value, &class) in &class_of_value {
            if value < named.len() {
                let canon = diagram.canonical(&named[value]);
                assignment[class as usize] =
                    prep.layout.constants.iter().position(|c| *c == canon);
                if assignment[class as usize].is_none() {
                    // a named value the formula never mentions acts as free
                    assignment[class as usize] = None;
                }
            }
        }
        let diag = Diagram { class_of_slot, assignment };
        if prep.holds(&diag) {
            count += 1;
        }
        // advance odometer
        let mut i = 0;
        loop {
            if i == slots {
                return Ok(count);
            }
            labels[i] += 1;
            if labels[i] < palette {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn generic() -> ParamDiagram {
        ParamDiagram::generic()
    }

    fn term(s: &str) -> Term {
        crate::syntax::parse_term(s).unwrap()
    }

    #[test]
    fn diagram_counts() {
        let d = generic();
        let (_, iter) = enumerate_diagrams(1, &[], &d).unwrap();
        assert_eq!(iter.count(), 2);
        // 2 partitions, with assignments {none, class -> c} per class pattern:
        // merged gives 2, split gives 3
        let (_, iter) = enumerate_diagrams(1, &[term("#c")], &d).unwrap();
        assert_eq!(iter.count(), 5);
        let (_, iter) = enumerate_diagrams(2, &[], &d).unwrap();
        assert_eq!(iter.count(), 15); // Bell(4)
    }

    #[test]
    fn depth_budget() {
        let d = generic();
        match enumerate_diagrams(4, &[], &d) {
            Err(Error::DepthBudgetExceeded { .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sat_count_class_of_merge() {
        let d = generic();
        let f = parse("l(x) = r(x)").unwrap();
        assert!(oracle_sat(&f, 1, &d).unwrap());
        let poly = oracle_count(&f, 1, &d).unwrap();
        assert_eq!(poly.coeffs(), &[0, 1]); // m
        assert_eq!(oracle_class(&f, 1, &d).unwrap(), K0Elem::x());
    }

    #[test]
    fn class_of_true_is_x() {
        let d = generic();
        let f = parse("true").unwrap();
        assert_eq!(oracle_class(&f, 1, &d).unwrap(), K0Elem::x());
        assert_eq!(oracle_class(&f, 2, &d).unwrap(), K0Elem::x());
    }

    #[test]
    fn singleton_count() {
        let d = generic();
        let f = parse("l(x) = #c & r(x) = #c").unwrap();
        let poly = oracle_count(&f, 1, &d).unwrap();
        assert_eq!(poly.constant_value(), Some(1));
        assert_eq!(oracle_class(&f, 1, &d).unwrap(), K0Elem::one());
    }

    #[test]
    fn unsat_formula() {
        let d = generic();
        let f = parse("l(x) = x").unwrap();
        assert!(!oracle_sat(&f, 1, &d).unwrap());
        assert!(oracle_count(&f, 1, &d).unwrap().is_zero());
    }

    #[test]
    fn partition_of_unity() {
        let d = generic();
        // cells sum to X for every small constant set
        for consts in [vec![], vec![term("#c")], vec![term("#c"), term("#d")]] {
            for p in 1..=2usize {
                let mut total = K0Elem::zero();
                let (layout, iter) = enumerate_diagrams(p, &consts, &d).unwrap();
                let t = layout.constants.len() as i64;
                for diag in iter {
                    let mut cell = K0Elem::one();
                    for j in 0..diag.free_class_count() {
                        cell = cell
                            .mul(K0Elem::x().sub(K0Elem::from_int(t + j as i64)).unwrap())
                            .unwrap();
                    }
                    total = total.add(cell).unwrap();
                }
                assert_eq!(total, K0Elem::x(), "p={p}, constants={consts:?}");
            }
        }
    }

    #[test]
    fn counts_match_explicit_labelling() {
        let d = generic();
        // palette of size 3 with one named constant: polynomial evaluated at
        // m = 3 must equal the explicit enumeration over all labellings
        for src in ["l(x) = r(x)", "l(x) = #c", "l(x) != #c", "l(x) = #c | l(x) = r(x)"] {
            let f = parse(src).unwrap();
            let poly = oracle_count(&f, 1, &d).unwrap();
            let explicit =
                explicit_label_count(&f, 1, &d, 3, &[term("#c")]).unwrap();
            assert_eq!(poly.eval(3), explicit as i64, "mismatch for {src}");
        }
    }

    #[test]
    fn class_consistent_across_depths() {
        let d = generic();
        for src in ["l(x) = #c", "l(x) != r(x)", "x = #c | l(x) = r(x)"] {
            let f = parse(src).unwrap();
            let c1 = oracle_class(&f, 1, &d).unwrap();
            let c2 = oracle_class(&f, 2, &d).unwrap();
            assert_eq!(c1, c2, "oracle class changed between depths for {src}");
        }
    }

    #[test]
    fn witness_is_inside_the_set() {
        let d = generic();
        for src in ["l(x) = r(x)", "l(x) = #c | x = #g", "x != #c"] {
            let f = parse(src).unwrap();
            let w = point_witness(&f, 1, &d).unwrap().expect("satisfiable");
            // the witness must imply the formula
            let outside = Formula::and(vec![w.clone(), Formula::not(f.clone())]);
            assert!(!oracle_sat(&outside, 1, &d).unwrap(), "witness escapes {src}");
            assert!(oracle_sat(&w, 1, &d).unwrap());
        }
    }

    #[test]
    fn two_variable_formulas_enumerate_jointly() {
        let d = generic();
        let f = parse("x1 = x2").unwrap();
        assert!(oracle_sat(&f, 1, &d).unwrap());
        let g = parse("x1 = x2 & l(x1) != l(x2)").unwrap();
        assert!(!oracle_sat(&g, 1, &d).unwrap());
    }

    #[test]
    fn fuzz_smoke() {
        let d = generic();
        let report = run_fuzz(40, 2, 12345, &d).unwrap();
        assert!(report.ok, "disagreements: {:?}", report.disagreements);
    }
}
