//! Finite satisfaction fragments.
//!
//! A *fragment* ([`ConstraintSet`]) collects finitely many demands on a
//! partial satisfaction assignment: compositional behaviour on listed
//! formulas, verdicts preserved from an earlier stage, forced-true base
//! occurrences, and a fiat extension for a padded identity.  The module
//! groups the fragment's formula/valuation pairs ([`Occurrence`]) into
//! value-equivalence classes ([`equiv_classes`]), orders the classes by the
//! direct-subformula relation ([`subformula_order`]), constructs a verdict
//! per class ([`build_satisfaction`]), and replays every demanded clause
//! against the result ([`verify_theta_fragment`]).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::evaluation::{ClauseReport, CtReport, CtViolation, TruthOracle, Verdict};
use crate::syntax::{
    build_eta, free_vars, Formula, FormulaNode, Term, TermNode, Valuation, VarIndex,
};

mod fragment;

pub use fragment::{parse_fragment, render_fragment};

/// Errors raised by fragment construction, ordering, and parsing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatClassError {
    /// The fragment's demands cannot all hold in one assignment.
    #[error("inconsistent constraints: {reason}")]
    InconsistentConstraints { reason: String },
    /// The subformula order closed a cycle (an internal invariant
    /// violation: well-founded syntax cannot produce one).
    #[error("subformula order is cyclic: {reason}")]
    CyclicOrder { reason: String },
    /// A fragment file could not be parsed.
    #[error("fragment parse error at line {line}: {reason}")]
    FragmentParse { line: usize, reason: String },
    /// A valuation misses a free variable of its formula.
    #[error("valuation does not cover v{var}, which is free in the formula")]
    InadmissibleValuation { var: VarIndex },
}

// ---------------------------------------------------------------------------
// Occurrences
// ---------------------------------------------------------------------------

/// A formula together with an admissible valuation: the pair the assignment
/// judges.  Admissible means the valuation's domain covers every free
/// variable; extra entries are allowed and ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    formula: Formula,
    valuation: Valuation,
}

impl Occurrence {
    /// Validate admissibility and build an occurrence.
    pub fn new(formula: Formula, valuation: Valuation) -> Result<Occurrence, SatClassError> {
        for v in free_vars(&formula) {
            if valuation.get(v).is_none() {
                return Err(SatClassError::InadmissibleValuation { var: v });
            }
        }
        Ok(Occurrence { formula, valuation })
    }

    /// A sentence with the empty valuation.
    pub fn closed(formula: Formula) -> Result<Occurrence, SatClassError> {
        Occurrence::new(formula, Valuation::new())
    }

    /// The judged formula.
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// The valuation applied to it.
    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    /// The sentence obtained by substituting numerals for the valuation's
    /// values at every free variable.
    pub fn closed_form(&self) -> Formula {
        let mut subst = BTreeMap::new();
        for v in free_vars(&self.formula) {
            let value = self
                .valuation
                .get(v)
                .expect("admissibility was validated at construction");
            subst.insert(v, Term::numeral(value));
        }
        self.formula
            .substitute(&subst)
            .expect("numeral images are closed")
    }
}

// ---------------------------------------------------------------------------
// Value canonicalization
// ---------------------------------------------------------------------------

/// Canonical image of a term inside a judged formula: every maximal closed
/// subterm collapses to its value, while subterms touching bound variables
/// keep their structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CanonTerm {
    Val(BigUint),
    Var(VarIndex),
    Succ(Box<CanonTerm>),
    Add(Box<CanonTerm>, Box<CanonTerm>),
    Mul(Box<CanonTerm>, Box<CanonTerm>),
}

/// Canonical image of a judged formula.  Two occurrences are
/// value-equivalent exactly when their keys are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum CanonKey {
    Eq(CanonTerm, CanonTerm),
    Not(Box<CanonKey>),
    Or(Box<CanonKey>, Box<CanonKey>),
    Exists(VarIndex, Box<CanonKey>),
}

/// Canonicalize a term under a valuation and a stack of bound variables.
/// Returns the canonical image and, when the term is closed in context, its
/// value.
fn canon_term(t: &Term, val: &Valuation, bound: &[VarIndex]) -> (CanonTerm, Option<BigUint>) {
    let mut succs: u64 = 0;
    let mut cur = t.clone();
    loop {
        match cur.node() {
            TermNode::Succ(inner) => {
                succs += 1;
                cur = inner.clone();
            }
            TermNode::Zero => {
                let v = BigUint::from(succs);
                return (CanonTerm::Val(v.clone()), Some(v));
            }
            TermNode::Var(v) => {
                if bound.contains(v) {
                    let mut c = CanonTerm::Var(*v);
                    for _ in 0..succs {
                        c = CanonTerm::Succ(Box::new(c));
                    }
                    return (c, None);
                }
                let base = val
                    .get(*v)
                    .expect("occurrence valuations cover every free variable");
                let value = BigUint::from(base) + succs;
                return (CanonTerm::Val(value.clone()), Some(value));
            }
            TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                let is_add = matches!(cur.node(), TermNode::Add(_, _));
                let (lc, lv) = canon_term(l, val, bound);
                let (rc, rv) = canon_term(r, val, bound);
                if let (Some(a), Some(b)) = (lv, rv) {
                    let value = if is_add { a + b } else { a * b } + succs;
                    return (CanonTerm::Val(value.clone()), Some(value));
                }
                let mut c = if is_add {
                    CanonTerm::Add(Box::new(lc), Box::new(rc))
                } else {
                    CanonTerm::Mul(Box::new(lc), Box::new(rc))
                };
                for _ in 0..succs {
                    c = CanonTerm::Succ(Box::new(c));
                }
                return (c, None);
            }
        }
    }
}

fn canon_formula(f: &Formula, val: &Valuation, bound: &mut Vec<VarIndex>) -> CanonKey {
    match f.node() {
        FormulaNode::Eq(l, r) => {
            let (lc, _) = canon_term(l, val, bound);
            let (rc, _) = canon_term(r, val, bound);
            CanonKey::Eq(lc, rc)
        }
        FormulaNode::Not(x) => CanonKey::Not(Box::new(canon_formula(x, val, bound))),
        FormulaNode::Or(l, r) => CanonKey::Or(
            Box::new(canon_formula(l, val, bound)),
            Box::new(canon_formula(r, val, bound)),
        ),
        FormulaNode::Exists(v, body) => {
            bound.push(*v);
            let inner = canon_formula(body, val, bound);
            bound.pop();
            CanonKey::Exists(*v, Box::new(inner))
        }
    }
}

fn canon_of(occ: &Occurrence) -> CanonKey {
    canon_formula(occ.formula(), occ.valuation(), &mut Vec::new())
}

/// Decide one step of value equivalence: the two judged formulas coincide
/// after substituting some tuple of closed terms with equal values into a
/// common template.
pub fn occurrence_equiv_step(a: &Occurrence, b: &Occurrence) -> bool {
    canon_of(a) == canon_of(b)
}

/// Partition occurrences under the transitive closure of
/// [`occurrence_equiv_step`].  Groups hold indices into the input, ordered
/// by first appearance.
pub fn equiv_classes(occs: &[Occurrence]) -> Vec<Vec<usize>> {
    let mut index: HashMap<CanonKey, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, occ) in occs.iter().enumerate() {
        let key = canon_of(occ);
        match index.get(&key) {
            Some(&g) => groups[g].push(i),
            None => {
                index.insert(key, groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

// ---------------------------------------------------------------------------
// The subformula order
// ---------------------------------------------------------------------------

/// The strict direct-subformula order between classes, transitively closed.
#[derive(Debug, Clone)]
pub struct SubformulaOrder {
    below: Vec<BTreeSet<usize>>,
    topo: Vec<usize>,
}

impl SubformulaOrder {
    /// True when class `a` sits strictly below class `b`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.below.get(b).is_some_and(|s| s.contains(&a))
    }

    /// Classes in an order that lists every class after everything below
    /// it.
    pub fn topological(&self) -> &[usize] {
        &self.topo
    }

    /// Classes with nothing below them.
    pub fn minimal(&self) -> Vec<usize> {
        (0..self.below.len())
            .filter(|&c| self.below[c].is_empty())
            .collect()
    }

    /// Number of classes ordered.
    pub fn len(&self) -> usize {
        self.below.len()
    }

    /// True when no classes are ordered.
    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }
}

fn valuations_agree_on<I: IntoIterator<Item = VarIndex>>(
    vars: I,
    a: &Valuation,
    b: &Valuation,
) -> bool {
    vars.into_iter().all(|v| a.get(v) == b.get(v))
}

/// True when `a` is a direct sub-occurrence of `b`: `a`'s formula is a
/// direct subformula of `b`'s, and the valuations agree on the subformula's
/// free variables (the quantified variable excepted under a quantifier).
fn is_direct_sub(a: &Occurrence, b: &Occurrence) -> bool {
    let matches_child = |child: &Formula, skip: Option<VarIndex>| {
        if a.formula() != child {
            return false;
        }
        let vars = free_vars(child)
            .into_iter()
            .filter(|v| Some(*v) != skip);
        valuations_agree_on(vars, a.valuation(), b.valuation())
    };
    match b.formula().node() {
        FormulaNode::Eq(_, _) => false,
        FormulaNode::Not(x) => matches_child(x, None),
        FormulaNode::Or(l, r) => matches_child(l, None) || matches_child(r, None),
        FormulaNode::Exists(v, body) => matches_child(body, Some(*v)),
    }
}

/// Order the given classes by the direct-subformula relation between their
/// members and transitively close it.  `classes` must partition indices
/// into `occs`, as produced by [`equiv_classes`].
pub fn subformula_order(
    occs: &[Occurrence],
    classes: &[Vec<usize>],
) -> Result<SubformulaOrder, SatClassError> {
    let n = classes.len();
    let mut children: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (ci, class) in classes.iter().enumerate() {
        for (cj, other) in classes.iter().enumerate() {
            if ci == cj {
                continue;
            }
            let related = class.iter().any(|&ia| {
                other
                    .iter()
                    .any(|&ib| is_direct_sub(&occs[ia], &occs[ib]))
            });
            if related {
                children[cj].insert(ci);
            }
        }
    }
    close_order(children)
}

/// Transitively close a child-set table into a [`SubformulaOrder`],
/// detecting cycles.
fn close_order(children: Vec<BTreeSet<usize>>) -> Result<SubformulaOrder, SatClassError> {
    let n = children.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pending: Vec<usize> = children.iter().map(|c| c.len()).collect();
    for (p, cs) in children.iter().enumerate() {
        for &c in cs {
            parents[c].push(p);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&c| pending[c] == 0).collect();
    let mut topo = Vec::with_capacity(n);
    let mut below: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    while let Some(&c) = ready.iter().next() {
        ready.remove(&c);
        topo.push(c);
        let mut b = BTreeSet::new();
        for &child in &children[c] {
            b.insert(child);
            b.extend(below[child].iter().copied());
        }
        below[c] = b;
        for &p in &parents[c] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.insert(p);
            }
        }
    }
    if topo.len() != n {
        let stuck: Vec<String> = (0..n)
            .filter(|&c| pending[c] != 0)
            .map(|c| c.to_string())
            .collect();
        return Err(SatClassError::CyclicOrder {
            reason: format!("classes {} never became ready", stuck.join(", ")),
        });
    }
    Ok(SubformulaOrder { below, topo })
}

// ---------------------------------------------------------------------------
// Constraint sets
// ---------------------------------------------------------------------------

/// A finite fragment of demands on a satisfaction assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    /// Formulas whose compositional clauses the assignment must satisfy.
    pub comp_instances: Vec<Formula>,
    /// Earlier-stage verdicts the assignment must reproduce.
    pub preservation: Vec<(Occurrence, bool)>,
    /// Occurrences forced true when flagged true (a containment: flagged
    /// false imposes nothing).
    pub base_truth: Vec<(Occurrence, bool)>,
    /// The set the padded identity must define.
    pub a_set: BTreeSet<u64>,
    /// Padding size of the identity; 0 disables the fiat extension.
    pub eta_b: u64,
    /// Witness range `0..=bound` searched by existential clauses and used
    /// to seed padded-identity instances.
    pub witness_bound: u64,
}

impl Default for ConstraintSet {
    fn default() -> ConstraintSet {
        ConstraintSet {
            comp_instances: Vec::new(),
            preservation: Vec::new(),
            base_truth: Vec::new(),
            a_set: BTreeSet::new(),
            eta_b: 0,
            witness_bound: 8,
        }
    }
}

// ---------------------------------------------------------------------------
// Universe construction
// ---------------------------------------------------------------------------

/// How a class's verdict follows from the classes directly below it.
enum ClassLinks {
    /// An equality between values.
    Atom { holds: bool },
    Not(usize),
    Or(usize, usize),
    /// One child per witness `0..=witness_bound`.
    Exists(Vec<usize>),
}

struct ClassData {
    key: CanonKey,
    members: Vec<Occurrence>,
    links: Option<ClassLinks>,
}

struct Universe {
    index: HashMap<CanonKey, usize>,
    classes: Vec<ClassData>,
}

impl Universe {
    fn intern(&mut self, occ: Occurrence, fresh: &mut VecDeque<usize>) -> usize {
        let key = canon_of(&occ);
        match self.index.get(&key) {
            Some(&c) => {
                if !self.classes[c].members.contains(&occ) {
                    self.classes[c].members.push(occ);
                }
                c
            }
            None => {
                let c = self.classes.len();
                self.index.insert(key.clone(), c);
                self.classes.push(ClassData {
                    key,
                    members: vec![occ],
                    links: None,
                });
                fresh.push_back(c);
                c
            }
        }
    }
}

fn restrict<I: IntoIterator<Item = VarIndex>>(val: &Valuation, vars: I) -> Valuation {
    let mut out = Valuation::new();
    for v in vars {
        out.set(
            v,
            val.get(v)
                .expect("occurrence valuations cover every free variable"),
        );
    }
    out
}

/// Close the seeds under direct subformulas, with existential bodies
/// extended at the quantified variable by every witness in
/// `0..=witness_bound`, and record how each class decomposes.
fn build_universe(seeds: Vec<Occurrence>, witness_bound: u64) -> Universe {
    let mut universe = Universe {
        index: HashMap::new(),
        classes: Vec::new(),
    };
    let mut fresh = VecDeque::new();
    for seed in seeds {
        universe.intern(seed, &mut fresh);
    }
    while let Some(c) = fresh.pop_front() {
        let rep = universe.classes[c].members[0].clone();
        let val = rep.valuation().clone();
        let links = match rep.formula().node() {
            FormulaNode::Eq(_, _) => {
                let holds = match &universe.classes[c].key {
                    CanonKey::Eq(CanonTerm::Val(a), CanonTerm::Val(b)) => a == b,
                    _ => unreachable!("a judged equality canonicalizes to two values"),
                };
                ClassLinks::Atom { holds }
            }
            FormulaNode::Not(x) => {
                let child = Occurrence {
                    formula: x.clone(),
                    valuation: restrict(&val, free_vars(x)),
                };
                ClassLinks::Not(universe.intern(child, &mut fresh))
            }
            FormulaNode::Or(l, r) => {
                let left = Occurrence {
                    formula: l.clone(),
                    valuation: restrict(&val, free_vars(l)),
                };
                let right = Occurrence {
                    formula: r.clone(),
                    valuation: restrict(&val, free_vars(r)),
                };
                let li = universe.intern(left, &mut fresh);
                let ri = universe.intern(right, &mut fresh);
                ClassLinks::Or(li, ri)
            }
            FormulaNode::Exists(v, body) => {
                let fv = free_vars(body);
                let quantified = fv.contains(v);
                let base = restrict(&val, fv.into_iter().filter(|u| u != v));
                let mut witnesses = Vec::with_capacity(witness_bound as usize + 1);
                for w in 0..=witness_bound {
                    let mut extended = base.clone();
                    if quantified {
                        extended.set(*v, w);
                    }
                    let child = Occurrence {
                        formula: body.clone(),
                        valuation: extended,
                    };
                    witnesses.push(universe.intern(child, &mut fresh));
                }
                ClassLinks::Exists(witnesses)
            }
        };
        universe.classes[c].links = Some(links);
    }
    universe
}

// ---------------------------------------------------------------------------
// The constructed assignment
// ---------------------------------------------------------------------------

/// A verdict for every value-equivalence class of the fragment's closed
/// occurrence universe.
pub struct SatAssignment {
    classes: Vec<ClassData>,
    verdicts: Vec<bool>,
    order: SubformulaOrder,
}

impl SatAssignment {
    /// Number of classes.
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// The recorded occurrences of one class.
    pub fn members(&self, class: usize) -> &[Occurrence] {
        &self.classes[class].members
    }

    /// The verdict of one class.
    pub fn verdict(&self, class: usize) -> bool {
        self.verdicts[class]
    }

    /// The class an occurrence falls into, if its judged formula belongs to
    /// the fragment universe.
    pub fn class_of(&self, occ: &Occurrence) -> Option<usize> {
        let key = canon_of(occ);
        self.classes.iter().position(|c| c.key == key)
    }

    /// The subformula order over the classes.
    pub fn order(&self) -> &SubformulaOrder {
        &self.order
    }

    /// Judge one occurrence: `Unknown` off the fragment universe.
    pub fn judge_occurrence(&self, occ: &Occurrence) -> Verdict {
        match self.class_of(occ) {
            Some(c) => {
                if self.verdicts[c] {
                    Verdict::True
                } else {
                    Verdict::False
                }
            }
            None => Verdict::Unknown,
        }
    }

    /// One representative occurrence per class with its verdict, in class
    /// order — the hand-off a later stage consumes as preservation input.
    pub fn snapshot(&self) -> Vec<(Occurrence, bool)> {
        self.classes
            .iter()
            .zip(&self.verdicts)
            .map(|(c, &v)| (c.members[0].clone(), v))
            .collect()
    }

    /// A copy with one class verdict flipped, for mutation testing of the
    /// verifier.
    pub fn with_flipped_verdict(&self, class: usize) -> SatAssignment {
        let mut verdicts = self.verdicts.clone();
        verdicts[class] = !verdicts[class];
        SatAssignment {
            classes: self
                .classes
                .iter()
                .map(|c| ClassData {
                    key: c.key.clone(),
                    members: c.members.clone(),
                    links: None,
                })
                .collect(),
            verdicts,
            order: self.order.clone(),
        }
    }
}

impl TruthOracle for SatAssignment {
    fn judge(&self, s: &Formula) -> Verdict {
        if !free_vars(s).is_empty() {
            return Verdict::Unknown;
        }
        let occ = Occurrence::closed(s.clone()).expect("a sentence admits the empty valuation");
        self.judge_occurrence(&occ)
    }
}

impl fmt::Display for SatAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut rows: Vec<(&CanonKey, String, bool)> = self
            .classes
            .iter()
            .zip(&self.verdicts)
            .map(|(c, &v)| (&c.key, c.members[0].closed_form().to_string(), v))
            .collect();
        rows.sort();
        for (_, shown, verdict) in rows {
            writeln!(f, "CLASS {shown} -> {verdict}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// The padded identity of size `b` as an open occurrence formula, with its
/// parameter slot closed at zero.
fn eta_formula(b: u64) -> Formula {
    build_eta(b)
        .and_then(|eta| eta.substitute_free(1, &Term::zero()))
        .expect("positive padding sizes build")
}

fn eta_occurrence(eta: &Formula, x: u64) -> Occurrence {
    let mut val = Valuation::new();
    val.set(0, x);
    Occurrence::new(eta.clone(), val).expect("the subject variable is covered")
}

/// Walk `key` against two template canonicalizations that differ exactly at
/// the padded identity's subject positions, extracting the subject value.
fn lockstep_term(
    key: &CanonTerm,
    t0: &CanonTerm,
    t1: &CanonTerm,
    subject: &mut Option<BigUint>,
) -> bool {
    if t0 == t1 {
        return key == t0;
    }
    match (key, t0, t1) {
        (CanonTerm::Val(x), CanonTerm::Val(_), CanonTerm::Val(_)) => match subject {
            Some(seen) => seen == x,
            None => {
                *subject = Some(x.clone());
                true
            }
        },
        (CanonTerm::Succ(a), CanonTerm::Succ(a0), CanonTerm::Succ(a1)) => {
            lockstep_term(a, a0, a1, subject)
        }
        (CanonTerm::Add(a, b), CanonTerm::Add(a0, b0), CanonTerm::Add(a1, b1))
        | (CanonTerm::Mul(a, b), CanonTerm::Mul(a0, b0), CanonTerm::Mul(a1, b1)) => {
            lockstep_term(a, a0, a1, subject) && lockstep_term(b, b0, b1, subject)
        }
        _ => false,
    }
}

fn lockstep_key(
    key: &CanonKey,
    t0: &CanonKey,
    t1: &CanonKey,
    subject: &mut Option<BigUint>,
) -> bool {
    if t0 == t1 {
        return key == t0;
    }
    match (key, t0, t1) {
        (CanonKey::Eq(a, b), CanonKey::Eq(a0, b0), CanonKey::Eq(a1, b1)) => {
            lockstep_term(a, a0, a1, subject) && lockstep_term(b, b0, b1, subject)
        }
        (CanonKey::Not(a), CanonKey::Not(a0), CanonKey::Not(a1)) => {
            lockstep_key(a, a0, a1, subject)
        }
        (CanonKey::Or(a, b), CanonKey::Or(a0, b0), CanonKey::Or(a1, b1)) => {
            lockstep_key(a, a0, a1, subject) && lockstep_key(b, b0, b1, subject)
        }
        (CanonKey::Exists(v, a), CanonKey::Exists(v0, a0), CanonKey::Exists(v1, a1)) => {
            v == v0 && v0 == v1 && lockstep_key(a, a0, a1, subject)
        }
        _ => false,
    }
}

/// The subject value of a padded-identity class, when the key matches the
/// identity's shape.
fn eta_subject(key: &CanonKey, t0: &CanonKey, t1: &CanonKey) -> Option<BigUint> {
    let mut subject = None;
    if lockstep_key(key, t0, t1, &mut subject) {
        subject
    } else {
        None
    }
}

/// Construct the satisfaction assignment a fragment demands.
///
/// The occurrence universe is seeded from the compositional instances (open
/// ones through their recorded valuations), the preservation and base
/// lists, and the padded identity's instances over `0..=witness_bound` and
/// the target set; it is then closed under direct subformulas.  Verdicts
/// are assigned in subformula order: equalities get their arithmetic truth
/// unless a recorded verdict overrides them, padded-identity classes get
/// the fiat verdict "subject in the target set", and every other class gets
/// the verdict its direct subformulas force compositionally.  A recorded
/// verdict that contradicts a forced one is an inconsistency, as is a
/// recorded pair that disagrees within one class.
pub fn build_satisfaction(gamma: &ConstraintSet) -> Result<SatAssignment, SatClassError> {
    if gamma.eta_b == 0 && !gamma.a_set.is_empty() {
        return Err(SatClassError::InconsistentConstraints {
            reason: "a target set needs a positive padding size".to_string(),
        });
    }
    let recorded: Vec<&(Occurrence, bool)> = gamma
        .preservation
        .iter()
        .chain(gamma.base_truth.iter())
        .collect();
    let mut seeds: Vec<Occurrence> = Vec::new();
    for phi in &gamma.comp_instances {
        if free_vars(phi).is_empty() {
            seeds.push(Occurrence::closed(phi.clone()).expect("sentence"));
        } else {
            for (occ, _) in &recorded {
                if occ.formula() == phi {
                    seeds.push(occ.clone());
                }
            }
        }
    }
    for (occ, _) in &recorded {
        seeds.push(occ.clone());
    }
    let eta = (gamma.eta_b >= 1).then(|| eta_formula(gamma.eta_b));
    if let Some(eta) = &eta {
        let xs: BTreeSet<u64> = (0..=gamma.witness_bound)
            .chain(gamma.a_set.iter().copied())
            .collect();
        for x in xs {
            seeds.push(eta_occurrence(eta, x));
        }
    }
    let universe = build_universe(seeds, gamma.witness_bound);
    let n = universe.classes.len();

    // Recorded verdicts, checked for agreement class by class.
    let mut constrained: Vec<Option<bool>> = vec![None; n];
    let mut note = |class: usize, value: bool, classes: &[ClassData]| {
        match constrained[class] {
            Some(prior) if prior != value => Err(SatClassError::InconsistentConstraints {
                reason: format!(
                    "conflicting recorded verdicts for {}",
                    classes[class].members[0].closed_form()
                ),
            }),
            _ => {
                constrained[class] = Some(value);
                Ok(())
            }
        }
    };
    for (occ, v) in &gamma.preservation {
        let class = *universe
            .index
            .get(&canon_of(occ))
            .expect("recorded occurrences were seeded");
        note(class, *v, &universe.classes)?;
    }
    for (occ, v) in &gamma.base_truth {
        if !*v {
            continue;
        }
        let class = *universe
            .index
            .get(&canon_of(occ))
            .expect("recorded occurrences were seeded");
        note(class, true, &universe.classes)?;
    }

    // Fiat verdicts for padded-identity classes.
    let mut fiat: Vec<Option<bool>> = vec![None; n];
    if let Some(eta) = &eta {
        let t0 = canon_of(&eta_occurrence(eta, 0));
        let t1 = canon_of(&eta_occurrence(eta, 1));
        for (c, data) in universe.classes.iter().enumerate() {
            if let Some(x) = eta_subject(&data.key, &t0, &t1) {
                let member = u64::try_from(&x)
                    .map(|v| gamma.a_set.contains(&v))
                    .unwrap_or(false);
                fiat[c] = Some(member);
                if constrained[c] == Some(!member) {
                    return Err(SatClassError::InconsistentConstraints {
                        reason: format!(
                            "recorded verdict contradicts the identity fiat for {}",
                            data.members[0].closed_form()
                        ),
                    });
                }
            }
        }
    }

    // Order the classes and assign verdicts bottom-up.
    let children: Vec<BTreeSet<usize>> = universe
        .classes
        .iter()
        .map(|c| match c.links.as_ref().expect("every class was expanded") {
            ClassLinks::Atom { .. } => BTreeSet::new(),
            ClassLinks::Not(x) => [*x].into_iter().collect(),
            ClassLinks::Or(l, r) => [*l, *r].into_iter().collect(),
            ClassLinks::Exists(ws) => ws.iter().copied().collect(),
        })
        .collect();
    let order = close_order(children)?;
    let mut verdicts = vec![false; n];
    for &c in order.topological() {
        let links = universe.classes[c]
            .links
            .as_ref()
            .expect("every class was expanded");
        let verdict = if let Some(f) = fiat[c] {
            f
        } else {
            match links {
                ClassLinks::Atom { holds } => constrained[c].unwrap_or(*holds),
                ClassLinks::Not(x) => {
                    let v = !verdicts[*x];
                    if constrained[c] == Some(!v) {
                        return Err(compositional_conflict(&universe.classes[c]));
                    }
                    v
                }
                ClassLinks::Or(l, r) => {
                    let v = verdicts[*l] || verdicts[*r];
                    if constrained[c] == Some(!v) {
                        return Err(compositional_conflict(&universe.classes[c]));
                    }
                    v
                }
                ClassLinks::Exists(ws) => {
                    let v = ws.iter().any(|&w| verdicts[w]);
                    if constrained[c] == Some(!v) {
                        return Err(compositional_conflict(&universe.classes[c]));
                    }
                    v
                }
            }
        };
        verdicts[c] = verdict;
    }
    Ok(SatAssignment {
        classes: universe.classes,
        verdicts,
        order,
    })
}

fn compositional_conflict(class: &ClassData) -> SatClassError {
    SatClassError::InconsistentConstraints {
        reason: format!(
            "recorded verdict contradicts the compositional value of {}",
            class.members[0].closed_form()
        ),
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// Wrap every maximal closed equality side in a value-preserving addition
/// of zero, producing a syntactically different, value-equivalent sentence.
fn pad_closed_terms(f: &Formula) -> Formula {
    fn pad(f: &Formula) -> Formula {
        match f.node() {
            FormulaNode::Eq(l, r) => {
                let wrap = |t: &Term| {
                    if t.is_closed() {
                        Term::add(t.clone(), Term::zero())
                    } else {
                        t.clone()
                    }
                };
                Formula::eq(wrap(l), wrap(r))
            }
            FormulaNode::Not(x) => Formula::not(pad(x)),
            FormulaNode::Or(l, r) => Formula::or(pad(l), pad(r)),
            FormulaNode::Exists(v, b) => Formula::exists(*v, pad(b)),
        }
    }
    pad(f)
}

/// Replay every fragment clause against an assignment.
///
/// Clause labels: 1–4 are the compositional clauses (equality, negation,
/// disjunction, existential) on the listed instances; 5 checks that an
/// occurrence and its numeral-substituted sentence agree; 6 checks that
/// value-preserving term rewrites keep the verdict; 7 checks the forced
/// base truths; 8 checks that the padded identity defines exactly the
/// target set; 9 checks the preserved verdicts.
pub fn verify_theta_fragment(s: &SatAssignment, gamma: &ConstraintSet) -> CtReport {
    let mut clauses: Vec<ClauseReport> = (1..=9)
        .map(|label| ClauseReport {
            label,
            checked: 0,
            violations: 0,
            unknown_blocked: 0,
        })
        .collect();
    let mut violations: Vec<CtViolation> = Vec::new();
    let mut record =
        |clauses: &mut Vec<ClauseReport>, label: u8, occ: &Occurrence, detail: String| {
            clauses[label as usize - 1].violations += 1;
            violations.push(CtViolation {
                clause: label,
                sentences: vec![occ.closed_form()],
                detail,
            });
        };

    // Compositional clauses on the listed instances.
    for phi in &gamma.comp_instances {
        let occs: Vec<Occurrence> = (0..s.class_count())
            .flat_map(|c| s.members(c).iter().cloned())
            .filter(|occ| occ.formula() == phi)
            .collect();
        for occ in occs {
            let label = match phi.node() {
                FormulaNode::Eq(_, _) => 1,
                FormulaNode::Not(_) => 2,
                FormulaNode::Or(_, _) => 3,
                FormulaNode::Exists(_, _) => 4,
            };
            clauses[label as usize - 1].checked += 1;
            let actual = match s.judge_occurrence(&occ) {
                Verdict::True => true,
                Verdict::False => false,
                Verdict::Unknown => {
                    clauses[label as usize - 1].unknown_blocked += 1;
                    continue;
                }
            };
            let sub = |child: &Formula, val: &Valuation| {
                Occurrence::new(child.clone(), val.clone())
                    .expect("child free variables are covered by the parent valuation")
            };
            let expected = match phi.node() {
                FormulaNode::Eq(l, r) => {
                    let bound = Vec::new();
                    let (_, lv) = canon_term(l, occ.valuation(), &bound);
                    let (_, rv) = canon_term(r, occ.valuation(), &bound);
                    Some(lv == rv)
                }
                FormulaNode::Not(x) => match s.judge_occurrence(&sub(x, occ.valuation())) {
                    Verdict::True => Some(false),
                    Verdict::False => Some(true),
                    Verdict::Unknown => None,
                },
                FormulaNode::Or(l, r) => {
                    let jl = s.judge_occurrence(&sub(l, occ.valuation()));
                    let jr = s.judge_occurrence(&sub(r, occ.valuation()));
                    match (jl, jr) {
                        (Verdict::Unknown, _) | (_, Verdict::Unknown) => None,
                        _ => Some(jl == Verdict::True || jr == Verdict::True),
                    }
                }
                FormulaNode::Exists(v, body) => {
                    let mut any = false;
                    let mut blocked = false;
                    for w in 0..=gamma.witness_bound {
                        let mut val = occ.valuation().clone();
                        val.set(*v, w);
                        match s.judge_occurrence(&sub(body, &val)) {
                            Verdict::True => {
                                any = true;
                                break;
                            }
                            Verdict::False => {}
                            Verdict::Unknown => blocked = true,
                        }
                    }
                    if any {
                        Some(true)
                    } else if blocked {
                        None
                    } else {
                        Some(false)
                    }
                }
            };
            match expected {
                None => clauses[label as usize - 1].unknown_blocked += 1,
                Some(e) if e != actual => record(
                    &mut clauses,
                    label,
                    &occ,
                    format!("assignment says {actual}, subformulas force {e}"),
                ),
                Some(_) => {}
            }
        }
    }

    // Valuation substitution keeps the verdict.
    for c in 0..s.class_count() {
        for occ in s.members(c) {
            clauses[4].checked += 1;
            let closed = Occurrence::closed(occ.closed_form())
                .expect("closed forms are sentences");
            let direct = s.judge_occurrence(occ);
            let substituted = s.judge_occurrence(&closed);
            if direct != substituted {
                record(
                    &mut clauses,
                    5,
                    occ,
                    format!("occurrence judged {direct:?}, its sentence {substituted:?}"),
                );
            }
        }
    }

    // Value-preserving term rewrites keep the verdict.
    for c in 0..s.class_count() {
        let rep = &s.members(c)[0];
        let padded = pad_closed_terms(&rep.closed_form());
        clauses[5].checked += 1;
        match s.judge(&padded) {
            Verdict::Unknown => clauses[5].unknown_blocked += 1,
            v => {
                let expected = if s.verdict(c) {
                    Verdict::True
                } else {
                    Verdict::False
                };
                if v != expected {
                    record(
                        &mut clauses,
                        6,
                        rep,
                        format!("padded variant judged {v:?}, class holds {expected:?}"),
                    );
                }
            }
        }
    }

    // Forced base truths.
    for (occ, flag) in &gamma.base_truth {
        if !*flag {
            continue;
        }
        clauses[6].checked += 1;
        match s.judge_occurrence(occ) {
            Verdict::True => {}
            Verdict::Unknown => clauses[6].unknown_blocked += 1,
            Verdict::False => record(
                &mut clauses,
                7,
                occ,
                "forced-true occurrence judged false".to_string(),
            ),
        }
    }

    // The padded identity defines exactly the target set.
    if gamma.eta_b >= 1 {
        let eta = eta_formula(gamma.eta_b);
        let xs: BTreeSet<u64> = (0..=gamma.witness_bound)
            .chain(gamma.a_set.iter().copied())
            .collect();
        for x in xs {
            clauses[7].checked += 1;
            let occ = eta_occurrence(&eta, x);
            let expected = gamma.a_set.contains(&x);
            match s.judge_occurrence(&occ) {
                Verdict::Unknown => clauses[7].unknown_blocked += 1,
                v => {
                    let got = v == Verdict::True;
                    if got != expected {
                        record(
                            &mut clauses,
                            8,
                            &occ,
                            format!("identity instance {x} judged {got}, set says {expected}"),
                        );
                    }
                }
            }
        }
    }

    // Preserved verdicts.
    for (occ, v) in &gamma.preservation {
        clauses[8].checked += 1;
        match s.judge_occurrence(occ) {
            Verdict::Unknown => clauses[8].unknown_blocked += 1,
            got => {
                let got = got == Verdict::True;
                if got != *v {
                    record(
                        &mut clauses,
                        9,
                        occ,
                        format!("preserved verdict {v}, assignment says {got}"),
                    );
                }
            }
        }
    }

    CtReport {
        clauses,
        violations,
    }
}
