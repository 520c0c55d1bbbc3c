//! Terms and formulas of first-order arithmetic with a minimal kernel.
//!
//! The term language is `0`, `S`, `+`, `*`, and variables `v0, v1, ...`.
//! The formula kernel is exactly `=`, `!` (negation), `|` (disjunction), and
//! `E` (existential quantification).  Conjunction, implication, biconditional,
//! and universal quantification are available as constructors but expand
//! eagerly into the kernel; a formula never stores a derived connective.
//!
//! Nodes are reference-counted, so cloning is cheap and large formula
//! families can share subtrees.  All traversals in this crate are
//! sharing-aware: they memoize on node identity so that work is proportional
//! to the size of the shared graph, not the unfolded tree.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

mod parse;

pub use parse::{parse_formula, parse_term};

/// Index of an object variable: `v0`, `v1`, ...
pub type VarIndex = u64;

/// Errors produced by parsing and by the syntactic operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    /// The input text is not a well-formed term or formula.
    #[error("syntax error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    /// A substitution image contains a variable; only closed terms may be
    /// substituted.
    #[error("substitution image for v{var} is not closed")]
    OpenTermSubstitution { var: VarIndex },
    /// A valuation does not cover every free variable of the formula.
    #[error("valuation does not cover free variable v{var}")]
    InadmissibleValuation { var: VarIndex },
    /// Renaming a free variable would move it under a binder of that name.
    #[error("renaming v{from} to v{to} would capture it under a binder")]
    VariableCapture { from: VarIndex, to: VarIndex },
    /// A builder parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

/// A term node; see [`Term`] for the shared handle.
#[derive(Debug, PartialEq, Eq, Hash)]
pub enum TermNode {
    /// The constant `0`.
    Zero,
    /// Successor `S(t)`.
    Succ(Term),
    /// Sum `(l + r)`.
    Add(Term, Term),
    /// Product `(l * r)`.
    Mul(Term, Term),
    /// An object variable `vN`.
    Var(VarIndex),
}

/// A reference-counted arithmetic term.
///
/// Equality and hashing are structural; equality short-circuits on shared
/// nodes.
#[derive(Clone, Eq)]
pub struct Term(Rc<TermNode>);

impl Term {
    /// The constant `0`.
    pub fn zero() -> Term {
        Term(Rc::new(TermNode::Zero))
    }

    /// Successor of `t`.
    pub fn succ(t: Term) -> Term {
        Term(Rc::new(TermNode::Succ(t)))
    }

    /// Sum of two terms.
    #[allow(clippy::should_implement_trait)]
    pub fn add(l: Term, r: Term) -> Term {
        Term(Rc::new(TermNode::Add(l, r)))
    }

    /// Product of two terms.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: Term, r: Term) -> Term {
        Term(Rc::new(TermNode::Mul(l, r)))
    }

    /// The variable `vY` for `n = Y`.
    pub fn var(n: VarIndex) -> Term {
        Term(Rc::new(TermNode::Var(n)))
    }

    /// The numeral for `n`: `S` applied `n` times to `0`.
    pub fn numeral(n: u64) -> Term {
        let mut t = Term::zero();
        for _ in 0..n {
            t = Term::succ(t);
        }
        t
    }

    /// Borrow the underlying node.
    pub fn node(&self) -> &TermNode {
        &self.0
    }

    /// Stable address of the node, used as a memoization key.
    pub fn ptr_id(&self) -> usize {
        Rc::as_ptr(&self.0) as usize
    }

    /// All variables occurring in the term (terms have no binders, so every
    /// occurrence is free).
    ///
    /// Iterative with a visited set, so deep numerals and shared subterms are
    /// both safe.
    pub fn vars(&self) -> BTreeSet<VarIndex> {
        let mut out = BTreeSet::new();
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr_id()) {
                continue;
            }
            match t.node() {
                TermNode::Zero => {}
                TermNode::Succ(s) => stack.push(s.clone()),
                TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                    stack.push(l.clone());
                    stack.push(r.clone());
                }
                TermNode::Var(v) => {
                    out.insert(*v);
                }
            }
        }
        out
    }

    /// True when the term mentions no variables.
    pub fn is_closed(&self) -> bool {
        let mut seen: std::collections::HashSet<usize> = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.ptr_id()) {
                continue;
            }
            match t.node() {
                TermNode::Zero => {}
                TermNode::Succ(s) => stack.push(s.clone()),
                TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                    stack.push(l.clone());
                    stack.push(r.clone());
                }
                TermNode::Var(_) => return false,
            }
        }
        true
    }

    /// Simultaneously replace variables by the image terms.  Images must be
    /// closed; there are no binders in terms, so no capture can occur.
    pub fn substitute(&self, subst: &BTreeMap<VarIndex, Term>) -> Result<Term, SyntaxError> {
        for (v, image) in subst {
            if !image.is_closed() {
                return Err(SyntaxError::OpenTermSubstitution { var: *v });
            }
        }
        Ok(self.substitute_unchecked(subst))
    }

    /// Substitution body without the closedness check; used internally where
    /// the caller substitutes a fresh variable or an already-validated image.
    pub(crate) fn substitute_unchecked(&self, subst: &BTreeMap<VarIndex, Term>) -> Term {
        // A closed term cannot change; this also keeps recursion away from
        // deep numeral spines.
        if self.is_closed() {
            return self.clone();
        }
        match self.node() {
            TermNode::Zero => self.clone(),
            TermNode::Succ(t) => {
                let s = t.substitute_unchecked(subst);
                if s.ptr_id() == t.ptr_id() {
                    self.clone()
                } else {
                    Term::succ(s)
                }
            }
            TermNode::Add(l, r) => {
                let (sl, sr) = (l.substitute_unchecked(subst), r.substitute_unchecked(subst));
                if sl.ptr_id() == l.ptr_id() && sr.ptr_id() == r.ptr_id() {
                    self.clone()
                } else {
                    Term::add(sl, sr)
                }
            }
            TermNode::Mul(l, r) => {
                let (sl, sr) = (l.substitute_unchecked(subst), r.substitute_unchecked(subst));
                if sl.ptr_id() == l.ptr_id() && sr.ptr_id() == r.ptr_id() {
                    self.clone()
                } else {
                    Term::mul(sl, sr)
                }
            }
            TermNode::Var(v) => match subst.get(v) {
                Some(image) => image.clone(),
                None => self.clone(),
            },
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Rendered with an explicit work stack: numerals can nest tens of
        // thousands of `S(...)` levels, far past the call-stack budget.
        enum Piece {
            Text(&'static str),
            Node(Term),
        }
        let mut stack = vec![Piece::Node(self.clone())];
        while let Some(piece) = stack.pop() {
            match piece {
                Piece::Text(s) => f.write_str(s)?,
                Piece::Node(t) => match t.node() {
                    TermNode::Zero => f.write_str("0")?,
                    TermNode::Var(v) => write!(f, "v{v}")?,
                    TermNode::Succ(s) => {
                        f.write_str("S(")?;
                        stack.push(Piece::Text(")"));
                        stack.push(Piece::Node(s.clone()));
                    }
                    TermNode::Add(l, r) => {
                        f.write_str("(")?;
                        stack.push(Piece::Text(")"));
                        stack.push(Piece::Node(r.clone()));
                        stack.push(Piece::Text(" + "));
                        stack.push(Piece::Node(l.clone()));
                    }
                    TermNode::Mul(l, r) => {
                        f.write_str("(")?;
                        stack.push(Piece::Text(")"));
                        stack.push(Piece::Node(r.clone()));
                        stack.push(Piece::Text(" * "));
                        stack.push(Piece::Node(l.clone()));
                    }
                },
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

/// A formula node; see [`Formula`] for the shared handle.
#[derive(Debug, PartialEq, Eq, Hash)]
pub enum FormulaNode {
    /// Atomic equality `s = t`.
    Eq(Term, Term),
    /// Negation `!f`.
    Not(Formula),
    /// Disjunction `(l | r)`.
    Or(Formula, Formula),
    /// Existential quantification `E vN. f`.
    Exists(VarIndex, Formula),
}

/// A reference-counted formula over the kernel `{=, !, |, E}`.
///
/// Derived connectives are offered as constructors ([`Formula::and`],
/// [`Formula::implies`], [`Formula::iff`], [`Formula::forall`]) and expand
/// immediately; the stored tree is always kernel-only.  Equality and hashing
/// are structural.
#[derive(Clone, Eq)]
pub struct Formula(Rc<FormulaNode>);

impl Formula {
    /// Atomic equality `l = r`.
    pub fn eq(l: Term, r: Term) -> Formula {
        Formula(Rc::new(FormulaNode::Eq(l, r)))
    }

    /// Negation `!f`.
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula(Rc::new(FormulaNode::Not(f)))
    }

    /// Disjunction `(l | r)`.
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula(Rc::new(FormulaNode::Or(l, r)))
    }

    /// Existential quantification `E vN. f`.
    pub fn exists(v: VarIndex, f: Formula) -> Formula {
        Formula(Rc::new(FormulaNode::Exists(v, f)))
    }

    /// Conjunction, expanded as `!(!l | !r)`.
    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::not(Formula::or(Formula::not(l), Formula::not(r)))
    }

    /// Implication, expanded as `(!l | r)`.
    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::or(Formula::not(l), r)
    }

    /// Biconditional, expanded as the conjunction of the two implications.
    pub fn iff(l: Formula, r: Formula) -> Formula {
        Formula::and(
            Formula::implies(l.clone(), r.clone()),
            Formula::implies(r, l),
        )
    }

    /// Universal quantification, expanded as `!E vN. !f`.
    pub fn forall(v: VarIndex, f: Formula) -> Formula {
        Formula::not(Formula::exists(v, Formula::not(f)))
    }

    /// The ordering atom `s <= t`, expanded as `E w. (s + w) = t` with `w`
    /// fresh for both terms.
    pub fn leq(s: Term, t: Term) -> Formula {
        let used = s.vars().union(&t.vars()).max().map_or(0, |m| m + 1);
        Formula::exists(used, Formula::eq(Term::add(s, Term::var(used)), t))
    }

    /// Bounded existential `E v. (v <= bound & body)`, the canonical shape
    /// that bounded evaluation can decide completely.
    pub fn exists_bounded(v: VarIndex, bound: Term, body: Formula) -> Formula {
        Formula::exists(v, Formula::and(Formula::leq(Term::var(v), bound), body))
    }

    /// Bounded universal `A v. (v <= bound -> body)`.
    pub fn forall_bounded(v: VarIndex, bound: Term, body: Formula) -> Formula {
        Formula::forall(v, Formula::implies(Formula::leq(Term::var(v), bound), body))
    }

    /// Borrow the underlying node.
    pub fn node(&self) -> &FormulaNode {
        &self.0
    }

    /// Stable address of the node, used as a memoization key.
    pub fn ptr_id(&self) -> usize {
        Rc::as_ptr(&self.0) as usize
    }

    /// Recognize the eager expansion of a conjunction: `!(!l | !r)`.
    /// Returns the two conjuncts when the shape matches.
    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        if let FormulaNode::Not(inner) = self.node() {
            if let FormulaNode::Or(l, r) = inner.node() {
                if let (FormulaNode::Not(a), FormulaNode::Not(b)) = (l.node(), r.node()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// The immediate subformulas: none for atoms, one for negation and
    /// quantification, two for disjunction.
    pub fn direct_subformulas(&self) -> Vec<Formula> {
        match self.node() {
            FormulaNode::Eq(_, _) => vec![],
            FormulaNode::Not(g) => vec![g.clone()],
            FormulaNode::Or(l, r) => vec![l.clone(), r.clone()],
            FormulaNode::Exists(_, g) => vec![g.clone()],
        }
    }

    /// True when the formula has no free variables.
    pub fn is_sentence(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// Simultaneously substitute closed terms for free variables.
    ///
    /// Every image must be closed ([`SyntaxError::OpenTermSubstitution`]
    /// otherwise), which rules out variable capture by construction.  Bound
    /// occurrences are never touched; a binder shadows any substitution for
    /// its variable.
    pub fn substitute(&self, subst: &BTreeMap<VarIndex, Term>) -> Result<Formula, SyntaxError> {
        for (v, image) in subst {
            if !image.is_closed() {
                return Err(SyntaxError::OpenTermSubstitution { var: *v });
            }
        }
        let mut memo = HashMap::new();
        Ok(self.substitute_rec(subst, &mut memo))
    }

    /// Substitute a single (possibly open) term for a free variable after
    /// checking that no variable of the image is bound anywhere in `self`.
    /// Used by builders that instantiate templates with fresh variables.
    pub(crate) fn substitute_free(
        &self,
        from: VarIndex,
        image: &Term,
    ) -> Result<Formula, SyntaxError> {
        let image_vars = image.vars();
        let mut bound = BTreeSet::new();
        collect_bound_vars(self, &mut bound);
        if let Some(v) = image_vars.iter().find(|v| bound.contains(v)) {
            return Err(SyntaxError::VariableCapture { from, to: *v });
        }
        let mut subst = BTreeMap::new();
        subst.insert(from, image.clone());
        let mut memo = HashMap::new();
        Ok(self.substitute_rec(&subst, &mut memo))
    }

    fn substitute_rec(
        &self,
        subst: &BTreeMap<VarIndex, Term>,
        memo: &mut HashMap<(usize, Vec<VarIndex>), Formula>,
    ) -> Formula {
        if subst.is_empty() {
            return self.clone();
        }
        let active: Vec<VarIndex> = subst.keys().copied().collect();
        let key = (self.ptr_id(), active);
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let result = match self.node() {
            FormulaNode::Eq(l, r) => {
                let (sl, sr) = (l.substitute_unchecked(subst), r.substitute_unchecked(subst));
                if sl.ptr_id() == l.ptr_id() && sr.ptr_id() == r.ptr_id() {
                    self.clone()
                } else {
                    Formula::eq(sl, sr)
                }
            }
            FormulaNode::Not(g) => {
                let sg = g.substitute_rec(subst, memo);
                if sg.ptr_id() == g.ptr_id() {
                    self.clone()
                } else {
                    Formula::not(sg)
                }
            }
            FormulaNode::Or(l, r) => {
                let (sl, sr) = (l.substitute_rec(subst, memo), r.substitute_rec(subst, memo));
                if sl.ptr_id() == l.ptr_id() && sr.ptr_id() == r.ptr_id() {
                    self.clone()
                } else {
                    Formula::or(sl, sr)
                }
            }
            FormulaNode::Exists(v, g) => {
                if subst.contains_key(v) {
                    let mut narrowed = subst.clone();
                    narrowed.remove(v);
                    let sg = g.substitute_rec(&narrowed, memo);
                    if sg.ptr_id() == g.ptr_id() {
                        self.clone()
                    } else {
                        Formula::exists(*v, sg)
                    }
                } else {
                    let sg = g.substitute_rec(subst, memo);
                    if sg.ptr_id() == g.ptr_id() {
                        self.clone()
                    } else {
                        Formula::exists(*v, sg)
                    }
                }
            }
        };
        memo.insert(key, result.clone());
        result
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        Rc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl std::hash::Hash for Formula {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            FormulaNode::Eq(l, r) => write!(f, "{l} = {r}"),
            FormulaNode::Not(g) => write!(f, "!{g}"),
            FormulaNode::Or(l, r) => write!(f, "({l} | {r})"),
            FormulaNode::Exists(v, g) => write!(f, "E v{v}. {g}"),
        }
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Shared graphs can unfold to enormous trees; cap what Debug prints.
        const CAP: u128 = 2_000;
        if node_count(self) <= CAP {
            fmt::Display::fmt(self, f)
        } else {
            write!(f, "<formula with {} shared nodes>", shared_node_count(self))
        }
    }
}

// ---------------------------------------------------------------------------
// Whole-formula measures and traversals
// ---------------------------------------------------------------------------

/// Render a formula in kernel syntax.  The output parses back to an equal
/// formula.
pub fn render(f: &Formula) -> String {
    f.to_string()
}

/// The set of free variables, computed once per shared node.
pub fn free_vars(f: &Formula) -> BTreeSet<VarIndex> {
    let mut memo: HashMap<usize, Rc<BTreeSet<VarIndex>>> = HashMap::new();
    free_vars_memo(f, &mut memo).as_ref().clone()
}

pub(crate) fn free_vars_memo(
    f: &Formula,
    memo: &mut HashMap<usize, Rc<BTreeSet<VarIndex>>>,
) -> Rc<BTreeSet<VarIndex>> {
    if let Some(hit) = memo.get(&f.ptr_id()) {
        return hit.clone();
    }
    let fv = match f.node() {
        FormulaNode::Eq(l, r) => {
            let mut s = l.vars();
            s.extend(r.vars());
            Rc::new(s)
        }
        FormulaNode::Not(g) => free_vars_memo(g, memo),
        FormulaNode::Or(l, r) => {
            let a = free_vars_memo(l, memo);
            let b = free_vars_memo(r, memo);
            if b.is_subset(&a) {
                a
            } else if a.is_subset(&b) {
                b
            } else {
                Rc::new(a.union(&b).copied().collect())
            }
        }
        FormulaNode::Exists(v, g) => {
            let inner = free_vars_memo(g, memo);
            if inner.contains(v) {
                let mut s = inner.as_ref().clone();
                s.remove(v);
                Rc::new(s)
            } else {
                inner
            }
        }
    };
    memo.insert(f.ptr_id(), fv.clone());
    fv
}

fn collect_bound_vars(f: &Formula, out: &mut BTreeSet<VarIndex>) {
    // Iterative with a seen set: shared subgraphs are visited once, so the
    // walk stays linear in distinct nodes even on heavily shared formulas.
    let mut seen: HashSet<usize> = HashSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !seen.insert(g.ptr_id()) {
            continue;
        }
        match g.node() {
            FormulaNode::Eq(_, _) => {}
            FormulaNode::Not(h) => stack.push(h.clone()),
            FormulaNode::Or(l, r) => {
                stack.push(l.clone());
                stack.push(r.clone());
            }
            FormulaNode::Exists(v, h) => {
                out.insert(*v);
                stack.push(h.clone());
            }
        }
    }
}

/// Add `k` to every variable index in the formula, free and bound alike.
/// Uniform shifting preserves the binding structure, so the result is
/// alpha-equivalent to the input with all its variables moved above `k`.
pub(crate) fn shift_all_vars(f: &Formula, k: VarIndex) -> Formula {
    fn shift_term(t: &Term, k: VarIndex) -> Term {
        if t.is_closed() {
            return t.clone();
        }
        match t.node() {
            TermNode::Zero => t.clone(),
            TermNode::Succ(s) => Term::succ(shift_term(s, k)),
            TermNode::Add(l, r) => Term::add(shift_term(l, k), shift_term(r, k)),
            TermNode::Mul(l, r) => Term::mul(shift_term(l, k), shift_term(r, k)),
            TermNode::Var(v) => Term::var(v + k),
        }
    }
    fn go(f: &Formula, k: VarIndex, memo: &mut HashMap<usize, Formula>) -> Formula {
        if let Some(hit) = memo.get(&f.ptr_id()) {
            return hit.clone();
        }
        let out = match f.node() {
            FormulaNode::Eq(l, r) => Formula::eq(shift_term(l, k), shift_term(r, k)),
            FormulaNode::Not(g) => Formula::not(go(g, k, memo)),
            FormulaNode::Or(l, r) => Formula::or(go(l, k, memo), go(r, k, memo)),
            FormulaNode::Exists(v, g) => Formula::exists(v + k, go(g, k, memo)),
        };
        memo.insert(f.ptr_id(), out.clone());
        out
    }
    go(f, k, &mut HashMap::new())
}

/// Largest variable index mentioned anywhere in the formula (free or bound),
/// or `None` for a variable-free formula.  Useful for picking fresh names.
pub fn max_var_index(f: &Formula) -> Option<VarIndex> {
    let mut memo: HashMap<usize, Option<VarIndex>> = HashMap::new();
    fn go(f: &Formula, memo: &mut HashMap<usize, Option<VarIndex>>) -> Option<VarIndex> {
        if let Some(hit) = memo.get(&f.ptr_id()) {
            return *hit;
        }
        let m = match f.node() {
            FormulaNode::Eq(l, r) => {
                let lm = l.vars().into_iter().max();
                let rm = r.vars().into_iter().max();
                lm.max(rm)
            }
            FormulaNode::Not(g) => go(g, memo),
            FormulaNode::Or(l, r) => go(l, memo).max(go(r, memo)),
            FormulaNode::Exists(v, g) => go(g, memo).max(Some(*v)),
        };
        memo.insert(f.ptr_id(), m);
        m
    }
    go(f, &mut memo)
}

/// Number of nodes in the fully unfolded tree (formula nodes plus term
/// nodes).  Computed in time proportional to the shared graph; saturates at
/// `u128::MAX` instead of overflowing on extreme sharing.  Iterative, so deep
/// numerals inside atoms are safe.
pub fn node_count(f: &Formula) -> u128 {
    enum Frame {
        TermEnter(Term),
        TermExit(Term),
        FormEnter(Formula),
        FormExit(Formula),
    }
    let mut tmemo: HashMap<usize, u128> = HashMap::new();
    let mut fmemo: HashMap<usize, u128> = HashMap::new();
    let mut stack = vec![Frame::FormEnter(f.clone())];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::TermEnter(t) => {
                if tmemo.contains_key(&t.ptr_id()) {
                    continue;
                }
                match t.node() {
                    TermNode::Zero | TermNode::Var(_) => {
                        tmemo.insert(t.ptr_id(), 1);
                    }
                    TermNode::Succ(s) => {
                        let s = s.clone();
                        stack.push(Frame::TermExit(t.clone()));
                        stack.push(Frame::TermEnter(s));
                    }
                    TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                        let (l, r) = (l.clone(), r.clone());
                        stack.push(Frame::TermExit(t.clone()));
                        stack.push(Frame::TermEnter(l));
                        stack.push(Frame::TermEnter(r));
                    }
                }
            }
            Frame::TermExit(t) => {
                let n = match t.node() {
                    TermNode::Zero | TermNode::Var(_) => 1,
                    TermNode::Succ(s) => tmemo[&s.ptr_id()].saturating_add(1),
                    TermNode::Add(l, r) | TermNode::Mul(l, r) => tmemo[&l.ptr_id()]
                        .saturating_add(tmemo[&r.ptr_id()])
                        .saturating_add(1),
                };
                tmemo.insert(t.ptr_id(), n);
            }
            Frame::FormEnter(g) => {
                if fmemo.contains_key(&g.ptr_id()) {
                    continue;
                }
                match g.node() {
                    FormulaNode::Eq(l, r) => {
                        let (l, r) = (l.clone(), r.clone());
                        stack.push(Frame::FormExit(g.clone()));
                        stack.push(Frame::TermEnter(l));
                        stack.push(Frame::TermEnter(r));
                    }
                    FormulaNode::Not(h) | FormulaNode::Exists(_, h) => {
                        let h = h.clone();
                        stack.push(Frame::FormExit(g.clone()));
                        stack.push(Frame::FormEnter(h));
                    }
                    FormulaNode::Or(l, r) => {
                        let (l, r) = (l.clone(), r.clone());
                        stack.push(Frame::FormExit(g.clone()));
                        stack.push(Frame::FormEnter(l));
                        stack.push(Frame::FormEnter(r));
                    }
                }
            }
            Frame::FormExit(g) => {
                let n = match g.node() {
                    FormulaNode::Eq(l, r) => tmemo[&l.ptr_id()]
                        .saturating_add(tmemo[&r.ptr_id()])
                        .saturating_add(1),
                    FormulaNode::Not(h) | FormulaNode::Exists(_, h) => {
                        fmemo[&h.ptr_id()].saturating_add(1)
                    }
                    FormulaNode::Or(l, r) => fmemo[&l.ptr_id()]
                        .saturating_add(fmemo[&r.ptr_id()])
                        .saturating_add(1),
                };
                fmemo.insert(g.ptr_id(), n);
            }
        }
    }
    fmemo[&f.ptr_id()]
}

/// True when the fully unfolded tree (formula and term nodes) has at most
/// `cap` nodes.  Bails out as soon as the running count exceeds the cap, so
/// probing an enormous shared graph costs O(cap), not O(tree).
pub(crate) fn tree_size_at_most(f: &Formula, cap: u64) -> bool {
    enum Item {
        F(Formula),
        T(Term),
    }
    let mut count: u64 = 0;
    let mut stack = vec![Item::F(f.clone())];
    while let Some(item) = stack.pop() {
        count += 1;
        if count > cap {
            return false;
        }
        match item {
            Item::F(g) => match g.node() {
                FormulaNode::Eq(l, r) => {
                    stack.push(Item::T(l.clone()));
                    stack.push(Item::T(r.clone()));
                }
                FormulaNode::Not(h) | FormulaNode::Exists(_, h) => stack.push(Item::F(h.clone())),
                FormulaNode::Or(l, r) => {
                    stack.push(Item::F(l.clone()));
                    stack.push(Item::F(r.clone()));
                }
            },
            Item::T(t) => match t.node() {
                TermNode::Zero | TermNode::Var(_) => {}
                TermNode::Succ(s) => stack.push(Item::T(s.clone())),
                TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                    stack.push(Item::T(l.clone()));
                    stack.push(Item::T(r.clone()));
                }
            },
        }
    }
    true
}

/// Number of distinct shared nodes in the formula graph (formula nodes only).
pub fn shared_node_count(f: &Formula) -> usize {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut stack = vec![f.clone()];
    while let Some(g) = stack.pop() {
        if !seen.insert(g.ptr_id()) {
            continue;
        }
        stack.extend(g.direct_subformulas());
    }
    seen.len()
}

/// Syntactic depth.
///
/// Along each root-to-leaf path the measure counts one unit per quantifier,
/// one per kernel connective, and one for the terminal atom; the depth is
/// the maximum over paths.  One deliberate refinement: the eager expansion
/// of a conjunction (`!(!l | !r)`) counts as a single unit, so the measure
/// agrees with the printed form `l & r` rather than with its three-connective
/// encoding.  Without this the padded tautologies of [`build_eta`] would not
/// satisfy their documented depth `2b + 2`.
pub fn syntactic_depth(f: &Formula) -> u64 {
    let mut memo: HashMap<usize, u64> = HashMap::new();
    fn go(f: &Formula, memo: &mut HashMap<usize, u64>) -> u64 {
        if let Some(hit) = memo.get(&f.ptr_id()) {
            return *hit;
        }
        let d = if let Some((a, b)) = f.as_and() {
            1 + go(a, memo).max(go(b, memo))
        } else {
            match f.node() {
                FormulaNode::Eq(_, _) => 1,
                FormulaNode::Not(g) => 1 + go(g, memo),
                FormulaNode::Or(l, r) => 1 + go(l, memo).max(go(r, memo)),
                FormulaNode::Exists(_, g) => 1 + go(g, memo),
            }
        };
        memo.insert(f.ptr_id(), d);
        d
    }
    go(f, &mut memo)
}

// ---------------------------------------------------------------------------
// Valuations
// ---------------------------------------------------------------------------

/// A finite assignment of natural-number values to variables.
///
/// A valuation is admissible for a formula when its domain covers every free
/// variable; extra entries are allowed and ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(BTreeMap<VarIndex, u64>);

impl Valuation {
    /// The empty valuation.
    pub fn new() -> Valuation {
        Valuation(BTreeMap::new())
    }

    /// Value assigned to `v`, if any.
    pub fn get(&self, v: VarIndex) -> Option<u64> {
        self.0.get(&v).copied()
    }

    /// Add or replace an assignment.
    pub fn set(&mut self, v: VarIndex, value: u64) {
        self.0.insert(v, value);
    }

    /// Iterate over the assignments in increasing variable order.
    pub fn entries(&self) -> impl Iterator<Item = (VarIndex, u64)> + '_ {
        self.0.iter().map(|(v, x)| (*v, *x))
    }

    /// The assigned variables.
    pub fn domain(&self) -> impl Iterator<Item = VarIndex> + '_ {
        self.0.keys().copied()
    }

    /// Number of assignments.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when no variable is assigned.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restrict to the given variable set.
    pub fn restrict(&self, vars: &BTreeSet<VarIndex>) -> Valuation {
        Valuation(
            self.0
                .iter()
                .filter(|(v, _)| vars.contains(v))
                .map(|(v, x)| (*v, *x))
                .collect(),
        )
    }
}

impl FromIterator<(VarIndex, u64)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (VarIndex, u64)>>(iter: I) -> Valuation {
        Valuation(iter.into_iter().collect())
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, x) in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "v{v}={x}")?;
            first = false;
        }
        Ok(())
    }
}

/// Replace every free variable by the numeral of its value under `a`.
///
/// Errors with [`SyntaxError::InadmissibleValuation`] when some free variable
/// has no value.  Bound occurrences and spare valuation entries are ignored.
pub fn apply_valuation(f: &Formula, a: &Valuation) -> Result<Formula, SyntaxError> {
    let fv = free_vars(f);
    let mut subst = BTreeMap::new();
    for v in &fv {
        match a.get(*v) {
            Some(x) => {
                subst.insert(*v, Term::numeral(x));
            }
            None => return Err(SyntaxError::InadmissibleValuation { var: *v }),
        }
    }
    f.substitute(&subst)
}

// ---------------------------------------------------------------------------
// The eta family
// ---------------------------------------------------------------------------

/// The padded tautology `eta_b`:
///
/// ```text
/// E x1. ... E xb. ((((v = v & x0 = x0) & x1 = x1) & ...) & xb = xb)
/// ```
///
/// with `v` fixed as variable index 0 and `x_i` as index `i + 1`.  The
/// variables `v` and `x0` occur free; `x1 ... xb` are bound.  The formula is
/// valid over the standard model, and its syntactic depth is exactly
/// `2b + 2`: `b` quantifiers, `b + 1` conjunction units, and one atom.
///
/// Errors with [`SyntaxError::InvalidParameter`] when `b = 0`.
pub fn build_eta(b: u64) -> Result<Formula, SyntaxError> {
    if b == 0 {
        return Err(SyntaxError::InvalidParameter(
            "eta parameter must be at least 1".into(),
        ));
    }
    let atom = |v: VarIndex| Formula::eq(Term::var(v), Term::var(v));
    let mut matrix = atom(0);
    for i in 0..=b {
        matrix = Formula::and(matrix, atom(i + 1));
    }
    let mut f = matrix;
    for i in (1..=b).rev() {
        f = Formula::exists(i + 1, f);
    }
    Ok(f)
}

/// Close `eta_b` into a sentence: `v` becomes the numeral of `x` and the
/// spare free variable `x0` is pinned to the numeral `0`.
pub fn close_eta(b: u64, x: u64) -> Result<Formula, SyntaxError> {
    let eta = build_eta(b)?;
    let mut subst = BTreeMap::new();
    subst.insert(0, Term::numeral(x));
    subst.insert(1, Term::numeral(0));
    eta.substitute(&subst)
}

#[cfg(test)]
mod tests;
