//! Bounded compositional truth evaluation over the standard model, a
//! propositional evaluator over designated atoms, and truth oracles.
//!
//! Truth over the naturals is undecidable, so the evaluator is three-valued:
//! `True` and `False` are sound, and `Unknown` records that an unbounded
//! witness search or a step budget cut the evaluation short.  `False` for an
//! existential is emitted only when a syntactic analysis of the matrix proves
//! the witness search complete — see [`Budget`] and the bound-detection notes
//! on [`eval_sentence`].
//!
//! The conformance checkers for the compositional axiom lists live in
//! [`ct_check`] and are re-exported here.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use thiserror::Error;

use crate::syntax::{
    free_vars_memo, tree_size_at_most, Formula, FormulaNode, Term, TermNode, Valuation, VarIndex,
};

mod ct_check;

pub use ct_check::{
    check_ct_axioms, check_ct_restricted, ClauseReport, CtReport, CtViolation, Cut,
};

/// Errors raised by the evaluators.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// A closed-term evaluation met a variable.
    #[error("term is not closed: v{var} occurs")]
    OpenTerm { var: VarIndex },
    /// Sentence-level evaluation was asked about an open formula.
    #[error("formula is not a sentence: v{var} is free")]
    NotASentence { var: VarIndex },
    /// Propositional evaluation reached a leaf that is not a designated atom.
    #[error("formula leaf is not a designated atom: {leaf:?}")]
    MissingAtom { leaf: Formula },
}

/// Outcome of a three-valued judgment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// Sound affirmation.
    True,
    /// Sound refutation.
    False,
    /// The budget or an unbounded search prevented a decision.
    Unknown,
}

impl Verdict {
    /// Kleene negation.
    pub fn negate(self) -> Verdict {
        match self {
            Verdict::True => Verdict::False,
            Verdict::False => Verdict::True,
            Verdict::Unknown => Verdict::Unknown,
        }
    }

    /// Kleene disjunction.
    pub fn or(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::True, _) | (_, Verdict::True) => Verdict::True,
            (Verdict::False, Verdict::False) => Verdict::False,
            _ => Verdict::Unknown,
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::True, Verdict::True) => Verdict::True,
            _ => Verdict::Unknown,
        }
    }

    /// True exactly for `Verdict::True`.
    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    /// True exactly for `Verdict::False`.
    pub fn is_false(self) -> bool {
        self == Verdict::False
    }

    /// True for `True` or `False`.
    pub fn is_decided(self) -> bool {
        self != Verdict::Unknown
    }
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Verdict {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::True => write!(f, "True"),
            Verdict::False => write!(f, "False"),
            Verdict::Unknown => write!(f, "Unknown"),
        }
    }
}

/// Resource limits for one evaluation.
///
/// `witness_bound` caps the values tried for each existential witness;
/// `node_budget` caps the number of evaluation steps.  Both are clamped to at
/// least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest witness value tried for an existential quantifier.
    pub witness_bound: u64,
    /// Maximum number of formula-node evaluation steps.
    pub node_budget: u64,
}

impl Budget {
    /// Build a budget, clamping both components to at least 1.
    pub fn new(witness_bound: u64, node_budget: u64) -> Budget {
        Budget {
            witness_bound: witness_bound.max(1),
            node_budget: node_budget.max(1),
        }
    }
}

impl Default for Budget {
    fn default() -> Budget {
        Budget::new(64, 100_000)
    }
}

// ---------------------------------------------------------------------------
// Closed-term evaluation
// ---------------------------------------------------------------------------

/// Value of a closed term, computed exactly.
///
/// Iterative, so numerals of any depth are safe.
pub fn eval_closed_term(t: &Term) -> Result<BigUint, EvalError> {
    let mut memo: HashMap<usize, BigUint> = HashMap::new();
    closed_term_value(t, &mut memo)
}

fn closed_term_value(
    t: &Term,
    memo: &mut HashMap<usize, BigUint>,
) -> Result<BigUint, EvalError> {
    enum Frame {
        Enter(Term),
        Exit(Term),
    }
    let mut stack = vec![Frame::Enter(t.clone())];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(u) => {
                if memo.contains_key(&u.ptr_id()) {
                    continue;
                }
                match u.node() {
                    TermNode::Zero => {
                        memo.insert(u.ptr_id(), BigUint::from(0u32));
                    }
                    TermNode::Var(v) => return Err(EvalError::OpenTerm { var: *v }),
                    TermNode::Succ(s) => {
                        let s = s.clone();
                        stack.push(Frame::Exit(u.clone()));
                        stack.push(Frame::Enter(s));
                    }
                    TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                        let (l, r) = (l.clone(), r.clone());
                        stack.push(Frame::Exit(u.clone()));
                        stack.push(Frame::Enter(l));
                        stack.push(Frame::Enter(r));
                    }
                }
            }
            Frame::Exit(u) => {
                let value = match u.node() {
                    TermNode::Succ(s) => &memo[&s.ptr_id()] + 1u32,
                    TermNode::Add(l, r) => &memo[&l.ptr_id()] + &memo[&r.ptr_id()],
                    TermNode::Mul(l, r) => &memo[&l.ptr_id()] * &memo[&r.ptr_id()],
                    _ => unreachable!(),
                };
                memo.insert(u.ptr_id(), value);
            }
        }
    }
    Ok(memo[&t.ptr_id()].clone())
}

// ---------------------------------------------------------------------------
// The three-valued engine
// ---------------------------------------------------------------------------

/// When a persistent cache grows past this many entries it is cleared
/// outright.  Clearing is always sound — entries are pure memoization — and
/// it also releases the guard clones that keep keyed node addresses alive.
const PERSISTENT_CACHE_CAP: usize = 4096;

/// Caches that outlive a single judgment.  Both are keyed by node address
/// and store a clone of the keyed object, so an address can never be
/// recycled while its entry is live.
struct EvalCaches {
    /// Verdicts of closed formulas.
    sentence_verdicts: HashMap<usize, (Formula, Verdict)>,
    /// Values of closed terms (roots only).
    closed_values: HashMap<usize, (Term, BigUint)>,
}

impl EvalCaches {
    fn new() -> EvalCaches {
        EvalCaches {
            sentence_verdicts: HashMap::new(),
            closed_values: HashMap::new(),
        }
    }
}

/// One evaluation context: the persistent caches plus per-call scratch.
/// The scratch maps are keyed by node address without guards, which is
/// sound because the judged formula (and thus every node under it) outlives
/// the context.
struct EvalCtx<'a> {
    budget: Budget,
    steps: u64,
    budget_hit: bool,
    caches: &'a mut EvalCaches,
    /// Free-variable sets of nodes under the formula being judged.
    fv: HashMap<usize, Rc<BTreeSet<VarIndex>>>,
    /// Verdicts of open subformulas under their restricted environments.
    open_verdicts: HashMap<(usize, Vec<(VarIndex, u64)>), Verdict>,
}

/// What the syntactic analysis of an existential matrix establishes about
/// the witness search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SearchWindow {
    /// Some conjunct of the matrix is unsatisfiable; the existential is false.
    Empty,
    /// Any witness must be at most the given value; searching `0..=hi`
    /// decides the existential completely.
    UpTo(u64),
    /// No bound was established; only `True` and `Unknown` are reachable.
    Unbounded,
}

impl<'a> EvalCtx<'a> {
    fn new(budget: Budget, caches: &'a mut EvalCaches) -> EvalCtx<'a> {
        EvalCtx {
            budget,
            steps: 0,
            budget_hit: false,
            caches,
            fv: HashMap::new(),
            open_verdicts: HashMap::new(),
        }
    }

    fn free_vars_of(&mut self, f: &Formula) -> Rc<BTreeSet<VarIndex>> {
        free_vars_memo(f, &mut self.fv)
    }

    /// Value of a term under the environment.  The caller guarantees that
    /// the environment covers every variable of the term.
    fn term_value(&mut self, t: &Term, env: &Valuation) -> BigUint {
        if let Some((_, v)) = self.caches.closed_values.get(&t.ptr_id()) {
            return v.clone();
        }
        if t.is_closed() {
            let mut local: HashMap<usize, BigUint> = HashMap::new();
            let value = closed_term_value(t, &mut local)
                .expect("a closed term evaluates without free variables");
            if self.caches.closed_values.len() >= PERSISTENT_CACHE_CAP {
                self.caches.closed_values.clear();
            }
            self.caches
                .closed_values
                .insert(t.ptr_id(), (t.clone(), value.clone()));
            return value;
        }
        // Open term: walk successor spines iteratively (they can be long),
        // recurse only at binary operators, and let closed children take the
        // cached path above.
        let mut succs: u64 = 0;
        let mut cur = t.clone();
        loop {
            match cur.node() {
                TermNode::Zero => return BigUint::from(succs),
                TermNode::Succ(s) => {
                    succs += 1;
                    let next = s.clone();
                    cur = next;
                }
                TermNode::Var(v) => {
                    let base = env
                        .get(*v)
                        .expect("environment covers every free variable during evaluation");
                    return BigUint::from(base) + succs;
                }
                TermNode::Add(l, r) => {
                    let (l, r) = (l.clone(), r.clone());
                    return self.term_value(&l, env) + self.term_value(&r, env) + succs;
                }
                TermNode::Mul(l, r) => {
                    let (l, r) = (l.clone(), r.clone());
                    return self.term_value(&l, env) * self.term_value(&r, env) + succs;
                }
            }
        }
    }

    fn eval(&mut self, f: &Formula, env: &Valuation) -> Verdict {
        self.steps += 1;
        if self.steps > self.budget.node_budget {
            self.budget_hit = true;
            return Verdict::Unknown;
        }
        let fv = self.free_vars_of(f);
        let closed = fv.is_empty();
        // Equations are not memoized: they are cheap to recompute (their
        // closed terms hit the value cache) and they dominate the node count
        // inside witness loops, where each environment is visited once.
        let memoize = !matches!(f.node(), FormulaNode::Eq(_, _));
        let mut key = (f.ptr_id(), Vec::new());
        if closed {
            if let Some((_, verdict)) = self.caches.sentence_verdicts.get(&f.ptr_id()) {
                return *verdict;
            }
        } else if memoize {
            key.1 = fv
                .iter()
                .map(|v| {
                    (
                        *v,
                        env.get(*v)
                            .expect("environment covers every free variable during evaluation"),
                    )
                })
                .collect();
            if let Some(verdict) = self.open_verdicts.get(&key) {
                return *verdict;
            }
        }
        let hits_before = self.budget_hit;
        let verdict = match f.node() {
            FormulaNode::Eq(l, r) => {
                Verdict::from(self.term_value(l, env) == self.term_value(r, env))
            }
            FormulaNode::Not(g) => self.eval(g, env).negate(),
            FormulaNode::Or(l, r) => {
                let lv = self.eval(l, env);
                if lv == Verdict::True {
                    Verdict::True
                } else {
                    lv.or(self.eval(r, env))
                }
            }
            FormulaNode::Exists(v, body) => self.eval_exists(*v, body, env),
        };
        // A True/False verdict is budget-independent and safe to keep.  An
        // Unknown is cached only when no budget exhaustion occurred anywhere
        // below it, i.e. it reflects a genuinely unbounded search under this
        // context's fixed witness bound.
        let cacheable = verdict.is_decided() || (!self.budget_hit && !hits_before);
        if closed && cacheable {
            if self.caches.sentence_verdicts.len() >= PERSISTENT_CACHE_CAP {
                self.caches.sentence_verdicts.clear();
            }
            self.caches
                .sentence_verdicts
                .insert(f.ptr_id(), (f.clone(), verdict));
        } else if memoize && !closed {
            self.open_verdicts.insert(key, verdict);
        }
        verdict
    }

    fn eval_exists(&mut self, v: VarIndex, body: &Formula, env: &Valuation) -> Verdict {
        let window = analyze_witness_window(v, body, env);
        let (hi, complete) = match window {
            SearchWindow::Empty => return Verdict::False,
            SearchWindow::UpTo(hi) => (hi.min(self.budget.witness_bound), hi <= self.budget.witness_bound),
            SearchWindow::Unbounded => (self.budget.witness_bound, false),
        };
        let mut saw_unknown = false;
        let mut inner = env.clone();
        for x in 0..=hi {
            inner.set(v, x);
            match self.eval(body, &inner) {
                Verdict::True => return Verdict::True,
                Verdict::Unknown => saw_unknown = true,
                Verdict::False => {}
            }
        }
        if complete && !saw_unknown {
            Verdict::False
        } else {
            Verdict::Unknown
        }
    }
}

// ---------------------------------------------------------------------------
// Witness-window analysis
// ---------------------------------------------------------------------------

/// Split a matrix into conjuncts through the kernel encoding of conjunction:
/// `!(a | b)` contributes the conjuncts of `!a` and `!b`, with double
/// negations collapsed.
fn kernel_conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    if let FormulaNode::Not(inner) = f.node() {
        if let FormulaNode::Or(l, r) = inner.node() {
            kernel_conjuncts(&negate_collapsed(l), out);
            kernel_conjuncts(&negate_collapsed(r), out);
            return;
        }
    }
    out.push(f.clone());
}

fn negate_collapsed(f: &Formula) -> Formula {
    match f.node() {
        FormulaNode::Not(inner) => inner.clone(),
        _ => Formula::not(f.clone()),
    }
}

/// Strip a (possibly empty) block of existential quantifiers.
fn strip_exists(f: &Formula) -> (BTreeSet<VarIndex>, Formula) {
    let mut stripped = BTreeSet::new();
    let mut cur = f.clone();
    while let FormulaNode::Exists(w, body) = cur.node() {
        stripped.insert(*w);
        let body = body.clone();
        cur = body;
    }
    (stripped, cur)
}

/// True when the value of `s` is at least the value of `v` under every
/// assignment to `v` (other variables fixed by `env`, variables in `zeroed`
/// treated as potentially 0).  Successor spines are walked iteratively so
/// numerals of any depth are safe.
fn term_dominates_var(
    s: &Term,
    v: VarIndex,
    env: &Valuation,
    zeroed: &BTreeSet<VarIndex>,
) -> bool {
    let mut cur = s.clone();
    loop {
        match cur.node() {
            TermNode::Succ(inner) => {
                let next = inner.clone();
                cur = next;
            }
            TermNode::Var(w) => return *w == v,
            TermNode::Add(l, r) => {
                return term_dominates_var(l, v, env, zeroed)
                    || term_dominates_var(r, v, env, zeroed)
            }
            TermNode::Mul(l, r) => {
                return (term_dominates_var(l, v, env, zeroed)
                    && term_min_value(r, env, zeroed) >= 1)
                    || (term_dominates_var(r, v, env, zeroed)
                        && term_min_value(l, env, zeroed) >= 1)
            }
            TermNode::Zero => return false,
        }
    }
}

/// A lower bound on the value of `s` over all assignments to variables in
/// `zeroed` (and to any variable missing from `env`).  Saturating, which
/// keeps it a sound lower bound.
fn term_min_value(s: &Term, env: &Valuation, zeroed: &BTreeSet<VarIndex>) -> u64 {
    let mut succs: u64 = 0;
    let mut cur = s.clone();
    let base = loop {
        match cur.node() {
            TermNode::Succ(inner) => {
                succs = succs.saturating_add(1);
                let next = inner.clone();
                cur = next;
            }
            TermNode::Zero => break 0,
            TermNode::Add(l, r) => {
                break term_min_value(l, env, zeroed)
                    .saturating_add(term_min_value(r, env, zeroed))
            }
            TermNode::Mul(l, r) => {
                break term_min_value(l, env, zeroed)
                    .saturating_mul(term_min_value(r, env, zeroed))
            }
            TermNode::Var(w) => {
                break if zeroed.contains(w) {
                    0
                } else {
                    env.get(*w).unwrap_or(0)
                }
            }
        }
    };
    base.saturating_add(succs)
}

/// If the range of `t` over all assignments of the variables in `ws` is
/// exactly the upward-closed set `{m, m+1, ...}`, return `Some(m)`.
/// Arithmetic is checked: an overflowing bound is reported as no bound.
fn cover_min(t: &Term, ws: &BTreeSet<VarIndex>, env: &Valuation) -> Option<u64> {
    // Fixed terms do not mention the range variables and are covered by the
    // environment, so they have an exact value.
    let fixed_value = |u: &Term| -> Option<u64> {
        let uv = u.vars();
        if uv.iter().any(|w| ws.contains(w)) || uv.iter().any(|w| env.get(*w).is_none()) {
            return None;
        }
        term_env_value(u, env)
    };
    let mut succs: u64 = 0;
    let mut cur = t.clone();
    let base = loop {
        match cur.node() {
            TermNode::Succ(inner) => {
                succs = succs.checked_add(1)?;
                let next = inner.clone();
                cur = next;
            }
            TermNode::Var(w) if ws.contains(w) => break Some(0),
            TermNode::Add(l, r) => {
                if let (Some(a), Some(b)) = (cover_min(l, ws, env), cover_min(r, ws, env)) {
                    break a.checked_add(b);
                }
                if let (Some(a), Some(b)) = (cover_min(l, ws, env), fixed_value(r)) {
                    break a.checked_add(b);
                }
                if let (Some(a), Some(b)) = (fixed_value(l), cover_min(r, ws, env)) {
                    break a.checked_add(b);
                }
                break None;
            }
            TermNode::Mul(l, r) => {
                if fixed_value(l) == Some(1) {
                    break cover_min(r, ws, env);
                }
                if fixed_value(r) == Some(1) {
                    break cover_min(l, ws, env);
                }
                break None;
            }
            _ => break None,
        }
    };
    base?.checked_add(succs)
}

/// Analyze the matrix of `E v. body` under `env` and classify how far the
/// witness search must go.
///
/// The rules are conservative and each is justified by a domination argument:
///
/// - An equation conjunct (under an optional block of inner existentials)
///   `s = t` where `s` dominates `v`, while `t` avoids `v` and the inner
///   block, caps witnesses at the value of `t`.
/// - A negated inner existential `!E w.. (s = t)` where `s` dominates `v` and
///   avoids the block, and `t`'s range over the block covers all values from
///   some `m` upward, makes the conjunct false for every witness `>= m`.
/// - A pair of conjuncts `c` and `!c` makes the matrix unsatisfiable.
///
/// Anything else leaves the search unbounded; in particular a bare negated
/// tautology like `!(v = v)` is *not* special-cased, so `E v. !(v = v)`
/// evaluates to Unknown rather than False.
fn analyze_witness_window(v: VarIndex, body: &Formula, env: &Valuation) -> SearchWindow {
    let mut conjuncts = Vec::new();
    kernel_conjuncts(body, &mut conjuncts);

    // Contradictory pair: some conjunct is the negation of another.
    for c in &conjuncts {
        if let FormulaNode::Not(inner) = c.node() {
            if conjuncts.iter().any(|d| d == inner) {
                return SearchWindow::Empty;
            }
        }
    }

    let no_vars_from = |t: &Term, forbidden: &BTreeSet<VarIndex>, v_too: bool| -> bool {
        let tv = t.vars();
        if v_too && tv.contains(&v) {
            return false;
        }
        tv.iter().all(|w| !forbidden.contains(w))
    };
    let env_covers = |t: &Term| -> bool { t.vars().iter().all(|w| *w == v || env.get(*w).is_some()) };

    let mut best: Option<u64> = None;
    let mut tighten = |hi: u64| {
        best = Some(match best {
            None => hi,
            Some(b) => b.min(hi),
        });
    };

    for c in &conjuncts {
        // Positive rule: (E w.. ) s = t caps v at the value of t.
        let (ws, core) = strip_exists(c);
        if let FormulaNode::Eq(l, r) = core.node() {
            for (s, t) in [(l, r), (r, l)] {
                let t_ok = !t.vars().contains(&v)
                    && no_vars_from(t, &ws, false)
                    && env_covers(t)
                    && t.vars().iter().all(|w| env.get(*w).is_some() || *w == v);
                if t_ok
                    && s.vars().contains(&v)
                    && term_dominates_var(s, v, env, &ws)
                {
                    let value = if t.is_closed() {
                        let mut scratch: HashMap<usize, BigUint> = HashMap::new();
                        closed_term_value(t, &mut scratch)
                            .ok()
                            .and_then(|val| val.to_u64())
                    } else {
                        term_env_value(t, env)
                    };
                    if let Some(hi) = value {
                        tighten(hi);
                    }
                }
            }
            continue;
        }

        // Negative rule: !(E w.. s = t) is false wherever t's range covers
        // the value of s.
        if let FormulaNode::Not(inner) = c.node() {
            let (ws, core) = strip_exists(inner);
            if ws.is_empty() {
                continue;
            }
            if let FormulaNode::Eq(l, r) = core.node() {
                for (s, t) in [(l, r), (r, l)] {
                    let s_ok = s.vars().contains(&v)
                        && no_vars_from(s, &ws, false)
                        && term_dominates_var(s, v, env, &BTreeSet::new());
                    let t_ok = !t.vars().contains(&v)
                        && t.vars().iter().all(|w| ws.contains(w) || env.get(*w).is_some());
                    if s_ok && t_ok {
                        if let Some(m) = cover_min(t, &ws, env) {
                            // The conjunct fails for every witness >= m.
                            if m == 0 {
                                return SearchWindow::Empty;
                            }
                            tighten(m - 1);
                        }
                    }
                }
            }
        }
    }

    match best {
        Some(hi) => SearchWindow::UpTo(hi),
        None => SearchWindow::Unbounded,
    }
}

/// Exact value of a term whose variables are all covered by `env`, or `None`
/// when a variable is missing or the value does not fit in a machine word
/// (in which case the detector simply claims no bound).  Successor spines
/// are walked iteratively.
fn term_env_value(t: &Term, env: &Valuation) -> Option<u64> {
    let mut succs: u64 = 0;
    let mut cur = t.clone();
    let base = loop {
        match cur.node() {
            TermNode::Succ(inner) => {
                succs = succs.checked_add(1)?;
                let next = inner.clone();
                cur = next;
            }
            TermNode::Zero => break 0u64,
            TermNode::Add(l, r) => {
                break term_env_value(l, env)?.checked_add(term_env_value(r, env)?)?
            }
            TermNode::Mul(l, r) => {
                break term_env_value(l, env)?.checked_mul(term_env_value(r, env)?)?
            }
            TermNode::Var(w) => break env.get(*w)?,
        }
    };
    base.checked_add(succs)
}

/// The complete witness window of a sentence-level existential, if the
/// analysis can certify one.  `Some(None)` means the matrix is
/// unsatisfiable; `Some(Some(hi))` means searching `0..=hi` is complete.
pub(crate) fn certified_witness_window(f: &Formula) -> Option<Option<u64>> {
    if let FormulaNode::Exists(v, body) = f.node() {
        match analyze_witness_window(*v, body, &Valuation::new()) {
            SearchWindow::Empty => Some(None),
            SearchWindow::UpTo(hi) => Some(Some(hi)),
            SearchWindow::Unbounded => None,
        }
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Public evaluation entry points
// ---------------------------------------------------------------------------

/// Evaluate a sentence over the standard model under the given budget.
///
/// Compositional and three-valued: equations are decided exactly; negation
/// flips; disjunction is the Kleene join; an existential searches witnesses
/// up to the budget's bound and is refuted only when the witness-window
/// analysis proves the search complete.  Verdicts are monotone in the
/// budget: a True/False never flips under a larger budget.
pub fn eval_sentence(s: &Formula, budget: Budget) -> Result<Verdict, EvalError> {
    let mut caches = EvalCaches::new();
    let mut ctx = EvalCtx::new(budget, &mut caches);
    if let Some(v) = ctx.free_vars_of(s).iter().next().copied() {
        return Err(EvalError::NotASentence { var: v });
    }
    Ok(ctx.eval(s, &Valuation::new()))
}

// ---------------------------------------------------------------------------
// Propositional evaluation over designated atoms
// ---------------------------------------------------------------------------

/// A finite assignment of truth values to designated atom sentences.
///
/// Lookups try node identity first, then structural equality for small
/// equation- or quantifier-rooted formulas, so both shared subtrees and
/// freshly substituted copies of an atom are recognized.
#[derive(Debug, Default)]
pub struct AtomTable {
    by_ptr: HashMap<usize, (Formula, bool)>,
    by_structure: HashMap<Formula, bool>,
}

/// Structural lookup is restricted to small trees so that probing an
/// enormous shared graph never unfolds it.
const STRUCTURAL_ATOM_CAP: u64 = 1024;

impl AtomTable {
    /// An empty table.
    pub fn new() -> AtomTable {
        AtomTable::default()
    }

    /// Designate `f` as an atom with the given truth value.
    pub fn insert(&mut self, f: Formula, value: bool) {
        if matches!(f.node(), FormulaNode::Eq(_, _) | FormulaNode::Exists(_, _))
            && tree_size_at_most(&f, STRUCTURAL_ATOM_CAP)
        {
            self.by_structure.insert(f.clone(), value);
        }
        self.by_ptr.insert(f.ptr_id(), (f, value));
    }

    /// The designated value of `f`, if `f` is an atom of this table.
    pub fn lookup(&self, f: &Formula) -> Option<bool> {
        if let Some((_, value)) = self.by_ptr.get(&f.ptr_id()) {
            return Some(*value);
        }
        if !self.by_structure.is_empty()
            && matches!(f.node(), FormulaNode::Eq(_, _) | FormulaNode::Exists(_, _))
            && tree_size_at_most(f, STRUCTURAL_ATOM_CAP)
        {
            return self.by_structure.get(f).copied();
        }
        None
    }

    /// Number of designated atoms (by identity).
    pub fn len(&self) -> usize {
        self.by_ptr.len()
    }

    /// True when no atom is designated.
    pub fn is_empty(&self) -> bool {
        self.by_ptr.is_empty()
    }
}

/// Two-valued propositional evaluation treating table entries as atoms.
///
/// Every node is looked up before being decomposed, so any sentence — not
/// just an equation — can serve as an atom.  Reaching an equation or a
/// quantifier that is not in the table is an error: propositional structure
/// ends there.
pub fn eval_prop(f: &Formula, atoms: &AtomTable) -> Result<bool, EvalError> {
    if let Some(value) = atoms.lookup(f) {
        return Ok(value);
    }
    match f.node() {
        FormulaNode::Not(g) => Ok(!eval_prop(g, atoms)?),
        FormulaNode::Or(l, r) => Ok(eval_prop(l, atoms)? || eval_prop(r, atoms)?),
        FormulaNode::Eq(_, _) | FormulaNode::Exists(_, _) => {
            Err(EvalError::MissingAtom { leaf: f.clone() })
        }
    }
}

// ---------------------------------------------------------------------------
// Truth oracles
// ---------------------------------------------------------------------------

/// A deterministic judge of sentences.
///
/// Implementations must be deterministic: repeated judgments of equal
/// sentences agree.  Memoizing implementations confine their caches behind
/// interior mutability and are not thread-safe unless documented otherwise.
pub trait TruthOracle {
    /// Judge a sentence.  Implementations may return `Unknown` on input they
    /// cannot decide (including non-sentences).
    fn judge(&self, s: &Formula) -> Verdict;
}

/// Bounded compositional truth over the standard model.
///
/// Caches sentence verdicts and closed-term values across judgments.  The
/// budget is fixed per oracle, which keeps the persistent
/// caches sound: cached Unknowns are only reused under the same budget that
/// produced them.
pub struct StandardModelOracle {
    budget: Budget,
    caches: RefCell<EvalCaches>,
}

impl StandardModelOracle {
    /// An oracle with the given fixed budget.
    pub fn new(budget: Budget) -> StandardModelOracle {
        StandardModelOracle {
            budget,
            caches: RefCell::new(EvalCaches::new()),
        }
    }

    /// The oracle's budget.
    pub fn budget(&self) -> Budget {
        self.budget
    }
}

impl TruthOracle for StandardModelOracle {
    fn judge(&self, s: &Formula) -> Verdict {
        let mut caches = self.caches.borrow_mut();
        let mut ctx = EvalCtx::new(self.budget, &mut caches);
        if !ctx.free_vars_of(s).is_empty() {
            return Verdict::Unknown;
        }
        ctx.eval(s, &Valuation::new())
    }
}

/// Judges sentences by propositional evaluation over a fixed atom table;
/// anything outside the propositional closure of the atoms is Unknown.
pub struct PropositionalOracle {
    atoms: AtomTable,
}

impl PropositionalOracle {
    /// Build from a prepared atom table.
    pub fn new(atoms: AtomTable) -> PropositionalOracle {
        PropositionalOracle { atoms }
    }

    /// The designated atoms.
    pub fn atoms(&self) -> &AtomTable {
        &self.atoms
    }
}

impl TruthOracle for PropositionalOracle {
    fn judge(&self, s: &Formula) -> Verdict {
        match eval_prop(s, &self.atoms) {
            Ok(b) => Verdict::from(b),
            Err(_) => Verdict::Unknown,
        }
    }
}

/// Judges by membership in an explicit set of sentences: everything in the
/// set is True, everything else is False.  Deliberately non-compositional —
/// the conformance checkers use it to manufacture axiom violations.
pub struct TableOracle {
    truths: HashSet<Formula>,
}

impl TableOracle {
    /// Build from the sentences to be judged True.
    pub fn new<I: IntoIterator<Item = Formula>>(truths: I) -> TableOracle {
        TableOracle {
            truths: truths.into_iter().collect(),
        }
    }
}

impl TruthOracle for TableOracle {
    fn judge(&self, s: &Formula) -> Verdict {
        Verdict::from(self.truths.contains(s))
    }
}
