//! Rank measures for one-variable formulas against finite formula ladders.
//!
//! A *ladder* ([`TypeSpec`]) is a finite list of one-variable formulas.  The
//! rank of a formula measures how many consecutive ladder checks its
//! extension survives; [`p_rank`] computes it by bounded search against a
//! [`TruthOracle`].  The module also provides the sentence builders that
//! express single rank checks ([`build_alpha_p`], [`build_beta_p`]), the
//! self-referential sequence generator built from disjunctions with stopping
//! conditions ([`gamma_sequence_p`]), and the trajectory dichotomy checker
//! ([`check_rank_trajectory`]).  Submodules instantiate the same walk for
//! truth-biconditional checks over coded instances ([`utb_rank`]) and for
//! padded-tautology ladders with singleton extensions
//! ([`ext_rank_trajectory`]).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::evaluation::{TruthOracle, Verdict};
use crate::stopdisj::{build_stop_disjunction, StopDisjError, StopDisjSpec};
use crate::syntax::{free_vars, max_var_index, Formula, SyntaxError, Term, VarIndex};

mod ext;
mod utb;

pub use ext::{ext_rank_trajectory, gamma_sequence_ext, gamma_stages_ext, GammaStages};
pub use utb::{build_alpha_utb, build_beta_utb, induction_instance, utb_rank};

/// Errors raised by rank computations and their formula builders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    /// A rank subject or ladder entry has two or more free variables.
    #[error("formula has more than one free variable: v{first} and v{second} are both free")]
    TooManyFreeVars { first: VarIndex, second: VarIndex },
    /// An index points past the end of a ladder or level table.
    #[error("index {index} is out of range for a table of {len} entries")]
    IndexOutOfRange { index: u64, len: u64 },
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },
    /// A predicate argument has the wrong number of free variables.
    #[error("predicate argument must have at most one free variable, found {count}")]
    WrongArity { count: usize },
    /// A generated disjunction specification was rejected.
    #[error(transparent)]
    Construction(#[from] StopDisjError),
}

impl From<SyntaxError> for RankError {
    fn from(e: SyntaxError) -> RankError {
        RankError::InvalidParameter {
            reason: e.to_string(),
        }
    }
}

// ---------------------------------------------------------------------------
// The rank lattice
// ---------------------------------------------------------------------------

/// Outcome of a rank computation.
///
/// `Finite(n)` is an exact, certified value: checks `0..n` passed and check
/// `n` was refuted.  `AtLeast(n)` records bounded-verification honesty: the
/// first `n` checks passed but check `n` could not be decided, so the true
/// value is `n` or larger.  `Infinity` is emitted only when a finite check
/// list was verified in full.  `MinusInfinity` means the subject's extension
/// was certified empty (no check applies to anything).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rank {
    /// Certified empty extension.
    MinusInfinity,
    /// Exact rank: the first refuted check.
    Finite(u64),
    /// Verification stalled; the rank is this value or larger.
    AtLeast(u64),
    /// Every listed check verified.
    Infinity,
}

impl Rank {
    /// True when the rank certifies a value of at least `n`.
    pub fn at_least(&self, n: u64) -> bool {
        match self {
            Rank::MinusInfinity => false,
            Rank::Finite(m) | Rank::AtLeast(m) => *m >= n,
            Rank::Infinity => true,
        }
    }

    /// True when the rank certifies a value of at most `n`.
    pub fn at_most(&self, n: u64) -> bool {
        match self {
            Rank::MinusInfinity => true,
            Rank::Finite(m) => *m <= n,
            Rank::AtLeast(_) | Rank::Infinity => false,
        }
    }

    /// True for the two maximal verdicts a trajectory can end in: full
    /// verification or a stall.
    pub fn is_max(&self) -> bool {
        matches!(self, Rank::Infinity | Rank::AtLeast(_))
    }
}

/// The order is total on `{MinusInfinity, Finite(n), Infinity}`, with
/// `MinusInfinity` minimal and `Infinity` maximal.  `AtLeast(n)` sits above
/// every `Finite(m)` with `m < n` and below `Infinity`; its comparison with
/// `Finite(m)` for `m >= n` and with a different `AtLeast` is undefined,
/// because the underlying true values could fall either way.
impl PartialOrd for Rank {
    fn partial_cmp(&self, other: &Rank) -> Option<Ordering> {
        use Rank::*;
        match (self, other) {
            (MinusInfinity, MinusInfinity) | (Infinity, Infinity) => Some(Ordering::Equal),
            (AtLeast(a), AtLeast(b)) => (a == b).then_some(Ordering::Equal),
            (MinusInfinity, _) => Some(Ordering::Less),
            (_, MinusInfinity) => Some(Ordering::Greater),
            (Infinity, _) => Some(Ordering::Greater),
            (_, Infinity) => Some(Ordering::Less),
            (Finite(a), Finite(b)) => Some(a.cmp(b)),
            (Finite(m), AtLeast(n)) => (m < n).then_some(Ordering::Less),
            (AtLeast(n), Finite(m)) => (m < n).then_some(Ordering::Greater),
        }
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::MinusInfinity => write!(f, "-inf"),
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::AtLeast(n) => write!(f, ">={n}"),
            Rank::Infinity => write!(f, "inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Ladders
// ---------------------------------------------------------------------------

/// A finite ladder of one-variable check formulas.
///
/// When `monotone` is set, the ladder is promised to be downward-entailing
/// (each rung implies the rungs below it over the standard model) and
/// [`build_beta_p`] may return single rungs; otherwise the conjunction
/// closure restores that property.
#[derive(Debug, Clone)]
pub struct TypeSpec {
    phis: Vec<Formula>,
    monotone: bool,
}

impl TypeSpec {
    /// Validate and build a ladder.  Every rung must have exactly one free
    /// variable.
    pub fn new(phis: Vec<Formula>, monotone: bool) -> Result<TypeSpec, RankError> {
        for phi in &phis {
            let fv = free_vars(phi);
            if fv.len() != 1 {
                return Err(RankError::WrongArity { count: fv.len() });
            }
        }
        Ok(TypeSpec { phis, monotone })
    }

    /// The threshold ladder whose `i`-th rung holds exactly for values
    /// at least `i`, for `i < count`.
    pub fn thresholds(count: u64) -> TypeSpec {
        let phis = (0..count)
            .map(|i| {
                Formula::exists(
                    1,
                    Formula::eq(Term::var(0), Term::add(Term::var(1), Term::numeral(i))),
                )
            })
            .collect();
        TypeSpec {
            phis,
            monotone: true,
        }
    }

    /// The rungs, in check order.
    pub fn phis(&self) -> &[Formula] {
        &self.phis
    }

    /// Whether single rungs already entail the rungs below them.
    pub fn monotone(&self) -> bool {
        self.monotone
    }

    /// Number of rungs.
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    /// True for the empty ladder.
    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Shared instantiation helpers
// ---------------------------------------------------------------------------

/// The unique free variable of a formula, `None` for a sentence, or an error
/// when two or more variables are free.
fn sole_free_var(f: &Formula) -> Result<Option<VarIndex>, RankError> {
    let fv = free_vars(f);
    let mut it = fv.iter().copied();
    match (it.next(), it.next()) {
        (None, _) => Ok(None),
        (Some(v), None) => Ok(Some(v)),
        (Some(a), Some(b)) => Err(RankError::TooManyFreeVars {
            first: a,
            second: b,
        }),
    }
}

/// Close a one-variable formula on the numeral of `x`; a sentence is its own
/// every instance.
fn numeral_instance(f: &Formula, var: Option<VarIndex>, x: u64) -> Formula {
    match var {
        None => f.clone(),
        Some(v) => {
            let mut subst = BTreeMap::new();
            subst.insert(v, Term::numeral(x));
            f.substitute(&subst)
                .expect("numeral images are closed, so substitution cannot fail")
        }
    }
}

/// A variable index strictly above everything mentioned in the given
/// formulas.
fn fresh_above(fs: &[&Formula]) -> VarIndex {
    fs.iter()
        .filter_map(|f| max_var_index(f))
        .max()
        .map_or(0, |m| m + 1)
}

/// Move a formula with at most one free variable onto the variable `to`.
/// The caller guarantees `to` is not bound inside `f` (a fresh index always
/// qualifies); a sentence is returned unchanged.
fn at_var(f: &Formula, from: Option<VarIndex>, to: VarIndex) -> Formula {
    match from {
        None => f.clone(),
        Some(u) if u == to => f.clone(),
        Some(u) => f
            .substitute_free(u, &Term::var(to))
            .expect("the target variable is not bound in the formula"),
    }
}

// ---------------------------------------------------------------------------
// The ladder rank
// ---------------------------------------------------------------------------

/// Rank of `phi` against the ladder `p`, determined by oracle judgments of
/// numeral instances over `0..=domain_bound`.
///
/// The walk first collects the certified extension (instances judged True)
/// and the undetermined instances (judged Unknown).  An empty certified
/// extension yields `MinusInfinity` when the oracle refutes the
/// existential closure, and `AtLeast(0)` otherwise.  Check `i` then fails —
/// yielding the exact `Finite(i)` — as soon as some certified element
/// refutes rung `i`; it passes when every certified and undetermined
/// element verifies the rung; anything in between stalls the walk at
/// `AtLeast(i)`.  A fully verified ladder yields `Infinity`.
pub fn p_rank(
    phi: &Formula,
    p: &TypeSpec,
    o: &dyn TruthOracle,
    domain_bound: u64,
) -> Result<Rank, RankError> {
    let subject_var = sole_free_var(phi)?;
    let mut certified: Vec<u64> = Vec::new();
    let mut undetermined: Vec<u64> = Vec::new();
    for x in 0..=domain_bound {
        match o.judge(&numeral_instance(phi, subject_var, x)) {
            Verdict::True => certified.push(x),
            Verdict::Unknown => undetermined.push(x),
            Verdict::False => {}
        }
    }
    if certified.is_empty() {
        let v = subject_var.unwrap_or(0);
        let closure = Formula::exists(v, phi.clone());
        if o.judge(&closure) == Verdict::False {
            return Ok(Rank::MinusInfinity);
        }
        return Ok(Rank::AtLeast(0));
    }
    for (i, rung) in p.phis().iter().enumerate() {
        let rung_var = sole_free_var(rung)?;
        let mut failed = false;
        let mut blocked = false;
        for &x in &certified {
            match o.judge(&numeral_instance(rung, rung_var, x)) {
                Verdict::False => {
                    failed = true;
                    break;
                }
                Verdict::Unknown => blocked = true,
                Verdict::True => {}
            }
        }
        if failed {
            return Ok(Rank::Finite(i as u64));
        }
        if !blocked {
            for &x in &undetermined {
                if o.judge(&numeral_instance(rung, rung_var, x)) != Verdict::True {
                    blocked = true;
                    break;
                }
            }
        }
        if blocked {
            return Ok(Rank::AtLeast(i as u64));
        }
    }
    Ok(Rank::Infinity)
}

// ---------------------------------------------------------------------------
// Check sentences and witness formulas
// ---------------------------------------------------------------------------

/// The sentence asserting that `psi`'s extension refutes check `n`:
/// for `n = 0` it says the extension is empty, and for `n >= 1` it exhibits
/// an element of the extension that fails rung `n`.
pub fn build_alpha_p(n: u64, psi: &Formula, p: &TypeSpec) -> Result<Formula, RankError> {
    let psi_var = sole_free_var(psi)?;
    if n == 0 {
        let v = psi_var.unwrap_or(0);
        return Ok(Formula::not(Formula::exists(v, psi.clone())));
    }
    let idx = usize::try_from(n).map_err(|_| RankError::IndexOutOfRange {
        index: n,
        len: p.len() as u64,
    })?;
    let rung = p
        .phis()
        .get(idx)
        .ok_or(RankError::IndexOutOfRange {
            index: n,
            len: p.len() as u64,
        })?;
    let rung_var = sole_free_var(rung)?.expect("ladder rungs have exactly one free variable");
    let bound = match psi_var {
        None => rung_var,
        Some(u) if u == rung_var => u,
        Some(_) => fresh_above(&[psi, rung]),
    };
    let psi_at = at_var(psi, psi_var, bound);
    let rung_at = at_var(rung, Some(rung_var), bound);
    Ok(Formula::exists(
        bound,
        Formula::and(psi_at, Formula::not(rung_at)),
    ))
}

/// The `n`-th certified-payload formula of the ladder: rung `n` itself for a
/// monotone ladder, otherwise the left-grouped conjunction of rungs
/// `0..=n`, which restores downward entailment.
pub fn build_beta_p(n: u64, p: &TypeSpec) -> Result<Formula, RankError> {
    let idx = usize::try_from(n).map_err(|_| RankError::IndexOutOfRange {
        index: n,
        len: p.len() as u64,
    })?;
    let rung = p
        .phis()
        .get(idx)
        .ok_or(RankError::IndexOutOfRange {
            index: n,
            len: p.len() as u64,
        })?;
    if p.monotone() || n == 0 {
        return Ok(rung.clone());
    }
    let prefix = &p.phis()[..=idx];
    let vars: Vec<VarIndex> = prefix
        .iter()
        .map(|f| sole_free_var(f).map(|v| v.expect("ladder rungs have exactly one free variable")))
        .collect::<Result<_, _>>()?;
    let all_same = vars.windows(2).all(|w| w[0] == w[1]);
    let target = if all_same {
        vars[0]
    } else {
        fresh_above(&prefix.iter().collect::<Vec<_>>())
    };
    let mut conjuncts = prefix
        .iter()
        .zip(&vars)
        .map(|(f, &v)| at_var(f, Some(v), target));
    let first = conjuncts.next().expect("the prefix is nonempty");
    Ok(conjuncts.fold(first, Formula::and))
}

/// The self-referential formula sequence of length `d + 1`: it starts at the
/// one-variable identity, and each successor is a disjunction with stopping
/// conditions whose gates examine the predecessor's rank checks and whose
/// payloads are the certified-payload formulas of the ladder.
pub fn gamma_sequence_p(p: &TypeSpec, d: u64) -> Result<Vec<Formula>, RankError> {
    let levels = usize::try_from(d)
        .ok()
        .and_then(|d| d.checked_add(1))
        .ok_or_else(|| RankError::InvalidParameter {
            reason: format!("sequence length {d} + 1 is not addressable"),
        })?;
    let betas: Vec<Formula> = (0..=d).map(|i| build_beta_p(i, p)).collect::<Result<_, _>>()?;
    let mut gammas = Vec::with_capacity(levels);
    gammas.push(Formula::eq(Term::var(0), Term::var(0)));
    for _ in 0..d {
        let prev = gammas.last().expect("the sequence starts nonempty");
        let alphas: Vec<Formula> = (0..=d)
            .map(|i| build_alpha_p(i, prev, p))
            .collect::<Result<_, _>>()?;
        let spec = StopDisjSpec::new(alphas, betas.clone(), 0, d)?;
        gammas.push(build_stop_disjunction(&spec));
    }
    Ok(gammas)
}

/// Ranks of the full self-referential sequence, in order.
pub fn rank_trajectory_p(
    p: &TypeSpec,
    d: u64,
    o: &dyn TruthOracle,
    domain_bound: u64,
) -> Result<Vec<Rank>, RankError> {
    gamma_sequence_p(p, d)?
        .iter()
        .map(|g| p_rank(g, p, o, domain_bound))
        .collect()
}

// ---------------------------------------------------------------------------
// Trajectory classification
// ---------------------------------------------------------------------------

/// Classification of a rank trajectory: it either reaches a maximal verdict,
/// increases strictly throughout, or violates the dichotomy at some index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryClass {
    /// The first maximal verdict (`Infinity` or a stall) sits at `index`,
    /// and every step before it increased strictly.
    ReachesMax { index: usize },
    /// Every consecutive pair increases strictly and no maximal verdict
    /// appears.
    StrictlyIncreasing,
    /// The entry at `index` neither is maximal nor exceeds its predecessor.
    Violation { index: usize },
}

/// Walk a trajectory and classify it.  Each entry is first tested for
/// maximality; a non-maximal entry must strictly exceed its predecessor
/// under the rank order, and the first entry that does neither is a
/// violation.
pub fn check_rank_trajectory(ranks: &[Rank]) -> TrajectoryClass {
    for (i, r) in ranks.iter().enumerate() {
        if r.is_max() {
            return TrajectoryClass::ReachesMax { index: i };
        }
        if i > 0 && ranks[i - 1].partial_cmp(r) != Some(Ordering::Less) {
            return TrajectoryClass::Violation { index: i };
        }
    }
    TrajectoryClass::StrictlyIncreasing
}

// ---------------------------------------------------------------------------
// Formula enumeration
// ---------------------------------------------------------------------------

/// The `i`-th formula with at most one free variable, in increasing order of
/// numeric code.  Total: the enumeration is infinite, so every index is
/// eventually reached.
pub fn enumerate_formula(i: u64) -> Formula {
    use num_bigint::BigUint;
    use num_traits::One;

    let mut seen: u64 = 0;
    let mut code = BigUint::ZERO;
    loop {
        if crate::goedel::is_form_le1(&code) {
            if seen == i {
                return crate::goedel::decode_formula(&code)
                    .expect("recognized codes decode to formulas");
            }
            seen += 1;
        }
        code += BigUint::one();
    }
}
