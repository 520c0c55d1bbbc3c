//! Ranks driven by padded tautologies with table-assigned extensions.
//!
//! The payload formulas here are padded identities ([`build_eta`]) whose
//! instances a compositional truth assignment may decide freely.  Pinning
//! instance `b_k` of the `k`-th payload true — and every other instance
//! false — gives each payload the singleton extension `{b_k}`, and the rank
//! of a one-variable formula measures how far its extension stays inside
//! the shrinking windows `(n, b_n]`.  [`build_alpha_ext`] expresses one such
//! window check as a sentence, [`gamma_stages_ext`] assembles the
//! self-referential sequence whose stopping disjunctions switch between
//! payloads, and [`ext_rank_trajectory`] replays the whole construction
//! against the table directly.

use super::{fresh_above, sole_free_var, Rank, RankError};
use crate::stopdisj::{build_stop_disjunction, StopDisjSpec};
use crate::syntax::{build_eta, Formula, Term};

/// Check that a table keeps one spare entry past level `c`.
fn require_spare(len: usize, c: u64) -> Result<(), RankError> {
    let enough = usize::try_from(c)
        .ok()
        .and_then(|c| c.checked_add(1))
        .is_some_and(|s| s < len);
    if enough {
        Ok(())
    } else {
        Err(RankError::IndexOutOfRange {
            index: c.saturating_add(1),
            len: len as u64,
        })
    }
}

/// Payload formula for index `i`: the padded identity of size `a_i`, with
/// its parameter slot closed at zero and its subject variable left free.
fn eta_payload(a: u64) -> Result<Formula, RankError> {
    let eta = build_eta(a)?;
    Ok(eta.substitute_free(1, &Term::zero())?)
}

/// The sentence asserting that `phi` passes window check `n`: its extension
/// is nonempty, and every element exceeds `n` while staying at or below
/// every element of the `n`-th payload's extension.
///
/// Shape: a conjunction of the nonemptiness claim with a doubly universal
/// guard, so a compositional two-valued assignment can decide the whole
/// sentence from those two closed subformulas alone.
pub fn build_alpha_ext(n: u64, phi: &Formula, a_seq: &[u64]) -> Result<Formula, RankError> {
    let idx = usize::try_from(n)
        .ok()
        .filter(|&i| i < a_seq.len())
        .ok_or(RankError::IndexOutOfRange {
            index: n,
            len: a_seq.len() as u64,
        })?;
    let a = a_seq[idx];
    if a == 0 {
        return Err(RankError::InvalidParameter {
            reason: "padding sizes must be at least 1".to_string(),
        });
    }
    let phi_var = sole_free_var(phi)?;
    let eta = eta_payload(a)?;
    let base = fresh_above(&[phi, &eta]);
    let (x_var, y_var, gap_var) = (base, base + 1, base + 2);
    let phi_at_x = super::at_var(phi, phi_var, x_var);
    let eta_at_y = eta
        .substitute_free(0, &Term::var(y_var))
        .expect("the guard variable is fresh above every padding binder");
    let above_n = Formula::exists(
        gap_var,
        Formula::eq(
            Term::var(x_var),
            Term::add(Term::var(gap_var), Term::numeral(n + 1)),
        ),
    );
    let within = Formula::leq(Term::var(x_var), Term::var(y_var));
    let guard = Formula::forall(
        x_var,
        Formula::forall(
            y_var,
            Formula::implies(
                Formula::and(phi_at_x.clone(), eta_at_y),
                Formula::and(above_n, within),
            ),
        ),
    );
    let nonempty = Formula::exists(x_var, phi_at_x);
    Ok(Formula::and(nonempty, guard))
}

/// The generated sequence together with the raw material of each level.
#[derive(Debug, Clone)]
pub struct GammaStages {
    /// Levels `0..=c + 1`; level 0 is the one-variable identity.
    pub gammas: Vec<Formula>,
    /// For each transition, the unnegated window-check sentences about the
    /// previous level, in check order.  The stopping disjunction gates on
    /// their negations.
    pub alphas: Vec<Vec<Formula>>,
    /// The payload formulas, shared by every transition.
    pub betas: Vec<Formula>,
}

/// Assemble the self-referential sequence over padding sizes
/// `a_seq[0..=c]`, keeping the per-level check sentences and payloads.
///
/// Each level is a disjunction with stopping conditions whose `i`-th gate
/// is the negation of window check `i` against the previous level and whose
/// `i`-th payload is the padded identity of size `a_seq[i]`.  The first
/// refuted window check therefore selects the payload the level collapses
/// to.  `a_seq` must keep one spare entry past `c`, so the final level's
/// rank can still be pinned down by a later window.
pub fn gamma_stages_ext(a_seq: &[u64], c: u64) -> Result<GammaStages, RankError> {
    require_spare(a_seq.len(), c)?;
    if a_seq.contains(&0) {
        return Err(RankError::InvalidParameter {
            reason: "padding sizes must be at least 1".to_string(),
        });
    }
    let betas: Vec<Formula> = (0..=c)
        .map(|i| eta_payload(a_seq[i as usize]))
        .collect::<Result<_, _>>()?;
    let mut gammas = vec![Formula::eq(Term::var(0), Term::var(0))];
    let mut alphas = Vec::new();
    for _ in 0..=c {
        let prev = gammas.last().expect("the sequence starts nonempty");
        let checks: Vec<Formula> = (0..=c)
            .map(|i| build_alpha_ext(i, prev, a_seq))
            .collect::<Result<_, _>>()?;
        let gates = checks.iter().cloned().map(Formula::not).collect();
        let spec = StopDisjSpec::new(gates, betas.clone(), 0, c)?;
        gammas.push(build_stop_disjunction(&spec));
        alphas.push(checks);
    }
    Ok(GammaStages {
        gammas,
        alphas,
        betas,
    })
}

/// The generated sequence alone: levels `0..=c + 1`.
pub fn gamma_sequence_ext(a_seq: &[u64], c: u64) -> Result<Vec<Formula>, RankError> {
    Ok(gamma_stages_ext(a_seq, c)?.gammas)
}

/// Extension of a level under the pinned-table reading.
#[derive(Clone, Copy)]
enum Extension {
    /// Level 0: every number satisfies the identity.
    Full,
    /// A collapsed level: exactly one pinned instance.
    Singleton(u64),
    /// No gate fired: the level is unsatisfiable.
    Empty,
}

/// Rank of an extension against the windows `(m, b_m]`: the greatest `m`
/// whose window contains the whole extension, reported as the first failing
/// window minus one.
fn window_rank(ext: Extension, b_seq: &[u64]) -> Rank {
    let holds = |m: usize| -> bool {
        match ext {
            Extension::Empty => false,
            Extension::Full => false,
            Extension::Singleton(b) => b > m as u64 && b <= b_seq[m],
        }
    };
    for m in 0..b_seq.len() {
        if !holds(m) {
            return match m {
                0 => Rank::MinusInfinity,
                _ => Rank::Finite(m as u64 - 1),
            };
        }
    }
    Rank::AtLeast(b_seq.len() as u64 - 1)
}

/// Replay the sequence of [`gamma_stages_ext`] directly against the pinned
/// table that sends the `k`-th payload's extension to `{b_seq[k]}`, and
/// return the rank of every level.
///
/// Requires the payload table and instance table to have equal length with
/// a spare entry past `c`, positive padding sizes, and strictly decreasing
/// pinned instances — the regime in which each level's window checks are
/// decided by the table alone.
pub fn ext_rank_trajectory(a_seq: &[u64], b_seq: &[u64], c: u64) -> Result<Vec<Rank>, RankError> {
    if a_seq.len() != b_seq.len() {
        return Err(RankError::InvalidParameter {
            reason: format!(
                "padding table has {} entries but instance table has {}",
                a_seq.len(),
                b_seq.len()
            ),
        });
    }
    if a_seq.contains(&0) {
        return Err(RankError::InvalidParameter {
            reason: "padding sizes must be at least 1".to_string(),
        });
    }
    if !b_seq.windows(2).all(|w| w[0] > w[1]) {
        return Err(RankError::InvalidParameter {
            reason: "pinned instances must decrease strictly".to_string(),
        });
    }
    require_spare(b_seq.len(), c)?;
    let mut ext = Extension::Full;
    let mut ranks = vec![window_rank(ext, b_seq)];
    for _ in 0..=c {
        // The first refuted window check fires its gate and selects that
        // payload; if every check passes, no gate fires and the level
        // collapses to the empty extension.
        let fired = match ext {
            Extension::Full | Extension::Empty => Some(0),
            Extension::Singleton(b) => {
                (0..=c).find(|&k| b <= k || b > b_seq[k as usize])
            }
        };
        ext = match fired {
            Some(k) => Extension::Singleton(b_seq[k as usize]),
            None => Extension::Empty,
        };
        ranks.push(window_rank(ext, b_seq));
    }
    Ok(ranks)
}
