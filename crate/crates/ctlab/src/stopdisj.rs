//! Disjunctions with stopping conditions.
//!
//! Given sentences `α_lo..α_hi` (the stopping conditions) and formulas
//! `β_lo..β_hi` (the payloads), the guarded disjunction is built backwards
//! from the last index:
//!
//! ```text
//! D_hi = (α_hi & β_hi)
//! D_a  = (α_a -> β_a) & [(α_a & β_a) | (!α_a & D_{a+1})]
//! ```
//!
//! Under any compositional judgment the result is equivalent to `β_{k0}`,
//! where `k0` is the least index whose `α` is judged true, and false when no
//! `α` is true.  The naive left-grouped disjunction of conjuncts `(α_i &
//! β_i)` does *not* have this property; [`naive_divergence_witness`] exhibits
//! an assignment separating the two.

use thiserror::Error;

use crate::evaluation::{eval_prop, AtomTable, PropositionalOracle, TruthOracle, Verdict};
use crate::syntax::{Formula, Term};

/// Errors raised by the stopping-disjunction operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StopDisjError {
    /// The alpha/beta lists and bounds do not form a valid specification.
    #[error("specification invariant violated: {reason}")]
    SpecInvariantViolation { reason: String },
    /// The alpha and beta lists have different lengths.
    #[error("alpha list has {alphas} entries but beta list has {betas}")]
    LengthMismatch { alphas: usize, betas: usize },
    /// An Unknown verdict at this index blocks the least-true-index search.
    #[error("verdict at index {index} is Unknown; least true index undetermined")]
    UndecidedPrefix { index: u64 },
    /// A judgment needed to verify the stop property came back Unknown.
    #[error("the {role} judgment is Unknown; stop property unverifiable")]
    UndecidedVerdict { role: &'static str },
}

/// A validated specification of a stopping disjunction: stopping conditions
/// `alphas` (sentences) and payloads `betas`, both indexed `0..=hi`, with
/// the disjunction spanning indices `lo..=hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopDisjSpec {
    alphas: Vec<Formula>,
    betas: Vec<Formula>,
    lo: u64,
    hi: u64,
}

impl StopDisjSpec {
    /// Validate and build a specification.
    ///
    /// Requires `|alphas| = |betas| = hi + 1`, `lo <= hi`, and every alpha
    /// to be a sentence.  Betas may carry free variables; they surface as
    /// the free variables of the built disjunction.
    pub fn new(
        alphas: Vec<Formula>,
        betas: Vec<Formula>,
        lo: u64,
        hi: u64,
    ) -> Result<StopDisjSpec, StopDisjError> {
        let want = usize::try_from(hi)
            .ok()
            .and_then(|h| h.checked_add(1))
            .ok_or_else(|| StopDisjError::SpecInvariantViolation {
                reason: format!("upper index {hi} is out of addressable range"),
            })?;
        if alphas.len() != betas.len() {
            return Err(StopDisjError::LengthMismatch {
                alphas: alphas.len(),
                betas: betas.len(),
            });
        }
        if alphas.len() != want {
            return Err(StopDisjError::SpecInvariantViolation {
                reason: format!(
                    "expected {want} alpha/beta entries for upper index {hi}, got {}",
                    alphas.len()
                ),
            });
        }
        if lo > hi {
            return Err(StopDisjError::SpecInvariantViolation {
                reason: format!("lower index {lo} exceeds upper index {hi}"),
            });
        }
        if let Some((i, _)) = alphas.iter().enumerate().find(|(_, a)| !a.is_sentence()) {
            return Err(StopDisjError::SpecInvariantViolation {
                reason: format!("alpha at index {i} has free variables"),
            });
        }
        Ok(StopDisjSpec {
            alphas,
            betas,
            lo,
            hi,
        })
    }

    /// The stopping conditions, indexed `0..=hi`.
    pub fn alphas(&self) -> &[Formula] {
        &self.alphas
    }

    /// The payloads, indexed `0..=hi`.
    pub fn betas(&self) -> &[Formula] {
        &self.betas
    }

    /// First index of the disjunction span.
    pub fn lo(&self) -> u64 {
        self.lo
    }

    /// Last index of the disjunction span.
    pub fn hi(&self) -> u64 {
        self.hi
    }
}

/// Build the guarded disjunction for the spec's span, backwards from the
/// last index so the construction is iterative.
pub fn build_stop_disjunction(spec: &StopDisjSpec) -> Formula {
    let (lo, hi) = (spec.lo as usize, spec.hi as usize);
    let mut acc = Formula::and(spec.alphas[hi].clone(), spec.betas[hi].clone());
    for i in (lo..hi).rev() {
        let a = spec.alphas[i].clone();
        let b = spec.betas[i].clone();
        acc = Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::or(
                Formula::and(a.clone(), b),
                Formula::and(Formula::not(a), acc),
            ),
        );
    }
    acc
}

/// Build the naive left-grouped disjunction of conjuncts `(α_i & β_i)`.
pub fn build_naive_disjunction(
    alphas: &[Formula],
    betas: &[Formula],
) -> Result<Formula, StopDisjError> {
    if alphas.len() != betas.len() {
        return Err(StopDisjError::LengthMismatch {
            alphas: alphas.len(),
            betas: betas.len(),
        });
    }
    let mut pairs = alphas.iter().zip(betas.iter());
    let (a0, b0) = pairs
        .next()
        .ok_or_else(|| StopDisjError::SpecInvariantViolation {
            reason: "cannot build a disjunction over zero entries".to_string(),
        })?;
    let mut acc = Formula::and(a0.clone(), b0.clone());
    for (a, b) in pairs {
        acc = Formula::or(acc, Formula::and(a.clone(), b.clone()));
    }
    Ok(acc)
}

/// The least index into `alphas` judged True, or `None` when every entry is
/// judged False.  An Unknown verdict before the first True is an error,
/// because it leaves the least index undetermined.
pub fn least_true_index(
    alphas: &[Formula],
    oracle: &dyn TruthOracle,
) -> Result<Option<u64>, StopDisjError> {
    for (i, alpha) in alphas.iter().enumerate() {
        match oracle.judge(alpha) {
            Verdict::True => return Ok(Some(i as u64)),
            Verdict::False => continue,
            Verdict::Unknown => {
                return Err(StopDisjError::UndecidedPrefix { index: i as u64 })
            }
        }
    }
    Ok(None)
}

/// Check the collapse property of the built disjunction under an oracle:
/// its judgment must equal the judgment of `β_{k0}` for the least span
/// index `k0` whose `α` is judged true, and must be False when no `α` in
/// the span is true.  Returns whether the property holds; the theorem
/// predicts `true` whenever the oracle judges compositionally.
pub fn verify_stop_property(
    spec: &StopDisjSpec,
    oracle: &dyn TruthOracle,
) -> Result<bool, StopDisjError> {
    let built = build_stop_disjunction(spec);
    let span = &spec.alphas[spec.lo as usize..=spec.hi as usize];
    let expected = match least_true_index(span, oracle)? {
        Some(rel) => {
            let beta = &spec.betas[(spec.lo + rel) as usize];
            match oracle.judge(beta) {
                Verdict::Unknown => {
                    return Err(StopDisjError::UndecidedVerdict {
                        role: "selected payload",
                    })
                }
                v => v,
            }
        }
        None => Verdict::False,
    };
    match oracle.judge(&built) {
        Verdict::Unknown => Err(StopDisjError::UndecidedVerdict {
            role: "built disjunction",
        }),
        actual => Ok(actual == expected),
    }
}

/// Distinct marker sentences for propositional sweeps: the alpha at index
/// `i` is `num(2i) = num(2i)` and the beta is `num(2i+1) = num(2i+1)`.
pub fn marker_spec(hi: u64) -> StopDisjSpec {
    let alphas = (0..=hi)
        .map(|i| Formula::eq(Term::numeral(2 * i), Term::numeral(2 * i)))
        .collect();
    let betas = (0..=hi)
        .map(|i| Formula::eq(Term::numeral(2 * i + 1), Term::numeral(2 * i + 1)))
        .collect();
    StopDisjSpec::new(alphas, betas, 0, hi).expect("marker spec satisfies the invariants")
}

fn marker_oracle(spec: &StopDisjSpec, a_bits: &[bool], b_bits: &[bool]) -> PropositionalOracle {
    let mut atoms = AtomTable::new();
    for (alpha, &bit) in spec.alphas().iter().zip(a_bits) {
        atoms.insert(alpha.clone(), bit);
    }
    for (beta, &bit) in spec.betas().iter().zip(b_bits) {
        atoms.insert(beta.clone(), bit);
    }
    PropositionalOracle::new(atoms)
}

/// Outcome of an exhaustive truth-table sweep over all assignments to the
/// marker atoms of a span `0..=hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    /// Number of assignments examined, `2^(2(hi+1))`.
    pub assignments: u64,
    /// Assignments on which the collapse property held.
    pub holds: u64,
    /// Assignments with every alpha false.
    pub all_alpha_false_cases: u64,
    /// Among those, assignments on which the disjunction evaluated false.
    pub all_alpha_false_evaluated_false: u64,
    /// The first failing assignment, if any, as (alpha bits, beta bits).
    pub first_failure: Option<(Vec<bool>, Vec<bool>)>,
}

impl SweepReport {
    /// True when the property held on every assignment and every
    /// all-alphas-false assignment evaluated false.
    pub fn all_hold(&self) -> bool {
        self.holds == self.assignments
            && self.all_alpha_false_cases == self.all_alpha_false_evaluated_false
    }
}

/// Exhaustively verify the collapse property over every propositional
/// assignment to marker atoms for the span `0..=hi`.
pub fn sweep_stop_property(hi: u64) -> SweepReport {
    let spec = marker_spec(hi);
    let built = build_stop_disjunction(&spec);
    let n = (hi + 1) as u32;
    let mut report = SweepReport {
        assignments: 0,
        holds: 0,
        all_alpha_false_cases: 0,
        all_alpha_false_evaluated_false: 0,
        first_failure: None,
    };
    for mask in 0u64..(1u64 << (2 * n)) {
        let a_bits: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let b_bits: Vec<bool> = (0..n).map(|i| mask & (1 << (n + i)) != 0).collect();
        let oracle = marker_oracle(&spec, &a_bits, &b_bits);
        report.assignments += 1;
        let holds = verify_stop_property(&spec, &oracle)
            .expect("marker atoms decide every judgment");
        if holds {
            report.holds += 1;
        } else if report.first_failure.is_none() {
            report.first_failure = Some((a_bits.clone(), b_bits.clone()));
        }
        if a_bits.iter().all(|&b| !b) {
            report.all_alpha_false_cases += 1;
            let value = eval_prop(&built, oracle.atoms())
                .expect("marker atoms decide every judgment");
            if !value {
                report.all_alpha_false_evaluated_false += 1;
            }
        }
    }
    report
}

/// Search all assignments for the span `0..=hi` for one on which the naive
/// left-grouped disjunction disagrees with the collapse value `β_{k0}` (or
/// with falsity when no alpha holds).  Returns the first such assignment as
/// (alpha bits, beta bits).
pub fn naive_divergence_witness(hi: u64) -> Option<(Vec<bool>, Vec<bool>)> {
    let spec = marker_spec(hi);
    let naive = build_naive_disjunction(spec.alphas(), spec.betas())
        .expect("marker lists are nonempty and of equal length");
    let n = (hi + 1) as u32;
    for mask in 0u64..(1u64 << (2 * n)) {
        let a_bits: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let b_bits: Vec<bool> = (0..n).map(|i| mask & (1 << (n + i)) != 0).collect();
        let oracle = marker_oracle(&spec, &a_bits, &b_bits);
        let expected = match a_bits.iter().position(|&b| b) {
            Some(k0) => b_bits[k0],
            None => false,
        };
        let naive_value =
            eval_prop(&naive, oracle.atoms()).expect("marker atoms decide every judgment");
        if naive_value != expected {
            return Some((a_bits, b_bits));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{Budget, StandardModelOracle};

    fn num(n: u64) -> Term {
        Term::numeral(n)
    }

    fn atom(n: u64) -> Formula {
        Formula::eq(num(n), num(n))
    }

    #[test]
    fn the_base_case_is_a_bare_conjunction() {
        let spec = StopDisjSpec::new(vec![atom(0)], vec![atom(1)], 0, 0).unwrap();
        assert_eq!(
            build_stop_disjunction(&spec),
            Formula::and(atom(0), atom(1))
        );
    }

    #[test]
    fn the_recursive_case_matches_the_guarded_shape() {
        let spec = StopDisjSpec::new(
            vec![atom(0), atom(2)],
            vec![atom(1), atom(3)],
            0,
            1,
        )
        .unwrap();
        let expected = Formula::and(
            Formula::implies(atom(0), atom(1)),
            Formula::or(
                Formula::and(atom(0), atom(1)),
                Formula::and(Formula::not(atom(0)), Formula::and(atom(2), atom(3))),
            ),
        );
        assert_eq!(build_stop_disjunction(&spec), expected);
    }

    #[test]
    fn construction_grows_linearly_with_constant_payloads() {
        // With the same alpha/beta at every index, each unrolling step adds
        // a fixed number of nodes.
        let count = |hi: u64| {
            let alphas = vec![atom(0); (hi + 1) as usize];
            let betas = vec![atom(1); (hi + 1) as usize];
            let spec = StopDisjSpec::new(alphas, betas, 0, hi).unwrap();
            crate::syntax::node_count(&build_stop_disjunction(&spec))
        };
        let step = count(2) - count(1);
        for hi in 3..=64 {
            assert_eq!(count(hi) - count(hi - 1), step, "nonlinear step at {hi}");
        }
    }

    #[test]
    fn specifications_are_validated() {
        assert!(matches!(
            StopDisjSpec::new(vec![atom(0)], vec![atom(1), atom(2)], 0, 0),
            Err(StopDisjError::LengthMismatch { alphas: 1, betas: 2 })
        ));
        assert!(matches!(
            StopDisjSpec::new(vec![atom(0)], vec![atom(1)], 0, 1),
            Err(StopDisjError::SpecInvariantViolation { .. })
        ));
        assert!(matches!(
            StopDisjSpec::new(vec![atom(0), atom(1)], vec![atom(2), atom(3)], 2, 1),
            Err(StopDisjError::SpecInvariantViolation { .. })
        ));
        let open = Formula::eq(Term::var(0), Term::var(0));
        assert!(matches!(
            StopDisjSpec::new(vec![open], vec![atom(1)], 0, 0),
            Err(StopDisjError::SpecInvariantViolation { .. })
        ));
        // Open betas are allowed.
        let open_beta = Formula::eq(Term::var(0), num(2));
        assert!(StopDisjSpec::new(vec![atom(0)], vec![open_beta], 0, 0).is_ok());
    }

    #[test]
    fn naive_disjunction_shapes_are_left_grouped() {
        let a = [atom(0), atom(2), atom(4)];
        let b = [atom(1), atom(3), atom(5)];
        assert_eq!(
            build_naive_disjunction(&a[..1], &b[..1]).unwrap(),
            Formula::and(atom(0), atom(1))
        );
        let expected = Formula::or(
            Formula::or(
                Formula::and(atom(0), atom(1)),
                Formula::and(atom(2), atom(3)),
            ),
            Formula::and(atom(4), atom(5)),
        );
        assert_eq!(build_naive_disjunction(&a, &b).unwrap(), expected);
        assert!(matches!(
            build_naive_disjunction(&a[..2], &b),
            Err(StopDisjError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn least_true_index_follows_the_verdict_sequence() {
        let spec = marker_spec(2);
        // Verdicts [False, True, True] -> index 1.
        let oracle = marker_oracle(&spec, &[false, true, true], &[false; 3]);
        assert_eq!(least_true_index(spec.alphas(), &oracle), Ok(Some(1)));
        // All False -> none.
        let oracle = marker_oracle(&spec, &[false; 3], &[false; 3]);
        assert_eq!(least_true_index(spec.alphas(), &oracle), Ok(None));
        // [Unknown, True, ...] -> undetermined: leave alpha 0 undesignated.
        let mut atoms = AtomTable::new();
        atoms.insert(spec.alphas()[1].clone(), true);
        atoms.insert(spec.alphas()[2].clone(), true);
        let oracle = PropositionalOracle::new(atoms);
        assert_eq!(
            least_true_index(spec.alphas(), &oracle),
            Err(StopDisjError::UndecidedPrefix { index: 0 })
        );
    }

    #[test]
    fn the_collapse_property_holds_on_single_entry_specs() {
        let spec = marker_spec(0);
        let oracle = marker_oracle(&spec, &[true], &[true]);
        assert_eq!(verify_stop_property(&spec, &oracle), Ok(true));
    }

    #[test]
    fn the_collapse_property_holds_under_standard_evaluation() {
        // Real arithmetic stopping conditions: the least true alpha is
        // index 1, whose payload is false, so the disjunction is false.
        let alphas = vec![
            Formula::eq(num(0), num(1)),  // false
            Formula::eq(num(2), num(2)),  // true: k0 = 1
            Formula::eq(num(3), num(3)),  // true, but beyond the stop
        ];
        let betas = vec![
            Formula::eq(num(7), num(7)),
            Formula::eq(num(7), num(8)),  // selected payload, false
            Formula::eq(num(9), num(9)),
        ];
        let spec = StopDisjSpec::new(alphas, betas, 0, 2).unwrap();
        let oracle = StandardModelOracle::new(Budget::new(16, 100_000));
        assert_eq!(verify_stop_property(&spec, &oracle), Ok(true));
        assert_eq!(oracle.judge(&build_stop_disjunction(&spec)), Verdict::False);
    }

    #[test]
    fn exhaustive_sweeps_confirm_the_collapse_property() {
        for hi in 0..=3 {
            let report = sweep_stop_property(hi);
            assert_eq!(report.assignments, 1 << (2 * (hi + 1)));
            assert!(report.all_hold(), "failure at span {hi}: {report:?}");
        }
    }

    #[test]
    fn the_naive_disjunction_diverges_on_a_two_entry_assignment() {
        // alpha 0 true with payload false, alpha 1 true with payload true:
        // the guarded disjunction stops at 0 and is false, the naive one
        // picks up the later conjunct and is true.
        let witness = naive_divergence_witness(1).expect("divergence exists at span 1");
        let spec = marker_spec(1);
        let (a_bits, b_bits) = &witness;
        let oracle = marker_oracle(&spec, a_bits, b_bits);
        let naive = build_naive_disjunction(spec.alphas(), spec.betas()).unwrap();
        let guarded = build_stop_disjunction(&spec);
        let naive_value = eval_prop(&naive, oracle.atoms()).unwrap();
        let guarded_value = eval_prop(&guarded, oracle.atoms()).unwrap();
        assert_ne!(naive_value, guarded_value);
        // The guarded value is the collapse value; the naive value is not.
        let expected = match a_bits.iter().position(|&b| b) {
            Some(k0) => b_bits[k0],
            None => false,
        };
        assert_eq!(guarded_value, expected);
        assert_ne!(naive_value, expected);
        // The classic witness is among the divergent assignments.
        let classic = marker_oracle(&spec, &[true, true], &[false, true]);
        assert!(eval_prop(&naive, classic.atoms()).unwrap());
        assert!(!eval_prop(&guarded, classic.atoms()).unwrap());
    }
}
