//! Conformance checking of a truth oracle against the compositional truth
//! axioms, over a finite fragment of sentences — in full and in the
//! restricted form where the compositional clauses are gated by a cut.
//!
//! The five checked clause families, numbered as reported:
//!
//! 1. atomic truth: a closed equation is judged true exactly when its sides
//!    have equal values;
//! 2. negation: a negated sentence is judged opposite to its body;
//! 3. disjunction: a disjunction is judged as the join of its disjuncts;
//! 4. existentials: a judged-false existential has no judged-true numeral
//!    instance, and a judged-true existential with a certified-complete
//!    witness window has some non-false instance in it;
//! 5. regularity: replacing closed terms by equal-valued closed terms never
//!    changes the judgment of a sentence.
//!
//! Clause 1 and clause 5 involve no logical structure and are never gated.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;

use crate::goedel::{decode_term, encode_formula_capped, CodedSeq, GoedelCode};
use crate::syntax::{syntactic_depth, Formula, FormulaNode, Term, TermNode};

use super::{certified_witness_window, eval_closed_term, TruthOracle, Verdict};

/// Longest certified witness window that clause 4 will scan completely.
const COMPLETE_SCAN_CAP: u64 = 256;
/// Instances scanned for a judged-false existential with no certified
/// window.
const PARTIAL_SCAN_CAP: u64 = 64;

/// A cut: the initial segment of formulas on which the gated compositional
/// clauses are enforced.
#[derive(Debug, Clone)]
pub enum Cut {
    /// Formulas of syntactic depth at most the bound.
    DepthAtMost(u64),
    /// Formulas whose syntactic depth satisfies the predicate.  Meaningful
    /// cuts are downward closed; the checker does not verify that.
    DepthIn(fn(u64) -> bool),
    /// Formulas whose code is at most the bound.
    CodeAtMost(GoedelCode),
}

impl Cut {
    /// Whether the cut admits this formula.
    pub fn admits(&self, f: &Formula) -> bool {
        match self {
            Cut::DepthAtMost(d) => syntactic_depth(f) <= *d,
            Cut::DepthIn(pred) => pred(syntactic_depth(f)),
            Cut::CodeAtMost(c) => encode_formula_capped(f, c).is_some(),
        }
    }
}

/// One checked clause family's tallies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseReport {
    /// Clause number within the checked family.
    pub label: u8,
    /// Sentences (or sentence pairs, for clause 5) examined.
    pub checked: usize,
    /// Violations found.
    pub violations: usize,
    /// Checks that an Unknown judgment left unverified.
    pub unknown_blocked: usize,
}

/// A concrete clause violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtViolation {
    /// Clause number within the checked family.
    pub clause: u8,
    /// The sentence — or pair of sentences — that witnesses it.
    pub sentences: Vec<Formula>,
    /// Human-readable account of the mismatch.
    pub detail: String,
}

/// Outcome of a conformance check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtReport {
    /// Per-clause tallies, in clause order.
    pub clauses: Vec<ClauseReport>,
    /// Every violation found, in deterministic order.
    pub violations: Vec<CtViolation>,
}

impl CtReport {
    /// Total number of violations across all clauses.
    pub fn total_violations(&self) -> usize {
        self.violations.len()
    }

    /// True when no clause was violated.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Total number of checks an Unknown judgment left unverified.
    pub fn total_unknown_blocked(&self) -> usize {
        self.clauses.iter().map(|c| c.unknown_blocked).sum()
    }
}

impl fmt::Display for CtReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for clause in &self.clauses {
            writeln!(
                f,
                "axiom {}: {} checked, {} violations, {} blocked by Unknown",
                clause.label, clause.checked, clause.violations, clause.unknown_blocked
            )?;
        }
        for v in &self.violations {
            let shown = v
                .sentences
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" / ");
            writeln!(f, "AXIOM {} VIOLATION: {}  [{}]", v.clause, shown, v.detail)?;
        }
        Ok(())
    }
}

/// Check an oracle against the full compositional axioms over the closure
/// of `fragment` under subformulas, with regularity probed through the
/// closed-term sequences in `terms`.
pub fn check_ct_axioms(
    oracle: &dyn TruthOracle,
    fragment: &[Formula],
    terms: &[CodedSeq],
) -> CtReport {
    run_check(oracle, fragment, terms, None)
}

/// Check an oracle against the cut-restricted compositional axioms: the
/// negation clause is enforced only when the cut admits the *body* of the
/// negation, and the disjunction and existential clauses only when it
/// admits the whole sentence.  Atomic truth and regularity are ungated.
pub fn check_ct_restricted(
    oracle: &dyn TruthOracle,
    fragment: &[Formula],
    terms: &[CodedSeq],
    cut: &Cut,
) -> CtReport {
    run_check(oracle, fragment, terms, Some(cut))
}

/// The sentences to examine: the fragment and every subformula of it that
/// is itself a sentence, deduplicated structurally, in first-seen order.
fn sentence_closure(fragment: &[Formula]) -> Vec<Formula> {
    let mut seen_ptr: HashSet<usize> = HashSet::new();
    let mut seen: HashSet<Formula> = HashSet::new();
    let mut out: Vec<Formula> = Vec::new();
    let mut stack: Vec<Formula> = fragment.iter().rev().cloned().collect();
    while let Some(f) = stack.pop() {
        if !seen_ptr.insert(f.ptr_id()) || !seen.insert(f.clone()) {
            continue;
        }
        for sub in f.direct_subformulas().into_iter().rev() {
            stack.push(sub);
        }
        if f.is_sentence() {
            out.push(f);
        }
    }
    out
}

fn run_check(
    oracle: &dyn TruthOracle,
    fragment: &[Formula],
    terms: &[CodedSeq],
    gate: Option<&Cut>,
) -> CtReport {
    let closure = sentence_closure(fragment);
    let mut clauses: Vec<ClauseReport> = (1..=5)
        .map(|label| ClauseReport {
            label,
            checked: 0,
            violations: 0,
            unknown_blocked: 0,
        })
        .collect();
    let mut violations: Vec<CtViolation> = Vec::new();

    let admits = |f: &Formula| gate.is_none_or(|cut| cut.admits(f));

    for s in &closure {
        match s.node() {
            FormulaNode::Eq(l, r) => {
                // Clause 1: never gated.
                let tally = &mut clauses[0];
                tally.checked += 1;
                let model = eval_closed_term(l)
                    .expect("sentence equation sides are closed")
                    == eval_closed_term(r).expect("sentence equation sides are closed");
                match oracle.judge(s) {
                    Verdict::Unknown => tally.unknown_blocked += 1,
                    v => {
                        if v.is_true() != model {
                            tally.violations += 1;
                            violations.push(CtViolation {
                                clause: 1,
                                sentences: vec![s.clone()],
                                detail: format!(
                                    "judged {v}, but the sides are {}equal in the model",
                                    if model { "" } else { "not " }
                                ),
                            });
                        }
                    }
                }
            }
            FormulaNode::Not(body) => {
                if !admits(body) {
                    continue;
                }
                let tally = &mut clauses[1];
                tally.checked += 1;
                let whole = oracle.judge(s);
                let inner = oracle.judge(body);
                if whole.is_decided() && inner.is_decided() {
                    if whole != inner.negate() {
                        tally.violations += 1;
                        violations.push(CtViolation {
                            clause: 2,
                            sentences: vec![s.clone()],
                            detail: format!("judged {whole}, body judged {inner}"),
                        });
                    }
                } else {
                    tally.unknown_blocked += 1;
                }
            }
            FormulaNode::Or(l, r) => {
                if !admits(s) {
                    continue;
                }
                let tally = &mut clauses[2];
                tally.checked += 1;
                let whole = oracle.judge(s);
                let join = oracle.judge(l).or(oracle.judge(r));
                if whole.is_decided() && join.is_decided() {
                    if whole != join {
                        tally.violations += 1;
                        violations.push(CtViolation {
                            clause: 3,
                            sentences: vec![s.clone()],
                            detail: format!("judged {whole}, disjuncts join to {join}"),
                        });
                    }
                } else {
                    tally.unknown_blocked += 1;
                }
            }
            FormulaNode::Exists(v, body) => {
                if !admits(s) {
                    continue;
                }
                let tally = &mut clauses[3];
                tally.checked += 1;
                let whole = oracle.judge(s);
                if whole == Verdict::Unknown {
                    tally.unknown_blocked += 1;
                    continue;
                }
                let window = certified_witness_window(s);
                let (hi, complete) = match window {
                    Some(None) => (None, true),
                    Some(Some(hi)) if hi <= COMPLETE_SCAN_CAP => (Some(hi), true),
                    _ => (Some(PARTIAL_SCAN_CAP), false),
                };
                let mut any_true = false;
                let mut any_nonfalse = false;
                if let Some(hi) = hi {
                    for x in 0..=hi {
                        let mut map = BTreeMap::new();
                        map.insert(*v, Term::numeral(x));
                        let instance = body
                            .substitute(&map)
                            .expect("numeral instances substitute cleanly");
                        match oracle.judge(&instance) {
                            Verdict::True => {
                                any_true = true;
                                any_nonfalse = true;
                            }
                            Verdict::Unknown => any_nonfalse = true,
                            Verdict::False => {}
                        }
                        if any_true {
                            break;
                        }
                    }
                }
                match whole {
                    Verdict::False if any_true => {
                        tally.violations += 1;
                        violations.push(CtViolation {
                            clause: 4,
                            sentences: vec![s.clone()],
                            detail: "judged False, but a numeral instance is judged True"
                                .to_string(),
                        });
                    }
                    Verdict::True if complete && !any_nonfalse => {
                        tally.violations += 1;
                        violations.push(CtViolation {
                            clause: 4,
                            sentences: vec![s.clone()],
                            detail: "judged True, but every instance over a complete \
                                     witness window is judged False"
                                .to_string(),
                        });
                    }
                    Verdict::True if complete && !any_true => {
                        // Some instance was Unknown: the window is complete
                        // but the scan cannot certify either way.
                        tally.unknown_blocked += 1;
                    }
                    _ => {}
                }
            }
        }
    }

    // Clause 5: regularity across equal-valued closed-term sequences.
    let decoded: Vec<Option<(Vec<Term>, Vec<BigUint>)>> = terms
        .iter()
        .map(|seq| {
            let mut items: Vec<Term> = Vec::with_capacity(seq.len());
            for code in seq.items() {
                match decode_term(code) {
                    Ok(t) if t.is_closed() => items.push(t),
                    _ => return None,
                }
            }
            let values = items
                .iter()
                .map(|t| eval_closed_term(t).expect("closed terms evaluate"))
                .collect();
            Some((items, values))
        })
        .collect();
    let mut groups: BTreeMap<Vec<BigUint>, Vec<usize>> = BTreeMap::new();
    for (i, entry) in decoded.iter().enumerate() {
        if let Some((_, values)) = entry {
            groups.entry(values.clone()).or_default().push(i);
        }
    }
    for members in groups.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let (from, _) = decoded[i].as_ref().expect("grouped entries decoded");
                let (to, _) = decoded[j].as_ref().expect("grouped entries decoded");
                if from == to {
                    continue;
                }
                for dir in [(from, to), (to, from)] {
                    for s in &closure {
                        let mut tmemo: HashMap<usize, Term> = HashMap::new();
                        let mut fmemo: HashMap<usize, Formula> = HashMap::new();
                        let rewritten = replace_terms(s, dir.0, dir.1, &mut tmemo, &mut fmemo);
                        if rewritten == *s {
                            continue;
                        }
                        let tally = &mut clauses[4];
                        tally.checked += 1;
                        let before = oracle.judge(s);
                        let after = oracle.judge(&rewritten);
                        if before.is_decided() && after.is_decided() {
                            if before != after {
                                tally.violations += 1;
                                violations.push(CtViolation {
                                    clause: 5,
                                    sentences: vec![s.clone(), rewritten],
                                    detail: format!(
                                        "judged {before}, equal-valued rewrite judged {after}"
                                    ),
                                });
                            }
                        } else {
                            tally.unknown_blocked += 1;
                        }
                    }
                }
            }
        }
    }

    CtReport {
        clauses,
        violations,
    }
}

/// Replace every occurrence of a `from` term (first match wins) by the
/// `to` term at the same index.  All terms involved are closed, so the
/// rewrite cannot capture variables.
fn replace_terms(
    f: &Formula,
    from: &[Term],
    to: &[Term],
    tmemo: &mut HashMap<usize, Term>,
    fmemo: &mut HashMap<usize, Formula>,
) -> Formula {
    if let Some(hit) = fmemo.get(&f.ptr_id()) {
        return hit.clone();
    }
    let out = match f.node() {
        FormulaNode::Eq(l, r) => Formula::eq(
            replace_in_term(l, from, to, tmemo),
            replace_in_term(r, from, to, tmemo),
        ),
        FormulaNode::Not(g) => Formula::not(replace_terms(g, from, to, tmemo, fmemo)),
        FormulaNode::Or(l, r) => Formula::or(
            replace_terms(l, from, to, tmemo, fmemo),
            replace_terms(r, from, to, tmemo, fmemo),
        ),
        FormulaNode::Exists(v, g) => {
            Formula::exists(*v, replace_terms(g, from, to, tmemo, fmemo))
        }
    };
    fmemo.insert(f.ptr_id(), out.clone());
    out
}

fn replace_in_term(t: &Term, from: &[Term], to: &[Term], tmemo: &mut HashMap<usize, Term>) -> Term {
    if let Some(hit) = tmemo.get(&t.ptr_id()) {
        return hit.clone();
    }
    let out = if let Some(k) = from.iter().position(|u| u == t) {
        to[k].clone()
    } else {
        match t.node() {
            TermNode::Zero | TermNode::Var(_) => t.clone(),
            TermNode::Succ(s) => Term::succ(replace_in_term(s, from, to, tmemo)),
            TermNode::Add(l, r) => Term::add(
                replace_in_term(l, from, to, tmemo),
                replace_in_term(r, from, to, tmemo),
            ),
            TermNode::Mul(l, r) => Term::mul(
                replace_in_term(l, from, to, tmemo),
                replace_in_term(r, from, to, tmemo),
            ),
        }
    };
    tmemo.insert(t.ptr_id(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{Budget, StandardModelOracle, TableOracle};
    use crate::goedel::encode_term;

    fn num(n: u64) -> Term {
        Term::numeral(n)
    }

    fn clause(report: &CtReport, label: u8) -> &ClauseReport {
        &report.clauses[(label - 1) as usize]
    }

    #[test]
    fn the_bounded_evaluator_is_clean_on_a_small_fragment() {
        let oracle = StandardModelOracle::new(Budget::new(64, 100_000));
        let fragment = vec![
            Formula::eq(num(2), num(2)),
            Formula::not(Formula::eq(num(1), num(2))),
            Formula::or(
                Formula::eq(Term::zero(), num(1)),
                Formula::eq(num(3), num(3)),
            ),
            Formula::exists(0, Formula::eq(Term::var(0), num(4))),
            Formula::and(
                Formula::eq(num(1), num(1)),
                Formula::exists(0, Formula::eq(Term::succ(Term::var(0)), num(3))),
            ),
        ];
        let seqs = vec![
            CodedSeq::new(vec![encode_term(&num(2))]),
            CodedSeq::new(vec![encode_term(&Term::add(num(1), num(1)))]),
        ];
        let report = check_ct_axioms(&oracle, &fragment, &seqs);
        assert!(report.is_clean(), "unexpected violations:\n{report}");
        assert!(clause(&report, 1).checked > 0);
        assert!(clause(&report, 5).checked > 0);
    }

    #[test]
    fn a_non_compositional_table_is_caught_on_every_structural_clause() {
        let true_atom = Formula::eq(Term::zero(), Term::zero());
        let false_atom = Formula::eq(Term::succ(Term::zero()), Term::zero());
        let unlisted_atom = Formula::eq(num(2), num(2));
        let neg = Formula::not(true_atom.clone());
        let or = Formula::or(false_atom.clone(), false_atom.clone());
        // The table affirms both an atom and its negation, affirms a
        // disjunction of denied disjuncts, and denies a true equation.
        let oracle = TableOracle::new([true_atom.clone(), neg.clone(), or.clone()]);
        let report = check_ct_axioms(
            &oracle,
            &[neg, or, unlisted_atom],
            &[],
        );
        assert_eq!(clause(&report, 1).violations, 1); // S(S(0)) = S(S(0)) judged False
        assert_eq!(clause(&report, 2).violations, 1); // !(0 = 0) and 0 = 0 both True
        assert_eq!(clause(&report, 3).violations, 1); // join mismatch
        let shown = report.to_string();
        assert!(shown.contains("AXIOM 1 VIOLATION"));
        assert!(shown.contains("AXIOM 2 VIOLATION"));
        assert!(shown.contains("AXIOM 3 VIOLATION"));
    }

    #[test]
    fn existential_clause_catches_both_directions() {
        // Judged True although the witness window is certified empty.
        let empty = Formula::exists(0, Formula::eq(Term::succ(Term::var(0)), Term::zero()));
        let oracle = TableOracle::new([empty.clone()]);
        let report = check_ct_axioms(&oracle, &[empty], &[]);
        assert_eq!(clause(&report, 4).violations, 1);

        // Judged False although an instance is judged True.
        let exists = Formula::exists(0, Formula::eq(Term::var(0), num(2)));
        let instance = Formula::eq(num(2), num(2));
        let oracle = TableOracle::new([instance]);
        let report = check_ct_axioms(&oracle, &[exists], &[]);
        assert_eq!(clause(&report, 4).violations, 1);
        assert!(report.to_string().contains("AXIOM 4 VIOLATION"));
    }

    #[test]
    fn regularity_clause_catches_value_blind_tables() {
        // S(0) + 0 and S(0) have equal value but different shape; a table
        // that holds only the first judges the rewrite differently.
        let fat = Term::add(Term::succ(Term::zero()), Term::zero());
        let slim = Term::succ(Term::zero());
        let sentence = Formula::eq(fat.clone(), Term::succ(Term::zero()));
        let oracle = TableOracle::new([sentence.clone()]);
        let seqs = vec![
            CodedSeq::new(vec![encode_term(&fat)]),
            CodedSeq::new(vec![encode_term(&slim)]),
        ];
        // Both rewrite directions produce a changed sentence, so the
        // mismatch is caught at least once (and its mirror may be too).
        let report = check_ct_axioms(&oracle, &[sentence], &seqs);
        assert!(clause(&report, 5).violations >= 1);
        assert!(report.to_string().contains("AXIOM 5 VIOLATION"));

        // The bounded evaluator respects values, so the same probe is clean.
        let honest = StandardModelOracle::new(Budget::new(16, 10_000));
        let sentence2 = Formula::eq(fat, Term::succ(Term::zero()));
        let report = check_ct_axioms(&honest, &[sentence2], &seqs);
        assert_eq!(clause(&report, 5).violations, 0);
        assert!(clause(&report, 5).checked > 0);
    }

    #[test]
    fn depth_cuts_gate_the_structural_clauses() {
        let atom = Formula::eq(Term::zero(), Term::zero());
        let or = Formula::or(atom.clone(), atom.clone());
        let oracle = TableOracle::new([or.clone()]);
        // Depth of the disjunction is 2; a cut at 1 exempts it.
        let gated = check_ct_restricted(&oracle, std::slice::from_ref(&or), &[], &Cut::DepthAtMost(1));
        assert_eq!(clause(&gated, 3).checked, 0);
        assert_eq!(clause(&gated, 3).violations, 0);
        // Clause 1 stays active below any cut.
        assert_eq!(clause(&gated, 1).violations, 1);
        // A generous cut restores the full check.
        let full = check_ct_restricted(&oracle, std::slice::from_ref(&or), &[], &Cut::DepthAtMost(64));
        let unrestricted = check_ct_axioms(&oracle, &[or], &[]);
        assert_eq!(full.total_violations(), unrestricted.total_violations());
    }

    #[test]
    fn negation_gates_on_the_body_not_the_whole() {
        // !(0 = 0 | 0 = 0): the whole has depth 3, the body depth 2.
        let atom = Formula::eq(Term::zero(), Term::zero());
        let or = Formula::or(atom.clone(), atom.clone());
        let neg = Formula::not(or.clone());
        let oracle = TableOracle::new([neg.clone(), or.clone()]);
        // Cut at depth 2 admits the body, so clause 2 fires even though the
        // negation itself is over the cut...
        let report = check_ct_restricted(&oracle, std::slice::from_ref(&neg), &[], &Cut::DepthAtMost(2));
        assert_eq!(clause(&report, 2).violations, 1);
        // ...while a cut at depth 1 exempts it.
        let report = check_ct_restricted(&oracle, &[neg], &[], &Cut::DepthAtMost(1));
        assert_eq!(clause(&report, 2).checked, 0);
    }

    #[test]
    fn code_cuts_admit_exactly_the_small_codes() {
        let small = Formula::eq(Term::zero(), Term::zero()); // code 15
        let big = Formula::eq(Term::succ(Term::zero()), Term::zero()); // code 22
        let cut = Cut::CodeAtMost(BigUint::from(15u32));
        assert!(cut.admits(&small));
        assert!(!cut.admits(&big));
        let parity = Cut::DepthIn(|d| d % 2 == 1);
        assert!(parity.admits(&small));
        assert!(!parity.admits(&Formula::not(small)));
    }
}
