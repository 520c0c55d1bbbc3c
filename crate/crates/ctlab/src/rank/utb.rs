//! Ranks against truth-biconditional checks over coded sentences.
//!
//! Here the subject formula is read as a unary truth candidate: check `i`
//! asks whether the subject satisfies the `i`-th induction instance over an
//! extended language with one uninterpreted unary predicate, and whether it
//! assigns the right truth value to (the code of) the `i`-th enumerated
//! arithmetic formula across coded closed-term tuples.  [`utb_rank`] walks
//! these checks exactly like the ladder walk in the parent module.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::{sole_free_var, Rank, RankError};
use crate::evaluation::{TruthOracle, Verdict};
use crate::goedel::{
    decode_term, encode_formula, is_cltermseq, is_term, seq_get, seq_len, unpair, GoedelCode,
};
use crate::syntax::{free_vars, max_var_index, shift_all_vars, Formula, Term, VarIndex};

/// Formula body over the arithmetic language extended with one unary
/// predicate symbol, decoded from an extended numeric code.  The predicate
/// is a hole: instantiation replaces each applied occurrence with a
/// substitution instance of a chosen formula.
enum Matrix {
    Eq(Term, Term),
    Holds(Term),
    Not(Box<Matrix>),
    Or(Box<Matrix>, Box<Matrix>),
    Exists(VarIndex, Box<Matrix>),
}

const TAG_EQ: u64 = 5;
const TAG_NOT: u64 = 6;
const TAG_OR: u64 = 7;
const TAG_EXISTS: u64 = 8;
const TAG_HOLDS: u64 = 9;

/// Decode an extended code into a matrix.  The encoding reuses the formula
/// pairing scheme and adds one tag for the predicate hole applied to a term.
fn decode_matrix(c: &GoedelCode) -> Option<Matrix> {
    let (tag, payload) = unpair(c);
    let tag = u64::try_from(&tag).ok()?;
    match tag {
        TAG_EQ => {
            let (l, r) = unpair(&payload);
            if is_term(&l) && is_term(&r) {
                Some(Matrix::Eq(
                    decode_term(&l).ok()?,
                    decode_term(&r).ok()?,
                ))
            } else {
                None
            }
        }
        TAG_NOT => Some(Matrix::Not(Box::new(decode_matrix(&payload)?))),
        TAG_OR => {
            let (l, r) = unpair(&payload);
            Some(Matrix::Or(
                Box::new(decode_matrix(&l)?),
                Box::new(decode_matrix(&r)?),
            ))
        }
        TAG_EXISTS => {
            let (v, body) = unpair(&payload);
            let v = u64::try_from(&v).ok()?;
            Some(Matrix::Exists(v, Box::new(decode_matrix(&body)?)))
        }
        TAG_HOLDS => {
            if is_term(&payload) {
                Some(Matrix::Holds(decode_term(&payload).ok()?))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn matrix_free_vars(m: &Matrix) -> BTreeSet<VarIndex> {
    match m {
        Matrix::Eq(l, r) => {
            let mut vs = l.vars();
            vs.extend(r.vars());
            vs
        }
        Matrix::Holds(t) => t.vars(),
        Matrix::Not(b) => matrix_free_vars(b),
        Matrix::Or(l, r) => {
            let mut vs = matrix_free_vars(l);
            vs.extend(matrix_free_vars(r));
            vs
        }
        Matrix::Exists(v, b) => {
            let mut vs = matrix_free_vars(b);
            vs.remove(v);
            vs
        }
    }
}

/// Largest variable index mentioned anywhere in the matrix, binders
/// included.
fn matrix_max_var(m: &Matrix) -> Option<VarIndex> {
    match m {
        Matrix::Eq(l, r) => l.vars().into_iter().chain(r.vars()).max(),
        Matrix::Holds(t) => t.vars().into_iter().max(),
        Matrix::Not(b) => matrix_max_var(b),
        Matrix::Or(l, r) => matrix_max_var(l).into_iter().chain(matrix_max_var(r)).max(),
        Matrix::Exists(v, b) => matrix_max_var(b).into_iter().chain([*v]).max(),
    }
}

/// The `i`-th matrix whose free variables (predicate arguments included)
/// are contained in `{v0}`, in increasing order of extended code.
fn enumerate_matrix(i: u64) -> Matrix {
    let mut seen: u64 = 0;
    let mut code = BigUint::ZERO;
    loop {
        if let Some(m) = decode_matrix(&code) {
            if matrix_free_vars(&m).iter().all(|&v| v == 0) {
                if seen == i {
                    return m;
                }
                seen += 1;
            }
        }
        code += 1u32;
    }
}

/// Replace every predicate hole with `apply` of its argument term and build
/// the resulting ordinary formula.
fn realize(m: &Matrix, apply: &dyn Fn(&Term) -> Formula) -> Formula {
    match m {
        Matrix::Eq(l, r) => Formula::eq(l.clone(), r.clone()),
        Matrix::Holds(t) => apply(t),
        Matrix::Not(b) => Formula::not(realize(b, apply)),
        Matrix::Or(l, r) => Formula::or(realize(l, apply), realize(r, apply)),
        Matrix::Exists(v, b) => Formula::exists(*v, realize(b, apply)),
    }
}

/// The `i`-th induction instance for the predicate candidate `psi`.
///
/// The `i`-th enumerated matrix has its predicate holes filled with
/// substitution instances of `psi` (a sentence acts as a constant
/// predicate), after renaming `psi`'s variables above everything the matrix
/// mentions so no binder on either side can capture the other's variables.
/// When the filled matrix still depends on the induction variable, the
/// result is the familiar axiom shape — base case and successor step imply
/// the universal claim — over a fresh variable; a closed filled matrix
/// `t` yields the degenerate shape `(t and (t implies t)) implies t`, which
/// keeps the axiom silhouette without vacuous quantifiers.
pub fn induction_instance(i: u64, psi: &Formula) -> Result<Formula, RankError> {
    let psi_fv = free_vars(psi);
    if psi_fv.len() > 1 {
        return Err(RankError::WrongArity {
            count: psi_fv.len(),
        });
    }
    let psi_var = psi_fv.iter().next().copied();
    let matrix = enumerate_matrix(i);
    let fresh = matrix_max_var(&matrix)
        .into_iter()
        .chain(max_var_index(psi))
        .max()
        .map_or(0, |m| m + 1);
    let shift = fresh + 1;
    let (psi_shifted, hole_var) = match psi_var {
        None => (psi.clone(), None),
        Some(u) => (shift_all_vars(psi, shift), Some(u + shift)),
    };
    let apply = |arg: &Term| -> Formula {
        match hole_var {
            None => psi_shifted.clone(),
            Some(u) => psi_shifted
                .substitute_free(u, arg)
                .expect("matrix variables sit below every shifted binder"),
        }
    };
    let body = realize(&matrix, &apply);
    if !free_vars(&body).contains(&0) {
        let taut = Formula::implies(body.clone(), body.clone());
        return Ok(Formula::implies(
            Formula::and(body.clone(), taut),
            body,
        ));
    }
    let theta = body
        .substitute_free(0, &Term::var(fresh))
        .expect("the fresh variable is bound nowhere in the filled matrix");
    let base = theta
        .substitute_free(fresh, &Term::zero())
        .expect("a closed image cannot be captured");
    let bumped = theta
        .substitute_free(fresh, &Term::succ(Term::var(fresh)))
        .expect("the fresh variable is bound nowhere in the filled matrix");
    let step = Formula::forall(fresh, Formula::implies(theta.clone(), bumped));
    let conclusion = Formula::forall(fresh, theta);
    Ok(Formula::implies(Formula::and(base, step), conclusion))
}

/// Closed-term tuples of the given length whose sequence code is at most
/// `bound`, in increasing code order.
fn closed_tuples(len: u64, bound: u64) -> Vec<Vec<Term>> {
    let mut out = Vec::new();
    for c in 0..=bound {
        let code = GoedelCode::from(c);
        if !is_cltermseq(&code) || seq_len(&code).ok() != Some(len) {
            continue;
        }
        let items = (0..len)
            .map(|j| {
                let tc = seq_get(&code, j).expect("index below the checked length");
                decode_term(&tc).expect("sequence recognition validates every item")
            })
            .collect();
        out.push(items);
    }
    out
}

/// Close a one-variable formula on the first tuple entry; sentences ignore
/// the tuple.
fn tuple_instance(phi: &Formula, var: Option<VarIndex>, tuple: &[Term]) -> Formula {
    match (var, tuple.first()) {
        (Some(v), Some(t)) => {
            let mut subst = BTreeMap::new();
            subst.insert(v, t.clone());
            phi.substitute(&subst)
                .expect("closed tuple entries keep the image closed")
        }
        _ => phi.clone(),
    }
}

/// Close a formula on an arbitrary closed term.
fn term_instance(f: &Formula, var: Option<VarIndex>, image: &Term) -> Formula {
    match var {
        None => f.clone(),
        Some(v) => {
            let mut subst = BTreeMap::new();
            subst.insert(v, image.clone());
            f.substitute(&subst)
                .expect("numeral images are closed, so substitution cannot fail")
        }
    }
}

/// The numeral naming a sentence by its code.
fn code_numeral(f: &Formula) -> Result<Term, RankError> {
    let code = encode_formula(f);
    let small = u64::try_from(&code).map_err(|_| RankError::InvalidParameter {
        reason: "coded sentence is too large to name with a numeral".to_string(),
    })?;
    Ok(Term::numeral(small))
}

/// Tuples relevant to the `n`-th enumerated formula: the empty tuple for a
/// sentence, all length-one closed tuples with code at most `bound`
/// otherwise.
fn check_tuples(phi: &Formula, bound: u64) -> Result<(Option<VarIndex>, Vec<Vec<Term>>), RankError> {
    let var = sole_free_var(phi)?;
    let arity = var.map_or(0, |_| 1);
    Ok((var, closed_tuples(arity, bound)))
}

/// The sentence asserting that `psi` fails check `n`: either it refutes the
/// `n`-th induction instance, or it misjudges the code of some coded
/// instance of the `n`-th enumerated formula (tuple codes at most
/// `seq_bound`).  An empty instance pool contributes a plainly false
/// disjunct, so the assembled sentence stays well-formed.
pub fn build_alpha_utb(n: u64, psi: &Formula, seq_bound: u64) -> Result<Formula, RankError> {
    let psi_var = sole_free_var(psi)?;
    let ind = induction_instance(n, psi)?;
    let phi = super::enumerate_formula(n);
    let (phi_var, tuples) = check_tuples(&phi, seq_bound)?;
    let mut failures = Vec::new();
    for tuple in &tuples {
        let inst = tuple_instance(&phi, phi_var, tuple);
        let named = term_instance(psi, psi_var, &code_numeral(&inst)?);
        failures.push(Formula::not(Formula::iff(named, inst)));
    }
    let mut it = failures.into_iter();
    let first = it
        .next()
        .unwrap_or_else(|| Formula::eq(Term::zero(), Term::succ(Term::zero())));
    let misjudged = it.fold(first, Formula::or);
    Ok(Formula::or(Formula::not(ind), misjudged))
}

/// The `n`-th certified-payload formula: it holds of exactly the codes of
/// true coded instances of the first `n + 1` enumerated formulas (tuple
/// codes at most `seq_bound`), by listing each code together with the
/// instance it names.
pub fn build_beta_utb(n: u64, seq_bound: u64) -> Result<Formula, RankError> {
    let mut disjuncts = Vec::new();
    for i in 0..=n {
        let phi = super::enumerate_formula(i);
        let (phi_var, tuples) = check_tuples(&phi, seq_bound)?;
        for tuple in &tuples {
            let inst = tuple_instance(&phi, phi_var, tuple);
            let tag = Formula::eq(Term::var(0), code_numeral(&inst)?);
            disjuncts.push(Formula::and(tag, inst));
        }
    }
    let mut it = disjuncts.into_iter();
    let first = it
        .next()
        .unwrap_or_else(|| Formula::eq(Term::zero(), Term::succ(Term::zero())));
    Ok(it.fold(first, Formula::or))
}

/// Rank of `gamma` as a truth candidate: the index of the first refuted
/// check, where check `i` conjoins the `i`-th induction instance with the
/// truth biconditionals for coded instances of the `i`-th enumerated
/// formula (tuple codes at most `check_bound`).
///
/// A certified-empty extension yields `MinusInfinity`.  Check verdicts
/// combine as a three-valued conjunction: any refuted conjunct settles the
/// check as failed and the rank as `Finite(i)`; otherwise any undecided
/// conjunct stalls the walk at `AtLeast(i)`.  The walk never reports
/// `Infinity`: after `max_checks` verified checks it reports
/// `AtLeast(max_checks)`, since infinitely many checks remain unexamined.
pub fn utb_rank(
    gamma: &Formula,
    o: &dyn TruthOracle,
    check_bound: u64,
    max_checks: u64,
) -> Result<Rank, RankError> {
    let gamma_var = sole_free_var(gamma)?;
    let closure = Formula::exists(gamma_var.unwrap_or(0), gamma.clone());
    if o.judge(&closure) == Verdict::False {
        return Ok(Rank::MinusInfinity);
    }
    for i in 0..max_checks {
        let mut failed = false;
        let mut blocked = false;
        match o.judge(&induction_instance(i, gamma)?) {
            Verdict::False => failed = true,
            Verdict::Unknown => blocked = true,
            Verdict::True => {}
        }
        if !failed {
            let phi = super::enumerate_formula(i);
            let (phi_var, tuples) = check_tuples(&phi, check_bound)?;
            for tuple in &tuples {
                let inst = tuple_instance(&phi, phi_var, tuple);
                let named = term_instance(gamma, gamma_var, &code_numeral(&inst)?);
                match o.judge(&Formula::iff(named, inst)) {
                    Verdict::False => failed = true,
                    Verdict::Unknown => blocked = true,
                    Verdict::True => {}
                }
                if failed {
                    break;
                }
            }
        }
        if failed {
            return Ok(Rank::Finite(i));
        }
        if blocked {
            return Ok(Rank::AtLeast(i));
        }
    }
    Ok(Rank::AtLeast(max_checks))
}
