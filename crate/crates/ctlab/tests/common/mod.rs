//! Shared generators for the integration test targets: seeded random
//! syntax builders (for the acceptance sweeps) and proptest strategies
//! (for the invariant suite).

#![allow(dead_code)]

use ctlab::syntax::{Formula, Term, VarIndex};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic generator for one test scenario.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random term of at most the given depth over the scoped variables.
/// Depth 0 forces a leaf.
pub fn random_term(r: &mut ChaCha8Rng, depth: u32, scope: &[VarIndex]) -> Term {
    let leaf = depth == 0 || r.gen_bool(0.35);
    if leaf {
        match r.gen_range(0..3u8) {
            0 => Term::zero(),
            1 => Term::numeral(r.gen_range(0..5u64)),
            _ => {
                if scope.is_empty() {
                    Term::numeral(r.gen_range(0..3u64))
                } else {
                    Term::var(scope[r.gen_range(0..scope.len())])
                }
            }
        }
    } else {
        match r.gen_range(0..3u8) {
            0 => Term::succ(random_term(r, depth - 1, scope)),
            1 => Term::add(
                random_term(r, depth - 1, scope),
                random_term(r, depth - 1, scope),
            ),
            _ => Term::mul(
                random_term(r, depth - 1, scope),
                random_term(r, depth - 1, scope),
            ),
        }
    }
}

/// A random formula of at most the given depth whose free variables come
/// from the scoped list.  With an empty scope the result is a sentence.
pub fn random_formula(r: &mut ChaCha8Rng, depth: u32, scope: &[VarIndex]) -> Formula {
    let atom = depth == 0 || r.gen_bool(0.3);
    if atom {
        Formula::eq(random_term(r, 2, scope), random_term(r, 2, scope))
    } else {
        match r.gen_range(0..4u8) {
            0 => Formula::not(random_formula(r, depth - 1, scope)),
            1 | 2 => Formula::or(
                random_formula(r, depth - 1, scope),
                random_formula(r, depth - 1, scope),
            ),
            _ => {
                let v = scope.iter().max().map_or(0, |m| m + 1);
                let mut inner: Vec<VarIndex> = scope.to_vec();
                inner.push(v);
                Formula::exists(v, random_formula(r, depth - 1, &inner))
            }
        }
    }
}

/// A random sentence of at most the given depth.
pub fn random_sentence(r: &mut ChaCha8Rng, depth: u32) -> Formula {
    random_formula(r, depth, &[])
}

/// Proptest strategy for terms over variables `v0..v3`, sized by `depth`.
pub fn term_strategy(depth: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        Just(Term::zero()),
        (0u64..6).prop_map(Term::numeral),
        (0u64..4).prop_map(Term::var),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Term::succ),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::add(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::mul(a, b)),
        ]
    })
}

/// Proptest strategy for formulas over variables `v0..v3`, sized by
/// `depth`.  Quantifiers reuse the same small variable pool, so shadowing
/// and vacuous binding both occur.
pub fn formula_strategy(depth: u32) -> impl Strategy<Value = Formula> {
    let atom = (term_strategy(2), term_strategy(2)).prop_map(|(l, r)| Formula::eq(l, r));
    atom.prop_recursive(depth, 96, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (0u64..4, inner).prop_map(|(v, b)| Formula::exists(v, b)),
        ]
    })
}

/// Proptest strategy for sentences: formulas with every free variable
/// closed off by numerals.
pub fn sentence_strategy(depth: u32) -> impl Strategy<Value = Formula> {
    formula_strategy(depth).prop_map(|f| {
        let subst: std::collections::BTreeMap<VarIndex, Term> = ctlab::syntax::free_vars(&f)
            .into_iter()
            .map(|v| (v, Term::numeral(v % 3)))
            .collect();
        f.substitute(&subst).expect("numeral images are closed")
    })
}
