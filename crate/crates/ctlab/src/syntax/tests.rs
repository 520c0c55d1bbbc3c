use super::*;

fn v(n: VarIndex) -> Term {
    Term::var(n)
}

fn num(n: u64) -> Term {
    Term::numeral(n)
}

#[test]
fn term_rendering() {
    assert_eq!(Term::zero().to_string(), "0");
    assert_eq!(num(3).to_string(), "S(S(S(0)))");
    assert_eq!(Term::add(v(0), num(1)).to_string(), "(v0 + S(0))");
    assert_eq!(Term::mul(num(1), v(7)).to_string(), "(S(0) * v7)");
}

#[test]
fn formula_rendering() {
    assert_eq!(Formula::eq(Term::zero(), Term::zero()).to_string(), "0 = 0");
    let a = Formula::eq(Term::zero(), Term::zero());
    assert_eq!(Formula::not(a.clone()).to_string(), "!0 = 0");
    assert_eq!(Formula::or(a.clone(), a.clone()).to_string(), "(0 = 0 | 0 = 0)");
    assert_eq!(
        Formula::exists(2, Formula::eq(v(2), Term::zero())).to_string(),
        "E v2. v2 = 0"
    );
}

#[test]
fn derived_connectives_expand_into_the_kernel() {
    let a = Formula::eq(Term::zero(), Term::zero());
    let b = Formula::eq(v(0), Term::zero());

    let and = Formula::and(a.clone(), b.clone());
    assert_eq!(
        and,
        Formula::not(Formula::or(Formula::not(a.clone()), Formula::not(b.clone())))
    );
    let (l, r) = and.as_and().expect("eager conjunction shape");
    assert_eq!(*l, a);
    assert_eq!(*r, b);

    assert_eq!(
        Formula::implies(a.clone(), b.clone()),
        Formula::or(Formula::not(a.clone()), b.clone())
    );
    assert_eq!(
        Formula::iff(a.clone(), b.clone()),
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b.clone(), a.clone())
        )
    );
    assert_eq!(
        Formula::forall(0, b.clone()),
        Formula::not(Formula::exists(0, Formula::not(b.clone())))
    );

    // Plain negation and disjunction do not masquerade as conjunctions.
    assert!(Formula::not(a.clone()).as_and().is_none());
    assert!(Formula::or(a.clone(), b).as_and().is_none());
}

#[test]
fn free_variable_computation() {
    let f = Formula::exists(0, Formula::eq(v(0), v(1)));
    assert_eq!(free_vars(&f), BTreeSet::from([1]));
    assert!(!f.is_sentence());

    let g = Formula::forall(1, f.clone());
    assert!(free_vars(&g).is_empty());
    assert!(g.is_sentence());

    // A binder with no occurrence of its variable binds nothing.
    let h = Formula::exists(5, Formula::eq(v(0), Term::zero()));
    assert_eq!(free_vars(&h), BTreeSet::from([0]));

    assert_eq!(max_var_index(&h), Some(5));
    assert_eq!(max_var_index(&Formula::eq(Term::zero(), Term::zero())), None);
}

#[test]
fn substitution_replaces_free_occurrences_only() {
    // v0 bound, v1 free: E v0. v0 = v1
    let f = Formula::exists(0, Formula::eq(v(0), v(1)));

    let mut s = BTreeMap::new();
    s.insert(1, num(2));
    let g = f.substitute(&s).unwrap();
    assert_eq!(g, Formula::exists(0, Formula::eq(v(0), num(2))));

    // Substituting for the bound variable is a no-op that reuses the node.
    let mut s0 = BTreeMap::new();
    s0.insert(0, num(7));
    let unchanged = f.substitute(&s0).unwrap();
    assert_eq!(unchanged, f);
    assert_eq!(unchanged.ptr_id(), f.ptr_id());
}

#[test]
fn substitution_rejects_open_images() {
    let f = Formula::eq(v(0), Term::zero());
    let mut s = BTreeMap::new();
    s.insert(0, Term::add(v(1), Term::zero()));
    assert_eq!(
        f.substitute(&s),
        Err(SyntaxError::OpenTermSubstitution { var: 0 })
    );
}

#[test]
fn free_substitution_detects_capture() {
    // E v1. v0 = v1, substituting v1 for v0 would capture it.
    let f = Formula::exists(1, Formula::eq(v(0), v(1)));
    assert_eq!(
        f.substitute_free(0, &v(1)),
        Err(SyntaxError::VariableCapture { from: 0, to: 1 })
    );
    // A genuinely fresh variable goes through.
    let g = f.substitute_free(0, &v(2)).unwrap();
    assert_eq!(g, Formula::exists(1, Formula::eq(v(2), v(1))));
}

#[test]
fn valuations_close_formulas() {
    let f = Formula::eq(v(0), v(1));
    let a: Valuation = [(0, 1), (1, 2)].into_iter().collect();
    assert_eq!(a.to_string(), "v0=1,v1=2");
    let closed = apply_valuation(&f, &a).unwrap();
    assert_eq!(closed, Formula::eq(num(1), num(2)));
    assert!(closed.is_sentence());

    let partial: Valuation = [(0, 1)].into_iter().collect();
    assert_eq!(
        apply_valuation(&f, &partial),
        Err(SyntaxError::InadmissibleValuation { var: 1 })
    );

    // Spare entries are fine.
    let spare: Valuation = [(0, 1), (1, 2), (9, 9)].into_iter().collect();
    assert!(apply_valuation(&f, &spare).is_ok());
}

#[test]
fn depth_counts_eager_conjunction_as_one_unit() {
    let atom = Formula::eq(Term::zero(), Term::zero());
    assert_eq!(syntactic_depth(&atom), 1);
    assert_eq!(syntactic_depth(&Formula::not(atom.clone())), 2);
    assert_eq!(syntactic_depth(&Formula::or(atom.clone(), atom.clone())), 2);
    assert_eq!(syntactic_depth(&Formula::exists(0, atom.clone())), 2);
    // The conjunction expands to three kernel connectives but counts one.
    assert_eq!(syntactic_depth(&Formula::and(atom.clone(), atom.clone())), 2);
    // Implication is a genuine two-connective expansion on the left branch.
    assert_eq!(
        syntactic_depth(&Formula::implies(atom.clone(), atom.clone())),
        3
    );
}

#[test]
fn eta_family_shape_and_depth() {
    assert!(matches!(
        build_eta(0),
        Err(SyntaxError::InvalidParameter(_))
    ));

    let eta1 = build_eta(1).unwrap();
    let a = |i: VarIndex| Formula::eq(v(i), v(i));
    assert_eq!(
        eta1,
        Formula::exists(2, Formula::and(Formula::and(a(0), a(1)), a(2)))
    );
    assert_eq!(free_vars(&eta1), BTreeSet::from([0, 1]));

    for b in 1..=16 {
        let eta = build_eta(b).unwrap();
        assert_eq!(syntactic_depth(&eta), 2 * b + 2, "depth of eta_{b}");
        assert_eq!(free_vars(&eta), BTreeSet::from([0, 1]));
    }

    let closed = close_eta(3, 5).unwrap();
    assert!(closed.is_sentence());
}

#[test]
fn node_count_sees_the_unfolded_tree_through_sharing() {
    let atom = Formula::eq(Term::zero(), Term::zero());
    assert_eq!(node_count(&atom), 3);
    assert_eq!(node_count(&Formula::not(atom.clone())), 4);
    assert_eq!(node_count(&Formula::or(atom.clone(), atom.clone())), 7);

    // A hundred doublings: the unfolded tree has 2^102 - 1 nodes, the shared
    // graph 101.  Both measures must come back instantly.
    let mut f = atom;
    for _ in 0..100 {
        f = Formula::or(f.clone(), f);
    }
    assert_eq!(node_count(&f), (1u128 << 102) - 1);
    assert_eq!(shared_node_count(&f), 101);
    assert_eq!(syntactic_depth(&f), 101);
    assert!(free_vars(&f).is_empty());
}

#[test]
fn bounded_quantifier_shapes() {
    // v0 <= S(S(0)) unfolds to an existential arithmetic statement.
    let le = Formula::leq(v(0), num(2));
    assert_eq!(le, Formula::exists(1, Formula::eq(Term::add(v(0), v(1)), num(2))));

    let body = Formula::eq(v(0), v(0));
    let bounded = Formula::exists_bounded(0, num(2), body.clone());
    assert_eq!(free_vars(&bounded), BTreeSet::new());
    let all = Formula::forall_bounded(0, num(2), body);
    assert_eq!(free_vars(&all), BTreeSet::new());
}

#[test]
fn parser_accepts_kernel_and_sugar() {
    assert_eq!(parse_term("0").unwrap(), Term::zero());
    assert_eq!(parse_term(" S( S(0) ) ").unwrap(), num(2));
    assert_eq!(parse_term("(v0 + (v1 * 0))").unwrap(), Term::add(v(0), Term::mul(v(1), Term::zero())));

    assert_eq!(
        parse_formula("v0 = S(0)").unwrap(),
        Formula::eq(v(0), num(1))
    );
    assert_eq!(
        parse_formula("!(0 = 0 | v0 = 0)").unwrap(),
        Formula::not(Formula::or(
            Formula::eq(Term::zero(), Term::zero()),
            Formula::eq(v(0), Term::zero())
        ))
    );
    assert_eq!(
        parse_formula("E v1. (v1 + v1) = S(0)").unwrap(),
        Formula::exists(1, Formula::eq(Term::add(v(1), v(1)), num(1)))
    );

    // Sugar expands during parsing.
    let a = Formula::eq(Term::zero(), Term::zero());
    let b = Formula::eq(v(0), Term::zero());
    assert_eq!(parse_formula("(0 = 0 & v0 = 0)").unwrap(), Formula::and(a.clone(), b.clone()));
    assert_eq!(parse_formula("(0 = 0 -> v0 = 0)").unwrap(), Formula::implies(a.clone(), b.clone()));
    assert_eq!(parse_formula("(0 = 0 <-> v0 = 0)").unwrap(), Formula::iff(a.clone(), b.clone()));
    assert_eq!(parse_formula("A v0. v0 = 0").unwrap(), Formula::forall(0, b));
}

#[test]
fn parser_disambiguates_leading_parenthesis() {
    // Term atom: the '(' opens a compound term.
    assert_eq!(
        parse_formula("(v0 + 0) = v0").unwrap(),
        Formula::eq(Term::add(v(0), Term::zero()), v(0))
    );
    // Compound formula: the '(' opens a disjunction.
    assert_eq!(
        parse_formula("(v0 = 0 | v1 = 0)").unwrap(),
        Formula::or(Formula::eq(v(0), Term::zero()), Formula::eq(v(1), Term::zero()))
    );
}

#[test]
fn quantifier_bodies_extend_minimally_inside_connectives() {
    // Inside a binary connective the quantifier body is the atom, not the
    // whole disjunction.
    let f = parse_formula("(E v0. v0 = 0 | 0 = 0)").unwrap();
    assert_eq!(
        f,
        Formula::or(
            Formula::exists(0, Formula::eq(v(0), Term::zero())),
            Formula::eq(Term::zero(), Term::zero())
        )
    );
    // A parenthesized body keeps the disjunction under the quantifier.
    let g = parse_formula("E v0. (v0 = 0 | 0 = 0)").unwrap();
    assert_eq!(
        g,
        Formula::exists(
            0,
            Formula::or(
                Formula::eq(v(0), Term::zero()),
                Formula::eq(Term::zero(), Term::zero())
            )
        )
    );
}

#[test]
fn parse_errors_carry_byte_offsets() {
    match parse_formula("") {
        Err(SyntaxError::Parse { offset, .. }) => assert_eq!(offset, 0),
        other => panic!("expected a parse error, got {other:?}"),
    }
    match parse_term("S(0") {
        Err(SyntaxError::Parse { offset, message }) => {
            assert_eq!(offset, 3);
            assert!(message.contains(")"), "message: {message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    match parse_formula("0 = 0 junk") {
        Err(SyntaxError::Parse { offset, message }) => {
            assert_eq!(offset, 6);
            assert!(message.contains("trailing"), "message: {message}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    // The error points into the deepest alternative, not at the outer '('.
    match parse_formula("(v0 = 0 | v1 = )") {
        Err(SyntaxError::Parse { offset, .. }) => assert_eq!(offset, 15),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn rendering_round_trips_through_the_parser() {
    let samples = vec![
        Formula::eq(Term::zero(), Term::zero()),
        Formula::not(Formula::eq(v(3), num(2))),
        Formula::or(
            Formula::exists(0, Formula::eq(v(0), v(1))),
            Formula::eq(Term::mul(v(1), v(1)), Term::zero()),
        ),
        Formula::and(Formula::eq(v(0), Term::zero()), Formula::eq(v(1), Term::zero())),
        Formula::forall_bounded(0, num(3), Formula::eq(v(0), v(0))),
        build_eta(4).unwrap(),
        Formula::iff(Formula::eq(v(0), num(1)), Formula::eq(num(1), v(0))),
    ];
    for f in samples {
        let text = render(&f);
        let back = parse_formula(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, f, "round trip of {text}");
    }
}
