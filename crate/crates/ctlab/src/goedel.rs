//! Arbitrary-precision coding of terms, formulas, and finite sequences.
//!
//! Every syntax node is coded as `pair(tag, payload)` under the Cantor
//! pairing `pair(x, y) = (x + y)(x + y + 1)/2 + y`.  Tags `0..=4` cover terms
//! (zero, successor, sum, product, variable) and tags `5..=8` cover formulas
//! (equality, negation, disjunction, existential quantification).  A finite
//! sequence is coded as `pair(length, chain)` where the chain nests the items
//! right-associatively with the final item sitting bare; the empty sequence
//! is `pair(0, 0) = 0`.
//!
//! Codes grow fast: pairing roughly squares its arguments, so each tree level
//! doubles the bit length and a depth-8 formula already needs hundreds of
//! bits.  All code arithmetic is exact over [`BigUint`]; nothing here rounds
//! or truncates.  The capped encoders exist for cut comparisons against a
//! threshold: they stop as soon as a subobject's code exceeds the cap, which
//! keeps formulas with large numerals from materializing astronomical codes.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use thiserror::Error;

use crate::syntax::{free_vars, Formula, FormulaNode, Term, TermNode, VarIndex};

/// A natural-number code of a syntax object.
pub type GoedelCode = BigUint;

/// Errors from decoding and sequence access.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoedelError {
    /// The code does not decode to a term.
    #[error("not a term code")]
    NotATermCode,
    /// The code does not decode to a formula.
    #[error("not a formula code")]
    NotAFormulaCode,
    /// The code does not decode to a sequence.
    #[error("not a sequence code")]
    NotASeqCode,
    /// A sequence access past the coded length.
    #[error("sequence index {index} out of range for length {len}")]
    IndexOutOfRange { index: u64, len: u64 },
}

const TAG_ZERO: u64 = 0;
const TAG_SUCC: u64 = 1;
const TAG_ADD: u64 = 2;
const TAG_MUL: u64 = 3;
const TAG_VAR: u64 = 4;
const TAG_EQ: u64 = 5;
const TAG_NOT: u64 = 6;
const TAG_OR: u64 = 7;
const TAG_EXISTS: u64 = 8;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

/// Cantor pairing `(x + y)(x + y + 1)/2 + y`, a bijection from pairs of
/// naturals onto the naturals.
pub fn pair(x: &GoedelCode, y: &GoedelCode) -> GoedelCode {
    let w = x + y;
    (&w * (&w + 1u32)) / 2u32 + y
}

/// Inverse of [`pair`].
pub fn unpair(z: &GoedelCode) -> (GoedelCode, GoedelCode) {
    // w = floor((sqrt(8z + 1) - 1) / 2) is the diagonal index; the offsets
    // never underflow because t <= z and z - t <= w hold by construction.
    let s = (z * 8u32 + 1u32).sqrt();
    let w = (&s - 1u32) / 2u32;
    let t = (&w * (&w + 1u32)) / 2u32;
    let y = z - &t;
    let x = &w - &y;
    (x, y)
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

/// Code of a term.  Exact but potentially enormous: the bit length doubles
/// with every tree level, so deep numerals are infeasible to encode — use
/// [`encode_term_capped`] when only a threshold comparison is needed.
pub fn encode_term(t: &Term) -> GoedelCode {
    encode_term_internal(t, None).expect("uncapped encoding cannot be cut off")
}

/// Code of a formula; see [`encode_term`] for the growth caveat.
pub fn encode_formula(f: &Formula) -> GoedelCode {
    encode_formula_internal(f, None).expect("uncapped encoding cannot be cut off")
}

/// Code of a term, or `None` as soon as any subterm's code exceeds `cap`.
/// Since every node's code strictly dominates the codes of its children,
/// `None` means the full code would exceed `cap` as well.
pub fn encode_term_capped(t: &Term, cap: &GoedelCode) -> Option<GoedelCode> {
    encode_term_internal(t, Some(cap))
}

/// Code of a formula with the same early-exit contract as
/// [`encode_term_capped`].
pub fn encode_formula_capped(f: &Formula, cap: &GoedelCode) -> Option<GoedelCode> {
    encode_formula_internal(f, Some(cap))
}

fn over(cap: Option<&GoedelCode>, code: &GoedelCode) -> bool {
    cap.is_some_and(|c| code > c)
}

fn encode_term_internal(t: &Term, cap: Option<&GoedelCode>) -> Option<GoedelCode> {
    // Explicit enter/exit stack: numeral spines nest far past the call-stack
    // budget, and memoization keeps shared graphs linear.
    enum Frame {
        Enter(Term),
        Exit(Term),
    }
    let mut memo: HashMap<usize, Option<GoedelCode>> = HashMap::new();
    let mut stack = vec![Frame::Enter(t.clone())];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(u) => {
                if memo.contains_key(&u.ptr_id()) {
                    continue;
                }
                match u.node() {
                    TermNode::Zero | TermNode::Var(_) => {
                        let code = match u.node() {
                            TermNode::Zero => pair(&big(TAG_ZERO), &big(0)),
                            TermNode::Var(v) => pair(&big(TAG_VAR), &big(*v)),
                            _ => unreachable!(),
                        };
                        let entry = if over(cap, &code) { None } else { Some(code) };
                        memo.insert(u.ptr_id(), entry);
                    }
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
                let code = match u.node() {
                    TermNode::Succ(s) => memo[&s.ptr_id()]
                        .as_ref()
                        .map(|sc| pair(&big(TAG_SUCC), sc)),
                    TermNode::Add(l, r) | TermNode::Mul(l, r) => {
                        let tag = if matches!(u.node(), TermNode::Add(_, _)) {
                            TAG_ADD
                        } else {
                            TAG_MUL
                        };
                        match (&memo[&l.ptr_id()], &memo[&r.ptr_id()]) {
                            (Some(lc), Some(rc)) => Some(pair(&big(tag), &pair(lc, rc))),
                            _ => None,
                        }
                    }
                    _ => unreachable!(),
                };
                let entry = match code {
                    Some(c) if !over(cap, &c) => Some(c),
                    _ => None,
                };
                memo.insert(u.ptr_id(), entry);
            }
        }
    }
    memo[&t.ptr_id()].clone()
}

fn encode_formula_internal(f: &Formula, cap: Option<&GoedelCode>) -> Option<GoedelCode> {
    enum Frame {
        Enter(Formula),
        Exit(Formula),
    }
    let mut memo: HashMap<usize, Option<GoedelCode>> = HashMap::new();
    let mut tmemo: HashMap<usize, Option<GoedelCode>> = HashMap::new();
    let mut stack = vec![Frame::Enter(f.clone())];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(g) => {
                if memo.contains_key(&g.ptr_id()) {
                    continue;
                }
                match g.node() {
                    FormulaNode::Eq(l, r) => {
                        // Terms are encoded eagerly; their own iteration and
                        // memo live inside encode_term_internal.
                        tmemo
                            .entry(l.ptr_id())
                            .or_insert_with(|| encode_term_internal(l, cap));
                        tmemo
                            .entry(r.ptr_id())
                            .or_insert_with(|| encode_term_internal(r, cap));
                        let code = match (&tmemo[&l.ptr_id()], &tmemo[&r.ptr_id()]) {
                            (Some(lc), Some(rc)) => Some(pair(&big(TAG_EQ), &pair(lc, rc))),
                            _ => None,
                        };
                        let entry = match code {
                            Some(c) if !over(cap, &c) => Some(c),
                            _ => None,
                        };
                        memo.insert(g.ptr_id(), entry);
                    }
                    FormulaNode::Not(h) | FormulaNode::Exists(_, h) => {
                        let h = h.clone();
                        stack.push(Frame::Exit(g.clone()));
                        stack.push(Frame::Enter(h));
                    }
                    FormulaNode::Or(l, r) => {
                        let (l, r) = (l.clone(), r.clone());
                        stack.push(Frame::Exit(g.clone()));
                        stack.push(Frame::Enter(l));
                        stack.push(Frame::Enter(r));
                    }
                }
            }
            Frame::Exit(g) => {
                let code = match g.node() {
                    FormulaNode::Not(h) => memo[&h.ptr_id()]
                        .as_ref()
                        .map(|hc| pair(&big(TAG_NOT), hc)),
                    FormulaNode::Or(l, r) => match (&memo[&l.ptr_id()], &memo[&r.ptr_id()]) {
                        (Some(lc), Some(rc)) => Some(pair(&big(TAG_OR), &pair(lc, rc))),
                        _ => None,
                    },
                    FormulaNode::Exists(v, h) => memo[&h.ptr_id()]
                        .as_ref()
                        .map(|hc| pair(&big(TAG_EXISTS), &pair(&big(*v), hc))),
                    _ => unreachable!(),
                };
                let entry = match code {
                    Some(c) if !over(cap, &c) => Some(c),
                    _ => None,
                };
                memo.insert(g.ptr_id(), entry);
            }
        }
    }
    memo[&f.ptr_id()].clone()
}

// ---------------------------------------------------------------------------
// Decoding
// ---------------------------------------------------------------------------

/// Decode a term code.  Fails with [`GoedelError::NotATermCode`] on any
/// natural that is not in the image of [`encode_term`].
///
/// Recursion is safe here even on adversarial input: unpairing roughly halves
/// the bit length, so the decode depth is logarithmic in the bits of `c`.
pub fn decode_term(c: &GoedelCode) -> Result<Term, GoedelError> {
    let (tag, payload) = unpair(c);
    let tag = tag.to_u64().ok_or(GoedelError::NotATermCode)?;
    match tag {
        TAG_ZERO => {
            if payload == big(0) {
                Ok(Term::zero())
            } else {
                Err(GoedelError::NotATermCode)
            }
        }
        TAG_SUCC => Ok(Term::succ(decode_term(&payload)?)),
        TAG_ADD | TAG_MUL => {
            let (l, r) = unpair(&payload);
            let (lt, rt) = (decode_term(&l)?, decode_term(&r)?);
            Ok(if tag == TAG_ADD {
                Term::add(lt, rt)
            } else {
                Term::mul(lt, rt)
            })
        }
        TAG_VAR => {
            let v: VarIndex = payload.to_u64().ok_or(GoedelError::NotATermCode)?;
            Ok(Term::var(v))
        }
        _ => Err(GoedelError::NotATermCode),
    }
}

/// Decode a formula code; the top tag must be a formula tag.
pub fn decode_formula(c: &GoedelCode) -> Result<Formula, GoedelError> {
    let (tag, payload) = unpair(c);
    let tag = tag.to_u64().ok_or(GoedelError::NotAFormulaCode)?;
    match tag {
        TAG_EQ => {
            let (l, r) = unpair(&payload);
            Ok(Formula::eq(
                decode_term(&l).map_err(|_| GoedelError::NotAFormulaCode)?,
                decode_term(&r).map_err(|_| GoedelError::NotAFormulaCode)?,
            ))
        }
        TAG_NOT => Ok(Formula::not(decode_formula(&payload)?)),
        TAG_OR => {
            let (l, r) = unpair(&payload);
            Ok(Formula::or(decode_formula(&l)?, decode_formula(&r)?))
        }
        TAG_EXISTS => {
            let (v, body) = unpair(&payload);
            let v: VarIndex = v.to_u64().ok_or(GoedelError::NotAFormulaCode)?;
            Ok(Formula::exists(v, decode_formula(&body)?))
        }
        _ => Err(GoedelError::NotAFormulaCode),
    }
}

// ---------------------------------------------------------------------------
// Coded sequences
// ---------------------------------------------------------------------------

/// A decoded finite sequence of codes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CodedSeq {
    items: Vec<GoedelCode>,
}

impl CodedSeq {
    /// Wrap a list of codes.
    pub fn new(items: Vec<GoedelCode>) -> CodedSeq {
        CodedSeq { items }
    }

    /// The underlying codes in order.
    pub fn items(&self) -> &[GoedelCode] {
        &self.items
    }

    /// Number of items.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    /// True for the empty sequence.
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The `i`-th code, if present.
    pub fn get(&self, i: usize) -> Option<&GoedelCode> {
        self.items.get(i)
    }

    /// Code of the whole sequence.
    pub fn encode(&self) -> GoedelCode {
        encode_seq(&self.items)
    }

    /// Decode a sequence code into its items.
    pub fn decode(c: &GoedelCode) -> Result<CodedSeq, GoedelError> {
        let len = seq_len(c)?;
        let (_, mut chain) = unpair(c);
        let mut items = Vec::new();
        for i in 0..len {
            if i + 1 == len {
                items.push(chain.clone());
            } else {
                let (item, rest) = unpair(&chain);
                items.push(item);
                chain = rest;
            }
        }
        Ok(CodedSeq { items })
    }
}

/// Code a list of codes as `pair(length, right-nested chain)`; the final item
/// sits bare and the empty sequence is coded as `0`.
pub fn encode_seq(items: &[GoedelCode]) -> GoedelCode {
    let chain = match items.split_last() {
        None => big(0),
        Some((last, front)) => {
            let mut chain = last.clone();
            for item in front.iter().rev() {
                chain = pair(item, &chain);
            }
            chain
        }
    };
    pair(&big(items.len() as u64), &chain)
}

/// Coded length of a sequence.  Rejects `pair(0, x)` with `x > 0` (the empty
/// sequence has exactly one code) and lengths beyond the 64-bit range this
/// realization materializes.
pub fn seq_len(c: &GoedelCode) -> Result<u64, GoedelError> {
    let (len, chain) = unpair(c);
    let len = len.to_u64().ok_or(GoedelError::NotASeqCode)?;
    if len == 0 && chain != big(0) {
        return Err(GoedelError::NotASeqCode);
    }
    Ok(len)
}

/// The `i`-th item of a coded sequence.
pub fn seq_get(c: &GoedelCode, i: u64) -> Result<GoedelCode, GoedelError> {
    let len = seq_len(c)?;
    if i >= len {
        return Err(GoedelError::IndexOutOfRange { index: i, len });
    }
    let (_, mut chain) = unpair(c);
    for _ in 0..i {
        let (_, rest) = unpair(&chain);
        chain = rest;
    }
    if i + 1 == len {
        Ok(chain)
    } else {
        Ok(unpair(&chain).0)
    }
}

// ---------------------------------------------------------------------------
// Recognizers
// ---------------------------------------------------------------------------

/// True when `c` codes a variable term.
pub fn is_var(c: &GoedelCode) -> bool {
    matches!(decode_term(c), Ok(t) if matches!(t.node(), TermNode::Var(_)))
}

/// True when `c` codes a term.
pub fn is_term(c: &GoedelCode) -> bool {
    decode_term(c).is_ok()
}

/// True when `c` codes a closed term.
pub fn is_closed_term(c: &GoedelCode) -> bool {
    decode_term(c).map(|t| t.is_closed()).unwrap_or(false)
}

/// True when `c` codes a formula.
pub fn is_form(c: &GoedelCode) -> bool {
    decode_formula(c).is_ok()
}

/// True when `c` codes a formula with at most one free variable.
pub fn is_form_le1(c: &GoedelCode) -> bool {
    decode_formula(c)
        .map(|f| free_vars(&f).len() <= 1)
        .unwrap_or(false)
}

/// True when `c` codes a sentence.
pub fn is_sent(c: &GoedelCode) -> bool {
    decode_formula(c).map(|f| f.is_sentence()).unwrap_or(false)
}

/// True when `c` codes a sequence of terms.
pub fn is_termseq(c: &GoedelCode) -> bool {
    match CodedSeq::decode(c) {
        Ok(seq) => seq.items().iter().all(is_term),
        Err(_) => false,
    }
}

/// True when `c` codes a sequence of closed terms.
pub fn is_cltermseq(c: &GoedelCode) -> bool {
    match CodedSeq::decode(c) {
        Ok(seq) => seq.items().iter().all(is_closed_term),
        Err(_) => false,
    }
}
