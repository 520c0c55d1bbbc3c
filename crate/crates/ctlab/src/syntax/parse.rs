//! Recursive-descent parser for the term and formula surface syntax.
//!
//! The accepted grammar (whitespace is allowed between tokens):
//!
//! ```text
//! term    ::= "0" | "S" "(" term ")" | "(" term ("+" | "*") term ")" | "v" nat
//! formula ::= term "=" term
//!           | "!" formula
//!           | "(" formula ("|" | "&" | "->" | "<->") formula ")"
//!           | ("E" | "A") "v" nat "." formula
//! ```
//!
//! `&`, `->`, `<->`, and `A` are accepted on input and expand eagerly into
//! the kernel; the printed form of a formula uses kernel connectives only
//! and parses back to an equal formula.
//!
//! A leading `(` can open either a compound term (as in `(v0 + 0) = 0`) or a
//! compound formula; the parser first tries to read a term atom and rolls
//! back on failure.  Errors report the byte offset of the deepest point any
//! alternative reached, which pinpoints the actual mistake rather than the
//! start of the enclosing expression.

use super::{Formula, SyntaxError, Term};

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    farthest_pos: usize,
    farthest_msg: String,
}

/// Internal soft failure: the real report is the parser's farthest-error
/// state.
struct Fail;

type PResult<T> = Result<T, Fail>;

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser {
            input: input.as_bytes(),
            pos: 0,
            farthest_pos: 0,
            farthest_msg: "empty input".to_string(),
        }
    }

    fn fail<T>(&mut self, message: &str) -> PResult<T> {
        if self.pos >= self.farthest_pos {
            self.farthest_pos = self.pos;
            self.farthest_msg = message.to_string();
        }
        Err(Fail)
    }

    fn skip_ws(&mut self) {
        while let Some(b) = self.input.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8, what: &str) -> PResult<()> {
        if self.eat(b) {
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn parse_nat(&mut self) -> PResult<u64> {
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() {
                value = match value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(u64::from(b - b'0')))
                {
                    Some(v) => v,
                    None => return self.fail("variable index is too large"),
                };
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            self.fail("expected a digit")
        } else {
            Ok(value)
        }
    }

    fn parse_term(&mut self) -> PResult<Term> {
        self.skip_ws();
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(Term::zero())
            }
            Some(b'S') => {
                self.pos += 1;
                self.skip_ws();
                self.expect(b'(', "expected '(' after 'S'")?;
                let inner = self.parse_term()?;
                self.skip_ws();
                self.expect(b')', "expected ')' to close 'S('")?;
                Ok(Term::succ(inner))
            }
            Some(b'(') => {
                self.pos += 1;
                let left = self.parse_term()?;
                self.skip_ws();
                let op = match self.peek() {
                    Some(b'+') => b'+',
                    Some(b'*') => b'*',
                    _ => return self.fail("expected '+' or '*' in a compound term"),
                };
                self.pos += 1;
                let right = self.parse_term()?;
                self.skip_ws();
                self.expect(b')', "expected ')' to close a compound term")?;
                Ok(if op == b'+' {
                    Term::add(left, right)
                } else {
                    Term::mul(left, right)
                })
            }
            Some(b'v') => {
                self.pos += 1;
                let idx = self.parse_nat()?;
                Ok(Term::var(idx))
            }
            _ => self.fail("expected a term ('0', 'S(', '(', or 'v')"),
        }
    }

    fn parse_eq_atom(&mut self) -> PResult<Formula> {
        let left = self.parse_term()?;
        self.skip_ws();
        self.expect(b'=', "expected '=' after a term")?;
        let right = self.parse_term()?;
        Ok(Formula::eq(left, right))
    }

    fn parse_formula(&mut self) -> PResult<Formula> {
        self.skip_ws();
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                let inner = self.parse_formula()?;
                Ok(Formula::not(inner))
            }
            Some(b'E') | Some(b'A') => {
                let universal = self.peek() == Some(b'A');
                self.pos += 1;
                self.skip_ws();
                self.expect(b'v', "expected a variable after the quantifier")?;
                let idx = self.parse_nat()?;
                self.skip_ws();
                self.expect(b'.', "expected '.' after the quantified variable")?;
                let body = self.parse_formula()?;
                Ok(if universal {
                    Formula::forall(idx, body)
                } else {
                    Formula::exists(idx, body)
                })
            }
            Some(b'(') => {
                // Could be a term atom like `(v0 + 0) = 0` or a compound
                // formula; try the term reading first and roll back.
                let save = self.pos;
                if let Ok(atom) = self.parse_eq_atom() {
                    return Ok(atom);
                }
                self.pos = save;
                self.pos += 1; // consume '('
                let left = self.parse_formula()?;
                self.skip_ws();
                let connective = match self.peek() {
                    Some(b'|') => {
                        self.pos += 1;
                        b'|'
                    }
                    Some(b'&') => {
                        self.pos += 1;
                        b'&'
                    }
                    Some(b'-') => {
                        self.pos += 1;
                        self.expect(b'>', "expected '->'")?;
                        b'>'
                    }
                    Some(b'<') => {
                        self.pos += 1;
                        self.expect(b'-', "expected '<->'")?;
                        self.expect(b'>', "expected '<->'")?;
                        b'='
                    }
                    _ => {
                        return self.fail("expected '|', '&', '->', or '<->'");
                    }
                };
                let right = self.parse_formula()?;
                self.skip_ws();
                self.expect(b')', "expected ')' to close a compound formula")?;
                Ok(match connective {
                    b'|' => Formula::or(left, right),
                    b'&' => Formula::and(left, right),
                    b'>' => Formula::implies(left, right),
                    _ => Formula::iff(left, right),
                })
            }
            Some(b'0') | Some(b'S') | Some(b'v') => self.parse_eq_atom(),
            _ => self.fail("expected a formula"),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.pos == self.input.len() {
            Ok(())
        } else {
            self.fail("unexpected trailing input")
        }
    }

    fn error(&self) -> SyntaxError {
        SyntaxError::Parse {
            offset: self.farthest_pos,
            message: self.farthest_msg.clone(),
        }
    }
}

/// Parse a term from its surface syntax.
pub fn parse_term(input: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(input);
    match p.parse_term().and_then(|t| p.finish().map(|_| t)) {
        Ok(t) => Ok(t),
        Err(Fail) => Err(p.error()),
    }
}

/// Parse a formula from its surface syntax.  Derived connectives (`&`, `->`,
/// `<->`, `A`) expand into the kernel during parsing.
pub fn parse_formula(input: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(input);
    match p.parse_formula().and_then(|f| p.finish().map(|_| f)) {
        Ok(f) => Ok(f),
        Err(Fail) => Err(p.error()),
    }
}
