//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! term    := var | const | "l(" term ")" | "r(" term ")"
//! var     := "x" [0-9]*        const := "#" [A-Za-z][A-Za-z0-9_]*
//! atom    := term "=" term | term "!=" term
//! formula := "true" | "false" | atom | "!" formula
//!          | formula "&" formula | formula "|" formula | "(" formula ")"
//! ```
//!
//! `!` binds tighter than `&`, which binds tighter than `|`; the binary
//! connectives associate left and are collected into flat n-ary nodes.

use super::{Address, Atom, Formula, Letter, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    True,
    False,
    Var(u32),
    Const(String),
    Head(Letter),
    LParen,
    RParen,
    Eq,
    Neq,
    Bang,
    Amp,
    Bar,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src, bytes: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.bytes.len() {
            return Ok((start, Tok::End));
        }
        let c = self.bytes[self.pos];
        match c {
            b'(' => {
                self.pos += 1;
                Ok((start, Tok::LParen))
            }
            b')' => {
                self.pos += 1;
                Ok((start, Tok::RParen))
            }
            b'=' => {
                self.pos += 1;
                Ok((start, Tok::Eq))
            }
            b'&' => {
                self.pos += 1;
                Ok((start, Tok::Amp))
            }
            b'|' => {
                self.pos += 1;
                Ok((start, Tok::Bar))
            }
            b'!' => {
                if self.bytes.get(self.pos + 1) == Some(&b'=') {
                    self.pos += 2;
                    Ok((start, Tok::Neq))
                } else {
                    self.pos += 1;
                    Ok((start, Tok::Bang))
                }
            }
            b'#' => {
                self.pos += 1;
                let name_start = self.pos;
                if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_alphabetic() {
                    return Err(Error::Syntax {
                        offset: start,
                        message: "constant name must start with a letter".into(),
                    });
                }
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Ok((start, Tok::Const(self.src[name_start..self.pos].to_string())))
            }
            _ if c.is_ascii_alphabetic() => {
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let word = &self.src[start..self.pos];
                match word {
                    "true" => Ok((start, Tok::True)),
                    "false" => Ok((start, Tok::False)),
                    "l" => Ok((start, Tok::Head(Letter::L))),
                    "r" => Ok((start, Tok::Head(Letter::R))),
                    "exists" | "forall" => Err(Error::QuantifierNotSupported { offset: start }),
                    _ if word.starts_with('x')
                        && word[1..].chars().all(|d| d.is_ascii_digit()) =>
                    {
                        let id = if word.len() == 1 {
                            0
                        } else {
                            word[1..].parse::<u32>().map_err(|_| Error::Syntax {
                                offset: start,
                                message: "variable index out of range".into(),
                            })?
                        };
                        Ok((start, Tok::Var(id)))
                    }
                    _ => Err(Error::Syntax {
                        offset: start,
                        message: format!("unexpected identifier `{word}`"),
                    }),
                }
            }
            _ => {
                // reject the usual quantifier glyphs explicitly
                let rest = &self.src[self.pos..];
                if rest.starts_with('\u{2203}') || rest.starts_with('\u{2200}') {
                    return Err(Error::QuantifierNotSupported { offset: start });
                }
                Err(Error::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", &rest.chars().next().unwrap()),
                })
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (usize, Tok),
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Parser<'a>> {
        let mut lexer = Lexer::new(src);
        let look = lexer.next()?;
        Ok(Parser { lexer, look })
    }

    fn advance(&mut self) -> Result<(usize, Tok)> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.look, next))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.look.1 == tok {
            self.advance()?;
            Ok(())
        } else {
            Err(Error::Syntax { offset: self.look.0, message: format!("expected {what}") })
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.look.1 == Tok::Bar {
            self.advance()?;
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.look.1 == Tok::Amp {
            self.advance()?;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.look.1 == Tok::Bang {
            self.advance()?;
            let inner = self.unary()?;
            return Ok(Formula::Not(Box::new(inner)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.look.1.clone() {
            Tok::True => {
                self.advance()?;
                Ok(Formula::True)
            }
            Tok::False => {
                self.advance()?;
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Var(_) | Tok::Const(_) | Tok::Head(_) => self.atom(),
            _ => Err(Error::Syntax {
                offset: self.look.0,
                message: "expected a formula".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let lhs = self.term()?;
        let neq = match self.look.1 {
            Tok::Eq => false,
            Tok::Neq => true,
            _ => {
                return Err(Error::Syntax {
                    offset: self.look.0,
                    message: "expected `=` or `!=`".into(),
                })
            }
        };
        self.advance()?;
        let rhs = self.term()?;
        Ok(Formula::Atom(if neq { Atom::neq(lhs, rhs) } else { Atom::eq(lhs, rhs) }))
    }

    fn term(&mut self) -> Result<Term> {
        match self.advance()? {
            (_, Tok::Var(id)) => Ok(Term::var(id, Address::root())),
            (_, Tok::Const(name)) => Ok(Term { base: super::Base::Const(name), path: Address::root() }),
            (_, Tok::Head(letter)) => {
                self.expect(Tok::LParen, "`(` after function symbol")?;
                let inner = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner.extend(letter))
            }
            (offset, _) => {
                Err(Error::Syntax { offset, message: "expected a term".into() })
            }
        }
    }
}

/// Parses a quantifier-free formula. Errors carry the byte offset of the
/// offending token.
pub fn parse(src: &str) -> Result<Formula> {
    let mut parser = Parser::new(src)?;
    let f = parser.formula()?;
    if parser.look.1 != Tok::End {
        return Err(Error::Syntax {
            offset: parser.look.0,
            message: "trailing input after formula".into(),
        });
    }
    Ok(f)
}

/// Parses a single term, e.g. `l(#c)` or `r(l(x2))`.
pub fn parse_term(src: &str) -> Result<Term> {
    let mut parser = Parser::new(src)?;
    let t = parser.term()?;
    if parser.look.1 != Tok::End {
        return Err(Error::Syntax {
            offset: parser.look.0,
            message: "trailing input after term".into(),
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::super::{depth_of_formula, AtomKind};
    use super::*;

    #[test]
    fn parses_paper_example() {
        let f = parse("l(x)=#c & l(x)=r(x)").unwrap();
        match &f {
            Formula::And(parts) => {
                assert_eq!(parts.len(), 2);
                match &parts[0] {
                    Formula::Atom(a) => {
                        assert_eq!(a.kind, AtomKind::Eq);
                        assert_eq!(a.lhs, Term::var(0, Address::parse("l").unwrap()));
                        assert_eq!(a.rhs, Term::constant("c", Address::root()));
                    }
                    other => panic!("expected atom, got {other:?}"),
                }
            }
            other => panic!("expected conjunction, got {other:?}"),
        }
    }

    #[test]
    fn parses_identity_atom() {
        let f = parse("x = x").unwrap();
        assert_eq!(depth_of_formula(&f, 0), 0);
    }

    #[test]
    fn rejects_quantifiers() {
        match parse("exists y. l(y)=x") {
            Err(Error::QuantifierNotSupported { offset: 0 }) => {}
            other => panic!("expected quantifier rejection, got {other:?}"),
        }
    }

    #[test]
    fn reports_offsets() {
        match parse("l(x) = ") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 7),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn nested_terms_compose_outward() {
        // address "lr" denotes r(l(x))
        let f = parse("r(l(x)) = #c").unwrap();
        let atoms = f.atoms();
        assert_eq!(atoms[0].lhs.path, Address::parse("lr").unwrap());
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse("x = x & l(x) = #c | x != x").unwrap();
        match f {
            Formula::Or(parts) => {
                assert_eq!(parts.len(), 2);
                assert!(matches!(parts[0], Formula::And(_)));
            }
            other => panic!("| should be outermost, got {other:?}"),
        }
    }
}
