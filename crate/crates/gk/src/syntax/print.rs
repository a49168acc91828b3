//! Canonical printer: minimal parentheses, single spaces around binary
//! operators. `parse(print(f))` reproduces `f` structurally.

use super::{AtomKind, Base, Formula, Term};
use std::fmt;

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in self.path.letters().iter().rev() {
            write!(f, "{letter}(")?;
        }
        match &self.base {
            Base::Var(0) => write!(f, "x")?,
            Base::Var(id) => write!(f, "x{id}")?,
            Base::Const(name) => write!(f, "#{name}")?,
        }
        for _ in self.path.letters() {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for super::Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.kind {
            AtomKind::Eq => "=",
            AtomKind::Neq => "!=",
        };
        write!(f, "{} {} {}", self.lhs, op, self.rhs)
    }
}

// precedence levels: Or = 0, And = 1, Not = 2, atoms and constants = 3
fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Or(_) => 0,
        Formula::And(_) => 1,
        Formula::Not(_) => 2,
        _ => 3,
    }
}

fn write_at(f: &Formula, ctx: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = prec(f);
    let parens = own < ctx;
    if parens {
        write!(out, "(")?;
    }
    match f {
        Formula::True => write!(out, "true")?,
        Formula::False => write!(out, "false")?,
        Formula::Atom(a) => write!(out, "{a}")?,
        Formula::Not(inner) => {
            write!(out, "!")?;
            write_at(inner, 3, out)?;
        }
        Formula::And(parts) => {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(out, " & ")?;
                }
                write_at(p, 2, out)?;
            }
        }
        Formula::Or(parts) => {
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    write!(out, " | ")?;
                }
                write_at(p, 1, out)?;
            }
        }
    }
    if parens {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    #[test]
    fn round_trips() {
        for src in [
            "true",
            "l(x) = #c",
            "l(x) = #c & l(x) = r(x)",
            "x = x & (l(x) = #c | x != x)",
            "!(l(x) = #c | x1 = x2) & r(r(x)) != l(#d)",
            "!l(x) = #c",
        ] {
            let f = parse(src).unwrap();
            let printed = f.to_string();
            let g = parse(&printed).unwrap();
            assert_eq!(f, g, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn minimal_parens() {
        let f = parse("(x = x & l(x) = #c) | x != x").unwrap();
        assert_eq!(f.to_string(), "x = x & l(x) = #c | x != x");
        let g = parse("x = x & (l(x) = #c | x != x)").unwrap();
        assert_eq!(g.to_string(), "x = x & (l(x) = #c | x != x)");
    }
}
