//! Canonical text grammar.
//!
//! ```text
//! sentence  := prefix* tail? expr
//! prefix    := ("EX" | "AA") SETVAR "."
//! tail      := "AA" NUMVAR "."
//! expr      := imp ("<->" imp)*
//! imp       := or ("->" imp)?
//! or        := and ("|" and)*
//! and       := unary ("&" unary)*
//! unary     := "!" unary | atom
//! atom      := "true" | "false" | "(" expr ")"
//!            | SETVAR "(" NAT ")"
//!            | NUMVAR ">=" NAT | NUMVAR "<" NAT | NUMVAR "%" NAT "=" NAT
//! SETVAR    := uppercase letter, then letters, digits or '_'
//! NUMVAR    := lowercase letter, then letters, digits or '_'
//! ```
//!
//! `y<t` is sugar for `!(y>=t)`. A missing tail block is read as `AA y.`.
//! Rendering always emits the tail block, spaces around binary connectives
//! and the fewest parentheses that re-parse to the same tree, except that a
//! negated tail comparison is always parenthesized.

use super::{Atom, Expr, Matrix, Quantifier, Sentence};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParseOptions {
    /// Bit indices must be below this.
    pub max_window: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { max_window: 16 }
    }
}

pub fn parse_sentence(text: &str) -> Result<Sentence> {
    parse_sentence_with(text, ParseOptions::default())
}

pub fn parse_sentence_with(text: &str, opts: ParseOptions) -> Result<Sentence> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, opts, set_vars: Vec::new(), tail_var: String::new() };
    let mut prefix = Vec::new();
    let mut tail: Option<String> = None;
    loop {
        p.skip_ws();
        let save = p.pos;
        let q = match p.keyword() {
            Some("EX") => Quantifier::Exists,
            Some("AA") => Quantifier::Forall,
            _ => {
                p.pos = save;
                break;
            }
        };
        p.skip_ws();
        let var_pos = p.pos;
        let name = p.ident().ok_or_else(|| p.err("expected a variable after quantifier"))?;
        p.skip_ws();
        p.expect(".")?;
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            if prefix.iter().any(|(_, v): &(Quantifier, String)| *v == name) {
                return Err(Error::Syntax { pos: var_pos, msg: format!("variable `{name}` bound twice") });
            }
            prefix.push((q, name));
        } else {
            if q == Quantifier::Exists {
                return Err(Error::OutOfClass(format!(
                    "number quantifier `EX {name}.`; only the fixed `AA {name}.` tail is allowed"
                )));
            }
            tail = Some(name);
            break;
        }
    }
    p.set_vars = prefix.iter().map(|(_, v)| v.clone()).collect();
    p.tail_var = tail.unwrap_or_else(|| "y".to_owned());
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    let matrix = Matrix::new(expr, prefix.len(), 0)?;
    Ok(Sentence::new(prefix, p.tail_var.clone(), matrix)?.with_source(text))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    opts: ParseOptions,
    set_vars: Vec<String>,
    tail_var: String,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_owned() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<()> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{tok}`")))
        }
    }

    fn ident(&mut self) -> Option<String> {
        let start = self.pos;
        if !self.src.get(start).is_some_and(|c| c.is_ascii_alphabetic()) {
            return None;
        }
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        Some(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn keyword(&mut self) -> Option<&'static str> {
        let id = self.ident()?;
        match id.as_str() {
            "EX" => Some("EX"),
            "AA" => Some("AA"),
            _ => None,
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .filter(|t| !t.is_empty())
            .and_then(|t| t.parse().ok())
            .ok_or(Error::Syntax { pos: start, msg: "expected a natural number".into() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.imp()?;
        while self.eat("<->") {
            lhs = Expr::iff(lhs, self.imp()?);
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<Expr> {
        let lhs = self.or()?;
        if self.eat("->") {
            return Ok(Expr::implies(lhs, self.imp()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            lhs = Expr::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            lhs = Expr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("!") {
            return Ok(Expr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        if self.eat("(") {
            let e = self.expr()?;
            self.expect(")")?;
            return Ok(e);
        }
        self.skip_ws();
        let start = self.pos;
        let Some(name) = self.ident() else {
            return Err(self.err("expected an atom"));
        };
        match name.as_str() {
            "true" => return Ok(Expr::Const(true)),
            "false" => return Ok(Expr::Const(false)),
            _ => {}
        }
        if let Some(var) = self.set_vars.iter().position(|v| *v == name) {
            self.expect("(")?;
            let idx_pos = self.pos;
            let index = self.number()?;
            self.expect(")")?;
            if index >= u64::from(self.opts.max_window) {
                return Err(Error::OutOfClass(format!(
                    "bit index {index} at byte {idx_pos} is outside the window 0..{}",
                    self.opts.max_window
                )));
            }
            return Ok(Expr::bit(var, index as u32));
        }
        if name == self.tail_var {
            if self.eat(">=") {
                return Ok(Expr::at_least(self.number()?));
            }
            if self.eat("<") {
                return Ok(Expr::not(Expr::at_least(self.number()?)));
            }
            if self.eat("%") {
                let m = self.number()?;
                self.expect("=")?;
                let r = self.number()?;
                if m == 0 {
                    return Err(Error::OutOfClass("zero period in residue atom".into()));
                }
                if r >= m {
                    return Err(Error::OutOfClass(format!("residue {r} not below modulus {m}")));
                }
                return Ok(Expr::residue(m, r));
            }
            return Err(self.err("expected `>=`, `<` or `%` after the tail variable"));
        }
        Err(Error::Syntax { pos: start, msg: format!("unbound variable `{name}`") })
    }
}

pub fn render_sentence(s: &Sentence) -> String {
    let mut out = String::new();
    for (q, v) in s.prefix() {
        out.push_str(match q {
            Quantifier::Exists => "EX ",
            Quantifier::Forall => "AA ",
        });
        out.push_str(v);
        out.push_str(". ");
    }
    out.push_str("AA ");
    out.push_str(s.tail_var());
    out.push_str(". ");
    let names: Vec<&str> = s.prefix().iter().map(|(_, v)| v.as_str()).collect();
    render_expr(s.matrix().expr(), &names, s.tail_var(), &mut out);
    out
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Iff(..) => 1,
        Expr::Implies(..) => 2,
        Expr::Or(..) => 3,
        Expr::And(..) => 4,
        _ => 5,
    }
}

fn render_child(e: &Expr, parens: bool, names: &[&str], y: &str, out: &mut String) {
    if parens {
        out.push('(');
        render_expr(e, names, y, out);
        out.push(')');
    } else {
        render_expr(e, names, y, out);
    }
}

fn render_expr(e: &Expr, names: &[&str], y: &str, out: &mut String) {
    let p = prec(e);
    match e {
        Expr::Const(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Atom(Atom::Bit { var, index }) => {
            let name = names.get(*var).copied().unwrap_or("?");
            out.push_str(&format!("{name}({index})"));
        }
        Expr::Atom(Atom::AtLeast(t)) => out.push_str(&format!("{y}>={t}")),
        Expr::Atom(Atom::Residue { modulus, residue }) => out.push_str(&format!("{y}%{modulus}={residue}")),
        Expr::Not(inner) => {
            out.push('!');
            let tail_atom = matches!(**inner, Expr::Atom(Atom::AtLeast(_)) | Expr::Atom(Atom::Residue { .. }));
            render_child(inner, tail_atom || prec(inner) < 5, names, y, out);
        }
        Expr::Implies(a, b) => {
            render_child(a, prec(a) <= p, names, y, out);
            out.push_str(" -> ");
            render_child(b, prec(b) < p, names, y, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Iff(a, b) => {
            let op = match e {
                Expr::And(..) => " & ",
                Expr::Or(..) => " | ",
                _ => " <-> ",
            };
            render_child(a, prec(a) < p, names, y, out);
            out.push_str(op);
            render_child(b, prec(b) <= p, names, y, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_basic_form() {
        let s = parse_sentence("EX X. AA y. X(0) & y%2=0").unwrap();
        assert_eq!(s.prefix(), &[(Quantifier::Exists, "X".to_owned())]);
        assert_eq!(s.matrix().window(), 1);
        assert_eq!(s.matrix().period(), 2);
        assert_eq!(s.source(), "EX X. AA y. X(0) & y%2=0");
    }

    #[test]
    fn rejects_out_of_class() {
        assert!(matches!(parse_sentence("EX X. y%0=0"), Err(Error::OutOfClass(m)) if m.contains("zero period")));
        assert!(matches!(parse_sentence("AA y. y%3=3"), Err(Error::OutOfClass(_))));
        assert!(matches!(parse_sentence("EX X. AA y. X(16)"), Err(Error::OutOfClass(_))));
        assert!(matches!(parse_sentence("EX X. EX y. X(0)"), Err(Error::OutOfClass(_))));
        assert!(parse_sentence_with("EX X. AA y. X(16)", ParseOptions { max_window: 20 }).is_ok());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_sentence("EX X. AA y. X(0) & Z(1)") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 19),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_sentence("EX X. EX X. AA y. X(0)"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_sentence("AA y. (true"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_sentence("AA y. true false"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_sentence("AA y. y>="), Err(Error::Syntax { .. })));
    }

    #[test]
    fn precedence_and_rendering() {
        let cases = [
            ("AA y. true | false & true", "AA y. true | false & true"),
            ("AA y. (true | false) & true", "AA y. (true | false) & true"),
            ("EX X. AA y. X(0) -> X(1) -> X(2)", "EX X. AA y. X(0) -> X(1) -> X(2)"),
            ("EX X. AA y. (X(0) -> X(1)) -> X(2)", "EX X. AA y. (X(0) -> X(1)) -> X(2)"),
            ("EX X. AA y. !!X(0)", "EX X. AA y. !!X(0)"),
            ("AA y. y<5", "AA y. !(y>=5)"),
            ("AA y. !y>=5", "AA y. !(y>=5)"),
            ("EX X. AA y. X(0) <-> X(1) | y%3=1", "EX X. AA y. X(0) <-> X(1) | y%3=1"),
            ("EX X. AA y. X(0) <-> (X(1) <-> X(2))", "EX X. AA y. X(0) <-> (X(1) <-> X(2))"),
            ("EX X.y%2=1", "EX X. AA y. y%2=1"),
            ("AA Foo. AA n. !(Foo(2) & n>=1)", "AA Foo. AA n. !(Foo(2) & n>=1)"),
        ];
        for (src, want) in cases {
            let s = parse_sentence(src).unwrap();
            let r = render_sentence(&s);
            assert_eq!(r, want, "{src}");
            assert_eq!(parse_sentence(&r).unwrap().matrix(), s.matrix());
        }
    }
}
