use super::FoFormula;
use std::fmt;
use thiserror::Error;

const QUANT: u8 = 0;
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const INFIX: u8 = 5;
const NOT: u8 = 6;
const ATOM: u8 = 7;

fn level(f: &FoFormula) -> u8 {
    use FoFormula::*;
    match f {
        Exists(..) | Forall(..) => QUANT,
        Iff(..) => IFF,
        Implies(..) => IMPLIES,
        Or(..) => OR,
        And(..) => AND,
        Less(..) | Eq(..) => INFIX,
        Not(_) => NOT,
        Pred { .. } | EqualLevel(..) | Succ(..) | Min(_) => ATOM,
    }
}

fn write_at(f: &FoFormula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        out.write_str("(")?;
        write_fo(f, out)?;
        out.write_str(")")
    } else {
        write_fo(f, out)
    }
}

pub(super) fn write_fo(f: &FoFormula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    use FoFormula::*;
    let bin = |l: &FoFormula, lmin, op: &str, r: &FoFormula, rmin, out: &mut fmt::Formatter<'_>| {
        write_at(l, lmin, out)?;
        write!(out, " {op} ")?;
        write_at(r, rmin, out)
    };
    match f {
        Exists(v, b) => {
            write!(out, "exists {v}. ")?;
            write_at(b, QUANT, out)
        }
        Forall(v, b) => {
            write!(out, "forall {v}. ")?;
            write_at(b, QUANT, out)
        }
        Iff(l, r) => bin(l, IFF, "<->", r, IMPLIES, out),
        Implies(l, r) => bin(l, OR, "->", r, IMPLIES, out),
        Or(l, r) => bin(l, OR, "|", r, AND, out),
        And(l, r) => bin(l, AND, "&", r, INFIX, out),
        Not(g) => {
            out.write_str("!")?;
            write_at(g, NOT, out)
        }
        Less(a, b) => write!(out, "{a} < {b}"),
        Eq(a, b) => write!(out, "{a} = {b}"),
        EqualLevel(a, b) => write!(out, "E({a}, {b})"),
        Succ(a, b) => write!(out, "succ({a}, {b})"),
        Min(a) => write!(out, "min({a})"),
        Pred {
            prop,
            trace_of,
            pos_of,
        } => {
            if trace_of == pos_of {
                write!(out, "P_{prop}({trace_of})")
            } else {
                write!(out, "P_{prop}(tr({trace_of}), pos({pos_of}))")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct FoParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Dot,
    Comma,
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
    DoubleArrow,
    Less,
    Equal,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(text: &str) -> Result<Lexer, FoParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                k += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '=' => Some(Tok::Equal),
            '-' if chars.get(k + 1) == Some(&'>') => {
                adv = 2;
                Some(Tok::Arrow)
            }
            '<' if chars.get(k + 1) == Some(&'-') && chars.get(k + 2) == Some(&'>') => {
                adv = 3;
                Some(Tok::DoubleArrow)
            }
            '<' => Some(Tok::Less),
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = k;
                while k + adv < chars.len()
                    && (chars[k + adv].is_ascii_alphanumeric() || chars[k + adv] == '_')
                {
                    adv += 1;
                }
                Some(Tok::Ident(chars[start..start + adv].iter().collect()))
            }
            other => {
                return Err(FoParseError {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        if let Some(t) = tok {
            toks.push((t, l0, c0));
        }
        k += adv;
        col += adv;
    }
    toks.push((Tok::End, line, col));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, FoParseError> {
        let (_, line, column) = self.toks[self.pos];
        Err(FoParseError {
            line,
            column,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FoParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<String, FoParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("expected a variable"),
        }
    }

    fn iff(&mut self) -> Result<FoFormula, FoParseError> {
        let mut l = self.implies()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let r = self.implies()?;
            l = FoFormula::iff(l, r);
        }
        Ok(l)
    }

    fn implies(&mut self) -> Result<FoFormula, FoParseError> {
        let l = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let r = self.implies()?;
            return Ok(FoFormula::implies(l, r));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<FoFormula, FoParseError> {
        let mut l = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let r = self.and()?;
            l = FoFormula::or(l, r);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<FoFormula, FoParseError> {
        let mut l = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let r = self.unary()?;
            l = FoFormula::and(l, r);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<FoFormula, FoParseError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(FoFormula::not(self.unary()?));
        }
        self.atom()
    }

    fn args(&mut self, n: usize) -> Result<Vec<String>, FoParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        for k in 0..n {
            if k > 0 {
                self.expect(Tok::Comma, "`,`")?;
            }
            out.push(self.ident()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<FoFormula, FoParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(word) => {
                self.bump();
                match word.as_str() {
                    "forall" | "exists" => {
                        let v = self.ident()?;
                        self.expect(Tok::Dot, "`.` after the bound variable")?;
                        let body = self.iff()?;
                        Ok(if word == "forall" {
                            FoFormula::forall(v, body)
                        } else {
                            FoFormula::exists(v, body)
                        })
                    }
                    "E" if *self.peek() == Tok::LParen => {
                        let a = self.args(2)?;
                        Ok(FoFormula::EqualLevel(a[0].clone(), a[1].clone()))
                    }
                    "succ" if *self.peek() == Tok::LParen => {
                        let a = self.args(2)?;
                        Ok(FoFormula::Succ(a[0].clone(), a[1].clone()))
                    }
                    "min" if *self.peek() == Tok::LParen => {
                        let a = self.args(1)?;
                        Ok(FoFormula::Min(a[0].clone()))
                    }
                    w if w.starts_with("P_") && w.len() > 2 && *self.peek() == Tok::LParen => {
                        let prop = w[2..].to_string();
                        self.bump();
                        if matches!(self.peek(), Tok::Ident(s) if s == "tr")
                            && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&Tok::LParen)
                        {
                            self.bump();
                            let t = self.args(1)?.remove(0);
                            self.expect(Tok::Comma, "`,`")?;
                            match self.ident()?.as_str() {
                                "pos" => {}
                                _ => return self.error("expected `pos(...)`"),
                            }
                            let p = self.args(1)?.remove(0);
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(FoFormula::Pred {
                                prop,
                                trace_of: t,
                                pos_of: p,
                            })
                        } else {
                            let v = self.ident()?;
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(FoFormula::pred(prop, &v))
                        }
                    }
                    _ => {
                        let op = self.bump();
                        let rhs = self.ident()?;
                        match op {
                            Tok::Less => Ok(FoFormula::Less(word, rhs)),
                            Tok::Equal => Ok(FoFormula::Eq(word, rhs)),
                            _ => {
                                self.pos -= 2;
                                self.error("expected `<` or `=`")
                            }
                        }
                    }
                }
            }
            _ => self.error("expected a formula"),
        }
    }
}

/// Parses the text produced by `print_fo`.
pub fn parse_fo(text: &str) -> Result<FoFormula, FoParseError> {
    let mut p = Parser {
        toks: lex(text)?.toks,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(f)
}
