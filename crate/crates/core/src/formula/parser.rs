use super::{Counterfactual, Formula};
use thiserror::Error;

/// A syntax error with a 1-based source location.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    LParen,
    RParen,
    LBracket,
    RBracket,
    At,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    Unary(char),
    Know,
    Until,
    Since,
    Cf(Counterfactual),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::At => "`@`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::Unary(c) => format!("`{c}`"),
            Tok::Know => "`K`".into(),
            Tok::Until => "`U`".into(),
            Tok::Since => "`S`".into(),
            Tok::Cf(op) => format!("`{}`", op.keyword()),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut column) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let start = (line, column);
        let err = |message: String| ParseError {
            line: start.0,
            column: start.1,
            message,
        };
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let tok = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" | "F" | "G" | "Y" | "O" | "H" => Tok::Unary(word.chars().next().unwrap()),
                "K" => Tok::Know,
                "U" => Tok::Until,
                "S" => Tok::Since,
                "WOULD" => Tok::Cf(Counterfactual::Would),
                "UWOULD" => Tok::Cf(Counterfactual::UWould),
                "MIGHT" => Tok::Cf(Counterfactual::Might),
                "EMIGHT" => Tok::Cf(Counterfactual::EMight),
                _ => Tok::Ident(word),
            };
            (tok, j - i)
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            if rest.starts_with("<->") {
                (Tok::DoubleArrow, 3)
            } else if rest.starts_with("->") {
                (Tok::Arrow, 2)
            } else {
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '@' => Tok::At,
                    '!' => Tok::Bang,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    other => return Err(err(format!("unexpected character `{other}`"))),
                };
                (tok, 1)
            }
        };
        out.push(Spanned {
            tok,
            line: start.0,
            column: start.1,
        });
        i += len;
        column += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => {
                Err(self.error_here(format!("expected identifier, found {}", other.describe())))
            }
        }
    }

    fn agent_index(&mut self) -> Result<String, ParseError> {
        self.expect(Tok::LBracket)?;
        let a = self.ident()?;
        self.expect(Tok::RBracket)?;
        Ok(a)
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.counterfactual()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.counterfactual()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn counterfactual(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.temporal()?;
        let Tok::Cf(op) = *self.peek() else {
            return Ok(lhs);
        };
        self.bump();
        let agent = self.agent_index()?;
        let rhs = self.temporal()?;
        if let Tok::Cf(next) = self.peek() {
            return Err(self.error_here(format!(
                "counterfactual operators do not associate; parenthesize before `{}`",
                next.keyword()
            )));
        }
        Ok(Formula::counterfactual(op, agent, lhs, rhs))
    }

    fn temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.temporal()?;
                Ok(Formula::until(lhs, rhs))
            }
            Tok::Since => {
                self.bump();
                let rhs = self.temporal()?;
                Ok(Formula::since(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Unary(c) => {
                self.bump();
                let inner = self.unary()?;
                Ok(match c {
                    'X' => Formula::next(inner),
                    'F' => Formula::eventually(inner),
                    'G' => Formula::globally(inner),
                    'Y' => Formula::prev(inner),
                    'O' => Formula::once(inner),
                    'H' => Formula::historically(inner),
                    _ => unreachable!("lexer only emits temporal letters"),
                })
            }
            Tok::Know => {
                self.bump();
                let agent = self.agent_index()?;
                Ok(Formula::know(agent, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::At {
                    self.bump();
                    let var = self.ident()?;
                    Ok(Formula::Traced(name, var))
                } else {
                    Ok(Formula::Atom(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            other => {
                Err(self.error_here(format!("expected a formula, found {}", other.describe())))
            }
        }
    }
}

/// Parses formula source text.
///
/// Binding from loosest to tightest: `<->`, `->` (right), `|`, `&`, the
/// counterfactuals `WOULD[a] MIGHT[a] UWOULD[a] EMIGHT[a]` (non-associative),
/// `U`/`S` (right), then the prefix operators `! X F G Y O H K[a]`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek().describe())));
    }
    Ok(f)
}
