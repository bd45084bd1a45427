use super::Formula;
use std::fmt;

// Binding levels, loosest first. Parentheses are emitted only where the
// parser would otherwise build a different tree.
const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const CF: u8 = 5;
const TEMPORAL: u8 = 6;
const UNARY: u8 = 7;
const ATOM: u8 = 8;

fn level(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        True | False | Atom(_) | Traced(..) => ATOM,
        Not(_) | Next(_) | Prev(_) | Eventually(_) | Globally(_) | Once(_) | Historically(_)
        | Know(..) => UNARY,
        Until(..) | Since(..) => TEMPORAL,
        Would(..) | UWould(..) | Might(..) | EMight(..) => CF,
        And(..) => AND,
        Or(..) => OR,
        Implies(..) => IMPLIES,
        Iff(..) => IFF,
    }
}

fn write_at(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(f) < min {
        out.write_str("(")?;
        write_formula(f, out)?;
        out.write_str(")")
    } else {
        write_formula(f, out)
    }
}

fn binary(
    l: &Formula,
    lmin: u8,
    op: &str,
    r: &Formula,
    rmin: u8,
    out: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    write_at(l, lmin, out)?;
    write!(out, " {op} ")?;
    write_at(r, rmin, out)
}

fn prefix(op: &str, f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    out.write_str(op)?;
    write_at(f, UNARY, out)
}

fn write_formula(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    use Formula::*;
    match f {
        True => out.write_str("true"),
        False => out.write_str("false"),
        Atom(p) => out.write_str(p),
        Traced(p, v) => write!(out, "{p}@{v}"),
        Not(g) => prefix("!", g, out),
        Next(g) => prefix("X ", g, out),
        Prev(g) => prefix("Y ", g, out),
        Eventually(g) => prefix("F ", g, out),
        Globally(g) => prefix("G ", g, out),
        Once(g) => prefix("O ", g, out),
        Historically(g) => prefix("H ", g, out),
        Know(a, g) => prefix(&format!("K[{a}] "), g, out),
        Until(l, r) => binary(l, UNARY, "U", r, TEMPORAL, out),
        Since(l, r) => binary(l, UNARY, "S", r, TEMPORAL, out),
        And(l, r) => binary(l, AND, "&", r, CF, out),
        Or(l, r) => binary(l, OR, "|", r, AND, out),
        Implies(l, r) => binary(l, OR, "->", r, IMPLIES, out),
        Iff(l, r) => binary(l, IFF, "<->", r, IMPLIES, out),
        _ => {
            let (op, a, l, r) = f
                .as_counterfactual()
                .expect("remaining variants are counterfactuals");
            binary(
                l,
                TEMPORAL,
                &format!("{}[{a}]", op.keyword()),
                r,
                TEMPORAL,
                out,
            )
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f)
    }
}
