use super::Formula;
use std::fmt;
use thiserror::Error;

/// One reason a formula cannot serve as a similarity relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RelationalProblem {
    /// `K`, or a counterfactual, at the given child-index path.
    ForbiddenOperator {
        operator: String,
        path: String,
    },
    UndeclaredTraceVariable(String),
    /// A plain proposition with no trace variable attached.
    UntracedAtom {
        prop: String,
        path: String,
    },
}

impl fmt::Display for RelationalProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationalProblem::ForbiddenOperator { operator, path } => {
                write!(
                    f,
                    "operator {operator} not allowed in a relational formula (at {path})"
                )
            }
            RelationalProblem::UndeclaredTraceVariable(v) => {
                write!(f, "trace variable `{v}` is not a declared parameter")
            }
            RelationalProblem::UntracedAtom { prop, path } => {
                write!(f, "proposition `{prop}` needs a trace variable (at {path})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid relational formula: {}", .problems.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("; "))]
pub struct RelationalError {
    pub problems: Vec<RelationalProblem>,
}

/// A temporal formula over traced atoms relating three traces: the
/// reference trace, a candidate that is at least as close, and a candidate
/// that is at most as close.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationalFormula {
    params: [String; 3],
    source: Formula,
    core: Formula,
}

impl RelationalFormula {
    pub fn params(&self) -> &[String; 3] {
        &self.params
    }

    /// The formula as written.
    pub fn source(&self) -> &Formula {
        &self.source
    }

    /// The desugared formula used for evaluation and translation.
    pub fn core(&self) -> &Formula {
        &self.core
    }

    /// Index of a trace variable among the parameters.
    pub fn param_index(&self, var: &str) -> Option<usize> {
        self.params.iter().position(|p| p == var)
    }
}

fn collect(
    f: &Formula,
    params: &[String; 3],
    path: &mut Vec<usize>,
    out: &mut Vec<RelationalProblem>,
) {
    let here = || {
        if path.is_empty() {
            "root".to_string()
        } else {
            path.iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(".")
        }
    };
    match f {
        Formula::Know(a, _) => out.push(RelationalProblem::ForbiddenOperator {
            operator: format!("K[{a}]"),
            path: here(),
        }),
        Formula::Atom(p) => out.push(RelationalProblem::UntracedAtom {
            prop: p.clone(),
            path: here(),
        }),
        Formula::Traced(_, v) => {
            let problem = RelationalProblem::UndeclaredTraceVariable(v.clone());
            if !params.contains(v) && !out.contains(&problem) {
                out.push(problem);
            }
        }
        other => {
            if let Some((op, a, _, _)) = other.as_counterfactual() {
                out.push(RelationalProblem::ForbiddenOperator {
                    operator: format!("{}[{a}]", op.keyword()),
                    path: here(),
                });
            }
        }
    }
    for (k, c) in f.children().into_iter().enumerate() {
        path.push(k);
        collect(c, params, path, out);
        path.pop();
    }
}

/// Checks that `f` only uses traced atoms over `params`, booleans, and
/// future/past temporal operators.
pub fn validate_relational(
    f: &Formula,
    params: [&str; 3],
) -> Result<RelationalFormula, RelationalError> {
    let params = params.map(str::to_string);
    let mut problems = Vec::new();
    collect(f, &params, &mut Vec::new(), &mut problems);
    if params[0] == params[1] || params[0] == params[2] || params[1] == params[2] {
        problems.push(RelationalProblem::UndeclaredTraceVariable(format!(
            "duplicate parameter list {params:?}"
        )));
    }
    if !problems.is_empty() {
        return Err(RelationalError { problems });
    }
    Ok(RelationalFormula {
        params,
        source: f.clone(),
        core: f.desugar(),
    })
}
