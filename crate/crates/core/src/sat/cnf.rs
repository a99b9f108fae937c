use std::fmt;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("formula needs at least 2 variables, got {0}")]
    TooFewVariables(u32),
    #[error("formula has no clauses")]
    NoClauses,
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("clause {clause} is a tautology (contains x{variable} and its negation)")]
    Tautology { clause: usize, variable: u32 },
    #[error("clause {clause} mentions x{variable}, but only {declared} variables are declared")]
    VariableOutOfRange { clause: usize, variable: u32, declared: u32 },
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    /// 1-based variable index.
    pub variable: u32,
    pub positive: bool,
}

impl Literal {
    pub fn from_dimacs(value: i64) -> Literal {
        Literal { variable: value.unsigned_abs() as u32, positive: value > 0 }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.variable as usize - 1] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.variable)
        } else {
            write!(f, "~x{}", self.variable)
        }
    }
}

/// Disjunction of literals, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Literal>);

impl Clause {
    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn contains(&self, variable: u32, positive: bool) -> bool {
        self.0.iter().any(|l| l.variable == variable && l.positive == positive)
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.0.iter().any(|l| l.eval(assignment))
    }
}

/// CNF formula with `n >= 2` variables and at least one clause; no clause is
/// empty or tautological.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CnfFormula {
    variables: u32,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(variables: u32, clauses: Vec<Vec<Literal>>) -> Result<Self, CnfError> {
        if variables < 2 {
            return Err(CnfError::TooFewVariables(variables));
        }
        if clauses.is_empty() {
            return Err(CnfError::NoClauses);
        }
        let mut out = Vec::with_capacity(clauses.len());
        for (idx, mut lits) in clauses.into_iter().enumerate() {
            let clause = idx + 1;
            if lits.is_empty() {
                return Err(CnfError::EmptyClause { clause });
            }
            lits.sort();
            lits.dedup();
            for l in &lits {
                if l.variable == 0 || l.variable > variables {
                    return Err(CnfError::VariableOutOfRange { clause, variable: l.variable, declared: variables });
                }
            }
            if let Some(w) = lits.windows(2).find(|w| w[0].variable == w[1].variable) {
                return Err(CnfError::Tautology { clause, variable: w[0].variable });
            }
            out.push(Clause(lits));
        }
        Ok(CnfFormula { variables, clauses: out })
    }

    /// Clauses given as signed DIMACS integers without the terminating 0.
    pub fn from_dimacs_clauses(variables: u32, clauses: &[&[i64]]) -> Result<Self, CnfError> {
        Self::new(variables, clauses.iter().map(|c| c.iter().map(|&v| Literal::from_dimacs(v)).collect()).collect())
    }

    pub fn variable_count(&self) -> u32 {
        self.variables
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assert_eq!(assignment.len(), self.variables as usize, "assignment length");
        self.clauses.iter().all(|c| c.eval(assignment))
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.variables, self.clauses.len());
        for c in &self.clauses {
            for l in c.literals() {
                let v = l.variable as i64;
                out.push_str(&format!("{} ", if l.positive { v } else { -v }));
            }
            out.push_str("0\n");
        }
        out
    }

    /// Random formula with `2..=max_vars` variables and `1..=max_clauses`
    /// clauses, each over distinct variables with random polarities.
    pub fn random<R: Rng>(rng: &mut R, max_vars: u32, max_clauses: usize) -> Self {
        let n = rng.gen_range(2..=max_vars.max(2));
        let m = rng.gen_range(1..=max_clauses.max(1));
        let clauses = (0..m)
            .map(|_| {
                let size = rng.gen_range(1..=n);
                let mut vars: Vec<u32> = (1..=n).collect();
                for i in 0..size as usize {
                    let j = rng.gen_range(i..vars.len());
                    vars.swap(i, j);
                }
                vars[..size as usize].iter().map(|&v| Literal { variable: v, positive: rng.gen() }).collect()
            })
            .collect();
        Self::new(n, clauses).expect("generator emits valid clauses")
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| format!("({})", c.literals().iter().map(Literal::to_string).collect::<Vec<_>>().join(" | ")))
            .collect();
        f.write_str(&parts.join(" & "))
    }
}

fn dimacs_err(line: usize, message: impl Into<String>) -> CnfError {
    CnfError::Dimacs { line, message: message.into() }
}

/// Parses DIMACS CNF: `c` comment lines, one `p cnf <vars> <clauses>`
/// header, then 0-terminated clauses that may span lines. A lone `%` ends
/// the clause section.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut header: Option<(u32, usize, usize)> = None;
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    let mut clause_lines: Vec<usize> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut current_start = 0;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed == "%" {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(dimacs_err(line, "duplicate problem line"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(dimacs_err(line, "expected `p cnf <variables> <clauses>`"));
            }
            let vars =
                fields[2].parse().map_err(|_| dimacs_err(line, format!("bad variable count {:?}", fields[2])))?;
            let count = fields[3].parse().map_err(|_| dimacs_err(line, format!("bad clause count {:?}", fields[3])))?;
            header = Some((vars, count, line));
            continue;
        }
        let Some((vars, _, _)) = header else {
            return Err(dimacs_err(line, "clause before the `p cnf` header"));
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| dimacs_err(line, format!("invalid literal {token:?}")))?;
            if value == 0 {
                if current.is_empty() {
                    return Err(dimacs_err(line, "empty clause"));
                }
                if let Some(w) = {
                    let mut sorted = current.clone();
                    sorted.sort();
                    sorted.dedup();
                    sorted.windows(2).find(|w| w[0].variable == w[1].variable).map(|w| w[0].variable)
                } {
                    return Err(dimacs_err(current_start, format!("tautological clause contains x{w} and ~x{w}")));
                }
                clauses.push(std::mem::take(&mut current));
                clause_lines.push(current_start);
                continue;
            }
            if value.unsigned_abs() > vars as u64 {
                return Err(dimacs_err(line, format!("literal {value} exceeds the declared {vars} variables")));
            }
            if current.is_empty() {
                current_start = line;
            }
            current.push(Literal::from_dimacs(value));
        }
    }
    let Some((vars, count, header_line)) = header else {
        return Err(dimacs_err(last_line.max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(dimacs_err(current_start, "clause is missing its terminating 0"));
    }
    if clauses.len() != count {
        return Err(dimacs_err(header_line, format!("header declares {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses).map_err(|e| match e {
        CnfError::TooFewVariables(_) | CnfError::NoClauses => dimacs_err(header_line, e.to_string()),
        other => other,
    })
}
