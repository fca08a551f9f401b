//! SMT-LIB2 export and a line-based session with an external solver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use num_traits::{Signed, Zero};

use crate::difflogic::{DLAtom, DLFormula, DLRel, DLVar};
use crate::num::Rat;

use super::{DlBackend, Model, SatVerdict, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmtLogic {
    /// `QF_RDL`, real-valued difference logic.
    Real,
    /// `QF_IDL`; only equivalent when every constant is an integer and no
    /// atom is strict.
    Integer,
}

impl SmtLogic {
    /// Integer logic when requested and sound for `stack`, else real.
    pub fn choose(stack: &[DLFormula], prefer_integer: bool) -> SmtLogic {
        let integral = stack.iter().all(|f| {
            !f.has_strict() && f.atoms().iter().all(|a| a.c.is_integer())
        });
        if prefer_integer && integral {
            SmtLogic::Integer
        } else {
            SmtLogic::Real
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SmtLogic::Real => "QF_RDL",
            SmtLogic::Integer => "QF_IDL",
        }
    }

    fn sort(&self) -> &'static str {
        match self {
            SmtLogic::Real => "Real",
            SmtLogic::Integer => "Int",
        }
    }
}

fn literal(c: Rat, logic: SmtLogic) -> String {
    let mag = c.abs();
    let body = match logic {
        SmtLogic::Integer => mag.to_integer().to_string(),
        SmtLogic::Real if mag.is_integer() => format!("{}.0", mag.to_integer()),
        SmtLogic::Real => format!("(/ {}.0 {}.0)", mag.numer(), mag.denom()),
    };
    if c.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn atom_term(a: &DLAtom, logic: SmtLogic) -> String {
    let op = match a.rel {
        DLRel::Ge => ">=",
        DLRel::Gt => ">",
        DLRel::Eq => "=",
    };
    format!("({op} (- {} {}) {})", a.lhs.name(), a.rhs.name(), literal(a.c, logic))
}

fn term(f: &DLFormula, logic: SmtLogic, out: &mut String) {
    match f {
        DLFormula::Atom(a) => out.push_str(&atom_term(a, logic)),
        DLFormula::True => out.push_str("true"),
        DLFormula::False => out.push_str("false"),
        DLFormula::And(ps) | DLFormula::Or(ps) => {
            let (op, unit) = match f {
                DLFormula::And(_) => ("and", "true"),
                _ => ("or", "false"),
            };
            match ps.len() {
                0 => out.push_str(unit),
                1 => term(&ps[0], logic, out),
                _ => {
                    out.push('(');
                    out.push_str(op);
                    for p in ps {
                        out.push(' ');
                        term(p, logic, out);
                    }
                    out.push(')');
                }
            }
        }
    }
}

fn variables(stack: &[DLFormula]) -> BTreeSet<DLVar> {
    stack.iter().flat_map(|f| f.vars()).collect()
}

/// Logic, declarations and one assertion per stack fragment.
fn script_body(stack: &[DLFormula], logic: SmtLogic) -> String {
    let mut s = String::new();
    writeln!(s, "(set-logic {})", logic.name()).expect("string write");
    for v in variables(stack) {
        writeln!(s, "(declare-fun {} () {})", v.name(), logic.sort()).expect("string write");
    }
    for f in stack {
        s.push_str("(assert ");
        term(f, logic, &mut s);
        s.push_str(")\n");
    }
    s
}

/// A standalone SMT-LIB2 script deciding the conjunction of `stack`.
pub fn to_smtlib(stack: &[DLFormula], prefer_integer: bool) -> String {
    let logic = SmtLogic::choose(stack, prefer_integer);
    let mut s = String::from("(set-option :produce-models true)\n");
    s.push_str(&script_body(stack, logic));
    s.push_str("(check-sat)\n(get-model)\n(exit)\n");
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Result<Vec<String>, SolverError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' | ')' => {
                tokens.push(c.to_string());
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '|' => {
                chars.next();
                let mut sym = String::new();
                loop {
                    match chars.next() {
                        Some('|') => break,
                        Some(ch) => sym.push(ch),
                        None => return Err(SolverError::Parse("unterminated |symbol|".into())),
                    }
                }
                tokens.push(sym);
            }
            '"' => {
                chars.next();
                let mut lit = String::from("\"");
                loop {
                    match chars.next() {
                        Some('"') if chars.peek() == Some(&'"') => {
                            chars.next();
                            lit.push('"');
                        }
                        Some('"') => break,
                        Some(ch) => lit.push(ch),
                        None => return Err(SolverError::Parse("unterminated string".into())),
                    }
                }
                tokens.push(lit);
            }
            _ => {
                let mut sym = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch == '(' || ch == ')' || ch.is_whitespace() {
                        break;
                    }
                    sym.push(ch);
                    chars.next();
                }
                tokens.push(sym);
            }
        }
    }
    Ok(tokens)
}

fn parse_sexp(text: &str) -> Result<Sexp, SolverError> {
    fn go(tokens: &[String], pos: &mut usize) -> Result<Sexp, SolverError> {
        let tok = tokens
            .get(*pos)
            .ok_or_else(|| SolverError::Parse("unexpected end of s-expression".into()))?;
        *pos += 1;
        match tok.as_str() {
            "(" => {
                let mut items = Vec::new();
                loop {
                    match tokens.get(*pos).map(String::as_str) {
                        Some(")") => {
                            *pos += 1;
                            return Ok(Sexp::List(items));
                        }
                        Some(_) => items.push(go(tokens, pos)?),
                        None => return Err(SolverError::Parse("unbalanced parentheses".into())),
                    }
                }
            }
            ")" => Err(SolverError::Parse("unexpected ')'".into())),
            _ => Ok(Sexp::Atom(tok.clone())),
        }
    }
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let e = go(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(SolverError::Parse(format!("trailing input in {text:?}")));
    }
    Ok(e)
}

fn parse_number(s: &str) -> Result<Rat, SolverError> {
    crate::num::parse_rat(s).ok_or_else(|| SolverError::Parse(format!("not a number: {s}")))
}

/// Numeric value terms: `3`, `3.0`, `(- x)`, `(/ x y)`.
fn value_of(e: &Sexp) -> Result<Rat, SolverError> {
    match e {
        Sexp::Atom(a) => parse_number(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => Ok(-value_of(x)?),
            [Sexp::Atom(op), x, y] if op == "/" => {
                let d = value_of(y)?;
                if d.is_zero() {
                    return Err(SolverError::Parse("division by zero in model".into()));
                }
                Ok(value_of(x)? / d)
            }
            [Sexp::Atom(op), x, y] if op == "-" => Ok(value_of(x)? - value_of(y)?),
            _ => Err(SolverError::Parse(format!("unsupported value term {e:?}"))),
        },
    }
}

/// Parses a `get-value` response `((name value) ...)`.
fn parse_values(text: &str) -> Result<BTreeMap<DLVar, Rat>, SolverError> {
    let Sexp::List(pairs) = parse_sexp(text)? else {
        return Err(SolverError::Parse(format!("expected a list: {text}")));
    };
    let mut out = BTreeMap::new();
    for p in pairs {
        match p {
            Sexp::List(kv) if kv.len() == 2 => {
                let Sexp::Atom(name) = &kv[0] else {
                    return Err(SolverError::Parse("expected a variable name".into()));
                };
                let v = DLVar::parse_name(name)
                    .ok_or_else(|| SolverError::Parse(format!("unknown variable {name}")))?;
                out.insert(v, value_of(&kv[1])?);
            }
            other => return Err(SolverError::Parse(format!("bad binding {other:?}"))),
        }
    }
    Ok(out)
}

/// Normalizes to `x0 = 0` and checks the model against every fragment.
fn finish_model(stack: &[DLFormula], mut values: BTreeMap<DLVar, Rat>) -> Result<Model, SolverError> {
    if let Some(z) = values.get(&DLVar::zero()).copied() {
        for v in values.values_mut() {
            *v -= z;
        }
    }
    let model = Model { values };
    if let Some(f) = stack.iter().find(|f| !model.satisfies(f)) {
        return Err(SolverError::Internal(format!("external model violates {f}")));
    }
    Ok(model)
}

/// A long-lived external solver reading SMT-LIB2 on stdin, e.g. `z3 -in`.
#[derive(Debug)]
pub struct ExternalSolver {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    prefer_integer: bool,
}

impl ExternalSolver {
    /// Starts `command` (whitespace-separated program and arguments).
    pub fn spawn(command: &str) -> Result<Self, SolverError> {
        let mut parts = command.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| SolverError::Process("empty solver command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Process(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalSolver {
            child,
            stdin,
            stdout,
            prefer_integer: false,
        })
    }

    pub fn prefer_integer(mut self, yes: bool) -> Self {
        self.prefer_integer = yes;
        self
    }

    fn send(&mut self, text: &str) -> Result<(), SolverError> {
        self.stdin
            .write_all(text.as_bytes())
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SolverError::Process(e.to_string()))
    }

    /// Next balanced response, skipping blank lines.
    fn read_response(&mut self) -> Result<String, SolverError> {
        let mut text = String::new();
        let mut depth = 0i64;
        loop {
            let mut line = String::new();
            let n = self
                .stdout
                .read_line(&mut line)
                .map_err(|e| SolverError::Process(e.to_string()))?;
            if n == 0 {
                return Err(SolverError::Process("solver closed its output".into()));
            }
            if text.is_empty() && line.trim().is_empty() {
                continue;
            }
            for c in line.chars() {
                match c {
                    '(' => depth += 1,
                    ')' => depth -= 1,
                    _ => {}
                }
            }
            text.push_str(&line);
            if depth <= 0 {
                return Ok(text.trim().to_string());
            }
        }
    }

    /// Decides the conjunction of `stack` from a clean solver state.
    pub fn check(&mut self, stack: &[DLFormula]) -> Result<SatVerdict, SolverError> {
        let logic = SmtLogic::choose(stack, self.prefer_integer);
        let mut script = String::from("(reset)\n(set-option :produce-models true)\n");
        script.push_str(&script_body(stack, logic));
        script.push_str("(check-sat)\n");
        self.send(&script)?;
        let answer = self.read_response()?;
        match answer.as_str() {
            "unsat" => Ok(SatVerdict::Unsat),
            "unknown" => Err(SolverError::Unknown),
            "sat" => {
                let vars = variables(stack);
                if vars.is_empty() {
                    return Ok(SatVerdict::Sat(Model::default()));
                }
                let names: Vec<String> = vars.iter().map(|v| v.name()).collect();
                self.send(&format!("(get-value ({}))\n", names.join(" ")))?;
                let values = parse_values(&self.read_response()?)?;
                Ok(SatVerdict::Sat(finish_model(stack, values)?))
            }
            other => Err(SolverError::Parse(format!("unexpected answer {other:?}"))),
        }
    }
}

impl Drop for ExternalSolver {
    fn drop(&mut self) {
        let _ = self.send("(exit)\n");
        let _ = self.child.wait();
    }
}

/// One-off external check of `stack`.
pub fn check_external(stack: &[DLFormula], command: &str) -> Result<SatVerdict, SolverError> {
    ExternalSolver::spawn(command)?.check(stack)
}

/// Push/pop facade over an external solver: the stack is kept locally and
/// replayed on every check.
#[derive(Debug)]
pub struct ExternalContext {
    stack: Vec<DLFormula>,
    solver: ExternalSolver,
}

impl ExternalContext {
    pub fn new(solver: ExternalSolver) -> Self {
        ExternalContext {
            stack: Vec::new(),
            solver,
        }
    }

    pub fn formulas(&self) -> &[DLFormula] {
        &self.stack
    }
}

impl DlBackend for ExternalContext {
    fn push(&mut self, f: DLFormula) -> Result<(), SolverError> {
        self.stack.push(f);
        Ok(())
    }

    fn pop(&mut self) -> Result<DLFormula, SolverError> {
        self.stack.pop().ok_or(SolverError::EmptyStack)
    }

    fn check(&mut self) -> Result<SatVerdict, SolverError> {
        self.solver.check(&self.stack)
    }
}
