//! A line-oriented session language and its runner.
//!
//! ```text
//! precision 16
//! let F = fresco [(3/2, 1), (1/2)]
//! let X = xi 1/2 1
//! let M = module [[1/2*b, b], [0, 1/2*b]] precision 8
//! let S = system [[1/2 + z]]
//! show bernstein F        # comments run to the end of the line
//! show expansion X 4
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::decomposition::{
    eigen_elements, higher_bernstein, primitive_split, semisimple_filtration,
};
use crate::error::{AbError, Result};
use crate::fresco::{
    bernstein_via_formula, fresco_from_presentation, generated_submodule, jh_split,
    render_left_form, Fresco, FrescoPresentation,
};
use crate::gauss_manin::{
    embed_into_xi, from_differential_system, realize_expansion, singular_term_report, DiffSystem,
};
use crate::module::{AbModule, BernsteinMode, ModuleElement, XiLayout};
use crate::poly::RationalPolynomial;
use crate::saturation::{bernstein_polynomial, is_geometric, saturate};
use crate::scalar::{fmt_rational, parse_rational, Rational};
use crate::series::{render_poly, TruncSeries, DEFAULT_PRECISION, MAX_PRECISION};

/// A polynomial literal, coefficients ascending, trailing zeros trimmed.
pub type PolyLit = Vec<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub enum Binding {
    /// `(lambda_j, S_j)`; a missing unit means 1.
    Fresco(Vec<(Rational, Option<PolyLit>)>),
    Xi {
        alphas: Vec<Rational>,
        bracketed: bool,
        n: usize,
        dim: Option<usize>,
    },
    /// Entries are series in `b`.
    Module(Vec<Vec<PolyLit>>),
    /// Entries are polynomials in `z`.
    System(Vec<Vec<PolyLit>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Bernstein,
    Saturate,
    Geometric,
    Filtration,
    HigherBernstein,
    Primitive(Vec<Rational>),
    Eigen(Rational),
    Embed,
    Expansion(Option<usize>),
    Report,
    Jh(Vec<PolyLit>),
    Generated(Vec<PolyLit>),
    Formula,
}

impl Command {
    pub fn keyword(&self) -> &'static str {
        match self {
            Command::Bernstein => "bernstein",
            Command::Saturate => "saturate",
            Command::Geometric => "geometric",
            Command::Filtration => "filtration",
            Command::HigherBernstein => "higher_bernstein",
            Command::Primitive(_) => "primitive",
            Command::Eigen(_) => "eigen",
            Command::Embed => "embed",
            Command::Expansion(_) => "expansion",
            Command::Report => "report",
            Command::Jh(_) => "jh",
            Command::Generated(_) => "generated",
            Command::Formula => "formula",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Precision(usize),
    Let {
        name: String,
        binding: Binding,
        precision: Option<usize>,
    },
    Show {
        command: Command,
        name: String,
    },
}

#[derive(Clone, Debug, Default)]
pub struct Session {
    pub stmts: Vec<Stmt>,
    /// Source line (1-based) of each statement.
    pub lines: Vec<usize>,
}

impl PartialEq for Session {
    fn eq(&self, o: &Self) -> bool {
        self.stmts == o.stmts
    }
}

fn trim_poly(mut p: PolyLit) -> PolyLit {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn render_lit(p: &PolyLit, var: &str) -> String {
    render_poly(p, var)
}

fn render_list(items: &[PolyLit], var: &str) -> String {
    format!(
        "[{}]",
        items
            .iter()
            .map(|p| render_lit(p, var))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn render_matrix(rows: &[Vec<PolyLit>], var: &str) -> String {
    format!(
        "[{}]",
        rows.iter()
            .map(|r| render_list(r, var))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn render_rationals(rs: &[Rational]) -> String {
    format!(
        "[{}]",
        rs.iter().map(fmt_rational).collect::<Vec<_>>().join(", ")
    )
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Fresco(factors) => {
                let parts: Vec<String> = factors
                    .iter()
                    .map(|(l, s)| match s {
                        Some(s) => format!("({}, {})", fmt_rational(l), render_lit(s, "b")),
                        None => format!("({})", fmt_rational(l)),
                    })
                    .collect();
                write!(f, "fresco [{}]", parts.join(", "))
            }
            Binding::Xi {
                alphas,
                bracketed,
                n,
                dim,
            } => {
                let a = if *bracketed || alphas.len() != 1 {
                    render_rationals(alphas)
                } else {
                    fmt_rational(&alphas[0])
                };
                write!(f, "xi {a} {n}")?;
                if let Some(d) = dim {
                    write!(f, " {d}")?;
                }
                Ok(())
            }
            Binding::Module(rows) => write!(f, "module {}", render_matrix(rows, "b")),
            Binding::System(rows) => write!(f, "system {}", render_matrix(rows, "z")),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Precision(n) => write!(f, "precision {n}"),
            Stmt::Let {
                name,
                binding,
                precision,
            } => {
                write!(f, "let {name} = {binding}")?;
                if let Some(p) = precision {
                    write!(f, " precision {p}")?;
                }
                Ok(())
            }
            Stmt::Show { command, name } => {
                write!(f, "show {} {name}", command.keyword())?;
                match command {
                    Command::Primitive(cs) => write!(f, " {}", render_rationals(cs)),
                    Command::Eigen(l) => write!(f, " {}", fmt_rational(l)),
                    Command::Expansion(Some(o)) => write!(f, " {o}"),
                    Command::Jh(x) | Command::Generated(x) => write!(f, " {}", render_list(x, "b")),
                    _ => Ok(()),
                }
            }
        }
    }
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.stmts {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Cursor over one line.
struct Line {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Line {
    fn new(src: &str, line: usize) -> Self {
        Line {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(AbError::Parse {
            line: self.line,
            col: self.pos + 1,
            msg: msg.into(),
        })
    }

    fn ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn word(&mut self) -> Result<String> {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.chars[start].is_ascii_digit() {
            self.pos = start;
            return self.err("expected a name");
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let save = self.pos;
        match self.word() {
            Ok(w) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                self.ws();
                self.err(format!("expected `{kw}`"))
            }
        }
    }

    fn token(&mut self) -> String {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && !self.chars[self.pos].is_whitespace()
            && !matches!(self.chars[self.pos], ',' | ']' | ')' | '[' | '(')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn rational(&mut self) -> Result<Rational> {
        self.ws();
        let start = self.pos;
        let t = self.token();
        parse_rational(&t).or_else(|_| {
            self.pos = start;
            self.err(format!("expected a rational, found `{t}`"))
        })
    }

    fn natural(&mut self) -> Result<usize> {
        self.ws();
        let start = self.pos;
        let t = self.token();
        match t.parse::<usize>() {
            Ok(n) if n <= MAX_PRECISION => Ok(n),
            _ => {
                self.pos = start;
                self.err(format!("expected a non-negative integer, found `{t}`"))
            }
        }
    }

    /// Polynomial expression up to the next top-level `,`, `]` or `)`.
    fn poly(&mut self, var: char) -> Result<PolyLit> {
        self.ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && !matches!(self.chars[self.pos], ',' | ']' | ')' | '[' | '(')
        {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        match TruncSeries::parse_poly(&text, var) {
            Ok(p) => Ok(trim_poly(p)),
            Err(e) => {
                self.pos = start;
                let msg = match e {
                    AbError::Parse { msg, .. } => msg,
                    other => other.to_string(),
                };
                self.err(msg)
            }
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect('[')?;
        let mut out = Vec::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return self.err("expected `,` or `]`"),
            }
        }
    }

    fn matrix(&mut self, var: char) -> Result<Vec<Vec<PolyLit>>> {
        let col = self.pos;
        let rows = self.list(|l| l.list(|l| l.poly(var)))?;
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            self.pos = col;
            self.ws();
            return self.err("matrix must be square and non-empty");
        }
        Ok(rows)
    }

    fn factor(&mut self) -> Result<(Rational, Option<PolyLit>)> {
        self.expect('(')?;
        let l = self.rational()?;
        let s = if self.peek() == Some(',') {
            self.pos += 1;
            Some(self.poly('b')?)
        } else {
            None
        };
        self.expect(')')?;
        Ok((l, s))
    }

    fn binding(&mut self) -> Result<Binding> {
        let save = self.pos;
        let kind = self.word()?;
        match kind.as_str() {
            "fresco" => {
                let fs = self.list(|l| l.factor())?;
                if fs.is_empty() {
                    return self.err("a fresco needs at least one factor");
                }
                Ok(Binding::Fresco(fs))
            }
            "xi" => {
                let (alphas, bracketed) = if self.peek() == Some('[') {
                    (self.list(|l| l.rational())?, true)
                } else {
                    (vec![self.rational()?], false)
                };
                if alphas.is_empty() {
                    return self.err("xi needs at least one alpha");
                }
                let n = self.natural()?;
                let dim = match self.peek() {
                    Some(c) if c.is_ascii_digit() => Some(self.natural()?),
                    _ => None,
                };
                Ok(Binding::Xi {
                    alphas,
                    bracketed,
                    n,
                    dim,
                })
            }
            "module" => Ok(Binding::Module(self.matrix('b')?)),
            "system" => Ok(Binding::System(self.matrix('z')?)),
            _ => {
                self.pos = save;
                self.ws();
                self.err(format!("unknown binding kind `{kind}`"))
            }
        }
    }

    fn command(&mut self) -> Result<(Command, String)> {
        let save = self.pos;
        let kw = self.word()?;
        let name_after = |l: &mut Self| l.word();
        let cmd = match kw.as_str() {
            "bernstein" => Command::Bernstein,
            "saturate" => Command::Saturate,
            "geometric" => Command::Geometric,
            "filtration" => Command::Filtration,
            "higher_bernstein" => Command::HigherBernstein,
            "embed" => Command::Embed,
            "report" => Command::Report,
            "formula" => Command::Formula,
            "primitive" => {
                let name = name_after(self)?;
                return Ok((Command::Primitive(self.list(|l| l.rational())?), name));
            }
            "eigen" => {
                let name = name_after(self)?;
                return Ok((Command::Eigen(self.rational()?), name));
            }
            "expansion" => {
                let name = name_after(self)?;
                let order = if self.at_end() {
                    None
                } else {
                    Some(self.natural()?)
                };
                return Ok((Command::Expansion(order), name));
            }
            "jh" | "generated" => {
                let name = name_after(self)?;
                let x = self.list(|l| l.poly('b'))?;
                let c = if kw == "jh" {
                    Command::Jh(x)
                } else {
                    Command::Generated(x)
                };
                return Ok((c, name));
            }
            _ => {
                self.pos = save;
                self.ws();
                return self.err(format!("unknown command `{kw}`"));
            }
        };
        Ok((cmd, name_after(self)?))
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let save = self.pos;
        let head = self.word()?;
        let s = match head.as_str() {
            "precision" => Stmt::Precision(self.positive()?),
            "let" => {
                let name = self.word()?;
                self.expect('=')?;
                let binding = self.binding()?;
                let precision = if self.at_end() {
                    None
                } else {
                    self.keyword("precision")?;
                    Some(self.positive()?)
                };
                Stmt::Let {
                    name,
                    binding,
                    precision,
                }
            }
            "show" => {
                let (command, name) = self.command()?;
                Stmt::Show { command, name }
            }
            _ => {
                self.pos = save;
                self.ws();
                return self.err(format!(
                    "expected `precision`, `let` or `show`, found `{head}`"
                ));
            }
        };
        if !self.at_end() {
            return self.err("unexpected trailing input");
        }
        Ok(s)
    }

    fn positive(&mut self) -> Result<usize> {
        let save = self.pos;
        let n = self.natural()?;
        if n == 0 || n > MAX_PRECISION {
            self.pos = save;
            self.ws();
            return self.err(format!("precision must lie in 1..={MAX_PRECISION}"));
        }
        Ok(n)
    }
}

/// Parses a session, checking that names are defined once before use.
pub fn parse_session(text: &str) -> Result<Session> {
    let mut session = Session::default();
    let mut names: HashSet<String> = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let mut cur = Line::new(content, line_no);
        let stmt = cur.stmt()?;
        match &stmt {
            Stmt::Let { name, .. } => {
                if !names.insert(name.clone()) {
                    return Err(AbError::DuplicateName {
                        line: line_no,
                        name: name.clone(),
                    });
                }
            }
            Stmt::Show { name, .. } => {
                if !names.contains(name) {
                    return Err(AbError::UnknownName {
                        line: line_no,
                        name: name.clone(),
                    });
                }
            }
            Stmt::Precision(_) => {}
        }
        session.stmts.push(stmt);
        session.lines.push(line_no);
    }
    Ok(session)
}

/// Runner settings; `precision` is the default before any `precision` line.
#[derive(Clone, Debug)]
pub struct Settings {
    pub precision: usize,
    pub max_sat_iter: Option<usize>,
    pub seed: u64,
    /// Treat validation diagnostics as errors.
    pub check: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            precision: DEFAULT_PRECISION,
            max_sat_iter: None,
            seed: 0,
            check: false,
        }
    }
}

/// Outcome of one `show` command.
#[derive(Clone, Debug)]
pub struct CommandResult {
    pub index: usize,
    pub line: usize,
    pub source: String,
    pub outcome: std::result::Result<Value, String>,
    pub text: Vec<String>,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub results: Vec<CommandResult>,
}

impl Report {
    pub fn failed(&self) -> bool {
        self.results.iter().any(|r| r.outcome.is_err())
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.failed())
    }

    pub fn to_json(&self) -> Value {
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                let mut v = json!({
                    "index": r.index,
                    "line": r.line,
                    "command": r.source,
                    "diagnostics": r.diagnostics,
                });
                match &r.outcome {
                    Ok(res) => v["result"] = res.clone(),
                    Err(e) => v["error"] = Value::String(e.clone()),
                }
                v
            })
            .collect();
        json!({ "results": results, "failed": self.failed() })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            out.push_str(&format!("[{}] {}\n", r.line, r.source));
            match &r.outcome {
                Ok(_) => {
                    for t in &r.text {
                        out.push_str(&format!("  {t}\n"));
                    }
                }
                Err(e) => out.push_str(&format!("  error: {e}\n")),
            }
            for d in &r.diagnostics {
                out.push_str(&format!("  note: {d}\n"));
            }
        }
        out
    }
}

const MAX_XI_RANK: usize = 64;

/// A binding evaluated at its precision.
struct Value_ {
    module: AbModule,
    fresco: Option<Fresco>,
    layout: Option<XiLayout>,
}

fn series_at(p: &PolyLit, prec: usize) -> TruncSeries {
    TruncSeries::from_poly(p, prec)
}

fn element(p: &[PolyLit], rank: usize, prec: usize) -> Result<ModuleElement> {
    if p.len() != rank {
        return Err(AbError::HostMismatch {
            expected: rank,
            got: p.len(),
        });
    }
    Ok(ModuleElement::new(
        p.iter().map(|c| series_at(c, prec)).collect(),
    ))
}

fn evaluate(b: &Binding, prec: usize) -> Result<Value_> {
    if prec == 0 || prec > MAX_PRECISION {
        return Err(AbError::Invalid(format!(
            "precision must lie in 1..={MAX_PRECISION}"
        )));
    }
    Ok(match b {
        Binding::Fresco(fs) => {
            let factors = fs
                .iter()
                .map(|(l, s)| (l.clone(), s.as_ref().map(|s| series_at(s, prec))))
                .collect();
            let p = FrescoPresentation::new(factors)?;
            let f = fresco_from_presentation(&p, prec)?;
            Value_ {
                module: f.module.clone(),
                fresco: Some(f),
                layout: None,
            }
        }
        Binding::Xi { alphas, n, dim, .. } => {
            let rank = alphas.len() * dim.unwrap_or(1) * (n + 1);
            if rank > MAX_XI_RANK {
                return Err(AbError::Invalid(format!(
                    "xi rank {rank} exceeds {MAX_XI_RANK}"
                )));
            }
            let layout = XiLayout::new(alphas.clone(), *n, dim.unwrap_or(1))?;
            Value_ {
                module: layout.build(prec),
                fresco: None,
                layout: Some(layout),
            }
        }
        Binding::Module(rows) => Value_ {
            module: AbModule::from_matrix(
                rows.iter()
                    .map(|r| r.iter().map(|c| series_at(c, prec)).collect())
                    .collect(),
            )?,
            fresco: None,
            layout: None,
        },
        Binding::System(rows) => {
            let sys = DiffSystem::new(rows.clone())?;
            Value_ {
                module: from_differential_system(&sys, prec)?,
                fresco: None,
                layout: None,
            }
        }
    })
}

struct Output {
    json: Value,
    text: Vec<String>,
    diagnostics: Vec<String>,
}

impl Output {
    fn new(json: Value, text: Vec<String>) -> Self {
        Output {
            json,
            text,
            diagnostics: Vec::new(),
        }
    }
}

fn bernstein_json(b: &RationalPolynomial) -> Value {
    let full = b.to_json();
    let mut v = json!({ "roots": full["roots"].clone() });
    if b.unsplit.is_some() {
        v["unsplit"] = full["unsplit"].clone();
    }
    v
}

fn names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("e{i}")).collect()
}

fn as_fresco(v: &Value_) -> Fresco {
    v.fresco.clone().unwrap_or_else(|| Fresco {
        module: v.module.clone(),
        generator: v.module.basis(0),
        presentation: None,
        left_form: None,
    })
}

fn execute(cmd: &Command, v: &Value_, s: &Settings) -> Result<Output> {
    let e = &v.module;
    let cap = s.max_sat_iter;
    Ok(match cmd {
        Command::Bernstein => {
            let (mode, hints) = match v.fresco.as_ref().and_then(|f| f.presentation.as_ref()) {
                Some(p) => (BernsteinMode::Characteristic, p.root_hints()),
                None => (BernsteinMode::Minimal, Vec::new()),
            };
            let b = bernstein_polynomial(e, mode, &hints, cap)?;
            Output::new(bernstein_json(&b), vec![b.to_string()])
        }
        Command::Saturate => {
            let sat = saturate(e, cap)?;
            let mut text = vec![format!(
                "iterations {}, shift {}",
                sat.iterations, sat.shift
            )];
            text.extend(sat.module.render_matrix());
            Output::new(sat.to_json(), text)
        }
        Command::Geometric => {
            let c = is_geometric(e, cap)?;
            let t = format!(
                "{}: {}",
                if c.geometric {
                    "geometric"
                } else {
                    "not geometric"
                },
                c.reason
            );
            Output::new(c.to_json(), vec![t])
        }
        Command::Filtration => {
            let f = semisimple_filtration(e, cap)?;
            let t = format!("d = {}, ranks {:?}", f.nilpotent_order(), f.ranks());
            Output::new(f.to_json(), vec![t])
        }
        Command::HigherBernstein => {
            let h = higher_bernstein(e, cap)?;
            let mut text = vec![format!("B = {}", h.bernstein)];
            for c in &h.classes {
                for l in &c.levels {
                    text.push(format!(
                        "[{}] B{} = {} (delta {})",
                        fmt_rational(&c.alpha),
                        l.j,
                        l.poly,
                        l.delta
                    ));
                }
            }
            for (j, b) in h.assembled.iter().enumerate() {
                text.push(format!("B{}(F) = {b}", j + 1));
            }
            text.push(format!("product check {}", h.product_check));
            let mut out = Output::new(h.to_json(), text);
            out.diagnostics = h.diagnostics.clone();
            out
        }
        Command::Primitive(classes) => {
            let sp = primitive_split(e, classes, cap)?;
            let mut json = json!({
                "not_rank": sp.not.rank(),
                "not": sp.not.basis().iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            });
            let mut text = vec![format!("rank E_not = {}", sp.not.rank())];
            if let Some(q) = &sp.part {
                let b = bernstein_polynomial(&q.module, BernsteinMode::Minimal, &[], cap)?;
                json["part"] = json!({
                    "rank": q.module.rank(),
                    "module": q.module.to_json(),
                    "bernstein": bernstein_json(&b),
                });
                text.push(format!("rank part = {}, bernstein {b}", q.module.rank()));
            } else {
                json["part"] = Value::Null;
                text.push("part = 0".into());
            }
            Output::new(json, text)
        }
        Command::Eigen(l) => {
            let lat = eigen_elements(e, l, cap)?;
            let nm = names(e.rank());
            let basis: Vec<String> = lat.basis().iter().map(|b| b.render(&nm)).collect();
            let json = json!({ "rank": lat.rank(), "basis": basis });
            let mut text = vec![format!("rank {}", lat.rank())];
            text.extend(basis);
            Output::new(json, text)
        }
        Command::Embed => {
            let emb = embed_into_xi(e, s.seed, cap)?;
            let mut text = vec![format!(
                "Xi^({}) dim V = {}, alphas {}",
                emb.layout.n,
                emb.layout.dim_v,
                render_rationals(&emb.layout.alphas)
            )];
            let nm = emb.layout.names();
            for (j, img) in emb.images.iter().enumerate() {
                text.push(format!("e{} -> {}", j + 1, img.render(&nm)));
            }
            Output::new(emb.to_json(), text)
        }
        Command::Expansion(order) => {
            let order = order.unwrap_or(4);
            let (layout, images) = match &v.layout {
                Some(l) => (
                    l.clone(),
                    (0..e.rank()).map(|i| e.basis(i)).collect::<Vec<_>>(),
                ),
                None => {
                    let emb = embed_into_xi(e, s.seed, cap)?;
                    (emb.layout, emb.images)
                }
            };
            let multi = layout.dim_v > 1;
            let mut json = Vec::new();
            let mut text = Vec::new();
            for (j, x) in images.iter().enumerate() {
                let ex = realize_expansion(&layout, x, order);
                let r = ex.render(multi);
                json.push(json!({
                    "element": format!("e{}", j + 1),
                    "terms": ex.to_terms().iter().map(|t| t.to_json()).collect::<Vec<_>>(),
                    "text": r,
                }));
                text.push(format!("e{} = {r}", j + 1));
            }
            Output::new(Value::Array(json), text)
        }
        Command::Report => {
            let terms = singular_term_report(e, cap)?;
            Output::new(
                Value::Array(terms.iter().map(|t| t.to_json()).collect()),
                terms.iter().map(|t| t.render()).collect(),
            )
        }
        Command::Jh(x) => {
            let f = as_fresco(v);
            let x = element(x, e.rank(), e.prec())?;
            let split = jh_split(&f, &x, cap)?;
            let r = &split.report;
            let text = vec![
                format!("B_sub = {}, B_quot = {}, q = {}", r.b_sub, r.b_quot, r.q),
                format!("B_F = {}", r.b_f),
                format!("B_F(x) = B_sub(x - q) B_quot(x): {}", r.minus_variant),
                format!("B_F(x) = B_sub(x + q) B_quot(x): {}", r.plus_variant),
            ];
            let mut out = Output::new(r.to_json(), text);
            if !r.minus_variant {
                out.diagnostics
                    .push("B_F(x) = B_sub(x - q) B_quot(x) fails".into());
            }
            if !r.plus_variant && r.q > 0 {
                out.diagnostics
                    .push("variant B_F(x) = B_sub(x + q) B_quot(x) fails".into());
            }
            out
        }
        Command::Generated(x) => {
            let x = element(x, e.rank(), e.prec())?;
            let g = generated_submodule(e, &x)?;
            let mut text = vec![format!("rank {}", g.rank())];
            if let Some(t) = &g.left_form {
                text.push(format!("{} = 0", render_left_form(t)));
            }
            Output::new(g.to_json(), text)
        }
        Command::Formula => {
            let p = v
                .fresco
                .as_ref()
                .and_then(|f| f.presentation.clone())
                .ok_or_else(|| AbError::Invalid("formula needs a fresco binding".into()))?;
            let fb = bernstein_via_formula(&p);
            let mut out = Output::new(
                json!({
                    "bernstein": bernstein_json(&fb.polynomial),
                    "non_negative_roots": fb.non_negative_roots.iter().map(fmt_rational).collect::<Vec<_>>(),
                }),
                vec![fb.polynomial.to_string()],
            );
            for r in &fb.non_negative_roots {
                out.diagnostics
                    .push(format!("root {} is not negative", fmt_rational(r)));
            }
            out
        }
    })
}

/// Runs the commands in order. Bindings are evaluated lazily, once.
pub fn run_session(session: &Session, settings: &Settings) -> Report {
    let mut precision = settings.precision;
    let mut bindings: HashMap<String, (Binding, usize)> = HashMap::new();
    let mut cache: HashMap<String, std::result::Result<Value_, String>> = HashMap::new();
    let mut report = Report::default();
    for (stmt, &line) in session.stmts.iter().zip(&session.lines) {
        match stmt {
            Stmt::Precision(p) => precision = *p,
            Stmt::Let {
                name,
                binding,
                precision: p,
            } => {
                bindings.insert(name.clone(), (binding.clone(), p.unwrap_or(precision)));
            }
            Stmt::Show { command, name } => {
                let index = report.results.len();
                let value = cache.entry(name.clone()).or_insert_with(|| {
                    let (b, p) = &bindings[name];
                    evaluate(b, *p).map_err(|e| e.to_string())
                });
                let (outcome, text, mut diagnostics) = match value {
                    Err(e) => (Err(e.clone()), Vec::new(), Vec::new()),
                    Ok(v) => match execute(command, v, settings) {
                        Ok(o) => (Ok(o.json), o.text, o.diagnostics),
                        Err(e) => (Err(e.to_string()), Vec::new(), Vec::new()),
                    },
                };
                let outcome = if settings.check && outcome.is_ok() && !diagnostics.is_empty() {
                    Err(format!("check failed: {}", diagnostics.join("; ")))
                } else {
                    outcome
                };
                if outcome.is_err() {
                    diagnostics.clear();
                }
                report.results.push(CommandResult {
                    index,
                    line,
                    source: stmt.to_string(),
                    outcome,
                    text,
                    diagnostics,
                });
            }
        }
    }
    report
}
