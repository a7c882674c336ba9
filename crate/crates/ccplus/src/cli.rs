//! The surface language and query driver behind the `ccplus` binary.
//!
//! Input files declare sorts, objects, schematic constants, and laws;
//! schemas expand over the declared objects into one of the three
//! library descriptions (a causal theory, an action description, or an
//! ADL description). Named query blocks, or the parameterless built-in
//! commands, select an operation; reports render as plain text,
//! line-delimited records, or DOT.
//!
//! Connectives are spelled `-`, `&`, `|`, `->`, `<->` in files, with
//! the usual Unicode forms accepted as aliases; causal laws use `=>`.
//! Comments run from `#` to the end of the line.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::adl::{AdlDescription, Update};
use crate::causal::{CausalLaw, CausalTheory};
use crate::cplus::{
    Abbreviation, ActionDescription, ActionSignature, Proposition, TransitionDiagram,
};
use crate::elim;
use crate::mvpl::{ExtFormula, Formula, Interpretation, Signature, Term, FF, TT};
use crate::solver::{self, SearchStats};

/// Everything that can go wrong between a source file and a report.
/// Parse errors exit with status 2, semantic and runtime errors with 1.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: u32, col: u32, message: String },
    #[error("{0}")]
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Semantic(_) => 1,
        }
    }
}

fn semantic(message: impl Into<String>) -> CliError {
    CliError::Semantic(message.into())
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    CauseArrow,
    Arrow,
    EquivOp,
    Neq,
    Minus,
    Amp,
    Pipe,
    Plus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBrace => write!(f, "`{{`"),
            Tok::RBrace => write!(f, "`}}`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::CauseArrow => write!(f, "`=>`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::EquivOp => write!(f, "`<->`"),
            Tok::Neq => write!(f, "`<>`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Plus => write!(f, "`+`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Spanned>, CliError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut push = |tok: Tok| {
            out.push(Spanned {
                tok,
                line: tline,
                col: tcol,
            })
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                push(Tok::Ident(s));
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                push(Tok::Number(s));
            }
            ':' => {
                bump!();
                push(Tok::Colon);
            }
            ';' => {
                bump!();
                push(Tok::Semi);
            }
            ',' => {
                bump!();
                push(Tok::Comma);
            }
            '(' => {
                bump!();
                push(Tok::LParen);
            }
            ')' => {
                bump!();
                push(Tok::RParen);
            }
            '{' => {
                bump!();
                push(Tok::LBrace);
            }
            '}' => {
                bump!();
                push(Tok::RBrace);
            }
            '+' => {
                bump!();
                push(Tok::Plus);
            }
            '&' | '\u{2227}' => {
                bump!();
                push(Tok::Amp);
            }
            '|' | '\u{2228}' => {
                bump!();
                push(Tok::Pipe);
            }
            '\u{00ac}' => {
                bump!();
                push(Tok::Minus);
            }
            '\u{2283}' => {
                bump!();
                push(Tok::Arrow);
            }
            '\u{2261}' => {
                bump!();
                push(Tok::EquivOp);
            }
            '\u{21d2}' => {
                bump!();
                push(Tok::CauseArrow);
            }
            '\u{2260}' => {
                bump!();
                push(Tok::Neq);
            }
            '\u{22a4}' => {
                bump!();
                push(Tok::Ident("true".into()));
            }
            '\u{22a5}' => {
                bump!();
                push(Tok::Ident("false".into()));
            }
            '=' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    push(Tok::CauseArrow);
                } else {
                    push(Tok::Eq);
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    push(Tok::Arrow);
                } else {
                    push(Tok::Minus);
                }
            }
            '<' => {
                bump!();
                match chars.peek() {
                    Some('-') => {
                        bump!();
                        if chars.peek() == Some(&'>') {
                            bump!();
                            push(Tok::EquivOp);
                        } else {
                            return Err(CliError::Parse {
                                line: tline,
                                col: tcol,
                                message: "expected `<->`".into(),
                            });
                        }
                    }
                    Some('>') => {
                        bump!();
                        push(Tok::Neq);
                    }
                    _ => {
                        return Err(CliError::Parse {
                            line: tline,
                            col: tcol,
                            message: "expected `<->` or `<>`".into(),
                        })
                    }
                }
            }
            other => {
                return Err(CliError::Parse {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Syntax tree

const SECTIONS: [&str; 7] = [
    "sorts", "objects", "fluents", "actions", "laws", "adl", "query",
];

const KEYWORDS: [&str; 23] = [
    "sorts",
    "objects",
    "fluents",
    "actions",
    "laws",
    "adl",
    "query",
    "var",
    "where",
    "caused",
    "if",
    "after",
    "causes",
    "nonexecutable",
    "inertial",
    "never",
    "true",
    "false",
    "boolean",
    "forall",
    "exists",
    "precond",
    "update",
];

/// A name applied to zero or more argument terms, e.g. `Loc(b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameForm {
    pub base: String,
    pub args: Vec<TermRef>,
}

impl fmt::Display for NameForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (k, a) in self.args.iter().enumerate() {
                if k > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// One argument or value position: a schema or quantifier variable, or
/// a literal object/value name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermRef {
    Var(String),
    Lit(String),
}

impl fmt::Display for TermRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermRef::Var(s) | TermRef::Lit(s) => write!(f, "{s}"),
        }
    }
}

/// Surface formulas before schema expansion. Quantifiers, and with
/// them `VarEq` atoms whose left side is a bound variable, only appear
/// in `adl:` formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FTree {
    True,
    False,
    Atom { name: NameForm, value: TermRef },
    VarEq { var: String, value: TermRef },
    Not(Box<FTree>),
    And(Box<FTree>, Box<FTree>),
    Or(Box<FTree>, Box<FTree>),
    Implies(Box<FTree>, Box<FTree>),
    Equiv(Box<FTree>, Box<FTree>),
    Forall(String, Box<FTree>),
    Exists(String, Box<FTree>),
}

impl FTree {
    fn prec(&self) -> u8 {
        match self {
            FTree::Equiv(..) => 1,
            FTree::Implies(..) => 2,
            FTree::Or(..) => 3,
            FTree::And(..) => 4,
            FTree::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            write!(f, "(")?;
        }
        match self {
            FTree::True => write!(f, "true")?,
            FTree::False => write!(f, "false")?,
            FTree::Atom { name, value } => write!(f, "{name}={value}")?,
            FTree::VarEq { var, value } => write!(f, "{var}={value}")?,
            FTree::Not(g) => {
                write!(f, "-")?;
                g.fmt_prec(f, 5)?;
            }
            FTree::And(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 5)?;
            }
            FTree::Or(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 4)?;
            }
            FTree::Implies(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 2)?;
            }
            FTree::Equiv(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " <-> ")?;
                b.fmt_prec(f, 1)?;
            }
            FTree::Forall(x, g) => write!(f, "forall {x} ({g})")?,
            FTree::Exists(x, g) => write!(f, "exists {x} ({g})")?,
        }
        if p < min {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Schema variables mentioned anywhere in the tree.
    fn schema_vars(&self, table: &[(String, String)], out: &mut BTreeSet<String>) {
        let known = |v: &str| table.iter().any(|(name, _)| name == v);
        match self {
            FTree::True | FTree::False => {}
            FTree::Atom { name, value } => {
                for a in &name.args {
                    if let TermRef::Var(v) = a {
                        if known(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                if let TermRef::Var(v) = value {
                    if known(v) {
                        out.insert(v.clone());
                    }
                }
            }
            FTree::VarEq { value, .. } => {
                if let TermRef::Var(v) = value {
                    if known(v) {
                        out.insert(v.clone());
                    }
                }
            }
            FTree::Not(g) | FTree::Forall(_, g) | FTree::Exists(_, g) => {
                g.schema_vars(table, out)
            }
            FTree::And(a, b) | FTree::Or(a, b) | FTree::Implies(a, b) | FTree::Equiv(a, b) => {
                a.schema_vars(table, out);
                b.schema_vars(table, out);
            }
        }
    }
}

impl fmt::Display for FTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Domain expression on the right of a constant declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomExpr {
    Boolean,
    Sort(String),
    SortPlus(String, Vec<String>),
    Values(Vec<String>),
}

impl fmt::Display for DomExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomExpr::Boolean => write!(f, "boolean"),
            DomExpr::Sort(s) => write!(f, "{s}"),
            DomExpr::SortPlus(s, extra) => write!(f, "{s} + {}", extra.join(", ")),
            DomExpr::Values(vs) => write!(f, "{{{}}}", vs.join(", ")),
        }
    }
}

/// One fluent or action declaration, possibly schematic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeclSchema {
    pub name: String,
    pub params: Vec<String>,
    pub domain: DomExpr,
}

impl fmt::Display for DeclSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            write!(f, "({})", self.params.join(","))?;
        }
        write!(f, " : {}", self.domain)
    }
}

/// An inequality guard between two schema variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LawBody {
    Causal {
        antecedent: FTree,
        consequent: FTree,
    },
    Caused {
        head: FTree,
        condition: Option<FTree>,
        after: Option<FTree>,
    },
    Causes {
        actions: Vec<NameForm>,
        head: FTree,
        condition: Option<FTree>,
    },
    Nonexecutable {
        actions: Vec<NameForm>,
        condition: Option<FTree>,
    },
    Inertial(FTree),
    Never(FTree),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawSchema {
    pub body: LawBody,
    pub guards: Vec<Guard>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdlStmt {
    Precond {
        action: NameForm,
        formula: FTree,
        guards: Vec<Guard>,
    },
    Update {
        action: NameForm,
        fluent: NameForm,
        parameter: String,
        body: FTree,
        guards: Vec<Guard>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QueryBlock {
    pub name: String,
    pub command: String,
    pub formulas: Vec<FTree>,
    pub init: Option<FTree>,
    pub goal: Option<FTree>,
    pub target: Option<NameForm>,
    pub method: Option<String>,
    pub limit: Option<usize>,
    pub max_steps: Option<usize>,
}

/// A parsed source file, before schema expansion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceUnit {
    pub sorts: Vec<String>,
    pub objects: Vec<(String, Vec<String>)>,
    pub vars: Vec<(String, String)>,
    pub fluents: Vec<DeclSchema>,
    pub actions: Vec<DeclSchema>,
    pub laws: Vec<LawSchema>,
    pub adl: Vec<AdlStmt>,
    pub queries: Vec<QueryBlock>,
}

fn write_guards(f: &mut fmt::Formatter<'_>, guards: &[Guard]) -> fmt::Result {
    if guards.is_empty() {
        return Ok(());
    }
    write!(f, " where ")?;
    for (k, g) in guards.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{}<>{}", g.left, g.right)?;
    }
    Ok(())
}

impl fmt::Display for LawSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let actions_list = |f: &mut fmt::Formatter<'_>, actions: &[NameForm]| -> fmt::Result {
            for (k, a) in actions.iter().enumerate() {
                if k > 0 {
                    write!(f, " & ")?;
                }
                write!(f, "{a}")?;
            }
            Ok(())
        };
        match &self.body {
            LawBody::Causal {
                antecedent,
                consequent,
            } => write!(f, "{antecedent} => {consequent}")?,
            LawBody::Caused {
                head,
                condition,
                after,
            } => {
                write!(f, "caused {head}")?;
                if let Some(g) = condition {
                    write!(f, " if {g}")?;
                }
                if let Some(h) = after {
                    write!(f, " after {h}")?;
                }
            }
            LawBody::Causes {
                actions,
                head,
                condition,
            } => {
                actions_list(f, actions)?;
                write!(f, " causes {head}")?;
                if let Some(g) = condition {
                    write!(f, " if {g}")?;
                }
            }
            LawBody::Nonexecutable { actions, condition } => {
                write!(f, "nonexecutable ")?;
                actions_list(f, actions)?;
                if let Some(g) = condition {
                    write!(f, " if {g}")?;
                }
            }
            LawBody::Inertial(g) => write!(f, "inertial {g}")?,
            LawBody::Never(g) => write!(f, "never {g}")?,
        }
        write_guards(f, &self.guards)
    }
}

impl fmt::Display for AdlStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdlStmt::Precond {
                action,
                formula,
                guards,
            } => {
                write!(f, "precond {action}: {formula}")?;
                write_guards(f, guards)
            }
            AdlStmt::Update {
                action,
                fluent,
                parameter,
                body,
                guards,
            } => {
                write!(f, "update {action} {fluent}({parameter}): {body}")?;
                write_guards(f, guards)
            }
        }
    }
}

impl fmt::Display for QueryBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query: {} {{", self.name)?;
        writeln!(f, "  {};", self.command)?;
        for g in &self.formulas {
            writeln!(f, "  formula: {g};")?;
        }
        if let Some(g) = &self.init {
            writeln!(f, "  init: {g};")?;
        }
        if let Some(g) = &self.goal {
            writeln!(f, "  goal: {g};")?;
        }
        if let Some(t) = &self.target {
            writeln!(f, "  target: {t};")?;
        }
        if let Some(m) = &self.method {
            writeln!(f, "  method: {m};")?;
        }
        if let Some(n) = self.limit {
            writeln!(f, "  limit: {n};")?;
        }
        if let Some(n) = self.max_steps {
            writeln!(f, "  max-steps: {n};")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for SourceUnit {
    /// Canonical pretty-printing: fixed section order with vars hoisted
    /// between the object and fluent declarations. Re-parsing the
    /// output yields an identical unit.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.sorts.is_empty() {
            writeln!(f, "sorts: {};", self.sorts.join("; "))?;
        }
        for (sort, objs) in &self.objects {
            writeln!(f, "objects: {} : {};", objs.join(", "), sort)?;
        }
        for (name, sort) in &self.vars {
            writeln!(f, "var {name} : {sort};")?;
        }
        if !self.fluents.is_empty() {
            writeln!(f, "fluents:")?;
            for d in &self.fluents {
                writeln!(f, "  {d};")?;
            }
        }
        if !self.actions.is_empty() {
            writeln!(f, "actions:")?;
            for d in &self.actions {
                writeln!(f, "  {d};")?;
            }
        }
        if !self.laws.is_empty() {
            writeln!(f, "laws:")?;
            for law in &self.laws {
                writeln!(f, "  {law};")?;
            }
        }
        if !self.adl.is_empty() {
            writeln!(f, "adl:")?;
            for stmt in &self.adl {
                writeln!(f, "  {stmt};")?;
            }
        }
        for q in &self.queries {
            writeln!(f, "{q}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    unit: SourceUnit,
    end: (u32, u32),
}

/// Parses a source file into its syntax tree.
pub fn parse(text: &str) -> Result<SourceUnit, CliError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1) as u32;
    let end = (lines, text.lines().last().map_or(1, |l| l.len() as u32 + 1));
    let mut p = Parser {
        toks,
        pos: 0,
        unit: SourceUnit::default(),
        end,
    };
    p.parse_unit()?;
    Ok(p.unit)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, message: impl Into<String>) -> CliError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.end);
        CliError::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), CliError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(match self.peek() {
                Some(t) => self.err_here(format!("expected {what}, found {t}")),
                None => self.err_here(format!("expected {what}, found end of input")),
            })
        }
    }

    fn at_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(i)) if i == s)
    }

    fn take_ident(&mut self, s: &str) -> bool {
        if self.at_ident(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// A non-keyword identifier naming a sort, object, constant,
    /// variable, or value.
    fn expect_name(&mut self, what: &str) -> Result<String, CliError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                Err(self.err_here(format!("keyword `{s}` cannot be used as {what}")))
            }
            Some(t) => Err(self.err_here(format!("expected {what}, found {t}"))),
            None => Err(self.err_here(format!("expected {what}, found end of input"))),
        }
    }

    /// An identifier or number usable as a domain value or object.
    fn expect_value(&mut self, what: &str) -> Result<String, CliError> {
        match self.peek() {
            Some(Tok::Number(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.expect_name(what),
        }
    }

    fn at_section(&self) -> bool {
        matches!(
            (self.peek(), self.peek_at(1)),
            (Some(Tok::Ident(s)), Some(Tok::Colon)) if SECTIONS.contains(&s.as_str())
        )
    }

    fn parse_unit(&mut self) -> Result<(), CliError> {
        while let Some(tok) = self.peek() {
            if self.at_ident("var") {
                self.parse_var()?;
            } else if self.at_section() {
                let Some(Tok::Ident(name)) = self.bump() else {
                    unreachable!()
                };
                self.expect(&Tok::Colon, "`:`")?;
                match name.as_str() {
                    "sorts" => self.parse_sorts()?,
                    "objects" => self.parse_objects()?,
                    "fluents" => self.parse_decls(true)?,
                    "actions" => self.parse_decls(false)?,
                    "laws" => self.parse_laws()?,
                    "adl" => self.parse_adl()?,
                    "query" => self.parse_queries()?,
                    _ => unreachable!(),
                }
            } else {
                return Err(self.err_here(format!(
                    "expected a section header or `var`, found {tok}"
                )));
            }
        }
        Ok(())
    }

    fn parse_var(&mut self) -> Result<(), CliError> {
        self.expect(&Tok::Ident("var".into()), "`var`")?;
        let name = self.expect_name("a variable name")?;
        if self.unit.vars.iter().any(|(v, _)| *v == name) {
            return Err(self.err_here(format!("variable `{name}` is declared twice")));
        }
        self.expect(&Tok::Colon, "`:`")?;
        let sort = self.expect_name("a sort name")?;
        if !self.unit.sorts.contains(&sort) {
            return Err(self.err_here(format!("unknown sort `{sort}`")));
        }
        self.expect(&Tok::Semi, "`;`")?;
        self.unit.vars.push((name, sort));
        Ok(())
    }

    fn in_section(&self) -> bool {
        self.peek().is_some() && !self.at_section()
    }

    fn parse_sorts(&mut self) -> Result<(), CliError> {
        while self.in_section() {
            if self.at_ident("var") {
                self.parse_var()?;
                continue;
            }
            let name = self.expect_name("a sort name")?;
            if self.unit.sorts.contains(&name) {
                return Err(self.err_here(format!("sort `{name}` is declared twice")));
            }
            self.unit.sorts.push(name);
            self.expect(&Tok::Semi, "`;`")?;
        }
        Ok(())
    }

    fn parse_objects(&mut self) -> Result<(), CliError> {
        while self.in_section() {
            if self.at_ident("var") {
                self.parse_var()?;
                continue;
            }
            let mut objs = vec![self.expect_value("an object name")?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                objs.push(self.expect_value("an object name")?);
            }
            self.expect(&Tok::Colon, "`:`")?;
            let sort = self.expect_name("a sort name")?;
            if !self.unit.sorts.contains(&sort) {
                return Err(self.err_here(format!("unknown sort `{sort}`")));
            }
            for o in &objs {
                let dup = self
                    .unit
                    .objects
                    .iter()
                    .filter(|(s, _)| *s == sort)
                    .any(|(_, list)| list.contains(o));
                if dup || objs.iter().filter(|x| *x == o).count() > 1 {
                    return Err(
                        self.err_here(format!("object `{o}` is declared twice in `{sort}`"))
                    );
                }
            }
            self.expect(&Tok::Semi, "`;`")?;
            self.unit.objects.push((sort, objs));
        }
        Ok(())
    }

    fn parse_decls(&mut self, fluents: bool) -> Result<(), CliError> {
        while self.in_section() {
            if self.at_ident("var") {
                self.parse_var()?;
                continue;
            }
            let name = self.expect_name("a constant name")?;
            let mut params = Vec::new();
            if self.peek() == Some(&Tok::LParen) {
                self.pos += 1;
                loop {
                    let v = self.expect_name("a schema variable")?;
                    if !self.unit.vars.iter().any(|(name, _)| *name == v) {
                        return Err(self.err_here(format!("unknown schema variable `{v}`")));
                    }
                    params.push(v);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.expect(&Tok::RParen, "`)`")?;
            }
            self.expect(&Tok::Colon, "`:`")?;
            let domain = self.parse_domexpr()?;
            self.expect(&Tok::Semi, "`;`")?;
            let decl = DeclSchema {
                name,
                params,
                domain,
            };
            if fluents {
                self.unit.fluents.push(decl);
            } else {
                self.unit.actions.push(decl);
            }
        }
        Ok(())
    }

    fn parse_domexpr(&mut self) -> Result<DomExpr, CliError> {
        if self.take_ident("boolean") {
            return Ok(DomExpr::Boolean);
        }
        if self.peek() == Some(&Tok::LBrace) {
            self.pos += 1;
            let mut vs = vec![self.expect_value("a domain value")?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                vs.push(self.expect_value("a domain value")?);
            }
            self.expect(&Tok::RBrace, "`}`")?;
            return Ok(DomExpr::Values(vs));
        }
        let sort = self.expect_name("a sort name, `boolean`, or `{`")?;
        if !self.unit.sorts.contains(&sort) {
            return Err(self.err_here(format!("unknown sort `{sort}`")));
        }
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let mut extra = vec![self.expect_value("a domain value")?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                extra.push(self.expect_value("a domain value")?);
            }
            return Ok(DomExpr::SortPlus(sort, extra));
        }
        Ok(DomExpr::Sort(sort))
    }

    fn parse_laws(&mut self) -> Result<(), CliError> {
        while self.in_section() {
            if self.at_ident("var") {
                self.parse_var()?;
                continue;
            }
            let body = if self.take_ident("caused") {
                let head = self.parse_formula(false, &mut Vec::new())?;
                let condition = if self.take_ident("if") {
                    Some(self.parse_formula(false, &mut Vec::new())?)
                } else {
                    None
                };
                let after = if self.take_ident("after") {
                    Some(self.parse_formula(false, &mut Vec::new())?)
                } else {
                    None
                };
                LawBody::Caused {
                    head,
                    condition,
                    after,
                }
            } else if self.take_ident("nonexecutable") {
                let actions = self.parse_action_list()?;
                let condition = if self.take_ident("if") {
                    Some(self.parse_formula(false, &mut Vec::new())?)
                } else {
                    None
                };
                LawBody::Nonexecutable { actions, condition }
            } else if self.take_ident("inertial") {
                LawBody::Inertial(self.parse_formula(false, &mut Vec::new())?)
            } else if self.take_ident("never") {
                LawBody::Never(self.parse_formula(false, &mut Vec::new())?)
            } else if let Some(actions) = self.try_causes_prefix()? {
                let head = self.parse_formula(false, &mut Vec::new())?;
                let condition = if self.take_ident("if") {
                    Some(self.parse_formula(false, &mut Vec::new())?)
                } else {
                    None
                };
                LawBody::Causes {
                    actions,
                    head,
                    condition,
                }
            } else {
                let antecedent = self.parse_formula(false, &mut Vec::new())?;
                self.expect(&Tok::CauseArrow, "`=>`")?;
                let consequent = self.parse_formula(false, &mut Vec::new())?;
                LawBody::Causal {
                    antecedent,
                    consequent,
                }
            };
            let guards = self.parse_guards()?;
            self.expect(&Tok::Semi, "`;`")?;
            self.unit.laws.push(LawSchema { body, guards });
        }
        Ok(())
    }

    /// Looks for `A & B & ... causes` and commits to it only when the
    /// whole prefix fits; otherwise rewinds so the statement can parse
    /// as a plain causal law.
    fn try_causes_prefix(&mut self) -> Result<Option<Vec<NameForm>>, CliError> {
        let save = self.pos;
        let mut actions = Vec::new();
        loop {
            match self.parse_nameform() {
                Ok(nf) => actions.push(nf),
                Err(_) => {
                    self.pos = save;
                    return Ok(None);
                }
            }
            if self.peek() == Some(&Tok::Amp) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.take_ident("causes") {
            Ok(Some(actions))
        } else {
            self.pos = save;
            Ok(None)
        }
    }

    fn parse_action_list(&mut self) -> Result<Vec<NameForm>, CliError> {
        let mut actions = vec![self.parse_nameform()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            actions.push(self.parse_nameform()?);
        }
        Ok(actions)
    }

    fn parse_adl(&mut self) -> Result<(), CliError> {
        while self.in_section() {
            if self.at_ident("var") {
                self.parse_var()?;
                continue;
            }
            if self.take_ident("precond") {
                let action = self.parse_nameform()?;
                self.expect(&Tok::Colon, "`:`")?;
                let formula = self.parse_formula(true, &mut Vec::new())?;
                let guards = self.parse_guards()?;
                self.expect(&Tok::Semi, "`;`")?;
                self.unit.adl.push(AdlStmt::Precond {
                    action,
                    formula,
                    guards,
                });
            } else if self.take_ident("update") {
                let action = self.parse_nameform()?;
                let fluent_base = self.expect_name("a fluent name")?;
                let mut groups = Vec::new();
                while self.peek() == Some(&Tok::LParen) && groups.len() < 2 {
                    self.pos += 1;
                    let mut terms = vec![self.parse_term()?];
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        terms.push(self.parse_term()?);
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    groups.push(terms);
                }
                let (args, param_group) = match groups.len() {
                    1 => (Vec::new(), groups.pop().expect("one group")),
                    2 => {
                        let param = groups.pop().expect("two groups");
                        (groups.pop().expect("two groups"), param)
                    }
                    _ => {
                        return Err(
                            self.err_here("expected an update parameter, e.g. `Loc(x)`")
                        )
                    }
                };
                let parameter = match param_group.as_slice() {
                    [TermRef::Lit(x)] => x.clone(),
                    [TermRef::Var(x)] => {
                        return Err(self.err_here(format!(
                            "update parameter `{x}` shadows a schema variable"
                        )))
                    }
                    _ => return Err(self.err_here("the update parameter must be one name")),
                };
                let fluent = NameForm {
                    base: fluent_base,
                    args,
                };
                self.expect(&Tok::Colon, "`:`")?;
                let body = self.parse_formula(true, &mut vec![parameter.clone()])?;
                let guards = self.parse_guards()?;
                self.expect(&Tok::Semi, "`;`")?;
                self.unit.adl.push(AdlStmt::Update {
                    action,
                    fluent,
                    parameter,
                    body,
                    guards,
                });
            } else {
                return Err(self.err_here("expected `precond`, `update`, or `var`"));
            }
        }
        Ok(())
    }

    fn parse_queries(&mut self) -> Result<(), CliError> {
        loop {
            let name = self.expect_name("a query name")?;
            if self.unit.queries.iter().any(|q| q.name == name) {
                return Err(self.err_here(format!("query `{name}` is declared twice")));
            }
            self.expect(&Tok::LBrace, "`{`")?;
            let mut block = QueryBlock {
                name,
                ..QueryBlock::default()
            };
            block.command = self.parse_kebab_ident("a command name")?;
            self.expect(&Tok::Semi, "`;`")?;
            while self.peek() != Some(&Tok::RBrace) {
                let key = self.parse_kebab_ident("a query key")?;
                self.expect(&Tok::Colon, "`:`")?;
                match key.as_str() {
                    "formula" => {
                        let g = self.parse_formula(false, &mut Vec::new())?;
                        block.formulas.push(g);
                    }
                    "init" | "goal" => {
                        let g = self.parse_formula(false, &mut Vec::new())?;
                        let slot = if key == "init" {
                            &mut block.init
                        } else {
                            &mut block.goal
                        };
                        if slot.is_some() {
                            return Err(self.err_here(format!("duplicate `{key}`")));
                        }
                        *slot = Some(g);
                    }
                    "target" => {
                        if block.target.is_some() {
                            return Err(self.err_here("duplicate `target`"));
                        }
                        block.target = Some(self.parse_nameform()?);
                    }
                    "method" => {
                        if block.method.is_some() {
                            return Err(self.err_here("duplicate `method`"));
                        }
                        block.method = Some(self.expect_name("a method name")?);
                    }
                    "limit" | "max-steps" => {
                        let n = match self.peek() {
                            Some(Tok::Number(s)) => s.parse::<usize>().map_err(|_| {
                                self.err_here(format!("`{s}` is too large"))
                            })?,
                            _ => return Err(self.err_here("expected a number")),
                        };
                        self.pos += 1;
                        let slot = if key == "limit" {
                            &mut block.limit
                        } else {
                            &mut block.max_steps
                        };
                        if slot.is_some() {
                            return Err(self.err_here(format!("duplicate `{key}`")));
                        }
                        *slot = Some(n);
                    }
                    other => {
                        return Err(self.err_here(format!("unknown query key `{other}`")))
                    }
                }
                self.expect(&Tok::Semi, "`;`")?;
            }
            self.expect(&Tok::RBrace, "`}`")?;
            self.unit.queries.push(block);
            if !matches!(
                (self.peek(), self.peek_at(1)),
                (Some(Tok::Ident(_)), Some(Tok::LBrace))
            ) {
                return Ok(());
            }
        }
    }

    /// Identifiers joined by `-`, for command names like
    /// `definite-check` and keys like `max-steps`.
    fn parse_kebab_ident(&mut self, what: &str) -> Result<String, CliError> {
        let mut s = match self.peek() {
            Some(Tok::Ident(i)) => {
                let i = i.clone();
                self.pos += 1;
                i
            }
            Some(t) => return Err(self.err_here(format!("expected {what}, found {t}"))),
            None => return Err(self.err_here(format!("expected {what}, found end of input"))),
        };
        while self.peek() == Some(&Tok::Minus) {
            if let Some(Tok::Ident(next)) = self.peek_at(1) {
                s.push('-');
                s.push_str(&next.clone());
                self.pos += 2;
            } else {
                break;
            }
        }
        Ok(s)
    }

    fn parse_guards(&mut self) -> Result<Vec<Guard>, CliError> {
        let mut guards = Vec::new();
        if !self.take_ident("where") {
            return Ok(guards);
        }
        loop {
            let left = self.expect_name("a schema variable")?;
            self.expect(&Tok::Neq, "`<>`")?;
            let right = self.expect_name("a schema variable")?;
            let sort_of = |v: &str| {
                self.unit
                    .vars
                    .iter()
                    .find(|(name, _)| name == v)
                    .map(|(_, s)| s.clone())
            };
            let (ls, rs) = (sort_of(&left), sort_of(&right));
            match (&ls, &rs) {
                (None, _) => {
                    return Err(self.err_here(format!("unknown schema variable `{left}`")))
                }
                (_, None) => {
                    return Err(self.err_here(format!("unknown schema variable `{right}`")))
                }
                (Some(a), Some(b)) if a != b => {
                    return Err(self.err_here(format!(
                        "guard `{left}<>{right}` compares different sorts `{a}` and `{b}`"
                    )))
                }
                _ => {}
            }
            guards.push(Guard { left, right });
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(guards);
            }
        }
    }

    fn parse_nameform(&mut self) -> Result<NameForm, CliError> {
        let base = self.expect_name("a name")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            args.push(self.parse_term()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                args.push(self.parse_term()?);
            }
            self.expect(&Tok::RParen, "`)`")?;
        }
        Ok(NameForm { base, args })
    }

    fn parse_term(&mut self) -> Result<TermRef, CliError> {
        let s = self.expect_value("an object, value, or variable")?;
        if self.unit.vars.iter().any(|(name, _)| *name == s) {
            Ok(TermRef::Var(s))
        } else {
            Ok(TermRef::Lit(s))
        }
    }

    fn parse_value_term(&mut self, binders: &[String]) -> Result<TermRef, CliError> {
        let s = self.expect_value("a value or variable")?;
        if binders.contains(&s) || self.unit.vars.iter().any(|(name, _)| *name == s) {
            Ok(TermRef::Var(s))
        } else {
            Ok(TermRef::Lit(s))
        }
    }

    fn parse_formula(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        self.parse_equiv(ext, binders)
    }

    fn parse_equiv(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        let left = self.parse_implies(ext, binders)?;
        if self.peek() == Some(&Tok::EquivOp) {
            self.pos += 1;
            let right = self.parse_equiv(ext, binders)?;
            Ok(FTree::Equiv(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn parse_implies(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        let left = self.parse_or(ext, binders)?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let right = self.parse_implies(ext, binders)?;
            Ok(FTree::Implies(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn parse_or(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        let mut left = self.parse_and(ext, binders)?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            let right = self.parse_and(ext, binders)?;
            left = FTree::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_and(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        let mut left = self.parse_unary(ext, binders)?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            let right = self.parse_unary(ext, binders)?;
            left = FTree::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_unary(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let g = self.parse_unary(ext, binders)?;
            return Ok(FTree::Not(Box::new(g)));
        }
        self.parse_primary(ext, binders)
    }

    fn parse_primary(&mut self, ext: bool, binders: &mut Vec<String>) -> Result<FTree, CliError> {
        if self.take_ident("true") {
            return Ok(FTree::True);
        }
        if self.take_ident("false") {
            return Ok(FTree::False);
        }
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let g = self.parse_equiv(ext, binders)?;
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(g);
        }
        if self.at_ident("forall") || self.at_ident("exists") {
            if !ext {
                return Err(
                    self.err_here("quantifiers are only allowed in `adl:` formulas")
                );
            }
            let universal = self.take_ident("forall");
            if !universal {
                self.take_ident("exists");
            }
            let x = self.expect_name("a quantifier variable")?;
            if self.unit.vars.iter().any(|(name, _)| *name == x) {
                return Err(self.err_here(format!(
                    "quantifier variable `{x}` shadows a schema variable"
                )));
            }
            if binders.contains(&x) {
                return Err(self.err_here(format!("variable `{x}` is already bound")));
            }
            self.expect(&Tok::LParen, "`(`")?;
            binders.push(x.clone());
            let g = self.parse_equiv(ext, binders)?;
            binders.pop();
            self.expect(&Tok::RParen, "`)`")?;
            return Ok(if universal {
                FTree::Forall(x, Box::new(g))
            } else {
                FTree::Exists(x, Box::new(g))
            });
        }
        let name = self.parse_nameform()?;
        self.expect(
            &Tok::Eq,
            "`=` (bare names are only allowed in causes lists)",
        )?;
        let value = self.parse_value_term(binders)?;
        if name.args.is_empty() && binders.contains(&name.base) {
            return Ok(FTree::VarEq {
                var: name.base,
                value,
            });
        }
        Ok(FTree::Atom { name, value })
    }
}

// ---------------------------------------------------------------------------
// Schema expansion

/// The ground description a source file denotes.
#[derive(Debug, Clone)]
pub enum ExpandedUnit {
    Causal(CausalTheory),
    Cplus(ActionDescription),
    Adl(AdlDescription),
}

type Binding = Vec<(String, String)>;

fn bound<'a>(binding: &'a Binding, var: &str) -> Option<&'a str> {
    binding
        .iter()
        .find(|(v, _)| v == var)
        .map(|(_, o)| o.as_str())
}

/// Instantiates every schema over the declared objects, in declaration
/// order with lexicographic bindings, and classifies the result: an
/// `adl:` section makes an ADL description, action declarations or
/// action-language laws make an action description, and plain `=>`
/// laws over constants alone make a causal theory.
pub fn expand_schemas(unit: &SourceUnit) -> Result<ExpandedUnit, CliError> {
    let ex = Expander { unit };
    let fluents = Arc::new(ex.signature(&unit.fluents)?);
    let actions = Arc::new(ex.signature(&unit.actions)?);

    if !unit.adl.is_empty() {
        if !unit.laws.is_empty() {
            return Err(semantic("`adl:` and `laws:` cannot be mixed in one file"));
        }
        let sig = ActionSignature::new(fluents, actions).map_err(|e| semantic(e.to_string()))?;
        return ex.expand_adl(sig);
    }

    let causal_only = unit
        .laws
        .iter()
        .all(|law| matches!(law.body, LawBody::Causal { .. }));
    if unit.actions.is_empty() && causal_only {
        let mut laws = Vec::new();
        for schema in &unit.laws {
            let LawBody::Causal {
                antecedent,
                consequent,
            } = &schema.body
            else {
                unreachable!()
            };
            for binding in ex.bindings(schema_vars_of(unit, schema), &schema.guards)? {
                laws.push(CausalLaw::new(
                    ex.lower(antecedent, &binding)?,
                    ex.lower(consequent, &binding)?,
                ));
            }
        }
        let theory =
            CausalTheory::new(fluents, laws).map_err(|e| semantic(e.to_string()))?;
        return Ok(ExpandedUnit::Causal(theory));
    }

    if !causal_only && unit.laws.iter().any(|l| matches!(l.body, LawBody::Causal { .. })) {
        return Err(semantic(
            "plain causal laws (`F => G`) cannot be mixed with action-language laws",
        ));
    }

    let sig = ActionSignature::new(fluents, actions).map_err(|e| semantic(e.to_string()))?;
    let mut props = Vec::new();
    for schema in &unit.laws {
        for binding in ex.bindings(schema_vars_of(unit, schema), &schema.guards)? {
            props.push(ex.instantiate_prop(&schema.body, &binding, &sig)?);
        }
    }
    let desc = ActionDescription::new(sig, props).map_err(|e| semantic(e.to_string()))?;
    Ok(ExpandedUnit::Cplus(desc))
}

/// Schema variables a law mentions, in declaration order.
fn schema_vars_of(unit: &SourceUnit, schema: &LawSchema) -> Vec<(String, String)> {
    let mut seen = BTreeSet::new();
    let from_nameforms = |forms: &[NameForm], seen: &mut BTreeSet<String>| {
        for nf in forms {
            for a in &nf.args {
                if let TermRef::Var(v) = a {
                    seen.insert(v.clone());
                }
            }
        }
    };
    match &schema.body {
        LawBody::Causal {
            antecedent,
            consequent,
        } => {
            antecedent.schema_vars(&unit.vars, &mut seen);
            consequent.schema_vars(&unit.vars, &mut seen);
        }
        LawBody::Caused {
            head,
            condition,
            after,
        } => {
            head.schema_vars(&unit.vars, &mut seen);
            if let Some(g) = condition {
                g.schema_vars(&unit.vars, &mut seen);
            }
            if let Some(h) = after {
                h.schema_vars(&unit.vars, &mut seen);
            }
        }
        LawBody::Causes {
            actions,
            head,
            condition,
        } => {
            from_nameforms(actions, &mut seen);
            head.schema_vars(&unit.vars, &mut seen);
            if let Some(g) = condition {
                g.schema_vars(&unit.vars, &mut seen);
            }
        }
        LawBody::Nonexecutable { actions, condition } => {
            from_nameforms(actions, &mut seen);
            if let Some(g) = condition {
                g.schema_vars(&unit.vars, &mut seen);
            }
        }
        LawBody::Inertial(g) | LawBody::Never(g) => g.schema_vars(&unit.vars, &mut seen),
    }
    for g in &schema.guards {
        seen.insert(g.left.clone());
        seen.insert(g.right.clone());
    }
    unit.vars
        .iter()
        .filter(|(v, _)| seen.contains(v))
        .cloned()
        .collect()
}

struct Expander<'a> {
    unit: &'a SourceUnit,
}

impl Expander<'_> {
    fn objects_of(&self, sort: &str) -> Result<Vec<String>, CliError> {
        let objs: Vec<String> = self
            .unit
            .objects
            .iter()
            .filter(|(s, _)| s == sort)
            .flat_map(|(_, list)| list.iter().cloned())
            .collect();
        if objs.is_empty() {
            return Err(semantic(format!("sort `{sort}` has no objects")));
        }
        Ok(objs)
    }

    /// All bindings of the given variables, lexicographic with the
    /// first variable outermost, filtered by the guards.
    fn bindings(
        &self,
        vars: Vec<(String, String)>,
        guards: &[Guard],
    ) -> Result<Vec<Binding>, CliError> {
        let mut out = vec![Binding::new()];
        for (var, sort) in &vars {
            let objs = self.objects_of(sort)?;
            let mut next = Vec::with_capacity(out.len() * objs.len());
            for b in &out {
                for o in &objs {
                    let mut b = b.clone();
                    b.push((var.clone(), o.clone()));
                    next.push(b);
                }
            }
            out = next;
        }
        Ok(out
            .into_iter()
            .filter(|b| {
                guards
                    .iter()
                    .all(|g| bound(b, &g.left) != bound(b, &g.right))
            })
            .collect())
    }

    fn ground_name(&self, nf: &NameForm, binding: &Binding) -> Result<String, CliError> {
        if nf.args.is_empty() {
            return Ok(nf.base.clone());
        }
        let mut rendered = Vec::with_capacity(nf.args.len());
        for a in &nf.args {
            match a {
                TermRef::Lit(s) => rendered.push(s.clone()),
                TermRef::Var(v) => match bound(binding, v) {
                    Some(o) => rendered.push(o.to_string()),
                    None => {
                        return Err(semantic(format!(
                            "variable `{v}` cannot appear here; the formula must be ground"
                        )))
                    }
                },
            }
        }
        Ok(format!("{}({})", nf.base, rendered.join(",")))
    }

    fn signature(&self, decls: &[DeclSchema]) -> Result<Signature, CliError> {
        let mut ground = Vec::new();
        for d in decls {
            let domain = match &d.domain {
                DomExpr::Boolean => vec![FF.to_string(), TT.to_string()],
                DomExpr::Values(vs) => vs.clone(),
                DomExpr::Sort(s) => self.objects_of(s)?,
                DomExpr::SortPlus(s, extra) => {
                    let mut objs = self.objects_of(s)?;
                    objs.extend(extra.iter().cloned());
                    objs
                }
            };
            let vars: Vec<(String, String)> = d
                .params
                .iter()
                .map(|p| {
                    self.unit
                        .vars
                        .iter()
                        .find(|(v, _)| v == p)
                        .cloned()
                        .expect("declaration parameters are checked at parse time")
                })
                .collect();
            for binding in self.bindings(vars, &[])? {
                let nf = NameForm {
                    base: d.name.clone(),
                    args: d.params.iter().map(|p| TermRef::Var(p.clone())).collect(),
                };
                ground.push((self.ground_name(&nf, &binding)?, domain.clone()));
            }
        }
        Signature::new(ground).map_err(|e| semantic(e.to_string()))
    }

    fn lower(&self, f: &FTree, binding: &Binding) -> Result<Formula, CliError> {
        Ok(match f {
            FTree::True => Formula::Top,
            FTree::False => Formula::Bottom,
            FTree::Atom { name, value } => {
                let constant = self.ground_name(name, binding)?;
                let value = match value {
                    TermRef::Lit(s) => s.clone(),
                    TermRef::Var(v) => match bound(binding, v) {
                        Some(o) => o.to_string(),
                        None => {
                            return Err(semantic(format!(
                                "variable `{v}` cannot appear here; the formula must be ground"
                            )))
                        }
                    },
                };
                Formula::atom(constant, value)
            }
            FTree::VarEq { var, .. } => {
                return Err(semantic(format!(
                    "variable `{var}` cannot stand for a constant outside `adl:` formulas"
                )))
            }
            FTree::Not(g) => Formula::not(self.lower(g, binding)?),
            FTree::And(a, b) => {
                Formula::and(self.lower(a, binding)?, self.lower(b, binding)?)
            }
            FTree::Or(a, b) => Formula::or(self.lower(a, binding)?, self.lower(b, binding)?),
            FTree::Implies(a, b) => {
                Formula::implies(self.lower(a, binding)?, self.lower(b, binding)?)
            }
            FTree::Equiv(a, b) => {
                Formula::equiv(self.lower(a, binding)?, self.lower(b, binding)?)
            }
            FTree::Forall(..) | FTree::Exists(..) => {
                return Err(semantic(
                    "quantifiers are only allowed in `adl:` formulas",
                ))
            }
        })
    }

    fn lower_ext(&self, f: &FTree, binding: &Binding) -> Result<ExtFormula, CliError> {
        Ok(match f {
            FTree::True => ExtFormula::Top,
            FTree::False => ExtFormula::Bottom,
            FTree::Atom { name, value } => {
                let constant = self.ground_name(name, binding)?;
                let right = match value {
                    TermRef::Lit(s) => Term::Value(s.clone()),
                    TermRef::Var(v) => match bound(binding, v) {
                        Some(o) => Term::Value(o.to_string()),
                        None => Term::Variable(v.clone()),
                    },
                };
                ExtFormula::atom(Term::Constant(constant), right)
            }
            FTree::VarEq { var, value } => {
                let right = match value {
                    TermRef::Lit(s) => Term::Value(s.clone()),
                    TermRef::Var(v) => match bound(binding, v) {
                        Some(o) => Term::Value(o.to_string()),
                        None => Term::Variable(v.clone()),
                    },
                };
                ExtFormula::atom(Term::Variable(var.clone()), right)
            }
            FTree::Not(g) => ExtFormula::not(self.lower_ext(g, binding)?),
            FTree::And(a, b) => {
                ExtFormula::and(self.lower_ext(a, binding)?, self.lower_ext(b, binding)?)
            }
            FTree::Or(a, b) => {
                ExtFormula::or(self.lower_ext(a, binding)?, self.lower_ext(b, binding)?)
            }
            FTree::Implies(a, b) => {
                ExtFormula::implies(self.lower_ext(a, binding)?, self.lower_ext(b, binding)?)
            }
            FTree::Equiv(a, b) => {
                ExtFormula::equiv(self.lower_ext(a, binding)?, self.lower_ext(b, binding)?)
            }
            FTree::Forall(x, g) => ExtFormula::forall(x.clone(), self.lower_ext(g, binding)?),
            FTree::Exists(x, g) => ExtFormula::exists(x.clone(), self.lower_ext(g, binding)?),
        })
    }

    fn instantiate_prop(
        &self,
        body: &LawBody,
        binding: &Binding,
        sig: &ActionSignature,
    ) -> Result<Proposition, CliError> {
        let lower_opt = |g: &Option<FTree>| -> Result<Formula, CliError> {
            match g {
                Some(g) => self.lower(g, binding),
                None => Ok(Formula::Top),
            }
        };
        let ground_actions = |actions: &[NameForm]| -> Result<Vec<String>, CliError> {
            actions.iter().map(|a| self.ground_name(a, binding)).collect()
        };
        let abbrev = match body {
            LawBody::Causal { .. } => unreachable!("checked during classification"),
            LawBody::Caused {
                head,
                condition,
                after,
            } => {
                let head = self.lower(head, binding)?;
                let condition = lower_opt(condition)?;
                return Ok(match after {
                    Some(h) => Proposition::Dynamic {
                        head,
                        condition,
                        after: self.lower(h, binding)?,
                    },
                    None => Proposition::Static { head, condition },
                });
            }
            LawBody::Causes {
                actions,
                head,
                condition,
            } => Abbreviation::Causes {
                actions: ground_actions(actions)?,
                head: self.lower(head, binding)?,
                condition: lower_opt(condition)?,
            },
            LawBody::Nonexecutable { actions, condition } => Abbreviation::Nonexecutable {
                actions: ground_actions(actions)?,
                condition: lower_opt(condition)?,
            },
            LawBody::Inertial(g) => Abbreviation::Inertial(self.lower(g, binding)?),
            LawBody::Never(g) => Abbreviation::Never(self.lower(g, binding)?),
        };
        abbrev.desugar(sig).map_err(|e| semantic(e.to_string()))
    }

    fn expand_adl(&self, sig: ActionSignature) -> Result<ExpandedUnit, CliError> {
        let mut preconds = Vec::new();
        let mut updates = Vec::new();
        for stmt in &self.unit.adl {
            match stmt {
                AdlStmt::Precond {
                    action,
                    formula,
                    guards,
                } => {
                    let vars = self.stmt_vars(&[action], formula, guards);
                    for binding in self.bindings(vars, guards)? {
                        preconds.push((
                            self.ground_name(action, &binding)?,
                            self.lower_ext(formula, &binding)?,
                        ));
                    }
                }
                AdlStmt::Update {
                    action,
                    fluent,
                    parameter,
                    body,
                    guards,
                } => {
                    let vars = self.stmt_vars(&[action, fluent], body, guards);
                    for binding in self.bindings(vars, guards)? {
                        updates.push((
                            self.ground_name(action, &binding)?,
                            self.ground_name(fluent, &binding)?,
                            Update::new(parameter.clone(), self.lower_ext(body, &binding)?),
                        ));
                    }
                }
            }
        }
        let adl = AdlDescription::new(sig, preconds, updates)
            .map_err(|e| semantic(e.to_string()))?;
        Ok(ExpandedUnit::Adl(adl))
    }

    fn stmt_vars(
        &self,
        forms: &[&NameForm],
        formula: &FTree,
        guards: &[Guard],
    ) -> Vec<(String, String)> {
        let mut seen = BTreeSet::new();
        for nf in forms {
            for a in &nf.args {
                if let TermRef::Var(v) = a {
                    seen.insert(v.clone());
                }
            }
        }
        formula.schema_vars(&self.unit.vars, &mut seen);
        for g in guards {
            seen.insert(g.left.clone());
            seen.insert(g.right.clone());
        }
        self.unit
            .vars
            .iter()
            .filter(|(v, _)| seen.contains(v))
            .cloned()
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Queries

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Models,
    Explain,
    Completion,
    DefiniteCheck,
    States,
    Transitions,
    Diagram,
    TranslateCt,
    Adl2Cplus,
    Eliminate,
    Plan,
}

impl Command {
    fn from_name(s: &str) -> Option<Command> {
        Some(match s {
            "models" => Command::Models,
            "explain" => Command::Explain,
            "completion" => Command::Completion,
            "definite-check" => Command::DefiniteCheck,
            "states" => Command::States,
            "transitions" => Command::Transitions,
            "diagram" => Command::Diagram,
            "translate-ct" => Command::TranslateCt,
            "adl2cplus" => Command::Adl2Cplus,
            "eliminate" => Command::Eliminate,
            "plan" => Command::Plan,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Models => "models",
            Command::Explain => "explain",
            Command::Completion => "completion",
            Command::DefiniteCheck => "definite-check",
            Command::States => "states",
            Command::Transitions => "transitions",
            Command::Diagram => "diagram",
            Command::TranslateCt => "translate-ct",
            Command::Adl2Cplus => "adl2cplus",
            Command::Eliminate => "eliminate",
            Command::Plan => "plan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ElimMethod {
    General,
    Definite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Text,
    Records,
    Dot,
}

/// Command-line inputs that select and parameterize a query.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub query: String,
    pub format: OutputFormat,
    pub limit: Option<usize>,
    pub eliminate: Option<String>,
    pub method: Option<ElimMethod>,
    pub max_steps: Option<usize>,
}

struct ResolvedQuery {
    command: Command,
    formulas: Vec<FTree>,
    init: Option<FTree>,
    goal: Option<FTree>,
    target: Option<String>,
    method: Option<ElimMethod>,
    limit: Option<usize>,
    max_steps: Option<usize>,
}

fn resolve_query(unit: &SourceUnit, inv: &Invocation) -> Result<ResolvedQuery, CliError> {
    let mut rq = if let Some(block) = unit.queries.iter().find(|q| q.name == inv.query) {
        let command = Command::from_name(&block.command).ok_or_else(|| {
            semantic(format!(
                "query `{}`: unknown command `{}`",
                block.name, block.command
            ))
        })?;
        let misplaced = |key: &str, ok: bool| -> Result<(), CliError> {
            if ok {
                Ok(())
            } else {
                Err(semantic(format!(
                    "query `{}`: `{key}` does not apply to `{}`",
                    block.name,
                    command.name()
                )))
            }
        };
        misplaced(
            "formula",
            block.formulas.is_empty() || command == Command::Models,
        )?;
        misplaced("init", block.init.is_none() || command == Command::Plan)?;
        misplaced("goal", block.goal.is_none() || command == Command::Plan)?;
        misplaced(
            "target",
            block.target.is_none() || command == Command::Eliminate,
        )?;
        misplaced(
            "method",
            block.method.is_none() || command == Command::Eliminate,
        )?;
        misplaced("limit", block.limit.is_none() || command == Command::Models)?;
        misplaced(
            "max-steps",
            block.max_steps.is_none() || command == Command::Plan,
        )?;
        let method = match &block.method {
            None => None,
            Some(m) if m == "general" => Some(ElimMethod::General),
            Some(m) if m == "definite" => Some(ElimMethod::Definite),
            Some(m) => {
                return Err(semantic(format!(
                    "query `{}`: unknown method `{m}` (expected `general` or `definite`)",
                    block.name
                )))
            }
        };
        let target = match &block.target {
            None => None,
            Some(nf) => {
                if nf.args.iter().any(|a| matches!(a, TermRef::Var(_))) {
                    return Err(semantic(format!(
                        "query `{}`: the target constant must be ground",
                        block.name
                    )));
                }
                Some(nf.to_string())
            }
        };
        ResolvedQuery {
            command,
            formulas: block.formulas.clone(),
            init: block.init.clone(),
            goal: block.goal.clone(),
            target,
            method,
            limit: block.limit,
            max_steps: block.max_steps,
        }
    } else if let Some(command) = Command::from_name(&inv.query) {
        ResolvedQuery {
            command,
            formulas: Vec::new(),
            init: None,
            goal: None,
            target: None,
            method: None,
            limit: None,
            max_steps: None,
        }
    } else {
        return Err(semantic(format!(
            "unknown query `{}`: no such query block or command",
            inv.query
        )));
    };

    if inv.limit.is_some() {
        if rq.command != Command::Models {
            return Err(semantic("--limit only applies to the models command"));
        }
        rq.limit = inv.limit;
    }
    if inv.eliminate.is_some() {
        if rq.command != Command::Eliminate {
            return Err(semantic(
                "--eliminate only applies to the eliminate command",
            ));
        }
        rq.target = inv.eliminate.clone();
    }
    if inv.method.is_some() {
        if rq.command != Command::Eliminate {
            return Err(semantic("--method only applies to the eliminate command"));
        }
        rq.method = inv.method;
    }
    if inv.max_steps.is_some() {
        if rq.command != Command::Plan {
            return Err(semantic("--max-steps only applies to the plan command"));
        }
        rq.max_steps = inv.max_steps;
    }
    if rq.command == Command::Eliminate && rq.target.is_none() {
        return Err(semantic(
            "eliminate needs a target constant: pass --eliminate CONST or a `target:` entry",
        ));
    }
    if rq.command == Command::Plan && (rq.init.is_none() || rq.goal.is_none()) {
        return Err(semantic("plan needs `init:` and `goal:` formulas"));
    }
    Ok(rq)
}

// ---------------------------------------------------------------------------
// Running queries

/// A query result plus the solver work and wall time behind it.
pub struct Report {
    body: ReportBody,
    stats: SearchStats,
    wall: Duration,
}

enum ReportBody {
    Interpretations {
        noun: &'static str,
        items: Vec<Interpretation>,
    },
    Formulas(Vec<Formula>),
    Laws(Vec<CausalLaw>),
    Propositions(Vec<Proposition>),
    Definite {
        ok: bool,
        violation: Option<String>,
    },
    Diagram {
        diagram: TransitionDiagram,
        edges_only: bool,
    },
    Plan {
        steps: Option<Vec<crate::cplus::Transition>>,
        bound: usize,
    },
}

impl Report {
    pub fn stats_line(&self) -> String {
        format!("{} wall={:?}", self.stats, self.wall)
    }
}

fn needs(kind: &str, command: Command) -> CliError {
    semantic(format!("the {} command needs {kind}", command.name()))
}

fn run(expanded: &ExpandedUnit, rq: &ResolvedQuery) -> Result<Report, CliError> {
    let started = Instant::now();
    let ex_empty = Expander {
        unit: &SourceUnit::default(),
    };
    let ground = |g: &FTree| ex_empty.lower(g, &Binding::new());
    let mut stats = SearchStats::default();
    let body = match rq.command {
        Command::Models => {
            let sig = match expanded {
                ExpandedUnit::Causal(t) => t.signature(),
                ExpandedUnit::Cplus(d) => d.signature().combined(),
                ExpandedUnit::Adl(a) => a.signature().combined(),
            };
            let mut formulas = Vec::with_capacity(rq.formulas.len());
            for g in &rq.formulas {
                let f = ground(g)?;
                f.well_formed(sig).map_err(|e| semantic(e.to_string()))?;
                formulas.push(f);
            }
            let (items, s) = solver::enumerate_models(sig, &formulas, rq.limit);
            stats = s;
            ReportBody::Interpretations {
                noun: "model",
                items,
            }
        }
        Command::Explain => {
            let ExpandedUnit::Causal(t) = expanded else {
                return Err(needs("a causal theory", rq.command));
            };
            let (items, s) = t.causally_explained_with_stats();
            stats = s;
            ReportBody::Interpretations {
                noun: "causally explained interpretation",
                items,
            }
        }
        Command::Completion => {
            let ExpandedUnit::Causal(t) = expanded else {
                return Err(needs("a causal theory", rq.command));
            };
            let completion = t.completion().map_err(|e| semantic(e.to_string()))?;
            ReportBody::Formulas(completion.formulas().to_vec())
        }
        Command::DefiniteCheck => {
            let checked = match expanded {
                ExpandedUnit::Causal(t) => t.check_definite(),
                ExpandedUnit::Cplus(d) => d.check_definite(),
                ExpandedUnit::Adl(_) => {
                    return Err(needs(
                        "a causal theory or an action description",
                        rq.command,
                    ))
                }
            };
            match checked {
                Ok(()) => ReportBody::Definite {
                    ok: true,
                    violation: None,
                },
                Err(e) => ReportBody::Definite {
                    ok: false,
                    violation: Some(e.to_string()),
                },
            }
        }
        Command::States => {
            let ExpandedUnit::Cplus(d) = expanded else {
                return Err(needs("an action description", rq.command));
            };
            let (items, s) = d.states_with_stats();
            stats = s;
            ReportBody::Interpretations {
                noun: "state",
                items,
            }
        }
        Command::Transitions | Command::Diagram => {
            let ExpandedUnit::Cplus(d) = expanded else {
                return Err(needs("an action description", rq.command));
            };
            let (diagram, s) = d.transition_diagram_with_stats();
            stats = s;
            ReportBody::Diagram {
                diagram,
                edges_only: rq.command == Command::Transitions,
            }
        }
        Command::TranslateCt => {
            let ExpandedUnit::Cplus(d) = expanded else {
                return Err(needs("an action description", rq.command));
            };
            ReportBody::Laws(d.ct().theory().laws().to_vec())
        }
        Command::Adl2Cplus => {
            let ExpandedUnit::Adl(a) = expanded else {
                return Err(needs("an adl description", rq.command));
            };
            a.check_consistent().map_err(|e| semantic(e.to_string()))?;
            ReportBody::Propositions(a.to_cplus().propositions().to_vec())
        }
        Command::Eliminate => {
            let target = rq.target.as_deref().expect("checked during resolution");
            match expanded {
                ExpandedUnit::Causal(t) => {
                    let (_, out) = match rq.method.unwrap_or(ElimMethod::General) {
                        ElimMethod::General => elim::eliminate_causal_general(t, target),
                        ElimMethod::Definite => elim::eliminate_causal_definite(t, target),
                    }
                    .map_err(|e| semantic(e.to_string()))?;
                    ReportBody::Laws(out.laws().to_vec())
                }
                ExpandedUnit::Cplus(d) => {
                    let is_fluent = d.signature().fluents().index_of(target).is_some();
                    let is_action = d.signature().actions().index_of(target).is_some();
                    let out = if is_fluent {
                        match rq.method.unwrap_or(ElimMethod::General) {
                            ElimMethod::General => elim::eliminate_fluent_general(d, target),
                            ElimMethod::Definite => elim::eliminate_fluent_definite(d, target),
                        }
                    } else if is_action {
                        if rq.method.is_some() {
                            return Err(semantic(
                                "--method does not apply when eliminating an action constant",
                            ));
                        }
                        elim::eliminate_action(d, target)
                    } else {
                        return Err(semantic(format!("unknown constant `{target}`")));
                    }
                    .map_err(|e| semantic(e.to_string()))?
                    .1;
                    ReportBody::Propositions(out.propositions().to_vec())
                }
                ExpandedUnit::Adl(_) => {
                    return Err(needs(
                        "a causal theory or an action description",
                        rq.command,
                    ))
                }
            }
        }
        Command::Plan => {
            let ExpandedUnit::Cplus(d) = expanded else {
                return Err(needs("an action description", rq.command));
            };
            let init = ground(rq.init.as_ref().expect("checked during resolution"))?;
            let goal = ground(rq.goal.as_ref().expect("checked during resolution"))?;
            for f in [&init, &goal] {
                f.well_formed(d.signature().fluents())
                    .map_err(|e| semantic(e.to_string()))?;
            }
            let (diagram, s) = d.transition_diagram_with_stats();
            stats = s;
            let bound = rq.max_steps.unwrap_or(diagram.nodes().len());
            let steps = d.path_search(&init, &goal, bound);
            ReportBody::Plan { steps, bound }
        }
    };
    Ok(Report {
        body,
        stats,
        wall: started.elapsed(),
    })
}

// ---------------------------------------------------------------------------
// Emission

fn counted(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("1 {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

fn interp_value(i: &Interpretation) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (decl, &v) in i.signature().constants().iter().zip(i.value_indices()) {
        map.insert(
            decl.name().to_string(),
            serde_json::Value::String(decl.domain()[v].clone()),
        );
    }
    serde_json::Value::Object(map)
}

fn record_line(out: &mut String, value: &serde_json::Value) {
    out.push_str(&value.to_string());
    out.push('\n');
}

fn transition_value(t: &crate::cplus::Transition) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("action".into(), interp_value(&t.action));
    map.insert("initial".into(), interp_value(&t.initial));
    map.insert("resulting".into(), interp_value(&t.resulting));
    serde_json::Value::Object(map)
}

fn proposition_value(p: &Proposition) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    if let Proposition::Dynamic { after, .. } = p {
        map.insert("after".into(), serde_json::Value::String(after.to_string()));
    }
    map.insert(
        "condition".into(),
        serde_json::Value::String(p.condition().to_string()),
    );
    map.insert(
        "head".into(),
        serde_json::Value::String(p.head().to_string()),
    );
    serde_json::Value::Object(map)
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a report in the requested format.
pub fn emit(report: &Report, format: OutputFormat) -> Result<String, CliError> {
    let mut out = String::new();
    match (&report.body, format) {
        (ReportBody::Interpretations { noun, items }, OutputFormat::Text) => {
            for i in items {
                out.push_str(&i.to_string());
                out.push('\n');
            }
            out.push_str(&counted(items.len(), noun));
            out.push('\n');
        }
        (ReportBody::Interpretations { items, .. }, OutputFormat::Records) => {
            for i in items {
                record_line(&mut out, &interp_value(i));
            }
            record_line(&mut out, &serde_json::json!({ "total": items.len() }));
        }
        (ReportBody::Formulas(items), OutputFormat::Text) => {
            for f in items {
                out.push_str(&f.to_string());
                out.push('\n');
            }
        }
        (ReportBody::Formulas(items), OutputFormat::Records) => {
            for f in items {
                record_line(&mut out, &serde_json::json!({ "formula": f.to_string() }));
            }
            record_line(&mut out, &serde_json::json!({ "total": items.len() }));
        }
        (ReportBody::Laws(items), OutputFormat::Text) => {
            for law in items {
                out.push_str(&law.to_string());
                out.push('\n');
            }
        }
        (ReportBody::Laws(items), OutputFormat::Records) => {
            for law in items {
                record_line(
                    &mut out,
                    &serde_json::json!({
                        "antecedent": law.antecedent.to_string(),
                        "consequent": law.consequent.to_string(),
                    }),
                );
            }
            record_line(&mut out, &serde_json::json!({ "total": items.len() }));
        }
        (ReportBody::Propositions(items), OutputFormat::Text) => {
            for p in items {
                out.push_str(&p.to_string());
                out.push('\n');
            }
        }
        (ReportBody::Propositions(items), OutputFormat::Records) => {
            for p in items {
                record_line(&mut out, &proposition_value(p));
            }
            record_line(&mut out, &serde_json::json!({ "total": items.len() }));
        }
        (ReportBody::Definite { ok, violation }, OutputFormat::Text) => {
            match violation {
                None => out.push_str("definite\n"),
                Some(v) => {
                    out.push_str(&format!("not definite: {v}\n"));
                }
            }
            debug_assert_eq!(*ok, violation.is_none());
        }
        (ReportBody::Definite { ok, violation }, OutputFormat::Records) => {
            let mut map = serde_json::Map::new();
            map.insert("definite".into(), serde_json::Value::Bool(*ok));
            if let Some(v) = violation {
                map.insert("violation".into(), serde_json::Value::String(v.clone()));
            }
            record_line(&mut out, &serde_json::Value::Object(map));
        }
        (
            ReportBody::Diagram {
                diagram,
                edges_only,
            },
            OutputFormat::Text,
        ) => {
            if !edges_only {
                for s in diagram.nodes() {
                    out.push_str(&format!("state {s}\n"));
                }
            }
            for e in diagram.edges() {
                out.push_str(&e.to_string());
                out.push('\n');
            }
            if *edges_only {
                out.push_str(&counted(diagram.edges().len(), "transition"));
            } else {
                out.push_str(&format!(
                    "{}, {}",
                    counted(diagram.nodes().len(), "state"),
                    counted(diagram.edges().len(), "transition")
                ));
            }
            out.push('\n');
        }
        (
            ReportBody::Diagram {
                diagram,
                edges_only,
            },
            OutputFormat::Records,
        ) => {
            if !edges_only {
                for s in diagram.nodes() {
                    record_line(&mut out, &serde_json::json!({ "state": interp_value(s) }));
                }
            }
            for e in diagram.edges() {
                record_line(&mut out, &transition_value(e));
            }
            if *edges_only {
                record_line(
                    &mut out,
                    &serde_json::json!({ "total": diagram.edges().len() }),
                );
            } else {
                record_line(
                    &mut out,
                    &serde_json::json!({
                        "states": diagram.nodes().len(),
                        "transitions": diagram.edges().len(),
                    }),
                );
            }
        }
        (
            ReportBody::Diagram {
                diagram,
                edges_only: false,
            },
            OutputFormat::Dot,
        ) => {
            out.push_str("digraph transitions {\n");
            for s in diagram.nodes() {
                out.push_str(&format!("  {};\n", dot_quote(&s.to_string())));
            }
            for e in diagram.edges() {
                out.push_str(&format!(
                    "  {} -> {} [label={}];\n",
                    dot_quote(&e.initial.to_string()),
                    dot_quote(&e.resulting.to_string()),
                    dot_quote(&e.action.to_string())
                ));
            }
            out.push_str("}\n");
        }
        (ReportBody::Plan { steps, bound }, OutputFormat::Text) => match steps {
            None => out.push_str(&format!("no plan within {bound} steps\n")),
            Some(steps) => {
                for (k, e) in steps.iter().enumerate() {
                    out.push_str(&format!("{}. {e}\n", k + 1));
                }
                out.push_str(&format!("plan length {}\n", steps.len()));
            }
        },
        (ReportBody::Plan { steps, .. }, OutputFormat::Records) => match steps {
            None => record_line(&mut out, &serde_json::json!({ "total": null })),
            Some(steps) => {
                for (k, e) in steps.iter().enumerate() {
                    let mut map = serde_json::Map::new();
                    map.insert("action".into(), interp_value(&e.action));
                    map.insert("initial".into(), interp_value(&e.initial));
                    map.insert("resulting".into(), interp_value(&e.resulting));
                    map.insert("step".into(), serde_json::json!(k + 1));
                    record_line(&mut out, &serde_json::Value::Object(map));
                }
                record_line(&mut out, &serde_json::json!({ "total": steps.len() }));
            }
        },
        (_, OutputFormat::Dot) => {
            return Err(semantic(
                "dot output is only available for the diagram command",
            ))
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Driver

/// What the binary prints: the report on stdout and, on request, a
/// stats line on stderr.
#[derive(Debug)]
pub struct DriveOutput {
    pub stdout: String,
    pub stats_line: String,
}

/// Parses, expands, runs, and renders in one call.
pub fn drive(text: &str, inv: &Invocation) -> Result<DriveOutput, CliError> {
    let unit = parse(text)?;
    let rq = resolve_query(&unit, inv)?;
    let expanded = expand_schemas(&unit)?;
    let report = run(&expanded, &rq)?;
    let stdout = emit(&report, inv.format)?;
    Ok(DriveOutput {
        stdout,
        stats_line: report.stats_line(),
    })
}
