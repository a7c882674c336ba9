//! Multi-valued propositional logic.
//!
//! A signature is an ordered list of constants, each with an ordered,
//! nonempty, finite domain of value symbols. An atom `c=v` asserts that
//! constant `c` takes value `v`; an interpretation assigns every
//! constant exactly one value from its domain. Formulas are built from
//! atoms with the usual connectives, and satisfaction is classical.
//! Extended formulas add substitutionally grounded quantifiers over a
//! shared value domain.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Distinguished value symbol for Boolean falsity.
pub const FF: &str = "ff";
/// Distinguished value symbol for Boolean truth.
pub const TT: &str = "tt";

/// Errors rejected when assembling a signature.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("duplicate constant `{0}`")]
    DuplicateConstant(String),
    #[error("constant `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("constant `{constant}` lists value `{value}` twice")]
    DuplicateValue { constant: String, value: String },
}

/// A constant declaration: a name together with its ordered domain.
#[derive(Debug, Clone)]
pub struct ConstantDecl {
    name: String,
    domain: Vec<String>,
    value_index: HashMap<String, usize>,
}

impl ConstantDecl {
    /// The constant's name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The ordered domain of value symbols.
    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    /// Position of `value` in the domain, if present.
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.value_index.get(value).copied()
    }

    /// True iff the domain is exactly `[ff, tt]` in that order.
    pub fn is_boolean(&self) -> bool {
        self.domain.len() == 2 && self.domain[0] == FF && self.domain[1] == TT
    }
}

impl PartialEq for ConstantDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.domain == other.domain
    }
}

impl Eq for ConstantDecl {}

/// An ordered collection of constants with their domains.
///
/// Declaration order is the canonical order used everywhere: atom
/// listings, interpretation enumeration, and printed output all follow
/// it, so equal inputs always produce equal outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    constants: Vec<ConstantDecl>,
    index: HashMap<String, usize>,
}

impl Signature {
    /// Builds a signature, rejecting duplicate constants, empty
    /// domains, and repeated values within one domain.
    pub fn new<N, V>(decls: impl IntoIterator<Item = (N, Vec<V>)>) -> Result<Self, SignatureError>
    where
        N: Into<String>,
        V: Into<String>,
    {
        let mut constants = Vec::new();
        let mut index = HashMap::new();
        for (name, domain) in decls {
            let name = name.into();
            if index.contains_key(&name) {
                return Err(SignatureError::DuplicateConstant(name));
            }
            if domain.is_empty() {
                return Err(SignatureError::EmptyDomain(name));
            }
            let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
            let mut value_index = HashMap::new();
            for (i, v) in domain.iter().enumerate() {
                if value_index.insert(v.clone(), i).is_some() {
                    return Err(SignatureError::DuplicateValue {
                        constant: name,
                        value: v.clone(),
                    });
                }
            }
            index.insert(name.clone(), constants.len());
            constants.push(ConstantDecl {
                name,
                domain,
                value_index,
            });
        }
        Ok(Signature { constants, index })
    }

    /// A signature where every listed constant is Boolean.
    pub fn all_boolean<N: Into<String>>(names: impl IntoIterator<Item = N>) -> Self {
        Signature::new(names.into_iter().map(|n| (n.into(), vec![FF, TT])))
            .expect("boolean signature construction cannot fail on distinct names")
    }

    /// Number of constants.
    pub fn len(&self) -> usize {
        self.constants.len()
    }

    /// True iff the signature has no constants.
    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    /// The declarations in canonical order.
    pub fn constants(&self) -> &[ConstantDecl] {
        &self.constants
    }

    /// Position of the named constant.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Declaration at `index`.
    pub fn decl(&self, index: usize) -> &ConstantDecl {
        &self.constants[index]
    }

    /// Declaration for the named constant.
    pub fn decl_of(&self, name: &str) -> Option<&ConstantDecl> {
        self.index_of(name).map(|i| self.decl(i))
    }

    /// True iff every constant is Boolean.
    pub fn is_all_boolean(&self) -> bool {
        self.constants.iter().all(ConstantDecl::is_boolean)
    }

    /// All atoms `c=v` in canonical order: constants in declaration
    /// order, values in domain order.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.constants.iter().flat_map(|decl| {
            decl.domain.iter().map(move |v| Atom {
                constant: decl.name.clone(),
                value: v.clone(),
            })
        })
    }

    /// Total number of interpretations (product of domain sizes).
    pub fn interpretation_count(&self) -> usize {
        self.constants.iter().map(|c| c.domain.len()).product()
    }

    /// All interpretations in canonical (lexicographic) order.
    pub fn interpretations(self: &Arc<Self>) -> Interpretations {
        Interpretations {
            sig: Arc::clone(self),
            next: Some(vec![0; self.constants.len()]),
        }
    }
}

/// Iterator over every interpretation of a signature, lexicographic in
/// canonical constant and value order.
pub struct Interpretations {
    sig: Arc<Signature>,
    next: Option<Vec<usize>>,
}

impl Iterator for Interpretations {
    type Item = Interpretation;

    fn next(&mut self) -> Option<Interpretation> {
        let current = self.next.take()?;
        let item = Interpretation {
            sig: Arc::clone(&self.sig),
            values: current.clone(),
        };
        let mut odometer = current;
        let mut pos = odometer.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            if odometer[pos] + 1 < self.sig.decl(pos).domain.len() {
                odometer[pos] += 1;
                for slot in odometer.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                self.next = Some(odometer);
                break;
            }
        }
        Some(item)
    }
}

/// An atom `constant=value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub constant: String,
    pub value: String,
}

impl Atom {
    pub fn new(constant: impl Into<String>, value: impl Into<String>) -> Self {
        Atom {
            constant: constant.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.constant, self.value)
    }
}

/// Errors for atoms that do not fit a signature.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WellFormedError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("constant `{constant}` has no value `{value}`")]
    UnknownValue { constant: String, value: String },
}

/// A propositional formula over atoms `c=v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Top,
    Bottom,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(constant: impl Into<String>, value: impl Into<String>) -> Self {
        Formula::Atom(Atom::new(constant, value))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Self {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    /// Left-associated conjunction; `true` when the list is empty.
    pub fn conj(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left-associated disjunction; `false` when the list is empty.
    pub fn disj(fs: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::Bottom,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// All atoms in the tree, left to right.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Top | Formula::Bottom => {}
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Equiv(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// True iff some atom in the tree names `constant`.
    pub fn mentions(&self, constant: &str) -> bool {
        self.atoms().iter().any(|a| a.constant == constant)
    }

    /// Rebuilds the formula with every atom replaced by `f(atom)`.
    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Formula) -> Formula {
        match self {
            Formula::Atom(a) => f(a),
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
            Formula::Not(g) => Formula::not(g.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Implies(a, b) => Formula::implies(a.map_atoms(f), b.map_atoms(f)),
            Formula::Equiv(a, b) => Formula::equiv(a.map_atoms(f), b.map_atoms(f)),
        }
    }

    /// Checks every atom against `sig`.
    pub fn well_formed(&self, sig: &Signature) -> Result<(), WellFormedError> {
        for atom in self.atoms() {
            let decl = sig
                .decl_of(&atom.constant)
                .ok_or_else(|| WellFormedError::UnknownConstant(atom.constant.clone()))?;
            if decl.value_index(&atom.value).is_none() {
                return Err(WellFormedError::UnknownValue {
                    constant: atom.constant.clone(),
                    value: atom.value.clone(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 1)
    }
}

impl Formula {
    fn prec(&self) -> u8 {
        match self {
            Formula::Equiv(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            Formula::Atom(..) | Formula::Top | Formula::Bottom => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.prec();
        if prec < min {
            write!(f, "(")?;
            self.fmt_prec(f, 1)?;
            return write!(f, ")");
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Top => write!(f, "true"),
            Formula::Bottom => write!(f, "false"),
            Formula::Not(g) => {
                write!(f, "-")?;
                g.fmt_prec(f, 5)
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 5)
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 4)
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 2)
            }
            Formula::Equiv(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " <-> ")?;
                b.fmt_prec(f, 1)
            }
        }
    }
}

/// A compiled formula with atoms resolved to positions, for tight
/// evaluation loops.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Atom(usize, usize),
    Top,
    Bottom,
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Equiv(Box<Compiled>, Box<Compiled>),
}

pub(crate) fn compile(f: &Formula, sig: &Signature) -> Result<Compiled, WellFormedError> {
    Ok(match f {
        Formula::Atom(a) => {
            let ci = sig
                .index_of(&a.constant)
                .ok_or_else(|| WellFormedError::UnknownConstant(a.constant.clone()))?;
            let vi = sig.decl(ci).value_index(&a.value).ok_or_else(|| {
                WellFormedError::UnknownValue {
                    constant: a.constant.clone(),
                    value: a.value.clone(),
                }
            })?;
            Compiled::Atom(ci, vi)
        }
        Formula::Top => Compiled::Top,
        Formula::Bottom => Compiled::Bottom,
        Formula::Not(g) => Compiled::Not(Box::new(compile(g, sig)?)),
        Formula::And(a, b) => Compiled::And(Box::new(compile(a, sig)?), Box::new(compile(b, sig)?)),
        Formula::Or(a, b) => Compiled::Or(Box::new(compile(a, sig)?), Box::new(compile(b, sig)?)),
        Formula::Implies(a, b) => {
            Compiled::Implies(Box::new(compile(a, sig)?), Box::new(compile(b, sig)?))
        }
        Formula::Equiv(a, b) => {
            Compiled::Equiv(Box::new(compile(a, sig)?), Box::new(compile(b, sig)?))
        }
    })
}

impl Compiled {
    pub(crate) fn eval(&self, values: &[usize]) -> bool {
        match self {
            Compiled::Atom(ci, vi) => values[*ci] == *vi,
            Compiled::Top => true,
            Compiled::Bottom => false,
            Compiled::Not(g) => !g.eval(values),
            Compiled::And(a, b) => a.eval(values) && b.eval(values),
            Compiled::Or(a, b) => a.eval(values) || b.eval(values),
            Compiled::Implies(a, b) => !a.eval(values) || b.eval(values),
            Compiled::Equiv(a, b) => a.eval(values) == b.eval(values),
        }
    }
}

/// Errors when rebuilding an interpretation from an atom set.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FromAtomsError {
    #[error(transparent)]
    IllFormed(#[from] WellFormedError),
    #[error("no atom assigns constant `{0}`")]
    MissingConstant(String),
    #[error("constant `{0}` is assigned more than once")]
    DuplicateConstant(String),
}

/// A total assignment of a domain value to every constant of a
/// signature.
#[derive(Debug, Clone)]
pub struct Interpretation {
    sig: Arc<Signature>,
    values: Vec<usize>,
}

impl Interpretation {
    /// Builds from value positions; panics if a position is out of its
    /// domain or the lengths disagree.
    pub fn new(sig: Arc<Signature>, values: Vec<usize>) -> Self {
        assert_eq!(values.len(), sig.len(), "one value per constant");
        for (ci, vi) in values.iter().enumerate() {
            assert!(
                *vi < sig.decl(ci).domain.len(),
                "value index {vi} outside the domain of `{}`",
                sig.decl(ci).name
            );
        }
        Interpretation { sig, values }
    }

    /// Builds from `(constant, value)` pairs covering every constant
    /// exactly once.
    pub fn from_assignment(
        sig: &Arc<Signature>,
        pairs: &[(&str, &str)],
    ) -> Result<Self, FromAtomsError> {
        let atoms: Vec<Atom> = pairs.iter().map(|(c, v)| Atom::new(*c, *v)).collect();
        Self::from_atoms(sig, &atoms)
    }

    /// Inverse of [`Interpretation::atoms`]: requires exactly one atom
    /// per constant.
    pub fn from_atoms(sig: &Arc<Signature>, atoms: &[Atom]) -> Result<Self, FromAtomsError> {
        let mut values: Vec<Option<usize>> = vec![None; sig.len()];
        for atom in atoms {
            let ci = sig
                .index_of(&atom.constant)
                .ok_or_else(|| WellFormedError::UnknownConstant(atom.constant.clone()))?;
            let vi = sig.decl(ci).value_index(&atom.value).ok_or_else(|| {
                WellFormedError::UnknownValue {
                    constant: atom.constant.clone(),
                    value: atom.value.clone(),
                }
            })?;
            if values[ci].is_some() {
                return Err(FromAtomsError::DuplicateConstant(atom.constant.clone()));
            }
            values[ci] = Some(vi);
        }
        let mut out = Vec::with_capacity(sig.len());
        for (ci, slot) in values.into_iter().enumerate() {
            match slot {
                Some(vi) => out.push(vi),
                None => {
                    return Err(FromAtomsError::MissingConstant(sig.decl(ci).name.clone()));
                }
            }
        }
        Ok(Interpretation {
            sig: Arc::clone(sig),
            values: out,
        })
    }

    /// The signature this interpretation assigns.
    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    /// Value position assigned to constant `ci`.
    pub fn value_index(&self, ci: usize) -> usize {
        self.values[ci]
    }

    /// All value positions, one per constant.
    pub fn value_indices(&self) -> &[usize] {
        &self.values
    }

    /// Value name assigned to constant `ci`.
    pub fn value_name(&self, ci: usize) -> &str {
        &self.sig.decl(ci).domain[self.values[ci]]
    }

    /// Value name assigned to the named constant.
    pub fn value_of(&self, constant: &str) -> Option<&str> {
        self.sig.index_of(constant).map(|ci| self.value_name(ci))
    }

    /// Classical satisfaction. Panics if the formula mentions an atom
    /// outside this interpretation's signature; theories validate their
    /// formulas at construction, so reaching that panic is a caller
    /// bug.
    pub fn satisfies(&self, f: &Formula) -> bool {
        compile(f, &self.sig)
            .expect("formula must be well-formed over the interpretation's signature")
            .eval(&self.values)
    }

    /// The atom view: one atom `c=v` per constant, canonical order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.sig
            .constants()
            .iter()
            .zip(&self.values)
            .map(|(decl, vi)| Atom::new(decl.name.clone(), decl.domain[*vi].clone()))
            .collect()
    }
}

impl PartialEq for Interpretation {
    fn eq(&self, other: &Self) -> bool {
        debug_assert_eq!(
            self.sig.len(),
            other.sig.len(),
            "comparing interpretations of different signatures"
        );
        self.values == other.values
    }
}

impl Eq for Interpretation {}

impl std::hash::Hash for Interpretation {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.values.hash(state);
    }
}

impl PartialOrd for Interpretation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interpretation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.values.cmp(&other.values)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.is_empty() {
            return write!(f, "{{}}");
        }
        let mut first = true;
        for (decl, vi) in self.sig.constants().iter().zip(&self.values) {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}={}", decl.name, decl.domain[*vi])?;
        }
        Ok(())
    }
}

/// Models of a formula set, in canonical interpretation order.
pub fn models(sig: &Arc<Signature>, formulas: &[Formula]) -> Vec<Interpretation> {
    crate::solver::enumerate_models(sig, formulas, None).0
}

/// Reference model enumeration: checks every interpretation in
/// canonical order against every formula. Slow and obviously correct;
/// the search in [`crate::solver`] is tested against it.
pub fn naive_models(sig: &Arc<Signature>, formulas: &[Formula]) -> Vec<Interpretation> {
    let compiled: Vec<Compiled> = formulas
        .iter()
        .map(|f| compile(f, sig).expect("formula must be well-formed over sig"))
        .collect();
    sig.interpretations()
        .filter(|i| compiled.iter().all(|c| c.eval(i.value_indices())))
        .collect()
}

/// True iff every model of `formulas` satisfies `f`.
pub fn entails(sig: &Arc<Signature>, formulas: &[Formula], f: &Formula) -> bool {
    let mut with_negation: Vec<Formula> = formulas.to_vec();
    with_negation.push(Formula::not(f.clone()));
    crate::solver::find_model(sig, &with_negation).is_none()
}

/// A term of an extended formula: a constant, a value, or a variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Constant(String),
    Value(String),
    Variable(String),
}

/// Errors raised while grounding an extended formula.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("variable `{0}` is not bound by any quantifier")]
    UnboundVariable(String),
    #[error("cannot ground a quantifier over an empty domain")]
    EmptyDomain,
    #[error("constant `{0}` cannot appear on the value side of an atom")]
    ConstantOnValueSide(String),
}

/// A formula with terms in atom position and substitutional
/// quantifiers over a shared value domain. The right-hand side of an
/// atom must ground to a value, so it may be a value or a variable but
/// never a constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtFormula {
    Atom(Term, Term),
    Top,
    Bottom,
    Not(Box<ExtFormula>),
    And(Box<ExtFormula>, Box<ExtFormula>),
    Or(Box<ExtFormula>, Box<ExtFormula>),
    Implies(Box<ExtFormula>, Box<ExtFormula>),
    Equiv(Box<ExtFormula>, Box<ExtFormula>),
    Forall(String, Box<ExtFormula>),
    Exists(String, Box<ExtFormula>),
}

impl ExtFormula {
    pub fn atom(left: Term, right: Term) -> Self {
        ExtFormula::Atom(left, right)
    }

    /// Atom `c=v` with a constant on the left and a value on the
    /// right.
    pub fn cv(constant: impl Into<String>, value: impl Into<String>) -> Self {
        ExtFormula::Atom(
            Term::Constant(constant.into()),
            Term::Value(value.into()),
        )
    }

    pub fn not(f: ExtFormula) -> Self {
        ExtFormula::Not(Box::new(f))
    }

    pub fn and(a: ExtFormula, b: ExtFormula) -> Self {
        ExtFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ExtFormula, b: ExtFormula) -> Self {
        ExtFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: ExtFormula, b: ExtFormula) -> Self {
        ExtFormula::Implies(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: ExtFormula, b: ExtFormula) -> Self {
        ExtFormula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn forall(var: impl Into<String>, f: ExtFormula) -> Self {
        ExtFormula::Forall(var.into(), Box::new(f))
    }

    pub fn exists(var: impl Into<String>, f: ExtFormula) -> Self {
        ExtFormula::Exists(var.into(), Box::new(f))
    }

    /// Variables that occur outside the scope of a binding quantifier.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            ExtFormula::Atom(left, right) => {
                for term in [left, right] {
                    if let Term::Variable(x) = term {
                        if !bound.iter().any(|b| b == x) && !out.iter().any(|o| o == x) {
                            out.push(x.clone());
                        }
                    }
                }
            }
            ExtFormula::Top | ExtFormula::Bottom => {}
            ExtFormula::Not(f) => f.collect_free(bound, out),
            ExtFormula::And(a, b)
            | ExtFormula::Or(a, b)
            | ExtFormula::Implies(a, b)
            | ExtFormula::Equiv(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            ExtFormula::Forall(x, f) | ExtFormula::Exists(x, f) => {
                bound.push(x.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// True iff the formula has no free variables.
    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Grounds over `dom`: universal quantifiers become conjunctions
    /// over the domain, existentials become disjunctions, and after
    /// substitution every value-to-value atom collapses to `true` or
    /// `false`.
    pub fn ground(&self, dom: &[String]) -> Result<Formula, GroundError> {
        let mut env = Vec::new();
        self.ground_rec(dom, &mut env)
    }

    /// Grounds with `var` pre-bound to `value`; used for update
    /// formulas whose single free variable ranges over the domain.
    pub fn ground_binding(
        &self,
        dom: &[String],
        var: &str,
        value: &str,
    ) -> Result<Formula, GroundError> {
        let mut env = vec![(var.to_string(), value.to_string())];
        self.ground_rec(dom, &mut env)
    }

    fn ground_rec(
        &self,
        dom: &[String],
        env: &mut Vec<(String, String)>,
    ) -> Result<Formula, GroundError> {
        Ok(match self {
            ExtFormula::Atom(left, right) => {
                let value = match right {
                    Term::Value(v) => v.clone(),
                    Term::Variable(x) => lookup(env, x)?,
                    Term::Constant(c) => {
                        return Err(GroundError::ConstantOnValueSide(c.clone()));
                    }
                };
                match left {
                    Term::Constant(c) => Formula::atom(c.clone(), value),
                    Term::Value(v) => {
                        if *v == value {
                            Formula::Top
                        } else {
                            Formula::Bottom
                        }
                    }
                    Term::Variable(x) => {
                        if lookup(env, x)? == value {
                            Formula::Top
                        } else {
                            Formula::Bottom
                        }
                    }
                }
            }
            ExtFormula::Top => Formula::Top,
            ExtFormula::Bottom => Formula::Bottom,
            ExtFormula::Not(f) => Formula::not(f.ground_rec(dom, env)?),
            ExtFormula::And(a, b) => {
                Formula::and(a.ground_rec(dom, env)?, b.ground_rec(dom, env)?)
            }
            ExtFormula::Or(a, b) => Formula::or(a.ground_rec(dom, env)?, b.ground_rec(dom, env)?),
            ExtFormula::Implies(a, b) => {
                Formula::implies(a.ground_rec(dom, env)?, b.ground_rec(dom, env)?)
            }
            ExtFormula::Equiv(a, b) => {
                Formula::equiv(a.ground_rec(dom, env)?, b.ground_rec(dom, env)?)
            }
            ExtFormula::Forall(x, f) => {
                self::ground_quantifier(dom, env, x, f, Formula::and)?
            }
            ExtFormula::Exists(x, f) => self::ground_quantifier(dom, env, x, f, Formula::or)?,
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(s) | Term::Value(s) | Term::Variable(s) => f.write_str(s),
        }
    }
}

impl ExtFormula {
    fn prec(&self) -> u8 {
        match self {
            ExtFormula::Equiv(..) => 1,
            ExtFormula::Implies(..) => 2,
            ExtFormula::Or(..) => 3,
            ExtFormula::And(..) => 4,
            ExtFormula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.prec();
        if prec < min {
            write!(f, "(")?;
            self.fmt_prec(f, 1)?;
            return write!(f, ")");
        }
        match self {
            ExtFormula::Atom(left, right) => write!(f, "{left}={right}"),
            ExtFormula::Top => write!(f, "true"),
            ExtFormula::Bottom => write!(f, "false"),
            ExtFormula::Not(g) => {
                write!(f, "-")?;
                g.fmt_prec(f, 5)
            }
            ExtFormula::And(a, b) => {
                a.fmt_prec(f, 4)?;
                write!(f, " & ")?;
                b.fmt_prec(f, 5)
            }
            ExtFormula::Or(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " | ")?;
                b.fmt_prec(f, 4)
            }
            ExtFormula::Implies(a, b) => {
                a.fmt_prec(f, 3)?;
                write!(f, " -> ")?;
                b.fmt_prec(f, 2)
            }
            ExtFormula::Equiv(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " <-> ")?;
                b.fmt_prec(f, 1)
            }
            // The body is always parenthesized, so quantifiers bind
            // like atoms from the outside.
            ExtFormula::Forall(x, g) => write!(f, "forall {x} ({g})"),
            ExtFormula::Exists(x, g) => write!(f, "exists {x} ({g})"),
        }
    }
}

impl fmt::Display for ExtFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 1)
    }
}

fn lookup(env: &[(String, String)], var: &str) -> Result<String, GroundError> {
    env.iter()
        .rev()
        .find(|(name, _)| name == var)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| GroundError::UnboundVariable(var.to_string()))
}

fn ground_quantifier(
    dom: &[String],
    env: &mut Vec<(String, String)>,
    var: &str,
    body: &ExtFormula,
    join: impl Fn(Formula, Formula) -> Formula,
) -> Result<Formula, GroundError> {
    if dom.is_empty() {
        return Err(GroundError::EmptyDomain);
    }
    let mut acc: Option<Formula> = None;
    for value in dom {
        env.push((var.to_string(), value.clone()));
        let inst = body.ground_rec(dom, env);
        env.pop();
        let inst = inst?;
        acc = Some(match acc {
            None => inst,
            Some(prev) => join(prev, inst),
        });
    }
    Ok(acc.expect("domain checked nonempty"))
}
