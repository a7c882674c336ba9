//! The action language C+.
//!
//! An action description declares fluent and action constants and a
//! sequence of static laws `caused F if G` and dynamic laws `caused F
//! if G after H`. States are the fluent interpretations closed under
//! the static laws; a transition `(s, a, s')` is causally explained
//! when `s'` is the unique fluent interpretation satisfying everything
//! caused in it. Descriptions also translate into causal theories over
//! a two-moment signature (`c@0`, `c@1`), with transitions in exact
//! correspondence to the causally explained interpretations of the
//! translation.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::causal::{CausalLaw, CausalTheory, DefinitenessViolation};
use crate::mvpl::{Atom, Formula, Interpretation, Signature, WellFormedError, TT};
use crate::solver::{self, SearchStats};

/// Problems constructing or desugaring an action description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptionError {
    #[error("constant `{name}` is declared as both a fluent and an action")]
    FluentActionClash { name: String },
    #[error("state formula mentions non-fluent constant `{name}`")]
    NonFluent { name: String },
    #[error("unknown action `{name}`")]
    UnknownAction { name: String },
    #[error("action `{name}` is not Boolean")]
    NotABooleanAction { name: String },
    #[error(transparent)]
    IllFormed(#[from] WellFormedError),
}

/// A signature partitioned into fluent and action constants.
///
/// The combined signature lists the fluents first, then the actions,
/// each in declaration order.
#[derive(Debug, Clone)]
pub struct ActionSignature {
    fluents: Arc<Signature>,
    actions: Arc<Signature>,
    combined: Arc<Signature>,
}

impl ActionSignature {
    pub fn new(
        fluents: Arc<Signature>,
        actions: Arc<Signature>,
    ) -> Result<Self, DescriptionError> {
        for decl in actions.constants() {
            if fluents.index_of(decl.name()).is_some() {
                return Err(DescriptionError::FluentActionClash {
                    name: decl.name().to_string(),
                });
            }
        }
        let decls = fluents
            .constants()
            .iter()
            .chain(actions.constants())
            .map(|d| (d.name().to_string(), d.domain().to_vec()));
        let combined = Arc::new(
            Signature::new(decls).expect("two valid signatures with disjoint names combine"),
        );
        Ok(ActionSignature {
            fluents,
            actions,
            combined,
        })
    }

    pub fn fluents(&self) -> &Arc<Signature> {
        &self.fluents
    }

    pub fn actions(&self) -> &Arc<Signature> {
        &self.actions
    }

    pub fn combined(&self) -> &Arc<Signature> {
        &self.combined
    }

    /// Joins a fluent interpretation and an action into one
    /// interpretation of the combined signature.
    pub fn combine(&self, s: &Interpretation, a: &Interpretation) -> Interpretation {
        debug_assert_eq!(s.signature().len(), self.fluents.len());
        debug_assert_eq!(a.signature().len(), self.actions.len());
        let mut values = Vec::with_capacity(self.combined.len());
        values.extend_from_slice(s.value_indices());
        values.extend_from_slice(a.value_indices());
        Interpretation::new(Arc::clone(&self.combined), values)
    }
}

/// A C+ proposition: a static or dynamic causal law.
///
/// Head and condition are state formulas (fluents only); the `after`
/// part of a dynamic law may mention fluents and actions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Proposition {
    Static { head: Formula, condition: Formula },
    Dynamic {
        head: Formula,
        condition: Formula,
        after: Formula,
    },
}

impl Proposition {
    pub fn head(&self) -> &Formula {
        match self {
            Proposition::Static { head, .. } | Proposition::Dynamic { head, .. } => head,
        }
    }

    pub fn condition(&self) -> &Formula {
        match self {
            Proposition::Static { condition, .. } | Proposition::Dynamic { condition, .. } => {
                condition
            }
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Proposition::Static { .. })
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proposition::Static { head, condition } => {
                write!(f, "caused {head} if {condition}")
            }
            Proposition::Dynamic {
                head,
                condition,
                after,
            } => write!(f, "caused {head} if {condition} after {after}"),
        }
    }
}

/// Shorthand proposition forms that expand to plain causal laws.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Abbreviation {
    /// `a1,...,ak causes F if H`: a direct effect of executing the
    /// listed Boolean actions together.
    Causes {
        actions: Vec<String>,
        head: Formula,
        condition: Formula,
    },
    /// `nonexecutable a1,...,ak if H`: the same with head `false`.
    Nonexecutable {
        actions: Vec<String>,
        condition: Formula,
    },
    /// `inertial F`: F keeps holding unless something interferes.
    Inertial(Formula),
    /// `never F`: a qualification constraint ruling F out.
    Never(Formula),
}

impl Abbreviation {
    /// Expands the shorthand to the proposition it stands for.
    ///
    /// The expansion of `causes`/`nonexecutable` is `caused F if true
    /// after a1=tt & ... & ak=tt & H`; a condition that is literally
    /// `true` is dropped from that conjunction.
    pub fn desugar(&self, sig: &ActionSignature) -> Result<Proposition, DescriptionError> {
        match self {
            Abbreviation::Causes {
                actions,
                head,
                condition,
            } => Ok(Proposition::Dynamic {
                head: head.clone(),
                condition: Formula::Top,
                after: Self::execution_formula(actions, condition, sig)?,
            }),
            Abbreviation::Nonexecutable { actions, condition } => Ok(Proposition::Dynamic {
                head: Formula::Bottom,
                condition: Formula::Top,
                after: Self::execution_formula(actions, condition, sig)?,
            }),
            Abbreviation::Inertial(f) => Ok(Proposition::Dynamic {
                head: f.clone(),
                condition: f.clone(),
                after: f.clone(),
            }),
            Abbreviation::Never(f) => Ok(Proposition::Static {
                head: Formula::Bottom,
                condition: f.clone(),
            }),
        }
    }

    fn execution_formula(
        actions: &[String],
        condition: &Formula,
        sig: &ActionSignature,
    ) -> Result<Formula, DescriptionError> {
        let mut parts = Vec::with_capacity(actions.len() + 1);
        for name in actions {
            let index = sig
                .actions()
                .index_of(name)
                .ok_or_else(|| DescriptionError::UnknownAction { name: name.clone() })?;
            if !sig.actions().decl(index).is_boolean() {
                return Err(DescriptionError::NotABooleanAction { name: name.clone() });
            }
            parts.push(Formula::atom(name.clone(), TT));
        }
        if *condition != Formula::Top {
            parts.push(condition.clone());
        }
        Ok(Formula::conj(parts))
    }
}

/// Whether a triple is a causally explained transition, and if not,
/// why.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionVerdict {
    Explained,
    NotExplained,
    InitialNotAState,
    ResultingNotAState,
}

impl TransitionVerdict {
    pub fn is_explained(self) -> bool {
        self == TransitionVerdict::Explained
    }
}

impl fmt::Display for TransitionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            TransitionVerdict::Explained => "causally explained",
            TransitionVerdict::NotExplained => "not causally explained",
            TransitionVerdict::InitialNotAState => "the initial interpretation is not a state",
            TransitionVerdict::ResultingNotAState => {
                "the resulting interpretation is not a state"
            }
        };
        f.write_str(text)
    }
}

/// A causally explained transition: initial state, action, resulting
/// state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub initial: Interpretation,
    pub action: Interpretation,
    pub resulting: Interpretation,
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) --[{}]--> ({})",
            self.initial, self.action, self.resulting
        )
    }
}

/// The labeled graph of all states and causally explained transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDiagram {
    nodes: Vec<Interpretation>,
    edges: Vec<Transition>,
}

impl TransitionDiagram {
    pub fn nodes(&self) -> &[Interpretation] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Transition] {
        &self.edges
    }
}

/// States of a fluent signature, seen through one C+ description.
pub type State = Interpretation;

/// A C+ action description: a partitioned signature and a sequence of
/// propositions. Construction validates that heads and conditions are
/// state formulas, that `after` parts fit the combined signature, and
/// drops syntactically repeated propositions, keeping first
/// occurrences in order.
#[derive(Debug, Clone)]
pub struct ActionDescription {
    sig: ActionSignature,
    propositions: Vec<Proposition>,
}

impl ActionDescription {
    pub fn new(
        sig: ActionSignature,
        propositions: Vec<Proposition>,
    ) -> Result<Self, DescriptionError> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for p in propositions {
            Self::check_state_formula(p.head(), &sig)?;
            Self::check_state_formula(p.condition(), &sig)?;
            if let Proposition::Dynamic { after, .. } = &p {
                after.well_formed(sig.combined())?;
            }
            if seen.insert(p.clone()) {
                kept.push(p);
            }
        }
        Ok(ActionDescription {
            sig,
            propositions: kept,
        })
    }

    fn check_state_formula(f: &Formula, sig: &ActionSignature) -> Result<(), DescriptionError> {
        f.well_formed(sig.combined())?;
        for atom in f.atoms() {
            if sig.fluents().index_of(&atom.constant).is_none() {
                return Err(DescriptionError::NonFluent {
                    name: atom.constant.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn signature(&self) -> &ActionSignature {
        &self.sig
    }

    pub fn propositions(&self) -> &[Proposition] {
        &self.propositions
    }

    /// `G -> F` for every static law, the constraints that carve the
    /// states out of the fluent interpretations.
    fn static_constraints(&self) -> Vec<Formula> {
        self.propositions
            .iter()
            .filter_map(|p| match p {
                Proposition::Static { head, condition } => {
                    Some(Formula::implies(condition.clone(), head.clone()))
                }
                Proposition::Dynamic { .. } => None,
            })
            .collect()
    }

    /// True iff the fluent interpretation satisfies `G -> F` for every
    /// static law.
    pub fn is_state(&self, i: &Interpretation) -> bool {
        self.static_constraints().iter().all(|f| i.satisfies(f))
    }

    /// All states, canonical order.
    pub fn states(&self) -> Vec<Interpretation> {
        self.states_with_stats().0
    }

    pub fn states_with_stats(&self) -> (Vec<Interpretation>, SearchStats) {
        solver::enumerate_models(self.sig.fluents(), &self.static_constraints(), None)
    }

    /// The formulas caused in the triple `(s, a, s')`: heads of static
    /// laws whose condition holds in `s'`, and of dynamic laws whose
    /// condition holds in `s'` and whose `after` part holds in `s`
    /// combined with `a`. Duplicate-free, proposition order.
    pub fn caused_formulas(
        &self,
        s: &Interpretation,
        a: &Interpretation,
        s_next: &Interpretation,
    ) -> Vec<Formula> {
        let before = self.sig.combine(s, a);
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for p in &self.propositions {
            let fires = match p {
                Proposition::Static { condition, .. } => s_next.satisfies(condition),
                Proposition::Dynamic {
                    condition, after, ..
                } => s_next.satisfies(condition) && before.satisfies(after),
            };
            if fires && seen.insert(p.head()) {
                out.push(p.head().clone());
            }
        }
        out
    }

    /// Uniqueness of `s_next` among all fluent interpretations, with
    /// statehood of the endpoints already established by the caller.
    fn explained_between_states(
        &self,
        s: &Interpretation,
        a: &Interpretation,
        s_next: &Interpretation,
        stats: &mut SearchStats,
    ) -> bool {
        let caused = self.caused_formulas(s, a, s_next);
        if !caused.iter().all(|f| s_next.satisfies(f)) {
            return false;
        }
        // A lone model among all fluent interpretations must be
        // `s_next` itself, since `s_next` satisfies the caused set.
        let (models, search) = solver::enumerate_models(self.sig.fluents(), &caused, Some(2));
        *stats += search;
        models.len() == 1
    }

    /// Classifies the triple `(s, a, s')`. Non-states are reported
    /// rather than treated as candidate transitions.
    pub fn transition_verdict(
        &self,
        s: &Interpretation,
        a: &Interpretation,
        s_next: &Interpretation,
    ) -> TransitionVerdict {
        if !self.is_state(s) {
            return TransitionVerdict::InitialNotAState;
        }
        if !self.is_state(s_next) {
            return TransitionVerdict::ResultingNotAState;
        }
        let mut stats = SearchStats::default();
        if self.explained_between_states(s, a, s_next, &mut stats) {
            TransitionVerdict::Explained
        } else {
            TransitionVerdict::NotExplained
        }
    }

    pub fn is_causally_explained_transition(
        &self,
        s: &Interpretation,
        a: &Interpretation,
        s_next: &Interpretation,
    ) -> bool {
        self.transition_verdict(s, a, s_next).is_explained()
    }

    /// The full transition diagram, enumerating every (state, action,
    /// state) triple in canonical order.
    pub fn transition_diagram(&self) -> TransitionDiagram {
        self.transition_diagram_with_stats().0
    }

    pub fn transition_diagram_with_stats(&self) -> (TransitionDiagram, SearchStats) {
        let (nodes, mut stats) = self.states_with_stats();
        let mut edges = Vec::new();
        for s in &nodes {
            for a in self.sig.actions().interpretations() {
                for s_next in &nodes {
                    if self.explained_between_states(s, &a, s_next, &mut stats) {
                        edges.push(Transition {
                            initial: s.clone(),
                            action: a.clone(),
                            resulting: s_next.clone(),
                        });
                    }
                }
            }
        }
        debug_assert!(edges
            .iter()
            .all(|e| nodes.contains(&e.initial) && nodes.contains(&e.resulting)));
        (TransitionDiagram { nodes, edges }, stats)
    }

    /// Checks the definiteness conditions: no singleton domains
    /// anywhere in the signature, every head an atom or `false`.
    pub fn check_definite(&self) -> Result<(), DefinitenessViolation> {
        for decl in self.sig.combined().constants() {
            if decl.domain().len() == 1 {
                return Err(DefinitenessViolation::SingletonDomain {
                    constant: decl.name().to_string(),
                });
            }
        }
        for (law_index, p) in self.propositions.iter().enumerate() {
            match p.head() {
                Formula::Atom(_) | Formula::Bottom => {}
                _ => return Err(DefinitenessViolation::NonAtomicConsequent { law_index }),
            }
        }
        Ok(())
    }

    pub fn is_definite(&self) -> bool {
        self.check_definite().is_ok()
    }

    /// Translates the description into a causal theory over the
    /// two-moment signature: every constant reappears as `c@0`, every
    /// fluent also as `c@1`. The laws are, in order: `A => A` for each
    /// atom A of the moment-0 signature; `G@0 => F@0` then `G@1 =>
    /// F@1` for the static laws; `H@0 & G@1 => F@1` for the dynamic
    /// laws (a condition that is literally `true` is dropped from the
    /// antecedent). Source order within each group.
    pub fn ct(&self) -> CtTranslation {
        let decls = self
            .sig
            .combined()
            .constants()
            .iter()
            .map(|d| (stamp_name(d.name(), 0), d.domain().to_vec()))
            .chain(
                self.sig
                    .fluents()
                    .constants()
                    .iter()
                    .map(|d| (stamp_name(d.name(), 1), d.domain().to_vec())),
            );
        let sig = Arc::new(Signature::new(decls).expect("stamped names stay distinct"));

        let mut laws = Vec::new();
        for decl in self.sig.combined().constants() {
            for value in decl.domain() {
                let atom = Formula::atom(stamp_name(decl.name(), 0), value.clone());
                laws.push(CausalLaw::new(atom.clone(), atom));
            }
        }
        for n in 0..=1 {
            for p in &self.propositions {
                if let Proposition::Static { head, condition } = p {
                    laws.push(CausalLaw::new(stamp(condition, n), stamp(head, n)));
                }
            }
        }
        for p in &self.propositions {
            if let Proposition::Dynamic {
                head,
                condition,
                after,
            } = p
            {
                let antecedent = if *condition == Formula::Top {
                    stamp(after, 0)
                } else {
                    Formula::and(stamp(after, 0), stamp(condition, 1))
                };
                laws.push(CausalLaw::new(antecedent, stamp(head, 1)));
            }
        }

        let theory = CausalTheory::new(sig, laws).expect("stamped laws fit the stamped signature");
        CtTranslation {
            theory,
            fluents: Arc::clone(self.sig.fluents()),
            actions: Arc::clone(self.sig.actions()),
        }
    }

    /// Shortest path in the transition diagram from a state satisfying
    /// `init` to one satisfying `goal`, at most `max_steps` long.
    /// Breadth-first; ties resolve in canonical state and action
    /// order. `None` when no such path exists within the bound.
    pub fn path_search(
        &self,
        init: &Formula,
        goal: &Formula,
        max_steps: usize,
    ) -> Option<Vec<Transition>> {
        let diagram = self.transition_diagram();
        let index: HashMap<&Interpretation, usize> = diagram
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, s)| (s, k))
            .collect();
        let mut outgoing = vec![Vec::new(); diagram.nodes().len()];
        for (k, e) in diagram.edges().iter().enumerate() {
            outgoing[index[&e.initial]].push(k);
        }

        let mut parent_edge: Vec<Option<usize>> = vec![None; diagram.nodes().len()];
        let mut depth = vec![0usize; diagram.nodes().len()];
        let mut visited = vec![false; diagram.nodes().len()];
        let mut queue = VecDeque::new();
        for (k, s) in diagram.nodes().iter().enumerate() {
            if s.satisfies(init) {
                visited[k] = true;
                queue.push_back(k);
            }
        }
        while let Some(u) = queue.pop_front() {
            if diagram.nodes()[u].satisfies(goal) {
                let mut plan = Vec::new();
                let mut at = u;
                while let Some(e) = parent_edge[at] {
                    plan.push(diagram.edges()[e].clone());
                    at = index[&diagram.edges()[e].initial];
                }
                plan.reverse();
                return Some(plan);
            }
            if depth[u] == max_steps {
                continue;
            }
            for &e in &outgoing[u] {
                let v = index[&diagram.edges()[e].resulting];
                if !visited[v] {
                    visited[v] = true;
                    parent_edge[v] = Some(e);
                    depth[v] = depth[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

fn stamp_name(name: &str, n: usize) -> String {
    format!("{name}@{n}")
}

/// Renames every atom `c=v` in the formula to `c@n=v`.
fn stamp(f: &Formula, n: usize) -> Formula {
    f.map_atoms(&|a| Formula::Atom(Atom::new(stamp_name(&a.constant, n), a.value.clone())))
}

/// A description translated into a causal theory, remembering the
/// partition so interpretations can be composed from and split back
/// into transitions.
#[derive(Debug, Clone)]
pub struct CtTranslation {
    theory: CausalTheory,
    fluents: Arc<Signature>,
    actions: Arc<Signature>,
}

impl CtTranslation {
    pub fn theory(&self) -> &CausalTheory {
        &self.theory
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.theory.signature()
    }

    /// The interpretation of the two-moment signature that reads `s`
    /// at moment 0, `a` at moment 0, and `s_next` at moment 1.
    pub fn compose(
        &self,
        s: &Interpretation,
        a: &Interpretation,
        s_next: &Interpretation,
    ) -> Interpretation {
        debug_assert_eq!(s.signature().len(), self.fluents.len());
        debug_assert_eq!(a.signature().len(), self.actions.len());
        debug_assert_eq!(s_next.signature().len(), self.fluents.len());
        let mut values = Vec::with_capacity(self.signature().len());
        values.extend_from_slice(s.value_indices());
        values.extend_from_slice(a.value_indices());
        values.extend_from_slice(s_next.value_indices());
        Interpretation::new(Arc::clone(self.signature()), values)
    }

    /// Splits an interpretation of the two-moment signature back into
    /// the triple it composes.
    pub fn decompose(
        &self,
        i: &Interpretation,
    ) -> (Interpretation, Interpretation, Interpretation) {
        debug_assert_eq!(i.signature().len(), self.signature().len());
        let nf = self.fluents.len();
        let na = self.actions.len();
        let values = i.value_indices();
        (
            Interpretation::new(Arc::clone(&self.fluents), values[..nf].to_vec()),
            Interpretation::new(Arc::clone(&self.actions), values[nf..nf + na].to_vec()),
            Interpretation::new(Arc::clone(&self.fluents), values[nf + na..].to_vec()),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvpl::FF;

    const BOXES: [&str; 2] = ["B1", "B2"];
    const LOCATIONS: [&str; 3] = ["L1", "L2", "L3"];

    fn boxes_signature() -> ActionSignature {
        let fluents = Signature::new(BOXES.map(|b| (format!("Loc({b})"), vec!["L1", "L2", "L3"])))
            .unwrap();
        let actions = Signature::new(
            BOXES
                .iter()
                .map(|b| (format!("Move({b})"), vec![FF, TT]))
                .chain(
                    BOXES
                        .iter()
                        .map(|b| (format!("Destination({b})"), vec!["L1", "L2", "L3", "None"])),
                ),
        )
        .unwrap();
        ActionSignature::new(Arc::new(fluents), Arc::new(actions)).unwrap()
    }

    fn loc(b: &str, l: &str) -> Formula {
        Formula::atom(format!("Loc({b})"), l)
    }

    /// The moving-boxes description: two boxes, three locations.
    fn boxes() -> ActionDescription {
        let sig = boxes_signature();
        let mut props = Vec::new();
        for b in BOXES {
            props.push(Proposition::Dynamic {
                head: Formula::Bottom,
                condition: Formula::Top,
                after: Formula::equiv(
                    Formula::atom(format!("Move({b})"), TT),
                    Formula::atom(format!("Destination({b})"), "None"),
                ),
            });
        }
        for b in BOXES {
            for l in LOCATIONS {
                props.push(
                    Abbreviation::Causes {
                        actions: vec![format!("Move({b})")],
                        head: loc(b, l),
                        condition: Formula::atom(format!("Destination({b})"), l),
                    }
                    .desugar(&sig)
                    .unwrap(),
                );
            }
        }
        for b in BOXES {
            for l in LOCATIONS {
                props.push(
                    Abbreviation::Nonexecutable {
                        actions: vec![format!("Move({b})")],
                        condition: Formula::and(
                            loc(b, l),
                            Formula::atom(format!("Destination({b})"), l),
                        ),
                    }
                    .desugar(&sig)
                    .unwrap(),
                );
            }
        }
        for b in BOXES {
            for l in LOCATIONS {
                props.push(Abbreviation::Inertial(loc(b, l)).desugar(&sig).unwrap());
            }
        }
        for b in BOXES {
            for b2 in BOXES {
                if b != b2 {
                    for l in LOCATIONS {
                        props.push(
                            Abbreviation::Never(Formula::and(loc(b, l), loc(b2, l)))
                                .desugar(&sig)
                                .unwrap(),
                        );
                    }
                }
            }
        }
        ActionDescription::new(sig, props).unwrap()
    }

    fn fluent_interp(d: &ActionDescription, pairs: &[(&str, &str)]) -> Interpretation {
        Interpretation::from_assignment(d.signature().fluents(), pairs).unwrap()
    }

    fn action_interp(d: &ActionDescription, pairs: &[(&str, &str)]) -> Interpretation {
        Interpretation::from_assignment(d.signature().actions(), pairs).unwrap()
    }

    fn idle(d: &ActionDescription) -> Interpretation {
        action_interp(
            d,
            &[
                ("Move(B1)", "ff"),
                ("Move(B2)", "ff"),
                ("Destination(B1)", "None"),
                ("Destination(B2)", "None"),
            ],
        )
    }

    #[test]
    fn desugaring_matches_the_longhand_forms() {
        let sig = boxes_signature();
        assert_eq!(
            Abbreviation::Inertial(loc("B1", "L1")).desugar(&sig).unwrap(),
            Proposition::Dynamic {
                head: loc("B1", "L1"),
                condition: loc("B1", "L1"),
                after: loc("B1", "L1"),
            }
        );
        let crowd = Formula::and(loc("B1", "L1"), loc("B2", "L1"));
        assert_eq!(
            Abbreviation::Never(crowd.clone()).desugar(&sig).unwrap(),
            Proposition::Static {
                head: Formula::Bottom,
                condition: crowd,
            }
        );
        assert_eq!(
            Abbreviation::Causes {
                actions: vec!["Move(B1)".into()],
                head: loc("B1", "L2"),
                condition: Formula::atom("Destination(B1)", "L2"),
            }
            .desugar(&sig)
            .unwrap(),
            Proposition::Dynamic {
                head: loc("B1", "L2"),
                condition: Formula::Top,
                after: Formula::and(
                    Formula::atom("Move(B1)", TT),
                    Formula::atom("Destination(B1)", "L2"),
                ),
            }
        );
        assert_eq!(
            Abbreviation::Nonexecutable {
                actions: vec!["Move(B1)".into(), "Move(B2)".into()],
                condition: Formula::Top,
            }
            .desugar(&sig)
            .unwrap(),
            Proposition::Dynamic {
                head: Formula::Bottom,
                condition: Formula::Top,
                after: Formula::and(
                    Formula::atom("Move(B1)", TT),
                    Formula::atom("Move(B2)", TT),
                ),
            }
        );
    }

    #[test]
    fn desugaring_rejects_non_boolean_and_unknown_actions() {
        let sig = boxes_signature();
        let bad = Abbreviation::Causes {
            actions: vec!["Destination(B1)".into()],
            head: loc("B1", "L1"),
            condition: Formula::Top,
        };
        assert_eq!(
            bad.desugar(&sig).unwrap_err(),
            DescriptionError::NotABooleanAction {
                name: "Destination(B1)".into()
            }
        );
        let unknown = Abbreviation::Nonexecutable {
            actions: vec!["Jump".into()],
            condition: Formula::Top,
        };
        assert_eq!(
            unknown.desugar(&sig).unwrap_err(),
            DescriptionError::UnknownAction { name: "Jump".into() }
        );
    }

    #[test]
    fn construction_rejects_actions_in_state_formulas() {
        let sig = boxes_signature();
        let bad = ActionDescription::new(
            sig,
            vec![Proposition::Static {
                head: Formula::atom("Move(B1)", TT),
                condition: Formula::Top,
            }],
        );
        assert_eq!(
            bad.unwrap_err(),
            DescriptionError::NonFluent {
                name: "Move(B1)".into()
            }
        );
    }

    #[test]
    fn signature_rejects_fluent_action_clashes() {
        let fluents = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let actions = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        assert_eq!(
            ActionSignature::new(fluents, actions).unwrap_err(),
            DescriptionError::FluentActionClash { name: "p".into() }
        );
    }

    #[test]
    fn boxes_has_twenty_six_propositions_and_six_states() {
        let d = boxes();
        assert_eq!(d.propositions().len(), 26);
        let states = d.states();
        assert_eq!(states.len(), 6);
        let shown: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            shown,
            [
                "Loc(B1)=L1 Loc(B2)=L2",
                "Loc(B1)=L1 Loc(B2)=L3",
                "Loc(B1)=L2 Loc(B2)=L1",
                "Loc(B1)=L2 Loc(B2)=L3",
                "Loc(B1)=L3 Loc(B2)=L1",
                "Loc(B1)=L3 Loc(B2)=L2",
            ]
        );
    }

    #[test]
    fn state_filter_follows_the_static_laws() {
        let sig = boxes_signature();
        let unconstrained = ActionDescription::new(sig.clone(), vec![]).unwrap();
        assert_eq!(unconstrained.states().len(), 9);

        let impossible = ActionDescription::new(
            sig,
            vec![Proposition::Static {
                head: Formula::Bottom,
                condition: Formula::Top,
            }],
        )
        .unwrap();
        assert!(impossible.states().is_empty());
    }

    #[test]
    fn caused_formulas_for_the_idle_action_are_the_inertia_heads() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let caused = d.caused_formulas(&s, &idle(&d), &s);
        assert_eq!(caused, vec![loc("B1", "L1"), loc("B2", "L2")]);
    }

    #[test]
    fn caused_formulas_for_a_single_move() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let a = action_interp(
            &d,
            &[
                ("Move(B1)", "tt"),
                ("Move(B2)", "ff"),
                ("Destination(B1)", "L3"),
                ("Destination(B2)", "None"),
            ],
        );
        let s_next = fluent_interp(&d, &[("Loc(B1)", "L3"), ("Loc(B2)", "L2")]);
        let caused = d.caused_formulas(&s, &a, &s_next);
        assert_eq!(caused, vec![loc("B1", "L3"), loc("B2", "L2")]);
    }

    #[test]
    fn a_firing_nonexecutable_law_causes_bottom() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let a = action_interp(
            &d,
            &[
                ("Move(B1)", "tt"),
                ("Move(B2)", "ff"),
                ("Destination(B1)", "L1"),
                ("Destination(B2)", "None"),
            ],
        );
        let caused = d.caused_formulas(&s, &a, &s);
        assert!(caused.contains(&Formula::Bottom));
    }

    #[test]
    fn idle_transition_is_explained() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        assert_eq!(
            d.transition_verdict(&s, &idle(&d), &s),
            TransitionVerdict::Explained
        );
    }

    #[test]
    fn moving_onto_an_occupied_location_explains_nothing() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let a = action_interp(
            &d,
            &[
                ("Move(B1)", "tt"),
                ("Move(B2)", "ff"),
                ("Destination(B1)", "L2"),
                ("Destination(B2)", "None"),
            ],
        );
        for s_next in d.signature().fluents().interpretations() {
            assert!(!d.transition_verdict(&s, &a, &s_next).is_explained());
        }
    }

    #[test]
    fn the_swap_transition_is_explained() {
        let d = boxes();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let a = action_interp(
            &d,
            &[
                ("Move(B1)", "tt"),
                ("Move(B2)", "tt"),
                ("Destination(B1)", "L2"),
                ("Destination(B2)", "L1"),
            ],
        );
        let s_next = fluent_interp(&d, &[("Loc(B1)", "L2"), ("Loc(B2)", "L1")]);
        assert_eq!(
            d.transition_verdict(&s, &a, &s_next),
            TransitionVerdict::Explained
        );
    }

    #[test]
    fn non_states_are_reported_as_such() {
        let d = boxes();
        let crowded = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L1")]);
        let fine = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        assert_eq!(
            d.transition_verdict(&crowded, &idle(&d), &fine),
            TransitionVerdict::InitialNotAState
        );
        assert_eq!(
            d.transition_verdict(&fine, &idle(&d), &crowded),
            TransitionVerdict::ResultingNotAState
        );
    }

    #[test]
    fn boxes_diagram_has_one_action_per_ordered_state_pair() {
        let d = boxes();
        let diagram = d.transition_diagram();
        assert_eq!(diagram.nodes().len(), 6);
        assert_eq!(diagram.edges().len(), 36);
        let mut pairs = HashSet::new();
        for e in diagram.edges() {
            assert!(pairs.insert((e.initial.clone(), e.resulting.clone())));
        }
        assert_eq!(pairs.len(), 36);
    }

    #[test]
    fn causeless_descriptions_have_no_edges() {
        let fluents = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let actions = Arc::new(Signature::new([("a", vec![FF, TT])]).unwrap());
        let d = ActionDescription::new(
            ActionSignature::new(fluents, actions).unwrap(),
            vec![],
        )
        .unwrap();
        let diagram = d.transition_diagram();
        assert_eq!(diagram.nodes().len(), 2);
        assert!(diagram.edges().is_empty());
    }

    #[test]
    fn inertia_alone_freezes_the_fluent_under_any_action() {
        let fluents = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let actions = Arc::new(Signature::new([("a", vec![FF, TT])]).unwrap());
        let sig = ActionSignature::new(fluents, actions).unwrap();
        let props = vec![
            Abbreviation::Inertial(Formula::atom("p", TT)).desugar(&sig).unwrap(),
            Abbreviation::Inertial(Formula::atom("p", FF)).desugar(&sig).unwrap(),
        ];
        let d = ActionDescription::new(sig, props).unwrap();
        let diagram = d.transition_diagram();
        assert_eq!(diagram.nodes().len(), 2);
        assert_eq!(diagram.edges().len(), 4);
        assert!(diagram.edges().iter().all(|e| e.initial == e.resulting));
    }

    #[test]
    fn definiteness_of_descriptions() {
        assert!(boxes().is_definite());

        let fluents =
            Arc::new(Signature::new([("p", vec![FF, TT]), ("q", vec![FF, TT])]).unwrap());
        let actions = Arc::new(Signature::new([("a", vec![FF, TT])]).unwrap());
        let sig = ActionSignature::new(fluents, actions).unwrap();
        let d = ActionDescription::new(
            sig,
            vec![Proposition::Static {
                head: Formula::or(Formula::atom("p", TT), Formula::atom("q", TT)),
                condition: Formula::Top,
            }],
        )
        .unwrap();
        assert_eq!(
            d.check_definite().unwrap_err(),
            DefinitenessViolation::NonAtomicConsequent { law_index: 0 }
        );

        let narrow = ActionSignature::new(
            Arc::new(Signature::new([("f", vec!["only"])]).unwrap()),
            Arc::new(Signature::new([("a", vec![FF, TT])]).unwrap()),
        )
        .unwrap();
        let d2 = ActionDescription::new(narrow, vec![]).unwrap();
        assert_eq!(
            d2.check_definite().unwrap_err(),
            DefinitenessViolation::SingletonDomain {
                constant: "f".into()
            }
        );
    }

    #[test]
    fn ct_of_a_single_static_law() {
        let fluents =
            Arc::new(Signature::new([("p", vec![FF, TT]), ("q", vec![FF, TT])]).unwrap());
        let actions = Arc::new(Signature::new(Vec::<(String, Vec<String>)>::new()).unwrap());
        let sig = ActionSignature::new(fluents, actions).unwrap();
        let d = ActionDescription::new(
            sig,
            vec![Proposition::Static {
                head: Formula::atom("p", TT),
                condition: Formula::atom("q", TT),
            }],
        )
        .unwrap();
        let ct = d.ct();
        let shown: Vec<String> = ct.theory().laws().iter().map(|l| l.to_string()).collect();
        assert_eq!(
            shown,
            [
                "p@0=ff => p@0=ff",
                "p@0=tt => p@0=tt",
                "q@0=ff => q@0=ff",
                "q@0=tt => q@0=tt",
                "q@0=tt => p@0=tt",
                "q@1=tt => p@1=tt",
            ]
        );
        let names: Vec<&str> = ct
            .signature()
            .constants()
            .iter()
            .map(|c| c.name())
            .collect();
        assert_eq!(names, ["p@0", "q@0", "p@1", "q@1"]);
    }

    #[test]
    fn ct_drops_a_literal_top_condition_from_dynamic_antecedents() {
        let d = boxes();
        let ct = d.ct();
        let shown: Vec<String> = ct.theory().laws().iter().map(|l| l.to_string()).collect();
        assert_eq!(ct.theory().laws().len(), 50);
        assert!(shown
            .contains(&"Move(B1)@0=tt <-> Destination(B1)@0=None => false".to_string()));
        assert!(shown
            .contains(&"Move(B1)@0=tt & Destination(B1)@0=L2 => Loc(B1)@1=L2".to_string()));
        assert!(shown
            .contains(&"Loc(B1)@0=L1 & Loc(B1)@1=L1 => Loc(B1)@1=L1".to_string()));
        assert!(shown.contains(&"Loc(B1)@0=L1 & Loc(B2)@0=L1 => false".to_string()));
        assert!(shown.contains(&"Loc(B1)@1=L1 & Loc(B2)@1=L1 => false".to_string()));
    }

    #[test]
    fn definite_descriptions_translate_to_definite_theories() {
        let d = boxes();
        assert!(d.is_definite());
        assert!(d.ct().theory().is_definite());
    }

    #[test]
    fn composed_transitions_are_explained_exactly_when_the_triple_is() {
        let d = boxes();
        let ct = d.ct();
        let s = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let swap = action_interp(
            &d,
            &[
                ("Move(B1)", "tt"),
                ("Move(B2)", "tt"),
                ("Destination(B1)", "L2"),
                ("Destination(B2)", "L1"),
            ],
        );
        let s_next = fluent_interp(&d, &[("Loc(B1)", "L2"), ("Loc(B2)", "L1")]);
        let composed = ct.compose(&s, &swap, &s_next);
        assert!(ct.theory().is_causally_explained(&composed));
        let (back_s, back_a, back_next) = ct.decompose(&composed);
        assert_eq!(back_s, s);
        assert_eq!(back_a, swap);
        assert_eq!(back_next, s_next);

        let stay = fluent_interp(&d, &[("Loc(B1)", "L1"), ("Loc(B2)", "L2")]);
        let bad = ct.compose(&s, &swap, &stay);
        assert!(!ct.theory().is_causally_explained(&bad));
    }

    #[test]
    fn path_search_finds_the_one_step_swap() {
        let d = boxes();
        let init = Formula::and(loc("B1", "L1"), loc("B2", "L2"));
        let goal = Formula::and(loc("B1", "L2"), loc("B2", "L1"));
        let plan = d.path_search(&init, &goal, 5).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(
            plan[0].action.to_string(),
            "Move(B1)=tt Move(B2)=tt Destination(B1)=L2 Destination(B2)=L1"
        );

        assert_eq!(d.path_search(&init, &init, 5).unwrap(), vec![]);
        let unsat = Formula::and(loc("B1", "L1"), loc("B1", "L2"));
        assert!(d.path_search(&init, &unsat, 5).is_none());
        assert!(d.path_search(&init, &goal, 0).is_none());
    }
}
