//! ADL action descriptions and their reduction to C+.
//!
//! An ADL description gives every action a precondition and, per
//! action and fluent, an update condition with one value parameter.
//! All fluents share a single domain and all actions are Boolean. A
//! consistent description never lets two updates of one fluent fire in
//! the same state, which makes the result of executing an action a
//! partial function on fluent interpretations. The whole construction
//! compiles away into C+ propositions: inertia for every fluent value,
//! nonexecutability outside the precondition, and one direct effect
//! per update instance.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::cplus::{Abbreviation, ActionDescription, ActionSignature};
use crate::mvpl::{ExtFormula, Formula, GroundError, Interpretation, WellFormedError};
use crate::solver;

/// An update condition `Update(x)`: the body may use the parameter as
/// a stand-in for the value the fluent is updated to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub parameter: String,
    pub body: ExtFormula,
}

impl Update {
    pub fn new(parameter: impl Into<String>, body: ExtFormula) -> Self {
        Update {
            parameter: parameter.into(),
            body,
        }
    }
}

/// Two updates of one fluent that can fire in the same state.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "action `{action}`: updates of `{fluent}` to `{v1}` and `{v2}` can fire together (for instance when {witness})"
)]
pub struct ConsistencyViolation {
    pub action: String,
    pub fluent: String,
    pub v1: String,
    pub v2: String,
    pub witness: Interpretation,
}

/// Problems building or running an ADL description.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdlError {
    #[error("action `{name}` is not Boolean")]
    NonBooleanAction { name: String },
    #[error("fluent `{name}` does not share the domain of the other fluents")]
    MixedDomains { name: String },
    #[error("unknown action `{name}`")]
    UnknownAction { name: String },
    #[error("unknown fluent `{name}`")]
    UnknownFluent { name: String },
    #[error("action `{action}` has two preconditions")]
    DuplicatePrecond { action: String },
    #[error("action `{action}` has two update conditions for fluent `{fluent}`")]
    DuplicateUpdate { action: String, fluent: String },
    #[error("precondition of `{action}` has free variable `{variable}`")]
    OpenPrecond { action: String, variable: String },
    #[error("update of `{fluent}` under `{action}` has stray free variable `{variable}`")]
    StrayVariable {
        action: String,
        fluent: String,
        variable: String,
    },
    #[error(transparent)]
    Grounding(#[from] GroundError),
    #[error(transparent)]
    IllFormed(#[from] WellFormedError),
    #[error(transparent)]
    Inconsistent(#[from] ConsistencyViolation),
}

/// An ADL action description over a partitioned signature.
///
/// Construction grounds every precondition and every update instance
/// once and validates them against the fluent signature. Actions
/// without a stated precondition can always execute; a fluent without
/// a stated update condition under an action is never directly updated
/// by it.
#[derive(Debug, Clone)]
pub struct AdlDescription {
    sig: ActionSignature,
    dom: Vec<String>,
    preconds: Vec<ExtFormula>,
    updates: Vec<Vec<Update>>,
    preconds_ground: Vec<Formula>,
    /// Ground instances, indexed action, fluent, domain value.
    updates_ground: Vec<Vec<Vec<Formula>>>,
}

impl AdlDescription {
    pub fn new(
        sig: ActionSignature,
        preconds: impl IntoIterator<Item = (String, ExtFormula)>,
        updates: impl IntoIterator<Item = (String, String, Update)>,
    ) -> Result<Self, AdlError> {
        for decl in sig.actions().constants() {
            if !decl.is_boolean() {
                return Err(AdlError::NonBooleanAction {
                    name: decl.name().to_string(),
                });
            }
        }
        let dom: Vec<String> = match sig.fluents().constants().first() {
            Some(first) => first.domain().to_vec(),
            None => Vec::new(),
        };
        for decl in sig.fluents().constants() {
            if decl.domain() != dom {
                return Err(AdlError::MixedDomains {
                    name: decl.name().to_string(),
                });
            }
        }

        let action_count = sig.actions().len();
        let fluent_count = sig.fluents().len();
        let mut precond_table: Vec<ExtFormula> = vec![ExtFormula::Top; action_count];
        let mut seen_preconds = HashSet::new();
        for (action, f) in preconds {
            let ai = sig
                .actions()
                .index_of(&action)
                .ok_or_else(|| AdlError::UnknownAction {
                    name: action.clone(),
                })?;
            if !seen_preconds.insert(ai) {
                return Err(AdlError::DuplicatePrecond { action });
            }
            precond_table[ai] = f;
        }
        let default_update = Update::new("x", ExtFormula::Bottom);
        let mut update_table: Vec<Vec<Update>> =
            vec![vec![default_update; fluent_count]; action_count];
        let mut seen_updates = HashSet::new();
        for (action, fluent, u) in updates {
            let ai = sig
                .actions()
                .index_of(&action)
                .ok_or_else(|| AdlError::UnknownAction {
                    name: action.clone(),
                })?;
            let ci = sig
                .fluents()
                .index_of(&fluent)
                .ok_or_else(|| AdlError::UnknownFluent {
                    name: fluent.clone(),
                })?;
            if !seen_updates.insert((ai, ci)) {
                return Err(AdlError::DuplicateUpdate { action, fluent });
            }
            update_table[ai][ci] = u;
        }

        let mut preconds_ground = Vec::with_capacity(action_count);
        for (ai, f) in precond_table.iter().enumerate() {
            if let Some(variable) = f.free_vars().first() {
                return Err(AdlError::OpenPrecond {
                    action: sig.actions().decl(ai).name().to_string(),
                    variable: variable.clone(),
                });
            }
            let ground = f.ground(&dom)?;
            ground.well_formed(sig.fluents())?;
            preconds_ground.push(ground);
        }
        let mut updates_ground = Vec::with_capacity(action_count);
        for (ai, row) in update_table.iter().enumerate() {
            let mut per_fluent = Vec::with_capacity(fluent_count);
            for (ci, u) in row.iter().enumerate() {
                if let Some(variable) =
                    u.body.free_vars().iter().find(|v| **v != u.parameter)
                {
                    return Err(AdlError::StrayVariable {
                        action: sig.actions().decl(ai).name().to_string(),
                        fluent: sig.fluents().decl(ci).name().to_string(),
                        variable: variable.clone(),
                    });
                }
                let mut per_value = Vec::with_capacity(dom.len());
                for v in &dom {
                    let ground = u.body.ground_binding(&dom, &u.parameter, v)?;
                    ground.well_formed(sig.fluents())?;
                    per_value.push(ground);
                }
                per_fluent.push(per_value);
            }
            updates_ground.push(per_fluent);
        }

        Ok(AdlDescription {
            sig,
            dom,
            preconds: precond_table,
            updates: update_table,
            preconds_ground,
            updates_ground,
        })
    }

    pub fn signature(&self) -> &ActionSignature {
        &self.sig
    }

    /// The domain shared by every fluent.
    pub fn shared_domain(&self) -> &[String] {
        &self.dom
    }

    pub fn precond_of(&self, action: &str) -> Option<&ExtFormula> {
        self.sig
            .actions()
            .index_of(action)
            .map(|ai| &self.preconds[ai])
    }

    pub fn update_of(&self, action: &str, fluent: &str) -> Option<&Update> {
        let ai = self.sig.actions().index_of(action)?;
        let ci = self.sig.fluents().index_of(fluent)?;
        Some(&self.updates[ai][ci])
    }

    /// Checks that no precondition admits a state where two updates of
    /// the same fluent fire, reporting the first counterexample in
    /// action, fluent, value-pair order.
    pub fn check_consistent(&self) -> Result<(), ConsistencyViolation> {
        for (ai, a_decl) in self.sig.actions().constants().iter().enumerate() {
            for (ci, c_decl) in self.sig.fluents().constants().iter().enumerate() {
                for v1 in 0..self.dom.len() {
                    for v2 in v1 + 1..self.dom.len() {
                        let premises = [
                            self.preconds_ground[ai].clone(),
                            self.updates_ground[ai][ci][v1].clone(),
                            self.updates_ground[ai][ci][v2].clone(),
                        ];
                        if let Some(witness) = solver::find_model(self.sig.fluents(), &premises)
                        {
                            return Err(ConsistencyViolation {
                                action: a_decl.name().to_string(),
                                fluent: c_decl.name().to_string(),
                                v1: self.dom[v1].clone(),
                                v2: self.dom[v2].clone(),
                                witness,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_consistent(&self) -> bool {
        self.check_consistent().is_ok()
    }

    /// The result of executing `action` in `s`: `None` when the
    /// precondition fails, otherwise the interpretation that updates
    /// every fluent with a firing update condition and keeps the rest.
    /// Refuses to run on an inconsistent description, since the case
    /// split is only exhaustive and exclusive under consistency.
    pub fn result(
        &self,
        s: &Interpretation,
        action: &str,
    ) -> Result<Option<Interpretation>, AdlError> {
        let ai = self
            .sig
            .actions()
            .index_of(action)
            .ok_or_else(|| AdlError::UnknownAction {
                name: action.to_string(),
            })?;
        self.check_consistent()?;
        if !s.satisfies(&self.preconds_ground[ai]) {
            return Ok(None);
        }
        let mut values = Vec::with_capacity(self.sig.fluents().len());
        for ci in 0..self.sig.fluents().len() {
            let mut fired = (0..self.dom.len())
                .filter(|&vi| s.satisfies(&self.updates_ground[ai][ci][vi]));
            match (fired.next(), fired.next()) {
                (None, _) => values.push(s.value_index(ci)),
                (Some(vi), None) => values.push(vi),
                (Some(_), Some(_)) => {
                    unreachable!("consistency rules out two updates firing in one state")
                }
            }
        }
        Ok(Some(Interpretation::new(
            Arc::clone(self.sig.fluents()),
            values,
        )))
    }

    /// The C+ counterpart: `inertial c=v` for every fluent and value,
    /// `nonexecutable a if -Precond` for every action, and `a causes
    /// c=v if Update(v)` for every action, fluent and value.
    pub fn to_cplus(&self) -> ActionDescription {
        let mut props = Vec::new();
        for decl in self.sig.fluents().constants() {
            for v in decl.domain() {
                let abbrev = Abbreviation::Inertial(Formula::atom(decl.name(), v.clone()));
                props.push(abbrev.desugar(&self.sig).expect("fluent atoms desugar"));
            }
        }
        for (ai, decl) in self.sig.actions().constants().iter().enumerate() {
            let abbrev = Abbreviation::Nonexecutable {
                actions: vec![decl.name().to_string()],
                condition: Formula::not(self.preconds_ground[ai].clone()),
            };
            props.push(abbrev.desugar(&self.sig).expect("actions are Boolean"));
        }
        for (ai, a_decl) in self.sig.actions().constants().iter().enumerate() {
            for (ci, c_decl) in self.sig.fluents().constants().iter().enumerate() {
                for (vi, v) in self.dom.iter().enumerate() {
                    let abbrev = Abbreviation::Causes {
                        actions: vec![a_decl.name().to_string()],
                        head: Formula::atom(c_decl.name(), v.clone()),
                        condition: self.updates_ground[ai][ci][vi].clone(),
                    };
                    props.push(abbrev.desugar(&self.sig).expect("actions are Boolean"));
                }
            }
        }
        ActionDescription::new(self.sig.clone(), props)
            .expect("grounded state formulas fit the fluent signature")
    }

    /// The action that maps `action` to `tt` and every other action
    /// symbol to `ff`.
    pub fn action_interpretation(&self, action: &str) -> Option<Interpretation> {
        let ai = self.sig.actions().index_of(action)?;
        let mut values = vec![0; self.sig.actions().len()];
        values[ai] = 1;
        Some(Interpretation::new(
            Arc::clone(self.sig.actions()),
            values,
        ))
    }
}

impl fmt::Display for AdlDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (ai, decl) in self.sig.actions().constants().iter().enumerate() {
            writeln!(f, "precond {}: {}", decl.name(), self.preconds[ai])?;
            for (ci, c_decl) in self.sig.fluents().constants().iter().enumerate() {
                let u = &self.updates[ai][ci];
                writeln!(
                    f,
                    "update {} {}({}): {}",
                    decl.name(),
                    c_decl.name(),
                    u.parameter,
                    u.body
                )?;
            }
        }
        Ok(())
    }
}
