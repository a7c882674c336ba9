//! Multi-valued causal theories and the action language C+.
//!
//! The crate is organized bottom-up: `mvpl` defines multi-valued
//! propositional logic (signatures, formulas, interpretations,
//! satisfaction), `solver` enumerates models, `causal` adds causal
//! theories with causally explained interpretations and literal
//! completion, `cplus` builds action descriptions and their transition
//! systems on top, `adl` maps ADL-style action descriptions into C+,
//! `elim` rewrites multi-valued constants into families of Boolean
//! ones, and `cli` hosts the surface language and query driver used by
//! the `ccplus` binary.

pub mod adl;
pub mod causal;
pub mod cli;
pub mod cplus;
pub mod elim;
pub mod mvpl;
pub mod solver;

pub use adl::{AdlDescription, AdlError, ConsistencyViolation, Update};
pub use causal::{CausalLaw, CausalTheory, Completion, DefinitenessViolation};
pub use cli::{CliError, ExpandedUnit, Invocation, OutputFormat};
pub use cplus::{
    Abbreviation, ActionDescription, ActionSignature, CtTranslation, Proposition, State,
    Transition, TransitionDiagram, TransitionVerdict,
};
pub use elim::{ElimError, Elimination};
pub use mvpl::{Atom, ExtFormula, Formula, Interpretation, Signature, Term};
pub use solver::SearchStats;
