//! Replacing a multi-valued constant with Boolean constants.
//!
//! A constant c with domain {v1, ..., vk} becomes the Boolean family
//! c!v1, ..., c!vk, occupying c's position in the signature. Formulas
//! rename atom by atom (c=v becomes c!v=tt), and every interpretation
//! of the old signature corresponds to the interpretation of the new
//! one that sets exactly the matching family member to tt; satisfaction
//! is preserved across this correspondence. On top of renaming, each
//! construction adds bookkeeping laws that pin the family to the
//! corresponding interpretations: a plain formula set gains the
//! exclusion formula itself, causal theories gain either the one
//! general law or the definiteness-preserving law family, and action
//! descriptions get fluent and action variants of both.

use std::sync::Arc;

use thiserror::Error;

use crate::causal::{CausalLaw, CausalTheory};
use crate::cplus::{ActionDescription, ActionSignature, Proposition};
use crate::mvpl::{Formula, Interpretation, Signature, FF, TT};

/// Problems setting up an elimination.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElimError {
    #[error("unknown constant `{name}`")]
    UnknownConstant { name: String },
    #[error("`{name}` is not a fluent constant")]
    NotAFluent { name: String },
    #[error("`{name}` is not an action constant")]
    NotAnAction { name: String },
    #[error("replacement name `{name}` is already declared")]
    NameCollision { name: String },
    #[error("the definite method needs at least two domain values for `{constant}`")]
    SingletonDomain { constant: String },
    #[error("the head of law {law_index} mentions `{constant}` but is not an atom")]
    NonAtomicHead { law_index: usize, constant: String },
}

/// One constant's replacement by its Boolean family: the two
/// signatures and the correspondence between their interpretations.
#[derive(Debug, Clone)]
pub struct Elimination {
    source: Arc<Signature>,
    target: Arc<Signature>,
    constant: String,
    index: usize,
    family: Vec<String>,
}

impl Elimination {
    /// Plans the elimination of `constant` from `source`. The family
    /// member for value v is named `constant!v`; those names must be
    /// free in the source signature.
    pub fn new(source: &Arc<Signature>, constant: &str) -> Result<Self, ElimError> {
        let index = source
            .index_of(constant)
            .ok_or_else(|| ElimError::UnknownConstant {
                name: constant.to_string(),
            })?;
        let family: Vec<String> = source
            .decl(index)
            .domain()
            .iter()
            .map(|v| format!("{constant}!{v}"))
            .collect();
        for name in &family {
            if source.index_of(name).is_some() {
                return Err(ElimError::NameCollision { name: name.clone() });
            }
        }
        let decls = source
            .constants()
            .iter()
            .enumerate()
            .flat_map(|(k, d)| -> Vec<(String, Vec<String>)> {
                if k == index {
                    family
                        .iter()
                        .map(|name| (name.clone(), vec![FF.to_string(), TT.to_string()]))
                        .collect()
                } else {
                    vec![(d.name().to_string(), d.domain().to_vec())]
                }
            });
        let target =
            Arc::new(Signature::new(decls).expect("family names checked fresh and distinct"));
        Ok(Elimination {
            source: Arc::clone(source),
            target,
            constant: constant.to_string(),
            index,
            family,
        })
    }

    pub fn source(&self) -> &Arc<Signature> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Signature> {
        &self.target
    }

    pub fn constant(&self) -> &str {
        &self.constant
    }

    /// The family names, one per domain value, in domain order.
    pub fn family(&self) -> &[String] {
        &self.family
    }

    /// The exclusion formula: some family member holds, and no two
    /// hold together. Its models are exactly the target
    /// interpretations that correspond to a source interpretation. The
    /// pair conjuncts run in domain order with the earlier value
    /// first; a one-value family has no pairs and reduces to its
    /// single disjunct.
    pub fn elim_formula(&self) -> Formula {
        let some = Formula::disj(
            self.family
                .iter()
                .map(|name| Formula::atom(name.clone(), TT)),
        );
        let mut parts = vec![some];
        for i in 0..self.family.len() {
            for j in i + 1..self.family.len() {
                parts.push(Formula::or(
                    Formula::atom(self.family[i].clone(), FF),
                    Formula::atom(self.family[j].clone(), FF),
                ));
            }
        }
        Formula::conj(parts)
    }

    /// Replaces every atom `c=v` with `c!v=tt`, leaving other atoms
    /// alone. The formula must fit the source signature.
    pub fn rename_formula(&self, f: &Formula) -> Formula {
        let decl = self.source.decl(self.index);
        f.map_atoms(&|a| {
            if a.constant == self.constant {
                let vi = decl
                    .value_index(&a.value)
                    .expect("renamed formulas fit the source signature");
                Formula::atom(self.family[vi].clone(), TT)
            } else {
                Formula::Atom(a.clone())
            }
        })
    }

    /// The target interpretation corresponding to `i`: equal off the
    /// family, and true on exactly the member matching `i`'s value.
    pub fn correspond(&self, i: &Interpretation) -> Interpretation {
        debug_assert_eq!(i.signature().len(), self.source.len());
        let mut values = Vec::with_capacity(self.target.len());
        for (k, &v) in i.value_indices().iter().enumerate() {
            if k == self.index {
                for vi in 0..self.family.len() {
                    values.push(usize::from(vi == v));
                }
            } else {
                values.push(v);
            }
        }
        Interpretation::new(Arc::clone(&self.target), values)
    }

    /// The inverse of [`Self::correspond`]; `None` when the family
    /// does not single out exactly one value.
    pub fn uncorrespond(&self, i: &Interpretation) -> Option<Interpretation> {
        debug_assert_eq!(i.signature().len(), self.target.len());
        let vals = i.value_indices();
        let fam = &vals[self.index..self.index + self.family.len()];
        let mut hot = fam.iter().enumerate().filter(|&(_, &b)| b == 1);
        let (v, _) = hot.next()?;
        if hot.next().is_some() {
            return None;
        }
        let mut values = Vec::with_capacity(self.source.len());
        values.extend_from_slice(&vals[..self.index]);
        values.push(v);
        values.extend_from_slice(&vals[self.index + self.family.len()..]);
        Some(Interpretation::new(Arc::clone(&self.source), values))
    }
}

/// Renames `constant` away in every formula and appends the exclusion
/// formula: the models of the output are exactly the corresponding
/// images of the models of the input.
pub fn eliminate_from_formulas(
    sig: &Arc<Signature>,
    formulas: &[Formula],
    constant: &str,
) -> Result<(Elimination, Vec<Formula>), ElimError> {
    let elim = Elimination::new(sig, constant)?;
    let mut out: Vec<Formula> = formulas.iter().map(|f| elim.rename_formula(f)).collect();
    out.push(elim.elim_formula());
    Ok((elim, out))
}

/// The general elimination for causal theories: rename every law and
/// add the single law making the exclusion formula caused. Applies to
/// any theory, but the added law's head is not an atom, so the output
/// is never definite.
pub fn eliminate_causal_general(
    t: &CausalTheory,
    constant: &str,
) -> Result<(Elimination, CausalTheory), ElimError> {
    let elim = Elimination::new(t.signature(), constant)?;
    let mut laws = rename_laws(t, &elim);
    laws.push(CausalLaw::new(Formula::Top, elim.elim_formula()));
    let out = CausalTheory::new(Arc::clone(elim.target()), laws)
        .expect("renamed laws fit the target signature");
    Ok((elim, out))
}

/// The definite elimination for causal theories: rename every law and
/// add `c!v=tt => c!v'=ff` for every ordered pair of distinct values
/// plus `c!v1=ff & ... & c!vk=ff => false`. Needs a domain of at least
/// two values and atomic consequents wherever the constant occurs;
/// preserves definiteness.
pub fn eliminate_causal_definite(
    t: &CausalTheory,
    constant: &str,
) -> Result<(Elimination, CausalTheory), ElimError> {
    let index = t
        .signature()
        .index_of(constant)
        .ok_or_else(|| ElimError::UnknownConstant {
            name: constant.to_string(),
        })?;
    if t.signature().decl(index).domain().len() < 2 {
        return Err(ElimError::SingletonDomain {
            constant: constant.to_string(),
        });
    }
    for (law_index, law) in t.laws().iter().enumerate() {
        if law.consequent.mentions(constant) && !matches!(law.consequent, Formula::Atom(_)) {
            return Err(ElimError::NonAtomicHead {
                law_index,
                constant: constant.to_string(),
            });
        }
    }
    let elim = Elimination::new(t.signature(), constant)?;
    let mut laws = rename_laws(t, &elim);
    for (v, v2) in ordered_pairs(elim.family().len()) {
        laws.push(CausalLaw::new(
            Formula::atom(elim.family()[v].clone(), TT),
            Formula::atom(elim.family()[v2].clone(), FF),
        ));
    }
    laws.push(CausalLaw::new(all_off(&elim), Formula::Bottom));
    let out = CausalTheory::new(Arc::clone(elim.target()), laws)
        .expect("renamed laws fit the target signature");
    Ok((elim, out))
}

/// The general elimination of a fluent constant: rename every
/// proposition and add the static law causing the exclusion formula.
/// The added head is not an atom, so definiteness is lost.
pub fn eliminate_fluent_general(
    d: &ActionDescription,
    constant: &str,
) -> Result<(Elimination, ActionDescription), ElimError> {
    let elim = fluent_elimination(d, constant)?;
    let mut props = rename_props(d, &elim);
    props.push(Proposition::Static {
        head: elim.elim_formula(),
        condition: Formula::Top,
    });
    let out = rebuild(d, &elim, props, true);
    Ok((elim, out))
}

/// The definite elimination of a fluent constant: rename every
/// proposition and add `caused c!v=ff if c!v'=tt` for every ordered
/// pair of distinct values plus `caused false if` all members off.
/// Needs a domain of at least two values and atomic heads wherever the
/// constant occurs; preserves definiteness.
pub fn eliminate_fluent_definite(
    d: &ActionDescription,
    constant: &str,
) -> Result<(Elimination, ActionDescription), ElimError> {
    if d.signature().fluents().index_of(constant).is_none() {
        return Err(lookup_error(d, constant, true));
    }
    let decl_index = d.signature().fluents().index_of(constant).expect("just found");
    if d.signature().fluents().decl(decl_index).domain().len() < 2 {
        return Err(ElimError::SingletonDomain {
            constant: constant.to_string(),
        });
    }
    for (law_index, p) in d.propositions().iter().enumerate() {
        if p.head().mentions(constant) && !matches!(p.head(), Formula::Atom(_)) {
            return Err(ElimError::NonAtomicHead {
                law_index,
                constant: constant.to_string(),
            });
        }
    }
    let elim = fluent_elimination(d, constant)?;
    let mut props = rename_props(d, &elim);
    for (v, v2) in ordered_pairs(elim.family().len()) {
        props.push(Proposition::Static {
            head: Formula::atom(elim.family()[v].clone(), FF),
            condition: Formula::atom(elim.family()[v2].clone(), TT),
        });
    }
    props.push(Proposition::Static {
        head: Formula::Bottom,
        condition: all_off(&elim),
    });
    let out = rebuild(d, &elim, props, true);
    Ok((elim, out))
}

/// The elimination of an action constant: rename every proposition and
/// add the dynamic law forbidding transitions whose action violates
/// the exclusion formula. The one method for actions; definiteness is
/// preserved since the added head is `false`.
pub fn eliminate_action(
    d: &ActionDescription,
    constant: &str,
) -> Result<(Elimination, ActionDescription), ElimError> {
    if d.signature().actions().index_of(constant).is_none() {
        return Err(lookup_error(d, constant, false));
    }
    let elim = Elimination::new(d.signature().actions(), constant)?;
    for name in elim.family() {
        if d.signature().fluents().index_of(name).is_some() {
            return Err(ElimError::NameCollision { name: name.clone() });
        }
    }
    let mut props = rename_props(d, &elim);
    props.push(Proposition::Dynamic {
        head: Formula::Bottom,
        condition: Formula::Top,
        after: Formula::not(elim.elim_formula()),
    });
    let out = rebuild(d, &elim, props, false);
    Ok((elim, out))
}

fn lookup_error(d: &ActionDescription, constant: &str, want_fluent: bool) -> ElimError {
    let fluent = d.signature().fluents().index_of(constant).is_some();
    let action = d.signature().actions().index_of(constant).is_some();
    match (want_fluent, fluent, action) {
        (true, _, true) => ElimError::NotAFluent {
            name: constant.to_string(),
        },
        (false, true, _) => ElimError::NotAnAction {
            name: constant.to_string(),
        },
        _ => ElimError::UnknownConstant {
            name: constant.to_string(),
        },
    }
}

fn fluent_elimination(d: &ActionDescription, constant: &str) -> Result<Elimination, ElimError> {
    if d.signature().fluents().index_of(constant).is_none() {
        return Err(lookup_error(d, constant, true));
    }
    let elim = Elimination::new(d.signature().fluents(), constant)?;
    for name in elim.family() {
        if d.signature().actions().index_of(name).is_some() {
            return Err(ElimError::NameCollision { name: name.clone() });
        }
    }
    Ok(elim)
}

fn rename_laws(t: &CausalTheory, elim: &Elimination) -> Vec<CausalLaw> {
    t.laws()
        .iter()
        .map(|law| {
            CausalLaw::new(
                elim.rename_formula(&law.antecedent),
                elim.rename_formula(&law.consequent),
            )
        })
        .collect()
}

fn rename_props(d: &ActionDescription, elim: &Elimination) -> Vec<Proposition> {
    d.propositions()
        .iter()
        .map(|p| match p {
            Proposition::Static { head, condition } => Proposition::Static {
                head: elim.rename_formula(head),
                condition: elim.rename_formula(condition),
            },
            Proposition::Dynamic {
                head,
                condition,
                after,
            } => Proposition::Dynamic {
                head: elim.rename_formula(head),
                condition: elim.rename_formula(condition),
                after: elim.rename_formula(after),
            },
        })
        .collect()
}

fn rebuild(
    d: &ActionDescription,
    elim: &Elimination,
    props: Vec<Proposition>,
    fluent_side: bool,
) -> ActionDescription {
    let sig = if fluent_side {
        ActionSignature::new(
            Arc::clone(elim.target()),
            Arc::clone(d.signature().actions()),
        )
    } else {
        ActionSignature::new(
            Arc::clone(d.signature().fluents()),
            Arc::clone(elim.target()),
        )
    }
    .expect("family names checked against the other partition");
    ActionDescription::new(sig, props).expect("renamed propositions fit the renamed signature")
}

/// All ordered pairs of distinct indices below `n`, first index outer.
fn ordered_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |v| (0..n).filter(move |&v2| v2 != v).map(move |v2| (v, v2)))
}

/// `c!v1=ff & ... & c!vk=ff`, domain order.
fn all_off(elim: &Elimination) -> Formula {
    Formula::conj(
        elim.family()
            .iter()
            .map(|name| Formula::atom(name.clone(), FF)),
    )
}
