//! Causal theories over multi-valued signatures.
//!
//! A causal law `F => G` says that G has a cause whenever F holds; it
//! is not a material conditional. The reduct of a theory relative to an
//! interpretation I collects the consequents of the laws whose
//! antecedents I satisfies, and I is causally explained when it is the
//! unique model of its own reduct. For definite theories (every
//! consequent an atom or `false`, no singleton domains) the explained
//! interpretations are exactly the models of the literal completion.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::mvpl::{self, Formula, Interpretation, Signature, WellFormedError};
use crate::solver::{self, SearchStats};

/// A causal law `antecedent => consequent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalLaw {
    pub antecedent: Formula,
    pub consequent: Formula,
}

impl CausalLaw {
    pub fn new(antecedent: Formula, consequent: Formula) -> Self {
        CausalLaw {
            antecedent,
            consequent,
        }
    }
}

impl fmt::Display for CausalLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.antecedent, self.consequent)
    }
}

/// Why a theory fails to be definite.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinitenessViolation {
    #[error("constant `{constant}` has a singleton domain")]
    SingletonDomain { constant: String },
    #[error("the consequent of law {law_index} is neither an atom nor false")]
    NonAtomicConsequent { law_index: usize },
}

/// A finite sequence of causal laws over a signature.
///
/// Construction validates every formula against the signature and
/// drops syntactically repeated laws, keeping first occurrences in
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalTheory {
    sig: Arc<Signature>,
    laws: Vec<CausalLaw>,
}

impl CausalTheory {
    pub fn new(sig: Arc<Signature>, laws: Vec<CausalLaw>) -> Result<Self, WellFormedError> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for law in laws {
            law.antecedent.well_formed(&sig)?;
            law.consequent.well_formed(&sig)?;
            if seen.insert(law.clone()) {
                kept.push(law);
            }
        }
        Ok(CausalTheory { sig, laws: kept })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn laws(&self) -> &[CausalLaw] {
        &self.laws
    }

    /// The reduct: consequents of laws whose antecedents hold in `i`,
    /// duplicate-free in law order.
    pub fn reduct(&self, i: &Interpretation) -> Vec<Formula> {
        debug_assert_eq!(i.signature().len(), self.sig.len());
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for law in &self.laws {
            if i.satisfies(&law.antecedent) && seen.insert(&law.consequent) {
                out.push(law.consequent.clone());
            }
        }
        out
    }

    /// True iff `i` is the unique model of its own reduct.
    pub fn is_causally_explained(&self, i: &Interpretation) -> bool {
        let reduct = self.reduct(i);
        let compiled_ok = reduct.iter().all(|f| i.satisfies(f));
        if !compiled_ok {
            return false;
        }
        // `i` is a model, so a single model overall must be `i` itself.
        solver::enumerate_models(&self.sig, &reduct, Some(2)).0.len() == 1
    }

    /// Every causally explained interpretation, canonical order.
    ///
    /// Definite theories go through the completion; the general case
    /// scans all interpretations.
    pub fn causally_explained_interpretations(&self) -> Vec<Interpretation> {
        self.causally_explained_with_stats().0
    }

    /// As [`Self::causally_explained_interpretations`], also reporting
    /// search effort.
    pub fn causally_explained_with_stats(&self) -> (Vec<Interpretation>, SearchStats) {
        match self.completion() {
            Ok(completion) => completion.models_with_stats(),
            Err(_) => self.explained_interpretations_scan(),
        }
    }

    /// Completion-free enumeration of the explained interpretations:
    /// checks uniqueness of each interpretation's reduct model
    /// directly. Works for any theory, definite or not.
    pub fn explained_interpretations_scan(&self) -> (Vec<Interpretation>, SearchStats) {
        let mut stats = SearchStats::default();
        let mut out = Vec::new();
        for i in self.sig.interpretations() {
            let reduct = self.reduct(&i);
            if !reduct.iter().all(|f| i.satisfies(f)) {
                continue;
            }
            let (models, s) = solver::enumerate_models(&self.sig, &reduct, Some(2));
            stats += s;
            if models.len() == 1 {
                out.push(i);
            }
        }
        (out, stats)
    }

    /// Checks the two definiteness conditions: no constant with a
    /// singleton domain, and every consequent an atom or `false`.
    pub fn check_definite(&self) -> Result<(), DefinitenessViolation> {
        for decl in self.sig.constants() {
            if decl.domain().len() == 1 {
                return Err(DefinitenessViolation::SingletonDomain {
                    constant: decl.name().to_string(),
                });
            }
        }
        for (law_index, law) in self.laws.iter().enumerate() {
            match law.consequent {
                Formula::Atom(_) | Formula::Bottom => {}
                _ => return Err(DefinitenessViolation::NonAtomicConsequent { law_index }),
            }
        }
        Ok(())
    }

    pub fn is_definite(&self) -> bool {
        self.check_definite().is_ok()
    }

    /// The literal completion: for every atom A of the signature, in
    /// canonical order, the biconditional `A <-> F1 | ... | Fn` over
    /// the laws with consequent A (`A <-> false` when there are none),
    /// followed by `-F` for every law `F => false`, in law order.
    pub fn completion(&self) -> Result<Completion, DefinitenessViolation> {
        self.check_definite()?;
        let mut formulas = Vec::new();
        for atom in self.sig.atoms() {
            let antecedents: Vec<Formula> = self
                .laws
                .iter()
                .filter(|law| law.consequent == Formula::Atom(atom.clone()))
                .map(|law| law.antecedent.clone())
                .collect();
            formulas.push(Formula::equiv(
                Formula::Atom(atom),
                Formula::disj(antecedents),
            ));
        }
        for law in &self.laws {
            if law.consequent == Formula::Bottom {
                formulas.push(Formula::not(law.antecedent.clone()));
            }
        }
        Ok(Completion {
            sig: Arc::clone(&self.sig),
            formulas,
        })
    }
}

/// The completion of a definite causal theory: one biconditional per
/// atom plus one negated antecedent per `false`-consequent law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    sig: Arc<Signature>,
    formulas: Vec<Formula>,
}

impl Completion {
    pub fn signature(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    /// Models of the completion, canonical order.
    pub fn models(&self) -> Vec<Interpretation> {
        self.models_with_stats().0
    }

    pub fn models_with_stats(&self) -> (Vec<Interpretation>, SearchStats) {
        solver::enumerate_models(&self.sig, &self.formulas, None)
    }

    /// True iff every model of the completion satisfies `f`.
    pub fn entails(&self, f: &Formula) -> bool {
        mvpl::entails(&self.sig, &self.formulas, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mvpl::{naive_models, Atom, FF, TT};

    fn sig_c(values: &[&str]) -> Arc<Signature> {
        Arc::new(Signature::new([("c", values.to_vec())]).unwrap())
    }

    fn interp(sig: &Arc<Signature>, pairs: &[(&str, &str)]) -> Interpretation {
        Interpretation::from_assignment(sig, pairs).unwrap()
    }

    fn self_support_c1(sig: &Arc<Signature>) -> CausalTheory {
        CausalTheory::new(
            Arc::clone(sig),
            vec![CausalLaw::new(Formula::atom("c", "1"), Formula::atom("c", "1"))],
        )
        .unwrap()
    }

    #[test]
    fn reduct_keeps_consequents_of_satisfied_antecedents() {
        let sig = sig_c(&["1", "2", "3"]);
        let t = self_support_c1(&sig);
        assert_eq!(
            t.reduct(&interp(&sig, &[("c", "1")])),
            vec![Formula::atom("c", "1")]
        );
        assert!(t.reduct(&interp(&sig, &[("c", "2")])).is_empty());
    }

    #[test]
    fn reduct_handles_trivial_antecedents_and_dedups() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![
                CausalLaw::new(Formula::Top, Formula::atom("p", TT)),
                CausalLaw::new(Formula::Bottom, Formula::atom("p", FF)),
                CausalLaw::new(Formula::atom("p", TT), Formula::atom("p", TT)),
            ],
        )
        .unwrap();
        for i in sig.interpretations() {
            assert_eq!(t.reduct(&i), vec![Formula::atom("p", TT)]);
        }
    }

    #[test]
    fn construction_dedups_identical_laws() {
        let sig = sig_c(&["1", "2"]);
        let law = CausalLaw::new(Formula::Top, Formula::atom("c", "1"));
        let t = CausalTheory::new(Arc::clone(&sig), vec![law.clone(), law.clone()]).unwrap();
        assert_eq!(t.laws().len(), 1);
    }

    #[test]
    fn construction_rejects_ill_formed_laws() {
        let sig = sig_c(&["1", "2"]);
        let bad = CausalTheory::new(
            Arc::clone(&sig),
            vec![CausalLaw::new(Formula::Top, Formula::atom("c", "9"))],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn self_supported_value_is_explained_others_not() {
        let sig = sig_c(&["1", "2", "3"]);
        let t = self_support_c1(&sig);
        assert!(t.is_causally_explained(&interp(&sig, &[("c", "1")])));
        assert!(!t.is_causally_explained(&interp(&sig, &[("c", "2")])));
        assert!(!t.is_causally_explained(&interp(&sig, &[("c", "3")])));
        let shown: Vec<String> = t
            .causally_explained_interpretations()
            .iter()
            .map(|i| i.to_string())
            .collect();
        assert_eq!(shown, ["c=1"]);
    }

    #[test]
    fn empty_theory_explains_nothing_on_a_boolean_signature() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(Arc::clone(&sig), vec![]).unwrap();
        for i in sig.interpretations() {
            assert!(!t.is_causally_explained(&i));
        }
    }

    #[test]
    fn forced_unit_is_the_single_explained_interpretation() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![CausalLaw::new(Formula::Top, Formula::atom("p", TT))],
        )
        .unwrap();
        let shown: Vec<String> = t
            .causally_explained_interpretations()
            .iter()
            .map(|i| i.to_string())
            .collect();
        assert_eq!(shown, ["p=tt"]);
    }

    #[test]
    fn definiteness_checks_both_conditions() {
        let sig = sig_c(&["1", "2", "3"]);
        assert!(self_support_c1(&sig).is_definite());

        let sig2 = Arc::new(Signature::new([("p", vec![FF, TT]), ("q", vec![FF, TT])]).unwrap());
        let disj = CausalTheory::new(
            Arc::clone(&sig2),
            vec![CausalLaw::new(
                Formula::Top,
                Formula::or(Formula::atom("p", TT), Formula::atom("q", TT)),
            )],
        )
        .unwrap();
        assert_eq!(
            disj.check_definite().unwrap_err(),
            DefinitenessViolation::NonAtomicConsequent { law_index: 0 }
        );

        let sig3 = Arc::new(Signature::new([("d", vec!["v"])]).unwrap());
        let singleton = CausalTheory::new(Arc::clone(&sig3), vec![]).unwrap();
        assert_eq!(
            singleton.check_definite().unwrap_err(),
            DefinitenessViolation::SingletonDomain {
                constant: "d".into()
            }
        );
    }

    #[test]
    fn completion_of_the_self_support_theory() {
        let sig = sig_c(&["1", "2", "3"]);
        let completion = self_support_c1(&sig).completion().unwrap();
        let shown: Vec<String> = completion.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["c=1 <-> c=1", "c=2 <-> false", "c=3 <-> false"]);
        let models: Vec<String> = completion.models().iter().map(|m| m.to_string()).collect();
        assert_eq!(models, ["c=1"]);
    }

    #[test]
    fn completion_adds_negations_for_bottom_consequents() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![CausalLaw::new(Formula::atom("p", TT), Formula::Bottom)],
        )
        .unwrap();
        let completion = t.completion().unwrap();
        let shown: Vec<String> = completion.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["p=ff <-> false", "p=tt <-> false", "-p=tt"]);
        assert!(completion.models().is_empty());
        assert!(t.causally_explained_interpretations().is_empty());
    }

    #[test]
    fn completion_requires_definiteness() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![CausalLaw::new(Formula::Top, Formula::not(Formula::atom("p", FF)))],
        )
        .unwrap();
        assert!(t.completion().is_err());
    }

    #[test]
    fn completion_size_is_atom_count_plus_bottom_laws() {
        let sig = Arc::new(
            Signature::new([("c", vec!["1", "2", "3"]), ("p", vec![FF, TT])]).unwrap(),
        );
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![
                CausalLaw::new(Formula::atom("p", TT), Formula::atom("c", "1")),
                CausalLaw::new(Formula::atom("c", "2"), Formula::Bottom),
                CausalLaw::new(Formula::atom("c", "3"), Formula::Bottom),
            ],
        )
        .unwrap();
        let completion = t.completion().unwrap();
        assert_eq!(completion.formulas().len(), 5 + 2);
    }

    /// Explained iff the reduct, read as an atom set, equals the
    /// interpretation's atom set (definite theories only).
    #[test]
    fn definite_case_reduces_to_atom_set_equality() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT]), ("q", vec![FF, TT])]).unwrap());
        let pool = vec![
            CausalLaw::new(Formula::Top, Formula::atom("p", TT)),
            CausalLaw::new(Formula::atom("p", TT), Formula::atom("q", TT)),
            CausalLaw::new(Formula::atom("q", FF), Formula::atom("q", FF)),
            CausalLaw::new(Formula::and(Formula::atom("p", TT), Formula::atom("q", TT)), Formula::Bottom),
            CausalLaw::new(Formula::not(Formula::atom("p", FF)), Formula::atom("p", FF)),
        ];
        for mask in 0..(1 << pool.len()) {
            let laws: Vec<CausalLaw> = pool
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, law)| law.clone())
                .collect();
            let t = CausalTheory::new(Arc::clone(&sig), laws).unwrap();
            assert!(t.is_definite());
            for i in sig.interpretations() {
                let reduct: HashSet<Formula> = t.reduct(&i).into_iter().collect();
                let atoms: HashSet<Formula> =
                    i.atoms().into_iter().map(Formula::Atom).collect();
                assert_eq!(
                    t.is_causally_explained(&i),
                    reduct == atoms,
                    "mask {mask}, interpretation {i}"
                );
            }
        }
    }

    /// Explained iff the reduct is satisfiable and agrees with the
    /// interpretation on every atom's entailment.
    #[test]
    fn fixpoint_characterization_at_the_atom_level() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT]), ("c", vec!["1", "2", "3"])]).unwrap());
        let pool = vec![
            CausalLaw::new(Formula::atom("c", "1"), Formula::atom("c", "1")),
            CausalLaw::new(Formula::Top, Formula::or(Formula::atom("p", TT), Formula::atom("c", "2"))),
            CausalLaw::new(Formula::atom("p", TT), Formula::not(Formula::atom("c", "3"))),
            CausalLaw::new(Formula::atom("c", "2"), Formula::Bottom),
        ];
        for mask in 0..(1 << pool.len()) {
            let laws: Vec<CausalLaw> = pool
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, law)| law.clone())
                .collect();
            let t = CausalTheory::new(Arc::clone(&sig), laws).unwrap();
            for i in sig.interpretations() {
                let reduct = t.reduct(&i);
                let satisfiable = !naive_models(&sig, &reduct).is_empty();
                let atom_agreement = sig.atoms().all(|a: Atom| {
                    let f = Formula::Atom(a);
                    i.satisfies(&f) == mvpl::entails(&sig, &reduct, &f)
                });
                assert_eq!(
                    t.is_causally_explained(&i),
                    satisfiable && atom_agreement,
                    "mask {mask}, interpretation {i}"
                );
            }
        }
    }

    /// The engine route (completion when definite) agrees with the scan.
    #[test]
    fn completion_route_matches_scan_route() {
        let sig = Arc::new(Signature::new([("p", vec![FF, TT]), ("q", vec![FF, TT])]).unwrap());
        let t = CausalTheory::new(
            Arc::clone(&sig),
            vec![
                CausalLaw::new(Formula::atom("q", TT), Formula::atom("p", TT)),
                CausalLaw::new(Formula::Top, Formula::atom("q", TT)),
                CausalLaw::new(Formula::atom("p", FF), Formula::atom("p", FF)),
            ],
        )
        .unwrap();
        assert_eq!(
            t.causally_explained_interpretations(),
            t.explained_interpretations_scan().0
        );
    }
}
