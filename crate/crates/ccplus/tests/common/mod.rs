//! Shared fixtures for the integration suites: the boxes description,
//! a brute-force explained-set oracle, seeded random generators for
//! signatures, formulas, theories, descriptions, and ADL domains, and
//! a Boolean-only reference evaluator that the multi-valued engine is
//! compared against.

#![allow(dead_code)]

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ccplus::adl::AdlDescription;
use ccplus::causal::{CausalLaw, CausalTheory};
use ccplus::cplus::{
    Abbreviation, ActionDescription, ActionSignature, Proposition, Transition,
};
use ccplus::mvpl::{ExtFormula, Formula, Interpretation, Signature, Term, FF, TT};
use ccplus::Update;

/// Fixed fallback seed; override with the CCPLUS_SEED environment
/// variable (a decimal u64) to rerun the randomized suites elsewhere
/// in the sample space.
const DEFAULT_SEED: u64 = 0x5eed_0ca5;

pub fn rng() -> ChaCha8Rng {
    let seed = std::env::var("CCPLUS_SEED")
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .unwrap_or(DEFAULT_SEED);
    ChaCha8Rng::seed_from_u64(seed)
}

/// Prints the one-line verdict for an acceptance criterion and
/// enforces its wall-clock bound.
pub fn pass(n: usize, start: Instant, bound: Duration, detail: &str) {
    let elapsed = start.elapsed();
    if elapsed > bound {
        println!(
            "criterion {n:02} FAIL: exceeded {bound:?} (took {elapsed:?}); {detail}"
        );
        panic!("criterion {n} exceeded its time bound: {elapsed:?} > {bound:?}");
    }
    println!("criterion {n:02} PASS: {detail} [{elapsed:?}]");
}

#[allow(unused_macros)]
macro_rules! check {
    ($n:expr, $cond:expr, $($msg:tt)+) => {
        if !$cond {
            let msg = format!($($msg)+);
            println!("criterion {:02} FAIL: {}", $n, msg);
            panic!("criterion {} failed: {}", $n, msg);
        }
    };
}

// ---------------------------------------------------------------- boxes

pub const BOXES: [&str; 2] = ["B1", "B2"];
pub const LOCATIONS: [&str; 3] = ["L1", "L2", "L3"];

fn loc(b: &str, l: &str) -> Formula {
    Formula::atom(format!("Loc({b})"), l)
}

fn dest(b: &str, l: &str) -> Formula {
    Formula::atom(format!("Destination({b})"), l)
}

fn mv(b: &str) -> Formula {
    Formula::atom(format!("Move({b})"), TT)
}

pub fn boxes_signature() -> ActionSignature {
    let fluents = Signature::new(
        BOXES.map(|b| (format!("Loc({b})"), LOCATIONS.to_vec())),
    )
    .unwrap();
    let actions = Signature::new(
        BOXES
            .iter()
            .map(|b| (format!("Move({b})"), vec![FF, TT]))
            .chain(BOXES.iter().map(|b| {
                (
                    format!("Destination({b})"),
                    vec!["L1", "L2", "L3", "None"],
                )
            })),
    )
    .unwrap();
    ActionSignature::new(Arc::new(fluents), Arc::new(actions)).unwrap()
}

/// Two boxes, three locations: moving a box needs a destination,
/// sends the box there, is blocked when it is already there, boxes
/// are inert, and no two boxes share a location.
pub fn boxes() -> ActionDescription {
    let sig = boxes_signature();
    let mut props = Vec::new();
    for b in BOXES {
        props.push(Proposition::Dynamic {
            head: Formula::Bottom,
            condition: Formula::Top,
            after: Formula::equiv(mv(b), dest(b, "None")),
        });
    }
    for b in BOXES {
        for l in LOCATIONS {
            let abbrev = Abbreviation::Causes {
                actions: vec![format!("Move({b})")],
                head: loc(b, l),
                condition: dest(b, l),
            };
            props.push(abbrev.desugar(&sig).unwrap());
        }
    }
    for b in BOXES {
        for l in LOCATIONS {
            let abbrev = Abbreviation::Nonexecutable {
                actions: vec![format!("Move({b})")],
                condition: Formula::and(loc(b, l), dest(b, l)),
            };
            props.push(abbrev.desugar(&sig).unwrap());
        }
    }
    for b in BOXES {
        for l in LOCATIONS {
            let abbrev = Abbreviation::Inertial(loc(b, l));
            props.push(abbrev.desugar(&sig).unwrap());
        }
    }
    for b in BOXES {
        for b2 in BOXES {
            if b == b2 {
                continue;
            }
            for l in LOCATIONS {
                let abbrev = Abbreviation::Never(Formula::and(loc(b, l), loc(b2, l)));
                props.push(abbrev.desugar(&sig).unwrap());
            }
        }
    }
    ActionDescription::new(sig, props).unwrap()
}

// --------------------------------------------------------------- oracle

/// Brute-force explained set: an interpretation qualifies when it is
/// the unique one satisfying the consequents of exactly the laws whose
/// antecedents it satisfies. Checks every interpretation against every
/// other one; independent of the solver and of completion.
pub fn naive_explained(t: &CausalTheory) -> Vec<Interpretation> {
    let all: Vec<Interpretation> = t.signature().interpretations().collect();
    let mut out = Vec::new();
    for i in &all {
        let caused: Vec<&Formula> = t
            .laws()
            .iter()
            .filter(|law| i.satisfies(&law.antecedent))
            .map(|law| &law.consequent)
            .collect();
        let mut models = all
            .iter()
            .filter(|j| caused.iter().all(|f| j.satisfies(f)));
        if models.next() == Some(i) && models.next().is_none() {
            out.push(i.clone());
        }
    }
    out
}

// ----------------------------------------------------- comparison keys

pub fn key(i: &Interpretation) -> Vec<usize> {
    i.value_indices().to_vec()
}

pub fn sorted_keys(xs: &[Interpretation]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = xs.iter().map(key).collect();
    out.sort();
    out
}

pub type EdgeKey = (Vec<usize>, Vec<usize>, Vec<usize>);

pub fn edge_key(e: &Transition) -> EdgeKey {
    (key(&e.initial), key(&e.action), key(&e.resulting))
}

pub fn sorted_edge_keys(edges: &[Transition]) -> Vec<EdgeKey> {
    let mut out: Vec<EdgeKey> = edges.iter().map(edge_key).collect();
    out.sort();
    out
}

// ------------------------------------------------------------ formulas

pub fn rand_signature(
    rng: &mut ChaCha8Rng,
    max_consts: usize,
    min_dom: usize,
    max_dom: usize,
) -> Arc<Signature> {
    let n = rng.random_range(1..=max_consts);
    let decls = (0..n).map(|ci| {
        let k = rng.random_range(min_dom..=max_dom);
        (
            format!("c{ci}"),
            (0..k).map(|vi| format!("v{vi}")).collect::<Vec<_>>(),
        )
    });
    Arc::new(Signature::new(decls).unwrap())
}

pub fn pick_constant(rng: &mut ChaCha8Rng, sig: &Signature) -> String {
    sig.decl(rng.random_range(0..sig.len())).name().to_string()
}

fn rand_atom(rng: &mut ChaCha8Rng, sig: &Signature) -> Formula {
    let decl = sig.decl(rng.random_range(0..sig.len()));
    let v = &decl.domain()[rng.random_range(0..decl.domain().len())];
    Formula::atom(decl.name(), v.clone())
}

pub fn rand_formula(rng: &mut ChaCha8Rng, sig: &Signature, depth: usize) -> Formula {
    if depth == 0 || rng.random_range(0..10) < 3 {
        return match rng.random_range(0..8) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => rand_atom(rng, sig),
        };
    }
    let a = rand_formula(rng, sig, depth - 1);
    match rng.random_range(0..5) {
        0 => Formula::not(a),
        1 => Formula::and(a, rand_formula(rng, sig, depth - 1)),
        2 => Formula::or(a, rand_formula(rng, sig, depth - 1)),
        3 => Formula::implies(a, rand_formula(rng, sig, depth - 1)),
        _ => Formula::equiv(a, rand_formula(rng, sig, depth - 1)),
    }
}

// ------------------------------------------------------ causal theories

/// A random theory with no shape restrictions on consequents.
pub fn rand_theory(
    rng: &mut ChaCha8Rng,
    max_consts: usize,
    max_laws: usize,
) -> CausalTheory {
    let sig = rand_signature(rng, max_consts, 1, 3);
    let n = rng.random_range(0..=max_laws);
    let laws = (0..n)
        .map(|_| {
            CausalLaw::new(
                rand_formula(rng, &sig, 2),
                rand_formula(rng, &sig, 2),
            )
        })
        .collect();
    CausalTheory::new(sig, laws).unwrap()
}

/// A random definite theory: every domain has at least two values and
/// every consequent is an atom or `false`.
pub fn rand_definite_theory(
    rng: &mut ChaCha8Rng,
    max_consts: usize,
    max_laws: usize,
) -> CausalTheory {
    let sig = rand_signature(rng, max_consts, 2, 3);
    let n = rng.random_range(0..=max_laws);
    let laws = (0..n)
        .map(|_| {
            let consequent = if rng.random_range(0..5) == 0 {
                Formula::Bottom
            } else {
                rand_atom(rng, &sig)
            };
            CausalLaw::new(rand_formula(rng, &sig, 2), consequent)
        })
        .collect();
    CausalTheory::new(sig, laws).unwrap()
}

// --------------------------------------------------- action descriptions

fn rand_part_signature(
    rng: &mut ChaCha8Rng,
    prefix: &str,
    max_consts: usize,
    min_dom: usize,
    max_dom: usize,
) -> Arc<Signature> {
    let n = rng.random_range(1..=max_consts);
    let decls = (0..n).map(|ci| {
        let k = rng.random_range(min_dom..=max_dom);
        (
            format!("{prefix}{ci}"),
            (0..k).map(|vi| format!("v{vi}")).collect::<Vec<_>>(),
        )
    });
    Arc::new(Signature::new(decls).unwrap())
}

/// A random description with at most two fluents and two actions,
/// domains of at most three values. With `definite` set, every head is
/// an atom or `false` and no domain is a singleton.
pub fn rand_description(rng: &mut ChaCha8Rng, definite: bool) -> ActionDescription {
    let min_dom = if definite { 2 } else { 1 };
    let fluents = rand_part_signature(rng, "f", 2, min_dom, 3);
    let actions = rand_part_signature(rng, "a", 2, min_dom, 3);
    let sig = ActionSignature::new(fluents, actions).unwrap();
    let head = |rng: &mut ChaCha8Rng| {
        if definite {
            if rng.random_range(0..5) == 0 {
                Formula::Bottom
            } else {
                rand_atom(rng, sig.fluents())
            }
        } else {
            rand_formula(rng, sig.fluents(), 1)
        }
    };
    let n = rng.random_range(0..=8);
    let props = (0..n)
        .map(|_| {
            if rng.random_range(0..5) < 2 {
                Proposition::Static {
                    head: head(rng),
                    condition: rand_formula(rng, sig.fluents(), 2),
                }
            } else {
                Proposition::Dynamic {
                    head: head(rng),
                    condition: rand_formula(rng, sig.fluents(), 2),
                    after: rand_formula(rng, sig.combined(), 2),
                }
            }
        })
        .collect();
    ActionDescription::new(sig, props).unwrap()
}

// ------------------------------------------------------------------ ADL

fn rand_ext(
    rng: &mut ChaCha8Rng,
    fluents: &Signature,
    dom: &[String],
    binders: &mut Vec<String>,
    depth: usize,
) -> ExtFormula {
    if depth == 0 || rng.random_range(0..10) < 3 {
        return match rng.random_range(0..10) {
            0 => ExtFormula::Top,
            1 => ExtFormula::Bottom,
            2..=5 if !binders.is_empty() => {
                let var = binders[rng.random_range(0..binders.len())].clone();
                if rng.random_range(0..2) == 0 {
                    let v = dom[rng.random_range(0..dom.len())].clone();
                    ExtFormula::atom(Term::Variable(var), Term::Value(v))
                } else {
                    let c = fluents.decl(rng.random_range(0..fluents.len()));
                    ExtFormula::atom(
                        Term::Constant(c.name().to_string()),
                        Term::Variable(var),
                    )
                }
            }
            _ => {
                let c = fluents.decl(rng.random_range(0..fluents.len()));
                let v = dom[rng.random_range(0..dom.len())].clone();
                ExtFormula::cv(c.name(), v)
            }
        };
    }
    match rng.random_range(0..7) {
        0 => ExtFormula::not(rand_ext(rng, fluents, dom, binders, depth - 1)),
        1 => ExtFormula::and(
            rand_ext(rng, fluents, dom, binders, depth - 1),
            rand_ext(rng, fluents, dom, binders, depth - 1),
        ),
        2 => ExtFormula::or(
            rand_ext(rng, fluents, dom, binders, depth - 1),
            rand_ext(rng, fluents, dom, binders, depth - 1),
        ),
        3 => ExtFormula::implies(
            rand_ext(rng, fluents, dom, binders, depth - 1),
            rand_ext(rng, fluents, dom, binders, depth - 1),
        ),
        4 => ExtFormula::equiv(
            rand_ext(rng, fluents, dom, binders, depth - 1),
            rand_ext(rng, fluents, dom, binders, depth - 1),
        ),
        q => {
            let var = format!("q{}", binders.len());
            binders.push(var.clone());
            let body = rand_ext(rng, fluents, dom, binders, depth - 1);
            binders.pop();
            if q == 5 {
                ExtFormula::forall(var, body)
            } else {
                ExtFormula::exists(var, body)
            }
        }
    }
}

/// A random consistent ADL description: at most two fluents over one
/// shared domain of at most three values, at most two Boolean actions.
/// Update conditions are usually pinned to a single parameter value,
/// which guarantees consistency; free-form ones are kept only when the
/// consistency check accepts them.
pub fn rand_adl(rng: &mut ChaCha8Rng) -> AdlDescription {
    for attempt in 0..50 {
        let free_form = attempt < 25 && rng.random_range(0..10) < 3;
        let dom_size = rng.random_range(1..=3);
        let dom: Vec<String> = (0..dom_size).map(|vi| format!("v{vi}")).collect();
        let nf = rng.random_range(1..=2);
        let fluents = Arc::new(
            Signature::new((0..nf).map(|ci| (format!("f{ci}"), dom.clone()))).unwrap(),
        );
        let na = rng.random_range(1..=2);
        let actions = Arc::new(Signature::all_boolean(
            (0..na).map(|ai| format!("a{ai}")),
        ));
        let sig = ActionSignature::new(Arc::clone(&fluents), actions).unwrap();

        let mut preconds = Vec::new();
        for ai in 0..na {
            if rng.random_range(0..10) < 8 {
                let f = rand_ext(rng, &fluents, &dom, &mut Vec::new(), 2);
                preconds.push((format!("a{ai}"), f));
            }
        }
        let mut updates = Vec::new();
        for ai in 0..na {
            for ci in 0..nf {
                if rng.random_range(0..10) >= 7 {
                    continue;
                }
                let mut binders = vec!["x".to_string()];
                let body = if free_form {
                    rand_ext(rng, &fluents, &dom, &mut binders, 2)
                } else {
                    let v = dom[rng.random_range(0..dom.len())].clone();
                    ExtFormula::and(
                        ExtFormula::atom(
                            Term::Variable("x".to_string()),
                            Term::Value(v),
                        ),
                        rand_ext(rng, &fluents, &dom, &mut binders, 1),
                    )
                };
                updates.push((format!("a{ai}"), format!("f{ci}"), Update::new("x", body)));
            }
        }
        let d = AdlDescription::new(sig, preconds, updates).unwrap();
        if d.is_consistent() {
            return d;
        }
    }
    unreachable!("pinned update conditions always yield a consistent description")
}

// ------------------------------------------- Boolean reference evaluator

/// A propositional formula over bit positions, evaluated directly on
/// bit vectors. Deliberately shares nothing with the library's formula
/// representation.
#[derive(Debug, Clone)]
pub enum BForm {
    T,
    F,
    Pos(usize),
    Neg(usize),
    Not(Box<BForm>),
    And(Box<BForm>, Box<BForm>),
    Or(Box<BForm>, Box<BForm>),
    Imp(Box<BForm>, Box<BForm>),
    Iff(Box<BForm>, Box<BForm>),
}

pub fn beval(f: &BForm, bits: &[bool]) -> bool {
    match f {
        BForm::T => true,
        BForm::F => false,
        BForm::Pos(i) => bits[*i],
        BForm::Neg(i) => !bits[*i],
        BForm::Not(a) => !beval(a, bits),
        BForm::And(a, b) => beval(a, bits) && beval(b, bits),
        BForm::Or(a, b) => beval(a, bits) || beval(b, bits),
        BForm::Imp(a, b) => !beval(a, bits) || beval(b, bits),
        BForm::Iff(a, b) => beval(a, bits) == beval(b, bits),
    }
}

pub struct BLaw {
    pub is_static: bool,
    pub head: BForm,
    pub cond: BForm,
    /// Over fluent bits followed by action bits; unused for statics.
    pub after: BForm,
}

/// An all-Boolean action description in reference form: `nf` fluent
/// bits, `na` action bits, and laws over them.
pub struct BDescription {
    pub nf: usize,
    pub na: usize,
    pub laws: Vec<BLaw>,
}

fn bit_vectors(n: usize) -> Vec<Vec<bool>> {
    (0..1usize << n)
        .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect())
        .collect()
}

impl BDescription {
    pub fn states(&self) -> Vec<Vec<bool>> {
        bit_vectors(self.nf)
            .into_iter()
            .filter(|s| {
                self.laws
                    .iter()
                    .filter(|law| law.is_static)
                    .all(|law| !beval(&law.cond, s) || beval(&law.head, s))
            })
            .collect()
    }

    /// Every causally explained triple: the resulting state must be
    /// the unique fluent vector satisfying the heads of the laws that
    /// fire on the triple.
    pub fn edges(&self) -> Vec<(Vec<bool>, Vec<bool>, Vec<bool>)> {
        let states = self.states();
        let all = bit_vectors(self.nf);
        let mut out = Vec::new();
        for s in &states {
            for a in bit_vectors(self.na) {
                let mut before = s.clone();
                before.extend_from_slice(&a);
                for s2 in &states {
                    let caused: Vec<&BForm> = self
                        .laws
                        .iter()
                        .filter(|law| {
                            beval(&law.cond, s2)
                                && (law.is_static || beval(&law.after, &before))
                        })
                        .map(|law| &law.head)
                        .collect();
                    if !caused.iter().all(|f| beval(f, s2)) {
                        continue;
                    }
                    let sat = all
                        .iter()
                        .filter(|t| caused.iter().all(|f| beval(f, t)))
                        .count();
                    if sat == 1 {
                        out.push((s.clone(), a.clone(), s2.clone()));
                    }
                }
            }
        }
        out
    }
}

/// One random formula built simultaneously in both representations:
/// the library's, over the named Boolean constants, and the reference
/// one, over their bit positions.
fn rand_bool_pair(
    rng: &mut ChaCha8Rng,
    names: &[String],
    depth: usize,
) -> (Formula, BForm) {
    if depth == 0 || rng.random_range(0..10) < 3 {
        return match rng.random_range(0..8) {
            0 => (Formula::Top, BForm::T),
            1 => (Formula::Bottom, BForm::F),
            _ => {
                let i = rng.random_range(0..names.len());
                if rng.random_range(0..2) == 0 {
                    (Formula::atom(names[i].clone(), TT), BForm::Pos(i))
                } else {
                    (Formula::atom(names[i].clone(), FF), BForm::Neg(i))
                }
            }
        };
    }
    let (fa, ba) = rand_bool_pair(rng, names, depth - 1);
    if rng.random_range(0..5) == 0 {
        return (Formula::not(fa), BForm::Not(Box::new(ba)));
    }
    let (fb, bb) = rand_bool_pair(rng, names, depth - 1);
    match rng.random_range(0..4) {
        0 => (Formula::and(fa, fb), BForm::And(Box::new(ba), Box::new(bb))),
        1 => (Formula::or(fa, fb), BForm::Or(Box::new(ba), Box::new(bb))),
        2 => (
            Formula::implies(fa, fb),
            BForm::Imp(Box::new(ba), Box::new(bb)),
        ),
        _ => (
            Formula::equiv(fa, fb),
            BForm::Iff(Box::new(ba), Box::new(bb)),
        ),
    }
}

/// A random all-Boolean description in both representations at once.
pub fn rand_bool_description(rng: &mut ChaCha8Rng) -> (ActionDescription, BDescription) {
    let nf = rng.random_range(1..=3);
    let na = rng.random_range(1..=2);
    let fluent_names: Vec<String> = (0..nf).map(|ci| format!("f{ci}")).collect();
    let combined_names: Vec<String> = fluent_names
        .iter()
        .cloned()
        .chain((0..na).map(|ai| format!("a{ai}")))
        .collect();
    let fluents = Arc::new(Signature::all_boolean(fluent_names.iter().cloned()));
    let actions = Arc::new(Signature::all_boolean((0..na).map(|ai| format!("a{ai}"))));
    let sig = ActionSignature::new(fluents, actions).unwrap();

    let n = rng.random_range(0..=8);
    let mut props = Vec::new();
    let mut laws = Vec::new();
    for _ in 0..n {
        let (head, bhead) = rand_bool_pair(rng, &fluent_names, 1);
        let (cond, bcond) = rand_bool_pair(rng, &fluent_names, 2);
        if rng.random_range(0..5) < 2 {
            props.push(Proposition::Static { head, condition: cond });
            laws.push(BLaw {
                is_static: true,
                head: bhead,
                cond: bcond,
                after: BForm::T,
            });
        } else {
            let (after, bafter) = rand_bool_pair(rng, &combined_names, 2);
            props.push(Proposition::Dynamic {
                head,
                condition: cond,
                after,
            });
            laws.push(BLaw {
                is_static: false,
                head: bhead,
                cond: bcond,
                after: bafter,
            });
        }
    }
    // Construction dedups repeated propositions; that cannot change
    // the caused sets, so the reference keeps its copy regardless.
    let d = ActionDescription::new(sig, props).unwrap();
    (d, BDescription { nf, na, laws })
}

pub fn bits_of(i: &Interpretation) -> Vec<bool> {
    i.value_indices().iter().map(|&v| v == 1).collect()
}
