//! Model enumeration by backtracking search.
//!
//! The search branches on constants in canonical order and on values in
//! domain order, so models come out in exactly the order the naive
//! full-enumeration filter would produce them. Between decisions it
//! runs a cheap propagation pass: root-level atoms and negated atoms
//! prune candidate values directly, and biconditionals with an atom on
//! one side (the shape literal completion produces) prune whenever the
//! other side is already decided by a three-valued evaluation. No
//! clause learning, no restarts.

use std::fmt;
use std::ops::AddAssign;
use std::sync::Arc;

use crate::mvpl::{compile, Compiled, Formula, Interpretation, Signature};

/// Counters describing one enumeration run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Value assignments tried at branch points.
    pub decisions: u64,
    /// Candidate values removed or fixed by propagation.
    pub propagations: u64,
    /// Dead ends encountered (including failed leaf checks).
    pub conflicts: u64,
    /// Models emitted.
    pub models_found: u64,
}

impl AddAssign for SearchStats {
    fn add_assign(&mut self, rhs: SearchStats) {
        self.decisions += rhs.decisions;
        self.propagations += rhs.propagations;
        self.conflicts += rhs.conflicts;
        self.models_found += rhs.models_found;
    }
}

impl fmt::Display for SearchStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "decisions={} propagations={} conflicts={} models={}",
            self.decisions, self.propagations, self.conflicts, self.models_found
        )
    }
}

/// Per-constant candidate sets, stored flat.
#[derive(Clone)]
struct DomainState {
    bits: Vec<bool>,
    remaining: Vec<u32>,
}

struct Layout {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
}

impl Layout {
    fn of(sig: &Signature) -> Layout {
        let mut offsets = Vec::with_capacity(sig.len());
        let mut sizes = Vec::with_capacity(sig.len());
        let mut total = 0;
        for decl in sig.constants() {
            offsets.push(total);
            sizes.push(decl.domain().len());
            total += decl.domain().len();
        }
        Layout { offsets, sizes }
    }

    fn total(&self) -> usize {
        self.offsets.last().map_or(0, |o| o + self.sizes[self.sizes.len() - 1])
    }
}

impl DomainState {
    fn full(layout: &Layout) -> DomainState {
        DomainState {
            bits: vec![true; layout.total()],
            remaining: layout.sizes.iter().map(|s| *s as u32).collect(),
        }
    }

    fn has(&self, layout: &Layout, ci: usize, vi: usize) -> bool {
        self.bits[layout.offsets[ci] + vi]
    }

    fn decided(&self, ci: usize) -> bool {
        self.remaining[ci] == 1
    }

    fn decided_value(&self, layout: &Layout, ci: usize) -> usize {
        debug_assert!(self.decided(ci));
        let off = layout.offsets[ci];
        (0..layout.sizes[ci])
            .find(|vi| self.bits[off + vi])
            .expect("a decided constant keeps one candidate")
    }

    /// Keeps only `vi` for `ci`. Ok(true) if anything was pruned,
    /// Err(()) if `vi` was not a candidate.
    fn assign(&mut self, layout: &Layout, ci: usize, vi: usize) -> Result<bool, ()> {
        if !self.has(layout, ci, vi) {
            return Err(());
        }
        let off = layout.offsets[ci];
        let mut changed = false;
        for v in 0..layout.sizes[ci] {
            if v != vi && self.bits[off + v] {
                self.bits[off + v] = false;
                self.remaining[ci] -= 1;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Removes candidate `vi` from `ci`. Ok(true) if it was present,
    /// Err(()) if the candidate set would become empty.
    fn remove(&mut self, layout: &Layout, ci: usize, vi: usize) -> Result<bool, ()> {
        let slot = layout.offsets[ci] + vi;
        if !self.bits[slot] {
            return Ok(false);
        }
        if self.remaining[ci] == 1 {
            return Err(());
        }
        self.bits[slot] = false;
        self.remaining[ci] -= 1;
        Ok(true)
    }
}

/// Three-valued evaluation over a partial state: a definite answer
/// holds in every total extension of the state.
fn eval3(c: &Compiled, layout: &Layout, st: &DomainState) -> Option<bool> {
    match c {
        Compiled::Atom(ci, vi) => {
            if !st.has(layout, *ci, *vi) {
                Some(false)
            } else if st.decided(*ci) {
                Some(true)
            } else {
                None
            }
        }
        Compiled::Top => Some(true),
        Compiled::Bottom => Some(false),
        Compiled::Not(g) => eval3(g, layout, st).map(|b| !b),
        Compiled::And(a, b) => match (eval3(a, layout, st), eval3(b, layout, st)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Compiled::Or(a, b) => match (eval3(a, layout, st), eval3(b, layout, st)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        Compiled::Implies(a, b) => match (eval3(a, layout, st), eval3(b, layout, st)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Compiled::Equiv(a, b) => match (eval3(a, layout, st), eval3(b, layout, st)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        },
    }
}

/// Pruning rules extracted from root-level formula shapes.
enum Rule {
    Assert(usize, usize),
    Deny(usize, usize),
    Bicond { ci: usize, vi: usize, rhs: Compiled },
}

fn classify(c: &Compiled) -> Option<Rule> {
    match c {
        Compiled::Atom(ci, vi) => Some(Rule::Assert(*ci, *vi)),
        Compiled::Not(inner) => match inner.as_ref() {
            Compiled::Atom(ci, vi) => Some(Rule::Deny(*ci, *vi)),
            _ => None,
        },
        Compiled::Equiv(a, b) => match (a.as_ref(), b.as_ref()) {
            (Compiled::Atom(ci, vi), rhs) => Some(Rule::Bicond {
                ci: *ci,
                vi: *vi,
                rhs: rhs.clone(),
            }),
            (lhs, Compiled::Atom(ci, vi)) => Some(Rule::Bicond {
                ci: *ci,
                vi: *vi,
                rhs: lhs.clone(),
            }),
            _ => None,
        },
        _ => None,
    }
}

struct Search<'a> {
    sig: &'a Arc<Signature>,
    layout: Layout,
    formulas: Vec<Compiled>,
    rules: Vec<Rule>,
    limit: Option<usize>,
    out: Vec<Interpretation>,
    stats: SearchStats,
}

enum Flow {
    Continue,
    LimitReached,
}

impl Search<'_> {
    /// Runs pruning to fixpoint; Err on a wiped-out candidate set or a
    /// formula already false under the partial state.
    fn propagate(&mut self, st: &mut DomainState) -> Result<(), ()> {
        loop {
            let mut changed = false;
            for rule in &self.rules {
                match rule {
                    Rule::Assert(ci, vi) => {
                        if st.assign(&self.layout, *ci, *vi)? {
                            changed = true;
                            self.stats.propagations += 1;
                        }
                    }
                    Rule::Deny(ci, vi) => {
                        if st.remove(&self.layout, *ci, *vi)? {
                            changed = true;
                            self.stats.propagations += 1;
                        }
                    }
                    Rule::Bicond { ci, vi, rhs } => match eval3(rhs, &self.layout, st) {
                        Some(true) => {
                            if st.assign(&self.layout, *ci, *vi)? {
                                changed = true;
                                self.stats.propagations += 1;
                            }
                        }
                        Some(false) => {
                            if st.remove(&self.layout, *ci, *vi)? {
                                changed = true;
                                self.stats.propagations += 1;
                            }
                        }
                        None => {}
                    },
                }
            }
            for f in &self.formulas {
                if eval3(f, &self.layout, st) == Some(false) {
                    return Err(());
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn run(&mut self, st: DomainState) -> Flow {
        if self.limit == Some(self.out.len()) {
            return Flow::LimitReached;
        }
        let branch = (0..self.sig.len()).find(|ci| !st.decided(*ci));
        let Some(ci) = branch else {
            let values: Vec<usize> = (0..self.sig.len())
                .map(|c| st.decided_value(&self.layout, c))
                .collect();
            debug_assert!(
                self.formulas.iter().all(|f| f.eval(&values)),
                "propagation must never decide a non-model"
            );
            self.stats.models_found += 1;
            self.out
                .push(Interpretation::new(Arc::clone(self.sig), values));
            return Flow::Continue;
        };
        for vi in 0..self.layout.sizes[ci] {
            if !st.has(&self.layout, ci, vi) {
                continue;
            }
            if self.limit == Some(self.out.len()) {
                return Flow::LimitReached;
            }
            self.stats.decisions += 1;
            let mut child = st.clone();
            child
                .assign(&self.layout, ci, vi)
                .expect("candidate was present");
            match self.propagate(&mut child) {
                Ok(()) => {
                    if let Flow::LimitReached = self.run(child) {
                        return Flow::LimitReached;
                    }
                }
                Err(()) => self.stats.conflicts += 1,
            }
        }
        Flow::Continue
    }
}

/// Enumerates models of `formulas` in canonical order, stopping after
/// `limit` models when a limit is given. The result is always a prefix
/// of the unlimited enumeration.
pub fn enumerate_models(
    sig: &Arc<Signature>,
    formulas: &[Formula],
    limit: Option<usize>,
) -> (Vec<Interpretation>, SearchStats) {
    let compiled: Vec<Compiled> = formulas
        .iter()
        .map(|f| compile(f, sig).expect("formula must be well-formed over sig"))
        .collect();
    let rules = compiled.iter().filter_map(classify).collect();
    let mut search = Search {
        sig,
        layout: Layout::of(sig),
        formulas: compiled,
        rules,
        limit,
        out: Vec::new(),
        stats: SearchStats::default(),
    };
    if limit == Some(0) {
        return (Vec::new(), search.stats);
    }
    let mut root = DomainState::full(&search.layout);
    match search.propagate(&mut root) {
        Ok(()) => {
            search.run(root);
        }
        Err(()) => search.stats.conflicts += 1,
    }
    (search.out, search.stats)
}

/// First model in canonical order, if any.
pub fn find_model(sig: &Arc<Signature>, formulas: &[Formula]) -> Option<Interpretation> {
    enumerate_models(sig, formulas, Some(1)).0.into_iter().next()
}

/// Number of models.
pub fn count_models(sig: &Arc<Signature>, formulas: &[Formula]) -> usize {
    enumerate_models(sig, formulas, None).0.len()
}
