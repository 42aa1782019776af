//! Decision procedures over filters.
//!
//! Every procedure explores its state space breadth first with symbols in
//! lexicographic order, so a failing verdict carries the shortest witness
//! string, ties broken lexicographically.
//!
//! Language inclusion and general output compatibility search over subsets
//! of states and may be exponential; their `_with` variants take a
//! [`Budget`]. String single-output membership and the single-output fast
//! path only inspect a tensor product and are polynomial.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::filter::{Filter, StateSet};
use crate::limits::{Budget, Exhausted, Meter};
use crate::product::tensor_product;
use crate::search::ShortlexBfs;
use crate::trace::ObservationString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FailureReason {
    LanguageGap,
    OutputConflict,
    SSOViolation,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureReason::LanguageGap => "language gap",
            FailureReason::OutputConflict => "output conflict",
            FailureReason::SSOViolation => "string single-output violation",
        })
    }
}

/// Outcome of a check. `witness` and `reason` are present iff the property
/// fails. `explored` counts the search nodes visited.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimVerdict {
    pub holds: bool,
    pub witness: Option<ObservationString>,
    pub reason: Option<FailureReason>,
    pub explored: usize,
}

impl SimVerdict {
    pub fn pass(explored: usize) -> Self {
        SimVerdict {
            holds: true,
            witness: None,
            reason: None,
            explored,
        }
    }

    pub fn fail(reason: FailureReason, witness: ObservationString, explored: usize) -> Self {
        SimVerdict {
            holds: false,
            witness: Some(witness),
            reason: Some(reason),
            explored,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Exhausted(#[from] Exhausted),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

fn witness(f: &Filter, path: Vec<usize>) -> ObservationString {
    path.into_iter().map(|k| f.symbols()[k].clone()).collect()
}

/// Maps each symbol index of `f` to the index of the same symbol in `g`.
fn symbol_map(f: &Filter, g: &Filter) -> Vec<Option<usize>> {
    f.symbols().iter().map(|y| g.symbol_index(y)).collect()
}

fn step_mapped(g: &Filter, set: &StateSet, k: Option<usize>) -> StateSet {
    match k {
        Some(k) => g.step(set, k),
        None => StateSet::new(),
    }
}

/// Decides whether every in-language string has exactly one output color.
///
/// Works on the self-product: a reachable pair `(v, w)` means one string
/// reaches both `v` and `w`, so the filter is string single-output iff every
/// reachable pair consists of two single-color states with the same color.
/// Diagonal pairs cover the multi-color state test.
pub fn check_sso(f: &Filter) -> SimVerdict {
    let pg = tensor_product(f, f);
    for (i, &(v, w)) in pg.nodes().iter().enumerate() {
        let cv = f.colors(v);
        let cw = f.colors(w);
        if cv.len() != 1 || cw.len() != 1 || cv != cw {
            return SimVerdict::fail(
                FailureReason::SSOViolation,
                pg.access_string(i),
                i + 1,
            );
        }
    }
    SimVerdict::pass(pg.node_count())
}

/// Decides `L(f) ⊆ L(g)`.
pub fn check_language_inclusion(f: &Filter, g: &Filter) -> SimVerdict {
    check_language_inclusion_with(f, g, &Budget::unlimited()).expect("unlimited budget")
}

/// Budgeted [`check_language_inclusion`]. Searches pairs `(v, S)` where `v`
/// is a state of `f` and `S` is the set of `g` states reached by the same
/// string; reaching an empty `S` exhibits a string of `f` that `g` rejects.
pub fn check_language_inclusion_with(
    f: &Filter,
    g: &Filter,
    budget: &Budget,
) -> Result<SimVerdict, Exhausted> {
    let mut meter = Meter::new(budget);
    let map = symbol_map(f, g);
    let mut bfs: ShortlexBfs<(usize, StateSet)> = ShortlexBfs::new();
    let g0 = g.initial_set();
    for v in f.initial_set().iter() {
        bfs.root((v, g0.clone()));
        if g0.is_empty() {
            return Ok(SimVerdict::fail(
                FailureReason::LanguageGap,
                ObservationString::empty(),
                bfs.len(),
            ));
        }
    }
    bfs.seal();
    while let Some(group) = bfs.next_group() {
        for (k, &kg) in map.iter().enumerate() {
            for &i in &group {
                meter.tick()?;
                let (v, set) = bfs.keys[i].clone();
                let targets = f.successors(v, k);
                if targets.is_empty() {
                    continue;
                }
                let image = step_mapped(g, &set, kg);
                for &v2 in targets {
                    let (j, fresh) = bfs.discover((v2, image.clone()), i, k);
                    if fresh && image.is_empty() {
                        return Ok(SimVerdict::fail(
                            FailureReason::LanguageGap,
                            witness(f, bfs.path(j)),
                            bfs.len(),
                        ));
                    }
                }
            }
            bfs.seal();
        }
    }
    Ok(SimVerdict::pass(bfs.len()))
}

/// Decides whether `outputs(g, s) ⊆ outputs(f, s)` for every `s` in
/// `L(f) ∩ L(g)`. Strings outside `L(g)` are the inclusion check's concern.
pub fn check_output_compat_general(f: &Filter, g: &Filter) -> SimVerdict {
    check_output_compat_general_with(f, g, &Budget::unlimited()).expect("unlimited budget")
}

pub fn check_output_compat_general_with(
    f: &Filter,
    g: &Filter,
    budget: &Budget,
) -> Result<SimVerdict, Exhausted> {
    let mut meter = Meter::new(budget);
    let map = symbol_map(f, g);
    let mut bfs: ShortlexBfs<(StateSet, StateSet)> = ShortlexBfs::new();
    let violates = |sf: &StateSet, sg: &StateSet| !g.colors_of(sg).is_subset(&f.colors_of(sf));
    let (f0, g0) = (f.initial_set(), g.initial_set());
    if f0.is_empty() || g0.is_empty() {
        return Ok(SimVerdict::pass(0));
    }
    if violates(&f0, &g0) {
        return Ok(SimVerdict::fail(
            FailureReason::OutputConflict,
            ObservationString::empty(),
            1,
        ));
    }
    bfs.root((f0, g0));
    bfs.seal();
    // one node per string class, so plain symbol order already gives shortlex
    while let Some(group) = bfs.next_group() {
        for &i in &group {
            meter.tick()?;
            let (sf, sg) = bfs.keys[i].clone();
            for (k, &kg) in map.iter().enumerate() {
                let nf = f.step(&sf, k);
                if nf.is_empty() {
                    continue;
                }
                let ng = step_mapped(g, &sg, kg);
                if ng.is_empty() {
                    continue;
                }
                let bad = violates(&nf, &ng);
                let (j, fresh) = bfs.discover((nf, ng), i, k);
                bfs.seal();
                if fresh && bad {
                    return Ok(SimVerdict::fail(
                        FailureReason::OutputConflict,
                        witness(f, bfs.path(j)),
                        bfs.len(),
                    ));
                }
            }
        }
    }
    Ok(SimVerdict::pass(bfs.len()))
}

/// Polynomial output compatibility for a string single-output `f`.
///
/// For such `f` every string reaches states of one common color, so a
/// reachable product pair `(v, w)` with `c(w) ⊄ c(v)` is a conflict and no
/// other kind exists. Explores at most `|V(f)|·|V(g)|` pairs.
pub fn check_output_compat_sso_fast(f: &Filter, g: &Filter) -> Result<SimVerdict, CheckError> {
    let sso = check_sso(f);
    if !sso.holds {
        return Err(CheckError::PreconditionViolated(format!(
            "left filter is not string single-output (witness: {})",
            sso.witness.unwrap_or_default()
        )));
    }
    let pg = tensor_product(f, g);
    for (i, &(v, w)) in pg.nodes().iter().enumerate() {
        if !g.colors(w).is_subset(f.colors(v)) {
            return Ok(SimVerdict::fail(
                FailureReason::OutputConflict,
                pg.access_string(i),
                pg.node_count(),
            ));
        }
    }
    Ok(SimVerdict::pass(pg.node_count()))
}

/// Decides whether `g` output simulates `f`: language inclusion, output
/// compatibility, and string single-output membership of `g` when
/// `require_sso` is set. The reason field names the first failing condition
/// in that order.
pub fn check_output_simulation(f: &Filter, g: &Filter, require_sso: bool) -> SimVerdict {
    check_output_simulation_with(f, g, require_sso, &Budget::unlimited()).expect("unlimited budget")
}

pub fn check_output_simulation_with(
    f: &Filter,
    g: &Filter,
    require_sso: bool,
    budget: &Budget,
) -> Result<SimVerdict, Exhausted> {
    let inclusion = check_language_inclusion_with(f, g, budget)?;
    let mut explored = inclusion.explored;
    if !inclusion.holds {
        return Ok(inclusion);
    }
    let compat = match check_output_compat_sso_fast(f, g) {
        Ok(v) => v,
        Err(CheckError::PreconditionViolated(_)) => check_output_compat_general_with(f, g, budget)?,
        Err(CheckError::Exhausted(e)) => return Err(e),
    };
    explored += compat.explored;
    if !compat.holds {
        return Ok(SimVerdict { explored, ..compat });
    }
    if require_sso {
        let sso = check_sso(g);
        explored += sso.explored;
        if !sso.holds {
            return Ok(SimVerdict { explored, ..sso });
        }
    }
    Ok(SimVerdict::pass(explored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::{Color, ColorSet};

    fn fix1() -> Filter {
        Filter::builder()
            .symbols(["a", "x", "y"])
            .state("0", ["white"])
            .state("1", ["blue"])
            .state("2", ["green"])
            .state("3", ["red"])
            .state("4", ["orange"])
            .state("5", ["lime"])
            .initial("0")
            .edge("0", "1", ["a"])
            .edge("0", "3", ["a"])
            .edge("1", "2", ["x"])
            .edge("2", "5", ["y"])
            .edge("3", "4", ["x"])
            .build()
            .unwrap()
    }

    fn fix2() -> Filter {
        Filter::builder()
            .symbols(["a", "x", "y"])
            .state("0", ["white"])
            .state("1", ["blue"])
            .state("2", ["green"])
            .state("3", ["lime"])
            .initial("0")
            .edge("0", "1", ["a"])
            .edge("1", "2", ["x"])
            .edge("2", "3", ["y"])
            .build()
            .unwrap()
    }

    fn fix4() -> Filter {
        Filter::builder()
            .symbol("a")
            .state("0", ["white"])
            .state("1", ["teal", "purple"])
            .initial("0")
            .edge("0", "1", ["a"])
            .build()
            .unwrap()
    }

    fn word(s: &str) -> ObservationString {
        s.split_whitespace().collect()
    }

    #[test]
    fn sso_verdicts() {
        let v = check_sso(&fix1());
        assert!(!v.holds);
        assert_eq!(v.witness, Some(word("a")));
        assert_eq!(v.reason, Some(FailureReason::SSOViolation));
        assert!(check_sso(&fix2()).holds);
        assert_eq!(check_sso(&fix4()).witness, Some(word("a")));
    }

    #[test]
    fn inclusion_verdicts() {
        assert!(check_language_inclusion(&fix1(), &fix2()).holds);
        assert!(check_language_inclusion(&fix2(), &fix1()).holds);
        let looped = Filter::builder()
            .symbol("y")
            .state("0", ["c"])
            .initial("0")
            .edge("0", "0", ["y"])
            .build()
            .unwrap();
        let dead = Filter::builder()
            .symbol("y")
            .state("0", ["c"])
            .initial("0")
            .build()
            .unwrap();
        let v = check_language_inclusion(&looped, &dead);
        assert_eq!(v.witness, Some(word("y")));
        assert_eq!(v.reason, Some(FailureReason::LanguageGap));
    }

    #[test]
    fn empty_initial_right_fails_on_epsilon() {
        let no_init = Filter::builder().symbol("y").state("0", ["c"]).build().unwrap();
        let v = check_language_inclusion(&fix2(), &no_init);
        assert_eq!(v.witness, Some(ObservationString::empty()));
        assert!(check_language_inclusion(&no_init, &fix2()).holds);
    }

    #[test]
    fn symbol_missing_from_right_alphabet_is_a_gap() {
        let g = Filter::builder()
            .symbols(["a", "x"])
            .state("0", ["white"])
            .state("1", ["blue"])
            .state("2", ["green"])
            .initial("0")
            .edge("0", "1", ["a"])
            .edge("1", "2", ["x"])
            .build()
            .unwrap();
        let v = check_language_inclusion(&fix2(), &g);
        assert_eq!(v.witness, Some(word("a x y")));
    }

    #[test]
    fn general_compat_verdicts() {
        assert!(check_output_compat_general(&fix1(), &fix2()).holds);
        let v = check_output_compat_general(&fix2(), &fix1());
        assert_eq!(v.witness, Some(word("a")));
        assert_eq!(v.reason, Some(FailureReason::OutputConflict));
        for f in [fix1(), fix2(), fix4()] {
            assert!(check_output_compat_general(&f, &f).holds);
        }
    }

    #[test]
    fn fast_compat_verdicts() {
        let f = fix2();
        assert!(check_output_compat_sso_fast(&f, &f).unwrap().holds);
        let g = f.recolored(|i, s| {
            if i == 1 {
                ColorSet::singleton(Color::from("red"))
            } else {
                s.colors.clone()
            }
        });
        let v = check_output_compat_sso_fast(&f, &g).unwrap();
        assert_eq!(v.witness, Some(word("a")));
        assert!(matches!(
            check_output_compat_sso_fast(&fix1(), &f),
            Err(CheckError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn simulation_verdicts() {
        assert!(check_output_simulation(&fix1(), &fix2(), true).holds);
        let v = check_output_simulation(&fix1(), &fix1(), true);
        assert_eq!(v.reason, Some(FailureReason::SSOViolation));
        assert!(check_output_simulation(&fix1(), &fix1(), false).holds);
    }

    #[test]
    fn budget_is_reported_distinctly() {
        let r = check_language_inclusion_with(&fix1(), &fix2(), &Budget::nodes(1));
        assert_eq!(r, Err(Exhausted::Nodes(1)));
    }
}
