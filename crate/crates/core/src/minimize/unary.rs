//! Minimization over a single-symbol alphabet.
//!
//! A reachable tracing-deterministic unary filter is a chain, possibly
//! closed into a cycle (a lasso). A chain of `k` states followed by a cycle
//! of `m` states answers every question a plain chain of `k + m` states
//! does, so it is enough to try lassos by increasing size. Each lasso fixes
//! which lengths share a state; it is feasible iff the colors allowed at
//! those lengths have a common element.
//!
//! Nondeterminism does not help here: any output simulator with `k` states
//! traces, for the longest strings, a run that revisits a state within `k`
//! steps, and the lasso formed by that run already output simulates the
//! input. The same minimum therefore holds for all three target classes.

use std::collections::BTreeSet;

use indexmap::IndexMap;

use super::{deterministic_input, empty_result, verify, Certificate, MinimizeError, SynthesisResult, TargetClass, Transcript};
use crate::filter::{prune_unreachable, Color, ColorSet, Filter, StateRecord, Symbol};

/// A chain of `chain_len` states feeding a cycle of `cycle_len` states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnaryShape {
    pub chain_len: usize,
    pub cycle_len: usize,
}

impl UnaryShape {
    pub fn size(&self) -> usize {
        self.chain_len + self.cycle_len
    }

    /// State occupied after reading `len` symbols.
    pub fn position(&self, len: usize) -> usize {
        if len < self.chain_len {
            len
        } else {
            self.chain_len + (len - self.chain_len) % self.cycle_len
        }
    }
}

/// A feasible shape with one color per position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryCandidate {
    pub shape: UnaryShape,
    pub colors: Vec<Color>,
}

/// The run of a deterministic unary filter: `run[i]` is the state after `i`
/// symbols; if the run loops, it re-enters `run[loop_start]`.
pub(super) struct Lasso {
    pub(super) run: Vec<usize>,
    pub(super) loop_start: Option<usize>,
}

impl Lasso {
    pub(super) fn of(f: &Filter) -> Lasso {
        let mut run = Vec::new();
        let mut cur = f.initial_set().iter().next();
        while let Some(v) = cur {
            if let Some(j) = run.iter().position(|&u| u == v) {
                return Lasso { run, loop_start: Some(j) };
            }
            run.push(v);
            cur = f.successors(v, 0).first().copied();
        }
        Lasso { run, loop_start: None }
    }

    pub(super) fn state_at(&self, len: usize) -> Option<usize> {
        if len < self.run.len() {
            return Some(self.run[len]);
        }
        let start = self.loop_start?;
        let period = self.run.len() - start;
        Some(self.run[start + (len - start) % period])
    }

    /// Lengths beyond which (input state, shape position) pairs repeat.
    fn horizon(&self, shape: UnaryShape) -> usize {
        match self.loop_start {
            None => self.run.len(),
            Some(start) => {
                let period = self.run.len() - start;
                start + shape.chain_len + lcm(period, shape.cycle_len)
            }
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Shapes in the order they are tried: by size, then shorter cycle first.
/// For a deterministic input of `n` states this has at most `(n + 1)·n` entries.
pub fn unary_shapes(n: usize) -> impl Iterator<Item = UnaryShape> {
    (1..=2 * n).flat_map(move |size| {
        (1..=size.min(n)).filter_map(move |cycle_len| {
            let chain_len = size - cycle_len;
            (chain_len <= n).then_some(UnaryShape { chain_len, cycle_len })
        })
    })
}

/// Colors per position when `shape` can output simulate the deterministic
/// unary filter `f`.
pub fn fit_unary_shape(f: &Filter, shape: UnaryShape) -> Option<UnaryCandidate> {
    let lasso = Lasso::of(f);
    fit(f, &lasso, shape)
}

fn fit(f: &Filter, lasso: &Lasso, shape: UnaryShape) -> Option<UnaryCandidate> {
    let mut allowed: Vec<Option<ColorSet>> = vec![None; shape.size()];
    for len in 0..lasso.horizon(shape) {
        let v = lasso.state_at(len).expect("within horizon");
        let slot = &mut allowed[shape.position(len)];
        let next = match slot.take() {
            None => f.colors(v).clone(),
            Some(cs) => cs.intersection(f.colors(v)),
        };
        if next.is_empty() {
            return None;
        }
        *slot = Some(next);
    }
    let fallback = f.color_universe().first().cloned().expect("nonempty filter");
    let colors = allowed
        .into_iter()
        .map(|cs| cs.and_then(|c| c.first().cloned()).unwrap_or_else(|| fallback.clone()))
        .collect();
    Some(UnaryCandidate { shape, colors })
}

fn lasso_filter(c: &UnaryCandidate, symbol: &Symbol) -> Filter {
    let n = c.shape.size();
    let states = c
        .colors
        .iter()
        .enumerate()
        .map(|(i, col)| StateRecord::new(i.to_string(), ColorSet::singleton(col.clone())))
        .collect();
    let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
    for i in 0..n {
        let j = if i + 1 < n { i + 1 } else { c.shape.chain_len };
        edges.entry((i, j)).or_default().insert(symbol.clone());
    }
    Filter::from_raw(states, [0], [symbol.clone()], edges)
}

fn run(det: &Filter, target: TargetClass) -> Result<SynthesisResult, MinimizeError> {
    let n = det.state_count();
    let lasso = Lasso::of(det);
    let mut transcript = Transcript::new("unary", target);
    let mut tried = 0u64;
    for shape in unary_shapes(n) {
        tried += 1;
        let Some(cand) = fit(det, &lasso, shape) else {
            continue;
        };
        transcript.record(&format!(
            "shape chain={} cycle={} colors={:?} after {tried} shapes",
            shape.chain_len, shape.cycle_len, cand.colors
        ));
        let minimizer = lasso_filter(&cand, &det.symbols()[0]);
        verify(det, &minimizer, target)?;
        return Ok(SynthesisResult {
            size: shape.size(),
            minimizer,
            certificate: Certificate {
                target,
                lower_bound: super::color_lower_bound(det),
                exhausted_below: shape.size(),
                nodes: tried,
                candidates_verified: 1,
                transcript_hash: transcript.finish(),
            },
        });
    }
    unreachable!("the chain of the input run followed by a 1-cycle is always feasible")
}

/// Minimal deterministic output simulator of a deterministic unary filter.
/// `certificate.nodes` is the number of shapes tried.
pub fn minimize_unary_df(f: &Filter) -> Result<SynthesisResult, MinimizeError> {
    if f.alphabet().len() != 1 {
        return Err(MinimizeError::NotUnary);
    }
    if !f.is_tracing_deterministic() {
        return Err(MinimizeError::NotDeterministic);
    }
    let det = prune_unreachable(f);
    if det.state_count() == 0 {
        return Ok(empty_result(f, TargetClass::Df, "unary"));
    }
    run(&det, TargetClass::Df)
}

/// Minimal output simulator of any unary filter, for any target class.
pub fn minimize_unary_any(f: &Filter, target: TargetClass) -> Result<SynthesisResult, MinimizeError> {
    if f.alphabet().len() != 1 {
        return Err(MinimizeError::NotUnary);
    }
    let Some(det) = deterministic_input(f) else {
        return Ok(empty_result(f, target, "unary"));
    };
    run(&det, target)
}
