//! Bounded synthesis: exact minimization by exhaustive candidate search.
//!
//! For `k = lower bound, lower bound + 1, …` a depth-first search builds
//! candidate filters with at most `k` states. Transitions are decided lazily
//! while exploring the product of the (deterministic) input with the subset
//! construction of the candidate: a node `(v, S)` pairs an input state with
//! the candidate states reached by the same string, and the first undecided
//! transition met in BFS order is the next branching point. Partial
//! candidates are rejected as soon as a reached set is empty, holds a color
//! the input forbids, or (for single-output targets) two states of different
//! colors are co-reached. Reached sets only grow as transitions are added, so
//! each rejection also holds for every completion.
//!
//! Symmetry breaking: state 0 is initial, states are numbered in first-use
//! order and states created by the same decision are introduced with
//! nondecreasing colors. Every candidate state carries one color.
//!
//! Witness strings from rejections are kept and replayed against later
//! partial candidates before the full exploration runs.
//!
//! Single-symbol alphabets go to a SAT encoding of the same search instead;
//! there every state has one successor set and the reached sets form one
//! sequence, which a solver refutes far faster than branching.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use indexmap::IndexMap;

use super::{
    color_lower_bound, deterministic_input, empty_result, verify, Certificate, MinimizeError, SynthesisResult,
    TargetClass, Transcript,
};
use crate::check::check_output_simulation_with;
use crate::filter::{Color, ColorSet, Filter, StateRecord, StateSet, Symbol};
use crate::limits::{Budget, Exhausted, Meter};

const REPLAY_CACHE_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum WitnessKind {
    /// In the input language; the candidate crashes or outputs a forbidden color.
    Input,
    /// Reaches two candidate states of different colors.
    SingleOutput,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Witness {
    symbols: Vec<usize>,
    kind: WitnessKind,
}

#[derive(Debug, Clone)]
struct Candidate {
    colors: Vec<Color>,
    initial: StateSet,
    delta: Vec<Vec<Option<StateSet>>>,
}

impl Candidate {
    fn used(&self) -> usize {
        self.colors.len()
    }

    fn add_state(&mut self, color: Color, symbols: usize) -> usize {
        self.colors.push(color);
        self.delta.push(vec![None; symbols]);
        self.colors.len() - 1
    }

    /// One-symbol image, or `None` while some member is undecided.
    fn step(&self, set: &StateSet, k: usize) -> Option<StateSet> {
        let mut out = Vec::new();
        for q in set.iter() {
            out.extend(self.delta[q][k].as_ref()?.iter());
        }
        Some(out.into_iter().collect())
    }

    fn distinct_colors(&self, set: &StateSet) -> usize {
        let mut cs: Vec<&Color> = set.iter().map(|q| &self.colors[q]).collect();
        cs.sort();
        cs.dedup();
        cs.len()
    }

    fn canonical(&self) -> String {
        let mut out = format!("colors={:?} initial={:?}", self.colors, self.initial.as_slice());
        for (q, row) in self.delta.iter().enumerate() {
            for (k, d) in row.iter().enumerate() {
                if let Some(set) = d {
                    out.push_str(&format!(" {q}.{k}->{:?}", set.as_slice()));
                }
            }
        }
        out
    }

    fn to_filter(&self, alphabet: &[Symbol]) -> Filter {
        let states = self
            .colors
            .iter()
            .enumerate()
            .map(|(i, c)| StateRecord::new(i.to_string(), ColorSet::singleton(c.clone())))
            .collect();
        let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
        for (q, row) in self.delta.iter().enumerate() {
            for (k, d) in row.iter().enumerate() {
                for t in d.iter().flat_map(|s| s.iter()) {
                    edges.entry((q, t)).or_default().insert(alphabet[k].clone());
                }
            }
        }
        Filter::from_raw(states, self.initial.iter(), alphabet.iter().cloned(), edges)
    }
}

enum Probe {
    Complete,
    Open { state: usize, symbol: usize, allowed: ColorSet },
    Violation(Witness),
}

struct Bfs<K> {
    index: HashMap<K, usize>,
    keys: Vec<K>,
    parent: Vec<Option<(usize, usize)>>,
}

impl<K: Clone + Eq + std::hash::Hash> Bfs<K> {
    fn new() -> Self {
        Bfs {
            index: HashMap::new(),
            keys: Vec::new(),
            parent: Vec::new(),
        }
    }

    fn discover(&mut self, key: K, parent: Option<(usize, usize)>, queue: &mut VecDeque<usize>) {
        if !self.index.contains_key(&key) {
            self.index.insert(key.clone(), self.keys.len());
            self.keys.push(key);
            self.parent.push(parent);
            queue.push_back(self.keys.len() - 1);
        }
    }

    fn path(&self, mut node: usize) -> Vec<usize> {
        let mut rev = Vec::new();
        while let Some((p, k)) = self.parent[node] {
            rev.push(k);
            node = p;
        }
        rev.reverse();
        rev
    }
}

struct Synthesizer<'a> {
    input: &'a Filter,
    target: TargetClass,
    k: usize,
    forced: Vec<Color>,
    cache: Vec<Witness>,
    cached: HashSet<Witness>,
    candidates: u64,
    replay_prunes: u64,
    transcript: Transcript,
}

impl<'a> Synthesizer<'a> {
    fn symbols(&self) -> usize {
        self.input.symbols().len()
    }

    fn v0(&self) -> usize {
        self.input.initial_set().iter().next().expect("nonempty language")
    }

    fn next_input(&self, v: usize, k: usize) -> Option<usize> {
        self.input.successors(v, k).first().copied()
    }

    /// Product of the input with the candidate's subset construction.
    fn explore(&self, cand: &Candidate) -> Probe {
        let mut bfs: Bfs<(usize, StateSet)> = Bfs::new();
        let mut queue = VecDeque::new();
        bfs.discover((self.v0(), cand.initial.clone()), None, &mut queue);
        while let Some(i) = queue.pop_front() {
            let (v, set) = bfs.keys[i].clone();
            for k in 0..self.symbols() {
                let Some(w) = self.next_input(v, k) else {
                    continue;
                };
                if let Some(q) = set.iter().find(|&q| cand.delta[q][k].is_none()) {
                    return Probe::Open {
                        state: q,
                        symbol: k,
                        allowed: self.input.colors(w).clone(),
                    };
                }
                let image = cand.step(&set, k).expect("all decided");
                let allowed = self.input.colors(w);
                if image.is_empty() || image.iter().any(|q| !allowed.contains(&cand.colors[q])) {
                    let mut symbols = bfs.path(i);
                    symbols.push(k);
                    return Probe::Violation(Witness {
                        symbols,
                        kind: WitnessKind::Input,
                    });
                }
                bfs.discover((w, image), Some((i, k)), &mut queue);
            }
        }
        Probe::Complete
    }

    /// Co-reached pairs of differently colored states over decided edges.
    fn single_output_violation(&self, cand: &Candidate) -> Option<Witness> {
        let mut bfs: Bfs<(usize, usize)> = Bfs::new();
        let mut queue = VecDeque::new();
        for p in cand.initial.iter() {
            for q in cand.initial.iter() {
                bfs.discover((p, q), None, &mut queue);
            }
        }
        while let Some(i) = queue.pop_front() {
            let (p, q) = bfs.keys[i];
            if cand.colors[p] != cand.colors[q] {
                return Some(Witness {
                    symbols: bfs.path(i),
                    kind: WitnessKind::SingleOutput,
                });
            }
            for k in 0..self.symbols() {
                let (Some(dp), Some(dq)) = (&cand.delta[p][k], &cand.delta[q][k]) else {
                    continue;
                };
                for p2 in dp.iter() {
                    for q2 in dq.iter() {
                        bfs.discover((p2, q2), Some((i, k)), &mut queue);
                    }
                }
            }
        }
        None
    }

    fn replay(&self, cand: &Candidate, w: &Witness) -> bool {
        let mut set = cand.initial.clone();
        let mut v = self.v0();
        for &k in &w.symbols {
            let Some(next) = cand.step(&set, k) else {
                return false;
            };
            set = next;
            match w.kind {
                WitnessKind::Input => {
                    let Some(nv) = self.next_input(v, k) else {
                        return false;
                    };
                    v = nv;
                    let allowed = self.input.colors(v);
                    if set.is_empty() || set.iter().any(|q| !allowed.contains(&cand.colors[q])) {
                        return true;
                    }
                }
                WitnessKind::SingleOutput => {
                    if set.is_empty() {
                        return false;
                    }
                    if cand.distinct_colors(&set) > 1 {
                        return true;
                    }
                }
            }
        }
        w.kind == WitnessKind::SingleOutput && cand.distinct_colors(&set) > 1
    }

    fn remember(&mut self, w: Witness) {
        if self.cache.len() < REPLAY_CACHE_LIMIT && self.cached.insert(w.clone()) {
            self.cache.push(w);
        }
    }

    fn hopeless(&self, cand: &Candidate) -> bool {
        let missing = self
            .forced
            .iter()
            .filter(|c| !cand.colors.contains(c))
            .count();
        missing > self.k - cand.used()
    }

    fn dfs(&mut self, cand: Candidate, meter: &mut Meter) -> Result<Option<Candidate>, Exhausted> {
        meter.tick()?;
        if self.hopeless(&cand) {
            return Ok(None);
        }
        if self.cache.iter().any(|w| self.replay(&cand, w)) {
            self.replay_prunes += 1;
            return Ok(None);
        }
        let probe = self.explore(&cand);
        if let Probe::Violation(w) = probe {
            self.remember(w);
            return Ok(None);
        }
        if self.target == TargetClass::Sso {
            if let Some(w) = self.single_output_violation(&cand) {
                self.remember(w);
                return Ok(None);
            }
        }
        match probe {
            Probe::Complete => self.finish(cand),
            Probe::Open {
                state,
                symbol,
                allowed,
            } => {
                for option in self.options(&cand, &allowed) {
                    let mut next = cand.clone();
                    let mut targets: Vec<usize> = option.existing;
                    for c in option.fresh {
                        targets.push(next.add_state(c, self.symbols()));
                    }
                    next.delta[state][symbol] = Some(targets.into_iter().collect());
                    if let Some(found) = self.dfs(next, meter)? {
                        return Ok(Some(found));
                    }
                }
                Ok(None)
            }
            Probe::Violation(_) => unreachable!(),
        }
    }

    fn finish(&mut self, cand: Candidate) -> Result<Option<Candidate>, Exhausted> {
        self.candidates += 1;
        let filter = cand.to_filter(self.input.symbols());
        let verdict = check_output_simulation_with(
            self.input,
            &filter,
            self.target == TargetClass::Sso,
            &Budget::unlimited(),
        )?;
        self.transcript
            .record(&format!("candidate {} holds={}", cand.canonical(), verdict.holds));
        if verdict.holds {
            return Ok(Some(cand));
        }
        if let Some(s) = verdict.witness {
            let symbols = s
                .symbols()
                .iter()
                .map(|y| self.input.symbol_index(y).expect("input symbol"))
                .collect();
            let kind = match verdict.reason {
                Some(crate::check::FailureReason::SSOViolation) => WitnessKind::SingleOutput,
                _ => WitnessKind::Input,
            };
            self.remember(Witness { symbols, kind });
        }
        Ok(None)
    }

    /// Branches for one undecided transition, in canonical order.
    fn options(&self, cand: &Candidate, allowed: &ColorSet) -> Vec<Choice> {
        let palette: Vec<Color> = allowed.iter().cloned().collect();
        let eligible: Vec<usize> = (0..cand.used())
            .filter(|&p| allowed.contains(&cand.colors[p]))
            .collect();
        let room = self.k - cand.used();
        let mut out = Vec::new();
        if self.target == TargetClass::Df {
            out.extend(eligible.iter().map(|&p| Choice {
                existing: vec![p],
                fresh: Vec::new(),
            }));
            if room > 0 {
                out.extend(palette.iter().map(|c| Choice {
                    existing: Vec::new(),
                    fresh: vec![c.clone()],
                }));
            }
            return out;
        }
        let subsets = ordered_subsets(&eligible);
        for j in 0..=room {
            for fresh in multisets(&palette, j) {
                for existing in &subsets {
                    out.push(Choice {
                        existing: existing.clone(),
                        fresh: fresh.clone(),
                    });
                }
            }
        }
        out
    }

    fn roots(&self) -> Vec<Candidate> {
        let palette: Vec<Color> = self.input.colors(self.v0()).iter().cloned().collect();
        let max_initial = if self.target == TargetClass::Df { 1 } else { self.k };
        let mut out = Vec::new();
        for n in 1..=max_initial {
            for colors in multisets(&palette, n) {
                let mut cand = Candidate {
                    colors: Vec::new(),
                    initial: (0..n).collect(),
                    delta: Vec::new(),
                };
                for c in colors {
                    cand.add_state(c, self.symbols());
                }
                out.push(cand);
            }
        }
        out
    }
}

struct Choice {
    existing: Vec<usize>,
    fresh: Vec<Color>,
}

/// All subsets, smallest first, lexicographic within a size.
fn ordered_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Nondecreasing sequences of length `n` over `palette`.
fn multisets(palette: &[Color], n: usize) -> Vec<Vec<Color>> {
    fn go(palette: &[Color], n: usize, from: usize, cur: &mut Vec<Color>, out: &mut Vec<Vec<Color>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in from..palette.len() {
            cur.push(palette[i].clone());
            go(palette, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(palette, n, 0, &mut Vec::new(), &mut out);
    out
}

/// Exact minimum over `target` by bounded synthesis. Nondeterministic inputs
/// are determinized first; this leaves the set of output simulators unchanged.
pub fn minimize_bounded_synthesis(
    f: &Filter,
    target: TargetClass,
    budget: &Budget,
) -> Result<SynthesisResult, MinimizeError> {
    let Some(input) = deterministic_input(f) else {
        return Ok(empty_result(f, target, "synthesis"));
    };
    if input.alphabet().len() == 1 {
        return super::unary_sat::synthesize_unary(&input, target, budget);
    }
    let lower_bound = color_lower_bound(&input).max(1);
    let mut forced: Vec<Color> = input
        .states()
        .iter()
        .filter_map(|s| s.colors.single().cloned())
        .collect();
    forced.sort();
    forced.dedup();
    let mut meter = Meter::new(budget);
    let mut syn = Synthesizer {
        input: &input,
        target,
        k: lower_bound,
        forced,
        cache: Vec::new(),
        cached: HashSet::new(),
        candidates: 0,
        replay_prunes: 0,
        transcript: Transcript::new("synthesis", target),
    };
    let upper_bound = input.state_count();
    for k in lower_bound..=upper_bound {
        syn.k = k;
        let mut found = None;
        for root in syn.roots() {
            let r = syn.dfs(root, &mut meter).map_err(|cause| MinimizeError::Exhausted {
                cause,
                lower_bound: k,
                upper_bound,
            })?;
            if r.is_some() {
                found = r;
                break;
            }
        }
        let Some(cand) = found else {
            syn.transcript.record(&format!(
                "k={k} exhausted nodes={} replay_prunes={}",
                meter.spent, syn.replay_prunes
            ));
            continue;
        };
        let minimizer = cand.to_filter(input.symbols());
        verify(&input, &minimizer, target)?;
        return Ok(SynthesisResult {
            size: minimizer.state_count(),
            minimizer,
            certificate: Certificate {
                target,
                lower_bound,
                exhausted_below: k,
                nodes: meter.spent,
                candidates_verified: syn.candidates,
                transcript_hash: syn.transcript.finish(),
            },
        });
    }
    unreachable!("the determinized input with one color per state is a solution of size |V|")
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn fix1_all_targets() {
        for t in TargetClass::ALL {
            let r = minimize_bounded_synthesis(&fix1(), t, &Budget::unlimited()).unwrap();
            assert_eq!(r.size, 4, "{t}");
        }
    }

    #[test]
    fn helpers() {
        assert_eq!(ordered_subsets(&[3, 5]), vec![vec![], vec![3], vec![5], vec![3, 5]]);
        let p = [Color::from("a"), Color::from("b")];
        assert_eq!(multisets(&p, 2).len(), 3);
        assert_eq!(multisets(&p, 0), vec![Vec::<Color>::new()]);
    }

    #[test]
    fn same_result_is_reproducible() {
        let a = minimize_bounded_synthesis(&fix1(), TargetClass::Smo, &Budget::unlimited()).unwrap();
        let b = minimize_bounded_synthesis(&fix1(), TargetClass::Smo, &Budget::unlimited()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_exhaustion_reports_bounds() {
        let err = minimize_bounded_synthesis(&fix1(), TargetClass::Smo, &Budget::nodes(2)).unwrap_err();
        assert!(matches!(err, MinimizeError::Exhausted { upper_bound: 4, .. }));
    }
}
