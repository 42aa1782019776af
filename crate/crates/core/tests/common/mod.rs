//! Fixtures and brute-force oracles shared by the integration tests.
//!
//! The oracles only read the raw edge list of a filter and recompute
//! everything else (successor sets, reached colors) on their own.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use pfilter::filter::{ColorSet, Filter, StateRecord, Symbol};
use pfilter::reduce::{random_filter, GeneratorConfig};

pub fn fix1() -> Filter {
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

pub fn fix2() -> Filter {
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

pub fn fix3() -> Filter {
    let mut b = Filter::builder().symbol("y");
    for (i, c) in ["A", "A", "B", "B", "B"].iter().enumerate() {
        b = b.state(i.to_string(), [*c]);
    }
    b = b.initial("0");
    for i in 1..5 {
        b = b.edge((i - 1).to_string(), i.to_string(), ["y"]);
    }
    b.build().unwrap()
}

pub fn fix4() -> Filter {
    Filter::builder()
        .symbol("a")
        .state("0", ["white"])
        .state("1", ["teal", "purple"])
        .initial("0")
        .edge("0", "1", ["a"])
        .build()
        .unwrap()
}

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

/// Every document in the corpus directory, sorted by file name.
pub fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

/// Successor table rebuilt from the raw edge list.
pub struct RawGraph {
    pub n: usize,
    pub initial: BTreeSet<usize>,
    pub colors: Vec<ColorSet>,
    succ: HashMap<(usize, Symbol), BTreeSet<usize>>,
}

impl RawGraph {
    pub fn of(f: &Filter) -> RawGraph {
        let mut succ: HashMap<(usize, Symbol), BTreeSet<usize>> = HashMap::new();
        for (u, v, labels) in f.edges() {
            for y in labels {
                if f.alphabet().contains(y) {
                    succ.entry((u, y.clone())).or_default().insert(v);
                }
            }
        }
        RawGraph {
            n: f.state_count(),
            initial: f.initial().clone(),
            colors: f.states().iter().map(|s| s.colors.clone()).collect(),
            succ,
        }
    }

    pub fn step(&self, set: &BTreeSet<usize>, y: &Symbol) -> BTreeSet<usize> {
        set.iter()
            .flat_map(|&u| self.succ.get(&(u, y.clone())).into_iter().flatten().copied())
            .collect()
    }

    pub fn colors_of(&self, set: &BTreeSet<usize>) -> ColorSet {
        let mut out = ColorSet::new();
        for &v in set {
            out.extend_from(&self.colors[v]);
        }
        out
    }

    pub fn reach(&self, s: &[Symbol]) -> BTreeSet<usize> {
        s.iter().fold(self.initial.clone(), |acc, y| self.step(&acc, y))
    }
}

fn render(s: &[Symbol]) -> String {
    if s.is_empty() {
        "ε".to_owned()
    } else {
        s.iter().map(|y| y.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// First failing strings (shortlex order) found by exhaustive enumeration.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BruteVerdicts {
    pub inclusion: Option<String>,
    pub compat: Option<String>,
}

impl BruteVerdicts {
    pub fn simulation(&self) -> Option<String> {
        self.inclusion.clone().or_else(|| self.compat.clone())
    }
}

/// Enumerates every string over the alphabet of `f` up to `max_len`.
/// Strings of one length that reach the same pair of state sets behave alike
/// from then on, so only the shortlex-least string per pair is extended.
/// Once the pairs of a whole level repeat an earlier level the levels cycle,
/// and enumeration stops.
pub fn brute_pair(f: &Filter, g: &Filter, max_len: usize) -> BruteVerdicts {
    let rf = RawGraph::of(f);
    let rg = RawGraph::of(g);
    let symbols: Vec<Symbol> = f.alphabet().iter().cloned().collect();
    let mut out = BruteVerdicts::default();
    let mut level: Vec<(Vec<Symbol>, BTreeSet<usize>, BTreeSet<usize>)> =
        vec![(Vec::new(), rf.initial.clone(), rg.initial.clone())];
    let mut levels_seen = BTreeSet::new();
    for len in 0..=max_len {
        let shape: BTreeSet<_> = level.iter().map(|(_, a, b)| (a.clone(), b.clone())).collect();
        if !levels_seen.insert(shape) {
            break;
        }
        let mut keep = Vec::new();
        for (s, sf, sg) in level {
            if sf.is_empty() {
                continue;
            }
            if sg.is_empty() {
                out.inclusion.get_or_insert_with(|| render(&s));
                continue;
            }
            if !rg.colors_of(&sg).is_subset(&rf.colors_of(&sf)) {
                out.compat.get_or_insert_with(|| render(&s));
            }
            keep.push((s, sf, sg));
        }
        if (out.inclusion.is_some() && out.compat.is_some()) || len == max_len {
            break;
        }
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (s, sf, sg) in &keep {
            for y in &symbols {
                let nf = rf.step(sf, y);
                let ng = rg.step(sg, y);
                if seen.insert((nf.clone(), ng.clone())) {
                    let mut t = s.clone();
                    t.push(y.clone());
                    next.push((t, nf, ng));
                }
            }
        }
        level = next;
    }
    out
}

/// First in-language string whose output is not a single color.
pub fn brute_sso(f: &Filter, max_len: usize) -> Option<String> {
    let rf = RawGraph::of(f);
    let symbols: Vec<Symbol> = f.alphabet().iter().cloned().collect();
    let mut level = vec![(Vec::<Symbol>::new(), rf.initial.clone())];
    let mut levels_seen = BTreeSet::new();
    for len in 0..=max_len {
        level.retain(|(_, set)| !set.is_empty());
        if !levels_seen.insert(level.iter().map(|(_, set)| set.clone()).collect::<BTreeSet<_>>()) {
            break;
        }
        if let Some((s, _)) = level.iter().find(|(_, set)| rf.colors_of(set).len() != 1) {
            return Some(render(s));
        }
        if len == max_len {
            break;
        }
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (s, set) in &level {
            for y in &symbols {
                let n = rf.step(set, y);
                if seen.insert(n.clone()) {
                    let mut t = s.clone();
                    t.push(y.clone());
                    next.push((t, n));
                }
            }
        }
        level = next;
    }
    None
}

/// Universality by subset construction: every reachable subset is nonempty.
pub fn brute_universal(f: &Filter) -> bool {
    let rf = RawGraph::of(f);
    let mut seen = BTreeSet::from([rf.initial.clone()]);
    let mut stack = vec![rf.initial.clone()];
    while let Some(set) = stack.pop() {
        if set.is_empty() {
            return false;
        }
        for y in f.alphabet() {
            let n = rf.step(&set, y);
            if seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    true
}

/// Largest family of in-language strings (length ≤ `max_len`) whose output
/// sets are pairwise disjoint. Any output simulator has at least this many
/// states.
pub fn disjoint_output_clique(f: &Filter, max_len: usize) -> usize {
    let rf = RawGraph::of(f);
    let symbols: Vec<Symbol> = f.alphabet().iter().cloned().collect();
    let mut sets: BTreeSet<ColorSet> = BTreeSet::new();
    let mut level = vec![rf.initial.clone()];
    for _ in 0..=max_len {
        level.retain(|s| !s.is_empty());
        sets.extend(level.iter().map(|s| rf.colors_of(s)));
        level = level
            .iter()
            .flat_map(|s| symbols.iter().map(|y| rf.step(s, y)))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
    }
    let sets: Vec<ColorSet> = sets.into_iter().collect();
    fn grow(sets: &[ColorSet], from: usize, chosen: &mut Vec<usize>, best: &mut usize) {
        *best = (*best).max(chosen.len());
        for i in from..sets.len() {
            if chosen.iter().all(|&j| sets[j].intersection(&sets[i]).is_empty()) {
                chosen.push(i);
                grow(sets, i + 1, chosen, best);
                chosen.pop();
            }
        }
    }
    let mut best = 0;
    grow(&sets, 0, &mut Vec::new(), &mut best);
    best
}

/// Every filter on `n` states over `symbols` whose initial set is one of
/// `initials`, all states colored `x`.
pub fn all_graphs(n: usize, symbols: &[&str], initials: &[Vec<usize>]) -> Vec<Filter> {
    let slots: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|u| (0..n).flat_map(move |v| (0..symbols.len()).map(move |k| (u, v, k))))
        .collect();
    let mut out = Vec::new();
    for init in initials {
        for mask in 0u64..(1 << slots.len()) {
            let mut edges: Vec<((usize, usize), BTreeSet<Symbol>)> = Vec::new();
            for (bit, &(u, v, k)) in slots.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    edges.push(((u, v), BTreeSet::from([Symbol::from(symbols[k])])));
                }
            }
            let states = (0..n)
                .map(|i| StateRecord::new(i.to_string(), ColorSet::from_iter(["x"])))
                .collect();
            out.push(Filter::from_raw(
                states,
                init.iter().copied(),
                symbols.iter().map(|&y| Symbol::from(y)),
                edges,
            ));
        }
    }
    out
}

/// Nonempty subsets of `0..n`.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// All subsets of `0..n`, including the empty one.
pub fn all_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << n))
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Seeded configuration with sizes drawn from the seed itself.
pub fn random_config(seed: u64, max_states: usize, max_symbols: usize, max_colors: usize) -> GeneratorConfig {
    let mix = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
    GeneratorConfig {
        seed,
        state_count: 1 + (mix % max_states as u64) as usize,
        alphabet_size: 1 + ((mix >> 8) % max_symbols as u64) as usize,
        color_count: 1 + ((mix >> 16) % max_colors as u64) as usize,
        edge_density: [0.2, 0.35, 0.5][((mix >> 24) % 3) as usize],
        colors_per_state: 1 + ((mix >> 28) % 2) as usize,
        ..GeneratorConfig::default()
    }
}

pub fn random(cfg: &GeneratorConfig) -> Filter {
    random_filter(cfg).unwrap()
}
