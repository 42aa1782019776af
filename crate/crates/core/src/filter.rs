//! The filter data model.
//!
//! A [`Filter`] is a graph whose edges are labeled with sets of observation
//! [`Symbol`]s and whose states carry nonempty sets of output [`Color`]s. The
//! set of all colors is not stored; it is the union of the per-state sets.
//!
//! States are addressed by dense indices (`0..state_count()`) inside the
//! library and by their textual identifiers at the document boundary.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! text_atom {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(token: impl Into<String>) -> Self {
                $name(token.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(token: &str) -> Self {
                $name(token.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(token: String) -> Self {
                $name(token)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

text_atom!(
    /// An observation token. Symbols compare by exact token equality and are
    /// totally ordered lexicographically.
    Symbol
);
text_atom!(
    /// An output token, ordered lexicographically like [`Symbol`].
    Color
);

/// A set of colors, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColorSet(BTreeSet<Color>);

impl ColorSet {
    pub fn new() -> Self {
        ColorSet(BTreeSet::new())
    }

    pub fn singleton(color: Color) -> Self {
        ColorSet(BTreeSet::from([color]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, color: &Color) -> bool {
        self.0.contains(color)
    }

    pub fn insert(&mut self, color: Color) -> bool {
        self.0.insert(color)
    }

    pub fn extend_from(&mut self, other: &ColorSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn is_subset(&self, other: &ColorSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn intersection(&self, other: &ColorSet) -> ColorSet {
        ColorSet(self.0.intersection(&other.0).cloned().collect())
    }

    /// Lexicographically least member.
    pub fn first(&self) -> Option<&Color> {
        self.0.iter().next()
    }

    pub fn last(&self) -> Option<&Color> {
        self.0.iter().next_back()
    }

    /// The unique member, when there is exactly one.
    pub fn single(&self) -> Option<&Color> {
        if self.0.len() == 1 {
            self.first()
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Color> + '_ {
        self.0.iter()
    }
}

impl FromIterator<Color> for ColorSet {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        ColorSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for ColorSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        ColorSet(iter.into_iter().map(Color::from).collect())
    }
}

impl fmt::Display for ColorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

/// A canonical (sorted, deduplicated) set of state indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateSet(Vec<usize>);

impl StateSet {
    pub fn new() -> Self {
        StateSet(Vec::new())
    }

    pub fn singleton(state: usize) -> Self {
        StateSet(vec![state])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.0.binary_search(&state).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.0.iter().all(|&s| other.contains(s))
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        self.iter().chain(other.iter()).collect()
    }
}

impl FromIterator<usize> for StateSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        StateSet(v)
    }
}

/// One state: a stable identifier and its color set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateRecord {
    pub id: String,
    pub colors: ColorSet,
}

impl StateRecord {
    pub fn new(id: impl Into<String>, colors: ColorSet) -> Self {
        StateRecord {
            id: id.into(),
            colors,
        }
    }
}

/// A violated structural invariant, naming the offending element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    DuplicateId { id: String },
    EmptyColorSet { state: String },
    EmptyColorToken { state: String },
    EmptySymbolToken,
    UnknownInitial { index: usize },
    DanglingEdge { from: usize, to: usize },
    UnknownSymbol { from: String, to: String, symbol: Symbol },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate state id `{id}`"),
            Violation::EmptyColorSet { state } => write!(f, "state `{state}` has an empty color set"),
            Violation::EmptyColorToken { state } => {
                write!(f, "state `{state}` has an empty color token")
            }
            Violation::EmptySymbolToken => write!(f, "alphabet contains an empty symbol token"),
            Violation::UnknownInitial { index } => {
                write!(f, "initial state index {index} is not a declared state")
            }
            Violation::DanglingEdge { from, to } => {
                write!(f, "edge {from} -> {to} references an undeclared state")
            }
            Violation::UnknownSymbol { from, to, symbol } => {
                write!(f, "edge `{from}` -> `{to}` uses symbol `{symbol}` outside the alphabet")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("unknown state id `{id}` in {context}")]
    UnknownState { id: String, context: String },
    #[error("filter violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("filter has no initial state")]
    EmptyInitial,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// A procrustean filter.
///
/// Instances are immutable; every transform returns a new filter. Equality is
/// structural: same states in the same order, same initial set, alphabet and
/// edge labels (edge insertion order is ignored).
#[derive(Debug, Clone)]
pub struct Filter {
    states: Vec<StateRecord>,
    initial: BTreeSet<usize>,
    alphabet: BTreeSet<Symbol>,
    edges: IndexMap<(usize, usize), BTreeSet<Symbol>>,
    // derived: sorted alphabet and successor lists per (state, symbol index)
    symbols: Vec<Symbol>,
    succ: Vec<Vec<Vec<usize>>>,
}

impl PartialEq for Filter {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.initial == other.initial
            && self.alphabet == other.alphabet
            && self.edges == other.edges
    }
}

impl Eq for Filter {}

impl Filter {
    /// Assembles a filter without validating it. Edges listed twice for the
    /// same ordered pair are merged; empty label sets are dropped.
    pub fn from_raw(
        states: Vec<StateRecord>,
        initial: impl IntoIterator<Item = usize>,
        alphabet: impl IntoIterator<Item = Symbol>,
        edges: impl IntoIterator<Item = ((usize, usize), BTreeSet<Symbol>)>,
    ) -> Filter {
        let mut merged: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
        for (pair, labels) in edges {
            if labels.is_empty() {
                continue;
            }
            merged.entry(pair).or_default().extend(labels);
        }
        let alphabet: BTreeSet<Symbol> = alphabet.into_iter().collect();
        let symbols: Vec<Symbol> = alphabet.iter().cloned().collect();
        let n = states.len();
        let mut succ = vec![vec![Vec::new(); symbols.len()]; n];
        for (&(u, v), labels) in &merged {
            if u >= n || v >= n {
                continue;
            }
            for y in labels {
                if let Ok(k) = symbols.binary_search(y) {
                    succ[u][k].push(v);
                }
            }
        }
        for row in &mut succ {
            for targets in row.iter_mut() {
                targets.sort_unstable();
                targets.dedup();
            }
        }
        Filter {
            states,
            initial: initial.into_iter().collect(),
            alphabet,
            edges: merged,
            symbols,
            succ,
        }
    }

    /// Like [`Filter::from_raw`] but rejects filters that fail [`validate`].
    pub fn new(
        states: Vec<StateRecord>,
        initial: impl IntoIterator<Item = usize>,
        alphabet: impl IntoIterator<Item = Symbol>,
        edges: impl IntoIterator<Item = ((usize, usize), BTreeSet<Symbol>)>,
    ) -> Result<Filter, FilterError> {
        let f = Filter::from_raw(states, initial, alphabet, edges);
        let violations = validate(&f);
        if violations.is_empty() {
            Ok(f)
        } else {
            Err(FilterError::Invalid(violations))
        }
    }

    pub fn builder() -> FilterBuilder {
        FilterBuilder::default()
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateRecord] {
        &self.states
    }

    pub fn id(&self, state: usize) -> &str {
        &self.states[state].id
    }

    pub fn colors(&self, state: usize) -> &ColorSet {
        &self.states[state].colors
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.states.iter().position(|s| s.id == id)
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn initial_set(&self) -> StateSet {
        self.initial.iter().copied().filter(|&v| v < self.states.len()).collect()
    }

    pub fn alphabet(&self) -> &BTreeSet<Symbol> {
        &self.alphabet
    }

    /// The alphabet as a sorted slice; positions are the symbol indices used
    /// by [`Filter::successors`].
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn symbol_index(&self, symbol: &Symbol) -> Option<usize> {
        self.symbols.binary_search(symbol).ok()
    }

    /// Edges in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<Symbol>)> + '_ {
        self.edges.iter().map(|(&(u, v), l)| (u, v, l))
    }

    pub fn edge_labels(&self, from: usize, to: usize) -> Option<&BTreeSet<Symbol>> {
        self.edges.get(&(from, to))
    }

    pub fn successors(&self, state: usize, symbol: usize) -> &[usize] {
        &self.succ[state][symbol]
    }

    /// One-symbol image of a state set.
    pub fn step(&self, set: &StateSet, symbol: usize) -> StateSet {
        set.iter()
            .flat_map(|v| self.succ[v][symbol].iter().copied())
            .collect()
    }

    /// Union of the color sets of the given states.
    pub fn colors_of(&self, set: &StateSet) -> ColorSet {
        let mut out = ColorSet::new();
        for v in set.iter() {
            out.extend_from(&self.states[v].colors);
        }
        out
    }

    /// Union of all state colors.
    pub fn color_universe(&self) -> ColorSet {
        let mut out = ColorSet::new();
        for s in &self.states {
            out.extend_from(&s.colors);
        }
        out
    }

    /// Returns a copy with each state's colors replaced by `recolor`.
    pub fn recolored(&self, mut recolor: impl FnMut(usize, &StateRecord) -> ColorSet) -> Filter {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| StateRecord::new(s.id.clone(), recolor(i, s)))
            .collect();
        Filter {
            states,
            ..self.clone()
        }
    }

    /// Returns a copy with every state colored `color`.
    pub fn uniformly_colored(&self, color: &Color) -> Filter {
        self.recolored(|_, _| ColorSet::singleton(color.clone()))
    }

    /// Returns a copy with state identifiers replaced by `rename`.
    pub fn relabeled(&self, mut rename: impl FnMut(usize, &StateRecord) -> String) -> Filter {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| StateRecord::new(rename(i, s), s.colors.clone()))
            .collect();
        Filter {
            states,
            ..self.clone()
        }
    }

    pub fn is_tracing_deterministic(&self) -> bool {
        self.initial.len() == 1
            && self
                .succ
                .iter()
                .all(|row| row.iter().all(|targets| targets.len() <= 1))
    }

    pub fn is_vertex_single_output(&self) -> bool {
        self.states.iter().all(|s| s.colors.len() == 1)
    }

    /// Reachability flag per state, from the initial set.
    pub fn reachable(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &v in &self.initial {
            if v < n && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
        while let Some(u) = queue.pop_front() {
            for targets in &self.succ[u] {
                for &v in targets {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        seen
    }
}

/// Incremental construction by state identifier.
#[derive(Debug, Clone, Default)]
pub struct FilterBuilder {
    alphabet: Vec<Symbol>,
    states: Vec<(String, ColorSet)>,
    initial: Vec<String>,
    edges: Vec<(String, String, BTreeSet<Symbol>)>,
}

impl FilterBuilder {
    pub fn symbol(mut self, symbol: impl Into<Symbol>) -> Self {
        self.alphabet.push(symbol.into());
        self
    }

    pub fn symbols<S: Into<Symbol>>(mut self, symbols: impl IntoIterator<Item = S>) -> Self {
        self.alphabet.extend(symbols.into_iter().map(Into::into));
        self
    }

    pub fn state<C: Into<Color>>(
        mut self,
        id: impl Into<String>,
        colors: impl IntoIterator<Item = C>,
    ) -> Self {
        self.states
            .push((id.into(), colors.into_iter().map(Into::into).collect()));
        self
    }

    pub fn initial(mut self, id: impl Into<String>) -> Self {
        self.initial.push(id.into());
        self
    }

    pub fn edge<S: Into<Symbol>>(
        mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Self {
        self.edges.push((
            from.into(),
            to.into(),
            symbols.into_iter().map(Into::into).collect(),
        ));
        self
    }

    /// Resolves identifiers without checking the remaining invariants.
    pub fn finish(self) -> Result<Filter, FilterError> {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut states = Vec::with_capacity(self.states.len());
        for (i, (id, colors)) in self.states.into_iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(FilterError::DuplicateState(id));
            }
            states.push(StateRecord::new(id, colors));
        }
        let lookup = |id: &str, context: &str| {
            index.get(id).copied().ok_or_else(|| FilterError::UnknownState {
                id: id.to_owned(),
                context: context.to_owned(),
            })
        };
        let initial = self
            .initial
            .iter()
            .map(|id| lookup(id, "initial"))
            .collect::<Result<Vec<_>, _>>()?;
        let edges = self
            .edges
            .into_iter()
            .map(|(u, v, labels)| Ok(((lookup(&u, "edge")?, lookup(&v, "edge")?), labels)))
            .collect::<Result<Vec<_>, FilterError>>()?;
        Ok(Filter::from_raw(states, initial, self.alphabet, edges))
    }

    /// Resolves identifiers and validates the result.
    pub fn build(self) -> Result<Filter, FilterError> {
        let f = self.finish()?;
        let violations = validate(&f);
        if violations.is_empty() {
            Ok(f)
        } else {
            Err(FilterError::Invalid(violations))
        }
    }
}

/// Checks every structural invariant; an empty result means the filter is
/// well formed. An empty initial set is permitted.
pub fn validate(f: &Filter) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = f.states.len();
    let mut seen = HashMap::new();
    for s in &f.states {
        if seen.insert(s.id.as_str(), ()).is_some() {
            out.push(Violation::DuplicateId { id: s.id.clone() });
        }
        if s.colors.is_empty() {
            out.push(Violation::EmptyColorSet { state: s.id.clone() });
        } else if s.colors.iter().any(|c| c.as_str().is_empty()) {
            out.push(Violation::EmptyColorToken { state: s.id.clone() });
        }
    }
    if f.alphabet.iter().any(|y| y.as_str().is_empty()) {
        out.push(Violation::EmptySymbolToken);
    }
    for &v in &f.initial {
        if v >= n {
            out.push(Violation::UnknownInitial { index: v });
        }
    }
    for (&(u, v), labels) in &f.edges {
        if u >= n || v >= n {
            out.push(Violation::DanglingEdge { from: u, to: v });
            continue;
        }
        for y in labels {
            if !f.alphabet.contains(y) {
                out.push(Violation::UnknownSymbol {
                    from: f.states[u].id.clone(),
                    to: f.states[v].id.clone(),
                    symbol: y.clone(),
                });
            }
        }
    }
    out
}

/// Drops states that no string reaches from an initial state. Surviving
/// states keep their identifiers and relative order.
pub fn prune_unreachable(f: &Filter) -> Filter {
    let keep = f.reachable();
    restrict(f, &keep)
}

fn restrict(f: &Filter, keep: &[bool]) -> Filter {
    let mut remap = vec![usize::MAX; f.states.len()];
    let mut states = Vec::new();
    for (i, s) in f.states.iter().enumerate() {
        if keep[i] {
            remap[i] = states.len();
            states.push(s.clone());
        }
    }
    let initial = f
        .initial
        .iter()
        .filter(|&&v| v < keep.len() && keep[v])
        .map(|&v| remap[v]);
    let edges = f
        .edges
        .iter()
        .filter(|(&(u, v), _)| u < keep.len() && v < keep.len() && keep[u] && keep[v])
        .map(|(&(u, v), l)| ((remap[u], remap[v]), l.clone()));
    Filter::from_raw(states, initial, f.alphabet.iter().cloned(), edges)
}

/// Membership in the filter classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub tracing_deterministic: bool,
    pub vertex_single_output: bool,
    pub string_single_output: bool,
    pub unary_alphabet: bool,
}

pub fn classify(f: &Filter) -> ClassReport {
    ClassReport {
        tracing_deterministic: f.is_tracing_deterministic(),
        vertex_single_output: f.is_vertex_single_output(),
        string_single_output: crate::check::check_sso(f).holds,
        unary_alphabet: f.alphabet.len() == 1,
    }
}

/// Which member of a multi-color set survives [`select_single_outputs`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SelectionPolicy {
    #[default]
    LexLeast,
    LexGreatest,
}

/// Replaces every color set by a singleton drawn from it. The result output
/// simulates the input and has the same states and edges.
pub fn select_single_outputs(f: &Filter, policy: SelectionPolicy) -> Filter {
    f.recolored(|_, s| {
        let pick = match policy {
            SelectionPolicy::LexLeast => s.colors.first(),
            SelectionPolicy::LexGreatest => s.colors.last(),
        };
        pick.cloned().map(ColorSet::singleton).unwrap_or_default()
    })
}

/// Subset construction over the reachable nonempty state sets.
///
/// Each result state is named by the identifiers of its members, in state
/// order, e.g. `{1,3}`. Its colors are the union of the members' colors, so
/// every in-language string has the same output set before and after.
pub fn determinize(f: &Filter) -> Result<Filter, FilterError> {
    let start = f.initial_set();
    if start.is_empty() {
        return Err(FilterError::EmptyInitial);
    }
    let mut index: HashMap<StateSet, usize> = HashMap::new();
    let mut subsets = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
    let mut next = 0;
    while next < subsets.len() {
        let current = subsets[next].clone();
        for (k, y) in f.symbols.iter().enumerate() {
            let image = f.step(&current, k);
            if image.is_empty() {
                continue;
            }
            let target = match index.get(&image) {
                Some(&t) => t,
                None => {
                    let t = subsets.len();
                    index.insert(image.clone(), t);
                    subsets.push(image);
                    t
                }
            };
            edges.entry((next, target)).or_default().insert(y.clone());
        }
        next += 1;
    }
    let states = subsets
        .iter()
        .map(|set| {
            let name = set.iter().map(|v| f.id(v)).collect::<Vec<_>>().join(",");
            StateRecord::new(format!("{{{name}}}"), f.colors_of(set))
        })
        .collect();
    Ok(Filter::from_raw(
        states,
        [0],
        f.alphabet.iter().cloned(),
        edges,
    ))
}
