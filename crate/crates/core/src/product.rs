//! Reachable tensor products and disjoint graph unions.

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;

use crate::filter::{Color, ColorSet, Filter, StateRecord, StateSet, Symbol};
use crate::search::ShortlexBfs;
use crate::trace::ObservationString;

/// The reachable fragment of the tensor product of two filters.
///
/// Node `(v, w)` exists iff some string common to both languages reaches `v`
/// in the left filter and `w` in the right one. Nodes are stored in BFS
/// discovery order and each keeps the shortest, lexicographically least
/// string that reaches it.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    nodes: Vec<(usize, usize)>,
    labels: Vec<String>,
    index: HashMap<(usize, usize), usize>,
    initial: Vec<usize>,
    edges: IndexMap<(usize, usize), BTreeSet<Symbol>>,
    parent: Vec<Option<(usize, Symbol)>>,
    symbols: Vec<Symbol>,
}

impl ProductGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn node_index(&self, pair: (usize, usize)) -> Option<usize> {
        self.index.get(&pair).copied()
    }

    pub fn contains(&self, pair: (usize, usize)) -> bool {
        self.index.contains_key(&pair)
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    /// Symbols shared by both operands; the product alphabet.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<Symbol>)> + '_ {
        self.edges.iter().map(|(&(u, v), l)| (u, v, l))
    }

    /// Shortest (then lexicographically least) string reaching `node`.
    pub fn access_string(&self, node: usize) -> ObservationString {
        let mut rev = Vec::new();
        let mut cur = node;
        while let Some((p, y)) = &self.parent[cur] {
            rev.push(y.clone());
            cur = *p;
        }
        rev.into_iter().rev().collect()
    }

    /// Views the product as a filter whose every node carries `color`. Node
    /// identifiers are `(v,w)` built from the operands' identifiers.
    pub fn to_filter(&self, color: &Color) -> Filter {
        let states = self
            .labels
            .iter()
            .map(|l| StateRecord::new(l.clone(), ColorSet::singleton(color.clone())))
            .collect();
        Filter::from_raw(
            states,
            self.initial.iter().copied(),
            self.symbols.iter().cloned(),
            self.edges.iter().map(|(&p, l)| (p, l.clone())),
        )
    }
}

/// Builds the reachable tensor product by forward BFS from the initial
/// pairs. Only symbols present in both alphabets label product edges.
pub fn tensor_product(f: &Filter, g: &Filter) -> ProductGraph {
    let shared: Vec<(Symbol, usize, usize)> = f
        .symbols()
        .iter()
        .enumerate()
        .filter_map(|(kf, y)| g.symbol_index(y).map(|kg| (y.clone(), kf, kg)))
        .collect();
    let mut pg = ProductGraph {
        nodes: Vec::new(),
        labels: Vec::new(),
        index: HashMap::new(),
        initial: Vec::new(),
        edges: IndexMap::new(),
        parent: Vec::new(),
        symbols: shared.iter().map(|(y, _, _)| y.clone()).collect(),
    };
    let mut bfs: ShortlexBfs<(usize, usize)> = ShortlexBfs::new();
    for v in f.initial_set().iter() {
        for w in g.initial_set().iter() {
            let (i, _) = bfs.root((v, w));
            pg.initial.push(i);
        }
    }
    bfs.seal();
    let mut product_edges: Vec<(usize, usize, usize)> = Vec::new();
    while let Some(group) = bfs.next_group() {
        for (s, (_, kf, kg)) in shared.iter().enumerate() {
            for &i in &group {
                let (v, w) = bfs.keys[i];
                for &v2 in f.successors(v, *kf) {
                    for &w2 in g.successors(w, *kg) {
                        let (j, _) = bfs.discover((v2, w2), i, s);
                        product_edges.push((i, j, s));
                    }
                }
            }
            bfs.seal();
        }
    }
    for (i, &pair) in bfs.keys.iter().enumerate() {
        pg.nodes.push(pair);
        pg.labels.push(format!("({},{})", f.id(pair.0), g.id(pair.1)));
        pg.index.insert(pair, i);
        pg.parent.push(bfs.parent(i).map(|(p, s)| (p, shared[s].0.clone())));
    }
    // edges grouped by source node so the map order follows node order
    product_edges.sort_by_key(|&(i, j, _)| (i, j));
    for (i, j, s) in product_edges {
        pg.edges.entry((i, j)).or_default().insert(shared[s].0.clone());
    }
    pg
}

/// Pairs reached by `s` in the product, as a set of operand-state pairs.
pub fn reached_pairs(pg: &ProductGraph, s: &ObservationString) -> BTreeSet<(usize, usize)> {
    let mut current: StateSet = pg.initial.iter().copied().collect();
    for y in s.symbols() {
        current = pg
            .edges
            .iter()
            .filter(|(&(u, _), l)| current.contains(u) && l.contains(y))
            .map(|(&(_, v), _)| v)
            .collect();
    }
    current.iter().map(|i| pg.nodes[i]).collect()
}

/// Disjoint union of `joined` (every state recolored `color_joined`) and
/// `base` (every state recolored `color_base`). Identifiers are prefixed with
/// `j:` and `a:` respectively; the initial set is the union of both.
pub fn union_graph(joined: &Filter, base: &Filter, color_joined: &Color, color_base: &Color) -> Filter {
    let offset = joined.state_count();
    let mut states = Vec::with_capacity(offset + base.state_count());
    for s in joined.states() {
        states.push(StateRecord::new(
            format!("j:{}", s.id),
            ColorSet::singleton(color_joined.clone()),
        ));
    }
    for s in base.states() {
        states.push(StateRecord::new(
            format!("a:{}", s.id),
            ColorSet::singleton(color_base.clone()),
        ));
    }
    let initial = joined
        .initial()
        .iter()
        .copied()
        .chain(base.initial().iter().map(|&v| v + offset));
    let alphabet = joined.alphabet().iter().chain(base.alphabet()).cloned();
    let edges = joined
        .edges()
        .map(|(u, v, l)| ((u, v), l.clone()))
        .chain(base.edges().map(|(u, v, l)| ((u + offset, v + offset), l.clone())));
    Filter::from_raw(states, initial, alphabet, edges)
}
