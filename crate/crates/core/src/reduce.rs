//! Instance generators.
//!
//! Two constructions turn automata questions into filter questions:
//!
//! - [`universality_instance`]: an automaton accepts every string iff its
//!   recolored copy output simulates the one-state filter that loops on the
//!   whole alphabet.
//! - [`outputcompat_instance`]: `L(a) ⊆ L(b)` iff a copy of `a` colored
//!   [`GREEN`] is output compatible with the union of `a ⊗ b` (colored green)
//!   and `a` (colored [`RED`]).
//!
//! Automata here have every state accepting, so they are represented by a
//! [`Filter`] whose colors are ignored.
//!
//! [`random_filter`] draws seeded random filters for tests and benchmarks.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::check::check_sso;
use crate::filter::{prune_unreachable, Color, ColorSet, Filter, StateRecord, Symbol};
use crate::product::{tensor_product, union_graph};

pub const UNIVERSAL_COLOR: &str = "c0";
pub const GREEN: &str = "green";
pub const RED: &str = "red";

const SSO_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("alphabet has {size} symbol(s); at least 2 are required")]
    AlphabetTooSmall { size: usize },
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(String),
}

/// A nondeterministic automaton in which every state accepts, stored as a
/// filter whose states all carry [`UNIVERSAL_COLOR`]. Its language is the
/// set of strings with a nonempty run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsfNfa(Filter);

impl AsfNfa {
    /// Wraps the graph of `f`; its colors are replaced.
    pub fn new(f: Filter) -> Self {
        AsfNfa(f.uniformly_colored(&Color::from(UNIVERSAL_COLOR)))
    }

    pub fn filter(&self) -> &Filter {
        &self.0
    }

    pub fn into_filter(self) -> Filter {
        self.0
    }
}

impl From<Filter> for AsfNfa {
    fn from(f: Filter) -> Self {
        AsfNfa::new(f)
    }
}

/// `(F, F′)` such that `F′` output simulates `F` iff the automaton accepts
/// every string over its alphabet.
pub fn universality_instance(nfa: &AsfNfa) -> Result<(Filter, Filter), ReduceError> {
    let a = nfa.filter();
    if a.alphabet().len() < 2 {
        return Err(ReduceError::AlphabetTooSmall {
            size: a.alphabet().len(),
        });
    }
    let c0 = Color::from(UNIVERSAL_COLOR);
    let all: BTreeSet<Symbol> = a.alphabet().clone();
    let f = Filter::from_raw(
        vec![StateRecord::new("u", ColorSet::singleton(c0.clone()))],
        [0],
        all.iter().cloned(),
        [((0, 0), all.clone())],
    );
    Ok((f, a.clone()))
}

/// `(F, F′)` such that `F′` is output compatible with `F` iff
/// `L(a) ⊆ L(b)`.
pub fn outputcompat_instance(a: &Filter, b: &Filter) -> (Filter, Filter) {
    let green = Color::from(GREEN);
    let joined = tensor_product(a, b).to_filter(&green);
    let f = union_graph(&joined, a, &green, &Color::from(RED));
    (f, a.uniformly_colored(&green))
}

/// Parameters of [`random_filter`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub state_count: usize,
    pub alphabet_size: usize,
    pub color_count: usize,
    /// Probability of each `(from, symbol, to)` edge; for deterministic
    /// filters, probability that `(from, symbol)` has a successor.
    pub edge_density: f64,
    /// Colors drawn per state (clamped to `color_count`).
    pub colors_per_state: usize,
    pub force_deterministic: bool,
    /// Redraw until the filter is string single-output; after 1000 failed
    /// draws every state gets the first color.
    pub force_sso: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            state_count: 4,
            alphabet_size: 2,
            color_count: 2,
            edge_density: 0.3,
            colors_per_state: 1,
            force_deterministic: false,
            force_sso: false,
        }
    }
}

pub fn symbol_name(i: usize) -> String {
    if i < 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("s{i}")
    }
}

pub fn color_name(i: usize) -> String {
    format!("c{i}")
}

fn draw(cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Filter {
    let n = cfg.state_count;
    let symbols: Vec<Symbol> = (0..cfg.alphabet_size).map(|i| Symbol::new(symbol_name(i))).collect();
    let per_state = cfg.colors_per_state.clamp(1, cfg.color_count);
    let states = (0..n)
        .map(|i| {
            let colors = sample(rng, cfg.color_count, per_state)
                .into_iter()
                .map(|c| Color::new(color_name(c)))
                .collect();
            StateRecord::new(i.to_string(), colors)
        })
        .collect();
    let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
    for u in 0..n {
        for y in &symbols {
            if cfg.force_deterministic {
                if rng.gen_bool(cfg.edge_density) {
                    let v = rng.gen_range(0..n);
                    edges.entry((u, v)).or_default().insert(y.clone());
                }
            } else {
                for v in 0..n {
                    if rng.gen_bool(cfg.edge_density) {
                        edges.entry((u, v)).or_default().insert(y.clone());
                    }
                }
            }
        }
    }
    let f = prune_unreachable(&Filter::from_raw(states, [0], symbols, edges));
    f.relabeled(|i, _| i.to_string())
}

/// A seeded random filter with initial state `0`, pruned to its reachable
/// part and relabeled `0, 1, …`. Symbols are `a, b, …` and colors
/// `c0, c1, …`. The same configuration always yields the same filter.
pub fn random_filter(cfg: &GeneratorConfig) -> Result<Filter, ReduceError> {
    if cfg.state_count == 0 || cfg.color_count == 0 {
        return Err(ReduceError::InvalidConfig(
            "state_count and color_count must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.edge_density) {
        return Err(ReduceError::InvalidConfig(format!(
            "edge_density {} is outside [0, 1]",
            cfg.edge_density
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if !cfg.force_sso {
        return Ok(draw(cfg, &mut rng));
    }
    let mut last = None;
    for _ in 0..SSO_ATTEMPTS {
        let f = draw(cfg, &mut rng);
        if check_sso(&f).holds {
            return Ok(f);
        }
        last = Some(f);
    }
    Ok(last
        .expect("at least one attempt")
        .uniformly_colored(&Color::new(color_name(0))))
}
