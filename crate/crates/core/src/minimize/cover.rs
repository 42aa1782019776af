//! Closed-cover search for deterministic minimizers of deterministic inputs.
//!
//! A deterministic output simulator with `k` states induces `k` labels: the
//! input states co-reached with each of its states. Labels cover the input,
//! share at least one color, and are closed under transitions (all
//! `y`-successors of a label fit inside one label). Conversely any such
//! family yields a simulator, one state per label. Labels may overlap, which
//! is why no quotient by an equivalence relation can replace this search.

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;

use super::{color_lower_bound, empty_result, verify, Certificate, MinimizeError, SynthesisResult, TargetClass, Transcript};
use crate::filter::{prune_unreachable, ColorSet, Filter, StateRecord, StateSet, Symbol};
use crate::limits::{Budget, Exhausted, Meter};

/// A label: input states assigned to one minimizer state. Members must have
/// a common color.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct CoverLabel {
    pub(crate) members: StateSet,
}

struct Search<'a> {
    f: &'a Filter,
    k: usize,
    forced: Vec<crate::filter::Color>,
    seen: HashSet<Vec<StateSet>>,
}

impl Search<'_> {
    fn common_colors(&self, set: &StateSet) -> ColorSet {
        let mut it = set.iter();
        let Some(first) = it.next() else {
            return ColorSet::new();
        };
        it.fold(self.f.colors(first).clone(), |acc, v| {
            acc.intersection(self.f.colors(v))
        })
    }

    /// First successor set not contained in any label.
    fn open_obligation(&self, labels: &[CoverLabel]) -> Option<StateSet> {
        for label in labels {
            for k in 0..self.f.symbols().len() {
                let image = self.f.step(&label.members, k);
                if image.is_empty() {
                    continue;
                }
                if !labels.iter().any(|l| image.is_subset(&l.members)) {
                    return Some(image);
                }
            }
        }
        None
    }

    /// Forced colors that no label can still provide need fresh labels.
    fn hopeless(&self, labels: &[CoverLabel]) -> bool {
        let commons: Vec<ColorSet> = labels.iter().map(|l| self.common_colors(&l.members)).collect();
        let missing = self
            .forced
            .iter()
            .filter(|c| !commons.iter().any(|cs| cs.contains(c)))
            .count();
        missing > self.k - labels.len()
    }

    fn dfs(&mut self, labels: Vec<CoverLabel>, meter: &mut Meter) -> Result<Option<Vec<CoverLabel>>, Exhausted> {
        meter.tick()?;
        let key: Vec<StateSet> = labels.iter().map(|l| l.members.clone()).collect();
        if !self.seen.insert(key) || self.hopeless(&labels) {
            return Ok(None);
        }
        let Some(obligation) = self.open_obligation(&labels) else {
            return Ok(Some(labels));
        };
        for j in 0..labels.len() {
            let merged = labels[j].members.union(&obligation);
            if self.common_colors(&merged).is_empty() {
                continue;
            }
            let mut next = labels.clone();
            next[j].members = merged;
            if let Some(found) = self.dfs(next, meter)? {
                return Ok(Some(found));
            }
        }
        if labels.len() < self.k && !self.common_colors(&obligation).is_empty() {
            let mut next = labels;
            next.push(CoverLabel { members: obligation });
            if let Some(found) = self.dfs(next, meter)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    fn induced_filter(&self, labels: &[CoverLabel]) -> Filter {
        let states = labels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let color = self.common_colors(&l.members).first().cloned().expect("nonempty");
                StateRecord::new(i.to_string(), ColorSet::singleton(color))
            })
            .collect();
        let mut edges: IndexMap<(usize, usize), BTreeSet<Symbol>> = IndexMap::new();
        for (i, l) in labels.iter().enumerate() {
            for (k, y) in self.f.symbols().iter().enumerate() {
                let image = self.f.step(&l.members, k);
                if image.is_empty() {
                    continue;
                }
                let j = labels
                    .iter()
                    .position(|t| image.is_subset(&t.members))
                    .expect("closed cover");
                edges.entry((i, j)).or_default().insert(y.clone());
            }
        }
        Filter::from_raw(states, [0], self.f.alphabet().iter().cloned(), edges)
    }
}

/// Minimal tracing-deterministic output simulator of a tracing-deterministic
/// input, by closed-cover search for `k = lower bound, …` labels.
pub fn minimize_df_cover(f: &Filter, budget: &Budget) -> Result<SynthesisResult, MinimizeError> {
    if !f.is_tracing_deterministic() {
        return Err(MinimizeError::NotDeterministic);
    }
    let f = prune_unreachable(f);
    let Some(v0) = f.initial_set().iter().next() else {
        return Ok(empty_result(&f, TargetClass::Df, "cover"));
    };
    let lower_bound = color_lower_bound(&f).max(1);
    let mut forced: Vec<_> = f.states().iter().filter_map(|s| s.colors.single().cloned()).collect();
    forced.sort();
    forced.dedup();
    let mut meter = Meter::new(budget);
    let mut transcript = Transcript::new("cover", TargetClass::Df);
    for k in lower_bound..=f.state_count() {
        let mut search = Search {
            f: &f,
            k,
            forced: forced.clone(),
            seen: HashSet::new(),
        };
        let start = vec![CoverLabel {
            members: StateSet::singleton(v0),
        }];
        let found = search.dfs(start, &mut meter).map_err(|cause| MinimizeError::Exhausted {
            cause,
            lower_bound: k,
            upper_bound: f.state_count(),
        })?;
        match found {
            None => transcript.record(&format!("k={k} exhausted nodes={}", meter.spent)),
            Some(labels) => {
                let minimizer = search.induced_filter(&labels);
                for (i, l) in labels.iter().enumerate() {
                    let ids: Vec<&str> = l.members.iter().map(|v| f.id(v)).collect();
                    transcript.record(&format!("label {i} = {{{}}}", ids.join(",")));
                }
                verify(&f, &minimizer, TargetClass::Df)?;
                transcript.record(&format!("k={k} verified"));
                return Ok(SynthesisResult {
                    size: minimizer.state_count(),
                    minimizer,
                    certificate: Certificate {
                        target: TargetClass::Df,
                        lower_bound,
                        exhausted_below: k,
                        nodes: meter.spent,
                        candidates_verified: 1,
                        transcript_hash: transcript.finish(),
                    },
                });
            }
        }
    }
    unreachable!("the input itself is a closed cover of size |V|")
}
