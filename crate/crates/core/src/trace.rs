//! String semantics: reached sets, output sets, language enumeration and the
//! incremental marker-set tracer.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{Color, ColorSet, Filter, StateSet, Symbol};

/// Default cap on the number of strings [`enumerate_language`] will return.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 1_000_000;

/// A finite sequence of observations.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservationString(Vec<Symbol>);

impl ObservationString {
    pub fn empty() -> Self {
        ObservationString(Vec::new())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, symbol: Symbol) {
        self.0.push(symbol);
    }

    pub fn extended(&self, symbol: Symbol) -> Self {
        let mut s = self.clone();
        s.push(symbol);
        s
    }

    /// Splits `text` on whitespace and commas. A single remaining token that is
    /// not a symbol of `f` is split into characters when every symbol of `f` is
    /// one character long, so `axy` reads as `a x y`.
    pub fn parse_for(f: &Filter, text: &str) -> Self {
        let tokens: Vec<&str> = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if let [single] = tokens.as_slice() {
            let known = f.symbol_index(&Symbol::from(*single)).is_some();
            let all_chars = f.symbols().iter().all(|y| y.as_str().chars().count() == 1);
            if !known && all_chars && single.chars().count() > 1 {
                return single.chars().map(|c| Symbol::new(c.to_string())).collect();
            }
        }
        tokens.into_iter().map(Symbol::from).collect()
    }
}

impl FromIterator<Symbol> for ObservationString {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        ObservationString(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for ObservationString {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        ObservationString(iter.into_iter().map(Symbol::from).collect())
    }
}

impl fmt::Display for ObservationString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, y) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{y}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("symbol `{0}` is not in the filter alphabet")]
    UnknownSymbol(Symbol),
    #[error("string crashes after {consumed} symbol(s)")]
    Crash { consumed: usize },
    #[error("output is ambiguous: {0}")]
    AmbiguousOutput(ColorSet),
    #[error("language enumeration exceeded {limit} strings")]
    LanguageTooLarge { limit: usize },
}

fn symbol_index(f: &Filter, y: &Symbol) -> Result<usize, TraceError> {
    f.symbol_index(y)
        .ok_or_else(|| TraceError::UnknownSymbol(y.clone()))
}

/// The set of states reached by `s` from any initial state. An empty result
/// means `s` crashes.
pub fn trace(f: &Filter, s: &ObservationString) -> Result<StateSet, TraceError> {
    let mut set = f.initial_set();
    for y in s.symbols() {
        let k = symbol_index(f, y)?;
        set = f.step(&set, k);
    }
    Ok(set)
}

/// Union of the colors of the states reached by `s`.
pub fn outputs(f: &Filter, s: &ObservationString) -> Result<ColorSet, TraceError> {
    let set = trace(f, s)?;
    if set.is_empty() {
        return Err(TraceError::Crash { consumed: s.len() });
    }
    Ok(f.colors_of(&set))
}

/// All strings of the interaction language up to `max_len` symbols, shortest
/// first and lexicographic within a length.
pub fn enumerate_language(f: &Filter, max_len: usize) -> Result<Vec<ObservationString>, TraceError> {
    enumerate_language_capped(f, max_len, DEFAULT_ENUMERATION_LIMIT)
}

pub fn enumerate_language_capped(
    f: &Filter,
    max_len: usize,
    limit: usize,
) -> Result<Vec<ObservationString>, TraceError> {
    let start = f.initial_set();
    if start.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = vec![ObservationString::empty()];
    let mut level = vec![(ObservationString::empty(), start)];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (s, set) in &level {
            for (k, y) in f.symbols().iter().enumerate() {
                let image = f.step(set, k);
                if image.is_empty() {
                    continue;
                }
                if out.len() + next.len() >= limit {
                    return Err(TraceError::LanguageTooLarge { limit });
                }
                next.push((s.extended(y.clone()), image));
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().map(|(s, _)| s.clone()));
        level = next;
    }
    Ok(out)
}

/// Incremental tracer that follows every matching edge at once.
///
/// The marker set is always the reached set of the consumed prefix, so its
/// size never exceeds the number of states. Stepping returns a new tracer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tracer<'a> {
    filter: &'a Filter,
    markers: StateSet,
    consumed: usize,
}

impl<'a> Tracer<'a> {
    pub fn new(filter: &'a Filter) -> Self {
        Tracer {
            filter,
            markers: filter.initial_set(),
            consumed: 0,
        }
    }

    pub fn markers(&self) -> &StateSet {
        &self.markers
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn colors(&self) -> ColorSet {
        self.filter.colors_of(&self.markers)
    }

    /// Advances by one symbol, failing with [`TraceError::Crash`] when no
    /// marker survives.
    pub fn step(&self, y: &Symbol) -> Result<(Tracer<'a>, ColorSet), TraceError> {
        let k = symbol_index(self.filter, y)?;
        let markers = self.filter.step(&self.markers, k);
        if markers.is_empty() {
            return Err(TraceError::Crash {
                consumed: self.consumed,
            });
        }
        let colors = self.filter.colors_of(&markers);
        Ok((
            Tracer {
                filter: self.filter,
                markers,
                consumed: self.consumed + 1,
            },
            colors,
        ))
    }

    /// Steps through every symbol of `s` in turn.
    pub fn run(&self, s: &ObservationString) -> Result<Tracer<'a>, TraceError> {
        let mut t = self.clone();
        for y in s.symbols() {
            t = t.step(y)?.0;
        }
        Ok(t)
    }

    /// The output for the consumed prefix, provided it is a single color.
    pub fn committed_color(&self) -> Result<Color, TraceError> {
        if self.markers.is_empty() {
            return Err(TraceError::Crash {
                consumed: self.consumed,
            });
        }
        let colors = self.colors();
        match colors.single() {
            Some(c) => Ok(c.clone()),
            None => Err(TraceError::AmbiguousOutput(colors)),
        }
    }
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

    fn s(text: &str) -> ObservationString {
        text.chars().map(|c| Symbol::new(c.to_string())).collect()
    }

    #[test]
    fn trace_values() {
        let f = fix1();
        assert_eq!(trace(&f, &s("ax")).unwrap(), StateSet::from_iter([2, 4]));
        assert!(trace(&f, &s("ay")).unwrap().is_empty());
        assert_eq!(
            trace(&f, &s("q")),
            Err(TraceError::UnknownSymbol(Symbol::from("q")))
        );
    }

    #[test]
    fn output_values() {
        let f = fix1();
        assert_eq!(outputs(&f, &s("a")).unwrap().to_string(), "{blue, red}");
        assert_eq!(outputs(&f, &s("axy")).unwrap().to_string(), "{lime}");
        assert!(matches!(outputs(&f, &s("ay")), Err(TraceError::Crash { .. })));
    }

    #[test]
    fn enumeration_order() {
        let f = fix1();
        let strings: Vec<String> = enumerate_language(&f, 3)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(strings, ["ε", "a", "a x", "a x y"]);

        let empty = Filter::builder().symbol("y").state("0", ["c"]).build().unwrap();
        assert!(enumerate_language(&empty, 5).unwrap().is_empty());

        let looped = Filter::builder()
            .symbol("y")
            .state("0", ["c"])
            .initial("0")
            .edge("0", "0", ["y"])
            .build()
            .unwrap();
        assert_eq!(enumerate_language(&looped, 2).unwrap().len(), 3);
    }

    #[test]
    fn enumeration_cap_fails_loudly() {
        let f = Filter::builder()
            .symbols(["a", "b"])
            .state("0", ["c"])
            .initial("0")
            .edge("0", "0", ["a", "b"])
            .build()
            .unwrap();
        assert_eq!(
            enumerate_language_capped(&f, 10, 100),
            Err(TraceError::LanguageTooLarge { limit: 100 })
        );
    }

    #[test]
    fn tracer_steps() {
        let f = fix1();
        let t = Tracer::new(&f).run(&s("a")).unwrap();
        let (t, colors) = t.step(&Symbol::from("x")).unwrap();
        assert_eq!(t.markers(), &StateSet::from_iter([2, 4]));
        assert_eq!(colors.to_string(), "{green, orange}");
        let (t, colors) = t.step(&Symbol::from("y")).unwrap();
        assert_eq!(t.markers(), &StateSet::singleton(5));
        assert_eq!(colors.to_string(), "{lime}");
        assert_eq!(t.committed_color().unwrap(), Color::from("lime"));
        assert_eq!(t.consumed(), 3);

        let start = Tracer::new(&f);
        assert_eq!(
            start.step(&Symbol::from("x")),
            Err(TraceError::Crash { consumed: 0 })
        );
        let after_a = start.step(&Symbol::from("a")).unwrap().0;
        assert!(matches!(
            after_a.committed_color(),
            Err(TraceError::AmbiguousOutput(c)) if c.len() == 2
        ));
    }

    #[test]
    fn parse_for_splits_single_char_alphabets() {
        let f = fix1();
        assert_eq!(ObservationString::parse_for(&f, "axy"), s("axy"));
        assert_eq!(ObservationString::parse_for(&f, "a x,y"), s("axy"));
        assert!(ObservationString::parse_for(&f, "").is_empty());
    }
}
