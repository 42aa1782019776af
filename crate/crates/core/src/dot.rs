//! Graphviz output.
//!
//! The rendering is a pure function of the filter: states in index order,
//! edges in insertion order, symbols and colors sorted. Equal filters
//! therefore render to identical bytes.

use std::fmt::Write;

use crate::filter::Filter;

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub graph_name: String,
    /// Lay the graph out left to right instead of top to bottom.
    pub left_to_right: bool,
    /// Fill nodes with their color tokens read as Graphviz color names.
    /// States with several colors are drawn as wedges.
    pub fill: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            graph_name: "filter".to_owned(),
            left_to_right: true,
            fill: true,
        }
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders `f` as a `digraph`. Each initial state gets an invisible point
/// node with an arrow into it; state labels list the id and every color.
pub fn emit_dot(f: &Filter, opts: &RenderOptions) -> String {
    let mut s = String::new();
    writeln!(s, "digraph {} {{", quote(&opts.graph_name)).unwrap();
    if opts.left_to_right {
        s.push_str("  rankdir=LR;\n");
    }
    s.push_str("  node [shape=circle];\n");
    for (i, st) in f.states().iter().enumerate() {
        let colors: Vec<&str> = st.colors.iter().map(|c| c.as_str()).collect();
        let label = format!("{}\n{{{}}}", st.id, colors.join(", "));
        if opts.fill {
            let style = if colors.len() > 1 { "wedged" } else { "filled" };
            writeln!(
                s,
                "  s{i} [label={}, style={style}, fillcolor={}];",
                quote(&label),
                quote(&colors.join(":"))
            )
            .unwrap();
        } else {
            writeln!(s, "  s{i} [label={}];", quote(&label)).unwrap();
        }
    }
    for &v in f.initial() {
        writeln!(s, "  init{v} [shape=point, label=\"\"];").unwrap();
        writeln!(s, "  init{v} -> s{v};").unwrap();
    }
    for (u, v, labels) in f.edges() {
        let syms: Vec<&str> = labels.iter().map(|y| y.as_str()).collect();
        writeln!(s, "  s{u} -> s{v} [label={}];", quote(&syms.join(","))).unwrap();
    }
    s.push_str("}\n");
    s
}
