use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pfilter::check::{
    check_language_inclusion, check_output_compat_general, check_output_compat_sso_fast, check_output_simulation,
    check_sso, CheckError,
};
use pfilter::dot::{emit_dot, RenderOptions};
use pfilter::filter::{classify, determinize, Color};
use pfilter::io::{emit, parse_filter, DocumentError};
use pfilter::minimize::{
    minimize, minimize_bounded_synthesis, minimize_df_cover, minimize_unary_any, MinimizeError, TargetClass,
};
use pfilter::product::tensor_product;
use pfilter::reduce::{outputcompat_instance, random_filter, universality_instance, AsfNfa, GeneratorConfig};
use pfilter::trace::{outputs, trace, TraceError};
use pfilter::{Budget, Filter, ObservationString, SimVerdict};

/// `println!` that ignores a closed stdout (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(io::stdout().lock(), $($arg)*);
    }};
}

const EXIT_FAILS: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "pfilter", version, about = "Inspect, check and minimize combinatorial filters")]
struct Cli {
    /// Output style for reports.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a filter document.
    Validate { file: PathBuf },
    /// Report class memberships (deterministic, vertex/string single-output).
    Classify { file: PathBuf },
    /// Trace an observation string and report reached states and outputs.
    Trace {
        file: PathBuf,
        /// Symbols separated by spaces or commas; `axy` also works for one-letter alphabets.
        #[arg(long, short, default_value = "")]
        string: String,
    },
    /// Subset construction over reachable nonempty state sets.
    Determinize {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reachable tensor product of two filters, as a filter document.
    Product {
        f: PathBuf,
        g: PathBuf,
        /// Color given to every product node.
        #[arg(long, default_value = "c0")]
        color: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Is every in-language string single-output?
    CheckSso { file: PathBuf },
    /// Is L(F) contained in L(G)?
    CheckIncl { f: PathBuf, g: PathBuf },
    /// Is G output compatible with F?
    CheckCompat {
        f: PathBuf,
        g: PathBuf,
        /// Use the product-graph algorithm (both filters must be string single-output).
        #[arg(long)]
        fast: bool,
    },
    /// Does G output simulate F?
    CheckSim {
        f: PathBuf,
        g: PathBuf,
        /// Also require G to be string single-output.
        #[arg(long)]
        require_sso: bool,
    },
    /// Smallest filter of the target class that output simulates the input.
    Minimize {
        file: PathBuf,
        #[arg(long, short, default_value = "smo")]
        target: TargetClass,
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write the minimizer document here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build hardness instances.
    #[command(subcommand)]
    Reduce(Reduce),
    /// Seeded random filter.
    Random(RandomArgs),
    /// Render a filter as Graphviz DOT.
    Dot {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Lay out top to bottom instead of left to right.
        #[arg(long)]
        top_down: bool,
        /// Omit fill colors.
        #[arg(long)]
        no_fill: bool,
    },
    /// Search random deterministic inputs for size gaps between the classes.
    Separate {
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        start: u64,
        #[arg(long, default_value_t = 6)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        alphabet: usize,
        #[arg(long, default_value_t = 3)]
        colors: usize,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 2)]
        colors_per_state: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Unary engine for one-symbol alphabets, cover search for df, synthesis otherwise.
    Auto,
    Synthesis,
    Cover,
    Unary,
}

#[derive(Subcommand)]
enum Reduce {
    /// (F, F') with F' simulating F iff the automaton is universal.
    Universality {
        nfa: PathBuf,
        /// Write `<prefix>.f.json` and `<prefix>.g.json` instead of printing.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// (F, F') with F' output compatible with F iff L(a) ⊆ L(b).
    Outputcompat {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BudgetArgs {
    /// Search node budget.
    #[arg(long, env = "PFILTER_BUDGET", default_value_t = 5_000_000)]
    budget: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        let b = Budget::nodes(self.budget);
        match self.timeout {
            Some(t) => b.with_timeout(Duration::from_secs_f64(t)),
            None => b,
        }
    }
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    states: usize,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    #[arg(long, default_value_t = 2)]
    colors: usize,
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    #[arg(long, default_value_t = 1)]
    colors_per_state: usize,
    #[arg(long)]
    deterministic: bool,
    #[arg(long)]
    sso: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Reasons to stop early, mapped to exit codes.
enum Failure {
    Usage(String),
    Document(String, DocumentError),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Document(..) => EXIT_USAGE,
            Failure::Budget(_) => EXIT_BUDGET,
        }
    }

    fn report(&self, format: Format) {
        let mut err = io::stderr();
        match format {
            Format::Text => {
                let msg = match self {
                    Failure::Usage(m) | Failure::Budget(m) => m.clone(),
                    Failure::Document(path, e) => format!("{path}: {e}"),
                };
                let _ = writeln!(err, "error: {msg}");
            }
            Format::Json => {
                let v = match self {
                    Failure::Usage(m) => json!({ "error": "usage", "message": m }),
                    Failure::Budget(m) => json!({ "error": "budget", "message": m }),
                    Failure::Document(path, DocumentError::Parse(p)) => json!({
                        "error": "parse",
                        "file": path,
                        "line": p.line,
                        "column": p.column,
                        "field": p.field,
                        "message": p.message,
                    }),
                    Failure::Document(path, DocumentError::Invalid(v)) => json!({
                        "error": "invalid",
                        "file": path,
                        "violations": v.violations.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    }),
                };
                let _ = writeln!(err, "{v}");
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Filter, Failure> {
    let text = read_text(path)?;
    parse_filter(&text).map_err(|e| Failure::Document(path.display().to_string(), e))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let _ = io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn print_value(v: &Value) {
    out!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn verdict_exit(v: &SimVerdict) -> u8 {
    if v.holds {
        0
    } else {
        EXIT_FAILS
    }
}

fn report_verdict(format: Format, what: &str, v: &SimVerdict) -> u8 {
    match format {
        Format::Json => print_value(&json!({
            "check": what,
            "holds": v.holds,
            "witness": v.witness.as_ref().map(|w| w.to_string()),
            "reason": v.reason.map(|r| r.to_string()),
            "explored": v.explored,
        })),
        Format::Text if v.holds => out!("{what}: holds ({} nodes explored)", v.explored),
        Format::Text => out!(
            "{what}: fails, {} on witness `{}` ({} nodes explored)",
            v.reason.map(|r| r.to_string()).unwrap_or_default(),
            v.witness.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            v.explored
        ),
    }
    verdict_exit(v)
}

fn ids(f: &Filter, set: impl IntoIterator<Item = usize>) -> Vec<String> {
    set.into_iter().map(|v| f.id(v).to_owned()).collect()
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Validate { file } => {
            let f = match load(file) {
                Err(fail @ Failure::Document(_, DocumentError::Invalid(_))) => {
                    fail.report(format);
                    return Ok(EXIT_FAILS);
                }
                other => other?,
            };
            match format {
                Format::Json => print_value(&json!({
                    "valid": true,
                    "states": f.state_count(),
                    "symbols": f.alphabet().len(),
                    "initial": f.initial().len(),
                })),
                Format::Text => out!(
                    "valid: {} states, {} symbols, {} initial",
                    f.state_count(),
                    f.alphabet().len(),
                    f.initial().len()
                ),
            }
            Ok(0)
        }
        Command::Classify { file } => {
            let r = classify(&load(file)?);
            match format {
                Format::Json => print_value(&serde_json::to_value(r).expect("report serializes")),
                Format::Text => {
                    out!("tracing-deterministic: {}", r.tracing_deterministic);
                    out!("vertex single-output:  {}", r.vertex_single_output);
                    out!("string single-output:  {}", r.string_single_output);
                    out!("unary alphabet:        {}", r.unary_alphabet);
                }
            }
            Ok(0)
        }
        Command::Trace { file, string } => {
            let f = load(file)?;
            let s = ObservationString::parse_for(&f, string);
            let reached = trace(&f, &s).map_err(|e| Failure::Usage(e.to_string()))?;
            let out = match outputs(&f, &s) {
                Ok(c) => Some(c),
                Err(TraceError::Crash { .. }) => None,
                Err(e) => return Err(Failure::Usage(e.to_string())),
            };
            let colors: Option<Vec<String>> = out.map(|c| c.iter().map(|x| x.to_string()).collect());
            match format {
                Format::Json => print_value(&json!({
                    "string": s.to_string(),
                    "reached": ids(&f, reached.iter()),
                    "outputs": colors,
                })),
                Format::Text => match &colors {
                    Some(c) => out!(
                        "{s}: reaches {{{}}} with outputs {{{}}}",
                        ids(&f, reached.iter()).join(", "),
                        c.join(", ")
                    ),
                    None => out!("{s}: crashes"),
                },
            }
            Ok(if colors.is_some() { 0 } else { EXIT_FAILS })
        }
        Command::Determinize { file, output } => {
            let d = determinize(&load(file)?).map_err(|e| Failure::Usage(e.to_string()))?;
            write_out(output.as_deref(), &emit(&d))?;
            Ok(0)
        }
        Command::Product { f, g, color, output } => {
            let pg = tensor_product(&load(f)?, &load(g)?);
            write_out(output.as_deref(), &emit(&pg.to_filter(&Color::from(color.as_str()))))?;
            Ok(0)
        }
        Command::CheckSso { file } => Ok(report_verdict(format, "string single-output", &check_sso(&load(file)?))),
        Command::CheckIncl { f, g } => {
            let v = check_language_inclusion(&load(f)?, &load(g)?);
            Ok(report_verdict(format, "language inclusion", &v))
        }
        Command::CheckCompat { f, g, fast } => {
            let (f, g) = (load(f)?, load(g)?);
            let v = if *fast {
                check_output_compat_sso_fast(&f, &g).map_err(|e| match e {
                    CheckError::Exhausted(x) => Failure::Budget(x.to_string()),
                    other => Failure::Usage(other.to_string()),
                })?
            } else {
                check_output_compat_general(&f, &g)
            };
            Ok(report_verdict(format, "output compatibility", &v))
        }
        Command::CheckSim { f, g, require_sso } => {
            let v = check_output_simulation(&load(f)?, &load(g)?, *require_sso);
            Ok(report_verdict(format, "output simulation", &v))
        }
        Command::Minimize {
            file,
            target,
            engine,
            budget,
            output,
        } => {
            let f = load(file)?;
            let b = budget.budget();
            let r = match engine {
                Engine::Auto => minimize(&f, *target, &b),
                Engine::Synthesis => minimize_bounded_synthesis(&f, *target, &b),
                Engine::Cover if *target == TargetClass::Df => minimize_df_cover(&f, &b),
                Engine::Cover => return Err(Failure::Usage("the cover engine only handles --target df".into())),
                Engine::Unary => minimize_unary_any(&f, *target),
            }
            .map_err(|e| match e {
                MinimizeError::Exhausted { .. } => Failure::Budget(e.to_string()),
                other => Failure::Usage(other.to_string()),
            })?;
            if let Some(p) = output {
                write_out(Some(p), &emit(&r.minimizer))?;
            }
            match format {
                Format::Json => print_value(&serde_json::to_value(&r).expect("result serializes")),
                Format::Text => {
                    let c = &r.certificate;
                    out!("{target} minimum: {} states", r.size);
                    out!(
                        "certificate: lower bound {}, sizes below {} exhausted, {} nodes, {} candidates verified",
                        c.lower_bound, c.exhausted_below, c.nodes, c.candidates_verified
                    );
                    out!("transcript: {}", c.transcript_hash);
                    if output.is_none() {
                        let _ = io::stdout().lock().write_all(emit(&r.minimizer).as_bytes());
                    }
                }
            }
            Ok(0)
        }
        Command::Reduce(which) => {
            let ((f, g), output) = match which {
                Reduce::Universality { nfa, output } => {
                    let nfa = AsfNfa::new(load(nfa)?);
                    (universality_instance(&nfa).map_err(|e| Failure::Usage(e.to_string()))?, output)
                }
                Reduce::Outputcompat { a, b, output } => (outputcompat_instance(&load(a)?, &load(b)?), output),
            };
            match output {
                Some(prefix) => {
                    let name = |suffix: &str| {
                        let mut s = prefix.clone().into_os_string();
                        s.push(suffix);
                        PathBuf::from(s)
                    };
                    write_out(Some(&name(".f.json")), &emit(&f))?;
                    write_out(Some(&name(".g.json")), &emit(&g))?;
                }
                None => print_value(&json!({
                    "f": serde_json::to_value(&f).expect("filter serializes"),
                    "g": serde_json::to_value(&g).expect("filter serializes"),
                })),
            }
            Ok(0)
        }
        Command::Random(a) => {
            let cfg = GeneratorConfig {
                seed: a.seed,
                state_count: a.states,
                alphabet_size: a.alphabet,
                color_count: a.colors,
                edge_density: a.density,
                colors_per_state: a.colors_per_state,
                force_deterministic: a.deterministic,
                force_sso: a.sso,
            };
            let f = random_filter(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            write_out(a.output.as_deref(), &emit(&f))?;
            Ok(0)
        }
        Command::Dot {
            file,
            output,
            top_down,
            no_fill,
        } => {
            let opts = RenderOptions {
                left_to_right: !top_down,
                fill: !no_fill,
                ..RenderOptions::default()
            };
            write_out(output.as_deref(), &emit_dot(&load(file)?, &opts))?;
            Ok(0)
        }
        Command::Separate {
            count,
            start,
            states,
            alphabet,
            colors,
            density,
            colors_per_state,
            budget,
        } => separate(format, *start..*start + *count, |seed| GeneratorConfig {
            seed,
            state_count: *states,
            alphabet_size: *alphabet,
            color_count: *colors,
            edge_density: *density,
            colors_per_state: *colors_per_state,
            force_deterministic: true,
            force_sso: false,
        }, budget),
    }
}

/// Minimizes each generated input for every class and reports seeds where a
/// less restricted class needs fewer states.
fn separate(
    format: Format,
    seeds: std::ops::Range<u64>,
    config: impl Fn(u64) -> GeneratorConfig,
    budget: &BudgetArgs,
) -> Result<u8, Failure> {
    let mut gaps = Vec::new();
    let mut exhausted = Vec::new();
    let mut solved = 0;
    for seed in seeds {
        let f = random_filter(&config(seed)).map_err(|e| Failure::Usage(e.to_string()))?;
        let mut sizes = Vec::new();
        for target in TargetClass::ALL {
            match minimize(&f, target, &budget.budget()) {
                Ok(r) => sizes.push(r.size),
                Err(MinimizeError::Exhausted { .. }) => {
                    exhausted.push(json!({ "seed": seed, "target": target.to_string() }));
                    break;
                }
                Err(e) => return Err(Failure::Usage(e.to_string())),
            }
        }
        if let [df, sso, smo] = sizes[..] {
            solved += 1;
            if sso < df || smo < sso {
                let gap = json!({ "seed": seed, "df": df, "sso": sso, "smo": smo });
                if format == Format::Text {
                    out!("gap: {gap}");
                }
                gaps.push(gap);
            }
        }
    }
    match format {
        Format::Json => print_value(&json!({ "solved": solved, "gaps": gaps, "exhausted": exhausted })),
        Format::Text => {
            out!("{solved} inputs solved for every class, {} exhausted", exhausted.len());
            if gaps.is_empty() {
                out!("no size gaps found");
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            failure.report(cli.format);
            ExitCode::from(failure.code())
        }
    }
}
