use std::collections::HashSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opcover::scenario::{self, CheckDef, Op, Report, Scenario};
use opcover::tol::Config;
use opcover::{suite, Error};

#[derive(Parser)]
#[command(name = "opcover", version, about = "Finite-dimensional C*-cover workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Clone)]
struct Flags {
    /// Feasibility tolerance of the cb-check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    max_words: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

/// Scenario file plus optional names; with no names every matching check
/// in the scenario runs.
#[derive(Args)]
struct Target {
    /// Scenario path, or `builtin:NAME` for a bundled scenario.
    scenario: String,
    #[arg(long)]
    cover: Option<String>,
    /// Comma-separated cover names (join, meet, equivalent).
    #[arg(long, value_delimiter = ',')]
    covers: Vec<String>,
    #[arg(long)]
    lower: Option<String>,
    #[arg(long)]
    upper: Option<String>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    against: Option<String>,
    #[arg(long)]
    waive_maximality: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check of a scenario.
    Run {
        scenario: String,
        #[command(flatten)]
        flags: Flags,
    },
    CheckCover(Sub),
    Structure(Sub),
    Shilov(Sub),
    Essential(Sub),
    Envelope(Sub),
    Order(Sub),
    Equivalent(Sub),
    Join(Sub),
    Meet(Sub),
    Admissible(Sub),
    Inner(Sub),
    Crossed(Sub),
    Trivialize(Sub),
    Partial(Sub),
    /// Run the bundled golden corpus and the property suites.
    PaperSuite {
        #[command(flatten)]
        flags: Flags,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Args)]
struct Sub {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    flags: Flags,
}

fn config(flags: &Flags) -> Config {
    let mut cfg = Config::default();
    if let Some(n) = flags.max_iter {
        cfg.max_iter = n;
    }
    if let Some(n) = flags.max_words {
        cfg.max_words = n;
    }
    if let Some(t) = flags.tol {
        cfg.feas_tol = t;
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    cfg
}

fn load(spec: &str, flags: &Flags) -> Result<Scenario, Error> {
    let mut sc = match spec.strip_prefix("builtin:") {
        Some(name) => suite::scenario(name).ok_or_else(|| Error::Input(format!("no bundled scenario '{name}'")))?,
        None => Scenario::load(&PathBuf::from(spec))?,
    };
    // explicit flags beat the scenario's own settings
    if flags.seed.is_some() {
        sc.seed = flags.seed;
    }
    if flags.tol.is_some() {
        sc.tol = flags.tol;
    }
    Ok(sc)
}

/// Keeps the checks of `op` (or one ad-hoc check built from the names
/// given) plus the earlier checks whose `as` names they depend on.
fn select(sc: &mut Scenario, op: Op, t: &Target) {
    let adhoc = t.cover.is_some()
        || !t.covers.is_empty()
        || t.lower.is_some()
        || t.upper.is_some()
        || t.system.is_some()
        || t.against.is_some();
    let mut wanted: Vec<bool> = sc.checks.iter().map(|c| !adhoc && c.op == op).collect();
    if adhoc {
        let mut c = CheckDef::new(op);
        c.id = Some(op.name());
        c.cover = t.cover.clone();
        c.covers = t.covers.clone();
        c.lower = t.lower.clone();
        c.upper = t.upper.clone();
        c.system = t.system.clone();
        c.against = t.against.clone();
        c.waive_maximality = t.waive_maximality;
        sc.checks.push(c);
        wanted.push(true);
    }
    let mut need: HashSet<String> = HashSet::new();
    let mut keep = vec![false; sc.checks.len()];
    for (i, c) in sc.checks.iter().enumerate().rev() {
        if wanted[i] || c.as_name.as_ref().is_some_and(|n| need.contains(n)) {
            keep[i] = true;
            need.extend(c.cover.iter().chain(&c.covers).chain(&c.lower).chain(&c.upper).cloned());
        }
    }
    let mut it = keep.into_iter();
    sc.checks.retain(|_| it.next().unwrap_or(false));
}

fn emit(rep: &Report, f: Format) {
    let text = match f {
        Format::Json => serde_json::to_string_pretty(&rep.to_json()).expect("report serializes") + "\n",
        Format::Text => rep.render_text(),
    };
    // a closed pipe is not an error worth a panic
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(cmd: Cmd) -> Result<(Report, Format), Error> {
    let (op, sub) = match cmd {
        Cmd::Run { scenario, flags } => {
            let sc = load(&scenario, &flags)?;
            return Ok((scenario::run_scenario(&sc, &config(&flags))?, flags.format));
        }
        Cmd::PaperSuite { flags } => return Ok((suite::paper_suite(&config(&flags))?, flags.format)),
        Cmd::List => unreachable!(),
        Cmd::CheckCover(s) => (Op::CheckCover, s),
        Cmd::Structure(s) => (Op::Structure, s),
        Cmd::Shilov(s) => (Op::Shilov, s),
        Cmd::Essential(s) => (Op::Essential, s),
        Cmd::Envelope(s) => (Op::Envelope, s),
        Cmd::Order(s) => (Op::Order, s),
        Cmd::Equivalent(s) => (Op::Equivalent, s),
        Cmd::Join(s) => (Op::Join, s),
        Cmd::Meet(s) => (Op::Meet, s),
        Cmd::Admissible(s) => (Op::Admissible, s),
        Cmd::Inner(s) => (Op::Inner, s),
        Cmd::Crossed(s) => (Op::Crossed, s),
        Cmd::Trivialize(s) => (Op::Trivialize, s),
        Cmd::Partial(s) => (Op::Partial, s),
    };
    let mut sc = load(&sub.target.scenario, &sub.flags)?;
    select(&mut sc, op, &sub.target);
    Ok((scenario::run_scenario(&sc, &config(&sub.flags))?, sub.flags.format))
}

fn main() -> ExitCode {
    // usage errors share the input-error code; 2 means inconclusive
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Cmd::List = cli.cmd {
        let mut out = std::io::stdout().lock();
        for (name, _) in suite::SCENARIOS {
            let _ = writeln!(out, "{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(cli.cmd) {
        Ok((rep, f)) => {
            emit(&rep, f);
            ExitCode::from(rep.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("opcover: {e}");
            ExitCode::from(3)
        }
    }
}
