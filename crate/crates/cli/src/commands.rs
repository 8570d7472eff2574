use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use weighwright::bounds::BoundsRow;
use weighwright::composition::plan;
use weighwright::search::{SearchLimits, SearchOutcome, SearchProblem, Solver};
use weighwright::session::Session;
use weighwright::strategies::{builtin, import_text, repair_tree_with, verify_tree, ImportOptions, RepairOptions};
use weighwright::{Error, Semantics, StrategyTable};

use crate::source;

#[derive(Parser, Debug)]
#[command(name = "weighwright", version, about = "Find heavy coins with a balance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SemanticsArg {
    Exact,
    Sort,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Exact => Semantics::Exact,
            SemanticsArg::Sort => Semantics::Sort,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a strategy against every fake set.
    Verify {
        /// alg1, alg2, alg3 or a strategy file.
        strategy: String,
        /// Defaults to the semantics recorded in the file.
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
        /// Rebuild failing subtrees by search before reporting.
        #[arg(long)]
        repair: bool,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Search for a strategy for n coins.
    Solve {
        n: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_enum, default_value = "exact")]
        semantics: SemanticsArg,
        /// Give up after this many search nodes.
        #[arg(long)]
        budget: Option<u64>,
        /// Give up after this many seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Write the strategy here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Allow more than 8 coins.
        #[arg(long)]
        force: bool,
    },
    /// Lay out a plan for n coins.
    Plan {
        n: u32,
        #[arg(long, value_enum, default_value = "exact")]
        semantics: SemanticsArg,
        /// Write the plan as JSON to this file, or `-` for standard output.
        #[arg(long)]
        export: Option<String>,
    },
    /// Tabulate the lower and upper bounds.
    Bounds {
        from: u64,
        to: u64,
        #[arg(long)]
        json: bool,
    },
    /// Walk through a plan at the terminal, answering with <, = or >.
    Session(SessionArgs),
    /// Serve the session API over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append each session's events to a JSON-lines file here and
        /// restore sessions found there at startup.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Print a strategy as JSON or Graphviz.
    Export {
        strategy: String,
        #[arg(long)]
        dot: bool,
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
        #[arg(long)]
        repair: bool,
    },
    /// Convert a table in the plain-text layout to a strategy file.
    Import {
        input: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long, value_enum, default_value = "sort")]
        semantics: SemanticsArg,
        #[arg(long, default_value_t = 11)]
        universe: u32,
        /// Keep printed keys as they are.
        #[arg(long)]
        literal: bool,
    },
}

#[derive(Args, Debug)]
pub struct SessionArgs {
    /// Number of coins; ignored with --tree.
    pub n: Option<u32>,
    /// Run a single strategy instead of a plan.
    #[arg(long)]
    pub tree: Option<String>,
    #[arg(long, value_enum, default_value = "sort")]
    pub semantics: SemanticsArg,
    /// Append events to this JSON-lines file.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

/// Exit codes.
pub const OK: i32 = 0;
pub const FAILED: i32 = 1;
pub const BAD_INPUT: i32 = 2;
pub const OVER_BUDGET: i32 = 3;

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, input, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::BudgetExceeded { .. }) => OVER_BUDGET,
                Some(Error::Parse { .. } | Error::UnknownStrategy(_) | Error::Io(_) | Error::EmptyTable) => BAD_INPUT,
                _ => FAILED,
            }
        }
    }
}

fn dispatch(cli: Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Command::Verify {
            strategy,
            semantics,
            repair,
            json,
        } => verify(&strategy, semantics.map(Into::into), repair, json, out),
        Command::Solve {
            n,
            depth,
            semantics,
            budget,
            timeout,
            out: path,
            force,
        } => solve(n, depth, semantics.into(), budget, timeout, path, force, out),
        Command::Plan { n, semantics, export } => {
            let p = plan::plan(n, semantics.into())?;
            match export.as_deref() {
                Some("-") => writeln!(out, "{}", p.to_json())?,
                Some(path) => {
                    std::fs::write(path, p.to_json())?;
                    write!(out, "{}", p.describe())?;
                }
                None => write!(out, "{}", p.describe())?,
            }
            Ok(OK)
        }
        Command::Bounds { from, to, json } => {
            anyhow::ensure!(from >= 1 && from <= to, "need 1 <= from <= to");
            let rows = weighwright::bounds::table(from, to);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            } else {
                for row in rows {
                    writeln!(out, "{}", BoundsRow::to_tsv(&row))?;
                }
            }
            Ok(OK)
        }
        Command::Session(args) => session(args, input, out),
        Command::Serve { port, host, log_dir } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::server::serve(&host, port, log_dir))?;
            Ok(OK)
        }
        Command::Export {
            strategy,
            dot,
            semantics,
            repair,
        } => {
            let (table, tree) = load_tree(&strategy, semantics.map(Into::into), repair)?;
            if dot {
                write!(out, "{}", tree.to_dot(&table.name))?;
            } else {
                let sem = semantics.map(Into::into).unwrap_or(table.semantics);
                write!(out, "{}", StrategyTable::from_tree(table.name.clone(), sem, &tree).to_json())?;
            }
            Ok(OK)
        }
        Command::Import {
            input: path,
            name,
            semantics,
            universe,
            literal,
        } => {
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let opts = ImportOptions {
                name,
                universe,
                semantics: semantics.into(),
                recover_positional: !literal,
                pad_short_leaf_keys: !literal,
            };
            let table = import_text(&text, &opts)?;
            write!(out, "{}", table.to_json())?;
            Ok(OK)
        }
    }
}

/// The tree for `which`, repaired if asked.
fn load_tree(which: &str, semantics: Option<Semantics>, repair: bool) -> anyhow::Result<(StrategyTable, weighwright::DecisionTree)> {
    let table = source::load(which)?;
    let tree = table.to_tree()?;
    if !repair {
        return Ok((table, tree));
    }
    let sem = semantics.unwrap_or(table.semantics);
    let report = verify_tree(&tree, sem);
    let fixed = repair_tree_with(&tree, &report, &repair_options(&table, sem))?;
    Ok((table, fixed.tree))
}

fn repair_options(table: &StrategyTable, semantics: Semantics) -> RepairOptions {
    if table.universe == 11 {
        builtin::repair_options(semantics)
    } else {
        let tree_depth = table.to_tree().map(|t| t.depth()).unwrap_or(0);
        RepairOptions::new(tree_depth.max(weighwright::bounds::upper(table.universe as u64) as u32))
    }
}

fn verify(which: &str, semantics: Option<Semantics>, repair: bool, json: bool, out: &mut dyn Write) -> anyhow::Result<i32> {
    let table = source::load(which)?;
    let sem = semantics.unwrap_or(table.semantics);
    let tree = table.to_tree()?;
    let raw = verify_tree(&tree, sem);
    let label = format!("{} ({sem})", table.name);
    let (report, rebuilt) = if repair {
        let fixed = repair_tree_with(&tree, &raw, &repair_options(&table, sem))?;
        writeln!(out, "{label} as transcribed: {raw}")?;
        writeln!(out, "rebuilt {} subtrees", fixed.rebuilt.len())?;
        (verify_tree(&fixed.tree, sem), Some(fixed.rebuilt))
    } else {
        (raw, None)
    };
    if json {
        let doc = serde_json::json!({ "name": table.name, "report": report, "rebuilt": rebuilt });
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        writeln!(out, "{label}: {report}")?;
        for d in report.defects.iter().take(20) {
            let path: Vec<String> = d.path.iter().map(|x| x.to_string()).collect();
            writeln!(out, "  ({}): {:?}, {} cases", path.join(","), d.kind, d.cases)?;
        }
        if report.defects.len() > 20 {
            writeln!(out, "  ... {} more", report.defects.len() - 20)?;
        }
    }
    Ok(if report.is_correct() { OK } else { FAILED })
}

#[allow(clippy::too_many_arguments)]
fn solve(
    n: u32,
    depth: u32,
    semantics: Semantics,
    budget: Option<u64>,
    timeout: Option<u64>,
    path: Option<PathBuf>,
    force: bool,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    anyhow::ensure!(n >= 1, "need at least one coin");
    anyhow::ensure!(force || n <= 8, "{n} coins is beyond the default search limit of 8; pass --force");
    let problem = SearchProblem::for_semantics(n, depth, semantics)?;
    let mut limits = SearchLimits::default();
    if budget.is_some() {
        limits.max_nodes = budget;
    }
    limits.max_time = timeout.map(Duration::from_secs);
    let mut solver = Solver::new(limits);
    match solver.solve(&problem)? {
        SearchOutcome::Infeasible => {
            writeln!(out, "infeasible at depth {depth}")?;
        }
        SearchOutcome::Found(tree) => {
            let name = format!("search-{n}-{semantics}-{depth}");
            let doc = StrategyTable::from_tree(name, semantics, &tree).to_json();
            match path {
                Some(p) => {
                    std::fs::write(&p, doc)?;
                    writeln!(out, "depth {} strategy written to {}", tree.depth(), p.display())?;
                }
                None => write!(out, "{doc}")?,
            }
        }
    }
    Ok(OK)
}

fn session(args: SessionArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> anyhow::Result<i32> {
    let semantics: Semantics = args.semantics.into();
    let mut session = match (&args.tree, args.n) {
        (Some(which), _) => {
            let (table, tree) = load_tree(which, Some(semantics), source::is_builtin(which))?;
            Session::for_tree(tree, semantics, &table.name)?
        }
        (None, Some(n)) => Session::for_coins(n, semantics)?,
        (None, None) => anyhow::bail!("give a number of coins or --tree"),
    };
    let mut log = match &args.log {
        Some(p) => Some(crate::server::EventLog::create(p, &crate::server::Origin::from_args(args.n, args.tree.clone(), semantics))?),
        None => None,
    };
    writeln!(out, "{}", session.plan().header())?;
    let mut line = String::new();
    while !session.is_finished() {
        writeln!(out, "{}", session.prompt())?;
        write!(out, "outcome (<, =, >): ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            writeln!(out, "stopped before the end")?;
            return Ok(FAILED);
        }
        match session.submit_symbol(&line) {
            Ok(_) => {
                if let Some(log) = log.as_mut() {
                    log.outcome(line.trim())?;
                }
            }
            Err(e @ Error::Contradiction(_)) => writeln!(out, "{e}; weigh again")?,
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    writeln!(out, "result: {}", session.prompt())?;
    Ok(OK)
}

pub fn shared_plan(n: u32, semantics: Semantics) -> anyhow::Result<Arc<plan::CompositePlan>> {
    Ok(Arc::new(plan::plan(n, semantics)?))
}
