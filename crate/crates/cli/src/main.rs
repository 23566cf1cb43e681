//! `archslicer`: M2M commit detection, slicing and evaluation.
//!
//! Exit status: 0 on success, 1 on a runtime or input error, 2 on a usage
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use archslicer::detect::AmbiguityMode;
use archslicer::pipeline::{detect_repo, detect_summary, Analyzer};
use archslicer::report::{
    commit_items, emit_yaml, evaluate, instance_items, load_documents, table_row, Granularity, ToolConfig,
};
use archslicer::slice::render_slice_text;
use archslicer::vcs::{RevRange, WalkOptions};
use chrono::{DateTime, NaiveDate, NaiveTime, Utc};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "archslicer",
    version,
    about = "Detect module-level architectural change commits and slice them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the M2M verdict of every structural candidate commit.
    Detect {
        repo: PathBuf,
        /// Revision or range (`A..B`); all of HEAD's history by default.
        #[arg(long)]
        range: Option<String>,
        /// Earliest commit date, `YYYY-MM-DD` or RFC 3339.
        #[arg(long, value_parser = parse_since)]
        since: Option<DateTime<Utc>>,
        /// Latest commit date (inclusive), `YYYY-MM-DD` or RFC 3339.
        #[arg(long, value_parser = parse_until)]
        until: Option<DateTime<Utc>>,
        /// YAML tool configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Do not let ambiguous resolutions count toward M2M.
        #[arg(long)]
        strict_ambiguity: bool,
    },
    /// Write the slice document of one commit and print its slices.
    Slice {
        repo: PathBuf,
        commit: String,
        /// Directory receiving `<commit-id>.yaml`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare predicted slice documents with truth documents.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, value_enum, default_value = "slice")]
        granularity: GranularityArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GranularityArg {
    Slice,
    Commit,
}

fn parse_date(s: &str, time: NaiveTime) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.and_time(time).and_utc())
        .map_err(|_| format!("'{s}' is neither YYYY-MM-DD nor an RFC 3339 timestamp"))
}

fn parse_since(s: &str) -> Result<DateTime<Utc>, String> {
    parse_date(s, NaiveTime::MIN)
}

fn parse_until(s: &str) -> Result<DateTime<Utc>, String> {
    parse_date(s, NaiveTime::from_hms_opt(23, 59, 59).expect("valid time"))
}

fn load_config(path: Option<&Path>) -> Result<ToolConfig> {
    match path {
        Some(p) => ToolConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ToolConfig::default()),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Detect {
            repo,
            range,
            since,
            until,
            config,
            strict_ambiguity,
        } => {
            let mut config = load_config(config.as_deref())?;
            if strict_ambiguity {
                config.ambiguity_mode = AmbiguityMode::Strict;
            }
            let opts = WalkOptions {
                range: RevRange::parse(range.as_deref()),
                since,
                until,
            };
            let rows = detect_repo(&repo, &opts, &config)?;
            for row in &rows {
                println!("{}", row.render());
            }
            println!("{}", detect_summary(&rows));
        }
        Command::Slice {
            repo,
            commit,
            out,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let mut analyzer = Analyzer::open(&repo, config.clone())?;
            let analysis = analyzer.analyze_rev(&commit)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let file = out.join(format!("{}.yaml", analysis.commit_id));
            fs::write(&file, emit_yaml(&analysis.document)).with_context(|| format!("writing {}", file.display()))?;
            for record in &analysis.document.slices {
                println!("{}", render_slice_text(record, &config.alias_map));
            }
            for d in analysis.diagnostics.iter() {
                eprintln!("warning: {d}");
            }
        }
        Command::Eval {
            pred,
            truth,
            granularity,
        } => {
            for dir in [&pred, &truth] {
                if !dir.is_dir() {
                    bail!("{} is not a directory", dir.display());
                }
            }
            let predicted = load_documents(&pred)?;
            let expected = load_documents(&truth)?;
            let granularity = match granularity {
                GranularityArg::Slice => Granularity::SliceInstance,
                GranularityArg::Commit => Granularity::CommitVerdict,
            };
            let items = |docs| match granularity {
                Granularity::SliceInstance => instance_items(docs),
                Granularity::CommitVerdict => commit_items(docs),
            };
            let report = evaluate(&items(&predicted), &items(&expected));
            let project = truth
                .canonicalize()
                .ok()
                .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .unwrap_or_else(|| truth.display().to_string());
            let instances = instance_items(&expected).len();
            println!(
                "{}",
                table_row(&project, commit_items(&expected).len(), instances, &report)
            );
            println!(
                "tp={} fp={} fn={}",
                report.true_positives, report.false_positives, report.false_negatives
            );
            for item in &report.missing {
                println!("missing {item}");
            }
            for item in &report.spurious {
                println!("spurious {item}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
