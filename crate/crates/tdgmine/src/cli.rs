//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tdgmine_core::discovery::{
    learn_library_with, learn_tactic_with, Compression, Config, DiscoveryError,
};
use tdgmine_core::metrics::{evaluate_with, Baseline, CorpusStats, EvalConfig, LibraryReport};
use tdgmine_core::peano::{peano_learn_library, PeanoConfig};
use tdgmine_core::refactor::{refactor_corpus_with_outcomes, RefactorError};
use tdgmine_core::{build_proof_tdg, check_script, Corpus, TacticDef};

use crate::dot::export_dot;
use crate::format::{emit_corpus, emit_tactic, parse_corpus, ParseError};
use crate::ltac::emit_ltac;
use crate::split::split_corpus;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{source}", .path.display())]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Invalid(_) => EXIT_INVALID,
        }
    }
}

impl From<RefactorError> for CliError {
    fn from(e: RefactorError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<DiscoveryError> for CliError {
    fn from(e: DiscoveryError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tdgmine",
    version,
    about = "Mine custom tactics from proof traces"
)]
struct Cli {
    /// Stop tactic search after this many seconds and keep the best found so far.
    #[arg(long, global = true, value_name = "SECS")]
    time_budget: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaselineArg {
    Tdg,
    Peano,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate every proof and tactic definition.
    Check { corpus: PathBuf },
    /// Print proof count and size figures.
    Stats { corpus: PathBuf },
    /// Export the dependence graph of one proof as DOT.
    Tdg {
        corpus: PathBuf,
        #[arg(long)]
        proof: String,
        /// Output file; standard output if omitted.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Rewrite a corpus with the tactics defined in another file.
    Refactor {
        corpus: PathBuf,
        #[arg(long)]
        tactics: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Find the single most compressing tactic.
    Learn {
        corpus: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_freq: usize,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Learn tactics until none compresses the corpus further.
    LearnLib {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_eff: usize,
        #[arg(long)]
        max_tactics: Option<usize>,
    },
    /// Learn tactics with the sequence anti-unification baseline.
    Peano {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        max_tactics: Option<usize>,
    },
    /// Partition the proofs into training and test corpora.
    Split {
        corpus: PathBuf,
        #[arg(long)]
        train: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Learn on a training corpus and measure compression of a test corpus.
    Eval {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, value_enum, default_value_t = BaselineArg::Tdg)]
        baseline: BaselineArg,
        /// Also write the report as `key=value` lines to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn read_corpus(path: &Path) -> Result<Corpus, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn make_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Fails with exit code 3 unless every proof and tactic is well formed.
fn require_valid(corpus: &Corpus) -> Result<(), CliError> {
    for t in &corpus.tactics {
        if let Err(e) = t.validate() {
            return Err(CliError::Invalid(format!("tactic {}: {e}", t.name)));
        }
    }
    for p in &corpus.proofs {
        let r = check_script(p);
        if !r.is_valid() {
            return Err(CliError::Invalid(format!("proof {}: {r}", p.name)));
        }
    }
    Ok(())
}

fn deadline(budget: Option<f64>) -> Result<impl FnMut() -> bool, CliError> {
    let end = match budget {
        None => None,
        Some(s) if s.is_finite() && s >= 0.0 => Some(Instant::now() + Duration::from_secs_f64(s)),
        Some(s) => return Err(CliError::Usage(format!("invalid time budget {s}"))),
    };
    Ok(move || end.is_some_and(|e| Instant::now() >= e))
}

fn tactics_text(tactics: &[TacticDef]) -> String {
    let mut out = String::new();
    for (i, t) in tactics.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "# {}", emit_ltac(t));
        emit_tactic(&mut out, t);
    }
    out
}

/// `key=value` lines shared by `learn-lib`, `peano` and `eval`.
pub fn report_lines(r: &LibraryReport) -> String {
    let mean = r
        .mean_size
        .map_or_else(|| "-".to_string(), |m| m.to_string());
    format!(
        "tactics={}\nmean_tactic_size={mean}\nmax_tactic_size={}\nusage={}\nsize_before={}\nsize_after={}\ncompression_power={}\ndefinition_overhead={}\n",
        r.tactics,
        r.max_size,
        r.usage,
        r.size_before,
        r.size_after,
        r.compression_power,
        r.definition_overhead
    )
}

fn cmd_check(corpus: &Path, out: &mut String) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    let mut bad = 0;
    for t in &c.tactics {
        match t.validate() {
            Ok(()) => {
                let _ = writeln!(out, "tactic {}: valid", t.name);
            }
            Err(e) => {
                bad += 1;
                let _ = writeln!(out, "tactic {}: invalid: {e}", t.name);
            }
        }
    }
    for p in &c.proofs {
        let r = check_script(p);
        bad += usize::from(!r.is_valid());
        let _ = writeln!(out, "proof {}: {r}", p.name);
    }
    if bad > 0 {
        return Err(CliError::Invalid(format!("{bad} invalid definition(s)")));
    }
    Ok(())
}

fn cmd_stats(corpus: &Path, out: &mut String) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    let s = CorpusStats::of(&c);
    let mean = s.mean().map_or_else(|| "-".to_string(), |m| m.to_string());
    let _ = write!(
        out,
        "proofs={}\ninvocations={}\nmean_invocations={mean}\ntactics={}\n",
        s.proofs,
        s.invocations,
        c.tactics.len()
    );
    Ok(())
}

fn cmd_tdg(
    corpus: &Path,
    proof: &str,
    dot: Option<&Path>,
    out: &mut String,
) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    let p = c
        .proofs
        .iter()
        .find(|p| p.name == proof)
        .ok_or_else(|| CliError::Usage(format!("no proof named {proof}")))?;
    let (g, _) =
        build_proof_tdg(p).map_err(|e| CliError::Invalid(format!("proof {}: {e}", p.name)))?;
    let text = export_dot(&g);
    match dot {
        Some(path) => write_file(path, &text),
        None => {
            out.push_str(&text);
            Ok(())
        }
    }
}

fn cmd_refactor(
    corpus: &Path,
    tactics: &Path,
    output: &Path,
    out: &mut String,
) -> Result<(), CliError> {
    let mut c = read_corpus(corpus)?;
    let lib = read_corpus(tactics)?;
    require_valid(&c)?;
    let before = c.size();
    for t in &lib.tactics {
        let (next, outcomes) = refactor_corpus_with_outcomes(t, &c)?;
        let k: usize = outcomes.iter().map(|o| o.applications).sum();
        let _ = writeln!(
            out,
            "{}: {k} application(s), size {} -> {}",
            t.name,
            c.size(),
            next.size()
        );
        c = next;
    }
    let _ = writeln!(out, "size {before} -> {}", c.size());
    write_file(output, &emit_corpus(&c))
}

fn cmd_learn(
    corpus: &Path,
    cfg: &Config,
    budget: Option<f64>,
    out: &mut String,
) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    require_valid(&c)?;
    let mut stop = deadline(budget)?;
    match learn_tactic_with(&c, cfg, &Compression, &mut stop)? {
        None => out.push_str("no tactic found\n"),
        Some(l) => {
            let _ = write!(
                out,
                "effectiveness={}\nfrequency={}\nexplored={}\npruned={}\ntruncated={}\n\n",
                l.effectiveness, l.frequency, l.explored, l.pruned, l.truncated
            );
            out.push_str(&tactics_text(std::slice::from_ref(&l.tactic)));
        }
    }
    Ok(())
}

fn write_library(
    dir: &Path,
    tactics: &[TacticDef],
    refactored: &Corpus,
    report: &str,
) -> Result<(), CliError> {
    make_dir(dir)?;
    write_file(&dir.join("tactics.trace"), &tactics_text(tactics))?;
    write_file(&dir.join("refactored.trace"), &emit_corpus(refactored))?;
    write_file(&dir.join("report.txt"), report)
}

fn cmd_learn_lib(
    corpus: &Path,
    output: &Path,
    cfg: &Config,
    budget: Option<f64>,
    out: &mut String,
) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    require_valid(&c)?;
    let mut stop = deadline(budget)?;
    let lib = learn_library_with(&c, cfg, &Compression, &mut stop)?;
    let mut report = String::new();
    for (i, s) in lib.steps.iter().enumerate() {
        let _ = writeln!(
            report,
            "step{}={} effectiveness={} frequency={} size={}->{}",
            i + 1,
            s.name,
            s.effectiveness,
            s.frequency,
            s.size_before,
            s.size_after
        );
    }
    report.push_str(&report_lines(&LibraryReport::new(
        &lib.tactics,
        &c,
        &lib.corpus,
    )));
    let _ = writeln!(report, "truncated={}", lib.truncated);
    write_library(output, &lib.tactics, &lib.corpus, &report)?;
    out.push_str(&report);
    Ok(())
}

fn cmd_peano(
    corpus: &Path,
    output: &Path,
    cfg: &PeanoConfig,
    out: &mut String,
) -> Result<(), CliError> {
    let c = read_corpus(corpus)?;
    require_valid(&c)?;
    let lib = peano_learn_library(&c, cfg);
    let mut report = String::new();
    for (i, s) in lib.steps.iter().enumerate() {
        let _ = writeln!(
            report,
            "step{}={} score={} applications={} size={}->{}",
            i + 1,
            s.name,
            s.score,
            s.applications,
            s.size_before,
            s.size_after
        );
    }
    report.push_str(&report_lines(&LibraryReport::new(
        &lib.tactics,
        &c,
        &lib.corpus,
    )));
    write_library(output, &lib.tactics, &lib.corpus, &report)?;
    out.push_str(&report);
    Ok(())
}

fn cmd_split(
    corpus: &Path,
    train: f64,
    seed: u64,
    output: &Path,
    out: &mut String,
) -> Result<(), CliError> {
    if !(train > 0.0 && train < 1.0) {
        return Err(CliError::Usage(format!(
            "--train must lie strictly between 0 and 1, got {train}"
        )));
    }
    let c = read_corpus(corpus)?;
    let (tr, te) = split_corpus(&c, train, seed);
    make_dir(output)?;
    write_file(&output.join("train.trace"), &emit_corpus(&tr))?;
    write_file(&output.join("test.trace"), &emit_corpus(&te))?;
    let _ = writeln!(out, "train={}\ntest={}", tr.proofs.len(), te.proofs.len());
    Ok(())
}

fn cmd_eval(
    train: &Path,
    test: &Path,
    baseline: BaselineArg,
    report: Option<&Path>,
    budget: Option<f64>,
    out: &mut String,
) -> Result<(), CliError> {
    let tr = read_corpus(train)?;
    let te = read_corpus(test)?;
    require_valid(&tr)?;
    require_valid(&te)?;
    let mut stop = deadline(budget)?;
    let cfg = EvalConfig {
        baseline: match baseline {
            BaselineArg::Tdg => Baseline::Tdg,
            BaselineArg::Peano => Baseline::Peano,
        },
        ..EvalConfig::default()
    };
    let e = evaluate_with(&tr, &te, &cfg, &mut stop)?;
    let mut text = String::new();
    for (t, k) in e.tactics.iter().zip(&e.applications) {
        let _ = writeln!(text, "tactic={} size={} applications={k}", t.name, t.size());
    }
    text.push_str(&report_lines(&e.report));
    if let Some(path) = report {
        write_file(path, &report_lines(&e.report))?;
    }
    out.push_str(&text);
    Ok(())
}

fn dispatch(cli: Cli, out: &mut String) -> Result<(), CliError> {
    let budget = cli.time_budget;
    match cli.command {
        Command::Check { corpus } => cmd_check(&corpus, out),
        Command::Stats { corpus } => cmd_stats(&corpus, out),
        Command::Tdg { corpus, proof, dot } => cmd_tdg(&corpus, &proof, dot.as_deref(), out),
        Command::Refactor {
            corpus,
            tactics,
            output,
        } => cmd_refactor(&corpus, &tactics, &output, out),
        Command::Learn {
            corpus,
            min_freq,
            max_size,
        } => {
            let cfg = Config {
                min_frequency: min_freq,
                max_tactic_size: max_size,
                ..Config::default()
            };
            cmd_learn(&corpus, &cfg, budget, out)
        }
        Command::LearnLib {
            corpus,
            output,
            min_eff,
            max_tactics,
        } => {
            let cfg = Config {
                min_effectiveness: min_eff,
                max_tactics,
                ..Config::default()
            };
            cmd_learn_lib(&corpus, &output, &cfg, budget, out)
        }
        Command::Peano {
            corpus,
            output,
            max_tactics,
        } => {
            let cfg = PeanoConfig {
                max_tactics,
                ..PeanoConfig::default()
            };
            cmd_peano(&corpus, &output, &cfg, out)
        }
        Command::Split {
            corpus,
            train,
            seed,
            output,
        } => cmd_split(&corpus, train, seed, &output, out),
        Command::Eval {
            train,
            test,
            baseline,
            report,
        } => cmd_eval(&train, &test, baseline, report.as_deref(), budget, out),
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let mut out = String::new();
    let result = dispatch(cli, &mut out);
    let _ = std::io::stdout().write_all(out.as_bytes());
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
