//! The `dirent` command-line tool.
//!
//! Every value is computed in nats and divided by `ln(base)` only when it is
//! rendered. Exit codes: 0 on success, 1 on domain errors, 2 on usage errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use dirent::estimator::{estimate_tde, CountMode, EstimateRecord, DEFAULT_BUDGET};
use dirent::measures::{
    bernoulli_bound, entropy_rate, markov_bound, shannon_entropy, MarkovMeasure, MatrixJson,
    ProbVector, StochasticMatrix, VectorJson,
};
use dirent::mtde::{mtde_case_theorem, mtde_circle_curve, sector_boundaries, MtdeCase};
use dirent::tde::CurveJson;
use dirent::{invert, parse_rule, permutivity_report, tde_curve, to_laurent, Direction, LocalRule, PermutivityReport, PrimePower};

pub mod output;

pub use output::{emit_csv, emit_svg, format_number};

/// Environment variable naming the directory for relative output paths.
pub const OUT_DIR_ENV: &str = "DIRENT_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] dirent::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use dirent::Error as E;
        match self {
            CliError::Usage(_)
            | CliError::Domain(E::Syntax { .. } | E::InvalidWindow(_) | E::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogBase {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
    #[value(name = "10")]
    Ten,
    /// The alphabet size of the input.
    #[value(name = "m")]
    M,
}

impl LogBase {
    /// `ln(base)`; `alphabet` is used for [`LogBase::M`].
    pub fn ln(self, alphabet: u64) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
            LogBase::Ten => std::f64::consts::LN_10,
            LogBase::M => (alphabet as f64).ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
            LogBase::Ten => "10",
            LogBase::M => "m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Debug, Parser)]
#[command(name = "dirent", version, about = "Directional entropy of linear cellular automata")]
pub struct Cli {
    /// Base of the logarithm used for every printed entropy.
    #[arg(long, global = true, value_enum, default_value = "e")]
    pub log_base: LogBase,

    /// Directory that relative --out and --svg paths are resolved against.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Uniform grid points; breakpoints are added on top.
    #[arg(long, default_value_t = 721)]
    pub samples: usize,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// JSON report: factorization, permutivity, inverse and entropy.
    Analyze {
        rule: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Topological directional entropy curve on [0, π].
    Tde {
        rule: String,
        #[command(flatten)]
        curve: CurveArgs,
        /// Print the closed-form sectors as JSON instead of the CSV.
        #[arg(long)]
        json: bool,
    },
    /// Uniform-measure directional entropy, on [0, 2π] or at one angle.
    Mtde {
        rule: String,
        #[command(flatten)]
        curve: CurveArgs,
        /// Evaluate at this angle only and print JSON.
        #[arg(long, allow_hyphen_values = true)]
        theta: Option<f64>,
    },
    /// Directional entropy bound |q|(r−l)h for a Bernoulli or Markov measure.
    Bounds {
        rule: String,
        /// Probability vector JSON: {"n": 4, "entries": ["1/2", ...]}.
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        vector: Option<PathBuf>,
        /// Stochastic matrix JSON: {"n": 4, "rows": [["1/2", ...], ...]}.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        q: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary vector, row entropies and entropy rate of a Markov chain.
    Markov {
        #[arg(long)]
        matrix: PathBuf,
        /// Integer direction (a,b) for h_(a,b) = |b|·rate.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        direction: Option<(i64, i64)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pattern-count estimate of the directional entropy.
    Estimate {
        rule: String,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta: f64,
        #[arg(long, default_value_t = 2)]
        half_width: u32,
        #[arg(long, default_value_t = 4)]
        rows: u32,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumeration cap in exact mode, sample count in sampled mode.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inverse rule, if the automaton is invertible.
    Invert {
        rule: String,
        #[arg(long)]
        json: bool,
    },
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected a,b but got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub start: f64,
    pub end: f64,
    pub expression: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub rule: String,
    pub modulus: u64,
    pub factorization: Vec<PrimePower>,
    pub span: (i64, i64),
    pub laurent: String,
    pub permutivity: PermutivityReport,
    pub invertible: bool,
    pub inverse: Option<String>,
    pub log_base: String,
    pub topological_entropy: f64,
    pub breakpoints: Vec<f64>,
    pub sectors: Vec<SectorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdeReport {
    pub rule: String,
    pub log_base: String,
    pub curve: CurveJson,
    pub topological_entropy: f64,
    pub sectors: Vec<SectorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtdePoint {
    pub rule: String,
    pub log_base: String,
    pub theta: f64,
    pub direction: Direction,
    pub value: f64,
    pub case: Option<MtdeCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rule: String,
    pub measure: String,
    pub log_base: String,
    pub q: f64,
    pub entropy: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    pub n: usize,
    pub log_base: String,
    /// `"p/q"` strings when the input was exact.
    pub stationary: Option<Vec<String>>,
    pub stationary_decimal: Vec<f64>,
    pub irreducible: bool,
    pub entropy_rate: f64,
    pub row_entropies: Vec<f64>,
    pub direction: Option<(i64, i64)>,
    pub directional_entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(flatten)]
    pub record: EstimateRecord,
    pub log_base: String,
    /// `nats_per_row` in the requested base.
    pub per_row: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertReport {
    pub rule: String,
    pub inverse: String,
    pub laurent: String,
    pub inverse_laurent: String,
}

/// Where artifacts go and where plain output is printed.
pub struct Context<'a> {
    pub log_base: LogBase,
    pub out_dir: Option<PathBuf>,
    pub stdout: &'a mut dyn Write,
}

impl Context<'_> {
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.out_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn write_file(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        let path = self.resolve(path);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|source| CliError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
    }

    fn emit(&mut self, out: Option<&Path>, contents: &str) -> Result<(), CliError> {
        match out {
            Some(path) => self.write_file(path, contents),
            None => self.stdout.write_all(contents.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
        }
    }

    fn emit_json<T: Serialize>(&mut self, out: Option<&Path>, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
        text.push('\n');
        self.emit(out, &text)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn rule_arg(text: &str) -> Result<LocalRule, CliError> {
    Ok(parse_rule(text)?.normalize())
}

fn sectors(rule: &LocalRule, scale: f64) -> Vec<SectorReport> {
    let curve = tde_curve(rule);
    curve
        .closed_form_report()
        .iter()
        .map(|s| SectorReport {
            start: s.start,
            end: s.end,
            expression: if scale == 1.0 {
                s.expression()
            } else {
                format!("({}) / {}", s.expression(), format_number(scale))
            },
        })
        .collect()
}

fn scaled(samples: Vec<dirent::CurveSample>, scale: f64) -> Vec<dirent::CurveSample> {
    samples
        .into_iter()
        .map(|p| dirent::CurveSample {
            theta: p.theta,
            value: p.value / scale,
        })
        .collect()
}

fn unit_label(base: LogBase) -> String {
    match base {
        LogBase::E => "entropy (nats)".into(),
        LogBase::Two => "entropy (bits)".into(),
        other => format!("entropy (log base {})", other.name()),
    }
}

fn write_curve(
    ctx: &mut Context<'_>,
    args: &CurveArgs,
    samples: &[dirent::CurveSample],
    markers: &[f64],
) -> Result<(), CliError> {
    if let Some(svg) = &args.svg {
        let plot = emit_svg(samples, markers, &unit_label(ctx.log_base))?;
        ctx.write_file(svg, &plot)?;
    }
    ctx.emit(args.out.as_deref(), &emit_csv(samples))
}

/// Runs one command, writing plain output to `ctx.stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut ctx = Context {
        log_base: cli.log_base,
        out_dir: cli.out_dir,
        stdout,
    };
    let base = cli.log_base;
    match cli.command {
        Command::Analyze { rule, out } => {
            let f = rule_arg(&rule)?;
            let scale = base.ln(f.m());
            let curve = tde_curve(&f);
            let inverse = match invert(&f) {
                Ok(g) => Some(g.to_string()),
                Err(dirent::Error::NotInvertible { .. }) => None,
                Err(e) => return Err(e.into()),
            };
            let report = AnalyzeReport {
                rule: f.to_string(),
                modulus: f.m(),
                factorization: f.modulus().factors().to_vec(),
                span: (f.left(), f.right()),
                laurent: to_laurent(&f).to_string(),
                permutivity: permutivity_report(&f),
                invertible: inverse.is_some(),
                inverse,
                log_base: base.name().into(),
                topological_entropy: curve.topological_entropy() / scale,
                breakpoints: curve.breakpoints().to_vec(),
                sectors: sectors(&f, scale),
            };
            ctx.emit_json(out.as_deref(), &report)
        }
        Command::Tde { rule, curve: args, json } => {
            let f = rule_arg(&rule)?;
            let scale = base.ln(f.m());
            let curve = tde_curve(&f);
            if json {
                let report = TdeReport {
                    rule: f.to_string(),
                    log_base: base.name().into(),
                    curve: curve.to_json(),
                    topological_entropy: curve.topological_entropy() / scale,
                    sectors: sectors(&f, scale),
                };
                return ctx.emit_json(args.out.as_deref(), &report);
            }
            let samples = scaled(curve.sample(args.samples), scale);
            write_curve(&mut ctx, &args, &samples, curve.breakpoints())
        }
        Command::Mtde { rule, curve: args, theta } => {
            let f = rule_arg(&rule)?;
            let scale = base.ln(f.m());
            if let Some(theta) = theta {
                let direction = Direction::unit(theta);
                let c = mtde_case_theorem(&f, direction)?;
                let point = MtdePoint {
                    rule: f.to_string(),
                    log_base: base.name().into(),
                    theta,
                    direction,
                    value: c.value / scale,
                    case: c.case,
                };
                return ctx.emit_json(args.out.as_deref(), &point);
            }
            let samples = scaled(mtde_circle_curve(&f, args.samples)?, scale);
            write_curve(&mut ctx, &args, &samples, &sector_boundaries(&f))
        }
        Command::Bounds {
            rule,
            vector,
            matrix,
            q,
            out,
        } => {
            let f = rule_arg(&rule)?;
            let scale = base.ln(f.m());
            let (measure, entropy, bound) = match (vector, matrix) {
                (Some(path), _) => {
                    let p = ProbVector::from_json(&read_json::<VectorJson>(&path)?)?;
                    ("bernoulli", shannon_entropy(&p), bernoulli_bound(&f, &p, q)?)
                }
                (None, Some(path)) => {
                    let t = StochasticMatrix::from_json(&read_json::<MatrixJson>(&path)?)?;
                    let mu = MarkovMeasure::new(t)?;
                    ("markov", entropy_rate(&mu).rate, markov_bound(&f, &mu, q)?)
                }
                (None, None) => return Err(CliError::Usage("need --vector or --matrix".into())),
            };
            let report = BoundReport {
                rule: f.to_string(),
                measure: measure.into(),
                log_base: base.name().into(),
                q,
                entropy: entropy / scale,
                bound: bound / scale,
            };
            ctx.emit_json(out.as_deref(), &report)
        }
        Command::Markov { matrix, direction, out } => {
            let t = StochasticMatrix::from_json(&read_json::<MatrixJson>(&matrix)?)?;
            let mu = MarkovMeasure::new(t)?;
            let scale = base.ln(mu.n() as u64);
            let rate = entropy_rate(&mu);
            let report = MarkovReport {
                n: mu.n(),
                log_base: base.name().into(),
                stationary: mu.is_exact().then(|| mu.stationary().to_strings()),
                stationary_decimal: mu.stationary().values().to_vec(),
                irreducible: mu.is_irreducible(),
                entropy_rate: rate.rate / scale,
                row_entropies: rate.row_entropies.iter().map(|h| h / scale).collect(),
                direction,
                directional_entropy: direction.map(|(_, b)| b.unsigned_abs() as f64 * rate.rate / scale),
            };
            ctx.emit_json(out.as_deref(), &report)
        }
        Command::Estimate {
            rule,
            theta,
            half_width,
            rows,
            mode,
            seed,
            budget,
            out,
        } => {
            let f = rule_arg(&rule)?;
            let mode = match mode {
                Mode::Exact => CountMode::Exact { budget },
                Mode::Sampled => CountMode::Sampled { seed, budget },
            };
            let record = estimate_tde(&f, theta, half_width, rows, mode)?;
            let per_row = record.nats_per_row / base.ln(f.m());
            let report = EstimateReport {
                record,
                log_base: base.name().into(),
                per_row,
            };
            ctx.emit_json(out.as_deref(), &report)
        }
        Command::Invert { rule, json } => {
            let f = rule_arg(&rule)?;
            let g = invert(&f)?;
            if json {
                let report = InvertReport {
                    rule: f.to_string(),
                    inverse: g.to_string(),
                    laurent: to_laurent(&f).to_string(),
                    inverse_laurent: to_laurent(&g).to_string(),
                };
                ctx.emit_json(None, &report)
            } else {
                ctx.emit(None, &format!("{g}\n"))
            }
        }
    }
}
