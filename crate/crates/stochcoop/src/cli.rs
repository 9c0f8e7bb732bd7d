//! Command-line front end.
//!
//! Exit codes: 0 when the analysis completed, 1 when it found an empty core or a
//! non-member and `--fail-on-empty` is set (or a selftest case failed), 2 on bad input.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use stochcoop_core::ssd::{
    compare_within, dominance_conditions, dominates_numeric, Condition, NumericDominance, NumericVerdict,
};
use stochcoop_core::ssdcore::{
    dc_check, dc_membership, dc_nonempty_dr_normal, dc_nonempty_dr_signed, dc_nonempty_dr_uniform, dc_nonempty_r,
    dr_condition_feasible,
};
use stochcoop_core::{
    Allocation, ClassicalGame, Coalition, CoreError, Distribution, Family, NewsvendorProblem, OracleConfig, SsdVerdict,
    StochasticGame,
};
use thiserror::Error;

use crate::report::{num, nums, Report};
use crate::schema::{self, DistributionSpec, GameInput, SchemaError};
use crate::selftest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Schema(#[from] SchemaError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Game(#[from] stochcoop_core::GameError),
    #[error("{0}")]
    Ssd(#[from] stochcoop_core::SsdError),
    #[error("{0}")]
    Newsvendor(#[from] stochcoop_core::NewsvendorError),
    #[error("tolerance must be finite and nonnegative, got {0}")]
    Tolerance(f64),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AllocationType {
    R,
    Dr,
    DrSigned,
}

impl AllocationType {
    fn name(self) -> &'static str {
        match self {
            AllocationType::R => "r",
            AllocationType::Dr => "dr",
            AllocationType::DrSigned => "dr-signed",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stochcoop", version, about = "SSD-core analysis of stochastic cooperative games")]
pub struct Cli {
    /// Feasibility and membership tolerance.
    #[arg(long, global = true, allow_negative_numbers = true, default_value_t = stochcoop_core::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    /// Seed for the randomized sweep in `selftest`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Exit with status 1 when the verdict is empty or negative.
    #[arg(long, global = true)]
    pub fail_on_empty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Second-order stochastic dominance between two laws.
    #[command(subcommand)]
    Ssd(SsdCommand),
    /// SSD-core questions on a stochastic game file.
    #[command(subcommand)]
    Game(GameCommand),
    /// The multiple risk-averse newsvendors game.
    #[command(subcommand)]
    Newsvendor(NewsvendorCommand),
    /// Run the golden examples and a seeded sweep.
    Selftest,
}

#[derive(Debug, Subcommand)]
pub enum SsdCommand {
    /// Compare two laws given as JSON text or file paths.
    Compare {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        /// Also run the CDF-integration oracle (required across families).
        #[arg(long)]
        numeric: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum GameCommand {
    /// Decide nonemptiness of the SSD-core for one allocation type.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        allocation_type: AllocationType,
        /// Also write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check one allocation for SSD-core membership.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        allocation: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum NewsvendorCommand {
    /// Decide whether the vendors can share the pooled profit.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Write the profit CDF of one coalition as CSV.
    ExportCdf {
        #[arg(long)]
        input: PathBuf,
        /// Coalition key such as `1,2`.
        #[arg(long)]
        coalition: String,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

/// What a command produced: a report, or raw text such as CSV.
pub enum Output {
    Report { report: Report, negative: bool },
    Raw(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })
}

fn opt_pair(w: &Option<(Vec<f64>, Vec<f64>)>) -> Value {
    match w {
        Some((d, r)) => json!({"d": nums(d), "r": nums(r)}),
        None => Value::Null,
    }
}

fn verdict(nonempty: bool) -> &'static str {
    if nonempty {
        "nonempty"
    } else {
        "empty"
    }
}

fn derived_rows(mean: &ClassicalGame, deviation: Option<&ClassicalGame>, lower: Option<&ClassicalGame>) -> Value {
    Coalition::all_nonempty(mean.players())
        .map(|s| {
            let mut row = json!({"coalition": s.key(), "mean": num(mean.value(s))});
            if let Some(dev) = deviation {
                row["deviation"] = num(dev.value(s));
            }
            if let Some(low) = lower {
                row["lower"] = num(low.value(s));
            }
            row
        })
        .collect()
}

/// Smallest slack of the `(d, r)` conditions on derived games.
fn dr_min_slack(mean: &ClassicalGame, lower: &ClassicalGame, d: &[f64], r: &[f64]) -> f64 {
    let gap = mean.grand_value() - lower.grand_value();
    Coalition::all_nonempty(mean.players())
        .flat_map(|s| {
            let ds = s.sum(d);
            [ds - mean.value(s), ds - lower.value(s) - s.sum(r) * gap]
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn analyze_game(game: &GameInput, kind: AllocationType, tol: f64) -> Result<(Value, bool), CliError> {
    let n = game.players();
    let mut out = json!({
        "players": n,
        "family": game.family_name(),
        "allocation_type": kind.name(),
    });
    let g = match game {
        GameInput::Derived { mean, lower } => {
            if kind != AllocationType::Dr {
                return Err(CliError::Usage(format!(
                    "derived-game files support only --allocation-type dr, got {}",
                    kind.name()
                )));
            }
            let witness = dr_condition_feasible(mean, lower, tol)?;
            let mean_ok = mean.core_nonempty(tol)?.is_some();
            let lower_ok = lower.core_nonempty(tol)?.is_some();
            let convex = lower.is_convex();
            let nonempty = witness.is_some();
            out["verdict"] = json!(verdict(nonempty));
            out["witness"] = opt_pair(&witness);
            if let Some((d, r)) = &witness {
                out["witness_min_slack"] = num(dr_min_slack(mean, lower, d, r));
            }
            out["derived"] = json!({
                "mean_core_nonempty": mean_ok,
                "lower_core_nonempty": lower_ok,
                "lower_convex": convex,
                "theorem_consistent": (!nonempty || (mean_ok && lower_ok)) && (!(convex && mean_ok) || nonempty),
            });
            out["games"] = derived_rows(mean, None, Some(lower));
            return Ok((out, !nonempty));
        }
        GameInput::Stochastic(g) => g,
    };
    let derived = g.derive_games();
    let mut flags = json!({"mean_core_nonempty": derived.mean.core_nonempty(tol)?.is_some()});
    if let Some(dev) = &derived.deviation {
        if g.family() == Family::Normal {
            flags["deviation_cost_core_nonempty"] = json!(dev.cost_core_nonempty(tol)?.is_some());
        }
    }
    if let Some(low) = &derived.lower {
        flags["lower_core_nonempty"] = json!(low.core_nonempty(tol)?.is_some());
        flags["lower_convex"] = json!(low.is_convex());
    }
    let (nonempty, witness_value, alloc) = match kind {
        AllocationType::R => {
            let w = dc_nonempty_r(g, tol)?;
            let alloc = w.clone().map(|r| Allocation::R { r });
            (w.is_some(), w.map(|r| json!({"r": nums(&r)})).unwrap_or(Value::Null), alloc)
        }
        AllocationType::Dr => {
            let w = match g.family() {
                Family::Normal => dc_nonempty_dr_normal(g, tol)?,
                Family::Uniform => {
                    let rep = dc_nonempty_dr_uniform(g, tol)?;
                    flags["theorem_consistent"] = json!(rep.theorem_consistent);
                    rep.witness
                }
                f => return Err(CoreError::UnsupportedFamily(f).into()),
            };
            let alloc = w.clone().map(|(d, r)| Allocation::Dr { d, r });
            (w.is_some(), opt_pair(&w), alloc)
        }
        AllocationType::DrSigned => {
            let w = dc_nonempty_dr_signed(g, tol)?;
            let alloc = w.clone().map(|(d, r)| Allocation::DrSigned { d, r });
            (w.is_some(), opt_pair(&w), alloc)
        }
    };
    out["verdict"] = json!(verdict(nonempty));
    out["witness"] = witness_value;
    if let Some(alloc) = alloc {
        out["witness_member"] = json!(dc_membership(g, &alloc, tol)?);
    }
    out["derived"] = flags;
    out["games"] = derived_rows(&derived.mean, derived.deviation.as_ref(), derived.lower.as_ref());
    Ok((out, !nonempty))
}

fn first_failed(conditions: &[Condition], tol: f64) -> Option<&Condition> {
    conditions.iter().find(|c| !c.holds(tol))
}

fn condition_name(c: &Condition) -> String {
    if c.index > 0 {
        format!("{}[{}]", c.name, c.index)
    } else {
        c.name.to_string()
    }
}

pub fn check_allocation(g: &StochasticGame, alloc: &Allocation, tol: f64) -> Result<(Value, bool), CliError> {
    let rep = dc_check(g, alloc, tol)?;
    let requirements: Vec<Value> = rep
        .requirements
        .iter()
        .map(|r| json!({"requirement": r.name, "value": num(r.value), "target": num(r.target), "satisfied": r.satisfied}))
        .collect();
    let coalitions: Vec<Value> = rep
        .coalitions
        .iter()
        .map(|c| {
            let min_slack = c.conditions.iter().map(|k| k.slack()).fold(f64::INFINITY, f64::min);
            json!({
                "coalition": c.coalition.key(),
                "dominates": c.dominates,
                "failed": first_failed(&c.conditions, tol).map(condition_name).unwrap_or_else(|| "-".into()),
                "min_slack": num(min_slack),
            })
        })
        .collect();
    let violation = rep.coalitions.iter().find_map(|c| {
        first_failed(&c.conditions, tol).map(|k| {
            json!({
                "coalition": c.coalition.key(),
                "condition": condition_name(k),
                "lhs": num(k.lhs),
                "rhs": num(k.rhs),
            })
        })
    });
    let out = json!({
        "players": g.players(),
        "family": g.family().name(),
        "allocation_type": alloc.kind(),
        "member": rep.member,
        "requirements": requirements,
        "coalitions": coalitions,
        "first_violation": violation.unwrap_or(Value::Null),
    });
    Ok((out, !rep.member))
}

fn conditions_value(cs: &[Condition], tol: f64) -> Value {
    cs.iter()
        .map(|c| json!({"condition": condition_name(c), "lhs": num(c.lhs), "rhs": num(c.rhs), "holds": c.holds(tol)}))
        .collect()
}

fn numeric_value(d: &NumericDominance) -> Value {
    let verdict = match d.verdict {
        NumericVerdict::True => "true",
        NumericVerdict::False => "false",
        NumericVerdict::Borderline => "borderline",
    };
    json!({
        "verdict": verdict,
        "max_ratio": num(d.max_ratio),
        "max_integral": num(d.max_integral),
        "argmax": num(d.argmax),
        "tail_violation": d.tail_violation,
    })
}

pub fn compare_laws(x: &Distribution, y: &Distribution, numeric: bool, tol: f64) -> Result<Value, CliError> {
    let spec = |d: &Distribution| serde_json::to_value(DistributionSpec::from_distribution(d)).expect("plain data");
    let mut out = json!({"left": spec(x), "right": spec(y)});
    match compare_within(x, y, tol) {
        Ok(v) => {
            let name = match v {
                SsdVerdict::LeftDominates => "left_dominates",
                SsdVerdict::RightDominates => "right_dominates",
                SsdVerdict::Equivalent => "equivalent",
                SsdVerdict::Incomparable => "incomparable",
            };
            out["closed_form"] = json!({
                "verdict": name,
                "left_over_right": conditions_value(&dominance_conditions(x, y)?, tol),
                "right_over_left": conditions_value(&dominance_conditions(y, x)?, tol),
            });
        }
        Err(e) if numeric => out["closed_form_error"] = json!(e.to_string()),
        Err(e) => return Err(e.into()),
    }
    if numeric {
        let cfg = OracleConfig::default();
        out["numeric"] = json!({
            "left_over_right": numeric_value(&dominates_numeric(x, y, &cfg)),
            "right_over_left": numeric_value(&dominates_numeric(y, x, &cfg)),
        });
    }
    Ok(out)
}

pub fn analyze_newsvendor(prob: &NewsvendorProblem, tol: f64) -> Result<(Value, bool), CliError> {
    let rep = prob.cooperation_feasible(tol)?;
    let direct = prob.cooperation_feasible_direct(tol)?;
    let rows: Vec<Value> = rep
        .metrics
        .iter()
        .map(|m| {
            let (a, b) = prob.demand(m.coalition);
            json!({
                "coalition": m.coalition.key(),
                "a": num(a),
                "b": num(b),
                "order": num(prob.optimal_order(m.coalition)),
                "protection": num(m.protection),
                "market_quality": num(m.market_quality),
            })
        })
        .collect();
    let out = json!({
        "players": prob.players(),
        "p": num(prob.price()),
        "c": num(prob.cost()),
        "alpha": num(prob.alpha()),
        "feasible": rep.feasible,
        "witness": rep.witness.as_deref().map(nums).unwrap_or(Value::Null),
        "direct_feasible": direct.feasible,
        "binding": rep.binding.iter().map(|s| s.key()).collect::<Vec<_>>(),
        "coalitions": rows,
    });
    Ok((out, !rep.feasible))
}

/// `x,F` rows on `K + 1` points spanning the profit support widened by 5% each side.
pub fn export_cdf(prob: &NewsvendorProblem, s: Coalition, points: usize) -> String {
    let law = prob.profit(s);
    let (a, b) = law.support();
    let w = b - a;
    let (lo, hi) = (a - 0.05 * w, b + 0.05 * w);
    let mut csv = String::from("x,F\n");
    for k in 0..=points {
        let x = if k == points { hi } else { lo + (hi - lo) * k as f64 / points as f64 };
        csv.push_str(&format!("{},{}\n", num(x), num(law.cdf(x))));
    }
    csv
}

fn load_law(arg: &str) -> Result<Distribution, CliError> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { read(Path::new(arg))? };
    Ok(schema::parse_distribution(&text)?)
}

fn load_stochastic(path: &Path) -> Result<StochasticGame, CliError> {
    match schema::parse_game(&read(path)?)? {
        GameInput::Stochastic(g) => Ok(g),
        GameInput::Derived { .. } => {
            Err(CliError::Usage(format!("{}: a per-coalition game is required", path.display())))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let tol = cli.tolerance;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Tolerance(tol));
    }
    let with_input = |mut v: Value, input: &Path| {
        let body = std::mem::take(v.as_object_mut().expect("object"));
        let mut obj = serde_json::Map::new();
        obj.insert("input".into(), json!(input.display().to_string()));
        obj.extend(body);
        Value::Object(obj)
    };
    let (command, result, negative) = match &cli.command {
        Command::Ssd(SsdCommand::Compare { left, right, numeric }) => {
            let (x, y) = (load_law(left)?, load_law(right)?);
            ("ssd compare", compare_laws(&x, &y, *numeric, tol)?, false)
        }
        Command::Game(GameCommand::Analyze { input, allocation_type, report }) => {
            let game = schema::parse_game(&read(input)?)?;
            let (v, negative) = analyze_game(&game, *allocation_type, tol)?;
            let rep = Report::new("game analyze", tol, with_input(v, input));
            if let Some(path) = report {
                std::fs::write(path, rep.to_json()).map_err(|source| CliError::Write { path: path.clone(), source })?;
            }
            return Ok(Output::Report { report: rep, negative });
        }
        Command::Game(GameCommand::Check { input, allocation }) => {
            let g = load_stochastic(input)?;
            let alloc = schema::parse_allocation(&read(allocation)?, g.players())?;
            let (v, negative) = check_allocation(&g, &alloc, tol)?;
            ("game check", with_input(v, input), negative)
        }
        Command::Newsvendor(NewsvendorCommand::Analyze { input }) => {
            let prob = schema::parse_newsvendor(&read(input)?)?;
            let (v, negative) = analyze_newsvendor(&prob, tol)?;
            ("newsvendor analyze", with_input(v, input), negative)
        }
        Command::Newsvendor(NewsvendorCommand::ExportCdf { input, coalition, points }) => {
            let prob = schema::parse_newsvendor(&read(input)?)?;
            let s = Coalition::parse_key(coalition, prob.players()).map_err(|e| CliError::Usage(e.to_string()))?;
            if *points == 0 {
                return Err(CliError::Usage("--points must be positive".into()));
            }
            return Ok(Output::Raw(export_cdf(&prob, s, *points)));
        }
        Command::Selftest => {
            let seed = cli.seed.unwrap_or(0);
            let cases = selftest::run(seed, tol);
            let failed = cases.iter().filter(|c| !c.passed).count();
            let rows: Vec<Value> =
                cases.iter().map(|c| json!({"case": c.name, "passed": c.passed, "detail": c.detail})).collect();
            let mut rep =
                Report::new("selftest", tol, json!({"passed": cases.len() - failed, "failed": failed, "cases": rows}));
            rep.seed = Some(seed);
            return Ok(Output::Report { report: rep, negative: failed > 0 });
        }
    };
    Ok(Output::Report { report: Report::new(command, tol, result), negative })
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli) {
        Ok(Output::Raw(text)) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Ok(Output::Report { report, negative }) => {
            let text = match cli.output {
                OutputFormat::Json => report.to_json(),
                OutputFormat::Text => report.to_text(),
            };
            let _ = out.write_all(text.as_bytes());
            let selftest = matches!(cli.command, Command::Selftest);
            if negative && (cli.fail_on_empty || selftest) {
                1
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
