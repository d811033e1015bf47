//! `pfront`: simulate, tabulate and plot Pareto record frontiers.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use pareto_frontier::acceptance::{run_all, Suite};
use pareto_frontier::asymptotics::{
    a_coefficient, boundary_eval, centering, expected_gamma_asymptotic, iota_hat, mean_asymptotic_truncated,
    probability_bounds, BoundarySpec, MIN_ITERATED_LOG_N,
};
use pareto_frontier::exact::{
    expected_gamma, expected_gamma_exact, expected_iota, expected_rho, expected_rho_exact, expected_rho_truncated,
    EXACT_LIMIT,
};
use pareto_frontier::generators::all_generators;
use pareto_frontier::geometry::{RecordSet, TieMode};
use pareto_frontier::montecarlo::{replication_rng, run_experiment, sample_point, variance_vs_mean_report, SimulationConfig};
use pareto_frontier::report::{convergence_svg, frontier_svg, summary_json, write_csv};
use pareto_frontier::Error;
use serde_json::json;

const EXIT_USAGE: u8 = 1;
const EXIT_ACCEPTANCE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pfront", version, about = "Pareto record frontiers with Exponential(1) coordinates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Dimension.
    #[arg(long)]
    d: Option<u32>,
    /// Sample sizes: repeat the flag, or use `logspace:A:B` (10^A..10^B by decades)
    /// or `logspace:A:B:K` (K log-spaced values).
    #[arg(long = "n")]
    n: Vec<String>,
    /// Replications.
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Boundary family, `c=<v>` or `a=<v>`.
    #[arg(long)]
    boundary: Option<BoundarySpec>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Reject coordinate ties with an error (`false` resolves them by strict comparison).
    #[arg(long, action = ArgAction::Set, default_value_t = true)]
    strict_ties: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo experiment and write summary.csv and summary.json.
    Simulate(Common),
    /// Tabulate exact expectations.
    Exact(Common),
    /// Tabulate asymptotic coefficients, centerings and bounds.
    Asympt {
        #[command(flatten)]
        common: Common,
        /// Print the coefficients a_(d,j).
        #[arg(long)]
        coeffs: bool,
    },
    /// Run the acceptance suite.
    Check(Common),
    /// Render an SVG plot.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = PlotKind::Frontier)]
        kind: PlotKind,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PlotKind {
    /// d = 2 staircase of one sample path.
    Frontier,
    /// Exact versus asymptotic expected generator counts.
    Convergence,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(Error),
    Acceptance(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn parse_n_values(values: &[String]) -> CliResult<Vec<u64>> {
    let mut out = Vec::new();
    for v in values {
        if let Some(rest) = v.strip_prefix("logspace:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|_| Failure::Usage(format!("bad logspace bound {s:?}")));
            match parts.as_slice() {
                [a, b] => {
                    let (a, b) = (num(a)?, num(b)?);
                    let mut e = a;
                    while e <= b + 1e-9 {
                        out.push(10f64.powf(e).round() as u64);
                        e += 1.0;
                    }
                }
                [a, b, k] => {
                    let (a, b) = (num(a)?, num(b)?);
                    let k: usize = k.parse().map_err(|_| Failure::Usage(format!("bad logspace count {k:?}")))?;
                    if k < 2 {
                        return Err(Failure::Usage("logspace count must be >= 2".into()));
                    }
                    for i in 0..k {
                        let e = a + (b - a) * i as f64 / (k - 1) as f64;
                        out.push(10f64.powf(e).round() as u64);
                    }
                }
                _ => return Err(Failure::Usage(format!("bad logspace spec {v:?}"))),
            }
        } else {
            out.push(v.parse().map_err(|_| Failure::Usage(format!("bad --n value {v:?}")))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.first() == Some(&0) {
        return Err(Failure::Usage("--n values must be positive".into()));
    }
    Ok(out)
}

fn need_d(c: &Common) -> CliResult<u32> {
    match c.d {
        Some(0) => Err(Failure::Usage("--d must be >= 1".into())),
        Some(d) => Ok(d),
        None => Err(Failure::Usage("--d is required".into())),
    }
}

fn need_seed(c: &Common) -> CliResult<u64> {
    c.seed.ok_or_else(|| Failure::Usage("--seed is required".into()))
}

fn need_n(c: &Common) -> CliResult<Vec<u64>> {
    let ns = parse_n_values(&c.n)?;
    if ns.is_empty() {
        return Err(Failure::Usage("--n is required".into()));
    }
    Ok(ns)
}

fn tie_mode(c: &Common) -> TieMode {
    if c.strict_ties {
        TieMode::Strict
    } else {
        TieMode::Permissive
    }
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(e.into()))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Runtime(e.into()))?;
    Ok(path)
}

fn simulate(c: &Common) -> CliResult {
    let d = need_d(c)?;
    let seed = need_seed(c)?;
    let mut config = SimulationConfig::new(d as usize, need_n(c)?, c.reps, seed).with_threads(c.threads);
    config.boundary = c.boundary;
    config.tie_mode = tie_mode(c);
    config.validate()?;
    let summary = run_experiment(&config)?;
    let mut diagnostics = Vec::new();
    if config.boundary.is_some() {
        for &n in &config.checkpoints {
            if let Ok(r) = variance_vs_mean_report(&summary, n) {
                diagnostics.push(json!({ "kind": "variance_vs_mean", "report": r }));
            }
        }
    }
    for cp in &summary.checkpoints {
        // exploratory distribution data for the centred extremes; no assertion
        for stat in ["f_plus_centered", "hat_f_minus_scaled"] {
            if let Some(acc) = cp.get(stat) {
                let qs: Vec<f64> = (1..20).map(|i| acc.quantile(i as f64 / 20.0)).collect();
                diagnostics.push(json!({ "kind": "quantiles", "n": cp.n, "stat": stat, "probabilities": "i/20, i = 1..19", "values": qs }));
            }
        }
    }
    let mut csv = Vec::new();
    write_csv(&summary, &mut csv)?;
    let csv_path = write_file(&c.out, "summary.csv", &csv)?;
    let doc = summary_json(&config, &summary, diagnostics);
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Runtime(e.into()))?;
    let json_path = write_file(&c.out, "summary.json", text.as_bytes())?;
    println!(
        "{} replications, audit violations {}; wrote {} and {}",
        summary.replications,
        summary.audit.total_violations(),
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn exact(c: &Common) -> CliResult {
    let d = need_d(c)?;
    let ns = need_n(c)?;
    let mut out = String::from("d,n,rho_exact,iota_exact,gamma_exact,rho_rational,gamma_rational,b_n,rho_truncated,rho_truncated_abs_error\n");
    for n in ns {
        let (rho_q, gamma_q) = if n <= EXACT_LIMIT {
            (expected_rho_exact(d, n)?.to_string(), expected_gamma_exact(d, n)?.to_string())
        } else {
            (String::new(), String::new())
        };
        let (b, trunc) = match c.boundary {
            Some(spec) if n as f64 >= MIN_ITERATED_LOG_N => {
                let b = boundary_eval(spec, d, n as f64)?.b;
                (Some(b), Some(expected_rho_truncated(d, n, b)?))
            }
            _ => (None, None),
        };
        out.push_str(&format!(
            "{d},{n},{},{},{},{rho_q},{gamma_q},{},{},{}\n",
            expected_rho(d, n)?,
            expected_iota(d, n)?,
            expected_gamma(d, n)?,
            fmt_opt(b),
            fmt_opt(trunc.map(|q| q.value)),
            fmt_opt(trunc.map(|q| q.abs_error_estimate)),
        ));
    }
    emit(c, "exact.csv", &out)
}

fn emit(c: &Common, name: &str, table: &str) -> CliResult {
    print!("{table}");
    if c.out != Path::new(".") {
        write_file(&c.out, name, table.as_bytes())?;
    }
    io::stdout().flush().map_err(|e| Failure::Runtime(e.into()))?;
    Ok(())
}

fn asympt(c: &Common, coeffs: bool) -> CliResult {
    let d = need_d(c)?;
    let ns = parse_n_values(&c.n)?;
    if !coeffs && ns.is_empty() {
        return Err(Failure::Usage("asympt needs --coeffs or --n".into()));
    }
    let mut out = String::new();
    if coeffs {
        out.push_str("d,j,a\n");
        for j in 0..d {
            out.push_str(&format!("{d},{j},{}\n", a_coefficient(d, j)?));
        }
    }
    if !ns.is_empty() {
        out.push_str("d,n,iota_hat,gamma_asymptotic,gamma_exact,fplus_center,trailing_center,b_n,beta_n,c_n,mean_truncated,markov_hat_f,chebyshev_hat_f,markov_f\n");
        for n in ns {
            let nf = n as f64;
            let (fc, tc) = if d >= 2 && nf >= MIN_ITERATED_LOG_N {
                let ce = centering(d, nf)?;
                (Some(ce.fplus_center), Some(ce.trailing_center))
            } else {
                (None, None)
            };
            let bounds = match c.boundary {
                Some(spec) if nf >= MIN_ITERATED_LOG_N => Some((
                    boundary_eval(spec, d, nf)?,
                    mean_asymptotic_truncated(d, nf, spec)?,
                    probability_bounds(d, nf, spec)?,
                )),
                _ => None,
            };
            out.push_str(&format!(
                "{d},{n},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_opt(iota_hat(d, nf).ok()),
                fmt_opt(expected_gamma_asymptotic(d, nf).ok()),
                expected_gamma(d, n)?,
                fmt_opt(fc),
                fmt_opt(tc),
                fmt_opt(bounds.map(|b| b.0.b)),
                fmt_opt(bounds.map(|b| b.0.beta)),
                fmt_opt(bounds.map(|b| b.0.c)),
                fmt_opt(bounds.map(|b| b.1)),
                fmt_opt(bounds.map(|b| b.2.markov_hat_f)),
                fmt_opt(bounds.map(|b| b.2.chebyshev_hat_f)),
                fmt_opt(bounds.and_then(|b| b.2.markov_f)),
            ));
        }
    }
    emit(c, "asympt.csv", &out)
}

fn check(c: &Common) -> CliResult {
    let suite = Suite {
        threads: c.threads,
        seed: need_seed(c)?,
    };
    let outcomes = run_all(&suite, |o| println!("{}", o.line()));
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let doc = serde_json::to_string_pretty(&outcomes).map_err(|e| Failure::Runtime(e.into()))?;
    write_file(&c.out, "acceptance.json", doc.as_bytes())?;
    if failed > 0 {
        return Err(Failure::Acceptance(failed));
    }
    Ok(())
}

fn plot(c: &Common, kind: PlotKind) -> CliResult {
    let d = need_d(c)?;
    match kind {
        PlotKind::Frontier => {
            if d != 2 {
                return Err(Failure::Usage("frontier plots need --d 2".into()));
            }
            let seed = need_seed(c)?;
            let ns = need_n(c)?;
            let n = *ns.last().expect("nonempty");
            let mut rng = replication_rng(seed, 0);
            let mut rs = RecordSet::with_tie_mode(2, tie_mode(c))?;
            for _ in 0..n {
                rs.insert(&sample_point(&mut rng, 2))?;
            }
            let gens = all_generators(&rs)?;
            let stats = rs.frontier_record_stats()?;
            let (f_minus, _) = gens.trailing_summary()?;
            let svg = frontier_svg(rs.records(), &gens, stats.f_plus, f_minus, stats.hat_f_minus)?;
            let path = write_file(&c.out, "frontier.svg", svg.as_bytes())?;
            println!("records={} generators={} wrote {}", rs.len(), gens.gamma(), path.display());
        }
        PlotKind::Convergence => {
            let mut ns = parse_n_values(&c.n)?;
            if ns.is_empty() {
                ns = parse_n_values(&["logspace:1:6:26".to_string()])?;
            }
            let svg = convergence_svg(d, &ns)?;
            let path = write_file(&c.out, "convergence.svg", svg.as_bytes())?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Exact(c) => exact(c),
        Command::Asympt { common, coeffs } => asympt(common, *coeffs),
        Command::Check(c) => check(c),
        Command::Plot { common, kind } => plot(common, *kind),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Acceptance(n)) => {
            eprintln!("{n} acceptance criteria failed");
            ExitCode::from(EXIT_ACCEPTANCE)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
