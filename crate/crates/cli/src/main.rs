use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hheat_cli::config::FileConfig;
use hheat_cli::cutoff::verify_cutoff;
use hheat_cli::exponents::exponents;
use hheat_cli::report::{
    ensure_out_dir, fmt_e, render_dichotomy_csv, render_lifespan_csv, write_summary,
    write_trace_csv,
};
use hheat_cli::scan::{scan_dichotomy, scan_lifespan, LifespanProfile};
use hheat_cli::verify::{verify_all, VerifyConfig};
use hheat_core::grid::GridSpec;
use hheat_core::kernel::{gaussian_envelope_fit, sample_kernel, KernelQuadrature, QuadratureRule};
use hheat_core::solver::solve;

#[derive(Parser)]
#[command(name = "hheat", version, about = "Heat flow with memory on the Heisenberg group")]
struct Cli {
    /// TOML run configuration (see the README for the schema)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and CSVs
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for the randomized property suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the number of cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the critical and lifespan exponents for (n, gamma, p, kappa)
    Exponents(ExponentsArgs),
    /// Sample the heat kernel and report its structural checks
    Kernel(KernelArgs),
    /// Run one mild-solver configuration
    Solve,
    /// Blow-up/global matrix over p and amplitude lists
    ScanDichotomy(DichotomyArgs),
    /// Lifespan scaling over a geometric epsilon ladder
    ScanLifespan(LifespanArgs),
    /// Verify the cut-off family inequality across R values
    VerifyCutoff(CutoffArgs),
    /// Run the full invariant suite; exit code 0 iff all checks pass
    VerifyAll,
}

#[derive(Args)]
struct ExponentsArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    half_width_xy: Option<f64>,
    #[arg(long)]
    half_width_tau: Option<f64>,
    #[arg(long, default_value_t = 48)]
    points_xy: usize,
    #[arg(long, default_value_t = 48)]
    points_tau: usize,
    #[arg(long)]
    lambda_max: Option<f64>,
    #[arg(long, default_value_t = 2048)]
    lambda_points: usize,
    /// "trapezoid" or "gauss-legendre"
    #[arg(long, default_value = "trapezoid")]
    rule: String,
}

#[derive(Args)]
struct DichotomyArgs {
    /// Comma-separated p values
    #[arg(long, value_delimiter = ',', default_value = "1.5,3.0")]
    p_list: Vec<f64>,
    /// Comma-separated amplitudes
    #[arg(long, value_delimiter = ',', default_value = "0.01,1.0")]
    amplitudes: Vec<f64>,
}

#[derive(Args)]
struct LifespanArgs {
    #[arg(long, default_value_t = 1.4)]
    p: f64,
    /// Number of epsilon rungs (eps = 2^-k, k = 0..count)
    #[arg(long, default_value_t = 7)]
    eps_count: usize,
    /// Largest epsilon of the ladder
    #[arg(long, default_value_t = 1.0)]
    eps_max: f64,
    /// "integrable" or "power:<kappa>"
    #[arg(long, default_value = "integrable")]
    profile: String,
}

#[derive(Args)]
struct CutoffArgs {
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    r_list: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 121)]
    points_xy: usize,
    #[arg(long, default_value_t = 141)]
    points_tau: usize,
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, hheat_core::CoreError> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    match cli.command {
        Command::Exponents(a) => {
            let rep = exponents(a.n, a.gamma, a.p, a.kappa)?;
            print!("{}", rep.render());
            ensure_out_dir(&cli.out)?;
            std::fs::write(cli.out.join("exponents.txt"), rep.render())?;
            Ok(true)
        }
        Command::Kernel(a) => {
            let half_xy = a.half_width_xy.unwrap_or(9.0 * a.t.sqrt());
            let half_tau = a.half_width_tau.unwrap_or(40.0 * a.t);
            let spec = GridSpec::new(a.n, half_xy, half_tau, a.points_xy, a.points_tau)?;
            let rule = match a.rule.as_str() {
                "trapezoid" => QuadratureRule::Trapezoid,
                "gauss-legendre" => QuadratureRule::GaussLegendre,
                other => return Err(format!("unknown rule {other:?}").into()),
            };
            let q = KernelQuadrature {
                lambda_max: a
                    .lambda_max
                    .unwrap_or_else(|| KernelQuadrature::for_time(a.t).lambda_max),
                lambda_points: a.lambda_points,
                rule,
            };
            let k = sample_kernel(a.t, &spec, &q)?;
            let mass = k.field.integral_trapezoid();
            let envelope = gaussian_envelope_fit(&k.field, a.t);
            ensure_out_dir(&cli.out)?;
            k.field.write_dump_file(cli.out.join("kernel_field.hhgf"))?;
            let mut report = String::new();
            report.push_str(&format!("t: {}\n", a.t));
            report.push_str(&format!("mass: {}\n", fmt_e(mass)));
            report.push_str(&format!("mass_error: {}\n", fmt_e((mass - 1.0).abs())));
            report.push_str(&format!("min_value: {}\n", fmt_e(k.field.min_value())));
            report.push_str(&format!("clamped_points: {}\n", k.clamped));
            if let Some(env) = envelope {
                report.push_str(&format!(
                    "envelope_c: {}\nenvelope_ratio_min: {}\nenvelope_ratio_max: {}\n",
                    fmt_e(env.c),
                    fmt_e(env.ratio_min),
                    fmt_e(env.ratio_max)
                ));
            }
            print!("{report}");
            std::fs::write(cli.out.join("kernel_report.txt"), report)?;
            Ok(true)
        }
        Command::Solve => {
            let fc = load_config(&cli.config)?;
            let cfg = fc.solve_config()?;
            let res = solve(cfg.clone())?;
            ensure_out_dir(&cli.out)?;
            write_trace_csv(&res, &cli.out.join("trace.csv"))?;
            write_summary(&cfg, &res, &cli.out.join("summary.txt"))?;
            for (t, field) in &res.snapshots {
                field.write_dump_file(cli.out.join(format!("snapshot_t{t}.hhgf")))?;
            }
            println!(
                "status: {} (t_est: {})",
                res.status.label(),
                res.status
                    .t_est()
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "-".into())
            );
            Ok(true)
        }
        Command::ScanDichotomy(a) => {
            let fc = load_config(&cli.config)?;
            let base = fc.solve_config()?;
            let scan = scan_dichotomy(&a.p_list, &a.amplitudes, &base);
            ensure_out_dir(&cli.out)?;
            std::fs::write(cli.out.join("dichotomy.csv"), render_dichotomy_csv(&scan))?;
            for cell in &scan.cells {
                println!(
                    "p={} amplitude={} -> {}",
                    cell.p, cell.amplitude, cell.status
                );
            }
            Ok(true)
        }
        Command::ScanLifespan(a) => {
            let fc = load_config(&cli.config)?;
            let base = fc.solve_config()?;
            let profile = if a.profile == "integrable" {
                LifespanProfile::Integrable
            } else if let Some(kappa) = a.profile.strip_prefix("power:") {
                LifespanProfile::power_decay(kappa.parse::<f64>()?)
            } else {
                return Err(format!("unknown profile {:?}", a.profile).into());
            };
            let eps: Vec<f64> = (0..a.eps_count)
                .map(|k| a.eps_max * 0.5f64.powi(k as i32))
                .collect();
            let scan = scan_lifespan(a.p, &eps, profile, &base)?;
            ensure_out_dir(&cli.out)?;
            std::fs::write(cli.out.join("lifespan.csv"), render_lifespan_csv(&scan))?;
            match scan.fitted_slope {
                Some((slope, hw)) => println!(
                    "fitted slope {} +- {} (theory {})",
                    fmt_e(slope),
                    fmt_e(hw),
                    scan.theoretical_slope
                        .map(fmt_e)
                        .unwrap_or_else(|| "n/a".into())
                ),
                None => println!("no fit ({} censored cells)", scan.censored),
            }
            Ok(true)
        }
        Command::VerifyCutoff(a) => {
            let fc = load_config(&cli.config)?;
            let n = fc.problem.n.unwrap_or(1);
            let r_max = a.r_list.iter().cloned().fold(1.0f64, f64::max);
            let spec = GridSpec::new(
                n,
                1.05 * r_max.sqrt(),
                1.05 * r_max,
                a.points_xy,
                a.points_tau,
            )?;
            let report = verify_cutoff(&a.r_list, a.p, &spec)?;
            let mut text = String::new();
            for row in &report.rows {
                text.push_str(&format!(
                    "R={} c_hat={} plateau_residual={} exterior_residual={}\n",
                    row.r,
                    fmt_e(row.c_hat),
                    fmt_e(row.plateau_residual),
                    fmt_e(row.exterior_residual)
                ));
            }
            text.push_str(&format!("spread: {}\n", fmt_e(report.spread)));
            text.push_str(&format!("bounded_within_factor_2: {}\n", report.spread < 2.0));
            print!("{text}");
            ensure_out_dir(&cli.out)?;
            std::fs::write(cli.out.join("cutoff_report.txt"), text)?;
            Ok(report.spread < 2.0)
        }
        Command::VerifyAll => {
            let report = verify_all(&VerifyConfig::default(), cli.seed);
            print!("{}", report.render());
            ensure_out_dir(&cli.out)?;
            std::fs::write(cli.out.join("verify_report.txt"), report.render())?;
            Ok(report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
