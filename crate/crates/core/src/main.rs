use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nsrom::cli::{self, verify, ExperimentConfig};
use nsrom::fem::NonlinearForm;
use nsrom::fom::{ProblemKind, TimeScheme};
use nsrom::Result;

#[derive(Parser)]
#[command(
    name = "nsrom",
    version,
    about = "Taylor-Hood Navier-Stokes snapshots, POD bases and Galerkin reduced models"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Experiment file (TOML); without it the desk defaults of --problem apply.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "kelvin-helmholtz")]
    problem: String,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Mode counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    r: Option<Vec<usize>>,
    /// convective, skew, rotational or emac; comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    form: Option<Vec<String>>,
    /// backward-euler or bdf2, for the reduced model.
    #[arg(long, global = true)]
    scheme: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Full-order run: snapshot archive and scalar table.
    Fom,
    /// POD basis and spectrum from the snapshot archive.
    Pod,
    /// One reduced run (first --r and --form).
    Rom,
    /// Reduced runs over all --r and --form, tabulated against the snapshots.
    Compare,
    /// Invariant checks on small built-in cases.
    Verify,
    /// Print the effective configuration.
    Config,
}

fn load(args: &Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::desk(args.problem.parse::<ProblemKind>()?),
    };
    if let Some(o) = &args.out {
        cfg.output.dir = o.clone();
    }
    if let Some(r) = &args.r {
        cfg.rom.r = r.clone();
    }
    if let Some(f) = &args.form {
        cfg.rom.forms = f.iter().map(|s| s.parse::<NonlinearForm>()).collect::<Result<_>>()?;
    }
    if let Some(s) = &args.scheme {
        cfg.rom.scheme = s.parse::<TimeScheme>()?;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(args: &Args) -> Result<bool> {
    let cfg = load(args)?;
    match args.command {
        Command::Config => print!("{}", cfg.to_toml()),
        Command::Fom => {
            let out = cli::cmd_fom(&cfg)?;
            let s = &out.run.scalars;
            println!(
                "{} steps, final energy {:.6e}, max divergence {:.3e}",
                s.len() - 1,
                s.energy.last().unwrap(),
                s.div_error.iter().fold(0.0f64, |m, v| m.max(*v))
            );
            list(&out.files);
        }
        Command::Pod => {
            let out = cli::cmd_pod(&cfg)?;
            let ev = &out.archive.basis.eigenvalues;
            let decreasing = ev.windows(2).all(|w| w[1] < w[0]);
            println!("rank {} from {} snapshots", ev.len(), out.archive.basis.n_snapshots);
            println!("spectrum strictly decreasing: {decreasing}");
            println!(
                "projection identity: max relative mismatch {:.3e} at r = {}",
                out.identity.max_rel, out.identity.worst_r
            );
            list(&out.files);
        }
        Command::Rom => {
            let (form, r) = (cfg.rom.forms[0], cfg.rom.r[0]);
            let out = cli::cmd_rom(&cfg, form, r)?;
            println!(
                "{form} r={r}: {} steps, final energy {:.6e}",
                out.trajectory.len() - 1,
                out.scalars.energy.last().unwrap()
            );
            list(&out.files);
        }
        Command::Compare => {
            let out = cli::cmd_compare(&cfg)?;
            println!("{:<11} {:>4} {:>12} {:>12} {:>12} {:>9}", "form", "r", "linf_l2", "l2_h1", "drag_l2", "plateau");
            for w in &out.rows {
                println!(
                    "{:<11} {:>4} {:>12.4e} {:>12.4e} {:>12.4e} {:>9.3} {}",
                    w.form.to_string(),
                    w.r,
                    w.linf_l2,
                    w.l2_h1,
                    w.drag_l2,
                    w.plateau_ratio,
                    w.status
                );
            }
            list(&out.files);
        }
        Command::Verify => {
            let mut ok = true;
            for c in verify::run_checks(cfg.seed)? {
                println!(
                    "{} {}: {:.3e} (bound {:.0e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.worst,
                    c.bound
                );
                ok &= c.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
