use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbl_core::lattice::{
    coupling_from_normal_modes, equilibrium_positions, fit_alpha, fit_alpha_trimmed, transverse_modes, CouplingMatrix,
    TrapSpec, DEFAULT_RESONANCE_MARGIN,
};
use mbl_lab::config::LevelStatsConfig;
use mbl_lab::emit::{load_result, realization_csv, write_result, write_sweep};
use mbl_lab::model::{couplings_csv, parse_couplings_csv, ModelDocument};
use mbl_lab::{preset, replay, replay_deviation, run_ensemble, sweep, ExperimentConfig, LabError, Result, RunOptions, PRESETS};

#[derive(Parser)]
#[command(name = "mbl", version, about = "Many-body localization numerics: ensembles, sweeps, level statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ion-chain normal modes and the Ising couplings they mediate.
    Modes(ModesArgs),
    /// Fit J_max / r^α to a coupling matrix (CSV) or model document.
    FitAlpha { path: PathBuf },
    /// Run one disorder ensemble.
    Run(RunArgs),
    /// Run every point of the config's [sweep] section.
    Sweep(RunArgs),
    /// Level statistics only (dynamics disabled).
    Levelstats(RunArgs),
    /// Regenerate one realization of a stored result.
    Replay {
        result: PathBuf,
        #[arg(long)]
        index: usize,
        /// Write the raw series here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a named preset as TOML (omit the name to list them).
    Preset { name: Option<String> },
}

#[derive(Args)]
struct ModesArgs {
    #[arg(long)]
    ions: usize,
    /// ω_x / ω_z.
    #[arg(long)]
    anisotropy: f64,
    /// Beatnote detuning μ / ω_z.
    #[arg(long)]
    detuning: f64,
    #[arg(long, default_value_t = 1.0)]
    rabi: f64,
    #[arg(long, default_value_t = 1.0)]
    recoil: f64,
    #[arg(long, default_value_t = DEFAULT_RESONANCE_MARGIN)]
    margin: f64,
    /// Write the coupling matrix (normalized to J_max = 1) as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML).
    config: Option<PathBuf>,
    /// Start from a named preset instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (defaults to the config's `output`, then `out/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    realizations: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => preset(name).ok_or_else(|| LabError::config(format!("unknown preset {name:?}")))?,
            (None, None) => return Err(LabError::config("give a config file or --preset")),
        };
        if let Some(r) = self.realizations {
            c.realizations = r;
        }
        Ok(c)
    }

    fn options(&self) -> RunOptions {
        self.workers.map_or_else(RunOptions::default, RunOptions::with_workers)
    }

    fn out_dir(&self, c: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .or_else(|| c.output.clone())
            .unwrap_or_else(|| Path::new("out").join(&c.name))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn print_fit(c: &CouplingMatrix) -> Result<()> {
    let fit = fit_alpha(c)?;
    println!("j_max_fit = {:.12}", fit.j_max);
    println!("alpha_fit = {:.12}", fit.alpha);
    if c.n() >= 5 {
        let t = fit_alpha_trimmed(c, 1)?;
        println!("alpha_fit_without_edges = {:.12}", t.alpha);
    }
    Ok(())
}

fn modes(a: &ModesArgs) -> Result<()> {
    let mut trap = TrapSpec::new(a.ions, a.anisotropy, a.rabi, a.recoil, a.detuning);
    trap.resonance_margin = a.margin;
    let positions = equilibrium_positions(a.ions)?;
    let m = transverse_modes(&positions, a.anisotropy)?;
    println!("ion\tposition");
    for (i, u) in m.positions.iter().enumerate() {
        println!("{}\t{u:.12}", i + 1);
    }
    println!("mode\tfrequency");
    for (k, w) in m.frequencies.iter().enumerate() {
        println!("{}\t{w:.12}", k + 1);
    }
    let (c, scale) = coupling_from_normal_modes(&trap, &m)?.normalized();
    println!("j_max = {scale:.12e}");
    print_fit(&c)?;
    if let Some(path) = &a.csv {
        write_file(path, &couplings_csv(&c))?;
    }
    Ok(())
}

fn fit(path: &Path) -> Result<()> {
    let c = if path.extension().is_some_and(|e| e == "csv") {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        parse_couplings_csv(&text)?
    } else {
        ModelDocument::load(path)?.to_spec()?.couplings
    };
    print_fit(&c)
}

fn run(args: &RunArgs, force_sweep: bool, level_only: bool) -> Result<()> {
    let mut c = args.load()?;
    if level_only {
        c.observables.clear();
        c.level_stats.get_or_insert_with(LevelStatsConfig::default);
    }
    let out = args.out_dir(&c);
    let opts = args.options();
    if c.sweep.is_some() {
        let s = sweep(&c, &opts)?;
        let files = write_sweep(&out, &s)?;
        print!("{}", s.summary_csv()?);
        eprintln!("wrote {} files under {}", files.len(), out.display());
    } else if force_sweep {
        return Err(LabError::config("config has no [sweep] section"));
    } else {
        let r = run_ensemble(&c, &opts)?;
        write_result(&out, &r)?;
        for d in &r.derived {
            if d.site.is_none() {
                match (d.stderr, d.ci) {
                    (_, Some([lo, hi])) => println!("{} = {:.6} [{lo:.6}, {hi:.6}]", d.name, d.value),
                    (Some(e), None) => println!("{} = {:.6} ± {e:.6}", d.name, d.value),
                    _ => println!("{} = {:.6}", d.name, d.value),
                }
            }
        }
        if let Some(ls) = &r.level_stats {
            println!(
                "mean_r(pooled) = {:.6} ± {:.6} over {} realizations; chi2 = {:.2} (dof {}), p = {:.3e}",
                ls.mean_r, ls.mean_r_stderr, ls.realization_count, ls.chi_square.statistic, ls.chi_square.dof,
                ls.chi_square.p_value
            );
        }
        println!("content_hash = {}", r.content_hash);
        eprintln!("wrote results to {}", out.display());
    }
    Ok(())
}

fn replay_cmd(path: &Path, index: usize, out: Option<&Path>) -> Result<()> {
    let result = load_result(path)?;
    let o = replay(&result, index)?;
    let dev = replay_deviation(&result, &o)?;
    if dev > 1e-12 {
        return Err(mbl_core::Error::NonConvergence {
            what: "replay",
            iterations: index,
            residual: dev,
        }
        .into());
    }
    let text = realization_csv(&result, &o)?;
    match out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    eprintln!("realization {index}: seed {} reproduced (max deviation {dev:.1e})", o.seed);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Modes(a) => modes(&a),
        Command::FitAlpha { path } => fit(&path),
        Command::Run(a) => run(&a, false, false),
        Command::Sweep(a) => run(&a, true, false),
        Command::Levelstats(a) => run(&a, false, true),
        Command::Replay { result, index, out } => replay_cmd(&result, index, out.as_deref()),
        Command::Preset { name: None } => {
            PRESETS.iter().for_each(|p| println!("{p}"));
            Ok(())
        }
        Command::Preset { name: Some(name) } => {
            let c = preset(&name).ok_or_else(|| LabError::config(format!("unknown preset {name:?}")))?;
            print!("{}", c.to_toml()?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
