use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use sbv_rigidity::engine::{symbolic_schedule, EngineConfig, Linear, Rigid};
use sbv_rigidity::fields::{read_field, write_field};
use sbv_rigidity::harness::{
    exit_code, gen_beam, gen_piecewise_rigid, gen_twopiece, probe_constant, probe_strip_sweep, read_config,
    run_decompose, write_rows, Ambient, ModelKind, EXIT_INFEASIBLE, EXIT_IO,
};
use sbv_rigidity::partition::model_energy;

#[derive(Parser)]
#[command(name = "rigidity", version, about = "Piecewise rigidity decomposition of cracked 2D fields")]
struct Cli {
    /// Cap on worker threads (0 = all cores).
    #[arg(long, global = true, env = "SBVRIG_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write an example field.
    #[command(subcommand)]
    Gen(Gen),
    /// Scaling probes on the closed-form examples.
    #[command(subcommand)]
    Probe(Probe),
    /// Run the full pipeline on a field file.
    Decompose(Decompose),
    /// Griffith and relaxed energies of a field.
    Energy(Energy),
    /// Check the symbolic scale schedule of a config.
    Schedule(ScheduleCmd),
}

#[derive(Subcommand)]
enum Gen {
    /// Bent beam on (0,1) x (0,delta).
    Beam {
        #[arg(long, env = "SBVRIG_DELTA")]
        delta: f64,
        /// Cell side; defaults to delta/64.
        #[arg(long)]
        h: Option<f64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Beam strip of height eps^(1/3) inside a translated body.
    Twopiece {
        #[arg(long, env = "SBVRIG_EPS")]
        eps: f64,
        /// Cell side; defaults to eps^(1/3)/8.
        #[arg(long)]
        h: Option<f64>,
        /// Window x0,x1,y0,y1.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        ambient: Option<Vec<f64>>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Random guillotine pieces with random rigid motions.
    Pwrigid {
        #[arg(long, env = "SBVRIG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        pieces: usize,
        /// Cells per side of the unit window.
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Also write the ground-truth labels as CSV.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum Probe {
    /// Beam ratio min_R |grad y - R|^2 / |dist|^2 against delta.
    Constant {
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 64)]
        cells_per_delta: usize,
        /// CSV of points; the fit goes next to it as `.fit.json`.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Global best-fit residuals of the strip example against eps.
    Strip {
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4,1e-5")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        cells_per_strip: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Engine config JSON; missing fields take defaults.
    #[arg(short, long, env = "SBVRIG_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "SBVRIG_EPS")]
    eps: Option<f64>,
    #[arg(long, env = "SBVRIG_RHO")]
    rho: Option<f64>,
}

impl ConfigArgs {
    fn load(&self) -> sbv_rigidity::Result<EngineConfig> {
        let mut cfg = match &self.config {
            Some(p) => read_config(p)?,
            None => EngineConfig::default(),
        };
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if let Some(r) = self.rho {
            cfg.rho = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Decompose {
    #[arg(short, long)]
    input: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, env = "SBVRIG_MODEL", default_value = "rigid")]
    model: ModelKind,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct Energy {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, env = "SBVRIG_EPS")]
    eps: f64,
    #[arg(long, env = "SBVRIG_RHO")]
    rho: Option<f64>,
    #[arg(long, env = "SBVRIG_MODEL", default_value = "rigid")]
    model: ModelKind,
    /// Write the JSON here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleCmd {
    #[command(flatten)]
    config: ConfigArgs,
    /// `|W_0|_*` entering the budget; defaults to the config value or 1.
    #[arg(long)]
    norm0: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn emit(json: String, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, json + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn ambient(v: &Option<Vec<f64>>, a: f64) -> anyhow::Result<Ambient> {
    match v.as_deref() {
        None => Ok(Ambient::around_strip(a)),
        Some([x0, x1, y0, y1]) => Ok(Ambient { x0: *x0, x1: *x1, y0: *y0, y1: *y1 }),
        Some(_) => bail!("--ambient takes x0,x1,y0,y1"),
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.cmd {
        Cmd::Gen(Gen::Beam { delta, h, output }) => {
            let f = gen_beam(delta, h.unwrap_or(delta / 64.0))?;
            write_field(&output, &f)?;
        }
        Cmd::Gen(Gen::Twopiece { eps, h, ambient: amb, output }) => {
            let a = eps.cbrt();
            let f = gen_twopiece(eps, h.unwrap_or(a / 8.0), ambient(&amb, a)?)?;
            write_field(&output, &f)?;
        }
        Cmd::Gen(Gen::Pwrigid { seed, pieces, n, labels, output }) => {
            let p = gen_piecewise_rigid(seed, pieces, Ambient::UNIT, 1.0 / n as f64)?;
            write_field(&output, &p.field)?;
            if let Some(path) = labels {
                let rows: Vec<Vec<u32>> = p.labels.chunks(n).map(|r| r.to_vec()).collect();
                let text: String =
                    rows.iter().map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(",") + "\n").collect();
                std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Cmd::Probe(Probe::Constant { deltas, cells_per_delta, output }) => {
            let r = probe_constant(&deltas, cells_per_delta)?;
            write_rows(&output, &r.points)?;
            let fit = serde_json::json!({
                "parameter": r.parameter,
                "fit": r.fit,
                "flagged": r.flagged,
                "ratios_increasing": r.ratios_increasing,
            });
            emit(serde_json::to_string_pretty(&fit)?, Some(&output.with_extension("fit.json")))?;
        }
        Cmd::Probe(Probe::Strip { eps, cells_per_strip, output }) => {
            let pts = probe_strip_sweep(&eps, cells_per_strip)?;
            write_rows(&output, &pts)?;
        }
        Cmd::Decompose(d) => {
            let cfg = d.config.load()?;
            let o = run_decompose(&d.input, d.model, &cfg, &d.output)?;
            for f in o.report.budget_flags.iter().filter(|f| !f.pass) {
                eprintln!("budget flag failed: {} (measured {:e}, bound {:e})", f.name, f.measured, f.bound);
            }
            if let Some(v) = &o.report.engine_violation {
                eprintln!("engine: {v}");
            }
            return Ok(o.exit);
        }
        Cmd::Energy(e) => {
            let f = read_field(&e.input)?;
            let b = match e.model {
                ModelKind::Rigid => model_energy(&Rigid, &f, e.eps, e.rho, None),
                ModelKind::Linear => model_energy(&Linear, &f, e.eps, e.rho, None),
            };
            emit(serde_json::to_string_pretty(&b)?, e.output.as_deref())?;
        }
        Cmd::Schedule(s) => {
            let cfg = s.config.load()?;
            let norm0 = s.norm0.or(cfg.norm0).unwrap_or(1.0);
            let sched = symbolic_schedule(&cfg, norm0)?;
            emit(serde_json::to_string_pretty(&sched)?, s.output.as_deref())?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INFEASIBLE as u8);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<sbv_rigidity::Error>() {
                Some(err) => exit_code(err),
                None if e.downcast_ref::<std::io::Error>().is_some() => EXIT_IO,
                None => EXIT_INFEASIBLE,
            };
            ExitCode::from(code as u8)
        }
    }
}
