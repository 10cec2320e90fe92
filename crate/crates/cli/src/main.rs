use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nonlocal_fronts::evolution::Grid;
use nonlocal_fronts::lab::{self, ExperimentConfig, InitialCondition, Verdict};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nlf", version, about = "Fronts and stability experiments for delayed nonlocal monostable equations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Critical speed, decay rates and the characteristic curves
    Speed(Common),
    /// Traveling wave profile at the configured speed
    Profile(Common),
    /// Evolve the configured initial data in the moving frame
    Evolve(Common),
    /// Decay of the weighted linearized equation
    Linear(Common),
    /// Squeeze pipeline with rate fits
    Stability(Common),
    /// Stability pipeline over `delay_sweep`
    DelaySweep(Common),
    /// Sup-solution check for the right region
    Supersolution {
        #[command(flatten)]
        common: Common,
        /// Override the exponential rate of the sup-solution
        #[arg(long)]
        mu: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file
    config: PathBuf,
    /// Output directory (default: `<output>/<subcommand>` from the config)
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Run {
    cfg: ExperimentConfig,
    dir: PathBuf,
    config_dir: PathBuf,
}

impl Run {
    fn open(common: &Common, name: &str) -> Result<Self> {
        let text = fs::read_to_string(&common.config).with_context(|| format!("reading {}", common.config.display()))?;
        let cfg = ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", common.config.display()))?;
        let dir = common.out.clone().unwrap_or_else(|| Path::new(&cfg.output).join(name));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let config_dir = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Run { cfg, dir, config_dir })
    }

    fn csv<T: Serialize>(&self, file: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let path = self.dir.join(file);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn csv_with_header<T: Serialize>(&self, file: &str, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
        let path = self.dir.join(file);
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn finish<R: Serialize>(&self, command: &str, report: &R, verdicts: &[Verdict], all_pass: bool) -> Result<bool> {
        self.csv("verdicts.csv", verdicts)?;
        let summary = serde_json::json!({
            "command": command,
            "config": &self.cfg,
            "report": report,
            "all_pass": all_pass,
        });
        let path = self.dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(&summary)?).with_context(|| format!("writing {}", path.display()))?;
        for v in verdicts {
            println!("{} {}: {:.6e} (target {})", if v.pass { "PASS" } else { "FAIL" }, v.name, v.measured, v.target);
        }
        println!("wrote {}", self.dir.display());
        Ok(all_pass)
    }

    fn custom_initial(&self) -> Result<Option<Vec<(f64, f64)>>> {
        let InitialCondition::CustomCsv { ref path } = self.cfg.initial else {
            return Ok(None);
        };
        let path = self.config_dir.join(path);
        let mut r = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
        let rows = r.deserialize::<(f64, f64)>().collect::<Result<Vec<_>, _>>().with_context(|| format!("parsing {}", path.display()))?;
        Ok(Some(rows))
    }
}

fn speed(c: &Common) -> Result<bool> {
    let run = Run::open(c, "speed")?;
    let r = lab::run_speed(&run.cfg)?;
    run.csv("curves.csv", &r.curves)?;
    run.finish("speed", &r, &r.verdicts, r.all_pass)
}

fn profile(c: &Common) -> Result<bool> {
    let run = Run::open(c, "profile")?;
    let (p, r) = lab::run_profile(&run.cfg)?;
    run.csv_with_header("profile.csv", &["xi", "phi"], p.xi_nodes.iter().zip(&p.values))?;
    run.finish("profile", &r, &r.verdicts, r.all_pass)
}

fn evolve(c: &Common) -> Result<bool> {
    let run = Run::open(c, "evolve")?;
    let custom = run.custom_initial()?;
    let (r, snaps) = lab::run_evolve(&run.cfg, custom.as_deref())?;
    run.csv("series.csv", &r.series)?;
    let last = snaps.last().context("no snapshots")?;
    let g = run.cfg.grid;
    let grid = Grid { origin: last.origin, ..Grid::new(g.dim, g.half_width, g.points)? };
    let rows = last.values.iter().enumerate().map(|(k, u)| {
        let (x1, x2) = grid.position(k);
        (x1, x2, x1 + r.c * last.time, u)
    });
    run.csv_with_header("final.csv", &["x1", "x2", "xi", "u"], rows)?;
    run.finish("evolve", &r, &r.verdicts, r.all_pass)
}

fn linear(c: &Common) -> Result<bool> {
    let run = Run::open(c, "linear")?;
    let r = lab::run_linear(&run.cfg)?;
    run.csv_with_header("series.csv", &["t", "sup_norm"], &r.series)?;
    run.finish("linear", &r, &r.verdicts, r.all_pass)
}

fn stability(c: &Common) -> Result<bool> {
    let run = Run::open(c, "stability")?;
    let r = lab::run_stability(&run.cfg)?;
    run.csv("series.csv", &r.series)?;
    run.finish("stability", &r, &r.verdicts, r.all_pass)
}

fn delay_sweep(c: &Common) -> Result<bool> {
    let run = Run::open(c, "delay-sweep")?;
    let r = lab::run_delay_comparison(&run.cfg, &run.cfg.delay_sweep)?;
    run.csv("entries.csv", &r.entries)?;
    run.finish("delay-sweep", &r, &r.verdicts, r.all_pass)
}

fn supersolution(c: &Common, mu: Option<f64>) -> Result<bool> {
    let run = Run::open(c, "supersolution")?;
    let r = lab::run_supersolution_check(&run.cfg, mu)?;
    run.csv("worst.csv", [r.worst])?;
    run.finish("supersolution", &r, &r.verdicts, r.all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Speed(c) => speed(c),
        Cmd::Profile(c) => profile(c),
        Cmd::Evolve(c) => evolve(c),
        Cmd::Linear(c) => linear(c),
        Cmd::Stability(c) => stability(c),
        Cmd::DelaySweep(c) => delay_sweep(c),
        Cmd::Supersolution { common, mu } => supersolution(common, *mu),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
