use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use flowgrid::io::{read_nodes, read_regions};
use flowgrid::pipeline::{ablation, ablation_table};
use flowgrid::{NodeSet, RegionSet, RunConfig};

#[derive(Parser)]
#[command(name = "flowgrid", version, about = "Lay out one-to-many flow maps on a raster grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out a flow map and write the map, metrics and optional log.
    Run(RunArgs),
    /// Run the baseline and each single-strategy ablation; print the matrix.
    Ablate(InputArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Node CSV with columns id,x,y,volume,role.
    #[arg(long)]
    nodes: PathBuf,
    /// GeoJSON regions and obstacles.
    #[arg(long)]
    regions: Option<PathBuf>,
    /// `key=value` pair or TOML file; repeatable, applied in order.
    #[arg(long = "config", value_name = "KEY=VALUE|FILE")]
    config: Vec<String>,
    #[arg(long, value_name = "on|off")]
    st1: Option<String>,
    #[arg(long, value_name = "on|off")]
    st2: Option<String>,
    #[arg(long, value_name = "on|off")]
    st3: Option<String>,
    #[arg(long, value_name = "on|off")]
    st4: Option<String>,
    #[arg(long, value_name = "on|off")]
    st5: Option<String>,
    #[arg(long, value_name = "on|off")]
    st6: Option<String>,
    #[arg(long, value_name = "on|off")]
    st7: Option<String>,
    /// Worker threads for the per-iteration searches.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    /// SVG map output; the edge list goes next to it as `<out>.edges.json`.
    #[arg(long)]
    out: PathBuf,
    /// Metrics JSON output.
    #[arg(long)]
    metrics: PathBuf,
    /// Per-iteration log, JSON lines.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Also print the metrics table to stdout.
    #[arg(long)]
    table: bool,
}

impl InputArgs {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for raw in &self.config {
            cfg.apply_arg(raw).with_context(|| format!("--config {raw}"))?;
        }
        let switches = [&self.st1, &self.st2, &self.st3, &self.st4, &self.st5, &self.st6, &self.st7];
        for (i, v) in switches.into_iter().enumerate() {
            if let Some(v) = v {
                cfg.set(&format!("st{}", i + 1), v).with_context(|| format!("--st{}", i + 1))?;
            }
        }
        if let Some(n) = self.threads {
            cfg.set("threads", &n.to_string())?;
        }
        Ok(cfg)
    }

    fn load(&self) -> Result<(NodeSet, RegionSet)> {
        let nodes = read_nodes(&self.nodes).with_context(|| format!("reading {}", self.nodes.display()))?;
        let regions = match &self.regions {
            Some(p) => read_regions(p).with_context(|| format!("reading {}", p.display()))?,
            None => RegionSet::default(),
        };
        Ok((nodes, regions))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn edges_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".edges.json");
    PathBuf::from(s)
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = args.input.config()?;
    let (nodes, regions) = args.input.load()?;
    let out = flowgrid::run(&nodes, &regions, &cfg)?;
    write(&args.out, &out.svg(&cfg))?;
    write(&edges_path(&args.out), &out.edges_json(&nodes))?;
    write(&args.metrics, &out.metrics_json())?;
    if let Some(log) = &args.log {
        write(log, &out.log_jsonl())?;
    }
    if args.table {
        print!("{}", out.summary.metrics.table());
    }
    Ok(())
}

fn ablate(args: &InputArgs) -> Result<()> {
    let cfg = args.config()?;
    let (nodes, regions) = args.load()?;
    print!("{}", ablation_table(&ablation(&nodes, &regions, &cfg)?));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Ablate(a) => ablate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
