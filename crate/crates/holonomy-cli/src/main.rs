//! Batch runner for holonomic-gate scenarios: executes JSON configs through
//! the frame -> Hamiltonian -> propagation -> verification pipeline and
//! writes machine-readable reports, pulse tables, and traces.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use holonomy::scenario::{
    self, RunReport, Scenario, SweepParameter, SweepPoint, SweepRange,
};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "HOLONOMY_OUT";

#[derive(Parser)]
#[command(name = "holonomy", version, about = "Holonomic gate scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one scenario config and write its artifacts.
    Run(RunArgs),
    /// Execute a scenario template across parameter ranges.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CommonOverrides {
    /// Output directory; defaults to $HOLONOMY_OUT, then ./holonomy-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's grid_steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Override the gate-distance tolerance.
    #[arg(long = "tol-gate")]
    tol_gate: Option<f64>,
    /// Override the cyclic / parallel-transport residual tolerance.
    #[arg(long = "tol-residual")]
    tol_residual: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (JSON).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: CommonOverrides,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario template (JSON); ranges override its fields per point.
    #[arg(long)]
    template: PathBuf,
    /// Range spec `<param>=<start>:<end>:<count>` with param one of
    /// `angle`, `theta`, `varphi`. Repeatable; ranges combine as a
    /// cartesian product.
    #[arg(long = "range", required = true)]
    ranges: Vec<String>,
    #[command(flatten)]
    overrides: CommonOverrides,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Sweep(args) => sweep_command(args),
    }
}

fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("holonomy-out"))
}

fn apply_overrides(scenario: &mut Scenario, overrides: &CommonOverrides) {
    if let Some(steps) = overrides.steps {
        scenario.grid_steps = steps;
    }
    if let Some(gate) = overrides.tol_gate {
        scenario.tolerances.gate = gate;
    }
    if let Some(residual) = overrides.tol_residual {
        scenario.tolerances.residual = residual;
    }
}

fn run_command(args: RunArgs) -> Result<bool> {
    let mut config = Scenario::from_file(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))?;
    apply_overrides(&mut config, &args.overrides);
    let dir = output_dir(args.overrides.out);

    let output = scenario::run(&config).context("scenario pipeline failed")?;
    let written = output
        .write_outputs(&dir)
        .with_context(|| format!("writing outputs to {}", dir.display()))?;

    print_report(&output.report);
    println!("wall time: {:.3} s", output.report.wall_time);
    for file in written {
        println!("wrote {}", file.display());
    }
    Ok(output.report.passed.all)
}

fn print_report(report: &RunReport) {
    let flag = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!("path length:            {:.12}", report.path_length);
    println!("enclosed angle:         {:.12}", report.enclosed_angle);
    println!(
        "time ratio vs 2pi loop: {:.12}",
        report.time_ratio_vs_orange_slice
    );
    println!(
        "gate distance:          {:.3e}  {}",
        report.target_distance,
        flag(report.passed.gate)
    );
    println!(
        "cyclic residual:        {:.3e}  {}",
        report.residuals.cyclic,
        flag(report.passed.cyclic)
    );
    println!(
        "parallel transport:     {:.3e}  {}",
        report.residuals.parallel_transport,
        flag(report.passed.parallel_transport)
    );
    println!(
        "unitarity defect:       {:.3e}  {}",
        report.residuals.unitarity,
        flag(report.passed.unitarity)
    );
}

fn parse_range(spec: &str) -> Result<SweepRange> {
    let (name, rest) = spec
        .split_once('=')
        .with_context(|| format!("range `{spec}` is not of the form param=start:end:count"))?;
    let parameter = match name {
        "angle" => SweepParameter::Angle,
        "theta" => SweepParameter::Theta,
        "varphi" => SweepParameter::Varphi,
        other => bail!("unknown sweep parameter `{other}` (use angle, theta, or varphi)"),
    };
    let parts: Vec<&str> = rest.split(':').collect();
    if parts.len() != 3 {
        bail!("range `{spec}` must be start:end:count");
    }
    let start: f64 = parts[0].parse().context("range start")?;
    let end: f64 = parts[1].parse().context("range end")?;
    let count: usize = parts[2].parse().context("range count")?;
    let values = if count == 0 {
        Vec::new()
    } else if count == 1 {
        vec![start]
    } else {
        (0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect()
    };
    Ok(SweepRange { parameter, values })
}

fn sweep_command(args: SweepArgs) -> Result<bool> {
    let mut template = Scenario::from_file(&args.template)
        .with_context(|| format!("loading template {}", args.template.display()))?;
    apply_overrides(&mut template, &args.overrides);
    let ranges = args
        .ranges
        .iter()
        .map(|spec| parse_range(spec))
        .collect::<Result<Vec<_>>>()?;
    let dir = output_dir(args.overrides.out);
    fs::create_dir_all(&dir)?;

    let points = scenario::sweep(&template, &ranges);

    let summary_path = dir.join("summary.csv");
    let mut buffer = Vec::new();
    scenario::write_summary_csv(&mut buffer, &points)?;
    fs::write(&summary_path, buffer)?;

    let mut all_passed = true;
    for (index, point) in points.iter().enumerate() {
        let point_dir = dir.join(format!("point_{index:03}"));
        fs::create_dir_all(&point_dir)?;
        fs::write(
            point_dir.join("report.json"),
            serde_json::to_string_pretty(point)?,
        )?;
        match point {
            SweepPoint {
                report: Some(report),
                ..
            } => {
                if !report.passed.all {
                    all_passed = false;
                    println!("point {index:03}: FAIL {:?}", point.parameters);
                }
            }
            SweepPoint { error: Some(e), .. } => {
                all_passed = false;
                println!("point {index:03}: ERROR {e}");
            }
            _ => {}
        }
    }
    println!(
        "swept {} points ({}); summary at {}",
        points.len(),
        if all_passed { "all passed" } else { "failures recorded" },
        summary_path.display()
    );
    Ok(all_passed)
}
