use clap::{Args, Parser, Subcommand};
use hpstmg::harness::selftest::run_selftest;
use hpstmg::harness::studies::{cavity_csv_header, convergence_csv_header, robustness_csv_header};
use hpstmg::harness::{cavity_demo_2d, convergence_study, robustness_sweep, CavityProblem, RunConfig, RunSetup};
use hpstmg::hierarchy::{descriptors_for, HierarchyStrategy, HierarchyTable};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 3;
const EXIT_MISSING_CONFIG: u8 = 4;
const EXIT_SELFTEST: u8 = 5;

/// hp space-time multigrid for the nonstationary Stokes equations.
#[derive(Parser, Debug)]
#[command(name = "hpstmg", version)]
struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set mg.omega=0.8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Manufactured-solution error table with EOCs (k = r, τ = h).
    Convergence(StudyArgs),
    /// Average GMRES iterations over degrees, refinements and smoothers.
    Robustness(StudyArgs),
    /// Lid-driven cavity pressure-difference trace.
    Cavity {
        /// Stop after this many time steps.
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Print the multigrid level table for the configured discretization.
    Hierarchy,
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Spatial degrees, e.g. `--r 1,2,3` (same as study.r_list).
    #[arg(long, value_delimiter = ',')]
    r: Vec<usize>,
    /// Refinement counts, e.g. `--c 1,2` (same as study.c_list).
    #[arg(long, value_delimiter = ',')]
    c: Vec<usize>,
}

fn list(values: &[usize]) -> String {
    let items: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(","))
}

fn load_config(cli: &Cli) -> Result<RunConfig, ExitCode> {
    let text = match &cli.config {
        None => String::new(),
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                eprintln!("error: config file {} not found", path.display());
                return Err(ExitCode::from(EXIT_MISSING_CONFIG));
            }
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return Err(ExitCode::from(EXIT_CONFIG));
            }
        },
    };
    let mut overrides = cli.overrides.clone();
    if let Command::Convergence(a) | Command::Robustness(a) = &cli.command {
        if !a.r.is_empty() {
            overrides.push(format!("study.r_list={}", list(&a.r)));
        }
        if !a.c.is_empty() {
            overrides.push(format!("study.c_list={}", list(&a.c)));
        }
    }
    let refs: Vec<&str> = overrides.iter().map(String::as_str).collect();
    RunConfig::with_overrides(&text, &refs).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn write_csv(config: &RunConfig, header: &str, rows: &[String]) -> hpstmg::Result<()> {
    if let Some(path) = &config.output.csv_path {
        let mut text = String::from(header);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        std::fs::write(path, text)?;
        println!("wrote {path}");
    }
    Ok(())
}

fn print_table(header: &str, rows: &[String]) {
    println!("{header}");
    for r in rows {
        println!("{r}");
    }
}

fn run(cli: &Cli, config: &RunConfig) -> hpstmg::Result<ExitCode> {
    match &cli.command {
        Command::Convergence(_) => {
            let rows = convergence_study(config, &config.study.r_list, &config.study.c_list)?;
            let lines: Vec<String> = rows.iter().map(|r| r.csv()).collect();
            print_table(convergence_csv_header(), &lines);
            write_csv(config, convergence_csv_header(), &lines)?;
        }
        Command::Robustness(_) => {
            let rows = robustness_sweep(config)?;
            let lines: Vec<String> = rows.iter().map(|r| r.csv()).collect();
            print_table(robustness_csv_header(), &lines);
            write_csv(config, robustness_csv_header(), &lines)?;
        }
        Command::Cavity { max_steps } => {
            let problem = CavityProblem {
                nu: config.problem.nu,
                t_end: config.problem.t_end.unwrap_or(CavityProblem::default().t_end),
            };
            let setup = RunSetup::from_config(config);
            let run = cavity_demo_2d(&setup, &problem, config.problem.steps, *max_steps)?;
            let lines: Vec<String> = run.trace.iter().map(|s| s.csv()).collect();
            print_table(cavity_csv_header(), &lines);
            println!("{}", run.summary.summary_row());
            println!("sum_nT2={}", run.sum_nt2);
            write_csv(config, cavity_csv_header(), &lines)?;
        }
        Command::Hierarchy => {
            let strategy = config.mg.hierarchy.strategy();
            let levels = descriptors_for(
                strategy,
                config.mesh.refinements,
                config.mg.coarse_level,
                config.discretization.r,
                config.k(),
            )?;
            let name = match strategy {
                HierarchyStrategy::HpSpaceTime => "hp space-time",
                HierarchyStrategy::SpatialHOnly => "spatial h only",
            };
            println!("{name} hierarchy, {} levels", levels.len());
            print!("{}", HierarchyTable(&levels));
        }
        Command::Selftest => {
            let results = run_selftest();
            let mut ok = true;
            for c in &results {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Ok(ExitCode::from(EXIT_SELFTEST));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run(&cli, &config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
