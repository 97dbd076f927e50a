use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pointer_therm::config::{read_pairs, resolve, ConfigError, Resolved};
use pointer_therm::experiments::{run_case, simulate, thread_count, EngineConfig, Physics, RunError, ROSTER, SWEEP_T_MAX};
use pointer_therm::table::{self, TableError};
use pointer_therm::verify::{write_case, Settings, Suite};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_CRITERIA: u8 = 3;

/// Qubit thermalization in a Drude-Lorentz bath, by hierarchical equations of motion.
#[derive(Parser)]
#[command(name = "pointer-therm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Simulate(RunArgs),
    /// Steady states over a grid of coupling strengths.
    Sweep {
        /// Named coupling: I is sigma_x, II is (sigma_x + sigma_z) / 2.
        #[arg(long, value_enum)]
        case: Option<Case>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the acceptance checks and print one line per criterion.
    Verify {
        /// Shallow hierarchies and a small bath.
        #[arg(long)]
        quick: bool,
        /// Directory for the sweep and trajectory CSVs.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    #[value(name = "I")]
    One,
    #[value(name = "II")]
    Two,
}

/// Every key of the config file, as a flag. Flags win over the file.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    omega0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    temperature: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<String>,
    /// Comma-separated, strictly increasing.
    #[arg(long, allow_negative_numbers = true)]
    lambdas: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    gamma_drude: Option<String>,
    /// sx, sxsz or `ax,ay,az`.
    #[arg(long, allow_negative_numbers = true)]
    coupling: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    coupling_ax: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    coupling_ay: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    coupling_az: Option<String>,
    /// psi1, psi2, gibbs, mixed or `x,y,z`.
    #[arg(long, allow_negative_numbers = true)]
    initial_state: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    depth: Option<String>,
    /// A step size or `auto`.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    steady_tol: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    output: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> Vec<(String, String)> {
        let fields = [
            ("omega0", &self.omega0),
            ("temperature", &self.temperature),
            ("lambda", &self.lambda),
            ("lambdas", &self.lambdas),
            ("gamma_drude", &self.gamma_drude),
            ("coupling", &self.coupling),
            ("coupling.ax", &self.coupling_ax),
            ("coupling.ay", &self.coupling_ay),
            ("coupling.az", &self.coupling_az),
            ("initial_state", &self.initial_state),
            ("depth", &self.depth),
            ("dt", &self.dt),
            ("t_max", &self.t_max),
            ("steady_tol", &self.steady_tol),
            ("output", &self.output),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }

    fn resolve(&self, extra: &[(String, String)]) -> Result<Resolved, ConfigError> {
        let file = match &self.config {
            Some(path) => read_pairs(path)?,
            None => Vec::new(),
        };
        let mut flags = self.flags();
        flags.extend_from_slice(extra);
        resolve(&file, &flags)
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("--case and the coupling flags are mutually exclusive")]
    CaseAndCoupling,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(RunError::Numerical { .. }) => EXIT_NUMERICAL,
            CliError::Run(RunError::Core(pointer_therm_core::Error::Blowup { .. })) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

fn write_echo(path: &Path, resolved: &Resolved) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, resolved.echo()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn warn_temperature(physics: &Physics) {
    if let Ok(bath) = physics.bath(0.0) {
        if !bath.is_high_temperature() {
            eprintln!(
                "warning: beta * gamma = {:.3} >= pi; the two-exponential kernel expansion loses accuracy",
                bath.beta * bath.gamma
            );
        }
    }
}

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let resolved = args.resolve(&[])?;
    let c = &resolved.config;
    let lambda = c.lambda()?;
    let output = c.output.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    eprint!("{}", resolved.echo());
    let physics = Physics::from_config(c);
    warn_temperature(&physics);
    write_echo(&output.with_extension("config"), &resolved)?;
    match simulate(&physics, lambda, &c.initial_state, &EngineConfig::from_config(c, pointer_therm::config::DEFAULT_T_MAX)) {
        Ok(record) => {
            table::write_trajectory(&output, &record)?;
            let r = record.final_bloch();
            let steady = record.steady_time.map_or_else(|| "not steady".to_string(), |t| format!("steady at t = {t}"));
            println!("{}: {} samples, final r = ({:.6}, {:.6}, {:.6}), {steady}", output.display(), record.samples.len(), r.x, r.y, r.z);
            Ok(())
        }
        Err(e) => {
            if let Some(partial) = e.partial() {
                table::write_trajectory(&output, partial)?;
                eprintln!("partial trajectory written to {}", output.display());
            }
            Err(e.into())
        }
    }
}

fn cmd_sweep(case: Option<Case>, args: &RunArgs) -> Result<(), CliError> {
    let mut extra = Vec::new();
    if let Some(case) = case {
        if args.coupling.is_some() || args.coupling_ax.is_some() || args.coupling_ay.is_some() || args.coupling_az.is_some() {
            return Err(CliError::CaseAndCoupling);
        }
        let name = match case {
            Case::One => "sx",
            Case::Two => "sxsz",
        };
        extra.push(("coupling".to_string(), name.to_string()));
    }
    let resolved = args.resolve(&extra)?;
    let c = &resolved.config;
    let dir = c.output.clone().unwrap_or_else(|| {
        PathBuf::from(match case {
            Some(Case::One) => "sweep_case_I",
            Some(Case::Two) => "sweep_case_II",
            None => "sweep",
        })
    });
    eprint!("{}", resolved.echo());
    let physics = Physics::from_config(c);
    warn_temperature(&physics);
    write_echo(&dir.join("config.txt"), &resolved)?;
    let result = run_case(&physics, &c.lambdas(), &ROSTER, &EngineConfig::from_config(c, SWEEP_T_MAX), thread_count())?;
    write_case(&dir, &result)?;
    for r in result.unsteady() {
        eprintln!("warning: lambda = {}, initial state {} not steady by t = {}", r.lambda, r.label, r.final_time);
    }
    for p in &result.sweep.points {
        if p.spread > 2.0 * c.steady_tol {
            eprintln!("warning: lambda = {}: final states differ by {:.2e}", p.lambda, p.spread);
        }
        println!(
            "lambda = {:<5} r = ({:+.6}, {:+.6}, {:+.6})  S = {:.6}  d = ({:.6}, {:.6})",
            p.lambda, p.bloch.x, p.bloch.y, p.bloch.z, p.entropy, p.elements.d1, p.elements.d2
        );
    }
    println!("wrote {}", dir.join("sweep.csv").display());
    Ok(())
}

fn cmd_verify(quick: bool, output: Option<&Path>) -> ExitCode {
    let suite = Suite::new(if quick { Settings::quick() } else { Settings::full() });
    let mut numerical = false;
    let mut all_pass = true;
    for report in suite.all() {
        println!("{report}");
        numerical |= report.error.as_ref().is_some_and(|e| e.numerical);
        all_pass &= report.pass();
    }
    if let Some(dir) = output {
        if let Err(e) = suite.write_outputs(dir) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    match (numerical, all_pass) {
        (true, _) => ExitCode::from(EXIT_NUMERICAL),
        (false, true) => ExitCode::SUCCESS,
        (false, false) => ExitCode::from(EXIT_CRITERIA),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep { case, run } => cmd_sweep(*case, run),
        Command::Verify { quick, output } => return cmd_verify(*quick, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
