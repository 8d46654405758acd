use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use quantforge::cost::{Arch, Catalog};
use quantforge::frontend::{load_network, load_parameters, read_blob};
use quantforge::ir::Network;
use quantforge::passes::parse_pass_list;
use quantforge::report::canonical_text;

use crate::app::{self, AppError, ArchChoice, FoldingSpec};
use crate::{human, service};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "quantforge", version, about = "Cost, folding and performance exploration for quantized network accelerators")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub format: Format,
    /// Cost coefficient profile name or TOML file.
    #[arg(long, global = true)]
    pub coeffs: Option<String>,
    /// Comma separated passes applied after loading the network.
    #[arg(long, global = true)]
    pub passes: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Platform name from the catalog, or a TOML file.
    #[arg(long)]
    pub platform: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a topology and list its layers.
    Parse { network: String },
    /// Workload table: operations and parameters per layer and precision.
    Report { network: String },
    /// Run the `--passes` pipeline and print its log.
    Passes {
        network: String,
        /// Write the transformed topology here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cost and performance of a given folding.
    Estimate {
        network: String,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "df")]
        arch: String,
        /// `P,Q,M` for every layer, or a JSON file mapping layers to foldings.
        #[arg(long)]
        folding: Option<String>,
    },
    /// Balance a design under the platform budget.
    Balance {
        network: String,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = "auto")]
        arch: String,
    },
    /// Schedule every layer on one offload engine.
    Schedule {
        network: String,
        #[command(flatten)]
        target: Target,
        /// Engine geometry `P,Q,M`.
        #[arg(long)]
        engine: String,
    },
    /// Compute and memory roofs for precision pairs.
    Roofline {
        #[command(flatten)]
        target: Target,
        /// Comma separated `W/A` pairs.
        #[arg(long, default_value = "1/1,2/2,8/8")]
        precisions: String,
        /// Comma separated arithmetic intensities in Op/B.
        #[arg(long, default_value = "0.25,1,4,16,64,256,1024")]
        intensities: String,
    },
    /// Grid of designs over platforms, precisions and architectures.
    Sweep {
        network: String,
        /// Comma separated platform names.
        #[arg(long)]
        platforms: String,
        #[arg(long, default_value = "1/1,1/2,2/2")]
        precisions: String,
        #[arg(long, default_value = "df")]
        archs: String,
    },
    /// Fit cost coefficients to synthesis measurements (CSV).
    Calibrate {
        records: PathBuf,
        /// Write the fitted profile here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a parameterised network on one input.
    Exec {
        network: String,
        /// Parameter blob (little-endian f32).
        #[arg(long)]
        params: PathBuf,
        /// Input tensor as whitespace separated text or an f32 blob.
        #[arg(long)]
        input: PathBuf,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Mirror sessions to this directory.
        #[arg(long)]
        store: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<Vec<u8>, AppError> {
    std::fs::read(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

fn load(cli: &Cli, network: &str) -> Result<Network, AppError> {
    let net = load_network(network)?;
    let passes = cli.passes.as_deref().map(parse_pass_list).unwrap_or_default();
    Ok(app::apply_passes(&net, &passes)?.0)
}

fn list(text: &str) -> Vec<String> {
    parse_pass_list(text)
}

fn folding_arg(text: Option<&str>) -> Result<FoldingSpec, AppError> {
    match text {
        None => Ok(FoldingSpec::Minimal),
        Some(t) if t.ends_with(".json") => {
            let bytes = read(&PathBuf::from(t))?;
            let v: Value = serde_json::from_slice(&bytes).map_err(|e| AppError::Usage(format!("{t}: {e}")))?;
            FoldingSpec::from_value(&v)
        }
        Some(t) => Ok(FoldingSpec::Uniform(app::parse_triple(t)?)),
    }
}

fn arch_arg(text: &str) -> Result<Arch, AppError> {
    text.parse().map_err(|_| AppError::Usage(format!("unknown architecture `{text}` (expected df or mo)")))
}

/// Output document plus its human renderer.
type Output = (Value, fn(&Value) -> String);

fn run_command(cli: &Cli, catalog: &Catalog) -> Result<Output, AppError> {
    let coeffs = || app::resolve_coeffs(cli.coeffs.as_deref());
    Ok(match &cli.command {
        Command::Parse { network } => (app::parse_summary(&load(cli, network)?)?, human::parse),
        Command::Report { network } => (app::workload_report(&load(cli, network)?)?, human::workload),
        Command::Passes { network, out } => {
            let base = load_network(network)?;
            let passes = cli.passes.as_deref().map(parse_pass_list).unwrap_or_default();
            let (net, log) = app::apply_passes(&base, &passes)?;
            if let Some(path) = out {
                std::fs::write(path, app::native_text(&net)?)
                    .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            }
            (app::pass_log(&net, &log), human::passes)
        }
        Command::Estimate { network, target, arch, folding } => {
            let platform = app::resolve_platform(catalog, &target.platform)?;
            let folding = folding_arg(folding.as_deref())?;
            let v = app::estimate(&load(cli, network)?, &platform, &coeffs()?, arch_arg(arch)?, &folding)?;
            (v, human::design)
        }
        Command::Balance { network, target, arch } => {
            let platform = app::resolve_platform(catalog, &target.platform)?;
            let arch: ArchChoice = arch.parse()?;
            (app::balance(&load(cli, network)?, &platform, &coeffs()?, arch)?, human::design)
        }
        Command::Schedule { network, target, engine } => {
            let platform = app::resolve_platform(catalog, &target.platform)?;
            (app::schedule(&load(cli, network)?, &platform, app::parse_triple(engine)?)?, human::schedule)
        }
        Command::Roofline { target, precisions, intensities } => {
            let platform = app::resolve_platform(catalog, &target.platform)?;
            let pairs = list(precisions).iter().map(|p| app::parse_pair(p)).collect::<Result<Vec<_>, _>>()?;
            let intensities = list(intensities)
                .iter()
                .map(|i| i.parse::<f64>().map_err(|_| AppError::Usage(format!("bad intensity `{i}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            (app::roofline_report(&platform, &coeffs()?, &pairs, &intensities), human::roofline)
        }
        Command::Sweep { network, platforms, precisions, archs } => {
            let platforms =
                list(platforms).iter().map(|p| app::resolve_platform(catalog, p)).collect::<Result<Vec<_>, _>>()?;
            let pairs = list(precisions).iter().map(|p| app::parse_pair(p)).collect::<Result<Vec<_>, _>>()?;
            let archs = list(archs).iter().map(|a| arch_arg(a)).collect::<Result<Vec<_>, _>>()?;
            (app::sweep_report(&load(cli, network)?, &platforms, &coeffs()?, &pairs, &archs), human::sweep)
        }
        Command::Calibrate { records, out } => {
            let text = String::from_utf8(read(records)?).map_err(|_| AppError::Usage("records must be UTF-8".into()))?;
            let (report, fitted) = app::calibrate(&text, &coeffs()?)?;
            if let Some(path) = out {
                std::fs::write(path, fitted.to_toml()).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
            }
            (report, human::calibration)
        }
        Command::Exec { network, params, input } => {
            let net = load_network(network)?;
            let values = read_blob(&read(params)?)?;
            let net = load_parameters(&net, &values)?;
            let passes = cli.passes.as_deref().map(parse_pass_list).unwrap_or_default();
            let (net, _) = app::apply_passes(&net, &passes)?;
            let x = app::read_tensor_values(&read(input)?)?;
            (app::tensor_report(&app::exec(&net, x)?), human::tensor)
        }
        Command::Serve { .. } => unreachable!("handled by run"),
    })
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on a domain error, 2 on a usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let catalog = match Catalog::load() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    if let Command::Serve { bind, store } = &cli.command {
        let state = match store {
            Some(dir) => match service::AppState::with_store(catalog, dir) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 1;
                }
            },
            None => service::AppState::new(catalog),
        };
        let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
        return match runtime.block_on(service::serve(bind, state)) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        };
    }
    match run_command(&cli, &catalog) {
        Ok((doc, render)) => {
            let text = match cli.format {
                Format::Structured => canonical_text(&doc),
                Format::Human => render(&doc),
            };
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e @ AppError::Usage(_)) => {
            let _ = writeln!(err, "usage error: {e}");
            2
        }
        Err(e) => {
            match cli.format {
                Format::Structured => {
                    let _ = err.write_all(canonical_text(&e.payload()).as_bytes());
                }
                Format::Human => {
                    let _ = writeln!(err, "error [{}]: {e}", e.kind());
                }
            }
            1
        }
    }
}
