use clap::{Parser, Subcommand, ValueEnum};
use stark_index::field::load_field_instance;
use stark_index::lvalues::DirichletOracle;
use stark_index::numeric::PrecisionContext;
use stark_index::selftest::selftest;
use stark_index::synthetic::{is_synthetic_file, load_synthetic};
use stark_index::verify::{verify_genuine, verify_synthetic, Section, VerificationReport};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stark-index", version, about = "Checks the Rubin-Stark index formula on real abelian fields and synthetic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Instance file (genuine field or synthetic data).
    #[arg(long, global = true)]
    field: Option<PathBuf>,
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 100)]
    precision: u32,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Full report: every term and every identity.
    Verify,
    /// Lattice indices and the index formula.
    Index,
    /// Leading L-values and the zeta assemblies.
    Lvalue,
    /// Regulators, c-constants and the regulator index.
    Regulator,
    /// Stark elements, their certificates and the image law.
    Stark,
    /// Definitional identities on small cases.
    Selftest,
}

#[derive(ValueEnum, Clone, Copy)]
enum Format {
    Text,
    Json,
}

/// Exit status for usage and input errors.
const USAGE: u8 = 2;

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    USAGE
}

fn emit(cli: &Cli, text: String) -> Result<(), u8> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(cli: &Cli) -> Result<VerificationReport, u8> {
    let path = cli.field.as_ref().ok_or_else(|| usage("--field is required"))?;
    let ctx = PrecisionContext::new(cli.precision).map_err(usage)?;
    let synthetic = is_synthetic_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if synthetic {
        let inst = load_synthetic(path, &ctx).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Ok(verify_synthetic(&inst))
    } else {
        let inst = load_field_instance(path, &ctx).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let oracle = DirichletOracle::new(&inst).map_err(usage)?;
        Ok(verify_genuine(&inst, &oracle))
    }
}

fn run(cli: &Cli) -> Result<bool, u8> {
    let section = match cli.command {
        Command::Selftest => {
            let checks = selftest();
            let passed = checks.iter().all(|c| c.passed);
            let text = match cli.format {
                Format::Text => {
                    let mut s: String = checks.iter().map(|c| c.to_text()).collect();
                    s += &format!("verdict: {}\n", if passed { "PASS" } else { "FAIL" });
                    s
                }
                Format::Json => serde_json::to_string_pretty(&checks).expect("checks serialize") + "\n",
            };
            emit(cli, text)?;
            return Ok(passed);
        }
        Command::Verify => Section::Full,
        Command::Index => Section::Index,
        Command::Lvalue => Section::LValue,
        Command::Regulator => Section::Regulator,
        Command::Stark => Section::Stark,
    };
    let report = report(cli)?.section(section);
    let text = match cli.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    emit(cli, text)?;
    if !report.hypotheses_passed() {
        let failed: Vec<String> = report.failed_hypotheses().iter().map(|h| format!("({h})")).collect();
        eprintln!("hypothesis {} fails", failed.join(", "));
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(code) => ExitCode::from(code),
    }
}
