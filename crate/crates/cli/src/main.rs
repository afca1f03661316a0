use clap::{Args, Parser, Subcommand};
use rtpi::{
    apply_quad_override, converge, friedrichs, gram, parse_element, verify, verify_status,
    write_converge, write_friedrichs, write_gram, write_report, write_table, CliError, CliResult,
    Operator, RunConfig, QUAD_MAX_VAR,
};
use rtpi_core::sobolev::LIFT_MARGIN;
use rtpi_core::verify::SuiteConfig;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// H(div) projection-based p-interpolation on the reference triangle and square.
#[derive(Parser)]
#[command(name = "rtpi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Reference element: tri or quad.
    #[arg(long, default_value = "quad")]
    element: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the verification suite; exit 0 iff every check passes.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        pmax: usize,
        /// Random inputs per degree.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Also run the slope checks (slow).
        #[arg(long)]
        rates: bool,
        /// Reference degree of the slope checks.
        #[arg(long, default_value_t = 30)]
        p_ref: usize,
    },
    /// Interpolation errors of one catalog field for p = 1..pmax (CSV).
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        pmax: usize,
        #[arg(long)]
        field: String,
        /// div-half (projection-based) or div (classical).
        #[arg(long, default_value = "div-half")]
        operator: String,
        /// Reference degree is pmax + offset unless --p-ref is given.
        #[arg(long, default_value_t = 4)]
        p_ref_offset: usize,
        #[arg(long)]
        p_ref: Option<usize>,
    },
    /// Discrete Friedrichs constants for p = 1..pmax (CSV).
    Friedrichs {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        pmax: usize,
    },
    /// Dump a Gram matrix as i,j,value (CSV).
    Gram {
        #[command(flatten)]
        common: Common,
        /// edge-h12[:edge], dualhalf-tilde, dualhalf-plain, l2, h1-semi,
        /// h-minus1 or h-tilde-minus1.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        p: usize,
        /// Lift and dual-solve degrees above p.
        #[arg(long, default_value_t = LIFT_MARGIN)]
        margin: usize,
    },
}

fn sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Config(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> CliResult<i32> {
    apply_quad_override(std::env::var(QUAD_MAX_VAR).ok().as_deref())?;
    match cli.command {
        Command::Verify {
            common,
            pmax,
            samples,
            rates,
            p_ref,
        } => {
            let mut cfg = SuiteConfig::new(parse_element(&common.element)?, pmax, common.seed);
            cfg.samples = samples;
            cfg.rates = rates;
            cfg.p_ref = p_ref;
            let checks = verify(&cfg)?;
            write_table(io::stdout().lock(), &checks)?;
            if common.out.is_some() {
                let mut w = sink(&common.out)?;
                write_report(&mut w, &checks)?;
                w.flush()?;
            }
            Ok(verify_status(&checks))
        }
        Command::Converge {
            common,
            pmax,
            field,
            operator,
            p_ref_offset,
            p_ref,
        } => {
            let mut cfg = RunConfig::new(parse_element(&common.element)?, pmax, field);
            cfg.seed = common.seed;
            cfg.operator = Operator::parse(&operator)?;
            cfg.p_ref_offset = p_ref_offset;
            cfg.p_ref = p_ref;
            let rows = converge(&cfg)?;
            write_converge(sink(&common.out)?, &cfg, &rows)?;
            Ok(0)
        }
        Command::Friedrichs { common, pmax } => {
            let rows = friedrichs(parse_element(&common.element)?, pmax)?;
            write_friedrichs(sink(&common.out)?, &rows)?;
            Ok(0)
        }
        Command::Gram {
            common,
            kind,
            p,
            margin,
        } => {
            let rows = gram(parse_element(&common.element)?, &kind, p, margin)?;
            write_gram(sink(&common.out)?, &rows)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
