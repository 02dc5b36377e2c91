use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bandex::filters::{default_inverse_band, design_inverse_irs, irs_modified_response, IrsTable, DESIGN_GRID};
use bandex::pipeline::{config::parse_layers, eval::evaluate, extend_file, train, HighSource, PipelineConfig};
use bandex::predictors::{load_model, save_model, PredictorKind};
use bandex::{Error, Result};

#[derive(Parser)]
#[command(name = "bandex", version, about = "Telephone-band to wideband speech extension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend an 8 kHz telephone WAV to 16 kHz.
    Extend {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Skip the inverse-IRS equalizer.
        #[arg(long)]
        no_irs_inverse: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train a model bundle on a directory of 16 kHz wideband WAVs.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// High-band predictor: mlp, codebook or regression.
        #[arg(long)]
        predictor: Option<String>,
        /// Hidden layer sizes of the high-band MLP, e.g. 30,30.
        #[arg(long)]
        hidden: Option<String>,
        #[arg(long)]
        codebook_bits: Option<u32>,
        #[arg(long)]
        residual_vq_bits: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the training report; printed when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a bundle on a directory of 16 kHz wideband WAVs.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        frames: Option<PathBuf>,
        /// Score the true truncated cepstrum instead of the model (floor).
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Design the inverse modified-IRS equalizer and write its taps.
    DesignIrsInverse {
        #[arg(long)]
        irs_table: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        half_order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded synthetic wideband corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        files: usize,
        #[arg(long, default_value_t = 3.0)]
        seconds: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extend { input, out, model, no_irs_inverse, config } => {
            let mut cfg = load_config(config.as_deref())?;
            if no_irs_inverse {
                cfg.inverse_irs = false;
            }
            let y = extend_file(&input, &out, load_model(&model)?, &cfg)?;
            eprintln!("wrote {} ({:.2} s at 16 kHz)", out.display(), y.duration_secs());
        }
        Command::Train {
            corpus,
            out,
            predictor,
            hidden,
            codebook_bits,
            residual_vq_bits,
            seed,
            config,
            report,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(p) = predictor {
                cfg.high_predictor = p.parse::<PredictorKind>()?;
            }
            if let Some(h) = hidden {
                cfg.hidden_high = parse_layers(&h)?;
            }
            if let Some(b) = codebook_bits {
                cfg.codebook_bits = b;
            }
            if residual_vq_bits.is_some() {
                cfg.residual_vq_bits = residual_vq_bits;
            }
            if let Some(s) = seed {
                cfg.schedule.seed = s;
            }
            cfg.validate()?;
            let (bundle, rep) = train(&corpus, &cfg)?;
            save_model(&bundle, &out)?;
            match report {
                Some(p) => std::fs::write(p, rep.to_text())?,
                None => print!("{}", rep.to_text()),
            }
            eprintln!("wrote {}", out.display());
        }
        Command::Eval { corpus, model, report, frames, oracle, config } => {
            let cfg = load_config(config.as_deref())?;
            let source = if oracle { HighSource::Oracle } else { HighSource::Model };
            let rep = evaluate(&corpus, &load_model(&model)?, &cfg, source)?;
            rep.save(report.as_deref(), frames.as_deref())?;
            print!("{}", rep.to_text());
        }
        Command::DesignIrsInverse { irs_table, half_order, out } => {
            let table = match irs_table {
                Some(p) => IrsTable::load(p)?,
                None => IrsTable::builtin(),
            };
            let g = irs_modified_response(&table, DESIGN_GRID)?;
            let h = design_inverse_irs(&g, half_order, default_inverse_band())?;
            let text: String = h.taps().iter().map(|t| format!("{t:?}\n")).collect();
            std::fs::write(&out, text)?;
            eprintln!("wrote {} taps to {}", h.len(), out.display());
        }
        Command::Synth { out, files, seconds, seed } => {
            if !(seconds > 0.0) {
                return Err(Error::Config("--seconds must be positive".into()));
            }
            let written = bandex::synth::write_corpus(&out, files, seconds, seed)?;
            eprintln!("wrote {} files to {}", written.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bandex: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
