//! `hidm` command-line tool.
//!
//! Every command reads the tree from `--config` (the bundled 7-layer
//! 256-QAM setup when omitted). Failures print a single line
//! `error kind=<kind> msg=<message>` on stderr and exit with status 1.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hidm::analysis::{ccdm_stats, hidm_stats, stats_from_mb, table_iv_report, StatsReport};
use hidm::config::{ConfigError, ToolConfig};
use hidm::datafile::{self, DataFileError, PackedBits};
use hidm::lutfile::{self, LutFileError};
use hidm::mb_solver::mb_fit;
use hidm::{codec::CodecError, BitWord, LutSet};

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "hidm",
    version,
    about = "Hierarchical LUT distribution matcher for shaped QAM"
)]
struct Cli {
    /// Tree configuration (TOML); defaults to the bundled 256-QAM setup.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Output file (or directory for `stats`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the LUTs and write them as a LUT file (requires --out).
    Synthesize,
    /// Shape a byte file into a packed-bit file.
    Encode {
        input: PathBuf,
        /// LUT file from `synthesize`; synthesized from --config otherwise.
        #[arg(long)]
        luts: Option<PathBuf>,
        /// Reject inputs that are not a whole number of words instead of
        /// zero padding the last one.
        #[arg(long)]
        no_pad: bool,
    },
    /// Invert `encode`.
    Decode {
        input: PathBuf,
        #[arg(long)]
        luts: Option<PathBuf>,
    },
    /// Signal statistics of the HiDM, CCDM and MB distributions.
    Stats,
    /// Side-by-side comparison with the published reference values.
    TableIv,
    /// Exhaustive toy-tree oracles plus sampled checks on the config.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        words: usize,
    },
    /// Write encode test vectors for random information words.
    Vectors {
        #[arg(long, default_value_t = 16)]
        words: usize,
    },
    /// Check a test-vector file against the configured tree.
    Verify { input: PathBuf },
}

fn load_config(path: Option<&Path>) -> Result<ToolConfig> {
    Ok(match path {
        Some(p) => ToolConfig::load(p)?,
        None => ToolConfig::bundled(),
    })
}

fn load_luts(cli: &Cli, luts: Option<&Path>) -> Result<LutSet> {
    match luts {
        Some(p) => {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(lutfile::read_lutset(&bytes)?)
        }
        None => Ok(load_config(cli.config.as_deref())?.synthesize()?),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn render(report: &StatsReport, name: &str, format: Format) -> String {
    match format {
        Format::Text => report.to_text(name),
        Format::Csv => report.to_csv(),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Synthesize => {
            let Some(path) = out else {
                bail!(UsageError("synthesize needs --out"));
            };
            let set = load_config(cli.config.as_deref())?.synthesize()?;
            emit(Some(path), &lutfile::write_lutset(&set))?;
            let spec = set.spec();
            let (dm, invdm) = set.stored_bits();
            let digest: String = spec.digest().iter().map(|b| format!("{b:02x}")).collect();
            println!(
                "layers={} n_info={} n_out={} n_pam={} dm_bits={dm} invdm_bits={invdm} digest={digest}",
                spec.depth(),
                spec.n_info(),
                spec.n_out(),
                spec.n_pam()
            );
        }
        Command::Encode {
            input,
            luts,
            no_pad,
        } => {
            let set = load_luts(cli, luts.as_deref())?;
            let data = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            let packed = if *no_pad {
                let info = BitWord::from_bytes(&data, data.len() * 8).expect("exact length");
                PackedBits {
                    source_bits: info.len() as u64,
                    payload: hidm::codec::encode_stream(&set, &info, false)?,
                }
            } else {
                datafile::encode_bytes(&set, &data)?
            };
            emit(out, &packed.to_bytes())?;
        }
        Command::Decode { input, luts } => {
            let set = load_luts(cli, luts.as_deref())?;
            let bytes = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
            let packed = PackedBits::from_bytes(&bytes)?;
            emit(out, &datafile::decode_bytes(&set, &packed)?)?;
        }
        Command::Stats => {
            let config = load_config(cli.config.as_deref())?;
            let m = config.m;
            let m_sb = config.m_sb;
            let mut columns = vec![("hidm", hidm_stats(&config.synthesize()?))];
            if config.ccdm.is_some() {
                columns.push(("ccdm", ccdm_stats(&config.ccdm_code()?, m, m_sb)?));
            }
            if config.mb.is_some() {
                columns.push(("mb", stats_from_mb(&mb_fit(config.mb_target()?, m)?)));
            }
            let ext = match cli.format {
                Format::Text => "txt",
                Format::Csv => "csv",
            };
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir)
                        .with_context(|| format!("creating {}", dir.display()))?;
                    for (name, report) in &columns {
                        emit(
                            Some(&dir.join(format!("{name}.{ext}"))),
                            render(report, name, cli.format).as_bytes(),
                        )?;
                    }
                }
                None => {
                    let text: Vec<String> = columns
                        .iter()
                        .map(|(n, r)| render(r, n, cli.format))
                        .collect();
                    emit(None, text.join("\n").as_bytes())?;
                }
            }
        }
        Command::TableIv => {
            let config = load_config(cli.config.as_deref())?;
            let report = table_iv_report(
                &config.synthesize()?,
                &config.ccdm_code()?,
                config.mb_target()?,
            )?;
            let text = match cli.format {
                Format::Text => report.to_text(),
                Format::Csv => report.to_csv(),
            };
            emit(out, text.as_bytes())?;
        }
        Command::Selftest { words } => {
            let config = load_config(cli.config.as_deref())?;
            let report = hidm::selftest::run_selftest(&config, *words, cli.seed);
            emit(out, report.to_text().as_bytes())?;
            if !report.passed() {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                bail!(SelfTestFailed(failed.join(",")));
            }
        }
        Command::Vectors { words } => {
            let set = load_config(cli.config.as_deref())?.synthesize()?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let n = set.spec().n_info();
            let mut info = vec![BitWord::zeros(n)];
            info.extend((1..*words).map(|_| BitWord::random(&mut rng, n)));
            info.truncate(*words);
            emit(out, datafile::write_vectors(&set, &info)?.as_bytes())?;
        }
        Command::Verify { input } => {
            let set = load_config(cli.config.as_deref())?.synthesize()?;
            let text = fs::read_to_string(input)
                .with_context(|| format!("reading {}", input.display()))?;
            let checked = datafile::verify_vectors(&set, &datafile::parse_vectors(&text)?)?;
            println!("verified {checked} vectors");
        }
    }
    Ok(())
}

#[derive(Debug)]
struct UsageError(&'static str);

#[derive(Debug)]
struct SelfTestFailed(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0)
    }
}

impl std::fmt::Display for SelfTestFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "failed checks: {}", self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for SelfTestFailed {}

fn kind(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return "usage";
        }
        if cause.is::<SelfTestFailed>() {
            return "selftest";
        }
        if let Some(e) = cause.downcast_ref::<ConfigError>() {
            return match e {
                ConfigError::Io { .. } => "io",
                _ => "config",
            };
        }
        if cause.is::<CodecError>() {
            return "codec";
        }
        if cause.is::<LutFileError>() {
            return "lutfile";
        }
        if let Some(e) = cause.downcast_ref::<DataFileError>() {
            return match e {
                DataFileError::Codec(_) => "codec",
                _ => "datafile",
            };
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
    }
    "internal"
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = format!("{err:#}").replace(['\n', '\r'], " ");
            eprintln!("error kind={} msg={msg}", kind(&err));
            ExitCode::FAILURE
        }
    }
}
