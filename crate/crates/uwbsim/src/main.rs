use std::fs::File;
use std::io::{BufReader, Read, Seek};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uwb_core::dump::{read_waveform, MAGIC};
use uwb_core::psd::{welch_psd, WelchConfig, Window};
use uwbsim::error::SimError;
use uwbsim::mask::{mask_check, read_spectrum_csv, SpectralMask};
use uwbsim::report::{summary, write_outputs};
use uwbsim::sweep::{sweep, write_rows};
use uwbsim::{run_scenario, Scenario};

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_MASK_FAIL: u8 = 3;

#[derive(Parser)]
#[command(name = "uwbsim", version, about = "Run, sweep and mask-check UWB link scenarios")]
struct Cli {
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Judge the mask on the bands the spectrum covers.
    #[arg(long, global = true)]
    partial: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and print its report.
    Run {
        scenario: PathBuf,
        /// Mask file; defaults to the shipped FCC indoor mask.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Also write the radiated waveform.
        #[arg(long)]
        dump: bool,
    },
    /// Run a scenario once per value of one key and write BER rows.
    Sweep {
        scenario: PathBuf,
        /// Key path, e.g. p_out_dbm or channel.distance.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Index of the first value within a larger sweep.
        #[arg(long, default_value_t = 0)]
        first_index: u64,
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Check a spectrum CSV or waveform dump against a mask.
    Mask {
        spectrum: PathBuf,
        #[arg(long)]
        mask: PathBuf,
    },
}

fn load_mask(path: Option<&Path>) -> uwbsim::Result<SpectralMask> {
    path.map_or_else(|| Ok(SpectralMask::fcc_indoor()), SpectralMask::load)
}

fn load_scenario(path: &Path, seed: Option<u64>) -> uwbsim::Result<Scenario> {
    let mut s = Scenario::load(path)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn read_spectrum(path: &Path) -> uwbsim::Result<uwb_core::Spectrum> {
    let mut f = BufReader::new(File::open(path)?);
    let mut head = [0u8; 4];
    let n = f.read(&mut head)?;
    f.rewind()?;
    if n == 4 && head == MAGIC {
        let w = read_waveform(&mut f).map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        let seg = (1usize << 17).min(1 << w.len().max(2).ilog2());
        welch_psd(&w, &WelchConfig::new(seg, 0.5, Window::Hann))
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
    } else {
        read_spectrum_csv(f)
    }
}

fn execute(cli: Cli) -> uwbsim::Result<u8> {
    match cli.cmd {
        Cmd::Run { scenario, mask, dump } => {
            let s = load_scenario(&scenario, cli.seed)?;
            let r = run_scenario(&s, &load_mask(mask.as_deref())?)?;
            print!("{}", summary(&r));
            if let Some(dir) = &cli.out {
                write_outputs(&r, dir, dump)?;
            }
            Ok(0)
        }
        Cmd::Sweep {
            scenario,
            param,
            values,
            first_index,
            mask,
        } => {
            let s = load_scenario(&scenario, cli.seed)?;
            let values: Vec<String> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(str::to_owned)
                .collect();
            let rows = sweep(&s, &load_mask(mask.as_deref())?, &param, &values, first_index, cli.jobs)?;
            if rows.is_empty() {
                return Ok(0);
            }
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    write_rows(&rows, File::create(dir.join("sweep.csv"))?)?;
                }
                None => write_rows(&rows, std::io::stdout().lock())?,
            }
            Ok(0)
        }
        Cmd::Mask { spectrum, mask } => {
            let spec = read_spectrum(&spectrum)?;
            let res = mask_check(&spec, &SpectralMask::load(&mask)?);
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    res.write_csv(File::create(dir.join("mask.csv"))?)?;
                }
                None => res.write_csv(std::io::stdout().lock())?,
            }
            let pass = match (res.pass(), cli.partial) {
                (Some(p), _) => p,
                (None, true) => res.pass_partial(),
                (None, false) => {
                    return Err(SimError::Config(
                        "spectrum does not cover every mask band; rerun with --partial".into(),
                    ))
                }
            };
            Ok(if pass { 0 } else { EXIT_MASK_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
