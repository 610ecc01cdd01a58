//! The `ironmask` command line.
//!
//! Exit codes: 0 success or Accept, 1 Reject, 2 usage error, 3 data error.
//! Data errors print the error's name, e.g. `error: BadMagic: ...`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::attacks::{brute_force_invert, plant_exact_instance, tmto_exact, BruteForceOutcome, TmtoOptions, TmtoReport, DEFAULT_CAPACITY};
use crate::centering::{center, CenterMethod, TemplateSet};
use crate::ecc::{decode, decode_list, security_bits, usample, CodeParams};
use crate::error::{Error, Result};
use crate::evaluation::{roc_sweep, run_protocol, write_report_csv, EvalConfig, ReportRow};
use crate::geometry::{normalize, parse_vector, UnitVector};
use crate::protection::{protect, read_protected, verify_list, write_protected, MatrixEncoding, ProtectedTemplate};
use crate::seeded_rng;
use crate::simulation::{export_csv, gen_dataset, import_csv, NoiseSpec};
use crate::store::Registry;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn data_error(e: &Error) -> Self {
        CommandOutcome { code: EXIT_DATA, stdout: String::new(), stderr: format!("error: {}: {e}\n", e.name()) }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ironmask", version, about = "Protect, verify and attack sphere-code protected templates")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CodeArgs {
    /// Code dimension n
    #[arg(long)]
    n: usize,
    /// Number of nonzero entries per codeword
    #[arg(long)]
    alpha: usize,
}

impl CodeArgs {
    fn params(&self) -> Result<CodeParams> {
        CodeParams::new(self.n, self.alpha)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a uniform random codeword
    Sample {
        #[command(flatten)]
        code: CodeArgs,
        /// RNG seed
        #[arg(long)]
        seed: u64,
    },
    /// Decode a vector read from standard input to its nearest codeword
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        /// Print the K nearest codewords, nearest first
        #[arg(long, value_name = "K")]
        list: Option<usize>,
    },
    /// Protect a template vector and write the container
    Protect {
        /// Number of nonzero entries per codeword; n is the vector's length
        #[arg(long)]
        alpha: usize,
        /// RNG seed
        #[arg(long)]
        seed: u64,
        /// Template vector file (whitespace-separated numbers)
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Output container path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Store the matrix as 32-bit floats
        #[arg(long)]
        f32: bool,
    },
    /// Check a probe against a protected template; exit 0 on accept, 1 on reject
    Verify {
        /// Protected template container
        #[arg(long, value_name = "FILE", required_unless_present = "store", conflicts_with = "store")]
        protected: Option<PathBuf>,
        /// Registry directory, used with --label instead of --protected
        #[arg(long, value_name = "DIR", requires = "label")]
        store: Option<PathBuf>,
        /// Enrolled label to look up in --store
        #[arg(long, requires = "store")]
        label: Option<String>,
        /// Probe vector file
        #[arg(long, value_name = "FILE")]
        probe: PathBuf,
        /// Accept if any of the K nearest codewords matches
        #[arg(long, value_name = "K", default_value_t = 1)]
        list: usize,
    },
    /// Print the center of one identity's templates from a dataset CSV
    Center {
        /// Center estimator
        #[arg(long)]
        method: CenterMethod,
        /// Dataset CSV (label, then coordinates)
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Identity label to center
        #[arg(long)]
        label: String,
    },
    /// Generate a synthetic dataset CSV
    Synth {
        /// Number of identities
        #[arg(long)]
        k: usize,
        /// Records per identity
        #[arg(long)]
        per: usize,
        /// Vector dimension
        #[arg(long)]
        dim: usize,
        /// Each record lies exactly this many degrees from its identity center
        #[arg(long, value_name = "DEG", required_unless_present = "sigma", conflicts_with = "sigma")]
        angle_deg: Option<f64>,
        /// Each record is the center plus N(0, sigma²) noise, renormalized
        #[arg(long)]
        sigma: Option<f64>,
        /// RNG seed
        #[arg(long)]
        seed: u64,
        /// Output CSV path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Run the TAR/FAR protocol and write a report CSV
    Eval {
        /// JSON evaluation config
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        /// Dataset CSV
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        /// Report CSV path
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Comma-separated ascending baseline thresholds in radians (ROC sweep)
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
    },
    /// Print log2 of the number of codewords
    SecurityBits {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Run an attack
    Attack {
        #[command(subcommand)]
        attack: Attack,
    },
    /// Add a protected template to a registry
    Enroll {
        /// Registry directory
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
        /// Label to enroll under
        #[arg(long)]
        label: String,
        /// Protected template container to copy in
        #[arg(long, value_name = "FILE")]
        protected: PathBuf,
        /// Store the matrix as 32-bit floats
        #[arg(long)]
        f32: bool,
    },
    /// Remove a label and its template from a registry
    Revoke {
        /// Registry directory
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
        /// Label to revoke
        #[arg(long)]
        label: String,
    },
    /// List registry entries as tab-separated label, file, created_at, n, alpha
    List {
        /// Registry directory
        #[arg(long, value_name = "DIR")]
        store: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Attack {
    /// Try codewords in canonical order until one hashes to the digest; exit 1 if the budget runs out
    Brute {
        /// Protected template container
        #[arg(long, value_name = "FILE")]
        protected: PathBuf,
        /// Maximum number of codewords to try
        #[arg(long)]
        budget: u64,
    },
    /// Meet-in-the-middle search on a planted instance; prints a JSON report
    Tmto {
        #[command(flatten)]
        code: CodeArgs,
        /// RNG seed for the planted instance
        #[arg(long)]
        seed: u64,
        /// Number of filtering coordinates (default: ceil(log2 N))
        #[arg(long)]
        ell: Option<usize>,
        /// Per-coordinate acceptance half-width
        #[arg(long, default_value_t = 0.0)]
        slack: f64,
        /// Largest table size allowed
        #[arg(long, default_value_t = DEFAULT_CAPACITY)]
        capacity: u64,
    },
}

/// The clap command tree, for help rendering and introspection.
pub fn command() -> clap::Command {
    Cli::command()
}

/// Runs one invocation with the process's standard input.
pub fn dispatch<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    dispatch_with_input(args, &mut std::io::stdin().lock())
}

/// Runs one invocation; `stdin` feeds `decode`.
pub fn dispatch_with_input<I, T>(args: I, stdin: &mut dyn Read) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                CommandOutcome::ok(text)
            };
        }
    };
    match run(cli.command, stdin) {
        Ok(outcome) => outcome,
        Err(e) => CommandOutcome::data_error(&e),
    }
}

fn read_vector_file(path: &Path, expected: Option<usize>) -> Result<UnitVector> {
    normalize(&parse_vector(&fs::read_to_string(path)?, expected)?)
}

fn read_container(path: &Path) -> Result<ProtectedTemplate> {
    read_protected(&mut BufReader::new(File::open(path)?))
}

fn encoding(f32: bool) -> MatrixEncoding {
    if f32 {
        MatrixEncoding::F32
    } else {
        MatrixEncoding::F64
    }
}

fn decision(accept: bool) -> CommandOutcome {
    if accept {
        CommandOutcome::ok("accept\n".into())
    } else {
        CommandOutcome { code: EXIT_REJECT, stdout: "reject\n".into(), stderr: String::new() }
    }
}

fn run(cmd: Command, stdin: &mut dyn Read) -> Result<CommandOutcome> {
    match cmd {
        Command::Sample { code, seed } => {
            let c = usample(code.params()?, &mut seeded_rng(seed));
            Ok(CommandOutcome::ok(format!("{c}\n")))
        }
        Command::Decode { code, list } => {
            let params = code.params()?;
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            let u = normalize(&parse_vector(&text, Some(params.dim()))?)?;
            let out: String = match list {
                None => format!("{}\n", decode(&u, params)?),
                Some(k) => decode_list(&u, params, k)?.iter().map(|c| format!("{c}\n")).collect(),
            };
            Ok(CommandOutcome::ok(out))
        }
        Command::Protect { alpha, seed, input, out, f32 } => {
            let t = read_vector_file(&input, None)?;
            let params = CodeParams::new(t.dim(), alpha)?;
            let pt = protect(&t, params, &mut seeded_rng(seed))?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_protected(&pt, &mut w, encoding(f32))?;
            w.flush()?;
            Ok(CommandOutcome::ok(format!("{}\n", hex::encode(pt.digest()))))
        }
        Command::Verify { protected, store, label, probe, list } => {
            let pt = match (protected, store, label) {
                (Some(path), _, _) => read_container(&path)?,
                (None, Some(dir), Some(label)) => Registry::open(dir)?.get(&label)?,
                _ => unreachable!("clap enforces --protected or --store with --label"),
            };
            let probe = read_vector_file(&probe, Some(pt.params().dim()))?;
            Ok(decision(verify_list(&pt, &probe, list)?.is_accept()))
        }
        Command::Center { method, input, label } => {
            let ds = import_csv(BufReader::new(File::open(&input)?))?;
            let members: Vec<UnitVector> = ds.vectors_for(&label).into_iter().cloned().collect();
            if members.is_empty() {
                return Err(Error::UnknownLabel(label));
            }
            Ok(CommandOutcome::ok(format!("{}\n", center(&TemplateSet::new(members)?, method)?)))
        }
        Command::Synth { k, per, dim, angle_deg, sigma, seed, out } => {
            let noise = match (angle_deg, sigma) {
                (Some(deg), _) => NoiseSpec::ExactAngle { theta: deg.to_radians() },
                (None, Some(sigma)) => NoiseSpec::GaussianPerturb { sigma },
                _ => unreachable!("clap enforces one noise flag"),
            };
            let ds = gen_dataset(k, per, dim, noise, &mut seeded_rng(seed))?;
            export_csv(&ds, BufWriter::new(File::create(&out)?))?;
            Ok(CommandOutcome::ok(format!("wrote {} records\n", ds.len())))
        }
        Command::Eval { config, data, out, thresholds } => {
            let cfg: EvalConfig = serde_json::from_str(&fs::read_to_string(&config)?)
                .map_err(|e| Error::ConfigContradiction(format!("{}: {e}", config.display())))?;
            let ds = import_csv(BufReader::new(File::open(&data)?))?;
            let rows: Vec<ReportRow> = match thresholds {
                None => vec![ReportRow::new(&cfg, None, &run_protocol(&ds, &cfg)?)],
                Some(ths) => roc_sweep(&ds, &cfg, &ths)?
                    .iter()
                    .map(|p| ReportRow::new(&cfg, p.threshold, &p.report))
                    .collect(),
            };
            let mut buf = Vec::new();
            write_report_csv(&rows, &mut buf)?;
            fs::write(&out, &buf)?;
            Ok(CommandOutcome::ok(String::from_utf8_lossy(&buf).into_owned()))
        }
        Command::SecurityBits { code } => Ok(CommandOutcome::ok(format!("{:.4}\n", security_bits(code.params()?)))),
        Command::Attack { attack: Attack::Brute { protected, budget } } => {
            let pt = read_container(&protected)?;
            Ok(match brute_force_invert(&pt, budget) {
                BruteForceOutcome::Found { codeword, template, tries } => {
                    CommandOutcome::ok(format!("found {codeword}\ntries {tries}\ntemplate {template}\n"))
                }
                BruteForceOutcome::Exhausted { tries } => {
                    CommandOutcome { code: EXIT_REJECT, stdout: format!("exhausted\ntries {tries}\n"), stderr: String::new() }
                }
            })
        }
        Command::Attack { attack: Attack::Tmto { code, seed, ell, slack, capacity } } => {
            let params = code.params()?;
            let opts = TmtoOptions { ell, slack, capacity };
            let inst = plant_exact_instance(params, &mut seeded_rng(seed))?;
            let start = Instant::now();
            let res = tmto_exact(&inst.helper, params, &opts)?;
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let report = TmtoReport {
                params,
                n_table: res.table_size,
                ell: res.ell,
                slack: res.slack,
                solutions_found: res.solutions.len(),
                planted_recovered: res.solutions.iter().any(|(a, b)| *a == inst.c1 && *b == inst.c2),
                step3_survivors: res.step3_survivors,
                step4_checks: res.step4_checks,
                wall_time_ms,
            };
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            Ok(CommandOutcome::ok(format!("{json}\n")))
        }
        Command::Enroll { store, label, protected, f32 } => {
            let pt = read_container(&protected)?;
            let mut reg = Registry::open(store)?;
            reg.enroll(&label, &pt, encoding(f32))?;
            Ok(CommandOutcome::ok(format!("{}\n", reg.entry(&label).expect("just enrolled").file)))
        }
        Command::Revoke { store, label } => {
            Registry::open(store)?.revoke(&label)?;
            Ok(CommandOutcome::ok(String::new()))
        }
        Command::List { store } => {
            let reg = Registry::open(store)?;
            let out = reg
                .entries()
                .iter()
                .map(|e| format!("{}\t{}\t{}\t{}\t{}\n", e.label, e.file, e.created_at, e.n, e.alpha))
                .collect();
            Ok(CommandOutcome::ok(out))
        }
    }
}
