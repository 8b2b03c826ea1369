//! The `qpke` command line: file-based key generation, encryption and
//! decryption plus the analysis commands.
//!
//! Exit codes: 0 success, 1 domain or data errors, 2 usage errors, 3
//! decryption failure. Errors go to stderr as one JSON object.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crate::bits;
use crate::error::{Error, Result};
use crate::errormodel::{self, FaultModel, PauliDistribution};
use crate::params::{self, Params, DEFAULT_SECURITY_BITS, DEFAULT_TAG_BITS};
use crate::prf::{GroupFunction, SecretKey, SK_MAGIC};
use crate::protocol::format::{self, KeyMode, PkReader, CT_MAGIC, PK_MAGIC};
use crate::protocol::{decrypt, encrypt_groups, pk_gen, Ciphertext};
use crate::secgame::{self, GameConfig};
use crate::simulator::circuit::{Circuit, CircuitFormat};
use crate::simulator::{NoiseChannel, Permutation};

#[derive(Debug, Parser)]
#[command(name = "qpke", version = version_text(), about = "Quantum public-key encryption toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

fn version_text() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), " (formats: QPKE-SK v1, QPKE-PK v1, QPKE-CT v1, OpenQASM 3.0)")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
    JsonLines,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for the simulation and tag PRNG; runs are reproducible under it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (written atomically); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Message length in bits.
    #[arg(long, default_value_t = 8)]
    pub ell: usize,
    /// Qubits per group.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Pad flip rate the key must tolerate.
    #[arg(long = "Q", default_value_t = 0.0)]
    pub noise: f64,
    /// Tag length in bits.
    #[arg(long, default_value_t = DEFAULT_TAG_BITS)]
    pub p: u32,
    /// Maximum number of public keys.
    #[arg(long)]
    pub c: u64,
    /// Group count; defaults to the smallest secure value.
    #[arg(long = "N")]
    pub groups: Option<usize>,
}

impl ParamArgs {
    fn resolve(&self, security_bits: u32) -> Result<Params> {
        let groups = match self.groups {
            Some(g) => g,
            None => params::group_count(self.ell, self.n, self.noise, self.p, self.c)? as usize,
        };
        let p = Params {
            security_bits,
            group_qubits: self.n,
            groups,
            tag_bits: self.p,
            max_keys: self.c,
            message_bits: self.ell,
            noise: self.noise,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a secret key.
    Keygen {
        #[arg(long, default_value_t = DEFAULT_SECURITY_BITS)]
        lambda: u32,
        /// Allow --seed (never for real keys).
        #[arg(long)]
        test_mode: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a public key file, one group per line.
    Pkgen {
        #[arg(long)]
        sk: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "ideal")]
        mode: String,
        /// Noise applied to the stored groups (noisy mode only).
        #[arg(long, default_value = "none")]
        channel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Encrypt with a public key file and mark the file spent.
    Encrypt {
        #[arg(long)]
        pk: PathBuf,
        #[arg(long)]
        msg_hex: String,
        /// Noise applied to each group before measurement.
        #[arg(long, default_value = "none")]
        channel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Decrypt a ciphertext file; prints the message as hex.
    Decrypt {
        #[arg(long)]
        sk: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Group count and security bound for a parameter set.
    Params {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Group count and total qubits against group size.
    Sweep {
        #[arg(long, default_value_t = 8)]
        ell: usize,
        #[arg(long = "Q", default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = DEFAULT_TAG_BITS)]
        p: u32,
        #[arg(long)]
        c: u64,
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        /// Append the hardware-run comparison table.
        #[arg(long)]
        hardware: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Failure coefficients per δ, and optionally a Monte Carlo check.
    Errormodel {
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        /// Monte Carlo trials; 0 skips the simulation.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        /// Restrict the Monte Carlo run to one δ.
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value = "uniform")]
        paulis: String,
        #[command(flatten)]
        common: Common,
    },
    /// Play the indistinguishability game.
    Secgame {
        #[arg(long, default_value = "random_guess")]
        adversary: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "none")]
        channel: String,
        /// JSON-lines file receiving one record per trial.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a key-preparation or encryption circuit.
    EmitCircuit {
        /// `keyprep` or `encryption`.
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Group function by ANF index (keyprep).
        #[arg(long)]
        f_index: Option<u64>,
        #[arg(long)]
        delta: Option<usize>,
        #[arg(long, default_value = "qasm3")]
        circuit_format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Errors the command line distinguishes from library errors.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::DecryptionFailure(_)) => 3,
            CliError::Lib(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Lib(e) => match e {
                Error::Domain(_) => "domain",
                Error::InsecureRegime { .. } => "insecure_regime",
                Error::Encoding(_) => "encoding",
                Error::NotCanonical => "not_canonical",
                Error::State(_) => "state",
                Error::Channel(_) => "channel",
                Error::SpentPublicKey => "spent_public_key",
                Error::Length { .. } => "length",
                Error::Format(_) => "format",
                Error::Parse(_) => "parse",
                Error::DecryptionFailure(_) => "decryption_failure",
                Error::Fec(_) => "fec",
                Error::Budget(_) => "budget",
                Error::UnknownStrategy(_) => "unknown_strategy",
                Error::Io(_) => "io",
            },
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => format::write_atomic(path, text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    let mut s = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut s)?;
    } else {
        File::open(path)?.read_to_string(&mut s)?;
    }
    Ok(s)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> CliResult<T> {
    Ok(s.parse::<T>()?)
}

fn format_or(common: &Common, allowed: &[OutputFormat], default: OutputFormat) -> CliResult<OutputFormat> {
    let f = common.format.unwrap_or(default);
    if !allowed.contains(&f) {
        return Err(CliError::Usage(format!("--format {f:?} not supported by this command")));
    }
    Ok(f)
}

/// Runs one command line; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Keygen { lambda, test_mode, common } => {
            let key = match common.seed {
                Some(_) if !test_mode => {
                    return Err(CliError::Usage("keygen accepts --seed only with --test-mode".into()))
                }
                Some(seed) => crate::prf::sk_gen_seeded(lambda, seed)?,
                None => crate::prf::sk_gen(lambda)?,
            };
            emit(common.out.as_deref(), &key.to_file_string())
        }
        Command::Pkgen { sk, params, mode, channel, common } => {
            let key = SecretKey::parse(&read_text(&sk)?)?;
            let params = params.resolve(key.security_bits())?;
            let mode: KeyMode = parse(&mode)?;
            let channel: NoiseChannel = parse(&channel)?;
            let mut rng = rng_for(common.seed);
            let pk = pk_gen(&key, &params, &mut rng)?;
            match common.out.as_deref() {
                Some(path) => format::write_atomic_with(path, |w| format::write_public_key(w, &pk, mode, &channel))?,
                None => {
                    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
                    format::write_public_key(&mut out, &pk, mode, &channel)?;
                    out.flush()?;
                }
            }
            if !params.is_secure() {
                eprintln!("{}", json!({ "warning": "insecure", "N": params.groups }));
            }
            Ok(())
        }
        Command::Encrypt { pk, msg_hex, channel, common } => {
            let channel: NoiseChannel = parse(&channel)?;
            let reader = PkReader::open(BufReader::new(File::open(&pk)?))?;
            let header = reader.header.clone();
            let message = bits::from_hex(&msg_hex, header.params.message_bits)?;
            let mut rng = rng_for(common.seed);
            let enc = encrypt_groups(&header.params, header.tag.clone(), reader, &message, &channel, &mut rng)?;
            // The key is consumed: keep only the header, marked spent.
            let spent = format::PkHeader { spent: true, ..header };
            format::write_atomic(&pk, spent.to_text().as_bytes())?;
            let (used, budget) = enc.ciphertext.leakage();
            eprintln!(
                "{}",
                json!({ "syndrome_bits": used, "leakage_budget": budget, "secure": enc.ciphertext.secure })
            );
            emit(common.out.as_deref(), &enc.ciphertext.to_text())
        }
        Command::Decrypt { sk, ct, common } => {
            let key = SecretKey::parse(&read_text(&sk)?)?;
            let ct = Ciphertext::parse(&read_text(&ct)?)?;
            let m = decrypt(&key, &ct)?;
            emit(common.out.as_deref(), &format!("{}\n", bits::to_hex(&m)))
        }
        Command::Params { params, common } => {
            let p = params.resolve(DEFAULT_SECURITY_BITS)?;
            let required = p.required_groups()?;
            let text = match format_or(&common, &[OutputFormat::Text, OutputFormat::JsonLines], OutputFormat::Text)? {
                OutputFormat::JsonLines => format!(
                    "{}\n",
                    json!({
                        "ell": p.message_bits, "n": p.group_qubits, "Q": p.noise, "p": p.tag_bits, "c": p.max_keys,
                        "N": p.groups, "required_N": required, "total_qubits": p.groups as u64 * p.group_qubits as u64,
                        "security_bound": p.security_bound(), "secure": p.is_secure(),
                    })
                ),
                _ => format!(
                    "N={}\nrequired_N={}\ntotal_qubits={}\nsecurity_bound={:e}\nsecure={}\n",
                    p.groups,
                    required,
                    p.groups as u64 * p.group_qubits as u64,
                    p.security_bound(),
                    p.is_secure()
                ),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::Sweep { ell, noise, p, c, n_min, n_max, hardware, common } => {
            let sweep = params::tradeoff_sweep(ell, noise, p, c, n_min..=n_max)?;
            let mut text = match format_or(&common, &[OutputFormat::Csv, OutputFormat::JsonLines], OutputFormat::Csv)? {
                OutputFormat::JsonLines => sweep
                    .rows
                    .iter()
                    .map(|r| {
                        format!(
                            "{}\n",
                            json!({ "n": r.group_qubits, "N": r.groups, "total_qubits": r.total_qubits(), "secure": r.secure() })
                        )
                    })
                    .collect(),
                _ => sweep.to_csv(),
            };
            if hardware {
                text.push('\n');
                text.push_str(&params::hardware_report()?);
            }
            emit(common.out.as_deref(), &text)
        }
        Command::Errormodel { eps, rho, trials, delta, paulis, common } => {
            let paulis: PauliDistribution = parse(&paulis)?;
            let rows = errormodel::coefficient_table(paulis)?;
            let fmt = format_or(
                &common,
                &[OutputFormat::Csv, OutputFormat::JsonLines, OutputFormat::Text],
                OutputFormat::Csv,
            )?;
            let mut text = match fmt {
                OutputFormat::Csv => errormodel::table_emit(&rows),
                OutputFormat::Text => errormodel::comparison_report(&rows),
                OutputFormat::JsonLines => rows
                    .iter()
                    .map(|r| {
                        format!(
                            "{}\n",
                            json!({ "delta": r.delta, "a_eps": r.a_eps, "a_rho": r.a_rho, "gate_count": r.gate_count })
                        )
                    })
                    .collect(),
            };
            if trials > 0 {
                let model = FaultModel { paulis, ..FaultModel::new(eps, rho)? };
                let exact = match delta {
                    Some(d) => errormodel::exact_failure(d, &model)?,
                    None => errormodel::exact_failure_uniform(&model)?,
                };
                let mc = errormodel::monte_carlo_failure(delta, &model, trials, &mut rng_for(common.seed))?;
                let line = json!({
                    "eps": eps, "rho": rho, "delta": delta, "trials": trials, "failures": mc.failures,
                    "rate": mc.rate(), "sigma": mc.sigma(), "exact": exact,
                });
                match fmt {
                    OutputFormat::JsonLines => text.push_str(&format!("{line}\n")),
                    _ => eprintln!("{line}"),
                }
            }
            emit(common.out.as_deref(), &text)
        }
        Command::Secgame { adversary, trials, params, channel, log, common } => {
            let config = GameConfig {
                params: params.resolve(DEFAULT_SECURITY_BITS)?,
                channel: parse(&channel)?,
                trials,
                adversary,
            };
            let mut rng = rng_for(common.seed);
            let mut records = String::new();
            let result = secgame::run_game_logged(&config, &mut rng, |r| {
                records.push_str(&r.to_json());
                records.push('\n');
                Ok(())
            })?;
            if let Some(path) = log {
                format::write_atomic(&path, records.as_bytes())?;
            }
            let summary = json!({
                "adversary": config.adversary, "wins": result.wins, "trials": result.trials,
                "win_rate": result.win_rate, "sigma": result.sigma, "bound": result.bound,
                "secure": config.params.is_secure(),
            });
            let text = match format_or(&common, &[OutputFormat::Text, OutputFormat::JsonLines], OutputFormat::Text)? {
                OutputFormat::JsonLines => format!("{summary}\n"),
                _ => format!(
                    "adversary={}\nwins={}/{}\nwin_rate={:.4}\nsigma={:.4}\nbound={}\n",
                    config.adversary, result.wins, result.trials, result.win_rate, result.sigma, result.bound
                ),
            };
            emit(common.out.as_deref(), &text)
        }
        Command::EmitCircuit { target, n, f_index, delta, circuit_format, out } => {
            let fmt: CircuitFormat = parse(&circuit_format)?;
            let circuit = match target.as_str() {
                "keyprep" => {
                    let idx = f_index.ok_or_else(|| CliError::Usage("keyprep needs --f-index".into()))?;
                    if n > 6 || idx >> ((1u32 << n) - 1) != 0 {
                        return Err(Error::Domain(format!("f index {idx} out of range for n = {n}")).into());
                    }
                    Circuit::keyprep(&GroupFunction::from_index(n, idx))
                }
                "encryption" => {
                    let d = delta.ok_or_else(|| CliError::Usage("encryption needs --delta".into()))?;
                    Circuit::encryption(&Permutation::canonical(n, d)?)
                }
                other => return Err(CliError::Usage(format!("unknown target {other:?}"))),
            };
            emit(out.as_deref(), &circuit.emit(fmt)?)
        }
    }
}

/// File magic lines, for `--version` and documentation.
pub const FORMAT_VERSIONS: [&str; 3] = [SK_MAGIC, PK_MAGIC, CT_MAGIC];
