use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use degradekit::distortions::{Distorter, LadderTable, WaveletCodec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const LADDER_ENV: &str = "DEGRADEKIT_LADDER";

#[derive(Debug)]
pub enum Failure {
    /// Bad flags, config or inputs; exit code 2.
    Usage(String),
    /// Work was attempted and something failed; exit code 1.
    Run(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Run(m) => f.write_str(m),
        }
    }
}

impl From<degradekit::Error> for Failure {
    fn from(e: degradekit::Error) -> Self {
        use degradekit::Error as E;
        match e {
            E::InvalidArgument(_) | E::InvalidConfiguration(_) | E::Ladder(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Completion {
    Clean,
    Partial,
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn run_err(msg: impl Into<String>) -> Failure {
    Failure::Run(msg.into())
}

/// Reads a JSON config file into `T`, or returns `T::default()`.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Logs the fully resolved config as a single JSON line on stderr.
pub fn echo_config<T: Serialize>(command: &str, config: &T) {
    let json = serde_json::to_string(config).expect("config serializes");
    eprintln!("degradekit {command}: resolved config {json}");
}

pub fn warn(msg: impl fmt::Display) {
    eprintln!("degradekit: warning: {msg}");
}

/// Runs `f` on a pool of `workers` threads, or rayon's default size.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| run_err(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum J2kAdapter {
    /// Built-in wavelet codec standing in for JPEG2000.
    #[default]
    Wavelet,
    /// No adapter; jpeg2000 steps are unsupported.
    None,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistorterSettings {
    /// Ladder override file; falls back to the environment variable, then the
    /// embedded default.
    pub ladder: Option<PathBuf>,
    pub j2k_adapter: J2kAdapter,
}

impl DistorterSettings {
    /// Fills `ladder` from the environment when unset, so the echoed config
    /// names the file actually used.
    pub fn resolve_env(&mut self) {
        if self.ladder.is_none() {
            if let Some(p) = std::env::var_os(LADDER_ENV).filter(|p| !p.is_empty()) {
                self.ladder = Some(PathBuf::from(p));
            }
        }
    }

    pub fn ladders(&self) -> CliResult<LadderTable> {
        match &self.ladder {
            Some(path) => Ok(LadderTable::load(path)?),
            None => Ok(LadderTable::default()),
        }
    }

    pub fn build(&self) -> CliResult<Distorter> {
        let d = Distorter::new(self.ladders()?);
        Ok(match self.j2k_adapter {
            J2kAdapter::Wavelet => d.with_jpeg2000(Arc::new(WaveletCodec::default())),
            J2kAdapter::None => d,
        })
    }
}

pub fn create_file(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| run_err(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| run_err(format!("{}: {e}", path.display())))
}

/// Writes pretty JSON plus a newline to `path`, or to stdout when `None`.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(p) => {
            let mut w = create_file(p)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| run_err(format!("{}: {e}", p.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Resolves `path` against `base` unless it is absolute.
pub fn resolve_path(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
