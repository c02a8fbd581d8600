//! Flat key = value run configuration with [section] headers. Paths are
//! resolved against the config file's directory; seeds are mandatory so no
//! code path falls back to wall-clock randomness.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Directory the config file lives in; relative paths resolve here.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub pgn: Option<PathBuf>,
    pub checkpoints: Vec<PathBuf>,
    pub layers: Vec<usize>,
    pub corpus_seed: u64,
    pub corpus_size: usize,
    pub concept_names: Vec<String>,
    pub probe_concept: String,
    pub probe_kind: String,
    pub lambdas: Vec<f64>,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub percentile: f64,
    pub nmf_layer: usize,
    pub nmf_factors: usize,
    pub nmf_seed: u64,
    pub cov_layer: usize,
    pub cov_row: usize,
    pub cov_col: usize,
    pub cov_channel: usize,
}

fn data(msg: impl Into<String>) -> CliError {
    CliError::Data(msg.into())
}

/// Raw `[section] key = value` map keyed by "section.key".
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut pairs = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| data(format!("config line {}: expected key = value", lineno + 1)))?;
        pairs.insert(
            format!("{section}.{}", key.trim()),
            value.trim().to_string(),
        );
    }
    Ok(pairs)
}

struct Pairs(BTreeMap<String, String>);

impl Pairs {
    fn req(&self, key: &str) -> Result<&str, CliError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| data(format!("config is missing required key {key}")))
    }

    fn opt(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.req(key)?
            .parse()
            .map_err(|_| data(format!("config key {key} has a non-numeric value")))
    }

    fn list(&self, key: &str) -> Result<Vec<String>, CliError> {
        Ok(self
            .req(key)?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

/// Loads, parses, and validates a config file. Referenced input files must
/// exist; the output directory need not (commands create it).
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| data(format!("cannot read config {}: {e}", path.display())))?;
    let base_dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let pairs = Pairs(parse_pairs(&text)?);

    let pgn = pairs.opt("corpus.pgn").map(|v| resolve(&base_dir, v));
    if let Some(p) = &pgn {
        if !p.is_file() {
            return Err(data(format!("corpus.pgn file {} does not exist", p.display())));
        }
    }
    let checkpoints: Vec<PathBuf> = pairs
        .list("network.checkpoints")?
        .iter()
        .map(|v| resolve(&base_dir, v))
        .collect();
    if checkpoints.is_empty() {
        return Err(data("network.checkpoints lists no files"));
    }
    for p in &checkpoints {
        if !p.is_file() {
            return Err(data(format!("checkpoint file {} does not exist", p.display())));
        }
    }
    let layers = pairs
        .list("network.layers")?
        .iter()
        .map(|v| v.parse().map_err(|_| data(format!("bad layer index {v}"))))
        .collect::<Result<Vec<usize>, CliError>>()?;
    if layers.is_empty() {
        return Err(data("network.layers lists no layers"));
    }
    let lambdas = pairs
        .list("probe.lambdas")?
        .iter()
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x > 0.0)
                .ok_or_else(|| data(format!("bad lambda {v}")))
        })
        .collect::<Result<Vec<f64>, CliError>>()?;

    let cfg = RunConfig {
        out_dir: resolve(&base_dir, pairs.req("paths.out")?),
        pgn,
        corpus_seed: pairs.num("corpus.seed")?,
        corpus_size: pairs.num("corpus.size")?,
        concept_names: pairs.opt("concepts.names").map_or(Vec::new(), |v| {
            v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
        }),
        probe_concept: pairs.req("probe.concept")?.to_string(),
        probe_kind: pairs.req("probe.kind")?.to_string(),
        lambdas,
        train: pairs.num("probe.train")?,
        val: pairs.num("probe.val")?,
        test: pairs.num("probe.test")?,
        percentile: pairs.num("probe.percentile")?,
        nmf_layer: pairs.num("nmf.layer")?,
        nmf_factors: pairs.num("nmf.factors")?,
        nmf_seed: pairs.num("nmf.seed")?,
        cov_layer: pairs.num("cov.layer")?,
        cov_row: pairs.num("cov.row")?,
        cov_col: pairs.num("cov.col")?,
        cov_channel: pairs.num("cov.channel")?,
        checkpoints,
        layers,
        base_dir,
    };
    if cfg.corpus_size == 0 {
        return Err(data("corpus.size must be positive"));
    }
    if cfg.train + cfg.val + cfg.test > cfg.corpus_size {
        return Err(data(format!(
            "probe splits {}+{}+{} exceed corpus.size {}",
            cfg.train, cfg.val, cfg.test, cfg.corpus_size
        )));
    }
    if cfg.train == 0 || cfg.val == 0 || cfg.test == 0 {
        return Err(data("probe split sizes must all be positive"));
    }
    match cfg.probe_kind.as_str() {
        "continuous" | "binary" => {}
        other => return Err(data(format!("probe.kind must be continuous or binary, got {other}"))),
    }
    Ok(cfg)
}
