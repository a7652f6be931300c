//! Config-file handling plus the two mini-formats: probe specs and pointer
//! observable specs. Precedence everywhere is flags over file over defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use orthoweak_core::probe::{gaussian_probe, grid_probe, PointerOperator, ProbeState};
use orthoweak_core::Complex;

use crate::CliError;

/// Parsed `key=value` file. Keys are normalized so `beta_min` and
/// `beta-min` name the same entry.
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl FileConfig {
    pub fn empty() -> FileConfig {
        FileConfig { entries: BTreeMap::new() }
    }

    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::empty());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Invalid(format!(
                    "config line {}: expected key=value, got {raw:?}",
                    idx + 1
                )));
            };
            entries.insert(normalize(key), value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    /// Typo guard: a key the command would silently ignore is an error.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<(), CliError> {
        for key in self.entries.keys() {
            if !known.iter().any(|k| normalize(k) == *key) {
                return Err(CliError::Invalid(format!(
                    "config key {key:?} is not used by this command"
                )));
            }
        }
        Ok(())
    }
}

pub fn resolve<T: FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    Ok(resolve_opt(flag, file, key)?.unwrap_or(default))
}

pub fn resolve_opt<T: FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
) -> Result<Option<T>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(text) => text
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Invalid(format!("config key {key}: cannot parse {text:?}"))),
        None => Ok(None),
    }
}

pub const DEFAULT_PROBE: &str = "gaussian:mean=0,sigma=1,kick=0";

/// `gaussian[:mean=..,sigma=..,kick=..]` or `file:path.csv`.
pub fn parse_probe(spec: &str) -> Result<ProbeState, CliError> {
    if let Some(path) = spec.strip_prefix("file:") {
        return load_probe_csv(Path::new(path));
    }
    let body = if spec == "gaussian" {
        ""
    } else {
        spec.strip_prefix("gaussian:").ok_or_else(|| {
            CliError::Invalid(format!(
                "probe spec {spec:?}: expected gaussian:mean=..,sigma=..,kick=.. or file:path.csv"
            ))
        })?
    };
    let (mut mean, mut sigma, mut kick) = (0.0, 1.0, 0.0);
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let Some((key, value)) = part.split_once('=') else {
            return Err(CliError::Invalid(format!("probe spec field {part:?}: expected key=value")));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("probe spec field {part:?}: bad number")))?;
        match key.trim() {
            "mean" => mean = value,
            "sigma" => sigma = value,
            "kick" => kick = value,
            other => {
                return Err(CliError::Invalid(format!("probe spec key {other:?} is not recognized")))
            }
        }
    }
    Ok(gaussian_probe(mean, sigma, kick)?)
}

fn parse_float(field: &str, context: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse()
        .map_err(|_| CliError::Invalid(format!("{context}: bad number {field:?}")))
}

/// Uniform complex samples, header `q,re,im`.
fn load_probe_csv(path: &Path) -> Result<ProbeState, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path.display();
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Invalid(format!("{name}: empty probe file")))?;
    if header.1.trim() != "q,re,im" {
        return Err(CliError::Invalid(format!("{name}: header must be q,re,im")));
    }
    let mut qs = Vec::new();
    let mut samples = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ctx = format!("{name} line {}", idx + 1);
        let (Some(q), Some(re), Some(im), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(CliError::Invalid(format!("{ctx}: expected exactly q,re,im")));
        };
        qs.push(parse_float(q, &ctx)?);
        samples.push(Complex::new(parse_float(re, &ctx)?, parse_float(im, &ctx)?));
    }
    let (q0, h) = uniform_axis(&qs).map_err(|msg| CliError::Invalid(format!("{name}: {msg}")))?;
    Ok(grid_probe(q0, q0 + qs.len() as f64 * h, samples)?)
}

/// Check the q column is an arithmetic progression; return (start, step).
fn uniform_axis(qs: &[f64]) -> Result<(f64, f64), String> {
    if qs.len() < 2 {
        return Err("need at least two rows".to_string());
    }
    let q0 = qs[0];
    let h = qs[1] - q0;
    if !(h.is_finite() && h > 0.0) {
        return Err("q must be strictly increasing".to_string());
    }
    for (i, &q) in qs.iter().enumerate() {
        let want = q0 + i as f64 * h;
        if (q - want).abs() > 1e-9 * (1.0 + q.abs()) {
            return Err(format!("q is not uniformly spaced near row {}", i + 2));
        }
    }
    Ok((q0, h))
}

/// What the pointer readout measures.
pub enum ObservableSpec {
    Position,
    Momentum,
    /// Tabulated f(q); carries its own grid, header `q,f`.
    File { qs: Vec<f64>, values: Vec<f64> },
}

impl ObservableSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ObservableSpec::Position => "q",
            ObservableSpec::Momentum => "p",
            ObservableSpec::File { .. } => "file",
        }
    }
}

pub fn parse_observable(spec: &str) -> Result<ObservableSpec, CliError> {
    match spec {
        "q" => Ok(ObservableSpec::Position),
        "p" => Ok(ObservableSpec::Momentum),
        other => {
            let Some(path) = other.strip_prefix("file:") else {
                return Err(CliError::Invalid(format!(
                    "observable {other:?}: expected q, p, or file:path.csv"
                )));
            };
            load_observable_csv(Path::new(path))
        }
    }
}

fn load_observable_csv(path: &Path) -> Result<ObservableSpec, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let name = path.display();
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Invalid(format!("{name}: empty observable file")))?;
    if header.1.trim() != "q,f" {
        return Err(CliError::Invalid(format!("{name}: header must be q,f")));
    }
    let mut qs = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let ctx = format!("{name} line {}", idx + 1);
        let (Some(q), Some(f), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(CliError::Invalid(format!("{ctx}: expected exactly q,f")));
        };
        qs.push(parse_float(q, &ctx)?);
        values.push(parse_float(f, &ctx)?);
    }
    uniform_axis(&qs).map_err(|msg| CliError::Invalid(format!("{name}: {msg}")))?;
    Ok(ObservableSpec::File { qs, values })
}

/// Pair a probe with the pointer operator. A tabulated observable carries
/// the grid: an analytic probe is rasterized onto it, a grid probe must
/// already live on it.
pub fn bind_observable(
    spec: &ObservableSpec,
    probe: ProbeState,
) -> Result<(ProbeState, PointerOperator), CliError> {
    match spec {
        ObservableSpec::Position => Ok((probe, PointerOperator::Position)),
        ObservableSpec::Momentum => Ok((probe, PointerOperator::Momentum)),
        ObservableSpec::File { qs, values } => {
            let (q0, h) = uniform_axis(qs).map_err(CliError::Invalid)?;
            let n = qs.len();
            let probe = match probe.grid() {
                None => probe.rasterize(q0, q0 + n as f64 * h, n)?,
                Some(grid) => {
                    let same = grid.n() == n
                        && (grid.q_min() - q0).abs() <= 1e-9 * (1.0 + q0.abs())
                        && (grid.spacing() - h).abs() <= 1e-12 * (1.0 + h.abs());
                    if !same {
                        return Err(CliError::Invalid(
                            "observable grid does not match the probe grid".to_string(),
                        ));
                    }
                    probe
                }
            };
            Ok((probe, PointerOperator::MultiplicationBy(values.clone())))
        }
    }
}
