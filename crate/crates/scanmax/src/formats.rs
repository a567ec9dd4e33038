//! On-disk formats: TOML manifests, JSON output records and CSV files.
//!
//! Floats are written in Rust's shortest round-tripping form, so every
//! value reloads bit-for-bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::harness::{
    EmpiricalDistribution, EnsembleConfig, ReplicationRecord, ScanEngine, Statistic,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Experiment description read by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub ensemble: EnsembleSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// MAIN_DISCRETE, ERDOS_RENYI, DARLING_ERDOS or BROWNIAN.
    pub statistic: String,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oversample: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<ScanEngine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    /// Fail the run if the KS distance to Gumbel exceeds this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

pub fn parse_statistic(tag: &str, c: Option<f64>, oversample: Option<usize>) -> Result<Statistic> {
    let norm = tag.trim().to_ascii_uppercase().replace('-', "_");
    let need = |what: &str| Error::Manifest(format!("statistic {norm} needs `{what}`"));
    Ok(match norm.as_str() {
        "MAIN_DISCRETE" | "MAIN" => Statistic::MainDiscrete,
        "ERDOS_RENYI" => Statistic::ErdosRenyi {
            c: c.ok_or_else(|| need("c"))?,
        },
        "DARLING_ERDOS" => Statistic::DarlingErdos,
        "BROWNIAN" => Statistic::Brownian {
            oversample: oversample.ok_or_else(|| need("oversample"))?,
        },
        _ => return Err(Error::Manifest(format!("unknown statistic `{tag}`"))),
    })
}

impl ExperimentManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.ensemble_config()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Manifest(m) => Error::Manifest(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn ensemble_config(&self) -> Result<EnsembleConfig> {
        let e = &self.ensemble;
        let statistic = parse_statistic(&e.statistic, e.c, e.oversample)?;
        let mut cfg = EnsembleConfig::new(statistic, e.n, e.replications, e.master_seed);
        cfg.engine = e.engine.unwrap_or_default();
        Ok(cfg)
    }

    /// SHA-256 over the canonical JSON form of every field.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("manifest serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub command: String,
    pub master_seed: Option<u64>,
    pub manifest_hash: Option<String>,
    pub wall_time_s: f64,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            master_seed: None,
            manifest_hash: None,
            wall_time_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord<T> {
    pub metadata: Metadata,
    pub payload: T,
}

impl<T: Serialize + DeserializeOwned> OutputRecord<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<json>"),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Samples file content: `# key: value` metadata lines, a header, one row
/// per replication in replication order.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplesFile {
    pub metadata: Metadata,
    pub statistic: String,
    pub n: usize,
    pub a_n: f64,
    pub b_n: f64,
    pub records: Vec<ReplicationRecord>,
}

const SAMPLES_HEADER: &str = "replication,raw_value,standardized_value";

impl SamplesFile {
    pub fn from_distribution(metadata: Metadata, emp: &EmpiricalDistribution) -> Self {
        Self {
            metadata,
            statistic: emp.statistic.tag().to_string(),
            n: emp.n,
            a_n: emp.normalization.a_n,
            b_n: emp.normalization.b_n,
            records: emp.records.clone(),
        }
    }

    pub fn standardized_sorted(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.records.iter().map(|r| r.standardized_value).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// The part of the file that excludes run metadata.
    pub fn payload_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{SAMPLES_HEADER}").unwrap();
        for r in &self.records {
            writeln!(
                out,
                "{},{:?},{:?}",
                r.replication, r.raw_value, r.standardized_value
            )
            .unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "# {k}: {v}").unwrap();
        kv("tool_version", m.tool_version.clone());
        kv("command", m.command.clone());
        kv(
            "master_seed",
            m.master_seed.map(|s| s.to_string()).unwrap_or_default(),
        );
        kv("manifest_hash", m.manifest_hash.clone().unwrap_or_default());
        kv("wall_time_s", format!("{:?}", m.wall_time_s));
        kv("statistic", self.statistic.clone());
        kv("n", self.n.to_string());
        kv("a_n", format!("{:?}", self.a_n));
        kv("b_n", format!("{:?}", self.b_n));
        out + &self.payload_csv()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut meta = std::collections::HashMap::new();
        let mut body_start = None;
        for (k, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix('#') {
                let (key, val) = rest
                    .split_once(':')
                    .ok_or_else(|| perr(k + 1, "metadata line needs `key: value`".into()))?;
                meta.insert(key.trim().to_string(), (k + 1, val.trim().to_string()));
            } else {
                body_start = Some(k);
                break;
            }
        }
        let get = |key: &str| meta.get(key).map(|(l, v)| (*l, v.as_str()));
        fn num<T: std::str::FromStr>(
            v: Option<(usize, &str)>,
            key: &str,
            path: &Path,
        ) -> Result<Option<T>> {
            match v {
                None | Some((_, "")) => Ok(None),
                Some((line, s)) => s.parse().map(Some).map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("bad value `{s}` for `{key}`"),
                }),
            }
        }
        let metadata = Metadata {
            tool_version: get("tool_version")
                .map(|(_, v)| v.to_string())
                .unwrap_or_default(),
            command: get("command")
                .map(|(_, v)| v.to_string())
                .unwrap_or_default(),
            master_seed: num(get("master_seed"), "master_seed", path)?,
            manifest_hash: get("manifest_hash")
                .map(|(_, v)| v.to_string())
                .filter(|v| !v.is_empty()),
            wall_time_s: num(get("wall_time_s"), "wall_time_s", path)?.unwrap_or(0.0),
        };
        let statistic = get("statistic")
            .map(|(_, v)| v.to_string())
            .unwrap_or_default();
        let n = num(get("n"), "n", path)?.unwrap_or(0);
        let a_n = num(get("a_n"), "a_n", path)?.unwrap_or(f64::NAN);
        let b_n = num(get("b_n"), "b_n", path)?.unwrap_or(f64::NAN);

        let offset = body_start.unwrap_or(text.lines().count());
        let body: String = text
            .lines()
            .skip(offset)
            .map(|l| format!("{l}\n"))
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(body.as_bytes());
        let header_line = offset + 1;
        let headers = rdr
            .headers()
            .map_err(|e| perr(header_line, e.to_string()))?
            .clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>()
            != SAMPLES_HEADER.split(',').collect::<Vec<_>>()
        {
            return Err(perr(
                header_line,
                format!("expected header `{SAMPLES_HEADER}`"),
            ));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| perr(csv_line(&e, offset), e.to_string()))?;
            let line = rec
                .position()
                .map(|p| p.line() as usize + offset)
                .unwrap_or(0);
            let cell = |i: usize| rec.get(i).unwrap().trim();
            let bad = |i: usize| perr(line, format!("non-numeric cell `{}`", cell(i)));
            records.push(ReplicationRecord {
                replication: cell(0).parse().map_err(|_| bad(0))?,
                raw_value: cell(1).parse().map_err(|_| bad(1))?,
                standardized_value: cell(2).parse().map_err(|_| bad(2))?,
            });
        }
        if records.is_empty() {
            return Err(perr(header_line, "no sample rows".into()));
        }
        Ok(Self {
            metadata,
            statistic,
            n,
            a_n,
            b_n,
            records,
        })
    }
}

fn csv_line(e: &csv::Error, offset: usize) -> usize {
    match e.kind() {
        csv::ErrorKind::UnequalLengths { pos: Some(p), .. } => p.line() as usize + offset,
        _ => e
            .position()
            .map(|p| p.line() as usize + offset)
            .unwrap_or(0),
    }
}

/// One increment per line. A first line that does not parse as a number is
/// taken as a header; blank lines are skipped.
pub fn parse_increments(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.contains(',') {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: k + 1,
                message: "expected one value per line".into(),
            });
        }
        match line.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() && k == first_nonblank(text) => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: k + 1,
                    message: format!("non-numeric cell `{line}`"),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no increments".into(),
        });
    }
    Ok(out)
}

fn first_nonblank(text: &str) -> usize {
    text.lines().position(|l| !l.trim().is_empty()).unwrap_or(0)
}

pub fn read_increments(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_increments(&text, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
