//! Artifact writers: the diagnostics CSV, JSON summaries, and the
//! manifest that checksums everything written.
//!
//! Float formatting goes through Rust's shortest round-trip `Display`,
//! so identical runs produce identical bytes. The manifest's timestamp
//! is the only field allowed to differ between reruns.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use gevlab_core::diagnostics::DiagnosticsRecord;

use crate::fail::Failure;

pub const CSV_HEADER: &str =
    "t,energy,enstrophy,l2,l4,l8,linf,gevrey_half,la,r2,accepted,budget_residual";

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(x) = v {
        out.push_str(&x.to_string());
    }
}

/// One row per sample in the pinned column order; absent values are
/// empty cells.
pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.t.to_string());
        for v in [r.energy, r.enstrophy, r.l2, r.l4, r.l8, r.linf] {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push(',');
        push_opt(&mut out, r.gevrey_half);
        out.push(',');
        push_opt(&mut out, r.radius.as_ref().map(|e| e.l_a));
        out.push(',');
        push_opt(&mut out, r.radius.as_ref().map(|e| e.r2));
        out.push(',');
        if let Some(est) = &r.radius {
            out.push_str(if est.accepted { "true" } else { "false" });
        }
        out.push(',');
        push_opt(&mut out, r.budget_residual);
        out.push('\n');
    }
    out
}

/// (elapsed, relative difference) series of a synchronization probe.
pub fn sync_series_csv(series: &[(f64, f64)]) -> String {
    let mut out = String::from("t,e\n");
    for &(t, e) in series {
        out.push_str(&t.to_string());
        out.push(',');
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}

/// Shell-spectrum file for the radius subcommand: `kappa,S` rows with
/// an optional header; missing shells default to zero.
pub fn spectrum_from_csv(text: &str) -> Result<Vec<f64>, Failure> {
    let mut pairs: Vec<(usize, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (a, b) = line.split_once(',').ok_or_else(|| {
            Failure::Config(format!("spectrum line {}: expected 'kappa,S'", i + 1))
        })?;
        let a = a.trim();
        let b = b.trim();
        if i == 0 && a.parse::<usize>().is_err() {
            continue; // header row
        }
        let kappa = a.parse::<usize>().map_err(|_| {
            Failure::Config(format!("spectrum line {}: '{a}' is not a shell index", i + 1))
        })?;
        let s = b.parse::<f64>().map_err(|_| {
            Failure::Config(format!("spectrum line {}: '{b}' is not a number", i + 1))
        })?;
        pairs.push((kappa, s));
    }
    if pairs.is_empty() {
        return Err(Failure::Config("spectrum file holds no data rows".to_string()));
    }
    let len = pairs.iter().map(|&(k, _)| k).max().unwrap_or(0) + 1;
    let mut spectrum = vec![0.0; len];
    for (k, s) in pairs {
        spectrum[k] = s;
    }
    Ok(spectrum)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Collects artifacts under one output directory and finishes with a
/// manifest.json listing each file's checksum.
pub struct Manifest {
    dir: PathBuf,
    config_path: String,
    resolved: BTreeMap<String, String>,
    artifacts: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(
        dir: &Path,
        config_path: &Path,
        resolved: BTreeMap<String, String>,
    ) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        Ok(Manifest {
            dir: dir.to_path_buf(),
            config_path: config_path.display().to_string(),
            resolved,
            artifacts: BTreeMap::new(),
        })
    }

    /// Write a file under the output directory (creating subdirectories
    /// as needed) and record its checksum under the relative name.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Failure::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Failure::io(&path, e))?;
        self.artifacts.insert(rel.to_string(), format!("sha256:{}", sha256_hex(bytes)));
        Ok(path)
    }

    pub fn finish(self) -> Result<(), Failure> {
        let unix_time = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let body = serde_json::json!({
            "config_path": self.config_path,
            "out_dir": self.dir.display().to_string(),
            "unix_time": unix_time,
            "config": self.resolved,
            "artifacts": self.artifacts,
        });
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&body).expect("manifest is plain data");
        text.push('\n');
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))
    }
}
