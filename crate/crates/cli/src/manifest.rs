use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

pub const TOOL: &str = "vdbcode";

pub fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// Everything needed to re-run one invocation and check its outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub cwd: PathBuf,
    pub params: Value,
    pub seed: Option<u64>,
    pub inputs: Vec<(PathBuf, String)>,
    pub outputs: Vec<(PathBuf, String)>,
    pub exit_code: u8,
}

fn digest_list(files: &[(PathBuf, String)]) -> Value {
    files
        .iter()
        .map(|(p, d)| json!({ "path": p.display().to_string(), "sha256": d }))
        .collect()
}

fn parse_digest_list(v: &Value) -> Result<Vec<(PathBuf, String)>, Failure> {
    v.as_array()
        .ok_or_else(|| Failure::Usage("manifest file list is not an array".into()))?
        .iter()
        .map(|e| match (e["path"].as_str(), e["sha256"].as_str()) {
            (Some(p), Some(d)) => Ok((PathBuf::from(p), d.to_string())),
            _ => Err(Failure::Usage(
                "manifest file entry lacks path or sha256".into(),
            )),
        })
        .collect()
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let v = json!({
            "tool": TOOL,
            "version": env!("CARGO_PKG_VERSION"),
            "formats": crate::formats(),
            "subcommand": self.subcommand,
            "argv": self.argv,
            "cwd": self.cwd.display().to_string(),
            "params": self.params,
            "seed": self.seed,
            "inputs": digest_list(&self.inputs),
            "outputs": digest_list(&self.outputs),
            "exit_code": self.exit_code,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let v: Value = serde_json::from_str(text)
            .map_err(|e| Failure::Usage(format!("manifest is not valid JSON: {e}")))?;
        if v["tool"] != TOOL {
            return Err(Failure::Usage("not a vdbcode manifest".into()));
        }
        if v["version"] != env!("CARGO_PKG_VERSION") {
            return Err(Failure::Mismatch(format!(
                "manifest written by version {}, this is {}",
                v["version"],
                env!("CARGO_PKG_VERSION")
            )));
        }
        let argv = v["argv"]
            .as_array()
            .and_then(|a| {
                a.iter()
                    .map(|s| s.as_str().map(String::from))
                    .collect::<Option<Vec<_>>>()
            })
            .ok_or_else(|| Failure::Usage("manifest argv missing".into()))?;
        Ok(Self {
            subcommand: v["subcommand"].as_str().unwrap_or_default().to_string(),
            argv,
            cwd: PathBuf::from(v["cwd"].as_str().unwrap_or(".")),
            params: v["params"].clone(),
            seed: v["seed"].as_u64(),
            inputs: parse_digest_list(&v["inputs"])?,
            outputs: parse_digest_list(&v["outputs"])?,
            exit_code: v["exit_code"]
                .as_u64()
                .and_then(|c| u8::try_from(c).ok())
                .ok_or_else(|| Failure::Usage("manifest exit_code missing".into()))?,
        })
    }
}
