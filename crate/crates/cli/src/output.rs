use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "S3LAB_OUT_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
    /// Files written next to the manifest, in write order.
    pub outputs: Vec<String>,
}

/// Scalar rendering shared by every CSV file: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One run's output directory; files are tracked so the manifest can list them.
pub struct RunDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    pub fn create(out: Option<&Path>, subcommand: &str) -> Result<Self> {
        let dir = match out {
            Some(p) => p.to_path_buf(),
            None => {
                let root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| "s3lab-out".into());
                root.join(subcommand)
            }
        };
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, outputs: Vec::new() })
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn finish(self, subcommand: &str, params: Value, seed: Option<u64>) -> Result<PathBuf> {
        let manifest = RunManifest {
            subcommand: subcommand.into(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: self.outputs,
        };
        let path = self.dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(self.dir)
    }
}
