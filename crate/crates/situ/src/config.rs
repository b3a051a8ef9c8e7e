//! Pipeline settings: defaults, then the config file, then flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use situ_core::harness::NoiseSpec;

use crate::error::{Error, Result};
use crate::io::read_json;

pub const SEED_ENV: &str = "SITU_SEED";
pub const DEFAULT_SEED: u64 = 2022;

/// Config file contents. Every field is optional; relative paths are taken
/// relative to the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub vocab: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub min_compositions: Option<usize>,
    pub ratios: Option<[f64; 3]>,
    pub noise: Option<NoiseFile>,
    pub workers: Option<usize>,
    pub frequent: Option<bool>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseFile {
    pub object: Option<f64>,
    pub relation: Option<f64>,
    pub action: Option<f64>,
}

/// Values given on the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub vocab: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tolerance: Option<f64>,
    pub ratios: Option<[f64; 3]>,
    pub noise_obj: Option<f64>,
    pub noise_rel: Option<f64>,
    pub noise_act: Option<f64>,
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineConfig {
    /// `None` selects the bundled vocabulary.
    pub vocab: Option<PathBuf>,
    /// `None` selects the bundled template library.
    pub templates: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tolerance: f64,
    pub min_compositions: usize,
    pub ratios: [f64; 3],
    pub noise: NoiseSpec,
    pub workers: usize,
    pub frequent: bool,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn rebase(base: &Path, p: Option<PathBuf>) -> Option<PathBuf> {
    p.map(|p| if p.is_relative() { base.join(p) } else { p })
}

/// `"6,1,1"` or `"6:1:1"`.
pub fn parse_ratios(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split([',', ':'])
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three ratios, got {}", p.len()))
}

impl PipelineConfig {
    /// Flags win over the config file, the config file over `SITU_SEED`,
    /// and that over built-in defaults.
    pub fn resolve(o: Overrides, env_seed: Option<&str>) -> Result<Self> {
        let (file, base) = match &o.config {
            Some(path) => {
                let f: ConfigFile = read_json(path)?;
                (f, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let env_seed = env_seed
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Usage(format!("{SEED_ENV}=`{s}`: {e}")))
            })
            .transpose()?;
        let noise_file = file.noise.unwrap_or_default();
        let seed = o.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED);
        let cfg = PipelineConfig {
            vocab: o.vocab.or(rebase(&base, file.vocab)),
            templates: o.templates.or(rebase(&base, file.templates)),
            rules: rebase(&base, file.rules),
            input: o.input.or(rebase(&base, file.input)),
            out: o.out.or(rebase(&base, file.out)),
            seed,
            tolerance: o.tolerance.or(file.tolerance).unwrap_or(0.05),
            min_compositions: file.min_compositions.unwrap_or(2),
            ratios: o.ratios.or(file.ratios).unwrap_or([6.0, 1.0, 1.0]),
            noise: NoiseSpec {
                p_drop_object: o.noise_obj.or(noise_file.object).unwrap_or(0.0),
                p_drop_relation: o.noise_rel.or(noise_file.relation).unwrap_or(0.0),
                p_drop_action: o.noise_act.or(noise_file.action).unwrap_or(0.0),
                seed,
            },
            workers: o.workers.or(file.workers).unwrap_or_else(default_workers).max(1),
            frequent: file.frequent.unwrap_or(true),
        };
        cfg.noise.check()?;
        for p in [&cfg.vocab, &cfg.templates, &cfg.rules].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::Usage(format!("{}: no such file", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::Usage("missing input path (--in)".into()))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::Usage("missing output path (--out)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(parse_ratios("6,1,1"), Ok([6.0, 1.0, 1.0]));
        assert_eq!(parse_ratios("0.75:0.125:0.125"), Ok([0.75, 0.125, 0.125]));
        assert!(parse_ratios("1,2").is_err());
        assert!(parse_ratios("a,b,c").is_err());
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"seed": 5, "out": "o", "noise": {"object": 0.2}}"#).unwrap();
        let o = Overrides {
            config: Some(path.clone()),
            ..Overrides::default()
        };
        let cfg = PipelineConfig::resolve(o.clone(), Some("9")).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.out, Some(dir.path().join("o")));
        assert_eq!(cfg.noise.p_drop_object, 0.2);
        let flagged = Overrides {
            seed: Some(7),
            ..o
        };
        assert_eq!(PipelineConfig::resolve(flagged, Some("9")).unwrap().seed, 7);
        assert_eq!(PipelineConfig::resolve(Overrides::default(), Some("9")).unwrap().seed, 9);
        assert_eq!(PipelineConfig::resolve(Overrides::default(), None).unwrap().seed, DEFAULT_SEED);
        assert!(PipelineConfig::resolve(Overrides::default(), Some("x")).is_err());
    }

    #[test]
    fn missing_files_fail_early() {
        let o = Overrides {
            templates: Some("/nonexistent/templates.json".into()),
            ..Overrides::default()
        };
        assert!(matches!(PipelineConfig::resolve(o, None), Err(Error::Usage(_))));
        let bad_noise = Overrides {
            noise_rel: Some(2.0),
            ..Overrides::default()
        };
        assert!(matches!(PipelineConfig::resolve(bad_noise, None), Err(Error::Harness(_))));
    }
}
