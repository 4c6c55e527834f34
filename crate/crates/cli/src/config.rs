//! Pipeline configuration: a TOML file with dotted section keys.
//!
//! ```toml
//! kappa = 10
//! seed = 7
//! rules = ["sntv", "stv"]
//! factorization.latent_dim = 20
//! lexicon.top_n = 25
//! paths.out = "runs"
//! ```
//!
//! Every key is optional. A missing input path falls back to the output of
//! the `synth` stage.

use std::path::{Path, PathBuf};

use newsfair_core::{FactorizationConfig, LexiconParams, Rule, SynthConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Committee size.
    pub kappa: usize,
    /// Single source of randomness; copied into the factorization and
    /// synthetic-data seeds.
    pub seed: u64,
    pub rules: Vec<Rule>,
    pub factorization: FactorizationConfig,
    pub lexicon: LexiconParams,
    pub synth: SynthConfig,
    pub paths: Paths,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Interaction events, `.csv` or json-lines.
    pub events: Option<PathBuf>,
    /// Platform article bodies.
    pub corpus: Option<PathBuf>,
    /// Training press for the left seed words.
    pub left_corpus: Option<PathBuf>,
    pub right_corpus: Option<PathBuf>,
    /// Parent of the run directories. Left out of the serialized config, so
    /// the recorded config and its hash do not depend on where a run lives.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            events: None,
            corpus: None,
            left_corpus: None,
            right_corpus: None,
            out: PathBuf::from("runs"),
        }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mut cfg = Self {
            kappa: 10,
            seed: 0,
            rules: Rule::DEFAULT.to_vec(),
            factorization: FactorizationConfig::default(),
            lexicon: LexiconParams::default(),
            synth: SynthConfig::default(),
            paths: Paths::default(),
        };
        cfg.propagate_seed();
        cfg
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kappa: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        // a section seed may only restate the top-level one
        let seed = raw.get("seed").and_then(|s| s.as_integer()).unwrap_or(0);
        for section in ["factorization", "synth"] {
            let own = raw.get(section).and_then(|s| s.get("rng_seed"));
            if own.is_some_and(|s| s.as_integer() != Some(seed)) {
                return Err(format!(
                    "`{section}.rng_seed` differs from `seed`; set only the top-level `seed`"
                ));
            }
        }
        let mut cfg: PipelineConfig = raw.try_into().map_err(|e: toml::de::Error| e.to_string())?;
        cfg.propagate_seed();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), String> {
        if let Some(k) = o.kappa {
            self.kappa = k;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.paths.out = out.clone();
        }
        self.propagate_seed();
        self.validate()
    }

    fn propagate_seed(&mut self) {
        self.factorization.rng_seed = self.seed;
        self.synth.rng_seed = self.seed;
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.kappa == 0 {
            return Err("kappa must be at least 1".into());
        }
        if self.rules.is_empty() {
            return Err("rules must not be empty".into());
        }
        for (i, r) in self.rules.iter().enumerate() {
            if self.rules[..i].contains(r) {
                return Err(format!("rule `{r}` listed twice"));
            }
        }
        if self.lexicon.top_n == 0 {
            return Err("lexicon.top_n must be positive".into());
        }
        self.factorization.validate().map_err(|e| e.to_string())?;
        self.synth.validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    /// True when some input has to come from the synthetic generator.
    pub fn needs_synth(&self) -> bool {
        let p = &self.paths;
        p.events.is_none()
            || p.corpus.is_none()
            || p.left_corpus.is_none()
            || p.right_corpus.is_none()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn run_dir(&self) -> PathBuf {
        self.paths.out.join(format!("run-{}", self.hash()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(
            PipelineConfig::from_toml("").unwrap(),
            PipelineConfig::default()
        );
    }

    #[test]
    fn dotted_keys_reach_sections() {
        let cfg = PipelineConfig::from_toml(
            "kappa = 4\nseed = 9\nrules = [\"k-borda\", \"STV\"]\n\
             factorization.latent_dim = 3\nlexicon.min_count = 1\nsynth.n_users = 10\n\
             paths.events = \"e.csv\"\n",
        )
        .unwrap();
        assert_eq!(cfg.kappa, 4);
        assert_eq!(cfg.rules, vec![Rule::KBorda, Rule::Stv]);
        assert_eq!(cfg.factorization.latent_dim, 3);
        assert_eq!(cfg.factorization.rng_seed, 9);
        assert_eq!(cfg.synth.rng_seed, 9);
        assert_eq!(cfg.synth.n_users, 10);
        assert_eq!(cfg.lexicon.min_count, 1);
        assert_eq!(cfg.paths.events.as_deref(), Some(Path::new("e.csv")));
        assert!(cfg.needs_synth());
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            "kappa = 0",
            "rules = []",
            "rules = [\"approval\"]",
            "rules = [\"cc\", \"cc\"]",
            "colour = 1",
            "factorization.momentum = 0.9",
            "seed = 2\nfactorization.rng_seed = 3",
            "synth.polarization = 2.0",
            "kappa = ",
        ] {
            assert!(PipelineConfig::from_toml(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn hash_tracks_content_but_not_output_parent() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        b.paths.out = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.apply(&Overrides {
            seed: Some(1),
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn overrides_win_and_are_validated() {
        let mut cfg = PipelineConfig::default();
        cfg.apply(&Overrides {
            kappa: Some(3),
            seed: Some(5),
            out: None,
        })
        .unwrap();
        assert_eq!((cfg.kappa, cfg.factorization.rng_seed), (3, 5));
        assert!(cfg
            .apply(&Overrides {
                kappa: Some(0),
                ..Default::default()
            })
            .is_err());
    }

    #[test]
    fn serialized_form_reloads() {
        let mut cfg = PipelineConfig::default();
        cfg.paths.corpus = Some("c.jsonl".into());
        cfg.paths.out = PathBuf::from("elsewhere");
        let mut back = PipelineConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back.paths.out, PathBuf::from("runs"));
        back.paths.out = cfg.paths.out.clone();
        assert_eq!(back, cfg);
    }
}
