//! Experiment configuration: `key = value` lines grouped in `[experiment]`
//! and repeated `[body]` sections. `#` and `;` start comments.

use std::path::{Path, PathBuf};

use crate::bodies::{parse_usize, BodySpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    ThinShell,
    Clt,
    BerryEsseen,
    Transport,
    Spectral,
    Identities,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::ThinShell, Suite::Clt, Suite::BerryEsseen, Suite::Transport, Suite::Spectral, Suite::Identities];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ThinShell => "thinshell",
            Suite::Clt => "clt",
            Suite::BerryEsseen => "berry_esseen",
            Suite::Transport => "transport",
            Suite::Spectral => "spectral",
            Suite::Identities => "identities",
            Suite::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        let s = s.trim().replace('-', "_");
        [Suite::EACH.as_slice(), &[Suite::All]].concat().into_iter().find(|suite| suite.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub bodies: Vec<BodySpec>,
    pub n_grid: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub plot: bool,
}

pub const DEFAULT_SEED: u64 = 20_090_409;
pub const MIN_SAMPLES: usize = 100;

impl ExperimentConfig {
    /// Defaults for `suite`; `All` uses the defaults of each suite it runs.
    pub fn defaults(suite: Suite) -> Self {
        let (bodies, n_grid, samples) = match suite {
            Suite::ThinShell | Suite::All => (
                vec![BodySpec::cube(1, 1.0), BodySpec::euclidean_ball(1, 1.0), BodySpec::lp_ball(1, 1.0, 1.0)],
                vec![4, 8, 16, 32, 64, 128, 256],
                100_000,
            ),
            Suite::Clt => (vec![], vec![8, 16, 32, 64], 100_000),
            Suite::BerryEsseen => {
                (vec![BodySpec::cube(1, 1.0), BodySpec::counterexample_cross(1)], vec![16, 64, 256], 100_000)
            }
            Suite::Transport | Suite::Spectral => (
                vec![BodySpec::cube(2, 1.0), BodySpec::euclidean_ball(2, 1.0), BodySpec::lp_ball(2, 1.0, 1.0)],
                vec![2],
                100_000,
            ),
            Suite::Identities => (vec![], vec![1], 100_000),
        };
        ExperimentConfig {
            suite,
            bodies,
            n_grid,
            samples,
            seed: DEFAULT_SEED,
            output_dir: PathBuf::from("thinshell-out"),
            plot: false,
        }
    }

    /// The configuration a single suite sees when running under `all`.
    pub fn for_suite(&self, suite: Suite, explicit_bodies: bool, explicit_grid: bool) -> Self {
        let d = Self::defaults(suite);
        ExperimentConfig {
            suite,
            bodies: if explicit_bodies { self.bodies.clone() } else { d.bodies },
            n_grid: if explicit_grid { self.n_grid.clone() } else { d.n_grid },
            ..self.clone()
        }
    }

    pub fn load(path: &Path) -> Result<(Self, ConfigPresence)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<(Self, ConfigPresence)> {
        let mut section: Option<String> = None;
        let mut experiment: Vec<(String, String)> = Vec::new();
        let mut bodies: Vec<Vec<(String, String)>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                match name.as_str() {
                    "experiment" => {}
                    "body" => bodies.push(Vec::new()),
                    _ => return Err(Error::Config { key: format!("[{name}]"), msg: "unknown section".into() }),
                }
                section = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                key: line.to_string(),
                msg: format!("line {}: expected `key = value`", lineno + 1),
            })?;
            let pair = (key.trim().to_string(), value.trim().to_string());
            match section.as_deref() {
                Some("experiment") => experiment.push(pair),
                Some("body") => bodies.last_mut().expect("body section open").push(pair),
                _ => {
                    return Err(Error::Config { key: pair.0, msg: format!("line {}: key outside a section", lineno + 1) })
                }
            }
        }
        let name = experiment.iter().find(|(k, _)| k == "name").map(|(_, v)| v.as_str());
        let suite = match name {
            Some(n) => Suite::parse(n).ok_or_else(|| Error::Config { key: "name".into(), msg: format!("unknown experiment `{n}`") })?,
            None => return Err(Error::Config { key: "name".into(), msg: "missing required key".into() }),
        };
        let mut cfg = Self::defaults(suite);
        let mut presence = ConfigPresence::default();
        for (key, value) in &experiment {
            match key.as_str() {
                "name" => {}
                "n_grid" => {
                    cfg.n_grid = value.split(',').map(|v| parse_usize(key, v)).collect::<Result<_>>()?;
                    presence.n_grid = true;
                }
                "samples" => cfg.samples = parse_usize(key, value)?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| Error::Config { key: key.clone(), msg: format!("not a u64: `{value}`") })?
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "plot" => {
                    cfg.plot = match value.as_str() {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(Error::Config { key: key.clone(), msg: format!("not a boolean: `{value}`") }),
                    }
                }
                _ => return Err(Error::Config { key: key.clone(), msg: "unknown experiment key".into() }),
            }
        }
        if !bodies.is_empty() {
            cfg.bodies = bodies
                .iter()
                .map(|pairs| {
                    let mut pairs: Vec<(&str, &str)> = pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                    let has_dim = pairs.iter().any(|(k, _)| *k == "dim");
                    let has_widths = pairs.iter().any(|(k, _)| *k == "half_widths");
                    // Dimension-free blocks are resized per suite.
                    if !has_dim && !has_widths {
                        pairs.push(("dim", "1"));
                    }
                    BodySpec::from_config_pairs(pairs)
                })
                .collect::<Result<_>>()?;
            presence.bodies = true;
        }
        cfg.validate()?;
        Ok((cfg, presence))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config { key: "n_grid".into(), msg: "must be a nonempty list of positive integers".into() });
        }
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config { key: "samples".into(), msg: format!("must be at least {MIN_SAMPLES}") });
        }
        Ok(())
    }
}

/// Which optional keys the file set explicitly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfigPresence {
    pub bodies: bool,
    pub n_grid: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# comment
[experiment]
name = thinshell
n_grid = 4, 8 ,16
samples = 1000
seed = 7
output_dir = /tmp/x
plot = true

[body]
kind = cube

[body]
kind = lp_ball
p = 1.5
";
        let (cfg, presence) = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.suite, Suite::ThinShell);
        assert_eq!(cfg.n_grid, vec![4, 8, 16]);
        assert_eq!((cfg.samples, cfg.seed, cfg.plot), (1000, 7, true));
        assert_eq!(cfg.bodies.len(), 2);
        assert!(presence.bodies && presence.n_grid);
    }

    fn key_of(text: &str) -> String {
        match ExperimentConfig::parse(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of("[experiment]\nname = thinshell\nsamples = ten\n"), "samples");
        assert_eq!(key_of("[experiment]\nname = thinshell\nsamples = 10\n"), "samples");
        assert_eq!(key_of("[experiment]\nname = nope\n"), "name");
        assert_eq!(key_of("[experiment]\nname = clt\nbogus = 1\n"), "bogus");
        assert_eq!(key_of("[experiment]\nname = clt\n[body]\nkind = blob\n"), "kind");
        assert_eq!(key_of("[experiment]\nname = clt\n[body]\nkind = lp_ball\n"), "p");
        assert_eq!(key_of("[experiment]\nname = clt\nn_grid =\n"), "n_grid");
        assert_eq!(key_of("[weird]\n"), "[weird]");
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse("berry-esseen"), Some(Suite::BerryEsseen));
        assert_eq!(Suite::parse("all"), Some(Suite::All));
        assert_eq!(Suite::parse("x"), None);
    }
}
