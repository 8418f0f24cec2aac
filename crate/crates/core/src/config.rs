//! Run configuration files.
//!
//! A run file is plain text with one `key = value` pair per line. Blank lines
//! and lines starting with `#` are ignored, and relative paths resolve
//! against the directory holding the file.
//!
//! ```text
//! category  = trousers
//! images    = ../data/fashion/fashion-images-idx3-ubyte.gz
//! labels    = ../data/fashion/fashion-labels-idx1-ubyte.gz
//! filter    = 1
//! train     = 900
//! test      = 100
//! k_list    = 10, 25, 50, 100
//! out       = ../runs/trousers
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::SplitConfig;
use crate::eigen::{Route, Solver};
use crate::error::{Error, Result};
use crate::recon::Truncation;
use crate::sim::NoiseConfig;

const KEYS: &[&str] = &[
    "category",
    "images",
    "labels",
    "filter",
    "balanced",
    "train",
    "test",
    "k_list",
    "noise",
    "sigma",
    "seed",
    "shuffle",
    "out",
    "truncation",
    "route",
    "solver",
    "mean_augmented",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub category: String,
    pub images: PathBuf,
    pub labels: Option<PathBuf>,
    /// Label filter, counts, balancing and (when shuffling) the split seed.
    pub split: SplitConfig,
    /// Coefficient or projection counts to evaluate, strictly ascending.
    pub k_list: Vec<usize>,
    pub noise: NoiseConfig,
    pub seed: u64,
    /// Shuffle the filtered pool with `seed` instead of using file order.
    pub shuffle: bool,
    pub out: PathBuf,
    pub truncation: Truncation,
    pub route: Route,
    pub solver: Solver,
    pub mean_augmented: bool,
}

impl RunConfig {
    /// Reads and validates a run file, including that the data files exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let cfg = Self::parse(&text, base)?;
        cfg.check_files()?;
        Ok(cfg)
    }

    /// Parses run-file text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key {key:?}",
                    n + 1
                )));
            }
            if entries.insert(key, value.trim()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key {key:?}",
                    n + 1
                )));
            }
        }

        let required = |key: &str| {
            entries
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("missing key {key:?}")))
        };
        let path = |v: &str| base.join(v);

        let train = parse_num(required("train")?, "train")?;
        let test = parse_num(required("test")?, "test")?;
        let mut split = SplitConfig::new(train, test);
        match entries.get("filter").copied().unwrap_or("all") {
            "all" | "" => {}
            list => split = split.with_categories(parse_list::<u8>(list, "filter")?),
        }
        if parse_bool(
            entries.get("balanced").copied().unwrap_or("false"),
            "balanced",
        )? {
            split = split.balanced();
        }

        let k_list = parse_list::<usize>(entries.get("k_list").copied().unwrap_or(""), "k_list")?;
        if k_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_list must be strictly ascending".into()));
        }

        let seed = parse_num(entries.get("seed").copied().unwrap_or("0"), "seed")?;
        let noise = match entries.get("noise").copied().unwrap_or("none") {
            "none" => NoiseConfig::none(),
            "gaussian" => NoiseConfig::gaussian(parse_num(required("sigma")?, "sigma")?, seed)?,
            other => return Err(Error::Config(format!("unknown noise model {other:?}"))),
        };
        let shuffle = parse_bool(
            entries.get("shuffle").copied().unwrap_or("false"),
            "shuffle",
        )?;

        let mut cfg = RunConfig {
            category: required("category")?.to_string(),
            images: path(required("images")?),
            labels: entries.get("labels").map(|v| path(v)),
            split,
            k_list,
            noise,
            seed,
            shuffle,
            out: path(entries.get("out").copied().unwrap_or("out")),
            truncation: entries
                .get("truncation")
                .copied()
                .unwrap_or("fixed")
                .parse()?,
            route: entries
                .get("route")
                .copied()
                .unwrap_or("covariance")
                .parse()?,
            solver: entries.get("solver").copied().unwrap_or("ql").parse()?,
            mean_augmented: parse_bool(
                entries.get("mean_augmented").copied().unwrap_or("false"),
                "mean_augmented",
            )?,
        };
        cfg.set_seed(seed);
        Ok(cfg)
    }

    /// Replaces the run seed, which drives detector noise and, when shuffling, the split.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.noise.seed = seed;
        self.split.seed = self.shuffle.then_some(seed);
    }

    pub fn check_files(&self) -> Result<()> {
        for p in std::iter::once(&self.images).chain(self.labels.as_ref()) {
            if !p.is_file() {
                return Err(Error::file(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no such file"),
                ));
            }
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

/// Comma- or whitespace-separated values; an empty string is an empty list.
fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(s, key))
        .collect()
}

fn parse_bool(v: &str, key: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true or false, got {v:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "category = t\nimages = imgs.idx\ntrain = 4\ntest = 2\n";

    #[test]
    fn defaults() {
        let cfg = RunConfig::parse(MINIMAL, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.images, PathBuf::from("/cfg/imgs.idx"));
        assert_eq!(cfg.out, PathBuf::from("/cfg/out"));
        assert_eq!(cfg.labels, None);
        assert_eq!(cfg.split, SplitConfig::new(4, 2));
        assert!(cfg.k_list.is_empty());
        assert_eq!(cfg.noise, NoiseConfig::none());
        assert_eq!(cfg.truncation, Truncation::default());
        assert_eq!(
            (cfg.route, cfg.solver),
            (Route::Covariance, Solver::TridiagonalQl)
        );
        assert!(!cfg.mean_augmented);
    }

    #[test]
    fn full_file() {
        let text = "\
# comment
category = mixed
images = /abs/i.gz
labels = l.gz
filter = 0, 3 7
balanced = true
train = 30
test = 6
k_list = 1,2 5
noise = gaussian
sigma = 0.25
seed = 9
shuffle = yes
truncation = percentile:1:99
route = gram
solver = jacobi
";
        let cfg = RunConfig::parse(text, Path::new("rel")).unwrap();
        assert_eq!(cfg.images, PathBuf::from("/abs/i.gz"));
        assert_eq!(cfg.labels, Some(PathBuf::from("rel/l.gz")));
        assert_eq!(
            cfg.split,
            SplitConfig::new(30, 6)
                .with_categories(vec![0, 3, 7])
                .balanced()
                .with_seed(9)
        );
        assert_eq!(cfg.k_list, vec![1, 2, 5]);
        assert_eq!(cfg.noise, NoiseConfig::gaussian(0.25, 9).unwrap());
        assert_eq!(cfg.route, Route::Gram);
        assert_eq!(cfg.solver, Solver::Jacobi);
    }

    #[test]
    fn seed_override_follows_shuffle() {
        let mut cfg = RunConfig::parse(MINIMAL, Path::new("")).unwrap();
        cfg.set_seed(4);
        assert_eq!((cfg.noise.seed, cfg.split.seed), (4, None));
        let mut cfg =
            RunConfig::parse(&format!("{MINIMAL}shuffle = true\n"), Path::new("")).unwrap();
        cfg.set_seed(4);
        assert_eq!(cfg.split.seed, Some(4));
    }

    #[test]
    fn rejects_bad_input() {
        for extra in [
            "k_list = 5, 3",
            "k_list = 2, 2",
            "colour = red",
            "train = 5",
            "noise = laplace",
            "noise = gaussian",
            "noise = gaussian\nsigma = -1",
            "balanced = maybe",
            "truncation = fixed:1:0:2",
            "just words",
        ] {
            let text = format!("{MINIMAL}{extra}\n");
            assert!(
                matches!(
                    RunConfig::parse(&text, Path::new("")),
                    Err(Error::Config(_))
                ),
                "accepted {extra:?}"
            );
        }
        assert!(RunConfig::parse("images = x\ntrain = 1\ntest = 1\n", Path::new("")).is_err());
    }

    #[test]
    fn load_checks_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.conf");
        fs::write(&cfg_path, MINIMAL).unwrap();
        assert!(matches!(
            RunConfig::load(&cfg_path),
            Err(Error::File { .. })
        ));
        fs::write(dir.path().join("imgs.idx"), b"").unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.images, dir.path().join("imgs.idx"));
    }
}
