//! Experiment specification file: flat `key = value` text with one
//! `[section]` per simulation setting.
//!
//! ```text
//! replications = 200
//! methods = pe, rmfa, alpha_pca
//! rank_methods = rit_er, iter_er
//! threads = auto
//! output = results.csv
//!
//! [setting a_normal_50]
//! p1 = 20
//! p2 = 50
//! t = 50
//! k1 = 3
//! k2 = 3
//! phi = 0.1
//! psi = 0.1
//! dist = normal          # or: t (requires nu = ...)
//! k_max = 10             # optional, for rank selection
//! burn_in = 50           # optional
//! seed = 7               # optional per-setting base seed
//! ```
//!
//! Full-line comments start with `#`; inline comments follow a `#` after
//! the value.

use std::fs;
use std::path::Path;

use matfact::datagen::ErrorDist;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Pe,
    Rmfa,
    AlphaPca,
}

impl FitKind {
    pub fn name(self) -> &'static str {
        match self {
            FitKind::Pe => "pe",
            FitKind::Rmfa => "rmfa",
            FitKind::AlphaPca => "alpha_pca",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankKind {
    RitEr,
    IterEr,
}

impl RankKind {
    pub fn name(self) -> &'static str {
        match self {
            RankKind::RitEr => "rit_er",
            RankKind::IterEr => "iter_er",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SettingSpec {
    pub id: String,
    pub p1: usize,
    pub p2: usize,
    pub t_len: usize,
    pub k1: usize,
    pub k2: usize,
    pub phi: f64,
    pub psi: f64,
    pub dist: ErrorDist,
    pub burn_in: usize,
    pub k_max: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub replications: usize,
    pub methods: Vec<FitKind>,
    pub rank_methods: Vec<RankKind>,
    pub threads: Option<usize>,
    pub output_name: String,
    pub settings: Vec<SettingSpec>,
}

pub fn read_experiment_spec(path: &Path) -> Result<ExperimentSpec> {
    let content = fs::read_to_string(path)?;
    parse_experiment_spec(&content)
}

pub fn parse_experiment_spec(content: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec {
        replications: 0,
        methods: Vec::new(),
        rank_methods: Vec::new(),
        threads: None,
        output_name: "results.csv".to_string(),
        settings: Vec::new(),
    };
    let mut current: Option<SettingBuilder> = None;

    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(CliError::Parse {
                line: line_no,
                msg: "unterminated section header".into(),
            })?;
            let id = name
                .trim()
                .strip_prefix("setting")
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or(CliError::Parse {
                    line: line_no,
                    msg: "section must be `[setting <id>]`".into(),
                })?;
            if let Some(builder) = current.take() {
                spec.settings.push(builder.finish()?);
            }
            current = Some(SettingBuilder::new(id.to_string()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(CliError::Parse {
            line: line_no,
            msg: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        match &mut current {
            Some(builder) => builder.set(key, value, line_no)?,
            None => set_global(&mut spec, key, value, line_no)?,
        }
    }
    if let Some(builder) = current.take() {
        spec.settings.push(builder.finish()?);
    }

    if spec.replications == 0 {
        return Err(CliError::Config(
            "`replications` must be set to a positive integer".into(),
        ));
    }
    if spec.settings.is_empty() {
        return Err(CliError::Config("no settings defined".into()));
    }
    if spec.methods.is_empty() && spec.rank_methods.is_empty() {
        return Err(CliError::Config(
            "at least one of `methods` or `rank_methods` must be non-empty".into(),
        ));
    }
    Ok(spec)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn set_global(spec: &mut ExperimentSpec, key: &str, value: &str, line: usize) -> Result<()> {
    let parse_err = |msg: String| CliError::Parse { line, msg };
    match key {
        "replications" => {
            spec.replications = value
                .parse()
                .map_err(|_| parse_err(format!("bad replications `{value}`")))?;
        }
        "methods" => {
            spec.methods = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| match s {
                    "pe" => Ok(FitKind::Pe),
                    "rmfa" => Ok(FitKind::Rmfa),
                    "alpha_pca" => Ok(FitKind::AlphaPca),
                    other => Err(parse_err(format!("unknown method `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
        }
        "rank_methods" => {
            spec.rank_methods = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| match s {
                    "rit_er" => Ok(RankKind::RitEr),
                    "iter_er" => Ok(RankKind::IterEr),
                    other => Err(parse_err(format!("unknown rank method `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
        }
        "threads" => {
            spec.threads = if value == "auto" {
                None
            } else {
                let n: usize = value
                    .parse()
                    .map_err(|_| parse_err(format!("bad threads `{value}`")))?;
                if n == 0 {
                    return Err(CliError::Config("threads must be positive or auto".into()));
                }
                Some(n)
            };
        }
        "output" => spec.output_name = value.to_string(),
        other => return Err(parse_err(format!("unknown key `{other}`"))),
    }
    Ok(())
}

struct SettingBuilder {
    id: String,
    p1: Option<usize>,
    p2: Option<usize>,
    t_len: Option<usize>,
    k1: Option<usize>,
    k2: Option<usize>,
    phi: f64,
    psi: f64,
    dist_name: Option<String>,
    nu: Option<u32>,
    burn_in: usize,
    k_max: usize,
    seed: Option<u64>,
}

impl SettingBuilder {
    fn new(id: String) -> Self {
        Self {
            id,
            p1: None,
            p2: None,
            t_len: None,
            k1: None,
            k2: None,
            phi: 0.0,
            psi: 0.0,
            dist_name: None,
            nu: None,
            burn_in: 50,
            k_max: 10,
            seed: None,
        }
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let parse_err = |msg: String| CliError::Parse { line, msg };
        let bad = |what: &str| parse_err(format!("bad {what} `{value}`"));
        match key {
            "p1" => self.p1 = Some(value.parse().map_err(|_| bad("p1"))?),
            "p2" => self.p2 = Some(value.parse().map_err(|_| bad("p2"))?),
            "t" => self.t_len = Some(value.parse().map_err(|_| bad("t"))?),
            "k1" => self.k1 = Some(value.parse().map_err(|_| bad("k1"))?),
            "k2" => self.k2 = Some(value.parse().map_err(|_| bad("k2"))?),
            "phi" => self.phi = value.parse().map_err(|_| bad("phi"))?,
            "psi" => self.psi = value.parse().map_err(|_| bad("psi"))?,
            "dist" => self.dist_name = Some(value.to_string()),
            "nu" => self.nu = Some(value.parse().map_err(|_| bad("nu"))?),
            "burn_in" => self.burn_in = value.parse().map_err(|_| bad("burn_in"))?,
            "k_max" => self.k_max = value.parse().map_err(|_| bad("k_max"))?,
            "seed" => self.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            other => return Err(parse_err(format!("unknown setting key `{other}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<SettingSpec> {
        fn need(field: Option<usize>, id: &str, name: &str) -> Result<usize> {
            field.ok_or_else(|| CliError::Config(format!("setting `{id}` missing `{name}`")))
        }
        let id = &self.id;
        let dist = match self.dist_name.as_deref() {
            None | Some("normal") => ErrorDist::MatrixNormal,
            Some("t") => {
                let nu = self.nu.ok_or_else(|| {
                    CliError::Config(format!("setting `{id}` uses dist = t but no `nu`"))
                })?;
                ErrorDist::MatrixT { nu }
            }
            Some(other) => {
                return Err(CliError::Config(format!(
                    "setting `{id}`: unknown dist `{other}` (use normal or t)"
                )))
            }
        };
        Ok(SettingSpec {
            p1: need(self.p1, id, "p1")?,
            p2: need(self.p2, id, "p2")?,
            t_len: need(self.t_len, id, "t")?,
            k1: need(self.k1, id, "k1")?,
            k2: need(self.k2, id, "k2")?,
            phi: self.phi,
            psi: self.psi,
            dist,
            burn_in: self.burn_in,
            k_max: self.k_max,
            seed: self.seed,
            id: self.id.clone(),
        })
    }
}
