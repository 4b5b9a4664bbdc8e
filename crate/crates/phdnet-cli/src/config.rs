//! Run configuration: defaults, config-file merge, value parsing.
//!
//! Every option can come from a command-line flag or from an optional
//! `key = value` config file; flags win on conflict.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use phdnet::error::{Error, Result};
use phdnet::graph::SliceMode;
use phdnet::ingest::YearRule;

/// Output format selector shared by the subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Dot,
    GraphMl,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "dot" => Ok(Self::Dot),
            "graphml" => Ok(Self::GraphMl),
            other => Err(Error::Config(format!(
                "unknown format `{other}` (expected csv, json, dot or graphml)"
            ))),
        }
    }
}

pub fn parse_slice_mode(s: &str) -> Result<SliceMode> {
    match s.to_ascii_lowercase().as_str() {
        "windowed" => Ok(SliceMode::Windowed),
        "cumulative" => Ok(SliceMode::Cumulative),
        other => Err(Error::Config(format!(
            "unknown mode `{other}` (expected windowed or cumulative)"
        ))),
    }
}

pub fn parse_year_rule(s: &str) -> Result<YearRule> {
    match s.to_ascii_lowercase().as_str() {
        "strict" => Ok(YearRule::Strict),
        "inclusive" => Ok(YearRule::Inclusive),
        other => Err(Error::Config(format!(
            "unknown year rule `{other}` (expected strict or inclusive)"
        ))),
    }
}

pub fn parse_int_list(s: &str) -> Result<Vec<i32>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<i32>().map_err(|_| Error::Config(format!("not an integer: `{p}`"))))
        .collect()
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<usize>().map_err(|_| Error::Config(format!("not a count: `{p}`"))))
        .collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::Config(format!("not a number: `{p}`"))))
        .collect()
}

/// `start:end` year range.
pub fn parse_year_range(s: &str) -> Result<(i32, i32)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("year range must be `start:end`, got `{s}`")))?;
    let start: i32 =
        a.trim().parse().map_err(|_| Error::Config(format!("not a year: `{a}`")))?;
    let end: i32 = b.trim().parse().map_err(|_| Error::Config(format!("not a year: `{b}`")))?;
    Ok((start, end))
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub records: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub out: PathBuf,
    pub boundaries: Vec<i32>,
    /// Mode for the per-slice network statistics.
    pub mode: SliceMode,
    /// Mode for the centrality series columns.
    pub ec_mode: SliceMode,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub year_rule: YearRule,
    pub subset: Option<PathBuf>,
    pub reference_year: Option<i32>,
    pub seed: u64,
    pub format: OutputFormat,
    pub delimiter: u8,
    /// Moving-average window for the trend statistic.
    pub ma_window: usize,
    pub validation: Option<PathBuf>,
    /// Pairings `ec_<year>:<column>` for the validation run.
    pub pairings: Vec<String>,
    // Synthetic market parameters.
    pub tiers: Vec<usize>,
    pub hire_rates: Vec<f64>,
    pub bias: f64,
    pub self_loop: f64,
    pub overseas: f64,
    pub years: (i32, i32),
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            records: None,
            registry: None,
            out: PathBuf::from("out"),
            boundaries: vec![2000, 2007, 2014, 2021],
            mode: SliceMode::Windowed,
            ec_mode: SliceMode::Cumulative,
            damping: 0.0,
            tol: 1e-10,
            max_iter: 100_000,
            year_rule: YearRule::Strict,
            subset: None,
            reference_year: None,
            seed: 42,
            format: OutputFormat::Csv,
            delimiter: b',',
            ma_window: 2,
            validation: None,
            pairings: vec![
                "ec_2014:grade_round3".into(),
                "ec_2021:grade_round4".into(),
                "ec_2021:gras_score".into(),
            ],
            tiers: vec![5, 10, 20, 40],
            hire_rates: vec![2.0, 1.5, 1.2, 1.0],
            bias: 0.9,
            self_loop: 0.08,
            overseas: 0.05,
            years: (1980, 2021),
        }
    }
}

/// Raw option values before resolution; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct RawOptions {
    pub records: Option<String>,
    pub registry: Option<String>,
    pub out: Option<String>,
    pub boundaries: Option<String>,
    pub mode: Option<String>,
    pub ec_mode: Option<String>,
    pub damping: Option<String>,
    pub tol: Option<String>,
    pub max_iter: Option<String>,
    pub year_rule: Option<String>,
    pub subset: Option<String>,
    pub reference_year: Option<String>,
    pub seed: Option<String>,
    pub format: Option<String>,
    pub delimiter: Option<String>,
    pub ma_window: Option<String>,
    pub validation: Option<String>,
    pub pairings: Option<String>,
    pub tiers: Option<String>,
    pub hire_rates: Option<String>,
    pub bias: Option<String>,
    pub self_loop: Option<String>,
    pub overseas: Option<String>,
    pub years: Option<String>,
}

impl RawOptions {
    /// Overlays `self` on top of `lower` (file values): own values win.
    pub fn over(self, lower: RawOptions) -> RawOptions {
        macro_rules! pick {
            ($field:ident) => {
                self.$field.or(lower.$field)
            };
        }
        RawOptions {
            records: pick!(records),
            registry: pick!(registry),
            out: pick!(out),
            boundaries: pick!(boundaries),
            mode: pick!(mode),
            ec_mode: pick!(ec_mode),
            damping: pick!(damping),
            tol: pick!(tol),
            max_iter: pick!(max_iter),
            year_rule: pick!(year_rule),
            subset: pick!(subset),
            reference_year: pick!(reference_year),
            seed: pick!(seed),
            format: pick!(format),
            delimiter: pick!(delimiter),
            ma_window: pick!(ma_window),
            validation: pick!(validation),
            pairings: pick!(pairings),
            tiers: pick!(tiers),
            hire_rates: pick!(hire_rates),
            bias: pick!(bias),
            self_loop: pick!(self_loop),
            overseas: pick!(overseas),
            years: pick!(years),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let defaults = RunConfig::default();
        let parse_num = |name: &str, v: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::Config(format!("{name}: not a number `{v}`")))
        };
        let config = RunConfig {
            records: self.records.map(PathBuf::from),
            registry: self.registry.map(PathBuf::from),
            out: self.out.map(PathBuf::from).unwrap_or(defaults.out),
            boundaries: match self.boundaries {
                Some(s) => parse_int_list(&s)?,
                None => defaults.boundaries,
            },
            mode: match self.mode {
                Some(s) => parse_slice_mode(&s)?,
                None => defaults.mode,
            },
            ec_mode: match self.ec_mode {
                Some(s) => parse_slice_mode(&s)?,
                None => defaults.ec_mode,
            },
            damping: match self.damping {
                Some(s) => parse_num("damping", &s)?,
                None => defaults.damping,
            },
            tol: match self.tol {
                Some(s) => parse_num("tol", &s)?,
                None => defaults.tol,
            },
            max_iter: match self.max_iter {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("max-iter: not a count `{s}`")))?,
                None => defaults.max_iter,
            },
            year_rule: match self.year_rule {
                Some(s) => parse_year_rule(&s)?,
                None => defaults.year_rule,
            },
            subset: self.subset.map(PathBuf::from),
            reference_year: match self.reference_year {
                Some(s) => Some(
                    s.parse()
                        .map_err(|_| Error::Config(format!("reference-year: not a year `{s}`")))?,
                ),
                None => None,
            },
            seed: match self.seed {
                Some(s) => {
                    s.parse().map_err(|_| Error::Config(format!("seed: not an integer `{s}`")))?
                }
                None => defaults.seed,
            },
            format: match self.format {
                Some(s) => OutputFormat::parse(&s)?,
                None => defaults.format,
            },
            delimiter: match self.delimiter {
                Some(s) => {
                    let bytes = s.as_bytes();
                    if bytes.len() != 1 {
                        return Err(Error::Config(format!(
                            "delimiter must be a single byte, got `{s}`"
                        )));
                    }
                    bytes[0]
                }
                None => defaults.delimiter,
            },
            ma_window: match self.ma_window {
                Some(s) => s
                    .parse()
                    .map_err(|_| Error::Config(format!("ma-window: not a count `{s}`")))?,
                None => defaults.ma_window,
            },
            validation: self.validation.map(PathBuf::from),
            pairings: match self.pairings {
                Some(s) => s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
                None => defaults.pairings,
            },
            tiers: match self.tiers {
                Some(s) => parse_usize_list(&s)?,
                None => defaults.tiers,
            },
            hire_rates: match self.hire_rates {
                Some(s) => parse_f64_list(&s)?,
                None => defaults.hire_rates,
            },
            bias: match self.bias {
                Some(s) => parse_num("bias", &s)?,
                None => defaults.bias,
            },
            self_loop: match self.self_loop {
                Some(s) => parse_num("self-loop", &s)?,
                None => defaults.self_loop,
            },
            overseas: match self.overseas {
                Some(s) => parse_num("overseas", &s)?,
                None => defaults.overseas,
            },
            years: match self.years {
                Some(s) => parse_year_range(&s)?,
                None => defaults.years,
            },
        };
        if config.boundaries.is_empty() {
            return Err(Error::Config("boundaries must be non-empty".into()));
        }
        if config.boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "boundaries must be strictly increasing, got {:?}",
                config.boundaries
            )));
        }
        Ok(config)
    }
}

/// Keys accepted in the config file, mirroring the long flag names.
const CONFIG_KEYS: [&str; 24] = [
    "records", "registry", "out", "boundaries", "mode", "ec-mode", "damping", "tol", "max-iter",
    "year-rule", "subset", "reference-year", "seed", "format", "delimiter", "ma-window",
    "validation", "pairings", "tiers", "hire-rates", "bias", "self-loop", "overseas", "years",
];

/// Parses a `key = value` config file (one pair per line, `#` comments).
pub fn load_config_file(path: &Path) -> Result<RawOptions> {
    let text = std::fs::read_to_string(path)?;
    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}:{}: expected `key = value`", path.display(), lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "{}:{}: unknown config key `{key}`",
                path.display(),
                lineno + 1
            )));
        }
        values.insert(key, value.trim().to_string());
    }
    let mut take = |key: &str| values.remove(key);
    Ok(RawOptions {
        records: take("records"),
        registry: take("registry"),
        out: take("out"),
        boundaries: take("boundaries"),
        mode: take("mode"),
        ec_mode: take("ec-mode"),
        damping: take("damping"),
        tol: take("tol"),
        max_iter: take("max-iter"),
        year_rule: take("year-rule"),
        subset: take("subset"),
        reference_year: take("reference-year"),
        seed: take("seed"),
        format: take("format"),
        delimiter: take("delimiter"),
        ma_window: take("ma-window"),
        validation: take("validation"),
        pairings: take("pairings"),
        tiers: take("tiers"),
        hire_rates: take("hire-rates"),
        bias: take("bias"),
        self_loop: take("self-loop"),
        overseas: take("overseas"),
        years: take("years"),
    })
}

/// Echo of the effective configuration, embedded in every report.
pub fn config_echo(config: &RunConfig) -> BTreeMap<String, String> {
    let mut echo = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        echo.insert(k.to_string(), v);
    };
    if let Some(p) = &config.records {
        put("records", p.display().to_string());
    }
    if let Some(p) = &config.registry {
        put("registry", p.display().to_string());
    }
    put("out", config.out.display().to_string());
    put(
        "boundaries",
        config.boundaries.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(","),
    );
    put("mode", format!("{:?}", config.mode).to_lowercase());
    put("ec-mode", format!("{:?}", config.ec_mode).to_lowercase());
    put("damping", config.damping.to_string());
    put("tol", config.tol.to_string());
    put("max-iter", config.max_iter.to_string());
    put("year-rule", format!("{:?}", config.year_rule).to_lowercase());
    if let Some(p) = &config.subset {
        put("subset", p.display().to_string());
    }
    if let Some(y) = config.reference_year {
        put("reference-year", y.to_string());
    }
    put("seed", config.seed.to_string());
    put("ma-window", config.ma_window.to_string());
    echo
}
