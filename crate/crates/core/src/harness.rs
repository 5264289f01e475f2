//! Experiment configuration, execution and result files.
//!
//! A run writes a CSV with one row per SNR point and a JSON manifest next
//! to it holding the full configuration, so that the manifest alone
//! reproduces every data row.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corrupt::{beta_tail_check, estimate_pcp_curve, CorruptSet};
use crate::error::{Error, Result};
use crate::information::{outage_probability, MiConfig, OutageScheme, OutageSetup};
use crate::ldpc::{build_code, coded_wer, parse_alist, ChainConfig, ChainScheme, Construction, DegreeDistributions, Detector, LdpcCode};
use crate::modulation::{build_qam, build_vector_alphabet};
use crate::precoding::StcKind;
use crate::stats::MonteCarloEstimate;
use crate::toy::{toy_outage, ThetaMode};

pub const CSV_HEADER: &str = "snr_eb_n0_db,gamma,estimate,ci_low,ci_high,n_trials,seconds";

/// Linear SNR `γ = R · 10^(E_b/N_0 / 10) / (n_T n_R)`.
pub fn convert_snr(eb_n0_db: f64, rate: f64, n_t: usize, n_r: usize) -> Result<f64> {
    if !(rate > 0.0) || n_t == 0 || n_r == 0 {
        return Err(Error::Domain(format!("need R > 0 and positive antenna counts, got R = {rate}")));
    }
    Ok(rate * 10f64.powf(eb_n0_db / 10.0) / (n_t * n_r) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Outage,
    Wer,
    Pcp,
    Toy,
    HaarTest,
    MiProbe,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::Outage => "outage",
            Experiment::Wer => "wer",
            Experiment::Pcp => "pcp",
            Experiment::Toy => "toy",
            Experiment::HaarTest => "haar_test",
            Experiment::MiProbe => "mi_probe",
        };
        f.write_str(s)
    }
}

/// Transmission scheme, written `none`, `emi`, `emi_<N>`, `golden`,
/// `alamouti`, `rot_<degrees>` or `random_rot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    NoPrecoding,
    Emi,
    EmiN(usize),
    Golden,
    Alamouti,
    /// Fixed rotation of the two-branch example, in degrees.
    Rotation(f64),
    RandomRotation,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("scheme", format!("unknown scheme `{s}`"));
        Ok(match s {
            "none" => Scheme::NoPrecoding,
            "emi" => Scheme::Emi,
            "golden" => Scheme::Golden,
            "alamouti" => Scheme::Alamouti,
            "random_rot" => Scheme::RandomRotation,
            _ => {
                if let Some(n) = s.strip_prefix("emi_") {
                    let n: usize = n.parse().map_err(|_| bad())?;
                    if n == 0 {
                        return Err(Error::config("scheme", "EMI-N needs N >= 1"));
                    }
                    Scheme::EmiN(n)
                } else if let Some(d) = s.strip_prefix("rot_") {
                    let d: f64 = d.parse().map_err(|_| bad())?;
                    if !d.is_finite() {
                        return Err(bad());
                    }
                    Scheme::Rotation(d)
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::NoPrecoding => f.write_str("none"),
            Scheme::Emi => f.write_str("emi"),
            Scheme::EmiN(n) => write!(f, "emi_{n}"),
            Scheme::Golden => f.write_str("golden"),
            Scheme::Alamouti => f.write_str("alamouti"),
            Scheme::Rotation(d) => write!(f, "rot_{d}"),
            Scheme::RandomRotation => f.write_str("random_rot"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Exhaustive,
    Sphere,
}

/// LDPC code source: an alist file, or a seeded PEG construction from
/// degree distributions given as `[degree, coefficient]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CodeConfig {
    pub n_b: usize,
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
    pub seed: u64,
    pub alist: Option<PathBuf>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig {
            n_b: 1440,
            lambda: vec![(3, 1.0)],
            rho: vec![(30, 1.0)],
            seed: 1,
            alist: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(rename = "n_T")]
    pub n_t: usize,
    #[serde(rename = "n_R")]
    pub n_r: usize,
    /// QAM order `M` (2 for BPSK).
    pub modulation: usize,
    pub scheme: String,
    /// Spectral efficiency in bits per channel use; derived from
    /// `coding_rate` when absent.
    pub rate: Option<f64>,
    pub coding_rate: Option<f64>,
    /// `E_b/N_0` points in dB, strictly increasing.
    pub snr_grid: Vec<f64>,
    pub n_trials: u64,
    pub seed: u64,
    pub interleaver_seed: u64,
    pub detector: DetectorKind,
    pub sphere_capacity: usize,
    pub noise_samples: usize,
    /// Precoders averaged for the per-use EMI scheme.
    pub emi_precoders: usize,
    pub code: CodeConfig,
    pub max_iters: usize,
    pub detect_every: usize,
    /// `c1`, `c2` or `c3`.
    pub corrupt_set: String,
    /// Exponent of the logarithmic threshold for `c3`.
    pub corrupt_exponent: f64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Whether the `seconds` column records wall time (otherwise 0).
    pub timing: bool,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Outage,
            n_t: 2,
            n_r: 2,
            modulation: 4,
            scheme: "emi_10".into(),
            rate: None,
            coding_rate: Some(0.9),
            snr_grid: vec![8.0, 10.0, 12.0, 14.0, 16.0],
            n_trials: 10_000,
            seed: 1,
            interleaver_seed: 1,
            detector: DetectorKind::Exhaustive,
            sphere_capacity: 64,
            noise_samples: 32,
            emi_precoders: 100,
            code: CodeConfig::default(),
            max_iters: 100,
            detect_every: 10,
            corrupt_set: "c1".into(),
            corrupt_exponent: 2.0,
            workers: 0,
            timing: false,
            output: PathBuf::from("results.csv"),
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    }
}

impl ExperimentConfig {
    /// Defaults with settings that suit the given experiment.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let base = ExperimentConfig {
            experiment,
            ..Default::default()
        };
        match experiment {
            Experiment::Toy => ExperimentConfig {
                n_t: 1,
                n_r: 1,
                modulation: 2,
                scheme: "rot_27".into(),
                snr_grid: vec![20.0, 25.0, 30.0, 35.0],
                n_trials: 1_000_000,
                ..base
            },
            Experiment::Pcp => ExperimentConfig {
                scheme: "none".into(),
                snr_grid: vec![20.0, 25.0, 30.0, 35.0, 40.0],
                n_trials: 100_000,
                ..base
            },
            Experiment::HaarTest => ExperimentConfig {
                scheme: "none".into(),
                snr_grid: vec![],
                n_trials: 1_000_000,
                ..base
            },
            Experiment::Wer => ExperimentConfig {
                n_trials: 1_000,
                ..base
            },
            Experiment::MiProbe => ExperimentConfig {
                n_trials: 1_000,
                ..base
            },
            Experiment::Outage => base,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(json_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.scheme.parse()
    }

    /// Bits per channel use carried by the uncoded alphabet.
    pub fn bits_per_use(&self) -> f64 {
        self.n_t.min(self.n_r) as f64 * (self.modulation as f64).log2()
    }

    /// `R`, or `R_c` times the bits per use.
    pub fn spectral_efficiency(&self) -> Result<f64> {
        match (self.rate, self.coding_rate) {
            (Some(r), _) => Ok(r),
            (None, Some(rc)) => Ok(rc * self.bits_per_use()),
            (None, None) => Err(Error::config("rate", "give rate or coding_rate")),
        }
    }

    pub fn gammas(&self) -> Result<Vec<f64>> {
        let r = self.spectral_efficiency()?;
        self.snr_grid.iter().map(|&db| convert_snr(db, r, self.n_t, self.n_r)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::config("n_T", "antenna counts must be positive"));
        }
        if ![2, 4, 16, 64].contains(&self.modulation) {
            return Err(Error::config("modulation", format!("unsupported order {}", self.modulation)));
        }
        if self.n_trials == 0 {
            return Err(Error::config("n_trials", "must be positive"));
        }
        if self.noise_samples == 0 || self.emi_precoders == 0 || self.max_iters == 0 || self.detect_every == 0 {
            return Err(Error::config("noise_samples", "counts must be positive"));
        }
        if self.snr_grid.iter().any(|x| !x.is_finite()) || self.snr_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("snr_grid", "must be finite and strictly increasing"));
        }
        if self.experiment != Experiment::HaarTest && self.snr_grid.is_empty() {
            return Err(Error::config("snr_grid", "must not be empty"));
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::config("rate", "must be positive"));
            }
        }
        if let Some(rc) = self.coding_rate {
            if !(rc > 0.0 && rc <= 1.0) {
                return Err(Error::config("coding_rate", "must lie in (0, 1]"));
            }
        }
        if self.experiment != Experiment::HaarTest {
            self.spectral_efficiency()?;
        }
        let scheme = self.scheme()?;
        let toy_scheme = matches!(scheme, Scheme::Rotation(_) | Scheme::RandomRotation);
        if (self.experiment == Experiment::Toy) != toy_scheme && matches!(self.experiment, Experiment::Toy | Experiment::Outage | Experiment::Wer | Experiment::MiProbe) {
            return Err(Error::config("scheme", format!("`{}` does not apply to the {} experiment", self.scheme, self.experiment)));
        }
        if self.experiment == Experiment::Toy {
            if self.coding_rate.is_none() {
                return Err(Error::config("coding_rate", "the toy experiment needs coding_rate"));
            }
            if self.modulation != 2 {
                return Err(Error::config("modulation", "the toy experiment is BPSK only"));
            }
        }
        if self.experiment == Experiment::Pcp {
            self.corrupt_set()?;
            if !(self.corrupt_exponent > 0.0) {
                return Err(Error::config("corrupt_exponent", "must be positive"));
            }
        }
        if self.detector == DetectorKind::Sphere && self.sphere_capacity == 0 {
            return Err(Error::config("sphere_capacity", "must be positive"));
        }
        Ok(())
    }

    fn corrupt_set(&self) -> Result<CorruptSet> {
        match self.corrupt_set.as_str() {
            "c1" => Ok(CorruptSet::Sc1),
            "c2" => Ok(CorruptSet::Sc2),
            "c3" => Ok(CorruptSet::Sc3),
            other => Err(Error::config("corrupt_set", format!("unknown set `{other}`"))),
        }
    }

    fn mi_config(&self) -> MiConfig {
        MiConfig {
            noise_samples: self.noise_samples,
            sphere_capacity: if self.detector == DetectorKind::Sphere { self.sphere_capacity } else { 0 },
            seed: self.seed,
        }
    }
}

/// One CSV data row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub snr_eb_n0_db: Option<f64>,
    pub gamma: Option<f64>,
    pub estimate: MonteCarloEstimate,
    pub seconds: f64,
}

impl ResultRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v}"));
        format!(
            "{},{},{:e},{:e},{:e},{},{:.3}",
            opt(self.snr_eb_n0_db),
            opt(self.gamma),
            self.estimate.value,
            self.estimate.ci_low,
            self.estimate.ci_high,
            self.estimate.n_trials,
            self.seconds
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub rows: usize,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(json_error)?;
        m.config.validate()?;
        Ok(m)
    }
}

/// `results.csv` → `results.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_extension("manifest.json")
}

fn stc_kind(s: Scheme) -> Option<StcKind> {
    match s {
        Scheme::Golden => Some(StcKind::Golden),
        Scheme::Alamouti => Some(StcKind::Alamouti),
        _ => None,
    }
}

fn load_code(cfg: &ExperimentConfig) -> Result<LdpcCode> {
    match &cfg.code.alist {
        Some(path) => LdpcCode::from_graph(parse_alist(&std::fs::read_to_string(path)?)?),
        None => {
            let dd = DegreeDistributions::new(&cfg.code.lambda, &cfg.code.rho).map_err(|e| Error::config("code", e.to_string()))?;
            build_code(cfg.code.n_b, &dd, cfg.code.seed, Construction::Peg)
        }
    }
}

/// Computes every data row without touching the file system.
pub fn compute_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| compute_rows_inner(cfg))
}

fn compute_rows_inner(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let scheme = cfg.scheme()?;
    if cfg.experiment == Experiment::HaarTest {
        let t0 = Instant::now();
        let rep = beta_tail_check(cfg.n_t, cfg.n_trials, cfg.seed)?;
        // the interval column holds the 95% KS acceptance band
        let crit = 1.358 / (cfg.n_trials as f64).sqrt();
        return Ok(vec![ResultRow {
            snr_eb_n0_db: None,
            gamma: None,
            estimate: MonteCarloEstimate {
                value: rep.ks_statistic,
                ci_low: 0.0,
                ci_high: crit,
                n_trials: cfg.n_trials,
                seed: cfg.seed,
            },
            seconds: if cfg.timing { t0.elapsed().as_secs_f64() } else { 0.0 },
        }]);
    }
    let gammas = cfg.gammas()?;
    let rate = cfg.spectral_efficiency()?;
    let constellation = build_qam(cfg.modulation)?;
    let code = if cfg.experiment == Experiment::Wer { Some(load_code(cfg)?) } else { None };
    let mut rows = Vec::with_capacity(gammas.len());
    for (&db, &g) in cfg.snr_grid.iter().zip(&gammas) {
        let t0 = Instant::now();
        let est = match cfg.experiment {
            Experiment::Outage | Experiment::MiProbe => {
                let alphabet = build_vector_alphabet(constellation.clone(), cfg.n_t, cfg.n_r)?;
                let os = match scheme {
                    Scheme::NoPrecoding => OutageScheme::NoPrecoding,
                    Scheme::Emi => OutageScheme::Emi {
                        n_precoders: cfg.emi_precoders,
                    },
                    Scheme::EmiN(n) => OutageScheme::EmiN(n),
                    s => OutageScheme::Stc(stc_kind(s).ok_or_else(|| Error::config("scheme", "not a MIMO scheme"))?),
                };
                let setup = OutageSetup::new(os, alphabet, cfg.n_r)?;
                if cfg.experiment == Experiment::Outage {
                    outage_probability(&setup, rate, g, cfg.n_trials, &cfg.mi_config())?
                } else {
                    let mis = (0..cfg.n_trials)
                        .map(|t| Ok(setup.trial_mis(t, &[g], &cfg.mi_config())?[0]))
                        .collect::<Result<Vec<f64>>>()?;
                    MonteCarloEstimate::mean(&mis, cfg.seed)
                }
            }
            Experiment::Wer => {
                let alphabet = build_vector_alphabet(constellation.clone(), cfg.n_t, cfg.n_r)?;
                let cs = match scheme {
                    Scheme::NoPrecoding => ChainScheme::NoPrecoding,
                    Scheme::Emi => ChainScheme::Emi,
                    Scheme::EmiN(n) => ChainScheme::EmiN(n),
                    s => ChainScheme::Stc(stc_kind(s).ok_or_else(|| Error::config("scheme", "not a MIMO scheme"))?),
                };
                let code = code.as_ref().expect("built above");
                let mut chain = ChainConfig::new(code, alphabet, cfg.n_r, cs);
                chain.detector = match cfg.detector {
                    DetectorKind::Exhaustive => Detector::Exhaustive,
                    DetectorKind::Sphere => Detector::Sphere {
                        capacity: cfg.sphere_capacity,
                    },
                };
                chain.gammas = vec![g];
                chain.n_words = cfg.n_trials;
                chain.seed = cfg.seed;
                chain.interleaver_seed = cfg.interleaver_seed;
                chain.max_iters = cfg.max_iters;
                chain.detect_every = cfg.detect_every;
                coded_wer(&chain)?[0]
            }
            Experiment::Pcp => {
                let alphabet = build_vector_alphabet(constellation.clone(), cfg.n_t, cfg.n_t)?;
                estimate_pcp_curve(cfg.n_t, cfg.n_r, &[g], cfg.corrupt_set()?, cfg.n_trials, &alphabet, cfg.corrupt_exponent, cfg.seed)?[0]
            }
            Experiment::Toy => {
                let mode = match scheme {
                    Scheme::Rotation(d) => ThetaMode::Fixed(d.to_radians()),
                    _ => ThetaMode::RandomUniform,
                };
                let r_c = cfg.coding_rate.ok_or_else(|| Error::config("coding_rate", "required"))?;
                toy_outage(mode, r_c, g, cfg.n_trials, &cfg.mi_config())?
            }
            Experiment::HaarTest => unreachable!("handled above"),
        };
        rows.push(ResultRow {
            snr_eb_n0_db: Some(db),
            gamma: Some(g),
            estimate: est,
            seconds: if cfg.timing { t0.elapsed().as_secs_f64() } else { 0.0 },
        });
        log::info!("{} {} dB: {:.3e}", cfg.experiment, db, est.value);
    }
    Ok(rows)
}

pub fn render_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Process exit status for a failed run: 2 for configuration and parse
/// errors, 3 for everything raised while computing or writing.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Parse { .. } => 2,
        _ => 3,
    }
}

/// Runs the experiment and writes the CSV and its manifest. Returns the rows.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rows = compute_rows(cfg)?;
    if let Some(dir) = cfg.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&cfg.output, render_csv(&rows))?;
    let manifest = Manifest {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rows: rows.len(),
    };
    std::fs::write(manifest_path(&cfg.output), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(rows)
}
