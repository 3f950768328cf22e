//! Reproducible experiment runner for the junta testers.
//!
//! A run is described by an [`ExperimentConfig`] (TOML, field names as below), produces
//! one CSV row per trial and a JSON sidecar with aggregates next to it.

use std::fs;
use std::path::{Path, PathBuf};

use junta_core::boolean::{parse_truth_tables, BooleanFunction, MAX_VARIABLES};
use junta_core::exec::{map_range, ExecMode};
use junta_core::generators::{
    far_instance_boolean, far_instance_unitary, matrix_from_csv, perturbed_junta_boolean,
    perturbed_junta_unitary, random_k_junta_boolean, random_k_junta_unitary, sample_dyes_dno,
    HardSide,
};
use junta_core::oracles::{certify_instance_boolean, certify_instance_unitary, Classification};
use junta_core::testers::{
    gapless_tolerant_junta_tester_with, tolerant_boolean_junta_tester,
    tolerant_boolean_junta_tester_local, tolerant_junta_tester, tolerant_junta_tester_local,
    GaplessConfig, TesterKind, TesterVerdict, Verdict,
};
use junta_core::{RandomSource, Unitary};
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: [&str; 8] = [
    "trial",
    "seed",
    "certified_distance",
    "verdict",
    "statistic",
    "fourier_calls",
    "influence_calls",
    "controlled_u_calls",
];

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("budget exceeded: {projected} controlled-U applications projected, ceiling {ceiling}")]
    Budget { projected: u128, ceiling: u128 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("report error: {0}")]
    Report(String),
}

impl LabError {
    /// Process exit code: 2 for bad parameters, 3 for capacity or budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Parameter(_) => 2,
            LabError::Capacity(_) | LabError::Budget { .. } => 3,
            LabError::Io { .. } | LabError::Report(_) => 1,
        }
    }
}

impl From<junta_core::Error> for LabError {
    fn from(e: junta_core::Error) -> Self {
        use junta_core::Error as E;
        match e {
            E::Capacity(m) => LabError::Capacity(m),
            E::Budget { projected, ceiling } => LabError::Budget { projected, ceiling },
            other => LabError::Parameter(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceClass {
    /// A random exact `k`-junta.
    ExactJunta,
    /// A junta perturbed to distance at most `ε₁`.
    Perturbed,
    /// A random instance at distance at least `ε₂`.
    Far,
    /// Hard Boolean yes-instance on `n = k + a` variables.
    Dyes,
    /// Hard Boolean no-instance on `n = k + a` variables.
    Dno,
    /// The instance in `input_path`, reused for every trial.
    FromFile,
}

mod tester_name {
    use junta_core::testers::TesterKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(kind: &TesterKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(kind.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TesterKind, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "tester_name")]
    pub tester: TesterKind,
    pub n: usize,
    pub k: usize,
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub instance_class: InstanceClass,
    pub trials: usize,
    pub seed: u64,
    pub output_path: PathBuf,
    /// Ceiling on controlled-U applications for `alg8`.
    #[serde(default)]
    pub budget_ceiling: Option<u64>,
    /// Truth-table or matrix file for `from-file`.
    #[serde(default)]
    pub input_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Parameter(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    /// Path of the JSON sidecar.
    pub fn summary_path(&self) -> PathBuf {
        self.output_path.with_extension("json")
    }

    /// Checks everything that can be checked before a single trial runs.
    pub fn validate(&self) -> Result<()> {
        self.tester.check_gap(self.epsilon1, self.epsilon2)?;
        if self.k == 0 || self.k >= self.n {
            return Err(LabError::Parameter(format!(
                "need 1 ≤ k < n, got k = {}, n = {}",
                self.k, self.n
            )));
        }
        if self.tester.is_boolean() && self.n > MAX_VARIABLES {
            return Err(LabError::Capacity(format!(
                "Boolean instances limited to {MAX_VARIABLES} variables"
            )));
        }
        match self.instance_class {
            InstanceClass::Dyes | InstanceClass::Dno if !self.tester.is_boolean() => {
                return Err(LabError::Parameter(format!(
                    "instance class {:?} needs a Boolean tester",
                    self.instance_class
                )));
            }
            InstanceClass::FromFile if self.input_path.is_none() => {
                return Err(LabError::Parameter("from-file needs input_path".into()));
            }
            _ => {}
        }
        if self.tester == TesterKind::Alg8 {
            let gapless = GaplessConfig::new(self.k, self.epsilon1, self.epsilon2)?;
            if let Some(ceiling) = self.budget_ceiling {
                let projected = gapless.worst_case_cost(self.n)?;
                if projected > ceiling as u128 {
                    return Err(LabError::Budget {
                        projected,
                        ceiling: ceiling as u128,
                    });
                }
            }
        }
        Ok(())
    }
}

/// An instance read from disk.
#[derive(Clone, Debug)]
pub enum Instance {
    Unitary(Unitary),
    Boolean(BooleanFunction),
}

/// Reads a matrix CSV (comma separated) or a truth-table file (first table only).
pub fn load_instance_text(text: &str) -> Result<Instance> {
    if text.contains(',') {
        Ok(Instance::Unitary(Unitary::new(matrix_from_csv(text)?)?))
    } else {
        let mut tables = parse_truth_tables(text)?;
        if tables.is_empty() {
            return Err(LabError::Parameter("no truth table in input".into()));
        }
        Ok(Instance::Boolean(tables.swap_remove(0)))
    }
}

fn load_file_instance(config: &ExperimentConfig) -> Result<Option<Instance>> {
    let path = match (config.instance_class, config.input_path.as_deref()) {
        (InstanceClass::FromFile, Some(path)) => path,
        _ => return Ok(None),
    };
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let instance = load_instance_text(&text)?;
    let n = match &instance {
        Instance::Unitary(u) if !config.tester.is_boolean() => u.num_qubits(),
        Instance::Boolean(f) if config.tester.is_boolean() => f.num_vars(),
        _ => {
            return Err(LabError::Parameter(format!(
                "{} does not hold the instance type {} expects",
                path.display(),
                config.tester
            )))
        }
    };
    if n != config.n {
        return Err(LabError::Parameter(format!(
            "{} has n = {n}, config says n = {}",
            path.display(),
            config.n
        )));
    }
    Ok(Some(instance))
}

/// One CSV row plus the bookkeeping behind the aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub certified_distance: Option<f64>,
    pub verdict: &'static str,
    pub statistic: f64,
    pub fourier_calls: u64,
    pub influence_calls: u64,
    pub controlled_u_calls: u64,
    pub expected: Option<Verdict>,
    pub t_rounds: u64,
    pub m_rounds: u64,
}

fn certify_unitary_opt(u: &Unitary, config: &ExperimentConfig) -> Option<f64> {
    certify_instance_unitary(u, config.k, 0.0, 1.0).ok().map(|c| c.distance)
}

fn certify_boolean_opt(f: &BooleanFunction, config: &ExperimentConfig) -> Option<f64> {
    certify_instance_boolean(f, config.k, 0.0, 1.0).ok().map(|c| c.distance)
}

fn run_unitary(u: &Unitary, config: &ExperimentConfig, rng: &mut RandomSource) -> Result<TesterVerdict> {
    let (k, e1, e2) = (config.k, config.epsilon1, config.epsilon2);
    Ok(match config.tester {
        TesterKind::Alg3 => tolerant_junta_tester(u, k, e1, e2, rng)?,
        TesterKind::Alg7 => tolerant_junta_tester_local(u, k, e1, e2, rng)?,
        _ => {
            let gapless = GaplessConfig::new(k, e1, e2)?
                .with_budget(config.budget_ceiling.map(u128::from));
            gapless_tolerant_junta_tester_with(u, &gapless, rng)?
        }
    })
}

fn run_boolean(f: &BooleanFunction, config: &ExperimentConfig, rng: &mut RandomSource) -> Result<TesterVerdict> {
    let (k, e1, e2) = (config.k, config.epsilon1, config.epsilon2);
    Ok(match config.tester {
        TesterKind::Alg3Bool => tolerant_boolean_junta_tester(f, k, e1, e2, rng)?,
        _ => tolerant_boolean_junta_tester_local(f, k, e1, e2, rng)?,
    })
}

fn run_trial(config: &ExperimentConfig, file: Option<&Instance>, trial: usize) -> Result<TrialRow> {
    let mut rng = RandomSource::for_trial(config.seed, trial as u64);
    let seed = rng.seed();
    let (n, k) = (config.n, config.k);
    let (distance, outcome) = if config.tester.is_boolean() {
        let (f, d) = match (config.instance_class, file) {
            (InstanceClass::ExactJunta, _) => (random_k_junta_boolean(n, k, &mut rng)?.0, Some(0.0)),
            (InstanceClass::Perturbed, _) => {
                let c = perturbed_junta_boolean(n, k, config.epsilon1, &mut rng)?;
                (c.function, Some(c.certificate.distance))
            }
            (InstanceClass::Far, _) => {
                let c = far_instance_boolean(n, k, config.epsilon2, &mut rng)?;
                (c.function, Some(c.certificate.distance))
            }
            (class @ (InstanceClass::Dyes | InstanceClass::Dno), _) => {
                let a = n - k;
                let c1 = config.epsilon1 * (a as f64).sqrt() / 2.0;
                let side = if class == InstanceClass::Dyes {
                    HardSide::Yes
                } else {
                    HardSide::No
                };
                let f = sample_dyes_dno(k, a, c1, side, &mut rng)?.function;
                let d = certify_boolean_opt(&f, config);
                (f, d)
            }
            (InstanceClass::FromFile, Some(Instance::Boolean(f))) => (f.clone(), certify_boolean_opt(f, config)),
            (InstanceClass::FromFile, _) => unreachable!("file instance checked at load"),
        };
        (d, run_boolean(&f, config, &mut rng)?)
    } else {
        let (u, d) = match (config.instance_class, file) {
            (InstanceClass::ExactJunta, _) => (random_k_junta_unitary(n, k, &mut rng)?.0, Some(0.0)),
            (InstanceClass::Perturbed, _) => {
                let c = perturbed_junta_unitary(n, k, config.epsilon1, &mut rng)?;
                (c.unitary, Some(c.certificate.distance))
            }
            (InstanceClass::Far, _) => {
                let c = far_instance_unitary(n, k, config.epsilon2, &mut rng)?;
                (c.unitary, Some(c.certificate.distance))
            }
            (InstanceClass::FromFile, Some(Instance::Unitary(u))) => (u.clone(), certify_unitary_opt(u, config)),
            _ => unreachable!("instance class checked in validate"),
        };
        (d, run_unitary(&u, config, &mut rng)?)
    };
    let expected = distance.and_then(|d| match Classification::from_distance(d, config.epsilon1, config.epsilon2) {
        Classification::Yes => Some(Verdict::Yes),
        Classification::No => Some(Verdict::No),
        Classification::Neither => None,
    });
    Ok(TrialRow {
        trial,
        seed,
        certified_distance: distance,
        verdict: outcome.verdict.as_str(),
        statistic: outcome.statistic,
        fourier_calls: outcome.queries.fourier_sample_calls,
        influence_calls: outcome.queries.influence_sample_calls,
        controlled_u_calls: outcome.queries.controlled_u_applications,
        expected,
        t_rounds: outcome.params.t_rounds,
        m_rounds: outcome.params.m_rounds,
    })
}

/// The JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub status: String,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub trials_completed: usize,
    pub certified_yes: usize,
    pub certified_no: usize,
    pub certified_neither: usize,
    pub uncertified: usize,
    pub correct: usize,
    /// Correct verdicts over trials with a yes or no certificate.
    pub success_fraction: Option<f64>,
    pub mean_fourier_calls: Option<f64>,
    pub mean_influence_calls: Option<f64>,
    pub mean_controlled_u_calls: Option<f64>,
    pub threshold: f64,
    pub t_rounds: Vec<u64>,
    pub m_rounds: Vec<u64>,
    pub projected_controlled_u_calls: Option<u128>,
}

impl ExperimentSummary {
    fn new(config: &ExperimentConfig, rows: &[TrialRow]) -> Self {
        let count = |v: Option<Verdict>| rows.iter().filter(|r| r.expected == v).count();
        let certified_yes = count(Some(Verdict::Yes));
        let certified_no = count(Some(Verdict::No));
        let uncertified = rows.iter().filter(|r| r.certified_distance.is_none()).count();
        let correct = rows
            .iter()
            .filter(|r| r.expected.is_some_and(|v| v.as_str() == r.verdict))
            .count();
        let decided = certified_yes + certified_no;
        let mean = |f: fn(&TrialRow) -> u64| {
            (!rows.is_empty()).then(|| rows.iter().map(f).sum::<u64>() as f64 / rows.len() as f64)
        };
        let distinct = |f: fn(&TrialRow) -> u64| {
            let mut v: Vec<u64> = rows.iter().map(f).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        ExperimentSummary {
            status: "ok".into(),
            error: None,
            config: config.clone(),
            trials_completed: rows.len(),
            certified_yes,
            certified_no,
            certified_neither: rows.len() - certified_yes - certified_no - uncertified,
            uncertified,
            correct,
            success_fraction: (decided > 0).then(|| correct as f64 / decided as f64),
            mean_fourier_calls: mean(|r| r.fourier_calls),
            mean_influence_calls: mean(|r| r.influence_calls),
            mean_controlled_u_calls: mean(|r| r.controlled_u_calls),
            threshold: config.tester.threshold(config.epsilon1, config.epsilon2),
            t_rounds: distinct(|r| r.t_rounds),
            m_rounds: distinct(|r| r.m_rounds),
            projected_controlled_u_calls: None,
        }
    }

    fn failed(config: &ExperimentConfig, err: &LabError) -> Self {
        let mut s = Self::new(config, &[]);
        s.status = match err {
            LabError::Budget { .. } => "budget-exceeded",
            LabError::Capacity(_) => "capacity-exceeded",
            _ => "error",
        }
        .into();
        s.error = Some(err.to_string());
        if let LabError::Budget { projected, .. } = err {
            s.projected_controlled_u_calls = Some(*projected);
        }
        s
    }
}

fn write_csv(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let report = |e: csv::Error| LabError::Report(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(report)?;
    w.write_record(CSV_HEADER).map_err(report)?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.certified_distance.map(|d| d.to_string()).unwrap_or_default(),
            r.verdict.to_string(),
            r.statistic.to_string(),
            r.fourier_calls.to_string(),
            r.influence_calls.to_string(),
            r.controlled_u_calls.to_string(),
        ])
        .map_err(report)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_summary(path: &Path, summary: &ExperimentSummary) -> Result<()> {
    let mut json = serde_json::to_string_pretty(summary)
        .map_err(|e| LabError::Report(format!("{}: {e}", path.display())))?;
    json.push('\n');
    fs::write(path, json).map_err(io_err(path))
}

/// Runs every trial and writes the CSV and its JSON sidecar.
///
/// Parameter errors are reported before anything is written. Capacity and budget
/// errors still produce a sidecar describing the failure (with the projected
/// controlled-U count for budget overruns) and an empty CSV.
pub fn run_experiment(config: &ExperimentConfig, mode: ExecMode) -> Result<ExperimentSummary> {
    let outcome = config.validate().and_then(|()| {
        let file = load_file_instance(config)?;
        map_range(config.trials, mode, |i| run_trial(config, file.as_ref(), i))
            .into_iter()
            .collect::<Result<Vec<_>>>()
    });
    match outcome {
        Ok(rows) => {
            let summary = ExperimentSummary::new(config, &rows);
            write_csv(&config.output_path, &rows)?;
            write_summary(&config.summary_path(), &summary)?;
            Ok(summary)
        }
        Err(err @ (LabError::Budget { .. } | LabError::Capacity(_))) => {
            write_csv(&config.output_path, &[])?;
            write_summary(&config.summary_path(), &ExperimentSummary::failed(config, &err))?;
            Err(err)
        }
        Err(err) => Err(err),
    }
}

/// Exact certificate for a file instance.
pub fn certify_text(text: &str, k: usize, epsilon1: f64, epsilon2: f64) -> Result<String> {
    let cert = match load_instance_text(text)? {
        Instance::Unitary(u) => certify_instance_unitary(&u, k, epsilon1, epsilon2)?,
        Instance::Boolean(f) => certify_instance_boolean(&f, k, epsilon1, epsilon2)?,
    };
    Ok(format!(
        "class {}\ndistance {}\nsupport {}\n",
        cert.class, cert.distance, cert.support
    ))
}

/// The `top` largest Pauli weights `|Û(x)|²`, ties broken by Pauli index.
pub fn spectrum_text(text: &str, top: usize) -> Result<String> {
    let u = match load_instance_text(text)? {
        Instance::Unitary(u) => u,
        Instance::Boolean(f) => junta_core::boolean::embed_unitary(&f)?,
    };
    let n = u.num_qubits();
    let spectrum = junta_core::pauli::pauli_spectrum(&u)?;
    let mut weights: Vec<(usize, f64)> = spectrum
        .coefficients()
        .iter()
        .map(|c| c.norm_sqr())
        .enumerate()
        .collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = String::new();
    for (idx, w) in weights.into_iter().take(top) {
        let p = junta_core::pauli::PauliString::from_index(n, idx)?;
        out.push_str(&format!("{p} {w:.12}\n"));
    }
    Ok(out)
}
