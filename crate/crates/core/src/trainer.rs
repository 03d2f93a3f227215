//! Training loops: fixed-ansatz Adam optimization, dynamic depth growth for the
//! brick-wall circuit, and the post-training diagonalization report.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzDescriptor, AnsatzKind, AnsatzParams, GATE_PARAMS};
use crate::cost::{CostFunction, GradientMethod};
use crate::error::{Error, Result};
use crate::objective::ObjectiveKind;
use crate::optimizer::{AdamConfig, AdamState, DEFAULT_FD_STEP};
use crate::state::{off_diagonal_average, purity, random_density_matrix, DensityMatrix};

/// Width of the sliding window used by the convergence test.
pub const CONVERGENCE_WINDOW: usize = 50;
/// Half-width of the uniform draw for blocks appended during depth growth.
pub const APPENDED_INIT_RANGE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSource {
    /// Ginibre-ensemble state.
    Random { n_qubits: usize, rank: usize, seed: u64 },
    /// A state file written by [`DensityMatrix`]'s serializer.
    File { path: PathBuf },
    Inline { state: DensityMatrix },
}

impl StateSource {
    pub fn load(&self) -> Result<DensityMatrix> {
        match self {
            StateSource::Random { n_qubits, rank, seed } => random_density_matrix(*n_qubits, *rank, *seed),
            StateSource::File { path } => {
                let text = std::fs::read_to_string(path)?;
                Ok(serde_json::from_str(&text)?)
            }
            StateSource::Inline { state } => Ok(state.clone()),
        }
    }
}

fn default_epochs() -> usize {
    1000
}
fn default_blocks() -> usize {
    1
}
fn default_fd_step() -> f64 {
    DEFAULT_FD_STEP
}
fn default_tau_conv() -> f64 {
    1e-8
}
fn default_log_every() -> usize {
    1
}
fn default_init_range() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub state: StateSource,
    pub ansatz: AnsatzKind,
    /// Brick-wall depth `m`; ignored by the universal ansatz.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    pub objective: ObjectiveKind,
    /// Maximum number of Adam updates.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub adam: AdamConfig,
    /// Learning rate at update `t` is `lr / (1 + lr_decay * t)`.
    #[serde(default)]
    pub lr_decay: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default)]
    pub gradient: GradientMethod,
    /// Measurements per objective evaluation; `0` uses exact probabilities.
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tau_conv")]
    pub tau_conv: f64,
    /// Record every `log_every`-th epoch (the first and last are always kept).
    #[serde(default = "default_log_every")]
    pub log_every: usize,
    /// Initial parameters are drawn from `[-init_range, init_range]`.
    #[serde(default = "default_init_range")]
    pub init_range: f64,
    /// Depth growth restarts every stage from a fresh draw instead of the previous optimum.
    #[serde(default)]
    pub fresh_start: bool,
    #[serde(default)]
    pub record_wall_clock: bool,
}

impl TrainConfig {
    pub fn new(state: StateSource, ansatz: AnsatzKind, blocks: usize, objective: ObjectiveKind) -> Self {
        Self {
            state,
            ansatz,
            blocks,
            objective,
            epochs: default_epochs(),
            adam: AdamConfig::default(),
            lr_decay: 0.0,
            fd_step: default_fd_step(),
            gradient: GradientMethod::default(),
            shots: 0,
            seed: 0,
            tau_conv: default_tau_conv(),
            log_every: default_log_every(),
            init_range: default_init_range(),
            fresh_start: false,
            record_wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        if !(self.tau_conv > 0.0 && self.tau_conv.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau_conv must be positive, got {}", self.tau_conv)));
        }
        if self.log_every == 0 {
            return Err(Error::InvalidArgument("log_every must be at least 1".into()));
        }
        if !(self.init_range >= 0.0 && self.init_range.is_finite()) {
            return Err(Error::InvalidArgument(format!("init_range must be non-negative, got {}", self.init_range)));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(Error::InvalidArgument(format!("lr_decay must be non-negative, got {}", self.lr_decay)));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(Error::InvalidArgument(format!("fd_step must be positive, got {}", self.fd_step)));
        }
        self.adam.validate()
    }

    pub fn descriptor(&self, n_qubits: usize) -> Result<AnsatzDescriptor> {
        match self.ansatz {
            AnsatzKind::UniversalPauli => AnsatzDescriptor::universal(n_qubits),
            AnsatzKind::BrickWall => AnsatzDescriptor::brick_wall(n_qubits, self.blocks),
        }
    }

    /// Checks the configuration against the state and returns the cost it describes.
    pub fn build_cost(&self, rho: DensityMatrix) -> Result<CostFunction> {
        self.validate()?;
        let descriptor = self.descriptor(rho.n_qubits())?;
        if self.gradient == GradientMethod::Analytic && self.ansatz != AnsatzKind::UniversalPauli {
            return Err(Error::InvalidArgument(
                "analytic gradients are only available for the universal-pauli ansatz".into(),
            ));
        }
        if self.gradient == GradientMethod::Analytic && self.shots > 0 {
            return Err(Error::InvalidArgument("analytic gradients need shots = 0".into()));
        }
        CostFunction::with_shots(rho, descriptor, self.objective, self.shots, self.seed ^ 0x5eed_5407)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRow {
    pub epoch: usize,
    /// Objective in its natural direction, from exact probabilities.
    pub objective: f64,
    /// `D / P` of the evolved state.
    pub ratio: f64,
    pub off_diagonal_average: f64,
    /// Seconds since the start of the run; zero unless wall-clock recording is on.
    pub wall_clock: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub objective: Option<ObjectiveKind>,
    pub rows: Vec<TrainRow>,
    /// Adam updates applied.
    pub epochs_run: usize,
    pub converged: bool,
    pub best_epoch: usize,
    pub best_objective: f64,
}

impl TrainRecord {
    pub fn last(&self) -> Option<&TrainRow> {
        self.rows.last()
    }

    pub fn to_csv(&self, include_wall_clock: bool) -> String {
        let mut out = String::from("epoch,objective,ratio,off_diagonal_average");
        if include_wall_clock {
            out.push_str(",wall_clock");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{:.12e},{:.12e},{:.12e}", r.epoch, r.objective, r.ratio, r.off_diagonal_average);
            if include_wall_clock {
                let _ = write!(out, ",{:.6}", r.wall_clock);
            }
            out.push('\n');
        }
        out
    }
}

/// Result of [`train`]: history, the best parameters seen, and the state they produce.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub record: TrainRecord,
    pub params: AnsatzParams,
    pub evolved: DensityMatrix,
}

struct Metrics {
    objective: f64,
    minimized: f64,
    ratio: f64,
    off_diag: f64,
}

fn metrics(evolved: &DensityMatrix, kind: ObjectiveKind) -> Result<Metrics> {
    let probs: Vec<f64> = evolved.matrix().diag().iter().map(|z| z.re).collect();
    let objective = kind.value_from_probs(evolved.n_qubits(), &probs)?;
    let d: f64 = probs.iter().map(|p| p * p).sum();
    let p = purity(evolved);
    let m = Metrics {
        objective,
        minimized: kind.to_minimized(objective),
        ratio: d / p,
        off_diag: off_diagonal_average(evolved),
    };
    if m.objective.is_finite() && m.ratio.is_finite() && m.off_diag.is_finite() {
        Ok(m)
    } else {
        Err(Error::NonFinite)
    }
}

fn uniform_draw(rng: &mut ChaCha8Rng, len: usize, range: f64) -> Vec<f64> {
    if range == 0.0 {
        return vec![0.0; len];
    }
    (0..len).map(|_| rng.random_range(-range..=range)).collect()
}

/// Runs Adam from the configured random start.
pub fn train(config: &TrainConfig) -> Result<TrainOutcome> {
    let rho = config.state.load()?;
    let cost = config.build_cost(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let theta = uniform_draw(&mut rng, cost.descriptor().param_count(), config.init_range);
    train_from(&cost, theta, config)
}

/// Runs Adam on `cost` starting from `theta`.
pub fn train_from(cost: &CostFunction, mut theta: Vec<f64>, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if theta.len() != cost.descriptor().param_count() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} parameters, got {}",
            cost.descriptor().param_count(),
            theta.len()
        )));
    }
    let start = Instant::now();
    let mut adam = AdamState::new(config.adam, theta.len());
    let mut record = TrainRecord {
        objective: Some(cost.kind()),
        best_objective: f64::INFINITY,
        ..TrainRecord::default()
    };
    let mut best_theta = theta.clone();
    let mut history: Vec<f64> = Vec::new();

    for epoch in 0..=config.epochs {
        let evolved = cost.evolved(&theta)?;
        let m = match metrics(&evolved, cost.kind()) {
            Ok(m) => m,
            Err(Error::NonFinite) => {
                return Err(Error::Aborted {
                    epoch,
                    partial: Box::new(record),
                })
            }
            Err(e) => return Err(e),
        };
        if m.minimized < record.best_objective {
            record.best_objective = m.minimized;
            record.best_epoch = epoch;
            best_theta.copy_from_slice(&theta);
        }
        history.push(m.minimized);
        let converged = epoch >= CONVERGENCE_WINDOW
            && (history[epoch] - history[epoch - CONVERGENCE_WINDOW]).abs() < config.tau_conv;
        let last = converged || epoch == config.epochs;
        if epoch % config.log_every == 0 || last {
            record.rows.push(TrainRow {
                epoch,
                objective: m.objective,
                ratio: m.ratio,
                off_diagonal_average: m.off_diag,
                wall_clock: if config.record_wall_clock {
                    start.elapsed().as_secs_f64()
                } else {
                    0.0
                },
            });
        }
        if last {
            record.converged = converged;
            break;
        }
        let grad = match cost.gradient(&theta, config.gradient, config.fd_step) {
            Ok(g) => g,
            Err(Error::NonFinite) => {
                return Err(Error::Aborted {
                    epoch,
                    partial: Box::new(record),
                })
            }
            Err(e) => return Err(e),
        };
        adam.config.lr = config.adam.lr / (1.0 + config.lr_decay * epoch as f64);
        adam.step(&mut theta, &grad)?;
        record.epochs_run = epoch + 1;
    }

    record.best_objective = cost.kind().to_minimized(record.best_objective);
    let evolved = cost.evolved(&best_theta)?;
    let params = cost.params(&best_theta)?;
    Ok(TrainOutcome { record, params, evolved })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthSweepConfig {
    pub m_start: usize,
    pub m_step: usize,
    pub m_max: usize,
    pub tau_depth: f64,
}

impl Default for DepthSweepConfig {
    fn default() -> Self {
        Self {
            m_start: 5,
            m_step: 5,
            m_max: 70,
            tau_depth: 1e-4,
        }
    }
}

impl DepthSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_start == 0 || self.m_step == 0 || self.m_max < self.m_start {
            return Err(Error::InvalidArgument(format!(
                "depth sweep needs 1 <= m_start <= m_max and m_step >= 1, got {self:?}"
            )));
        }
        if !(self.tau_depth > 0.0 && self.tau_depth.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau_depth must be positive, got {}", self.tau_depth)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub m: usize,
    /// Objective of the stage's best parameters, natural direction.
    pub objective: f64,
    pub ratio: f64,
    pub off_diagonal_average: f64,
    pub epochs_run: usize,
    pub training_converged: bool,
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSweepResult {
    pub objective: ObjectiveKind,
    pub rows: Vec<DepthRow>,
    pub records: Vec<TrainRecord>,
    /// Smallest depth whose objective the next stage failed to improve by `tau_depth`.
    pub converged_m: Option<usize>,
}

impl DepthSweepResult {
    pub fn converged(&self) -> bool {
        self.converged_m.is_some()
    }

    pub fn row(&self, m: usize) -> Option<&DepthRow> {
        self.rows.iter().find(|r| r.m == m)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,objective,ratio,off_diagonal_average,epochs,training_converged,depth_converged\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.12e},{:.12e},{:.12e},{},{},{}",
                r.m,
                r.objective,
                r.ratio,
                r.off_diagonal_average,
                r.epochs_run,
                r.training_converged,
                self.converged_m == Some(r.m)
            );
        }
        out
    }
}

/// Trains at `m_start` blocks, then keeps appending `m_step` blocks and
/// retraining until the objective stops improving by `tau_depth` or the next
/// depth would exceed `m_max`.
pub fn grow_depth(config: &TrainConfig, sweep: &DepthSweepConfig) -> Result<DepthSweepResult> {
    sweep.validate()?;
    if config.ansatz != AnsatzKind::BrickWall {
        return Err(Error::InvalidArgument("depth growth needs the brick-wall ansatz".into()));
    }
    let rho = config.state.load()?;
    let n = rho.n_qubits();
    let per_block = GATE_PARAMS * n;
    let mut stage_config = config.clone();
    stage_config.blocks = sweep.m_start;
    let mut cost = stage_config.build_cost(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut theta = uniform_draw(&mut rng, cost.descriptor().param_count(), config.init_range);

    let mut result = DepthSweepResult {
        objective: config.objective,
        rows: Vec::new(),
        records: Vec::new(),
        converged_m: None,
    };
    let mut m = sweep.m_start;
    loop {
        let outcome = train_from(&cost, theta, &stage_config)?;
        let m_out = metrics(&outcome.evolved, config.objective)?;
        let previous = result.rows.last().map(|r| (r.m, config.objective.to_minimized(r.objective)));
        result.rows.push(DepthRow {
            m,
            objective: m_out.objective,
            ratio: m_out.ratio,
            off_diagonal_average: m_out.off_diag,
            epochs_run: outcome.record.epochs_run,
            training_converged: outcome.record.converged,
            theta: outcome.params.theta().to_vec(),
        });
        result.records.push(outcome.record);
        if let Some((m_prev, prev)) = previous {
            if (m_out.minimized - prev).abs() < sweep.tau_depth {
                result.converged_m = Some(m_prev);
                break;
            }
        }
        let next = m + sweep.m_step;
        if next > sweep.m_max {
            break;
        }
        let added = (next - m) * per_block;
        theta = if config.fresh_start {
            uniform_draw(&mut rng, next * per_block, config.init_range)
        } else {
            let mut t = outcome.params.into_theta();
            t.extend(uniform_draw(&mut rng, added, APPENDED_INIT_RANGE));
            t
        };
        m = next;
        stage_config.blocks = m;
        cost = cost.with_blocks(m)?;
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyThresholds {
    pub eigenvalue_gap: f64,
    pub off_diagonal_average: f64,
}

impl Default for VerifyThresholds {
    fn default() -> Self {
        Self {
            eigenvalue_gap: 1e-3,
            off_diagonal_average: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Evolved diagonal, ascending.
    pub sorted_diagonal: Vec<f64>,
    /// Eigenvalues of the input state, ascending.
    pub eigenvalues: Vec<f64>,
    /// Max-abs difference between the two sorted lists.
    pub eigenvalue_gap: f64,
    pub off_diagonal_average: f64,
    pub purity: f64,
    pub global_objective: f64,
    /// `P - D`, non-negative up to rounding.
    pub purity_gap: f64,
    pub thresholds: VerifyThresholds,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "result: {}", if self.passed { "PASS" } else { "FAIL" });
        let _ = writeln!(
            out,
            "eigenvalue gap: {:.3e} (threshold {:.3e})",
            self.eigenvalue_gap, self.thresholds.eigenvalue_gap
        );
        let _ = writeln!(
            out,
            "off-diagonal average: {:.3e} (threshold {:.3e})",
            self.off_diagonal_average, self.thresholds.off_diagonal_average
        );
        let _ = writeln!(out, "purity: {:.12}", self.purity);
        let _ = writeln!(out, "global objective: {:.12}", self.global_objective);
        let _ = writeln!(out, "purity gap: {:.3e}", self.purity_gap);
        let _ = writeln!(out, "{:>5}  {:>16}  {:>16}", "rank", "diagonal", "eigenvalue");
        for (k, (d, e)) in self.sorted_diagonal.iter().zip(&self.eigenvalues).enumerate() {
            let _ = writeln!(out, "{k:>5}  {d:>16.12}  {e:>16.12}");
        }
        out
    }
}

/// Compares the evolved diagonal against the spectrum of `rho`.
pub fn verify_diagonalization(
    rho: &DensityMatrix,
    params: &AnsatzParams,
    thresholds: VerifyThresholds,
) -> Result<VerificationReport> {
    if params.descriptor().n_qubits != rho.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit parameters for a {}-qubit state",
            params.descriptor().n_qubits,
            rho.n_qubits()
        )));
    }
    let evolved = crate::state::evolve(rho, &params.unitary()?)?;
    let mut sorted_diagonal: Vec<f64> = evolved.matrix().diag().iter().map(|z| z.re).collect();
    sorted_diagonal.sort_by(f64::total_cmp);
    let eigenvalues = rho.eigenvalues()?;
    let eigenvalue_gap = sorted_diagonal
        .iter()
        .zip(&eigenvalues)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let off = off_diagonal_average(&evolved);
    let p = purity(&evolved);
    let d: f64 = sorted_diagonal.iter().map(|x| x * x).sum();
    let passed = eigenvalue_gap <= thresholds.eigenvalue_gap && off <= thresholds.off_diagonal_average;
    Ok(VerificationReport {
        sorted_diagonal,
        eigenvalues,
        eigenvalue_gap,
        off_diagonal_average: off,
        purity: p,
        global_objective: d,
        purity_gap: p - d,
        thresholds,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::universal_params_from_unitary;
    use crate::linalg::{adjoint, eigh};

    fn random_source(n: usize, seed: u64) -> StateSource {
        StateSource::Random {
            n_qubits: n,
            rank: 1 << n,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        let base = TrainConfig::new(random_source(2, 1), AnsatzKind::BrickWall, 2, ObjectiveKind::LocalL);
        assert!(base.validate().is_ok());
        for bad in [
            TrainConfig { epochs: 0, ..base.clone() },
            TrainConfig { tau_conv: 0.0, ..base.clone() },
            TrainConfig { log_every: 0, ..base.clone() },
            TrainConfig { blocks: 0, ..base.clone() },
            TrainConfig {
                objective: ObjectiveKind::SingleQubitPi,
                ..base.clone()
            },
            TrainConfig {
                gradient: GradientMethod::Analytic,
                ..base.clone()
            },
        ] {
            assert!(train(&bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn diagonal_input_with_zero_init_stays_diagonal() {
        let rho = DensityMatrix::new(crate::linalg::ComplexMatrix::real_diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let mut config = TrainConfig::new(
            StateSource::Inline { state: rho },
            AnsatzKind::UniversalPauli,
            0,
            ObjectiveKind::GlobalD,
        );
        config.init_range = 0.0;
        config.epochs = 60;
        let out = train(&config).unwrap();
        assert!((out.record.rows[0].ratio - 1.0).abs() < 1e-12);
        assert!(out.record.last().unwrap().ratio >= 0.999);
    }

    #[test]
    fn single_qubit_pi_reaches_smaller_eigenvalue() {
        let rho = random_density_matrix(1, 2, 21).unwrap();
        let lambda_min = rho.eigenvalues().unwrap()[0];
        let mut config = TrainConfig::new(
            StateSource::Inline { state: rho },
            AnsatzKind::BrickWall,
            1,
            ObjectiveKind::SingleQubitPi,
        );
        config.epochs = 3000;
        config.adam.lr = 0.05;
        config.tau_conv = 1e-12;
        let out = train(&config).unwrap();
        assert!((out.record.best_objective - lambda_min).abs() < 1e-6, "{} vs {lambda_min}", out.record.best_objective);
    }

    #[test]
    fn rows_respect_purity_bound_and_are_reproducible() {
        let mut config = TrainConfig::new(random_source(2, 4), AnsatzKind::BrickWall, 2, ObjectiveKind::LocalL);
        config.epochs = 120;
        config.seed = 17;
        let a = train(&config).unwrap();
        let b = train(&config).unwrap();
        assert_eq!(a.record, b.record);
        assert_eq!(a.params, b.params);
        assert!(a.record.rows.iter().all(|r| r.ratio > 0.0 && r.ratio <= 1.0 + 1e-9));
        assert_eq!(a.record.rows.len(), 121);
        config.log_every = 50;
        let c = train(&config).unwrap();
        let epochs: Vec<usize> = c.record.rows.iter().map(|r| r.epoch).collect();
        assert_eq!(epochs, vec![0, 50, 100, 120]);
    }

    #[test]
    fn best_parameters_reproduce_best_objective() {
        let mut config = TrainConfig::new(random_source(2, 9), AnsatzKind::UniversalPauli, 0, ObjectiveKind::GlobalD);
        config.epochs = 80;
        config.adam.lr = 0.2;
        let out = train(&config).unwrap();
        let d: f64 = out.evolved.matrix().diag().iter().map(|z| z.re * z.re).sum();
        assert!((d - out.record.best_objective).abs() < 1e-12);
        assert!(out.record.rows.iter().all(|r| r.objective <= out.record.best_objective + 1e-12));
    }

    #[test]
    fn shot_mode_runs_deterministically() {
        let mut config = TrainConfig::new(random_source(2, 3), AnsatzKind::BrickWall, 1, ObjectiveKind::GlobalD);
        config.shots = 1000;
        config.epochs = 20;
        let a = train(&config).unwrap();
        let b = train(&config).unwrap();
        assert_eq!(a.record, b.record);
    }

    #[test]
    fn single_qubit_depth_sweep_converges_at_first_depth() {
        let mut config = TrainConfig::new(random_source(1, 5), AnsatzKind::BrickWall, 1, ObjectiveKind::LocalL);
        config.epochs = 2000;
        config.adam.lr = 0.05;
        config.tau_conv = 1e-12;
        let sweep = DepthSweepConfig {
            m_start: 1,
            m_step: 1,
            m_max: 4,
            tau_depth: 1e-6,
        };
        let result = grow_depth(&config, &sweep).unwrap();
        assert_eq!(result.converged_m, Some(1));
        assert_eq!(result.rows.iter().map(|r| r.m).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(result.rows[1].theta.len(), 6);
    }

    #[test]
    fn depth_sweep_truncation_is_flagged() {
        let mut config = TrainConfig::new(random_source(3, 2), AnsatzKind::BrickWall, 1, ObjectiveKind::LocalL);
        config.epochs = 5;
        let sweep = DepthSweepConfig {
            m_start: 1,
            m_step: 1,
            m_max: 2,
            tau_depth: 1e-12,
        };
        let result = grow_depth(&config, &sweep).unwrap();
        assert!(!result.converged());
        assert_eq!(result.rows.len(), 2);
        assert!(result.to_csv().starts_with("m,objective"));
        config.ansatz = AnsatzKind::UniversalPauli;
        assert!(grow_depth(&config, &sweep).is_err());
    }

    #[test]
    fn verification_of_exact_and_identity_diagonalizers() {
        let rho = random_density_matrix(3, 8, 12).unwrap();
        let eig = eigh(rho.matrix()).unwrap();
        let params = universal_params_from_unitary(&adjoint(&eig.eigenvectors)).unwrap();
        let report = verify_diagonalization(&rho, &params, VerifyThresholds::default()).unwrap();
        assert!(report.passed);
        assert!(report.eigenvalue_gap <= 1e-9);
        assert!(report.purity_gap.abs() <= 1e-10);

        let identity = AnsatzParams::zeros(AnsatzDescriptor::universal(3).unwrap()).unwrap();
        let report = verify_diagonalization(&rho, &identity, VerifyThresholds::default()).unwrap();
        assert!(!report.passed);
        assert!(report.off_diagonal_average > 1e-3);
        assert!(report.to_text().starts_with("result: FAIL"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let mut config = TrainConfig::new(random_source(2, 1), AnsatzKind::BrickWall, 3, ObjectiveKind::LocalL);
        config.gradient = GradientMethod::FiniteDifference;
        let json = serde_json::to_string(&config).unwrap();
        let back: TrainConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, config);
        let bad = json.replace("\"epochs\"", "\"epoch\"");
        assert!(serde_json::from_str::<TrainConfig>(&bad).is_err());
    }
}
