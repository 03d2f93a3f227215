//! Run configuration: a TOML document made of an optional preset, a config
//! file merged over it, and command-line overrides merged last.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};
use vqsd_core::{DepthSweepConfig, TrainConfig, VerifyThresholds};

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3", "fig4", "app-depth-sweep"];

const FIG2: &str = r#"
name = "fig2"

[train]
ansatz = "universal-pauli"
objective = "global-d"
gradient = "analytic"
epochs = 10000
lr_decay = 1e-3
tau_conv = 1e-10
log_every = 10

[train.adam]
lr = 0.01

[train.state]
source = "random"
n_qubits = 2
rank = 4
seed = 102
"#;

const FIG3: &str = r#"
name = "fig3"

[train]
ansatz = "brick-wall"
blocks = 1
objective = "single-qubit-pi"
epochs = 5000
tau_conv = 1e-15

[train.adam]
lr = 0.05

[train.state]
source = "random"
n_qubits = 1
rank = 2
seed = 101
"#;

const FIG4: &str = r#"
name = "fig4"

[train]
ansatz = "brick-wall"
blocks = 3
objective = "local-l"
epochs = 20000
tau_conv = 1e-12
log_every = 10

[train.adam]
lr = 0.02

[train.state]
source = "random"
n_qubits = 2
rank = 4
seed = 72
"#;

const APP_DEPTH_SWEEP: &str = r#"
name = "app-depth-sweep"

[train]
ansatz = "brick-wall"
objective = "local-l"
epochs = 5000
tau_conv = 1e-9
log_every = 10

[train.adam]
lr = 0.02

[train.state]
source = "random"
n_qubits = 5
rank = 32
seed = 85

[sweep]
m_start = 5
m_step = 5
m_max = 70
tau_depth = 1e-4
"#;

pub fn preset_table(name: &str) -> Result<Table> {
    let text = match name {
        "fig2" => FIG2,
        "fig3" => FIG3,
        "fig4" => FIG4,
        "app-depth-sweep" => APP_DEPTH_SWEEP,
        other => bail!("unknown preset {other:?} (expected one of {})", PRESET_NAMES.join(", ")),
    };
    Ok(text.parse::<Table>()?)
}

fn default_name() -> String {
    "run".into()
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Preset the file builds on; a `--preset` flag takes precedence.
    #[serde(default)]
    pub preset: Option<String>,
    pub train: TrainConfig,
    #[serde(default)]
    pub sweep: Option<DepthSweepConfig>,
    #[serde(default)]
    pub verify: VerifyThresholds,
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
}

/// Recursively merges `over` into `base`; tables merge, everything else replaces.
pub fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<Table>()
        .with_context(|| format!("parsing config {}", path.display()))
}

pub fn load(config: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let file = config.map(read_table).transpose()?;
    let preset = overrides.preset.clone().or_else(|| {
        file.as_ref()
            .and_then(|t| t.get("preset"))
            .and_then(|v| v.as_str())
            .map(str::to_owned)
    });
    let mut table = match &preset {
        Some(name) => preset_table(name)?,
        None => Table::new(),
    };
    if let Some(file) = file {
        merge(&mut table, file);
    }
    if preset.is_none() && config.is_none() {
        bail!("either --config or --preset is required");
    }
    if let Some(p) = &preset {
        table.insert("preset".into(), Value::String(p.clone()));
    }
    let mut run: RunConfig = table
        .try_into()
        .context("invalid run configuration")?;
    if let Some(out) = &overrides.out {
        run.out_dir = out.clone();
    }
    if let Some(seed) = overrides.seed {
        run.train.seed = seed;
    }
    if let Some(shots) = overrides.shots {
        run.train.shots = shots;
    }
    if run.name.trim().is_empty() {
        bail!("experiment name must not be empty");
    }
    run.train.validate()?;
    if let Some(sweep) = &run.sweep {
        sweep.validate()?;
    }
    Ok(run)
}
