use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wiener_chaos::chaos::Truncation;
use wiener_chaos::function_space::{Basis, BasisKind, QuadratureKind, QuadratureRule};
use wiener_chaos::kernel::{GridKernel, KernelSpec};
use wiener_chaos::{ChaosError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Brownian,
    Fbm,
    CustomGrid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub kind: QuadratureKind,
    pub panels: usize,
    pub nodes: usize,
    pub tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let rule = QuadratureRule::default();
        Self {
            kind: rule.kind,
            panels: rule.panels,
            nodes: rule.nodes,
            tolerance: rule.tolerance,
        }
    }
}

/// Everything an experiment depends on. Missing fields take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelName,
    pub hurst: f64,
    /// Table for `custom-grid`: header row of `s`, first column `t`.
    pub kernel_file: Option<PathBuf>,
    pub horizon: f64,
    pub basis: BasisKind,
    pub modes: usize,
    pub order: usize,
    pub grid: usize,
    /// Panels per grid cell in the Picard solve.
    pub picard_refine: usize,
    pub quadrature: QuadratureConfig,
    pub seed: u64,
    pub samples: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernel: KernelName::Brownian,
            hurst: 0.75,
            kernel_file: None,
            horizon: 1.0,
            basis: BasisKind::Cosine,
            modes: 8,
            order: 4,
            grid: 256,
            picard_refine: 1,
            quadrature: QuadratureConfig::default(),
            seed: 20240917,
            samples: 10_000,
            out: None,
        }
    }
}

/// Command-line values that override the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub kernel: Option<KernelName>,
    pub hurst: Option<f64>,
    pub horizon: Option<f64>,
    pub basis: Option<BasisKind>,
    pub modes: Option<usize>,
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ChaosError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ChaosError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json() + "\n").map_err(|e| ChaosError::Config(format!("{}: {e}", path.display())))
    }

    /// Defaults, then the file, then flags.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = flags.kernel {
            cfg.kernel = v;
        }
        if let Some(v) = flags.hurst {
            cfg.hurst = v;
        }
        if let Some(v) = flags.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = flags.basis {
            cfg.basis = v;
        }
        if let Some(v) = flags.modes {
            cfg.modes = v;
        }
        if let Some(v) = flags.order {
            cfg.order = v;
        }
        if let Some(v) = flags.grid {
            cfg.grid = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = &flags.out {
            cfg.out = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ChaosError::Config(msg));
        if self.kernel == KernelName::Fbm && !(self.hurst > 0.5 && self.hurst < 1.0) {
            return bad(format!("hurst = {} is outside (1/2, 1)", self.hurst));
        }
        if self.kernel == KernelName::CustomGrid && self.kernel_file.is_none() {
            return bad("kernel custom-grid needs kernel_file".into());
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon = {} must be positive", self.horizon));
        }
        for (name, v) in [
            ("modes", self.modes),
            ("order", self.order),
            ("grid", self.grid),
            ("picard_refine", self.picard_refine),
            ("samples", self.samples),
            ("quadrature.panels", self.quadrature.panels),
            ("quadrature.nodes", self.quadrature.nodes),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        match self.kernel {
            KernelName::Brownian => Ok(KernelSpec::Brownian),
            KernelName::Fbm => KernelSpec::fbm(self.hurst),
            KernelName::CustomGrid => {
                let path = self.kernel_file.as_ref().expect("validated");
                let text = fs::read_to_string(path)
                    .map_err(|e| ChaosError::Config(format!("{}: {e}", path.display())))?;
                Ok(KernelSpec::CustomGrid(GridKernel::from_csv(&text)?))
            }
        }
    }

    pub fn basis(&self) -> Result<Basis> {
        Basis::new(self.basis, self.horizon)
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::new(self.modes, self.order)
    }

    pub fn rule(&self) -> QuadratureRule {
        let q = &self.quadrature;
        QuadratureRule::new(q.kind, q.panels, q.nodes, q.tolerance)
    }
}
