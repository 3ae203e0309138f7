//! Run configuration: structured TOML with unknown keys rejected, so a typo
//! fails the run instead of silently falling back to a default.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ExactHarmonic,
    ExactBessel,
    FemConstantPotential,
    FemRadialPotential,
    SphereSpectrum,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::ExactHarmonic => "exact_harmonic",
            Scenario::ExactBessel => "exact_bessel",
            Scenario::FemConstantPotential => "fem_constant_potential",
            Scenario::FemRadialPotential => "fem_radial_potential",
            Scenario::SphereSpectrum => "sphere_spectrum",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// Coefficient `c` of the potential (`f ≡ c` or `f = c|x|^{-2+2ε}`).
    #[serde(default = "one")]
    pub c: f64,
    /// The ε of hypotheses (H1)/(H2); also sets the remainder exponent
    /// δ = 4ε/(N+2ε).
    #[serde(default = "one")]
    pub epsilon: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig { c: 1.0, epsilon: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "default_base")]
    pub base_resolution: usize,
    #[serde(default = "default_levels")]
    pub levels: u32,
    #[serde(default = "default_ratio")]
    pub grading_ratio: f64,
    /// Octahedral subdivision for sphere_spectrum runs.
    #[serde(default = "default_sphere")]
    pub resolution: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            radius: 1.0,
            base_resolution: 64,
            levels: 8,
            grading_ratio: 0.5,
            resolution: 64,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Largest trace radius as a fraction of the mesh radius.
    #[serde(default = "default_radii_max")]
    pub radii_max: f64,
    /// Number of √2-spaced radii (descending pairs double exactly).
    #[serde(default = "default_radii_steps")]
    pub radii_steps: usize,
    /// Largest λ of the geometric blow-up schedule (ratio ½).
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_lambda_count")]
    pub lambda_count: usize,
    /// Eigenpair count for sphere_spectrum runs.
    #[serde(default = "default_eig_count")]
    pub eigenpairs: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            radii_max: 0.75,
            radii_steps: 13,
            lambda_max: 0.5,
            lambda_count: 6,
            eigenpairs: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative α spread across radii.
    #[serde(default = "default_alpha_spread")]
    pub alpha_spread: f64,
    /// Slack of the monotonicity audit.
    #[serde(default = "default_slack")]
    pub monotonicity_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { alpha_spread: 0.05, monotonicity_slack: 1e-3 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

fn one() -> f64 {
    1.0
}
fn default_k() -> u32 {
    1
}
fn default_base() -> usize {
    64
}
fn default_levels() -> u32 {
    8
}
fn default_ratio() -> f64 {
    0.5
}
fn default_sphere() -> usize {
    64
}
fn default_radii_max() -> f64 {
    0.75
}
fn default_radii_steps() -> usize {
    13
}
fn default_lambda_max() -> f64 {
    0.5
}
fn default_lambda_count() -> usize {
    6
}
fn default_eig_count() -> usize {
    12
}
fn default_alpha_spread() -> f64 {
    0.05
}
fn default_slack() -> f64 {
    1e-3
}

impl RunConfig {
    /// Parse and validate. Unknown keys anywhere are rejected.
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        let eps = self.potential.epsilon;
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(format!("potential.epsilon = {eps} outside (0, 1]"));
        }
        if !(self.mesh.radius > 0.0) {
            return Err("mesh.radius must be positive".into());
        }
        if matches!(
            self.scenario,
            Scenario::ExactHarmonic
                | Scenario::ExactBessel
                | Scenario::FemConstantPotential
                | Scenario::FemRadialPotential
        ) && self.mesh.radius > 1.0
        {
            // frequency machinery works on r₀ < min{1, r₁}
            return Err(format!("mesh.radius = {} must be ≤ 1 for frequency runs", self.mesh.radius));
        }
        if !(self.amplitude.is_finite() && self.amplitude != 0.0) {
            return Err("amplitude must be finite and nonzero".into());
        }
        if !(self.schedule.radii_max > 0.0 && self.schedule.radii_max < 1.0) {
            return Err("schedule.radii_max must lie in (0, 1)".into());
        }
        if self.schedule.radii_steps < 3 {
            return Err("schedule.radii_steps must be at least 3".into());
        }
        if self.schedule.lambda_count < 6 {
            return Err("schedule.lambda_count must be at least 6".into());
        }
        if self.scenario == Scenario::SphereSpectrum {
            if self.schedule.eigenpairs == 0 || self.schedule.eigenpairs > 12 {
                return Err("schedule.eigenpairs must lie in 1..=12".into());
            }
            if self.mesh.resolution < 16 {
                return Err("mesh.resolution must be at least 16".into());
            }
        }
        if !(self.potential.c.is_finite()) {
            return Err("potential.c must be finite".into());
        }
        Ok(())
    }

    /// √2-spaced trace radii, ascending (consecutive pairs two apart double
    /// exactly, which the doubling audit uses).
    pub fn trace_radii(&self) -> Vec<f64> {
        let hi = self.schedule.radii_max * self.mesh.radius;
        let mut v: Vec<f64> = (0..self.schedule.radii_steps)
            .map(|j| hi * 2.0f64.powf(-(j as f64) / 2.0))
            .collect();
        v.reverse();
        v
    }

    /// Geometric blow-up schedule, descending with ratio ½.
    pub fn lambda_schedule(&self) -> Vec<f64> {
        (0..self.schedule.lambda_count)
            .map(|j| self.schedule.lambda_max * self.mesh.radius * 0.5f64.powi(j as i32))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::from_toml("scenario = \"exact_harmonic\"\nk = 1\n").unwrap();
        assert_eq!(cfg.scenario, Scenario::ExactHarmonic);
        assert_eq!(cfg.mesh.base_resolution, 64);
        assert_eq!(cfg.k, 1);
    }

    #[test]
    fn unknown_keys_fail_closed() {
        assert!(RunConfig::from_toml("scenario = \"exact_harmonic\"\nkk = 1\n").is_err());
        assert!(RunConfig::from_toml(
            "scenario = \"exact_harmonic\"\n[mesh]\nbase_resolutoin = 64\n"
        )
        .is_err());
    }

    #[test]
    fn invalid_ranges_rejected() {
        assert!(RunConfig::from_toml(
            "scenario = \"exact_bessel\"\n[potential]\nepsilon = 1.5\n"
        )
        .is_err());
        assert!(RunConfig::from_toml(
            "scenario = \"fem_constant_potential\"\n[mesh]\nradius = 2.0\n"
        )
        .is_err());
        assert!(RunConfig::from_toml("scenario = \"exact_harmonic\"\namplitude = 0.0\n").is_err());
    }

    #[test]
    fn schedules_have_the_contracted_shape() {
        let cfg = RunConfig::from_toml("scenario = \"exact_bessel\"\n").unwrap();
        let radii = cfg.trace_radii();
        assert!(radii.windows(2).all(|w| w[0] < w[1]));
        // pairs two apart double exactly
        for i in 0..radii.len() - 2 {
            assert!((radii[i + 2] / radii[i] - 2.0).abs() < 1e-12);
        }
        let lambdas = cfg.lambda_schedule();
        assert_eq!(lambdas.len(), 6);
        for w in lambdas.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-12);
        }
    }
}
