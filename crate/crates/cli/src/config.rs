//! Scenario configuration: one JSON file describes the domain and grid, the
//! incident wave, the background medium and the design target, plus the
//! knobs the pipelines need (schedule, seed, probes, directions).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use refrac_core::directions::{cube_directions, probe_sphere};
use refrac_core::vec3::{self, Vec3};
use refrac_core::{p_from_target, BoxDomain, ComplexGridField, MediumSpec};

use crate::pipeline::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub domain: DomainConfig,
    pub k: f64,
    /// Incident direction; normalized on load. Defaults to +z.
    #[serde(default = "default_alpha")]
    pub alpha: [f64; 3],
    /// Background refraction coefficient. Defaults to vacuum.
    #[serde(default)]
    pub n0: FieldSpec,
    /// Desired refraction coefficient; mutually exclusive with `target_p`.
    pub target_n: Option<FieldSpec>,
    /// Desired potential perturbation `p = k²(n0 - n)` given directly.
    pub target_p: Option<FieldSpec>,
    /// Particle radius for `design`/`simulate` (the schedule supplies radii
    /// for `converge`).
    pub radius: Option<f64>,
    /// Particle-count or radius schedule for the convergence study.
    pub schedule: Option<Schedule>,
    #[serde(default)]
    pub seed: u64,
    /// Field comparison points; defaults to 26 points on a sphere of radius
    /// 3 x diam(D) around the domain center, outside the near-field zone.
    pub probes: Option<Vec<[f64; 3]>>,
    /// Far-field directions; normalized on load. Defaults to the 26 cube
    /// directions.
    pub betas: Option<Vec<[f64; 3]>>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub grid_shape: [usize; 3],
}

/// A scalar field given as a preset name, a constant (real or `[re, im]`),
/// or one complex value per grid cell.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Preset(String),
    Real(f64),
    Complex([f64; 2]),
    Cells(Vec<[f64; 2]>),
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec::Preset("vacuum".into())
    }
}

impl FieldSpec {
    pub fn build(&self, domain: &BoxDomain, what: &str) -> Result<ComplexGridField, Failure> {
        match self {
            FieldSpec::Preset(name) if name == "vacuum" => Ok(ComplexGridField::constant(
                domain.clone(),
                Complex64::new(1.0, 0.0),
            )),
            FieldSpec::Preset(name) => Err(Failure::config(format!(
                "{what}: unknown preset {name:?} (only \"vacuum\" is defined)"
            ))),
            FieldSpec::Real(v) => Ok(ComplexGridField::constant(
                domain.clone(),
                Complex64::new(*v, 0.0),
            )),
            FieldSpec::Complex([re, im]) => Ok(ComplexGridField::constant(
                domain.clone(),
                Complex64::new(*re, *im),
            )),
            FieldSpec::Cells(values) => {
                if values.len() != domain.num_cells() {
                    return Err(Failure::config(format!(
                        "{what}: {} cell values for a grid of {} cells",
                        values.len(),
                        domain.num_cells()
                    )));
                }
                Ok(ComplexGridField::new(
                    domain.clone(),
                    values.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                )?)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    /// Target particle counts, strictly increasing; the radius follows from
    /// the recipe normalization (`a` such that the expected count is `M`).
    MTargets { m_targets: Vec<usize> },
    /// Explicit radii, strictly decreasing (so the counts increase).
    Radii { radii: Vec<f64> },
}

fn default_alpha() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let cfg: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.target_n.is_some() && self.target_p.is_some() {
            return Err(Failure::config(
                "config sets both target_n and target_p; pick one".into(),
            ));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Failure::config(format!(
                    "radius must be positive and finite, got {r}"
                )));
            }
        }
        match &self.schedule {
            None => {}
            Some(Schedule::MTargets { m_targets }) => {
                if m_targets.is_empty() {
                    return Err(Failure::config("schedule.m_targets is empty".into()));
                }
                if m_targets.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Failure::config(format!(
                        "schedule.m_targets must be strictly increasing, got {m_targets:?}"
                    )));
                }
            }
            Some(Schedule::Radii { radii }) => {
                if radii.is_empty() {
                    return Err(Failure::config("schedule.radii is empty".into()));
                }
                if radii.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                    return Err(Failure::config(format!(
                        "schedule.radii must be positive, got {radii:?}"
                    )));
                }
                if radii.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Failure::config(format!(
                        "schedule.radii must be strictly decreasing (so the particle count \
                         increases), got {radii:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BoxDomain, Failure> {
        Ok(BoxDomain::new(
            self.domain.lo,
            self.domain.hi,
            self.domain.grid_shape,
        )?)
    }

    pub fn medium(&self) -> Result<MediumSpec, Failure> {
        let domain = self.domain()?;
        let n0 = self.n0.build(&domain, "n0")?;
        let norm = vec3::norm(self.alpha);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Failure::config(format!(
                "alpha must be a nonzero direction, got {:?}",
                self.alpha
            )));
        }
        let alpha = vec3::normalized(self.alpha);
        Ok(MediumSpec::new(domain, self.k, alpha, n0)?)
    }

    /// The design target as a potential perturbation, if the config has one.
    pub fn target_p(&self, medium: &MediumSpec) -> Result<Option<ComplexGridField>, Failure> {
        let domain = medium.domain();
        if let Some(spec) = &self.target_p {
            return Ok(Some(spec.build(domain, "target_p")?));
        }
        if let Some(spec) = &self.target_n {
            let n = spec.build(domain, "target_n")?;
            return Ok(Some(p_from_target(medium.n0(), &n, medium.k())?));
        }
        Ok(None)
    }

    /// Like [`Self::target_p`] but an error when the config has no target.
    pub fn required_target(&self, medium: &MediumSpec) -> Result<ComplexGridField, Failure> {
        self.target_p(medium)?.ok_or_else(|| {
            Failure::config("this command needs target_n or target_p in the config".into())
        })
    }

    pub fn betas(&self) -> Result<Vec<Vec3>, Failure> {
        match &self.betas {
            None => Ok(cube_directions()),
            Some(list) => list
                .iter()
                .map(|&b| {
                    let norm = vec3::norm(b);
                    if !(norm > 0.0 && norm.is_finite()) {
                        return Err(Failure::config(format!(
                            "betas: {b:?} is not a usable direction"
                        )));
                    }
                    Ok(vec3::normalized(b))
                })
                .collect(),
        }
    }

    pub fn probes(&self, domain: &BoxDomain) -> Vec<Vec3> {
        match &self.probes {
            Some(list) => list.clone(),
            None => probe_sphere(domain.center(), 3.0 * domain.diameter()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig, Failure> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Failure::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    const MINIMAL: &str = r#"{
        "domain": { "lo": [0.0, 0.0, 0.0], "hi": [1.0, 1.0, 1.0], "grid_shape": [4, 4, 4] },
        "k": 1.0
    }"#;

    #[test]
    fn minimal_config_gets_the_documented_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        let medium = cfg.medium().unwrap();
        assert!(medium.is_vacuum());
        assert_eq!(medium.alpha(), [0.0, 0.0, 1.0]);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.betas().unwrap().len(), 26);
        let probes = cfg.probes(medium.domain());
        assert_eq!(probes.len(), 26);
        let r = 3.0 * medium.domain().diameter();
        for p in probes {
            let d = vec3::dist(p, medium.domain().center());
            assert!((d - r).abs() < 1e-12);
        }
        assert!(cfg.target_p(&medium).unwrap().is_none());
        assert!(cfg.required_target(&medium).is_err());
    }

    #[test]
    fn alpha_is_normalized_and_zero_is_rejected() {
        let cfg = parse(&MINIMAL.replace("\"k\": 1.0", "\"k\": 1.0, \"alpha\": [0.0, 0.0, 2.0]"))
            .unwrap();
        assert_eq!(cfg.medium().unwrap().alpha(), [0.0, 0.0, 1.0]);

        let cfg = parse(&MINIMAL.replace("\"k\": 1.0", "\"k\": 1.0, \"alpha\": [0.0, 0.0, 0.0]"))
            .unwrap();
        let err = cfg.medium().unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("alpha"));
    }

    #[test]
    fn target_n_turns_into_the_potential_perturbation() {
        let text = MINIMAL.replace("\"k\": 1.0", "\"k\": 2.0, \"target_n\": -1.0");
        let cfg = parse(&text).unwrap();
        let medium = cfg.medium().unwrap();
        // p = k^2 (n0 - n) = 4 * (1 - (-1)) = 8
        let p = cfg.required_target(&medium).unwrap();
        for v in p.values() {
            assert!((v - Complex64::new(8.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn field_spec_accepts_scalars_pairs_and_cell_lists() {
        let text = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"n0\": 1.2, \"target_p\": [0.5, -0.25]",
        );
        let cfg = parse(&text).unwrap();
        let medium = cfg.medium().unwrap();
        assert!(!medium.is_vacuum());
        let p = cfg.required_target(&medium).unwrap();
        assert!((p.values()[0] - Complex64::new(0.5, -0.25)).norm() < 1e-15);

        let cells: Vec<[f64; 2]> = (0..64).map(|i| [i as f64, 0.0]).collect();
        let text = MINIMAL.replace(
            "\"k\": 1.0",
            &format!("\"k\": 1.0, \"target_p\": {}", serde_json::to_string(&cells).unwrap()),
        );
        let cfg = parse(&text).unwrap();
        let medium = cfg.medium().unwrap();
        let p = cfg.required_target(&medium).unwrap();
        assert_eq!(p.values()[63], Complex64::new(63.0, 0.0));

        let text = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"target_p\": [[1.0, 0.0], [2.0, 0.0]]",
        );
        let cfg = parse(&text).unwrap();
        let medium = cfg.medium().unwrap();
        let err = cfg.required_target(&medium).unwrap_err();
        assert!(err.message.contains("2 cell values"), "{}", err.message);
    }

    #[test]
    fn unknown_presets_point_at_the_one_that_exists() {
        let text = MINIMAL.replace("\"k\": 1.0", "\"k\": 1.0, \"n0\": \"air\"");
        let cfg = parse(&text).unwrap();
        let err = cfg.medium().unwrap_err();
        assert!(err.message.contains("vacuum"), "{}", err.message);
    }

    #[test]
    fn conflicting_targets_are_rejected() {
        let text = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"target_n\": -1.0, \"target_p\": 2.0",
        );
        let err = parse(&text).unwrap_err();
        assert!(err.message.contains("pick one"), "{}", err.message);
    }

    #[test]
    fn schedules_must_move_in_the_right_direction() {
        let ok = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"schedule\": { \"m_targets\": [10, 20, 40] }",
        );
        assert!(parse(&ok).is_ok());

        let flat = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"schedule\": { \"m_targets\": [10, 10] }",
        );
        assert!(parse(&flat).unwrap_err().message.contains("increasing"));

        let rising = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"schedule\": { \"radii\": [0.01, 0.02] }",
        );
        assert!(parse(&rising).unwrap_err().message.contains("decreasing"));

        let negative = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"schedule\": { \"radii\": [0.01, -0.005] }",
        );
        assert!(parse(&negative).unwrap_err().message.contains("positive"));
    }

    #[test]
    fn beta_rows_are_normalized() {
        let text = MINIMAL.replace(
            "\"k\": 1.0",
            "\"k\": 1.0, \"betas\": [[2.0, 0.0, 0.0], [0.0, 3.0, 4.0]]",
        );
        let cfg = parse(&text).unwrap();
        let betas = cfg.betas().unwrap();
        assert_eq!(betas[0], [1.0, 0.0, 0.0]);
        assert!((vec3::norm(betas[1]) - 1.0).abs() < 1e-15);

        let text = MINIMAL.replace("\"k\": 1.0", "\"k\": 1.0, \"betas\": [[0.0, 0.0, 0.0]]");
        assert!(parse(&text).unwrap().betas().is_err());
    }
}
