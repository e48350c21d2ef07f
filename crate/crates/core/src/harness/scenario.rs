//! TOML-backed run descriptions.
//!
//! A scenario file pins everything a run needs: grid, network source,
//! dynamics knobs, and an initial-data recipe. Files are strict: unknown
//! keys are rejected so typos fail loudly instead of silently using a
//! default.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::grid::{FieldState, SpatialGrid};
use crate::network::{builtin_nonlinearity, parse_network, NonlinearitySpec};
use crate::solver::{CutoffPhi, DiffusionVector, SimConfig};

use super::HarnessError;

/// One complete run description, as read from a scenario file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridSpec,
    pub network: NetworkSource,
    pub dynamics: DynamicsSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory the scenario file was loaded from; relative network file
    /// paths resolve against it.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lengths: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Exactly one of the three fields must be set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSource {
    pub inline: Option<String>,
    pub file: Option<String>,
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    pub diffusion: Vec<f64>,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default)]
    pub rescale_by_dmin: bool,
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    pub truncation_radius: Option<f64>,
    pub shift: Option<Vec<f64>>,
    pub entropy_reference: Option<Vec<f64>>,
    #[serde(default)]
    pub store_fields: bool,
}

fn default_stride() -> usize {
    1
}

fn default_ceiling() -> f64 {
    1e8
}

/// Initial-data recipe. `kind` selects the generator; the other fields are
/// read by the matching generator and must be absent otherwise.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub kind: String,
    /// constant: one value per species.
    pub values: Option<Vec<f64>>,
    /// bumps: baseline per species, default zero.
    pub offsets: Option<Vec<f64>>,
    /// bumps: peak height per species, may be negative.
    pub amplitudes: Option<Vec<f64>>,
    /// bumps: per species, one coordinate per axis.
    pub centers: Option<Vec<Vec<f64>>>,
    /// bumps: gaussian width per species.
    pub widths: Option<Vec<f64>>,
    /// random: inclusive lower bound.
    pub lo: Option<f64>,
    /// random: exclusive upper bound.
    pub hi: Option<f64>,
    /// random: stream seed.
    pub seed: Option<u64>,
    /// Rescale each species so its spatial average lands on the target.
    pub normalize_averages: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Write a full field snapshot every k-th sample (0 writes only the
    /// final state). Needs `store_fields` for the intermediate snapshots.
    #[serde(default)]
    pub fields_stride: usize,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Toml {
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut scenario = Scenario::from_toml_str(&text)?;
        scenario.base_dir = path.parent().map(|p| p.to_path_buf());
        Ok(scenario)
    }

    /// Look `arg` up as a file path first, then as a shipped scenario name.
    pub fn resolve(arg: &str) -> Result<Self, HarnessError> {
        let path = Path::new(arg);
        if path.is_file() {
            return Scenario::load(path);
        }
        match shipped_scenario(arg) {
            Some(text) => Scenario::from_toml_str(text),
            None => Err(HarnessError::UnknownScenario(arg.to_string())),
        }
    }

    /// Assemble the solver configuration this scenario describes.
    pub fn build(&self) -> Result<SimConfig, HarnessError> {
        let grid = SpatialGrid::new(self.grid.lengths.clone(), self.grid.counts.clone())?;
        let nonlinearity = self.network.build(self.base_dir.as_deref())?;
        let m = nonlinearity.species_count();
        let dyn_ = &self.dynamics;
        if dyn_.diffusion.len() != m {
            return Err(HarnessError::Invalid(format!(
                "{} diffusion coefficients for {} species",
                dyn_.diffusion.len(),
                m
            )));
        }
        let diffusion = DiffusionVector::new(dyn_.diffusion.clone())?;
        let fields = self.initial.build(&grid, m)?;
        let mut config = SimConfig::new(
            grid,
            nonlinearity,
            diffusion,
            FieldState::new(fields),
            dyn_.dt,
            dyn_.t_end,
        );
        config.sample_stride = dyn_.sample_stride;
        config.rescale_by_dmin = dyn_.rescale_by_dmin;
        config.ceiling = dyn_.ceiling;
        config.store_fields = dyn_.store_fields || self.output.fields_stride > 0;
        if let Some(r) = dyn_.truncation_radius {
            config.truncation = Some(CutoffPhi::new(r)?);
        }
        if let Some(shift) = &dyn_.shift {
            if shift.len() != m {
                return Err(HarnessError::Invalid(format!(
                    "shift has {} entries for {} species",
                    shift.len(),
                    m
                )));
            }
            config.shift = Some(shift.clone());
        }
        if let Some(reference) = &dyn_.entropy_reference {
            if reference.len() != m {
                return Err(HarnessError::Invalid(format!(
                    "entropy_reference has {} entries for {} species",
                    reference.len(),
                    m
                )));
            }
            config.entropy_reference = Some(reference.clone());
        }
        Ok(config)
    }
}

impl NetworkSource {
    pub fn build(&self, base_dir: Option<&Path>) -> Result<NonlinearitySpec, HarnessError> {
        let set = [&self.inline, &self.file, &self.builtin]
            .iter()
            .filter(|o| o.is_some())
            .count();
        if set != 1 {
            return Err(HarnessError::Invalid(
                "network needs exactly one of inline, file, builtin".to_string(),
            ));
        }
        if let Some(text) = &self.inline {
            return Ok(NonlinearitySpec::MassAction(parse_network(text)?));
        }
        if let Some(file) = &self.file {
            let mut path = PathBuf::from(file);
            if path.is_relative() {
                if let Some(base) = base_dir {
                    path = base.join(path);
                }
            }
            let text = fs::read_to_string(&path).map_err(|e| HarnessError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            return Ok(NonlinearitySpec::MassAction(parse_network(&text)?));
        }
        let name = self.builtin.as_ref().unwrap();
        Ok(NonlinearitySpec::Builtin(builtin_nonlinearity(name)?))
    }
}

impl InitialSpec {
    pub fn build(&self, grid: &SpatialGrid, m: usize) -> Result<Vec<Vec<f64>>, HarnessError> {
        let mut fields = match self.kind.as_str() {
            "constant" => {
                let values = self
                    .values
                    .as_ref()
                    .ok_or_else(|| missing("constant", "values"))?;
                expect_len("values", values.len(), m)?;
                constant_fields(grid, values)
            }
            "bumps" => {
                let amplitudes = self
                    .amplitudes
                    .as_ref()
                    .ok_or_else(|| missing("bumps", "amplitudes"))?;
                let centers = self
                    .centers
                    .as_ref()
                    .ok_or_else(|| missing("bumps", "centers"))?;
                let widths = self
                    .widths
                    .as_ref()
                    .ok_or_else(|| missing("bumps", "widths"))?;
                let zeros = vec![0.0; m];
                let offsets = self.offsets.as_deref().unwrap_or(&zeros);
                expect_len("amplitudes", amplitudes.len(), m)?;
                expect_len("centers", centers.len(), m)?;
                expect_len("widths", widths.len(), m)?;
                expect_len("offsets", offsets.len(), m)?;
                bump_fields(grid, offsets, amplitudes, centers, widths)?
            }
            "random" => {
                let lo = self.lo.ok_or_else(|| missing("random", "lo"))?;
                let hi = self.hi.ok_or_else(|| missing("random", "hi"))?;
                let seed = self.seed.ok_or_else(|| missing("random", "seed"))?;
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(HarnessError::Invalid(format!(
                        "random bounds lo={lo} hi={hi} are not an interval"
                    )));
                }
                random_fields(grid, m, lo, hi, seed)
            }
            other => {
                return Err(HarnessError::Invalid(format!(
                    "unknown initial kind '{other}' (expected constant, bumps, or random)"
                )))
            }
        };
        if let Some(targets) = &self.normalize_averages {
            expect_len("normalize_averages", targets.len(), m)?;
            normalize_averages(grid, &mut fields, targets)?;
        }
        Ok(fields)
    }
}

fn missing(kind: &str, field: &str) -> HarnessError {
    HarnessError::Invalid(format!("initial kind '{kind}' needs '{field}'"))
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<(), HarnessError> {
    if got != want {
        return Err(HarnessError::Invalid(format!(
            "{what} has {got} entries for {want} species"
        )));
    }
    Ok(())
}

/// Spatially constant data, one value per species.
pub fn constant_fields(grid: &SpatialGrid, values: &[f64]) -> Vec<Vec<f64>> {
    values
        .iter()
        .map(|&v| vec![v; grid.node_count()])
        .collect()
}

/// One gaussian bump per species on a flat baseline:
/// `offset + amplitude * exp(-sum_a ((x_a - c_a) / width)^2)`.
pub fn bump_fields(
    grid: &SpatialGrid,
    offsets: &[f64],
    amplitudes: &[f64],
    centers: &[Vec<f64>],
    widths: &[f64],
) -> Result<Vec<Vec<f64>>, HarnessError> {
    let n = grid.node_count();
    let mut fields = Vec::with_capacity(offsets.len());
    for i in 0..offsets.len() {
        if !(widths[i] > 0.0) {
            return Err(HarnessError::Invalid(format!(
                "bump width {} for species {} must be positive",
                widths[i], i
            )));
        }
        if centers[i].len() != grid.dim() {
            return Err(HarnessError::Invalid(format!(
                "bump center for species {} has {} coordinates on a {}-dimensional grid",
                i,
                centers[i].len(),
                grid.dim()
            )));
        }
        let mut field = vec![0.0; n];
        for (j, value) in field.iter_mut().enumerate() {
            let x = grid.node_position(j);
            let mut arg = 0.0;
            for (a, &xa) in x.iter().enumerate() {
                let s = (xa - centers[i][a]) / widths[i];
                arg += s * s;
            }
            *value = offsets[i] + amplitudes[i] * (-arg).exp();
        }
        fields.push(field);
    }
    Ok(fields)
}

/// Independent uniform draws in `[lo, hi)` per node, one seeded stream for
/// the whole state so the data is reproducible.
pub fn random_fields(grid: &SpatialGrid, m: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.node_count();
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

/// Rescale each species so its spatial average equals the target exactly up
/// to roundoff. Multiplicative, so sign and shape are preserved.
pub fn normalize_averages(
    grid: &SpatialGrid,
    fields: &mut [Vec<f64>],
    targets: &[f64],
) -> Result<(), HarnessError> {
    for (i, field) in fields.iter_mut().enumerate() {
        let avg = grid.spatial_average(field);
        if avg == targets[i] {
            continue;
        }
        if avg.abs() < 1e-12 {
            return Err(HarnessError::Invalid(format!(
                "species {i} averages {avg}, too close to zero to rescale"
            )));
        }
        let scale = targets[i] / avg;
        for v in field.iter_mut() {
            *v *= scale;
        }
    }
    Ok(())
}

const SHIPPED: &[(&str, &str)] = &[
    (
        "mass-dissipation-smoke",
        include_str!("../../../../scenarios/mass-dissipation-smoke.toml"),
    ),
    (
        "averages-collapse",
        include_str!("../../../../scenarios/averages-collapse.toml"),
    ),
    (
        "complex-balance-cycle",
        include_str!("../../../../scenarios/complex-balance-cycle.toml"),
    ),
    (
        "small-data-builtin",
        include_str!("../../../../scenarios/small-data-builtin.toml"),
    ),
    (
        "close-to-equilibrium",
        include_str!("../../../../scenarios/close-to-equilibrium.toml"),
    ),
    (
        "two-dim-relaxation",
        include_str!("../../../../scenarios/two-dim-relaxation.toml"),
    ),
];

pub fn shipped_scenario_names() -> Vec<&'static str> {
    SHIPPED.iter().map(|(name, _)| *name).collect()
}

pub fn shipped_scenario(name: &str) -> Option<&'static str> {
    SHIPPED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
        name = "demo"
        description = "round trip"

        [grid]
        lengths = [1.0]
        counts = [16]

        [network]
        inline = "A + B -> C @ 1.0"

        [dynamics]
        diffusion = [1.0, 2.0, 0.5]
        dt = 1e-3
        t_end = 0.01
        sample_stride = 2
        truncation_radius = 10.0
        entropy_reference = [1.0, 1.0, 1.0]

        [initial]
        kind = "random"
        lo = 0.5
        hi = 1.5
        seed = 7
    "#;

    #[test]
    fn full_scenario_parses_and_builds() {
        let scenario = Scenario::from_toml_str(FULL).unwrap();
        assert_eq!(scenario.name, "demo");
        let config = scenario.build().unwrap();
        assert_eq!(config.nonlinearity.species_count(), 3);
        assert_eq!(config.sample_stride, 2);
        assert!(config.truncation.is_some());
        assert_eq!(config.initial.fields.len(), 3);
        let traj = crate::solver::simulate(&config).unwrap();
        assert!(!traj.blew_up);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = FULL.replace("description", "descriptoin");
        let err = Scenario::from_toml_str(&bad).unwrap_err();
        assert!(matches!(err, HarnessError::Toml { .. }));
    }

    #[test]
    fn network_source_must_be_unique() {
        let bad = FULL.replace(
            "inline = \"A + B -> C @ 1.0\"",
            "inline = \"A -> B @ 1.0\"\nbuiltin = \"remark-1-4\"",
        );
        let scenario = Scenario::from_toml_str(&bad).unwrap();
        let err = scenario.build().unwrap_err();
        assert!(matches!(err, HarnessError::Invalid(_)));
    }

    #[test]
    fn diffusion_length_mismatch_is_rejected() {
        let bad = FULL.replace("[1.0, 2.0, 0.5]", "[1.0, 2.0]");
        let scenario = Scenario::from_toml_str(&bad).unwrap();
        assert!(scenario.build().is_err());
    }

    #[test]
    fn bumps_normalize_to_exact_averages() {
        let grid = SpatialGrid::new(vec![1.0], vec![64]).unwrap();
        let mut fields = bump_fields(
            &grid,
            &[1.0, 1.0],
            &[0.4, -0.3],
            &[vec![0.3], vec![0.7]],
            &[0.1, 0.12],
        )
        .unwrap();
        normalize_averages(&grid, &mut fields, &[1.2, 0.9]).unwrap();
        assert!((grid.spatial_average(&fields[0]) - 1.2).abs() < 1e-14);
        assert!((grid.spatial_average(&fields[1]) - 0.9).abs() < 1e-14);
        // shape survives: still a bump over a baseline
        let max = fields[0].iter().cloned().fold(f64::MIN, f64::max);
        let min = fields[0].iter().cloned().fold(f64::MAX, f64::min);
        assert!(max > min + 0.2);
    }

    #[test]
    fn random_fields_are_reproducible() {
        let grid = SpatialGrid::new(vec![1.0], vec![32]).unwrap();
        let a = random_fields(&grid, 2, 0.0, 2.0, 9);
        let b = random_fields(&grid, 2, 0.0, 2.0, 9);
        let c = random_fields(&grid, 2, 0.0, 2.0, 10);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a[0].iter().all(|&v| (0.0..2.0).contains(&v)));
    }

    #[test]
    fn normalization_rejects_zero_average() {
        let grid = SpatialGrid::new(vec![1.0], vec![8]).unwrap();
        let mut fields = vec![vec![0.0; 8]];
        assert!(normalize_averages(&grid, &mut fields, &[1.0]).is_err());
    }

    #[test]
    fn shipped_scenarios_parse_and_build() {
        for name in shipped_scenario_names() {
            let scenario = Scenario::resolve(name).unwrap();
            assert_eq!(scenario.name, name);
            scenario.build().unwrap();
        }
    }

    #[test]
    fn unknown_scenario_name_errors() {
        let err = Scenario::resolve("no-such-scenario").unwrap_err();
        assert!(matches!(err, HarnessError::UnknownScenario(_)));
    }
}
