//! Flat `key = value` text files with dotted section keys.
//!
//! Used for run configuration and for trial metadata sidecars. Lines
//! starting with `#` and blank lines are ignored; keys are unique.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::cross_section::{BeamSpec, SectionGeometry};
use crate::elastica::{log_kappa_grid, SolverConfig};
use crate::error::{Error, Result};
use crate::estimator::EstimatorConfig;
use crate::fbg::{GratingLayout, GLUED_STRAIN_COEFFICIENT, TEMPERATURE_COEFFICIENT};
use crate::io::fmt_exact;
use crate::trials::{Protocol, TissueSpec, DEFAULT_TIP_RADIUS};

/// Values that can be stored in a [`KeyValues`] map.
pub trait KvValue {
    fn to_kv(&self) -> String;
}

impl KvValue for f64 {
    fn to_kv(&self) -> String {
        fmt_exact(*self)
    }
}

macro_rules! kv_display {
    ($($t:ty),*) => {$(
        impl KvValue for $t {
            fn to_kv(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
kv_display!(usize, u64, u32, bool, &str, String);

/// Ordered key-value map.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
        && !key.starts_with('.')
        && !key.ends_with('.')
}

impl KeyValues {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::Parse { path: path.to_path_buf(), line: i as u64 + 1, reason };
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(err(format!("invalid key `{key}`")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(KeyValues { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl KvValue) {
        self.entries.insert(key.to_string(), value.to_kv());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.get(key).ok_or_else(|| Error::config(key, "missing"))?;
        parse_f64(key, raw)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let raw = self.get(key).ok_or_else(|| Error::config(key, "missing"))?;
        raw.parse().map_err(|_| Error::config(key, format!("`{raw}` is not a non-negative integer")))
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw.parse().map_err(|_| Error::config(key, format!("`{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::config(key, "must be finite"));
    }
    Ok(v)
}

/// Typed access that remembers which keys were consumed.
struct Reader<'a> {
    kv: &'a KeyValues,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Reader<'a> {
    fn new(kv: &'a KeyValues) -> Self {
        Reader { kv, used: RefCell::new(BTreeSet::new()) }
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.used.borrow_mut().insert(key.to_string());
        self.kv.get(key)
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let raw = self.raw(key).ok_or_else(|| Error::config(key, "required key is missing"))?;
        parse_f64(key, raw)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.raw(key).map_or(Ok(default), |raw| parse_f64(key, raw))
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|raw| parse_f64(key, raw)).transpose()
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64> {
        let v = match default {
            Some(d) => self.f64_or(key, d)?,
            None => self.f64(key)?,
        };
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::config(key, format!("must be positive, got {v}")))
        }
    }

    fn uint<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| Error::config(key, format!("`{raw}` is not a non-negative integer"))),
        }
    }

    fn opt_uint<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|raw| raw.parse().map_err(|_| Error::config(key, format!("`{raw}` is not a non-negative integer"))))
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key).ok_or_else(|| Error::config(key, "required key is missing"))?;
        raw.split(',').map(|item| parse_f64(key, item.trim())).collect()
    }

    fn unused(&self) -> Option<String> {
        let used = self.used.borrow();
        self.kv.keys().find(|k| !used.contains(*k)).map(str::to_string)
    }
}

/// Grating positions and calibration, independent of beam length.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub first_peak_start: f64,
    pub pitch: f64,
    pub grating_length: f64,
    pub peaks: usize,
    pub k_eps: f64,
    pub s_t: f64,
}

impl LayoutParams {
    pub fn layout_for(&self, beam: &BeamSpec) -> Result<GratingLayout> {
        GratingLayout::evenly_spaced(
            self.first_peak_start,
            self.pitch,
            self.grating_length,
            self.peaks,
            self.k_eps,
            self.s_t,
            beam.offsets.dy_fbg,
        )
    }
}

/// Estimator knobs as written in the config; `nu` may come from trace metadata instead.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorParams {
    pub contact_force_threshold: f64,
    pub strain_norm_threshold: Option<f64>,
    pub contact_index_override: Option<usize>,
    pub outlier_cap: f64,
    pub confirm_displacement: f64,
    pub nu: Option<f64>,
    pub r_tip: f64,
}

impl EstimatorParams {
    /// Resolves the config for traces recorded with the given layout and noise.
    pub fn resolve(&self, nu: f64, layout: &GratingLayout, noise_pm: f64) -> Result<EstimatorConfig> {
        let threshold = self
            .strain_norm_threshold
            .unwrap_or_else(|| EstimatorConfig::default_strain_threshold(noise_pm, layout.k_eps));
        let mut cfg = EstimatorConfig::new(nu, threshold)?;
        cfg.contact_force_threshold = self.contact_force_threshold;
        cfg.contact_index_override = self.contact_index_override;
        cfg.outlier_cap = self.outlier_cap;
        cfg.confirm_displacement = self.confirm_displacement;
        cfg.r_tip = self.r_tip;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTissue {
    pub name: String,
    pub spec: TissueSpec,
}

/// Everything a CLI run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub section: SectionGeometry,
    /// Free beam lengths (m).
    pub lengths: Vec<f64>,
    pub layout: LayoutParams,
    pub solver: SolverConfig,
    pub kappa_grid: Vec<f64>,
    pub tissues: Vec<NamedTissue>,
    /// Protocol without the seed; trials derive their own seeds.
    pub protocol: Protocol,
    pub estimator: EstimatorParams,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::load(path)?)
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let r = Reader::new(kv);

        let section = SectionGeometry {
            r_fbg: r.positive("beam.r_fbg_m", None)?,
            r_wire: r.positive("beam.r_wire_m", None)?,
            n_wires: r.uint("beam.n_wires", 4u32)?,
            e_fbg: r.positive("beam.e_fbg_pa", None)?,
            e_wire: r.positive("beam.e_wire_pa", None)?,
        };
        if section.n_wires == 0 {
            return Err(Error::config("beam.n_wires", "must be at least 1"));
        }
        let lengths: Vec<f64> = r.list("beam.lengths_mm")?.into_iter().map(|mm| mm * 1e-3).collect();
        if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::config("beam.lengths_mm", "lengths must be positive"));
        }

        let layout = LayoutParams {
            first_peak_start: r.f64_or("layout.first_peak_start_mm", 6.0)? * 1e-3,
            pitch: r.positive("layout.pitch_mm", Some(8.0))? * 1e-3,
            grating_length: r.positive("layout.grating_length_mm", Some(5.0))? * 1e-3,
            peaks: r.uint("layout.peaks", 3usize)?,
            k_eps: r.positive("layout.k_eps_pm_per_microstrain", Some(GLUED_STRAIN_COEFFICIENT))?,
            s_t: r.f64_or("layout.s_t_pm_per_degc", TEMPERATURE_COEFFICIENT)?,
        };
        if layout.peaks < 3 {
            return Err(Error::config("layout.peaks", "at least three gratings are needed for buckling detection"));
        }

        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            step: r.positive("solver.step", Some(defaults.step))?,
            tolerance: r.positive("solver.tolerance", Some(defaults.tolerance))?,
            bracket: (
                r.positive("solver.slope0_low", Some(defaults.bracket.0))?,
                r.positive("solver.slope0_high", Some(defaults.bracket.1))?,
            ),
            max_slope0: r.positive("solver.slope0_max", Some(defaults.max_slope0))?,
            t_max: r.positive("solver.t_max", Some(defaults.t_max))?,
            max_iterations: r.uint("solver.max_iterations", defaults.max_iterations)?,
            min_intervals: r.uint("solver.min_intervals", defaults.min_intervals)?,
        };
        solver.validate().map_err(|e| Error::config("solver", e.to_string()))?;
        let kappa_grid = log_kappa_grid(
            r.positive("solver.kappa_min", Some(2.0))?,
            r.positive("solver.kappa_max", Some(500.0))?,
            r.uint("solver.kappa_points", 64usize)?,
        )
        .map_err(|e| Error::config("solver.kappa_points", e.to_string()))?;

        let mut names: Vec<String> = kv
            .keys()
            .filter_map(|k| k.strip_prefix("tissue."))
            .filter_map(|rest| rest.split_once('.').map(|(name, _)| name.to_string()))
            .collect();
        names.dedup();
        let mut tissues = Vec::with_capacity(names.len());
        for name in names {
            let key = |field: &str| format!("tissue.{name}.{field}");
            let e_t = r.positive(&key("e_pa"), None)?;
            let nu = r.f64(&key("nu"))?;
            let r_tip = r.positive(&key("r_tip_m"), Some(DEFAULT_TIP_RADIUS))?;
            let spec = TissueSpec::new(e_t, nu, r_tip).map_err(|e| Error::config(key("nu"), e.to_string()))?;
            tissues.push(NamedTissue { name, spec });
        }

        let protocol = Protocol {
            step: r.positive("protocol.step_m", Some(10e-6))?,
            travel: r.positive("protocol.travel_m", Some(8e-3))?,
            contact_position: r.f64_or("protocol.contact_m", 1e-3)?,
            noise_pm: r.f64_or("protocol.noise_pm", 0.0)?,
            seed: 0,
        };
        protocol.validate().map_err(|e| Error::config("protocol", e.to_string()))?;

        let estimator = EstimatorParams {
            contact_force_threshold: r.positive("estimator.contact_force_n", Some(1e-3))?,
            strain_norm_threshold: r.opt_f64("estimator.strain_norm_threshold")?,
            contact_index_override: r.opt_uint("estimator.contact_index")?,
            outlier_cap: r.positive("estimator.outlier_cap_pa", Some(3e6))?,
            confirm_displacement: r.positive("estimator.confirm_displacement_m", Some(2e-3))?,
            nu: r.opt_f64("estimator.nu")?,
            r_tip: r.positive("estimator.r_tip_m", Some(DEFAULT_TIP_RADIUS))?,
        };
        if let Some(t) = estimator.strain_norm_threshold {
            if !(t > 0.0) {
                return Err(Error::config("estimator.strain_norm_threshold", "must be positive"));
            }
        }

        let output_dir = r.raw("output.dir").map(PathBuf::from);
        let seed = r.uint("seed", 0u64)?;

        if let Some(key) = r.unused() {
            return Err(Error::config(key, "unknown key"));
        }

        Ok(RunConfig {
            section,
            lengths,
            layout,
            solver,
            kappa_grid,
            tissues,
            protocol,
            estimator,
            output_dir,
            seed,
        })
    }

    pub fn beams(&self) -> Result<Vec<BeamSpec>> {
        self.lengths.iter().map(|l| BeamSpec::new(self.section, *l)).collect()
    }
}
