//! Synthetic indentation trials against virtual tissue.
//!
//! A trial advances the beam in fixed encoder steps. Before contact nothing
//! happens. After contact the spherical tip sinks into the tissue with the
//! Hertz force `P = (4/3)·E_t·√(δ³·R_tip)/(1 − ν²)` while the beam stays
//! straight (it is taken as axially rigid). Once `P` reaches the critical
//! load the indentation freezes at `δᵢ` and any further advance becomes
//! end-shortening of the buckled beam; forces and grating strains then come
//! from the solved post-buckling branch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::KeyValues;
use crate::cross_section::BeamSpec;
use crate::elastica::{denormalize, solve_normalized, SolverConfig};
use crate::error::{Error, Result};
use crate::fbg::{peak_strains, wavelength_shift, GratingLayout};
use crate::parallel::{map_ordered, Execution};

/// Radius of the spherical tip (m).
pub const DEFAULT_TIP_RADIUS: f64 = 3.5e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TissueSpec {
    /// Young's modulus (Pa).
    pub e_t: f64,
    /// Poisson's ratio, `0 ≤ ν ≤ 0.5`.
    pub nu: f64,
    /// Indenter sphere radius (m).
    pub r_tip: f64,
}

impl TissueSpec {
    pub fn new(e_t: f64, nu: f64, r_tip: f64) -> Result<Self> {
        if !(e_t > 0.0) || !e_t.is_finite() {
            return Err(Error::invalid(format!("tissue modulus must be positive, got {e_t}")));
        }
        if !(0.0..=0.5).contains(&nu) {
            return Err(Error::invalid(format!("Poisson's ratio must lie in [0, 0.5], got {nu}")));
        }
        if !(r_tip > 0.0) {
            return Err(Error::invalid(format!("tip radius must be positive, got {r_tip}")));
        }
        Ok(TissueSpec { e_t, nu, r_tip })
    }

    pub fn with_default_tip(e_t: f64, nu: f64) -> Result<Self> {
        Self::new(e_t, nu, DEFAULT_TIP_RADIUS)
    }
}

/// Hertz force of a rigid sphere pressed `delta` into an elastic half-space.
pub fn hertz_force(tissue: &TissueSpec, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("indentation must be non-negative, got {delta}")));
    }
    let denom = 1.0 - tissue.nu * tissue.nu;
    if denom <= 0.0 {
        return Err(Error::invalid(format!("Poisson's ratio {} makes 1 - nu^2 vanish", tissue.nu)));
    }
    Ok(4.0 / 3.0 * tissue.e_t * (delta.powi(3) * tissue.r_tip).sqrt() / denom)
}

/// Depth at which the Hertz force reaches `force`.
pub fn indentation_at_force(tissue: &TissueSpec, force: f64) -> Result<f64> {
    if !(force >= 0.0) {
        return Err(Error::invalid(format!("force must be non-negative, got {force}")));
    }
    let denom = 1.0 - tissue.nu * tissue.nu;
    if denom <= 0.0 {
        return Err(Error::invalid(format!("Poisson's ratio {} makes 1 - nu^2 vanish", tissue.nu)));
    }
    Ok((3.0 * force * denom / (4.0 * tissue.e_t * tissue.r_tip.sqrt())).powf(2.0 / 3.0))
}

/// Axial load and per-grating strains at one end-shortening.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardKnot {
    pub kappa: f64,
    pub end_shortening: f64,
    pub p: f64,
    pub strains: Vec<f64>,
}

/// Tabulated post-buckling response of one beam and grating layout.
///
/// The first knot is the bifurcation point itself (zero end-shortening,
/// critical load, zero strain); the rest are solved branch points.
/// Queries interpolate linearly between knots.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub beam: BeamSpec,
    pub layout: GratingLayout,
    pub knots: Vec<ForwardKnot>,
}

impl ForwardModel {
    pub fn build(
        beam: &BeamSpec,
        layout: &GratingLayout,
        kappa_grid: &[f64],
        cfg: &SolverConfig,
        exec: Execution,
    ) -> Result<Self> {
        layout.check_fits(beam.length)?;
        let solved = map_ordered(exec, kappa_grid, |&kappa| {
            let sol = denormalize(&solve_normalized(kappa, cfg)?, beam)?;
            let strains = peak_strains(&sol, layout)?;
            Ok::<_, Error>(ForwardKnot { kappa, end_shortening: sol.end_shortening, p: sol.p, strains })
        });
        let mut knots = vec![ForwardKnot {
            kappa: f64::INFINITY,
            end_shortening: 0.0,
            p: beam.critical_load(),
            strains: vec![0.0; layout.len()],
        }];
        // unsolvable tail points are dropped; the curve command reports them
        knots.extend(solved.into_iter().filter_map(|k| k.ok()));
        knots.sort_by(|a, b| a.end_shortening.total_cmp(&b.end_shortening));
        if knots.len() < 2 {
            return Err(Error::NoBuckledSolution { kappa: f64::NAN, reason: "no branch point solved".into() });
        }
        Ok(ForwardModel { beam: *beam, layout: layout.clone(), knots })
    }

    pub fn max_end_shortening(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.end_shortening)
    }

    /// Axial load and grating strains at end-shortening `e`.
    pub fn at(&self, e: f64) -> Result<(f64, Vec<f64>)> {
        let max = self.max_end_shortening();
        if !(e >= 0.0 && e <= max) {
            let nearest = if e < 0.0 { 0.0 } else { max };
            return Err(Error::OutOfRange { query: e, min: 0.0, max, nearest });
        }
        let idx = self.knots.partition_point(|k| k.end_shortening < e).max(1);
        let (a, b) = (&self.knots[idx - 1], &self.knots[idx]);
        let w = (e - a.end_shortening) / (b.end_shortening - a.end_shortening);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        let strains = a.strains.iter().zip(&b.strains).map(|(x, y)| lerp(*x, *y)).collect();
        Ok((lerp(a.p, b.p), strains))
    }
}

/// Stage motion and interrogator noise for one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    /// Encoder advance per sample (m).
    pub step: f64,
    /// Total encoder travel (m).
    pub travel: f64,
    /// Encoder position at which the tip touches the tissue (m).
    pub contact_position: f64,
    /// Standard deviation of additive Gaussian noise on each Δλ channel (pm).
    pub noise_pm: f64,
    pub seed: u64,
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.travel > self.step) || !(self.contact_position >= 0.0) || !(self.noise_pm >= 0.0)
        {
            return Err(Error::invalid(format!("bad protocol {self:?}")));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.travel / self.step + 1e-9).floor() as usize + 1
    }

    pub fn encoder(&self, k: usize) -> f64 {
        k as f64 * self.step
    }
}

/// How the free beam length relates to the encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExposedLength {
    /// Clamp and stage move together (bench-top).
    Fixed(f64),
    /// The beam is pushed out of a tube: exposed length is the initial
    /// length plus encoder travel since the first sample.
    Advancing { initial: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub index: usize,
    /// Encoder position (m).
    pub encoder: f64,
    /// Per-peak Bragg wavelength shift (pm).
    pub d_lambda: Vec<f64>,
    /// Vertical force (N), when measured.
    pub force: Option<f64>,
}

/// Time-ordered record of one indentation trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTrace {
    pub samples: Vec<TraceSample>,
    pub length: ExposedLength,
    /// Identifiers and, for synthetic trials, ground truth.
    pub meta: KeyValues,
}

impl TrialTrace {
    pub fn validate(&self, peaks: usize) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::invalid("trace has no samples"));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if s.d_lambda.len() != peaks {
                return Err(Error::invalid(format!(
                    "sample {i} has {} wavelength channels, layout has {peaks}",
                    s.d_lambda.len()
                )));
            }
            if i > 0 && !(s.encoder >= self.samples[i - 1].encoder) {
                return Err(Error::invalid(format!("encoder decreases at sample {i}")));
            }
        }
        Ok(())
    }

    pub fn exposed_length_at(&self, i: usize) -> f64 {
        match self.length {
            ExposedLength::Fixed(l) => l,
            ExposedLength::Advancing { initial } => initial + self.samples[i].encoder - self.samples[0].encoder,
        }
    }

    pub fn has_force(&self) -> bool {
        self.samples.iter().any(|s| s.force.is_some())
    }
}

/// Ground truth of a synthetic trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialTruth {
    pub contact_index: usize,
    pub buckling_index: usize,
    pub delta_i: f64,
    pub critical_load: f64,
}

/// Phase boundaries of a trial.
pub fn trial_truth(beam: &BeamSpec, tissue: &TissueSpec, protocol: &Protocol) -> Result<TrialTruth> {
    protocol.validate()?;
    let critical_load = beam.critical_load();
    let delta_i = indentation_at_force(tissue, critical_load)?;
    let n = protocol.samples();
    let first_past = |depth: f64| (0..n).find(|&k| protocol.encoder(k) - protocol.contact_position > depth);
    let contact_index = first_past(0.0).ok_or(Error::IncompleteTrial { phase: "free advance" })?;
    let buckling_index = first_past(delta_i).ok_or(Error::IncompleteTrial { phase: "pre-buckling sink" })?;
    if buckling_index + 1 >= n {
        return Err(Error::IncompleteTrial { phase: "buckling onset" });
    }
    Ok(TrialTruth { contact_index, buckling_index, delta_i, critical_load })
}

/// Synthesizes one trial with a prebuilt forward model.
pub fn simulate_with_model(model: &ForwardModel, tissue: &TissueSpec, protocol: &Protocol) -> Result<TrialTrace> {
    let beam = &model.beam;
    let layout = &model.layout;
    let truth = trial_truth(beam, tissue, protocol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
    let noise = if protocol.noise_pm > 0.0 {
        Some(Normal::new(0.0, protocol.noise_pm).map_err(|e| Error::invalid(e.to_string()))?)
    } else {
        None
    };

    let n = protocol.samples();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let encoder = protocol.encoder(k);
        let depth = encoder - protocol.contact_position;
        let (force, mut d_lambda) = if k < truth.contact_index {
            (0.0, vec![0.0; layout.len()])
        } else if k < truth.buckling_index {
            (hertz_force(tissue, depth)?, vec![0.0; layout.len()])
        } else {
            let (p, strains) = model.at(depth - truth.delta_i)?;
            (p, strains.iter().map(|e| wavelength_shift(*e, 0.0, layout)).collect())
        };
        if let Some(dist) = &noise {
            for dl in d_lambda.iter_mut() {
                *dl += dist.sample(&mut rng);
            }
        }
        samples.push(TraceSample { index: k, encoder, d_lambda, force: Some(force) });
    }

    let mut meta = KeyValues::default();
    meta.set("trial.seed", protocol.seed);
    meta.set("truth.contact_index", truth.contact_index);
    meta.set("truth.buckling_index", truth.buckling_index);
    meta.set("truth.delta_i_m", truth.delta_i);
    meta.set("truth.critical_load_n", truth.critical_load);
    write_beam_meta(&mut meta, beam);
    write_layout_meta(&mut meta, layout);
    meta.set("tissue.e_pa", tissue.e_t);
    meta.set("tissue.nu", tissue.nu);
    meta.set("tissue.r_tip_m", tissue.r_tip);
    meta.set("protocol.step_m", protocol.step);
    meta.set("protocol.travel_m", protocol.travel);
    meta.set("protocol.contact_m", protocol.contact_position);
    meta.set("protocol.noise_pm", protocol.noise_pm);
    meta.set("trace.length_mode", "fixed");
    meta.set("trace.length_m", beam.length);

    Ok(TrialTrace { samples, length: ExposedLength::Fixed(beam.length), meta })
}

fn write_beam_meta(meta: &mut KeyValues, beam: &BeamSpec) {
    meta.set("beam.r_fbg_m", beam.section.r_fbg);
    meta.set("beam.r_wire_m", beam.section.r_wire);
    meta.set("beam.n_wires", beam.section.n_wires);
    meta.set("beam.e_fbg_pa", beam.section.e_fbg);
    meta.set("beam.e_wire_pa", beam.section.e_wire);
    meta.set("beam.length_m", beam.length);
    meta.set("beam.ei_nm2", beam.ei);
    meta.set("beam.dy_fbg_m", beam.offsets.dy_fbg);
}

fn write_layout_meta(meta: &mut KeyValues, layout: &GratingLayout) {
    for (i, (a, b)) in layout.peaks.iter().enumerate() {
        meta.set(&format!("layout.peak{}.start_m", i + 1), *a);
        meta.set(&format!("layout.peak{}.end_m", i + 1), *b);
    }
    meta.set("layout.k_eps_pm_per_microstrain", layout.k_eps);
    meta.set("layout.s_t_pm_per_degc", layout.s_t);
}

/// Builds the forward model and synthesizes one trial.
pub fn simulate_trial(
    beam: &BeamSpec,
    tissue: &TissueSpec,
    layout: &GratingLayout,
    protocol: &Protocol,
    kappa_grid: &[f64],
    cfg: &SolverConfig,
) -> Result<TrialTrace> {
    let model = ForwardModel::build(beam, layout, kappa_grid, cfg, Execution::Parallel)?;
    simulate_with_model(&model, tissue, protocol)
}
