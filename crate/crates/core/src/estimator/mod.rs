//! Tissue modulus from an indentation trace.
//!
//! Contact is the first sample whose force reaches a threshold (or an
//! externally supplied index). Buckling onset is the first sample at or after
//! contact where the Euclidean norm of the per-peak average strains reaches a
//! threshold. The encoder travel between them is the pre-buckling indentation
//! `δᵢ`; the axial load `P` comes from the post-buckling model, and
//! `E_t = (3/4)·P·(1 − ν²)/√(δᵢ³·R_tip)`.

mod summary;

pub use summary::{format_summary, iqr, median, rmse, summarize, SampleSummary};

use crate::cross_section::BeamSpec;
use crate::elastica::ForceDisplacementCurve;
use crate::error::{Error, Result};
use crate::fbg::{strain_from_wavelength, GratingLayout};
use crate::parallel::{map_ordered, Execution};
use crate::trials::{TrialTrace, DEFAULT_TIP_RADIUS};

/// Estimates above this are discarded as outliers (Pa).
pub const DEFAULT_OUTLIER_CAP: f64 = 3e6;

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Threshold on `‖(ε₁, ε₂, ε₃)‖₂` (dimensionless strain).
    pub strain_norm_threshold: f64,
    /// Force marking contact (N).
    pub contact_force_threshold: f64,
    /// Contact index supplied from another source; wins over the force channel.
    pub contact_index_override: Option<usize>,
    /// Pa.
    pub outlier_cap: f64,
    /// Poisson's ratio of the tissue. Has no default.
    pub nu_assumed: f64,
    /// End-shortening past onset at which `P` is read from the model (m).
    pub confirm_displacement: f64,
    pub r_tip: f64,
}

impl EstimatorConfig {
    pub fn new(nu_assumed: f64, strain_norm_threshold: f64) -> Result<Self> {
        let cfg = EstimatorConfig {
            strain_norm_threshold,
            contact_force_threshold: 1e-3,
            contact_index_override: None,
            outlier_cap: DEFAULT_OUTLIER_CAP,
            nu_assumed,
            confirm_displacement: 2e-3,
            r_tip: DEFAULT_TIP_RADIUS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Five times the per-channel wavelength noise expressed as strain.
    ///
    /// Noise-free traces get a floor of 0.1 µε.
    pub fn default_strain_threshold(noise_pm: f64, k_eps: f64) -> f64 {
        (5.0 * noise_pm / k_eps * 1e-6).max(1e-7)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strain_norm_threshold > 0.0) || !(self.contact_force_threshold > 0.0) {
            return Err(Error::invalid("detection thresholds must be positive"));
        }
        if !(self.outlier_cap > 0.0) || !(self.confirm_displacement > 0.0) || !(self.r_tip > 0.0) {
            return Err(Error::invalid("outlier cap, confirmation displacement and tip radius must be positive"));
        }
        if !(0.0..=0.5).contains(&self.nu_assumed) {
            return Err(Error::invalid(format!("Poisson's ratio {} outside [0, 0.5]", self.nu_assumed)));
        }
        Ok(())
    }
}

/// Estimated tissue modulus with the quantities it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessEstimate {
    /// Pa.
    pub e_t: f64,
    pub contact_index: usize,
    pub buckling_index: usize,
    /// m.
    pub delta_i: f64,
    /// N.
    pub p: f64,
    pub beam_length_at_buckling: f64,
    /// `E_t` with `δᵢ` moved one encoder step up / down.
    pub e_t_band: (f64, f64),
    pub outlier: bool,
}

/// `E_t = (3/4)·P·(1 − ν²)/√(δ³·R_tip)`.
pub fn modulus_from_indentation(p: f64, delta: f64, nu: f64, r_tip: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("indentation must be positive, got {delta}")));
    }
    if !(r_tip > 0.0) || !p.is_finite() {
        return Err(Error::invalid("force must be finite and tip radius positive"));
    }
    Ok(0.75 * p * (1.0 - nu * nu) / (delta.powi(3) * r_tip).sqrt())
}

pub fn detect_contact(trace: &TrialTrace, cfg: &EstimatorConfig) -> Result<usize> {
    if let Some(idx) = cfg.contact_index_override {
        return Ok(idx);
    }
    if !trace.has_force() {
        return Err(Error::MissingContactSource);
    }
    trace
        .samples
        .iter()
        .position(|s| s.force.is_some_and(|f| f >= cfg.contact_force_threshold))
        .ok_or(Error::NoContact { threshold: cfg.contact_force_threshold })
}

/// Euclidean norm of the per-peak strains of one sample.
pub fn strain_norm(d_lambda: &[f64], layout: &GratingLayout) -> Result<f64> {
    let mut acc = 0.0;
    for dl in d_lambda {
        let eps = strain_from_wavelength(*dl, layout)?;
        acc += eps * eps;
    }
    Ok(acc.sqrt())
}

/// First sample, searching from `start`, whose strain norm reaches the threshold.
pub fn detect_buckling_from(
    trace: &TrialTrace,
    layout: &GratingLayout,
    cfg: &EstimatorConfig,
    start: usize,
) -> Result<usize> {
    if layout.len() < 3 {
        return Err(Error::invalid("buckling detection needs at least three gratings"));
    }
    for (i, s) in trace.samples.iter().enumerate().skip(start) {
        if s.d_lambda.len() != layout.len() {
            return Err(Error::invalid(format!("sample {i} has {} channels, layout has {}", s.d_lambda.len(), layout.len())));
        }
        if strain_norm(&s.d_lambda, layout)? >= cfg.strain_norm_threshold {
            return Ok(i);
        }
    }
    Err(Error::NoBuckling { threshold: cfg.strain_norm_threshold })
}

pub fn detect_buckling(trace: &TrialTrace, layout: &GratingLayout, cfg: &EstimatorConfig) -> Result<usize> {
    detect_buckling_from(trace, layout, cfg, 0)
}

/// Runs contact and buckling detection and evaluates the indentation equation.
///
/// `curve` must be the post-buckling branch of `beam`. When the exposed
/// length at buckling differs from the curve's length the branch is rescaled,
/// which is exact because the normalized branch does not depend on length.
pub fn estimate_stiffness(
    trace: &TrialTrace,
    beam: &BeamSpec,
    layout: &GratingLayout,
    cfg: &EstimatorConfig,
    curve: &ForceDisplacementCurve,
) -> Result<StiffnessEstimate> {
    cfg.validate()?;
    trace.validate(layout.len())?;
    let contact = detect_contact(trace, cfg)?;
    if contact >= trace.samples.len() {
        return Err(Error::invalid(format!("contact index {contact} beyond trace of {} samples", trace.samples.len())));
    }
    let buckling = detect_buckling_from(trace, layout, cfg, contact)?;
    let enc = |i: usize| trace.samples[i].encoder;
    let delta_i = enc(buckling) - enc(contact);
    if !(delta_i > 0.0) {
        return Err(Error::SingularIndentation { contact, buckling });
    }
    if enc(trace.samples.len() - 1) < enc(buckling) + cfg.confirm_displacement {
        return Err(Error::IncompleteTrial { phase: "buckling confirmation" });
    }

    let length = trace.exposed_length_at(buckling);
    let p = if (length - curve.length).abs() <= 1e-12 * length && (beam.ei - curve.ei).abs() <= 1e-12 * beam.ei {
        curve.force_at_displacement(cfg.confirm_displacement)?
    } else {
        curve.rescaled(beam.ei, length)?.force_at_displacement(cfg.confirm_displacement)?
    };

    let e_t = modulus_from_indentation(p, delta_i, cfg.nu_assumed, cfg.r_tip)?;
    let step = if buckling > 0 { enc(buckling) - enc(buckling - 1) } else { 0.0 };
    let low = modulus_from_indentation(p, delta_i + step, cfg.nu_assumed, cfg.r_tip)?;
    let high = if delta_i > step {
        modulus_from_indentation(p, delta_i - step, cfg.nu_assumed, cfg.r_tip)?
    } else {
        f64::INFINITY
    };
    Ok(StiffnessEstimate {
        e_t,
        contact_index: contact,
        buckling_index: buckling,
        delta_i,
        p,
        beam_length_at_buckling: length,
        e_t_band: (low, high),
        outlier: e_t > cfg.outlier_cap,
    })
}

/// One trace of a batch with everything needed to estimate it.
pub struct BatchItem<'a> {
    pub trace: &'a TrialTrace,
    pub beam: &'a BeamSpec,
    pub layout: &'a GratingLayout,
    pub cfg: &'a EstimatorConfig,
    pub curve: &'a ForceDisplacementCurve,
}

/// Estimates a batch; results are in input order.
pub fn estimate_batch(items: &[BatchItem<'_>], exec: Execution) -> Vec<Result<StiffnessEstimate>> {
    map_ordered(exec, items, |it| estimate_stiffness(it.trace, it.beam, it.layout, it.cfg, it.curve))
}
