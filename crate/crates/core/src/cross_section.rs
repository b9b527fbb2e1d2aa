//! Composite cross-section of the sensor beam.
//!
//! The section is one optical fiber resting on a coplanar row of NiTi wires.
//! The wire-row centre plane is taken as `y = 0` and the fiber centre sits at
//! `y = r_wire + r_fbg` (fiber tangent to the wires, glue layer neglected).
//! The neutral axis is the modulus-weighted centroid of the constituents.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One homogeneous part of a composite section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constituent {
    pub modulus: f64,
    pub area: f64,
    /// Centroid height in an arbitrary section frame.
    pub y: f64,
}

/// Modulus-weighted centroid `Σ Eᵢ·Aᵢ·yᵢ / Σ Eᵢ·Aᵢ`.
///
/// Individual moduli may be zero (a part that carries no load), but the
/// total axial stiffness must be positive.
pub fn weighted_centroid(parts: &[Constituent]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::invalid("section has no constituents"));
    }
    let mut stiffness = 0.0;
    let mut moment = 0.0;
    for part in parts {
        if !(part.modulus >= 0.0) || !(part.area > 0.0) || !part.y.is_finite() {
            return Err(Error::invalid(format!("bad constituent {part:?}")));
        }
        stiffness += part.modulus * part.area;
        moment += part.modulus * part.area * part.y;
    }
    if !(stiffness > 0.0) {
        return Err(Error::invalid("section has zero axial stiffness"));
    }
    Ok(moment / stiffness)
}

/// Offsets of every constituent from the weighted centroid, in input order.
pub fn centroid_offsets(parts: &[Constituent]) -> Result<Vec<f64>> {
    let y_na = weighted_centroid(parts)?;
    Ok(parts.iter().map(|p| p.y - y_na).collect())
}

/// Radii and moduli of the fiber-on-wire-row section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionGeometry {
    pub r_fbg: f64,
    pub r_wire: f64,
    pub n_wires: u32,
    pub e_fbg: f64,
    pub e_wire: f64,
}

impl SectionGeometry {
    /// Fiber r = 0.115 mm (67 GPa) on four 0.1 mm NiTi wires (55 GPa).
    pub const REFERENCE: SectionGeometry = SectionGeometry {
        r_fbg: 0.115e-3,
        r_wire: 0.1e-3,
        n_wires: 4,
        e_fbg: 67e9,
        e_wire: 55e9,
    };

    /// Height of the fiber centre above the wire-row centre plane.
    pub fn fiber_height(&self) -> f64 {
        self.r_wire + self.r_fbg
    }

    fn constituents(&self) -> [Constituent; 2] {
        [
            Constituent { modulus: self.e_fbg, area: PI * self.r_fbg * self.r_fbg, y: self.fiber_height() },
            Constituent {
                modulus: self.e_wire,
                area: self.n_wires as f64 * PI * self.r_wire * self.r_wire,
                y: 0.0,
            },
        ]
    }
}

/// Signed offsets from the combined neutral axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionOffsets {
    /// Fiber centroid minus neutral axis.
    pub dy_na: f64,
    /// Wire-row centroid minus neutral axis.
    pub dy_wire: f64,
    /// Fiber centre-line minus neutral axis, used for bending strain.
    pub dy_fbg: f64,
}

pub fn neutral_axis(geom: &SectionGeometry) -> Result<SectionOffsets> {
    if !(geom.r_fbg > 0.0) || !(geom.r_wire > 0.0) || geom.n_wires == 0 {
        return Err(Error::invalid(format!("non-positive section geometry {geom:?}")));
    }
    if !(geom.e_fbg >= 0.0) || !(geom.e_wire >= 0.0) {
        return Err(Error::invalid(format!("negative modulus in {geom:?}")));
    }
    let offsets = centroid_offsets(&geom.constituents())?;
    Ok(SectionOffsets { dy_na: offsets[0], dy_wire: offsets[1], dy_fbg: offsets[0] })
}

/// `E_fbg·I_fbg + E_wire·I_wire` with parallel-axis second moments.
///
/// `I_fbg = π r_fbg² (r_fbg²/4 + Δy_na²)` and the wire term sums all wires,
/// `I_wire = n π r_wire² (r_wire²/4 + Δy_wire²)`, which for four wires is
/// `π r_wire² (r_wire² + 4 Δy_wire²)`.
pub fn rigidity(geom: &SectionGeometry, dy_na: f64, dy_wire: f64) -> f64 {
    let i_fbg = PI * geom.r_fbg.powi(2) * (geom.r_fbg.powi(2) / 4.0 + dy_na * dy_na);
    let n = geom.n_wires as f64;
    let i_wire = n * PI * geom.r_wire.powi(2) * (geom.r_wire.powi(2) / 4.0 + dy_wire * dy_wire);
    geom.e_fbg * i_fbg + geom.e_wire * i_wire
}

/// Geometry, material constants and derived section properties of one beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    pub section: SectionGeometry,
    /// Free arc-length `L` between clamp and tip (m).
    pub length: f64,
    pub offsets: SectionOffsets,
    /// Flexural rigidity (N·m²).
    pub ei: f64,
}

impl BeamSpec {
    pub fn new(section: SectionGeometry, length: f64) -> Result<Self> {
        let positive = [section.r_fbg, section.r_wire, section.e_fbg, section.e_wire, length];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || section.n_wires == 0 {
            return Err(Error::invalid(format!(
                "beam constants must be strictly positive (section {section:?}, length {length})"
            )));
        }
        let offsets = neutral_axis(&section)?;
        let ei = rigidity(&section, offsets.dy_na, offsets.dy_wire);
        Ok(BeamSpec { section, length, offsets, ei })
    }

    /// Reference section at the given length.
    pub fn reference(length: f64) -> Result<Self> {
        Self::new(SectionGeometry::REFERENCE, length)
    }

    pub fn with_length(&self, length: f64) -> Result<Self> {
        Self::new(self.section, length)
    }

    /// Fixed-pinned critical load `μ²·EI/L²`, `μ` the first positive root of `tan μ = μ`.
    pub fn critical_load(&self) -> f64 {
        crate::FIXED_PINNED_CRITICAL_FACTOR * self.ei / (self.length * self.length)
    }
}

/// Flexural rigidity of a beam; identical to [`BeamSpec::ei`].
pub fn flexural_rigidity(spec: &BeamSpec) -> f64 {
    rigidity(&spec.section, spec.offsets.dy_na, spec.offsets.dy_wire)
}
