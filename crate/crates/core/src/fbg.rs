//! Grating strain and Bragg wavelength model.
//!
//! Bending strain along the fiber is `ε(s) = Δy_fbg·dθ/ds`. Each grating
//! ("peak") reports the strain averaged over its span, and the Bragg shift
//! is `Δλ = k_ε·ε + S_T·ΔT` with `ε` in microstrain. Strain is carried
//! dimensionless everywhere else.

use crate::cross_section::BeamSpec;
use crate::elastica::{hermite, PostBuckleSolution};
use crate::error::{Error, Result};

/// Strain coefficient of the fiber after gluing, pm/µε.
pub const GLUED_STRAIN_COEFFICIENT: f64 = 0.424;
/// Manufacturer strain coefficient of the bare fiber, pm/µε.
pub const PRISTINE_STRAIN_COEFFICIENT: f64 = 1.2;
/// Manufacturer temperature coefficient, pm/°C.
pub const TEMPERATURE_COEFFICIENT: f64 = 10.0;

const MICRO: f64 = 1e6;

/// Grating spans and calibration of the sensing fiber.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingLayout {
    /// `(s_start, s_end)` arc-length spans measured from the clamp (m).
    pub peaks: Vec<(f64, f64)>,
    /// Strain coefficient (pm per microstrain).
    pub k_eps: f64,
    /// Temperature coefficient (pm per °C).
    pub s_t: f64,
    /// Fiber centre-line offset from the neutral axis (m).
    pub dy_fbg: f64,
}

impl GratingLayout {
    pub fn new(peaks: Vec<(f64, f64)>, k_eps: f64, s_t: f64, dy_fbg: f64) -> Result<Self> {
        if peaks.is_empty() {
            return Err(Error::invalid("grating layout has no peaks"));
        }
        for (i, &(a, b)) in peaks.iter().enumerate() {
            if !(a >= 0.0) || !(b > a) || !b.is_finite() {
                return Err(Error::invalid(format!("peak {} span ({a}, {b}) is not a valid interval", i + 1)));
            }
            if i > 0 && !(a >= peaks[i - 1].1) {
                return Err(Error::invalid(format!("peak {} overlaps or precedes peak {}", i + 1, i)));
            }
        }
        if !(k_eps > 0.0) || !s_t.is_finite() || !dy_fbg.is_finite() {
            return Err(Error::invalid(format!("bad grating calibration k_eps={k_eps}, s_t={s_t}, dy_fbg={dy_fbg}")));
        }
        Ok(GratingLayout { peaks, k_eps, s_t, dy_fbg })
    }

    /// `count` gratings of equal length at a fixed pitch.
    pub fn evenly_spaced(
        first_start: f64,
        pitch: f64,
        grating_length: f64,
        count: usize,
        k_eps: f64,
        s_t: f64,
        dy_fbg: f64,
    ) -> Result<Self> {
        let peaks = (0..count)
            .map(|i| {
                let a = first_start + pitch * i as f64;
                (a, a + grating_length)
            })
            .collect();
        Self::new(peaks, k_eps, s_t, dy_fbg)
    }

    /// Three 5 mm gratings at 8 mm pitch, the first starting 6 mm from the
    /// clamp, glued coefficient.
    pub fn default_for(beam: &BeamSpec) -> Self {
        Self::evenly_spaced(
            6e-3,
            8e-3,
            5e-3,
            3,
            GLUED_STRAIN_COEFFICIENT,
            TEMPERATURE_COEFFICIENT,
            beam.offsets.dy_fbg,
        )
        .expect("default layout is valid")
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// Every span must lie on a beam of the given length.
    pub fn check_fits(&self, length: f64) -> Result<()> {
        match self.peaks.last() {
            Some(&(_, end)) if end <= length => Ok(()),
            Some(&(_, end)) => Err(Error::invalid(format!(
                "grating span ends at {end} m, beyond beam length {length} m"
            ))),
            None => Err(Error::invalid("grating layout has no peaks")),
        }
    }
}

/// Pointwise fiber strain on the solution grid.
pub fn strain_field(sol: &PostBuckleSolution, dy_fbg: f64) -> Vec<f64> {
    sol.curvature.iter().map(|k| dy_fbg * k).collect()
}

fn check_span(sol: &PostBuckleSolution, (s1, s2): (f64, f64)) -> Result<()> {
    let l = sol.length();
    if !(s1 >= 0.0) || !(s2 > s1) || !(s2 <= l * (1.0 + 1e-12)) {
        return Err(Error::invalid(format!("span ({s1}, {s2}) not inside [0, {l}]")));
    }
    Ok(())
}

/// Span-averaged strain by quadrature of `ε(s)` on the solution grid.
///
/// Whole grid intervals use the end-corrected trapezoid rule (the exact
/// `d²θ/ds²` provides the correction), partial intervals at the span ends
/// use Simpson on the Hermite interpolant.
pub fn average_strain(sol: &PostBuckleSolution, span: (f64, f64), dy_fbg: f64) -> Result<f64> {
    check_span(sol, span)?;
    let (s1, s2) = (span.0, span.1.min(sol.length()));
    let h = sol.grid_step();
    let n = sol.s.len() - 1;
    let k = &sol.curvature;
    let partial = |a: f64, b: f64| {
        if b <= a {
            return 0.0;
        }
        let f = |s: f64| hermite(k, &sol.curvature_rate, h, s);
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    };
    let i1 = ((s1 / h).ceil() as usize).min(n);
    let i2 = ((s2 / h).floor() as usize).min(n);
    let integral = if i1 >= i2 {
        partial(s1, s2)
    } else {
        let mut trap = 0.5 * (k[i1] + k[i2]);
        trap += k[i1 + 1..i2].iter().sum::<f64>();
        trap *= h;
        trap -= h * h / 12.0 * (sol.curvature_rate[i2] - sol.curvature_rate[i1]);
        partial(s1, i1 as f64 * h) + trap + partial(i2 as f64 * h, s2)
    };
    Ok(dy_fbg * integral / (s2 - s1))
}

/// Span-averaged strain from the end-point rotation difference,
/// `Δy_fbg·(θ(s2) − θ(s1))/(s2 − s1)`.
pub fn average_strain_closed_form(sol: &PostBuckleSolution, span: (f64, f64), dy_fbg: f64) -> Result<f64> {
    check_span(sol, span)?;
    let (s1, s2) = (span.0, span.1.min(sol.length()));
    Ok(dy_fbg * (sol.theta_at(s2) - sol.theta_at(s1)) / (s2 - s1))
}

/// Average strain over every grating of the layout.
pub fn peak_strains(sol: &PostBuckleSolution, layout: &GratingLayout) -> Result<Vec<f64>> {
    layout.peaks.iter().map(|&span| average_strain(sol, span, layout.dy_fbg)).collect()
}

/// Bragg wavelength shift (pm) for strain `eps` and temperature change `dt` (°C).
pub fn wavelength_shift(eps: f64, dt: f64, layout: &GratingLayout) -> f64 {
    layout.k_eps * (eps * MICRO) + layout.s_t * dt
}

/// Strain encoded by a wavelength shift at constant temperature.
pub fn strain_from_wavelength(d_lambda: f64, layout: &GratingLayout) -> Result<f64> {
    if layout.k_eps == 0.0 || !layout.k_eps.is_finite() {
        return Err(Error::config("layout.k_eps", "strain coefficient must be non-zero"));
    }
    Ok(d_lambda / layout.k_eps / MICRO)
}
