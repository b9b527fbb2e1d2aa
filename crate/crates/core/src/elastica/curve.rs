use crate::cross_section::BeamSpec;
use crate::error::{Error, Result};
use crate::parallel::{map_ordered, Execution};

use super::{denormalize, solve_normalized, PostBuckleSolution, SolverConfig};

/// `n` load ratios spaced logarithmically over `[min, max]`, ascending.
pub fn log_kappa_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0) || !(max > min) || n < 2 {
        return Err(Error::invalid(format!("bad kappa grid [{min}, {max}] with {n} points")));
    }
    let (a, b) = (min.ln(), max.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => min,
            _ if i == n - 1 => max,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

/// One solved point on the post-buckling branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub kappa: f64,
    pub slope0: f64,
    pub t_end: f64,
    pub p: f64,
    pub r: f64,
    pub end_shortening: f64,
}

/// A load ratio the sweep could not solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub kappa: f64,
    pub message: String,
}

/// Force against end-shortening for one beam, sorted by end-shortening.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDisplacementCurve {
    pub ei: f64,
    pub length: f64,
    pub points: Vec<CurvePoint>,
    pub failures: Vec<SweepFailure>,
}

impl CurvePoint {
    pub(crate) fn from_solution(sol: &PostBuckleSolution, slope0: f64, t_end: f64) -> Self {
        CurvePoint { kappa: sol.kappa, slope0, t_end, p: sol.p, r: sol.r, end_shortening: sol.end_shortening }
    }
}

/// Solves every `κ` in the grid and assembles the branch.
///
/// Points that fail to solve are recorded in `failures` and skipped.
pub fn force_displacement_curve(
    beam: &BeamSpec,
    kappa_grid: &[f64],
    cfg: &SolverConfig,
    exec: Execution,
) -> ForceDisplacementCurve {
    let solved = map_ordered(exec, kappa_grid, |&kappa| {
        let norm = solve_normalized(kappa, cfg)?;
        let sol = denormalize(&norm, beam)?;
        Ok::<_, Error>(CurvePoint::from_solution(&sol, norm.slope0, norm.t_end))
    });
    let mut points = Vec::with_capacity(solved.len());
    let mut failures = Vec::new();
    for (kappa, result) in kappa_grid.iter().zip(solved) {
        match result {
            Ok(p) => points.push(p),
            Err(e) => failures.push(SweepFailure { kappa: *kappa, message: e.to_string() }),
        }
    }
    points.sort_by(|a, b| a.end_shortening.total_cmp(&b.end_shortening));
    ForceDisplacementCurve { ei: beam.ei, length: beam.length, points, failures }
}

impl ForceDisplacementCurve {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.points.first()?.end_shortening, self.points.last()?.end_shortening))
    }

    /// True when end-shortening strictly increases along the stored points.
    pub fn is_single_valued(&self) -> bool {
        self.points.windows(2).all(|w| w[1].end_shortening > w[0].end_shortening)
    }

    /// Axial load at a given end-shortening by piecewise-linear interpolation.
    pub fn force_at_displacement(&self, end_shortening: f64) -> Result<f64> {
        let (min, max) = self.range().ok_or_else(|| Error::invalid("force-displacement curve is empty"))?;
        if !(end_shortening >= min && end_shortening <= max) {
            let nearest = if end_shortening < min { min } else { max };
            return Err(Error::OutOfRange { query: end_shortening, min, max, nearest });
        }
        let idx = self.points.partition_point(|p| p.end_shortening < end_shortening);
        if idx == 0 {
            return Ok(self.points[0].p);
        }
        let (a, b) = (&self.points[idx - 1], &self.points[idx]);
        if b.end_shortening == end_shortening {
            return Ok(b.p);
        }
        let w = (end_shortening - a.end_shortening) / (b.end_shortening - a.end_shortening);
        Ok(a.p + w * (b.p - a.p))
    }

    /// The same branch for another beam.
    ///
    /// `P·L²/EI`, `R·L²/EI` and `δ/L` depend on `κ` alone, so a solved curve
    /// maps exactly onto any `(EI, L)`.
    pub fn rescaled(&self, ei: f64, length: f64) -> Result<Self> {
        if !(ei > 0.0) || !(length > 0.0) {
            return Err(Error::invalid("rescale target must have positive EI and length"));
        }
        let force = (ei / self.ei) * (self.length / length).powi(2);
        let disp = length / self.length;
        Ok(ForceDisplacementCurve {
            ei,
            length,
            points: self
                .points
                .iter()
                .map(|p| CurvePoint { p: p.p * force, r: p.r * force, end_shortening: p.end_shortening * disp, ..*p })
                .collect(),
            failures: self.failures.clone(),
        })
    }
}
