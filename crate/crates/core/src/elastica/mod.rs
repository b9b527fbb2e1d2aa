//! Fixed-pinned post-buckling elastica.
//!
//! With `t = s·√(R/EI)`, `η = y·√(R/EI)` and `κ = P/R` the moment balance
//! becomes `θ″ + κ sinθ + cosθ = 0`, `η′ = sinθ`, with `θ(0) = 0` at the
//! clamp and `dθ/dt(t_end) = 0`, `η(t_end) = 0` at the pin. For a given `κ`
//! the unknown initial slope `dθ/dt(0)` is found by shooting; `t_end` falls
//! out of the pin event. Dimensional forces follow from
//! `R = EI·(t_end/L)²` and `P = κ·R`.

mod curve;
mod integrate;

pub use curve::{
    force_displacement_curve, log_kappa_grid, CurvePoint, ForceDisplacementCurve, SweepFailure,
};

use crate::cross_section::BeamSpec;
use crate::error::{Error, Result};
use integrate::{integrate_to_pin, integrate_uniform};

/// Knobs for the shooting solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// RK4 step in normalized arc-length `t`.
    pub step: f64,
    /// Convergence tolerance on the terminal residual `|η(t_end)|`.
    pub tolerance: f64,
    /// Initial bracket for `dθ/dt(0)`.
    pub bracket: (f64, f64),
    /// The upper bracket end may be expanded up to this value.
    pub max_slope0: f64,
    /// Integration cap in `t`; reaching it without a pin event is divergence.
    pub t_max: f64,
    pub max_iterations: usize,
    /// Lower bound on the number of output intervals.
    pub min_intervals: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step: 1e-3,
            tolerance: 1e-12,
            bracket: (1e-4, 2.0),
            max_slope0: 10.0,
            t_max: 60.0,
            max_iterations: 200,
            min_intervals: 512,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bracket;
        let ok = self.step > 0.0
            && self.tolerance > 0.0
            && lo > 0.0
            && hi > lo
            && self.max_slope0 >= hi
            && self.t_max > self.step
            && self.max_iterations > 0
            && self.min_intervals >= 2;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad solver configuration {self:?}")))
        }
    }
}

/// Converged solution of the normalized boundary value problem.
#[derive(Debug, Clone)]
pub struct NormalizedSolution {
    pub kappa: f64,
    /// `dθ/dt(0)`.
    pub slope0: f64,
    /// Normalized arc-length of the pin.
    pub t_end: f64,
    /// `θ` on the uniform grid `t_i = i·t_end/n`, `i = 0..=n`.
    pub theta: Vec<f64>,
    /// `dθ/dt` on the same grid.
    pub slope: Vec<f64>,
    pub eta: Vec<f64>,
    /// Normalized axial coordinate.
    pub xi: Vec<f64>,
    /// Shooting iterations used.
    pub iterations: usize,
}

/// Absolute boundary-condition residuals of a solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResiduals {
    pub theta_start: f64,
    pub slope_end: f64,
    pub eta_end: f64,
}

impl BoundaryResiduals {
    pub fn max(&self) -> f64 {
        self.theta_start.max(self.slope_end).max(self.eta_end)
    }
}

impl NormalizedSolution {
    pub fn intervals(&self) -> usize {
        self.theta.len() - 1
    }

    pub fn grid_step(&self) -> f64 {
        self.t_end / self.intervals() as f64
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let h = self.grid_step();
        (0..self.theta.len()).map(|i| i as f64 * h).collect()
    }

    pub fn residuals(&self) -> BoundaryResiduals {
        let n = self.intervals();
        BoundaryResiduals {
            theta_start: self.theta[0].abs(),
            slope_end: self.slope[n].abs(),
            eta_end: self.eta[n].abs(),
        }
    }

    /// `θ(t)` by cubic Hermite interpolation on `(θ, dθ/dt)`.
    pub fn theta_at(&self, t: f64) -> f64 {
        hermite(&self.theta, &self.slope, self.grid_step(), t)
    }
}

/// Solves the normalized problem for one load ratio `κ`.
///
/// The shooting residual `η(t_end)` is negative for small initial slopes and
/// positive past the buckled branch. The root is bracketed (the upper end
/// expands when needed, and shrinks when the trajectory runs away before
/// reaching the pin) and then refined by Illinois-modified false position,
/// which is bisection-safe secant iteration.
pub fn solve_normalized(kappa: f64, cfg: &SolverConfig) -> Result<NormalizedSolution> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be positive and finite, got {kappa}")));
    }
    cfg.validate()?;

    let residual = |slope0: f64| -> Result<(f64, f64)> {
        integrate_to_pin(kappa, slope0, cfg.step, cfg.t_max)
            .map(|ev| (ev.state[2], ev.t))
            .ok_or(Error::Divergence { kappa, slope0, t_max: cfg.t_max })
    };

    let (mut lo, mut hi) = cfg.bracket;
    let (mut g_lo, _) = residual(lo)?;
    if g_lo >= 0.0 {
        return Err(Error::NoBuckledSolution {
            kappa,
            reason: format!("residual at lower bracket slope0 = {lo} is {g_lo:.3e}, expected negative"),
        });
    }

    let mut g_hi = None;
    let mut probe = hi;
    for _ in 0..60 {
        match residual(probe) {
            Ok((g, _)) if g > 0.0 => {
                g_hi = Some(g);
                hi = probe;
                break;
            }
            Ok((g, _)) => {
                // still below the branch: move the lower end up and expand
                lo = probe;
                g_lo = g;
                if probe >= cfg.max_slope0 {
                    break;
                }
                probe = (probe * 1.5).min(cfg.max_slope0);
            }
            Err(Error::Divergence { .. }) => {
                probe = 0.5 * (lo + probe);
            }
            Err(e) => return Err(e),
        }
    }
    let mut g_hi = g_hi.ok_or_else(|| Error::NoBuckledSolution {
        kappa,
        reason: format!("no sign change of eta(t_end) for slope0 in [{}, {}]", cfg.bracket.0, cfg.max_slope0),
    })?;

    let mut side = 0i8;
    let mut best = (lo, g_lo);
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let (g, _) = residual(x)?;
        if g.abs() < best.1.abs() {
            best = (x, g);
        }
        if g.abs() <= cfg.tolerance || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if g < 0.0 {
            lo = x;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    let (slope0, g) = best;
    if g.abs() > cfg.tolerance {
        return Err(Error::NotConverged { kappa, iterations, residual: g.abs() });
    }
    let (_, t_end) = residual(slope0)?;

    let mut n = ((t_end / cfg.step).ceil() as usize).max(cfg.min_intervals);
    n += n % 2;
    let traj = integrate_uniform(kappa, slope0, t_end, n);
    Ok(NormalizedSolution {
        kappa,
        slope0,
        t_end,
        theta: traj.iter().map(|y| y[0]).collect(),
        slope: traj.iter().map(|y| y[1]).collect(),
        eta: traj.iter().map(|y| y[2]).collect(),
        xi: traj.iter().map(|y| y[3]).collect(),
        iterations,
    })
}

/// One buckled configuration in physical units.
#[derive(Debug, Clone)]
pub struct PostBuckleSolution {
    pub beam: BeamSpec,
    pub kappa: f64,
    /// Axial load (N).
    pub p: f64,
    /// Lateral reaction at the pin (N).
    pub r: f64,
    /// Uniform arc-length grid from 0 to `L`.
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// `dθ/ds` (1/m).
    pub curvature: Vec<f64>,
    /// `d²θ/ds²`, exact from the governing equation.
    pub curvature_rate: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `L − x(L)` from the integrated axial coordinate.
    pub end_shortening: f64,
}

impl PostBuckleSolution {
    pub fn length(&self) -> f64 {
        self.beam.length
    }

    pub fn grid_step(&self) -> f64 {
        self.beam.length / (self.s.len() - 1) as f64
    }

    pub fn theta_at(&self, s: f64) -> f64 {
        hermite(&self.theta, &self.curvature, self.grid_step(), s)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        hermite(&self.curvature, &self.curvature_rate, self.grid_step(), s)
    }
}

/// Maps a normalized solution onto a physical beam.
///
/// The normalization `t = s·√(R/EI)` gives `√(R/EI) = t_end/L`, hence
/// `R = EI·(t_end/L)²`.
pub fn denormalize(norm: &NormalizedSolution, beam: &BeamSpec) -> Result<PostBuckleSolution> {
    if !(beam.ei > 0.0) || !(beam.length > 0.0) {
        return Err(Error::invalid("beam must have positive EI and length"));
    }
    if !(norm.t_end > 0.0) || norm.theta.len() < 3 {
        return Err(Error::invalid("normalized solution is empty"));
    }
    let scale = norm.t_end / beam.length;
    let r = beam.ei * scale * scale;
    let p = norm.kappa * r;
    let n = norm.intervals();
    let h = beam.length / n as f64;
    let s: Vec<f64> = (0..=n).map(|i| if i == n { beam.length } else { i as f64 * h }).collect();
    let x: Vec<f64> = norm.xi.iter().map(|v| v / scale).collect();
    let y: Vec<f64> = norm.eta.iter().map(|v| v / scale).collect();
    let end_shortening = beam.length - x[n];
    let curvature_rate = norm
        .theta
        .iter()
        .map(|t| {
            let (sin, cos) = t.sin_cos();
            -(p * sin + r * cos) / beam.ei
        })
        .collect();
    Ok(PostBuckleSolution {
        beam: *beam,
        kappa: norm.kappa,
        p,
        r,
        s,
        theta: norm.theta.clone(),
        curvature: norm.slope.iter().map(|w| w * scale).collect(),
        curvature_rate,
        x,
        y,
        end_shortening,
    })
}

/// `L − ∫₀ᴸ cosθ ds` by composite Simpson on the solution grid.
pub fn end_shortening(sol: &PostBuckleSolution) -> f64 {
    let cos: Vec<f64> = sol.theta.iter().map(|t| t.cos()).collect();
    sol.length() - simpson(&cos, sol.grid_step())
}

/// Composite Simpson; falls back to a trapezoid on the last interval for odd
/// interval counts.
pub(crate) fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    if n == 0 {
        return 0.0;
    }
    let even = n - n % 2;
    let mut acc = 0.0;
    let mut i = 0;
    while i < even {
        acc += f[i] + 4.0 * f[i + 1] + f[i + 2];
        i += 2;
    }
    let mut total = acc * h / 3.0;
    if n % 2 == 1 {
        total += 0.5 * h * (f[n - 1] + f[n]);
    }
    total
}

/// Cubic Hermite interpolation of uniformly sampled `f` with derivative `df`.
pub(crate) fn hermite(f: &[f64], df: &[f64], h: f64, x: f64) -> f64 {
    let n = f.len() - 1;
    let pos = (x / h).clamp(0.0, n as f64);
    let i = (pos.floor() as usize).min(n - 1);
    let u = pos - i as f64;
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * f[i] + h10 * h * df[i] + h01 * f[i + 1] + h11 * h * df[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> BeamSpec {
        BeamSpec::reference(0.042).unwrap()
    }

    #[test]
    fn boundary_residuals_are_tiny() {
        for kappa in [2.0, 5.0, 10.0, 50.0, 500.0] {
            let sol = solve_normalized(kappa, &SolverConfig::default()).unwrap();
            let res = sol.residuals();
            assert!(res.max() <= 1e-8, "kappa {kappa}: {res:?}");
            assert!(sol.slope0 > 0.0);
        }
    }

    #[test]
    fn rejects_bad_kappa() {
        let cfg = SolverConfig::default();
        assert!(matches!(solve_normalized(0.0, &cfg), Err(Error::InvalidInput(_))));
        assert!(matches!(solve_normalized(f64::NAN, &cfg), Err(Error::InvalidInput(_))));
        assert!(matches!(solve_normalized(f64::INFINITY, &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tiny_integration_cap_diverges() {
        let cfg = SolverConfig { t_max: 0.01, ..SolverConfig::default() };
        assert!(matches!(solve_normalized(10.0, &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn narrow_slope_range_has_no_buckled_solution() {
        let cfg = SolverConfig { bracket: (1e-4, 0.1), max_slope0: 0.2, ..SolverConfig::default() };
        assert!(matches!(solve_normalized(10.0, &cfg), Err(Error::NoBuckledSolution { .. })));
    }

    #[test]
    fn forces_keep_load_ratio() {
        let norm = solve_normalized(12.0, &SolverConfig::default()).unwrap();
        let sol = denormalize(&norm, &beam()).unwrap();
        assert!(((sol.p / sol.r) - 12.0).abs() / 12.0 < 1e-10);
        assert_eq!(sol.x[0], 0.0);
        assert_eq!(sol.y[0], 0.0);
        assert!(sol.y.last().unwrap().abs() < 1e-8 * sol.length());
        assert!(sol.end_shortening > 0.0 && sol.end_shortening < sol.length());
    }

    #[test]
    fn scaling_rigidity_scales_forces_only() {
        let norm = solve_normalized(8.0, &SolverConfig::default()).unwrap();
        let b = beam();
        let stiffer = BeamSpec { ei: 3.0 * b.ei, ..b };
        let a = denormalize(&norm, &b).unwrap();
        let c = denormalize(&norm, &stiffer).unwrap();
        assert!((c.p / a.p - 3.0).abs() < 1e-12);
        assert!((c.r / a.r - 3.0).abs() < 1e-12);
        assert_eq!(a.theta, c.theta);
        assert_eq!(a.s, c.s);
    }

    #[test]
    fn simpson_end_shortening_matches_integrated_axis() {
        let norm = solve_normalized(4.0, &SolverConfig::default()).unwrap();
        let sol = denormalize(&norm, &beam()).unwrap();
        let quad = end_shortening(&sol);
        assert!((quad - sol.end_shortening).abs() < 1e-12 * sol.length());
    }

    #[test]
    fn straight_beam_has_no_shortening() {
        let norm = solve_normalized(30.0, &SolverConfig::default()).unwrap();
        let mut sol = denormalize(&norm, &beam()).unwrap();
        sol.theta.iter_mut().for_each(|t| *t = 0.0);
        assert_eq!(end_shortening(&sol), 0.0);
    }

    #[test]
    fn kinematics_hold_at_grid_points() {
        let norm = solve_normalized(6.0, &SolverConfig::default()).unwrap();
        let sol = denormalize(&norm, &beam()).unwrap();
        let h = sol.grid_step();
        for i in 1..sol.s.len() - 1 {
            let dx = (sol.x[i + 1] - sol.x[i - 1]) / (2.0 * h);
            let dy = (sol.y[i + 1] - sol.y[i - 1]) / (2.0 * h);
            assert!((dx - sol.theta[i].cos()).abs() < 1e-5);
            assert!((dy - sol.theta[i].sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let h = 0.25;
        let xs: Vec<f64> = (0..9).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| x * x * x - 2.0 * x).collect();
        let df: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - 2.0).collect();
        for x in [0.1, 0.6, 1.33, 1.99] {
            assert!((hermite(&f, &df, h, x) - (x * x * x - 2.0 * x)).abs() < 1e-13);
        }
    }
}
