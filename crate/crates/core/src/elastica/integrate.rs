//! Fixed-step RK4 for the normalized elastica with pin-event localization.
//!
//! State is `[θ, dθ/dt, η, ξ]` with `θ″ = −κ sinθ − cosθ`, `η′ = sinθ`,
//! `ξ′ = cosθ` (`ξ` is the normalized axial coordinate `x·√(R/EI)`).

pub(crate) type State = [f64; 4];

#[inline]
pub(crate) fn rhs(kappa: f64, y: &State) -> State {
    let (s, c) = y[0].sin_cos();
    [y[1], -kappa * s - c, s, c]
}

#[inline]
fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

#[inline]
pub(crate) fn rk4_step(kappa: f64, y: &State, h: f64) -> State {
    let k1 = rhs(kappa, y);
    let k2 = rhs(kappa, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(kappa, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(kappa, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Where the trajectory reached the pinned end.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PinEvent {
    pub t: f64,
    pub state: State,
}

/// Integrates from `θ(0) = 0, θ′(0) = slope0` until `dθ/dt` first crosses
/// zero from below, i.e. the first local minimum of `θ`.
///
/// For the fixed-pinned mode `dθ/dt` vanishes twice: at the interior
/// inflection (a maximum of `θ`) and at the pin. Only the upward crossing
/// marks the pin. The crossing is localized by bisection on the length of a
/// partial RK4 step taken from the start of the bracketing step.
///
/// Returns `None` when no crossing happens before `t_max`.
pub(crate) fn integrate_to_pin(kappa: f64, slope0: f64, step: f64, t_max: f64) -> Option<PinEvent> {
    let mut y: State = [0.0, slope0, 0.0, 0.0];
    let mut t = 0.0;
    while t < t_max {
        let next = rk4_step(kappa, &y, step);
        if y[1] < 0.0 && next[1] >= 0.0 {
            let (mut lo, mut hi) = (0.0_f64, step);
            let mut at_hi = next;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let trial = rk4_step(kappa, &y, mid);
                if trial[1] >= 0.0 {
                    hi = mid;
                    at_hi = trial;
                } else {
                    lo = mid;
                }
            }
            let at_lo = rk4_step(kappa, &y, lo);
            let (tau, state) = if at_lo[1].abs() < at_hi[1].abs() { (lo, at_lo) } else { (hi, at_hi) };
            return Some(PinEvent { t: t + tau, state });
        }
        y = next;
        t += step;
    }
    None
}

/// Uniform-grid trajectory with `n` steps of `t_end / n`.
pub(crate) fn integrate_uniform(kappa: f64, slope0: f64, t_end: f64, n: usize) -> Vec<State> {
    let h = t_end / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y: State = [0.0, slope0, 0.0, 0.0];
    out.push(y);
    for _ in 0..n {
        y = rk4_step(kappa, &y, h);
        out.push(y);
    }
    out
}
