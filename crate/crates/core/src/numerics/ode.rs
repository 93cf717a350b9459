//! Dormand-Prince 5(4) integrator with local extrapolation, step-size
//! control, and a stop predicate located by step halving.

use crate::error::Error;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |step|.
    pub max_step: f64,
    /// First trial step; chosen automatically when `None`.
    pub initial_step: Option<f64>,
    /// Cap on attempted steps (accepted plus rejected).
    pub max_steps: usize,
    /// Below this |step| the integration is abandoned.
    pub min_step: f64,
    /// Resolution to which a firing stop predicate is located.
    pub event_tol: f64,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: None,
            max_steps: 1_000_000,
            min_step: 1e-15,
            event_tol: 1e-12,
        }
    }
}

impl IvpOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The requested end point was reached.
    Reached,
    /// The stop predicate fired; the last sample is the final state before it.
    Predicate,
}

/// Accepted states in integration order, with the derivative at each.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub xs: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub dys: Vec<[f64; N]>,
    pub stop: StopReason,
}

impl<const N: usize> Trajectory<N> {
    fn start(x0: f64, y0: [f64; N], dy0: [f64; N]) -> Self {
        Self {
            xs: vec![x0],
            ys: vec![y0],
            dys: vec![dy0],
            stop: StopReason::Reached,
        }
    }

    fn push(&mut self, x: f64, y: [f64; N], dy: [f64; N]) {
        self.xs.push(x);
        self.ys.push(y);
        self.dys.push(dy);
    }

    pub fn last_x(&self) -> f64 {
        *self.xs.last().expect("trajectory is never empty")
    }

    pub fn last_y(&self) -> [f64; N] {
        *self.ys.last().expect("trajectory is never empty")
    }
}

/// Ends an integration when it returns true for a trial state.
pub type StopPredicate<'a, const N: usize> = &'a mut dyn FnMut(f64, &[f64; N]) -> bool;

/// Integration failure, carrying everything accepted before it.
#[derive(Debug, Clone, PartialEq)]
pub struct IvpError<const N: usize> {
    pub error: Error,
    pub partial: Trajectory<N>,
}

impl<const N: usize> std::fmt::Display for IvpError<N> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({} samples kept)", self.error, self.partial.xs.len())
    }
}

impl<const N: usize> std::error::Error for IvpError<N> {}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        out[i] += h * acc;
    }
    out
}

struct StepResult<const N: usize> {
    y: [f64; N],
    dy: [f64; N],
    err: f64,
}

/// One Dormand-Prince step. `None` when the right-hand side refused a stage.
fn dp_step<const N: usize, F>(
    rhs: &mut F,
    x: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
    opts: &IvpOptions,
) -> Option<StepResult<N>>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let k2 = rhs(x + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = rhs(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(x + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs(
        x + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = rhs(
        x + h,
        &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    )?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    if y_new.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let k7 = rhs(x + h, &y_new)?;

    let mut sum = 0.0;
    for i in 0..N {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
        sum += (e / scale).powi(2);
    }
    let err = (sum / N as f64).sqrt();
    if !err.is_finite() {
        return None;
    }
    Some(StepResult {
        y: y_new,
        dy: k7,
        err,
    })
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    x0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    opts: &IvpOptions,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    if let Some(h) = opts.initial_step {
        return h.abs().min(opts.max_step).min(span);
    }
    let norm = |v: &[f64; N]| {
        let s: f64 = (0..N)
            .map(|i| (v[i] / (opts.atol + opts.rtol * y0[i].abs())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span).min(opts.max_step);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let h1 = match rhs(x0 + h0, &y1) {
        Some(f1) => {
            let mut diff = [0.0; N];
            for i in 0..N {
                diff[i] = f1[i] - f0[i];
            }
            let d2 = norm(&diff) / h0;
            if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            }
        }
        None => h0 * 1e-3,
    };
    (100.0 * h0).min(h1).min(span).min(opts.max_step)
}

fn bad_start(x0: f64) -> Error {
    Error::Domain {
        quantity: "x0",
        value: x0,
        domain: "points where the right-hand side is defined",
    }
}

fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        MAX_FACTOR
    } else {
        (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
    }
}

/// Integrates `y' = rhs(x, y)` from `x0` toward `x_end`.
///
/// `rhs` returns `None` when a trial state is outside its domain; the step is
/// then retried at a quarter of its size. When `stop` is given and returns
/// true for a trial end state, the step is halved until the firing point is
/// pinned down to `event_tol`, and the integration ends at the last state for
/// which the predicate was false.
#[allow(clippy::result_large_err)]
pub fn solve_ivp<const N: usize, F>(
    mut rhs: F,
    x0: f64,
    y0: [f64; N],
    x_end: f64,
    opts: &IvpOptions,
    mut stop: Option<StopPredicate<'_, N>>,
) -> Result<Trajectory<N>, IvpError<N>>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let f0 = match rhs(x0, &y0) {
        Some(f) => f,
        None => {
            return Err(IvpError {
                error: bad_start(x0),
                partial: Trajectory::start(x0, y0, [f64::NAN; N]),
            })
        }
    };
    let mut traj = Trajectory::start(x0, y0, f0);
    let span = (x_end - x0).abs();
    if !span.is_finite() {
        return Err(IvpError {
            error: Error::Domain {
                quantity: "x_end",
                value: x_end,
                domain: "finite",
            },
            partial: traj,
        });
    }
    if span == 0.0 {
        return Ok(traj);
    }
    let dir = (x_end - x0).signum();
    let mut h = initial_step(&mut rhs, x0, &y0, &f0, span, opts);
    let mut cap = opts.max_step;
    let (mut x, mut y, mut f) = (x0, y0, f0);
    let mut accepted = 0usize;

    for _ in 0..opts.max_steps {
        let remaining = (x_end - x) * dir;
        if remaining <= 0.0 {
            return Ok(traj);
        }
        h = h.min(cap).min(remaining);
        let last = h >= remaining;
        if h < opts.min_step && !last {
            return Err(IvpError {
                error: Error::StepUnderflow { x, accepted },
                partial: traj,
            });
        }
        let Some(step) = dp_step(&mut rhs, x, &y, &f, dir * h, opts) else {
            h *= 0.25;
            continue;
        };
        if step.err > 1.0 {
            h *= step_factor(step.err);
            continue;
        }
        let x_new = if last { x_end } else { x + dir * h };
        if let Some(pred) = stop.as_deref_mut() {
            if pred(x_new, &step.y) {
                if h <= opts.event_tol {
                    traj.stop = StopReason::Predicate;
                    return Ok(traj);
                }
                cap = 0.5 * h;
                h = cap;
                continue;
            }
        }
        x = x_new;
        y = step.y;
        f = step.dy;
        accepted += 1;
        traj.push(x, y, f);
        if last {
            return Ok(traj);
        }
        h *= step_factor(step.err);
    }
    Err(IvpError {
        error: Error::StepUnderflow { x, accepted },
        partial: traj,
    })
}

/// Integrates through the monotone list `targets`, landing exactly on each,
/// and returns the states there (the initial state is included only when it
/// is itself the first target).
#[allow(clippy::result_large_err)]
pub fn solve_ivp_at<const N: usize, F>(
    mut rhs: F,
    x0: f64,
    y0: [f64; N],
    targets: &[f64],
    opts: &IvpOptions,
) -> Result<Trajectory<N>, IvpError<N>>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let f0 = match rhs(x0, &y0) {
        Some(f) => f,
        None => {
            return Err(IvpError {
                error: bad_start(x0),
                partial: Trajectory::start(x0, y0, [f64::NAN; N]),
            })
        }
    };
    let mut out = Trajectory {
        xs: Vec::with_capacity(targets.len()),
        ys: Vec::with_capacity(targets.len()),
        dys: Vec::with_capacity(targets.len()),
        stop: StopReason::Reached,
    };
    let Some(&x_last) = targets.last() else {
        return Ok(out);
    };
    let span = (x_last - x0).abs();
    let dir = if x_last >= x0 { 1.0 } else { -1.0 };
    let mut h = initial_step(&mut rhs, x0, &y0, &f0, span.max(f64::MIN_POSITIVE), opts);
    let (mut x, mut y, mut f) = (x0, y0, f0);
    let mut accepted = 0usize;
    let mut next = 0usize;
    let mut attempts = 0usize;

    while next < targets.len() {
        let target = targets[next];
        let remaining = (target - x) * dir;
        if remaining <= 0.0 {
            out.push(target, y, f);
            next += 1;
            continue;
        }
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(IvpError {
                error: Error::StepUnderflow { x, accepted },
                partial: out,
            });
        }
        h = h.min(opts.max_step);
        let land = h >= remaining;
        let trial = if land { remaining } else { h };
        if trial < opts.min_step && !land {
            return Err(IvpError {
                error: Error::StepUnderflow { x, accepted },
                partial: out,
            });
        }
        let Some(step) = dp_step(&mut rhs, x, &y, &f, dir * trial, opts) else {
            h = 0.25 * trial;
            continue;
        };
        if step.err > 1.0 {
            h = trial * step_factor(step.err);
            continue;
        }
        x = if land { target } else { x + dir * trial };
        y = step.y;
        f = step.dy;
        accepted += 1;
        // A landing step may have been truncated; grow from the controller's
        // proposal rather than from the short step.
        let proposal = trial * step_factor(step.err);
        h = if land { proposal.max(h) } else { proposal };
    }
    Ok(out)
}
