//! Explicit Runge-Kutta integration of complex-valued ODE systems.
//!
//! Two methods: classic fixed-step RK4 and adaptive Dormand-Prince 5(4).
//! All paper systems are non-stiff once the step resolves 1/κ, so no
//! implicit solver is provided.

use crate::params::PhysParams;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("step underflow at t = {t}: required dt {dt} below dt_min {dt_min}")]
    StepUnderflow { t: f64, dt: f64, dt_min: f64 },
    #[error("no steady state within t_max = {t_max}: residual {residual} at t = {t}")]
    SteadyStateTimeout { t_max: f64, t: f64, residual: f64 },
    #[error("invalid integration setup: {0}")]
    BadInput(String),
}

/// A first-order ODE system over a flat complex state vector.
/// `rhs` must be deterministic and write exactly `dim` derivatives.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dydt: &mut [C64]);
}

/// Adapter turning a closure into an [`OdeSystem`].
pub struct FnSystem<F: Fn(f64, &[C64], &mut [C64])> {
    dim: usize,
    f: F,
}

impl<F: Fn(f64, &[C64], &mut [C64])> FnSystem<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(f64, &[C64], &mut [C64])> OdeSystem for FnSystem<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn rhs(&self, t: f64, y: &[C64], dydt: &mut [C64]) {
        (self.f)(t, y, dydt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMethod {
    Rk4Fixed {
        dt: f64,
    },
    Rk45Adaptive {
        rtol: f64,
        atol: f64,
        dt_min: f64,
        dt_max: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationPolicy {
    pub method: StepMethod,
    /// Accepted steps between recorded samples (>= 1). The final state is
    /// always recorded.
    pub record_stride: usize,
}

impl IntegrationPolicy {
    pub fn rk4(dt: f64) -> Self {
        Self {
            method: StepMethod::Rk4Fixed { dt },
            record_stride: 1,
        }
    }

    pub fn adaptive(rtol: f64, atol: f64, dt_max: f64) -> Self {
        Self {
            method: StepMethod::Rk45Adaptive {
                rtol,
                atol,
                dt_min: dt_max * 1e-12,
                dt_max,
            },
            record_stride: 1,
        }
    }

    /// Default policy: rk45, rtol 1e-8, atol 1e-12,
    /// dt_max = 0.05/max(κ, Ng²/κ, Γ_R).
    pub fn default_for(p: &PhysParams) -> Self {
        let rate = p.kappa().max(p.collective_rate()).max(p.gamma_r());
        Self::adaptive(1e-8, 1e-12, 0.05 / rate)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride.max(1);
        self
    }

    /// Largest step the policy can take.
    pub fn max_step(&self) -> f64 {
        match self.method {
            StepMethod::Rk4Fixed { dt } => dt,
            StepMethod::Rk45Adaptive { dt_max, .. } => dt_max,
        }
    }

    fn validate(&self) -> Result<(), IntegrateError> {
        let ok = match self.method {
            StepMethod::Rk4Fixed { dt } => dt > 0.0 && dt.is_finite(),
            StepMethod::Rk45Adaptive {
                rtol,
                atol,
                dt_min,
                dt_max,
            } => rtol > 0.0 && atol > 0.0 && dt_min > 0.0 && dt_min <= dt_max,
        };
        if ok {
            Ok(())
        } else {
            Err(IntegrateError::BadInput(format!("bad policy {self:?}")))
        }
    }
}

/// Sampled solution of one integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<C64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[C64] {
        self.y.last().expect("trajectory has at least the initial sample")
    }
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Plan a fixed-step run so that samples are exactly uniform: the step is
/// shrunk to divide the span into `stride * m` equal pieces with the
/// effective dt never exceeding `dt_max`.
pub fn uniform_plan(span: f64, dt_max: f64, stride: usize) -> (usize, f64) {
    let stride = stride.max(1);
    let blocks = (span / (dt_max * stride as f64)).ceil().max(1.0) as usize;
    let n_steps = blocks * stride;
    (n_steps, span / n_steps as f64)
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// b5 - b4: error estimate coefficients (k7 = FSAL rhs at the new point).
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Conservative safety factor: keeps long-run oscillator energy drift below
// the 1e-6 budget at rtol 1e-10 (0.9 lands just above it).
const SAFETY: f64 = 0.8;

struct Dopri5<'a, S: OdeSystem + ?Sized> {
    sys: &'a S,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
}

impl<'a, S: OdeSystem + ?Sized> Dopri5<'a, S> {
    fn new(sys: &'a S) -> Self {
        let dim = sys.dim();
        Self {
            sys,
            k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dim]),
            y_stage: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// One trial step from (t, y) with k[0] = rhs(t, y) already filled.
    /// Writes the 5th-order result into `y_new`, returns the scaled error norm.
    fn step(&mut self, t: f64, y: &[C64], h: f64, y_new: &mut [C64], rtol: f64, atol: f64) -> f64 {
        let dim = y.len();
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for (j, aj) in A[stage].iter().enumerate().take(stage + 1) {
                    if *aj != 0.0 {
                        acc += self.k[j][i] * *aj;
                    }
                }
                self.y_stage[i] = y[i] + acc * h;
            }
            self.sys
                .rhs(t + C[stage] * h, &self.y_stage, &mut self.k[stage + 1]);
        }
        // stage 6 used b-row coefficients, so y_stage is the 5th-order result
        y_new.copy_from_slice(&self.y_stage);
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = C64::new(0.0, 0.0);
            for j in 0..7 {
                if E[j] != 0.0 {
                    e += self.k[j][i] * E[j];
                }
            }
            let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
            let r = (e * h).norm() / scale;
            err_sq += r * r;
        }
        (err_sq / dim as f64).sqrt()
    }
}

enum StepOutcome {
    /// (t_new, dt_next)
    Accepted(f64, f64),
    Underflow { dt: f64, dt_min: f64 },
}

/// Driver shared by `integrate` and `find_steady_state`: advances one
/// accepted step and calls `on_accept(t, y, rhs_at_y)` after each.
fn drive<S: OdeSystem + ?Sized>(
    sys: &S,
    y: &mut Vec<C64>,
    t0: f64,
    t1: f64,
    policy: &IntegrationPolicy,
    mut on_accept: impl FnMut(usize, f64, &[C64], &[C64]),
) -> Result<(), IntegrateError> {
    policy.validate()?;
    if !(t1 > t0) {
        return Err(IntegrateError::BadInput(format!("t1 = {t1} must exceed t0 = {t0}")));
    }
    let dim = sys.dim();
    if y.len() != dim {
        return Err(IntegrateError::BadInput(format!(
            "state length {} != system dimension {dim}",
            y.len()
        )));
    }
    match policy.method {
        StepMethod::Rk4Fixed { dt } => {
            let (n_steps, h) = uniform_plan(t1 - t0, dt, policy.record_stride);
            let mut k1 = vec![C64::new(0.0, 0.0); dim];
            let mut k2 = k1.clone();
            let mut k3 = k1.clone();
            let mut k4 = k1.clone();
            let mut tmp = k1.clone();
            sys.rhs(t0, y, &mut k1);
            for step in 1..=n_steps {
                let t = t0 + (step - 1) as f64 * h;
                for i in 0..dim {
                    tmp[i] = y[i] + k1[i] * (0.5 * h);
                }
                sys.rhs(t + 0.5 * h, &tmp, &mut k2);
                for i in 0..dim {
                    tmp[i] = y[i] + k2[i] * (0.5 * h);
                }
                sys.rhs(t + 0.5 * h, &tmp, &mut k3);
                for i in 0..dim {
                    tmp[i] = y[i] + k3[i] * h;
                }
                sys.rhs(t + h, &tmp, &mut k4);
                for i in 0..dim {
                    y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
                }
                let t_new = t0 + step as f64 * h;
                // rhs at the accepted point doubles as next step's k1
                sys.rhs(t_new, y, &mut k1);
                on_accept(step, t_new, y, &k1);
            }
            Ok(())
        }
        StepMethod::Rk45Adaptive {
            rtol,
            atol,
            dt_min,
            dt_max,
        } => {
            let mut solver = Dopri5::new(sys);
            let mut t = t0;
            let mut h = dt_max.min(t1 - t0);
            let mut y_new = vec![C64::new(0.0, 0.0); dim];
            sys.rhs(t, y, &mut solver.k[0]);
            let mut step = 0usize;
            while t < t1 {
                let outcome = loop {
                    let h_try = h.min(t1 - t);
                    let err = solver.step(t, y, h_try, &mut y_new, rtol, atol);
                    if err <= 1.0 {
                        let grow = if err == 0.0 {
                            5.0
                        } else {
                            (SAFETY * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        break StepOutcome::Accepted(t + h_try, (h_try * grow).min(dt_max));
                    }
                    let shrink = (SAFETY * err.powf(-0.2)).clamp(0.2, 1.0);
                    h = h_try * shrink;
                    if h < dt_min {
                        break StepOutcome::Underflow { dt: h, dt_min };
                    }
                };
                match outcome {
                    StepOutcome::Accepted(t_new, h_next) => {
                        std::mem::swap(y, &mut y_new);
                        // FSAL: k7 is rhs at the accepted point
                        let k7 = solver.k[6].clone();
                        solver.k[0].copy_from_slice(&k7);
                        t = t_new;
                        h = h_next;
                        step += 1;
                        on_accept(step, t, y, &solver.k[0]);
                    }
                    StepOutcome::Underflow { dt, dt_min } => {
                        return Err(IntegrateError::StepUnderflow { t, dt, dt_min });
                    }
                }
            }
            Ok(())
        }
    }
}

/// Integrate from `t0` to `t1`, recording every `record_stride`-th accepted
/// step plus the initial and final states. Samples are strictly ordered in t;
/// the adaptive method keeps every accepted step's local error estimate
/// within tolerance.
pub fn integrate<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[C64],
    t0: f64,
    t1: f64,
    policy: &IntegrationPolicy,
) -> Result<Trajectory, IntegrateError> {
    let mut y = y0.to_vec();
    let mut out = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
    };
    let stride = policy.record_stride.max(1);
    drive(sys, &mut y, t0, t1, policy, |step, t, state, _rhs| {
        if step % stride == 0 {
            out.t.push(t);
            out.y.push(state.to_vec());
        }
    })?;
    if *out.t.last().unwrap() < t1 {
        out.t.push(t1);
        out.y.push(y);
    }
    Ok(out)
}

/// Integrate until ‖rhs‖∞ stays at or below `eps` for a contiguous window of
/// duration `hold_window` (callers pass 10/Γ_R), then return the state and
/// its residual. Fails with a timeout past `t_max`.
pub fn find_steady_state<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &[C64],
    policy: &IntegrationPolicy,
    eps: f64,
    hold_window: f64,
    t_max: f64,
) -> Result<(Vec<C64>, f64), IntegrateError> {
    let mut y = y0.to_vec();
    // residual at the start counts toward the window
    let mut rhs0 = vec![C64::new(0.0, 0.0); sys.dim()];
    sys.rhs(0.0, &y, &mut rhs0);
    let inf_norm = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut held_since = (inf_norm(&rhs0) <= eps).then_some(0.0);
    let mut last_residual = inf_norm(&rhs0);
    let mut done_at: Option<f64> = None;
    drive(sys, &mut y, 0.0, t_max, policy, |_step, t, _state, rhs| {
        if done_at.is_some() {
            return;
        }
        last_residual = inf_norm(rhs);
        if last_residual <= eps {
            let since = *held_since.get_or_insert(t);
            if t - since >= hold_window {
                done_at = Some(t);
            }
        } else {
            held_since = None;
        }
    })?;
    if done_at.is_some() {
        Ok((y, last_residual))
    } else {
        Err(IntegrateError::SteadyStateTimeout {
            t_max,
            t: t_max,
            residual: last_residual,
        })
    }
}
