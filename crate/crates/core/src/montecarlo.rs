//! Stochastic trajectory model of discrete atom transits.
//!
//! Between events the collective spin follows the pulsed mean-field
//! equations (no spontaneous emission). Every 1/Γ one atom is loaded —
//! ⟨sᶻ⟩ = +1/2 plus ±1/2 shot noise in x and y — the state evolves for
//! one interval, and one atom is unloaded: all components scale by
//! (N−1)/N and a ±1/2 quantum kick is applied along each of the two
//! directions orthogonal to the instantaneous collective spin. The
//! Sx autocorrelation decays exponentially with the phase-diffusion
//! time τ_c; the fitted Δω = 1/τ_c is the laser HWHM.
//!
//! Reproducibility contract: the generator is ChaCha8 (counter-mode
//! stream cipher, platform-independent), realization `r` is keyed by
//! `seed ^ r`, and every output is a pure function of (config, seed).

use crate::meanfield::{rhs_pulsed, MeanFieldState};
use crate::params::{ParamsError, PhysParams};
use crate::C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

// StdRng is only used by tests through the public seeded API; keep the
// import localized to avoid surprises.
#[allow(unused)]
type _TestRng = StdRng;

#[derive(Debug, Error)]
pub enum McError {
    #[error("Monte-Carlo needs a positive loading rate")]
    NoLoading,
    #[error("event count {events} below 10*N = {min}")]
    TooFewEvents { events: usize, min: usize },
    #[error("need at least one realization")]
    NoRealizations,
    #[error("burn-in leaves {retained} samples; need >= {min}")]
    BurnInTooLong { retained: usize, min: usize },
    #[error("only {pairs} sample pairs at lag {lag}; need >= 100")]
    InsufficientSamples { lag: usize, pairs: usize },
    #[error("autocorrelation lags limited to a quarter of the retained window ({max}), got {got}")]
    LagTooLong { got: usize, max: usize },
    #[error("autocorrelation at zero lag is not positive")]
    ZeroPower,
    #[error("fit window has {0} lags; the correlation collapses too fast to fit")]
    FitWindowTooSmall(usize),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

/// One ensemble request. γ is forced to zero (the stochastic model covers
/// pulsed dynamics only) at construction.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub params: PhysParams,
    pub seed: u64,
    /// Total loading events per realization (>= 10·N).
    pub n_events: usize,
    /// Discarded initial span in seconds (default 5/Γ_R).
    pub burn_in: f64,
    pub realizations: usize,
}

impl McConfig {
    pub fn new(
        params: PhysParams,
        seed: u64,
        n_events: usize,
        realizations: usize,
    ) -> Result<Self, McError> {
        if params.big_gamma() <= 0.0 {
            return Err(McError::NoLoading);
        }
        let min = (10.0 * params.n()).ceil() as usize;
        if n_events < min {
            return Err(McError::TooFewEvents { events: n_events, min });
        }
        if realizations == 0 {
            return Err(McError::NoRealizations);
        }
        Ok(Self {
            params: params.with_zero_gamma(),
            seed,
            n_events,
            burn_in: 5.0 / params.gamma_r(),
            realizations,
        })
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Samples discarded by the burn-in (sampling interval is 1/Γ).
    pub fn burn_samples(&self) -> usize {
        (self.burn_in * self.params.big_gamma()).ceil() as usize
    }
}

/// Per-event record: the four ±1/2 draws (as signs) and whether the unload
/// kick was skipped because the spin had zero length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McEvent {
    pub load_x: i8,
    pub load_y: i8,
    pub unload_u: i8,
    pub unload_v: i8,
    pub unload_skipped: bool,
}

/// One realization: collective spin sampled just before each load (the
/// sampled atom count is exactly N there) plus the full event log.
#[derive(Debug, Clone)]
pub struct McTrajectory {
    /// Sampling interval 1/Γ.
    pub dt_sample: f64,
    /// (Sx, Sy, Sz) per event.
    pub samples: Vec<[f64; 3]>,
    pub events: Vec<McEvent>,
    /// Samples whose |S| exceeded N (soft sanity flag, expected 0).
    pub excursions: usize,
}

fn sign(rng: &mut impl Rng) -> i8 {
    if rng.gen::<bool>() {
        1
    } else {
        -1
    }
}

/// Load one excited atom: Sz += 1/2, Sx and Sy pick up independent ±1/2.
/// Returns the (x, y) signs. Draw order: x then y.
pub fn load_atom(s: &mut [f64; 3], rng: &mut impl Rng) -> (i8, i8) {
    let sx = sign(rng);
    let sy = sign(rng);
    s[0] += 0.5 * sx as f64;
    s[1] += 0.5 * sy as f64;
    s[2] += 0.5;
    (sx, sy)
}

/// Remove one atom: scale by (N−1)/N, then kick ±1/2 along each of two
/// unit directions orthogonal to the spin. The basis comes from
/// Gram-Schmidt of the coordinate axis least aligned with the spin
/// (lowest index on ties); e2 = u × e1. Zero-length spin skips the kick.
pub fn unload_atom(s: &mut [f64; 3], n: f64, rng: &mut impl Rng) -> McEvent {
    let f = (n - 1.0) / n;
    s[0] *= f;
    s[1] *= f;
    s[2] *= f;
    let mag = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if mag == 0.0 {
        return McEvent {
            load_x: 0,
            load_y: 0,
            unload_u: 0,
            unload_v: 0,
            unload_skipped: true,
        };
    }
    let u = [s[0] / mag, s[1] / mag, s[2] / mag];
    let ax = (0..3)
        .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()))
        .unwrap();
    let mut e1 = [0.0; 3];
    e1[ax] = 1.0;
    let dot = e1[0] * u[0] + e1[1] * u[1] + e1[2] * u[2];
    for i in 0..3 {
        e1[i] -= dot * u[i];
    }
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for e in &mut e1 {
        *e /= norm;
    }
    let e2 = [
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ];
    let su = sign(rng);
    let sv = sign(rng);
    for i in 0..3 {
        s[i] += 0.5 * su as f64 * e1[i] + 0.5 * sv as f64 * e2[i];
    }
    McEvent {
        load_x: 0,
        load_y: 0,
        unload_u: su,
        unload_v: sv,
        unload_skipped: false,
    }
}

/// Fixed-step RK4 on the pulsed equations over one inter-event interval,
/// allocation-free. The step count resolves the instantaneous precession
/// rate 4(g²/κ)|S| to <= 0.05 rad per step (|S| is conserved in between
/// events, so the bound holds across the interval).
fn propagate_pulsed(p: &PhysParams, s: &mut [f64; 3], interval: f64) {
    let mag = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    let rate = 4.0 * p.purcell() * mag;
    let n_steps = ((rate * interval / 0.05).ceil() as usize).max(1);
    let h = interval / n_steps as f64;
    let deriv = |st: &[f64; 3]| -> [f64; 3] {
        let mf = MeanFieldState {
            sz: st[2],
            sm: C64::new(st[0], -st[1]),
        };
        let d = rhs_pulsed(p, &mf);
        [d.dsm.re, -d.dsm.im, d.dsz]
    };
    for _ in 0..n_steps {
        let k1 = deriv(s);
        let mut tmp = [0.0; 3];
        for i in 0..3 {
            tmp[i] = s[i] + 0.5 * h * k1[i];
        }
        let k2 = deriv(&tmp);
        for i in 0..3 {
            tmp[i] = s[i] + 0.5 * h * k2[i];
        }
        let k3 = deriv(&tmp);
        for i in 0..3 {
            tmp[i] = s[i] + h * k3[i];
        }
        let k4 = deriv(&tmp);
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

/// One realization with an explicit seed. The state is prepared by N
/// consecutive loads from the empty cavity (the burn-in hides the
/// transient), then each event is sample → load → evolve 1/Γ → unload.
pub fn run_trajectory_seeded(cfg: &McConfig, seed: u64) -> McTrajectory {
    let p = &cfg.params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let interval = 1.0 / p.big_gamma();
    let n_atoms = p.n().round().max(1.0) as usize;
    let mut s = [0.0f64; 3];
    for _ in 0..n_atoms {
        load_atom(&mut s, &mut rng);
    }
    let mut samples = Vec::with_capacity(cfg.n_events);
    let mut events = Vec::with_capacity(cfg.n_events);
    let mut excursions = 0usize;
    for _ in 0..cfg.n_events {
        samples.push(s);
        if s[0] * s[0] + s[1] * s[1] + s[2] * s[2] > p.n() * p.n() {
            excursions += 1;
        }
        let (lx, ly) = load_atom(&mut s, &mut rng);
        propagate_pulsed(p, &mut s, interval);
        let mut ev = unload_atom(&mut s, p.n(), &mut rng);
        ev.load_x = lx;
        ev.load_y = ly;
        events.push(ev);
    }
    McTrajectory {
        dt_sample: interval,
        samples,
        events,
        excursions,
    }
}

/// Realization using the config's own seed.
pub fn run_trajectory(cfg: &McConfig) -> McTrajectory {
    run_trajectory_seeded(cfg, cfg.seed)
}

/// Time-averaged autocorrelation estimates C(ℓ·dt) for ℓ = 0..=max_lag.
#[derive(Debug, Clone)]
pub struct Autocorr {
    pub dt: f64,
    pub c: Vec<f64>,
}

/// C(Δt) = ⟨x(t+Δt)x(t)⟩ over the retained window. Pre: burn-in already
/// removed; `max_lag` at most a quarter of the window; ≥ 100 pairs per lag.
pub fn autocorrelation(x: &[f64], dt: f64, max_lag: usize) -> Result<Autocorr, McError> {
    let n = x.len();
    if max_lag > n / 4 {
        return Err(McError::LagTooLong {
            got: max_lag,
            max: n / 4,
        });
    }
    if n.saturating_sub(max_lag) < 100 {
        return Err(McError::InsufficientSamples {
            lag: max_lag,
            pairs: n.saturating_sub(max_lag),
        });
    }
    let c = (0..=max_lag)
        .into_par_iter()
        .map(|lag| {
            let pairs = n - lag;
            let mut acc = 0.0;
            for i in 0..pairs {
                acc += x[i + lag] * x[i];
            }
            acc / pairs as f64
        })
        .collect();
    Ok(Autocorr { dt, c })
}

/// Autocorrelation computed only as far as the exponential fit needs:
/// stops once C stays below `frac`·C(0) for 8 consecutive lags (capped at
/// a quarter of the window).
fn autocorr_to_threshold(x: &[f64], dt: f64, frac: f64) -> Result<Autocorr, McError> {
    let n = x.len();
    if n < 134 {
        return Err(McError::InsufficientSamples { lag: 0, pairs: n });
    }
    let cap = n / 4;
    let mut c = Vec::with_capacity(256);
    let mut below = 0usize;
    for lag in 0..=cap {
        let pairs = n - lag;
        let mut acc = 0.0;
        for i in 0..pairs {
            acc += x[i + lag] * x[i];
        }
        let v = acc / pairs as f64;
        c.push(v);
        if lag > 0 && v < frac * c[0] {
            below += 1;
            if below >= 8 {
                break;
            }
        } else {
            below = 0;
        }
    }
    if c[0] <= 0.0 {
        return Err(McError::ZeroPower);
    }
    Ok(Autocorr { dt, c })
}

/// Exponential fit of the autocorrelation and the linewidth read off it.
#[derive(Debug, Clone, Copy)]
pub struct AutocorrFit {
    pub amplitude: f64,
    pub tau_c: f64,
    /// Standard error of τ_c: the larger of the LSQ error and the
    /// record-length bound τ_c·sqrt(2τ_c/T) (plain LSQ errors are badly
    /// underestimated on correlated residuals).
    pub se_tau: f64,
    /// HWHM Δω = 1/τ_c.
    pub domega: f64,
    pub fit_rss: f64,
    pub n_window: usize,
    /// τ_c exceeded the retained duration: reported value is a lower bound.
    pub non_decaying: bool,
}

/// Nonlinear least squares of A·exp(−Δt/τ) over the contiguous prefix of
/// lags with C > 0.05·C(0) (Levenberg-Marquardt, log-linear start).
pub fn fit_linewidth(corr: &Autocorr, retained_duration: f64) -> Result<AutocorrFit, McError> {
    let c0 = corr.c[0];
    if c0 <= 0.0 {
        return Err(McError::ZeroPower);
    }
    let cutoff = 0.05 * c0;
    let mut m = 1;
    while m < corr.c.len() && corr.c[m] > cutoff {
        m += 1;
    }
    if m < 3 {
        return Err(McError::FitWindowTooSmall(m));
    }
    let t: Vec<f64> = (0..m).map(|i| i as f64 * corr.dt).collect();
    let y = &corr.c[..m];
    // log-linear start on the (positive) window
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..m {
        let ly = y[i].max(1e-300 * c0).ln();
        sx += t[i];
        sy += ly;
        sxx += t[i] * t[i];
        sxy += t[i] * ly;
    }
    let slope = (m as f64 * sxy - sx * sy) / (m as f64 * sxx - sx * sx);
    let mut tau = if slope < 0.0 { -1.0 / slope } else { retained_duration };
    let mut a = c0;
    let rss_of = |a: f64, tau: f64| -> f64 {
        t.iter()
            .zip(y)
            .map(|(&ti, &yi)| {
                let r = a * (-ti / tau).exp() - yi;
                r * r
            })
            .sum()
    };
    let mut lambda = 1e-6;
    let mut rss = rss_of(a, tau);
    for _ in 0..200 {
        // J^T J and J^T r for r_i = A e^{-t_i/tau} - y_i
        let mut jaa = 0.0;
        let mut jat = 0.0;
        let mut jtt = 0.0;
        let mut ga = 0.0;
        let mut gt = 0.0;
        for i in 0..m {
            let e = (-t[i] / tau).exp();
            let r = a * e - y[i];
            let ja = e;
            let jt = a * t[i] / (tau * tau) * e;
            jaa += ja * ja;
            jat += ja * jt;
            jtt += jt * jt;
            ga += ja * r;
            gt += jt * r;
        }
        let (d_a, d_tau) = {
            let m00 = jaa * (1.0 + lambda);
            let m11 = jtt * (1.0 + lambda);
            let det = m00 * m11 - jat * jat;
            if det.abs() < 1e-300 {
                break;
            }
            ((-ga * m11 + gt * jat) / det, (-gt * m00 + ga * jat) / det)
        };
        let a_new = a + d_a;
        let tau_new = tau + d_tau;
        if tau_new <= 0.0 || !tau_new.is_finite() || !a_new.is_finite() {
            lambda *= 10.0;
            continue;
        }
        let rss_new = rss_of(a_new, tau_new);
        if rss_new <= rss {
            let step = (d_a / a.abs().max(1e-300)).abs() + (d_tau / tau).abs();
            a = a_new;
            tau = tau_new;
            rss = rss_new;
            lambda = (lambda * 0.1).max(1e-12);
            if step < 1e-13 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    // LSQ covariance at the optimum
    let mut jaa = 0.0;
    let mut jat = 0.0;
    let mut jtt = 0.0;
    for i in 0..m {
        let e = (-t[i] / tau).exp();
        let jt = a * t[i] / (tau * tau) * e;
        jaa += e * e;
        jat += e * jt;
        jtt += jt * jt;
    }
    let dof = (m as f64 - 2.0).max(1.0);
    let det = jaa * jtt - jat * jat;
    let se_lsq = if det > 0.0 {
        (rss / dof * (jaa / det)).sqrt()
    } else {
        f64::INFINITY
    };
    let se_record = tau * (2.0 * tau / retained_duration.max(corr.dt)).sqrt();
    Ok(AutocorrFit {
        amplitude: a,
        tau_c: tau,
        se_tau: se_lsq.max(se_record),
        domega: 1.0 / tau,
        fit_rss: rss,
        n_window: m,
        non_decaying: tau > retained_duration,
    })
}

/// Per-realization outcome inside an ensemble.
#[derive(Debug, Clone, Copy)]
pub struct McRealization {
    pub index: usize,
    pub seed: u64,
    pub fit: AutocorrFit,
    pub mean_sz: f64,
    pub mean_sperp: f64,
    pub excursions: usize,
}

/// Ensemble aggregate. Error bars are the standard deviation across
/// realizations.
#[derive(Debug, Clone)]
pub struct McEnsemble {
    pub per_realization: Vec<McRealization>,
    pub domega_mean: f64,
    pub domega_std: f64,
    pub single_sample: bool,
}

/// Run `cfg.realizations` independent trajectories (realization r keyed by
/// seed ^ r) in parallel, fit each, and aggregate. Results live in indexed
/// slots: identical bytes for any thread count.
pub fn run_ensemble(cfg: &McConfig) -> Result<McEnsemble, McError> {
    let burn = cfg.burn_samples();
    let retained = cfg.n_events.saturating_sub(burn);
    if retained < 134 {
        return Err(McError::BurnInTooLong {
            retained,
            min: 134,
        });
    }
    let per_realization: Vec<Result<McRealization, McError>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed ^ r as u64;
            let traj = run_trajectory_seeded(cfg, seed);
            let sx: Vec<f64> = traj.samples[burn..].iter().map(|s| s[0]).collect();
            let corr = autocorr_to_threshold(&sx, traj.dt_sample, 0.05)?;
            let retained_duration = sx.len() as f64 * traj.dt_sample;
            let fit = fit_linewidth(&corr, retained_duration)?;
            let inv = 1.0 / sx.len() as f64;
            let mean_sz = traj.samples[burn..].iter().map(|s| s[2]).sum::<f64>() * inv;
            let mean_sperp = traj.samples[burn..]
                .iter()
                .map(|s| (s[0] * s[0] + s[1] * s[1]).sqrt())
                .sum::<f64>()
                * inv;
            Ok(McRealization {
                index: r,
                seed,
                fit,
                mean_sz,
                mean_sperp,
                excursions: traj.excursions,
            })
        })
        .collect();
    let per_realization: Vec<McRealization> =
        per_realization.into_iter().collect::<Result<_, _>>()?;
    let n = per_realization.len() as f64;
    let mean = per_realization.iter().map(|r| r.fit.domega).sum::<f64>() / n;
    let var = per_realization
        .iter()
        .map(|r| (r.fit.domega - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    Ok(McEnsemble {
        single_sample: per_realization.len() == 1,
        per_realization,
        domega_mean: mean,
        domega_std: if n > 1.0 { var.sqrt() } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;
    use crate::params::LoadingRate;

    /// Fig. 4 parameters at a given N²C′.
    fn fig4_params(u: f64) -> PhysParams {
        let (g_hz, kappa_hz, n) = (300.0, 1e5, 100.0);
        let gr_hz = n * g_hz * g_hz / (kappa_hz * u);
        PhysParams::from_hz(g_hz, kappa_hz, 0.0, LoadingRate::GammaRHz(gr_hz), n).unwrap()
    }

    #[test]
    fn load_shifts_and_kicks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = [0.0; 3];
        let (sx, sy) = load_atom(&mut s, &mut rng);
        assert_eq!(s[2], 0.5);
        assert_eq!(s[0], 0.5 * sx as f64);
        assert_eq!(s[1], 0.5 * sy as f64);
    }

    #[test]
    fn load_statistics_match_fair_coins() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000usize;
        let mut sum = [0.0f64; 3];
        let mut sum_xx = 0.0;
        for _ in 0..n {
            let mut s = [0.0; 3];
            load_atom(&mut s, &mut rng);
            for i in 0..3 {
                sum[i] += s[i];
            }
            sum_xx += s[0] * s[0];
        }
        let three_sigma = 3.0 * 0.5 / (n as f64).sqrt();
        assert!((sum[0] / n as f64).abs() < three_sigma);
        assert!((sum[1] / n as f64).abs() < three_sigma);
        assert!((sum[2] / n as f64 - 0.5).abs() < 1e-12);
        // variance of the x increment is exactly 1/4 for +-1/2 coins
        assert!((sum_xx / n as f64 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unload_basis_for_spin_along_x() {
        // spin on +x: least-aligned axis is y (ties break to lowest index),
        // so the kicks land in (y, z)
        let n = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        loop {
            let mut s = [4.0, 0.0, 0.0];
            let ev = unload_atom(&mut s, n, &mut rng);
            assert!((s[0] - 4.0 * 0.9).abs() < 1e-12);
            assert_eq!(s[1].abs(), 0.5);
            assert_eq!(s[2].abs(), 0.5);
            if ev.unload_u == 1 && ev.unload_v == 1 {
                // (+,+) draws add +1/2 along y and +1/2 along z
                assert_eq!(s[1], 0.5);
                assert_eq!(s[2], 0.5);
                break;
            }
        }
    }

    #[test]
    fn unload_mean_preserves_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n_draws = 100_000usize;
        let dir = [1.0 / 3.0f64.sqrt(); 3];
        let len = 7.0;
        let mut mean = [0.0f64; 3];
        for _ in 0..n_draws {
            let mut s = [dir[0] * len, dir[1] * len, dir[2] * len];
            unload_atom(&mut s, 50.0, &mut rng);
            for i in 0..3 {
                mean[i] += s[i] / n_draws as f64;
            }
        }
        // kicks average out: mean = scaled vector within 3 sigma = 3*0.5*sqrt(2/3)/sqrt(n)
        let expect = len * 49.0 / 50.0 / 3.0f64.sqrt();
        let tol = 3.0 * 0.5 / (n_draws as f64).sqrt();
        for m in mean {
            assert!((m - expect).abs() < tol, "{m} vs {expect}");
        }
    }

    #[test]
    fn unload_zero_spin_skips_kick() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = [0.0; 3];
        let ev = unload_atom(&mut s, 10.0, &mut rng);
        assert!(ev.unload_skipped);
        assert_eq!(s, [0.0; 3]);
    }

    #[test]
    fn large_n_scaling_factor_fades() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut s = [1e6, 0.0, 0.0];
        unload_atom(&mut s, 1e9, &mut rng);
        // scaling is 1 - 1e-9: the surviving change is the O(1/2) kick
        assert!((s[0] - 1e6).abs() < 0.51);
    }

    #[test]
    fn propagation_matches_bloch_angle_solution() {
        // independent oracle: tan(theta/2) grows as exp(4 g^2/kappa |S| t)
        // with conserved |S| and frozen azimuth
        let p = fig4_params(10.0);
        let mut s = [3.0, 4.0, 8.0];
        let mag = (9.0f64 + 16.0 + 64.0).sqrt();
        let theta0 = (s[2] / mag).acos();
        let t = 0.3 / (4.0 * p.purcell() * mag);
        let expect_theta = 2.0 * ((theta0 / 2.0).tan() * (4.0 * p.purcell() * mag * t).exp()).atan();
        propagate_pulsed(&p, &mut s, t);
        let mag2 = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        assert!((mag2 - mag).abs() < 1e-7 * mag, "|S| drifted");
        let theta = (s[2] / mag2).acos();
        // RK4 at <= 0.05 rad per substep: local error ~ (0.05)^5
        assert!((theta - expect_theta).abs() < 1e-6, "{theta} vs {expect_theta}");
        // azimuth frozen
        assert!((s[1] / s[0] - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = McConfig::new(fig4_params(5.0), 99, 2000, 1).unwrap();
        let a = run_trajectory(&cfg);
        let b = run_trajectory(&cfg);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.events, b.events);
    }

    #[test]
    fn config_guards() {
        let p = fig4_params(5.0);
        assert!(matches!(
            McConfig::new(p, 1, 500, 1),
            Err(McError::TooFewEvents { .. })
        ));
        assert!(matches!(McConfig::new(p, 1, 2000, 0), Err(McError::NoRealizations)));
        let free = PhysParams::new(p.g(), p.kappa(), 0.0, 0.0, p.n()).unwrap();
        assert!(matches!(McConfig::new(free, 1, 2000, 1), Err(McError::NoLoading)));
    }

    #[test]
    fn autocorrelation_basics() {
        // C(0) is the mean square; white noise decorrelates immediately
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..4000).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let corr = autocorrelation(&x, 1.0, 100).unwrap();
        assert!((corr.c[0] - 1.0).abs() < 1e-12);
        for lag in 1..20 {
            let sigma = 1.0 / ((4000 - lag) as f64).sqrt();
            assert!(corr.c[lag].abs() < 3.0 * sigma, "lag {lag}: {}", corr.c[lag]);
        }
        assert!(matches!(
            autocorrelation(&x, 1.0, 1500),
            Err(McError::LagTooLong { .. })
        ));
        assert!(matches!(
            autocorrelation(&x[..120], 1.0, 30),
            Err(McError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn exact_exponential_fit_recovers_tau() {
        let tau = 1e-3;
        let dt = 5e-5;
        let c: Vec<f64> = (0..200).map(|i| 2.5 * (-(i as f64) * dt / tau).exp()).collect();
        let fit = fit_linewidth(&Autocorr { dt, c }, 1.0).unwrap();
        assert!((fit.tau_c - tau).abs() < 1e-6 * tau, "tau = {}", fit.tau_c);
        assert!((fit.amplitude - 2.5).abs() < 1e-6 * 2.5);
    }

    #[test]
    fn synthetic_phase_diffusion_gives_half_d() {
        // S_x = L cos(phi) with phi a random walk of rate D: fitted
        // 1/tau_c must approach D/2
        let d_coeff: f64 = 50.0;
        let dt: f64 = 2e-4;
        let n = 400_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let step_sd = (d_coeff * dt).sqrt();
        let mut phi: f64 = 0.0;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = {
                    // Box-Muller from two uniform draws
                    let u1: f64 = rng.gen::<f64>().max(1e-15);
                    let u2: f64 = rng.gen();
                    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                };
                phi += step_sd * z;
                phi.cos()
            })
            .collect();
        let corr = autocorr_to_threshold(&x, dt, 0.05).unwrap();
        let fit = fit_linewidth(&corr, n as f64 * dt).unwrap();
        let rel = (fit.domega - 0.5 * d_coeff).abs() / (0.5 * d_coeff);
        assert!(rel < 0.1, "1/tau = {}, D/2 = {}", fit.domega, 0.5 * d_coeff);
    }

    #[test]
    fn ensemble_tracks_mean_field_moments() {
        // moderate superradiance: <Sz> within 3 realization-sigmas of the
        // mean-field value (the MC model has a real O(1) offset buried in
        // the realization scatter at this operating point), |S_perp| within
        // 20% of sqrt(splus)
        let p = fig4_params(2.0);
        let cfg = McConfig::new(p, 2024, 12_000, 16).unwrap();
        let ens = run_ensemble(&cfg).unwrap();
        let ss = analytics::mf_steady_state(&p);
        let mean_sz =
            ens.per_realization.iter().map(|r| r.mean_sz).sum::<f64>() / ens.per_realization.len() as f64;
        let std_sz = {
            let v = ens
                .per_realization
                .iter()
                .map(|r| (r.mean_sz - mean_sz).powi(2))
                .sum::<f64>()
                / (ens.per_realization.len() - 1) as f64;
            v.sqrt()
        };
        assert!(
            (mean_sz - ss.sz).abs() < 3.0 * std_sz.max(0.2),
            "MC <Sz> = {mean_sz} +- {std_sz}, mean-field {}",
            ss.sz
        );
        let mean_sperp = ens.per_realization.iter().map(|r| r.mean_sperp).sum::<f64>()
            / ens.per_realization.len() as f64;
        let rel = (mean_sperp - ss.splus_sq.sqrt()).abs() / ss.splus_sq.sqrt();
        assert!(rel < 0.2, "|S_perp| off by {rel}");
        // no runaway spins
        assert!(ens.per_realization.iter().all(|r| r.excursions == 0));
    }

    #[test]
    fn halves_agree_within_fit_errors() {
        let p = fig4_params(5.0);
        let cfg = McConfig::new(p, 7, 30_000, 1).unwrap();
        let traj = run_trajectory(&cfg);
        let burn = cfg.burn_samples();
        let sx: Vec<f64> = traj.samples[burn..].iter().map(|s| s[0]).collect();
        let h = sx.len() / 2;
        let fit = |w: &[f64]| {
            let corr = autocorr_to_threshold(w, traj.dt_sample, 0.05).unwrap();
            fit_linewidth(&corr, w.len() as f64 * traj.dt_sample).unwrap()
        };
        let f1 = fit(&sx[..h]);
        let f2 = fit(&sx[h..]);
        let dw1 = f1.domega;
        let dw2 = f2.domega;
        // propagate se(tau) to se(domega) = se_tau / tau^2
        let se = ((f1.se_tau / f1.tau_c.powi(2)).powi(2) + (f2.se_tau / f2.tau_c.powi(2)).powi(2))
            .sqrt();
        assert!(
            (dw1 - dw2).abs() <= 3.0 * se,
            "halves differ: {dw1} vs {dw2} (3se = {})",
            3.0 * se
        );
    }

    #[test]
    fn gamma_rescaling_leaves_linewidth_fixed() {
        // doubling Gamma at fixed g, kappa, N doubles |Sx|^2 deep in the
        // regime, so D = Gamma/(2|Sx|^2) stays put within 25%
        let cfg_a = McConfig::new(fig4_params(10.0), 31, 30_000, 12).unwrap();
        let cfg_b = McConfig::new(fig4_params(20.0), 31, 30_000, 12).unwrap();
        let a = run_ensemble(&cfg_a).unwrap();
        let b = run_ensemble(&cfg_b).unwrap();
        let rel = (a.domega_mean / b.domega_mean - 1.0).abs();
        assert!(rel < 0.25, "domega ratio off by {rel}");
    }

    #[test]
    fn ensemble_is_deterministic_and_indexed() {
        let cfg = McConfig::new(fig4_params(5.0), 5, 2_000, 6).unwrap();
        let a = run_ensemble(&cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_ensemble(&cfg).unwrap());
        assert_eq!(a.domega_mean.to_bits(), b.domega_mean.to_bits());
        for (x, y) in a.per_realization.iter().zip(&b.per_realization) {
            assert_eq!(x.fit.domega.to_bits(), y.fit.domega.to_bits());
            assert_eq!(x.seed, y.seed);
        }
    }
}
