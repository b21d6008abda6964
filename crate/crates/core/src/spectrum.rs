//! Emitted-light spectra from a recorded intracavity field.
//!
//! The output-mode amplitude at detuning ω is the truncated Fourier
//! integral of ⟨b⟩(τ); its squared modulus is the (unnormalized) intensity.
//! The coupling prefactor is dropped and spectra are peak-normalized:
//! only shapes and widths feed anything downstream.
//!
//! Two evaluation paths compute the same trapezoid-rule discretization:
//! a direct oscillatory sum (reference) and a chirp-Z transform built on
//! rustfft (fast path, used for large records). They agree to ~1e-12 and
//! the tests pin 1e-6.

use crate::C64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("field record needs >= 16 samples, got {0}")]
    TooShort(usize),
    #[error("field record sampling is not uniform: spacing deviates by {rel:.2e} (relative) at index {index}")]
    NonUniform { index: usize, rel: f64 },
    #[error("invalid sample interval dt = {0}")]
    BadDt(f64),
    #[error("grid reaches |omega| = {omega_max}, beyond Nyquist pi/dt = {nyquist}")]
    BeyondNyquist { omega_max: f64, nyquist: f64 },
    #[error("frequency grid must be strictly increasing with >= 3 points")]
    BadGrid,
    #[error("spectrum is identically zero")]
    ZeroField,
    #[error("grid too narrow: {0}")]
    GridTooNarrow(&'static str),
    #[error("multiple equal global maxima; linewidth undefined")]
    MultipleMaxima,
}

/// Uniformly sampled complex field amplitude.
#[derive(Debug, Clone)]
pub struct FieldRecord {
    t0: f64,
    dt: f64,
    samples: Vec<C64>,
}

pub const MIN_RECORD_LEN: usize = 16;
const UNIFORMITY_TOL: f64 = 1e-9;

impl FieldRecord {
    pub fn new(t0: f64, dt: f64, samples: Vec<C64>) -> Result<Self, SpectrumError> {
        if samples.len() < MIN_RECORD_LEN {
            return Err(SpectrumError::TooShort(samples.len()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SpectrumError::BadDt(dt));
        }
        Ok(Self { t0, dt, samples })
    }

    /// Validate uniform spacing (1e-9 relative) and wrap the samples.
    pub fn from_samples(t0: f64, t: &[f64], b: &[C64]) -> Result<Self, SpectrumError> {
        if t.len() < MIN_RECORD_LEN {
            return Err(SpectrumError::TooShort(t.len()));
        }
        assert_eq!(t.len(), b.len(), "time and sample arrays must match");
        let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(SpectrumError::BadDt(dt));
        }
        for (i, pair) in t.windows(2).enumerate() {
            let rel = ((pair[1] - pair[0]) - dt).abs() / dt;
            if rel > UNIFORMITY_TOL {
                return Err(SpectrumError::NonUniform { index: i, rel });
            }
        }
        Ok(Self { t0, dt, samples: b.to_vec() })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn samples(&self) -> &[C64] {
        &self.samples
    }
    /// Record duration (n−1)·dt.
    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.dt
    }
    pub fn max_amplitude(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid weights times samples, the common factor of both paths.
    fn weighted(&self) -> Vec<C64> {
        let n = self.len();
        let mut w: Vec<C64> = self.samples.iter().map(|&b| b * self.dt).collect();
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }
}

/// Strictly increasing angular-frequency grid (rad/s, relative to the
/// atomic resonance).
#[derive(Debug, Clone)]
pub struct FreqGrid {
    omegas: Vec<f64>,
}

impl FreqGrid {
    /// Symmetric grid of `n` points on [−span, +span]; odd `n` lands a
    /// point exactly on 0.
    pub fn symmetric(span: f64, n: usize) -> Result<Self, SpectrumError> {
        if !(span > 0.0) || n < 3 {
            return Err(SpectrumError::BadGrid);
        }
        Ok(Self::linear(-span, span, n))
    }

    /// Uniform window around `center`, used for peak refinement.
    pub fn window(center: f64, half_span: f64, n: usize) -> Self {
        Self::linear(center - half_span, center + half_span, n.max(3))
    }

    fn linear(lo: f64, hi: f64, n: usize) -> Self {
        let step = (hi - lo) / (n - 1) as f64;
        Self {
            omegas: (0..n).map(|k| lo + k as f64 * step).collect(),
        }
    }

    /// Default analysis grid: 4001 points spanning ±40/T.
    pub fn default_for(record: &FieldRecord) -> Self {
        Self::symmetric(40.0 / record.duration(), 4001).expect("valid record implies valid grid")
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }
    pub fn len(&self) -> usize {
        self.omegas.len()
    }
    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
    pub fn step(&self) -> f64 {
        (self.omegas[self.len() - 1] - self.omegas[0]) / (self.len() - 1) as f64
    }

    fn validate_for(&self, record: &FieldRecord) -> Result<(), SpectrumError> {
        if self.len() < 3 || self.omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpectrumError::BadGrid);
        }
        let omega_max = self.omegas[0].abs().max(self.omegas[self.len() - 1].abs());
        let nyquist = record.nyquist();
        if omega_max > nyquist {
            return Err(SpectrumError::BeyondNyquist { omega_max, nyquist });
        }
        Ok(())
    }
}

/// Peak-normalized intensity over a frequency grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    pub intensity: Vec<f64>,
}

fn normalized(omega: Vec<f64>, raw: Vec<f64>) -> Result<Spectrum, SpectrumError> {
    let peak = raw.iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(SpectrumError::ZeroField);
    }
    Ok(Spectrum {
        omega,
        intensity: raw.iter().map(|v| v / peak).collect(),
    })
}

/// Direct evaluation of the discretized output-mode integral:
/// I(ω) = |Σ_j w_j b_j e^{iωτ_j}|² with trapezoid weights and τ measured
/// from the record start. Reference path.
pub fn compute_spectrum(record: &FieldRecord, grid: &FreqGrid) -> Result<Spectrum, SpectrumError> {
    grid.validate_for(record)?;
    let wb = record.weighted();
    let dt = record.dt();
    let raw: Vec<f64> = grid
        .omegas
        .par_iter()
        .map(|&omega| {
            let mut acc = C64::new(0.0, 0.0);
            // incremental phasor would drift; evaluate the phase per sample
            for (j, &w) in wb.iter().enumerate() {
                let phase = omega * (j as f64 * dt);
                acc += w * C64::from_polar(1.0, phase);
            }
            acc.norm_sqr()
        })
        .collect();
    normalized(grid.omegas.clone(), raw)
}

/// Fast path: the same sum evaluated with a Bluestein chirp-Z transform.
/// Requires a uniform grid. Agrees with [`compute_spectrum`] to well below
/// 1e-6 relative.
pub fn compute_spectrum_fft(
    record: &FieldRecord,
    grid: &FreqGrid,
) -> Result<Spectrum, SpectrumError> {
    grid.validate_for(record)?;
    let step = grid.step();
    for w in grid.omegas.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1e-300) {
            return Err(SpectrumError::BadGrid);
        }
    }
    let wb = record.weighted();
    let n = wb.len();
    let m = grid.len();
    let dt = record.dt();
    let omega0 = grid.omegas[0];
    let theta = step * dt;

    // x_j = w_j b_j e^{i omega0 j dt}; a_k = sum_j x_j e^{i k j theta}
    // Bluestein: kj = (k^2 + j^2 - (k-j)^2)/2
    let half_chirp = |s: f64| C64::from_polar(1.0, 0.5 * theta * s * s);
    let len = (n + m).next_power_of_two();
    let mut a = vec![C64::new(0.0, 0.0); len];
    for j in 0..n {
        let phase = C64::from_polar(1.0, omega0 * (j as f64 * dt));
        a[j] = wb[j] * phase * half_chirp(j as f64);
    }
    let mut b = vec![C64::new(0.0, 0.0); len];
    for s in 0..m.max(n) {
        let v = half_chirp(s as f64).conj();
        if s < m {
            b[s] = v;
        }
        if s > 0 && s < n {
            b[len - s] = v;
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    fft.process(&mut a);
    fft.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    ifft.process(&mut a);
    let scale = 1.0 / len as f64;
    let raw: Vec<f64> = (0..m)
        .map(|k| (a[k] * scale * half_chirp(k as f64)).norm_sqr())
        .collect();
    normalized(grid.omegas.clone(), raw)
}

/// Half width at half maximum by linear interpolation on each side of the
/// unique global maximum; returns the mean of the two half-widths.
pub fn linewidth_hwhm(spec: &Spectrum) -> Result<f64, SpectrumError> {
    let n = spec.intensity.len();
    if n < 3 {
        return Err(SpectrumError::BadGrid);
    }
    let mut peak = 0usize;
    for (i, &v) in spec.intensity.iter().enumerate() {
        if v > spec.intensity[peak] {
            peak = i;
        }
    }
    if spec.intensity.iter().enumerate().any(|(i, &v)| i != peak && v == spec.intensity[peak]) {
        return Err(SpectrumError::MultipleMaxima);
    }
    if peak == 0 || peak == n - 1 {
        return Err(SpectrumError::GridTooNarrow("maximum at grid edge"));
    }
    let half = 0.5 * spec.intensity[peak];
    let cross = |i0: usize, i1: usize| {
        // linear interpolation between bracketing samples
        let (w0, w1) = (spec.omega[i0], spec.omega[i1]);
        let (v0, v1) = (spec.intensity[i0], spec.intensity[i1]);
        w0 + (w1 - w0) * (v0 - half) / (v0 - v1)
    };
    let mut right = None;
    for i in peak..n - 1 {
        if spec.intensity[i + 1] <= half {
            right = Some(cross(i, i + 1));
            break;
        }
    }
    let mut left = None;
    for i in (1..=peak).rev() {
        if spec.intensity[i - 1] <= half {
            left = Some(cross(i, i - 1));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(0.5 * ((r - spec.omega[peak]) + (spec.omega[peak] - l))),
        _ => Err(SpectrumError::GridTooNarrow("half-maximum crossing outside grid")),
    }
}

/// Which evaluation path a linewidth pipeline should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Direct,
    Fft,
}

fn eval(record: &FieldRecord, grid: &FreqGrid, path: Path) -> Result<Spectrum, SpectrumError> {
    match path {
        Path::Direct => compute_spectrum(record, grid),
        Path::Fft => compute_spectrum_fft(record, grid),
    }
}

/// Standard linewidth pipeline: spectrum on the default ±40/T grid, then a
/// ×8-refined window around the detected peak before HWHM extraction.
pub fn hwhm_of_record(record: &FieldRecord, path: Path) -> Result<f64, SpectrumError> {
    let coarse_grid = FreqGrid::default_for(record);
    let coarse = eval(record, &coarse_grid, path)?;
    refine_and_extract(record, &coarse, path)
}

fn refine_and_extract(
    record: &FieldRecord,
    coarse: &Spectrum,
    path: Path,
) -> Result<f64, SpectrumError> {
    let hw = linewidth_hwhm(coarse)?;
    let spacing = coarse.omega[1] - coarse.omega[0];
    let peak = coarse
        .intensity
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let center = coarse.omega[peak];
    let half_span = (4.0 * hw).max(8.0 * spacing);
    // odd count pins the window's middle point on the detected peak;
    // mirror-symmetric spectra would otherwise tie across two center bins
    let n = (((2.0 * half_span / (spacing / 8.0)).ceil() as usize + 1) | 1).min(65537);
    let grid = FreqGrid::window(center, half_span, n);
    // the refined window may poke past Nyquist for very wide peaks; the
    // coarse estimate is already resolved in that case
    if grid.omegas[0].abs().max(grid.omegas[grid.len() - 1].abs()) > record.nyquist() {
        return Ok(hw);
    }
    let fine = eval(record, &grid, path)?;
    linewidth_hwhm(&fine)
}

/// Wide-dynamic-range variant for sweep runners: starts from a grid wide
/// enough for `omega_hint` (falling back to Nyquist) and shrinks the span
/// until the HWHM is resolved by at least 10 bins, then applies the
/// standard ×8 refinement. Handles linewidths anywhere between the Fourier
/// floor ~2.8/T and the hint scale.
pub fn hwhm_auto(
    record: &FieldRecord,
    omega_hint: Option<f64>,
    path: Path,
) -> Result<f64, SpectrumError> {
    let t_span = record.duration();
    let floor_span = 40.0 / t_span;
    let mut span = match omega_hint {
        Some(h) => (6.0 * h).clamp(floor_span, record.nyquist() * 0.999),
        None => record.nyquist() * 0.999,
    };
    let mut last = None;
    for _ in 0..24 {
        let grid = FreqGrid::symmetric(span, 4001)?;
        let spec = eval(record, &grid, path)?;
        match linewidth_hwhm(&spec) {
            Ok(hw) => {
                last = Some((hw, spec));
                let bin = grid.step();
                if hw >= 10.0 * bin || span <= floor_span * 1.0001 {
                    break;
                }
                span = (10.0 * hw).max(floor_span);
            }
            Err(SpectrumError::GridTooNarrow(_)) => {
                span = (span * 8.0).min(record.nyquist() * 0.999);
                last = None;
            }
            Err(e) => return Err(e),
        }
    }
    let (_, spec) = last.ok_or(SpectrumError::GridTooNarrow("auto search failed"))?;
    refine_and_extract(record, &spec, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn decay_record(kappa: f64, t_end: f64, n: usize) -> FieldRecord {
        let dt = t_end / (n - 1) as f64;
        let samples = (0..n)
            .map(|j| C64::new((-0.5 * kappa * j as f64 * dt).exp(), 0.0))
            .collect();
        FieldRecord::new(0.0, dt, samples).unwrap()
    }

    fn const_record(t_end: f64, n: usize) -> FieldRecord {
        let dt = t_end / (n - 1) as f64;
        FieldRecord::new(0.0, dt, vec![C64::new(1.0, 0.0); n]).unwrap()
    }

    #[test]
    fn record_validation() {
        assert!(matches!(
            FieldRecord::new(0.0, 1.0, vec![C64::new(1.0, 0.0); 8]),
            Err(SpectrumError::TooShort(8))
        ));
        let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let mut t2 = t.clone();
        t2[10] += 0.01;
        let b = vec![C64::new(1.0, 0.0); 20];
        assert!(FieldRecord::from_samples(0.0, &t, &b).is_ok());
        assert!(matches!(
            FieldRecord::from_samples(0.0, &t2, &b),
            Err(SpectrumError::NonUniform { .. })
        ));
    }

    #[test]
    fn exponential_decay_gives_lorentzian_of_hwhm_half_kappa() {
        let kappa = 1.0;
        let rec = decay_record(kappa, 20.0 / kappa, 4096);
        let hw = hwhm_of_record(&rec, Path::Direct).unwrap();
        assert!((hw - 0.5 * kappa).abs() < 0.05 * 0.5 * kappa, "hwhm = {hw}");
    }

    #[test]
    fn constant_field_first_zero_at_two_pi_over_t() {
        let t_end = 3.0;
        let rec = const_record(t_end, 1501);
        let w0 = std::f64::consts::TAU / t_end;
        // 1501 points over +-1.5 w0 puts w0 exactly on the grid
        let grid = FreqGrid::symmetric(1.5 * w0, 1501).unwrap();
        let spec = compute_spectrum(&rec, &grid).unwrap();
        // value at the first sinc zero (trapezoid rule makes it exactly 0)
        let at = |w: f64| {
            let i = spec
                .omega
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - w).abs().total_cmp(&(b.1 - w).abs()))
                .unwrap()
                .0;
            spec.intensity[i]
        };
        assert!(at(w0) < 1e-9, "I(2pi/T) = {}", at(w0));
        assert!(at(0.0) > 0.999);
    }

    #[test]
    fn constant_field_hwhm_matches_dense_oracle() {
        // independent oracle: brute-force dense evaluation of the same
        // integral and bisection on the half-maximum crossing
        let t_end = 2.0;
        let rec = const_record(t_end, 2048);
        let wb = rec.weighted();
        let dt = rec.dt();
        let intensity = |w: f64| -> f64 {
            let mut acc = C64::new(0.0, 0.0);
            for (j, &x) in wb.iter().enumerate() {
                acc += x * C64::from_polar(1.0, w * (j as f64 * dt));
            }
            acc.norm_sqr()
        };
        let peak = intensity(0.0);
        let (mut lo, mut hi) = (0.0, std::f64::consts::TAU / t_end);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if intensity(mid) > 0.5 * peak {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        // cross-check against the sinc^2 half point 2*1.39155737825/T
        assert!((oracle - 2.0 * 1.391_557_378_251_5 / t_end).abs() < 1e-3 * oracle);
        let hw = hwhm_of_record(&rec, Path::Direct).unwrap();
        assert!((hw - oracle).abs() < 3e-3 * oracle, "hw = {hw}, oracle = {oracle}");
    }

    #[test]
    fn analytic_lorentzian_hwhm_to_permille() {
        let w = 2.5;
        let grid = FreqGrid::symmetric(30.0, 30001).unwrap();
        let spec = Spectrum {
            omega: grid.omegas().to_vec(),
            intensity: grid.omegas().iter().map(|&x| 1.0 / (1.0 + (x / w).powi(2))).collect(),
        };
        let hw = linewidth_hwhm(&spec).unwrap();
        assert!((hw - w).abs() < 1e-3 * w, "hwhm = {hw}");
    }

    #[test]
    fn doubling_record_length_halves_width() {
        let rec1 = const_record(1.0, 1024);
        let rec2 = const_record(2.0, 2048);
        let h1 = hwhm_of_record(&rec1, Path::Direct).unwrap();
        let h2 = hwhm_of_record(&rec2, Path::Direct).unwrap();
        assert!((h1 / h2 - 2.0).abs() < 0.05, "ratio = {}", h1 / h2);
    }

    #[test]
    fn fft_path_agrees_with_direct() {
        for rec in [
            decay_record(1.0, 20.0, 777),
            const_record(3.0, 1024),
            {
                // chirped complex field
                let n = 1500;
                let dt = 0.01;
                let s = (0..n)
                    .map(|j| {
                        let t = j as f64 * dt;
                        C64::from_polar((-0.1 * t).exp(), 3.0 * t + 0.5 * t * t)
                    })
                    .collect();
                FieldRecord::new(0.0, dt, s).unwrap()
            },
        ] {
            let grid = FreqGrid::default_for(&rec);
            let a = compute_spectrum(&rec, &grid).unwrap();
            let b = compute_spectrum_fft(&rec, &grid).unwrap();
            for (x, y) in a.intensity.iter().zip(&b.intensity) {
                assert!((x - y).abs() <= 1e-6 * x.abs().max(1e-9), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn time_shift_leaves_intensity_invariant() {
        let rec = decay_record(1.0, 20.0, 512);
        let shifted = FieldRecord::new(123.456, rec.dt(), rec.samples().to_vec()).unwrap();
        let grid = FreqGrid::default_for(&rec);
        let a = compute_spectrum(&rec, &grid).unwrap();
        let b = compute_spectrum(&shifted, &grid).unwrap();
        assert_eq!(a.intensity, b.intensity);
    }

    #[test]
    fn nyquist_guard() {
        let rec = const_record(1.0, 64);
        let grid = FreqGrid::symmetric(rec.nyquist() * 1.01, 101).unwrap();
        assert!(matches!(
            compute_spectrum(&rec, &grid),
            Err(SpectrumError::BeyondNyquist { .. })
        ));
    }

    #[test]
    fn edge_peak_is_an_error() {
        let rec = {
            // field e^{-i w0 t} peaks at +w0 = 1 under the e^{+i w t} kernel
            let n = 512;
            let dt = 0.05;
            let s = (0..n).map(|j| C64::from_polar(1.0, -1.0 * j as f64 * dt)).collect();
            FieldRecord::new(0.0, dt, s).unwrap()
        };
        // window on the rising slope of the peak at omega = 1: intensity is
        // monotone there, so the maximum sits at the grid edge
        let grid = FreqGrid::window(0.85, 0.1, 101);
        let spec = compute_spectrum(&rec, &grid).unwrap();
        assert!(matches!(
            linewidth_hwhm(&spec),
            Err(SpectrumError::GridTooNarrow(_))
        ));
    }

    #[test]
    fn equal_maxima_rejected() {
        let spec = Spectrum {
            omega: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            intensity: vec![0.1, 1.0, 0.5, 1.0, 0.1],
        };
        assert!(matches!(linewidth_hwhm(&spec), Err(SpectrumError::MultipleMaxima)));
    }

    #[test]
    fn auto_pipeline_spans_decades() {
        // narrow line (Fourier floor) and broad line (fast decay) with the
        // same record length
        let broad = decay_record(50.0, 40.0, 1 << 14);
        let hw_b = hwhm_skip_guard(&broad);
        assert!((hw_b - 25.0).abs() < 0.05 * 25.0, "broad {hw_b}");
        let narrow = const_record(40.0, 1 << 14);
        let hw_n = hwhm_skip_guard(&narrow);
        let fourier = 2.0 * 1.391_557_378_251_5 / 40.0;
        assert!((hw_n - fourier).abs() < 0.05 * fourier, "narrow {hw_n}");
    }

    fn hwhm_skip_guard(rec: &FieldRecord) -> f64 {
        hwhm_auto(rec, None, Path::Fft).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        // global phase invariance: b -> e^{i phi} b leaves I unchanged
        #[test]
        fn global_phase_invariance(phi in 0.0f64..std::f64::consts::TAU, seed in 0u64..1000) {
            let n = 128;
            let dt = 0.05;
            let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
            let mut rnd = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let s: Vec<C64> = (0..n).map(|_| C64::new(rnd(), rnd())).collect();
            let rot = C64::from_polar(1.0, phi);
            let s2: Vec<C64> = s.iter().map(|&z| z * rot).collect();
            let ra = FieldRecord::new(0.0, dt, s).unwrap();
            let rb = FieldRecord::new(0.0, dt, s2).unwrap();
            let grid = FreqGrid::symmetric(10.0, 301).unwrap();
            let a = compute_spectrum(&ra, &grid).unwrap();
            let b = compute_spectrum(&rb, &grid).unwrap();
            for (x, y) in a.intensity.iter().zip(&b.intensity) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-15));
            }
        }
    }
}
