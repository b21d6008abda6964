//! Physical parameters, unit conventions and regime checks.
//!
//! All rates are angular (rad/s). Constructors taking Hz multiply by 2π,
//! matching the paper convention of quoting `g/2π` etc.

use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("parameter `{field}` is not finite")]
    NonFinite { field: &'static str },
    #[error("parameter `{field}` = {value} violates {constraint}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

/// Physical rates and atom number of the beam laser.
///
/// Immutable after construction; `Copy`, safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    g: f64,
    kappa: f64,
    gamma: f64,
    big_gamma: f64,
    n: f64,
}

fn check(field: &'static str, value: f64, min: f64, strict: bool) -> Result<f64, ParamsError> {
    if !value.is_finite() {
        return Err(ParamsError::NonFinite { field });
    }
    let ok = if strict { value > min } else { value >= min };
    if !ok {
        return Err(ParamsError::OutOfRange {
            field,
            value,
            constraint: if strict { "> lower bound" } else { ">= lower bound" },
        });
    }
    Ok(value)
}

impl PhysParams {
    /// Build from angular rates (rad/s). `gamma` and `big_gamma` may be 0.
    pub fn new(g: f64, kappa: f64, gamma: f64, big_gamma: f64, n: f64) -> Result<Self, ParamsError> {
        Ok(Self {
            g: check("g", g, 0.0, true)?,
            kappa: check("kappa", kappa, 0.0, true)?,
            gamma: check("gamma", gamma, 0.0, false)?,
            big_gamma: check("Gamma", big_gamma, 0.0, false)?,
            n: check("N", n, 1.0, false)?,
        })
    }

    /// Build from ν = ω/2π values in Hz, the paper's quoting convention.
    /// `loading` selects whether the loading rate is given as Γ or Γ_R = Γ/N.
    pub fn from_hz(
        g_hz: f64,
        kappa_hz: f64,
        gamma_hz: f64,
        loading: LoadingRate,
        n: f64,
    ) -> Result<Self, ParamsError> {
        let big_gamma = match loading {
            LoadingRate::GammaHz(v) => TAU * v,
            LoadingRate::GammaRHz(v) => TAU * v * n,
        };
        Self::new(TAU * g_hz, TAU * kappa_hz, TAU * gamma_hz, big_gamma, n)
    }

    /// Build from beam parameters: transit velocity `v` (m/s) across a mode
    /// waist `w0` (m) gives the refreshing rate Γ_R = v/w0 in s⁻¹, used
    /// directly as the angular rate (a decay rate is an inverse time
    /// constant); Γ = N·Γ_R.
    pub fn from_experiment(
        v: f64,
        w0: f64,
        g: f64,
        kappa: f64,
        gamma: f64,
        n: f64,
    ) -> Result<Self, ParamsError> {
        check("v", v, 0.0, true)?;
        check("w0", w0, 0.0, true)?;
        let gamma_r = v / w0;
        Self::new(g, kappa, gamma, n * gamma_r, n)
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// Loading rate Γ.
    pub fn big_gamma(&self) -> f64 {
        self.big_gamma
    }
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Refreshing rate Γ_R = Γ/N (inverse transit time).
    pub fn gamma_r(&self) -> f64 {
        self.big_gamma / self.n
    }

    /// Single-atom cooperativity C = g²/(κγ); `None` when γ = 0.
    pub fn coop_c(&self) -> Option<f64> {
        (self.gamma > 0.0).then(|| self.g * self.g / (self.kappa * self.gamma))
    }

    /// Loading-rate cooperativity C′ = g²/(κΓ); `None` when Γ = 0.
    pub fn coop_c_prime(&self) -> Option<f64> {
        (self.big_gamma > 0.0).then(|| self.g * self.g / (self.kappa * self.big_gamma))
    }

    /// r = Γ_R/κ.
    pub fn r(&self) -> f64 {
        self.gamma_r() / self.kappa
    }

    /// N²C′ = N g²/(κΓ_R), the collective-vs-refresh rate ratio that
    /// controls the continuous superradiance threshold (> 1/2).
    pub fn n2_c_prime(&self) -> f64 {
        self.n * self.g * self.g / (self.kappa * self.gamma_r())
    }

    /// Purcell rate g²/κ.
    pub fn purcell(&self) -> f64 {
        self.g * self.g / self.kappa
    }

    /// Collective emission rate N g²/κ.
    pub fn collective_rate(&self) -> f64 {
        self.n * self.purcell()
    }

    /// Copy with γ forced to zero (Monte-Carlo convention).
    pub fn with_zero_gamma(&self) -> Self {
        Self { gamma: 0.0, ..*self }
    }

    /// Copy with a different loading rate Γ.
    pub fn with_big_gamma(&self, big_gamma: f64) -> Result<Self, ParamsError> {
        Self::new(self.g, self.kappa, self.gamma, big_gamma, self.n)
    }

    /// Copy with a different atom number at fixed Γ_R.
    pub fn with_n_fixed_gamma_r(&self, n: f64) -> Result<Self, ParamsError> {
        let gr = self.gamma_r();
        Self::new(self.g, self.kappa, self.gamma, n * gr, n)
    }
}

/// How the loading rate is specified in Hz-facing interfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadingRate {
    /// Γ/2π in Hz.
    GammaHz(f64),
    /// Γ_R/2π in Hz.
    GammaRHz(f64),
}

/// Validity flags for the approximations behind the dynamical equations.
///
/// `adiabatic` requires κ ≫ N g²/κ (margin κ²/(Ng²)); `ergodic` requires
/// N g²/κ ≫ Γ_R. Flags use a fixed factor 10; the raw margins are reported
/// so callers can apply their own cutoff. Γ = 0 yields an infinite ergodic
/// margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub adiabatic_ok: bool,
    pub adiabatic_margin: f64,
    pub ergodic_ok: bool,
    pub ergodic_margin: f64,
    pub superradiant: bool,
}

const MARGIN_FACTOR: f64 = 10.0;

/// Derived dimensionless groups and regime flags. Pure function of params.
pub fn validate(p: &PhysParams) -> RegimeReport {
    let adiabatic_margin = p.kappa / p.collective_rate();
    let ergodic_margin = if p.big_gamma > 0.0 {
        p.collective_rate() / p.gamma_r()
    } else {
        f64::INFINITY
    };
    RegimeReport {
        adiabatic_ok: adiabatic_margin >= MARGIN_FACTOR,
        adiabatic_margin,
        ergodic_ok: ergodic_margin >= MARGIN_FACTOR,
        ergodic_margin,
        superradiant: crate::analytics::mf_steady_state(p).superradiant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fig3_parameters_are_adiabatic() {
        let p = PhysParams::from_hz(200.0, 1e5, 0.0, LoadingRate::GammaRHz(10.0), 100.0).unwrap();
        let rep = validate(&p);
        // kappa^2/(N g^2) = 1e10/4e6
        assert!((rep.adiabatic_margin - 2500.0).abs() < 1e-9 * 2500.0);
        assert!(rep.adiabatic_ok);
    }

    #[test]
    fn strong_coupling_fails_adiabatic() {
        let g = TAU * 1e3;
        let p = PhysParams::new(g, g, 0.0, 0.0, 1.0).unwrap();
        let rep = validate(&p);
        assert!(!rep.adiabatic_ok);
        assert!(rep.adiabatic_margin < 10.0);
    }

    #[test]
    fn cooperativity_fig2() {
        let p = PhysParams::from_hz(3000.0, 1e6, 7000.0, LoadingRate::GammaRHz(79577.0), 1e5).unwrap();
        let c = p.coop_c().unwrap();
        assert!((c - 1.2857e-3).abs() < 1e-6, "C = {c}");
    }

    #[test]
    fn from_experiment_transit_rate() {
        let p = PhysParams::from_experiment(50.0, 100e-6, TAU * 200.0, TAU * 1e5, 0.0, 100.0).unwrap();
        assert!((p.gamma_r() - 5e5).abs() < 1e-6);
        let p2 = PhysParams::from_experiment(100.0, 100e-6, TAU * 200.0, TAU * 1e5, 0.0, 1e5).unwrap();
        assert!((p2.big_gamma() - 1e11).abs() < 1.0);
    }

    #[test]
    fn invalid_inputs_name_the_field() {
        let err = PhysParams::new(-1.0, 1.0, 0.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, ParamsError::OutOfRange { field: "g", .. }));
        let err = PhysParams::new(1.0, f64::NAN, 0.0, 0.0, 1.0).unwrap_err();
        assert!(matches!(err, ParamsError::NonFinite { field: "kappa" }));
        let err = PhysParams::new(1.0, 1.0, 0.0, 0.0, 0.5).unwrap_err();
        assert!(matches!(err, ParamsError::OutOfRange { field: "N", .. }));
        assert!(PhysParams::from_experiment(0.0, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    proptest! {
        // C·γ = C'·Γ = g²/κ and Γ_R·N = Γ, exactly as floating point allows.
        #[test]
        fn cooperativity_identities(
            g_hz in 1.0f64..1e5,
            kappa_hz in 1.0f64..1e7,
            gamma_hz in 1e-3f64..1e5,
            gr_hz in 1e-3f64..1e6,
            n in 1.0f64..1e6,
        ) {
            let p = PhysParams::from_hz(g_hz, kappa_hz, gamma_hz, LoadingRate::GammaRHz(gr_hz), n).unwrap();
            let purcell = p.purcell();
            let a = p.coop_c().unwrap() * p.gamma();
            let b = p.coop_c_prime().unwrap() * p.big_gamma();
            prop_assert!((a - purcell).abs() <= 1e-12 * purcell);
            prop_assert!((b - purcell).abs() <= 1e-12 * purcell);
            prop_assert!((p.gamma_r() * p.n() - p.big_gamma()).abs() <= 1e-12 * p.big_gamma());
        }
    }
}
