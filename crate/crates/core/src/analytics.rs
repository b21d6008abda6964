//! Closed-form steady states, thresholds, power and linewidth expressions.
//!
//! Everything here evaluates algebra; no integration. γ = 0 limits are
//! explicit branches through 1/C → 0, never a tiny-γ substitute. Results
//! close to the N²C′ = 1/2 divergence carry a proximity flag.

use crate::cumulant;
use crate::params::PhysParams;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("below collective threshold: N^2 C' = {0} <= 1/2, no superradiant branch")]
    BelowCollectiveThreshold(f64),
    #[error("not superradiant: |S+|^2 = {0} <= 0, linewidth diverges in mean field")]
    NotSuperradiant(f64),
    #[error("operation needs a positive loading rate")]
    NoLoading,
}

/// Relative distance to N²C′ = 1/2 below which results are flagged.
const DIVERGENCE_GUARD: f64 = 1e-6;

/// Mean-field stationary state of the full beam-laser equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateMF {
    /// ⟨Sᶻ⟩ on the lasing branch: 1/(8C) + 1/(4NC′).
    pub sz: f64,
    /// |⟨S⁺⟩|² on the lasing branch; superradiance iff positive.
    pub splus_sq: f64,
    pub superradiant: bool,
    /// Non-lasing branch ⟨Sᶻ⟩ = (N/2)(Γ_R−γ)/(Γ_R+γ) (NaN if Γ_R = γ = 0,
    /// where the whole Sm = 0 axis is stationary).
    pub sz_trivial: f64,
}

/// Evaluate Eqs. for ⟨Sᶻ⟩ and |S⁺|², written via 1/C = κγ/g² and
/// 1/C′ = κΓ/g² so γ = 0 and Γ = 0 are exact limits.
pub fn mf_steady_state(p: &PhysParams) -> SteadyStateMF {
    let g2 = p.g() * p.g();
    let inv_c = p.kappa() * p.gamma() / g2;
    let inv_cp = p.kappa() * p.big_gamma() / g2;
    let n = p.n();
    let sz = inv_c / 8.0 + inv_cp / (4.0 * n);
    let splus_sq =
        inv_cp / 8.0 - n * inv_c / 8.0 - (inv_cp / (4.0 * n) + inv_c / 4.0) * sz;
    let denom = p.gamma_r() + p.gamma();
    let sz_trivial = if denom > 0.0 {
        0.5 * n * (p.gamma_r() - p.gamma()) / denom
    } else {
        f64::NAN
    };
    SteadyStateMF {
        sz,
        splus_sq,
        superradiant: p.big_gamma() > 0.0 && splus_sq > 0.0,
        sz_trivial,
    }
}

/// Critical spontaneous-emission rate: γ < γ_crit ⇔ superradiant, at the
/// given g, κ, Γ, N. Exists only above the collective threshold
/// N²C′ > 1/2.
pub fn threshold_boundary(p: &PhysParams) -> Result<f64, AnalyticsError> {
    if p.big_gamma() <= 0.0 {
        return Err(AnalyticsError::NoLoading);
    }
    let u = p.n2_c_prime();
    if u <= 0.5 {
        return Err(AnalyticsError::BelowCollectiveThreshold(u));
    }
    let cp = p.coop_c_prime().expect("loading checked above");
    let n = p.n();
    let inv_c_crit = 0.5
        * (-3.0 / (cp * n) - 4.0 * n
            + (1.0 / (cp * cp * n * n) + 40.0 / cp + 16.0 * n * n).sqrt());
    Ok(p.purcell() * inv_c_crit)
}

/// Collective threshold predicate N²C′ > 1/2.
pub fn above_collective_threshold(p: &PhysParams) -> bool {
    p.n2_c_prime() > 0.5
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMetrics {
    /// |S⁺|² via the expanded power form (algebraically equal to the
    /// steady-state expression; both are exposed so tests can cross-check).
    pub splus_sq: f64,
    /// Intracavity photon number N_ν = (2g/κ)²·|S⁺|².
    pub photon_number: f64,
    pub nnu_over_n: f64,
    /// Photon output rate R = κN_ν (→ Γ/2 at large N).
    pub photon_rate: f64,
}

/// Emitted power metrics from the expanded |S⁺|² form.
pub fn power_metrics(p: &PhysParams) -> PowerMetrics {
    let g2 = p.g() * p.g();
    let gr = p.gamma_r();
    let gam = p.gamma();
    let splus_sq = p.kappa() / (8.0 * g2)
        * ((gr - gam) * p.n()
            - gam * gam * p.kappa() / (4.0 * g2)
            - p.kappa() * gr * gr / (2.0 * g2)
            - 3.0 * gam * p.kappa() * gr / (4.0 * g2));
    let photon_number = (2.0 * p.g() / p.kappa()).powi(2) * splus_sq;
    PowerMetrics {
        splus_sq,
        photon_number,
        nnu_over_n: photon_number / p.n(),
        photon_rate: p.kappa() * photon_number,
    }
}

/// Mean-field phase-diffusion linewidth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfLinewidth {
    /// D = (Γ/2)/|Sx|², the general random-walk form.
    pub d: f64,
    /// Large-N form D = (4g²/κ)·N²C′/(N²C′−1/2).
    pub d_large_n: f64,
    /// HWHM Δω = D/2 (general form).
    pub domega: f64,
    /// Within 1e-6 relative of the N²C′ = 1/2 divergence.
    pub near_divergence: bool,
}

/// Phase-drift coefficient of the mean-field model. `sx_sq` overrides the
/// steady-state |S⁺|² when the caller has a better dipole estimate.
pub fn linewidth_mf(p: &PhysParams, sx_sq: Option<f64>) -> Result<MfLinewidth, AnalyticsError> {
    let u = p.n2_c_prime();
    if u <= 0.5 {
        return Err(AnalyticsError::BelowCollectiveThreshold(u));
    }
    let sx2 = match sx_sq {
        Some(v) => v,
        None => {
            let ss = mf_steady_state(p);
            if ss.splus_sq <= 0.0 {
                return Err(AnalyticsError::NotSuperradiant(ss.splus_sq));
            }
            ss.splus_sq
        }
    };
    let d = 0.5 * p.big_gamma() / sx2;
    let d_large_n = 4.0 * p.purcell() * u / (u - 0.5);
    Ok(MfLinewidth {
        d,
        d_large_n,
        domega: 0.5 * d,
        near_divergence: (u - 0.5).abs() < DIVERGENCE_GUARD * 0.5,
    })
}

/// Cumulant-route linewidth from the closed-form steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantLinewidth {
    pub tau_c: f64,
    /// HWHM Δω = 1/τ_c from the full expression
    /// (Γ_R/⟨Sx²⟩)(N/4 + (N(N−1)/2)σ + (N²/2)sᶻ(sᶻ−1/2)).
    pub domega: f64,
    /// Large-N form (Γ/2L²)(1−4σ) with L² = ⟨Sx²+Sy²⟩.
    pub domega_large_n: f64,
    /// ⟨Sx²⟩ = N/4 + (N(N−1)/2)σ entering both forms.
    pub sx_sq: f64,
    pub sigma: f64,
    pub sz: f64,
    pub below_threshold: bool,
}

pub fn linewidth_cumulant(p: &PhysParams) -> Result<CumulantLinewidth, AnalyticsError> {
    if p.big_gamma() <= 0.0 {
        return Err(AnalyticsError::NoLoading);
    }
    let ss = cumulant::steady_state_closed_form(p).map_err(|_| AnalyticsError::NoLoading)?;
    let n = p.n();
    let sz = ss.state.sz.re;
    let sigma = ss.state.spsm.re;
    let sx_sq = 0.25 * n + 0.5 * n * (n - 1.0) * sigma;
    let inv_tau = p.gamma_r() / sx_sq * (sx_sq + 0.5 * n * n * sz * (sz - 0.5));
    let dipole_sq = 0.5 * n + n * (n - 1.0) * sigma;
    let domega_large_n = 0.5 * p.big_gamma() / dipole_sq * (1.0 - 4.0 * sigma);
    Ok(CumulantLinewidth {
        tau_c: 1.0 / inv_tau,
        domega: inv_tau,
        domega_large_n,
        sx_sq,
        sigma,
        sz,
        below_threshold: ss.below_threshold,
    })
}

/// Back-of-the-envelope phase drift D″ = (Γ/2L²)(1−σ) from paired
/// in/out-coupling kicks. Documented heuristic: about half the full
/// cumulant result deep in the superradiant regime.
pub fn linewidth_heuristic(dipole_length: f64, sigma: f64, big_gamma: f64) -> f64 {
    assert!(dipole_length > 0.0, "dipole length must be positive");
    0.5 * big_gamma / (dipole_length * dipole_length) * (1.0 - sigma)
}

/// Large-N limit of the steady-state correlator:
/// σ ≈ κ(Γ_R/g² − 4/(2Γ_R+κ))/(8N).
pub fn large_n_sigma(p: &PhysParams) -> f64 {
    let gr = p.gamma_r();
    p.kappa() * (gr / (p.g() * p.g()) - 4.0 / (2.0 * gr + p.kappa())) / (8.0 * p.n())
}

/// Leading large-N ratio ⟨Sx²+Sy²⟩/(S⁺_MF)² = (8g²+2Γ_Rκ+κ²)/(2Γ_Rκ+κ²);
/// approaches 1 for g ≪ (κ, Γ_R).
pub fn dipole_ratio_large_n(p: &PhysParams) -> f64 {
    let g2 = p.g() * p.g();
    let grk = p.gamma_r() * p.kappa();
    let k2 = p.kappa() * p.kappa();
    (8.0 * g2 + 2.0 * grk + k2) / (2.0 * grk + k2)
}

/// Minimum HWHM of the cumulant route, 4g²/κ, reached for N²C′ ≫ 1.
pub fn min_linewidth_cumulant(p: &PhysParams) -> f64 {
    4.0 * p.purcell()
}
