//! Second-order cumulant dynamics of one- and two-body moments.
//!
//! Twelve coupled equations for ⟨s₁⁻⟩, ⟨s₁ᶻ⟩, ⟨b⟩, ⟨b†b⟩, ⟨b²⟩, ⟨s₁ᶻb⟩,
//! ⟨b†s₁⁻⟩, ⟨bs₁⁻⟩, ⟨s₁⁺s₂⁻⟩, ⟨s₁⁺s₂⁺⟩, ⟨s₁ᶻs₂⁻⟩, ⟨s₁ᶻs₂ᶻ⟩, closed by
//! setting every third-order cumulant to zero and assuming all in-cavity
//! atoms have identical moments. Loading/unloading damps singles at Γ/N
//! and pairs at 2Γ/(N−1), feeds ⟨s₁ᶻ⟩ at Γ/(2N) and sources the z-pair
//! moments from the excited incoming atoms. The cavity field is kept
//! explicit — no adiabatic elimination here — so steps must resolve 1/κ.
//!
//! Spontaneous emission is not part of this system; it matters only when
//! γ ≳ Γ_R, outside the regime this module targets.

use crate::integrator::{self, FnSystem, IntegrateError, IntegrationPolicy};
use crate::params::PhysParams;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CumulantError {
    #[error("cumulant system requires N >= 2, got {0}")]
    AtomNumberTooSmall(f64),
    #[error("policy max step {dt} does not resolve the cavity: need dt <= {limit} = 0.1/kappa")]
    PolicyViolation { dt: f64, limit: f64 },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Third-moment closure: ⟨X₁X₂X₃⟩ ≈ ⟨X₁X₂⟩⟨X₃⟩ + ⟨X₂X₃⟩⟨X₁⟩ + ⟨X₃X₁⟩⟨X₂⟩
/// − 2⟨X₁⟩⟨X₂⟩⟨X₃⟩.
#[inline]
pub fn cumulant_factor3(x1x2: C64, x2x3: C64, x3x1: C64, x1: C64, x2: C64, x3: C64) -> C64 {
    x1x2 * x3 + x2x3 * x1 + x3x1 * x2 - 2.0 * x1 * x2 * x3
}

/// The twelve moments. `sz`, `bdb` and `szsz` are real observables; they
/// are carried as complex and their imaginary parts stay at rounding level
/// along trajectories (checked in tests).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantState {
    pub sm: C64,
    pub sz: C64,
    pub b: C64,
    pub bdb: C64,
    pub b2: C64,
    pub szb: C64,
    pub bdsm: C64,
    pub bsm: C64,
    pub spsm: C64,
    pub spsp: C64,
    pub szsm: C64,
    pub szsz: C64,
}

pub const DIM: usize = 12;

impl CumulantState {
    pub fn zero() -> Self {
        Self::from_vec(&[C64::new(0.0, 0.0); DIM])
    }

    /// Uncorrelated product state of identical atoms with single-atom
    /// moments (sm, sz) and an empty cavity.
    pub fn uncorrelated(sm: C64, sz: f64) -> Self {
        let z = C64::new(0.0, 0.0);
        let szc = C64::new(sz, 0.0);
        Self {
            sm,
            sz: szc,
            b: z,
            bdb: z,
            b2: z,
            szb: z,
            bdsm: z,
            bsm: z,
            spsm: sm.conj() * sm,
            spsp: sm.conj() * sm.conj(),
            szsm: szc * sm,
            szsz: szc * szc,
        }
    }

    /// All atoms excited, no dipole, empty cavity: the collective emission
    /// then seeds purely through d⟨b†s₁⁻⟩/dt = ig(⟨s₁ᶻ⟩+1/2).
    pub fn fully_inverted() -> Self {
        Self::uncorrelated(C64::new(0.0, 0.0), 0.5)
    }

    pub fn to_vec(&self) -> [C64; DIM] {
        [
            self.sm, self.sz, self.b, self.bdb, self.b2, self.szb, self.bdsm, self.bsm,
            self.spsm, self.spsp, self.szsm, self.szsz,
        ]
    }

    pub fn from_vec(y: &[C64]) -> Self {
        Self {
            sm: y[0],
            sz: y[1],
            b: y[2],
            bdb: y[3],
            b2: y[4],
            szb: y[5],
            bdsm: y[6],
            bsm: y[7],
            spsm: y[8],
            spsp: y[9],
            szsm: y[10],
            szsz: y[11],
        }
    }

    pub const NAMES: [&'static str; DIM] = [
        "sm", "sz", "b", "bdb", "b2", "szb", "bdsm", "bsm", "spsm", "spsp", "szsm", "szsz",
    ];
}

/// Time derivative of every moment.
pub fn rhs_cumulant(p: &PhysParams, s: &CumulantState) -> Result<CumulantState, CumulantError> {
    let n = p.n();
    if n < 2.0 {
        return Err(CumulantError::AtomNumberTooSmall(n));
    }
    Ok(rhs_unchecked(p, s))
}

fn rhs_unchecked(p: &PhysParams, s: &CumulantState) -> CumulantState {
    let n = p.n();
    let kappa = p.kappa();
    let big_gamma = p.big_gamma();
    let gr = big_gamma / n;
    let g_pair = 2.0 * big_gamma / (n - 1.0);
    let ig = C64::new(0.0, p.g());
    let cf3 = cumulant_factor3;
    let CumulantState {
        sm,
        sz,
        b,
        bdb,
        b2,
        szb,
        bdsm,
        bsm,
        spsm,
        spsp,
        szsm,
        szsz,
    } = *s;

    let d_sm = 2.0 * ig * szb - gr * sm;
    let d_sz = ig * bdsm - ig * bdsm.conj() - gr * sz + C64::new(0.5 * gr, 0.0);
    let d_b = -0.5 * kappa * b - ig * n * sm;
    let d_bdb = -kappa * bdb - ig * n * (bdsm - bdsm.conj());
    let d_b2 = -kappa * b2 - 2.0 * ig * n * bsm;
    // <s1^z b>: closures of <b+ b s1-> and <b b s1+>
    let d_szb = -gr * szb + 0.5 * gr * b - 0.5 * kappa * szb - ig * (n - 1.0) * szsm
        + 0.5 * ig * sm
        + ig * (cf3(bdb, bsm, bdsm, b.conj(), b, sm)
            - cf3(b2, bdsm.conj(), bdsm.conj(), b, b, sm.conj()));
    // <b+ s1->: closure of <b+ b s1^z>
    let d_bdsm = -gr * bdsm - 0.5 * kappa * bdsm + ig * (n - 1.0) * spsm + ig * (sz + 0.5)
        + 2.0 * ig * cf3(bdb, szb, szb.conj(), b.conj(), b, sz);
    // <b s1->: closure of <b b s1^z>
    let d_bsm = -gr * bsm - 0.5 * kappa * bsm - ig * (n - 1.0) * spsp.conj()
        + 2.0 * ig * cf3(b2, szb, szb, b, b, sz);
    // <s1+ s2->: closures of <b+ s2- s1^z> and <b s1+ s2^z>
    let d_spsm = -g_pair * spsm
        - 2.0 * ig
            * (cf3(bdsm, szsm, szb.conj(), b.conj(), sm, sz)
                - cf3(bdsm.conj(), szsm.conj(), szb, b, sm.conj(), sz));
    // <s1+ s2+>: two identical closures of <b+ s+ s^z>
    let d_spsp = -g_pair * spsp
        - 2.0 * ig
            * (cf3(bsm.conj(), szsm.conj(), szb.conj(), b.conj(), sm.conj(), sz)
                + cf3(bsm.conj(), szsm.conj(), szb.conj(), b.conj(), sm.conj(), sz));
    // <s1^z s2->: closures of <s1+ s2- b>, <s1- s2- b+> and 2<s1^z s2^z b>
    let d_szsm = -g_pair * szsm + 0.5 * big_gamma / (n - 1.0) * sm
        - ig * (cf3(spsm, bsm, bdsm.conj(), sm.conj(), sm, b)
            - cf3(spsp.conj(), bdsm, bdsm, sm, sm, b.conj())
            - 2.0 * cf3(szsz, szb, szb, sz, sz, b));
    // <s1^z s2^z>: four closures, pairwise conjugate
    let d_szsz = -g_pair * szsz + big_gamma / (n - 1.0) * sz
        - ig * (cf3(szsm.conj(), szb, bdsm.conj(), sm.conj(), sz, b)
            - cf3(szsm, szb.conj(), bdsm, sm, sz, b.conj())
            + cf3(szsm.conj(), bdsm.conj(), szb, sz, sm.conj(), b)
            - cf3(szsm, bdsm, szb.conj(), sz, sm, b.conj()));

    CumulantState {
        sm: d_sm,
        sz: d_sz,
        b: d_b,
        bdb: d_bdb,
        b2: d_b2,
        szb: d_szb,
        bdsm: d_bdsm,
        bsm: d_bsm,
        spsm: d_spsm,
        spsp: d_spsp,
        szsm: d_szsm,
        szsz: d_szsz,
    }
}

/// ‖rhs‖∞ over all moments.
pub fn residual_inf_norm(p: &PhysParams, s: &CumulantState) -> Result<f64, CumulantError> {
    let d = rhs_cumulant(p, s)?;
    Ok(d.to_vec().iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Collective observables derived per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedObservables {
    /// ⟨Sᶻ⟩ = N⟨s₁ᶻ⟩.
    pub sz_coll: f64,
    /// ⟨Sx²+Sy²⟩ = N/2 + N(N−1)·Re⟨s₁⁺s₂⁻⟩ (the ⟨s⁺s⁺⟩ parts cancel in the sum).
    pub dipole_sq: f64,
    /// ⟨Sx²⟩ = N/4 + (N(N−1)/2)·Re(⟨s₁⁺s₂⁻⟩ + ⟨s₁⁺s₂⁺⟩).
    pub sx_sq: f64,
    /// ⟨Sy²⟩ = N/4 + (N(N−1)/2)·Re(⟨s₁⁺s₂⁻⟩ − ⟨s₁⁺s₂⁺⟩).
    pub sy_sq: f64,
    /// Intracavity photon number N_ν = ⟨b†b⟩ (the stored moment is already
    /// collective).
    pub photon_number: f64,
    /// Photon output rate R = κ·N_ν.
    pub photon_rate: f64,
    /// σ = Re⟨s₁⁺s₂⁻⟩.
    pub sigma: f64,
}

pub fn derive(p: &PhysParams, s: &CumulantState) -> DerivedObservables {
    let n = p.n();
    let pair = n * (n - 1.0);
    let sigma = s.spsm.re;
    let nnu = s.bdb.re;
    DerivedObservables {
        sz_coll: n * s.sz.re,
        dipole_sq: 0.5 * n + pair * sigma,
        sx_sq: 0.25 * n + 0.5 * pair * (sigma + s.spsp.re),
        sy_sq: 0.25 * n + 0.5 * pair * (sigma - s.spsp.re),
        photon_number: nnu,
        photon_rate: p.kappa() * nnu,
        sigma,
    }
}

/// Sampled cumulant run with derived observables per sample.
#[derive(Debug, Clone)]
pub struct CumulantTrajectory {
    pub t: Vec<f64>,
    pub states: Vec<CumulantState>,
    pub derived: Vec<DerivedObservables>,
}

impl CumulantTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
    pub fn final_state(&self) -> &CumulantState {
        self.states.last().unwrap()
    }
}

fn system_for(p: PhysParams) -> FnSystem<impl Fn(f64, &[C64], &mut [C64])> {
    FnSystem::new(DIM, move |_t, y, dydt| {
        let s = CumulantState::from_vec(y);
        let d = rhs_unchecked(&p, &s);
        dydt.copy_from_slice(&d.to_vec());
    })
}

fn check_setup(p: &PhysParams, policy: &IntegrationPolicy) -> Result<(), CumulantError> {
    if p.n() < 2.0 {
        return Err(CumulantError::AtomNumberTooSmall(p.n()));
    }
    let limit = 0.1 / p.kappa();
    if policy.max_step() > limit {
        return Err(CumulantError::PolicyViolation {
            dt: policy.max_step(),
            limit,
        });
    }
    Ok(())
}

/// Default cumulant policy: adaptive with dt_max = 0.05/κ.
pub fn default_policy(p: &PhysParams) -> IntegrationPolicy {
    IntegrationPolicy::adaptive(1e-8, 1e-12, 0.05 / p.kappa())
}

/// Integrate the moment system over `duration`.
pub fn run_cumulant(
    y0: &CumulantState,
    p: &PhysParams,
    duration: f64,
    policy: &IntegrationPolicy,
) -> Result<CumulantTrajectory, CumulantError> {
    check_setup(p, policy)?;
    let sys = system_for(*p);
    let traj = integrator::integrate(&sys, &y0.to_vec(), 0.0, duration, policy)?;
    let states: Vec<CumulantState> = traj.y.iter().map(|y| CumulantState::from_vec(y)).collect();
    let derived = states.iter().map(|s| derive(p, s)).collect();
    Ok(CumulantTrajectory {
        t: traj.t,
        states,
        derived,
    })
}

/// Closed-form stationary state of the moment system (superradiant branch).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateCumulant {
    pub state: CumulantState,
    /// N²C′ ≤ 1/2: the returned formula values sit below the collective
    /// threshold (σ may be nonphysical there); flagged, never clamped.
    pub below_threshold: bool,
}

/// Stationary solution: ⟨s⁺⟩, ⟨s₁⁺s₂⁺⟩, ⟨s₁ᶻs₂⁺⟩ and all single-field
/// moments vanish; sᶻ solves a quadratic; σ and ⟨s₁ᶻs₂ᶻ⟩ follow; the
/// photon number is Γ(1−2sᶻ)/(2κ) and ⟨b†s⁻⟩ = Γ_R(sᶻ−1/2)/(2ig).
pub fn steady_state_closed_form(p: &PhysParams) -> Result<SteadyStateCumulant, CumulantError> {
    let n = p.n();
    if n < 2.0 {
        return Err(CumulantError::AtomNumberTooSmall(n));
    }
    let r = p.r();
    let cp = p
        .coop_c_prime()
        .expect("steady state needs a positive loading rate");
    let den = 8.0 * cp * (1.0 + n * (n + 2.0 * n * r - 2.0));
    let num = 1.0 + 2.0 * r + 2.0 * cp * (1.0 + n * n * (1.0 + 2.0 * r));
    let disc = (2.0 * cp + (1.0 + 2.0 * cp * n * n) * (1.0 + 2.0 * r)).powi(2)
        + 8.0 * cp * (4.0 * cp * n - 1.0 - 2.0 * r) * (1.0 + n * (n + 2.0 * n * r - 2.0));
    let sz = (num - disc.sqrt()) / den;
    let sigma = (1.0 - 4.0 * cp * n + 2.0 * r
        - 2.0 * (1.0 + 2.0 * r + 4.0 * cp * n * (1.0 + n * r)) * sz
        + 16.0 * cp * n * n * r * sz * sz)
        / (8.0 * cp * (n - 1.0) * n);
    let szsz = (sz + 2.0 * (n - 1.0) * sz * sz) / (2.0 * n);
    let bdb = p.big_gamma() * (1.0 - 2.0 * sz) / (2.0 * p.kappa());
    let bdsm = C64::new(p.gamma_r() * (sz - 0.5), 0.0) / C64::new(0.0, 2.0 * p.g());
    let z = C64::new(0.0, 0.0);
    Ok(SteadyStateCumulant {
        state: CumulantState {
            sm: z,
            sz: C64::new(sz, 0.0),
            b: z,
            bdb: C64::new(bdb, 0.0),
            b2: z,
            szb: z,
            bdsm,
            bsm: z,
            spsm: C64::new(sigma, 0.0),
            spsp: z,
            szsm: z,
            szsz: C64::new(szsz, 0.0),
        },
        below_threshold: p.n2_c_prime() <= 0.5,
    })
}
