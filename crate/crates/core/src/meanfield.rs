//! Mean-field dynamics of the collective spin.
//!
//! Four right-hand sides: the pulsed equations (no loading, no spontaneous
//! emission, cavity eliminated), the continuously loaded variants with and
//! without spontaneous emission, and the non-adiabatic variant retaining
//! the cavity amplitude ⟨b⟩. ⟨S⁺⟩ is never stored: the equations preserve
//! ⟨S⁺⟩ = ⟨S⁻⟩* exactly, so it is always derived by conjugation.

use crate::integrator::{self, FnSystem, IntegrateError, IntegrationPolicy};
use crate::params::PhysParams;
use crate::spectrum::{FieldRecord, SpectrumError};
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("variant {0:?} requires a positive loading rate")]
    LoadingRateRequired(Variant),
    #[error("policy max step {dt} does not resolve the cavity: need dt <= {limit} = 0.1/kappa")]
    PolicyViolation { dt: f64, limit: f64 },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

/// Collective spin expectation values. `sp()` is derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub sz: f64,
    pub sm: C64,
}

impl MeanFieldState {
    pub fn sp(&self) -> C64 {
        self.sm.conj()
    }
    /// |⟨Sx⟩|² + |⟨Sy⟩|² + ⟨Sz⟩² = |⟨S⁻⟩|² + ⟨Sz⟩², conserved by the pulsed
    /// equations.
    pub fn bloch_invariant(&self) -> f64 {
        self.sm.norm_sqr() + self.sz * self.sz
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldDeriv {
    pub dsz: f64,
    pub dsm: C64,
}

/// d⟨Sz⟩/dt = −4(g²/κ)|⟨S⁻⟩|², d⟨S⁻⟩/dt = 4(g²/κ)⟨Sz⟩⟨S⁻⟩.
pub fn rhs_pulsed(p: &PhysParams, s: &MeanFieldState) -> MeanFieldDeriv {
    let k4 = 4.0 * p.purcell();
    MeanFieldDeriv {
        dsz: -k4 * s.sm.norm_sqr(),
        dsm: s.sm * (k4 * s.sz),
    }
}

/// Pulsed terms plus loading: +Γ/2 − Γ⟨Sz⟩/N and −(Γ/N)⟨S⁻⟩.
pub fn rhs_continuous(p: &PhysParams, s: &MeanFieldState) -> MeanFieldDeriv {
    let base = rhs_pulsed(p, s);
    let gr = p.gamma_r();
    MeanFieldDeriv {
        dsz: base.dsz + 0.5 * p.big_gamma() - gr * s.sz,
        dsm: base.dsm - s.sm * gr,
    }
}

/// Full beam-laser equations with spontaneous emission γ:
/// d⟨Sz⟩/dt = −4(g²/κ)|⟨S⁻⟩|² − γ(⟨Sz⟩+N/2) + Γ/2 − (Γ/N)⟨Sz⟩,
/// d⟨S⁻⟩/dt = [4(g²/κ)⟨Sz⟩ − γ/2 − Γ/N]⟨S⁻⟩.
pub fn rhs_continuous_spont(p: &PhysParams, s: &MeanFieldState) -> MeanFieldDeriv {
    let k4 = 4.0 * p.purcell();
    let gr = p.gamma_r();
    MeanFieldDeriv {
        dsz: -k4 * s.sm.norm_sqr() - p.gamma() * (s.sz + 0.5 * p.n()) + 0.5 * p.big_gamma()
            - gr * s.sz,
        dsm: s.sm * (k4 * s.sz - 0.5 * p.gamma() - gr),
    }
}

/// State for the variant that keeps the cavity amplitude explicit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonAdiabaticState {
    pub sz: f64,
    pub sm: C64,
    pub b: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonAdiabaticDeriv {
    pub dsz: f64,
    pub dsm: C64,
    pub db: C64,
}

/// db/dt = −(κ/2)b − ig⟨S⁻⟩, d⟨S⁻⟩/dt = 2ig⟨Sz⟩b − (Γ/N)⟨S⁻⟩,
/// d⟨Sz⟩/dt = ig(⟨S⁻⟩b* − ⟨S⁺⟩b) + Γ/2 − Γ⟨Sz⟩/N.
/// Loading acts on the atomic variables only, never on b.
pub fn rhs_nonadiabatic(p: &PhysParams, s: &NonAdiabaticState) -> NonAdiabaticDeriv {
    let i_g = C64::new(0.0, p.g());
    let gr = p.gamma_r();
    let dsz_c = i_g * (s.sm * s.b.conj() - s.sm.conj() * s.b);
    NonAdiabaticDeriv {
        dsz: dsz_c.re + 0.5 * p.big_gamma() - gr * s.sz,
        dsm: i_g * 2.0 * s.sz * s.b - s.sm * gr,
        db: -s.b * (0.5 * p.kappa()) - i_g * s.sm,
    }
}

/// Cavity amplitude slaved to the dipole: ⟨b⟩ = −2i(g/κ)⟨S⁻⟩.
pub fn adiabatic_field(p: &PhysParams, sm: C64) -> C64 {
    C64::new(0.0, -2.0 * p.g() / p.kappa()) * sm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Pulsed,
    Continuous,
    ContinuousSpont,
    NonAdiabatic,
}

impl Variant {
    pub fn needs_loading(&self) -> bool {
        matches!(self, Variant::Continuous | Variant::ContinuousSpont)
    }
}

/// One simulation request: variant, initial condition, duration.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioSpec {
    pub variant: Variant,
    pub sz0: f64,
    pub sm0: C64,
    /// Initial cavity amplitude, used by the non-adiabatic variant only.
    /// The cavity starts empty unless overridden.
    pub b0: C64,
    pub duration: f64,
}

impl ScenarioSpec {
    /// Almost fully inverted state with a microscopic real seed dipole
    /// |⟨S⁻⟩| = `seed_frac`·N; ⟨Sz⟩ completes the Bloch sphere of radius N/2.
    pub fn seeded(variant: Variant, p: &PhysParams, seed_frac: f64, duration: f64) -> Self {
        let n = p.n();
        let sm0 = C64::new(seed_frac * n, 0.0);
        let sz0 = ((0.5 * n) * (0.5 * n) - sm0.norm_sqr()).max(0.0).sqrt();
        Self {
            variant,
            sz0,
            sm0,
            b0: C64::new(0.0, 0.0),
            duration,
        }
    }
}

/// Sampled mean-field run. `b` is the integrated cavity amplitude for the
/// non-adiabatic variant and the adiabatically reconstructed −2i(g/κ)⟨S⁻⟩
/// otherwise, so any trajectory can feed the spectrum module.
#[derive(Debug, Clone)]
pub struct MfTrajectory {
    pub t: Vec<f64>,
    pub sz: Vec<f64>,
    pub sm: Vec<C64>,
    pub b: Vec<C64>,
}

impl MfTrajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn final_state(&self) -> MeanFieldState {
        MeanFieldState {
            sz: *self.sz.last().unwrap(),
            sm: *self.sm.last().unwrap(),
        }
    }

    /// Reinterpret the sampled field as a uniformly sampled record.
    /// Fails if the sampling is not uniform (adaptive-step runs).
    pub fn to_field_record(&self) -> Result<FieldRecord, SpectrumError> {
        FieldRecord::from_samples(self.t.first().copied().unwrap_or(0.0), &self.t, &self.b)
    }

    /// Record truncated to t <= t_cut (prefix), for spectra vs emission time.
    pub fn to_field_record_until(&self, t_cut: f64) -> Result<FieldRecord, SpectrumError> {
        let n = self.t.iter().take_while(|&&t| t <= t_cut * (1.0 + 1e-12)).count();
        FieldRecord::from_samples(self.t[0], &self.t[..n], &self.b[..n])
    }
}

/// Build the flat-complex ODE system for a variant. Layout: [Sz, Sm] or
/// [Sz, Sm, b]; Sz rides in the real part of component 0 (its imaginary
/// part stays exactly 0 under all four right-hand sides).
fn system_for(variant: Variant, p: PhysParams) -> FnSystem<impl Fn(f64, &[C64], &mut [C64])> {
    let dim = if variant == Variant::NonAdiabatic { 3 } else { 2 };
    FnSystem::new(dim, move |_t, y, dydt| match variant {
        Variant::Pulsed | Variant::Continuous | Variant::ContinuousSpont => {
            let s = MeanFieldState { sz: y[0].re, sm: y[1] };
            let d = match variant {
                Variant::Pulsed => rhs_pulsed(&p, &s),
                Variant::Continuous => rhs_continuous(&p, &s),
                _ => rhs_continuous_spont(&p, &s),
            };
            dydt[0] = C64::new(d.dsz, 0.0);
            dydt[1] = d.dsm;
        }
        Variant::NonAdiabatic => {
            let s = NonAdiabaticState { sz: y[0].re, sm: y[1], b: y[2] };
            let d = rhs_nonadiabatic(&p, &s);
            dydt[0] = C64::new(d.dsz, 0.0);
            dydt[1] = d.dsm;
            dydt[2] = d.db;
        }
    })
}

/// Run one scenario under the given policy.
pub fn run_scenario(
    spec: &ScenarioSpec,
    p: &PhysParams,
    policy: &IntegrationPolicy,
) -> Result<MfTrajectory, MeanFieldError> {
    if spec.variant.needs_loading() && p.big_gamma() <= 0.0 {
        return Err(MeanFieldError::LoadingRateRequired(spec.variant));
    }
    if spec.variant == Variant::NonAdiabatic {
        let limit = 0.1 / p.kappa();
        if policy.max_step() > limit {
            return Err(MeanFieldError::PolicyViolation {
                dt: policy.max_step(),
                limit,
            });
        }
    }
    let sys = system_for(spec.variant, *p);
    let mut y0 = vec![C64::new(spec.sz0, 0.0), spec.sm0];
    if spec.variant == Variant::NonAdiabatic {
        y0.push(spec.b0);
    }
    let traj = integrator::integrate(&sys, &y0, 0.0, spec.duration, policy)?;
    let n = traj.len();
    let mut out = MfTrajectory {
        t: traj.t,
        sz: Vec::with_capacity(n),
        sm: Vec::with_capacity(n),
        b: Vec::with_capacity(n),
    };
    for y in &traj.y {
        out.sz.push(y[0].re);
        out.sm.push(y[1]);
        out.b.push(if spec.variant == Variant::NonAdiabatic {
            y[2]
        } else {
            adiabatic_field(p, y[1])
        });
    }
    Ok(out)
}

/// Steady state by integration: residual ‖rhs‖∞ ≤ eps held for 10/Γ_R.
pub fn steady_state_by_integration(
    variant: Variant,
    p: &PhysParams,
    from: MeanFieldState,
    policy: &IntegrationPolicy,
    eps: f64,
    t_max: f64,
) -> Result<MeanFieldState, MeanFieldError> {
    if variant.needs_loading() && p.big_gamma() <= 0.0 {
        return Err(MeanFieldError::LoadingRateRequired(variant));
    }
    let hold = if p.big_gamma() > 0.0 { 10.0 / p.gamma_r() } else { t_max * 0.1 };
    let sys = system_for(variant, *p);
    let y0 = [C64::new(from.sz, 0.0), from.sm];
    let (y, _res) = integrator::find_steady_state(&sys, &y0, policy, eps, hold, t_max)?;
    Ok(MeanFieldState { sz: y[0].re, sm: y[1] })
}
