//! Flat key/value parameter files and flag overrides.
//!
//! Recognized keys: `g_hz`, `kappa_hz`, `gamma_hz`, `N`, and exactly one
//! of `gammaR_hz` / `Gamma_hz`. Values are ν = ω/2π in Hz. CLI flags win
//! over file keys; file keys win over the command's built-in defaults.

use crate::CliError;
use srbeam_core::params::{LoadingRate, PhysParams};
use std::path::Path;

/// Loading-rate specification before Γ vs Γ_R disambiguation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LoadingSpec {
    GammaHz(f64),
    GammaRHz(f64),
    None,
}

/// Mutable parameter set in external (Hz) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsBuilder {
    pub g_hz: f64,
    pub kappa_hz: f64,
    pub gamma_hz: f64,
    pub loading: LoadingSpec,
    pub n: f64,
}

impl ParamsBuilder {
    pub fn new(g_hz: f64, kappa_hz: f64, gamma_hz: f64, loading: LoadingSpec, n: f64) -> Self {
        Self {
            g_hz,
            kappa_hz,
            gamma_hz,
            loading,
            n,
        }
    }

    /// Apply a parsed config file on top of the defaults.
    pub fn apply_file(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        let mut seen_loading: Option<&str> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                CliError::usage(format!(
                    "{}:{}: value for `{key}` is not a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            match key {
                "g_hz" => self.g_hz = value,
                "kappa_hz" => self.kappa_hz = value,
                "gamma_hz" => self.gamma_hz = value,
                "N" => self.n = value,
                "gammaR_hz" | "Gamma_hz" => {
                    if let Some(prev) = seen_loading {
                        return Err(CliError::usage(format!(
                            "{}: both `{prev}` and `{key}` given; use exactly one",
                            path.display()
                        )));
                    }
                    seen_loading = Some(if key == "gammaR_hz" { "gammaR_hz" } else { "Gamma_hz" });
                    self.loading = if key == "gammaR_hz" {
                        LoadingSpec::GammaRHz(value)
                    } else {
                        LoadingSpec::GammaHz(value)
                    };
                }
                other => {
                    return Err(CliError::usage(format!(
                        "{}: unknown config key `{other}` (known: g_hz, kappa_hz, gamma_hz, gammaR_hz, Gamma_hz, N)",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Apply command-line overrides (highest priority).
    pub fn apply_flags(&mut self, flags: &ParamFlags) -> Result<(), CliError> {
        if let Some(v) = flags.g_hz {
            self.g_hz = v;
        }
        if let Some(v) = flags.kappa_hz {
            self.kappa_hz = v;
        }
        if let Some(v) = flags.gamma_hz {
            self.gamma_hz = v;
        }
        if let Some(v) = flags.n {
            self.n = v;
        }
        match (flags.gamma_r_hz, flags.big_gamma_hz) {
            (Some(_), Some(_)) => {
                return Err(CliError::usage(
                    "--gamma-r-hz and --big-gamma-hz are mutually exclusive",
                ))
            }
            (Some(v), None) => self.loading = LoadingSpec::GammaRHz(v),
            (None, Some(v)) => self.loading = LoadingSpec::GammaHz(v),
            (None, None) => {}
        }
        Ok(())
    }

    pub fn build(&self) -> Result<PhysParams, CliError> {
        let loading = match self.loading {
            LoadingSpec::GammaHz(v) => LoadingRate::GammaHz(v),
            LoadingSpec::GammaRHz(v) => LoadingRate::GammaRHz(v),
            LoadingSpec::None => LoadingRate::GammaHz(0.0),
        };
        PhysParams::from_hz(self.g_hz, self.kappa_hz, self.gamma_hz, loading, self.n)
            .map_err(|e| CliError::usage(e.to_string()))
    }

    /// Resolve defaults + optional config file + flags into parameters.
    pub fn resolve(
        mut self,
        config: Option<&Path>,
        flags: &ParamFlags,
    ) -> Result<PhysParams, CliError> {
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            self.apply_file(&text, path)?;
        }
        self.apply_flags(flags)?;
        self.build()
    }
}

/// Shared physical-parameter flags.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct ParamFlags {
    /// Atom-cavity coupling g/2pi in Hz.
    #[arg(long)]
    pub g_hz: Option<f64>,
    /// Cavity linewidth kappa/2pi in Hz.
    #[arg(long)]
    pub kappa_hz: Option<f64>,
    /// Spontaneous-emission rate gamma/2pi in Hz.
    #[arg(long)]
    pub gamma_hz: Option<f64>,
    /// Refreshing rate GammaR/2pi in Hz (Gamma = N * GammaR).
    #[arg(long)]
    pub gamma_r_hz: Option<f64>,
    /// Loading rate Gamma/2pi in Hz.
    #[arg(long)]
    pub big_gamma_hz: Option<f64>,
    /// Steady-state intracavity atom number.
    #[arg(long, short = 'N')]
    pub n: Option<f64>,
}

/// The resolved parameter snapshot in external units, as embedded in CSV
/// headers and manifests.
pub fn params_json(p: &PhysParams) -> String {
    let tau = std::f64::consts::TAU;
    format!(
        "{{\"g_hz\":{},\"kappa_hz\":{},\"gamma_hz\":{},\"gammaR_hz\":{},\"Gamma_hz\":{},\"N\":{}}}",
        p.g() / tau,
        p.kappa() / tau,
        p.gamma() / tau,
        p.gamma_r() / tau,
        p.big_gamma() / tau,
        p.n()
    )
}
