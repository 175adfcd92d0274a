use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates and drives, all in units of the cavity decay rate.
///
/// The qubit-drive detuning, the dispersive ratio `chi / g` and the Purcell
/// rate are derived on demand from `chi` and `g` so they can never go stale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub kappa: f64,
    pub chi: f64,
    pub epsilon: f64,
    pub g: f64,
    pub gamma: [f64; 3],
    pub eta: f64,
    pub phi: f64,
    pub f_max: f64,
    pub dt: f64,
    pub include_stray_drive: bool,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            kappa: 1.0,
            chi: -0.11,
            epsilon: 2.0,
            g: 10.0,
            gamma: [4e-3; 3],
            eta: 1.0,
            phi: 0.0,
            f_max: 2.0,
            dt: 1e-3,
            include_stray_drive: false,
        }
    }
}

impl SystemParams {
    pub fn with_chi(mut self, chi: f64) -> Self {
        self.chi = chi;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = [gamma; 3];
        self
    }

    pub fn with_gammas(mut self, gamma: [f64; 3]) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_f_max(mut self, f_max: f64) -> Self {
        self.f_max = f_max;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// `lambda = chi / g`.
    pub fn lambda(&self) -> f64 {
        self.chi / self.g
    }

    /// Qubit-drive detuning `Delta = g^2 / chi`; infinite when `chi == 0`.
    pub fn delta(&self) -> f64 {
        self.g * self.g / self.chi
    }

    /// Collective Purcell rate `kappa lambda^2`.
    pub fn purcell_rate(&self) -> f64 {
        self.kappa * self.lambda().powi(2)
    }

    /// Cavity-mediated exchange coupling; equals `chi` for identical couplings.
    pub fn exchange_coupling(&self) -> f64 {
        self.chi
    }

    pub fn mean_gamma(&self) -> f64 {
        self.gamma.iter().sum::<f64>() / self.gamma.len() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite = [self.kappa, self.chi, self.epsilon, self.g, self.eta, self.phi, self.f_max, self.dt]
            .iter()
            .chain(self.gamma.iter())
            .all(|v| v.is_finite());
        if !finite {
            return bad("parameters must be finite".into());
        }
        if self.kappa <= 0.0 {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad(format!("eta must lie in [0, 1], got {}", self.eta));
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.g <= 0.0 {
            return bad(format!("g must be positive, got {}", self.g));
        }
        if self.gamma.iter().any(|&g| g < 0.0) {
            return bad(format!("decay rates must be non-negative, got {:?}", self.gamma));
        }
        if self.f_max < 0.0 {
            return bad(format!("f_max must be non-negative, got {}", self.f_max));
        }
        if self.include_stray_drive {
            if self.chi == 0.0 {
                return bad("stray drive needs chi != 0 (Delta = g^2/chi)".into());
            }
            let limit = 0.05 / self.delta().abs();
            if self.dt > limit {
                return bad(format!(
                    "stray drive oscillates at |Delta| = {:.1}; dt must be <= {limit:.3e}, got {}",
                    self.delta().abs(),
                    self.dt
                ));
            }
        }
        Ok(())
    }
}
