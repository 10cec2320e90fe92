//! The full equation: nonlinearity, dispersal kernel, birth smoothing and delay.

use crate::error::{Error, Result};
use crate::kernels::{HeatKernelParams, Kernel};
use crate::monostable::Monostable;

#[derive(Debug, Clone)]
pub struct Model {
    pub monostable: Monostable,
    pub kernel: Kernel,
    pub heat: HeatKernelParams,
    pub tau: f64,
}

impl Model {
    pub fn new(monostable: Monostable, kernel: Kernel, heat: HeatKernelParams, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Model { monostable, kernel, heat, tau })
    }

    pub fn u_plus(&self) -> f64 {
        self.monostable.u_plus
    }
}
