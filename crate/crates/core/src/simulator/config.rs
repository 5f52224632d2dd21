use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Element precision of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub fn name(self) -> &'static str {
        match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(Error::Argument(format!("unknown precision `{s}`"))),
        }
    }
}

/// Parameters of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub nz: usize,
    pub nx: usize,
    /// Grid spacing in metres, identical along x and z.
    pub dh: f64,
    /// Time step in seconds.
    pub dt: f64,
    pub nt: usize,
    pub src_iz: usize,
    pub src_ix: usize,
    /// Ricker peak frequency in Hz.
    pub src_freq: f64,
    /// Ricker delay in seconds.
    pub src_delay: f64,
    /// 2 or 4.
    pub stencil_order: u32,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    pub precision: Precision,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nz == 0 || self.nx == 0 {
            return Err(Error::Argument(format!(
                "grid extents must be positive, got {}x{}",
                self.nz, self.nx
            )));
        }
        if !(self.dh > 0.0 && self.dh.is_finite()) {
            return Err(Error::Argument(format!(
                "dh must be positive, got {}",
                self.dh
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Argument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.src_iz >= self.nz || self.src_ix >= self.nx {
            return Err(Error::Argument(format!(
                "source ({}, {}) outside {}x{} grid",
                self.src_iz, self.src_ix, self.nz, self.nx
            )));
        }
        if !(self.src_freq > 0.0) {
            return Err(Error::Argument(format!(
                "source frequency must be positive, got {}",
                self.src_freq
            )));
        }
        if !(self.src_delay >= 0.0) {
            return Err(Error::Argument(format!(
                "source delay must be non-negative, got {}",
                self.src_delay
            )));
        }
        let width = self.stencil_order as usize + 1;
        if self.stencil_order != 2 && self.stencil_order != 4 {
            return Err(Error::Argument(format!(
                "stencil order must be 2 or 4, got {}",
                self.stencil_order
            )));
        }
        if self.nz < width || self.nx < width {
            return Err(Error::Argument(format!(
                "{}x{} grid is smaller than the {width}-point stencil",
                self.nz, self.nx
            )));
        }
        Ok(())
    }
}

/// Outcome of the stability check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflCheck {
    /// `v_max·dt/dh`.
    pub ratio: f64,
    pub limit: f64,
    pub passed: bool,
}

impl CflCheck {
    /// `limit - ratio`; negative when the check fails.
    pub fn margin(&self) -> f64 {
        self.limit - self.ratio
    }
}

/// Largest stable `v·dt/dh` for the leapfrog scheme in 2D.
pub fn cfl_limit(stencil_order: u32) -> f64 {
    match stencil_order {
        4 => (3.0f64 / 8.0).sqrt(),
        _ => std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// Checks `v_max·dt/dh <= C(order)`.
///
/// The comparison allows a relative slack of a few ulp so that a time step
/// derived as exactly `dh / (v_max·√2)` passes despite rounding.
pub fn check_cfl(cfg: &SimConfig, v_max: f64) -> CflCheck {
    let ratio = v_max * cfg.dt / cfg.dh;
    let limit = cfl_limit(cfg.stencil_order);
    CflCheck {
        ratio,
        limit,
        passed: ratio <= limit * (1.0 + 4.0 * f64::EPSILON),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base() -> SimConfig {
        SimConfig {
            nz: 101,
            nx: 101,
            dh: 10.0,
            dt: 0.003,
            nt: 10,
            src_iz: 50,
            src_ix: 50,
            src_freq: 25.0,
            src_delay: 0.04,
            stencil_order: 2,
            snapshot_every: 0,
            precision: Precision::F32,
        }
    }

    #[test]
    fn cfl_ratio_direct_arithmetic() {
        let c = check_cfl(&base(), 2000.0);
        assert!((c.ratio - 0.6).abs() < 1e-12);
        assert!((c.limit - 0.707_106_781_186_547_5).abs() < 1e-15);
        assert!(c.passed);
        assert!(c.margin() > 0.1);
    }

    #[test]
    fn cfl_equality_passes() {
        let mut cfg = base();
        cfg.dt = cfg.dh / (2000.0 * 2f64.sqrt());
        assert!(check_cfl(&cfg, 2000.0).passed);
        cfg.stencil_order = 4;
        cfg.dt = cfg.dh * (3.0f64 / 8.0).sqrt() / 2000.0;
        assert!(check_cfl(&cfg, 2000.0).passed);
    }

    #[test]
    fn cfl_doubled_fails() {
        let mut cfg = base();
        cfg.dt = 2.0 * cfg.dh / (2000.0 * 2f64.sqrt());
        let c = check_cfl(&cfg, 2000.0);
        assert!(!c.passed);
        assert!(c.margin() < 0.0);
    }

    #[test]
    fn validate_rejects_bad_fields() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.src_ix = 101;
        assert!(c.validate().is_err());
        let mut c = base();
        c.stencil_order = 3;
        assert!(c.validate().is_err());
        let mut c = base();
        c.src_freq = 0.0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.nx = 4;
        c.src_ix = 0;
        c.stencil_order = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn precision_parse() {
        assert_eq!("f64".parse::<Precision>().unwrap(), Precision::F64);
        assert!("f16".parse::<Precision>().is_err());
    }
}
