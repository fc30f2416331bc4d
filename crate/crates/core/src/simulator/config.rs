use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pulse and timing parameters of the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    /// Center frequency in Hz.
    pub f_c: f64,
    /// Raised-cosine bandwidth `B` in Hz.
    pub bandwidth: f64,
    /// Roll-off factor in `[0, 1]`.
    pub rolloff: f64,
    /// Fast-time sampling interval in seconds.
    pub t_ft: f64,
    /// Slow-time repetition interval in seconds.
    pub t_st: f64,
    pub n_fast: usize,
    pub m_slow: usize,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            f_c: 6.5e9,
            bandwidth: 500e6,
            rolloff: 0.5,
            t_ft: 0.5e-9,
            t_st: 0.1,
            n_fast: 64,
            m_slow: 100,
        }
    }
}

impl RadarConfig {
    /// The wideband variant of the recordings: 5 GHz around 7 GHz.
    pub fn wideband() -> Self {
        Self {
            f_c: 7e9,
            bandwidth: 5e9,
            t_ft: 0.05e-9,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::Config(format!("roll-off {} outside [0, 1]", self.rolloff)));
        }
        if !(self.bandwidth > 0.0 && self.t_ft > 0.0 && self.t_st > 0.0 && self.f_c >= 0.0) {
            return Err(Error::Config(
                "bandwidth, t_ft and t_st must be positive, f_c non-negative".into(),
            ));
        }
        if self.n_fast < 1 || self.m_slow < 2 {
            return Err(Error::Config(format!(
                "need n_fast >= 1 and m_slow >= 2, got {}x{}",
                self.n_fast, self.m_slow
            )));
        }
        let edge = self.band_edge();
        let nyquist = 0.5 / self.t_ft;
        if edge >= nyquist {
            return Err(Error::Config(format!(
                "pulse band edge {edge:e} Hz not below the sampling Nyquist frequency {nyquist:e} Hz"
            )));
        }
        Ok(())
    }

    /// `(1 + β) B / 2`: the highest baseband frequency with nonzero response.
    pub fn band_edge(&self) -> f64 {
        (1.0 + self.rolloff) * self.bandwidth / 2.0
    }

    /// Length of the fast-time window `N T_ft` in seconds.
    pub fn window(&self) -> f64 {
        self.n_fast as f64 * self.t_ft
    }
}
