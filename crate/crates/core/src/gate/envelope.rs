use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeShape {
    #[default]
    Rectangular,
    ErfRamp,
}

/// Exponential settling of the drive power after switch-on,
/// g(t) = 1 + amplitude·exp(−t/time_constant).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transient {
    pub amplitude: f64,
    pub time_constant: f64,
}

impl Transient {
    pub fn factor(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 || self.time_constant <= 0.0 {
            1.0
        } else {
            1.0 + self.amplitude * (-t / self.time_constant).exp()
        }
    }
}

/// Amplitude envelope of the gate pulse on [0, gate_time].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseEnvelope {
    pub ramp_time: f64,
    pub gate_time: f64,
    pub shape: EnvelopeShape,
    pub transient: Transient,
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

impl PulseEnvelope {
    pub fn new(shape: EnvelopeShape, ramp_time: f64, gate_time: f64) -> Result<Self> {
        if !(gate_time > 0.0) || !(ramp_time >= 0.0) {
            return Err(Error::InvalidParameter(format!("bad pulse timing: ramp {ramp_time}, gate {gate_time}")));
        }
        if shape == EnvelopeShape::ErfRamp && !(gate_time > 2.0 * ramp_time && ramp_time > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "erf ramps of {ramp_time} s do not fit in a {gate_time} s pulse"
            )));
        }
        Ok(Self { ramp_time, gate_time, shape, transient: Transient::default() })
    }

    pub fn rectangular(gate_time: f64) -> Self {
        Self { ramp_time: 0.0, gate_time, shape: EnvelopeShape::Rectangular, transient: Transient::default() }
    }

    pub fn with_transient(mut self, transient: Transient) -> Self {
        self.transient = transient;
        self
    }

    /// Envelope value; fails outside [0, gate_time].
    pub fn value(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.gate_time).contains(&t) {
            return Err(Error::InvalidParameter(format!("t = {t} outside pulse [0, {}]", self.gate_time)));
        }
        Ok(self.shape_at(t))
    }

    /// Envelope times the transient factor, clamped to the pulse window.
    pub fn drive(&self, t: f64) -> f64 {
        self.shape_at(t.clamp(0.0, self.gate_time)) * self.transient.factor(t.max(0.0))
    }

    fn shape_at(&self, t: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Rectangular => 1.0,
            EnvelopeShape::ErfRamp => {
                let r = self.ramp_time;
                let sigma = r / 6.0;
                if t < r {
                    normal_cdf((t - 0.5 * r) / sigma)
                } else if t > self.gate_time - r {
                    normal_cdf((self.gate_time - t - 0.5 * r) / sigma)
                } else {
                    1.0
                }
            }
        }
    }

    /// Times where the envelope has kinks or jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.shape {
            EnvelopeShape::Rectangular => Vec::new(),
            EnvelopeShape::ErfRamp => vec![self.ramp_time, self.gate_time - self.ramp_time],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn erf_env() -> PulseEnvelope {
        PulseEnvelope::new(EnvelopeShape::ErfRamp, 2e-6, 808.6e-6).unwrap()
    }

    #[test]
    fn midpoints() {
        let e = erf_env();
        assert!((e.value(e.gate_time / 2.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((e.value(1e-6).unwrap() - 0.5).abs() < 1e-15);
        assert!(e.value(0.0).unwrap() < 0.002);
        assert!(e.value(-1e-9).is_err());
        assert!(e.value(e.gate_time + 1e-9).is_err());
        assert_eq!(PulseEnvelope::rectangular(1e-3).value(0.3e-3).unwrap(), 1.0);
    }

    #[test]
    fn time_reversal_symmetry() {
        let e = erf_env();
        for k in 0..=400 {
            let t = e.gate_time * k as f64 / 400.0;
            let v = e.value(t).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!((v - e.value(e.gate_time - t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn area_loses_one_ramp_time() {
        // composite midpoint rule; never samples the jump at the piece edges
        let e = erf_env();
        let midpoint = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            (0..n).map(|i| e.value(a + (i as f64 + 0.5) * h).unwrap()).sum::<f64>() * h
        };
        let r = e.ramp_time;
        let area = midpoint(0.0, r, 20000) + midpoint(r, e.gate_time - r, 4) + midpoint(e.gate_time - r, e.gate_time, 20000);
        assert!((area - (e.gate_time - r)).abs() < 1e-9 * e.gate_time, "area {area}");
    }

    #[test]
    fn rejects_ramps_longer_than_half_the_pulse() {
        assert!(PulseEnvelope::new(EnvelopeShape::ErfRamp, 5e-6, 8e-6).is_err());
    }

    #[test]
    fn transient_multiplies_drive() {
        let e = PulseEnvelope::rectangular(1e-3).with_transient(Transient { amplitude: 0.01, time_constant: 1e-4 });
        assert!((e.drive(0.0) - 1.01).abs() < 1e-15);
        assert!((e.drive(1e-4) - (1.0 + 0.01 * (-1f64).exp())).abs() < 1e-15);
    }
}
