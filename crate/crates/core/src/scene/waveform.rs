//! Waveform catalog and baseband sample generators.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformClass {
    LfmUpsweep,
    PhaseCodedZc64,
}

impl WaveformClass {
    pub const ALL: [WaveformClass; 2] = [WaveformClass::LfmUpsweep, WaveformClass::PhaseCodedZc64];

    pub fn as_str(self) -> &'static str {
        match self {
            WaveformClass::LfmUpsweep => "lfm_upsweep",
            WaveformClass::PhaseCodedZc64 => "phase_coded_zc64",
        }
    }

    /// Multipliers applied to the reference (range, velocity) noise sigmas.
    /// Phase-coded pulses trade range accuracy for Doppler accuracy.
    pub fn sigma_factors(self) -> (f64, f64) {
        match self {
            WaveformClass::LfmUpsweep => (1.0, 1.0),
            WaveformClass::PhaseCodedZc64 => (2.0, 0.5),
        }
    }
}

impl fmt::Display for WaveformClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Waveform {
    pub class: WaveformClass,
    pub subchannel: u32,
}

/// The `2 * S` waveforms, indexed class-major: action `a` is class `a / S`
/// on sub-channel `a % S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveformCatalog {
    subchannels: u32,
}

impl WaveformCatalog {
    pub fn new(subchannels: u32) -> Result<Self> {
        if subchannels == 0 {
            return Err(Error::Config("at least one sub-channel is required".into()));
        }
        Ok(Self { subchannels })
    }

    pub fn subchannels(&self) -> u32 {
        self.subchannels
    }

    pub fn len(&self) -> u32 {
        2 * self.subchannels
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn waveform(&self, action: Action) -> Result<Waveform> {
        if action.0 >= self.len() {
            return Err(Error::AlphabetViolation {
                symbol: action.0,
                arity: self.len(),
            });
        }
        let class = WaveformClass::ALL[(action.0 / self.subchannels) as usize];
        Ok(Waveform {
            class,
            subchannel: action.0 % self.subchannels,
        })
    }

    pub fn action(&self, waveform: Waveform) -> Result<Action> {
        if waveform.subchannel >= self.subchannels {
            return Err(Error::AlphabetViolation {
                symbol: waveform.subchannel,
                arity: self.subchannels,
            });
        }
        let class = match waveform.class {
            WaveformClass::LfmUpsweep => 0,
            WaveformClass::PhaseCodedZc64 => 1,
        };
        Ok(Action(class * self.subchannels + waveform.subchannel))
    }

    pub fn iter(&self) -> impl Iterator<Item = Waveform> + '_ {
        (0..self.len()).map(|a| self.waveform(Action(a)).expect("index in range"))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zadoff-Chu sequence `exp(-i pi r n (n + c) / L)` with `c = L mod 2`.
pub fn gen_zadoff_chu(length: usize, root: usize) -> Result<Vec<Complex64>> {
    if length == 0 {
        return Err(Error::Parameter("Zadoff-Chu length must be >= 1".into()));
    }
    if root == 0 || gcd(root as u64, length as u64) != 1 {
        return Err(Error::Parameter(format!(
            "Zadoff-Chu root {root} is not coprime with length {length}"
        )));
    }
    let l = length as u64;
    let c = l % 2;
    let r = root as u64;
    Ok((0..l)
        .map(|n| {
            // Reduce the phase numerator mod 2L exactly before going to floats.
            let num = ((r % (2 * l)) * ((n * (n + c)) % (2 * l))) % (2 * l);
            Complex64::from_polar(1.0, -PI * num as f64 / l as f64)
        })
        .collect())
}

/// Unit-modulus upsweep chirp whose instantaneous frequency rises linearly
/// from 0 to `norm_bandwidth` cycles/sample over the pulse.
pub fn gen_lfm(samples: usize, norm_bandwidth: f64) -> Result<Vec<Complex64>> {
    if samples < 2 {
        return Err(Error::Parameter(
            "LFM pulse needs at least 2 samples".into(),
        ));
    }
    if !norm_bandwidth.is_finite() {
        return Err(Error::Parameter("LFM bandwidth must be finite".into()));
    }
    let span = (samples - 1) as f64;
    Ok((0..samples)
        .map(|n| {
            let t = n as f64;
            Complex64::from_polar(1.0, PI * norm_bandwidth * t * t / span)
        })
        .collect())
}

/// Periodic autocorrelation `sum_n x[n] conj(x[n + lag mod L])`.
pub fn periodic_autocorrelation(x: &[Complex64], lag: usize) -> Complex64 {
    let l = x.len();
    (0..l).map(|n| x[n] * x[(n + lag) % l].conj()).sum()
}
