use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Rates of an incoherently pumped two-level emitter and its detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelEmitterParams {
    /// Ground → excited transitions per second.
    pub pump_rate: f64,
    /// Inverse excited-state lifetime, per second.
    pub decay_rate: f64,
    pub detection_efficiency: f64,
    /// Uncorrelated (Poissonian) background, counts per second.
    pub background_rate: f64,
}

impl TwoLevelEmitterParams {
    pub fn new(pump_rate: f64, decay_rate: f64, detection_efficiency: f64, background_rate: f64) -> Result<Self> {
        let p = Self {
            pump_rate,
            decay_rate,
            detection_efficiency,
            background_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pump_rate >= 0.0 && self.pump_rate.is_finite()) {
            return Err(invalid("pump rate must be finite and >= 0"));
        }
        if !(self.decay_rate > 0.0 && self.decay_rate.is_finite()) {
            return Err(invalid("decay rate must be finite and > 0"));
        }
        if !(self.detection_efficiency > 0.0 && self.detection_efficiency <= 1.0) {
            return Err(invalid("detection efficiency must be in (0, 1]"));
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return Err(invalid("background rate must be finite and >= 0"));
        }
        Ok(())
    }

    /// Steady-state detected emitter rate `η · pump · decay / (pump + decay)`.
    pub fn signal_rate(&self) -> f64 {
        self.detection_efficiency * self.pump_rate * self.decay_rate / (self.pump_rate + self.decay_rate)
    }

    /// Fraction of detections that come from the emitter.
    pub fn signal_fraction(&self) -> f64 {
        let s = self.signal_rate();
        if s + self.background_rate == 0.0 {
            return 0.0;
        }
        s / (s + self.background_rate)
    }

    /// Copy with the background chosen so that `signal_fraction() == rho`.
    pub fn with_signal_fraction(self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(invalid(format!("signal fraction must be in (0, 1], got {rho}")));
        }
        Ok(Self {
            background_rate: self.signal_rate() * (1.0 - rho) / rho,
            ..self
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Channel {
    #[default]
    Combined,
    A,
    B,
}

/// Sorted detection times of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    timestamps: Vec<f64>,
    duration: f64,
    channel: Channel,
}

impl PhotonStream {
    /// Timestamps must be strictly increasing and lie in `[0, duration]`.
    pub fn new(timestamps: Vec<f64>, duration: f64, channel: Channel) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(invalid(format!("stream duration must be positive, got {duration}")));
        }
        if timestamps.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("timestamps must be strictly increasing"));
        }
        if let (Some(&first), Some(&last)) = (timestamps.first(), timestamps.last()) {
            if first < 0.0 || last > duration {
                return Err(invalid("timestamps must lie within [0, duration]"));
            }
        }
        Ok(Self {
            timestamps,
            duration,
            channel,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Mean count rate over the stream duration.
    pub fn rate(&self) -> f64 {
        self.timestamps.len() as f64 / self.duration
    }
}

fn poisson_times(rate: f64, duration: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let wait = Exp::new(rate).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += wait.sample(rng);
        if t > duration {
            return out;
        }
        out.push(t);
    }
}

/// Photon detections from a two-level emitter plus Poissonian background.
///
/// The emitter alternates exponential waits: excitation at `pump_rate`, then
/// spontaneous emission at `decay_rate`. Each emitted photon is detected with
/// probability `detection_efficiency`. Background events come from an
/// independent substream and are merged in; coincident timestamps (a
/// measure-zero event) keep only the first copy.
pub fn simulate_two_level_stream(params: &TwoLevelEmitterParams, duration: f64, seed: u64) -> Result<PhotonStream> {
    params.validate()?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("duration must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signal = Vec::new();
    if params.pump_rate > 0.0 {
        let excite = Exp::new(params.pump_rate).expect("positive pump");
        let emit = Exp::new(params.decay_rate).expect("positive decay");
        let mut t = 0.0;
        loop {
            t += excite.sample(&mut rng) + emit.sample(&mut rng);
            if t > duration {
                break;
            }
            if params.detection_efficiency >= 1.0 || rng.random::<f64>() < params.detection_efficiency {
                signal.push(t);
            }
        }
    }
    let mut bg_rng = ChaCha8Rng::seed_from_u64(seed);
    bg_rng.set_stream(1);
    let background = poisson_times(params.background_rate, duration, &mut bg_rng);
    PhotonStream::new(merge_sorted(&signal, &background), duration, Channel::Combined)
}

/// Homogeneous Poisson stream, e.g. a laser or thermal reference.
pub fn simulate_poisson_stream(rate: f64, duration: f64, channel: Channel, seed: u64) -> Result<PhotonStream> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(invalid("rate must be finite and >= 0"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("duration must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PhotonStream::new(poisson_times(rate, duration, &mut rng), duration, channel)
}

fn merge_sorted(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        if out.last().is_none_or(|&last| next > last) {
            out.push(next);
        }
    }
    out
}

/// Route each detection to detector A or B with probability 1/2, as a 50/50
/// beamsplitter does.
pub fn hbt_split(stream: &PhotonStream, seed: u64) -> (PhotonStream, PhotonStream) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b): (Vec<f64>, Vec<f64>) = stream.timestamps().iter().partition(|_| rng.random::<bool>());
    let make = |ts, ch| PhotonStream {
        timestamps: ts,
        duration: stream.duration(),
        channel: ch,
    };
    (make(a, Channel::A), make(b, Channel::B))
}
