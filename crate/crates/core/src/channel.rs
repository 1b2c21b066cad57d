//! Sensor-to-LFC link: Rayleigh flat fading, BPSK, coherent detection.
//!
//! Transmit power is 1 and `E[|h|²] = 1`, so the average SNR lives entirely
//! in the noise variance (`noise_var = 1 / snr`). Complex noise is circular:
//! each quadrature carries half of `noise_var`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::normal_sf;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    #[serde(with = "crate::serde_complex")]
    pub h: Complex64,
    pub noise_var: f64,
}

impl ChannelRealization {
    pub fn new(h: Complex64, noise_var: f64) -> Result<Self> {
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::param("noise_var", format!("must be positive, got {noise_var}")));
        }
        if !(h.re.is_finite() && h.im.is_finite()) {
            return Err(Error::param("h", "fading coefficient must be finite"));
        }
        Ok(Self { h, noise_var })
    }

    /// Instantaneous SNR `|h|² / σ_n²`.
    #[inline]
    pub fn snr(&self) -> f64 {
        self.h.norm_sqr() / self.noise_var
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceivedSample {
    #[serde(with = "crate::serde_complex")]
    pub r: Complex64,
    pub realization: ChannelRealization,
}

/// Bit error probability of a link and the sensor rates seen through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub pb: f64,
    pub pf_eq: f64,
    pub pm_eq: f64,
}

/// Draw a Rayleigh fading coefficient for a link with linear average SNR.
pub fn sample_channel<R: Rng + ?Sized>(avg_snr: f64, rng: &mut R) -> Result<ChannelRealization> {
    if !(avg_snr > 0.0 && avg_snr.is_finite()) {
        return Err(Error::param("avg_snr", format!("must be positive, got {avg_snr}")));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Ok(ChannelRealization {
        h: Complex64::new(scale * re, scale * im),
        noise_var: 1.0 / avg_snr,
    })
}

/// `r = h·(1 − 2x) + n`.
pub fn transmit<R: Rng + ?Sized>(
    alarm: bool,
    channel: &ChannelRealization,
    rng: &mut R,
) -> ReceivedSample {
    let symbol = if alarm { -1.0 } else { 1.0 };
    let std = (0.5 * channel.noise_var).sqrt();
    let n_re: f64 = rng.sample(StandardNormal);
    let n_im: f64 = rng.sample(StandardNormal);
    ReceivedSample {
        r: channel.h * symbol + Complex64::new(std * n_re, std * n_im),
        realization: *channel,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardDetection {
    pub alarm: bool,
    /// Set when `h = 0`, where the matched filter carries no information.
    pub degenerate: bool,
}

/// Coherent matched-filter BPSK decision: alarm iff `Re(conj(h)·r) < 0`.
pub fn hard_detect(sample: &ReceivedSample) -> HardDetection {
    let h = sample.realization.h;
    if h.re == 0.0 && h.im == 0.0 {
        return HardDetection {
            alarm: false,
            degenerate: true,
        };
    }
    let metric = (h.conj() * sample.r).re;
    HardDetection {
        alarm: metric < 0.0,
        degenerate: false,
    }
}

/// Coherent BPSK error probability for the realized channel,
/// `Q(√(2|h|²/σ_n²))`.
pub fn bit_error_prob(channel: &ChannelRealization) -> f64 {
    normal_sf((2.0 * channel.snr()).sqrt())
}

/// Sensor rates composed with a binary symmetric channel of crossover `pb`.
pub fn equivalent_probabilities(pf: f64, pm: f64, pb: f64) -> Result<LinkStats> {
    for (name, v) in [("pf", pf), ("pm", pm), ("pb", pb)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param(name, format!("must be in [0, 1], got {v}")));
        }
    }
    Ok(LinkStats {
        pb,
        pf_eq: pf * (1.0 - pb) + (1.0 - pf) * pb,
        pm_eq: pm * (1.0 - pb) + (1.0 - pm) * pb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_bpsk_mapping() {
        let ch = ChannelRealization::new(Complex64::new(0.3, -0.8), 1e-300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let zero = transmit(false, &ch, &mut rng);
        let one = transmit(true, &ch, &mut rng);
        assert!((zero.r - ch.h).norm() < 1e-140);
        assert!((one.r + ch.h).norm() < 1e-140);
        assert!(!hard_detect(&zero).alarm);
        assert!(hard_detect(&one).alarm);
    }

    #[test]
    fn exact_symbols_detect() {
        let ch = ChannelRealization::new(Complex64::new(-1.2, 0.4), 0.1).unwrap();
        let r_h = ReceivedSample { r: ch.h, realization: ch };
        let r_neg = ReceivedSample { r: -ch.h, realization: ch };
        assert!(!hard_detect(&r_h).alarm);
        assert!(hard_detect(&r_neg).alarm);
    }

    #[test]
    fn zero_channel_is_flagged() {
        let ch = ChannelRealization::new(Complex64::new(0.0, 0.0), 0.1).unwrap();
        let d = hard_detect(&ReceivedSample { r: Complex64::new(-3.0, 0.0), realization: ch });
        assert_eq!(d, HardDetection { alarm: false, degenerate: true });
        assert_eq!(bit_error_prob(&ch), 0.5);
    }

    #[test]
    fn ber_tail_limit() {
        let ch = ChannelRealization::new(Complex64::new(1.0, 0.0), 1e-6).unwrap();
        assert!(bit_error_prob(&ch) < 1e-300);
    }

    #[test]
    fn equivalent_probability_identities() {
        let clean = equivalent_probabilities(0.1, 0.2, 0.0).unwrap();
        assert_eq!((clean.pf_eq, clean.pm_eq), (0.1, 0.2));
        let coin = equivalent_probabilities(0.03, 0.9, 0.5).unwrap();
        assert_eq!((coin.pf_eq, coin.pm_eq), (0.5, 0.5));
        let s = equivalent_probabilities(0.1, 0.2, 0.01).unwrap();
        assert!((s.pf_eq - 0.108).abs() < 1e-15);
        assert!((s.pm_eq - 0.206).abs() < 1e-15);
        assert!(equivalent_probabilities(1.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn rejects_bad_channel_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_channel(0.0, &mut rng).is_err());
        assert!(ChannelRealization::new(Complex64::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn sampling_replays_from_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..8).map(|_| sample_channel(10.0, &mut rng).unwrap().h).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }
}
