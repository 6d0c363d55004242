//! Distance-dependent beacon reception and windowed beacon counting.
//!
//! Three reception laws are available, all zero beyond the radio range `r`:
//!
//! * `IdealDisc`: every beacon within `r` is received.
//! * `LinearRamp(rho)`: certain reception up to `rho * r`, then a linear
//!   fall-off `(r - d) / (r - rho * r)` to zero at `r`.
//! * `LogNormalShadowing(sigma, n)`: the link margin at distance `d` is
//!   `10 n log10(r / d)` dB, so the mean margin is zero at the range edge.
//!   Each slot draws an independent fade `X ~ N(0, sigma^2)` dB and the
//!   beacon is received when `margin + X >= 0`. The mean success
//!   probability is therefore `Phi(10 n log10(r / d) / sigma)`, which is
//!   1 at `d = 0` and 1/2 at `d = r`; reception is cut to zero past `r`.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    IdealDisc,
    LinearRamp { inner_fraction: f64 },
    LogNormalShadowing { sigma_db: f64, pathloss_exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceptionModel {
    pub law: Law,
    pub radio_range: f64,
}

impl ReceptionModel {
    pub fn ideal(radio_range: f64) -> Self {
        ReceptionModel { law: Law::IdealDisc, radio_range }
    }

    pub fn linear_ramp(radio_range: f64, inner_fraction: f64) -> Self {
        ReceptionModel {
            law: Law::LinearRamp { inner_fraction },
            radio_range,
        }
    }

    pub fn shadowing(radio_range: f64, sigma_db: f64, pathloss_exponent: f64) -> Self {
        ReceptionModel {
            law: Law::LogNormalShadowing {
                sigma_db,
                pathloss_exponent,
            },
            radio_range,
        }
    }

    /// Mean margin in dB at distance `d` for the shadowing law.
    fn margin_db(pathloss_exponent: f64, r: f64, d: f64) -> f64 {
        10.0 * pathloss_exponent * (r / d).log10()
    }
}

/// Probability that a single beacon transmitted from distance `d` is received.
pub fn reception_probability(model: &ReceptionModel, d: f64) -> f64 {
    let r = model.radio_range;
    if d > r {
        return 0.0;
    }
    match model.law {
        Law::IdealDisc => 1.0,
        Law::LinearRamp { inner_fraction } => {
            let inner = inner_fraction * r;
            if d <= inner {
                1.0
            } else {
                ((r - d) / (r - inner)).clamp(0.0, 1.0)
            }
        }
        Law::LogNormalShadowing {
            sigma_db,
            pathloss_exponent,
        } => {
            if d <= 0.0 {
                return 1.0;
            }
            let z = ReceptionModel::margin_db(pathloss_exponent, r, d) / sigma_db;
            // standard normal CDF
            0.5 * erfc(-z / std::f64::consts::SQRT_2)
        }
    }
}

/// Factor a dumb node would compute with an infinitely long window.
pub fn expected_proximity(model: &ReceptionModel, d: f64) -> f64 {
    100.0 * reception_probability(model, d)
}

/// Beacon period `T` and sampling window `T_s`, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub beacon_period: f64,
    pub sample_time: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            beacon_period: 1.0,
            sample_time: 100.0,
        }
    }
}

impl SamplingParams {
    /// Number of beacons transmitted during one window, `floor(T_s / T)`.
    pub fn transmitted(&self) -> u32 {
        (self.sample_time / self.beacon_period).floor() as u32
    }

    pub fn is_valid(&self) -> bool {
        self.beacon_period > 0.0 && self.sample_time >= self.beacon_period && self.transmitted() >= 1
    }
}

/// Listens for one window to a beacon at distance `d`, returning
/// `(received, transmitted)`. Slots are consumed in time order, one
/// uniform draw per slot (plus one normal draw per slot for shadowing
/// within range).
pub fn sample_beacon_counts<R: Rng + ?Sized>(
    model: &ReceptionModel,
    d: f64,
    sampling: &SamplingParams,
    rng: &mut R,
) -> (u32, u32) {
    let total = sampling.transmitted();
    let received = match model.law {
        Law::LogNormalShadowing {
            sigma_db,
            pathloss_exponent,
        } if d <= model.radio_range => {
            let margin = if d <= 0.0 {
                f64::INFINITY
            } else {
                ReceptionModel::margin_db(pathloss_exponent, model.radio_range, d)
            };
            (0..total)
                .filter(|_| {
                    let fade: f64 = rng.sample(StandardNormal);
                    margin + sigma_db * fade >= 0.0
                })
                .count() as u32
        }
        _ => {
            let p = reception_probability(model, d);
            (0..total).filter(|_| rng.random::<f64>() < p).count() as u32
        }
    };
    (received, total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn ideal_disc() {
        let m = ReceptionModel::ideal(10.0);
        assert_eq!(reception_probability(&m, 5.0), 1.0);
        assert_eq!(reception_probability(&m, 10.0), 1.0);
        assert_eq!(reception_probability(&m, 11.0), 0.0);
    }

    #[test]
    fn linear_ramp_examples() {
        let m = ReceptionModel::linear_ramp(10.0, 0.1);
        assert_eq!(reception_probability(&m, 5.5), 0.5);
        assert_eq!(reception_probability(&m, 1.0), 1.0);
        assert_eq!(reception_probability(&m, 10.0), 0.0);
        assert_eq!(expected_proximity(&m, 5.5), 50.0);
    }

    #[test]
    fn expected_proximity_bounds() {
        assert_eq!(expected_proximity(&ReceptionModel::ideal(10.0), 3.0), 100.0);
        for m in [
            ReceptionModel::ideal(10.0),
            ReceptionModel::linear_ramp(10.0, 0.1),
            ReceptionModel::shadowing(10.0, 4.0, 3.0),
        ] {
            assert_eq!(expected_proximity(&m, 10.5), 0.0);
        }
    }

    #[test]
    fn shadowing_mean_probability() {
        let m = ReceptionModel::shadowing(10.0, 4.0, 3.0);
        assert_eq!(reception_probability(&m, 0.0), 1.0);
        assert!((reception_probability(&m, 10.0) - 0.5).abs() < 1e-15);
        // margin 30 log10(2) dB = 9.0309 dB, z = 2.2577, Phi(z) = 0.98802
        assert!((reception_probability(&m, 5.0) - 0.988_018).abs() < 1e-5);
        let mut prev = 1.0;
        for i in 1..=100 {
            let p = reception_probability(&m, i as f64 * 0.1);
            assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn certain_and_impossible_windows() {
        let s = SamplingParams::default();
        let streams = Streams::new(3);
        let mut rng = streams.stream("t");
        assert_eq!(sample_beacon_counts(&ReceptionModel::ideal(10.0), 5.0, &s, &mut rng), (100, 100));
        for m in [
            ReceptionModel::ideal(10.0),
            ReceptionModel::linear_ramp(10.0, 0.1),
            ReceptionModel::shadowing(10.0, 4.0, 3.0),
        ] {
            assert_eq!(sample_beacon_counts(&m, 10.5, &s, &mut rng), (0, 100));
        }
    }

    #[test]
    fn window_length() {
        let s = SamplingParams {
            beacon_period: 0.3,
            sample_time: 1.0,
        };
        assert_eq!(s.transmitted(), 3);
        assert!(s.is_valid());
        assert!(!SamplingParams { beacon_period: 2.0, sample_time: 1.0 }.is_valid());
    }

    #[test]
    fn half_probability_window_stays_in_band() {
        // P(|Bin(100, 1/2) - 50| > 20) is about 6e-5, so failures over 10^4
        // substreams should number well under 10.
        let m = ReceptionModel::linear_ramp(10.0, 0.1);
        let s = SamplingParams::default();
        let streams = Streams::new(11);
        let outside = (0..10_000)
            .filter(|i| {
                let mut rng = streams.stream(&format!("band/{i}"));
                let (nb, _) = sample_beacon_counts(&m, 5.5, &s, &mut rng);
                !(30..=70).contains(&nb)
            })
            .count();
        assert!(outside <= 10, "{outside} windows outside [30, 70]");
    }

    #[test]
    fn depends_on_distance_only() {
        let m = ReceptionModel::linear_ramp(10.0, 0.1);
        let s = SamplingParams::default();
        let streams = Streams::new(5);
        let a = sample_beacon_counts(&m, 6.25, &s, &mut streams.stream("pair"));
        let b = sample_beacon_counts(&m, 6.25, &s, &mut streams.stream("pair"));
        assert_eq!(a, b);
    }
}
