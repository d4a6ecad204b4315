//! Boundary profiles and the rules that turn them into verdicts.
//!
//! A profile is a list of per-band maxima of some nonnegative statistic,
//! where band `m` collects points with `1 - 2^-m <= |z| < 1 - 2^-(m+1)`.
//! The tail trend is read off two ways: the fraction of the global sup left
//! in the outermost bands, and the least-squares exponent `e` in
//! `value ~ (1 - |z|)^e` fitted over the last few nonempty bands.

use serde::{Deserialize, Serialize};

use crate::quadrature::dyadic_band;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBand {
    pub band: usize,
    /// `log2(1 / (1 - |z|))` at the point realizing the band maximum.
    pub depth: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProfile {
    pub bands: Vec<ProfileBand>,
}

impl BoundaryProfile {
    /// Per-band maxima of `(radius, value)` samples. Empty bands are omitted.
    pub fn from_samples<I: IntoIterator<Item = (f64, f64)>>(samples: I) -> Self {
        let mut bands: Vec<Option<ProfileBand>> = Vec::new();
        for (radius, value) in samples {
            let b = dyadic_band(radius);
            if bands.len() <= b {
                bands.resize(b + 1, None);
            }
            let depth = -(1.0 - radius).log2();
            match &mut bands[b] {
                Some(slot) if slot.value >= value => {}
                slot => {
                    *slot = Some(ProfileBand {
                        band: b,
                        depth,
                        value,
                    })
                }
            }
        }
        Self {
            bands: bands.into_iter().flatten().collect(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.bands.iter().map(|b| b.value).fold(0.0, f64::max)
    }

    pub fn values(&self) -> Vec<f64> {
        self.bands.iter().map(|b| b.value).collect()
    }

    /// Largest sampled value in bands whose depth is at least `depth`.
    pub fn value_near_depth(&self, depth: f64) -> Option<f64> {
        self.bands
            .iter()
            .filter(|b| b.depth >= depth)
            .map(|b| b.value)
            .next()
    }
}

/// Thresholds of the tail rule; echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRule {
    /// Decay when the last two bands fall below this fraction of the sup.
    pub tail_fraction: f64,
    /// Number of outermost nonempty bands used in the exponent fit.
    pub fit_bands: usize,
    /// Fitted exponent at or above which the profile counts as decaying.
    pub decay_exponent: f64,
    /// Fitted exponent at or below minus this value counts as growing.
    pub growth_exponent: f64,
}

impl Default for TailRule {
    fn default() -> Self {
        Self {
            tail_fraction: 0.05,
            fit_bands: 4,
            decay_exponent: 0.1,
            growth_exponent: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decaying,
    Plateau,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReading {
    pub trend: Trend,
    /// Fitted `e` in `value ~ (1 - |z|)^e`; `None` when the tail is identically 0.
    pub exponent: Option<f64>,
    /// Max of the last two bands over the global sup.
    pub tail_ratio: f64,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

impl TailRule {
    pub fn read(&self, profile: &BoundaryProfile) -> TailReading {
        let sup = profile.sup();
        let bands = &profile.bands;
        if sup == 0.0 || bands.is_empty() {
            return TailReading {
                trend: Trend::Decaying,
                exponent: None,
                tail_ratio: 0.0,
            };
        }
        let last_two = bands[bands.len().saturating_sub(2)..]
            .iter()
            .map(|b| b.value)
            .fold(0.0, f64::max);
        let tail_ratio = last_two / sup;
        let tail = &bands[bands.len().saturating_sub(self.fit_bands.max(2))..];
        let exponent = if tail.iter().any(|b| b.value <= 0.0) {
            None
        } else if tail.len() < 2 {
            Some(0.0)
        } else {
            let xs: Vec<f64> = tail.iter().map(|b| b.depth).collect();
            let ys: Vec<f64> = tail.iter().map(|b| b.value.log2()).collect();
            Some(-slope(&xs, &ys))
        };
        let trend = match exponent {
            None => Trend::Decaying,
            Some(e) if e >= self.decay_exponent || tail_ratio < self.tail_fraction => {
                Trend::Decaying
            }
            Some(e) if e <= -self.growth_exponent => Trend::Growing,
            Some(_) => Trend::Plateau,
        };
        TailReading {
            trend,
            exponent,
            tail_ratio,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power_profile(e: f64) -> BoundaryProfile {
        BoundaryProfile::from_samples((0..60).map(|k| {
            let r = 1.0 - 0.5f64.powf(k as f64 / 4.0);
            (r, 3.0 * (1.0 - r).powf(e))
        }))
    }

    #[test]
    fn exponent_fit_recovers_power_law() {
        for &e in &[-0.5, -0.25, 0.0, 0.25, 1.0] {
            let reading = TailRule::default().read(&power_profile(e));
            let got = reading.exponent.unwrap();
            assert!((got - e).abs() < 0.05, "e={e} got={got}");
        }
    }

    #[test]
    fn trends() {
        let rule = TailRule::default();
        assert_eq!(rule.read(&power_profile(0.25)).trend, Trend::Decaying);
        assert_eq!(rule.read(&power_profile(0.0)).trend, Trend::Plateau);
        assert_eq!(rule.read(&power_profile(-0.25)).trend, Trend::Growing);
        let compact = BoundaryProfile::from_samples([(0.0, 1.0), (0.7, 0.0), (0.99, 0.0)]);
        assert_eq!(rule.read(&compact).trend, Trend::Decaying);
    }

    #[test]
    fn band_maxima() {
        let p = BoundaryProfile::from_samples([(0.1, 1.0), (0.2, 2.0), (0.6, 0.5), (0.95, 4.0)]);
        assert_eq!(p.values(), vec![2.0, 0.5, 4.0]);
        assert_eq!(p.bands[2].band, 4);
        assert_eq!(p.sup(), 4.0);
    }
}
