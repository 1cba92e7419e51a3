use serde::{Deserialize, Serialize};

use super::VariogramError;

/// Correlation level defining the effective range.
pub const EFFECTIVE_RANGE_LEVEL: f64 = 0.05;

/// Matérn variogram parameters. `range` scales distance as `d = h / range`
/// inside `ρ_ν(d) = 2^{1−ν} / Γ(ν) · d^ν · K_ν(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaternParams {
    pub range: f64,
    pub partial_sill: f64,
    pub nugget: f64,
    pub smoothness: f64,
}

impl MaternParams {
    pub fn new(range: f64, partial_sill: f64, nugget: f64, smoothness: f64) -> Result<Self, VariogramError> {
        let p = Self {
            range,
            partial_sill,
            nugget,
            smoothness,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), VariogramError> {
        let ok = self.range > 0.0
            && self.partial_sill >= 0.0
            && self.nugget >= 0.0
            && self.smoothness > 0.0
            && [self.range, self.partial_sill, self.nugget, self.smoothness]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(VariogramError::InvalidParams(*self))
        }
    }

    pub fn sill(&self) -> f64 {
        self.nugget + self.partial_sill
    }

    pub fn correlation(&self, h: f64) -> f64 {
        matern_correlation(h / self.range, self.smoothness)
    }

    /// Covariance of the structured part plus the nugget at zero lag.
    pub fn covariance(&self, h: f64) -> f64 {
        if h == 0.0 {
            return self.sill();
        }
        self.partial_sill * self.correlation(h)
    }

    pub fn semivariance(&self, h: f64) -> f64 {
        if h == 0.0 {
            return 0.0;
        }
        self.nugget + self.partial_sill * (1.0 - self.correlation(h))
    }

    pub fn effective_range(&self) -> f64 {
        self.range * unit_effective_range(self.smoothness)
    }
}

/// Matérn correlation at scaled distance `d ≥ 0` with smoothness `nu`.
pub fn matern_correlation(d: f64, nu: f64) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    if nu == 0.5 {
        return (-d).exp();
    }
    // ρ < 1e-250 here for every supported smoothness; K_ν would underflow
    if d > 700.0 {
        return 0.0;
    }
    let (_, k, _, _) = puruspe::besselik(nu, d);
    let log_rho = (1.0 - nu) * std::f64::consts::LN_2 - puruspe::ln_gamma(nu) + nu * d.ln() + k.ln();
    log_rho.exp().min(1.0)
}

pub fn matern_semivariance(h: f64, p: &MaternParams) -> f64 {
    p.semivariance(h)
}

/// Root of `ρ_ν(d) = 0.05` in scaled distance; infinite if the root lies
/// beyond every bracket tried.
pub fn unit_effective_range(nu: f64) -> f64 {
    let f = |u: f64| matern_correlation(u, nu) - EFFECTIVE_RANGE_LEVEL;
    let mut hi = 1000.0;
    while f(hi) > 0.0 {
        hi *= 10.0;
        if hi > 1e9 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn effective_range(p: &MaternParams) -> f64 {
    p.effective_range()
}

/// Effective range with the censoring flag for values beyond the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveRange {
    /// Estimated value, or the domain extent when censored.
    pub value: f64,
    pub censored: bool,
}

impl EffectiveRange {
    pub fn assess(value: f64, extent: f64) -> Self {
        if value.is_finite() && value <= extent {
            Self {
                value,
                censored: false,
            }
        } else {
            Self {
                value: extent,
                censored: true,
            }
        }
    }

    /// `0.0612`, or `>400` when censored.
    pub fn display(&self) -> String {
        if self.censored {
            format!(">{}", self.value)
        } else {
            format!("{}", self.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_matches_reference_values() {
        // scipy.special: 2**(1-nu)/gamma(nu) * d**nu * kv(nu, d)
        let cases = [
            (0.3, 0.6, 0.7983042569101189),
            (1.0, 1.5, 0.7357588823428849),
            (2.5, 1.8, 0.3442108331663629),
            (0.05, 0.35, 0.88341972678938),
            (4.0, 5.0, 0.4115801299359923),
            (1e-6, 0.35, 0.999939645034658),
            (1e-4, 0.1, 0.8450183947889495),
            (100.0, 5.0, 1.3732437795033725e-37),
        ];
        for (d, nu, expected) in cases {
            let r = matern_correlation(d, nu);
            assert!((r / expected - 1.0).abs() < 1e-10, "d = {d}, ν = {nu}: {r} vs {expected}");
        }
    }

    #[test]
    fn closed_forms_at_half_integer_smoothness() {
        for d in [0.01, 0.5, 1.0, 3.0, 10.0] {
            let r05 = matern_correlation(d, 0.5);
            assert_eq!(r05, (-d).exp());
            let r15 = matern_correlation(d, 1.5);
            assert!((r15 - (1.0 + d) * (-d).exp()).abs() < 1e-10);
            let r25 = matern_correlation(d, 2.5);
            assert!((r25 - (1.0 + d + d * d / 3.0) * (-d).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn semivariance_limits() {
        let p = MaternParams::new(1.0, 1.0, 0.2, 0.8).unwrap();
        assert_eq!(p.semivariance(0.0), 0.0);
        assert!((p.semivariance(1e-12) - 0.2).abs() < 1e-4);
        assert!((p.semivariance(1e4) - 1.2).abs() < 1e-12);
        let e = MaternParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!((e.semivariance(1.0) - 0.632121).abs() < 1e-6);
    }

    #[test]
    fn exponential_effective_range_is_ln20() {
        let p = MaternParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!((p.effective_range() - 20f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn grid_unit_parameterisations_give_stated_effective_ranges() {
        // (range, smoothness) → effective range rounded to two decimals
        let cases = [
            (0.02, 0.5, 0.06),
            (0.12, 1.8, 0.62),
            (0.01, 0.5, 0.03),
            (0.08, 0.35, 0.20),
            (0.015, 0.6, 0.05),
            (0.081, 5.0, 0.66),
            (0.08, 5.0, 0.65),
        ];
        for (range, nu, expected) in cases {
            let e = MaternParams::new(range, 1.0, 0.0, nu).unwrap().effective_range();
            assert!((e - expected).abs() <= 0.01, "range {range}, ν {nu}: {e}");
        }
    }

    #[test]
    fn effective_range_scales_with_range() {
        for nu in [0.35, 0.6, 1.8, 5.0] {
            let base = MaternParams::new(0.1, 1.0, 0.0, nu).unwrap().effective_range();
            let scaled = MaternParams::new(0.4, 1.0, 0.0, nu).unwrap().effective_range();
            assert!((scaled / base - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn censoring_beyond_extent() {
        assert_eq!(EffectiveRange::assess(500.0, 400.0).display(), ">400");
        assert!(!EffectiveRange::assess(7.5, 400.0).censored);
        assert!(EffectiveRange::assess(f64::INFINITY, 1.0).censored);
    }
}
