//! Quantitative checks: discrete Friedrichs constants, inverse-inequality
//! growth, projector and interpolation rates, stability tables, and the
//! structural identities, collected into one report.

mod constants;
mod rates;
mod suite;

pub use constants::{
    friedrichs_constant, friedrichs_constant_with, friedrichs_subspace, friedrichs_sweep,
    inverse_ratio, inverse_sweep, FriedrichsVariant, InversePair, FRIEDRICHS_MARGIN,
    FRIEDRICHS_MAX_GROWTH, FRIEDRICHS_MAX_SPREAD, INVERSE_MAX_GROWTH,
};
pub use rates::{projector_rate, stability_table, RateSetup, SLOPE_TOL, SLOPE_WINDOW};
pub use suite::{check_symmetric, run_suite, SuiteConfig};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Slope fits with a smaller coefficient of determination are inconclusive.
pub const MIN_R2: f64 = 0.98;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One report record.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub status: Status,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `measured <= tolerance` (expected value 0).
    pub fn at_most(id: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        let ok = measured.is_finite() && measured <= tolerance;
        Self {
            id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            expected: 0.0,
            tolerance,
        }
    }

    /// Passes when `|measured - expected| <= tolerance`.
    pub fn within(id: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        let ok = (measured - expected).abs() <= tolerance;
        Self {
            id: id.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            expected,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Least-squares line through `(ln p, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Log-log fit; `None` with fewer than two points or a nonpositive value.
pub fn loglog_fit(degrees: &[usize], values: &[f64]) -> Option<LogFit> {
    if degrees.len() != values.len()
        || degrees.len() < 2
        || values.iter().any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return None;
    }
    let x: Vec<f64> = degrees.iter().map(|p| libm::log(*p as f64)).collect();
    let y: Vec<f64> = values.iter().map(|v| libm::log(*v)).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let ss_res: f64 = x
        .iter()
        .zip(&y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let r2 = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(LogFit {
        slope,
        intercept,
        r2,
    })
}

/// Fit over the last `window` points.
pub fn trailing_fit(degrees: &[usize], values: &[f64], window: usize) -> Option<LogFit> {
    if degrees.len() < window || window < 2 {
        return None;
    }
    let k = degrees.len() - window;
    loglog_fit(&degrees[k..], &values[k..])
}

/// A p-sweep of a quantity that should stay bounded (or grow at most like a
/// given power).
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantSweep {
    pub tag: String,
    pub degrees: Vec<usize>,
    pub values: Vec<f64>,
    pub fit: Option<LogFit>,
    /// max / min over the sweep.
    pub spread: f64,
    pub max_spread: f64,
    pub max_growth: f64,
}

impl ConstantSweep {
    pub fn new(
        tag: impl Into<String>,
        degrees: Vec<usize>,
        values: Vec<f64>,
        max_spread: f64,
        max_growth: f64,
    ) -> Self {
        let fit = loglog_fit(&degrees, &values);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        Self {
            tag: tag.into(),
            degrees,
            values,
            fit,
            spread: max / min,
            max_spread,
            max_growth,
        }
    }

    pub fn growth(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }

    /// Spread and growth checks; with fewer than two points only finiteness.
    pub fn checks(&self) -> Vec<Check> {
        let finite = self.values.iter().all(|v| v.is_finite() && *v > 0.0);
        let mut out = Vec::new();
        out.push(Check::at_most(
            alloc::format!("{}.finite", self.tag),
            if finite { 0.0 } else { 1.0 },
            0.0,
        ));
        if self.values.len() >= 2 {
            if self.max_spread.is_finite() {
                out.push(Check::at_most(
                    alloc::format!("{}.spread", self.tag),
                    self.spread,
                    self.max_spread,
                ));
            }
            out.push(Check::at_most(
                alloc::format!("{}.growth", self.tag),
                self.growth(),
                self.max_growth,
            ));
        }
        out
    }
}

/// Errors of one field in one norm against p, with the trailing-window slope.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeReport {
    pub field: String,
    pub norm: String,
    pub degrees: Vec<usize>,
    pub errors: Vec<f64>,
    pub window: usize,
    pub fit: Option<LogFit>,
    pub expected: f64,
    pub tolerance: f64,
}

impl SlopeReport {
    pub fn new(
        field: impl Into<String>,
        norm: impl Into<String>,
        degrees: Vec<usize>,
        errors: Vec<f64>,
        window: usize,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let fit = trailing_fit(&degrees, &errors, window);
        Self {
            field: field.into(),
            norm: norm.into(),
            degrees,
            errors,
            window,
            fit,
            expected,
            tolerance,
        }
    }

    pub fn slope(&self) -> f64 {
        self.fit.map_or(f64::NAN, |f| f.slope)
    }

    /// Inconclusive without a fit of R^2 >= [`MIN_R2`].
    pub fn status(&self) -> Status {
        match self.fit {
            Some(f) if f.r2 >= MIN_R2 => {
                if (f.slope - self.expected).abs() <= self.tolerance {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            _ => Status::Inconclusive,
        }
    }

    /// Errors never grow by more than 5% from one degree to the next (p >= 2).
    pub fn monotone(&self) -> bool {
        let e: Vec<f64> = self
            .degrees
            .iter()
            .zip(&self.errors)
            .filter(|(p, _)| **p >= 2)
            .map(|(_, e)| *e)
            .collect();
        e.windows(2).all(|w| w[1] <= 1.05 * w[0])
    }

    pub fn check(&self) -> Check {
        Check {
            id: alloc::format!("rate.{}.{}", self.field, self.norm),
            status: self.status(),
            measured: self.slope(),
            expected: self.expected,
            tolerance: self.tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fit_recovers_power_laws() {
        let ps = vec![2, 3, 4, 5, 6];
        let e: Vec<f64> = ps
            .iter()
            .map(|p| 3.0 * libm::pow(*p as f64, -1.5))
            .collect();
        let f = loglog_fit(&ps, &e).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-13 && (f.r2 - 1.0).abs() < 1e-13);
        assert!((libm::exp(f.intercept) - 3.0).abs() < 1e-12);
        assert!(loglog_fit(&[2], &[1.0]).is_none());
        assert!(loglog_fit(&[2, 3], &[1.0, 0.0]).is_none());
        let t = trailing_fit(&ps, &e, 3).unwrap();
        assert!((t.slope + 1.5).abs() < 1e-13);
    }

    #[test]
    fn noisy_fits_are_inconclusive() {
        let ps = vec![1, 2, 3, 4, 5, 6];
        let e = vec![1.0, 0.2, 0.6, 0.1, 0.5, 0.05];
        let r = SlopeReport::new("f", "l2", ps.clone(), e, 4, -1.0, 0.15);
        assert_eq!(r.status(), Status::Inconclusive);
        assert!(!r.monotone());
        let e: Vec<f64> = ps.iter().map(|p| libm::pow(*p as f64, -1.1)).collect();
        let r = SlopeReport::new("f", "l2", ps.clone(), e.clone(), 4, -1.0, 0.15);
        assert_eq!(r.status(), Status::Pass);
        assert!(r.monotone());
        let r = SlopeReport::new("f", "l2", ps, e, 4, -1.5, 0.15);
        assert_eq!(r.status(), Status::Fail);
        assert_eq!(r.check().status, Status::Fail);
    }

    #[test]
    fn sweep_checks() {
        let s = ConstantSweep::new("c", vec![2, 3, 4], vec![1.0, 1.05, 1.1], 2.0, 0.15);
        assert!(s.checks().iter().all(|c| c.passed()), "{:?}", s.checks());
        let s = ConstantSweep::new("c", vec![2, 3, 4], vec![1.0, 2.0, 4.0], 2.0, 0.15);
        assert_eq!(s.checks().iter().filter(|c| !c.passed()).count(), 2);
        let s = ConstantSweep::new("c", vec![2], vec![1.0], 2.0, 0.15);
        assert_eq!(s.checks().len(), 1);
        assert!(Check::at_most("x", f64::NAN, 1.0).status == Status::Fail);
    }
}
