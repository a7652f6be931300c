//! Behavior of the conditioned expectation as the selection pair approaches
//! orthogonality.
//!
//! Orthogonality is parametrized by `beta = alpha / sqrt(1 - alpha^2) -> 0`.
//! Along a path the selection weight ratio `y = x / sqrt(1 - x^2)` either
//! stays fixed or is tied to the scale as `y = beta^s`, and the limit value
//! depends on who wins:
//!
//! * fixed weight, or `s = 0`: no competition, the value approaches the
//!   orthogonal limit linearly in `alpha`;
//! * `0 < |s| < 1`: orthogonality wins, same limit, with a slower
//!   `beta^(1-|s|)` correction;
//! * `|s| = 1`: both effects enter at first order and the limit jumps to a
//!   plateau that keeps the selection phase `theta` in it;
//! * `|s| > 1`: the weight collapse wins and the value lands on a single
//!   branch mean, `W22` for `s > 1`, `W11` for `s < -1`, approached as
//!   `beta^(|s|-1)`.
//!
//! The classification, the limit values, and the leading coefficients all
//! come from expanding the exact closed form; nothing here is fitted.

use alloc::vec::Vec;

use crate::exact;
// unused whenever a dependency links std: the inherent methods shadow these
#[cfg(not(test))]
#[allow(unused_imports)]
use crate::fmath::Real;
use crate::model::make_selection;
use crate::probe::OverlapSet;
use crate::{Error, Result};

/// Residuals below this are round-off, not signal, for exponent fitting.
const RESIDUAL_FLOOR: f64 = 1e-10;

/// Who wins between approach to orthogonality and selection-weight collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Fixed selection weight; only orthogonality moves.
    NoCompetition,
    /// Weight drifts slower than orthogonality, `0 < |s| < 1`.
    SubUnit,
    /// Matched first-order competition, `|s| = 1`.
    Critical,
    /// Weight collapse dominates, `|s| > 1`.
    SuperUnit,
}

/// How the selection pair approaches orthogonality as `beta -> 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Path {
    /// Hold `x` fixed while `alpha -> 0`.
    FixedX { x: f64 },
    /// Tie the weight ratio to the scale: `y = beta^s`.
    Power { s: f64 },
}

/// Classification of a path: the limit value and how fast it is approached.
///
/// `leading_exponent` is the power of `beta` of the first correction and
/// `speed_exponent` the power of its `beta`-derivative, one lower. A
/// critical path has no power-law correction at first order; both exponents
/// are reported as zero and the linear coefficient is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    /// Path exponent, when the path has one.
    pub s: Option<f64>,
    pub regime: Regime,
    pub predicted_limit: f64,
    pub leading_exponent: f64,
    pub speed_exponent: f64,
    /// Coefficient of `beta^leading_exponent` in the approach to the limit.
    pub linear_coefficient: Option<f64>,
}

/// First-order evaluation of a classified path at one `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionEstimate {
    pub value: f64,
    /// Order-of-magnitude scale of the first neglected power; a guide for
    /// choosing `beta`, not a bound.
    pub dropped_term: f64,
}

/// One point of a sweep along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub beta: f64,
    pub expectation: f64,
    pub postselection_probability: f64,
}

/// Power-law fit of residuals against a predicted limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub r_squared: f64,
    /// Samples that survived the round-off floor.
    pub retained: usize,
}

struct Pieces {
    w11: f64,
    w22: f64,
    rw: f64,
    iw: f64,
    ry: f64,
    iy: f64,
    t: f64,
    ct: f64,
    st: f64,
}

fn pieces(ov: &OverlapSet, theta: f64) -> Pieces {
    let (st, ct) = libm::sincos(theta);
    Pieces {
        w11: ov.w11,
        w22: ov.w22,
        rw: ov.w12.re,
        iw: ov.w12.im,
        ry: ov.y12.re,
        iy: ov.y12.im,
        t: ov.w11 + ov.w22 - 2.0 * ov.w12.re,
        ct,
        st,
    }
}

fn orthogonal_limit(p: &Pieces) -> f64 {
    p.t / (2.0 * (1.0 - p.ry))
}

/// Coefficient of `beta^(1-|s|)` on sub-unit paths. The two signs of `s`
/// give algebraically identical coefficients.
fn coeff_subunit(p: &Pieces) -> f64 {
    ((p.rw - p.w22) * p.ct - p.iw * p.st) / (1.0 - p.ry)
        - ((p.ry - 1.0) * p.ct - p.iy * p.st) * p.t / (2.0 * (1.0 - p.ry) * (1.0 - p.ry))
}

/// Half the coefficient of `beta^(s-1)` when the weight collapses onto the
/// second branch (`s > 1`).
fn coeff_collapse_to_second(p: &Pieces) -> f64 {
    (p.rw - p.w22) * p.ct - p.iw * p.st - p.w22 * ((p.ry - 1.0) * p.ct - p.iy * p.st)
}

/// Half the coefficient of `beta^(-(1+s))` when the weight collapses onto the
/// first branch (`s < -1`).
fn coeff_collapse_to_first(p: &Pieces) -> f64 {
    (p.w11 - p.rw) * p.ct - p.iw * p.st - p.w11 * ((1.0 - p.ry) * p.ct - p.iy * p.st)
}

/// Coefficient of `beta` on a fixed-weight path. At `y = 1` this is twice the
/// sub-unit coefficient.
fn coeff_fixed_weight(p: &Pieces, y: f64) -> f64 {
    let gap = 1.0 - p.ry;
    (y * y * ((p.w11 - p.rw) * p.ct - p.iw * p.st) + (p.rw - p.w22) * p.ct - p.iw * p.st)
        / (y * gap)
        - ((y * y - 1.0) * gap * p.ct - (y * y + 1.0) * p.iy * p.st) * p.t
            / (2.0 * y * gap * gap)
}

fn critical_plateau(p: &Pieces, s_positive: bool) -> Result<f64> {
    let (num, den) = if s_positive {
        (
            p.w11 / 2.0 + p.w22 - p.rw + (p.rw - p.w22) * p.ct - p.iw * p.st,
            1.5 - p.ry + (p.ry - 1.0) * p.ct - p.iy * p.st,
        )
    } else {
        (
            p.w11 + p.w22 / 2.0 - p.rw + (p.w11 - p.rw) * p.ct - p.iw * p.st,
            1.5 - p.ry + (1.0 - p.ry) * p.ct - p.iy * p.st,
        )
    };
    if den.abs() < 1e-14 {
        return Err(Error::ZeroPostselection);
    }
    Ok(num / den)
}

fn validate_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && (0.0..core::f64::consts::TAU).contains(&theta)) {
        return Err(Error::Invalid { field: "theta", reason: "must lie in [0, 2*pi)" });
    }
    Ok(())
}

/// Classify a path to orthogonality for the measurement behind `ov`.
pub fn classify_regime(path: &Path, theta: f64, ov: &OverlapSet) -> Result<RegimeReport> {
    validate_theta(theta)?;
    if ov.g * (ov.a1 - ov.a2) == 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let p = pieces(ov, theta);
    let gap = 1.0 - p.ry;
    match *path {
        Path::FixedX { x } => {
            if !(x.is_finite() && x > 0.0 && x < 1.0) {
                return Err(Error::Invalid {
                    field: "x",
                    reason: "fixed-weight paths need 0 < x < 1",
                });
            }
            if gap < 1e-14 {
                return Err(Error::ZeroPostselection);
            }
            let y = x / (1.0 - x * x).sqrt();
            Ok(RegimeReport {
                s: None,
                regime: Regime::NoCompetition,
                predicted_limit: orthogonal_limit(&p),
                leading_exponent: 1.0,
                speed_exponent: 0.0,
                linear_coefficient: Some(coeff_fixed_weight(&p, y)),
            })
        }
        Path::Power { s } => {
            if !s.is_finite() {
                return Err(Error::Invalid { field: "s", reason: "must be finite" });
            }
            let mag = s.abs();
            if mag == 0.0 {
                if gap < 1e-14 {
                    return Err(Error::ZeroPostselection);
                }
                return Ok(RegimeReport {
                    s: Some(0.0),
                    regime: Regime::NoCompetition,
                    predicted_limit: orthogonal_limit(&p),
                    leading_exponent: 1.0,
                    speed_exponent: 0.0,
                    linear_coefficient: Some(coeff_fixed_weight(&p, 1.0)),
                });
            }
            if mag < 1.0 {
                if gap < 1e-14 {
                    return Err(Error::ZeroPostselection);
                }
                return Ok(RegimeReport {
                    s: Some(s),
                    regime: Regime::SubUnit,
                    predicted_limit: orthogonal_limit(&p),
                    leading_exponent: 1.0 - mag,
                    speed_exponent: -mag,
                    linear_coefficient: Some(coeff_subunit(&p)),
                });
            }
            if mag == 1.0 {
                return Ok(RegimeReport {
                    s: Some(s),
                    regime: Regime::Critical,
                    predicted_limit: critical_plateau(&p, s > 0.0)?,
                    leading_exponent: 0.0,
                    speed_exponent: 0.0,
                    linear_coefficient: None,
                });
            }
            let (limit, coeff) = if s > 0.0 {
                (p.w22, 2.0 * coeff_collapse_to_second(&p))
            } else {
                (p.w11, 2.0 * coeff_collapse_to_first(&p))
            };
            Ok(RegimeReport {
                s: Some(s),
                regime: Regime::SuperUnit,
                predicted_limit: limit,
                leading_exponent: mag - 1.0,
                speed_exponent: mag - 2.0,
                linear_coefficient: Some(coeff),
            })
        }
    }
}

/// Evaluate the classified first-order behavior at one `beta`.
pub fn expansion_value(report: &RegimeReport, beta: f64) -> Result<ExpansionEstimate> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::Invalid { field: "beta", reason: "must be positive and finite" });
    }
    let value = match report.linear_coefficient {
        Some(c) => report.predicted_limit + c * beta.powf(report.leading_exponent),
        None => report.predicted_limit,
    };
    let dropped = match report.regime {
        Regime::Critical => beta * beta * (1.0 + report.predicted_limit.abs()),
        _ => {
            let e = report.leading_exponent;
            let next = (2.0 * e).min(e + 1.0);
            let scale = report
                .linear_coefficient
                .map(|c| c.abs())
                .unwrap_or(0.0)
                .max(report.predicted_limit.abs())
                .max(1.0);
            scale * beta.powf(next)
        }
    };
    Ok(ExpansionEstimate { value, dropped_term: dropped })
}

fn weight_from_ratio(y: f64) -> f64 {
    // x = y / sqrt(1 + y^2), stable against overflow of y^2
    if y == 0.0 {
        0.0
    } else {
        1.0 / (1.0 + 1.0 / (y * y)).sqrt()
    }
}

/// Exact closed-form values along a path, one per `beta`.
///
/// Each point builds the selection pair for `alpha = beta / sqrt(1 + beta^2)`
/// and the path's weight, then evaluates the exact ratio; nothing asymptotic
/// enters, which is what makes sweeps usable as evidence for the classified
/// exponents. Extremely lopsided weights saturate `x` at 1 in double
/// precision, pinning the value to its limit; fit windows should stay where
/// the weight is representable.
pub fn sweep_path(
    path: &Path,
    betas: &[f64],
    theta: f64,
    ov: &OverlapSet,
) -> Result<Vec<SweepPoint>> {
    validate_theta(theta)?;
    let mut out = Vec::with_capacity(betas.len());
    for &beta in betas {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Invalid { field: "beta", reason: "must be positive and finite" });
        }
        let alpha = 1.0 / (1.0 + 1.0 / (beta * beta)).sqrt();
        let x = match *path {
            Path::FixedX { x } => x,
            Path::Power { s } => weight_from_ratio(beta.powf(s)),
        };
        let sel = make_selection(x, theta, alpha)?;
        let r = exact::expectation_closed_form(&sel, ov)?;
        out.push(SweepPoint {
            beta,
            expectation: r.expectation,
            postselection_probability: r.postselection_probability,
        });
    }
    Ok(out)
}

/// Least-squares slope of `ln |value - limit|` against `ln beta`.
///
/// Residuals at or below the round-off floor of the double-precision closed
/// form are discarded first; fewer than three surviving points is an
/// insufficient-dynamic-range error, reported rather than fitted.
pub fn fit_exponent(betas: &[f64], values: &[f64], limit: f64) -> Result<ExponentFit> {
    if betas.len() != values.len() {
        return Err(Error::Invalid { field: "values", reason: "length must match betas" });
    }
    if betas.len() < 5 {
        return Err(Error::Invalid { field: "betas", reason: "need at least five samples" });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&b, &v) in betas.iter().zip(values) {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Invalid { field: "betas", reason: "must be positive and finite" });
        }
        if !v.is_finite() {
            return Err(Error::Invalid { field: "values", reason: "must be finite" });
        }
        let r = (v - limit).abs();
        if r > RESIDUAL_FLOOR {
            xs.push(b.ln());
            ys.push(r.ln());
        }
    }
    let retained = xs.len();
    if retained < 3 {
        return Err(Error::InsufficientDynamicRange { retained });
    }
    let n = retained as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Invalid { field: "betas", reason: "need distinct sample points" });
    }
    let slope = sxy / sxx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        let fit = my + slope * (x - mx);
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - my) * (y - my);
    }
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ExponentFit { exponent: slope, r_squared, retained })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObservableA;
    use crate::probe::{gaussian_probe, overlaps, PointerOperator};
    use approx::assert_abs_diff_eq;

    fn standard_overlaps() -> OverlapSet {
        let probe = gaussian_probe(0.3, 1.0, 0.7).unwrap();
        let obs = ObservableA::new(1.3, -0.4).unwrap();
        overlaps(&probe, 0.2, &obs, &PointerOperator::Position).unwrap()
    }

    fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn power_zero_is_a_fixed_balanced_weight() {
        let ov = standard_overlaps();
        let theta = 0.9;
        let zero = classify_regime(&Path::Power { s: 0.0 }, theta, &ov).unwrap();
        let fixed =
            classify_regime(&Path::FixedX { x: 1.0 / 2f64.sqrt() }, theta, &ov).unwrap();
        assert_eq!(zero.regime, Regime::NoCompetition);
        assert_eq!(zero.predicted_limit, fixed.predicted_limit);
        assert_abs_diff_eq!(
            zero.linear_coefficient.unwrap(),
            fixed.linear_coefficient.unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn balanced_fixed_weight_coefficient_doubles_the_subunit_one() {
        let ov = standard_overlaps();
        for theta in [0.0, 0.9, 2.5, 4.4] {
            let sub = classify_regime(&Path::Power { s: 0.5 }, theta, &ov).unwrap();
            let fixed = classify_regime(&Path::Power { s: 0.0 }, theta, &ov).unwrap();
            assert_abs_diff_eq!(
                fixed.linear_coefficient.unwrap(),
                2.0 * sub.linear_coefficient.unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn subunit_expansion_tracks_the_exact_sweep() {
        let ov = standard_overlaps();
        let theta = 0.9;
        let report = classify_regime(&Path::Power { s: 0.7 }, theta, &ov).unwrap();
        assert_eq!(report.regime, Regime::SubUnit);
        assert_abs_diff_eq!(report.leading_exponent, 0.3, epsilon = 1e-15);
        let betas = [1e-8, 1e-7];
        let sweep = sweep_path(&Path::Power { s: 0.7 }, &betas, theta, &ov).unwrap();
        for point in sweep {
            let est = expansion_value(&report, point.beta).unwrap();
            let lead = (est.value - report.predicted_limit).abs();
            assert!(lead > 0.0);
            let err = (est.value - point.expectation).abs();
            assert!(
                err < 0.05 * lead + 1e-12,
                "beta {} expansion {} exact {}",
                point.beta,
                est.value,
                point.expectation
            );
            assert!(err < 50.0 * est.dropped_term + 1e-12);
        }
    }

    #[test]
    fn subunit_exponent_is_recovered_by_fitting() {
        let ov = standard_overlaps();
        let theta = 0.9;
        let report = classify_regime(&Path::Power { s: 0.7 }, theta, &ov).unwrap();
        // x = beta^0.7 makes the denominator ~ 2 x^2 (1 - Re Y12); the
        // window floor keeps it above the zero-postselection cutoff.
        let betas = logspace(1e-8, 1e-5, 9);
        let sweep = sweep_path(&Path::Power { s: 0.7 }, &betas, theta, &ov).unwrap();
        let values: Vec<f64> = sweep.iter().map(|p| p.expectation).collect();
        let fit = fit_exponent(&betas, &values, report.predicted_limit).unwrap();
        assert!(
            (fit.exponent - 0.3).abs() < 0.05,
            "slope {} r2 {}",
            fit.exponent,
            fit.r_squared
        );
        assert!(fit.r_squared > 0.999);
    }

    #[test]
    fn critical_paths_plateau_at_the_predicted_value() {
        let ov = standard_overlaps();
        let theta = 0.9;
        for s in [1.0, -1.0] {
            let report = classify_regime(&Path::Power { s }, theta, &ov).unwrap();
            assert_eq!(report.regime, Regime::Critical);
            assert!(report.linear_coefficient.is_none());
            let sweep = sweep_path(&Path::Power { s }, &[1e-4], theta, &ov).unwrap();
            assert_abs_diff_eq!(sweep[0].expectation, report.predicted_limit, epsilon = 1e-7);
        }
    }

    #[test]
    fn critical_plateaus_differ_between_the_two_signs() {
        let ov = standard_overlaps();
        let plus = classify_regime(&Path::Power { s: 1.0 }, 0.9, &ov).unwrap();
        let minus = classify_regime(&Path::Power { s: -1.0 }, 0.9, &ov).unwrap();
        assert!((plus.predicted_limit - minus.predicted_limit).abs() > 1e-3);
    }

    #[test]
    fn superunit_paths_land_on_a_single_branch() {
        let ov = standard_overlaps();
        let theta = 0.9;
        let up = classify_regime(&Path::Power { s: 3.0 }, theta, &ov).unwrap();
        assert_eq!(up.regime, Regime::SuperUnit);
        assert_eq!(up.predicted_limit, ov.w22);
        assert_abs_diff_eq!(up.leading_exponent, 2.0, epsilon = 1e-15);
        let down = classify_regime(&Path::Power { s: -2.0 }, theta, &ov).unwrap();
        assert_eq!(down.predicted_limit, ov.w11);
        let sweep = sweep_path(&Path::Power { s: 3.0 }, &[1e-3], theta, &ov).unwrap();
        assert_abs_diff_eq!(sweep[0].expectation, ov.w22, epsilon = 1e-4);
        let sweep = sweep_path(&Path::Power { s: -2.0 }, &[1e-4], theta, &ov).unwrap();
        assert_abs_diff_eq!(sweep[0].expectation, ov.w11, epsilon = 1e-6);
    }

    #[test]
    fn synthetic_power_law_is_fit_exactly() {
        let betas = logspace(1e-6, 1e-2, 12);
        let values: Vec<f64> = betas.iter().map(|b| 2.0 + 3.0 * b.powf(0.7)).collect();
        let fit = fit_exponent(&betas, &values, 2.0).unwrap();
        assert_abs_diff_eq!(fit.exponent, 0.7, epsilon = 1e-9);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert_eq!(fit.retained, 12);
    }

    #[test]
    fn round_off_residuals_are_not_fit() {
        let betas = logspace(1e-6, 1e-2, 8);
        let values: Vec<f64> = betas.iter().map(|_| 2.0 + 1e-13).collect();
        match fit_exponent(&betas, &values, 2.0) {
            Err(Error::InsufficientDynamicRange { retained }) => assert_eq!(retained, 0),
            other => panic!("expected insufficient dynamic range, got {other:?}"),
        }
    }

    #[test]
    fn path_validation() {
        let ov = standard_overlaps();
        assert!(matches!(
            classify_regime(&Path::FixedX { x: 1.0 }, 0.0, &ov),
            Err(Error::Invalid { field: "x", .. })
        ));
        assert!(matches!(
            classify_regime(&Path::Power { s: f64::NAN }, 0.0, &ov),
            Err(Error::Invalid { field: "s", .. })
        ));
        assert!(matches!(
            classify_regime(&Path::Power { s: 0.5 }, -0.1, &ov),
            Err(Error::Invalid { field: "theta", .. })
        ));
        let report = classify_regime(&Path::Power { s: 0.5 }, 0.0, &ov).unwrap();
        assert!(matches!(
            expansion_value(&report, 0.0),
            Err(Error::Invalid { field: "beta", .. })
        ));
    }

    #[test]
    fn degenerate_observables_cannot_be_classified() {
        let probe = gaussian_probe(0.0, 1.0, 0.0).unwrap();
        let obs = ObservableA::new(0.4, 0.4).unwrap();
        let ov = overlaps(&probe, 0.3, &obs, &PointerOperator::Position).unwrap();
        assert!(matches!(
            classify_regime(&Path::Power { s: 0.5 }, 0.0, &ov),
            Err(Error::DegenerateObservable)
        ));
    }
}
