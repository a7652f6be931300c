//! Series forms of the branch overlaps and the orthogonal-limit expectations.
//!
//! Expanding the displaced branch `phi(q - g a_2)` about `phi(q - g a_1)`
//! turns each overlap into an alternating series over the derivative
//! integrals I_n, J_n, K_n with weight `x = g (a1 - a2)`:
//!
//! ```text
//!   Re Y12      = sum_n (-1)^n x^(2n) / (2n)! * I_n
//!   Re W12 (q)  = sum_n (-1)^n x^(2n) / (2n)! * (J_n + g (a1 + a2) / 2 * I_n)
//!   Re W12 (p)  = 2 sum_n (-1)^n x^(2n) / (2n)! * K_n
//! ```
//!
//! For exactly orthogonal selections both the numerator and the conditioning
//! probability of the exact ratio vanish to leading order; dividing out the
//! shared `x^2` leaves cancellation-free series with `c_n = (-1)^n x^(2n) /
//! (2n+2)!`:
//!
//! ```text
//!   <q> = g (a1 + a2) / 2 + sum_n c_n J_(n+1) / sum_n c_n I_(n+1)
//!   <p> = 2 sum_n c_n K_(n+1) / sum_n c_n I_(n+1)
//! ```
//!
//! These are what make the orthogonal case numerically trustworthy at small
//! coupling, where the direct formula divides one tiny number by another.

use alloc::vec::Vec;

use crate::fft::{self, Fft};
// unused whenever a dependency links std: the inherent methods shadow these
#[cfg(not(test))]
#[allow(unused_imports)]
use crate::fmath::Real;
use crate::model::ObservableA;
use crate::probe::{self, DerivativeIntegralTable, ProbeState};
use crate::{Complex, Error, Result};

/// Terms stop once the latest one is this small relative to the running sum.
const RELATIVE_CUTOFF: f64 = 1e-14;
/// Orthogonal-series denominators below this are reported as degenerate.
const DEGENERATE_FLOOR: f64 = 1e-14;
/// Max pointwise deviation (relative to the peak) allowed when classifying a
/// state as symmetric or antisymmetric about its center of mass.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// A truncated series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Magnitude of the last included term relative to its sum.
    pub last_term_ratio: f64,
    /// Whether the cutoff was reached before the table ran out.
    pub converged: bool,
}

fn ratio(term: f64, sum: f64) -> f64 {
    if term == 0.0 {
        0.0
    } else if sum == 0.0 {
        f64::INFINITY
    } else {
        (term / sum).abs()
    }
}

/// Series form of `Re <phi_1|phi_2>`.
pub fn series_re_y12(table: &DerivativeIntegralTable, g: f64, obs: &ObservableA) -> SeriesResult {
    let x2 = g * (obs.a1() - obs.a2()) * g * (obs.a1() - obs.a2());
    let mut factor = 1.0;
    let mut sum = 0.0;
    let mut terms = 0;
    let mut last = 0.0;
    let mut converged = false;
    for n in 0..=table.n_max() {
        let term = factor * table.i(n);
        sum += term;
        terms = n + 1;
        last = ratio(term, sum);
        if last <= RELATIVE_CUTOFF {
            converged = true;
            break;
        }
        let m = 2.0 * n as f64;
        factor *= -x2 / ((m + 1.0) * (m + 2.0));
    }
    SeriesResult { value: sum, terms_used: terms, last_term_ratio: last, converged }
}

/// Series form of `Re <phi_1| q |phi_2>`.
pub fn series_re_w12_q(table: &DerivativeIntegralTable, g: f64, obs: &ObservableA) -> SeriesResult {
    let x2 = g * (obs.a1() - obs.a2()) * g * (obs.a1() - obs.a2());
    let off = g * (obs.a1() + obs.a2()) / 2.0;
    let mut factor = 1.0;
    let mut sum = 0.0;
    let mut terms = 0;
    let mut last = 0.0;
    let mut converged = false;
    for n in 0..=table.n_max() {
        let term = factor * (table.j(n) + off * table.i(n));
        sum += term;
        terms = n + 1;
        last = ratio(term, sum);
        if last <= RELATIVE_CUTOFF {
            converged = true;
            break;
        }
        let m = 2.0 * n as f64;
        factor *= -x2 / ((m + 1.0) * (m + 2.0));
    }
    SeriesResult { value: sum, terms_used: terms, last_term_ratio: last, converged }
}

/// Series form of `Re <phi_1| p |phi_2>`. Each derivative pair contributes
/// through both orderings, hence the overall factor 2.
pub fn series_re_w12_p(table: &DerivativeIntegralTable, g: f64, obs: &ObservableA) -> SeriesResult {
    let x2 = g * (obs.a1() - obs.a2()) * g * (obs.a1() - obs.a2());
    let mut factor = 1.0;
    let mut sum = 0.0;
    let mut terms = 0;
    let mut last = 0.0;
    let mut converged = false;
    for n in 0..=table.n_max() {
        let term = 2.0 * factor * table.k(n);
        sum += term;
        terms = n + 1;
        last = ratio(term, sum);
        if last <= RELATIVE_CUTOFF {
            converged = true;
            break;
        }
        let m = 2.0 * n as f64;
        factor *= -x2 / ((m + 1.0) * (m + 2.0));
    }
    SeriesResult { value: sum, terms_used: terms, last_term_ratio: last, converged }
}

/// Orthogonal-selection conditioned position mean as a ratio of series.
pub fn orthogonal_q_series(
    table: &DerivativeIntegralTable,
    g: f64,
    obs: &ObservableA,
) -> Result<SeriesResult> {
    if table.n_max() < 1 {
        return Err(Error::Invalid { field: "table", reason: "needs at least one derivative order" });
    }
    let x2 = g * (obs.a1() - obs.a2()) * g * (obs.a1() - obs.a2());
    let mut c = 0.5;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut terms = 0;
    let mut last = 0.0;
    let mut converged = false;
    for n in 0..table.n_max() {
        let tn = c * table.j(n + 1);
        let td = c * table.i(n + 1);
        num += tn;
        den += td;
        terms = n + 1;
        // the value is num/den, so numerator terms are measured against
        // whichever sum is larger; a parity-zero numerator then converges
        let scale = num.abs().max(den.abs());
        last = ratio(tn, scale).max(ratio(td, den));
        if last <= RELATIVE_CUTOFF {
            converged = true;
            break;
        }
        let m = 2.0 * n as f64;
        c *= -x2 / ((m + 3.0) * (m + 4.0));
    }
    if den.abs() < DEGENERATE_FLOOR {
        return Err(Error::SeriesDegenerate);
    }
    Ok(SeriesResult {
        value: g * (obs.a1() + obs.a2()) / 2.0 + num / den,
        terms_used: terms,
        last_term_ratio: last,
        converged,
    })
}

/// Orthogonal-selection conditioned momentum mean as a ratio of series.
pub fn orthogonal_p_series(
    table: &DerivativeIntegralTable,
    g: f64,
    obs: &ObservableA,
) -> Result<SeriesResult> {
    if table.n_max() < 1 {
        return Err(Error::Invalid { field: "table", reason: "needs at least one derivative order" });
    }
    let x2 = g * (obs.a1() - obs.a2()) * g * (obs.a1() - obs.a2());
    let mut c = 0.5;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut terms = 0;
    let mut last = 0.0;
    let mut converged = false;
    for n in 0..table.n_max() {
        let tn = c * table.k_prime(n);
        let td = c * table.i(n + 1);
        num += tn;
        den += td;
        terms = n + 1;
        let scale = num.abs().max(den.abs());
        last = ratio(tn, scale).max(ratio(td, den));
        if last <= RELATIVE_CUTOFF {
            converged = true;
            break;
        }
        let m = 2.0 * n as f64;
        c *= -x2 / ((m + 3.0) * (m + 4.0));
    }
    if den.abs() < DEGENERATE_FLOOR {
        return Err(Error::SeriesDegenerate);
    }
    Ok(SeriesResult {
        value: 2.0 * num / den,
        terms_used: terms,
        last_term_ratio: last,
        converged,
    })
}

/// Reflection character of a state about its center of mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    Neither,
}

/// Classify `phi(2c - q)` against `+/- phi(q)`, `c` the center of mass.
///
/// Gaussian probes are symmetric exactly when unkicked; a momentum kick adds
/// a phase ramp that breaks reflection. Grid probes are reflected
/// spectrally: index reversal flips about the left edge, a phase ramp slides
/// the flip point to `c`, which need not be a grid point.
pub fn classify_symmetry(probe: &ProbeState) -> Symmetry {
    if let Some((_, _, kick)) = probe.gaussian_params() {
        return if kick == 0.0 { Symmetry::Symmetric } else { Symmetry::Neither };
    }
    let g = probe.grid().expect("probe is analytic or grid");
    let c = probe.moments().mean_q;
    let n = g.n();
    let samples = g.samples();
    let reversed: Vec<Complex> = (0..n).map(|j| samples[(n - j) % n]).collect();
    let fft = Fft::new(n);
    let ks = fft::wavenumbers(n, g.spacing());
    let reflected = fft::translate(&fft, &reversed, &ks, 2.0 * (c - g.q_min()));
    let mut peak = 0.0f64;
    let mut dev_sym = 0.0f64;
    let mut dev_anti = 0.0f64;
    for (a, b) in samples.iter().zip(&reflected) {
        peak = peak.max(a.norm_sqr());
        dev_sym = dev_sym.max((a - b).norm_sqr());
        dev_anti = dev_anti.max((a + b).norm_sqr());
    }
    let peak = peak.sqrt();
    if dev_sym.sqrt() <= SYMMETRY_TOLERANCE * peak {
        Symmetry::Symmetric
    } else if dev_anti.sqrt() <= SYMMETRY_TOLERANCE * peak {
        Symmetry::Antisymmetric
    } else {
        Symmetry::Neither
    }
}

/// Orthogonal-limit means that follow from reflection symmetry alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortcutValues {
    pub mean_q: f64,
    pub mean_p: f64,
    pub symmetry: Symmetry,
}

/// For a probe symmetric or antisymmetric about its center of mass `c`, every
/// `J_n = c I_n` and every `K_n = 0` by parity, so the orthogonal series
/// collapse to `<q> = c + g (a1 + a2) / 2` and `<p> = 0` for any coupling.
/// Returns `None` when the probe has no such symmetry.
pub fn symmetry_shortcut(probe: &ProbeState, g: f64, obs: &ObservableA) -> Option<ShortcutValues> {
    match classify_symmetry(probe) {
        Symmetry::Neither => None,
        s => Some(ShortcutValues {
            mean_q: probe.moments().mean_q + g * (obs.a1() + obs.a2()) / 2.0,
            mean_p: 0.0,
            symmetry: s,
        }),
    }
}

/// Worst residual found while exercising the integration-by-parts identities
/// behind the series rearrangements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    pub n_max: usize,
    pub checks: usize,
    pub max_residual: f64,
    pub worst_family: &'static str,
}

struct Tracker {
    checks: usize,
    worst: f64,
    family: &'static str,
}

impl Tracker {
    fn note(&mut self, family: &'static str, lhs: f64, rhs: f64) {
        let r = (lhs - rhs).abs() / (1.0 + rhs.abs());
        self.checks += 1;
        if r > self.worst {
            self.worst = r;
            self.family = family;
        }
    }
}

fn dot(h: f64, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * h
}

fn qdot(h: f64, q: &[f64], a: &[f64], b: &[f64]) -> f64 {
    q.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum::<f64>() * h
}

/// Check the derivative-pair identities with `u = Re phi`, `v = Im phi`:
/// integrals of `u^(k) u^(m)`, `q u^(k) u^(m)`, and the mixed `u`/`v` pairs
/// with `k + m` fixed all reduce to the balanced member of their family, with
/// signs from repeated integration by parts. Analytic probes are put on
/// their default grid first. Residuals are `|lhs - rhs| / (1 + |rhs|)`.
pub fn identity_residuals(probe: &ProbeState, n_max: usize) -> Result<IdentityReport> {
    if n_max > 8 {
        return Err(Error::Invalid { field: "n_max", reason: "must be at most 8" });
    }
    let gridded = if probe.grid().is_some() {
        probe.clone()
    } else {
        let obs = ObservableA::new(1.0, -1.0)?;
        let (lo, hi, n) = probe.default_grid(0.0, &obs);
        probe.rasterize(lo, hi, n)?
    };
    let grid = gridded.grid().expect("rasterized above");
    let h = grid.spacing();
    let axis = grid.axis();
    let top = 2 * n_max + 1;
    let mut us: Vec<Vec<f64>> = Vec::with_capacity(top + 1);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(top + 1);
    for m in 0..=top {
        let (_, d) = probe::derivative_samples(&gridded, m)?;
        us.push(d.iter().map(|z| z.re).collect());
        vs.push(d.iter().map(|z| z.im).collect());
    }

    let mut t = Tracker { checks: 0, worst: 0.0, family: "even-real" };
    for n in 0..=n_max {
        let i_ref = dot(h, &us[n], &us[n]);
        let j_ref = qdot(h, &axis, &us[n], &us[n]);
        let c_ref = dot(h, &us[n], &vs[n]);
        let s_uv = dot(h, &us[n], &vs[n + 1]);
        let s_vu = dot(h, &vs[n], &us[n + 1]);
        for k in 0..=2 * n {
            // (-1)^(n-k) with n - k possibly negative
            let sgn = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            t.note("even-real", dot(h, &us[k], &us[2 * n - k]), sgn * i_ref);
            t.note("q-even-real", qdot(h, &axis, &us[k], &us[2 * n - k]), sgn * j_ref);
            t.note("even-mixed", dot(h, &us[k], &vs[2 * n - k]), sgn * c_ref);
        }
        for k in 0..=2 * n + 1 {
            let sgn = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
            t.note("odd-real", dot(h, &us[k], &us[2 * n + 1 - k]), 0.0);
            t.note(
                "q-odd-real",
                qdot(h, &axis, &us[k], &us[2 * n + 1 - k]),
                -sgn * (n as f64 - k as f64 + 0.5) * i_ref,
            );
            t.note("odd-mixed-uv", dot(h, &us[k], &vs[2 * n + 1 - k]), sgn * s_uv);
            t.note("odd-mixed-vu", dot(h, &vs[k], &us[2 * n + 1 - k]), sgn * s_vu);
        }
    }
    Ok(IdentityReport {
        n_max,
        checks: t.checks,
        max_residual: t.worst,
        worst_family: t.family,
    })
}

// test oracle constants are exact decimal expansions; keep every digit
#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use crate::probe::{derivative_integrals, gaussian_probe, grid_probe, overlaps, PointerOperator};
    use approx::assert_abs_diff_eq;

    fn standard_table(n_max: usize) -> (DerivativeIntegralTable, ObservableA, f64) {
        let p = gaussian_probe(0.3, 1.0, 0.7).unwrap();
        let obs = ObservableA::new(1.3, -0.4).unwrap();
        (derivative_integrals(&p, n_max).unwrap(), obs, 0.2)
    }

    #[test]
    fn overlap_series_match_the_closed_forms() {
        let (table, obs, g) = standard_table(16);
        let p = gaussian_probe(0.3, 1.0, 0.7).unwrap();
        let ovq = overlaps(&p, g, &obs, &PointerOperator::Position).unwrap();
        let ovp = overlaps(&p, g, &obs, &PointerOperator::Momentum).unwrap();

        let y = series_re_y12(&table, g, &obs);
        assert!(y.converged);
        assert_abs_diff_eq!(y.value, ovq.y12.re, epsilon = 1e-13);

        let wq = series_re_w12_q(&table, g, &obs);
        assert!(wq.converged);
        assert_abs_diff_eq!(wq.value, ovq.w12.re, epsilon = 1e-13);

        let wp = series_re_w12_p(&table, g, &obs);
        assert!(wp.converged);
        assert_abs_diff_eq!(wp.value, ovp.w12.re, epsilon = 1e-13);
    }

    #[test]
    fn orthogonal_series_match_frozen_values() {
        let p = gaussian_probe(0.2, 0.8, 0.4).unwrap();
        let obs = ObservableA::new(1.0, -0.7).unwrap();
        let table = derivative_integrals(&p, 16).unwrap();
        let q = orthogonal_q_series(&table, 0.15, &obs).unwrap();
        let pm = orthogonal_p_series(&table, 0.15, &obs).unwrap();
        assert!(q.converged && pm.converged);
        assert_abs_diff_eq!(q.value, 0.2225, epsilon = 1e-14);
        assert_abs_diff_eq!(pm.value, 0.96414317127340992983, epsilon = 1e-13);
    }

    #[test]
    fn truncation_is_reported_honestly() {
        let (table, obs, _) = standard_table(3);
        // weight far too large for three terms
        let r = series_re_y12(&table, 4.0, &obs);
        assert!(!r.converged);
        assert_eq!(r.terms_used, 4);
        assert!(r.last_term_ratio > RELATIVE_CUTOFF);

        let (table, obs, g) = standard_table(16);
        let r = series_re_y12(&table, g, &obs);
        assert!(r.converged);
        assert!(r.terms_used < 12);
    }

    #[test]
    fn zero_coupling_series_terminate_immediately() {
        let (table, obs, _) = standard_table(8);
        let r = series_re_y12(&table, 0.0, &obs);
        assert!(r.converged);
        assert_eq!(r.value, 1.0);
        let q = orthogonal_q_series(&table, 0.0, &obs).unwrap();
        // J_n = mean I_n for a Gaussian, so the ratio is the packet mean
        assert_abs_diff_eq!(q.value, 0.3, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_symmetry_follows_the_kick() {
        assert_eq!(classify_symmetry(&gaussian_probe(0.4, 1.0, 0.0).unwrap()), Symmetry::Symmetric);
        assert_eq!(classify_symmetry(&gaussian_probe(0.4, 1.0, 0.3).unwrap()), Symmetry::Neither);
    }

    #[test]
    fn grid_symmetry_classification() {
        // shifted Gaussian: symmetric about an off-grid center
        let shifted = gaussian_probe(0.7, 1.0, 0.0)
            .unwrap()
            .rasterize(-12.1, 13.4, 1024)
            .unwrap();
        assert_eq!(classify_symmetry(&shifted), Symmetry::Symmetric);

        // first Hermite mode: antisymmetric
        let n = 1024;
        let (lo, hi) = (-14.0, 14.0);
        let h = (hi - lo) / n as f64;
        let hermite: Vec<Complex> = (0..n)
            .map(|i| {
                let q: f64 = lo + i as f64 * h;
                Complex::new(q * (-q * q / 2.0).exp(), 0.0)
            })
            .collect();
        let hermite = grid_probe(lo, hi, hermite).unwrap();
        assert_eq!(classify_symmetry(&hermite), Symmetry::Antisymmetric);

        // uneven two-Gaussian mixture: neither
        let mix: Vec<Complex> = (0..n)
            .map(|i| {
                let q: f64 = lo + i as f64 * h;
                let a = 0.8 * (-q * q / 2.0).exp();
                let b = 0.6 * (-(q - 2.0) * (q - 2.0) / 0.5).exp();
                Complex::new(a + b, 0.0)
            })
            .collect();
        let mix = grid_probe(lo, hi, mix).unwrap();
        assert_eq!(classify_symmetry(&mix), Symmetry::Neither);
    }

    #[test]
    fn shortcut_agrees_with_the_series_for_an_antisymmetric_probe() {
        let n = 2048;
        let (lo, hi) = (-14.0, 14.0);
        let h = (hi - lo) / n as f64;
        let hermite: Vec<Complex> = (0..n)
            .map(|i| {
                let q: f64 = lo + i as f64 * h;
                Complex::new(q * (-q * q / 2.0).exp(), 0.0)
            })
            .collect();
        let probe = grid_probe(lo, hi, hermite).unwrap();
        let obs = ObservableA::new(1.0, -1.0).unwrap();
        let g = 0.1;
        let cut = symmetry_shortcut(&probe, g, &obs).unwrap();
        assert_eq!(cut.symmetry, Symmetry::Antisymmetric);
        assert_abs_diff_eq!(cut.mean_q, 0.0, epsilon = 1e-12);
        assert_eq!(cut.mean_p, 0.0);

        let table = derivative_integrals(&probe, 6).unwrap();
        let q = orthogonal_q_series(&table, g, &obs).unwrap();
        let p = orthogonal_p_series(&table, g, &obs).unwrap();
        assert_abs_diff_eq!(q.value, cut.mean_q, epsilon = 1e-10);
        assert_abs_diff_eq!(p.value, cut.mean_p, epsilon = 1e-10);
    }

    #[test]
    fn kicked_probe_has_no_shortcut_and_a_real_momentum_mean() {
        let p = gaussian_probe(0.0, 1.0, 0.5).unwrap();
        let obs = ObservableA::new(1.0, -1.0).unwrap();
        assert!(symmetry_shortcut(&p, 0.1, &obs).is_none());
        let table = derivative_integrals(&p, 12).unwrap();
        let pm = orthogonal_p_series(&table, 0.1, &obs).unwrap();
        assert!(pm.value > 0.5);
    }

    #[test]
    fn identity_residuals_are_tiny_for_smooth_probes() {
        let kicked = gaussian_probe(0.3, 1.0, 0.7).unwrap();
        let r = identity_residuals(&kicked, 4).unwrap();
        assert!(r.max_residual < 1e-10, "residual {} in {}", r.max_residual, r.worst_family);
        assert_eq!(r.checks, 195);

        let n = 4096;
        let (lo, hi) = (-16.0, 16.0);
        let h = (hi - lo) / n as f64;
        let chirp: Vec<Complex> = (0..n)
            .map(|i| {
                let q: f64 = lo + i as f64 * h;
                let env = (-q * q / 4.0).exp();
                let (s, c) = (0.1 * q * q * q).sin_cos();
                Complex::new(env * c, env * s)
            })
            .collect();
        let chirp = grid_probe(lo, hi, chirp).unwrap();
        let r = identity_residuals(&chirp, 4).unwrap();
        assert!(r.max_residual < 1e-8, "residual {} in {}", r.max_residual, r.worst_family);
    }

    #[test]
    fn identity_order_cap_is_enforced() {
        let p = gaussian_probe(0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            identity_residuals(&p, 9),
            Err(Error::Invalid { field: "n_max", .. })
        ));
    }
}
