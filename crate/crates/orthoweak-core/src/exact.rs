//! Exact conditioned pointer expectations.
//!
//! After the impulsive coupling `exp(-i g A p)` and a post-selection with
//! branch coefficients `k1`, `k2`, the pointer is left in the unnormalized
//! state `k1 phi(q - g a1) + k2 phi(q - g a2)`. Every conditioned mean is the
//! ratio
//!
//! ```text
//!         |k1|^2 W11 + |k2|^2 W22 + 2 Re(conj(k1) k2 W12)
//!   <M> = -----------------------------------------------
//!         |k1|^2 + |k2|^2 + 2 Re(conj(k1) k2 Y12)
//! ```
//!
//! whose denominator is the post-selection probability. No weak-coupling
//! approximation is involved; the formula holds for any coupling strength and
//! any selection pair with nonzero success probability.

use alloc::collections::BTreeMap;

use crate::fft::{self, Fft};
// unused whenever a dependency links std: the inherent methods shadow these
#[cfg(not(test))]
#[allow(unused_imports)]
use crate::fmath::Real;
use crate::model::{ObservableA, SelectionPair};
use crate::probe::{OverlapSet, PointerOperator, ProbeState};
use crate::{Complex, Error, Result};

/// Post-selection probabilities below this are treated as zero.
const PROBABILITY_FLOOR: f64 = 1e-14;

/// Which formula produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// The exact ratio of branch overlaps.
    ClosedForm,
    /// The dedicated orthogonal-selection formula.
    OrthogonalFormula,
    /// Direct quadrature on the conditioned state.
    Oracle,
}

/// A conditioned expectation together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    pub expectation: f64,
    pub postselection_probability: f64,
    pub route: Route,
    /// Scalar internals useful when a result looks suspicious.
    pub diagnostics: BTreeMap<&'static str, f64>,
}

/// Exact conditioned expectation from selection coefficients and overlaps.
///
/// Fails with a zero-post-selection error when the success probability falls
/// below 1e-14, which happens exactly for orthogonal selections with the
/// pre-selection an eigenstate (`alpha = 0` with `x` equal to 0 or 1), and
/// numerically whenever the branches interfere the conditioning away.
pub fn expectation_closed_form(sel: &SelectionPair, ov: &OverlapSet) -> Result<MeasurementResult> {
    let k1s = sel.k1.norm_sqr();
    let k2s = sel.k2.norm_sqr();
    let cross = sel.k1.conj() * sel.k2;
    let den = k1s + k2s + 2.0 * (cross * ov.y12).re;
    if den < PROBABILITY_FLOOR {
        return Err(Error::ZeroPostselection);
    }
    let num = k1s * ov.w11 + k2s * ov.w22 + 2.0 * (cross * ov.w12).re;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("denominator", den);
    diagnostics.insert("k1_abs", k1s.sqrt());
    diagnostics.insert("k2_abs", k2s.sqrt());
    Ok(MeasurementResult {
        expectation: num / den,
        postselection_probability: den,
        route: Route::ClosedForm,
        diagnostics,
    })
}

/// Conditioned expectation for exactly orthogonal selections.
///
/// At `alpha = 0` the coefficients collapse to `k2 = -k1` for every `x` in
/// (0, 1) and every `theta`, so the selection geometry drops out:
///
/// ```text
///   <M> = (W11 + W22 - 2 Re W12) / (2 (1 - Re Y12))
/// ```
///
/// The quoted probability is for the balanced pair `x = 1/sqrt(2)`, where
/// `|k1| = |k2| = 1/2` and the success probability is largest.
pub fn expectation_orthogonal(ov: &OverlapSet) -> Result<MeasurementResult> {
    if ov.g * (ov.a1 - ov.a2) == 0.0 {
        return Err(Error::DegenerateObservable);
    }
    let gap = 1.0 - ov.y12.re;
    if gap < PROBABILITY_FLOOR {
        return Err(Error::ZeroPostselection);
    }
    let num = ov.w11 + ov.w22 - 2.0 * ov.w12.re;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("denominator", 2.0 * gap);
    Ok(MeasurementResult {
        expectation: num / (2.0 * gap),
        postselection_probability: gap / 2.0,
        route: Route::OrthogonalFormula,
        diagnostics,
    })
}

/// Conditioned expectation by direct quadrature, sharing no algebra with the
/// closed form: the conditioned state is assembled sample by sample on a
/// grid and the mean read off with the rectangle rule (spectrally for
/// momentum).
///
/// Analytic probes are first put on a grid wide enough for both branch
/// displacements; grid probes must absorb the displacements in their own
/// domain or the shift reports an overflow.
pub fn oracle_expectation(
    sel: &SelectionPair,
    obs: &ObservableA,
    probe: &ProbeState,
    g: f64,
    m_op: &PointerOperator,
) -> Result<MeasurementResult> {
    let gridded = if probe.grid().is_some() {
        probe.clone()
    } else {
        let (lo, hi, n) = probe.default_grid(g, obs);
        probe.rasterize(lo, hi, n)?
    };
    let b1 = gridded.shift(g * obs.a1())?;
    let b2 = gridded.shift(g * obs.a2())?;
    let g1 = b1.grid().expect("shift keeps the grid backend");
    let g2 = b2.grid().expect("shift keeps the grid backend");
    let n = g1.n();
    let h = g1.spacing();
    if let PointerOperator::MultiplicationBy(f) = m_op {
        if f.len() != n {
            return Err(Error::Invalid {
                field: "m_op",
                reason: "multiplication table length does not match the grid",
            });
        }
    }

    let mut conditioned = alloc::vec::Vec::with_capacity(n);
    for i in 0..n {
        conditioned.push(sel.k1 * g1.samples()[i] + sel.k2 * g2.samples()[i]);
    }
    let norm_sq: f64 = conditioned.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    if norm_sq < PROBABILITY_FLOOR {
        return Err(Error::ZeroPostselection);
    }

    let mean = match m_op {
        PointerOperator::Position => {
            let mut acc = 0.0;
            for (i, z) in conditioned.iter().enumerate() {
                acc += (g1.q_min() + i as f64 * h) * z.norm_sqr();
            }
            acc * h / norm_sq
        }
        PointerOperator::Momentum => {
            let fft = Fft::new(n);
            let ks = fft::wavenumbers(n, h);
            let spec = fft::spectrum_with_floor(&fft, &conditioned, 1e-14);
            let d1 = fft::derivative_from_spectrum(&fft, &spec, &ks, 1);
            let mi = Complex::new(0.0, -1.0);
            let mut acc = 0.0;
            for (z, d) in conditioned.iter().zip(&d1) {
                acc += (z.conj() * mi * d).re;
            }
            acc * h / norm_sq
        }
        PointerOperator::MultiplicationBy(f) => {
            let mut acc = 0.0;
            for (z, w) in conditioned.iter().zip(f) {
                acc += w * z.norm_sqr();
            }
            acc * h / norm_sq
        }
    };

    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("denominator", norm_sq);
    diagnostics.insert("k1_abs", sel.k1.norm());
    diagnostics.insert("k2_abs", sel.k2.norm());
    Ok(MeasurementResult {
        expectation: mean,
        postselection_probability: norm_sq,
        route: Route::Oracle,
        diagnostics,
    })
}

/// Discriminant of the post-selection probability seen as a quadratic in the
/// selection weight. Negative for every admissible overlap set, which is why
/// the conditioned expectation can only diverge where the probability itself
/// vanishes.
///
/// `y` is the selection weight ratio `x / sqrt(1 - x^2)`.
pub fn denominator_discriminant(ov: &OverlapSet, y: f64, theta: f64) -> f64 {
    let ry = ov.y12.re;
    let iy = ov.y12.im;
    let (st, ct) = libm::sincos(theta);
    let bracket = (y - 1.0) * (1.0 - ry) * ct - (y + 1.0) * iy * st;
    4.0 * y * bracket * bracket - 8.0 * y * (1.0 - ry) * (y * y + 1.0 + 2.0 * y * ry)
}
