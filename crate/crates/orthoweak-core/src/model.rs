//! The measured observable and the pre/post-selection geometry.
//!
//! A selection pair is parametrized by three reals: `x` places the
//! pre-selected state relative to the observable eigenbasis, `theta` is the
//! relative phase of the orthogonal component, and `alpha` is the overlap of
//! the post-selection with the pre-selection. Every downstream formula
//! consumes the derived amplitude coefficients `k1`, `k2` rather than the raw
//! angles.

// unused whenever a dependency links std: the inherent methods shadow these
#[cfg(not(test))]
#[allow(unused_imports)]
use crate::fmath::Real;
use crate::probe::ProbeMoments;
use crate::{Complex, Error, Result};

/// Two-outcome observable `A = a1 |a1><a1| + a2 |a2><a2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableA {
    a1: f64,
    a2: f64,
}

impl ObservableA {
    pub fn new(a1: f64, a2: f64) -> Result<ObservableA> {
        if !a1.is_finite() {
            return Err(Error::Invalid { field: "a1", reason: "must be finite" });
        }
        if !a2.is_finite() {
            return Err(Error::Invalid { field: "a2", reason: "must be finite" });
        }
        Ok(ObservableA { a1, a2 })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// Exact float equality on purpose: only a bitwise-coincident pair leaves
    /// the two pointer branches without any lever to separate them.
    pub fn is_degenerate(&self) -> bool {
        self.a1 == self.a2
    }
}

/// Pre/post-selection pair with its derived amplitude coefficients.
///
/// `k1` and `k2` weight the two displaced pointer branches after
/// post-selection; `k1 + k2 = alpha` always. `y` and `beta` are the
/// tangent-like reparametrizations of `x` and `alpha`; each is `None` when it
/// sits at infinity (`x = 1`, `alpha = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPair {
    pub x: f64,
    pub theta: f64,
    pub alpha: f64,
    pub y: Option<f64>,
    pub beta: Option<f64>,
    pub k1: Complex,
    pub k2: Complex,
}

/// Validates the selection parameters and derives the branch coefficients.
pub fn make_selection(x: f64, theta: f64, alpha: f64) -> Result<SelectionPair> {
    if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
        return Err(Error::Invalid { field: "x", reason: "must lie in [0, 1]" });
    }
    if !(theta.is_finite() && (0.0..core::f64::consts::TAU).contains(&theta)) {
        return Err(Error::Invalid { field: "theta", reason: "must lie in [0, 2*pi)" });
    }
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::Invalid { field: "alpha", reason: "must lie in [0, 1]" });
    }

    let xc = (1.0 - x * x).sqrt();
    let ac = (1.0 - alpha * alpha).sqrt();
    let phase = Complex::new(theta.cos(), -theta.sin());
    let cross = ac * x * xc * phase;
    let k1 = Complex::new(alpha * x * x, 0.0) + cross;
    let k2 = Complex::new(alpha * (1.0 - x * x), 0.0) - cross;

    let y = if x < 1.0 { Some(x / xc) } else { None };
    let beta = if alpha < 1.0 { Some(alpha / ac) } else { None };

    Ok(SelectionPair { x, theta, alpha, y, beta, k1, k2 })
}

/// Weak value `A_w = (k1 a1 + k2 a2) / alpha`.
///
/// Undefined at `alpha = 0`; the conditioned expectation still exists there
/// and is served by `exact::expectation_orthogonal`.
pub fn weak_value(sel: &SelectionPair, obs: &ObservableA) -> Result<Complex> {
    if sel.alpha == 0.0 {
        return Err(Error::WeakValueUndefined);
    }
    Ok((sel.k1 * obs.a1 + sel.k2 * obs.a2) / sel.alpha)
}

/// Conditioned pointer means to first order in the coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderShifts {
    pub mean_q: f64,
    pub mean_p: f64,
}

/// Leading-order pointer response: the position mean moves by `g Re A_w`,
/// the momentum mean by `2 g Im A_w Var(p)`.
pub fn first_order_shifts(aw: Complex, g: f64, moments: &ProbeMoments) -> FirstOrderShifts {
    FirstOrderShifts {
        mean_q: moments.mean_q + g * aw.re,
        mean_p: moments.mean_p + 2.0 * g * aw.im * moments.var_p,
    }
}
