//! Pointer (probe) states and the overlap integrals the conditioned
//! expectations are built from.
//!
//! Two backends share one interface: an analytic Gaussian wave packet
//!
//! ```text
//!   phi(q) = (2 pi sigma^2)^(-1/4) exp(-(q - mean)^2 / (4 sigma^2)) exp(i kick q)
//! ```
//!
//! evaluated in closed form, and a uniform periodic grid of complex samples
//! driven spectrally. Grids hold `n` samples at `q_min + i h`, `h = (q_max -
//! q_min) / n`, with `n` a power of two; states are normalized so that
//! `h * sum |phi|^2 = 1`.
//!
//! The displaced-branch overlaps
//!
//! ```text
//!   W_ij = <phi_i| M |phi_j>,   Y_ij = <phi_i|phi_j>,   phi_i(q) = phi(q - g a_i)
//! ```
//!
//! are the only probe quantities the exact formulas consume. The derivative
//! integral tables I_n, J_n, K_n feed the orthogonal-limit series.

use alloc::vec::Vec;

use crate::fft::{self, Fft};
// unused whenever a dependency links std: the inherent methods shadow these
#[cfg(not(test))]
#[allow(unused_imports)]
use crate::fmath::Real;
use crate::model::ObservableA;
use crate::{Complex, Error, Result};

/// Fraction of the spectrum peak below which grid spectral coefficients are
/// treated as round-off and zeroed before differentiation.
const SPECTRAL_FLOOR: f64 = 1e-14;
/// Mass fraction allowed in the outer 5% of a grid domain.
const TAIL_TOLERANCE: f64 = 1e-10;
/// Allowed mass fraction of a derivative integrand in the outer third of
/// the wavenumber range, where the grid barely represents oscillations.
const DERIVATIVE_TAIL_TOLERANCE: f64 = 1e-8;
/// Allowed estimate of the integrand mass clipped by the round-off floor,
/// measured over the outermost retained spectral bins.
const DERIVATIVE_CLIP_TOLERANCE: f64 = 1e-7;
/// Sample count used when an analytic probe has to be put on a grid.
pub const DEFAULT_GRID_N: usize = 4096;
/// Half-width of an auto-derived grid domain, in units of sigma.
const DOMAIN_SIGMAS: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
enum Backend {
    Gaussian { mean: f64, sigma: f64, kick: f64 },
    Grid(GridProbe),
}

/// A normalized single-particle pointer state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeState {
    backend: Backend,
}

/// Uniform periodic grid of complex samples, normalized at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProbe {
    q_min: f64,
    h: f64,
    samples: Vec<Complex>,
}

/// Analytic Gaussian probe; `sigma` is the position standard deviation and
/// `kick` the mean momentum.
pub fn gaussian_probe(mean: f64, sigma: f64, kick: f64) -> Result<ProbeState> {
    if !mean.is_finite() {
        return Err(Error::Invalid { field: "mean", reason: "must be finite" });
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Invalid { field: "sigma", reason: "must be positive" });
    }
    if !kick.is_finite() {
        return Err(Error::Invalid { field: "kick", reason: "must be finite" });
    }
    Ok(ProbeState { backend: Backend::Gaussian { mean, sigma, kick } })
}

/// Grid probe over `[q_min, q_max)`; samples are normalized, and the state
/// must have decayed inside the domain (outer 5% mass below 1e-10).
pub fn grid_probe(q_min: f64, q_max: f64, samples: Vec<Complex>) -> Result<ProbeState> {
    if !(q_min.is_finite() && q_max.is_finite() && q_max > q_min) {
        return Err(Error::Invalid { field: "domain", reason: "need finite q_min < q_max" });
    }
    let n = samples.len();
    if !n.is_power_of_two() || n < 256 {
        return Err(Error::Invalid {
            field: "samples",
            reason: "sample count must be a power of two, at least 256",
        });
    }
    if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid { field: "samples", reason: "must be finite" });
    }
    let h = (q_max - q_min) / n as f64;
    let norm_sq: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    if !(norm_sq.is_finite() && norm_sq > 1e-300) {
        return Err(Error::Invalid { field: "samples", reason: "state is not normalizable" });
    }
    let scale = 1.0 / norm_sq.sqrt();
    let samples: Vec<Complex> = samples.into_iter().map(|z| z * scale).collect();
    let grid = GridProbe { q_min, h, samples };
    let tail = grid.outer_tail_mass();
    if tail >= TAIL_TOLERANCE {
        return Err(Error::DecayConditionViolated { tail_mass: tail });
    }
    Ok(ProbeState { backend: Backend::Grid(grid) })
}

impl GridProbe {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn q_min(&self) -> f64 {
        self.q_min
    }

    pub fn q_max(&self) -> f64 {
        self.q_min + self.h * self.n() as f64
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.q_min + i as f64 * self.h).collect()
    }

    fn outer_tail_mass(&self) -> f64 {
        let n = self.n();
        let edge = (n as f64 * 0.025).ceil() as usize;
        let mut mass = 0.0;
        for i in 0..edge {
            mass += self.samples[i].norm_sqr();
            mass += self.samples[n - 1 - i].norm_sqr();
        }
        mass * self.h
    }
}

/// Low-order moments of a probe state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeMoments {
    pub mean_q: f64,
    pub mean_p: f64,
    pub var_q: f64,
    pub var_p: f64,
}

/// What acts on the pointer inside an overlap.
#[derive(Debug, Clone, PartialEq)]
pub enum PointerOperator {
    /// Position q.
    Position,
    /// Momentum p = -i d/dq.
    Momentum,
    /// Multiplication by a real function sampled on the probe's grid.
    MultiplicationBy(Vec<f64>),
}

/// Discriminant of `PointerOperator` kept inside an `OverlapSet`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    Position,
    Momentum,
    MultiplicationBy,
}

impl PointerOperator {
    pub fn tag(&self) -> OperatorTag {
        match self {
            PointerOperator::Position => OperatorTag::Position,
            PointerOperator::Momentum => OperatorTag::Momentum,
            PointerOperator::MultiplicationBy(_) => OperatorTag::MultiplicationBy,
        }
    }
}

/// Displaced-branch matrix elements for one probe, coupling, and pointer
/// operator. Only the upper off-diagonal is stored; the conjugate follows
/// from hermiticity. Diagonal entries of a hermitian form are real, so they
/// are kept as reals.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSet {
    pub w11: f64,
    pub w22: f64,
    pub w12: Complex,
    pub y12: Complex,
    pub observable_tag: OperatorTag,
    pub g: f64,
    pub a1: f64,
    pub a2: f64,
}

/// Derivative integral table:
///
/// ```text
///   I_n = integral |phi^(n)|^2 dq
///   J_n = integral q |phi^(n)|^2 dq
///   K_n = integral Re(phi^(n)) Im(phi^(n+1)) dq
/// ```
///
/// `I_n`, `J_n` run through `n_max`; `K_n` through `n_max + 1`, because the
/// momentum-series numerator consumes the shifted family `K'_n = K_(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeIntegralTable {
    n_max: usize,
    i: Vec<f64>,
    j: Vec<f64>,
    k: Vec<f64>,
}

impl DerivativeIntegralTable {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn i(&self, n: usize) -> f64 {
        self.i[n]
    }

    pub fn j(&self, n: usize) -> f64 {
        self.j[n]
    }

    pub fn k(&self, n: usize) -> f64 {
        self.k[n]
    }

    /// The (n+1, n+2) derivative pair integral; same family as `k`, shifted.
    pub fn k_prime(&self, n: usize) -> f64 {
        self.k[n + 1]
    }
}

impl ProbeState {
    /// Gaussian parameters `(mean, sigma, kick)` when analytic.
    pub fn gaussian_params(&self) -> Option<(f64, f64, f64)> {
        match &self.backend {
            Backend::Gaussian { mean, sigma, kick } => Some((*mean, *sigma, *kick)),
            Backend::Grid(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&GridProbe> {
        match &self.backend {
            Backend::Grid(g) => Some(g),
            Backend::Gaussian { .. } => None,
        }
    }

    /// Translate the state by `d`.
    ///
    /// The analytic backend shifts its mean; the overall phase exp(-i kick d)
    /// a translated wave packet picks up is dropped there, which no
    /// single-state expectation can see. The grid backend translates
    /// spectrally (phase included) and refuses translations that push
    /// significant mass into the outer 5% of the domain.
    pub fn shift(&self, d: f64) -> Result<ProbeState> {
        if !d.is_finite() {
            return Err(Error::Invalid { field: "distance", reason: "must be finite" });
        }
        match &self.backend {
            Backend::Gaussian { mean, sigma, kick } => Ok(ProbeState {
                backend: Backend::Gaussian { mean: mean + d, sigma: *sigma, kick: *kick },
            }),
            Backend::Grid(g) => {
                let fft = Fft::new(g.n());
                let ks = fft::wavenumbers(g.n(), g.h);
                let samples = fft::translate(&fft, &g.samples, &ks, d);
                let shifted = GridProbe { q_min: g.q_min, h: g.h, samples };
                let tail = shifted.outer_tail_mass();
                if tail >= TAIL_TOLERANCE {
                    return Err(Error::DomainOverflow { tail_mass: tail });
                }
                Ok(ProbeState { backend: Backend::Grid(shifted) })
            }
        }
    }

    /// Mean and variance of position and momentum.
    pub fn moments(&self) -> ProbeMoments {
        match &self.backend {
            Backend::Gaussian { mean, sigma, kick } => ProbeMoments {
                mean_q: *mean,
                mean_p: *kick,
                var_q: sigma * sigma,
                var_p: 1.0 / (4.0 * sigma * sigma),
            },
            Backend::Grid(g) => {
                let h = g.h;
                let n = g.n();
                let fft = Fft::new(n);
                let ks = fft::wavenumbers(n, h);
                let spec = fft::spectrum_with_floor(&fft, &g.samples, SPECTRAL_FLOOR);
                let d1 = fft::derivative_from_spectrum(&fft, &spec, &ks, 1);
                let mut mean_q = 0.0;
                let mut mean_qq = 0.0;
                let mut mean_p = 0.0;
                let mut mean_pp = 0.0;
                for (idx, z) in g.samples.iter().enumerate() {
                    let q = g.q_min + idx as f64 * h;
                    let w = z.norm_sqr();
                    mean_q += q * w;
                    mean_qq += q * q * w;
                    // <p> = Re conj(phi) (-i phi'), <p^2> = |phi'|^2
                    mean_p += (z.conj() * Complex::new(0.0, -1.0) * d1[idx]).re;
                    mean_pp += d1[idx].norm_sqr();
                }
                ProbeMoments {
                    mean_q: mean_q * h,
                    mean_p: mean_p * h,
                    var_q: mean_qq * h - (mean_q * h) * (mean_q * h),
                    var_p: mean_pp * h - (mean_p * h) * (mean_p * h),
                }
            }
        }
    }

    /// Domain and sample count a grid evaluation of this state should use,
    /// wide enough for branch displacements `g a1`, `g a2`.
    pub fn default_grid(&self, g: f64, obs: &ObservableA) -> (f64, f64, usize) {
        match &self.backend {
            Backend::Gaussian { mean, sigma, .. } => {
                let d1 = g * obs.a1();
                let d2 = g * obs.a2();
                let lo = mean + d1.min(d2).min(0.0) - DOMAIN_SIGMAS * sigma;
                let hi = mean + d1.max(d2).max(0.0) + DOMAIN_SIGMAS * sigma;
                (lo, hi, DEFAULT_GRID_N)
            }
            Backend::Grid(gr) => (gr.q_min, gr.q_max(), gr.n()),
        }
    }

    /// Evaluate an analytic probe on a grid. Grid-backed states pass through
    /// unchanged only when the requested axis is already theirs.
    pub fn rasterize(&self, q_min: f64, q_max: f64, n: usize) -> Result<ProbeState> {
        match &self.backend {
            Backend::Gaussian { mean, sigma, kick } => {
                if !(q_min.is_finite() && q_max.is_finite() && q_max > q_min) {
                    return Err(Error::Invalid {
                        field: "domain",
                        reason: "need finite q_min < q_max",
                    });
                }
                if n < 2 {
                    return Err(Error::Invalid { field: "n", reason: "too few samples" });
                }
                let h = (q_max - q_min) / n as f64;
                let norm = libm::pow(2.0 * core::f64::consts::PI * sigma * sigma, -0.25);
                let samples: Vec<Complex> = (0..n)
                    .map(|idx| {
                        let q = q_min + idx as f64 * h;
                        let env = norm * (-(q - mean) * (q - mean) / (4.0 * sigma * sigma)).exp();
                        let (s, c) = libm::sincos(kick * q);
                        Complex::new(env * c, env * s)
                    })
                    .collect();
                grid_probe(q_min, q_max, samples)
            }
            Backend::Grid(g) => {
                let same = g.q_min == q_min && g.n() == n && (g.q_max() - q_max).abs() < 1e-9;
                if same {
                    Ok(self.clone())
                } else {
                    Err(Error::Invalid {
                        field: "probe",
                        reason: "grid probe already fixed to a different axis",
                    })
                }
            }
        }
    }
}

/// Branch overlaps `W_ij`, `Y_12` for coupling `g` and observable `obs`.
///
/// Gaussian probes use closed forms; grid probes translate spectrally and
/// integrate by the periodic rectangle rule, which is spectrally accurate for
/// states that have decayed inside the domain.
pub fn overlaps(
    probe: &ProbeState,
    g: f64,
    obs: &ObservableA,
    m_op: &PointerOperator,
) -> Result<OverlapSet> {
    if !g.is_finite() {
        return Err(Error::Invalid { field: "g", reason: "must be finite" });
    }
    let (a1, a2) = (obs.a1(), obs.a2());
    match &probe.backend {
        Backend::Gaussian { mean, sigma, kick } => {
            let delta = g * (a1 - a2);
            let (s, c) = libm::sincos(kick * delta);
            let y12 = Complex::new(c, s) * (-delta * delta / (8.0 * sigma * sigma)).exp();
            let (w11, w22, w12) = match m_op {
                PointerOperator::Position => (
                    mean + g * a1,
                    mean + g * a2,
                    y12 * (mean + g * (a1 + a2) / 2.0),
                ),
                PointerOperator::Momentum => (
                    *kick,
                    *kick,
                    y12 * Complex::new(*kick, delta / (4.0 * sigma * sigma)),
                ),
                PointerOperator::MultiplicationBy(_) => {
                    return Err(Error::Invalid {
                        field: "m_op",
                        reason: "multiplication table requires a grid probe",
                    })
                }
            };
            Ok(OverlapSet { w11, w22, w12, y12, observable_tag: m_op.tag(), g, a1, a2 })
        }
        Backend::Grid(gr) => {
            if let PointerOperator::MultiplicationBy(f) = m_op {
                if f.len() != gr.n() {
                    return Err(Error::Invalid {
                        field: "m_op",
                        reason: "multiplication table length does not match the grid",
                    });
                }
            }
            let p1 = probe.shift(g * a1)?;
            let p2 = probe.shift(g * a2)?;
            let g1 = p1.grid().expect("shift preserves the backend");
            let g2 = p2.grid().expect("shift preserves the backend");
            let h = gr.h;
            let n = gr.n();

            let mut y12 = Complex::new(0.0, 0.0);
            for i in 0..n {
                y12 += g1.samples[i].conj() * g2.samples[i];
            }
            let y12 = y12 * h;

            let (w11, w22, w12) = match m_op {
                PointerOperator::Position => {
                    let mut w11 = 0.0;
                    let mut w22 = 0.0;
                    let mut w12 = Complex::new(0.0, 0.0);
                    for i in 0..n {
                        let q = gr.q_min + i as f64 * h;
                        w11 += q * g1.samples[i].norm_sqr();
                        w22 += q * g2.samples[i].norm_sqr();
                        w12 += g1.samples[i].conj() * q * g2.samples[i];
                    }
                    (w11 * h, w22 * h, w12 * h)
                }
                PointerOperator::Momentum => {
                    let fft = Fft::new(n);
                    let ks = fft::wavenumbers(n, h);
                    let s1 = fft::spectrum_with_floor(&fft, &g1.samples, SPECTRAL_FLOOR);
                    let s2 = fft::spectrum_with_floor(&fft, &g2.samples, SPECTRAL_FLOOR);
                    let d1 = fft::derivative_from_spectrum(&fft, &s1, &ks, 1);
                    let d2 = fft::derivative_from_spectrum(&fft, &s2, &ks, 1);
                    let mi = Complex::new(0.0, -1.0);
                    let mut w11 = 0.0;
                    let mut w22 = 0.0;
                    let mut w12 = Complex::new(0.0, 0.0);
                    for i in 0..n {
                        w11 += (g1.samples[i].conj() * mi * d1[i]).re;
                        w22 += (g2.samples[i].conj() * mi * d2[i]).re;
                        w12 += g1.samples[i].conj() * mi * d2[i];
                    }
                    (w11 * h, w22 * h, w12 * h)
                }
                PointerOperator::MultiplicationBy(f) => {
                    let mut w11 = 0.0;
                    let mut w22 = 0.0;
                    let mut w12 = Complex::new(0.0, 0.0);
                    for (i, fi) in f.iter().enumerate() {
                        w11 += fi * g1.samples[i].norm_sqr();
                        w22 += fi * g2.samples[i].norm_sqr();
                        w12 += g1.samples[i].conj() * fi * g2.samples[i];
                    }
                    (w11 * h, w22 * h, w12 * h)
                }
            };
            Ok(OverlapSet { w11, w22, w12, y12, observable_tag: m_op.tag(), g, a1, a2 })
        }
    }
}

/// Raw moments of a normal distribution, `M[m] = E[X^m]` for
/// `X ~ N(mu, s^2)`, via `M_m = mu M_(m-1) + (m-1) s^2 M_(m-2)`.
fn normal_raw_moments(mu: f64, s: f64, m_max: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity(m_max + 1);
    m.push(1.0);
    if m_max >= 1 {
        m.push(mu);
    }
    for order in 2..=m_max {
        let next = mu * m[order - 1] + (order as f64 - 1.0) * s * s * m[order - 2];
        m.push(next);
    }
    m
}

/// Derivative integral table up to `n_max` (at most 32).
///
/// The Gaussian backend is closed form: the momentum density of the packet is
/// normal with mean `kick` and deviation `1/(2 sigma)`, so `I_n` is its
/// 2n-th raw moment, `K_n` half its (2n+1)-th, and `J_n = mean * I_n` by the
/// parity of `|phi^(n)|^2` about the center.
///
/// The grid backend differentiates spectrally above a round-off floor and
/// refuses any order whose integrand has not decayed inside the resolved
/// band.
pub fn derivative_integrals(probe: &ProbeState, n_max: usize) -> Result<DerivativeIntegralTable> {
    if n_max > 32 {
        return Err(Error::Invalid { field: "n_max", reason: "must be at most 32" });
    }
    match &probe.backend {
        Backend::Gaussian { mean, sigma, kick } => {
            let moments = normal_raw_moments(*kick, 1.0 / (2.0 * sigma), 2 * n_max + 3);
            let i: Vec<f64> = (0..=n_max).map(|n| moments[2 * n]).collect();
            let j: Vec<f64> = i.iter().map(|v| mean * v).collect();
            let k: Vec<f64> = (0..=n_max + 1).map(|n| moments[2 * n + 1] / 2.0).collect();
            Ok(DerivativeIntegralTable { n_max, i, j, k })
        }
        Backend::Grid(g) => {
            let n = g.n();
            let h = g.h;
            let fft = Fft::new(n);
            let ks = fft::wavenumbers(n, h);
            let spec = fft::spectrum_with_floor(&fft, &g.samples, SPECTRAL_FLOOR);
            for order in 1..=(n_max + 2) {
                check_derivative_resolved(&spec, &ks, order)?;
            }

            let mut i = Vec::with_capacity(n_max + 1);
            let mut j = Vec::with_capacity(n_max + 1);
            let mut k = Vec::with_capacity(n_max + 2);
            let mut current = fft::derivative_from_spectrum(&fft, &spec, &ks, 0);
            for order in 0..=(n_max + 1) {
                let next = fft::derivative_from_spectrum(&fft, &spec, &ks, order as u32 + 1);
                if order <= n_max {
                    let mut acc_i = 0.0;
                    let mut acc_j = 0.0;
                    for (idx, z) in current.iter().enumerate() {
                        let w = z.norm_sqr();
                        acc_i += w;
                        acc_j += (g.q_min + idx as f64 * h) * w;
                    }
                    i.push(acc_i * h);
                    j.push(acc_j * h);
                }
                let mut acc_k = 0.0;
                for (idx, z) in current.iter().enumerate() {
                    acc_k += z.re * next[idx].im;
                }
                k.push(acc_k * h);
                current = next;
            }
            Ok(DerivativeIntegralTable { n_max, i, j, k })
        }
    }
}

/// A derivative of order `m` is resolved when the integrand `k^(2m) |spec|^2`
/// decays before anything cuts it off. Two cutoffs are checked separately:
/// mass in the outer third of the wavenumber range means the true spectrum
/// runs past what the grid represents (boxes, kinks, too-coarse grids), and
/// mass in the outermost retained bins, right where the round-off floor
/// truncates the spectrum, bounds what the floor clipped away (the integrand
/// decays there, so the discarded tail weighs no more than those bins).
fn check_derivative_resolved(spec: &[Complex], ks: &[f64], order: usize) -> Result<()> {
    let mut k_sig = 0.0f64;
    let mut k_nyq = 0.0f64;
    for (z, &k) in spec.iter().zip(ks) {
        k_nyq = k_nyq.max(k.abs());
        if z.norm_sqr() > 0.0 {
            k_sig = k_sig.max(k.abs());
        }
    }
    if k_sig == 0.0 {
        return Ok(());
    }
    let dk = if ks.len() > 1 { (ks[1] - ks[0]).abs() } else { 0.0 };
    let outer_band = k_nyq * (2.0 / 3.0);
    let clip_band = k_sig - 2.5 * dk;
    let mut total = 0.0;
    let mut outer = 0.0;
    let mut clip = 0.0;
    for (z, &k) in spec.iter().zip(ks) {
        let w = z.norm_sqr() * k.abs().powi(2 * order as i32);
        total += w;
        if k.abs() >= outer_band {
            outer += w;
        }
        if k.abs() >= clip_band {
            clip += w;
        }
    }
    if total == 0.0 {
        return Ok(());
    }
    let outer_fraction = outer / total;
    if outer_fraction > DERIVATIVE_TAIL_TOLERANCE {
        return Err(Error::DerivativeOrderUnresolved { order, tail_fraction: outer_fraction });
    }
    let clip_fraction = clip / total;
    if clip_fraction > DERIVATIVE_CLIP_TOLERANCE {
        return Err(Error::DerivativeOrderUnresolved { order, tail_fraction: clip_fraction });
    }
    Ok(())
}

/// Spectral derivative samples of a grid probe, with the same resolution
/// guard as the integral tables. Returns the grid axis and the derivative.
pub fn derivative_samples(probe: &ProbeState, order: usize) -> Result<(Vec<f64>, Vec<Complex>)> {
    let g = probe.grid().ok_or(Error::Invalid {
        field: "probe",
        reason: "derivative samples require a grid probe",
    })?;
    let fft = Fft::new(g.n());
    let ks = fft::wavenumbers(g.n(), g.h);
    let spec = fft::spectrum_with_floor(&fft, &g.samples, SPECTRAL_FLOOR);
    if order >= 1 {
        check_derivative_resolved(&spec, &ks, order)?;
    }
    let d = fft::derivative_from_spectrum(&fft, &spec, &ks, order as u32);
    Ok((g.axis(), d))
}
