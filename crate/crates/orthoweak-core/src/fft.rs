//! Radix-2 FFT and the spectral helpers built on it.
//!
//! Grids in this crate are uniform with a power-of-two sample count, so a
//! plain iterative Cooley-Tukey transform is all that is needed. The
//! conventions match the usual DFT pair:
//!
//! ```text
//!   X[k] = sum_j x[j] exp(-2 pi i j k / n)        (forward)
//!   x[j] = (1/n) sum_k X[k] exp(+2 pi i j k / n)  (inverse)
//! ```
//!
//! With grid spacing `h`, bin `k` carries angular wavenumber `2 pi k / (n h)`
//! for `k < n/2` and `2 pi (k - n) / (n h)` above, i.e. the Nyquist bin is
//! counted as negative.

use alloc::vec::Vec;

use crate::Complex;

pub(crate) struct Fft {
    n: usize,
    // tw[k] = exp(-2 pi i k / n) for k < n/2
    tw: Vec<Complex>,
}

impl Fft {
    pub(crate) fn new(n: usize) -> Fft {
        assert!(n.is_power_of_two() && n >= 2, "fft size must be a power of two");
        let mut tw = Vec::with_capacity(n / 2);
        for k in 0..n / 2 {
            let ang = -2.0 * core::f64::consts::PI * (k as f64) / (n as f64);
            let (s, c) = libm::sincos(ang);
            tw.push(Complex::new(c, s));
        }
        Fft { n, tw }
    }

    pub(crate) fn forward(&self, data: &mut [Complex]) {
        let n = self.n;
        assert_eq!(data.len(), n);

        // bit-reversal permutation
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }

        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.tw[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    pub(crate) fn inverse(&self, data: &mut [Complex]) {
        for z in data.iter_mut() {
            *z = z.conj();
        }
        self.forward(data);
        let scale = 1.0 / (self.n as f64);
        for z in data.iter_mut() {
            *z = z.conj() * scale;
        }
    }
}

/// Angular wavenumber of each FFT bin for an n-point grid of spacing h.
pub(crate) fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * core::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|i| {
            if i < n / 2 {
                i as f64 * dk
            } else {
                (i as f64 - n as f64) * dk
            }
        })
        .collect()
}

/// Spectrum of `samples`, with coefficients smaller than `floor` times the
/// peak magnitude zeroed.
///
/// Smooth decaying states reach the round-off plateau of the transform well
/// inside the Nyquist band; clamping that plateau is what keeps high-order
/// spectral derivatives meaningful.
pub(crate) fn spectrum_with_floor(fft: &Fft, samples: &[Complex], floor: f64) -> Vec<Complex> {
    let mut spec: Vec<Complex> = samples.to_vec();
    fft.forward(&mut spec);
    if floor > 0.0 {
        let peak = spec.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let cut = floor * peak;
        for z in spec.iter_mut() {
            if z.norm() < cut {
                *z = Complex::new(0.0, 0.0);
            }
        }
    }
    spec
}

/// Inverse transform of `spec` after multiplying bin k by (i k)^order.
pub(crate) fn derivative_from_spectrum(
    fft: &Fft,
    spec: &[Complex],
    ks: &[f64],
    order: u32,
) -> Vec<Complex> {
    let mut out: Vec<Complex> = spec
        .iter()
        .zip(ks)
        .map(|(z, &k)| z * Complex::new(0.0, k).powu(order))
        .collect();
    fft.inverse(&mut out);
    out
}

/// Exact band-limited translation: multiply the spectrum by exp(-i k d).
pub(crate) fn translate(fft: &Fft, samples: &[Complex], ks: &[f64], d: f64) -> Vec<Complex> {
    let mut spec: Vec<Complex> = samples.to_vec();
    fft.forward(&mut spec);
    for (z, &k) in spec.iter_mut().zip(ks) {
        let (s, c) = libm::sincos(-k * d);
        *z *= Complex::new(c, s);
    }
    fft.inverse(&mut spec);
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex::new(0.0, 0.0);
                for (j, &v) in x.iter().enumerate() {
                    let ang = -2.0 * core::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc += v * Complex::new(libm::cos(ang), libm::sin(ang));
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let n = 256;
        // deterministic pseudo-random input
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<Complex> = (0..n).map(|_| Complex::new(next(), next())).collect();
        let want = naive_dft(&x);
        let fft = Fft::new(n);
        let mut got = x.clone();
        fft.forward(&mut got);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-10, "fft deviates from dft: {g} vs {w}");
        }
        fft.inverse(&mut got);
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn translate_shifts_a_delta() {
        let n = 256;
        let mut x = vec![Complex::new(0.0, 0.0); n];
        x[40] = Complex::new(1.0, 0.0);
        let fft = Fft::new(n);
        let ks = wavenumbers(n, 1.0);
        // shifting by 5 grid cells moves the spike from index 40 to 45
        let y = translate(&fft, &x, &ks, 5.0);
        let mut peak = 0;
        for (i, z) in y.iter().enumerate() {
            if z.norm() > y[peak].norm() {
                peak = i;
            }
        }
        assert_eq!(peak, 45);
    }
}
