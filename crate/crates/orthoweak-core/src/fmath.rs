//! Float math routed through `libm` so the crate builds without `std`.
//!
//! Whenever `std` is in the crate graph (unit tests, or integration-test
//! builds whose dev-dependencies link it) the inherent methods shadow these;
//! values may differ from the libm port by an ulp, which no tolerance here
//! resolves.

#[allow(dead_code)]
pub(crate) trait Real: Copy {
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn ceil(self) -> Self;
    fn powf(self, e: Self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Real for f64 {
    fn exp(self) -> Self {
        libm::exp(self)
    }

    fn ln(self) -> Self {
        libm::log(self)
    }

    fn sqrt(self) -> Self {
        libm::sqrt(self)
    }

    fn sin(self) -> Self {
        libm::sin(self)
    }

    fn cos(self) -> Self {
        libm::cos(self)
    }

    fn ceil(self) -> Self {
        libm::ceil(self)
    }

    fn powf(self, e: Self) -> Self {
        libm::pow(self, e)
    }

    fn powi(self, n: i32) -> Self {
        libm::pow(self, n as f64)
    }
}
