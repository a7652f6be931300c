use core::fmt;

/// Everything that can go wrong across the crate.
///
/// Validation failures name the offending field so callers can surface them
/// verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input parameter is out of its documented domain.
    Invalid {
        field: &'static str,
        reason: &'static str,
    },
    /// Weak value requested for an orthogonal selection pair (alpha = 0).
    WeakValueUndefined,
    /// Conditioning on the post-selection has probability below 1e-14.
    ZeroPostselection,
    /// The observable has a single eigenvalue (a1 == a2), or the coupling
    /// leaves the two pointer branches indistinguishable (g*(a1 - a2) == 0).
    DegenerateObservable,
    /// Grid samples carry more than 1e-10 of their mass in the outer 5% of
    /// the domain.
    DecayConditionViolated { tail_mass: f64 },
    /// A translation pushed significant mass into the outer 5% of the domain.
    DomainOverflow { tail_mass: f64 },
    /// A spectral derivative of the requested order is noise-dominated on
    /// this grid.
    DerivativeOrderUnresolved { order: usize, tail_fraction: f64 },
    /// The denominator series of an orthogonal-limit ratio fell below 1e-14.
    SeriesDegenerate,
    /// Fewer than 3 sweep samples sit above the fit noise floor.
    InsufficientDynamicRange { retained: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Invalid { field, reason } => write!(f, "invalid {field}: {reason}"),
            Error::WeakValueUndefined => {
                write!(
                    f,
                    "weak value undefined for orthogonal selections; \
                     use exact::expectation_orthogonal"
                )
            }
            Error::ZeroPostselection => write!(f, "zero post-selection probability"),
            Error::DegenerateObservable => {
                write!(f, "orthogonal limit undefined for a degenerate observable")
            }
            Error::DecayConditionViolated { tail_mass } => {
                write!(f, "decay condition violated: outer tail mass {tail_mass:e}")
            }
            Error::DomainOverflow { tail_mass } => {
                write!(f, "domain overflow: outer tail mass {tail_mass:e}")
            }
            Error::DerivativeOrderUnresolved { order, tail_fraction } => {
                write!(
                    f,
                    "derivative order unresolved: order {order} spectral tail fraction {tail_fraction:e}"
                )
            }
            Error::SeriesDegenerate => write!(f, "series degenerate"),
            Error::InsufficientDynamicRange { retained } => {
                write!(f, "insufficient dynamic range: {retained} samples above noise floor")
            }
        }
    }
}

impl core::error::Error for Error {}
