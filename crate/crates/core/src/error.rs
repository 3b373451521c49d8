use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} outside simulation horizon [0, {t_end}]")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("normalization is only defined for m = 1 outputs (got m = {m})")]
    UnsupportedConfiguration { m: usize },

    #[error("integration step from elapsed {elapsed} by {dt} would cross the interval boundary at {interval}")]
    GridBoundaryCrossed { elapsed: f64, dt: f64, interval: f64 },

    #[error("matrix is not symmetric: max asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error(
        "det(omega_f) = {omega:.3e} is below -{tolerance:.3e}: \
         the filtered Gram matrix lost positive semidefiniteness upstream"
    )]
    IndefiniteGram { omega: f64, tolerance: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("window [{t_a}, {t_b}] outside the sampled trace [{t0}, {t1}]")]
    WindowOutOfRange { t_a: f64, t_b: f64, t0: f64, t1: f64 },

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Attach the simulation timestamp at which a numeric error surfaced.
    pub fn at_time(self, t: f64) -> Error {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }
}
