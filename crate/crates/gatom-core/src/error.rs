use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step dt = {dt} too large: the integrator requires dt <= {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("integration unstable at t = {t}: |b| = {amplitude} exceeds 1 + 1e-4")]
    StepRejected { t: f64, amplitude: f64 },

    #[error("time {t} outside trajectory range [0, {t_max}]")]
    OutOfRange { t: f64, t_max: f64 },

    #[error(
        "position redraw budget exhausted after {attempts} attempts \
         (sigma_x too large for {n} points at min separation {eps})"
    )]
    RedrawBudget { attempts: u32, n: usize, eps: f64 },

    #[error("amplitude underflow: |beta(t1)|^2 = {value:e} < 1e-30; shorten t_max")]
    Underflow { value: f64 },

    #[error("dark-state branch n = {n} is singular for {n_points} coupling points")]
    SingularBranch { n: i64, n_points: usize },

    #[error("nonphysical pole with growth rate {re} found; check the configuration")]
    GrowingPole { re: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("fit rejected: {0}")]
    FitInput(String),

    #[error("sample {index} failed: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}
