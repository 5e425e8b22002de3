//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("point ({x:.3}, {y:.3}) is outside the elevation map bounds")]
    OutOfBounds { x: f64, y: f64 },
    #[error("sample touches an invalid (unobserved) map cell at ({col}, {row})")]
    InvalidCell { col: usize, row: usize },
    #[error("crop window exceeds the raw map extent")]
    CropOutOfRange,
    #[error("elevation map has no valid cells to fill from")]
    AllCellsInvalid,
    #[error("pitch {pitch_rad:.4} rad is within the gimbal-lock guard band")]
    GimbalProximity { pitch_rad: f64 },
    #[error("vertical acceleration {a_z:.3} m/s^2 below validity floor (airborne?)")]
    LowVerticalAcceleration { a_z: f64 },
    #[error("Riccati iteration did not converge (residual {residual:.3e})")]
    RiccatiDiverged { residual: f64 },
    #[error("all rollout costs are infinite; no sample stayed on the map")]
    DegenerateWeights,
    #[error("plant is rolled over; reset before stepping")]
    PlantRolledOver,
    #[error("empty series")]
    EmptySeries,
    #[error("sample rate {rate_hz:.2} Hz too low for a 2 Hz low-pass")]
    SampleRateTooLow { rate_hz: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("experiment failure: {0}")]
    Experiment(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
