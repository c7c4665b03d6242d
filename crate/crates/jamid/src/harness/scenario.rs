//! Scenario cases: the (d1, d2, SNR, SJR) operating points C1–C6.

use crate::error::{JamError, Result};

/// One experiment operating point: eNB–receiver distance `d1`, jammer–receiver
/// distance `d2`, and target SNR / SJR in dB.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScenarioCase {
    /// Case identifier ("C1".."C6" for the standard set, free-form otherwise).
    pub id: String,
    /// eNB–receiver distance (dimensionless units).
    pub d1: f64,
    /// Jammer–receiver distance.
    pub d2: f64,
    /// Target signal-to-noise ratio in dB.
    pub snr_db: f64,
    /// Target signal-to-jamming ratio in dB.
    pub sjr_db: f64,
}

impl ScenarioCase {
    /// Construct a custom case.
    pub fn custom(id: &str, d1: f64, d2: f64, snr_db: f64, sjr_db: f64) -> Result<Self> {
        if !(d1.is_finite() && d1 > 0.0 && d2.is_finite() && d2 > 0.0) {
            return Err(JamError::Domain(format!("distances must be positive (d1={d1}, d2={d2})")));
        }
        Ok(ScenarioCase { id: id.to_string(), d1, d2, snr_db, sjr_db })
    }

    /// Look up one of the six standard cases by identifier.
    pub fn standard(id: &str) -> Result<Self> {
        let (d1, d2, snr_db, sjr_db) = match id.to_ascii_uppercase().as_str() {
            "C1" => (0.5, 1.5, 10.0, 10.0),
            "C2" => (1.0, 1.0, 5.0, 0.0),
            "C3" => (1.0, 1.5, 5.0, 5.0),
            "C4" => (1.5, 1.0, 0.0, -5.0),
            "C5" => (1.5, 1.5, 0.0, 0.0),
            "C6" => (1.5, 0.5, 0.0, -10.0),
            other => return Err(JamError::Config(format!("unknown scenario case {other:?}"))),
        };
        Ok(ScenarioCase { id: id.to_ascii_uppercase(), d1, d2, snr_db, sjr_db })
    }

    /// The six standard cases in order.
    pub fn all_standard() -> Vec<ScenarioCase> {
        ["C1", "C2", "C3", "C4", "C5", "C6"]
            .iter()
            .map(|id| ScenarioCase::standard(id).expect("standard case table"))
            .collect()
    }
}
