//! Closed-form oracles and the secondary experiments built on the runner:
//! false-positive-rate validation, the cover-regime map and the sensitivity
//! curves of the two adaptive policies. Experiments emit plain tables.

mod fpr;
mod oracles;
mod regime;
mod sensitivity;

pub use fpr::{fpr_experiment, FprReport, FprRow};
pub use oracles::{
    cherry_pick_expected_gap, cover_regime, expected_max_standard_normal, expected_min_audited_round,
    fwer_bound, CoverRegime,
};
pub use regime::{regime_map, RegimeCell, DEFAULT_DELTA_GRID, DEFAULT_N_MIN_GRID};
pub use sensitivity::{sensitivity_curves, SensitivityPoint};

use serde::Serialize;

use crate::error::{Error, Result};

/// Renders rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialize(e.to_string()))
}

pub use crate::runner::write_output;
