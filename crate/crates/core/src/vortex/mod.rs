//! Vortex curves: zero sets of complex fields on grids, their components,
//! separations, and topology changes over time.
//!
//! Extraction splits each grid cube into six tetrahedra, marks triangle faces
//! whose linear interpolant vanishes, joins the two marked faces of each
//! tetrahedron, and polishes every vertex with Newton steps on the trilinear
//! interpolant.

mod events;
mod extract;
mod geometry;
mod io;

pub use events::{
    component_timeline, detect_events, fit_power_law, link_components, separation_series,
    EventConfig, EventKind, Linking, PowerFit, ReconnectionEvent, TimelineRow,
};
pub use extract::{
    component_distance, extract_zero_set, zero_cell_indicator, Component, ExtractConfig,
    Polyline, VortexCurveSet, Window,
};
pub use geometry::{polyline_distance, segment_distance};
pub use io::{write_curves_csv, write_events_json, write_separation_csv, write_timeline_csv};

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::ComplexField;

#[derive(Debug, Error)]
pub enum VortexError {
    #[error("component {index} does not exist ({count} components)")]
    MissingComponent { index: usize, count: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Extracts every snapshot concurrently.
pub fn extract_all(fields: &[ComplexField], cfg: &ExtractConfig) -> Vec<VortexCurveSet> {
    fields.par_iter().map(|u| extract_zero_set(u, cfg)).collect()
}
