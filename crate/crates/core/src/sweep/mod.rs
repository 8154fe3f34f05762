//! Parameter sweeps and the tables they produce.

pub mod contour;
pub mod extrema;
pub mod grid;
pub mod observable;
pub mod sigma_x;
pub mod table;

pub use contour::{boundary_curves, boundary_curves_of, BoundaryCurve};
pub use extrema::{extrema_report, extrema_vs_theta_i, ExtremaReport};
pub use grid::{grid_point, state_grid_sweep, GridSpec, GRID_FIELDS};
pub use observable::{locate_degeneracy, observable_sweep, windows, ObservableScenario, OBSERVABLE_FIELDS};
pub use sigma_x::{sx_branches, sx_markers, sx_parametric};
pub use table::{linspace, Axis, Range, SweepTable, GAP_NEAR_ORTHOGONAL, GAP_NONE, GAP_OTHER};
