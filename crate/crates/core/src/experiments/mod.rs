//! Reproductions of the perturbation heatmaps and the perturbed GENP solve
//! experiment, plus the interior-entry scan built on leading submatrices.

mod heatmap;
mod solve;
mod submatrix;

pub use heatmap::{gnuplot_script, heatmap_scan, heatmap_scan_in, HeatmapGrid};
pub use solve::{
    solve_experiment, write_records, PerturbMode, SolveConfig, SolveTrialRecord, CSV_HEADER,
    DEFAULT_N_LIST, PERTURBATION_SCALE,
};
pub use submatrix::{submatrix_pivot_scan, SubmatrixPivot};
