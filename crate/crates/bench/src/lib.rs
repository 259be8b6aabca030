//! Benchmark fixtures shared by the criterion targets.

use oversmooth::solver::Reconstruction;
use oversmooth::{Grid, GridFunction};

/// Synthetic reconstruction path with prescribed per-point offsets; cheap to
/// build and heavy enough to exercise the pairwise selection scans.
pub fn synthetic_path(n: usize, points: usize) -> Vec<Reconstruction> {
    let grid = Grid::new(n).expect("valid grid");
    (0..points)
        .map(|k| {
            let alpha = 1e-10 * 1.3_f64.powi(k as i32);
            let t_shift = k as f64 / points as f64;
            let x = GridFunction::from_fn(grid, |t| (6.0 * (t + t_shift)).sin() / (1.0 + k as f64));
            Reconstruction {
                x,
                alpha,
                residual_norm: 0.01 * (1.0 + k as f64),
                penalty_norm: 1.0 / (1.0 + k as f64),
                functional_value: 0.0,
                iterations: 0,
                converged: true,
            }
        })
        .collect()
}
