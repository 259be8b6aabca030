//! Shared helpers for the integration suites: synthetic selection paths,
//! exhaustive balancing-set construction, a diagonal linear model with
//! closed-form index function, and a dense normal-equation oracle. All of it
//! is deliberately independent of the library's own algorithmic paths.
#![allow(dead_code)]

use oversmooth::solver::Reconstruction;
use oversmooth::{Grid, GridFunction, HilbertScale, NoiseAmplification, ParameterGrid, Threshold};
use rand::rngs::StdRng;
use rand::Rng;

/// Wraps bare points into a reconstruction path for the selection rules.
pub fn path_from_points(points: Vec<GridFunction>, alphas: &[f64]) -> Vec<Reconstruction> {
    points
        .into_iter()
        .zip(alphas)
        .map(|(x, &alpha)| Reconstruction {
            x,
            alpha,
            residual_norm: 0.0,
            penalty_norm: 0.0,
            functional_value: 0.0,
            iterations: 0,
            converged: true,
        })
        .collect()
}

pub fn random_unit_direction(grid: Grid, rng: &mut StdRng) -> GridFunction {
    loop {
        let dir = GridFunction::new(
            grid,
            (0..grid.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        )
        .unwrap();
        let norm = dir.norm();
        if norm > 1e-6 {
            return dir.scale(1.0 / norm);
        }
    }
}

/// Completely unconstrained random path on a small grid.
pub fn random_path(rng: &mut StdRng, len: usize, alphas: &[f64]) -> Vec<Reconstruction> {
    let grid = Grid::new(8).unwrap();
    let points = (0..len)
        .map(|_| {
            let amp = 10.0_f64.powf(rng.random_range(-3.0..1.0));
            GridFunction::new(
                grid,
                (0..grid.len())
                    .map(|_| rng.random_range(-amp..amp))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    path_from_points(points, alphas)
}

/// Path satisfying the two-term error bound: `x_k = x† + ρ_k·e_k` with
/// `ρ_k ≤ φ(α_k) + δ/λ(α_k)`.
pub fn bounded_error_path(
    rng: &mut StdRng,
    alphas: &[f64],
    phi: impl Fn(f64) -> f64,
    delta: f64,
    na: &NoiseAmplification,
) -> (Vec<Reconstruction>, GridFunction) {
    let grid = Grid::new(8).unwrap();
    let x_dag = GridFunction::new(
        grid,
        (0..grid.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
    .unwrap();
    let points = alphas
        .iter()
        .map(|&alpha| {
            let budget = phi(alpha) + delta / na.lambda(alpha);
            let rho = rng.random_range(0.0..1.0) * budget;
            let dir = random_unit_direction(grid, rng);
            x_dag.axpy(rho, &dir)
        })
        .collect();
    (path_from_points(points, alphas), x_dag)
}

/// Exhaustive construction of the three balancing sets. Returns
/// (consecutive, pairwise-to-candidate, all-pairs-below) as index sets.
pub fn brute_force_sets(
    path: &[Reconstruction],
    threshold: &Threshold,
    delta: f64,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let len = path.len();
    let mut dist = vec![vec![0.0; len]; len];
    for i in 0..len {
        for j in 0..len {
            dist[i][j] = path[i].x.distance(&path[j].x);
        }
    }
    let thr = |i: usize| threshold.rhs(delta, path[i].alpha);
    let consecutive: Vec<usize> = (0..len)
        .filter(|&k| (1..=k).all(|j| dist[j - 1][j] <= thr(j - 1)))
        .collect();
    let pairwise: Vec<usize> = (0..len)
        .filter(|&k| (0..k).all(|j| dist[j][k] <= thr(j)))
        .collect();
    let all_pairs: Vec<usize> = (0..len)
        .filter(|&k| (0..=k).all(|j| (0..j).all(|i| dist[i][j] <= thr(i))))
        .collect();
    (consecutive, pairwise, all_pairs)
}

/// Classical Tikhonov regularization of the diagonalized problem
/// `σ_k x_k = y_k` in the cosine basis with the spectral X₁ penalty. Bias and
/// noise admit closed-form envelopes, so the index function φ is known
/// exactly: the route the quasi-optimality guarantees are verified against.
pub struct DiagonalModel {
    pub scale: HilbertScale,
    pub p: f64,
    /// Source representer w (unit norm).
    pub w: Vec<f64>,
    /// x† coefficients b_k^{-p}·w_k.
    pub x_dag_coeffs: Vec<f64>,
    /// Multiplier of the closed-form index function φ(α) = phi_c·α^{p/4}.
    pub phi_c: f64,
}

impl DiagonalModel {
    pub fn new(n: usize, rank: usize, p: f64, rng: &mut StdRng) -> Self {
        let scale = HilbertScale::new(Grid::new(n).unwrap(), 1.0, rank).unwrap();
        let mut w: Vec<f64> = (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in w.iter_mut() {
            *v /= norm;
        }
        let x_dag_coeffs: Vec<f64> = w
            .iter()
            .enumerate()
            .map(|(k, wk)| scale.b(k + 1).powf(-p) * wk)
            .collect();
        // C_p = sup_u u^{4-p}/(1+u^4), evaluated on a dense log grid; the
        // supremum over the continuum dominates every discrete b_k.
        let mut c_p = 0.0_f64;
        let mut u: f64 = 1e-4;
        while u < 1e4 {
            c_p = c_p.max(u.powf(4.0 - p) / (1.0 + u.powi(4)));
            u *= 1.001;
        }
        DiagonalModel {
            scale,
            p,
            w,
            x_dag_coeffs,
            phi_c: c_p, // ‖w‖ = 1
        }
    }

    pub fn x_dag(&self) -> GridFunction {
        self.scale.synthesize(&self.x_dag_coeffs).unwrap()
    }

    /// φ(α) = C_p·‖w‖·α^{p/4}.
    pub fn phi(&self) -> impl Fn(f64) -> f64 + '_ {
        let c = self.phi_c;
        let e = self.p / 4.0;
        move |alpha: f64| c * alpha.powf(e)
    }

    /// Path of closed-form Tikhonov minimizers
    /// x_k(α) = σ_k(σ_k x†_k + δ ξ_k)/(σ_k² + α b_k²) with ‖ξ‖ = 1.
    pub fn noisy_path(
        &self,
        delta: f64,
        rng: &mut StdRng,
        grid: &ParameterGrid,
    ) -> Vec<Reconstruction> {
        let rank = self.x_dag_coeffs.len();
        let mut xi: Vec<f64> = (0..rank).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in xi.iter_mut() {
            *v /= norm;
        }
        let alphas = grid.alphas();
        let points: Vec<GridFunction> = alphas
            .iter()
            .map(|&alpha| {
                let coeffs: Vec<f64> = (0..rank)
                    .map(|k| {
                        let sigma = self.scale.sigma(k + 1);
                        let b = self.scale.b(k + 1);
                        let data = sigma * self.x_dag_coeffs[k] + delta * xi[k];
                        sigma * data / (sigma * sigma + alpha * b * b)
                    })
                    .collect();
                self.scale.synthesize(&coeffs).unwrap()
            })
            .collect();
        path_from_points(points, &alphas)
    }

    /// Verifies the two-term bound ‖x(α) − x†‖ ≤ φ(α) + δ/λ(α) (λ with κ=1)
    /// pointwise over a path; the generator satisfies it by construction, and
    /// the suites assert rather than assume it.
    pub fn error_bound_holds(&self, path: &[Reconstruction], delta: f64) -> bool {
        let x_dag = self.x_dag();
        let phi = self.phi();
        path.iter().all(|rec| {
            let err = rec.x.distance(&x_dag);
            err <= phi(rec.alpha) + delta / rec.alpha.powf(0.25) + 1e-12
        })
    }
}

/// Dense normal-equation oracle for the linear surrogate, assembled
/// entry-by-entry from the trapezoid definitions and solved by Cholesky.
pub mod dense {
    use oversmooth::Grid;

    pub fn solve_linear_tikhonov(grid: &Grid, y: &[f64], x_bar: &[f64], alpha: f64) -> Vec<f64> {
        let n = grid.intervals();
        let h = grid.spacing();
        let len = n + 1;
        let mut a = vec![vec![0.0; len]; len];
        for (i, row) in a.iter_mut().enumerate().skip(1) {
            row[0] = 0.5 * h;
            row[1..i].fill(h);
            row[i] = 0.5 * h;
        }
        let w: Vec<f64> = (0..len).map(|i| grid.weight(i)).collect();
        let free = n;
        let mut m = vec![vec![0.0; free]; free];
        let mut rhs = vec![0.0; free];
        for j in 0..free {
            for k in j..free {
                let mut s = 0.0;
                for i in 0..len {
                    s += a[i][j] * w[i] * a[i][k];
                }
                m[j][k] = s;
                m[k][j] = s;
            }
            rhs[j] = (0..len).map(|i| a[i][j] * w[i] * y[i]).sum();
        }
        for j in 0..free {
            m[j][j] += alpha * (w[j] + if j == 0 { 1.0 } else { 2.0 } / h);
            if j + 1 < free {
                m[j][j + 1] -= alpha / h;
                m[j + 1][j] -= alpha / h;
            }
            let t_row = if j == 0 {
                x_bar[0] - x_bar[1]
            } else {
                2.0 * x_bar[j] - x_bar[j - 1] - x_bar[j + 1]
            };
            rhs[j] += alpha * (w[j] * x_bar[j] + t_row / h);
        }
        let mut x = cholesky_solve(&mut m, &rhs);
        x.push(0.0);
        x
    }

    #[allow(clippy::needless_range_loop)]
    fn cholesky_solve(m: &mut [Vec<f64>], rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        for i in 0..n {
            for j in 0..=i {
                let mut s = m[i][j];
                for k in 0..j {
                    s -= m[i][k] * m[j][k];
                }
                if i == j {
                    m[i][i] = s.sqrt();
                } else {
                    m[i][j] = s / m[j][j];
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = rhs[i];
            for k in 0..i {
                s -= m[i][k] * y[k];
            }
            y[i] = s / m[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= m[k][i] * x[k];
            }
            x[i] = s / m[i][i];
        }
        x
    }
}
