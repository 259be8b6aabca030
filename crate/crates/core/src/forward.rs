//! The exponential growth forward operator and its linear surrogate.
//!
//! `F(x)(t) = exp(∫_0^t x)` is the forward map of the coefficient
//! identification problem y' = x·y, y(0) = 1. The Fréchet derivative is
//! `F'(x)h = F(x)·Jh`, a multiplication after integration, so everything here
//! is built from the cumulative trapezoid kernels. The linear surrogate
//! replaces F by J itself; it is used for closed-form cross-checks.

use crate::error::{Error, Result};
use crate::grid::{cumulative_trapezoid, cumulative_trapezoid_adjoint, Grid, GridFunction};

/// Exponent ceiling before `exp` leaves double precision.
pub const MAX_EXPONENT: f64 = 700.0;

/// Default ball radius for nonlinearity diagnostics.
pub const DEFAULT_BALL_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    ExpGrowth,
    LinearSurrogate,
}

/// Forward operator on a fixed grid: the exponential growth model or its
/// linear surrogate.
#[derive(Debug, Clone, Copy)]
pub struct ForwardOp {
    grid: Grid,
    kind: ModelKind,
}

impl ForwardOp {
    pub fn exp_growth(grid: Grid) -> Self {
        ForwardOp {
            grid,
            kind: ModelKind::ExpGrowth,
        }
    }

    pub fn linear_surrogate(grid: Grid) -> Self {
        ForwardOp {
            grid,
            kind: ModelKind::LinearSurrogate,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn is_linear(&self) -> bool {
        self.kind == ModelKind::LinearSurrogate
    }

    fn check_grid(&self, x: &GridFunction) -> Result<()> {
        if x.grid() != self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.len(),
                got: x.grid().len(),
            });
        }
        Ok(())
    }

    /// `F(x)`. For the growth model the first node is exp(0) = 1 exactly.
    pub fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        self.check_grid(x)?;
        let u = cumulative_trapezoid(x);
        match self.kind {
            ModelKind::LinearSurrogate => Ok(u),
            ModelKind::ExpGrowth => {
                let peak = u.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                if peak > MAX_EXPONENT {
                    return Err(Error::Overflow {
                        max_exponent: peak,
                        limit: MAX_EXPONENT,
                    });
                }
                Ok(u.map(f64::exp))
            }
        }
    }

    /// Pointwise multiplier of the Fréchet derivative at `x`: `F(x)` for the
    /// growth model, 1 for the surrogate.
    pub fn derivative_multiplier(&self, x: &GridFunction) -> Result<GridFunction> {
        match self.kind {
            ModelKind::LinearSurrogate => Ok(GridFunction::constant(self.grid, 1.0)),
            ModelKind::ExpGrowth => self.apply(x),
        }
    }

    /// `F'(x)h = F(x)·Jh`.
    pub fn derivative_apply(&self, x: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
        self.check_grid(h)?;
        let jh = cumulative_trapezoid(h);
        match self.kind {
            ModelKind::LinearSurrogate => Ok(jh),
            ModelKind::ExpGrowth => {
                let m = self.apply(x)?;
                Ok(jh.zip_with(&m, |a, b| a * b))
            }
        }
    }

    /// `F'(x)* g = J*(F(x)·g)`; multiplication by the sampled F(x) is
    /// self-adjoint in the weighted inner product, so the identity
    /// `⟨F'(x)h, g⟩ = ⟨h, F'(x)*g⟩` is exact to rounding.
    pub fn derivative_adjoint(&self, x: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
        self.check_grid(g)?;
        match self.kind {
            ModelKind::LinearSurrogate => Ok(cumulative_trapezoid_adjoint(g)),
            ModelKind::ExpGrowth => {
                let m = self.apply(x)?;
                Ok(cumulative_trapezoid_adjoint(&g.zip_with(&m, |a, b| a * b)))
            }
        }
    }
}

/// Multiplier and chain constants of the nonlinearity condition around `x†`.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearityProfile {
    /// Degree of ill-posedness (1 for this model).
    pub a: f64,
    /// Ball radius, 0 < r < 1.
    pub r: f64,
    /// Lower multiplier bound k₀ = exp(−‖x†‖).
    pub multiplier_lower: f64,
    /// Upper multiplier bound K₀ = exp(‖x†‖).
    pub multiplier_upper: f64,
    /// c_a = k₀/(1+r).
    pub chain_lower: f64,
    /// C_a = K₀/(1−r).
    pub chain_upper: f64,
}

impl NonlinearityProfile {
    pub fn new(x_dag: &GridFunction, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid("r", format!("need 0 < r < 1, got {r}")));
        }
        let norm = x_dag.norm();
        let multiplier_lower = (-norm).exp();
        let multiplier_upper = norm.exp();
        Ok(NonlinearityProfile {
            a: 1.0,
            r,
            multiplier_lower,
            multiplier_upper,
            chain_lower: multiplier_lower / (1.0 + r),
            chain_upper: multiplier_upper / (1.0 - r),
        })
    }
}

/// Tangential-cone diagnostics at a pair (x, x†).
#[derive(Debug, Clone, Copy)]
pub struct TccReport {
    /// ‖F(x) − F(x†) − F'(x†)(x − x†)‖.
    pub taylor_remainder: f64,
    /// ‖x − x†‖·‖F(x) − F(x†)‖, the tangential-cone majorant.
    pub product_bound: f64,
    /// ‖F(x) − F(x†)‖.
    pub image_diff: f64,
    /// c_a·‖x − x†‖₋₁ with ‖·‖₋₁ computed as ‖J(x − x†)‖.
    pub weak_lower: f64,
    /// C_a·‖x − x†‖₋₁.
    pub weak_upper: f64,
}

/// Evaluates the Taylor remainder against the tangential-cone bound and the
/// two-sided weak-norm chain for the growth model.
pub fn tcc_report(
    x: &GridFunction,
    x_dag: &GridFunction,
    profile: &NonlinearityProfile,
) -> Result<TccReport> {
    let op = ForwardOp::exp_growth(x.grid());
    let fx = op.apply(x)?;
    let fdag = op.apply(x_dag)?;
    let diff = x.sub(x_dag);
    let lin = op.derivative_apply(x_dag, &diff)?;
    let remainder = fx.sub(&fdag).sub(&lin).norm();
    let image_diff = fx.distance(&fdag);
    let weak = cumulative_trapezoid(&diff).norm();
    Ok(TccReport {
        taylor_remainder: remainder,
        product_bound: diff.norm() * image_diff,
        image_diff,
        weak_lower: profile.chain_lower * weak,
        weak_upper: profile.chain_upper * weak,
    })
}

/// The ill-posedness witness `x_n(t) = (e^t + nδ·cos(nt)) / (e^t + δ·sin(nt))`
/// around x† ≡ 1: image deviations stay at δ while ‖x_n‖ explodes with n.
pub fn explosion_sequence(grid: Grid, oscillation: usize, delta: f64) -> GridFunction {
    let n = oscillation as f64;
    GridFunction::from_fn(grid, |t| {
        let e = t.exp();
        (e + n * delta * (n * t).cos()) / (e + delta * (n * t).sin())
    })
}
