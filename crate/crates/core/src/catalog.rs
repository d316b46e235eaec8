//! Built-in example problems.

use std::sync::Arc;

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::setfn::{SetFunction, VarSpace};

/// `f(x) = {(x, 1/x)} ⊕ R²₊` for `x > 0`, `∅` otherwise, on `[lower, upper]`.
pub fn hyperbola(lower: f64, upper: f64) -> Result<SetFunction> {
    hyperbola_on(VarSpace::new_box(vec![lower], vec![upper])?)
}

/// The hyperbola objective on an arbitrary one-dimensional space.
pub fn hyperbola_on(space: VarSpace) -> Result<SetFunction> {
    check_dim(&space, 1)?;
    SetFunction::inf_extension(space, Arc::new(Cone::orthant(2)?), |x| (x[0] > 0.0).then(|| vec![x[0], 1.0 / x[0]]))
}

/// `f(x) = {x} ⊕ R²₊` on the feasible set `x ∈ R²₊, x₁ + x₂ ≥ 1`, sampled on
/// the grid `{0, step, …, extent}²` (first coordinate outermost).
pub fn linear_vop(step: f64, extent: f64) -> Result<SetFunction> {
    let count = (extent / step).round() as usize;
    let mut points: Vec<Point> = Vec::with_capacity((count + 1) * (count + 1));
    for i in 0..=count {
        for j in 0..=count {
            points.push(vec![i as f64 * step, j as f64 * step]);
        }
    }
    linear_vop_on(VarSpace::new_grid(points)?)
}

/// The linear objective on an arbitrary two-dimensional space.
pub fn linear_vop_on(space: VarSpace) -> Result<SetFunction> {
    check_dim(&space, 2)?;
    SetFunction::inf_extension(space, Arc::new(Cone::orthant(2)?), |x| {
        let feasible = x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] >= 1.0 - 1e-12;
        feasible.then(|| x.to_vec())
    })
}

/// `f(x) = {(x - center)² + offset} ⊕ R₊` on `[lower, upper]`.
pub fn scalar_identity(center: f64, offset: f64, lower: f64, upper: f64) -> Result<SetFunction> {
    scalar_identity_on(center, offset, VarSpace::new_box(vec![lower], vec![upper])?)
}

pub fn scalar_identity_on(center: f64, offset: f64, space: VarSpace) -> Result<SetFunction> {
    check_dim(&space, 1)?;
    SetFunction::inf_extension(space, Arc::new(Cone::orthant(1)?), move |x| {
        Some(vec![(x[0] - center).powi(2) + offset])
    })
}

fn check_dim(space: &VarSpace, dim: usize) -> Result<()> {
    if space.dim() != dim {
        return Err(Error::InvalidDimension(format!("expected a {dim}-dimensional space, got {}", space.dim())));
    }
    Ok(())
}
