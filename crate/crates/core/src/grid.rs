//! Uniform 1D/2D grids for the quadrature-based estimators.

use crate::error::{Error, Result};
use crate::measure::SmoothedMeasure;

/// Uniform discretization of `[-L, L]^dim` with `n` nodes per axis.
///
/// 2D nodes are row-major: node `(ix, iy)` has flat index `ix * n + iy` and
/// coordinates `(-L + ix·h, -L + iy·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dimension: usize,
    half_width: f64,
    nodes_per_axis: usize,
}

impl GridDomain {
    pub fn new(dimension: usize, half_width: f64, nodes_per_axis: usize) -> Result<Self> {
        if dimension != 1 && dimension != 2 {
            return Err(Error::invalid(format!(
                "grid dimension must be 1 or 2, got {dimension}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::invalid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if nodes_per_axis < 16 {
            return Err(Error::invalid(format!(
                "need at least 16 nodes per axis, got {nodes_per_axis}"
            )));
        }
        Ok(GridDomain {
            dimension,
            half_width,
            nodes_per_axis,
        })
    }

    /// Default sizing for a measure: `L = R + 6δ` (tail mass beyond `6δ` is
    /// below `1e-8`), 2001 nodes in 1D and 201 per axis in 2D.
    pub fn default_for(sm: &SmoothedMeasure) -> Result<Self> {
        let l = sm.radius() + 6.0 * sm.delta();
        match sm.dimension() {
            1 => Self::new(1, l, 2001),
            2 => Self::new(2, l, 201),
            d => Err(Error::invalid(format!(
                "grid estimators support d <= 2, measure has d = {d}"
            ))),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.nodes_per_axis - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        match self.dimension {
            1 => self.nodes_per_axis,
            _ => self.nodes_per_axis * self.nodes_per_axis,
        }
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Coordinates of the node with flat index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        match self.dimension {
            1 => vec![self.axis_coord(idx)],
            _ => {
                let n = self.nodes_per_axis;
                vec![self.axis_coord(idx / n), self.axis_coord(idx % n)]
            }
        }
    }

    /// Whether the grid box contains `B(0, r)`.
    pub fn covers(&self, r: f64) -> bool {
        self.half_width >= r - 1e-12
    }

    /// Refuses measures whose `R + 6δ` ball sticks out of the grid.
    pub fn check_covers(&self, sm: &SmoothedMeasure) -> Result<()> {
        let needed = sm.radius() + 6.0 * sm.delta();
        if !self.covers(needed) {
            return Err(Error::invalid(format!(
                "grid half-width {} too small: needs at least R + 6δ = {} \
                 (rebuild with GridDomain::new({}, {:.3}, n) or default_for)",
                self.half_width,
                needed,
                self.dimension,
                needed
            )));
        }
        if sm.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: sm.dimension(),
            });
        }
        Ok(())
    }

    /// Density-proportional node weights, normalized to sum 1, plus the raw
    /// (unnormalized) mass `Σ p(zᵢ) h^d` — close to 1 when the grid covers
    /// the measure.
    pub fn density_weights(&self, sm: &SmoothedMeasure) -> Result<(Vec<f64>, f64)> {
        self.check_covers(sm)?;
        let hd = self.spacing().powi(self.dimension as i32);
        let mut w = Vec::with_capacity(self.node_count());
        for idx in 0..self.node_count() {
            w.push(sm.density(&self.node(idx))? * hd);
        }
        let raw: f64 = w.iter().sum();
        if !(raw > 0.0) {
            return Err(Error::solver("grid carries no density mass"));
        }
        w.iter_mut().for_each(|x| *x /= raw);
        Ok((w, raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::BallMeasure;
    use approx::assert_abs_diff_eq;

    #[test]
    fn construction_guards() {
        assert!(GridDomain::new(3, 1.0, 64).is_err());
        assert!(GridDomain::new(1, 0.0, 64).is_err());
        assert!(GridDomain::new(1, 1.0, 8).is_err());
        let g = GridDomain::new(2, 2.0, 21).unwrap();
        assert_eq!(g.node_count(), 441);
        assert_abs_diff_eq!(g.spacing(), 0.2, epsilon = 1e-15);
        assert_eq!(g.node(0), vec![-2.0, -2.0]);
        assert_eq!(g.node(21 * 20 + 10), vec![2.0, 0.0]);
    }

    #[test]
    fn default_covers_and_weights_normalize() {
        let sm = SmoothedMeasure::new(
            BallMeasure::uniform(vec![vec![-1.0], vec![1.0]]).unwrap(),
            0.5,
        )
        .unwrap();
        let g = GridDomain::default_for(&sm).unwrap();
        assert!(g.covers(sm.radius() + 6.0 * sm.delta()));
        let (w, raw) = g.density_weights(&sm).unwrap();
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(raw, 1.0, epsilon = 1e-6);

        let small = GridDomain::new(1, 1.0, 64).unwrap();
        assert!(small.density_weights(&sm).is_err());
    }
}
