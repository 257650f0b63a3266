//! Distances between a simulation and its ground truth.
//!
//! Density distances are volume-weighted norms over the cells where both
//! fields are non-zero; feature distances are plain vector norms in Fourier
//! coefficient space.

mod fourier;

pub use fourier::{fourier_decompose, fourier_reconstruct};

use crate::grid::{CylGrid, DensityField, FeatureSet};
pub use crate::model::NormKind;
use crate::scalar::{CompensatedSum, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistanceError {
    #[error("grids differ: {left} vs {right}")]
    GridMismatch { left: String, right: String },
    #[error("the two densities share no non-zero cell")]
    EmptyOverlap,
    #[error("coefficient vectors differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("weight {name} = {value} outside [0, 1]")]
    WeightOutOfRange { name: &'static str, value: f64 },
    #[error("delta {name} = {value} must be finite and non-negative")]
    InvalidDelta { name: &'static str, value: f64 },
    #[error("{n_theta} samples cannot resolve {n_modes} coefficients (need at least {})", 2 * n_modes)]
    TooFewSamples { n_theta: usize, n_modes: usize },
}

/// Cells where both compared densities are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMask<S> {
    pub grid: CylGrid<S>,
    pub mask: Vec<bool>,
}

impl<S: Scalar> SupportMask<S> {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }
}

fn check_grids<S: Scalar>(a: &CylGrid<S>, b: &CylGrid<S>) -> Result<(), DistanceError> {
    if a != b {
        return Err(DistanceError::GridMismatch {
            left: format!("{}x{} @ ({}, {})", a.n_r, a.n_z, a.d_r, a.d_z),
            right: format!("{}x{} @ ({}, {})", b.n_r, b.n_z, b.d_r, b.d_z),
        });
    }
    Ok(())
}

pub fn support_domain<S: Scalar>(gt: &DensityField<S>, sim: &DensityField<S>) -> Result<SupportMask<S>, DistanceError> {
    check_grids(&gt.grid, &sim.grid)?;
    let mask = gt
        .values
        .iter()
        .zip(&sim.values)
        .map(|(&a, &b)| a > S::zero() && b > S::zero())
        .collect();
    Ok(SupportMask { grid: gt.grid, mask })
}

/// Volume of the revolved support, `2π·ΔR·Δz·Σ R_j` over masked cells.
pub fn support_volume<S: Scalar>(mask: &SupportMask<S>) -> S {
    let g = &mask.grid;
    let radii: CompensatedSum<S> = g.cells().filter(|(i, _, _)| mask.mask[*i]).map(|(_, r, _)| r).collect();
    S::TAU() * g.d_r * g.d_z * radii.total()
}

/// Volume-weighted distance between two densities over their shared
/// support.
///
/// Each cell carries weight `2π·ΔR·Δz·R_j / V⁺`; the weights sum to one, so
/// L1 and L2 are weighted means and L∞ is the plain maximum.
pub fn density_distance<S: Scalar>(
    gt: &DensityField<S>,
    sim: &DensityField<S>,
    norm: NormKind,
) -> Result<S, DistanceError> {
    check_grids(&gt.grid, &sim.grid)?;
    let grid = &gt.grid;
    let mut weight = CompensatedSum::new();
    let mut weighted = CompensatedSum::new();
    let mut max = S::zero();
    let mut any = false;
    for (i, r, _) in grid.cells() {
        let (a, b) = (gt.values[i], sim.values[i]);
        if !(a > S::zero() && b > S::zero()) {
            continue;
        }
        any = true;
        let diff = (a - b).abs();
        match norm {
            NormKind::L1 => weighted.add(diff * r),
            NormKind::L2 => weighted.add(diff * diff * r),
            NormKind::Linf => max = max.max(diff),
        }
        weight.add(r);
    }
    if !any {
        return Err(DistanceError::EmptyOverlap);
    }
    // 2π·ΔR·Δz cancels between the sum and V⁺.
    Ok(match norm {
        NormKind::L1 => weighted.total() / weight.total(),
        NormKind::L2 => (weighted.total() / weight.total()).sqrt(),
        NormKind::Linf => max,
    })
}

/// p-norm of the coefficient-wise difference of two vectors.
pub fn coefficient_distance<S: Scalar>(a: &[S], b: &[S], norm: NormKind) -> Result<S, DistanceError> {
    if a.len() != b.len() {
        return Err(DistanceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let diffs = a.iter().zip(b).map(|(&x, &y)| (x - y).abs());
    Ok(match norm {
        NormKind::L1 => diffs.collect::<CompensatedSum<S>>().total(),
        NormKind::L2 => diffs.map(|d| d * d).collect::<CompensatedSum<S>>().total().sqrt(),
        NormKind::Linf => diffs.fold(S::zero(), S::max),
    })
}

/// `(δshock, δedge)` between two feature sets, shock and edge compared
/// separately.
pub fn feature_distance<S: Scalar>(
    gt: &FeatureSet<S>,
    sim: &FeatureSet<S>,
    norm: NormKind,
) -> Result<(S, S), DistanceError> {
    Ok((
        coefficient_distance(&gt.shock, &sim.shock, norm)?,
        coefficient_distance(&gt.edge, &sim.edge, norm)?,
    ))
}

/// Scatter-plot abscissa: `w_shock·δshock + w_edge·δedge`.
pub fn combined_feature_distance<S: Scalar>(
    delta_shock: S,
    delta_edge: S,
    w_shock: S,
    w_edge: S,
) -> Result<S, DistanceError> {
    for (name, w) in [("w_shock", w_shock), ("w_edge", w_edge)] {
        if !(w >= S::zero() && w <= S::one()) {
            return Err(DistanceError::WeightOutOfRange {
                name,
                value: w.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    for (name, d) in [("delta_shock", delta_shock), ("delta_edge", delta_edge)] {
        if !(d.is_finite() && d >= S::zero()) {
            return Err(DistanceError::InvalidDelta {
                name,
                value: d.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(w_shock * delta_shock + w_edge * delta_edge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_cell(values: [f64; 2]) -> DensityField<f64> {
        DensityField::new(CylGrid::new(2, 1, 1.0, 1.0).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn worked_two_cell_example() {
        let gt = two_cell([1.0, 1.0]);
        let sim = two_cell([2.0, 3.0]);
        // Weights 0.5/2 and 1.5/2: D1 = 0.25 + 1.5, D2² = 0.25 + 3.0, Dinf = 2.
        assert_relative_eq!(
            density_distance(&gt, &sim, NormKind::L1).unwrap(),
            1.75,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            density_distance(&gt, &sim, NormKind::L2).unwrap(),
            3.25f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(density_distance(&gt, &sim, NormKind::Linf).unwrap(), 2.0);
    }

    #[test]
    fn support_volume_of_two_cells() {
        let f = two_cell([1.0, 1.0]);
        let mask = support_domain(&f, &f).unwrap();
        assert_relative_eq!(support_volume(&mask), 4.0 * std::f64::consts::PI, max_relative = 1e-15);

        let empty = support_domain(&two_cell([0.0, 0.0]), &f).unwrap();
        assert!(empty.is_empty());
        assert_eq!(support_volume(&empty), 0.0);
    }

    #[test]
    fn support_volume_is_linear_in_radial_spacing() {
        let g1 = CylGrid::new(4, 3, 0.1f64, 0.2).unwrap();
        let g2 = CylGrid::new(4, 3, 0.2f64, 0.2).unwrap();
        let v1 = support_volume(&SupportMask {
            grid: g1,
            mask: vec![true; 12],
        });
        let v2 = support_volume(&SupportMask {
            grid: g2,
            mask: vec![true; 12],
        });
        // R_j also doubles, so the volume scales with d_r².
        assert_relative_eq!(v2, 4.0 * v1, max_relative = 1e-14);
        let g3 = CylGrid::new(4, 3, 0.1f64, 0.4).unwrap();
        let v3 = support_volume(&SupportMask {
            grid: g3,
            mask: vec![true; 12],
        });
        assert_relative_eq!(v3, 2.0 * v1, max_relative = 1e-14);
    }

    #[test]
    fn disjoint_supports_have_empty_overlap() {
        let g = CylGrid::new(2, 2, 1.0f64, 1.0).unwrap();
        let left = DensityField::new(g, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let right = DensityField::new(g, vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        assert!(support_domain(&left, &right).unwrap().is_empty());
        for n in NormKind::ALL {
            assert_eq!(density_distance(&left, &right, n), Err(DistanceError::EmptyOverlap));
        }
    }

    #[test]
    fn constant_offset_gives_offset() {
        let g = CylGrid::new(5, 7, 0.3f64, 0.1).unwrap();
        let gt = DensityField::new(g, (0..35).map(|i| 1.0 + i as f64 * 0.01).collect()).unwrap();
        let sim = DensityField::new(g, gt.values.iter().map(|v| v + 0.5).collect()).unwrap();
        for n in NormKind::ALL {
            assert_relative_eq!(density_distance(&gt, &sim, n).unwrap(), 0.5, max_relative = 1e-12);
            assert_eq!(density_distance(&gt, &gt, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn grid_mismatch() {
        let a = two_cell([1.0, 1.0]);
        let b = DensityField::new(CylGrid::new(1, 2, 1.0, 1.0).unwrap(), vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            density_distance(&a, &b, NormKind::L1),
            Err(DistanceError::GridMismatch { .. })
        ));
        assert!(support_domain(&a, &b).is_err());
    }

    #[test]
    fn feature_distances() {
        let a = FeatureSet {
            shock: vec![1.0f64, 0.0],
            edge: vec![2.0, 2.0],
        };
        let b = FeatureSet {
            shock: vec![0.0f64, 1.0],
            edge: vec![2.0, 2.0],
        };
        assert_eq!(feature_distance(&a, &a, NormKind::L2).unwrap(), (0.0, 0.0));
        let (ds, de) = feature_distance(&a, &b, NormKind::L2).unwrap();
        assert_relative_eq!(ds, 2f64.sqrt());
        assert_eq!(de, 0.0);
        assert_eq!(feature_distance(&a, &b, NormKind::L1).unwrap().0, 2.0);
        assert_eq!(feature_distance(&a, &b, NormKind::Linf).unwrap().0, 1.0);
        let c = FeatureSet {
            shock: vec![0.0f64],
            edge: vec![0.0],
        };
        assert_eq!(
            feature_distance(&a, &c, NormKind::L2),
            Err(DistanceError::LengthMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn combined_distance() {
        assert_relative_eq!(combined_feature_distance(0.2, 0.1, 1.0, 1.0).unwrap(), 0.3);
        assert_eq!(combined_feature_distance(0.2, 0.1, 1.0, 0.0).unwrap(), 0.2);
        assert!(matches!(
            combined_feature_distance(0.2, 0.1, -0.1, 1.0),
            Err(DistanceError::WeightOutOfRange { name: "w_shock", .. })
        ));
        assert!(combined_feature_distance(-0.2, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let g = CylGrid::new(2, 1, 1.0f32, 1.0).unwrap();
        let gt = DensityField::new(g, vec![1.0, 1.0]).unwrap();
        let sim = DensityField::new(g, vec![2.0, 3.0]).unwrap();
        assert_relative_eq!(density_distance(&gt, &sim, NormKind::L1).unwrap(), 1.75f32);
    }
}
