//! Zero-crossing points between neighbouring voxel centres.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::TsdfGrid;
use super::vec::V3;
use super::GeomError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSet {
    pub points: Vec<V3>,
}

impl PointSet {
    pub fn new(points: Vec<V3>) -> Self {
        PointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// One point per sign-changing voxel face, interpolated linearly between the
/// two cell centres. When more than `max_points` crossings exist a seeded
/// uniform subsample is kept, in grid order.
pub fn surface_points(grid: &TsdfGrid, max_points: usize, seed: u64) -> Result<PointSet, GeomError> {
    let spec = grid.spec();
    let r = spec.resolution;
    let mut pts = Vec::new();
    for k in 0..r {
        for j in 0..r {
            for i in 0..r {
                let v = f64::from(grid.get(i, j, k));
                let c = spec.center(i, j, k);
                for axis in 0..3 {
                    let (ni, nj, nk) = match axis {
                        0 => (i + 1, j, k),
                        1 => (i, j + 1, k),
                        _ => (i, j, k + 1),
                    };
                    if ni >= r || nj >= r || nk >= r {
                        continue;
                    }
                    let w = f64::from(grid.get(ni, nj, nk));
                    if (v < 0.0) == (w < 0.0) {
                        continue;
                    }
                    let t = if v != w { v / (v - w) } else { 0.5 };
                    let mut p = c;
                    p[axis] += t * spec.pitch();
                    pts.push(p);
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(GeomError::EmptySurface);
    }
    if pts.len() > max_points {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep = rand::seq::index::sample(&mut rng, pts.len(), max_points).into_vec();
        keep.sort_unstable();
        pts = keep.into_iter().map(|i| pts[i]).collect();
    }
    Ok(PointSet::new(pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GridSpec;
    use crate::math::sqrt;

    #[test]
    fn no_sign_change() {
        let g = TsdfGrid::from_fn(GridSpec::default(), |_| 0.1).unwrap();
        assert_eq!(surface_points(&g, 100, 0), Err(GeomError::EmptySurface));
    }

    #[test]
    fn sphere_points_near_radius() {
        let spec = GridSpec::default();
        let radius = 0.3;
        let g = TsdfGrid::from_fn(spec, |p| sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - radius).unwrap();
        let pts = surface_points(&g, usize::MAX, 0).unwrap();
        assert!(pts.len() > 1000);
        for p in &pts.points {
            let d = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
            assert!((d - radius).abs() <= spec.pitch(), "{d}");
        }
        let few = surface_points(&g, 500, 9).unwrap();
        assert_eq!(few.len(), 500);
        assert_eq!(few, surface_points(&g, 500, 9).unwrap());
    }
}
