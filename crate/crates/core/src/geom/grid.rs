use alloc::vec::Vec;

use super::vec::V3;
use super::GeomError;

/// Sampling grid over the cube `[-0.5, 0.5]³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub resolution: usize,
    /// Truncation distance; stored values are clamped to `[-tau, tau]`.
    pub tau: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { resolution: 32, tau: 0.2 }
    }
}

impl GridSpec {
    pub const MIN_RESOLUTION: usize = 8;

    pub fn new(resolution: usize, tau: f64) -> Result<Self, GeomError> {
        let spec = GridSpec { resolution, tau };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), GeomError> {
        if self.resolution < Self::MIN_RESOLUTION {
            return Err(GeomError::InvalidSpec("resolution must be at least 8"));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(GeomError::InvalidSpec("tau must be positive"));
        }
        Ok(())
    }

    pub fn pitch(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn voxel_count(&self) -> usize {
        self.resolution * self.resolution * self.resolution
    }

    /// Linear index, x fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.resolution * (j + self.resolution * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let r = self.resolution;
        (idx % r, (idx / r) % r, idx / (r * r))
    }

    /// Cell-centre position of voxel `(i, j, k)`.
    #[inline]
    pub fn center(&self, i: usize, j: usize, k: usize) -> V3 {
        let h = self.pitch();
        [
            -0.5 + (i as f64 + 0.5) * h,
            -0.5 + (j as f64 + 0.5) * h,
            -0.5 + (k as f64 + 0.5) * h,
        ]
    }
}

/// Voxelized truncated signed-distance field. Negative inside.
#[derive(Clone, Debug, PartialEq)]
pub struct TsdfGrid {
    spec: GridSpec,
    values: Vec<f32>,
}

impl TsdfGrid {
    /// Builds a grid from raw values, clamping each to `[-tau, tau]`.
    pub fn from_values(spec: GridSpec, values: Vec<f32>) -> Result<Self, GeomError> {
        spec.check()?;
        if values.len() != spec.voxel_count() {
            return Err(GeomError::InvalidSpec("value count does not match resolution"));
        }
        let tau = spec.tau as f32;
        let values = values.into_iter().map(|v| v.clamp(-tau, tau)).collect();
        Ok(TsdfGrid { spec, values })
    }

    /// Samples an arbitrary signed-distance function at the cell centres.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(V3) -> f64) -> Result<Self, GeomError> {
        spec.check()?;
        let r = spec.resolution;
        let mut values = Vec::with_capacity(spec.voxel_count());
        for k in 0..r {
            for j in 0..r {
                for i in 0..r {
                    values.push(clamp_store(f(spec.center(i, j, k)), spec.tau));
                }
            }
        }
        Ok(TsdfGrid { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f32 {
        self.values[self.spec.index(i, j, k)]
    }

    #[inline]
    pub fn is_occupied(&self, idx: usize) -> bool {
        self.values[idx] < 0.0
    }

    pub fn occupied_count(&self) -> usize {
        self.values.iter().filter(|v| **v < 0.0).count()
    }

    pub fn occupancy_fraction(&self) -> f64 {
        self.occupied_count() as f64 / self.values.len() as f64
    }

    /// Voxels within `band` of the surface, i.e. `|value| < band`.
    pub fn near_surface(&self, band: f64) -> Vec<bool> {
        self.values.iter().map(|v| f64::from(*v).abs() < band).collect()
    }
}

#[inline]
pub(crate) fn clamp_store(v: f64, tau: f64) -> f32 {
    (v.clamp(-tau, tau)) as f32
}
