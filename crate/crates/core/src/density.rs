use rayon::prelude::*;

use crate::error::Result;
use crate::sphere::UnitVector;

/// Anything that assigns a density value to points of `S^{d-1}`.
pub trait Density: Sync {
    fn dim(&self) -> usize;

    fn density(&self, x: &UnitVector) -> Result<f64>;

    fn density_batch(&self, xs: &[UnitVector]) -> Result<Vec<f64>> {
        xs.par_iter().map(|x| self.density(x)).collect()
    }
}

impl<T: Density + ?Sized> Density for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        (**self).density(x)
    }

    fn density_batch(&self, xs: &[UnitVector]) -> Result<Vec<f64>> {
        (**self).density_batch(xs)
    }
}
