//! Reusable radial test profiles: smooth random bumps for solver starts and
//! verification batteries.

use std::sync::Arc;

use rand::Rng;

use crate::grid::{RadialFunction, RadialGrid};

/// Gaussian bump centered at `center` with the polynomial window
/// (1 - (r/r_max)²)² enforcing the Dirichlet tail.
pub fn bump(grid: &Arc<RadialGrid>, center: f64, width: f64, amplitude: f64) -> RadialFunction {
    let r_max = grid.r_max();
    let mut values: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&r| {
            let z = (r - center) / width;
            let window = (1.0 - (r / r_max) * (r / r_max)).max(0.0);
            amplitude * (-z * z).exp() * window * window
        })
        .collect();
    *values.last_mut().unwrap() = 0.0;
    RadialFunction::from_values_unchecked(grid.clone(), values)
}

/// Random bump with center in the inner third of the domain. Deterministic
/// under a seeded generator.
pub fn random_bump<R: Rng>(grid: &Arc<RadialGrid>, rng: &mut R) -> RadialFunction {
    let r_max = grid.r_max();
    let center = rng.gen_range(0.0..r_max / 3.0);
    let width = rng.gen_range(0.15..1.5) * r_max.min(3.0) / 3.0;
    let amplitude = rng.gen_range(0.2..2.0);
    bump(grid, center, width, amplitude)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{norms, QuadratureRule};
    use rand::SeedableRng;

    #[test]
    fn bumps_are_dirichlet_and_nontrivial() {
        let grid =
            Arc::new(RadialGrid::uniform(20.0, 501, QuadratureRule::Trapezoid).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let u = random_bump(&grid, &mut rng);
            assert!(u.is_dirichlet());
            assert!(norms(&u).unwrap().h1 > 1e-3);
        }
    }
}
