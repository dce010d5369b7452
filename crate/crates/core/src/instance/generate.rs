use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TripInstance;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::num::{rat, Rational};

/// Seeded random instance. Costs are `cost_scale * k / 1000` for integer `k`
/// uniform in `[-1000, 1000]`, so they stay exact rationals; previous
/// controls are uniform in Ξ.
pub fn gen_random(
    seed: u64,
    n_rows: usize,
    n_cols: usize,
    xi_lo: i64,
    xi_hi: i64,
    delta_cap: i64,
    cost_scale: Rational,
) -> Result<TripInstance> {
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::InvalidInstance(format!(
            "invalid dimensions {n_rows}x{n_cols}"
        )));
    }
    if xi_lo > xi_hi {
        return Err(Error::InvalidInstance(format!(
            "empty value range {xi_lo}..={xi_hi}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = n_rows * n_cols;
    let cost: Vec<Rational> = (0..cells)
        .map(|_| cost_scale * Rational::new(rng.gen_range(-1000..=1000), 1000))
        .collect();
    let prev: Vec<i64> = (0..cells).map(|_| rng.gen_range(xi_lo..=xi_hi)).collect();
    TripInstance::new(
        rat(1),
        rat(delta_cap),
        xi_lo,
        xi_hi,
        Grid::from_vec(n_rows, n_cols, cost)?,
        Grid::from_vec(n_rows, n_cols, prev)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{read_instance, write_instance};

    #[test]
    fn deterministic_and_in_range() {
        let a = gen_random(7, 4, 5, 0, 2, 3, rat(2)).unwrap();
        let b = gen_random(7, 4, 5, 0, 2, 3, rat(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random(8, 4, 5, 0, 2, 3, rat(2)).unwrap());
        assert!(a.cost().iter().all(|c| *c >= rat(-2) && *c <= rat(2)));
        assert_eq!(read_instance(&write_instance(&a)).unwrap(), a);
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(gen_random(1, 0, 3, 0, 1, 1, rat(1)).is_err());
    }
}
