//! Seeded point sampling inside a coordinate box, rejecting points where the
//! metric degenerates.  Every "at generic points" statement in the library is
//! operationalized as a check at points drawn here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::MetricSpec;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 20;

/// Draw a point uniformly from the box.
pub fn point_in_box<R: Rng>(rng: &mut R, sample_box: &[(f64, f64)]) -> Vec<f64> {
    sample_box.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()
}

/// Draw `count` points where `m` is nondegenerate.
pub fn sample_points(m: &MetricSpec, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let max_attempts = 200 * count.max(1);
    while out.len() < count {
        if attempts >= max_attempts {
            return Err(Error::SamplingFailed { attempts });
        }
        attempts += 1;
        let p = point_in_box(&mut rng, &m.sample_box);
        if m.is_nondegenerate_at(&p).unwrap_or(false) {
            out.push(p);
        }
    }
    Ok(out)
}

/// One nondegenerate point (the first sample).
pub fn base_point(m: &MetricSpec, seed: u64) -> Result<Vec<f64>> {
    Ok(sample_points(m, seed, 1)?.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricSpec;

    #[test]
    fn deterministic_and_in_box() {
        let m = MetricSpec::from_strings(
            "flat2",
            &["x1", "x2"],
            &[("1,1", "1"), ("2,2", "1")],
            &[(-1.0, 1.0), (-1.0, 1.0)],
        )
        .unwrap();
        let a = sample_points(&m, 42, 5).unwrap();
        let b = sample_points(&m, 42, 5).unwrap();
        assert_eq!(a, b);
        let c = sample_points(&m, 43, 5).unwrap();
        assert_ne!(a, c);
        for p in &a {
            assert!(p.iter().all(|x| (-1.0..1.0).contains(x)));
        }
    }

    #[test]
    fn rejects_degenerate() {
        // g = diag(x1, 1) degenerates on x1 = 0; box includes that surface.
        let m = MetricSpec::from_strings(
            "deg",
            &["x1", "x2"],
            &[("1,1", "x1"), ("2,2", "1")],
            &[(-1.0, 1.0), (0.0, 1.0)],
        )
        .unwrap();
        for p in sample_points(&m, 42, 10).unwrap() {
            assert!(p[0].abs() > 1e-9);
        }
    }
}
