//! Simulated link delays, end-to-end path delays, clock-offset contamination
//! and differential measurements.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::matrix::IntMatrix;
use crate::scalar::Real;

/// Name of the seeded generator used for every random draw.
pub const GENERATOR_NAME: &str = "ChaCha8Rng";

/// Delay model constants, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayParams<T> {
    pub congested_delay: T,
    /// Mean of the exponential background delay. Zero selects the
    /// noiseless limit (all uncongested links have zero delay).
    pub background_mean: T,
    pub seed: u64,
}

impl<T: Real> Default for DelayParams<T> {
    fn default() -> Self {
        DelayParams {
            congested_delay: T::of(10.0),
            background_mean: T::of(0.05),
            seed: 0,
        }
    }
}

impl<T: Real> DelayParams<T> {
    pub fn noiseless(seed: u64) -> Self {
        DelayParams {
            background_mean: T::zero(),
            seed,
            ..Self::default()
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        DelayParams { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.background_mean >= T::zero() && self.congested_delay > self.background_mean) {
            return Err(TomoError::InvalidParameter(format!(
                "need congested_delay > background_mean >= 0, got {} and {}",
                self.congested_delay, self.background_mean
            )));
        }
        Ok(())
    }
}

/// Per-link delays with the congested set that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDelayVector<T> {
    pub delays: Vec<T>,
    pub congested: BTreeSet<usize>,
    pub params: DelayParams<T>,
}

/// Exponential variate with the given mean by inverse CDF on an open-interval
/// uniform draw, so the result is strictly positive.
pub fn sample_exponential<T: Real, R: Rng + ?Sized>(mean: T, rng: &mut R) -> T {
    let u: f64 = rng.sample(Open01);
    -mean * T::of(u.ln())
}

/// Draws link delays: `congested_delay` on `congested`, i.i.d. exponential
/// background on every other link, from a generator seeded with `params.seed`.
pub fn generate_link_delays<T: Real>(
    num_links: usize,
    congested: &[usize],
    params: DelayParams<T>,
) -> Result<LinkDelayVector<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    generate_link_delays_with(num_links, congested, params, &mut rng)
}

/// As [`generate_link_delays`], drawing from an explicit generator.
pub fn generate_link_delays_with<T: Real, R: Rng + ?Sized>(
    num_links: usize,
    congested: &[usize],
    params: DelayParams<T>,
    rng: &mut R,
) -> Result<LinkDelayVector<T>> {
    params.validate()?;
    if num_links == 0 {
        return Err(TomoError::InvalidParameter("network has no links".into()));
    }
    if congested.len() > num_links {
        return Err(TomoError::InvalidParameter(format!(
            "k = {} exceeds J = {num_links}",
            congested.len()
        )));
    }
    let set: BTreeSet<usize> = congested.iter().copied().collect();
    if set.len() != congested.len() {
        return Err(TomoError::InvalidParameter("congested links must be distinct".into()));
    }
    if let Some(&bad) = set.iter().find(|&&l| l >= num_links) {
        return Err(TomoError::InvalidParameter(format!("unknown link e{}", bad + 1)));
    }
    let delays = (0..num_links)
        .map(|j| {
            // Draw for every link so the background stream does not depend on
            // which links are congested.
            let background = if params.background_mean > T::zero() {
                sample_exponential(params.background_mean, rng)
            } else {
                T::zero()
            };
            if set.contains(&j) {
                params.congested_delay
            } else {
                background
            }
        })
        .collect();
    Ok(LinkDelayVector {
        delays,
        congested: set,
        params,
    })
}

/// End-to-end delays `y = A x`.
pub fn path_delays<T: Real>(routing: &IntMatrix, x: &[T]) -> Result<Vec<T>> {
    routing.mul_vec(x)
}

/// `z = y + delta * 1`.
pub fn apply_clock_offset<T: Real>(y: &[T], delta: T) -> Vec<T> {
    y.iter().map(|&v| v + delta).collect()
}

/// `z_i - z_r` for every non-reference row, in row order.
pub fn differential_measurements<T: Real>(z: &[T], reference: usize) -> Result<Vec<T>> {
    if reference >= z.len() {
        return Err(TomoError::ReferenceOutOfRange {
            reference: reference + 1,
            rows: z.len(),
        });
    }
    let zr = z[reference];
    Ok(z
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != reference)
        .map(|(_, &v)| v - zr)
        .collect())
}

/// True delays, clock offset, observed delays and (optionally) the
/// differential vector for one measurement round.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<T> {
    pub true_delays: Vec<T>,
    pub clock_offset: T,
    pub observed: Vec<T>,
    pub reference_index: Option<usize>,
    pub differential: Option<Vec<T>>,
}

impl<T: Real> MeasurementSet<T> {
    pub fn measure(
        routing: &IntMatrix,
        x: &[T],
        clock_offset: T,
        reference_index: Option<usize>,
    ) -> Result<Self> {
        let true_delays = path_delays(routing, x)?;
        let observed = apply_clock_offset(&true_delays, clock_offset);
        let differential = reference_index
            .map(|r| differential_measurements(&observed, r))
            .transpose()?;
        Ok(MeasurementSet {
            true_delays,
            clock_offset,
            observed,
            reference_index,
            differential,
        })
    }

    /// CSV with columns `path_index,y_ms,z_ms` (1-based path indices).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("path_index,y_ms,z_ms\n");
        for (i, (y, z)) in self.true_delays.iter().zip(&self.observed).enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, y, z);
        }
        out
    }

    /// Differential CSV: a `# reference_index=r` line, then the same columns
    /// holding `y_i - y_r` and `z_i - z_r` for each non-reference path.
    pub fn differential_csv(&self) -> Option<String> {
        let r = self.reference_index?;
        let dy = differential_measurements(&self.true_delays, r).ok()?;
        let dz = self.differential.as_ref()?;
        let mut out = format!("# reference_index={}\npath_index,y_ms,z_ms\n", r + 1);
        let rows = (0..self.true_delays.len()).filter(|&i| i != r);
        for ((i, y), z) in rows.zip(&dy).zip(dz) {
            let _ = writeln!(out, "{},{},{}", i + 1, y, z);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RoutingMatrix;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn t1() -> IntMatrix {
        RoutingMatrix::from_link_sets(
            8,
            &[
                vec![0, 1],
                vec![2, 3],
                vec![0, 4, 3],
                vec![5, 6],
                vec![2, 4, 1],
                vec![0, 7, 6],
            ],
        )
        .unwrap()
        .entries()
        .clone()
    }

    #[test]
    fn noiseless_delays_are_an_indicator() {
        let x = generate_link_delays::<f64>(8, &[2], DelayParams::noiseless(1)).unwrap();
        assert_eq!(x.delays, vec![0.0, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn background_delays_are_positive_with_the_right_mean() {
        let x = generate_link_delays::<f64>(8, &[0, 4], DelayParams::default().with_seed(3)).unwrap();
        assert_eq!(x.delays[0], 10.0);
        assert_eq!(x.delays[4], 10.0);
        assert!(x.delays.iter().all(|&d| d > 0.0));

        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mean = (0..n).map(|_| sample_exponential(0.05f64, &mut rng)).sum::<f64>() / n as f64;
        // exponential std = mean, so the sample mean has sigma 0.05/sqrt(n)
        let sigma = 0.05 / (n as f64).sqrt();
        assert!((mean - 0.05).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn delay_generation_errors() {
        assert!(generate_link_delays::<f64>(3, &[0, 1, 2, 0], DelayParams::default()).is_err());
        assert!(generate_link_delays::<f64>(3, &[0, 1, 2, 2], DelayParams::default()).is_err());
        assert!(generate_link_delays::<f64>(0, &[], DelayParams::default()).is_err());
        assert!(generate_link_delays::<f64>(3, &[5], DelayParams::default()).is_err());
        let bad = DelayParams { congested_delay: 0.01, ..DelayParams::<f64>::default() };
        assert!(generate_link_delays(3, &[0], bad).is_err());
    }

    #[test]
    fn same_seed_same_delays() {
        let p = DelayParams::<f64>::default().with_seed(99);
        let a = generate_link_delays(20, &[3, 7], p).unwrap();
        let b = generate_link_delays(20, &[3, 7], p).unwrap();
        assert_eq!(a, b);
        let bits: Vec<u64> = a.delays.iter().map(|d| d.to_bits()).collect();
        let bits_b: Vec<u64> = b.delays.iter().map(|d| d.to_bits()).collect();
        assert_eq!(bits, bits_b);
    }

    #[test]
    fn path_delay_examples() {
        let mut x = vec![0.0; 8];
        x[0] = 10.0;
        assert_eq!(path_delays(&t1(), &x).unwrap(), vec![10.0, 0.0, 10.0, 0.0, 0.0, 10.0]);
        assert_eq!(path_delays(&t1(), &[0.0; 8]).unwrap(), vec![0.0; 6]);
        let single = IntMatrix::from_rows(&[vec![1, 1]]).unwrap();
        assert_eq!(path_delays(&single, &[2.0, 3.0]).unwrap(), vec![5.0]);
        assert!(path_delays(&single, &[2.0]).is_err());
    }

    #[test]
    fn clock_offset_examples() {
        let y = [10.0, 0.0, 10.0, 0.0, 0.0, 10.0];
        assert_eq!(apply_clock_offset(&y, 7.0), vec![17.0, 7.0, 17.0, 7.0, 7.0, 17.0]);
        assert_eq!(apply_clock_offset(&y, 0.0), y.to_vec());
        let z = apply_clock_offset(&y, -1e6);
        assert_eq!(z[0], 10.0 - 1e6);
    }

    #[test]
    fn differential_examples() {
        let z = [17.0, 7.0, 17.0, 7.0, 7.0, 17.0];
        assert_eq!(differential_measurements(&z, 0).unwrap(), vec![-10.0, 0.0, -10.0, -10.0, 0.0]);
        let y = [10.0, 0.0, 10.0, 0.0, 0.0, 10.0];
        let plus = differential_measurements(&apply_clock_offset(&y, 7.0), 2).unwrap();
        let minus = differential_measurements(&apply_clock_offset(&y, -3.0), 2).unwrap();
        assert_eq!(plus, minus);
        assert_eq!(plus.len(), 5);
        assert!(differential_measurements(&z, 6).is_err());
    }

    #[test]
    fn measurement_csv() {
        let mut x = vec![0.0; 8];
        x[0] = 10.0;
        let m = MeasurementSet::measure(&t1(), &x, 7.0, Some(0)).unwrap();
        assert_eq!(m.to_csv().lines().next(), Some("path_index,y_ms,z_ms"));
        assert_eq!(m.to_csv().lines().nth(1), Some("1,10,17"));
        let diff = m.differential_csv().unwrap();
        let lines: Vec<&str> = diff.lines().collect();
        assert_eq!(lines[0], "# reference_index=1");
        assert_eq!(lines[2], "2,-10,-10");
        assert_eq!(lines.len(), 7);
    }

    proptest! {
        #[test]
        fn offset_cancels(
            y in proptest::collection::vec(0.0f64..100.0, 2..12),
            delta in -1e6f64..1e6,
            r_seed in any::<usize>(),
        ) {
            let r = r_seed % y.len();
            let base = differential_measurements(&y, r).unwrap();
            let shifted = differential_measurements(&apply_clock_offset(&y, delta), r).unwrap();
            for (a, b) in base.iter().zip(&shifted) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn f32_measurements() {
        let m = MeasurementSet::<f32>::measure(&t1(), &[1.0; 8], 2.5, Some(1)).unwrap();
        assert_relative_eq!(m.observed[0], 4.5);
        assert_eq!(m.differential.unwrap()[0], 0.0);
    }
}
