//! Exact rational evaluation of the inclusion-exclusion reservation formula.
//!
//! Intended as a test oracle; cost grows with `M^2` big-integer products of
//! `M log N` bits, which is fine up to a few hundred stations.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn choose(n: usize, k: usize) -> BigInt {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `sum_{j=k}^{M} (-1)^(j-k) C(M,j) C(j,k) N! (N-j)^(M-j) / ((N-j)! N^M)`.
///
/// # Panics
/// If `n_slots == 0` or `k > n_stations`.
pub fn reservation_probability(n_slots: usize, n_stations: usize, k: usize) -> BigRational {
    assert!(n_slots >= 1 && k <= n_stations);
    let (n, m) = (n_slots, n_stations);
    let denominator = num::pow(BigInt::from(n), m);
    let n_fact = factorial(n);
    let mut numerator = BigInt::zero();
    for j in k..=m.min(n) {
        let falling = &n_fact / factorial(n - j);
        let power = num::pow(BigInt::from(n - j), m - j);
        let term = choose(m, j) * choose(j, k) * falling * power;
        if (j - k) % 2 == 0 {
            numerator += term;
        } else {
            numerator -= term;
        }
    }
    BigRational::new(numerator, denominator)
}

/// Exhaustive enumeration over all `N^M` assignments, counting stations
/// that share their slot with nobody. Returns counts per `k`.
pub fn enumerate_singleton_counts(n_slots: usize, n_stations: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_stations + 1];
    let mut picks = vec![0usize; n_stations];
    let mut occupancy = vec![0usize; n_slots];
    loop {
        occupancy.iter_mut().for_each(|c| *c = 0);
        for &p in &picks {
            occupancy[p] += 1;
        }
        let alone = picks.iter().filter(|&&p| occupancy[p] == 1).count();
        counts[alone] += 1;
        // odometer increment
        let mut i = 0;
        loop {
            if i == n_stations {
                return counts;
            }
            picks[i] += 1;
            if picks[i] < n_slots {
                break;
            }
            picks[i] = 0;
            i += 1;
        }
    }
}
