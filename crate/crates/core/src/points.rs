//! Deterministic rational point sets in the closed unit ball.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exact::rational::{int, Rational};

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `i` in base `b`, exactly.
pub fn radical_inverse(mut i: u64, b: u64) -> Rational {
    let mut num = BigInt::from(0);
    let mut den = BigInt::from(1);
    // The lowest digit of i becomes the leading digit of the fraction.
    while i > 0 {
        num = num * b + (i % b);
        den *= b;
        i /= b;
    }
    Rational::new(num, den)
}

/// The first `count` Halton points mapped to `[−1,1]^d` and kept if they lie
/// in the ball.
pub fn halton_ball(d: usize, count: usize) -> Vec<Vec<Rational>> {
    assert!(d <= PRIMES.len(), "Halton points are provided for d ≤ {}", PRIMES.len());
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p: Vec<Rational> = PRIMES[..d].iter().map(|&b| radical_inverse(i, b) * int(2) - int(1)).collect();
        if in_ball(&p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

pub fn in_ball(p: &[Rational]) -> bool {
    p.iter().map(|x| x * x).sum::<Rational>() <= int(1)
}

/// Random rational points in the ball with denominators up to `max_den`.
pub fn random_ball(d: usize, count: usize, max_den: i64, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p: Vec<Rational> = (0..d)
            .map(|_| {
                let q = rng.gen_range(1..=max_den);
                let num = rng.gen_range(-q..=q);
                Rational::new(num.into(), q.into())
            })
            .collect();
        if in_ball(&p) {
            out.push(p);
        }
    }
    out
}

/// Low-discrepancy float points in the unit disk.
pub fn halton_disk_f64(count: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let x = 2.0 * radical_inverse_f64(i, 2) - 1.0;
        let y = 2.0 * radical_inverse_f64(i, 3) - 1.0;
        if x * x + y * y <= 1.0 {
            out.push([x, y]);
        }
        i += 1;
    }
    out
}

pub fn radical_inverse_f64(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}
