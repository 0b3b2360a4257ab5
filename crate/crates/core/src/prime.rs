//! Deterministic primality for 64-bit integers and odd-prime selection.

use crate::{Error, Result};

// First twelve primes: a complete Miller–Rabin witness set below 3.3·10²⁴.
const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Primality test, exact for every `m ≥ 2` that fits in a `u64`.
pub fn is_prime(m: u64) -> Result<bool> {
    if m < 2 {
        return Err(Error::invalid("m", "primality is defined for m >= 2"));
    }
    Ok(is_prime_unchecked(m))
}

pub(crate) fn is_prime_unchecked(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if m % p == 0 {
            return m == p;
        }
    }
    let mut d = m - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, m);
        if x == 1 || x == m - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, m);
            if x == m - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest odd prime `≥ lower_bound`.
pub fn next_odd_prime(lower_bound: u64) -> Result<u64> {
    if lower_bound < 3 {
        return Err(Error::invalid("lower_bound", "must be at least 3"));
    }
    let mut c = lower_bound | 1;
    loop {
        if is_prime_unchecked(c) {
            return Ok(c);
        }
        c = c
            .checked_add(2)
            .ok_or(Error::Overflow("next_odd_prime ran past u64::MAX"))?;
    }
}

/// `true` iff `p` is an odd prime.
pub fn is_odd_prime(p: u64) -> bool {
    p > 2 && is_prime_unchecked(p)
}
