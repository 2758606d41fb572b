//! Small integer number theory used across the crate.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes strictly below `bound`, ascending.
pub fn primes_below(bound: u64) -> Vec<u64> {
    (2..bound).filter(|&n| is_prime(n)).collect()
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn mobius(n: u64) -> i64 {
    let mut n = n;
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut b = (base % m) as u128;
    let mut acc: u128 = 1;
    let m = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Multiplicative order of `u` modulo `m`; `None` if `u` is not a unit.
pub fn mult_order(u: u64, m: u64) -> Option<u64> {
    let u = u % m;
    if m == 1 {
        return Some(1);
    }
    if gcd(u, m) != 1 {
        return None;
    }
    let mut x = u;
    let mut k = 1;
    while x != 1 {
        x = x * u % m;
        k += 1;
    }
    Some(k)
}

/// `(p, k)` with `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    let factors = prime_factors(q);
    if factors.len() != 1 {
        return None;
    }
    let p = factors[0];
    let (mut r, mut k) = (q, 0);
    while r % p == 0 {
        r /= p;
        k += 1;
    }
    Some((p, k))
}

/// Number of monic irreducible polynomials of degree `d` over F_q (necklace count).
pub fn irreducible_count(q: u64, d: u32) -> u64 {
    let d64 = d as u64;
    let mut total: i128 = 0;
    for e in 1..=d64 {
        if d64 % e == 0 {
            total += mobius(e) as i128 * (q as i128).pow((d64 / e) as u32);
        }
    }
    (total / d64 as i128) as u64
}

/// Subgroup of (Z/m)^x generated by `gens`, sorted.
pub fn generated_subgroup(gens: impl IntoIterator<Item = u64>, m: u64) -> Vec<u64> {
    let mut members = vec![1 % m];
    let mut seen = vec![false; m as usize];
    seen[(1 % m) as usize] = true;
    let gens: Vec<u64> = gens.into_iter().map(|g| g % m).collect();
    let mut i = 0;
    while i < members.len() {
        let x = members[i];
        for &g in &gens {
            let y = x * g % m;
            if !seen[y as usize] {
                seen[y as usize] = true;
                members.push(y);
            }
        }
        i += 1;
    }
    members.sort_unstable();
    members
}
