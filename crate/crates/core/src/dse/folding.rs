//! Divisor arithmetic and the decomposition of a cumulative parallelism
//! factor into `(P, Q, M)`.

use serde::Serialize;

use crate::cost::Folding;
use crate::passes::{LayerGeometry, LoweredKind};

/// All divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Smallest divisor of `n` strictly greater than `m`.
pub fn next_divisor(n: u64, m: u64) -> Option<u64> {
    divisors(n).into_iter().find(|&d| d > m)
}

/// Largest divisor of `n` not exceeding `cap`.
pub fn largest_divisor_at_most(n: u64, cap: u64) -> u64 {
    divisors(n).into_iter().rev().find(|&d| d <= cap).unwrap_or(1)
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn valuation(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// Upper bound of the cumulative factor: every MAC of the layer in parallel.
pub fn max_parallelism(g: &LayerGeometry) -> u64 {
    match g.kind {
        LoweredKind::Pool => 1,
        _ => (g.c * g.c_out * g.rows_out) as u64,
    }
}

/// Splits `m` into `(P, Q, M)`: each prime power goes to `Q` as far as `C`
/// allows, then to `P` as far as `C'` allows, and the rest to `M`.
///
/// When `m` divides `C·C'·N'` the result multiplies to `m` and satisfies
/// `Q | C`, `P | C'`, `M | N'`.
pub fn tile_parallelism(m: u64, c: u64, c_out: u64, rows_out: u64) -> Folding {
    let mut f = Folding::MINIMAL;
    for (prime, e) in factorize(m) {
        let to_q = e.min(valuation(c, prime));
        let to_p = (e - to_q).min(valuation(c_out, prime));
        let to_m = e - to_q - to_p;
        f.q *= prime.pow(to_q);
        f.p *= prime.pow(to_p);
        f.m *= prime.pow(to_m);
    }
    debug_assert!(rows_out == 0 || f.product() == m);
    f
}

pub fn tile_layer(m: u64, g: &LayerGeometry) -> Folding {
    match g.kind {
        LoweredKind::Pool => Folding::MINIMAL,
        _ => tile_parallelism(m, g.c as u64, g.c_out as u64, g.rows_out as u64),
    }
}

/// Engine folding as applied to one layer on a shared engine: each factor is
/// reduced to the largest divisor of the matching layer dimension.
pub fn clamp_to_layer(engine: Folding, g: &LayerGeometry) -> Folding {
    match g.kind {
        LoweredKind::Pool => Folding { p: 1, q: 1, m: largest_divisor_at_most(g.rows_out as u64, engine.m) },
        LoweredKind::Fc => Folding {
            p: largest_divisor_at_most(g.c_out as u64, engine.p),
            q: largest_divisor_at_most(g.c as u64, engine.q),
            m: 1,
        },
        LoweredKind::Conv => Folding {
            p: largest_divisor_at_most(g.c_out as u64, engine.p),
            q: largest_divisor_at_most(g.c as u64, engine.q),
            m: largest_divisor_at_most(g.rows_out as u64, engine.m),
        },
    }
}

/// Per-layer folding of a dataflow design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerFolding {
    pub layer: String,
    pub folding: Folding,
}
