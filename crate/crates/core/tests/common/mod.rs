#![allow(dead_code)]

use mcc_infer::{ProbVec4, ProbVec8};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// MCC of four free cells, written out independently of the library.
pub fn phi_free(p: [f64; 4]) -> f64 {
    let [a, b, c, d] = p;
    (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d)).sqrt()
}

/// MCC difference of eight free cells, marginalizing by hand.
pub fn psi_free(q: [f64; 8]) -> f64 {
    let h1 = [q[0] + q[2], q[1] + q[3], q[4] + q[6], q[5] + q[7]];
    let h2 = [q[0] + q[4], q[1] + q[5], q[2] + q[6], q[3] + q[7]];
    phi_free(h1) - phi_free(h2)
}

pub fn central_diff<const K: usize>(f: impl Fn([f64; K]) -> f64, x: [f64; K], h: f64) -> [f64; K] {
    std::array::from_fn(|i| {
        let mut up = x;
        let mut dn = x;
        up[i] += h;
        dn[i] -= h;
        (f(up) - f(dn)) / (2.0 * h)
    })
}

/// Cells drawn uniformly from `[floor, 1]` and normalized.
pub fn random_interior<const K: usize>(rng: &mut impl Rng, floor: f64) -> [f64; K] {
    let raw: [f64; K] = std::array::from_fn(|_| rng.random_range(floor..1.0));
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn p4(cells: [f64; 4]) -> ProbVec4 {
    ProbVec4::from_array(cells).unwrap()
}

pub fn p8(cells: [f64; 8]) -> ProbVec8 {
    ProbVec8::from_array(cells).unwrap()
}

/// `|a - b| <= rel * max(|a|, |b|)`, with a `1e-9` absolute floor for
/// components that are zero analytically.
pub fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(1e-9)
}
