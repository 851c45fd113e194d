//! Reference computations for the integration tests, built directly from the
//! definitions and sharing no code with the library's fast paths.

#![allow(dead_code)]

use cvpk_core::{Subspace3, WeightEnum};

/// Rows of `Q(n)` from `Q(n) = (X Q(n/2), Z Q(n/2))`, `Q(1) = (1)`.
pub fn q_rows(n: usize) -> Vec<Vec<u8>> {
    if n == 1 {
        return vec![vec![1]];
    }
    let half = q_rows(n / 2);
    let x = |i: usize, j: usize| (2 * j <= i && i <= 2 * j + 2) as u8;
    let z = |i: usize, j: usize| (2 * j < i && i <= 2 * j + 2) as u8;
    (0..n)
        .map(|i| {
            let mut row = vec![0u8; n];
            for c in 0..n / 2 {
                for (j, h) in half.iter().enumerate() {
                    row[c] ^= x(i, j) & h[c];
                    row[n / 2 + c] ^= z(i, j) & h[c];
                }
            }
            row
        })
        .collect()
}

/// `Q(n)` with rows `2i` and `2i+1` exchanged for `i = 2..n/2-3`.
pub fn swapped_rows(n: usize) -> Vec<Vec<u8>> {
    let mut rows = q_rows(n);
    let mut i = 2;
    while i + 3 <= n / 2 {
        rows.swap(2 * i, 2 * i + 1);
        i += 1;
    }
    rows
}

pub fn arikan_rows(n: usize) -> Vec<Vec<u8>> {
    if n == 1 {
        return vec![vec![1]];
    }
    let h = arikan_rows(n / 2);
    let mut out = vec![vec![0u8; n]; n];
    for (i, row) in h.iter().enumerate() {
        for (j, &b) in row.iter().enumerate() {
            out[i][j] = b;
            out[n / 2 + i][j] = b;
            out[n / 2 + i][n / 2 + j] = b;
        }
    }
    out
}

pub fn rows_as_strings(rows: &[Vec<u8>]) -> Vec<String> {
    rows.iter()
        .map(|r| r.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect())
        .collect()
}

/// Gauss–Jordan elimination: every pivot bit appears in exactly one vector.
fn reduce(vectors: impl IntoIterator<Item = u64>, bits: usize) -> Vec<(usize, u64)> {
    let mut rows: Vec<u64> = vectors.into_iter().filter(|&v| v != 0).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for b in 0..bits {
        let Some(k) = (r..rows.len()).find(|&k| rows[k] >> b & 1 == 1) else {
            continue;
        };
        rows.swap(r, k);
        let p = rows[r];
        for (idx, v) in rows.iter_mut().enumerate() {
            if idx != r && *v >> b & 1 == 1 {
                *v ^= p;
            }
        }
        pivots.push((b, p));
        r += 1;
    }
    pivots
}

fn in_span(pivots: &[(usize, u64)], mut v: u64) -> bool {
    for &(b, p) in pivots {
        if v >> b & 1 == 1 {
            v ^= p;
        }
    }
    v == 0
}

/// Per-weight counts from brute force over every erasure configuration.
pub struct Reference {
    pub n: usize,
    /// `gpb[φ][subspace index][weight]`, `φ < n - 2`.
    pub gpb: Vec<Vec<Vec<u64>>>,
    /// `pb[φ][weight]`.
    pub pb: Vec<Vec<u64>>,
}

pub fn reference(rows: &[Vec<u8>]) -> Reference {
    let n = rows.len();
    assert!(n <= 20, "reference enumeration limited to n <= 20");
    // column j as a word, bit i = K[i][j]
    let cols: Vec<u64> = (0..n)
        .map(|j| (0..n).fold(0u64, |acc, i| acc | (rows[i][j] as u64) << i))
        .collect();
    let phases = n.saturating_sub(2);
    let mut gpb = vec![vec![vec![0u64; n + 1]; 16]; phases];
    let mut pb = vec![vec![0u64; n + 1]; n];
    for mask in 0u64..1 << n {
        let w = mask.count_ones() as usize;
        for phi in 0..n {
            let kept = (0..n).filter(|&j| mask >> j & 1 == 0).map(|j| cols[j] >> phi);
            let piv = reduce(kept, n - phi);
            if !in_span(&piv, 1) {
                pb[phi][w] += 1;
            }
            if phi < phases {
                let mut members = 1u8;
                for p in 1u8..8 {
                    // Vec3 packs u_φ into the 4s bit
                    let v = (p >> 2 & 1) as u64 | ((p >> 1 & 1) as u64) << 1 | ((p & 1) as u64) << 2;
                    if in_span(&piv, v) {
                        members |= 1 << p;
                    }
                }
                let s = Subspace3::from_mask(members).expect("membership set is a subspace");
                gpb[phi][s.index()][w] += 1;
            }
        }
    }
    Reference { n, gpb, pb }
}

pub fn poly(counts: &[u64]) -> WeightEnum {
    WeightEnum::from_u64s(counts)
}

/// The `Q(4)` GPB: phase 0 then phase 1, subspaces in canonical order.
pub const Q4_GPB: [[&str; 16]; 2] = [
    [
        "x^4 + 4x^3", "0", "x^2", "x^2", "x^2", "x^2", "x^2", "x^2", "0", "0", "x", "x", "0", "x", "x", "1",
    ],
    [
        "x^4", "0", "0", "x^3", "0", "x^3", "x^3", "x^3", "0", "x^2", "x^2", "x^2", "x^2", "x^2", "x^2",
        "4x + 1",
    ],
];
