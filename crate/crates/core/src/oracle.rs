//! Exhaustive ground truth: enumerate every erasure configuration of a
//! kernel and evaluate recoverability straight from the column space of the
//! unerased part of the kernel.
//!
//! For a configuration `E`, the unerased columns are eliminated into a
//! basis with distinct leading (highest) row indices. Then for every phase
//! `φ` at once:
//!
//! * `u_φ` is recoverable iff some basis vector leads at row `φ`;
//! * `χ_φ(E)` is spanned by the projections onto rows `φ, φ+1, φ+2` of the
//!   basis vectors leading at those three rows.

use std::array;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2::WordBasis;
use crate::gpb::{Gpb, GpbRow, Source};
use crate::kernels::Kernel;
use crate::pb::Pb;
use crate::subspaces::{span_mask, Subspace3, COUNT};
use crate::weight_enum::WeightEnum;

/// Default largest kernel size enumerated without an explicit override.
pub const DEFAULT_GUARD: usize = 20;

/// Hard limit of the word-packed enumeration.
pub const MAX_SIZE: usize = 63;

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    pub guard: usize,
    /// Enumerate even when `n` exceeds `guard`.
    pub force: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            guard: DEFAULT_GUARD,
            force: false,
        }
    }
}

impl OracleOptions {
    pub fn forced() -> Self {
        Self {
            force: true,
            ..Self::default()
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > MAX_SIZE {
            return Err(Error::InvalidInput(format!(
                "exhaustive enumeration supports n <= {MAX_SIZE}, got {n}"
            )));
        }
        if n > self.guard && !self.force {
            return Err(Error::GuardExceeded { n, limit: self.guard });
        }
        Ok(())
    }
}

/// A set of erased codeword positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ErasureConfig {
    n: usize,
    mask: u64,
}

impl ErasureConfig {
    pub fn new(n: usize, mask: u64) -> Result<Self> {
        if n > MAX_SIZE || (n < 64 && mask >> n != 0) {
            return Err(Error::InvalidInput(format!(
                "erasure mask {mask:#x} does not fit {n} positions"
            )));
        }
        Ok(Self { n, mask })
    }

    pub fn from_positions(n: usize, positions: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &p in positions {
            if p >= n || p >= 64 {
                return Err(Error::InvalidInput(format!("position {p} outside [0, {n})")));
            }
            mask |= 1 << p;
        }
        Self::new(n, mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_erased(&self, position: usize) -> bool {
        self.mask >> position & 1 == 1
    }

    pub fn weight(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_subset_of(&self, other: &ErasureConfig) -> bool {
        self.mask & !other.mask == 0
    }
}

/// Kernel columns as words, bit `r` = entry in row `r`.
fn column_words(kernel: &Kernel) -> Result<Vec<u64>> {
    let n = kernel.n();
    if n > MAX_SIZE {
        return Err(Error::InvalidInput(format!("kernel size {n} exceeds {MAX_SIZE}")));
    }
    let m = kernel.matrix();
    Ok((0..n)
        .map(|c| (0..n).filter(|&r| m.get(r, c)).fold(0u64, |w, r| w | 1 << r))
        .collect())
}

fn unerased_basis(cols: &[u64], mask: u64) -> WordBasis {
    let mut basis = WordBasis::default();
    for (c, &col) in cols.iter().enumerate() {
        if mask >> c & 1 == 0 {
            basis.insert(col);
        }
    }
    basis
}

/// Membership mask of `χ_φ` for the configuration whose unerased columns
/// produced `basis`.
#[inline]
fn chi_mask(basis: &WordBasis, phi: usize) -> u8 {
    let project = |v: u64| ((v >> phi & 1) << 2 | (v >> (phi + 1) & 1) << 1 | (v >> (phi + 2) & 1)) as u8;
    span_mask((phi..phi + 3).filter_map(|lead| basis.with_lead(lead)).map(project))
}

/// `χ_φ(E)`: coefficient vectors `p` such that `p · u_φ^{φ+2}` is recoverable.
pub fn chi(kernel: &Kernel, phi: usize, erased: &ErasureConfig) -> Result<Subspace3> {
    let n = kernel.n();
    if n < 3 || phi > n - 3 {
        return Err(Error::InvalidInput(format!("phase {phi} outside [0, {}]", n.saturating_sub(3))));
    }
    if erased.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: erased.n() });
    }
    let basis = unerased_basis(&column_words(kernel)?, erased.mask());
    Subspace3::from_mask(chi_mask(&basis, phi)).ok_or_else(|| Error::Internal("projection not closed".into()))
}

/// Whether `u_φ` stays erased: `(1, 0, …, 0) ∉ cs K[rows ≥ φ, cols ∉ E]`.
pub fn erases(kernel: &Kernel, phi: usize, erased: &ErasureConfig) -> Result<bool> {
    if phi >= kernel.n() {
        return Err(Error::InvalidInput(format!("phase {phi} outside [0, {})", kernel.n())));
    }
    let basis = unerased_basis(&column_words(kernel)?, erased.mask());
    Ok(basis.leads() >> phi & 1 == 0)
}

/// Depth-first walk over all `2^n` erasure masks, sharing elimination work
/// between masks with a common prefix of decisions. The first `split`
/// decisions fan out across worker threads; partial results are merged in
/// prefix order.
fn enumerate<A, New, Visit, Merge>(cols: &[u64], new: New, visit: Visit, merge: Merge) -> A
where
    A: Send,
    New: Fn() -> A + Sync,
    Visit: Fn(&mut A, &WordBasis, usize) + Sync,
    Merge: Fn(A, A) -> A + Sync,
{
    fn walk<A, V: Fn(&mut A, &WordBasis, usize)>(
        cols: &[u64],
        c: usize,
        basis: WordBasis,
        erased: usize,
        acc: &mut A,
        visit: &V,
    ) {
        if c == cols.len() {
            visit(acc, &basis, erased);
            return;
        }
        let mut kept = basis;
        kept.insert(cols[c]);
        walk(cols, c + 1, kept, erased, acc, visit);
        walk(cols, c + 1, basis, erased + 1, acc, visit);
    }

    let n = cols.len();
    let split = n.min(8);
    (0u64..1 << split)
        .into_par_iter()
        .map(|prefix| {
            let mut basis = WordBasis::default();
            for (c, &col) in cols.iter().take(split).enumerate() {
                if prefix >> c & 1 == 0 {
                    basis.insert(col);
                }
            }
            let mut acc = new();
            walk(cols, split, basis, prefix.count_ones() as usize, &mut acc, &visit);
            acc
        })
        .reduce_with(&merge)
        .unwrap_or_else(new)
}

fn add_counts(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

/// GPB of any kernel by enumerating all `2^n` erasure configurations.
pub fn gpb_oracle(kernel: &Kernel, opts: &OracleOptions) -> Result<Gpb> {
    let n = kernel.n();
    opts.check(n)?;
    if n < 3 {
        return Err(Error::InvalidInput(format!("GPB needs n >= 3, got {n}")));
    }
    let cols = column_words(kernel)?;
    let phases = n - 2;
    let stride = n + 1;
    let counts = enumerate(
        &cols,
        || vec![0u64; phases * COUNT * stride],
        |acc, basis, w| {
            for phi in 0..phases {
                let s = Subspace3::from_mask(chi_mask(basis, phi)).expect("projected span is a subspace");
                acc[(phi * COUNT + s.index()) * stride + w] += 1;
            }
        },
        add_counts,
    );
    let rows = (0..phases)
        .map(|phi| -> GpbRow {
            array::from_fn(|s| {
                let at = (phi * COUNT + s) * stride;
                WeightEnum::from_u64s(&counts[at..at + stride])
            })
        })
        .collect();
    Gpb::new(n, Source::Oracle, rows)
}

/// PB of any kernel by enumerating all `2^n` erasure configurations.
pub fn pb_oracle(kernel: &Kernel, opts: &OracleOptions) -> Result<Pb> {
    let n = kernel.n();
    opts.check(n)?;
    let cols = column_words(kernel)?;
    let stride = n + 1;
    let counts = enumerate(
        &cols,
        || vec![0u64; n * stride],
        |acc, basis, w| {
            let missing = !basis.leads();
            for phi in (0..n).filter(|&phi| missing >> phi & 1 == 1) {
                acc[phi * stride + w] += 1;
            }
        },
        add_counts,
    );
    let polys = (0..n)
        .map(|phi| WeightEnum::from_u64s(&counts[phi * stride..(phi + 1) * stride]))
        .collect();
    Pb::new(n, kernel.family(), Source::Oracle, polys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitVector;
    use crate::kernels::{arikan_power, cvpk, sorted_cvpk, swapped_cvpk};
    use crate::subspaces::Vec3;
    use proptest::prelude::*;

    fn p(s: &str) -> WeightEnum {
        s.parse().unwrap()
    }

    /// χ through explicit submatrices and column-space membership.
    fn chi_by_membership(kernel: &Kernel, phi: usize, erased: &ErasureConfig) -> Subspace3 {
        let n = kernel.n();
        let rows: Vec<usize> = (phi..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| !erased.is_erased(c)).collect();
        let sub = kernel.matrix().submatrix(&rows, &cols);
        let space = sub.column_space();
        let members = (0u8..8).map(Vec3).filter(|v| {
            let mut target = BitVector::zeros(n - phi);
            target.set(0, v.0 & 4 != 0);
            target.set(1, v.0 & 2 != 0);
            target.set(2, v.0 & 1 != 0);
            space.contains(&target)
        });
        Subspace3::from_index(Subspace3::index_of(members).unwrap()).unwrap()
    }

    fn erases_by_membership(kernel: &Kernel, phi: usize, erased: &ErasureConfig) -> bool {
        let n = kernel.n();
        let rows: Vec<usize> = (phi..n).collect();
        let cols: Vec<usize> = (0..n).filter(|&c| !erased.is_erased(c)).collect();
        let mut target = BitVector::zeros(n - phi);
        target.set(0, true);
        !kernel.matrix().submatrix(&rows, &cols).column_space_contains(&target).unwrap()
    }

    #[test]
    fn chi_examples() {
        let q4 = cvpk(4).unwrap();
        let e03 = ErasureConfig::from_positions(4, &[0, 3]).unwrap();
        assert_eq!(chi(&q4, 0, &e03).unwrap().index(), 2);
        let e12 = ErasureConfig::from_positions(4, &[1, 2]).unwrap();
        assert_eq!(chi(&q4, 0, &e12).unwrap().index(), 4);
        let none = ErasureConfig::new(4, 0).unwrap();
        assert_eq!(chi(&q4, 0, &none).unwrap(), Subspace3::FULL);
        assert_eq!(chi(&q4, 1, &none).unwrap(), Subspace3::FULL);
    }

    #[test]
    fn chi_rejects_bad_phase() {
        let q4 = cvpk(4).unwrap();
        let none = ErasureConfig::new(4, 0).unwrap();
        assert!(chi(&q4, 2, &none).is_err());
        assert!(ErasureConfig::new(4, 0b10000).is_err());
    }

    #[test]
    fn only_12_lands_in_110_box() {
        let q4 = cvpk(4).unwrap();
        let hits: Vec<u64> = (0..16)
            .filter(|&m| chi(&q4, 0, &ErasureConfig::new(4, m).unwrap()).unwrap().index() == 4)
            .collect();
        assert_eq!(hits, [0b0110]);
    }

    #[test]
    fn fast_chi_agrees_with_membership_route() {
        for kernel in [cvpk(8).unwrap(), swapped_cvpk(16).unwrap(), arikan_power(3).unwrap()] {
            let n = kernel.n();
            for mask in (0u64..1 << n).step_by(if n > 8 { 97 } else { 1 }) {
                let e = ErasureConfig::new(n, mask).unwrap();
                for phi in 0..n - 2 {
                    assert_eq!(chi(&kernel, phi, &e).unwrap(), chi_by_membership(&kernel, phi, &e));
                }
                for phi in 0..n {
                    assert_eq!(erases(&kernel, phi, &e).unwrap(), erases_by_membership(&kernel, phi, &e));
                }
            }
        }
    }

    #[test]
    fn arikan_pb() {
        let pb = pb_oracle(&arikan_power(1).unwrap(), &OracleOptions::default()).unwrap();
        assert_eq!(pb.polys(), [p("x^2 + 2x"), p("x^2")]);
    }

    #[test]
    fn q4_pb() {
        let pb = pb_oracle(&cvpk(4).unwrap(), &OracleOptions::default()).unwrap();
        assert_eq!(
            pb.polys(),
            [
                p("x^4 + 4x^3 + 6x^2 + 4x"),
                p("x^4 + 4x^3 + 4x^2"),
                p("x^4 + 4x^3 + 2x^2"),
                p("x^4")
            ]
        );
    }

    #[test]
    fn q4_gpb_is_base_table() {
        let g = gpb_oracle(&cvpk(4).unwrap(), &OracleOptions::default()).unwrap();
        assert_eq!(g.phases(), crate::gpb::gpb_base().phases());
    }

    #[test]
    fn q8_boxes_partition_configurations() {
        let g = gpb_oracle(&cvpk(8).unwrap(), &OracleOptions::default()).unwrap();
        assert!(g.boxes_conserved());
    }

    #[test]
    fn pb_is_union_of_boxes_without_100() {
        for kernel in [cvpk(8).unwrap(), sorted_cvpk(16).unwrap(), arikan_power(3).unwrap()] {
            let g = gpb_oracle(&kernel, &OracleOptions::default()).unwrap();
            let pb = pb_oracle(&kernel, &OracleOptions::default()).unwrap();
            for phi in 0..kernel.n() - 2 {
                let sum: WeightEnum = Subspace3::all()
                    .filter(|s| !s.contains(Vec3(4)))
                    .map(|s| g.get(phi, s))
                    .sum();
                assert_eq!(&sum, pb.poly(phi), "phase {phi}");
            }
        }
    }

    #[test]
    fn guard_is_enforced() {
        let q32 = cvpk(32).unwrap();
        assert!(matches!(
            pb_oracle(&q32, &OracleOptions::default()),
            Err(Error::GuardExceeded { n: 32, limit: 20 })
        ));
        assert!(OracleOptions::forced().check(32).is_ok());
        assert!(OracleOptions::forced().check(64).is_err());
    }

    #[test]
    fn results_independent_of_thread_count() {
        let kernel = cvpk(16).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| pb_oracle(&kernel, &OracleOptions::default()).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }

    proptest! {
        #[test]
        fn more_erasures_recover_less(a in 0u64..1 << 16, b in 0u64..1 << 16, phi in 0usize..14) {
            let kernel = cvpk(16).unwrap();
            let small = ErasureConfig::new(16, a & b).unwrap();
            let large = ErasureConfig::new(16, a).unwrap();
            prop_assert!(small.is_subset_of(&large));
            let chi_small = chi(&kernel, phi, &small).unwrap();
            let chi_large = chi(&kernel, phi, &large).unwrap();
            prop_assert!(chi_large.is_subset_of(chi_small));
        }
    }
}
