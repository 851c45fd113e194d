//! Generalized polarization behaviour (GPB) of `Q(n)` by recursion on `n`.
//!
//! For an erasure configuration `E` and phase `φ`, `χ_φ(E)` is the subspace
//! of coefficient vectors `p ∈ GF(2)^3` for which `p · (u_φ, u_φ+1, u_φ+2)`
//! is recoverable from the unerased symbols once `u_0..u_φ-1` are known.
//! The GPB counts, per phase and per subspace, the configurations of each
//! weight landing in that subspace.
//!
//! The GPB of `Q(2N)` follows from that of `Q(N)`: the two halves of the
//! codeword are independent `Q(N)` codewords of `x = uX` and `z = uZ`, and
//! the subspace one level up is a fixed function (one of four transform
//! tables) of the two half-level subspaces. Each level therefore costs 256
//! polynomial products per phase, computed here on Kronecker-packed
//! integers.

use std::array;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::subspaces::{Subspace3, Vec3, COUNT};
use crate::weight_enum::WeightEnum;

/// One GPB phase: a weight enumerator per subspace, in canonical order.
pub type GpbRow = [WeightEnum; COUNT];

/// A 16 × 16 map of subspace index pairs to a subspace index.
pub type SlotTable = [[u8; COUNT]; COUNT];

/// Rows of the 3 × 6 matrix for the `x` half, bit `k` = column `k`.
const A0: [u8; 3] = [0b000111, 0b011100, 0b110000];
/// Rows of the 3 × 6 matrix for the `z` half.
const B0: [u8; 3] = [0b000110, 0b011000, 0b100000];

/// Which recursion a phase uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// `φ = 0`.
    First = 0,
    /// `φ = 2ψ + 1`.
    Odd = 1,
    /// `φ = 2ψ + 2`.
    Even = 2,
    /// `φ = n − 3`.
    Last = 3,
}

/// How a GPB or PB was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Recursion,
    Oracle,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Recursion => "recursion",
            Source::Oracle => "oracle",
        }
    }
}

impl Serialize for Source {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// `r = p·A0 + q·B0` as a 6-bit word, bit `k` = `r_k`.
#[inline]
fn combine_vectors(p: Vec3, q: Vec3) -> u8 {
    let mut r = 0;
    for (row, bit) in [(0, 4u8), (1, 2), (2, 1)] {
        if p.0 & bit != 0 {
            r ^= A0[row];
        }
        if q.0 & bit != 0 {
            r ^= B0[row];
        }
    }
    r
}

/// `(r_k, r_k+1, r_k+2)` as a 3-bit vector.
#[inline]
fn window(r: u8, k: u32) -> Vec3 {
    Vec3::from_bits(r >> k & 1 == 1, r >> (k + 1) & 1 == 1, r >> (k + 2) & 1 == 1)
}

/// The four transform tables, indexed by [`Slot`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformTables {
    slots: [SlotTable; 4],
}

impl TransformTables {
    pub fn build() -> Result<Self> {
        let mut slots = [[[0u8; COUNT]; COUNT]; 4];
        for (i, si) in Subspace3::all().enumerate() {
            for (j, sj) in Subspace3::all().enumerate() {
                let mut masks = [0u8; 4];
                for p in si.members() {
                    for q in sj.members() {
                        let r = combine_vectors(p, q);
                        masks[3] |= 1 << window(r, 3).0;
                        if r & 0b100000 == 0 {
                            masks[2] |= 1 << window(r, 2).0;
                        }
                        if r & 0b110000 == 0 {
                            masks[1] |= 1 << window(r, 1).0;
                        }
                        if r & 0b111000 == 0 {
                            masks[0] |= 1 << window(r, 0).0;
                        }
                    }
                }
                for (k, &mask) in masks.iter().enumerate() {
                    let s = Subspace3::from_mask(mask).ok_or_else(|| {
                        Error::Internal(format!(
                            "slot {k} image of ({i}, {j}) is not a subspace: {mask:#010b}"
                        ))
                    })?;
                    slots[k][i][j] = s.index() as u8;
                }
            }
        }
        Ok(Self { slots })
    }

    pub fn slot(&self, slot: Slot) -> &SlotTable {
        &self.slots[slot as usize]
    }

    pub fn get(&self, slot: Slot, i: usize, j: usize) -> usize {
        self.slots[slot as usize][i][j] as usize
    }
}

/// Generalized polarization behaviour: for each phase `φ ∈ [0, n−2)`, 16
/// weight enumerators indexed by subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gpb {
    n: usize,
    source: Source,
    phases: Vec<GpbRow>,
}

impl Gpb {
    pub fn new(n: usize, source: Source, phases: Vec<GpbRow>) -> Result<Self> {
        if n < 3 || phases.len() != n - 2 {
            return Err(Error::InvalidInput(format!(
                "a GPB of size {n} needs {} phases, got {}",
                n.saturating_sub(2),
                phases.len()
            )));
        }
        Ok(Self { n, source, phases })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn phases(&self) -> &[GpbRow] {
        &self.phases
    }

    pub fn phase(&self, phi: usize) -> &GpbRow {
        &self.phases[phi]
    }

    pub fn get(&self, phi: usize, s: Subspace3) -> &WeightEnum {
        &self.phases[phi][s.index()]
    }

    /// Checks `Σ_S P^(φ,S) = (1+x)^n` for every phase.
    pub fn boxes_conserved(&self) -> bool {
        let all = WeightEnum::all_subsets(self.n);
        self.phases.iter().all(|row| row.iter().sum::<WeightEnum>() == all)
    }
}

impl Serialize for Gpb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Gpb", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("phases", &self.phases)?;
        st.end()
    }
}

/// GPB of `Q(4)`.
pub fn gpb_base() -> Gpb {
    const PHASE0: [&str; COUNT] = [
        "x^4 + 4x^3", "0", "x^2", "x^2", "x^2", "x^2", "x^2", "x^2", "0", "0", "x", "x", "0", "x",
        "x", "1",
    ];
    const PHASE1: [&str; COUNT] = [
        "x^4", "0", "0", "x^3", "0", "x^3", "x^3", "x^3", "0", "x^2", "x^2", "x^2", "x^2", "x^2",
        "x^2", "4x + 1",
    ];
    let row = |src: &[&str; COUNT]| -> GpbRow { array::from_fn(|i| src[i].parse().expect("valid literal")) };
    Gpb {
        n: 4,
        source: Source::Recursion,
        phases: vec![row(&PHASE0), row(&PHASE1)],
    }
}

/// `out[l] = Σ_{T[i][j] = l} row[i] · row[j]`, one product per pair.
///
/// This is the direct form; [`gpb`] uses a packed equivalent.
pub fn combine(row: &GpbRow, table: &SlotTable) -> GpbRow {
    let mut out: GpbRow = array::from_fn(|_| WeightEnum::zero());
    for i in 0..COUNT {
        for j in 0..COUNT {
            let product = &row[i] * &row[j];
            out[table[i][j] as usize] += &product;
        }
    }
    out
}

/// A GPB phase stored as 16 Kronecker-packed integers.
type PackedRow = [BigUint; COUNT];

/// Smallest slot width, in 32-bit digits, holding every coefficient of a
/// size-`n` enumerator. Coefficients are at most `C(n, w) < 2^n`.
fn slot_width(n: usize) -> usize {
    (n + 1).div_ceil(32)
}

fn pack_row(row: &GpbRow, width: usize) -> PackedRow {
    array::from_fn(|i| row[i].pack(width))
}

fn unpack_row(row: &PackedRow, width: usize, n: usize) -> GpbRow {
    array::from_fn(|i| WeightEnum::unpack(&row[i], width, n + 1))
}

/// Moves each coefficient slot of `x` from `from` digits to `to` digits.
fn repack(x: &BigUint, from: usize, to: usize, slots: usize) -> BigUint {
    if from == to || x.is_zero() {
        return x.clone();
    }
    let digits = x.to_u32_digits();
    let mut out = vec![0u32; slots * to];
    for w in 0..slots {
        let lo = (w * from).min(digits.len());
        let hi = ((w + 1) * from).min(digits.len());
        let take = (hi - lo).min(to);
        out[w * to..w * to + take].copy_from_slice(&digits[lo..lo + take]);
    }
    BigUint::new(out)
}

/// A grouped evaluation plan for several slots sharing one input row.
///
/// For each "outer" index, the "inner" indices are grouped by the tuple of
/// output subspaces they map to; each group costs one multiplication.
struct Plan {
    /// `groups[outer]` = list of (inner indices, output index per slot).
    groups: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
}

impl Plan {
    fn new(tables: &[&SlotTable], live: &[bool; COUNT]) -> Self {
        let build = |outer_is_first: bool| {
            let groups: Vec<Vec<(Vec<usize>, Vec<usize>)>> = (0..COUNT)
                .map(|a| {
                    let mut g: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
                    if !live[a] {
                        return g;
                    }
                    for b in (0..COUNT).filter(|&b| live[b]) {
                        let (i, j) = if outer_is_first { (a, b) } else { (b, a) };
                        let key: Vec<usize> = tables.iter().map(|t| t[i][j] as usize).collect();
                        match g.iter_mut().find(|(_, k)| *k == key) {
                            Some((members, _)) => members.push(b),
                            None => g.push((vec![b], key)),
                        }
                    }
                    g
                })
                .collect();
            Plan { groups }
        };
        let by_i = build(true);
        let by_j = build(false);
        if by_j.cost() < by_i.cost() {
            by_j
        } else {
            by_i
        }
    }

    fn cost(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    fn run(&self, row: &PackedRow, outputs: usize) -> Vec<PackedRow> {
        let mut out: Vec<PackedRow> = (0..outputs).map(|_| array::from_fn(|_| BigUint::zero())).collect();
        for (a, groups) in self.groups.iter().enumerate() {
            for (members, key) in groups {
                let mut sum = row[members[0]].clone();
                for &b in &members[1..] {
                    sum += &row[b];
                }
                let product = &row[a] * &sum;
                for (slot_out, &l) in out.iter_mut().zip(key) {
                    slot_out[l] += &product;
                }
            }
        }
        out
    }
}

fn live_mask(row: &PackedRow) -> [bool; COUNT] {
    array::from_fn(|i| !row[i].is_zero())
}

/// One recursion level on packed rows: `prev` is the GPB of `Q(half)`;
/// `emit(φ, row)` receives the GPB rows of `Q(2·half)` (width `slot_width(2·half)`).
/// Rows are produced in chunks processed in parallel and emitted in order.
fn step_level<F>(tables: &TransformTables, prev: &[PackedRow], half: usize, mut emit: F)
where
    F: FnMut(usize, PackedRow),
{
    let n = 2 * half;
    let (w_in, w_out) = (slot_width(half), slot_width(n));
    let last_psi = half - 3;
    // Work items: ψ for the odd/even pair, plus the two boundary phases.
    #[derive(Clone, Copy)]
    enum Job {
        First,
        Pair(usize),
        Last,
    }
    let jobs: Vec<Job> = std::iter::once(Job::First)
        .chain((0..=last_psi).map(Job::Pair))
        .chain(std::iter::once(Job::Last))
        .collect();
    let chunk = rayon::current_num_threads().max(1) * 4;
    for batch in jobs.chunks(chunk) {
        let results: Vec<Vec<(usize, PackedRow)>> = batch
            .par_iter()
            .map(|&job| {
                let (psi, slots, phases): (usize, Vec<Slot>, Vec<usize>) = match job {
                    Job::First => (0, vec![Slot::First], vec![0]),
                    Job::Pair(psi) => (psi, vec![Slot::Odd, Slot::Even], vec![2 * psi + 1, 2 * psi + 2]),
                    Job::Last => (last_psi, vec![Slot::Last], vec![n - 3]),
                };
                let row: PackedRow = array::from_fn(|i| repack(&prev[psi][i], w_in, w_out, half + 1));
                let slot_tables: Vec<&SlotTable> = slots.iter().map(|&s| tables.slot(s)).collect();
                let plan = Plan::new(&slot_tables, &live_mask(&row));
                phases.into_iter().zip(plan.run(&row, slot_tables.len())).collect()
            })
            .collect();
        for (phi, row) in results.into_iter().flatten() {
            emit(phi, row);
        }
    }
}

fn check_level(m: u32) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("GPB recursion needs m >= 2, got {m}")));
    }
    if m >= usize::BITS - 2 {
        return Err(Error::InvalidInput(format!("level {m} is too large")));
    }
    Ok(())
}

/// Packed GPB of `Q(2^m)`, all phases.
fn packed_level(tables: &TransformTables, m: u32) -> Vec<PackedRow> {
    let base = gpb_base();
    let mut level: Vec<PackedRow> = base.phases.iter().map(|r| pack_row(r, slot_width(4))).collect();
    for lambda in 3..=m {
        let half = 1usize << (lambda - 1);
        let mut next: Vec<Option<PackedRow>> = vec![None; 2 * half - 2];
        step_level(tables, &level, half, |phi, row| {
            debug_assert!(next[phi].is_none(), "phase {phi} produced twice");
            next[phi] = Some(row);
        });
        level = next
            .into_iter()
            .map(|r| r.expect("every phase produced exactly once"))
            .collect();
    }
    level
}

/// GPB of `Q(2^m)` by recursion from the `Q(4)` base case.
pub fn gpb(m: u32) -> Result<Gpb> {
    let mut phases = Vec::new();
    gpb_stream(m, |phi, row| {
        debug_assert_eq!(phi, phases.len());
        phases.push(row);
    })?;
    Gpb::new(1 << m, Source::Recursion, phases)
}

/// Calls `visit(φ, row)` for every phase of the GPB of `Q(2^m)` in
/// increasing `φ`, without holding the whole top level in memory.
pub fn gpb_stream<F>(m: u32, mut visit: F) -> Result<()>
where
    F: FnMut(usize, GpbRow),
{
    check_level(m)?;
    if m == 2 {
        for (phi, row) in gpb_base().phases.into_iter().enumerate() {
            visit(phi, row);
        }
        return Ok(());
    }
    let tables = TransformTables::build()?;
    let prev = packed_level(&tables, m - 1);
    let n = 1usize << m;
    let width = slot_width(n);
    // rows arrive in order except that n−3 (the Last job) comes after all pairs,
    // and the pair jobs emit (2ψ+1, 2ψ+2) consecutively; buffer to restore order
    let mut pending: std::collections::BTreeMap<usize, PackedRow> = Default::default();
    let mut next_phi = 0;
    step_level(&tables, &prev, n / 2, |phi, row| {
        pending.insert(phi, row);
        while let Some(row) = pending.remove(&next_phi) {
            visit(next_phi, unpack_row(&row, width, n));
            next_phi += 1;
        }
    });
    if next_phi != n - 2 {
        return Err(Error::Internal(format!("emitted {next_phi} of {} phases", n - 2)));
    }
    Ok(())
}

/// Index of the half-level phase feeding phase `φ` of `Q(n)`:
/// `ψ = max(0, ⌊(φ−1)/2⌋)`, except `φ = n−3`, which reads `ψ = n/2 − 3`.
pub fn source_phase(phi: usize, n: usize) -> usize {
    if phi == n - 3 {
        n / 2 - 3
    } else {
        phi.saturating_sub(1) / 2
    }
}

/// Recursion slot used for phase `φ` of `Q(n)`, `n ≥ 8`.
pub fn slot_of(phi: usize, n: usize) -> Slot {
    match phi {
        0 => Slot::First,
        p if p == n - 3 => Slot::Last,
        p if p % 2 == 1 => Slot::Odd,
        _ => Slot::Even,
    }
}
