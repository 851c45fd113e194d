//! Polarization behaviour (PB): per phase, the weight enumerator of erasure
//! configurations after which `u_φ` cannot be recovered. Converted here from
//! the GPB, and reduced to partial distances and the polarization rate.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gpb::{self, Gpb, GpbRow, Source};
use crate::kernels::{self, Family};
use crate::oracle::{self, OracleOptions};
use crate::subspaces::{Subspace3, Vec3};
use crate::weight_enum::WeightEnum;

const V100: Vec3 = Vec3(0b100);
const V010: Vec3 = Vec3(0b010);
const V110: Vec3 = Vec3(0b110);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pb {
    n: usize,
    family: Family,
    source: Source,
    polys: Vec<WeightEnum>,
}

impl Pb {
    pub fn new(n: usize, family: Family, source: Source, polys: Vec<WeightEnum>) -> Result<Self> {
        if polys.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: polys.len() });
        }
        if let Some(phi) = polys.iter().position(|p| p.degree().is_some_and(|d| d > n)) {
            return Err(Error::InvalidInput(format!("phase {phi} has degree above {n}")));
        }
        Ok(Self { n, family, source, polys })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn polys(&self) -> &[WeightEnum] {
        &self.polys
    }

    pub fn poly(&self, phi: usize) -> &WeightEnum {
        &self.polys[phi]
    }

    /// Same enumerators, different provenance tags; for comparing routes.
    pub fn same_polys(&self, other: &Pb) -> bool {
        self.n == other.n && self.polys == other.polys
    }

    /// CSV `phase,weight,count` with a header row; zero counts omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,weight,count\n");
        for (phi, p) in self.polys.iter().enumerate() {
            for (w, c) in p.coeffs().iter().enumerate() {
                if c.bits() > 0 {
                    let _ = writeln!(out, "{phi},{w},{c}");
                }
            }
        }
        out
    }
}

impl Serialize for Pb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Pb", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("family", self.family.as_str())?;
        st.serialize_field("source", &self.source)?;
        st.serialize_field("phases", &self.polys)?;
        st.end()
    }
}

fn sum_where(row: &GpbRow, keep: impl Fn(Subspace3) -> bool) -> WeightEnum {
    Subspace3::all().filter(|&s| keep(s)).map(|s| &row[s.index()]).sum()
}

/// Subspaces without `100`: `u_φ` itself is not recoverable.
fn erases_first(row: &GpbRow) -> WeightEnum {
    sum_where(row, |s| !s.contains(V100))
}

/// Subspaces without `a10` for any `a`: `u_φ+1` unrecoverable once `u_φ` is known.
fn erases_second(row: &GpbRow) -> WeightEnum {
    sum_where(row, |s| !s.contains(V010) && !s.contains(V110))
}

/// Subspaces without `ab1`: `u_φ+2` unrecoverable once `u_φ, u_φ+1` are known.
fn erases_third(row: &GpbRow) -> WeightEnum {
    sum_where(row, |s| s.members().all(|v| v.0 & 1 == 0))
}

/// Builds a PB from GPB rows arriving in phase order.
struct PbAssembler {
    n: usize,
    swapped: bool,
    polys: Vec<Option<WeightEnum>>,
}

impl PbAssembler {
    fn new(n: usize, swapped: bool) -> Self {
        Self { n, swapped, polys: vec![None; n] }
    }

    fn in_swap_range(&self, phi: usize) -> bool {
        self.swapped && phi >= 4 && phi + 4 < self.n
    }

    fn feed(&mut self, phi: usize, row: &GpbRow) {
        let n = self.n;
        if self.in_swap_range(phi) {
            if phi.is_multiple_of(2) {
                // rows 2i and 2i+1 are exchanged: the new 2i-th symbol is the old
                // (2i+1)-th, and the new (2i+1)-th is the old 2i-th with the old
                // (2i+1)-th already known
                self.polys[phi] = Some(sum_where(row, |s| !s.contains(V010)));
                self.polys[phi + 1] = Some(sum_where(row, |s| !s.contains(V100) && !s.contains(V110)));
            }
        } else {
            self.polys[phi] = Some(erases_first(row));
        }
        if phi == n - 3 {
            self.polys[n - 2] = Some(erases_second(row));
            self.polys[n - 1] = Some(erases_third(row));
        }
    }

    fn finish(self, family: Family) -> Result<Pb> {
        let polys = self
            .polys
            .into_iter()
            .enumerate()
            .map(|(phi, p)| p.ok_or_else(|| Error::Internal(format!("phase {phi} never produced"))))
            .collect::<Result<Vec<_>>>()?;
        Pb::new(self.n, family, Source::Recursion, polys)
    }
}

/// PB of the kernel whose GPB is `g`.
pub fn pb_from_gpb(g: &Gpb) -> Result<Pb> {
    let mut asm = PbAssembler::new(g.n(), false);
    for (phi, row) in g.phases().iter().enumerate() {
        asm.feed(phi, row);
    }
    asm.finish(Family::Cvpk)
}

/// PB of the row-swapped kernel, from the GPB of `Q(n)`.
pub fn pb_swapped_from_gpb(g: &Gpb) -> Result<Pb> {
    let mut asm = PbAssembler::new(g.n(), true);
    for (phi, row) in g.phases().iter().enumerate() {
        asm.feed(phi, row);
    }
    asm.finish(Family::CvpkSwapped)
}

/// PB of `Q(2^m)` (or its row-swapped variant) streamed from the recursion,
/// without materializing the top GPB level.
pub fn pb_cvpk(m: u32, swapped: bool) -> Result<Pb> {
    pb_cvpk_with_progress(m, swapped, |_| {})
}

/// As [`pb_cvpk`], calling `progress(φ)` as each top-level phase arrives.
pub fn pb_cvpk_with_progress(m: u32, swapped: bool, mut progress: impl FnMut(usize)) -> Result<Pb> {
    let n = 1usize << m;
    let mut asm = PbAssembler::new(n, swapped);
    gpb::gpb_stream(m, |phi, row| {
        asm.feed(phi, &row);
        progress(phi);
    })?;
    asm.finish(if swapped { Family::CvpkSwapped } else { Family::Cvpk })
}

/// Both PBs of `Q(2^m)` and its row-swapped variant from one recursion run.
pub fn pb_cvpk_pair(m: u32) -> Result<(Pb, Pb)> {
    let n = 1usize << m;
    let mut plain = PbAssembler::new(n, false);
    let mut swapped = PbAssembler::new(n, true);
    gpb::gpb_stream(m, |phi, row| {
        plain.feed(phi, &row);
        swapped.feed(phi, &row);
    })?;
    Ok((plain.finish(Family::Cvpk)?, swapped.finish(Family::CvpkSwapped)?))
}

/// PB of the `family` kernel of size `n`, by the cheapest exact route:
/// the recursion for `Q(n)` and its swapped variant, enumeration otherwise.
pub fn compute(family: Family, n: usize, opts: &OracleOptions) -> Result<Pb> {
    let m = kernels::log2_exact(n)?;
    match family {
        Family::Cvpk | Family::CvpkSwapped if n >= 4 => pb_cvpk(m, family == Family::CvpkSwapped),
        Family::Custom => Err(Error::InvalidInput("custom kernels go through the oracle directly".into())),
        _ => oracle::pb_oracle(&kernels::Kernel::build(family, n)?, opts),
    }
}

/// Partial distances `d_0..d_{n-1}` and the polarization rate
/// `E = (1/n) Σ log_n d_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialDistanceProfile {
    pub d: Vec<usize>,
    pub rate: f64,
}

impl PartialDistanceProfile {
    /// `"d = 1 2 2 4; E = 0.50000"`.
    pub fn summary(&self) -> String {
        let d: Vec<String> = self.d.iter().map(usize::to_string).collect();
        format!("d = {}; E = {:.5}", d.join(" "), self.rate)
    }

    /// CSV `phase,d_i` followed by a scalar `E` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,d_i\n");
        for (phi, d) in self.d.iter().enumerate() {
            let _ = writeln!(out, "{phi},{d}");
        }
        let _ = writeln!(out, "E,{:.5}", self.rate);
        out
    }
}

/// `d_i` is the least weight of a configuration erasing `u_i`.
pub fn partial_distances(pb: &Pb) -> Result<PartialDistanceProfile> {
    let n = pb.n();
    if n < 2 {
        return Err(Error::InvalidInput("polarization rate needs n >= 2".into()));
    }
    let d = pb
        .polys()
        .iter()
        .enumerate()
        .map(|(phi, p)| {
            p.min_weight()
                .ok_or_else(|| Error::Internal(format!("phase {phi} enumerator is zero; kernel not invertible?")))
        })
        .collect::<Result<Vec<_>>>()?;
    // summed over distinct values in ascending order, so that any reordering
    // of the rows gives a bit-identical rate
    let mut counts = std::collections::BTreeMap::new();
    for &di in &d {
        *counts.entry(di).or_insert(0usize) += 1;
    }
    let ln_n = (n as f64).ln();
    let rate = counts.iter().map(|(&di, &c)| c as f64 * (di as f64).ln()).sum::<f64>() / ln_n / n as f64;
    Ok(PartialDistanceProfile { d, rate })
}

/// Whether `d_2i ≥ d_2i+1` for `i = 2..n/2-3`, the condition under which
/// the row swap cannot lower the polarization rate.
pub fn check_swap_precondition(profile: &PartialDistanceProfile) -> bool {
    let n = profile.d.len();
    (2..(n / 2).saturating_sub(2)).all(|i| profile.d[2 * i] >= profile.d[2 * i + 1])
}
