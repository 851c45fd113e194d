//! Kernel constructions: the convolutional polarizing transformation `Q(n)`,
//! its row-permuted variants, and Arikan's `F^{⊗m}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

/// Row order of the distance-sorted kernel of size 16: row `i` of the sorted
/// kernel is row `PI_16[i]` of `Q(16)`.
pub const PI_16: [usize; 16] = [0, 1, 2, 3, 5, 4, 7, 6, 10, 8, 11, 9, 12, 13, 14, 15];

/// Row order of the distance-sorted kernel of size 32.
pub const PI_32: [usize; 32] = [
    0, 1, 2, 3, 6, 4, 9, 7, 13, 5, 20, 8, 14, 11, 18, 15, 16, 10, 23, 19, 24, 12, 26, 17, 25, 21,
    27, 22, 28, 29, 30, 31,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `Q(n)`.
    Cvpk,
    /// `Q(n)` with rows `2i` and `2i+1` exchanged for `i = 2..n/2-3`.
    CvpkSwapped,
    /// `Q(n)` with rows sorted by partial distance (sizes 16 and 32 only).
    CvpkSorted,
    /// `F^{⊗m}` with `F = [[1,0],[1,1]]`.
    Arikan,
    /// Any other invertible matrix; analysed by enumeration only.
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Cvpk => "cvpk",
            Family::CvpkSwapped => "cvpk-swapped",
            Family::CvpkSorted => "cvpk-sorted",
            Family::Arikan => "arikan",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "cvpk" => Family::Cvpk,
            "cvpk-swapped" => Family::CvpkSwapped,
            "cvpk-sorted" => Family::CvpkSorted,
            "arikan" | "arikan-power" => Family::Arikan,
            other => return Err(Error::InvalidInput(format!("unknown kernel family {other:?}"))),
        })
    }
}

/// An invertible `n × n` binary matrix with its construction metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    matrix: BitMatrix,
    family: Family,
    permutation: Option<Vec<usize>>,
}

impl Kernel {
    /// Wraps an arbitrary square matrix, checking invertibility.
    pub fn custom(matrix: BitMatrix) -> Result<Self> {
        Self::checked(matrix, Family::Custom, None)
    }

    fn checked(matrix: BitMatrix, family: Family, permutation: Option<Vec<usize>>) -> Result<Self> {
        if matrix.rows() != matrix.cols() || matrix.rows() == 0 {
            return Err(Error::InvalidInput(format!(
                "kernel must be square and nonempty, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.rank() != matrix.rows() {
            return Err(Error::InvalidInput("kernel matrix is singular".into()));
        }
        Ok(Self {
            matrix,
            family,
            permutation,
        })
    }

    /// Builds the kernel of `family` with `n` rows.
    pub fn build(family: Family, n: usize) -> Result<Self> {
        match family {
            Family::Cvpk => cvpk(n),
            Family::CvpkSwapped => swapped_cvpk(n),
            Family::CvpkSorted => sorted_cvpk(n),
            Family::Arikan => arikan_power(log2_exact(n)?),
            Family::Custom => Err(Error::InvalidInput("custom kernels need an explicit matrix".into())),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Row permutation applied to the `Q(n)` base, if any.
    pub fn permutation(&self) -> Option<&[usize]> {
        self.permutation.as_deref()
    }

    /// One `'0'`/`'1'` string per row.
    pub fn row_strings(&self) -> Vec<String> {
        (0..self.n()).map(|r| self.matrix.row(r).to_string()).collect()
    }

    pub fn to_text(&self) -> String {
        self.matrix.to_string()
    }

    /// JSON array of row strings.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.row_strings()).expect("strings serialize")
    }
}

/// `m` with `n = 2^m`.
pub fn log2_exact(n: usize) -> Result<u32> {
    if n.is_power_of_two() {
        Ok(n.trailing_zeros())
    } else {
        Err(Error::InvalidInput(format!("size {n} is not a power of two")))
    }
}

/// The `l × l/2` banded transition matrices `(X(l), Z(l))`.
///
/// Column `j` of `X` has ones in rows `2j, 2j+1, 2j+2`; column `j` of `Z`
/// has ones in rows `2j+1, 2j+2` (rows past `l-1` are dropped).
pub fn xz_matrices(l: usize) -> Result<(BitMatrix, BitMatrix)> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "transition matrices need a positive even size, got {l}"
        )));
    }
    let mut x = BitMatrix::zeros(l, l / 2);
    let mut z = BitMatrix::zeros(l, l / 2);
    for j in 0..l / 2 {
        for i in (2 * j..=2 * j + 2).filter(|&i| i < l) {
            x.set(i, j, true);
            if i > 2 * j {
                z.set(i, j, true);
            }
        }
    }
    Ok((x, z))
}

fn cvpk_matrix(n: usize) -> Result<BitMatrix> {
    log2_exact(n)?;
    let mut q = BitMatrix::identity(1);
    let mut size = 1;
    while size < n {
        size *= 2;
        let (x, z) = xz_matrices(size)?;
        q = x.mul(&q)?.hconcat(&z.mul(&q)?)?;
    }
    Ok(q)
}

/// The convolutional polarizing transformation `Q(n) = (X(n) Q(n/2), Z(n) Q(n/2))`, `Q(1) = (1)`.
pub fn cvpk(n: usize) -> Result<Kernel> {
    Kernel::checked(cvpk_matrix(n)?, Family::Cvpk, None)
}

/// Row permutation exchanging `2i` and `2i+1` for `i = 2..n/2-3`.
pub fn swap_permutation(n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 2..(n / 2).saturating_sub(2) {
        perm.swap(2 * i, 2 * i + 1);
    }
    perm
}

/// `Q(n)` with rows `2i` and `2i+1` exchanged for `i = 2..n/2-3`.
///
/// For `n < 16` the range is empty and the result equals `Q(n)`.
pub fn swapped_cvpk(n: usize) -> Result<Kernel> {
    let base = cvpk_matrix(n)?;
    let perm = swap_permutation(n);
    let matrix = base.permute_rows(&perm)?;
    Kernel::checked(matrix, Family::CvpkSwapped, Some(perm))
}

/// `Q(n)` with the published distance-sorted row order; `n ∈ {16, 32}`.
pub fn sorted_cvpk(n: usize) -> Result<Kernel> {
    let perm: &[usize] = match n {
        16 => &PI_16,
        32 => &PI_32,
        _ => {
            return Err(Error::InvalidInput(format!(
                "sorted kernel is only defined for sizes 16 and 32, got {n}"
            )))
        }
    };
    let matrix = cvpk_matrix(n)?.permute_rows(perm)?;
    Kernel::checked(matrix, Family::CvpkSorted, Some(perm.to_vec()))
}

/// Arikan's `F^{⊗m}`, of size `2^m`.
pub fn arikan_power(m: u32) -> Result<Kernel> {
    if m == 0 {
        return Err(Error::InvalidInput("Kronecker power must be at least 1".into()));
    }
    let f = BitMatrix::parse_rows(&["10", "11"])?;
    let mut out = f.clone();
    for _ in 1..m {
        out = out.kron(&f);
    }
    Kernel::checked(out, Family::Arikan, None)
}
