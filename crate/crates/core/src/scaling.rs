//! BEC scaling exponent by power iteration of the polarization operator
//! `(Tg)(z) = (1/n) Σ_i g(f_i(z))` on functions vanishing at 0 and 1.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pb::Pb;
use crate::weight_enum::big_ln;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
    Cubic,
}

impl FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "cubic" => Ok(Self::Cubic),
            other => Err(Error::InvalidInput(format!("unknown interpolation {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingConfig {
    pub grid_size: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub interpolation: Interpolation,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { grid_size: 4096, max_iters: 10_000, tol: 1e-9, interpolation: Interpolation::Cubic }
    }
}

impl ScalingConfig {
    pub const MIN_GRID: usize = 256;

    pub fn validate(&self) -> Result<()> {
        if self.grid_size < Self::MIN_GRID {
            return Err(Error::InvalidInput(format!(
                "grid size {} below {}",
                self.grid_size,
                Self::MIN_GRID
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance {} must be positive", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingResult {
    pub mu: f64,
    pub lambda: f64,
    /// Eigenvalue read out as `<g, Tg> / <g, g>` on the final iterate.
    pub lambda_rayleigh: f64,
    pub iters_used: usize,
    pub converged: bool,
}

impl ScalingResult {
    /// Result JSON with floats rounded to 6 significant digits.
    pub fn to_json(&self, pb: &Pb, cfg: &ScalingConfig) -> serde_json::Value {
        serde_json::json!({
            "n": pb.n(),
            "family": pb.family().as_str(),
            "mu": sig6(self.mu),
            "lambda": sig6(self.lambda),
            "iters": self.iters_used,
            "converged": self.converged,
            "grid": cfg.grid_size,
            "tol": cfg.tol,
        })
    }
}

pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Erasure functions `f_i(z) = Σ_w A_w z^w (1−z)^(n−w)` of the subchannels.
#[derive(Clone, Debug)]
pub struct SubchannelFns {
    n: usize,
    /// `A_w / C(n, w)` per phase, each in `[0, 1]`.
    scaled: Vec<Vec<f64>>,
}

fn ln_binomials(n: usize) -> Vec<f64> {
    let mut lnfact = vec![0.0f64; n + 1];
    for k in 1..=n {
        lnfact[k] = lnfact[k - 1] + (k as f64).ln();
    }
    (0..=n).map(|w| lnfact[n] - lnfact[w] - lnfact[n - w]).collect()
}

/// Bernstein basis `C(n,w) z^w (1−z)^(n−w)` for `w = 0..=n`.
fn bernstein(n: usize, z: f64, ln_binom: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if z <= 0.0 {
        out[0] = 1.0;
    } else if z >= 1.0 {
        out[n] = 1.0;
    } else {
        let (lz, l1z) = (z.ln(), (-z).ln_1p());
        for (w, b) in out.iter_mut().enumerate() {
            *b = (ln_binom[w] + w as f64 * lz + (n - w) as f64 * l1z).exp();
        }
    }
    out
}

impl SubchannelFns {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, i: usize, z: f64) -> f64 {
        let b = bernstein(self.n, z, &ln_binomials(self.n));
        dot(&self.scaled[i], &b)
    }

    /// All `f_i(z)` for one `z`.
    pub fn eval_all(&self, z: f64) -> Vec<f64> {
        let b = bernstein(self.n, z, &ln_binomials(self.n));
        self.scaled.iter().map(|a| dot(a, &b)).collect()
    }

    /// `f_i(z_k)` for every grid point, laid out `[k][i]`.
    fn tabulate(&self, grid: &[f64]) -> Vec<Vec<f64>> {
        let ln_binom = ln_binomials(self.n);
        grid.par_iter()
            .map(|&z| {
                let b = bernstein(self.n, z, &ln_binom);
                self.scaled.iter().map(|a| dot(a, &b).clamp(0.0, 1.0)).collect()
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn subchannel_fns(pb: &Pb) -> SubchannelFns {
    let n = pb.n();
    let ln_binom = ln_binomials(n);
    let scaled = pb
        .polys()
        .iter()
        .map(|p| {
            (0..=n)
                .map(|w| {
                    let a = p.coeff(w);
                    if a.bits() == 0 {
                        0.0
                    } else {
                        (big_ln(&a) - ln_binom[w]).exp()
                    }
                })
                .collect()
        })
        .collect();
    SubchannelFns { n, scaled }
}

/// Samples of `g` on a uniform grid of `[0, 1]`, read back by interpolation.
struct Interpolant<'a> {
    values: &'a [f64],
    slopes: Vec<f64>,
    step: f64,
    cubic: bool,
}

impl<'a> Interpolant<'a> {
    fn new(values: &'a [f64], kind: Interpolation) -> Self {
        let step = 1.0 / (values.len() - 1) as f64;
        let cubic = kind == Interpolation::Cubic;
        let slopes = if cubic { pchip_slopes(values, step) } else { Vec::new() };
        Self { values, slopes, step, cubic }
    }

    fn at(&self, x: f64) -> f64 {
        let last = self.values.len() - 1;
        let pos = x * last as f64;
        let j = (pos.floor() as usize).min(last - 1);
        let t = pos - j as f64;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        if !self.cubic {
            return y0 + t * (y1 - y0);
        }
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * y0 + h10 * self.step * self.slopes[j] + h01 * y1 + h11 * self.step * self.slopes[j + 1]
    }
}

/// Fritsch–Carlson slopes: the interpolant is monotone wherever the data are.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let k = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut d = vec![0.0; k];
    for i in 1..k - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a * b > 0.0 {
            d[i] = 2.0 / (1.0 / a + 1.0 / b);
        }
    }
    let end = |d0: f64, d1: f64| {
        let s = (3.0 * d0 - d1) / 2.0;
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(delta[0], delta[1]);
    d[k - 1] = end(delta[k - 2], delta[k - 3]);
    d
}

fn apply(points: &[Vec<f64>], g: &[f64], kind: Interpolation) -> Vec<f64> {
    let interp = Interpolant::new(g, kind);
    let last = g.len() - 1;
    let mut out: Vec<f64> = points
        .par_iter()
        .map(|fs| fs.iter().map(|&x| interp.at(x)).sum::<f64>() / fs.len() as f64)
        .collect();
    out[0] = 0.0;
    out[last] = 0.0;
    out
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Scaling exponent `μ = ln n / ln(1/λ)` where `λ` is the dominant
/// eigenvalue of the polarization operator.
pub fn scaling_exponent(pb: &Pb, cfg: &ScalingConfig) -> Result<ScalingResult> {
    cfg.validate()?;
    let n = pb.n();
    if n < 2 {
        return Err(Error::InvalidInput("scaling exponent needs n >= 2".into()));
    }
    let grid: Vec<f64> = (0..cfg.grid_size).map(|k| k as f64 / (cfg.grid_size - 1) as f64).collect();
    let points = subchannel_fns(pb).tabulate(&grid);

    let mut g: Vec<f64> = grid.iter().map(|z| z * (1.0 - z)).collect();
    let norm = sup_norm(&g);
    g.iter_mut().for_each(|v| *v /= norm);

    let mut lambda = f64::NAN;
    let mut converged = false;
    let mut iters_used = 0;
    for k in 1..=cfg.max_iters {
        let tg = apply(&points, &g, cfg.interpolation);
        let next = sup_norm(&tg);
        if next == 0.0 || !next.is_finite() {
            return Err(Error::Internal("operator iterate collapsed to zero".into()));
        }
        g = tg.into_iter().map(|v| v / next).collect();
        iters_used = k;
        let delta = (next - lambda).abs();
        lambda = next;
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let tg = apply(&points, &g, cfg.interpolation);
    let lambda_rayleigh = dot(&g, &tg) / dot(&g, &g);
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Internal(format!("eigenvalue {lambda} outside (0, 1)")));
    }
    let mu = (n as f64).ln() / (1.0 / lambda).ln();
    Ok(ScalingResult { mu, lambda, lambda_rayleigh, iters_used, converged })
}
