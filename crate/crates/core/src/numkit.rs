//! Dense real vectors and matrices plus a seeded random stream.
//!
//! Vectors are plain `[f64]` slices; matrices are row-major [`Matrix`]
//! values. Randomness flows through [`RandomStream`], which wraps ChaCha8
//! (via `rand_chacha`) so that a seed names a bit-exact, platform-independent
//! sequence. Child streams are derived with [`RandomStream::split`] instead of
//! being shared.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "MatrixRepr", into = "MatrixRepr"))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Serialized form: a list of rows.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
struct MatrixRepr(Vec<Vec<f64>>);

#[cfg(feature = "serde")]
impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        Matrix::from_rows(&repr.0)
    }
}

#[cfg(feature = "serde")]
impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr(m.to_rows())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims("Matrix::from_vec", rows * cols, data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::dims("Matrix::from_rows", cols, row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Elementwise product of two equally shaped matrices.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other, "mat_hadamard")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `A v`, accumulated left to right along each row starting from `0.0`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::dims("matvec", self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0.0, |acc, (a, x)| acc + a * x)
            })
            .collect())
    }

    /// `Aᵀ v`.
    pub fn matvec_transposed(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::dims("matvec_transposed", self.rows, v.len()));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|w| *w *= factor);
    }

    pub(crate) fn check_same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        if self.rows != other.rows {
            return Err(Error::dims(op, self.rows, other.rows));
        }
        if self.cols != other.cols {
            return Err(Error::dims(op, self.cols, other.cols));
        }
        Ok(())
    }
}

fn check_len(op: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dims(op, a.len(), b.len()));
    }
    Ok(())
}

/// Elementwise (Hadamard) product.
pub fn hadamard(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len("hadamard", a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

pub fn add(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_len("add", a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| x + y).collect())
}

pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn l2_norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    check_len("dot", a, b)?;
    Ok(a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y))
}

/// Mean and sample standard deviation; `(0, 0)` for fewer than two values.
pub fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64))
}

/// Distribution of a noise or mask entry.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Dist {
    Gaussian { mean: f64, stddev: f64 },
    /// `p` is the probability of drawing `1.0`.
    Bernoulli { p: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Dist {
    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        let d = Dist::Gaussian { mean, stddev };
        d.validate().map(|_| d)
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        let d = Dist::Bernoulli { p };
        d.validate().map(|_| d)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let d = Dist::Uniform { lo, hi };
        d.validate().map(|_| d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Dist::Gaussian { mean, stddev } => {
                if !mean.is_finite() || !(stddev >= 0.0) || !stddev.is_finite() {
                    return Err(Error::param("gaussian", "need finite mean and stddev >= 0"));
                }
            }
            Dist::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param("bernoulli", "need 0 <= p <= 1"));
                }
            }
            Dist::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo > hi {
                    return Err(Error::param("uniform", "need finite lo <= hi"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Gaussian { mean, .. } => mean,
            Dist::Bernoulli { p } => p,
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Dist::Gaussian { stddev, .. } => stddev * stddev,
            Dist::Bernoulli { p } => p * (1.0 - p),
            Dist::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
        }
    }

    fn draw(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            Dist::Gaussian { mean, stddev } => mean + stddev * stream.standard_normal(),
            Dist::Bernoulli { p } => {
                if stream.uniform() < p {
                    1.0
                } else {
                    0.0
                }
            }
            Dist::Uniform { lo, hi } => lo + (hi - lo) * stream.uniform(),
        }
    }
}

/// Draws `n` independent values from `dist`.
pub fn sample(dist: &Dist, n: usize, stream: &mut RandomStream) -> Result<Vec<f64>> {
    dist.validate()?;
    Ok((0..n).map(|_| dist.draw(stream)).collect())
}

/// Deterministic random source.
///
/// * `next_u64` is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
/// * `uniform` takes the top 53 bits: `(u >> 11) · 2⁻⁵³`, in `[0, 1)`.
/// * `standard_normal` is the Marsaglia polar method on pairs of uniforms
///   mapped to `(-1, 1)`; the second variate of each accepted pair is
///   discarded so every normal draw starts from a fresh pair.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream keyed by `(seed, label)`; independent of how far this
    /// stream has advanced.
    pub fn split(&self, label: &str) -> RandomStream {
        RandomStream::new(splitmix64(self.seed ^ splitmix64(fnv1a(label.as_bytes()))))
    }

    /// Child stream keyed by `(seed, index)`.
    pub fn split_index(&self, index: u64) -> RandomStream {
        RandomStream::new(splitmix64(
            self.seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)),
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * libm::sqrt(-2.0 * libm::log(s) / s);
            }
        }
    }

    /// Uniform index in `0..n` (`n > 0`), by rejection to avoid modulo bias.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}
