//! Dense complex matrices.
//!
//! Storage is always dense and row-major. Products skip zero entries of the
//! left operand and restrict each row of the right operand to its nonzero
//! span, so the exact zeros produced by excitation-number conservation cost
//! little; for a generic dense matrix this is an ordinary triple loop.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `None` unless `entries.len()` is a square.
    pub fn from_row_major(entries: Vec<C64>) -> Option<Self> {
        let dim = isqrt(entries.len());
        (dim * dim == entries.len()).then_some(Self { dim, data: entries })
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal vectors");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| self.data[j * n + i].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul of unequal dimensions");
        let mut out = Self::zeros(self.dim);
        gemm_acc(ONE, self, &RowSpans::of(self), rhs, &RowSpans::of(rhs), &mut out);
        out
    }

    /// `[self, rhs] = self·rhs − rhs·self`
    pub fn commutator(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "commutator of unequal dimensions");
        let a = RowSpans::of(self);
        let b = RowSpans::of(rhs);
        let mut out = Self::zeros(self.dim);
        gemm_acc(ONE, self, &a, rhs, &b, &mut out);
        gemm_acc(-ONE, rhs, &b, self, &a, &mut out);
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len(), "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `self += alpha · x`
    pub fn axpy(&mut self, alpha: C64, x: &Self) {
        assert_eq!(self.dim, x.dim, "axpy of unequal dimensions");
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += alpha * x;
        }
    }

    pub fn scale(&mut self, s: C64) {
        for y in &mut self.data {
            *y *= s;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_ij |A_ij − conj(A_ji)|`
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Replaces `self` with `self + self†`, which is Hermitian bit for bit.
    ///
    /// Only entries inside `spans` are visited; the pattern must be symmetric
    /// and contain the diagonal.
    pub(crate) fn add_adjoint_within(&mut self, spans: &RowSpans) {
        let n = self.dim;
        for i in 0..n {
            let d = self.data[i * n + i];
            self.data[i * n + i] = C64::new(2.0 * d.re, 0.0);
            let (_, hi) = spans.get(i);
            for j in (i + 1)..hi {
                let upper = self.data[i * n + j];
                let lower = self.data[j * n + i];
                let s = upper + lower.conj();
                self.data[i * n + j] = s;
                self.data[j * n + i] = s.conj();
            }
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.axpy(ONE, rhs);
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.axpy(-ONE, rhs);
        out
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: C64) -> CMatrix {
        let mut out = self.clone();
        out.scale(rhs);
        out
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self * -ONE
    }
}

/// Per-row `[lo, hi)` column range holding all nonzero entries.
///
/// In a basis sorted by excitation number, operators of definite charge are
/// block-shaped, so each span covers exactly one block.
#[derive(Clone, Debug, Default)]
pub(crate) struct RowSpans {
    lo: Vec<u32>,
    hi: Vec<u32>,
}

impl RowSpans {

    /// Every row spans all columns.
    pub(crate) fn full(dim: usize) -> Self {
        Self { lo: alloc::vec![0; dim], hi: alloc::vec![dim as u32; dim] }
    }

    pub(crate) fn from_ranges(ranges: impl Iterator<Item = (usize, usize)>) -> Self {
        let (lo, hi) = ranges.map(|(lo, hi)| (lo as u32, hi as u32)).unzip();
        Self { lo, hi }
    }

    /// Spans found by scanning for nonzero entries.
    pub(crate) fn of(m: &CMatrix) -> Self {
        let n = m.dim;
        let mut s = Self { lo: Vec::with_capacity(n), hi: Vec::with_capacity(n) };
        for i in 0..n {
            let row = &m.data[i * n..(i + 1) * n];
            match row.iter().position(|z| *z != ZERO) {
                Some(lo) => {
                    let hi = n - row.iter().rev().position(|z| *z != ZERO).unwrap_or(0);
                    s.lo.push(lo as u32);
                    s.hi.push(hi as u32);
                }
                None => {
                    s.lo.push(0);
                    s.hi.push(0);
                }
            }
        }
        s
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> (usize, usize) {
        (self.lo[i] as usize, self.hi[i] as usize)
    }
}

/// `out += alpha · a · b`, visiting only the row spans of both operands.
pub(crate) fn gemm_acc(alpha: C64, a: &CMatrix, a_spans: &RowSpans, b: &CMatrix, b_spans: &RowSpans, out: &mut CMatrix) {
    let n = out.dim;
    debug_assert!(a.dim == n && b.dim == n);
    for i in 0..n {
        let (a_lo, a_hi) = a_spans.get(i);
        let a_row = &a.data[i * n + a_lo..i * n + a_hi];
        let out_row = &mut out.data[i * n..(i + 1) * n];
        for (k, &a_ik) in (a_lo..a_hi).zip(a_row) {
            if a_ik == ZERO {
                continue;
            }
            let s = alpha * a_ik;
            let (lo, hi) = b_spans.get(k);
            axpy_row(s, &b.data[k * n + lo..k * n + hi], &mut out_row[lo..hi]);
        }
    }
}

/// `dst += s · src`
#[inline(always)]
fn axpy_row(s: C64, src: &[C64], dst: &mut [C64]) {
    debug_assert_eq!(src.len(), dst.len());
    #[cfg(target_arch = "x86_64")]
    // SAFETY: SSE2 is part of the x86_64 baseline, and each pointer addresses
    // one `repr(C)` `Complex<f64>`, i.e. two consecutive f64s.
    unsafe {
        use core::arch::x86_64::*;
        let re = _mm_set1_pd(s.re);
        let im = _mm_set_pd(s.im, -s.im);
        for (d, x) in dst.iter_mut().zip(src) {
            let d = (d as *mut C64).cast::<f64>();
            let v = _mm_loadu_pd((x as *const C64).cast());
            let swapped = _mm_shuffle_pd::<1>(v, v);
            let prod = _mm_add_pd(_mm_mul_pd(re, v), _mm_mul_pd(im, swapped));
            _mm_storeu_pd(d, _mm_add_pd(_mm_loadu_pd(d), prod));
        }
    }
    #[cfg(not(target_arch = "x86_64"))]
    for (d, x) in dst.iter_mut().zip(src) {
        *d += s * x;
    }
}

fn isqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
