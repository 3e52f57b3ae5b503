//! Closed-form count of order-R L-tromino tilings of an `M^ x N^` rectangle (in units of
//! the tile side) through a recursively built transfer matrix.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest supported `M^`; the matrix has dimension `2^M^`.
pub const MAX_SIDE: u32 = 20;

/// Sparse square matrix with exact non-negative integer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMatrix {
    dim: usize,
    /// Row-wise `(column, value)` pairs, columns ascending, no explicit zeros.
    rows: Vec<Vec<(u32, BigUint)>>,
}

impl TransferMatrix {
    fn zero(dim: usize) -> Self {
        TransferMatrix {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    fn scalar(value: u32) -> Self {
        let mut m = Self::zero(1);
        if value != 0 {
            m.rows[0].push((0, BigUint::from(value)));
        }
        m
    }

    pub fn identity(dim: usize) -> Self {
        TransferMatrix {
            dim,
            rows: (0..dim).map(|i| vec![(i as u32, BigUint::one())]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> BigUint {
        self.rows[row]
            .binary_search_by_key(&(col as u32), |(c, _)| *c)
            .map(|k| self.rows[row][k].1.clone())
            .unwrap_or_default()
    }

    pub fn to_dense(&self) -> Vec<Vec<BigUint>> {
        (0..self.dim).map(|r| (0..self.dim).map(|c| self.get(r, c)).collect()).collect()
    }

    fn scaled(&self, k: u32) -> Self {
        TransferMatrix {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|(c, v)| (*c, v * k)).collect())
                .collect(),
        }
    }

    /// `[[a, b], [c, d]]` from four equally sized blocks.
    fn blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let h = a.dim;
        let mut rows = Vec::with_capacity(2 * h);
        for (left, right) in [(a, b), (c, d)] {
            for r in 0..h {
                let mut row: Vec<(u32, BigUint)> = left.rows[r].clone();
                row.extend(right.rows[r].iter().map(|(col, v)| (col + h as u32, v.clone())));
                rows.push(row);
            }
        }
        TransferMatrix { dim: 2 * h, rows }
    }

    /// Matrix product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![BigUint::zero(); self.dim];
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for (k, a) in row {
                    for (c, b) in &other.rows[*k as usize] {
                        acc[*c as usize] += a * b;
                    }
                }
                let mut out = Vec::new();
                for (c, v) in acc.iter_mut().enumerate() {
                    if !v.is_zero() {
                        out.push((c as u32, std::mem::take(v)));
                    }
                }
                out
            })
            .collect();
        TransferMatrix { dim: self.dim, rows }
    }

    /// `self^exp` by binary exponentiation.
    pub fn pow(&self, mut exp: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Row vector times matrix.
    fn left_mul(&self, v: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); self.dim];
        for (p, vp) in v.iter().enumerate() {
            if vp.is_zero() {
                continue;
            }
            for (o, g) in &self.rows[p] {
                out[*o as usize] += vp * g;
            }
        }
        out
    }
}

fn check_side(m_hat: u32) -> Result<()> {
    if m_hat == 0 || m_hat > MAX_SIDE {
        return Err(Error::param(format!("M^ must be in 1..={MAX_SIDE}, got {m_hat}")));
    }
    Ok(())
}

/// `G_M^` assembled from `G, S, H` of the previous level:
/// `G = [[S, H], [G, S]]`, `S = [[Z, G], [Z, Z]]`, `H = [[G, 2S], [Z, G]]`,
/// starting from `G_0 = [1]`, `S_0 = H_0 = [0]`.
pub fn build_g(m_hat: u32) -> Result<TransferMatrix> {
    check_side(m_hat)?;
    let (mut g, mut s, mut h) = (TransferMatrix::scalar(1), TransferMatrix::scalar(0), TransferMatrix::scalar(0));
    for _ in 0..m_hat {
        let z = TransferMatrix::zero(g.dim);
        let next_g = TransferMatrix::blocks(&s, &h, &g, &s);
        let next_s = TransferMatrix::blocks(&z, &g, &z, &z);
        let next_h = TransferMatrix::blocks(&g, &s.scaled(2), &z, &g);
        (g, s, h) = (next_g, next_s, next_h);
    }
    Ok(g)
}

/// Number of tilings of an `M^ x N^` rectangle: entry `(1, 2^M^)` of `G_M^^(N^-1)`.
///
/// The power is applied to the first unit row vector step by step, which touches only the
/// non-zeros of `G` and keeps the whole of Table-sized inputs well under a second.
pub fn count_tilings_formula(m_hat: u32, n_hat: u32) -> Result<BigUint> {
    if n_hat == 0 {
        return Err(Error::param("N^ must be at least 1"));
    }
    let g = build_g(m_hat)?;
    let mut v = vec![BigUint::zero(); g.dim()];
    v[0] = BigUint::one();
    for _ in 1..n_hat {
        v = g.left_mul(&v);
    }
    Ok(v.pop().unwrap_or_default())
}

/// Decimal scientific notation rounded half-up to `sig` significant figures, e.g.
/// `1.19e6`. Zero formats as `0`.
pub fn scientific(value: &BigUint, sig: usize) -> String {
    assert!(sig >= 1);
    if value.is_zero() {
        return "0".to_string();
    }
    let digits = value.to_str_radix(10);
    let mut exponent = digits.len() - 1;
    let mut kept: Vec<u8> = digits.bytes().take(sig).map(|b| b - b'0').collect();
    kept.resize(sig, 0);
    if digits.len() > sig && digits.as_bytes()[sig] >= b'5' {
        let mut i = sig;
        loop {
            if i == 0 {
                kept.insert(0, 1);
                kept.pop();
                exponent += 1;
                break;
            }
            i -= 1;
            if kept[i] == 9 {
                kept[i] = 0;
            } else {
                kept[i] += 1;
                break;
            }
        }
    }
    let mut s = kept[0].to_string();
    if sig > 1 {
        s.push('.');
        s.extend(kept[1..].iter().map(|d| char::from(b'0' + d)));
    }
    format!("{s}e{exponent}")
}
