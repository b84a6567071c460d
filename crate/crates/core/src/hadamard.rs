//! Normalized Hadamard matrices and the extended (two-sided) block transform
//! `B = H A H^T / 4t`, `A = H^T B H / 4t`.

use std::fmt;

use crate::error::{Error, Result};

/// A square real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    order: usize,
    data: Vec<f64>,
}

impl Block {
    pub fn zeros(order: usize) -> Self {
        Self { order, data: vec![0.0; order * order] }
    }

    pub fn from_vec(order: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::Dimension(format!(
                "block of order {order} needs {} entries, got {}",
                order * order,
                data.len()
            )));
        }
        Ok(Self { order, data })
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(order * order);
        for r in 0..order {
            for c in 0..order {
                data.push(f(r, c));
            }
        }
        Self { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.order + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.order + col] = value;
    }

    pub fn max_abs_diff(&self, other: &Block) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// A `4t x 4t` matrix over `{+1, -1}` with `H H^T = 4t I` whose first row and
/// column are all `+1`.
#[derive(Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    /// Wraps a row-major `±1` matrix after checking orthogonality and
    /// normalization. This is how non-Sylvester families plug in.
    pub fn from_rows(order: usize, entries: Vec<i8>) -> Result<Self> {
        if entries.len() != order * order {
            return Err(Error::Dimension(format!("Hadamard matrix of order {order} needs {} entries", order * order)));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidParameter("entries must be +1 or -1".into()));
        }
        let h = Self { order, entries };
        if !h.is_orthogonal() {
            return Err(Error::InvalidParameter("rows are not pairwise orthogonal".into()));
        }
        if !h.is_normalized() {
            return Err(Error::InvalidParameter("first row and column must be all +1".into()));
        }
        Ok(h)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Entry at 0-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// `H H^T` in exact integer arithmetic.
    pub fn gram(&self) -> Vec<i64> {
        let n = self.order;
        let mut g = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (0..n).map(|k| i64::from(self.get(i, k)) * i64::from(self.get(j, k))).sum();
            }
        }
        g
    }

    pub fn is_orthogonal(&self) -> bool {
        let n = self.order;
        self.gram().iter().enumerate().all(|(idx, &v)| v == if idx / n == idx % n { n as i64 } else { 0 })
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.order).all(|i| self.get(0, i) == 1 && self.get(i, 0) == 1)
    }

    fn check(&self, block: &Block) -> Result<()> {
        if block.order != self.order {
            return Err(Error::Dimension(format!(
                "block of order {} against Hadamard order {}",
                block.order, self.order
            )));
        }
        Ok(())
    }

    /// Forward transform `H A H^T / 4t`.
    pub fn forward(&self, block: &Block) -> Result<Block> {
        self.check(block)?;
        Ok(self.sandwich(block, false))
    }

    /// Inverse transform `H^T B H / 4t`.
    pub fn inverse(&self, coeffs: &Block) -> Result<Block> {
        self.check(coeffs)?;
        Ok(self.sandwich(coeffs, true))
    }

    /// `L X L^T / n` with `L = H` (forward) or `L = H^T` (inverse).
    fn sandwich(&self, x: &Block, transpose: bool) -> Block {
        let n = self.order;
        let left = |r: usize, c: usize| -> f64 { f64::from(if transpose { self.get(c, r) } else { self.get(r, c) }) };
        // t = L X
        let mut t = vec![0.0; n * n];
        for r in 0..n {
            for k in 0..n {
                let l = left(r, k);
                let row = &x.data[k * n..(k + 1) * n];
                for (acc, &v) in t[r * n..(r + 1) * n].iter_mut().zip(row) {
                    *acc += l * v;
                }
            }
        }
        // out = t L^T / n
        let scale = n as f64;
        let mut out = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (0..n).map(|k| t[r * n + k] * left(c, k)).sum();
                out[r * n + c] = s / scale;
            }
        }
        Block { order: n, data: out }
    }
}

impl fmt::Debug for HadamardMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HadamardMatrix({})", self.order)?;
        for row in self.entries.chunks(self.order) {
            let line: Vec<&str> = row.iter().map(|&e| if e > 0 { "1" } else { "-" }).collect();
            writeln!(f, "  {}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Sylvester construction: `H_1 = [1]`, `H_2n = [[H_n, H_n], [H_n, -H_n]]`.
pub fn sylvester(order: usize) -> Result<HadamardMatrix> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(order));
    }
    let mut n = 1;
    let mut entries = vec![1i8];
    while n < order {
        let m = 2 * n;
        let mut next = vec![0i8; m * m];
        for r in 0..n {
            for c in 0..n {
                let v = entries[r * n + c];
                next[r * m + c] = v;
                next[r * m + c + n] = v;
                next[(r + n) * m + c] = v;
                next[(r + n) * m + c + n] = -v;
            }
        }
        entries = next;
        n = m;
    }
    Ok(HadamardMatrix { order, entries })
}

/// Largest available order `4t <= block_side` among the given orders.
pub fn select_order_from(block_side: usize, available: impl IntoIterator<Item = usize>) -> Result<usize> {
    available.into_iter().filter(|&o| o >= 4 && o % 4 == 0 && o <= block_side).max().ok_or(Error::NoOrder(block_side))
}

/// Hadamard order for a block of side `floor(n/m)`, taken from the Sylvester
/// family (powers of two, at least 4). The order never exceeds the block so
/// the sub-block fits inside it.
pub fn select_order(block_side: usize) -> Result<usize> {
    let powers = (2..usize::BITS).map(|p| 1usize << p).take_while(|&o| o <= block_side.max(4));
    select_order_from(block_side, powers)
}
