//! Block-tridiagonal Jacobian storage and a banded LU solve with partial
//! pivoting.
//!
//! The stacked perfect-foresight system couples period `t` only to `t - 1`
//! and `t + 1`, so with `n` unknowns per period the matrix has lower and
//! upper bandwidth `2n - 1`. Row swaps widen the upper band of `U` to at
//! most `kl + ku`, which the row buffers reserve up front.

use crate::error::{Error, Result};

/// Square block-tridiagonal matrix with `blocks` diagonal blocks of size `n`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    n: usize,
    blocks: usize,
    /// Sub-diagonal blocks; `lower[t]` couples block row `t` to block column `t - 1`.
    lower: Vec<f64>,
    diag: Vec<f64>,
    /// Super-diagonal blocks; `upper[t]` couples block row `t` to block column `t + 1`.
    upper: Vec<f64>,
}

impl BlockTridiagonal {
    pub fn zeros(n: usize, blocks: usize) -> Self {
        let size = n * n * blocks;
        BlockTridiagonal {
            n,
            blocks,
            lower: vec![0.0; size],
            diag: vec![0.0; size],
            upper: vec![0.0; size],
        }
    }

    pub fn block_size(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn dim(&self) -> usize {
        self.n * self.blocks
    }

    #[inline]
    fn idx(&self, t: usize, row: usize, col: usize) -> usize {
        (t * self.n + row) * self.n + col
    }

    /// Entry of block row `t` at local `(row, col)` within block column `t + offset`.
    pub fn set(&mut self, t: usize, offset: isize, row: usize, col: usize, v: f64) {
        let k = self.idx(t, row, col);
        match offset {
            -1 => self.lower[k] = v,
            0 => self.diag[k] = v,
            1 => self.upper[k] = v,
            _ => panic!("offset {offset} outside the tridiagonal band"),
        }
    }

    pub fn add(&mut self, t: usize, offset: isize, row: usize, col: usize, v: f64) {
        let k = self.idx(t, row, col);
        match offset {
            -1 => self.lower[k] += v,
            0 => self.diag[k] += v,
            1 => self.upper[k] += v,
            _ => panic!("offset {offset} outside the tridiagonal band"),
        }
    }

    /// Entry at global `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (ti, ri) = (i / self.n, i % self.n);
        let (tj, cj) = (j / self.n, j % self.n);
        let k = self.idx(ti, ri, cj);
        if tj == ti {
            self.diag[k]
        } else if tj + 1 == ti {
            self.lower[k]
        } else if tj == ti + 1 {
            self.upper[k]
        } else {
            0.0
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; self.dim()];
        for t in 0..self.blocks {
            for r in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += self.diag[self.idx(t, r, c)] * x[t * n + c];
                    if t > 0 {
                        acc += self.lower[self.idx(t, r, c)] * x[(t - 1) * n + c];
                    }
                    if t + 1 < self.blocks {
                        acc += self.upper[self.idx(t, r, c)] * x[(t + 1) * n + c];
                    }
                }
                y[t * n + r] = acc;
            }
        }
        y
    }

    /// Solves `A x = b` by banded Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        assert_eq!(b.len(), dim);
        let kl = 2 * self.n - 1;
        let ku = 2 * self.n - 1;
        let mut band = Band::new(dim, kl, ku);
        for i in 0..dim {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(dim - 1);
            for j in lo..=hi {
                let v = self.get(i, j);
                if v != 0.0 {
                    band.set(i, j, v);
                }
            }
        }
        band.solve(b.to_vec())
    }
}

/// Row-oriented band buffer. Row `i` stores columns `i - kl ..= i + kl + ku`.
struct Band {
    dim: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Band {
    fn new(dim: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Band {
            dim,
            kl,
            ku,
            width,
            data: vec![0.0; dim * width],
        }
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j + self.kl - i < self.width);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.pos(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.pos(i, j);
        self.data[p] = v;
    }

    fn solve(mut self, mut rhs: Vec<f64>) -> Result<Vec<f64>> {
        let dim = self.dim;
        let span = self.kl + self.ku;
        for k in 0..dim {
            let last_row = (k + self.kl).min(dim - 1);
            let last_col = (k + span).min(dim - 1);

            let mut piv = k;
            let mut best = self.at(k, k).abs();
            for i in (k + 1)..=last_row {
                let v = self.at(i, k).abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularJacobian { row: k });
            }
            if piv != k {
                for j in k..=last_col {
                    let a = self.at(k, j);
                    let b = if j + self.kl - piv < self.width { self.at(piv, j) } else { 0.0 };
                    self.set(k, j, b);
                    if j + self.kl - piv < self.width {
                        self.set(piv, j, a);
                    } else {
                        debug_assert!(a == 0.0);
                    }
                }
                rhs.swap(k, piv);
            }

            let pivot = self.at(k, k);
            for i in (k + 1)..=last_row {
                let f = self.at(i, k) / pivot;
                if f == 0.0 {
                    continue;
                }
                self.set(i, k, 0.0);
                for j in (k + 1)..=last_col {
                    let u = self.at(k, j);
                    if u != 0.0 {
                        let p = self.pos(i, j);
                        self.data[p] -= f * u;
                    }
                }
                rhs[i] -= f * rhs[k];
            }
        }

        let mut x = vec![0.0; dim];
        for i in (0..dim).rev() {
            let last_col = (i + span).min(dim - 1);
            let mut acc = rhs[i];
            for j in (i + 1)..=last_col {
                acc -= self.at(i, j) * x[j];
            }
            x[i] = acc / self.at(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    fn dense(a: &BlockTridiagonal) -> DMatrix<f64> {
        let d = a.dim();
        DMatrix::from_fn(d, d, |i, j| a.get(i, j))
    }

    fn random_matrix(n: usize, blocks: usize, vals: &[f64], zero_diag: bool) -> BlockTridiagonal {
        let mut a = BlockTridiagonal::zeros(n, blocks);
        let mut it = vals.iter().cycle();
        for t in 0..blocks {
            for r in 0..n {
                for c in 0..n {
                    let d = *it.next().unwrap();
                    // zero diagonal entries force row swaps
                    let d = if zero_diag && r == c { 0.0 } else { d };
                    a.set(t, 0, r, c, d);
                    if t > 0 {
                        a.set(t, -1, r, c, *it.next().unwrap());
                    }
                    if t + 1 < blocks {
                        a.set(t, 1, r, c, *it.next().unwrap());
                    }
                }
            }
        }
        a
    }

    #[test]
    fn identity_solve() {
        let mut a = BlockTridiagonal::zeros(3, 4);
        for t in 0..4 {
            for r in 0..3 {
                a.set(t, 0, r, r, 2.0);
            }
        }
        let b: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let x = a.solve(&b).unwrap();
        for k in 0..12 {
            assert_eq!(x[k], b[k] / 2.0);
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = BlockTridiagonal::zeros(2, 3);
        assert!(matches!(a.solve(&[1.0; 6]), Err(Error::SingularJacobian { .. })));
    }

    proptest! {
        #[test]
        fn matches_dense_lu(
            n in 1usize..5,
            blocks in 1usize..7,
            vals in proptest::collection::vec(-1.0f64..1.0, 64..128),
            zero_diag in any::<bool>(),
        ) {
            let a = random_matrix(n, blocks, &vals, zero_diag);
            let dm = dense(&a);
            let dim = a.dim();
            let b: Vec<f64> = (0..dim).map(|k| (k as f64 * 0.37).sin()).collect();
            let Some(ref_x) = dm.clone().lu().solve(&DVector::from_vec(b.clone())) else {
                return Ok(());
            };
            // skip badly conditioned draws where neither route is meaningful
            let svd = dm.clone().svd(false, false);
            let cond = svd.singular_values.max() / svd.singular_values.min();
            prop_assume!(cond < 1e8);
            let x = a.solve(&b).unwrap();
            for k in 0..dim {
                prop_assert!((x[k] - ref_x[k]).abs() < 1e-7 * (1.0 + ref_x[k].abs()),
                    "k={} {} vs {}", k, x[k], ref_x[k]);
            }
            let ax = a.mul_vec(&x);
            for k in 0..dim {
                prop_assert!((ax[k] - b[k]).abs() < 1e-8);
            }
        }
    }
}
