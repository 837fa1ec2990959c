//! Banded LU with partial pivoting, a rank-one bordered extension, and a
//! Hager-style 1-norm condition estimate. Matrices are real; right-hand sides
//! may be complex.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// `n × n` band matrix with `kl` sub- and `ku` superdiagonals. Row `i` stores
/// columns `i - kl ..= i + ku + kl`; the extra `kl` columns hold fill-in from
/// pivoting.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        (off >= 0 && (off as usize) < self.width).then(|| i * self.width + off as usize)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets an entry inside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku && j < self.n,
            "({i}, {j}) lies outside the band"
        );
        let s = self.slot(i, j).unwrap();
        self.data[s] = v;
    }

    fn row_range(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.kl)..=(i + self.ku).min(self.n - 1)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| self.row_range(i).map(|j| x[j] * self.get(i, j)).sum())
            .collect()
    }

    /// Column sums of absolute values.
    fn abs_col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for i in 0..self.n {
            for j in self.row_range(i) {
                s[j] += self.get(i, j).abs();
            }
        }
        s
    }

    pub fn factor(&self) -> Result<BandLu> {
        let mut a = self.clone();
        let n = a.n;
        let (kl, ku) = (a.kl, a.ku);
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&x, &y| a.get(x, k).abs().total_cmp(&a.get(y, k).abs()))
                .unwrap();
            piv[k] = p;
            let pivot = a.get(p, k);
            if pivot.abs() <= scale * 1e-14 * n as f64 || !pivot.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot in column {k}")));
            }
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (sk, sp) = (a.slot(k, j).unwrap(), a.slot(p, j).unwrap());
                    a.data.swap(sk, sp);
                }
            }
            for i in k + 1..=last {
                let si = a.slot(i, k).unwrap();
                let l = a.data[si] / pivot;
                a.data[si] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let akj = a.get(k, j);
                        let s = a.slot(i, j).unwrap();
                        a.data[s] -= l * akj;
                    }
                }
            }
        }
        Ok(BandLu { lu: a, piv })
    }
}

/// Factorization `A = P₀L₀ ⋯ P_{n-1}L_{n-1} U` in band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    lu: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let a = &self.lu;
        let n = a.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            for i in k + 1..=(k + a.kl).min(n - 1) {
                let xk = x[k];
                x[i] -= xk * a.get(i, k);
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + a.ku + a.kl).min(n - 1) {
                s -= x[j] * a.get(k, j);
            }
            x[k] = s / a.get(k, k);
        }
        x
    }

    pub fn solve_transpose(&self, b: &[C64]) -> Vec<C64> {
        let a = &self.lu;
        let n = a.n;
        let mut z = b.to_vec();
        for k in 0..n {
            let mut s = z[k];
            for i in k.saturating_sub(a.ku + a.kl)..k {
                s -= z[i] * a.get(i, k);
            }
            z[k] = s / a.get(k, k);
        }
        for k in (0..n).rev() {
            let mut s = z[k];
            for i in k + 1..=(k + a.kl).min(n - 1) {
                s -= z[i] * a.get(i, k);
            }
            z[k] = s;
            z.swap(k, self.piv[k]);
        }
        z
    }
}

/// `A = B + g sᵀ` with `B` banded: the per-mode operators with one nonlocal
/// column.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub band: BandMatrix,
    pub g: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BorderedLu {
    system: BorderedSystem,
    lu: BandLu,
    binv_g: Vec<C64>,
    binvt_s: Vec<C64>,
    denom: f64,
}

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|x| C64::new(*x, 0.0)).collect()
}

fn dot(a: &[f64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| y * *x).sum()
}

impl BorderedSystem {
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let sx = dot(&self.s, x);
        self.band
            .mul_vec(x)
            .into_iter()
            .zip(&self.g)
            .map(|(v, g)| v + sx * *g)
            .collect()
    }

    pub fn factor(self) -> Result<BorderedLu> {
        let lu = self.band.factor()?;
        let binv_g = lu.solve(&real(&self.g));
        let binvt_s = lu.solve_transpose(&real(&self.s));
        let denom = 1.0 + dot(&self.s, &binv_g).re;
        let size = 1.0 + self.s.iter().map(|v| v.abs()).sum::<f64>() * binv_g.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if denom.abs() <= 1e-13 * size {
            return Err(Error::SingularSystem("rank-one update annihilates the system".into()));
        }
        Ok(BorderedLu {
            system: self,
            lu,
            binv_g,
            binvt_s,
            denom,
        })
    }
}

impl BorderedLu {
    pub fn system(&self) -> &BorderedSystem {
        &self.system
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let y = self.lu.solve(b);
        let c = dot(&self.system.s, &y) / self.denom;
        y.iter().zip(&self.binv_g).map(|(y, z)| y - z * c).collect()
    }

    pub fn solve_transpose(&self, b: &[C64]) -> Vec<C64> {
        let y = self.lu.solve_transpose(b);
        let c = dot(&self.system.g, &y) / self.denom;
        y.iter().zip(&self.binvt_s).map(|(y, z)| y - z * c).collect()
    }

    pub fn norm1(&self) -> f64 {
        let mut cols = self.system.band.abs_col_sums();
        // add |g sᵀ| column sums; exact when the supports of g and the band
        // row entries do not cancel, an upper bound otherwise
        let g1: f64 = self.system.g.iter().map(|v| v.abs()).sum();
        for (c, s) in cols.iter_mut().zip(&self.system.s) {
            *c += g1 * s.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Hager's estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.system.band.len();
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|v| v.norm()).sum();
            let sign: Vec<C64> = y
                .iter()
                .map(|v| C64::new(if v.re >= 0.0 { 1.0 } else { -1.0 }, 0.0))
                .collect();
            let z = self.solve_transpose(&sign);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.re.abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a.re * b.re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        est
    }

    /// `κ₁(A) ≈ ‖A‖₁ ‖A⁻¹‖₁`.
    pub fn condition_estimate(&self) -> f64 {
        self.norm1() * self.inverse_norm1_estimate()
    }

    /// `‖A x - b‖_∞ / (‖A‖₁‖x‖_∞ + ‖b‖_∞)`.
    pub fn relative_residual(&self, x: &[C64], b: &[C64]) -> f64 {
        let ax = self.system.mul_vec(x);
        let r = ax.iter().zip(b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let xn = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let bn = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let den = self.norm1() * xn + bn;
        if den == 0.0 {
            0.0
        } else {
            r / den
        }
    }
}
