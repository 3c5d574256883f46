//! Small dense linear algebra generic over the working precision.
//!
//! `nalgebra` covers the `f64` paths of the crate; these routines exist so the
//! fidelity oracle can run in double-double arithmetic.

use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::ddfloat::Dd;

pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EPS: f64;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn is_zero(self) -> bool {
        self.to_f64() == 0.0
    }
}

impl Scalar for f64 {
    const EPS: f64 = f64::EPSILON / 2.0;
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Scalar for Dd {
    const EPS: f64 = Dd::EPSILON;
    fn from_f64(x: f64) -> Self {
        Dd::new(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn abs(self) -> Self {
        Dd::abs(self)
    }
    fn sqrt(self) -> Self {
        Dd::sqrt(self)
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| T::from_f64(m[(i, j)]))
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self[(i, j)].to_f64())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| (0..self.n).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        let mut a = self.clone();
        let mut det = T::one();
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().partial_cmp(&a[(y, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)].is_zero() {
                return T::zero();
            }
            if p != c {
                a.swap_rows(p, c);
                det = -det;
            }
            let piv = a[(c, c)];
            det = det * piv;
            for r in c + 1..n {
                let f = a[(r, c)] / piv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    a[(r, j)] = a[(r, j)] - f * a[(c, j)];
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` if singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&x, &y| a[(x, c)].abs().partial_cmp(&a[(y, c)].abs()).unwrap())
                .unwrap();
            if a[(p, c)].is_zero() {
                return None;
            }
            a.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = a[(c, c)];
            for j in 0..n {
                a[(c, j)] = a[(c, j)] / piv;
                inv[(c, j)] = inv[(c, j)] / piv;
            }
            for r in 0..n {
                if r == c {
                    continue;
                }
                let f = a[(r, c)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a[(r, j)] = a[(r, j)] - f * a[(c, j)];
                    inv[(r, j)] = inv[(r, j)] - f * inv[(c, j)];
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    /// All eigenvalues as `(re, im)` pairs, by Hessenberg reduction and the
    /// Francis double-shift QR iteration. Returns `None` if the iteration
    /// fails to converge.
    pub fn eigenvalues(&self) -> Option<Vec<(T, T)>> {
        let mut a = self.clone();
        a.hessenberg();
        a.hqr()
    }

    fn hessenberg(&mut self) {
        let n = self.n;
        for m in 1..n.saturating_sub(1) {
            let mut x = T::zero();
            let mut i = m;
            for j in m..n {
                if self[(j, m - 1)].abs() > x.abs() {
                    x = self[(j, m - 1)];
                    i = j;
                }
            }
            if i != m {
                for j in m - 1..n {
                    self.data.swap(i * n + j, m * n + j);
                }
                for j in 0..n {
                    self.data.swap(j * n + i, j * n + m);
                }
            }
            if !x.is_zero() {
                for i in m + 1..n {
                    let mut y = self[(i, m - 1)];
                    if !y.is_zero() {
                        y = y / x;
                        self[(i, m - 1)] = y;
                        for j in m..n {
                            self[(i, j)] = self[(i, j)] - y * self[(m, j)];
                        }
                        for j in 0..n {
                            self[(j, m)] = self[(j, m)] + y * self[(j, i)];
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i.saturating_sub(1) {
                self[(i, j)] = T::zero();
            }
        }
    }

    fn hqr(mut self) -> Option<Vec<(T, T)>> {
        let n = self.n;
        let a = &mut self;
        let eps = T::from_f64(T::EPS);
        let mut wr = vec![T::zero(); n];
        let mut wi = vec![T::zero(); n];
        let mut anorm = T::zero();
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                anorm = anorm + a[(i, j)].abs();
            }
        }
        let mut nn = n as isize - 1;
        let mut t = T::zero();
        while nn >= 0 {
            let mut its = 0;
            loop {
                let u = nn as usize;
                let mut l = u;
                while l >= 1 {
                    let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                    if s.is_zero() {
                        s = anorm;
                    }
                    if a[(l, l - 1)].abs() <= eps * s {
                        a[(l, l - 1)] = T::zero();
                        break;
                    }
                    l -= 1;
                }
                let mut x = a[(u, u)];
                if l == u {
                    wr[u] = x + t;
                    wi[u] = T::zero();
                    nn -= 1;
                    break;
                }
                let mut y = a[(u - 1, u - 1)];
                let mut w = a[(u, u - 1)] * a[(u - 1, u)];
                if l == u - 1 {
                    let p = (y - x) * T::from_f64(0.5);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x = x + t;
                    if q >= T::zero() {
                        z = if p >= T::zero() { p + z } else { p - z };
                        wr[u - 1] = x + z;
                        wr[u] = x + z;
                        if !z.is_zero() {
                            wr[u] = x - w / z;
                        }
                        wi[u - 1] = T::zero();
                        wi[u] = T::zero();
                    } else {
                        wr[u - 1] = x + p;
                        wr[u] = x + p;
                        wi[u - 1] = -z;
                        wi[u] = z;
                    }
                    nn -= 2;
                    break;
                }
                if its == 60 {
                    return None;
                }
                if its == 10 || its == 20 {
                    t = t + x;
                    for i in 0..=u {
                        a[(i, i)] = a[(i, i)] - x;
                    }
                    let s = a[(u, u - 1)].abs() + a[(u - 1, u - 2)].abs();
                    x = s * T::from_f64(0.75);
                    y = x;
                    w = s * s * T::from_f64(-0.4375);
                }
                its += 1;
                let (mut p, mut q, mut r, mut z);
                let mut m = u - 2;
                loop {
                    z = a[(m, m)];
                    r = x - z;
                    let s = y - z;
                    p = (r * s - w) / a[(m + 1, m)] + a[(m, m + 1)];
                    q = a[(m + 1, m + 1)] - z - r - s;
                    r = a[(m + 2, m + 1)];
                    let s = p.abs() + q.abs() + r.abs();
                    p = p / s;
                    q = q / s;
                    r = r / s;
                    if m == l {
                        break;
                    }
                    let uu = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                    let vv = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                    if uu <= eps * vv {
                        break;
                    }
                    m -= 1;
                }
                for i in m + 2..=u {
                    a[(i, i - 2)] = T::zero();
                    if i != m + 2 {
                        a[(i, i - 3)] = T::zero();
                    }
                }
                let mut k = m;
                while k < u {
                    if k != m {
                        p = a[(k, k - 1)];
                        q = a[(k + 1, k - 1)];
                        r = T::zero();
                        if k != u - 1 {
                            r = a[(k + 2, k - 1)];
                        }
                        x = p.abs() + q.abs() + r.abs();
                        if !x.is_zero() {
                            p = p / x;
                            q = q / x;
                            r = r / x;
                        }
                    }
                    let norm = (p * p + q * q + r * r).sqrt();
                    let s = if p >= T::zero() { norm } else { -norm };
                    if !s.is_zero() {
                        if k == m {
                            if l != m {
                                a[(k, k - 1)] = -a[(k, k - 1)];
                            }
                        } else {
                            a[(k, k - 1)] = -s * x;
                        }
                        p = p + s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q = q / p;
                        r = r / p;
                        for j in k..=u {
                            let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                            if k != u - 1 {
                                pp = pp + r * a[(k + 2, j)];
                                a[(k + 2, j)] = a[(k + 2, j)] - pp * z;
                            }
                            a[(k + 1, j)] = a[(k + 1, j)] - pp * y;
                            a[(k, j)] = a[(k, j)] - pp * x;
                        }
                        let mmin = if u < k + 3 { u } else { k + 3 };
                        for i in l..=mmin {
                            let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                            if k != u - 1 {
                                pp = pp + z * a[(i, k + 2)];
                                a[(i, k + 2)] = a[(i, k + 2)] - pp * r;
                            }
                            a[(i, k + 1)] = a[(i, k + 1)] - pp * q;
                            a[(i, k)] = a[(i, k)] - pp;
                        }
                    }
                    k += 1;
                }
                if l + 1 >= u {
                    break;
                }
            }
        }
        Some(wr.into_iter().zip(wi).collect())
    }
}

impl<T> Index<(usize, usize)> for Dense<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Dense<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
