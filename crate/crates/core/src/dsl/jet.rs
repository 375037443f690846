//! Truncated multivariate Taylor jets through third order.
//!
//! Only index-sorted entries are computed; the rest are mirrored, so `hess`
//! and `third` are bit-identical under any permutation of their indices.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value and partial derivatives of a scalar function through `order` (≤ 3).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    n: usize,
    order: u8,
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

pub const MAX_ORDER: u8 = 3;

#[inline]
fn set2(h: &mut [f64], n: usize, i: usize, j: usize, v: f64) {
    h[i * n + j] = v;
    h[j * n + i] = v;
}

#[inline]
fn set3(t: &mut [f64], n: usize, i: usize, j: usize, k: usize, v: f64) {
    for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
        t[(a * n + b) * n + c] = v;
    }
}

impl Jet {
    fn zeros(n: usize, order: u8) -> Jet {
        assert!(order <= MAX_ORDER, "jet order above 3");
        let o = order as usize;
        Jet {
            n,
            order,
            value: 0.0,
            grad: vec![0.0; if o >= 1 { n } else { 0 }],
            hess: vec![0.0; if o >= 2 { n * n } else { 0 }],
            third: vec![0.0; if o >= 3 { n * n * n } else { 0 }],
        }
    }

    pub fn constant(n: usize, order: u8, c: f64) -> Jet {
        let mut j = Jet::zeros(n, order);
        j.value = c;
        j
    }

    /// The coordinate function `x_index` at a point where it equals `x`.
    pub fn variable(n: usize, order: u8, index: usize, x: f64) -> Jet {
        let mut j = Jet::constant(n, order, x);
        if order >= 1 {
            j.grad[index] = 1.0;
        }
        j
    }

    /// Builds a jet from explicit derivative arrays. `hess` is n×n row-major,
    /// `third` n×n×n; only their index-sorted entries are read.
    pub fn from_parts(value: f64, grad: &[f64], hess: Option<&[f64]>, third: Option<&[f64]>) -> Jet {
        let n = grad.len();
        let order = if third.is_some() {
            3
        } else if hess.is_some() {
            2
        } else {
            1
        };
        let mut j = Jet::zeros(n, order);
        j.value = value;
        j.grad.copy_from_slice(grad);
        if let Some(h) = hess {
            for a in 0..n {
                for b in a..n {
                    set2(&mut j.hess, n, a, b, h[a * n + b]);
                }
            }
        }
        if let Some(t) = third {
            for a in 0..n {
                for b in a..n {
                    for c in b..n {
                        set3(&mut j.third, n, a, b, c, t[(a * n + b) * n + c]);
                    }
                }
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn grad(&self, i: usize) -> f64 {
        if self.order >= 1 { self.grad[i] } else { 0.0 }
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        if self.order >= 2 { self.hess[i * self.n + j] } else { 0.0 }
    }

    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        if self.order >= 3 {
            self.third[(i * self.n + j) * self.n + k]
        } else {
            0.0
        }
    }

    pub fn grad_slice(&self) -> &[f64] {
        &self.grad
    }

    /// Drops derivatives above `order`.
    pub fn truncate(&self, order: u8) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let mut j = Jet::zeros(self.n, order);
        j.value = self.value;
        if order >= 1 {
            j.grad.copy_from_slice(&self.grad);
        }
        if order >= 2 {
            j.hess.copy_from_slice(&self.hess);
        }
        j
    }

    /// ∂_i of this jet, one order lower. Panics on an order-0 jet.
    pub fn partial(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "partial of an order-0 jet");
        let n = self.n;
        let mut d = Jet::zeros(n, self.order - 1);
        d.value = self.grad[i];
        if self.order >= 2 {
            d.grad.copy_from_slice(&self.hess[i * n..(i + 1) * n]);
        }
        if self.order >= 3 {
            d.hess.copy_from_slice(&self.third[i * n * n..(i + 1) * n * n]);
        }
        d
    }

    fn common(&self, other: &Jet) -> u8 {
        assert_eq!(self.n, other.n, "jet dimension mismatch");
        self.order.min(other.order)
    }

    fn zip(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.common(other);
        let mut r = Jet::zeros(self.n, order);
        r.value = f(self.value, other.value);
        for (k, v) in r.grad.iter_mut().enumerate() {
            *v = f(self.grad[k], other.grad[k]);
        }
        for (k, v) in r.hess.iter_mut().enumerate() {
            *v = f(self.hess[k], other.hess[k]);
        }
        for (k, v) in r.third.iter_mut().enumerate() {
            *v = f(self.third[k], other.third[k]);
        }
        r
    }

    fn map_linear(&self, f: impl Fn(f64) -> f64) -> Jet {
        let mut r = self.clone();
        r.value = f(r.value);
        for v in r.grad.iter_mut().chain(r.hess.iter_mut()).chain(r.third.iter_mut()) {
            *v = f(*v);
        }
        r
    }

    pub fn scale(&self, c: f64) -> Jet {
        self.map_linear(|v| c * v)
    }

    /// Composition `g ∘ self` where `d = [g(u), g'(u), g''(u), g'''(u)]`.
    pub fn compose(&self, d: [f64; 4]) -> Jet {
        let n = self.n;
        let o = self.order;
        let mut r = Jet::zeros(n, o);
        r.value = d[0];
        let u1 = &self.grad;
        if o >= 1 {
            for i in 0..n {
                r.grad[i] = d[1] * u1[i];
            }
        }
        if o >= 2 {
            let u2 = &self.hess;
            for i in 0..n {
                for j in i..n {
                    let v = d[2] * u1[i] * u1[j] + d[1] * u2[i * n + j];
                    set2(&mut r.hess, n, i, j, v);
                }
            }
        }
        if o >= 3 {
            let u2 = &self.hess;
            let u3 = &self.third;
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = d[3] * u1[i] * u1[j] * u1[k]
                            + d[2] * (u2[i * n + j] * u1[k] + u2[i * n + k] * u1[j] + u2[j * n + k] * u1[i])
                            + d[1] * u3[(i * n + j) * n + k];
                        set3(&mut r.third, n, i, j, k, v);
                    }
                }
            }
        }
        r
    }

    pub fn mul_jet(&self, b: &Jet) -> Jet {
        let n = self.n;
        let o = self.common(b);
        let a = self;
        let mut r = Jet::zeros(n, o);
        r.value = a.value * b.value;
        if o >= 1 {
            for i in 0..n {
                r.grad[i] = a.grad[i] * b.value + a.value * b.grad[i];
            }
        }
        if o >= 2 {
            for i in 0..n {
                for j in i..n {
                    let ij = i * n + j;
                    let v = a.hess[ij] * b.value
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i]
                        + a.value * b.hess[ij];
                    set2(&mut r.hess, n, i, j, v);
                }
            }
        }
        if o >= 3 {
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let (ij, ik, jk) = (i * n + j, i * n + k, j * n + k);
                        let ijk = ij * n + k;
                        let v = a.third[ijk] * b.value
                            + a.hess[ij] * b.grad[k]
                            + a.hess[ik] * b.grad[j]
                            + a.hess[jk] * b.grad[i]
                            + a.grad[i] * b.hess[jk]
                            + a.grad[j] * b.hess[ik]
                            + a.grad[k] * b.hess[ij]
                            + a.value * b.third[ijk];
                        set3(&mut r.third, n, i, j, k, v);
                    }
                }
            }
        }
        r
    }

    pub fn recip(&self) -> Jet {
        let u = self.value;
        let r = 1.0 / u;
        self.compose([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    /// `self^k` for a constant exponent.
    pub fn powf(&self, k: f64) -> Jet {
        let u = self.value;
        if k == 0.0 {
            return Jet::constant(self.n, self.order, 1.0);
        }
        let p = |e: f64| super::expr::powf_signed(u, e);
        self.compose([
            p(k),
            k * p(k - 1.0),
            k * (k - 1.0) * p(k - 2.0),
            k * (k - 1.0) * (k - 2.0) * p(k - 3.0),
        ])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value.exp();
        self.compose([e; 4])
    }

    pub fn ln(&self) -> Jet {
        let u = self.value;
        let r = 1.0 / u;
        self.compose([u.ln(), r, -r * r, 2.0 * r * r * r])
    }

    pub fn sqrt(&self) -> Jet {
        let s = self.value.sqrt();
        let u = self.value;
        self.compose([s, 0.5 / s, -0.25 / (s * u), 0.375 / (s * u * u)])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn tan(&self) -> Jet {
        let t = self.value.tan();
        let s2 = 1.0 + t * t;
        self.compose([t, s2, 2.0 * t * s2, 2.0 * s2 * (1.0 + 3.0 * t * t)])
    }

    pub fn sinh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose([s, c, s, c])
    }

    pub fn cosh(&self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.compose([c, s, c, s])
    }

    pub fn tanh(&self) -> Jet {
        let t = self.value.tanh();
        let s2 = 1.0 - t * t;
        self.compose([t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0)])
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.mul_jet(&rhs.recip())
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map_linear(|v| -v)
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { (&self).$m(&rhs) }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet { (&self).$m(rhs) }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet { self.$m(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        let mut r = self.clone();
        r.value += c;
        r
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}
