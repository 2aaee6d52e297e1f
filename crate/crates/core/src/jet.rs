//! Second-order forward-mode differentiation in three variables.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to the three Cartesian coordinates. Metric families are written
//! once over the [`Scalar`] trait and evaluated either on plain `f64` or on
//! `Jet` seeds, which yields exact first and second derivatives without
//! step-size tuning.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;
    fn recip(self) -> Self {
        Self::constant(1.0) / self
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Jet {
    pub fn variable(v: f64, axis: usize) -> Self {
        let mut g = [0.0; 3];
        g[axis] = 1.0;
        Jet { v, g, h: [[0.0; 3]; 3] }
    }

    pub fn seeds(x: [f64; 3]) -> [Jet; 3] {
        [
            Jet::variable(x[0], 0),
            Jet::variable(x[1], 1),
            Jet::variable(x[2], 2),
        ]
    }

    /// Applies a unary function given its value and first two derivatives
    /// at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet {
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            g[i] = df * self.g[i];
            for j in 0..3 {
                h[i][j] = df * self.h[i][j] + ddf * self.g[i] * self.g[j];
            }
        }
        Jet { v: f, g, h }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let mut r = self;
        r.v += o.v;
        for i in 0..3 {
            r.g[i] += o.g[i];
            for j in 0..3 {
                r.h[i][j] += o.h[i][j];
            }
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self * -1.0
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut g = [0.0; 3];
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            g[i] = self.v * o.g[i] + o.v * self.g[i];
            for j in 0..3 {
                h[i][j] = self.v * o.h[i][j]
                    + o.v * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        Jet { v: self.v * o.v, g, h }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, c: f64) -> Jet {
        self.v += c;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, c: f64) -> Jet {
        self.v -= c;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, c: f64) -> Jet {
        self.v *= c;
        for i in 0..3 {
            self.g[i] *= c;
            for j in 0..3 {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, c: f64) -> Jet {
        self * (1.0 / c)
    }
}

impl Scalar for Jet {
    fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; 3], h: [[0.0; 3]; 3] }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn powi(self, n: i32) -> Self {
        let nf = n as f64;
        let f = self.v.powi(n);
        let df = nf * self.v.powi(n - 1);
        let ddf = nf * (nf - 1.0) * self.v.powi(n - 2);
        self.chain(f, df, ddf)
    }
    fn powf(self, p: f64) -> Self {
        let f = self.v.powf(p);
        self.chain(f, p * self.v.powf(p - 1.0), p * (p - 1.0) * self.v.powf(p - 2.0))
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}
