use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::C64;

/// Basis index of `|+1>`. The basis order is `(|+1>, |0>, |-1>)`.
pub const PLUS: usize = 0;
/// Basis index of `|0>`.
pub const ZERO: usize = 1;
/// Basis index of `|-1>`.
pub const MINUS: usize = 2;

const C0: C64 = C64::new(0.0, 0.0);
const C1: C64 = C64::new(1.0, 0.0);

/// 3x3 complex matrix acting on the spin-1 ground-state triplet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator3(pub [[C64; 3]; 3]);

impl Operator3 {
    pub const ZERO: Self = Self([[C0; 3]; 3]);
    pub const IDENTITY: Self = Self([[C1, C0, C0], [C0, C1, C0], [C0, C0, C1]]);

    pub fn diagonal(d: [C64; 3]) -> Self {
        let mut m = Self::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Outer product `|i><j|`.
    pub fn ket_bra(i: usize, j: usize) -> Self {
        let mut m = Self::ZERO;
        m.0[i][j] = C1;
        m
    }

    /// `S_z = diag(1, 0, -1)`.
    pub fn s_z() -> Self {
        Self::diagonal([C1, C0, -C1])
    }

    /// Raising operator `S_+ = sqrt(2) (|+1><0| + |0><-1|)`.
    pub fn s_plus() -> Self {
        let r2 = C64::new(core::f64::consts::SQRT_2, 0.0);
        let mut m = Self::ZERO;
        m.0[PLUS][ZERO] = r2;
        m.0[ZERO][MINUS] = r2;
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        let a = &psi.0;
        let m = &self.0;
        StateVector([
            m[0][0] * a[0] + m[0][1] * a[1] + m[0][2] * a[2],
            m[1][0] * a[0] + m[1][1] * a[1] + m[1][2] * a[2],
            m[2][0] * a[0] + m[2][1] * a[1] + m[2][2] * a[2],
        ])
    }

    /// Largest element-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                d = d.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::ZERO)
    }

    /// `max |U^dagger U - 1|`.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `exp(-i H t)` by scaling and squaring of a Taylor series.
    ///
    /// Used only for the finite-pulse model, where no closed form exists.
    pub fn evolve_numeric(&self, t: f64) -> Self {
        let a = self.scale(C64::new(0.0, -t));
        let norm = a.max_abs() * 3.0;
        let mut squarings = 0;
        let mut scale = 1.0;
        while norm * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let a = a.scale(C64::new(scale, 0.0));
        let mut term = Self::IDENTITY;
        let mut sum = Self::IDENTITY;
        for k in 1..=18 {
            term = (term * a).scale(C64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }
}

impl Index<(usize, usize)> for Operator3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Operator3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Mul for Operator3 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        m
    }
}

impl Add for Operator3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }
}

impl Sub for Operator3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut m = self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] -= o.0[i][j];
            }
        }
        m
    }
}

/// Pure state amplitudes over `(|+1>, |0>, |-1>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub [C64; 3]);

impl StateVector {
    pub fn basis(level: usize) -> Self {
        let mut a = [C0; 3];
        a[level] = C1;
        Self(a)
    }

    pub fn population(&self, level: usize) -> f64 {
        self.0[level].norm_sqr()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}
