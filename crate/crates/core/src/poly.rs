//! Dense bivariate polynomials truncated at a fixed total degree.
//!
//! The normal-form reductions in [`crate::bifurcation`] are sequences of
//! polynomial changes of variables applied to a truncated Taylor expansion
//! of the vector field. Carrying the expansions as explicit polynomials and
//! composing them numerically avoids transcribing long coefficient formulas
//! by hand; the named stage coefficients are then read off the results.

/// Polynomial in (u, v) with real coefficients, truncated at total degree
/// [`Poly2::DEG`]. Coefficient of u^i v^j lives at `c[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    c: [[f64; Poly2::DEG + 1]; Poly2::DEG + 1],
}

impl Poly2 {
    /// Truncation order. The normal-form chain shifts its expansion point
    /// by O(eta) and rescales velocities by three orders of magnitude, so
    /// the series kept here must stay accurate on neighborhoods of radius
    /// about 1e-2; degree 8 leaves remainders far below 1e-8 there.
    pub const DEG: usize = 8;

    pub fn zero() -> Self {
        Self {
            c: [[0.0; Self::DEG + 1]; Self::DEG + 1],
        }
    }

    pub fn constant(a: f64) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = a;
        p
    }

    /// The monomial a * u^i * v^j.
    pub fn monomial(a: f64, i: usize, j: usize) -> Self {
        let mut p = Self::zero();
        if i + j <= Self::DEG {
            p.c[i][j] = a;
        }
        p
    }

    pub fn var_u() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    pub fn var_v() -> Self {
        Self::monomial(1.0, 0, 1)
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, a: f64) {
        assert!(i + j <= Self::DEG, "monomial beyond truncation order");
        self.c[i][j] = a;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..=Self::DEG {
            for j in 0..=Self::DEG - i {
                out.c[i][j] += other.c[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..=Self::DEG {
            for j in 0..=Self::DEG - i {
                out.c[i][j] -= other.c[i][j];
            }
        }
        out
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        for i in 0..=Self::DEG {
            for j in 0..=Self::DEG - i {
                out.c[i][j] *= a;
            }
        }
        out
    }

    /// Product truncated at the common degree bound.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i1 in 0..=Self::DEG {
            for j1 in 0..=Self::DEG - i1 {
                let a = self.c[i1][j1];
                if a == 0.0 {
                    continue;
                }
                for i2 in 0..=Self::DEG - i1 - j1 {
                    for j2 in 0..=Self::DEG - i1 - j1 - i2 {
                        let b = other.c[i2][j2];
                        if b != 0.0 {
                            out.c[i1 + i2][j1 + j2] += a * b;
                        }
                    }
                }
            }
        }
        out
    }

    /// Substitution p(u, v) -> p(U(u', v'), V(u', v')), truncated.
    pub fn compose(&self, u_sub: &Self, v_sub: &Self) -> Self {
        // Precompute powers once; DEG is small so this is cheap.
        let mut u_pow = Vec::with_capacity(Self::DEG + 1);
        let mut v_pow = Vec::with_capacity(Self::DEG + 1);
        u_pow.push(Self::constant(1.0));
        v_pow.push(Self::constant(1.0));
        for k in 1..=Self::DEG {
            u_pow.push(u_pow[k - 1].mul(u_sub));
            v_pow.push(v_pow[k - 1].mul(v_sub));
        }
        let mut out = Self::zero();
        for (i, up) in u_pow.iter().enumerate() {
            for (j, vp) in v_pow.iter().take(Self::DEG + 1 - i).enumerate() {
                let a = self.c[i][j];
                if a != 0.0 {
                    out = out.add(&up.mul(vp).scale(a));
                }
            }
        }
        out
    }

    pub fn d_du(&self) -> Self {
        let mut out = Self::zero();
        for i in 1..=Self::DEG {
            for j in 0..=Self::DEG - i {
                out.c[i - 1][j] = self.c[i][j] * i as f64;
            }
        }
        out
    }

    pub fn d_dv(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..=Self::DEG {
            for j in 1..=Self::DEG - i {
                out.c[i][j - 1] = self.c[i][j] * j as f64;
            }
        }
        out
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        // Horner in u; inner loop Horner in v.
        let mut acc = 0.0;
        for i in (0..=Self::DEG).rev() {
            let mut row = 0.0;
            for j in (0..=Self::DEG - i).rev() {
                row = row * v + self.c[i][j];
            }
            acc = acc * u + row;
        }
        acc
    }

    /// Truncated series 1 / (1 + w) for a polynomial w with zero constant
    /// term. Panics if the constant term is nonzero.
    pub fn geometric_inverse(w: &Self) -> Self {
        assert_eq!(w.coeff(0, 0), 0.0, "series inverse needs w(0,0) = 0");
        let mut out = Self::constant(1.0);
        let mut pow = Self::constant(1.0);
        let mut sign = 1.0;
        for _ in 1..=Self::DEG {
            pow = pow.mul(w);
            sign = -sign;
            out = out.add(&pow.scale(sign));
        }
        out
    }

    /// Largest coefficient magnitude, for degeneracy diagnostics.
    pub fn max_coeff(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..=Self::DEG {
            for j in 0..=Self::DEG - i {
                m = m.max(self.c[i][j].abs());
            }
        }
        m
    }
}
