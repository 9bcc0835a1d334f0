//! Cartesian Gaussian primitives and their contractions (s and p shells).

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub exponent: f64,
    /// Multiplies the unit-normalized primitive.
    pub coefficient: f64,
}

/// `Σ_u c_u N_u (x-A)^a (y-A)^b (z-A)^c exp(-α_u |r-A|²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractedGaussian {
    center: [f64; 3],
    powers: [u32; 3],
    primitives: Vec<Primitive>,
}

/// `N` with `∫ (N x^a y^b z^c e^{-αr²})² = 1`, valid for powers up to 1.
pub fn primitive_norm(exponent: f64, powers: [u32; 3]) -> f64 {
    let l: u32 = powers.iter().sum();
    (2.0 * exponent / PI).powf(0.75) * (4.0 * exponent).powf(l as f64 / 2.0)
}

/// `u^a e^{-αu²}` and its first two derivatives, `a <= 1`.
#[inline]
pub(crate) fn factor_1d(a: u32, alpha: f64, u: f64) -> (f64, f64, f64) {
    let e = (-alpha * u * u).exp();
    if a == 0 {
        (e, -2.0 * alpha * u * e, (4.0 * alpha * alpha * u * u - 2.0 * alpha) * e)
    } else {
        let u2 = u * u;
        (
            u * e,
            (1.0 - 2.0 * alpha * u2) * e,
            (-6.0 * alpha * u + 4.0 * alpha * alpha * u2 * u) * e,
        )
    }
}

impl ContractedGaussian {
    pub fn new(center: [f64; 3], powers: [u32; 3], primitives: Vec<Primitive>) -> Result<Self> {
        if powers.iter().sum::<u32>() > 1 {
            return Err(Error::Validation(format!(
                "only s and p shells are supported, got powers {powers:?}"
            )));
        }
        if primitives.is_empty() {
            return Err(Error::Validation("contraction has no primitives".into()));
        }
        for p in &primitives {
            if !(p.exponent > 0.0 && p.exponent.is_finite()) {
                return Err(Error::Validation(format!(
                    "primitive exponent {} is not positive and finite",
                    p.exponent
                )));
            }
            if !p.coefficient.is_finite() {
                return Err(Error::Validation("non-finite contraction coefficient".into()));
            }
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("non-finite orbital center".into()));
        }
        Ok(Self {
            center,
            powers,
            primitives,
        })
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn powers(&self) -> [u32; 3] {
        self.powers
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let mut out = self.clone();
        for d in 0..3 {
            out.center[d] += shift[d];
        }
        out
    }

    /// Calls `f(scale, [(f, f', f''); 3])` per primitive at `z`.
    fn each_primitive(&self, z: [f64; 3], mut f: impl FnMut(f64, [(f64, f64, f64); 3])) {
        for p in &self.primitives {
            let scale = p.coefficient * primitive_norm(p.exponent, self.powers);
            let fd = [0, 1, 2].map(|d| factor_1d(self.powers[d], p.exponent, z[d] - self.center[d]));
            f(scale, fd);
        }
    }

    pub fn value(&self, z: [f64; 3]) -> f64 {
        let mut v = 0.0;
        self.each_primitive(z, |s, f| v += s * f[0].0 * f[1].0 * f[2].0);
        v
    }

    pub fn gradient(&self, z: [f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        self.each_primitive(z, |s, f| {
            g[0] += s * f[0].1 * f[1].0 * f[2].0;
            g[1] += s * f[0].0 * f[1].1 * f[2].0;
            g[2] += s * f[0].0 * f[1].0 * f[2].1;
        });
        g
    }

    pub fn laplacian(&self, z: [f64; 3]) -> f64 {
        let mut v = 0.0;
        self.each_primitive(z, |s, f| {
            v += s
                * (f[0].2 * f[1].0 * f[2].0 + f[0].0 * f[1].2 * f[2].0 + f[0].0 * f[1].0 * f[2].2);
        });
        v
    }

    /// Analytic `∫ self · other` via the Gaussian product theorem.
    pub fn overlap(&self, other: &ContractedGaussian) -> f64 {
        let mut total = 0.0;
        for p in &self.primitives {
            for q in &other.primitives {
                let (a, b) = (p.exponent, q.exponent);
                let sum = a + b;
                let mut prod = p.coefficient
                    * q.coefficient
                    * primitive_norm(a, self.powers)
                    * primitive_norm(b, other.powers);
                for d in 0..3 {
                    let (ca, cb) = (self.center[d], other.center[d]);
                    let pc = (a * ca + b * cb) / sum;
                    let k = (-a * b / sum * (ca - cb).powi(2)).exp() * (PI / sum).sqrt();
                    let (pa, pb) = (pc - ca, pc - cb);
                    let moment = match (self.powers[d], other.powers[d]) {
                        (0, 0) => 1.0,
                        (1, 0) => pa,
                        (0, 1) => pb,
                        _ => pa * pb + 0.5 / sum,
                    };
                    prod *= k * moment;
                }
                total += prod;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sto3g_h(center: [f64; 3]) -> ContractedGaussian {
        let prims = [
            (3.425_250_91, 0.154_328_97),
            (0.623_913_73, 0.535_328_14),
            (0.168_855_40, 0.444_634_54),
        ]
        .map(|(exponent, coefficient)| Primitive {
            exponent,
            coefficient,
        });
        ContractedGaussian::new(center, [0, 0, 0], prims.to_vec()).unwrap()
    }

    #[test]
    fn s_gaussian_center_value_and_laplacian() {
        let alpha = 0.8;
        let g = ContractedGaussian::new(
            [0.3, -0.2, 1.0],
            [0, 0, 0],
            vec![Primitive {
                exponent: alpha,
                coefficient: 0.7,
            }],
        )
        .unwrap();
        let n = (2.0 * alpha / PI).powf(0.75);
        let v = g.value([0.3, -0.2, 1.0]);
        assert!((v - 0.7 * n).abs() < 1e-15);
        assert!((g.laplacian([0.3, -0.2, 1.0]) + 6.0 * alpha * v).abs() < 1e-14);
        assert!(g.value([50.3, -0.2, 1.0]).abs() < 1e-30);
    }

    #[test]
    fn sto3g_overlap_is_unit_and_p_shells_normalize() {
        let h = sto3g_h([0.0; 3]);
        assert!((h.overlap(&h) - 1.0).abs() < 1e-6);
        let p = ContractedGaussian::new(
            [0.0; 3],
            [0, 1, 0],
            vec![Primitive {
                exponent: 1.3,
                coefficient: 1.0,
            }],
        )
        .unwrap();
        assert!((p.overlap(&p) - 1.0).abs() < 1e-14);
        assert!(p.overlap(&h).abs() < 1e-15);
    }

    #[test]
    fn rejects_d_shells_and_bad_exponents() {
        let prim = vec![Primitive {
            exponent: 1.0,
            coefficient: 1.0,
        }];
        assert!(ContractedGaussian::new([0.0; 3], [1, 1, 0], prim.clone()).is_err());
        let bad = vec![Primitive {
            exponent: -1.0,
            coefficient: 1.0,
        }];
        assert!(ContractedGaussian::new([0.0; 3], [0, 0, 0], bad).is_err());
    }
}
