//! Euclidean geometric algebra G3 with signature (3,0,0).
//!
//! The eight basis blades are ordered `[1, s1, s2, s3, s12, s13, s23, s123]`
//! (`s` short for sigma). Products are evaluated through explicit 8x8
//! structure-constant tables rather than symbolic expansion, so every
//! operation is a branch-free accumulation that can be checked against a
//! brute-force Cayley-table oracle.
//!
//! Grade-2 elements carry a second, cyclic representation [`Bivector3`] with
//! components `(b12, b23, b31)`. The cyclic order matches the component
//! order used for per-phase plane plots; note `b31 = -(s13 coefficient)`.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Index of each blade in the coefficient array.
const IDX_SCALAR: usize = 0;
const IDX_S1: usize = 1;
const IDX_S2: usize = 2;
const IDX_S3: usize = 3;
const IDX_S12: usize = 4;
const IDX_S13: usize = 5;
const IDX_S23: usize = 6;
const IDX_S123: usize = 7;

/// Grade of each basis blade, by index.
const GRADE: [usize; 8] = [0, 1, 1, 1, 2, 2, 2, 3];

/// Cayley table for the geometric product: `e_i * e_j = GP_SIGN[i][j] * e_{GP_IDX[i][j]}`.
#[rustfmt::skip]
const GP_IDX: [[usize; 8]; 8] = [
    [0, 1, 2, 3, 4, 5, 6, 7],
    [1, 0, 4, 5, 2, 3, 7, 6],
    [2, 4, 0, 6, 1, 7, 3, 5],
    [3, 5, 6, 0, 7, 1, 2, 4],
    [4, 2, 1, 7, 0, 6, 5, 3],
    [5, 3, 7, 1, 6, 0, 4, 2],
    [6, 7, 3, 2, 5, 4, 0, 1],
    [7, 6, 5, 4, 3, 2, 1, 0],
];

#[rustfmt::skip]
const GP_SIGN: [[f64; 8]; 8] = [
    [1.0,  1.0,  1.0,  1.0,  1.0,  1.0,  1.0,  1.0],
    [1.0,  1.0,  1.0,  1.0,  1.0,  1.0,  1.0,  1.0],
    [1.0, -1.0,  1.0,  1.0, -1.0, -1.0,  1.0, -1.0],
    [1.0, -1.0, -1.0,  1.0,  1.0, -1.0, -1.0,  1.0],
    [1.0, -1.0,  1.0,  1.0, -1.0, -1.0,  1.0, -1.0],
    [1.0, -1.0, -1.0,  1.0,  1.0, -1.0, -1.0,  1.0],
    [1.0,  1.0, -1.0,  1.0, -1.0,  1.0, -1.0, -1.0],
    [1.0,  1.0, -1.0,  1.0, -1.0,  1.0, -1.0, -1.0],
];

/// Generator bitmask of each blade (bit k set means sigma_{k+1} present).
/// Used to restrict the geometric-product table to the exterior product:
/// `e_i ^ e_j` is `e_i e_j` when the generator sets are disjoint, else 0.
const BITS: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Reversion sign per blade: grades 0 and 1 keep sign, grades 2 and 3 flip.
const REV_SIGN: [f64; 8] = [1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0];

/// Errors from rotor construction and plane-angle measurements.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    /// The two planes are antiparallel; the minimal rotor is undefined.
    /// Callers must choose a fallback rotation plane themselves.
    #[error("planes are antiparallel, rotor undefined")]
    AntiparallelPlanes,
    /// Bivector magnitude below the caller-supplied epsilon.
    #[error("bivector magnitude {magnitude:.3e} below epsilon {epsilon:.3e}")]
    ZeroBivector { magnitude: f64, epsilon: f64 },
}

/// General element of G3: 8 coefficients on `[1, s1, s2, s3, s12, s13, s23, s123]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Multivector3 {
    pub coeffs: [f64; 8],
}

impl Multivector3 {
    pub const ZERO: Self = Self { coeffs: [0.0; 8] };

    pub fn new(coeffs: [f64; 8]) -> Self {
        Self { coeffs }
    }

    pub fn scalar(value: f64) -> Self {
        let mut coeffs = [0.0; 8];
        coeffs[IDX_SCALAR] = value;
        Self { coeffs }
    }

    /// The i-th basis blade (0..8) with unit coefficient.
    pub fn basis(index: usize) -> Self {
        let mut coeffs = [0.0; 8];
        coeffs[index] = 1.0;
        Self { coeffs }
    }

    /// Full Clifford product under signature (3,0,0).
    pub fn geometric_product(&self, rhs: &Self) -> Self {
        let mut out = [0.0; 8];
        for i in 0..8 {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..8 {
                out[GP_IDX[i][j]] += GP_SIGN[i][j] * a * rhs.coeffs[j];
            }
        }
        Self { coeffs: out }
    }

    /// Exterior (Grassmann) product: the grade-raising part of the
    /// geometric product. For vectors `a ^ b = -b ^ a` and `a ^ a = 0`.
    pub fn wedge(&self, rhs: &Self) -> Self {
        let mut out = [0.0; 8];
        for i in 0..8 {
            let a = self.coeffs[i];
            if a == 0.0 {
                continue;
            }
            for j in 0..8 {
                if BITS[i] & BITS[j] == 0 {
                    out[GP_IDX[i][j]] += GP_SIGN[i][j] * a * rhs.coeffs[j];
                }
            }
        }
        Self { coeffs: out }
    }

    /// Reversion: grades 0 and 1 unchanged, grades 2 and 3 negated.
    pub fn reverse(&self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, sign) in coeffs.iter_mut().zip(REV_SIGN) {
            *c *= sign;
        }
        Self { coeffs }
    }

    /// Grade projection: keeps only the grade-k coefficients.
    pub fn grade(&self, k: usize) -> Self {
        let mut coeffs = [0.0; 8];
        for i in 0..8 {
            if GRADE[i] == k {
                coeffs[i] = self.coeffs[i];
            }
        }
        Self { coeffs }
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[IDX_SCALAR]
    }

    pub fn pseudoscalar_part(&self) -> f64 {
        self.coeffs[IDX_S123]
    }

    pub fn vector_part(&self) -> Vector3 {
        Vector3::new(
            self.coeffs[IDX_S1],
            self.coeffs[IDX_S2],
            self.coeffs[IDX_S3],
        )
    }

    /// Grade-2 part in cyclic (b12, b23, b31) components.
    pub fn bivector_part(&self) -> Bivector3 {
        Bivector3::new(
            self.coeffs[IDX_S12],
            self.coeffs[IDX_S23],
            -self.coeffs[IDX_S13],
        )
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

impl Add for Multivector3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs) {
            *c += r;
        }
        Self { coeffs }
    }
}

impl Sub for Multivector3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut coeffs = self.coeffs;
        for (c, r) in coeffs.iter_mut().zip(rhs.coeffs) {
            *c -= r;
        }
        Self { coeffs }
    }
}

impl Neg for Multivector3 {
    type Output = Self;
    fn neg(self) -> Self {
        let mut coeffs = self.coeffs;
        for c in coeffs.iter_mut() {
            *c = -*c;
        }
        Self { coeffs }
    }
}

impl Mul<f64> for Multivector3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let mut coeffs = self.coeffs;
        for c in coeffs.iter_mut() {
            *c *= rhs;
        }
        Self { coeffs }
    }
}

/// Instantaneous three-phase sample as a grade-1 element: phase A on s1,
/// phase B on s2, phase C on s3.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Vector3 {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn to_multivector(self) -> Multivector3 {
        let mut coeffs = [0.0; 8];
        coeffs[IDX_S1] = self.x1;
        coeffs[IDX_S2] = self.x2;
        coeffs[IDX_S3] = self.x3;
        Multivector3 { coeffs }
    }

    pub fn dot(&self, rhs: &Self) -> f64 {
        self.x1 * rhs.x1 + self.x2 * rhs.x2 + self.x3 * rhs.x3
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Exterior product of two vectors, directly in cyclic components.
    pub fn wedge(&self, rhs: &Self) -> Bivector3 {
        Bivector3::new(
            self.x1 * rhs.x2 - self.x2 * rhs.x1,
            self.x2 * rhs.x3 - self.x3 * rhs.x2,
            self.x3 * rhs.x1 - self.x1 * rhs.x3,
        )
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.x1 * k, self.x2 * k, self.x3 * k)
    }
}

/// Oriented plane element with components in cyclic order (s12, s23, s31).
///
/// The cyclic order differs from the canonical ascending blade order used
/// inside [`Multivector3`]; conversion negates the s13 slot since
/// `s31 = -s13`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bivector3 {
    pub b12: f64,
    pub b23: f64,
    pub b31: f64,
}

/// Scalar, grade-2 and grade-4 parts of a bivector-bivector geometric
/// product. G3 has no grade 4, so that part is identically zero; it is
/// carried for contract completeness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivectorProducts {
    pub contraction: f64,
    pub commutator: Bivector3,
    pub grade4: f64,
}

impl Bivector3 {
    pub const ZERO: Self = Self {
        b12: 0.0,
        b23: 0.0,
        b31: 0.0,
    };

    /// The s12 coordinate plane.
    pub const SIGMA12: Self = Self {
        b12: 1.0,
        b23: 0.0,
        b31: 0.0,
    };

    /// Kirchhoff plane bivector `K = s12 + s23 + s31` (normal (1,1,1)).
    pub const KIRCHHOFF: Self = Self {
        b12: 1.0,
        b23: 1.0,
        b31: 1.0,
    };

    pub fn new(b12: f64, b23: f64, b31: f64) -> Self {
        Self { b12, b23, b31 }
    }

    /// Unit Kirchhoff bivector, every component `1/sqrt(3)`.
    pub fn kirchhoff_unit() -> Self {
        let c = 1.0 / 3f64.sqrt();
        Self::new(c, c, c)
    }

    pub fn to_multivector(self) -> Multivector3 {
        let mut coeffs = [0.0; 8];
        coeffs[IDX_S12] = self.b12;
        coeffs[IDX_S13] = -self.b31;
        coeffs[IDX_S23] = self.b23;
        Multivector3 { coeffs }
    }

    pub fn magnitude(&self) -> f64 {
        (self.b12 * self.b12 + self.b23 * self.b23 + self.b31 * self.b31).sqrt()
    }

    /// Component dot product. Equals the scalar part of `A B\u{2020}` for the
    /// corresponding multivectors, in either component convention.
    pub fn dot(&self, rhs: &Self) -> f64 {
        self.b12 * rhs.b12 + self.b23 * rhs.b23 + self.b31 * rhs.b31
    }

    pub fn normalized(&self) -> Option<Self> {
        let m = self.magnitude();
        if m > 0.0 && m.is_finite() {
            Some(self.scale(1.0 / m))
        } else {
            None
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.b12 * k, self.b23 * k, self.b31 * k)
    }

    /// Grade-separated parts of the geometric product `self * rhs`.
    pub fn products(&self, rhs: &Self) -> BivectorProducts {
        let a = self.to_multivector();
        let b = rhs.to_multivector();
        let ab = a.geometric_product(&b);
        let ba = b.geometric_product(&a);
        let commutator = ((ab - ba) * 0.5).bivector_part();
        BivectorProducts {
            contraction: ab.scalar_part(),
            commutator,
            grade4: 0.0,
        }
    }
}

impl Add for Bivector3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.b12 + rhs.b12, self.b23 + rhs.b23, self.b31 + rhs.b31)
    }
}

impl Sub for Bivector3 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.b12 - rhs.b12, self.b23 - rhs.b23, self.b31 - rhs.b31)
    }
}

impl Neg for Bivector3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.b12, -self.b23, -self.b31)
    }
}

/// Unit even multivector `R = cos(theta/2) + sin(theta/2) L` implementing a
/// rotation through the sandwich product `R m R\u{2020}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotor3 {
    scalar: f64,
    plane: Bivector3,
}

impl Rotor3 {
    pub fn identity() -> Self {
        Self {
            scalar: 1.0,
            plane: Bivector3::ZERO,
        }
    }

    pub fn scalar_part(&self) -> f64 {
        self.scalar
    }

    pub fn bivector_part(&self) -> Bivector3 {
        self.plane
    }

    /// Rotation angle in [0, 2pi).
    pub fn angle(&self) -> f64 {
        2.0 * self.plane.magnitude().atan2(self.scalar)
    }

    /// Minimal rotor taking unit bivector `source` onto unit bivector
    /// `target`: `R = (1 + target * source\u{2020}) / ||...||`, so that
    /// `R source R\u{2020} = target`.
    ///
    /// Undefined for antiparallel planes (`target = -source`), reported as
    /// [`GaError::AntiparallelPlanes`]; callers pick their own fallback.
    pub fn between_bivectors(target: &Bivector3, source: &Bivector3) -> Result<Self, GaError> {
        let a = target.to_multivector();
        let b_rev = source.to_multivector().reverse();
        let m = Multivector3::scalar(1.0) + a.geometric_product(&b_rev);
        let norm = m.norm();
        if norm < 1e-9 {
            return Err(GaError::AntiparallelPlanes);
        }
        let r = m * (1.0 / norm);
        Ok(Self {
            scalar: r.scalar_part(),
            plane: r.bivector_part(),
        })
    }

    fn to_multivector(self) -> Multivector3 {
        let mut m = self.plane.to_multivector();
        m.coeffs[IDX_SCALAR] = self.scalar;
        m
    }

    /// Sandwich product `R m R\u{2020}`. Preserves grade, norm, and angles.
    pub fn sandwich(&self, m: &Multivector3) -> Multivector3 {
        let r = self.to_multivector();
        r.geometric_product(m).geometric_product(&r.reverse())
    }

    pub fn apply_vector(&self, v: &Vector3) -> Vector3 {
        self.sandwich(&v.to_multivector()).vector_part()
    }

    pub fn apply_bivector(&self, b: &Bivector3) -> Bivector3 {
        self.sandwich(&b.to_multivector()).bivector_part()
    }

    pub fn reverse(&self) -> Self {
        Self {
            scalar: self.scalar,
            plane: -self.plane,
        }
    }
}

/// Angular deviation of a plane from the Kirchhoff plane:
/// `delta = arccos(Bhat . Khat) in [0, pi]`, zero iff `B` is proportional
/// to `K`. A direct measure of three-phase unbalance.
///
/// `epsilon` is the magnitude floor below which the plane is considered
/// undefined; pass a scale appropriate to the vectors that generated `b`.
pub fn kirchhoff_deviation(b: &Bivector3, epsilon: f64) -> Result<f64, GaError> {
    let magnitude = b.magnitude();
    if !(magnitude > epsilon) || !magnitude.is_finite() {
        return Err(GaError::ZeroBivector { magnitude, epsilon });
    }
    let cos = b.dot(&Bivector3::kirchhoff_unit()) / magnitude;
    Ok(cos.clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Brute-force blade product: merge generator lists by counting the
    /// transpositions needed to sort them, squares eliminating to +1.
    /// Independent of the hand-written structure-constant tables.
    fn oracle_blade_product(i: usize, j: usize) -> (f64, usize) {
        let (a, b) = (BITS[i], BITS[j]);
        let mut swaps = 0u32;
        let mut shifted = a >> 1;
        while shifted != 0 {
            swaps += (shifted & b).count_ones();
            shifted >>= 1;
        }
        let bits = a ^ b;
        let idx = BITS.iter().position(|&x| x == bits).unwrap();
        (if swaps.is_multiple_of(2) { 1.0 } else { -1.0 }, idx)
    }

    fn random_mv(rng: &mut StdRng) -> Multivector3 {
        let mut coeffs = [0.0; 8];
        for c in coeffs.iter_mut() {
            *c = rng.gen_range(-1.0..1.0);
        }
        Multivector3::new(coeffs)
    }

    fn random_unit_bivector(rng: &mut StdRng) -> Bivector3 {
        loop {
            let b = Bivector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if let Some(u) = b.normalized() {
                if b.magnitude() > 0.1 {
                    return u;
                }
            }
        }
    }

    /// Axis-angle rotation matrix equivalent to a rotor, built through an
    /// independent Rodrigues construction. The rotor
    /// `cos(t/2) + sin(t/2)(b12 s12 + b23 s23 + b31 s31)` rotates vectors by
    /// `t` about the axis `-(b23, b31, b12)`.
    fn rotor_to_matrix(r: &Rotor3) -> [[f64; 3]; 3] {
        let l = r.bivector_part();
        let m = l.magnitude();
        let theta = 2.0 * m.atan2(r.scalar_part());
        if m < 1e-300 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        let axis = [-l.b23 / m, -l.b31 / m, -l.b12 / m];
        let (s, c) = theta.sin_cos();
        let [x, y, z] = axis;
        [
            [
                c + x * x * (1.0 - c),
                x * y * (1.0 - c) - z * s,
                x * z * (1.0 - c) + y * s,
            ],
            [
                y * x * (1.0 - c) + z * s,
                c + y * y * (1.0 - c),
                y * z * (1.0 - c) - x * s,
            ],
            [
                z * x * (1.0 - c) - y * s,
                z * y * (1.0 - c) + x * s,
                c + z * z * (1.0 - c),
            ],
        ]
    }

    fn mat_apply(m: &[[f64; 3]; 3], v: &Vector3) -> Vector3 {
        Vector3::new(
            m[0][0] * v.x1 + m[0][1] * v.x2 + m[0][2] * v.x3,
            m[1][0] * v.x1 + m[1][1] * v.x2 + m[1][2] * v.x3,
            m[2][0] * v.x1 + m[2][1] * v.x2 + m[2][2] * v.x3,
        )
    }

    #[test]
    fn cayley_table_matches_brute_force_oracle() {
        for i in 0..8 {
            for j in 0..8 {
                let (sign, idx) = oracle_blade_product(i, j);
                assert_eq!(GP_IDX[i][j], idx, "index mismatch at ({i},{j})");
                assert_eq!(GP_SIGN[i][j], sign, "sign mismatch at ({i},{j})");
            }
        }
    }

    #[test]
    fn basis_products() {
        let s1 = Multivector3::basis(IDX_S1);
        let s2 = Multivector3::basis(IDX_S2);
        // s1 s1 = 1
        assert_eq!(s1.geometric_product(&s1), Multivector3::scalar(1.0));
        // s1 s2 = s12
        assert_eq!(s1.geometric_product(&s2), Multivector3::basis(IDX_S12));
        // (1 + s1)(1 - s1) = 0
        let p = Multivector3::scalar(1.0) + s1;
        let q = Multivector3::scalar(1.0) - s1;
        assert_eq!(p.geometric_product(&q), Multivector3::ZERO);
        // anticommutation
        for i in [IDX_S1, IDX_S2, IDX_S3] {
            for j in [IDX_S1, IDX_S2, IDX_S3] {
                if i == j {
                    continue;
                }
                let a = Multivector3::basis(i);
                let b = Multivector3::basis(j);
                let sum = a.geometric_product(&b) + b.geometric_product(&a);
                assert_eq!(sum, Multivector3::ZERO);
            }
        }
    }

    #[test]
    fn wedge_examples() {
        let s1 = Multivector3::basis(IDX_S1);
        let s2 = Multivector3::basis(IDX_S2);
        let s3 = Multivector3::basis(IDX_S3);
        assert_eq!(s1.wedge(&s2), Multivector3::basis(IDX_S12));
        // s1 ^ s2 ^ s3 = s123
        assert_eq!(s1.wedge(&s2).wedge(&s3), Multivector3::basis(IDX_S123));
        // v ^ v = 0
        let v = Vector3::new(0.3, -1.2, 0.9).to_multivector();
        assert_eq!(v.wedge(&v), Multivector3::ZERO);
        // (s1+s2) ^ (s2+s3) = s12 + s13 + s23
        let a = s1 + s2;
        let b = s2 + s3;
        let mut expect = [0.0; 8];
        expect[IDX_S12] = 1.0;
        expect[IDX_S13] = 1.0;
        expect[IDX_S23] = 1.0;
        assert_eq!(a.wedge(&b), Multivector3::new(expect));
    }

    #[test]
    fn vector_wedge_agrees_with_multivector_wedge() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let a = Vector3::new(rng.gen(), rng.gen(), rng.gen());
            let b = Vector3::new(rng.gen(), rng.gen(), rng.gen());
            let direct = a.wedge(&b);
            let via_mv = a
                .to_multivector()
                .wedge(&b.to_multivector())
                .bivector_part();
            assert_abs_diff_eq!(direct.b12, via_mv.b12, epsilon = 1e-15);
            assert_abs_diff_eq!(direct.b23, via_mv.b23, epsilon = 1e-15);
            assert_abs_diff_eq!(direct.b31, via_mv.b31, epsilon = 1e-15);
        }
    }

    #[test]
    fn reversion() {
        let s12 = Multivector3::basis(IDX_S12);
        assert_eq!(s12.reverse(), -s12);
        let m = Multivector3::scalar(3.0) + Multivector3::basis(IDX_S1);
        assert_eq!(m.reverse(), m);
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let m = random_mv(&mut rng);
            assert_eq!(m.reverse().reverse(), m);
        }
    }

    #[test]
    fn bivector_product_decomposition() {
        let s12 = Bivector3::SIGMA12;
        let p = s12.products(&s12);
        assert_abs_diff_eq!(p.contraction, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.commutator.magnitude(), 0.0, epsilon = 1e-15);
        assert_eq!(p.grade4, 0.0);

        // s12 * s23 has commutator proportional to s13 (= -s31).
        let s23 = Bivector3::new(0.0, 1.0, 0.0);
        let p = s12.products(&s23);
        assert_abs_diff_eq!(p.contraction, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.commutator.b12, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.commutator.b23, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.commutator.b31, -1.0, epsilon = 1e-15);

        // A bivector-bivector geometric product never leaves grades {0, 2}.
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let a = random_unit_bivector(&mut rng).to_multivector();
            let b = random_unit_bivector(&mut rng).to_multivector();
            let ab = a.geometric_product(&b);
            assert_eq!(ab.grade(1), Multivector3::ZERO);
            assert_eq!(ab.grade(3), Multivector3::ZERO);
        }
    }

    #[test]
    fn rotor_identity_and_antiparallel() {
        let s12 = Bivector3::SIGMA12;
        let r = Rotor3::between_bivectors(&s12, &s12).unwrap();
        assert_abs_diff_eq!(r.scalar_part(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bivector_part().magnitude(), 0.0, epsilon = 1e-15);

        let err = Rotor3::between_bivectors(&-s12, &s12).unwrap_err();
        assert_eq!(err, GaError::AntiparallelPlanes);
    }

    #[test]
    fn rotor_aligns_kirchhoff_with_sigma12() {
        let k = Bivector3::kirchhoff_unit();
        let r = Rotor3::between_bivectors(&Bivector3::SIGMA12, &k).unwrap();
        // rotation angle between the planes
        assert_abs_diff_eq!(r.angle(), (1.0 / 3f64.sqrt()).acos(), epsilon = 1e-12);
        let image = r.apply_bivector(&k);
        assert_abs_diff_eq!(image.b12, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(image.b23, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(image.b31, 0.0, epsilon = 1e-12);
        // unit rotor: R R\u{2020} = 1
        let rr = r
            .to_multivector()
            .geometric_product(&r.to_multivector().reverse());
        assert_abs_diff_eq!(
            (rr - Multivector3::scalar(1.0)).norm(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sandwich_matches_rotation_matrix_oracle() {
        // the identity rotor leaves any multivector untouched
        let mut rng = StdRng::seed_from_u64(15);
        let m = random_mv(&mut rng);
        assert_eq!(Rotor3::identity().sandwich(&m), m);

        // quarter turn in the s12 plane takes s1 to s2
        let r = Rotor3 {
            scalar: (std::f64::consts::FRAC_PI_4).cos(),
            plane: Bivector3::new(-(std::f64::consts::FRAC_PI_4).sin(), 0.0, 0.0),
        };
        let image = r.apply_vector(&Vector3::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(image.x1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(image.x2, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(image.x3, 0.0, epsilon = 1e-15);

        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..200 {
            let a = random_unit_bivector(&mut rng);
            let b = random_unit_bivector(&mut rng);
            let Ok(r) = Rotor3::between_bivectors(&a, &b) else {
                continue;
            };
            let m = rotor_to_matrix(&r);
            let v = Vector3::new(rng.gen(), rng.gen(), rng.gen());
            let via_rotor = r.apply_vector(&v);
            let via_matrix = mat_apply(&m, &v);
            assert_abs_diff_eq!(via_rotor.x1, via_matrix.x1, epsilon = 1e-12);
            assert_abs_diff_eq!(via_rotor.x2, via_matrix.x2, epsilon = 1e-12);
            assert_abs_diff_eq!(via_rotor.x3, via_matrix.x3, epsilon = 1e-12);
            // norm preservation
            assert_abs_diff_eq!(via_rotor.norm(), v.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn kirchhoff_deviation_values() {
        let k = Bivector3::KIRCHHOFF;
        assert_abs_diff_eq!(
            kirchhoff_deviation(&k, 1e-12).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // scale invariance
        assert_abs_diff_eq!(
            kirchhoff_deviation(&k.scale(5.0), 1e-12).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let dev = kirchhoff_deviation(&Bivector3::SIGMA12, 1e-12).unwrap();
        assert_abs_diff_eq!(dev, (1.0 / 3f64.sqrt()).acos(), epsilon = 1e-12);
        assert!(matches!(
            kirchhoff_deviation(&Bivector3::ZERO, 1e-12),
            Err(GaError::ZeroBivector { .. })
        ));
    }

    proptest! {
        #[test]
        fn geometric_product_associative(
            a in proptest::array::uniform8(-1.0f64..1.0),
            b in proptest::array::uniform8(-1.0f64..1.0),
            c in proptest::array::uniform8(-1.0f64..1.0),
        ) {
            let (a, b, c) = (Multivector3::new(a), Multivector3::new(b), Multivector3::new(c));
            let lhs = a.geometric_product(&b).geometric_product(&c);
            let rhs = a.geometric_product(&b.geometric_product(&c));
            let scale = lhs.norm().max(rhs.norm()).max(1.0);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        #[test]
        fn rotor_alignment_property(
            raw in proptest::array::uniform3(-1.0f64..1.0),
        ) {
            let b = Bivector3::new(raw[0], raw[1], raw[2]);
            prop_assume!(b.magnitude() > 0.05);
            let bhat = b.normalized().unwrap();
            // exclude near-antiparallel planes, where the minimal rotor blows up
            prop_assume!((Bivector3::SIGMA12 + bhat).magnitude() > 1e-3);
            let r = Rotor3::between_bivectors(&Bivector3::SIGMA12, &bhat).unwrap();
            let image = r.apply_bivector(&bhat);
            prop_assert!((image - Bivector3::SIGMA12).magnitude() < 1e-10);
        }
    }
}
