//! Conic representation and origin-centered ellipse fitting.
//!
//! Planar conics live in an 8-dimensional vector space where a conic is a
//! vector with 6 active coordinates and a point embeds with quadratic
//! monomial components. Fitting minimizes the algebraic residual through a
//! bilinear form, which for centered conics (`v4 = v5 = 0`) reduces to a
//! 4-parameter constrained generalized eigenproblem. The constraint keeps
//! the quadratic part elliptic, so the minimizer is the eigenvector of the
//! unique non-negative eigenvalue.
//!
//! The eigenproblem is solved directly: the singular constraint row is
//! eliminated by a Schur complement, leaving a 3x3 symmetric pencil whose
//! characteristic cubic is solved in closed form and polished with Newton
//! steps. No external eigensolver is involved.
//!
//! Degenerate trajectories (bolted line-to-line faults collapse the curve
//! onto a segment) are handled by [`fit_line_tls`], a total-least-squares
//! line through the origin-centered cloud.

use std::f64::consts::PI;

use thiserror::Error;

/// Relative eccentricity below which a fit is reported as a circle and the
/// inclination angle is fixed at zero by convention.
pub const CIRCLE_ALPHA_TOL: f64 = 1e-3;

/// Errors from conic and line fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    /// The constrained pencil has no eigenvalue on the elliptic branch;
    /// the sample set is degenerate (e.g. collinear). Callers fall back to
    /// a line fit.
    #[error("no non-negative eigenvalue on the elliptic branch")]
    NoNonNegativeEigenvalue,
    /// The solution cannot be normalized by its first coefficient.
    #[error("first conic coefficient vanishes, cannot normalize")]
    SingularNormalization,
    /// The conic is not an ellipse (alpha >= 1 or beta <= 0).
    #[error("conic is not an ellipse (alpha={alpha:.6}, beta={beta:.6})")]
    NotAnEllipse { alpha: f64, beta: f64 },
    /// All points coincide; no direction is defined.
    #[error("point cloud is degenerate (all points coincide)")]
    DegenerateCloud,
}

/// A 2-D point embedded with its quadratic monomials, components ordered
/// `(o, o~, o-, s1, s2, inf, inf~, inf-)`.
///
/// An embedded point `(x1, x2)` has components
/// `(1, 0, 0, x1, x2, (x1^2+x2^2)/2, (x1^2-x2^2)/2, x1*x2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GacPoint {
    pub components: [f64; 8],
}

/// Embed a 2-D point. The first component of an embedded point is always 1.
pub fn embed_point(p: [f64; 2]) -> GacPoint {
    let [x1, x2] = p;
    debug_assert!(x1.is_finite() && x2.is_finite());
    GacPoint {
        components: [
            1.0,
            0.0,
            0.0,
            x1,
            x2,
            0.5 * (x1 * x1 + x2 * x2),
            0.5 * (x1 * x1 - x2 * x2),
            x1 * x2,
        ],
    }
}

/// Bilinear form pairing conic vectors with embedded points:
/// block matrix `[[0, 0, -I3], [0, I2, 0], [-I3, 0, 0]]`. Symmetric with
/// entries in {-1, 0, 1}.
pub fn bilinear_form() -> [[f64; 8]; 8] {
    let mut b = [[0.0; 8]; 8];
    for i in 0..3 {
        b[i][5 + i] = -1.0;
        b[5 + i][i] = -1.0;
    }
    b[3][3] = 1.0;
    b[4][4] = 1.0;
    b
}

/// Objective matrix `P = (1/N) B D D^T B` where `D` stacks the embedded
/// points column-wise. Symmetric positive semidefinite; `v^T P v` is the
/// mean squared algebraic residual of the conic `v` over the points.
pub fn build_p_matrix(points: &[[f64; 2]]) -> Result<[[f64; 8]; 8], FitError> {
    if points.is_empty() {
        return Err(FitError::InsufficientPoints { needed: 1, got: 0 });
    }
    let b = bilinear_form();
    let mut p = [[0.0; 8]; 8];
    for point in points {
        let x = embed_point(*point).components;
        // y = B x
        let mut y = [0.0; 8];
        for (row, yi) in y.iter_mut().enumerate() {
            *yi = (0..8).map(|col| b[row][col] * x[col]).sum();
        }
        for i in 0..8 {
            for j in 0..8 {
                p[i][j] += y[i] * y[j];
            }
        }
    }
    let inv_n = 1.0 / points.len() as f64;
    for row in p.iter_mut() {
        for v in row.iter_mut() {
            *v *= inv_n;
        }
    }
    Ok(p)
}

/// Conic with coefficients `(v1..v6)` on the active basis directions;
/// centered fits have `v4 = v5 = 0`. When `normalized` is set, `v1 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicVector {
    pub v: [f64; 6],
    pub normalized: bool,
}

/// Shape class of a fitted conic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicClass {
    Circle,
    Ellipse,
    /// Not an ellipse: collapsed or open conic.
    Degenerate,
}

impl ConicVector {
    /// Eccentricity measure `alpha = sqrt(v2^2 + v3^2)`; `< 1` for ellipses.
    pub fn alpha(&self) -> f64 {
        (self.v[1] * self.v[1] + self.v[2] * self.v[2]).sqrt()
    }

    /// Size measure `beta = -2 v6`; `> 0` for real ellipses.
    pub fn beta(&self) -> f64 {
        -2.0 * self.v[5]
    }

    pub fn class(&self) -> ConicClass {
        let alpha = self.alpha();
        if alpha >= 1.0 || self.beta() <= 0.0 {
            ConicClass::Degenerate
        } else if alpha < CIRCLE_ALPHA_TOL {
            ConicClass::Circle
        } else {
            ConicClass::Ellipse
        }
    }

    /// Conic padded to the full 8-component space (zeros on the two
    /// trailing slots that points use for their quadratic monomials).
    pub fn padded(&self) -> [f64; 8] {
        let [v1, v2, v3, v4, v5, v6] = self.v;
        [v1, v2, v3, v4, v5, v6, 0.0, 0.0]
    }

    /// Algebraic residual of a point against this conic through the
    /// bilinear form; zero when the point lies on the conic.
    pub fn residual(&self, point: [f64; 2]) -> f64 {
        let x = embed_point(point).components;
        let q = self.padded();
        let b = bilinear_form();
        let mut acc = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                acc += x[i] * b[i][j] * q[j];
            }
        }
        acc
    }
}

/// Geometric parameters of a centered ellipse: semi-axes `a >= b >= 0` in
/// signal units and major-axis inclination `theta` in `[0, pi)`. Circles
/// report `theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
}

/// Total-least-squares line through the origin-centered cloud: orientation
/// in `[0, pi)` and the maximum absolute projection of the points onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineParams {
    pub angle: f64,
    pub half_length: f64,
}

/// Fold an angle into `[0, pi)`; ellipse and line orientations are
/// pi-periodic.
pub(crate) fn fold_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(PI);
    if a >= PI {
        0.0
    } else {
        a
    }
}

/// Major-axis inclination of a normalized elliptic conic, in `[0, pi)`.
///
/// With `v1` normalized to +1 the quadratic part is positive definite and
/// the `(v2, v3)` pair points along the double angle of the *minor* axis;
/// negating it selects the major axis. Circles (`alpha` below
/// [`CIRCLE_ALPHA_TOL`]) report 0 by convention.
pub fn extract_angle(q: &ConicVector) -> f64 {
    if q.alpha() < CIRCLE_ALPHA_TOL {
        return 0.0;
    }
    fold_pi(0.5 * (-q.v[2]).atan2(-q.v[1]))
}

/// Semi-axes of a normalized elliptic conic:
/// `a = sqrt(beta/(1-alpha))`, `b = sqrt(beta/(1+alpha))`.
pub fn extract_semiaxes(q: &ConicVector) -> Result<(f64, f64), FitError> {
    let alpha = q.alpha();
    let beta = q.beta();
    if alpha >= 1.0 || beta <= 0.0 {
        return Err(FitError::NotAnEllipse { alpha, beta });
    }
    Ok(((beta / (1.0 - alpha)).sqrt(), (beta / (1.0 + alpha)).sqrt()))
}

/// Reduced 4x4 moment matrix over the active parameters `(v1, v2, v3, v6)`.
/// Built directly from the quadratic monomials; equals the corresponding
/// principal submatrix of [`build_p_matrix`] (checked in tests).
fn reduced_moments(points: &[[f64; 2]], inv_scale: f64) -> [[f64; 4]; 4] {
    let mut m = [[0.0f64; 4]; 4];
    for p in points {
        let (x, y) = (p[0] * inv_scale, p[1] * inv_scale);
        let row = [0.5 * (x * x + y * y), 0.5 * (x * x - y * y), x * y, 1.0];
        for i in 0..4 {
            for j in i..4 {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    let inv_n = 1.0 / points.len() as f64;
    for i in 0..4 {
        for j in i..4 {
            m[i][j] *= inv_n;
            m[j][i] = m[i][j];
        }
    }
    m
}

/// Real roots of `x^3 + a2 x^2 + a1 x + a0`, ascending. The pencils solved
/// here are definite, so three real roots are expected; a lone real root is
/// still returned when rounding pushes the discriminant negative.
fn real_cubic_roots(a2: f64, a1: f64, a0: f64) -> ([f64; 3], usize) {
    let f = |x: f64| ((x + a2) * x + a1) * x + a0;
    let fd = |x: f64| (3.0 * x + 2.0 * a2) * x + a1;
    let polish = |mut x: f64| {
        for _ in 0..2 {
            let d = fd(x);
            if d.abs() > 0.0 {
                x -= f(x) / d;
            }
        }
        x
    };

    // depressed form t^3 + p t + q with x = t - a2/3
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = a0 - a1 * shift + 2.0 * shift * shift * shift;

    let mut roots = [0.0f64; 3];
    let count;
    if p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        // cos(3 psi) = -4q / m^3
        let c = (-4.0 * q / (m * m * m)).clamp(-1.0, 1.0);
        let psi = c.acos() / 3.0;
        for (k, r) in roots.iter_mut().enumerate() {
            *r = polish(m * (psi - 2.0 * PI * k as f64 / 3.0).cos() - shift);
        }
        count = 3;
    } else if p == 0.0 && q == 0.0 {
        roots[0] = polish(-shift);
        count = 1;
    } else {
        // single real root via Cardano
        let disc = q * q / 4.0 + p * p * p / 27.0;
        let s = disc.max(0.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        roots[0] = polish(t - shift);
        count = 1;
    }
    roots[..count].sort_by(|a, b| a.partial_cmp(b).unwrap());
    (roots, count)
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn mat_vec3(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Gaussian elimination with partial pivoting; `None` on exact breakdown.
fn solve3(m: &[[f64; 3]; 3], rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = *m;
    let mut x = *rhs;
    for col in 0..3 {
        let mut piv = col;
        for r in col + 1..3 {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        x.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            x[r] -= f * x[col];
        }
    }
    let mut out = [0.0; 3];
    for col in (0..3).rev() {
        let mut v = x[col];
        for c in col + 1..3 {
            v -= a[col][c] * out[c];
        }
        out[col] = v / a[col][col];
    }
    Some(out)
}

/// Unit null-ish direction of `m`: cross products of row pairs pick the
/// initial estimate, inverse iteration sharpens it.
fn null_direction(m: &[[f64; 3]; 3]) -> Option<[f64; 3]> {
    let rows = [m[0], m[1], m[2]];
    let candidates = [
        cross3(&rows[0], &rows[1]),
        cross3(&rows[0], &rows[2]),
        cross3(&rows[1], &rows[2]),
    ];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if norm3(c) > norm3(&best) {
            best = *c;
        }
    }
    let n = norm3(&best);
    if !(n > 0.0) || !n.is_finite() {
        return None;
    }
    let mut w = [best[0] / n, best[1] / n, best[2] / n];
    let mut res = norm3(&mat_vec3(m, &w));
    for _ in 0..2 {
        let Some(x) = solve3(m, &w) else { break };
        let n = norm3(&x);
        if !(n > 0.0) || !n.is_finite() {
            break;
        }
        let cand = [x[0] / n, x[1] / n, x[2] / n];
        let cand_res = norm3(&mat_vec3(m, &cand));
        if cand_res < res {
            w = cand;
            res = cand_res;
        } else {
            break;
        }
    }
    Some(w)
}

/// Fit an origin-centered conic (`v4 = v5 = 0`) minimizing the mean squared
/// algebraic residual subject to the elliptic constraint, and normalize the
/// result by its first coefficient.
///
/// The solved pencil is `P_r v = lambda C v` over `(v1, v2, v3, v6)` with
/// `C = diag(1, -1, -1, 0)`; the eigenvector of the smallest non-negative
/// eigenvalue on the `v^T C v > 0` branch is selected. "Non-negative"
/// tolerates `-1e-9 * ||P_r||` of roundoff so exact-fit data (where the
/// optimum is exactly zero) is accepted.
pub fn fit_centered_conic(points: &[[f64; 2]]) -> Result<ConicVector, FitError> {
    if points.len() < 4 {
        return Err(FitError::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    // normalize the cloud to unit RMS radius for conditioning; the fit is
    // exactly equivariant so only v6 needs rescaling afterwards
    let mean_sq: f64 = points
        .iter()
        .map(|p| p[0] * p[0] + p[1] * p[1])
        .sum::<f64>()
        / points.len() as f64;
    let scale = mean_sq.sqrt();
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(FitError::DegenerateCloud);
    }
    let pr = reduced_moments(points, 1.0 / scale);

    // Schur elimination of the constraint-free v6 row: with
    // q = pr[3][3] (the sigma0 mass, exactly 1) and p the coupling column,
    // S = P11 - p p^T / q and v6 = -(p . w)/q.
    let q = pr[3][3];
    if !(q > 1e-12) {
        return Err(FitError::DegenerateCloud);
    }
    let pc = [pr[0][3], pr[1][3], pr[2][3]];
    let mut s = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            s[i][j] = pr[i][j] - pc[i] * pc[j] / q;
        }
    }

    // characteristic cubic of det(S - lambda C3) with C3 = diag(1, -1, -1),
    // written as lambda^3 + a2 lambda^2 + a1 lambda + a0
    let a2 = s[1][1] + s[2][2] - s[0][0];
    let a1 = (s[1][1] * s[2][2] - s[1][2] * s[1][2]) + s[0][1] * s[0][1] + s[0][2] * s[0][2]
        - s[0][0] * (s[1][1] + s[2][2]);
    let det_s = s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[1][2])
        - s[0][1] * (s[0][1] * s[2][2] - s[1][2] * s[0][2])
        + s[0][2] * (s[0][1] * s[1][2] - s[1][1] * s[0][2]);
    let a0 = -det_s;
    let (roots, count) = real_cubic_roots(a2, a1, a0);

    let frob: f64 = pr.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-9 * frob;

    for &lambda in roots[..count].iter().filter(|&&l| l >= -tol) {
        let m = [
            [s[0][0] - lambda, s[0][1], s[0][2]],
            [s[0][1], s[1][1] + lambda, s[1][2]],
            [s[0][2], s[1][2], s[2][2] + lambda],
        ];
        let Some(w) = null_direction(&m) else {
            continue;
        };
        // elliptic branch only
        if w[0] * w[0] - w[1] * w[1] - w[2] * w[2] <= 0.0 {
            continue;
        }
        if w[0].abs() < 1e-12 {
            return Err(FitError::SingularNormalization);
        }
        let v6 = -(pc[0] * w[0] + pc[1] * w[1] + pc[2] * w[2]) / q;
        return Ok(ConicVector {
            v: [
                1.0,
                w[1] / w[0],
                w[2] / w[0],
                0.0,
                0.0,
                v6 / w[0] * scale * scale,
            ],
            normalized: true,
        });
    }
    Err(FitError::NoNonNegativeEigenvalue)
}

/// Total-least-squares line through the origin-centered cloud: the
/// orientation maximizing the summed squared projections. Points are used
/// as-is; the pipeline guarantees origin-centered trajectories.
///
/// An isotropic cloud has no preferred direction; the exact tie resolves to
/// angle 0 (the smallest).
pub fn fit_line_tls(points: &[[f64; 2]]) -> Result<LineParams, FitError> {
    if points.len() < 2 {
        return Err(FitError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let first = points[0];
    let mut spread = 0.0f64;
    let mut extent = 0.0f64;
    for p in points {
        spread = spread.max((p[0] - first[0]).hypot(p[1] - first[1]));
        extent = extent.max(p[0].hypot(p[1]));
    }
    if spread <= 1e-12 * extent.max(f64::MIN_POSITIVE) {
        return Err(FitError::DegenerateCloud);
    }
    let (mut mxx, mut mxy, mut myy) = (0.0, 0.0, 0.0);
    for p in points {
        mxx += p[0] * p[0];
        mxy += p[0] * p[1];
        myy += p[1] * p[1];
    }
    // isotropic scatter has no preferred direction; resolve the tie to 0
    let anisotropy = (mxx - myy).hypot(2.0 * mxy);
    let angle = if anisotropy <= 1e-12 * (mxx + myy) {
        0.0
    } else {
        fold_pi(0.5 * (2.0 * mxy).atan2(mxx - myy))
    };
    let (dx, dy) = (angle.cos(), angle.sin());
    let half_length = points
        .iter()
        .map(|p| (p[0] * dx + p[1] * dy).abs())
        .fold(0.0f64, f64::max);
    Ok(LineParams { angle, half_length })
}
