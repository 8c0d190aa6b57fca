//! Sliding-window analysis chain: sampling, quarter-cycle windows, bivector
//! extraction, rotor alignment onto the sigma12 plane, 2-D reduction, and
//! dispatch to ellipse or line fitting.
//!
//! Every window is processed independently and purely; results are ordered
//! by window start index.

use thiserror::Error;

use crate::ga3::{Bivector3, GaError, Rotor3, Vector3};
use crate::gac::{self, EllipseParams, FitError, LineParams};

/// One sampled instant: time in seconds and the three phase values
/// (volts, amps, or per-unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleFrame {
    pub t: f64,
    pub ch: [f64; 3],
}

impl SampleFrame {
    pub fn new(t: f64, ch: [f64; 3]) -> Self {
        Self { t, ch }
    }

    pub fn vector(&self) -> Vector3 {
        Vector3::new(self.ch[0], self.ch[1], self.ch[2])
    }
}

/// Window extraction and degeneracy parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowConfig {
    /// Fundamental frequency in Hz (50 or 60).
    pub f0: f64,
    /// Sampling rate in Hz; must give at least ~5 samples per quarter cycle.
    pub fs: f64,
    /// Window span as a fraction of one cycle. A quarter cycle is the sweet
    /// spot for both bivector estimation and arc fitting.
    pub window_fraction: f64,
    /// Samples between successive window starts.
    pub hop: usize,
    /// Threshold on `|sin(angle(x1, xn))|` below which the window is treated
    /// as a collapsed (line) trajectory.
    pub degenerate_ratio: f64,
    /// Width of the optional centered moving-average smoother; 0 or 1
    /// disables it. Input is expected to be adequately filtered already.
    pub smooth_width: usize,
    /// Peak amplitude for per-unit normalization of incoming samples.
    /// `None` analyzes raw units; results scale accordingly.
    pub pu_base: Option<f64>,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            f0: 50.0,
            fs: 10_000.0,
            window_fraction: 0.25,
            hop: 1,
            degenerate_ratio: 1e-3,
            smooth_width: 0,
            pu_base: None,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |msg: &str| Err(PipelineError::InvalidConfig(msg.to_string()));
        if !(self.f0 > 0.0) || !self.f0.is_finite() {
            return fail("f0 must be positive");
        }
        if !(self.fs >= 20.0 * self.f0) || !self.fs.is_finite() {
            return fail("fs must be at least 20*f0");
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return fail("window_fraction must be in (0, 1]");
        }
        if self.hop == 0 {
            return fail("hop must be at least 1");
        }
        if !(self.degenerate_ratio > 0.0) {
            return fail("degenerate_ratio must be positive");
        }
        if let Some(base) = self.pu_base {
            if !(base > 0.0) || !base.is_finite() {
                return fail("pu_base must be positive");
            }
        }
        Ok(())
    }

    /// Samples per analysis window.
    pub fn window_len(&self) -> usize {
        ((self.fs / self.f0 * self.window_fraction).round() as usize).max(2)
    }
}

/// Shape fitted to a window's rotated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeFit {
    Ellipse(EllipseParams),
    Circle { radius: f64 },
    Line(LineParams),
}

impl ShapeFit {
    /// Major and minor semi-axes; a line counts as zero minor axis, a
    /// circle as equal axes.
    pub fn semiaxes(&self) -> (f64, f64) {
        match self {
            ShapeFit::Ellipse(e) => (e.a, e.b),
            ShapeFit::Circle { radius } => (*radius, *radius),
            ShapeFit::Line(l) => (l.half_length, 0.0),
        }
    }

    /// Inclination in `[0, pi)`; zero for circles by convention.
    pub fn angle(&self) -> f64 {
        match self {
            ShapeFit::Ellipse(e) => e.theta,
            ShapeFit::Circle { .. } => 0.0,
            ShapeFit::Line(l) => l.angle,
        }
    }
}

/// Per-window result: the raw (signed) trajectory-plane bivector, its
/// normalized absolute components in `(s12, s23, s31)` order, the fitted
/// shape, and the degeneracy flag.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAnalysis {
    pub t_start: f64,
    pub t_end: f64,
    pub bivector: Bivector3,
    pub bnorm: [f64; 3],
    pub shape: ShapeFit,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("invalid window config: {0}")]
    InvalidConfig(String),
    #[error(
        "non-uniform sampling at frame {index}: dt {actual_dt:.3e}, expected {expected_dt:.3e}"
    )]
    NonUniformSampling {
        index: usize,
        expected_dt: f64,
        actual_dt: f64,
    },
    #[error("non-finite sample at frame {index}")]
    NonFiniteSample { index: usize },
    #[error("window of {got} samples, need at least {needed}")]
    WindowTooShort { needed: usize, got: usize },
    #[error(transparent)]
    Plane(#[from] GaError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Trajectory-plane bivector of a window: the wedge of its first and last
/// sample vectors, in time order. A zero result is a legal degeneracy
/// signal, not an error.
pub fn window_bivector(window: &[Vector3]) -> Bivector3 {
    assert!(window.len() >= 2, "window needs at least two samples");
    window[0].wedge(&window[window.len() - 1])
}

/// Rotor aligning the window's trajectory plane with sigma12. When the
/// plane is exactly antiparallel the minimal rotor is undefined; the second
/// sample is substituted for the first once before giving up.
fn alignment_rotor(window: &[Vector3], b: &Bivector3) -> Result<Rotor3, PipelineError> {
    let magnitude = b.magnitude();
    if !(magnitude > 0.0) || !magnitude.is_finite() {
        return Err(GaError::ZeroBivector {
            magnitude,
            epsilon: 0.0,
        }
        .into());
    }
    let bhat = b.scale(1.0 / magnitude);
    match Rotor3::between_bivectors(&Bivector3::SIGMA12, &bhat) {
        Ok(r) => Ok(r),
        Err(GaError::AntiparallelPlanes) => {
            let retry = window[1].wedge(&window[window.len() - 1]);
            let retried = retry.normalized().ok_or(GaError::ZeroBivector {
                magnitude: 0.0,
                epsilon: 0.0,
            })?;
            Ok(Rotor3::between_bivectors(&Bivector3::SIGMA12, &retried)?)
        }
        Err(e) => Err(e.into()),
    }
}

fn project(window: &[Vector3], rotor: &Rotor3) -> Vec<[f64; 2]> {
    window
        .iter()
        .map(|v| {
            let r = rotor.apply_vector(v);
            [r.x1, r.x2]
        })
        .collect()
}

/// Rotate every sample so the plane `b` lands on sigma12 and return the
/// `(s1, s2)` coefficients. For planar input the out-of-plane coefficient
/// of every rotated sample vanishes to rounding.
pub fn reduce_to_plane(window: &[Vector3], b: &Bivector3) -> Result<Vec<[f64; 2]>, PipelineError> {
    if window.len() < 2 {
        return Err(PipelineError::WindowTooShort {
            needed: 2,
            got: window.len(),
        });
    }
    let rotor = alignment_rotor(window, b)?;
    Ok(project(window, &rotor))
}

/// Constant rotor taking the Kirchhoff plane onto sigma12, used for
/// degenerate (line) windows whose own plane is numerically undefined.
fn kirchhoff_rotor() -> Rotor3 {
    Rotor3::between_bivectors(&Bivector3::SIGMA12, &Bivector3::kirchhoff_unit())
        .expect("Kirchhoff plane is not antiparallel to sigma12")
}

fn fit_shape(points: &[[f64; 2]]) -> Result<ShapeFit, FitError> {
    let q = gac::fit_centered_conic(points)?;
    let (a, b) = gac::extract_semiaxes(&q)?;
    if q.alpha() < gac::CIRCLE_ALPHA_TOL {
        Ok(ShapeFit::Circle {
            radius: 0.5 * (a + b),
        })
    } else {
        Ok(ShapeFit::Ellipse(EllipseParams {
            a,
            b,
            theta: gac::extract_angle(&q),
        }))
    }
}

/// Analyze one window of sample vectors.
///
/// The degeneracy test is the unit-free ratio
/// `||x1 ^ xn|| / (||x1|| ||xn||)`: below `cfg.degenerate_ratio` the
/// trajectory has collapsed onto a line, which is rotated through the
/// Kirchhoff rotor and fitted with total least squares. Otherwise the
/// window is reduced onto its own plane and a centered conic is fitted; if
/// that conic turns out collapsed anyway, the line path is taken as the
/// fallback and the window is flagged degenerate.
///
/// Timestamps are left at zero; [`analyze_record`] fills them in.
pub fn analyze_window(
    window: &[Vector3],
    cfg: &WindowConfig,
) -> Result<WindowAnalysis, PipelineError> {
    if window.len() < 4 {
        return Err(PipelineError::WindowTooShort {
            needed: 4,
            got: window.len(),
        });
    }
    let x1 = window[0];
    let xn = window[window.len() - 1];
    let bivector = x1.wedge(&xn);
    // An endpoint sitting on a zero crossing of a collapsed trajectory is
    // pure rounding junk with an arbitrary direction; flooring the endpoint
    // norms against the window peak keeps the ratio honest there.
    let peak = window.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let floor = 1e-9 * peak;
    let denom = x1.norm().max(floor) * xn.norm().max(floor);
    let ratio = if denom > 0.0 {
        bivector.magnitude() / denom
    } else {
        0.0
    };
    let bnorm = bivector
        .normalized()
        .map(|u| [u.b12.abs(), u.b23.abs(), u.b31.abs()])
        .unwrap_or([0.0; 3]);

    let line_analysis = |points: &[[f64; 2]]| -> Result<WindowAnalysis, PipelineError> {
        let line = gac::fit_line_tls(points)?;
        Ok(WindowAnalysis {
            t_start: 0.0,
            t_end: 0.0,
            bivector,
            bnorm,
            shape: ShapeFit::Line(line),
            degenerate: true,
        })
    };

    if ratio < cfg.degenerate_ratio {
        let points = project(window, &kirchhoff_rotor());
        return line_analysis(&points);
    }

    let points = reduce_to_plane(window, &bivector)?;
    match fit_shape(&points) {
        Ok(shape) => Ok(WindowAnalysis {
            t_start: 0.0,
            t_end: 0.0,
            bivector,
            bnorm,
            shape,
            degenerate: false,
        }),
        Err(
            FitError::NoNonNegativeEigenvalue
            | FitError::SingularNormalization
            | FitError::NotAnEllipse { .. }
            | FitError::DegenerateCloud,
        ) => line_analysis(&points),
        Err(e) => Err(e.into()),
    }
}

/// Centered moving average with edge shrinking; identity for width < 2.
fn smooth(samples: &[Vector3], width: usize) -> Vec<Vector3> {
    if width < 2 {
        return samples.to_vec();
    }
    let half = width / 2;
    (0..samples.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(samples.len() - 1);
            let n = (hi - lo + 1) as f64;
            let mut acc = [0.0f64; 3];
            for s in &samples[lo..=hi] {
                acc[0] += s.x1;
                acc[1] += s.x2;
                acc[2] += s.x3;
            }
            Vector3::new(acc[0] / n, acc[1] / n, acc[2] / n)
        })
        .collect()
}

/// Slide the analysis window across a uniformly sampled record. Produces
/// `floor((N - n)/hop) + 1` window analyses for `N >= n`, an empty list for
/// shorter records. Sampling jitter above 1% of the nominal interval is
/// rejected.
pub fn analyze_record(
    frames: &[SampleFrame],
    cfg: &WindowConfig,
) -> Result<Vec<WindowAnalysis>, PipelineError> {
    cfg.validate()?;
    let expected_dt = 1.0 / cfg.fs;
    for (i, f) in frames.iter().enumerate() {
        if !f.t.is_finite() || f.ch.iter().any(|v| !v.is_finite()) {
            return Err(PipelineError::NonFiniteSample { index: i });
        }
        if i > 0 {
            let dt = f.t - frames[i - 1].t;
            if (dt - expected_dt).abs() > 0.01 * expected_dt {
                return Err(PipelineError::NonUniformSampling {
                    index: i,
                    expected_dt,
                    actual_dt: dt,
                });
            }
        }
    }

    let n = cfg.window_len();
    if frames.len() < n {
        return Ok(Vec::new());
    }

    let scale = cfg.pu_base.map(|b| 1.0 / b).unwrap_or(1.0);
    let samples: Vec<Vector3> = frames.iter().map(|f| f.vector().scale(scale)).collect();
    let samples = smooth(&samples, cfg.smooth_width);

    let mut out = Vec::with_capacity((frames.len() - n) / cfg.hop + 1);
    let mut start = 0;
    while start + n <= samples.len() {
        let mut analysis = analyze_window(&samples[start..start + n], cfg)?;
        analysis.t_start = frames[start].t;
        analysis.t_end = frames[start + n - 1].t;
        out.push(analysis);
        start += cfg.hop;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const REF: f64 = 0.5773502691896258;
    const BAL_RADIUS: f64 = 1.224744871391589;

    /// Balanced three-phase sample at electrical angle phi, unit peak.
    fn balanced(phi: f64) -> Vector3 {
        Vector3::new(
            phi.cos(),
            (phi - 2.0 * PI / 3.0).cos(),
            (phi + 2.0 * PI / 3.0).cos(),
        )
    }

    fn sampled<F: Fn(f64) -> Vector3>(f: F, cfg: &WindowConfig, n: usize) -> Vec<Vector3> {
        (0..n)
            .map(|i| f(2.0 * PI * cfg.f0 * i as f64 / cfg.fs))
            .collect()
    }

    #[test]
    fn balanced_window_bivector_is_kirchhoff() {
        let cfg = WindowConfig::default();
        let window = sampled(balanced, &cfg, cfg.window_len());
        let b = window_bivector(&window).normalized().unwrap();
        assert_abs_diff_eq!(b.b12, REF, epsilon = 1e-9);
        assert_abs_diff_eq!(b.b23, REF, epsilon = 1e-9);
        assert_abs_diff_eq!(b.b31, REF, epsilon = 1e-9);
    }

    #[test]
    fn parallel_endpoints_give_zero_bivector() {
        let v = Vector3::new(0.3, -0.7, 0.4);
        let window = [v, balanced(0.4), v.scale(2.5)];
        assert!(window_bivector(&window).magnitude() < 1e-15);
    }

    #[test]
    fn faulted_phase_scaling_shifts_bivector_components() {
        // single-phase amplitude drop to 0.9: components (c, 1, c)/sqrt(1+2c^2)
        let cfg = WindowConfig::default();
        let window = sampled(
            |phi| {
                let v = balanced(phi);
                Vector3::new(0.9 * v.x1, v.x2, v.x3)
            },
            &cfg,
            cfg.window_len(),
        );
        let a = analyze_window(&window, &cfg).unwrap();
        assert_abs_diff_eq!(a.bnorm[0], 0.5560, epsilon = 1e-3);
        assert_abs_diff_eq!(a.bnorm[1], 0.6178, epsilon = 1e-3);
        assert_abs_diff_eq!(a.bnorm[2], 0.5560, epsilon = 1e-3);
        assert!(!a.degenerate);
    }

    #[test]
    fn planar_windows_rotate_flat() {
        let cfg = WindowConfig::default();
        for scale in [1.0, 0.4] {
            let window = sampled(
                |phi| {
                    let v = balanced(phi);
                    Vector3::new(scale * v.x1, v.x2, v.x3)
                },
                &cfg,
                cfg.window_len(),
            );
            let b = window_bivector(&window);
            let rotor = alignment_rotor(&window, &b).unwrap();
            for v in &window {
                let r = rotor.apply_vector(v);
                assert!(
                    r.x3.abs() <= 1e-9 * v.norm().max(1e-12),
                    "residual {}",
                    r.x3
                );
            }
        }
    }

    #[test]
    fn balanced_window_fits_reference_circle() {
        let cfg = WindowConfig::default();
        let window = sampled(balanced, &cfg, cfg.window_len());
        let a = analyze_window(&window, &cfg).unwrap();
        match a.shape {
            ShapeFit::Circle { radius } => assert_abs_diff_eq!(radius, BAL_RADIUS, epsilon = 1e-6),
            other => panic!("expected circle, got {other:?}"),
        }
        assert!(!a.degenerate);
    }

    #[test]
    fn bolted_phase_pair_collapses_to_line() {
        // both faulted phases at their midpoint: trajectory is a segment at
        // pi/4 after rotation
        let cfg = WindowConfig::default();
        let window = sampled(
            |phi| {
                let v = balanced(phi);
                let m = 0.5 * (v.x1 + v.x2);
                Vector3::new(m, m, v.x3)
            },
            &cfg,
            cfg.window_len(),
        );
        let a = analyze_window(&window, &cfg).unwrap();
        assert!(a.degenerate);
        match a.shape {
            ShapeFit::Line(line) => assert_abs_diff_eq!(line.angle, PI / 4.0, epsilon = 1e-6),
            other => panic!("expected line, got {other:?}"),
        }
    }

    #[test]
    fn antiparallel_plane_retries_with_second_sample() {
        // first/last wedge is exactly -s12 (rotor undefined); the second
        // sample spans a different plane and the retry succeeds
        let window = [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.5, -0.5, 0.3),
            Vector3::new(0.0, -1.0, 0.0),
        ];
        let b = window_bivector(&window);
        assert_eq!((b.b12, b.b23, b.b31), (-1.0, 0.0, 0.0));
        assert!(reduce_to_plane(&window, &b).is_ok());

        // a fully reversed-orientation planar window cannot recover: the
        // retry wedge is antiparallel too, and the error propagates
        let window = [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.3, -0.7, 0.0),
            Vector3::new(0.1, -0.9, 0.0),
            Vector3::new(0.0, -1.0, 0.0),
        ];
        let b = window_bivector(&window);
        assert!(matches!(
            reduce_to_plane(&window, &b),
            Err(PipelineError::Plane(GaError::AntiparallelPlanes))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(WindowConfig::default().validate().is_ok());
        let bad = WindowConfig {
            fs: 500.0,
            ..WindowConfig::default()
        };
        assert!(matches!(
            bad.validate(),
            Err(PipelineError::InvalidConfig(_))
        ));
        let bad = WindowConfig {
            window_fraction: 0.0,
            ..WindowConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = WindowConfig {
            hop: 0,
            ..WindowConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = WindowConfig {
            pu_base: Some(0.0),
            ..WindowConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn record_window_arithmetic() {
        let cfg = WindowConfig::default();
        assert_eq!(cfg.window_len(), 50);
        let frames: Vec<SampleFrame> = (0..2800)
            .map(|i| {
                let t = i as f64 / cfg.fs;
                let v = balanced(2.0 * PI * cfg.f0 * t);
                SampleFrame::new(t, [v.x1, v.x2, v.x3])
            })
            .collect();
        let out = analyze_record(&frames, &cfg).unwrap();
        assert_eq!(out.len(), 2751);
        assert_abs_diff_eq!(out[0].t_start, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(out[0].t_end, 49.0 / cfg.fs, epsilon = 1e-12);

        // hop strides: floor((N - n)/hop) + 1
        let hopped = WindowConfig {
            hop: 7,
            ..cfg.clone()
        };
        let out = analyze_record(&frames, &hopped).unwrap();
        assert_eq!(out.len(), (2800 - 50) / 7 + 1);

        // shorter than one window: empty
        let out = analyze_record(&frames[..30], &cfg).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn smoother_keeps_the_reference_circle() {
        let cfg = WindowConfig {
            smooth_width: 5,
            ..WindowConfig::default()
        };
        let frames: Vec<SampleFrame> = (0..400)
            .map(|i| {
                let t = i as f64 / cfg.fs;
                let v = balanced(2.0 * PI * cfg.f0 * t);
                SampleFrame::new(t, [v.x1, v.x2, v.x3])
            })
            .collect();
        let out = analyze_record(&frames, &cfg).unwrap();
        match out[100].shape {
            // a width-5 moving average attenuates the fundamental by ~0.1%
            ShapeFit::Circle { radius } => assert_abs_diff_eq!(radius, BAL_RADIUS, epsilon = 5e-3),
            ref other => panic!("expected circle, got {other:?}"),
        }
    }

    #[test]
    fn jitter_and_nan_rejected() {
        let cfg = WindowConfig::default();
        let mut frames: Vec<SampleFrame> = (0..100)
            .map(|i| {
                let t = i as f64 / cfg.fs;
                let v = balanced(2.0 * PI * cfg.f0 * t);
                SampleFrame::new(t, [v.x1, v.x2, v.x3])
            })
            .collect();
        frames[40].t += 0.5 / cfg.fs;
        assert!(matches!(
            analyze_record(&frames, &cfg),
            Err(PipelineError::NonUniformSampling { index: 40, .. })
        ));

        let mut frames2 = frames.clone();
        frames2[40].t -= 0.5 / cfg.fs;
        frames2[7].ch[1] = f64::NAN;
        assert!(matches!(
            analyze_record(&frames2, &cfg),
            Err(PipelineError::NonFiniteSample { index: 7 })
        ));
    }

    #[test]
    fn per_unit_normalization_scales_shape() {
        let mut cfg = WindowConfig::default();
        let frames: Vec<SampleFrame> = (0..200)
            .map(|i| {
                let t = i as f64 / cfg.fs;
                let v = balanced(2.0 * PI * cfg.f0 * t).scale(325.0);
                SampleFrame::new(t, [v.x1, v.x2, v.x3])
            })
            .collect();
        cfg.pu_base = Some(325.0);
        let out = analyze_record(&frames, &cfg).unwrap();
        match out[0].shape {
            ShapeFit::Circle { radius } => assert_abs_diff_eq!(radius, BAL_RADIUS, epsilon = 1e-6),
            ref other => panic!("expected circle, got {other:?}"),
        }
    }

    proptest! {
        /// Scaling the window scales the fitted geometry and leaves the
        /// normalized bivector, inclination and degeneracy flag unchanged.
        #[test]
        fn analysis_is_scale_invariant(k in 1e-3f64..1e3, drop in 0.0f64..0.95) {
            let cfg = WindowConfig::default();
            let window = sampled(
                |phi| {
                    let v = balanced(phi);
                    Vector3::new((1.0 - drop) * v.x1, v.x2, v.x3)
                },
                &cfg,
                cfg.window_len(),
            );
            let scaled: Vec<Vector3> = window.iter().map(|v| v.scale(k)).collect();
            let a0 = analyze_window(&window, &cfg).unwrap();
            let a1 = analyze_window(&scaled, &cfg).unwrap();
            prop_assert_eq!(a0.degenerate, a1.degenerate);
            for i in 0..3 {
                prop_assert!((a0.bnorm[i] - a1.bnorm[i]).abs() < 1e-9);
            }
            let (a0a, a0b) = a0.shape.semiaxes();
            let (a1a, a1b) = a1.shape.semiaxes();
            prop_assert!((a1a - k * a0a).abs() <= 1e-8 * k * a0a.max(1e-9));
            prop_assert!((a1b - k * a0b).abs() <= 1e-8 * (k * a0b).max(1e-9));
            prop_assert!((a0.shape.angle() - a1.shape.angle()).abs() < 1e-8);
        }
    }
}
