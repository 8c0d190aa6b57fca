//! Fault-type decision and severity estimation.
//!
//! Ground faults (single- and double-line-to-ground) tilt the trajectory
//! plane, so they are recognized first from the normalized bivector
//! components alone, by nearest-template matching against the six
//! characteristic patterns. Line-to-line and three-phase faults leave the
//! plane on the Kirchhoff reference; they are separated afterwards by the
//! fitted shape: a shrunken circle means a symmetric fault, an ellipse or
//! line is assigned to a phase pair by the sector its inclination falls in.
//!
//! Severity is a linear map of the governing semi-axis onto `[0, 1]`
//! between its healthy and bolted bounds. The map is exact for
//! line-to-line, double-line iso-ground and three-phase faults; the
//! single-line-to-ground minor axis is mildly nonlinear and the linear
//! approximation is kept for cheapness, at a documented accuracy cost.

use std::fmt;
use std::str::FromStr;

use crate::ga3::kirchhoff_deviation;
use crate::pipeline::{ShapeFit, WindowAnalysis};

const REF: f64 = 0.5773502691896258; // 1/sqrt(3)
const SQRT3: f64 = 1.7320508075688772;

/// The ten fault types plus the healthy state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[allow(clippy::upper_case_acronyms)]
pub enum FaultLabel {
    None,
    AG,
    BG,
    CG,
    ABG,
    BCG,
    CAG,
    AB,
    BC,
    CA,
    ABC,
}

/// Fault family, deciding which severity bounds apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultCategory {
    Healthy,
    SingleLineGround,
    DoubleLineGround,
    LineToLine,
    ThreePhase,
}

impl FaultLabel {
    pub const ALL_FAULTS: [FaultLabel; 10] = [
        FaultLabel::AG,
        FaultLabel::BG,
        FaultLabel::CG,
        FaultLabel::ABG,
        FaultLabel::BCG,
        FaultLabel::CAG,
        FaultLabel::AB,
        FaultLabel::BC,
        FaultLabel::CA,
        FaultLabel::ABC,
    ];

    pub fn category(&self) -> FaultCategory {
        match self {
            FaultLabel::None => FaultCategory::Healthy,
            FaultLabel::AG | FaultLabel::BG | FaultLabel::CG => FaultCategory::SingleLineGround,
            FaultLabel::ABG | FaultLabel::BCG | FaultLabel::CAG => FaultCategory::DoubleLineGround,
            FaultLabel::AB | FaultLabel::BC | FaultLabel::CA => FaultCategory::LineToLine,
            FaultLabel::ABC => FaultCategory::ThreePhase,
        }
    }

    pub fn is_ground(&self) -> bool {
        matches!(
            self.category(),
            FaultCategory::SingleLineGround | FaultCategory::DoubleLineGround
        )
    }
}

impl fmt::Display for FaultLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FaultLabel::None => "none",
            FaultLabel::AG => "AG",
            FaultLabel::BG => "BG",
            FaultLabel::CG => "CG",
            FaultLabel::ABG => "ABG",
            FaultLabel::BCG => "BCG",
            FaultLabel::CAG => "CAG",
            FaultLabel::AB => "AB",
            FaultLabel::BC => "BC",
            FaultLabel::CA => "CA",
            FaultLabel::ABC => "ABC",
        };
        f.write_str(s)
    }
}

impl FromStr for FaultLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| *c != '-' && *c != '_').collect();
        match key.to_ascii_uppercase().as_str() {
            "NONE" => Ok(FaultLabel::None),
            "AG" => Ok(FaultLabel::AG),
            "BG" => Ok(FaultLabel::BG),
            "CG" => Ok(FaultLabel::CG),
            "ABG" => Ok(FaultLabel::ABG),
            "BCG" => Ok(FaultLabel::BCG),
            "CAG" => Ok(FaultLabel::CAG),
            "AB" => Ok(FaultLabel::AB),
            "BC" => Ok(FaultLabel::BC),
            "CA" | "AC" => Ok(FaultLabel::CA),
            "ABC" => Ok(FaultLabel::ABC),
            _ => Err(format!("unknown fault label '{s}'")),
        }
    }
}

/// Thresholds and sector boundaries for the decision rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierConfig {
    /// Minimum deviation of any normalized bivector component from
    /// `1/sqrt(3)` to consider a ground fault at all, and the residual gate
    /// for accepting a ground-pattern template.
    pub ground_epsilon: f64,
    /// Relative radius drop below the balanced circle that separates a
    /// symmetric fault from the healthy state.
    pub circle_rel_tol: f64,
    /// Relative semi-axis difference below which an ellipse is treated as a
    /// circle for classification; the inclination of a near-circle carries
    /// no information.
    pub roundness_tol: f64,
    /// Inclination sector boundaries in `[0, pi)`, strictly increasing.
    /// Sectors: `[b0, b1)` phase pair A-B, `[b1, b2)` C-A, the wraparound
    /// remainder B-C.
    pub sector_bounds: [f64; 3],
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            ground_epsilon: 0.01,
            circle_rel_tol: 1e-2,
            roundness_tol: 0.05,
            sector_bounds: [
                std::f64::consts::PI / 12.0,
                5.0 * std::f64::consts::PI / 12.0,
                3.0 * std::f64::consts::PI / 4.0,
            ],
        }
    }
}

/// Nominal phase RMS `A` in signal units; semi-axis bounds for every fault
/// family follow from it (balanced circle radius `sqrt(3) A`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeverityModel {
    pub a_rms: f64,
}

impl SeverityModel {
    pub fn new(a_rms: f64) -> Self {
        Self { a_rms }
    }

    /// Model for per-unit signals with unit peak (`A = 1/sqrt(2)`).
    pub fn per_unit() -> Self {
        Self {
            a_rms: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// Radius of the balanced trajectory circle, `sqrt(3) A`.
    pub fn nominal_radius(&self) -> f64 {
        SQRT3 * self.a_rms
    }

    /// `((major_max, major_min), (minor_max, minor_min))` semi-axis bounds
    /// between the healthy (severity 0) and bolted (severity 1) extremes.
    pub fn axis_bounds(&self, category: FaultCategory) -> ((f64, f64), (f64, f64)) {
        let a = self.a_rms;
        let full = SQRT3 * a;
        match category {
            FaultCategory::Healthy => ((full, full), (full, full)),
            FaultCategory::SingleLineGround => ((full, full), (full, a)),
            FaultCategory::DoubleLineGround => ((full, std::f64::consts::SQRT_2 * a), (full, 0.0)),
            FaultCategory::LineToLine => ((full, full), (full, 0.0)),
            FaultCategory::ThreePhase => ((full, 0.0), (full, 0.0)),
        }
    }
}

/// Outcome of the bivector-pattern stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundClassification {
    /// Plane on the Kirchhoff reference; not a ground fault.
    NotGround,
    Fault(FaultLabel),
    /// Off the reference but matching no template; reported, not guessed.
    Ambiguous,
}

/// The six ground-fault bivector templates. Single-line-to-ground faults
/// raise exactly one component (`(c, c, 1)`-type patterns up to order),
/// double-line-to-ground faults lower exactly one (`(c, 1, 1)`-type), with
/// `c = 1 - severity` before normalization.
struct GroundTemplate {
    label: FaultLabel,
    /// Index of the distinguished component in `(s12, s23, s31)` order.
    special: usize,
    /// True when the distinguished component is the maximum (L-G family).
    special_is_max: bool,
}

const GROUND_TEMPLATES: [GroundTemplate; 6] = [
    GroundTemplate {
        label: FaultLabel::AG,
        special: 1,
        special_is_max: true,
    },
    GroundTemplate {
        label: FaultLabel::BG,
        special: 2,
        special_is_max: true,
    },
    GroundTemplate {
        label: FaultLabel::CG,
        special: 0,
        special_is_max: true,
    },
    GroundTemplate {
        label: FaultLabel::ABG,
        special: 0,
        special_is_max: false,
    },
    GroundTemplate {
        label: FaultLabel::BCG,
        special: 1,
        special_is_max: false,
    },
    GroundTemplate {
        label: FaultLabel::CAG,
        special: 2,
        special_is_max: false,
    },
];

impl GroundTemplate {
    /// Closest point on the template curve to the observed unit components,
    /// returned as (infinity-norm residual, matched pattern).
    fn fit(&self, u: &[f64; 3]) -> (f64, [f64; 3]) {
        let others: Vec<usize> = (0..3).filter(|i| *i != self.special).collect();
        let pair_sum = u[others[0]] + u[others[1]];
        let special = u[self.special];
        // stationary point of the dot product along the curve
        let c = if self.special_is_max {
            if special <= f64::EPSILON {
                1.0
            } else {
                (pair_sum / (2.0 * special)).clamp(0.0, 1.0)
            }
        } else if pair_sum <= f64::EPSILON {
            1.0
        } else {
            (2.0 * special / pair_sum).clamp(0.0, 1.0)
        };
        let mut p = [0.0f64; 3];
        let norm = if self.special_is_max {
            (1.0 + 2.0 * c * c).sqrt()
        } else {
            (2.0 + c * c).sqrt()
        };
        for i in 0..3 {
            let raw = if i == self.special {
                if self.special_is_max {
                    1.0
                } else {
                    c
                }
            } else if self.special_is_max {
                c
            } else {
                1.0
            };
            p[i] = raw / norm;
        }
        let residual = (0..3).map(|i| (u[i] - p[i]).abs()).fold(0.0f64, f64::max);
        (residual, p)
    }
}

/// Bivector-pattern classification of ground faults.
///
/// Components within `ground_epsilon` of the `1/sqrt(3)` reference are not
/// a ground fault. Otherwise the nearest of the six templates wins if its
/// residual passes the same gate *and* the matched pattern itself deviates
/// from the reference by at least `ground_epsilon` — every template curve
/// runs through the reference, so without the second check near-reference
/// noise would be absorbed along the curve and claimed at a vanishing
/// severity. An off-reference pattern matching no template is reported as
/// ambiguous rather than forced into a label.
pub fn classify_ground(bnorm: &[f64; 3], cfg: &ClassifierConfig) -> GroundClassification {
    let max_dev = |u: &[f64; 3]| u.iter().map(|v| (v - REF).abs()).fold(0.0f64, f64::max);
    if max_dev(bnorm) < cfg.ground_epsilon {
        return GroundClassification::NotGround;
    }
    let mut best: Option<(f64, [f64; 3], FaultLabel)> = None;
    for template in &GROUND_TEMPLATES {
        let (residual, pattern) = template.fit(bnorm);
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, pattern, template.label));
        }
    }
    let (residual, pattern, label) = best.expect("templates are non-empty");
    if residual > cfg.ground_epsilon {
        GroundClassification::Ambiguous
    } else if max_dev(&pattern) < cfg.ground_epsilon {
        GroundClassification::NotGround
    } else {
        GroundClassification::Fault(label)
    }
}

fn sector_label(theta: f64, cfg: &ClassifierConfig) -> FaultLabel {
    let t = theta.rem_euclid(std::f64::consts::PI);
    let [b0, b1, b2] = cfg.sector_bounds;
    if (b0..b1).contains(&t) {
        FaultLabel::AB
    } else if (b1..b2).contains(&t) {
        FaultLabel::CA
    } else {
        // wraparound sector [b2, pi) union [0, b0)
        FaultLabel::BC
    }
}

/// Shape-based classification, for windows whose plane sits on the
/// Kirchhoff reference.
///
/// Circles at the nominal radius are healthy; a shrunken circle is a
/// symmetric three-phase fault. An ellipse whose semi-axes differ by less
/// than `roundness_tol` is treated as a circle (its inclination carries no
/// information); other ellipses and degenerate lines are assigned by the
/// inclination sector.
pub fn classify_by_shape(
    shape: &ShapeFit,
    cfg: &ClassifierConfig,
    model: &SeverityModel,
) -> FaultLabel {
    let healthy_radius = (1.0 - cfg.circle_rel_tol) * model.nominal_radius();
    match shape {
        ShapeFit::Circle { radius } => {
            if *radius >= healthy_radius {
                FaultLabel::None
            } else {
                FaultLabel::ABC
            }
        }
        ShapeFit::Ellipse(e) => {
            if e.a - e.b <= cfg.roundness_tol * e.a {
                let radius = 0.5 * (e.a + e.b);
                if radius >= healthy_radius {
                    FaultLabel::None
                } else {
                    FaultLabel::ABC
                }
            } else {
                sector_label(e.theta, cfg)
            }
        }
        ShapeFit::Line(l) => sector_label(l.angle, cfg),
    }
}

/// Linear severity from the governing semi-axis, clamped to `[0, 1]`.
///
/// The governing axis is the minor semi-axis except for symmetric faults,
/// where both axes shrink together and the major one is used. Severity is
/// the position of that axis between its healthy and bolted bounds.
pub fn estimate_severity(label: FaultLabel, shape: &ShapeFit, model: &SeverityModel) -> f64 {
    let category = label.category();
    if category == FaultCategory::Healthy {
        return 0.0;
    }
    let (major_bounds, minor_bounds) = model.axis_bounds(category);
    let (a, b) = shape.semiaxes();
    let (axis, (hi, lo)) = match category {
        FaultCategory::ThreePhase => (a, major_bounds),
        _ => (b, minor_bounds),
    };
    if hi <= lo {
        return 0.0;
    }
    ((hi - axis) / (hi - lo)).clamp(0.0, 1.0)
}

/// Supporting values a decision was made from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub bnorm: [f64; 3],
    pub shape: ShapeFit,
    /// Angle between the trajectory plane and the Kirchhoff plane, when the
    /// plane is defined.
    pub kirchhoff_dev: Option<f64>,
    /// Set when the bivector pattern was off-reference but matched no
    /// ground template.
    pub ambiguous: bool,
}

/// Final per-window decision; severity is present exactly when a fault was
/// identified.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultReport {
    pub label: FaultLabel,
    pub severity: Option<f64>,
    pub evidence: Evidence,
}

/// Full decision for one analyzed window: ground test first, then the
/// shape test. Degenerate (line) windows skip the ground test since their
/// plane, and therefore their bivector pattern, is undefined.
pub fn classify(
    analysis: &WindowAnalysis,
    cfg: &ClassifierConfig,
    model: &SeverityModel,
) -> FaultReport {
    let kirchhoff_dev = kirchhoff_deviation(&analysis.bivector, 0.0).ok();
    let ground = if analysis.degenerate {
        GroundClassification::NotGround
    } else {
        classify_ground(&analysis.bnorm, cfg)
    };
    let (label, ambiguous) = match ground {
        GroundClassification::Fault(label) => (label, false),
        GroundClassification::NotGround => (classify_by_shape(&analysis.shape, cfg, model), false),
        GroundClassification::Ambiguous => (FaultLabel::None, true),
    };
    let severity =
        (label != FaultLabel::None).then(|| estimate_severity(label, &analysis.shape, model));
    FaultReport {
        label,
        severity,
        evidence: Evidence {
            bnorm: analysis.bnorm,
            shape: analysis.shape,
            kirchhoff_dev,
            ambiguous,
        },
    }
}

/// Record-level aggregation of per-window decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordSummary {
    /// Most frequent fault label over the faulted interval, or `None` when
    /// no window reported a fault.
    pub dominant: FaultLabel,
    /// Start time of the first window whose label is not `None`.
    pub onset: Option<f64>,
    /// Mean severity over the windows carrying the dominant label.
    pub mean_severity: Option<f64>,
    pub faulted_windows: usize,
    pub total_windows: usize,
}

/// One shape representing a whole faulted interval.
///
/// Semi-axis sizes average plainly, but eccentricity must not: a noisy
/// circle fits as a slight ellipse in *every* window, with an orientation
/// that is pure noise. Averaging the eccentricity as a vector in
/// double-angle space (orientation is pi-periodic) lets those spurious
/// orientations cancel while a real ellipse, whose orientation holds still,
/// keeps its full eccentricity. Degenerate line windows aggregate their
/// angles the same way and take over when they are the majority.
fn aggregate_shape<'a>(windows: impl IntoIterator<Item = &'a WindowAnalysis>) -> Option<ShapeFit> {
    let mut line_vec = (0.0f64, 0.0f64);
    let mut line_len = 0.0f64;
    let mut lines = 0usize;
    let mut ecc_vec = (0.0f64, 0.0f64);
    let mut size_sum = 0.0f64;
    let mut planar = 0usize;
    for a in windows {
        match a.shape {
            ShapeFit::Line(l) => {
                line_vec.0 += (2.0 * l.angle).cos();
                line_vec.1 += (2.0 * l.angle).sin();
                line_len += l.half_length;
                lines += 1;
            }
            ShapeFit::Ellipse(e) => {
                let alpha = (e.a * e.a - e.b * e.b) / (e.a * e.a + e.b * e.b);
                ecc_vec.0 += alpha * (2.0 * e.theta).cos();
                ecc_vec.1 += alpha * (2.0 * e.theta).sin();
                size_sum += 0.5 * (e.a + e.b);
                planar += 1;
            }
            ShapeFit::Circle { radius } => {
                size_sum += radius;
                planar += 1;
            }
        }
    }
    if lines > planar {
        let angle = crate::gac::fold_pi(0.5 * line_vec.1.atan2(line_vec.0));
        return Some(ShapeFit::Line(crate::gac::LineParams {
            angle,
            half_length: line_len / lines as f64,
        }));
    }
    if planar == 0 {
        return None;
    }
    let mean_size = size_sum / planar as f64;
    let alpha = (ecc_vec.0.hypot(ecc_vec.1) / planar as f64).min(1.0 - 1e-9);
    let theta = crate::gac::fold_pi(0.5 * ecc_vec.1.atan2(ecc_vec.0));
    // mean size is (a + b)/2; recover the axes from it and the eccentricity
    let ratio = ((1.0 - alpha) / (1.0 + alpha)).sqrt();
    let a = 2.0 * mean_size / (1.0 + ratio);
    Some(ShapeFit::Ellipse(crate::gac::EllipseParams {
        a,
        b: a * ratio,
        theta,
    }))
}

/// Classify a record from its window analyses.
///
/// Onset is the first window whose own classification reports a fault. The
/// record label is then decided over the faulted interval (onset onward)
/// from aggregated evidence: the ground test runs once on the *mean*
/// normalized bivector components, whose noise is far below any single
/// window's (the deviation gate doubles accordingly), and non-ground
/// records are classified from the aggregated shape. A single
/// noise-corrupted window therefore cannot flip the record.
pub fn summarize_record(
    analyses: &[WindowAnalysis],
    cfg: &ClassifierConfig,
    model: &SeverityModel,
) -> RecordSummary {
    let reports: Vec<FaultReport> = analyses.iter().map(|a| classify(a, cfg, model)).collect();
    let faulted_windows = reports
        .iter()
        .filter(|r| r.label != FaultLabel::None)
        .count();
    let total_windows = analyses.len();
    let Some(first) = reports.iter().position(|r| r.label != FaultLabel::None) else {
        return RecordSummary {
            dominant: FaultLabel::None,
            onset: None,
            mean_severity: None,
            faulted_windows,
            total_windows,
        };
    };
    let onset = Some(analyses[first].t_start);
    let tail = &analyses[first..];
    // windows straddling the onset report transitional shapes that settle
    // within one window length; severity is averaged past that interval
    let span = analyses[first].t_end - analyses[first].t_start;
    let settled_from = analyses[first].t_start + span;
    let settled: Vec<&WindowAnalysis> = tail.iter().filter(|a| a.t_start >= settled_from).collect();
    let severity_pool: Vec<&WindowAnalysis> = if settled.is_empty() {
        tail.iter().collect()
    } else {
        settled
    };

    // ground stage on the faulted interval's mean plane orientation
    let mut acc = [0.0f64; 3];
    let mut planes = 0usize;
    for a in tail.iter().filter(|a| !a.degenerate) {
        for i in 0..3 {
            acc[i] += a.bnorm[i];
        }
        planes += 1;
    }
    let ground = if planes > 0 {
        let norm = (acc.iter().map(|v| v * v).sum::<f64>()).sqrt();
        if norm > 0.0 {
            let mean = [acc[0] / norm, acc[1] / norm, acc[2] / norm];
            let record_cfg = ClassifierConfig {
                ground_epsilon: 2.0 * cfg.ground_epsilon,
                ..cfg.clone()
            };
            classify_ground(&mean, &record_cfg)
        } else {
            GroundClassification::NotGround
        }
    } else {
        GroundClassification::NotGround
    };

    let aggregate = aggregate_shape(tail);
    let dominant = match ground {
        GroundClassification::Fault(label) => label,
        GroundClassification::Ambiguous => FaultLabel::None,
        GroundClassification::NotGround => aggregate
            .as_ref()
            .map(|shape| classify_by_shape(shape, cfg, model))
            .unwrap_or(FaultLabel::None),
    };

    let mean_severity = if dominant == FaultLabel::None {
        None
    } else if dominant.is_ground() {
        // healthy-shaped windows (a pre-onset remainder) carry no severity
        // information and would drag the mean down
        let faulted: Vec<f64> = severity_pool
            .iter()
            .filter(|a| {
                !a.degenerate && classify_by_shape(&a.shape, cfg, model) != FaultLabel::None
            })
            .map(|a| estimate_severity(dominant, &a.shape, model))
            .collect();
        if faulted.is_empty() {
            let all: Vec<f64> = severity_pool
                .iter()
                .filter(|a| !a.degenerate)
                .map(|a| estimate_severity(dominant, &a.shape, model))
                .collect();
            (!all.is_empty()).then(|| all.iter().sum::<f64>() / all.len() as f64)
        } else {
            Some(faulted.iter().sum::<f64>() / faulted.len() as f64)
        }
    } else {
        // severity from the windows that individually support the dominant
        // shape label; a healthy stretch between the reported onset and the
        // actual fault would otherwise dilute the aggregate
        let voters = aggregate_shape(
            severity_pool
                .iter()
                .copied()
                .filter(|a| classify_by_shape(&a.shape, cfg, model) == dominant),
        );
        voters
            .or(aggregate)
            .map(|shape| estimate_severity(dominant, &shape, model))
    };
    RecordSummary {
        dominant,
        onset,
        mean_severity,
        faulted_windows,
        total_windows,
    }
}
