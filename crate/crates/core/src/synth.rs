//! Deterministic synthetic three-phase waveforms for every fault type,
//! severity, impedance character (in-phase vs quadrature-shifted), and
//! noise level, plus the two Monte-Carlo studies used to validate bivector
//! estimation and arc fitting.
//!
//! Fault models, applied instantaneously at `fault_time`:
//!
//! - single-line-to-ground: faulted phase amplitude scaled by `1 - s`;
//! - double-line-to-ground: both faulted phases scaled by `1 - s`;
//! - line-to-line: the two faulted phases move symmetrically toward their
//!   midpoint, scaling their difference oscillation by `1 - s`; a reactive
//!   fault path additionally shifts that oscillation by `phase_shift`.
//!   The sum of the pair is untouched, so the trajectory stays
//!   zero-sequence-free in the Kirchhoff plane. At `s = 1` the pair
//!   voltages are equal and the trajectory collapses to a line;
//! - symmetric: all three phases scaled by `1 - s`.
//!
//! Noise is i.i.d. Gaussian per channel per sample with standard deviation
//! `noise_std * amplitude`, seeded for reproducibility.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::classify::FaultLabel;
use crate::ga3::Vector3;
use crate::pipeline::SampleFrame;

const REF: f64 = 0.5773502691896258;
const TWO_THIRDS_PI: f64 = 2.0 * PI / 3.0;

/// One synthetic fault scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultScenario {
    pub label: FaultLabel,
    /// Normalized fault depth in [0, 1]; 0 healthy, 1 bolted.
    pub severity: f64,
    /// Quadrature shift of the faulted pair's difference oscillation, in
    /// radians. Zero models a purely resistive path (line-to-line faults
    /// keep their axes on the ideal directions); positive values model a
    /// reactive path.
    pub phase_shift: f64,
    /// Fault onset in seconds; samples before it are balanced.
    pub fault_time: f64,
    pub f0: f64,
    /// Peak phase amplitude in signal units.
    pub amplitude: f64,
    pub duration: f64,
    pub fs: f64,
    /// Gaussian noise standard deviation as a fraction of `amplitude`.
    pub noise_std: f64,
}

impl Default for FaultScenario {
    fn default() -> Self {
        Self {
            label: FaultLabel::None,
            severity: 0.0,
            phase_shift: 0.0,
            fault_time: 0.1,
            f0: 50.0,
            amplitude: 1.0,
            duration: 0.28,
            fs: 10_000.0,
            noise_std: 0.0,
        }
    }
}

impl FaultScenario {
    /// Steady-state scenario: faulted from the first sample.
    pub fn steady(label: FaultLabel, severity: f64, phase_shift: f64) -> Self {
        Self {
            label,
            severity,
            phase_shift,
            fault_time: 0.0,
            ..Self::default()
        }
    }
}

/// Noise-free phase values of a scenario at electrical angle `phi`,
/// with the fault active.
fn faulted_phases(scn: &FaultScenario, phi: f64) -> [f64; 3] {
    let a = scn.amplitude;
    let base = [
        a * phi.cos(),
        a * (phi - TWO_THIRDS_PI).cos(),
        a * (phi + TWO_THIRDS_PI).cos(),
    ];
    let c = 1.0 - scn.severity;
    let mut ch = base;
    match scn.label {
        FaultLabel::None => {}
        FaultLabel::AG => ch[0] *= c,
        FaultLabel::BG => ch[1] *= c,
        FaultLabel::CG => ch[2] *= c,
        FaultLabel::ABG => {
            ch[0] *= c;
            ch[1] *= c;
        }
        FaultLabel::BCG => {
            ch[1] *= c;
            ch[2] *= c;
        }
        FaultLabel::CAG => {
            ch[2] *= c;
            ch[0] *= c;
        }
        FaultLabel::ABC => {
            for v in ch.iter_mut() {
                *v *= c;
            }
        }
        FaultLabel::AB | FaultLabel::BC | FaultLabel::CA => {
            // difference oscillation of phases (i, j): (x_i - x_j)/2 =
            // (sqrt(3) a / 2) cos(phi + psi)
            let (i, j, psi) = match scn.label {
                FaultLabel::AB => (0, 1, PI / 6.0),
                FaultLabel::BC => (1, 2, -PI / 2.0),
                _ => (2, 0, 5.0 * PI / 6.0),
            };
            let mid = 0.5 * (base[i] + base[j]);
            let diff = c * (3f64.sqrt() * a / 2.0) * (phi + psi - scn.phase_shift).cos();
            ch[i] = mid + diff;
            ch[j] = mid - diff;
        }
    }
    ch
}

/// Generate the sampled record of a scenario. Identical `(scenario, seed)`
/// always produce identical samples.
pub fn generate(scn: &FaultScenario, seed: u64) -> Vec<SampleFrame> {
    let n = (scn.duration * scn.fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, scn.noise_std * scn.amplitude).expect("valid noise std");
    (0..n)
        .map(|i| {
            let t = i as f64 / scn.fs;
            let phi = 2.0 * PI * scn.f0 * t;
            let mut ch = if t < scn.fault_time {
                let a = scn.amplitude;
                [
                    a * phi.cos(),
                    a * (phi - TWO_THIRDS_PI).cos(),
                    a * (phi + TWO_THIRDS_PI).cos(),
                ]
            } else {
                faulted_phases(scn, phi)
            };
            if scn.noise_std > 0.0 {
                for v in ch.iter_mut() {
                    *v += noise.sample(&mut rng);
                }
            }
            SampleFrame::new(t, ch)
        })
        .collect()
}

/// Result of a Monte-Carlo error sweep: `errors[i][j]` is the mean error at
/// `x[i]` under `noise_levels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub x: Vec<f64>,
    pub noise_levels: Vec<f64>,
    pub errors: Vec<Vec<f64>>,
}

impl StudyTable {
    /// Mean error at the x grid point closest to `x` for the given noise
    /// column.
    pub fn error_at(&self, x: f64, noise_idx: usize) -> f64 {
        let i = self
            .x
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - x).abs().partial_cmp(&(*b - x).abs()).unwrap())
            .map(|(i, _)| i)
            .expect("non-empty grid");
        self.errors[i][noise_idx]
    }
}

/// Sweep the electrical-angle separation of the two wedge operands over
/// (0, 2pi) and measure the mean relative error of the normalized bivector
/// components under each noise level.
///
/// Error metric: `||bnorm_est - bnorm_true|| / ||bnorm_true||` with the
/// absolute-component normalization used throughout. The same standard
/// normal draws are reused across angles and scaled per noise level, so the
/// curves are directly comparable point by point.
pub fn bivector_error_study(noise_levels: &[f64], trials: usize, seed: u64) -> StudyTable {
    assert!(trials >= 1);
    let angles: Vec<f64> = (1..64).map(|k| k as f64 * 2.0 * PI / 64.0).collect();
    let reference = [REF, REF, REF];
    let mut sums = vec![vec![0.0f64; noise_levels.len()]; angles.len()];

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let phi0: f64 = rng.gen_range(0.0..2.0 * PI);
        let mut g = [0.0f64; 6];
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        for v in g.iter_mut() {
            *v = std_normal.sample(&mut rng);
        }
        for (ai, &angle) in angles.iter().enumerate() {
            let x1 = balanced_sample(phi0);
            let x2 = balanced_sample(phi0 + angle);
            for (ni, &sigma) in noise_levels.iter().enumerate() {
                let n1 = Vector3::new(
                    x1.x1 + sigma * g[0],
                    x1.x2 + sigma * g[1],
                    x1.x3 + sigma * g[2],
                );
                let n2 = Vector3::new(
                    x2.x1 + sigma * g[3],
                    x2.x2 + sigma * g[4],
                    x2.x3 + sigma * g[5],
                );
                let b = n1.wedge(&n2);
                let err = match b.normalized() {
                    Some(u) => {
                        let est = [u.b12.abs(), u.b23.abs(), u.b31.abs()];
                        (0..3)
                            .map(|i| (est[i] - reference[i]).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    }
                    None => 1.0,
                };
                sums[ai][ni] += err;
            }
        }
    }

    let errors = sums
        .into_iter()
        .map(|row| row.into_iter().map(|s| s / trials as f64).collect())
        .collect();
    StudyTable {
        x: angles,
        noise_levels: noise_levels.to_vec(),
        errors,
    }
}

fn balanced_sample(phi: f64) -> Vector3 {
    Vector3::new(
        phi.cos(),
        (phi - TWO_THIRDS_PI).cos(),
        (phi + TWO_THIRDS_PI).cos(),
    )
}

/// Canonical test ellipse for the fit study: the moderate line-to-line
/// fault geometry, inclined at pi/4.
pub const STUDY_ELLIPSE: (f64, f64, f64) = (1.224744871391589, 0.7348469228349535, PI / 4.0);

/// Samples per full trajectory cycle used by the fit study.
const STUDY_SAMPLES_PER_CYCLE: f64 = 200.0;

/// Mean relative error of centered-ellipse fits as a function of the
/// available arc fraction, for each noise level.
///
/// Each trial draws a random arc start and one pool of standard normal
/// deviates reused across fractions and noise levels. The per-trial error
/// averages the relative errors of both semi-axes and of the inclination;
/// failed fits count as error 1.
pub fn fit_error_study(
    noise_levels: &[f64],
    arc_fractions: &[f64],
    trials: usize,
    seed: u64,
) -> StudyTable {
    assert!(trials >= 1);
    assert!(arc_fractions.iter().all(|f| *f > 0.0 && *f <= 1.0));
    let (a_true, b_true, theta_true) = STUDY_ELLIPSE;
    let max_n = arc_fractions
        .iter()
        .map(|f| point_count(*f))
        .max()
        .unwrap_or(0);
    let mut sums = vec![vec![0.0f64; noise_levels.len()]; arc_fractions.len()];

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let chi0: f64 = rng.gen_range(0.0..2.0 * PI);
        let std_normal = Normal::new(0.0, 1.0).unwrap();
        let pool: Vec<[f64; 2]> = (0..max_n)
            .map(|_| [std_normal.sample(&mut rng), std_normal.sample(&mut rng)])
            .collect();

        for (fi, &fraction) in arc_fractions.iter().enumerate() {
            let n = point_count(fraction);
            for (ni, &sigma) in noise_levels.iter().enumerate() {
                let pts: Vec<[f64; 2]> = (0..n)
                    .map(|i| {
                        let chi = chi0 + 2.0 * PI * fraction * i as f64 / (n - 1) as f64;
                        let (st, ct) = theta_true.sin_cos();
                        let (u, w) = (a_true * chi.cos(), b_true * chi.sin());
                        [
                            u * ct - w * st + sigma * pool[i][0],
                            u * st + w * ct + sigma * pool[i][1],
                        ]
                    })
                    .collect();
                sums[fi][ni] += fit_relative_error(&pts, a_true, b_true, theta_true);
            }
        }
    }

    let errors = sums
        .into_iter()
        .map(|row| row.into_iter().map(|s| s / trials as f64).collect())
        .collect();
    StudyTable {
        x: arc_fractions.to_vec(),
        noise_levels: noise_levels.to_vec(),
        errors,
    }
}

fn point_count(fraction: f64) -> usize {
    ((STUDY_SAMPLES_PER_CYCLE * fraction).round() as usize).max(6)
}

fn fit_relative_error(points: &[[f64; 2]], a: f64, b: f64, theta: f64) -> f64 {
    let Ok(q) = crate::gac::fit_centered_conic(points) else {
        return 1.0;
    };
    let Ok((ae, be)) = crate::gac::extract_semiaxes(&q) else {
        return 1.0;
    };
    let te = crate::gac::extract_angle(&q);
    let dt = (te - theta).rem_euclid(PI);
    let dt = dt.min(PI - dt);
    (((ae - a).abs() / a) + ((be - b).abs() / b) + dt / theta) / 3.0
}
