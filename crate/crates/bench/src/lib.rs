//! Shared fixtures for the benchmark targets.

use trifault_core::classify::FaultLabel;
use trifault_core::ga3::Vector3;
use trifault_core::pipeline::{SampleFrame, WindowConfig};
use trifault_core::synth::{generate, FaultScenario};

/// One steady-state analysis window of the given fault scenario.
pub fn fault_window(label: FaultLabel, severity: f64) -> Vec<Vector3> {
    let scn = FaultScenario::steady(label, severity, 0.0);
    let cfg = WindowConfig::default();
    let frames = generate(&scn, 0);
    frames[100..100 + cfg.window_len()]
        .iter()
        .map(|f| f.vector())
        .collect()
}

/// A full record with a mid-stream fault, default sampling.
pub fn fault_record(label: FaultLabel, severity: f64) -> Vec<SampleFrame> {
    let scn = FaultScenario {
        label,
        severity,
        ..FaultScenario::default()
    };
    generate(&scn, 0)
}
