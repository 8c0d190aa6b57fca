//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use trifault_core::classify::{
    classify, summarize_record, ClassifierConfig, FaultLabel, RecordSummary, SeverityModel,
};
use trifault_core::pipeline::{analyze_record, SampleFrame, WindowAnalysis, WindowConfig};
use trifault_core::synth::{
    bivector_error_study, fit_error_study, generate, FaultScenario, StudyTable,
};

use crate::args::{
    resolve_seed, AnalyzeArgs, Cli, Command, CorpusArgs, StudyBivectorArgs, StudyFitArgs, SynthArgs,
};
use crate::io::{atomic_write, infer_fs, read_waveform_csv};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::StudyBivector(args) => cmd_study_bivector(&args),
        Command::StudyFit(args) => cmd_study_fit(&args),
        Command::Corpus(args) => cmd_corpus(&args),
    }
}

fn parse_label(s: &str) -> Result<FaultLabel, CliError> {
    s.parse().map_err(CliError::Usage)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let label = parse_label(&args.fault)?;
    if !(0.0..=1.0).contains(&args.severity) {
        return Err(CliError::Usage("--severity must be in [0, 1]".into()));
    }
    if !(args.duration > 0.0) || !(args.fs > 2.0 * args.f0) || !(args.f0 > 0.0) {
        return Err(CliError::Usage(
            "--duration must be positive and --fs above twice --f0".into(),
        ));
    }
    if !(args.amplitude > 0.0) || args.noise < 0.0 {
        return Err(CliError::Usage(
            "--amplitude must be positive, --noise non-negative".into(),
        ));
    }
    let scenario = FaultScenario {
        label,
        severity: args.severity,
        phase_shift: args.phase_shift,
        fault_time: args.fault_time,
        f0: args.f0,
        amplitude: args.amplitude,
        duration: args.duration,
        fs: args.fs,
        noise_std: args.noise,
    };
    let frames = generate(&scenario, resolve_seed(args.seed));
    let mut out = String::with_capacity(frames.len() * 40);
    out.push_str("t,va,vb,vc\n");
    for f in &frames {
        writeln!(out, "{},{},{},{}", f.t, f.ch[0], f.ch[1], f.ch[2]).expect("string write");
    }
    atomic_write(&args.out, out.as_bytes())?;
    println!("wrote {} samples to {}", frames.len(), args.out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ChannelSummary {
    dominant_label: String,
    onset_time: Option<f64>,
    mean_severity: Option<f64>,
    faulted_windows: usize,
    total_windows: usize,
}

impl From<RecordSummary> for ChannelSummary {
    fn from(s: RecordSummary) -> Self {
        ChannelSummary {
            dominant_label: s.dominant.to_string(),
            onset_time: s.onset,
            mean_severity: s.mean_severity,
            faulted_windows: s.faulted_windows,
            total_windows: s.total_windows,
        }
    }
}

#[derive(Serialize)]
struct AnalysisSummary {
    schema: u32,
    fs: f64,
    f0: f64,
    window_samples: usize,
    voltage: ChannelSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    current: Option<ChannelSummary>,
}

fn windows_csv(
    analyses: &[WindowAnalysis],
    ccfg: &ClassifierConfig,
    model: &SeverityModel,
) -> String {
    let mut out = String::with_capacity(analyses.len() * 96 + 64);
    out.push_str("t_start,b12,b23,b31,shape,a,b,theta,degenerate,label,severity\n");
    for a in analyses {
        let report = classify(a, ccfg, model);
        let (major, minor) = a.shape.semiaxes();
        let shape = match a.shape {
            trifault_core::pipeline::ShapeFit::Ellipse(_) => "ellipse",
            trifault_core::pipeline::ShapeFit::Circle { .. } => "circle",
            trifault_core::pipeline::ShapeFit::Line(_) => "line",
        };
        let severity = report.severity.map(|s| s.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a.t_start,
            a.bnorm[0],
            a.bnorm[1],
            a.bnorm[2],
            shape,
            major,
            minor,
            a.shape.angle(),
            a.degenerate,
            report.label,
            severity
        )
        .expect("string write");
    }
    out
}

fn derived_path(input: &Path, suffix: &str) -> PathBuf {
    let mut name = input
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    input.with_file_name(name)
}

fn analyze_channel(
    frames: &[SampleFrame],
    wcfg: &WindowConfig,
) -> Result<Vec<WindowAnalysis>, CliError> {
    analyze_record(frames, wcfg).map_err(|e| CliError::Data(e.to_string()))
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    if args.window_fraction <= 0.0 || args.window_fraction > 1.0 {
        return Err(CliError::Usage(
            "--window-fraction must be in (0, 1]".into(),
        ));
    }
    if args.hop == 0 {
        return Err(CliError::Usage("--hop must be at least 1".into()));
    }
    let record = read_waveform_csv(&args.input)?;
    let fs = match args.fs {
        Some(fs) => fs,
        None => infer_fs(&record.voltage)?,
    };
    let wcfg = WindowConfig {
        f0: args.f0,
        fs,
        window_fraction: args.window_fraction,
        hop: args.hop,
        degenerate_ratio: args.degenerate_ratio,
        smooth_width: args.smooth,
        pu_base: args.pu,
    };
    wcfg.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let ccfg = ClassifierConfig {
        ground_epsilon: args.ground_epsilon,
        circle_rel_tol: args.circle_tol,
        roundness_tol: args.roundness_tol,
        ..ClassifierConfig::default()
    };
    let model = SeverityModel::new(args.rms.unwrap_or(std::f64::consts::FRAC_1_SQRT_2));

    let analyses = analyze_channel(&record.voltage, &wcfg)?;
    let windows_path = args
        .windows_out
        .clone()
        .unwrap_or_else(|| derived_path(&args.input, ".windows.csv"));
    atomic_write(
        &windows_path,
        windows_csv(&analyses, &ccfg, &model).as_bytes(),
    )?;
    let voltage_summary = summarize_record(&analyses, &ccfg, &model);
    println!(
        "voltage: label={} onset={} severity={} ({}/{} windows) -> {}",
        voltage_summary.dominant,
        voltage_summary
            .onset
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".into()),
        voltage_summary
            .mean_severity
            .map(|s| format!("{s:.4}"))
            .unwrap_or_else(|| "-".into()),
        voltage_summary.faulted_windows,
        voltage_summary.total_windows,
        windows_path.display()
    );

    let current_summary = match &record.current {
        Some(frames) => {
            let analyses = analyze_channel(frames, &wcfg)?;
            let path = args
                .currents_out
                .clone()
                .unwrap_or_else(|| derived_path(&args.input, ".currents.windows.csv"));
            atomic_write(&path, windows_csv(&analyses, &ccfg, &model).as_bytes())?;
            let summary = summarize_record(&analyses, &ccfg, &model);
            println!(
                "current: label={} onset={} ({}/{} windows) -> {}",
                summary.dominant,
                summary
                    .onset
                    .map(|t| t.to_string())
                    .unwrap_or_else(|| "-".into()),
                summary.faulted_windows,
                summary.total_windows,
                path.display()
            );
            Some(summary)
        }
        None => None,
    };

    let summary = AnalysisSummary {
        schema: 1,
        fs,
        f0: args.f0,
        window_samples: wcfg.window_len(),
        voltage: voltage_summary.into(),
        current: current_summary.map(Into::into),
    };
    let summary_path = args
        .summary_out
        .clone()
        .unwrap_or_else(|| derived_path(&args.input, ".summary.json"));
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Data(e.to_string()))?;
    atomic_write(&summary_path, json.as_bytes())?;
    println!("summary -> {}", summary_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// studies
// ---------------------------------------------------------------------------

fn study_csv(table: &StudyTable, x_name: &str, x_scale: f64) -> String {
    let mut out = String::new();
    out.push_str(x_name);
    for noise in &table.noise_levels {
        write!(out, ",err_{}pct", noise * 100.0).expect("string write");
    }
    out.push('\n');
    for (i, x) in table.x.iter().enumerate() {
        write!(out, "{}", x * x_scale).expect("string write");
        for err in &table.errors[i] {
            write!(out, ",{err}").expect("string write");
        }
        out.push('\n');
    }
    out
}

pub fn cmd_study_bivector(args: &StudyBivectorArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let table = bivector_error_study(&args.noise, args.trials, resolve_seed(args.seed));
    atomic_write(&args.out, study_csv(&table, "angle_rad", 1.0).as_bytes())?;
    println!(
        "bivector error study: {} angles x {} noise levels x {} trials -> {}",
        table.x.len(),
        table.noise_levels.len(),
        args.trials,
        args.out.display()
    );
    Ok(())
}

pub fn cmd_study_fit(args: &StudyFitArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    if args.fractions.iter().any(|f| *f <= 0.0 || *f > 1.0) {
        return Err(CliError::Usage("--fractions must lie in (0, 1]".into()));
    }
    let table = fit_error_study(
        &args.noise,
        &args.fractions,
        args.trials,
        resolve_seed(args.seed),
    );
    // x axis in percent of a cycle, matching the usual presentation
    atomic_write(
        &args.out,
        study_csv(&table, "fraction_pct", 100.0).as_bytes(),
    )?;
    println!(
        "fit error study: {} fractions x {} noise levels x {} trials -> {}",
        table.x.len(),
        table.noise_levels.len(),
        args.trials,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

struct CorpusRow {
    noise: f64,
    label: FaultLabel,
    cells: usize,
    correct: usize,
    severity_abs_err: Vec<f64>,
}

pub fn cmd_corpus(args: &CorpusArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed);
    let severities: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let wcfg = WindowConfig::default();
    let ccfg = ClassifierConfig::default();
    let model = SeverityModel::per_unit();

    let mut rows: Vec<CorpusRow> = Vec::new();
    for &noise in &args.noise {
        for &label in &FaultLabel::ALL_FAULTS {
            let mut row = CorpusRow {
                noise,
                label,
                cells: 0,
                correct: 0,
                severity_abs_err: Vec::new(),
            };
            for &severity in &severities {
                for phase_shift in [0.0, 0.1] {
                    for trial in 0..args.trials {
                        let scn = FaultScenario {
                            label,
                            severity,
                            phase_shift,
                            fault_time: 0.0,
                            duration: args.duration,
                            noise_std: noise,
                            ..FaultScenario::default()
                        };
                        let cell_seed = seed
                            .wrapping_add(row.cells as u64)
                            .wrapping_add((label as u64) << 32)
                            .wrapping_add((noise * 1e6) as u64)
                            .wrapping_add(trial as u64);
                        let frames = generate(&scn, cell_seed);
                        let analyses = analyze_record(&frames, &wcfg)
                            .map_err(|e| CliError::Data(e.to_string()))?;
                        let summary = summarize_record(&analyses, &ccfg, &model);
                        row.cells += 1;
                        if summary.dominant == label {
                            row.correct += 1;
                            if let Some(s) = summary.mean_severity {
                                row.severity_abs_err.push((s - severity).abs());
                            }
                        }
                    }
                }
            }
            rows.push(row);
        }
    }

    let mae = |errs: &[f64]| errs.iter().sum::<f64>() / errs.len().max(1) as f64;
    let mut text = String::new();
    let mut csv_out = String::from("noise,label,cells,accuracy,severity_mae\n");
    for &noise in &args.noise {
        writeln!(text, "noise {:.1}%", noise * 100.0).expect("string write");
        writeln!(text, "  {:<6} {:>9} {:>9}", "type", "accuracy", "sev MAE").expect("write");
        let mut pooled_ground: Vec<f64> = Vec::new();
        for row in rows.iter().filter(|r| r.noise == noise) {
            let accuracy = row.correct as f64 / row.cells as f64;
            let row_mae = mae(&row.severity_abs_err);
            writeln!(
                text,
                "  {:<6} {:>8.1}% {:>8.2}%",
                row.label.to_string(),
                100.0 * accuracy,
                100.0 * row_mae
            )
            .expect("write");
            writeln!(
                csv_out,
                "{},{},{},{},{}",
                noise, row.label, row.cells, accuracy, row_mae
            )
            .expect("write");
            if row.label.is_ground() {
                pooled_ground.extend_from_slice(&row.severity_abs_err);
            }
        }
        let ground_mae = mae(&pooled_ground);
        writeln!(
            text,
            "  ground-pooled severity MAE: {:.2}%",
            100.0 * ground_mae
        )
        .expect("write");
        writeln!(
            csv_out,
            "{},ground-pooled,{},,{}",
            noise,
            pooled_ground.len(),
            ground_mae
        )
        .expect("write");
    }
    print!("{text}");
    if let Some(path) = &args.out {
        atomic_write(path, csv_out.as_bytes())?;
        println!("table -> {}", path.display());
    }
    Ok(())
}
