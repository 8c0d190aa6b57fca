//! Waveform CSV ingestion and atomic report writing.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use trifault_core::pipeline::SampleFrame;

use crate::CliError;

/// Parsed waveform record: voltage frames, plus current frames when the
/// 7-column layout is present.
pub struct WaveformRecord {
    pub voltage: Vec<SampleFrame>,
    pub current: Option<Vec<SampleFrame>>,
}

/// Read a `t,va,vb,vc[,ia,ib,ic]` CSV. Every field must parse as a finite
/// number; violations are reported with their 1-based line number.
pub fn read_waveform_csv(path: &Path) -> Result<WaveformRecord, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let with_currents = match names.as_slice() {
        [t, va, vb, vc] if t == "t" && va == "va" && vb == "vb" && vc == "vc" => false,
        [t, va, vb, vc, ia, ib, ic]
            if t == "t"
                && va == "va"
                && vb == "vb"
                && vc == "vc"
                && ia == "ia"
                && ib == "ib"
                && ic == "ic" =>
        {
            true
        }
        _ => {
            return Err(CliError::Data(format!(
                "{}: line 1: expected header `t,va,vb,vc` or `t,va,vb,vc,ia,ib,ic`, got `{}`",
                path.display(),
                names.join(",")
            )))
        }
    };

    let mut voltage = Vec::new();
    let mut current = with_currents.then(Vec::new);
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut values = [0.0f64; 7];
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Data(format!(
                    "{}: line {line}: field {} `{field}` is not a number",
                    path.display(),
                    i + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{}: line {line}: field {} is not finite",
                    path.display(),
                    i + 1
                )));
            }
            values[i] = v;
        }
        voltage.push(SampleFrame::new(
            values[0],
            [values[1], values[2], values[3]],
        ));
        if let Some(cur) = current.as_mut() {
            cur.push(SampleFrame::new(
                values[0],
                [values[4], values[5], values[6]],
            ));
        }
    }
    if voltage.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(WaveformRecord { voltage, current })
}

/// Write a file atomically: contents land under the final name only when
/// complete (temp file in the same directory, then rename).
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path)
        .map_err(|e| CliError::Data(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Median sampling interval of a record, for rate inference.
pub fn infer_fs(frames: &[SampleFrame]) -> Result<f64, CliError> {
    if frames.len() < 2 {
        return Err(CliError::Data(
            "record too short to infer sampling rate".into(),
        ));
    }
    let mut dts: Vec<f64> = frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let dt = dts[dts.len() / 2];
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CliError::Data("timestamps are not increasing".into()));
    }
    Ok(1.0 / dt)
}
