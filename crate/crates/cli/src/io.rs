//! Small input/output helpers: significant-digit formatting and the CSV
//! readers for measurement and scan files.

use hedimer::error::{Error, Result};
use hedimer::lineshift::Measurement;
use hedimer::spectra::ExperimentalLevel;

/// Energies in MHz are printed with 4 significant digits (the table
/// granularity); lengths in bohr with one decimal.
pub fn fmt_mhz(x: f64) -> String {
    fmt_sig(x, 4)
}

pub fn fmt_a0(x: f64) -> String {
    format!("{x:.1}")
}

pub fn fmt_sig(x: f64, sig: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.3}");
    }
    let digits_before = (x.abs().log10().floor() as i32) + 1;
    let decimals = (sig - digits_before).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Split a CSV file into a lower-cased header row and data rows, skipping
/// blank lines and `#` comments.
fn csv_rows(text: &str, what: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{what}: empty file")))?;
    let header: Vec<String> = header
        .split(',')
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect();
    Ok((header, rows))
}

fn parse_f64(field: &str, what: &str, line: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{what}: line {line}: '{field}' is not a number")))
}

/// Experimental level file for the C₃/Γ fit: columns
/// `v, energy_mhz, sigma_mhz`.
pub fn read_experimental_levels(text: &str) -> Result<Vec<ExperimentalLevel>> {
    let (header, rows) = csv_rows(text, "levels file")?;
    if header != ["v", "energy_mhz", "sigma_mhz"] {
        return Err(Error::Parse(format!(
            "levels file: expected header 'v, energy_mhz, sigma_mhz', got '{}'",
            header.join(", ")
        )));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != 3 {
                return Err(Error::Parse(format!(
                    "levels file: line {}: expected 3 fields, got {}",
                    i + 2,
                    row.len()
                )));
            }
            Ok(ExperimentalLevel {
                v: row[0].parse().map_err(|_| {
                    Error::Parse(format!("levels file: line {}: bad v '{}'", i + 2, row[0]))
                })?,
                energy_mhz: parse_f64(&row[1], "levels file", i + 2)?,
                sigma_mhz: parse_f64(&row[2], "levels file", i + 2)?,
            })
        })
        .collect()
}

/// Either kind of reduction input.
pub enum ReduceInput {
    /// Already-fitted lines: `v, delta_mhz, b0_gauss, t_uk[, n_cm3]`.
    Measurements(Vec<Measurement>),
    /// A raw resonance scan: `detuning_mhz, temperature_uk[, atoms, od]`.
    Scan(Vec<(f64, f64)>),
}

/// Detect the input kind from the header and parse accordingly.
pub fn read_reduce_input(text: &str) -> Result<ReduceInput> {
    let (header, rows) = csv_rows(text, "input file")?;
    match header.first().map(String::as_str) {
        Some("v") => {
            let with_density = match header.len() {
                4 if header[1..] == ["delta_mhz", "b0_gauss", "t_uk"] => false,
                5 if header[1..] == ["delta_mhz", "b0_gauss", "t_uk", "n_cm3"] => true,
                _ => {
                    return Err(Error::Parse(format!(
                        "measurements file: expected header \
                         'v, delta_mhz, b0_gauss, t_uk[, n_cm3]', got '{}'",
                        header.join(", ")
                    )))
                }
            };
            let ms = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let want = if with_density { 5 } else { 4 };
                    if row.len() != want {
                        return Err(Error::Parse(format!(
                            "measurements file: line {}: expected {} fields, got {}",
                            i + 2,
                            want,
                            row.len()
                        )));
                    }
                    Ok(Measurement {
                        v_label: Some(row[0].parse().map_err(|_| {
                            Error::Parse(format!(
                                "measurements file: line {}: bad v '{}'",
                                i + 2,
                                row[0]
                            ))
                        })?),
                        delta_mhz: parse_f64(&row[1], "measurements file", i + 2)?,
                        b0_gauss: parse_f64(&row[2], "measurements file", i + 2)?,
                        temperature_uk: parse_f64(&row[3], "measurements file", i + 2)?,
                        density_cm3: if with_density {
                            Some(parse_f64(&row[4], "measurements file", i + 2)?)
                        } else {
                            None
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReduceInput::Measurements(ms))
        }
        Some("detuning_mhz") => {
            if header.len() < 2
                || header[1] != "temperature_uk"
                || header.len() > 4
                || (header.len() >= 3 && header[2] != "atoms")
                || (header.len() == 4 && header[3] != "od")
            {
                return Err(Error::Parse(format!(
                    "scan file: expected header 'detuning_mhz, temperature_uk[, atoms, od]', \
                     got '{}'",
                    header.join(", ")
                )));
            }
            let pts = rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    if row.len() != header.len() {
                        return Err(Error::Parse(format!(
                            "scan file: line {}: expected {} fields, got {}",
                            i + 2,
                            header.len(),
                            row.len()
                        )));
                    }
                    Ok((
                        parse_f64(&row[0], "scan file", i + 2)?,
                        parse_f64(&row[1], "scan file", i + 2)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReduceInput::Scan(pts))
        }
        _ => Err(Error::Parse(format!(
            "input file: unrecognized header '{}'; expected a measurements file \
             (v, delta_mhz, b0_gauss, t_uk[, n_cm3]) or a scan file \
             (detuning_mhz, temperature_uk[, atoms, od])",
            header.join(", ")
        ))),
    }
}
