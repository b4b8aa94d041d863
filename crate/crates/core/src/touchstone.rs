//! Touchstone v1 (.sNp) reader and writer.
//!
//! Covers the option line (frequency unit, parameter, format, reference
//! resistance), comment preservation, the 2-port column convention
//! (S11 S21 S12 S22) and row-wrapped matrices for more than two ports.
//! Version-2 keyword files are rejected.

use crate::error::{Error, Result};
use crate::types::{Frequency, ResponseMatrix, SampleSet};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn multiplier(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn token(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterType {
    S,
    Y,
    Z,
}

impl ParameterType {
    fn token(self) -> &'static str {
        match self {
            ParameterType::S => "S",
            ParameterType::Y => "Y",
            ParameterType::Z => "Z",
        }
    }
}

/// Number encoding of the data pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// real, imaginary
    Ri,
    /// magnitude, angle in degrees
    Ma,
    /// 20·log10(magnitude), angle in degrees
    Db,
}

impl DataFormat {
    fn token(self) -> &'static str {
        match self {
            DataFormat::Ri => "RI",
            DataFormat::Ma => "MA",
            DataFormat::Db => "DB",
        }
    }

    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Ri => Complex64::new(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
        }
    }

    fn encode(self, v: Complex64) -> (f64, f64) {
        match self {
            DataFormat::Ri => (v.re, v.im),
            DataFormat::Ma => (v.norm(), v.arg().to_degrees()),
            DataFormat::Db => (20.0 * v.norm().log10(), v.arg().to_degrees()),
        }
    }
}

/// The `# unit parameter format R n` header; defaults to `# GHz S MA R 50`.
#[derive(Debug, Clone, Copy)]
pub struct OptionLine {
    pub frequency_unit: FrequencyUnit,
    pub parameter: ParameterType,
    pub format: DataFormat,
    pub reference_resistance: f64,
}

impl Default for OptionLine {
    fn default() -> Self {
        OptionLine {
            frequency_unit: FrequencyUnit::GHz,
            parameter: ParameterType::S,
            format: DataFormat::Ma,
            reference_resistance: 50.0,
        }
    }
}

/// Parsed Touchstone file: option line, decoded samples, preserved comments.
#[derive(Debug, Clone)]
pub struct TouchstoneDocument {
    pub ports: usize,
    pub option_line: OptionLine,
    pub data: SampleSet,
    pub comments: Vec<String>,
}

impl TouchstoneDocument {
    /// Wraps a sample set for export with an RI option line.
    pub fn from_samples(data: SampleSet, unit: FrequencyUnit) -> Self {
        TouchstoneDocument {
            ports: data.ports(),
            option_line: OptionLine {
                frequency_unit: unit,
                format: DataFormat::Ri,
                ..OptionLine::default()
            },
            data,
            comments: Vec::new(),
        }
    }
}

fn parse_option_line(line: &str, line_no: usize) -> Result<OptionLine> {
    let mut opt = OptionLine::default();
    let mut tokens = line
        .trim_start_matches('#')
        .split_whitespace()
        .map(str::to_string)
        .collect::<Vec<_>>()
        .into_iter();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opt.frequency_unit = FrequencyUnit::Hz,
            "KHZ" => opt.frequency_unit = FrequencyUnit::KHz,
            "MHZ" => opt.frequency_unit = FrequencyUnit::MHz,
            "GHZ" => opt.frequency_unit = FrequencyUnit::GHz,
            "S" => opt.parameter = ParameterType::S,
            "Y" => opt.parameter = ParameterType::Y,
            "Z" => opt.parameter = ParameterType::Z,
            "RI" => opt.format = DataFormat::Ri,
            "MA" => opt.format = DataFormat::Ma,
            "DB" => opt.format = DataFormat::Db,
            "R" => {
                let value = tokens.next().ok_or(Error::Parse {
                    line: line_no,
                    msg: "option line: R without a resistance value".into(),
                })?;
                opt.reference_resistance = value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("option line: bad resistance '{value}'"),
                })?;
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("option line: unknown token '{other}'"),
                })
            }
        }
    }
    Ok(opt)
}

/// Decodes Touchstone v1 text into a document.
///
/// `ports_hint` supplies the port count normally implied by the `.sNp` file
/// extension. Comments are preserved; frequencies must ascend strictly.
pub fn parse(text: &str, ports_hint: usize) -> Result<TouchstoneDocument> {
    if ports_hint == 0 {
        return Err(Error::InvalidInput("ports hint must be >= 1".into()));
    }
    let p = ports_hint;
    let values_per_record = 1 + 2 * p * p;

    let mut option_line: Option<OptionLine> = None;
    let mut comments = Vec::new();
    let mut numbers: Vec<(f64, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('!') {
            Some(pos) => {
                let comment = raw[pos + 1..].trim();
                if !comment.is_empty() {
                    comments.push(comment.to_string());
                }
                &raw[..pos]
            }
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("Touchstone v2 keyword '{line}' is not supported (v1 only)"),
            });
        }
        if line.starts_with('#') {
            if option_line.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "second option line".into(),
                });
            }
            if !numbers.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "option line after data".into(),
                });
            }
            option_line = Some(parse_option_line(line, line_no)?);
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad number '{tok}'"),
            })?;
            numbers.push((v, line_no));
        }
    }

    let opt = option_line.unwrap_or_default();
    if numbers.is_empty() {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            msg: "no data records".into(),
        });
    }
    if numbers.len() % values_per_record != 0 {
        let (_, line) = numbers[numbers.len() - 1];
        return Err(Error::Parse {
            line,
            msg: format!(
                "{} values do not form whole records of {} (1 frequency + {} pairs)",
                numbers.len(),
                values_per_record,
                p * p
            ),
        });
    }

    let mut samples = Vec::new();
    let mut last_hz = f64::NEG_INFINITY;
    for record in numbers.chunks(values_per_record) {
        let (f_raw, f_line) = record[0];
        let hz = f_raw * opt.frequency_unit.multiplier();
        if hz <= last_hz {
            return Err(Error::Parse {
                line: f_line,
                msg: format!("frequencies not ascending at {f_raw}"),
            });
        }
        last_hz = hz;
        let f = Frequency::new(hz).map_err(|e| Error::Parse {
            line: f_line,
            msg: e.to_string(),
        })?;

        let mut values = Vec::with_capacity(p * p);
        for pair in record[1..].chunks(2) {
            values.push(opt.format.decode(pair[0].0, pair[1].0));
        }
        let matrix = place_values(&values, p);
        samples.push((f, ResponseMatrix::new(matrix).expect("square")));
    }

    let data = SampleSet::new(p, samples).map_err(|e| Error::Parse {
        line: 1,
        msg: e.to_string(),
    })?;
    Ok(TouchstoneDocument {
        ports: p,
        option_line: opt,
        data,
        comments,
    })
}

/// v1 value order: 1-port S11; 2-port column-major (S11 S21 S12 S22);
/// larger matrices row-major.
fn place_values(values: &[Complex64], p: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::<Complex64>::zeros(p, p);
    if p == 2 {
        m[(0, 0)] = values[0];
        m[(1, 0)] = values[1];
        m[(0, 1)] = values[2];
        m[(1, 1)] = values[3];
    } else {
        for (k, &v) in values.iter().enumerate() {
            m[(k / p, k % p)] = v;
        }
    }
    m
}

fn extract_values(m: &ResponseMatrix) -> Vec<Complex64> {
    let p = m.ports();
    if p == 2 {
        vec![
            m.entry(0, 0),
            m.entry(1, 0),
            m.entry(0, 1),
            m.entry(1, 1),
        ]
    } else {
        let mut out = Vec::with_capacity(p * p);
        for i in 0..p {
            for j in 0..p {
                out.push(m.entry(i, j));
            }
        }
        out
    }
}

/// Frequency value in the file's unit whose product with the multiplier
/// reproduces the stored hertz exactly, when such a value exists.
fn frequency_in_unit(hz: f64, multiplier: f64) -> f64 {
    let v = hz / multiplier;
    for candidate in [v, next_after(v, f64::INFINITY), next_after(v, f64::NEG_INFINITY)] {
        if candidate * multiplier == hz {
            return candidate;
        }
    }
    v
}

fn next_after(x: f64, toward: f64) -> f64 {
    if x == toward || x.is_nan() {
        return x;
    }
    let bits = x.to_bits();
    let next = if (x < toward) == (x >= 0.0) {
        bits + 1
    } else {
        bits - 1
    };
    f64::from_bits(next)
}

/// Encodes a document as Touchstone v1 text.
///
/// Data pairs carry 9 significant digits; frequencies are written so they
/// re-parse to the exact stored value. Values wrap at four complex pairs per
/// line for matrices larger than 2×2, per the v1 layout.
pub fn write(doc: &TouchstoneDocument) -> String {
    let opt = &doc.option_line;
    let mut out = String::new();
    for c in &doc.comments {
        out.push_str("! ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&format!(
        "# {} {} {} R {}\n",
        opt.frequency_unit.token(),
        opt.parameter.token(),
        opt.format.token(),
        opt.reference_resistance
    ));

    let p = doc.ports;
    let multiplier = opt.frequency_unit.multiplier();
    for (f, m) in doc.data.samples() {
        let f_unit = frequency_in_unit(f.hz(), multiplier);
        let values = extract_values(m);
        if p <= 2 {
            out.push_str(&format!("{f_unit}"));
            for v in values {
                let (a, b) = opt.format.encode(v);
                out.push_str(&format!(" {a:.8e} {b:.8e}"));
            }
            out.push('\n');
        } else {
            // frequency on its own logical record, pairs wrapped 4 per line
            out.push_str(&format!("{f_unit}"));
            for (k, v) in values.iter().enumerate() {
                if k > 0 && k % 4 == 0 {
                    out.push('\n');
                }
                let (a, b) = opt.format.encode(*v);
                out.push_str(&format!(" {a:.8e} {b:.8e}"));
            }
            out.push('\n');
        }
    }
    out
}
