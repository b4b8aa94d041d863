//! Parsing of `--solver` specifications into oracle factories.
//!
//! Normalized-frame solvers (qwt, ckt1, ckt2 and the normalized tl presets)
//! are wrapped in a frequency-scaling adapter when the requested band is in
//! engineering units, treating n GHz as n Hz of the normalized frame.

use rfsweep_core::error::{Error, Result};
use rfsweep_core::solvers::{
    presets, tabulated_oracle, tl_network, AnalyticKind, AnalyticOracle, ScaledOracle,
    SolverOracle, TlElement, TlSegment, TlTopology, SPEED_OF_LIGHT,
};
use rfsweep_core::touchstone;
use rfsweep_core::types::{Frequency, SampleSet};

/// A parsed `--solver` argument; builds fresh oracles on demand so each
/// algorithm run starts with a zero call count.
pub struct SolverSpec {
    kind: SpecKind,
    /// Set when the user band is mapped onto the normalized frame.
    scale: Option<f64>,
}

enum SpecKind {
    Analytic(AnalyticKind),
    Preset(&'static str),
    Chain(Vec<TlElement>),
    Touchstone { data: SampleSet, strict: bool },
}

impl SolverSpec {
    /// `spec` is one of `qwt | ckt1 | ckt2 | tl:<...> | touchstone:<path>[:lenient]`.
    ///
    /// `f_max_hz` decides whether a normalized-frame solver needs scaling
    /// (любой band above 1 kHz is treated as engineering units).
    pub fn parse(spec: &str, f_max_hz: f64) -> Result<SolverSpec> {
        let scale_needed = f_max_hz > 1e3;
        let scaled = |normalized_frame: bool| {
            if normalized_frame && scale_needed {
                Some(1e-9)
            } else {
                None
            }
        };
        if let Some(rest) = spec.strip_prefix("touchstone:") {
            let (path, strict) = match rest.strip_suffix(":lenient") {
                Some(p) => (p, false),
                None => (rest, true),
            };
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidInput(format!("cannot read touchstone file '{path}': {e}"))
            })?;
            let ports = ports_from_extension(path).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "cannot infer port count from '{path}' (expected .sNp extension)"
                ))
            })?;
            let doc = touchstone::parse(&text, ports)?;
            return Ok(SolverSpec {
                kind: SpecKind::Touchstone {
                    data: doc.data,
                    strict,
                },
                scale: None,
            });
        }
        if let Some(rest) = spec.strip_prefix("tl:") {
            return match rest {
                "lpf7" => Ok(SolverSpec {
                    kind: SpecKind::Preset("lpf7"),
                    scale: scaled(true),
                }),
                "ladder7" => Ok(SolverSpec {
                    kind: SpecKind::Preset("ladder7"),
                    scale: scaled(true),
                }),
                "star10" => Ok(SolverSpec {
                    kind: SpecKind::Preset("star10"),
                    scale: None,
                }),
                "qwt" => Ok(SolverSpec {
                    kind: SpecKind::Preset("qwt"),
                    scale: scaled(true),
                }),
                chain if chain.starts_with("chain:") => {
                    let elements = parse_chain(&chain["chain:".len()..])?;
                    Ok(SolverSpec {
                        kind: SpecKind::Chain(elements),
                        scale: None,
                    })
                }
                other => Err(Error::InvalidInput(format!(
                    "unknown tl network '{other}' (expected lpf7, ladder7, star10, qwt or chain:...)"
                ))),
            };
        }
        let kind = match spec {
            "qwt" => AnalyticKind::Qwt,
            "ckt1" => AnalyticKind::Circuit1,
            "ckt2" => AnalyticKind::Circuit2,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown solver '{other}' (expected qwt, ckt1, ckt2, tl:<spec> or touchstone:<path>)"
                )))
            }
        };
        Ok(SolverSpec {
            kind: SpecKind::Analytic(kind),
            scale: scaled(true),
        })
    }

    /// Builds a fresh oracle with a zero call count.
    pub fn build(&self, band: (Frequency, Frequency)) -> Result<Box<dyn SolverOracle>> {
        let inner_band = match self.scale {
            Some(factor) => (
                Frequency::new(band.0.hz() * factor)?,
                Frequency::new(band.1.hz() * factor)?,
            ),
            None => band,
        };
        let oracle: Box<dyn SolverOracle> = match &self.kind {
            SpecKind::Analytic(kind) => {
                let inner = AnalyticOracle::new(*kind, inner_band);
                match self.scale {
                    Some(factor) => Box::new(ScaledOracle::new(inner, factor)?),
                    None => Box::new(inner),
                }
            }
            SpecKind::Preset(name) => {
                let inner = match *name {
                    "lpf7" => presets::step_lpf7(),
                    "ladder7" => presets::ladder7(),
                    "star10" => presets::star10(),
                    "qwt" => presets::qwt_tl_equivalent(),
                    _ => unreachable!("validated in parse"),
                };
                match self.scale {
                    Some(factor) => Box::new(ScaledOracle::new(inner, factor)?),
                    None => Box::new(inner),
                }
            }
            SpecKind::Chain(elements) => {
                Box::new(tl_network(TlTopology::Chain(elements.clone()), band)?)
            }
            SpecKind::Touchstone { data, strict } => {
                Box::new(tabulated_oracle(data.clone(), *strict)?)
            }
        };
        Ok(oracle)
    }

    /// Default trace length for the semi-adaptive mode, in the sweep frame.
    ///
    /// Transmission-line topologies report their physical length; the
    /// normalized analytic circuits fall back to the 0.2 λ rule at f_max.
    pub fn default_length_m(&self, f_max: Frequency) -> Option<f64> {
        let frame = self.scale.unwrap_or(1.0);
        match &self.kind {
            SpecKind::Analytic(_) => Some(0.2 * SPEED_OF_LIGHT / f_max.hz()),
            SpecKind::Preset(name) => {
                let topo = match *name {
                    "lpf7" => presets::step_lpf7().topology().clone(),
                    "ladder7" => presets::ladder7().topology().clone(),
                    "star10" => presets::star10().topology().clone(),
                    "qwt" => presets::qwt_tl_equivalent().topology().clone(),
                    _ => unreachable!(),
                };
                let l = topo.total_length_m() * frame;
                if l > 0.0 {
                    Some(l)
                } else {
                    Some(0.2 * SPEED_OF_LIGHT / f_max.hz())
                }
            }
            SpecKind::Chain(elements) => Some(
                TlTopology::Chain(elements.clone()).total_length_m(),
            ),
            SpecKind::Touchstone { .. } => None,
        }
    }

    /// Native band of the underlying data, if it has one (used as default
    /// when --fmin/--fmax are omitted).
    pub fn native_band(&self) -> Option<(f64, f64)> {
        match &self.kind {
            SpecKind::Touchstone { data, .. } => {
                let s = data.samples();
                Some((s[0].0.hz(), s[s.len() - 1].0.hz()))
            }
            SpecKind::Preset("star10") => Some((1e9, 15e9)),
            _ => None,
        }
    }
}

fn ports_from_extension(path: &str) -> Option<usize> {
    let ext = path.rsplit('.').next()?;
    let digits: String = ext.chars().filter(|c| c.is_ascii_digit()).collect();
    let lower = ext.to_ascii_lowercase();
    if lower.starts_with('s') && lower.ends_with('p') && !digits.is_empty() {
        digits.parse().ok()
    } else {
        None
    }
}

/// Chain grammar: comma-separated `z0:elen:fref[:loss]` line sections.
fn parse_chain(text: &str) -> Result<Vec<TlElement>> {
    let mut elements = Vec::new();
    for part in text.split(',') {
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::InvalidInput(format!(
                "chain section '{part}' (expected z0:elen:fref[:loss])"
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidInput(format!("bad {what} '{s}' in chain section")))
        };
        let z0 = num(fields[0], "impedance")?;
        let elen = num(fields[1], "electrical length")?;
        let f_ref = Frequency::new(num(fields[2], "reference frequency")?)?;
        let loss = if fields.len() == 4 {
            num(fields[3], "loss")?
        } else {
            0.0
        };
        elements.push(TlElement::Line(TlSegment {
            z0,
            electrical_length: elen,
            f_ref,
            loss,
        }));
    }
    Ok(elements)
}

/// Parses a frequency with an optional Hz/kHz/MHz/GHz suffix.
pub fn parse_frequency(text: &str) -> Result<f64> {
    let lower = text.trim().to_ascii_lowercase();
    let (number, mult) = if let Some(v) = lower.strip_suffix("ghz") {
        (v, 1e9)
    } else if let Some(v) = lower.strip_suffix("mhz") {
        (v, 1e6)
    } else if let Some(v) = lower.strip_suffix("khz") {
        (v, 1e3)
    } else if let Some(v) = lower.strip_suffix("hz") {
        (v, 1.0)
    } else {
        (lower.as_str(), 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad frequency '{text}'")))?;
    Ok(value * mult)
}
