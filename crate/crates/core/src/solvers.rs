//! Frequency-response oracles standing in for a full-wave EM solver.
//!
//! Analytic circuits (quarter-wave transformer and its two equivalent
//! circuits), cascaded transmission-line networks built from ABCD blocks,
//! and tabulated data replay. All oracles count their queries so sweep
//! algorithms can be compared by solver cost.

use crate::error::{Error, Result};
use crate::types::{Frequency, ResponseMatrix, SampleSet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Reference impedance used for Z ↔ S conversion unless overridden.
pub const DEFAULT_Z0: f64 = 50.0;

/// Deterministic frequency→response oracle with invocation accounting.
///
/// `query` must be a pure function of `f`; `call_count` increments exactly
/// once per query. Oracles with `reentrant() == true` may be queried from
/// several threads at once.
pub trait SolverOracle: Send + Sync {
    fn ports(&self) -> usize;
    fn band(&self) -> (Frequency, Frequency);
    fn query(&self, f: Frequency) -> Result<ResponseMatrix>;
    fn call_count(&self) -> usize;
    fn reentrant(&self) -> bool {
        true
    }
}

#[derive(Debug, Default)]
struct CallCounter(AtomicUsize);

impl CallCounter {
    fn bump(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
    fn get(&self) -> usize {
        self.0.load(Ordering::Relaxed)
    }
}

fn check_band(f: Frequency, band: (Frequency, Frequency)) -> Result<()> {
    let (lo, hi) = band;
    let slack = 1e-9 * hi.hz();
    if f.hz() < lo.hz() - slack || f.hz() > hi.hz() + slack {
        return Err(Error::Solver {
            f_hz: f.hz(),
            reason: format!("outside oracle band [{}, {}] Hz", lo.hz(), hi.hz()),
        });
    }
    Ok(())
}

/// Reflection coefficient of an impedance against a real reference.
pub fn z_to_s11(z: Complex64, z0: f64) -> Complex64 {
    (z - z0) / (z + z0)
}

// ---------------------------------------------------------------------------
// Analytic circuits (normalized frame: resonance of the quarter-wave line at
// f = 1 Hz, so sk = jπf/2).
// ---------------------------------------------------------------------------

/// Input impedance of the quarter-wave transformer: a 70.7 Ω line, a quarter
/// wavelength long at f = 1, terminated in 100 Ω.
///
/// With `normalized` the argument is taken in the 1 Hz-resonance frame;
/// otherwise f is in hertz with the resonance at 1 GHz.
pub fn qwt_impedance(f: Frequency, normalized: bool) -> Result<Complex64> {
    let fn_ = if normalized { f.hz() } else { f.hz() / 1e9 };
    let sk = Complex64::new(0.0, std::f64::consts::PI * fn_ / 2.0);
    let e = sk.exp();
    let em = (-sk).exp();
    let den = e * 170.7 - em * 29.3;
    if den.norm() < 1e-300 {
        return Err(Error::EvaluationSingularity { f_hz: f.hz() });
    }
    Ok((e * 170.7 + em * 29.3) / den * 70.7)
}

/// Third-order equivalent circuit fitted at {0.2, 0.4, 0.6} (normalized frame).
pub fn rational_circuit_1(f: Frequency) -> Complex64 {
    rational_circuit_1_at(f.to_complex().value())
}

pub(crate) fn rational_circuit_1_at(s: Complex64) -> Complex64 {
    let num = s * s * 2512.0 + s * 1.866e4 + 1.305e5;
    let den = s * s * s + s * s * 17.42 + s * 417.3 + 1305.0;
    num / den
}

/// Third-order equivalent circuit fitted at {0.3, 0.54, 0.78} (normalized frame).
pub fn rational_circuit_2(f: Frequency) -> Complex64 {
    rational_circuit_2_at(f.to_complex().value())
}

pub(crate) fn rational_circuit_2_at(s: Complex64) -> Complex64 {
    let num = s * s * 2486.0 + s * 1.82e4 + 1.267e5;
    let den = s * s * s + s * s * 17.77 + s * 405.8 + 1267.0;
    num / den
}

/// Which analytic 1-port stands behind an [`AnalyticOracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnalyticKind {
    /// Quarter-wave transformer, Z from the transcendental line equation.
    Qwt,
    /// Rational equivalent circuit 1.
    Circuit1,
    /// Rational equivalent circuit 2.
    Circuit2,
}

/// 1-port oracle returning S11 of one of the analytic circuits
/// (normalized-frame frequencies).
pub struct AnalyticOracle {
    kind: AnalyticKind,
    z0: f64,
    band: (Frequency, Frequency),
    counter: CallCounter,
}

impl AnalyticOracle {
    pub fn new(kind: AnalyticKind, band: (Frequency, Frequency)) -> Self {
        AnalyticOracle {
            kind,
            z0: DEFAULT_Z0,
            band,
            counter: CallCounter::default(),
        }
    }

    pub fn with_reference(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }

    /// Impedance before S conversion; does not count as a query.
    pub fn impedance(&self, f: Frequency) -> Result<Complex64> {
        match self.kind {
            AnalyticKind::Qwt => qwt_impedance(f, true),
            AnalyticKind::Circuit1 => Ok(rational_circuit_1(f)),
            AnalyticKind::Circuit2 => Ok(rational_circuit_2(f)),
        }
    }
}

impl SolverOracle for AnalyticOracle {
    fn ports(&self) -> usize {
        1
    }

    fn band(&self) -> (Frequency, Frequency) {
        self.band
    }

    fn query(&self, f: Frequency) -> Result<ResponseMatrix> {
        check_band(f, self.band)?;
        self.counter.bump();
        let z = self.impedance(f)?;
        Ok(ResponseMatrix::from_scalar(z_to_s11(z, self.z0)))
    }

    fn call_count(&self) -> usize {
        self.counter.get()
    }
}

// ---------------------------------------------------------------------------
// Transmission-line networks
// ---------------------------------------------------------------------------

/// Uniform transmission-line section.
///
/// `electrical_length` is the length in wavelengths at `f_ref`; `loss` is the
/// total attenuation in nepers at any frequency (no dispersion).
#[derive(Debug, Clone, Copy)]
pub struct TlSegment {
    pub z0: f64,
    pub electrical_length: f64,
    pub f_ref: Frequency,
    pub loss: f64,
}

impl TlSegment {
    pub fn lossless(z0: f64, electrical_length: f64, f_ref: Frequency) -> Self {
        TlSegment {
            z0,
            electrical_length,
            f_ref,
            loss: 0.0,
        }
    }

    /// Physical length in meters (λ·c/f_ref per unit electrical length).
    pub fn physical_length_m(&self) -> f64 {
        self.electrical_length * SPEED_OF_LIGHT / self.f_ref.hz()
    }

    fn abcd(&self, f: Frequency) -> [Complex64; 4] {
        let theta = 2.0 * std::f64::consts::PI * self.electrical_length * f.hz() / self.f_ref.hz();
        let gl = Complex64::new(self.loss, theta);
        let ch = gl.cosh();
        let sh = gl.sinh();
        [ch, sh * self.z0, sh / self.z0, ch]
    }
}

/// Speed of light used by electrical-size rules, m/s.
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// One element of a cascade chain.
#[derive(Debug, Clone, Copy)]
pub enum TlElement {
    Line(TlSegment),
    SeriesResistor { ohms: f64 },
    SeriesInductor { henries: f64 },
    SeriesCapacitor { farads: f64 },
    ShuntResistor { ohms: f64 },
    ShuntInductor { henries: f64 },
    ShuntCapacitor { farads: f64 },
}

impl TlElement {
    fn abcd(&self, f: Frequency) -> Result<[Complex64; 4]> {
        let s = f.to_complex().value();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let series = |z: Complex64| [one, z, zero, one];
        let shunt = |y: Complex64| [one, zero, y, one];
        Ok(match *self {
            TlElement::Line(seg) => seg.abcd(f),
            TlElement::SeriesResistor { ohms } => series(Complex64::new(ohms, 0.0)),
            TlElement::SeriesInductor { henries } => series(s * henries),
            TlElement::SeriesCapacitor { farads } => {
                let y = s * farads;
                if y.norm() < 1e-300 {
                    return Err(Error::EvaluationSingularity { f_hz: f.hz() });
                }
                series(y.inv())
            }
            TlElement::ShuntResistor { ohms } => shunt(Complex64::new(1.0 / ohms, 0.0)),
            TlElement::ShuntInductor { henries } => {
                let z = s * henries;
                if z.norm() < 1e-300 {
                    return Err(Error::EvaluationSingularity { f_hz: f.hz() });
                }
                shunt(z.inv())
            }
            TlElement::ShuntCapacitor { farads } => shunt(s * farads),
        })
    }

    fn physical_length_m(&self) -> f64 {
        match self {
            TlElement::Line(seg) => seg.physical_length_m(),
            _ => 0.0,
        }
    }
}

fn abcd_mul(a: [Complex64; 4], b: [Complex64; 4]) -> [Complex64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn chain_abcd(elements: &[TlElement], f: Frequency) -> Result<[Complex64; 4]> {
    let mut acc = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    ];
    for el in elements {
        acc = abcd_mul(acc, el.abcd(f)?);
    }
    Ok(acc)
}

/// Network topology assembled from two-port blocks.
#[derive(Debug, Clone)]
pub enum TlTopology {
    /// Two-port cascade between 50 Ω ports.
    Chain(Vec<TlElement>),
    /// One-port: a cascade terminated in a resistive load.
    Terminated {
        elements: Vec<TlElement>,
        load_ohms: f64,
    },
    /// p-port star: each port reaches a common junction through its own chain.
    Star(Vec<Vec<TlElement>>),
}

impl TlTopology {
    fn ports(&self) -> usize {
        match self {
            TlTopology::Chain(_) => 2,
            TlTopology::Terminated { .. } => 1,
            TlTopology::Star(branches) => branches.len(),
        }
    }

    /// Total physical trace length, used by the electrical-size rule.
    pub fn total_length_m(&self) -> f64 {
        match self {
            TlTopology::Chain(els) | TlTopology::Terminated { elements: els, .. } => {
                els.iter().map(TlElement::physical_length_m).sum()
            }
            TlTopology::Star(branches) => branches
                .iter()
                .flat_map(|b| b.iter())
                .map(TlElement::physical_length_m)
                .sum(),
        }
    }
}

/// Deterministic oracle computing S-parameters of a [`TlTopology`] by ABCD
/// cascading, nodal assembly and Kron reduction.
pub struct TlNetworkOracle {
    topology: TlTopology,
    z0: f64,
    band: (Frequency, Frequency),
    counter: CallCounter,
}

/// Validates and wraps a topology into an oracle at a 50 Ω reference.
pub fn tl_network(topology: TlTopology, band: (Frequency, Frequency)) -> Result<TlNetworkOracle> {
    match &topology {
        TlTopology::Chain(els) => {
            if els.is_empty() {
                return Err(Error::Topology("empty chain".into()));
            }
        }
        TlTopology::Terminated { elements, load_ohms } => {
            if elements.is_empty() {
                return Err(Error::Topology("empty terminated chain".into()));
            }
            if !(*load_ohms > 0.0) {
                return Err(Error::Topology(format!(
                    "load must be a positive resistance, got {load_ohms}"
                )));
            }
        }
        TlTopology::Star(branches) => {
            if branches.len() < 2 {
                return Err(Error::Topology("star needs at least 2 branches".into()));
            }
            if branches.iter().any(|b| b.is_empty()) {
                return Err(Error::Topology("star branch is empty".into()));
            }
        }
    }
    Ok(TlNetworkOracle {
        topology,
        z0: DEFAULT_Z0,
        band,
        counter: CallCounter::default(),
    })
}

impl TlNetworkOracle {
    pub fn topology(&self) -> &TlTopology {
        &self.topology
    }

    /// Response without counting, used internally and by tests.
    pub fn response(&self, f: Frequency) -> Result<ResponseMatrix> {
        match &self.topology {
            TlTopology::Chain(els) => {
                let abcd = chain_abcd(els, f)?;
                Ok(abcd_to_s(abcd, self.z0))
            }
            TlTopology::Terminated { elements, load_ohms } => {
                let [a, b, c, d] = chain_abcd(elements, f)?;
                let zl = Complex64::new(*load_ohms, 0.0);
                let den = c * zl + d;
                if den.norm() < 1e-300 {
                    return Err(Error::EvaluationSingularity { f_hz: f.hz() });
                }
                let zin = (a * zl + b) / den;
                Ok(ResponseMatrix::from_scalar(z_to_s11(zin, self.z0)))
            }
            TlTopology::Star(branches) => self.star_response(branches, f),
        }
    }

    fn star_response(&self, branches: &[Vec<TlElement>], f: Frequency) -> Result<ResponseMatrix> {
        let p = branches.len();
        // nodal admittance over p ports plus the internal junction node
        let mut y = DMatrix::<Complex64>::zeros(p + 1, p + 1);
        for (i, branch) in branches.iter().enumerate() {
            let [a, b, c, d] = chain_abcd(branch, f)?;
            if b.norm() < 1e-300 {
                return Err(Error::EvaluationSingularity { f_hz: f.hz() });
            }
            let det = a * d - b * c;
            y[(i, i)] += d / b;
            y[(i, p)] += -det / b;
            y[(p, i)] += -Complex64::new(1.0, 0.0) / b;
            y[(p, p)] += a / b;
        }
        let y_jj = y[(p, p)];
        if y_jj.norm() < 1e-300 {
            return Err(Error::EvaluationSingularity { f_hz: f.hz() });
        }
        // Kron elimination of the junction node
        let mut y_p = DMatrix::<Complex64>::zeros(p, p);
        for i in 0..p {
            for j in 0..p {
                y_p[(i, j)] = y[(i, j)] - y[(i, p)] * y[(p, j)] / y_jj;
            }
        }
        // S = (y0·I + Y)⁻¹ (y0·I - Y)
        let y0 = Complex64::new(1.0 / self.z0, 0.0);
        let eye = DMatrix::<Complex64>::identity(p, p);
        let lhs = &eye * y0 + &y_p;
        let rhs = &eye * y0 - &y_p;
        let s = lhs
            .lu()
            .solve(&rhs)
            .ok_or(Error::EvaluationSingularity { f_hz: f.hz() })?;
        ResponseMatrix::new(s)
    }
}

fn abcd_to_s(abcd: [Complex64; 4], z0: f64) -> ResponseMatrix {
    let [a, b, c, d] = abcd;
    let b_n = b / z0;
    let c_n = c * z0;
    let den = a + b_n + c_n + d;
    let s11 = (a + b_n - c_n - d) / den;
    let s12 = (a * d - b * c) * 2.0 / den;
    let s21 = Complex64::new(2.0, 0.0) / den;
    let s22 = (-a + b_n - c_n + d) / den;
    ResponseMatrix::new(DMatrix::from_row_slice(2, 2, &[s11, s12, s21, s22]))
        .expect("2x2 by construction")
}

impl SolverOracle for TlNetworkOracle {
    fn ports(&self) -> usize {
        self.topology.ports()
    }

    fn band(&self) -> (Frequency, Frequency) {
        self.band
    }

    fn query(&self, f: Frequency) -> Result<ResponseMatrix> {
        check_band(f, self.band)?;
        self.counter.bump();
        self.response(f)
    }

    fn call_count(&self) -> usize {
        self.counter.get()
    }
}

// ---------------------------------------------------------------------------
// Tabulated data replay
// ---------------------------------------------------------------------------

/// Replays a [`SampleSet`] as the solver truth.
///
/// Strict mode serves only stored frequencies and reports off-grid queries;
/// lenient mode interpolates linearly between neighbours and counts those
/// responses as inexact.
pub struct TabulatedOracle {
    data: SampleSet,
    strict: bool,
    counter: CallCounter,
    inexact: AtomicUsize,
}

pub fn tabulated_oracle(data: SampleSet, strict: bool) -> Result<TabulatedOracle> {
    if data.is_empty() {
        return Err(Error::InvalidInput("tabulated oracle needs data".into()));
    }
    Ok(TabulatedOracle {
        data,
        strict,
        counter: CallCounter::default(),
        inexact: AtomicUsize::new(0),
    })
}

impl TabulatedOracle {
    /// Number of lenient queries answered by interpolation rather than a
    /// stored sample.
    pub fn inexact_count(&self) -> usize {
        self.inexact.load(Ordering::Relaxed)
    }

    fn lookup(&self, f: Frequency) -> Result<ResponseMatrix> {
        let samples = self.data.samples();
        let hz = f.hz();
        let pos = samples.partition_point(|(fi, _)| fi.hz() < hz);
        // exact hit (bit-exact or within 1e-12 relative)
        for idx in [pos.wrapping_sub(1), pos] {
            if let Some((fi, m)) = samples.get(idx) {
                if fi.hz() == hz || (fi.hz() - hz).abs() <= 1e-12 * hz {
                    return Ok(m.clone());
                }
            }
        }
        let below = pos.checked_sub(1).map(|i| samples[i].0.hz());
        let above = samples.get(pos).map(|s| s.0.hz());
        if self.strict {
            return Err(Error::OffGrid {
                requested_hz: hz,
                below_hz: below,
                above_hz: above,
            });
        }
        match (pos.checked_sub(1), samples.get(pos)) {
            (Some(lo), Some((f_hi, m_hi))) => {
                let (f_lo, m_lo) = &samples[lo];
                let t = (hz - f_lo.hz()) / (f_hi.hz() - f_lo.hz());
                self.inexact.fetch_add(1, Ordering::Relaxed);
                let blend = m_lo.matrix() * Complex64::new(1.0 - t, 0.0)
                    + m_hi.matrix() * Complex64::new(t, 0.0);
                ResponseMatrix::new(blend)
            }
            _ => Err(Error::OffGrid {
                requested_hz: hz,
                below_hz: below,
                above_hz: above,
            }),
        }
    }
}

impl SolverOracle for TabulatedOracle {
    fn ports(&self) -> usize {
        self.data.ports()
    }

    fn band(&self) -> (Frequency, Frequency) {
        let samples = self.data.samples();
        (samples[0].0, samples[samples.len() - 1].0)
    }

    fn query(&self, f: Frequency) -> Result<ResponseMatrix> {
        self.counter.bump();
        self.lookup(f)
    }

    fn call_count(&self) -> usize {
        self.counter.get()
    }
}

// ---------------------------------------------------------------------------
// Frequency scaling
// ---------------------------------------------------------------------------

/// Maps an engineering-unit band onto an oracle living in another frame,
/// e.g. GHz sweeps against the normalized analytic circuits.
pub struct ScaledOracle<O> {
    inner: O,
    factor: f64,
}

impl<O: SolverOracle> ScaledOracle<O> {
    /// Queries at `f` are served by the inner oracle at `f * factor`.
    pub fn new(inner: O, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scale factor must be positive and finite, got {factor}"
            )));
        }
        Ok(ScaledOracle { inner, factor })
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SolverOracle> SolverOracle for ScaledOracle<O> {
    fn ports(&self) -> usize {
        self.inner.ports()
    }

    fn band(&self) -> (Frequency, Frequency) {
        let (lo, hi) = self.inner.band();
        (
            Frequency::new(lo.hz() / self.factor).expect("positive"),
            Frequency::new(hi.hz() / self.factor).expect("positive"),
        )
    }

    fn query(&self, f: Frequency) -> Result<ResponseMatrix> {
        self.inner.query(Frequency::new(f.hz() * self.factor)?)
    }

    fn call_count(&self) -> usize {
        self.inner.call_count()
    }

    fn reentrant(&self) -> bool {
        self.inner.reentrant()
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Canonical benchmark networks (normalized frame unless noted).
pub mod presets {
    use super::*;

    /// Ladder prototype coefficients shared by the two seventh-order filters
    /// (0.5 dB-ripple lowpass values).
    const G7: [f64; 7] = [1.7372, 1.2583, 2.6381, 1.3444, 2.6381, 1.2583, 1.7372];

    fn band(lo: f64, hi: f64) -> (Frequency, Frequency) {
        (Frequency::new(lo).unwrap(), Frequency::new(hi).unwrap())
    }

    /// Seventh-order step-impedance lowpass: seven alternating 20 Ω / 120 Ω
    /// line sections, cutoff near 0.30 in the normalized frame. Oscillatory
    /// passband, flat reflective stopband.
    pub fn step_lpf7() -> TlNetworkOracle {
        let fc = 0.30;
        let f_ref = Frequency::new(1.0).unwrap();
        let (zh, zl) = (120.0, 20.0);
        let mut els = Vec::new();
        for (k, &g) in G7.iter().enumerate() {
            let (z, theta) = if k % 2 == 0 {
                (zl, g * zl / DEFAULT_Z0)
            } else {
                (zh, g * DEFAULT_Z0 / zh)
            };
            els.push(TlElement::Line(TlSegment::lossless(
                z,
                theta / (2.0 * std::f64::consts::PI * fc),
                f_ref,
            )));
        }
        tl_network(TlTopology::Chain(els), band(0.05, 1.0)).expect("valid preset")
    }

    /// Exact seventh-order lumped LC ladder lowpass, cutoff 0.45 in the
    /// normalized frame. Rational of McMillan degree 7.
    pub fn ladder7() -> TlNetworkOracle {
        let wc = 2.0 * std::f64::consts::PI * 0.45;
        let mut els = Vec::new();
        for (k, &g) in G7.iter().enumerate() {
            if k % 2 == 0 {
                els.push(TlElement::ShuntCapacitor {
                    farads: g / (DEFAULT_Z0 * wc),
                });
            } else {
                els.push(TlElement::SeriesInductor {
                    henries: g * DEFAULT_Z0 / wc,
                });
            }
        }
        tl_network(TlTopology::Chain(els), band(0.05, 1.0)).expect("valid preset")
    }

    /// Ten-port star of electrically short lossy lines over 1–15 GHz.
    pub fn star10() -> TlNetworkOracle {
        tl_network(star10_topology(), band(1e9, 15e9)).expect("valid preset")
    }

    /// Branch parameters behind [`star10`], also usable with other bands.
    pub fn star10_topology() -> TlTopology {
        // fixed, hand-spread parameters: impedance, electrical length at
        // 1 GHz, loss in nepers
        const BRANCHES: [(f64, f64, f64); 10] = [
            (42.0, 0.0312, 0.004),
            (68.0, 0.0460, 0.011),
            (35.5, 0.0271, 0.006),
            (81.0, 0.0389, 0.016),
            (57.0, 0.0497, 0.003),
            (47.5, 0.0335, 0.013),
            (74.0, 0.0428, 0.008),
            (38.0, 0.0296, 0.018),
            (63.0, 0.0373, 0.005),
            (52.0, 0.0441, 0.010),
        ];
        let f_ref = Frequency::new(1e9).unwrap();
        TlTopology::Star(
            BRANCHES
                .iter()
                .map(|&(z0, elen, loss)| {
                    vec![TlElement::Line(TlSegment {
                        z0,
                        electrical_length: elen,
                        f_ref,
                        loss,
                    })]
                })
                .collect(),
        )
    }

    /// The quarter-wave transformer rebuilt from an ABCD line section and a
    /// 100 Ω termination; cross-validates [`qwt_impedance`].
    pub fn qwt_tl_equivalent() -> TlNetworkOracle {
        let seg = TlSegment::lossless(70.7, 0.25, Frequency::new(1.0).unwrap());
        tl_network(
            TlTopology::Terminated {
                elements: vec![TlElement::Line(seg)],
                load_ohms: 100.0,
            },
            band(0.01, 2.5),
        )
        .expect("valid preset")
    }
}
