//! Shared domain types: frequencies, response matrices, sample sets.
//!
//! All frequencies are stored in hertz; complex frequencies s = j2πf are
//! derived on demand so that factor-of-2π mistakes cannot creep in between
//! modules.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// A strictly positive physical frequency in hertz.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(hz: f64) -> Result<Self> {
        if !hz.is_finite() || hz <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "frequency must be finite and > 0, got {hz}"
            )));
        }
        Ok(Frequency(hz))
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    /// s = j2πf on the positive imaginary axis.
    pub fn to_complex(self) -> ComplexFrequency {
        ComplexFrequency::from_angular(2.0 * std::f64::consts::PI * self.0)
    }

    /// Shifted copy; used for the perturbed evaluation point s' = j2π(f + δf).
    pub fn shifted(self, delta_hz: f64) -> Result<Self> {
        Frequency::new(self.0 + delta_hz)
    }
}

/// A purely imaginary complex frequency s = ±j·ω (rad/s).
///
/// The real part is exactly zero by construction; conjugates (negative
/// imaginary part) are allowed and appear through conjugate expansion of
/// sampled data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexFrequency(Complex64);

impl ComplexFrequency {
    pub fn from_frequency(f: Frequency) -> Self {
        f.to_complex()
    }

    /// Builds ±jω directly from an angular rate in rad/s.
    pub fn from_angular(omega: f64) -> Self {
        ComplexFrequency(Complex64::new(0.0, omega))
    }

    pub fn conjugate(self) -> Self {
        ComplexFrequency(self.0.conj())
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn omega(self) -> f64 {
        self.0.im
    }
}

/// A square p×p complex response matrix (S, Y or Z parameters at one frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix(DMatrix<Complex64>);

impl ResponseMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "response matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(ResponseMatrix(m))
    }

    /// 1×1 matrix holding a single scalar response.
    pub fn from_scalar(v: Complex64) -> Self {
        ResponseMatrix(DMatrix::from_element(1, 1, v))
    }

    pub fn zeros(ports: usize) -> Self {
        ResponseMatrix(DMatrix::zeros(ports, ports))
    }

    pub fn identity(ports: usize) -> Self {
        ResponseMatrix(DMatrix::identity(ports, ports))
    }

    /// All-ones matrix, the default additive shift of the sweep loop.
    pub fn ones(ports: usize) -> Self {
        ResponseMatrix(DMatrix::from_element(ports, ports, Complex64::new(1.0, 0.0)))
    }

    pub fn ports(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// Elementwise complex conjugate, paired with conjugated frequencies.
    pub fn conjugated(&self) -> Self {
        ResponseMatrix(self.0.map(|v| v.conj()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl std::ops::Sub for &ResponseMatrix {
    type Output = ResponseMatrix;
    fn sub(self, rhs: &ResponseMatrix) -> ResponseMatrix {
        ResponseMatrix(&self.0 - &rhs.0)
    }
}

impl std::ops::Add for &ResponseMatrix {
    type Output = ResponseMatrix;
    fn add(self, rhs: &ResponseMatrix) -> ResponseMatrix {
        ResponseMatrix(&self.0 + &rhs.0)
    }
}

/// Ordered frequency-response samples with a fixed port count.
///
/// Frequencies are strictly increasing; every matrix is p×p.
#[derive(Debug, Clone)]
pub struct SampleSet {
    ports: usize,
    samples: Vec<(Frequency, ResponseMatrix)>,
}

impl SampleSet {
    pub fn new(ports: usize, samples: Vec<(Frequency, ResponseMatrix)>) -> Result<Self> {
        if ports == 0 {
            return Err(Error::InvalidInput("port count must be >= 1".into()));
        }
        for (f, m) in &samples {
            if m.ports() != ports {
                return Err(Error::InvalidInput(format!(
                    "matrix at {} Hz is {}x{}, expected {ports}x{ports}",
                    f.hz(),
                    m.ports(),
                    m.ports()
                )));
            }
        }
        for w in samples.windows(2) {
            if w[1].0.hz() <= w[0].0.hz() {
                return Err(Error::InvalidInput(format!(
                    "frequencies must be strictly increasing: {} Hz then {} Hz",
                    w[0].0.hz(),
                    w[1].0.hz()
                )));
            }
        }
        Ok(SampleSet { ports, samples })
    }

    pub fn empty(ports: usize) -> Result<Self> {
        SampleSet::new(ports, Vec::new())
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(Frequency, ResponseMatrix)] {
        &self.samples
    }

    pub fn frequencies(&self) -> impl Iterator<Item = Frequency> + '_ {
        self.samples.iter().map(|(f, _)| *f)
    }

    pub fn matrices(&self) -> impl Iterator<Item = &ResponseMatrix> {
        self.samples.iter().map(|(_, m)| m)
    }

    pub fn get(&self, index: usize) -> Option<&(Frequency, ResponseMatrix)> {
        self.samples.get(index)
    }

    pub fn contains_frequency(&self, f: Frequency) -> bool {
        self.samples.iter().any(|(fi, _)| fi.hz() == f.hz())
    }

    /// Inserts keeping ascending order; duplicate frequencies are rejected.
    pub fn insert_sorted(&mut self, f: Frequency, m: ResponseMatrix) -> Result<()> {
        if m.ports() != self.ports {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected {}x{}",
                m.ports(),
                m.ports(),
                self.ports,
                self.ports
            )));
        }
        match self
            .samples
            .binary_search_by(|(fi, _)| fi.hz().partial_cmp(&f.hz()).unwrap())
        {
            Ok(_) => Err(Error::InvalidInput(format!(
                "duplicate sample frequency {} Hz",
                f.hz()
            ))),
            Err(pos) => {
                self.samples.insert(pos, (f, m));
                Ok(())
            }
        }
    }
}

/// One row of the adaptive-sweep trace.
///
/// `memory_counter` mirrors the loop's memory variable: it increments when
/// `actual_error <= tol` and resets to 0 otherwise, so a converged run ends
/// with the last `memory_target` rows counting 1..=memory_target.
#[derive(Debug, Clone, Copy)]
pub struct ErrorTracePoint {
    pub iteration: usize,
    pub f_new: Frequency,
    pub pseudo_error: f64,
    pub actual_error: f64,
    /// Orders (r1, r2) of the two competing models at this iteration.
    pub model_order: (usize, usize),
    pub memory_counter: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_rejects_zero_and_negative() {
        assert!(Frequency::new(0.0).is_err());
        assert!(Frequency::new(-1.0).is_err());
        assert!(Frequency::new(f64::NAN).is_err());
        assert!(Frequency::new(1e9).is_ok());
    }

    #[test]
    fn complex_frequency_is_purely_imaginary() {
        let f = Frequency::new(2.0).unwrap();
        let s = f.to_complex();
        assert_eq!(s.value().re, 0.0);
        assert!((s.omega() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        let c = s.conjugate();
        assert_eq!(c.value().re, 0.0);
        assert_eq!(c.omega(), -s.omega());
    }

    #[test]
    fn sample_set_requires_strictly_increasing_frequencies() {
        let m = ResponseMatrix::identity(1);
        let f1 = Frequency::new(1.0).unwrap();
        let f2 = Frequency::new(2.0).unwrap();
        assert!(SampleSet::new(1, vec![(f1, m.clone()), (f2, m.clone())]).is_ok());
        assert!(SampleSet::new(1, vec![(f2, m.clone()), (f1, m.clone())]).is_err());
        assert!(SampleSet::new(1, vec![(f1, m.clone()), (f1, m)]).is_err());
    }

    #[test]
    fn sample_set_rejects_mismatched_ports() {
        let f1 = Frequency::new(1.0).unwrap();
        assert!(SampleSet::new(2, vec![(f1, ResponseMatrix::identity(1))]).is_err());
    }

    #[test]
    fn insert_sorted_keeps_order_and_rejects_duplicates() {
        let m = ResponseMatrix::identity(1);
        let mut set = SampleSet::empty(1).unwrap();
        for hz in [3.0, 1.0, 2.0] {
            set.insert_sorted(Frequency::new(hz).unwrap(), m.clone())
                .unwrap();
        }
        let fs: Vec<f64> = set.frequencies().map(|f| f.hz()).collect();
        assert_eq!(fs, vec![1.0, 2.0, 3.0]);
        assert!(set
            .insert_sorted(Frequency::new(2.0).unwrap(), m)
            .is_err());
    }
}
