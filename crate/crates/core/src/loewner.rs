//! Loewner and shifted-Loewner pencils, SVD order reduction, and state-model
//! evaluation.
//!
//! Sampled data is conjugate-expanded and split into an a-set and a b-set;
//! the divided differences of the two sets form the Loewner matrix 𝕃 and the
//! shifted Loewner matrix σ𝕃. The state model
//!
//! ```text
//! E = -𝕃,  A = -σ𝕃,  B = stacked H_b,  C = concatenated H_a
//! ```
//!
//! interpolates the data exactly: H(s) = C (sE - A)⁻¹ B. Redundant order is
//! removed by an SVD of the pencil x𝕃 - σ𝕃 at an expansion point x taken
//! from the sample set.

use crate::error::{Error, Result};
use crate::metrics::spectral_norm_raw;
use crate::types::{ComplexFrequency, Frequency, ResponseMatrix, SampleSet};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Frequency nudge applied when a resolvent solve hits an exact singularity.
const EVAL_RETRY_DELTA_HZ: f64 = 1e-5;

/// Relative floor below which trailing singular values count as zero.
const SV_NOISE_FLOOR: f64 = 1e-14;

/// Retained-spectrum condition limit above which an expansion point is retried.
const PENCIL_CONDITION_LIMIT: f64 = 1e15;

/// Conjugate-expanded sample data split into disjoint a- and b-sets.
///
/// Each side holds n entries for a source set of n samples; the union of the
/// two sides is exactly {s_j, conj(s_j)} over the source, and conjugated
/// frequencies carry elementwise-conjugated matrices.
#[derive(Debug, Clone)]
pub struct PartitionedData {
    ports: usize,
    s_a: Vec<ComplexFrequency>,
    h_a: Vec<ResponseMatrix>,
    s_b: Vec<ComplexFrequency>,
    h_b: Vec<ResponseMatrix>,
}

impl PartitionedData {
    pub fn ports(&self) -> usize {
        self.ports
    }

    /// Entries per side (equals the source sample count).
    pub fn len(&self) -> usize {
        self.s_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s_a.is_empty()
    }

    pub fn s_a(&self) -> &[ComplexFrequency] {
        &self.s_a
    }

    pub fn s_b(&self) -> &[ComplexFrequency] {
        &self.s_b
    }

    pub fn h_a(&self) -> &[ResponseMatrix] {
        &self.h_a
    }

    pub fn h_b(&self) -> &[ResponseMatrix] {
        &self.h_b
    }

    fn check_disjoint(&self) -> Result<()> {
        for (j, sa) in self.s_a.iter().enumerate() {
            for (i, sb) in self.s_b.iter().enumerate() {
                if sa.value() == sb.value() {
                    return Err(Error::SingularDenominator {
                        a_index: j,
                        b_index: i,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Even-odd partitioning with conjugate expansion.
///
/// Odd-indexed samples (1st, 3rd, ...) and their conjugates land in the
/// b-set, even-indexed ones in the a-set. For odd n the last sample itself
/// goes to the b-set and its conjugate to the a-set, which keeps the two
/// sides disjoint.
pub fn partition_even_odd(data: &SampleSet) -> Result<PartitionedData> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let samples = data.samples();
    let mut s_a = Vec::with_capacity(n);
    let mut h_a = Vec::with_capacity(n);
    let mut s_b = Vec::with_capacity(n);
    let mut h_b = Vec::with_capacity(n);

    let push_pair = |s_list: &mut Vec<ComplexFrequency>,
                         h_list: &mut Vec<ResponseMatrix>,
                         f: Frequency,
                         m: &ResponseMatrix| {
        let s = f.to_complex();
        s_list.push(s);
        h_list.push(m.clone());
        s_list.push(s.conjugate());
        h_list.push(m.conjugated());
    };

    let pairs = if n % 2 == 0 { n } else { n - 1 };
    for (idx, (f, m)) in samples.iter().take(pairs).enumerate() {
        if idx % 2 == 0 {
            push_pair(&mut s_b, &mut h_b, *f, m);
        } else {
            push_pair(&mut s_a, &mut h_a, *f, m);
        }
    }
    if n % 2 == 1 {
        let (f, m) = &samples[n - 1];
        let s = f.to_complex();
        s_b.push(s);
        h_b.push(m.clone());
        s_a.push(s.conjugate());
        h_a.push(m.conjugated());
    }

    let part = PartitionedData {
        ports: data.ports(),
        s_a,
        h_a,
        s_b,
        h_b,
    };
    part.check_disjoint()?;
    Ok(part)
}

/// Positive-negative partitioning: positive frequencies in the b-set, their
/// conjugates in the a-set.
pub fn partition_positive_negative(data: &SampleSet) -> Result<PartitionedData> {
    let n = data.len();
    if n < 1 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut s_a = Vec::with_capacity(n);
    let mut h_a = Vec::with_capacity(n);
    let mut s_b = Vec::with_capacity(n);
    let mut h_b = Vec::with_capacity(n);
    for (f, m) in data.samples() {
        let s = f.to_complex();
        s_b.push(s);
        h_b.push(m.clone());
        s_a.push(s.conjugate());
        h_a.push(m.conjugated());
    }
    let part = PartitionedData {
        ports: data.ports(),
        s_a,
        h_a,
        s_b,
        h_b,
    };
    part.check_disjoint()?;
    Ok(part)
}

/// Full-order Loewner state model (E, A, B, C) plus the stored additive shift D.
#[derive(Debug, Clone)]
pub struct StateModel {
    e: DMatrix<Complex64>,
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    c: DMatrix<Complex64>,
    d: ResponseMatrix,
    ports: usize,
    /// Expansion-point candidates for the reduction SVD: a-set then b-set.
    candidates: Vec<ComplexFrequency>,
}

impl StateModel {
    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn e(&self) -> &DMatrix<Complex64> {
        &self.e
    }

    pub fn a(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<Complex64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<Complex64> {
        &self.c
    }

    pub fn d(&self) -> &ResponseMatrix {
        &self.d
    }

    /// 2-norm condition numbers of 𝕃 and σ𝕃 (+∞ for exactly singular).
    pub fn condition_diagnostics(&self) -> (f64, f64) {
        (condition_number(&self.e), condition_number(&self.a))
    }

    /// Reduces at the given expansion point; no retry.
    ///
    /// The retained part of the pencil spectrum (after the relative noise
    /// floor) must be well conditioned, otherwise the point is rejected.
    pub fn reduce_at(&self, q: u32, x: ComplexFrequency) -> Result<ReducedModel> {
        validate_q(q)?;
        let n = self.dim();
        // pencil x𝕃 - σ𝕃 expressed through E = -𝕃, A = -σ𝕃
        let pencil = &self.a - &(&self.e * x.value());
        let svd = pencil.clone().svd(true, true);
        let sv = &svd.singular_values;
        let s_max = sv.iter().fold(0.0f64, |m, &v| m.max(v));

        if s_max == 0.0 {
            // identically zero pencil: the data is the constant D shift
            return Ok(ReducedModel {
                e_r: DMatrix::zeros(0, 0),
                a_r: DMatrix::zeros(0, 0),
                b_r: DMatrix::zeros(0, self.ports),
                c_r: DMatrix::zeros(self.ports, 0),
                d: self.d.clone(),
                r: 0,
                q,
                singular_values: vec![0.0; n],
                ports: self.ports,
            });
        }

        let floored: Vec<f64> = sv
            .iter()
            .map(|&v| if v < SV_NOISE_FLOOR * s_max { 0.0 } else { v })
            .collect();
        let total: f64 = floored.iter().sum();
        let threshold = 1.0 - 10f64.powi(-(q as i32));
        let mut r = floored.len();
        let mut acc = 0.0;
        for (i, &v) in floored.iter().enumerate() {
            acc += v;
            if acc / total > threshold {
                r = i + 1;
                break;
            }
        }

        // effective condition of the retained spectrum
        let s_min_kept = floored[r - 1];
        if s_min_kept <= 0.0 || s_max / s_min_kept > PENCIL_CONDITION_LIMIT {
            return Err(Error::NoValidExpansionPoint);
        }

        let u = svd
            .u
            .as_ref()
            .ok_or_else(|| Error::Numerical("SVD did not return U".into()))?;
        let v_t = svd
            .v_t
            .as_ref()
            .ok_or_else(|| Error::Numerical("SVD did not return V^H".into()))?;
        let y = u.columns(0, r).clone_owned();
        let x_mat = v_t.rows(0, r).adjoint();
        let y_h = y.adjoint();

        Ok(ReducedModel {
            e_r: &y_h * &self.e * &x_mat,
            a_r: &y_h * &self.a * &x_mat,
            b_r: &y_h * &self.b,
            c_r: &self.c * &x_mat,
            d: self.d.clone(),
            r,
            q,
            singular_values: sv.iter().copied().collect(),
            ports: self.ports,
        })
    }

    /// Reduces trying expansion points from the a-set then the b-set until
    /// one yields a usable pencil.
    pub fn reduce(&self, q: u32) -> Result<ReducedModel> {
        validate_q(q)?;
        for &x in &self.candidates {
            match self.reduce_at(q, x) {
                Ok(model) => return Ok(model),
                Err(Error::NoValidExpansionPoint) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::NoValidExpansionPoint)
    }
}

fn validate_q(q: u32) -> Result<()> {
    if !(6..=12).contains(&q) {
        return Err(Error::InvalidInput(format!(
            "reduction exponent q must lie in 6..=12, got {q}"
        )));
    }
    Ok(())
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().singular_values();
    let s_max = sv.iter().fold(0.0f64, |acc, &v| acc.max(v));
    let s_min = sv.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    if s_max == 0.0 || s_min == 0.0 {
        f64::INFINITY
    } else {
        s_max / s_min
    }
}

/// Builds the matrix-format (block) Loewner state model.
///
/// Block (i, j) of 𝕃 is (H_aj − H_bi)/(s_aj − s_bi) and of σ𝕃 is
/// (s_aj·H_aj − s_bi·H_bi)/(s_aj − s_bi); the model dimension is n·p. The
/// shift `d` is subtracted from every partition matrix before assembly and
/// stored for re-addition at evaluation time.
pub fn build_mfti(part: &PartitionedData, d: &ResponseMatrix) -> Result<StateModel> {
    let p = part.ports();
    check_shift(d, p)?;
    let n = part.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let h_a: Vec<DMatrix<Complex64>> = part.h_a.iter().map(|h| h.matrix() - d.matrix()).collect();
    let h_b: Vec<DMatrix<Complex64>> = part.h_b.iter().map(|h| h.matrix() - d.matrix()).collect();

    let dim = n * p;
    let mut l = DMatrix::<Complex64>::zeros(dim, dim);
    let mut sl = DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..n {
        let s_bi = part.s_b[i].value();
        for j in 0..n {
            let s_aj = part.s_a[j].value();
            let den = s_aj - s_bi;
            if den == Complex64::new(0.0, 0.0) {
                return Err(Error::SingularDenominator {
                    a_index: j,
                    b_index: i,
                });
            }
            let diff = &h_a[j] - &h_b[i];
            let shifted = &h_a[j] * s_aj - &h_b[i] * s_bi;
            for r in 0..p {
                for c in 0..p {
                    l[(i * p + r, j * p + c)] = diff[(r, c)] / den;
                    sl[(i * p + r, j * p + c)] = shifted[(r, c)] / den;
                }
            }
        }
    }

    let mut b = DMatrix::<Complex64>::zeros(dim, p);
    let mut c = DMatrix::<Complex64>::zeros(p, dim);
    for i in 0..n {
        b.view_mut((i * p, 0), (p, p)).copy_from(&h_b[i]);
        c.view_mut((0, i * p), (p, p)).copy_from(&h_a[i]);
    }

    Ok(StateModel {
        e: -l,
        a: -sl,
        b,
        c,
        d: d.clone(),
        ports: p,
        candidates: part.s_a.iter().chain(part.s_b.iter()).copied().collect(),
    })
}

/// Builds the vector-format (tangential) Loewner state model.
///
/// Directions cycle through the identity columns, e_m with
/// m = ((i−1) mod p) + 1; the model dimension is n. For p = 1 this collapses
/// to the same model as [`build_mfti`].
pub fn build_vfti(part: &PartitionedData, d: &ResponseMatrix) -> Result<StateModel> {
    let p = part.ports();
    check_shift(d, p)?;
    let n = part.len();
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let h_a: Vec<DMatrix<Complex64>> = part.h_a.iter().map(|h| h.matrix() - d.matrix()).collect();
    let h_b: Vec<DMatrix<Complex64>> = part.h_b.iter().map(|h| h.matrix() - d.matrix()).collect();

    let mut l = DMatrix::<Complex64>::zeros(n, n);
    let mut sl = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let s_bi = part.s_b[i].value();
        for j in 0..n {
            let s_aj = part.s_a[j].value();
            let den = s_aj - s_bi;
            if den == Complex64::new(0.0, 0.0) {
                return Err(Error::SingularDenominator {
                    a_index: j,
                    b_index: i,
                });
            }
            // l_i H_aj r_j and l_i H_bi r_j
            let la = h_a[j][(i % p, j % p)];
            let lb = h_b[i][(i % p, j % p)];
            l[(i, j)] = (la - lb) / den;
            sl[(i, j)] = (s_aj * la - s_bi * lb) / den;
        }
    }

    // v_i = l_i H_bi (row of H_bi), w_j = H_aj r_j (column of H_aj)
    let mut b = DMatrix::<Complex64>::zeros(n, p);
    let mut c = DMatrix::<Complex64>::zeros(p, n);
    for i in 0..n {
        b.row_mut(i).copy_from(&h_b[i].row(i % p));
        c.column_mut(i).copy_from(&h_a[i].column(i % p));
    }

    Ok(StateModel {
        e: -l,
        a: -sl,
        b,
        c,
        d: d.clone(),
        ports: p,
        candidates: part.s_a.iter().chain(part.s_b.iter()).copied().collect(),
    })
}

fn check_shift(d: &ResponseMatrix, ports: usize) -> Result<()> {
    if d.ports() != ports {
        return Err(Error::InvalidInput(format!(
            "shift matrix is {}x{}, data has {} ports",
            d.ports(),
            d.ports(),
            ports
        )));
    }
    Ok(())
}

/// SVD-truncated state model; evaluation solves the r×r resolvent system.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    e_r: DMatrix<Complex64>,
    a_r: DMatrix<Complex64>,
    b_r: DMatrix<Complex64>,
    c_r: DMatrix<Complex64>,
    d: ResponseMatrix,
    r: usize,
    q: u32,
    singular_values: Vec<f64>,
    ports: usize,
}

impl ReducedModel {
    pub fn order(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    /// Full pencil spectrum retained for diagnostics, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn d(&self) -> &ResponseMatrix {
        &self.d
    }

    /// Evaluates Ĥ(s) = Ĉ_r (sÊ_r − Â_r)⁻¹ B̂_r + D at s = j2πf.
    ///
    /// The resolvent is solved, never inverted. An exactly singular solve is
    /// retried once at f + 1e-5 Hz before reporting an evaluation
    /// singularity.
    pub fn evaluate(&self, f: Frequency) -> Result<ResponseMatrix> {
        match self.evaluate_at_s(f.to_complex()) {
            Some(m) => Ok(m),
            None => {
                let nudged = f
                    .shifted(EVAL_RETRY_DELTA_HZ)
                    .map_err(|_| Error::EvaluationSingularity { f_hz: f.hz() })?;
                self.evaluate_at_s(nudged.to_complex())
                    .ok_or(Error::EvaluationSingularity { f_hz: f.hz() })
            }
        }
    }

    fn evaluate_at_s(&self, s: ComplexFrequency) -> Option<ResponseMatrix> {
        if self.r == 0 {
            return Some(self.d.clone());
        }
        let resolvent = &self.e_r * s.value() - &self.a_r;
        let x = resolvent.lu().solve(&self.b_r)?;
        let h = &self.c_r * x + self.d.matrix();
        if h.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Some(ResponseMatrix::new(h).expect("square by construction"))
        } else {
            None
        }
    }
}

#[allow(dead_code)]
pub(crate) fn spectral_norm_of(m: &DMatrix<Complex64>) -> f64 {
    spectral_norm_raw(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn freq(hz: f64) -> Frequency {
        Frequency::new(hz).unwrap()
    }

    fn scalar_set(values: &[(f64, Complex64)]) -> SampleSet {
        SampleSet::new(
            1,
            values
                .iter()
                .map(|&(f, v)| (freq(f), ResponseMatrix::from_scalar(v)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn even_odd_partition_for_even_n() {
        let set = scalar_set(&[
            (1.0, c(1.0, 0.0)),
            (2.0, c(2.0, 0.0)),
            (3.0, c(3.0, 0.0)),
            (4.0, c(4.0, 0.0)),
        ]);
        let part = partition_even_odd(&set).unwrap();
        let omegas_b: Vec<f64> = part.s_b().iter().map(|s| s.omega()).collect();
        let omegas_a: Vec<f64> = part.s_a().iter().map(|s| s.omega()).collect();
        let w = |f: f64| 2.0 * std::f64::consts::PI * f;
        assert_eq!(omegas_b, vec![w(1.0), -w(1.0), w(3.0), -w(3.0)]);
        assert_eq!(omegas_a, vec![w(2.0), -w(2.0), w(4.0), -w(4.0)]);
        // conjugated frequencies carry conjugated matrices
        assert_eq!(part.h_b()[1].entry(0, 0), c(1.0, -0.0));
    }

    #[test]
    fn even_odd_partition_for_n2_and_n3() {
        let set = scalar_set(&[(1.0, c(1.0, 1.0)), (2.0, c(2.0, 2.0))]);
        let part = partition_even_odd(&set).unwrap();
        assert_eq!(part.len(), 2);
        let w = |f: f64| 2.0 * std::f64::consts::PI * f;
        assert_eq!(
            part.s_b().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![w(1.0), -w(1.0)]
        );
        assert_eq!(
            part.s_a().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![w(2.0), -w(2.0)]
        );

        let set3 = scalar_set(&[(1.0, c(1.0, 1.0)), (2.0, c(2.0, 2.0)), (3.0, c(3.0, 3.0))]);
        let part3 = partition_even_odd(&set3).unwrap();
        assert_eq!(
            part3.s_b().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![w(1.0), -w(1.0), w(3.0)]
        );
        assert_eq!(
            part3.s_a().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![w(2.0), -w(2.0), -w(3.0)]
        );
        // the conjugate of the last sample carries the conjugated matrix
        assert_eq!(part3.h_a()[2].entry(0, 0), c(3.0, -3.0));
        // all Loewner denominators are nonzero
        assert!(build_mfti(&part3, &ResponseMatrix::zeros(1)).is_ok());
    }

    #[test]
    fn even_odd_rejects_single_sample() {
        let set = scalar_set(&[(1.0, c(1.0, 0.0))]);
        assert!(matches!(
            partition_even_odd(&set),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn positive_negative_partition() {
        let set = scalar_set(&[(1.0, c(1.0, 2.0))]);
        let part = partition_positive_negative(&set).unwrap();
        let w = 2.0 * std::f64::consts::PI;
        assert_eq!(part.s_b()[0].omega(), w);
        assert_eq!(part.s_a()[0].omega(), -w);
        assert_eq!(part.h_a()[0].entry(0, 0), c(1.0, -2.0));

        let set2 = scalar_set(&[(1.0, c(1.0, 0.0)), (2.0, c(2.0, 0.0))]);
        let part2 = partition_positive_negative(&set2).unwrap();
        assert_eq!(
            part2.s_b().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![w, 2.0 * w]
        );
        assert_eq!(
            part2.s_a().iter().map(|s| s.omega()).collect::<Vec<_>>(),
            vec![-w, -2.0 * w]
        );
    }

    #[test]
    fn mfti_single_block_by_hand() {
        // s_a = [2j], H_a = [2]; s_b = [1j], H_b = [1]:
        // L = (2-1)/(2j-1j) = -j, sL = (2j*2 - 1j*1)/(1j) = 3, B = 1, C = 2
        let part = PartitionedData {
            ports: 1,
            s_a: vec![ComplexFrequency::from_angular(2.0)],
            h_a: vec![ResponseMatrix::from_scalar(c(2.0, 0.0))],
            s_b: vec![ComplexFrequency::from_angular(1.0)],
            h_b: vec![ResponseMatrix::from_scalar(c(1.0, 0.0))],
        };
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        // E = -L = j, A = -sL = -3
        assert_relative_eq!(model.e()[(0, 0)].im, 1.0, epsilon = 1e-15);
        assert_relative_eq!(model.e()[(0, 0)].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(model.a()[(0, 0)].re, -3.0, epsilon = 1e-15);
        assert_relative_eq!(model.a()[(0, 0)].im, 0.0, epsilon = 1e-15);
        assert_eq!(model.b()[(0, 0)], c(1.0, 0.0));
        assert_eq!(model.c()[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn mfti_constant_data_gives_zero_loewner() {
        let k = c(0.7, 0.0);
        let set = scalar_set(&[(1.0, k), (2.0, k), (3.0, k), (4.0, k)]);
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        assert!(model.e().iter().all(|v| v.norm() < 1e-15));
        // every block of σL equals the constant, so A = -σL has entries -k
        assert!(model.a().iter().all(|v| (v + k).norm() < 1e-12));
        let (cond_l, _) = model.condition_diagnostics();
        assert!(cond_l.is_infinite());
    }

    #[test]
    fn mfti_block_reconstruction_matches_definition() {
        // random-ish 2-port data at 3 frequencies; replay block (2,1)
        let p = 2;
        let mats: Vec<ResponseMatrix> = (0..3)
            .map(|k| {
                ResponseMatrix::new(DMatrix::from_fn(p, p, |i, j| {
                    c(
                        0.3 + k as f64 * 0.1 + i as f64 * 0.05,
                        0.1 * j as f64 - 0.02 * k as f64,
                    )
                }))
                .unwrap()
            })
            .collect();
        let set = SampleSet::new(
            p,
            vec![
                (freq(1.0), mats[0].clone()),
                (freq(2.0), mats[1].clone()),
                (freq(3.0), mats[2].clone()),
            ],
        )
        .unwrap();
        let part = partition_even_odd(&set).unwrap();
        let d = ResponseMatrix::zeros(p);
        let model = build_mfti(&part, &d).unwrap();
        let (i, j) = (2, 1);
        let den = part.s_a()[j].value() - part.s_b()[i].value();
        let expect =
            (part.h_a()[j].matrix() - part.h_b()[i].matrix()).map(|v| v / den);
        for r in 0..p {
            for cidx in 0..p {
                let got = -model.e()[(i * p + r, j * p + cidx)];
                assert_relative_eq!(got.re, expect[(r, cidx)].re, epsilon = 1e-14);
                assert_relative_eq!(got.im, expect[(r, cidx)].im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn vfti_equals_mfti_for_single_port() {
        let set = scalar_set(&[
            (1.0, c(1.0, 0.3)),
            (2.0, c(0.5, -0.2)),
            (3.0, c(-0.4, 0.8)),
        ]);
        let part = partition_even_odd(&set).unwrap();
        let d = ResponseMatrix::zeros(1);
        let m = build_mfti(&part, &d).unwrap();
        let v = build_vfti(&part, &d).unwrap();
        assert_eq!(m.dim(), v.dim());
        assert_relative_eq!((m.e() - v.e()).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((m.a() - v.a()).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((m.b() - v.b()).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((m.c() - v.c()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn vfti_direction_cycle_is_identity_columns() {
        // p=2, n=2 source samples -> 4 partition entries; directions cycle e1, e2
        let p = 2;
        let m0 = ResponseMatrix::new(DMatrix::from_fn(p, p, |i, j| {
            c((i + 1) as f64, (j + 1) as f64)
        }))
        .unwrap();
        let m1 = ResponseMatrix::new(DMatrix::from_fn(p, p, |i, j| {
            c((i * j) as f64 + 0.5, 0.25)
        }))
        .unwrap();
        let set = SampleSet::new(p, vec![(freq(1.0), m0.clone()), (freq(2.0), m1)]).unwrap();
        let part = partition_even_odd(&set).unwrap();
        let model = build_vfti(&part, &ResponseMatrix::zeros(p)).unwrap();
        // first C column is H_a0 e_1 (first column of H_a0)
        assert_eq!(model.c()[(0, 0)], part.h_a()[0].entry(0, 0));
        assert_eq!(model.c()[(1, 0)], part.h_a()[0].entry(1, 0));
        // second C column is H_a1 e_2 (second column of H_a1)
        assert_eq!(model.c()[(0, 1)], part.h_a()[1].entry(0, 1));
        // first B row is e_1^T H_b0 (first row of H_b0)
        assert_eq!(model.b()[(0, 0)], part.h_b()[0].entry(0, 0));
        assert_eq!(model.b()[(0, 1)], part.h_b()[0].entry(0, 1));
        // second B row is e_2^T H_b1
        assert_eq!(model.b()[(1, 0)], part.h_b()[1].entry(1, 0));
    }

    /// An order-1 rational H(s) = 1/(s+1) sampled redundantly must collapse
    /// to r = 1 and still interpolate.
    #[test]
    fn reduce_detects_rank_of_order_one_system() {
        let h = |f: f64| {
            let s = c(0.0, 2.0 * std::f64::consts::PI * f);
            (s + c(1.0, 0.0)).inv()
        };
        let set = scalar_set(&[(0.1, h(0.1)), (0.2, h(0.2)), (0.3, h(0.3)), (0.4, h(0.4))]);
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        let reduced = model.reduce(8).unwrap();
        assert_eq!(reduced.order(), 1);
        // interpolation property at a sample frequency
        let at = reduced.evaluate(freq(0.3)).unwrap();
        let expect = h(0.3);
        assert!((at.entry(0, 0) - expect).norm() / expect.norm() < 1e-10);
    }

    #[test]
    fn full_rank_reduction_reproduces_samples() {
        // order-3 data, q=12 keeps everything needed; nodes reproduce exactly
        let h = |f: f64| {
            let s = c(0.0, 2.0 * std::f64::consts::PI * f);
            (s * s + s * c(0.3, 0.0) + c(2.0, 0.0)) / (s * s * s + s * c(1.1, 0.0) + c(1.0, 0.0))
        };
        let fs = [0.11, 0.23, 0.37, 0.52];
        let set = scalar_set(&fs.map(|f| (f, h(f))));
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        let reduced = model.reduce(12).unwrap();
        for &f in &fs {
            let got = reduced.evaluate(freq(f)).unwrap().entry(0, 0);
            let expect = h(f);
            assert!(
                (got - expect).norm() / expect.norm() < 1e-9,
                "node {f}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn reduce_with_larger_q_never_truncates_harder() {
        let h = |f: f64| {
            let s = c(0.0, 2.0 * std::f64::consts::PI * f);
            (s + c(0.4, 0.0)).inv() + (s + c(2.5, 0.0)).inv() * c(0.7, 0.0)
        };
        let set = scalar_set(&[
            (0.1, h(0.1)),
            (0.2, h(0.2)),
            (0.3, h(0.3)),
            (0.45, h(0.45)),
            (0.6, h(0.6)),
        ]);
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        let r8 = model.reduce(8).unwrap().order();
        let r12 = model.reduce(12).unwrap().order();
        assert!(r12 >= r8, "q=12 gave r={r12} < q=8 r={r8}");
    }

    #[test]
    fn reduce_rejects_out_of_range_q() {
        let set = scalar_set(&[(1.0, c(1.0, 0.0)), (2.0, c(0.5, 0.0))]);
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::zeros(1)).unwrap();
        assert!(model.reduce(5).is_err());
        assert!(model.reduce(13).is_err());
    }

    #[test]
    fn condition_diagnostics_identity_like() {
        // hand-built model with L = identity
        let model = StateModel {
            e: -DMatrix::<Complex64>::identity(3, 3),
            a: -DMatrix::<Complex64>::identity(3, 3) * c(2.0, 0.0),
            b: DMatrix::zeros(3, 1),
            c: DMatrix::zeros(1, 3),
            d: ResponseMatrix::zeros(1),
            ports: 1,
            candidates: vec![],
        };
        let (cl, csl) = model.condition_diagnostics();
        assert_relative_eq!(cl, 1.0, epsilon = 1e-12);
        assert_relative_eq!(csl, 1.0, epsilon = 1e-12);
    }

    /// Building with the default shift and evaluating (which re-adds it) must
    /// agree with building shift-free.
    #[test]
    fn d_shift_neutrality() {
        let h = |f: f64| {
            let s = c(0.0, 2.0 * std::f64::consts::PI * f);
            (s * c(2.0, 0.0) + c(5.0, 0.0)) / (s * s + s * c(0.9, 0.0) + c(3.0, 0.0))
        };
        let fs = [0.12, 0.24, 0.4, 0.55];
        let set = scalar_set(&fs.map(|f| (f, h(f))));
        let part = partition_even_odd(&set).unwrap();
        let with_ones = build_mfti(&part, &ResponseMatrix::ones(1))
            .unwrap()
            .reduce(12)
            .unwrap();
        let with_zero = build_mfti(&part, &ResponseMatrix::zeros(1))
            .unwrap()
            .reduce(12)
            .unwrap();
        for k in 0..40 {
            let f = freq(0.1 + 0.012 * k as f64);
            let a = with_ones.evaluate(f).unwrap().entry(0, 0);
            let b = with_zero.evaluate(f).unwrap().entry(0, 0);
            assert!(
                (a - b).norm() / b.norm().max(1e-30) < 1e-8,
                "f = {}: {a} vs {b}",
                f.hz()
            );
        }
    }

    #[test]
    fn constant_data_equal_to_shift_reduces_to_order_zero() {
        let set = scalar_set(&[(1.0, c(1.0, 0.0)), (2.0, c(1.0, 0.0)), (3.0, c(1.0, 0.0))]);
        let part = partition_even_odd(&set).unwrap();
        let model = build_mfti(&part, &ResponseMatrix::ones(1)).unwrap();
        let reduced = model.reduce(8).unwrap();
        assert_eq!(reduced.order(), 0);
        let v = reduced.evaluate(freq(1.7)).unwrap();
        assert_relative_eq!(v.entry(0, 0).re, 1.0, epsilon = 1e-14);
    }
}
