//! Baseline adaptive sweeps: barycentric minimal sampling and the
//! Stoer–Bulirsch path-II rational interpolation.
//!
//! Both share the sweep module's grid, exclusion and memory rules so sample
//! counts are directly comparable with the Loewner sweeps.

use crate::error::{Error, Result};
use crate::metrics::relative_matrix_error;
use crate::solvers::SolverOracle;
use crate::sweep::{next_frequency, SweepConfig, SweepResult, TestGrid};
use crate::types::{ComplexFrequency, ErrorTracePoint, Frequency, ResponseMatrix, SampleSet};
use nalgebra::DMatrix;
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// Barycentric minimal sampling
// ---------------------------------------------------------------------------

/// Barycentric rational interpolant over positive-frequency support nodes.
///
/// Weights come from the null space of the positive-negative Loewner matrix,
/// which enforces conjugate-symmetric matching at the reflected nodes.
#[derive(Debug, Clone)]
pub struct BarycentricModel {
    node_freqs: Vec<Frequency>,
    nodes: Vec<ComplexFrequency>,
    node_values: Vec<ResponseMatrix>,
    weights: Vec<Complex64>,
}

/// Weight vector for barycentric interpolation of the sample set.
///
/// Responses are vectorized column-major into p²-vectors; the mp²×m Loewner
/// matrix built against the conjugated nodes is decomposed and the last
/// right-singular vector returned, normalized to unit length with its first
/// nonzero component rotated to the positive real axis.
pub fn pradovera_weights(data: &SampleSet) -> Result<Vec<Complex64>> {
    let m = data.len();
    if m == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let p = data.ports();
    let pp = p * p;
    let s: Vec<Complex64> = data.frequencies().map(|f| f.to_complex().value()).collect();
    // column-major vectorization of each response
    let vecs: Vec<Vec<Complex64>> = data
        .matrices()
        .map(|h| {
            let mat = h.matrix();
            let mut v = Vec::with_capacity(pp);
            for col in 0..p {
                for row in 0..p {
                    v.push(mat[(row, col)]);
                }
            }
            v
        })
        .collect();

    let mut l = DMatrix::<Complex64>::zeros(m * pp, m);
    for i in 0..m {
        let si_bar = s[i].conj();
        for j in 0..m {
            let den = si_bar - s[j];
            for k in 0..pp {
                l[(i * pp + k, j)] = (vecs[i][k].conj() - vecs[j][k]) / den;
            }
        }
    }

    let svd = l.svd(true, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numerical("SVD did not return V^H".into()))?;
    // last right-singular vector = conjugate of the last row of V^H
    let last = v_t.nrows() - 1;
    let mut w: Vec<Complex64> = (0..m).map(|j| v_t[(last, j)].conj()).collect();

    let norm: f64 = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Numerical("null-space vector vanished".into()));
    }
    for v in &mut w {
        *v /= norm;
    }
    // deterministic phase: first nonzero component positive real
    if let Some(first) = w.iter().find(|v| v.norm() > 1e-300).copied() {
        let phase = first / first.norm();
        for v in &mut w {
            *v /= phase;
        }
    }
    Ok(w)
}

impl BarycentricModel {
    /// Fits weights to the sample set.
    pub fn fit(data: &SampleSet) -> Result<Self> {
        let weights = pradovera_weights(data)?;
        Ok(BarycentricModel {
            node_freqs: data.frequencies().collect(),
            nodes: data.frequencies().map(|f| f.to_complex()).collect(),
            node_values: data.matrices().cloned().collect(),
            weights,
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Barycentric ratio Σ wⱼ H(sⱼ)/(s−sⱼ) / Σ wⱼ/(s−sⱼ), entrywise over the
    /// matrix node values. At a node the stored value is returned (removable
    /// singularity).
    pub fn evaluate(&self, f: Frequency) -> Result<ResponseMatrix> {
        let s = f.to_complex().value();
        if let Some(idx) = self.node_freqs.iter().position(|fj| fj.hz() == f.hz()) {
            return Ok(self.node_values[idx].clone());
        }
        let p = self.node_values[0].ports();
        let mut num = DMatrix::<Complex64>::zeros(p, p);
        let mut den = Complex64::new(0.0, 0.0);
        for ((sj, hj), &wj) in self.nodes.iter().zip(&self.node_values).zip(&self.weights) {
            let term = wj / (s - sj.value());
            num += hj.matrix() * term;
            den += term;
        }
        if den.norm() == 0.0 {
            return Err(Error::EvaluationSingularity { f_hz: f.hz() });
        }
        ResponseMatrix::new(num / den)
    }

    /// Pseudo error |1 / Σ wⱼ/(s−sⱼ)|; zero at the nodes.
    pub fn pseudo_error(&self, f: Frequency) -> f64 {
        let s = f.to_complex().value();
        if self.node_freqs.iter().any(|fj| fj.hz() == f.hz()) {
            return 0.0;
        }
        let mut den = Complex64::new(0.0, 0.0);
        for (sj, &wj) in self.nodes.iter().zip(&self.weights) {
            den += wj / (s - sj.value());
        }
        if den.norm() == 0.0 {
            f64::INFINITY
        } else {
            1.0 / den.norm()
        }
    }
}

/// Barycentric minimal-sampling sweep, starting from one sample at f_min.
///
/// Memoryless mode stops at the first below-tolerance sample; with memory it
/// requires `memory_target` consecutive successes. The final model (and grid
/// response) uses every queried sample.
pub fn pradovera_sweep(
    solver: &dyn SolverOracle,
    grid: &TestGrid,
    config: &SweepConfig,
    with_memory: bool,
) -> Result<SweepResult> {
    config.validate()?;
    let ports = solver.ports();
    let mut samples = SampleSet::empty(ports)?;
    let f0 = grid.f_min();
    samples.insert_sorted(f0, solver.query(f0)?)?;
    let mut solver_calls = 1usize;

    let mut trace = Vec::new();
    let mut successes = 0usize;
    let mut iteration = 0usize;
    let mut converged = false;

    while iteration < config.max_iterations {
        let model = BarycentricModel::fit(&samples)?;
        let curve: Vec<f64> = grid
            .frequencies()
            .iter()
            .map(|&f| model.pseudo_error(f))
            .collect();
        let f_new = match next_frequency(&curve, grid, &samples) {
            Ok(f) => f,
            Err(Error::GridExhausted) => break,
            Err(e) => return Err(e),
        };
        let pseudo = model.pseudo_error(f_new);
        let h_new = solver.query(f_new)?;
        solver_calls += 1;
        let predicted = model.evaluate(f_new)?;
        let actual = relative_matrix_error(&predicted, &h_new)?;

        if actual <= config.tol {
            successes += 1;
        } else {
            successes = 0;
        }
        iteration += 1;
        trace.push(ErrorTracePoint {
            iteration,
            f_new,
            pseudo_error: pseudo,
            actual_error: actual,
            model_order: (model.order(), model.order()),
            memory_counter: successes,
        });
        samples.insert_sorted(f_new, h_new)?;

        let target = if with_memory { config.memory_target } else { 1 };
        if successes >= target {
            converged = true;
            break;
        }
    }

    let model = BarycentricModel::fit(&samples)?;
    let grid_response = grid
        .frequencies()
        .iter()
        .map(|&f| model.evaluate(f))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        chosen_samples: samples,
        final_model: None,
        trace,
        grid_response,
        solver_calls,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Stoer–Bulirsch path II
// ---------------------------------------------------------------------------

/// Support nodes for the Stoer–Bulirsch recursion; the triangular table is
/// rebuilt per query frequency.
#[derive(Debug, Clone)]
pub struct SbTable {
    nodes: Vec<(Frequency, ResponseMatrix)>,
}

/// Interpolant value together with the one-column-earlier value used for the
/// pseudo error.
#[derive(Debug, Clone)]
pub struct SbEvaluation {
    pub value: ResponseMatrix,
    pub previous: ResponseMatrix,
}

impl SbTable {
    pub fn new(data: &SampleSet) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(SbTable {
            nodes: data.samples().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Runs the continued-fraction recursion elementwise over the matrix
    /// entries and returns the full-depth diagonal entry plus its
    /// predecessor.
    ///
    /// Column k entries combine columns k−1 and k−2:
    ///
    /// ```text
    /// H[k][i] = H[k-2][i+1] + (f0[i+k] − f0[i]) · d'·d'' / (n'·d'' + n''·d')
    /// d'  = H[k-1][i+1] − H[k-2][i+1]
    /// d'' = H[k-1][i]   − H[k-2][i+1]
    /// n'  = f − f0[i],  n'' = f0[i+k] − f
    /// ```
    ///
    /// with H[-1][·] = 0 and H[0][·] the node values; valid cells satisfy
    /// i + k ≤ n. Zero denominators fall back to the carried value
    /// H[k-2][i+1], which skips the degenerate continued-fraction step.
    pub fn evaluate(&self, f: Frequency) -> Result<SbEvaluation> {
        let n = self.nodes.len();
        let p = self.nodes[0].1.ports();
        // exact node hit: interpolation property, no table needed
        if let Some((_, h)) = self.nodes.iter().find(|(fi, _)| fi.hz() == f.hz()) {
            return Ok(SbEvaluation {
                value: h.clone(),
                previous: h.clone(),
            });
        }
        if n == 1 {
            let h = self.nodes[0].1.clone();
            return Ok(SbEvaluation {
                value: h.clone(),
                previous: h,
            });
        }

        let fq = f.hz();
        let zeros = DMatrix::<Complex64>::zeros(p, p);
        // columns k-2 and k-1, then the freshly computed column k
        let mut col_m2: Vec<DMatrix<Complex64>> = vec![zeros.clone(); n + 1];
        let mut col_m1: Vec<DMatrix<Complex64>> =
            self.nodes.iter().map(|(_, h)| h.matrix().clone()).collect();
        let mut diag_last = col_m1[0].clone();
        let mut diag_prev = col_m1[0].clone();

        for k in 1..n {
            let mut col = Vec::with_capacity(n - k);
            for i in 0..(n - k) {
                let carried = &col_m2[i + 1];
                let dp = &col_m1[i + 1] - carried;
                let dpp = &col_m1[i] - carried;
                let n_lo = Complex64::new(fq - self.nodes[i].0.hz(), 0.0);
                let n_hi = Complex64::new(self.nodes[i + k].0.hz() - fq, 0.0);
                let span =
                    Complex64::new(self.nodes[i + k].0.hz() - self.nodes[i].0.hz(), 0.0);
                let mut cell = carried.clone();
                for r in 0..p {
                    for c in 0..p {
                        let den = n_lo * dpp[(r, c)] + n_hi * dp[(r, c)];
                        if den.norm() != 0.0 {
                            cell[(r, c)] += span * dp[(r, c)] * dpp[(r, c)] / den;
                        }
                    }
                }
                col.push(cell);
            }
            diag_prev = diag_last.clone();
            diag_last = col[0].clone();
            // shift the window: k-1 becomes k-2, k becomes k-1
            col_m2 = std::mem::take(&mut col_m1);
            col_m1 = col;
        }

        Ok(SbEvaluation {
            value: ResponseMatrix::new(diag_last)?,
            previous: ResponseMatrix::new(diag_prev)?,
        })
    }
}

/// Stoer–Bulirsch adaptive sweep, starting from five uniform samples.
///
/// The pseudo error compares the last two diagonal interpolants in spectral
/// norm; termination follows the shared memory rule.
pub fn sb_sweep(
    solver: &dyn SolverOracle,
    grid: &TestGrid,
    config: &SweepConfig,
) -> Result<SweepResult> {
    config.validate()?;
    if grid.len() < 5 {
        return Err(Error::InvalidInput(
            "Stoer-Bulirsch sweep needs a grid of at least 5 points".into(),
        ));
    }
    let ports = solver.ports();
    let mut samples = SampleSet::empty(ports)?;
    let (lo, hi) = (grid.f_min().hz(), grid.f_max().hz());
    for i in 0..5 {
        let f = Frequency::new(lo + (hi - lo) * i as f64 / 4.0)?;
        samples.insert_sorted(f, solver.query(f)?)?;
    }
    let mut solver_calls = 5usize;

    let mut trace = Vec::new();
    let mut successes = 0usize;
    let mut iteration = 0usize;
    let mut converged = false;

    while iteration < config.max_iterations {
        let table = SbTable::new(&samples)?;
        let curve: Vec<f64> = grid
            .frequencies()
            .iter()
            .map(|&f| match table.evaluate(f) {
                Ok(ev) => relative_matrix_error(&ev.previous, &ev.value)
                    .unwrap_or(f64::INFINITY),
                Err(_) => f64::INFINITY,
            })
            .collect();
        let f_new = match next_frequency(&curve, grid, &samples) {
            Ok(f) => f,
            Err(Error::GridExhausted) => break,
            Err(e) => return Err(e),
        };
        let pseudo = curve
            .iter()
            .zip(grid.frequencies())
            .find(|(_, &f)| f.hz() == f_new.hz())
            .map(|(&e, _)| e)
            .unwrap_or(f64::INFINITY);

        let h_new = solver.query(f_new)?;
        solver_calls += 1;
        let predicted = table.evaluate(f_new)?.value;
        let actual = relative_matrix_error(&predicted, &h_new)?;

        if actual <= config.tol {
            successes += 1;
        } else {
            successes = 0;
        }
        iteration += 1;
        let order = samples.len();
        trace.push(ErrorTracePoint {
            iteration,
            f_new,
            pseudo_error: pseudo,
            actual_error: actual,
            model_order: (order.saturating_sub(1), order),
            memory_counter: successes,
        });
        samples.insert_sorted(f_new, h_new)?;

        if successes >= config.memory_target {
            converged = true;
            break;
        }
    }

    let table = SbTable::new(&samples)?;
    let grid_response = grid
        .frequencies()
        .iter()
        .map(|&f| table.evaluate(f).map(|ev| ev.value))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepResult {
        chosen_samples: samples,
        final_model: None,
        trace,
        grid_response,
        solver_calls,
        converged,
    })
}
