//! Numerical cross-validation through Gaussian inputs.
//!
//! The supremum of the ratio is attained in the limit over centered
//! Gaussians, which turns evaluation into determinant arithmetic. With the
//! normalization `∫ exp(−π x·Ax) dx = det(A)^{-1/2}`, a tuple of positive
//! definite forms `A_j` gives
//!
//! `log_ratio = −(1/2)·log det M + (1/2)·Σ_j t_j·(n_j·log p_j + log det A_j)`
//!
//! where `M = Σ_j ℓ_jᵀ A_j ℓ_j`, plus the constant weight `ℓ_0ᵀℓ_0` in the
//! modes with bounded coordinates. Three consumers build on the formula: a
//! closed-form evaluator (float and exact-rational), a seeded multi-restart
//! gradient ascent that classifies the trace as converged, drifting, or
//! diverging, and blow-up families whose measured slope must reproduce a
//! witness's exponent.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::certificate::{ScalingWitness, Violation};
use crate::datum::{CheckedDatum, Mode};
use crate::polytope::{solve_lp, LpOutcome};
use crate::ratlin::{image, rref, Rat, RatMatrix, Subspace};

/// Divergence ceiling: a trace that stays above this log-ratio for
/// [`DIVERGENCE_RUN`] consecutive iterates is blowing up, not drifting.
pub const DIVERGENCE_CEILING: f64 = 50.0;
pub const DIVERGENCE_RUN: usize = 100;

/// Positive-definiteness floor in the ascent parameterization
/// `A = BBᵀ + εI`. Keeps factorizations stable without visibly biasing the
/// ratio.
pub const PD_FLOOR: f64 = 1e-12;

/// Parameter extremity threshold for the drifting classification: an
/// eigenvalue this far above one, or this close to the floor, signals a
/// supremum at the boundary of the cone.
const DRIFT_EXTREMITY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("form {0} is not positive definite")]
    NotPositiveDefinite(usize),
    #[error("form {j} has size {got}, factor target has dimension {want}")]
    ShapeMismatch { j: usize, got: usize, want: usize },
    #[error("tuple has {got} forms, datum has {want} factors")]
    CountMismatch { got: usize, want: usize },
    #[error("integration region is unbounded along coordinate {0}")]
    UnboundedSupport(usize),
    #[error("ambient dimension {0} too large for direct integration (limit 4)")]
    AmbientTooLarge(usize),
}

// ---------------------------------------------------------------------------
// Small dense symmetric float matrices
// ---------------------------------------------------------------------------

/// Dense square float matrix, row-major. Just enough linear algebra for the
/// determinant formula and its gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct FMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl FMat {
    pub fn zeros(n: usize) -> Self {
        FMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn scalar(n: usize, value: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = value;
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.n + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.n + c] = v;
    }

    pub fn add(&self, other: &FMat) -> FMat {
        assert_eq!(self.n, other.n);
        FMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> FMat {
        FMat {
            n: self.n,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Lower Cholesky factor, or `None` when the matrix is not (numerically)
    /// positive definite.
    pub fn cholesky(&self) -> Option<FMat> {
        let n = self.n;
        let mut l = FMat::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    l.set(i, i, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Some(l)
    }

    pub fn log_det(&self) -> Option<f64> {
        let l = self.cholesky()?;
        Some((0..self.n).map(|i| 2.0 * l.get(i, i).ln()).sum())
    }

    /// Inverse via Cholesky; `None` when not positive definite.
    pub fn inverse_pd(&self) -> Option<FMat> {
        let l = self.cholesky()?;
        let n = self.n;
        let mut inv = FMat::zeros(n);
        for col in 0..n {
            // Solve L y = e_col, then Lᵀ x = y.
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut sum = if i == col { 1.0 } else { 0.0 };
                for k in 0..i {
                    sum -= l.get(i, k) * y[k];
                }
                y[i] = sum / l.get(i, i);
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut sum = y[i];
                for k in i + 1..n {
                    sum -= l.get(k, i) * x[k];
                }
                x[i] = sum / l.get(i, i);
            }
            for i in 0..n {
                inv.set(i, col, x[i]);
            }
        }
        Some(inv)
    }

    /// `self * other`
    pub fn matmul(&self, other: &FMat) -> FMat {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = FMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }
}

fn rat_matrix_to_f64(m: &RatMatrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(rat_to_f64).collect())
        .collect()
}

/// Exact-enough conversion; entries here are small rationals.
pub fn rat_to_f64(r: &Rat) -> f64 {
    let num = r.numer().to_f64().unwrap_or(f64::NAN);
    let den = r.denom().to_f64().unwrap_or(f64::NAN);
    num / den
}

/// Natural log of a positive rational with arbitrarily large terms.
pub fn ln_rat(r: &Rat) -> f64 {
    assert!(r.is_positive(), "log of a non-positive rational");
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().expect("small integer").ln();
    }
    let shift = bits - 52;
    let top: BigInt = x >> shift;
    top.to_f64().expect("52-bit mantissa").ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Magnitude-aware conversion that survives rationals whose numerator and
/// denominator are both enormous while the value itself is moderate.
pub fn rat_signed_to_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let magnitude = ln_rat(&r.abs()).exp();
    if r.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

// ---------------------------------------------------------------------------
// The ratio formula
// ---------------------------------------------------------------------------

/// A tuple of positive definite quadratic forms, one per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianTuple {
    pub forms: Vec<FMat>,
}

impl GaussianTuple {
    pub fn scalars(values: &[f64]) -> Self {
        GaussianTuple {
            forms: values.iter().map(|&v| FMat::scalar(1, v)).collect(),
        }
    }
}

/// A finite log-ratio, or the infinite flag when the combined form is
/// singular (the functional itself is unbounded on Gaussians).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogRatio {
    Finite(f64),
    Infinite,
}

impl LogRatio {
    pub fn finite(self) -> Option<f64> {
        match self {
            LogRatio::Finite(v) => Some(v),
            LogRatio::Infinite => None,
        }
    }
}

fn check_tuple(datum: &CheckedDatum, g: &GaussianTuple) -> Result<(), OracleError> {
    if g.forms.len() != datum.factor_count() {
        return Err(OracleError::CountMismatch {
            got: g.forms.len(),
            want: datum.factor_count(),
        });
    }
    for (j, a) in g.forms.iter().enumerate() {
        if a.n != datum.target_dim(j) {
            return Err(OracleError::ShapeMismatch {
                j,
                got: a.n,
                want: datum.target_dim(j),
            });
        }
        if a.cholesky().is_none() {
            return Err(OracleError::NotPositiveDefinite(j));
        }
    }
    Ok(())
}

/// The effective bounded-coordinates weight of the datum, as float rows;
/// empty in the purely global modes.
fn weight_rows(datum: &CheckedDatum) -> Vec<Vec<f64>> {
    match datum.mode() {
        Mode::Global | Mode::Discrete | Mode::Amalgam => Vec::new(),
        Mode::Local => {
            let n = datum.ambient_dim();
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect()
        }
        Mode::Gut(m0) => rat_matrix_to_f64(m0),
    }
}

/// `M = W + Σ_j ℓ_jᵀ A_j ℓ_j` where `W` is the constant weight (zero in
/// global mode).
fn combined_form(datum: &CheckedDatum, g: &GaussianTuple, with_weight: bool) -> FMat {
    let n = datum.ambient_dim();
    let mut m = FMat::zeros(n);
    if with_weight {
        for row in weight_rows(datum) {
            for r in 0..n {
                for c in 0..n {
                    m.data[r * n + c] += row[r] * row[c];
                }
            }
        }
    }
    for j in 0..datum.factor_count() {
        let lj = rat_matrix_to_f64(datum.map(j));
        let a = &g.forms[j];
        let nj = a.n;
        // ℓᵀ A ℓ accumulated entrywise.
        for r in 0..n {
            for c in 0..n {
                let mut sum = 0.0;
                for p in 0..nj {
                    for q in 0..nj {
                        sum += lj[p][r] * a.get(p, q) * lj[q][c];
                    }
                }
                m.data[r * n + c] += sum;
            }
        }
    }
    m
}

fn norm_side(datum: &CheckedDatum, g: &GaussianTuple) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for j in 0..datum.factor_count() {
        let t = rat_to_f64(datum.t(j));
        if t == 0.0 {
            continue; // supremum norm of a centered Gaussian is one
        }
        let log_det = g.forms[j]
            .log_det()
            .ok_or(OracleError::NotPositiveDefinite(j))?;
        let log_p = -t.ln();
        total += t * ((datum.target_dim(j) as f64) * log_p + log_det);
    }
    Ok(0.5 * total)
}

/// Closed-form log-ratio for a global-mode datum.
pub fn gaussian_ratio(datum: &CheckedDatum, g: &GaussianTuple) -> Result<LogRatio, OracleError> {
    check_tuple(datum, g)?;
    let norm = norm_side(datum, g)?;
    match combined_form(datum, g, false).log_det() {
        Some(log_det) => Ok(LogRatio::Finite(-0.5 * log_det + norm)),
        None => Ok(LogRatio::Infinite),
    }
}

/// Log-ratio including the constant bounded-coordinates weight; coincides
/// with [`gaussian_ratio`] in global mode. This is the quantity whose slope
/// along a blow-up family reproduces a witness exponent in every mode.
pub fn weighted_ratio(datum: &CheckedDatum, g: &GaussianTuple) -> Result<LogRatio, OracleError> {
    check_tuple(datum, g)?;
    let norm = norm_side(datum, g)?;
    match combined_form(datum, g, true).log_det() {
        Some(log_det) => Ok(LogRatio::Finite(-0.5 * log_det + norm)),
        None => Ok(LogRatio::Infinite),
    }
}

// ---------------------------------------------------------------------------
// Exact-rational evaluation
// ---------------------------------------------------------------------------

/// Least common denominator of the exponent reciprocals.
pub fn exponent_denominator(datum: &CheckedDatum) -> BigInt {
    let mut d = BigInt::one();
    for j in 0..datum.factor_count() {
        d = d.lcm(datum.t(j).denom());
    }
    d
}

fn exact_pd_check(a: &RatMatrix) -> bool {
    // Sylvester: all leading principal minors positive.
    for k in 1..=a.rows() {
        let mut sub = RatMatrix::zero(k, k);
        for r in 0..k {
            for c in 0..k {
                sub.set(r, c, a.get(r, c).clone());
            }
        }
        if !sub.det().is_positive() {
            return false;
        }
    }
    true
}

/// Exact value of `ratio^{2D}` for rational positive definite forms, where
/// `D` is the least common denominator of the exponents:
/// `ratio^{2D} = det(M)^{-D} · Π_j (p_j^{n_j}·det A_j)^{D·t_j}`. Factors
/// with `t_j = 0` contribute one. `None` when the combined form is singular.
pub fn ratio_exact_power(
    datum: &CheckedDatum,
    forms: &[RatMatrix],
    with_weight: bool,
) -> Result<Option<Rat>, OracleError> {
    if forms.len() != datum.factor_count() {
        return Err(OracleError::CountMismatch {
            got: forms.len(),
            want: datum.factor_count(),
        });
    }
    let n = datum.ambient_dim();
    for (j, a) in forms.iter().enumerate() {
        if a.rows() != datum.target_dim(j) || a.cols() != datum.target_dim(j) {
            return Err(OracleError::ShapeMismatch {
                j,
                got: a.rows(),
                want: datum.target_dim(j),
            });
        }
        if !exact_pd_check(a) {
            return Err(OracleError::NotPositiveDefinite(j));
        }
    }

    let d_big = exponent_denominator(datum);
    let d_i32 = d_big.to_i32().expect("exponent denominators are small");

    let mut m = RatMatrix::zero(n, n);
    if with_weight {
        if let Mode::Gut(m0) = datum.mode() {
            let w = m0.transpose().mul(m0);
            for r in 0..n {
                for c in 0..n {
                    let v = m.get(r, c) + w.get(r, c);
                    m.set(r, c, v);
                }
            }
        }
        if matches!(datum.mode(), Mode::Local) {
            for i in 0..n {
                let v = m.get(i, i) + Rat::one();
                m.set(i, i, v);
            }
        }
    }
    for j in 0..datum.factor_count() {
        let lj = datum.map(j);
        let contrib = lj.transpose().mul(&forms[j].mul(lj));
        for r in 0..n {
            for c in 0..n {
                let v = m.get(r, c) + contrib.get(r, c);
                m.set(r, c, v);
            }
        }
    }
    let det_m = m.det();
    if det_m.is_zero() {
        return Ok(None);
    }

    let mut value = det_m.pow(-d_i32);
    for j in 0..datum.factor_count() {
        let t = datum.t(j);
        if t.is_zero() {
            continue;
        }
        // D·t_j is an integer exponent by construction of D.
        let e = (t * Rat::from_integer(d_big.clone()))
            .to_integer()
            .to_i32()
            .expect("integer exponent");
        let p = t.recip();
        let base = p.pow(datum.target_dim(j) as i32) * forms[j].det();
        value *= base.pow(e);
    }
    Ok(Some(value))
}

// ---------------------------------------------------------------------------
// Gradient ascent
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Converged,
    Drifting,
    Diverging,
}

impl TraceStatus {
    pub fn name(&self) -> &'static str {
        match self {
            TraceStatus::Converged => "converged",
            TraceStatus::Drifting => "drifting",
            TraceStatus::Diverging => "diverging",
        }
    }
}

/// The accepted ascent path of the best restart, plus per-restart summary.
/// `log_ratios` is nondecreasing by construction.
#[derive(Clone, Debug)]
pub struct RatioTrace {
    pub log_ratios: Vec<f64>,
    pub status: TraceStatus,
    pub final_tuple: GaussianTuple,
    pub restart_finals: Vec<f64>,
}

impl RatioTrace {
    pub fn final_log_ratio(&self) -> f64 {
        *self.log_ratios.last().expect("trace has at least one point")
    }

    /// Plot-ready two-column table.
    pub fn to_table(&self) -> String {
        let mut out = String::from("iteration\tlog_ratio\n");
        for (i, v) in self.log_ratios.iter().enumerate() {
            out.push_str(&format!("{i}\t{v:.12e}\n"));
        }
        out
    }
}

/// Analytic gradient of the log-ratio with respect to each form:
/// `∇_{A_j} = −(1/2)·ℓ_j M⁻¹ ℓ_jᵀ + (1/2)·t_j·A_j⁻¹`.
pub fn log_ratio_gradient(
    datum: &CheckedDatum,
    g: &GaussianTuple,
) -> Result<Vec<FMat>, OracleError> {
    check_tuple(datum, g)?;
    let m = combined_form(datum, g, false);
    let m_inv = m.inverse_pd().ok_or(OracleError::NotPositiveDefinite(0))?;
    let mut grads = Vec::with_capacity(datum.factor_count());
    for j in 0..datum.factor_count() {
        let lj = rat_matrix_to_f64(datum.map(j));
        let nj = datum.target_dim(j);
        let n = datum.ambient_dim();
        // S = ℓ_j M⁻¹ ℓ_jᵀ
        let mut s = FMat::zeros(nj);
        for p in 0..nj {
            for q in 0..nj {
                let mut sum = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        sum += lj[p][r] * m_inv.get(r, c) * lj[q][c];
                    }
                }
                s.set(p, q, sum);
            }
        }
        let t = rat_to_f64(datum.t(j));
        let mut grad = s.scale(-0.5);
        if t != 0.0 {
            let a_inv = g.forms[j]
                .inverse_pd()
                .ok_or(OracleError::NotPositiveDefinite(j))?;
            grad = grad.add(&a_inv.scale(0.5 * t));
        }
        grads.push(grad);
    }
    Ok(grads)
}

struct AscentState {
    bs: Vec<FMat>,
}

impl AscentState {
    fn tuple(&self) -> GaussianTuple {
        GaussianTuple {
            forms: self
                .bs
                .iter()
                .map(|b| {
                    let bbt = symmetric_square(b);
                    bbt.add(&FMat::scalar(b.n, PD_FLOOR))
                })
                .collect(),
        }
    }
}

/// `B Bᵀ`
fn symmetric_square(b: &FMat) -> FMat {
    let n = b.n;
    let mut out = FMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut sum = 0.0;
            for k in 0..n {
                sum += b.get(i, k) * b.get(j, k);
            }
            out.set(i, j, sum);
        }
    }
    out
}

fn run_restart(
    datum: &CheckedDatum,
    seed: u64,
    iterations: usize,
) -> (Vec<(GaussianTuple, f64)>, TraceStatus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = AscentState {
        bs: (0..datum.factor_count())
            .map(|j| {
                let nj = datum.target_dim(j);
                let mut b = FMat::identity(nj);
                for v in b.data.iter_mut() {
                    *v += 0.3 * rng.gen_range(-1.0..1.0);
                }
                b
            })
            .collect(),
    };

    let eval = |s: &AscentState| -> Option<f64> {
        gaussian_ratio(datum, &s.tuple()).ok()?.finite()
    };

    let Some(mut current) = eval(&state) else {
        // Singular combined form: the ratio is infinite outright.
        return (Vec::new(), TraceStatus::Diverging);
    };
    let mut path = vec![(state.tuple(), current)];
    let mut step = 1.0f64;
    let mut above_ceiling = 0usize;
    let mut stalls = 0usize;

    for _ in 0..iterations {
        if current > DIVERGENCE_CEILING {
            above_ceiling += 1;
            if above_ceiling >= DIVERGENCE_RUN {
                return (path, TraceStatus::Diverging);
            }
        } else {
            above_ceiling = 0;
        }

        let Ok(grads_a) = log_ratio_gradient(datum, &state.tuple()) else {
            break;
        };
        // Chain rule through A = BBᵀ + εI: ∇_B = 2 ∇_A B.
        let grads_b: Vec<FMat> = grads_a
            .iter()
            .zip(&state.bs)
            .map(|(g, b)| g.matmul(b).scale(2.0))
            .collect();
        let grad_norm: f64 = grads_b.iter().map(|g| g.max_abs()).fold(0.0, f64::max);
        if grad_norm == 0.0 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
            continue;
        }

        // Backtracking line search, halving; accepted steps seed the next
        // iteration with twice the accepted length so genuine blow-up
        // directions can be followed geometrically.
        let mut accepted = false;
        let mut trial_step = step;
        for _ in 0..60 {
            let trial = AscentState {
                bs: state
                    .bs
                    .iter()
                    .zip(&grads_b)
                    .map(|(b, g)| b.add(&g.scale(trial_step)))
                    .collect(),
            };
            if let Some(value) = eval(&trial) {
                if value > current {
                    state = trial;
                    current = value;
                    path.push((state.tuple(), current));
                    step = (trial_step * 2.0).min(1e12);
                    accepted = true;
                    break;
                }
            }
            trial_step *= 0.5;
            if trial_step < 1e-18 {
                break;
            }
        }
        if !accepted {
            stalls += 1;
            step = 1.0;
            if stalls >= 3 {
                break;
            }
        } else {
            stalls = 0;
        }
    }

    // Classify the endpoint: parameters pressed against the cone boundary
    // (eigenvalues near the floor or huge) signal a non-attained supremum.
    let tuple = state.tuple();
    let mut extreme = false;
    for a in &tuple.forms {
        let max_entry = a.max_abs();
        if max_entry > DRIFT_EXTREMITY {
            extreme = true;
        }
        if let Some(log_det) = a.log_det() {
            // Geometric-mean eigenvalue within two decades of the floor.
            if log_det / (a.n as f64) < (PD_FLOOR * 100.0).ln() {
                extreme = true;
            }
        }
    }
    let status = if extreme {
        TraceStatus::Drifting
    } else {
        TraceStatus::Converged
    };
    (path, status)
}

/// Seeded multi-restart gradient ascent over the positive definite cones.
/// Restarts run concurrently and merge deterministically by seed index.
pub fn ascent(datum: &CheckedDatum, seed: u64, iterations: usize, restarts: usize) -> RatioTrace {
    let results: Vec<(Vec<(GaussianTuple, f64)>, TraceStatus)> = (0..restarts)
        .into_par_iter()
        .map(|k| run_restart(datum, seed.wrapping_add(k as u64), iterations))
        .collect();

    let mut restart_finals = Vec::with_capacity(results.len());
    for (path, status) in &results {
        let last = path.last().map(|(_, v)| *v).unwrap_or(f64::INFINITY);
        restart_finals.push(if *status == TraceStatus::Diverging && path.is_empty() {
            f64::INFINITY
        } else {
            last
        });
    }

    // Any diverging restart decides; otherwise report the best finisher.
    let diverged = results
        .iter()
        .position(|(_, s)| *s == TraceStatus::Diverging);
    let best = diverged.unwrap_or_else(|| {
        restart_finals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite finals"))
            .map(|(i, _)| i)
            .unwrap_or(0)
    });
    let (path, status) = &results[best];
    let (log_ratios, final_tuple) = if path.is_empty() {
        (vec![f64::INFINITY], GaussianTuple { forms: Vec::new() })
    } else {
        (
            path.iter().map(|(_, v)| *v).collect(),
            path.last().expect("nonempty").0.clone(),
        )
    };
    RatioTrace {
        log_ratios,
        status: *status,
        final_tuple,
        restart_finals,
    }
}

// ---------------------------------------------------------------------------
// Blow-up families and slope measurement
// ---------------------------------------------------------------------------

/// Exact orthogonal projector onto the row span of a subspace basis:
/// `P = Bᵀ(BBᵀ)⁻¹B`.
fn rational_projector(s: &Subspace) -> RatMatrix {
    let n = s.ambient_dim();
    if s.dim() == 0 {
        return RatMatrix::zero(n, n);
    }
    let b = s.basis();
    let gram = b.mul(&b.transpose());
    let gram_inv = invert_rational(&gram).expect("Gram matrix of independent rows");
    b.transpose().mul(&gram_inv.mul(b))
}

fn invert_rational(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return None;
    }
    let aug = m.hstack(&RatMatrix::identity(n));
    let reduced = rref(&aug);
    if reduced.rank < n || reduced.pivot_cols.iter().take(n).ne((0..n).collect::<Vec<_>>().iter())
    {
        return None;
    }
    Some(reduced.echelon.submatrix_cols(n..2 * n))
}

/// The rational forms of the blow-up family at scale `λ = big²` (so
/// `s = ln λ / 2`): for a big-radius witness, eigenvalue `1/λ` on
/// `ℓ_j(V_big)` and `1` across; for a small-radius witness, eigenvalue `λ`
/// off `ℓ_j(V)` and `1` along.
pub fn blowup_family_rational(
    datum: &CheckedDatum,
    witness: &ScalingWitness,
    lambda: &Rat,
) -> Vec<RatMatrix> {
    let concentrate = match witness.violation {
        Violation::BigRadius => &witness.v_big,
        Violation::SmallRadius => &witness.v,
    };
    (0..datum.factor_count())
        .map(|j| {
            let img = image(datum.map(j), concentrate).expect("ambient subspace");
            let nj = datum.target_dim(j);
            let p = rational_projector(&img);
            let mut out = RatMatrix::zero(nj, nj);
            for r in 0..nj {
                for c in 0..nj {
                    let id = if r == c { Rat::one() } else { Rat::zero() };
                    let off = &id - p.get(r, c);
                    let v = match witness.violation {
                        // λ⁻¹ on the image, 1 on the complement.
                        Violation::BigRadius => p.get(r, c) / lambda + off,
                        // 1 on the image, λ on the complement.
                        Violation::SmallRadius => p.get(r, c).clone() + off * lambda,
                    };
                    out.set(r, c, v);
                }
            }
            out
        })
        .collect()
}

/// Float version of the family at parameter `s` (`λ = e^{2s}`).
pub fn blowup_family(datum: &CheckedDatum, witness: &ScalingWitness, s: f64) -> GaussianTuple {
    let concentrate = match witness.violation {
        Violation::BigRadius => &witness.v_big,
        Violation::SmallRadius => &witness.v,
    };
    let lambda = (2.0 * s).exp();
    let forms = (0..datum.factor_count())
        .map(|j| {
            let img = image(datum.map(j), concentrate).expect("ambient subspace");
            let p = rational_projector(&img);
            let nj = datum.target_dim(j);
            let mut out = FMat::zeros(nj);
            for r in 0..nj {
                for c in 0..nj {
                    let pv = rat_to_f64(p.get(r, c));
                    let id = if r == c { 1.0 } else { 0.0 };
                    let v = match witness.violation {
                        Violation::BigRadius => pv / lambda + (id - pv),
                        Violation::SmallRadius => pv + (id - pv) * lambda,
                    };
                    out.set(r, c, v);
                }
            }
            out
        })
        .collect();
    GaussianTuple { forms }
}

/// The slope the witness predicts for `log_ratio` as a function of `s`.
pub fn predicted_slope(witness: &ScalingWitness) -> f64 {
    match witness.violation {
        Violation::BigRadius => rat_to_f64(&witness.big_radius_exponent),
        Violation::SmallRadius => -rat_to_f64(&witness.small_radius_exponent),
    }
}

/// Measure the blow-up slope exactly: evaluate `ratio^{2D}` at the rational
/// scales `λ = 4^k` and `4^{k+1}` and difference the logarithms. The family
/// is exact, so the only float is the final logarithm of an exact rational.
/// `None` when the combined form is singular along the family.
pub fn blowup_slope_exact(
    datum: &CheckedDatum,
    witness: &ScalingWitness,
    k: u32,
) -> Option<f64> {
    let d = exponent_denominator(datum).to_f64()?;
    let lam1 = Rat::from_integer(BigInt::from(4u64).pow(k));
    let lam2 = Rat::from_integer(BigInt::from(4u64).pow(k + 1));
    let r1 = ratio_exact_power(datum, &blowup_family_rational(datum, witness, &lam1), true)
        .ok()??;
    let r2 = ratio_exact_power(datum, &blowup_family_rational(datum, witness, &lam2), true)
        .ok()??;
    // Δs = ln 2 between consecutive powers of four.
    Some(ln_rat(&(r2 / r1)) / (2.0 * d * std::f64::consts::LN_2))
}

/// Float-only slope measurement by central differencing the weighted ratio
/// at `s = 4, 5, 6`.
pub fn blowup_slope_float(datum: &CheckedDatum, witness: &ScalingWitness) -> Option<f64> {
    let at = |s: f64| {
        weighted_ratio(datum, &blowup_family(datum, witness, s))
            .ok()
            .and_then(LogRatio::finite)
    };
    Some((at(6.0)? - at(4.0)?) / 2.0)
}

// ---------------------------------------------------------------------------
// Direct integration
// ---------------------------------------------------------------------------

/// Axis-aligned box support for one factor, with exact rational endpoints.
#[derive(Clone, Debug)]
pub struct FactorBox {
    pub intervals: Vec<(Rat, Rat)>,
}

impl FactorBox {
    pub fn unit(dim: usize) -> Self {
        FactorBox {
            intervals: vec![(Rat::zero(), Rat::one()); dim],
        }
    }

    fn contains(&self, point: &[f64]) -> bool {
        self.intervals
            .iter()
            .zip(point)
            .all(|((lo, hi), &x)| x >= rat_to_f64(lo) && x <= rat_to_f64(hi))
    }
}

enum RegionBound {
    Interval(Rat, Rat),
    Empty,
    Unbounded,
}

/// Exact bounding interval of coordinate `i` over the region
/// `{y : ℓ_j y ∈ box_j ∀j}`, by linear programming in both directions.
fn coordinate_bounds(datum: &CheckedDatum, boxes: &[FactorBox], i: usize) -> RegionBound {
    // Standard form: y = u − w with u, w ≥ 0 and one slack per inequality.
    let n = datum.ambient_dim();
    let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for (j, fb) in boxes.iter().enumerate() {
        let map = datum.map(j);
        for r in 0..datum.target_dim(j) {
            let coeffs: Vec<Rat> = (0..n).map(|c| map.get(r, c).clone()).collect();
            let (lo, hi) = &fb.intervals[r];
            rows.push((coeffs.clone(), hi.clone()));
            rows.push((coeffs.iter().map(|v| -v.clone()).collect(), -lo.clone()));
        }
    }
    let vars = 2 * n + rows.len();
    let mut a: Vec<Vec<Rat>> = Vec::with_capacity(rows.len());
    for (k, (coeffs, _)) in rows.iter().enumerate() {
        let mut row = vec![Rat::zero(); vars];
        for c in 0..n {
            row[c] = coeffs[c].clone();
            row[n + c] = -coeffs[c].clone();
        }
        row[2 * n + k] = Rat::one();
        a.push(row);
    }
    let b: Vec<Rat> = rows.iter().map(|(_, rhs)| rhs.clone()).collect();

    let mut objective = vec![Rat::zero(); vars];
    objective[i] = Rat::one();
    objective[n + i] = -Rat::one();

    let max = match solve_lp(&a, &b, &objective.iter().map(|v| -v.clone()).collect::<Vec<_>>()) {
        LpOutcome::Optimal { value, .. } => -value,
        LpOutcome::Infeasible => return RegionBound::Empty,
        LpOutcome::Unbounded => return RegionBound::Unbounded,
    };
    let min = match solve_lp(&a, &b, &objective) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible => return RegionBound::Empty,
        LpOutcome::Unbounded => return RegionBound::Unbounded,
    };
    RegionBound::Interval(min, max)
}

/// Randomized quasi-Monte Carlo integration over a box: Halton points under
/// independent random shifts, mean and standard error across the shifts.
pub fn qmc_integrate<F: Fn(&[f64]) -> f64 + Sync>(
    bounds: &[(f64, f64)],
    f: F,
    samples: usize,
    shifts: usize,
    seed: u64,
) -> (f64, f64) {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let dim = bounds.len();
    assert!(dim <= PRIMES.len(), "integration dimension too large");
    let volume: f64 = bounds.iter().map(|(lo, hi)| hi - lo).product();
    let per_shift = (samples / shifts.max(1)).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift_vectors: Vec<Vec<f64>> = (0..shifts)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();

    let estimates: Vec<f64> = shift_vectors
        .par_iter()
        .map(|shift| {
            let mut acc = 0.0;
            let mut point = vec![0.0; dim];
            for k in 0..per_shift {
                for (d, &(lo, hi)) in bounds.iter().enumerate() {
                    let h = halton((k + 1) as u64, PRIMES[d]);
                    let u = (h + shift[d]).fract();
                    point[d] = lo + u * (hi - lo);
                }
                acc += f(&point);
            }
            volume * acc / per_shift as f64
        })
        .collect();

    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var = estimates
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / (estimates.len().saturating_sub(1).max(1)) as f64;
    (mean, (var / estimates.len() as f64).sqrt())
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut fraction = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * fraction;
        index /= base;
        fraction /= base as f64;
    }
    result
}

/// Quasi-Monte Carlo estimate of the functional on box indicators, with a
/// standard error. The integration region is boxed exactly by linear
/// programming first; unbounded regions are an error.
pub fn monte_carlo_lambda(
    datum: &CheckedDatum,
    boxes: &[FactorBox],
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), OracleError> {
    let n = datum.ambient_dim();
    if n > 4 {
        return Err(OracleError::AmbientTooLarge(n));
    }
    if boxes.len() != datum.factor_count() {
        return Err(OracleError::CountMismatch {
            got: boxes.len(),
            want: datum.factor_count(),
        });
    }
    for (j, fb) in boxes.iter().enumerate() {
        if fb.intervals.len() != datum.target_dim(j) {
            return Err(OracleError::ShapeMismatch {
                j,
                got: fb.intervals.len(),
                want: datum.target_dim(j),
            });
        }
    }
    let mut bounds = Vec::with_capacity(n);
    for i in 0..n {
        match coordinate_bounds(datum, boxes, i) {
            RegionBound::Interval(lo, hi) => {
                bounds.push((rat_to_f64(&lo) - 1e-9, rat_to_f64(&hi) + 1e-9));
            }
            RegionBound::Empty => return Ok((0.0, 0.0)),
            RegionBound::Unbounded => return Err(OracleError::UnboundedSupport(i)),
        }
    }
    let maps: Vec<Vec<Vec<f64>>> = (0..datum.factor_count())
        .map(|j| rat_matrix_to_f64(datum.map(j)))
        .collect();
    let indicator = |y: &[f64]| -> f64 {
        for (j, fb) in boxes.iter().enumerate() {
            let image: Vec<f64> = maps[j]
                .iter()
                .map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum())
                .collect();
            if !fb.contains(&image) {
                return 0.0;
            }
        }
        1.0
    };
    Ok(qmc_integrate(&bounds, indicator, samples, 8, seed))
}

#[cfg(test)]
mod tests;
