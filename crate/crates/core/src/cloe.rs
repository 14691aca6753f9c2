//! Constructive interpolation: adaptive enrichment of the interpolation set.
//!
//! Starting from the boundary points of the band Ω, each iteration builds a
//! Loewner interpolant from the data gathered so far, measures how much the
//! model moved since the previous iteration,
//!
//! ```text
//! ẽ∞ = max_ω ‖H_{k−1}(jω) − H_k(jω)‖₂ / max_ω ‖H_k(jω)‖₂
//! ```
//!
//! over a fine grid W_f, and — if that is still above the tolerance ε —
//! asks the expensive oracle for new data where the current model shows the
//! strongest dynamics: peaks and valleys of f(ω) = ‖H_k(jω)‖₂, falling back
//! to the steepest log-log slopes when the curve is monotone. The loop stops
//! on convergence, on the evaluation budget r̄, or when the search grid has
//! no admissible frequencies left.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::loewner::{reduce_samples, Interpolant, LoewnerError};
use crate::lti::{
    log_grid, spectral_norm, FrequencyGrid, FrequencySample, LtiError, StateSpaceModel,
};

/// Errors from configuration validation and the enrichment loop.
#[derive(Debug, Error)]
pub enum CloeError {
    /// The point budget r̄ must exceed 2 (boundary initialisation plus at
    /// least one enrichment).
    #[error("point budget {max_points} is too small; need more than 2")]
    BudgetTooSmall { max_points: usize },
    /// A configuration field violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// No admissible candidate frequency remains on the search grid.
    #[error("search grid exhausted: no admissible candidate frequency remains")]
    GridExhausted,
    /// The stopping metric's denominator max‖H_k‖ is zero.
    #[error("stopping metric undefined: current response is identically zero")]
    ZeroDenominator,
    /// Mismatched response lists.
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Loewner(#[from] LoewnerError),
}

/// Parameters of a constructive-interpolation run.
#[derive(Debug, Clone)]
pub struct CloeConfig {
    /// Band Ω = [omega_min, omega_max], rad/s.
    pub omega_min: f64,
    pub omega_max: f64,
    /// Evaluation budget r̄ (> 2): the loop runs while |I| ≤ r̄.
    pub max_points: usize,
    /// Relative stopping tolerance ε as a fraction in (0, 1).
    pub epsilon: f64,
    /// Size n_f of the fine search grid W_f (≥ 16).
    pub n_f: usize,
    /// Candidates added per iteration (1 or 2).
    pub points_per_iteration: usize,
    /// Anti-clustering guard: grid cells around each member of I that are
    /// excluded from candidate detection.
    pub guard_cells: usize,
    /// Relative rank threshold passed to the Loewner projection.
    pub rank_tol: f64,
}

impl Default for CloeConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e-3,
            omega_max: 1e3,
            max_points: 40,
            epsilon: 0.05,
            n_f: 400,
            points_per_iteration: 2,
            guard_cells: 2,
            rank_tol: 1e-10,
        }
    }
}

impl CloeConfig {
    pub fn validate(&self) -> Result<(), CloeError> {
        if self.max_points <= 2 {
            return Err(CloeError::BudgetTooSmall {
                max_points: self.max_points,
            });
        }
        if !self.omega_min.is_finite()
            || !self.omega_max.is_finite()
            || self.omega_min <= 0.0
            || self.omega_min >= self.omega_max
        {
            return Err(CloeError::InvalidConfig(format!(
                "band [{}, {}] must satisfy 0 < omega_min < omega_max",
                self.omega_min, self.omega_max
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CloeError::InvalidConfig(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        if self.n_f < 16 {
            return Err(CloeError::InvalidConfig(format!(
                "fine grid size {} must be at least 16",
                self.n_f
            )));
        }
        if !(self.points_per_iteration == 1 || self.points_per_iteration == 2) {
            return Err(CloeError::InvalidConfig(format!(
                "points_per_iteration {} must be 1 or 2",
                self.points_per_iteration
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(CloeError::InvalidConfig(format!(
                "rank_tol {} must lie in (0, 1)",
                self.rank_tol
            )));
        }
        Ok(())
    }
}

/// The expensive ground-truth system G, abstracted as a frequency-response
/// service with call accounting. Repeated evaluations at a frequency already
/// served must hit a cache and leave `call_count` unchanged.
pub trait Oracle {
    fn outputs(&self) -> usize;
    fn inputs(&self) -> usize;
    /// Response G(jω). Counts one call per distinct frequency.
    fn evaluate(&mut self, omega: f64) -> Result<DMatrix<Complex64>, LtiError>;
    /// Number of distinct frequencies evaluated so far.
    fn call_count(&self) -> usize;
    /// Nearest frequency this oracle can actually serve. Identity for
    /// continuously evaluable systems; tabulated datasets snap to their
    /// nearest stored frequency.
    fn snap(&self, omega: f64) -> f64 {
        omega
    }
}

/// Oracle backed by a state-space model; every distinct frequency costs one
/// counted evaluation, repeats are served from a cache.
pub struct ModelOracle {
    model: StateSpaceModel,
    cache: HashMap<u64, DMatrix<Complex64>>,
    calls: usize,
}

impl ModelOracle {
    pub fn new(model: StateSpaceModel) -> Self {
        Self {
            model,
            cache: HashMap::new(),
            calls: 0,
        }
    }

    pub fn model(&self) -> &StateSpaceModel {
        &self.model
    }
}

impl Oracle for ModelOracle {
    fn outputs(&self) -> usize {
        self.model.outputs()
    }

    fn inputs(&self) -> usize {
        self.model.inputs()
    }

    fn evaluate(&mut self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        if let Some(resp) = self.cache.get(&omega.to_bits()) {
            return Ok(resp.clone());
        }
        let resp = self.model.response(omega)?;
        self.cache.insert(omega.to_bits(), resp.clone());
        self.calls += 1;
        Ok(resp)
    }

    fn call_count(&self) -> usize {
        self.calls
    }
}

/// Oracle backed by a fixed table of samples. Queries must land exactly on
/// stored frequencies; `snap` maps any frequency to the nearest stored one,
/// and the run terminates once all admissible stored points are used up.
pub struct TabulatedOracle {
    samples: Vec<FrequencySample>,
    served: HashMap<u64, ()>,
    calls: usize,
}

impl TabulatedOracle {
    pub fn new(mut samples: Vec<FrequencySample>) -> Result<Self, CloeError> {
        if samples.is_empty() {
            return Err(CloeError::InvalidConfig("no tabulated samples".into()));
        }
        samples.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
        let (m, p) = (samples[0].response.nrows(), samples[0].response.ncols());
        for pair in samples.windows(2) {
            if pair[0].omega == pair[1].omega {
                return Err(CloeError::Loewner(LoewnerError::DuplicateFrequency {
                    omega: pair[0].omega,
                }));
            }
        }
        if samples
            .iter()
            .any(|s| s.response.nrows() != m || s.response.ncols() != p)
        {
            return Err(CloeError::Mismatch(
                "tabulated samples have inconsistent dimensions".into(),
            ));
        }
        Ok(Self {
            samples,
            served: HashMap::new(),
            calls: 0,
        })
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.omega).collect()
    }

    fn nearest(&self, omega: f64) -> usize {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            let gap = (s.omega - omega).abs();
            if gap < best_gap {
                best = i;
                best_gap = gap;
            }
        }
        best
    }
}

impl Oracle for TabulatedOracle {
    fn outputs(&self) -> usize {
        self.samples[0].response.nrows()
    }

    fn inputs(&self) -> usize {
        self.samples[0].response.ncols()
    }

    fn evaluate(&mut self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        let i = self.nearest(omega);
        if self.samples[i].omega != omega {
            return Err(LtiError::InvalidRange(format!(
                "frequency {omega} is not tabulated; nearest is {}",
                self.samples[i].omega
            )));
        }
        if self.served.insert(omega.to_bits(), ()).is_none() {
            self.calls += 1;
        }
        Ok(self.samples[i].response.clone())
    }

    fn call_count(&self) -> usize {
        self.calls
    }

    fn snap(&self, omega: f64) -> f64 {
        self.samples[self.nearest(omega)].omega
    }
}

/// The spectral-norm curve f(ω) = ‖H(jω)‖₂ of a model over W_f, with its
/// log-log finite-difference slope.
#[derive(Debug, Clone)]
pub struct NormCurve {
    pub grid: FrequencyGrid,
    pub f: Vec<f64>,
    pub slope: Vec<f64>,
}

/// Floor applied to f before taking logarithms, so identically-zero stretches
/// produce zero slope instead of NaN.
const LOG_FLOOR: f64 = 1e-300;

impl NormCurve {
    /// Builds the curve from precomputed responses (one per grid point).
    /// Slopes are central differences of log10 f against log10 ω, one-sided
    /// at the endpoints.
    pub fn from_responses(grid: FrequencyGrid, responses: &[DMatrix<Complex64>]) -> Self {
        assert_eq!(grid.len(), responses.len(), "one response per grid point");
        let f: Vec<f64> = responses.iter().map(spectral_norm).collect();
        let lf: Vec<f64> = f.iter().map(|&x| x.max(LOG_FLOOR).log10()).collect();
        let lw: Vec<f64> = grid
            .points()
            .iter()
            .map(|&w| w.max(LOG_FLOOR).log10())
            .collect();
        let n = f.len();
        let mut slope = vec![0.0; n];
        for (i, s) in slope.iter_mut().enumerate() {
            let (lo, hi) = match i {
                0 => (0, 1.min(n - 1)),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            let dw = lw[hi] - lw[lo];
            *s = if dw != 0.0 {
                (lf[hi] - lf[lo]) / dw
            } else {
                0.0
            };
        }
        Self { grid, f, slope }
    }
}

/// Evaluates an interpolant over the grid and builds its [`NormCurve`].
pub fn norm_curve(h: &Interpolant, grid: &FrequencyGrid) -> Result<NormCurve, LtiError> {
    let responses = grid
        .points()
        .iter()
        .map(|&w| h.response(w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NormCurve::from_responses(grid.clone(), &responses))
}

/// How a candidate frequency was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Peak,
    Valley,
    MaxSlope,
    MinSlope,
}

/// A detected candidate frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Candidate {
    pub omega: f64,
    pub kind: CandidateKind,
}

/// Selects up to `count` enrichment frequencies from the norm curve.
///
/// Phase 1 finds sign changes of the slope: + → − is a peak, − → + a
/// valley; the peak with the largest f and the valley with the smallest f
/// fill the first two slots. Phase 2 fills remaining slots with the
/// admissible index of maximal, then minimal, slope. Indices within
/// `guard_cells` grid cells of any member of `in_set` are inadmissible;
/// ties break toward the lower frequency.
pub fn detect_candidates(
    curve: &NormCurve,
    in_set: &[f64],
    guard_cells: usize,
    count: usize,
) -> Result<Vec<Candidate>, CloeError> {
    let n = curve.grid.len();
    let mut admissible = vec![true; n];
    for &omega in in_set {
        let c = curve.grid.nearest_index(omega);
        let lo = c.saturating_sub(guard_cells);
        let hi = (c + guard_cells).min(n - 1);
        for a in admissible.iter_mut().take(hi + 1).skip(lo) {
            *a = false;
        }
    }
    if admissible.iter().all(|&a| !a) {
        return Err(CloeError::GridExhausted);
    }

    let s = &curve.slope;
    let mut peaks: Vec<usize> = Vec::new();
    let mut valleys: Vec<usize> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if s[i] > 0.0 && s[i + 1] <= 0.0 && admissible[i + 1] {
            peaks.push(i + 1);
        }
        if s[i] < 0.0 && s[i + 1] >= 0.0 && admissible[i + 1] {
            valleys.push(i + 1);
        }
    }
    // Strict inequalities favour the lower index on exact ties.
    let best_peak = peaks
        .iter()
        .copied()
        .fold(None::<usize>, |best, i| match best {
            Some(b) if curve.f[i] > curve.f[b] => Some(i),
            Some(b) => Some(b),
            None => Some(i),
        });
    let best_valley = valleys
        .iter()
        .copied()
        .fold(None::<usize>, |best, i| match best {
            Some(b) if curve.f[i] < curve.f[b] => Some(i),
            Some(b) => Some(b),
            None => Some(i),
        });

    let mut chosen: Vec<(usize, CandidateKind)> = Vec::with_capacity(count);
    let mut taken = vec![false; n];
    let push = |idx: usize,
                kind: CandidateKind,
                chosen: &mut Vec<(usize, CandidateKind)>,
                taken: &mut Vec<bool>| {
        if chosen.len() < count && !taken[idx] {
            taken[idx] = true;
            chosen.push((idx, kind));
        }
    };
    if let Some(i) = best_peak {
        push(i, CandidateKind::Peak, &mut chosen, &mut taken);
    }
    if let Some(i) = best_valley {
        push(i, CandidateKind::Valley, &mut chosen, &mut taken);
    }
    // Phase 2: steepest rise, then steepest fall, among untaken admissible
    // indices.
    if chosen.len() < count {
        let pick = |cmp_better: &dyn Fn(f64, f64) -> bool, taken: &[bool]| -> Option<usize> {
            let mut best: Option<usize> = None;
            for i in 0..n {
                if !admissible[i] || taken[i] {
                    continue;
                }
                best = match best {
                    Some(b) if cmp_better(s[i], s[b]) => Some(i),
                    Some(b) => Some(b),
                    None => Some(i),
                };
            }
            best
        };
        if let Some(i) = pick(&|a, b| a > b, &taken) {
            push(i, CandidateKind::MaxSlope, &mut chosen, &mut taken);
        }
        if chosen.len() < count {
            if let Some(i) = pick(&|a, b| a < b, &taken) {
                push(i, CandidateKind::MinSlope, &mut chosen, &mut taken);
            }
        }
    }
    Ok(chosen
        .into_iter()
        .map(|(i, kind)| Candidate {
            omega: curve.grid.points()[i],
            kind,
        })
        .collect())
}

/// Relative model-movement metric between two response sets on W_f:
/// max_ω ‖prev − curr‖₂ / max_ω ‖curr‖₂.
pub fn stopping_metric(
    resp_prev: &[DMatrix<Complex64>],
    resp_curr: &[DMatrix<Complex64>],
) -> Result<f64, CloeError> {
    if resp_prev.len() != resp_curr.len() {
        return Err(CloeError::Mismatch(format!(
            "response lists have lengths {} and {}",
            resp_prev.len(),
            resp_curr.len()
        )));
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (a, b) in resp_prev.iter().zip(resp_curr) {
        num = num.max(spectral_norm(&(a - b)));
        den = den.max(spectral_norm(b));
    }
    if den == 0.0 {
        return Err(CloeError::ZeroDenominator);
    }
    Ok(num / den)
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The stopping metric fell to ε or below.
    Converged,
    /// The point budget r̄ was exceeded.
    Budget,
    /// No admissible candidate frequency remained on W_f (or, for
    /// tabulated oracles, every snapped candidate was already used).
    GridExhausted,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::Budget => "budget",
            Termination::GridExhausted => "grid_exhausted",
        })
    }
}

/// One iteration of the enrichment loop.
#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    /// Iteration counter, starting at 1.
    pub k: usize,
    /// The interpolation set the iteration's model was built from, sorted.
    #[serde(rename = "I")]
    pub interpolation_set: Vec<f64>,
    /// Candidates detected this iteration (empty on the final one).
    pub candidates: Vec<Candidate>,
    /// Stopping metric against the previous model; absent at k = 1.
    pub e_tilde: Option<f64>,
    /// Singular values of [L, Ls], descending.
    pub sv_row: Vec<f64>,
    /// Singular values of [L; Ls], descending.
    pub sv_col: Vec<f64>,
    /// Realised interpolant order.
    pub nr: usize,
    /// Cumulative oracle calls at the end of the iteration.
    pub oracle_calls: usize,
}

/// Full record of a constructive-interpolation run.
#[derive(Debug, Clone, Serialize)]
pub struct CloeTrace {
    pub termination: Termination,
    pub iterations: Vec<IterationRecord>,
}

impl CloeTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// The final interpolation set, sorted ascending.
    pub fn final_set(&self) -> &[f64] {
        self.iterations
            .last()
            .map(|it| it.interpolation_set.as_slice())
            .unwrap_or(&[])
    }
}

/// Runs the constructive-interpolation loop against an oracle.
///
/// The interpolation set starts at (the oracle's snap of) the band
/// boundaries; while |I| ≤ r̄ the loop builds an interpolant from the data
/// gathered so far, stops once two consecutive models agree to ε on W_f
/// (never before the second iteration), and otherwise evaluates the oracle
/// at up to `points_per_iteration` detected candidates. Exhaustion of the
/// search grid is a recorded termination, not an error. On budget exits the
/// final evaluations are left unused by the returned model, faithfully
/// charging them to the accounting.
pub fn run_cloe<O: Oracle + ?Sized>(
    oracle: &mut O,
    config: &CloeConfig,
) -> Result<(Interpolant, CloeTrace), CloeError> {
    config.validate()?;
    let grid = log_grid(config.omega_min, config.omega_max, config.n_f)?;

    let mut set: Vec<f64> = Vec::new();
    let mut samples: Vec<FrequencySample> = Vec::new();
    let add_point = |omega: f64,
                     set: &mut Vec<f64>,
                     samples: &mut Vec<FrequencySample>,
                     oracle: &mut O|
     -> Result<bool, CloeError> {
        if set.contains(&omega) {
            return Ok(false);
        }
        let response = oracle.evaluate(omega)?;
        let pos = set.partition_point(|&w| w < omega);
        set.insert(pos, omega);
        samples.insert(pos, FrequencySample { omega, response });
        Ok(true)
    };

    for omega in [config.omega_min, config.omega_max] {
        add_point(oracle.snap(omega), &mut set, &mut samples, oracle)?;
    }
    if set.len() < 2 {
        return Err(CloeError::InvalidConfig(
            "oracle serves fewer than 2 distinct frequencies on the band boundary".into(),
        ));
    }

    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut prev_responses: Option<Vec<DMatrix<Complex64>>> = None;
    let mut model: Option<Interpolant> = None;
    let termination;
    let mut k = 0usize;

    loop {
        if set.len() > config.max_points {
            termination = Termination::Budget;
            break;
        }
        k += 1;
        let h = reduce_samples(&samples, config.rank_tol)?;
        let responses = grid
            .points()
            .iter()
            .map(|&w| h.response(w))
            .collect::<Result<Vec<_>, LtiError>>()?;
        let e_tilde = match &prev_responses {
            None => None,
            Some(prev) => match stopping_metric(prev, &responses) {
                Ok(e) => Some(e),
                // Two identically-zero models agree exactly; treat the
                // degenerate 0/0 as converged rather than failing the run.
                Err(CloeError::ZeroDenominator) if prev.iter().all(|m| spectral_norm(m) == 0.0) => {
                    Some(0.0)
                }
                Err(e) => return Err(e),
            },
        };

        let mut record = IterationRecord {
            k,
            interpolation_set: set.clone(),
            candidates: Vec::new(),
            e_tilde,
            sv_row: h.sv_row.clone(),
            sv_col: h.sv_col.clone(),
            nr: h.order,
            oracle_calls: oracle.call_count(),
        };

        if e_tilde.is_some_and(|e| e <= config.epsilon) {
            iterations.push(record);
            model = Some(h);
            termination = Termination::Converged;
            break;
        }

        let curve = NormCurve::from_responses(grid.clone(), &responses);
        let candidates = match detect_candidates(
            &curve,
            &set,
            config.guard_cells,
            config.points_per_iteration,
        ) {
            Ok(c) => c,
            Err(CloeError::GridExhausted) => {
                iterations.push(record);
                model = Some(h);
                termination = Termination::GridExhausted;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut added = 0usize;
        for cand in &candidates {
            let snapped = oracle.snap(cand.omega);
            if add_point(snapped, &mut set, &mut samples, oracle)? {
                added += 1;
            }
        }
        record.candidates = candidates;
        record.oracle_calls = oracle.call_count();
        iterations.push(record);
        model = Some(h);
        prev_responses = Some(responses);
        if added == 0 {
            // Every candidate snapped onto an already-used frequency: the
            // servable grid is exhausted even though W_f is not.
            termination = Termination::GridExhausted;
            break;
        }
    }

    let trace = CloeTrace {
        termination,
        iterations,
    };
    let model = model.expect("loop always builds at least one model");
    Ok((model, trace))
}
