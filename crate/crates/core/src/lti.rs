//! LTI systems in descriptor form, frequency grids and test-model generation.
//!
//! A [`StateSpaceModel`] holds the real matrices (E, A, B, C, D) of a
//! descriptor realisation with transfer function
//!
//! ```text
//! G(s) = C (sE - A)^{-1} B + D
//! ```
//!
//! Responses are evaluated by a dense LU solve per frequency; no inverse is
//! ever formed. All types are immutable after construction and safe to share
//! across threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Errors from model construction and transfer evaluation.
#[derive(Debug, Error)]
pub enum LtiError {
    /// The pencil (jωE - A) was numerically singular at the given frequency,
    /// i.e. jω sits on (or extremely close to) a pole.
    #[error("singular pencil at omega = {omega}")]
    SingularPencil { omega: f64 },
    /// A parameter range was empty, inverted or otherwise unusable.
    #[error("invalid range: {0}")]
    InvalidRange(String),
    /// Matrix dimensions are mutually inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// det(sE - A) vanished at every probe point; the pencil is singular as
    /// a function of s and the model has no transfer function.
    #[error("singular system: pencil det(sE - A) vanished at all probe points")]
    SingularSystem,
}

/// Fixed complex probe points used to test pencil regularity at construction.
/// Three generic points off the imaginary axis; a model whose pencil is
/// singular at all three is rejected.
const REGULARITY_PROBES: [Complex64; 3] = [
    Complex64::new(0.731, 1.372),
    Complex64::new(-1.194, 0.417),
    Complex64::new(2.318, -0.935),
];

/// Real descriptor realisation (E, A, B, C, D) of an LTI system with `n`
/// states, `p` inputs and `m` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    e: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    n: usize,
    m: usize,
    p: usize,
}

impl StateSpaceModel {
    /// Builds a model from its matrices, checking dimensional consistency and
    /// pencil regularity. `e = None` means the identity, `d = None` means zero.
    pub fn new(
        e: Option<DMatrix<f64>>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: Option<DMatrix<f64>>,
    ) -> Result<Self, LtiError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let e = e.unwrap_or_else(|| DMatrix::identity(n, n));
        if e.nrows() != n || e.ncols() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "E must be {n}x{n}, got {}x{}",
                e.nrows(),
                e.ncols()
            )));
        }
        if b.nrows() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "B must have {n} rows, got {}",
                b.nrows()
            )));
        }
        let p = b.ncols();
        if c.ncols() != n {
            return Err(LtiError::DimensionMismatch(format!(
                "C must have {n} columns, got {}",
                c.ncols()
            )));
        }
        let m = c.nrows();
        if m == 0 || p == 0 {
            return Err(LtiError::DimensionMismatch(
                "model needs at least one input and one output".into(),
            ));
        }
        let d = d.unwrap_or_else(|| DMatrix::zeros(m, p));
        if d.nrows() != m || d.ncols() != p {
            return Err(LtiError::DimensionMismatch(format!(
                "D must be {m}x{p}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        let model = Self {
            e,
            a,
            b,
            c,
            d,
            n,
            m,
            p,
        };
        if n > 0 {
            let regular = REGULARITY_PROBES
                .iter()
                .any(|&s| model.pencil_lu(s).solve(&model.b_complex()).is_some());
            if !regular {
                return Err(LtiError::SingularSystem);
            }
        }
        Ok(model)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn outputs(&self) -> usize {
        self.m
    }

    pub fn inputs(&self) -> usize {
        self.p
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    fn b_complex(&self) -> DMatrix<Complex64> {
        self.b.map(|x| Complex64::new(x, 0.0))
    }

    fn pencil_lu(
        &self,
        s: Complex64,
    ) -> nalgebra::linalg::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn> {
        let mut pencil = self.a.map(|x| Complex64::new(-x, 0.0));
        for j in 0..self.n {
            for i in 0..self.n {
                pencil[(i, j)] += s * self.e[(i, j)];
            }
        }
        pencil.lu()
    }

    /// Evaluates the transfer function at an arbitrary complex point:
    /// C·X + D where (sE - A)·X = B is solved columnwise.
    pub fn transfer(&self, s: Complex64) -> Result<DMatrix<Complex64>, LtiError> {
        if self.n == 0 {
            return Ok(self.d.map(|x| Complex64::new(x, 0.0)));
        }
        let x = self
            .pencil_lu(s)
            .solve(&self.b_complex())
            .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
            .ok_or(LtiError::SingularPencil { omega: s.im })?;
        let mut resp = self.c.map(|x| Complex64::new(x, 0.0)) * x;
        for j in 0..self.p {
            for i in 0..self.m {
                resp[(i, j)] += self.d[(i, j)];
            }
        }
        Ok(resp)
    }

    /// Frequency response G(jω).
    pub fn response(&self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        self.transfer(Complex64::new(0.0, omega))
    }

    /// Evaluates the response at every grid point, preserving order.
    pub fn sample(&self, grid: &FrequencyGrid) -> Result<Vec<FrequencySample>, LtiError> {
        grid.points()
            .iter()
            .map(|&omega| {
                Ok(FrequencySample {
                    omega,
                    response: self.response(omega)?,
                })
            })
            .collect()
    }

    /// Generalized eigenvalues of (E, A); plain eigenvalues of A when E is
    /// the identity. Used for pole summaries.
    pub fn poles(&self) -> Vec<Complex64> {
        if self.n == 0 {
            return Vec::new();
        }
        if self.e == DMatrix::identity(self.n, self.n) {
            return self.a.complex_eigenvalues().iter().copied().collect();
        }
        // E^{-1} A reduction; fine for the well-conditioned E of desk-scale models.
        match self.e.clone().lu().solve(&self.a) {
            Some(reduced) => reduced.complex_eigenvalues().iter().copied().collect(),
            None => Vec::new(),
        }
    }
}

/// One frequency-response sample: a frequency ω ≥ 0 in rad/s and the m×p
/// complex response matrix measured there.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySample {
    pub omega: f64,
    pub response: DMatrix<Complex64>,
}

/// How a grid's points were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Logarithmic,
    Explicit,
}

/// A strictly increasing list of real frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<f64>,
    spacing: GridSpacing,
}

impl FrequencyGrid {
    /// Wraps an explicit, strictly increasing list of finite frequencies.
    pub fn from_points(points: Vec<f64>) -> Result<Self, LtiError> {
        if points.is_empty() {
            return Err(LtiError::InvalidRange("grid must be nonempty".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(LtiError::InvalidRange("grid points must be finite".into()));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LtiError::InvalidRange(
                "grid points must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            points,
            spacing: GridSpacing::Explicit,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> GridSpacing {
        self.spacing
    }

    /// Index of the grid point closest to `omega` (log distance is not
    /// needed: the grid is strictly increasing, a binary search plus a
    /// neighbour comparison is exact).
    pub fn nearest_index(&self, omega: f64) -> usize {
        let pts = &self.points;
        match pts.binary_search_by(|x| x.partial_cmp(&omega).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == pts.len() => pts.len() - 1,
            Err(i) => {
                if (omega - pts[i - 1]).abs() <= (pts[i] - omega).abs() {
                    i - 1
                } else {
                    i
                }
            }
        }
    }
}

/// `n` log10-equispaced frequencies from `omega_min` to `omega_max`, both
/// endpoints exact.
pub fn log_grid(omega_min: f64, omega_max: f64, n: usize) -> Result<FrequencyGrid, LtiError> {
    if !omega_min.is_finite() || !omega_max.is_finite() || omega_min <= 0.0 {
        return Err(LtiError::InvalidRange(format!(
            "log grid needs finite 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"
        )));
    }
    if omega_min >= omega_max {
        return Err(LtiError::InvalidRange(format!(
            "omega_min {omega_min} must be below omega_max {omega_max}"
        )));
    }
    if n < 2 {
        return Err(LtiError::InvalidRange(format!(
            "log grid needs n >= 2, got {n}"
        )));
    }
    let l0 = omega_min.log10();
    let l1 = omega_max.log10();
    let step = (l1 - l0) / (n - 1) as f64;
    let mut points: Vec<f64> = (0..n).map(|i| 10f64.powf(l0 + i as f64 * step)).collect();
    points[0] = omega_min;
    points[n - 1] = omega_max;
    Ok(FrequencyGrid {
        points,
        spacing: GridSpacing::Logarithmic,
    })
}

/// Largest singular value of a complex matrix; 0 for the zero matrix.
pub fn spectral_norm(matrix: &DMatrix<Complex64>) -> f64 {
    if matrix.iter().all(|z| z.re == 0.0 && z.im == 0.0) {
        return 0.0;
    }
    let sv = matrix.singular_values();
    sv.iter().fold(0.0f64, |acc, &s| acc.max(s))
}

/// 64-bit linear congruential generator with Knuth's MMIX constants:
///
/// ```text
/// state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
/// ```
///
/// `next_f64` takes the top 53 bits of the advanced state, giving a uniform
/// value in [0, 1). The generator is fully specified here so that model
/// generation is bit-reproducible across languages and platforms.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    const MULT: u64 = 6364136223846793005;
    const INC: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::MULT).wrapping_add(Self::INC);
        self.state
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform in [lo, hi): uniform in log10 space.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        10f64.powf(self.uniform(lo.log10(), hi.log10()))
    }
}

/// Parameters for [`generate_modal_model`].
#[derive(Debug, Clone)]
pub struct ModalParams {
    pub seed: u64,
    pub n_modes: usize,
    /// Resonant frequencies are drawn log-uniformly from this range (rad/s).
    pub freq_range: (f64, f64),
    /// Damping ratios are drawn uniformly from this range; must sit in (0, 1).
    pub damping_range: (f64, f64),
    /// B and C entries are drawn uniformly from this range.
    pub gain_range: (f64, f64),
    pub outputs: usize,
    pub inputs: usize,
}

/// Generates a seeded resonant test model: block-diagonal A made of
/// `n_modes` second-order blocks
///
/// ```text
/// [   0        ω_i      ]
/// [ -ω_i   -2 ζ_i ω_i   ]
/// ```
///
/// with ω_i log-uniform in `freq_range` and ζ_i uniform in `damping_range`,
/// so every pole has strictly negative real part. B and C entries are
/// uniform in `gain_range`; E is the identity and D is zero.
///
/// Draw order (one [`Lcg64`] stream seeded with `seed`): per mode ω_i then
/// ζ_i, then all of B column by column, then all of C column by column. The
/// output is a pure function of the parameters.
pub fn generate_modal_model(params: &ModalParams) -> Result<StateSpaceModel, LtiError> {
    let ModalParams {
        seed,
        n_modes,
        freq_range: (f_lo, f_hi),
        damping_range: (z_lo, z_hi),
        gain_range: (g_lo, g_hi),
        outputs: m,
        inputs: p,
    } = *params;
    if n_modes < 1 {
        return Err(LtiError::InvalidRange("n_modes must be at least 1".into()));
    }
    if m < 1 || p < 1 {
        return Err(LtiError::InvalidRange(
            "need at least one input and output".into(),
        ));
    }
    if !f_lo.is_finite() || !f_hi.is_finite() || f_lo <= 0.0 || f_lo > f_hi {
        return Err(LtiError::InvalidRange(format!(
            "frequency range [{f_lo}, {f_hi}] must satisfy 0 < lo <= hi"
        )));
    }
    if !z_lo.is_finite() || !z_hi.is_finite() || z_lo <= 0.0 || z_lo > z_hi || z_hi >= 1.0 {
        return Err(LtiError::InvalidRange(format!(
            "damping range [{z_lo}, {z_hi}] must sit inside (0, 1)"
        )));
    }
    if g_lo > g_hi || !g_lo.is_finite() || !g_hi.is_finite() {
        return Err(LtiError::InvalidRange(format!(
            "gain range [{g_lo}, {g_hi}] is inverted or not finite"
        )));
    }

    let n = 2 * n_modes;
    let mut rng = Lcg64::new(seed);
    let mut a = DMatrix::zeros(n, n);
    for mode in 0..n_modes {
        let omega = rng.log_uniform(f_lo, f_hi);
        let zeta = rng.uniform(z_lo, z_hi);
        let i = 2 * mode;
        a[(i, i + 1)] = omega;
        a[(i + 1, i)] = -omega;
        a[(i + 1, i + 1)] = -2.0 * zeta * omega;
    }
    let b = DMatrix::from_fn(n, p, |_, _| rng.uniform(g_lo, g_hi));
    let c = DMatrix::from_fn(m, n, |_, _| rng.uniform(g_lo, g_hi));
    StateSpaceModel::new(None, a, b, c, None)
}

/// Convenience for tests and examples: the first-order lag 1/(s + 1).
pub fn first_order_lag() -> StateSpaceModel {
    StateSpaceModel::new(
        None,
        DMatrix::from_element(1, 1, -1.0),
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, 1.0),
        None,
    )
    .expect("1/(s+1) is regular")
}

/// Constant (order-zero) model: G(s) = D.
pub fn constant_model(d: DMatrix<f64>) -> StateSpaceModel {
    let (m, p) = (d.nrows(), d.ncols());
    StateSpaceModel::new(
        None,
        DMatrix::zeros(0, 0),
        DMatrix::zeros(0, p),
        DMatrix::zeros(m, 0),
        Some(d),
    )
    .expect("constant models are always regular")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lag_static_gain_is_one() {
        let g = first_order_lag();
        let r = g.response(0.0).unwrap();
        assert_relative_eq!(r[(0, 0)].re, 1.0, max_relative = 1e-14);
        assert_eq!(r[(0, 0)].im, 0.0);
    }

    #[test]
    fn lag_at_omega_one_matches_hand_evaluation() {
        // 1/(1+j) = 0.5 - 0.5j; cross-checked by solving (j·1 - (-1))x = 1 directly.
        let g = first_order_lag();
        let r = g.response(1.0).unwrap()[(0, 0)];
        let denom = c(1.0, 1.0);
        let direct = c(1.0, 0.0) / denom;
        assert_relative_eq!(r.re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r.im, -0.5, max_relative = 1e-14);
        assert!((r - direct).norm() < 1e-15);
    }

    #[test]
    fn constant_model_returns_d_everywhere() {
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let g = constant_model(d.clone());
        for omega in [0.0, 1.0, 123.4] {
            let r = g.response(omega).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(r[(i, j)], c(d[(i, j)], 0.0));
                }
            }
        }
    }

    #[test]
    fn singular_system_rejected() {
        // E = 0 and A = 0 makes det(sE - A) identically zero.
        let err = StateSpaceModel::new(
            Some(DMatrix::zeros(1, 1)),
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, LtiError::SingularSystem));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = StateSpaceModel::new(
            None,
            DMatrix::zeros(2, 2),
            DMatrix::zeros(3, 1), // wrong row count
            DMatrix::zeros(1, 2),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, LtiError::DimensionMismatch(_)));
    }

    #[test]
    fn sample_matches_pointwise_evaluation_exactly() {
        let g = first_order_lag();
        let grid = log_grid(0.1, 10.0, 5).unwrap();
        let samples = g.sample(&grid).unwrap();
        assert_eq!(samples.len(), 5);
        for (s, &omega) in samples.iter().zip(grid.points()) {
            assert_eq!(s.omega, omega);
            assert_eq!(s.response, g.response(omega).unwrap());
        }
    }

    #[test]
    fn sample_constant_gives_identical_rows() {
        let g = constant_model(DMatrix::from_element(1, 1, 4.0));
        let grid = FrequencyGrid::from_points(vec![1.0, 2.0, 3.0]).unwrap();
        let samples = g.sample(&grid).unwrap();
        assert_eq!(samples.len(), 3);
        assert_eq!(samples[0].response, samples[1].response);
        assert_eq!(samples[1].response, samples[2].response);
    }

    #[test]
    fn spectral_norm_basics() {
        assert_eq!(spectral_norm(&DMatrix::zeros(2, 2)), 0.0);
        let diag =
            DMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_relative_eq!(spectral_norm(&diag), 3.0, max_relative = 1e-12);
    }

    /// Closed-form 2x2 singular values from the eigenvalues of M*M, used as
    /// an independent oracle for the SVD-backed implementation.
    fn svd2x2_sigma_max(m: &DMatrix<Complex64>) -> f64 {
        let t: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let d = det.norm_sqr();
        ((t + (t * t - 4.0 * d).max(0.0).sqrt()) / 2.0).sqrt()
    }

    #[test]
    fn spectral_norm_matches_closed_form_2x2() {
        let nilpotent =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_relative_eq!(svd2x2_sigma_max(&nilpotent), 2.0, max_relative = 1e-14);
        assert_relative_eq!(spectral_norm(&nilpotent), 2.0, max_relative = 1e-12);

        let mut rng = Lcg64::new(7);
        for _ in 0..50 {
            let m = DMatrix::from_fn(2, 2, |_, _| {
                c(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0))
            });
            assert_relative_eq!(
                spectral_norm(&m),
                svd2x2_sigma_max(&m),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn log_grid_decades() {
        let g = log_grid(1.0, 100.0, 3).unwrap();
        assert_eq!(g.points()[0], 1.0);
        assert_relative_eq!(g.points()[1], 10.0, max_relative = 1e-14);
        assert_eq!(g.points()[2], 100.0);

        let g = log_grid(1e-3, 1e3, 7).unwrap();
        let expected = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];
        for (got, want) in g.points().iter().zip(expected) {
            assert_relative_eq!(*got, want, max_relative = 1e-13);
        }
        assert_eq!(g.points()[0], 1e-3);
        assert_eq!(g.points()[6], 1e3);
    }

    #[test]
    fn log_grid_rejects_bad_ranges() {
        assert!(matches!(
            log_grid(1.0, 1.0, 3),
            Err(LtiError::InvalidRange(_))
        ));
        assert!(matches!(
            log_grid(-1.0, 1.0, 3),
            Err(LtiError::InvalidRange(_))
        ));
        assert!(matches!(
            log_grid(1.0, 10.0, 1),
            Err(LtiError::InvalidRange(_))
        ));
    }

    #[test]
    fn grid_nearest_index() {
        let g = FrequencyGrid::from_points(vec![1.0, 2.0, 4.0, 8.0]).unwrap();
        assert_eq!(g.nearest_index(0.5), 0);
        assert_eq!(g.nearest_index(2.0), 1);
        assert_eq!(g.nearest_index(2.9), 1);
        assert_eq!(g.nearest_index(3.1), 2);
        assert_eq!(g.nearest_index(100.0), 3);
    }

    #[test]
    fn modal_generator_is_deterministic() {
        let params = ModalParams {
            seed: 1,
            n_modes: 3,
            freq_range: (0.1, 100.0),
            damping_range: (0.05, 0.4),
            gain_range: (-1.0, 1.0),
            outputs: 2,
            inputs: 2,
        };
        let g1 = generate_modal_model(&params).unwrap();
        let g2 = generate_modal_model(&params).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.order(), 6);
    }

    #[test]
    fn modal_generator_poles_strictly_stable() {
        for seed in [1, 2, 3, 17] {
            let g = generate_modal_model(&ModalParams {
                seed,
                n_modes: 4,
                freq_range: (0.01, 1000.0),
                damping_range: (0.01, 0.9),
                gain_range: (-2.0, 2.0),
                outputs: 1,
                inputs: 1,
            })
            .unwrap();
            for pole in g.poles() {
                assert!(
                    pole.re < 0.0,
                    "seed {seed}: pole {pole} not strictly stable"
                );
            }
        }
    }

    #[test]
    fn modal_generator_rejects_bad_ranges() {
        let mut params = ModalParams {
            seed: 1,
            n_modes: 0,
            freq_range: (0.1, 100.0),
            damping_range: (0.05, 0.4),
            gain_range: (-1.0, 1.0),
            outputs: 1,
            inputs: 1,
        };
        assert!(matches!(
            generate_modal_model(&params),
            Err(LtiError::InvalidRange(_))
        ));
        params.n_modes = 2;
        params.damping_range = (0.4, 0.05);
        assert!(matches!(
            generate_modal_model(&params),
            Err(LtiError::InvalidRange(_))
        ));
        params.damping_range = (0.0, 0.4);
        assert!(matches!(
            generate_modal_model(&params),
            Err(LtiError::InvalidRange(_))
        ));
        params.damping_range = (0.05, 0.4);
        params.freq_range = (10.0, 1.0);
        assert!(matches!(
            generate_modal_model(&params),
            Err(LtiError::InvalidRange(_))
        ));
    }

    #[test]
    fn conjugate_symmetry_of_real_models() {
        let g = generate_modal_model(&ModalParams {
            seed: 5,
            n_modes: 3,
            freq_range: (0.1, 50.0),
            damping_range: (0.1, 0.5),
            gain_range: (-1.0, 1.0),
            outputs: 2,
            inputs: 3,
        })
        .unwrap();
        for omega in [0.3, 1.7, 42.0] {
            let plus = g.response(omega).unwrap();
            let minus = g.transfer(Complex64::new(0.0, -omega)).unwrap();
            for i in 0..2 {
                for j in 0..3 {
                    let diff = (minus[(i, j)] - plus[(i, j)].conj()).norm();
                    assert!(diff <= 1e-12 * plus[(i, j)].norm().max(1.0));
                }
            }
        }
    }
}
