//! Loewner-pencil assembly, rank-revealing projection and realification.
//!
//! Given tangential frequency data — left points (μ_j, ℓ_j, v_j) and right
//! points (λ_i, r_i, w_i) — the Loewner and shifted-Loewner matrices are
//!
//! ```text
//! L[j,i]  = (v_j r_i − ℓ_j w_i) / (μ_j − λ_i)
//! Ls[j,i] = (μ_j v_j r_i − λ_i ℓ_j w_i) / (μ_j − λ_i)
//! ```
//!
//! and satisfy the Sylvester identities `Ls = L·Λ + V·R` and
//! `Ls = M·L + Lᵈ·W`. Projecting (L, Ls, V, W) onto the leading singular
//! subspaces of the composed pencils yields a descriptor realisation whose
//! transfer function interpolates the data:
//!
//! ```text
//! Er = −Y*·L·X,  Ar = −Y*·Ls·X,  Br = Y*·V,  Cr = W·X
//! H(s) = Cr (s·Er − Ar)⁻¹ Br
//! ```
//!
//! Data sampled on the imaginary axis from a real system is closed under
//! conjugation; a block-unitary change of basis ([`realify`]) then turns the
//! whole pencil exactly real, so the realised matrices are real too.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::lti::{constant_model, FrequencySample, LtiError, StateSpaceModel};

/// Errors from dataset preparation, pencil assembly and realisation.
#[derive(Debug, Error)]
pub enum LoewnerError {
    /// Two samples share the same frequency.
    #[error("duplicate sample frequency {omega}")]
    DuplicateFrequency { omega: f64 },
    /// Malformed sample list (negative frequency, inconsistent dimensions).
    #[error("invalid data: {0}")]
    InvalidData(String),
    /// Not enough conjugate units to populate both partitions.
    #[error("insufficient data: need at least 2 conjugate units, got {units}")]
    InsufficientData { units: usize },
    /// The point list is not a sequence of adjacent conjugate pairs (plus
    /// real singletons), or the data failed the post-realification realness
    /// check.
    #[error("data not closed under conjugation: {0}")]
    NotConjugateClosed(String),
    /// A left and a right point (nearly) coincide; the divided difference
    /// would divide by ~0.
    #[error("coincident interpolation points mu = {mu}, lambda = {lambda}")]
    CoincidentPoints { mu: Complex64, lambda: Complex64 },
    /// The pencil has numerical rank zero (identically zero data); there is
    /// nothing to realise.
    #[error("pencil has numerical rank zero")]
    RankZero,
    /// Operation requires a realified interpolant.
    #[error("interpolant is complex; realify the pencil before conversion")]
    NotRealified,
}

/// One right (column) interpolation point: H(λ)·r = w.
#[derive(Debug, Clone)]
pub struct RightPoint {
    pub lambda: Complex64,
    /// Unit-norm tangential direction, length p.
    pub direction: DVector<Complex64>,
    /// Response along the direction, length m.
    pub w: DVector<Complex64>,
}

/// One left (row) interpolation point: ℓᵀ·H(μ) = vᵀ.
#[derive(Debug, Clone)]
pub struct LeftPoint {
    pub mu: Complex64,
    /// Unit-norm tangential direction, length m.
    pub direction: DVector<Complex64>,
    /// Response along the direction, length p (stored as a column, used as
    /// a row).
    pub v: DVector<Complex64>,
}

/// Partitioned tangential data feeding [`build_pencil`].
#[derive(Debug, Clone)]
pub struct TangentialDataset {
    pub right: Vec<RightPoint>,
    pub left: Vec<LeftPoint>,
    pub outputs: usize,
    pub inputs: usize,
    /// The distinct nonnegative sample frequencies this data came from,
    /// ascending. Carried through to the interpolant's provenance.
    pub source_omegas: Vec<f64>,
}

/// Closes a set of imaginary-axis samples under conjugation.
///
/// Each ω > 0 contributes the adjacent pair (jω, Φ), (−jω, conj Φ); ω = 0
/// contributes the single self-conjugate point (0, Re Φ) with the imaginary
/// part dropped. Output is ordered by ascending ω.
pub fn conjugate_augment(
    samples: &[FrequencySample],
) -> Result<Vec<(Complex64, DMatrix<Complex64>)>, LoewnerError> {
    let mut sorted: Vec<&FrequencySample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap());
    let mut points = Vec::with_capacity(2 * samples.len());
    for (idx, s) in sorted.iter().enumerate() {
        if !s.omega.is_finite() || s.omega < 0.0 {
            return Err(LoewnerError::InvalidData(format!(
                "sample frequency {} is not a finite nonnegative number",
                s.omega
            )));
        }
        if idx > 0 && s.omega == sorted[idx - 1].omega {
            return Err(LoewnerError::DuplicateFrequency { omega: s.omega });
        }
        if s.response.nrows() != sorted[0].response.nrows()
            || s.response.ncols() != sorted[0].response.ncols()
        {
            return Err(LoewnerError::InvalidData(
                "samples have inconsistent response dimensions".into(),
            ));
        }
        if s.omega == 0.0 {
            let real_part = s.response.map(|z| Complex64::new(z.re, 0.0));
            points.push((Complex64::new(0.0, 0.0), real_part));
        } else {
            points.push((Complex64::new(0.0, s.omega), s.response.clone()));
            points.push((Complex64::new(0.0, -s.omega), s.response.map(|z| z.conj())));
        }
    }
    Ok(points)
}

/// A conjugate unit inside an augmented point list: either an adjacent
/// (point, conjugate) pair or a single real point.
enum Unit {
    Pair(usize),
    Single(usize),
}

impl Unit {
    fn first(&self) -> usize {
        match *self {
            Unit::Pair(i) | Unit::Single(i) => i,
        }
    }
}

/// Scans an augmented list into conjugate units, validating the adjacency
/// pattern (each Im > 0 point immediately followed by its conjugate; Im = 0
/// points standalone).
fn scan_units(points: &[(Complex64, DMatrix<Complex64>)]) -> Result<Vec<Unit>, LoewnerError> {
    let mut units = Vec::new();
    let mut i = 0;
    while i < points.len() {
        let z = points[i].0;
        if z.im == 0.0 {
            units.push(Unit::Single(i));
            i += 1;
        } else if z.im > 0.0 {
            let Some(&(next, _)) = points.get(i + 1) else {
                return Err(LoewnerError::NotConjugateClosed(format!(
                    "point {z} has no conjugate partner"
                )));
            };
            if next != z.conj() {
                return Err(LoewnerError::NotConjugateClosed(format!(
                    "point {z} is followed by {next}, not its conjugate"
                )));
            }
            units.push(Unit::Pair(i));
            i += 2;
        } else {
            return Err(LoewnerError::NotConjugateClosed(format!(
                "point {z} (negative imaginary part) appears before its conjugate"
            )));
        }
    }
    Ok(units)
}

fn basis_vector(len: usize, index: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(len);
    v[index] = Complex64::new(1.0, 0.0);
    v
}

/// Splits conjugate-closed points into right/left tangential partitions.
///
/// Conjugate units are indivisible and alternate right/left in ascending
/// |frequency| order, first unit to the right. The i-th right unit (0-based)
/// gets direction e_{(i mod p)+1}, the j-th left unit e_{(j mod m)+1}; both
/// members of a pair share the (real) direction. w and v are computed from
/// the stored responses.
pub fn partition_tangential(
    points: &[(Complex64, DMatrix<Complex64>)],
    outputs: usize,
    inputs: usize,
) -> Result<TangentialDataset, LoewnerError> {
    for (z, resp) in points {
        if z.re != 0.0 {
            return Err(LoewnerError::InvalidData(format!(
                "point {z} is off the imaginary axis"
            )));
        }
        if resp.nrows() != outputs || resp.ncols() != inputs {
            return Err(LoewnerError::InvalidData(format!(
                "response is {}x{}, expected {outputs}x{inputs}",
                resp.nrows(),
                resp.ncols()
            )));
        }
    }
    let mut units = scan_units(points)?;
    if units.len() < 2 {
        return Err(LoewnerError::InsufficientData { units: units.len() });
    }
    units.sort_by(|a, b| {
        let fa = points[a.first()].0.im.abs();
        let fb = points[b.first()].0.im.abs();
        fa.partial_cmp(&fb).unwrap()
    });

    let mut right = Vec::new();
    let mut left = Vec::new();
    let mut n_right_units = 0usize;
    let mut n_left_units = 0usize;
    for (t, unit) in units.iter().enumerate() {
        let members: &[usize] = match unit {
            Unit::Pair(i) => &[*i, *i + 1],
            Unit::Single(i) => &[*i],
        };
        if t % 2 == 0 {
            let direction = basis_vector(inputs, n_right_units % inputs);
            n_right_units += 1;
            for &idx in members {
                let (lambda, ref resp) = points[idx];
                right.push(RightPoint {
                    lambda,
                    direction: direction.clone(),
                    w: resp * &direction,
                });
            }
        } else {
            let direction = basis_vector(outputs, n_left_units % outputs);
            n_left_units += 1;
            for &idx in members {
                let (mu, ref resp) = points[idx];
                left.push(LeftPoint {
                    mu,
                    direction: direction.clone(),
                    v: resp.transpose() * &direction,
                });
            }
        }
    }

    let mut source_omegas: Vec<f64> = points
        .iter()
        .filter(|(z, _)| z.im >= 0.0)
        .map(|(z, _)| z.im)
        .collect();
    source_omegas.sort_by(|a, b| a.partial_cmp(b).unwrap());

    Ok(TangentialDataset {
        right,
        left,
        outputs,
        inputs,
        source_omegas,
    })
}

/// The assembled Loewner pencil with its generator matrices.
///
/// Shapes: `l`, `ls` are q×k; `v` is q×p (stacked left-data rows); `w` is
/// m×k (stacked right-data columns); `mm` (q×q) and `lam` (k×k) hold the
/// left/right points (diagonal before realification, block-diagonal after);
/// `ldir` is q×m, `rdir` is p×k.
#[derive(Debug, Clone)]
pub struct LoewnerPencil {
    pub l: DMatrix<Complex64>,
    pub ls: DMatrix<Complex64>,
    pub v: DMatrix<Complex64>,
    pub w: DMatrix<Complex64>,
    pub mm: DMatrix<Complex64>,
    pub lam: DMatrix<Complex64>,
    pub ldir: DMatrix<Complex64>,
    pub rdir: DMatrix<Complex64>,
    /// Set by [`realify`]; all matrices are then exactly real.
    pub is_real: bool,
    /// Provenance: the sample frequencies behind the data, ascending.
    pub source_omegas: Vec<f64>,
    /// Left/right point lists as assembled (kept for realification and
    /// diagnostics; not updated by the realifying change of basis).
    pub left_points: Vec<Complex64>,
    pub right_points: Vec<Complex64>,
}

/// Relative threshold below which a left/right point separation counts as
/// coincident (divided-difference underflow guard).
const COINCIDENCE_TOL: f64 = 1e-14;

/// Residual-imaginary tolerance (relative to the Frobenius norm) accepted
/// after realification; larger residuals mean non-conjugate data.
const REALIFY_TOL: f64 = 1e-10;

/// Assembles the Loewner pencil from a tangential dataset.
pub fn build_pencil(data: &TangentialDataset) -> Result<LoewnerPencil, LoewnerError> {
    let k = data.right.len();
    let q = data.left.len();
    if k == 0 || q == 0 {
        return Err(LoewnerError::InsufficientData {
            units: (k > 0) as usize + (q > 0) as usize,
        });
    }
    let max_abs = data
        .right
        .iter()
        .map(|r| r.lambda.norm())
        .chain(data.left.iter().map(|l| l.mu.norm()))
        .fold(0.0f64, f64::max);

    let mut l = DMatrix::zeros(q, k);
    let mut ls = DMatrix::zeros(q, k);
    for (j, lp) in data.left.iter().enumerate() {
        for (i, rp) in data.right.iter().enumerate() {
            let gap = lp.mu - rp.lambda;
            if gap.norm() < COINCIDENCE_TOL * max_abs {
                return Err(LoewnerError::CoincidentPoints {
                    mu: lp.mu,
                    lambda: rp.lambda,
                });
            }
            // Unconjugated products: v_j·r_i and ℓ_j·w_i.
            let vr = lp.v.dot(&rp.direction);
            let lw = lp.direction.dot(&rp.w);
            l[(j, i)] = (vr - lw) / gap;
            ls[(j, i)] = (lp.mu * vr - rp.lambda * lw) / gap;
        }
    }

    let v = DMatrix::from_fn(q, data.inputs, |j, c| data.left[j].v[c]);
    let w = DMatrix::from_fn(data.outputs, k, |r, i| data.right[i].w[r]);
    let mm = DMatrix::from_fn(q, q, |r, c| {
        if r == c {
            data.left[r].mu
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let lam = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            data.right[r].lambda
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let ldir = DMatrix::from_fn(q, data.outputs, |j, c| data.left[j].direction[c]);
    let rdir = DMatrix::from_fn(data.inputs, k, |r, i| data.right[i].direction[r]);

    Ok(LoewnerPencil {
        l,
        ls,
        v,
        w,
        mm,
        lam,
        ldir,
        rdir,
        is_real: false,
        source_omegas: data.source_omegas.clone(),
        left_points: data.left.iter().map(|p| p.mu).collect(),
        right_points: data.right.iter().map(|p| p.lambda).collect(),
    })
}

/// Builds the block-diagonal unitary J for one side: a 2×2 block
/// (1/√2)·[[1, 1],[−j, j]] per adjacent conjugate pair, a 1 on real points.
fn realifying_transform(points: &[Complex64]) -> Result<DMatrix<Complex64>, LoewnerError> {
    let n = points.len();
    let mut j_mat = DMatrix::zeros(n, n);
    let s = 1.0 / 2.0f64.sqrt();
    let mut i = 0;
    while i < n {
        let z = points[i];
        if z.im == 0.0 {
            j_mat[(i, i)] = Complex64::new(1.0, 0.0);
            i += 1;
        } else if z.im > 0.0 && i + 1 < n && points[i + 1] == z.conj() {
            j_mat[(i, i)] = Complex64::new(s, 0.0);
            j_mat[(i, i + 1)] = Complex64::new(s, 0.0);
            j_mat[(i + 1, i)] = Complex64::new(0.0, -s);
            j_mat[(i + 1, i + 1)] = Complex64::new(0.0, s);
            i += 2;
        } else {
            return Err(LoewnerError::NotConjugateClosed(format!(
                "point list is not conjugate-adjacent at {z}"
            )));
        }
    }
    Ok(j_mat)
}

fn max_imag(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn truncate_imag(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.map(|z| Complex64::new(z.re, 0.0))
}

/// Applies the realifying change of basis to the whole pencil.
///
/// With J_q, J_k the block-unitary transforms for the left/right point
/// lists, every matrix is conjugated into the real basis:
///
/// ```text
/// L ← J_q L J_k*   Ls ← J_q Ls J_k*   M ← J_q M J_q*   Λ ← J_k Λ J_k*
/// V ← J_q V        W ← W J_k*         Lᵈ ← J_q Lᵈ      R ← R J_k*
/// ```
///
/// Unitarity preserves the transfer function and both Sylvester identities
/// exactly. For conjugate-closed data the images are real up to rounding;
/// the residual imaginary parts are checked against `1e-10` of each
/// Frobenius norm and then truncated to exactly zero.
pub fn realify(pencil: LoewnerPencil) -> Result<LoewnerPencil, LoewnerError> {
    let jq = realifying_transform(&pencil.left_points)?;
    let jk = realifying_transform(&pencil.right_points)?;
    let jk_adj = jk.adjoint();
    let jq_adj = jq.adjoint();

    let transformed = [
        ("L", &jq * &pencil.l * &jk_adj),
        ("Ls", &jq * &pencil.ls * &jk_adj),
        ("V", &jq * &pencil.v),
        ("W", &pencil.w * &jk_adj),
        ("M", &jq * &pencil.mm * &jq_adj),
        ("Lam", &jk * &pencil.lam * &jk_adj),
        ("Ldir", &jq * &pencil.ldir),
        ("Rdir", &pencil.rdir * &jk_adj),
    ];
    for (name, m) in &transformed {
        let scale = frobenius(m);
        if max_imag(m) > REALIFY_TOL * scale {
            return Err(LoewnerError::NotConjugateClosed(format!(
                "residual imaginary part of {name} exceeds {REALIFY_TOL:.0e} of its norm \
                 after realification"
            )));
        }
    }
    let [l, ls, v, w, mm, lam, ldir, rdir] = transformed.map(|(_, m)| truncate_imag(&m));
    Ok(LoewnerPencil {
        l,
        ls,
        v,
        w,
        mm,
        lam,
        ldir,
        rdir,
        is_real: true,
        source_omegas: pencil.source_omegas,
        left_points: pencil.left_points,
        right_points: pencil.right_points,
    })
}

impl LoewnerPencil {
    /// Row-composed pencil [L, Ls] (q×2k).
    fn row_pencil(&self) -> DMatrix<Complex64> {
        let (q, k) = self.l.shape();
        DMatrix::from_fn(q, 2 * k, |r, c| {
            if c < k {
                self.l[(r, c)]
            } else {
                self.ls[(r, c - k)]
            }
        })
    }

    /// Column-composed pencil [L; Ls] (2q×k).
    fn col_pencil(&self) -> DMatrix<Complex64> {
        let (q, k) = self.l.shape();
        DMatrix::from_fn(2 * q, k, |r, c| {
            if r < q {
                self.l[(r, c)]
            } else {
                self.ls[(r - q, c)]
            }
        })
    }

    /// Frobenius-relative residuals of the two Sylvester identities,
    /// (‖Ls − L·Λ − V·R‖, ‖Ls − M·L − Lᵈ·W‖) / ‖Ls‖.
    pub fn sylvester_residuals(&self) -> (f64, f64) {
        let scale = frobenius(&self.ls).max(f64::MIN_POSITIVE);
        let r1 = &self.ls - &self.l * &self.lam - &self.v * &self.rdir;
        let r2 = &self.ls - &self.mm * &self.l - &self.ldir * &self.w;
        (frobenius(&r1) / scale, frobenius(&r2) / scale)
    }

    /// Numerical rank of the pencil: the count of singular values above
    /// `rank_tol`·σ₁ in each composed pencil, reduced by `min` so the
    /// projection bases share a dimension. Both spectra are returned
    /// (descending) for drop monitoring.
    pub fn numerical_rank(&self, rank_tol: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let count = |m: &DMatrix<Complex64>| -> (usize, Vec<f64>) {
            let sv: Vec<f64> = m.singular_values().iter().copied().collect();
            let sigma1 = sv.first().copied().unwrap_or(0.0);
            let nu = sv.iter().filter(|&&s| s > rank_tol * sigma1).count();
            (nu, sv)
        };
        let (nu_row, sv_row) = count(&self.row_pencil());
        let (nu_col, sv_col) = count(&self.col_pencil());
        (nu_row.min(nu_col), sv_row, sv_col)
    }

    /// Projects the pencil onto its leading singular subspaces and returns
    /// the reduced realisation.
    ///
    /// With Y the leading ν left singular vectors of [L, Ls] and X the
    /// leading ν right singular vectors of [L; Ls]:
    /// Er = −Y*LX, Ar = −Y*LsX, Br = Y*V, Cr = WX.
    ///
    /// Constant data has McMillan degree zero: L vanishes (its numerator is
    /// a difference of equal responses) and there is no strictly proper part
    /// to realise. That case is reported as [`LoewnerError::RankZero`]
    /// rather than silently returning a feedthrough-equivalent descriptor;
    /// the pipeline level decides how to represent the constant.
    pub fn realize(&self, rank_tol: f64) -> Result<Interpolant, LoewnerError> {
        let (nu, sv_row, sv_col) = self.numerical_rank(rank_tol);
        let scale = sv_row.first().copied().unwrap_or(0.0);
        if nu == 0 || self.l.norm() <= rank_tol * scale {
            return Err(LoewnerError::RankZero);
        }
        let row_svd = self.row_pencil().svd(true, false);
        let col_svd = self.col_pencil().svd(false, true);
        let u = row_svd.u.as_ref().expect("left vectors requested");
        let v_t = col_svd.v_t.as_ref().expect("right vectors requested");
        let y = u.columns(0, nu).clone_owned();
        let x = v_t.rows(0, nu).adjoint();

        let y_adj = y.adjoint();
        let mut er = -(&y_adj * &self.l * &x);
        let mut ar = -(&y_adj * &self.ls * &x);
        let mut br = &y_adj * &self.v;
        let mut cr = &self.w * &x;
        if self.is_real {
            // The composed pencils are exactly real, so their singular
            // vectors are too; truncation makes that an invariant rather
            // than a numerical accident.
            er = truncate_imag(&er);
            ar = truncate_imag(&ar);
            br = truncate_imag(&br);
            cr = truncate_imag(&cr);
        }
        Ok(Interpolant {
            er,
            ar,
            br,
            cr,
            d: None,
            order: nu,
            outputs: self.w.nrows(),
            inputs: self.v.ncols(),
            is_real: self.is_real,
            interpolation_set: self.source_omegas.clone(),
            sv_row,
            sv_col,
            rank_tol,
        })
    }
}

/// Reduced descriptor realisation H(s) = Cr (s·Er − Ar)⁻¹ Br + D produced
/// by the Loewner projection, with provenance metadata.
///
/// `d` is only ever present on the order-0 constant interpolant that stands
/// in for rank-zero (identically zero or constant) data; realised models
/// always have `d = None`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    pub er: DMatrix<Complex64>,
    pub ar: DMatrix<Complex64>,
    pub br: DMatrix<Complex64>,
    pub cr: DMatrix<Complex64>,
    pub d: Option<DMatrix<f64>>,
    pub order: usize,
    pub outputs: usize,
    pub inputs: usize,
    pub is_real: bool,
    /// The distinct sample frequencies the model was built from, ascending.
    pub interpolation_set: Vec<f64>,
    /// Singular values of [L, Ls], descending.
    pub sv_row: Vec<f64>,
    /// Singular values of [L; Ls], descending.
    pub sv_col: Vec<f64>,
    pub rank_tol: f64,
}

impl Interpolant {
    /// Order-0 constant interpolant H(s) ≡ d.
    pub fn constant(
        d: DMatrix<f64>,
        interpolation_set: Vec<f64>,
        sv_row: Vec<f64>,
        sv_col: Vec<f64>,
        rank_tol: f64,
    ) -> Self {
        let (m, p) = d.shape();
        Self {
            er: DMatrix::zeros(0, 0),
            ar: DMatrix::zeros(0, 0),
            br: DMatrix::zeros(0, p),
            cr: DMatrix::zeros(m, 0),
            d: Some(d),
            order: 0,
            outputs: m,
            inputs: p,
            is_real: true,
            interpolation_set,
            sv_row,
            sv_col,
            rank_tol,
        }
    }

    /// Evaluates H at an arbitrary complex point via an LU solve of
    /// (s·Er − Ar)·X = Br.
    pub fn transfer(&self, s: Complex64) -> Result<DMatrix<Complex64>, LtiError> {
        let mut resp = if self.order == 0 {
            DMatrix::zeros(self.outputs, self.inputs)
        } else {
            let pencil = {
                let mut m = self.ar.map(|z| -z);
                for c in 0..self.order {
                    for r in 0..self.order {
                        m[(r, c)] += s * self.er[(r, c)];
                    }
                }
                m
            };
            let x = pencil
                .lu()
                .solve(&self.br)
                .filter(|x| x.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
                .ok_or(LtiError::SingularPencil { omega: s.im })?;
            &self.cr * x
        };
        if let Some(d) = &self.d {
            for c in 0..self.inputs {
                for r in 0..self.outputs {
                    resp[(r, c)] += d[(r, c)];
                }
            }
        }
        Ok(resp)
    }

    /// Frequency response H(jω).
    pub fn response(&self, omega: f64) -> Result<DMatrix<Complex64>, LtiError> {
        self.transfer(Complex64::new(0.0, omega))
    }

    /// Converts a realified interpolant into a plain real state-space
    /// model (descriptor form; Er may be singular).
    pub fn to_state_space(&self) -> Result<StateSpaceModel, LoewnerError> {
        if !self.is_real {
            return Err(LoewnerError::NotRealified);
        }
        if self.order == 0 {
            let d = self
                .d
                .clone()
                .unwrap_or_else(|| DMatrix::zeros(self.outputs, self.inputs));
            return Ok(constant_model(d));
        }
        StateSpaceModel::new(
            Some(self.er.map(|z| z.re)),
            self.ar.map(|z| z.re),
            self.br.map(|z| z.re),
            self.cr.map(|z| z.re),
            None,
        )
        .map_err(|e| LoewnerError::InvalidData(format!("realised model rejected: {e}")))
    }
}

/// Full reduction pipeline: conjugate-augment the samples, partition,
/// assemble, realify and realise. Rank-zero data — constant responses,
/// including identically zero ones — short-circuits to the order-0 constant
/// interpolant instead of erroring.
pub fn reduce_samples(
    samples: &[FrequencySample],
    rank_tol: f64,
) -> Result<Interpolant, LoewnerError> {
    if samples.is_empty() {
        return Err(LoewnerError::InsufficientData { units: 0 });
    }
    let (m, p) = (samples[0].response.nrows(), samples[0].response.ncols());
    let points = conjugate_augment(samples)?;
    let data = partition_tangential(&points, m, p)?;
    let pencil = realify(build_pencil(&data)?)?;
    match pencil.realize(rank_tol) {
        Ok(h) => Ok(h),
        Err(LoewnerError::RankZero) => {
            // The data carries no dynamics along any probed direction, so
            // the natural model is the averaged (real) response — exact
            // whenever the samples really are constant.
            let mut d = DMatrix::zeros(m, p);
            for s in samples {
                d += s.response.map(|z| z.re);
            }
            d /= samples.len() as f64;
            let (_, sv_row, sv_col) = pencil.numerical_rank(rank_tol);
            Ok(Interpolant::constant(
                d,
                pencil.source_omegas.clone(),
                sv_row,
                sv_col,
                rank_tol,
            ))
        }
        Err(e) => Err(e),
    }
}

/// Largest relative tangential residual of an interpolant against the
/// dataset it was built from: max over points of ‖H(λ)r − w‖/‖w‖ and
/// ‖ℓᵀH(μ) − vᵀ‖/‖v‖ (absolute where the data vector is zero).
pub fn tangential_residual(h: &Interpolant, data: &TangentialDataset) -> Result<f64, LtiError> {
    let mut worst = 0.0f64;
    for rp in &data.right {
        let resp = h.transfer(rp.lambda)?;
        let got = &resp * &rp.direction;
        let err_norm = (&got - &rp.w).norm();
        let scale = rp.w.norm();
        worst = worst.max(if scale > 0.0 {
            err_norm / scale
        } else {
            err_norm
        });
    }
    for lp in &data.left {
        let resp = h.transfer(lp.mu)?;
        let got = resp.transpose() * &lp.direction;
        let err_norm = (&got - &lp.v).norm();
        let scale = lp.v.norm();
        worst = worst.max(if scale > 0.0 {
            err_norm / scale
        } else {
            err_norm
        });
    }
    Ok(worst)
}
