//! Degenerate-elliptic extension solves: per-mode finite-volume solutions of
//! div(y^a grad U) = 0 on a graded mesh, Dirichlet-to-Neumann extraction for
//! a in (-1, 1), the iterated extraction for higher orders, the downshift
//! consistency check, and the full operator assembled mode by mode.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fracparams::FracParams;
use crate::special;
use crate::spectral::{self, GridFunction};

/// One-sided graded mesh y_j = Y (j/N)^p, j = 0..=N. The grading clusters
/// nodes at y = 0 to resolve the y^{2 gamma} boundary layer.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    y_max: f64,
    n_cells: usize,
    grading: f64,
    nodes: Vec<f64>,
}

impl GradedMesh {
    pub fn new(y_max: f64, n_cells: usize, grading: f64) -> Result<Self> {
        if !(y_max > 0.0) || !y_max.is_finite() {
            return Err(Error::InvalidMesh(format!("Y = {y_max} must be positive")));
        }
        if n_cells < 32 {
            return Err(Error::InvalidMesh(format!(
                "N = {n_cells} too small (need >= 32)"
            )));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(Error::InvalidMesh(format!(
                "grading p = {grading} must be >= 1"
            )));
        }
        let nodes: Vec<f64> = (0..=n_cells)
            .map(|j| y_max * (j as f64 / n_cells as f64).powf(grading))
            .collect();
        // strict monotonicity can fail only if the grading underflows
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidMesh("nodes not strictly increasing".into()));
        }
        Ok(Self {
            y_max,
            n_cells,
            grading,
            nodes,
        })
    }

    /// Default grading exponent: resolves the y^{2 gamma0} layer.
    pub fn default_grading(gamma0: f64) -> f64 {
        (1.0 / gamma0).max(2.0)
    }

    pub fn with_default_grading(y_max: f64, n_cells: usize, gamma0: f64) -> Result<Self> {
        Self::new(y_max, n_cells, Self::default_grading(gamma0))
    }

    /// Same node count and grading with the height rescaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.y_max * factor, self.n_cells, self.grading)
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }
    pub fn grading(&self) -> f64 {
        self.grading
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// One Fourier mode's extension profile U(y_j), U(0) = 1, U(Y) = 0 for
/// kmag > 0 and U identically 1 for kmag = 0.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub kmag: f64,
    pub params: FracParams,
    pub mesh: GradedMesh,
    pub values: Vec<f64>,
}

impl ModeProfile {
    /// Linear interpolation of U at height y0.
    pub fn value_at(&self, y0: f64) -> f64 {
        let y = self.mesh.nodes();
        if y0 <= 0.0 {
            return self.values[0];
        }
        if y0 >= *y.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let j = y.partition_point(|&v| v < y0);
        let t = (y0 - y[j - 1]) / (y[j] - y[j - 1]);
        self.values[j - 1] * (1.0 - t) + self.values[j] * t
    }
}

/// Output of a Dirichlet-to-Neumann extraction.
#[derive(Debug, Clone, Copy)]
pub struct DtnResult {
    /// Fitted coefficient of y^{2 gamma} (y^{2 gamma0} on the iterated path).
    pub h_estimate: f64,
    /// lim_{y -> 0} y^a dU/dy (the iterated analogue for m >= 1).
    pub limit_value: f64,
    /// The operator value on this mode after normalization by d_gamma.
    pub p_gamma_value: f64,
    /// Spread between independent fits, scaled to p_gamma units.
    pub error_estimate: f64,
    /// Whether the convention had to flip the sign of the normalized chain to
    /// match the positive multiplier. The d_gamma < 0 and h < 0 signs cancel,
    /// so no flip is ever applied; recorded for the output contract.
    pub sign_flipped: bool,
}

/// Solve the mode equation (y^a U')' = y^a kmag^2 U with U(0) = 1 and a
/// far-field Dirichlet condition U(Y) = 0, in conservative finite-volume
/// form. Flux weights between adjacent nodes are exact for y^a U' = const,
/// which is what resolves the boundary layer:
/// w_{j+1/2} = (1 - a) / (y_{j+1}^{1-a} - y_j^{1-a}).
pub fn solve_mode(kmag: f64, params: &FracParams, mesh: &GradedMesh) -> Result<ModeProfile> {
    if !(kmag >= 0.0) || !kmag.is_finite() {
        return Err(Error::NonFiniteValue);
    }
    let y = mesh.nodes();
    let n = mesh.n_cells();
    let a = params.a;

    if kmag == 0.0 {
        return Ok(ModeProfile {
            kmag,
            params: params.clone(),
            mesh: mesh.clone(),
            values: vec![1.0; n + 1],
        });
    }
    if kmag * mesh.y_max() < 8.0 {
        log::warn!(
            "kmag*Y = {:.3} < 8: far-field truncation error ~ exp(-kmag*Y) may dominate",
            kmag * mesh.y_max()
        );
    }

    // flux weights at half-nodes, exact for the homogeneous solution y^{1-a}
    let e = 1.0 - a;
    let w: Vec<f64> = (0..n)
        .map(|j| e / (y[j + 1].powf(e) - y[j].powf(e)))
        .collect();

    // cell masses m_j = int_{y_{j-1/2}}^{y_{j+1/2}} y^a dy for interior nodes
    let ap = 1.0 + a;
    let half: Vec<f64> = (0..n).map(|j| 0.5 * (y[j] + y[j + 1])).collect();
    let mass = |lo: f64, hi: f64| -> f64 {
        if ap.abs() < 1e-6 {
            (hi / lo).ln()
        } else {
            (hi.powf(ap) - lo.powf(ap)) / ap
        }
    };

    // tridiagonal system for U_1..U_{N-1}
    let m = n - 1;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for j in 1..n {
        let i = j - 1;
        diag[i] = w[j - 1] + w[j] + kmag * kmag * mass(half[j - 1], half[j]);
        if i > 0 {
            lower[i] = -w[j - 1];
        }
        if i < m - 1 {
            upper[i] = -w[j];
        }
        if j == 1 {
            rhs[i] += w[0]; // Dirichlet U(0) = 1
        }
    }

    // Thomas elimination
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let scale = diag.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if diag[0].abs() < 1e-300 * scale.max(1.0) {
        return Err(Error::SingularSystem { row: 0, pivot: diag[0] });
    }
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let piv = diag[i] - lower[i] * c[i - 1];
        if piv.abs() < 1e-300 * scale.max(1.0) {
            return Err(Error::SingularSystem { row: i, pivot: piv });
        }
        c[i] = if i < m - 1 { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut values = vec![0.0; n + 1];
    values[0] = 1.0;
    values[m] = d[m - 1];
    for i in (0..m - 1).rev() {
        values[i + 1] = d[i] - c[i] * values[i + 2];
    }

    Ok(ModeProfile {
        kmag,
        params: params.clone(),
        mesh: mesh.clone(),
        values,
    })
}

/// Least-squares fit of samples against the basis {y^e : e in exponents}.
/// Returns (coefficients, rms residual, condition estimate).
fn lstsq_fit(ys: &[f64], vs: &[f64], exponents: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let rows = ys.len();
    let cols = exponents.len();
    if rows < cols + 2 {
        return Err(Error::IllConditionedFit { cond: f64::INFINITY });
    }
    // column scaling keeps the condition estimate meaningful across the wide
    // dynamic range of y^e on a graded mesh
    let scales: Vec<f64> = exponents
        .iter()
        .map(|&e| {
            let m = ys.iter().fold(0.0f64, |s, &y| s.max(y.powf(e).abs()));
            if m > 0.0 {
                m
            } else {
                1.0
            }
        })
        .collect();
    let a = DMatrix::from_fn(rows, cols, |i, j| ys[i].powf(exponents[j]) / scales[j]);
    let b = DVector::from_row_slice(vs);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = smax / smin.max(1e-300);
    if cond > 1e12 {
        return Err(Error::IllConditionedFit { cond });
    }
    let sol = svd
        .solve(&b, 1e-14 * smax)
        .map_err(|_| Error::IllConditionedFit { cond })?;
    let resid = (&a * &sol - &b).norm() / (rows as f64).sqrt();
    let coeffs = sol
        .iter()
        .zip(&scales)
        .map(|(c, s)| c / s)
        .collect();
    Ok((coeffs, resid, cond))
}

fn fit_first_nodes(
    profile: &ModeProfile,
    exponents: &[f64],
    q: usize,
) -> Result<(Vec<f64>, f64)> {
    let y = &profile.mesh.nodes()[..q.min(profile.values.len())];
    let v = &profile.values[..y.len()];
    let (c, r, _) = lstsq_fit(y, v, exponents)?;
    Ok((c, r))
}

/// Direct extraction for gamma in (0, 1): fit U(y) ~ c0 + h y^{2 gamma}
/// + c2 y^2 near y = 0 and read off lim y^a U' = 2 gamma h.
pub fn dtn_extract(profile: &ModeProfile) -> Result<DtnResult> {
    let p = &profile.params;
    if p.m != 0 || !(p.a > -1.0 && p.a < 1.0) {
        return Err(Error::WeightOutOfRange { a: p.a });
    }
    if profile.kmag == 0.0 {
        return Ok(DtnResult {
            h_estimate: 0.0,
            limit_value: 0.0,
            p_gamma_value: 0.0,
            error_estimate: 0.0,
            sign_flipped: false,
        });
    }
    let g = p.gamma;
    let mut exponents = vec![0.0, 2.0 * g, 2.0];
    if (2.0 - 2.0 * g).abs() < 0.2 {
        // y^{2 gamma} and y^2 nearly collinear; widen the basis instead
        exponents.push(2.0 * g + 2.0);
    }
    let (c1, r1) = fit_first_nodes(profile, &exponents, 12)?;
    let (c2, _) = fit_first_nodes(profile, &exponents, 18)?;
    let h1 = c1[1];
    let h2 = c2[1];
    let spread = (h1 - h2).abs() / h1.abs().max(1e-300);
    if spread > 0.05 {
        return Err(Error::NonConvergentFit { first: h1, second: h2 });
    }
    Ok(DtnResult {
        h_estimate: h1,
        limit_value: 2.0 * g * h1,
        p_gamma_value: p.d_gamma * h1,
        error_estimate: ((h1 - h2).abs() + r1) * p.d_gamma.abs(),
        sign_flipped: false,
    })
}

/// Nonuniform 3-point centered first derivative, one-sided at the ends.
fn derivative(y: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        let h1 = y[j] - y[j - 1];
        let h2 = y[j + 1] - y[j];
        d[j] = -h2 / (h1 * (h1 + h2)) * v[j - 1]
            + (h2 - h1) / (h1 * h2) * v[j]
            + h1 / (h2 * (h1 + h2)) * v[j + 1];
    }
    d[0] = (v[1] - v[0]) / (y[1] - y[0]);
    d[n - 1] = (v[n - 1] - v[n - 2]) / (y[n - 1] - y[n - 2]);
    d
}

fn fit_window(
    y: &[f64],
    v: &[f64],
    exponents: &[f64],
    y_lo: f64,
    y_hi: f64,
    valid_from: usize,
) -> Result<Vec<f64>> {
    let mut ys = Vec::new();
    let mut vs = Vec::new();
    for j in valid_from..y.len() {
        if y[j] >= y_lo && y[j] <= y_hi {
            ys.push(y[j]);
            vs.push(v[j]);
        }
    }
    let (c, _, _) = lstsq_fit(&ys, &vs, exponents)?;
    Ok(c)
}

/// Iterated extraction for gamma = m + gamma0, m >= 1: apply B = y^{-1} d/dy
/// m times to the profile solved at the full weight a = 1 - 2 gamma, then fit
/// the bottom-rung boundary layer V ~ c0 + h y^{2 gamma0} + ... on a
/// macroscopic window. The limit lim y^{a0} dV/dy equals 2 gamma0 h, and the
/// operator value is d_gamma h / A_m with the ladder product that includes the
/// factor gamma itself (the convention under which c_m A_m = d_gamma /
/// d_gamma0; the multiplier-recovery tests reject the alternative).
pub fn dtn_iterated_extract(profile: &ModeProfile) -> Result<DtnResult> {
    let p = &profile.params;
    if p.m == 0 {
        return Err(Error::IteratedOnDirect);
    }
    if profile.kmag == 0.0 {
        return Ok(DtnResult {
            h_estimate: 0.0,
            limit_value: 0.0,
            p_gamma_value: 0.0,
            error_estimate: 0.0,
            sign_flipped: false,
        });
    }
    let y = profile.mesh.nodes();
    let mut v = profile.values.clone();
    let mut valid_from = 0usize;
    for _ in 0..p.m {
        let d = derivative(y, &v);
        // node 0 sits at y = 0; each stage loses one more node of validity
        valid_from += 2;
        v = d;
        for (j, val) in v.iter_mut().enumerate() {
            if j >= 1 {
                *val /= y[j];
            }
        }
    }

    let g0 = p.gamma0;
    let exponents = [0.0, 2.0 * g0, 2.0, 2.0 * g0 + 2.0, 4.0];
    let yx = profile.mesh.y_max();
    let c_a = fit_window(y, &v, &exponents, 0.002 * yx, 0.05 * yx, valid_from)?;
    let c_b = fit_window(y, &v, &exponents, 0.005 * yx, 0.08 * yx, valid_from)?;
    let h = c_a[1];
    let spread = (c_a[1] - c_b[1]).abs() / h.abs().max(1e-300);
    if spread > 0.1 {
        return Err(Error::NoiseAmplified { spread, tol: 0.1 });
    }
    Ok(DtnResult {
        h_estimate: h,
        limit_value: 2.0 * g0 * h,
        p_gamma_value: p.d_gamma * h / p.a_m,
        error_estimate: spread * (p.d_gamma * h / p.a_m).abs(),
        sign_flipped: false,
    })
}

/// Residuals of the downshift identities relating a profile at gamma to an
/// independently solved profile at gamma - 1 on the same mesh and mode:
/// first order U_{m-1} = (1 + a_m) y^{-1} U_m', and second order
/// U_m'' - k^2 U_m = -(a_m / (1 + a_m)) U_{m-1}.
#[derive(Debug, Clone, Copy)]
pub struct DownshiftReport {
    pub first_order_residual: f64,
    pub second_order_residual: f64,
    pub nodes_checked: usize,
}

pub fn check_downshift(
    profile_m: &ModeProfile,
    profile_m1: &ModeProfile,
    window: Option<(f64, f64)>,
) -> Result<DownshiftReport> {
    if profile_m.mesh != profile_m1.mesh || profile_m.kmag != profile_m1.kmag {
        return Err(Error::MeshMismatch);
    }
    if (profile_m.params.gamma - 1.0 - profile_m1.params.gamma).abs() > 1e-12 {
        return Err(Error::ShapeMismatch(format!(
            "profiles at gamma = {} and {} are not adjacent rungs",
            profile_m.params.gamma, profile_m1.params.gamma
        )));
    }
    if profile_m.kmag == 0.0 {
        // both reductions are derivatives of a constant
        return Ok(DownshiftReport {
            first_order_residual: 0.0,
            second_order_residual: 0.0,
            nodes_checked: 0,
        });
    }
    let (lo_rel, hi_rel) = window.unwrap_or((6.25e-5, 0.97));
    let y = profile_m.mesh.nodes();
    let yx = profile_m.mesh.y_max();
    let a_m = profile_m.params.a;
    let k = profile_m.kmag;
    let um = &profile_m.values;
    let um1 = &profile_m1.values;
    let du = derivative(y, um);
    let d2u = derivative(y, &du);

    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    let mut count = 0;
    for j in 2..y.len() - 2 {
        if y[j] < lo_rel * yx || y[j] > hi_rel * yx {
            continue;
        }
        count += 1;
        r1 = r1.max((um1[j] - (1.0 + a_m) * du[j] / y[j]).abs());
        r2 = r2.max((d2u[j] - k * k * um[j] + a_m / (1.0 + a_m) * um1[j]).abs());
    }
    Ok(DownshiftReport {
        first_order_residual: r1,
        second_order_residual: r2,
        nodes_checked: count,
    })
}

/// Per-mode assembly of the extension solution for a full boundary datum.
/// Profiles are cached by frequency magnitude; the far-field height of each
/// mode's mesh is rescaled by 1/kmag so kmag * Y stays fixed.
pub struct ExtensionSolution {
    params: FracParams,
    field: spectral::SpectralField,
    profiles: HashMap<u64, ModeProfile>,
}

/// Solve one profile per distinct frequency magnitude of `f`.
pub fn solve_extension(
    f: &GridFunction,
    params: &FracParams,
    mesh: &GradedMesh,
) -> Result<ExtensionSolution> {
    let field = spectral::dft(f);
    let mut profiles = HashMap::new();
    for flat in 0..field.coeffs().len() {
        if field.coeffs()[flat].norm() == 0.0 {
            continue;
        }
        let kmag = field.xi_norm(flat);
        if kmag == 0.0 {
            continue;
        }
        let key = kmag.to_bits();
        if profiles.contains_key(&key) {
            continue;
        }
        let mode_mesh = mesh.scaled(1.0 / kmag)?;
        profiles.insert(key, solve_mode(kmag, params, &mode_mesh)?);
    }
    Ok(ExtensionSolution {
        params: params.clone(),
        field,
        profiles,
    })
}

impl ExtensionSolution {
    pub fn profiles(&self) -> &HashMap<u64, ModeProfile> {
        &self.profiles
    }

    /// Synthesize U(x, y0) on the boundary grid at a fixed height.
    pub fn boundary_value_at(&self, y0: f64) -> GridFunction {
        let mut field = self.field.clone();
        for flat in 0..field.coeffs().len() {
            let kmag = field.xi_norm(flat);
            let factor = if kmag == 0.0 {
                1.0
            } else {
                self.profiles
                    .get(&kmag.to_bits())
                    .map(|p| p.value_at(y0))
                    .unwrap_or(0.0)
            };
            field.coeffs_mut()[flat] *= factor;
        }
        spectral::idft(&field)
    }

    /// Apply the operator: extract the Dirichlet-to-Neumann value per mode
    /// and synthesize. The zero mode is annihilated.
    pub fn apply_dtn(&self) -> Result<GridFunction> {
        let mut multipliers: HashMap<u64, f64> = HashMap::new();
        for (&key, profile) in &self.profiles {
            let res = if self.params.m == 0 {
                dtn_extract(profile)?
            } else {
                dtn_iterated_extract(profile)?
            };
            multipliers.insert(key, res.p_gamma_value);
        }
        let mut field = self.field.clone();
        for flat in 0..field.coeffs().len() {
            let kmag = field.xi_norm(flat);
            let mult = if kmag == 0.0 {
                0.0
            } else {
                *multipliers.get(&kmag.to_bits()).unwrap_or(&0.0)
            };
            field.coeffs_mut()[flat] *= mult;
        }
        Ok(spectral::idft(&field))
    }
}

/// The fractional operator assembled from extension solves: solve per mode,
/// extract, synthesize. Matches the spectral multiplier route within the
/// extraction accuracy.
pub fn apply_p_gamma(
    f: &GridFunction,
    params: &FracParams,
    mesh: &GradedMesh,
) -> Result<GridFunction> {
    solve_extension(f, params, mesh)?.apply_dtn()
}

/// Poisson-kernel cross-check for gamma in (0, 1): evaluate U(., y0) by mode
/// synthesis and by quadrature of the kernel
/// K(x, y) = c y^{2 gamma} / (x^2 + y^2)^{(1 + 2 gamma)/2},
/// c = Gamma((1 + 2 gamma)/2) / (sqrt(pi) Gamma(gamma)),
/// with periodic images summed to `image_radius`.
#[derive(Debug, Clone, Copy)]
pub struct PoissonReport {
    pub rel_discrepancy: f64,
    pub synthesis_norm: f64,
    pub quadrature_norm: f64,
}

pub fn poisson_kernel_compare(
    f: &GridFunction,
    params: &FracParams,
    mesh: &GradedMesh,
    y0: f64,
    image_radius: usize,
) -> Result<PoissonReport> {
    if f.dims() != 1 {
        return Err(Error::UnsupportedDimension { dims: f.dims() });
    }
    if params.m != 0 {
        return Err(Error::WeightOutOfRange { a: params.a });
    }
    if image_radius < 1 {
        return Err(Error::ImageRadiusTooSmall);
    }
    let n = f.sizes()[0];
    let l = f.period()[0];
    let h = l / n as f64;
    let max_abs = f.max_abs();
    if max_abs > 0.0 {
        // datum must vanish near the box edges so image truncation is benign
        let margin = n / 20;
        for j in 0..n {
            if (j < margin || j >= n - margin) && f.values()[j].abs() > 1e-8 * max_abs {
                return Err(Error::SupportTooWide);
            }
        }
    }

    let synthesis = solve_extension(f, params, mesh)?.boundary_value_at(y0);

    let g = params.gamma;
    let c = special::gamma((1.0 + 2.0 * g) / 2.0)
        / (std::f64::consts::PI.sqrt() * special::gamma(g));
    let r = image_radius as i64;
    // kernel summed over images per grid offset
    let mut kernel = vec![0.0; n];
    for (d, kv) in kernel.iter_mut().enumerate() {
        for img in -r..=r {
            let dx = (d as i64 + img * n as i64) as f64 * h;
            *kv += c * y0.powf(2.0 * g) / (dx * dx + y0 * y0).powf((1.0 + 2.0 * g) / 2.0);
        }
    }
    let v = f.values();
    let mut quad = vec![0.0; n];
    for (j, q) in quad.iter_mut().enumerate() {
        let mut s = 0.0;
        for (d, kv) in kernel.iter().enumerate() {
            s += kv * v[(j + n - d % n) % n];
        }
        *q = s * h;
    }
    let quadrature = GridFunction::new(vec![n], vec![l], quad)?;
    Ok(PoissonReport {
        rel_discrepancy: synthesis.rel_l2_error(&quadrature)?,
        synthesis_norm: synthesis.l2_norm(),
        quadrature_norm: quadrature.l2_norm(),
    })
}
