//! Scattering expansions u = y^{n-s}(F + y^{2 gamma} H) and the curved
//! Dirichlet-to-Neumann identities they satisfy, executed exactly at the
//! series level.

use crate::error::{Error, Result};
use crate::fracparams::FracParams;
use crate::jets::series::GradedSeries;
use crate::jets::warped::{eigen_operator, WarpedModel};

/// Expansion blocks of a scattering solution u and its datum-1 companion v:
/// u = y^{n-s}(F + y^{2 gamma} H), v = y^{n-s}(Ft + y^{2 gamma} Ht), with
/// f = F(0), h = H(0), Ft(0) = 1, h_tilde = Ht(0). Blocks are stored as
/// plain series in y (q = 0 keys); the y^{2 gamma} prefactor is applied on
/// assembly.
#[derive(Debug, Clone)]
pub struct ScatterSeries {
    params: FracParams,
    f_block: GradedSeries,
    h_block: GradedSeries,
    f_companion: GradedSeries,
    h_companion: GradedSeries,
}

impl ScatterSeries {
    pub fn new(
        params: FracParams,
        f_block: GradedSeries,
        h_block: GradedSeries,
        f_companion: GradedSeries,
        h_companion: GradedSeries,
    ) -> Result<Self> {
        if f_companion.coeff(0, 0) != 1.0 {
            return Err(Error::CompanionDatum {
                got: f_companion.coeff(0, 0),
            });
        }
        for block in [&f_block, &h_block, &f_companion, &h_companion] {
            if !block.terms().keys().all(|&(p, q)| q == 0 && p >= 0) {
                return Err(Error::ShapeMismatch(
                    "expansion blocks must be plain series in y".into(),
                ));
            }
        }
        Ok(Self {
            params,
            f_block,
            h_block,
            f_companion,
            h_companion,
        })
    }

    /// Minimal series from the three leading scattering coefficients.
    pub fn from_coefficients(params: FracParams, f: f64, h: f64, h_tilde: f64) -> Result<Self> {
        let g = params.gamma;
        let t = GradedSeries::default_trunc(g);
        Self::new(
            params,
            GradedSeries::constant(g, t, f),
            GradedSeries::constant(g, t, h),
            GradedSeries::constant(g, t, 1.0),
            GradedSeries::constant(g, t, h_tilde),
        )
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }
    pub fn f(&self) -> f64 {
        self.f_block.coeff(0, 0)
    }
    pub fn h(&self) -> f64 {
        self.h_block.coeff(0, 0)
    }
    pub fn h_tilde(&self) -> f64 {
        self.h_companion.coeff(0, 0)
    }

    /// y^{s-n} u = F + y^{2 gamma} H.
    pub fn u_series(&self) -> GradedSeries {
        self.f_block.add(&self.h_block.mul_monomial(0, 1, 1.0))
    }

    /// y^{s-n} v = Ft + y^{2 gamma} Ht.
    pub fn v_series(&self) -> GradedSeries {
        self.f_companion
            .add(&self.h_companion.mul_monomial(0, 1, 1.0))
    }

    /// U = u / v as a graded series with U(0) = f.
    pub fn big_u(&self) -> Result<GradedSeries> {
        Ok(self.u_series().mul(&self.v_series().reciprocal()?))
    }
}

/// Solve the radial eigen-equation L[V] = 0 order by order for the datum-1
/// companion on a warped model, with the scattering coefficient h_tilde
/// prescribed (it is the free datum at the second indicial root). Returns
/// the (Ft, Ht) blocks.
pub fn solve_eigen_companion(
    model: &WarpedModel,
    params: &FracParams,
    h_tilde: f64,
    trunc: f64,
) -> Result<(GradedSeries, GradedSeries)> {
    let g = params.gamma;
    let mut v = GradedSeries::constant(g, trunc, 1.0);
    v.set(0, 1, h_tilde);

    // ascending sweep: correcting the coefficient at exponent e changes
    // L[V] at e by I(e) and above e only, so one pass suffices
    let mut keys: Vec<(f64, i32, u32)> = Vec::new();
    for q in 0..=1u32 {
        for p in 1..=(trunc.ceil() as i32) {
            let e = p as f64 + 2.0 * g * q as f64;
            if e <= trunc + 1e-9 {
                keys.push((e, p, q));
            }
        }
    }
    keys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    for (e, p, q) in keys {
        let indicial = e * (e - 2.0 * g);
        let r = eigen_operator(model, params, &v)?.coeff(p, q);
        if indicial.abs() < 1e-9 {
            if r.abs() > 1e-12 {
                return Err(Error::ModelNotSolvable { order: p, residual: r });
            }
            continue;
        }
        v.set(p, q, v.coeff(p, q) - r / indicial);
    }

    let mut f_block = GradedSeries::zero(g, trunc);
    let mut h_block = GradedSeries::zero(g, trunc - 2.0 * g);
    for (&(p, q), &c) in v.terms() {
        match q {
            0 => f_block.set(p, 0, c),
            1 => h_block.set(p, 0, c),
            _ => {}
        }
    }
    Ok((f_block, h_block))
}

/// The special defining function rho* = v^{1/(n-s)} = y (Ft + y^{2 gamma}
/// Ht)^{1/(n-s)}; its y^{1+2 gamma} coefficient is h_tilde / (n - s), and
/// E(rho*) vanishes to the order to which v solves the eigen-equation.
pub fn special_defining_function(scatter: &ScatterSeries) -> Result<GradedSeries> {
    let params = scatter.params();
    if params.m != 0 {
        return Err(Error::CurvedGammaRange { gamma: params.gamma });
    }
    let alpha = 1.0 / (params.n as f64 - params.s);
    Ok(scatter.v_series().powf(alpha)?.mul_monomial(1, 0, 1.0))
}

/// Result of a curved Dirichlet-to-Neumann evaluation.
#[derive(Debug, Clone, Copy)]
pub struct CurvedDtn {
    /// lim rho^a d/d rho of U (its iterated analogue for m >= 1).
    pub limit: f64,
    /// The same limit predicted by the closed coefficient formula
    /// 2 gamma (h - f h_tilde), resp. 2 gamma0 A_m (h - h_tilde f).
    pub limit_closed_form: f64,
    /// Q_gamma = d_gamma h_tilde.
    pub q_gamma: f64,
    /// P_gamma f assembled from limit and the curvature term f Q_gamma.
    pub p_gamma_f: f64,
    /// |p_gamma_f - d_gamma h|; zero up to round-off when the identities hold.
    pub identity_residual: f64,
}

/// Direct curved formula for gamma in (0, 1): the weighted normal limit of
/// U = u/v is 2 gamma (h - f h_tilde), and adding the curvature term
/// f Q_gamma recovers P_gamma f = d_gamma h.
pub fn curved_dtn(scatter: &ScatterSeries) -> Result<CurvedDtn> {
    let params = scatter.params();
    if params.m != 0 {
        return Err(Error::CurvedGammaRange { gamma: params.gamma });
    }
    let g = params.gamma;
    let u = scatter.big_u()?;
    let limit = 2.0 * g * u.coeff(0, 1);
    let limit_closed_form = 2.0 * g * (scatter.h() - scatter.f() * scatter.h_tilde());
    let q_gamma = params.d_gamma * scatter.h_tilde();
    let p_gamma_f = params.d_gamma / (2.0 * g) * limit + scatter.f() * q_gamma;
    Ok(CurvedDtn {
        limit,
        limit_closed_form,
        q_gamma,
        p_gamma_f,
        identity_residual: (p_gamma_f - params.d_gamma * scatter.h()).abs(),
    })
}

/// Iterated curved formula for gamma = m + gamma0, m >= 1: apply B m times
/// and differentiate; the y^{a0}-weighted limit is the coefficient of
/// y^{2 gamma0 - 1} in d/dy B^m U, and equals 2 gamma0 A_m (h - h_tilde f)
/// with the ladder product that includes the factor gamma. Requires
/// even-type expansion blocks (B^k preserves even series).
pub fn curved_dtn_iterated(scatter: &ScatterSeries) -> Result<CurvedDtn> {
    let params = scatter.params();
    if params.m == 0 {
        return Err(Error::IteratedOnDirect);
    }
    let u = scatter.big_u()?;
    if !u.is_even_type() {
        return Err(Error::OddLowOrderTerms);
    }
    let g0 = params.gamma0;
    let m = params.m as i32;
    let mut w = u;
    for _ in 0..m {
        w = w.b_operator();
    }
    let dw = w.derivative_y();
    // the (q = 1, p = -2m - 1) key carries exponent 2 gamma0 - 1; weighting
    // by y^{a0} makes it the constant term of the limit
    let limit = dw.coeff(-2 * m - 1, 1);
    let limit_closed_form =
        2.0 * g0 * params.a_m * (scatter.h() - scatter.h_tilde() * scatter.f());
    let q_gamma = params.d_gamma * scatter.h_tilde();
    let p_gamma_f = params.d_gamma / (2.0 * g0 * params.a_m) * limit + scatter.f() * q_gamma;
    Ok(CurvedDtn {
        limit,
        limit_closed_form,
        q_gamma,
        p_gamma_f,
        identity_residual: (p_gamma_f - params.d_gamma * scatter.h()).abs(),
    })
}
