//! Weighted normal limits when the boundary has mean curvature Psi0: the
//! expansion U = [f - (s - n) Psi0 f y + O(y^2)] + y^{2 gamma}[h + O(y)]
//! gives y^a dU/dy = -(s - n) Psi0 f y^a + 2 gamma h + o(1), and the
//! existence of the limit splits three ways on the sign of a = 1 - 2 gamma.

use crate::error::{Error, Result};
use crate::jets::series::GradedSeries;
use crate::jets::scatter::ScatterSeries;

/// Outcome of the weighted limit in the presence of mean curvature.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryDtn {
    /// gamma < 1/2: the mean-curvature term vanishes in the limit.
    Subcritical {
        /// lim y^a dU/dy = 2 gamma h.
        limit: f64,
        /// (d_gamma / 2 gamma) * limit = d_gamma h.
        p_gamma_f: f64,
    },
    /// gamma = 1/2 (a = 0): the limit of dU/dy itself exists; the raw series
    /// coefficients and the source statement's combination are reported side
    /// by side, since their sign bookkeeping is not reconcilable verbatim.
    Critical {
        /// lim dU/dy = ((n-1)/2) Psi0 f + h.
        limit_du: f64,
        /// The mean-curvature contribution ((n-1)/2) Psi0 f on its own.
        psi0_term: f64,
        /// The coefficient h.
        h: f64,
        /// lim dU/dy + ((n-1)/2) Psi0 f, the stated formula taken at face
        /// value.
        theorem_value: f64,
        /// d_{1/2} h = -h, the value the scattering normalization assigns.
        scattering_value: f64,
    },
    /// gamma > 1/2 (a < 0): the y^a term blows up unless Psi0 f = 0.
    Supercritical {
        /// Whether the weighted limit exists (mean-curvature term absent).
        limit_exists: bool,
        /// Coefficient of the divergent y^a term: -(s - n) Psi0 f.
        divergent_coefficient: f64,
        /// 2 gamma h and d_gamma h when the limit exists.
        limit: Option<f64>,
        p_gamma_f: Option<f64>,
    },
}

/// The U series of the mean-curvature expansion: f + (n - s) Psi0 f y in the
/// regular block, h at y^{2 gamma}.
pub fn mean_curvature_u_series(scatter: &ScatterSeries, psi0: f64) -> GradedSeries {
    let params = scatter.params();
    let g = params.gamma;
    let t = GradedSeries::default_trunc(g);
    let mut u = GradedSeries::constant(g, t, scatter.f());
    u.set(1, 0, -(params.s - params.n as f64) * psi0 * scatter.f());
    u.set(0, 1, scatter.h());
    u
}

/// Evaluate the weighted boundary limit for gamma in (0, 1) with mean
/// curvature Psi0, reading the two displayed coefficients off the series
/// y^a dU/dy = -(s - n) Psi0 f y^a + 2 gamma h + o(1).
pub fn general_boundary_dtn(
    scatter: &ScatterSeries,
    psi0: f64,
) -> Result<BoundaryDtn> {
    let params = scatter.params();
    let g = params.gamma;
    if params.m != 0 {
        return Err(Error::CurvedGammaRange { gamma: g });
    }
    let n = params.n as f64;
    let u = mean_curvature_u_series(scatter, psi0);
    let du = u.derivative_y();
    // after weighting by y^a: the (0, 1) key of dU lands at exponent
    // 2 gamma - 1 + a = 0, the (0, 0) key at exponent a
    let h_coeff = du.coeff(-1, 1) / (2.0 * g); // recover h from 2 gamma h
    let curvature_coeff = du.coeff(0, 0); // -(s - n) Psi0 f

    if g < 0.5 {
        let limit = 2.0 * g * h_coeff;
        Ok(BoundaryDtn::Subcritical {
            limit,
            p_gamma_f: params.d_gamma / (2.0 * g) * limit,
        })
    } else if g == 0.5 {
        let psi0_term = (n - 1.0) / 2.0 * psi0 * scatter.f();
        let limit_du = curvature_coeff + 2.0 * g * h_coeff;
        Ok(BoundaryDtn::Critical {
            limit_du,
            psi0_term,
            h: h_coeff,
            theorem_value: limit_du + psi0_term,
            scattering_value: params.d_gamma * h_coeff,
        })
    } else {
        let limit_exists = curvature_coeff == 0.0;
        Ok(BoundaryDtn::Supercritical {
            limit_exists,
            divergent_coefficient: curvature_coeff,
            limit: limit_exists.then(|| 2.0 * g * h_coeff),
            p_gamma_f: limit_exists.then(|| params.d_gamma * h_coeff),
        })
    }
}
