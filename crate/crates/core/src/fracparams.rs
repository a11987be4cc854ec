//! Constant ledger for the fractional operator family: the order gamma, its
//! integer/fractional split, the extension weights, the normalizing constant
//! d_gamma, and the ladder of intermediate orders used by the iterated
//! Dirichlet-to-Neumann extraction.

use crate::error::{Error, Result};
use crate::special;

/// One rung of the order ladder: gamma_j = gamma - (m - j) with its
/// associated eigenvalue parameter s_j and weight exponent a_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRung {
    pub gamma_j: f64,
    pub s_j: f64,
    pub a_j: f64,
}

/// Full parameter set for a fractional order gamma in (0, n/2) \ N.
#[derive(Debug, Clone, PartialEq)]
pub struct FracParams {
    /// Boundary dimension.
    pub n: u32,
    /// Fractional order, gamma = m + gamma0.
    pub gamma: f64,
    /// Integer part of gamma.
    pub m: u32,
    /// Fractional part, in (0, 1).
    pub gamma0: f64,
    /// Eigenvalue parameter s = n/2 + gamma.
    pub s: f64,
    /// Extension weight exponent a = 1 - 2 gamma.
    pub a: f64,
    /// Weight exponent of the bottom rung, a0 = 1 - 2 gamma0, always in (-1, 1).
    pub a0: f64,
    /// Normalizing constant d_gamma = 2^{2 gamma} Gamma(gamma) / Gamma(-gamma).
    pub d_gamma: f64,
    /// Ladder product A_m = 2^m gamma_m ... gamma_1 (includes the factor gamma
    /// itself). This is the convention under which c_m A_m = d_gamma / d_gamma0,
    /// and the one the iterated extraction uses.
    pub a_m: f64,
    /// The alternative product 2^m (gamma-1) ... (gamma-m+1) that omits the
    /// leading factor gamma. Kept for reference; it does not satisfy the
    /// product identity and the multiplier-recovery test rejects it.
    pub a_m_without_gamma: f64,
    /// c_m = prod_{j=1}^m (a_j + 1).
    pub c_m: f64,
    /// Rungs j = 0..=m, increasing in gamma_j, with gamma_m = gamma.
    pub ladder: Vec<LadderRung>,
}

/// Build and validate the parameter set for boundary dimension `n` and order
/// `gamma` in (0, n/2), gamma not an integer.
pub fn make_params(n: u32, gamma: f64) -> Result<FracParams> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    let limit = n as f64 / 2.0;
    if !(gamma > 0.0 && gamma < limit) {
        return Err(Error::GammaOutOfRange { gamma, n, limit });
    }
    if gamma.fract() == 0.0 {
        return Err(Error::GammaInteger { gamma });
    }

    let m = gamma.floor() as u32;
    let gamma0 = gamma - m as f64;
    let ladder: Vec<LadderRung> = (0..=m)
        .map(|j| {
            let gamma_j = gamma - (m - j) as f64;
            LadderRung {
                gamma_j,
                s_j: n as f64 / 2.0 + gamma_j,
                a_j: 1.0 - 2.0 * gamma_j,
            }
        })
        .collect();

    // Rungs 1..=m hold gamma_1..=gamma_m, so this is 2^m gamma_m ... gamma_1.
    let a_m: f64 = if m > 0 {
        2f64.powi(m as i32) * ladder.iter().skip(1).map(|r| r.gamma_j).product::<f64>()
    } else {
        1.0
    };
    let a_m_without_gamma: f64 = if m > 0 {
        2f64.powi(m as i32)
            * (1..m)
                .map(|j| gamma - j as f64)
                .product::<f64>()
    } else {
        1.0
    };
    let c_m: f64 = ladder.iter().skip(1).map(|r| r.a_j + 1.0).product();

    Ok(FracParams {
        n,
        gamma,
        m,
        gamma0,
        s: n as f64 / 2.0 + gamma,
        a: 1.0 - 2.0 * gamma,
        a0: 1.0 - 2.0 * gamma0,
        d_gamma: special::d_gamma(gamma),
        a_m,
        a_m_without_gamma,
        c_m,
        ladder,
    })
}

impl FracParams {
    /// The ladder rungs (gamma_j, s_j, a_j), j = 0..=m.
    pub fn gamma_ladder(&self) -> &[LadderRung] {
        &self.ladder
    }

    /// d_{gamma_0} for the bottom rung.
    pub fn d_gamma0(&self) -> f64 {
        special::d_gamma(self.gamma0)
    }

    /// Parameters of the rung at gamma_j = gamma - (m - j).
    pub fn rung_params(&self, j: u32) -> Result<FracParams> {
        let rung = self
            .ladder
            .get(j as usize)
            .ok_or(Error::ShapeMismatch(format!("ladder has no rung {j}")))?;
        make_params(self.n, rung.gamma_j)
    }
}
