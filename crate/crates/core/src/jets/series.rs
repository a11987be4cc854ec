//! Truncated formal series graded by exponents p + 2*gamma*q.
//!
//! Terms are keyed on the integer pair (p, q), never on the real exponent,
//! so exponent collisions for rational gamma cannot merge distinct terms.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const EXP_EPS: f64 = 1e-9;

/// A finite sum of terms c * y^{p + 2*gamma*q} with p possibly negative
/// (derivatives shift it down) and q >= 0, truncated at exponent `trunc`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedSeries {
    gamma: f64,
    trunc: f64,
    terms: BTreeMap<(i32, u32), f64>,
}

impl GradedSeries {
    pub fn zero(gamma: f64, trunc: f64) -> Self {
        Self {
            gamma,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(gamma: f64, trunc: f64, c: f64) -> Self {
        let mut s = Self::zero(gamma, trunc);
        s.set(0, 0, c);
        s
    }

    pub fn monomial(gamma: f64, trunc: f64, p: i32, q: u32, c: f64) -> Self {
        let mut s = Self::zero(gamma, trunc);
        s.set(p, q, c);
        s
    }

    /// Default truncation used throughout: enough orders to see every
    /// identity's leading and next-to-leading structure.
    pub fn default_trunc(gamma: f64) -> f64 {
        4.0 + 4.0 * gamma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn trunc(&self) -> f64 {
        self.trunc
    }
    pub fn terms(&self) -> &BTreeMap<(i32, u32), f64> {
        &self.terms
    }

    pub fn exponent(&self, p: i32, q: u32) -> f64 {
        p as f64 + 2.0 * self.gamma * q as f64
    }

    pub fn coeff(&self, p: i32, q: u32) -> f64 {
        self.terms.get(&(p, q)).copied().unwrap_or(0.0)
    }

    /// Insert or remove a coefficient, respecting truncation and the
    /// no-stored-zeros invariant.
    pub fn set(&mut self, p: i32, q: u32, c: f64) {
        if c == 0.0 || self.exponent(p, q) > self.trunc + EXP_EPS {
            self.terms.remove(&(p, q));
        } else {
            self.terms.insert((p, q), c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn leading_exponent(&self) -> Option<f64> {
        self.terms
            .keys()
            .map(|&(p, q)| self.exponent(p, q))
            .fold(None, |m, e| Some(m.map_or(e, |v: f64| v.min(e))))
    }

    pub fn largest_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn retrunc(mut self, trunc: f64) -> Self {
        self.trunc = trunc;
        self.terms
            .retain(|&(p, q), _| p as f64 + 2.0 * self.gamma * q as f64 <= trunc + EXP_EPS);
        self
    }

    /// Keep only terms with exponent <= `order`.
    pub fn truncate_to(&self, order: f64) -> Self {
        self.clone().retrunc(order.min(self.trunc))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.gamma, self.trunc);
        for (&(p, q), &v) in &self.terms {
            out.set(p, q, c * v);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.gamma, self.trunc.min(other.trunc));
        for (&(p, q), &v) in &self.terms {
            out.set(p, q, v);
        }
        for (&(p, q), &v) in &other.terms {
            out.set(p, q, out.coeff(p, q) + v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Product. The output truncation accounts for the factors' leading
    /// exponents: multiplying by a series starting at exponent l preserves
    /// information up to min(self.trunc + l_other, other.trunc + l_self).
    pub fn mul(&self, other: &Self) -> Self {
        let l_self = self.leading_exponent().unwrap_or(0.0);
        let l_other = other.leading_exponent().unwrap_or(0.0);
        let trunc = (self.trunc + l_other).min(other.trunc + l_self);
        let mut out = Self::zero(self.gamma, trunc);
        for (&(p1, q1), &v1) in &self.terms {
            for (&(p2, q2), &v2) in &other.terms {
                let (p, q) = (p1 + p2, q1 + q2);
                out.set(p, q, out.coeff(p, q) + v1 * v2);
            }
        }
        out
    }

    /// Shift by the monomial y^{p + 2*gamma*q}; truncation shifts with it.
    pub fn mul_monomial(&self, p: i32, q: u32, c: f64) -> Self {
        let shift = self.exponent(p, q);
        let mut out = Self::zero(self.gamma, self.trunc + shift);
        for (&(p1, q1), &v) in &self.terms {
            out.set(p1 + p, q1 + q, c * v);
        }
        out
    }

    /// 1 / self; requires a nonzero constant term at (0, 0) as the leading
    /// exponent (factor out a monomial first otherwise).
    pub fn reciprocal(&self) -> Result<Self> {
        self.powf(-1.0)
    }

    /// Real power via the binomial series around the constant term: writes
    /// self = c0 (1 + u) with u of positive leading exponent and expands
    /// c0^alpha sum_j binom(alpha, j) u^j until u^j exceeds truncation.
    pub fn powf(&self, alpha: f64) -> Result<Self> {
        let c0 = self.coeff(0, 0);
        if c0 == 0.0 {
            return Err(Error::SeriesLeadingZero);
        }
        if let Some(l) = self.leading_exponent() {
            if l < -EXP_EPS {
                return Err(Error::SeriesLeadingZero);
            }
        }
        let mut u = self.scale(1.0 / c0);
        u.set(0, 0, 0.0);
        if u.is_zero() {
            return Ok(Self::constant(self.gamma, self.trunc, c0.powf(alpha)));
        }
        let lu = u.leading_exponent().unwrap();
        if lu <= EXP_EPS {
            return Err(Error::TruncationUnderflow { trunc: self.trunc });
        }
        let mut out = Self::constant(self.gamma, self.trunc, 1.0);
        let mut upow = Self::constant(self.gamma, self.trunc, 1.0);
        let mut binom = 1.0;
        let mut j = 0.0;
        while (j + 1.0) * lu <= self.trunc + EXP_EPS {
            binom *= (alpha - j) / (j + 1.0);
            upow = upow.mul(&u).retrunc(self.trunc);
            j += 1.0;
            out = out.add(&upow.scale(binom));
            if binom == 0.0 || upow.is_zero() {
                break;
            }
        }
        Ok(out.scale(c0.powf(alpha)))
    }

    /// d/dy: maps exponent e to e - 1 with factor e (constants vanish).
    pub fn derivative_y(&self) -> Self {
        let mut out = Self::zero(self.gamma, self.trunc - 1.0);
        for (&(p, q), &v) in &self.terms {
            let e = self.exponent(p, q);
            out.set(p - 1, q, out.coeff(p - 1, q) + e * v);
        }
        out
    }

    /// B = y^{-1} d/dy: exponent e maps to e - 2 with factor e.
    pub fn b_operator(&self) -> Self {
        let mut out = Self::zero(self.gamma, self.trunc - 2.0);
        for (&(p, q), &v) in &self.terms {
            let e = self.exponent(p, q);
            out.set(p - 2, q, out.coeff(p - 2, q) + e * v);
        }
        out
    }

    /// True if every term has q = 0 with even p (the even-type hypothesis
    /// preserved by B).
    pub fn is_even_type(&self) -> bool {
        self.terms.keys().all(|&(p, q)| q > 0 || p.rem_euclid(2) == 0)
    }

    /// Substitute y = inner(t), where `inner` is a defining-function series
    /// (leading term t with unit... any positive coefficient). Each monomial
    /// y^{p + 2 gamma q} becomes t^{p + 2 gamma q} * unit^{p + 2 gamma q},
    /// with unit = inner / t expanded by the binomial rule; the (p, q)
    /// grading of the result follows the monomial shift.
    pub fn substitute(&self, inner: &Self) -> Result<Self> {
        let unit = inner_unit(inner)?;
        let mut out = Self::zero(self.gamma, self.trunc.min(inner.trunc));
        for (&(p, q), &v) in &self.terms {
            let e = self.exponent(p, q);
            let factor = unit.powf(e)?;
            out = out.add(&factor.mul_monomial(p, q, v));
        }
        Ok(out.retrunc(self.trunc.min(inner.trunc)))
    }

    /// Human-readable form sorted by exponent.
    pub fn pretty(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut items: Vec<(f64, i32, u32, f64)> = self
            .terms
            .iter()
            .map(|(&(p, q), &c)| (self.exponent(p, q), p, q, c))
            .collect();
        items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out = String::new();
        for (i, (e, _, _, c)) in items.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            if e.abs() < EXP_EPS {
                let _ = write!(out, "{c}");
            } else {
                let _ = write!(out, "{c} · y^{e}");
            }
        }
        out
    }

    /// Machine-readable term dump: one row per term, sorted by exponent.
    pub fn to_csv(&self) -> String {
        let mut items: Vec<(f64, i32, u32, f64)> = self
            .terms
            .iter()
            .map(|(&(p, q), &c)| (self.exponent(p, q), p, q, c))
            .collect();
        items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut out = String::from("p,q,exponent,coefficient\n");
        for (e, p, q, c) in items {
            let _ = writeln!(out, "{p},{q},{e:.17e},{c:.17e}");
        }
        out
    }

    /// Max absolute coefficient difference against `other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(p, q), &v) in &self.terms {
            worst = worst.max((v - other.coeff(p, q)).abs());
        }
        for (&(p, q), &v) in &other.terms {
            worst = worst.max((v - self.coeff(p, q)).abs());
        }
        worst
    }
}

/// inner / y for a defining-function-like series (leading term y^1 with
/// positive coefficient); the result has constant term > 0.
fn inner_unit(inner: &GradedSeries) -> Result<GradedSeries> {
    let lead = inner.coeff(1, 0);
    if lead <= 0.0 {
        return Err(Error::NotDefiningFunction);
    }
    match inner.leading_exponent() {
        Some(l) if (l - 1.0).abs() < EXP_EPS => {}
        _ => return Err(Error::NotDefiningFunction),
    }
    let mut unit = GradedSeries::zero(inner.gamma(), inner.trunc() - 1.0);
    for (&(p, q), &v) in inner.terms() {
        unit.set(p - 1, q, v);
    }
    Ok(unit)
}
