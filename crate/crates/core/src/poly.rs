//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! This is the untruncated workhorse beneath [`crate::jets`]. A [`Poly`] is a
//! finite map from exponent vectors to nonzero coefficients; every operation
//! keeps that canonical form.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::rational::{format_q, to_f64, Q};

pub type Exponent = Vec<u32>;

/// Σ_ℓ α_ℓ w_ℓ.
pub fn weighted_degree(exp: &[u32], weights: &[u32]) -> u32 {
    exp.iter().zip(weights).map(|(a, w)| a * w).sum()
}

pub fn total_degree(exp: &[u32]) -> u32 {
    exp.iter().sum()
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, Q::one())
    }

    /// The coordinate function x_i (0-based).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, Q::one())
    }

    pub fn monomial(exp: Exponent, c: Q) -> Self {
        let mut p = Poly::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Q)>>(nvars: usize, terms: I) -> Self {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Q)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Exponent, Q)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, exp: &[u32]) -> Q {
        self.terms.get(exp).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    pub fn add_term(&mut self, exp: Exponent, c: Q) {
        debug_assert_eq!(exp.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// ∂/∂x_k.
    pub fn derivative(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.add_term(e2, c * Q::from_integer(e[k].into()));
        }
        out
    }

    /// ∫_0^{x_k} dx_k.
    pub fn integral(&self, k: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[k] += 1;
            let d = Q::from_integer(e2[k].into());
            out.add_term(e2, c / d);
        }
        out
    }

    /// Product keeping only the monomials accepted by `keep`.
    pub fn mul_filtered(&self, other: &Poly, keep: &dyn Fn(&[u32]) -> bool) -> Poly {
        debug_assert_eq!(self.nvars, other.nvars);
        let mut out = Poly::zero(self.nvars);
        let mut e = vec![0u32; self.nvars];
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                for i in 0..self.nvars {
                    e[i] = ea[i] + eb[i];
                }
                if keep(&e) {
                    out.add_term(e.clone(), ca * cb);
                }
            }
        }
        out
    }

    pub fn filtered(&self, keep: &dyn Fn(&[u32]) -> bool) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn max_weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| weighted_degree(e, weights)).max()
    }

    pub fn min_weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| weighted_degree(e, weights)).min()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| total_degree(e)).max()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(xi.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = to_f64(c);
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        t *= xi.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitutes `subs[j]` for x_j; all substitutes share one variable count.
    pub fn compose(&self, subs: &[Poly]) -> Poly {
        self.compose_filtered(subs, &|_| true)
    }

    /// Substitution with every intermediate product filtered by `keep`.
    ///
    /// `keep` must be downward closed under the partial products involved
    /// (a weighted-degree bound with substitutes of positive degree is).
    pub fn compose_filtered(&self, subs: &[Poly], keep: &dyn Fn(&[u32]) -> bool) -> Poly {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let m = subs.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Poly>> = subs.iter().map(|g| vec![Poly::one(m).filtered(keep), g.filtered(keep)]).collect();
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(m, c.clone()).filtered(keep);
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[j].len() <= k as usize {
                    let next = powers[j].last().unwrap().mul_filtered(&subs[j], keep);
                    powers[j].push(next);
                }
                t = t.mul_filtered(&powers[j][k as usize], keep);
                if t.is_zero() {
                    break;
                }
            }
            out = out + t;
        }
        out
    }

    /// Re-indexes into `nvars` variables, sending variable i to `map[i]`.
    pub fn embed(&self, nvars: usize, map: &[usize]) -> Poly {
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; nvars];
            for (i, &k) in e.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Partially evaluates the variables listed in `fixed`, keeping the others.
    pub fn partial_eval(&self, fixed: &[(usize, Q)]) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let mut t = c.clone();
            for (i, v) in fixed {
                let k = e2[*i];
                if k > 0 {
                    t *= num_traits::pow(v.clone(), k as usize);
                    e2[*i] = 0;
                }
            }
            out.add_term(e2, t);
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", format_q(c))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        if self.terms.len() < rhs.terms.len() {
            return rhs + self;
        }
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_filtered(rhs, &|_| true)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    #[test]
    fn arithmetic_and_cancellation() {
        let p = &Poly::one(2) + &x(0);
        let r = &p - &x(0);
        assert_eq!(r, Poly::one(2));
        let sq = &(&Poly::one(2) + &x(0)) * &(&Poly::one(2) - &x(0));
        assert_eq!(sq, &Poly::one(2) - &x(0).pow(2));
    }

    #[test]
    fn derivative_and_integral() {
        let p = x(0).pow(3).scale(&q(2)) + &x(0) * &x(1);
        assert_eq!(p.derivative(0), x(0).pow(2).scale(&q(6)) + x(1));
        assert_eq!(p.derivative(0).integral(0), p.filtered(&|e| e[0] > 0));
    }

    #[test]
    fn compose_binomial() {
        // x^2 ∘ (x + x^2) = x^2 + 2x^3 + x^4
        let one = Poly::var(1, 0);
        let f = one.pow(2);
        let g = &one + &one.pow(2);
        let expect = Poly::from_terms(1, [(vec![2], q(1)), (vec![3], q(2)), (vec![4], q(1))]);
        assert_eq!(f.compose(&[g]), expect);
    }

    #[test]
    fn evaluation() {
        let p = x(0).scale(&frac(1, 2)) + x(1).pow(2);
        assert_eq!(p.eval(&[q(2), q(3)]), q(10));
        assert!((p.eval_f64(&[2.0, 3.0]) - 10.0).abs() < 1e-15);
    }
}
