//! Multivariate power series truncated by weighted degree.
//!
//! A [`Jet`] stores every monomial x^α with weighted degree
//! w_α = Σ α_ℓ w_ℓ ≤ N, with exact rational coefficients. Products,
//! substitutions and inversions discard everything above N.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ccfields::PolyVectorField;
use crate::error::{Error, Result};
use crate::poly::{total_degree, weighted_degree, Exponent, Poly};
use crate::rational::{serde_q, Q};

/// Coordinate weights w_1 ≤ … ≤ w_n with w_1 = 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Weights(Arc<[u32]>);

impl Weights {
    pub fn new(w: Vec<u32>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::Domain("weights must be nonempty".into()));
        }
        if w[0] != 1 {
            return Err(Error::Domain(format!("first weight must be 1, got {}", w[0])));
        }
        if w.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::Domain(format!("weights must be nondecreasing: {w:?}")));
        }
        Ok(Weights(w.into()))
    }

    pub fn unit(n: usize) -> Self {
        Weights(vec![1; n].into())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn degree(&self, exp: &[u32]) -> u32 {
        weighted_degree(exp, &self.0)
    }
}

impl std::ops::Index<usize> for Weights {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Debug for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Jet {
    weights: Weights,
    order: u32,
    poly: Poly,
}

impl Jet {
    pub fn zero(weights: &Weights, order: u32) -> Jet {
        Jet {
            weights: weights.clone(),
            order,
            poly: Poly::zero(weights.len()),
        }
    }

    pub fn constant(weights: &Weights, order: u32, c: Q) -> Jet {
        Jet::from_poly(weights, order, Poly::constant(weights.len(), c))
    }

    pub fn one(weights: &Weights, order: u32) -> Jet {
        Jet::constant(weights, order, Q::one())
    }

    /// x_i, 0-based.
    pub fn var(weights: &Weights, order: u32, i: usize) -> Jet {
        Jet::from_poly(weights, order, Poly::var(weights.len(), i))
    }

    /// Truncates `poly` to weighted degree `order`.
    pub fn from_poly(weights: &Weights, order: u32, poly: Poly) -> Jet {
        assert_eq!(poly.nvars(), weights.len(), "variable count must match weights");
        let w = weights.clone();
        let poly = poly.filtered(&|e| w.degree(e) <= order);
        Jet {
            weights: weights.clone(),
            order,
            poly,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, Q)>>(
        weights: &Weights,
        order: u32,
        terms: I,
    ) -> Jet {
        Jet::from_poly(weights, order, Poly::from_terms(weights.len(), terms))
    }

    pub fn nvars(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn into_poly(self) -> Poly {
        self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn coeff(&self, exp: &[u32]) -> Q {
        self.poly.coeff(exp)
    }

    pub fn value_at_zero(&self) -> Q {
        self.poly.constant_term()
    }

    /// Terms in canonical graded-lexicographic order on (w_α, α).
    pub fn terms_sorted(&self) -> Vec<(Exponent, Q)> {
        let mut v: Vec<(Exponent, Q)> = self.poly.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
        v.sort_by(|(a, _), (b, _)| {
            (self.weights.degree(a), a).cmp(&(self.weights.degree(b), b))
        });
        v
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.poly.min_weighted_degree(self.weights.as_slice())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.poly.max_weighted_degree(self.weights.as_slice())
    }

    /// Part of weighted degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Jet {
        let w = self.weights.clone();
        Jet {
            weights: self.weights.clone(),
            order: self.order,
            poly: self.poly.filtered(&|e| w.degree(e) == d),
        }
    }

    pub fn same_shape(&self, other: &Jet) -> bool {
        self.order == other.order && self.weights == other.weights
    }

    pub fn check_shape(&self, other: &Jet) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "weights {:?} order {} vs weights {:?} order {}",
                self.weights, self.order, other.weights, other.order
            )))
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        Ok(self.with_poly(&self.poly + &other.poly))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        Ok(self.with_poly(&self.poly - &other.poly))
    }

    pub fn neg(&self) -> Jet {
        self.with_poly(-&self.poly)
    }

    pub fn scale(&self, c: &Q) -> Jet {
        self.with_poly(self.poly.scale(c))
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        let w = self.weights.clone();
        let n = self.order;
        Ok(self.with_poly(self.poly.mul_filtered(&other.poly, &|e| w.degree(e) <= n)))
    }

    /// ∂/∂x_k; the coefficients above `order − w_k` are not determined by the jet.
    pub fn derivative(&self, k: usize) -> Jet {
        self.with_poly(self.poly.derivative(k))
    }

    /// Drops terms above `order` and records the new order.
    pub fn truncate(&self, order: u32) -> Jet {
        Jet::from_poly(&self.weights, order, self.poly.clone())
    }

    /// Reinterprets the jet as an exact polynomial known to a higher order.
    pub fn extend_as_polynomial(&self, order: u32) -> Jet {
        Jet {
            weights: self.weights.clone(),
            order: order.max(self.order),
            poly: self.poly.clone(),
        }
    }

    /// Same terms with different weights, truncated to `order`.
    pub fn reweighted(&self, weights: &Weights, order: u32) -> Jet {
        Jet::from_poly(weights, order, self.poly.clone())
    }

    fn with_poly(&self, poly: Poly) -> Jet {
        Jet::from_poly(&self.weights, self.order, poly)
    }

    /// Truncated substitution f(g(x)).
    pub fn compose(&self, g: &JetMap) -> Result<Jet> {
        if g.len() != self.nvars() {
            return Err(Error::Shape(format!(
                "substitution has {} components for {} variables",
                g.len(),
                self.nvars()
            )));
        }
        for c in g.components() {
            self.check_shape(c)?;
        }
        g.check_admissible()?;
        let w = self.weights.clone();
        let n = self.order;
        let subs: Vec<Poly> = g.components().iter().map(|c| c.poly.clone()).collect();
        let out = self.poly.compose_filtered(&subs, &|e| w.degree(e) <= n);
        Ok(self.with_poly(out))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[{:?}; N={}]({})", self.weights, self.order, self.poly)
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

pub fn jet_add(a: &Jet, b: &Jet) -> Result<Jet> {
    a.add(b)
}

pub fn jet_mul(a: &Jet, b: &Jet) -> Result<Jet> {
    a.mul(b)
}

pub fn jet_compose(f: &Jet, g: &JetMap) -> Result<Jet> {
    f.compose(g)
}

pub fn jet_invert(g: &JetMap) -> Result<JetMap> {
    g.invert()
}

/// A tuple of jets sharing variables, weights and order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JetMap {
    components: Vec<Jet>,
}

impl JetMap {
    pub fn new(components: Vec<Jet>) -> Result<JetMap> {
        if let Some(first) = components.first() {
            for c in &components[1..] {
                first.check_shape(c)?;
            }
        }
        Ok(JetMap { components })
    }

    pub fn identity(weights: &Weights, order: u32) -> JetMap {
        JetMap {
            components: (0..weights.len()).map(|i| Jet::var(weights, order, i)).collect(),
        }
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> Option<&Weights> {
        self.components.first().map(|c| c.weights())
    }

    pub fn order(&self) -> Option<u32> {
        self.components.first().map(|c| c.order())
    }

    /// Coefficients of the total-degree-1 terms: `m[j][k]` = ∂g_j/∂x_k(0).
    pub fn linear_part(&self) -> Vec<Vec<Q>> {
        self.components
            .iter()
            .map(|c| {
                (0..c.nvars())
                    .map(|k| {
                        let mut e = vec![0; c.nvars()];
                        e[k] = 1;
                        c.coeff(&e)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        match (self.weights(), self.order()) {
            (Some(w), Some(n)) => *self == JetMap::identity(w, n),
            _ => true,
        }
    }

    /// Zero constant terms and every component g_j of weighted degree ≥ w_j.
    pub fn check_admissible(&self) -> Result<()> {
        for (j, c) in self.components.iter().enumerate() {
            if !c.value_at_zero().is_zero() {
                return Err(Error::Domain(format!("component {} has a nonzero constant term", j + 1)));
            }
            let wj = c.weights()[j];
            if let Some(d) = c.min_degree() {
                if d < wj {
                    return Err(Error::Degree(format!(
                        "component {} has a term of weighted degree {d} < w_{} = {wj}",
                        j + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Componentwise f_j ∘ g.
    pub fn compose(&self, g: &JetMap) -> Result<JetMap> {
        let comps = self.components.iter().map(|f| f.compose(g)).collect::<Result<Vec<_>>>()?;
        JetMap::new(comps)
    }

    /// Inverse of a map whose linear part is the identity, to the shared order.
    pub fn invert(&self) -> Result<JetMap> {
        let (w, n) = match (self.weights(), self.order()) {
            (Some(w), Some(n)) => (w.clone(), n),
            _ => return Ok(self.clone()),
        };
        if self.len() != w.len() {
            return Err(Error::Shape(format!("{} components for {} variables", self.len(), w.len())));
        }
        let lin = self.linear_part();
        for (j, row) in lin.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let want = if j == k { Q::one() } else { Q::zero() };
                if *v != want {
                    return Err(Error::Unsupported(
                        "inversion requires the identity linear part".into(),
                    ));
                }
            }
        }
        self.check_admissible()?;
        let id = JetMap::identity(&w, n);
        // g = id + q; iterate h <- id - q∘h until it stops moving
        let q: Vec<Jet> = self
            .components
            .iter()
            .zip(id.components())
            .map(|(g, x)| g.sub(x))
            .collect::<Result<_>>()?;
        let mut h = id.clone();
        let cap = (n as usize + 1) * (w.len() + 1);
        for _ in 0..=cap {
            let next = JetMap::new(
                q.iter()
                    .zip(id.components())
                    .map(|(qj, x)| Ok(x.sub(&qj.compose(&h)?)?))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            if next == h {
                return Ok(h);
            }
            h = next;
        }
        Err(Error::Consistency("series inversion did not stabilise".into()))
    }
}

/// Coefficient of the k-th term of the operator exponential:
/// Σ over length-k words of s_{i1}⋯s_{ik} (Y_{i1}⋯Y_{ik} ψ)(0) / k!.
///
/// The fields and ψ are treated as exact polynomials in their own variables;
/// the result is a jet in s (one variable per field) with the given weights,
/// truncated to `order`.
pub fn apply_operator_power(
    fields: &[PolyVectorField],
    psi: &Jet,
    k: u32,
    s_weights: &Weights,
    order: u32,
) -> Result<Jet> {
    let powers = operator_powers(fields, psi, s_weights, order, Some(k))?;
    Ok(powers.into_iter().nth(k as usize).unwrap_or_else(|| Jet::zero(s_weights, order)))
}

/// Σ_k (1/k!)((Σ s_i Y_i)^k ψ)(0) truncated at weighted degree `order` in s.
pub fn operator_exponential(
    fields: &[PolyVectorField],
    psi: &Jet,
    s_weights: &Weights,
    order: u32,
) -> Result<Jet> {
    let mut acc = Jet::zero(s_weights, order);
    for term in operator_powers(fields, psi, s_weights, order, None)? {
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// The list of k-th terms (already divided by k!) for k = 0, 1, … .
fn operator_powers(
    fields: &[PolyVectorField],
    psi: &Jet,
    s_weights: &Weights,
    order: u32,
    only: Option<u32>,
) -> Result<Vec<Jet>> {
    let m = fields.len();
    if s_weights.len() != m {
        return Err(Error::Shape(format!("{} weights for {m} fields", s_weights.len())));
    }
    let n = psi.nvars();
    for f in fields {
        if f.nvars() != n {
            return Err(Error::Shape(format!("field in {} variables, ψ in {n}", f.nvars())));
        }
    }
    let nv = m + n;
    let y_map: Vec<usize> = (m..nv).collect();
    // coefficient polynomials of each field, lifted into (s, y) space and
    // premultiplied by s_i
    let lifted: Vec<Vec<Poly>> = fields
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let si = Poly::var(nv, i);
            f.components().iter().map(|c| &si * &c.poly().embed(nv, &y_map)).collect()
        })
        .collect();
    let sw: Vec<u32> = s_weights.as_slice().to_vec();
    let keep = |e: &[u32]| -> bool {
        let ds = weighted_degree(&e[..m], &sw);
        let dy = total_degree(&e[m..]);
        ds + dy <= order
    };
    let keep_k = |e: &[u32], left: u32| -> bool {
        let ds = weighted_degree(&e[..m], &sw);
        let dy = total_degree(&e[m..]);
        dy <= left && ds + left <= order
    };
    let at_zero = |t: &Poly| -> Poly {
        let mut out = Poly::zero(m);
        for (e, c) in t.terms() {
            if e[m..].iter().all(|&x| x == 0) {
                out.add_term(e[..m].to_vec(), c.clone());
            }
        }
        out
    };
    let mut t = psi.poly().embed(nv, &y_map);
    let mut out = Vec::new();
    let mut fact = Q::one();
    let mut step = 0u32;
    loop {
        let left = only.map(|k| k.saturating_sub(step));
        t = match left {
            Some(l) => t.filtered(&|e| keep_k(e, l)),
            None => t.filtered(&keep),
        };
        if step > 0 {
            fact *= Q::from_integer(step.into());
        }
        let value = at_zero(&t).scale(&fact.recip());
        out.push(Jet::from_poly(s_weights, order, value));
        if t.is_zero() || step >= order || only.is_some_and(|k| step >= k) {
            break;
        }
        // t <- Σ_i s_i Y_i t
        let mut next = Poly::zero(nv);
        for field in &lifted {
            for (j, coef) in field.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let d = t.derivative(m + j);
                if d.is_zero() {
                    continue;
                }
                next = next + coef.mul_filtered(&d, &|e| match left {
                    Some(l) => keep_k(e, l.saturating_sub(1)),
                    None => keep(e),
                });
            }
        }
        t = next;
        step += 1;
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    #[serde(with = "serde_q")]
    coef: Q,
}

#[derive(Serialize, Deserialize)]
struct JetJson {
    nvars: usize,
    weights: Vec<u32>,
    order: u32,
    terms: Vec<TermJson>,
}

impl Serialize for Jet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JetJson {
            nvars: self.nvars(),
            weights: self.weights.as_slice().to_vec(),
            order: self.order,
            terms: self
                .terms_sorted()
                .into_iter()
                .map(|(exp, coef)| TermJson { exp, coef })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Jet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Jet, D::Error> {
        use serde::de::Error as _;
        let raw = JetJson::deserialize(d)?;
        if raw.weights.len() != raw.nvars {
            return Err(D::Error::custom(format!(
                "{} weights for {} variables",
                raw.weights.len(),
                raw.nvars
            )));
        }
        let w = Weights::new(raw.weights).map_err(D::Error::custom)?;
        let mut poly = Poly::zero(raw.nvars);
        for t in raw.terms {
            if t.exp.len() != raw.nvars {
                return Err(D::Error::custom(format!("exponent {:?} has wrong length", t.exp)));
            }
            if w.degree(&t.exp) > raw.order {
                return Err(D::Error::custom(format!(
                    "term {:?} exceeds order {}",
                    t.exp, raw.order
                )));
            }
            poly.add_term(t.exp, t.coef);
        }
        Ok(Jet::from_poly(&w, raw.order, poly))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};

    fn w(v: &[u32]) -> Weights {
        Weights::new(v.to_vec()).unwrap()
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(vec![1, 1, 2]).is_ok());
        assert!(Weights::new(vec![2, 2]).is_err());
        assert!(Weights::new(vec![1, 3, 2]).is_err());
        assert!(Weights::new(vec![]).is_err());
    }

    #[test]
    fn add_examples() {
        let ws = w(&[1]);
        let x = Jet::var(&ws, 3, 0);
        let one = Jet::one(&ws, 3);
        assert_eq!(one.add(&x).unwrap().add(&x.neg()).unwrap(), one);
        assert_eq!(Jet::zero(&ws, 3).add(&x).unwrap(), x);
        assert_eq!(x.add(&x).unwrap(), x.scale(&q(2)));
    }

    #[test]
    fn mul_examples() {
        let ws = w(&[1]);
        let x = Jet::var(&ws, 2, 0);
        let one = Jet::one(&ws, 2);
        let p = one.add(&x).unwrap().mul(&one.sub(&x).unwrap()).unwrap();
        assert_eq!(p, one.sub(&x.mul(&x).unwrap()).unwrap());
        assert_eq!(x.mul(&x).unwrap().coeff(&[2]), q(1));

        let w12 = w(&[1, 2]);
        let x1 = Jet::var(&w12, 2, 0);
        let x2 = Jet::var(&w12, 2, 1);
        assert!(x1.mul(&x2).unwrap().is_zero());
    }

    #[test]
    fn shape_errors() {
        let a = Jet::var(&w(&[1]), 2, 0);
        let b = Jet::var(&w(&[1]), 3, 0);
        assert!(matches!(a.add(&b), Err(Error::Shape(_))));
        assert!(matches!(a.mul(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn compose_examples() {
        let ws = w(&[1]);
        let x = Jet::var(&ws, 4, 0);
        let f = x.mul(&x).unwrap();
        let g = JetMap::new(vec![x.add(&f).unwrap()]).unwrap();
        let expect = Jet::from_terms(&ws, 4, [(vec![2], q(1)), (vec![3], q(2)), (vec![4], q(1))]);
        assert_eq!(f.compose(&g).unwrap(), expect);
        assert_eq!(f.compose(&JetMap::identity(&ws, 4)).unwrap(), f);
    }

    #[test]
    fn compose_geometric_series_with_its_inverse() {
        // x/(1-x) = Σ x^k and x/(1+x) = Σ (-1)^{k+1} x^k, both to order 5
        let ws = w(&[1]);
        let n = 5;
        let f = Jet::from_terms(&ws, n, (1..=n).map(|k| (vec![k], q(1))));
        let g = Jet::from_terms(&ws, n, (1..=n).map(|k| (vec![k], q(if k % 2 == 1 { 1 } else { -1 }))));
        let out = f.compose(&JetMap::new(vec![g]).unwrap()).unwrap();
        assert_eq!(out, Jet::var(&ws, n, 0));
    }

    #[test]
    fn compose_rejects_constant_and_low_degree() {
        let ws = w(&[1]);
        let x = Jet::var(&ws, 3, 0);
        let g = JetMap::new(vec![x.add(&Jet::one(&ws, 3)).unwrap()]).unwrap();
        assert!(matches!(x.compose(&g), Err(Error::Domain(_))));

        let w112 = w(&[1, 1, 2]);
        let f = Jet::var(&w112, 2, 2);
        let bad = JetMap::new(vec![
            Jet::var(&w112, 2, 0),
            Jet::var(&w112, 2, 1),
            Jet::var(&w112, 2, 0),
        ])
        .unwrap();
        assert!(matches!(f.compose(&bad), Err(Error::Degree(_))));
    }

    #[test]
    fn invert_examples() {
        let w112 = w(&[1, 1, 2]);
        let x = |i| Jet::var(&w112, 2, i);
        assert!(JetMap::identity(&w112, 2).invert().unwrap().is_identity());

        let x1x2 = x(0).mul(&x(1)).unwrap();
        let g = JetMap::new(vec![x(0), x(1), x(2).add(&x1x2.scale(&frac(1, 2))).unwrap()]).unwrap();
        let h = g.invert().unwrap();
        let expect = JetMap::new(vec![x(0), x(1), x(2).sub(&x1x2.scale(&frac(1, 2))).unwrap()]).unwrap();
        assert_eq!(h, expect);
        assert!(g.compose(&h).unwrap().is_identity());

        let w1 = w(&[1]);
        let y = Jet::var(&w1, 3, 0);
        let g = JetMap::new(vec![y.add(&y.mul(&y).unwrap()).unwrap()]).unwrap();
        let expect = Jet::from_terms(&w1, 3, [(vec![1], q(1)), (vec![2], q(-1)), (vec![3], q(2))]);
        assert_eq!(g.invert().unwrap().components()[0], expect);
    }

    #[test]
    fn invert_rejects_nonidentity_linear_part() {
        let w1 = w(&[1]);
        let g = JetMap::new(vec![Jet::var(&w1, 3, 0).scale(&q(2))]).unwrap();
        assert!(matches!(g.invert(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn canonical_order_is_graded() {
        let w12 = w(&[1, 2]);
        let j = Jet::from_terms(&w12, 4, [(vec![0, 1], q(1)), (vec![3, 0], q(1)), (vec![1, 0], q(1))]);
        let order: Vec<Exponent> = j.terms_sorted().into_iter().map(|(e, _)| e).collect();
        assert_eq!(order, vec![vec![1, 0], vec![0, 1], vec![3, 0]]);
    }

    #[test]
    fn json_roundtrip_and_format() {
        let w12 = w(&[1, 2]);
        let j = Jet::from_terms(&w12, 3, [(vec![1, 0], frac(-1, 2)), (vec![0, 1], q(3))]);
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(
            s,
            r#"{"nvars":2,"weights":[1,2],"order":3,"terms":[{"exp":[1,0],"coef":"-1/2"},{"exp":[0,1],"coef":"3"}]}"#
        );
        let back: Jet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
        let bad = r#"{"nvars":1,"weights":[1],"order":1,"terms":[{"exp":[2],"coef":"1"}]}"#;
        assert!(serde_json::from_str::<Jet>(bad).is_err());
    }
}
