//! Exponential coordinates of the first kind, the homogeneous/remainder
//! splitting of the coefficients, the nilpotent approximation and the
//! rescaled structures Y^λ.
//!
//! The chart germ is Φ(s) = exp(Σ s_i Y_{J_i})(0), expanded as the operator
//! series Σ_k (1/k!)((Σ s_i Y_{J_i})^k y)(0). A linear change of the target
//! makes its linear part the identity. Fields are pushed forward as
//! (DΦ)^{-1} X(Φ(s)), which stays exact in weighted degree even when the
//! input coordinates carry no grading.

use num_traits::Zero;
use serde::Serialize;

use crate::ccfields::{
    bracket_polys, pushforward_dilation, pushforward_dilation_symbolic, select_adapted_frame,
    words_of_length, AdaptedFrame, CCStructure, LambdaExpansion, PolyVectorField, WordCache,
};
use crate::error::{Error, Result};
use crate::jets::{operator_exponential, Jet, JetMap, Weights};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{serde_qmat, Q};

/// Germ of s ↦ exp(Σ s_i Y_{J_i})(0) and its inverse.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentialChart {
    #[serde(serialize_with = "ser_weights")]
    weights: Weights,
    order: u32,
    #[serde(serialize_with = "ser_map")]
    phi: JetMap,
    #[serde(serialize_with = "ser_map")]
    phi_inv: JetMap,
    #[serde(with = "serde_qmat")]
    normalization: Matrix,
}

fn ser_weights<S: serde::Serializer>(w: &Weights, s: S) -> std::result::Result<S::Ok, S::Error> {
    w.as_slice().serialize(s)
}

fn ser_map<S: serde::Serializer>(m: &JetMap, s: S) -> std::result::Result<S::Ok, S::Error> {
    m.components().serialize(s)
}

impl ExponentialChart {
    /// Φ in the input coordinates, as jets in s with the frame weights.
    pub fn phi(&self) -> &JetMap {
        &self.phi
    }

    /// Φ̃^{-1}(M y) in the input coordinates y, with unit weights (total
    /// degree truncation), since the input coordinates carry no grading.
    pub fn phi_inv(&self) -> &JetMap {
        &self.phi_inv
    }

    /// M = B^{-T}, where row i of B is Y_{J_i}(0).
    pub fn normalization(&self) -> &Matrix {
        &self.normalization
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// M·Φ, the normalized chart, whose linear part is the identity.
    pub fn normalized_phi(&self) -> JetMap {
        JetMap::new(linear_combine(&self.normalization, &polys_of(&self.phi), &self.weights, self.order))
            .expect("normalized chart has a uniform shape")
    }
}

fn polys_of(m: &JetMap) -> Vec<Poly> {
    m.components().iter().map(|c| c.poly().clone()).collect()
}

fn linear_combine(m: &Matrix, v: &[Poly], w: &Weights, order: u32) -> Vec<Jet> {
    let nv = v.first().map(Poly::nvars).unwrap_or(0);
    m.iter()
        .map(|row| {
            let mut acc = Poly::zero(nv);
            for (c, p) in row.iter().zip(v) {
                if !c.is_zero() {
                    acc = acc + p.scale(c);
                }
            }
            Jet::from_poly(w, order, acc)
        })
        .collect()
}

/// Largest total degree to which every input coefficient is known.
fn certified_total_degree(x: &CCStructure) -> u32 {
    x.order() / x.weights().max()
}

fn check_orders(x: &CCStructure, frame: &AdaptedFrame, order: u32) -> Result<()> {
    let s = frame.step();
    if order < s {
        return Err(Error::Domain(format!("order {order} is below the step {s}")));
    }
    if frame.dim() != x.n() {
        return Err(Error::Shape(format!("frame of size {} for dimension {}", frame.dim(), x.n())));
    }
    let required = order + s - 1;
    let have = certified_total_degree(x);
    if have < required {
        return Err(Error::Order { have, required });
    }
    Ok(())
}

/// Φ raw (input coordinates) to weighted order `order` in s.
fn raw_chart(x: &CCStructure, frame: &AdaptedFrame, s_weights: &Weights, order: u32) -> Result<Vec<Poly>> {
    let yf = x.frame_fields(frame);
    (0..x.n())
        .map(|j| {
            let psi = Jet::var(x.weights(), x.order(), j);
            Ok(operator_exponential(&yf, &psi, s_weights, order)?.into_poly())
        })
        .collect()
}

pub fn build_exponential_chart(x: &CCStructure, frame: &AdaptedFrame, order: u32) -> Result<ExponentialChart> {
    check_orders(x, frame, order)?;
    let n = x.n();
    let w = frame.weights();
    let m = linalg::inverse(&linalg::transpose(frame.basis_at_zero()))?;
    let phi_raw = raw_chart(x, frame, &w, order)?;
    let phi = JetMap::new(phi_raw.into_iter().map(|p| Jet::from_poly(&w, order, p)).collect())?;

    // inverse with unit weights: the target coordinates carry no grading
    let unit = Weights::unit(n);
    let raw_unit = raw_chart(x, frame, &unit, order)?;
    let normalized_unit = JetMap::new(linear_combine(&m, &raw_unit, &unit, order))?;
    let inv = normalized_unit.invert()?;
    let my: Vec<Poly> = m
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(Poly::zero(n), |acc, (k, c)| acc + Poly::var(n, k).scale(c))
        })
        .collect();
    let phi_inv = JetMap::new(
        inv.components()
            .iter()
            .map(|c| Jet::from_poly(&unit, order, c.poly().compose(&my)))
            .collect(),
    )?;
    Ok(ExponentialChart {
        weights: w,
        order,
        phi,
        phi_inv,
        normalization: m,
    })
}

/// Pushes every field X_i forward to exponential coordinates, as jets with
/// the frame weights at weighted order `order`.
pub fn to_exponential_coordinates(x: &CCStructure, frame: &AdaptedFrame, order: u32) -> Result<CCStructure> {
    check_orders(x, frame, order)?;
    let n = x.n();
    let s = frame.step();
    let w = frame.weights();
    let m = linalg::inverse(&linalg::transpose(frame.basis_at_zero()))?;
    let phi = raw_chart(x, frame, &w, order + s)?;
    let keep = |e: &[u32]| w.degree(e) <= order;
    let phi_t: Vec<Poly> = linear_combine(&m, &phi, &w, order + s).into_iter().map(Jet::into_poly).collect();
    // E = DΦ̃ − I, exact to weighted order `order`
    let e_mat: Vec<Vec<Poly>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let mut d = phi_t[j].derivative(k).filtered(&keep);
                    if j == k {
                        d = d - Poly::one(n);
                    }
                    d
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(x.r());
    for f in x.fields() {
        // M·X(Φ(s))
        let at_phi: Vec<Poly> = f
            .components()
            .iter()
            .map(|c| c.poly().compose_filtered(&phi, &keep))
            .collect();
        let mut v: Vec<Poly> = linear_combine(&m, &at_phi, &w, order).into_iter().map(Jet::into_poly).collect();
        let mut acc = v.clone();
        // (I + E)^{-1} = Σ (−E)^k; each factor raises the degree
        for _ in 0..=order {
            let next: Vec<Poly> = (0..n)
                .map(|j| {
                    let mut t = Poly::zero(n);
                    for k in 0..n {
                        if !e_mat[j][k].is_zero() && !v[k].is_zero() {
                            t = t - e_mat[j][k].mul_filtered(&v[k], &keep);
                        }
                    }
                    t
                })
                .collect();
            if next.iter().all(Poly::is_zero) {
                break;
            }
            for (a, b) in acc.iter_mut().zip(&next) {
                *a = &*a + b;
            }
            v = next;
        }
        out.push(PolyVectorField::from_polys(&w, order, acc));
    }
    CCStructure::new(out)
}

/// Coefficients split into weighted-homogeneous principal parts and remainders.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedStructure {
    base: CCStructure,
    frame: AdaptedFrame,
    weights: Weights,
    p: Vec<Vec<Jet>>,
    rjet: Vec<Vec<Jet>>,
}

impl DecomposedStructure {
    pub fn base(&self) -> &CCStructure {
        &self.base
    }

    pub fn frame(&self) -> &AdaptedFrame {
        &self.frame
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        self.base.order()
    }

    /// p[i][j], homogeneous of degree w_j − w_i.
    pub fn principal(&self) -> &[Vec<Jet>] {
        &self.p
    }

    /// r[i][j] = a_ij − p_ij.
    pub fn remainder(&self) -> &[Vec<Jet>] {
        &self.rjet
    }

    pub fn remainder_is_zero(&self) -> bool {
        self.rjet.iter().flatten().all(Jet::is_zero)
    }
}

fn decomposition_error(clause: &'static str, i: usize, j: usize, detail: impl Into<String>) -> Error {
    Error::Decomposition {
        clause,
        detail: format!("entry ({}, {}): {}", i + 1, j + 1, detail.into()),
    }
}

/// Splits a_ij = p_ij + r_ij in exponential coordinates and certifies the
/// four clauses: (i) p_ij homogeneous of degree w_j − w_i, (ii) p_ij = δ_ij
/// when w_j ≤ w_i, (iii) r_ij(0) = 0, (iv) every term of r_ij has degree
/// above w_j − w_i.
pub fn decompose(x_exp: &CCStructure, frame: &AdaptedFrame) -> Result<DecomposedStructure> {
    let w = frame.weights();
    if x_exp.weights() != &w {
        return Err(Error::Shape("structure is not expressed in the frame weights".into()));
    }
    let n = x_exp.n();
    let mut p = Vec::with_capacity(x_exp.r());
    let mut rjet = Vec::with_capacity(x_exp.r());
    for (i, f) in x_exp.fields().iter().enumerate() {
        let wi = w[i];
        let mut prow = Vec::with_capacity(n);
        let mut rrow = Vec::with_capacity(n);
        for j in 0..n {
            let a = f.component(j);
            let pij = if w[j] >= wi {
                a.homogeneous_part(w[j] - wi)
            } else {
                Jet::zero(&w, a.order())
            };
            let rij = a.sub(&pij)?;
            let target = w[j] as i64 - wi as i64;
            if pij.terms_sorted().iter().any(|(e, _)| w.degree(e) as i64 != target) {
                return Err(decomposition_error("i", i, j, "principal part is not homogeneous"));
            }
            if w[j] <= wi {
                let delta = if i == j { Jet::one(&w, a.order()) } else { Jet::zero(&w, a.order()) };
                if pij != delta {
                    return Err(decomposition_error("ii", i, j, format!("principal part is {pij}, expected δ")));
                }
            }
            if !rij.value_at_zero().is_zero() {
                return Err(decomposition_error("iii", i, j, "remainder does not vanish at 0"));
            }
            if let Some(d) = rij.min_degree() {
                if d as i64 <= target {
                    return Err(decomposition_error(
                        "iv",
                        i,
                        j,
                        format!("remainder has a term of degree {d} ≤ {target}"),
                    ));
                }
            }
            prow.push(pij);
            rrow.push(rij);
        }
        p.push(prow);
        rjet.push(rrow);
    }
    Ok(DecomposedStructure {
        base: x_exp.clone(),
        frame: frame.clone(),
        weights: w,
        p,
        rjet,
    })
}

/// The homogeneous fields Y_i^∞ and the bracket frame Y_{J_i}^∞.
#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentStructure {
    weights: Weights,
    step: u32,
    order: u32,
    frame: AdaptedFrame,
    fields_inf: Vec<PolyVectorField>,
    frame_inf: Vec<PolyVectorField>,
    det: Q,
}

impl NilpotentStructure {
    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn r(&self) -> usize {
        self.fields_inf.len()
    }

    pub fn frame(&self) -> &AdaptedFrame {
        &self.frame
    }

    pub fn fields(&self) -> &[PolyVectorField] {
        &self.fields_inf
    }

    pub fn frame_fields(&self) -> &[PolyVectorField] {
        &self.frame_inf
    }

    /// The constant value of det(Y_{J_1}^∞, …, Y_{J_n}^∞).
    pub fn determinant(&self) -> &Q {
        &self.det
    }

    /// Re-ingests the fields as an input structure, stored at an order high
    /// enough for a chart of weighted order `order`.
    pub fn to_structure(&self, order: u32) -> Result<CCStructure> {
        let s = self.step;
        let big = (order + s - 1) * self.weights.max();
        let fields = self.fields_inf.iter().map(|f| f.extend_as_polynomial(big)).collect();
        let x = CCStructure::new(fields)?;
        let frame = AdaptedFrame::from_words(&x, self.frame.words().to_vec())?;
        x.with_frame(frame)
    }
}

/// det of a square polynomial matrix by expansion over column subsets.
pub fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    let nv = m.first().and_then(|r| r.first()).map(Poly::nvars).unwrap_or(0);
    let mut dp: Vec<Option<Poly>> = vec![None; 1 << n];
    dp[0] = Some(Poly::one(nv));
    for mask in 1usize..(1 << n) {
        let k = mask.count_ones() as usize - 1;
        let mut acc = Poly::zero(nv);
        let mut pos = 0;
        for c in 0..n {
            if mask & (1 << c) == 0 {
                continue;
            }
            let rest = dp[mask & !(1 << c)].as_ref().unwrap();
            if !m[k][c].is_zero() && !rest.is_zero() {
                let term = &m[k][c] * rest;
                acc = if (k + pos) % 2 == 0 { acc + term } else { acc - term };
            }
            pos += 1;
        }
        dp[mask] = Some(acc);
    }
    dp.pop().flatten().unwrap()
}

/// Builds Y^∞ from the principal parts and certifies homogeneity, nilpotency
/// of step s and constancy of the frame determinant.
pub fn nilpotent_approximation(d: &DecomposedStructure) -> Result<NilpotentStructure> {
    let w = d.weights.clone();
    let order = d.order();
    let step = d.frame.step();
    let fields_inf: Vec<PolyVectorField> = d
        .p
        .iter()
        .map(|row| PolyVectorField::new(row.clone()))
        .collect::<Result<_>>()?;
    for (i, f) in fields_inf.iter().enumerate() {
        if !pushforward_dilation_symbolic(f).is_exactly(1, f) {
            return Err(Error::Consistency(format!("Y_{}^∞ is not homogeneous of degree 1", i + 1)));
        }
    }
    let gens: Vec<Vec<Poly>> = fields_inf.iter().map(PolyVectorField::polys).collect();
    let mut cache = WordCache::new(&gens);
    let frame_polys: Vec<Vec<Poly>> = d.frame.words().iter().map(|j| cache.get(j.letters())).collect();
    for word in words_of_length(fields_inf.len(), step as usize + 1) {
        if cache.get(&word).iter().any(|p| !p.is_zero()) {
            return Err(Error::Consistency(format!("bracket {word:?} of length s + 1 is nonzero")));
        }
    }
    let n = w.len();
    // columns are fields: entry (j, i) = component j of Y_{J_i}^∞
    let mat: Vec<Vec<Poly>> = (0..n).map(|j| (0..n).map(|i| frame_polys[i][j].clone()).collect()).collect();
    let det = poly_det(&mat);
    let c = det.constant_term();
    if det.len() > 1 || c.is_zero() {
        return Err(Error::Consistency(format!("frame determinant {det} is not a nonzero constant")));
    }
    let frame_inf = frame_polys
        .into_iter()
        .map(|p| PolyVectorField::from_polys(&w, order, p))
        .collect();
    Ok(NilpotentStructure {
        weights: w,
        step,
        order,
        frame: d.frame.clone(),
        fields_inf,
        frame_inf,
        det: c,
    })
}

/// Y_i^λ = λ^{-1}(δ_λ)_* Y_i, exact for rational λ > 0.
pub fn rescale_structure(d: &DecomposedStructure, lambda: &Q) -> Result<Vec<PolyVectorField>> {
    if *lambda <= Q::zero() {
        return Err(Error::Domain("rescaling needs λ > 0".into()));
    }
    let inv = lambda.recip();
    d.base
        .fields()
        .iter()
        .map(|f| Ok(pushforward_dilation(f, lambda)?.scale(&inv)))
        .collect()
}

/// Y_i^λ as Laurent polynomials in a symbolic λ.
pub fn rescale_structure_symbolic(d: &DecomposedStructure) -> Vec<LambdaExpansion> {
    d.base.fields().iter().map(|f| pushforward_dilation_symbolic(f).shift(-1)).collect()
}

/// Default chart order 2s.
pub fn default_order(frame: &AdaptedFrame) -> u32 {
    2 * frame.step()
}

/// Every stage of the pipeline from an input structure to Y^∞.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub frame: AdaptedFrame,
    pub chart: ExponentialChart,
    pub decomposition: DecomposedStructure,
    pub nilpotent: NilpotentStructure,
}

/// Frame (the attached one, or the greedy one within `max_step`), chart,
/// splitting and nilpotent approximation at `order` (default 2s).
pub fn approximate(x: &CCStructure, max_step: Option<usize>, order: Option<u32>) -> Result<Approximation> {
    let frame = match x.frame() {
        Some(f) => f.clone(),
        None => select_adapted_frame(x, max_step.unwrap_or(x.n()))?,
    };
    let order = order.unwrap_or_else(|| default_order(&frame));
    let chart = build_exponential_chart(x, &frame, order)?;
    let x_exp = to_exponential_coordinates(x, &frame, order)?;
    let decomposition = decompose(&x_exp, &frame)?;
    let nilpotent = nilpotent_approximation(&decomposition)?;
    Ok(Approximation {
        frame,
        chart,
        decomposition,
        nilpotent,
    })
}

/// λ^{-ℓ(J)}(δ_λ)_* Y_J for the exponential-coordinate fields, computed from
/// truncated brackets; returns (expansion, Y_J^∞ at the same order).
pub fn rescaled_bracket(
    d: &DecomposedStructure,
    nil: &NilpotentStructure,
    letters: &[usize],
) -> Result<(LambdaExpansion, PolyVectorField)> {
    let fields = d.base.fields();
    let mut acc = fields[letters[letters.len() - 1] - 1].clone();
    for &l in letters[..letters.len() - 1].iter().rev() {
        let lhs = fields[l - 1].truncate(acc.order());
        acc = crate::ccfields::lie_bracket_truncated(&lhs, &acc)?;
    }
    let exp = pushforward_dilation_symbolic(&acc).shift(-(letters.len() as i64));
    let gens: Vec<Vec<Poly>> = nil.fields().iter().map(PolyVectorField::polys).collect();
    let inf = bracket_word_polys(&gens, letters);
    Ok((exp, PolyVectorField::from_polys(&d.weights, acc.order(), inf)))
}

fn bracket_word_polys(gens: &[Vec<Poly>], letters: &[usize]) -> Vec<Poly> {
    let mut acc = gens[letters[letters.len() - 1] - 1].clone();
    for &l in letters[..letters.len() - 1].iter().rev() {
        acc = bracket_polys(&gens[l - 1], &acc);
    }
    acc
}
