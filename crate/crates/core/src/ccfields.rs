//! Polynomial vector fields, iterated brackets, adapted frames, and the
//! anisotropic dilations attached to a frame.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Jet, Weights};
use crate::linalg::{self, Matrix};
use crate::poly::Poly;
use crate::rational::{pow_i, serde_qmat, to_f64, Q};

/// Σ_j a_j(x) ∂/∂x_j with every a_j a jet of a common shape.
#[derive(Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    components: Vec<Jet>,
}

impl PolyVectorField {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(Error::Shape("a vector field needs at least one component".into()));
        }
        for c in &components {
            if c.nvars() != n {
                return Err(Error::Shape(format!(
                    "component in {} variables for an {n}-dimensional field",
                    c.nvars()
                )));
            }
            components[0].check_shape(c)?;
        }
        Ok(PolyVectorField { components })
    }

    pub fn zero(weights: &Weights, order: u32) -> Self {
        PolyVectorField {
            components: (0..weights.len()).map(|_| Jet::zero(weights, order)).collect(),
        }
    }

    /// The constant field ∂/∂x_j (0-based).
    pub fn coordinate(weights: &Weights, order: u32, j: usize) -> Self {
        let mut f = PolyVectorField::zero(weights, order);
        f.components[j] = Jet::one(weights, order);
        f
    }

    pub(crate) fn from_polys(weights: &Weights, order: u32, polys: Vec<Poly>) -> Self {
        PolyVectorField {
            components: polys.into_iter().map(|p| Jet::from_poly(weights, order, p)).collect(),
        }
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Jet {
        &self.components[j]
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &Weights {
        self.components[0].weights()
    }

    pub fn order(&self) -> u32 {
        self.components[0].order()
    }

    pub(crate) fn polys(&self) -> Vec<Poly> {
        self.components.iter().map(|c| c.poly().clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Jet::is_zero)
    }

    pub fn value_at_zero(&self) -> Vec<Q> {
        self.components.iter().map(Jet::value_at_zero).collect()
    }

    pub fn eval(&self, x: &[Q]) -> Vec<Q> {
        self.components.iter().map(|c| c.poly().eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.poly().eval_f64(x)).collect()
    }

    pub fn check_shape(&self, other: &PolyVectorField) -> Result<()> {
        if self.nvars() != other.nvars() {
            return Err(Error::Shape(format!("{} vs {} components", self.nvars(), other.nvars())));
        }
        self.components[0].check_shape(&other.components[0])
    }

    pub fn add(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        self.check_shape(other)?;
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &PolyVectorField) -> Result<PolyVectorField> {
        self.check_shape(other)?;
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &Q) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|j| j.scale(c)).collect(),
        }
    }

    /// Multiplies every component by the jet `f`.
    pub fn mul_jet(&self, f: &Jet) -> Result<PolyVectorField> {
        Ok(PolyVectorField {
            components: self.components.iter().map(|c| c.mul(f)).collect::<Result<_>>()?,
        })
    }

    fn zip_with(
        &self,
        other: &PolyVectorField,
        op: impl Fn(&Jet, &Jet) -> Result<Jet>,
    ) -> Result<PolyVectorField> {
        Ok(PolyVectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| op(a, b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn truncate(&self, order: u32) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|c| c.truncate(order)).collect(),
        }
    }

    pub fn reweighted(&self, weights: &Weights, order: u32) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|c| c.reweighted(weights, order)).collect(),
        }
    }

    pub fn extend_as_polynomial(&self, order: u32) -> PolyVectorField {
        PolyVectorField {
            components: self.components.iter().map(|c| c.extend_as_polynomial(order)).collect(),
        }
    }

    /// The largest weighted degree appearing in any component.
    pub fn max_degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Jet::max_degree).max()
    }
}

impl fmt::Debug for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, c) in self.components.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for PolyVectorField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.components.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyVectorField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let comps = Vec::<Jet>::deserialize(d)?;
        PolyVectorField::new(comps).map_err(serde::de::Error::custom)
    }
}

/// Untruncated bracket of polynomial fields given as coefficient lists.
pub(crate) fn bracket_polys(v: &[Poly], w: &[Poly]) -> Vec<Poly> {
    let n = v.len();
    (0..n)
        .map(|j| {
            let mut acc = Poly::zero(n);
            for k in 0..n {
                if !v[k].is_zero() {
                    acc = acc + &v[k] * &w[j].derivative(k);
                }
                if !w[k].is_zero() {
                    acc = acc - &w[k] * &v[j].derivative(k);
                }
            }
            acc
        })
        .collect()
}

/// [V, W] = V(W) − W(V) for polynomial fields.
///
/// Fails with [`Error::Truncated`] when the exact bracket has a term above
/// the shared order, since the jets could not hold it.
pub fn lie_bracket(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    v.check_shape(w)?;
    let out = bracket_polys(&v.polys(), &w.polys());
    let weights = v.weights().clone();
    let order = v.order();
    for p in &out {
        if let Some(d) = p.max_weighted_degree(weights.as_slice()) {
            if d > order {
                return Err(Error::Truncated(format!(
                    "bracket has a term of weighted degree {d} above order {order}"
                )));
            }
        }
    }
    Ok(PolyVectorField::from_polys(&weights, order, out))
}

/// Bracket of truncated jets; the result is only determined up to order
/// N − w_n and is returned at that order.
pub fn lie_bracket_truncated(v: &PolyVectorField, w: &PolyVectorField) -> Result<PolyVectorField> {
    v.check_shape(w)?;
    let loss = v.weights().max();
    let order = v.order().checked_sub(loss).ok_or_else(|| {
        Error::Truncated(format!("order {} leaves nothing after a bracket", v.order()))
    })?;
    let out = bracket_polys(&v.polys(), &w.polys());
    Ok(PolyVectorField::from_polys(v.weights(), order, out))
}

/// A bracket word J = (j_1, …, j_k), letters 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BracketWord {
    letters: Vec<usize>,
}

impl BracketWord {
    pub fn new(letters: Vec<usize>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::Domain("bracket word must be nonempty".into()));
        }
        if letters.contains(&0) {
            return Err(Error::BadLetter { letter: 0, rank: 0 });
        }
        Ok(BracketWord { letters })
    }

    pub fn single(i: usize) -> Self {
        BracketWord { letters: vec![i] }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check(&self, rank: usize) -> Result<()> {
        match self.letters.iter().find(|&&l| l == 0 || l > rank) {
            Some(&letter) => Err(Error::BadLetter { letter, rank }),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.letters)
    }
}

/// Right-nested iterated bracket [V_{j1},[…,[V_{jk−1},V_{jk}]…]] of exact
/// polynomial fields, memoised on word suffixes.
pub(crate) struct WordCache<'a> {
    gens: &'a [Vec<Poly>],
    cache: HashMap<Vec<usize>, Vec<Poly>>,
}

impl<'a> WordCache<'a> {
    pub(crate) fn new(gens: &'a [Vec<Poly>]) -> Self {
        WordCache {
            gens,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, letters: &[usize]) -> Vec<Poly> {
        if let Some(v) = self.cache.get(letters) {
            return v.clone();
        }
        let out = if letters.len() == 1 {
            self.gens[letters[0] - 1].clone()
        } else {
            let tail = self.get(&letters[1..]);
            bracket_polys(&self.gens[letters[0] - 1], &tail)
        };
        self.cache.insert(letters.to_vec(), out.clone());
        out
    }
}

/// Adapted bracket frame J_1..J_n at the origin.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AdaptedFrame {
    words: Vec<BracketWord>,
    weights: Vec<u32>,
    step: u32,
    #[serde(rename = "basis", with = "serde_qmat")]
    basis_at_zero: Matrix,
}

impl AdaptedFrame {
    pub fn words(&self) -> &[BracketWord] {
        &self.words
    }

    pub fn weights(&self) -> Weights {
        Weights::new(self.weights.clone()).expect("frame weights are validated")
    }

    pub fn step(&self) -> u32 {
        self.step
    }

    /// Row i is Y_{J_i}(0).
    pub fn basis_at_zero(&self) -> &Matrix {
        &self.basis_at_zero
    }

    pub fn dim(&self) -> usize {
        self.words.len()
    }

    /// Builds a frame from given words, checking every frame invariant.
    pub fn from_words(x: &CCStructure, words: Vec<BracketWord>) -> Result<AdaptedFrame> {
        let gens: Vec<Vec<Poly>> = x.fields.iter().map(PolyVectorField::polys).collect();
        let mut cache = WordCache::new(&gens);
        for w in &words {
            w.check(x.r)?;
        }
        let basis: Matrix = words.iter().map(|w| eval_at_zero(&cache.get(w.letters()))).collect();
        let weights: Vec<u32> = words.iter().map(|w| w.len() as u32).collect();
        let frame = AdaptedFrame {
            step: weights.last().copied().unwrap_or(1),
            words,
            weights,
            basis_at_zero: basis,
        };
        frame.validate(x)?;
        Ok(frame)
    }

    /// Checks the structural invariants against the structure it was built from.
    pub fn validate(&self, x: &CCStructure) -> Result<()> {
        let n = x.n;
        if self.words.len() != n {
            return Err(Error::Structure(format!("{} words for dimension {n}", self.words.len())));
        }
        for i in 0..x.r {
            if self.words[i].letters() != [i + 1] {
                return Err(Error::Structure(format!("word {} must be the single letter ({})", i + 1, i + 1)));
            }
        }
        Weights::new(self.weights.clone())?;
        if linalg::rank(&self.basis_at_zero) != n {
            return Err(Error::Rank("frame vectors at 0 are not a basis".into()));
        }
        // first dim L^j rows span L^j
        let gens: Vec<Vec<Poly>> = x.fields.iter().map(PolyVectorField::polys).collect();
        let mut cache = WordCache::new(&gens);
        let mut all_rows: Matrix = Vec::new();
        for len in 1..=self.step as usize {
            for word in words_of_length(x.r, len) {
                all_rows.push(eval_at_zero(&cache.get(&word)));
            }
            let dim_l = linalg::rank(&all_rows);
            let prefix: Matrix = self
                .words
                .iter()
                .zip(&self.basis_at_zero)
                .filter(|(w, _)| w.len() <= len)
                .map(|(_, row)| row.clone())
                .collect();
            if prefix.len() != dim_l || linalg::rank(&prefix) != dim_l {
                return Err(Error::Structure(format!(
                    "the frame words of length ≤ {len} do not form a basis of L^{len}"
                )));
            }
        }
        Ok(())
    }
}

fn eval_at_zero(field: &[Poly]) -> Vec<Q> {
    field.iter().map(Poly::constant_term).collect()
}

/// All words of a given length over {1..r}, lexicographic.
pub fn words_of_length(r: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=r).map(move |l| {
                    let mut w2 = w.clone();
                    w2.push(l);
                    w2
                })
            })
            .collect();
    }
    out
}

/// A Carnot–Carathéodory frame X_1..X_r of polynomial fields on ℝ^n.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CCStructure {
    n: usize,
    r: usize,
    fields: Vec<PolyVectorField>,
    frame: Option<AdaptedFrame>,
}

impl CCStructure {
    pub fn new(fields: Vec<PolyVectorField>) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Shape("a structure needs at least one field".into()))?;
        for f in &fields[1..] {
            first.check_shape(f)?;
        }
        let n = first.nvars();
        let at_zero: Matrix = fields.iter().map(PolyVectorField::value_at_zero).collect();
        if linalg::rank(&at_zero) != fields.len() {
            return Err(Error::Rank("fields are linearly dependent at 0".into()));
        }
        Ok(CCStructure {
            n,
            r: fields.len(),
            fields,
            frame: None,
        })
    }

    pub fn with_frame(mut self, frame: AdaptedFrame) -> Result<Self> {
        frame.validate(&self)?;
        self.frame = Some(frame);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn fields(&self) -> &[PolyVectorField] {
        &self.fields
    }

    pub fn frame(&self) -> Option<&AdaptedFrame> {
        self.frame.as_ref()
    }

    pub fn weights(&self) -> &Weights {
        self.fields[0].weights()
    }

    pub fn order(&self) -> u32 {
        self.fields[0].order()
    }

    pub(crate) fn field_polys(&self) -> Vec<Vec<Poly>> {
        self.fields.iter().map(PolyVectorField::polys).collect()
    }

    /// The frame fields Y_{J_1}..Y_{J_n} as exact polynomial fields, each
    /// stored at an order large enough to hold it.
    pub fn frame_fields(&self, frame: &AdaptedFrame) -> Vec<PolyVectorField> {
        let gens = self.field_polys();
        let mut cache = WordCache::new(&gens);
        let w = self.weights().clone();
        frame
            .words()
            .iter()
            .map(|word| {
                let polys = cache.get(word.letters());
                let deg = polys
                    .iter()
                    .filter_map(|p| p.max_weighted_degree(w.as_slice()))
                    .max()
                    .unwrap_or(0);
                PolyVectorField::from_polys(&w, self.order().max(deg), polys)
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct CCStructureJson {
    n: usize,
    r: usize,
    fields: Vec<PolyVectorField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<AdaptedFrame>,
}

impl Serialize for CCStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CCStructureJson {
            n: self.n,
            r: self.r,
            fields: self.fields.clone(),
            frame: self.frame.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CCStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CCStructureJson::deserialize(d)?;
        if raw.fields.len() != raw.r {
            return Err(D::Error::custom(format!("r = {} but {} fields given", raw.r, raw.fields.len())));
        }
        if raw.fields.iter().any(|f| f.nvars() != raw.n) {
            return Err(D::Error::custom(format!("every field must have n = {} components", raw.n)));
        }
        let x = CCStructure::new(raw.fields).map_err(D::Error::custom)?;
        match raw.frame {
            Some(f) => x.with_frame(f).map_err(D::Error::custom),
            None => Ok(x),
        }
    }
}

/// Y_J for the structure's fields, at the structure's shape.
pub fn evaluate_word(x: &CCStructure, word: &BracketWord) -> Result<PolyVectorField> {
    word.check(x.r)?;
    let mut acc = x.fields[word.letters()[word.len() - 1] - 1].clone();
    for &l in word.letters()[..word.len() - 1].iter().rev() {
        acc = lie_bracket(&x.fields[l - 1], &acc)?;
    }
    Ok(acc)
}

/// Greedy frame: words by length, then lexicographically; a word is kept iff
/// its value at 0 is independent of those already kept.
pub fn select_adapted_frame(x: &CCStructure, max_step: usize) -> Result<AdaptedFrame> {
    if max_step == 0 {
        return Err(Error::Domain("max_step must be at least 1".into()));
    }
    let gens = x.field_polys();
    let mut cache = WordCache::new(&gens);
    let mut chosen: Vec<BracketWord> = Vec::new();
    let mut rows: Matrix = Vec::new();
    'outer: for len in 1..=max_step {
        for letters in words_of_length(x.r, len) {
            if len >= 2 && letters[len - 1] == letters[len - 2] {
                continue;
            }
            let v = eval_at_zero(&cache.get(&letters));
            rows.push(v);
            if linalg::rank(&rows) == rows.len() {
                chosen.push(BracketWord { letters });
                if chosen.len() == x.n {
                    break 'outer;
                }
            } else {
                rows.pop();
            }
        }
    }
    if chosen.len() < x.n {
        return Err(Error::Hormander {
            max_step,
            achieved: chosen.len(),
            n: x.n,
        });
    }
    let weights: Vec<u32> = chosen.iter().map(|w| w.len() as u32).collect();
    Ok(AdaptedFrame {
        step: *weights.last().unwrap(),
        words: chosen,
        weights,
        basis_at_zero: rows,
    })
}

fn signed_pow(lambda: &Q, w: u32) -> Q {
    num_traits::pow(lambda.clone(), w as usize)
}

/// δ_λ(x) = (λ^{w_1}x_1, …, λ^{w_n}x_n); negative λ gives signed powers.
pub fn dilate_point(x: &[Q], lambda: &Q, w: &Weights) -> Result<Vec<Q>> {
    if lambda.is_zero() {
        return Err(Error::Domain("dilation by λ = 0".into()));
    }
    if x.len() != w.len() {
        return Err(Error::Shape(format!("point of length {} for {} weights", x.len(), w.len())));
    }
    Ok(x.iter().zip(w.as_slice()).map(|(xi, &wi)| xi * signed_pow(lambda, wi)).collect())
}

pub fn dilate_point_f64(x: &[f64], lambda: f64, w: &[u32]) -> Vec<f64> {
    x.iter().zip(w).map(|(xi, &wi)| xi * lambda.powi(wi as i32)).collect()
}

/// Σ_i |x_i|^{1/w_i}.
pub fn anorm(x: &[f64], w: &[u32]) -> f64 {
    x.iter().zip(w).map(|(xi, &wi)| xi.abs().powf(1.0 / wi as f64)).sum()
}

pub fn anorm_q(x: &[Q], w: &Weights) -> f64 {
    let xf: Vec<f64> = x.iter().map(to_f64).collect();
    anorm(&xf, w.as_slice())
}

/// (δ_λ)_*V: component j is λ^{w_j} V_j(δ_{1/λ} x).
pub fn pushforward_dilation(v: &PolyVectorField, lambda: &Q) -> Result<PolyVectorField> {
    if lambda.is_zero() {
        return Err(Error::Domain("pushforward by λ = 0".into()));
    }
    Ok(pushforward_dilation_symbolic(v).evaluate(lambda))
}

/// A finite Laurent polynomial in a symbolic λ with vector-field coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaExpansion {
    weights: Weights,
    order: u32,
    parts: BTreeMap<i64, PolyVectorField>,
}

impl LambdaExpansion {
    pub fn parts(&self) -> &BTreeMap<i64, PolyVectorField> {
        &self.parts
    }

    /// Coefficient of λ^k (zero field when absent).
    pub fn coefficient(&self, k: i64) -> PolyVectorField {
        self.parts
            .get(&k)
            .cloned()
            .unwrap_or_else(|| PolyVectorField::zero(&self.weights, self.order))
    }

    pub fn max_power(&self) -> Option<i64> {
        self.parts.keys().next_back().copied()
    }

    /// Multiplies by λ^k.
    pub fn shift(&self, k: i64) -> LambdaExpansion {
        LambdaExpansion {
            weights: self.weights.clone(),
            order: self.order,
            parts: self.parts.iter().map(|(p, f)| (p + k, f.clone())).collect(),
        }
    }

    /// True iff the expansion equals c·λ^k·V for the given field (c = 1).
    pub fn is_exactly(&self, k: i64, v: &PolyVectorField) -> bool {
        if v.is_zero() {
            return self.parts.is_empty();
        }
        self.parts.len() == 1 && self.parts.get(&k) == Some(v)
    }

    pub fn evaluate(&self, lambda: &Q) -> PolyVectorField {
        let mut acc = PolyVectorField::zero(&self.weights, self.order);
        for (k, f) in &self.parts {
            acc = acc.add(&f.scale(&pow_i(lambda, *k))).expect("parts share a shape");
        }
        acc
    }
}

/// (δ_λ)_*V as a Laurent polynomial in λ: the term c x^α of component j
/// carries λ^{w_j − w_α}.
pub fn pushforward_dilation_symbolic(v: &PolyVectorField) -> LambdaExpansion {
    let w = v.weights().clone();
    let order = v.order();
    let n = v.nvars();
    let mut buckets: BTreeMap<i64, Vec<Poly>> = BTreeMap::new();
    for (j, comp) in v.components().iter().enumerate() {
        for (e, c) in comp.poly().terms() {
            let k = w[j] as i64 - w.degree(e) as i64;
            let slot = buckets.entry(k).or_insert_with(|| vec![Poly::zero(n); n]);
            slot[j].add_term(e.clone(), c.clone());
        }
    }
    LambdaExpansion {
        parts: buckets
            .into_iter()
            .map(|(k, polys)| (k, PolyVectorField::from_polys(&w, order, polys)))
            .filter(|(_, f)| !f.is_zero())
            .collect(),
        weights: w,
        order,
    }
}

/// Largest |coefficient| of a field (0 for the zero field).
pub fn max_coefficient(v: &PolyVectorField) -> Q {
    v.components()
        .iter()
        .flat_map(|c| c.poly().terms().map(|(_, q)| q.abs()))
        .max()
        .unwrap_or_else(Q::zero)
}
