//! Free nilpotent Lie algebra on a Hall basis, the truncated BCH product,
//! and the lifting of a nilpotent approximation to the free Carnot group.
//!
//! Hall set convention: elements are ordered by degree, then by their pair of
//! children. A bracket [a, b] of Hall elements is in the set iff a < b and,
//! when b = [c, d], c ≤ a. Brackets of Hall elements are rewritten into the
//! basis with [a,[c,d]] = [[a,c],d] + [c,[a,d]].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::ccfields::{bracket_polys, PolyVectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::nilpotent::NilpotentStructure;
use crate::poly::Poly;
use crate::rational::{to_f64, Q};

/// Coefficient ring for the generic Lie and BCH evaluators.
pub trait Scalar: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_s(&self) -> bool;
    fn add_s(&self, other: &Self) -> Self;
    fn mul_s(&self, other: &Self) -> Self;
    fn scale_q(&self, c: &Q) -> Self;
}

impl Scalar for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn one_like(&self) -> Self {
        Q::one()
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
    fn add_s(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_s(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_q(&self, c: &Q) -> Self {
        self * c
    }
}

impl Scalar for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn is_zero_s(&self) -> bool {
        *self == 0.0
    }
    fn add_s(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_s(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_q(&self, c: &Q) -> Self {
        self * to_f64(c)
    }
}

impl Scalar for Poly {
    fn zero_like(&self) -> Self {
        Poly::zero(self.nvars())
    }
    fn one_like(&self) -> Self {
        Poly::one(self.nvars())
    }
    fn is_zero_s(&self) -> bool {
        self.is_zero()
    }
    fn add_s(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_s(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_q(&self, c: &Q) -> Self {
        self.scale(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum HallNode {
    Gen(usize),
    Pair(usize, usize),
}

type Sparse = Vec<(usize, Q)>;

/// Hall basis of the free Lie algebra of rank r, truncated at step s.
pub struct HallBasis {
    r: usize,
    s: usize,
    nodes: Vec<HallNode>,
    layer: Vec<usize>,
    index: HashMap<(usize, usize), usize>,
    constants: HashMap<(usize, usize), Sparse>,
    bch_words: OnceLock<Vec<(Vec<bool>, Q)>>,
}

impl fmt::Debug for HallBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HallBasis(r = {}, s = {}, dim = {})", self.r, self.s, self.dim())
    }
}

impl PartialEq for HallBasis {
    fn eq(&self, other: &Self) -> bool {
        self.r == other.r && self.s == other.s
    }
}

pub fn build_hall_basis(r: usize, s: usize) -> Result<Arc<HallBasis>> {
    HallBasis::new(r, s).map(Arc::new)
}

impl HallBasis {
    pub fn new(r: usize, s: usize) -> Result<HallBasis> {
        if r < 2 {
            return Err(Error::Rank(format!("free Lie algebras need rank ≥ 2, got {r}")));
        }
        if s == 0 {
            return Err(Error::Domain("step must be at least 1".into()));
        }
        let mut nodes: Vec<HallNode> = (0..r).map(HallNode::Gen).collect();
        let mut layer = vec![1; r];
        let mut index = HashMap::new();
        for deg in 2..=s {
            let mut fresh = Vec::new();
            for a in 0..nodes.len() {
                for b in a + 1..nodes.len() {
                    if layer[a] + layer[b] != deg {
                        continue;
                    }
                    if let HallNode::Pair(c, _) = nodes[b] {
                        if c > a {
                            continue;
                        }
                    }
                    fresh.push((a, b));
                }
            }
            fresh.sort();
            for (a, b) in fresh {
                index.insert((a, b), nodes.len());
                nodes.push(HallNode::Pair(a, b));
                layer.push(deg);
            }
        }
        let mut basis = HallBasis {
            r,
            s,
            nodes,
            layer,
            index,
            constants: HashMap::new(),
            bch_words: OnceLock::new(),
        };
        let mut memo = HashMap::new();
        let dim = basis.dim();
        for i in 0..dim {
            for j in i + 1..dim {
                if basis.layer[i] + basis.layer[j] <= s {
                    let v = basis.rewrite(&mut memo, i, j);
                    if !v.is_empty() {
                        basis.constants.insert((i, j), v);
                    }
                }
            }
        }
        Ok(basis)
    }

    fn rewrite(&self, memo: &mut HashMap<(usize, usize), Sparse>, i: usize, j: usize) -> Sparse {
        if i == j || self.layer[i] + self.layer[j] > self.s {
            return Vec::new();
        }
        if i > j {
            return self.rewrite(memo, j, i).into_iter().map(|(k, c)| (k, -c)).collect();
        }
        if let Some(v) = memo.get(&(i, j)) {
            return v.clone();
        }
        let out = match self.nodes[j] {
            HallNode::Pair(c, d) if c > i => {
                let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
                for (k, q) in self.rewrite(memo, i, c) {
                    for (m, q2) in self.rewrite(memo, k, d) {
                        *acc.entry(m).or_insert_with(Q::zero) += &q * &q2;
                    }
                }
                for (k, q) in self.rewrite(memo, i, d) {
                    for (m, q2) in self.rewrite(memo, c, k) {
                        *acc.entry(m).or_insert_with(Q::zero) += &q * &q2;
                    }
                }
                acc.into_iter().filter(|(_, q)| !q.is_zero()).collect()
            }
            _ => vec![(self.index[&(i, j)], Q::one())],
        };
        memo.insert((i, j), out.clone());
        out
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn step(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    /// Layer (degree) of basis element k, 0-based.
    pub fn layer_of(&self, k: usize) -> usize {
        self.layer[k]
    }

    pub fn layers(&self) -> &[usize] {
        &self.layer
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        (1..=self.s).map(|l| self.layer.iter().filter(|&&x| x == l).count()).collect()
    }

    /// Children of a bracket element, or `None` for a generator.
    pub fn children(&self, k: usize) -> Option<(usize, usize)> {
        match self.nodes[k] {
            HallNode::Gen(_) => None,
            HallNode::Pair(a, b) => Some((a, b)),
        }
    }

    /// Bracketed form with 1-based generator labels, e.g. "[1,[1,2]]".
    pub fn label(&self, k: usize) -> String {
        match self.nodes[k] {
            HallNode::Gen(i) => format!("{}", i + 1),
            HallNode::Pair(a, b) => format!("[{},{}]", self.label(a), self.label(b)),
        }
    }

    /// [W_i, W_j] in the basis (empty when zero or beyond step s).
    pub fn structure_constant(&self, i: usize, j: usize) -> Sparse {
        if i == j {
            return Vec::new();
        }
        let (a, b, sign) = if i < j { (i, j, Q::one()) } else { (j, i, -Q::one()) };
        self.constants
            .get(&(a, b))
            .map(|v| v.iter().map(|(k, c)| (*k, c * &sign)).collect())
            .unwrap_or_default()
    }

    /// Bilinear bracket of coefficient vectors.
    pub fn bracket_coeffs<T: Scalar>(&self, a: &[T], b: &[T]) -> Vec<T> {
        let zero = a[0].zero_like();
        let mut out = vec![zero; self.dim()];
        for (&(i, j), v) in &self.constants {
            let (ai, aj, bi, bj) = (&a[i], &a[j], &b[i], &b[j]);
            let ij = !ai.is_zero_s() && !bj.is_zero_s();
            let ji = !aj.is_zero_s() && !bi.is_zero_s();
            if !ij && !ji {
                continue;
            }
            // a_i b_j [W_i,W_j] + a_j b_i [W_j,W_i]
            let mut c = ai.zero_like();
            if ij {
                c = c.add_s(&ai.mul_s(bj));
            }
            if ji {
                c = c.add_s(&aj.mul_s(bi).scale_q(&-Q::one()));
            }
            if c.is_zero_s() {
                continue;
            }
            for (k, q) in v {
                out[*k] = out[*k].add_s(&c.scale_q(q));
            }
        }
        out
    }

    /// Words over {A, B} (true = B) with their total BCH coefficient, from
    /// all tuples (k_1, l_1, …, k_p, l_p) with k_i + l_i ≥ 1 and total ≤ s,
    /// each weighted (−1)^{p+1}/p · 1/(Π k_i! l_i! · Σ(k_i + l_i)).
    pub fn bch_words(&self) -> &[(Vec<bool>, Q)] {
        self.bch_words.get_or_init(|| bch_word_table(self.s))
    }

    /// Right-nested brackets [x_1,[x_2,…,[x_{m−1},x_m]…]] of the table words,
    /// summed with their coefficients; `max_b` bounds the number of B letters.
    fn eval_words<T: Scalar>(&self, a: &[T], b: &[T], max_b: usize, exact_b: Option<usize>) -> Vec<T> {
        let table: HashMap<&[bool], &Q> = self.bch_words().iter().map(|(w, c)| (w.as_slice(), c)).collect();
        let mut out: Vec<T> = vec![a[0].zero_like(); self.dim()];
        let mut suffix: Vec<bool> = Vec::new();
        self.walk(&table, a, b, max_b, exact_b, &mut suffix, None, &mut out);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<T: Scalar>(
        &self,
        table: &HashMap<&[bool], &Q>,
        a: &[T],
        b: &[T],
        max_b: usize,
        exact_b: Option<usize>,
        suffix: &mut Vec<bool>,
        value: Option<&[T]>,
        out: &mut [T],
    ) {
        if suffix.len() >= self.s {
            return;
        }
        for letter in [false, true] {
            let nb = suffix.iter().filter(|&&x| x).count() + letter as usize;
            if nb > max_b {
                continue;
            }
            let x = if letter { b } else { a };
            let v = match value {
                None => x.to_vec(),
                Some(v) => {
                    if suffix.len() == 1 && suffix[0] == letter {
                        continue;
                    }
                    self.bracket_coeffs(x, v)
                }
            };
            if v.iter().all(Scalar::is_zero_s) {
                continue;
            }
            suffix.insert(0, letter);
            if exact_b.is_none_or(|e| e == nb) {
                if let Some(c) = table.get(suffix.as_slice()) {
                    for (o, vi) in out.iter_mut().zip(&v) {
                        *o = o.add_s(&vi.scale_q(c));
                    }
                }
            }
            self.walk(table, a, b, max_b, exact_b, suffix, Some(&v), out);
            suffix.remove(0);
        }
    }

    /// P(a, b) truncated at step s.
    pub fn bch_coeffs<T: Scalar>(&self, a: &[T], b: &[T]) -> Vec<T> {
        self.eval_words(a, b, usize::MAX, None)
    }

    /// d/dt P(at, t W_i) at t = 0: the terms of P linear in the second slot.
    pub fn generator_field_coeffs<T: Scalar>(&self, i: usize, at: &[T]) -> Vec<T> {
        let mut one = vec![at[0].zero_like(); self.dim()];
        one[i] = at[0].one_like();
        self.eval_words(at, &one, 1, Some(1))
    }

    /// Coordinates of the second kind: exponents t_k with
    /// f = exp(t_1 W_1)·…·exp(t_N W_N) in the basis order.
    pub fn second_kind_coordinates(&self, f: &[Q]) -> Vec<Q> {
        let mut t = vec![Q::zero(); self.dim()];
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by_key(|&k| self.layer[k]);
        for k in order {
            t[k] = Q::zero();
            let g = self.second_kind_product(&t);
            t[k] = &f[k] - &g[k];
        }
        t
    }

    pub fn second_kind_product(&self, t: &[Q]) -> Vec<Q> {
        let mut g = vec![Q::zero(); self.dim()];
        for (k, tk) in t.iter().enumerate() {
            if tk.is_zero() {
                continue;
            }
            let mut e = vec![Q::zero(); self.dim()];
            e[k] = tk.clone();
            g = self.bch_coeffs(&g, &e);
        }
        g
    }

    /// Group word in layer-one exponentials whose product is exp(t W_k + …).
    fn commutator_word(&self, k: usize, t: &Q) -> Vec<(usize, Q)> {
        match self.nodes[k] {
            HallNode::Gen(i) => vec![(i, t.clone())],
            HallNode::Pair(a, b) => {
                let x = self.commutator_word(a, t);
                let y = self.commutator_word(b, &Q::one());
                let inv = |w: &[(usize, Q)]| w.iter().rev().map(|(i, c)| (*i, -c)).collect::<Vec<_>>();
                let mut out = x.clone();
                out.extend(y.iter().cloned());
                out.extend(inv(&x));
                out.extend(inv(&y));
                out
            }
        }
    }

    /// Product of the layer-one exponentials exp(c W_i) of a group word.
    pub fn word_product(&self, word: &[(usize, Q)]) -> Vec<Q> {
        let mut g = vec![Q::zero(); self.dim()];
        for (i, c) in word {
            let mut e = vec![Q::zero(); self.dim()];
            e[*i] = c.clone();
            g = self.bch_coeffs(&g, &e);
        }
        g
    }

    /// A word of layer-one exponentials with product exactly f, built layer
    /// by layer from group commutators.
    pub fn layer_one_factorization(&self, f: &[Q]) -> Result<Vec<(usize, Q)>> {
        let mut word: Vec<(usize, Q)> = Vec::new();
        let mut g = vec![Q::zero(); self.dim()];
        for l in 1..=self.s {
            let neg_g: Vec<Q> = g.iter().map(|x| -x).collect();
            let e = self.bch_coeffs(&neg_g, f);
            for k in (0..self.dim()).filter(|&k| self.layer[k] == l) {
                if !e[k].is_zero() {
                    word.extend(self.commutator_word(k, &e[k]));
                }
            }
            g = self.word_product(&word);
        }
        if g != f {
            return Err(Error::Consistency("layer-one factorization missed the target".into()));
        }
        Ok(word)
    }
}

fn factorial(k: usize) -> Q {
    (1..=k).fold(Q::one(), |acc, i| acc * Q::from_integer((i as i64).into()))
}

fn bch_word_table(s: usize) -> Vec<(Vec<bool>, Q)> {
    let mut acc: BTreeMap<Vec<bool>, Q> = BTreeMap::new();
    // depth-first over tuples; each pair (k, l) with k + l ≥ 1
    #[allow(clippy::too_many_arguments)]
    fn go(
        s: usize,
        p: usize,
        total: usize,
        denom: Q,
        word: &mut Vec<bool>,
        acc: &mut BTreeMap<Vec<bool>, Q>,
    ) {
        if p > 0 {
            let sign = if p % 2 == 1 { Q::one() } else { -Q::one() };
            let c = sign / (Q::from_integer((p as i64).into()) * &denom * Q::from_integer((total as i64).into()));
            // brackets of a single repeated letter vanish
            let trivial = word.len() >= 2 && word[word.len() - 1] == word[word.len() - 2];
            if !trivial {
                *acc.entry(word.clone()).or_insert_with(Q::zero) += c;
            }
        }
        for k in 0..=s - total {
            for l in 0..=s - total - k {
                if k + l == 0 {
                    continue;
                }
                let len = word.len();
                word.extend(std::iter::repeat_n(false, k));
                word.extend(std::iter::repeat_n(true, l));
                go(s, p + 1, total + k + l, &denom * factorial(k) * factorial(l), word, acc);
                word.truncate(len);
            }
        }
    }
    go(s, 0, 0, Q::one(), &mut Vec::new(), &mut acc);
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Element of 𝔣 (equivalently, via the identity exponential, of F).
#[derive(Clone, PartialEq)]
pub struct FreeLieElement {
    basis: Arc<HallBasis>,
    coef: Vec<Q>,
}

impl fmt::Debug for FreeLieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coef.iter().map(crate::rational::format_q).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl FreeLieElement {
    pub fn new(basis: &Arc<HallBasis>, coef: Vec<Q>) -> Result<Self> {
        if coef.len() != basis.dim() {
            return Err(Error::Shape(format!("{} coefficients for a basis of size {}", coef.len(), basis.dim())));
        }
        Ok(FreeLieElement {
            basis: basis.clone(),
            coef,
        })
    }

    pub fn zero(basis: &Arc<HallBasis>) -> Self {
        FreeLieElement {
            basis: basis.clone(),
            coef: vec![Q::zero(); basis.dim()],
        }
    }

    /// Basis element W_k, 0-based.
    pub fn basis_element(basis: &Arc<HallBasis>, k: usize) -> Self {
        let mut f = FreeLieElement::zero(basis);
        f.coef[k] = Q::one();
        f
    }

    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn coef(&self) -> &[Q] {
        &self.coef
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &FreeLieElement) -> Result<()> {
        if *self.basis != *other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &FreeLieElement) -> Result<FreeLieElement> {
        self.check(other)?;
        Ok(self.with(self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &FreeLieElement) -> Result<FreeLieElement> {
        self.check(other)?;
        Ok(self.with(self.coef.iter().zip(&other.coef).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, c: &Q) -> FreeLieElement {
        self.with(self.coef.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> FreeLieElement {
        self.scale(&-Q::one())
    }

    fn with(&self, coef: Vec<Q>) -> FreeLieElement {
        FreeLieElement {
            basis: self.basis.clone(),
            coef,
        }
    }
}

pub fn free_bracket(a: &FreeLieElement, b: &FreeLieElement) -> Result<FreeLieElement> {
    a.check(b)?;
    Ok(a.with(a.basis.bracket_coeffs(&a.coef, &b.coef)))
}

pub fn bch(a: &FreeLieElement, b: &FreeLieElement) -> Result<FreeLieElement> {
    a.check(b)?;
    Ok(a.with(a.basis.bch_coeffs(&a.coef, &b.coef)))
}

/// Scales the layer-k coefficients by λ^k.
pub fn group_dilate(f: &FreeLieElement, lambda: &Q) -> Result<FreeLieElement> {
    if *lambda <= Q::zero() {
        return Err(Error::Domain("group dilation needs λ > 0".into()));
    }
    Ok(f.with(
        f.coef
            .iter()
            .zip(f.basis.layers())
            .map(|(c, &l)| c * num_traits::pow(lambda.clone(), l))
            .collect(),
    ))
}

/// Velocity of t ↦ at·exp(t W_i) at t = 0 (i is 0-based).
pub fn generator_field(i: usize, at: &FreeLieElement) -> Result<Vec<Q>> {
    if i >= at.basis.rank() {
        return Err(Error::BadLetter {
            letter: i + 1,
            rank: at.basis.rank(),
        });
    }
    Ok(at.basis.generator_field_coeffs(i, &at.coef))
}

/// ψ: 𝔣 → Lie(Y^∞) on the Hall basis, with the action and projection it induces.
#[derive(Clone, Debug)]
pub struct LiftedStructure {
    basis: Arc<HallBasis>,
    target: NilpotentStructure,
    psi: Vec<Vec<Poly>>,
    action_field: Vec<Poly>,
    pi: Vec<Poly>,
    gen_fields: Vec<Vec<Poly>>,
}

/// Exact flow by Picard iteration in a polynomial ring R.
///
/// `field` lives in (y_1..y_n, p_1..p_m); `params` gives p in R, `start`
/// gives y(0) in R, and `t` is the time variable of R.
fn picard_flow(field: &[Poly], params: &[Poly], start: &[Poly], t: usize, rounds: usize) -> Result<Vec<Poly>> {
    let mut y = start.to_vec();
    for _ in 0..=rounds {
        let mut subs = y.clone();
        subs.extend(params.iter().cloned());
        let next: Vec<Poly> = field
            .iter()
            .zip(start)
            .map(|(v, y0)| y0 + &v.compose(&subs).integral(t))
            .collect();
        if next == y {
            return Ok(y);
        }
        y = next;
    }
    Err(Error::Structure(format!("Picard iteration did not stabilise within {} rounds", rounds + 1)))
}

pub fn build_psi(basis: &Arc<HallBasis>, target: &NilpotentStructure) -> Result<LiftedStructure> {
    if target.r() != basis.rank() {
        return Err(Error::Shape(format!("target rank {} vs basis rank {}", target.r(), basis.rank())));
    }
    if target.step() as usize > basis.step() {
        return Err(Error::Structure(format!(
            "target step {} exceeds the basis step {}",
            target.step(),
            basis.step()
        )));
    }
    let n = target.n();
    let dim = basis.dim();
    let mut psi: Vec<Vec<Poly>> = Vec::with_capacity(dim);
    for k in 0..dim {
        let img = match basis.children(k) {
            None => target.fields()[k].components().iter().map(|c| c.poly().clone()).collect(),
            Some((a, b)) => bracket_polys(&psi[a], &psi[b]),
        };
        psi.push(img);
    }
    let zero = vec![Poly::zero(n); n];
    for i in 0..dim {
        for j in i + 1..dim {
            let lhs = bracket_polys(&psi[i], &psi[j]);
            let mut rhs = zero.clone();
            if basis.layer_of(i) + basis.layer_of(j) <= basis.step() {
                for (k, c) in basis.structure_constant(i, j) {
                    for (r, p) in rhs.iter_mut().zip(&psi[k]) {
                        *r = &*r + &p.scale(&c);
                    }
                }
            }
            if lhs != rhs {
                return Err(Error::Consistency(format!(
                    "ψ breaks the relation for [{}, {}]",
                    basis.label(i),
                    basis.label(j)
                )));
            }
        }
    }
    // V(y, a) = Σ_k a_k ψ_k(y) in n + dim variables
    let nv = n + dim;
    let y_map: Vec<usize> = (0..n).collect();
    let mut action_field = vec![Poly::zero(nv); n];
    for (k, img) in psi.iter().enumerate() {
        let ak = Poly::var(nv, n + k);
        for (v, p) in action_field.iter_mut().zip(img) {
            if !p.is_zero() {
                *v = &*v + &(&ak * &p.embed(nv, &y_map));
            }
        }
    }
    // Π(a): flow from 0 in the ring Q[a, t]
    let ring = dim + 1;
    let params: Vec<Poly> = (0..dim).map(|k| Poly::var(ring, k)).collect();
    let start = vec![Poly::zero(ring); n];
    let flow = picard_flow(&action_field, &params, &start, dim, basis.step() + 1)?;
    let pi: Vec<Poly> = flow
        .iter()
        .map(|p| {
            let at1 = p.partial_eval(&[(dim, Q::one())]);
            Poly::from_terms(dim, at1.into_terms().map(|(e, c)| (e[..dim].to_vec(), c)))
        })
        .collect();
    let vars: Vec<Poly> = (0..dim).map(|k| Poly::var(dim, k)).collect();
    let gen_fields = (0..basis.rank()).map(|i| basis.generator_field_coeffs(i, &vars)).collect();
    Ok(LiftedStructure {
        basis: basis.clone(),
        target: target.clone(),
        psi,
        action_field,
        pi,
        gen_fields,
    })
}

impl LiftedStructure {
    pub fn basis(&self) -> &Arc<HallBasis> {
        &self.basis
    }

    pub fn target(&self) -> &NilpotentStructure {
        &self.target
    }

    /// ψ(W_k) for every basis element.
    pub fn psi_images(&self) -> Vec<PolyVectorField> {
        let w = self.target.weights();
        let order = self.target.order();
        self.psi
            .iter()
            .map(|p| {
                let f = PolyVectorField::from_polys(w, order, p.clone());
                debug_assert!(f.polys() == *p);
                f
            })
            .collect()
    }

    /// Π(a) = 0·exp(a) as polynomials in the coefficients a.
    pub fn projection_polys(&self) -> &[Poly] {
        &self.pi
    }

    /// W_i at a point a of F, as polynomials in a.
    pub fn generator_field_polys(&self, i: usize) -> &[Poly] {
        &self.gen_fields[i]
    }

    pub fn project_f64(&self, a: &[f64]) -> Vec<f64> {
        self.pi.iter().map(|p| p.eval_f64(a)).collect()
    }

    pub fn generator_field_f64(&self, i: usize, a: &[f64]) -> Vec<f64> {
        self.gen_fields[i].iter().map(|p| p.eval_f64(a)).collect()
    }

    /// Π(δ̂_λ a) − δ_λ Π(a) in Q[a, λ], λ being the last variable.
    pub fn dilation_residual(&self) -> Vec<Poly> {
        let dim = self.basis.dim();
        let nv = dim + 1;
        let lam = Poly::var(nv, dim);
        let map: Vec<usize> = (0..dim).collect();
        let subs: Vec<Poly> = (0..dim)
            .map(|k| &Poly::var(nv, k) * &lam.pow(self.basis.layer_of(k) as u32))
            .collect();
        let w = self.target.weights().as_slice();
        self.pi
            .iter()
            .zip(w)
            .map(|(p, &wj)| p.compose(&subs) - &lam.pow(wj) * &p.embed(nv, &map))
            .collect()
    }

    /// DΠ(a)·W_i(a) − Y_i^∞(Π(a)) for every generator.
    pub fn pushforward_residual(&self) -> Vec<Vec<Poly>> {
        let dim = self.basis.dim();
        self.target
            .fields()
            .iter()
            .zip(&self.gen_fields)
            .map(|(y, g)| {
                self.pi
                    .iter()
                    .zip(y.components())
                    .map(|(p, yc)| {
                        let mut lhs = Poly::zero(dim);
                        for (k, gk) in g.iter().enumerate() {
                            if !gk.is_zero() {
                                lhs = lhs + &p.derivative(k) * gk;
                            }
                        }
                        lhs - yc.poly().compose(&self.pi)
                    })
                    .collect()
            })
            .collect()
    }

    /// Rank of DΠ at 0.
    pub fn projection_rank_at_zero(&self) -> usize {
        let dim = self.basis.dim();
        let jac: Vec<Vec<Q>> = self
            .pi
            .iter()
            .map(|p| (0..dim).map(|k| p.derivative(k).constant_term()).collect())
            .collect();
        linalg::rank(&jac)
    }
}

/// x·f = exp(ψ(A))(x), the exact time-1 flow of ψ(A) from x.
pub fn group_action(x: &[Q], f: &FreeLieElement, l: &LiftedStructure) -> Result<Vec<Q>> {
    if *f.basis != *l.basis {
        return Err(Error::BasisMismatch);
    }
    let n = l.target.n();
    if x.len() != n {
        return Err(Error::Shape(format!("point of length {} in dimension {n}", x.len())));
    }
    let params: Vec<Poly> = f.coef.iter().map(|c| Poly::constant(1, c.clone())).collect();
    let start: Vec<Poly> = x.iter().map(|c| Poly::constant(1, c.clone())).collect();
    let flow = picard_flow(&l.action_field, &params, &start, 0, l.basis.step() + 1)?;
    Ok(flow.iter().map(|p| p.eval(&[Q::one()])).collect())
}

/// π^∞(f) = 0·f.
pub fn project_pi(f: &FreeLieElement, l: &LiftedStructure) -> Result<Vec<Q>> {
    if *f.basis != *l.basis {
        return Err(Error::BasisMismatch);
    }
    Ok(l.pi.iter().map(|p| p.eval(&f.coef)).collect())
}

/// Witt's count of layer-k Hall elements: (1/k) Σ_{d|k} μ(d) r^{k/d}.
pub fn witt_dimension(r: usize, k: usize) -> usize {
    fn mobius(mut n: usize) -> i64 {
        let mut m = 1;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                n /= p;
                if n % p == 0 {
                    return 0;
                }
                m = -m;
            }
            p += 1;
        }
        if n > 1 {
            m = -m;
        }
        m
    }
    let total: i64 = (1..=k)
        .filter(|d| k % d == 0)
        .map(|d| mobius(d) * (r as i64).pow((k / d) as u32))
        .sum();
    (total / k as i64) as usize
}

/// Summary of a lifting, as reported by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct LiftInfo {
    pub rank: usize,
    pub step: usize,
    pub dim: usize,
    pub layer_sizes: Vec<usize>,
    pub target_dim: usize,
    pub projection_rank_at_zero: usize,
    pub basis: Vec<String>,
}

pub fn lift_info(l: &LiftedStructure) -> LiftInfo {
    let b = l.basis();
    LiftInfo {
        rank: b.rank(),
        step: b.step(),
        dim: b.dim(),
        layer_sizes: b.layer_sizes(),
        target_dim: l.target.n(),
        projection_rank_at_zero: l.projection_rank_at_zero(),
        basis: (0..b.dim()).map(|k| b.label(k)).collect(),
    }
}
