//! Horizontal curves driven by piecewise-constant controls: RK4 integration,
//! blow-ups through the rescaled fields Y^{1/η}, tangent half-line and line
//! detection, and lifting to the free Carnot group.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ccfields::{dilate_point_f64, PolyVectorField};
use crate::error::{Error, Result};
use crate::freecarnot::LiftedStructure;
use crate::jets::Weights;
use crate::nilpotent::{DecomposedStructure, NilpotentStructure};
use crate::poly::Poly;
use crate::rational::to_f64;

/// Piecewise-constant control: `values[k]` holds on [grid[k], grid[k+1]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ControlJson", into = "ControlJson")]
pub struct Control {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    arclength: bool,
}

#[derive(Serialize, Deserialize)]
struct ControlJson {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    #[serde(default)]
    arclength: bool,
}

impl TryFrom<ControlJson> for Control {
    type Error = Error;
    fn try_from(c: ControlJson) -> Result<Self> {
        if c.arclength {
            Control::arclength(c.grid, c.values)
        } else {
            Control::new(c.grid, c.values)
        }
    }
}

impl From<Control> for ControlJson {
    fn from(c: Control) -> Self {
        ControlJson {
            grid: c.grid,
            values: c.values,
            arclength: c.arclength,
        }
    }
}

impl Control {
    pub fn new(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::Domain("a control needs at least one interval".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("control grid must be finite and strictly increasing".into()));
        }
        if values.len() != grid.len() - 1 {
            return Err(Error::Shape(format!("{} values for {} intervals", values.len(), grid.len() - 1)));
        }
        let r = values[0].len();
        if r == 0 || values.iter().any(|v| v.len() != r) {
            return Err(Error::Shape("control values must share a nonzero length".into()));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Domain("control values must be finite".into()));
        }
        Ok(Control {
            grid,
            values,
            arclength: false,
        })
    }

    /// Normalizes every value to unit length.
    pub fn arclength(grid: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let values = values
            .into_iter()
            .map(|v| {
                let n = norm(&v);
                if n == 0.0 {
                    Err(Error::Domain("arclength control with a zero value".into()))
                } else {
                    Ok(v.iter().map(|x| x / n).collect())
                }
            })
            .collect::<Result<_>>()?;
        let mut c = Control::new(grid, values)?;
        c.arclength = true;
        Ok(c)
    }

    /// Samples `f` at the midpoint of every interval.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values = grid.windows(2).map(|w| f(0.5 * (w[0] + w[1]))).collect();
        Control::new(grid, values)
    }

    pub fn constant(start: f64, end: f64, value: Vec<f64>) -> Result<Self> {
        Control::new(vec![start, end], vec![value])
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn is_arclength(&self) -> bool {
        self.arclength
    }

    pub fn rank(&self) -> usize {
        self.values[0].len()
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// h(t), right-continuous; the last value holds at the right end.
    pub fn value_at(&self, t: f64) -> &[f64] {
        let k = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        &self.values[k.min(self.values.len() - 1)]
    }

    /// τ ↦ h(t0 + ητ) on [lo, hi].
    pub fn window(&self, t0: f64, eta: f64, lo: f64, hi: f64) -> Result<Control> {
        let (a, b) = (t0 + eta * lo, t0 + eta * hi);
        let tol = 1e-12 * (1.0 + self.end().abs().max(self.start().abs()));
        if eta <= 0.0 || lo >= hi || a < self.start() - tol || b > self.end() + tol {
            return Err(Error::Window {
                lo: a,
                hi: b,
                start: self.start(),
                end: self.end(),
            });
        }
        let mut grid = vec![lo];
        let mut values = vec![self.value_at(a).to_vec()];
        for (k, &g) in self.grid.iter().enumerate() {
            let tau = (g - t0) / eta;
            if tau > lo && tau < hi && k < self.values.len() {
                grid.push(tau);
                values.push(self.values[k].clone());
            }
        }
        grid.push(hi);
        let mut c = Control::new(grid, values)?;
        c.arclength = self.arclength;
        Ok(c)
    }

    /// τ ↦ −h(−τ) on [−end, −start].
    pub fn reversed(&self) -> Control {
        let grid = self.grid.iter().rev().map(|t| -t).collect();
        let values = self.values.iter().rev().map(|v| v.iter().map(|x| -x).collect()).collect();
        Control {
            grid,
            values,
            arclength: self.arclength,
        }
    }

    /// t ↦ h(t/λ) on [λ start, λ end].
    pub fn rescaled(&self, lambda: f64) -> Control {
        Control {
            grid: self.grid.iter().map(|t| t * lambda).collect(),
            values: self.values.clone(),
            arclength: self.arclength,
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// L(γ) = ∫|h|.
pub fn length(h: &Control) -> f64 {
    h.values.iter().zip(h.grid.windows(2)).map(|(v, w)| norm(v) * (w[1] - w[0])).sum()
}

/// m equal cells on [a, b].
pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
}

/// Cells around t0 growing geometrically by `ratio` from width `first`, so a
/// midpoint-sampled control resolves every scale near t0.
pub fn graded_grid(a: f64, b: f64, t0: f64, first: f64, ratio: f64) -> Vec<f64> {
    let side = |len: f64| {
        let mut pts = vec![0.0];
        let mut w = first;
        while *pts.last().unwrap() < len {
            let next = (pts.last().unwrap() + w).min(len);
            if len - next < 0.5 * w {
                pts.push(len);
                break;
            }
            pts.push(next);
            w *= ratio;
        }
        pts
    };
    let mut grid: Vec<f64> = side(t0 - a).iter().rev().map(|d| t0 - d).collect();
    if t0 <= a {
        grid = vec![a];
    }
    for d in side(b - t0).into_iter().skip(1) {
        grid.push(t0 + d);
    }
    grid.dedup();
    grid
}

/// A family of fields evaluable in floats.
pub trait FieldFamily: Sync {
    fn dim(&self) -> usize;
    fn rank(&self) -> usize;
    /// Writes Σ_i h_i X_i(x) into `out`.
    fn velocity(&self, h: &[f64], x: &[f64], out: &mut [f64]);
}

/// Polynomial fields compiled to float monomial lists.
#[derive(Clone, Debug)]
pub struct FloatFields {
    dim: usize,
    fields: Vec<Vec<Vec<(Vec<u32>, f64)>>>,
}

impl FloatFields {
    pub fn from_polys(fields: &[Vec<Poly>]) -> Self {
        let dim = fields.first().map(|f| f.len()).unwrap_or(0);
        FloatFields {
            dim,
            fields: fields
                .iter()
                .map(|f| f.iter().map(|p| p.terms().map(|(e, c)| (e.clone(), to_f64(c))).collect()).collect())
                .collect(),
        }
    }

    pub fn from_fields(fields: &[PolyVectorField]) -> Self {
        let polys: Vec<Vec<Poly>> = fields
            .iter()
            .map(|f| f.components().iter().map(|c| c.poly().clone()).collect())
            .collect();
        FloatFields::from_polys(&polys)
    }

    /// Y^{1/η}: the term c x^α of component j becomes c η^{w_α − w_j + 1}.
    pub fn rescaled(fields: &[PolyVectorField], weights: &Weights, eta: f64) -> Self {
        let w = weights.as_slice();
        let mut out = FloatFields::from_fields(fields);
        for f in &mut out.fields {
            for (j, comp) in f.iter_mut().enumerate() {
                for (e, c) in comp.iter_mut() {
                    let p = weights.degree(e) as i32 - w[j] as i32 + 1;
                    *c *= eta.powi(p);
                }
            }
        }
        out
    }
}

fn eval_monomials(terms: &[(Vec<u32>, f64)], x: &[f64]) -> f64 {
    terms
        .iter()
        .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) }))
        .sum()
}

impl FieldFamily for FloatFields {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rank(&self) -> usize {
        self.fields.len()
    }

    fn velocity(&self, h: &[f64], x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (hi, f) in h.iter().zip(&self.fields) {
            if *hi == 0.0 {
                continue;
            }
            for (o, comp) in out.iter_mut().zip(f) {
                if !comp.is_empty() {
                    *o += hi * eval_monomials(comp, x);
                }
            }
        }
    }
}

/// RK4 settings: step size and the escape bound on |x_j|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rk4 {
    pub step: f64,
    pub bound: f64,
}

impl Default for Rk4 {
    fn default() -> Self {
        Rk4 { step: 1e-3, bound: 1e6 }
    }
}

/// Integrated curve with states at every RK4 node.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalCurve {
    pub control: Control,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub family: String,
}

impl HorizontalCurve {
    pub fn last(&self) -> &[f64] {
        self.states.last().unwrap()
    }

    /// Linear interpolation between nodes, clamped to the time range.
    pub fn sample_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.states[0].clone();
        }
        if k >= self.times.len() {
            return self.last().to_vec();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let a = (t - t0) / (t1 - t0);
        self.states[k - 1].iter().zip(&self.states[k]).map(|(x, y)| x + a * (y - x)).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.states.first().map(|s| s.len()).unwrap_or(0);
        let header: Vec<String> = std::iter::once("tau".to_string()).chain((1..=n).map(|j| format!("x{j}"))).collect();
        writeln!(out, "{}", header.join(","))?;
        for (t, x) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = std::iter::once(*t).chain(x.iter().copied()).map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn rk4_step(fields: &dyn FieldFamily, h: &[f64], x: &[f64], dt: f64, buf: &mut [Vec<f64>; 5]) -> Vec<f64> {
    let n = x.len();
    let [k1, k2, k3, k4, tmp] = buf;
    fields.velocity(h, x, k1);
    for j in 0..n {
        tmp[j] = x[j] + 0.5 * dt * k1[j];
    }
    fields.velocity(h, tmp, k2);
    for j in 0..n {
        tmp[j] = x[j] + 0.5 * dt * k2[j];
    }
    fields.velocity(h, tmp, k3);
    for j in 0..n {
        tmp[j] = x[j] + dt * k3[j];
    }
    fields.velocity(h, tmp, k4);
    (0..n).map(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])).collect()
}

/// Fixed-step RK4 on each constant piece of the control.
pub fn integrate(fields: &dyn FieldFamily, h: &Control, x0: &[f64], rk: Rk4) -> Result<HorizontalCurve> {
    if rk.step <= 0.0 {
        return Err(Error::Domain("RK4 step must be positive".into()));
    }
    if h.rank() != fields.rank() || x0.len() != fields.dim() {
        return Err(Error::Shape(format!(
            "control of rank {} and point of length {} for {} fields in dimension {}",
            h.rank(),
            x0.len(),
            fields.rank(),
            fields.dim()
        )));
    }
    let n = x0.len();
    let mut buf: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
    let mut times = vec![h.start()];
    let mut states = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for (v, w) in h.values.iter().zip(h.grid.windows(2)) {
        let m = ((w[1] - w[0]) / rk.step).ceil().max(1.0) as usize;
        let dt = (w[1] - w[0]) / m as f64;
        for k in 1..=m {
            x = rk4_step(fields, v, &x, dt, &mut buf);
            let t = if k == m { w[1] } else { w[0] + k as f64 * dt };
            if x.iter().any(|c| !c.is_finite() || c.abs() > rk.bound) {
                return Err(Error::Escape { t });
            }
            times.push(t);
            states.push(x.clone());
        }
    }
    Ok(HorizontalCurve {
        control: h.clone(),
        times,
        states,
        family: String::new(),
    })
}

/// Integrates on [lo, hi] ∋ 0 starting from x0 at τ = 0, running the
/// negative part backwards.
pub fn integrate_two_sided(fields: &dyn FieldFamily, h: &Control, x0: &[f64], rk: Rk4) -> Result<HorizontalCurve> {
    let (lo, hi) = (h.start(), h.end());
    if lo >= 0.0 {
        return integrate(fields, h, x0, rk);
    }
    let neg = h.window(0.0, 1.0, lo, hi.min(0.0))?.reversed();
    let back = integrate(fields, &neg, x0, rk)?;
    let mut times: Vec<f64> = back.times.iter().rev().map(|t| -t).collect();
    let mut states: Vec<Vec<f64>> = back.states.into_iter().rev().collect();
    if hi > 0.0 {
        let pos = h.window(0.0, 1.0, 0.0, hi)?;
        let fwd = integrate(fields, &pos, x0, rk)?;
        times.extend(fwd.times.into_iter().skip(1));
        states.extend(fwd.states.into_iter().skip(1));
    }
    Ok(HorizontalCurve {
        control: h.clone(),
        times,
        states,
        family: String::new(),
    })
}

/// Symmetric or one-sided window [lo, hi] in blow-up time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn forward(hi: f64) -> Self {
        Window { lo: 0.0, hi }
    }
}

/// δ_{1/η}γ(t0 + η·) as the horizontal curve of h(t0 + η·) for Y^{1/η}.
///
/// The structure is the exponential-coordinate structure centered at γ(t0).
pub fn blowup(d: &DecomposedStructure, h: &Control, t0: f64, eta: f64, window: Window, rk: Rk4) -> Result<HorizontalCurve> {
    if eta <= 0.0 {
        return Err(Error::Domain("blow-up scale must be positive".into()));
    }
    let k = h.window(t0, eta, window.lo, window.hi)?;
    let fields = FloatFields::rescaled(d.base().fields(), d.weights(), eta);
    let mut c = integrate_two_sided(&fields, &k, &vec![0.0; d.base().n()], rk)?;
    c.family = format!("Y^(1/{eta:e})");
    Ok(c)
}

/// Blow-ups at every scale, in parallel, in the order of `etas`.
pub fn blowup_family(
    d: &DecomposedStructure,
    h: &Control,
    t0: f64,
    etas: &[f64],
    window: Window,
    rk: Rk4,
) -> Result<Vec<HorizontalCurve>> {
    etas.par_iter().map(|&eta| blowup(d, h, t0, eta, window, rk)).collect()
}

/// sup_τ |a(τ) − b(τ)| over the nodes of `a` inside the time range of `b`.
pub fn sup_distance(a: &HorizontalCurve, b: &HorizontalCurve) -> f64 {
    let (lo, hi) = (b.times[0], *b.times.last().unwrap());
    a.times
        .iter()
        .zip(&a.states)
        .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
        .map(|(t, x)| {
            let y = b.sample_at(*t);
            x.iter().zip(&y).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// sup_τ |κ(τ) − τ v| over the nodes.
pub fn line_distance(c: &HorizontalCurve, v: &[f64]) -> f64 {
    c.times
        .iter()
        .zip(&c.states)
        .map(|(t, x)| x.iter().zip(v).map(|(a, b)| (a - t * b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalflineVerdict {
    pub limit_found: bool,
    pub v: Option<Vec<f64>>,
    pub norm_v: Option<f64>,
    /// sup distances between successive blow-ups
    pub cauchy: Vec<f64>,
    pub fit_residual: f64,
}

/// Accepts when the last successive difference is below `tol` and the last
/// blow-up fits τ ↦ τv with residual below `tol`.
pub fn detect_halfline(family: &[HorizontalCurve], rank: usize, tol: f64) -> HalflineVerdict {
    let cauchy: Vec<f64> = family.windows(2).map(|p| sup_distance(&p[1], &p[0])).collect();
    let Some(last) = family.last() else {
        return HalflineVerdict {
            limit_found: false,
            v: None,
            norm_v: None,
            cauchy,
            fit_residual: f64::INFINITY,
        };
    };
    let n = last.states[0].len();
    let tt: f64 = last.times.iter().map(|t| t * t).sum();
    let v: Vec<f64> = (0..n)
        .map(|j| {
            if tt == 0.0 {
                0.0
            } else {
                last.times.iter().zip(&last.states).map(|(t, x)| t * x[j]).sum::<f64>() / tt
            }
        })
        .collect();
    let fit_residual = line_distance(last, &v);
    let cauchy_ok = cauchy.last().is_some_and(|d| *d < tol);
    let limit_found = cauchy_ok && fit_residual < tol;
    HalflineVerdict {
        limit_found,
        norm_v: limit_found.then(|| norm(&v[..rank.min(n)])),
        v: limit_found.then_some(v),
        cauchy,
        fit_residual,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LineVerdict {
    pub is_line: bool,
    pub c: Option<Vec<f64>>,
    pub residual: f64,
}

/// Whether t ↦ δ_t(x0) is a horizontal curve of Y^∞, by a least-squares
/// fit of a constant control on t ∈ [−1, 1].
pub fn is_horizontal_line(x0: &[f64], l: &NilpotentStructure, tol: f64) -> LineVerdict {
    let w = l.weights().as_slice();
    let n = l.n();
    let r = l.r();
    let fields = FloatFields::from_fields(l.fields());
    let samples = 41;
    let mut a = DMatrix::<f64>::zeros(samples * n, r);
    let mut b = DVector::<f64>::zeros(samples * n);
    let mut out = vec![0.0; n];
    for k in 0..samples {
        let t = -1.0 + 2.0 * k as f64 / (samples - 1) as f64;
        let x = dilate_point_f64(x0, t, w);
        for i in 0..r {
            let mut e = vec![0.0; r];
            e[i] = 1.0;
            fields.velocity(&e, &x, &mut out);
            for j in 0..n {
                a[(k * n + j, i)] = out[j];
            }
        }
        for j in 0..n {
            b[k * n + j] = w[j] as f64 * t.powi(w[j] as i32 - 1) * x0[j];
        }
    }
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .unwrap_or_else(|_| DVector::zeros(r));
    let residual = (&a * &c - &b).amax();
    let is_line = residual < tol;
    LineVerdict {
        is_line,
        c: is_line.then(|| x0[..r].to_vec()),
        residual,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlLimit {
    pub c: Option<Vec<f64>>,
    pub means: Vec<Vec<f64>>,
    /// L² distance of each windowed control to its mean
    pub distances: Vec<f64>,
}

/// Mean and L² spread of h(t0 + η·) on the window, for each η; accepts the
/// last mean as c when its spread and ||mean| − 1| are below `tol`.
pub fn control_blowup_limit(h: &Control, t0: f64, etas: &[f64], window: Window, tol: f64) -> Result<ControlLimit> {
    let mut means = Vec::new();
    let mut distances = Vec::new();
    for &eta in etas {
        let k = h.window(t0, eta, window.lo, window.hi)?;
        let len = window.hi - window.lo;
        let r = k.rank();
        let mut mean = vec![0.0; r];
        for (v, g) in k.values.iter().zip(k.grid.windows(2)) {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x * (g[1] - g[0]) / len;
            }
        }
        let d2: f64 = k
            .values
            .iter()
            .zip(k.grid.windows(2))
            .map(|(v, g)| v.iter().zip(&mean).map(|(x, m)| (x - m).powi(2)).sum::<f64>() * (g[1] - g[0]))
            .sum();
        means.push(mean);
        distances.push(d2.sqrt());
    }
    let ok = match (means.last(), distances.last()) {
        (Some(m), Some(d)) => *d < tol && (norm(m) - 1.0).abs() < tol,
        _ => false,
    };
    Ok(ControlLimit {
        c: if ok { means.last().cloned() } else { None },
        means,
        distances,
    })
}

/// τ ↦ δ_{1/ξ} κ(ξτ) sampled at the given times.
pub fn dilate_curve(c: &HorizontalCurve, xi: f64, weights: &[u32], times: &[f64]) -> Vec<Vec<f64>> {
    times
        .iter()
        .map(|t| dilate_point_f64(&c.sample_at(xi * t), 1.0 / xi, weights))
        .collect()
}

/// The generator fields W_i of F compiled to floats.
pub fn lift_fields(l: &LiftedStructure) -> FloatFields {
    let gens: Vec<Vec<Poly>> = (0..l.basis().rank()).map(|i| l.generator_field_polys(i).to_vec()).collect();
    FloatFields::from_polys(&gens)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftReport {
    pub lift: HorizontalCurve,
    pub direct: HorizontalCurve,
    /// sup over nodes of |π^∞(κ̄(t)) − κ(t)|
    pub projection_defect: f64,
    pub length: f64,
    pub lift_length: f64,
}

/// Lifts h to F from 0 and compares its projection with the curve of Y^∞.
pub fn lift_curve(h: &Control, l: &LiftedStructure, rk: Rk4, tol: f64) -> Result<LiftReport> {
    let gf = lift_fields(l);
    let mut lift = integrate(&gf, h, &vec![0.0; l.basis().dim()], rk)?;
    lift.family = "F".into();
    let yf = FloatFields::from_fields(l.target().fields());
    let mut direct = integrate(&yf, h, &vec![0.0; l.target().n()], rk)?;
    direct.family = "Y^inf".into();
    let projection_defect = lift
        .states
        .iter()
        .zip(&direct.states)
        .map(|(a, x)| {
            l.project_f64(a)
                .iter()
                .zip(x)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    if projection_defect > tol {
        return Err(Error::Consistency(format!(
            "projection of the lift is {projection_defect:e} away from the curve"
        )));
    }
    // both curves share the control, so their lengths agree
    let len = length(h);
    Ok(LiftReport {
        lift,
        direct,
        projection_defect,
        length: len,
        lift_length: length(h),
    })
}
