//! The invariant suite run by `verify`.

use std::fmt::Write as _;

use carnot_tangent::ccfields::{pushforward_dilation_symbolic, words_of_length, AdaptedFrame, CCStructure};
use carnot_tangent::curves::{integrate, length, lift_curve, norm, Control, FloatFields, Rk4};
use carnot_tangent::freecarnot::{bch, build_hall_basis, build_psi, group_action, FreeLieElement, LiftedStructure};
use carnot_tangent::nilpotent::{approximate, build_exponential_chart, decompose, rescaled_bracket, Approximation};
use carnot_tangent::rational::frac;
use carnot_tangent::{ccfields, linalg, Q};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub exact: bool,
    pub residual: Option<f64>,
    pub citation: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub structure: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    fn new(structure: &str, checks: Vec<CheckResult>) -> Self {
        let count = |s| checks.iter().filter(|c| c.status == s).count();
        VerificationReport {
            structure: structure.to_string(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            skipped: count(Status::Skipped),
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(4).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:<7}  {:<7}  {:>10}  detail", "check", "status", "kind", "residual");
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Skipped => "skipped",
            };
            let residual = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
            let kind = if c.exact { "exact" } else { "numeric" };
            let pad = width - c.name.chars().count();
            let _ = writeln!(s, "{}{}  {status:<7}  {kind:<7}  {residual:>10}  {}", c.name, " ".repeat(pad), c.detail);
        }
        let _ = writeln!(s, "{} passed, {} failed, {} skipped", self.passed, self.failed, self.skipped);
        s
    }
}

/// Inputs shared by all checks.
pub struct Context {
    pub input: CCStructure,
    pub approx: Approximation,
    pub lift: Option<LiftedStructure>,
    pub tol: f64,
    pub rk: Rk4,
}

struct Outcome {
    status: Status,
    residual: Option<f64>,
    detail: String,
}

impl Outcome {
    fn exact(ok: bool, detail: impl Into<String>) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            residual: None,
            detail: detail.into(),
        }
    }

    fn numeric(ok: bool, residual: f64, detail: impl Into<String>) -> Self {
        Outcome {
            status: if ok { Status::Pass } else { Status::Fail },
            residual: Some(residual),
            detail: detail.into(),
        }
    }

    fn skipped(detail: impl Into<String>) -> Self {
        Outcome {
            status: Status::Skipped,
            residual: None,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Outcome::exact(false, e.to_string())
    }
}

struct Check {
    name: &'static str,
    exact: bool,
    citation: &'static str,
    run: fn(&Context) -> Outcome,
}

const CHECKS: &[Check] = &[
    Check {
        name: "dim L^1 = r",
        exact: true,
        citation: "first layer of the adapted frame",
        run: first_layer,
    },
    Check {
        name: "AdaptedFrame invariants",
        exact: true,
        citation: "adapted frame selection",
        run: frame_invariants,
    },
    Check {
        name: "decomposition clauses (i)-(iv)",
        exact: true,
        citation: "principal part and remainder in exponential coordinates",
        run: decomposition_clauses,
    },
    Check {
        name: "bracket words of length s+1 vanish",
        exact: true,
        citation: "nilpotency of the approximation",
        run: nilpotency,
    },
    Check {
        name: "det invariance",
        exact: true,
        citation: "constant frame determinant",
        run: det_invariance,
    },
    Check {
        name: "homogeneity",
        exact: true,
        citation: "degree one homogeneity of the approximating fields",
        run: homogeneity,
    },
    Check {
        name: "exponential chart of the nilpotent structure is the identity",
        exact: true,
        citation: "exponential coordinates of the tangent structure",
        run: chart_identity,
    },
    Check {
        name: "Idempotence",
        exact: true,
        citation: "approximating an approximation",
        run: idempotence,
    },
    Check {
        name: "rescaled brackets converge",
        exact: true,
        citation: "convergence of rescaled commutators",
        run: bracket_convergence,
    },
    Check {
        name: "Associativity",
        exact: true,
        citation: "truncated BCH product",
        run: associativity,
    },
    Check {
        name: "Action property",
        exact: true,
        citation: "action of the free group",
        run: action_property,
    },
    Check {
        name: "dilations of F and M^∞ commute",
        exact: true,
        citation: "projection and dilations",
        run: projection_dilation,
    },
    Check {
        name: "projection intertwines generator fields",
        exact: true,
        citation: "projection and generators",
        run: projection_generators,
    },
    Check {
        name: "Length rescaling",
        exact: true,
        citation: "length of rescaled curves",
        run: length_rescaling,
    },
    Check {
        name: "Ball-box-type growth",
        exact: false,
        citation: "growth of horizontal curves in exponential coordinates",
        run: growth,
    },
    Check {
        name: "Blow-up reparametrization identity",
        exact: false,
        citation: "rescaled fields and dilated curves",
        run: reparametrization,
    },
    Check {
        name: "Lift consistency",
        exact: false,
        citation: "horizontal lifts to the free group",
        run: lift_consistency,
    },
];

/// Names of every check, in report order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Runs the approximation pipeline and then every check. If the pipeline
/// fails, the first check fails and the rest are skipped.
pub fn verify(
    structure_name: &str,
    x: &CCStructure,
    max_step: Option<usize>,
    order: Option<u32>,
    tol: f64,
    rk: Rk4,
    jobs: usize,
) -> VerificationReport {
    let approx = match approximate(x, max_step, order) {
        Ok(a) => a,
        Err(e) => {
            let checks = CHECKS
                .iter()
                .enumerate()
                .map(|(k, c)| CheckResult {
                    name: c.name.to_string(),
                    status: if k == 0 { Status::Fail } else { Status::Skipped },
                    exact: c.exact,
                    residual: None,
                    citation: c.citation.to_string(),
                    detail: if k == 0 { format!("approximation failed: {e}") } else { "no approximation".into() },
                })
                .collect();
            return VerificationReport::new(structure_name, checks);
        }
    };
    let lift = if approx.nilpotent.r() >= 2 {
        build_hall_basis(approx.nilpotent.r(), approx.nilpotent.step() as usize)
            .and_then(|b| build_psi(&b, &approx.nilpotent))
            .ok()
    } else {
        None
    };
    let ctx = Context {
        input: x.clone(),
        approx,
        lift,
        tol,
        rk,
    };
    run_checks(structure_name, &ctx, jobs)
}

pub fn run_checks(structure_name: &str, ctx: &Context, jobs: usize) -> VerificationReport {
    let run = || -> Vec<CheckResult> {
        CHECKS
            .par_iter()
            .map(|c| {
                let o = (c.run)(ctx);
                CheckResult {
                    name: c.name.to_string(),
                    status: o.status,
                    exact: c.exact,
                    residual: o.residual,
                    citation: c.citation.to_string(),
                    detail: o.detail,
                }
            })
            .collect()
    };
    let checks = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    VerificationReport::new(structure_name, checks)
}

fn first_layer(c: &Context) -> Outcome {
    let w = c.approx.frame.weights();
    let l1 = w.as_slice().iter().filter(|&&x| x == 1).count();
    Outcome::exact(l1 == c.input.r(), format!("dim L^1 = {l1}, r = {}", c.input.r()))
}

fn frame_invariants(c: &Context) -> Outcome {
    match c.approx.frame.validate(&c.input) {
        Ok(()) => Outcome::exact(true, format!("weights {:?}", c.approx.frame.weights().as_slice())),
        Err(e) => Outcome::error(e),
    }
}

fn decomposition_clauses(c: &Context) -> Outcome {
    let d = &c.approx.decomposition;
    match decompose(d.base(), d.frame()) {
        Ok(again) => {
            let split = (0..d.base().r()).all(|i| {
                (0..d.base().n()).all(|j| {
                    again.principal()[i][j].add(&again.remainder()[i][j]).ok().as_ref() == Some(d.base().fields()[i].component(j))
                })
            });
            let zero = if again.remainder_is_zero() { "zero remainder" } else { "nonzero remainder" };
            Outcome::exact(split, zero)
        }
        Err(e) => Outcome::error(e),
    }
}

fn nilpotency(c: &Context) -> Outcome {
    let l = &c.approx.nilpotent;
    let fields = l.fields();
    let words = words_of_length(l.r(), l.step() as usize + 1);
    for word in &words {
        let mut acc = fields[word[word.len() - 1] - 1].clone();
        for &k in word[..word.len() - 1].iter().rev() {
            acc = match ccfields::lie_bracket(&fields[k - 1], &acc) {
                Ok(v) => v,
                Err(e) => return Outcome::error(e),
            };
        }
        if !acc.is_zero() {
            return Outcome::exact(false, format!("word {word:?} is nonzero"));
        }
    }
    Outcome::exact(true, format!("{} words", words.len()))
}

fn det_invariance(c: &Context) -> Outcome {
    let l = &c.approx.nilpotent;
    let base = c.approx.decomposition.base();
    let frame = match AdaptedFrame::from_words(base, l.frame().words().to_vec()) {
        Ok(f) => f,
        Err(e) => return Outcome::error(e),
    };
    match linalg::det(frame.basis_at_zero()) {
        Ok(d0) => Outcome::exact(
            !d0.is_zero() && d0 == *l.determinant(),
            format!("det = {}", carnot_tangent::rational::format_q(l.determinant())),
        ),
        Err(e) => Outcome::error(e),
    }
}

fn homogeneity(c: &Context) -> Outcome {
    let ok = c
        .approx
        .nilpotent
        .fields()
        .iter()
        .all(|f| pushforward_dilation_symbolic(f).is_exactly(1, f));
    Outcome::exact(ok, "")
}

fn chart_identity(c: &Context) -> Outcome {
    let order = c.approx.chart.order();
    let y = match c.approx.nilpotent.to_structure(order) {
        Ok(y) => y,
        Err(e) => return Outcome::error(e),
    };
    match build_exponential_chart(&y, y.frame().expect("frame attached"), order) {
        Ok(ch) => Outcome::exact(ch.phi().is_identity(), format!("order {order}")),
        Err(e) => Outcome::error(e),
    }
}

fn idempotence(c: &Context) -> Outcome {
    let order = c.approx.chart.order();
    let again = c
        .approx
        .nilpotent
        .to_structure(order)
        .and_then(|y| approximate(&y, None, Some(order)));
    match again {
        Ok(a) => {
            let same = a
                .nilpotent
                .fields()
                .iter()
                .zip(c.approx.nilpotent.fields())
                .all(|(u, v)| u.components().iter().zip(v.components()).all(|(p, q)| p.poly() == q.poly()));
            Outcome::exact(same, "")
        }
        Err(e) => Outcome::error(e),
    }
}

fn bracket_convergence(c: &Context) -> Outcome {
    for word in c.approx.frame.words() {
        match rescaled_bracket(&c.approx.decomposition, &c.approx.nilpotent, word.letters()) {
            Ok((exp, inf)) => {
                let positive = exp.max_power().is_some_and(|k| k > 0);
                if positive || exp.coefficient(0) != inf {
                    return Outcome::exact(false, format!("word {:?}", word.letters()));
                }
            }
            Err(e) => return Outcome::error(e),
        }
    }
    Outcome::exact(true, format!("{} frame words", c.approx.frame.words().len()))
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    frac(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

fn random_element(rng: &mut ChaCha8Rng, l: &LiftedStructure) -> FreeLieElement {
    let b = l.basis();
    FreeLieElement::new(b, (0..b.dim()).map(|_| random_q(rng)).collect()).expect("length matches")
}

fn associativity(c: &Context) -> Outcome {
    let Some(l) = &c.lift else {
        return Outcome::skipped("rank below 2");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (a, b, d) = (random_element(&mut rng, l), random_element(&mut rng, l), random_element(&mut rng, l));
        let lhs = bch(&a, &b).and_then(|ab| bch(&ab, &d));
        let rhs = bch(&b, &d).and_then(|bd| bch(&a, &bd));
        match (lhs, rhs) {
            (Ok(x), Ok(y)) if x == y => {}
            (Ok(_), Ok(_)) => return Outcome::exact(false, "products differ"),
            (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
        }
    }
    Outcome::exact(true, format!("10 triples in dimension {}", l.basis().dim()))
}

fn action_property(c: &Context) -> Outcome {
    let Some(l) = &c.lift else {
        return Outcome::skipped("rank below 2");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = l.target().n();
    for _ in 0..5 {
        let x: Vec<Q> = (0..n).map(|_| random_q(&mut rng)).collect();
        let (f, g) = (random_element(&mut rng, l), random_element(&mut rng, l));
        let lhs = group_action(&x, &f, l).and_then(|y| group_action(&y, &g, l));
        let rhs = bch(&f, &g).and_then(|fg| group_action(&x, &fg, l));
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => return Outcome::exact(false, "actions differ"),
            (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
        }
    }
    Outcome::exact(true, "5 pairs")
}

fn projection_dilation(c: &Context) -> Outcome {
    let Some(l) = &c.lift else {
        return Outcome::skipped("rank below 2");
    };
    Outcome::exact(l.dilation_residual().iter().all(|p| p.is_zero()), "")
}

fn projection_generators(c: &Context) -> Outcome {
    let Some(l) = &c.lift else {
        return Outcome::skipped("rank below 2");
    };
    Outcome::exact(l.pushforward_residual().iter().flatten().all(|p| p.is_zero()), "")
}

fn random_control(rng: &mut ChaCha8Rng, r: usize, pieces: usize, end: f64, arclength: bool) -> Control {
    let grid: Vec<f64> = (0..=pieces).map(|k| end * k as f64 / pieces as f64).collect();
    let values: Vec<Vec<f64>> = (0..pieces)
        .map(|_| loop {
            let v: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if norm(&v) > 0.1 {
                break v;
            }
        })
        .collect();
    if arclength {
        Control::arclength(grid, values).expect("nonzero values")
    } else {
        Control::new(grid, values).expect("valid grid")
    }
}

fn length_rescaling(c: &Context) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in -3..=3 {
        let h = random_control(&mut rng, c.input.r(), 5, 1.0, false);
        let lam = 2f64.powi(k);
        if length(&h.rescaled(lam)) != lam * length(&h) {
            return Outcome::exact(false, format!("λ = {lam}"));
        }
    }
    Outcome::exact(true, "dyadic λ from 1/8 to 8")
}

fn growth(c: &Context) -> Outcome {
    let d = &c.approx.decomposition;
    let w = d.weights().as_slice().to_vec();
    let fields = FloatFields::from_fields(d.base().fields());
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut curves = Vec::new();
    for _ in 0..100 {
        let pieces = rng.gen_range(1..=10);
        let h = random_control(&mut rng, d.base().r(), pieces, 1.0, true);
        match integrate(&fields, &h, &vec![0.0; w.len()], c.rk) {
            Ok(k) => curves.push(k),
            Err(e) => return Outcome::error(e),
        }
    }
    let at_one = curves.iter().flat_map(|k| k.last().iter().map(|x| x.abs()).collect::<Vec<_>>()).fold(0.0, f64::max);
    let big_c = 2.0 * at_one;
    let mut worst: f64 = 0.0;
    for k in &curves {
        for (t, x) in k.times.iter().zip(&k.states) {
            if *t >= 1e-3 {
                for (xj, wj) in x.iter().zip(&w) {
                    worst = worst.max(xj.abs() / t.powi(*wj as i32));
                }
            }
        }
    }
    Outcome::numeric(worst <= big_c, worst / big_c, format!("C = {big_c:.4}, max ratio {worst:.4}"))
}

fn reparametrization(c: &Context) -> Outcome {
    let d = &c.approx.decomposition;
    let w = d.weights().as_slice().to_vec();
    let n = w.len();
    let base = FloatFields::from_fields(d.base().fields());
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst: f64 = 0.0;
    for &lam in &[0.5, 2.0, 3.0] {
        let h = random_control(&mut rng, d.base().r(), 4, 0.5, false);
        let coarse = integrate(&base, &h, &vec![0.0; n], c.rk);
        let fine = integrate(&base, &h, &vec![0.0; n], Rk4 { step: c.rk.step / 2.0, ..c.rk });
        let y = FloatFields::rescaled(d.base().fields(), d.weights(), 1.0 / lam);
        let scaled = integrate(&y, &h.rescaled(lam), &vec![0.0; n], Rk4 { step: lam * c.rk.step, ..c.rk });
        let (coarse, fine, scaled) = match (coarse, fine, scaled) {
            (Ok(a), Ok(b), Ok(s)) => (a, b, s),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return Outcome::error(e),
        };
        let scale = coarse.last().iter().map(|x| x.abs()).fold(1.0, f64::max);
        let defect = max_gap(coarse.last(), fine.last()).max(1e-13 * scale);
        let expect = ccfields::dilate_point_f64(coarse.last(), lam, &w);
        worst = worst.max(max_gap(scaled.last(), &expect) / (10.0 * defect));
    }
    Outcome::numeric(worst <= 1.0, worst, "gap over 10× integrator defect")
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn lift_consistency(c: &Context) -> Outcome {
    let Some(l) = &c.lift else {
        return Outcome::skipped("rank below 2");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let pieces = rng.gen_range(1..=8);
        let h = random_control(&mut rng, l.basis().rank(), pieces, 1.0, false);
        match lift_curve(&h, l, c.rk, c.tol) {
            Ok(rep) => {
                if rep.length != rep.lift_length {
                    return Outcome::numeric(false, rep.projection_defect, "lengths differ");
                }
                worst = worst.max(rep.projection_defect);
            }
            Err(e) => return Outcome::numeric(false, f64::NAN, e.to_string()),
        }
    }
    Outcome::numeric(worst <= c.tol, worst, "20 controls")
}
