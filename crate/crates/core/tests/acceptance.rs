//! Acceptance criteria 1–11. Each test writes one status line to stderr
//! (bypassing output capture) and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use carnot_tangent::ccfields::{dilate_point, lie_bracket, pushforward_dilation, pushforward_dilation_symbolic, words_of_length};
use carnot_tangent::curves::{
    blowup, blowup_family, control_blowup_limit, detect_halfline, dilate_curve, graded_grid, integrate,
    is_horizontal_line, length, lift_curve, line_distance, norm, Control, FloatFields, Rk4, Window,
};
use carnot_tangent::freecarnot::{bch, build_hall_basis, build_psi, group_action, group_dilate, project_pi, FreeLieElement};
use carnot_tangent::nilpotent::{approximate, Approximation};
use carnot_tangent::rational::frac;
use carnot_tangent::{linalg, models, Q};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "acceptance {id:>2} [{}] {name} ({:.2} s) {detail}\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn corpus() -> Vec<(String, Approximation)> {
    models::corpus()
        .into_iter()
        .map(|(name, x)| {
            let a = approximate(&x, None, None).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, a)
        })
        .collect()
}

fn random_q(rng: &mut ChaCha8Rng) -> Q {
    frac(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

/// Lyndon words of length k over r letters, counted by brute force.
fn lyndon_count(r: usize, k: usize) -> usize {
    let total = r.pow(k as u32);
    (0..total)
        .filter(|&code| {
            let mut w = Vec::with_capacity(k);
            let mut c = code;
            for _ in 0..k {
                w.push(c % r);
                c /= r;
            }
            (1..k).all(|s| {
                let rot: Vec<usize> = w[s..].iter().chain(&w[..s]).copied().collect();
                w < rot
            })
        })
        .count()
}

#[test]
fn criterion_01_free_lie_dimensions() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (r, s) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)] {
        let b = build_hall_basis(r, s).unwrap();
        let expect: Vec<usize> = (1..=s).map(|k| lyndon_count(r, k)).collect();
        if b.layer_sizes() != expect {
            bad.push(format!("({r},{s}): {:?} vs {expect:?}", b.layer_sizes()));
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty() && el < Duration::from_secs(1);
    report(1, "free Lie dimensions", ok, el, &bad.join("; "));
    assert!(ok, "{bad:?} in {el:?}");
}

#[test]
fn criterion_02_bch_soundness() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shapes = [(2, 2), (2, 3), (3, 3), (2, 4)];
    let mut failures = 0;
    let mut checked = 0;
    for k in 0..100 {
        let (r, s) = shapes[k % shapes.len()];
        let b = build_hall_basis(r, s).unwrap();
        let mut elem = || FreeLieElement::new(&b, (0..b.dim()).map(|_| random_q(&mut rng)).collect()).unwrap();
        let (x, y, z) = (elem(), elem(), elem());
        let zero = FreeLieElement::zero(&b);
        let lhs = bch(&bch(&x, &y).unwrap(), &z).unwrap();
        let rhs = bch(&x, &bch(&y, &z).unwrap()).unwrap();
        let ok = lhs == rhs
            && bch(&x, &zero).unwrap() == x
            && bch(&zero, &x).unwrap() == x
            && bch(&x, &x.neg()).unwrap().is_zero();
        failures += usize::from(!ok);
        checked += 1;
    }
    let el = t.elapsed();
    let ok = failures == 0 && el < Duration::from_secs(30);
    report(2, "BCH soundness", ok, el, &format!("{checked} triples, {failures} failures"));
    assert!(ok);
}

#[test]
fn criterion_03_decomposition_clauses() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let c = corpus();
    for (name, a) in &c {
        let d = &a.decomposition;
        let w = d.weights().as_slice();
        for (i, f) in d.base().fields().iter().enumerate() {
            for j in 0..w.len() {
                let p = &d.principal()[i][j];
                let r = &d.remainder()[i][j];
                let target = w[j] as i64 - w[i] as i64;
                let clause_i = p.terms_sorted().iter().all(|(e, _)| d.weights().degree(e) as i64 == target);
                let clause_ii = w[j] > w[i] || {
                    let expect = if i == j { Q::one() } else { Q::zero() };
                    p.terms_sorted().iter().all(|(e, c)| e.iter().all(|&x| x == 0) && *c == expect)
                        && p.value_at_zero() == expect
                };
                let clause_iii = r.value_at_zero().is_zero();
                let clause_iv = r.min_degree().is_none_or(|m| m as i64 > target);
                let split = p.add(r).unwrap() == *f.component(j);
                if !(clause_i && clause_ii && clause_iii && clause_iv && split) {
                    bad.push(format!("{name} ({},{})", i + 1, j + 1));
                }
            }
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty() && el < Duration::from_secs(10);
    report(3, "decomposition clauses (i)-(iv)", ok, el, &format!("{} structures {}", c.len(), bad.join(" ")));
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_04_nilpotency_and_determinant() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (name, a) in corpus() {
        let l = &a.nilpotent;
        let fields = l.fields();
        for word in words_of_length(l.r(), l.step() as usize + 1) {
            let mut acc = fields[word[word.len() - 1] - 1].clone();
            for &k in word[..word.len() - 1].iter().rev() {
                acc = lie_bracket(&fields[k - 1], &acc).unwrap();
            }
            if !acc.is_zero() {
                bad.push(format!("{name}: {word:?} nonzero"));
            }
        }
        let n = l.n();
        let mut dets = Vec::new();
        for _ in 0..4 {
            let x: Vec<Q> = (0..n).map(|_| random_q(&mut rng)).collect();
            let cols: Vec<Vec<Q>> = l.frame_fields().iter().map(|f| f.eval(&x)).collect();
            let m: Vec<Vec<Q>> = (0..n).map(|j| (0..n).map(|i| cols[i][j].clone()).collect()).collect();
            dets.push(linalg::det(&m).unwrap());
        }
        if dets.iter().any(|d| d != l.determinant() || d.is_zero()) {
            bad.push(format!("{name}: determinant {dets:?}"));
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty();
    report(4, "words of length s+1 vanish, constant determinant", ok, el, &bad.join("; "));
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_05_homogeneity() {
    let t = Instant::now();
    let mut bad = Vec::new();
    for (name, a) in corpus() {
        for (i, f) in a.nilpotent.fields().iter().enumerate() {
            let symbolic = pushforward_dilation_symbolic(f).is_exactly(1, f);
            let sampled = [frac(2, 1), frac(1, 3), frac(7, 5)]
                .iter()
                .all(|l| pushforward_dilation(f, l).unwrap() == f.scale(l));
            if !(symbolic && sampled) {
                bad.push(format!("{name} Y_{}", i + 1));
            }
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty();
    report(5, "homogeneity of the nilpotent fields", ok, el, &bad.join(" "));
    assert!(ok, "{bad:?}");
}

#[test]
fn criterion_06_projection_equivariance() {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (name, a) in corpus() {
        let target = &a.nilpotent;
        let b = build_hall_basis(target.r(), target.step() as usize).unwrap();
        let l = build_psi(&b, target).unwrap();
        if !l.dilation_residual().iter().all(|p| p.is_zero()) {
            bad.push(format!("{name}: dilation residual"));
        }
        if !l.pushforward_residual().iter().flatten().all(|p| p.is_zero()) {
            bad.push(format!("{name}: pushforward residual"));
        }
        // pointwise: π(δ̂_λ f) = δ_λ π(f) and π(f·exp(cW_i)) = π(f)·exp(cW_i)
        for _ in 0..3 {
            let f = FreeLieElement::new(&b, (0..b.dim()).map(|_| random_q(&mut rng)).collect()).unwrap();
            let lam = frac(rng.gen_range(1..=5), rng.gen_range(1..=3));
            let lhs = project_pi(&group_dilate(&f, &lam).unwrap(), &l).unwrap();
            let rhs = dilate_point(&project_pi(&f, &l).unwrap(), &lam, target.weights()).unwrap();
            if lhs != rhs {
                bad.push(format!("{name}: dilation at a point"));
            }
            let i = rng.gen_range(0..b.rank());
            let g = FreeLieElement::basis_element(&b, i).scale(&random_q(&mut rng));
            let moved = project_pi(&bch(&f, &g).unwrap(), &l).unwrap();
            let acted = group_action(&project_pi(&f, &l).unwrap(), &g, &l).unwrap();
            if moved != acted {
                bad.push(format!("{name}: action at a point"));
            }
        }
    }
    let el = t.elapsed();
    let ok = bad.is_empty();
    report(6, "projection commutes with dilations and generators", ok, el, &bad.join("; "));
    assert!(ok, "{bad:?}");
}

fn random_arclength_control(rng: &mut ChaCha8Rng, r: usize) -> Control {
    let pieces = rng.gen_range(1..=12);
    let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut grid = vec![0.0];
    for c in cuts {
        if c - grid.last().unwrap() > 1e-3 {
            grid.push(c);
        }
    }
    grid.push(1.0);
    let values = (1..grid.len())
        .map(|_| loop {
            let v: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if norm(&v) > 0.1 {
                break v;
            }
        })
        .collect();
    Control::arclength(grid, values).unwrap()
}

#[test]
fn criterion_07_growth_estimate() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut details = Vec::new();
    let mut violations = 0;
    for (name, x) in [("heisenberg", models::heisenberg()), ("engel", models::engel())] {
        let a = approximate(&x, None, None).unwrap();
        let d = &a.decomposition;
        let w = d.weights().as_slice().to_vec();
        let fields = FloatFields::from_fields(d.base().fields());
        let curves: Vec<_> = (0..100)
            .map(|_| {
                let h = random_arclength_control(&mut rng, d.base().r());
                integrate(&fields, &h, &vec![0.0; w.len()], Rk4::default()).unwrap()
            })
            .collect();
        let at_one = curves
            .iter()
            .flat_map(|c| c.last().iter().map(|x| x.abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max);
        let big_c = 2.0 * at_one;
        let mut worst: f64 = 0.0;
        for c in &curves {
            for (tt, x) in c.times.iter().zip(&c.states) {
                if *tt < 1e-3 {
                    continue;
                }
                for (xj, wj) in x.iter().zip(&w) {
                    let ratio = xj.abs() / tt.powi(*wj as i32);
                    worst = worst.max(ratio);
                    if ratio > big_c {
                        violations += 1;
                    }
                }
            }
        }
        details.push(format!("{name}: C = {big_c:.4}, max ratio {worst:.4}"));
    }
    let el = t.elapsed();
    let ok = violations == 0 && el < Duration::from_secs(60);
    report(7, "growth estimate", ok, el, &format!("{}; {violations} violations", details.join(", ")));
    assert!(ok);
}

fn heisenberg_linear_control() -> (Approximation, Control) {
    let a = approximate(&models::heisenberg(), None, None).unwrap();
    let h = Control::from_fn(graded_grid(0.0, 1.0, 0.0, 1e-8, 1.1), |t| vec![1.0, t]).unwrap();
    (a, h)
}

#[test]
fn criterion_08_tangent_halfline() {
    let t = Instant::now();
    let (a, h) = heisenberg_linear_control();
    let etas = [1e-1, 1e-2, 1e-3, 1e-4];
    let fam = blowup_family(&a.decomposition, &h, 0.0, &etas, Window::forward(1.0), Rk4::default()).unwrap();
    let errors: Vec<f64> = fam.iter().map(|c| line_distance(c, &[1.0, 0.0, 0.0])).collect();
    let monotone = errors.windows(2).all(|p| p[1] < p[0]);
    let verdict = detect_halfline(&fam, 2, 1e-3);
    let v_ok = verdict.v.as_ref().is_some_and(|v| {
        (v[0] - 1.0).abs() < 1e-3 && v[1..].iter().all(|x| x.abs() < 1e-3)
    }) && verdict.norm_v.is_some_and(|n| (n - 1.0).abs() < 1e-3);
    let el = t.elapsed();
    let ok = monotone && errors.last().is_some_and(|e| *e < 1e-3) && verdict.limit_found && v_ok;
    report(8, "blow-ups converge to a half-line", ok, el, &format!("errors {:?}, v {:?}", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(), verdict.v));
    assert!(ok);
}

#[test]
fn criterion_09_control_limit() {
    let t = Instant::now();
    let a = approximate(&models::heisenberg(), None, None).unwrap();
    let t0 = PI / 2.0;
    let h = Control::from_fn(graded_grid(0.0, PI, t0, 1e-8, 1.1), |s| vec![s.cos(), s.sin()]).unwrap();
    let etas = [1e-1, 1e-2, 1e-3, 1e-4];
    let window = Window { lo: -1.0, hi: 1.0 };
    let lim = control_blowup_limit(&h, t0, &etas, window, 1e-3).unwrap();
    let c_ok = lim.c.as_ref().is_some_and(|c| norm(&[c[0], c[1] - 1.0]) < 1e-3);
    let k = blowup(&a.decomposition, &h, t0, 1e-4, window, Rk4::default()).unwrap();
    let x0 = k.sample_at(1.0);
    let line = is_horizontal_line(&x0, &a.nilpotent, 1e-3);
    let el = t.elapsed();
    let ok = c_ok && line.is_line;
    report(9, "control blow-up limit", ok, el, &format!("c {:?}, line residual {:.2e}", lim.c, line.residual));
    assert!(ok);
}

#[test]
fn criterion_10_lifting_round_trip() {
    let t = Instant::now();
    let a = approximate(&models::engel(), None, None).unwrap();
    let b = build_hall_basis(2, 3).unwrap();
    let l = build_psi(&b, &a.nilpotent).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..20 {
        let pieces = rng.gen_range(1..=8);
        let grid: Vec<f64> = (0..=pieces).map(|k| k as f64 / pieces as f64).collect();
        let values = (0..pieces).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let h = Control::new(grid, values).unwrap();
        match lift_curve(&h, &l, Rk4 { step: 1e-3, bound: 1e6 }, 1e-5) {
            Ok(rep) => {
                worst = worst.max(rep.projection_defect);
                ok &= rep.length == rep.lift_length && rep.length == length(&h);
            }
            Err(_) => ok = false,
        }
    }
    let el = t.elapsed();
    ok &= worst < 1e-5;
    report(10, "lifting round trip", ok, el, &format!("max defect {worst:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_11_blowup_composition() {
    let t = Instant::now();
    let (a, h) = heisenberg_linear_control();
    let w = a.decomposition.weights().as_slice().to_vec();
    let rk = Rk4::default();
    let mut worst: f64 = 0.0;
    for eta in [1e-1, 1e-2, 1e-3] {
        for xi in [0.5, 0.1] {
            let single = blowup(&a.decomposition, &h, 0.0, xi * eta, Window::forward(1.0), rk).unwrap();
            let first = blowup(&a.decomposition, &h, 0.0, eta, Window::forward(xi), Rk4 { step: xi * rk.step, ..rk }).unwrap();
            let twice = dilate_curve(&first, xi, &w, &single.times);
            for (x, y) in single.states.iter().zip(&twice) {
                for (u, v) in x.iter().zip(y) {
                    worst = worst.max((u - v).abs());
                }
            }
        }
    }
    let el = t.elapsed();
    let ok = worst < 1e-4;
    report(11, "two-stage blow-up composition", ok, el, &format!("max gap {worst:.2e}"));
    assert!(ok);
}
