//! Ready-made structures used by tests, fixtures and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ccfields::{select_adapted_frame, CCStructure, PolyVectorField};
use crate::jets::{Jet, Weights};
use crate::poly::{Exponent, Poly};
use crate::rational::{frac, q, Q};

/// Input jet order of the bundled models (total degree, unit weights).
pub const MODEL_ORDER: u32 = 10;

fn field(n: usize, comps: Vec<Vec<(Exponent, Q)>>) -> PolyVectorField {
    let w = Weights::unit(n);
    PolyVectorField::new(comps.into_iter().map(|t| Jet::from_terms(&w, MODEL_ORDER, t)).collect())
        .expect("model fields are well formed")
}

fn e(exp: &[u32]) -> Exponent {
    exp.to_vec()
}

/// ∂_1, …, ∂_n on ℝ^n.
pub fn abelian(n: usize) -> CCStructure {
    let w = Weights::unit(n);
    CCStructure::new((0..n).map(|j| PolyVectorField::coordinate(&w, MODEL_ORDER, j)).collect())
        .expect("coordinate fields are independent")
}

/// ∂_1 − (x_2/2)∂_3 and ∂_2 + (x_1/2)∂_3.
pub fn heisenberg() -> CCStructure {
    let y1 = field(3, vec![vec![(e(&[0, 0, 0]), q(1))], vec![], vec![(e(&[0, 1, 0]), frac(-1, 2))]]);
    let y2 = field(3, vec![vec![], vec![(e(&[0, 0, 0]), q(1))], vec![(e(&[1, 0, 0]), frac(1, 2))]]);
    CCStructure::new(vec![y1, y2]).unwrap()
}

/// ∂_1 and ∂_2 + x_1∂_3.
pub fn heisenberg_polarized() -> CCStructure {
    let y1 = field(3, vec![vec![(e(&[0, 0, 0]), q(1))], vec![], vec![]]);
    let y2 = field(3, vec![vec![], vec![(e(&[0, 0, 0]), q(1))], vec![(e(&[1, 0, 0]), q(1))]]);
    CCStructure::new(vec![y1, y2]).unwrap()
}

/// ∂_1 and ∂_2 + x_1∂_3 + (x_1²/2)∂_4.
pub fn engel() -> CCStructure {
    let x1 = field(4, vec![vec![(e(&[0, 0, 0, 0]), q(1))], vec![], vec![], vec![]]);
    let x2 = field(
        4,
        vec![
            vec![],
            vec![(e(&[0, 0, 0, 0]), q(1))],
            vec![(e(&[1, 0, 0, 0]), q(1))],
            vec![(e(&[2, 0, 0, 0]), frac(1, 2))],
        ],
    );
    CCStructure::new(vec![x1, x2]).unwrap()
}

/// Adds a few random monomials of total degree 2 or 3 to every field.
///
/// Draws are repeated until the adapted frame keeps the weights of `base`, so
/// the perturbation changes the remainder but not the graded structure.
pub fn perturbed(base: &CCStructure, seed: u64) -> CCStructure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = base.n();
    let step = base.weights().len().max(1);
    let target = select_adapted_frame(base, step).expect("base satisfies Hörmander").weights();
    loop {
        let fields: Vec<PolyVectorField> = base
            .fields()
            .iter()
            .map(|f| {
                let comps = f
                    .components()
                    .iter()
                    .map(|c| {
                        let mut p: Poly = c.poly().clone();
                        for _ in 0..rng.gen_range(0..=2) {
                            let deg = rng.gen_range(2..=3);
                            let mut exp = vec![0u32; n];
                            for _ in 0..deg {
                                exp[rng.gen_range(0..n)] += 1;
                            }
                            let num = rng.gen_range(-3i64..=3);
                            let den = rng.gen_range(1i64..=4);
                            p.add_term(exp, frac(num, den));
                        }
                        Jet::from_poly(c.weights(), c.order(), p)
                    })
                    .collect();
                PolyVectorField::new(comps).unwrap()
            })
            .collect();
        let Ok(x) = CCStructure::new(fields) else { continue };
        if let Ok(f) = select_adapted_frame(&x, step) {
            if f.weights() == target {
                return x;
            }
        }
    }
}

/// The acceptance corpus: Heisenberg, Engel and five perturbations of each.
pub fn corpus() -> Vec<(String, CCStructure)> {
    let mut out = vec![
        ("heisenberg".to_string(), heisenberg()),
        ("engel".to_string(), engel()),
    ];
    for seed in 0..5 {
        out.push((format!("heisenberg-perturbed-{seed}"), perturbed(&heisenberg(), seed)));
        out.push((format!("engel-perturbed-{seed}"), perturbed(&engel(), 100 + seed)));
    }
    out
}
