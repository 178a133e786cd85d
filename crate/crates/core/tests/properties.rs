mod common;

use approachlab::corpus::{corpus_instance, CorpusParams, CORPUS_NAMES};
use approachlab::instances::{find_fixed_point, regret_as_approachability, separating_direction};
use approachlab::learners::{simulate, GgmLearner, IidVertex, Learner};
use approachlab::reductions::{classical_reduce, weighted_to_proper};
use approachlab::{
    affine_span, apploss_of_play, canonicalize, check_external, classify, decide_proper, det_exact,
    lp_solve, polytope_membership, regret_of_play, AffineMapGen, EquivStatus, Instance,
    LinearProgram, LpOutcome, Matrix, Polytope, Rational, RegretInstance, Vector,
};
use common::{point_in, random_proper, rat, rng, rref, simplex_point};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vector> {
    (0..n)
        .map(|_| (0..d).map(|_| rat(rng, -2, 2, 2)).collect())
        .collect()
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
    Matrix::from_rows(
        (0..d)
            .map(|_| (0..d).map(|_| rat(rng, -3, 3, 1)).collect())
            .collect(),
    )
    .unwrap()
}

/// Any regret instance on the simplex, valid or not.
fn random_regret(rng: &mut ChaCha8Rng) -> RegretInstance {
    let d = rng.gen_range(1..=3);
    let phi = (0..rng.gen_range(1..=3))
        .map(|k| {
            let off: Vector = (0..d).map(|_| rat(rng, -1, 1, 2)).collect();
            AffineMapGen::new(format!("g{k}"), random_matrix(rng, d), off).unwrap()
        })
        .collect();
    RegretInstance::new(
        "random",
        Polytope::simplex(d),
        Polytope::cube(d, (-1).into(), 1.into()),
        phi,
    )
    .unwrap()
}

/// `sum_t sum_i (p_i - phi(p)_i) l_i`, written out coordinate by coordinate.
fn naive_regret(g: &AffineMapGen, plays: &[Vector], losses: &[Vector]) -> Rational {
    let d = g.linear.rows();
    let mut total = Rational::zero();
    for (p, l) in plays.iter().zip(losses) {
        for i in 0..d {
            let mut image = g.offset[i].clone();
            for j in 0..d {
                image += &g.linear[(i, j)] * &p[j];
            }
            total += (&p[i] - &image) * &l[i];
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rationals_round_trip_through_text(n in -1_000_000i64..1_000_000, d in 1i64..10_000) {
        let x = Rational::new(n, d);
        let back: Rational = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn membership_reconstructs_or_lp_is_infeasible(seed in any::<u64>(), n in 1usize..6, d in 1usize..4) {
        let mut r = rng(seed);
        let p = Polytope::new(random_points(&mut r, n, d)).unwrap();
        let q = if r.gen_bool(0.5) { point_in(&mut r, &p) } else { random_points(&mut r, 1, d).remove(0) };
        match polytope_membership(&q, &p).unwrap() {
            Some(lambda) => {
                prop_assert!(lambda.iter().all(|x| !x.is_negative()));
                prop_assert_eq!(lambda.sum(), Rational::one());
                let mut x = Vector::zeros(d);
                for (c, v) in lambda.iter().zip(p.vertices()) {
                    x = x.axpy(c, v).unwrap();
                }
                prop_assert_eq!(x, q);
            }
            None => {
                let m = p.num_vertices();
                let mut lp = LinearProgram::new(m);
                for i in 0..d {
                    lp.add_eq(p.vertices().iter().map(|v| v[i].clone()).collect(), q[i].clone());
                }
                lp.add_eq(Vector::filled(m, Rational::one()), Rational::one());
                for k in 0..m {
                    lp.add_nonneg(k);
                }
                prop_assert_eq!(lp_solve(&lp).unwrap(), LpOutcome::Infeasible);
            }
        }
    }

    #[test]
    fn determinant_of_inverse_is_reciprocal(seed in any::<u64>(), d in 1usize..5) {
        let m = random_matrix(&mut rng(seed), d);
        let det = det_exact(&m).unwrap();
        if !det.is_zero() {
            prop_assert_eq!(det * det_exact(&m.inverse().unwrap()).unwrap(), Rational::one());
        }
    }

    #[test]
    fn affine_span_matches_difference_rank(seed in any::<u64>(), n in 1usize..6, d in 1usize..4) {
        let mut r = rng(seed);
        let mut pts = random_points(&mut r, n, d);
        if n > 2 && r.gen_bool(0.5) {
            // Force an affine dependency.
            let mid = pts[0].add(&pts[1]).unwrap().scale(&Rational::new(1, 2));
            pts[2] = mid;
        }
        let p = Polytope::new(pts).unwrap();
        let (_, dirs) = affine_span(&p);
        let v = p.vertices();
        let mut diffs: Vec<Vec<Rational>> =
            v.iter().skip(1).map(|w| w.sub(&v[0]).unwrap().into_inner()).collect();
        prop_assert_eq!(dirs.len(), rref(&mut diffs, d).len());
    }

    #[test]
    fn regret_equals_apploss_of_its_constraint_form(seed in any::<u64>(), t in 0usize..5) {
        let mut r = rng(seed);
        let inst = random_regret(&mut r);
        let plays: Vec<Vector> = (0..t).map(|_| point_in(&mut r, &inst.p)).collect();
        let losses: Vec<Vector> = (0..t).map(|_| point_in(&mut r, &inst.l)).collect();
        let app = regret_as_approachability(&inst);
        prop_assert_eq!(
            apploss_of_play(&app, &plays, &losses).unwrap(),
            regret_of_play(&inst, &plays, &losses).unwrap()
        );
    }

    #[test]
    fn regret_matches_naive_evaluation_on_vertices(seed in any::<u64>(), t in 1usize..4) {
        let mut r = rng(seed);
        let inst = random_regret(&mut r);
        let pick = |r: &mut ChaCha8Rng, p: &Polytope| p.vertices()[r.gen_range(0..p.num_vertices())].clone();
        let plays: Vec<Vector> = (0..t).map(|_| pick(&mut r, &inst.p)).collect();
        let losses: Vec<Vector> = (0..t).map(|_| pick(&mut r, &inst.l)).collect();
        let naive = inst.phi.iter().map(|g| naive_regret(g, &plays, &losses)).max().unwrap();
        prop_assert_eq!(regret_of_play(&inst, &plays, &losses).unwrap(), naive);
    }

    #[test]
    fn classification_ignores_order_and_convex_combinations(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_regret(&mut r);
        let kind = classify(&inst).unwrap().kind;
        let mut phi = inst.phi.clone();
        phi.reverse();
        let w = simplex_point(&mut r, phi.len());
        let d = inst.dim();
        let mut lin = Matrix::zeros(d, d);
        let mut off = Vector::zeros(d);
        for (wk, g) in w.iter().zip(&inst.phi) {
            lin = lin.add(&g.linear.scale(wk)).unwrap();
            off = off.axpy(wk, &g.offset).unwrap();
        }
        phi.push(AffineMapGen::new("mix", lin, off).unwrap());
        let other = RegretInstance::new("shuffled", inst.p.clone(), inst.l.clone(), phi).unwrap();
        prop_assert_eq!(classify(&other).unwrap().kind, kind);
    }

    #[test]
    fn fixed_point_and_separation_are_exclusive(seed in any::<u64>()) {
        let inst = random_regret(&mut rng(seed));
        let kind = classify(&inst).unwrap().kind;
        for g in &inst.phi {
            let fixed = find_fixed_point(g, &inst.p).unwrap();
            let sep = separating_direction(g, &inst.p).unwrap();
            prop_assert!(fixed.is_some() != sep.is_some(), "{}", g.label);
            if let Some(x) = fixed {
                prop_assert!(inst.p.contains(&x).unwrap());
                prop_assert_eq!(g.apply(&x).unwrap(), x);
            }
            if kind.is_proper() {
                prop_assert!(find_fixed_point(g, &inst.p).unwrap().is_some());
            }
        }
    }

    #[test]
    fn proper_instances_have_fixed_points(seed in any::<u64>()) {
        let inst = random_proper(&mut rng(seed), 0).unwrap();
        prop_assert!(classify(&inst).unwrap().kind.is_proper());
        for g in &inst.phi {
            prop_assert!(find_fixed_point(g, &inst.p).unwrap().is_some());
        }
    }

    #[test]
    fn weighted_proper_rewrite_matches_vertexwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_proper(&mut r, 0).unwrap();
        let weights: Vec<Rational> =
            inst.phi.iter().map(|_| Rational::new(r.gen_range(1..=6), r.gen_range(1..=3))).collect();
        let (out, big_w) = weighted_to_proper(&inst, &weights).unwrap();
        for ((g, h), w) in inst.phi.iter().zip(&out.phi).zip(&weights) {
            for p in inst.p.vertices() {
                for l in inst.l.vertices() {
                    let lhs = w * g.regret_term(p, l).unwrap();
                    prop_assert_eq!(lhs, h.regret_term(p, &l.scale(&big_w)).unwrap());
                }
            }
        }
    }

    #[test]
    fn proper_instances_are_proper_equivalent(seed in any::<u64>()) {
        let inst = random_proper(&mut rng(seed), 0).unwrap();
        // The cone LP has `|Phi| * |V|^2` variables; keep it small.
        prop_assume!(inst.p.num_vertices() <= 3);
        let lin = canonicalize(&inst).unwrap();
        let v = decide_proper(&lin, 8, seed).unwrap();
        prop_assert_eq!(v.status, EquivStatus::ProperEquivalent);
        let s = v.s.unwrap();
        let target = v.target.unwrap();
        prop_assert!(classify(&target).unwrap().kind.is_proper());
        let inv_t = s.inverse().unwrap().transpose();
        for (g, h) in inst.phi.iter().zip(&target.phi) {
            for p in inst.p.vertices() {
                for l in inst.l.vertices() {
                    let lt = inv_t.mul_vec(&lin.lift_loss(l)).unwrap();
                    prop_assert_eq!(g.regret_term(p, l).unwrap(), h.regret_term(&lin.lift_play(p), &lt).unwrap());
                }
            }
        }
    }

    #[test]
    fn blackwell_and_ggm_stay_below_their_inner_regret(seed in any::<u64>(), t in 1usize..12) {
        let mut r = rng(seed);
        let inst = random_proper(&mut r, 0).unwrap();
        let family = inst.l.vertices().to_vec();
        let wrapped = Instance::from(inst.clone());
        let mut ggm = GgmLearner::new(&inst, t).unwrap();
        let mut adv = IidVertex::new(family.clone(), seed).unwrap();
        let trace = simulate(&mut ggm, &mut adv, &wrapped, t, seed).unwrap();
        let inner = trace.inner_cumulative.unwrap();
        for (a, b) in trace.cumulative.iter().zip(&inner) {
            prop_assert!(a <= b);
        }
        for (p, l) in trace.plays.iter().zip(&trace.losses) {
            prop_assert!(inst.p.contains(p).unwrap() && inst.l.contains(l).unwrap());
        }

        let app = regret_as_approachability(&inst);
        let red = classical_reduce(&app).unwrap();
        let mut bw = approachlab::learners::BlackwellLearner::new(&app, t).unwrap();
        let mut adv = IidVertex::new(family, seed).unwrap();
        let trace = simulate(&mut bw, &mut adv, &Instance::from(app.clone()), t, seed).unwrap();
        let inner = trace.inner_cumulative.clone().unwrap();
        for (a, b) in trace.cumulative.iter().zip(&inner) {
            prop_assert!(a <= b);
        }
        // The inner learner's regret is regret on the reduced external instance.
        prop_assert_eq!(red.target.phi.len(), app.u.len());
        prop_assert!(bw.inner_regret().is_some());
    }

    #[test]
    fn external_verdicts_satisfy_both_conditions(seed in any::<u64>()) {
        let inst = random_proper(&mut rng(seed), 0).unwrap();
        let lin = canonicalize(&inst).unwrap();
        let v = check_external(&lin).unwrap();
        let (_, dirs) = lin.base.p.affine_span();
        let constant_differences = lin.base.phi.iter().all(|a| {
            lin.base.phi.iter().all(|b| {
                let diff = a.linear.sub(&b.linear).unwrap();
                dirs.iter().all(|d| diff.mul_vec(d).unwrap().is_zero())
            })
        });
        let unique = lin.base.phi.iter().all(|g| {
            let (m, _) = g.m_phi();
            let cols: Vec<Vector> = dirs.iter().map(|d| m.mul_vec(d).unwrap()).collect();
            let mut rows: Vec<Vec<Rational>> = cols.into_iter().map(Vector::into_inner).collect();
            rref(&mut rows, lin.dim()).len() == dirs.len()
        });
        prop_assert_eq!(v.status == EquivStatus::ExternalEquivalent, constant_differences && unique);
        if v.status == EquivStatus::ExternalEquivalent {
            prop_assert_eq!(classify(v.target.as_ref().unwrap()).unwrap().kind, approachlab::ClassKind::External);
        }
    }
}

#[test]
fn corpus_round_trips_byte_for_byte() {
    for name in CORPUS_NAMES {
        let text = corpus_instance(name, &CorpusParams::default())
            .unwrap()
            .to_json();
        assert_eq!(
            Instance::from_json(&text).unwrap().to_json(),
            text,
            "{name}"
        );
    }
}

#[test]
fn external_corpus_instances_are_also_proper_equivalent() {
    for name in CORPUS_NAMES {
        let Instance::Regret(inst) = corpus_instance(name, &CorpusParams::default()).unwrap()
        else {
            continue;
        };
        if !classify(&inst).unwrap().kind.is_valid() {
            continue;
        }
        let lin = canonicalize(&inst).unwrap();
        if check_external(&lin).unwrap().status == EquivStatus::ExternalEquivalent {
            assert_eq!(
                decide_proper(&lin, 20, 1).unwrap().status,
                EquivStatus::ProperEquivalent,
                "{name}"
            );
        }
    }
}
