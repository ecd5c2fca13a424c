use proptest::prelude::*;
use qrenyi_core::harness::{default_armijo, default_polyak, Quantity};
use qrenyi_core::linalg::trace_inner;
use qrenyi_core::objectives::{
    make_petz_augustin, make_sandwiched_augustin, make_sandwiched_renyi_info, Alpha, Objective,
};
use qrenyi_core::solvers::{
    bregman_vn, maximally_mixed_start, solve_armijo, solve_fixed_point, solve_polyak,
    solve_polyak_until, IterationRecord, Termination,
};
use qrenyi_core::states::{
    maximally_mixed, random_bipartite, random_cq_ensemble, random_density, CQEnsemble,
    DensityMatrix, Seed,
};
use qrenyi_core::verification::well_conditioned_state;
use qrenyi_core::PolyakParams;

fn petz(n: usize, d: usize, a: f64, seed: u64) -> impl Objective {
    make_petz_augustin(
        random_cq_ensemble(n, d, Seed(seed)).unwrap(),
        Alpha::petz(a).unwrap(),
    )
    .unwrap()
}

fn without_time(records: &[IterationRecord]) -> Vec<IterationRecord> {
    records
        .iter()
        .map(|r| IterationRecord {
            elapsed_ms: 0.0,
            ..r.clone()
        })
        .collect()
}

#[test]
fn single_state_optimum_is_the_state() {
    let rho = well_conditioned_state(3, Seed(7)).unwrap();
    let e = CQEnsemble::new(vec![1.0], vec![rho.clone()]).unwrap();
    let obj = make_sandwiched_augustin(e, Alpha::sandwiched(2.0).unwrap()).unwrap();
    let params = PolyakParams {
        delta: 0.1,
        max_iters: 200,
        ..default_polyak(Quantity::SandwichedAugustin, 2.0)
    };
    let t = solve_polyak(&obj, &maximally_mixed(3).unwrap(), &params).unwrap();
    assert!(t.best_value.abs() < 1e-8, "{}", t.best_value);
    assert!(t.final_iterate.trace_distance(&rho).unwrap() < 1e-4);
}

#[test]
fn fixed_point_started_at_the_state_stays_there() {
    let rho = well_conditioned_state(4, Seed(3)).unwrap();
    let e = CQEnsemble::new(vec![1.0], vec![rho.clone()]).unwrap();
    let obj = make_petz_augustin(e, Alpha::petz(0.5).unwrap()).unwrap();
    let t = solve_fixed_point(&obj, &rho, 5).unwrap();
    for r in &t.records {
        assert!(r.f.abs() < 1e-12);
        if let Some(tr) = r.pre_normalization_trace {
            assert!((tr - 1.0).abs() < 1e-10, "{tr}");
        }
    }
    assert!(t.final_iterate.trace_distance(&rho).unwrap() < 1e-10);
}

#[test]
fn fixed_point_rejects_bipartite_objectives() {
    let obj = make_sandwiched_renyi_info(
        random_bipartite(2, 2, Seed(1)).unwrap(),
        Alpha::sandwiched(2.0).unwrap(),
    )
    .unwrap();
    assert!(solve_fixed_point(&obj, &maximally_mixed(2).unwrap(), 10).is_err());
}

#[test]
fn runs_are_deterministic_up_to_timing() {
    let obj = petz(4, 3, 0.5, 9);
    let z1 = maximally_mixed_start(&obj).unwrap();
    let p = default_polyak(Quantity::PetzAugustin, 0.5);
    let a = default_armijo(Quantity::PetzAugustin, 0.5);
    let (x, y) = (
        solve_polyak(&obj, &z1, &p).unwrap(),
        solve_polyak(&obj, &z1, &p).unwrap(),
    );
    assert_eq!(without_time(&x.records), without_time(&y.records));
    let (x, y) = (
        solve_armijo(&obj, &z1, &a).unwrap(),
        solve_armijo(&obj, &z1, &a).unwrap(),
    );
    assert_eq!(without_time(&x.records), without_time(&y.records));
}

#[test]
fn armijo_decreases_monotonically_and_counts_evaluations() {
    let obj = petz(4, 3, 2.0, 5);
    let params = qrenyi_core::ArmijoParams {
        max_iters: 40,
        ..default_armijo(Quantity::PetzAugustin, 2.0)
    };
    let t = solve_armijo(&obj, &maximally_mixed_start(&obj).unwrap(), &params).unwrap();
    for w in t.records.windows(2) {
        assert!(w[1].f <= w[0].f + 1e-15);
        // One accepted point costs one gradient and at least one value.
        assert_eq!(w[1].g_evals, w[0].g_evals + 1);
        assert!(w[1].f_evals > w[0].f_evals);
    }
    assert_eq!(t.records[0].f_evals, 1);
    assert_eq!(t.records[0].g_evals, 1);
}

#[test]
fn armijo_steps_satisfy_sufficient_decrease() {
    let obj = petz(3, 2, 0.5, 4);
    let params = qrenyi_core::ArmijoParams {
        max_iters: 20,
        ..default_armijo(Quantity::PetzAugustin, 0.5)
    };
    let mut z = maximally_mixed_start(&obj).unwrap();
    let t = solve_armijo(&obj, &z, &params).unwrap();
    // Replay: each accepted step is one of ᾱ rᵏ and passes the test.
    for w in t.records.windows(2) {
        let (here, next) = (&w[0], &w[1]);
        let eta = here.eta.expect("armijo records its step");
        let (f, g) = obj.value_and_grad(&z).unwrap();
        let trial = qrenyi_core::solvers::entropic_md_step(&z, &g, eta).unwrap();
        let ft = obj.value(&trial).unwrap();
        let slope = trace_inner(&g, &(trial.matrix() - z.matrix())).unwrap();
        assert!(ft <= f + params.tau * slope + 1e-14);
        assert!((ft - next.f).abs() < 1e-12);
        z = trial;
    }
}

#[test]
fn polyak_until_stops_at_target() {
    let obj = petz(4, 3, 0.5, 2);
    let z1 = maximally_mixed_start(&obj).unwrap();
    let p = default_polyak(Quantity::PetzAugustin, 0.5);
    let full = solve_polyak(&obj, &z1, &p).unwrap();
    let target = full.records[0].f - 0.5 * (full.records[0].f - full.best_value);
    let t = solve_polyak_until(&obj, &z1, &p, Some(target)).unwrap();
    assert_eq!(t.termination, Termination::TargetReached);
    assert!(t.records.last().unwrap().f <= target);
    assert!(t.records[..t.records.len() - 1]
        .iter()
        .all(|r| r.f > target));
    assert_eq!(
        t.iterations_to_reach(target),
        full.iterations_to_reach(target)
    );
}

#[test]
fn bregman_satisfies_pinsker() {
    for seed in 0..20u64 {
        let x = random_density(4, Seed(seed)).unwrap();
        let y = well_conditioned_state(4, Seed(seed + 100)).unwrap();
        let td = x.trace_distance(&y).unwrap();
        // D(x‖y) ≥ ½‖x − y‖₁² = 2 T(x, y)².
        assert!(bregman_vn(&x, &y).unwrap() >= 2.0 * td * td - 1e-12);
        assert!(bregman_vn(&y, &y).unwrap().abs() < 1e-12);
    }
}

fn assert_polyak_invariants(t: &qrenyi_core::SolveTrace, params: &PolyakParams, dim: usize) {
    let mut best = f64::INFINITY;
    for r in &t.records {
        best = best.min(r.f);
        assert_eq!(r.best_f, best);
        if let Some(d) = r.delta_t {
            assert!(d >= params.delta * (1.0 - 1e-12));
        }
        if let Some(eta) = r.eta {
            assert!(eta > 0.0 && eta.is_finite());
        }
    }
    let z: &DensityMatrix = &t.final_iterate;
    assert_eq!(z.dim(), dim);
    assert!(z.min_eigenvalue() > 0.0);
    assert!((z.eigenvalues().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(t.best_value, best);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn polyak_invariants_hold(
        seed in 0u64..1000,
        d in 2usize..4,
        n in 1usize..4,
        quantity in 0usize..2,
        alpha_ix in 0usize..2,
    ) {
        let a = [0.5, 2.0][alpha_ix];
        let e = random_cq_ensemble(n, d, Seed(seed)).unwrap();
        let (q, obj): (Quantity, Box<dyn Objective>) = if quantity == 0 {
            (Quantity::PetzAugustin, Box::new(make_petz_augustin(e, Alpha::petz(a).unwrap()).unwrap()))
        } else {
            (Quantity::SandwichedAugustin, Box::new(make_sandwiched_augustin(e, Alpha::sandwiched(a).unwrap()).unwrap()))
        };
        let params = PolyakParams { max_iters: 60, ..default_polyak(q, a) };
        let t = solve_polyak(obj.as_ref(), &maximally_mixed(d).unwrap(), &params).unwrap();
        assert_polyak_invariants(&t, &params, d);
    }

    #[test]
    fn md_step_preserves_density(seed in 0u64..1000, d in 1usize..5, eta in 1e-4f64..20.0) {
        let z = random_density(d, Seed(seed)).unwrap();
        let obj = petz(2, d, 0.5, seed + 1);
        let w = well_conditioned_state(d, Seed(seed + 2)).unwrap();
        let (_, g) = obj.value_and_grad(&w).unwrap();
        let next = qrenyi_core::solvers::entropic_md_step(&w, &g, eta).unwrap();
        prop_assert!((next.eigenvalues().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(next.min_eigenvalue() >= 0.0);
        prop_assert_eq!(z.dim(), d);
    }
}
