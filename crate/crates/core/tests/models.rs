use hublab::instance::{random_instance, random_instance_checked, CostKind, CostModel, Instance, RangeCheck};
use hublab::lp::{solve_lp, LpStatus};
use hublab::models::{
    build, build_1p_f_with, compute_bigm, compute_bigm_max, encode_solution, extract_solution, BigMMode, Formulation,
    ModelError, VarKey,
};
use hublab::oracle::{exact_1p, exact_rs, exact_sahlp};
use proptest::prelude::*;

const ALL_1P: [Formulation; 4] = [Formulation::F4, Formulation::F3, Formulation::F1P, Formulation::F1PD];

fn feasible(lp: &hublab::lp::LinearProgram, x: &[f64], tol: f64) -> bool {
    (0..lp.n_vars()).all(|j| x[j] >= lp.lower[j] - tol && x[j] <= lp.upper[j] + tol)
        && lp.constraints.iter().all(|r| r.violation(x) <= tol)
}

fn one_p(seed: u64, n: usize, h: usize, p: usize) -> Instance {
    random_instance(seed, n, n, h, p, 1, p, CostKind::Disaggregated).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oracle_optimum_encodes_to_a_feasible_point(seed in 0u64..100_000, n in 3usize..5, h in 4usize..6) {
        let inst = one_p(seed, n, h, 2);
        let opt = exact_1p(&inst).unwrap();
        for f in ALL_1P {
            let model = build(&inst, f).unwrap();
            let x = encode_solution(&model, &inst, &opt);
            prop_assert!(feasible(&model.lp, &x, 1e-9), "{:?}", f);
            let value = model.lp.objective_value(&x);
            prop_assert!((value - opt.objective).abs() <= 1e-9 * opt.objective.max(1.0), "{:?}: {} vs {}", f, value, opt.objective);
            let back = extract_solution(&model, &inst, &x).unwrap();
            prop_assert_eq!(&back.hubs, &opt.hubs);
            prop_assert_eq!(back.objective.to_bits(), opt.objective.to_bits());
        }
    }

    #[test]
    fn relaxations_never_exceed_the_optimum(seed in 0u64..100_000) {
        let inst = one_p(seed, 4, 5, 2);
        let opt = exact_1p(&inst).unwrap().objective;
        for f in ALL_1P {
            let lp = solve_lp(&build(&inst, f).unwrap().lp, None).unwrap();
            prop_assert_eq!(lp.status, LpStatus::Optimal);
            prop_assert!(lp.objective <= opt + 1e-6 * opt, "{:?}: {} > {}", f, lp.objective, opt);
        }
        let rs = inst.with_params(2, 2, 2, RangeCheck::Strict).unwrap();
        let opt = exact_rs(&rs).unwrap().objective;
        for f in [Formulation::F4, Formulation::F3] {
            let lp = solve_lp(&build(&rs, f).unwrap().lp, None).unwrap();
            prop_assert!(lp.objective <= opt + 1e-6 * opt);
        }
        let sa = random_instance(seed, 5, 5, 5, 2, 1, 1, CostKind::Disaggregated).unwrap();
        let opt = exact_sahlp(&sa).unwrap().objective;
        let lp = solve_lp(&build(&sa, Formulation::SahlpF3).unwrap().lp, None).unwrap();
        prop_assert!(lp.objective <= opt + 1e-6 * opt);
    }

    #[test]
    fn uniform_point_bounds_the_single_origin_relaxation(seed in 0u64..100_000, h in 4usize..7, p in 2usize..4) {
        let inst = one_p(seed, 3, h, p);
        let model = build(&inst, Formulation::F1P).unwrap();
        let bigm = compute_bigm(&inst, BigMMode::Full).unwrap();
        let u = 1.0 / h as f64;
        let mut x = vec![0.0; model.lp.n_vars()];
        for k in 0..h {
            x[model.vars.col(VarKey::Y(k))] = p as f64 * u;
        }
        for i in 0..3 {
            let mut pi = 0.0f64;
            for k in 0..h {
                x[model.vars.col(VarKey::X(i, k))] = u;
                let mut need = 0.0;
                for j in 0..3 {
                    let row: f64 = (0..h).map(|m| inst.c(i, j, k, m) * u).sum();
                    need += row + bigm.get(i, j, k) * (u - 1.0);
                }
                pi = pi.max(need);
            }
            x[model.vars.col(VarKey::Pi(i))] = pi;
            for j in 0..3 {
                for m in 0..h {
                    x[model.vars.col(VarKey::Z(i, j, m))] = u;
                }
            }
        }
        prop_assert!(feasible(&model.lp, &x, 1e-9));
        let lp = solve_lp(&model.lp, None).unwrap();
        prop_assert!(lp.objective <= model.lp.objective_value(&x) + 1e-9);
    }
}

#[test]
fn max_bigm_relaxation_is_zero_on_random_costs() {
    for seed in 0..20 {
        let inst = one_p(seed, 4, 5, 2);
        let model = build_1p_f_with(&inst, &compute_bigm_max(&inst, BigMMode::Full).unwrap()).unwrap();
        let lp = solve_lp(&model.lp, None).unwrap();
        assert!(lp.objective.abs() < 1e-6, "seed {seed}: {}", lp.objective);
    }
}

#[test]
fn max_bigm_relaxation_is_positive_on_constant_costs() {
    let (o, d, h, c) = (2, 2, 4, 10.0);
    let inst = Instance::new(o, d, h, 2, 1, 2, CostModel::General { tensor: vec![c; o * d * h * h] }, RangeCheck::Strict).unwrap();
    let model = build_1p_f_with(&inst, &compute_bigm_max(&inst, BigMMode::Full).unwrap()).unwrap();
    let lp = solve_lp(&model.lp, None).unwrap();
    let expect = (o * d) as f64 * c / h as f64;
    assert!((lp.objective - expect).abs() < 1e-9, "{} vs {expect}", lp.objective);
}

#[test]
fn model_preconditions() {
    let general = random_instance(3, 3, 3, 4, 2, 1, 2, CostKind::General).unwrap();
    assert_eq!(build(&general, Formulation::F1PD).unwrap_err(), ModelError::RequiresDisaggregatedCosts);
    let multi = random_instance(3, 3, 3, 4, 2, 2, 2, CostKind::Disaggregated).unwrap();
    assert_eq!(build(&multi, Formulation::F1P).unwrap_err(), ModelError::RequiresSingleOriginAllocation(2));
    let uneven = random_instance_checked(3, 3, 4, 4, 2, 1, 1, CostKind::Disaggregated, RangeCheck::Strict).unwrap();
    assert_eq!(build(&uneven, Formulation::SahlpF3).unwrap_err(), ModelError::RequiresIdenticalSets);
}

#[test]
fn lp_text_names_every_column() {
    let inst = one_p(1, 3, 4, 2);
    for f in ALL_1P {
        let model = build(&inst, f).unwrap();
        let text = model.to_lp_text();
        for name in model.vars.names() {
            assert!(text.contains(&name), "{f:?} is missing {name}");
        }
        assert!(text.starts_with("Minimize"), "{f:?}");
        assert!(text.trim_end().ends_with("End"));
    }
}

#[test]
fn rank_bigm_can_cut_off_the_optimum_of_a_general_tensor() {
    let rows = [[0.0, 1.0, 100.0], [50.0, 50.0, 50.0], [1500.0, 500.0, 500.0]];
    let tensor: Vec<f64> = rows.iter().flatten().copied().collect();
    let inst = Instance::new(1, 1, 3, 2, 1, 2, CostModel::General { tensor }, RangeCheck::Strict).unwrap();
    let opt = exact_1p(&inst).unwrap();
    assert_eq!((opt.hubs.clone(), opt.objective), (vec![0], 0.0));
    let model = build(&inst, Formulation::F1P).unwrap();
    assert!(!feasible(&model.lp, &encode_solution(&model, &inst, &opt), 1e-9));
    let f3 = build(&inst.with_params(2, 1, 2, RangeCheck::Strict).unwrap(), Formulation::F3).unwrap();
    assert!(feasible(&f3.lp, &encode_solution(&f3, &inst, &opt), 1e-9));
}
