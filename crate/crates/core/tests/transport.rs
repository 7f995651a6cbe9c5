use hublab::lp::{solve_lp, LpStatus};
use hublab::transport::{primal_lp, solve_transport, solve_transport_lp, TransportError, TransportInstance};
use proptest::prelude::*;

/// Masses on a 1/8 grid with some exact zeros, demands scaled to the supply total.
fn instance(rows: usize, cols: usize) -> impl Strategy<Value = TransportInstance> {
    (
        prop::collection::vec(prop_oneof![Just(0u32), 1u32..9], rows),
        prop::collection::vec(prop_oneof![Just(0u32), 1u32..9], cols),
        prop::collection::vec(prop::collection::vec(0.0f64..100.0, cols), rows),
    )
        .prop_filter("needs mass", |(s, d, _)| s.iter().sum::<u32>() > 0 && d.iter().sum::<u32>() > 0)
        .prop_map(|(s, d, costs)| {
            let st: u32 = s.iter().sum();
            let dt: u32 = d.iter().sum();
            let supplies: Vec<f64> = s.iter().map(|&v| v as f64 / st as f64).collect();
            let demands: Vec<f64> = d.iter().map(|&v| v as f64 / dt as f64).collect();
            TransportInstance { supplies, demands, costs }
        })
}

/// Two supply rows: ship from row 0 to the columns where it is relatively cheapest.
fn two_row_optimum(tp: &TransportInstance) -> f64 {
    let mut order: Vec<usize> = (0..tp.demands.len()).collect();
    order.sort_by(|&a, &b| (tp.costs[0][a] - tp.costs[1][a]).total_cmp(&(tp.costs[0][b] - tp.costs[1][b])));
    let mut left = tp.supplies[0];
    let mut total = 0.0;
    for m in order {
        let send = left.min(tp.demands[m]);
        left -= send;
        total += send * tp.costs[0][m] + (tp.demands[m] - send) * tp.costs[1][m];
    }
    total
}

fn check_prices(tp: &TransportInstance, e: &[f64], f: &[f64], tol: f64) -> Result<(), TestCaseError> {
    prop_assert_eq!(e.len(), tp.supplies.len());
    prop_assert_eq!(f.len(), tp.demands.len());
    for (k, row) in tp.costs.iter().enumerate() {
        for (m, &c) in row.iter().enumerate() {
            prop_assert!(e[k] + f[m] <= c + tol, "({}, {}): {} + {} > {}", k, m, e[k], f[m], c);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_rows_match_the_greedy_optimum(tp in (1usize..8).prop_flat_map(|c| instance(2, c))) {
        let r = solve_transport(&tp).unwrap();
        let want = two_row_optimum(&tp);
        prop_assert!((r.objective - want).abs() <= 1e-8, "{} vs {}", r.objective, want);
    }

    #[test]
    fn prices_are_feasible_on_every_cell(tp in (1usize..10, 1usize..10).prop_flat_map(|(a, b)| instance(a, b))) {
        let r = solve_transport(&tp).unwrap();
        check_prices(&tp, &r.e, &r.f, 1e-9)?;
        let dual: f64 = r.e.iter().zip(&tp.supplies).map(|(a, b)| a * b).sum::<f64>()
            + r.f.iter().zip(&tp.demands).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((dual - r.objective).abs() <= 1e-9);
        for (k, row) in r.flow.iter().enumerate() {
            let out: f64 = row.iter().sum();
            prop_assert!((out - tp.supplies[k]).abs() <= 1e-9);
            prop_assert!(row.iter().all(|&v| v >= -1e-12));
        }
    }

    #[test]
    fn both_backends_match_the_primal_lp(tp in (1usize..7, 1usize..7).prop_flat_map(|(a, b)| instance(a, b))) {
        let primal = solve_lp(&primal_lp(&tp), None).unwrap();
        prop_assert_eq!(primal.status, LpStatus::Optimal);
        let ssp = solve_transport(&tp).unwrap();
        let lp = solve_transport_lp(&tp).unwrap();
        prop_assert!((ssp.objective - primal.objective).abs() <= 1e-8);
        prop_assert!((lp.objective - primal.objective).abs() <= 1e-8);
        check_prices(&tp, &lp.e, &lp.f, 1e-8)?;
    }
}

#[test]
fn zero_mass_rows_and_columns_get_prices() {
    let tp = TransportInstance {
        supplies: vec![0.0, 0.6, 0.0, 0.4],
        demands: vec![0.0, 1.0, 0.0],
        costs: vec![vec![0.0, 9.0, 1.0], vec![2.0, 5.0, 3.0], vec![0.5, 0.1, 7.0], vec![1.0, 6.0, 0.0]],
    };
    for r in [solve_transport(&tp).unwrap(), solve_transport_lp(&tp).unwrap()] {
        assert!((r.objective - 5.4).abs() < 1e-9, "{}", r.objective);
        for k in 0..4 {
            for m in 0..3 {
                assert!(r.e[k] + r.f[m] <= tp.costs[k][m] + 1e-9, "({k}, {m}) in {r:?}");
            }
        }
    }
}

#[test]
fn mass_errors() {
    let tp = TransportInstance {
        supplies: vec![0.5, 0.5],
        demands: vec![0.7],
        costs: vec![vec![1.0], vec![2.0]],
    };
    assert!(matches!(solve_transport(&tp), Err(TransportError::Unbalanced { .. })));
    let tp = TransportInstance {
        supplies: vec![1.0],
        demands: vec![1.0, 0.0],
        costs: vec![vec![1.0]],
    };
    assert_eq!(solve_transport(&tp).unwrap_err(), TransportError::Shape);
}
