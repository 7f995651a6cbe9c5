use hublab::lp::{solve_lp, LinearProgram, LpStatus, Sense, Simplex};
use proptest::prelude::*;

/// Boxed three-variable program with a few inequality rows.
fn program() -> impl Strategy<Value = LinearProgram> {
    (
        prop::collection::vec(-10i32..10, 3),
        prop::collection::vec(1i32..6, 3),
        prop::collection::vec((prop::collection::vec(-5i32..6, 3), any::<bool>(), -5i32..15), 0..4),
    )
        .prop_map(|(cost, ub, rows)| {
            let mut lp = LinearProgram::new();
            for j in 0..3 {
                lp.add_var(cost[j] as f64, 0.0, ub[j] as f64);
            }
            for (a, ge, b) in rows {
                let coeffs: Vec<(usize, f64)> = a.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, &v)| (j, v as f64)).collect();
                if coeffs.is_empty() {
                    continue;
                }
                lp.add_constraint(coeffs, if ge { Sense::Ge } else { Sense::Le }, b as f64);
            }
            lp
        })
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for r in 0..3 {
        m[r][..3].copy_from_slice(&a[r]);
        m[r][3] = b[r];
    }
    for c in 0..3 {
        let p = (c..3).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < 1e-9 {
            return None;
        }
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for t in c..4 {
                    m[r][t] -= f * m[c][t];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Minimum over all vertices, or `None` when no vertex is feasible.
fn vertex_minimum(lp: &LinearProgram) -> Option<f64> {
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        planes.push((e, lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    for row in &lp.constraints {
        let mut a = [0.0; 3];
        for &(j, v) in &row.coeffs {
            a[j] = v;
        }
        planes.push((a, row.rhs));
    }
    let feasible = |x: &[f64; 3]| {
        (0..3).all(|j| x[j] >= lp.lower[j] - 1e-9 && x[j] <= lp.upper[j] + 1e-9)
            && lp.constraints.iter().all(|r| r.violation(x) <= 1e-9)
    };
    let mut best: Option<f64> = None;
    let n = planes.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let Some(x) = solve3([planes[a].0, planes[b].0, planes[c].0], [planes[a].1, planes[b].1, planes[c].1]) else {
                    continue;
                };
                if feasible(&x) {
                    let v = lp.objective_value(&x);
                    best = Some(best.map_or(v, |w: f64| w.min(v)));
                }
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn simplex_matches_vertex_enumeration(lp in program()) {
        let res = solve_lp(&lp, None).unwrap();
        match vertex_minimum(&lp) {
            Some(v) => {
                prop_assert_eq!(res.status, LpStatus::Optimal);
                prop_assert!((res.objective - v).abs() <= 1e-7 * (1.0 + v.abs()), "{} vs {}", res.objective, v);
                prop_assert!((res.dual_objective(&lp) - res.objective).abs() <= 1e-7 * (1.0 + v.abs()));
                for (i, row) in lp.constraints.iter().enumerate() {
                    prop_assert!(row.violation(&res.x) <= 1e-7);
                    match row.sense {
                        Sense::Ge => prop_assert!(res.duals[i] >= -1e-9),
                        Sense::Le => prop_assert!(res.duals[i] <= 1e-9),
                        Sense::Eq => {}
                    }
                }
            }
            None => prop_assert_eq!(res.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn added_row_never_lowers_the_bound(lp in program(), a in prop::collection::vec(-3i32..4, 3), b in -2i32..6) {
        let mut s = Simplex::new(&lp, Default::default()).unwrap();
        let r0 = s.solve().unwrap();
        prop_assume!(r0.status == LpStatus::Optimal);
        let coeffs: Vec<(usize, f64)> = (0..3).map(|j| (j, a[j] as f64)).collect();
        s.add_row(&coeffs, Sense::Ge, b as f64).unwrap();
        let r1 = s.solve().unwrap();
        let mut full = lp.clone();
        full.add_constraint(coeffs, Sense::Ge, b as f64);
        let cold = solve_lp(&full, None).unwrap();
        prop_assert_eq!(r1.status, cold.status);
        if r1.status == LpStatus::Optimal {
            prop_assert!(r1.objective >= r0.objective - 1e-9);
            prop_assert!((r1.objective - cold.objective).abs() <= 1e-7 * (1.0 + cold.objective.abs()));
        }
    }

    #[test]
    fn repeated_solves_are_bit_identical(lp in program()) {
        let a = solve_lp(&lp, None).unwrap();
        let b = solve_lp(&lp, None).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn warm_basis_reaches_the_same_optimum_quickly() {
    let mut lp = LinearProgram::new();
    let n = 30;
    for j in 0..n {
        lp.add_var(((j * 7) % 11) as f64 - 3.0, 0.0, 1.0 + (j % 3) as f64);
    }
    for i in 0..20 {
        let coeffs = (0..n).filter(|j| (i + j) % 4 != 0).map(|j| (j, 1.0 + ((i * j) % 5) as f64)).collect();
        lp.add_constraint(coeffs, if i % 2 == 0 { Sense::Le } else { Sense::Ge }, if i % 2 == 0 { 40.0 } else { 5.0 } + i as f64);
    }
    let cold = solve_lp(&lp, None).unwrap();
    assert_eq!(cold.status, LpStatus::Optimal);
    assert!((cold.objective + 28.5).abs() < 1e-9, "{}", cold.objective);
    let warm = solve_lp(&lp, Some(&cold.basis)).unwrap();
    assert_eq!(warm.status, LpStatus::Optimal);
    assert!((warm.objective - cold.objective).abs() < 1e-9);
    assert!(warm.iterations <= 1, "{} iterations from an optimal basis", warm.iterations);
}
