use epnlab::charpoly::ep_conditions;
use epnlab::ep_finder::{find_ep, residuals, Policy, CERT_TOL};
use epnlab::golden::{B_EP5_TEXT, TABLE};
use epnlab::jordan::{ep_order, jordan_chain, RANK_TOL};
use epnlab::model::build_hamiltonian;
use epnlab::CouplingVector;
use proptest::prelude::*;

#[test]
fn monotone_solutions_match_three_decimal_table() {
    for (n, row) in TABLE {
        let sols = find_ep(n, Policy::Monotone).unwrap();
        assert_eq!(sols.len(), 1, "n={n}");
        let got = sols[0].couplings.values();
        for (k, (&g, &w)) in got.iter().zip(row).enumerate() {
            if n == 5 && k == 1 {
                assert!((g - B_EP5_TEXT).abs() < 1e-8, "{g}");
                continue;
            }
            assert!((g - w).abs() <= 5e-4, "n={n} coupling {k}: {g} vs {w}");
        }
        assert!(sols[0].max_residual() <= CERT_TOL);
    }
}

#[test]
fn all_policy_contains_monotone_solution() {
    for n in 2..=6 {
        let mono = find_ep(n, Policy::Monotone).unwrap();
        let all = find_ep(n, Policy::All).unwrap();
        assert!(all.len() >= mono.len());
        for m in &mono {
            assert!(all.iter().any(|s| s.couplings == m.couplings), "n={n}");
        }
    }
}

#[test]
fn four_site_has_two_sign_orbits() {
    let all = find_ep(4, Policy::All).unwrap();
    let mut vals: Vec<Vec<f64>> = all.iter().map(|s| s.couplings.values().to_vec()).collect();
    vals.sort_by(|a, b| a[0].total_cmp(&b[0]));
    assert_eq!(vals.len(), 2);
    assert!((vals[0][0] + 0.3715069740000755).abs() < 1e-10);
    assert!((vals[0][1] - 1.6917395095786192).abs() < 1e-10);
    assert!((vals[1][0] - 1.6837715645655842).abs() < 1e-10);
    assert!((vals[1][1] - 0.40609520849225084).abs() < 1e-10);
}

#[test]
fn certified_solutions_carry_full_jordan_chain() {
    for n in 2..=6 {
        for sol in find_ep(n, Policy::All).unwrap() {
            let h = build_hamiltonian(&sol.couplings);
            let t = jordan_chain(&h).unwrap();
            assert!(t.similarity_residual < 1e-12, "n={n}: {:e}", t.similarity_residual);
            assert_eq!(ep_order(&h, RANK_TOL).unwrap(), n, "n={n} {:?}", sol.couplings.values());
        }
    }
}

#[test]
fn six_site_order_depends_on_coupling_precision() {
    let printed = build_hamiltonian(&CouplingVector::new(6, TABLE[4].1.to_vec()).unwrap());
    assert_eq!(ep_order(&printed, 1e-2).unwrap(), 6);
    assert_eq!(ep_order(&printed, RANK_TOL).unwrap(), 1);
}

#[test]
fn eliminant_text_present_for_two_couplings() {
    let s = &find_ep(4, Policy::Monotone).unwrap()[0];
    assert_eq!(s.eliminant_text().as_deref(), Some("B^8-8*B^6+24*B^4-28*B^2+4"));
    let j = s.to_json();
    let keys: Vec<&String> = j.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["couplings", "eliminant_text", "n", "residuals"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The conditions are invariant under the global sign flip of the couplings.
    #[test]
    fn conditions_even_under_sign_flip(n in 2usize..=8, raw in prop::collection::vec(-2.0f64..2.0, 4)) {
        let x = &raw[..n / 2];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let conds = ep_conditions(n).unwrap();
        let a = residuals(&conds, x);
        let b = residuals(&conds, &neg);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }
}
