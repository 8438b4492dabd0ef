//! Acceptance suite: one test per criterion, pinned at the tolerances
//! the release contract promises. Each test prints a PASS line so the
//! suite output doubles as a checklist.

use gamma_finite::algebra::rank;
use gamma_finite::app::{run_verify, RunConfig};
use gamma_finite::gamma::{
    build_tau_model, gamma_gk_weighted, gamma_jpss_weighted, op_a, op_k, verify_theorem, Instance,
};
use gamma_finite::group::{group_order, special_elements, GroupElement};
use gamma_finite::algebra::C64;
use gamma_finite::models::{
    component_function, epsilon_map, restrict_to_p, restriction_matrix, tilde_map,
};
use gamma_finite::spectra::{decompose, GGSpace};
use gamma_finite::DEFAULT_ORDER_CAP;

const THEOREM_CASES: [(u8, usize, usize); 3] = [(3, 2, 6), (5, 2, 40), (2, 3, 4)];

fn instance(q: u8, n: usize) -> Instance {
    Instance::build(q, n, 0, 1, DEFAULT_ORDER_CAP).unwrap()
}

/// Criterion 1: both gamma constructions agree to 1e-8 for every
/// cuspidal/generic pair at (q, n) in {(3,2), (5,2), (2,3)}, with the
/// expected number of pairs in each case.
#[test]
fn criterion_1_theorem_reproduction() {
    for (q, n, pairs) in THEOREM_CASES {
        let reports = verify_theorem(q, n, 0, 1e-8, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(reports.len(), pairs, "pair count at q={q} n={n}");
        for r in &reports {
            assert!(
                r.abs_diff < 1e-8,
                "q={q} n={n} pi={} tau={} diff={:e}",
                r.pi_id,
                r.tau_id,
                r.abs_diff
            );
        }
        println!("PASS criterion 1: q={q} n={n} ({pairs} pairs, max diff < 1e-8)");
    }
}

/// Criterion 2: the zeta-ratio definition is consistent — every basis
/// pair with a nonvanishing denominator yields the same gamma value.
#[test]
fn criterion_2_functional_equation_consistency() {
    for (q, n, _) in THEOREM_CASES {
        let reports = verify_theorem(q, n, 0, 1e-8, DEFAULT_ORDER_CAP).unwrap();
        for r in &reports {
            assert!(r.pairs_used > 0);
            assert!(
                r.jpss_spread < 1e-8,
                "q={q} n={n} pi={} tau={} spread={:e}",
                r.pi_id,
                r.tau_id,
                r.jpss_spread
            );
        }
        println!("PASS criterion 2: q={q} n={n} (ratio spread < 1e-8 on all pairs)");
    }
}

/// Criterion 3: the transposed intertwiner acts on the embedded τ-model
/// as multiplication by a single scalar, to 1e-8.
#[test]
fn criterion_3_scalar_operator() {
    for (q, n, _) in THEOREM_CASES {
        let reports = verify_theorem(q, n, 0, 1e-8, DEFAULT_ORDER_CAP).unwrap();
        for r in &reports {
            assert!(
                r.gk_deviation < 1e-8,
                "q={q} n={n} pi={} tau={} dev={:e}",
                r.pi_id,
                r.tau_id,
                r.gk_deviation
            );
        }
        println!("PASS criterion 3: q={q} n={n} (scalar deviation < 1e-8)");
    }
}

/// Criterion 4: the two identities the scalar comparison rests on hold
/// pointwise: K reproduces the flipped-model restriction, and pairing
/// K against the pulled-back τ-vector unwinds to the zeta ratio's
/// numerator with the central-character prefactor.
#[test]
fn criterion_4_proof_step_identities() {
    for (q, n) in [(3u8, 2usize), (2, 3)] {
        let inst = instance(q, n);
        let tw = &inst.tower;
        for pi in inst.cuspidal() {
            let k = op_k(tw, pi).unwrap();
            let at = op_a(tw, 1).transpose();
            // K(π)(W|_P) = ((W~)^ε)|_P
            for j in 0..pi.dim {
                let w = component_function(pi, j);
                let lhs = &k * &restrict_to_p(tw, &w).values;
                let img = epsilon_map(&tw.upper, &tilde_map(&tw.upper, &w));
                let rhs = restrict_to_p(tw, &img).values;
                assert!((lhs - rhs).norm() < 1e-9, "K identity q={q} n={n}");
            }
            // ⟨K f, AᵀW'⟩ = prefactor · Σ W~ · W'~
            for tau in &inst.taus {
                let pref = tau.omega_minus_one.powu((n - 1) as u32);
                for i in 0..pi.dim {
                    let w = component_function(pi, i);
                    let kf = &k * &restrict_to_p(tw, &w).values;
                    let wt = tilde_map(&tw.upper, &w);
                    for (j, wp) in tau.whittaker.iter().enumerate() {
                        let astar_w = &at * tau.embedded.column(j);
                        let lhs: C64 = kf.iter().zip(astar_w.iter()).map(|(x, y)| x * y).sum();
                        let wpt = tilde_map(&tw.lower, wp);
                        let rhs = pref * gamma_finite::gamma::zeta(tw, &wt, &wpt).unwrap();
                        assert!((lhs - rhs).norm() < 1e-9, "unwinding q={q} n={n}");
                    }
                }
            }
        }
        println!("PASS criterion 4: q={q} n={n} (both identities < 1e-9)");
    }
}

/// Criterion 5: structural invariants hold exactly (integer equality,
/// no floating point): group orders, coset counts, and the special
/// element relations.
#[test]
fn criterion_5_structural_invariants() {
    for (q, n) in [(3u8, 2usize), (5, 2), (7, 2), (2, 3), (3, 3)] {
        let order: u128 = (0..n)
            .map(|k| u128::from(q).pow(n as u32) - u128::from(q).pow(k as u32))
            .product();
        assert_eq!(group_order(n, q), order);
        let sp = special_elements(n, q);
        // s² = (-1)^{n-1} I
        let sign = if n % 2 == 0 { -1i64 } else { 1 };
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|r| (0..n).map(|c| if r == c { sign } else { 0 }).collect())
            .collect();
        let row_refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
        let sign_i = GroupElement::from_rows(&row_refs, q);
        assert_eq!(sp.s.mul(&sp.s), sign_i, "s^2 at n={n} q={q}");
        // s = w ε and s is ι-fixed
        assert_eq!(sp.w.mul(&sp.eps), sp.s);
        assert_eq!(sp.s.iota(), sp.s);
    }
    // coset counts: |U\G| = |G| / q^{n(n-1)/2}
    for (q, n) in [(3u8, 2usize), (2, 3)] {
        let inst = instance(q, n);
        let expected = group_order(n, q) / u128::from(q).pow((n * (n - 1) / 2) as u32);
        assert_eq!(inst.tower.upper.cosets.count() as u128, expected);
        // |U_n\P| = |U_{n-1}\G_{n-1}|
        let lower_cosets = group_order(n - 1, q)
            / u128::from(q).pow(((n - 1) * (n - 2) / 2) as u32);
        assert_eq!(inst.tower.kirillov_dim() as u128, lower_cosets);
    }
    println!("PASS criterion 5: structural invariants (exact)");
}

/// Criterion 6: restriction to the mirabolic subgroup is a linear
/// bijection exactly for the cuspidal components.
#[test]
fn criterion_6_cuspidal_restriction_bijective() {
    for (q, n, _) in THEOREM_CASES {
        let inst = instance(q, n);
        for c in &inst.components_upper {
            let m = restriction_matrix(&inst.tower, c);
            let r = rank(&m, 1e-10);
            if c.cuspidal {
                assert_eq!(r, c.dim, "cuspidal q={q} n={n} id={}", c.id);
            }
        }
        // at least one non-cuspidal component must fail bijectivity
        // whenever the inventory has one with dim > kirillov_dim
        let kp = inst.tower.kirillov_dim();
        for c in inst.components_upper.iter().filter(|c| !c.cuspidal) {
            if c.dim > kp {
                let m = restriction_matrix(&inst.tower, c);
                assert!(rank(&m, 1e-10) < c.dim);
            }
        }
        println!("PASS criterion 6: q={q} n={n} (cuspidal restrictions bijective)");
    }
}

/// Criterion 7: decomposition bookkeeping — induced-space dimensions
/// 16/96/21 and cuspidal counts 3/10/2 at the three theorem cases, and
/// component dimensions square-sum to the space dimension.
#[test]
fn criterion_7_decomposition_bookkeeping() {
    for (q, n, dim, cusp) in [(3u8, 2usize, 16usize, 3usize), (5, 2, 96, 10), (2, 3, 21, 2)] {
        let inst = instance(q, n);
        let gg = GGSpace::new(n, q, 1, DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(gg.dim(), dim, "space dim at q={q} n={n}");
        let total: usize = inst.components_upper.iter().map(|c| c.dim).sum();
        assert_eq!(total, dim, "dims sum at q={q} n={n}");
        assert_eq!(
            inst.cuspidal().count(),
            cusp,
            "cuspidal count at q={q} n={n}"
        );
        // decomposition must be reproducible from a fresh build
        let again = decompose(&gg, 0).unwrap();
        let dims: Vec<usize> = inst.components_upper.iter().map(|c| c.dim).collect();
        let dims2: Vec<usize> = again.iter().map(|c| c.dim).collect();
        assert_eq!(dims, dims2);
        println!("PASS criterion 7: q={q} n={n} (dim {dim}, {cusp} cuspidal)");
    }
}

/// Criterion 8: rescaling the counting measure by a common factor
/// changes both zeta integrals but cancels in each gamma value, to
/// 1e-10.
#[test]
fn criterion_8_measure_normalization() {
    let inst = instance(3, 2);
    let tw = &inst.tower;
    for pi in inst.cuspidal() {
        for c in &inst.components_lower {
            let tau = build_tau_model(tw, c).unwrap();
            for weight in [1.0_f64, 3.7, 0.25] {
                let gk = gamma_gk_weighted(tw, pi, &tau, 1e-8, weight).unwrap();
                let jp = gamma_jpss_weighted(tw, pi, &tau, 1e-8, weight).unwrap();
                let gk1 = gamma_gk_weighted(tw, pi, &tau, 1e-8, 1.0).unwrap();
                let jp1 = gamma_jpss_weighted(tw, pi, &tau, 1e-8, 1.0).unwrap();
                assert!(
                    (gk.value - gk1.value).norm() < 1e-10,
                    "gk weight={weight}"
                );
                assert!(
                    (jp.value - jp1.value).norm() < 1e-10,
                    "ratio weight={weight}"
                );
            }
        }
    }
    println!("PASS criterion 8: measure normalization cancels (< 1e-10)");
}

/// Criterion 9: the JSON report for a fixed (q, n, seed) is
/// byte-identical across runs, including a run served from the cache.
#[test]
fn criterion_9_report_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..RunConfig::new(3, 2)
    };
    let a = run_verify(&cfg).unwrap(); // cold: computes and fills cache
    let b = run_verify(&cfg).unwrap(); // warm: served from cache
    let c = run_verify(&RunConfig::new(3, 2)).unwrap(); // no cache at all
    assert_eq!(a.report, b.report);
    assert_eq!(a.report, c.report);
    assert!(!a.report.is_empty());
    println!("PASS criterion 9: reports byte-identical (cold, cached, uncached)");
}
