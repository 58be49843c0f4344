//! Property-based invariants: the regime/shift maps are mutually inverse,
//! directional regime parameters are monotone in the eigenvalue, observer
//! boundaries are complement-symmetric, and the deviation tensor is
//! trace-free with a vanishing fraction exactly on proportional masses.

use obsgeom::directional::{deviation_tensor, directional_alpha};
use obsgeom::expfam::FisherMatrix;
use obsgeom::hypergraph::{boundary, Hypergraph, Observer};
use obsgeom::regime::{alpha_of_c, beta_of_alpha};
use obsgeom::spectral::Matrix;
use proptest::prelude::*;

fn symmetric_from(entries: &[f64], d: usize, scale: f64) -> Matrix {
    let mut m = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            m.set(i, j, scale * 0.5 * (entries[i * d + j] + entries[j * d + i]));
        }
    }
    m
}

/// A strictly diagonally dominant symmetric matrix (hence positive
/// definite) paired with an arbitrary symmetric mass tensor.
fn metric_and_mass() -> impl Strategy<Value = (Matrix, Matrix)> {
    (2usize..=6)
        .prop_flat_map(|d| {
            (
                Just(d),
                prop::collection::vec(-1.0..1.0f64, d * d),
                prop::collection::vec(-2.0..2.0f64, d * d),
            )
        })
        .prop_map(|(d, fe, me)| {
            let mut f = symmetric_from(&fe, d, 1.0);
            for i in 0..d {
                f.set(i, i, f.get(i, i) + 1.5 + d as f64);
            }
            (f, symmetric_from(&me, d, 1.0))
        })
}

fn host_and_interior() -> impl Strategy<Value = (Hypergraph, Vec<usize>)> {
    (2usize..8)
        .prop_flat_map(|n| {
            let pair = (0..n, 0..n).prop_filter_map("needs two distinct nodes", |(a, b)| {
                match a.cmp(&b) {
                    std::cmp::Ordering::Less => Some(vec![a, b]),
                    std::cmp::Ordering::Greater => Some(vec![b, a]),
                    std::cmp::Ordering::Equal => None,
                }
            });
            (
                Just(n),
                prop::collection::btree_set(pair, 0..=n * (n - 1) / 2),
                prop::collection::vec(0..n, 0..=n),
            )
        })
        .prop_map(|(n, edges, interior)| {
            let host = Hypergraph::new(n, edges.into_iter().collect())
                .expect("distinct valid pairs");
            (host, interior)
        })
}

proptest! {
    #[test]
    fn regime_of_shift_of_regime_is_identity(alpha in 0.0..0.99f64) {
        let shift = beta_of_alpha(alpha).unwrap();
        prop_assert!(shift >= 0.0);
        prop_assert!((alpha_of_c(shift) - alpha).abs() <= 1e-12);
    }

    #[test]
    fn shift_of_regime_of_shift_is_identity(c in 0.0..1e4f64) {
        let alpha = alpha_of_c(c);
        prop_assert!((0.0..1.0).contains(&alpha));
        let back = beta_of_alpha(alpha).unwrap();
        prop_assert!((back - c).abs() <= 1e-8 * (1.0 + c));
    }

    #[test]
    fn directional_alpha_is_monotone_in_the_eigenvalue(
        lo in 1e-3..10.0f64,
        gap in 1e-4..10.0f64,
        beta in 1e-3..100.0f64,
    ) {
        let below = directional_alpha(lo, beta).unwrap();
        let above = directional_alpha(lo + gap, beta).unwrap();
        prop_assert!(above > below);
        prop_assert!(below > 0.0 && above < 1.0);
    }

    #[test]
    fn observer_boundary_is_complement_symmetric(
        (host, interior) in host_and_interior()
    ) {
        let o = Observer::new(&host, interior).unwrap();
        prop_assert_eq!(boundary(&o), boundary(&o.complement()));
    }

    #[test]
    fn deviation_tensor_is_trace_free((f, m) in metric_and_mass()) {
        let fisher = FisherMatrix::new(f).unwrap();
        let (delta, report) = deviation_tensor(&fisher, &m, 1.0).unwrap();
        let trace: f64 = (0..delta.dim()).map(|i| delta.get(i, i)).sum();
        prop_assert!(trace.abs() <= 1e-10, "trace {trace:.3e}");
        let eig_sum: f64 = report.deviation_eigs.iter().sum();
        prop_assert!(eig_sum.abs() <= 1e-10, "eig sum {eig_sum:.3e}");
    }

    #[test]
    fn proportional_mass_has_vanishing_fraction(
        (f, _) in metric_and_mass(),
        scale in 0.1..5.0f64,
    ) {
        let d = f.dim();
        let mut mass = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                mass.set(i, j, scale * f.get(i, j));
            }
        }
        let fisher = FisherMatrix::new(f).unwrap();
        let (_, report) = deviation_tensor(&fisher, &mass, 1.0).unwrap();
        prop_assert!(
            report.deviation_fraction <= 1e-12,
            "fraction {:.3e}",
            report.deviation_fraction
        );
    }
}
