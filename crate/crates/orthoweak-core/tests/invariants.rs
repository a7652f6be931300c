//! Randomized properties of the selection algebra, the no-divergence
//! discriminant, and the two probe backends.

use std::f64::consts::TAU;

use orthoweak_core::exact::{denominator_discriminant, expectation_closed_form};
use orthoweak_core::model::{make_selection, weak_value, ObservableA};
use orthoweak_core::probe::{derivative_integrals, gaussian_probe, overlaps, PointerOperator};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn selection_coefficients_sum_to_alpha(
        x in 0.0f64..=1.0,
        theta in 0.0f64..TAU,
        alpha in 0.0f64..=1.0,
    ) {
        let sel = make_selection(x, theta, alpha).unwrap();
        let sum = sel.k1 + sel.k2;
        prop_assert!((sum.re - alpha).abs() <= 4e-16);
        prop_assert!(sum.im.abs() <= 4e-16);
        // |k1 + k2|^2 expanded; catches sign slips in the cross term
        let cross = (sel.k1.conj() * sel.k2).re;
        let expanded = sel.k1.norm_sqr() + sel.k2.norm_sqr() + 2.0 * cross;
        prop_assert!((expanded - alpha * alpha).abs() <= 4e-15);
    }

    #[test]
    fn weak_value_hits_the_eigenvalues_at_the_corners(
        theta in 0.0f64..TAU,
        alpha in 0.01f64..=1.0,
        a1 in -2.0f64..2.0,
        gap in 0.2f64..3.0,
    ) {
        let obs = ObservableA::new(a1, a1 - gap).unwrap();
        let at_one = weak_value(&make_selection(1.0, theta, alpha).unwrap(), &obs).unwrap();
        prop_assert!((at_one.re - a1).abs() <= 1e-12 && at_one.im.abs() <= 1e-12);
        let at_zero = weak_value(&make_selection(0.0, theta, alpha).unwrap(), &obs).unwrap();
        prop_assert!((at_zero.re - (a1 - gap)).abs() <= 1e-12 && at_zero.im.abs() <= 1e-12);
    }

    #[test]
    fn discriminant_is_negative_and_below_the_overlap_bound(
        x in 0.05f64..0.95,
        theta in 0.0f64..TAU,
        g in 0.01f64..2.0,
        sigma in 0.5f64..2.0,
        kick in -1.0f64..1.0,
    ) {
        let obs = ObservableA::new(1.0, -1.0).unwrap();
        let probe = gaussian_probe(0.0, sigma, kick).unwrap();
        let ov = overlaps(&probe, g, &obs, &PointerOperator::Position).unwrap();
        let y = x * x / (1.0 - x * x);
        let disc = denominator_discriminant(&ov, y, theta);
        prop_assert!(disc < 0.0, "discriminant {disc} at y={y} theta={theta}");
        let bound = -4.0 * y * (y + 1.0) * (y + 1.0) * (1.0 - ov.y12.norm_sqr());
        prop_assert!(
            disc <= bound + 1e-10 * (1.0 + bound.abs()),
            "discriminant {disc} above bound {bound}"
        );
    }

    #[test]
    fn gaussian_and_grid_backends_agree(
        sigma in 0.5f64..2.0,
        mean in -1.0f64..1.0,
        kick in -1.0f64..1.0,
        u in 0.05f64..1.0,
    ) {
        let obs = ObservableA::new(1.0, -1.0).unwrap();
        let g = u * sigma / 2.0; // |g (a1 - a2)| <= sigma
        let analytic = gaussian_probe(mean, sigma, kick).unwrap();
        let (lo, hi, n) = analytic.default_grid(g, &obs);
        let grid = analytic.rasterize(lo, hi, n).unwrap();
        for op in [PointerOperator::Position, PointerOperator::Momentum] {
            let a = overlaps(&analytic, g, &obs, &op).unwrap();
            let b = overlaps(&grid, g, &obs, &op).unwrap();
            prop_assert!((a.y12 - b.y12).norm() <= 1e-10);
            prop_assert!((a.w12 - b.w12).norm() <= 1e-10 * (1.0 + a.w12.norm()));
            prop_assert!((a.w11 - b.w11).abs() <= 1e-10 * (1.0 + a.w11.abs()));
            prop_assert!((a.w22 - b.w22).abs() <= 1e-10 * (1.0 + a.w22.abs()));
        }
    }

    // Centered Gaussians only: a momentum kick k0 inflates I_1 by k0^2 and
    // can lift the first term above the zeroth within |g (a1 - a2)| <= sigma.
    #[test]
    fn overlap_series_terms_alternate_and_shrink(
        sigma in 0.5f64..2.0,
        u in 0.05f64..1.0,
    ) {
        let g = u * sigma / 2.0;
        let probe = gaussian_probe(0.0, sigma, 0.0).unwrap();
        let table = derivative_integrals(&probe, 10).unwrap();
        // eigenvalue gap fixed at 2, so the expansion variable is 2g
        let x2 = g * 2.0 * g * 2.0;
        let mut factor = 1.0;
        let mut prev = f64::INFINITY;
        for n in 0..=10usize {
            let term = (factor * table.i(n)).abs();
            prop_assert!(term < prev, "term {n} grew: {term} >= {prev}");
            prev = term;
            let m = (2 * n) as f64;
            factor *= x2 / ((m + 1.0) * (m + 2.0));
        }
    }
}

#[test]
fn ten_thousand_draws_never_break_positivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let probe = |sigma: f64, kick: f64| gaussian_probe(0.0, sigma, kick).unwrap();
    for _ in 0..10_000 {
        let x = rng.gen_range(0.02..0.98);
        let theta = rng.gen_range(0.0..TAU);
        let g = rng.gen_range(0.01..2.0);
        let sigma = rng.gen_range(0.5..2.0);
        let kick = rng.gen_range(-1.0..1.0);
        let obs = ObservableA::new(1.0, -1.0).unwrap();
        let ov = overlaps(&probe(sigma, kick), g, &obs, &PointerOperator::Position).unwrap();

        let y = x * x / (1.0 - x * x);
        let disc = denominator_discriminant(&ov, y, theta);
        assert!(disc < 0.0, "discriminant {disc} at x={x} theta={theta} g={g} sigma={sigma}");

        // denominator strictly positive on valid non-degenerate input
        let alpha = rng.gen_range(0.0..1.0);
        let sel = make_selection(x, theta, alpha).unwrap();
        let res = expectation_closed_form(&sel, &ov).unwrap();
        assert!(res.postselection_probability > 0.0);
        assert!(res.expectation.is_finite());
    }
}
