use proptest::prelude::*;

use tickvar_core::counting::{distribution, enumerate_paths};
use tickvar_core::grid::{
    self, build_grid, estimate_params, grid_variation, min_shift, pair_increment, SegmentGrid,
    SegmentStats,
};
use tickvar_core::heavy_tails::{heavy_cdf, rfr_shift, solve_constants, tail_ratio, transform};
use tickvar_core::normal_cdf;
use tickvar_core::shifted::{
    admissible_range, moments, p_leq_zero, p_leq_zero_from_moments, shift_frame,
};
use tickvar_core::variation::{
    is_monotone, jordan_decompose, total_variation, variation_summary, PriceSeries,
};

fn price_series() -> impl Strategy<Value = PriceSeries> {
    prop::collection::vec(0.0f64..1e6, 2..500)
        .prop_map(|p| PriceSeries::from_prices(p).expect("finite prices"))
}

fn segment() -> impl Strategy<Value = SegmentStats> {
    (-1e3f64..1e3, 0.0f64..50.0).prop_map(|(inf, width)| SegmentStats::new(0, inf + width, inf))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jordan_identities_hold(series in price_series()) {
        let s = variation_summary(&series).unwrap();
        let scale = s.total.max(1.0);
        prop_assert!((s.sigma_plus - s.sigma_minus - s.difference).abs() / scale < 1e-9);
        prop_assert!((s.sigma_plus + s.sigma_minus - s.total).abs() / scale < 1e-9);
        let hyperbola = (s.total * s.total - s.difference * s.difference) / 4.0;
        prop_assert!((s.hyperbola_product() - hyperbola).abs() / (scale * scale) < 1e-9);
        prop_assert!(s.sigma_plus >= 0.0 && s.sigma_minus >= 0.0);
    }

    #[test]
    fn jordan_parts_are_monotone(series in price_series()) {
        let j = jordan_decompose(&series).unwrap();
        let scale = total_variation(&series).unwrap().total().max(1.0);
        for w in j.f_plus.windows(2).chain(j.f_minus.windows(2)) {
            prop_assert!(w[1] - w[0] >= -1e-12 * scale);
        }
        for ((p, m), f) in j.f_plus.iter().zip(&j.f_minus).zip(series.prices()) {
            prop_assert!((p - m - f).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn variation_bounds_endpoint_difference(series in price_series()) {
        let v = total_variation(&series).unwrap();
        prop_assert_eq!(v.cumulative[0], 0.0);
        prop_assert!(v.cumulative.windows(2).all(|w| w[1] >= w[0]));
        let p = series.prices();
        let d = (p[p.len() - 1] - p[0]).abs();
        prop_assert!(v.total() >= d - 1e-9 * v.total().max(1.0));
        if is_monotone(&series) {
            prop_assert!((v.total() - d).abs() <= 1e-9 * v.total().max(1.0));
        }
    }

    #[test]
    fn non_monotone_series_has_excess_variation(
        mut prices in prop::collection::vec(0.0f64..100.0, 3..50),
        bump in 1.0f64..10.0,
    ) {
        // force one peak strictly inside the series
        let mid = prices.len() / 2;
        prices[mid] = prices.iter().cloned().fold(f64::MIN, f64::max) + bump;
        let series = PriceSeries::from_prices(prices).unwrap();
        prop_assert!(!is_monotone(&series));
        let s = variation_summary(&series).unwrap();
        prop_assert!(s.total > s.difference.abs() + 1e-9);
    }

    #[test]
    fn pair_increment_forms_agree(a in segment(), b in segment()) {
        let max_min = pair_increment(&a, &b);
        let half_sum = (a.oscillation() + b.oscillation()
            + (a.sup - b.sup).abs() + (a.inf - b.inf).abs()) / 2.0;
        prop_assert!((max_min - half_sum).abs() < 1e-12 * max_min.max(1.0));
        prop_assert!(max_min <= a.oscillation() + b.oscillation() + min_shift(&a, &b) + 1e-12);
        prop_assert!(min_shift(&a, &b) >= 0.0);
    }

    #[test]
    fn grid_variation_dominates_coarse_partition(series in price_series(), count in 2usize..40) {
        let g = build_grid(&series, count).unwrap();
        let closes: Vec<f64> = g.segments().iter().map(|s| s.close).collect();
        let coarse: f64 = closes.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        prop_assert!(grid_variation(&g).unwrap() >= coarse - 1e-9 * coarse.max(1.0));
    }

    #[test]
    fn shift_terms_are_ordered(series in price_series(), count in 2usize..40) {
        let g = build_grid(&series, count).unwrap();
        if let Ok(p) = estimate_params(&g) {
            prop_assert!(p.alpha2 >= 0.0);
            prop_assert!(p.alpha2_signed.abs() <= p.alpha2 + 1e-12);
            prop_assert!(p.rho_bar > 0.0 && p.rho_bar <= 1.0);
            prop_assert!(p.omega > 0.0);
            // residual of the rewritten form is 2(ω̄ − ω_0)
            let residual = grid_variation(&g).unwrap() - p.reconstruction();
            let expected = 2.0 * (p.omega - g.segments()[0].oscillation());
            prop_assert!((residual - expected).abs() <= 1e-7 * grid_variation(&g).unwrap().max(1.0));
        }
    }

    #[test]
    fn reconstruction_exact_for_equal_densities(
        width in 0.5f64..5.0,
        offsets in prop::collection::vec(-20.0f64..20.0, 2..30),
    ) {
        let segs = offsets.iter().map(|&o| SegmentStats::new(0, o + width, o)).collect();
        let g = SegmentGrid::from_segments(segs, 1.0);
        let p = estimate_params(&g).unwrap();
        prop_assert!(p.alpha1.abs() < 1e-12);
        let v = grid_variation(&g).unwrap();
        prop_assert!((p.reconstruction() - v).abs() < 1e-9 * v);
    }

    #[test]
    fn probability_routes_agree(alpha in -0.999f64..0.999, n in 1u32..5000, omega in 1e-6f64..1e3) {
        let m = moments(alpha, n, omega).unwrap();
        let direct = p_leq_zero(alpha, n).unwrap();
        let via = p_leq_zero_from_moments(m.mu, m.sigma).unwrap();
        prop_assert!((direct - via).abs() < 1e-12);
    }

    #[test]
    fn p_leq_zero_increases_with_alpha(a in -0.99f64..0.99, step in 1e-4f64..0.01, n in 1u32..50) {
        let b = (a + step).min(0.999);
        let (pa, pb) = (p_leq_zero(a, n).unwrap(), p_leq_zero(b, n).unwrap());
        prop_assert!(pb >= pa);
        // strict only away from saturation
        if pa > 1e-9 && pb < 1.0 - 1e-9 {
            prop_assert!(pb > pa);
        }
    }

    #[test]
    fn shift_preserves_cardinality(n in 1u32..60, frac in -1.0f64..=1.0) {
        let z0 = (frac * 2.0 * n as f64).round() as i64;
        let range = admissible_range(n, z0).unwrap();
        let size = range.clone().count() as i64;
        let f = shift_frame(*range.start(), n, z0).unwrap();
        prop_assert_eq!(size, f.doubled_n_prime + 1);
        for z in range {
            let f = shift_frame(z, n, z0).unwrap();
            prop_assert!(f.doubled_z_prime.abs() <= f.doubled_n_prime);
        }
    }

    #[test]
    fn heavy_cdf_is_odd(zeta in 0.0f64..=6.0, zeta0 in 0.0f64..1.0) {
        let up = heavy_cdf(zeta, zeta0).unwrap();
        let down = heavy_cdf(-zeta, zeta0).unwrap();
        prop_assert!((up + down - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tail_ratio_crosses_one_at_zeta0(zeta0 in 0.05f64..1.0, t in 0.0f64..1.0) {
        let inner = zeta0 * (0.01 + 0.98 * t);
        prop_assert!(tail_ratio(inner, zeta0).unwrap() < 1.0);
        let outer = zeta0 + (6.0 - zeta0) * (0.001 + 0.999 * t);
        prop_assert!(tail_ratio(outer, zeta0).unwrap() > 1.0);
    }
}

#[test]
fn enumeration_matches_binomial() {
    for n in 1..=10 {
        let walked = enumerate_paths(n).unwrap();
        let exact = distribution(n).unwrap();
        assert!(walked.counts().eq(exact.counts()), "n = {n}");
    }
}

#[test]
fn distribution_symmetric_up_to_cap() {
    for n in 1..=512 {
        let d = distribution(n).unwrap();
        for z in 0..=n as i64 {
            assert_eq!(d.probability(z), d.probability(-z));
        }
    }
}

#[test]
fn transform_monotone_on_fine_grid() {
    for zeta0 in [0.0, 0.25, 0.5, 0.75, 0.999] {
        let mut prev = f64::NEG_INFINITY;
        for i in -6000..=6000 {
            let zeta = i as f64 * 1e-3;
            let g = transform(zeta, zeta0);
            assert!(g >= prev, "zeta0 = {zeta0}, zeta = {zeta}");
            if i > -6000 && i != 0 && i != 1 {
                assert!(g > prev, "zeta0 = {zeta0}, zeta = {zeta}");
            }
            prev = g;
            let p = heavy_cdf(zeta, zeta0).unwrap();
            assert!((0.0..=1.0).contains(&p));
        }
    }
}

#[test]
fn closed_form_matches_general_shift_at_zero_anomaly() {
    let (c1, c2) = solve_constants(0.0).unwrap();
    assert_eq!((c1, c2), (0.0, 1.0 / 6.0));
    for i in -600..=600 {
        let zeta = i as f64 * 0.01;
        let general = normal_cdf(zeta + rfr_shift(zeta, c1, c2));
        let closed = heavy_cdf(zeta, 0.0).unwrap();
        assert!((general - closed).abs() < 1e-15, "zeta = {zeta}");
    }
}

#[test]
fn admissible_unshifted_range_size() {
    for n in 1..100 {
        assert_eq!(admissible_range(n, 0).unwrap().count() as u32, 2 * n + 1);
    }
}

#[test]
fn density_condition_fraction_matches_count() {
    let segs = [1.0, 0.1, 0.9, 0.85, 0.2]
        .iter()
        .map(|&w| SegmentStats::new(0, w, 0.0))
        .collect();
    let g = SegmentGrid::from_segments(segs, 1.0);
    let r = grid::check_density_condition(&g, 0.5).unwrap();
    assert_eq!(r.violations, 3);
    assert_eq!(r.fraction, 3.0 / 4.0);
}
