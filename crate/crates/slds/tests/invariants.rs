//! Property and invariant tests: deterministic sketch bounds, metric
//! axioms, integrator cross-checks, plan monotonicity, and serialization
//! robustness, all validated against exhaustive oracles.

mod common;

use common::*;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use slds::bucketing::{BucketSpec, BucketedEmpirical};
use slds::distances::{hockey_stick, lp_distance, total_variation, wasserstein_distance};
use slds::estimators::{
    build_summary, plan_tv, plan_wasserstein, EstimatorConfig, TailModel,
};
use slds::streams::{Generator, SourceStream};
use slds::summaries::DistributionSummary;

/// Expands a weighted integer stream into unit-weight samples placed at
/// bucket midpoints of the unit-width partition at origin 0, so item `j`
/// lands in bucket `j`.
fn expand_to_samples(stream: &[(i64, u64)]) -> Vec<f64> {
    let mut samples = Vec::new();
    for &(item, weight) in stream {
        for _ in 0..weight {
            samples.push(item as f64 + 0.5);
        }
    }
    samples
}

fn unit_spec() -> BucketSpec {
    BucketSpec::new(0.0, 1.0).expect("spec")
}

fn gaussian_samples(mean: f64, sigma: f64, seed: u64, n: usize) -> Vec<f64> {
    SourceStream {
        generator: Generator::Gaussian { mean, sigma },
        seed,
        length: n,
    }
    .generate()
    .expect("generate")
}

fn summary_of(samples: &[f64], spec: BucketSpec, capacity: usize) -> DistributionSummary {
    let mut s = DistributionSummary::new(spec, capacity, None).expect("summary");
    s.observe_all(samples).expect("observe");
    s
}

fn counters_of(s: &DistributionSummary) -> Vec<(i64, u64)> {
    s.counters().collect()
}

#[test]
fn sketch_is_exact_below_capacity_and_deterministic() {
    let mut rng = StdRng::seed_from_u64(0xBEEF);
    for _ in 0..100 {
        let k = 2 * rng.gen_range(4..=32usize);
        // At most k distinct items, so nothing is ever evicted.
        let stream = random_stream(&mut rng, 2000, k as i64, 16);
        let samples = expand_to_samples(&stream);
        let summary = summary_of(&samples, unit_spec(), k);
        let again = summary_of(&samples, unit_spec(), k);
        assert_eq!(counters_of(&summary), counters_of(&again));
        let freqs = exact_frequencies(&stream);
        assert_eq!(summary.n(), total_weight(&freqs));
        assert_eq!(summary.counter_total(), total_weight(&freqs));
        for (&item, &f) in &freqs {
            let stored = summary
                .counters()
                .find(|&(i, _)| i == item)
                .map(|(_, w)| w)
                .unwrap_or(0);
            assert_eq!(stored, f, "item {item} inexact below capacity");
        }
    }
}

#[test]
fn normalized_pdf_sums_to_one_and_cdf_is_monotone() {
    let mut rng = StdRng::seed_from_u64(0xCAFE);
    for trial in 0..100 {
        let k = [8, 16, 32, 64][trial % 4];
        let stream = random_stream(&mut rng, 3000, 400, 16);
        let samples = expand_to_samples(&stream);
        let summary = summary_of(&samples, unit_spec(), k);
        let mass: f64 = summary
            .counters()
            .map(|(i, _)| summary.pdf_estimate(i).expect("mass"))
            .sum();
        assert!((mass - 1.0).abs() < 1e-12, "pdf mass {mass}");
        let keys: Vec<i64> = summary.counters().map(|(i, _)| i).collect();
        let mut last = 0.0;
        for &i in &keys {
            let c = summary.cdf_estimate(i).expect("mass");
            assert!(c >= last, "cdf decreased at {i}");
            assert!(summary.pdf_estimate(i).expect("mass") >= 0.0);
            last = c;
        }
        assert_eq!(last, 1.0, "terminal cdf must be exactly 1");
    }
}

#[test]
fn pointwise_pdf_bound_holds_on_concentrated_streams() {
    // The relative pointwise bound requires streams whose residual weight
    // is at most a quarter of the total; geometric item draws keep almost
    // all weight on a handful of items, so most draws qualify.
    let mut rng = StdRng::seed_from_u64(0xD00D);
    let mut checked = 0usize;
    for trial in 0..300 {
        let k = [16, 32, 64][trial % 3];
        let stream = concentrated_stream(&mut rng, 2000, 64, 8);
        let freqs = exact_frequencies(&stream);
        let n = total_weight(&freqs);
        let residual = residual_weight(&freqs, k / 4);
        if 4 * residual > n {
            continue;
        }
        checked += 1;
        let samples = expand_to_samples(&stream);
        let summary = summary_of(&samples, unit_spec(), k);
        let exact = BucketedEmpirical::from_samples(&samples, unit_spec()).expect("hist");
        let nf = n as f64;
        for (&item, &f) in &freqs {
            let approx = summary.pdf_estimate(item).expect("mass");
            let truth = exact.pdf(item).expect("mass");
            let stored = summary
                .counters()
                .find(|&(i, _)| i == item)
                .map(|(_, w)| w)
                .unwrap_or(0);
            let relative_arm = (4.0 * residual as f64 / nf) * (f as f64 / nf);
            let deficit_arm = (f - stored) as f64 / nf;
            let bound = relative_arm.max(deficit_arm);
            assert!(
                (approx - truth).abs() <= bound + 1e-12,
                "item {item}: |{approx} - {truth}| > {bound} (k={k}, n={n}, residual={residual})"
            );
        }
    }
    assert!(checked >= 100, "only {checked} concentrated streams tested");
}

#[test]
fn sup_cdf_gap_obeys_deterministic_residual_bound() {
    // Unlike the pointwise PDF bound, the normalized CDF bound
    // 2 * residual / n holds for every stream, concentrated or not.
    let mut rng = StdRng::seed_from_u64(0xF00D);
    for trial in 0..200 {
        let k = [8, 16, 32, 64][trial % 4];
        let stream = if trial % 2 == 0 {
            random_stream(&mut rng, 2000, 500, 16)
        } else {
            concentrated_stream(&mut rng, 2000, 64, 8)
        };
        let freqs = exact_frequencies(&stream);
        let n = total_weight(&freqs) as f64;
        let residual = residual_weight(&freqs, k / 4) as f64;
        let samples = expand_to_samples(&stream);
        let summary = summary_of(&samples, unit_spec(), k);
        let exact = BucketedEmpirical::from_samples(&samples, unit_spec()).expect("hist");
        let gap = sup_cdf_gap(&summary, &exact);
        assert!(
            gap <= 2.0 * residual / n + 1e-12,
            "sup gap {gap} exceeds {} (k={k})",
            2.0 * residual / n
        );
    }
}

#[test]
fn summaries_stay_sublinear_when_streams_dwarf_capacity() {
    let samples: Vec<f64> = {
        let mut rng = StdRng::seed_from_u64(0xA11);
        (0..100_000).map(|_| rng.gen_range(0.0..10_000.0)).collect()
    };
    let summary = summary_of(&samples, unit_spec(), 100);
    assert!(summary.assigned_buckets() <= 100);
    assert_eq!(summary.n(), 100_000);
}

#[test]
fn merged_shards_match_single_pass_error_on_the_reference_workload() {
    // Ten shards of 10^4 gaussian samples (mean 0, deviation 5), width
    // 0.05, capacity from the CDF plan at accuracy 0.05: merging the
    // per-shard summaries must track a single-pass summary of the
    // concatenation, with sup-CDF error within 0.01 of the single-pass run.
    let spec = BucketSpec::new(0.0, 0.05).expect("spec");
    let capacity = 1676;
    let shards: Vec<Vec<f64>> =
        (0..10).map(|s| gaussian_samples(0.0, 5.0, 100 + s, 10_000)).collect();
    let concatenated: Vec<f64> = shards.iter().flatten().copied().collect();

    let single = summary_of(&concatenated, spec, capacity);
    let mut merged = DistributionSummary::new(spec, capacity, None).expect("summary");
    for shard in &shards {
        let part = summary_of(shard, spec, capacity);
        merged.merge_from(&part).expect("merge");
    }

    let exact = BucketedEmpirical::from_samples(&concatenated, spec).expect("hist");
    let err_single = sup_cdf_gap(&single, &exact);
    let err_merged = sup_cdf_gap(&merged, &exact);
    assert!(
        (err_merged - err_single).abs() <= 0.01,
        "merged error {err_merged} vs single-pass {err_single}"
    );
    // At this capacity nothing is evicted, so the agreement is exact.
    assert_eq!(counters_of(&merged), counters_of(&single));
    assert_eq!(err_merged, 0.0);
    assert_eq!(err_single, 0.0);
}

#[test]
fn estimates_are_split_invariant_in_the_exact_regime() {
    let spec = BucketSpec::new(0.0, 0.05).expect("spec");
    let capacity = 2000;
    let a = gaussian_samples(0.0, 1.0, 41, 20_000);
    let b = gaussian_samples(0.4, 1.0, 43, 20_000);
    let whole_a = build_summary(spec, capacity, None, &[&a]).expect("summary");
    let whole_b = build_summary(spec, capacity, None, &[&b]).expect("summary");
    let reference = wasserstein_distance(&whole_a, &whole_b, 1.0).expect("distance");
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..5 {
        let parts = rng.gen_range(2..=12usize);
        let shards_a = slds::streams::split_sources(&a, parts).expect("split");
        let split_a = build_summary(spec, capacity, None, &shards_a).expect("summary");
        assert_eq!(counters_of(&split_a), counters_of(&whole_a));
        let split_estimate = wasserstein_distance(&split_a, &whole_b, 1.0).expect("distance");
        assert_eq!(split_estimate, reference);
    }
}

#[test]
fn metric_axioms_hold_on_random_summary_triples() {
    let spec = BucketSpec::new(0.0, 0.05).expect("spec");
    let mut rng = StdRng::seed_from_u64(0x7A1);
    for _ in 0..20 {
        let summaries: Vec<DistributionSummary> = (0..3)
            .map(|_| {
                let mean = rng.gen_range(-1.0..1.0);
                let sigma = rng.gen_range(0.5..2.0);
                let seed = rng.gen();
                summary_of(&gaussian_samples(mean, sigma, seed, 5000), spec, 400)
            })
            .collect();
        let (a, b, c) = (&summaries[0], &summaries[1], &summaries[2]);
        for (x, y) in [(a, b), (a, c), (b, c)] {
            let w1 = wasserstein_distance(x, y, 1.0).expect("distance");
            let w1_rev = wasserstein_distance(y, x, 1.0).expect("distance");
            assert!(w1 >= 0.0);
            assert!((w1 - w1_rev).abs() <= 1e-12, "asymmetric: {w1} vs {w1_rev}");
            let tv = total_variation(x, y).expect("distance");
            assert_eq!(tv, total_variation(y, x).expect("distance"));
            assert!((0.0..=1.0).contains(&tv));
            let hs = hockey_stick(x, y, 2.0).expect("distance");
            assert!((0.0..=1.0).contains(&hs));
            assert!(lp_distance(x, y, 2.0).expect("distance") >= 0.0);
        }
        assert_eq!(wasserstein_distance(a, a, 1.0).expect("distance"), 0.0);
        assert_eq!(total_variation(a, a).expect("distance"), 0.0);
        // Triangle inequality.
        let (wab, wac, wcb) = (
            wasserstein_distance(a, b, 1.0).expect("distance"),
            wasserstein_distance(a, c, 1.0).expect("distance"),
            wasserstein_distance(c, b, 1.0).expect("distance"),
        );
        assert!(wab <= wac + wcb + 1e-9, "{wab} > {wac} + {wcb}");
        let (tab, tac, tcb) = (
            total_variation(a, b).expect("distance"),
            total_variation(a, c).expect("distance"),
            total_variation(c, b).expect("distance"),
        );
        assert!(tab <= tac + tcb + 1e-12, "{tab} > {tac} + {tcb}");
        let (qab, qac, qcb) = (
            wasserstein_distance(a, b, 2.0).expect("distance"),
            wasserstein_distance(a, c, 2.0).expect("distance"),
            wasserstein_distance(c, b, 2.0).expect("distance"),
        );
        assert!(qab <= qac + qcb + 1e-9, "{qab} > {qac} + {qcb}");
    }
}

#[test]
fn excess_mass_is_monotone_in_the_threshold_and_starts_at_tv() {
    let spec = BucketSpec::new(0.0, 0.05).expect("spec");
    let a = summary_of(&gaussian_samples(0.0, 1.0, 51, 8000), spec, 600);
    let b = summary_of(&gaussian_samples(0.7, 1.0, 53, 8000), spec, 600);
    let tv = total_variation(&a, &b).expect("distance");
    let taus = [1.0, 1.1, 1.3, 1.7, 2.5, 4.0, 8.0];
    let mut last = f64::INFINITY;
    for tau in taus {
        let hs = hockey_stick(&a, &b, tau).expect("distance");
        assert!(hs <= last + 1e-12, "divergence rose at threshold {tau}");
        assert!((0.0..=1.0).contains(&hs));
        last = hs;
    }
    assert_eq!(hockey_stick(&a, &b, 1.0).expect("distance"), tv);
}

/// `(midpoint, cumulative fraction)` pairs of a summary, ascending.
fn cdf_steps(s: &DistributionSummary) -> Vec<(f64, f64)> {
    let total = s.counter_total() as f64;
    let spec = s.spec();
    let mut acc = 0u64;
    s.counters()
        .map(|(i, w)| {
            acc += w;
            (spec.midpoint(i), acc as f64 / total)
        })
        .collect()
}

fn step_cdf_at(steps: &[(f64, f64)], x: f64) -> f64 {
    match steps.partition_point(|&(m, _)| m <= x) {
        0 => 0.0,
        k => steps[k - 1].1,
    }
}

fn step_quantile_at(steps: &[(f64, f64)], r: f64) -> f64 {
    let k = steps.partition_point(|&(_, c)| c < r);
    steps[k.min(steps.len() - 1)].0
}

#[test]
fn transport_integrator_matches_a_riemann_grid() {
    let grid = 1_000_000usize;
    let mut rng = StdRng::seed_from_u64(0x9E1);
    // First-order distance: integrate |F_a - F_b| on an x-grid, including
    // pairs whose partitions differ.
    for trial in 0..6 {
        let spec_a = BucketSpec::new(0.0, 0.05).expect("spec");
        let spec_b = if trial % 2 == 0 {
            spec_a
        } else {
            BucketSpec::new(0.013, 0.07).expect("spec")
        };
        let a = summary_of(
            &gaussian_samples(rng.gen_range(-0.5..0.5), 1.0, rng.gen(), 20_000),
            spec_a,
            500,
        );
        let b = summary_of(
            &gaussian_samples(rng.gen_range(-0.5..0.5), 1.0, rng.gen(), 20_000),
            spec_b,
            500,
        );
        let exact = wasserstein_distance(&a, &b, 1.0).expect("distance");
        let steps_a = cdf_steps(&a);
        let steps_b = cdf_steps(&b);
        let lo = steps_a[0].0.min(steps_b[0].0) - 1.0;
        let hi = steps_a.last().expect("nonempty").0.max(steps_b.last().expect("nonempty").0) + 1.0;
        let h = (hi - lo) / grid as f64;
        let mut sum = 0.0;
        for j in 0..grid {
            let x = lo + (j as f64 + 0.5) * h;
            sum += (step_cdf_at(&steps_a, x) - step_cdf_at(&steps_b, x)).abs();
        }
        let riemann = sum * h;
        assert!(
            (riemann - exact).abs() < 1e-3,
            "trial {trial}: grid {riemann} vs integrator {exact}"
        );
    }
    // Second-order distance: integrate |G_a - G_b|^2 on a rank grid.
    for _ in 0..3 {
        let spec = BucketSpec::new(0.0, 0.05).expect("spec");
        let a = summary_of(
            &gaussian_samples(rng.gen_range(-0.5..0.5), 1.0, rng.gen(), 20_000),
            spec,
            500,
        );
        let b = summary_of(
            &gaussian_samples(rng.gen_range(-0.5..0.5), 1.0, rng.gen(), 20_000),
            spec,
            500,
        );
        let exact = wasserstein_distance(&a, &b, 2.0).expect("distance");
        let steps_a = cdf_steps(&a);
        let steps_b = cdf_steps(&b);
        let mut sum = 0.0;
        for j in 0..grid {
            let r = (j as f64 + 0.5) / grid as f64;
            let gap = step_quantile_at(&steps_a, r) - step_quantile_at(&steps_b, r);
            sum += gap * gap;
        }
        let riemann = (sum / grid as f64).sqrt();
        assert!(
            (riemann - exact).abs() < 1e-3,
            "grid {riemann} vs integrator {exact}"
        );
    }
}

#[test]
fn plans_are_monotone_in_accuracy_scale_and_smoothness() {
    let config =
        |eps: f64, sigma: f64, ell: f64| {
            EstimatorConfig::new(eps, 0.05, TailModel::sub_gaussian(sigma).expect("tail"), ell)
                .expect("config")
        };
    // Tightening the accuracy never shrinks the requirements.
    let mut last_k = 0usize;
    let mut last_n = 0u64;
    let mut last_b = f64::INFINITY;
    for eps in [0.4, 0.2, 0.1, 0.05, 0.025] {
        let plan = plan_wasserstein(&config(eps, 2.0, 1.0)).expect("plan");
        assert!(plan.counters >= last_k);
        assert!(plan.n_min >= last_n);
        assert!(plan.bucket_width <= last_b);
        last_k = plan.counters;
        last_n = plan.n_min;
        last_b = plan.bucket_width;
        let tv_plan = plan_tv(&config(eps, 2.0, 1.0)).expect("plan");
        assert!(tv_plan.counters >= 4 && tv_plan.n_min >= 1);
    }
    // Wider tails and steeper densities never shrink the requirements.
    for plan_fn in [plan_wasserstein, plan_tv] {
        let mut k = 0usize;
        for sigma in [0.5, 1.0, 2.0, 4.0] {
            let plan = plan_fn(&config(0.1, sigma, 1.0)).expect("plan");
            assert!(plan.counters >= k, "capacity shrank as scale grew");
            k = plan.counters;
        }
        let mut k = 0usize;
        for ell in [0.5, 1.0, 2.0, 4.0] {
            let plan = plan_fn(&config(0.1, 2.0, ell)).expect("plan");
            assert!(plan.counters >= k, "capacity shrank as smoothness grew");
            k = plan.counters;
        }
    }
}

#[test]
fn transport_estimate_error_decomposes_by_triangle() {
    // Deterministic sandwich: the estimate between two sketches differs
    // from the distance between the exact bucketed laws by at most the
    // per-side sketch-to-exact distances, each bounded by the measured
    // sup-CDF gap times the assigned span (plus a bucket-width cushion).
    let spec = BucketSpec::new(0.0, 0.02).expect("spec");
    let evicting_capacity = 64;
    let exact_capacity = 4096;
    let a = gaussian_samples(0.0, 1.0, 61, 20_000);
    let b = gaussian_samples(0.5, 1.0, 67, 20_000);
    let sketch_a = summary_of(&a, spec, evicting_capacity);
    let sketch_b = summary_of(&b, spec, evicting_capacity);
    let full_a = summary_of(&a, spec, exact_capacity);
    let full_b = summary_of(&b, spec, exact_capacity);
    assert!(full_a.assigned_buckets() < exact_capacity, "not exact");
    let estimate = wasserstein_distance(&sketch_a, &sketch_b, 1.0).expect("distance");
    let truth = wasserstein_distance(&full_a, &full_b, 1.0).expect("distance");
    let hist_a = BucketedEmpirical::from_samples(&a, spec).expect("hist");
    let hist_b = BucketedEmpirical::from_samples(&b, spec).expect("hist");
    let budget = sup_cdf_gap(&sketch_a, &hist_a) * assigned_span(&hist_a)
        + sup_cdf_gap(&sketch_b, &hist_b) * assigned_span(&hist_b)
        + 2.0 * spec.width();
    assert!(
        (estimate - truth).abs() <= budget + 1e-9,
        "|{estimate} - {truth}| > {budget}"
    );
    // The per-side distances themselves obey the same component bound.
    for (sketch, full, hist) in [(&sketch_a, &full_a, &hist_a), (&sketch_b, &full_b, &hist_b)] {
        let side = wasserstein_distance(sketch, full, 1.0).expect("distance");
        let cap = sup_cdf_gap(sketch, hist) * assigned_span(hist) + spec.width();
        assert!(side <= cap + 1e-9, "side distance {side} > {cap}");
    }
}

#[test]
fn tv_estimate_error_decomposes_by_sketch_mass_gaps() {
    let spec = BucketSpec::new(0.0, 0.05).expect("spec");
    let evicting_capacity = 48;
    let exact_capacity = 4096;
    let a = gaussian_samples(0.0, 1.0, 71, 20_000);
    let b = gaussian_samples(0.3, 1.0, 73, 20_000);
    let sketch_a = summary_of(&a, spec, evicting_capacity);
    let sketch_b = summary_of(&b, spec, evicting_capacity);
    let full_a = summary_of(&a, spec, exact_capacity);
    let full_b = summary_of(&b, spec, exact_capacity);
    let estimate = total_variation(&sketch_a, &sketch_b).expect("distance");
    let truth = total_variation(&full_a, &full_b).expect("distance");
    let hist_a = BucketedEmpirical::from_samples(&a, spec).expect("hist");
    let hist_b = BucketedEmpirical::from_samples(&b, spec).expect("hist");
    let budget = tv_gap(&sketch_a, &hist_a) + tv_gap(&sketch_b, &hist_b);
    assert!(
        (estimate - truth).abs() <= budget + 1e-12,
        "|{estimate} - {truth}| > {budget}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_built_summary_roundtrips_bit_exactly(
        width in 0.001f64..8.0,
        origin in -50.0f64..50.0,
        half_capacity in 2usize..=32,
        seed in any::<u64>(),
        n in 0usize..300,
    ) {
        let spec = BucketSpec::new(origin, width).expect("spec");
        let samples = gaussian_samples(0.0, 3.0, seed, n);
        let mut summary = DistributionSummary::new(spec, 2 * half_capacity, None).expect("summary");
        summary.observe_all(&samples).expect("observe");
        let back = DistributionSummary::from_bytes(&summary.to_bytes()).expect("decode");
        prop_assert_eq!(counters_of(&back), counters_of(&summary));
        prop_assert_eq!(back.n(), summary.n());
        prop_assert!(back.spec().same_partition(&summary.spec()));
        let json = DistributionSummary::from_json(&summary.to_json()).expect("decode");
        prop_assert_eq!(counters_of(&json), counters_of(&summary));
    }

    #[test]
    fn corrupting_any_byte_never_panics(
        seed in any::<u64>(),
        index in any::<prop::sample::Index>(),
        mask in 1u8..,
    ) {
        let spec = BucketSpec::new(0.0, 0.5).expect("spec");
        let samples = gaussian_samples(0.0, 2.0, seed, 64);
        let mut summary = DistributionSummary::new(spec, 16, None).expect("summary");
        summary.observe_all(&samples).expect("observe");
        let mut bytes = summary.to_bytes();
        let at = index.index(bytes.len());
        bytes[at] ^= mask;
        // Decoding may fail, but must never panic; damage to the magic
        // number must always fail.
        let result = DistributionSummary::from_bytes(&bytes);
        if at < 4 {
            prop_assert!(result.is_err());
        }
    }

    #[test]
    fn bucket_mapping_is_consistent(
        width in 0.001f64..1000.0,
        origin in -1000.0f64..1000.0,
        x in -1.0e9f64..1.0e9,
        i in -1000i64..1000,
        j in -1000i64..1000,
    ) {
        let spec = BucketSpec::new(origin, width).expect("spec");
        let bucket = spec.bucket_of(x).expect("bucket");
        let mid = spec.midpoint(bucket);
        prop_assert!((mid - x).abs() <= width / 2.0 + width * 1e-9);
        prop_assert_eq!(spec.bucket_of(mid).expect("bucket"), bucket);
        prop_assert_eq!(spec.distance(i, j), spec.distance(j, i));
        prop_assert_eq!(spec.distance(i, j), (i - j).unsigned_abs() as f64 * width);
    }
}
