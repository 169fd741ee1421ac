//! Subcommand implementations: thin orchestration over the library, with
//! `key = value` reporting on stdout and warnings on stderr.

use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::time::Instant;

use slds::{
    audit_fairness, audit_privacy, build_summary, distance, oracle_tv, oracle_wasserstein1,
    plan_tv, plan_wasserstein, read_grouped_scores, read_samples, split_sources, total_variation,
    wasserstein_distance, BucketSpec, BucketedEmpirical, DistributionSummary, EstimatePlan,
    EstimatorConfig, MetricKind, Result, SourceStream,
};

use crate::{
    AlphasArg, DistArgs, DistMetric, FairnessArgs, GridArg, MergeArgs, PlanArgs, PlanMetric,
    PrivacyArgs, SummarizeArgs, SynopsisMode, SyntheticArgs, TailArg,
};

pub fn summarize(args: SummarizeArgs) -> Result<()> {
    let samples = read_samples(&args.input)?;
    let spec = BucketSpec::new(args.origin, args.bucket_width)?;
    let mut summary = DistributionSummary::new(spec, args.counters, None)?;
    summary.observe_all(&samples)?;
    if args.json {
        summary.save_json(&args.out)?;
    } else {
        summary.save(&args.out)?;
    }
    println!(
        "wrote {}: n = {}, assigned {}/{} buckets, width {}, origin {}",
        args.out.display(),
        summary.n(),
        summary.assigned_buckets(),
        summary.capacity(),
        spec.width(),
        spec.origin()
    );
    if summary.n() == 0 {
        println!("stream was empty; no synopsis");
        return Ok(());
    }
    match args.mode {
        SynopsisMode::Pdf => {
            let (bucket, _) = summary
                .counters()
                .max_by_key(|&(i, weight)| (weight, i))
                .expect("nonempty summary has counters");
            let low = spec.origin() + bucket as f64 * spec.width();
            println!(
                "pdf synopsis: heaviest bucket [{low}, {}) holds estimated mass {}",
                low + spec.width(),
                summary.pdf_estimate(bucket)?
            );
        }
        SynopsisMode::Cdf => {
            println!(
                "cdf synopsis: estimated quartiles {} | {} | {}",
                summary.pseudoinverse(0.25)?,
                summary.pseudoinverse(0.5)?,
                summary.pseudoinverse(0.75)?
            );
        }
    }
    Ok(())
}

pub fn merge(args: MergeArgs) -> Result<()> {
    let (first, rest) = args
        .inputs
        .split_first()
        .expect("the argument parser enforces at least one input");
    let mut merged = DistributionSummary::load(first)?;
    for path in rest {
        merged.merge_from(&DistributionSummary::load(path)?)?;
    }
    if args.json {
        merged.save_json(&args.out)?;
    } else {
        merged.save(&args.out)?;
    }
    println!(
        "wrote {}: merged {} summaries, n = {}, assigned {}/{} buckets",
        args.out.display(),
        args.inputs.len(),
        merged.n(),
        merged.assigned_buckets(),
        merged.capacity()
    );
    Ok(())
}

pub fn dist(args: DistArgs) -> Result<()> {
    let a = DistributionSummary::load(&args.summary_a)?;
    let b = DistributionSummary::load(&args.summary_b)?;
    let metric = match args.metric {
        DistMetric::Wasserstein => MetricKind::Wasserstein { p: args.p },
        DistMetric::Tv => MetricKind::TotalVariation,
        DistMetric::Lp => MetricKind::Lp { p: args.p },
        DistMetric::HockeyStick => MetricKind::HockeyStick { tau: args.tau },
    };
    let value = distance(&a, &b, metric)?;
    println!("{value}");
    Ok(())
}

pub fn plan(args: PlanArgs) -> Result<()> {
    let TailArg(tail) = args.tail;
    let config = EstimatorConfig::new(args.epsilon, args.delta, tail, args.lipschitz)?
        .with_constant(args.constant);
    let plan = match args.metric {
        PlanMetric::Wasserstein => plan_wasserstein(&config)?,
        PlanMetric::Tv => plan_tv(&config)?,
    };
    print_plan(&plan);
    Ok(())
}

fn print_plan(plan: &EstimatePlan) {
    println!("bucket_width = {}", plan.bucket_width);
    println!("counters = {}", plan.counters);
    println!("n_min = {}", plan.n_min);
}

pub fn synthetic(args: SyntheticArgs) -> Result<()> {
    let a = SourceStream {
        generator: args.dist_a.clone(),
        seed: args.seed,
        length: args.n,
    }
    .generate()?;
    let b = SourceStream {
        generator: args.dist_b.clone(),
        seed: args.seed + 1,
        length: args.n,
    }
    .generate()?;
    let spec = BucketSpec::new(0.0, args.bucket_width)?;
    let (label, oracle) = match args.metric {
        PlanMetric::Wasserstein => ("wasserstein", oracle_wasserstein1(&a, &b)?),
        PlanMetric::Tv => {
            let hist_a = BucketedEmpirical::from_samples(&a, spec)?;
            let hist_b = BucketedEmpirical::from_samples(&b, spec)?;
            ("tv", oracle_tv(&hist_a, &hist_b)?)
        }
    };
    let sources_a = split_sources(&a, args.sources)?;
    let sources_b = split_sources(&b, args.sources)?;
    let GridArg(grid) = &args.counters_grid;
    let mut csv = BufWriter::new(File::create(&args.out)?);
    writeln!(csv, "k,estimate,oracle,abs_error,rel_error,wall_ms")?;
    for &capacity in grid {
        let started = Instant::now();
        let sa = build_summary(spec, capacity, None, &sources_a)?;
        let sb = build_summary(spec, capacity, None, &sources_b)?;
        let estimate = match args.metric {
            PlanMetric::Wasserstein => wasserstein_distance(&sa, &sb, 1.0)?,
            PlanMetric::Tv => total_variation(&sa, &sb)?,
        };
        let wall_ms = started.elapsed().as_secs_f64() * 1e3;
        let abs_error = (estimate - oracle).abs();
        let rel_error = abs_error / oracle;
        writeln!(csv, "{capacity},{estimate},{oracle},{abs_error},{rel_error},{wall_ms:.3}")?;
    }
    csv.flush()?;
    println!(
        "wrote {}: {} grid rows, exact {label} on the full data = {oracle}",
        args.out.display(),
        grid.len()
    );
    Ok(())
}

pub fn fairness(args: FairnessArgs) -> Result<()> {
    let TailArg(tail) = args.tail;
    let config = EstimatorConfig::new(args.epsilon, args.delta, tail, args.lipschitz)?
        .with_constant(args.constant);
    let groups = read_grouped_scores(&args.scores)?;
    let report = audit_fairness(&groups, &config)?;
    print_plan(&report.plan);
    for (group, count) in &report.group_counts {
        println!("group {group}: n = {count}");
    }
    for pair in &report.pairs {
        println!("pair {} vs {}: {}", pair.left, pair.right, pair.value);
    }
    println!("disparity = {}", report.disparity);
    println!("sublinearity = {}", report.sublinearity);
    if report.below_threshold {
        eprintln!(
            "warning: a group is smaller than the planned sample floor ({}); \
             the accuracy target is not certified",
            report.plan.n_min
        );
    }
    Ok(())
}

pub fn privacy(args: PrivacyArgs) -> Result<()> {
    let TailArg(tail) = args.tail;
    let AlphasArg(alphas) = &args.alphas;
    let config = EstimatorConfig::new(args.epsilon, args.delta, tail, args.lipschitz)?
        .with_constant(args.constant);
    let losses_in = read_samples(&args.in_losses)?;
    let losses_out = read_samples(&args.out_losses)?;
    let report = audit_privacy(&losses_in, &losses_out, &config, alphas)?;
    print_plan(&report.plan);
    println!("n_in = {}", report.n_in);
    println!("n_out = {}", report.n_out);
    println!("tv = {}", report.total_variation);
    for row in &report.rows {
        println!(
            "alpha {}: tau = {}, hockey_stick = {}, corrected_bound = {}",
            row.alpha, row.tau, row.hockey_stick, row.corrected_bound
        );
    }
    println!("sublinearity = {}", report.sublinearity);
    if report.below_threshold {
        eprintln!(
            "warning: a loss stream is smaller than the planned sample floor ({}); \
             the accuracy target is not certified",
            report.plan.n_min
        );
    }
    Ok(())
}
