//! Subcommand implementations.

use std::path::Path;

use renseq::dist::WaitingTimeDistribution;
use renseq::estimators::{
    alpha_mixing_bound, autocovariance_profile, estimate_autocovariance, estimate_mean_rate,
    estimate_waiting_time, waiting_time_profile, EstimationReport,
};
use renseq::inverse::{invert_autocovariance, InversionResult, DEFAULT_INVERSION_HORIZON};
use renseq::likelihood::{entropy_summary, log_likelihood};
use renseq::model::ModelDescriptor;
use renseq::renewal::{solve_renewal, tail_proxy, CovarianceSequence};
use renseq::rng::stream_seed;
use renseq::sampler::Sampler;
use renseq::seq::BinarySequence;

use crate::output::{provenance_path, write_provenance, CsvWriter};
use crate::{
    AutocovArgs, CliError, Command, EntropyArgs, EstimateArgs, EstimateTargetArg, FiguresArgs,
    GenerateArgs, InvertArgs, LoglikArgs, MixingArgs,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Autocov(args) => autocov(args),
        Command::Invert(args) => invert(args),
        Command::Entropy(args) => entropy(args),
        Command::Loglik(args) => loglik(args),
        Command::Estimate(args) => estimate(args),
        Command::Mixing(args) => mixing(args),
        Command::Figures(args) => figures(args),
    }
}

fn load_model(path: &Path) -> Result<ModelDescriptor, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read model {}: {e}", path.display())))?;
    Ok(ModelDescriptor::from_json(&text)?)
}

fn threads_or_auto(threads: usize) -> usize {
    if threads == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        threads
    }
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.length == 0 {
        return Err(CliError::Config("length must be at least 1".into()));
    }
    if args.replicas == 0 {
        return Err(CliError::Config("replicas must be at least 1".into()));
    }
    let descriptor = load_model(&args.model)?;
    let sampler = descriptor.sampler()?;
    let mut outputs = Vec::new();

    let write_seq = |seq: &BinarySequence, path: &Path| -> Result<(), CliError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        seq.save(path)?;
        if args.text {
            std::fs::write(path.with_extension("txt"), seq.to_text())?;
        }
        Ok(())
    };

    if args.replicas == 1 {
        let seq = sampler.generate(args.length, stream_seed(args.seed, 0));
        write_seq(&seq, &args.out)?;
        outputs.push(args.out.clone());
    } else {
        let replicas = sampler.generate_replicas(
            args.length,
            args.seed,
            args.replicas,
            threads_or_auto(args.threads),
        );
        let stem = args.out.file_stem().unwrap_or_default().to_os_string();
        let ext = args.out.extension().map(|e| e.to_os_string());
        for (k, seq) in replicas.iter().enumerate() {
            let mut name = stem.clone();
            name.push(format!("_{k:04}"));
            let mut path = args.out.with_file_name(name);
            if let Some(e) = &ext {
                path.set_extension(e);
            }
            write_seq(seq, &path)?;
            outputs.push(path);
        }
    }
    write_provenance(&provenance_path(&args.out), "generate", &args, &outputs)?;
    Ok(())
}

fn autocov(args: AutocovArgs) -> Result<(), CliError> {
    let descriptor = load_model(&args.model)?;
    let w = descriptor.build()?;
    let cov = solve_renewal(&w, args.horizon);
    let proxy = tail_proxy(&w, args.horizon);
    let mut csv = CsvWriter::create(&args.out, "t,c,rho,tail_proxy")?;
    for t in 0..=args.horizon {
        csv.row(format_args!(
            "{t},{},{},{}",
            cov.pair_probability(t),
            cov.autocovariance(t),
            proxy.value(t)
        ))?;
    }
    csv.finish()?;
    write_provenance(&provenance_path(&args.out), "autocov", &args, std::slice::from_ref(&args.out))?;
    Ok(())
}

fn read_covariance_csv(path: &Path) -> Result<CovarianceSequence, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read covariance {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let last = line.split(',').next_back().unwrap().trim();
        if lineno == 0 && last.parse::<f64>().is_err() {
            continue; // header line
        }
        let value: f64 = last
            .parse()
            .map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        values.push(value);
    }
    if values.len() < 2 {
        return Err(CliError::Config(
            "covariance input needs at least c_0 and c_1".into(),
        ));
    }
    Ok(CovarianceSequence::from_pair_probabilities(values))
}

fn invert(args: InvertArgs) -> Result<(), CliError> {
    let result: InversionResult = match (&args.model, &args.covariance) {
        (Some(model), None) => {
            let descriptor = load_model(model)?;
            match descriptor {
                ModelDescriptor::Inverse { .. } => descriptor.invert()?,
                _ => {
                    return Err(CliError::Config(
                        "invert --model expects an inverse-family descriptor".into(),
                    ))
                }
            }
        }
        (None, Some(path)) => {
            let mut cov = read_covariance_csv(path)?;
            if let Some(horizon) = args.horizon {
                if horizon < cov.horizon() {
                    cov = CovarianceSequence::from_pair_probabilities(
                        cov.pair_probabilities()[..=horizon].to_vec(),
                    );
                }
            }
            invert_autocovariance(&cov, args.clip_tol)?
        }
        _ => {
            return Err(CliError::Config(
                "invert needs exactly one of --model or --covariance".into(),
            ))
        }
    };

    let w = &result.distribution;
    let mut preamble = vec![
        format!("renseq invert v{}", env!("CARGO_PKG_VERSION")),
        format!(
            "horizon={} clip_tol={} clipped_mass={}",
            result.horizon, args.clip_tol, result.clipped_mass
        ),
        format!(
            "mean={} mean_gap={} extrapolated_from={}",
            w.mean(),
            result.mean_gap,
            result
                .extrapolated_from
                .map_or("none".to_string(), |t| t.to_string())
        ),
    ];
    if let Some(t) = result.kaluza_violation {
        preamble.push(format!("warning: input violates the Kaluza inequality at t={t}"));
    }
    let mut csv = CsvWriter::create_with_preamble(&args.out, &preamble, "s,p")?;
    for s in 1..=w.support_max() {
        csv.row(format_args!("{s},{}", w.density(s)))?;
    }
    csv.finish()?;
    write_provenance(&provenance_path(&args.out), "invert", &args, std::slice::from_ref(&args.out))?;
    Ok(())
}

fn entropy(args: EntropyArgs) -> Result<(), CliError> {
    if args.block == 0 {
        return Err(CliError::Config("block must be at least 1".into()));
    }
    let descriptor = load_model(&args.model)?;
    let w = descriptor.build()?;
    let summary = entropy_summary(&w, args.block);
    let json = serde_json::json!({
        "waiting_entropy": summary.waiting_entropy,
        "entropy_rate": summary.entropy_rate,
        "block_entropy": summary.block_entropy,
        "block_len": summary.block_len,
        "mean": w.mean(),
    });
    let text = serde_json::to_string_pretty(&json).expect("json");
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text)?;
        write_provenance(&provenance_path(out), "entropy", &args, std::slice::from_ref(out))?;
    }
    Ok(())
}

fn loglik(args: LoglikArgs) -> Result<(), CliError> {
    let descriptor = load_model(&args.model)?;
    let w = descriptor.build()?;
    let seq = BinarySequence::load(&args.input)?;
    let ll = log_likelihood(&w, &seq)?;
    let summary = entropy_summary(&w, 1);
    let json = serde_json::json!({
        "log_likelihood": ll.value,
        "aep_statistic": ll.aep_statistic,
        "length": seq.len(),
        "ones": seq.ones(),
        "waiting_entropy": summary.waiting_entropy,
        "entropy_rate": summary.entropy_rate,
    });
    let text = serde_json::to_string_pretty(&json).expect("json");
    println!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text)?;
        write_provenance(&provenance_path(out), "loglik", &args, std::slice::from_ref(out))?;
    }
    Ok(())
}

fn report_row(csv: &mut CsvWriter, report: &EstimationReport) -> Result<(), CliError> {
    csv.row(format_args!(
        "{},{},{},{},{},{},{}",
        report.target.label(),
        report.target.index(),
        report.estimate,
        report.true_value,
        report.variance,
        report.half_width,
        report.sample_len
    ))
}

fn estimate(args: EstimateArgs) -> Result<(), CliError> {
    let descriptor = load_model(&args.model)?;
    let w = descriptor.build()?;
    let seq = BinarySequence::load(&args.input)?;
    let indices: Vec<usize> = match (args.index, args.max_index) {
        (Some(i), None) => vec![i],
        (None, Some(m)) => match args.target {
            EstimateTargetArg::P => (1..=m).collect(),
            EstimateTargetArg::Rho => (0..=m).collect(),
            EstimateTargetArg::Mean => vec![0],
        },
        (None, None) => match args.target {
            EstimateTargetArg::P => vec![1],
            EstimateTargetArg::Rho => vec![1],
            EstimateTargetArg::Mean => vec![0],
        },
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "pass at most one of --index and --max-index".into(),
            ))
        }
    };

    let mut csv = CsvWriter::create(&args.out, "target,index,estimate,truth,v,half_width,t")?;
    match args.target {
        EstimateTargetArg::P => {
            if indices.len() > 1 {
                let max = *indices.iter().max().unwrap();
                let profile = waiting_time_profile(&seq, &w, max)?;
                for &s in &indices {
                    report_row(&mut csv, &profile[s - 1])?;
                }
            } else {
                for &s in &indices {
                    let report = estimate_waiting_time(&seq, &w, s)?;
                    report_row(&mut csv, &report)?;
                }
            }
        }
        EstimateTargetArg::Rho => {
            let max = indices.iter().copied().max().unwrap_or(0);
            let cov = solve_renewal(&w, max.max(1));
            if indices.len() > 1 {
                let profile = autocovariance_profile(&seq, &w, &cov, max)?;
                for &tau in &indices {
                    report_row(&mut csv, &profile[tau].report)?;
                }
            } else {
                for &tau in &indices {
                    let est = estimate_autocovariance(&seq, &w, &cov, tau)?;
                    report_row(&mut csv, &est.report)?;
                }
            }
        }
        EstimateTargetArg::Mean => {
            let report = estimate_mean_rate(&seq, &w);
            report_row(&mut csv, &report)?;
        }
    }
    csv.finish()?;
    write_provenance(&provenance_path(&args.out), "estimate", &args, std::slice::from_ref(&args.out))?;
    Ok(())
}

fn mixing(args: MixingArgs) -> Result<(), CliError> {
    if args.max_lag == 0 {
        return Err(CliError::Config("max-lag must be at least 1".into()));
    }
    let descriptor = load_model(&args.model)?;
    let w = descriptor.build()?;
    let horizon = if args.rho_horizon == 0 {
        (args.max_lag * 16).max(4_096)
    } else {
        args.rho_horizon
    };
    let cov = solve_renewal(&w, horizon);
    let bounds = alpha_mixing_bound(&w, &cov, args.max_lag, args.tol)?;
    let preamble = vec![format!(
        "rho_horizon={horizon} convergence_tol={}",
        args.tol
    )];
    let mut csv = CsvWriter::create_with_preamble(&args.out, &preamble, "t,alpha_bound,partial_sum")?;
    for t in 1..=args.max_lag {
        csv.row(format_args!("{t},{},{}", bounds.bound(t), bounds.partial_sum(t)))?;
    }
    csv.finish()?;
    write_provenance(&provenance_path(&args.out), "mixing", &args, std::slice::from_ref(&args.out))?;
    Ok(())
}

// ---------------------------------------------------------------------
// The figures pipeline.

struct FigureJob {
    name: &'static str,
    descriptor: ModelDescriptor,
}

fn figure_jobs() -> Vec<FigureJob> {
    use renseq::model::PhiDescriptor;
    let inverse = |phi: PhiDescriptor, horizon: usize| ModelDescriptor::Inverse {
        xi: 0.5,
        m: 0.25,
        phi,
        horizon,
        clip_tol: 1e-10,
    };
    vec![
        FigureJob {
            name: "gamma2",
            descriptor: inverse(PhiDescriptor::PowerLog { gamma: 2.0 }, DEFAULT_INVERSION_HORIZON),
        },
        FigureJob {
            name: "gamma4",
            descriptor: inverse(PhiDescriptor::PowerLog { gamma: 4.0 }, DEFAULT_INVERSION_HORIZON),
        },
        FigureJob {
            name: "beta05",
            descriptor: inverse(
                PhiDescriptor::Stretched { beta: 0.5, kappa: 1.0 },
                DEFAULT_INVERSION_HORIZON,
            ),
        },
        FigureJob {
            name: "beta1",
            descriptor: inverse(PhiDescriptor::Stretched { beta: 1.0, kappa: 1.0 }, 2_000),
        },
    ]
}

fn figures(args: FiguresArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out)?;
    let lengths: [usize; 2] = if args.desk_scale {
        [100_000, 1_000_000]
    } else {
        [1_000_000, 100_000_000]
    };
    let jobs = figure_jobs();
    let threads = threads_or_auto(args.threads);

    // Invert the four models (in parallel when allowed).
    let mut models: Vec<Option<WaitingTimeDistribution>> = (0..jobs.len()).map(|_| None).collect();
    std::thread::scope(|scope| -> Result<(), CliError> {
        let mut handles = Vec::new();
        for (slot, job) in models.iter_mut().zip(jobs.iter()) {
            if threads > 1 {
                handles.push(scope.spawn(move || -> Result<(), renseq::Error> {
                    *slot = Some(job.descriptor.build()?);
                    Ok(())
                }));
            } else {
                *slot = Some(job.descriptor.build().map_err(CliError::from)?);
            }
        }
        for h in handles {
            h.join().expect("figure worker panicked")?;
        }
        Ok(())
    })?;
    let models: Vec<WaitingTimeDistribution> = models.into_iter().map(|m| m.unwrap()).collect();

    let mut outputs = Vec::new();

    // Figures 1-2: prescribed autocovariance against the inverted model's
    // tail proxy, t = 0..=2000.
    let plot_horizon = 2_000usize;
    for (fig, names) in [("fig1", ["gamma2", "gamma4"]), ("fig2", ["beta05", "beta1"])] {
        let path = args.out.join(format!("{fig}.csv"));
        let mut csv = CsvWriter::create(&path, "model,t,c,rho,tail_proxy")?;
        for name in names {
            let idx = jobs.iter().position(|j| j.name == name).unwrap();
            let w = &models[idx];
            let cov = solve_renewal(w, plot_horizon);
            let proxy = tail_proxy(w, plot_horizon);
            for t in 0..=plot_horizon {
                csv.row(format_args!(
                    "{name},{t},{},{},{}",
                    cov.pair_probability(t),
                    cov.autocovariance(t),
                    proxy.value(t)
                ))?;
            }
        }
        csv.finish()?;
        outputs.push(path);
    }

    // Figures 3-6: estimation of p(s) and rho_tau from generated data at
    // the two sequence lengths.
    let max_s = 100usize;
    let max_tau = 60usize;
    let mut estimates: Vec<(usize, usize, Vec<EstimationReport>, Vec<EstimationReport>)> =
        Vec::new();
    for (mi, w) in models.iter().enumerate() {
        let sampler = Sampler::new(w).with_model_id(jobs[mi].descriptor.id());
        let cov = solve_renewal(w, max_tau);
        for (li, &len) in lengths.iter().enumerate() {
            let seq = sampler.generate(len, stream_seed(args.seed, (mi * 2 + li) as u64));
            let p_rows = waiting_time_profile(&seq, w, max_s)?;
            let rho_rows: Vec<EstimationReport> = autocovariance_profile(&seq, w, &cov, max_tau)?
                .into_iter()
                .map(|e| e.report)
                .collect();
            estimates.push((mi, li, p_rows, rho_rows));
        }
    }

    let figure_files = [
        ("fig3", ["gamma2", "gamma4"], true),
        ("fig4", ["beta05", "beta1"], true),
        ("fig5", ["gamma2", "gamma4"], false),
        ("fig6", ["beta05", "beta1"], false),
    ];
    for (fig, names, is_p) in figure_files {
        let path = args.out.join(format!("{fig}.csv"));
        let mut csv =
            CsvWriter::create(&path, "model,target,index,estimate,truth,v,half_width,t")?;
        for name in names {
            let mi = jobs.iter().position(|j| j.name == name).unwrap();
            for (emi, _eli, p_rows, rho_rows) in &estimates {
                if *emi != mi {
                    continue;
                }
                let rows = if is_p { p_rows } else { rho_rows };
                for report in rows {
                    csv.row(format_args!(
                        "{name},{},{},{},{},{},{},{}",
                        report.target.label(),
                        report.target.index(),
                        report.estimate,
                        report.true_value,
                        report.variance,
                        report.half_width,
                        report.sample_len
                    ))?;
                }
            }
        }
        csv.finish()?;
        outputs.push(path);
    }

    write_provenance(&args.out.join("provenance.json"), "figures", &args, &outputs)?;
    Ok(())
}
