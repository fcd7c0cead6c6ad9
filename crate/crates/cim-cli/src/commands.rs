use crate::io::{parse_increment, read_dataset, select_pair, sig6, CliError, CliResult};
use crate::{CimArgs, DepsArgs, NetworkArgs, NullArgs, PowerArgs, SynthArgs};
use cim_core::power::{minimum_n_for_power, power_table, PowerPattern};
use cim_core::synth::{
    gen_markov_chain, gen_parabola, gen_pattern, sample_copula, CopulaFamily, CopulaSpec, Margin,
    Pattern, PatternSpec,
};
use cim_core::{
    calibrate_null, compute_cim, monotonicity_census, mrnet, p_value, pairwise_matrix,
    region_count, CimResult, DependencyMatrix, DimensionKind, Network, NullModel, NullRegistry,
    Orientation, SamplePairs, ScanConfig, Statistic,
};
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

fn scan_config(msi: &str, alpha: f64) -> CliResult<ScanConfig> {
    let cfg = ScanConfig {
        msi: parse_increment(msi)?,
        alpha,
        ..ScanConfig::default()
    };
    cfg.validate().map_err(CliError::from)?;
    Ok(cfg)
}

fn orientation_name(o: Orientation) -> &'static str {
    match o {
        Orientation::UScansV => "u_scans_v",
        Orientation::VScansU => "v_scans_u",
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)
        .map_err(|e| CliError::Data(format!("cannot serialize to {}: {e}", path.display())))?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(serde::Serialize)]
struct CimReport {
    n: u64,
    cim: f64,
    tau_kl: f64,
    region_count: usize,
    winning_si: f64,
    winning_orientation: String,
    winning_split: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    regions: Vec<RegionRow>,
}

#[derive(serde::Serialize)]
struct RegionRow {
    scan_lo: f64,
    scan_hi: f64,
    cross_lo: f64,
    cross_hi: f64,
    tau_kl: f64,
    count: u64,
}

fn region_rows(result: &CimResult) -> Vec<RegionRow> {
    result
        .regions
        .iter()
        .map(|r| RegionRow {
            scan_lo: r.scan_axis_interval.0,
            scan_hi: r.scan_axis_interval.1,
            cross_lo: r.cross_axis_interval.0,
            cross_hi: r.cross_axis_interval.1,
            tau_kl: r.tau_kl,
            count: r.sample_count,
        })
        .collect()
}

pub fn cmd_cim(args: CimArgs) -> CliResult<()> {
    let cfg = scan_config(&args.msi, args.alpha)?;
    let data = read_dataset(&args.input, args.drop_incomplete_rows)?;
    let (i, j) = select_pair(&data, &args.cols)?;
    let samples = SamplePairs::new(data.columns()[i].clone(), data.columns()[j].clone())?;
    let result = compute_cim(&samples, &cfg)?;

    let p = match &args.null {
        Some(path) => {
            let model = load_null_model(path)?;
            Some(p_value(&model, result.value, Some(&cfg))?)
        }
        None => None,
    };

    let report = CimReport {
        n: result.n,
        cim: result.value,
        tau_kl: result.tau_kl_global,
        region_count: region_count(&result, 0.05),
        winning_si: result.winning_si,
        winning_orientation: orientation_name(result.winning_orientation).to_string(),
        winning_split: result.winning_split,
        p_value: p,
        regions: region_rows(&result),
    };

    println!("n: {}", report.n);
    println!("cim: {}", sig6(report.cim));
    println!("tau_kl: {}", sig6(report.tau_kl));
    println!("regions: {}", report.region_count);
    println!(
        "winning: si={} orientation={} split={}",
        sig6(report.winning_si),
        report.winning_orientation,
        report.winning_split
    );
    if let Some(p) = report.p_value {
        println!("p_value: {}", sig6(p));
    }
    for (k, r) in report.regions.iter().enumerate() {
        println!(
            "region {}: scan=[{},{}) cross=[{},{}) tau_kl={} count={}",
            k + 1,
            sig6(r.scan_lo),
            sig6(r.scan_hi),
            sig6(r.cross_lo),
            sig6(r.cross_hi),
            sig6(r.tau_kl),
            r.count
        );
    }

    if let Some(out) = &args.out {
        if args.format == "json" {
            write_json(out, &report)?;
        } else {
            let mut w = csv::Writer::from_path(out)?;
            for r in &report.regions {
                w.serialize(r)
                    .map_err(|e| CliError::Data(format!("cannot write {}: {e}", out.display())))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn load_null_model(path: &Path) -> CliResult<NullModel> {
    let f = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(f)
        .map_err(|e| CliError::Data(format!("cannot parse null model {}: {e}", path.display())))
}

#[derive(serde::Serialize)]
struct PairRow {
    i: usize,
    j: usize,
    label_i: String,
    label_j: String,
    value: f64,
    p: f64,
    regions: usize,
}

fn pair_rows(matrix: &DependencyMatrix) -> Vec<PairRow> {
    let d = matrix.dim();
    let mut rows = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            rows.push(PairRow {
                i,
                j,
                label_i: matrix.labels[i].clone(),
                label_j: matrix.labels[j].clone(),
                value: matrix.values[i][j],
                p: matrix.p_values[i][j],
                regions: matrix.region_counts[i][j],
            });
        }
    }
    rows
}

pub fn cmd_deps(args: DepsArgs) -> CliResult<()> {
    let cfg = scan_config(&args.msi, args.alpha)?;
    let data = read_dataset(&args.input, args.drop_incomplete_rows)?;
    if data.n_cols() < 2 {
        return Err(CliError::Config("need at least 2 columns".into()));
    }
    let mut registry = NullRegistry::new(cfg.clone(), args.null_replicates, args.seed);
    let matrix = pairwise_matrix(&data, &cfg, &mut registry)?;
    let n_pairs = matrix.dim() * (matrix.dim() - 1) / 2;
    let sig_level = if args.bonferroni {
        args.sig_level / n_pairs as f64
    } else {
        args.sig_level
    };
    let census = monotonicity_census(&matrix, args.strength_min, sig_level);

    println!("pairs: {n_pairs}");
    if args.bonferroni {
        println!("sig_level (bonferroni): {}", sig6(sig_level));
    }
    println!("significant: {}", census.n_significant);
    println!("monotone: {}", census.n_monotone);
    println!("fraction_monotone: {}", sig6(census.fraction_monotone));

    let rows = pair_rows(&matrix);
    match &args.out {
        Some(prefix) => {
            let pairs_path = suffixed(prefix, "_pairs.csv");
            let mut w = csv::Writer::from_path(&pairs_path)?;
            for row in &rows {
                w.serialize(row).map_err(|e| {
                    CliError::Data(format!("cannot write {}: {e}", pairs_path.display()))
                })?;
            }
            w.flush()?;
            #[derive(serde::Serialize)]
            struct Summary<'a> {
                census: &'a cim_core::CensusSummary,
                strength_min: f64,
                sig_level: f64,
                n_rows: usize,
                labels: &'a [String],
            }
            write_json(
                &suffixed(prefix, "_summary.json"),
                &Summary {
                    census: &census,
                    strength_min: args.strength_min,
                    sig_level,
                    n_rows: data.n_rows(),
                    labels: matrix.labels.as_slice(),
                },
            )?;
        }
        None => {
            if args.format == "json" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&rows)
                        .map_err(|e| CliError::Data(e.to_string()))?
                );
            } else {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                for row in &rows {
                    w.serialize(row).map_err(|e| CliError::Data(e.to_string()))?;
                }
                w.flush()?;
            }
        }
    }
    Ok(())
}

fn parse_kinds(text: &str) -> CliResult<(DimensionKind, DimensionKind)> {
    let parts: Vec<&str> = text.split(',').map(|p| p.trim()).collect();
    if parts.len() != 2 {
        return Err(CliError::Config(format!(
            "--kinds expects two comma-separated kinds, got '{text}'"
        )));
    }
    let parse_one = |p: &str| match p {
        "continuous" => Ok(DimensionKind::Continuous),
        "discrete" => Ok(DimensionKind::Discrete),
        other => Err(CliError::Config(format!(
            "unknown kind '{other}' (use continuous or discrete)"
        ))),
    };
    Ok((parse_one(parts[0])?, parse_one(parts[1])?))
}

pub fn cmd_null(args: NullArgs) -> CliResult<()> {
    let cfg = scan_config(&args.msi, args.alpha)?;
    let statistic = match args.statistic.as_str() {
        "tau_kl" => Statistic::TauKl,
        "cim" => Statistic::Cim,
        other => return Err(CliError::Config(format!("unknown statistic '{other}'"))),
    };
    let kinds = parse_kinds(&args.kinds)?;
    let model = calibrate_null(statistic, args.n, args.replicates, kinds, args.seed, &cfg)?;

    match model.fit {
        cim_core::NullFit::Gaussian { mean, sd } => {
            println!("fit: gaussian mean={} sd={}", sig6(mean), sig6(sd));
        }
        cim_core::NullFit::Beta { a, b } => {
            println!("fit: beta a={} b={}", sig6(a), sig6(b));
        }
    }
    match &args.out {
        Some(path) => write_json(path, &model)?,
        None => println!(
            "{}",
            serde_json::to_string(&model).map_err(|e| CliError::Data(e.to_string()))?
        ),
    }
    Ok(())
}

pub fn cmd_power(args: PowerArgs) -> CliResult<()> {
    let cfg = scan_config(&args.msi, args.alpha)?;
    let patterns: Vec<PowerPattern> = match &args.patterns {
        Some(list) => list
            .split(',')
            .map(|p| PowerPattern::parse(p.trim()).map_err(CliError::from))
            .collect::<CliResult<_>>()?,
        None => Pattern::ALL.iter().map(|p| PowerPattern::Functional(*p)).collect(),
    };
    let noise = parse_f64_list(&args.noise)?;
    let ns = parse_u64_list(&args.n)?;
    if noise.is_empty() || ns.is_empty() || patterns.is_empty() {
        return Err(CliError::Config("empty pattern, noise, or n grid".into()));
    }

    let cells = power_table(
        &patterns,
        &noise,
        &ns,
        args.replicates,
        args.sig_level,
        args.null_replicates,
        &cfg,
        args.seed,
    )?;

    for (pattern, noise, min_n) in minimum_n_for_power(&cells, args.target_power) {
        match min_n {
            Some(n) => println!(
                "{pattern} noise={}: minimum n for power {} is {n}",
                sig6(noise),
                sig6(args.target_power)
            ),
            None => println!(
                "{pattern} noise={}: power {} not reached on the n grid",
                sig6(noise),
                sig6(args.target_power)
            ),
        }
    }

    match &args.out {
        Some(path) => {
            if args.format == "json" {
                write_json(path, &cells)?;
            } else {
                let mut w = csv::Writer::from_path(path)?;
                for c in &cells {
                    w.serialize(c).map_err(|e| {
                        CliError::Data(format!("cannot write {}: {e}", path.display()))
                    })?;
                }
                w.flush()?;
            }
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for c in &cells {
                w.serialize(c).map_err(|e| CliError::Data(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn parse_f64_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad number '{p}' in list")))
        })
        .collect()
}

fn parse_u64_list(text: &str) -> CliResult<Vec<u64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Config(format!("bad count '{p}' in list")))
        })
        .collect()
}

fn parse_margin(text: &str) -> CliResult<Margin> {
    if text == "gaussian" {
        return Ok(Margin::ContinuousGaussian);
    }
    if let Some(levels) = text.strip_prefix("discrete") {
        let levels: u32 = levels
            .parse()
            .map_err(|_| CliError::Config(format!("bad margin '{text}'")))?;
        if levels < 2 {
            return Err(CliError::Config("discrete margins need >= 2 levels".into()));
        }
        return Ok(Margin::DiscreteUniform(levels));
    }
    Err(CliError::Config(format!(
        "unknown margin '{text}' (use gaussian or discrete<LEVELS>)"
    )))
}

pub fn cmd_synth(args: SynthArgs) -> CliResult<()> {
    let noise_sd = match args.noise_index {
        Some(index) => index as f64 / 10.0,
        None => args.noise_sd,
    };
    let (names, columns): (Vec<String>, Vec<Vec<f64>>) = if let Some(pattern) = &args.pattern {
        let s = gen_pattern(&PatternSpec {
            pattern: Pattern::parse(pattern)?,
            n: args.n,
            noise_sd,
            seed: args.seed,
        })?;
        (
            vec!["x".into(), "y".into()],
            vec![s.xs().to_vec(), s.ys().to_vec()],
        )
    } else if let Some(family) = &args.copula {
        let margins: Vec<&str> = args.margins.split(',').map(|m| m.trim()).collect();
        if margins.len() != 2 {
            return Err(CliError::Config(
                "--margins expects two comma-separated entries".into(),
            ));
        }
        let s = sample_copula(&CopulaSpec {
            family: CopulaFamily::parse(family)?,
            tau: args.tau,
            n: args.n,
            margins: (parse_margin(margins[0])?, parse_margin(margins[1])?),
            seed: args.seed,
        })?;
        (
            vec!["x".into(), "y".into()],
            vec![s.xs().to_vec(), s.ys().to_vec()],
        )
    } else if let Some(r) = args.parabola_r {
        let s = gen_parabola(r, noise_sd, args.n, args.seed)?;
        (
            vec!["x".into(), "y".into()],
            vec![s.xs().to_vec(), s.ys().to_vec()],
        )
    } else if let Some(vars) = args.markov_chain {
        let d = gen_markov_chain(vars, args.n, args.link_tau, args.seed)?;
        (d.names().to_vec(), d.columns().to_vec())
    } else {
        return Err(CliError::Config(
            "choose one of --pattern, --copula, --parabola-r, --markov-chain".into(),
        ));
    };

    let stdout;
    let file;
    let writer: Box<dyn Write> = match &args.out {
        Some(path) => {
            file = File::create(path)?;
            Box::new(file)
        }
        None => {
            stdout = std::io::stdout();
            Box::new(stdout)
        }
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&names)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let n_rows = columns[0].len();
    for row in 0..n_rows {
        let record: Vec<String> = columns.iter().map(|c| format!("{}", c[row])).collect();
        w.write_record(&record)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct EdgeRow {
    rank: usize,
    i: usize,
    j: usize,
    label_i: String,
    label_j: String,
    score: f64,
}

fn edge_rows(net: &Network) -> Vec<EdgeRow> {
    net.edges
        .iter()
        .enumerate()
        .map(|(rank, e)| EdgeRow {
            rank: rank + 1,
            i: e.i,
            j: e.j,
            label_i: net.labels[e.i].clone(),
            label_j: net.labels[e.j].clone(),
            score: e.score,
        })
        .collect()
}

pub fn cmd_network(args: NetworkArgs) -> CliResult<()> {
    let cfg = scan_config(&args.msi, args.alpha)?;
    let data = read_dataset(&args.input, args.drop_incomplete_rows)?;
    if data.n_cols() < 3 {
        return Err(CliError::Config(
            "network reconstruction needs at least 3 columns".into(),
        ));
    }
    let mut registry = NullRegistry::new(cfg.clone(), args.null_replicates, args.seed);
    let matrix = pairwise_matrix(&data, &cfg, &mut registry)?;
    let net = mrnet(&matrix)?;

    println!("edges: {}", net.edges.len());
    for row in edge_rows(&net).iter().take(10) {
        println!(
            "{}. {} -- {} score={}",
            row.rank,
            row.label_i,
            row.label_j,
            sig6(row.score)
        );
    }

    match &args.out {
        Some(prefix) => {
            let edges_path = suffixed(prefix, "_edges.csv");
            let mut w = csv::Writer::from_path(&edges_path)?;
            for row in edge_rows(&net) {
                w.serialize(row).map_err(|e| {
                    CliError::Data(format!("cannot write {}: {e}", edges_path.display()))
                })?;
            }
            w.flush()?;
            write_json(&suffixed(prefix, "_network.json"), &net)?;
        }
        None => {
            if args.format == "json" {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&net)
                        .map_err(|e| CliError::Data(e.to_string()))?
                );
            }
        }
    }
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
