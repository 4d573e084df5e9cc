use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndp_core::datasets::{load_scenario, SCENARIO_NAMES};
use ndp_core::io::{
    format_f64, load_data, read_weighted_sample, save_batch, write_json, write_weighted_sample, ConfigFile,
};
use ndp_core::kde::{effective_count, scott_factor, weighted_std};
use ndp_core::posterior::{law_of_with, probability_below, standard_error};
use ndp_core::rng::{stream, StreamPurpose};
use ndp_core::{
    enumerate_posterior, expectation, kde, run_batch, scott_bandwidth, trim_heaviest, Bandwidth, EngineOptions,
    Functional, GamerParams, GridSpec, LawOptions, ModelConfig, NdpError, ObservationArray,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{config_hash, unix_now, Manifest};
use crate::svg::line_plot;
use crate::{DensityArgs, ExamplesAction, GamerAction, GamerShape, GridArgs, InferArgs, InputArgs, OracleArgs};

const DEFAULT_NUM_SIMS: usize = 10_000;

/// Observations and model resolved from either a scenario or a file pair.
struct Input {
    source: Source,
    row_ids: Vec<String>,
    data: ObservationArray,
    config: ModelConfig,
    config_file: ConfigFile,
    defaults: Option<ScenarioDefaults>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
enum Source {
    Scenario(String),
    Files { data: String, config: String },
}

struct ScenarioDefaults {
    num_sims: usize,
    log_scale_factor: f64,
    trim: usize,
    targets: Vec<(String, f64)>,
}

fn resolve_input(args: &InputArgs) -> CliResult<Input> {
    if let Some(name) = &args.scenario {
        let s = load_scenario(name)?;
        let config_file = s.config_file();
        return Ok(Input {
            source: Source::Scenario(name.clone()),
            row_ids: s.row_ids,
            data: s.data,
            config: s.config,
            config_file,
            defaults: Some(ScenarioDefaults {
                num_sims: s.num_sims,
                log_scale_factor: s.log_scale_factor,
                trim: s.trim,
                targets: s.targets.into_iter().map(|t| (t.query, t.value)).collect(),
            }),
        });
    }
    match (&args.data, &args.config) {
        (Some(data_path), Some(config_path)) => {
            let text = fs::read_to_string(config_path).map_err(|e| CliError::at(config_path, e))?;
            let config_file: ConfigFile =
                serde_json::from_str(&text).map_err(|e| CliError::core_at(config_path, e.into()))?;
            let config = config_file.to_config().map_err(|e| CliError::core_at(config_path, e))?;
            let loaded =
                load_data(data_path, Some(config.num_states())).map_err(|e| CliError::core_at(data_path, e))?;
            Ok(Input {
                source: Source::Files {
                    data: data_path.display().to_string(),
                    config: config_path.display().to_string(),
                },
                row_ids: loaded.row_ids,
                data: loaded.data,
                config,
                config_file,
                defaults: None,
            })
        }
        _ => Err(CliError::Usage("give either --scenario NAME or both --data and --config".into())),
    }
}

/// A query string with an optional trailing `below T`.
#[derive(Debug, Clone)]
struct QuerySpec {
    text: String,
    functional: Functional,
    below: Option<f64>,
}

fn parse_query(text: &str) -> CliResult<QuerySpec> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let (body, below) = match tokens.len() {
        n if n >= 2 && tokens[n - 2] == "below" => {
            let t: f64 =
                tokens[n - 1].parse().ok().filter(|t: &f64| t.is_finite()).ok_or_else(|| {
                    NdpError::Parse(format!("`below` needs a finite number, got `{}`", tokens[n - 1]))
                })?;
            (tokens[..n - 2].join(" "), Some(t))
        }
        _ => (tokens.join(" "), None),
    };
    Ok(QuerySpec { text: text.trim().to_owned(), functional: Functional::parse(&body)?, below })
}

#[derive(Debug, Serialize)]
struct EssReport {
    prime: f64,
    double_prime: f64,
}

#[derive(Debug, Serialize)]
struct QueryReport {
    index: usize,
    query: String,
    functional: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    below: Option<f64>,
    /// E[f], or P(f < T) when `below` is set.
    value: f64,
    standard_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability_below: Option<f64>,
    mean: f64,
    atoms: usize,
    effective_atoms: f64,
    weighted_std: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    scott_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scott_bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_value: Option<f64>,
    sample_file: String,
}

#[derive(Debug, Serialize)]
struct InferReport {
    source: Source,
    config: ConfigFile,
    config_sha256: String,
    seed: u64,
    num_sims: usize,
    log_scale_factor: f64,
    trimmed: usize,
    num_rows: usize,
    num_states: usize,
    row_ids: Vec<String>,
    ess: EssReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    ess_after_trim: Option<EssReport>,
    prior_samples: usize,
    queries: Vec<QueryReport>,
}

fn canonical(f: &Functional) -> String {
    f.to_string()
}

pub fn infer(args: &InferArgs, command_line: &[String]) -> CliResult<()> {
    let started = unix_now();
    let input = resolve_input(&args.input)?;
    let defaults = input.defaults.as_ref();
    let num_sims = args.num_sims.or(defaults.map(|d| d.num_sims)).unwrap_or(DEFAULT_NUM_SIMS);
    let log_c = args.log_scale.or(defaults.map(|d| d.log_scale_factor)).unwrap_or(0.0);
    let trim = args.trim.or(defaults.map(|d| d.trim)).unwrap_or(0);
    if num_sims == 0 {
        return Err(CliError::Usage("--K must be at least 1".into()));
    }
    if trim >= num_sims {
        return Err(CliError::Usage(format!("--trim {trim} leaves no simulations out of {num_sims}")));
    }
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }

    let query_texts: Vec<String> = if args.queries.is_empty() {
        defaults.map(|d| d.targets.iter().map(|t| t.0.clone()).collect()).unwrap_or_default()
    } else {
        args.queries.clone()
    };
    let specs = query_texts.iter().map(|q| parse_query(q)).collect::<CliResult<Vec<_>>>()?;
    for spec in &specs {
        spec.functional.validate(input.data.num_rows(), input.data.num_states())?;
    }

    let mut options = EngineOptions::new(num_sims, args.seed).with_log_scale_factor(log_c);
    if let Some(t) = args.threads {
        options = options.with_threads(t);
    }
    log::info!("running {num_sims} simulations on {} rows", input.data.num_rows());
    let full = run_batch(&input.data, &input.config, &options)?;
    let batch = if trim > 0 { trim_heaviest(&full, trim)? } else { full.clone() };

    fs::create_dir_all(&args.out)?;
    let mut outputs = Vec::new();
    let law_opts = LawOptions { prior_samples: args.prior_samples, prior_seed: None };
    let mut queries = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let index = i + 1;
        let law = law_of_with(&batch, &spec.functional, &law_opts)?;
        let sample_name = format!("query_{index}.csv");
        let sample_path = args.out.join(&sample_name);
        write_weighted_sample(fs::File::create(&sample_path)?, &law)?;
        outputs.push(sample_path.display().to_string());

        let mean = expectation(&law);
        let (value, se, below_p) = match spec.below {
            None => (mean, standard_error(&batch, &spec.functional, &law_opts)?, None),
            Some(t) => {
                let p = probability_below(&law, t);
                let indicator = Functional::IndicatorLt { inner: Box::new(spec.functional.clone()), threshold: t };
                let se = standard_error(&batch, &indicator, &law_opts)?;
                (p, se, Some(p))
            }
        };
        let key = match spec.below {
            None => canonical(&spec.functional),
            Some(t) => canonical(&Functional::IndicatorLt { inner: Box::new(spec.functional.clone()), threshold: t }),
        };
        let reference_value = defaults.and_then(|d| {
            d.targets
                .iter()
                .find(|(q, _)| Functional::parse(q).map(|f| canonical(&f) == key).unwrap_or(false))
                .map(|t| t.1)
        });
        queries.push(QueryReport {
            index,
            query: spec.text.clone(),
            functional: canonical(&spec.functional),
            below: spec.below,
            value,
            standard_error: se,
            probability_below: below_p,
            mean,
            atoms: law.len(),
            effective_atoms: effective_count(&law),
            weighted_std: weighted_std(&law),
            scott_factor: scott_factor(&law).ok(),
            scott_bandwidth: scott_bandwidth(&law).ok(),
            reference_value,
            sample_file: sample_name,
        });
    }

    let hash = config_hash(&input.config_file)?;
    let ess_full = full.ess();
    let report = InferReport {
        source: input.source.clone(),
        config: input.config_file.clone(),
        config_sha256: hash.clone(),
        seed: args.seed,
        num_sims,
        log_scale_factor: log_c,
        trimmed: trim,
        num_rows: input.data.num_rows(),
        num_states: input.data.num_states(),
        row_ids: input.row_ids.clone(),
        ess: EssReport { prime: ess_full.prime, double_prime: ess_full.double_prime },
        ess_after_trim: (trim > 0).then(|| {
            let e = batch.ess();
            EssReport { prime: e.prime, double_prime: e.double_prime }
        }),
        prior_samples: args.prior_samples,
        queries,
    };
    let report_path = args.out.join("report.json");
    write_json(&report_path, &report)?;
    outputs.insert(0, report_path.display().to_string());
    if args.save_batch {
        let batch_path = args.out.join("batch.json");
        save_batch(&batch_path, &full)?;
        outputs.push(batch_path.display().to_string());
    }

    let manifest = Manifest {
        tool: "ndp",
        version: env!("CARGO_PKG_VERSION"),
        command_line: command_line.to_vec(),
        config_sha256: hash,
        seed: args.seed,
        num_sims,
        log_scale_factor: log_c,
        trim,
        threads: args.threads,
        started_unix: started,
        finished_unix: unix_now(),
        outputs,
    };
    manifest.write(&args.out)?;

    let mut out = io::stdout().lock();
    writeln!(out, "ESS' = {:.1}  ESS'' = {:.1}", ess_full.prime, ess_full.double_prime)?;
    if let Some(e) = &report.ess_after_trim {
        writeln!(out, "after trimming {trim}: ESS' = {:.1}  ESS'' = {:.1}", e.prime, e.double_prime)?;
    }
    for q in &report.queries {
        write!(out, "[{}] {} = {:.6} (se {:.6})", q.index, q.query, q.value, q.standard_error)?;
        if let Some(r) = q.reference_value {
            write!(out, "  reference {r}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "wrote {}", args.out.display())?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct GridInfo {
    from: f64,
    to: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct DensityReport {
    samples: String,
    bandwidth: f64,
    bandwidth_rule: &'static str,
    scott_factor: f64,
    weighted_std: f64,
    effective_atoms: f64,
    total_mass: f64,
    integral: f64,
    grid: GridInfo,
}

fn parse_clip(text: &str) -> CliResult<(f64, f64)> {
    let bad = || CliError::Usage(format!("--clip expects LO,HI with LO < HI, got `{text}`"));
    let (lo, hi) = text.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(bad())
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn density(args: &DensityArgs) -> CliResult<()> {
    let file = fs::File::open(&args.samples).map_err(|e| CliError::at(&args.samples, e))?;
    let law = read_weighted_sample(file).map_err(|e| CliError::core_at(&args.samples, e))?;
    let (bandwidth, rule) = match args.bandwidth.as_str() {
        "auto" | "scott" => (Bandwidth::Auto, "scott"),
        other => {
            let h: f64 = other
                .parse()
                .map_err(|_| CliError::Usage(format!("--bandwidth must be `auto` or a number, got `{other}`")))?;
            (Bandwidth::Fixed(h), "fixed")
        }
    };
    let clip = args.clip.as_deref().map(parse_clip).transpose()?;
    let grid = GridSpec { points: args.points, range: None, clip };
    let curve = kde(&law, bandwidth, &grid)?;

    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let csv_path = with_suffix(&args.out, ".csv");
    let mut w = BufWriter::new(fs::File::create(&csv_path)?);
    writeln!(w, "x,density")?;
    for (x, y) in curve.grid.iter().zip(&curve.values) {
        writeln!(w, "{},{}", format_f64(*x), format_f64(*y))?;
    }
    w.flush()?;

    let report = DensityReport {
        samples: args.samples.display().to_string(),
        bandwidth: curve.bandwidth,
        bandwidth_rule: rule,
        scott_factor: scott_factor(&law)?,
        weighted_std: weighted_std(&law),
        effective_atoms: effective_count(&law),
        total_mass: law.total_mass(),
        integral: curve.integral(),
        grid: GridInfo { from: curve.grid[0], to: curve.grid[curve.grid.len() - 1], points: curve.grid.len() },
    };
    write_json(&with_suffix(&args.out, ".json"), &report)?;
    if args.svg {
        let title = args.samples.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        fs::write(with_suffix(&args.out, ".svg"), line_plot(&curve.grid, &curve.values, &title))?;
    }
    println!("bandwidth {:.6} (factor {:.6}), integral {:.6}", report.bandwidth, report.scott_factor, report.integral);
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleQuery {
    query: String,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_value: Option<f64>,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    source: Source,
    config: ConfigFile,
    num_rows: usize,
    partition_count: usize,
    log_evidence: f64,
    top_partitions: Vec<ndp_core::oracle::RankedPartition>,
    queries: Vec<OracleQuery>,
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let input = resolve_input(&args.input)?;
    // Scenario targets that need sampling (indicators) are skipped by default.
    let defaults: Vec<(String, f64)> = input.defaults.as_ref().map(|d| d.targets.clone()).unwrap_or_default();
    let explicit = !args.queries.is_empty();
    let texts: Vec<String> =
        if explicit { args.queries.clone() } else { defaults.iter().map(|t| t.0.clone()).collect() };
    let functionals = texts
        .iter()
        .map(|q| {
            let spec = parse_query(q)?;
            if spec.below.is_some() {
                return Err(CliError::Core(NdpError::Unsupported(format!(
                    "`{q}`: the oracle gives exact expectations only"
                ))));
            }
            Ok((spec.text, spec.functional))
        })
        .collect::<CliResult<Vec<_>>>()?;
    for (_, f) in &functionals {
        f.validate(input.data.num_rows(), input.data.num_states())?;
    }

    let post = enumerate_posterior(&input.data, &input.config)?;
    let mut queries = Vec::new();
    for (text, f) in &functionals {
        let value = match post.expectation(f) {
            Ok(v) => v,
            Err(NdpError::Unsupported(_)) if !explicit => continue,
            Err(e) => return Err(e.into()),
        };
        let reference_value = defaults.iter().find(|(q, _)| q == text).map(|t| t.1);
        queries.push(OracleQuery { query: text.clone(), value, reference_value });
    }
    let report = OracleReport {
        source: input.source,
        config: input.config_file,
        num_rows: post.num_rows(),
        partition_count: post.num_partitions(),
        log_evidence: post.log_evidence(),
        top_partitions: post.top(args.top),
        queries,
    };
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            write_json(path, &report)?;
        }
        None => println!("{}", ndp_core::io::to_json_string(&report)?),
    }
    Ok(())
}

fn gamer_params(shape: &GamerShape) -> CliResult<GamerParams> {
    Ok(GamerParams::new(shape.r, shape.c, shape.alpha)?)
}

fn grid_points(grid: &GridArgs) -> CliResult<Vec<f64>> {
    if !(grid.from.is_finite() && grid.to.is_finite() && grid.to > grid.from && grid.from >= 0.0) {
        return Err(CliError::Usage(format!("need 0 <= --from < --to, got [{}, {}]", grid.from, grid.to)));
    }
    if grid.points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let step = (grid.to - grid.from) / (grid.points - 1) as f64;
    Ok((0..grid.points).map(|i| grid.from + step * i as f64).collect())
}

fn open_output(path: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(fs::File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn gamer(action: &GamerAction) -> CliResult<()> {
    match action {
        GamerAction::Pdf { shape, grid, out } => {
            let g = gamer_params(shape)?;
            let mut w = open_output(out)?;
            writeln!(w, "x,pdf")?;
            for x in grid_points(grid)?.into_iter().filter(|&x| x > 0.0) {
                writeln!(w, "{},{}", format_f64(x), format_f64(g.pdf(x)?))?;
            }
            w.flush()?;
        }
        GamerAction::Cdf { shape, grid, out } => {
            let g = gamer_params(shape)?;
            let xs = grid_points(grid)?;
            let fs = g.cdf_sorted(&xs)?;
            let mut w = open_output(out)?;
            writeln!(w, "x,cdf")?;
            for (x, f) in xs.iter().zip(fs) {
                writeln!(w, "{},{}", format_f64(*x), format_f64(f))?;
            }
            w.flush()?;
        }
        GamerAction::Sample { shape, n, seed, out } => {
            let g = gamer_params(shape)?;
            let mut rng = stream(*seed, StreamPurpose::Auxiliary, 0);
            let mut w = open_output(out)?;
            writeln!(w, "x")?;
            for _ in 0..*n {
                writeln!(w, "{}", format_f64(g.sample(&mut rng)))?;
            }
            w.flush()?;
        }
        GamerAction::Discretize { shape, num_states, out } => {
            let g = gamer_params(shape)?;
            let p = g.discretize(*num_states)?;
            let mut w = open_output(out)?;
            writeln!(w, "state,probability")?;
            for (l, v) in p.as_slice().iter().enumerate() {
                writeln!(w, "{l},{}", format_f64(*v))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn examples(action: &ExamplesAction) -> CliResult<()> {
    match action {
        ExamplesAction::List => {
            let mut out = io::stdout().lock();
            for name in SCENARIO_NAMES {
                let s = load_scenario(name)?;
                writeln!(
                    out,
                    "{name:<10} rows {:>3}  states {:>3}  K {:>6}  log c {:>5}  trim {}",
                    s.data.num_rows(),
                    s.data.num_states(),
                    s.num_sims,
                    s.log_scale_factor,
                    s.trim
                )?;
            }
        }
        ExamplesAction::Export { names, out } => {
            let selected: Vec<&str> =
                if names.is_empty() { SCENARIO_NAMES.to_vec() } else { names.iter().map(String::as_str).collect() };
            for name in selected {
                for path in load_scenario(name)?.export(out)? {
                    println!("{}", path.display());
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn below_suffix_is_split_off() {
        let q = parse_query("component 5 1 below 0.5").unwrap();
        assert_eq!(q.below, Some(0.5));
        assert_eq!(q.functional, Functional::Component { row: 5, state: 1 });
        let q = parse_query("lt new_agent_mean 2").unwrap();
        assert_eq!(q.below, None);
        assert!(parse_query("mean_score 1 below x").is_err());
        assert!(parse_query("below 3").is_err());
    }

    #[test]
    fn suffix_appends_to_prefix() {
        assert_eq!(with_suffix(Path::new("out/kde"), ".csv"), PathBuf::from("out/kde.csv"));
    }

    #[test]
    fn clip_needs_ordered_pair() {
        assert_eq!(parse_clip("-1,2.5").unwrap(), (-1.0, 2.5));
        assert!(parse_clip("1,0").is_err());
        assert!(parse_clip("1").is_err());
    }
}
