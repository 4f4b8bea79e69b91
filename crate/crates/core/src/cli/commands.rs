use std::path::{Path, PathBuf};

use serde::Serialize;

use super::rows::*;
use super::{Cli, CliError, Command, ContextArgs, FitTable, GroupingArgs, PipelineArgs};
use crate::estimation::{
    compare_models, empirical_mean_pl_by_depth, fit_path_loss, shadowing_variance_by_depth, FitResult, GroupKey,
    Grouping, MeasurementDataset, Source,
};
use crate::io::{
    load_params, parse_csv_measurements, parse_touchstone, write_report, CsvMeasurementSchema, IngestedDataset,
    ParamRegistry, RegistryEntry, RunConfig, RunInfo, ValidationMode,
};
use crate::model::{
    concatenated_link_budget, mean_path_loss, outage_probability, required_tx_power, AnatomicalContext,
    AntennaParams, Direction, FrequencyBand, LinkBudgetRequest, Region,
};
use crate::montecarlo::{run_montecarlo, sample_trials, trial_rng};
use crate::multipath::{
    classify_channel, coherence_bandwidth, impulse_response, multipath_stats, path_loss_from_s21,
    power_delay_profile, ChannelClass, FrequencyResponse, PowerDelayProfile,
};
use crate::units::{self, UnitError};

impl From<UnitError> for CliError {
    fn from(e: UnitError) -> Self {
        CliError::usage(e.to_string())
    }
}

struct Session {
    config: RunConfig,
    params_path: Option<PathBuf>,
    seed: Option<u64>,
    verbose: u8,
}

impl Session {
    fn registry(&self) -> Result<ParamRegistry, CliError> {
        match &self.params_path {
            Some(p) => Ok(load_params(p)?),
            None => Ok(ParamRegistry::bundled()),
        }
    }

    fn params_label(&self) -> String {
        self.params_path.as_ref().map_or_else(|| "<bundled>".to_string(), |p| p.display().to_string())
    }

    fn require_seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::usage("this subcommand is stochastic: pass --seed or set seed in the config"))
    }

    fn run_info(&self, command: &str) -> RunInfo {
        RunInfo::new(command, &self.config)
    }

    fn emit<T: Serialize>(&self, run: &RunInfo, rows: &[T]) -> Result<Vec<u8>, CliError> {
        Ok(write_report(run, rows, self.config.format)?)
    }

    fn warn(&self, message: &str) {
        eprintln!("warning: {message}");
    }

    fn info(&self, message: &str) {
        if self.verbose > 0 {
            eprintln!("{message}");
        }
    }

    fn pipeline(&self, p: &PipelineArgs) -> Result<(crate::multipath::Window, usize, f64), CliError> {
        let window = p.window.unwrap_or(self.config.window);
        let pad = p.pad.unwrap_or(self.config.zero_pad_factor);
        let floor = match &p.floor {
            Some(s) => units::parse_db(s)?,
            None => self.config.noise_floor_db,
        };
        let mut cfg = self.config.clone();
        cfg.window = window;
        cfg.zero_pad_factor = pad;
        cfg.noise_floor_db = floor;
        cfg.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok((window, pad, floor))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn with_file<T>(path: &Path, r: Result<T, crate::io::IngestError>) -> Result<T, CliError> {
    r.map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })
}

fn resolve_context(args: &ContextArgs) -> Result<(FrequencyBand, AnatomicalContext), CliError> {
    let band: FrequencyBand = args.band.parse().map_err(CliError::usage)?;
    let region: Region = args.region.parse().map_err(CliError::usage)?;
    let direction = args.direction.as_deref().map(str::parse::<Direction>).transpose().map_err(CliError::usage)?;
    if direction.is_some() && region != Region::WholeTorso {
        return Err(CliError::usage("direction-keyed parameters exist for the whole torso only"));
    }
    Ok((band, AnatomicalContext { region, direction }))
}

fn lookup(
    registry: &ParamRegistry,
    band: FrequencyBand,
    context: AnatomicalContext,
) -> Result<&RegistryEntry, CliError> {
    registry
        .get(band, context)
        .ok_or_else(|| CliError::domain(format!("unknown context: no parameters for ({band}, {context})")))
}

fn context_run(run: RunInfo, band: FrequencyBand, context: AnatomicalContext) -> RunInfo {
    let run = run.param("band", band).param("region", context.region);
    match context.direction {
        Some(d) => run.param("direction", d),
        None => run,
    }
}

fn load_dataset(s: &Session, path: &Path, lenient: bool) -> Result<IngestedDataset, CliError> {
    let bytes = read(path)?;
    let schema = CsvMeasurementSchema::for_header(&bytes);
    let mode = if lenient { ValidationMode::Lenient } else { ValidationMode::Strict };
    let mut ds = with_file(path, parse_csv_measurements(&bytes, &schema, mode))?;
    ds.dataset.provenance.file = Some(path.display().to_string());
    for issue in &ds.skipped {
        s.warn(&format!("{}: line {}: skipped: {}", path.display(), issue.line, issue.message));
    }
    Ok(ds)
}

fn load_response(path: &Path) -> Result<FrequencyResponse, CliError> {
    let bytes = read(path)?;
    let sweep = with_file(path, parse_touchstone(&bytes))?;
    with_file(path, sweep.s21())
}

fn grouping(g: &GroupingArgs) -> Grouping {
    let chosen = Grouping { band: g.by_band, region: g.by_region, direction: g.by_direction, source: g.by_source };
    if chosen == Grouping::default() {
        Grouping::BAND_REGION
    } else {
        chosen
    }
}

fn grouping_label(g: &Grouping) -> String {
    let mut parts = Vec::new();
    for (on, name) in [(g.band, "band"), (g.region, "region"), (g.direction, "direction"), (g.source, "source")] {
        if on {
            parts.push(name);
        }
    }
    parts.join("+")
}

fn pdp_for(s: &Session, fr: &FrequencyResponse, p: &PipelineArgs) -> Result<PowerDelayProfile, CliError> {
    let (window, pad, floor) = s.pipeline(p)?;
    let ir = impulse_response(fr, window, pad)?;
    Ok(power_delay_profile(&ir, floor)?)
}

fn pipeline_run(run: RunInfo, s: &Session, p: &PipelineArgs) -> Result<RunInfo, CliError> {
    let (window, pad, floor) = s.pipeline(p)?;
    Ok(run
        .param("window", format!("{window:?}").to_lowercase())
        .param("zero_pad_factor", pad)
        .param("noise_floor_db", floor))
}

/// Executes a parsed command line and returns the report bytes.
pub fn run(cli: &Cli) -> Result<Vec<u8>, CliError> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    if let Some(f) = cli.format {
        config.format = f;
    }
    if let Some(seed) = cli.seed {
        config.seed = Some(seed);
    }
    let params_path = cli.params.clone().or_else(|| config.params_path.as_ref().map(PathBuf::from));
    if let Some(p) = &params_path {
        config.params_path = Some(p.display().to_string());
    }
    let s = Session { seed: config.seed, config, params_path, verbose: cli.verbose };

    match &cli.command {
        Command::Ingest { csv, s2p, lenient } => run_ingest(&s, csv.as_deref(), s2p.as_deref(), *lenient),
        Command::Fit { csv, grouping: g, lenient, table } => run_fit(&s, csv, &grouping(g), *lenient, *table),
        Command::Predict { context, depth, sweep } => run_predict(&s, context, depth, *sweep),
        Command::Sample { context, depth, trials } => run_sample(&s, context, depth, *trials),
        Command::Outage { context, depth, max_pl } => run_outage(&s, context, depth, max_pl),
        Command::Montecarlo { context, depth, trials, threshold, workers } => {
            run_montecarlo_cmd(&s, context, depth, *trials, threshold.as_deref(), *workers)
        }
        Command::Linkbudget {
            context,
            depth,
            distance,
            pt,
            sensitivity,
            margin,
            shadowing,
            tx_gain,
            rx_gain,
            s11,
            s22,
        } => {
            let (band, ctx) = resolve_context(context)?;
            let req = LinkBudgetRequest {
                depth_mm: units::parse_depth_mm(depth)?,
                external_distance_m: units::parse_distance_m(distance)?,
                band,
                pt_dbm: units::parse_dbm(pt)?,
                tx: AntennaParams::new(*tx_gain, *s11).map_err(|e| CliError::usage(e.to_string()))?,
                rx: AntennaParams::new(*rx_gain, *s22).map_err(|e| CliError::usage(e.to_string()))?,
                sensitivity_dbm: units::parse_dbm(sensitivity)?,
                use_shadowing: *shadowing,
            };
            run_linkbudget(&s, ctx, &req, units::parse_db(margin)?)
        }
        Command::Pdp { s2p, pipeline } => run_pdp(&s, s2p, pipeline),
        Command::Stats { s2p, pipeline, signal_bw } => run_stats(&s, s2p, pipeline, signal_bw.as_deref()),
        Command::Classify { signal_bw, bc, sigma_tau, s2p, pipeline } => {
            run_classify(&s, signal_bw, bc.as_deref(), sigma_tau.as_deref(), s2p.as_deref(), pipeline)
        }
        Command::Compare { a, b, csv, grouping: g } => run_compare(&s, a, b, csv.as_deref(), &grouping(g)),
    }
}

fn run_ingest(s: &Session, csv: Option<&Path>, s2p: Option<&Path>, lenient: bool) -> Result<Vec<u8>, CliError> {
    let run = s.run_info("ingest").param("lenient", lenient);
    let row = match (csv, s2p) {
        (Some(path), _) => {
            let ds = load_dataset(s, path, lenient)?;
            let lines: Vec<String> = ds.skipped.iter().map(|i| i.line.to_string()).collect();
            IngestRow {
                input: path.display().to_string(),
                kind: "csv".into(),
                records: ds.dataset.len(),
                skipped: ds.skipped.len(),
                skipped_lines: lines.join(";"),
                f_start_mhz: None,
                f_stop_mhz: None,
                band_average_pl_db: None,
            }
        }
        (None, Some(path)) => {
            let fr = load_response(path)?;
            IngestRow {
                input: path.display().to_string(),
                kind: "touchstone".into(),
                records: fr.len(),
                skipped: 0,
                skipped_lines: String::new(),
                f_start_mhz: Some(fr.f_start_hz() / 1e6),
                f_stop_mhz: Some(fr.f_stop_hz() / 1e6),
                band_average_pl_db: path_loss_from_s21(&fr).ok(),
            }
        }
        (None, None) => return Err(CliError::usage("ingest needs --csv or --s2p")),
    };
    let run = run.input(&row.input);
    s.emit(&run, &[row])
}

fn run_fit(s: &Session, csv: &Path, g: &Grouping, lenient: bool, table: FitTable) -> Result<Vec<u8>, CliError> {
    let ds = load_dataset(s, csv, lenient)?;
    let table_name = match table {
        FitTable::Fits => "fits",
        FitTable::Shadowing => "shadowing",
        FitTable::DepthMeans => "depth-means",
    };
    let run = s
        .run_info("fit")
        .input(csv.display())
        .param("grouping", grouping_label(g))
        .param("lenient", lenient)
        .param("table", table_name);
    let dataset = &ds.dataset;
    match table {
        FitTable::Fits => {
            let fits = fit_path_loss(dataset, g)?;
            s.info(&format!("fitted {} groups from {} records", fits.len(), dataset.len()));
            let rows: Vec<FitRow> = fits.iter().map(FitRow::from).collect();
            s.emit(&run, &rows)
        }
        FitTable::Shadowing => {
            let mut rows = Vec::new();
            for fit in fit_path_loss(dataset, g)? {
                let est = shadowing_variance_by_depth(dataset, &fit)?;
                for w in &est.skipped {
                    s.warn(&format!("{}: depth {} mm has {} record(s); bin omitted", fit.key, w.depth_mm, w.count));
                }
                let cols = GroupColumns::from(&fit.key);
                for &(depth_mm, variance_db2) in est.profile.bins() {
                    rows.push(ShadowingRow {
                        band: cols.band.clone(),
                        region: cols.region.clone(),
                        direction: cols.direction.clone(),
                        source: cols.source.clone(),
                        depth_mm,
                        variance_db2,
                        sigma_db: variance_db2.sqrt(),
                    });
                }
            }
            s.emit(&run, &rows)
        }
        FitTable::DepthMeans => {
            let rows: Vec<DepthMeanRow> = empirical_mean_pl_by_depth(dataset, g).iter().map(DepthMeanRow::from).collect();
            s.emit(&run, &rows)
        }
    }
}

fn run_predict(s: &Session, args: &ContextArgs, depths: &[String], sweep: bool) -> Result<Vec<u8>, CliError> {
    let (band, ctx) = resolve_context(args)?;
    let registry = s.registry()?;
    let entry = lookup(&registry, band, ctx)?;
    let depths: Vec<f64> = if sweep {
        (1..=10).map(|k| 10.0 * k as f64).collect()
    } else {
        depths.iter().map(|d| units::parse_depth_mm(d)).collect::<Result<_, _>>()?
    };
    let mut rows = Vec::with_capacity(depths.len());
    for &depth_mm in &depths {
        let c = ContextColumns::new(band, ctx);
        rows.push(PredictRow {
            band: c.band,
            region: c.region,
            direction: c.direction,
            depth_mm,
            mean_pl_db: mean_path_loss(&entry.params, depth_mm)?,
            sigma_db: entry.profile.sigma_at(depth_mm)?,
        });
    }
    let list: Vec<String> = depths.iter().map(f64::to_string).collect();
    let run = context_run(s.run_info("predict"), band, ctx).param("depths_mm", list.join(";")).input(s.params_label());
    s.emit(&run, &rows)
}

fn run_sample(s: &Session, args: &ContextArgs, depth: &str, trials: u64) -> Result<Vec<u8>, CliError> {
    let seed = s.require_seed()?;
    let (band, ctx) = resolve_context(args)?;
    let depth_mm = units::parse_depth_mm(depth)?;
    if trials == 0 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    let registry = s.registry()?;
    let entry = lookup(&registry, band, ctx)?;
    let samples = sample_trials(&entry.params, &entry.profile, depth_mm, trials as usize, seed)?;
    let rows: Vec<SampleRow> = samples
        .into_iter()
        .enumerate()
        .map(|(i, pl_db)| SampleRow { trial: i as u64, depth_mm, pl_db })
        .collect();
    let run = context_run(s.run_info("sample"), band, ctx)
        .param("depth_mm", depth_mm)
        .param("trials", trials)
        .input(s.params_label())
        .seed(seed);
    s.emit(&run, &rows)
}

fn run_outage(s: &Session, args: &ContextArgs, depth: &str, max_pl: &str) -> Result<Vec<u8>, CliError> {
    let (band, ctx) = resolve_context(args)?;
    let depth_mm = units::parse_depth_mm(depth)?;
    let max_pl_db = units::parse_db(max_pl)?;
    let registry = s.registry()?;
    let entry = lookup(&registry, band, ctx)?;
    let c = ContextColumns::new(band, ctx);
    let row = OutageRow {
        band: c.band,
        region: c.region,
        direction: c.direction,
        depth_mm,
        mean_pl_db: mean_path_loss(&entry.params, depth_mm)?,
        sigma_db: entry.profile.sigma_at(depth_mm)?,
        max_pl_db,
        outage_probability: outage_probability(&entry.params, &entry.profile, depth_mm, max_pl_db)?,
    };
    let run = context_run(s.run_info("outage"), band, ctx)
        .param("depth_mm", depth_mm)
        .param("max_pl_db", max_pl_db)
        .input(s.params_label());
    s.emit(&run, &[row])
}

fn run_montecarlo_cmd(
    s: &Session,
    args: &ContextArgs,
    depth: &str,
    trials: u64,
    threshold: Option<&str>,
    workers: usize,
) -> Result<Vec<u8>, CliError> {
    let seed = s.require_seed()?;
    let (band, ctx) = resolve_context(args)?;
    let depth_mm = units::parse_depth_mm(depth)?;
    if trials == 0 {
        return Err(CliError::usage("--trials must be >= 1"));
    }
    let registry = s.registry()?;
    let entry = lookup(&registry, band, ctx)?;
    let threshold_db = match threshold {
        Some(t) => units::parse_db(t)?,
        None => mean_path_loss(&entry.params, depth_mm)?,
    };
    let summary = run_montecarlo(&entry.params, &entry.profile, depth_mm, trials, seed, threshold_db, workers)?;
    s.info(&format!("{trials} trials on {} worker(s)", if workers == 0 { "all".to_string() } else { workers.to_string() }));
    let c = ContextColumns::new(band, ctx);
    let row = MonteCarloRow {
        band: c.band,
        region: c.region,
        direction: c.direction,
        depth_mm,
        n_trials: summary.n_trials,
        seed: summary.seed,
        mean_pl_db: summary.mean_pl_db,
        variance_pl_db2: summary.variance_pl_db2,
        threshold_db,
        outage_count: summary.outage_count,
        outage_rate: summary.outage_rate,
        closed_form_outage_probability: outage_probability(&entry.params, &entry.profile, depth_mm, threshold_db)?,
    };
    // worker count is deliberately left out of the provenance: it cannot change the result
    let run = context_run(s.run_info("montecarlo"), band, ctx)
        .param("depth_mm", depth_mm)
        .param("trials", trials)
        .param("threshold_db", threshold_db)
        .input(s.params_label())
        .seed(seed);
    s.emit(&run, &[row])
}

fn run_linkbudget(s: &Session, ctx: AnatomicalContext, req: &LinkBudgetRequest, margin_db: f64) -> Result<Vec<u8>, CliError> {
    let seed = if req.use_shadowing { Some(s.require_seed()?) } else { s.seed };
    let registry = s.registry()?;
    let entry = lookup(&registry, req.band, ctx)?;
    let mut rng = trial_rng(seed.unwrap_or(0), 0);
    let r = concatenated_link_budget(&entry.params, &entry.profile, req, &mut rng)?;
    let c = ContextColumns::new(req.band, ctx);
    let row = LinkBudgetRow {
        band: c.band,
        region: c.region,
        direction: c.direction,
        depth_mm: req.depth_mm,
        external_distance_m: req.external_distance_m,
        pt_dbm: req.pt_dbm,
        sensitivity_dbm: req.sensitivity_dbm,
        in_body_pl_db: r.in_body_pl_db,
        external_pl_db: r.external_pl_db,
        total_pl_db: r.total_pl_db,
        rx_power_dbm: r.rx_power_dbm,
        margin_db: r.margin_db,
        shadowing_sigma_db: r.shadowing_sigma_db,
        required_margin_db: margin_db,
        required_tx_power_dbm: required_tx_power(r.total_pl_db, req.sensitivity_dbm, margin_db),
    };
    let mut run = context_run(s.run_info("linkbudget"), req.band, ctx)
        .param("depth_mm", req.depth_mm)
        .param("external_distance_m", req.external_distance_m)
        .param("pt_dbm", req.pt_dbm)
        .param("sensitivity_dbm", req.sensitivity_dbm)
        .param("shadowing", req.use_shadowing)
        .param("tx_gain", req.tx.gain_linear)
        .param("rx_gain", req.rx.gain_linear)
        .param("s11", req.tx.reflection_coeff_mag)
        .param("s22", req.rx.reflection_coeff_mag)
        .input(s.params_label());
    if let (true, Some(seed)) = (req.use_shadowing, seed) {
        run = run.seed(seed);
    }
    s.emit(&run, &[row])
}

fn run_pdp(s: &Session, s2p: &Path, p: &PipelineArgs) -> Result<Vec<u8>, CliError> {
    let fr = load_response(s2p)?;
    let pdp = pdp_for(s, &fr, p)?;
    let rows: Vec<PdpRow> = pdp
        .entries()
        .iter()
        .map(|&(d, pw)| PdpRow { delay_ns: d * 1e9, power_linear: pw, power_db: units::power_to_db(pw) })
        .collect();
    let run = pipeline_run(s.run_info("pdp"), s, p)?.input(s2p.display());
    s.emit(&run, &rows)
}

fn run_stats(s: &Session, s2p: &Path, p: &PipelineArgs, signal_bw: Option<&str>) -> Result<Vec<u8>, CliError> {
    let fr = load_response(s2p)?;
    let pdp = pdp_for(s, &fr, p)?;
    let stats = multipath_stats(&pdp)?;
    let signal_bw_hz = signal_bw.map(units::parse_frequency).transpose()?;
    let channel_class = match (signal_bw_hz, stats.coherence_bw_hz) {
        (Some(bw), Some(bc)) => Some(class_label(classify_channel(bw, bc))),
        // no dispersion: every bandwidth sees a flat channel
        (Some(_), None) => Some(class_label(ChannelClass::Flat)),
        _ => None,
    };
    let row = StatsRow {
        f_start_mhz: fr.f_start_hz() / 1e6,
        f_stop_mhz: fr.f_stop_hz() / 1e6,
        points: fr.len(),
        band_average_pl_db: path_loss_from_s21(&fr)?,
        pdp_taps: pdp.entries().len(),
        mean_excess_delay_ns: stats.mean_excess_delay_s * 1e9,
        rms_delay_spread_ns: stats.rms_delay_spread_s * 1e9,
        coherence_bandwidth_defined: stats.coherence_bw_hz.is_some(),
        coherence_bandwidth_mhz: stats.coherence_bw_hz.map(|b| b / 1e6),
        signal_bw_mhz: signal_bw_hz.map(|b| b / 1e6),
        channel_class,
    };
    let mut run = pipeline_run(s.run_info("stats"), s, p)?.input(s2p.display());
    if let Some(bw) = signal_bw_hz {
        run = run.param("signal_bw_hz", bw);
    }
    s.emit(&run, &[row])
}

fn class_label(c: ChannelClass) -> String {
    match c {
        ChannelClass::Flat => "flat".into(),
        ChannelClass::FrequencySelective => "frequency_selective".into(),
    }
}

fn run_classify(
    s: &Session,
    signal_bw: &str,
    bc: Option<&str>,
    sigma_tau: Option<&str>,
    s2p: Option<&Path>,
    p: &PipelineArgs,
) -> Result<Vec<u8>, CliError> {
    let signal_bw_hz = units::parse_frequency(signal_bw)?;
    if !(signal_bw_hz > 0.0) {
        return Err(CliError::usage("signal bandwidth must be positive"));
    }
    let mut run = s.run_info("classify").param("signal_bw_hz", signal_bw_hz);
    let bc_hz = match (bc, sigma_tau, s2p) {
        (Some(b), None, None) => {
            run = run.param("bc_hz", units::parse_frequency(b)?);
            units::parse_frequency(b)?
        }
        (None, Some(t), None) => {
            let tau = units::parse_duration_s(t)?;
            run = run.param("sigma_tau_s", tau);
            coherence_bandwidth(tau)?
        }
        (None, None, Some(path)) => {
            let fr = load_response(path)?;
            let stats = multipath_stats(&pdp_for(s, &fr, p)?)?;
            run = pipeline_run(run, s, p)?.input(path.display());
            stats
                .coherence_bw_hz
                .ok_or_else(|| CliError::domain("sweep shows no delay spread; coherence bandwidth is undefined"))?
        }
        _ => return Err(CliError::usage("give exactly one of --bc, --sigma-tau or --s2p")),
    };
    if !(bc_hz > 0.0) {
        return Err(CliError::usage("coherence bandwidth must be positive"));
    }
    let row = ClassifyRow {
        signal_bw_mhz: signal_bw_hz / 1e6,
        coherence_bandwidth_mhz: bc_hz / 1e6,
        channel_class: class_label(classify_channel(signal_bw_hz, bc_hz)),
    };
    s.emit(&run, &[row])
}

/// `key=value` pairs separated by commas.
struct Selector {
    band: Option<FrequencyBand>,
    region: Option<Region>,
    direction: Option<Direction>,
    source: Option<Source>,
}

impl Selector {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut sel = Selector { band: None, region: None, direction: None, source: None };
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("selector part '{part}' is not key=value")))?;
            match k.trim() {
                "band" => sel.band = Some(v.parse().map_err(CliError::usage)?),
                "region" => sel.region = Some(v.parse().map_err(CliError::usage)?),
                "direction" => sel.direction = Some(v.parse().map_err(CliError::usage)?),
                "source" => sel.source = Some(v.parse().map_err(CliError::usage)?),
                other => return Err(CliError::usage(format!("unknown selector key '{other}'"))),
            }
        }
        Ok(sel)
    }

    fn matches(&self, k: &GroupKey) -> bool {
        fn ok<T: PartialEq>(want: Option<T>, have: Option<T>) -> bool {
            want.is_none() || want == have
        }
        ok(self.band, k.band) && ok(self.region, k.region) && ok(self.direction, k.direction) && ok(self.source, k.source)
    }
}

fn select_fit<'a>(fits: &'a [FitResult], text: &str) -> Result<&'a FitResult, CliError> {
    let sel = Selector::parse(text)?;
    let hits: Vec<&FitResult> = fits.iter().filter(|f| sel.matches(&f.key)).collect();
    match hits.as_slice() {
        [one] => Ok(one),
        [] => Err(CliError::domain(format!("selector '{text}' matches no fitted group"))),
        _ => Err(CliError::usage(format!("selector '{text}' matches {} groups; be more specific", hits.len()))),
    }
}

fn registry_fit(registry: &ParamRegistry, text: &str) -> Result<FitResult, CliError> {
    let sel = Selector::parse(text)?;
    let band = sel.band.ok_or_else(|| CliError::usage(format!("selector '{text}' needs band=")))?;
    let context = match sel.direction {
        Some(d) => AnatomicalContext::direction(d),
        None => AnatomicalContext::region(sel.region.unwrap_or(Region::WholeTorso)),
    };
    let entry = lookup(registry, band, context)?;
    let grouping = Grouping { band: true, region: true, direction: context.direction.is_some(), source: false };
    Ok(FitResult {
        key: GroupKey { band: Some(band), region: Some(context.region), direction: context.direction, source: None, grouping },
        pl0_db: entry.params.pl0_db(),
        m_db: entry.params.m_db(),
        // tabulated model, not a fit of this run
        r_squared: f64::NAN,
        n_samples: 0,
        residual_profile: entry.profile.clone(),
    })
}

fn run_compare(s: &Session, a: &str, b: &str, csv: Option<&Path>, g: &Grouping) -> Result<Vec<u8>, CliError> {
    let mut run = s.run_info("compare").param("a", a).param("b", b);
    let (fa, fb) = match csv {
        Some(path) => {
            let ds: MeasurementDataset = load_dataset(s, path, false)?.dataset;
            let fits = fit_path_loss(&ds, g)?;
            run = run.input(path.display()).param("grouping", grouping_label(g));
            (select_fit(&fits, a)?.clone(), select_fit(&fits, b)?.clone())
        }
        None => {
            let registry = s.registry()?;
            run = run.input(s.params_label());
            (registry_fit(&registry, a)?, registry_fit(&registry, b)?)
        }
    };
    let report = compare_models(&fa, &fb)?;
    let rows: Vec<CompareRow> = report
        .depth_deltas
        .iter()
        .map(|&(depth_mm, delta)| CompareRow {
            model_a: fa.key.to_string(),
            model_b: fb.key.to_string(),
            decay_rate_ratio: report.decay_rate_ratio,
            delta_pl0_db: report.delta_pl0_db,
            depth_mm,
            delta_mean_pl_db: delta,
        })
        .collect();
    s.emit(&run, &rows)
}
