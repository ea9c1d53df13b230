use std::path::{Path, PathBuf};

use barista::diagnostics::{
    ks_against, ks_one_sample, ks_two_sample, qq_points, reverse_time_ecdf, KsResult, QqReference,
    ReverseTimeEcdf,
};
use barista::estimate::{bootstrap_se, grid_search, qc_fit, FitResult};
use barista::rng::GENERATOR_NAME;
use barista::select::{refined_ga_fit, select_model, LrTest};
use barista::simulate::{sample_fixed_n, sample_poisson_count};
use barista::{BaristaParams, BidSample, FamilyKind, Seed};
use serde::Serialize;

use crate::args::{
    Command, Common, DiagnoseArgs, FitArgs, IngestCheckArgs, Input, SelectArgs, SimulateArgs,
};
use crate::config::{Config, Family, Method, DEFAULT_N, DEFAULT_WINDOWS};
use crate::error::{CliError, Result};
use crate::ingest::{read_bids, IngestOptions, Ingested};
use crate::report::{emit, timestamp, FitView, ParamsView, Report, SCHEMA};
use crate::units::{parse_windows, Unit, Window};

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Select(a) => select(a),
        Command::Diagnose(a) => diagnose(a),
        Command::IngestCheck(a) => ingest_check(a),
    }
}

/// Config file overlaid with every flag that was given.
fn merged(common: &Common, extra: &[Config]) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg = cfg.overlay(&common.as_config());
    for e in extra {
        cfg = cfg.overlay(e);
    }
    Ok(cfg)
}

fn ingest(path: &Path, cfg: &Config) -> Result<Ingested> {
    read_bids(
        path,
        IngestOptions {
            horizon: cfg.horizon,
            unit: cfg.unit,
            clamp: cfg.clamp_policy(),
        },
    )
}

/// Loads the input and pins the resolved horizon and unit into the config
/// so the echo shows what was used.
fn load_input(common: &Common, input: &Input, extra: &[Config]) -> Result<(Config, Ingested)> {
    let mut all = vec![input.as_config()];
    all.extend_from_slice(extra);
    let mut cfg = merged(common, &all)?;
    let data = ingest(&input.input, &cfg)?;
    cfg.horizon = Some(data.summary.horizon);
    cfg.unit = Some(data.summary.unit);
    cfg.clamp_policy = Some(cfg.clamp_policy());
    Ok((cfg, data))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let flags = Config {
        n: a.n,
        poisson: a.poisson.then_some(true),
        auctions: a.auctions,
        alpha1: a.alpha1,
        alpha2: a.alpha2,
        alpha3: a.alpha3,
        d1: a.d1,
        d2: a.d2,
        c: a.c,
        ..Config::default()
    };
    let cfg = merged(&a.common, &[flags])?;
    let p = cfg.sim_params()?;
    let unit = cfg.unit();
    let seed = cfg.seed();
    let poisson = cfg.poisson.unwrap_or(false);
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let auctions = cfg.auctions.unwrap_or(1);

    let mut text = String::from("# barista simulate\n");
    if let Some(ts) = timestamp(!a.common.no_timestamp) {
        text.push_str(&format!("# generated_at: {ts}\n"));
    }
    let v = ParamsView::new(&p, unit);
    text.push_str(&format!("# version: {VERSION}\n"));
    text.push_str(&format!("# seed: {seed}\n"));
    text.push_str(&format!("# generator: {GENERATOR_NAME}\n"));
    text.push_str(&format!("# horizon: {}\n", p.horizon()));
    text.push_str(&format!("# unit: {}\n", unit.name()));
    text.push_str(&format!(
        "# params: alpha1={} alpha2={} alpha3={} d1={} d2={} d2_minutes={} c={}\n",
        v.alpha1, v.alpha2, v.alpha3, v.d1, v.d2, v.d2_minutes, v.c
    ));
    if poisson {
        text.push_str("# count: poisson\n");
    } else {
        text.push_str(&format!("# count: {n}\n"));
    }
    text.push_str(&format!("# auctions: {auctions}\n"));

    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Input {
        path: "<csv>".into(),
        message: e.to_string(),
    };
    w.write_record(["auction_id", "bid_time"]).map_err(io)?;
    for i in 0..auctions {
        let s = Seed(seed).derive(i as u64);
        let sample = if poisson {
            sample_poisson_count(&p, s)
        } else {
            sample_fixed_n(&p, n, s)
        };
        let id = i.to_string();
        for t in sample.times() {
            w.write_record([id.as_str(), &t.to_string()]).map_err(io)?;
        }
    }
    let body = w.into_inner().map_err(|e| io(e.into_error().into()))?;
    text.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    emit(a.common.output.as_deref(), &text)
}

fn fit_once(
    sample: &BidSample,
    method: Method,
    kind: FamilyKind,
    cfg: &Config,
) -> barista::Result<FitResult> {
    let t = sample.horizon();
    match method {
        Method::Qc => qc_fit(sample, &cfg.qc(t)),
        Method::Grid => {
            let axes = cfg
                .grid(kind, t)
                .map_err(|e| barista::Error::InvalidParams(e.to_string()))?;
            grid_search(sample, kind, &axes)
        }
        Method::Ga => refined_ga_fit(sample, kind, &cfg.ga(kind, t), cfg.refine_iterations()),
    }
}

fn fit(a: FitArgs) -> Result<()> {
    let flags = Config {
        method: a.method,
        family: a.family,
        bootstrap: a.bootstrap,
        ..Config::default()
    };
    let (mut cfg, data) = load_input(&a.common, &a.input, &[flags])?;
    let method = cfg.method.unwrap_or(Method::Ga);
    let family = cfg.family.unwrap_or(Family::ThreeStage);
    let kind = FamilyKind::from(family);
    if method == Method::Qc && kind != FamilyKind::ThreeStage {
        return Err(CliError::Usage(
            "the qc method only fits the three-stage family".into(),
        ));
    }
    cfg.method = Some(method);
    cfg.family = Some(family);
    // the grid bounds are already validated here, before any fitting
    if method == Method::Grid {
        cfg.grid(kind, data.summary.horizon)?;
    }
    let mut result = fit_once(&data.sample, method, kind, &cfg)
        .map_err(|source| CliError::Stage { stage: "fit", source })?;
    let replicates = cfg.bootstrap.unwrap_or(0);
    if replicates > 0 {
        let se = bootstrap_se(
            &data.sample,
            |s| fit_once(s, method, kind, &cfg).map(|f| f.family.shape()),
            replicates,
            Seed(cfg.seed()).derive(1),
        )
        .map_err(|source| CliError::Stage {
            stage: "bootstrap",
            source,
        })?;
        result.stderrs = Some(se);
    }
    let report = Report {
        schema: SCHEMA,
        command: "fit",
        version: VERSION,
        generated_at: timestamp(!a.common.no_timestamp),
        seed: cfg.seed(),
        config: &cfg,
        input: Some(&data.summary),
        result: FitView::new(&result, data.summary.unit),
    };
    emit(a.common.output.as_deref(), &report.to_json())
}

#[derive(Debug, Serialize)]
struct SelectView {
    chosen: FamilyKind,
    alpha_level: f64,
    lr_12: LrTest,
    lr_23: Option<LrTest>,
    fits: Vec<FitView>,
}

fn select(a: SelectArgs) -> Result<()> {
    let (cfg, data) = load_input(&a.common, &a.input, &[])?;
    let sc = cfg.select(data.summary.horizon);
    let out = select_model(&data.sample, &sc).map_err(|source| CliError::Stage {
        stage: "select",
        source,
    })?;
    let unit = data.summary.unit;
    let view = SelectView {
        chosen: out.chosen,
        alpha_level: out.alpha_level,
        lr_12: out.lr_12.clone(),
        lr_23: out.lr_23.clone(),
        fits: out.fits.iter().map(|f| FitView::new(f, unit)).collect(),
    };
    let report = Report {
        schema: SCHEMA,
        command: "select",
        version: VERSION,
        generated_at: timestamp(!a.common.no_timestamp),
        seed: cfg.seed(),
        config: &cfg,
        input: Some(&data.summary),
        result: view,
    };
    emit(a.common.output.as_deref(), &report.to_json())
}

fn ingest_check(a: IngestCheckArgs) -> Result<()> {
    let (cfg, data) = load_input(&a.common, &a.input, &[])?;
    let report = Report {
        schema: SCHEMA,
        command: "ingest-check",
        version: VERSION,
        generated_at: timestamp(!a.common.no_timestamp),
        seed: cfg.seed(),
        config: &cfg,
        input: None,
        result: &data.summary,
    };
    emit(a.common.output.as_deref(), &report.to_json())
}

/// Reads the model of a `fit` report, or the chosen model of a `select`
/// report.
fn load_model(path: &Path, unit: Unit, horizon: f64) -> Result<BaristaParams> {
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad(format!("not JSON: {e}")))?;
    if v["schema"] != SCHEMA {
        return Err(bad(format!("schema is not {SCHEMA}")));
    }
    let params = match v["command"].as_str() {
        Some("fit") => &v["result"]["params"],
        Some("select") => {
            let chosen = &v["result"]["chosen"];
            v["result"]["fits"]
                .as_array()
                .and_then(|fits| fits.iter().find(|f| &f["family"] == chosen))
                .map(|f| &f["params"])
                .ok_or_else(|| bad("chosen fit is missing".into()))?
        }
        _ => return Err(bad("expected a fit or select report".into())),
    };
    if params["unit"] != unit.name() {
        return Err(bad(format!(
            "model is in {} but the data are in {}",
            params["unit"],
            unit.name()
        )));
    }
    let get = |k: &str| {
        params[k]
            .as_f64()
            .ok_or_else(|| bad(format!("params.{k} is missing")))
    };
    let p = BaristaParams::new(
        get("alpha1")?,
        get("alpha2")?,
        get("alpha3")?,
        get("d1")?,
        get("d2")?,
        get("c")?,
        get("horizon")?,
    )?;
    if p.horizon() != horizon {
        return Err(bad(format!(
            "model horizon {} differs from the data's {horizon}",
            p.horizon()
        )));
    }
    Ok(p)
}

#[derive(Debug, Serialize)]
struct KsRow {
    test: &'static str,
    window: String,
    d_statistic: f64,
    p_value: f64,
    n_effective: f64,
}

impl KsRow {
    fn new(test: &'static str, window: impl Into<String>, r: KsResult) -> Self {
        Self {
            test,
            window: window.into(),
            d_statistic: r.d_statistic,
            p_value: r.p_value,
            n_effective: r.n_effective,
        }
    }
}

#[derive(Debug, Serialize)]
struct WindowView {
    label: String,
    length: f64,
    events: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Debug, Serialize)]
struct DiagnoseView {
    qq_reference: &'static str,
    qq_max_deviation: f64,
    windows: Vec<WindowView>,
    ks: Vec<KsRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ParamsView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<crate::ingest::IngestSummary>,
    files: Vec<String>,
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}

/// CDF of the model conditioned on the final window, on the rescaled axis.
fn window_cdf(p: &BaristaParams, window: f64, x: f64) -> barista::Result<f64> {
    let start = p.horizon() - window;
    let s0 = p.survival(start)?;
    let s = p.survival((start + x * window).min(p.horizon()))?;
    Ok(((s0 - s) / s0).clamp(0.0, 1.0))
}

fn write_csv<R: Serialize>(dir: &Path, name: &str, rows: &[R], headers: &[&str]) -> Result<String> {
    let path = dir.join(name);
    let err = |e: csv::Error| CliError::Input {
        path: path.clone(),
        message: e.to_string(),
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&path)
        .map_err(err)?;
    w.write_record(headers).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(name.to_string())
}

fn diagnose(a: DiagnoseArgs) -> Result<()> {
    let flags = Config {
        windows: a.windows.clone(),
        ..Config::default()
    };
    let dir: PathBuf = a
        .common
        .output
        .clone()
        .ok_or_else(|| CliError::Usage("diagnose needs --output <directory>".into()))?;
    let (mut cfg, data) = load_input(&a.common, &a.input, &[flags])?;
    let s = &data.sample;
    if s.is_empty() {
        return Err(CliError::Model(barista::Error::EmptySample));
    }
    let t = data.summary.horizon;
    let unit = data.summary.unit;
    let windows: Vec<Window> = match &cfg.windows {
        Some(spec) => {
            let w = parse_windows(spec, unit)?;
            if let Some(bad) = w.iter().find(|w| w.length > t) {
                return Err(CliError::Usage(format!(
                    "window {} is longer than the horizon {t}",
                    bad.label
                )));
            }
            w
        }
        None => {
            let w: Vec<Window> = parse_windows(DEFAULT_WINDOWS, unit)?
                .into_iter()
                .filter(|w| w.length <= t)
                .collect();
            if w.is_empty() {
                vec![Window {
                    label: "whole".into(),
                    length: t,
                }]
            } else {
                w
            }
        }
    };
    cfg.windows = Some(
        windows
            .iter()
            .map(|w| w.label.as_str())
            .collect::<Vec<_>>()
            .join(","),
    );
    let model = a
        .model
        .as_deref()
        .map(|p| load_model(p, unit, t))
        .transpose()?;
    let reference = match &a.reference {
        Some(p) => {
            let r = ingest(p, &cfg)?;
            if r.summary.horizon != t {
                return Err(CliError::Input {
                    path: p.clone(),
                    message: format!("horizon {} differs from the input's {t}", r.summary.horizon),
                });
            }
            Some(r)
        }
        None => None,
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut files = Vec::new();
    let mut ks = Vec::new();

    // QQ against the model, else the reference sample, else uniform
    let uniform = BaristaParams::homogeneous(1.0, t)?;
    let (qq_reference, qq) = match (&model, &reference) {
        (Some(p), _) => ("model", qq_points(s, QqReference::Model(p))?),
        (None, Some(r)) => ("sample", qq_points(s, QqReference::Sample(&r.sample))?),
        (None, None) => ("uniform", qq_points(s, QqReference::Model(&uniform))?),
    };
    files.push(write_csv(&dir, "qq.csv", &qq.pairs, &["observed", "reference"])?);

    if let Some(p) = &model {
        ks.push(KsRow::new("model", "whole", ks_one_sample(s, p)?));
    }
    if let Some(r) = &reference {
        ks.push(KsRow::new("reference", "whole", ks_two_sample(s, &r.sample)?));
    }

    let mut views = Vec::new();
    let mut prev: Option<(String, ReverseTimeEcdf)> = None;
    for (i, w) in windows.iter().enumerate() {
        let e = match reverse_time_ecdf(s, w.length) {
            Ok(e) => e,
            Err(barista::Error::InvalidSample(_)) => {
                views.push(WindowView {
                    label: w.label.clone(),
                    length: w.length,
                    events: 0,
                    file: None,
                });
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let name = format!("ecdf_{i}_{}.csv", file_label(&w.label));
        match &model {
            Some(p) => {
                let rows = e
                    .steps()
                    .into_iter()
                    .map(|(x, f)| Ok((x, f, window_cdf(p, w.length, x)?)))
                    .collect::<barista::Result<Vec<_>>>()?;
                write_csv(&dir, &name, &rows, &["x", "ecdf", "model_cdf"])?;
                let pts = e.points.clone();
                let r = ks_against(&pts, |x| window_cdf(p, w.length, x).unwrap_or(f64::NAN))?;
                ks.push(KsRow::new("model_window", w.label.clone(), r));
            }
            None => {
                write_csv(&dir, &name, &e.steps(), &["x", "ecdf"])?;
            }
        }
        ks.push(KsRow::new("uniform", w.label.clone(), ks_against(&e.points, |x| x)?));
        if let Some((label, pe)) = &prev {
            let r = ks_two_sample(&pe.as_sample(), &e.as_sample())?;
            ks.push(KsRow::new("window_pair", format!("{label}|{}", w.label), r));
        }
        views.push(WindowView {
            label: w.label.clone(),
            length: w.length,
            events: e.points.len(),
            file: Some(name.clone()),
        });
        files.push(name);
        prev = Some((w.label.clone(), e));
    }
    files.push(write_csv(
        &dir,
        "ks.csv",
        &ks,
        &["test", "window", "d_statistic", "p_value", "n_effective"],
    )?);
    files.push("report.json".into());

    let view = DiagnoseView {
        qq_reference,
        qq_max_deviation: qq.max_deviation(),
        windows: views,
        ks,
        model: model.as_ref().map(|p| ParamsView::new(p, unit)),
        reference: reference.map(|r| r.summary),
        files,
    };
    let report = Report {
        schema: SCHEMA,
        command: "diagnose",
        version: VERSION,
        generated_at: timestamp(!a.common.no_timestamp),
        seed: cfg.seed(),
        config: &cfg,
        input: Some(&data.summary),
        result: view,
    };
    emit(Some(&dir.join("report.json")), &report.to_json())
}
