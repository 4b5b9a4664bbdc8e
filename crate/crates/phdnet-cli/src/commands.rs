//! The six subcommands, as library functions so tests can drive them
//! directly. Each reads its inputs, runs the pipeline, and writes reports
//! under the configured output directory.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::Serialize;

use phdnet::centrality::{
    centrality_series_with_mode, eigenvector_centrality, CentralityOptions, CentralitySeries,
};
use phdnet::error::{Error, Result};
use phdnet::graph::{
    build_network_with, export, network_stats, slice, GraphFormat, MarketSpec, NetworkStats,
    SliceMode, TimeWindow,
};
use phdnet::ingest::{
    ingest_records, HireRecord, IngestDiagnostics, InstitutionRegistry, ParseOptions,
};
use phdnet::stats::{
    compute_predictors, grade_to_rank, ols_fit, pearson, trend_statistic, CorrelationReport,
    GradeScale, PredictorPanel, RegressionReport, PREDICTOR_LABELS,
};

use crate::config::{config_echo, OutputFormat, RunConfig};
use crate::output::{atomic_write, fmt_score, fmt_stat, write_csv, write_json, Provenance};

/// Process exit code for an error: 1 usage/config, 2 data, 3 numeric.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::MissingColumn(_) => 1,
        Error::Io(_) | Error::Csv(_) | Error::Data(_) | Error::UnknownGrade(_) => 2,
        Error::Dimension(_) | Error::Singular { .. } | Error::ZeroVariance(_) | Error::Domain(_) => 3,
    }
}

fn centrality_options(config: &RunConfig) -> CentralityOptions {
    CentralityOptions {
        tolerance: config.tol,
        max_iterations: config.max_iter,
        damping: config.damping,
    }
}

fn load_registry(config: &RunConfig) -> Result<InstitutionRegistry> {
    match &config.registry {
        Some(path) => InstitutionRegistry::from_csv(File::open(path)?),
        None => Ok(InstitutionRegistry::new()),
    }
}

fn load_records(
    config: &RunConfig,
    registry: &mut InstitutionRegistry,
) -> Result<(Vec<HireRecord>, IngestDiagnostics)> {
    let path = config
        .records
        .as_ref()
        .ok_or_else(|| Error::Config("--records is required for this command".into()))?;
    let options = ParseOptions { delimiter: config.delimiter, ..ParseOptions::default() };
    ingest_records(File::open(path)?, &options, config.year_rule, registry)
}

fn provenance_for(config: &RunConfig, inputs: &[(&str, &Path)]) -> Result<Provenance> {
    let mut provenance = Provenance::new(config_echo(config));
    for (label, path) in inputs {
        provenance.add_input(label, path)?;
    }
    Ok(provenance)
}

fn records_csv(records: &[HireRecord]) -> String {
    let mut out = String::from("person,degree_unit,employer_unit,graduation_year,employment_year\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.person_key.as_deref().unwrap_or(""),
            r.degree_unit,
            r.employer_unit,
            r.graduation_year,
            r.employment_year
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

/// Parses and cleans the records file; writes `diagnostics.json` and
/// `records_clean.csv`.
pub fn cmd_ingest(config: &RunConfig) -> Result<()> {
    let mut registry = load_registry(config)?;
    let (records, diagnostics) = load_records(config, &mut registry)?;

    let records_path = config.records.clone().expect("checked in load_records");
    let mut inputs: Vec<(&str, &Path)> = vec![("records", records_path.as_path())];
    if let Some(reg) = &config.registry {
        inputs.push(("registry", reg.as_path()));
    }
    let provenance = provenance_for(config, &inputs)?;

    write_json(&config.out.join("diagnostics.json"), &provenance, &diagnostics)?;
    write_csv(&config.out.join("records_clean.csv"), &provenance, &records_csv(&records))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SliceStats {
    label: String,
    start_year: i32,
    end_year: i32,
    mode: SliceMode,
    stats: NetworkStats,
}

#[derive(Serialize)]
struct ColumnMeta {
    label: String,
    cut_point: i32,
    converged: bool,
    iterations_used: usize,
}

#[derive(Serialize)]
struct AnalyzeReport {
    ingest: IngestDiagnostics,
    full_network: NetworkStats,
    slices: Vec<SliceStats>,
    centrality_columns: Vec<ColumnMeta>,
}

fn series_csv(series: &CentralitySeries) -> String {
    let mut out = String::from("node");
    for column in &series.columns {
        out.push_str(&format!(",ec_{}", column.label));
    }
    out.push('\n');
    for (idx, node) in series.nodes.iter().enumerate() {
        out.push_str(node);
        for column in &series.columns {
            out.push(',');
            out.push_str(&fmt_score(column.scores[idx]));
        }
        out.push('\n');
    }
    out
}

/// Builds the slices, the centrality series and the graph export; writes
/// `network_stats.json`, `centrality_series.csv` and `network_full.*`.
///
/// Non-convergent centrality columns are recorded (and warned about), not
/// treated as fatal.
pub fn cmd_analyze(config: &RunConfig) -> Result<()> {
    let mut registry = load_registry(config)?;
    let (records, diagnostics) = load_records(config, &mut registry)?;

    let records_path = config.records.clone().expect("checked in load_records");
    let mut inputs: Vec<(&str, &Path)> = vec![("records", records_path.as_path())];
    if let Some(reg) = &config.registry {
        inputs.push(("registry", reg.as_path()));
    }
    let provenance = provenance_for(config, &inputs)?;

    let full = build_network_with(&records, &registry, TimeWindow::full(), true);
    let slices = slice(&records, &registry, &config.boundaries, config.mode)?;
    let slice_stats: Vec<SliceStats> = slices
        .iter()
        .map(|net| SliceStats {
            label: net.window.label(),
            start_year: net.window.start_year,
            end_year: net.window.end_year,
            mode: net.window.mode,
            stats: network_stats(net),
        })
        .collect();

    let options = centrality_options(config);
    let series = if records.is_empty() {
        CentralitySeries { nodes: Vec::new(), columns: Vec::new() }
    } else {
        centrality_series_with_mode(
            &records,
            &registry,
            &config.boundaries,
            &options,
            config.ec_mode,
        )?
    };
    for column in &series.columns {
        if !column.converged {
            eprintln!(
                "warning: centrality for ec_{} did not converge within {} iterations",
                column.label, options.max_iterations
            );
        }
    }

    let report = AnalyzeReport {
        ingest: diagnostics,
        full_network: network_stats(&full),
        slices: slice_stats,
        centrality_columns: series
            .columns
            .iter()
            .map(|c| ColumnMeta {
                label: c.label.clone(),
                cut_point: c.cut_point,
                converged: c.converged,
                iterations_used: c.iterations_used,
            })
            .collect(),
    };
    write_json(&config.out.join("network_stats.json"), &provenance, &report)?;
    write_csv(&config.out.join("centrality_series.csv"), &provenance, &series_csv(&series))?;

    let (graph_format, extension) = match config.format {
        OutputFormat::Dot => (GraphFormat::Dot, "dot"),
        OutputFormat::GraphMl => (GraphFormat::GraphMl, "graphml"),
        _ => (GraphFormat::EdgeListCsv, "csv"),
    };
    let exported = export(&full, graph_format);
    let path = config.out.join(format!("network_full.{extension}"));
    if graph_format == GraphFormat::EdgeListCsv {
        write_csv(&path, &provenance, &exported)?;
    } else {
        atomic_write(&path, &exported)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// regress
// ---------------------------------------------------------------------------

fn load_subset(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    let subset: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect();
    if subset.is_empty() {
        return Err(Error::Data(format!("subset file {} has no node ids", path.display())));
    }
    Ok(subset)
}

fn panel_csv(panel: &PredictorPanel) -> String {
    let mut out = String::from("node,self_ratio,overseas_ratio,new_ratio,n,tspek_ratio\n");
    for row in &panel.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.node,
            fmt_stat(row.self_ratio),
            fmt_stat(row.overseas_ratio),
            fmt_stat(row.new_ratio),
            row.scale,
            fmt_stat(row.tspek_ratio)
        ));
    }
    out
}

fn regression_csv(report: &RegressionReport) -> String {
    let mut out = String::from("term,b,std_error,beta,t,p,vif\n");
    out.push_str(&format!(
        "intercept,{},{},,{},{},\n",
        fmt_stat(report.intercept.b),
        fmt_stat(report.intercept.std_error),
        fmt_stat(report.intercept.t),
        fmt_stat(report.intercept.p)
    ));
    for p in &report.predictors {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.label,
            fmt_stat(p.b),
            fmt_stat(p.std_error),
            fmt_stat(p.beta),
            fmt_stat(p.t),
            fmt_stat(p.p),
            fmt_stat(p.vif)
        ));
    }
    out.push_str(&format!(
        "model,r_squared={},adj_r_squared={},f={},f_dof=({},{}),f_p={},durbin_watson={},n={}\n",
        fmt_stat(report.r_squared),
        fmt_stat(report.adj_r_squared),
        fmt_stat(report.f_statistic),
        report.f_df1,
        report.f_df2,
        fmt_stat(report.f_p),
        fmt_stat(report.durbin_watson),
        report.n
    ));
    out
}

#[derive(Serialize)]
struct RegressOutput {
    dependent: String,
    reference_year: i32,
    report: RegressionReport,
}

/// Fits the two predictor regressions (reputation level and reputation
/// trend); writes the panel plus both reports as JSON and CSV.
pub fn cmd_regress(config: &RunConfig) -> Result<()> {
    let mut registry = load_registry(config)?;
    let (records, _) = load_records(config, &mut registry)?;
    let subset_path = config
        .subset
        .as_ref()
        .ok_or_else(|| Error::Config("--subset is required for regress".into()))?;
    let subset = load_subset(subset_path)?;

    let records_path = config.records.clone().expect("checked in load_records");
    let mut inputs: Vec<(&str, &Path)> =
        vec![("records", records_path.as_path()), ("subset", subset_path.as_path())];
    if let Some(reg) = &config.registry {
        inputs.push(("registry", reg.as_path()));
    }
    let provenance = provenance_for(config, &inputs)?;

    let reference_year = config
        .reference_year
        .or_else(|| records.iter().map(|r| r.employment_year).max())
        .ok_or_else(|| Error::Data("no records to regress on".into()))?;

    let full = build_network_with(&records, &registry, TimeWindow::full(), true);
    let panel = compute_predictors(&records, &full, &registry, &subset, reference_year)?;
    write_csv(&config.out.join("predictor_panel.csv"), &provenance, &panel_csv(&panel))?;

    let options = centrality_options(config);
    let labels: Vec<&str> = PREDICTOR_LABELS.to_vec();

    // Dependent 1: reputation level, the full-range centrality score.
    let full_scores = eigenvector_centrality(&full, &options)?;
    let y_level: Vec<f64> =
        subset.iter().map(|node| full_scores.scores.get(node).copied().unwrap_or(0.0)).collect();
    let levels = ols_fit(&panel.design_columns(), &y_level, &labels)?;
    write_json(
        &config.out.join("regression_levels.json"),
        &provenance,
        &RegressOutput {
            dependent: "eigenvector centrality, full range".into(),
            reference_year,
            report: levels.clone(),
        },
    )?;
    write_csv(&config.out.join("regression_levels.csv"), &provenance, &regression_csv(&levels))?;

    // Dependent 2: reputation trend, the slope of the smoothed per-slice
    // centrality sequence.
    let series = centrality_series_with_mode(
        &records,
        &registry,
        &config.boundaries,
        &options,
        SliceMode::Windowed,
    )?;
    let y_trend: Vec<f64> = subset
        .iter()
        .map(|node| {
            let position = series.nodes.iter().position(|n| n == node);
            let sequence: Vec<f64> = match position {
                Some(idx) => series.columns.iter().map(|c| c.scores[idx]).collect(),
                None => vec![0.0; series.columns.len()],
            };
            trend_statistic(&sequence, config.ma_window)
        })
        .collect::<Result<_>>()?;
    let trend = ols_fit(&panel.design_columns(), &y_trend, &labels)?;
    write_json(
        &config.out.join("regression_trend.json"),
        &provenance,
        &RegressOutput {
            dependent: "trend of per-slice eigenvector centrality".into(),
            reference_year,
            report: trend.clone(),
        },
    )?;
    write_csv(&config.out.join("regression_trend.csv"), &provenance, &regression_csv(&trend))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PairingReport {
    pairing: String,
    ec_column: String,
    value_column: String,
    dropped_incomplete: usize,
    correlation: CorrelationReport,
}

#[derive(Serialize)]
struct ValidateOutput {
    pairings: Vec<PairingReport>,
}

/// One row of the external validation table.
struct ValidationRow {
    node: String,
    cells: BTreeMap<String, String>,
}

fn read_validation_table(path: &Path) -> Result<Vec<ValidationRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(File::open(path)?);
    let headers = rdr.headers()?.clone();
    if headers.iter().next() != Some("node") {
        return Err(Error::Data("validation table must start with a `node` column".into()));
    }
    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let node = row.get(0).unwrap_or("").to_string();
        if node.is_empty() {
            continue;
        }
        let cells = headers
            .iter()
            .skip(1)
            .enumerate()
            .map(|(i, h)| (h.to_string(), row.get(i + 1).unwrap_or("").to_string()))
            .collect();
        rows.push(ValidationRow { node, cells });
    }
    Ok(rows)
}

/// Correlates centrality columns against external evaluation columns.
///
/// Pairings are `ec_<year>:<column>`. Grade columns convert through the
/// nine-grade scale with blank meaning non-participation (rank 0); blank
/// score columns and nodes without a centrality score drop the row from that
/// pairing, and the drop is counted.
pub fn cmd_validate(config: &RunConfig) -> Result<()> {
    let mut registry = load_registry(config)?;
    let (records, _) = load_records(config, &mut registry)?;
    let validation_path = config
        .validation
        .as_ref()
        .ok_or_else(|| Error::Config("--validation is required for validate".into()))?;
    let table = read_validation_table(validation_path)?;

    let records_path = config.records.clone().expect("checked in load_records");
    let mut inputs: Vec<(&str, &Path)> =
        vec![("records", records_path.as_path()), ("validation", validation_path.as_path())];
    if let Some(reg) = &config.registry {
        inputs.push(("registry", reg.as_path()));
    }
    let provenance = provenance_for(config, &inputs)?;

    let options = centrality_options(config);
    let series = centrality_series_with_mode(
        &records,
        &registry,
        &config.boundaries,
        &options,
        config.ec_mode,
    )?;
    let scale = GradeScale::default();

    let mut pairings = Vec::new();
    for pairing in &config.pairings {
        let (ec_column, value_column) = pairing.split_once(':').ok_or_else(|| {
            Error::Config(format!("pairing must be `ec_<year>:<column>`, got `{pairing}`"))
        })?;
        let column_idx = series
            .columns
            .iter()
            .position(|c| format!("ec_{}", c.label) == ec_column)
            .ok_or_else(|| {
                Error::Config(format!(
                    "pairing `{pairing}` references unknown centrality column `{ec_column}`; \
                     available: {}",
                    series
                        .columns
                        .iter()
                        .map(|c| format!("ec_{}", c.label))
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
        let is_grade = value_column.starts_with("grade");

        let mut ec_values = Vec::new();
        let mut external = Vec::new();
        let mut dropped = 0usize;
        for row in &table {
            let node_idx = match series.nodes.iter().position(|n| n == &row.node) {
                Some(idx) => idx,
                None => {
                    dropped += 1;
                    continue;
                }
            };
            let cell = row.cells.get(value_column).cloned().unwrap_or_default();
            let value = if is_grade {
                grade_to_rank(&cell, &scale).map_err(|e| match e {
                    Error::UnknownGrade(token) => Error::UnknownGrade(format!(
                        "{token} (node {}, column {value_column})",
                        row.node
                    )),
                    other => other,
                })? as f64
            } else {
                if cell.trim().is_empty() {
                    dropped += 1;
                    continue;
                }
                cell.trim().parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "node {}: column {value_column} is not numeric: `{cell}`",
                        row.node
                    ))
                })?
            };
            ec_values.push(series.columns[column_idx].scores[node_idx]);
            external.push(value);
        }
        let correlation = pearson(&ec_values, &external)?;
        pairings.push(PairingReport {
            pairing: pairing.clone(),
            ec_column: ec_column.to_string(),
            value_column: value_column.to_string(),
            dropped_incomplete: dropped,
            correlation,
        });
    }

    let output = ValidateOutput { pairings };
    write_json(&config.out.join("validation.json"), &provenance, &output)?;

    let mut csv_body = String::from("pairing,ec_column,value_column,n,dropped,r,t,p\n");
    for p in &output.pairings {
        csv_body.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.pairing,
            p.ec_column,
            p.value_column,
            p.correlation.n,
            p.dropped_incomplete,
            fmt_stat(p.correlation.r),
            fmt_stat(p.correlation.t),
            fmt_stat(p.correlation.p)
        ));
    }
    write_csv(&config.out.join("validation.csv"), &provenance, &csv_body)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn registry_csv(registry: &InstitutionRegistry) -> String {
    let mut out = String::from("canonical_id,display_name,aliases,is_overseas,tags\n");
    for entry in registry.entries() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            entry.canonical_id,
            entry.display_name,
            entry.aliases.join("|"),
            entry.is_overseas,
            entry.tags.iter().cloned().collect::<Vec<_>>().join("|")
        ));
    }
    out
}

/// Generates a synthetic hierarchy market; writes `records_synth.csv` and
/// `registry_synth.csv`, ready to feed back into `ingest` or `analyze`.
pub fn cmd_synth(config: &RunConfig) -> Result<()> {
    let spec = MarketSpec {
        tier_sizes: config.tiers.clone(),
        hire_rates: if config.hire_rates.len() == 1 && config.tiers.len() > 1 {
            vec![config.hire_rates[0]; config.tiers.len()]
        } else {
            config.hire_rates.clone()
        },
        downward_bias: config.bias,
        self_loop_prob: config.self_loop,
        overseas_prob: config.overseas,
        start_year: config.years.0,
        end_year: config.years.1,
        seed: config.seed,
    };
    let records = phdnet::graph::synthesize_market(&spec)?;
    let registry = spec.registry()?;

    let provenance = provenance_for(config, &[])?;
    write_csv(&config.out.join("records_synth.csv"), &provenance, &records_csv(&records))?;
    write_csv(&config.out.join("registry_synth.csv"), &provenance, &registry_csv(&registry))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

/// Builds the full network and writes it in the requested graph format.
pub fn cmd_export(config: &RunConfig) -> Result<()> {
    let mut registry = load_registry(config)?;
    let (records, _) = load_records(config, &mut registry)?;

    let records_path = config.records.clone().expect("checked in load_records");
    let mut inputs: Vec<(&str, &Path)> = vec![("records", records_path.as_path())];
    if let Some(reg) = &config.registry {
        inputs.push(("registry", reg.as_path()));
    }
    let provenance = provenance_for(config, &inputs)?;

    let full = build_network_with(&records, &registry, TimeWindow::full(), true);
    let (graph_format, extension) = match config.format {
        OutputFormat::Dot => (GraphFormat::Dot, "dot"),
        OutputFormat::GraphMl => (GraphFormat::GraphMl, "graphml"),
        OutputFormat::Csv => (GraphFormat::EdgeListCsv, "csv"),
        OutputFormat::Json => {
            return Err(Error::Config(
                "export expects a graph format: csv, dot or graphml".into(),
            ))
        }
    };
    let exported = export(&full, graph_format);
    let path = config.out.join(format!("network_full.{extension}"));
    if graph_format == GraphFormat::EdgeListCsv {
        write_csv(&path, &provenance, &exported)?;
    } else {
        atomic_write(&path, &exported)?;
    }
    Ok(())
}
