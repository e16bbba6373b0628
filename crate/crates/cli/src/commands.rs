use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use embedgap::{
    adjacency_pairs, build_report, builtin_scheme, builtin_schemes, density, diversity,
    equivalence_max_deviation, frechet_gaussian, pool_domain_gap, read_binary, read_csv,
    read_grid_manifest, read_scheme, sample_subset, select, DiversityConfig, Error, FeatureSet,
    GapReport, GaussianModel, ModelJson, PerSampleGap, Result, SelectionConfig, SelectionMode,
};
use serde::Serialize;

use crate::manifest::{ManifestBuilder, RunManifest};

const EQUIV_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    GapWeighted,
    UniformRandom,
}

impl ModeArg {
    fn to_mode(self) -> SelectionMode {
        match self {
            ModeArg::GapWeighted => SelectionMode::GapWeighted,
            ModeArg::UniformRandom => SelectionMode::UniformRandom,
        }
    }

    fn name(self) -> &'static str {
        match self {
            ModeArg::GapWeighted => "gap-weighted",
            ModeArg::UniformRandom => "uniform-random",
        }
    }
}

pub fn cmd_fit(reference: &Path, ridge: f64, out: Option<&Path>, seed: u64) -> Result<ExitCode> {
    let out = require_out(out)?;
    let set = load_features(reference)?;
    let model = GaussianModel::fit(&set, ridge)?;
    let manifest = ManifestBuilder::new("fit")
        .input("reference", reference)
        .parameter("seed", seed)
        .parameter("n", set.len())
        .parameter("dim", set.dim())
        .parameter("rank_deficient", model.rank_deficient())
        .output("model", out)
        .ridge(ridge, model.ridge())
        .finish();

    #[derive(Serialize)]
    struct FitDoc {
        manifest: RunManifest,
        model: ModelJson,
    }
    write_json(out, &FitDoc {
        manifest,
        model: model.to_json(),
    })?;
    println!(
        "wrote {} (n={}, d={}, ridge={})",
        out.display(),
        set.len(),
        set.dim(),
        model.ridge()
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_gap(
    model_path: &Path,
    test_path: &Path,
    fractions: &[f64],
    bins: usize,
    range: Option<&str>,
    out: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let out = require_out(out)?;
    let model = load_model(model_path)?;
    let test = load_features(test_path)?;
    let range = range.map(parse_range).transpose()?;
    let report = build_report(&model, &test, fractions, bins, range)?;

    let mut warnings = Vec::new();
    if report.scatter.is_none() {
        warnings.push("test set has no scores; scatter export omitted".to_string());
    }

    let hist_path = side_path(out, "_hist.csv");
    let mut hist_csv = String::from("bin_lo,bin_hi,count\n");
    for bin in &report.histogram.bins {
        let _ = writeln!(hist_csv, "{},{},{}", bin.lo, bin.hi, bin.count);
    }
    std::fs::write(&hist_path, hist_csv)?;

    let mut builder = ManifestBuilder::new("gap")
        .input("model", model_path)
        .input("test", test_path)
        .parameter("seed", seed)
        .parameter("fractions", join_floats(fractions))
        .parameter("bins", bins)
        .output("report", out)
        .output("histogram_csv", &hist_path);
    if let Some((lo, hi)) = range {
        builder = builder.parameter("range", format!("{lo},{hi}"));
    }
    if let Some(scatter) = &report.scatter {
        let scatter_path = side_path(out, "_scatter.csv");
        let mut csv = String::from("score,distance\n");
        for pt in scatter {
            let _ = writeln!(csv, "{},{}", pt.score, pt.distance);
        }
        std::fs::write(&scatter_path, csv)?;
        builder = builder.output("scatter_csv", &scatter_path);
    }

    #[derive(Serialize)]
    struct GapDoc {
        manifest: RunManifest,
        warnings: Vec<String>,
        report: GapReport,
    }
    write_json(out, &GapDoc {
        manifest: builder.finish(),
        warnings,
        report: report.clone(),
    })?;
    println!(
        "wrote {} (n={}, gap_all={}, cross_entropy={})",
        out.display(),
        report.per_sample.len(),
        report.gap_all,
        report.cross_entropy
    );
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_pool(
    model_path: &Path,
    pool_path: &Path,
    grid_path: &Path,
    exponent: f64,
    out: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let out = require_out(out)?;
    let model = load_model(model_path)?;
    let pool = load_features(pool_path)?;
    let grid = read_grid_manifest(grid_path)?;

    for id in grid.assignment() {
        if pool.row_of(id).is_none() {
            return Err(Error::UnknownId { id: id.clone() });
        }
    }

    let pairs = adjacency_pairs(&grid);
    let config = DiversityConfig { exponent };

    #[derive(Serialize)]
    struct PoolReport {
        pool_size: usize,
        adjacency_pair_count: usize,
        density: f64,
        diversity: f64,
        diversity_exponent: f64,
        domain_gap: f64,
    }
    let report = PoolReport {
        pool_size: pool.len(),
        adjacency_pair_count: pairs.len(),
        density: density(&pool, &pairs)?,
        diversity: diversity(&pool, &config)?,
        diversity_exponent: exponent,
        domain_gap: pool_domain_gap(&model, &pool)?,
    };

    let manifest = ManifestBuilder::new("pool")
        .input("model", model_path)
        .input("pool", pool_path)
        .input("grid", grid_path)
        .parameter("seed", seed)
        .parameter("exponent", exponent)
        .output("report", out)
        .finish();

    #[derive(Serialize)]
    struct PoolDoc {
        manifest: RunManifest,
        report: PoolReport,
    }
    let summary = format!(
        "wrote {} (density={}, diversity={}, domain_gap={})",
        out.display(),
        report.density,
        report.diversity,
        report.domain_gap
    );
    write_json(out, &PoolDoc { manifest, report })?;
    println!("{summary}");
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_subset(
    grid_path: &Path,
    scheme_arg: &str,
    out: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let out = require_out(out)?;
    let grid = read_grid_manifest(grid_path)?;
    let scheme = resolve_scheme(scheme_arg)?;
    let ids = sample_subset(&grid, &scheme)?;

    let mut body = String::with_capacity(ids.len() * 16);
    for id in &ids {
        body.push_str(id);
        body.push('\n');
    }
    std::fs::write(out, body)?;

    let manifest = ManifestBuilder::new("subset")
        .input("grid", grid_path)
        .parameter("seed", seed)
        .parameter("scheme", scheme_arg)
        .parameter("scheme_name", &scheme.name)
        .parameter("count", ids.len())
        .output("ids", out)
        .finish();
    write_manifest_sidecar(out, &manifest)?;
    println!("wrote {} ({} ids, scheme {})", out.display(), ids.len(), scheme.name);
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_equiv_check(
    trials: usize,
    dim_max: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let max_abs_deviation = equivalence_max_deviation(trials, dim_max, seed)?;
    let pass = max_abs_deviation <= EQUIV_TOLERANCE;
    let manifest = ManifestBuilder::new("equiv-check")
        .parameter("seed", seed)
        .parameter("trials", trials)
        .parameter("dim_max", dim_max)
        .finish();

    #[derive(Serialize)]
    struct EquivDoc {
        manifest: RunManifest,
        trials: usize,
        dim_max: usize,
        tolerance: f64,
        max_abs_deviation: f64,
        pass: bool,
    }
    let doc = EquivDoc {
        manifest,
        trials,
        dim_max,
        tolerance: EQUIV_TOLERANCE,
        max_abs_deviation,
        pass,
    };
    if let Some(out) = out {
        write_json(out, &doc)?;
    }
    println!("max_abs_deviation={max_abs_deviation:e} pass={pass}");
    if pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

pub fn cmd_select(
    per_item_path: &Path,
    count: usize,
    mode: ModeArg,
    temperature: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let out = require_out(out)?;
    let per_item = load_per_item(per_item_path)?;
    let config = SelectionConfig {
        count,
        mode: mode.to_mode(),
        temperature,
        seed,
    };
    let ids = select(&per_item, &config)?;

    let mut body = String::with_capacity(ids.len() * 16);
    for id in &ids {
        body.push_str(id);
        body.push('\n');
    }
    std::fs::write(out, body)?;

    let manifest = ManifestBuilder::new("select")
        .input("per_item", per_item_path)
        .parameter("seed", seed)
        .parameter("count", count)
        .parameter("mode", mode.name())
        .parameter("temperature", temperature)
        .output("ids", out)
        .finish();
    write_manifest_sidecar(out, &manifest)?;
    println!("wrote {} ({} ids, mode {})", out.display(), ids.len(), mode.name());
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_frechet(
    model_a: &Path,
    model_b: &Path,
    out: Option<&Path>,
    seed: u64,
) -> Result<ExitCode> {
    let a = load_model(model_a)?;
    let b = load_model(model_b)?;
    let distance = frechet_gaussian(&a, &b)?;
    let manifest = ManifestBuilder::new("frechet")
        .input("model_a", model_a)
        .input("model_b", model_b)
        .parameter("seed", seed)
        .finish();

    #[derive(Serialize)]
    struct FrechetDoc {
        manifest: RunManifest,
        distance: f64,
    }
    let doc = FrechetDoc { manifest, distance };
    if let Some(out) = out {
        write_json(out, &doc)?;
    }
    println!("frechet_distance={distance}");
    Ok(ExitCode::SUCCESS)
}

// ---- shared helpers ----

fn require_out(out: Option<&Path>) -> Result<&Path> {
    out.ok_or_else(|| Error::InvalidArgument {
        msg: "this command requires --out".into(),
    })
}

/// CSV by default; .fset/.bin use the binary format.
fn load_features(path: &Path) -> Result<FeatureSet> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("fset") | Some("bin") => read_binary(path),
        _ => read_csv(path),
    }
}

/// Accepts a bare model document or any JSON object with a `model` field
/// (e.g. the output of `fit`).
fn load_model(path: &Path) -> Result<GaussianModel> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let doc: ModelJson = match value.get("model") {
        Some(inner) => serde_json::from_value(inner.clone())?,
        None => serde_json::from_value(value)?,
    };
    GaussianModel::from_json(&doc)
}

/// Per-item lists come from gap reports (JSON, possibly wrapped), bare JSON
/// arrays, or two-column CSV.
fn load_per_item(path: &Path) -> Result<Vec<PerSampleGap>> {
    if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        return load_per_item_csv(path);
    }
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let per_sample = value
        .get("report")
        .and_then(|r| r.get("per_sample"))
        .or_else(|| value.get("per_sample"))
        .unwrap_or(&value);
    Ok(serde_json::from_value(per_sample.clone())?)
}

fn load_per_item_csv(path: &Path) -> Result<Vec<PerSampleGap>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "id,mahalanobis_sq" => {}
        _ => {
            return Err(Error::Csv {
                row: 1,
                msg: "expected header \"id,mahalanobis_sq\"".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (id, value) = line.split_once(',').ok_or_else(|| Error::Csv {
            row: i + 1,
            msg: "expected two fields".into(),
        })?;
        let mahalanobis_sq: f64 = value.trim().parse().map_err(|_| Error::Csv {
            row: i + 1,
            msg: format!("non-numeric distance {value:?}"),
        })?;
        out.push(PerSampleGap {
            id: id.to_string(),
            mahalanobis_sq,
        });
    }
    Ok(out)
}

fn resolve_scheme(arg: &str) -> Result<embedgap::SubsetScheme> {
    if let Some(scheme) = builtin_scheme(arg) {
        return Ok(scheme);
    }
    let path = Path::new(arg);
    if path.exists() {
        return read_scheme(path);
    }
    let names: Vec<String> = builtin_schemes().into_iter().map(|s| s.name).collect();
    Err(Error::InvalidArgument {
        msg: format!(
            "unknown scheme {arg:?}: not a builtin ({}) and no such file",
            names.join(", ")
        ),
    })
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument {
            msg: format!("range must be lo,hi; got {text:?}"),
        });
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| Error::InvalidArgument {
        msg: format!("bad range bound {:?}", parts[0]),
    })?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| Error::InvalidArgument {
        msg: format!("bad range bound {:?}", parts[1]),
    })?;
    Ok((lo, hi))
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn side_path(out: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    out.with_file_name(format!("{stem}{suffix}"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_manifest_sidecar(out: &Path, manifest: &RunManifest) -> Result<()> {
    let path = out.with_file_name(format!(
        "{}.manifest.json",
        out.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    write_json(&path, manifest)
}
