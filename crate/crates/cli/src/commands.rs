use std::path::{Path, PathBuf};

use csr_core::{
    basis_matrix, build_design, denoise, fit_batch_with, fit_single, gibbs_compare, sample_mean, BasisSpec, NoiseModel,
    SampleGrid, SeriesBatch, RNG_ALGORITHM,
};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::{DenoiseArgs, FitArgs, GibbsArgs, GridPolicy, ReconstructArgs, SeriesInput, SynthArgs};
use crate::error::CliError;
use crate::io::{fmt_f64, read_table, table_csv, write_atomic, CoefficientFile, DataTable};
use crate::plot::{self, Line};

/// Loaded series with the grid they were sampled on.
struct Ingested {
    batch: SeriesBatch,
    grid: SampleGrid,
    policy: &'static str,
}

fn grid_for(table: &mut DataTable, policy: GridPolicy, path: &Path) -> Result<(SampleGrid, &'static str), CliError> {
    let n = table.values.nrows();
    match (policy, &table.timestamps) {
        (GridPolicy::File, Some(_)) => {
            table.sort_by_time();
            let ts = table.timestamps.as_deref().unwrap_or_default();
            let grid =
                SampleGrid::from_timestamps(ts).map_err(|e| CliError::data(path, format!("bad `t` column: {e}")))?;
            Ok((grid, "file"))
        }
        _ => {
            let grid = SampleGrid::uniform(n).map_err(|e| CliError::data(path, e.to_string()))?;
            Ok((grid, "uniform"))
        }
    }
}

fn ingest(input: &SeriesInput) -> Result<Ingested, CliError> {
    let mut table = read_table(&input.input)?;
    let (grid, policy) = grid_for(&mut table, input.grid, &input.input)?;
    let batch = SeriesBatch::new(table.values, table.labels)?;
    let batch = if input.normalize { batch.normalized() } else { batch };
    Ok(Ingested { batch, grid, policy })
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::data("<report>", e.to_string()))
}

fn capacity_warnings(n: usize, m: usize) -> Vec<String> {
    if n < 2 * m {
        vec![format!(
            "only {n} samples for {m} basis functions; estimates will be noisy"
        )]
    } else {
        Vec::new()
    }
}

#[derive(Debug, Serialize)]
struct GridReport {
    policy: &'static str,
    n: usize,
    t_min: f64,
    t_max: f64,
    offset: f64,
    scale: f64,
}

impl GridReport {
    fn new(grid: &SampleGrid, policy: &'static str) -> Self {
        let (t_min, t_max) = grid.original_range();
        let map = grid.mapping();
        Self {
            policy,
            n: grid.len(),
            t_min,
            t_max,
            offset: map.offset,
            scale: map.scale,
        }
    }
}

#[derive(Debug, Serialize)]
struct SeriesReport {
    label: String,
    rss: f64,
    offset: f64,
    scale: f64,
}

#[derive(Debug, Serialize)]
struct FitReport {
    command: &'static str,
    basis: String,
    degree: usize,
    functions: usize,
    n: usize,
    p: usize,
    solver: &'static str,
    normalize: bool,
    grid: GridReport,
    series: Vec<SeriesReport>,
    warnings: Vec<String>,
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let data = ingest(&args.input)?;
    let spec = BasisSpec::new(args.model.basis, args.model.degree);
    let dm = build_design(spec, data.grid.clone());
    let cs = fit_batch_with(&dm, &data.batch, args.solver.into())?;
    let warnings = capacity_warnings(dm.nrows(), dm.ncols());
    for w in &warnings {
        log::warn!("{w}");
    }

    let file = CoefficientFile {
        spec,
        n: dm.nrows(),
        normalize: args.input.normalize,
        t_range: data.grid.original_range(),
        labels: data.batch.labels().to_vec(),
        preprocess: data.batch.preprocess().to_vec(),
        coeffs: cs.coeffs.clone(),
    };
    let report = FitReport {
        command: "fit",
        basis: spec.family.to_string(),
        degree: spec.degree,
        functions: spec.len(),
        n: dm.nrows(),
        p: cs.n_series(),
        solver: match args.solver {
            crate::args::SolverArg::Qr => "qr",
            crate::args::SolverArg::Normal => "normal-equations",
        },
        normalize: args.input.normalize,
        grid: GridReport::new(&data.grid, data.policy),
        series: data
            .batch
            .labels()
            .iter()
            .zip(&cs.residual_norms)
            .zip(data.batch.preprocess())
            .map(|((label, rss), pre)| SeriesReport {
                label: label.clone(),
                rss: *rss,
                offset: pre.offset,
                scale: pre.scale,
            })
            .collect(),
        warnings,
    };
    write_atomic(&args.output, file.to_csv()?.as_bytes())?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| args.output.with_extension("json"));
    write_atomic(&report_path, to_json(&report)?.as_bytes())
}

fn select_series(labels: &[String], wanted: &[String]) -> Result<Vec<usize>, CliError> {
    if wanted.is_empty() {
        return Ok((0..labels.len()).collect());
    }
    wanted
        .iter()
        .map(|w| {
            labels
                .iter()
                .position(|l| l == w)
                .or_else(|| {
                    w.parse::<usize>()
                        .ok()
                        .filter(|i| (1..=labels.len()).contains(i))
                        .map(|i| i - 1)
                })
                .ok_or_else(|| CliError::Usage(format!("--plot-series: no series {w:?}")))
        })
        .collect()
}

pub fn denoise_cmd(args: &DenoiseArgs) -> Result<(), CliError> {
    let data = ingest(&args.input)?;
    let spec = BasisSpec::new(args.model.basis, args.model.degree);
    let selected = select_series(data.batch.labels(), &args.plot_series)?;
    let rec = denoise(&data.batch, &data.grid, spec)?;
    let times = data.grid.original();
    write_atomic(
        &args.output,
        table_csv(times, data.batch.labels(), &rec.values)?.as_bytes(),
    )?;

    if args.plot.plot {
        let mut lines = Vec::new();
        for &i in &selected {
            let label = &data.batch.labels()[i];
            lines.push(Line {
                label: format!("{label} (observed)"),
                x: times.to_vec(),
                y: data.batch.values().column(i).iter().copied().collect(),
                width: 0.8,
                color: i,
                opacity: 0.45,
            });
            lines.push(Line {
                label: format!("{label} ({spec})"),
                x: times.to_vec(),
                y: rec.values.column(i).iter().copied().collect(),
                width: 2.5,
                color: i,
                opacity: 1.0,
            });
        }
        let title = format!("{} representation, degree {}", spec.family, spec.degree);
        let svg = plot::render(&title, &lines, args.plot.width, args.plot.height);
        write_atomic(&args.output.with_extension("svg"), svg.as_bytes())?;
    }
    Ok(())
}

/// `--tau` value: a single variance, a comma-separated list, or `@FILE`
/// holding numbers separated by commas or whitespace.
pub fn parse_tau(raw: &str, functions: usize) -> Result<Vec<f64>, CliError> {
    let (source, text) = match raw.strip_prefix('@') {
        Some(path) => (
            PathBuf::from(path),
            std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        ),
        None => (PathBuf::from("--tau"), raw.to_string()),
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::data(&source, format!("cannot parse variance {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        0 => Err(CliError::data(&source, "no variances given")),
        1 => Ok(vec![values[0]; functions]),
        len if len == functions => Ok(values),
        len => Err(CliError::data(
            &source,
            format!("{len} variances given, basis has {functions} functions (give 1 or {functions})"),
        )),
    }
}

#[derive(Debug, Serialize)]
struct SynthMeta {
    command: &'static str,
    rng: &'static str,
    seed: u64,
    basis: String,
    degree: usize,
    variances: Vec<f64>,
    sigma: f64,
    mean: String,
    points: usize,
    series: usize,
    observations: String,
    clean: String,
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = BasisSpec::new(args.model.basis, args.model.degree);
    let variances = parse_tau(&args.tau, spec.len())?;
    let model = NoiseModel::new(spec, variances.clone(), args.sigma, args.seed)?;
    let grid = SampleGrid::uniform(args.points)?;
    let mean = args.mean;
    let clean = sample_mean(|t| mean.eval(t), &grid)?;
    let observed = csr_core::sample_observation(|t| mean.eval(t), &model, &grid, args.series)?;

    let labels = observed.labels().to_vec();
    let clean_matrix = DMatrix::from_fn(grid.len(), args.series, |j, _| clean[j]);
    let clean_path = sibling(&args.output, ".clean.csv");
    let meta_path = sibling(&args.output, ".json");
    let meta = SynthMeta {
        command: "synth",
        rng: RNG_ALGORITHM,
        seed: args.seed,
        basis: spec.family.to_string(),
        degree: spec.degree,
        variances,
        sigma: args.sigma,
        mean: mean.to_string(),
        points: args.points,
        series: args.series,
        observations: file_name(&args.output),
        clean: file_name(&clean_path),
    };
    write_atomic(
        &args.output,
        table_csv(grid.points(), &labels, observed.values())?.as_bytes(),
    )?;
    write_atomic(
        &clean_path,
        table_csv(grid.points(), &labels, &clean_matrix)?.as_bytes(),
    )?;
    write_atomic(&meta_path, to_json(&meta)?.as_bytes())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn gibbs(args: &GibbsArgs) -> Result<(), CliError> {
    if args.plot.plot && args.output.is_none() {
        return Err(CliError::Usage("--plot requires --output".into()));
    }
    let grid = SampleGrid::uniform(args.points)?;
    let signal = args.signal;
    let label = signal.to_string();
    let report = gibbs_compare(|t| signal.eval(t), &label, args.degree, &grid, args.delta)?;
    let json = to_json(&report)?;
    match &args.output {
        Some(path) => write_atomic(path, json.as_bytes())?,
        None => print!("{json}"),
    }

    if let (true, Some(path)) = (args.plot.plot, &args.output) {
        let y = sample_mean(|t| signal.eval(t), &grid)?;
        let mut lines = vec![Line {
            label: label.clone(),
            x: grid.points().to_vec(),
            y: y.clone(),
            width: 1.0,
            color: 1,
            opacity: 1.0,
        }];
        for (c, fam) in report.families.iter().enumerate() {
            let dm = build_design(BasisSpec::new(fam.family, fam.degree), grid.clone());
            let cs = fit_single(&dm, &y)?;
            lines.push(Line {
                label: format!("{} (k={})", fam.family, fam.degree),
                x: grid.points().to_vec(),
                y: dm.predict(&cs.coeffs).iter().copied().collect(),
                width: 1.8,
                color: [0, 2, 3][c % 3],
                opacity: 0.9,
            });
        }
        let title = format!("boundary behaviour for {label}, k = {}", args.degree);
        let svg = plot::render(&title, &lines, args.plot.width, args.plot.height);
        write_atomic(&path.with_extension("svg"), svg.as_bytes())?;
    }
    Ok(())
}

pub fn reconstruct_cmd(args: &ReconstructArgs) -> Result<(), CliError> {
    let file = CoefficientFile::read(&args.input)?;
    let (t_min, t_max) = file.t_range;
    let times: Vec<f64> = match (&args.like, args.points) {
        (Some(path), _) => {
            let mut table = read_table(path)?;
            let (grid, _) = grid_for(&mut table, args.grid, path)?;
            grid.original().to_vec()
        }
        (None, points) => {
            let grid = SampleGrid::uniform(points.unwrap_or(file.n))?;
            grid.points().iter().map(|u| t_min + (t_max - t_min) * u).collect()
        }
    };
    // Map onto [0, 1] with the fitting grid's range.
    let span = if t_max > t_min { t_max - t_min } else { 1.0 };
    let mut units = Vec::with_capacity(times.len());
    for &t in &times {
        let u = (t - t_min) / span;
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&u) {
            return Err(CliError::data(
                args.like.clone().unwrap_or_default(),
                format!("time {} lies outside the fitted range [{t_min}, {t_max}]", fmt_f64(t)),
            ));
        }
        units.push(u.clamp(0.0, 1.0));
    }
    let psi = basis_matrix(&file.spec, &units);
    let mut values = psi * &file.coeffs;
    for (mut col, pre) in values.column_iter_mut().zip(&file.preprocess) {
        col.iter_mut().for_each(|v| *v = pre.offset + pre.scale * *v);
    }
    write_atomic(&args.output, table_csv(&times, &file.labels, &values)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_forms() {
        assert_eq!(parse_tau("0.5", 3).unwrap(), vec![0.5; 3]);
        assert_eq!(parse_tau("1, 2,3", 3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_tau("1,2", 3).is_err());
        assert!(parse_tau("x", 3).is_err());
        assert!(parse_tau("", 3).is_err());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tau.txt");
        std::fs::write(&path, "1 2\n3\n").unwrap();
        assert_eq!(
            parse_tau(&format!("@{}", path.display()), 3).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn series_selection() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert_eq!(select_series(&labels, &[]).unwrap(), vec![0, 1]);
        assert_eq!(select_series(&labels, &["b".into(), "1".into()]).unwrap(), vec![1, 0]);
        assert!(select_series(&labels, &["3".into()]).is_err());
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(
            sibling(Path::new("out/obs.csv"), ".clean.csv"),
            PathBuf::from("out/obs.clean.csv")
        );
    }
}
