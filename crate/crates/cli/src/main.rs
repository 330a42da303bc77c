//! `lorimm` — command-line front end for the immersion toolkit.
//!
//! Subcommands cover the whole pipeline: sampling closed-form fixtures into
//! on-disk bundles (`generate`), curvature and integrability surveys
//! (`curvature`, `pfaff`), immersion construction from metric or hypersurface
//! bundles (`immerse`, `hyper`), uniqueness and stability experiments
//! (`align`, `stability`), and bundle re-encoding (`convert`).
//!
//! Exit codes: `0` on success; `2` on validation failures, with a one-line
//! JSON error object on standard error; `64` on usage errors; `74` on I/O
//! failures. `--json` switches every report on standard output to JSON. All
//! randomness is seeded (`stability` defaults to seed 0), so outputs are
//! deterministic for fixed inputs and flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;

use lorimm_core::alignment_norms::{align_hypersurface, align_manifold};
use lorimm_core::fieldio::{read_bundle, write_bundle, Bundle, Encoding};
use lorimm_core::fixtures::{default_chart, generate_fixture, FixtureParams};
use lorimm_core::grid_calculus::{christoffel, flatness_residual, riemann};
use lorimm_core::hypersurface_immersion::{
    assemble_rigging_coeffs, classical_gc_residual, frame_system_defect,
    fundamental_form_defect, generalized_gc_residual, immerse_hypersurface_forms,
    immerse_hypersurface_rigged, specialize_from_forms,
};
use lorimm_core::lorentz_algebra::{certify_lorentz, certify_lorentz_auto, lorentz_decompose};
use lorimm_core::manifold_immersion::{
    immerse_manifold, isometry_residual, metric_connection_coeffs,
};
use lorimm_core::pfaff_solver::pfaff_compatibility_residual;
use lorimm_core::sampling::rng;
use lorimm_core::{
    AlignMap, AlignmentResult, Error, FundamentalForms, GridChart, Mat, ResidualReport, Result,
    RiggedOperators, TensorField,
};

#[derive(Parser)]
#[command(
    name = "lorimm",
    version,
    about = "Isometric immersions of gridded Lorentzian data into Minkowski spacetime"
)]
struct Cli {
    /// Print machine-readable JSON reports on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a symmetric matrix G with one negative eigenvalue as FᵀηF = G and print F.
    Decompose {
        /// The matrix as a JSON array of rows, e.g. '[[-4,0],[0,9]]'.
        #[arg(long)]
        matrix: String,
        /// Admissibility margin in (0, 1]; chosen automatically when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Survey the curvature of a metric bundle and classify it as flat or not.
    Curvature {
        /// Bundle manifest holding a metric field `g`.
        manifest: PathBuf,
        /// Exponent of the residual L^p norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Residual threshold for the non-flat classification.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Optional directory for the connection and curvature component fields.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Encoding of the written fields.
        #[arg(long, value_enum, default_value_t = EncodingArg::Raw)]
        encoding: EncodingArg,
    },
    /// Check the integrability of the frame system a bundle induces.
    Pfaff {
        /// Bundle manifest (metric, fundamental forms, or rigged operators).
        manifest: PathBuf,
        /// Exponent of the residual L^p norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Residual threshold for the compatibility classification.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Construct an isometric immersion from a flat metric bundle.
    Immerse {
        /// Bundle manifest holding a metric field `g`.
        manifest: PathBuf,
        /// Output directory for the immersion bundle and `report.json`.
        #[arg(short, long)]
        output: PathBuf,
        /// Admissibility margin; chosen automatically from the base sample when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Base grid point as comma-separated indices; chart center when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        base: Option<Vec<usize>>,
        /// Exponent of the residual L^p norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Encoding of the written fields.
        #[arg(long, value_enum, default_value_t = EncodingArg::Raw)]
        encoding: EncodingArg,
    },
    /// Reconstruct a hypersurface immersion from fundamental forms or rigged operators.
    Hyper {
        /// Bundle manifest holding `g`+`K` (with `lambda` metadata) or `Gamma`+`K`+`L`+`M`.
        manifest: PathBuf,
        /// Output directory for the immersion bundle and `report.json`.
        #[arg(short, long)]
        output: PathBuf,
        /// Admissibility margin for forms data; chosen automatically when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Base grid point as comma-separated indices; chart center when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        base: Option<Vec<usize>>,
        /// Initial frame for rigged bundles, as a JSON matrix; identity when omitted.
        #[arg(long)]
        frame: Option<String>,
        /// Exponent of the residual L^p norm.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Encoding of the written fields.
        #[arg(long, value_enum, default_value_t = EncodingArg::Raw)]
        encoding: EncodingArg,
    },
    /// Reconstruct two bundles of the same kind and align the results.
    Align {
        /// First bundle manifest.
        manifest_a: PathBuf,
        /// Second bundle manifest (same chart and kind as the first).
        manifest_b: PathBuf,
        /// Exponent of the gap norms.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Require the aligning map to preserve orientation (hypersurface data only).
        #[arg(long)]
        proper: bool,
        /// Admissibility margin; chosen automatically when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Shared base grid point; chart center when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        base: Option<Vec<usize>>,
    },
    /// Perturb a bundle at several scales and report aligned-gap / input-gap ratios.
    Stability {
        /// Bundle manifest (metric, fundamental forms, or rigged operators).
        manifest: PathBuf,
        /// Seed of the random perturbation direction.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Perturbation scales, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [1e-2, 1e-3, 1e-4])]
        deltas: Vec<f64>,
        /// Exponent of the gap norms.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Admissibility margin; chosen automatically when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Base grid point; chart center when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        base: Option<Vec<usize>>,
    },
    /// Sample a built-in closed-form fixture into a bundle on disk.
    Generate {
        /// One of: minkowski, boosted_flat, rindler, desitter_slice,
        /// hyperplane_forms, timelike_sheet_forms, hyperboloid_forms.
        fixture: String,
        /// Samples per axis.
        #[arg(long, default_value_t = 33)]
        samples: usize,
        /// Output directory for the bundle.
        #[arg(short, long)]
        output: PathBuf,
        /// Encoding of the written fields.
        #[arg(long, value_enum, default_value_t = EncodingArg::Raw)]
        encoding: EncodingArg,
        /// boosted_flat: rapidity of the sampling boost.
        #[arg(long)]
        rapidity: Option<f64>,
        /// boosted_flat: stretch factor of the first spatial axis.
        #[arg(long)]
        anisotropy: Option<f64>,
    },
    /// Rewrite a bundle under a different field encoding.
    Convert {
        /// Bundle manifest to re-encode.
        manifest: PathBuf,
        /// Output directory for the re-encoded bundle.
        #[arg(short, long)]
        output: PathBuf,
        /// Target encoding.
        #[arg(long, value_enum)]
        encoding: EncodingArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Raw,
    Csv,
}

impl From<EncodingArg> for Encoding {
    fn from(e: EncodingArg) -> Encoding {
        match e {
            EncodingArg::Raw => Encoding::Raw,
            EncodingArg::Csv => Encoding::Csv,
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": error_kind(&e), "message": e.to_string() }
            });
            eprintln!("{payload}");
            let _ = json; // reports went unwritten; the error object is always JSON
            if e.is_io() {
                74
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.command {
        Command::Decompose { matrix, epsilon } => cmd_decompose(json, &matrix, epsilon),
        Command::Curvature {
            manifest,
            p,
            tol,
            output,
            encoding,
        } => cmd_curvature(json, &manifest, p, tol, output.as_deref(), encoding.into()),
        Command::Pfaff { manifest, p, tol } => cmd_pfaff(json, &manifest, p, tol),
        Command::Immerse {
            manifest,
            output,
            epsilon,
            base,
            p,
            encoding,
        } => cmd_immerse(json, &manifest, &output, epsilon, &base, p, encoding.into()),
        Command::Hyper {
            manifest,
            output,
            epsilon,
            base,
            frame,
            p,
            encoding,
        } => cmd_hyper(
            json,
            &manifest,
            &output,
            epsilon,
            &base,
            frame.as_deref(),
            p,
            encoding.into(),
        ),
        Command::Align {
            manifest_a,
            manifest_b,
            p,
            proper,
            epsilon,
            base,
        } => cmd_align(json, &manifest_a, &manifest_b, p, proper, epsilon, &base),
        Command::Stability {
            manifest,
            seed,
            deltas,
            p,
            epsilon,
            base,
        } => cmd_stability(json, &manifest, seed, &deltas, p, epsilon, &base),
        Command::Generate {
            fixture,
            samples,
            output,
            encoding,
            rapidity,
            anisotropy,
        } => cmd_generate(
            json,
            &fixture,
            samples,
            &output,
            encoding.into(),
            rapidity,
            anisotropy,
        ),
        Command::Convert {
            manifest,
            output,
            encoding,
        } => cmd_convert(json, &manifest, &output, encoding.into()),
    }
}

/// Stable machine-readable tag for each failure class.
fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::WrongSignature { .. } => "wrong_signature",
        Error::OutOfClass { .. } => "out_of_class",
        Error::EpsilonMismatch { .. } => "epsilon_mismatch",
        Error::NearBranchDegenerate { .. } => "near_branch_degenerate",
        Error::AxisOutOfRange { .. } => "axis_out_of_range",
        Error::SingularMetricAt { .. } => "singular_metric",
        Error::MixedSignature { .. } => "mixed_signature",
        Error::NotLorentzAt { .. } => "not_lorentz",
        Error::NotLorentzBlock { .. } => "not_lorentz_block",
        Error::SingularFrameAt { .. } => "singular_frame",
        Error::SingularFstar { .. } => "singular_base_frame",
        Error::NonFiniteState { .. } => "non_finite_state",
        Error::PathOutOfChart { .. } => "path_out_of_chart",
        Error::ShapeMismatch { .. } => "shape_mismatch",
        Error::ChartMismatch => "chart_mismatch",
        Error::NotProper { .. } => "not_proper",
        Error::UnknownFixture { .. } => "unknown_fixture",
        Error::BadParams(_) => "bad_params",
        Error::BadManifest(_) => "bad_manifest",
        Error::Numerical(_) => "numerical",
        Error::Io(_) => "io",
    }
}

// ---------------------------------------------------------------------------
// Bundle interpretation
// ---------------------------------------------------------------------------

/// What a bundle's fields describe, decided by their names.
enum Data {
    /// A single metric field `g`.
    Metric(TensorField),
    /// Fundamental forms `g`, `K` plus the `lambda` metadata entry.
    Forms(FundamentalForms),
    /// Rigged operator fields `Gamma`, `K`, `L`, `M`.
    Rigged(RiggedOperators),
}

impl Data {
    fn family(&self) -> &'static str {
        match self {
            Data::Metric(_) => "metric",
            Data::Forms(_) => "forms",
            Data::Rigged(_) => "rigged",
        }
    }
}

fn classify(bundle: Bundle) -> Result<Data> {
    let Bundle {
        mut fields,
        metadata,
        ..
    } = bundle;
    if ["Gamma", "K", "L", "M"].iter().all(|k| fields.contains_key(*k)) {
        let gamma = fields.remove("Gamma").unwrap();
        let k = fields.remove("K").unwrap();
        let l = fields.remove("L").unwrap();
        let m = fields.remove("M").unwrap();
        return Ok(Data::Rigged(RiggedOperators::new(gamma, k, l, m)?));
    }
    if fields.contains_key("g") && fields.contains_key("K") {
        let lambda_text = metadata.get("lambda").ok_or_else(|| {
            Error::BadManifest("forms bundle lacks the `lambda` metadata entry".into())
        })?;
        let lambda: f64 = lambda_text.parse().map_err(|_| {
            Error::BadManifest(format!("metadata `lambda` is not a number: {lambda_text}"))
        })?;
        let g = fields.remove("g").unwrap();
        let k = fields.remove("K").unwrap();
        return Ok(Data::Forms(FundamentalForms::new(g, k, lambda)?));
    }
    if let Some(g) = fields.remove("g") {
        return Ok(Data::Metric(g));
    }
    Err(Error::BadManifest(
        "unrecognized bundle: expected field `g` (metric), `g`+`K` with `lambda` metadata \
         (fundamental forms), or `Gamma`+`K`+`L`+`M` (rigged operators)"
            .into(),
    ))
}

fn load(manifest: &Path) -> Result<Data> {
    classify(read_bundle(manifest)?)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn parse_matrix(text: &str) -> Result<Mat> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("matrix must be a JSON array of rows: {e}")))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(
            "matrix must be square and non-empty".into(),
        ));
    }
    let mut m = Mat::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

fn matrix_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Compact matrix literal using the shortest round-trip float notation.
fn format_matrix(m: &Mat) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = (0..m.cols()).map(|j| format!("{}", m[(i, j)])).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn validated_base(chart: &GridChart, flag: &Option<Vec<usize>>) -> Result<Vec<usize>> {
    let base = match flag {
        Some(b) => b.clone(),
        None => chart.center_index(),
    };
    if base.len() != chart.dim() || base.iter().zip(chart.shape()).any(|(&i, n)| i >= n) {
        return Err(Error::InvalidInput(format!(
            "base point {base:?} lies outside a chart of shape {:?}",
            chart.shape()
        )));
    }
    Ok(base)
}

/// Admissibility margin for a metric bundle: the caller's choice, or the
/// automatic margin of the base-point sample.
fn metric_eps(g: &TensorField, base: &[usize], flag: Option<f64>) -> Result<f64> {
    if let Some(e) = flag {
        return Ok(e);
    }
    let lin = g.chart().lin_index(base);
    Ok(certify_lorentz_auto(&g.mat_at(lin))?.epsilon())
}

/// Admissibility margin for forms data, taken from the base block
/// diag(g(x*), λ).
fn forms_eps(forms: &FundamentalForms, base: &[usize], flag: Option<f64>) -> Result<f64> {
    if let Some(e) = flag {
        return Ok(e);
    }
    let n = forms.chart().dim();
    let g = forms.g().mat_at(forms.chart().lin_index(base));
    let mut block = Mat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            block[(i, j)] = g[(i, j)];
        }
    }
    block[(n, n)] = forms.lambda();
    Ok(certify_lorentz_auto(&block)?.epsilon())
}

fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn write_report(dir: &Path, value: &serde_json::Value) -> Result<PathBuf> {
    let path = dir.join("report.json");
    fs::write(&path, format!("{:#}\n", value))?;
    Ok(path)
}

fn report_json(report: &ResidualReport, extra: &[(&str, serde_json::Value)]) -> serde_json::Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    let obj = v.as_object_mut().expect("report is a JSON object");
    for (k, val) in extra {
        obj.insert((*k).to_string(), val.clone());
    }
    v
}

fn print_report(title: &str, r: &ResidualReport) {
    println!(
        "{title}: max_abs = {:.6e}, L^{} norm = {:.6e}",
        r.max_abs, r.p, r.lp_norm
    );
    for (label, v) in &r.per_equation {
        println!("  {label}: {v:.6e}");
    }
}

fn emit(json: bool, value: serde_json::Value, human: impl FnOnce()) {
    if json {
        println!("{value:#}");
    } else {
        human();
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_decompose(json: bool, matrix: &str, epsilon: Option<f64>) -> Result<()> {
    let g = parse_matrix(matrix)?;
    let cert = match epsilon {
        Some(e) => certify_lorentz(&g, e)?,
        None => certify_lorentz_auto(&g)?,
    };
    let f = lorentz_decompose(&cert).base_f().clone();
    emit(
        json,
        serde_json::json!({
            "f": matrix_rows(&f),
            "epsilon": cert.epsilon(),
            "eigenvalues": cert.eigvals(),
            "det": cert.det(),
        }),
        || println!("{}", format_matrix(&f)),
    );
    Ok(())
}

fn cmd_curvature(
    json: bool,
    manifest: &Path,
    p: f64,
    tol: f64,
    output: Option<&Path>,
    encoding: Encoding,
) -> Result<()> {
    let Data::Metric(g) = load(manifest)? else {
        return Err(Error::InvalidInput(
            "curvature expects a metric bundle (single field `g`)".into(),
        ));
    };
    let report = flatness_residual(&g, p)?;
    let nonflat = report.max_abs > tol;
    let mut written = None;
    if let Some(dir) = output {
        let fields = vec![
            ("Gamma".to_string(), christoffel(&g)?),
            ("R".to_string(), riemann(&g)?),
        ];
        let metadata = meta(&[("generator", "curvature".into())]);
        written = Some(write_bundle(dir, g.chart(), &fields, &metadata, encoding)?);
    }
    let mut extra = vec![
        ("nonflat", serde_json::json!(nonflat)),
        ("tol", serde_json::json!(tol)),
    ];
    if let Some(path) = &written {
        extra.push(("output", serde_json::json!(path.display().to_string())));
    }
    emit(json, report_json(&report, &extra), || {
        print_report("flatness residual", &report);
        if nonflat {
            println!("classification: non-flat (max_abs > {tol:e})");
        } else {
            println!("classification: flat within {tol:e}");
        }
        if let Some(path) = &written {
            println!("component fields written to {}", path.display());
        }
    });
    Ok(())
}

fn cmd_pfaff(json: bool, manifest: &Path, p: f64, tol: f64) -> Result<()> {
    let data = load(manifest)?;
    let coeffs = match &data {
        Data::Metric(g) => metric_connection_coeffs(g)?,
        Data::Forms(forms) => assemble_rigging_coeffs(&specialize_from_forms(forms)?),
        Data::Rigged(ops) => assemble_rigging_coeffs(ops),
    };
    let report = pfaff_compatibility_residual(&coeffs, p)?;
    let compatible = report.max_abs <= tol;
    let extra = vec![
        ("compatible", serde_json::json!(compatible)),
        ("tol", serde_json::json!(tol)),
        ("family", serde_json::json!(data.family())),
    ];
    emit(json, report_json(&report, &extra), || {
        print_report("compatibility residual", &report);
        if compatible {
            println!("classification: compatible within {tol:e}");
        } else {
            println!("classification: incompatible (max_abs > {tol:e})");
        }
    });
    Ok(())
}

fn cmd_immerse(
    json: bool,
    manifest: &Path,
    output: &Path,
    epsilon: Option<f64>,
    base: &Option<Vec<usize>>,
    p: f64,
    encoding: Encoding,
) -> Result<()> {
    let Data::Metric(g) = load(manifest)? else {
        return Err(Error::InvalidInput(
            "immerse expects a metric bundle; use `hyper` for hypersurface data".into(),
        ));
    };
    let base = validated_base(g.chart(), base)?;
    let eps = metric_eps(&g, &base, epsilon)?;
    let result = immerse_manifold(&g, &base, eps)?;
    let report = isometry_residual(&result, &g, p)?;

    let fields = vec![
        ("f".to_string(), result.f().clone()),
        ("frame".to_string(), result.frame().clone()),
    ];
    let metadata = meta(&[
        ("generator", "immerse".into()),
        ("base_point", format!("{base:?}")),
        ("epsilon", eps.to_string()),
    ]);
    let manifest_out = write_bundle(output, result.chart(), &fields, &metadata, encoding)?;
    let report_value = report_json(
        &report,
        &[
            ("epsilon", serde_json::json!(eps)),
            ("base_point", serde_json::json!(base)),
            (
                "output",
                serde_json::json!(manifest_out.display().to_string()),
            ),
        ],
    );
    let report_path = write_report(output, &report_value)?;
    emit(json, report_value, || {
        println!("immersion written to {}", manifest_out.display());
        print_report("isometry residual", &report);
        println!("report: {}", report_path.display());
    });
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_hyper(
    json: bool,
    manifest: &Path,
    output: &Path,
    epsilon: Option<f64>,
    base: &Option<Vec<usize>>,
    frame: Option<&str>,
    p: f64,
    encoding: Encoding,
) -> Result<()> {
    let (result, report, detail) = match load(manifest)? {
        Data::Metric(_) => {
            return Err(Error::InvalidInput(
                "hyper expects hypersurface data; use `immerse` for metric bundles".into(),
            ));
        }
        Data::Forms(forms) => {
            let base = validated_base(forms.chart(), base)?;
            let eps = forms_eps(&forms, &base, epsilon)?;
            let result = immerse_hypersurface_forms(&forms, &base, eps)?;
            let defect = fundamental_form_defect(&result, &forms, p)?;
            let gc = classical_gc_residual(&forms, p)?;
            let detail = serde_json::json!({
                "family": "forms",
                "epsilon": eps,
                "base_point": base,
                "gauss_codazzi": serde_json::to_value(&gc).expect("report serializes"),
            });
            (result, defect, detail)
        }
        Data::Rigged(ops) => {
            let base = validated_base(ops.chart(), base)?;
            let f_star = match frame {
                Some(text) => parse_matrix(text)?,
                None => Mat::identity(ops.chart().dim() + 1),
            };
            let result = immerse_hypersurface_rigged(&ops, &base, &f_star)?;
            let defect = frame_system_defect(&result, &ops, p)?;
            let gc = generalized_gc_residual(&ops, p)?;
            let detail = serde_json::json!({
                "family": "rigged",
                "base_point": base,
                "gauss_codazzi": serde_json::to_value(&gc).expect("report serializes"),
            });
            (result, defect, detail)
        }
    };

    let fields = vec![
        ("f".to_string(), result.f().clone()),
        ("rigging".to_string(), result.rigging().clone()),
        ("frame".to_string(), result.frame().clone()),
    ];
    let metadata = meta(&[("generator", "hyper".into())]);
    let manifest_out = write_bundle(output, result.chart(), &fields, &metadata, encoding)?;
    let mut report_value = serde_json::to_value(&report).expect("report serializes");
    let obj = report_value.as_object_mut().expect("report is a JSON object");
    for (k, v) in detail.as_object().expect("detail is a JSON object") {
        obj.insert(k.clone(), v.clone());
    }
    obj.insert(
        "output".to_string(),
        serde_json::json!(manifest_out.display().to_string()),
    );
    let report_path = write_report(output, &report_value)?;
    emit(json, report_value, || {
        println!("immersion written to {}", manifest_out.display());
        print_report("reconstruction defect", &report);
        println!("report: {}", report_path.display());
    });
    Ok(())
}

fn cmd_align(
    json: bool,
    manifest_a: &Path,
    manifest_b: &Path,
    p: f64,
    proper: bool,
    epsilon: Option<f64>,
    base: &Option<Vec<usize>>,
) -> Result<()> {
    let res: AlignmentResult = match (load(manifest_a)?, load(manifest_b)?) {
        (Data::Metric(g1), Data::Metric(g2)) => {
            let base = validated_base(g1.chart(), base)?;
            let r1 = immerse_manifold(&g1, &base, metric_eps(&g1, &base, epsilon)?)?;
            let r2 = immerse_manifold(&g2, &base, metric_eps(&g2, &base, epsilon)?)?;
            align_manifold(&r1, &r2, &g1, &g2, p)?
        }
        (Data::Forms(f1), Data::Forms(f2)) => {
            let base = validated_base(f1.chart(), base)?;
            let r1 = immerse_hypersurface_forms(&f1, &base, forms_eps(&f1, &base, epsilon)?)?;
            let r2 = immerse_hypersurface_forms(&f2, &base, forms_eps(&f2, &base, epsilon)?)?;
            let ops1 = specialize_from_forms(&f1)?;
            let ops2 = specialize_from_forms(&f2)?;
            align_hypersurface(&r1, &r2, &ops1, &ops2, p, proper)?
        }
        (Data::Rigged(o1), Data::Rigged(o2)) => {
            let base = validated_base(o1.chart(), base)?;
            let f_star = Mat::identity(o1.chart().dim() + 1);
            let r1 = immerse_hypersurface_rigged(&o1, &base, &f_star)?;
            let r2 = immerse_hypersurface_rigged(&o2, &base, &f_star)?;
            align_hypersurface(&r1, &r2, &o1, &o2, p, proper)?
        }
        (a, b) => {
            return Err(Error::InvalidInput(format!(
                "cannot align a {} bundle with a {} bundle",
                a.family(),
                b.family()
            )));
        }
    };
    let value = serde_json::to_value(&res).expect("alignment result serializes");
    emit(json, value, || {
        match &res.map {
            AlignMap::Isometry(m) => println!(
                "aligning map: rigid motion, {}",
                if m.proper() {
                    "orientation-preserving"
                } else {
                    "orientation-reversing"
                }
            ),
            AlignMap::Affine { .. } => println!("aligning map: affine"),
        }
        println!("input gap          = {:.6e}", res.input_gap);
        println!("aligned gap (W2p)  = {:.6e}", res.aligned_gap_w2p);
        println!("aligned gap (max)  = {:.6e}", res.aligned_gap_max);
        if res.input_gap > 0.0 {
            println!(
                "gap ratio          = {:.6e}",
                res.aligned_gap_w2p / res.input_gap
            );
        }
    });
    Ok(())
}

fn cmd_stability(
    json: bool,
    manifest: &Path,
    seed: u64,
    deltas: &[f64],
    p: f64,
    epsilon: Option<f64>,
    base: &Option<Vec<usize>>,
) -> Result<()> {
    if deltas.is_empty() || deltas.iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(Error::InvalidInput(
            "perturbation scales must be finite and positive".into(),
        ));
    }
    let mut r = rng(seed);
    let data = load(manifest)?;
    let family = data.family();
    let mut rows = Vec::new();
    match data {
        Data::Metric(g) => {
            let base = validated_base(g.chart(), base)?;
            let r1 = immerse_manifold(&g, &base, metric_eps(&g, &base, epsilon)?)?;
            let s = random_symmetric(&mut r, g.chart().dim());
            for &delta in deltas {
                let g2 = shifted_matrix_field(&g, &s, delta);
                let r2 = immerse_manifold(&g2, &base, metric_eps(&g2, &base, epsilon)?)?;
                rows.push((delta, align_manifold(&r1, &r2, &g, &g2, p)?));
            }
        }
        Data::Forms(forms) => {
            let base = validated_base(forms.chart(), base)?;
            let eps1 = forms_eps(&forms, &base, epsilon)?;
            let r1 = immerse_hypersurface_forms(&forms, &base, eps1)?;
            let ops1 = specialize_from_forms(&forms)?;
            let s = random_symmetric(&mut r, forms.chart().dim());
            for &delta in deltas {
                let k2 = shifted_matrix_field(forms.k(), &s, delta);
                let forms2 = FundamentalForms::new(forms.g().clone(), k2, forms.lambda())?;
                let r2 =
                    immerse_hypersurface_forms(&forms2, &base, forms_eps(&forms2, &base, epsilon)?)?;
                let ops2 = specialize_from_forms(&forms2)?;
                rows.push((delta, align_hypersurface(&r1, &r2, &ops1, &ops2, p, false)?));
            }
        }
        Data::Rigged(ops) => {
            let base = validated_base(ops.chart(), base)?;
            let f_star = Mat::identity(ops.chart().dim() + 1);
            let r1 = immerse_hypersurface_rigged(&ops, &base, &f_star)?;
            let s = random_symmetric(&mut r, ops.chart().dim());
            for &delta in deltas {
                let k2 = shifted_matrix_field(ops.k(), &s, delta);
                let ops2 = RiggedOperators::new(
                    ops.gamma().clone(),
                    k2,
                    ops.l().clone(),
                    ops.m().clone(),
                )?;
                let r2 = immerse_hypersurface_rigged(&ops2, &base, &f_star)?;
                rows.push((delta, align_hypersurface(&r1, &r2, &ops, &ops2, p, false)?));
            }
        }
    }

    let ratios: Vec<f64> = rows
        .iter()
        .map(|(_, res)| res.aligned_gap_w2p / res.input_gap)
        .collect();
    let spread = if ratios.iter().all(|r| r.is_finite() && *r > 0.0) {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        Some(max / min)
    } else {
        None
    };
    let row_values: Vec<serde_json::Value> = rows
        .iter()
        .zip(&ratios)
        .map(|((delta, res), ratio)| {
            serde_json::json!({
                "delta": delta,
                "input_gap": res.input_gap,
                "aligned_gap_w2p": res.aligned_gap_w2p,
                "aligned_gap_max": res.aligned_gap_max,
                "ratio": ratio,
            })
        })
        .collect();
    emit(
        json,
        serde_json::json!({
            "family": family,
            "seed": seed,
            "rows": row_values,
            "ratio_spread": spread,
        }),
        || {
            println!("stability of a {family} bundle, seed {seed}");
            for ((delta, res), ratio) in rows.iter().zip(&ratios) {
                println!(
                    "delta {delta:.3e}: input gap {:.6e}, aligned gap {:.6e}, ratio {ratio:.6e}",
                    res.input_gap, res.aligned_gap_w2p
                );
            }
            match spread {
                Some(s) => println!("ratio spread (max/min) = {s:.6e}"),
                None => println!("ratio spread undefined (non-finite or zero ratios)"),
            }
        },
    );
    Ok(())
}

fn cmd_generate(
    json: bool,
    fixture: &str,
    samples: usize,
    output: &Path,
    encoding: Encoding,
    rapidity: Option<f64>,
    anisotropy: Option<f64>,
) -> Result<()> {
    let defaults = FixtureParams::default();
    let params = FixtureParams {
        rapidity: rapidity.unwrap_or(defaults.rapidity),
        anisotropy: anisotropy.unwrap_or(defaults.anisotropy),
    };
    let chart = default_chart(fixture, samples)?;
    let out = generate_fixture(fixture, &chart, &params)?;
    let manifest = write_bundle(output, &chart, &out.fields, &out.metadata, encoding)?;
    emit(
        json,
        serde_json::json!({
            "manifest": manifest.display().to_string(),
            "fixture": fixture,
            "samples": samples,
        }),
        || println!("{}", manifest.display()),
    );
    Ok(())
}

fn cmd_convert(json: bool, manifest: &Path, output: &Path, encoding: Encoding) -> Result<()> {
    let Bundle {
        chart,
        fields,
        metadata,
    } = read_bundle(manifest)?;
    let fields: Vec<(String, TensorField)> = fields.into_iter().collect();
    let manifest_out = write_bundle(output, &chart, &fields, &metadata, encoding)?;
    emit(
        json,
        serde_json::json!({ "manifest": manifest_out.display().to_string() }),
        || println!("{}", manifest_out.display()),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// Stability perturbations
// ---------------------------------------------------------------------------

/// A random symmetric direction with unit largest entry.
fn random_symmetric(r: &mut impl Rng, n: usize) -> Mat {
    let mut s = Mat::zeros(n, n);
    let mut biggest = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let v = r.gen_range(-1.0..1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
            biggest = biggest.max(v.abs());
        }
    }
    if biggest == 0.0 {
        s[(0, 0)] = 1.0;
        return s;
    }
    s.scale(1.0 / biggest)
}

/// Adds the constant matrix `scale * s` to every sample of a matrix-valued
/// field; constant shifts keep the perturbed field exactly as smooth as the
/// input.
fn shifted_matrix_field(f: &TensorField, s: &Mat, scale: f64) -> TensorField {
    let n = s.rows();
    let cc = f.comp_count();
    assert_eq!(cc, n * n, "matrix-valued field expected");
    let mut data = f.as_slice().to_vec();
    for point in 0..f.chart().point_count() {
        for i in 0..n {
            for j in 0..n {
                data[point * cc + i * n + j] += scale * s[(i, j)];
            }
        }
    }
    TensorField::from_data(f.chart().clone(), f.comp_shape(), data)
        .expect("shape preserved by construction")
}
