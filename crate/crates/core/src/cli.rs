//! Batch front-end: file loading, suite selection, tables and exit status.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use thiserror::Error;

use crate::fusion::{fp_dimensions, sl2_verlinde, sln_modular_data, BasedRing, FusionError, ModularData};
use crate::pointed::{antipode_obstruction, fun_omega, omega_w, Obstruction, PointedError, ThreeCocycle};
use crate::quasitri::{
    coboundary, drinfeld_element, hermitian_coboundary_check, positivity_check, verify_omega_involution, verify_quasitriangular,
    verify_ribbon, QuasiError, QuasiTriData,
};
use crate::report::{Report, Verdict};
use crate::scalars::{cyc, ScalarError};
use crate::tannaka::{choose_structure, reconstruct, reseed, sixj_from_maps, Associativity, SixJ, TannakaError};
use crate::textfmt::{self, FormatError};
use crate::uqsl2::{assemble_aw, sl2_functor_data, categorical_s, dk_braiding_table, emit_presentation, verify_aw, Uqsl2Error};
use crate::wqh::{WqhError, WqhPresentation};

/// Environment variable holding the default tolerance for certified numerics.
pub const TOLERANCE_ENV: &str = "WQH_TOLERANCE";
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Wqh(#[from] WqhError),
    #[error(transparent)]
    Quasi(#[from] QuasiError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Pointed(#[from] PointedError),
    #[error(transparent)]
    Tannaka(#[from] TannakaError),
    #[error(transparent)]
    Uqsl2(#[from] Uqsl2Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tolerance: f64,
    pub seed: u64,
    pub format: OutputFormat,
    pub allow_indeterminate: bool,
}

impl RunConfig {
    pub fn new(tolerance: f64, seed: u64, format: OutputFormat, allow_indeterminate: bool) -> Result<RunConfig, CliError> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(CliError::Tolerance(tolerance));
        }
        Ok(RunConfig { tolerance, seed, format, allow_indeterminate })
    }
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig { tolerance: DEFAULT_TOLERANCE, seed: 0, format: OutputFormat::Text, allow_indeterminate: false }
    }
}

/// Reports that decide the exit status, plus tables that are only printed.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub reports: Vec<Report>,
    pub tables: Vec<(String, String)>,
    pub data: serde_json::Map<String, Value>,
}

impl Outcome {
    fn table(&mut self, title: &str, body: String) {
        self.tables.push((title.to_string(), body));
    }

    /// True when no check failed and every indeterminate check is allowed.
    pub fn success(&self, cfg: &RunConfig) -> bool {
        self.reports.iter().all(|r| !r.has_failure() && (cfg.allow_indeterminate || !r.has_indeterminate()))
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => {
                let mut out = String::new();
                for (title, body) in &self.tables {
                    let _ = writeln!(out, "== {title} ==\n{body}");
                }
                for r in &self.reports {
                    let _ = writeln!(out, "{r}");
                }
                out
            }
            OutputFormat::Json => {
                let mut obj = self.data.clone();
                obj.insert("reports".into(), serde_json::to_value(&self.reports).expect("reports serialize"));
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json serializes");
                s.push('\n');
                s
            }
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Left-aligned columns separated by two spaces.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

fn push_result<E: std::fmt::Display>(rep: &mut Report, name: &str, r: Result<Report, E>) {
    match r {
        Ok(sub) => {
            rep.absorb(name, sub);
        }
        Err(e) => {
            rep.push(name, Verdict::Fail, Some(e.to_string()));
        }
    }
}

/// Every suite applicable to the structure a presentation declares.
pub fn presentation_report(w: &WqhPresentation, quasi: Option<&QuasiTriData>, title: &str) -> Report {
    let mut rep = Report::new(title);
    rep.absorb("wqb", w.verify_wqb());
    if w.antipode.is_some() {
        push_result(&mut rep, "antipode", w.verify_antipode());
    }
    let Some(q) = quasi else { return rep };
    rep.absorb("R-matrix", verify_quasitriangular(w, q));
    if q.ribbon_v.is_some() {
        push_result(&mut rep, "ribbon", verify_ribbon(w, q));
    }
    if q.ribbon_sqrt_w.is_some() {
        push_result(&mut rep, "coboundary", coboundary(w, q).map(|c| c.report));
    }
    if w.antipode.is_some() {
        push_result(&mut rep, "Drinfeld", drinfeld_element(w, q).map(|d| d.report));
    }
    if let Some((omega, omega_inv)) = &q.omega {
        push_result(&mut rep, "Ω-involution", verify_omega_involution(w, omega, omega_inv));
        push_result(&mut rep, "hermitian", hermitian_coboundary_check(w, q));
        for (k, c) in positivity_check(omega, None).blocks {
            let labels: Vec<&str> = k.iter().map(|&r| w.shape.label(r)).collect();
            rep.push(format!("Ω positive on ({})", labels.join(", ")), Verdict::from(c), None);
        }
    }
    rep
}

/// Loads a presentation file and runs the wqh and quasitri suites it declares.
pub fn cmd_verify(path: &Path, _cfg: &RunConfig) -> Result<Outcome, CliError> {
    let secs = textfmt::parse(&read(path)?)?;
    let w = WqhPresentation::from_sections(&secs)?;
    let quasi = QuasiTriData::from_sections(&w.shape, &secs)?;
    let mut out = Outcome::default();
    let wb = w.is_w_bialgebra().passed();
    let mut info = vec![
        vec!["blocks".to_string(), w.shape.labels().join(" ")],
        vec!["dims".to_string(), join(w.shape.dims())],
        vec!["w-bialgebra".to_string(), wb.to_string()],
        vec!["quasitriangular data".to_string(), quasi.is_some().to_string()],
    ];
    if w.antipode.is_some() {
        info.push(vec!["strong antipode".to_string(), w.strong_antipode()?.strong().is_some().to_string()]);
    }
    out.table("structure", aligned(&info));
    out.data.insert("path".into(), json!(path.display().to_string()));
    out.data.insert("w_bialgebra".into(), json!(wb));
    out.reports.push(presentation_report(&w, quasi.as_ref(), &path.display().to_string()));
    Ok(out)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

/// Which fusion ring the `fusion` subcommand describes.
#[derive(Debug, Clone, PartialEq)]
pub enum FusionSource {
    Sl2 { level: usize },
    Sln { n: usize, ell: usize },
    File(std::path::PathBuf),
}

fn ring_tables(out: &mut Outcome, ring: &BasedRing) {
    let mut rows = vec![std::iter::once("⊗".to_string()).chain(ring.labels().iter().cloned()).collect::<Vec<_>>()];
    for i in 0..ring.rank() {
        let mut row = vec![ring.label(i).to_string()];
        for j in 0..ring.rank() {
            let terms: Vec<String> = ring
                .product(i, j)
                .iter()
                .map(|&(k, c)| if c == 1 { ring.label(k).to_string() } else { format!("{c}{}", ring.label(k)) })
                .collect();
            row.push(if terms.is_empty() { "0".into() } else { terms.join("+") });
        }
        rows.push(row);
    }
    out.table("fusion", aligned(&rows));
    let fp = fp_dimensions(ring);
    let rows: Vec<Vec<String>> = (0..ring.rank())
        .map(|i| vec![ring.label(i).to_string(), format!("{:.12}", fp[i].value), format!("[{:.12}, {:.12}]", fp[i].lower, fp[i].upper)])
        .collect();
    out.table("FP dimensions", aligned(&rows));
    let mut table = Vec::new();
    for i in 0..ring.rank() {
        for j in 0..ring.rank() {
            table.extend(ring.product(i, j).into_iter().map(|(k, c)| json!([i, j, k, c])));
        }
    }
    out.data.insert("labels".into(), json!(ring.labels()));
    out.data.insert("fusion".into(), json!(table));
    out.data.insert("fp_dimensions".into(), serde_json::to_value(&fp).expect("fp dims serialize"));
}

fn matrix_rows(labels: &[String], m: &crate::blockalg::Mat) -> Vec<Vec<String>> {
    let mut rows = vec![std::iter::once(String::new()).chain(labels.iter().cloned()).collect::<Vec<_>>()];
    for (i, l) in labels.iter().enumerate() {
        rows.push(std::iter::once(l.clone()).chain((0..labels.len()).map(|j| m.get(i, j).to_string())).collect());
    }
    rows
}

fn modular_tables(out: &mut Outcome, ring: &BasedRing, md: ModularData) {
    let rows: Vec<Vec<String>> = (0..ring.rank())
        .map(|i| vec![ring.label(i).to_string(), md.dims[i].to_string(), md.theta[i].to_string()])
        .collect();
    let header = vec!["label".to_string(), "qdim".to_string(), "θ".to_string()];
    out.table("quantum dimensions and twists", aligned(&std::iter::once(header).chain(rows).collect::<Vec<_>>()));
    out.table("S", aligned(&matrix_rows(ring.labels(), &md.s)));
    out.table("T", aligned(&matrix_rows(ring.labels(), &md.t)));
    let dense = |m: &crate::blockalg::Mat| -> Vec<Vec<String>> {
        (0..ring.rank()).map(|i| (0..ring.rank()).map(|j| m.get(i, j).to_string()).collect()).collect()
    };
    out.data.insert("qdims".into(), json!(strings(&md.dims)));
    out.data.insert("theta".into(), json!(strings(&md.theta)));
    out.data.insert("s".into(), json!(dense(&md.s)));
    out.data.insert("t".into(), json!(dense(&md.t)));
    out.data.insert("modular".into(), json!(md.modular));
    out.reports.push(md.report);
}

/// Fusion table, dimensions, twists and modular data.
pub fn cmd_fusion(src: &FusionSource, _cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match src {
        FusionSource::Sl2 { level } => {
            let (ring, md) = sln_modular_data(2, level + 2)?;
            let mut rep = Report::new("sl2 Verlinde");
            rep.flag("agrees with the closed formula", same_ring(&ring, &sl2_verlinde(*level)), None);
            ring_tables(&mut out, &ring);
            modular_tables(&mut out, &ring, md);
            out.reports.push(rep);
        }
        FusionSource::Sln { n, ell } => {
            let (ring, md) = sln_modular_data(*n, *ell)?;
            ring_tables(&mut out, &ring);
            modular_tables(&mut out, &ring, md);
        }
        FusionSource::File(path) => {
            let ring = BasedRing::from_text(&read(path)?)?;
            let mut rep = Report::new(path.display().to_string());
            rep.flag("associative", ring.associativity_failure().is_none(), None);
            ring_tables(&mut out, &ring);
            out.reports.push(rep);
        }
    }
    Ok(out)
}

fn same_ring(a: &BasedRing, b: &BasedRing) -> bool {
    let n = a.rank();
    n == b.rank()
        && (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| a.coeff(i, j, k) == b.coeff(i, j, k))))
}

/// The cocycle behind the `pointed` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum CocycleSource {
    /// ω_w with w = e^{2πi·power/N}.
    Generator { order: usize, power: i64 },
    File(std::path::PathBuf),
}

/// Fun_ω(Z_N): verification, antipode obstruction and the emitted presentation.
pub fn cmd_pointed(src: &CocycleSource, emit: Option<&Path>, _cfg: &RunConfig) -> Result<Outcome, CliError> {
    let omega = match src {
        CocycleSource::Generator { order, power } => {
            if *order == 0 {
                return Err(CliError::Usage("order must be positive".into()));
            }
            omega_w(*order, &cyc(*order as u32, *power)?)?
        }
        CocycleSource::File(path) => ThreeCocycle::from_text(&read(path)?)?,
    };
    let w = fun_omega(&omega)?;
    let mut out = Outcome::default();
    let mut rows = vec![vec!["order".to_string(), omega.order().to_string()], vec!["trivial ω".to_string(), omega.is_trivial().to_string()]];
    let strong = w.strong_antipode()?.strong().is_some();
    rows.push(vec!["strong antipode".to_string(), strong.to_string()]);
    let solved = antipode_obstruction(&omega);
    let obstruction = match &solved {
        Obstruction::Solved(_) => None,
        Obstruction::ObstructedAt(g) => Some((*g, omega.get(*g, *g, *g))),
    };
    match &obstruction {
        None => rows.push(vec!["obstruction".to_string(), "none".to_string()]),
        Some((g, v)) => rows.push(vec!["obstruction".to_string(), format!("ω({g},{g},{g}) = {v}")]),
    }
    out.table("Fun_ω(Z_N)", aligned(&rows));
    out.data.insert("order".into(), json!(omega.order()));
    out.data.insert("strong_antipode".into(), json!(strong));
    out.data.insert(
        "obstruction".into(),
        obstruction.as_ref().map_or(Value::Null, |(g, v)| json!({ "element": g, "value": v.to_string() })),
    );
    let mut rep = presentation_report(&w, None, &format!("Fun_ω(Z_{})", omega.order()));
    rep.flag("strong antipode iff ω is trivial", strong == omega.is_trivial(), None);
    if let Obstruction::Solved(f) = &solved {
        let twisted = w.twist(&f.to_twist(&w))?;
        rep.flag("strong antipode after the solving twist", twisted.strong_antipode()?.strong().is_some(), None);
    }
    out.reports.push(rep);
    if let Some(p) = emit {
        write(p, &w.to_text())?;
    }
    Ok(out)
}

/// The ring behind the `tannaka` subcommand.
#[derive(Debug, Clone, PartialEq)]
pub enum RingSource {
    Pointed(usize),
    Sl2(usize),
    File(std::path::PathBuf),
}

/// Reconstruction from a seeded choice of fiber-functor data.
pub fn cmd_tannaka(src: &RingSource, dims: &[usize], emit: Option<&Path>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (base, assoc) = match src {
        RingSource::Sl2(k) => {
            let (_, fd) = sl2_functor_data(k + 2)?;
            if !dims.is_empty() && dims != fd.dims {
                return Err(CliError::Usage(format!("sl2 dims are fixed by the Weyl modules: {}", join(&fd.dims))));
            }
            let assoc = Associativity::Explicit(sixj_from_maps(&fd)?);
            (fd, assoc)
        }
        RingSource::Pointed(_) | RingSource::File(_) => {
            let ring = match src {
                RingSource::Pointed(n) => BasedRing::pointed(*n),
                RingSource::File(path) => BasedRing::from_text(&read(path)?)?,
                RingSource::Sl2(_) => unreachable!(),
            };
            let dims: Vec<usize> = if dims.is_empty() { vec![1; ring.rank()] } else { dims.to_vec() };
            let fd = choose_structure(&ring, &dims, 0)?;
            let assoc = Associativity::Explicit(SixJ::trivial(&fd));
            (fd, assoc)
        }
    };
    let (ring, dims) = (base.ring.clone(), base.dims.clone());
    let fd = reseed(base, cfg.seed);
    let rec = reconstruct(&fd, &assoc, None)?;
    let w = rec.presentation;
    let mut out = Outcome::default();
    let rows = vec![
        vec!["labels".to_string(), ring.labels().join(" ")],
        vec!["dims".to_string(), join(&dims)],
        vec!["seed".to_string(), cfg.seed.to_string()],
        vec!["w-bialgebra".to_string(), w.is_w_bialgebra().passed().to_string()],
    ];
    out.table("reconstruction", aligned(&rows));
    out.data.insert("labels".into(), json!(ring.labels()));
    out.data.insert("dims".into(), json!(dims));
    out.data.insert("seed".into(), json!(cfg.seed));
    out.reports.push(presentation_report(&w, None, "reconstructed algebra"));
    if let Some(p) = emit {
        write(p, &w.to_text())?;
    }
    Ok(out)
}

/// Options of the `uqsl2` subcommand.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Uqsl2Options {
    pub ell: usize,
    pub emit: Option<std::path::PathBuf>,
    pub braiding_table: bool,
    pub verify_all: bool,
}

/// A_W(sl2, e^{iπ/ℓ}, ℓ): assembly, verification, the braiding table and emission.
pub fn cmd_uqsl2(opts: &Uqsl2Options, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let aw = assemble_aw(opts.ell)?;
    let w = &aw.presentation;
    let mut out = Outcome::default();
    let rows = vec![
        vec!["ℓ".to_string(), opts.ell.to_string()],
        vec!["blocks".to_string(), w.shape.labels().join(" ")],
        vec!["dims".to_string(), join(w.shape.dims())],
    ];
    out.table("A_W(sl2)", aligned(&rows));
    out.data.insert("ell".into(), json!(opts.ell));
    out.data.insert("dims".into(), json!(w.shape.dims()));
    if opts.verify_all {
        out.reports.push(verify_aw(&aw)?);
        let s = categorical_s(&aw)?;
        out.table("categorical S", aligned(&matrix_rows(w.shape.labels(), &s.s)));
        out.reports.push(s.report);
    }
    if opts.braiding_table {
        let table = dk_braiding_table(&aw, cfg.tolerance)?;
        let mut rows = vec![strings(&["λ", "γ", "eigenvalue", "expected", "deviation", "exact"])];
        let mut records = Vec::new();
        for e in &table.entries {
            let ev = format!("{:.12}{:+.12}i", e.eigenvalue.re, e.eigenvalue.im);
            rows.push(vec![
                e.lambda.to_string(),
                e.gamma.to_string(),
                ev.clone(),
                e.expected.to_string(),
                format!("{:.2e}", e.deviation),
                e.exact.to_string(),
            ]);
            records.push(json!({
                "lambda": e.lambda,
                "gamma": e.gamma,
                "eigenvalue": [e.eigenvalue.re, e.eigenvalue.im],
                "expected": e.expected.to_string(),
                "deviation": e.deviation,
                "exact": e.exact,
            }));
        }
        out.table("twisted braiding on V_λ⊗V_1", aligned(&rows));
        out.data.insert("braiding_table".into(), Value::Array(records));
        out.reports.push(table.report);
    }
    if let Some(p) = &opts.emit {
        write(p, &emit_presentation(&aw))?;
    }
    Ok(out)
}
