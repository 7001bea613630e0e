//! Command-line driver: configuration, the `spectrum`, `wigner`, `verify` and `star`
//! commands, and field export.
//!
//! Exit codes: 0 success, 1 a numerical tolerance or backend failure, 2 a usage or
//! configuration error.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::star_eigen_residual;
use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::grid::{PhaseGrid, SymbolField};
use crate::oracle::{discretize_hamiltonian, eigensolve_lowest};
use crate::poly::{poly_moyal_bracket, poly_poisson_bracket, poly_star, PolySymbol};
use crate::star::{kernel_star, series_star, star, star_trace_pair, StarMethod};
use crate::susy::{self, ShapeInvariantModel, Superpotential};
use crate::weyl::overlap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
    Bin,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "bin" => Ok(ExportFormat::Bin),
            other => Err(Error::Unsupported(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_x: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub hbar: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.n_x, self.x_min, self.x_max, self.hbar)
    }

    fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Unsupported(format!("grid needs n,xmin,xmax,hbar (got {s:?})")));
        }
        let f = |t: &str| t.parse::<f64>().map_err(|_| Error::Unsupported(format!("bad number {t:?} in grid")));
        let n = parts[0].parse::<usize>().map_err(|_| Error::Unsupported(format!("bad grid size {:?}", parts[0])))?;
        Ok(Self { n_x: n, x_min: f(parts[1])?, x_max: f(parts[2])?, hbar: f(parts[3])? })
    }
}

/// Validated settings for one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: String,
    pub params: BTreeMap<String, f64>,
    /// Superpotential expression of a custom model.
    pub w: Option<String>,
    pub grid: GridSpec,
    pub backend: StarMethod,
    pub n_max: usize,
    pub out: PathBuf,
    pub formats: Vec<ExportFormat>,
    pub tolerance: f64,
}

const GLOBAL_KEYS: &[&str] =
    &["model", "grid", "n_x", "x_min", "x_max", "hbar", "backend", "n_max", "out", "format", "tolerance"];

fn model_keys(model: &str) -> Option<&'static [&'static str]> {
    match model {
        "sho" => Some(&["omega"]),
        "morse" => Some(&["a", "b", "s"]),
        "custom" => Some(&["w", "a0", "step", "n_bound"]),
        _ => None,
    }
}

fn default_grid(model: &str) -> GridSpec {
    match model {
        "morse" => GridSpec { n_x: 512, x_min: -4.0, x_max: 40.0, hbar: 1.0 },
        _ => GridSpec { n_x: 256, x_min: -8.0, x_max: 8.0, hbar: 1.0 },
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Validates flat key/value pairs; later pairs override earlier ones.
    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        for (k, v) in pairs {
            map.insert(k.as_str(), v.as_str());
        }
        let model = map.get("model").copied().unwrap_or("sho").to_string();
        let allowed = model_keys(&model).ok_or_else(|| usage(format!("unknown model {model:?}")))?;
        let w_src = map.get("w").map(|s| s.to_string());
        let w_params: Vec<String> = match &w_src {
            Some(src) => expr::parse(src)?.params(),
            None => Vec::new(),
        };
        for k in map.keys() {
            let known = GLOBAL_KEYS.contains(k)
                || allowed.contains(k)
                || (model == "custom" && w_params.iter().any(|p| p == k));
            if !known {
                return Err(usage(format!("unknown key {k:?} for model {model}")));
            }
        }
        let num = |k: &str| -> Result<Option<f64>> {
            map.get(k)
                .map(|v| v.parse::<f64>().map_err(|_| usage(format!("{k} must be a number (got {v:?})"))))
                .transpose()
        };
        let int = |k: &str| -> Result<Option<usize>> {
            map.get(k)
                .map(|v| v.parse::<usize>().map_err(|_| usage(format!("{k} must be a non-negative integer (got {v:?})"))))
                .transpose()
        };

        let mut grid = match map.get("grid") {
            Some(g) => GridSpec::parse(g)?,
            None => default_grid(&model),
        };
        if let Some(n) = int("n_x")? {
            grid.n_x = n;
        }
        if let Some(v) = num("x_min")? {
            grid.x_min = v;
        }
        if let Some(v) = num("x_max")? {
            grid.x_max = v;
        }
        if let Some(v) = num("hbar")? {
            grid.hbar = v;
        }
        grid.build().map_err(|e| usage(e.to_string()))?;

        let mut params = BTreeMap::new();
        for k in allowed.iter().filter(|k| **k != "w").chain(w_params.iter().map(|s| s.as_str()).collect::<Vec<_>>().iter()) {
            if let Some(v) = num(k)? {
                params.insert(k.to_string(), v);
            }
        }
        if model == "custom" {
            if w_src.is_none() {
                return Err(usage("custom model needs w = <expression>"));
            }
            for k in ["a0", "n_bound"] {
                if !params.contains_key(k) {
                    return Err(usage(format!("custom model needs {k}")));
                }
            }
        }

        let backend = match map.get("backend") {
            Some(b) => b.parse::<StarMethod>().map_err(|e| usage(e.to_string()))?,
            None => StarMethod::Kernel,
        };
        let formats = match map.get("format") {
            Some(f) => f.split(',').map(|s| s.parse()).collect::<Result<Vec<ExportFormat>>>().map_err(|e| usage(e.to_string()))?,
            None => vec![ExportFormat::Csv],
        };
        let tolerance = num("tolerance")?.unwrap_or(1e-4);
        if !(tolerance > 0.0) {
            return Err(usage("tolerance must be positive"));
        }
        let mut cfg = RunConfig {
            model,
            params,
            w: w_src,
            grid,
            backend,
            n_max: 0,
            out: PathBuf::from(map.get("out").copied().unwrap_or("mf_out")),
            formats,
            tolerance,
        };
        let built = cfg.build_model().map_err(|e| usage(e.to_string()))?;
        cfg.n_max = match int("n_max")? {
            Some(n) => n,
            None if cfg.model == "sho" => 5,
            None => built.n_bound,
        };
        if cfg.n_max > built.n_bound {
            return Err(usage(format!("n_max {} exceeds the model's bound {}", cfg.n_max, built.n_bound)));
        }
        Ok(cfg)
    }

    /// The shape-invariant model these settings describe.
    pub fn build_model(&self) -> Result<ShapeInvariantModel> {
        let hbar = self.grid.hbar;
        match self.model.as_str() {
            "custom" => {
                let src = self.w.as_deref().ok_or_else(|| usage("custom model needs w"))?;
                let mut fixed = self.params.clone();
                let a0 = fixed.remove("a0").unwrap_or(0.0);
                let step = fixed.remove("step").unwrap_or(0.0);
                let n_bound = fixed.remove("n_bound").unwrap_or(0.0);
                if n_bound < 0.0 || n_bound.fract() != 0.0 {
                    return Err(usage("n_bound must be a non-negative integer"));
                }
                custom_model(src, &fixed, a0, step, n_bound as usize, hbar)
            }
            name => ShapeInvariantModel::from_registry(name, &self.params, hbar),
        }
    }
}

/// Custom model from an expression for `W` in `x` and the shape parameter `a`.
pub fn custom_model(
    w_src: &str,
    fixed: &BTreeMap<String, f64>,
    a0: f64,
    step: f64,
    n_bound: usize,
    hbar: f64,
) -> Result<ShapeInvariantModel> {
    let w = expr::parse(w_src)?;
    if w.uses_p() {
        return Err(usage("a superpotential cannot depend on p"));
    }
    let bound: BTreeMap<String, f64> = fixed.clone();
    for name in w.params() {
        if name != "a" && !bound.contains_key(&name) {
            return Err(usage(format!("parameter {name:?} of w has no value")));
        }
    }
    let dw = w.dx()?;
    let eval = move |e: &Expr, x: f64, a: f64| {
        let mut v = bound.clone();
        v.insert("a".into(), a);
        e.eval_with(x, 0.0, &v)
    };
    let (e1, e2) = (w.clone(), dw);
    let ev1 = eval.clone();
    let sp = Superpotential::new(move |x, a| ev1(&e1, x, a), move |x, a| eval(&e2, x, a), &["a"]);
    ShapeInvariantModel::translational("custom", sp, a0, step, n_bound, hbar)
}

/// Result of one command: exit code plus the JSON report that was written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub files: Vec<PathBuf>,
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(f)?;
    Ok(())
}

/// CSV with a `# x,p,value` header (`# x,p,re,im` for complex fields), 17 significant digits.
pub fn write_csv(path: &Path, field: &SymbolField) -> Result<()> {
    let g = *field.grid();
    let mut f = BufWriter::new(fs::File::create(path)?);
    let real = field.is_real();
    writeln!(f, "{}", if real { "# x,p,value" } else { "# x,p,re,im" })?;
    for i in 0..g.n() {
        let x = g.x(i);
        for j in 0..g.n() {
            let v = field.get(i, j);
            if real {
                writeln!(f, "{:.16e},{:.16e},{:.16e}", x, g.p(j), v.re)?;
            } else {
                writeln!(f, "{:.16e},{:.16e},{:.16e},{:.16e}", x, g.p(j), v.re, v.im)?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

fn field_json(field: &SymbolField) -> Value {
    let g = *field.grid();
    let vals: Vec<Value> = if field.is_real() {
        field.values().iter().map(|v| json!(v.re)).collect()
    } else {
        field.values().iter().map(|v| json!([v.re, v.im])).collect()
    };
    json!({
        "grid": {"n_x": g.n(), "x_min": g.x_min(), "x_max": g.x_max(), "hbar": g.hbar()},
        "layout": "row-major, rows x, columns p",
        "values": vals,
    })
}

/// Writes `field` as `<out>/<stem>.<ext>` for each requested format.
pub fn export_field(dir: &Path, stem: &str, field: &SymbolField, formats: &[ExportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for fmt in formats {
        let path = match fmt {
            ExportFormat::Csv => dir.join(format!("{stem}.csv")),
            ExportFormat::Json => dir.join(format!("{stem}.json")),
            ExportFormat::Bin => dir.join(format!("{stem}.bin")),
        };
        match fmt {
            ExportFormat::Csv => write_csv(&path, field)?,
            ExportFormat::Json => write_json(&path, &field_json(field))?,
            ExportFormat::Bin => field.save_binary(&path)?,
        }
        files.push(path);
    }
    Ok(files)
}

fn config_json(cfg: &RunConfig) -> Value {
    json!({
        "model": cfg.model,
        "params": cfg.params,
        "w": cfg.w,
        "grid": cfg.grid,
        "backend": cfg.backend.to_string(),
        "n_max": cfg.n_max,
        "tolerance": cfg.tolerance,
    })
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    n: usize,
    #[serde(rename = "E_shape_invariance")]
    e_si: f64,
    #[serde(rename = "E_oracle")]
    e_oracle: f64,
    rel_error: f64,
}

/// Shape-invariance energies against the diagonalization oracle; writes `spectrum.json`.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let grid = cfg.grid.build()?;
    let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), grid)?;
    let spec = eigensolve_lowest(&h, cfg.n_max + 1)?;
    let mut rows = Vec::new();
    for n in 0..=cfg.n_max {
        let e_si = susy::si_energy(&model, n)?;
        let e_or = spec.energies[n];
        rows.push(SpectrumRow { n, e_si, e_oracle: e_or, rel_error: (e_si - e_or).abs() / e_si.abs().max(1.0) });
    }
    let pass = rows.iter().all(|r| r.rel_error <= cfg.tolerance);
    let report = json!({"command": "spectrum", "config": config_json(cfg), "rows": rows, "pass": pass});
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("spectrum.json");
    write_json(&path, &report)?;
    Ok(Outcome { code: if pass { EXIT_OK } else { EXIT_TOLERANCE }, report, files: vec![path] })
}

/// Wigner functions `P_0 .. P_{n_max}` from the ladder; writes the fields and `manifest.json`.
pub fn cmd_wigner(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let grid = cfg.grid.build()?;
    let seq = susy::build_wigner_sequence(&model, grid, cfg.n_max)?;
    let h = model.h_minus(model.a0, grid)?;
    let mut files = Vec::new();
    let mut states = Vec::new();
    let mut failed = Vec::new();
    for (n, p) in seq.iter().enumerate() {
        let e = susy::si_energy(&model, n)?;
        let residual = star_eigen_residual(&h, p, e, StarMethod::Kernel)?;
        let written = export_field(&cfg.out, &format!("wigner_P{n}"), p, &cfg.formats)?;
        if residual > cfg.tolerance {
            failed.push(n);
        }
        states.push(json!({
            "n": n,
            "energy": e,
            "normalization": p.integrate2d().re,
            "boundary_mass": p.boundary_mass(),
            "star_eigen_residual": residual,
            "min_value": p.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min),
            "files": written.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        }));
        files.extend(written);
    }
    let report = json!({
        "command": "wigner",
        "config": config_json(cfg),
        "states": states,
        "failed": failed,
        "pass": failed.is_empty(),
    });
    let path = cfg.out.join("manifest.json");
    write_json(&path, &report)?;
    files.push(path);
    Ok(Outcome { code: if failed.is_empty() { EXIT_OK } else { EXIT_TOLERANCE }, report, files })
}

struct Battery {
    rows: Vec<Value>,
    ok: bool,
}

impl Battery {
    fn check(&mut self, name: &str, tolerance: f64, measure: impl FnOnce() -> Result<f64>) {
        let row = match measure() {
            Ok(v) => {
                let pass = v.is_finite() && v.abs() <= tolerance;
                self.ok &= pass;
                json!({"property": name, "value": v, "tolerance": tolerance, "pass": pass})
            }
            Err(e) => {
                self.ok = false;
                json!({"property": name, "error": e.to_string(), "tolerance": tolerance, "pass": false})
            }
        };
        self.rows.push(row);
    }
}

/// Runs the property battery for the configured model; writes `verify.json`.
pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut b = Battery { rows: Vec::new(), ok: true };
    let ih = Complex64::new(0.0, 1.0);
    b.check("canonical_bracket [x,p] - i hbar", 0.0, || {
        let br = poly_moyal_bracket(&PolySymbol::x(), &PolySymbol::p())?;
        Ok(br.sub(&PolySymbol::hbar().scale(ih)).max_coeff())
    });
    b.check("groenewold_anomaly + 3 hbar^2", 0.0, || {
        let x = PolySymbol::x();
        let p = PolySymbol::p();
        let b1 = poly_moyal_bracket(&x.pow(3)?, &p.pow(3)?)?;
        let b2 = poly_moyal_bracket(&x.mul(&p.pow(2)?)?, &x.pow(2)?.mul(&p)?)?;
        let lhs = b1.add(&b2.scale(Complex64::new(3.0, 0.0))).div_hbar()?.scale(-ih);
        Ok(lhs.add(&PolySymbol::monomial(Complex64::new(3.0, 0.0), 0, 0, 2)).max_coeff())
    });
    b.check("poisson_counterpart", 0.0, || {
        let x = PolySymbol::x();
        let p = PolySymbol::p();
        let b1 = poly_poisson_bracket(&x.pow(3)?, &p.pow(3)?)?;
        let b2 = poly_poisson_bracket(&x.mul(&p.pow(2)?)?, &x.pow(2)?.mul(&p)?)?;
        Ok(b1.add(&b2.scale(Complex64::new(3.0, 0.0))).max_coeff())
    });

    let setup = (|| -> Result<_> {
        let model = cfg.build_model()?;
        let grid = cfg.grid.build()?;
        Ok((model, grid))
    })();
    let (model, grid) = setup?;
    let hbar = grid.hbar();
    let xs = grid.xs();
    b.check("shape_invariance_residual", 1e-8, || Ok(susy::shape_invariance_residual(&model, &xs)));
    b.check("superpotential_derivative", 1e-6, || Ok(model.sp.derivative_defect(&xs, model.a0)));

    let p0 = susy::ground_wigner(&model, model.a0, grid);
    let p0r = p0.as_ref().map_err(|e| e.clone());
    b.check("ground_normalization", 1e-8, || Ok(p0r.clone()?.integrate2d().re - 1.0));
    b.check("ground_boundary_mass", 1e-10, || {
        let p = p0r.clone()?;
        Ok(p.boundary_mass() / p.sup_norm())
    });
    b.check("trace_pair 2 pi hbar int P0*P0 - 1", 1e-6, || {
        let p = p0r.clone()?;
        Ok((star_trace_pair(p, p)?.re * 2.0 * std::f64::consts::PI * hbar) - 1.0)
    });
    b.check("idempotence P0*P0 - P0/(2 pi hbar)", 1e-6, || {
        let p = p0r.clone()?;
        let pp = kernel_star(p, p)?;
        Ok(pp.distance(&p.scale_real(1.0 / (2.0 * std::f64::consts::PI * hbar)))? / pp.sup_norm())
    });
    b.check("annihilation A*P0", 1e-5, || susy::annihilation_residual(&model, model.a0, p0r.clone()?));

    let seq = susy::build_wigner_sequence(&model, grid, cfg.n_max);
    match &seq {
        Ok(seq) => {
            let h = model.h_minus(model.a0, grid)?;
            for (n, p) in seq.iter().enumerate() {
                b.check(&format!("star_eigen_residual P{n}"), cfg.tolerance, || {
                    star_eigen_residual(&h, p, susy::si_energy(&model, n)?, StarMethod::Kernel)
                });
            }
            b.check("overlap_matrix", 1e-5, || {
                let mut worst = 0.0f64;
                for (m, pm) in seq.iter().enumerate() {
                    for (n, pn) in seq.iter().enumerate().skip(m) {
                        let want = if m == n { 1.0 } else { 0.0 };
                        worst = worst.max((overlap(pm, pn)? - want).abs());
                    }
                }
                Ok(worst)
            });
        }
        Err(e) => {
            let e = e.clone();
            b.check("wigner_sequence", 0.0, || Err(e));
        }
    }
    let levels = cfg.n_max + 1;
    b.check("oracle_spectrum rel_error", cfg.tolerance, || {
        let h = discretize_hamiltonian(|x| model.v_minus(x, model.a0), grid)?;
        let spec = eigensolve_lowest(&h, levels)?;
        let mut worst = 0.0f64;
        for n in 0..levels {
            let e = susy::si_energy(&model, n)?;
            worst = worst.max((e - spec.energies[n]).abs() / e.abs().max(1.0));
        }
        Ok(worst)
    });
    b.check("isospectrality rel_error", 1e-4, || {
        let k = levels.clamp(2, 4);
        let hm = eigensolve_lowest(&discretize_hamiltonian(|x| model.v_minus(x, model.a0), grid)?, k)?;
        let hp = eigensolve_lowest(&discretize_hamiltonian(|x| model.v_plus(x, model.a0), grid)?, k - 1)?;
        let mut worst = 0.0f64;
        for n in 0..k - 1 {
            let (ep, em) = (hp.energies[n], hm.energies[n + 1]);
            worst = worst.max((ep - em).abs() / em.abs().max(1.0));
        }
        Ok(worst)
    });

    let report = json!({"command": "verify", "config": config_json(cfg), "properties": b.rows, "pass": b.ok});
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join("verify.json");
    write_json(&path, &report)?;
    Ok(Outcome { code: if b.ok { EXIT_OK } else { EXIT_TOLERANCE }, report, files: vec![path] })
}

fn poly_json(p: &PolySymbol) -> Value {
    let mut m = serde_json::Map::new();
    for (mono, c) in p.terms() {
        m.insert(PolySymbol::monomial_name(mono), json!({"re": c.re, "im": c.im}));
    }
    json!({"text": p.to_string(), "terms": Value::Object(m)})
}

/// `A * B`, `B * A` and the Moyal bracket of two expressions.
///
/// Polynomials go to the exact engine with `hbar` kept symbolic; anything else is sampled
/// on the grid and multiplied with the configured backend (the kernel backend when the
/// exact one was requested).
pub fn cmd_star(lhs: &Expr, rhs: &Expr, cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out)?;
    let lhs = lhs.bind(&cfg.params)?;
    let rhs = rhs.bind(&cfg.params)?;
    if let (Some(a), Some(b)) = (lhs.to_poly(), rhs.to_poly()) {
        let ab = poly_star(&a, &b)?;
        let ba = poly_star(&b, &a)?;
        let br = poly_moyal_bracket(&a, &b)?;
        let report = json!({
            "command": "star",
            "method": "exactpoly",
            "lhs": a.to_string(),
            "rhs": b.to_string(),
            "a_star_b": poly_json(&ab),
            "b_star_a": poly_json(&ba),
            "bracket": poly_json(&br),
        });
        let path = cfg.out.join("star.json");
        write_json(&path, &report)?;
        return Ok(Outcome { code: EXIT_OK, report, files: vec![path] });
    }
    let grid = cfg.grid.build()?;
    let method = match cfg.backend {
        StarMethod::ExactPoly => StarMethod::Kernel,
        m => m,
    };
    let a = SymbolField::sample_real(grid, |x, p| lhs.eval(x, p))?;
    let b = SymbolField::sample_real(grid, |x, p| rhs.eval(x, p))?;
    let ab = star(&a, &b, method)?;
    let ba = star(&b, &a, method)?;
    let br = ab.sub(&ba)?;
    let mut files = Vec::new();
    files.extend(export_field(&cfg.out, "star_ab", &ab, &cfg.formats)?);
    files.extend(export_field(&cfg.out, "star_ba", &ba, &cfg.formats)?);
    files.extend(export_field(&cfg.out, "bracket", &br, &cfg.formats)?);
    let cross = match method {
        StarMethod::Kernel => series_star(&a, &b, crate::star::DEFAULT_SERIES_ORDER)
            .and_then(|s| s.distance_interior(&ab))
            .ok(),
        _ => None,
    };
    let report = json!({
        "command": "star",
        "method": method.to_string(),
        "grid": cfg.grid,
        "lhs": lhs.to_string(),
        "rhs": rhs.to_string(),
        "sup_a_star_b": ab.sup_norm(),
        "sup_bracket": br.sup_norm(),
        "sup_bracket_interior": br.sup_norm_interior(),
        "boundary_mass": ab.boundary_mass(),
        "series_cross_check": cross,
        "files": files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    let path = cfg.out.join("star.json");
    write_json(&path, &report)?;
    files.push(path);
    Ok(Outcome { code: EXIT_OK, report, files })
}

#[derive(Debug, Parser)]
#[command(name = "mf", about = "Moyal products, Wigner functions and shape-invariant spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shape-invariance energies against diagonalization
    Spectrum(Common),
    /// Ladder-built Wigner functions written to disk
    Wigner(Common),
    /// Property battery for a model and grid
    Verify(Common),
    /// Star product of two expressions
    Star {
        lhs: String,
        rhs: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Model parameter, repeatable
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// n,xmin,xmax,hbar
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// exactpoly | kernel | series:K
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated list of csv, json, bin
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
}

impl Common {
    fn pairs(&self) -> Result<Vec<(String, String)>> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                parse_config_text(&text).map_err(|e| usage(e.to_string()))?
            }
            None => Vec::new(),
        };
        let mut push = |k: &str, v: String| pairs.push((k.to_string(), v));
        if let Some(m) = &self.model {
            push("model", m.clone());
        }
        for kv in &self.params {
            let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--param expects k=v (got {kv:?})")))?;
            push(k.trim(), v.trim().to_string());
        }
        if let Some(g) = &self.grid {
            push("grid", g.clone());
        }
        if let Some(b) = &self.backend {
            push("backend", b.clone());
        }
        if let Some(n) = self.nmax {
            push("n_max", n.to_string());
        }
        if let Some(o) = &self.out {
            push("out", o.display().to_string());
        }
        if let Some(f) = &self.format {
            push("format", f.clone());
        }
        if let Some(t) = self.tolerance {
            push("tolerance", t.to_string());
        }
        Ok(pairs)
    }
}

fn summarize(out: &Outcome) {
    match out.report.get("command").and_then(Value::as_str) {
        Some("spectrum") => {
            println!("{:>3} {:>20} {:>20} {:>10}", "n", "E_shape_invariance", "E_oracle", "rel_error");
            for r in out.report["rows"].as_array().into_iter().flatten() {
                println!(
                    "{:>3} {:>20.12} {:>20.12} {:>10.2e}",
                    r["n"], r["E_shape_invariance"].as_f64().unwrap_or(f64::NAN),
                    r["E_oracle"].as_f64().unwrap_or(f64::NAN),
                    r["rel_error"].as_f64().unwrap_or(f64::NAN)
                );
            }
        }
        Some("wigner") => {
            for s in out.report["states"].as_array().into_iter().flatten() {
                println!(
                    "P{}: E = {}, norm = {:.12}, residual = {:.2e}",
                    s["n"], s["energy"], s["normalization"].as_f64().unwrap_or(f64::NAN),
                    s["star_eigen_residual"].as_f64().unwrap_or(f64::NAN)
                );
            }
        }
        Some("verify") => {
            for r in out.report["properties"].as_array().into_iter().flatten() {
                let mark = if r["pass"].as_bool() == Some(true) { "ok  " } else { "FAIL" };
                match r.get("value") {
                    Some(v) => println!("{mark} {} = {}", r["property"].as_str().unwrap_or(""), v),
                    None => println!("{mark} {}: {}", r["property"].as_str().unwrap_or(""), r["error"]),
                }
            }
        }
        _ => {}
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
}

/// Runs the command line given by `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (common, star_args) = match &cli.command {
        Command::Spectrum(c) | Command::Wigner(c) | Command::Verify(c) => (c, None),
        Command::Star { lhs, rhs, common } => (common, Some((lhs, rhs))),
    };
    let cfg = match common.pairs().and_then(|p| RunConfig::from_pairs(&p)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("mf: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match (&cli.command, star_args) {
        (Command::Spectrum(_), _) => cmd_spectrum(&cfg),
        (Command::Wigner(_), _) => cmd_wigner(&cfg),
        (Command::Verify(_), _) => cmd_verify(&cfg),
        (Command::Star { .. }, Some((l, r))) => {
            let parsed = expr::parse(l).and_then(|a| Ok((a, expr::parse(r)?)));
            match parsed {
                Ok((a, b)) => cmd_star(&a, &b, &cfg),
                Err(e) => {
                    eprintln!("mf: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        _ => unreachable!(),
    };
    match result {
        Ok(out) => {
            summarize(&out);
            out.code
        }
        Err(e) => {
            eprintln!("mf: {e}");
            EXIT_TOLERANCE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn config_defaults_and_schema() {
        let c = RunConfig::from_pairs(&pairs(&[])).unwrap();
        assert_eq!(c.model, "sho");
        assert_eq!(c.n_max, 5);
        assert_eq!(c.grid, GridSpec { n_x: 256, x_min: -8.0, x_max: 8.0, hbar: 1.0 });
        let m = RunConfig::from_pairs(&pairs(&[("model", "morse"), ("a", "5"), ("backend", "series:4")])).unwrap();
        assert_eq!(m.n_max, 4);
        assert_eq!(m.backend, StarMethod::Series(4));
        assert!(RunConfig::from_pairs(&pairs(&[("model", "coulomb")])).is_err());
        assert!(RunConfig::from_pairs(&pairs(&[("model", "sho"), ("a", "5")])).is_err());
        assert!(RunConfig::from_pairs(&pairs(&[("grid", "100,-8,8,1")])).is_err());
        assert!(RunConfig::from_pairs(&pairs(&[("n_max", "-1")])).is_err());
        assert!(RunConfig::from_pairs(&pairs(&[("model", "morse"), ("n_max", "5")])).is_err());
        let c = RunConfig::from_pairs(&pairs(&[
            ("model", "custom"),
            ("w", "a - b*exp(-x)"),
            ("b", "1"),
            ("a0", "5"),
            ("step", "1"),
            ("n_bound", "4"),
        ]))
        .unwrap();
        let m = c.build_model().unwrap();
        assert!((susy::si_energy(&m, 2).unwrap() - 16.0).abs() < 1e-12);
        assert!(RunConfig::from_pairs(&pairs(&[("model", "custom"), ("w", "a - b*exp(-x)"), ("a0", "5"), ("n_bound", "4")])).is_err());
    }

    #[test]
    fn config_text() {
        let p = parse_config_text("# comment\nmodel = morse\n\n a = 4 # inline\n").unwrap();
        assert_eq!(p, pairs(&[("model", "morse"), ("a", "4")]));
        assert!(parse_config_text("model morse").is_err());
    }

    #[test]
    fn usage_exit_codes() {
        assert_eq!(run(["mf", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["mf", "spectrum", "--model", "nope"]), EXIT_USAGE);
        assert_eq!(run(["mf", "star", "x +", "p"]), EXIT_USAGE);
    }
}
