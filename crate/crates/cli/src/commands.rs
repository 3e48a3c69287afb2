use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use qwalk_core::freeprob::{asymptotic_law, free_poisson, law_moment, predicted_moment};
use qwalk_core::gamma::{theta, verify_model_rep, walk_moment, WalkMethod, WalkMoment};
use qwalk_core::hadamard::generic_q;
use qwalk_core::models::{check_projective, deform, dual, fourier_model, verify_wreath_structure};
use qwalk_core::moments::{
    check_positive, haar_moment, reciprocity, tensor_bound_check, tensor_formula_moment, truncated_moment_p, HaarMethod,
};
use qwalk_core::montecarlo::{ks_distance, mc_moment, mc_spectrum};
use qwalk_core::verify::{theta_sign_flipped, verify_suite_with, Level, SuiteOptions};
use qwalk_core::{AbelianGroup, Error, Limits, MagicModel, MomentReport, PhaseMatrix, Result, Side};

use crate::args::{
    parse_list, AsymptArgs, LevelArg, McArgs, ModelArgs, ModelSource, MomentMethod, MomentsArgs, SideArg, VerifyArgs,
    WalkArgs, WalkMethodArg,
};

/// What a subcommand produced.
pub struct Outcome {
    pub json: Value,
    pub csv: Option<String>,
    /// False when a check or a cross-oracle comparison failed.
    pub ok: bool,
    pub seeds: Vec<u64>,
}

fn list(s: &str) -> Result<Vec<usize>> {
    parse_list(s).map_err(Error::InvalidArgument)
}

fn to_json(v: &impl Serialize) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

const CSV_HEADER: &str = "p,method,value,uncertainty,seed,time_ms\n";

fn csv_row(out: &mut String, p: usize, method: &str, value: f64, uncertainty: f64, seed: Option<u64>, ms: f64) {
    let seed = seed.map(|s| s.to_string()).unwrap_or_default();
    let _ = writeln!(out, "{p},{method},{value},{uncertainty},{seed},{ms}");
}

/// `U`, and when a second group is given also `V`, `Q` and `W = U ⊗_Q V`.
struct Built {
    x: AbelianGroup,
    u: MagicModel,
    deformed: Option<Deformed>,
}

struct Deformed {
    y: AbelianGroup,
    v: MagicModel,
    q: PhaseMatrix,
    w: MagicModel,
}

impl Built {
    fn target(&self) -> &MagicModel {
        self.deformed.as_ref().map_or(&self.u, |d| &d.w)
    }

    fn name(&self) -> String {
        match &self.deformed {
            Some(d) => format!("{}⊗_Q{}", self.x, d.y),
            None => format!("F({})", self.x),
        }
    }
}

fn load_q(source: &ModelSource, x: &AbelianGroup, y: &AbelianGroup) -> Result<PhaseMatrix> {
    match source.q.as_str() {
        "random" => Ok(generic_q(x, y, source.seed)),
        "ones" => Ok(PhaseMatrix::ones(x.clone(), y.clone())),
        path => {
            let q = PhaseMatrix::load(Path::new(path))?;
            if q.x() != x || q.y() != y {
                return Err(Error::ShapeMismatch(format!(
                    "Q file is over ({}, {}), expected ({x}, {y})",
                    q.x(),
                    q.y()
                )));
            }
            Ok(q)
        }
    }
}

fn build(source: &ModelSource) -> Result<Built> {
    let x: AbelianGroup = source.x.parse()?;
    let u = fourier_model(&x);
    let deformed = match &source.y {
        None => None,
        Some(y) => {
            let y: AbelianGroup = y.parse()?;
            let v = fourier_model(&y);
            let q = load_q(source, &x, &y)?;
            let side = match source.side {
                SideArg::Right => Side::Right,
                SideArg::Left => Side::Left,
            };
            let w = deform(&u, &v, &q, side)?;
            Some(Deformed { y, v, q, w })
        }
    };
    Ok(Built { x, u, deformed })
}

fn seeds_of(source: &ModelSource) -> Vec<u64> {
    if source.y.is_some() && source.q == "random" {
        vec![source.seed]
    } else {
        Vec::new()
    }
}

pub fn model(args: &ModelArgs) -> Result<Outcome> {
    let built = build(&args.source)?;
    let w = built.target();
    let limits = Limits::default();
    let (magic, dual_magic) = check_projective(w, args.tol)?;
    let positivity = check_positive(w, args.positivity_p, &limits)?;
    let mut ok = magic.pass && dual_magic.pass;
    let mut report = json!({
        "model": built.name(),
        "index_size": w.index_size(),
        "block_dim": w.block_dim(),
        "tol": args.tol,
        "magic": magic,
        "dual_magic": dual_magic,
        "positivity": positivity,
    });
    if let Some(d) = &built.deformed {
        let wreath = verify_wreath_structure(&d.w, &built.x, &d.y, args.tol)?;
        ok &= wreath.pass;
        report["wreath"] = to_json(&wreath)?;
        if args.source.side == SideArg::Right {
            let rep = verify_model_rep(&d.w, &d.q)?;
            ok &= rep.pass;
            report["representation"] = to_json(&rep)?;
        }
        report["q_angles_turns"] = to_json(&d.q.angles_turns())?;
    }
    if let Some(path) = &args.dump {
        std::fs::write(path, serde_json::to_string_pretty(&w.to_dump(args.tol))?)?;
        report["dump"] = to_json(path)?;
    }
    report["pass"] = Value::Bool(ok);
    Ok(Outcome {
        json: report,
        csv: None,
        ok,
        seeds: seeds_of(&args.source),
    })
}

pub fn moments(args: &MomentsArgs) -> Result<Outcome> {
    let ps = list(&args.p)?;
    let rs = list(&args.r)?;
    let limits = Limits {
        dense_rows: args.max_rows,
        enumeration: args.max_enumeration,
    };
    let built = build(&args.source)?;
    let w = built.target();
    let model_name = built.name();
    let seed = seeds_of(&args.source).first().copied();
    let mut rows = Vec::new();
    let mut csv = String::from(CSV_HEADER);
    let mut ok = true;

    let report =
        |method: &str, p: usize, r: Option<usize>, value: f64, uncertainty: f64, started: Instant| MomentReport {
            method: method.to_string(),
            model: Some(model_name.clone()),
            p,
            r,
            terms: None,
            samples: None,
            seed,
            value,
            uncertainty,
            tail_bound: None,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        };

    for &p in &ps {
        match args.method {
            MomentMethod::Spectral | MomentMethod::Cesaro => {
                let method = if args.method == MomentMethod::Spectral {
                    HaarMethod::Spectral { tol: args.spectral_tol }
                } else {
                    HaarMethod::Cesaro { terms: args.terms }
                };
                let mut rep = haar_moment(w, p, method, &limits)?;
                rep.model = Some(model_name.clone());
                rep.seed = seed;
                push_report(&mut rows, &mut csv, rep)?;
            }
            MomentMethod::Truncated => {
                for &r in &rs {
                    let started = Instant::now();
                    let c = truncated_moment_p(w, p, r, &limits)?;
                    push_report(&mut rows, &mut csv, report("truncated", p, Some(r), c, 0.0, started))?;
                }
            }
            MomentMethod::Reciprocity => {
                for &r in &rs {
                    let started = Instant::now();
                    let rec = reciprocity(w, p, r, &limits)?;
                    ok &= rec.defect <= qwalk_core::TOL_STRUCTURE;
                    let rep = report("reciprocity", p, Some(r), rec.gamma, rec.defect, started);
                    csv_row(
                        &mut csv,
                        p,
                        &format!("reciprocity(r={r})"),
                        rec.gamma,
                        rec.defect,
                        seed,
                        rep.wall_time_ms,
                    );
                    let mut v = to_json(&rec)?;
                    v["wall_time_ms"] = json!(rep.wall_time_ms);
                    rows.push(v);
                }
            }
            MomentMethod::TensorFormula | MomentMethod::Bound => {
                let d = built
                    .deformed
                    .as_ref()
                    .ok_or_else(|| Error::InvalidArgument("this method needs --y".into()))?;
                for &r in &rs {
                    let started = Instant::now();
                    if args.method == MomentMethod::TensorFormula {
                        let formula = tensor_formula_moment(&built.u, &dual(&d.v)?, &d.q, p, r, &limits)?;
                        let direct = truncated_moment_p(&d.w, p, r, &limits)?;
                        let defect = (formula - direct).abs();
                        ok &= defect <= qwalk_core::TOL_STRUCTURE * direct.abs().max(1.0);
                        let ms = started.elapsed().as_secs_f64() * 1e3;
                        csv_row(
                            &mut csv,
                            p,
                            &format!("tensor-formula(r={r})"),
                            formula,
                            defect,
                            seed,
                            ms,
                        );
                        rows.push(json!({
                            "p": p, "r": r, "formula": formula, "direct": direct,
                            "defect": defect, "wall_time_ms": ms,
                        }));
                    } else {
                        let b = tensor_bound_check(&built.u, &d.v, &d.q, p, r, &limits)?;
                        if b.u_positive && b.v_dual_positive {
                            ok &= b.holds;
                        }
                        let ms = started.elapsed().as_secs_f64() * 1e3;
                        csv_row(&mut csv, p, &format!("bound(r={r})"), b.lhs, 0.0, seed, ms);
                        let mut v = to_json(&b)?;
                        v["wall_time_ms"] = json!(ms);
                        rows.push(v);
                    }
                }
            }
        }
    }
    Ok(Outcome {
        json: json!({ "model": built.name(), "results": rows, "pass": ok }),
        csv: Some(csv),
        ok,
        seeds: seeds_of(&args.source),
    })
}

fn push_report(rows: &mut Vec<Value>, csv: &mut String, rep: MomentReport) -> Result<()> {
    let label = match rep.r {
        Some(r) => format!("{}(r={r})", rep.method),
        None => rep.method.clone(),
    };
    csv_row(
        csv,
        rep.p,
        &label,
        rep.value,
        rep.uncertainty,
        rep.seed,
        rep.wall_time_ms,
    );
    rows.push(to_json(&rep)?);
    Ok(())
}

fn walk_methods(arg: WalkMethodArg) -> Vec<WalkMethod> {
    match arg {
        WalkMethodArg::Multiset => vec![WalkMethod::Multiset],
        WalkMethodArg::Group => vec![WalkMethod::Group],
        WalkMethodArg::Both => vec![WalkMethod::Multiset, WalkMethod::Group],
    }
}

fn walk_name(m: WalkMethod) -> &'static str {
    match m {
        WalkMethod::Multiset => "multiset",
        WalkMethod::Group => "group",
    }
}

pub fn walk(args: &WalkArgs) -> Result<Outcome> {
    let x: AbelianGroup = args.x.parse()?;
    let y: AbelianGroup = args.y.parse()?;
    let limits = Limits {
        enumeration: args.max_enumeration,
        ..Limits::default()
    };
    let mut rows: Vec<WalkMoment> = Vec::new();
    let mut csv = String::from(CSV_HEADER);
    let mut ok = true;
    for p in list(&args.p)? {
        let results = walk_methods(args.method)
            .into_iter()
            .map(|m| walk_moment(&x, &y, p, m, &limits))
            .collect::<Result<Vec<_>>>()?;
        if let [a, b] = results.as_slice() {
            ok &= a.numerator == b.numerator && a.denominator == b.denominator;
        }
        for r in results {
            csv_row(&mut csv, p, walk_name(r.method), r.value, 0.0, None, r.wall_time_ms);
            rows.push(r);
        }
    }
    Ok(Outcome {
        json: json!({ "results": rows, "agree": ok }),
        csv: Some(csv),
        ok,
        seeds: Vec::new(),
    })
}

fn integral_size(factor: f64, k: usize, what: &str) -> Result<usize> {
    let size = factor * k as f64;
    if size < 1.0 || (size - size.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "{what}·K = {size} is not a positive integer"
        )));
    }
    Ok(size.round() as usize)
}

#[derive(Serialize)]
struct AsymptRow {
    k: usize,
    p: usize,
    m: usize,
    n: usize,
    numerator: u128,
    denominator: u128,
    exact: f64,
    scaled: f64,
    narayana: f64,
    narayana_scaled: f64,
    quadrature: f64,
    time_ms: f64,
}

pub fn asympt(args: &AsymptArgs) -> Result<Outcome> {
    let ks = list(&args.k)?;
    let ps = list(&args.p)?;
    let limits = Limits {
        enumeration: args.max_enumeration,
        ..Limits::default()
    };
    let mut rows = Vec::new();
    let mut csv = String::from("k,p,m,n,exact,scaled,narayana,narayana_scaled,quadrature,time_ms\n");
    for &k in &ks {
        let m = integral_size(args.alpha, k, "α")?;
        let n = integral_size(args.beta, k, "β")?;
        let x = AbelianGroup::cyclic(m)?;
        let y = AbelianGroup::cyclic(n)?;
        let law = asymptotic_law(args.alpha, args.beta, k as f64)?;
        for &p in &ps {
            let started = Instant::now();
            let exact = walk_moment(&x, &y, p, WalkMethod::Multiset, &limits)?;
            let scale = (k as f64).powi(p as i32 - 1);
            let narayana = predicted_moment(args.alpha, args.beta, k as f64, p)?;
            let row = AsymptRow {
                k,
                p,
                m,
                n,
                numerator: exact.numerator,
                denominator: exact.denominator,
                exact: exact.value,
                scaled: exact.value / scale,
                narayana,
                narayana_scaled: narayana / scale,
                quadrature: law_moment(&law, p)?,
                time_ms: started.elapsed().as_secs_f64() * 1e3,
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                row.k,
                row.p,
                row.m,
                row.n,
                row.exact,
                row.scaled,
                row.narayana,
                row.narayana_scaled,
                row.quadrature,
                row.time_ms
            );
            rows.push(row);
        }
    }
    if let (Some(path), Some(&k)) = (&args.law_csv, ks.iter().max()) {
        std::fs::write(path, asymptotic_law(args.alpha, args.beta, k as f64)?.to_csv(200))?;
    }
    Ok(Outcome {
        json: json!({ "alpha": args.alpha, "beta": args.beta, "rows": rows }),
        csv: Some(csv),
        ok: true,
        seeds: Vec::new(),
    })
}

pub fn mc(args: &McArgs) -> Result<Outcome> {
    if args.spectrum {
        let spectrum = mc_spectrum(args.m, args.n, args.samples, args.seed, args.bins)?;
        // A/N with A = q q* of size M×M follows D_{M/N}(π_{N/M}) asymptotically.
        let ratio = args.m as f64 / args.n as f64;
        let reference = free_poisson(1.0 / ratio)?.dilate(ratio)?;
        let ks = ks_distance(&spectrum.eigenvalues, |x| reference.cdf(x))?;
        let mut json = to_json(&spectrum)?;
        json["ks_distance"] = json!(ks);
        json["reference"] = json!(format!("free Poisson rate {} dilated by {}", 1.0 / ratio, ratio));
        return Ok(Outcome {
            json,
            csv: Some(spectrum.to_csv()),
            ok: true,
            seeds: vec![args.seed],
        });
    }
    let mut rows = Vec::new();
    let mut csv = String::from(CSV_HEADER);
    for p in list(&args.p)? {
        let rep = mc_moment(args.m, args.n, p, args.samples, args.seed)?;
        csv_row(
            &mut csv,
            p,
            &rep.method,
            rep.value,
            rep.uncertainty,
            rep.seed,
            rep.wall_time_ms,
        );
        rows.push(rep);
    }
    Ok(Outcome {
        json: json!({ "results": rows }),
        csv: Some(csv),
        ok: true,
        seeds: vec![args.seed],
    })
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let opts = SuiteOptions {
        level,
        seed: args.seed,
        theta: if args.mutate_theta { theta_sign_flipped } else { theta },
    };
    let report = verify_suite_with(&opts);
    for c in &report.checks {
        eprintln!(
            "{:>4} {:>10.1} ms  {}: {}",
            if c.pass { "ok" } else { "FAIL" },
            c.wall_time_ms,
            c.module,
            c.name
        );
    }
    let mut csv = String::from("module,name,pass,time_ms\n");
    for c in &report.checks {
        let _ = writeln!(
            csv,
            "{},\"{}\",{},{}",
            c.module,
            c.name.replace('"', "'"),
            c.pass,
            c.wall_time_ms
        );
    }
    Ok(Outcome {
        json: to_json(&report)?,
        csv: Some(csv),
        ok: report.pass,
        seeds: vec![args.seed],
    })
}
