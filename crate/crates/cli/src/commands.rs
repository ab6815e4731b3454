use std::fmt::Write;

use kernelscope::automaton::{build_representation, pole_lattice};
use kernelscope::christol::{algebraicity_verdict, orbit_explore, series_from_table};
use kernelscope::dirichlet::{
    continue_via_recursion, direct_sum, landau_walfisz_singularities, pole_scan, verify_identity, zeta_quotient_eval,
    EvalResult, IdentityId, ScanRect,
};
use kernelscope::kernel::{kernel_profile, rank_profile, required_len, value_density};
use kernelscope::zeta::{critical_line_zeros, tlogt_ratio_table, zero_count, zeta_em};
use kernelscope::{
    build_factor_table, generate, generate_table, reduce_mod, Complex64, FunctionId, LinearRepresentation, ValueTable,
};
use serde_json::{json, Value};

use crate::{CliError, Command, EvalMethod, RepArgs, Report, SeqArgs};

type Result<T> = std::result::Result<T, CliError>;

fn report(json: Value, csv: impl Into<Option<String>>) -> Result<Report> {
    Ok(Report { json, csv: csv.into() })
}

/// Accepts `2`, `0.5+14.1i`, `-3i`, `1e-3-2i` and `re,im`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Usage(format!("cannot parse complex number '{text}'"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let unit = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        x => num(x),
    };
    if let Some((a, b)) = t.split_once(',') {
        return Ok(Complex64::new(num(a)?, num(b)?));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Ok(Complex64::new(num(&body[..i])?, unit(&body[i..])?)),
        None => Ok(Complex64::new(0.0, unit(body)?)),
    }
}

fn parse_fn(name: &str) -> Result<FunctionId> {
    Ok(name.parse::<FunctionId>()?)
}

/// Sieve bound that holds the `n`-th prime: `n (log n + log log n)` for `n >= 6`.
fn nth_prime_bound(n: usize) -> usize {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as usize + 1
}

fn load_table(id: &FunctionId, n: usize, modulus: Option<i64>, sieve: Option<usize>) -> Result<ValueTable> {
    let t = if *id == FunctionId::NthPrime {
        let ft = build_factor_table(sieve.unwrap_or_else(|| nth_prime_bound(n)))?;
        generate(id, n, &ft)?
    } else {
        generate_table(id, n)?
    };
    Ok(match modulus {
        Some(m) => reduce_mod(&t, m)?,
        None => t,
    })
}

fn seq_table(seq: &SeqArgs) -> Result<ValueTable> {
    load_table(&parse_fn(&seq.function)?, seq.n, seq.modulus, None)
}

fn load_rep(r: &RepArgs) -> Result<LinearRepresentation> {
    if let Some(path) = &r.rep {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Core(kernelscope::Error::Format(format!("{}: {e}", path.display()))))?;
        // accept both the bare representation and a full build-rep output document
        let v = v.get("result").cloned().unwrap_or(v);
        return Ok(LinearRepresentation::from_json(&v)?);
    }
    let Some(name) = &r.function else {
        return Err(CliError::Usage("give either --rep FILE or --fn NAME".into()));
    };
    let n = match r.n {
        Some(n) => n,
        None => (required_len(r.k, r.depth, r.m)? as usize).max(1 << 16),
    };
    let t = load_table(&parse_fn(name)?, n, r.modulus, None)?;
    Ok(build_representation(&t, r.k, r.depth, r.m)?)
}

fn eval_csv(r: &EvalResult) -> String {
    let (vr, vi) = r.value.map_or((f64::NAN, f64::NAN), |v| (v.re, v.im));
    let method = r.to_json()["method"].as_str().unwrap_or("").to_string();
    let opt = |x: Option<String>| x.unwrap_or_default();
    format!(
        "re,im,value_re,value_im,error_estimate,method,near_singular,truncated\n{},{},{vr},{vi},{:e},{method},{},{}\n",
        r.s.re,
        r.s.im,
        r.error_estimate,
        opt(r.flags.near_singular.map(|d| format!("{d:e}"))),
        opt(r.flags.truncated.map(|n| n.to_string())),
    )
}

pub fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Generate { seq, sieve } => {
            let t = load_table(&parse_fn(&seq.function)?, seq.n, seq.modulus, *sieve)?;
            let mut csv = Vec::new();
            t.write_csv(&mut csv)?;
            report(t.to_json(), String::from_utf8(csv).expect("ascii csv"))
        }
        Command::KernelProfile { seq, kernel } => {
            let p = kernel_profile(&seq_table(seq)?, kernel.k, kernel.depth, kernel.m)?;
            report(p.to_json(), p.to_csv())
        }
        Command::RankProfile { seq, kernel } => {
            let p = rank_profile(&seq_table(seq)?, kernel.k, kernel.depth, kernel.m)?;
            report(p.to_json(), p.to_csv())
        }
        Command::Density { seq, value, lengths } => {
            let d = value_density(&seq_table(seq)?, *value, lengths)?;
            let mut csv = String::from("length,count,density,p,q,residual\n");
            for e in &d {
                let _ = writeln!(csv, "{},{},{},{},{},{:e}", e.length, e.count, e.density, e.rational.0, e.rational.1, e.residual);
            }
            report(json!({ "value": value, "estimates": d }), csv)
        }
        Command::BuildRep { seq, kernel } => {
            let rep = build_representation(&seq_table(seq)?, kernel.k, kernel.depth, kernel.m)?;
            report(rep.to_json(), None)
        }
        Command::EvalRep { rep, indices } => {
            let rep = load_rep(rep)?;
            let mut rows = Vec::new();
            let mut csv = String::from("n,value\n");
            for &n in indices {
                let v = rep.eval(n)?;
                let _ = writeln!(csv, "{n},{v}");
                rows.push(json!({ "n": n, "value": v }));
            }
            report(json!({ "values": rows }), csv)
        }
        Command::PoleLattice { rep, m_max, l_max } => {
            let rep = load_rep(rep)?;
            let lat = pole_lattice(&rep, *m_max, *l_max)?;
            let json = json!({
                "k": lat.k,
                "spacing": lat.spacing(),
                "eigenvalues": lat.eigenvalues.iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
                "skipped": lat.skipped,
                "points": lat.points.iter().map(|p| json!({
                    "s": [p.s.re, p.s.im], "alpha_index": p.alpha_index, "m": p.m, "l": p.l,
                })).collect::<Vec<_>>(),
            });
            report(json, lat.to_csv())
        }
        Command::DirichletEval { rep, method, s, terms, id, levels, m_max } => {
            let s = parse_complex(s)?;
            let r = match method {
                EvalMethod::Direct => {
                    let (Some(name), Some(n)) = (&rep.function, rep.n) else {
                        return Err(CliError::Usage("the direct method needs --fn and --N".into()));
                    };
                    let t = load_table(&parse_fn(name)?, n, rep.modulus, None)?;
                    direct_sum(&t, s, terms.unwrap_or(n))?
                }
                EvalMethod::Recursion => continue_via_recursion(&load_rep(rep)?, s, *levels, *m_max)?,
                EvalMethod::Quotient => {
                    let Some(id) = id else {
                        return Err(CliError::Usage("the quotient method needs --id".into()));
                    };
                    zeta_quotient_eval(id.parse::<IdentityId>()?, s)?
                }
            };
            report(r.to_json(), eval_csv(&r))
        }
        Command::VerifyIdentity { id, s, n } => {
            let id: IdentityId = id.parse()?;
            let samples = if s.is_empty() {
                id.default_samples()
            } else {
                s.iter().map(|x| parse_complex(x)).collect::<Result<Vec<_>>>()?
            };
            let t = generate_table(&id.function(), *n)?;
            let rep = verify_identity(id, &t, &samples, *n)?;
            let mut csv = String::from("s_re,s_im,lhs_re,lhs_im,rhs_re,rhs_im,residual,bound,pass\n");
            for x in &rep.samples {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{:e},{:e},{}",
                    x.s.0, x.s.1, x.lhs.0, x.lhs.1, x.rhs.0, x.rhs.1, x.residual, x.bound, x.pass
                );
            }
            report(rep.to_json(), csv)
        }
        Command::PoleScan { rep, a, b, t, step, levels, m_max } => {
            let rep = load_rep(rep)?;
            let scan = pole_scan(&rep, ScanRect::new(*a, *b, *t)?, *step, *levels, *m_max)?;
            report(scan.to_json(), scan.to_csv())
        }
        Command::Singularities { n_max } => {
            let pts = landau_walfisz_singularities(*n_max)?;
            let mut csv = String::from("n,s\n");
            for (n, s) in &pts {
                let _ = writeln!(csv, "{n},{s}");
            }
            let rows: Vec<Value> = pts.iter().map(|(n, s)| json!({ "n": n, "s": s })).collect();
            report(json!({ "points": rows, "accumulates_at": 0.0 }), csv)
        }
        Command::Zeta { s, tol } => {
            let mut rows = Vec::new();
            let mut csv = String::from("re,im,value_re,value_im,error_estimate,terms_used,bernoulli_order\n");
            for x in s {
                let z = zeta_em(parse_complex(x)?, *tol)?;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{:e},{},{}",
                    z.s.re, z.s.im, z.value.re, z.value.im, z.error_estimate, z.terms_used, z.bernoulli_order
                );
                rows.push(json!({
                    "s": [z.s.re, z.s.im],
                    "value": [z.value.re, z.value.im],
                    "error_estimate": z.error_estimate,
                    "terms_used": z.terms_used,
                    "bernoulli_order": z.bernoulli_order,
                }));
            }
            report(json!({ "values": rows }), csv)
        }
        Command::Zeros { t } => {
            let zeros = critical_line_zeros(*t)?;
            let mut csv = String::from("index,ordinate,bracket_lo,bracket_hi\n");
            for (i, z) in zeros.iter().enumerate() {
                let _ = writeln!(csv, "{},{:.9},{:.9},{:.9}", i + 1, z.ordinate, z.bracket.0, z.bracket.1);
            }
            report(json!({ "T": t, "count": zeros.len(), "zeros": zeros }), csv)
        }
        Command::ZeroCount { t } => {
            let c = zero_count(*t)?;
            let csv = format!("t,count,critical_line_count,discrepancy\n{},{},{},{}\n", c.t, c.count, c.critical_line_count, c.discrepancy);
            report(serde_json::to_value(c).expect("count serializes"), csv)
        }
        Command::Tlogt { t } => {
            let rows = tlogt_ratio_table(t)?;
            let mut csv = String::from("t,n,ratio_tlogt,ratio_t\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{}", r.t, r.n, r.ratio_tlogt, r.ratio_t);
            }
            report(json!({ "rows": rows }), csv)
        }
        Command::ChristolOrbit { seq, p, budget } => {
            let t = seq_table(seq)?;
            let series = series_from_table(&t, *p, seq.n)?;
            let orbit = orbit_explore(&series, *budget)?;
            let v = algebraicity_verdict(&orbit);
            let mut json = v.to_json();
            json["orbit_size"] = json!(orbit.orbit.len());
            let csv = format!(
                "verdict,size_or_depth,window,p,budget,orbit_size\n{},{},{},{},{},{}\n",
                json["verdict"].as_str().unwrap_or(""),
                json["size_or_depth"],
                v.window,
                p,
                budget,
                orbit.orbit.len()
            );
            report(json, csv)
        }
    }
}
