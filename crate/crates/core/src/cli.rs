//! Command-line front end. Every input produces one record; records are JSON
//! objects with sorted keys, one per line, or `key=value` lines in text mode.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::ext::{continue_kpl, continue_kpl_wp_route, lift_relation, relation_search, verify_relation, wp_route_t_prec, RelationCertificate};
use crate::field::{split_prime_power, FieldTower};
use crate::kochubei::{continue_kmpl, delta_check, kmpl_eval, kpl_eval, Residual};
use crate::poly::RatFunc;
use crate::series::{exp, CInftyElem, Exp, ExtExp};
use crate::tate::{TailBound, TateElem};
use crate::text::{parse_fp_poly, parse_ratfunc, parse_series, parse_series_poly};
use crate::wp::{wp, wp_inverse, WpConfig};

#[derive(Parser, Debug)]
#[command(name = "ffpolylog", version, about = "Kochubei polylogarithms over F_q(theta): evaluation, continuation and relations")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Size of the constant field.
    #[arg(long, global = true, default_value_t = 3)]
    pub q: u64,
    /// Characteristic; checked against `q` when given.
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Defining polynomial of F_q over F_p, e.g. `x^2+1` or `1,0,1`.
    #[arg(long = "fq-modulus", global = true)]
    pub fq_modulus: Option<String>,
    /// Number of theta-digits below 0 to certify.
    #[arg(long, global = true, default_value_t = 40)]
    pub prec: i64,
    /// Truncation degree in t for Tate-algebra computations.
    #[arg(long = "t-prec", global = true, default_value_t = 16)]
    pub t_prec: usize,
    /// Degree bound for relation search.
    #[arg(long = "deg-bound", global = true, default_value_t = 8)]
    pub deg_bound: usize,
    #[arg(long, global = true, value_enum)]
    pub route: Option<Route>,
    #[arg(long, global = true, value_enum, default_value_t = Output::Records)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Series,
    Ext,
    Wp,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Output {
    Text,
    Records,
}

#[derive(Args, Debug, Clone)]
pub struct Inputs {
    /// An input element; repeatable.
    #[arg(long = "u", allow_hyphen_values = true)]
    pub u: Vec<String>,
    /// File with one input element per line (`#` starts a comment).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Li_n(u) by the defining series (other routes with --route).
    EvalKpl {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Multiple polylogarithm Li_s(u_1, ..., u_r) by its series.
    EvalKmpl {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u32>,
        /// Arguments u_1, ..., u_r in order.
        #[arg(long = "u", required = true, allow_hyphen_values = true)]
        u: Vec<String>,
    },
    /// Li_n(u) continued to arbitrary u, modulo A.
    ContinueKpl {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Continued multiple polylogarithm vector, modulo the monodromy lattice.
    ContinueKmpl {
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<u32>,
        #[arg(long = "u", required = true, allow_hyphen_values = true)]
        u: Vec<String>,
    },
    /// Residual of Li_n(theta u) - theta Li_n(u) - Li_(n-1)(u) modulo A.
    DeltaCheck {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Canonical F with F^(-1) - F = g for g a polynomial in t with series coefficients.
    WpSolve {
        #[arg(long = "g", allow_hyphen_values = true)]
        g: Vec<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// F_q[t]-relations among the points v_u, optionally lifted and verified.
    Relations {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[command(flatten)]
        inputs: Inputs,
        /// Lift every relation and verify it numerically.
        #[arg(long)]
        lift: bool,
        /// Verify the certificates stored in this file instead of searching.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub tower: Arc<FieldTower>,
    pub prec: i64,
    pub t_prec: usize,
    pub deg_bound: usize,
    pub route: Option<Route>,
    pub output: Output,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<Self> {
        let (p, ell) = split_prime_power(a.q).ok_or_else(|| Error::Config(format!("q = {} is not a prime power", a.q)))?;
        if a.p.is_some_and(|x| x != p) {
            return Err(Error::Config(format!("p = {} is not the characteristic of F_{}", a.p.unwrap(), a.q)));
        }
        let modulus = a.fq_modulus.as_deref().map(|s| parse_fp_poly(p, s)).transpose()?;
        if a.prec < 8 {
            return Err(Error::Config(format!("prec = {} is below the minimum 8", a.prec)));
        }
        Ok(RunConfig {
            tower: FieldTower::new(p, ell, modulus, 1)?,
            prec: a.prec,
            t_prec: a.t_prec,
            deg_bound: a.deg_bound,
            route: a.route,
            output: a.output,
        })
    }
    fn target(&self) -> Exp {
        exp(-self.prec)
    }
}

fn read_inputs(inputs: &[String], file: Option<&PathBuf>) -> Result<Vec<String>> {
    let mut out: Vec<String> = inputs.to_vec();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        out.extend(
            text.lines()
                .map(|l| l.split('#').next().unwrap().trim())
                .filter(|l| !l.is_empty())
                .map(String::from),
        );
    }
    if out.is_empty() {
        return Err(Error::Config("no input elements".into()));
    }
    Ok(out)
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Config(_) => "config",
        Error::Parse(_) => "parse",
        Error::MixedContext(_) => "mixed-context",
        Error::ImpreciseZero => "imprecise-zero",
        Error::DivisionByZero => "division-by-zero",
        Error::Domain(_) => "domain",
        Error::NotEvaluable(_) => "not-evaluable",
        Error::Precision(_) => "precision",
        Error::Resource(_) => "resource",
        Error::ClassMismatch(_) => "class-mismatch",
        Error::Shape(_) => "shape",
        Error::Unsupported(_) => "unsupported",
    }
}

fn floor_text(x: &CInftyElem) -> Value {
    x.floor().map_or(Value::Null, |f| json!(f.to_string()))
}

fn residual_fields(r: &Residual, m: &mut Map<String, Value>) {
    m.insert("residual_exponent".into(), json!(r.residual.to_string()));
    m.insert("floor_exponent".into(), json!(r.floor.to_string()));
    m.insert("pass".into(), json!(r.passes()));
}

fn field_name(t: &FieldTower) -> String {
    format!("F_{}", t.size())
}

/// An element given as a rational function or series text; rational
/// functions are expanded far enough for a result at `target`.
fn series_arg(tower: &Arc<FieldTower>, s: &str, n: u32, target: Exp) -> Result<CInftyElem> {
    match parse_ratfunc(tower, s) {
        Ok(r) => Ok(CInftyElem::from_ratfunc(&r, (target / exp(tower.q() as i64) + exp(n as i64)).floor())),
        Err(_) => parse_series(tower, s),
    }
}

struct Runner {
    cfg: RunConfig,
    wp: WpConfig,
    records: Vec<Map<String, Value>>,
    resource_hit: bool,
}

impl Runner {
    fn emit(&mut self, mut base: Map<String, Value>, r: Result<Map<String, Value>>) {
        match r {
            Ok(m) => base.extend(m),
            Err(e) => {
                self.resource_hit |= matches!(e, Error::Resource(_));
                base.insert("error".into(), json!(e.to_string()));
                base.insert("error_kind".into(), json!(error_kind(&e)));
            }
        }
        self.records.push(base);
    }

    fn base(verb: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("record".into(), json!(verb));
        m
    }

    fn kpl_ext(&self, n: u32, u: &RatFunc) -> Result<Map<String, Value>> {
        let c = continue_kpl(n, u, self.cfg.target(), &self.wp)?;
        let mut m = Map::new();
        m.insert("value".into(), json!(c.value.to_string()));
        m.insert("floor".into(), floor_text(&c.value));
        m.insert("ell".into(), json!(c.ell));
        m.insert("g".into(), json!(c.g.to_string()));
        m.insert("b".into(), json!(c.b.to_string()));
        m.insert("ext_degree".into(), json!(c.ext_degree()));
        m.insert("constant_field".into(), json!(field_name(c.b.tower())));
        Ok(m)
    }

    fn kpl_wp(&self, n: u32, u: &RatFunc) -> Result<(CInftyElem, usize)> {
        let nu = u.norm_exp().unwrap_or(0);
        let tp = self.cfg.t_prec.max(wp_route_t_prec(self.cfg.tower.q(), n, nu, self.cfg.target()));
        Ok((continue_kpl_wp_route(n, u, tp, self.cfg.target(), &self.wp)?, tp))
    }

    fn kpl_record(&self, n: u32, s: &str, route: Route) -> Result<Map<String, Value>> {
        let t = &self.cfg.tower;
        let target = self.cfg.target();
        let mut m = Map::new();
        m.insert("route".into(), json!(format!("{route:?}").to_lowercase()));
        match route {
            Route::Series => {
                let x = series_arg(t, s, n, target)?;
                let v = kpl_eval(n, &x, target)?;
                m.insert("value".into(), json!(v.to_string()));
                m.insert("floor".into(), floor_text(&v));
            }
            Route::Ext => m.extend(self.kpl_ext(n, &parse_ratfunc(t, s)?)?),
            Route::Wp => {
                let (v, tp) = self.kpl_wp(n, &parse_ratfunc(t, s)?)?;
                m.insert("value".into(), json!(v.to_string()));
                m.insert("floor".into(), floor_text(&v));
                m.insert("t_prec".into(), json!(tp));
            }
            Route::Both => {
                let u = parse_ratfunc(t, s)?;
                m.extend(self.kpl_ext(n, &u)?);
                let a = continue_kpl(n, &u, target, &self.wp)?.value;
                let (b, tp) = self.kpl_wp(n, &u)?;
                let r = Residual::of(&a.sub(&b).reduce_mod_a());
                m.insert("wp_value".into(), json!(b.to_string()));
                m.insert("t_prec".into(), json!(tp));
                residual_fields(&r, &mut m);
            }
        }
        Ok(m)
    }

    fn run(&mut self, cmd: &Command) -> Result<()> {
        let t = self.cfg.tower.clone();
        let target = self.cfg.target();
        match cmd {
            Command::EvalKpl { n, inputs } | Command::ContinueKpl { n, inputs } => {
                let (verb, default) = match cmd {
                    Command::EvalKpl { .. } => ("eval-kpl", Route::Series),
                    _ => ("continue-kpl", Route::Ext),
                };
                let route = self.cfg.route.unwrap_or(default);
                for s in read_inputs(&inputs.u, inputs.input.as_ref())? {
                    let mut b = Self::base(verb);
                    b.insert("n".into(), json!(n));
                    b.insert("u".into(), json!(s));
                    let r = self.kpl_record(*n, &s, route);
                    self.emit(b, r);
                }
            }
            Command::EvalKmpl { s, u } | Command::ContinueKmpl { s, u } => {
                let cont = matches!(cmd, Command::ContinueKmpl { .. });
                let mut b = Self::base(if cont { "continue-kmpl" } else { "eval-kmpl" });
                b.insert("s".into(), json!(s));
                b.insert("u".into(), json!(u));
                let r = (|| {
                    let xs = u
                        .iter()
                        .zip(s)
                        .map(|(x, &sj)| series_arg(&t, x, sj, target))
                        .collect::<Result<Vec<_>>>()?;
                    let mut m = Map::new();
                    if cont {
                        if xs.is_empty() {
                            return Err(Error::Shape("no arguments".into()));
                        }
                        let v = continue_kmpl(s, &xs[0], &xs[1..], self.cfg.t_prec, target, &self.wp)?;
                        m.insert("values".into(), json!(v.iter().map(|x| x.to_string()).collect::<Vec<_>>()));
                        m.insert("floors".into(), Value::Array(v.iter().map(floor_text).collect()));
                    } else {
                        let v = kmpl_eval(s, &xs, target)?;
                        m.insert("value".into(), json!(v.to_string()));
                        m.insert("floor".into(), floor_text(&v));
                    }
                    Ok(m)
                })();
                self.emit(b, r);
            }
            Command::DeltaCheck { n, inputs } => {
                for s in read_inputs(&inputs.u, inputs.input.as_ref())? {
                    let mut b = Self::base("delta-check");
                    b.insert("n".into(), json!(n));
                    b.insert("u".into(), json!(s));
                    let r = parse_ratfunc(&t, &s).and_then(|u| delta_check(*n, &u, target, &self.wp)).map(|r| {
                        let mut m = Map::new();
                        residual_fields(&r, &mut m);
                        m
                    });
                    self.emit(b, r);
                }
            }
            Command::WpSolve { g, input } => {
                for s in read_inputs(g, input.as_ref())? {
                    let mut b = Self::base("wp-solve");
                    b.insert("g".into(), json!(s));
                    let r = (|| {
                        let g = TateElem::new(&t, parse_series_poly(&t, &s)?, TailBound::Exact);
                        let f = wp_inverse(&g, target, &self.wp)?;
                        let d = wp(&f)?.sub(&g)?;
                        let mut m = Map::new();
                        m.insert("solution".into(), json!(f.to_string()));
                        m.insert("ext_degree".into(), json!(f.tower().m()));
                        m.insert("residual_exponent".into(), json!(d.gauss_norm_exp().to_string()));
                        m.insert("floor_exponent".into(), json!(d.floor_exp().to_string()));
                        m.insert("pass".into(), json!(d.is_zero_at_precision()));
                        Ok(m)
                    })();
                    self.emit(b, r);
                }
            }
            Command::Relations { n, inputs, lift, verify } => {
                if let Some(path) = verify {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                    for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
                        let mut b = Self::base("verify");
                        b.insert("index".into(), json!(i));
                        let r = serde_json::from_str::<RelationCertificate>(line)
                            .map_err(|e| Error::Parse(e.to_string()))
                            .and_then(|c| c.to_relation())
                            .and_then(|rel| verify_relation(&rel, target, &self.wp))
                            .map(|r| {
                                let mut m = Map::new();
                                residual_fields(&r, &mut m);
                                m
                            });
                        self.emit(b, r);
                    }
                    return Ok(());
                }
                let us = read_inputs(&inputs.u, inputs.input.as_ref())?;
                let us = us.iter().map(|s| parse_ratfunc(&t, s)).collect::<Result<Vec<_>>>()?;
                let found = relation_search(&us, *n as usize, self.cfg.deg_bound)?;
                if found.is_empty() {
                    let mut b = Self::base("independent");
                    b.insert("n".into(), json!(n));
                    b.insert("u_list".into(), json!(us.iter().map(|u| u.to_string()).collect::<Vec<_>>()));
                    b.insert("deg_bound".into(), json!(self.cfg.deg_bound));
                    self.records.push(b);
                }
                for rel in found {
                    let b = Self::base("relation");
                    let rel = if *lift {
                        lift_relation(&rel.coefficients, &rel.u_list, *n as usize, rel.deg_bound, target, &self.wp)
                    } else {
                        Ok(rel)
                    };
                    let r = rel.map(|rel| match serde_json::to_value(RelationCertificate::from_relation(&rel)) {
                        Ok(Value::Object(m)) => m,
                        _ => Map::new(),
                    });
                    self.emit(b, r);
                }
            }
        }
        Ok(())
    }
}

fn render(m: &Map<String, Value>, output: Output) -> String {
    match output {
        Output::Records => Value::Object(m.clone()).to_string(),
        Output::Text => m
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                v => format!("{k}={v}"),
            })
            .collect::<Vec<_>>()
            .join(" "),
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code:
/// 0 on success (per-record errors included), 1 on usage or configuration
/// errors, 2 when a resource bound was exceeded.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let cfg = match RunConfig::from_args(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if matches!(e, Error::Resource(_)) { 2 } else { 1 };
        }
    };
    let output = cfg.output;
    let mut runner = Runner { cfg, wp: WpConfig::default(), records: Vec::new(), resource_hit: false };
    let status = runner.run(&cli.command);
    for r in &runner.records {
        let _ = writeln!(out, "{}", render(r, output));
    }
    match status {
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if matches!(e, Error::Resource(_)) {
                2
            } else {
                1
            }
        }
        Ok(()) if runner.resource_hit => 2,
        Ok(()) => 0,
    }
}

/// Parses an exponent written as an integer or `a/b`.
pub fn parse_exp(s: &str) -> Option<ExtExp> {
    match s {
        "-inf" => Some(ExtExp::NegInf),
        "inf" => Some(ExtExp::PosInf),
        _ => s.parse::<Exp>().ok().map(ExtExp::Finite),
    }
}
