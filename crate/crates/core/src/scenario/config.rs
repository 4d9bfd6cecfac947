//! Flat `key = value` scenario files and the builtin presets.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::dlra::{Integrator, StepConfig};
use crate::error::{Error, Result};

/// Spatial mesh source.
#[derive(Clone, Debug, PartialEq)]
pub enum XMeshSpec {
    Interval { a: f64, b: f64, n: usize, periodic: bool },
    Box { lo: [f64; 2], hi: [f64; 2], n: [usize; 2], periodic: bool },
    /// builtin triangle domain with `n` subdivisions per edge
    Triangle { n: usize },
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldMode {
    SelfConsistent,
    Constant([f64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitKind {
    Zero,
    Landau { alpha: f64, k: f64 },
    /// the characteristics solution evaluated at t = 0
    Characteristics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InflowKind {
    None,
    Characteristics,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub x_mesh: XMeshSpec,
    /// velocity box `[-v_max, v_max]^d`, periodic
    pub v_max: f64,
    /// velocity elements per direction
    pub v_n: usize,
    pub field: FieldMode,
    pub rho_b: f64,
    pub init: InitKind,
    pub inflow: InflowKind,
    pub max_terms: usize,
    pub x_center: [f64; 2],
    pub v_center: [f64; 2],
    pub sigma_x: f64,
    pub sigma_v: f64,
    pub freeze_inflow: bool,
    pub step: StepConfig,
    pub rank: usize,
    pub t_end: f64,
    pub level: usize,
    pub output_every: usize,
    pub snapshot_times: Vec<f64>,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// terms kept in the separable reference of the error diagnostic
    pub error_terms: usize,
}

pub const PRESETS: [&str; 3] = ["landau_1d1v", "landau_2d2v_small", "inflow_triangle"];

impl Scenario {
    /// A named builtin scenario at level 0.
    pub fn preset(name: &str) -> Result<Scenario> {
        let landau = |dim: usize| {
            let l = 4.0 * PI;
            Scenario {
                name: name.to_string(),
                x_mesh: if dim == 1 {
                    XMeshSpec::Interval { a: 0.0, b: l, n: 64, periodic: true }
                } else {
                    XMeshSpec::Box { lo: [0.0; 2], hi: [l; 2], n: [32; 2], periodic: true }
                },
                v_max: 6.0,
                v_n: if dim == 1 { 256 } else { 64 },
                field: FieldMode::SelfConsistent,
                rho_b: 1.0,
                init: InitKind::Landau { alpha: 1e-2, k: 0.5 },
                inflow: InflowKind::None,
                max_terms: 25,
                x_center: [0.0; 2],
                v_center: [0.0; 2],
                sigma_x: 0.2,
                sigma_v: 0.5,
                freeze_inflow: false,
                step: StepConfig {
                    dt: 5e-3,
                    delta: 0.0,
                    eps: 1e-6,
                    r_max: 40,
                    substeps: 1,
                    integrator: Integrator::Psi,
                },
                rank: if dim == 1 { 5 } else { 10 },
                t_end: if dim == 1 { 25.0 } else { 20.0 },
                level: 0,
                output_every: 10,
                snapshot_times: Vec::new(),
                out_dir: PathBuf::from(format!("out/{name}")),
                seed: 1,
                error_terms: 64,
            }
        };
        match name {
            "landau_1d1v" => Ok(landau(1)),
            "landau_2d2v_small" => Ok(landau(2)),
            "inflow_triangle" => {
                let sol = crate::oracle::CharacteristicsSolution::default();
                Ok(Scenario {
                    name: name.to_string(),
                    x_mesh: XMeshSpec::Triangle { n: 25 },
                    v_max: 4.0,
                    v_n: 64,
                    field: FieldMode::Constant(sol.e),
                    rho_b: 0.0,
                    init: InitKind::Characteristics,
                    inflow: InflowKind::Characteristics,
                    max_terms: 25,
                    x_center: sol.x_center,
                    v_center: sol.v_center,
                    sigma_x: sol.sigma_x,
                    sigma_v: sol.sigma_v,
                    freeze_inflow: false,
                    step: StepConfig {
                        dt: 5e-3,
                        delta: 1e-2,
                        eps: 1e-3,
                        r_max: 40,
                        substeps: 1,
                        integrator: Integrator::Rauc,
                    },
                    rank: 1,
                    t_end: 0.5,
                    level: 0,
                    output_every: 5,
                    snapshot_times: Vec::new(),
                    out_dir: PathBuf::from(format!("out/{name}")),
                    seed: 1,
                    error_terms: 64,
                })
            }
            _ => Err(Error::Config {
                key: "scenario".into(),
                message: format!("unknown builtin `{name}` (known: {})", PRESETS.join(", ")),
            }),
        }
    }

    /// Parse a config file. A `scenario = <preset>` line selects the base;
    /// every other key overrides it.
    pub fn parse(text: &str) -> Result<Scenario> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let base = pairs
            .iter()
            .find(|(k, _)| k == "scenario")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Config {
                key: "scenario".into(),
                message: "missing; name a builtin preset to start from".into(),
            })?;
        let mut sc = Scenario::preset(&base)?;
        for (k, v) in pairs.iter().filter(|(k, _)| k != "scenario") {
            sc.set(k, v)?;
        }
        sc.validate()?;
        Ok(sc)
    }

    /// Override one key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let err = |message: String| Error::Config {
            key: key.to_string(),
            message,
        };
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| err(format!("`{s}` is not a number")))
        };
        let int = |s: &str| -> Result<usize> {
            s.trim()
                .parse::<usize>()
                .map_err(|_| err(format!("`{s}` is not a nonnegative integer")))
        };
        let vec2 = |s: &str| -> Result<[f64; 2]> {
            let v: Vec<f64> = s.split_whitespace().map(num).collect::<Result<_>>()?;
            match v.len() {
                1 => Ok([v[0], 0.0]),
                2 => Ok([v[0], v[1]]),
                _ => Err(err(format!("expected one or two numbers, found `{s}`"))),
            }
        };
        let flag = |s: &str| match s {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(err(format!("`{s}` is not a boolean"))),
        };
        match key {
            "name" => self.name = value.to_string(),
            "x_mesh" => self.x_mesh = parse_x_mesh(value).map_err(err)?,
            "v_mesh.box" => self.v_max = num(value)?,
            "v_mesh.n" => self.v_n = int(value)?,
            "field.mode" => {
                self.field = match value {
                    "self_consistent" => FieldMode::SelfConsistent,
                    "constant" => match self.field {
                        FieldMode::Constant(e) => FieldMode::Constant(e),
                        FieldMode::SelfConsistent => FieldMode::Constant([0.0; 2]),
                    },
                    _ => return Err(err(format!("`{value}` is not self_consistent or constant"))),
                }
            }
            "field.E" => self.field = FieldMode::Constant(vec2(value)?),
            "rho_b" => self.rho_b = num(value)?,
            "init.kind" => {
                self.init = match value {
                    "zero" => InitKind::Zero,
                    "landau" => InitKind::Landau { alpha: 1e-2, k: 0.5 },
                    "characteristics" => InitKind::Characteristics,
                    _ => return Err(err(format!("unknown initial condition `{value}`"))),
                }
            }
            "init.alpha" | "init.k" => {
                let x = num(value)?;
                match &mut self.init {
                    InitKind::Landau { alpha, k } => {
                        if key == "init.alpha" {
                            *alpha = x
                        } else {
                            *k = x
                        }
                    }
                    _ => return Err(err("only meaningful with init.kind = landau".into())),
                }
            }
            "inflow.kind" => {
                self.inflow = match value {
                    "none" => InflowKind::None,
                    "characteristics" => InflowKind::Characteristics,
                    _ => return Err(err(format!("unknown inflow `{value}`"))),
                }
            }
            "inflow.max_terms" => self.max_terms = int(value)?,
            "inflow.x_center" => self.x_center = vec2(value)?,
            "inflow.v_center" => self.v_center = vec2(value)?,
            "inflow.sigma_x" => self.sigma_x = num(value)?,
            "inflow.sigma_v" => self.sigma_v = num(value)?,
            "inflow.freeze" => self.freeze_inflow = flag(value)?,
            "dt" => self.step.dt = num(value)?,
            "t_end" => self.t_end = num(value)?,
            "rank" => self.rank = int(value)?,
            "integrator" => self.step.integrator = value.parse()?,
            "eps" => self.step.eps = num(value)?,
            "delta" => self.step.delta = num(value)?,
            "r_max" => self.step.r_max = int(value)?,
            "substeps" => self.step.substeps = int(value)?,
            "level" => self.level = int(value)?,
            "output.every" => self.output_every = int(value)?,
            "snapshot.times" => {
                self.snapshot_times = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(num)
                    .collect::<Result<_>>()?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => self.seed = int(value)? as u64,
            "error.terms" => self.error_terms = int(value)?,
            _ => return Err(err("unknown key".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: &str| {
            Err(Error::Config {
                key: key.into(),
                message: message.into(),
            })
        };
        self.step.validate()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", "must be positive");
        }
        if self.rank < 1 {
            return bad("rank", "must be at least 1");
        }
        if !(self.v_max > 0.0) {
            return bad("v_mesh.box", "must be positive");
        }
        if self.v_n < 2 {
            return bad("v_mesh.n", "must be at least 2");
        }
        if self.output_every < 1 {
            return bad("output.every", "must be at least 1");
        }
        if self.max_terms < 1 {
            return bad("inflow.max_terms", "must be at least 1");
        }
        if !(self.sigma_x > 0.0 && self.sigma_v > 0.0) {
            return bad("inflow.sigma_x", "bump widths must be positive");
        }
        if self.field == FieldMode::SelfConsistent && !self.x_periodic() {
            return bad("field.mode", "self-consistent fields need a periodic x mesh");
        }
        Ok(())
    }

    fn x_periodic(&self) -> bool {
        matches!(
            self.x_mesh,
            XMeshSpec::Interval { periodic: true, .. } | XMeshSpec::Box { periodic: true, .. }
        )
    }

    pub fn dim(&self) -> usize {
        match self.x_mesh {
            XMeshSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// The scenario at `self.level`: dt and eps scaled by 4^-level and the
    /// output cadence stretched so record times stay aligned. Meshes are
    /// refined when they are built.
    pub fn resolved(&self) -> Scenario {
        let mut s = self.clone();
        let f = 4f64.powi(self.level as i32);
        s.step.dt = self.step.dt / f;
        s.step.eps = self.step.eps / f;
        s.output_every = self.output_every * 4usize.pow(self.level as u32);
        s
    }

    /// Number of time steps to reach `t_end`.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.step.dt).round().max(1.0) as usize
    }

    /// Every effective parameter as `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let v2 = |v: [f64; 2]| format!("{:?} {:?}", v[0], v[1]);
        let _ = writeln!(o, "name = {}", self.name);
        let _ = writeln!(o, "x_mesh = {}", x_mesh_text(&self.x_mesh));
        let _ = writeln!(o, "v_mesh.box = {:?}", self.v_max);
        let _ = writeln!(o, "v_mesh.n = {}", self.v_n);
        match self.field {
            FieldMode::SelfConsistent => {
                let _ = writeln!(o, "field.mode = self_consistent");
            }
            FieldMode::Constant(e) => {
                let _ = writeln!(o, "field.mode = constant\nfield.E = {}", v2(e));
            }
        }
        let _ = writeln!(o, "rho_b = {:?}", self.rho_b);
        match self.init {
            InitKind::Zero => {
                let _ = writeln!(o, "init.kind = zero");
            }
            InitKind::Characteristics => {
                let _ = writeln!(o, "init.kind = characteristics");
            }
            InitKind::Landau { alpha, k } => {
                let _ = writeln!(o, "init.kind = landau\ninit.alpha = {alpha:?}\ninit.k = {k:?}");
            }
        }
        let inflow = match self.inflow {
            InflowKind::None => "none",
            InflowKind::Characteristics => "characteristics",
        };
        let _ = writeln!(o, "inflow.kind = {inflow}");
        let _ = writeln!(o, "inflow.max_terms = {}", self.max_terms);
        let _ = writeln!(o, "inflow.x_center = {}", v2(self.x_center));
        let _ = writeln!(o, "inflow.v_center = {}", v2(self.v_center));
        let _ = writeln!(o, "inflow.sigma_x = {:?}", self.sigma_x);
        let _ = writeln!(o, "inflow.sigma_v = {:?}", self.sigma_v);
        let _ = writeln!(o, "inflow.freeze = {}", self.freeze_inflow);
        let _ = writeln!(o, "dt = {:?}", self.step.dt);
        let _ = writeln!(o, "t_end = {:?}", self.t_end);
        let _ = writeln!(o, "rank = {}", self.rank);
        let _ = writeln!(o, "integrator = {}", self.step.integrator);
        let _ = writeln!(o, "eps = {:?}", self.step.eps);
        let _ = writeln!(o, "delta = {:?}", self.step.delta);
        let _ = writeln!(o, "r_max = {}", self.step.r_max);
        let _ = writeln!(o, "substeps = {}", self.step.substeps);
        let _ = writeln!(o, "level = {}", self.level);
        let _ = writeln!(o, "output.every = {}", self.output_every);
        let times: Vec<String> = self.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        let _ = writeln!(o, "snapshot.times = {}", times.join(", "));
        let _ = writeln!(o, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(o, "seed = {}", self.seed);
        let _ = writeln!(o, "error.terms = {}", self.error_terms);
        o
    }
}

fn x_mesh_text(m: &XMeshSpec) -> String {
    let per = |p: bool| if p { " periodic" } else { "" };
    match m {
        XMeshSpec::Interval { a, b, n, periodic } => format!("interval {a:?} {b:?} {n}{}", per(*periodic)),
        XMeshSpec::Box { lo, hi, n, periodic } => format!(
            "box {:?} {:?} {:?} {:?} {} {}{}",
            lo[0],
            hi[0],
            lo[1],
            hi[1],
            n[0],
            n[1],
            per(*periodic)
        ),
        XMeshSpec::Triangle { n } => format!("triangle {n}"),
        XMeshSpec::File(p) => format!("file {}", p.display()),
    }
}

/// `interval a b n [periodic]`, `box x0 x1 y0 y1 nx ny [periodic]`,
/// `triangle n` or `file <path>`.
fn parse_x_mesh(s: &str) -> std::result::Result<XMeshSpec, String> {
    let w: Vec<&str> = s.split_whitespace().collect();
    let periodic = w.last() == Some(&"periodic");
    let args: Vec<&str> = w.iter().skip(1).copied().filter(|a| *a != "periodic").collect();
    let f = |i: usize| -> std::result::Result<f64, String> {
        args.get(i)
            .ok_or_else(|| format!("missing argument {} in `{s}`", i + 1))?
            .parse()
            .map_err(|_| format!("bad number in `{s}`"))
    };
    let n = |i: usize| -> std::result::Result<usize, String> {
        args.get(i)
            .ok_or_else(|| format!("missing argument {} in `{s}`", i + 1))?
            .parse()
            .map_err(|_| format!("bad count in `{s}`"))
    };
    match w.first().copied() {
        Some("interval") if args.len() == 3 => Ok(XMeshSpec::Interval {
            a: f(0)?,
            b: f(1)?,
            n: n(2)?,
            periodic,
        }),
        Some("box") if args.len() == 6 => Ok(XMeshSpec::Box {
            lo: [f(0)?, f(2)?],
            hi: [f(1)?, f(3)?],
            n: [n(4)?, n(5)?],
            periodic,
        }),
        Some("triangle") if args.len() == 1 => Ok(XMeshSpec::Triangle { n: n(0)? }),
        Some("file") if w.len() == 2 => Ok(XMeshSpec::File(PathBuf::from(w[1]))),
        _ => Err(format!("cannot read mesh spec `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in PRESETS {
            Scenario::preset(p).unwrap().validate().unwrap();
        }
        assert!(Scenario::preset("nope").is_err());
    }

    #[test]
    fn overrides_and_errors() {
        let s = Scenario::parse("scenario = landau_1d1v\n# comment\ndt = 0.01\nrank = 3 # inline\n").unwrap();
        assert_eq!(s.step.dt, 0.01);
        assert_eq!(s.rank, 3);
        let e = Scenario::parse("scenario = landau_1d1v\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Config { key, .. } if key == "bogus"));
        let e = Scenario::parse("scenario = landau_1d1v\ndt = -1\n").unwrap_err();
        assert!(matches!(e, Error::Config { key, .. } if key == "dt"));
        let e = Scenario::parse("scenario = landau_1d1v\nnot a pair\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = Scenario::parse("scenario = inflow_triangle\nfield.mode = self_consistent\n").unwrap_err();
        assert!(matches!(e, Error::Config { key, .. } if key == "field.mode"));
    }

    #[test]
    fn resolved_text_round_trips() {
        for p in PRESETS {
            let mut s = Scenario::preset(p).unwrap();
            s.snapshot_times = vec![0.1, 0.25];
            let text = format!("scenario = {p}\n{}", s.to_text());
            assert_eq!(Scenario::parse(&text).unwrap(), s);
        }
    }

    #[test]
    fn level_scaling_is_exact() {
        let mut s = Scenario::preset("inflow_triangle").unwrap();
        s.level = 2;
        let r = s.resolved();
        assert_eq!(r.step.dt, s.step.dt / 16.0);
        assert_eq!(r.step.eps, s.step.eps / 16.0);
        assert_eq!(r.output_every, 80);
        assert_eq!(r.n_steps(), 1600);
    }
}
