//! Plain-text run configuration: `[section]` headers and `key = value` lines,
//! `#` or `;` comments. Every problem found is reported with its line number;
//! unknown sections and keys are errors.

use std::collections::HashMap;
use std::fmt;

use crate::ch::{ChOptions, Potentials};
use crate::coupled::{initial_conditions, IcKind, IcParams, State, Variant, VariantConfig};
use crate::error::Result;
use crate::grid::Grid;
use crate::model::{Coupling, PhysParams};
use crate::potentials::{PotentialSpec, DEFAULT_SIGMA_REG};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Polynomial,
    FloryHuggins,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            PotentialKind::Polynomial => "polynomial",
            PotentialKind::FloryHuggins => "flory_huggins",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "polynomial" => Some(PotentialKind::Polynomial),
            "flory_huggins" => Some(PotentialKind::FloryHuggins),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialKeys {
    pub f_kind: PotentialKind,
    pub g_kind: PotentialKind,
    /// Shared by whichever potential is logarithmic.
    pub theta: f64,
    pub theta_c: f64,
    pub sigma_reg: f64,
    /// Linear tilt of the polynomial wells.
    pub f_tilt: f64,
    pub g_tilt: f64,
}

impl PotentialKeys {
    fn spec(&self, kind: PotentialKind, tilt: f64) -> PotentialSpec {
        match kind {
            PotentialKind::Polynomial => PotentialSpec::PolynomialDoubleWell { tilt },
            PotentialKind::FloryHuggins => PotentialSpec::FloryHuggins {
                theta: self.theta,
                theta_c: self.theta_c,
                sigma_reg: self.sigma_reg,
            },
        }
    }

    pub fn potentials(&self) -> Potentials {
        Potentials {
            bulk: self.spec(self.f_kind, self.f_tilt),
            surface: self.spec(self.g_kind, self.g_tilt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub dt: f64,
    pub t_end: f64,
    pub diag_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: String,
    /// Steps between snapshots; 0 writes only the initial and final ones.
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub params: PhysParams,
    pub potentials: PotentialKeys,
    pub time: TimeSpec,
    pub ic_kind: IcKind,
    pub ic: IcParams,
    pub output: OutputSpec,
    pub variant: Variant,
    /// Bound on the discrete divergence after each projection.
    pub projection_tol: f64,
    /// Relative error injected into the bulk-to-surface flux seen by the
    /// surface equation. Zero except in fault-injection fixtures.
    pub flux_mismatch: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                nx: 64,
                ny: 64,
                lx: 1.0,
                ly: 1.0,
            },
            params: PhysParams::default(),
            potentials: PotentialKeys {
                f_kind: PotentialKind::Polynomial,
                g_kind: PotentialKind::Polynomial,
                theta: 1.0,
                theta_c: 2.0,
                sigma_reg: DEFAULT_SIGMA_REG,
                f_tilt: 0.0,
                g_tilt: 0.0,
            },
            time: TimeSpec {
                dt: 1e-4,
                t_end: 1e-2,
                diag_every: 10,
            },
            ic_kind: IcKind::DropletOnWall,
            ic: IcParams::default(),
            output: OutputSpec {
                dir: "out".into(),
                snapshot_every: 0,
            },
            variant: Variant::FullBulkSurface,
            projection_tol: 1e-9,
            flux_mismatch: 0.0,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
    }

    pub fn variant_config(&self) -> Result<VariantConfig> {
        let mut cfg = VariantConfig::new(self.variant, self.params.clone(), self.potentials.potentials(), self.time.dt)?;
        cfg.ch = ChOptions {
            surface_flux_scale: 1.0 + self.flux_mismatch,
        };
        cfg.ns.projection_tol = self.projection_tol;
        Ok(cfg)
    }

    pub fn initial_state(&self) -> Result<State> {
        initial_conditions(self.ic_kind, &self.grid()?, &self.params, &self.ic)
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            out.push_str(&format!("[{name}]\n"));
            for (k, v) in entries {
                out.push_str(&format!("{k} = {v}\n"));
            }
            out.push('\n');
        };
        let g = &self.grid;
        section(
            "grid",
            vec![
                ("nx", g.nx.to_string()),
                ("ny", g.ny.to_string()),
                ("Lx", g.lx.to_string()),
                ("Ly", g.ly.to_string()),
            ],
        );
        let p = &self.params;
        let coupling = |c: Coupling| match c {
            Coupling::Infinite => "inf".to_string(),
            other => other.value().to_string(),
        };
        section(
            "physics",
            vec![
                ("rho1", p.rho1.to_string()),
                ("rho2", p.rho2.to_string()),
                ("nu1", p.nu1.to_string()),
                ("nu2", p.nu2.to_string()),
                ("m_bulk", p.mob_bulk.to_string()),
                ("m_surf", p.mob_surf.to_string()),
                ("eps", p.eps.to_string()),
                ("delta", p.delta.to_string()),
                ("alpha", p.alpha.to_string()),
                ("beta", p.beta.to_string()),
                ("K", coupling(p.k)),
                ("L", coupling(p.l)),
                ("gamma_tau", p.gamma_tau.to_string()),
            ],
        );
        let q = &self.potentials;
        section(
            "potentials",
            vec![
                ("F_kind", q.f_kind.name().to_string()),
                ("G_kind", q.g_kind.name().to_string()),
                ("theta", q.theta.to_string()),
                ("theta_c", q.theta_c.to_string()),
                ("sigma_reg", q.sigma_reg.to_string()),
                ("F_tilt", q.f_tilt.to_string()),
                ("G_tilt", q.g_tilt.to_string()),
            ],
        );
        let t = &self.time;
        section(
            "time",
            vec![
                ("dt", t.dt.to_string()),
                ("t_end", t.t_end.to_string()),
                ("diag_every", t.diag_every.to_string()),
            ],
        );
        let ic = &self.ic;
        let mut ic_entries = vec![
            ("kind", self.ic_kind.name().to_string()),
            ("mean", ic.mean.to_string()),
            ("seed", ic.seed.to_string()),
            ("amplitude", ic.amplitude.to_string()),
            ("r0", ic.r0.to_string()),
        ];
        if let Some(v) = ic.psi_mean {
            ic_entries.push(("psi_mean", v.to_string()));
        }
        if let Some(v) = ic.center_x {
            ic_entries.push(("center_x", v.to_string()));
        }
        if let Some(v) = ic.interface_y {
            ic_entries.push(("interface_y", v.to_string()));
        }
        section("ic", ic_entries);
        section(
            "output",
            vec![
                ("dir", self.output.dir.clone()),
                ("snapshot_every", self.output.snapshot_every.to_string()),
            ],
        );
        section("variant", vec![("name", self.variant.name().to_string())]);
        section("solver", vec![("projection_tol", self.projection_tol.to_string())]);
        if self.flux_mismatch != 0.0 {
            section("fault", vec![("flux_mismatch", self.flux_mismatch.to_string())]);
        }
        out.pop();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based; `None` for problems not tied to one line.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// All problems found in one configuration text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.0.iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SECTIONS: [&str; 9] = ["grid", "physics", "potentials", "time", "ic", "output", "variant", "solver", "fault"];

struct Parser {
    config: RunConfig,
    errors: Vec<ConfigError>,
    lines: HashMap<&'static str, usize>,
}

fn parse_f64(v: &str) -> std::result::Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got '{v}'")),
    }
}

fn parse_coupling(v: &str) -> std::result::Result<Coupling, String> {
    if v == "inf" {
        return Ok(Coupling::Infinite);
    }
    let x = parse_f64(v).map_err(|_| format!("expected a nonnegative number or 'inf', got '{v}'"))?;
    Coupling::from_value(x).map_err(|_| format!("must be nonnegative, got {v}"))
}

fn parse_count<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>()
        .map_err(|_| format!("expected a nonnegative integer, got '{v}'"))
}

impl Parser {
    fn set(&mut self, section: &str, key: &str, value: &str, line: usize) {
        let c = &mut self.config;
        let r: std::result::Result<&'static str, String> = match (section, key) {
            ("grid", "nx") => parse_count(value).map(|v| {
                c.grid.nx = v;
                "nx"
            }),
            ("grid", "ny") => parse_count(value).map(|v| {
                c.grid.ny = v;
                "ny"
            }),
            ("grid", "Lx") => parse_f64(value).map(|v| {
                c.grid.lx = v;
                "Lx"
            }),
            ("grid", "Ly") => parse_f64(value).map(|v| {
                c.grid.ly = v;
                "Ly"
            }),
            ("physics", k) => {
                let p = &mut c.params;
                let slot: Option<(&'static str, &mut f64)> = match k {
                    "rho1" => Some(("rho1", &mut p.rho1)),
                    "rho2" => Some(("rho2", &mut p.rho2)),
                    "nu1" => Some(("nu1", &mut p.nu1)),
                    "nu2" => Some(("nu2", &mut p.nu2)),
                    "m_bulk" => Some(("m_bulk", &mut p.mob_bulk)),
                    "m_surf" => Some(("m_surf", &mut p.mob_surf)),
                    "eps" => Some(("eps", &mut p.eps)),
                    "delta" => Some(("delta", &mut p.delta)),
                    "alpha" => Some(("alpha", &mut p.alpha)),
                    "beta" => Some(("beta", &mut p.beta)),
                    "gamma_tau" => Some(("gamma_tau", &mut p.gamma_tau)),
                    _ => None,
                };
                match (slot, k) {
                    (Some((name, target)), _) => parse_f64(value).map(|v| {
                        *target = v;
                        name
                    }),
                    (None, "K") => parse_coupling(value).map(|v| {
                        p.k = v;
                        "K"
                    }),
                    (None, "L") => parse_coupling(value).map(|v| {
                        p.l = v;
                        "L"
                    }),
                    _ => Err(format!("unknown key '{k}' in [physics]")),
                }
            }
            ("potentials", k) => {
                let q = &mut c.potentials;
                match k {
                    "F_kind" | "G_kind" => match PotentialKind::from_name(value) {
                        Some(kind) if k == "F_kind" => {
                            q.f_kind = kind;
                            Ok("F_kind")
                        }
                        Some(kind) => {
                            q.g_kind = kind;
                            Ok("G_kind")
                        }
                        None => Err(format!("unknown potential '{value}' (polynomial, flory_huggins)")),
                    },
                    "theta" => parse_f64(value).map(|v| {
                        q.theta = v;
                        "theta"
                    }),
                    "theta_c" => parse_f64(value).map(|v| {
                        q.theta_c = v;
                        "theta_c"
                    }),
                    "sigma_reg" => parse_f64(value).map(|v| {
                        q.sigma_reg = v;
                        "sigma_reg"
                    }),
                    "F_tilt" => parse_f64(value).map(|v| {
                        q.f_tilt = v;
                        "F_tilt"
                    }),
                    "G_tilt" => parse_f64(value).map(|v| {
                        q.g_tilt = v;
                        "G_tilt"
                    }),
                    _ => Err(format!("unknown key '{k}' in [potentials]")),
                }
            }
            ("time", "dt") => parse_f64(value).map(|v| {
                c.time.dt = v;
                "dt"
            }),
            ("time", "t_end") => parse_f64(value).map(|v| {
                c.time.t_end = v;
                "t_end"
            }),
            ("time", "diag_every") => parse_count(value).map(|v| {
                c.time.diag_every = v;
                "diag_every"
            }),
            ("ic", k) => {
                let ic = &mut c.ic;
                match k {
                    "kind" => match IcKind::from_name(value) {
                        Some(kind) => {
                            c.ic_kind = kind;
                            Ok("kind")
                        }
                        None => Err(format!(
                            "unknown initial condition '{value}' (droplet_on_wall, stratified, random_smooth)"
                        )),
                    },
                    "mean" => parse_f64(value).map(|v| {
                        ic.mean = v;
                        "mean"
                    }),
                    "psi_mean" => parse_f64(value).map(|v| {
                        ic.psi_mean = Some(v);
                        "psi_mean"
                    }),
                    "seed" => parse_count(value).map(|v| {
                        ic.seed = v;
                        "seed"
                    }),
                    "amplitude" => parse_f64(value).map(|v| {
                        ic.amplitude = v;
                        "amplitude"
                    }),
                    "r0" => parse_f64(value).map(|v| {
                        ic.r0 = v;
                        "r0"
                    }),
                    "center_x" => parse_f64(value).map(|v| {
                        ic.center_x = Some(v);
                        "center_x"
                    }),
                    "interface_y" => parse_f64(value).map(|v| {
                        ic.interface_y = Some(v);
                        "interface_y"
                    }),
                    _ => Err(format!("unknown key '{k}' in [ic]")),
                }
            }
            ("output", "dir") => {
                c.output.dir = value.to_string();
                Ok("dir")
            }
            ("output", "snapshot_every") => parse_count(value).map(|v| {
                c.output.snapshot_every = v;
                "snapshot_every"
            }),
            ("variant", "name") => match Variant::from_name(value) {
                Some(v) => {
                    c.variant = v;
                    Ok("name")
                }
                None => Err(format!(
                    "unknown variant '{value}' (full_bulk_surface, neumann_agg, nonconvective_ch)"
                )),
            },
            ("solver", "projection_tol") => parse_f64(value).map(|v| {
                c.projection_tol = v;
                "projection_tol"
            }),
            ("fault", "flux_mismatch") => parse_f64(value).map(|v| {
                c.flux_mismatch = v;
                "flux_mismatch"
            }),
            (s, k) => Err(format!("unknown key '{k}' in [{s}]")),
        };
        match r {
            Ok(name) => {
                if let Some(prev) = self.lines.insert(name, line) {
                    self.error(Some(line), format!("duplicate key '{key}' (first set on line {prev})"));
                }
            }
            Err(msg) if msg.starts_with("unknown") => self.error(Some(line), msg),
            Err(msg) => self.error(Some(line), format!("{key}: {msg}")),
        }
    }

    fn error(&mut self, line: Option<usize>, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.lines.get(key).copied()
    }

    fn validate(&mut self) {
        let c = self.config.clone();
        let mut problems: Vec<(&str, String)> = Vec::new();
        if c.grid.nx < 8 {
            problems.push(("nx", format!("nx must be at least 8, got {}", c.grid.nx)));
        }
        if c.grid.ny < 8 {
            problems.push(("ny", format!("ny must be at least 8, got {}", c.grid.ny)));
        }
        for (k, v) in [("Lx", c.grid.lx), ("Ly", c.grid.ly)] {
            if !(v > 0.0) {
                problems.push((k, format!("{k} must be positive, got {v}")));
            }
        }
        for msg in c.params.violations() {
            let key = if msg.starts_with("K=0") {
                "K"
            } else {
                ["rho1", "rho2", "nu1", "nu2", "m_bulk", "m_surf", "eps", "delta", "alpha", "beta", "gamma_tau"]
                    .into_iter()
                    .find(|k| msg.starts_with(&format!("{k} ")))
                    .unwrap_or("")
            };
            problems.push((key, msg));
        }
        let pots = c.potentials.potentials();
        for (key, spec) in [("F_kind", pots.bulk), ("G_kind", pots.surface)] {
            if let Err(e) = spec.validate() {
                let key = match spec {
                    PotentialSpec::FloryHuggins { .. } => "theta",
                    PotentialSpec::PolynomialDoubleWell { .. } => key,
                };
                problems.push((key, e.to_string()));
            }
        }
        if !(c.time.dt > 0.0) {
            problems.push(("dt", format!("dt must be positive, got {}", c.time.dt)));
        }
        if !(c.time.t_end >= 0.0) {
            problems.push(("t_end", format!("t_end must be nonnegative, got {}", c.time.t_end)));
        }
        if c.time.diag_every == 0 {
            problems.push(("diag_every", "diag_every must be at least 1".into()));
        }
        if !(c.ic.amplitude >= 0.0) {
            problems.push(("amplitude", format!("amplitude must be nonnegative, got {}", c.ic.amplitude)));
        }
        if !(c.ic.r0 > 0.0) {
            problems.push(("r0", format!("r0 must be positive, got {}", c.ic.r0)));
        }
        if c.output.dir.is_empty() {
            problems.push(("dir", "output dir must not be empty".into()));
        }
        if !(c.projection_tol > 0.0) {
            problems.push(("projection_tol", format!("projection_tol must be positive, got {}", c.projection_tol)));
        }
        if !(1.0 + c.flux_mismatch > 0.0) {
            problems.push(("flux_mismatch", "flux_mismatch must exceed -1".into()));
        }
        for (key, msg) in problems {
            let line = self.line_of(key);
            self.error(line, msg);
        }
    }
}

pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigErrors> {
    let mut parser = Parser {
        config: RunConfig::default(),
        errors: Vec::new(),
        lines: HashMap::new(),
    };
    let mut section: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']').map(str::trim) {
                Some(name) if SECTIONS.contains(&name) => section = Some(name.to_string()),
                Some(name) => {
                    parser.error(Some(line), format!("unknown section [{name}]"));
                    section = None;
                }
                None => parser.error(Some(line), format!("malformed section header '{content}'")),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            parser.error(Some(line), format!("expected 'key = value', got '{content}'"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        match &section {
            Some(s) => {
                let s = s.clone();
                parser.set(&s, key, value, line);
            }
            None => parser.error(Some(line), format!("key '{key}' outside a known section")),
        }
    }
    parser.validate();
    if parser.errors.is_empty() {
        Ok(parser.config)
    } else {
        Err(ConfigErrors(parser.errors))
    }
}
