//! Line-oriented `key = value` run configuration.
//!
//! ```text
//! # comment
//! command = solve
//! seed = 7
//!
//! [domain]
//! m = 1
//! x = -1, 1
//! ```
//!
//! Keys before the first section header belong to the top level. Every key
//! has a default; unknown keys and sections are rejected with their line
//! number.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::catalog::DataSpec;

/// Largest resolution per axis accepted for `m = 1` and `m = 2`.
pub const MAX_N_M1: usize = 257;
pub const MAX_N_M2: usize = 33;
pub const MAX_NT: usize = 513;
pub const MAX_NODES: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Study,
    Classify,
    Kernel,
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "solve" => Command::Solve,
            "verify" => Command::Verify,
            "study" => Command::Study,
            "classify" => Command::Classify,
            "kernel" => Command::Kernel,
            _ => return Err(format!("unknown command '{s}' (solve, verify, study, classify, kernel)")),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Study => "study",
            Command::Classify => "classify",
            Command::Kernel => "kernel",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Viscous,
    Variational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    /// `hY^2` of the grid in use.
    Mesh,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Comparison,
    Energy,
    Integrability,
    Boundedness,
    Harnack,
    Holder,
    WNorm,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "comparison" => Suite::Comparison,
            "energy" => Suite::Energy,
            "integrability" => Suite::Integrability,
            "boundedness" => Suite::Boundedness,
            "harnack" => Suite::Harnack,
            "holder" => Suite::Holder,
            "wnorm" => Suite::WNorm,
            _ => return Err(format!("unknown suite '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    /// `identity`, `diagonal`, `checkerboard` or `modulated`.
    pub name: String,
    pub lambda: Option<f64>,
    pub diag: Vec<f64>,
    pub cell: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// May be left out of the file and given on the command line instead.
    pub command: Option<Command>,
    pub seed: u64,
    pub m: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub t: (f64, f64),
    /// One entry per grid of the refinement ladder.
    pub nx: Vec<usize>,
    pub ny: Vec<usize>,
    pub nt: Vec<usize>,
    pub symbol: SymbolSpec,
    pub g: DataSpec,
    pub gstar: DataSpec,
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub epsilon: Epsilon,
    /// Viscous continuation ladder; empty means a single solve at `epsilon`.
    pub eps_ladder: Vec<f64>,
    pub suites: Vec<Suite>,
    pub cases: usize,
    pub zeta: Vec<f64>,
    pub out: PathBuf,
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 0,
            m: 1,
            x: (-1.0, 1.0),
            y: (-1.0, 1.0),
            t: (0.0, 1.0),
            nx: vec![17],
            ny: vec![17],
            nt: vec![9],
            symbol: SymbolSpec { name: "identity".into(), lambda: None, diag: vec![1.0, 2.0], cell: 0.5, delta: 0.25 },
            g: DataSpec::Constant(0.0),
            gstar: DataSpec::Constant(0.0),
            method: Method::Viscous,
            tol: 1e-10,
            max_iter: 200,
            epsilon: Epsilon::Mesh,
            eps_ladder: Vec::new(),
            suites: vec![Suite::Comparison],
            cases: 20,
            zeta: vec![0.25, 0.5, 1.0],
            out: PathBuf::from("out"),
            plots: true,
        }
    }
}

impl RunConfig {
    pub fn levels(&self) -> usize {
        self.nx.len()
    }

    /// `(nx, ny, nt)` of grid `k` of the ladder.
    pub fn resolution(&self, k: usize) -> (usize, usize, usize) {
        (self.nx[k], self.ny[k], self.nt[k])
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse::<T>().map_err(|_| format!("cannot parse '{}'", v.trim()))
}

fn parse_list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    let items: Vec<&str> = v.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("empty entry in list '{v}'"));
    }
    items.into_iter().map(parse_num).collect()
}

fn parse_interval(v: &str) -> Result<(f64, f64), String> {
    let l: Vec<f64> = parse_list(v)?;
    match l[..] {
        [a, b] if a < b => Ok((a, b)),
        [_, _] => Err(format!("interval '{v}' must satisfy lo < hi")),
        _ => Err(format!("interval '{v}' needs two numbers")),
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

const SECTIONS: [&str; 8] = ["", "domain", "grid", "symbol", "data", "solver", "verify", "output"];

fn apply(cfg: &mut RunConfig, section: &str, key: &str, v: &str) -> Result<(), String> {
    match (section, key) {
        ("", "command") => cfg.command = Some(v.parse()?),
        ("", "seed") => cfg.seed = parse_num(v)?,
        ("domain", "m") => cfg.m = parse_num(v)?,
        ("domain", "x") => cfg.x = parse_interval(v)?,
        ("domain", "y") => cfg.y = parse_interval(v)?,
        ("domain", "t") => cfg.t = parse_interval(v)?,
        ("grid", "nx") => cfg.nx = parse_list(v)?,
        ("grid", "ny") => cfg.ny = parse_list(v)?,
        ("grid", "nt") => cfg.nt = parse_list(v)?,
        ("symbol", "name") => {
            if !["identity", "diagonal", "checkerboard", "modulated"].contains(&v) {
                return Err(format!("unknown symbol '{v}' (identity, diagonal, checkerboard, modulated)"));
            }
            cfg.symbol.name = v.to_string();
        }
        ("symbol", "lambda") => cfg.symbol.lambda = Some(parse_num(v)?),
        ("symbol", "diag") => cfg.symbol.diag = parse_list(v)?,
        ("symbol", "cell") => cfg.symbol.cell = parse_num(v)?,
        ("symbol", "delta") => cfg.symbol.delta = parse_num(v)?,
        ("data", "g") => cfg.g = v.parse()?,
        ("data", "gstar") => cfg.gstar = v.parse()?,
        ("solver", "method") => {
            cfg.method = match v {
                "viscous" => Method::Viscous,
                "variational" => Method::Variational,
                _ => return Err(format!("unknown method '{v}' (viscous, variational)")),
            }
        }
        ("solver", "tol") => cfg.tol = parse_num(v)?,
        ("solver", "max_iter") => cfg.max_iter = parse_num(v)?,
        ("solver", "epsilon") => cfg.epsilon = if v == "mesh" { Epsilon::Mesh } else { Epsilon::Value(parse_num(v)?) },
        ("solver", "eps_ladder") => cfg.eps_ladder = parse_list(v)?,
        ("verify", "suite") => {
            let mut s: Vec<Suite> = if v == "all" {
                vec![
                    Suite::Comparison,
                    Suite::Energy,
                    Suite::Integrability,
                    Suite::Boundedness,
                    Suite::Harnack,
                    Suite::Holder,
                    Suite::WNorm,
                ]
            } else {
                v.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?
            };
            s.sort();
            s.dedup();
            cfg.suites = s;
        }
        ("verify", "cases") => cfg.cases = parse_num(v)?,
        ("verify", "zeta") => cfg.zeta = parse_list(v)?,
        ("output", "dir") => cfg.out = PathBuf::from(v),
        ("output", "plots") => cfg.plots = parse_bool(v)?,
        _ => {
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            return Err(format!("unknown key '{full}'"));
        }
    }
    Ok(())
}

fn validate(cfg: &mut RunConfig) -> Result<(), ConfigError> {
    let err = |m: String| Err(ConfigError::global(m));
    if !(1..=2).contains(&cfg.m) {
        return err(format!("m must be 1 or 2, got {}", cfg.m));
    }
    let n = cfg.nx.len();
    if n == 0 {
        return err("grid.nx is empty".into());
    }
    // a single ny or nt applies to every grid of the ladder
    for (name, list) in [("ny", &mut cfg.ny), ("nt", &mut cfg.nt)] {
        if list.len() == 1 && n > 1 {
            *list = vec![list[0]; n];
        }
        if list.len() != n {
            return err(format!("grid.{name} has {} entries, grid.nx has {n}", list.len()));
        }
    }
    let cap = if cfg.m == 1 { MAX_N_M1 } else { MAX_N_M2 };
    for k in 0..n {
        let (nx, ny, nt) = cfg.resolution(k);
        if nx < 3 || ny < 3 || nt < 2 {
            return err(format!("grid {k} ({nx}, {ny}, {nt}) is below the minimum (3, 3, 2)"));
        }
        if nx > cap || ny > cap || nt > MAX_NT {
            return err(format!("grid {k} ({nx}, {ny}, {nt}) exceeds the caps ({cap}, {cap}, {MAX_NT})"));
        }
        let nodes = (nx * ny).pow(cfg.m as u32) * nt;
        if nodes > MAX_NODES {
            return err(format!("grid {k} has {nodes} nodes, more than {MAX_NODES}"));
        }
    }
    if cfg.command.is_some_and(|c| c != Command::Study && c != Command::Kernel) && n > 1 {
        return err(format!("a refinement ladder is only used by study and kernel, got {n} grids"));
    }
    if cfg.symbol.name == "diagonal" && cfg.symbol.diag.len() != cfg.m {
        return err(format!("symbol.diag needs {} entries, got {}", cfg.m, cfg.symbol.diag.len()));
    }
    if let Epsilon::Value(e) = cfg.epsilon {
        if !(e > 0.0) {
            return err(format!("solver.epsilon must be positive, got {e}"));
        }
    }
    if cfg.eps_ladder.iter().any(|e| !(*e > 0.0)) {
        return err("solver.eps_ladder entries must be positive".into());
    }
    if !(cfg.tol > 0.0) {
        return err(format!("solver.tol must be positive, got {}", cfg.tol));
    }
    if cfg.zeta.iter().any(|z| !(*z > 0.0)) {
        return err("verify.zeta entries must be positive".into());
    }
    for d in [&cfg.g, &cfg.gstar] {
        d.check_dim(cfg.m).map_err(ConfigError::global)?;
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section = String::new();
    let mut seen: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, format!("malformed section header '{line}'")))?
                .trim();
            if name.is_empty() || !SECTIONS.contains(&name) {
                return Err(ConfigError::at(line_no, format!("unknown section '[{name}]'")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line_no, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::at(line_no, "missing key"));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line_no, format!("missing value for '{key}'")));
        }
        let id = (section.clone(), key.to_string());
        if seen.contains(&id) {
            return Err(ConfigError::at(line_no, format!("duplicate key '{key}'")));
        }
        seen.push(id);
        apply(&mut cfg, &section, key, value).map_err(|m| ConfigError::at(line_no, m))?;
    }
    validate(&mut cfg)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("command = solve\n").unwrap();
        assert_eq!(c, RunConfig { command: Some(Command::Solve), ..RunConfig::default() });
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn typo_names_the_line() {
        let e = parse_config("command = solve\n[symbol]\nsybol = identity\n").unwrap_err();
        assert_eq!(e.line, Some(3));
        assert!(e.message.contains("symbol.sybol"), "{e}");
    }

    #[test]
    fn ladder_expands() {
        let c = parse_config("command = study\n[grid]\nnx = 17, 33, 65\nny = 17,33,65\nnt = 9, 17, 33\n").unwrap();
        assert_eq!(c.levels(), 3);
        assert_eq!(c.resolution(2), (65, 65, 33));
        let c = parse_config("command = study\n[grid]\nnx = 9, 17\nnt = 5\n").unwrap();
        assert_eq!(c.ny, vec![17, 17]);
        assert_eq!(c.nt, vec![5, 5]);
    }

    #[test]
    fn sections_comments_and_values() {
        let text = "\
# run
command = verify   # trailing
seed = 42
[domain]
m = 2
x = -0.5, 0.5
[grid]
nx = 9
ny = 9
nt = 5
[symbol]
name = diagonal
diag = 1, 2
[data]
g = sines:1,1,1,1
gstar = constant:0.5
[solver]
epsilon = 1e-3
eps_ladder = 1e-2, 1e-3
[verify]
suite = harnack, energy
[output]
dir = results
plots = false
";
        let c = parse_config(text).unwrap();
        assert_eq!(c.command, Some(Command::Verify));
        assert_eq!(c.seed, 42);
        assert_eq!(c.m, 2);
        assert_eq!(c.x, (-0.5, 0.5));
        assert_eq!(c.symbol.diag, vec![1.0, 2.0]);
        assert_eq!(c.gstar, DataSpec::Constant(0.5));
        assert_eq!(c.epsilon, Epsilon::Value(1e-3));
        assert_eq!(c.suites, vec![Suite::Energy, Suite::Harnack]);
        assert_eq!(c.out, PathBuf::from("results"));
        assert!(!c.plots);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("command = solve\n[nowhere]\n", 2),
            ("command = solve\njust text\n", 2),
            ("command = fly\n", 1),
            ("command = solve\n[data]\ng = teapot\n", 3),
            ("command = solve\n[grid]\nnx = 9,,17\n", 3),
            ("command = solve\n[domain]\nx = 1, -1\n", 3),
            ("seed = 1\nseed = 2\n", 2),
            ("command = solve\n[solver]\nmethod = magic\n", 3),
        ];
        for (text, line) in cases {
            let e = parse_config(text).unwrap_err();
            assert_eq!(e.line, Some(line), "{text:?}: {e}");
        }
    }

    #[test]
    fn caps_and_consistency() {
        assert!(parse_config("command = solve\n[grid]\nnx = 1025\n").is_err());
        assert!(parse_config("command = solve\n[domain]\nm = 2\n[grid]\nnx = 65\n").is_err());
        assert!(parse_config("command = solve\n[grid]\nnx = 9, 17\n").is_err());
        assert!(parse_config("command = solve\n[symbol]\nname = diagonal\ndiag = 1\n").is_ok());
        assert!(parse_config("command = solve\n[symbol]\nname = diagonal\ndiag = 1, 2\n").is_err());
    }
}
