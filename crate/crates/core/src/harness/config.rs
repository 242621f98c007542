use std::fmt::Write as _;
use std::str::FromStr;

use crate::array::SystemDims;
use crate::controller::Scheme;
use crate::error::{Error, Result};

/// Parameters of a full sweep.
///
/// Text form is one `key = value` per line, lists comma-separated, `#`
/// starting a comment. `dims` is `n_bs,n_ue,r_bs,r_ue[,n_users]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: SystemDims,
    pub snr_db_list: Vec<f64>,
    pub t_c_list: Vec<usize>,
    pub n_trials: usize,
    pub schemes: Vec<Scheme>,
    pub l_paths: usize,
    pub gamma: f64,
    pub t_u: usize,
    pub t_max: usize,
    pub master_seed: u64,
    /// Variance of each path gain.
    pub sigma_r: f64,
    /// Snap path angles to codebook beam angles.
    pub on_grid: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dims = SystemDims::default();
        Self {
            dims,
            snr_db_list: (-4..=4).map(|k| 5.0 * k as f64).collect(),
            t_c_list: vec![200, 400],
            n_trials: 1000,
            schemes: vec![
                Scheme::Swift,
                Scheme::Fnrb(32),
                Scheme::Fnrb(64),
                Scheme::Fnrb(96),
                Scheme::Fnrb(128),
                Scheme::Exhaustive,
            ],
            l_paths: 1,
            gamma: 0.1,
            t_u: dims.ue_groups(),
            t_max: dims.exhaustive_slots(),
            master_seed: 2017,
            sigma_r: 1.0,
            on_grid: false,
        }
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{s}'"))))
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

/// Splits a scheme list on commas that are not inside parentheses.
pub(crate) fn parse_schemes(value: &str) -> Result<Vec<Scheme>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in value.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&value[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&value[start..]);
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).map(Scheme::from_str).collect()
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut t_u_set = false;
        let mut t_max_set = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            match key {
                "t_u" => t_u_set = true,
                "t_max" => t_max_set = true,
                _ => {}
            }
            cfg.set(key, value)?;
        }
        // Schedule defaults follow the array sizes unless given explicitly.
        if !t_u_set {
            cfg.t_u = cfg.dims.ue_groups();
        }
        if !t_max_set {
            cfg.t_max = cfg.dims.exhaustive_slots();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dims" => {
                let v: Vec<usize> = parse_list(key, value)?;
                let dims = match v.as_slice() {
                    [a, b, c, d] => SystemDims { n_bs: *a, n_ue: *b, r_bs: *c, r_ue: *d, n_users: 1 },
                    [a, b, c, d, u] => SystemDims { n_bs: *a, n_ue: *b, r_bs: *c, r_ue: *d, n_users: *u },
                    _ => return Err(Error::Config("dims needs 4 or 5 integers".into())),
                };
                dims.validate()?;
                self.dims = dims;
            }
            "snr_db_list" => self.snr_db_list = parse_list(key, value)?,
            "t_c_list" => self.t_c_list = parse_list(key, value)?,
            "n_trials" => self.n_trials = parse_one(key, value)?,
            "schemes" => self.schemes = parse_schemes(value)?,
            "l_paths" => self.l_paths = parse_one(key, value)?,
            "gamma" => self.gamma = parse_one(key, value)?,
            "t_u" => self.t_u = parse_one(key, value)?,
            "t_max" => self.t_max = parse_one(key, value)?,
            "master_seed" => self.master_seed = parse_one(key, value)?,
            "sigma_r" => self.sigma_r = parse_one(key, value)?,
            "on_grid" => self.on_grid = parse_one(key, value)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if self.n_trials == 0 {
            return Err(Error::Config("n_trials must be positive".into()));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::Config("snr_db_list is empty".into()));
        }
        if self.t_c_list.is_empty() || self.t_c_list.contains(&0) {
            return Err(Error::Config("t_c_list needs positive coherence times".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes selected".into()));
        }
        if self.l_paths == 0 || self.l_paths > self.dims.virtual_len() {
            return Err(Error::Config(format!("l_paths = {} out of range", self.l_paths)));
        }
        if !(self.sigma_r > 0.0) {
            return Err(Error::Config("sigma_r must be positive".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!("gamma {} outside (0, 1)", self.gamma)));
        }
        if self.t_u == 0 || self.t_max < self.t_u {
            return Err(Error::Config("need 1 <= t_u <= t_max".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let d = &self.dims;
        let join = |v: Vec<String>| v.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "dims = {},{},{},{},{}", d.n_bs, d.n_ue, d.r_bs, d.r_ue, d.n_users);
        let _ = writeln!(s, "snr_db_list = {}", join(self.snr_db_list.iter().map(|x| x.to_string()).collect()));
        let _ = writeln!(s, "t_c_list = {}", join(self.t_c_list.iter().map(|x| x.to_string()).collect()));
        let _ = writeln!(s, "n_trials = {}", self.n_trials);
        let _ = writeln!(s, "schemes = {}", join(self.schemes.iter().map(|x| x.to_string()).collect()));
        let _ = writeln!(s, "l_paths = {}", self.l_paths);
        let _ = writeln!(s, "gamma = {}", self.gamma);
        let _ = writeln!(s, "t_u = {}", self.t_u);
        let _ = writeln!(s, "t_max = {}", self.t_max);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "sigma_r = {}", self.sigma_r);
        let _ = writeln!(s, "on_grid = {}", self.on_grid);
        s
    }
}
