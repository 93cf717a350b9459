//! Run configuration: built-in defaults, overlaid by a JSON file, overlaid by
//! command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kruskal_cmc::foliation::{default_amplitude, default_c_grid};
use kruskal_cmc::{FoliationCurve, SliceOptions, Tolerances};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

/// Safety factor applied to the sufficient amplitude when `C` is `"auto"`.
pub const AUTO_AMPLITUDE_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "M")]
    pub m: f64,
    pub curve: CurveConfig,
    pub grids: GridConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            m: 1.0,
            curve: CurveConfig::default(),
            grids: GridConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    pub p: f64,
    /// Absent means `12 M^3`.
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Amplitude>,
    #[serde(rename = "A")]
    pub a: f64,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            amplitude: None,
            a: 0.0,
        }
    }
}

/// The curve amplitude `C`, or `"auto"` for the smallest certified value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Auto,
    Value(f64),
}

impl FromStr for Amplitude {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "auto" {
            return Ok(Amplitude::Auto);
        }
        s.parse()
            .map(Amplitude::Value)
            .map_err(|_| format!("expected a number or \"auto\", got '{s}'"))
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amplitude::Auto => f.write_str("auto"),
            Amplitude::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Serialize for Amplitude {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Amplitude::Auto => s.serialize_str("auto"),
            Amplitude::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Amplitude {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Amplitude::Value(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// Absent means `3 M`.
    #[serde(rename = "X_max", skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    /// Absent means the library default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_side: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format '{s}' (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// Flag values that override the file. `None` leaves the field alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub m: Option<f64>,
    pub p: Option<f64>,
    pub amplitude: Option<Amplitude>,
    pub a: Option<f64>,
    pub c_list: Option<Vec<f64>>,
    pub c_min: Option<f64>,
    pub c_max: Option<f64>,
    pub count: Option<usize>,
    pub x_max: Option<f64>,
    pub samples_per_side: Option<usize>,
    pub tol_root: Option<f64>,
    pub tol_quad: Option<f64>,
    pub tol_ode: Option<f64>,
    pub tol_coord: Option<f64>,
    pub tol_resid: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    /// Defaults, then `file`, then `flags`; validated.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let mut cfg = match file {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        fn set_opt<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if src.is_some() {
                *dst = src.clone();
            }
        }
        set(&mut self.m, &o.m);
        set(&mut self.curve.p, &o.p);
        set_opt(&mut self.curve.amplitude, &o.amplitude);
        set(&mut self.curve.a, &o.a);
        if o.c_list.is_some() {
            self.grids.c_list = o.c_list.clone();
        }
        if o.c_min.is_some() || o.c_max.is_some() || o.count.is_some() {
            // A range on the command line replaces a list from the file.
            if o.c_list.is_none() {
                self.grids.c_list = None;
            }
            set_opt(&mut self.grids.c_min, &o.c_min);
            set_opt(&mut self.grids.c_max, &o.c_max);
            set_opt(&mut self.grids.count, &o.count);
        }
        set_opt(&mut self.grids.x_max, &o.x_max);
        set_opt(&mut self.grids.samples_per_side, &o.samples_per_side);
        set(&mut self.tolerances.tol_root, &o.tol_root);
        set(&mut self.tolerances.tol_quad, &o.tol_quad);
        set(&mut self.tolerances.tol_ode, &o.tol_ode);
        set(&mut self.tolerances.tol_coord, &o.tol_coord);
        set(&mut self.tolerances.tol_resid, &o.tol_resid);
        set(&mut self.output.format, &o.format);
        set_opt(&mut self.output.path, &o.out);
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(invalid(format!("M must be positive, got {}", self.m)));
        }
        if let Some(Amplitude::Value(c)) = self.curve.amplitude {
            if !c.is_finite() {
                return Err(invalid(format!("curve C must be finite, got {c}")));
            }
        }
        let g = &self.grids;
        if let Some(list) = &g.c_list {
            if list.is_empty() {
                return Err(invalid("c_list is empty"));
            }
            if let Some(bad) = list.iter().find(|c| !c.is_finite()) {
                return Err(invalid(format!("c_list contains {bad}")));
            }
        } else {
            match (g.c_min, g.c_max, g.count) {
                (None, None, None) => {}
                (Some(lo), Some(hi), Some(n)) => {
                    if n == 0 {
                        return Err(invalid("count must be at least 1"));
                    }
                    if !(lo.is_finite() && hi.is_finite()) || (n > 1 && !(lo < hi)) || (n == 1 && lo != hi) {
                        return Err(invalid(format!(
                            "c range [{lo}, {hi}] with count {n} is not a valid grid"
                        )));
                    }
                }
                _ => return Err(invalid("c_min, c_max and count must be given together")),
            }
        }
        self.slice_options()?.validate()?;
        Ok(())
    }

    /// Ascending, de-duplicated leaf parameters.
    pub fn c_grid(&self) -> Vec<f64> {
        let g = &self.grids;
        let mut grid = match (&g.c_list, g.c_min, g.c_max, g.count) {
            (Some(list), ..) => list.clone(),
            (None, Some(lo), Some(hi), Some(n)) if n > 1 => {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
            (None, Some(lo), _, Some(1)) => vec![lo],
            _ => default_c_grid(self.m),
        };
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    pub fn slice_options(&self) -> Result<SliceOptions> {
        let mut opts = SliceOptions {
            x_max: self.grids.x_max.unwrap_or(3.0 * self.m),
            tol: self.tolerances,
            ..SliceOptions::default()
        };
        if let Some(n) = self.grids.samples_per_side {
            opts.samples_per_side = n;
        }
        // The integrator tolerances scale with tol_ode from the library defaults.
        let scale = self.tolerances.tol_ode / Tolerances::default().tol_ode;
        opts.ode_rtol *= scale;
        opts.ode_atol *= scale;
        opts.validate()?;
        Ok(opts)
    }

    pub fn curve(&self) -> Result<FoliationCurve> {
        let m = self.m;
        let c = match self.curve.amplitude {
            None => 12.0 * m * m * m,
            Some(Amplitude::Value(c)) => c,
            Some(Amplitude::Auto) => default_amplitude(self.curve.p, m, AUTO_AMPLITUDE_MARGIN)?,
        };
        Ok(FoliationCurve::new(m, self.curve.p, c, self.curve.a)?)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}
