//! Settings merged from a TOML config file and command-line flags.
//!
//! Every value remembers where it came from so validation errors can point at
//! the flag, or at the line and column of the config field.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use su11_core::{enumerate_bipartitions, Axis, Bipartition, FamilyTag, Grid, InterferometerParams};
use toml::Spanned;

use crate::args::{Format, StateArgs};
use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
enum Origin {
    Flag(&'static str),
    Config {
        path: PathBuf,
        line: usize,
        column: usize,
        field: String,
    },
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Flag(name) => write!(f, "--{name}"),
            Origin::Config {
                path,
                line,
                column,
                field,
            } => {
                write!(f, "{}:{line}:{column}: field `{field}`", path.display())
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Val<T> {
    value: T,
    origin: Origin,
}

impl<T> Val<T> {
    fn error(&self, reason: impl fmt::Display) -> CliError {
        CliError::Validation(format!("{}: {reason}", self.origin))
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ListOrKeyword<T> {
    Keyword(String),
    List(Vec<T>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    r1_min: Spanned<f64>,
    r1_max: Spanned<f64>,
    r1_steps: Spanned<usize>,
    r2_min: Option<Spanned<f64>>,
    r2_max: Option<Spanned<f64>>,
    r2_steps: Option<Spanned<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: Option<Spanned<String>>,
    modes: Option<Spanned<usize>>,
    r1: Option<Spanned<f64>>,
    r2: Option<Spanned<f64>>,
    theta: Option<Spanned<f64>>,
    phi: Option<Spanned<f64>>,
    format: Option<Spanned<String>>,
    out: Option<Spanned<PathBuf>>,
    verdicts: Option<Spanned<PathBuf>>,
    grid: Option<Spanned<RawGrid>>,
    bipartitions: Option<Spanned<ListOrKeyword<String>>>,
    weights: Option<Spanned<ListOrKeyword<f64>>>,
}

/// Which state to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Family(FamilyTag),
    Balanced,
}

impl Target {
    fn parse(s: &str) -> su11_core::Result<Self> {
        if s.eq_ignore_ascii_case("balanced") {
            Ok(Target::Balanced)
        } else {
            s.parse().map(Target::Family)
        }
    }
}

#[derive(Clone, Debug)]
enum GridSource {
    Text(String),
    Table(Grid),
}

#[derive(Clone, Debug)]
enum Selection {
    Keyword(String),
    Ids(Vec<String>),
}

#[derive(Clone, Debug)]
enum WeightSource {
    Keyword(String),
    Values(Vec<f64>),
}

/// Extra flags that only some commands accept.
#[derive(Clone, Debug, Default)]
pub struct Extras {
    pub grid: Option<String>,
    pub bipartitions: Option<String>,
    pub weights: Option<String>,
    pub verdicts: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct Settings {
    family: Option<Val<String>>,
    modes: Option<Val<usize>>,
    r1: Option<Val<f64>>,
    r2: Option<Val<f64>>,
    theta: Option<Val<f64>>,
    phi: Option<Val<f64>>,
    format: Option<Val<String>>,
    out: Option<PathBuf>,
    verdicts: Option<PathBuf>,
    grid: Option<Val<GridSource>>,
    bipartitions: Option<Val<Selection>>,
    weights: Option<Val<WeightSource>>,
}

fn line_column(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn origin(&self, span: Range<usize>, field: &str) -> Origin {
        let (line, column) = line_column(self.text, span.start);
        Origin::Config {
            path: self.path.to_path_buf(),
            line,
            column,
            field: field.to_string(),
        }
    }

    fn val<T>(&self, s: Spanned<T>, field: &str) -> Val<T> {
        let origin = self.origin(s.span(), field);
        Val {
            value: s.into_inner(),
            origin,
        }
    }
}

fn flag<T>(value: Option<T>, name: &'static str) -> Option<Val<T>> {
    value.map(|value| Val {
        value,
        origin: Origin::Flag(name),
    })
}

impl Settings {
    pub fn load(args: &StateArgs, extras: Extras) -> CliResult<Self> {
        let mut s = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        macro_rules! override_with {
            ($($field:ident = $value:expr, $name:literal;)*) => {
                $(if let Some(v) = flag($value, $name) { s.$field = Some(v); })*
            };
        }
        override_with! {
            family = args.family.clone(), "family";
            modes = args.modes, "modes";
            r1 = args.r1, "r1";
            r2 = args.r2, "r2";
            theta = args.theta, "theta";
            phi = args.phi, "phi";
            format = args.format.map(|f| format!("{f:?}").to_lowercase()), "format";
            grid = extras.grid.map(GridSource::Text), "grid";
            bipartitions = extras.bipartitions.map(Selection::Keyword), "bipartitions";
            weights = extras.weights.map(WeightSource::Keyword), "weights";
        }
        if args.out.is_some() {
            s.out = args.out.clone();
        }
        if extras.verdicts.is_some() {
            s.verdicts = extras.verdicts;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(path, &text)
    }

    pub fn from_toml(path: &Path, text: &str) -> CliResult<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let at = e.span().map(|sp| line_column(text, sp.start));
            match at {
                Some((line, column)) => CliError::Validation(format!(
                    "{}:{line}:{column}: {}",
                    path.display(),
                    e.message().trim()
                )),
                None => CliError::Validation(format!("{}: {}", path.display(), e.message().trim())),
            }
        })?;
        let src = Source { path, text };
        let grid = match raw.grid {
            Some(g) => {
                let origin = src.origin(g.span(), "grid");
                let g = g.into_inner();
                let axis =
                    |min: &Spanned<f64>, max: &Spanned<f64>, steps: &Spanned<usize>, name: &str| {
                        Axis::new(*min.get_ref(), *max.get_ref(), *steps.get_ref()).map_err(|e| {
                            // Point at the step count when it is the culprit, else at the lower bound.
                            let (span, field) = if *steps.get_ref() == 0 {
                                (steps.span(), format!("grid.{name}_steps"))
                            } else {
                                (min.span(), format!("grid.{name}_min"))
                            };
                            CliError::Validation(format!("{}: {e}", src.origin(span, &field)))
                        })
                    };
                let r1 = axis(&g.r1_min, &g.r1_max, &g.r1_steps, "r1")?;
                let r2 = match (&g.r2_min, &g.r2_max, &g.r2_steps) {
                    (None, None, None) => r1,
                    (Some(a), Some(b), Some(n)) => axis(a, b, n, "r2")?,
                    _ => {
                        return Err(CliError::Validation(format!(
                            "{origin}: r2_min, r2_max and r2_steps must be given together"
                        )))
                    }
                };
                Some(Val {
                    value: GridSource::Table(Grid { r1, r2 }),
                    origin,
                })
            }
            None => None,
        };
        Ok(Self {
            family: raw.family.map(|v| src.val(v, "family")),
            modes: raw.modes.map(|v| src.val(v, "modes")),
            r1: raw.r1.map(|v| src.val(v, "r1")),
            r2: raw.r2.map(|v| src.val(v, "r2")),
            theta: raw.theta.map(|v| src.val(v, "theta")),
            phi: raw.phi.map(|v| src.val(v, "phi")),
            format: raw.format.map(|v| src.val(v, "format")),
            out: raw.out.map(Spanned::into_inner),
            verdicts: raw.verdicts.map(Spanned::into_inner),
            grid,
            bipartitions: raw.bipartitions.map(|v| {
                let v = src.val(v, "bipartitions");
                let value = match v.value {
                    ListOrKeyword::Keyword(k) => Selection::Keyword(k),
                    ListOrKeyword::List(ids) => Selection::Ids(ids),
                };
                Val {
                    value,
                    origin: v.origin,
                }
            }),
            weights: raw.weights.map(|v| {
                let v = src.val(v, "weights");
                let value = match v.value {
                    ListOrKeyword::Keyword(k) => WeightSource::Keyword(k),
                    ListOrKeyword::List(w) => WeightSource::Values(w),
                };
                Val {
                    value,
                    origin: v.origin,
                }
            }),
        })
    }

    pub fn target(&self) -> CliResult<Target> {
        let v = self.family.as_ref().ok_or_else(|| missing("family"))?;
        Target::parse(&v.value).map_err(|e| v.error(e))
    }

    /// Mode count, checked against the target.
    pub fn modes(&self) -> CliResult<usize> {
        match (self.target()?, &self.modes) {
            (Target::Balanced, None) => Ok(2),
            (Target::Balanced, Some(v)) if v.value != 2 => {
                Err(v.error("the balanced interferometer has 2 modes"))
            }
            (_, None) => Err(missing("modes")),
            (_, Some(v)) if v.value < 2 => {
                Err(v.error(format!("need at least 2 modes, got {}", v.value)))
            }
            (_, Some(v)) => Ok(v.value),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta.as_ref().map_or(0.0, |v| v.value)
    }

    pub fn phi(&self) -> f64 {
        self.phi.as_ref().map_or(0.0, |v| v.value)
    }

    pub fn params(&self) -> CliResult<InterferometerParams> {
        let r1 = self.r1.as_ref().ok_or_else(|| missing("r1"))?;
        let r2 = self.r2.as_ref().ok_or_else(|| missing("r2"))?;
        for v in [r1, r2] {
            if !(v.value.is_finite() && v.value >= 0.0) {
                return Err(v.error(format!("gain must be finite and >= 0, got {}", v.value)));
            }
        }
        for v in [&self.theta, &self.phi].into_iter().flatten() {
            if !v.value.is_finite() {
                return Err(v.error("angle must be finite"));
            }
        }
        Ok(InterferometerParams::new(
            r1.value,
            r2.value,
            self.theta(),
            self.phi(),
        )?)
    }

    pub fn format(&self, default: Format) -> CliResult<Format> {
        match &self.format {
            None => Ok(default),
            Some(v) => match v.value.to_ascii_lowercase().as_str() {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                other => Err(v.error(format!("unknown format `{other}` (expected csv or json)"))),
            },
        }
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    pub fn verdicts(&self) -> Option<&Path> {
        self.verdicts.as_deref()
    }

    pub fn grid(&self) -> CliResult<Grid> {
        match &self.grid {
            None => Ok(Grid::default_ppt()),
            Some(v) => match &v.value {
                GridSource::Table(g) => Ok(*g),
                GridSource::Text(t) => t.parse().map_err(|e| v.error(e)),
            },
        }
    }

    pub fn bipartitions(&self, modes: usize) -> CliResult<Vec<Bipartition>> {
        let Some(v) = &self.bipartitions else {
            return Ok(enumerate_bipartitions(modes, false)?);
        };
        let ids: Vec<String> = match &v.value {
            Selection::Keyword(k) => match k.trim() {
                "all" => return enumerate_bipartitions(modes, false).map_err(|e| v.error(e)),
                "cover-all" => return enumerate_bipartitions(modes, true).map_err(|e| v.error(e)),
                list => list.split(';').map(str::to_string).collect(),
            },
            Selection::Ids(ids) => ids.clone(),
        };
        let mut out = Vec::with_capacity(ids.len());
        for id in ids.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
            let bip = Bipartition::parse(modes, id).map_err(|e| v.error(format!("`{id}`: {e}")))?;
            if out.contains(&bip) {
                return Err(v.error(format!("`{id}` listed twice")));
            }
            out.push(bip);
        }
        if out.is_empty() {
            return Err(v.error("no bipartitions given"));
        }
        Ok(out)
    }

    pub fn weights(&self, modes: usize) -> CliResult<Option<Vec<f64>>> {
        let Some(v) = &self.weights else {
            return Ok(None);
        };
        let w = match &v.value {
            WeightSource::Values(w) => w.clone(),
            WeightSource::Keyword(k) if k.trim() == "alternating" => (0..modes)
                .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
            WeightSource::Keyword(k) => k
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| v.error(format!("`{}` is not a number", x.trim())))
                })
                .collect::<CliResult<_>>()?,
        };
        if w.len() != modes {
            return Err(v.error(format!("expected {modes} weights, got {}", w.len())));
        }
        if let Some(bad) = w.iter().find(|x| !x.is_finite()) {
            return Err(v.error(format!("weight {bad} is not finite")));
        }
        Ok(Some(w))
    }
}

fn missing(name: &str) -> CliError {
    CliError::Validation(format!(
        "missing required setting `{name}` (use --{name} or the config file)"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<Settings> {
        Settings::from_toml(Path::new("scan.toml"), text)
    }

    #[test]
    fn reads_a_full_config() {
        let s = parse(
            "family = \"su11-sub\"\nmodes = 6\ntheta = 0.5\nbipartitions = [\"A={1}|B={2}\", \"1,3|2,4\"]\n\
             [grid]\nr1_min = 0.1\nr1_max = 1.0\nr1_steps = 4\n",
        )
        .unwrap();
        assert_eq!(s.target().unwrap(), Target::Family(FamilyTag::Su11Sub));
        assert_eq!(s.modes().unwrap(), 6);
        assert_eq!(s.grid().unwrap().r2.steps, 4);
        assert_eq!(s.bipartitions(6).unwrap().len(), 2);
        assert_eq!(s.theta(), 0.5);
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse("family = \"bs\"\nmodes = = 4\n").unwrap_err();
        assert!(err.to_string().contains("scan.toml:2:"), "{err}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let err = parse("[grid]\nr1_min = 0.1\nr1_max = 2.0\nr1_steps = 0\n").unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("scan.toml:4:12") && msg.contains("grid.r1_steps"),
            "{msg}"
        );

        let s = parse("family = \"su11\"\nmodes = 1\n").unwrap();
        let msg = s.modes().unwrap_err().to_string();
        assert!(
            msg.contains("scan.toml:2:9") && msg.contains("`modes`"),
            "{msg}"
        );
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let msg = parse("famliy = \"bs\"\n").unwrap_err().to_string();
        assert!(
            msg.contains("scan.toml:1:1") && msg.contains("famliy"),
            "{msg}"
        );
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "family = \"bs\"\nmodes = 4\nr1 = 0.2\nr2 = 0.3\n").unwrap();
        let args = StateArgs {
            config: Some(path),
            modes: Some(6),
            ..Default::default()
        };
        let s = Settings::load(&args, Extras::default()).unwrap();
        assert_eq!(s.modes().unwrap(), 6);
        assert_eq!(s.params().unwrap().r2, 0.3);
    }

    #[test]
    fn weight_keywords() {
        let args = StateArgs::default();
        let s = Settings::load(
            &args,
            Extras {
                weights: Some("alternating".into()),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(s.weights(3).unwrap().unwrap(), vec![1.0, -1.0, 1.0]);
        let s = Settings::load(
            &args,
            Extras {
                weights: Some("1,2".into()),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(s.weights(3).is_err());
    }
}
