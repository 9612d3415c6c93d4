use std::path::{Path, PathBuf};

use serde::Serialize;
use su11_core::{
    build_balanced_su11, build_family, photon_covariance, photon_lc_variance, scan_lmu,
    GaussianState, InterferometerParams, LmuScan, ScanSpec, Verdict,
};

use crate::args::{Format, PhotonArgs, ScanArgs, StateArgs};
use crate::config::{Extras, Settings, Target};
use crate::error::{CliError, CliResult};
use crate::io::{Output, StateJson};

pub fn build_state(
    target: Target,
    modes: usize,
    p: &InterferometerParams,
) -> CliResult<GaussianState> {
    Ok(match target {
        Target::Family(tag) => build_family(tag, modes, p)?,
        Target::Balanced => build_balanced_su11(p)?,
    })
}

fn state_from(settings: &Settings) -> CliResult<GaussianState> {
    build_state(settings.target()?, settings.modes()?, &settings.params()?)
}

pub fn build(args: &StateArgs) -> CliResult<()> {
    let settings = Settings::load(args, Extras::default())?;
    if settings.format(Format::Json)? != Format::Json {
        return Err(CliError::Validation("build only writes JSON".into()));
    }
    let state = state_from(&settings)?;
    Output::open(settings.out())?.json(&StateJson::from_state(&state))
}

#[derive(Serialize)]
struct PhotonJson {
    m: usize,
    mean: Vec<f64>,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lc_variance: Option<f64>,
}

pub fn photon_stats(args: &PhotonArgs) -> CliResult<()> {
    let settings = Settings::load(
        &args.state,
        Extras {
            weights: args.weights.clone(),
            ..Default::default()
        },
    )?;
    let format = settings.format(Format::Json)?;
    let state = state_from(&settings)?;
    let m = state.mode_count();
    let lc_variance = match settings.weights(m)? {
        Some(w) => Some(photon_lc_variance(&state, &w)?),
        None => None,
    };
    let pc = photon_covariance(&state);
    match format {
        Format::Json => {
            let k =
                pc.k.row_iter()
                    .map(|r| r.iter().copied().collect())
                    .collect();
            Output::open(settings.out())?.json(&PhotonJson {
                m,
                mean: pc.mean,
                k,
                lc_variance,
            })
        }
        Format::Csv => {
            let mut out = Output::open(settings.out())?.csv();
            out.row(["i", "j", "K_ij"])?;
            for i in 0..m {
                for j in 0..m {
                    out.row([
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        pc.k[(i, j)].to_string(),
                    ])?;
                }
            }
            out.finish()?;
            if let Some(v) = lc_variance {
                eprintln!("lc_variance = {v}");
            }
            Ok(())
        }
    }
}

fn modes_field(modes: &[usize]) -> String {
    modes
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// `scan.csv` → `scan.verdicts.csv`.
fn sibling_verdicts(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.verdicts.csv"))
}

#[derive(Serialize)]
struct RowJson {
    r1: f64,
    r2: f64,
    bipartition_id: String,
    #[serde(rename = "L_mu")]
    l_mu: f64,
}

#[derive(Serialize)]
struct VerdictJson {
    bipartition_id: String,
    #[serde(rename = "A")]
    a: Vec<usize>,
    #[serde(rename = "B")]
    b: Vec<usize>,
    verdict: &'static str,
    negative_points: usize,
    min_l_mu: f64,
}

#[derive(Serialize)]
struct ScanJson {
    rows: Vec<RowJson>,
    verdicts: Vec<VerdictJson>,
}

fn write_verdicts(path: &Path, scan: &LmuScan) -> CliResult<()> {
    let mut out = Output::open(Some(path))?.csv();
    out.row(["bipartition_id", "A", "B", "verdict"])?;
    for v in scan.verdicts() {
        let b = &v.bipartition;
        out.row([
            b.id(),
            modes_field(b.set_a()),
            modes_field(b.set_b()),
            v.verdict.as_str().to_string(),
        ])?;
    }
    out.finish()
}

pub fn ppt_scan(args: &ScanArgs) -> CliResult<()> {
    let extras = Extras {
        grid: args.grid.clone(),
        bipartitions: args.bipartitions.clone(),
        verdicts: args.verdicts.clone(),
        ..Default::default()
    };
    let settings = Settings::load(&args.state, extras)?;
    let format = settings.format(Format::Csv)?;
    let target = settings.target()?;
    let modes = settings.modes()?;
    let spec = match target {
        Target::Family(tag) => ScanSpec::family(tag, modes, settings.theta(), settings.phi()),
        Target::Balanced => ScanSpec::balanced(settings.theta()),
    };
    let grid = settings.grid()?;
    let bips = settings.bipartitions(modes)?;
    let scan = scan_lmu(&spec, &bips, &grid)?;

    match format {
        Format::Csv => {
            let mut out = Output::open(settings.out())?.csv();
            out.row(["r1", "r2", "bipartition_id", "L_mu"])?;
            for (r1, r2, bip, l) in scan.rows() {
                out.row([r1.to_string(), r2.to_string(), bip.id(), l.to_string()])?;
            }
            out.finish()?;
        }
        Format::Json => {
            let rows = scan
                .rows()
                .map(|(r1, r2, bip, l)| RowJson {
                    r1,
                    r2,
                    bipartition_id: bip.id(),
                    l_mu: l,
                })
                .collect();
            let verdicts = scan
                .verdicts()
                .into_iter()
                .map(|v| VerdictJson {
                    bipartition_id: v.bipartition.id(),
                    a: v.bipartition.set_a().to_vec(),
                    b: v.bipartition.set_b().to_vec(),
                    verdict: v.verdict.as_str(),
                    negative_points: v.negative_count(),
                    min_l_mu: v.min_l_mu(),
                })
                .collect();
            Output::open(settings.out())?.json(&ScanJson { rows, verdicts })?;
        }
    }

    let verdict_path = match (settings.verdicts(), settings.out(), format) {
        (Some(p), _, _) => Some(p.to_path_buf()),
        (None, Some(out), Format::Csv) => Some(sibling_verdicts(out)),
        _ => None,
    };
    if let Some(path) = &verdict_path {
        write_verdicts(path, &scan)?;
    }
    let verdicts = scan.verdicts();
    let count = |x: Verdict| verdicts.iter().filter(|v| v.verdict == x).count();
    eprintln!(
        "{} points x {} bipartitions: always {}, partial {}, none {}",
        scan.r1.len() * scan.r2.len(),
        bips.len(),
        count(Verdict::Always),
        count(Verdict::Partial),
        count(Verdict::Never)
    );
    if let Some(path) = verdict_path {
        eprintln!("verdicts written to {}", path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_file_sits_next_to_output() {
        assert_eq!(
            sibling_verdicts(Path::new("out/scan.csv")),
            PathBuf::from("out/scan.verdicts.csv")
        );
        assert_eq!(
            sibling_verdicts(Path::new("scan")),
            PathBuf::from("scan.verdicts.csv")
        );
    }
}
