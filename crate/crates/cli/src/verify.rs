//! Self-check suites: closed forms against operator construction, subsystem
//! identities, photon-number identities, and the Fock-space simulator.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use su11_core::{
    analytic_state, build_family, build_rho, build_rho_bs, build_rho_s, closed_form_photon_stats,
    fock_family, photon_covariance, photon_lc_variance, Complex64, FamilyTag, GaussianState,
    InterferometerParams, PhotonCovariance,
};

use crate::args::VerifyArgs;
use crate::error::{CliError, CliResult};
use crate::io::Output;

pub const FOCK_CUTOFF: usize = 12;

#[derive(Debug, Serialize)]
pub struct FockDeficit {
    pub family: String,
    pub modes: usize,
    pub max_deficit: f64,
}

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub checks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fock_deficits: Vec<FockDeficit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub seed: u64,
    pub draws: usize,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    pub fn failing(&self) -> Vec<&'static str> {
        self.suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name)
            .collect()
    }
}

/// Running maximum of a deviation over many checks.
struct Worst {
    value: f64,
    at: Option<String>,
    checks: usize,
    deficits: Vec<FockDeficit>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            at: None,
            checks: 0,
            deficits: Vec::new(),
        }
    }

    fn see(&mut self, dev: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        // NaN must register as a failure.
        if dev.is_nan() || dev > self.value {
            self.value = dev;
            self.at = Some(at());
        }
    }
}

fn suite(
    name: &'static str,
    tolerance: f64,
    body: impl FnOnce(&mut Worst) -> su11_core::Result<()>,
) -> SuiteReport {
    let mut w = Worst::new();
    let error = body(&mut w).err().map(|e| e.to_string());
    SuiteReport {
        name,
        passed: error.is_none() && w.value < tolerance,
        max_deviation: w.value,
        tolerance,
        checks: w.checks,
        worst_case: w.at,
        fock_deficits: w.deficits,
        error,
    }
}

fn draw(rng: &mut ChaCha8Rng, r_max: f64) -> su11_core::Result<InterferometerParams> {
    // r in (0, r_max], angles in [0, 2π).
    let r1 = r_max - rng.random_range(0.0..r_max);
    let r2 = r_max - rng.random_range(0.0..r_max);
    InterferometerParams::new(
        r1,
        r2,
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
    )
}

fn describe(p: &InterferometerParams) -> String {
    format!(
        "r1={:.4} r2={:.4} theta={:.4} phi={:.4}",
        p.r1, p.r2, p.theta, p.phi
    )
}

fn corrupt(state: GaussianState) -> su11_core::Result<GaussianState> {
    let mut a = state.a().clone();
    a[(0, 0)] += Complex64::new(1e-6, 0.0);
    GaussianState::from_blocks(a, state.b().clone())
}

fn stats_deviation(x: &PhotonCovariance, y: &PhotonCovariance) -> f64 {
    let mean = x
        .mean
        .iter()
        .zip(&y.mean)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    mean.max((&x.k - &y.k).amax())
}

fn alternating(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

pub fn run_suites(args: &VerifyArgs) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let draws = args.draws.max(1);
    let mut suites = Vec::new();

    suites.push(suite("analytic-crosscheck", 1e-12, |w| {
        for tag in FamilyTag::ALL {
            for m in 2..=12 {
                for _ in 0..draws {
                    let p = draw(&mut rng, 2.0)?;
                    let mut closed = analytic_state(tag, m, &p)?;
                    if args.corrupt_analytic {
                        closed = corrupt(closed)?;
                    }
                    let dev = build_family(tag, m, &p)?.max_deviation(&closed)?;
                    w.see(dev, || format!("{tag} M={m} {}", describe(&p)));
                }
            }
        }
        Ok(())
    }));

    suites.push(suite("subsystem-identity", 1e-12, |w| {
        for m in 2..=10 {
            for _ in 0..draws {
                let p = draw(&mut rng, 2.0)?;
                let middle: Vec<usize> = (3..=m + 2).collect();
                let traced = build_rho(m + 4, &p)?.partial_trace(&middle)?;
                w.see(build_rho_s(m, &p)?.max_deviation(&traced)?, || {
                    format!("M={m} {}", describe(&p))
                });
            }
        }
        Ok(())
    }));

    // Deviations are relative to the largest photon covariance of the state.
    suites.push(suite("photon-identities", 1e-10, |w| {
        for _ in 0..draws {
            let p = draw(&mut rng, 1.5)?;
            let g = p.gains();
            let expected = 2.0 * g.mu1 * g.mu1 * g.nu1 * g.nu1;
            for m in 2..=12 {
                let rho = build_rho(m, &p)?;
                let scale = photon_covariance(&rho).k.amax().max(1.0);
                let v = photon_lc_variance(&rho, &alternating(m))?;
                w.see(v.abs() / scale, || {
                    format!("alternating sum, su11 M={m} {}", describe(&p))
                });

                let sub = build_rho_s(m, &p)?;
                let mut edge = vec![0.0; m];
                edge[0] = -1.0;
                edge[1] = 1.0;
                let v = photon_lc_variance(&sub, &edge)?;
                w.see((v - expected).abs() / expected, || {
                    format!("N2-N1, su11-sub M={m} {}", describe(&p))
                });
                if m % 2 == 0 {
                    let v = photon_lc_variance(&sub, &alternating(m))?;
                    w.see((v - expected).abs() / expected, || {
                        format!("alternating sum, su11-sub M={m}")
                    });
                }
            }
            for m in (4..=12).step_by(2) {
                let bs = build_rho_bs(m, &p)?;
                let pairs: Vec<f64> = (0..m)
                    .map(|k| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 })
                    .collect();
                let scale = photon_covariance(&bs).k.amax().max(1.0);
                let v = photon_lc_variance(&bs, &pairs)?;
                w.see(v.abs() / scale, || {
                    format!("paired sum, bs M={m} {}", describe(&p))
                });
            }
        }
        Ok(())
    }));

    suites.push(suite("photon-closed-form", 1e-10, |w| {
        for tag in FamilyTag::ALL {
            for m in 2..=12 {
                for _ in 0..draws {
                    let p = draw(&mut rng, 1.5)?;
                    let numeric = photon_covariance(&build_family(tag, m, &p)?);
                    let closed = closed_form_photon_stats(tag, m, &p)?;
                    let scale = numeric.k.amax().max(1.0);
                    w.see(stats_deviation(&numeric, &closed) / scale, || {
                        format!("{tag} M={m} {}", describe(&p))
                    });
                }
            }
        }
        Ok(())
    }));

    suites.push(suite("fock-oracle", 1e-6, |w| {
        let p = InterferometerParams::new(0.3, 0.3, 0.7, 0.4)?;
        for tag in FamilyTag::ALL {
            for m in 2..=args.fock_max_modes.min(4) {
                let run = fock_family(tag, m, &p, FOCK_CUTOFF)?;
                let exact = build_family(tag, m, &p)?;
                w.see(run.cm()?.max_deviation(&exact)?, || {
                    format!("CM {tag} M={m}")
                });
                let stats = stats_deviation(&run.photon_stats()?, &photon_covariance(&exact));
                w.see(stats, || format!("photon stats {tag} M={m}"));
                w.deficits.push(FockDeficit {
                    family: tag.to_string(),
                    modes: m,
                    max_deficit: run.max_deficit,
                });
            }
        }
        Ok(())
    }));

    let passed = suites.iter().all(|s| s.passed);
    Report {
        passed,
        seed: args.seed,
        draws,
        suites,
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<()> {
    let report = run_suites(args);
    for s in &report.suites {
        eprintln!(
            "{:<20} {}  max deviation {:.3e} (tol {:.0e}, {} checks)",
            s.name,
            if s.passed { "pass" } else { "FAIL" },
            s.max_deviation,
            s.tolerance,
            s.checks
        );
    }
    Output::open(args.out.as_deref())?.json(&report)?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(report.failing().join(", ")))
    }
}
