//! Pulse-by-pulse construction of the interferometer output states.
//!
//! Time slot `t` carries an idler mode `2t − 1` and a signal mode `2t`. The
//! first amplifier couples the signal of slot `t` to the idler of slot `t + 1`
//! with phase 0; the second couples idler and signal of the same slot and
//! carries the relative pump phase `theta`. Replacing the second amplifier by a
//! balanced beam splitter gives the beam-splitter families.

use crate::error::{Error, Result};
use crate::gaussian::{bs_matrix, tmsq_matrix, GaussianState, SymplecticOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Idler,
    Signal,
}

/// 1-based mode index of `channel` in time slot `t ≥ 1`.
pub fn mode_index(channel: Channel, t: usize) -> Result<usize> {
    if t == 0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "time slots start at 1".into(),
        });
    }
    Ok(match channel {
        Channel::Idler => 2 * t - 1,
        Channel::Signal => 2 * t,
    })
}

/// Gains and phases of one interferometer setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerParams {
    pub r1: f64,
    pub r2: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Derived hyperbolic quantities of an [`InterferometerParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gains {
    pub mu1: f64,
    pub nu1: f64,
    pub mu2: f64,
    pub nu2: f64,
    /// `cosh 2r`.
    pub v1: f64,
    pub v2: f64,
    /// `sinh(2r)/2`.
    pub c1: f64,
    pub c2: f64,
}

impl InterferometerParams {
    pub fn new(r1: f64, r2: f64, theta: f64, phi: f64) -> Result<Self> {
        for (name, r) in [("r1", r1), ("r2", r2)] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {r}"),
                });
            }
        }
        for (name, x) in [("theta", theta), ("phi", phi)] {
            if !x.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(Self { r1, r2, theta, phi })
    }

    pub fn gains(&self) -> Gains {
        Gains {
            mu1: self.r1.cosh(),
            nu1: self.r1.sinh(),
            mu2: self.r2.cosh(),
            nu2: self.r2.sinh(),
            v1: (2.0 * self.r1).cosh(),
            v2: (2.0 * self.r2).cosh(),
            c1: 0.5 * (2.0 * self.r1).sinh(),
            c2: 0.5 * (2.0 * self.r2).sinh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PumpKind {
    /// First amplifier, gain `r1`, phase 0.
    Tmsq1,
    /// Second amplifier, gain `r2`, phase `theta`.
    Tmsq2,
    /// Balanced beam splitter with phase `phi`.
    BeamSplitter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PumpStep {
    pub kind: PumpKind,
    pub modes: (usize, usize),
}

impl PumpStep {
    pub fn operator(&self, mode_count: usize, p: &InterferometerParams) -> Result<SymplecticOp> {
        let (i, j) = self.modes;
        match self.kind {
            PumpKind::Tmsq1 => tmsq_matrix(mode_count, i, j, p.r1, 0.0),
            PumpKind::Tmsq2 => tmsq_matrix(mode_count, i, j, p.r2, p.theta),
            PumpKind::BeamSplitter => bs_matrix(mode_count, i, j, p.phi),
        }
    }
}

/// Ordered list of pair operations acting on `mode_count` modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PumpSchedule {
    pub mode_count: usize,
    pub steps: Vec<PumpStep>,
}

impl PumpSchedule {
    /// Applies every step to the vacuum.
    pub fn run(&self, p: &InterferometerParams) -> Result<GaussianState> {
        let mut state = GaussianState::vacuum(self.mode_count)?;
        for step in &self.steps {
            state = step.operator(self.mode_count, p)?.apply(&state)?;
        }
        Ok(state)
    }

    /// Drops the steps that cannot influence the reduced state on `keep`, and
    /// returns the pruned schedule with the modes it touches (sorted, 1-based).
    ///
    /// A pair operation acting on no mode that later feeds into `keep` leaves
    /// the reduced state unchanged, so it can be removed.
    pub fn causal_cone(&self, keep: &[usize]) -> (PumpSchedule, Vec<usize>) {
        let mut active = vec![false; self.mode_count + 1];
        for &k in keep {
            if k <= self.mode_count {
                active[k] = true;
            }
        }
        let mut kept_steps = Vec::new();
        for step in self.steps.iter().rev() {
            let (i, j) = step.modes;
            if active[i] || active[j] {
                active[i] = true;
                active[j] = true;
                kept_steps.push(*step);
            }
        }
        kept_steps.reverse();
        let modes = (1..=self.mode_count).filter(|&k| active[k]).collect();
        (
            PumpSchedule {
                mode_count: self.mode_count,
                steps: kept_steps,
            },
            modes,
        )
    }

    /// Renumbers the schedule onto `modes` (sorted, 1-based), which must
    /// include every mode the schedule touches.
    pub fn restrict_to(&self, modes: &[usize]) -> Result<PumpSchedule> {
        let local = |g: usize| {
            modes
                .iter()
                .position(|&x| x == g)
                .map(|p| p + 1)
                .ok_or_else(|| {
                    Error::InvalidModeList(format!(
                        "schedule touches mode {g}, which is not in {modes:?}"
                    ))
                })
        };
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(PumpStep {
                    kind: s.kind,
                    modes: (local(s.modes.0)?, local(s.modes.1)?),
                })
            })
            .collect::<Result<_>>()?;
        Ok(PumpSchedule {
            mode_count: modes.len(),
            steps,
        })
    }
}

fn schedule(m: usize, second: PumpKind) -> Result<PumpSchedule> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 modes, got {m}"
        )));
    }
    let mut steps = Vec::new();
    let mut t = 1;
    while 2 * t <= m {
        if 2 * t < m {
            steps.push(PumpStep {
                kind: PumpKind::Tmsq1,
                modes: (2 * t, 2 * t + 1),
            });
        }
        steps.push(PumpStep {
            kind: second,
            modes: (2 * t - 1, 2 * t),
        });
        t += 1;
    }
    Ok(PumpSchedule {
        mode_count: m,
        steps,
    })
}

/// Both amplifiers, for `m ≥ 2` modes.
pub fn su11_schedule(m: usize) -> Result<PumpSchedule> {
    schedule(m, PumpKind::Tmsq2)
}

/// First amplifier followed by a beam splitter, for `m ≥ 2` modes.
pub fn bs_schedule(m: usize) -> Result<PumpSchedule> {
    schedule(m, PumpKind::BeamSplitter)
}

/// The four output families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    /// Full `M`-mode output of the amplifier chain.
    Su11,
    /// Modes `3..M+2` of the `(M + 4)`-mode amplifier chain.
    Su11Sub,
    /// Full `M`-mode output of the amplifier/beam-splitter chain.
    Bs,
    /// Modes `3..M+2` of the `(M + 4)`-mode amplifier/beam-splitter chain.
    BsSub,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 4] = [
        FamilyTag::Su11,
        FamilyTag::Su11Sub,
        FamilyTag::Bs,
        FamilyTag::BsSub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Su11 => "su11",
            FamilyTag::Su11Sub => "su11-sub",
            FamilyTag::Bs => "bs",
            FamilyTag::BsSub => "bs-sub",
        }
    }

    pub fn is_sub(self) -> bool {
        matches!(self, FamilyTag::Su11Sub | FamilyTag::BsSub)
    }

    pub fn uses_beam_splitter(self) -> bool {
        matches!(self, FamilyTag::Bs | FamilyTag::BsSub)
    }

    /// Schedule of the underlying chain and the modes that are kept.
    pub fn plan(self, m: usize) -> Result<(PumpSchedule, Vec<usize>)> {
        if m < 2 {
            return Err(Error::InvalidDimension(format!(
                "need at least 2 modes, got {m}"
            )));
        }
        let total = if self.is_sub() { m + 4 } else { m };
        let sched = if self.uses_beam_splitter() {
            bs_schedule(total)?
        } else {
            su11_schedule(total)?
        };
        let keep = if self.is_sub() {
            (3..=m + 2).collect()
        } else {
            (1..=m).collect()
        };
        Ok((sched, keep))
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "su11" => Ok(FamilyTag::Su11),
            "su11-sub" | "su11-s" => Ok(FamilyTag::Su11Sub),
            "bs" => Ok(FamilyTag::Bs),
            "bs-sub" | "bs-s" => Ok(FamilyTag::BsSub),
            other => Err(Error::InvalidParameter {
                name: "family",
                reason: format!("unknown family `{other}` (expected su11, su11-sub, bs, bs-sub)"),
            }),
        }
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Numerically built state of a family. For the sub-chain families only the
/// operations that reach the kept modes are simulated.
pub fn build_family(tag: FamilyTag, m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    let (sched, keep) = tag.plan(m)?;
    if !tag.is_sub() {
        return sched.run(p);
    }
    let (pruned, active) = sched.causal_cone(&keep);
    let local = pruned.restrict_to(&active)?;
    let positions: Vec<usize> = keep
        .iter()
        .map(|k| {
            active
                .iter()
                .position(|a| a == k)
                .expect("kept modes are active")
                + 1
        })
        .collect();
    local.run(p)?.partial_trace(&positions)
}

pub fn build_rho(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    build_family(FamilyTag::Su11, m, p)
}

pub fn build_rho_s(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    build_family(FamilyTag::Su11Sub, m, p)
}

pub fn build_rho_bs(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    build_family(FamilyTag::Bs, m, p)
}

pub fn build_rho_bs_s(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    build_family(FamilyTag::BsSub, m, p)
}

/// Two modes passing through both amplifiers in sequence: gain `r1` with phase
/// 0, then gain `r2` with phase `theta`.
pub fn build_balanced_su11(p: &InterferometerParams) -> Result<GaussianState> {
    let sched = PumpSchedule {
        mode_count: 2,
        steps: vec![
            PumpStep {
                kind: PumpKind::Tmsq1,
                modes: (1, 2),
            },
            PumpStep {
                kind: PumpKind::Tmsq2,
                modes: (1, 2),
            },
        ],
    };
    sched.run(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use PumpKind::*;

    fn pairs(s: &PumpSchedule) -> Vec<(PumpKind, (usize, usize))> {
        s.steps.iter().map(|p| (p.kind, p.modes)).collect()
    }

    #[test]
    fn schedule_for_eight_modes() {
        let s = su11_schedule(8).unwrap();
        assert_eq!(
            pairs(&s),
            vec![
                (Tmsq1, (2, 3)),
                (Tmsq2, (1, 2)),
                (Tmsq1, (4, 5)),
                (Tmsq2, (3, 4)),
                (Tmsq1, (6, 7)),
                (Tmsq2, (5, 6)),
                (Tmsq2, (7, 8)),
            ]
        );
    }

    #[test]
    fn schedule_for_odd_modes() {
        assert_eq!(
            pairs(&su11_schedule(3).unwrap()),
            vec![(Tmsq1, (2, 3)), (Tmsq2, (1, 2))]
        );
        assert_eq!(
            pairs(&bs_schedule(2).unwrap()),
            vec![(BeamSplitter, (1, 2))]
        );
        assert!(su11_schedule(1).is_err());
    }

    #[test]
    fn mode_indices() {
        assert_eq!(mode_index(Channel::Idler, 1).unwrap(), 1);
        assert_eq!(mode_index(Channel::Signal, 3).unwrap(), 6);
        assert!(mode_index(Channel::Signal, 0).is_err());
    }

    #[test]
    fn two_mode_output_is_squeezed_vacuum() {
        let p = InterferometerParams::new(0.3, 0.8, 0.5, 0.0).unwrap();
        let g = p.gains();
        let st = build_rho(2, &p).unwrap();
        assert!((st.a()[(0, 0)].re - g.v2).abs() < 1e-13);
        let expected = num_complex::Complex64::from_polar(2.0 * g.c2, 0.5);
        assert!((st.b()[(0, 1)] - expected).norm() < 1e-13);
    }

    #[test]
    fn causal_cone_of_sub_families() {
        let (sched, keep) = FamilyTag::Su11Sub.plan(4).unwrap();
        assert_eq!(keep, vec![3, 4, 5, 6]);
        let (pruned, modes) = sched.causal_cone(&keep);
        assert_eq!(modes, vec![2, 3, 4, 5, 6, 7]);
        assert_eq!(pruned.steps.len(), 5);
        let (_, modes2) = FamilyTag::BsSub.plan(2).unwrap().0.causal_cone(&[3, 4]);
        assert_eq!(modes2, vec![2, 3, 4, 5]);
    }

    #[test]
    fn causal_cone_preserves_reduced_state() {
        let p = InterferometerParams::new(0.6, 0.9, 0.4, 1.1).unwrap();
        for tag in [FamilyTag::Su11Sub, FamilyTag::BsSub] {
            let (sched, keep) = tag.plan(3).unwrap();
            let (pruned, _) = sched.causal_cone(&keep);
            let a = sched.run(&p).unwrap().partial_trace(&keep).unwrap();
            let b = pruned.run(&p).unwrap().partial_trace(&keep).unwrap();
            assert!(a.max_deviation(&b).unwrap() < 1e-12);
        }
    }

    #[test]
    fn restriction_renumbers_modes() {
        let s = su11_schedule(5).unwrap();
        let (pruned, active) = s.causal_cone(&[4]);
        let local = pruned.restrict_to(&active).unwrap();
        assert_eq!(local.mode_count, active.len());
        assert!(local.steps.iter().all(|st| st.modes.1 <= active.len()));
        assert!(s.restrict_to(&[1, 2]).is_err());
    }

    #[test]
    fn balanced_chain_at_zero_phase_adds_gains() {
        let p = InterferometerParams::new(0.4, 0.7, 0.0, 0.0).unwrap();
        let st = build_balanced_su11(&p).unwrap();
        let direct = tmsq_matrix(2, 1, 2, 1.1, 0.0)
            .unwrap()
            .apply(&GaussianState::vacuum(2).unwrap())
            .unwrap();
        assert!(st.max_deviation(&direct).unwrap() < 1e-12);
    }

    #[test]
    fn family_names_round_trip() {
        for tag in FamilyTag::ALL {
            assert_eq!(tag.name().parse::<FamilyTag>().unwrap(), tag);
        }
        assert!("foo".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(InterferometerParams::new(-1.0, 0.0, 0.0, 0.0).is_err());
        assert!(InterferometerParams::new(0.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(InterferometerParams::new(0.0, 0.0, f64::INFINITY, 0.0).is_err());
    }
}
