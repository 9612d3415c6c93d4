//! Truncated Fock-space simulation of the pair operations, used as an
//! independent check of the covariance-matrix evolution at small gain.
//!
//! Each mode keeps occupations `0..=cutoff`. A two-mode gate is the matrix
//! exponential of its generator on a space padded beyond the cutoff, restricted
//! to the kept occupations; probability that the gate moves past the cutoff is
//! lost rather than reflected, so `1 − ‖ψ‖²` measures the truncation error.

use std::collections::hash_map::{Entry, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, GaussianState};
use crate::interferometer::{FamilyTag, InterferometerParams, PumpKind, PumpSchedule};
use crate::photon::PhotonCovariance;

/// Largest state vector the simulator will allocate.
pub const MAX_FOCK_AMPLITUDES: usize = 5_000_000;

/// Largest accepted `1 − ‖ψ‖²`.
pub const MAX_TRUNCATION_DEFICIT: f64 = 1e-6;

/// Extra occupations per mode used while exponentiating a generator.
const GATE_PADDING: usize = 6;

/// Gate entries below this magnitude are dropped.
const GATE_DROP: f64 = 1e-18;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pure state of `mode_count` modes with occupations `0..=cutoff` each.
/// Mode 1 is the most significant digit of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    amps: Vec<Complex64>,
}

fn space_size(modes: usize, cutoff: usize) -> Result<usize> {
    if modes == 0 {
        return Err(Error::InvalidDimension(
            "a state needs at least one mode".into(),
        ));
    }
    if cutoff < 2 {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            reason: format!("must be at least 2, got {cutoff}"),
        });
    }
    let mut size: usize = 1;
    for _ in 0..modes {
        size = size.saturating_mul(cutoff + 1);
        if size > MAX_FOCK_AMPLITUDES {
            return Err(Error::FockSpaceTooLarge {
                amplitudes: size,
                limit: MAX_FOCK_AMPLITUDES,
            });
        }
    }
    Ok(size)
}

/// `|0…0⟩` of `modes` modes.
pub fn fock_vacuum(modes: usize, cutoff: usize) -> Result<FockState> {
    let mut amps = vec![ZERO; space_size(modes, cutoff)?];
    amps[0] = Complex64::new(1.0, 0.0);
    Ok(FockState {
        modes,
        cutoff,
        amps,
    })
}

impl FockState {
    /// Wraps an amplitude vector of length `(cutoff + 1)^modes`.
    pub fn from_amplitudes(modes: usize, cutoff: usize, amps: Vec<Complex64>) -> Result<Self> {
        let size = space_size(modes, cutoff)?;
        if amps.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotPhysical("non-finite amplitude".into()));
        }
        Ok(Self {
            modes,
            cutoff,
            amps,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Index stride of 1-based `mode`.
    pub fn stride(&self, mode: usize) -> usize {
        (self.cutoff + 1).pow((self.modes - mode) as u32)
    }

    /// Amplitude index of an occupation tuple.
    pub fn index_of(&self, occupations: &[usize]) -> usize {
        occupations
            .iter()
            .fold(0, |acc, &n| acc * (self.cutoff + 1) + n)
    }

    fn occupations(&self, mut idx: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = idx % (self.cutoff + 1);
            idx /= self.cutoff + 1;
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn truncation_deficit(&self) -> f64 {
        (1.0 - self.norm_sqr()).max(0.0)
    }

    fn check_deficit(&self) -> Result<()> {
        let deficit = self.truncation_deficit();
        if deficit > MAX_TRUNCATION_DEFICIT {
            return Err(Error::TruncationInsufficient {
                deficit,
                limit: MAX_TRUNCATION_DEFICIT,
            });
        }
        Ok(())
    }

    /// Photon-number means and covariance over all modes.
    pub fn photon_stats(&self) -> PhotonCovariance {
        let m = self.modes;
        let mut first = vec![0.0; m];
        let mut second = vec![0.0; m * m];
        let mut occ = vec![0; m];
        for (idx, z) in self.amps.iter().enumerate() {
            let w = z.norm_sqr();
            if w == 0.0 {
                continue;
            }
            self.occupations(idx, &mut occ);
            for i in 0..m {
                let wi = w * occ[i] as f64;
                first[i] += wi;
                for j in 0..m {
                    second[i * m + j] += wi * occ[j] as f64;
                }
            }
        }
        let k =
            crate::gaussian::RMatrix::from_fn(m, m, |i, j| second[i * m + j] - first[i] * first[j]);
        PhotonCovariance { mean: first, k }
    }

    /// Photon statistics restricted to `keep` (1-based).
    pub fn photon_stats_of(&self, keep: &[usize]) -> Result<PhotonCovariance> {
        for &k in keep {
            crate::gaussian::check_mode(k, self.modes)?;
        }
        let full = self.photon_stats();
        let n = keep.len();
        Ok(PhotonCovariance {
            mean: keep.iter().map(|&k| full.mean[k - 1]).collect(),
            k: crate::gaussian::RMatrix::from_fn(n, n, |r, c| full.k[(keep[r] - 1, keep[c] - 1)]),
        })
    }
}

/// Covariance blocks of the modes in `keep` (1-based), from ladder-operator
/// expectations: `A_ij = ⟨a_i a_j† + a_j† a_i⟩ − 2⟨a_i⟩⟨a_j⟩*`,
/// `B_ij = 2⟨a_i a_j⟩ − 2⟨a_i⟩⟨a_j⟩`.
pub fn fock_cm(state: &FockState, keep: &[usize]) -> Result<GaussianState> {
    state.check_deficit()?;
    for &k in keep {
        crate::gaussian::check_mode(k, state.modes)?;
    }
    let n = keep.len();
    if n == 0 {
        return Err(Error::InvalidModeList("mode list is empty".into()));
    }
    let strides: Vec<usize> = keep.iter().map(|&k| state.stride(k)).collect();
    let c = state.cutoff;
    let mut mean = vec![ZERO; n];
    let mut hop = CMatrix::zeros(n, n); // ⟨a_j† a_i⟩ stored at (i, j)
    let mut pair = CMatrix::zeros(n, n); // ⟨a_i a_j⟩
    let mut occ_all = vec![0; state.modes];
    let mut occ = vec![0; n];
    let mut lowered = vec![ZERO; n]; // (a_i ψ) at the current index
    for idx in 0..state.amps.len() {
        state.occupations(idx, &mut occ_all);
        for (r, &k) in keep.iter().enumerate() {
            occ[r] = occ_all[k - 1];
        }
        for r in 0..n {
            lowered[r] = if occ[r] < c {
                state.amps[idx + strides[r]] * ((occ[r] + 1) as f64).sqrt()
            } else {
                ZERO
            };
        }
        let psi = state.amps[idx];
        for i in 0..n {
            mean[i] += psi.conj() * lowered[i];
            for j in 0..n {
                hop[(i, j)] += lowered[j].conj() * lowered[i];
                let need = if i == j { 2 } else { 1 };
                if occ[i] + need <= c && occ[j] < c {
                    let target = idx + strides[i] + strides[j];
                    let factor = if i == j {
                        (((occ[i] + 1) * (occ[i] + 2)) as f64).sqrt()
                    } else {
                        (((occ[i] + 1) * (occ[j] + 1)) as f64).sqrt()
                    };
                    pair[(i, j)] += psi.conj() * state.amps[target] * factor;
                }
            }
        }
    }
    let norm = state.norm_sqr();
    let a = CMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { norm } else { 0.0 };
        2.0 * hop[(i, j)] + delta - 2.0 * mean[i] * mean[j].conj()
    });
    let b = CMatrix::from_fn(n, n, |i, j| 2.0 * pair[(i, j)] - 2.0 * mean[i] * mean[j]);
    let alpha: Vec<Complex64> = mean.clone();
    // Round-off can leave A Hermitian only to ~1e-16 relative; the state
    // constructor symmetrizes within its tolerance.
    GaussianState::from_blocks(a, b)?.with_amplitudes(&alpha)
}

/// A two-mode unitary restricted to occupations `0..=cutoff` of each mode,
/// stored column-wise as sparse lists.
#[derive(Clone, Debug)]
pub struct TwoModeGate {
    cutoff: usize,
    /// For input `(n_i, n_j)` at `n_i * (cutoff + 1) + n_j`: output pairs and
    /// coefficients.
    columns: Vec<Vec<(usize, usize, Complex64)>>,
}

type Action = Box<dyn Fn(usize, usize) -> Vec<(usize, usize, Complex64)>>;

/// Two-mode generator given by its action on `|n_i, n_j⟩`, together with the
/// quantity it conserves; each conserved sector is exponentiated on its own.
struct Generator {
    conserved: fn(usize, usize) -> i64,
    action: Action,
}

impl TwoModeGate {
    fn build(cutoff: usize, gen: Generator, phase_i: f64) -> Self {
        let padded = cutoff + 1 + GATE_PADDING;
        let d = cutoff + 1;
        let mut sectors: HashMap<i64, Vec<(usize, usize)>> = HashMap::new();
        for ni in 0..padded {
            for nj in 0..padded {
                sectors
                    .entry((gen.conserved)(ni, nj))
                    .or_default()
                    .push((ni, nj));
            }
        }
        let mut columns = vec![Vec::new(); d * d];
        for basis in sectors.values() {
            let pos: HashMap<(usize, usize), usize> =
                basis.iter().enumerate().map(|(k, &b)| (b, k)).collect();
            let mut g = CMatrix::zeros(basis.len(), basis.len());
            for (col, &(ni, nj)) in basis.iter().enumerate() {
                for (oi, oj, z) in (gen.action)(ni, nj) {
                    // Targets past the padded space are dropped.
                    if let Some(&row) = pos.get(&(oi, oj)) {
                        g[(row, col)] += z;
                    }
                }
            }
            let u = g.exp();
            for (col, &(ni, nj)) in basis.iter().enumerate() {
                if ni >= d || nj >= d {
                    continue;
                }
                // The phase factor exp(iφ n_i) acts before the exponential.
                let pre = Complex64::from_polar(1.0, phase_i * ni as f64);
                let entries = &mut columns[ni * d + nj];
                for (row, &(oi, oj)) in basis.iter().enumerate() {
                    let z = u[(row, col)] * pre;
                    if oi < d && oj < d && z.norm() > GATE_DROP {
                        entries.push((oi, oj, z));
                    }
                }
            }
        }
        Self { cutoff, columns }
    }

    /// `exp[r(e^{iθ} a_i† a_j† − e^{−iθ} a_i a_j)]`, which maps
    /// `a_i → cosh r a_i + e^{iθ} sinh r a_j†` in the Heisenberg picture.
    pub fn tmsq(cutoff: usize, r: f64, theta: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: "gain must be finite and >= 0".into(),
            });
        }
        let e = Complex64::from_polar(r, theta);
        let action = move |ni: usize, nj: usize| {
            let mut out = vec![(ni + 1, nj + 1, e * (((ni + 1) * (nj + 1)) as f64).sqrt())];
            if ni > 0 && nj > 0 {
                out.push((ni - 1, nj - 1, -e.conj() * ((ni * nj) as f64).sqrt()));
            }
            out
        };
        let gen = Generator {
            conserved: |ni, nj| ni as i64 - nj as i64,
            action: Box::new(action),
        };
        Ok(Self::build(cutoff, gen, 0.0))
    }

    /// Balanced beam splitter `a_i → (e^{iφ} a_i − a_j)/√2`,
    /// `a_j → (e^{iφ} a_i + a_j)/√2`: a phase `exp(iφ n_i)` followed by the
    /// rotation `exp[(π/4)(a_j† a_i − a_i† a_j)]`.
    pub fn beam_splitter(cutoff: usize, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi",
                reason: "must be finite".into(),
            });
        }
        let t = std::f64::consts::FRAC_PI_4;
        let action = move |ni: usize, nj: usize| {
            let mut out = Vec::with_capacity(2);
            if ni > 0 {
                out.push((
                    ni - 1,
                    nj + 1,
                    Complex64::new(t * ((ni * (nj + 1)) as f64).sqrt(), 0.0),
                ));
            }
            if nj > 0 {
                out.push((
                    ni + 1,
                    nj - 1,
                    Complex64::new(-t * (((ni + 1) * nj) as f64).sqrt(), 0.0),
                ));
            }
            out
        };
        let gen = Generator {
            conserved: |ni, nj| (ni + nj) as i64,
            action: Box::new(action),
        };
        Ok(Self::build(cutoff, gen, phi))
    }

    /// Applies the gate to modes `i`, `j` (1-based) of `state`.
    pub fn apply(&self, state: &FockState, i: usize, j: usize) -> Result<FockState> {
        crate::gaussian::check_mode(i, state.modes)?;
        crate::gaussian::check_mode(j, state.modes)?;
        if i == j {
            return Err(Error::DegeneratePair(i));
        }
        if state.cutoff != self.cutoff {
            return Err(Error::InvalidParameter {
                name: "cutoff",
                reason: format!("gate built for {}, state has {}", self.cutoff, state.cutoff),
            });
        }
        let d = self.cutoff + 1;
        let (si, sj) = (state.stride(i), state.stride(j));
        let mut out = vec![ZERO; state.amps.len()];
        let mut occ = vec![0; state.modes];
        for base in 0..state.amps.len() {
            state.occupations(base, &mut occ);
            if occ[i - 1] != 0 || occ[j - 1] != 0 {
                continue;
            }
            for ni in 0..d {
                for nj in 0..d {
                    let x = state.amps[base + ni * si + nj * sj];
                    if x == ZERO {
                        continue;
                    }
                    for &(oi, oj, u) in &self.columns[ni * d + nj] {
                        out[base + oi * si + oj * sj] += u * x;
                    }
                }
            }
        }
        let next = FockState {
            modes: state.modes,
            cutoff: state.cutoff,
            amps: out,
        };
        next.check_deficit()?;
        Ok(next)
    }
}

pub fn fock_tmsq(state: &FockState, i: usize, j: usize, r: f64, theta: f64) -> Result<FockState> {
    TwoModeGate::tmsq(state.cutoff, r, theta)?.apply(state, i, j)
}

pub fn fock_bs(state: &FockState, i: usize, j: usize, phi: f64) -> Result<FockState> {
    TwoModeGate::beam_splitter(state.cutoff, phi)?.apply(state, i, j)
}

/// Fock simulation of a family, restricted to the operations that can affect
/// the kept modes.
#[derive(Clone, Debug)]
pub struct FockRun {
    pub state: FockState,
    /// Chain modes that were simulated, in state order.
    pub simulated: Vec<usize>,
    /// Positions (1-based, in `state`) of the family's output modes.
    pub keep: Vec<usize>,
    /// Largest truncation deficit seen after any gate.
    pub max_deficit: f64,
}

impl FockRun {
    pub fn cm(&self) -> Result<GaussianState> {
        fock_cm(&self.state, &self.keep)
    }

    pub fn photon_stats(&self) -> Result<PhotonCovariance> {
        self.state.photon_stats_of(&self.keep)
    }
}

fn run_schedule(
    sched: &PumpSchedule,
    keep: &[usize],
    p: &InterferometerParams,
    cutoff: usize,
) -> Result<FockRun> {
    let (pruned, simulated) = sched.causal_cone(keep);
    let local_sched = pruned.restrict_to(&simulated)?;
    let local = |g: usize| {
        simulated
            .iter()
            .position(|&x| x == g)
            .expect("mode in causal cone")
            + 1
    };
    let mut state = fock_vacuum(simulated.len(), cutoff)?;
    let mut gates: HashMap<PumpKind, TwoModeGate> = HashMap::new();
    let mut max_deficit: f64 = 0.0;
    for step in &local_sched.steps {
        let gate = match gates.entry(step.kind) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(match step.kind {
                PumpKind::Tmsq1 => TwoModeGate::tmsq(cutoff, p.r1, 0.0)?,
                PumpKind::Tmsq2 => TwoModeGate::tmsq(cutoff, p.r2, p.theta)?,
                PumpKind::BeamSplitter => TwoModeGate::beam_splitter(cutoff, p.phi)?,
            }),
        };
        state = gate.apply(&state, step.modes.0, step.modes.1)?;
        max_deficit = max_deficit.max(state.truncation_deficit());
    }
    let keep = keep.iter().map(|&g| local(g)).collect();
    Ok(FockRun {
        state,
        simulated,
        keep,
        max_deficit,
    })
}

/// Simulates `tag` with `m` output modes at the given cutoff.
pub fn fock_family(
    tag: FamilyTag,
    m: usize,
    p: &InterferometerParams,
    cutoff: usize,
) -> Result<FockRun> {
    let (sched, keep) = tag.plan(m)?;
    run_schedule(&sched, &keep, p, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::tmsq_matrix;
    use crate::interferometer::build_family;

    #[test]
    fn vacuum_basics() {
        let v = fock_vacuum(2, 10).unwrap();
        assert_eq!(v.amplitudes().len(), 121);
        assert_eq!(v.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(v.norm_sqr(), 1.0);
        assert_eq!(v.photon_stats().mean, vec![0.0, 0.0]);
        let cm = fock_cm(&v, &[1, 2]).unwrap();
        assert_eq!(cm, GaussianState::vacuum(2).unwrap());
        assert!(fock_vacuum(2, 1).is_err());
        assert!(matches!(
            fock_vacuum(7, 12),
            Err(Error::FockSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let r: f64 = 0.4;
        let st = fock_tmsq(&fock_vacuum(2, 12).unwrap(), 1, 2, r, 0.0).unwrap();
        // The top levels feel the edge of the padded space.
        for n in 0..=10 {
            let expected = r.tanh().powi(n as i32) / r.cosh();
            let got = st.amplitudes()[st.index_of(&[n, n])];
            assert!((got.re - expected).abs() < 1e-12, "n={n}");
            assert!(got.im.abs() < 1e-12);
        }
        assert!(st.truncation_deficit() < 1e-9);
    }

    #[test]
    fn zero_gain_and_vacuum_beam_splitter_are_identities() {
        let v = fock_vacuum(2, 6).unwrap();
        let same = fock_tmsq(&v, 1, 2, 0.0, 0.3).unwrap();
        assert!((same.amplitudes()[0] - 1.0).norm() < 1e-15);
        let bs = fock_bs(&v, 1, 2, 0.9).unwrap();
        assert!((bs.amplitudes()[0] - 1.0).norm() < 1e-14);
        assert!((bs.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gate_errors() {
        let v = fock_vacuum(3, 4).unwrap();
        assert!(matches!(
            fock_tmsq(&v, 2, 2, 0.1, 0.0),
            Err(Error::DegeneratePair(2))
        ));
        assert!(matches!(
            fock_bs(&v, 1, 4, 0.0),
            Err(Error::InvalidMode { .. })
        ));
        // Strong squeezing leaks well past a small cutoff.
        assert!(matches!(
            fock_tmsq(&v, 1, 2, 1.5, 0.0),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn two_mode_cm_matches_gaussian() {
        let v = fock_vacuum(2, 12).unwrap();
        let st = fock_tmsq(&v, 1, 2, 0.2, 0.8).unwrap();
        let g = tmsq_matrix(2, 1, 2, 0.2, 0.8)
            .unwrap()
            .apply(&GaussianState::vacuum(2).unwrap())
            .unwrap();
        let dev = fock_cm(&st, &[1, 2]).unwrap().max_deviation(&g).unwrap();
        assert!(dev < 1e-9, "{dev:e}");
    }

    #[test]
    fn beam_splitter_matches_gaussian() {
        let v = fock_vacuum(2, 12).unwrap();
        let st = fock_tmsq(&v, 1, 2, 0.25, 0.0).unwrap();
        let st = fock_bs(&st, 1, 2, 1.1).unwrap();
        let s = tmsq_matrix(2, 1, 2, 0.25, 0.0)
            .unwrap()
            .then(&crate::gaussian::bs_matrix(2, 1, 2, 1.1).unwrap());
        let g = s.apply(&GaussianState::vacuum(2).unwrap()).unwrap();
        let dev = fock_cm(&st, &[1, 2]).unwrap().max_deviation(&g).unwrap();
        // Photons of |n, n⟩ with large n are split past the cutoff, so this
        // case sits right at the oracle tolerance.
        assert!(dev < 1e-6, "{dev:e}");
    }

    #[test]
    fn three_mode_chain_matches_gaussian() {
        let p = InterferometerParams::new(0.15, 0.15, 0.0, 0.0).unwrap();
        let run = fock_family(FamilyTag::Su11, 3, &p, 12).unwrap();
        let g = build_family(FamilyTag::Su11, 3, &p).unwrap();
        assert!(run.cm().unwrap().max_deviation(&g).unwrap() < 1e-6);
    }
}
