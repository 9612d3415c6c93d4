//! Quadrature variances and PPT entanglement classification.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, GaussianState, QuadratureCm, RMatrix};
use crate::interferometer::{build_balanced_su11, build_family, FamilyTag, InterferometerParams};

/// Negativity threshold on `L_μ`.
pub const NEGATIVITY_EPS: f64 = 1e-9;

/// Relative tolerance when matching `+ν` and `−ν` eigenvalues of `iΩσ`.
pub const PAIRING_TOL: f64 = 1e-8;

/// Two disjoint, non-empty groups of modes, stored with `min(A) < min(B)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    universe: usize,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    /// Validates and canonicalizes; the two groups are swapped if needed.
    pub fn new(universe: usize, a: &[usize], b: &[usize]) -> Result<Self> {
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidBipartition(
                "both groups must be non-empty".into(),
            ));
        }
        for group in [&a, &b] {
            if group.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidBipartition(format!(
                    "repeated mode in {group:?}"
                )));
            }
            if let Some(&k) = group.iter().find(|&&k| k == 0 || k > universe) {
                return Err(Error::InvalidBipartition(format!(
                    "mode {k} outside 1..={universe}"
                )));
            }
        }
        if let Some(k) = a.iter().find(|k| b.contains(k)) {
            return Err(Error::InvalidBipartition(format!(
                "mode {k} is in both groups"
            )));
        }
        if a[0] > b[0] {
            std::mem::swap(&mut a, &mut b);
        }
        Ok(Self { universe, a, b })
    }

    /// Parses `A={1,3}|B={2,4}` or the short form `1,3|2,4`.
    pub fn parse(universe: usize, s: &str) -> Result<Self> {
        let bad = || Error::InvalidBipartition(format!("cannot parse `{s}`"));
        let (left, right) = s.split_once('|').ok_or_else(bad)?;
        let group = |part: &str, label: &str| -> Result<Vec<usize>> {
            let part = part.trim();
            let part = part
                .strip_prefix(label)
                .map(|p| p.trim_start().trim_start_matches('='))
                .unwrap_or(part);
            let part = part.trim().trim_start_matches('{').trim_end_matches('}');
            part.split(',')
                .map(|x| x.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        Self::new(universe, &group(left, "A")?, &group(right, "B")?)
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn set_a(&self) -> &[usize] {
        &self.a
    }

    pub fn set_b(&self) -> &[usize] {
        &self.b
    }

    /// Whether `A ∪ B` covers every mode.
    pub fn is_cover(&self) -> bool {
        self.a.len() + self.b.len() == self.universe
    }

    /// The same bipartition with the roles of the groups exchanged. The result
    /// is not canonical and is only meant for checks of swap symmetry.
    pub fn swapped(&self) -> Self {
        Self {
            universe: self.universe,
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Canonical identifier, e.g. `A={1,3}|B={2,4}`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

fn join(modes: &[usize]) -> String {
    modes
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A={{{}}}|B={{{}}}", join(&self.a), join(&self.b))
    }
}

/// Largest mode count accepted by [`enumerate_bipartitions`].
pub const MAX_ENUMERATION_MODES: usize = 14;

/// All canonical bipartitions of `m` modes, ordered by `|A| + |B|`, then `|A|`,
/// then the index lists lexicographically. With `require_cover`, only those
/// with `A ∪ B = {1..m}`.
pub fn enumerate_bipartitions(m: usize, require_cover: bool) -> Result<Vec<Bipartition>> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 modes, got {m}"
        )));
    }
    if m > MAX_ENUMERATION_MODES {
        return Err(Error::InvalidDimension(format!(
            "enumeration limited to {MAX_ENUMERATION_MODES} modes, got {m}"
        )));
    }
    let mut out = Vec::new();
    // Each mode is unused (0), in A (1) or in B (2).
    let mut digits = vec![0u8; m];
    loop {
        let a: Vec<usize> = (0..m).filter(|&k| digits[k] == 1).map(|k| k + 1).collect();
        let b: Vec<usize> = (0..m).filter(|&k| digits[k] == 2).map(|k| k + 1).collect();
        let covers = a.len() + b.len() == m;
        if !a.is_empty() && !b.is_empty() && a[0] < b[0] && (covers || !require_cover) {
            out.push(Bipartition { universe: m, a, b });
        }
        let mut pos = 0;
        while pos < m && digits[pos] == 2 {
            digits[pos] = 0;
            pos += 1;
        }
        if pos == m {
            break;
        }
        digits[pos] += 1;
    }
    out.sort_by(|x, y| {
        (x.a.len() + x.b.len(), x.a.len(), &x.a, &x.b).cmp(&(
            y.a.len() + y.b.len(),
            y.a.len(),
            &y.a,
            &y.b,
        ))
    });
    Ok(out)
}

/// `Δ(ω·q)² = ½ ωᵀσω` over interleaved `(X_1, P_1, ...)` weights.
pub fn quad_lc_variance(state: &GaussianState, weights: &[f64]) -> Result<f64> {
    let sigma = state.to_quadrature()?.0;
    if weights.len() != sigma.nrows() {
        return Err(Error::DimensionMismatch {
            expected: sigma.nrows(),
            found: weights.len(),
        });
    }
    let w = DVector::from_column_slice(weights);
    Ok(0.5 * w.dot(&(&sigma * &w)))
}

/// Smallest variance over unit-norm weight vectors, with the minimizing weights.
pub fn min_quad_variance(state: &GaussianState) -> Result<(f64, Vec<f64>)> {
    let sigma = state.to_quadrature()?.0;
    let eig = SymmetricEigen::new(sigma);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("quadrature matrix is never empty");
    Ok((
        0.5 * lambda,
        eig.eigenvectors.column(idx).iter().copied().collect(),
    ))
}

/// Quadrature matrix of the modes in `A ∪ B`, ordered `A` block then `B` block.
pub fn ppt_rearrange(state: &GaussianState, bip: &Bipartition) -> Result<QuadratureCm> {
    if bip.universe() != state.mode_count() {
        return Err(Error::InvalidBipartition(format!(
            "bipartition over {} modes applied to a {}-mode state",
            bip.universe(),
            state.mode_count()
        )));
    }
    let order: Vec<usize> = bip.set_a().iter().chain(bip.set_b()).copied().collect();
    state.reorder(&order)?.to_quadrature()
}

/// Flips the sign of every `P` row and column of the first `n_a` modes.
pub fn partial_transpose(sigma: &QuadratureCm, n_a: usize, n_b: usize) -> Result<QuadratureCm> {
    let dim = 2 * (n_a + n_b);
    if sigma.0.nrows() != dim || sigma.0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sigma.0.nrows(),
        });
    }
    let sign = |r: usize| if r % 2 == 1 && r / 2 < n_a { -1.0 } else { 1.0 };
    Ok(QuadratureCm(RMatrix::from_fn(dim, dim, |r, c| {
        sign(r) * sign(c) * sigma.0[(r, c)]
    })))
}

/// Symplectic eigenvalues `ν_1 ≤ … ≤ ν_n` of a quadrature covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Moduli of the eigenvalues of `iΩσ`, each `±ν` pair reported once.
///
/// The spectrum is taken from the Hermitian matrix `σ^{1/2} (iΩ) σ^{1/2}`,
/// which is similar to `iΩσ`.
pub fn symplectic_eigenvalues(sigma: &QuadratureCm) -> Result<SymplecticSpectrum> {
    let s = &sigma.0;
    let dim = s.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || s.ncols() != dim {
        return Err(Error::InvalidDimension(format!(
            "quadrature matrix must be 2n x 2n, got {}x{}",
            dim,
            s.ncols()
        )));
    }
    let scale = s.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let asym = (s - s.transpose())
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if asym > 1e-12 * scale {
        return Err(Error::NotPositiveDefinite(format!(
            "not symmetric (residue {asym:.3e})"
        )));
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmin = eig.eigenvalues.min();
    if lmin.is_nan() || lmin <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue {lmin:.3e}"
        )));
    }
    let root = &eig.eigenvectors
        * RMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let mut omega = RMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    let w = &root * omega * &root;
    let h = CMatrix::from_fn(dim, dim, |r, c| Complex64::new(0.0, w[(r, c)]));
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let n = dim / 2;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let pos = ev[n + k];
        let neg = -ev[n - 1 - k];
        if (pos - neg).abs() > PAIRING_TOL * pos.max(1.0) {
            return Err(Error::NotPhysical(format!(
                "unpaired symplectic eigenvalues {pos} and {neg}"
            )));
        }
        values.push(0.5 * (pos + neg));
    }
    Ok(SymplecticSpectrum { values })
}

/// `L_μ = log10(min ν̃)` of the partially transposed reduced state.
pub fn log_min_ppt(state: &GaussianState, bip: &Bipartition) -> Result<f64> {
    let arranged = ppt_rearrange(state, bip)?;
    let transposed = partial_transpose(&arranged, bip.set_a().len(), bip.set_b().len())?;
    Ok(symplectic_eigenvalues(&transposed)?.min().log10())
}

/// Evenly spaced values `start..=stop` with `steps` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(start.is_finite() && stop.is_finite() && start >= 0.0 && start <= stop) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need 0 <= start <= stop, got {start}..{stop}"),
            });
        }
        Ok(Self { start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// `start:stop:steps`, or a single value for a one-point axis.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::InvalidParameter {
            name: "grid",
            reason,
        };
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| bad(format!("`{x}` is not a number")))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                Axis::new(v, v, 1)
            }
            [a, b, n] => {
                let steps = n
                    .parse::<usize>()
                    .map_err(|_| bad(format!("`{n}` is not a step count")))?;
                Axis::new(num(a)?, num(b)?, steps)
            }
            _ => Err(bad(format!("expected start:stop:steps, got `{s}`"))),
        }
    }
}

/// Rectangular `(r1, r2)` lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub r1: Axis,
    pub r2: Axis,
}

impl Grid {
    /// `r1, r2 ∈ {0.1, 0.2, …, 2.0}`.
    pub fn default_ppt() -> Self {
        let axis = Axis {
            start: 0.1,
            stop: 2.0,
            steps: 20,
        };
        Self { r1: axis, r2: axis }
    }

    pub fn square(axis: Axis) -> Self {
        Self { r1: axis, r2: axis }
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// One axis spec used for both gains, or two separated by a comma.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(',') {
            Some((a, b)) => Ok(Self {
                r1: a.parse()?,
                r2: b.parse()?,
            }),
            None => Ok(Self::square(s.parse()?)),
        }
    }
}

/// Which state a scan evaluates at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanTarget {
    Family(FamilyTag),
    /// Two modes through both amplifiers.
    BalancedSu11,
}

/// State generator for a grid scan: fixed phases and mode count, gains
/// supplied per point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSpec {
    pub target: ScanTarget,
    pub modes: usize,
    pub theta: f64,
    pub phi: f64,
}

impl ScanSpec {
    pub fn family(tag: FamilyTag, modes: usize, theta: f64, phi: f64) -> Self {
        Self {
            target: ScanTarget::Family(tag),
            modes,
            theta,
            phi,
        }
    }

    pub fn balanced(theta: f64) -> Self {
        Self {
            target: ScanTarget::BalancedSu11,
            modes: 2,
            theta,
            phi: 0.0,
        }
    }

    pub fn state_at(&self, r1: f64, r2: f64) -> Result<GaussianState> {
        let p = InterferometerParams::new(r1, r2, self.theta, self.phi)?;
        match self.target {
            ScanTarget::Family(tag) => build_family(tag, self.modes, &p),
            ScanTarget::BalancedSu11 => build_balanced_su11(&p),
        }
    }
}

/// `L_μ` over a grid for a list of bipartitions.
#[derive(Clone, Debug, PartialEq)]
pub struct LmuScan {
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    pub bipartitions: Vec<Bipartition>,
    /// Indexed `[(i1 * r2.len() + i2) * bipartitions.len() + ib]`.
    pub values: Vec<f64>,
}

/// One scanned value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmuPoint {
    pub r1: f64,
    pub r2: f64,
    pub l_mu: f64,
}

impl LmuScan {
    pub fn get(&self, i1: usize, i2: usize, ib: usize) -> f64 {
        self.values[(i1 * self.r2.len() + i2) * self.bipartitions.len() + ib]
    }

    /// Every grid value for bipartition `ib`, r1-major.
    pub fn points(&self, ib: usize) -> Vec<LmuPoint> {
        let mut out = Vec::with_capacity(self.r1.len() * self.r2.len());
        for (i1, &r1) in self.r1.iter().enumerate() {
            for (i2, &r2) in self.r2.iter().enumerate() {
                out.push(LmuPoint {
                    r1,
                    r2,
                    l_mu: self.get(i1, i2, ib),
                });
            }
        }
        out
    }

    /// Rows `(r1, r2, bipartition, L_μ)` ordered by r1, then r2, then bipartition.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, &Bipartition, f64)> + '_ {
        let nb = self.bipartitions.len();
        let n2 = self.r2.len();
        self.values.iter().enumerate().map(move |(idx, &v)| {
            let ib = idx % nb;
            let i2 = (idx / nb) % n2;
            let i1 = idx / (nb * n2);
            (self.r1[i1], self.r2[i2], &self.bipartitions[ib], v)
        })
    }

    pub fn verdicts(&self) -> Vec<NegativityVerdict> {
        (0..self.bipartitions.len())
            .map(|ib| {
                NegativityVerdict::from_points(self.bipartitions[ib].clone(), self.points(ib))
            })
            .collect()
    }
}

/// Evaluates `L_μ` at every grid point for every bipartition. Grid points are
/// processed in parallel; the result order does not depend on scheduling.
pub fn scan_lmu(spec: &ScanSpec, bipartitions: &[Bipartition], grid: &Grid) -> Result<LmuScan> {
    let r1 = grid.r1.values();
    let r2 = grid.r2.values();
    if r1.is_empty() || r2.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if bipartitions.is_empty() {
        return Err(Error::InvalidBipartition("no bipartitions to scan".into()));
    }
    let n2 = r2.len();
    let per_point: Vec<Vec<f64>> = (0..r1.len() * n2)
        .into_par_iter()
        .map(|idx| {
            let state = spec.state_at(r1[idx / n2], r2[idx % n2])?;
            bipartitions
                .iter()
                .map(|b| log_min_ppt(&state, b))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(LmuScan {
        r1,
        r2,
        bipartitions: bipartitions.to_vec(),
        values: per_point.into_iter().flatten().collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    /// `L_μ < −ε` at every grid point.
    Always,
    /// Negative somewhere, but not everywhere.
    Partial,
    /// `L_μ ≥ −ε` at every grid point.
    Never,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Always => "always",
            Verdict::Partial => "partial",
            Verdict::Never => "none",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "always" | "always exist" => Ok(Verdict::Always),
            "partial" | "partially exist" => Ok(Verdict::Partial),
            "none" => Ok(Verdict::Never),
            other => Err(Error::InvalidParameter {
                name: "verdict",
                reason: format!("unknown verdict `{other}`"),
            }),
        }
    }
}

/// Classification of one bipartition over a grid, with the scanned values.
#[derive(Clone, Debug, PartialEq)]
pub struct NegativityVerdict {
    pub bipartition: Bipartition,
    pub verdict: Verdict,
    pub witnesses: Vec<LmuPoint>,
}

impl NegativityVerdict {
    pub fn from_points(bipartition: Bipartition, witnesses: Vec<LmuPoint>) -> Self {
        let negative = witnesses
            .iter()
            .filter(|p| p.l_mu < -NEGATIVITY_EPS)
            .count();
        let verdict = match negative {
            0 => Verdict::Never,
            n if n == witnesses.len() => Verdict::Always,
            _ => Verdict::Partial,
        };
        Self {
            bipartition,
            verdict,
            witnesses,
        }
    }

    pub fn negative_count(&self) -> usize {
        self.witnesses
            .iter()
            .filter(|p| p.l_mu < -NEGATIVITY_EPS)
            .count()
    }

    pub fn min_l_mu(&self) -> f64 {
        self.witnesses
            .iter()
            .map(|p| p.l_mu)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scans one bipartition and classifies it.
pub fn classify_negativity(
    spec: &ScanSpec,
    bip: &Bipartition,
    grid: &Grid,
) -> Result<NegativityVerdict> {
    let scan = scan_lmu(spec, std::slice::from_ref(bip), grid)?;
    Ok(NegativityVerdict::from_points(bip.clone(), scan.points(0)))
}

/// Structural rule of thumb for negativity at every gain: either the two
/// groups hold 2 and 3 modes, or subsets of them make up the idler and signal
/// modes of two adjacent time slots. Modes are numbered so that odd indices
/// are idlers and `2t − 1, 2t` share a slot.
///
/// This is a heuristic for comparison with scan results, not a criterion.
pub fn structural_negativity_hint(bip: &Bipartition) -> bool {
    let (na, nb) = (bip.set_a().len(), bip.set_b().len());
    if (na, nb) == (2, 3) || (na, nb) == (3, 2) {
        return true;
    }
    let in_a = |k: usize| bip.set_a().contains(&k);
    let in_b = |k: usize| bip.set_b().contains(&k);
    (1..bip.universe())
        .step_by(2)
        .filter(|&s| s + 3 <= bip.universe())
        .any(|s| {
            let block = s..s + 4;
            block.clone().all(|k| in_a(k) || in_b(k))
                && block.clone().any(in_a)
                && block.clone().any(in_b)
        })
}
