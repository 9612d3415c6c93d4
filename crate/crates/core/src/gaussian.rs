//! Complex-basis covariance matrices and the symplectic operations acting on them.
//!
//! A state of `M` bosonic modes is stored through the blocks of
//! `σ = [[A, B], [B*, A*]]` in the operator ordering `(a_1..a_M, a_1†..a_M†)`,
//! together with a displacement vector of length `2M`. Mode indices in the
//! public API are 1-based.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Absolute tolerance, scaled by the largest entry, for Hermiticity checks.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn antihermitian_residue(a: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

fn antisymmetric_residue(b: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            worst = worst.max((b[(i, j)] - b[(j, i)]).norm());
        }
    }
    worst
}

pub(crate) fn check_mode(index: usize, mode_count: usize) -> Result<()> {
    if index == 0 || index > mode_count {
        return Err(Error::InvalidMode { index, mode_count });
    }
    Ok(())
}

/// Gaussian state in the complex basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    a: CMatrix,
    b: CMatrix,
    d: DVector<Complex64>,
}

impl GaussianState {
    /// Vacuum of `m` modes: `A = I`, `B = 0`, zero displacement.
    pub fn vacuum(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDimension(
                "a state needs at least one mode".into(),
            ));
        }
        Ok(Self {
            a: CMatrix::identity(m, m),
            b: CMatrix::zeros(m, m),
            d: DVector::zeros(2 * m),
        })
    }

    /// Builds a state from its blocks. `A` must be Hermitian and `B` symmetric
    /// to within [`HERMITICITY_TOL`] relative to the largest entry; the stored
    /// blocks are exactly symmetrized.
    pub fn from_blocks(a: CMatrix, b: CMatrix) -> Result<Self> {
        let m = a.nrows();
        if m == 0 {
            return Err(Error::InvalidDimension(
                "a state needs at least one mode".into(),
            ));
        }
        if a.ncols() != m || b.nrows() != m || b.ncols() != m {
            return Err(Error::InvalidDimension(format!(
                "blocks must both be {m}x{m}, got A {}x{} and B {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        let scale = max_abs(&a).max(max_abs(&b)).max(1.0);
        let ra = antihermitian_residue(&a);
        if ra > HERMITICITY_TOL * scale {
            return Err(Error::NotPhysical(format!(
                "A is not Hermitian (residue {ra:.3e})"
            )));
        }
        let rb = antisymmetric_residue(&b);
        if rb > HERMITICITY_TOL * scale {
            return Err(Error::NotPhysical(format!(
                "B is not symmetric (residue {rb:.3e})"
            )));
        }
        let mut state = Self {
            a,
            b,
            d: DVector::zeros(2 * m),
        };
        state.symmetrize();
        Ok(state)
    }

    /// Replaces the displacement `(⟨a_1⟩..⟨a_M⟩, ⟨a_1†⟩..⟨a_M†⟩)`.
    pub fn with_displacement(mut self, d: DVector<Complex64>) -> Result<Self> {
        let expected = 2 * self.mode_count();
        if d.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: d.len(),
            });
        }
        self.d = d;
        Ok(self)
    }

    /// Displacement from the annihilation-operator means alone.
    pub fn with_amplitudes(self, alpha: &[Complex64]) -> Result<Self> {
        let m = self.mode_count();
        if alpha.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: alpha.len(),
            });
        }
        let d = DVector::from_iterator(
            2 * m,
            alpha.iter().copied().chain(alpha.iter().map(|z| z.conj())),
        );
        self.with_displacement(d)
    }

    pub fn mode_count(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn b(&self) -> &CMatrix {
        &self.b
    }

    pub fn displacement(&self) -> &DVector<Complex64> {
        &self.d
    }

    /// `⟨a_i⟩` for each mode.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.d.rows(0, self.mode_count()).iter().copied().collect()
    }

    /// The full `2M x 2M` matrix `[[A, B], [B*, A*]]`.
    pub fn sigma(&self) -> CMatrix {
        let m = self.mode_count();
        let mut s = CMatrix::zeros(2 * m, 2 * m);
        s.view_mut((0, 0), (m, m)).copy_from(&self.a);
        s.view_mut((0, m), (m, m)).copy_from(&self.b);
        s.view_mut((m, 0), (m, m))
            .copy_from(&self.b.map(|z| z.conj()));
        s.view_mut((m, m), (m, m))
            .copy_from(&self.a.map(|z| z.conj()));
        s
    }

    fn symmetrize(&mut self) {
        let a_adj = self.a.adjoint();
        self.a = (&self.a + a_adj).scale(0.5);
        let b_t = self.b.transpose();
        self.b = (&self.b + b_t).scale(0.5);
    }

    /// Largest entrywise deviation between two states of equal size.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        if self.mode_count() != other.mode_count() {
            return Err(Error::DimensionMismatch {
                expected: self.mode_count(),
                found: other.mode_count(),
            });
        }
        let da = max_abs(&(&self.a - &other.a));
        let db = max_abs(&(&self.b - &other.b));
        let dd = (&self.d - &other.d)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()));
        Ok(da.max(db).max(dd))
    }

    /// Reduced state on `keep` (1-based, strictly increasing).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        self.select_modes(keep, true)
    }

    /// Reduced state on `modes` in the given order, which may be any
    /// permutation of distinct indices.
    pub fn reorder(&self, modes: &[usize]) -> Result<Self> {
        self.select_modes(modes, false)
    }

    fn select_modes(&self, modes: &[usize], require_sorted: bool) -> Result<Self> {
        let m = self.mode_count();
        if modes.is_empty() {
            return Err(Error::InvalidModeList("mode list is empty".into()));
        }
        for &k in modes {
            check_mode(k, m)?;
        }
        for w in modes.windows(2) {
            if require_sorted && w[0] >= w[1] {
                return Err(Error::InvalidModeList(format!(
                    "modes must be strictly increasing, got {modes:?}"
                )));
            }
        }
        let mut seen = vec![false; m + 1];
        for &k in modes {
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidModeList(format!("mode {k} repeated")));
            }
        }
        let n = modes.len();
        let a = CMatrix::from_fn(n, n, |r, c| self.a[(modes[r] - 1, modes[c] - 1)]);
        let b = CMatrix::from_fn(n, n, |r, c| self.b[(modes[r] - 1, modes[c] - 1)]);
        let d = DVector::from_fn(2 * n, |r, _| {
            if r < n {
                self.d[modes[r] - 1]
            } else {
                self.d[m + modes[r - n] - 1]
            }
        });
        Ok(Self { a, b, d })
    }

    /// Real quadrature covariance matrix in interleaved order
    /// `(X_1, P_1, ..., X_M, P_M)` with `X = (a + a†)/√2`, `P = i(a† − a)/√2`.
    ///
    /// The entries are written directly from the blocks so that the vacuum maps
    /// to the identity exactly.
    pub fn to_quadrature(&self) -> Result<QuadratureCm> {
        let m = self.mode_count();
        // Non-Hermitian A or non-symmetric B would leave imaginary parts in the
        // basis change; blocks built through this module are exactly symmetric.
        let scale = max_abs(&self.a).max(max_abs(&self.b)).max(1.0);
        let residue = antihermitian_residue(&self.a).max(antisymmetric_residue(&self.b));
        if residue > HERMITICITY_TOL * scale {
            return Err(Error::NotPhysical(format!(
                "quadrature matrix would have imaginary residue {residue:.3e}"
            )));
        }
        let mut s = RMatrix::zeros(2 * m, 2 * m);
        for j in 0..m {
            for k in 0..m {
                let a = self.a[(j, k)];
                let b = self.b[(j, k)];
                s[(2 * j, 2 * k)] = a.re + b.re;
                s[(2 * j + 1, 2 * k + 1)] = a.re - b.re;
                s[(2 * j, 2 * k + 1)] = -a.im + b.im;
                s[(2 * j + 1, 2 * k)] = a.im + b.im;
            }
        }
        Ok(QuadratureCm(s))
    }
}

/// Real symmetric quadrature covariance matrix, interleaved `(X_1, P_1, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureCm(pub RMatrix);

impl QuadratureCm {
    pub fn mode_count(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }
}

/// Bogoliubov transformation `S = [[S_A, S_B], [S_B*, S_A*]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticOp {
    sa: CMatrix,
    sb: CMatrix,
}

impl SymplecticOp {
    pub fn identity(m: usize) -> Self {
        Self {
            sa: CMatrix::identity(m, m),
            sb: CMatrix::zeros(m, m),
        }
    }

    pub fn from_blocks(sa: CMatrix, sb: CMatrix) -> Result<Self> {
        let m = sa.nrows();
        if sa.ncols() != m || sb.nrows() != m || sb.ncols() != m {
            return Err(Error::InvalidDimension(
                "S_A and S_B must be square and equal in size".into(),
            ));
        }
        Ok(Self { sa, sb })
    }

    pub fn mode_count(&self) -> usize {
        self.sa.nrows()
    }

    pub fn sa(&self) -> &CMatrix {
        &self.sa
    }

    pub fn sb(&self) -> &CMatrix {
        &self.sb
    }

    pub fn full(&self) -> CMatrix {
        let m = self.mode_count();
        let mut s = CMatrix::zeros(2 * m, 2 * m);
        s.view_mut((0, 0), (m, m)).copy_from(&self.sa);
        s.view_mut((0, m), (m, m)).copy_from(&self.sb);
        s.view_mut((m, 0), (m, m))
            .copy_from(&self.sb.map(|z| z.conj()));
        s.view_mut((m, m), (m, m))
            .copy_from(&self.sa.map(|z| z.conj()));
        s
    }

    /// Largest entry of `S K S† − K` with `K = diag(I, −I)`.
    pub fn metric_defect(&self) -> f64 {
        let m = self.mode_count();
        let k = CMatrix::from_fn(2 * m, 2 * m, |r, c| match (r == c, r < m) {
            (true, true) => ONE,
            (true, false) => -ONE,
            _ => ZERO,
        });
        let s = self.full();
        max_abs(&(&s * &k * s.adjoint() - k))
    }

    /// Inverse transformation, `K S† K` in block form.
    pub fn inverse(&self) -> Self {
        Self {
            sa: self.sa.adjoint(),
            sb: -self.sb.transpose(),
        }
    }

    /// The operator that applies `self` first and then `next`.
    pub fn then(&self, next: &Self) -> Self {
        let sa = &next.sa * &self.sa + &next.sb * self.sb.map(|z| z.conj());
        let sb = &next.sa * &self.sb + &next.sb * self.sa.map(|z| z.conj());
        Self { sa, sb }
    }

    /// `σ → S σ S†`, `d → S d`, followed by exact re-symmetrization of the blocks.
    pub fn apply(&self, state: &GaussianState) -> Result<GaussianState> {
        let m = self.mode_count();
        if state.mode_count() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: state.mode_count(),
            });
        }
        let s = self.full();
        let sigma = &s * state.sigma() * s.adjoint();
        let mut out = GaussianState {
            a: sigma.view((0, 0), (m, m)).into_owned(),
            b: sigma.view((0, m), (m, m)).into_owned(),
            d: &s * &state.d,
        };
        out.symmetrize();
        Ok(out)
    }
}

fn check_pair(m: usize, i: usize, j: usize) -> Result<()> {
    check_mode(i, m)?;
    check_mode(j, m)?;
    if i == j {
        return Err(Error::DegeneratePair(i));
    }
    Ok(())
}

/// Two-mode squeezer on modes `i`, `j` with gain `r ≥ 0` and phase `theta`:
/// `a_i → cosh r a_i + e^{iθ} sinh r a_j†` and symmetrically for `a_j`.
pub fn tmsq_matrix(m: usize, i: usize, j: usize, r: f64, theta: f64) -> Result<SymplecticOp> {
    check_pair(m, i, j)?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            reason: format!("must be finite and >= 0, got {r}"),
        });
    }
    if !theta.is_finite() {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: "must be finite".into(),
        });
    }
    let mut op = SymplecticOp::identity(m);
    let (i, j) = (i - 1, j - 1);
    let mu = Complex64::new(r.cosh(), 0.0);
    let nu = Complex64::from_polar(r.sinh(), theta);
    op.sa[(i, i)] = mu;
    op.sa[(j, j)] = mu;
    op.sb[(i, j)] = nu;
    op.sb[(j, i)] = nu;
    Ok(op)
}

/// Balanced beam splitter between modes `i` and `j`, with phase `phi` on the
/// input of mode `i`:
/// `a_i → (e^{iφ} a_i − a_j)/√2`, `a_j → (e^{iφ} a_i + a_j)/√2`.
pub fn bs_matrix(m: usize, i: usize, j: usize, phi: f64) -> Result<SymplecticOp> {
    check_pair(m, i, j)?;
    if !phi.is_finite() {
        return Err(Error::InvalidParameter {
            name: "phi",
            reason: "must be finite".into(),
        });
    }
    let mut op = SymplecticOp::identity(m);
    let (i, j) = (i - 1, j - 1);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(h, phi);
    op.sa[(i, i)] = e;
    op.sa[(i, j)] = Complex64::new(-h, 0.0);
    op.sa[(j, i)] = e;
    op.sa[(j, j)] = Complex64::new(h, 0.0);
    Ok(op)
}
