//! Closed-form covariance matrices of the four output families.
//!
//! The general expressions are banded: only the diagonals at offsets 0..3 are
//! non-zero. Small systems whose structure differs from the banded pattern are
//! written out explicitly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{CMatrix, GaussianState};
use crate::interferometer::{build_family, InterferometerParams};

pub use crate::interferometer::FamilyTag;

fn is_odd(k: usize) -> bool {
    k % 2 == 1
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// 1-based banded block filler that keeps `A` Hermitian and `B` symmetric.
struct Blocks {
    a: CMatrix,
    b: CMatrix,
}

impl Blocks {
    fn new(m: usize) -> Self {
        Self {
            a: CMatrix::zeros(m, m),
            b: CMatrix::zeros(m, m),
        }
    }

    fn diag(&mut self, k: usize, v: f64) {
        self.a[(k - 1, k - 1)] = real(v);
    }

    /// Sets `A(k, l) = v` and `A(l, k) = v*`.
    fn a(&mut self, k: usize, l: usize, v: Complex64) {
        self.a[(k - 1, l - 1)] = v;
        self.a[(l - 1, k - 1)] = v.conj();
    }

    fn b(&mut self, k: usize, l: usize, v: Complex64) {
        self.b[(k - 1, l - 1)] = v;
        self.b[(l - 1, k - 1)] = v;
    }

    fn finish(self) -> Result<GaussianState> {
        GaussianState::from_blocks(self.a, self.b)
    }
}

fn su11(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    let g = p.gains();
    let e = Complex64::from_polar(1.0, p.theta);
    let mut s = Blocks::new(m);
    if m == 2 {
        // Only the second amplifier acts.
        s.diag(1, g.v2);
        s.diag(2, g.v2);
        s.b(1, 2, e * 2.0 * g.c2);
        return s.finish();
    }
    let (mu2sq, nu2sq) = (g.mu2 * g.mu2, g.nu2 * g.nu2);
    let head_idler = g.v1 * nu2sq + mu2sq;
    let head_signal = g.v1 * mu2sq + nu2sq;
    let odd_m = is_odd(m);
    for k in 1..=m {
        let v = if k == 1 || (!odd_m && k == m) {
            head_idler
        } else if k == 2 || (!odd_m && k == m - 1) {
            head_signal
        } else if odd_m && k == m {
            g.v1
        } else {
            g.v1 * g.v2
        };
        s.diag(k, v);
    }
    for k in 1..=m - 2 {
        // A(k, k+2) carries e^{iθ} for odd k and e^{-iθ} for even k.
        let phase = if is_odd(k) { e } else { e.conj() };
        let amp = if odd_m && k == m - 2 {
            2.0 * g.c1 * g.nu2
        } else {
            2.0 * g.c1 * g.c2
        };
        s.a(k, k + 2, phase * amp);
    }
    for k in 1..m {
        let v = if k == 1 || (!odd_m && k == m - 1) {
            e * g.c2 * (g.v1 + 1.0)
        } else if odd_m && k == m - 1 {
            real(2.0 * g.c1 * g.mu2)
        } else if is_odd(k) {
            e * 2.0 * g.v1 * g.c2
        } else {
            real(2.0 * g.c1 * mu2sq)
        };
        s.b(k, k + 1, v);
    }
    for k in (1..m.saturating_sub(2)).filter(|&k| is_odd(k)) {
        s.b(k, k + 3, e * e * 2.0 * g.c1 * nu2sq);
    }
    s.finish()
}

fn su11_sub(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    let g = p.gains();
    let e = Complex64::from_polar(1.0, p.theta);
    let mut s = Blocks::new(m);
    for k in 1..=m {
        s.diag(k, g.v1 * g.v2);
    }
    for k in 1..m.saturating_sub(1) {
        let phase = if is_odd(k) { e } else { e.conj() };
        s.a(k, k + 2, phase * 2.0 * g.c1 * g.c2);
    }
    for k in 1..m {
        let v = if is_odd(k) {
            e * 2.0 * g.v1 * g.c2
        } else {
            real(2.0 * g.c1 * g.mu2 * g.mu2)
        };
        s.b(k, k + 1, v);
    }
    for k in (1..m.saturating_sub(2)).filter(|&k| is_odd(k)) {
        s.b(k, k + 3, e * e * 2.0 * g.c1 * g.nu2 * g.nu2);
    }
    s.finish()
}

fn bs(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    let g = p.gains();
    let ep = Complex64::from_polar(1.0, p.phi);
    if m == 2 {
        // The beam splitter alone maps vacuum to vacuum.
        return GaussianState::vacuum(2);
    }
    let mut s = Blocks::new(m);
    let odd_m = is_odd(m);
    let half_plus = (g.v1 + 1.0) / 2.0;
    let half_minus = (g.v1 - 1.0) / 2.0;
    for k in 1..=m {
        let edge = k <= 2 || (!odd_m && k >= m - 1);
        s.diag(k, if edge { half_plus } else { g.v1 });
    }
    s.a(1, 2, real(-half_minus));
    if !odd_m {
        s.a(m - 1, m, real(half_minus));
    }
    let root2 = std::f64::consts::SQRT_2;
    for k in 1..m {
        if odd_m && k == m - 1 {
            s.b(k, k + 1, real(root2 * g.c1));
        } else if !is_odd(k) {
            s.b(k, k + 1, ep * g.c1);
        }
    }
    for k in 1..=m - 2 {
        if odd_m && k == m - 2 {
            s.b(k, k + 2, real(-root2 * g.c1));
        } else {
            let sign = if is_odd(k) { -1.0 } else { 1.0 };
            s.b(k, k + 2, ep * sign * g.c1);
        }
    }
    for k in (1..m - 2).filter(|&k| is_odd(k)) {
        s.b(k, k + 3, -ep * g.c1);
    }
    s.finish()
}

fn bs_sub(m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    let g = p.gains();
    let ep = Complex64::from_polar(1.0, p.phi);
    let mut s = Blocks::new(m);
    for k in 1..=m {
        s.diag(k, g.v1);
    }
    for k in (1..m).filter(|&k| !is_odd(k)) {
        s.b(k, k + 1, ep * g.c1);
    }
    for k in 1..m.saturating_sub(1) {
        let sign = if is_odd(k) { -1.0 } else { 1.0 };
        s.b(k, k + 2, ep * sign * g.c1);
    }
    for k in (1..m.saturating_sub(2)).filter(|&k| is_odd(k)) {
        s.b(k, k + 3, -ep * g.c1);
    }
    s.finish()
}

/// Closed-form state of `tag` with `m ≥ 2` modes.
pub fn analytic_state(tag: FamilyTag, m: usize, p: &InterferometerParams) -> Result<GaussianState> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 modes, got {m}"
        )));
    }
    match tag {
        FamilyTag::Su11 => su11(m, p),
        FamilyTag::Su11Sub => su11_sub(m, p),
        FamilyTag::Bs => bs(m, p),
        FamilyTag::BsSub => bs_sub(m, p),
    }
}

/// Largest entrywise deviation between the closed form and the state built
/// operator by operator, divided by `max(1, max |entry|)` of the built state.
pub fn crosscheck(tag: FamilyTag, m: usize, p: &InterferometerParams) -> Result<f64> {
    let built = build_family(tag, m, p)?;
    let closed = analytic_state(tag, m, p)?;
    let scale = crate::gaussian::max_abs(built.a())
        .max(crate::gaussian::max_abs(built.b()))
        .max(1.0);
    Ok(built.max_deviation(&closed)? / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_operator_construction() {
        let p = InterferometerParams::new(0.83, 1.37, 2.2, -0.6).unwrap();
        for tag in FamilyTag::ALL {
            for m in 2..=12 {
                let dev = crosscheck(tag, m, &p).unwrap();
                assert!(dev < 1e-12, "{tag} M={m}: {dev:e}");
            }
        }
    }

    #[test]
    fn three_mode_su11_entries() {
        let p = InterferometerParams::new(0.5, 0.9, 0.7, 0.0).unwrap();
        let g = p.gains();
        let st = analytic_state(FamilyTag::Su11, 3, &p).unwrap();
        let e = Complex64::from_polar(1.0, 0.7);
        assert!((st.a()[(2, 2)].re - g.v1).abs() < 1e-14);
        assert!((st.a()[(0, 2)] - e * 2.0 * g.c1 * g.nu2).norm() < 1e-14);
        assert!((st.b()[(1, 2)].re - 2.0 * g.c1 * g.mu2).abs() < 1e-14);
        assert!((st.b()[(0, 1)] - e * g.c2 * (g.v1 + 1.0)).norm() < 1e-13);
    }

    #[test]
    fn beam_splitter_families_ignore_theta() {
        let a = InterferometerParams::new(0.7, 0.2, 0.0, 0.4).unwrap();
        let b = InterferometerParams::new(0.7, 1.9, 2.5, 0.4).unwrap();
        for tag in [FamilyTag::Bs, FamilyTag::BsSub] {
            let x = analytic_state(tag, 7, &a).unwrap();
            let y = analytic_state(tag, 7, &b).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn rejects_single_mode() {
        let p = InterferometerParams::new(0.1, 0.1, 0.0, 0.0).unwrap();
        assert!(analytic_state(FamilyTag::Su11, 1, &p).is_err());
    }
}
