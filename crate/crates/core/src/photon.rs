//! Photon-number statistics of Gaussian states.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussian::{GaussianState, RMatrix};
use crate::interferometer::{FamilyTag, InterferometerParams};

/// Mean photon numbers and their covariance matrix `K_ij = Cov(N_i, N_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonCovariance {
    pub mean: Vec<f64>,
    pub k: RMatrix,
}

/// `⟨N_i⟩ = (A_ii − 1)/2 + |⟨a_i⟩|²`.
pub fn mean_photons(state: &GaussianState) -> Vec<f64> {
    let alpha = state.amplitudes();
    (0..state.mode_count())
        .map(|i| (state.a()[(i, i)].re - 1.0) / 2.0 + alpha[i].norm_sqr())
        .collect()
}

/// Photon-number covariance of a Gaussian state.
///
/// `K = ¼(|A|² + |B|² − I) + Re[α_i* α_j A_ij + α_i* α_j* B_ij]`, with `|·|²`
/// taken entrywise and `α` the vector of mode amplitudes.
pub fn photon_covariance(state: &GaussianState) -> PhotonCovariance {
    let m = state.mode_count();
    let alpha = state.amplitudes();
    let (a, b) = (state.a(), state.b());
    let k = RMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        let fluct = 0.25 * (a[(i, j)].norm_sqr() + b[(i, j)].norm_sqr() - delta);
        let disp = (alpha[i].conj() * alpha[j] * a[(i, j)]
            + alpha[i].conj() * alpha[j].conj() * b[(i, j)])
            .re;
        fluct + disp
    });
    PhotonCovariance {
        mean: mean_photons(state),
        k,
    }
}

/// `Var(Σ_i w_i N_i) = wᵀ K w`. Round-off negatives down to −1e-12 are
/// reported as zero.
pub fn photon_lc_variance(state: &GaussianState, weights: &[f64]) -> Result<f64> {
    let m = state.mode_count();
    if weights.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: weights.len(),
        });
    }
    let k = photon_covariance(state).k;
    let w = DVector::from_column_slice(weights);
    let v = w.dot(&(&k * &w));
    Ok(if (-1e-12..0.0).contains(&v) { 0.0 } else { v })
}

fn is_odd(k: usize) -> bool {
    k % 2 == 1
}

struct Sym(RMatrix);

impl Sym {
    fn set(&mut self, k: usize, l: usize, v: f64) {
        self.0[(k - 1, l - 1)] = v;
        self.0[(l - 1, k - 1)] = v;
    }
}

/// Closed-form mean photon numbers and covariance of a family, written
/// independently of the covariance-matrix route.
pub fn closed_form_photon_stats(
    tag: FamilyTag,
    m: usize,
    p: &InterferometerParams,
) -> Result<PhotonCovariance> {
    if m < 2 {
        return Err(Error::InvalidDimension(format!(
            "need at least 2 modes, got {m}"
        )));
    }
    let g = p.gains();
    let (mu1sq, nu1sq, mu2sq, nu2sq) = (g.mu1 * g.mu1, g.nu1 * g.nu1, g.mu2 * g.mu2, g.nu2 * g.nu2);
    let (c1sq, c2sq) = (g.c1 * g.c1, g.c2 * g.c2);
    let odd_m = is_odd(m);
    let bulk_mean = 0.5 * (g.v1 * g.v2 - 1.0);
    let bulk_var = 0.25 * (g.v1 * g.v1 * g.v2 * g.v2 - 1.0);
    // Variance scale of a mode that received one half of a squeezed pair.
    let q = mu1sq * mu1sq + nu1sq * nu1sq - 1.0;
    let mut k = Sym(RMatrix::zeros(m, m));
    let mean: Vec<f64>;

    match tag {
        FamilyTag::Su11 if m == 2 => {
            mean = vec![nu2sq, nu2sq];
            for (i, j) in [(1, 1), (1, 2), (2, 2)] {
                k.set(i, j, c2sq);
            }
        }
        FamilyTag::Su11 => {
            let head = [mu1sq * nu2sq, mu1sq * mu2sq - 1.0];
            mean = (1..=m)
                .map(|i| match i {
                    1 => head[0],
                    2 => head[1],
                    _ if odd_m && i == m => nu1sq,
                    _ if !odd_m && i == m => head[0],
                    _ if !odd_m && i == m - 1 => head[1],
                    _ => bulk_mean,
                })
                .collect();
            // A thermal marginal with mean n has variance n(n + 1).
            for i in 1..=m {
                let n = mean[i - 1];
                k.set(i, i, if odd_m && i == m { c1sq } else { n * (n + 1.0) });
            }
            for i in 1..m {
                let v = if i == 1 || (!odd_m && i == m - 1) {
                    c2sq * mu1sq * mu1sq
                } else if odd_m && i == m - 1 {
                    c1sq * mu2sq
                } else if is_odd(i) {
                    g.v1 * g.v1 * c2sq
                } else {
                    c1sq * mu2sq * mu2sq
                };
                k.set(i, i + 1, v);
            }
            for i in 1..=m - 2 {
                k.set(
                    i,
                    i + 2,
                    if odd_m && i == m - 2 {
                        c1sq * nu2sq
                    } else {
                        c1sq * c2sq
                    },
                );
            }
            for i in (1..m - 2).filter(|&i| is_odd(i)) {
                k.set(i, i + 3, c1sq * nu2sq * nu2sq);
            }
        }
        FamilyTag::Su11Sub => {
            mean = vec![bulk_mean; m];
            for i in 1..=m {
                k.set(i, i, bulk_var);
            }
            for i in 1..m {
                k.set(
                    i,
                    i + 1,
                    if is_odd(i) {
                        g.v1 * g.v1 * c2sq
                    } else {
                        c1sq * mu2sq * mu2sq
                    },
                );
            }
            for i in 1..m.saturating_sub(1) {
                k.set(i, i + 2, c1sq * c2sq);
            }
            for i in (1..m.saturating_sub(2)).filter(|&i| is_odd(i)) {
                k.set(i, i + 3, c1sq * nu2sq * nu2sq);
            }
        }
        FamilyTag::Bs if m == 2 => {
            mean = vec![0.0, 0.0];
        }
        FamilyTag::Bs => {
            let edge = |i: usize| i <= 2 || (!odd_m && i >= m - 1);
            mean = (1..=m)
                .map(|i| if edge(i) { 0.5 * nu1sq } else { nu1sq })
                .collect();
            for i in 1..=m {
                k.set(
                    i,
                    i,
                    if edge(i) {
                        (mu1sq * mu1sq - 1.0) / 4.0
                    } else {
                        q / 2.0
                    },
                );
            }
            for i in 1..m {
                let v = if i == 1 || (!odd_m && i == m - 1) {
                    nu1sq * nu1sq / 4.0
                } else if odd_m && i == m - 1 {
                    q / 4.0
                } else if is_odd(i) {
                    0.0
                } else {
                    q / 8.0
                };
                k.set(i, i + 1, v);
            }
            for i in 1..=m - 2 {
                k.set(
                    i,
                    i + 2,
                    if odd_m && i == m - 2 {
                        q / 4.0
                    } else {
                        q / 8.0
                    },
                );
            }
            for i in (1..m - 2).filter(|&i| is_odd(i)) {
                k.set(i, i + 3, q / 8.0);
            }
        }
        FamilyTag::BsSub => {
            mean = vec![nu1sq; m];
            for i in 1..=m {
                k.set(i, i, q / 2.0);
            }
            for i in (1..m).filter(|&i| !is_odd(i)) {
                k.set(i, i + 1, q / 8.0);
            }
            for i in 1..m.saturating_sub(1) {
                k.set(i, i + 2, q / 8.0);
            }
            for i in (1..m.saturating_sub(2)).filter(|&i| is_odd(i)) {
                k.set(i, i + 3, q / 8.0);
            }
        }
    }
    Ok(PhotonCovariance { mean, k: k.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::analytic_state;
    use crate::gaussian::tmsq_matrix;
    use num_complex::Complex64;

    #[test]
    fn vacuum_has_no_photons() {
        let v = GaussianState::vacuum(3).unwrap();
        let pc = photon_covariance(&v);
        assert_eq!(pc.mean, vec![0.0; 3]);
        assert_eq!(pc.k, RMatrix::zeros(3, 3));
    }

    #[test]
    fn two_mode_squeezed_vacuum_statistics() {
        let r: f64 = 0.6;
        let st = tmsq_matrix(2, 1, 2, r, 0.3)
            .unwrap()
            .apply(&GaussianState::vacuum(2).unwrap())
            .unwrap();
        let n = r.sinh().powi(2);
        let pc = photon_covariance(&st);
        for i in 0..2 {
            assert!((pc.mean[i] - n).abs() < 1e-13);
        }
        // Perfect photon-number correlation: every entry is n(n + 1).
        for x in pc.k.iter() {
            assert!((x - n * (n + 1.0)).abs() < 1e-12);
        }
        assert!(photon_lc_variance(&st, &[1.0, -1.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn coherent_state_is_poissonian() {
        let alpha = Complex64::new(0.0, 1.3);
        let st = GaussianState::vacuum(1)
            .unwrap()
            .with_amplitudes(&[alpha])
            .unwrap();
        let pc = photon_covariance(&st);
        assert!((pc.mean[0] - 1.69).abs() < 1e-14);
        assert!((pc.k[(0, 0)] - 1.69).abs() < 1e-14);
    }

    #[test]
    fn closed_forms_match_covariance_route() {
        let p = InterferometerParams::new(0.71, 0.43, 1.9, 0.8).unwrap();
        for tag in FamilyTag::ALL {
            for m in 2..=11 {
                let numeric = photon_covariance(&analytic_state(tag, m, &p).unwrap());
                let closed = closed_form_photon_stats(tag, m, &p).unwrap();
                for i in 0..m {
                    assert!(
                        (numeric.mean[i] - closed.mean[i]).abs() < 1e-12,
                        "{tag} M={m} m[{i}]"
                    );
                    for j in 0..m {
                        let d = (numeric.k[(i, j)] - closed.k[(i, j)]).abs();
                        assert!(d < 1e-11, "{tag} M={m} K({},{}) off by {d:e}", i + 1, j + 1);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_length_checked() {
        let v = GaussianState::vacuum(2).unwrap();
        assert!(photon_lc_variance(&v, &[1.0]).is_err());
    }
}
