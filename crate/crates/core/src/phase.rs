//! Longitudinal wavevectors and the type-I phase mismatch.
//!
//! Transverse wavevectors are in rad/mm, angular frequencies in rad/fs. The
//! transverse components are taken equal inside and outside the crystal.

use crate::dispersion::{vacuum_wavenumber, wavelength};
use crate::error::{Error, Result};
use crate::params::CrystalPumpParams;

/// Largest `|k_⊥| / |k|` accepted before the paraxial model is abandoned.
pub const PARAXIAL_LIMIT: f64 = 0.2;

fn check_paraxial(k_perp2: f64, k_total: f64) -> Result<()> {
    if k_perp2 > (PARAXIAL_LIMIT * k_total).powi(2) {
        return Err(Error::Domain(format!(
            "transverse wavevector {:.3} rad/mm exceeds paraxial limit {:.3} rad/mm",
            k_perp2.sqrt(),
            PARAXIAL_LIMIT * k_total
        )));
    }
    Ok(())
}

/// `k_z` of an ordinary wave with transverse wavevector `(kx, ky)`.
pub fn kz_ordinary(kx: f64, ky: f64, omega: f64, params: &CrystalPumpParams) -> Result<f64> {
    let n = params.sellmeier_o.index(wavelength(omega))?;
    let k = n * vacuum_wavenumber(omega);
    let perp2 = kx * kx + ky * ky;
    let kz2 = k * k - perp2;
    if kz2 <= 0.0 {
        return Err(Error::Domain(format!(
            "evanescent ordinary wave: |k_perp| = {:.3} >= {:.3} rad/mm",
            perp2.sqrt(),
            k
        )));
    }
    check_paraxial(perp2, k)?;
    Ok(kz2.sqrt())
}

/// `k_z` of the extraordinary pump wave with transverse wavevector `(kx, ky)`.
///
/// The optic axis lies in the x–z plane at `axis_angle_rad` from `z`. The
/// index depends on the propagation direction itself, so `k_z` is the positive
/// root of the index-ellipsoid condition
/// `(|k|² − k_∥²)/n_e² + k_∥²/n_o² = (ω/c)²`, `k_∥ = kx·sinθ_c + kz·cosθ_c`.
pub fn kz_extraordinary(kx: f64, ky: f64, omega: f64, params: &CrystalPumpParams) -> Result<f64> {
    let lambda = wavelength(omega);
    let n_o = params.sellmeier_o.index(lambda)?;
    let n_e = params.sellmeier_e.index(lambda)?;
    let k0 = vacuum_wavenumber(omega);
    let inv_e = 1.0 / (n_e * n_e);
    let diff = 1.0 / (n_o * n_o) - inv_e;
    let (s, c) = params.axis_angle_rad.sin_cos();
    let perp2 = kx * kx + ky * ky;
    let qa = inv_e + diff * c * c;
    let qb = 2.0 * diff * kx * s * c;
    let qc = inv_e * perp2 + diff * kx * kx * s * s - k0 * k0;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::Domain(format!(
            "evanescent extraordinary wave at |k_perp| = {:.3} rad/mm",
            perp2.sqrt()
        )));
    }
    let kz = (-qb + disc.sqrt()) / (2.0 * qa);
    if kz <= 0.0 {
        return Err(Error::Domain(format!(
            "extraordinary wave does not propagate forward at |k_perp| = {:.3} rad/mm",
            perp2.sqrt()
        )));
    }
    check_paraxial(perp2, (perp2 + kz * kz).sqrt())?;
    Ok(kz)
}

/// Δk_z = k_p,z(k_s + k_i, ω_s + ω_i) − k_s,z − k_i,z with both transverse
/// components given explicitly.
pub fn phase_mismatch_2d(
    k_s: [f64; 2],
    omega_s: f64,
    k_i: [f64; 2],
    omega_i: f64,
    params: &CrystalPumpParams,
) -> Result<f64> {
    let kp = kz_extraordinary(k_s[0] + k_i[0], k_s[1] + k_i[1], omega_s + omega_i, params)?;
    let ks = kz_ordinary(k_s[0], k_s[1], omega_s, params)?;
    let ki = kz_ordinary(k_i[0], k_i[1], omega_i, params)?;
    Ok(kp - ks - ki)
}

/// Phase mismatch in the `k_y = 0` plane selected by the slit.
pub fn phase_mismatch(
    k_s: f64,
    omega_s: f64,
    k_i: f64,
    omega_i: f64,
    params: &CrystalPumpParams,
) -> Result<f64> {
    phase_mismatch_2d([k_s, 0.0], omega_s, [k_i, 0.0], omega_i, params)
}

/// Radius of the degenerate emission ring: the root `k > 0` of
/// `Δk_z(k, ω_p/2; −k, ω_p/2) = 0`, or `None` when the collinear configuration
/// is already phase-mismatched upward (no ring).
pub fn ring_radius(params: &CrystalPumpParams) -> Result<Option<f64>> {
    let omega = params.pump_omega() / 2.0;
    let f = |k: f64| phase_mismatch(k, omega, -k, omega, params);
    let f0 = f(0.0)?;
    if f0 >= 0.0 {
        return Ok(if f0 == 0.0 { Some(0.0) } else { None });
    }
    // Δk grows with k up to the paraxial bound: bracket by doubling, then refine.
    let k_max = PARAXIAL_LIMIT * params.sellmeier_o.index(wavelength(omega))? * vacuum_wavenumber(omega) * 0.99;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut f_lo = f0;
    let mut f_hi = f(hi)?;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if hi > k_max {
            hi = k_max;
            f_hi = f(hi)?;
            if f_hi < 0.0 {
                return Ok(None);
            }
            break;
        }
        f_hi = f(hi)?;
    }
    illinois(&f, lo, hi, f_lo, f_hi).map(Some)
}

/// Regula falsi with the Illinois modification on a sign-changing bracket.
fn illinois(
    f: &impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        if (b - a).abs() <= 1e-13 * b.abs().max(1.0) {
            return Ok(c);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
        if (fc).abs() < 1e-13 {
            return Ok(c);
        }
    }
    Ok((a * fb - b * fa) / (fb - fa))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::angular_frequency;

    fn reference() -> CrystalPumpParams {
        CrystalPumpParams::reference()
    }

    #[test]
    fn exchange_symmetry() {
        let p = reference();
        let (ws, wi) = (angular_frequency(797.0), angular_frequency(803.5));
        let a = phase_mismatch(1050.0, ws, -1080.0, wi, &p).unwrap();
        let b = phase_mismatch(-1080.0, wi, 1050.0, ws, &p).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn collinear_degenerate_is_negative() {
        let p = reference();
        let w = angular_frequency(800.0);
        assert!(phase_mismatch(0.0, w, 0.0, w, &p).unwrap() < 0.0);
    }

    #[test]
    fn bisection_oracle_agrees_with_ring_radius() {
        let p = reference();
        let w = angular_frequency(800.0);
        let f = |k: f64| phase_mismatch(k, w, -k, w, &p).unwrap();
        let (mut lo, mut hi) = (0.0, 2000.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let k = ring_radius(&p).unwrap().unwrap();
        assert!(k > 0.0);
        assert!((k - 0.5 * (lo + hi)).abs() < 1e-6, "{k} vs {lo}");
    }

    #[test]
    fn extraordinary_kz_reduces_to_index_ellipsoid_on_axis() {
        let p = reference();
        let w = angular_frequency(400.0);
        let n = crate::dispersion::index_extraordinary_effective(
            400.0,
            p.axis_angle_rad,
            &p.sellmeier_o,
            &p.sellmeier_e,
        )
        .unwrap();
        let kz = kz_extraordinary(0.0, 0.0, w, &p).unwrap();
        assert!((kz - n * vacuum_wavenumber(w)).abs() < 1e-9 * kz);
    }

    #[test]
    fn extraordinary_kz_satisfies_angle_dependent_index() {
        // The exact root must reproduce |k| = n(θ)·ω/c at its own direction.
        let p = reference();
        let w = angular_frequency(400.0);
        let (kx, ky) = (350.0, -120.0);
        let kz = kz_extraordinary(kx, ky, w, &p).unwrap();
        let norm = (kx * kx + ky * ky + kz * kz).sqrt();
        let axis = [p.axis_angle_rad.sin(), 0.0, p.axis_angle_rad.cos()];
        let cos_t = (kx * axis[0] + kz * axis[2]) / norm;
        let n = crate::dispersion::index_extraordinary_effective(
            400.0,
            cos_t.acos(),
            &p.sellmeier_o,
            &p.sellmeier_e,
        )
        .unwrap();
        assert!((norm - n * vacuum_wavenumber(w)).abs() < 1e-8 * norm);
    }

    #[test]
    fn evanescent_and_paraxial_errors() {
        let p = reference();
        let w = angular_frequency(800.0);
        assert!(matches!(kz_ordinary(1e6, 0.0, w, &p), Err(Error::Domain(_))));
        assert!(matches!(kz_ordinary(5000.0, 0.0, w, &p), Err(Error::Domain(_))));
        assert!(matches!(kz_extraordinary(1e6, 0.0, 2.0 * w, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn no_ring_below_phase_matching_angle() {
        let mut p = reference();
        p.axis_angle_rad = 28.0_f64.to_radians();
        assert_eq!(ring_radius(&p).unwrap(), None);
    }
}
