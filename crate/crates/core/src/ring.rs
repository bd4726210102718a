//! Far-field singles distribution at the degenerate wavelength, with both
//! transverse components free.

use rayon::prelude::*;

use crate::amplitude::{pump_envelope, sinc};
use crate::dispersion::angular_frequency;
use crate::error::Result;
use crate::map::Map2;
use crate::params::CrystalPumpParams;
use crate::phase::phase_mismatch_2d;

/// Partner offsets from the mirrored wavevector, in units of the pump's
/// transverse 1/e field width `2/w₀`.
const PARTNER_SPAN: f64 = 3.0;
const PARTNER_STEPS: i32 = 24;

/// Singles intensity `I(k) = Σ_q |Ψ(k, −k + q)|²` over a square window of
/// partner offsets `q`, evaluated at `(kx[col], ky[row])`. Both photons sit at
/// `lambda_nm`.
pub fn ring_map(params: &CrystalPumpParams, kx: &[f64], ky: &[f64], lambda_nm: f64) -> Result<Map2> {
    params.validate()?;
    let omega = angular_frequency(lambda_nm);
    let q_step = PARTNER_SPAN * 2.0 / (params.pump_waist_um * 1e-3) / PARTNER_STEPS as f64;
    let offsets: Vec<[f64; 2]> = (-PARTNER_STEPS..=PARTNER_STEPS)
        .flat_map(|i| (-PARTNER_STEPS..=PARTNER_STEPS).map(move |j| [i as f64 * q_step, j as f64 * q_step]))
        .collect();
    let rows: Vec<Result<Vec<f64>>> = ky
        .par_iter()
        .map(|&y| {
            kx.iter()
                .map(|&x| {
                    let mut acc = 0.0;
                    for q in &offsets {
                        let partner = [-x + q[0], -y + q[1]];
                        let dk = phase_mismatch_2d([x, y], omega, partner, omega, params)?;
                        let env = pump_envelope(q[0], q[1], 2.0 * omega, params).norm_sqr();
                        acc += env * sinc(params.crystal_length_mm * dk / 2.0).powi(2);
                    }
                    Ok(acc)
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(kx.len() * ky.len());
    for row in rows {
        values.extend(row?);
    }
    Ok(Map2::from_dense("k_y [rad/mm]", ky.to_vec(), "k_x [rad/mm]", kx.to_vec(), values))
}

/// Symmetric axis of `n` points spanning `[-k_max, k_max]`.
pub fn symmetric_axis(n: usize, k_max: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -k_max + 2.0 * k_max * i as f64 / (n - 1) as f64)
        .collect()
}

/// Azimuthally averaged profile: `(bin centre radius, mean intensity)` with
/// radial bins of width `dr`. Empty bins are skipped.
pub fn radial_profile(map: &Map2, dr: f64) -> Vec<(f64, f64)> {
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for (r, y) in map.row_coords.iter().enumerate() {
        for (c, x) in map.col_coords.iter().enumerate() {
            if let Some(v) = map.get(r, c) {
                let bin = ((x * x + y * y).sqrt() / dr).round() as usize;
                if sums.len() <= bin {
                    sums.resize(bin + 1, (0.0, 0));
                }
                sums[bin].0 += v;
                sums[bin].1 += 1;
            }
        }
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(i, (s, n))| (i as f64 * dr, s / n as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::ring_radius;

    #[test]
    fn ring_peaks_at_phase_matching_root() {
        let p = CrystalPumpParams::reference();
        let k_ring = ring_radius(&p).unwrap().unwrap();
        let axis = symmetric_axis(41, 1500.0);
        let step = axis[1] - axis[0];
        let map = ring_map(&p, &axis, &axis, 800.0).unwrap();
        let profile = radial_profile(&map, step);
        let (r_max, i_max) = profile
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((r_max - k_ring).abs() <= step, "{r_max} vs {k_ring}");
        let centre = map.get(20, 20).unwrap();
        assert!(centre < 0.1 * i_max);
    }

    #[test]
    fn ray_integrated_intensity_is_isotropic() {
        // Walk-off sharpens the ring on one side of the x axis, so point
        // values at k_ring differ; the intensity integrated across the ring
        // along each ray does not.
        let p = CrystalPumpParams::reference();
        let k_ring = ring_radius(&p).unwrap().unwrap();
        let radii: Vec<f64> = (0..71).map(|i| k_ring - 140.0 + 4.0 * i as f64).collect();
        let along = |dir: [f64; 2]| -> f64 {
            radii
                .iter()
                .map(|r| ring_map(&p, &[r * dir[0]], &[r * dir[1]], 800.0).unwrap().get(0, 0).unwrap())
                .sum()
        };
        let (px, mx, py) = (along([1.0, 0.0]), along([-1.0, 0.0]), along([0.0, 1.0]));
        assert!((px / py - 1.0).abs() < 0.2, "{px} vs {py}");
        assert!((mx / py - 1.0).abs() < 0.2, "{mx} vs {py}");
    }

    #[test]
    fn radial_profile_of_constant_map() {
        let axis = symmetric_axis(5, 2.0);
        let m = Map2::from_dense("y", axis.clone(), "x", axis, vec![3.0; 25]);
        assert!(radial_profile(&m, 1.0).iter().all(|(_, v)| *v == 3.0));
    }
}
