//! Browser bindings. Each exported function returns a flat row-major
//! `Float64Array`; the page draws it on a canvas.

use biphoton::amplitude::biphoton_amplitude;
use biphoton::phase::ring_radius;
use biphoton::ring::{ring_map, symmetric_axis};
use biphoton::{amplitude_grid, schmidt_spectrum, CrystalPumpParams, GridSpec, Result};
use wasm_bindgen::prelude::*;

fn params(waist_um: f64, bandwidth_factor: f64) -> Result<CrystalPumpParams> {
    let mut p = CrystalPumpParams::reference();
    p.pump_waist_um = waist_um;
    p.pump_spectral_width *= bandwidth_factor;
    p.validate()?;
    Ok(p)
}

fn k_ring(p: &CrystalPumpParams) -> Result<f64> {
    ring_radius(p)?.ok_or_else(|| biphoton::Error::Domain("no degenerate ring".into()))
}

pub fn ring(points: usize, lambda_nm: f64, waist_um: f64) -> Result<Vec<f64>> {
    let p = params(waist_um, 1.0)?;
    let axis = symmetric_axis(points.max(2), 1.4 * k_ring(&p)?);
    let map = ring_map(&p, &axis, &axis, lambda_nm)?;
    Ok(map.normalized_to_unit_max().values.iter().map(|v| v.unwrap_or(0.0)).collect())
}

/// |Ψ|² over `(k_s, k_i)` at fixed wavelengths; rows follow k_s.
pub fn joint_kk(n_k: usize, lambda_s_nm: f64, lambda_i_nm: f64, waist_um: f64) -> Result<Vec<f64>> {
    let p = params(waist_um, 1.0)?;
    let mut g = GridSpec::reference(k_ring(&p)?, p.degenerate_wavelength_nm());
    g.n_k = n_k.max(1);
    g.k_step *= 70.0 / g.n_k as f64;
    let ks = g.k_axis(biphoton::Arm::Signal);
    let ki = g.k_axis(biphoton::Arm::Idler);
    let mut out = Vec::with_capacity(ks.len() * ki.len());
    for &a in &ks {
        for &b in &ki {
            out.push(biphoton_amplitude(a, lambda_s_nm, b, lambda_i_nm, &p)?.norm_sqr());
        }
    }
    let max = out.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    Ok(out)
}

/// Schmidt number on a grid coarsened by `coarsen` along each axis.
pub fn schmidt(coarsen: usize, waist_um: f64, bandwidth_factor: f64) -> Result<f64> {
    let p = params(waist_um, bandwidth_factor)?;
    let f = coarsen.max(1);
    let mut g = GridSpec::reference(k_ring(&p)?, p.degenerate_wavelength_nm());
    g.n_k /= f;
    g.n_lambda /= f;
    g.k_step *= f as f64;
    g.lambda_step *= f as f64;
    Ok(schmidt_spectrum(&amplitude_grid(&p, &g)?)?.schmidt_number)
}

fn js(e: biphoton::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = ringMap)]
pub fn ring_map_js(points: usize, lambda_nm: f64, waist_um: f64) -> std::result::Result<Vec<f64>, JsError> {
    ring(points, lambda_nm, waist_um).map_err(js)
}

#[wasm_bindgen(js_name = jointKkMap)]
pub fn joint_kk_js(n_k: usize, lambda_s_nm: f64, lambda_i_nm: f64, waist_um: f64) -> std::result::Result<Vec<f64>, JsError> {
    joint_kk(n_k, lambda_s_nm, lambda_i_nm, waist_um).map_err(js)
}

#[wasm_bindgen(js_name = schmidtNumber)]
pub fn schmidt_js(coarsen: usize, waist_um: f64, bandwidth_factor: f64) -> std::result::Result<f64, JsError> {
    schmidt(coarsen, waist_um, bandwidth_factor).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_is_normalized() {
        let v = ring(21, 800.0, 70.0).unwrap();
        assert_eq!(v.len(), 441);
        assert!((v.iter().copied().fold(0.0, f64::max) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn joint_map_peaks_near_antidiagonal() {
        let n = 35;
        let v = joint_kk(n, 800.0, 800.0, 70.0).unwrap();
        let (idx, _) = v.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        let (r, c) = (idx / n, idx % n);
        assert!((r + c).abs_diff(n - 1) <= 2, "peak at ({r}, {c})");
    }

    #[test]
    fn schmidt_at_least_one() {
        assert!(schmidt(5, 70.0, 1.0).unwrap() >= 1.0);
    }

    #[test]
    fn bad_waist_rejected() {
        assert!(ring(5, 800.0, -1.0).is_err());
    }
}
