//! Amplitude model on realistic grids.

use std::time::Instant;

use biphoton::analysis::{theory_mode_sizes, theory_panels, PanelKind, SubRegions};
use biphoton::phase::ring_radius;
use biphoton::{amplitude_grid, schmidt_spectrum, CrystalPumpParams, GridSpec};

fn coarse(factor: usize) -> (CrystalPumpParams, GridSpec) {
    let p = CrystalPumpParams::reference();
    let k = ring_radius(&p).unwrap().unwrap();
    let mut g = GridSpec::reference(k, p.degenerate_wavelength_nm());
    g.n_k /= factor;
    g.n_lambda /= factor;
    g.k_step *= factor as f64;
    g.lambda_step *= factor as f64;
    (p, g)
}

#[test]
fn schmidt_number_converges_with_grid() {
    let t = Instant::now();
    let (p, half) = coarse(2);
    let m_half = schmidt_spectrum(&amplitude_grid(&p, &half).unwrap()).unwrap().schmidt_number;
    let full = GridSpec::reference(half.signal.k_center, half.signal.lambda_center);
    let m_full = schmidt_spectrum(&amplitude_grid(&p, &full).unwrap()).unwrap().schmidt_number;
    eprintln!("M(35x20) = {m_half:.4}, M(70x40) = {m_full:.4}, {:.1?}", t.elapsed());
    assert!(m_full >= 1.0 && m_half >= 1.0);
    assert!((m_half / m_full - 1.0).abs() < 0.1, "{m_half} vs {m_full}");
    assert!(t.elapsed().as_secs() < 300);
}

#[test]
fn matched_kk_panels_peak_on_antidiagonal() {
    let (p, g) = coarse(2);
    let amp = amplitude_grid(&p, &g).unwrap();
    let regions = SubRegions::equal(&g, 4).unwrap();
    let panels = theory_panels(&amp, &regions, PanelKind::Kk).unwrap();
    for (j, k) in SubRegions::matched_pairs(4) {
        let panel = panels
            .iter()
            .find(|q| q.signal_region == j && q.idler_region == k)
            .unwrap();
        let (r, c) = panel.map.argmax().unwrap();
        let k_sum = panel.map.row_coords[r] + panel.map.col_coords[c];
        assert!(k_sum.abs() <= 3.0 * g.k_step, "panel ({j},{k}): k_s + k_i = {k_sum}");
    }
}

#[test]
fn theory_mode_sizes_are_finite() {
    let (p, g) = coarse(2);
    let m = theory_mode_sizes(&amplitude_grid(&p, &g).unwrap()).unwrap();
    eprintln!("sigma_k = {:.3} rad/mm, sigma_lambda = {:.3} nm", m.k.mode.value, m.lambda.mode.value);
    assert!(m.k.mode.value > 0.0 && m.k.mode.value < 100.0);
    assert!(m.lambda.mode.value > 0.0 && m.lambda.mode.value < 20.0);
}
