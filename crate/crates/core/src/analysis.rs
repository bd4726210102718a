//! Estimators on a frozen accumulator: region-summed covariance, g² in sum
//! coordinates, mode sizes and the reference-free efficiency.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::accum::CorrelationAccumulator;
use crate::amplitude::AmplitudeGrid;
use crate::error::{Error, Result};
use crate::fit::{gaussian_fit_1d_with, FitOptions, GaussianFitResult};
use crate::grid::{Arm, GridSpec};
use crate::map::Map2;

/// Value with a one-sigma statistical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    /// Distance of the value above `threshold` in units of the error.
    pub fn sigmas_above(&self, threshold: f64) -> f64 {
        if self.error > 0.0 {
            (self.value - threshold) / self.error
        } else if self.value > threshold {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Partition of each axis into contiguous sub-regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubRegions {
    pub lambda_s: Vec<Range<usize>>,
    pub lambda_i: Vec<Range<usize>>,
    pub k_s: Vec<Range<usize>>,
    pub k_i: Vec<Range<usize>>,
}

/// Split `0..n` into `parts` contiguous ranges whose sizes differ by at most one.
pub fn split_equal(n: usize, parts: usize) -> Result<Vec<Range<usize>>> {
    if parts == 0 || parts > n {
        return Err(Error::EmptyRegion(format!("cannot split {n} bins into {parts} parts")));
    }
    Ok((0..parts).map(|p| p * n / parts..(p + 1) * n / parts).collect())
}

impl SubRegions {
    pub fn equal(grid: &GridSpec, parts: usize) -> Result<Self> {
        let l = split_equal(grid.n_lambda, parts)?;
        let k = split_equal(grid.n_k, parts)?;
        Ok(SubRegions {
            lambda_s: l.clone(),
            lambda_i: l,
            k_s: k.clone(),
            k_i: k,
        })
    }

    /// Panel pairs `(signal region, idler region)` expected to carry the pair
    /// correlation for mirror-image windows: signal region `j` with idler
    /// region `parts − 1 − j`.
    pub fn matched_pairs(parts: usize) -> Vec<(usize, usize)> {
        (0..parts).map(|j| (j, parts - 1 - j)).collect()
    }
}

fn check_range(name: &str, r: &Range<usize>, len: usize) -> Result<()> {
    if r.is_empty() || r.end > len {
        return Err(Error::EmptyRegion(format!("{name} sub-region {r:?} invalid for {len} bins")));
    }
    Ok(())
}

/// Σ over `λ_s ∈ lambda_s`, `λ_i ∈ lambda_i` of the covariance, over `(k_s, k_i)`.
pub fn region_summed_cov_kk(
    acc: &CorrelationAccumulator,
    lambda_s: &Range<usize>,
    lambda_i: &Range<usize>,
) -> Result<Map2> {
    let g = acc.grid;
    check_range("lambda_s", lambda_s, g.n_lambda)?;
    check_range("lambda_i", lambda_i, g.n_lambda)?;
    let n = frames(acc)?;
    let ss: Vec<u64> = (0..g.n_k)
        .map(|a| lambda_s.clone().map(|c| acc.singles_s[g.arm_bin(a, c)]).sum())
        .collect();
    let si: Vec<u64> = (0..g.n_k)
        .map(|b| lambda_i.clone().map(|d| acc.singles_i[g.arm_bin(b, d)]).sum())
        .collect();
    let mut out = Vec::with_capacity(g.n_k * g.n_k);
    for a in 0..g.n_k {
        for b in 0..g.n_k {
            let mut c_sum = 0u64;
            for c in lambda_s.clone() {
                for d in lambda_i.clone() {
                    c_sum += acc.coincidence(g.arm_bin(a, c), g.arm_bin(b, d));
                }
            }
            out.push(cov_from_sums(c_sum, ss[a], si[b], n));
        }
    }
    Ok(Map2::from_dense(
        "k_s [rad/mm]",
        g.k_axis(Arm::Signal),
        "k_i [rad/mm]",
        g.k_axis(Arm::Idler),
        out,
    ))
}

/// Σ over `k_s ∈ k_s`, `k_i ∈ k_i` of the covariance, over `(λ_s, λ_i)`.
pub fn region_summed_cov_ll(
    acc: &CorrelationAccumulator,
    k_s: &Range<usize>,
    k_i: &Range<usize>,
) -> Result<Map2> {
    let g = acc.grid;
    check_range("k_s", k_s, g.n_k)?;
    check_range("k_i", k_i, g.n_k)?;
    let n = frames(acc)?;
    let ss: Vec<u64> = (0..g.n_lambda)
        .map(|c| k_s.clone().map(|a| acc.singles_s[g.arm_bin(a, c)]).sum())
        .collect();
    let si: Vec<u64> = (0..g.n_lambda)
        .map(|d| k_i.clone().map(|b| acc.singles_i[g.arm_bin(b, d)]).sum())
        .collect();
    let mut out = Vec::with_capacity(g.n_lambda * g.n_lambda);
    for c in 0..g.n_lambda {
        for d in 0..g.n_lambda {
            let mut c_sum = 0u64;
            for a in k_s.clone() {
                for b in k_i.clone() {
                    c_sum += acc.coincidence(g.arm_bin(a, c), g.arm_bin(b, d));
                }
            }
            out.push(cov_from_sums(c_sum, ss[c], si[d], n));
        }
    }
    Ok(Map2::from_dense(
        "lambda_s [nm]",
        g.lambda_axis(Arm::Signal),
        "lambda_i [nm]",
        g.lambda_axis(Arm::Idler),
        out,
    ))
}

fn frames(acc: &CorrelationAccumulator) -> Result<f64> {
    if acc.n_frames < 2 {
        return Err(Error::InsufficientData(format!(
            "{} frames accumulated, need at least 2",
            acc.n_frames
        )));
    }
    Ok(acc.n_frames as f64)
}

fn cov_from_sums(c: u64, s: u64, i: u64, n: f64) -> f64 {
    c as f64 / n - (s as u128 * i as u128) as f64 / (n * n)
}

/// A map summed over one sub-region of each arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub signal_region: usize,
    pub idler_region: usize,
    pub map: Map2,
}

/// Panel kinds: `(k_s, k_i)` maps summed over wavelength sub-regions, or
/// `(λ_s, λ_i)` maps summed over wavevector sub-regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PanelKind {
    Kk,
    LambdaLambda,
}

impl PanelKind {
    pub fn tag(&self) -> &'static str {
        match self {
            PanelKind::Kk => "kk",
            PanelKind::LambdaLambda => "ll",
        }
    }
}

fn regions_for(regions: &SubRegions, kind: PanelKind) -> (&[Range<usize>], &[Range<usize>]) {
    match kind {
        PanelKind::Kk => (&regions.lambda_s, &regions.lambda_i),
        PanelKind::LambdaLambda => (&regions.k_s, &regions.k_i),
    }
}

pub fn covariance_panels(
    acc: &CorrelationAccumulator,
    regions: &SubRegions,
    kind: PanelKind,
) -> Result<Vec<Panel>> {
    let (rs, ri) = regions_for(regions, kind);
    let mut out = Vec::new();
    for (j, r_s) in rs.iter().enumerate() {
        for (k, r_i) in ri.iter().enumerate() {
            let map = match kind {
                PanelKind::Kk => region_summed_cov_kk(acc, r_s, r_i)?,
                PanelKind::LambdaLambda => region_summed_cov_ll(acc, r_s, r_i)?,
            };
            out.push(Panel { signal_region: j, idler_region: k, map });
        }
    }
    Ok(out)
}

/// Summed |Ψ|² panels laid out like [`covariance_panels`].
pub fn theory_panels(grid: &AmplitudeGrid, regions: &SubRegions, kind: PanelKind) -> Result<Vec<Panel>> {
    let (rs, ri) = regions_for(regions, kind);
    let mut out = Vec::new();
    for (j, r_s) in rs.iter().enumerate() {
        for (k, r_i) in ri.iter().enumerate() {
            let map = match kind {
                PanelKind::Kk => grid.summed_intensity_kk(r_s.clone(), r_i.clone())?,
                PanelKind::LambdaLambda => grid.summed_intensity_ll(r_s.clone(), r_i.clone())?,
            };
            out.push(Panel { signal_region: j, idler_region: k, map });
        }
    }
    Ok(out)
}

/// g² on sum coordinates. Cells are indexed `(k_s bin + k_i bin, λ_s bin + λ_i
/// bin)`; the physical coordinates follow [`GridSpec::k_plus`] and
/// [`GridSpec::lambda_plus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2SumMap {
    pub grid: GridSpec,
    pub n_frames: u64,
    /// g²; `None` where no singles product contributes.
    pub map: Map2,
    /// Summed coincidence counts per cell.
    pub coincidences: Vec<u64>,
    /// Summed singles products divided by the frame count: the coincidence
    /// count expected from accidentals alone.
    pub accidentals: Vec<f64>,
    /// Number of 4-D bins folded into each cell.
    pub contributors: Vec<u32>,
}

impl G2SumMap {
    pub fn cols(&self) -> usize {
        self.map.cols
    }

    /// g² of one cell with its Poisson error from the coincidence count.
    pub fn estimate(&self, k_plus: usize, lambda_plus: usize) -> Option<Estimate> {
        let idx = k_plus * self.cols() + lambda_plus;
        let g = self.map.values[idx]?;
        let c = self.coincidences[idx];
        let error = if c > 0 { g / (c as f64).sqrt() } else { 1.0 / self.accidentals[idx] };
        Some(Estimate { value: g, error })
    }

    /// Cell nearest `k₊ = 0`, `λ₊ = 2·lambda_degenerate`.
    pub fn centre_cell(&self, lambda_degenerate_nm: f64) -> (usize, usize) {
        (
            self.grid.nearest_k_plus(0.0),
            self.grid.nearest_lambda_plus(2.0 * lambda_degenerate_nm),
        )
    }
}

pub fn g2_sum_coordinates(acc: &CorrelationAccumulator) -> Result<G2SumMap> {
    let g = acc.grid;
    let n = frames(acc)?;
    let (nkp, nlp) = (g.n_k_plus(), g.n_lambda_plus());
    let cells = nkp * nlp;
    let mut num = vec![0u64; cells];
    let mut den = vec![0u128; cells];
    let mut contributors = vec![0u32; cells];
    let per_arm = g.bins_per_arm();
    for a in 0..g.n_k {
        for c in 0..g.n_lambda {
            let s_bin = g.arm_bin(a, c);
            let s = acc.singles_s[s_bin] as u128;
            let row = &acc.coincidences[s_bin * per_arm..(s_bin + 1) * per_arm];
            for b in 0..g.n_k {
                let base = (a + b) * nlp + c;
                for d in 0..g.n_lambda {
                    let i_bin = g.arm_bin(b, d);
                    let cell = base + d;
                    num[cell] += row[i_bin];
                    den[cell] += s * acc.singles_i[i_bin] as u128;
                    contributors[cell] += 1;
                }
            }
        }
    }
    let accidentals: Vec<f64> = den.iter().map(|d| *d as f64 / n).collect();
    let values = num
        .iter()
        .zip(&accidentals)
        .map(|(c, a)| (*a > 0.0).then(|| *c as f64 / a))
        .collect();
    let map = Map2::new(
        "k_plus [rad/mm]",
        (0..nkp).map(|i| g.k_plus(i)).collect(),
        "lambda_plus [nm]",
        (0..nlp).map(|i| g.lambda_plus(i)).collect(),
        values,
    );
    Ok(G2SumMap {
        grid: g,
        n_frames: acc.n_frames,
        map,
        coincidences: num,
        accidentals,
        contributors,
    })
}

/// Line through the sum-coordinate map, summed over a band of neighbouring
/// lines (numerator and accidentals separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub coords: Vec<f64>,
    pub coincidences: Vec<u64>,
    pub accidentals: Vec<f64>,
}

impl CrossSection {
    pub fn g2(&self) -> Vec<Option<f64>> {
        self.coincidences
            .iter()
            .zip(&self.accidentals)
            .map(|(c, a)| (*a > 0.0).then(|| *c as f64 / a))
            .collect()
    }
}

/// Profile along k₊ at λ₊ index `lambda_plus`, summed over `±half_band` rows.
pub fn k_cross_section(g2: &G2SumMap, lambda_plus: usize, half_band: usize) -> CrossSection {
    let lo = lambda_plus.saturating_sub(half_band);
    let hi = (lambda_plus + half_band + 1).min(g2.map.cols);
    let coords = g2.map.row_coords.clone();
    let mut coincidences = vec![0; coords.len()];
    let mut accidentals = vec![0.0; coords.len()];
    for (r, (c_out, a_out)) in coincidences.iter_mut().zip(&mut accidentals).enumerate() {
        for col in lo..hi {
            let idx = r * g2.map.cols + col;
            *c_out += g2.coincidences[idx];
            *a_out += g2.accidentals[idx];
        }
    }
    CrossSection { coords, coincidences, accidentals }
}

/// Profile along λ₊ at k₊ index `k_plus`, summed over `±half_band` columns.
pub fn lambda_cross_section(g2: &G2SumMap, k_plus: usize, half_band: usize) -> CrossSection {
    let lo = k_plus.saturating_sub(half_band);
    let hi = (k_plus + half_band + 1).min(g2.map.rows);
    let coords = g2.map.col_coords.clone();
    let mut coincidences = vec![0; coords.len()];
    let mut accidentals = vec![0.0; coords.len()];
    for row in lo..hi {
        for col in 0..coords.len() {
            let idx = row * g2.map.cols + col;
            coincidences[col] += g2.coincidences[idx];
            accidentals[col] += g2.accidentals[idx];
        }
    }
    CrossSection { coords, coincidences, accidentals }
}

const IRLS_ROUNDS: usize = 6;

/// Gaussian fit of a g² cross-section with the accidental baseline held at 1.
///
/// The coincidence count of point `x` is Poisson with mean `g(x)·a(x)`, so
/// `var g = g(x)/a(x)`; weights are refreshed from the fitted model.
pub fn fit_cross_section(cs: &CrossSection) -> Result<GaussianFitResult> {
    let pts: Vec<(f64, f64, f64)> = cs
        .coords
        .iter()
        .zip(&cs.coincidences)
        .zip(&cs.accidentals)
        .filter(|(_, a)| **a > 0.0)
        .map(|((x, c), a)| (*x, *c as f64 / a, *a))
        .collect();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let opts = FitOptions { fixed_offset: Some(1.0) };
    let mut weights: Vec<f64> = pts.iter().map(|p| p.2).collect();
    let mut fit = gaussian_fit_1d_with(&xs, &ys, Some(&weights), opts)?;
    for _ in 1..IRLS_ROUNDS {
        for (w, p) in weights.iter_mut().zip(&pts) {
            *w = p.2 / fit.eval(p.0).max(1e-3);
        }
        fit = gaussian_fit_1d_with(&xs, &ys, Some(&weights), opts)?;
    }
    Ok(fit)
}

/// Fitted cross-section and the single-photon mode size derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSize {
    pub fit: GaussianFitResult,
    /// `σ_fit/√2`, the Jacobian of the change to sum coordinates.
    pub mode: Estimate,
}

impl ModeSize {
    pub fn from_fit(fit: GaussianFitResult) -> Self {
        ModeSize {
            fit,
            mode: Estimate {
                value: fit.sigma / 2f64.sqrt(),
                error: fit.sigma_err / 2f64.sqrt(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSizes {
    pub k: ModeSize,
    pub lambda: ModeSize,
}

/// Mode sizes from the k₊ profile at `λ₊ = 2·lambda_degenerate` and the λ₊
/// profile at `k₊ = 0`.
pub fn mode_sizes(g2: &G2SumMap, lambda_degenerate_nm: f64, half_band: usize) -> Result<ModeSizes> {
    let (kc, lc) = g2.centre_cell(lambda_degenerate_nm);
    let k = fit_cross_section(&k_cross_section(g2, lc, half_band))?;
    let lambda = fit_cross_section(&lambda_cross_section(g2, kc, half_band))?;
    Ok(ModeSizes {
        k: ModeSize::from_fit(k),
        lambda: ModeSize::from_fit(lambda),
    })
}

/// Mode sizes predicted by the amplitude: Gaussian fits of Σ|Ψ|² projected
/// onto k₊ at degenerate λ₊, and onto λ₊ at `k₊ = 0`.
pub fn theory_mode_sizes(grid: &AmplitudeGrid) -> Result<ModeSizes> {
    let plus = grid.sum_coordinate_intensity();
    let g = grid.grid;
    let lc = g.nearest_lambda_plus(2.0 * grid.params.degenerate_wavelength_nm());
    let kc = g.nearest_k_plus(0.0);
    let k_prof: Vec<f64> = (0..plus.rows).map(|r| plus.get(r, lc).unwrap_or(0.0)).collect();
    let l_prof: Vec<f64> = (0..plus.cols).map(|c| plus.get(kc, c).unwrap_or(0.0)).collect();
    let opts = FitOptions { fixed_offset: Some(0.0) };
    let k = gaussian_fit_1d_with(&plus.row_coords, &k_prof, None, opts)?;
    let lambda = gaussian_fit_1d_with(&plus.col_coords, &l_prof, None, opts)?;
    Ok(ModeSizes {
        k: ModeSize::from_fit(k),
        lambda: ModeSize::from_fit(lambda),
    })
}

/// Means of the per-frame moments.
struct Means {
    n: f64,
    s: f64,
    i: f64,
    ss: f64,
    ii: f64,
    si: f64,
    ssi: f64,
    sii: f64,
    ssii: f64,
    s3: f64,
    s4: f64,
    i3: f64,
    i4: f64,
}

fn means(acc: &CorrelationAccumulator) -> Result<Means> {
    let n = frames(acc)?;
    let m = &acc.moments;
    let f = |v: u128| v as f64 / n;
    Ok(Means {
        n,
        s: f(m.s1),
        i: f(m.i1),
        ss: f(m.s2),
        ii: f(m.i2),
        si: f(m.si),
        ssi: f(m.s2i),
        sii: f(m.si2),
        ssii: f(m.s2i2),
        s3: f(m.s3),
        s4: f(m.s4),
        i3: f(m.i3),
        i4: f(m.i4),
    })
}

/// Reference-free efficiency `(⟨n_s n_i⟩ − ⟨n_s⟩⟨n_i⟩)/√(⟨n_s⟩⟨n_i⟩)` on the
/// arm totals, with a delta-method error.
pub fn efficiency_estimate(acc: &CorrelationAccumulator) -> Result<Estimate> {
    let m = means(acc)?;
    if m.s == 0.0 || m.i == 0.0 {
        return Err(Error::InsufficientData("zero mean photon number in an arm".into()));
    }
    let root = (m.s * m.i).sqrt();
    let cov = m.si - m.s * m.i;
    let value = cov / root;
    // Gradient with respect to (⟨n_s n_i⟩, ⟨n_s⟩, ⟨n_i⟩).
    let grad = [
        1.0 / root,
        -m.i / root - cov / (2.0 * m.s * root),
        -m.s / root - cov / (2.0 * m.i * root),
    ];
    // Per-frame covariance of (n_s n_i, n_s, n_i).
    let c = [
        [m.ssii - m.si * m.si, m.ssi - m.si * m.s, m.sii - m.si * m.i],
        [m.ssi - m.si * m.s, m.ss - m.s * m.s, m.si - m.s * m.i],
        [m.sii - m.si * m.i, m.si - m.s * m.i, m.ii - m.i * m.i],
    ];
    let var: f64 = (0..3)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .map(|(a, b)| grad[a] * c[a][b] * grad[b])
        .sum::<f64>()
        / m.n;
    Ok(Estimate { value, error: var.max(0.0).sqrt() })
}

/// Single-arm g² of the arm total, `⟨n(n−1)⟩/⟨n⟩²`, with a delta-method error.
pub fn arm_autocorrelation(acc: &CorrelationAccumulator, arm: Arm) -> Result<Estimate> {
    let m = means(acc)?;
    let (m1, m2, m3, m4) = match arm {
        Arm::Signal => (m.s, m.ss, m.s3, m.s4),
        Arm::Idler => (m.i, m.ii, m.i3, m.i4),
    };
    if m1 == 0.0 {
        return Err(Error::InsufficientData(format!("no {} events", arm.name())));
    }
    let z = m2 - m1;
    let value = z / (m1 * m1);
    let var_y = m2 - m1 * m1;
    let var_z = (m4 - 2.0 * m3 + m2) - z * z;
    let cov_yz = (m3 - m2) - m1 * z;
    let (gz, gy) = (1.0 / (m1 * m1), -2.0 * z / m1.powi(3));
    let var = (gz * gz * var_z + gy * gy * var_y + 2.0 * gz * gy * cov_yz) / m.n;
    Ok(Estimate { value, error: var.max(0.0).sqrt() })
}
