//! Integration over the unit disk against normalized area `dA = dx dy / pi`.
//!
//! In polar form `dA = dt dtheta / (2 pi)` with `t = r^2`, so a rule is a
//! tensor product of Gauss–Legendre in `t` and the trapezoid rule in
//! `theta`. Graded rules split `[0, r_cut^2]` into dyadic panels toward the
//! boundary (and toward the origin) and double the angular count per
//! boundary panel, which resolves kernels concentrated near `|z| = 1`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::analytic::C64;
use crate::error::{LabError, Result};
use crate::summation::{pairwise_sum, pairwise_sum_complex};

/// One tensor block: `radial_n` Gauss points in `t in [t_lo, t_hi]` times
/// `angular_n` equispaced angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub t_lo: f64,
    pub t_hi: f64,
    pub radial_n: usize,
    pub angular_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub panels: Vec<Panel>,
    pub r_cut: f64,
    /// Total degree `a + b` up to which `z^a conj(z)^b` is integrated exactly.
    pub exactness_degree: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<C64>,
    weights: Vec<f64>,
    grading: Grading,
}

/// Parameters of a boundary-graded rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedSpec {
    /// Gauss points per radial panel.
    pub radial_n: usize,
    /// Angular count of interior panels.
    pub angular_n: usize,
    /// Upper bound on the angular count of any panel.
    pub angular_cap: usize,
    pub r_cut: f64,
    /// Number of dyadic panels refining `t in [0, 1/2]` toward the origin.
    pub origin_levels: usize,
}

impl Default for GradedSpec {
    fn default() -> Self {
        Self {
            radial_n: 12,
            angular_n: 32,
            angular_cap: 8192,
            r_cut: 0.9999,
            origin_levels: 10,
        }
    }
}

impl GradedSpec {
    pub fn with_r_cut(mut self, r_cut: f64) -> Self {
        self.r_cut = r_cut;
        self
    }
}

pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("radial count checked positive");
    GaussLegendre::new(n)
        .iter()
        .map(|(x, w)| (*x, *w))
        .collect()
}

fn check_r_cut(r_cut: f64) -> Result<()> {
    if !(r_cut > 0.0 && r_cut < 1.0) {
        return Err(LabError::Contract(format!(
            "r_cut must lie in (0, 1), got {r_cut}"
        )));
    }
    Ok(())
}

/// Tensor rule: Gauss–Legendre in `t = r^2` on `[0, r_cut^2]`, trapezoid in
/// `theta`. Exact for `z^a conj(z)^b` with `a + b <= min(2 radial_n - 1, angular_n - 1)`.
pub fn build_disk_rule(radial_n: usize, angular_n: usize, r_cut: f64) -> Result<QuadratureRule> {
    if radial_n == 0 || angular_n == 0 {
        return Err(LabError::Contract(
            "radial_n and angular_n must be at least 1".into(),
        ));
    }
    check_r_cut(r_cut)?;
    QuadratureRule::from_panels(
        vec![Panel {
            t_lo: 0.0,
            t_hi: r_cut * r_cut,
            radial_n,
            angular_n,
        }],
        r_cut,
    )
}

/// Dyadic boundary-graded rule.
///
/// Panels in `t`: `[0, 2^-L], [2^-L, 2^-L+1], ..., [1/4, 1/2]` toward the
/// origin, then `[1 - 2^-m, 1 - 2^-(m+1)]` for `m = 1, 2, ...` until
/// `r_cut^2`. Boundary panel `m` carries `angular_n * 2^m` angles (capped).
pub fn build_graded_rule(spec: &GradedSpec) -> Result<QuadratureRule> {
    if spec.radial_n == 0 || spec.angular_n == 0 || spec.angular_cap < spec.angular_n {
        return Err(LabError::Contract(
            "graded rule needs radial_n, angular_n >= 1 and angular_cap >= angular_n".into(),
        ));
    }
    check_r_cut(spec.r_cut)?;
    let t_cut = spec.r_cut * spec.r_cut;
    let mut panels = Vec::new();
    let mut lo = 0.0;
    for level in (1..=spec.origin_levels + 1).rev() {
        let hi = 0.5f64.powi(level as i32);
        if lo >= t_cut {
            break;
        }
        panels.push(Panel {
            t_lo: lo,
            t_hi: hi.min(t_cut),
            radial_n: spec.radial_n,
            angular_n: spec.angular_n,
        });
        lo = hi;
    }
    let mut m = 1;
    while lo < t_cut {
        let hi = (1.0 - 0.5f64.powi(m as i32 + 1)).min(t_cut);
        let angular = spec
            .angular_n
            .saturating_mul(1usize << m.min(40))
            .min(spec.angular_cap);
        panels.push(Panel {
            t_lo: lo,
            t_hi: hi,
            radial_n: spec.radial_n,
            angular_n: angular,
        });
        lo = hi;
        m += 1;
    }
    QuadratureRule::from_panels(panels, spec.r_cut)
}

impl QuadratureRule {
    fn from_panels(panels: Vec<Panel>, r_cut: f64) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for panel in &panels {
            let half = 0.5 * (panel.t_hi - panel.t_lo);
            let mid = 0.5 * (panel.t_hi + panel.t_lo);
            let angles: Vec<C64> = (0..panel.angular_n)
                .map(|j| C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / panel.angular_n as f64))
                .collect();
            let aw = 1.0 / panel.angular_n as f64;
            for (x, w) in gauss_legendre(panel.radial_n) {
                let t = mid + half * x;
                let r = t.sqrt();
                for &e in &angles {
                    nodes.push(e * r);
                    weights.push(half * w * aw);
                }
            }
        }
        let exactness_degree = panels
            .iter()
            .map(|p| (2 * p.radial_n - 1).min(p.angular_n - 1))
            .min()
            .unwrap_or(0);
        Ok(Self {
            nodes,
            weights,
            grading: Grading {
                panels,
                r_cut,
                exactness_degree,
            },
        })
    }

    /// Rule from explicit nodes and weights (used for discrete test grids).
    pub fn from_parts(nodes: Vec<C64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(LabError::Contract("node/weight length mismatch".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(LabError::Contract("weights must be positive".into()));
        }
        let r_cut = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if r_cut >= 1.0 {
            return Err(LabError::Domain("quadrature node outside the disk".into()));
        }
        Ok(Self {
            nodes,
            weights,
            grading: Grading {
                panels: Vec::new(),
                r_cut,
                exactness_degree: 0,
            },
        })
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn grading(&self) -> &Grading {
        &self.grading
    }

    pub fn r_cut(&self) -> f64 {
        self.grading.r_cut
    }

    pub fn exactness_degree(&self) -> usize {
        self.grading.exactness_degree
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Weighted sum of complex node values.
    pub fn integrate(&self, values: &[C64]) -> Result<C64> {
        self.check_len(values.len())?;
        let products: Vec<C64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        Ok(pairwise_sum_complex(&products))
    }

    pub fn integrate_real(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values.len())?;
        let products: Vec<f64> = values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .collect();
        Ok(pairwise_sum(&products))
    }

    /// Integrates a real function evaluated in parallel at the nodes.
    pub fn integrate_fn<F>(&self, f: F) -> f64
    where
        F: Fn(C64) -> f64 + Sync,
    {
        use rayon::prelude::*;
        let products: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(&z, &w)| f(z) * w)
            .collect();
        pairwise_sum(&products)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.nodes.len() {
            return Err(LabError::Contract(format!(
                "expected {} node values, got {n}",
                self.nodes.len()
            )));
        }
        Ok(())
    }
}

/// Rule on the whole disk in polar coordinates about the boundary point
/// `zeta`: `z = zeta (1 - rho e^{i theta})`, `|theta| < pi/2`,
/// `rho = 2 cos(theta) s`. The `s` axis gets dyadic panels
/// `[2^-(k+1), 2^-k]` for `k < levels` plus `[0, 2^-levels]`, so integrands
/// concentrated near `zeta` at any scale down to `2^-levels` are resolved.
pub fn build_point_graded_rule(
    zeta: C64,
    radial_n: usize,
    angular_n: usize,
    levels: usize,
) -> Result<QuadratureRule> {
    if radial_n == 0 || angular_n == 0 {
        return Err(LabError::Contract("radial_n and angular_n must be at least 1".into()));
    }
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(LabError::Contract(format!("grading point must lie on the circle, got {zeta}")));
    }
    let zeta = zeta / zeta.norm();
    let mut edges: Vec<f64> = (0..=levels).map(|k| 0.5f64.powi(k as i32)).collect();
    edges.push(0.0);
    let gs = gauss_legendre(radial_n);
    let gt = gauss_legendre(angular_n);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for (x, wx) in &gt {
        let theta = 0.5 * PI * x;
        let len = 2.0 * theta.cos();
        let dir = C64::from_polar(1.0, theta);
        for pair in edges.windows(2) {
            let (hi, lo) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (y, wy) in &gs {
                let s = mid + half * y;
                let z = zeta * (C64::new(1.0, 0.0) - dir * (len * s));
                // deep nodes near theta = +-pi/2 round onto the circle; their
                // weight is below 1e-20 and they are dropped
                if z.norm() >= 1.0 - 4.0 * f64::EPSILON {
                    continue;
                }
                nodes.push(z);
                // rho drho dtheta / pi with rho = len s
                weights.push(len * len * s * half * wy * 0.5 * wx);
            }
        }
    }
    QuadratureRule::from_parts(nodes, weights)
}

/// Cut pair used for boundary extrapolation of integrals over the whole disk.
pub const BOUNDARY_CUTS: (f64, f64) = (0.99999, 0.999999);

/// Linear extrapolation to `r_cut -> 1` in the variable `h = 1 - r_cut^2`.
///
/// For integrands smooth up to the boundary the truncation deficit is
/// `c1 h + O(h^2)`, so two cuts remove the leading term.
pub fn extrapolate_to_boundary(cut_a: f64, value_a: f64, cut_b: f64, value_b: f64) -> f64 {
    let ha = 1.0 - cut_a * cut_a;
    let hb = 1.0 - cut_b * cut_b;
    (ha * value_b - hb * value_a) / (ha - hb)
}

/// Polynomial extrapolation in `h = 1 - r_cut^2` to `h = 0` (Neville).
pub fn extrapolate_cuts(cuts: &[f64], values: &[f64]) -> f64 {
    assert_eq!(cuts.len(), values.len());
    let hs: Vec<f64> = cuts.iter().map(|c| 1.0 - c * c).collect();
    let mut table = values.to_vec();
    for level in 1..table.len() {
        for i in 0..table.len() - level {
            let (h_lo, h_hi) = (hs[i], hs[i + level]);
            table[i] = (h_lo * table[i + 1] - h_hi * table[i]) / (h_lo - h_hi);
        }
    }
    table.first().copied().unwrap_or(0.0)
}

/// Integral of a real function over the whole disk, extrapolated from
/// graded rules truncated at each of `cuts`.
pub fn integrate_to_boundary<F>(spec: &GradedSpec, cuts: &[f64], f: F) -> Result<f64>
where
    F: Fn(C64) -> f64 + Sync,
{
    let mut values = Vec::with_capacity(cuts.len());
    for &c in cuts {
        values.push(build_graded_rule(&spec.with_r_cut(c))?.integrate_fn(&f));
    }
    Ok(extrapolate_cuts(cuts, &values))
}

/// Boundary-graded sampling set for sup-type statistics.
///
/// Band `m` covers `1 - 2^-m <= |z| < 1 - 2^-(m+1)` with `sub_rings` radii
/// equally spaced in `log(1 - |z|)` and `angular_base * 2^m` angles starting
/// at `theta = 0`. A final single ring sits at `1 - 2^-max_level`.
#[derive(Debug, Clone)]
pub struct RingGrid {
    points: Vec<C64>,
    bands: Vec<usize>,
    max_level: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingGridSpec {
    pub max_level: usize,
    pub sub_rings: usize,
    pub angular_base: usize,
}

impl Default for RingGridSpec {
    fn default() -> Self {
        Self {
            max_level: 14,
            sub_rings: 8,
            angular_base: 8,
        }
    }
}

impl Default for RingGrid {
    fn default() -> Self {
        RingGrid::new(&RingGridSpec::default())
    }
}

impl RingGrid {
    pub fn new(spec: &RingGridSpec) -> Self {
        let mut points = Vec::new();
        let mut bands = Vec::new();
        let sub = spec.sub_rings.max(1);
        let mut push_ring = |radius: f64, band: usize, count: usize| {
            if radius == 0.0 {
                points.push(C64::new(0.0, 0.0));
                bands.push(band);
                return;
            }
            for j in 0..count {
                points.push(C64::from_polar(radius, 2.0 * PI * j as f64 / count as f64));
                bands.push(band);
            }
        };
        for m in 0..spec.max_level {
            let count = spec.angular_base.max(1) << m;
            for j in 0..sub {
                let radius = 1.0 - 0.5f64.powf(m as f64 + j as f64 / sub as f64);
                push_ring(radius, m, count);
            }
        }
        let last = spec.max_level;
        push_ring(
            1.0 - 0.5f64.powi(last as i32),
            last,
            spec.angular_base.max(1) << last,
        );
        Self {
            points,
            bands,
            max_level: last,
        }
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn band_of(&self, idx: usize) -> usize {
        self.bands[idx]
    }

    pub fn band_count(&self) -> usize {
        self.max_level + 1
    }

    /// Inner radius `1 - 2^-m` of band `m`.
    pub fn band_radius(m: usize) -> f64 {
        1.0 - 0.5f64.powi(m as i32)
    }

    /// Per-band maxima of `values` (one value per grid point).
    pub fn band_maxima(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; self.band_count()];
        for (v, &b) in values.iter().zip(&self.bands) {
            if *v > out[b] {
                out[b] = *v;
            }
        }
        out
    }
}

/// Dyadic band index of a radius: `m` with `1 - 2^-m <= r < 1 - 2^-(m+1)`.
pub fn dyadic_band(r: f64) -> usize {
    if r <= 0.0 {
        return 0;
    }
    let m = (-(1.0 - r).log2()).floor();
    if m.is_finite() && m > 0.0 {
        m as usize
    } else {
        0
    }
}
