//! Geometric Carleson statistics and the Sobolev–Carleson comparison.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{check_in_disk, AnalyticFunction, TaylorPoly, C64};
use crate::error::{LabError, Result};
use crate::geometry::{disk_image, in_disk, BergmanLattice};
use crate::kernels::{default_gamma, normalized_kernel};
use crate::norms::ap_norm;
use crate::profile::{BoundaryProfile, TailReading, TailRule, Trend};
use crate::quadrature::{build_graded_rule, dyadic_band, GradedSpec, QuadratureRule};
use crate::summation::pairwise_sum;

/// Absolutely continuous part `scale (1 - |z|^2)^t prod |u_k(z)|^(q_k) dA`.
#[derive(Debug, Clone)]
pub struct Density {
    pub t: f64,
    pub scale: f64,
    pub factors: Vec<(AnalyticFunction, f64)>,
}

impl Density {
    pub fn radial(t: f64) -> Self {
        Self {
            t,
            scale: 1.0,
            factors: Vec::new(),
        }
    }

    pub fn at(&self, z: C64) -> f64 {
        let mut v = self.scale * (1.0 - z.norm_sqr()).powf(self.t);
        for (u, q) in &self.factors {
            v *= u.eval_unchecked(z, 0).norm().powf(*q);
        }
        v
    }
}

/// Positive measure given by weighted atoms, optionally with a density
/// (then the atoms are quadrature nodes carrying density times weight).
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    atoms: Vec<(C64, f64)>,
    density: Option<Density>,
    index: AtomIndex,
}

const INDEX_CELLS: usize = 256;

#[derive(Debug, Clone, Default)]
struct AtomIndex {
    /// atom indices per cell, row-major over `[-1, 1]^2`
    cells: Vec<Vec<u32>>,
}

fn cell_of(x: f64) -> usize {
    (((x + 1.0) * 0.5 * INDEX_CELLS as f64).floor().max(0.0) as usize).min(INDEX_CELLS - 1)
}

impl AtomIndex {
    fn new(atoms: &[(C64, f64)]) -> Self {
        let mut cells = vec![Vec::new(); INDEX_CELLS * INDEX_CELLS];
        for (i, (z, _)) in atoms.iter().enumerate() {
            cells[cell_of(z.im) * INDEX_CELLS + cell_of(z.re)].push(i as u32);
        }
        Self { cells }
    }
}

/// Default rule onto which densities are sampled.
pub fn density_rule() -> Result<QuadratureRule> {
    build_graded_rule(&GradedSpec {
        radial_n: 12,
        angular_n: 32,
        angular_cap: 2048,
        r_cut: 0.9999,
        origin_levels: 4,
    })
}

impl DiscreteMeasure {
    pub fn from_atoms(atoms: Vec<(C64, f64)>) -> Result<Self> {
        for (z, w) in &atoms {
            check_in_disk(*z)?;
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(LabError::Contract(format!("atom weight must be nonnegative, got {w}")));
            }
        }
        let index = AtomIndex::new(&atoms);
        Ok(Self {
            atoms,
            density: None,
            index,
        })
    }

    pub fn point_mass(z: C64, weight: f64) -> Result<Self> {
        Self::from_atoms(vec![(z, weight)])
    }

    /// `density dA`, sampled onto the nodes of `rule`.
    pub fn from_density(density: Density, rule: &QuadratureRule) -> Result<Self> {
        let atoms: Vec<(C64, f64)> = rule
            .nodes()
            .par_iter()
            .zip(rule.weights().par_iter())
            .map(|(&z, &w)| (z, density.at(z) * w))
            .collect();
        let mut m = Self::from_atoms(atoms)?;
        m.density = Some(density);
        Ok(m)
    }

    /// `(1 - |z|^2)^t dA` on [`density_rule`].
    pub fn radial_power(t: f64) -> Result<Self> {
        Self::from_density(Density::radial(t), &density_rule()?)
    }

    pub fn atoms(&self) -> &[(C64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        let w: Vec<f64> = self.atoms.iter().map(|a| a.1).collect();
        pairwise_sum(&w)
    }

    /// `lambda mu`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let atoms = self.atoms.iter().map(|&(z, w)| (z, w * lambda)).collect();
        let mut m = Self::from_atoms(atoms)?;
        m.density = self.density.clone().map(|mut d| {
            d.scale *= lambda;
            d
        });
        Ok(m)
    }

    /// `|u|^q mu`.
    pub fn weighted_by(&self, u: &AnalyticFunction, q: f64) -> Result<Self> {
        let atoms = self
            .atoms
            .par_iter()
            .map(|&(z, w)| (z, w * u.eval_unchecked(z, 0).norm().powf(q)))
            .collect();
        let mut m = Self::from_atoms(atoms)?;
        m.density = self.density.clone().map(|mut d| {
            d.factors.push((u.clone(), q));
            d
        });
        Ok(m)
    }

    /// `mu(D(a, r))`. Densities are integrated over the Euclidean image of
    /// the disk with a local polar Gauss rule; atoms are counted.
    pub fn disk_mass(&self, a: C64, r: f64) -> f64 {
        match &self.density {
            Some(d) => local_disk_integral(a, r, |z| d.at(z)),
            None => self.atom_disk_mass(a, r),
        }
    }

    fn atom_disk_mass(&self, a: C64, r: f64) -> f64 {
        let (c, rad) = disk_image(a, r);
        let (x0, x1) = (cell_of(c.re - rad), cell_of(c.re + rad));
        let (y0, y1) = (cell_of(c.im - rad), cell_of(c.im + rad));
        let mut inside = Vec::new();
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &i in &self.index.cells[cy * INDEX_CELLS + cx] {
                    let (z, w) = self.atoms[i as usize];
                    if in_disk(a, r, z) {
                        inside.push((i, w));
                    }
                }
            }
        }
        inside.sort_unstable_by_key(|x| x.0);
        let w: Vec<f64> = inside.into_iter().map(|x| x.1).collect();
        pairwise_sum(&w)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let io = |e: csv::Error| LabError::Io(e.to_string());
        wtr.write_record(["z_re", "z_im", "weight"]).map_err(io)?;
        for (z, w) in &self.atoms {
            wtr.write_record([z.re.to_string(), z.im.to_string(), w.to_string()])
                .map_err(io)?;
        }
        wtr.flush().map_err(|e| LabError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut atoms = Vec::new();
        for rec in rdr.deserialize::<(f64, f64, f64)>() {
            let (re, im, w) = rec.map_err(|e| LabError::Input(e.to_string()))?;
            atoms.push((C64::new(re, im), w));
        }
        Self::from_atoms(atoms).map_err(|e| LabError::Input(e.to_string()))
    }
}

const LOCAL_RADIAL: usize = 16;
const LOCAL_ANGULAR: usize = 48;

/// `int_{D(a,r)} f dA` by Gauss–Legendre in `s^2` and trapezoid in angle
/// about the Euclidean center of the disk.
pub fn local_disk_integral<F: Fn(C64) -> f64>(a: C64, r: f64, f: F) -> f64 {
    thread_local! {
        static GL: Vec<(f64, f64)> = gauss_quad::GaussLegendre::new(
            std::num::NonZeroUsize::new(LOCAL_RADIAL).unwrap(),
        )
        .iter()
        .map(|(x, w)| (*x, *w))
        .collect();
    }
    let (c, rad) = disk_image(a, r);
    let t_hi = rad * rad;
    GL.with(|gl| {
        let mut total = 0.0;
        for &(x, w) in gl {
            let s = (0.5 * t_hi * (1.0 + x)).sqrt();
            let mut ring = 0.0;
            for j in 0..LOCAL_ANGULAR {
                let th = 2.0 * PI * (j as f64 + 0.5) / LOCAL_ANGULAR as f64;
                ring += f(c + C64::from_polar(s, th));
            }
            total += 0.5 * t_hi * w * ring / LOCAL_ANGULAR as f64;
        }
        total
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CarlesonVerdict {
    Vanishing,
    Bounded,
    Diverging,
}

impl From<Trend> for CarlesonVerdict {
    fn from(t: Trend) -> Self {
        match t {
            Trend::Decaying => CarlesonVerdict::Vanishing,
            Trend::Plateau => CarlesonVerdict::Bounded,
            Trend::Growing => CarlesonVerdict::Diverging,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Sup,
    Integral,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CarlesonReport {
    pub kind: StatisticKind,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Lattice extent for the sup statistic, the cut pair for the integral one.
    pub r_cut: Vec<f64>,
    pub statistic: f64,
    /// Statistic at each cut (integral kind only).
    pub by_cut: Vec<f64>,
    pub profile: BoundaryProfile,
    pub tail: Option<TailReading>,
    pub rule: TailRule,
    pub stability_tolerance: f64,
    pub verdict: CarlesonVerdict,
}

pub(crate) fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 0.0 && q > 0.0 && p.is_finite() && q.is_finite()) {
        return Err(LabError::Contract(format!("exponents must be positive, got p={p}, q={q}")));
    }
    Ok(())
}

/// `mu(D(a, r))^(1/q) / (1 - |a|^2)^(k + 2/p)`.
pub fn carleson_point_statistic(mu: &DiscreteMeasure, k: usize, p: f64, q: f64, r: f64, a: C64) -> f64 {
    mu.disk_mass(a, r).powf(1.0 / q) / (1.0 - a.norm_sqr()).powf(k as f64 + 2.0 / p)
}

/// Sup of the point statistic over a lattice, with its boundary profile.
pub fn carleson_statistic(
    mu: &DiscreteMeasure,
    k: usize,
    p: f64,
    q: f64,
    lattice: &BergmanLattice,
    rule: &TailRule,
) -> Result<CarlesonReport> {
    check_exponents(p, q)?;
    if p > q {
        return Err(LabError::Regime(format!(
            "p = {p} > q = {q}: use the integral statistic"
        )));
    }
    let r = lattice.r();
    let samples: Vec<(f64, f64)> = lattice
        .points()
        .par_iter()
        .map(|&a| (a.norm(), carleson_point_statistic(mu, k, p, q, r, a)))
        .collect();
    let profile = BoundaryProfile::from_samples(samples);
    let tail = rule.read(&profile);
    Ok(CarlesonReport {
        kind: StatisticKind::Sup,
        k,
        p,
        q,
        r,
        r_cut: vec![lattice.r_max()],
        statistic: profile.sup(),
        by_cut: Vec::new(),
        profile,
        tail: Some(tail),
        rule: *rule,
        stability_tolerance: 0.0,
        verdict: tail.trend.into(),
    })
}

/// Settings of the integral statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSettings {
    pub spec: GradedSpec,
    pub cuts: (f64, f64),
    /// Relative change between cuts above which the value is diverging.
    pub tolerance: f64,
}

impl Default for IntegralSettings {
    fn default() -> Self {
        Self {
            spec: GradedSpec {
                radial_n: 8,
                angular_n: 16,
                angular_cap: 64,
                r_cut: 0.9999,
                origin_levels: 4,
            },
            cuts: (0.999, 0.9999),
            tolerance: 0.05,
        }
    }
}

/// `L^(p/(p-q))` norm of `z -> mu(D(z, r)) / (1 - |z|^2)^(2 + k q)`.
pub fn carleson_integral_statistic(
    mu: &DiscreteMeasure,
    k: usize,
    p: f64,
    q: f64,
    r: f64,
    settings: &IntegralSettings,
) -> Result<CarlesonReport> {
    check_exponents(p, q)?;
    if q >= p {
        return Err(LabError::Regime(format!(
            "q = {q} >= p = {p}: use the sup statistic"
        )));
    }
    let s = p / (p - q);
    let mut by_cut = Vec::new();
    let mut samples = Vec::new();
    for &cut in &[settings.cuts.0, settings.cuts.1] {
        let rule = build_graded_rule(&settings.spec.with_r_cut(cut))?;
        let vals: Vec<f64> = rule
            .nodes()
            .par_iter()
            .map(|&z| mu.disk_mass(z, r) / (1.0 - z.norm_sqr()).powf(2.0 + k as f64 * q))
            .collect();
        let prod: Vec<f64> = vals.iter().zip(rule.weights()).map(|(v, w)| v.powf(s) * w).collect();
        by_cut.push(pairwise_sum(&prod).powf(1.0 / s));
        samples = rule.nodes().iter().map(|z| z.norm()).zip(vals).collect();
    }
    let (a, b) = (by_cut[0], by_cut[1]);
    let stable = a.is_finite() && b.is_finite() && (b - a).abs() <= settings.tolerance * b.abs().max(f64::MIN_POSITIVE);
    Ok(CarlesonReport {
        kind: StatisticKind::Integral,
        k,
        p,
        q,
        r,
        r_cut: vec![settings.cuts.0, settings.cuts.1],
        statistic: b,
        by_cut,
        profile: BoundaryProfile::from_samples(samples),
        tail: None,
        rule: TailRule::default(),
        stability_tolerance: settings.tolerance,
        verdict: if stable {
            CarlesonVerdict::Bounded
        } else {
            CarlesonVerdict::Diverging
        },
    })
}

/// Routes to the sup statistic for `p <= q` and to the integral one otherwise.
pub fn carleson_verdict(
    mu: &DiscreteMeasure,
    k: usize,
    p: f64,
    q: f64,
    lattice: &BergmanLattice,
    rule: &TailRule,
    settings: &IntegralSettings,
) -> Result<CarlesonReport> {
    if p <= q {
        carleson_statistic(mu, k, p, q, lattice, rule)
    } else {
        carleson_integral_statistic(mu, k, p, q, lattice.r(), settings)
    }
}

/// Up to `per_band` lattice points from each dyadic band, spread evenly
/// along the band in storage (angle) order.
pub fn witness_points(lattice: &BergmanLattice, per_band: usize) -> Vec<C64> {
    let mut bands: Vec<Vec<C64>> = Vec::new();
    for a in lattice.points() {
        let b = dyadic_band(a.norm());
        if bands.len() <= b {
            bands.resize(b + 1, Vec::new());
        }
        bands[b].push(a);
    }
    let mut out = Vec::new();
    for band in bands {
        if band.len() <= per_band {
            out.extend(band);
        } else {
            out.extend((0..per_band).map(|j| band[j * band.len() / per_band]));
        }
    }
    out
}

/// Seeded random polynomials with standard complex Gaussian coefficients,
/// scaled to unit A^p norm on `rule`.
pub fn random_unit_polynomials(
    count: usize,
    degree: usize,
    p: f64,
    rule: &QuadratureRule,
    seed: u64,
) -> Result<Vec<AnalyticFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let coeffs: Vec<C64> = (0..=degree)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let f = AnalyticFunction::Taylor(TaylorPoly::new(coeffs)?);
        let norm = ap_norm(&f, p, rule)?;
        out.push(f.scaled(C64::new(1.0 / norm, 0.0)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SobolevSettings {
    pub per_band: usize,
    pub random_count: usize,
    pub random_degree: usize,
    pub seed: u64,
    pub gamma: Option<f64>,
    pub rule: TailRule,
    pub integral: IntegralSettings,
}

impl Default for SobolevSettings {
    fn default() -> Self {
        Self {
            per_band: 4,
            random_count: 8,
            random_degree: 10,
            seed: 7,
            gamma: None,
            rule: TailRule::default(),
            integral: IntegralSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SobolevReport {
    pub p: f64,
    pub q: f64,
    pub n: usize,
    /// Sup over the test family of `(int |sum u_j f^(j)|^q dmu)^(1/q)`.
    pub combined: f64,
    pub combined_profile: BoundaryProfile,
    pub combined_tail: TailReading,
    pub combined_verdict: CarlesonVerdict,
    pub components: Vec<CarlesonReport>,
    pub component_verdict: CarlesonVerdict,
    /// `combined / max_j component statistic`.
    pub ratio: f64,
    pub agree: bool,
}

/// `(int |sum_j u_j f^(j)|^q dmu)^(1/q)` with the `u_j` tabulated at the atoms.
fn combined_value(mu: &DiscreteMeasure, u_at: &[Vec<C64>], f: &AnalyticFunction, q: f64) -> f64 {
    let n = u_at.len();
    let terms: Vec<f64> = mu
        .atoms()
        .par_iter()
        .enumerate()
        .map_init(
            || vec![C64::new(0.0, 0.0); n],
            |derivs, (idx, &(z, w))| {
                if w == 0.0 {
                    return 0.0;
                }
                f.derivatives_into(z, derivs);
                let acc: C64 = u_at.iter().zip(derivs.iter()).map(|(u, d)| u[idx] * d).sum();
                acc.norm().powf(q) * w
            },
        )
        .collect();
    pairwise_sum(&terms).powf(1.0 / q)
}

/// Combined test-family statistic against per-component Carleson verdicts.
pub fn sobolev_rigidity_check(
    mu: &DiscreteMeasure,
    u: &[AnalyticFunction],
    p: f64,
    q: f64,
    lattice: &BergmanLattice,
    settings: &SobolevSettings,
) -> Result<SobolevReport> {
    check_exponents(p, q)?;
    if u.is_empty() {
        return Err(LabError::Contract("at least one symbol u_0 is required".into()));
    }
    let n = u.len() - 1;
    let gamma = settings.gamma.unwrap_or_else(|| default_gamma(p));
    let u_at: Vec<Vec<C64>> = u
        .iter()
        .map(|uj| mu.atoms().par_iter().map(|&(z, _)| uj.eval_unchecked(z, 0)).collect())
        .collect();

    let mut samples = Vec::new();
    for w in witness_points(lattice, settings.per_band) {
        let mut best = 0.0f64;
        for i in 0..=n {
            let f = normalized_kernel(w, i, gamma, p)?;
            best = best.max(combined_value(mu, &u_at, &f, q));
        }
        samples.push((w.norm(), best));
    }
    let combined_profile = BoundaryProfile::from_samples(samples);
    let poly_rule = build_graded_rule(&GradedSpec {
        angular_cap: 512,
        ..GradedSpec::default()
    })?;
    let mut combined = combined_profile.sup();
    for f in random_unit_polynomials(settings.random_count, settings.random_degree, p, &poly_rule, settings.seed)? {
        combined = combined.max(combined_value(mu, &u_at, &f, q));
    }
    let combined_tail = settings.rule.read(&combined_profile);
    let combined_verdict = if p <= q {
        combined_tail.trend.into()
    } else if combined_tail.trend == Trend::Growing {
        CarlesonVerdict::Diverging
    } else {
        CarlesonVerdict::Bounded
    };

    let mut components = Vec::with_capacity(u.len());
    for (j, uj) in u.iter().enumerate() {
        let muj = mu.weighted_by(uj, q)?;
        components.push(carleson_verdict(&muj, j, p, q, lattice, &settings.rule, &settings.integral)?);
    }
    let component_verdict = components.iter().map(|c| c.verdict).max().unwrap_or(CarlesonVerdict::Vanishing);
    let component_sup = components.iter().map(|c| c.statistic).fold(0.0, f64::max);
    Ok(SobolevReport {
        p,
        q,
        n,
        combined,
        combined_profile,
        combined_tail,
        combined_verdict,
        ratio: if component_sup > 0.0 { combined / component_sup } else { 0.0 },
        agree: combined_verdict == component_verdict,
        components,
        component_verdict,
    })
}
