//! Pseudo-hyperbolic and Bergman metrics, metric disks and r-lattices.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{check_in_disk, C64};
use crate::error::{LabError, Result};

/// `|(z - w) / (1 - conj(z) w)|`.
pub fn pseudo_hyperbolic(z: C64, w: C64) -> Result<f64> {
    check_in_disk(z)?;
    check_in_disk(w)?;
    Ok(rho_unchecked(z, w))
}

pub(crate) fn rho_unchecked(z: C64, w: C64) -> f64 {
    let den = (C64::new(1.0, 0.0) - z.conj() * w).norm();
    ((z - w).norm() / den).min(1.0)
}

/// `atanh(rho) = (1/2) log((1 + rho) / (1 - rho))`.
pub fn bergman_metric(z: C64, w: C64) -> Result<f64> {
    Ok(pseudo_hyperbolic(z, w)?.atanh())
}

/// `rho` threshold of the Bergman disk of radius `r`.
pub fn rho_radius(r: f64) -> f64 {
    r.tanh()
}

/// Membership in `D(a, r) = { z : beta(a, z) < r }`.
pub fn in_disk(a: C64, r: f64, z: C64) -> bool {
    rho_unchecked(a, z) < r.tanh()
}

/// Euclidean center and radius of `D(a, r)`.
pub fn disk_image(a: C64, r: f64) -> (C64, f64) {
    let s = r.tanh();
    let s2 = s * s;
    let a2 = a.norm_sqr();
    let den = 1.0 - s2 * a2;
    (a * ((1.0 - s2) / den), s * (1.0 - a2) / den)
}

/// Normalized area `|D(a, r)| = s^2 (1 - |a|^2)^2 / (1 - s^2 |a|^2)^2`, `s = tanh r`.
pub fn disk_area(a: C64, r: f64) -> f64 {
    let s2 = r.tanh().powi(2);
    let a2 = a.norm_sqr();
    s2 * (1.0 - a2).powi(2) / (1.0 - s2 * a2).powi(2)
}

/// Parameters of the greedy lattice construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    /// Candidate spacing as a fraction of `r`, in hyperbolic units.
    pub spacing_fraction: f64,
    /// Upper bound on the number of candidate points.
    pub max_candidates: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            spacing_fraction: 0.25,
            max_candidates: 4_000_000,
        }
    }
}

/// Points arranged on concentric rings, each sorted by angle in `[0, 2 pi)`.
#[derive(Debug, Clone)]
struct RingSet {
    radii: Vec<f64>,
    /// (angle, point) per ring
    rings: Vec<Vec<(f64, C64)>>,
}

impl RingSet {
    fn len(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    fn points(&self) -> impl Iterator<Item = C64> + '_ {
        self.rings.iter().flat_map(|r| r.iter().map(|&(_, z)| z))
    }
}

/// Largest angular difference at which points of radii `ra`, `rb` can be
/// pseudo-hyperbolically closer than `s`; `None` if they never are.
fn angular_window(ra: f64, rb: f64, s: f64) -> Option<f64> {
    let bound = (1.0 - ra * ra) * (1.0 - rb * rb) / (1.0 - s * s);
    let prod = ra * rb;
    if prod == 0.0 {
        // |1 - conj(z) w| = 1
        return if bound > 1.0 { Some(PI) } else { None };
    }
    let c = (1.0 + prod * prod - bound) / (2.0 * prod);
    if c > 1.0 {
        None
    } else if c <= -1.0 {
        Some(PI)
    } else {
        Some(c.acos())
    }
}

/// Visits every point of `ring` whose angle lies within `window` of `theta`.
fn for_each_in_window(ring: &[(f64, C64)], theta: f64, window: f64, mut visit: impl FnMut(C64) -> bool) {
    if ring.is_empty() {
        return;
    }
    if window >= PI {
        for &(_, z) in ring {
            if !visit(z) {
                return;
            }
        }
        return;
    }
    let lo = theta - window;
    let hi = theta + window;
    let mut ranges = vec![(lo.max(0.0), hi.min(2.0 * PI))];
    if lo < 0.0 {
        ranges.push((lo + 2.0 * PI, 2.0 * PI));
    }
    if hi > 2.0 * PI {
        ranges.push((0.0, hi - 2.0 * PI));
    }
    for (a, b) in ranges {
        let start = ring.partition_point(|&(t, _)| t < a);
        for &(t, z) in &ring[start..] {
            if t > b {
                break;
            }
            if !visit(z) {
                return;
            }
        }
    }
}

fn ring_angle(z: C64) -> f64 {
    let t = z.arg();
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t
    }
}

/// Candidate grid: rings at hyperbolic radii `0, h, 2h, ...` below
/// `atanh(r_max)`, a final ring at `r_max`, and on each ring the angular
/// count that keeps neighbours about `h` apart in the Bergman metric.
fn candidate_grid(h: f64, r_max: f64, cap: usize) -> Result<RingSet> {
    let b_max = r_max.atanh();
    let mut radii = vec![0.0];
    let mut k = 1;
    while (k as f64) * h < b_max - 1e-12 {
        radii.push(((k as f64) * h).tanh());
        k += 1;
    }
    if r_max > 0.0 {
        radii.push(r_max);
    }
    let mut rings = Vec::with_capacity(radii.len());
    let mut total = 0usize;
    for &rho in &radii {
        if rho == 0.0 {
            rings.push(vec![(0.0, C64::new(0.0, 0.0))]);
            total += 1;
            continue;
        }
        let count = (2.0 * PI * rho / ((1.0 - rho * rho) * h)).ceil().max(1.0) as usize;
        total += count;
        if total > cap {
            return Err(LabError::Resolution(format!(
                "candidate grid for r_max = {r_max} needs more than {cap} points; \
                 lower r_max or raise max_candidates"
            )));
        }
        rings.push(
            (0..count)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / count as f64;
                    (t, C64::from_polar(rho, t))
                })
                .collect(),
        );
    }
    Ok(RingSet { radii, rings })
}

/// Counts the points of `set` within Bergman distance `< radius` of `z`,
/// stopping once `limit` is reached.
fn count_near(set: &RingSet, z: C64, radius: f64, limit: usize) -> usize {
    let s = radius.tanh();
    let rz = z.norm();
    let bz = rz.atanh();
    let theta = ring_angle(z);
    let mut n = 0;
    for (ring, &rho) in set.rings.iter().zip(&set.radii) {
        if (rho.atanh() - bz).abs() >= radius {
            continue;
        }
        let Some(window) = angular_window(rz, rho, s) else {
            continue;
        };
        for_each_in_window(ring, theta, window, |w| {
            if rho_unchecked(z, w) < s {
                n += 1;
            }
            n < limit
        });
        if n >= limit {
            break;
        }
    }
    n
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeCertificate {
    pub min_separation: f64,
    pub covered_nodes: usize,
    pub reference_nodes: usize,
    pub multiplicity_bound: usize,
}

#[derive(Debug, Clone)]
pub struct BergmanLattice {
    r: f64,
    r_max: f64,
    accepted: RingSet,
    multiplicity_bound: usize,
    certificate: LatticeCertificate,
}

/// Greedy maximal `r`-separated set over a hyperbolically graded candidate
/// grid covering `{|z| <= r_max}`.
pub fn build_lattice(r: f64, r_max: f64) -> Result<BergmanLattice> {
    build_lattice_with(r, r_max, &LatticeConfig::default())
}

pub fn build_lattice_with(r: f64, r_max: f64, cfg: &LatticeConfig) -> Result<BergmanLattice> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::Contract(format!("lattice radius must be positive, got {r}")));
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(LabError::Contract(format!("r_max must lie in (0, 1), got {r_max}")));
    }
    let h = r * cfg.spacing_fraction;
    let candidates = candidate_grid(h, r_max, cfg.max_candidates)?;
    let s = r.tanh();

    let mut accepted = RingSet {
        radii: candidates.radii.clone(),
        rings: vec![Vec::new(); candidates.radii.len()],
    };
    let betas: Vec<f64> = candidates.radii.iter().map(|x| x.atanh()).collect();
    for (i, ring) in candidates.rings.iter().enumerate() {
        let rho = candidates.radii[i];
        let windows: Vec<(usize, f64)> = (0..=i)
            .filter(|&j| (betas[i] - betas[j]).abs() < r)
            .filter_map(|j| angular_window(rho, candidates.radii[j], s).map(|w| (j, w)))
            .collect();
        for &(theta, z) in ring {
            let mut free = true;
            for &(j, window) in &windows {
                for_each_in_window(&accepted.rings[j], theta, window, |w| {
                    if rho_unchecked(z, w) < s {
                        free = false;
                    }
                    free
                });
                if !free {
                    break;
                }
            }
            if free {
                accepted.rings[i].push((theta, z));
            }
        }
    }

    let points: Vec<C64> = accepted.points().collect();
    let min_separation = points
        .par_iter()
        .enumerate()
        .map(|(idx, &a)| {
            let mut best = f64::INFINITY;
            for &b in &points[idx + 1..] {
                best = best.min(rho_unchecked(a, b));
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
        .atanh();

    let reference: Vec<C64> = candidates.points().collect();
    let covered_nodes = reference
        .par_iter()
        .filter(|&&z| count_near(&accepted, z, r, 1) >= 1)
        .count();
    let multiplicity_bound = reference
        .par_iter()
        .map(|&z| count_near(&accepted, z, 4.0 * r, usize::MAX))
        .max()
        .unwrap_or(0);

    let certificate = LatticeCertificate {
        min_separation,
        covered_nodes,
        reference_nodes: reference.len(),
        multiplicity_bound,
    };
    Ok(BergmanLattice {
        r,
        r_max,
        accepted,
        multiplicity_bound,
        certificate,
    })
}

impl BergmanLattice {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn points(&self) -> Vec<C64> {
        self.accepted.points().collect()
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.len() == 0
    }

    pub fn multiplicity_bound(&self) -> usize {
        self.multiplicity_bound
    }

    pub fn certificate(&self) -> &LatticeCertificate {
        &self.certificate
    }

    /// Number of lattice points within Bergman distance `< radius` of `z`.
    pub fn count_within(&self, z: C64, radius: f64) -> usize {
        count_near(&self.accepted, z, radius, usize::MAX)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# r={},multiplicity_bound={}", self.r, self.multiplicity_bound)
            .map_err(|e| LabError::Io(e.to_string()))?;
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["a_re", "a_im"])
            .map_err(|e| LabError::Io(e.to_string()))?;
        for z in self.accepted.points() {
            wtr.write_record([z.re.to_string(), z.im.to_string()])
                .map_err(|e| LabError::Io(e.to_string()))?;
        }
        wtr.flush().map_err(|e| LabError::Io(e.to_string()))?;
        Ok(())
    }
}

/// Reads lattice points written by [`BergmanLattice::write_csv`].
pub fn read_lattice_csv<R: Read>(input: R) -> Result<Vec<C64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let mut pts = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        let (re, im) = rec.map_err(|e| LabError::Input(e.to_string()))?;
        let z = C64::new(re, im);
        check_in_disk(z).map_err(|e| LabError::Input(e.to_string()))?;
        pts.push(z);
    }
    Ok(pts)
}

/// The four boundary-comparable quantities at a lattice point `a` and `w` in `D(a, r)`:
/// `(1-|a|^2)^2`, `(1-|w|^2)^2`, `|1 - conj(w) a|^2`, `|D(a, r)|`.
pub fn comparable_quantities(a: C64, w: C64, r: f64) -> [f64; 4] {
    [
        (1.0 - a.norm_sqr()).powi(2),
        (1.0 - w.norm_sqr()).powi(2),
        (C64::new(1.0, 0.0) - w.conj() * a).norm_sqr(),
        disk_area(a, r),
    ]
}

/// Smallest `C` with every pairwise ratio of [`comparable_quantities`] in
/// `[1/C, C]`, over lattice points `|a| <= a_max` and `w` sampled on the
/// boundary and center of each `D(a, r)`.
pub fn comparability_constant(lattice: &BergmanLattice, a_max: f64, samples: usize) -> f64 {
    let r = lattice.r();
    let s = r.tanh() * (1.0 - 1e-12);
    lattice
        .points()
        .par_iter()
        .filter(|a| a.norm() <= a_max)
        .map(|&a| {
            let mut worst = 1.0f64;
            let mut check = |w: C64| {
                let q = comparable_quantities(a, w, r);
                for i in 0..4 {
                    for j in 0..4 {
                        worst = worst.max(q[i] / q[j]);
                    }
                }
            };
            check(a);
            for k in 0..samples.max(1) {
                // Moebius image of the circle |zeta| = s under zeta -> (a + zeta)/(1 + conj(a) zeta)
                let zeta = C64::from_polar(s, 2.0 * PI * k as f64 / samples.max(1) as f64);
                check((a + zeta) / (C64::new(1.0, 0.0) + a.conj() * zeta));
            }
            worst
        })
        .reduce(|| 1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn metric_examples() {
        let w = C64::new(0.3, -0.4);
        assert_relative_eq!(pseudo_hyperbolic(C64::new(0.0, 0.0), w).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(pseudo_hyperbolic(w, w).unwrap(), 0.0);
        assert_relative_eq!(
            pseudo_hyperbolic(C64::new(0.5, 0.0), C64::new(-0.5, 0.0)).unwrap(),
            0.8,
            max_relative = 1e-15
        );
        assert_relative_eq!(bergman_metric(C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap(), 0.549306144334055, max_relative = 1e-12);
        assert_relative_eq!(bergman_metric(C64::new(0.0, 0.0), C64::new(0.9, 0.0)).unwrap(), 1.472219489583220, max_relative = 1e-12);
        assert_eq!(bergman_metric(w, w).unwrap(), 0.0);
        assert!(matches!(
            pseudo_hyperbolic(C64::new(1.0, 0.0), w),
            Err(LabError::Domain(_))
        ));
    }

    #[test]
    fn disk_image_boundary_is_metric_circle() {
        let a = C64::new(0.6, 0.3);
        let r = 0.8;
        let (c, rad) = disk_image(a, r);
        for k in 0..16 {
            let z = c + C64::from_polar(rad, k as f64 * 0.4);
            assert_relative_eq!(bergman_metric(a, z).unwrap(), r, max_relative = 1e-10);
        }
        assert_relative_eq!(disk_area(a, r), rad * rad, max_relative = 1e-13);
    }

    #[test]
    fn angular_window_is_exact() {
        let s = 0.7f64.tanh();
        let (ra, rb) = (0.8, 0.85);
        let win = angular_window(ra, rb, s).unwrap();
        let z = C64::from_polar(ra, 0.0);
        assert_relative_eq!(rho_unchecked(z, C64::from_polar(rb, win)), s, max_relative = 1e-9);
        assert!(angular_window(0.0, 0.9, s).is_none());
    }

    #[test]
    fn huge_radius_gives_single_point() {
        let lat = build_lattice(5.0, 0.5).unwrap();
        assert_eq!(lat.len(), 1);
        assert_eq!(lat.multiplicity_bound(), 1);
        assert!(matches!(build_lattice(0.0, 0.5), Err(LabError::Contract(_))));
    }

    #[test]
    fn lattice_certificates() {
        let lat = build_lattice(0.5, 0.99).unwrap();
        let pts = lat.points();
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i + 1..] {
                assert!(bergman_metric(a, b).unwrap() >= 0.5 - 1e-12);
            }
        }
        let cert = lat.certificate();
        assert_eq!(cert.covered_nodes, cert.reference_nodes);
        assert!(cert.min_separation >= 0.5 - 1e-12);
        assert!(lat.multiplicity_bound() > 0);
    }

    #[test]
    fn csv_round_trip() {
        let lat = build_lattice(1.0, 0.9).unwrap();
        let mut buf = Vec::new();
        lat.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&format!("# r=1,multiplicity_bound={}", lat.multiplicity_bound())));
        let back = read_lattice_csv(&buf[..]).unwrap();
        assert_eq!(back, lat.points());
    }
}

