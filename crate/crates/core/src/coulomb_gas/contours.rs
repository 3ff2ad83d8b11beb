//! Screening contours for the bulk pairs (z_k, z̄_k) in the canonical frame.
//!
//! Contour k runs from z_k down a polyline to a real crossing c_k and back
//! up to z̄_k along the mirror image. Every polyline descends strictly, so
//! as long as no two of them meet each contour passes every other point at
//! that point's height on a fixed side, given by the order of the
//! crossings, and the branch rule of the symmetric integrand stays on one
//! sheet.
//!
//! Each segment is cut into pieces no longer than their distance to the
//! nearest foreign singularity or foreign leg; the piece touching z_k
//! carries the endpoint power in a Gauss–Jacobi weight, the others use
//! Gauss–Legendre.

use num_complex::Complex64;

use super::tensor::ContourNodes;
use crate::numerics::{jacobi_rule, legendre_rule};
use crate::{Error, Result};

/// Maximal piece length over distance to the nearest obstacle.
const PIECE_RATIO: f64 = 1.0;
const MAX_PIECES: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    points: Vec<Complex64>,
    /// Upper legs: vertices from z_k down to the crossing on the real axis.
    paths: Vec<Vec<Complex64>>,
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn point_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let n2 = d.norm_sqr();
    if n2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * d.conj()).re / n2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

fn segments_cross(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> bool {
    let d1 = cross(a1 - a0, b0 - a0);
    let d2 = cross(a1 - a0, b1 - a0);
    let d3 = cross(b1 - b0, a0 - b0);
    let d4 = cross(b1 - b0, a1 - b0);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn segment_segment(a0: Complex64, a1: Complex64, b0: Complex64, b1: Complex64) -> f64 {
    if segments_cross(a0, a1, b0, b1) {
        return 0.0;
    }
    point_segment(a0, b0, b1)
        .min(point_segment(a1, b0, b1))
        .min(point_segment(b0, a0, a1))
        .min(point_segment(b1, a0, a1))
}

fn segments(path: &[Complex64]) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
    path.windows(2).map(|w| (w[0], w[1]))
}

impl Layout {
    /// Crossings directly below each point.
    pub fn vertical(points: &[Complex64]) -> Result<Self> {
        Self::new(points.to_vec(), points.iter().map(|p| p.re).collect())
    }

    /// Straight legs from each point to its crossing.
    pub fn new(points: Vec<Complex64>, crossings: Vec<f64>) -> Result<Self> {
        if points.len() != crossings.len() {
            return Err(Error::InvalidInput("one crossing per point is required".into()));
        }
        let paths = points.iter().zip(&crossings).map(|(&p, &c)| vec![p, Complex64::new(c, 0.0)]).collect();
        Self::with_paths(points, paths)
    }

    /// Polyline legs; each must start at its point, descend strictly and end
    /// on the real axis, and no two may meet.
    pub fn with_paths(points: Vec<Complex64>, paths: Vec<Vec<Complex64>>) -> Result<Self> {
        if points.len() != paths.len() {
            return Err(Error::InvalidInput("one path per point is required".into()));
        }
        if let Some(p) = points.iter().find(|p| !(p.im > 0.0) || !p.re.is_finite()) {
            return Err(Error::NotInUpperHalfPlane(*p));
        }
        for (k, (p, path)) in points.iter().zip(&paths).enumerate() {
            let ok = path.len() >= 2
                && path[0] == *p
                && path.last().is_some_and(|c| c.im == 0.0 && c.re.is_finite())
                && path.windows(2).all(|w| w[1].im < w[0].im);
            if !ok {
                return Err(Error::InvalidInput(format!("path {k} must descend from its point to the real axis")));
            }
        }
        let layout = Layout { points, paths };
        let n = layout.points.len();
        for k in 0..n {
            for l in k + 1..n {
                for (a0, a1) in segments(&layout.paths[k]) {
                    for (b0, b1) in segments(&layout.paths[l]) {
                        let scale = (a1 - a0).norm().max((b1 - b0).norm());
                        if segment_segment(a0, a1, b0, b1) <= 1e-13 * scale {
                            return Err(Error::Quadrature(format!("contours {k} and {l} meet")));
                        }
                    }
                }
            }
        }
        Ok(layout)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn crossing(&self, k: usize) -> f64 {
        self.paths[k].last().map_or(f64::NAN, |c| c.re)
    }

    pub fn crossings(&self) -> Vec<f64> {
        (0..self.points.len()).map(|k| self.crossing(k)).collect()
    }

    pub fn path(&self, k: usize) -> &[Complex64] {
        &self.paths[k]
    }

    /// Sign of c_k − c_l, the side contour k passes point l on.
    pub fn side(&self, k: usize, l: usize) -> f64 {
        if self.crossing(k) > self.crossing(l) {
            1.0
        } else {
            -1.0
        }
    }

    /// Pieces of the upper leg of contour k as (start, end), ordered from z_k.
    pub fn pieces(&self, k: usize) -> Result<Vec<(Complex64, Complex64)>> {
        let p = self.points[k];
        let mut obstacle_points = vec![p.conj()];
        let mut obstacle_legs = Vec::new();
        for j in (0..self.points.len()).filter(|&j| j != k) {
            let a = self.points[j];
            obstacle_points.push(a);
            obstacle_points.push(a.conj());
            for (s0, s1) in segments(&self.paths[j]) {
                obstacle_legs.push((s0, s1));
                obstacle_legs.push((s0.conj(), s1.conj()));
            }
        }
        let clearance = |a: Complex64, b: Complex64| -> f64 {
            let mut d = f64::INFINITY;
            for &o in &obstacle_points {
                d = d.min(point_segment(o, a, b));
            }
            for &(o0, o1) in &obstacle_legs {
                d = d.min(segment_segment(a, b, o0, o1));
            }
            if a != p {
                d = d.min(point_segment(p, a, b));
            }
            d
        };
        let mut out = Vec::new();
        for (a, b) in segments(&self.paths[k]) {
            let mut stack = vec![(a, b)];
            while let Some((s0, s1)) = stack.pop() {
                let len = (s1 - s0).norm();
                if len <= PIECE_RATIO * clearance(s0, s1) {
                    out.push((s0, s1));
                    if out.len() > MAX_PIECES {
                        return Err(Error::Quadrature(format!("contour {k} needs more than {MAX_PIECES} pieces")));
                    }
                    continue;
                }
                if len < 1e-12 * (b - a).norm() {
                    return Err(Error::SingularityOnContour { point: s0, distance: clearance(s0, s1) });
                }
                let mid = 0.5 * (s0 + s1);
                // pushed in reverse so pieces come out ordered from z_k
                stack.push((mid, s1));
                stack.push((s0, mid));
            }
        }
        Ok(out)
    }

    /// Picks non-crossing legs that minimise the tensor size Π N_k among
    /// vertical drops, global fans (all legs aimed away from one focal point
    /// above the points), per-cluster fans and fans nested along the
    /// clustering tree.
    pub fn choose(points: &[Complex64]) -> Result<Self> {
        let mut best: Option<(f64, Layout)> = None;
        let mut first_err = None;
        for paths in candidates(points) {
            let layout = match Layout::with_paths(points.to_vec(), paths) {
                Ok(l) => l,
                Err(e) => {
                    first_err.get_or_insert(e);
                    continue;
                }
            };
            let mut cost = 0.0;
            let mut ok = true;
            for k in 0..points.len() {
                match layout.pieces(k) {
                    Ok(p) => cost += (p.len() as f64).ln(),
                    Err(e) => {
                        first_err.get_or_insert(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok && best.as_ref().is_none_or(|(c, _)| cost < *c - 1e-12) {
                best = Some((cost, layout));
            }
        }
        match best {
            Some((_, l)) => Ok(l),
            None => Err(first_err.unwrap_or_else(|| Error::Quadrature("no admissible contour layout".into()))),
        }
    }

    /// Nodes and weights of contour k for the symmetric integrand: the
    /// weight carries du, u (from the boundary insertion at 0), the pair
    /// factor ((u − z_k)(u − z̄_k))^{−κ/4} and the foreign pair factors on the
    /// branch selected by the crossing order.
    pub fn contour_nodes(&self, k: usize, kappa: f64, order: usize) -> Result<ContourNodes> {
        let e = -kappa / 4.0;
        let p = self.points[k];
        let foreign: Vec<(Complex64, f64)> = (0..self.points.len())
            .filter(|&j| j != k)
            .map(|j| (self.points[j], self.side(k, j)))
            .collect();
        let foreign_log = |u: Complex64| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(w, sg) in &foreign {
                acc += ((u - w) * sg).ln() + ((u - w.conj()) * sg).ln();
            }
            acc
        };
        let pieces = self.pieces(k)?;
        let endpoint_rule = jacobi_rule(order, 0.0, e)?;
        let plain_rule = legendre_rule(order)?;
        let mut nodes = ContourNodes::default();
        let mut lower = ContourNodes::default();
        for &(a, b) in &pieces {
            let first = a == p;
            let rule = if first { &endpoint_rule } else { &plain_rule };
            let half = 0.5 * (b - a);
            // the path descends, so u − z_k stays in the lower half-plane and
            // its principal log is continuous; on the first piece
            // ln(u − z_k) = ln(half) + ln(1 + t) with (1 + t)^e in the weight
            let ln_half = half.ln();
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let u = a + half * (1.0 + t);
                let ub = u.conj();
                let ln_own = if first { ln_half } else { (u - p).ln() };
                let own_up = ln_own + (u - p.conj()).ln();
                let own_dn = ln_own.conj() + (ub - p).ln();
                let wu = w * half * u * (e * (own_up + foreign_log(u))).exp();
                // lower leg runs c_k → z̄_k, against the piece direction
                let wd = -w * half.conj() * ub * (e * (own_dn + foreign_log(ub))).exp();
                nodes.push(u, wu);
                lower.push(ub, wd);
            }
        }
        nodes.u.extend(lower.u);
        nodes.weight.extend(lower.weight);
        Ok(nodes)
    }
}

fn fan(points: &[Complex64], focus: Complex64) -> Vec<f64> {
    points
        .iter()
        .map(|p| focus.re + (p.re - focus.re) * focus.im / (focus.im - p.im))
        .collect()
}

fn candidates(points: &[Complex64]) -> Vec<Vec<Vec<Complex64>>> {
    let straight = |crossings: Vec<f64>| -> Vec<Vec<Complex64>> {
        points.iter().zip(crossings).map(|(&p, c)| vec![p, Complex64::new(c, 0.0)]).collect()
    };
    let mut out: Vec<_> = crossing_candidates(points).into_iter().map(straight).collect();
    if points.len() > 2 {
        let tree = merge_tree(points);
        for h in [0.25, 0.5, 1.0, 2.0] {
            for reach in [0.15, 0.3, 0.5] {
                if let Some(paths) = nested_fan(points, &tree, h, reach) {
                    out.push(paths);
                }
            }
        }
    }
    out
}

/// Clusters formed by single-linkage agglomeration, smallest first; the last
/// one holds every point.
fn merge_tree(points: &[Complex64]) -> Vec<Vec<usize>> {
    let mut live: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let mut merged = Vec::new();
    while live.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..live.len() {
            for b in a + 1..live.len() {
                for &i in &live[a] {
                    for &j in &live[b] {
                        let d = (points[i] - points[j]).norm();
                        if d < best.0 {
                            best = (d, a, b);
                        }
                    }
                }
            }
        }
        let (_, a, b) = best;
        let mut joined = live.swap_remove(b);
        joined.extend(live[a].iter().copied());
        joined.sort_unstable();
        live[a] = joined.clone();
        merged.push(joined);
    }
    merged
}

fn diameter(points: &[Complex64], members: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for &i in members {
        for &j in members {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

/// Legs that leave each cluster of the merge tree radially from a focus
/// placed `h` diameters above it, travel `reach` parent diameters, and then
/// turn to follow the parent's fan; the root fan runs down to the axis.
fn nested_fan(points: &[Complex64], tree: &[Vec<usize>], h: f64, reach: f64) -> Option<Vec<Vec<Complex64>>> {
    let lowest = points.iter().map(|p| p.im).fold(f64::MAX, f64::min);
    let info: Vec<(Complex64, f64)> = tree
        .iter()
        .map(|c| {
            let diam = diameter(points, c).max(1e-9 * lowest);
            let cx = c.iter().map(|&i| points[i].re).sum::<f64>() / c.len() as f64;
            let top = c.iter().map(|&i| points[i].im).fold(f64::MIN, f64::max);
            (Complex64::new(cx, top + h * diam), diam)
        })
        .collect();
    let mut paths = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        let chain: Vec<usize> = (0..tree.len()).filter(|&c| tree[c].contains(&i)).collect();
        let mut q = p;
        let mut path = vec![p];
        for (step, &c) in chain.iter().enumerate() {
            let (focus, _) = info[c];
            let dir = (q - focus) / (q - focus).norm();
            if !(dir.im < 0.0) {
                return None;
            }
            match chain.get(step + 1) {
                Some(&parent) => {
                    let next = q + dir * (reach * info[parent].1);
                    if next.im < 0.05 * p.im {
                        return None;
                    }
                    q = next;
                    path.push(q);
                }
                None => {
                    let end = q + dir * (q.im / -dir.im);
                    path.push(Complex64::new(end.re, 0.0));
                }
            }
        }
        paths.push(path);
    }
    Some(paths)
}

fn crossing_candidates(points: &[Complex64]) -> Vec<Vec<f64>> {
    let mut out = vec![points.iter().map(|p| p.re).collect::<Vec<_>>()];
    let n = points.len();
    if n < 2 {
        return out;
    }
    let top = points.iter().map(|p| p.im).fold(f64::MIN, f64::max);
    let lowest = points.iter().map(|p| p.im).fold(f64::MAX, f64::min);
    let mean_re = points.iter().map(|p| p.re).sum::<f64>() / n as f64;
    for h in [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let lift = h * top;
        let height = top + lift;
        let mut xs = vec![mean_re];
        for p in points {
            xs.extend([p.re, p.re - lift, p.re + lift]);
        }
        for x in xs {
            out.push(fan(points, Complex64::new(x, height)));
        }
    }
    // clusters: points closer than a fraction of their height
    for tau in [0.25, 1.0] {
        let clusters = clusters(points, tau);
        if clusters.iter().all(|c| c.len() == 1) {
            continue;
        }
        for h in [0.5, 1.0, 2.0, 4.0] {
            for shift in [0.0, -1.0, 1.0] {
                let mut crossings: Vec<f64> = points.iter().map(|p| p.re).collect();
                for c in &clusters {
                    if c.len() < 2 {
                        continue;
                    }
                    let mut diam: f64 = 0.0;
                    for &i in c {
                        for &j in c {
                            diam = diam.max((points[i] - points[j]).norm());
                        }
                    }
                    let diam = diam.max(1e-6 * lowest);
                    let cx = c.iter().map(|&i| points[i].re).sum::<f64>() / c.len() as f64;
                    let cy = c.iter().map(|&i| points[i].im).fold(f64::MIN, f64::max);
                    let focus = Complex64::new(cx + shift * diam, cy + h * diam);
                    let members: Vec<Complex64> = c.iter().map(|&i| points[i]).collect();
                    for (&i, x) in c.iter().zip(fan(&members, focus)) {
                        crossings[i] = x;
                    }
                }
                out.push(crossings);
            }
        }
    }
    out
}

/// Single-linkage clusters with link length τ·min(Im).
fn clusters(points: &[Complex64], tau: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let link = tau * points[i].im.min(points[j].im);
            if (points[i] - points[j]).norm() < link {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == b {
                        *l = a;
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        match out.iter_mut().find(|c| label[c[0]] == label[i]) {
            Some(c) => c.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}
