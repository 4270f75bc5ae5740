use super::components::{label_components, Connectivity};
use super::curve::{fit_curve, CurveAxis, CurveModel};
use super::skeleton::{endpoints, skeleton};
use crate::preprocess::StructuringElement;
use crate::raster::Mask;

// Trace order: 4-neighbors first, then diagonals, so walks are deterministic.
const STEPS: [(isize, isize); 8] = [
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, 0),
    (1, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
];

fn trace(skel: &Mask, start: (usize, usize), len: usize) -> Vec<(usize, usize)> {
    let mut path = vec![start];
    let mut cur = start;
    while path.len() < len {
        let next = STEPS.iter().find_map(|&(dx, dy)| {
            let (nx, ny) = (cur.0 as isize + dx, cur.1 as isize + dy);
            (skel.get_or_background(nx, ny) && !path.contains(&(nx as usize, ny as usize)))
                .then_some((nx as usize, ny as usize))
        });
        match next {
            Some(p) => {
                path.push(p);
                cur = p;
            }
            None => break,
        }
    }
    path
}

fn bresenham(a: (isize, isize), b: (isize, isize), out: &mut Vec<(isize, isize)>) {
    let (mut x, mut y) = a;
    let (dx, dy) = ((b.0 - x).abs(), -(b.1 - y).abs());
    let (sx, sy) = ((b.0 - x).signum(), (b.1 - y).signum());
    let mut err = dx + dy;
    loop {
        out.push((x, y));
        if (x, y) == b {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn fit_with_fallback(points: &[(f64, f64)], degree: usize) -> Option<CurveModel> {
    (1..=degree).rev().find_map(|d| fit_curve(points, d).ok())
}

/// Distance from `p` to the segment `a`-`b`.
fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * vx, a.1 + t * vy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Pixel path from `a` to `b` following `curve`. Falls back to a straight
/// segment when the curve strays more than `tolerance` from the chord.
fn curve_path(
    a: (usize, usize),
    b: (usize, usize),
    curve: Option<&CurveModel>,
    tolerance: f64,
) -> Vec<(isize, isize)> {
    let (ai, bi) = ((a.0 as isize, a.1 as isize), (b.0 as isize, b.1 as isize));
    let (af, bf) = ((a.0 as f64, a.1 as f64), (b.0 as f64, b.1 as f64));
    let mut knots = vec![ai];
    if let Some(c) = curve {
        let (ta, tb) = match c.axis {
            CurveAxis::X => (ai.0, bi.0),
            CurveAxis::Y => (ai.1, bi.1),
        };
        let step = (tb - ta).signum();
        let mut inner = Vec::new();
        let mut t = ta + step;
        while step != 0 && t != tb {
            let p = c.point_at(t as f64);
            if !p.0.is_finite() || !p.1.is_finite() || segment_distance(p, af, bf) > tolerance {
                inner.clear();
                break;
            }
            inner.push((p.0.round() as isize, p.1.round() as isize));
            t += step;
        }
        knots.extend(inner);
    }
    knots.push(bi);
    let mut out = Vec::new();
    for pair in knots.windows(2) {
        bresenham(pair[0], pair[1], &mut out);
        out.pop();
    }
    out.push(bi);
    out
}

/// Joins broken linear features. Endpoints of the mask's skeleton that lie
/// in different 8-connected components and within `max_gap` of each other are
/// paired greedily by ascending distance, each endpoint at most once. Every
/// pair is connected along a polynomial of `degree` fitted to the
/// `context_len` skeleton pixels behind both endpoints, and the path is
/// thickened to the mean width of the two components.
///
/// The result is always a superset of `m`.
pub fn bridge_gaps(m: &Mask, max_gap: f64, degree: usize, context_len: usize) -> Mask {
    let mut out = m.clone();
    if !(max_gap >= 1.0) {
        return out;
    }
    let degree = degree.clamp(1, 3);
    let context_len = context_len.max(2);
    let skel = skeleton(m);
    let ends = endpoints(&skel);
    if ends.len() < 2 {
        return out;
    }
    let (labels, n) = label_components(m, Connectivity::Eight);
    let w = m.width();
    let label_of = |p: (usize, usize)| labels[p.1 * w + p.0] as usize;

    let mut area = vec![0usize; n + 1];
    let mut skel_len = vec![0usize; n + 1];
    for (i, &l) in labels.iter().enumerate() {
        area[l as usize] += 1;
        if skel.bits()[i] {
            skel_len[l as usize] += 1;
        }
    }
    let width_of = |l: usize| area[l] as f64 / skel_len[l].max(1) as f64;

    let mut pairs = Vec::new();
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let (a, b) = (ends[i], ends[j]);
            if label_of(a) == label_of(b) {
                continue;
            }
            let d = ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt();
            if d <= max_gap {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));

    let mut used = vec![false; ends.len()];
    for (d, i, j) in pairs {
        if used[i] || used[j] {
            continue;
        }
        used[i] = true;
        used[j] = true;
        let (a, b) = (ends[i], ends[j]);
        let context: Vec<(f64, f64)> = trace(&skel, a, context_len)
            .into_iter()
            .chain(trace(&skel, b, context_len))
            .map(|(x, y)| (x as f64, y as f64))
            .collect();
        let curve = fit_with_fallback(&context, degree);
        let path = curve_path(a, b, curve.as_ref(), (d / 2.0).max(2.0));

        let width = (width_of(label_of(a)) + width_of(label_of(b))) / 2.0;
        let radius = ((width - 1.0) / 2.0).round().max(0.0) as usize;
        let disk = StructuringElement::disk(radius);
        for &(px, py) in &path {
            for (dx, dy) in disk.offsets() {
                let (x, y) = (px + dx, py + dy);
                if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < m.height() {
                    out.set(x as usize, y as usize, true);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::connected_components;

    fn road(gap: Option<(usize, usize)>) -> Mask {
        Mask::from_fn(60, 15, |x, y| {
            (6..9).contains(&y) && (5..55).contains(&x) && gap.is_none_or(|(g0, g1)| !(g0..g1).contains(&x))
        })
    }

    #[test]
    fn no_gap_unchanged() {
        let m = road(None);
        assert_eq!(bridge_gaps(&m, 8.0, 2, 10), m);
    }

    #[test]
    fn single_gap_bridged() {
        let truth = road(None);
        let broken = road(Some((28, 33)));
        let out = bridge_gaps(&broken, 8.0, 2, 10);
        assert!(broken.is_subset_of(&out));
        assert_eq!(connected_components(&out, Connectivity::Eight).len(), 1);
        let dump: String = (0..15)
            .map(|y| (0..60).map(|x| match (out.get(x, y), truth.get(x, y)) {
                (true, true) => '#',
                (true, false) => '+',
                (false, true) => '-',
                _ => '.',
            }).collect::<String>() + "\n")
            .collect();
        assert!(out.iou(&truth) >= 0.95, "iou {}\n{dump}", out.iou(&truth));
    }

    #[test]
    fn parallel_roads_not_joined() {
        let m = Mask::from_fn(60, 40, |x, y| {
            (5..55).contains(&x) && ((8..11).contains(&y) || (28..31).contains(&y))
        });
        let out = bridge_gaps(&m, 8.0, 2, 10);
        assert_eq!(connected_components(&out, Connectivity::Eight).len(), 2);
    }

    #[test]
    fn bresenham_endpoints_and_connectivity() {
        let mut v = Vec::new();
        bresenham((0, 0), (5, 2), &mut v);
        assert_eq!(v.first(), Some(&(0, 0)));
        assert_eq!(v.last(), Some(&(5, 2)));
        assert!(v.windows(2).all(|p| (p[0].0 - p[1].0).abs() <= 1 && (p[0].1 - p[1].1).abs() <= 1));
    }
}
