//! Thinning by the two-subiteration 3x3 neighborhood rule of Zhang and Suen,
//! applied sequentially in raster order.
//!
//! With neighbors labelled clockwise from north
//! `P2 = N, P3 = NE, P4 = E, P5 = SE, P6 = S, P7 = SW, P8 = W, P9 = NW`,
//! `B` the number of set neighbors and `A` the number of 0 -> 1 transitions in
//! the cyclic sequence `P2, P3, ..., P9, P2`, a pixel is deleted when
//! `2 <= B <= 6`, `A == 1` and
//!
//! * first subiteration: `P2 P4 P6 == 0` and `P4 P6 P8 == 0`
//! * second subiteration: `P2 P4 P8 == 0` and `P2 P6 P8 == 0`
//!
//! Candidates for a subiteration are selected on the state at its start.
//! Each candidate is then re-checked in raster order against the current
//! state before deletion, which keeps two-pixel thick structures such as a
//! 2x2 block from vanishing. Iteration stops after a pair of subiterations
//! deletes nothing. Pixels outside the mask are background. Finally, line
//! ends shortened by the thinning are regrown inside the original mask.

use crate::raster::Mask;

const RING: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

fn ring(m: &Mask, x: usize, y: usize) -> [bool; 8] {
    let (x, y) = (x as isize, y as isize);
    RING.map(|(dx, dy)| m.get_or_background(x + dx, y + dy))
}

fn deletable(p: &[bool; 8], first: bool) -> bool {
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let (n, e, s, w) = (p[0], p[2], p[4], p[6]);
    if first {
        !(n && e && s) && !(e && s && w)
    } else {
        !(n && e && w) && !(n && s && w)
    }
}

pub fn skeleton(m: &Mask) -> Mask {
    let mut out = m.clone();
    let (w, h) = (m.width(), m.height());
    loop {
        let mut changed = false;
        for first in [true, false] {
            let candidates: Vec<(usize, usize)> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| out.get(x, y) && deletable(&ring(&out, x, y), first))
                .collect();
            for (x, y) in candidates {
                if deletable(&ring(&out, x, y), first) {
                    out.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    extend_ends(&mut out, m);
    out
}

/// Thinning erodes line ends by up to half the stroke width. Each endpoint
/// is grown back along its last step while the next pixel lies in the
/// original mask and touches no other skeleton pixel.
fn extend_ends(skel: &mut Mask, m: &Mask) {
    for (x, y) in endpoints(skel) {
        let (mut cx, mut cy) = (x as isize, y as isize);
        let Some((nx, ny)) = RING
            .iter()
            .map(|&(dx, dy)| (cx + dx, cy + dy))
            .find(|&(nx, ny)| skel.get_or_background(nx, ny))
        else {
            continue;
        };
        let (dx, dy) = (cx - nx, cy - ny);
        loop {
            let (tx, ty) = (cx + dx, cy + dy);
            if !m.get_or_background(tx, ty) || skel.get_or_background(tx, ty) {
                break;
            }
            let touches_other = RING.iter().any(|&(ox, oy)| {
                let (qx, qy) = (tx + ox, ty + oy);
                (qx, qy) != (cx, cy) && skel.get_or_background(qx, qy)
            });
            if touches_other {
                break;
            }
            skel.set(tx as usize, ty as usize, true);
            (cx, cy) = (tx, ty);
        }
    }
}

/// Skeleton pixels with exactly one 8-neighbor, in scan order.
pub fn endpoints(skel: &Mask) -> Vec<(usize, usize)> {
    skel.foreground()
        .filter(|&(x, y)| ring(skel, x, y).iter().filter(|&&v| v).count() == 1)
        .collect()
}
