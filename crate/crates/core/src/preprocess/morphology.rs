//! Binary morphology. Pixels outside the mask count as background.

use crate::error::{Error, Result};
use crate::raster::Mask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    side: usize,
    bits: Vec<bool>,
}

impl StructuringElement {
    pub fn new(side: usize, bits: Vec<bool>) -> Result<Self> {
        if side.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "structuring element side must be odd, got {side}"
            )));
        }
        if bits.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "structuring element of side {side} needs {} bits, got {}",
                side * side,
                bits.len()
            )));
        }
        if !bits[(side / 2) * side + side / 2] {
            return Err(Error::InvalidParameter(
                "structuring element center bit must be set".into(),
            ));
        }
        Ok(StructuringElement { side, bits })
    }

    pub fn square(side: usize) -> Result<Self> {
        StructuringElement::new(side, vec![true; side * side])
    }

    /// Euclidean disk of the given radius.
    pub fn disk(radius: usize) -> Self {
        let side = 2 * radius + 1;
        let r = radius as isize;
        let bits = (0..side * side)
            .map(|i| {
                let (dx, dy) = ((i % side) as isize - r, (i / side) as isize - r);
                dx * dx + dy * dy <= r * r
            })
            .collect();
        StructuringElement { side, bits }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Offsets of the set bits relative to the center.
    pub fn offsets(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let r = (self.side / 2) as isize;
        let side = self.side;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % side) as isize - r, (i / side) as isize - r))
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        StructuringElement::square(3).expect("3x3 square is valid")
    }
}

/// A pixel survives iff the footprint placed on it lies entirely on foreground.
pub fn erode(m: &Mask, se: &StructuringElement) -> Mask {
    let offsets: Vec<_> = se.offsets().collect();
    Mask::from_fn(m.width(), m.height(), |x, y| {
        offsets
            .iter()
            .all(|&(dx, dy)| m.get_or_background(x as isize + dx, y as isize + dy))
    })
}

/// Minkowski sum with the footprint: every foreground pixel stamps the
/// footprint around itself. Identical to the "footprint covers foreground"
/// test for symmetric elements, and keeps `open` anti-extensive for
/// asymmetric ones.
pub fn dilate(m: &Mask, se: &StructuringElement) -> Mask {
    let offsets: Vec<_> = se.offsets().collect();
    Mask::from_fn(m.width(), m.height(), |x, y| {
        offsets
            .iter()
            .any(|&(dx, dy)| m.get_or_background(x as isize - dx, y as isize - dy))
    })
}

/// Erosion followed by dilation.
pub fn open(m: &Mask, se: &StructuringElement) -> Mask {
    dilate(&erode(m, se), se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_in(size: usize, x0: usize, y0: usize, side: usize) -> Mask {
        Mask::from_fn(size, size, |x, y| {
            (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y)
        })
    }

    #[test]
    fn rejects_even_or_hollow_elements() {
        assert!(StructuringElement::square(2).is_err());
        let mut bits = vec![true; 9];
        bits[4] = false;
        assert!(StructuringElement::new(3, bits).is_err());
    }

    #[test]
    fn erode_single_pixel_vanishes() {
        let m = Mask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        assert!(erode(&m, &StructuringElement::default()).is_empty());
    }

    #[test]
    fn erode_full_mask_clears_border() {
        let m = Mask::from_fn(6, 5, |_, _| true);
        let e = erode(&m, &StructuringElement::default());
        for y in 0..5 {
            for x in 0..6 {
                let interior = x > 0 && y > 0 && x < 5 && y < 4;
                assert_eq!(e.get(x, y), interior, "({x},{y})");
            }
        }
    }

    #[test]
    fn erode_square_shrinks_by_one() {
        let e = erode(&square_in(9, 2, 2, 5), &StructuringElement::default());
        assert_eq!(e, square_in(9, 3, 3, 3));
    }

    #[test]
    fn dilate_examples() {
        let se = StructuringElement::default();
        let m = Mask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        assert_eq!(dilate(&m, &se), square_in(5, 1, 1, 3));
        assert!(dilate(&Mask::new(4, 4), &se).is_empty());

        let two = Mask::from_fn(7, 5, |x, y| y == 2 && (x == 2 || x == 4));
        let d = dilate(&two, &se);
        let expected = Mask::from_fn(7, 5, |x, y| (1..=5).contains(&x) && (1..=3).contains(&y));
        assert_eq!(d, expected);
    }

    #[test]
    fn open_examples() {
        let se = StructuringElement::default();
        let speck = Mask::from_fn(7, 7, |x, y| x == 3 && y == 3);
        assert!(open(&speck, &se).is_empty());
        let sq = square_in(9, 2, 2, 5);
        assert_eq!(open(&sq, &se), sq);
    }

    #[test]
    fn asymmetric_element_open_is_anti_extensive() {
        let se = StructuringElement::new(3, vec![false, false, false, false, true, true, false, true, false])
            .unwrap();
        let m = Mask::from_fn(8, 8, |x, y| (x * 3 + y * 5) % 7 < 4);
        assert!(open(&m, &se).is_subset_of(&m));
    }

    #[test]
    fn disk_footprint() {
        let d = StructuringElement::disk(1);
        assert_eq!(d.offsets().count(), 5);
        assert_eq!(StructuringElement::disk(0).offsets().count(), 1);
    }
}
