use super::GridBox;
use crate::error::{Error, Result};
use crate::io::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentBox {
    pub threshold: f64,
    pub bbox: GridBox,
    /// Area of the bounding box in cells.
    pub area_cells: usize,
    /// Number of cells in the component itself.
    pub size: usize,
}

/// 4-connected flood fill from `seed` over cells where `member` holds;
/// returns the tight bounding box and component size. `seed` must satisfy
/// `member`.
pub fn component_bbox_where(
    h: usize,
    w: usize,
    seed: (usize, usize),
    member: impl Fn(usize, usize) -> bool,
) -> (GridBox, usize) {
    let mut seen = vec![false; h * w];
    let mut stack = vec![seed];
    seen[seed.0 * w + seed.1] = true;
    let mut b = GridBox::new(seed.0, seed.1, seed.0 + 1, seed.1 + 1);
    let mut size = 0;
    while let Some((y, x)) = stack.pop() {
        size += 1;
        b = b.hull(&GridBox::new(y, x, y + 1, x + 1));
        let mut push = |ny: usize, nx: usize| {
            let i = ny * w + nx;
            if !seen[i] && member(ny, nx) {
                seen[i] = true;
                stack.push((ny, nx));
            }
        };
        if y > 0 {
            push(y - 1, x);
        }
        if y + 1 < h {
            push(y + 1, x);
        }
        if x > 0 {
            push(y, x - 1);
        }
        if x + 1 < w {
            push(y, x + 1);
        }
    }
    (b, size)
}

/// Bounding box of the 4-connected component of `mask` containing `seed`
/// (`(row, col)`).
pub fn connected_component_at(mask: &BinaryMask, seed: (usize, usize)) -> Result<ComponentBox> {
    if seed.0 >= mask.height || seed.1 >= mask.width || !mask.get(seed.0, seed.1) {
        return Err(Error::SeedNotSet(seed.0, seed.1));
    }
    let (bbox, size) = component_bbox_where(mask.height, mask.width, seed, |y, x| mask.get(y, x));
    Ok(ComponentBox {
        threshold: f64::NAN,
        bbox,
        area_cells: bbox.area(),
        size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BinaryMask {
        let h = rows.len();
        let w = rows[0].len();
        let bits = rows.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();
        BinaryMask::new(h, w, bits, 1.0).unwrap()
    }

    #[test]
    fn plus_shape() {
        let m = mask(&[".....", "..#..", ".###.", "..#..", "....."]);
        let c = connected_component_at(&m, (2, 2)).unwrap();
        assert_eq!(c.bbox, GridBox::new(1, 1, 4, 4));
        assert_eq!(c.area_cells, 9);
        assert_eq!(c.size, 5);
    }

    #[test]
    fn single_cell() {
        let m = mask(&["...", ".#.", "..."]);
        let c = connected_component_at(&m, (1, 1)).unwrap();
        assert_eq!(c.bbox, GridBox::new(1, 1, 2, 2));
        assert_eq!(c.area_cells, 1);
    }

    #[test]
    fn diagonal_cells_not_connected() {
        let m = mask(&["#.", ".#"]);
        let c = connected_component_at(&m, (0, 0)).unwrap();
        assert_eq!(c.size, 1);
        assert_eq!(c.area_cells, 1);
    }

    #[test]
    fn unset_seed_errors() {
        let m = mask(&["#.", ".#"]);
        assert!(matches!(connected_component_at(&m, (0, 1)), Err(Error::SeedNotSet(0, 1))));
        assert!(connected_component_at(&m, (5, 5)).is_err());
    }

    #[test]
    fn snake_component() {
        let m = mask(&["###.", "..#.", "###.", "#..."]);
        let c = connected_component_at(&m, (3, 0)).unwrap();
        assert_eq!(c.bbox, GridBox::new(0, 0, 4, 3));
        assert_eq!(c.size, 8);
    }
}
