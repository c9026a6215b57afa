use std::io::{self, Write};

use super::layout::Layout2D;
use super::ImagingError;
use crate::smiles::{BondOrder, MolecularGraph};

pub const DEFAULT_SIDE: usize = 60;
pub const PIXELS_PER_UNIT: f64 = 3.0;

/// Square single-channel raster, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemImage {
    side: usize,
    pixels: Vec<f32>,
}

pub fn atom_intensity(atomic_number: u8) -> f32 {
    (atomic_number as f32 / 80.0).min(1.0)
}

pub fn bond_intensity(order: BondOrder) -> f32 {
    match order {
        BondOrder::Single => 0.2,
        BondOrder::Double => 0.4,
        BondOrder::Triple => 0.6,
        BondOrder::Aromatic => 0.3,
    }
}

/// `a / n` rounded half away from zero, for `n > 0`.
fn div_round(a: i64, n: i64) -> i64 {
    a.signum() * ((2 * a.abs() + n) / (2 * n))
}

impl ChemImage {
    pub fn zeros(side: usize) -> Self {
        ChemImage {
            side,
            pixels: vec![0.0; side * side],
        }
    }

    pub fn from_pixels(side: usize, pixels: Vec<f32>) -> Option<Self> {
        (pixels.len() == side * side).then_some(ChemImage { side, pixels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.pixels[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.pixels[row * self.side + col] = value;
    }

    pub fn nonzero_count(&self) -> usize {
        self.pixels.iter().filter(|&&v| v != 0.0).count()
    }

    /// Rotates by `quarter_turns` × 90° counter-clockwise about the grid
    /// center.
    pub fn rotate90(&self, quarter_turns: u32) -> ChemImage {
        let n = self.side;
        let mut out = self.clone();
        for _ in 0..quarter_turns % 4 {
            let src = out.clone();
            for r in 0..n {
                for c in 0..n {
                    out.pixels[(n - 1 - c) * n + r] = src.pixels[r * n + c];
                }
            }
        }
        out
    }

    /// Shifts content by `(dx, dy)` pixels (right, down). Pixels leaving the
    /// grid are dropped; vacated pixels are zero.
    pub fn translate(&self, dx: i32, dy: i32) -> ChemImage {
        let n = self.side as i64;
        let mut out = ChemImage::zeros(self.side);
        for r in 0..n {
            for c in 0..n {
                let (nr, nc) = (r + dy as i64, c + dx as i64);
                if (0..n).contains(&nr) && (0..n).contains(&nc) {
                    out.pixels[(nr * n + nc) as usize] = self.pixels[(r * n + c) as usize];
                }
            }
        }
        out
    }

    /// Binary 8-bit portable graymap.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.side, self.side)?;
        let bytes: Vec<u8> = self
            .pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        w.write_all(&bytes)
    }
}

/// Integer pixel offsets `(dx, dy)` of each laid-out atom from the image
/// center, y pointing up.
pub fn pixel_offsets(layout: &Layout2D) -> Vec<(i64, i64)> {
    if layout.positions().is_empty() {
        return Vec::new();
    }
    let (x0, y0, x1, y1) = layout.bounds();
    let (mx, my) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    layout
        .positions()
        .iter()
        .map(|p| {
            (
                (PIXELS_PER_UNIT * (p[0] - mx)).round() as i64,
                (PIXELS_PER_UNIT * (p[1] - my)).round() as i64,
            )
        })
        .collect()
}

/// `(row, col)` of every laid-out atom, in layout order.
pub fn atom_pixels(layout: &Layout2D, side: usize) -> Result<Vec<(usize, usize)>, ImagingError> {
    let c = (side.saturating_sub(1) / 2) as i64;
    let offsets = pixel_offsets(layout);
    let reach = offsets.iter().map(|&(x, y)| x.abs().max(y.abs())).max().unwrap_or(0);
    if side == 0 || reach > c {
        return Err(ImagingError::DoesNotFit {
            required: (2 * reach + 1) as usize,
            side,
        });
    }
    Ok(offsets
        .into_iter()
        .map(|(x, y)| ((c - y) as usize, (c + x) as usize))
        .collect())
}

/// Draws bonds as integer lines, then overwrites each atom's pixel.
pub fn rasterize(graph: &MolecularGraph, layout: &Layout2D, side: usize) -> Result<ChemImage, ImagingError> {
    let cells = atom_pixels(layout, side)?;
    let mut img = ChemImage::zeros(side);
    let local = |a: usize| layout.atoms().binary_search(&a).ok();
    for bond in graph.bonds() {
        let (Some(i), Some(j)) = (local(bond.a), local(bond.b)) else {
            continue;
        };
        let (r0, c0) = (cells[i].0 as i64, cells[i].1 as i64);
        let (dr, dc) = (cells[j].0 as i64 - r0, cells[j].1 as i64 - c0);
        let steps = dr.abs().max(dc.abs());
        let value = bond_intensity(bond.order);
        for s in 0..=steps {
            let (r, c) = if steps == 0 {
                (r0, c0)
            } else {
                (r0 + div_round(s * dr, steps), c0 + div_round(s * dc, steps))
            };
            let px = &mut img.pixels[r as usize * side + c as usize];
            *px = px.max(value);
        }
    }
    for (k, &atom) in layout.atoms().iter().enumerate() {
        let (r, c) = cells[k];
        img.set(r, c, atom_intensity(graph.atom(atom).element));
    }
    Ok(img)
}
