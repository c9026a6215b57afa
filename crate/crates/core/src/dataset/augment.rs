use rand::Rng;

use crate::imaging::ChemImage;

pub const MAX_SHIFT: i32 = 5;

/// A quarter-turn rotation followed by an integer shift `(dx, dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AugmentParams {
    pub quarter_turns: u32,
    pub dx: i32,
    pub dy: i32,
}

impl AugmentParams {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        AugmentParams {
            quarter_turns: rng.gen_range(0..4),
            dx: rng.gen_range(-MAX_SHIFT..=MAX_SHIFT),
            dy: rng.gen_range(-MAX_SHIFT..=MAX_SHIFT),
        }
    }
}

pub fn augment_image_with(image: &ChemImage, params: AugmentParams) -> ChemImage {
    let rotated = image.rotate90(params.quarter_turns);
    if params.dx == 0 && params.dy == 0 {
        rotated
    } else {
        rotated.translate(params.dx, params.dy)
    }
}

pub fn augment_image<R: Rng + ?Sized>(image: &ChemImage, rng: &mut R) -> ChemImage {
    augment_image_with(image, AugmentParams::sample(rng))
}
