//! Channelized reference permeability layouts for the built-in experiments.
//!
//! Layouts are drawn on a 32 x 32 lattice of 4 x 4-cell tiles of the
//! 128 x 128 reference grid, so every feature survives nearest-centre
//! resampling down to n = 32 and lines up with coarse blocks up to
//! `hdiv = 32`.

use super::raster::CoefficientField;

pub const REFERENCE_N: usize = 128;
const TILE: usize = 4;
const TILES: usize = REFERENCE_N / TILE;

/// Tile rectangle `[x0, x1) x [y0, y1)`.
type Rect = (usize, usize, usize, usize);

/// Which shipped raster to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceLayout {
    /// Single continuum, values {10, 1000}.
    SingleChannels,
    /// First continuum of the dual cases, values {10, 1e4}.
    DualMatrix,
    /// Second continuum of the steady dual case, values {0.5, 10}.
    DualFracturesSteady,
    /// Second continuum of the transient dual case, values {1, 10}.
    DualFracturesTransient,
}

impl ReferenceLayout {
    pub const ALL: [ReferenceLayout; 4] = [
        ReferenceLayout::SingleChannels,
        ReferenceLayout::DualMatrix,
        ReferenceLayout::DualFracturesSteady,
        ReferenceLayout::DualFracturesTransient,
    ];

    pub fn file_name(&self) -> &'static str {
        match self {
            ReferenceLayout::SingleChannels => "single_kappa.txt",
            ReferenceLayout::DualMatrix => "dual_kappa1.txt",
            ReferenceLayout::DualFracturesSteady => "dual_steady_kappa2.txt",
            ReferenceLayout::DualFracturesTransient => "dual_transient_kappa2.txt",
        }
    }

    /// (background, channel) values.
    pub fn levels(&self) -> (f64, f64) {
        match self {
            ReferenceLayout::SingleChannels => (10.0, 1000.0),
            ReferenceLayout::DualMatrix => (10.0, 1e4),
            ReferenceLayout::DualFracturesSteady => (0.5, 10.0),
            ReferenceLayout::DualFracturesTransient => (1.0, 10.0),
        }
    }

    fn features(&self) -> &'static [Rect] {
        match self {
            ReferenceLayout::SingleChannels => &SINGLE,
            ReferenceLayout::DualMatrix => &DUAL_MATRIX,
            ReferenceLayout::DualFracturesSteady | ReferenceLayout::DualFracturesTransient => &DUAL_FRACTURES,
        }
    }

    /// The 128 x 128 field.
    pub fn field(&self) -> CoefficientField {
        let (bg, ch) = self.levels();
        let mut values = vec![bg; REFERENCE_N * REFERENCE_N];
        for &(x0, x1, y0, y1) in self.features() {
            debug_assert!(x1 <= TILES && y1 <= TILES);
            for cy in y0 * TILE..y1 * TILE {
                for cx in x0 * TILE..x1 * TILE {
                    values[cy * REFERENCE_N + cx] = ch;
                }
            }
        }
        CoefficientField::new(REFERENCE_N, values).expect("reference levels are positive")
    }
}

// Long horizontal channels, a few vertical connectors and square inclusions.
const SINGLE: [Rect; 11] = [
    (2, 30, 5, 6),
    (0, 24, 14, 15),
    (6, 32, 22, 23),
    (3, 27, 28, 29),
    (9, 10, 7, 13),
    (20, 21, 16, 21),
    (27, 28, 24, 27),
    (4, 6, 17, 19),
    (14, 16, 9, 11),
    (24, 26, 10, 12),
    (12, 14, 25, 27),
];

const DUAL_MATRIX: [Rect; 9] = [
    (1, 29, 4, 5),
    (4, 32, 12, 13),
    (0, 26, 20, 21),
    (5, 31, 27, 28),
    (22, 23, 5, 11),
    (3, 5, 8, 10),
    (14, 16, 16, 18),
    (28, 30, 17, 19),
    (9, 11, 23, 25),
];

// Disjoint from DUAL_MATRIX.
const DUAL_FRACTURES: [Rect; 8] = [
    (6, 7, 6, 11),
    (16, 17, 14, 19),
    (25, 26, 22, 26),
    (12, 13, 29, 32),
    (0, 12, 1, 2),
    (24, 31, 9, 10),
    (12, 22, 24, 25),
    (20, 22, 1, 3),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_layers_are_disjoint() {
        let m = ReferenceLayout::DualMatrix.field();
        let f = ReferenceLayout::DualFracturesSteady.field();
        for c in 0..REFERENCE_N * REFERENCE_N {
            assert!(!(m.value(c) > 10.0 && f.value(c) > 0.5), "cell {c} in both channel sets");
        }
    }

    #[test]
    fn levels_are_two_valued() {
        for layout in ReferenceLayout::ALL {
            let (bg, ch) = layout.levels();
            let f = layout.field();
            assert!(f.values().iter().all(|v| *v == bg || *v == ch));
            assert_eq!(f.min(), bg);
            assert_eq!(f.max(), ch);
        }
    }

    #[test]
    fn matrix_dominates_fractures() {
        let m = ReferenceLayout::DualMatrix.field();
        for layout in [ReferenceLayout::DualFracturesSteady, ReferenceLayout::DualFracturesTransient] {
            let f = layout.field();
            assert!((0..REFERENCE_N * REFERENCE_N).all(|c| m.value(c) >= f.value(c)));
        }
    }
}
