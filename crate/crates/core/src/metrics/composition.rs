use serde::{Deserialize, Serialize};

use crate::env::EnvState;

/// Neighbourhood used when counting weeds around a crop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighbourhood {
    /// The 8 surrounding cells.
    #[default]
    Moore,
    /// The 4 edge-sharing cells.
    VonNeumann,
}

impl Neighbourhood {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Neighbourhood::Moore => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
            Neighbourhood::VonNeumann => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
        }
    }
}

/// Total number of P2 neighbours over all P1 cells, and the number of P1 cells.
pub fn composition_counts(state: &EnvState, nb: Neighbourhood) -> (u64, u64) {
    let (w, h) = (state.width() as i64, state.height() as i64);
    let cells = state.cells();
    let mut weeds = 0u64;
    let mut crops = 0u64;
    for y in 0..h {
        for x in 0..w {
            if !cells[(y * w + x) as usize].has_p1() {
                continue;
            }
            crops += 1;
            for &(dx, dy) in nb.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h && cells[(ny * w + nx) as usize].has_p2()
                {
                    weeds += 1;
                }
            }
        }
    }
    (weeds, crops)
}

/// Mean number of P2 plants around each P1 plant; 0 when there is no P1.
pub fn neighbourhood_composition(state: &EnvState, nb: Neighbourhood) -> f64 {
    match composition_counts(state, nb) {
        (_, 0) => 0.0,
        (weeds, crops) => weeds as f64 / crops as f64,
    }
}
