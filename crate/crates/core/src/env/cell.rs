use serde::{Deserialize, Serialize};

/// Ecological state of one grid cell.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub agents_here: u32,
    pub seeds1: u32,
    pub seeds2: u32,
    /// Growth of the domesticate, 0 when absent.
    pub growth1: f64,
    /// Growth of the weed, 0 when absent.
    pub growth2: f64,
    pub water_source: bool,
    pub watered: bool,
    /// Steps this season during which the cell was watered while holding P1.
    pub w_time: u32,
    pub p3_present: bool,
}

impl CellState {
    pub fn has_p1(&self) -> bool {
        self.growth1 > 0.0
    }

    pub fn has_p2(&self) -> bool {
        self.growth2 > 0.0
    }

    /// Any plant (P1, P2 or P3) on the cell.
    pub fn has_plant(&self) -> bool {
        self.has_p1() || self.has_p2() || self.p3_present
    }

    pub fn clear_plants(&mut self) {
        self.growth1 = 0.0;
        self.growth2 = 0.0;
        self.p3_present = false;
    }
}
