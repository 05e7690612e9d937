use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{germination_probabilities, CellState, EnvConfig, DISPERSAL_WINDOW, INITIAL_GROWTH};
use crate::rng::{rng_from, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Season {
    Summer,
    Winter,
}

impl Season {
    /// Season and step-within-season of global step `t`. Episodes open with summer.
    pub fn at(t: usize, season_length: usize) -> (Season, usize) {
        let block = t / season_length;
        let season = if block.is_multiple_of(2) {
            Season::Summer
        } else {
            Season::Winter
        };
        (season, t % season_length)
    }
}

/// Full ecological state of one environment instance.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    width: usize,
    height: usize,
    grid: Vec<CellState>,
    /// Cells in the 3x3 neighbourhood of a water source; watered every step.
    irrigated: Vec<bool>,
    pub t: usize,
    pub season: Season,
    pub season_step: usize,
    pub rng: SimRng,
}

impl EnvState {
    /// Fresh episode: central water source, random seed bank, summer germination.
    pub fn reset(cfg: &EnvConfig) -> Self {
        let (width, height) = (cfg.grid_width, cfg.grid_height);
        let mut grid = vec![CellState::default(); width * height];
        let patch = cfg.water_patch;
        let (x0, y0) = ((width - patch) / 2, (height - patch) / 2);
        for y in y0..y0 + patch {
            for x in x0..x0 + patch {
                let c = &mut grid[y * width + x];
                c.water_source = true;
                c.watered = true;
            }
        }

        let mut irrigated = vec![false; width * height];
        for y in 0..height {
            for x in 0..width {
                if !grid[y * width + x].water_source {
                    continue;
                }
                for (nx, ny) in moore(x, y, width, height) {
                    irrigated[ny * width + nx] = true;
                }
            }
        }
        for (c, &irr) in grid.iter_mut().zip(&irrigated) {
            c.watered |= irr;
        }

        let mut rng = rng_from(cfg.rng_seed);
        for c in grid.iter_mut() {
            if rng.gen_bool(cfg.init_seed_fraction) {
                c.seeds1 += 1;
            }
            if rng.gen_bool(cfg.init_seed_fraction) {
                c.seeds2 += 1;
            }
        }

        let mut state = Self {
            width,
            height,
            grid,
            irrigated,
            t: 0,
            season: Season::Summer,
            season_step: 0,
            rng,
        };
        state.begin_summer(cfg);
        state
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[CellState] {
        &self.grid
    }

    pub fn cells_mut(&mut self) -> &mut [CellState] {
        &mut self.grid
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn cell(&self, x: usize, y: usize) -> &CellState {
        &self.grid[y * self.width + x]
    }

    pub fn cell_mut(&mut self, x: usize, y: usize) -> &mut CellState {
        &mut self.grid[y * self.width + x]
    }

    pub fn is_irrigated(&self, x: usize, y: usize) -> bool {
        self.irrigated[y * self.width + x]
    }

    pub fn is_done(&self, cfg: &EnvConfig) -> bool {
        self.t >= cfg.episode_length()
    }

    pub fn p1_count(&self) -> usize {
        self.grid.iter().filter(|c| c.has_p1()).count()
    }

    pub fn p2_count(&self) -> usize {
        self.grid.iter().filter(|c| c.has_p2()).count()
    }

    pub fn p3_count(&self) -> usize {
        self.grid.iter().filter(|c| c.p3_present).count()
    }

    pub fn plant_count(&self) -> usize {
        self.grid.iter().filter(|c| c.has_plant()).count()
    }

    /// Sample germination on every cell and reset the watering clocks.
    ///
    /// Cells occupied by a wild plant still draw an outcome but stay unplanted.
    pub fn begin_summer(&mut self, cfg: &EnvConfig) {
        for c in self.grid.iter_mut() {
            c.w_time = 0;
            let g = germination_probabilities(c, cfg);
            let u: f64 = self.rng.gen();
            if c.p3_present || c.has_p1() || c.has_p2() {
                continue;
            }
            if u < g.p1 {
                c.growth1 = INITIAL_GROWTH;
                c.seeds1 -= 1;
            } else if u < g.p1 + g.p2 {
                c.growth2 = INITIAL_GROWTH;
                c.seeds2 -= 1;
            }
        }
    }

    /// One dispersal step: every cell may receive a seed of each species.
    ///
    /// The neighbour count runs over the Moore neighbourhood including the
    /// focal cell, with watered P1 counting double, and the focal plant is
    /// then added once more.
    pub fn disperse_seeds(&mut self, cfg: &EnvConfig) {
        let (w, h) = (self.width, self.height);
        let weight1: Vec<u32> = self
            .grid
            .iter()
            .map(|c| {
                if c.has_p1() {
                    1 + u32::from(c.watered)
                } else {
                    0
                }
            })
            .collect();
        let weight2: Vec<u32> = self.grid.iter().map(|c| u32::from(c.has_p2())).collect();

        for y in 0..h {
            for x in 0..w {
                let mut n1 = 0u32;
                let mut n2 = 0u32;
                for (nx, ny) in moore(x, y, w, h) {
                    n1 += weight1[ny * w + nx];
                    n2 += weight2[ny * w + nx];
                }
                let i = y * w + x;
                let focal1 = u32::from(self.grid[i].has_p1());
                let focal2 = u32::from(self.grid[i].has_p2());
                let rho1 = (cfg.d1 * f64::from(n1 + focal1)).clamp(0.0, 1.0);
                let rho2 = (cfg.d2 * f64::from(n2 + focal2)).clamp(0.0, 1.0);
                let (u1, u2): (f64, f64) = (self.rng.gen(), self.rng.gen());
                if u1 < rho1 {
                    self.grid[i].seeds1 += 1;
                }
                if u2 < rho2 {
                    self.grid[i].seeds2 += 1;
                }
            }
        }
    }

    /// All plants die; each stored seed survives independently.
    pub fn begin_winter(&mut self, cfg: &EnvConfig) {
        for c in self.grid.iter_mut() {
            c.clear_plants();
            c.w_time = 0;
            c.seeds1 = (0..c.seeds1)
                .filter(|_| self.rng.gen_bool(cfg.seed_survival))
                .count() as u32;
            c.seeds2 = (0..c.seeds2)
                .filter(|_| self.rng.gen_bool(cfg.seed_survival))
                .count() as u32;
        }
    }

    /// Wild plants appear independently on every cell, displacing P1 and P2.
    /// Returns the number of cells that newly gained a wild plant.
    pub fn spawn_wild(&mut self, cfg: &EnvConfig) -> usize {
        let mut spawned = 0;
        for c in self.grid.iter_mut() {
            if self.rng.gen_bool(cfg.eta3) {
                if !c.p3_present {
                    spawned += 1;
                }
                c.p3_present = true;
                c.growth1 = 0.0;
                c.growth2 = 0.0;
            }
        }
        spawned
    }

    /// Evaporation of agent-supplied water, irrigation around the source, and
    /// the watering clock of P1 cells.
    pub fn water_step(&mut self, cfg: &EnvConfig) {
        for (c, &irrigated) in self.grid.iter_mut().zip(&self.irrigated) {
            if c.water_source || irrigated {
                c.watered = true;
            } else if c.watered && self.rng.gen_bool(cfg.evap_prob) {
                c.watered = false;
            }
            if c.watered && c.has_p1() {
                c.w_time += 1;
            }
        }
    }

    /// Linear maturation from the initial growth to 1 over one summer.
    pub fn grow_plants(&mut self, cfg: &EnvConfig) {
        let rate = (1.0 - INITIAL_GROWTH) / (cfg.season_length - 1) as f64;
        for c in self.grid.iter_mut() {
            if c.growth1 > 0.0 {
                c.growth1 = (c.growth1 + rate).min(1.0);
            }
            if c.growth2 > 0.0 {
                c.growth2 = (c.growth2 + rate).min(1.0);
            }
        }
    }

    /// Ecology of the current step followed by the clock advance and, on a
    /// season boundary, the onset handler of the new season.
    pub fn ecology_step(&mut self, cfg: &EnvConfig) {
        if self.season == Season::Summer {
            let window = DISPERSAL_WINDOW.min(cfg.season_length);
            if self.season_step >= cfg.season_length - window {
                self.disperse_seeds(cfg);
            }
            self.grow_plants(cfg);
        }
        self.spawn_wild(cfg);
        self.water_step(cfg);

        self.t += 1;
        let (season, step) = Season::at(self.t, cfg.season_length);
        self.season = season;
        self.season_step = step;
        if step == 0 {
            match season {
                Season::Summer => self.begin_summer(cfg),
                Season::Winter => self.begin_winter(cfg),
            }
        }
    }
}

/// In-bounds Moore neighbourhood of (x, y), the cell itself included.
pub(crate) fn moore(
    x: usize,
    y: usize,
    w: usize,
    h: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let xs = x.saturating_sub(1)..=(x + 1).min(w - 1);
    let ys = y.saturating_sub(1)..=(y + 1).min(h - 1);
    ys.flat_map(move |ny| xs.clone().map(move |nx| (nx, ny)))
}
