use super::{CellState, EnvConfig};

/// Germination outcome distribution of one cell at summer onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Germination {
    pub p1: f64,
    pub p2: f64,
    pub p_empty: f64,
}

/// Probability that a cell germinates P1, P2 or nothing.
///
/// Seeds inhibit the germination of the other species through a saturating
/// term; the clipped rates are sharpened by the inverse temperature and
/// renormalised.
pub fn germination_probabilities(cell: &CellState, cfg: &EnvConfig) -> Germination {
    let s1 = f64::from(cell.seeds1);
    let s2 = f64::from(cell.seeds2);
    let germ1 = cfg.alpha1 * s1 / (1.0 + cfg.beta21 * s2);
    let germ2 = cfg.alpha2 * s2 / (1.0 + cfg.beta12 * s1);
    let z1 = germ1.clamp(0.0, 1.0);
    let z2 = germ2.clamp(0.0, 1.0);
    let z_empty = 1.0 - (z1 + z2).clamp(0.0, 1.0);

    let w1 = z1.powf(cfg.temp);
    let w2 = z2.powf(cfg.temp);
    let w_empty = z_empty.powf(cfg.temp);
    let total = w1 + w2 + w_empty;
    // z1 + z2 + z_empty >= 1, so at least one term is >= 1/3 and total > 0.
    Germination {
        p1: w1 / total,
        p2: w2 / total,
        p_empty: w_empty / total,
    }
}

/// Logistic value of P1 scaled by the watering bonus.
fn p1_value(cell: &CellState, cfg: &EnvConfig) -> f64 {
    if !cell.has_p1() {
        return 0.0;
    }
    let logistic = 1.0 / (1.0 + (-cfg.xi * (cell.growth1 - 1.0)).exp());
    logistic * (1.0 + f64::from(cell.w_time))
}

/// Reward of the harvest action on `cell`, without modifying it.
pub fn harvest_reward(cell: &CellState, cfg: &EnvConfig, did_harvest: bool) -> f64 {
    if !did_harvest {
        return 0.0;
    }
    let r3 = if cell.p3_present { 1.0 } else { 0.0 };
    p1_value(cell, cfg) + r3 - cfg.c_harvest
}

/// What a harvest removed from a cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Harvest {
    pub reward: f64,
    pub took_p1: bool,
    pub took_p2: bool,
    pub took_p3: bool,
}

/// Harvest every plant on `cell`. P2 is removed but yields nothing.
pub fn harvest(cell: &mut CellState, cfg: &EnvConfig) -> Harvest {
    let out = Harvest {
        reward: harvest_reward(cell, cfg, true),
        took_p1: cell.has_p1(),
        took_p2: cell.has_p2(),
        took_p3: cell.p3_present,
    };
    cell.clear_plants();
    out
}
