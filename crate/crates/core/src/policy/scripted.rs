//! Hand-written policies used as behavioural oracles.

use super::history::HistoryWindow;
use crate::agents::{AgentAction, Channel, Direction, Item, Observation, Offset};
use crate::env::Season;

/// Growth at which the farmer harvests P1.
pub const FARMER_RIPE: f64 = 0.6;
/// Seed bank size the farmer aims for on fertile cells.
const SEED_TARGET: f64 = 2.0;
/// Summer phase after which the farmer returns to the irrigated area.
const HOME_PHASE: f64 = 0.45;

struct View<'a>(&'a Observation);

impl View<'_> {
    fn r(&self) -> i64 {
        Observation::radius()
    }
    fn inb(&self, dx: i64, dy: i64) -> bool {
        dx.abs() <= self.r() && dy.abs() <= self.r() && self.0.in_bounds(dx, dy)
    }
    fn get(&self, dx: i64, dy: i64, ch: Channel) -> f64 {
        if self.inb(dx, dy) {
            self.0.get(dx, dy, ch)
        } else {
            0.0
        }
    }
    fn p1(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::P1Growth) > 0.0
    }
    fn p2(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::P2Growth) > 0.0
    }
    fn p3(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::P3) > 0.0
    }
    fn watered(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::Watered) > 0.0
    }
    fn source(&self, dx: i64, dy: i64) -> bool {
        self.get(dx, dy, Channel::WaterSource) > 0.0
    }
    /// Cells kept wet permanently: sources and cells touching a visible source.
    fn fertile(&self, dx: i64, dy: i64) -> bool {
        self.inb(dx, dy) && (-1..=1).any(|ey| (-1..=1).any(|ex| self.source(dx + ex, dy + ey)))
    }
    fn near_p1(&self, dx: i64, dy: i64) -> bool {
        (-1..=1).any(|ey| (-1..=1).any(|ex| self.p1(dx + ex, dy + ey)))
    }
    /// In-bounds cells ordered by Manhattan distance, then row-major.
    fn cells(&self) -> Vec<(i64, i64)> {
        let r = self.r();
        let mut v: Vec<(i64, i64)> = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| self.inb(dx, dy))
            .collect();
        v.sort_by_key(|&(dx, dy)| dx.abs() + dy.abs());
        v
    }
    fn nearest(&self, pred: impl Fn(i64, i64) -> bool) -> Option<(i64, i64)> {
        self.cells().into_iter().find(|&(dx, dy)| pred(dx, dy))
    }
    /// Like `nearest`, choosing among equally near matches by `salt`.
    fn nearest_salted(&self, pred: impl Fn(i64, i64) -> bool, salt: u64) -> Option<(i64, i64)> {
        let hits: Vec<(i64, i64)> = self
            .cells()
            .into_iter()
            .filter(|&(dx, dy)| pred(dx, dy))
            .collect();
        let d0 = hits.first().map(|&(dx, dy)| dx.abs() + dy.abs())?;
        let tied = hits
            .iter()
            .take_while(|&&(dx, dy)| dx.abs() + dy.abs() == d0)
            .count();
        Some(hits[(salt % tied as u64) as usize])
    }
}

/// Greedy step toward a relative target, larger axis first.
fn step_toward(dx: i64, dy: i64) -> Direction {
    if dx.abs() >= dy.abs() {
        if dx > 0 {
            Direction::East
        } else {
            Direction::West
        }
    } else if dy > 0 {
        Direction::South
    } else {
        Direction::North
    }
}

/// FNV-1a over the encoded current observation and the last action.
fn history_hash(h: &HistoryWindow) -> u64 {
    let mut x: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |b: u64| {
        x ^= b;
        x = x.wrapping_mul(0x0100_0000_01b3);
    };
    for f in h.current_features() {
        eat(u64::from(f.to_bits()));
    }
    if let Some(t) = h.last_transition() {
        let (k, s) = t.action.to_factors();
        eat(k as u64 * 16 + s.map_or(15, |s| s as u64));
    }
    crate::rng::mix(x)
}

/// Keep the last heading, turning occasionally and at the border.
fn explore(h: &HistoryWindow, v: &View<'_>) -> AgentAction {
    let hash = history_hash(h);
    let open = |d: Direction| {
        let (dx, dy) = d.delta();
        v.inb(dx, dy)
    };
    let last = match h.last_transition().map(|t| t.action) {
        Some(AgentAction::Move(d)) => Some(d),
        _ => None,
    };
    if let Some(d) = last {
        if open(d) && !hash.is_multiple_of(8) {
            return AgentAction::Move(d);
        }
    }
    let options: Vec<Direction> = Direction::ALL.into_iter().filter(|&d| open(d)).collect();
    let pick = options[((hash >> 8) % options.len() as u64) as usize];
    AgentAction::Move(pick)
}

fn goto(v: &View<'_>, h: &HistoryWindow, target: Option<(i64, i64)>) -> AgentAction {
    match target {
        Some((dx, dy)) if (dx, dy) != (0, 0) => AgentAction::Move(step_toward(dx, dy)),
        _ => explore(h, v),
    }
}

/// Farmer: harvest ripe P1, weed P2 around crops, water dry P1, move P1
/// seeds onto the permanently wet cells around the source.
pub fn scripted_farmer(h: &HistoryWindow) -> AgentAction {
    let obs = h.current();
    let v = View(obs);
    let inv = obs.inventory;
    let salt = history_hash(h);
    let ripe = |dx, dy| v.get(dx, dy, Channel::P1Growth) >= FARMER_RIPE;
    let free = |dx: i64, dy: i64| (dx, dy) == (0, 0) || v.get(dx, dy, Channel::Agents) == 0.0;

    if ripe(0, 0) || v.p3(0, 0) {
        return AgentAction::Harvest;
    }

    // Late summer: stay with the irrigated crops, which are worth the most.
    let harvest_time = obs.season == Season::Summer && obs.season_phase >= HOME_PHASE;
    if harvest_time {
        let target = v
            .nearest_salted(
                |dx, dy| ripe(dx, dy) && v.fertile(dx, dy) && free(dx, dy),
                salt,
            )
            .or_else(|| {
                v.nearest_salted(
                    |dx, dy| ripe(dx, dy) && v.watered(dx, dy) && free(dx, dy),
                    salt,
                )
            })
            .or_else(|| {
                if v.fertile(0, 0) {
                    None
                } else {
                    v.nearest(|dx, dy| v.source(dx, dy))
                }
            });
        if target.is_some() {
            return goto(&v, h, target);
        }
    }

    // Weed: P2 plants next to crops or on wet soil, P2 seeds where they
    // could outcompete the P1 seed bank.
    let s1 = |dx, dy| v.get(dx, dy, Channel::Seeds1);
    for off in 0..9 {
        let o = Offset::from_index(off).expect("nine offsets");
        let (dx, dy) = (i64::from(o.dx()), i64::from(o.dy()));
        if !v.inb(dx, dy) {
            continue;
        }
        let seeds2 = v.get(dx, dy, Channel::Seeds2) > 0.0;
        let wet = v.fertile(dx, dy) || v.watered(dx, dy);
        if (v.p2(dx, dy) && (wet || v.near_p1(dx, dy)))
            || (seeds2 && wet && s1(dx, dy) < SEED_TARGET)
        {
            return AgentAction::Protect(o);
        }
    }

    let dry_p1 = |dx, dy| v.p1(dx, dy) && !v.watered(dx, dy);
    if inv.water_units > 0 && dry_p1(0, 0) {
        return AgentAction::Drop(Item::Water);
    }

    let plantable = |dx, dy| v.fertile(dx, dy) && !v.p3(dx, dy) && s1(dx, dy) < SEED_TARGET;
    if inv.seeds1 > 0 && plantable(0, 0) {
        return AgentAction::Drop(Item::Seed1);
    }
    let spare_seed = |dx, dy| s1(dx, dy) > 0.0 && (!v.fertile(dx, dy) || s1(dx, dy) > SEED_TARGET);
    if inv.seeds1 == 0 && spare_seed(0, 0) && v.nearest(plantable).is_some() {
        return AgentAction::Pick(Item::Seed1);
    }
    let any_dry = v.nearest(dry_p1);
    if inv.water_units == 0 && any_dry.is_some() && (v.watered(0, 0) || v.source(0, 0)) {
        return AgentAction::Pick(Item::Water);
    }

    let target = (if inv.water_units > 0 { any_dry } else { None })
        .or_else(|| v.nearest(|dx, dy| v.p3(dx, dy) && dx.abs() + dy.abs() <= 3))
        .or_else(|| {
            if inv.seeds1 > 0 {
                v.nearest_salted(plantable, salt)
            } else {
                None
            }
        })
        .or_else(|| {
            if inv.seeds1 == 0 && v.nearest(plantable).is_some() {
                v.nearest_salted(spare_seed, salt)
            } else {
                None
            }
        })
        .or_else(|| {
            if v.fertile(0, 0) {
                None
            } else {
                v.nearest(|dx, dy| v.source(dx, dy))
            }
        });
    if target.is_none() && v.fertile(0, 0) {
        // Idle at home: pace inside the wet area.
        let d = Direction::ALL
            .into_iter()
            .find(|&d| {
                let (dx, dy) = d.delta();
                v.fertile(dx, dy)
            })
            .unwrap_or(Direction::North);
        return AgentAction::Move(d);
    }
    goto(&v, h, target)
}

/// Forager: harvest wild plants, walking to the nearest visible one.
pub fn scripted_forager(h: &HistoryWindow) -> AgentAction {
    let v = View(h.current());
    if v.p3(0, 0) {
        return AgentAction::Harvest;
    }
    let target = v.nearest(|dx, dy| v.p3(dx, dy));
    goto(&v, h, target)
}
