use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::South,
        Direction::East,
        Direction::West,
    ];

    /// Grid displacement; north is towards row 0.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::North => (0, -1),
            Direction::South => (0, 1),
            Direction::East => (1, 0),
            Direction::West => (-1, 0),
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&d| d == self).unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Item {
    Water,
    Seed1,
    Seed2,
}

impl Item {
    pub const ALL: [Item; 3] = [Item::Water, Item::Seed1, Item::Seed2];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&i| i == self).unwrap()
    }
}

/// Target of a protect action, relative to the agent. Both components lie in -1..=1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Offset {
    dx: i8,
    dy: i8,
}

impl Offset {
    pub const CENTER: Offset = Offset { dx: 0, dy: 0 };

    pub fn new(dx: i8, dy: i8) -> Option<Self> {
        ((-1..=1).contains(&dx) && (-1..=1).contains(&dy)).then_some(Self { dx, dy })
    }

    pub fn dx(self) -> i8 {
        self.dx
    }

    pub fn dy(self) -> i8 {
        self.dy
    }

    /// Row-major index in the 3x3 block, 0 = north-west, 4 = centre.
    pub fn index(self) -> usize {
        ((self.dy + 1) * 3 + (self.dx + 1)) as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < 9).then(|| Self {
            dx: (i % 3) as i8 - 1,
            dy: (i / 3) as i8 - 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentAction {
    Move(Direction),
    Pick(Item),
    Drop(Item),
    Harvest,
    Protect(Offset),
}

/// Discriminant of [`AgentAction`], the root factor of the action space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Move,
    Pick,
    Drop,
    Harvest,
    Protect,
}

impl ActionKind {
    pub const ALL: [ActionKind; 5] = [
        ActionKind::Move,
        ActionKind::Pick,
        ActionKind::Drop,
        ActionKind::Harvest,
        ActionKind::Protect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Move => "move",
            ActionKind::Pick => "pick",
            ActionKind::Drop => "drop",
            ActionKind::Harvest => "harvest",
            ActionKind::Protect => "protect",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Factor sizes of the multi-discrete encoding: kind, direction, item, offset.
pub const ACTION_FACTORS: [usize; 4] = [5, 4, 3, 9];

impl AgentAction {
    pub fn kind(self) -> ActionKind {
        match self {
            AgentAction::Move(_) => ActionKind::Move,
            AgentAction::Pick(_) => ActionKind::Pick,
            AgentAction::Drop(_) => ActionKind::Drop,
            AgentAction::Harvest => ActionKind::Harvest,
            AgentAction::Protect(_) => ActionKind::Protect,
        }
    }

    /// Sub-factor consulted for each kind (`None` for harvest).
    pub fn sub_factor(kind: usize) -> Option<usize> {
        match kind {
            0 => Some(1),
            1 | 2 => Some(2),
            3 => None,
            4 => Some(3),
            _ => None,
        }
    }

    /// `(kind index, sub-factor choice)` of this action.
    pub fn to_factors(self) -> (usize, Option<usize>) {
        match self {
            AgentAction::Move(d) => (0, Some(d.index())),
            AgentAction::Pick(i) => (1, Some(i.index())),
            AgentAction::Drop(i) => (2, Some(i.index())),
            AgentAction::Harvest => (3, None),
            AgentAction::Protect(o) => (4, Some(o.index())),
        }
    }

    pub fn from_factors(kind: usize, sub: Option<usize>) -> Option<Self> {
        let sub = || sub.ok_or(());
        Some(match kind {
            0 => AgentAction::Move(*Direction::ALL.get(sub().ok()?)?),
            1 => AgentAction::Pick(*Item::ALL.get(sub().ok()?)?),
            2 => AgentAction::Drop(*Item::ALL.get(sub().ok()?)?),
            3 => AgentAction::Harvest,
            4 => AgentAction::Protect(Offset::from_index(sub().ok()?)?),
            _ => return None,
        })
    }

    /// Compact textual code used in trace files, e.g. `move:N`, `drop:water`.
    pub fn code(self) -> String {
        match self {
            AgentAction::Move(d) => format!("move:{}", ["N", "S", "E", "W"][d.index()]),
            AgentAction::Pick(i) => format!("pick:{}", ["water", "seed1", "seed2"][i.index()]),
            AgentAction::Drop(i) => format!("drop:{}", ["water", "seed1", "seed2"][i.index()]),
            AgentAction::Harvest => "harvest".to_string(),
            AgentAction::Protect(o) => format!("protect:{}", o.index()),
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        let (head, tail) = code.split_once(':').unwrap_or((code, ""));
        let item = |t: &str| ["water", "seed1", "seed2"].iter().position(|&n| n == t);
        match head {
            "move" => Self::from_factors(0, ["N", "S", "E", "W"].iter().position(|&n| n == tail)),
            "pick" => Self::from_factors(1, item(tail)),
            "drop" => Self::from_factors(2, item(tail)),
            "harvest" if tail.is_empty() => Some(AgentAction::Harvest),
            "protect" => Self::from_factors(4, tail.parse().ok()),
            _ => None,
        }
    }
}
