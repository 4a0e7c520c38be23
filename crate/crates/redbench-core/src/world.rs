// Sparse voxel world: block states on an integer lattice, the bounded build
// region, and the reset/scan primitives the evaluator relies on.
//
// The world is a single-owner mutable value. There is no interior locking;
// callers that want parallelism simulate independent worlds.
//
// Ground model: an implicit, indestructible stone floor fills the plane
// y == config.floor_y. The sparse map stores only deviations from
// "air everywhere + floor". Setting stone at floor level therefore erases
// the entry instead of storing it, and setting air at floor level restores
// the implicit stone.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Signed lattice position in block units. Ordering is lexicographic by
/// (x, y, z), which fixes the deterministic scan order. Serializes as the
/// wire-format `[x, y, z]` integer array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Serialize for Pos {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Pos {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[i32; 3]>::deserialize(de)?;
        Ok(Pos { x, y, z })
    }
}

impl Pos {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, d: Direction) -> Self {
        let (dx, dy, dz) = d.delta();
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }

    pub fn manhattan(self, other: Self) -> u32 {
        (self.x - other.x).unsigned_abs()
            + (self.y - other.y).unsigned_abs()
            + (self.z - other.z).unsigned_abs()
    }

    pub fn chebyshev(self, other: Self) -> u32 {
        (self.x - other.x)
            .unsigned_abs()
            .max((self.y - other.y).unsigned_abs())
            .max((self.z - other.z).unsigned_abs())
    }

    /// The six face-adjacent neighbors.
    pub fn neighbors6(self) -> [Pos; 6] {
        Direction::ALL.map(|d| self.offset(d))
    }

    /// Same-level horizontal neighbors, in canonical N, E, S, W order.
    pub fn neighbors4(self) -> [Pos; 4] {
        Direction::HORIZONTAL.map(|d| self.offset(d))
    }

    pub fn below(self) -> Self {
        self.offset(Direction::Down)
    }

    pub fn above(self) -> Self {
        self.offset(Direction::Up)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Axis directions. North is -z, south +z, east +x, west -x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::Up,
        Direction::Down,
    ];

    pub const HORIZONTAL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn delta(self) -> (i32, i32, i32) {
        match self {
            Direction::North => (0, 0, -1),
            Direction::East => (1, 0, 0),
            Direction::South => (0, 0, 1),
            Direction::West => (-1, 0, 0),
            Direction::Up => (0, 1, 0),
            Direction::Down => (0, -1, 0),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::East => Direction::West,
            Direction::West => Direction::East,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    pub fn is_horizontal(self) -> bool {
        !matches!(self, Direction::Up | Direction::Down)
    }

    /// The two horizontal directions perpendicular to a horizontal axis.
    pub fn sides(self) -> [Direction; 2] {
        match self {
            Direction::North | Direction::South => [Direction::East, Direction::West],
            Direction::East | Direction::West => [Direction::North, Direction::South],
            _ => [Direction::North, Direction::South],
        }
    }
}

/// Set of horizontal directions, kept as a bitmask so wire shapes stay `Copy`.
/// Serialized as a list in canonical N, E, S, W order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DirSet(u8);

impl DirSet {
    pub const EMPTY: DirSet = DirSet(0);
    pub const CROSS: DirSet = DirSet(0b1111);

    fn bit(d: Direction) -> u8 {
        match d {
            Direction::North => 1,
            Direction::East => 2,
            Direction::South => 4,
            Direction::West => 8,
            _ => 0,
        }
    }

    pub fn insert(&mut self, d: Direction) {
        self.0 |= Self::bit(d);
    }

    pub fn contains(self, d: Direction) -> bool {
        Self::bit(d) != 0 && self.0 & Self::bit(d) != 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Direction> {
        Direction::HORIZONTAL
            .into_iter()
            .filter(move |d| self.contains(*d))
    }
}

impl FromIterator<Direction> for DirSet {
    fn from_iter<T: IntoIterator<Item = Direction>>(iter: T) -> Self {
        let mut s = DirSet::EMPTY;
        for d in iter {
            s.insert(d);
        }
        s
    }
}

impl Serialize for DirSet {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for DirSet {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let dirs: Vec<Direction> = Vec::deserialize(de)?;
        Ok(dirs.into_iter().collect())
    }
}

/// One voxel's state. Exactly one kind per voxel; air is never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Block {
    Air,
    Stone,
    Glass,
    Lamp {
        #[serde(default)]
        lit: bool,
    },
    Wire {
        #[serde(default)]
        power: u8,
        #[serde(default)]
        shape: DirSet,
    },
    Repeater {
        facing: Direction,
        #[serde(default = "default_delay")]
        delay: u8,
        #[serde(default)]
        powered: bool,
        #[serde(default)]
        locked: bool,
    },
    Torch {
        #[serde(default = "default_down")]
        attached: Direction,
        #[serde(default)]
        lit: bool,
    },
    Button {
        #[serde(default = "default_down")]
        facing: Direction,
        #[serde(default)]
        pressed_until: Option<u64>,
    },
}

fn default_delay() -> u8 {
    1
}

fn default_down() -> Direction {
    Direction::Down
}

impl Block {
    pub fn wire() -> Self {
        Block::Wire {
            power: 0,
            shape: DirSet::EMPTY,
        }
    }

    pub fn lamp() -> Self {
        Block::Lamp { lit: false }
    }

    pub fn repeater(facing: Direction, delay: u8) -> Self {
        Block::Repeater {
            facing,
            delay,
            powered: false,
            locked: false,
        }
    }

    pub fn torch(attached: Direction) -> Self {
        Block::Torch {
            attached,
            lit: false,
        }
    }

    pub fn button(facing: Direction) -> Self {
        Block::Button {
            facing,
            pressed_until: None,
        }
    }

    pub fn is_air(&self) -> bool {
        matches!(self, Block::Air)
    }

    /// Opaque blocks conduct strong power and support attached components.
    /// Lamps are opaque; glass is not.
    pub fn is_opaque(&self) -> bool {
        matches!(self, Block::Stone | Block::Lamp { .. })
    }

    pub fn is_redstone_component(&self) -> bool {
        matches!(
            self,
            Block::Wire { .. }
                | Block::Repeater { .. }
                | Block::Torch { .. }
                | Block::Button { .. }
                | Block::Lamp { .. }
        )
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Block::Air => "air",
            Block::Stone => "stone",
            Block::Glass => "glass",
            Block::Lamp { .. } => "lamp",
            Block::Wire { .. } => "wire",
            Block::Repeater { .. } => "repeater",
            Block::Torch { .. } => "torch",
            Block::Button { .. } => "button",
        }
    }
}

/// The bounded build region: a Chebyshev ball around an anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub anchor: Pos,
    pub radius: i32,
}

impl Region {
    pub fn new(anchor: Pos, radius: i32) -> Self {
        Self { anchor, radius }
    }

    pub fn contains(&self, pos: Pos) -> bool {
        pos.chebyshev(self.anchor) as i32 <= self.radius
    }
}

/// Simulation-wide knobs.
///
/// `button_pulse_ticks` defaults to 4 rather than the larger Minecraft-style
/// width: with one tick of rise latency per torch or repeater and purely
/// additive dust, a pulse can only be delayed or stretched, never trimmed,
/// so the shortest contract duration in the task schedule (tau = 4) fixes
/// the base pulse. See the repository notes for the full argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub button_pulse_ticks: u64,
    pub floor_y: i32,
    pub max_settle_ticks: u64,
}

pub const DEFAULT_BUTTON_PULSE: u64 = 4;

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            button_pulse_ticks: DEFAULT_BUTTON_PULSE,
            floor_y: 3,
            max_settle_ticks: 200,
        }
    }
}

/// One block-change record: (tick, position, displaced state, new state).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub pos: Pos,
    pub old: Block,
    pub new: Block,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("unsupported placement of {kind} at {pos}: {reason}")]
    UnsupportedPlacement {
        kind: &'static str,
        pos: Pos,
        reason: String,
    },
    #[error("invalid state for {kind} at {pos}: {reason}")]
    InvalidState {
        kind: &'static str,
        pos: Pos,
        reason: String,
    },
}

/// A pending component transition. Fired by the engine at `fire_tick` in
/// (fire_tick, seq) order, which keeps replays bit-identical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Scheduled {
    pub fire_tick: u64,
    pub seq: u64,
    pub pos: Pos,
    pub change: Change,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Change {
    ButtonRelease,
    RepeaterOutput(bool),
    TorchLit(bool),
}

/// Sparse world state plus the tick clock, event log, and pending changes.
#[derive(Clone, Debug)]
pub struct World {
    pub(crate) blocks: BTreeMap<Pos, Block>,
    pub(crate) clock: u64,
    pub(crate) config: WorldConfig,
    pub(crate) events: Vec<Event>,
    pub(crate) pending: Vec<Scheduled>,
    pub(crate) next_seq: u64,
}

impl Default for World {
    fn default() -> Self {
        Self::new(WorldConfig::default())
    }
}

impl World {
    pub fn new(config: WorldConfig) -> Self {
        Self {
            blocks: BTreeMap::new(),
            clock: 0,
            config,
            events: Vec::new(),
            pending: Vec::new(),
            next_seq: 0,
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn config(&self) -> WorldConfig {
        self.config
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn pending_changes(&self) -> usize {
        self.pending.len()
    }

    /// Pure read. Absent positions are air, except the implicit floor plane.
    pub fn get_block(&self, pos: Pos) -> Block {
        match self.blocks.get(&pos) {
            Some(b) => b.clone(),
            None if pos.y == self.config.floor_y => Block::Stone,
            None => Block::Air,
        }
    }

    pub fn is_opaque_at(&self, pos: Pos) -> bool {
        self.get_block(pos).is_opaque()
    }

    /// Validated placement. Returns the displaced state and logs one event.
    pub fn set_block(&mut self, pos: Pos, state: Block) -> Result<Block, WorldError> {
        self.validate_state(pos, &state)?;
        self.validate_support(pos, &state)?;
        Ok(self.set_block_raw(pos, state))
    }

    /// Unvalidated placement, used when loading device fixtures that are
    /// deliberately malformed (e.g. a button mounted on glass).
    pub fn set_block_raw(&mut self, pos: Pos, state: Block) -> Block {
        let old = self.get_block(pos);
        self.store(pos, state);
        let new = self.get_block(pos);
        self.refresh_shapes_around(pos);
        let ev = Event {
            tick: self.clock,
            pos,
            old: old.clone(),
            new,
        };
        self.events.push(ev);
        old
    }

    /// Insert honoring sparsity: air entries are never stored, and stone at
    /// floor level collapses back into the implicit floor.
    fn store(&mut self, pos: Pos, state: Block) {
        let implicit_floor = pos.y == self.config.floor_y;
        match &state {
            Block::Air if implicit_floor => {
                // Floor is indestructible: clearing restores implicit stone.
                self.blocks.remove(&pos);
            }
            Block::Air => {
                self.blocks.remove(&pos);
            }
            Block::Stone if implicit_floor => {
                self.blocks.remove(&pos);
            }
            _ => {
                self.blocks.insert(pos, state);
            }
        }
    }

    fn validate_state(&self, pos: Pos, state: &Block) -> Result<(), WorldError> {
        match state {
            Block::Wire { power, .. } if *power > 15 => Err(WorldError::InvalidState {
                kind: "wire",
                pos,
                reason: format!("power {power} outside 0..=15"),
            }),
            Block::Repeater { delay, .. } if !(1..=4).contains(delay) => {
                Err(WorldError::InvalidState {
                    kind: "repeater",
                    pos,
                    reason: format!("delay {delay} outside 1..=4"),
                })
            }
            Block::Repeater { facing, .. } if !facing.is_horizontal() => {
                Err(WorldError::InvalidState {
                    kind: "repeater",
                    pos,
                    reason: "facing must be horizontal".into(),
                })
            }
            Block::Torch { attached, .. } if *attached == Direction::Up => {
                Err(WorldError::InvalidState {
                    kind: "torch",
                    pos,
                    reason: "torches cannot hang from ceilings".into(),
                })
            }
            Block::Button { facing, .. } if *facing == Direction::Up => {
                Err(WorldError::InvalidState {
                    kind: "button",
                    pos,
                    reason: "buttons cannot mount on ceilings".into(),
                })
            }
            _ => Ok(()),
        }
    }

    fn validate_support(&self, pos: Pos, state: &Block) -> Result<(), WorldError> {
        let check = |support: Pos, kind: &'static str| -> Result<(), WorldError> {
            if self.is_opaque_at(support) {
                Ok(())
            } else {
                Err(WorldError::UnsupportedPlacement {
                    kind,
                    pos,
                    reason: format!(
                        "requires an opaque support block at {support}, found {}",
                        self.get_block(support).kind_name()
                    ),
                })
            }
        };
        match state {
            Block::Wire { .. } => check(pos.below(), "wire"),
            Block::Button { facing, .. } => check(pos.offset(*facing), "button"),
            Block::Torch { attached, .. } => check(pos.offset(*attached), "torch"),
            // Lamps, supports, and repeaters sit anywhere (the lab floor is
            // implicit furniture one level below the build plane).
            _ => Ok(()),
        }
    }

    /// Wire shapes are derived state. Any mutation refreshes the shape of the
    /// touched cell and its same-level neighbors, silently: only the explicit
    /// placement logs an event.
    pub(crate) fn refresh_shapes_around(&mut self, pos: Pos) {
        let mut cells = vec![pos];
        cells.extend(pos.neighbors4());
        for p in cells {
            if let Block::Wire { power, .. } = self.get_block(p) {
                let shape = crate::engine::wire_shape_at(self, p);
                self.blocks.insert(p, Block::Wire { power, shape });
            }
        }
    }

    /// Remove every non-air, non-floor block inside the region, restoring the
    /// floor layer. Returns the number of blocks removed. The clock is
    /// untouched and no events are logged: resets happen between attempts,
    /// not inside them.
    pub fn reset_region(&mut self, region: Region) -> usize {
        let doomed: Vec<Pos> = self
            .blocks
            .keys()
            .copied()
            .filter(|p| region.contains(*p))
            .collect();
        let count = doomed.len();
        for pos in &doomed {
            self.blocks.remove(pos);
        }
        for pos in doomed {
            self.refresh_shapes_around(pos);
        }
        self.pending.clear();
        count
    }

    /// Deterministic scan of redstone components inside a region, in
    /// lexicographic (x, y, z) order. Plain supports are excluded.
    pub fn scan_region(&self, region: Region) -> Vec<(Pos, Block)> {
        self.blocks
            .iter()
            .filter(|(p, b)| region.contains(**p) && b.is_redstone_component())
            .map(|(p, b)| (*p, b.clone()))
            .collect()
    }

    pub(crate) fn schedule(&mut self, fire_tick: u64, pos: Pos, change: Change) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.pending.push(Scheduled {
            fire_tick,
            seq,
            pos,
            change,
        });
    }

    /// Last scheduled target for a component, if any. Used to avoid queueing
    /// duplicate transitions.
    pub(crate) fn last_pending_for(&self, pos: Pos) -> Option<Change> {
        self.pending
            .iter()
            .filter(|s| s.pos == pos)
            .max_by_key(|s| s.seq)
            .map(|s| s.change)
    }

    pub(crate) fn log_change(&mut self, pos: Pos, old: Block, new: Block) {
        let ev = Event {
            tick: self.clock,
            pos,
            old,
            new,
        };
        self.events.push(ev);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_world_reads_air_and_floor() {
        let w = World::default();
        assert_eq!(w.get_block(Pos::new(100, 50, -3)), Block::Air);
        assert_eq!(w.get_block(Pos::new(7, 3, 7)), Block::Stone);
    }

    #[test]
    fn set_block_returns_displaced_state() {
        let mut w = World::default();
        let old = w.set_block(Pos::new(0, 4, 0), Block::Stone).unwrap();
        assert_eq!(old, Block::Air);
        let old = w.set_block(Pos::new(0, 4, 0), Block::lamp()).unwrap();
        assert_eq!(old, Block::Stone);
    }

    #[test]
    fn wire_on_stone_is_supported_and_unpowered() {
        let mut w = World::default();
        w.set_block(Pos::new(0, 4, 0), Block::Stone).unwrap();
        let old = w.set_block(Pos::new(0, 5, 0), Block::wire()).unwrap();
        assert_eq!(old, Block::Air);
        match w.get_block(Pos::new(0, 5, 0)) {
            Block::Wire { power, .. } => assert_eq!(power, 0),
            other => panic!("expected wire, got {other:?}"),
        }
    }

    #[test]
    fn wire_over_glass_is_rejected() {
        let mut w = World::default();
        w.set_block(Pos::new(1, 4, 0), Block::Glass).unwrap();
        let err = w.set_block(Pos::new(1, 5, 0), Block::wire()).unwrap_err();
        assert!(matches!(err, WorldError::UnsupportedPlacement { .. }));
    }

    #[test]
    fn wire_on_implicit_floor_is_supported() {
        let mut w = World::default();
        // Build plane y=4 sits directly on the implicit floor at y=3.
        w.set_block(Pos::new(5, 4, 5), Block::wire()).unwrap();
    }

    #[test]
    fn repeater_delay_validated() {
        let mut w = World::default();
        let err = w
            .set_block(Pos::new(0, 4, 0), Block::repeater(Direction::East, 5))
            .unwrap_err();
        assert!(matches!(err, WorldError::InvalidState { .. }));
    }

    #[test]
    fn lamps_start_unlit() {
        let mut w = World::default();
        w.set_block(Pos::new(2, 4, 2), Block::lamp()).unwrap();
        assert_eq!(w.get_block(Pos::new(2, 4, 2)), Block::Lamp { lit: false });
    }

    #[test]
    fn sparsity_air_is_never_stored() {
        let mut w = World::default();
        let p = Pos::new(3, 6, 3);
        w.set_block(p, Block::Stone).unwrap();
        w.set_block(p, Block::Air).unwrap();
        assert!(w.blocks.is_empty());
        assert_eq!(w.get_block(p), Block::Air);
    }

    #[test]
    fn floor_level_stone_is_implicit() {
        let mut w = World::default();
        let p = Pos::new(0, 3, 0);
        w.set_block(p, Block::Stone).unwrap();
        assert!(w.blocks.is_empty());
        // A lamp may displace floor; clearing it restores stone.
        w.set_block(p, Block::lamp()).unwrap();
        assert_eq!(w.get_block(p), Block::Lamp { lit: false });
        w.set_block(p, Block::Air).unwrap();
        assert_eq!(w.get_block(p), Block::Stone);
    }

    #[test]
    fn reset_region_counts_and_is_idempotent() {
        let mut w = World::default();
        let region = Region::new(Pos::new(0, 4, 0), 10);
        assert_eq!(w.reset_region(region), 0);
        w.set_block(Pos::new(0, 4, 0), Block::Stone).unwrap();
        w.set_block(Pos::new(1, 4, 0), Block::wire()).unwrap();
        w.set_block(Pos::new(2, 4, 0), Block::lamp()).unwrap();
        w.set_block(Pos::new(0, 5, 0), Block::button(Direction::Down))
            .unwrap();
        w.set_block(Pos::new(3, 3, 3), Block::lamp()).unwrap(); // floor override
        assert_eq!(w.reset_region(region), 5);
        assert_eq!(w.reset_region(region), 0);
        assert!(w.scan_region(region).is_empty());
        assert_eq!(w.get_block(Pos::new(3, 3, 3)), Block::Stone);
    }

    #[test]
    fn scan_region_orders_lexicographically_and_skips_supports() {
        let mut w = World::default();
        let region = Region::new(Pos::new(0, 4, 0), 10);
        w.set_block(Pos::new(2, 4, 0), Block::lamp()).unwrap();
        w.set_block(Pos::new(0, 4, 0), Block::Stone).unwrap();
        w.set_block(Pos::new(1, 4, 0), Block::wire()).unwrap();
        w.set_block(Pos::new(0, 5, 0), Block::button(Direction::Down))
            .unwrap();
        let scan = w.scan_region(region);
        let positions: Vec<Pos> = scan.iter().map(|(p, _)| *p).collect();
        assert_eq!(
            positions,
            vec![Pos::new(0, 5, 0), Pos::new(1, 4, 0), Pos::new(2, 4, 0)]
        );
    }

    #[test]
    fn every_set_block_logs_exactly_one_event() {
        let mut w = World::default();
        w.set_block(Pos::new(0, 4, 0), Block::Stone).unwrap();
        w.set_block(Pos::new(1, 4, 0), Block::wire()).unwrap();
        assert_eq!(w.events().len(), 2);
        let ev = &w.events()[1];
        assert_eq!(ev.old, Block::Air);
        assert!(matches!(ev.new, Block::Wire { .. }));
    }
}
