// Deterministic tick-stepped signal propagation.
//
// Power model, in one paragraph: buttons strongly power their support block,
// powered repeaters strongly power the block they face (or inject straight
// into a faced wire), and lit torches strongly power the block above them
// and feed adjacent wires. Strongly powered opaque blocks inject level 15
// into face-adjacent wires. Wire levels then propagate over same-level
// 4-adjacency, losing one per hop, taking the max over sources. A powered
// wire weak-powers the block beneath it and the blocks its shape points at;
// weak power activates components but never re-enters the dust graph.
//
// Per-tick order inside `step`:
//   1. fire due scheduled changes (button release, repeater commit, torch flip)
//   2. recompute power to fixed point; dust is instantaneous within a tick
//   3. repeaters sample their back input and schedule output changes at
//      clock + delay, unless locked by a powered side repeater
//   4. torches sample their support block and schedule a flip at clock + 1
//   5. lamps update immediately: lit iff incident power > 0
//
// Only repeaters (1-4), torches (1) and the button release carry latency.

use std::collections::BTreeMap;

use crate::world::{Block, Change, DirSet, Direction, Pos, World};

/// Instantaneous power state: strong injections into opaque blocks, weak
/// (activation-only) power, and settled dust levels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PowerSnapshot {
    pub strong: BTreeMap<Pos, u8>,
    pub weak: BTreeMap<Pos, u8>,
    pub wire_levels: BTreeMap<Pos, u8>,
}

impl PowerSnapshot {
    pub fn strong_at(&self, pos: Pos) -> u8 {
        self.strong.get(&pos).copied().unwrap_or(0)
    }

    pub fn weak_at(&self, pos: Pos) -> u8 {
        self.weak.get(&pos).copied().unwrap_or(0)
    }

    pub fn wire_level(&self, pos: Pos) -> u8 {
        self.wire_levels.get(&pos).copied().unwrap_or(0)
    }

    /// Power incident on a position, as seen by components occupying it.
    pub fn incident(&self, pos: Pos) -> u8 {
        self.strong_at(pos).max(self.weak_at(pos))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("no wire at {0}")]
    NotAWire(Pos),
    #[error("no button at {0}")]
    NoButtonAt(Pos),
    #[error("button at {0} is already pressed")]
    AlreadyPressed(Pos),
}

/// Horizontal directions a wire at `pos` connects toward. A direction d
/// connects iff the same-level neighbor in d is a wire, a torch, a button,
/// or a repeater whose axis is parallel to d. A single connection extends to
/// the opposite side (line shape); zero connections give the full cross.
pub fn wire_shape_at(world: &World, pos: Pos) -> DirSet {
    let mut set = DirSet::EMPTY;
    for d in Direction::HORIZONTAL {
        match world.get_block(pos.offset(d)) {
            Block::Wire { .. } | Block::Torch { .. } | Block::Button { .. } => set.insert(d),
            Block::Repeater { facing, .. } if facing == d || facing == d.opposite() => {
                set.insert(d)
            }
            _ => {}
        }
    }
    match set.len() {
        0 => DirSet::CROSS,
        1 => {
            let d = set.iter().next().unwrap();
            set.insert(d.opposite());
            set
        }
        _ => set,
    }
}

/// Public form of the shape computation, with the not-a-wire error.
pub fn compute_wire_shape(world: &World, pos: Pos) -> Result<DirSet, EngineError> {
    match world.get_block(pos) {
        Block::Wire { .. } => Ok(wire_shape_at(world, pos)),
        _ => Err(EngineError::NotAWire(pos)),
    }
}

/// Recompute the full power state from component states. Pure with respect
/// to the world; callers write results back via the tick pipeline.
pub fn recompute_power(world: &World) -> PowerSnapshot {
    let mut snap = PowerSnapshot::default();

    // Strong power: buttons into supports, repeaters into faced blocks,
    // torches into the block above. Only opaque blocks hold strong power;
    // a button on glass never enters the wire network.
    for (pos, block) in world.blocks.iter() {
        match block {
            Block::Button {
                facing,
                pressed_until: Some(_),
            } => {
                let support = pos.offset(*facing);
                if world.is_opaque_at(support) {
                    insert_max(&mut snap.strong, support, 15);
                }
            }
            Block::Repeater {
                facing,
                powered: true,
                ..
            } => {
                let faced = pos.offset(*facing);
                if world.is_opaque_at(faced) {
                    insert_max(&mut snap.strong, faced, 15);
                }
            }
            Block::Torch { lit: true, .. } => {
                let above = pos.above();
                if world.is_opaque_at(above) {
                    insert_max(&mut snap.strong, above, 15);
                }
            }
            _ => {}
        }
    }

    // Dust seeds: strongly powered opaque neighbors, repeater outputs facing
    // the wire, lit torches face-adjacent.
    let mut frontier: Vec<Pos> = Vec::new();
    for (pos, block) in world.blocks.iter() {
        if !matches!(block, Block::Wire { .. }) {
            continue;
        }
        let mut seeded = false;
        for n in pos.neighbors6() {
            if snap.strong_at(n) > 0 && world.is_opaque_at(n) {
                seeded = true;
            }
            match world.get_block(n) {
                Block::Torch { lit: true, .. } => seeded = true,
                Block::Repeater {
                    facing,
                    powered: true,
                    ..
                } if n.offset(facing) == *pos => seeded = true,
                _ => {}
            }
        }
        if seeded {
            snap.wire_levels.insert(*pos, 15);
            frontier.push(*pos);
        }
    }

    // Max-decay propagation over same-level wire adjacency: one power lost
    // per hop, dead at zero. Buckets by level keep the relaxation linear.
    let mut by_level: Vec<Vec<Pos>> = vec![Vec::new(); 16];
    for p in frontier {
        by_level[15].push(p);
    }
    for level in (1..=15u8).rev() {
        let cells = std::mem::take(&mut by_level[level as usize]);
        for pos in cells {
            if snap.wire_level(pos) != level {
                continue; // superseded by a stronger path
            }
            for n in pos.neighbors4() {
                if matches!(world.get_block(n), Block::Wire { .. })
                    && snap.wire_level(n) < level - 1
                {
                    snap.wire_levels.insert(n, level - 1);
                    by_level[(level - 1) as usize].push(n);
                }
            }
        }
    }

    // Weak power: each powered wire activates the block beneath it and the
    // blocks its shape points at.
    let levels: Vec<(Pos, u8)> = snap
        .wire_levels
        .iter()
        .filter(|(_, l)| **l > 0)
        .map(|(p, l)| (*p, *l))
        .collect();
    for (pos, level) in levels {
        insert_max(&mut snap.weak, pos.below(), level);
        let shape = wire_shape_at(world, pos);
        for d in shape.iter() {
            insert_max(&mut snap.weak, pos.offset(d), level);
        }
    }

    snap
}

fn insert_max(map: &mut BTreeMap<Pos, u8>, pos: Pos, level: u8) {
    let entry = map.entry(pos).or_insert(0);
    if *entry < level {
        *entry = level;
    }
}

/// Whether the back input of a repeater is driven: a powered wire, a powered
/// opaque block (strong or weak), a lit torch, or another repeater feeding
/// straight into it.
fn repeater_input_on(world: &World, snap: &PowerSnapshot, pos: Pos, facing: Direction) -> bool {
    let back = pos.offset(facing.opposite());
    match world.get_block(back) {
        Block::Wire { .. } => snap.wire_level(back) > 0,
        Block::Torch { lit, .. } => lit,
        Block::Repeater {
            facing: bf,
            powered,
            ..
        } => bf == facing && powered,
        b if b.is_opaque() => snap.incident(back) > 0,
        _ => false,
    }
}

/// A repeater is locked while a side-adjacent repeater points into it with a
/// powered output.
fn repeater_locked_now(world: &World, pos: Pos, facing: Direction) -> bool {
    for side in facing.sides() {
        let sp = pos.offset(side);
        if let Block::Repeater {
            facing: sf,
            powered: true,
            ..
        } = world.get_block(sp)
        {
            if sp.offset(sf) == pos {
                return true;
            }
        }
    }
    false
}

fn lamp_lit_now(world: &World, snap: &PowerSnapshot, pos: Pos) -> bool {
    if snap.incident(pos) > 0 {
        return true;
    }
    // A strongly powered block activates its six face-adjacent neighbors.
    pos.neighbors6()
        .into_iter()
        .any(|n| snap.strong_at(n) > 0 && world.is_opaque_at(n))
}

impl World {
    /// Advance the clock one tick and run the five update phases. Returns the
    /// events logged during this tick.
    pub fn step(&mut self) -> Vec<crate::world::Event> {
        let before = self.events.len();
        self.clock += 1;
        self.fire_due();
        self.settle_current_tick();
        self.events[before..].to_vec()
    }

    fn fire_due(&mut self) {
        let clock = self.clock;
        let mut due: Vec<_> = self
            .pending
            .iter()
            .filter(|s| s.fire_tick <= clock)
            .cloned()
            .collect();
        due.sort_by_key(|s| (s.fire_tick, s.seq));
        self.pending.retain(|s| s.fire_tick > clock);
        for item in due {
            let old = self.get_block(item.pos);
            let new = match (&old, item.change) {
                (Block::Button { facing, .. }, Change::ButtonRelease) => Some(Block::Button {
                    facing: *facing,
                    pressed_until: None,
                }),
                (
                    Block::Repeater {
                        facing,
                        delay,
                        locked,
                        powered,
                    },
                    Change::RepeaterOutput(v),
                ) => {
                    // A locked repeater never changes its output; the commit
                    // is simply dropped. Phase 3 re-samples after unlock.
                    if *locked || *powered == v {
                        None
                    } else {
                        Some(Block::Repeater {
                            facing: *facing,
                            delay: *delay,
                            powered: v,
                            locked: *locked,
                        })
                    }
                }
                (Block::Torch { attached, lit }, Change::TorchLit(v)) => {
                    if *lit == v {
                        None
                    } else {
                        Some(Block::Torch {
                            attached: *attached,
                            lit: v,
                        })
                    }
                }
                // Component was replaced since scheduling; drop the change.
                _ => None,
            };
            if let Some(new) = new {
                self.blocks.insert(item.pos, new.clone());
                self.log_change(item.pos, old, new);
            }
        }
    }

    /// Phases 2-5: recompute power, write dust levels back, sample repeaters
    /// and torches, and update lamps. Also used by `press_button` so a press
    /// takes effect within its own tick (dust is instantaneous).
    pub(crate) fn settle_current_tick(&mut self) {
        let snap = recompute_power(self);

        // Phase 2: write dust levels back.
        let wires: Vec<Pos> = self
            .blocks
            .iter()
            .filter(|(_, b)| matches!(b, Block::Wire { .. }))
            .map(|(p, _)| *p)
            .collect();
        for pos in wires {
            if let Block::Wire { power, shape } = self.get_block(pos) {
                let level = snap.wire_level(pos);
                let fresh_shape = wire_shape_at(self, pos);
                if power != level || shape != fresh_shape {
                    let old = Block::Wire { power, shape };
                    let new = Block::Wire {
                        power: level,
                        shape: fresh_shape,
                    };
                    self.blocks.insert(pos, new.clone());
                    if power != level {
                        self.log_change(pos, old, new);
                    }
                }
            }
        }

        // Phase 3: repeaters. Lock flags first, then input sampling.
        let repeaters: Vec<(Pos, Direction, u8, bool, bool)> = self
            .blocks
            .iter()
            .filter_map(|(p, b)| match b {
                Block::Repeater {
                    facing,
                    delay,
                    powered,
                    locked,
                } => Some((*p, *facing, *delay, *powered, *locked)),
                _ => None,
            })
            .collect();
        for (pos, facing, delay, powered, locked) in &repeaters {
            let locked_now = repeater_locked_now(self, *pos, *facing);
            if locked_now != *locked {
                let old = Block::Repeater {
                    facing: *facing,
                    delay: *delay,
                    powered: *powered,
                    locked: *locked,
                };
                let new = Block::Repeater {
                    facing: *facing,
                    delay: *delay,
                    powered: *powered,
                    locked: locked_now,
                };
                self.blocks.insert(*pos, new.clone());
                self.log_change(*pos, old, new);
            }
            if locked_now {
                continue;
            }
            let input = repeater_input_on(self, &snap, *pos, *facing);
            let last_target = match self.last_pending_for(*pos) {
                Some(Change::RepeaterOutput(v)) => v,
                _ => *powered,
            };
            if input != last_target {
                self.schedule(
                    self.clock + *delay as u64,
                    *pos,
                    Change::RepeaterOutput(input),
                );
            }
        }

        // Phase 4: torches sample their support and flip with 1 tick latency.
        let torches: Vec<(Pos, Direction, bool)> = self
            .blocks
            .iter()
            .filter_map(|(p, b)| match b {
                Block::Torch { attached, lit } => Some((*p, *attached, *lit)),
                _ => None,
            })
            .collect();
        for (pos, attached, lit) in torches {
            let support = pos.offset(attached);
            let powered = snap.incident(support) > 0;
            let desired = !powered;
            let last_target = match self.last_pending_for(pos) {
                Some(Change::TorchLit(v)) => v,
                _ => lit,
            };
            if desired != last_target {
                self.schedule(self.clock + 1, pos, Change::TorchLit(desired));
            }
        }

        // Phase 5: lamps respond immediately.
        let lamps: Vec<(Pos, bool)> = self
            .blocks
            .iter()
            .filter_map(|(p, b)| match b {
                Block::Lamp { lit } => Some((*p, *lit)),
                _ => None,
            })
            .collect();
        for (pos, lit) in lamps {
            let now = lamp_lit_now(self, &snap, pos);
            if now != lit {
                self.blocks.insert(pos, Block::Lamp { lit: now });
                self.log_change(pos, Block::Lamp { lit }, Block::Lamp { lit: now });
            }
        }
    }

    /// Press the button at `pos`. The support block becomes strongly powered
    /// within the current tick and a release is scheduled after the
    /// configured pulse width. Returns the press tick.
    pub fn press_button(&mut self, pos: Pos) -> Result<u64, EngineError> {
        match self.get_block(pos) {
            Block::Button {
                facing,
                pressed_until: None,
            } => {
                let release = self.clock + self.config.button_pulse_ticks;
                let old = Block::Button {
                    facing,
                    pressed_until: None,
                };
                let new = Block::Button {
                    facing,
                    pressed_until: Some(release),
                };
                self.blocks.insert(pos, new.clone());
                self.log_change(pos, old, new);
                self.schedule(release, pos, Change::ButtonRelease);
                self.settle_current_tick();
                Ok(self.clock)
            }
            Block::Button { .. } => Err(EngineError::AlreadyPressed(pos)),
            _ => Err(EngineError::NoButtonAt(pos)),
        }
    }

    /// Step until one full tick produces no events and nothing is pending, or
    /// until `max_ticks` elapse. Returns the number of ticks stepped; hitting
    /// the cap is reported by the return value, not an error.
    pub fn run_until_quiescent(&mut self, max_ticks: u64) -> u64 {
        for i in 1..=max_ticks {
            let events = self.step();
            if events.is_empty() && self.pending.is_empty() {
                return i;
            }
        }
        max_ticks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::WorldConfig;

    fn p(x: i32, z: i32) -> Pos {
        Pos::new(x, 4, z)
    }

    /// Stone at origin with a button on top; returns the button position.
    fn button_on_stone(w: &mut World) -> Pos {
        w.set_block(p(0, 0), Block::Stone).unwrap();
        let b = Pos::new(0, 5, 0);
        w.set_block(b, Block::button(Direction::Down)).unwrap();
        b
    }

    #[test]
    fn isolated_wire_is_cross_shaped() {
        let mut w = World::default();
        w.set_block(p(0, 0), Block::wire()).unwrap();
        assert_eq!(compute_wire_shape(&w, p(0, 0)).unwrap(), DirSet::CROSS);
    }

    #[test]
    fn single_neighbor_extends_to_line() {
        let mut w = World::default();
        w.set_block(p(0, 0), Block::wire()).unwrap();
        w.set_block(p(1, 0), Block::wire()).unwrap();
        let shape = compute_wire_shape(&w, p(0, 0)).unwrap();
        assert!(shape.contains(Direction::East));
        assert!(shape.contains(Direction::West));
        assert_eq!(shape.len(), 2);
    }

    #[test]
    fn two_neighbors_give_exactly_the_connecting_set() {
        let mut w = World::default();
        w.set_block(p(0, 0), Block::wire()).unwrap();
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(0, -1), Block::wire()).unwrap();
        let shape = compute_wire_shape(&w, p(0, 0)).unwrap();
        assert!(shape.contains(Direction::East));
        assert!(shape.contains(Direction::North));
        assert_eq!(shape.len(), 2);
    }

    #[test]
    fn shape_on_non_wire_errors() {
        let mut w = World::default();
        w.set_block(p(0, 0), Block::Stone).unwrap();
        assert_eq!(
            compute_wire_shape(&w, p(0, 0)),
            Err(EngineError::NotAWire(p(0, 0)))
        );
    }

    #[test]
    fn press_strongly_powers_support_at_15() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.press_button(b).unwrap();
        let snap = recompute_power(&w);
        assert_eq!(snap.strong_at(p(0, 0)), 15);
    }

    #[test]
    fn straight_run_decays_one_per_hop_and_dies_after_15() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        for x in 1..=16 {
            w.set_block(p(x, 0), Block::wire()).unwrap();
        }
        w.press_button(b).unwrap();
        let snap = recompute_power(&w);
        for x in 1..=15 {
            assert_eq!(snap.wire_level(p(x, 0)), 15 - (x as u8 - 1), "hop {x}");
        }
        assert_eq!(snap.wire_level(p(16, 0)), 0);
    }

    #[test]
    fn repeater_restores_full_strength() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        for x in 1..=15 {
            w.set_block(p(x, 0), Block::wire()).unwrap();
        }
        w.set_block(p(16, 0), Block::repeater(Direction::East, 1))
            .unwrap();
        w.set_block(p(17, 0), Block::wire()).unwrap();
        w.press_button(b).unwrap();
        w.step();
        let snap = recompute_power(&w);
        assert_eq!(snap.wire_level(p(15, 0)), 1);
        assert_eq!(snap.wire_level(p(17, 0)), 15);
    }

    #[test]
    fn no_diagonal_conduction() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 1), Block::wire()).unwrap();
        w.press_button(b).unwrap();
        let snap = recompute_power(&w);
        assert_eq!(snap.wire_level(p(1, 0)), 15);
        assert_eq!(snap.wire_level(p(2, 1)), 0);
    }

    #[test]
    fn minimal_button_wire_lamp_device_lights() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 0), Block::wire()).unwrap();
        w.set_block(p(3, 0), Block::lamp()).unwrap();
        w.press_button(b).unwrap();
        assert_eq!(w.get_block(p(3, 0)), Block::Lamp { lit: true });
        // Release after the configured pulse turns it back off.
        w.run_until_quiescent(50);
        assert_eq!(w.get_block(p(3, 0)), Block::Lamp { lit: false });
    }

    #[test]
    fn release_fires_at_press_plus_configured_pulse() {
        let mut w = World::new(WorldConfig {
            button_pulse_ticks: 10,
            ..WorldConfig::default()
        });
        let b = button_on_stone(&mut w);
        let press = w.press_button(b).unwrap();
        w.run_until_quiescent(50);
        let release = w
            .events()
            .iter()
            .find(|e| {
                matches!(
                    e.new,
                    Block::Button {
                        pressed_until: None,
                        ..
                    }
                ) && e.tick > press
            })
            .expect("release event");
        assert_eq!(release.tick, press + 10);
    }

    #[test]
    fn repeater_adds_configured_delay() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 0), Block::repeater(Direction::East, 2))
            .unwrap();
        w.set_block(p(3, 0), Block::wire()).unwrap();
        w.set_block(p(4, 0), Block::lamp()).unwrap();
        let press = w.press_button(b).unwrap();
        assert_eq!(w.get_block(p(4, 0)), Block::Lamp { lit: false });
        let mut onset = None;
        for _ in 0..20 {
            w.step();
            if w.get_block(p(4, 0)) == (Block::Lamp { lit: true }) && onset.is_none() {
                onset = Some(w.clock());
            }
        }
        assert_eq!(onset, Some(press + 2));
    }

    #[test]
    fn series_chain_latency_is_sum_of_settings() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        let settings = [3u8, 1, 4, 2];
        let mut x = 1;
        for s in settings {
            w.set_block(p(x, 0), Block::wire()).unwrap();
            w.set_block(p(x + 1, 0), Block::repeater(Direction::East, s))
                .unwrap();
            x += 2;
        }
        w.set_block(p(x, 0), Block::wire()).unwrap();
        w.set_block(p(x + 1, 0), Block::lamp()).unwrap();
        let lamp = p(x + 1, 0);
        let press = w.press_button(b).unwrap();
        let mut onset = None;
        for _ in 0..40 {
            w.step();
            if w.get_block(lamp) == (Block::Lamp { lit: true }) && onset.is_none() {
                onset = Some(w.clock());
            }
        }
        let total: u64 = settings.iter().map(|s| *s as u64).sum();
        assert_eq!(onset, Some(press + total));
    }

    #[test]
    fn reversed_repeater_blocks_signal_forever() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 0), Block::repeater(Direction::West, 1))
            .unwrap();
        w.set_block(p(3, 0), Block::wire()).unwrap();
        w.set_block(p(4, 0), Block::lamp()).unwrap();
        w.press_button(b).unwrap();
        w.run_until_quiescent(60);
        let snap = recompute_power(&w);
        assert_eq!(snap.wire_level(p(3, 0)), 0);
        assert_eq!(w.get_block(p(4, 0)), Block::Lamp { lit: false });
    }

    #[test]
    fn empty_world_is_immediately_quiescent() {
        let mut w = World::default();
        assert_eq!(w.run_until_quiescent(100), 1);
    }

    #[test]
    fn torch_inverter_lights_lamp_at_rest_and_goes_dark_on_press() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 0), Block::Stone).unwrap();
        // Torch on the far face of the stone, inverting the wire's signal.
        w.set_block(p(3, 0), Block::torch(Direction::West)).unwrap();
        w.set_block(p(4, 0), Block::wire()).unwrap();
        w.set_block(p(5, 0), Block::lamp()).unwrap();
        w.run_until_quiescent(20);
        assert_eq!(w.get_block(p(5, 0)), Block::Lamp { lit: true });
        w.press_button(b).unwrap();
        w.step();
        w.step();
        assert_eq!(w.get_block(p(5, 0)), Block::Lamp { lit: false });
        w.run_until_quiescent(60);
        assert_eq!(w.get_block(p(5, 0)), Block::Lamp { lit: true });
    }

    #[test]
    fn astable_torch_loop_never_quiesces() {
        let mut w = World::default();
        // Torch on a stone block drives a dust loop whose last wire points
        // back at the stone, weakly powering the torch's own support.
        w.set_block(p(0, 0), Block::Stone).unwrap();
        w.set_block(p(1, 0), Block::torch(Direction::West)).unwrap();
        for (x, z) in [(1, 1), (1, 2), (0, 2), (-1, 2), (-2, 2), (-2, 1), (-2, 0)] {
            w.set_block(p(x, z), Block::wire()).unwrap();
        }
        // Dead end whose line shape points east into the stone.
        w.set_block(p(-1, 0), Block::wire()).unwrap();
        let ran = w.run_until_quiescent(100);
        assert_eq!(ran, 100);
    }

    #[test]
    fn side_repeater_locks_and_holds_output() {
        let mut w = World::default();
        let b = button_on_stone(&mut w);
        // Victim carries signal north-to-south into a lamp.
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.set_block(p(2, 0), Block::wire()).unwrap();
        w.set_block(Pos::new(2, 4, 1), Block::wire()).unwrap();
        let victim = Pos::new(2, 4, 2);
        w.set_block(victim, Block::repeater(Direction::South, 1))
            .unwrap();
        w.set_block(Pos::new(2, 4, 3), Block::wire()).unwrap();
        w.set_block(Pos::new(2, 4, 4), Block::lamp()).unwrap();
        // Locker points east into the victim's west side, fed by a torch on
        // the implicit floor, so the lock holds at steady state.
        w.set_block(Pos::new(0, 4, 2), Block::torch(Direction::Down))
            .unwrap();
        w.set_block(Pos::new(1, 4, 2), Block::repeater(Direction::East, 1))
            .unwrap();
        w.run_until_quiescent(20);
        match w.get_block(victim) {
            Block::Repeater { locked, .. } => assert!(locked, "lock engages at rest"),
            _ => unreachable!(),
        }
        // The press drives the victim's input high, but a locked repeater
        // never changes its output, so the lamp stays dark.
        w.press_button(b).unwrap();
        w.run_until_quiescent(100);
        match w.get_block(victim) {
            Block::Repeater {
                locked, powered, ..
            } => {
                assert!(locked);
                assert!(!powered, "locked repeater must hold its output");
            }
            _ => unreachable!(),
        }
        assert_eq!(w.get_block(Pos::new(2, 4, 4)), Block::Lamp { lit: false });
    }

    #[test]
    fn glass_mounted_button_conducts_nothing() {
        let mut w = World::default();
        w.set_block_raw(p(0, 0), Block::Glass);
        w.set_block_raw(Pos::new(0, 5, 0), Block::button(Direction::Down));
        w.set_block(p(1, 0), Block::wire()).unwrap();
        w.press_button(Pos::new(0, 5, 0)).unwrap();
        let snap = recompute_power(&w);
        assert_eq!(snap.wire_level(p(1, 0)), 0);
    }
}
