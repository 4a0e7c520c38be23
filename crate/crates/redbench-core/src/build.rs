// Reference device constructors: parameterized layouts that satisfy each
// family contract. The task generator and the solvers share these layout
// functions, so generated output positions are exactly the positions the
// constructors feed.
//
// Geometry conventions: the build plane is y = 4 over the implicit floor,
// the anchor block sits at (0,4,0) with the button on top at (0,5,0).
// North is -z, south +z, east +x.
//
// The workhorse layout is a row lattice: a dust trunk runs along the z axis,
// rows branch east/west at z in {0, +-3, +-6, +-9} behind one repeater per
// half-row (so every lamp sees exactly one tick of repeater delay and the
// onset spread is zero), and each row cell hosts a one-dust stub whose line
// shape points at a lamp. Stubs alternate sides by column parity (odd
// columns north, even columns south), which lets rows at pitch 3 interleave
// without auto-connecting.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::device::{Device, Placement};
use crate::task::{ContractParams, TaskSpec};
use crate::world::{Block, Direction, Pos};

pub const PLANE_Y: i32 = 4;
pub const REGION_RADIUS: i32 = 10;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BuildError {
    #[error("unsupported lamp count {0}")]
    UnsupportedN(u32),
    #[error("unsupported pulse duration {0} (supported 4..=12)")]
    UnsupportedTau(u32),
    #[error(
        "region overflow: needs about {needed_cells} cells but only {available_cells} fit \
         inside radius {radius}: {detail}"
    )]
    RegionOverflow {
        needed_cells: u32,
        available_cells: u32,
        radius: i32,
        detail: String,
    },
    #[error("layout conflict at {pos}: {detail}")]
    LayoutConflict { pos: Pos, detail: String },
    #[error("unknown failure case {0}")]
    UnknownCase(String),
    #[error("unsupported custom layout: {0}")]
    UnsupportedLayout(String),
}

/// Incremental device plan with collision detection.
pub(crate) struct Plan {
    cells: BTreeMap<Pos, Block>,
    lamps: Vec<Pos>,
}

impl Plan {
    pub fn new() -> Self {
        Plan {
            cells: BTreeMap::new(),
            lamps: Vec::new(),
        }
    }

    pub fn put(&mut self, pos: Pos, block: Block) -> Result<(), BuildError> {
        if let Some(existing) = self.cells.get(&pos) {
            if *existing != block {
                return Err(BuildError::LayoutConflict {
                    pos,
                    detail: format!(
                        "{} collides with {}",
                        block.kind_name(),
                        existing.kind_name()
                    ),
                });
            }
            return Ok(());
        }
        if pos.chebyshev(Pos::new(0, PLANE_Y, 0)) > REGION_RADIUS as u32 {
            return Err(BuildError::LayoutConflict {
                pos,
                detail: "outside the build region".into(),
            });
        }
        self.cells.insert(pos, block);
        Ok(())
    }

    pub fn wire(&mut self, x: i32, z: i32) -> Result<(), BuildError> {
        self.put(Pos::new(x, PLANE_Y, z), Block::wire())
    }

    pub fn lamp(&mut self, x: i32, z: i32) -> Result<(), BuildError> {
        let pos = Pos::new(x, PLANE_Y, z);
        self.put(pos, Block::lamp())?;
        self.lamps.push(pos);
        Ok(())
    }

    pub fn repeater(&mut self, x: i32, z: i32, facing: Direction, delay: u8) -> Result<(), BuildError> {
        self.put(Pos::new(x, PLANE_Y, z), Block::repeater(facing, delay))
    }

    pub fn is_free(&self, x: i32, z: i32) -> bool {
        !self.cells.contains_key(&Pos::new(x, PLANE_Y, z))
    }

    /// Center anchor block plus the button on top.
    pub fn center(&mut self) -> Result<(), BuildError> {
        self.put(Pos::new(0, PLANE_Y, 0), Block::Stone)?;
        self.put(Pos::new(0, PLANE_Y + 1, 0), Block::button(Direction::Down))
    }

    pub fn into_device(self, name: impl Into<String>) -> Device {
        let anchor = Pos::new(0, PLANE_Y, 0);
        let placements = self
            .cells
            .into_iter()
            .map(|(pos, block)| Placement {
                offset: Pos::new(pos.x - anchor.x, pos.y - anchor.y, pos.z - anchor.z),
                block,
            })
            .collect();
        Device {
            name: name.into(),
            anchor,
            placements,
            expected: None,
        }
    }

    pub fn lamps(&self) -> &[Pos] {
        &self.lamps
    }
}

/// Decompose a target delay into repeater settings in 1..=4, largest first,
/// minimal count (ceil(target / 4)).
pub fn compose_delay(target: u32) -> Vec<u8> {
    let mut out = Vec::new();
    let mut left = target;
    while left > 4 {
        out.push(4);
        left -= 4;
    }
    if left > 0 {
        out.push(left as u8);
    }
    out
}

// ---------------------------------------------------------------------------
// Row lattice (families A and B, and the distribution net of large E)
// ---------------------------------------------------------------------------

const ROW_ORDER: [i32; 7] = [0, 3, -3, 6, -6, 9, -9];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slot {
    row: i32,
    sign: i32, // +1 east, -1 west
    col: i32,  // 3..=9
}

impl Slot {
    /// Stub cell, one off the row on the side given by column parity; edge
    /// rows only use the side that stays inside the region.
    fn stub_z(&self) -> i32 {
        if self.north_side() {
            self.row - 1
        } else {
            self.row + 1
        }
    }

    fn lamp_z(&self) -> i32 {
        if self.north_side() {
            self.row - 2
        } else {
            self.row + 2
        }
    }

    fn north_side(&self) -> bool {
        self.col % 2 == 1
    }

    fn x(&self) -> i32 {
        self.sign * self.col
    }

    fn lamp_pos(&self) -> Pos {
        Pos::new(self.x(), PLANE_Y, self.lamp_z())
    }
}

fn slot_allowed(row: i32, sign: i32, col: i32, corridor: bool) -> bool {
    let north = col % 2 == 1;
    // Edge rows can only fan toward the center, or the lamps leave the region.
    if row == 9 && !north {
        return false;
    }
    if row == -9 && north {
        return false;
    }
    if corridor {
        // Row 0 reads the anchor block directly, which the pulse extension
        // deliberately never re-powers, so corridor nets skip it entirely.
        // The chain cells also occupy the east gap at (3,1)/(4,1).
        if row == 0 {
            return false;
        }
        if row == 3 && sign > 0 && col == 3 {
            return false;
        }
    }
    true
}

/// Canonical fill order: rows center-out, columns ascending, east before
/// west, skipping disallowed slots.
fn lattice_slots(n: u32, corridor: bool) -> Result<Vec<Slot>, BuildError> {
    let mut slots = Vec::new();
    for row in ROW_ORDER {
        for col in 3..=9 {
            for sign in [1, -1] {
                if slot_allowed(row, sign, col, corridor) {
                    slots.push(Slot { row, sign, col });
                }
            }
        }
    }
    if (n as usize) > slots.len() {
        return Err(BuildError::RegionOverflow {
            needed_cells: n,
            available_cells: slots.len() as u32,
            radius: REGION_RADIUS,
            detail: "lamp slots exhausted in the row lattice".into(),
        });
    }
    Ok(slots.into_iter().take(n as usize).collect())
}

/// Lamp positions the generator publishes for families A and B.
pub(crate) fn lattice_outputs(n: u32) -> Result<Vec<Pos>, BuildError> {
    Ok(lattice_slots(n, false)?.iter().map(Slot::lamp_pos).collect())
}

fn lattice_plan(n: u32, corridor: bool) -> Result<Plan, BuildError> {
    let slots = lattice_slots(n, corridor)?;
    let mut plan = Plan::new();
    plan.center()?;

    // Trunk along the z axis out to the farthest used row.
    let max_s = slots.iter().map(|s| s.row).max().unwrap_or(0).max(0);
    let min_s = slots.iter().map(|s| s.row).min().unwrap_or(0).min(0);
    for z in 1..=max_s {
        plan.wire(0, z)?;
    }
    for z in min_s..=-1 {
        plan.wire(0, z)?;
    }
    if corridor && max_s > 0 {
        // The anchor block splits the trunk; a west bypass joins the halves
        // so one extension port re-powers both.
        if min_s < 0 {
            plan.wire(-1, -1)?;
            plan.wire(-1, 0)?;
            plan.wire(-1, 1)?;
        }
    }

    // Per used half-row: repeater off the trunk, dust run, stubs, lamps.
    let mut halves: BTreeMap<(i32, i32), Vec<i32>> = BTreeMap::new();
    for s in &slots {
        halves.entry((s.row, s.sign)).or_default().push(s.col);
    }
    for ((row, sign), cols) in &halves {
        let facing = if *sign > 0 {
            Direction::East
        } else {
            Direction::West
        };
        plan.repeater(*sign, *row, facing, 1)?;
        let last = *cols.iter().max().unwrap();
        for c in 2..=last {
            plan.wire(sign * c, *row)?;
        }
    }
    for s in &slots {
        plan.wire(s.x(), s.stub_z())?;
        plan.lamp(s.x(), s.lamp_z())?;
    }
    Ok(plan)
}

/// Four-way symmetric fanout with one repeater per half-row: every lamp sits
/// behind exactly one tick of delay, so onsets are equal by construction.
pub fn build_simultaneous(n: u32) -> Result<Device, BuildError> {
    if !matches!(n, 4 | 8 | 16 | 32 | 64) {
        return Err(BuildError::UnsupportedN(n));
    }
    Ok(lattice_plan(n, false)?.into_device(format!("simultaneous-{n}")))
}

/// Off-schedule lamp counts (CLI overrides) reuse the same lattice.
pub fn build_simultaneous_any(n: u32) -> Result<Device, BuildError> {
    Ok(lattice_plan(n, false)?.into_device(format!("simultaneous-{n}")))
}

// ---------------------------------------------------------------------------
// Family C: serpentine delay line
// ---------------------------------------------------------------------------

const C_ROWS: [i32; 4] = [0, 3, 6, 9];
const C_XMAX: i32 = 9;
const C_TAP_XMAX: i32 = 7;

struct Turtle {
    plan: Plan,
    x: i32,
    z: i32,
    heading: i32, // +1 east, -1 west
    row_idx: usize,
    last_tap_x: Option<i32>,
}

impl Turtle {
    /// Cells remaining in the current row including none at the boundary.
    fn straight_left(&self) -> i32 {
        if self.heading > 0 {
            C_XMAX - self.x
        } else {
            self.x - (-C_XMAX)
        }
    }

    /// Lay one dust cell forward, turning up to the next row when the
    /// current one is exhausted.
    fn advance_wire(&mut self) -> Result<(), BuildError> {
        if self.straight_left() == 0 {
            self.turn()?;
        } else {
            self.x += self.heading;
            self.plan.wire(self.x, self.z)?;
        }
        Ok(())
    }

    fn turn(&mut self) -> Result<(), BuildError> {
        self.row_idx += 1;
        if self.row_idx >= C_ROWS.len() {
            return Err(BuildError::RegionOverflow {
                needed_cells: 0,
                available_cells: 0,
                radius: REGION_RADIUS,
                detail: "serpentine rows exhausted".into(),
            });
        }
        // Two connector cells bridge the pitch-3 row gap.
        self.plan.wire(self.x, self.z + 1)?;
        self.plan.wire(self.x, self.z + 2)?;
        self.z += 3;
        self.plan.wire(self.x, self.z)?;
        self.heading = -self.heading;
        self.last_tap_x = None;
        Ok(())
    }

    /// Place a repeater on the next straight cell (never on a turn).
    fn place_repeater(&mut self, delay: u8) -> Result<(), BuildError> {
        while self.straight_left() < 2 {
            self.advance_wire()?;
        }
        self.x += self.heading;
        let facing = if self.heading > 0 {
            Direction::East
        } else {
            Direction::West
        };
        self.plan.repeater(self.x, self.z, facing, delay)?;
        Ok(())
    }

    /// The current path cell becomes a stage tap: a north stub feeds the
    /// stage lamp. Returns false if this cell cannot host a tap.
    fn try_tap_here(&mut self) -> bool {
        if self.x.abs() > C_TAP_XMAX {
            return false;
        }
        if let Some(last) = self.last_tap_x {
            if (self.x - last).abs() < 2 {
                return false;
            }
        }
        let stub = (self.x, self.z - 1);
        let lamp = (self.x, self.z - 2);
        // The stub must connect to the path cell alone.
        let clean = self.plan.is_free(stub.0, stub.1)
            && self.plan.is_free(lamp.0, lamp.1)
            && self.plan.is_free(stub.0 - 1, stub.1)
            && self.plan.is_free(stub.0 + 1, stub.1);
        if !clean {
            return false;
        }
        self.plan.wire(stub.0, stub.1).ok();
        self.plan.lamp(lamp.0, lamp.1).ok();
        self.last_tap_x = Some(self.x);
        true
    }

    fn place_tap(&mut self) -> Result<(), BuildError> {
        loop {
            if self.straight_left() == 0 {
                self.turn()?;
            }
            if self.try_tap_here() {
                return Ok(());
            }
            self.advance_wire()?;
        }
    }
}

fn delay_line_plan(deltas: &[u32]) -> Result<Plan, BuildError> {
    let mut plan = Plan::new();
    plan.center()?;
    plan.wire(1, 0)?;
    let mut turtle = Turtle {
        plan,
        x: 1,
        z: 0,
        heading: 1,
        row_idx: 0,
        last_tap_x: None,
    };
    // Stage 0 lamp taps the very first path cell.
    if !turtle.try_tap_here() {
        return Err(BuildError::LayoutConflict {
            pos: Pos::new(1, PLANE_Y, 0),
            detail: "stage 0 tap blocked".into(),
        });
    }
    for delta in deltas {
        for setting in compose_delay(*delta) {
            turtle.place_repeater(setting)?;
        }
        // Repeater output cell doubles as the next stage tap.
        turtle.advance_wire()?;
        if !turtle.try_tap_here() {
            turtle.place_tap()?;
        }
    }
    Ok(turtle.plan)
}

/// Lamp positions for a generated sequential task. Levels whose chain cannot
/// fold into the region fall back to a plain grid: the paper's own models
/// never solved those levels, and the reference constructor reports the
/// overflow honestly instead.
pub(crate) fn delay_line_outputs(deltas: &[u32]) -> Result<Vec<Pos>, BuildError> {
    match delay_line_plan(deltas) {
        Ok(plan) => Ok(plan.lamps().to_vec()),
        Err(BuildError::RegionOverflow { .. }) => {
            let n = deltas.len() + 1;
            let mut out = Vec::new();
            'outer: for z in (-9..=9).step_by(2) {
                for x in (-9..=9).step_by(2) {
                    if x == 0 && z == 0 {
                        continue;
                    }
                    out.push(Pos::new(x, PLANE_Y, z));
                    if out.len() == n {
                        break 'outer;
                    }
                }
            }
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

/// Serial delay line: stage i tees a lamp off the trunk, then the inter-stage
/// repeaters realize delta_i.
pub fn build_delay_line(deltas: &[u32]) -> Result<Device, BuildError> {
    let total_cells: u32 = deltas.iter().map(|d| compose_delay(*d).len() as u32 + 2).sum();
    delay_line_plan(deltas)
        .map(|p| p.into_device(format!("delay-line-{}", deltas.len() + 1)))
        .map_err(|e| match e {
            BuildError::RegionOverflow {
                available_cells: _,
                radius,
                detail,
                ..
            } => BuildError::RegionOverflow {
                needed_cells: total_cells + 8,
                available_cells: 76,
                radius,
                detail,
            },
            other => other,
        })
}

// ---------------------------------------------------------------------------
// Family D: per-quadrant staircase rays with bucket taps
// ---------------------------------------------------------------------------

/// Quadrant-0 ray cells in Manhattan order 1..=14. Rotated copies serve the
/// other quadrants.
const D_RAY: [(i32, i32); 14] = [
    (1, 0),
    (1, 1),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 4),
    (3, 4),
    (4, 4),
    (4, 5),
    (4, 6),
    (4, 7),
    (4, 8),
    (4, 9),
    (5, 9),
];

/// (bucket, ray prefix length, repeater cell, repeater facing, lamp cell).
/// The repeater in each tap stub doubles as the equalizing delay: every path
/// carries exactly one tick.
const D_SLOTS: [(u32, usize, (i32, i32), Direction, (i32, i32)); 4] = [
    (4, 2, (2, 1), Direction::East, (3, 1)),
    (8, 6, (2, 5), Direction::South, (2, 6)),
    (12, 10, (5, 6), Direction::East, (6, 6)),
    (16, 14, (6, 9), Direction::East, (7, 9)),
];

fn rot(times: u32, (x, z): (i32, i32)) -> (i32, i32) {
    let mut p = (x, z);
    for _ in 0..times % 4 {
        p = (-p.1, p.0);
    }
    p
}

fn rot_dir(times: u32, d: Direction) -> Direction {
    let mut d = d;
    for _ in 0..times % 4 {
        d = match d {
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
            Direction::North => Direction::East,
            other => other,
        };
    }
    d
}

fn d_slot_lamp(quadrant: u32, bucket: u32) -> Pos {
    let slot = D_SLOTS.iter().find(|s| s.0 == bucket).unwrap();
    let (x, z) = rot(quadrant, slot.4);
    Pos::new(x, PLANE_Y, z)
}

/// Deterministic seeded assignment of buckets to quadrants.
fn d_assignment(n: u32, seed: u64) -> Option<Vec<Vec<u32>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD15C0);
    let mut buckets = [4u32, 8, 12, 16];
    match n {
        4 => {
            buckets.shuffle(&mut rng);
            Some(buckets.iter().map(|b| vec![*b]).collect())
        }
        8 => {
            buckets.shuffle(&mut rng);
            let offset = 1 + (rng.next()? % 3);
            let second: Vec<u32> = (0..4)
                .map(|q| buckets[(q + offset as usize) % 4])
                .collect();
            Some(
                (0..4)
                    .map(|q| vec![buckets[q], second[q]])
                    .collect(),
            )
        }
        16 => Some(vec![vec![4, 8, 12, 16]; 4]),
        _ => None,
    }
}

trait NextU64 {
    fn next(&mut self) -> Option<u64>;
}

impl NextU64 for ChaCha8Rng {
    fn next(&mut self) -> Option<u64> {
        Some(rand::RngCore::next_u64(self))
    }
}

/// Lamp targets for a generated equal-delay task. Up to 16 lamps use the
/// solvable slot table; larger counts fill the Manhattan diamonds (those
/// levels exceed the reference router and are declared, not solved).
pub(crate) fn bucket_outputs(n: u32, seed: u64) -> Result<Vec<Pos>, BuildError> {
    if let Some(assignment) = d_assignment(n, seed) {
        let mut out = Vec::new();
        for (q, buckets) in assignment.iter().enumerate() {
            let mut sorted = buckets.clone();
            sorted.sort_unstable();
            for b in sorted {
                out.push(d_slot_lamp(q as u32, b));
            }
        }
        return Ok(out);
    }
    // Diamond placement for n > 16: per bucket, cells at exact Manhattan
    // distance, seeded choice, even spread over buckets.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD15C1);
    let per_bucket = n / 4;
    let mut out = Vec::new();
    for bucket in [4u32, 8, 12, 16] {
        let b = bucket as i32;
        let mut cells = Vec::new();
        for x in -b..=b {
            let rest = b - x.abs();
            for z in [rest, -rest] {
                let p = Pos::new(x, PLANE_Y, z);
                if p.chebyshev(Pos::new(0, PLANE_Y, 0)) <= REGION_RADIUS as u32
                    && !(x == 0 && z == 0)
                    && !cells.contains(&p)
                {
                    cells.push(p);
                }
            }
        }
        if (per_bucket as usize) > cells.len() {
            return Err(BuildError::RegionOverflow {
                needed_cells: per_bucket,
                available_cells: cells.len() as u32,
                radius: REGION_RADIUS,
                detail: format!("distance bucket {bucket} diamond exhausted"),
            });
        }
        cells.shuffle(&mut rng);
        out.extend(cells.into_iter().take(per_bucket as usize));
    }
    Ok(out)
}

/// Equal-delay constructor: one staircase ray per quadrant, a tap stub per
/// bucket whose repeater pads every path to the same single tick.
pub fn build_equalized(assignment: &[(Pos, u32)]) -> Result<Device, BuildError> {
    if assignment.len() > 16 {
        return Err(BuildError::RegionOverflow {
            needed_cells: assignment.len() as u32 * 8,
            available_cells: 16 * 8,
            radius: REGION_RADIUS,
            detail: "equalized router supports up to 16 lamps (4 per quadrant)".into(),
        });
    }
    let mut by_quadrant: Vec<Vec<u32>> = vec![Vec::new(); 4];
    for (pos, bucket) in assignment {
        let mut matched = false;
        for q in 0..4 {
            if D_SLOTS.iter().any(|s| s.0 == *bucket && d_slot_lamp(q, *bucket) == *pos) {
                by_quadrant[q as usize].push(*bucket);
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(BuildError::UnsupportedLayout(format!(
                "lamp {pos} (bucket {bucket}) is not a canonical slot"
            )));
        }
    }

    let mut plan = Plan::new();
    plan.center()?;
    for (q, buckets) in by_quadrant.iter().enumerate() {
        if buckets.is_empty() {
            continue;
        }
        let longest = *buckets.iter().max().unwrap();
        let prefix = D_SLOTS.iter().find(|s| s.0 == longest).unwrap().1;
        for cell in D_RAY.iter().take(prefix) {
            let (x, z) = rot(q as u32, *cell);
            plan.wire(x, z)?;
        }
        let mut sorted = buckets.clone();
        sorted.sort_unstable();
        for b in sorted {
            let slot = D_SLOTS.iter().find(|s| s.0 == b).unwrap();
            let (rx, rz) = rot(q as u32, slot.2);
            plan.repeater(rx, rz, rot_dir(q as u32, slot.3), 1)?;
            let (lx, lz) = rot(q as u32, slot.4);
            plan.lamp(lx, lz)?;
        }
    }
    Ok(plan.into_device(format!("equalized-{}", assignment.len())))
}

// ---------------------------------------------------------------------------
// Family E: pulse nets
// ---------------------------------------------------------------------------

/// Spine comb west of the anchor used for small pulse devices: the net sits
/// behind one repeater, the east side stays free for the extension chain.
fn pulse_spine_plan(n: u32, tau: u32) -> Result<Plan, BuildError> {
    let mut plan = Plan::new();
    plan.center()?;
    plan.wire(-1, 0)?;
    plan.repeater(-2, 0, Direction::West, 1)?;

    let pairs = if n % 2 == 0 { (n - 2) / 2 } else { (n - 1) / 2 };
    let south_tip = true;
    let north_tip = n % 2 == 0;
    let s_end = 2 * pairs as i32;
    let n_end = if north_tip {
        -(2 * pairs as i32)
    } else {
        -(2 * pairs as i32 - 1)
    };

    for z in n_end..=s_end {
        plan.wire(-3, z)?;
    }
    for k in 0..pairs as i32 {
        let z = 2 * k + 1;
        plan.wire(-4, z)?;
        plan.lamp(-5, z)?;
        plan.wire(-4, -z)?;
        plan.lamp(-5, -z)?;
    }
    if south_tip {
        plan.lamp(-3, s_end + 1)?;
    }
    if north_tip {
        plan.lamp(-3, n_end - 1)?;
    }

    add_pulse_extension(&mut plan, tau, Pos::new(-3, PLANE_Y, 1), Direction::West)?;
    Ok(plan)
}

/// Small-net extension: a port repeater west of the anchor re-injects a
/// delayed copy of the button pulse into the spine. The port input dust is
/// fed both directly and (for longer stretches) through one chain repeater;
/// its only coupling back toward the feed dead-ends at the anchor block, so
/// nothing latches.
fn add_spine_extension(plan: &mut Plan, tau: u32) -> Result<(), BuildError> {
    // Lamps run one repeater behind the pulse, so the lamp window is
    // [press+1, press+5+delta): delta = tau - 5 centers the off tick.
    let delta = tau.saturating_sub(5);
    if delta == 0 {
        return Ok(());
    }
    let port_delay = delta.min(4) as u8;
    let chain_delay = delta.saturating_sub(4);
    // Port injects the spine at (-3, 1); its input at (-1, 1) sees the west
    // arm directly.
    plan.repeater(-2, 1, Direction::West, port_delay)?;
    plan.wire(-1, 1)?;
    if chain_delay > 0 {
        plan.repeater(0, 1, Direction::West, chain_delay as u8)?;
        plan.wire(1, 1)?;
        plan.wire(1, 0)?;
    }
    Ok(())
}

/// Lattice extension: the port repeater injects the trunk at (0, 1) and is
/// driven repeater-to-repeater, so no dust ever carries the delayed signal
/// back into the feed spine.
fn add_trunk_extension(plan: &mut Plan, tau: u32) -> Result<(), BuildError> {
    // Without an extension the lamp window is [press+1, press+5); that
    // already satisfies tau in 4..=6 at the window edges. Two chained
    // repeaters reach any longer target exactly.
    if tau <= 6 {
        return Ok(());
    }
    let delta = tau - 5;
    let port_delay = delta.min(4).max(delta.saturating_sub(4).max(1)) as u8;
    let feeder_delay = (delta - port_delay as u32) as u8;
    plan.wire(1, 0)?;
    plan.wire(2, 0)?;
    plan.wire(3, 0)?;
    plan.wire(3, 1)?;
    plan.repeater(2, 1, Direction::West, feeder_delay.max(1))?;
    plan.repeater(1, 1, Direction::West, port_delay)?;
    Ok(())
}

fn pulse_plan(n: u32, tau: u32) -> Result<Plan, BuildError> {
    if !(4..=12).contains(&tau) {
        return Err(BuildError::UnsupportedTau(tau));
    }
    if n < 2 {
        return Err(BuildError::UnsupportedN(n));
    }
    if n <= 9 {
        return pulse_spine_plan(n, tau);
    }
    // Larger nets reuse the row lattice with the east corridor reserved.
    let mut plan = lattice_plan(n, true)?;
    add_pulse_extension(&mut plan, tau, Pos::new(0, PLANE_Y, 1), Direction::East)?;
    Ok(plan)
}

/// Pulse shaping: the lamp net holds the button pulse as-is for short
/// durations and stretches it through extension ports for longer ones.
/// Shortening below the base pulse is not constructible in this power model
/// (signals only ever OR together), which is why the base pulse equals the
/// shortest scheduled duration.
pub fn build_pulse(tau: u32, n: u32) -> Result<Device, BuildError> {
    Ok(pulse_plan(n, tau)?.into_device(format!("pulse-{tau}-{n}")))
}

pub(crate) fn pulse_outputs(n: u32) -> Result<Vec<Pos>, BuildError> {
    // Mirror the builder's lamp placement; tau does not affect positions.
    let plan = if n <= 9 {
        pulse_spine_plan(n, 4)?
    } else {
        lattice_plan(n, true)?
    };
    Ok(plan.lamps().to_vec())
}

// ---------------------------------------------------------------------------
// Solver dispatch
// ---------------------------------------------------------------------------

fn same_lamp_set(a: &[Pos], b: &[Pos]) -> bool {
    let mut a: Vec<Pos> = a.to_vec();
    let mut b: Vec<Pos> = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Construct the reference device for a task produced by `generate_task`.
pub fn solve(spec: &TaskSpec) -> Result<Device, BuildError> {
    let device = match &spec.contract {
        ContractParams::Simultaneous { n, .. } | ContractParams::BranchReach { n, .. } => {
            build_simultaneous_any(*n)?
        }
        ContractParams::Sequential { deltas, .. } => build_delay_line(deltas)?,
        ContractParams::EqualDelay { n, .. } => {
            if *n > 16 {
                return Err(BuildError::RegionOverflow {
                    needed_cells: *n * 8,
                    available_cells: 16 * 8,
                    radius: REGION_RADIUS,
                    detail: "equalized router supports up to 16 lamps".into(),
                });
            }
            let assignment: Vec<(Pos, u32)> = spec
                .outputs
                .iter()
                .map(|p| (*p, p.manhattan(spec.world.anchor)))
                .collect();
            build_equalized(&assignment)?
        }
        ContractParams::Pulse { n, tau } => build_pulse(*tau, *n)?,
    };
    if !same_lamp_set(&device.lamp_positions(), &spec.outputs) {
        return Err(BuildError::UnsupportedLayout(
            "task outputs do not match the canonical constructor layout".into(),
        ));
    }
    Ok(device)
}
