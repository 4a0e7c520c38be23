// Task files: parsing, validation, canonical serialization, and procedural
// generation of the five task families across levels L1-L5.
//
// The on-disk format is a small YAML subset with a fixed key set:
// task_id, family, level, task_name, task_description, world.{anchor,radius},
// allowed_blocks, inputs, outputs, contract, test_cases, metadata. Unknown
// top-level keys are preserved under metadata. `serialize_task` emits a
// canonical form: same input, same bytes, always.

use crate::build;
use crate::world::{Direction, Pos, Region};
use crate::yaml::{self, Yaml};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::A, Family::B, Family::C, Family::D, Family::E];

    pub fn tag(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E => "E",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Family::A => "simultaneous",
            Family::B => "branch_reach",
            Family::C => "sequential",
            Family::D => "equal_delay",
            Family::E => "pulse",
        }
    }

    fn from_tag(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.tag() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl Level {
    pub const ALL: [Level; 5] = [Level::L1, Level::L2, Level::L3, Level::L4, Level::L5];

    pub fn tag(self) -> &'static str {
        match self {
            Level::L1 => "L1",
            Level::L2 => "L2",
            Level::L3 => "L3",
            Level::L4 => "L4",
            Level::L5 => "L5",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Level::L1 => 0,
            Level::L2 => 1,
            Level::L3 => 2,
            Level::L4 => 3,
            Level::L5 => 4,
        }
    }

    /// Shared lamp-count schedule: N = 4 * 2^(level-1).
    pub fn lamp_count(self) -> u32 {
        4 << self.index()
    }

    fn from_tag(s: &str) -> Option<Self> {
        Level::ALL.into_iter().find(|l| l.tag() == s)
    }
}

/// The component palette, in canonical order, as namespaced block ids.
pub const PALETTE: [&str; 8] = [
    "minecraft:stone_button",
    "minecraft:redstone_wire",
    "minecraft:redstone_repeater",
    "minecraft:redstone_torch",
    "minecraft:redstone_lamp",
    "minecraft:stone",
    "minecraft:glass",
    "minecraft:air",
];

/// Map a namespaced block id to the engine's kind name.
pub fn palette_kind(id: &str) -> Option<&'static str> {
    match id {
        "minecraft:stone_button" => Some("button"),
        "minecraft:redstone_wire" => Some("wire"),
        "minecraft:redstone_repeater" => Some("repeater"),
        "minecraft:redstone_torch" => Some("torch"),
        "minecraft:redstone_lamp" => Some("lamp"),
        "minecraft:stone" => Some("stone"),
        "minecraft:glass" => Some("glass"),
        "minecraft:air" => Some("air"),
        _ => None,
    }
}

/// Family-specific contract parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractParams {
    Simultaneous {
        n: u32,
        skew_tol: u32,
    },
    BranchReach {
        n: u32,
        max_reach: u32,
        skew_tol: u32,
        require_repeaters: bool,
        require_t_junction: bool,
    },
    Sequential {
        n: u32,
        deltas: Vec<u32>,
        tol: u32,
    },
    EqualDelay {
        n: u32,
        distance_buckets: Vec<u32>,
        skew_tol: u32,
    },
    Pulse {
        n: u32,
        tau: u32,
    },
}

impl ContractParams {
    pub fn lamp_count(&self) -> u32 {
        match self {
            ContractParams::Simultaneous { n, .. }
            | ContractParams::BranchReach { n, .. }
            | ContractParams::Sequential { n, .. }
            | ContractParams::EqualDelay { n, .. }
            | ContractParams::Pulse { n, .. } => *n,
        }
    }
}

/// The single stimulus input: one stone button, optionally pinned to a
/// position (in which case the session pre-places it on its support).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ButtonSpec {
    pub pos: Option<Pos>,
    pub facing: Direction,
}

impl Default for ButtonSpec {
    fn default() -> Self {
        Self {
            pos: Some(Pos::new(0, 5, 0)),
            facing: Direction::Down,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    PressButton,
    Check {
        name: String,
        params: Vec<(String, i64)>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestCase {
    pub name: String,
    pub sequence: Vec<Step>,
}

/// Opaque preserved metadata (unknown top-level keys land here).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Metadata(pub(crate) Vec<(String, Yaml)>);

impl Metadata {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSpec {
    pub task_id: String,
    pub family: Family,
    pub level: Level,
    pub task_name: String,
    pub task_description: String,
    pub world: Region,
    pub allowed_blocks: Vec<String>,
    pub inputs: ButtonSpec,
    pub outputs: Vec<Pos>,
    pub contract: ContractParams,
    pub test_cases: Vec<TestCase>,
    pub metadata: Metadata,
}

impl TaskSpec {
    pub fn skew_tol(&self) -> u32 {
        match &self.contract {
            ContractParams::Simultaneous { skew_tol, .. }
            | ContractParams::BranchReach { skew_tol, .. }
            | ContractParams::EqualDelay { skew_tol, .. } => *skew_tol,
            ContractParams::Sequential { tol, .. } => *tol,
            ContractParams::Pulse { .. } => 1,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("syntax error at line {line}, col {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("schema error in `{field}`: {msg}")]
    Schema { field: String, msg: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

fn schema(field: &str, msg: impl Into<String>) -> TaskError {
    TaskError::Schema {
        field: field.to_string(),
        msg: msg.into(),
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

pub fn parse_task(text: &str) -> Result<TaskSpec, TaskError> {
    let doc = yaml::parse(text).map_err(|e| TaskError::Syntax {
        line: e.line,
        col: e.col,
        msg: e.msg,
    })?;
    let map = doc
        .as_map()
        .ok_or_else(|| schema("<root>", "task file must be a mapping"))?;

    let known = [
        "task_id",
        "family",
        "level",
        "task_name",
        "task_description",
        "world",
        "allowed_blocks",
        "inputs",
        "outputs",
        "contract",
        "test_cases",
        "metadata",
    ];

    let task_id = req_str(&doc, "task_id")?;
    let family = Family::from_tag(&req_str(&doc, "family")?)
        .ok_or_else(|| schema("family", "expected one of A, B, C, D, E"))?;
    let level = Level::from_tag(&req_str(&doc, "level")?)
        .ok_or_else(|| schema("level", "expected one of L1..L5"))?;
    let task_name = req_str(&doc, "task_name")?;
    let task_description = req_str(&doc, "task_description")?;

    let world_y = doc.get("world").ok_or_else(|| schema("world", "missing"))?;
    let anchor = parse_pos(
        world_y
            .get("anchor")
            .ok_or_else(|| schema("world.anchor", "missing"))?,
        "world.anchor",
    )?;
    let radius = world_y
        .get("radius")
        .and_then(Yaml::as_int)
        .ok_or_else(|| schema("world.radius", "expected integer"))?;
    if radius <= 0 {
        return Err(schema("world.radius", "radius must be positive"));
    }
    let world = Region::new(anchor, radius as i32);

    let allowed_blocks: Vec<String> = doc
        .get("allowed_blocks")
        .and_then(Yaml::as_list)
        .ok_or_else(|| schema("allowed_blocks", "expected a list"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| schema("allowed_blocks", "expected block id strings"))
        })
        .collect::<Result<_, _>>()?;
    for id in &allowed_blocks {
        if palette_kind(id).is_none() {
            return Err(TaskError::Semantic(format!(
                "allowed_blocks entry {id} is outside the component palette"
            )));
        }
    }

    let inputs = parse_inputs(doc.get("inputs"))?;

    let outputs: Vec<Pos> = doc
        .get("outputs")
        .and_then(Yaml::as_list)
        .ok_or_else(|| schema("outputs", "expected a list of positions"))?
        .iter()
        .map(|v| parse_pos(v, "outputs"))
        .collect::<Result<_, _>>()?;

    let contract = parse_contract(
        family,
        doc.get("contract")
            .ok_or_else(|| schema("contract", "missing"))?,
    )?;

    let test_cases = parse_test_cases(doc.get("test_cases"))?;

    let mut metadata: Vec<(String, Yaml)> = Vec::new();
    if let Some(meta) = doc.get("metadata") {
        if let Some(entries) = meta.as_map() {
            metadata.extend(entries.iter().cloned());
        }
    }
    for (k, v) in map {
        if !known.contains(&k.as_str()) {
            metadata.push((k.clone(), v.clone()));
        }
    }

    let spec = TaskSpec {
        task_id,
        family,
        level,
        task_name,
        task_description,
        world,
        allowed_blocks,
        inputs,
        outputs,
        contract,
        test_cases,
        metadata: Metadata(metadata),
    };
    validate_spec(&spec)?;
    Ok(spec)
}

fn req_str(doc: &Yaml, key: &str) -> Result<String, TaskError> {
    doc.get(key)
        .and_then(Yaml::as_str)
        .map(str::to_string)
        .ok_or_else(|| schema(key, "expected a string"))
}

fn parse_pos(v: &Yaml, field: &str) -> Result<Pos, TaskError> {
    let list = v
        .as_list()
        .ok_or_else(|| schema(field, "expected [x, y, z]"))?;
    if list.len() != 3 {
        return Err(schema(field, "expected exactly three components"));
    }
    let mut c = [0i32; 3];
    for (i, item) in list.iter().enumerate() {
        let val = item
            .as_int()
            .ok_or_else(|| schema(field, "position components must be integers"))?;
        c[i] = i32::try_from(val).map_err(|_| schema(field, "component out of range"))?;
    }
    Ok(Pos::new(c[0], c[1], c[2]))
}

fn parse_direction(v: &Yaml, field: &str) -> Result<Direction, TaskError> {
    match v.as_str() {
        Some("north") => Ok(Direction::North),
        Some("east") => Ok(Direction::East),
        Some("south") => Ok(Direction::South),
        Some("west") => Ok(Direction::West),
        Some("up") => Ok(Direction::Up),
        Some("down") => Ok(Direction::Down),
        _ => Err(schema(field, "expected a direction name")),
    }
}

fn parse_inputs(v: Option<&Yaml>) -> Result<ButtonSpec, TaskError> {
    let Some(v) = v else {
        return Err(schema("inputs", "missing"));
    };
    let button = v
        .get("button")
        .ok_or_else(|| schema("inputs.button", "missing"))?;
    let pos = match button.get("pos") {
        None | Some(Yaml::Null) => None,
        Some(p) => Some(parse_pos(p, "inputs.button.pos")?),
    };
    let facing = match button.get("facing") {
        None => Direction::Down,
        Some(f) => parse_direction(f, "inputs.button.facing")?,
    };
    Ok(ButtonSpec { pos, facing })
}

fn int_field(v: &Yaml, field: &str, name: &str) -> Result<i64, TaskError> {
    v.get(name)
        .and_then(Yaml::as_int)
        .ok_or_else(|| schema(&format!("{field}.{name}"), "expected integer"))
}

fn parse_contract(family: Family, v: &Yaml) -> Result<ContractParams, TaskError> {
    let n = int_field(v, "contract", "n")? as u32;
    let contract = match family {
        Family::A => ContractParams::Simultaneous {
            n,
            skew_tol: int_field(v, "contract", "skew_tol")? as u32,
        },
        Family::B => ContractParams::BranchReach {
            n,
            max_reach: int_field(v, "contract", "max_reach")? as u32,
            skew_tol: int_field(v, "contract", "skew_tol")? as u32,
            require_repeaters: v
                .get("require_repeaters")
                .and_then(Yaml::as_bool)
                .unwrap_or(false),
            require_t_junction: v
                .get("require_t_junction")
                .and_then(Yaml::as_bool)
                .unwrap_or(true),
        },
        Family::C => {
            let deltas = v
                .get("deltas")
                .and_then(Yaml::as_list)
                .ok_or_else(|| schema("contract.deltas", "expected a list"))?
                .iter()
                .map(|d| {
                    d.as_int()
                        .filter(|x| *x >= 1)
                        .map(|x| x as u32)
                        .ok_or_else(|| schema("contract.deltas", "entries must be integers >= 1"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ContractParams::Sequential {
                n,
                deltas,
                tol: int_field(v, "contract", "tol")? as u32,
            }
        }
        Family::D => {
            let buckets = v
                .get("distance_buckets")
                .and_then(Yaml::as_list)
                .ok_or_else(|| schema("contract.distance_buckets", "expected a list"))?
                .iter()
                .map(|d| {
                    d.as_int()
                        .map(|x| x as u32)
                        .ok_or_else(|| schema("contract.distance_buckets", "expected integers"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            ContractParams::EqualDelay {
                n,
                distance_buckets: buckets,
                skew_tol: int_field(v, "contract", "skew_tol")? as u32,
            }
        }
        Family::E => {
            let tau = int_field(v, "contract", "tau")? as u32;
            if !(4..=12).contains(&tau) {
                return Err(schema("contract.tau", "tau must lie in 4..=12"));
            }
            ContractParams::Pulse { n, tau }
        }
    };
    Ok(contract)
}

fn parse_test_cases(v: Option<&Yaml>) -> Result<Vec<TestCase>, TaskError> {
    let Some(list) = v.and_then(Yaml::as_list) else {
        return Err(schema("test_cases", "expected a list"));
    };
    if list.is_empty() {
        return Err(schema("test_cases", "at least one test case required"));
    }
    let mut cases = Vec::new();
    for case in list {
        let name = case
            .get("name")
            .and_then(Yaml::as_str)
            .unwrap_or("main")
            .to_string();
        let seq = case
            .get("sequence")
            .and_then(Yaml::as_list)
            .ok_or_else(|| schema("test_cases.sequence", "expected a list of steps"))?;
        let mut steps = Vec::new();
        for step in seq {
            let action = step
                .get("action")
                .and_then(Yaml::as_str)
                .ok_or_else(|| schema("test_cases.sequence.action", "missing"))?;
            if action == "press_button" {
                steps.push(Step::PressButton);
            } else if let Some(check) = action.strip_prefix("check_") {
                let mut params = Vec::new();
                if let Some(pmap) = step.get("params").and_then(Yaml::as_map) {
                    for (k, pv) in pmap {
                        let val = pv.as_int().ok_or_else(|| {
                            schema("test_cases.sequence.params", "expected integer params")
                        })?;
                        params.push((k.clone(), val));
                    }
                }
                steps.push(Step::Check {
                    name: check.to_string(),
                    params,
                });
            } else {
                return Err(schema(
                    "test_cases.sequence.action",
                    format!("unknown action {action:?}"),
                ));
            }
        }
        let presses = steps
            .iter()
            .filter(|s| matches!(s, Step::PressButton))
            .count();
        if presses != 1 {
            return Err(TaskError::Semantic(format!(
                "test case {name:?} must contain exactly one press_button (found {presses})"
            )));
        }
        cases.push(TestCase {
            name,
            sequence: steps,
        });
    }
    Ok(cases)
}

fn validate_spec(spec: &TaskSpec) -> Result<(), TaskError> {
    let n = spec.contract.lamp_count();
    if spec.outputs.len() as u32 != n {
        return Err(TaskError::Semantic(format!(
            "contract declares {n} lamps but outputs lists {}",
            spec.outputs.len()
        )));
    }
    for p in &spec.outputs {
        if !spec.world.contains(*p) {
            return Err(TaskError::Semantic(format!(
                "output {p} lies outside the build region"
            )));
        }
    }
    if let Some(pos) = spec.inputs.pos {
        if !spec.world.contains(pos) {
            return Err(TaskError::Semantic(format!(
                "input button {pos} lies outside the build region"
            )));
        }
    }
    if let ContractParams::Sequential { n, deltas, .. } = &spec.contract {
        if deltas.len() as u32 != n.saturating_sub(1) {
            return Err(TaskError::Semantic(format!(
                "sequential contract needs {} deltas, found {}",
                n - 1,
                deltas.len()
            )));
        }
    }
    if let ContractParams::EqualDelay {
        distance_buckets, ..
    } = &spec.contract
    {
        // Static bucket placement: outputs must cover every declared bucket
        // at the matching Manhattan distance from the anchor.
        for bucket in distance_buckets {
            if !spec
                .outputs
                .iter()
                .any(|p| p.manhattan(spec.world.anchor) == *bucket)
            {
                return Err(TaskError::Semantic(format!(
                    "no output lamp sits in distance bucket {bucket}"
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

fn pos_yaml(p: Pos) -> Yaml {
    Yaml::List(vec![
        Yaml::Int(p.x as i64),
        Yaml::Int(p.y as i64),
        Yaml::Int(p.z as i64),
    ])
}

fn dir_name(d: Direction) -> &'static str {
    match d {
        Direction::North => "north",
        Direction::East => "east",
        Direction::South => "south",
        Direction::West => "west",
        Direction::Up => "up",
        Direction::Down => "down",
    }
}

pub fn serialize_task(spec: &TaskSpec) -> String {
    let mut out = String::new();
    out.push_str("# Identity\n");
    out.push_str(&format!("task_id: {}\n", yaml::emit_str(&spec.task_id)));
    out.push_str(&format!("family: {}\n", spec.family.tag()));
    out.push_str(&format!("level: {}\n", spec.level.tag()));
    out.push_str(&format!("task_name: {}\n", yaml::emit_str(&spec.task_name)));
    out.push_str(&format!(
        "task_description: {}\n",
        yaml::emit_str(&spec.task_description)
    ));
    out.push('\n');
    out.push_str("# Build region and palette\n");
    out.push_str("world:\n");
    out.push_str(&format!(
        "  anchor: {}\n",
        yaml::emit_flow(&pos_yaml(spec.world.anchor))
    ));
    out.push_str(&format!("  radius: {}\n", spec.world.radius));
    out.push_str("allowed_blocks:\n");
    for b in &spec.allowed_blocks {
        out.push_str(&format!("  - {b}\n"));
    }
    out.push('\n');
    out.push_str("# I/O specification\n");
    out.push_str("inputs:\n");
    out.push_str("  button:\n");
    match spec.inputs.pos {
        Some(p) => out.push_str(&format!("    pos: {}\n", yaml::emit_flow(&pos_yaml(p)))),
        None => out.push_str("    pos: null\n"),
    }
    out.push_str(&format!("    facing: {}\n", dir_name(spec.inputs.facing)));
    out.push_str("outputs:\n");
    for p in &spec.outputs {
        out.push_str(&format!("  - {}\n", yaml::emit_flow(&pos_yaml(*p))));
    }
    out.push_str("contract:\n");
    match &spec.contract {
        ContractParams::Simultaneous { n, skew_tol } => {
            out.push_str(&format!("  n: {n}\n  skew_tol: {skew_tol}\n"));
        }
        ContractParams::BranchReach {
            n,
            max_reach,
            skew_tol,
            require_repeaters,
            require_t_junction,
        } => {
            out.push_str(&format!(
                "  n: {n}\n  max_reach: {max_reach}\n  skew_tol: {skew_tol}\n  require_repeaters: {require_repeaters}\n  require_t_junction: {require_t_junction}\n"
            ));
        }
        ContractParams::Sequential { n, deltas, tol } => {
            let list = Yaml::List(deltas.iter().map(|d| Yaml::Int(*d as i64)).collect());
            out.push_str(&format!(
                "  n: {n}\n  deltas: {}\n  tol: {tol}\n",
                yaml::emit_flow(&list)
            ));
        }
        ContractParams::EqualDelay {
            n,
            distance_buckets,
            skew_tol,
        } => {
            let list = Yaml::List(
                distance_buckets
                    .iter()
                    .map(|d| Yaml::Int(*d as i64))
                    .collect(),
            );
            out.push_str(&format!(
                "  n: {n}\n  distance_buckets: {}\n  skew_tol: {skew_tol}\n",
                yaml::emit_flow(&list)
            ));
        }
        ContractParams::Pulse { n, tau } => {
            out.push_str(&format!("  n: {n}\n  tau: {tau}\n"));
        }
    }
    out.push('\n');
    out.push_str("# Test harness\n");
    out.push_str("test_cases:\n");
    for case in &spec.test_cases {
        out.push_str(&format!("  - name: {}\n", yaml::emit_str(&case.name)));
        out.push_str("    sequence:\n");
        for step in &case.sequence {
            match step {
                Step::PressButton => out.push_str("      - {action: press_button}\n"),
                Step::Check { name, params } => {
                    if params.is_empty() {
                        out.push_str(&format!("      - {{action: check_{name}}}\n"));
                    } else {
                        let inner: Vec<String> =
                            params.iter().map(|(k, v)| format!("{k}: {v}")).collect();
                        out.push_str(&format!(
                            "      - {{action: check_{name}, params: {{{}}}}}\n",
                            inner.join(", ")
                        ));
                    }
                }
            }
        }
    }
    out.push('\n');
    out.push_str("# Optional metadata (not used by the checker)\n");
    if spec.metadata.is_empty() {
        out.push_str("metadata: {}\n");
    } else {
        out.push_str("metadata:\n");
        let meta = Yaml::Map(spec.metadata.0.clone());
        yaml::emit_block(&meta, 2, &mut out);
    }
    out
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Raw overrides for off-schedule difficulty settings.
#[derive(Clone, Debug, Default)]
pub struct GenOptions {
    pub n: Option<u32>,
    pub tau: Option<u32>,
    pub deltas: Option<Vec<u32>>,
    pub max_reach: Option<u32>,
}

pub const B_MAX_REACH: [u32; 5] = [8, 12, 15, 18, 20];
pub const E_TAU: [u32; 5] = [4, 6, 8, 10, 12];
pub const D_BUCKETS: [u32; 4] = [4, 8, 12, 16];

/// Family C delta schedule: [1,2] repeated (n/2 - 1) times, then [1].
pub fn c_deltas(n: u32) -> Vec<u32> {
    let mut v = Vec::new();
    for _ in 0..(n / 2).saturating_sub(1) {
        v.push(1);
        v.push(2);
    }
    v.push(1);
    v
}

pub fn generate_task(family: Family, level: Level, seed: u64) -> Result<TaskSpec, TaskError> {
    generate_task_with(family, level, seed, &GenOptions::default())
}

pub fn generate_task_with(
    family: Family,
    level: Level,
    seed: u64,
    opts: &GenOptions,
) -> Result<TaskSpec, TaskError> {
    let n = opts.n.unwrap_or_else(|| level.lamp_count());
    if n == 0 {
        return Err(TaskError::Semantic("lamp count must be positive".into()));
    }
    let idx = level.index();
    let anchor = Pos::new(0, 4, 0);
    let world = Region::new(anchor, 10);

    let (outputs, contract) = match family {
        Family::A => (
            build::lattice_outputs(n),
            ContractParams::Simultaneous { n, skew_tol: 1 },
        ),
        Family::B => (
            build::lattice_outputs(n),
            ContractParams::BranchReach {
                n,
                max_reach: opts.max_reach.unwrap_or(B_MAX_REACH[idx]),
                skew_tol: 1,
                require_repeaters: matches!(level, Level::L4 | Level::L5),
                require_t_junction: true,
            },
        ),
        Family::C => {
            let deltas = opts.deltas.clone().unwrap_or_else(|| c_deltas(n));
            if deltas.len() as u32 != n - 1 {
                return Err(TaskError::Semantic(format!(
                    "sequential task with {n} lamps needs {} deltas",
                    n - 1
                )));
            }
            let outs = build::delay_line_outputs(&deltas);
            (outs, ContractParams::Sequential { n, deltas, tol: 1 })
        }
        Family::D => (
            build::bucket_outputs(n, seed),
            ContractParams::EqualDelay {
                n,
                distance_buckets: D_BUCKETS.to_vec(),
                skew_tol: 1,
            },
        ),
        Family::E => {
            let tau = opts.tau.unwrap_or(E_TAU[idx]);
            if !(4..=12).contains(&tau) {
                return Err(TaskError::Semantic("tau must lie in 4..=12".into()));
            }
            (build::pulse_outputs(n), ContractParams::Pulse { n, tau })
        }
    };

    let outputs = outputs.map_err(|e| TaskError::Semantic(e.to_string()))?;

    let task_id = format!("{}-{}-s{}", family.tag(), level.tag(), seed);
    let task_name = format!("{}_{}", family.slug(), level.tag());
    let task_description = describe(&contract);
    let test_cases = vec![TestCase {
        name: "main".into(),
        sequence: canonical_sequence(family, &contract),
    }];

    let spec = TaskSpec {
        task_id,
        family,
        level,
        task_name,
        task_description,
        world,
        allowed_blocks: PALETTE.iter().map(|s| s.to_string()).collect(),
        inputs: ButtonSpec::default(),
        outputs,
        contract,
        test_cases,
        metadata: Metadata::default(),
    };
    validate_spec(&spec)?;
    Ok(spec)
}

fn canonical_sequence(family: Family, contract: &ContractParams) -> Vec<Step> {
    let mut seq = vec![Step::PressButton];
    match (family, contract) {
        (Family::B, _) => {
            seq.push(Step::Check {
                name: "simultaneous".into(),
                params: vec![("tol".into(), 1)],
            });
            seq.push(Step::Check {
                name: "t_junction".into(),
                params: vec![],
            });
        }
        (Family::C, _) => seq.push(Step::Check {
            name: "sequential".into(),
            params: vec![("tol".into(), 1)],
        }),
        (Family::E, ContractParams::Pulse { tau, .. }) => seq.push(Step::Check {
            name: "pulse".into(),
            params: vec![("tau".into(), *tau as i64)],
        }),
        _ => seq.push(Step::Check {
            name: "simultaneous".into(),
            params: vec![("tol".into(), 1)],
        }),
    }
    seq
}

fn describe(contract: &ContractParams) -> String {
    match contract {
        ContractParams::Simultaneous { n, skew_tol } => format!(
            "Build a circuit so that one press of the stone button turns on all {n} \
             lamps at the declared output positions within {skew_tol} tick of each other."
        ),
        ContractParams::BranchReach {
            n,
            max_reach,
            skew_tol,
            require_repeaters,
            ..
        } => {
            let mut s = format!(
                "Route power from the button to all {n} declared lamps through a \
                 trunk-and-branch layout containing at least one dust T-junction; \
                 lamps must light within {skew_tol} tick of each other. Wire paths \
                 of up to {max_reach} blocks are required."
            );
            if *require_repeaters {
                s.push_str(" The build must use at least one repeater.");
            }
            s
        }
        ContractParams::Sequential { n, deltas, tol } => {
            let list: Vec<String> = deltas.iter().map(u32::to_string).collect();
            format!(
                "Light the {n} declared lamps in listed order: each lamp must follow \
                 its predecessor after [{}] ticks respectively (tolerance \u{b1}{tol} tick).",
                list.join(" ")
            )
        }
        ContractParams::EqualDelay { n, skew_tol, .. } => format!(
            "The {n} declared lamps sit at heterogeneous distances from the anchor. \
             Compensate the path differences so every lamp lights within {skew_tol} \
             tick of the others after one button press."
        ),
        ContractParams::Pulse { n, tau } => format!(
            "After one button press, all {n} declared lamps must turn on within one \
             tick of the press and stay lit for {tau} ticks (tolerance \u{b1}1) before \
             turning off."
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_a_l1_parses_back_identically() {
        let spec = generate_task(Family::A, Level::L1, 0).unwrap();
        let text = serialize_task(&spec);
        let back = parse_task(&text).unwrap();
        assert_eq!(back, spec);
        // Canonical form is byte-stable.
        assert_eq!(serialize_task(&back), text);
    }

    #[test]
    fn schedule_law_all_families_all_levels() {
        for family in Family::ALL {
            for level in Level::ALL {
                let spec = generate_task(family, level, 0).unwrap();
                assert_eq!(
                    spec.contract.lamp_count(),
                    4 << level.index(),
                    "{family:?} {level:?}"
                );
                assert_eq!(spec.outputs.len() as u32, spec.contract.lamp_count());
            }
        }
    }

    #[test]
    fn c_delta_schedule_matches_table() {
        assert_eq!(c_deltas(4), vec![1, 2, 1]);
        assert_eq!(c_deltas(8), vec![1, 2, 1, 2, 1, 2, 1]);
        assert_eq!(c_deltas(16).len(), 15);
        assert_eq!(c_deltas(32).len(), 31);
        assert_eq!(c_deltas(64).len(), 63);
        assert!(c_deltas(64).iter().all(|d| (1..=2).contains(d)));
    }

    #[test]
    fn e_l5_has_tau_12_and_64_lamps() {
        let spec = generate_task(Family::E, Level::L5, 7).unwrap();
        match spec.contract {
            ContractParams::Pulse { n, tau } => {
                assert_eq!(n, 64);
                assert_eq!(tau, 12);
            }
            _ => panic!("wrong contract"),
        }
    }

    #[test]
    fn d_generation_is_seed_deterministic() {
        let a = generate_task(Family::D, Level::L1, 0).unwrap();
        let b = generate_task(Family::D, Level::L1, 0).unwrap();
        assert_eq!(a.outputs, b.outputs);
        let c = generate_task(Family::D, Level::L1, 3).unwrap();
        assert_eq!(c.outputs.len(), 4);
    }

    #[test]
    fn d_buckets_are_covered() {
        for seed in 0..5 {
            for level in [Level::L1, Level::L2, Level::L3] {
                let spec = generate_task(Family::D, level, seed).unwrap();
                for b in D_BUCKETS {
                    assert!(
                        spec.outputs
                            .iter()
                            .any(|p| p.manhattan(spec.world.anchor) == b),
                        "bucket {b} uncovered at {level:?} seed {seed}"
                    );
                }
                assert!(spec
                    .outputs
                    .iter()
                    .all(|p| p.chebyshev(spec.world.anchor) <= 10));
            }
        }
    }

    #[test]
    fn zero_radius_is_a_schema_error() {
        let spec = generate_task(Family::A, Level::L1, 0).unwrap();
        let text = serialize_task(&spec).replace("radius: 10", "radius: 0");
        match parse_task(&text) {
            Err(TaskError::Schema { field, .. }) => assert_eq!(field, "world.radius"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn comparator_in_palette_is_a_semantic_error() {
        let spec = generate_task(Family::A, Level::L1, 0).unwrap();
        let text = serialize_task(&spec).replace(
            "  - minecraft:stone\n",
            "  - minecraft:stone\n  - minecraft:comparator\n",
        );
        match parse_task(&text) {
            Err(TaskError::Semantic(msg)) => assert!(msg.contains("comparator")),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_top_level_keys_land_in_metadata() {
        let spec = generate_task(Family::A, Level::L1, 0).unwrap();
        let mut text = serialize_task(&spec);
        text.push_str("custom_note: hello\n");
        let back = parse_task(&text).unwrap();
        assert!(back.metadata.keys().any(|k| k == "custom_note"));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_task("task_id: [oops\n") {
            Err(TaskError::Syntax { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn output_outside_region_rejected() {
        let spec = generate_task(Family::A, Level::L1, 0).unwrap();
        let text = serialize_task(&spec);
        let needle = "outputs:\n";
        let idx = text.find(needle).unwrap() + needle.len();
        let end = text[idx..].find('\n').unwrap() + idx + 1;
        let mangled = format!("{}  - [40, 4, 0]\n{}", &text[..idx], &text[end..]);
        match parse_task(&mangled) {
            Err(TaskError::Semantic(msg)) => assert!(msg.contains("outside")),
            other => panic!("expected semantic error, got {other:?}"),
        }
    }
}
