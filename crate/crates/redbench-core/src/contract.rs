// Temporal contract checking: record a per-tick lamp trace under the single
// button-press stimulus and evaluate the family contracts plus the static
// constraints (palette, region, topology).

use std::collections::BTreeSet;

use serde::Serialize;

use crate::engine::EngineError;
use crate::task::{ContractParams, TaskSpec};
use crate::world::{Block, Pos, World};

/// Per-tick on/off matrix over the task's output lamps, plus derived onset
/// and offset tick lists. Row 0 covers the press tick itself: dust settles
/// within a tick, so a direct lamp can light at the press tick.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LampTrace {
    pub press_tick: u64,
    pub lamps: Vec<Pos>,
    /// Lamp states after pre-press settling, before the press: devices are
    /// expected to start dark.
    pub pre_lit: Vec<bool>,
    pub grid: Vec<Vec<bool>>,
    pub onsets: Vec<Option<u64>>,
    pub offsets: Vec<Option<u64>>,
}

impl LampTrace {
    pub fn empty() -> Self {
        LampTrace {
            press_tick: 0,
            lamps: Vec::new(),
            pre_lit: Vec::new(),
            grid: Vec::new(),
            onsets: Vec::new(),
            offsets: Vec::new(),
        }
    }

    /// CSV export: header "tick,lamp_0..lamp_{N-1}", one 0/1 row per tick.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tick");
        for i in 0..self.lamps.len() {
            out.push_str(&format!(",lamp_{i}"));
        }
        out.push('\n');
        for (row_idx, row) in self.grid.iter().enumerate() {
            out.push_str(&(self.press_tick + row_idx as u64).to_string());
            for lit in row {
                out.push_str(if *lit { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }

    fn derive(&mut self) {
        let n = self.lamps.len();
        self.onsets = vec![None; n];
        self.offsets = vec![None; n];
        for i in 0..n {
            for (r, row) in self.grid.iter().enumerate() {
                let tick = self.press_tick + r as u64;
                if row[i] {
                    if self.onsets[i].is_none() {
                        self.onsets[i] = Some(tick);
                    }
                } else if self.onsets[i].is_some() && self.offsets[i].is_none() {
                    self.offsets[i] = Some(tick);
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub rule: String,
    pub measured: String,
    pub allowed: String,
}

impl Violation {
    fn new(
        subject: impl Into<String>,
        rule: impl Into<String>,
        measured: impl Into<String>,
        allowed: impl Into<String>,
    ) -> Self {
        Violation {
            subject: subject.into(),
            rule: rule.into(),
            measured: measured.into(),
            allowed: allowed.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub diagnostics: String,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            pass: true,
            violations: Vec::new(),
            diagnostics: String::new(),
        }
    }

    pub fn from_violations(violations: Vec<Violation>, diagnostics: impl Into<String>) -> Self {
        Verdict {
            pass: violations.is_empty(),
            violations,
            diagnostics: diagnostics.into(),
        }
    }

    pub fn merge(mut self, other: Verdict) -> Verdict {
        self.pass = self.pass && other.pass;
        self.violations.extend(other.violations);
        if !other.diagnostics.is_empty() {
            if !self.diagnostics.is_empty() {
                self.diagnostics.push_str("; ");
            }
            self.diagnostics.push_str(&other.diagnostics);
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ContractError {
    #[error("no button found for the task input")]
    MissingButton,
    #[error("multiple buttons found where exactly one is required")]
    MultipleButtons,
    #[error("missing lamps at declared outputs: {0:?}")]
    MissingLamps(Vec<Pos>),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Locate the task's button: the pinned input position when declared,
/// otherwise the unique button inside the region.
pub fn locate_button(world: &World, spec: &TaskSpec) -> Result<Pos, ContractError> {
    if let Some(pos) = spec.inputs.pos {
        return match world.get_block(pos) {
            Block::Button { .. } => Ok(pos),
            _ => Err(ContractError::MissingButton),
        };
    }
    let buttons: Vec<Pos> = world
        .scan_region(spec.world)
        .into_iter()
        .filter(|(_, b)| matches!(b, Block::Button { .. }))
        .map(|(p, _)| p)
        .collect();
    match buttons.len() {
        0 => Err(ContractError::MissingButton),
        1 => Ok(buttons[0]),
        _ => Err(ContractError::MultipleButtons),
    }
}

/// Settle the world, press the task button, and record the lamp grid until
/// quiescence or the settle horizon. The world is left in its post-test state.
pub fn record_trace(world: &mut World, spec: &TaskSpec) -> Result<LampTrace, ContractError> {
    let missing: Vec<Pos> = spec
        .outputs
        .iter()
        .copied()
        .filter(|p| !matches!(world.get_block(*p), Block::Lamp { .. }))
        .collect();
    if !missing.is_empty() {
        return Err(ContractError::MissingLamps(missing));
    }
    let button = locate_button(world, spec)?;

    let horizon = world.config().max_settle_ticks;
    world.run_until_quiescent(horizon);

    let lamp_states = |w: &World| -> Vec<bool> {
        spec.outputs
            .iter()
            .map(|p| matches!(w.get_block(*p), Block::Lamp { lit: true }))
            .collect()
    };
    let pre_lit = lamp_states(world);

    let press_tick = world.press_button(button)?;
    let mut trace = LampTrace {
        press_tick,
        lamps: spec.outputs.clone(),
        pre_lit,
        grid: vec![lamp_states(world)],
        onsets: Vec::new(),
        offsets: Vec::new(),
    };
    while world.clock() < press_tick + horizon {
        let events = world.step();
        trace.grid.push(lamp_states(world));
        if events.is_empty() && world.pending_changes() == 0 {
            break;
        }
    }
    trace.derive();
    Ok(trace)
}

// ---------------------------------------------------------------------------
// Family checks (pure over the trace)
// ---------------------------------------------------------------------------

fn never_lit_violations(trace: &LampTrace) -> Vec<Violation> {
    trace
        .onsets
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_none())
        .map(|(i, _)| Violation::new(format!("lamp {i}"), "never-lit", "no onset", "must light"))
        .collect()
}

/// Family A/D contract: every lamp lights and the onset spread stays within
/// the tolerance.
pub fn check_simultaneous(trace: &LampTrace, tol: u32) -> Verdict {
    let mut violations = never_lit_violations(trace);
    let onsets: Vec<u64> = trace.onsets.iter().filter_map(|o| *o).collect();
    if violations.is_empty() && !onsets.is_empty() {
        let min = *onsets.iter().min().unwrap();
        let max = *onsets.iter().max().unwrap();
        if max - min > tol as u64 {
            let lo = trace.onsets.iter().position(|o| *o == Some(min)).unwrap();
            let hi = trace.onsets.iter().position(|o| *o == Some(max)).unwrap();
            violations.push(Violation::new(
                format!("pair ({lo}, {hi})"),
                "skew",
                format!("{}", max - min),
                format!("<= {tol}"),
            ));
        }
    }
    Verdict::from_violations(violations, "")
}

/// Family C contract: lamps light in spec order with the declared
/// stage-to-stage delays, each within the tolerance.
pub fn check_sequential(trace: &LampTrace, deltas: &[u32], tol: u32) -> Verdict {
    if deltas.len() + 1 != trace.lamps.len() {
        return Verdict::from_violations(
            vec![Violation::new(
                "deltas",
                "length-mismatch",
                format!("{}", deltas.len()),
                format!("{}", trace.lamps.len().saturating_sub(1)),
            )],
            "",
        );
    }
    let mut violations = never_lit_violations(trace);
    if violations.is_empty() {
        for (i, delta) in deltas.iter().enumerate() {
            let a = trace.onsets[i].unwrap() as i64;
            let b = trace.onsets[i + 1].unwrap() as i64;
            let gap = b - a;
            if (gap - *delta as i64).abs() > tol as i64 {
                violations.push(Violation::new(
                    format!("stage {}", i + 1),
                    "stage-gap",
                    format!("{gap}"),
                    format!("{delta} \u{b1} {tol}"),
                ));
            }
        }
    }
    Verdict::from_violations(violations, "")
}

/// Family E contract: onsets inside [press, press+1] and offsets inside
/// [press+tau-1, press+tau+1].
pub fn check_pulse(trace: &LampTrace, tau: u32, tol: u32) -> Verdict {
    let mut violations = Vec::new();
    let press = trace.press_tick;
    for i in 0..trace.lamps.len() {
        match trace.onsets[i] {
            None => violations.push(Violation::new(
                format!("lamp {i}"),
                "never-lit",
                "no onset",
                "must light",
            )),
            Some(on) => {
                if on < press || on > press + 1 {
                    violations.push(Violation::new(
                        format!("lamp {i}"),
                        "on-window",
                        format!("{on}"),
                        format!("[{press}, {}]", press + 1),
                    ));
                }
                let lo = press + tau as u64 - tol as u64;
                let hi = press + tau as u64 + tol as u64;
                match trace.offsets[i] {
                    None => violations.push(Violation::new(
                        format!("lamp {i}"),
                        "stuck-on",
                        "no offset",
                        format!("[{lo}, {hi}]"),
                    )),
                    Some(off) => {
                        if off < lo || off > hi {
                            violations.push(Violation::new(
                                format!("lamp {i}"),
                                "off-window",
                                format!("{off}"),
                                format!("[{lo}, {hi}]"),
                            ));
                        }
                    }
                }
            }
        }
    }
    Verdict::from_violations(violations, "")
}

/// Family B topology constraint: the dust graph must contain a fan-out node,
/// i.e. some wire with three or more same-level wire neighbors.
pub fn check_t_junction(world: &World, spec: &TaskSpec) -> Verdict {
    let wires: BTreeSet<Pos> = world
        .scan_region(spec.world)
        .into_iter()
        .filter(|(_, b)| matches!(b, Block::Wire { .. }))
        .map(|(p, _)| p)
        .collect();
    let max_degree = wires
        .iter()
        .map(|p| p.neighbors4().iter().filter(|n| wires.contains(n)).count())
        .max()
        .unwrap_or(0);
    if max_degree >= 3 {
        Verdict::pass()
    } else {
        Verdict::from_violations(
            vec![Violation::new(
                "dust graph",
                "no-t-junction",
                format!("max degree {max_degree}"),
                "some wire with degree >= 3",
            )],
            "",
        )
    }
}

/// Static constraints: region bounds, palette, declared lamps present, one
/// button at the declared input, and the family-B repeater requirement.
pub fn check_static(world: &World, spec: &TaskSpec) -> Verdict {
    let mut violations = Vec::new();
    let floor_y = world.config().floor_y;
    let allowed: BTreeSet<&str> = spec
        .allowed_blocks
        .iter()
        .filter_map(|id| crate::task::palette_kind(id))
        .collect();

    for (pos, block) in world.blocks.iter() {
        if pos.y == floor_y && matches!(block, Block::Stone) {
            continue;
        }
        if !spec.world.contains(*pos) {
            violations.push(Violation::new(
                format!("block at {pos}"),
                "out-of-region",
                format!("{}", pos.chebyshev(spec.world.anchor)),
                format!("chebyshev <= {}", spec.world.radius),
            ));
        }
        if !allowed.contains(block.kind_name()) {
            violations.push(Violation::new(
                format!("block at {pos}"),
                "out-of-palette",
                block.kind_name().to_string(),
                "kind within allowed_blocks",
            ));
        }
    }

    for out in &spec.outputs {
        if !matches!(world.get_block(*out), Block::Lamp { .. }) {
            violations.push(Violation::new(
                format!("output {out}"),
                "missing-lamp",
                world.get_block(*out).kind_name().to_string(),
                "lamp",
            ));
        }
    }

    match locate_button(world, spec) {
        Ok(_) => {}
        Err(ContractError::MultipleButtons) => violations.push(Violation::new(
            "inputs",
            "multiple-buttons",
            "more than one button",
            "exactly one",
        )),
        Err(_) => violations.push(Violation::new(
            "inputs",
            "missing-button",
            "no button",
            "exactly one",
        )),
    }

    if let ContractParams::BranchReach {
        require_repeaters: true,
        ..
    } = spec.contract
    {
        let repeaters = world
            .scan_region(spec.world)
            .into_iter()
            .filter(|(_, b)| matches!(b, Block::Repeater { .. }))
            .count();
        if repeaters == 0 {
            violations.push(Violation::new(
                "device",
                "repeaters-required",
                "0",
                ">= 1 repeater",
            ));
        }
    }

    Verdict::from_violations(violations, "")
}

/// Full evaluation pipeline: static checks, then the recorded trace against
/// the family contract. The aggregate verdict is the conjunction.
pub fn evaluate(world: &mut World, spec: &TaskSpec) -> (Verdict, LampTrace) {
    let static_verdict = check_static(world, spec);
    if !static_verdict.pass {
        return (static_verdict, LampTrace::empty());
    }
    let trace = match record_trace(world, spec) {
        Ok(t) => t,
        Err(e) => {
            return (
                Verdict::from_violations(
                    vec![Violation::new("trace", "record-failed", e.to_string(), "")],
                    "",
                ),
                LampTrace::empty(),
            )
        }
    };

    let mut verdict = static_verdict;
    for (i, pre) in trace.pre_lit.iter().enumerate() {
        if *pre {
            verdict = verdict.merge(Verdict::from_violations(
                vec![Violation::new(
                    format!("lamp {i}"),
                    "pre-lit",
                    "lit before press",
                    "dark at press",
                )],
                "",
            ));
        }
    }

    let family_verdict = match &spec.contract {
        ContractParams::Simultaneous { skew_tol, .. } => check_simultaneous(&trace, *skew_tol),
        ContractParams::BranchReach { skew_tol, .. } => {
            check_simultaneous(&trace, *skew_tol).merge(check_t_junction(world, spec))
        }
        ContractParams::Sequential { deltas, tol, .. } => check_sequential(&trace, deltas, *tol),
        ContractParams::EqualDelay { skew_tol, .. } => check_simultaneous(&trace, *skew_tol),
        ContractParams::Pulse { tau, .. } => check_pulse(&trace, *tau, 1),
    };
    (verdict.merge(family_verdict), trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_with_onsets(onsets: Vec<Option<u64>>) -> LampTrace {
        let n = onsets.len();
        LampTrace {
            press_tick: 0,
            lamps: (0..n as i32).map(|i| Pos::new(i, 4, 0)).collect(),
            pre_lit: vec![false; n],
            grid: Vec::new(),
            onsets,
            offsets: vec![None; n],
        }
    }

    #[test]
    fn simultaneous_passes_at_spread_one() {
        let t = trace_with_onsets(vec![Some(5), Some(5), Some(6), Some(5)]);
        assert!(check_simultaneous(&t, 1).pass);
    }

    #[test]
    fn simultaneous_fails_at_spread_two() {
        let t = trace_with_onsets(vec![Some(5), Some(5), Some(7), Some(5)]);
        let v = check_simultaneous(&t, 1);
        assert!(!v.pass);
        assert_eq!(v.violations[0].rule, "skew");
        assert_eq!(v.violations[0].measured, "2");
    }

    #[test]
    fn simultaneous_flags_never_lit() {
        let t = trace_with_onsets(vec![Some(5), None, Some(5)]);
        let v = check_simultaneous(&t, 1);
        assert!(!v.pass);
        assert_eq!(v.violations[0].rule, "never-lit");
    }

    #[test]
    fn sequential_gap_arithmetic() {
        // deltas [1,2,1]: gaps exactly on target pass.
        let t = trace_with_onsets(vec![Some(3), Some(4), Some(6), Some(7)]);
        assert!(check_sequential(&t, &[1, 2, 1], 1).pass);
        // gap off by one still passes at tol 1.
        let t = trace_with_onsets(vec![Some(3), Some(4), Some(7), Some(8)]);
        assert!(check_sequential(&t, &[1, 2, 1], 1).pass);
        // gap of 4 against delta 2 fails.
        let t = trace_with_onsets(vec![Some(3), Some(4), Some(8), Some(9)]);
        let v = check_sequential(&t, &[1, 2, 1], 1);
        assert!(!v.pass);
        assert_eq!(v.violations[0].subject, "stage 2");
    }

    #[test]
    fn sequential_vacuous_single_lamp() {
        let t = trace_with_onsets(vec![Some(9)]);
        assert!(check_sequential(&t, &[], 1).pass);
    }

    #[test]
    fn sequential_length_mismatch() {
        let t = trace_with_onsets(vec![Some(1), Some(2)]);
        let v = check_sequential(&t, &[1, 1, 1], 1);
        assert_eq!(v.violations[0].rule, "length-mismatch");
    }

    #[test]
    fn pulse_windows() {
        let mut t = trace_with_onsets(vec![Some(10)]);
        t.press_tick = 10;
        t.offsets = vec![Some(14)];
        assert!(check_pulse(&t, 4, 1).pass);
        t.offsets = vec![Some(16)];
        let v = check_pulse(&t, 4, 1);
        assert!(!v.pass);
        assert_eq!(v.violations[0].rule, "off-window");
        t.offsets = vec![None];
        let v = check_pulse(&t, 4, 1);
        assert_eq!(v.violations[0].rule, "stuck-on");
    }

    #[test]
    fn simultaneous_is_permutation_invariant() {
        let onsets = vec![Some(5u64), Some(6), Some(5), Some(6)];
        let base = check_simultaneous(&trace_with_onsets(onsets.clone()), 1).pass;
        let mut rev = onsets;
        rev.reverse();
        assert_eq!(base, check_simultaneous(&trace_with_onsets(rev), 1).pass);
    }

    #[test]
    fn tolerance_is_monotone() {
        let t = trace_with_onsets(vec![Some(5), Some(8)]);
        for tol in 0..6 {
            let at = check_simultaneous(&t, tol).pass;
            let above = check_simultaneous(&t, tol + 1).pass;
            assert!(!at || above, "tol {tol}");
        }
    }

    #[test]
    fn csv_export_shape() {
        let mut t = trace_with_onsets(vec![Some(0), None]);
        t.grid = vec![vec![true, false], vec![false, false]];
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("tick,lamp_0,lamp_1"));
        assert_eq!(lines.next(), Some("0,1,0"));
        assert_eq!(lines.next(), Some("1,0,0"));
    }
}
