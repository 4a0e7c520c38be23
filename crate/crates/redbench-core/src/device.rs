// Devices: ordered block placements relative to an anchor. The unit of
// reference solutions, failure fixtures, and agent submissions.
//
// JSON layout (one file per device):
//   {"name": ..., "anchor": [x,y,z],
//    "placements": [{"offset": [dx,dy,dz], "kind": "wire", "state": {...}}],
//    "expected": {"lit": 10, "total": 32, "note": "..."}}
// State maps use the block-state field names verbatim; kind-specific fields
// that are absent take their defaults (delay 1, facing down, power 0).

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::world::{Block, Pos, World};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub lit: u32,
    pub total: u32,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub offset: Pos,
    pub block: Block,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Device {
    pub name: String,
    pub anchor: Pos,
    pub placements: Vec<Placement>,
    pub expected: Option<Expected>,
}

#[derive(Debug, thiserror::Error)]
pub enum DeviceError {
    #[error("device json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("device json: {0}")]
    Malformed(String),
}

impl Device {
    /// Absolute world positions of every placed lamp, in placement order.
    pub fn lamp_positions(&self) -> Vec<Pos> {
        self.placements
            .iter()
            .filter(|p| matches!(p.block, Block::Lamp { .. }))
            .map(|p| self.absolute(p.offset))
            .collect()
    }

    pub fn absolute(&self, offset: Pos) -> Pos {
        Pos::new(
            self.anchor.x + offset.x,
            self.anchor.y + offset.y,
            self.anchor.z + offset.z,
        )
    }

    /// Load the device into a world with raw (unvalidated) placement: fixture
    /// devices are deliberately allowed to violate support rules.
    pub fn load_into(&self, world: &mut World) -> usize {
        for p in &self.placements {
            world.set_block_raw(self.absolute(p.offset), p.block.clone());
        }
        self.placements.len()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.placements
            .iter()
            .filter(|p| p.block.kind_name() == kind)
            .count()
    }

    pub fn to_json(&self) -> String {
        let placements: Vec<Value> = self
            .placements
            .iter()
            .map(|p| {
                let mut obj = Map::new();
                obj.insert("offset".into(), serde_json::to_value(p.offset).unwrap());
                let mut state = match serde_json::to_value(&p.block).unwrap() {
                    Value::Object(m) => m,
                    _ => Map::new(),
                };
                let kind = state
                    .remove("kind")
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                obj.insert("kind".into(), Value::String(kind));
                obj.insert("state".into(), Value::Object(state));
                Value::Object(obj)
            })
            .collect();
        let mut root = Map::new();
        root.insert("name".into(), Value::String(self.name.clone()));
        root.insert("anchor".into(), serde_json::to_value(self.anchor).unwrap());
        root.insert("placements".into(), Value::Array(placements));
        if let Some(exp) = &self.expected {
            root.insert("expected".into(), serde_json::to_value(exp).unwrap());
        }
        serde_json::to_string_pretty(&Value::Object(root)).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let root: Value = serde_json::from_str(text)?;
        let name = root
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        let anchor: Pos = serde_json::from_value(
            root.get("anchor")
                .cloned()
                .ok_or_else(|| DeviceError::Malformed("missing anchor".into()))?,
        )?;
        let mut placements = Vec::new();
        let list = root
            .get("placements")
            .and_then(Value::as_array)
            .ok_or_else(|| DeviceError::Malformed("missing placements".into()))?;
        for item in list {
            let offset: Pos = serde_json::from_value(
                item.get("offset")
                    .cloned()
                    .ok_or_else(|| DeviceError::Malformed("placement missing offset".into()))?,
            )?;
            let kind = item
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| DeviceError::Malformed("placement missing kind".into()))?;
            let mut state = match item.get("state") {
                Some(Value::Object(m)) => m.clone(),
                None => Map::new(),
                _ => return Err(DeviceError::Malformed("state must be an object".into())),
            };
            state.insert("kind".into(), Value::String(kind.to_string()));
            let block: Block = serde_json::from_value(Value::Object(state))?;
            placements.push(Placement { offset, block });
        }
        let expected = match root.get("expected") {
            Some(v) => Some(serde_json::from_value(v.clone())?),
            None => None,
        };
        Ok(Device {
            name,
            anchor,
            placements,
            expected,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Direction;

    #[test]
    fn json_roundtrip_preserves_device() {
        let dev = Device {
            name: "demo".into(),
            anchor: Pos::new(0, 4, 0),
            placements: vec![
                Placement {
                    offset: Pos::new(0, 0, 0),
                    block: Block::Stone,
                },
                Placement {
                    offset: Pos::new(0, 1, 0),
                    block: Block::button(Direction::Down),
                },
                Placement {
                    offset: Pos::new(1, 0, 0),
                    block: Block::repeater(Direction::East, 3),
                },
            ],
            expected: Some(Expected {
                lit: 1,
                total: 1,
                note: "demo".into(),
            }),
        };
        let text = dev.to_json();
        let back = Device::from_json(&text).unwrap();
        assert_eq!(back, dev);
    }

    #[test]
    fn defaults_fill_missing_state_fields() {
        let text = r#"{
            "name": "d", "anchor": [0, 4, 0],
            "placements": [
                {"offset": [1, 0, 0], "kind": "wire", "state": {}},
                {"offset": [2, 0, 0], "kind": "repeater", "state": {"facing": "east"}}
            ]
        }"#;
        let dev = Device::from_json(text).unwrap();
        assert_eq!(dev.placements[0].block, Block::wire());
        assert_eq!(
            dev.placements[1].block,
            Block::repeater(Direction::East, 1)
        );
    }

    #[test]
    fn load_into_uses_raw_placement() {
        // A button on glass is invalid but fixtures must still load.
        let dev = Device {
            name: "glass".into(),
            anchor: Pos::new(0, 4, 0),
            placements: vec![
                Placement {
                    offset: Pos::new(0, 0, 0),
                    block: Block::Glass,
                },
                Placement {
                    offset: Pos::new(0, 1, 0),
                    block: Block::button(Direction::Down),
                },
            ],
            expected: None,
        };
        let mut w = World::default();
        assert_eq!(dev.load_into(&mut w), 2);
        assert_eq!(w.get_block(Pos::new(0, 4, 0)), Block::Glass);
    }
}
