//! Deterministic synthetic floor plans built by seeded strip packing.
//!
//! Spaces are shuffled, split into 2 or 3 horizontal strips of roughly equal
//! area, and each strip is stretched to the full footprint width so the
//! strips tile a rectangle exactly. Every space with an exterior wall gets
//! one window of 10% of its floor area, centered on its longest exterior
//! segment.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plan::{EnvelopeProperties, FloorPlan, Rect, SiteInfo, Space, WallSide, Window};

/// Smallest admissible side of a space, meters.
pub const MIN_SPACE_DIM: f64 = 1.5;
pub const WINDOW_AREA_RATIO: f64 = 0.10;

const ATTEMPTS: usize = 256;
const SILL: f64 = 0.9;
const MAX_WINDOW_HEIGHT: f64 = 1.5;
/// Windows leave at least this much wall on either side of the segment.
const JAMB_MARGIN: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramSpace {
    pub name: String,
    /// Target floor area, m².
    pub area: f64,
}

/// The list of spaces a plan must contain, plus shared construction defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProgram {
    pub spaces: Vec<ProgramSpace>,
    #[serde(default = "default_ceiling")]
    pub ceiling_height: f64,
    #[serde(default = "default_gain")]
    pub internal_gain: f64,
    #[serde(default)]
    pub envelope: EnvelopeProperties,
    #[serde(default)]
    pub site: SiteInfo,
}

fn default_ceiling() -> f64 {
    2.7
}

fn default_gain() -> f64 {
    4.0
}

impl DesignProgram {
    /// Single-level three-bedroom house: hall, corridor, kitchen, living
    /// room, dining room, two bathrooms and three bedrooms.
    pub fn three_bedroom_house() -> Self {
        let spaces = [
            ("hall", 6.0),
            ("corridor", 8.0),
            ("kitchen", 12.0),
            ("living room", 22.0),
            ("dining room", 14.0),
            ("bathroom 1", 5.0),
            ("bathroom 2", 5.0),
            ("bedroom 1", 14.0),
            ("bedroom 2", 12.0),
            ("bedroom 3", 11.0),
        ]
        .into_iter()
        .map(|(name, area)| ProgramSpace {
            name: name.to_string(),
            area,
        })
        .collect();
        Self {
            spaces,
            ceiling_height: default_ceiling(),
            internal_gain: default_gain(),
            envelope: EnvelopeProperties::default(),
            site: SiteInfo::default(),
        }
    }

    pub fn total_area(&self) -> f64 {
        self.spaces.iter().map(|s| s.area).sum()
    }
}

impl Default for DesignProgram {
    fn default() -> Self {
        Self::three_bedroom_house()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenerateError {
    #[error("infeasible program: {0}")]
    InfeasibleProgram(String),
}

/// `count` plans from consecutive seeds `seed, seed + 1, …`.
pub fn generate_plan_set(seed: u64, count: usize, program: &DesignProgram) -> Result<Vec<FloorPlan>, GenerateError> {
    (0..count as u64).map(|i| generate_synthetic_plan(seed + i, program)).collect()
}

/// Builds a valid plan from `program`, fully determined by `seed`.
pub fn generate_synthetic_plan(seed: u64, program: &DesignProgram) -> Result<FloorPlan, GenerateError> {
    if program.spaces.is_empty() {
        return Err(GenerateError::InfeasibleProgram("no spaces".into()));
    }
    if let Some(bad) = program.spaces.iter().find(|s| !(s.area.is_finite() && s.area > 0.0)) {
        return Err(GenerateError::InfeasibleProgram(format!("space {} has non-positive area", bad.name)));
    }
    if program.ceiling_height <= SILL + 0.3 {
        return Err(GenerateError::InfeasibleProgram("ceiling too low for windows".into()));
    }
    let smallest = program.spaces.iter().map(|s| s.area).fold(f64::INFINITY, f64::min);
    if smallest < MIN_SPACE_DIM * MIN_SPACE_DIM {
        return Err(GenerateError::InfeasibleProgram(format!(
            "space smaller than {MIN_SPACE_DIM} x {MIN_SPACE_DIM} m"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orientation = rng.gen_range(0..360) as f64;
    let total = program.total_area();
    for _ in 0..ATTEMPTS {
        let mut order: Vec<usize> = (0..program.spaces.len()).collect();
        order.shuffle(&mut rng);
        let strips = if program.spaces.len() < 3 { 1 } else { rng.gen_range(2..=3usize) };
        let aspect: f64 = rng.gen_range(1.2..3.5);
        let depth = (total / aspect).sqrt();
        let width = total / depth;
        if let Some(spaces) = pack(program, &order, strips, width) {
            let mut plan = FloorPlan {
                id: format!("seed-{seed}"),
                orientation_deg: orientation,
                site: program.site,
                envelope: program.envelope,
                spaces,
            };
            if place_windows(&mut plan) {
                return Ok(plan);
            }
        }
    }
    Err(GenerateError::InfeasibleProgram(format!(
        "no strip packing with sides of at least {MIN_SPACE_DIM} m after {ATTEMPTS} attempts"
    )))
}

fn pack(program: &DesignProgram, order: &[usize], strips: usize, width: f64) -> Option<Vec<Space>> {
    let total = program.total_area();
    let target = total / strips as f64;

    // Greedy split into consecutive runs of roughly `target` area each.
    let mut rows: Vec<Vec<usize>> = vec![Vec::new()];
    let mut acc = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let a = program.spaces[i].area;
        let remaining_items = order.len() - k;
        let rows_left = strips - rows.len();
        let current_nonempty = !rows.last().unwrap().is_empty();
        let close_row = current_nonempty
            && rows_left > 0
            && (acc + a / 2.0 > target * rows.len() as f64 || remaining_items <= rows_left);
        if close_row {
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push(i);
        acc += a;
    }
    if rows.len() != strips || rows.iter().any(Vec::is_empty) {
        return None;
    }

    let mut spaces = vec![None; program.spaces.len()];
    let mut y = 0.0;
    for row in &rows {
        let row_area: f64 = row.iter().map(|&i| program.spaces[i].area).sum();
        let h = row_area / width;
        if h < MIN_SPACE_DIM {
            return None;
        }
        let mut x = 0.0;
        for (k, &i) in row.iter().enumerate() {
            let p = &program.spaces[i];
            // last space absorbs rounding so the row closes exactly
            let w = if k + 1 == row.len() { width - x } else { p.area / h };
            if w < MIN_SPACE_DIM {
                return None;
            }
            spaces[i] = Some(Space {
                name: p.name.clone(),
                rect: Rect::new(x, y, w, h),
                ceiling_height: program.ceiling_height,
                internal_gain: program.internal_gain,
                windows: Vec::new(),
            });
            x += w;
        }
        y += h;
    }
    spaces.into_iter().collect()
}

/// Adds the 10%-area window to every space with exterior wall. Returns
/// false when some window cannot fit its longest exterior segment.
fn place_windows(plan: &mut FloorPlan) -> bool {
    for i in 0..plan.spaces.len() {
        let mut best: Option<(WallSide, f64, f64)> = None;
        for side in WallSide::ALL {
            for (a, b) in plan.exterior_segments(i, side) {
                if best.is_none_or(|(_, ba, bb)| b - a > bb - ba + 1e-9) {
                    best = Some((side, a, b));
                }
            }
        }
        let Some((side, a, b)) = best else {
            continue;
        };
        let space = &plan.spaces[i];
        let area = WINDOW_AREA_RATIO * space.floor_area();
        let usable = (b - a) - 2.0 * JAMB_MARGIN;
        let max_height = MAX_WINDOW_HEIGHT.min(space.ceiling_height - SILL);
        let mut height = area.sqrt().min(max_height);
        let mut width = area / height;
        if width > usable {
            width = usable;
            height = area / width;
        }
        if usable <= 0.0 || height > max_height + 1e-12 {
            return false;
        }
        let offset = a + ((b - a) - width) / 2.0;
        plan.spaces[i].windows.push(Window {
            wall_side: side,
            offset,
            width,
            height,
            sill: SILL,
            overhang: None,
            fins: None,
        });
    }
    true
}
