//! Floor-plan geometry: spaces as axis-aligned rectangles in a local plan
//! frame, windows on exterior wall segments, and a single rigid orientation.
//!
//! Plan frame: `+x` points to plan-east, `+y` to plan-north. A window's
//! `offset` is measured along its wall from the wall start, which is the
//! lower coordinate of the wall (west end for north/south walls, south end
//! for east/west walls).

use std::fmt;

use serde::{Deserialize, Serialize};

/// Geometric comparisons tolerate this much slack (meters).
pub const GEOM_EPS: f64 = 1e-9;

/// Site coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteInfo {
    pub latitude: f64,
    pub longitude: f64,
    pub elevation: f64,
}

impl SiteInfo {
    /// Coimbra, Portugal.
    pub const COIMBRA: SiteInfo = SiteInfo {
        latitude: 40.2,
        longitude: -8.4,
        elevation: 75.0,
    };
}

impl Default for SiteInfo {
    fn default() -> Self {
        Self::COIMBRA
    }
}

/// Envelope thermal properties shared by every space of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProperties {
    /// Exterior wall U-value, W/m²K.
    pub wall_u: f64,
    /// Window U-value, W/m²K.
    pub window_u: f64,
    /// Window solar heat gain coefficient, in (0, 1].
    pub shgc: f64,
    /// Effective capacitance multiplier applied to the air volume, ≥ 1.
    pub capacitance_multiplier: f64,
}

impl Default for EnvelopeProperties {
    fn default() -> Self {
        Self {
            wall_u: 0.7,
            window_u: 2.8,
            shgc: 0.7,
            capacitance_multiplier: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn top(&self) -> f64 {
        self.y + self.h
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        let dx = self.right().min(other.right()) - self.x.max(other.x);
        let dy = self.top().min(other.top()) - self.y.max(other.y);
        dx > GEOM_EPS && dy > GEOM_EPS
    }

    /// Length of the given side.
    pub fn side_length(&self, side: WallSide) -> f64 {
        match side {
            WallSide::North | WallSide::South => self.w,
            WallSide::East | WallSide::West => self.h,
        }
    }
}

/// Side of a space rectangle in the unrotated plan frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    North,
    East,
    South,
    West,
}

impl WallSide {
    pub const ALL: [WallSide; 4] = [WallSide::North, WallSide::East, WallSide::South, WallSide::West];

    /// Azimuth of the outward normal at orientation 0, clockwise from north.
    pub fn base_azimuth(self) -> f64 {
        match self {
            WallSide::North => 0.0,
            WallSide::East => 90.0,
            WallSide::South => 180.0,
            WallSide::West => 270.0,
        }
    }

    pub fn opposite(self) -> WallSide {
        match self {
            WallSide::North => WallSide::South,
            WallSide::East => WallSide::West,
            WallSide::South => WallSide::North,
            WallSide::West => WallSide::East,
        }
    }
}

impl fmt::Display for WallSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WallSide::North => "north",
            WallSide::East => "east",
            WallSide::South => "south",
            WallSide::West => "west",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Overhang {
    pub depth: f64,
}

/// Vertical projections at the window jambs. Left and right are as seen
/// from outside, facing the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinPair {
    #[serde(rename = "left")]
    pub left_depth: f64,
    #[serde(rename = "right")]
    pub right_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub wall_side: WallSide,
    pub offset: f64,
    pub width: f64,
    pub height: f64,
    pub sill: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overhang: Option<Overhang>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fins: Option<FinPair>,
}

impl Window {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn overhang_depth(&self) -> f64 {
        self.overhang.map_or(0.0, |o| o.depth)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub name: String,
    pub rect: Rect,
    pub ceiling_height: f64,
    /// Internal gains, W/m² of floor area.
    pub internal_gain: f64,
    #[serde(default)]
    pub windows: Vec<Window>,
}

impl Space {
    pub fn floor_area(&self) -> f64 {
        self.rect.area()
    }

    pub fn volume(&self) -> f64 {
        self.rect.area() * self.ceiling_height
    }

    pub fn window_area(&self) -> f64 {
        self.windows.iter().map(Window::area).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub id: String,
    pub orientation_deg: f64,
    pub site: SiteInfo,
    pub envelope: EnvelopeProperties,
    pub spaces: Vec<Space>,
}

impl FloorPlan {
    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization is infallible")
    }

    /// Copy of the plan rotated to `angle` (normalized to [0, 360)).
    pub fn with_orientation(&self, angle: f64) -> FloorPlan {
        let mut p = self.clone();
        p.orientation_deg = normalize_deg(angle);
        p
    }

    pub fn window_count(&self) -> usize {
        self.spaces.iter().map(|s| s.windows.len()).sum()
    }

    /// Intervals `(start, end)` along `side` of space `idx` that are not in
    /// contact with any other space, in wall coordinates.
    pub fn exterior_segments(&self, idx: usize, side: WallSide) -> Vec<(f64, f64)> {
        let rect = self.spaces[idx].rect;
        let len = rect.side_length(side);
        let mut covered: Vec<(f64, f64)> = Vec::new();
        for (j, other) in self.spaces.iter().enumerate() {
            if j == idx {
                continue;
            }
            if let Some(iv) = contact_interval(&rect, side, &other.rect) {
                covered.push(iv);
            }
        }
        subtract_intervals((0.0, len), covered)
    }

    /// Total exterior length of the given side.
    pub fn exterior_length(&self, idx: usize, side: WallSide) -> f64 {
        self.exterior_segments(idx, side).iter().map(|(a, b)| b - a).sum()
    }

    /// True when the whole side faces the exterior.
    pub fn side_fully_exterior(&self, idx: usize, side: WallSide) -> bool {
        let len = self.spaces[idx].rect.side_length(side);
        let segs = self.exterior_segments(idx, side);
        segs.len() == 1 && segs[0].0 <= GEOM_EPS && segs[0].1 >= len - GEOM_EPS
    }

    /// The exterior segment wholly containing `[start, end]`, if any.
    pub fn containing_segment(&self, idx: usize, side: WallSide, start: f64, end: f64) -> Option<(f64, f64)> {
        self.exterior_segments(idx, side)
            .into_iter()
            .find(|&(a, b)| start >= a - GEOM_EPS && end <= b + GEOM_EPS)
    }
}

/// Normalizes an angle in degrees to [0, 360).
pub fn normalize_deg(angle: f64) -> f64 {
    let a = angle.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

/// Azimuth of the window's outward facade normal, clockwise from true north.
pub fn facade_azimuth(window: &Window, plan: &FloorPlan) -> f64 {
    side_azimuth(window.wall_side, plan.orientation_deg)
}

pub fn side_azimuth(side: WallSide, orientation_deg: f64) -> f64 {
    normalize_deg(side.base_azimuth() + orientation_deg)
}

/// Overlap along `side` of `rect` with `other`, when `other` sits flush
/// against that side. Returned in `rect`'s wall coordinates.
fn contact_interval(rect: &Rect, side: WallSide, other: &Rect) -> Option<(f64, f64)> {
    let (line, other_line, lo, hi, olo, ohi, origin) = match side {
        WallSide::North => (rect.top(), other.y, rect.x, rect.right(), other.x, other.right(), rect.x),
        WallSide::South => (rect.y, other.top(), rect.x, rect.right(), other.x, other.right(), rect.x),
        WallSide::East => (rect.right(), other.x, rect.y, rect.top(), other.y, other.top(), rect.y),
        WallSide::West => (rect.x, other.right(), rect.y, rect.top(), other.y, other.top(), rect.y),
    };
    if (line - other_line).abs() > 1e-6 {
        return None;
    }
    let a = lo.max(olo);
    let b = hi.min(ohi);
    (b - a > GEOM_EPS).then_some((a - origin, b - origin))
}

fn subtract_intervals(whole: (f64, f64), mut cuts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut cursor = whole.0;
    for (a, b) in cuts {
        if a > cursor + GEOM_EPS {
            out.push((cursor, a.min(whole.1)));
        }
        cursor = cursor.max(b);
        if cursor >= whole.1 {
            break;
        }
    }
    if whole.1 > cursor + GEOM_EPS {
        out.push((cursor, whole.1));
    }
    out
}

/// A single violated plan invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub space: Option<String>,
    pub window: Option<usize>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    OrientationOutOfRange,
    NoSpaces,
    EnvelopeInvalid(&'static str),
    NonPositiveDimension,
    NegativeInternalGain,
    Overlap(String),
    NonPositiveWindowSize,
    NegativeSill,
    WindowExceedsWall,
    WindowExceedsCeiling,
    WindowNotOnExteriorWall,
    WindowsExceedWall,
    NegativeShadingDepth,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::OrientationOutOfRange => f.write_str("orientation out of range"),
            ViolationKind::NoSpaces => f.write_str("plan has no spaces"),
            ViolationKind::EnvelopeInvalid(field) => write!(f, "envelope {field} out of range"),
            ViolationKind::NonPositiveDimension => f.write_str("space dimension not positive"),
            ViolationKind::NegativeInternalGain => f.write_str("internal gain negative"),
            ViolationKind::Overlap(other) => write!(f, "space overlaps {other}"),
            ViolationKind::NonPositiveWindowSize => f.write_str("window size not positive"),
            ViolationKind::NegativeSill => f.write_str("window sill negative"),
            ViolationKind::WindowExceedsWall => f.write_str("window exceeds wall"),
            ViolationKind::WindowExceedsCeiling => f.write_str("window exceeds ceiling"),
            ViolationKind::WindowNotOnExteriorWall => f.write_str("window not on exterior wall"),
            ViolationKind::WindowsExceedWall => f.write_str("windows exceed wall length"),
            ViolationKind::NegativeShadingDepth => f.write_str("shading depth negative"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.space, self.window) {
            (Some(s), Some(w)) => write!(f, "{s} window {w}: {}", self.kind),
            (Some(s), None) => write!(f, "{s}: {}", self.kind),
            _ => write!(f, "{}", self.kind),
        }
    }
}

/// Checks every plan invariant. An empty result means the plan is valid.
/// Plan-level violations come first, then per space ordered by name and
/// window index.
pub fn validate_plan(plan: &FloorPlan) -> Vec<Violation> {
    let mut out = Vec::new();
    let plan_level = |kind| Violation {
        space: None,
        window: None,
        kind,
    };

    let o = plan.orientation_deg;
    if !o.is_finite() || !(0.0..360.0).contains(&o) {
        out.push(plan_level(ViolationKind::OrientationOutOfRange));
    }
    if plan.spaces.is_empty() {
        out.push(plan_level(ViolationKind::NoSpaces));
    }
    let env = &plan.envelope;
    if !(env.wall_u.is_finite() && env.wall_u >= 0.0) {
        out.push(plan_level(ViolationKind::EnvelopeInvalid("wall_u")));
    }
    if !(env.window_u.is_finite() && env.window_u >= 0.0) {
        out.push(plan_level(ViolationKind::EnvelopeInvalid("window_u")));
    }
    if !(env.shgc > 0.0 && env.shgc <= 1.0) {
        out.push(plan_level(ViolationKind::EnvelopeInvalid("shgc")));
    }
    if !(env.capacitance_multiplier.is_finite() && env.capacitance_multiplier >= 1.0) {
        out.push(plan_level(ViolationKind::EnvelopeInvalid("capacitance_multiplier")));
    }

    let mut order: Vec<usize> = (0..plan.spaces.len()).collect();
    order.sort_by(|&a, &b| plan.spaces[a].name.cmp(&plan.spaces[b].name).then(a.cmp(&b)));

    for (pos, &i) in order.iter().enumerate() {
        let space = &plan.spaces[i];
        let at_space = |kind| Violation {
            space: Some(space.name.clone()),
            window: None,
            kind,
        };
        let r = &space.rect;
        let dims_ok = [r.x, r.y, r.w, r.h, space.ceiling_height].iter().all(|v| v.is_finite())
            && r.w > 0.0
            && r.h > 0.0
            && space.ceiling_height > 0.0;
        if !dims_ok {
            out.push(at_space(ViolationKind::NonPositiveDimension));
            continue;
        }
        if !(space.internal_gain >= 0.0) {
            out.push(at_space(ViolationKind::NegativeInternalGain));
        }
        for &j in &order[pos + 1..] {
            let other = &plan.spaces[j];
            if r.overlaps(&other.rect) {
                out.push(at_space(ViolationKind::Overlap(other.name.clone())));
            }
        }

        for side in WallSide::ALL {
            let on_side: f64 = space.windows.iter().filter(|w| w.wall_side == side).map(|w| w.width).sum();
            if on_side > r.side_length(side) + GEOM_EPS {
                out.push(at_space(ViolationKind::WindowsExceedWall));
            }
        }

        for (k, w) in space.windows.iter().enumerate() {
            let at_window = |kind| Violation {
                space: Some(space.name.clone()),
                window: Some(k),
                kind,
            };
            if !(w.width > 0.0 && w.height > 0.0) || !w.offset.is_finite() {
                out.push(at_window(ViolationKind::NonPositiveWindowSize));
                continue;
            }
            if !(w.sill >= 0.0) {
                out.push(at_window(ViolationKind::NegativeSill));
            }
            if w.offset < -GEOM_EPS || w.offset + w.width > r.side_length(w.wall_side) + GEOM_EPS {
                out.push(at_window(ViolationKind::WindowExceedsWall));
            } else if plan.containing_segment(i, w.wall_side, w.offset, w.offset + w.width).is_none() {
                out.push(at_window(ViolationKind::WindowNotOnExteriorWall));
            }
            if w.sill + w.height > space.ceiling_height + GEOM_EPS {
                out.push(at_window(ViolationKind::WindowExceedsCeiling));
            }
            let bad_overhang = w.overhang.is_some_and(|o| !(o.depth >= 0.0));
            let bad_fins = w.fins.is_some_and(|f| !(f.left_depth >= 0.0 && f.right_depth >= 0.0));
            if bad_overhang || bad_fins {
                out.push(at_window(ViolationKind::NegativeShadingDepth));
            }
        }
    }
    out
}
