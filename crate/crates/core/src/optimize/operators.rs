//! Design-variable operators. Each is a deterministic local search over one
//! family of variables that only accepts changes which do not raise the
//! penalty, and only ever evaluates plans that pass validation.

use thiserror::Error;

use super::descent::{orient_descend, OrientDescentConfig};
use super::objective::{EvalError, Objective};
use super::trace::{OperatorTrace, StepRecord};
use crate::generate::MIN_SPACE_DIM;
use crate::plan::{validate_plan, FinPair, FloorPlan, Overhang, WallSide};

/// Window slide per move, meters.
pub const WINDOW_SLIDE: f64 = 0.2;
pub const WINDOW_SCALES: [f64; 2] = [0.9, 1.1];
/// Window area bounds as fractions of the floor area.
pub const WINDOW_AREA_BOUNDS: (f64, f64) = (0.05, 0.40);
/// Wall translation per move, meters.
pub const WALL_SHIFT: f64 = 0.1;
/// Floor area a space may reach under wall translation, as fractions of its
/// area when the operator starts.
pub const SPACE_AREA_BOUNDS: (f64, f64) = (0.9, 1.1);
pub const SHADING_DEPTHS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Error)]
#[error("{} operator failed: {source}", partial.operator_name)]
pub struct OperatorError {
    pub source: EvalError,
    pub partial: Box<OperatorTrace>,
}

/// Bookkeeping shared by the greedy operators.
struct Search<'a, O: Objective + ?Sized> {
    objective: &'a O,
    plan: FloorPlan,
    penalty: f64,
    trace: OperatorTrace,
}

impl<'a, O: Objective + ?Sized> Search<'a, O> {
    fn start(name: &str, plan: &FloorPlan, objective: &'a O) -> Result<Self, OperatorError> {
        let mut trace = OperatorTrace::new(name);
        let penalty = objective.penalty(plan).map_err(|source| OperatorError {
            source,
            partial: Box::new(trace.clone()),
        })?;
        trace.evaluations_used = 1;
        trace.penalty_before = penalty;
        trace.penalty_after = penalty;
        Ok(Self {
            objective,
            plan: plan.clone(),
            penalty,
            trace,
        })
    }

    fn evaluate(&mut self, candidate: &FloorPlan) -> Result<f64, OperatorError> {
        match self.objective.penalty(candidate) {
            Ok(p) => {
                self.trace.evaluations_used += 1;
                Ok(p)
            }
            Err(source) => {
                self.trace.penalty_after = self.penalty;
                Err(OperatorError {
                    source,
                    partial: Box::new(self.trace.clone()),
                })
            }
        }
    }

    /// Evaluates `candidate` and adopts it on strict improvement. Invalid
    /// candidates are skipped without evaluation.
    fn try_improve(&mut self, subject: String, value: f64, candidate: FloorPlan) -> Result<bool, OperatorError> {
        if !validate_plan(&candidate).is_empty() {
            return Ok(false);
        }
        let p = self.evaluate(&candidate)?;
        let accepted = p < self.penalty;
        self.trace.steps.push(StepRecord {
            subject,
            value,
            penalty: p,
            accepted,
        });
        if accepted {
            self.plan = candidate;
            self.penalty = p;
            self.trace.moves_accepted += 1;
        }
        Ok(accepted)
    }

    fn finish(mut self) -> (FloorPlan, OperatorTrace) {
        self.trace.penalty_after = self.penalty;
        (self.plan, self.trace)
    }
}

fn window_indices(plan: &FloorPlan) -> Vec<(usize, usize)> {
    plan.spaces
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (0..s.windows.len()).map(move |k| (i, k)))
        .collect()
}

/// Repeats moves in one direction while they improve. The first move tries
/// both directions; later moves keep the accepted one, since reversing just
/// returns to the previous (worse) state.
fn slide_until_stuck<O, F>(search: &mut Search<'_, O>, deltas: [f64; 2], mut make: F) -> Result<(), OperatorError>
where
    O: Objective + ?Sized,
    F: FnMut(&FloorPlan, f64) -> Option<(String, f64, FloorPlan)>,
{
    let mut direction: Option<f64> = None;
    loop {
        let tries: Vec<f64> = match direction {
            Some(d) => vec![d],
            None => deltas.to_vec(),
        };
        let mut improved = false;
        for d in tries {
            let Some((subject, value, candidate)) = make(&search.plan, d) else {
                continue;
            };
            if search.try_improve(subject, value, candidate)? {
                direction = Some(d);
                improved = true;
                break;
            }
        }
        if !improved {
            return Ok(());
        }
    }
}

/// Slides each window along its exterior wall segment in steps of
/// [`WINDOW_SLIDE`], clamped to the segment.
pub fn window_translate_op<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let mut search = Search::start("window_translation", plan, objective)?;
    for (i, k) in window_indices(plan) {
        slide_until_stuck(&mut search, [WINDOW_SLIDE, -WINDOW_SLIDE], |p, d| {
            let w = &p.spaces[i].windows[k];
            let (a, b) = p.containing_segment(i, w.wall_side, w.offset, w.offset + w.width)?;
            let offset = (w.offset + d).clamp(a, (b - w.width).max(a));
            if (offset - w.offset).abs() < 1e-9 {
                return None;
            }
            let mut c = p.clone();
            c.spaces[i].windows[k].offset = offset;
            Some((format!("{}/{k} offset", p.spaces[i].name), offset, c))
        })?;
    }
    Ok(search.finish())
}

/// Scales each window's area by the factors in [`WINDOW_SCALES`], keeping
/// its aspect ratio and center, with the area clamped to
/// [`WINDOW_AREA_BOUNDS`] of the floor area.
pub fn window_dimension_op<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let mut search = Search::start("window_dimensioning", plan, objective)?;
    for (i, k) in window_indices(plan) {
        slide_until_stuck(&mut search, WINDOW_SCALES, |p, factor| {
            let space = &p.spaces[i];
            let w = &space.windows[k];
            let (lo, hi) = WINDOW_AREA_BOUNDS;
            let area = w.area();
            let target = (area * factor).clamp(lo * space.floor_area(), hi * space.floor_area());
            if (target - area).abs() < 1e-9 {
                return None;
            }
            let s = (target / area).sqrt();
            let (width, height) = (w.width * s, w.height * s);
            let (a, b) = p.containing_segment(i, w.wall_side, w.offset, w.offset + w.width)?;
            if width > b - a || w.sill + height > space.ceiling_height {
                return None;
            }
            let center = w.offset + w.width / 2.0;
            let offset = (center - width / 2.0).clamp(a, b - width);
            let mut c = p.clone();
            let cw = &mut c.spaces[i].windows[k];
            cw.width = width;
            cw.height = height;
            cw.offset = offset;
            Some((format!("{}/{k} area", space.name), target, c))
        })?;
    }
    Ok(search.finish())
}

/// Moves one side of a space by `d` meters (positive outward), keeping the
/// absolute position of windows on the adjacent walls.
fn shift_side(plan: &FloorPlan, i: usize, side: WallSide, d: f64) -> FloorPlan {
    let mut c = plan.clone();
    let space = &mut c.spaces[i];
    match side {
        WallSide::North => space.rect.h += d,
        WallSide::East => space.rect.w += d,
        WallSide::South => {
            space.rect.y -= d;
            space.rect.h += d;
        }
        WallSide::West => {
            space.rect.x -= d;
            space.rect.w += d;
        }
    }
    let shifted_walls: &[WallSide] = match side {
        WallSide::South => &[WallSide::East, WallSide::West],
        WallSide::West => &[WallSide::North, WallSide::South],
        _ => &[],
    };
    for w in space.windows.iter_mut().filter(|w| shifted_walls.contains(&w.wall_side)) {
        w.offset += d;
    }
    c
}

/// Translates fully exterior sides of each space by ±[`WALL_SHIFT`],
/// never letting a space shrink below [`MIN_SPACE_DIM`] or leave
/// [`SPACE_AREA_BOUNDS`].
pub fn wall_translate_op<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let mut search = Search::start("wall_translation", plan, objective)?;
    for i in 0..plan.spaces.len() {
        let base_area = plan.spaces[i].floor_area();
        let (lo, hi) = (SPACE_AREA_BOUNDS.0 * base_area - 1e-9, SPACE_AREA_BOUNDS.1 * base_area + 1e-9);
        for side in WallSide::ALL {
            slide_until_stuck(&mut search, [WALL_SHIFT, -WALL_SHIFT], |p, d| {
                if !p.side_fully_exterior(i, side) {
                    return None;
                }
                let rect = p.spaces[i].rect;
                let new_dim = match side {
                    WallSide::North | WallSide::South => rect.h + d,
                    WallSide::East | WallSide::West => rect.w + d,
                };
                if d < 0.0 && new_dim < MIN_SPACE_DIM - 1e-9 {
                    return None;
                }
                let new_area = rect.area() + d * (rect.w + rect.h - new_dim);
                if !(lo..=hi).contains(&new_area) {
                    return None;
                }
                Some((format!("{}/{side} wall", p.spaces[i].name), d, shift_side(p, i, side, d)))
            })?;
        }
    }
    Ok(search.finish())
}

/// Picks the best of `candidates` for one variable. The current value is
/// kept unless a candidate is strictly better; equal penalties go to the
/// smaller value.
fn choose_depth<O, F>(search: &mut Search<'_, O>, subject: String, current: f64, mut build: F) -> Result<(), OperatorError>
where
    O: Objective + ?Sized,
    F: FnMut(&FloorPlan, f64) -> FloorPlan,
{
    let mut evaluated: Vec<(f64, f64, FloorPlan)> = Vec::with_capacity(SHADING_DEPTHS.len());
    for &depth in &SHADING_DEPTHS {
        if (depth - current).abs() < 1e-9 {
            evaluated.push((depth, search.penalty, search.plan.clone()));
            continue;
        }
        let candidate = build(&search.plan, depth);
        if !validate_plan(&candidate).is_empty() {
            continue;
        }
        let p = search.evaluate(&candidate)?;
        evaluated.push((depth, p, candidate));
    }
    let mut best: Option<usize> = None;
    for (n, (_, p, _)) in evaluated.iter().enumerate() {
        if best.is_none_or(|b| *p < evaluated[b].1) {
            best = Some(n);
        }
    }
    let Some(b) = best else {
        return Ok(());
    };
    let keep_current = evaluated[b].1 > search.penalty
        || (evaluated[b].1 == search.penalty && current <= evaluated[b].0);
    for (depth, p, _) in &evaluated {
        if (depth - current).abs() >= 1e-9 {
            search.trace.steps.push(StepRecord {
                subject: subject.clone(),
                value: *depth,
                penalty: *p,
                accepted: !keep_current && *depth == evaluated[b].0,
            });
        }
    }
    if !keep_current {
        let (_, p, plan) = evaluated.swap_remove(b);
        search.plan = plan;
        search.penalty = p;
        search.trace.moves_accepted += 1;
    }
    Ok(())
}

/// Chooses each window's overhang depth from [`SHADING_DEPTHS`].
pub fn overhang_op<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let mut search = Search::start("overhang", plan, objective)?;
    for (i, k) in window_indices(plan) {
        let current = search.plan.spaces[i].windows[k].overhang_depth();
        let subject = format!("{}/{k} overhang", plan.spaces[i].name);
        choose_depth(&mut search, subject, current, |p, depth| {
            let mut c = p.clone();
            c.spaces[i].windows[k].overhang = (depth > 0.0).then_some(Overhang { depth });
            c
        })?;
    }
    Ok(search.finish())
}

/// Chooses each window's fin depths from [`SHADING_DEPTHS`], left jamb
/// first with the right held fixed, then the right jamb.
pub fn fin_op<O: Objective + ?Sized>(plan: &FloorPlan, objective: &O) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let mut search = Search::start("fins", plan, objective)?;
    for (i, k) in window_indices(plan) {
        for left in [true, false] {
            let fins = search.plan.spaces[i].windows[k].fins.unwrap_or(FinPair {
                left_depth: 0.0,
                right_depth: 0.0,
            });
            let current = if left { fins.left_depth } else { fins.right_depth };
            let jamb = if left { "left" } else { "right" };
            let subject = format!("{}/{k} {jamb} fin", plan.spaces[i].name);
            choose_depth(&mut search, subject, current, |p, depth| {
                let mut c = p.clone();
                let w = &mut c.spaces[i].windows[k];
                let mut f = w.fins.unwrap_or(FinPair {
                    left_depth: 0.0,
                    right_depth: 0.0,
                });
                if left {
                    f.left_depth = depth;
                } else {
                    f.right_depth = depth;
                }
                w.fins = (f.left_depth > 0.0 || f.right_depth > 0.0).then_some(f);
                c
            })?;
        }
    }
    Ok(search.finish())
}

/// Runs the orientation descent on a plan. The plan's orientation is
/// rounded to a whole degree to start.
pub fn orientation_op<O: Objective + ?Sized>(
    plan: &FloorPlan,
    objective: &O,
    cfg: &OrientDescentConfig,
) -> Result<(FloorPlan, OperatorTrace), OperatorError> {
    let start = (plan.orientation_deg.round() as i64).rem_euclid(360) as u16;
    let out = orient_descend(start, cfg, |angle| objective.penalty(&plan.with_orientation(angle as f64))).map_err(|e| OperatorError {
        source: e.source,
        partial: e.partial,
    })?;
    Ok((plan.with_orientation(out.best_angle as f64), out.trace))
}
