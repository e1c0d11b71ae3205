//! Column raycaster over a height-mapped tile grid.
//!
//! One ray per column walks the grid with a DDA. Open tiles contribute a
//! riser (the vertical face where the floor steps up) and a floor span;
//! the first wall tile closes the column. Spans are drawn front to back
//! against a shrinking bottom clip, so nearer geometry always wins.
//! Entities are camera-facing billboards resolved per pixel against the
//! depth buffer. Depth everywhere is the horizontal distance along the
//! view axis.

use super::{Pose, TileKind, World, EYE_HEIGHT};
use crate::catalog::label;

/// Distance mapped to depth byte 255.
pub const MAX_DEPTH: f64 = 2048.0;
const NEAR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSettings {
    pub width: usize,
    pub height: usize,
    /// Reserve the bottom eighth of the rows for status bars.
    pub hud: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self { width: 128, height: 72, hud: true }
    }
}

/// HUD bar fill fractions, each clamped to `[0, 1]` when drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HudBars {
    pub health: f64,
    pub weight: f64,
    pub budget: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameSet {
    pub width: usize,
    pub height: usize,
    /// Rows above the HUD strip.
    pub view_height: usize,
    pub rgb: Vec<u8>,
    pub depth: Vec<u8>,
    pub labels: Vec<u8>,
}

impl FrameSet {
    pub fn pixel(&self, col: usize, row: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn depth_at(&self, col: usize, row: usize) -> u8 {
        self.depth[row * self.width + col]
    }

    pub fn label_at(&self, col: usize, row: usize) -> u8 {
        self.labels[row * self.width + col]
    }
}

pub fn quantize_depth(d: f64) -> u8 {
    ((d.clamp(0.0, MAX_DEPTH) / MAX_DEPTH) * 255.0).round() as u8
}

struct Canvas {
    width: usize,
    color: Vec<[u8; 3]>,
    depth: Vec<f32>,
    labels: Vec<u8>,
}

impl Canvas {
    #[inline]
    fn put(&mut self, col: usize, row: usize, color: [u8; 3], depth: f64, label: u8) {
        let i = row * self.width + col;
        self.color[i] = color;
        self.depth[i] = depth as f32;
        self.labels[i] = label;
    }
}

/// Rows whose centers fall in `[lo, hi)`.
#[inline]
fn row_span(lo: f64, hi: f64, rows: usize) -> std::ops::Range<usize> {
    let a = (lo - 0.5).ceil().max(0.0);
    let b = (hi - 0.5).ceil().max(0.0);
    let a = (a as usize).min(rows);
    let b = (b as usize).min(rows);
    a..b.max(a)
}

fn floor_color(kind: TileKind) -> [u8; 3] {
    match kind {
        TileKind::Floor => [110, 100, 84],
        TileKind::Lava => [230, 70, 10],
        TileKind::Acid => [60, 200, 40],
        TileKind::DeliveryZone => [70, 90, 170],
        TileKind::Wall => [128, 128, 128],
    }
}

fn darken(c: [u8; 3], f: f64) -> [u8; 3] {
    [(c[0] as f64 * f) as u8, (c[1] as f64 * f) as u8, (c[2] as f64 * f) as u8]
}

const CEILING_COLOR: [u8; 3] = [48, 48, 56];
const WALL_COLOR_X: [u8; 3] = [150, 150, 150];
const WALL_COLOR_Y: [u8; 3] = [118, 118, 118];

/// Renders the view from `pose`. Pure: the world is only read.
///
/// Panics if `width` or `height` is below 8.
pub fn raycast_render(world: &World, pose: &Pose, settings: &RenderSettings, hud: Option<HudBars>) -> FrameSet {
    let (width, height) = (settings.width, settings.height);
    assert!(width >= 8 && height >= 8, "frame must be at least 8x8, got {width}x{height}");
    let hud_rows = if settings.hud { height / 8 } else { 0 };
    let view_h = height - hud_rows;

    let mut canvas = Canvas {
        width,
        color: vec![[0, 0, 0]; width * height],
        depth: vec![f32::INFINITY; width * height],
        labels: vec![label::BACKGROUND; width * height],
    };

    let grid = &world.grid;
    let s = grid.tile_size();
    let proj = width as f64 / 2.0;
    let eye = pose.z + EYE_HEIGHT;
    let horizon = view_h as f64 / 2.0 + pose.pitch.to_radians().tan() * proj;
    let ceiling = grid.max_ceiling();
    let (sin, cos) = pose.yaw.to_radians().sin_cos();
    let project = |t: f64, h: f64| horizon - (h - eye) * proj / t;

    let px = pose.x / s;
    let py = pose.y / s;
    for col in 0..width {
        let cam = 2.0 * (col as f64 + 0.5) / width as f64 - 1.0;
        let rdx = cos + sin * cam;
        let rdy = sin - cos * cam;

        let mut mx = px.floor() as i64;
        let mut my = py.floor() as i64;
        let ddx = if rdx == 0.0 { f64::INFINITY } else { (1.0 / rdx).abs() };
        let ddy = if rdy == 0.0 { f64::INFINITY } else { (1.0 / rdy).abs() };
        let (step_x, mut side_x) = if rdx < 0.0 { (-1, (px - mx as f64) * ddx) } else { (1, (mx as f64 + 1.0 - px) * ddx) };
        let (step_y, mut side_y) = if rdy < 0.0 { (-1, (py - my as f64) * ddy) } else { (1, (my as f64 + 1.0 - py) * ddy) };

        let mut t_enter = 0.0f64;
        let mut entered_on_x = true;
        let mut ybot = view_h as f64;
        let ytop = 0.0f64;

        loop {
            let near = (t_enter * s).max(NEAR);
            let tile = match grid.tile_at_index(mx, my) {
                Some(t) => *t,
                None => break,
            };
            if tile.is_wall() {
                let yt = project(near, ceiling);
                let color = if entered_on_x { WALL_COLOR_X } else { WALL_COLOR_Y };
                for row in row_span(yt.max(ytop), ybot, view_h) {
                    canvas.put(col, row, color, near, label::BACKGROUND);
                }
                ybot = yt.max(ytop).min(ybot);
                break;
            }

            let t_exit = side_x.min(side_y);
            let far = (t_exit * s).max(NEAR);
            let base = floor_color(tile.kind);

            let ys = project(near, tile.floor_z);
            if ys < ybot {
                let riser = darken(base, 0.7);
                for row in row_span(ys.max(ytop), ybot, view_h) {
                    canvas.put(col, row, riser, near, label::BACKGROUND);
                }
                ybot = ys.max(ytop);
            }
            if tile.floor_z < eye {
                let ye = project(far, tile.floor_z);
                if ye < ybot {
                    let drop = eye - tile.floor_z;
                    for row in row_span(ye.max(ytop), ybot, view_h) {
                        let dy = row as f64 + 0.5 - horizon;
                        let d = if dy > 0.0 { (drop * proj / dy).clamp(near, far) } else { far };
                        canvas.put(col, row, base, d, label::BACKGROUND);
                    }
                    ybot = ye.max(ytop);
                }
            }

            if ybot <= ytop || t_exit * s > MAX_DEPTH {
                break;
            }
            if side_x < side_y {
                t_enter = side_x;
                side_x += ddx;
                mx += step_x;
                entered_on_x = true;
            } else {
                t_enter = side_y;
                side_y += ddy;
                my += step_y;
                entered_on_x = false;
            }
        }

        // Whatever is left above the bottom clip is ceiling or void.
        for row in row_span(ytop, ybot, view_h) {
            let dy = horizon - (row as f64 + 0.5);
            let d = if dy > 0.0 { ((ceiling - eye) * proj / dy).min(MAX_DEPTH) } else { MAX_DEPTH };
            canvas.put(col, row, CEILING_COLOR, d.max(NEAR), label::BACKGROUND);
        }
    }

    for e in world.entities.iter().filter(|e| e.alive) {
        let rx = e.pos.x - pose.x;
        let ry = e.pos.y - pose.y;
        let depth = rx * cos + ry * sin;
        if depth < NEAR {
            continue;
        }
        let lateral = rx * sin - ry * cos;
        let look = e.kind.appearance();
        let cx = proj * (1.0 + lateral / depth);
        let half = 0.5 * look.width * proj / depth;
        let y_bottom = project(depth, e.pos.z);
        let y_top = project(depth, e.pos.z + look.height);
        let c0 = ((cx - half - 0.5).ceil().max(0.0) as usize).min(width);
        let c1 = ((cx + half - 0.5).ceil().max(0.0) as usize).min(width);
        let rows = row_span(y_top, y_bottom, view_h);
        let color = look.color;
        for col in c0..c1 {
            for row in rows.clone() {
                let i = row * width + col;
                if depth < canvas.depth[i] as f64 {
                    canvas.color[i] = color;
                    canvas.depth[i] = depth as f32;
                    canvas.labels[i] = if look.emissive { look.label | 0x80 } else { look.label };
                }
            }
        }
    }

    // Lighting. Emissive pixels carry a marker bit in the label buffer until here.
    let light = if world.night_vision { 1.0 } else { world.brightness.clamp(0.0, 1.0) };
    let mut rgb = Vec::with_capacity(width * height * 3);
    for i in 0..width * view_h {
        let emissive = canvas.labels[i] & 0x80 != 0;
        canvas.labels[i] &= 0x7f;
        let c = canvas.color[i];
        let lit = if emissive { c } else { darken(c, light) };
        let out = if world.night_vision {
            let lum = (0.3 * lit[0] as f64 + 0.59 * lit[1] as f64 + 0.11 * lit[2] as f64).min(255.0);
            [(lum * 0.2) as u8, lum as u8, (lum * 0.2) as u8]
        } else {
            lit
        };
        rgb.extend_from_slice(&out);
    }
    let mut depth: Vec<u8> = canvas.depth[..width * view_h].iter().map(|&d| quantize_depth(d as f64)).collect();
    let mut labels = canvas.labels[..width * view_h].to_vec();

    if hud_rows > 0 {
        let bars = hud.unwrap_or_default();
        let fills = [
            (bars.health, [200, 30, 30]),
            (bars.weight, [220, 200, 40]),
            (bars.budget, [40, 90, 230]),
        ];
        for r in 0..hud_rows {
            let band = (r * fills.len() / hud_rows).min(fills.len() - 1);
            let (frac, color) = fills[band];
            let filled = (frac.clamp(0.0, 1.0) * width as f64).round() as usize;
            for c in 0..width {
                rgb.extend_from_slice(if c < filled { &color } else { &[16, 16, 16] });
            }
        }
        depth.resize(width * height, 0);
        labels.resize(width * height, label::HUD);
    }

    FrameSet { width, height, view_height: view_h, rgb, depth, labels }
}
