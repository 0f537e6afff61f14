//! Deterministic SVG output: fixed view boxes, fixed colors, fixed number
//! formatting, no timestamps.

use std::fmt::Write as _;

use crate::geometry::{ConvexPolytope, Direction, Pose, Vec2, VehicleGeometry};
use crate::grid::ValueField;
use crate::path::ContinuityReport;
use crate::safe_set::{ConnectedState, SafetyMask};

use super::trial::{Algorithm, Outcome, TrialRecord};

const OBSTACLE: &str = "#9e9e9e";
const SET: &str = "#b3d9ff";
const SAMPLE: &str = "#d62728";
const PATH_FWD: &str = "#1f77b4";
const PATH_BWD: &str = "#ff7f0e";
const CUSP: &str = "#2ca02c";
const GOAL: &str = "#1f3fbf";

/// Pixels per meter in scene drawings.
const SCALE: f64 = 20.0;

fn header(s: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.0} {h:.0}" width="{w:.0}" height="{h:.0}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="white"/>"#);
}

/// Everything a scene drawing can show. Unset parts are skipped.
#[derive(Clone, Copy, Debug, Default)]
pub struct Scene<'a> {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub obstacles: &'a [ConvexPolytope],
    /// Tube and safety mask; cells of S are projected onto the plane.
    pub set: Option<(&'a ValueField, &'a SafetyMask)>,
    pub connected: &'a [ConnectedState],
    pub path: &'a [(Pose, Direction)],
    pub start: Option<Pose>,
    pub goal: Option<Pose>,
    pub vehicle: Option<VehicleGeometry>,
}

struct Frame {
    x0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, p: Vec2) -> (f64, f64) {
        ((p.x - self.x0) * SCALE, (self.y1 - p.y) * SCALE)
    }
}

fn polygon(s: &mut String, f: &Frame, pts: &[Vec2], style: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = f.px(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(s, r#"<polygon points="{}" {style}/>"#, coords.join(" "));
}

fn arrow(s: &mut String, f: &Frame, p: &Pose, len: f64, color: &str) {
    let (x0, y0) = f.px(p.position());
    let (x1, y1) = f.px(p.position() + Vec2::new(p.theta.cos(), p.theta.sin()) * len);
    let _ = writeln!(
        s,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{color}" stroke-width="1.5"/>"#
    );
    let _ = writeln!(s, r#"<circle cx="{x0:.2}" cy="{y0:.2}" r="3" fill="{color}"/>"#);
}

/// Top-down drawing of a scenario with optional set projection, connected
/// states, path and cusps.
pub fn scene_svg(scene: &Scene) -> String {
    let (x0, x1) = scene.x_range;
    let (y0, y1) = scene.y_range;
    let f = Frame { x0, y1 };
    let mut s = String::new();
    header(&mut s, (x1 - x0) * SCALE, (y1 - y0) * SCALE);

    if let Some((field, mask)) = scene.set {
        let g = &field.grid;
        let (dx, dy) = (g.spacing(0), g.spacing(1));
        for i in 0..g.n[0] {
            for j in 0..g.n[1] {
                let inside = (0..g.n[2]).any(|k| {
                    let c = g.flat([i, j, k]);
                    mask.safe[c] && field.values[c] <= 0.0
                });
                if inside {
                    let (px, py) = f.px(Vec2::new(g.coord(0, i) - dx / 2.0, g.coord(1, j) + dy / 2.0));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{SET}"/>"#,
                        dx * SCALE,
                        dy * SCALE
                    );
                }
            }
        }
    }
    for o in scene.obstacles {
        polygon(&mut s, &f, o.vertices(), &format!(r#"fill="{OBSTACLE}""#));
    }
    for c in scene.connected {
        arrow(&mut s, &f, &c.pose, 1.0, SAMPLE);
    }
    if scene.path.len() >= 2 {
        for w in scene.path.windows(2) {
            let (a, b) = (f.px(w[0].0.position()), f.px(w[1].0.position()));
            let color = if w[1].1 == Direction::Forward { PATH_FWD } else { PATH_BWD };
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                a.0,
                a.1,
                b.0,
                b.1
            );
        }
        for w in scene.path.windows(3).filter(|w| w[1].1 != w[2].1) {
            let (cx, cy) = f.px(w[1].0.position());
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="none" stroke="{CUSP}" stroke-width="2"/>"#);
        }
    }
    for (pose, color) in [(scene.start, SAMPLE), (scene.goal, GOAL)] {
        let Some(p) = pose else { continue };
        if let Some(v) = scene.vehicle {
            polygon(&mut s, &f, v.body().transformed(&p).vertices(), &format!(r#"fill="none" stroke="{color}""#));
        }
        arrow(&mut s, &f, &p, 1.5, color);
    }
    s.push_str("</svg>\n");
    s
}

const PW: f64 = 640.0;
const PH: f64 = 160.0;
const MARGIN: f64 = 48.0;

/// Draws one set of axes at vertical offset `top` and returns the mapping
/// from data to pixels.
fn axes(s: &mut String, top: f64, title: &str, x: (f64, f64), y: (f64, f64)) -> impl Fn(f64, f64) -> (f64, f64) {
    let (l, r, t, b) = (MARGIN, PW - 16.0, top + 20.0, top + PH - 24.0);
    let _ = writeln!(s, r#"<rect x="{l:.0}" y="{t:.0}" width="{:.0}" height="{:.0}" fill="none" stroke="black"/>"#, r - l, b - t);
    let _ = writeln!(s, r#"<text x="{l:.0}" y="{:.0}" font-family="monospace" font-size="12">{title}</text>"#, top + 14.0);
    for (v, py) in [(y.0, b), (y.1, t)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.0}" y="{:.0}" font-family="monospace" font-size="10" text-anchor="end">{}</text>"#,
            l - 4.0,
            py + 4.0,
            tick(v)
        );
    }
    for (v, px) in [(x.0, l), (x.1, r)] {
        let _ = writeln!(
            s,
            r#"<text x="{px:.0}" y="{:.0}" font-family="monospace" font-size="10" text-anchor="middle">{}</text>"#,
            b + 14.0,
            tick(v)
        );
    }
    let sx = (r - l) / (x.1 - x.0);
    let sy = (b - t) / (y.1 - y.0);
    move |vx, vy| (l + (vx - x.0) * sx, b - (vy - y.0) * sy)
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// Range of `values` padded so a flat trace sits mid-panel.
fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.05).max(1e-3 * (1.0 + lo.abs().max(hi.abs())));
    (lo - pad, hi + pad)
}

/// Path derivative chart: dx/ds, dy/ds and curvature against arc length.
pub fn continuity_svg(report: &ContinuityReport) -> String {
    let mut s = String::new();
    header(&mut s, PW, 3.0 * PH);
    let xs = span(report.rows.iter().map(|r| r.s));
    let panels: [(&str, fn(&crate::path::ContinuityRow) -> f64); 3] =
        [("dx/ds", |r| r.dx), ("dy/ds", |r| r.dy), ("curvature 1/m", |r| r.curvature)];
    for (p, (title, get)) in panels.iter().enumerate() {
        let ys = span(report.rows.iter().map(get));
        let to_px = axes(&mut s, p as f64 * PH, title, xs, ys);
        // one polyline per run of constant direction so cusps show as breaks
        let mut runs: Vec<Vec<(f64, f64)>> = Vec::new();
        let mut last: Option<Direction> = None;
        for r in &report.rows {
            if last != Some(r.direction) {
                runs.push(Vec::new());
                last = Some(r.direction);
            }
            runs.last_mut().unwrap().push(to_px(r.s, get(r)));
        }
        for run in runs {
            let pts: Vec<String> = run.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{PATH_FWD}"/>"#, pts.join(" "));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Strip charts of compute time and node count per scenario and algorithm.
/// Failures are left out; an empty record list draws empty axes.
pub fn bench_svg(records: &[TrialRecord]) -> String {
    let mut groups: Vec<(String, Algorithm)> = Vec::new();
    for r in records {
        let key = (r.scenario.clone(), r.algorithm);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.outcome == Outcome::Success).collect();
    let mut s = String::new();
    header(&mut s, PW, 2.0 * PH + 20.0);
    let xs = (0.0, groups.len().max(1) as f64);
    let metrics: [(&str, fn(&TrialRecord) -> Option<f64>); 2] =
        [("compute ms", |r| r.compute_ms), ("node count", |r| r.node_count.map(|n| n as f64))];
    for (p, (title, get)) in metrics.iter().enumerate() {
        let top = ok.iter().filter_map(|r| get(r)).fold(0.0, f64::max);
        let ys = (0.0, if top > 0.0 { top * 1.05 } else { 1.0 });
        let to_px = axes(&mut s, p as f64 * PH, title, xs, ys);
        for (g, key) in groups.iter().enumerate() {
            let color = if key.1 == Algorithm::HjbaStar { PATH_FWD } else { PATH_BWD };
            for r in ok.iter().filter(|r| r.scenario == key.0 && r.algorithm == key.1) {
                let Some(v) = get(r) else { continue };
                let (x, y) = to_px(g as f64 + 0.5, v);
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}" fill-opacity="0.6"/>"#);
            }
        }
    }
    for (g, key) in groups.iter().enumerate() {
        let x = MARGIN + (g as f64 + 0.5) * (PW - 16.0 - MARGIN) / xs.1;
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.0}" font-family="monospace" font-size="10" text-anchor="middle">{} {}</text>"#,
            2.0 * PH + 12.0,
            escape(&key.0),
            escape(&key.1.to_string())
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
