//! Hand-built SVG renders of the two standard views: the grid plot (leaf
//! rectangles shaded by learning progress, one dot per action) and the polar
//! plot (actions at their goal angle and travel radius, darker = more
//! recent, with the object windows shaded).

use std::fmt::Write as _;

use curio_core::runner::{GridPlotData, PolarPlotData};
use curio_core::types::MotorBounds;

const GRID_W: f64 = 720.0;
const GRID_H: f64 = 320.0;
const MARGIN: f64 = 45.0;

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Brighter fill for higher learning progress.
fn lp_fill(lp: f64, max_lp: f64) -> String {
    let t = if max_lp > 0.0 { (lp / max_lp).clamp(0.0, 1.0) } else { 0.0 };
    format!(
        "rgb({},{},{})",
        lerp(42.0, 250.0, t) as u32,
        lerp(44.0, 219.0, t) as u32,
        lerp(84.0, 77.0, t) as u32
    )
}

pub fn grid_svg(data: &GridPlotData, bounds: &MotorBounds) -> String {
    let (rot_lo, rot_hi) = bounds.rotation;
    let (trav_lo, trav_hi) = bounds.travel;
    let x = |rot: f64| MARGIN + (rot - rot_lo) / (rot_hi - rot_lo) * GRID_W;
    let y = |trav: f64| MARGIN + (trav_hi - trav) / (trav_hi - trav_lo) * GRID_H;

    let max_lp = data
        .leaves
        .iter()
        .map(|l| l.learning_progress)
        .fold(0.0f64, f64::max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        GRID_W + 2.0 * MARGIN,
        GRID_H + 2.0 * MARGIN,
        GRID_W + 2.0 * MARGIN,
        GRID_H + 2.0 * MARGIN
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    for l in &data.leaves {
        let x0 = x(l.bounds.rotation.0);
        let x1 = x(l.bounds.rotation.1);
        let y0 = y(l.bounds.travel.1);
        let y1 = y(l.bounds.travel.0);
        let _ = writeln!(
            s,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1.5\"/>",
            x0,
            y0,
            x1 - x0,
            y1 - y0,
            lp_fill(l.learning_progress, max_lp)
        );
        // Category number in the bottom-right corner of its region.
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"#ffffff\" text-anchor=\"end\">{}</text>",
            x1 - 3.0,
            y1 - 3.0,
            l.id
        );
    }

    for a in &data.actions {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"#111111\" fill-opacity=\"0.6\"/>",
            x(a.rotation_deg),
            y(a.travel_mm)
        );
    }

    // Axis labels.
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">rotation (deg)</text>",
        MARGIN + GRID_W / 2.0,
        MARGIN + GRID_H + 32.0
    );
    let _ = writeln!(
        s,
        "<text x=\"12\" y=\"{:.1}\" font-size=\"11\" transform=\"rotate(-90 12 {:.1})\" text-anchor=\"middle\">travel (mm)</text>",
        MARGIN + GRID_H / 2.0,
        MARGIN + GRID_H / 2.0
    );
    for rot in [rot_lo, 0.0, rot_hi] {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{rot}</text>",
            x(rot),
            MARGIN + GRID_H + 14.0
        );
    }
    for trav in [trav_lo, 0.0, trav_hi] {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{trav}</text>",
            MARGIN - 6.0,
            y(trav) + 3.0
        );
    }
    s.push_str("</svg>\n");
    s
}

const POLAR_SIZE: f64 = 480.0;
const POLAR_R: f64 = 195.0;

/// Angle 0 points up (the robot's initial facing); positive angles go
/// counter-clockwise.
fn polar_point(angle_deg: f64, radius: f64) -> (f64, f64) {
    let c = POLAR_SIZE / 2.0;
    let a = angle_deg.to_radians();
    (c - radius * a.sin(), c - radius * a.cos())
}

pub fn polar_svg(data: &PolarPlotData, travel_max: f64) -> String {
    let c = POLAR_SIZE / 2.0;
    let scale = |radius_mm: f64| radius_mm / travel_max * POLAR_R;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{POLAR_SIZE:.0}\" height=\"{POLAR_SIZE:.0}\" viewBox=\"0 0 {POLAR_SIZE:.0} {POLAR_SIZE:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    // Object windows as shaded wedges (arc approximated by short chords).
    for w in &data.windows {
        let lo = w.center_deg - w.half_width_deg;
        let hi = w.center_deg + w.half_width_deg;
        let mut path = format!("M {c:.2} {c:.2}");
        let steps = ((hi - lo) / 2.0).ceil().max(2.0) as usize;
        for i in 0..=steps {
            let a = lo + (hi - lo) * i as f64 / steps as f64;
            let (px, py) = polar_point(a, POLAR_R);
            let _ = write!(path, " L {px:.2} {py:.2}");
        }
        path.push_str(" Z");
        let _ = writeln!(s, "<path d=\"{path}\" fill=\"#9ecae1\" fill-opacity=\"0.45\"/>");
        let (lx, ly) = polar_point(w.center_deg, POLAR_R + 14.0);
        let _ = writeln!(
            s,
            "<text x=\"{lx:.1}\" y=\"{ly:.1}\" font-size=\"10\" text-anchor=\"middle\">{}</text>",
            w.name
        );
    }

    // Rings and spokes.
    for frac in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            "<circle cx=\"{c:.1}\" cy=\"{c:.1}\" r=\"{:.2}\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"0.8\"/>",
            POLAR_R * frac
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"9\" fill=\"#888888\">{:.0}</text>",
            c + 3.0,
            c - POLAR_R * frac - 2.0,
            travel_max * frac
        );
    }
    for angle in [0.0f64, 90.0, 180.0, -90.0] {
        let (px, py) = polar_point(angle, POLAR_R);
        let _ = writeln!(
            s,
            "<line x1=\"{c:.1}\" y1=\"{c:.1}\" x2=\"{px:.2}\" y2=\"{py:.2}\" stroke=\"#dddddd\" stroke-width=\"0.8\"/>"
        );
        let (tx, ty) = polar_point(angle, POLAR_R + 26.0);
        let _ = writeln!(
            s,
            "<text x=\"{tx:.1}\" y=\"{ty:.1}\" font-size=\"10\" text-anchor=\"middle\">{angle}</text>"
        );
    }

    // Actions: darker = more recent; backward travel drawn as open circles.
    let n = data.points.len().max(1);
    for p in &data.points {
        let (px, py) = polar_point(p.angle_deg, scale(p.radius_mm));
        let opacity = 0.12 + 0.88 * (p.recency_rank + 1) as f64 / n as f64;
        if p.travel_sign < 0 {
            let _ = writeln!(
                s,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"none\" stroke=\"#111111\" stroke-opacity=\"{opacity:.3}\" stroke-width=\"1.2\"/>"
            );
        } else {
            let _ = writeln!(
                s,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"#111111\" fill-opacity=\"{opacity:.3}\"/>"
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use curio_core::config::{Mode, RunConfig};
    use curio_core::runner::run_experiment;

    #[test]
    fn svgs_are_well_formed_and_deterministic() {
        let mut cfg = RunConfig::for_mode(Mode::Baseline);
        cfg.turns = 40;
        cfg.seed = 6;
        let artifacts = run_experiment(&cfg).unwrap();
        let grid = artifacts.grid_plot_data();
        let polar = artifacts.polar_plot_data();
        let g1 = grid_svg(&grid, &cfg.motor_bounds);
        let g2 = grid_svg(&grid, &cfg.motor_bounds);
        assert_eq!(g1, g2);
        assert!(g1.starts_with("<svg"));
        assert!(g1.trim_end().ends_with("</svg>"));
        assert_eq!(g1.matches("<rect").count() - 1, artifacts.final_tree.leaf_count());
        let p = polar_svg(&polar, 80.0);
        assert!(p.starts_with("<svg"));
        assert_eq!(p.matches("<path").count(), cfg.arena.objects.len());
        // one circle per action plus the four reference rings
        assert_eq!(p.matches("<circle").count(), cfg.turns + 4);
    }

    #[test]
    fn polar_origin_points_up() {
        let (x, y) = polar_point(0.0, 100.0);
        assert!((x - POLAR_SIZE / 2.0).abs() < 1e-9);
        assert!(y < POLAR_SIZE / 2.0);
        // +90 degrees is to the left (counter-clockwise).
        let (x, _) = polar_point(90.0, 100.0);
        assert!(x < POLAR_SIZE / 2.0);
    }
}
