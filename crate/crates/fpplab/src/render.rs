//! SVG snapshots: the open-edge raster of a window with path polylines on
//! top. Lattice `t` grows upward, so the viewport flips the vertical axis.

use fpplab_core::lattice::{Axis, PassageField, Site};

const CELL: f64 = 6.0;
const PAD: f64 = 12.0;

/// Largest window that will be rasterized.
pub const MAX_RENDER_SITES: usize = 40_000;

fn sx(field: &PassageField, s: Site) -> f64 {
    PAD + (s.x - field.window().x_min) as f64 * CELL
}

fn sy(field: &PassageField, s: Site) -> f64 {
    PAD + (field.window().t_max - s.t) as f64 * CELL
}

/// Renders open edges in light gray and the given `(path, color)` overlays
/// as polylines. Returns `None` when the window is too large to rasterize.
pub fn render_field(field: &PassageField, paths: &[(&[Site], &str)]) -> Option<String> {
    let w = field.window();
    if w.len() > MAX_RENDER_SITES {
        return None;
    }
    let width = PAD * 2.0 + (w.width() - 1) as f64 * CELL;
    let height = PAD * 2.0 + (w.height() - 1) as f64 * CELL;
    let mut svg = String::with_capacity(w.len() * 32);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" \
         fill=\"white\"/>\n<g stroke=\"#c8c8c8\" stroke-width=\"1\">\n"
    ));
    for s in w.sites() {
        for axis in [Axis::Right, Axis::Up] {
            if field.is_open(s, axis).unwrap_or(false) {
                let (dx, dt) = match axis {
                    Axis::Right => (1, 0),
                    Axis::Up => (0, 1),
                };
                let to = s.offset(dx, dt);
                svg.push_str(&format!(
                    "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\"/>\n",
                    sx(field, s),
                    sy(field, s),
                    sx(field, to),
                    sy(field, to)
                ));
            }
        }
    }
    svg.push_str("</g>\n");
    for (path, color) in paths {
        if path.is_empty() {
            continue;
        }
        let points: Vec<String> = path
            .iter()
            .map(|&s| format!("{:.1},{:.1}", sx(field, s), sy(field, s)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpplab_core::lattice::{ExcessDistribution, Window};

    #[test]
    fn svg_is_well_formed_and_size_capped() {
        let w = Window::square(0, 9).unwrap();
        let f =
            PassageField::sample(w, 0.7, ExcessDistribution::Atom { value: 2.0 }, 3).unwrap();
        let path = [Site::new(0, 0), Site::new(1, 0), Site::new(1, 1)];
        let svg = render_field(&f, &[(&path, "#d62728")]).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.matches("<line").count() > 50);

        let big = Window::square(0, 900).unwrap();
        let fb =
            PassageField::sample(big, 0.7, ExcessDistribution::Atom { value: 2.0 }, 3).unwrap();
        assert!(render_field(&fb, &[]).is_none());
    }
}
