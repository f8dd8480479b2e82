//! Static SVG figure of a planar excision.

use std::fmt::Write;

use edgebalance::geom2d::{ExcisionPlan, Point2, Shape2D};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;
const CONIC_SAMPLES: usize = 256;

struct Frame {
    min: Point2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(shape: &Shape2D) -> Self {
        let (min, max) = shape.bounding_box();
        let span = (max.x - min.x).max(max.y - min.y).max(f64::MIN_POSITIVE);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        Self { min, scale, height: (max.y - min.y) * scale + 2.0 * MARGIN }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn outline(shape: &Shape2D) -> Vec<Point2> {
    match shape.vertices() {
        Some(v) => v.to_vec(),
        None => (0..CONIC_SAMPLES)
            .map(|i| shape.boundary_point(i as f64 / CONIC_SAMPLES as f64))
            .collect(),
    }
}

fn points_attr(frame: &Frame, pts: &[Point2]) -> String {
    pts.iter()
        .map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.4},{y:.4}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Outline, dashed cavity, chord and the labelled points `O C C′ P Q`.
pub fn render(plan: &ExcisionPlan) -> String {
    let frame = Frame::new(&plan.shape);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{:.0}" viewBox="0 0 {SIZE:.0} {:.4}">"#,
        frame.height.ceil(),
        frame.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<polygon points="{}" fill="lightsteelblue" stroke="black" stroke-width="1.5"/>"#,
        points_attr(&frame, &outline(&plan.shape))
    );
    let _ = writeln!(
        s,
        r#"<polygon points="{}" fill="white" stroke="black" stroke-width="1" stroke-dasharray="6 4"/>"#,
        points_attr(&frame, &outline(&plan.cavity))
    );
    let (ox, oy) = frame.map(plan.chord.o);
    let (qx, qy) = frame.map(plan.chord.q);
    let _ = writeln!(
        s,
        r#"<line x1="{ox:.4}" y1="{oy:.4}" x2="{qx:.4}" y2="{qy:.4}" stroke="gray" stroke-width="0.75"/>"#
    );
    let labels = [
        ("O", plan.chord.o),
        ("C", plan.chord.centroid),
        ("C′", plan.cavity_centroid()),
        ("P", plan.p),
        ("Q", plan.chord.q),
    ];
    for (name, p) in labels {
        let (x, y) = frame.map(p);
        let _ = writeln!(s, r#"<circle cx="{x:.4}" cy="{y:.4}" r="2.5" fill="black"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.4}" y="{:.4}" font-family="serif" font-size="14">{name}</text>"#,
            x + 4.0,
            y - 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
