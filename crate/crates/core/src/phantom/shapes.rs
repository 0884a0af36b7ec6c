use serde::{Deserialize, Serialize};

/// Geometric primitive in metric coordinates. Widths and heights are full
/// extents along x and y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Ellipse {
        center: [f64; 2],
        width: f64,
        height: f64,
    },
    Rectangle {
        center: [f64; 2],
        width: f64,
        height: f64,
    },
    Annulus {
        center: [f64; 2],
        inner_radius: f64,
        outer_radius: f64,
    },
}

/// A shape painted with a uniform initial pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Entry")]
pub struct ShapeSpec {
    #[serde(flatten)]
    pub shape: Shape,
    pub amplitude: f64,
}

/// Flat reading form of [`ShapeSpec`]. `flatten` would let unknown keys
/// through, so the amplitude is repeated per variant instead.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Entry {
    Disk {
        center: [f64; 2],
        radius: f64,
        amplitude: f64,
    },
    Ellipse {
        center: [f64; 2],
        width: f64,
        height: f64,
        amplitude: f64,
    },
    Rectangle {
        center: [f64; 2],
        width: f64,
        height: f64,
        amplitude: f64,
    },
    Annulus {
        center: [f64; 2],
        inner_radius: f64,
        outer_radius: f64,
        amplitude: f64,
    },
}

impl From<Entry> for ShapeSpec {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Disk { center, radius, amplitude } => ShapeSpec::new(Shape::Disk { center, radius }, amplitude),
            Entry::Ellipse { center, width, height, amplitude } => {
                ShapeSpec::new(Shape::Ellipse { center, width, height }, amplitude)
            }
            Entry::Rectangle { center, width, height, amplitude } => {
                ShapeSpec::new(Shape::Rectangle { center, width, height }, amplitude)
            }
            Entry::Annulus { center, inner_radius, outer_radius, amplitude } => {
                ShapeSpec::new(Shape::Annulus { center, inner_radius, outer_radius }, amplitude)
            }
        }
    }
}

impl ShapeSpec {
    pub fn new(shape: Shape, amplitude: f64) -> Self {
        ShapeSpec { shape, amplitude }
    }
}

impl Shape {
    pub fn center(&self) -> [f64; 2] {
        match *self {
            Shape::Disk { center, .. }
            | Shape::Ellipse { center, .. }
            | Shape::Rectangle { center, .. }
            | Shape::Annulus { center, .. } => center,
        }
    }

    /// Returns a message for the first non-positive or non-finite dimension.
    pub fn dimension_error(&self) -> Option<String> {
        let dims: &[(&str, f64)] = &match *self {
            Shape::Disk { radius, .. } => [("radius", radius), ("radius", radius)],
            Shape::Ellipse { width, height, .. } | Shape::Rectangle { width, height, .. } => {
                [("width", width), ("height", height)]
            }
            Shape::Annulus {
                inner_radius,
                outer_radius,
                ..
            } => [("inner_radius", inner_radius), ("outer_radius", outer_radius)],
        };
        for &(name, v) in dims {
            if !(v.is_finite() && v > 0.0) {
                return Some(format!("{name} must be positive, got {v}"));
            }
        }
        if let Shape::Annulus {
            inner_radius,
            outer_radius,
            ..
        } = *self
        {
            if inner_radius >= outer_radius {
                return Some("inner_radius must be smaller than outer_radius".into());
            }
        }
        let c = self.center();
        if !(c[0].is_finite() && c[1].is_finite()) {
            return Some("center must be finite".into());
        }
        None
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extent(&self) -> (f64, f64) {
        match *self {
            Shape::Disk { radius, .. } => (radius, radius),
            Shape::Ellipse { width, height, .. } | Shape::Rectangle { width, height, .. } => {
                (width / 2.0, height / 2.0)
            }
            Shape::Annulus { outer_radius, .. } => (outer_radius, outer_radius),
        }
    }

    /// Boundary-inclusive membership test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let c = self.center();
        let dx = x - c[0];
        let dy = y - c[1];
        match *self {
            Shape::Disk { radius, .. } => dx * dx + dy * dy <= radius * radius,
            Shape::Ellipse { width, height, .. } => {
                let u = dx / (width / 2.0);
                let v = dy / (height / 2.0);
                u * u + v * v <= 1.0
            }
            Shape::Rectangle { width, height, .. } => {
                dx.abs() <= width / 2.0 && dy.abs() <= height / 2.0
            }
            Shape::Annulus {
                inner_radius,
                outer_radius,
                ..
            } => {
                let r2 = dx * dx + dy * dy;
                r2 >= inner_radius * inner_radius && r2 <= outer_radius * outer_radius
            }
        }
    }

    /// Rotates the shape by +90 degrees about the origin.
    pub fn rotated_quarter_turn(&self) -> Shape {
        let rot = |c: [f64; 2]| [-c[1], c[0]];
        match *self {
            Shape::Disk { center, radius } => Shape::Disk {
                center: rot(center),
                radius,
            },
            Shape::Ellipse {
                center,
                width,
                height,
            } => Shape::Ellipse {
                center: rot(center),
                width: height,
                height: width,
            },
            Shape::Rectangle {
                center,
                width,
                height,
            } => Shape::Rectangle {
                center: rot(center),
                width: height,
                height: width,
            },
            Shape::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => Shape::Annulus {
                center: rot(center),
                inner_radius,
                outer_radius,
            },
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Shape {
        let mut s = *self;
        match &mut s {
            Shape::Disk { center, .. }
            | Shape::Ellipse { center, .. }
            | Shape::Rectangle { center, .. }
            | Shape::Annulus { center, .. } => {
                center[0] += dx;
                center[1] += dy;
            }
        }
        s
    }
}
