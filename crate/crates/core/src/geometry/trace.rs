//! Meridional-plane ray tracing through an [`OpticalLayout`].
//!
//! Coordinates are unfolded: every element sits at increasing axial position
//! and rays always travel toward +x. A mirror reflection is computed in the
//! folded frame (reflecting off the actual surface) and then mirrored back
//! about the vertex plane.

use serde::{Deserialize, Serialize};

use super::{Element, GeometryError, MirrorKind, OpticalLayout, Vec2};
use crate::kinematics::{cross_convert, Helicity, Photon};
use crate::vector::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Vec2,
    direction: Vec2,
    pub omega: f64,
}

impl Ray {
    /// `direction` is normalised; it must be non-zero and `omega > 0`.
    pub fn new(origin: Vec2, direction: Vec2, omega: f64) -> Result<Self, GeometryError> {
        let direction = direction
            .normalized()
            .ok_or_else(|| GeometryError::InvalidParameter("ray direction must be non-zero".into()))?;
        if !(omega > 0.0) {
            return Err(GeometryError::InvalidParameter(format!("ray omega must be > 0, got {omega}")));
        }
        Ok(Self { origin, direction, omega })
    }

    /// Ray leaving `origin` with transverse slope `dy/dx`.
    pub fn with_slope(origin: Vec2, slope: f64, omega: f64) -> Result<Self, GeometryError> {
        Self::new(origin, Vec2::new(1.0, slope), omega)
    }

    pub fn direction(&self) -> Vec2 {
        self.direction
    }

    pub fn slope(&self) -> f64 {
        self.direction.y / self.direction.x
    }

    /// Transverse height where the ray's line crosses the plane at `x`.
    pub fn height_at(&self, x: f64) -> f64 {
        self.origin.y + (x - self.origin.x) * self.slope()
    }

    /// The same ray with its origin moved to the plane at `x`.
    pub fn propagate_to(&self, x: f64) -> Ray {
        Ray { origin: Vec2::new(x, self.height_at(x)), ..*self }
    }
}

/// Intersection of the infinite lines carrying two rays.
pub fn line_intersection(a: &Ray, b: &Ray) -> Option<Vec2> {
    let denom = a.direction.cross(b.direction);
    if denom.abs() < 1e-300 {
        return None;
    }
    let t = (b.origin - a.origin).cross(b.direction) / denom;
    Some(a.origin + a.direction * t)
}

fn to_3d(v: Vec2) -> Vec3 {
    Vec3::new(v.y, 0.0, v.x)
}

/// Frequency-converting reflection at a pumped mirror whose vertex is at `position`.
fn reflect(ray: &Ray, position: f64, kind: MirrorKind, pump_omega: f64) -> Result<Ray, GeometryError> {
    let d = ray.direction;
    let (hit, normal) = match kind {
        MirrorKind::Planar => (ray.propagate_to(position).origin, Vec2::new(-1.0, 0.0)),
        MirrorKind::Spherical { radius } => {
            let centre = Vec2::new(position - radius, 0.0);
            let oc = ray.origin - centre;
            let b = d.dot(oc);
            let disc = b * b - (oc.dot(oc) - radius * radius);
            if disc < 0.0 {
                return Err(GeometryError::MissedMirror(position));
            }
            let s = disc.sqrt();
            let (p1, p2) = (ray.origin + d * (-b - s), ray.origin + d * (-b + s));
            let hit = if (p1.x - position).abs() <= (p2.x - position).abs() { p1 } else { p2 };
            (hit, (centre - hit) * (1.0 / radius))
        }
    };

    // Pump wavefront normal at the hit point points along `normal`; the
    // incoming ray is the returned photon of the crossed reaction.
    let pump = Photon::new(pump_omega, to_3d(normal) * pump_omega, Helicity::Plus)?;
    let returned = Photon::new(ray.omega, to_3d(d) * ray.omega, Helicity::Minus)?;
    let converted = cross_convert(&pump, &returned)?;
    let n3 = to_3d(normal);
    let k = converted.k();
    let k_t = k - n3 * k.dot(n3);
    let t = Vec2::new(k_t.z, k_t.x) * (1.0 / converted.omega());
    let sin2 = t.dot(t);
    if sin2 > 1.0 {
        return Err(GeometryError::NoExitAngle(sin2.sqrt()));
    }
    let out = t + normal * (1.0 - sin2).sqrt();

    let origin = Vec2::new(2.0 * position - hit.x, hit.y);
    Ray::new(origin, Vec2::new(-out.x, out.y), converted.omega())
}

/// Traces `ray` through every element in order, returning the ray state just
/// after each element.
///
/// Lenses apply the paraxial slope kick `u' = u − y/f`; a mask cell with
/// zero transmission stops the ray with [`GeometryError::RayBlocked`];
/// quantum mirrors reflect about the local surface normal and relabel the
/// frequency to `pump_omega − omega`.
pub fn trace_path(ray: &Ray, layout: &OpticalLayout) -> Result<Vec<Ray>, GeometryError> {
    if let Some(first) = layout.elements().first() {
        if ray.origin.x > first.position() {
            return Err(GeometryError::InvalidParameter(format!(
                "ray starts at {} after the first element at {}",
                ray.origin.x,
                first.position()
            )));
        }
    }
    if !(ray.direction.x > 0.0) {
        return Err(GeometryError::InvalidParameter("ray must travel toward +x".into()));
    }
    let mut states = Vec::with_capacity(layout.elements().len());
    let mut current = *ray;
    for element in layout.elements() {
        current = match *element {
            Element::ThinLens { position, focal_length } => {
                let at = current.propagate_to(position);
                let slope = at.slope() - at.origin.y / focal_length;
                Ray::with_slope(at.origin, slope, at.omega)?
            }
            Element::Mask { position, ref mask } => {
                let at = current.propagate_to(position);
                if mask.transmission(at.origin.y) == 0.0 {
                    return Err(GeometryError::RayBlocked { position, height: at.origin.y });
                }
                at
            }
            Element::QuantumMirror { position, kind, pump_omega } => reflect(&current, position, kind, pump_omega)?,
            Element::DetectorPlane { position, .. } => current.propagate_to(position),
        };
        states.push(current);
    }
    Ok(states)
}

/// Final ray state after the whole layout.
pub fn trace_ray(ray: &Ray, layout: &OpticalLayout) -> Result<Ray, GeometryError> {
    Ok(trace_path(ray, layout)?.pop().unwrap_or(*ray))
}

/// Image located by intersecting two traced rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRayImage {
    /// Axial distance of the image from the mirror vertex (negative if virtual).
    pub distance: f64,
    pub height: f64,
    pub magnification: f64,
}

/// Images an off-axis object point through a pumped spherical mirror by
/// tracing a chief ray (through the centre of curvature) and a marginal ray
/// (toward the vertex), and intersecting them after conversion.
///
/// The object sits at distance `z_s` in front of the vertex, `height` off
/// axis. Both rays stay within `max_angle` of the axis when the object height
/// is chosen accordingly; when the object is near the centre of curvature two
/// rays aimed at `±max_angle` around the vertex are used instead.
pub fn two_ray_image(
    z_s: f64,
    height: f64,
    omega_s: f64,
    omega_i: f64,
    radius: f64,
    max_angle: f64,
) -> Result<TwoRayImage, GeometryError> {
    if height == 0.0 {
        return Err(GeometryError::InvalidParameter("object height must be non-zero".into()));
    }
    let layout = OpticalLayout::new(vec![Element::QuantumMirror {
        position: 0.0,
        kind: MirrorKind::Spherical { radius },
        pump_omega: omega_s + omega_i,
    }])?;
    let object = Vec2::new(-z_s, height);
    let centre = Vec2::new(-radius, 0.0);
    let to_centre = centre - object;
    let chief_slope = to_centre.y / to_centre.x;
    let (first, second) = if to_centre.x.abs() > 1e-9 * z_s && chief_slope.abs() <= max_angle {
        (chief_slope, -height / z_s)
    } else {
        let s = max_angle.min(1e-3);
        (-height / z_s + s, -height / z_s - s)
    };
    let a = trace_ray(&Ray::with_slope(object, first, omega_s)?, &layout)?;
    let b = trace_ray(&Ray::with_slope(object, second, omega_s)?, &layout)?;
    let image = line_intersection(&a, &b).ok_or(GeometryError::DegenerateConjugate)?;
    Ok(TwoRayImage { distance: image.x, height: image.y, magnification: image.y / height })
}
