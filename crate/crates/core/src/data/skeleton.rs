//! Conversion from 3D skeleton joints to the eight-angle frame.
//!
//! Convention (right-handed torso frame):
//! - `up` points from the torso centre to the neck;
//! - `lateral` points from the right shoulder to the left shoulder, made
//!   orthogonal to `up`;
//! - `forward = lateral × up`.
//!
//! For each arm, with upper arm `a = elbow - shoulder` and forearm
//! `f = hand - elbow` expressed in that frame:
//! - shoulder pitch `= atan2(-a_up, a_forward)`: 0 with the arm pointing
//!   forward, π/2 hanging down, -π/2 raised;
//! - shoulder yaw `= asin(side · a_lateral / |a|)`: positive when the arm
//!   moves away from the body (`side` is +1 left, -1 right);
//! - elbow roll `= π - interior elbow angle`: 0 with a straight arm;
//! - elbow yaw: azimuth of the forearm around the upper-arm axis, measured
//!   from the projection of `up` (or of `forward` when the upper arm is
//!   vertical), signed by `side`; 0 when the arm is straight.

use super::sequence::Frame;
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmPoints<T> {
    pub shoulder: Vec3<T>,
    pub elbow: Vec3<T>,
    pub hand: Vec3<T>,
}

/// Joint positions in metres from a skeleton tracker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonFrame<T> {
    pub torso: Vec3<T>,
    pub neck: Vec3<T>,
    pub left: ArmPoints<T>,
    pub right: ArmPoints<T>,
}

fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale<T: Scalar>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

fn eps<T: Scalar>() -> T {
    T::lit(1e-9)
}

fn unit<T: Scalar>(a: Vec3<T>, what: &'static str) -> Result<Vec3<T>> {
    let n = norm(a);
    if !(n > eps()) {
        return Err(GwrError::DegenerateSkeleton(what));
    }
    Ok(scale(a, T::one() / n))
}

/// Component of `v` orthogonal to the unit vector `axis`.
fn reject<T: Scalar>(v: Vec3<T>, axis: Vec3<T>) -> Vec3<T> {
    sub(v, scale(axis, dot(v, axis)))
}

struct TorsoFrame<T> {
    forward: Vec3<T>,
    lateral: Vec3<T>,
    up: Vec3<T>,
}

impl<T: Scalar> TorsoFrame<T> {
    fn from_skeleton(s: &SkeletonFrame<T>) -> Result<Self> {
        let up = unit(sub(s.neck, s.torso), "torso and neck coincide")?;
        let across = sub(s.left.shoulder, s.right.shoulder);
        let lateral = unit(reject(across, up), "shoulders coincide or are aligned with the spine")?;
        Ok(TorsoFrame {
            forward: cross(lateral, up),
            lateral,
            up,
        })
    }
}

/// Elbow roll alone: `π` minus the interior angle at the elbow.
pub fn elbow_roll<T: Scalar>(arm: &ArmPoints<T>) -> Result<T> {
    let upper = unit(sub(arm.elbow, arm.shoulder), "zero-length upper arm")?;
    let fore = unit(sub(arm.hand, arm.elbow), "zero-length forearm")?;
    Ok(dot(upper, fore).max(-T::one()).min(T::one()).acos())
}

fn arm_angles<T: Scalar>(frame: &TorsoFrame<T>, arm: &ArmPoints<T>, side: T) -> Result<[T; 4]> {
    let a = sub(arm.elbow, arm.shoulder);
    let a_hat = unit(a, "zero-length upper arm")?;
    let f = sub(arm.hand, arm.elbow);
    unit(f, "zero-length forearm")?;

    let (af, al, au) = (dot(a_hat, frame.forward), dot(a_hat, frame.lateral), dot(a_hat, frame.up));
    let pitch = (-au).atan2(af);
    let yaw = (side * al).max(-T::one()).min(T::one()).asin();
    let roll = elbow_roll(arm)?;

    let mut reference = reject(frame.up, a_hat);
    if norm(reference) < T::lit(1e-6) {
        reference = reject(frame.forward, a_hat);
    }
    let reference = unit(reference, "no reference direction for elbow yaw")?;
    let f_perp = reject(f, a_hat);
    let elbow_yaw = if norm(f_perp) <= eps() {
        T::zero()
    } else {
        let y = dot(cross(a_hat, reference), f_perp);
        let x = dot(reference, f_perp);
        side * y.atan2(x)
    };
    Ok([pitch, yaw, elbow_yaw, roll])
}

/// The eight joint angles of a skeleton frame under the convention above.
pub fn angles_from_skeleton<T: Scalar>(s: &SkeletonFrame<T>) -> Result<Frame<T>> {
    let all = [s.torso, s.neck]
        .into_iter()
        .chain([s.left, s.right].into_iter().flat_map(|a| [a.shoulder, a.elbow, a.hand]));
    for p in all {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(GwrError::NonFinite);
        }
    }
    let frame = TorsoFrame::from_skeleton(s)?;
    let l = arm_angles(&frame, &s.left, T::one())?;
    let r = arm_angles(&frame, &s.right, -T::one())?;
    Ok([l[0], l[1], l[2], l[3], r[0], r[1], r[2], r[3]])
}
