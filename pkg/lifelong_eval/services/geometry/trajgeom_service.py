"""
Rigid-body geometry kernel: rotation distance, composition, application of
similarity transforms and SE(3) interpolation.

The array helpers work on stacks of scalar-last quaternions and are what the
association, alignment and metric services run on; the value functions wrap
them for single poses.
"""
import math

import numpy as np
from scipy.spatial.transform import Rotation as ScipyRotation

from lifelong_eval.constants import SLERP_DOT_THRESHOLD
from lifelong_eval.exceptions import DegenerateIntervalError, InvalidInputError, OutOfRangeError
from lifelong_eval.models.geometry import Pose, RigidTransform, Rotation, SimilarityTransform

# --- Array helpers (quaternions scalar-last) ---

def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Hamilton product a * b of broadcastable (..., 4) scalar-last quaternion arrays.
    """
    ax, ay, az, aw = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bx, by, bz, bw = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ], axis=-1)

def quaternion_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.concatenate([-q[..., :3], q[..., 3:]], axis=-1)

def rotation_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Geodesic distance in degrees between stacks of unit quaternions.

    Uses 2 * atan2(|v|, |w|) of the relative quaternion, which is symmetric in
    its arguments, blind to the quaternion sign and accurate near zero.

    Returns:
        np.ndarray: Angles in [0, 180].
    """
    relative: np.ndarray = quaternion_multiply(quaternion_conjugate(a), b)
    vector_norm: np.ndarray = np.linalg.norm(relative[..., :3], axis=-1)
    return np.degrees(2.0 * np.arctan2(vector_norm, np.abs(relative[..., 3])))

def rotate_vectors(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate (..., 3) vectors by (..., 4) scalar-last unit quaternions."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u: np.ndarray = q[..., :3]
    w: np.ndarray = q[..., 3:]
    t: np.ndarray = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)

def slerp_arrays(q0: np.ndarray, q1: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """
    Spherical linear interpolation between stacks of unit quaternions along the
    shorter arc.

    Fractions of exactly 0 and 1 reproduce q0 and q1 bit for bit. Nearly parallel
    inputs fall back to normalized linear interpolation.

    Args:
        q0 (np.ndarray): (N, 4) start quaternions.
        q1 (np.ndarray): (N, 4) end quaternions.
        fractions (np.ndarray): (N,) interpolation parameters in [0, 1].

    Returns:
        np.ndarray: (N, 4) interpolated unit quaternions.
    """
    q0 = np.asarray(q0, dtype=float).reshape(-1, 4)
    q1 = np.asarray(q1, dtype=float).reshape(-1, 4)
    fractions = np.asarray(fractions, dtype=float).reshape(-1)

    dot: np.ndarray = np.sum(q0 * q1, axis=1)
    # Shorter arc
    target: np.ndarray = np.where((dot < 0.0)[:, None], -q1, q1)
    dot = np.abs(dot)

    theta: np.ndarray = np.arccos(np.clip(dot, -1.0, 1.0))
    sin_theta: np.ndarray = np.sin(theta)
    near: np.ndarray = dot > SLERP_DOT_THRESHOLD
    safe_sin: np.ndarray = np.where(near, 1.0, sin_theta)

    weight0: np.ndarray = np.where(near, 1.0 - fractions, np.sin((1.0 - fractions) * theta) / safe_sin)
    weight1: np.ndarray = np.where(near, fractions, np.sin(fractions * theta) / safe_sin)
    result: np.ndarray = weight0[:, None] * q0 + weight1[:, None] * target

    if np.any(near):
        result[near] /= np.linalg.norm(result[near], axis=1, keepdims=True)

    result = np.where((fractions == 0.0)[:, None], q0, result)
    result = np.where((fractions == 1.0)[:, None], q1, result)
    return result

def lerp_arrays(p0: np.ndarray, p1: np.ndarray, fractions: np.ndarray) -> np.ndarray:
    """Linear interpolation; exact at fractions 0 and 1."""
    fractions = np.asarray(fractions, dtype=float).reshape(-1, 1)
    return (1.0 - fractions) * np.asarray(p0, dtype=float) + fractions * np.asarray(p1, dtype=float)

def apply_to_arrays(
        transform: SimilarityTransform,
        positions: np.ndarray,
        quaternions: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Apply a similarity transform to stacks of poses.

    Positions are scaled, rotated and offset; orientations are only rotated.

    Returns:
        tuple[np.ndarray, np.ndarray]: Transformed (N, 3) positions and (N, 4) quaternions.
    """
    rotation: np.ndarray = transform.rotation.as_xyzw()
    translation: np.ndarray = np.asarray(transform.translation, dtype=float)
    moved_positions: np.ndarray = transform.scale * rotate_vectors(rotation, positions) + translation
    moved_quaternions: np.ndarray = quaternion_multiply(rotation, quaternions)
    return moved_positions, moved_quaternions

def rotation_to_matrix(rotation: Rotation) -> np.ndarray:
    return ScipyRotation.from_quat(rotation.as_xyzw()).as_matrix()

def rotation_from_matrix(matrix: np.ndarray) -> Rotation:
    return Rotation.from_xyzw(ScipyRotation.from_matrix(matrix).as_quat())

# --- Value operations ---

def rotation_angle(a: Rotation, b: Rotation) -> float:
    """
    Geodesic distance between two rotations.

    Args:
        a (Rotation): First rotation.
        b (Rotation): Second rotation.

    Returns:
        float: Angle in degrees in [0, 180]; 0 for q and -q.

    Raises:
        InvalidInputError: If either input has non-finite components.
    """
    qa: np.ndarray = a.as_xyzw()
    qb: np.ndarray = b.as_xyzw()
    if not (np.all(np.isfinite(qa)) and np.all(np.isfinite(qb))):
        raise InvalidInputError("rotation_angle got non-finite quaternion components")
    return float(rotation_angles(qa, qb))

def compose(first: RigidTransform, second: RigidTransform) -> RigidTransform:
    """
    Composition first * second: apply `second`, then `first`.
    """
    q1: np.ndarray = first.rotation.as_xyzw()
    rotation: np.ndarray = quaternion_multiply(q1, second.rotation.as_xyzw())
    translation: np.ndarray = rotate_vectors(q1, second.position) + first.position
    return RigidTransform(Rotation.from_xyzw(rotation), tuple(translation))

def inverse(transform: RigidTransform) -> RigidTransform:
    conjugate: np.ndarray = quaternion_conjugate(transform.rotation.as_xyzw())
    translation: np.ndarray = -rotate_vectors(conjugate, transform.position)
    return RigidTransform(Rotation.from_xyzw(conjugate), tuple(translation))

def similarity_inverse(transform: SimilarityTransform) -> SimilarityTransform:
    """Inverse of x -> s R x + t, i.e. x -> (1/s) R^T (x - t)."""
    conjugate: np.ndarray = quaternion_conjugate(transform.rotation.as_xyzw())
    translation: np.ndarray = -rotate_vectors(conjugate, np.asarray(transform.translation)) / transform.scale
    return SimilarityTransform(1.0 / transform.scale, Rotation.from_xyzw(conjugate), tuple(translation))

def apply(transform: SimilarityTransform, pose: RigidTransform) -> RigidTransform:
    """
    Apply a similarity transform to a pose.

    Args:
        transform (SimilarityTransform): Frame change to apply.
        pose (RigidTransform): Pose to move.

    Returns:
        RigidTransform: Pose with rotation composed and translation scaled,
        rotated and offset. The scale never alters the rotation.
    """
    positions, quaternions = apply_to_arrays(
        transform, pose.position.reshape(1, 3), pose.rotation.as_xyzw().reshape(1, 4)
    )
    return RigidTransform(Rotation.from_xyzw(quaternions[0]), tuple(positions[0]))

def interpolate_pose(p0: Pose, p1: Pose, t: float) -> RigidTransform:
    """
    Interpolate between two timestamped poses.

    Translation is interpolated linearly, rotation spherically along the
    shorter arc. At t0 and t1 the inputs are returned unchanged.

    Args:
        p0 (Pose): Earlier pose.
        p1 (Pose): Later pose.
        t (float): Time in [p0.timestamp, p1.timestamp].

    Returns:
        RigidTransform: Interpolated pose.

    Raises:
        OutOfRangeError: If t lies outside [t0, t1].
        DegenerateIntervalError: If t0 == t1 and the poses differ.
        InvalidInputError: If t0 > t1 or t is not finite.
    """
    t0, t1 = p0.timestamp, p1.timestamp
    if not math.isfinite(t):
        raise InvalidInputError(f"Interpolation time is not finite: {t}")
    if t0 > t1:
        raise InvalidInputError(f"Interpolation interval is reversed: [{t0}, {t1}]")
    if t < t0 or t > t1:
        raise OutOfRangeError(f"Time {t} outside interval [{t0}, {t1}]")

    if t0 == t1:
        if p0.transform != p1.transform:
            raise DegenerateIntervalError(f"Zero-length interval at {t0} between different poses")
        return p0.transform
    if t == t0:
        return p0.transform
    if t == t1:
        return p1.transform

    fraction: np.ndarray = np.array([(t - t0) / (t1 - t0)])
    position: np.ndarray = lerp_arrays(p0.transform.position, p1.transform.position, fraction)[0]
    quaternion: np.ndarray = slerp_arrays(
        p0.transform.rotation.as_xyzw(), p1.transform.rotation.as_xyzw(), fraction
    )[0]
    return RigidTransform(Rotation.from_xyzw(quaternion), tuple(position))
