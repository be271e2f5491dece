"""Scene JSON model, reports and synthetic scene generation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import homgeom
from .affine import AffineLCFactors, compose_affine, lc_factorize_affine, reconstruction_residual_affine
from .errors import LCError
from .homgeom import CameraKind, CameraMatrix
from .krt import krt_decompose
from .pinhole import PinholeLCFactors, compose, lc_factorize_pinhole, reconstruction_residual
from .triangulate import line_from_factors, symmedian_batch


class SceneError(ValueError):
    """Malformed scene input."""


@dataclass(frozen=True, eq=False)
class CameraEntry:
    id: str
    P: np.ndarray


@dataclass(frozen=True)
class Observation:
    camera_id: str
    u: float
    v: float


@dataclass(frozen=True)
class Track:
    point_id: str
    observations: tuple[Observation, ...]


@dataclass(eq=False)
class SceneFile:
    cameras: list[CameraEntry] = field(default_factory=list)
    tracks: list[Track] = field(default_factory=list)

    def camera(self, cid: str) -> CameraEntry:
        for c in self.cameras:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def to_json(self) -> dict:
        return {
            "cameras": [{"id": c.id, "P": c.P.tolist()} for c in self.cameras],
            "tracks": [
                {
                    "point_id": t.point_id,
                    "observations": [
                        {"camera_id": o.camera_id, "u": o.u, "v": o.v} for o in t.observations
                    ],
                }
                for t in self.tracks
            ],
        }

    @classmethod
    def from_json(cls, data) -> "SceneFile":
        """Validate and build a scene; raises :class:`SceneError`."""
        if not isinstance(data, dict):
            raise SceneError("scene must be a JSON object")
        cams = []
        seen = set()
        for i, c in enumerate(data.get("cameras", [])):
            try:
                cid = str(c["id"])
                P = homgeom._as_camera_array(c["P"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SceneError(f"camera #{i}: {exc}") from None
            if cid in seen:
                raise SceneError(f"duplicate camera id {cid!r}")
            seen.add(cid)
            cams.append(CameraEntry(cid, P))
        tracks = []
        for i, t in enumerate(data.get("tracks", [])):
            try:
                obs = tuple(
                    Observation(str(o["camera_id"]), float(o["u"]), float(o["v"]))
                    for o in t["observations"]
                )
                pid = str(t["point_id"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SceneError(f"track #{i}: {exc}") from None
            for o in obs:
                if o.camera_id not in seen:
                    raise SceneError(f"track {pid!r} references unknown camera {o.camera_id!r}")
                if not (math.isfinite(o.u) and math.isfinite(o.v)):
                    raise SceneError(f"track {pid!r} has a non-finite observation")
            tracks.append(Track(pid, obs))
        return cls(cams, tracks)


def loads_scene(text: str) -> SceneFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON: {exc}") from None
    return SceneFile.from_json(data)


def dumps(obj) -> str:
    """Deterministic JSON; floats use the shortest round-trip repr."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _error_obj(exc: Exception) -> dict:
    code = getattr(exc, "code", type(exc).__name__)
    return {"code": code, "message": str(exc)}


# --------------------------------------------------------------------------
# factorization


def factorize_camera(P, mirror="plus", focal_sign="neg", tol=1e-8, all_branches=False):
    """Classification and accepted branches of one camera."""
    cam = CameraMatrix.from_array(P)
    if cam.kind is CameraKind.PINHOLE:
        return cam.kind, lc_factorize_pinhole(
            cam, mirror=mirror, focal_sign=focal_sign, tol=tol, all_branches=all_branches
        )
    return cam.kind, lc_factorize_affine(cam, mirror=mirror, tol=tol, all_branches=all_branches)


def factors_json(fac) -> dict:
    if isinstance(fac, PinholeLCFactors):
        return {"model": "pinhole", **fac.to_dict()}
    return {"model": "affine", **fac.to_dict()}


def factors_from_json(data: dict):
    data = dict(data)
    model = data.pop("model")
    if model == "pinhole":
        return PinholeLCFactors.from_dict(data)
    if model == "affine":
        return AffineLCFactors.from_dict(data)
    raise SceneError(f"unknown factor model {model!r}")


def residual_of(fac, P) -> float:
    if isinstance(fac, PinholeLCFactors):
        return reconstruction_residual(fac, P)
    return reconstruction_residual_affine(fac, P)


def _matrices_json(fac) -> dict:
    mats = compose(fac)[1] if isinstance(fac, PinholeLCFactors) else compose_affine(fac)[1]
    return {str(k): m.tolist() for k, m in mats.items()}


def _branch_json(fac, P) -> dict:
    return {
        "parameters": factors_json(fac),
        "factor_matrices": _matrices_json(fac),
        "residual": residual_of(fac, P),
    }


def factorization_report(scene: SceneFile, **options) -> tuple[dict, int]:
    """Per-camera report and the number of failed cameras."""
    all_branches = options.get("all_branches", False)
    cams = []
    failures = 0
    for c in scene.cameras:
        entry: dict = {"id": c.id}
        try:
            kind, branches = factorize_camera(c.P, **options)
        except LCError as exc:
            failures += 1
            try:
                entry["kind"] = homgeom.classify_camera(c.P).value
            except LCError:
                entry["kind"] = None
            entry["status"] = "error"
            entry["error"] = _error_obj(exc)
            cams.append(entry)
            continue
        entry["kind"] = kind.value
        entry["status"] = "ok"
        entry["branch_count"] = len(branches)
        entry.update(_branch_json(branches[0], c.P))
        if all_branches:
            entry["branches"] = [_branch_json(b, c.P) for b in branches]
        cams.append(entry)
    return {"cameras": cams}, failures


# --------------------------------------------------------------------------
# triangulation


def triangulation_report(
    scene: SceneFile, drop_parallel: bool = False, warn=None, backend=None, **options
) -> tuple[dict, int, int]:
    """Symmedian point per track.

    Returns ``(report, n_ok, n_failed)``; failed tracks carry an ``error``
    object unless dropped.
    """
    warn = warn or (lambda msg: None)
    factors = {}
    for c in scene.cameras:
        try:
            factors[c.id] = factorize_camera(c.P, **options)[1][0]
        except LCError as exc:
            warn(f"camera {c.id}: {exc}")

    pending = []  # (point_id, camera ids, lines)
    out: dict = {}
    failed = 0
    for t in scene.tracks:
        cids, lines = [], []
        err = None
        for o in t.observations:
            fac = factors.get(o.camera_id)
            if fac is None:
                continue
            try:
                lines.append(line_from_factors(fac, (o.u, o.v)))
            except LCError as exc:
                err = exc
                continue
            cids.append(o.camera_id)
        if len(lines) < 2:
            failed += 1
            if err is not None:
                out[t.point_id] = {"error": _error_obj(err)}
            else:
                out[t.point_id] = {
                    "error": {
                        "code": "insufficient_observations",
                        "message": f"{len(lines)} usable observation(s); need at least 2",
                    }
                }
            continue
        out[t.point_id] = None  # keep input order
        pending.append((t.point_id, cids, lines))

    results = symmedian_batch([p[2] for p in pending], backend=backend)
    n_ok = 0
    for (pid, cids, _), res in zip(pending, results):
        if isinstance(res, LCError):
            failed += 1
            if drop_parallel:
                warn(f"track {pid}: {res}; dropped")
                del out[pid]
            else:
                out[pid] = {"error": _error_obj(res)}
            continue
        n_ok += 1
        out[pid] = {
            "X": res.X_star.tolist(),
            "distances": {cid: float(d) for cid, d in zip(cids, res.distances)},
            "condition": {
                "smallest_singular_value": res.smallest_singular_value,
                "largest_singular_value": res.largest_singular_value,
            },
        }
    return out, n_ok, failed


def krt_report(scene: SceneFile) -> tuple[dict, int]:
    cams = []
    failures = 0
    for c in scene.cameras:
        try:
            dec = krt_decompose(c.P)
        except LCError as exc:
            failures += 1
            cams.append({"id": c.id, "status": "error", "error": _error_obj(exc)})
            continue
        cams.append({"id": c.id, "status": "ok", **dec.to_dict()})
    return {"cameras": cams}, failures


def truth_errors(report: dict, truth: dict) -> np.ndarray:
    """Euclidean errors of triangulated points that have ground truth."""
    pts = truth["points"]
    errs = [
        np.linalg.norm(np.asarray(v["X"]) - np.asarray(pts[pid]))
        for pid, v in report.items()
        if "X" in v and pid in pts
    ]
    return np.asarray(errs, dtype=float)


# --------------------------------------------------------------------------
# synthetic scenes

CAMERA_DISTANCE = 5.0


def _view_direction(rng) -> np.ndarray:
    """Unit direction from the scene origin towards a camera, z >= 0.2."""
    while True:
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        d[2] = abs(d[2])
        if d[2] >= 0.2:
            return d


def _random_pinhole(rng, d) -> PinholeLCFactors:
    c = CAMERA_DISTANCE * d
    n = d  # image plane faces the scene
    return PinholeLCFactors(
        f=-rng.uniform(500.0, 1000.0),
        sigma=rng.uniform(0.9, 1.1),
        tau=rng.uniform(-0.01, 0.01),
        u=rng.uniform(200.0, 400.0),
        v=rng.uniform(200.0, 300.0),
        alpha=rng.uniform(-math.pi, math.pi),
        xs=c[0],
        ys=c[1],
        zs=c[2],
        r=math.hypot(n[0], n[1]),
        theta=math.atan2(n[1], n[0]),
    )


def _random_affine(rng, d) -> AffineLCFactors:
    return AffineLCFactors(
        u=rng.uniform(200.0, 400.0),
        v=rng.uniform(200.0, 300.0),
        sigma=rng.uniform(150.0, 250.0),
        rho=rng.choice([-1.0, 1.0]) * rng.uniform(150.0, 250.0),
        tau=rng.uniform(-0.01, 0.01),
        alpha=rng.uniform(-math.pi, math.pi),
        r=math.hypot(d[0], d[1]),
        theta=math.atan2(d[1], d[0]),
    )


def synth_scene(
    seed: int = 0,
    n_cameras: int = 5,
    n_points: int = 20,
    camera_mix: str = "mixed",
    noise: float = 0.0,
) -> tuple[SceneFile, dict]:
    """Random scene from composed LC parameters plus its ground truth.

    Points are uniform in the unit cube centred at the origin; cameras sit
    5 units away. ``camera_mix="mixed"`` alternates pinhole and affine,
    starting with pinhole. Observations carry Gaussian pixel noise of
    standard deviation ``noise``.
    """
    if n_cameras < 2 or n_points < 1:
        raise ValueError("need n_cameras >= 2 and n_points >= 1")
    if noise < 0:
        raise ValueError("noise must be nonnegative")
    if camera_mix not in ("pinhole", "affine", "mixed"):
        raise ValueError(f"unknown camera mix {camera_mix!r}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(-0.5, 0.5, size=(n_points, 3))
    cams, facs = [], {}
    for i in range(n_cameras):
        pinhole = camera_mix == "pinhole" or (camera_mix == "mixed" and i % 2 == 0)
        d = _view_direction(rng)
        fac = _random_pinhole(rng, d) if pinhole else _random_affine(rng, d)
        P = compose(fac)[0] if pinhole else compose_affine(fac)[0]
        cid = f"cam{i}"
        cams.append(CameraEntry(cid, P))
        facs[cid] = fac
    Xh = np.hstack([points, np.ones((n_points, 1))])
    tracks = []
    for j in range(n_points):
        obs = []
        for c in cams:
            x = c.P @ Xh[j]
            uv = x[:2] / x[2] + noise * rng.normal(size=2)
            obs.append(Observation(c.id, float(uv[0]), float(uv[1])))
        tracks.append(Track(f"pt{j}", tuple(obs)))
    truth = {
        "seed": seed,
        "noise": noise,
        "points": {f"pt{j}": points[j].tolist() for j in range(n_points)},
        "cameras": {cid: factors_json(f) for cid, f in facs.items()},
    }
    return SceneFile(cams, tracks), truth
