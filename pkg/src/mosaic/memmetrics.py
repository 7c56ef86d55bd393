"""Membership-inference scores, ROC AUC, calibration curves and the
exact-duplicate-equivalent computation.

Log-probabilities are in nats. Score orientation is explicit: loss and
ratio scores are lower for members, min-k is higher for members.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distances import levenshtein


class CurveExtensionRequired(ValueError):
    """The observed AUC exceeds the calibration curve's maximum; measure
    more exact-duplicate points before interpolating."""


@dataclass(frozen=True)
class ScoreRecord:
    canary_id: str
    member: bool
    logprobs_target: tuple
    logprobs_ref: Optional[tuple] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "logprobs_target", tuple(float(x) for x in self.logprobs_target))
        if self.logprobs_ref is not None:
            object.__setattr__(self, "logprobs_ref", tuple(float(x) for x in self.logprobs_ref))


@dataclass
class CalibrationCurve:
    points: list  # (nu, phi), nu strictly increasing

    def __post_init__(self):
        pts = [(float(n), float(p)) for n, p in self.points]
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("curve nu values must be strictly increasing")
        if any(not 0 <= p <= 1 for _, p in pts):
            raise ValueError("phi values must lie in [0, 1]")
        self.points = pts


@dataclass(frozen=True)
class RhoResult:
    phi_tilde: float
    nu_eq: float
    rho: float
    n_dup: int


def loss_score(rec: ScoreRecord) -> float:
    """Negative mean target log-probability; lower = more member-like."""
    if not rec.logprobs_target:
        raise ValueError("empty logprobs")
    return -float(np.mean(rec.logprobs_target))


def ratio_score(rec: ScoreRecord) -> float:
    """Target loss over reference-model loss; lower = more member-like."""
    if rec.logprobs_ref is None:
        raise ValueError("record has no reference log-probabilities")
    ref_loss = -float(np.mean(rec.logprobs_ref))
    if ref_loss == 0:
        raise ValueError("reference loss is zero")
    return loss_score(rec) / ref_loss


def mink_score(rec: ScoreRecord, k_percent: float = 0.20) -> float:
    """Mean of the lowest k% log-probabilities; higher = more member-like."""
    if not rec.logprobs_target:
        raise ValueError("empty logprobs")
    L = len(rec.logprobs_target)
    E = max(1, int(np.floor(k_percent * L)))
    lowest = sorted(rec.logprobs_target)[:E]
    return float(np.mean(lowest))


SCORE_FUNCTIONS = {
    "loss": (loss_score, "lower_is_member"),
    "ratio": (ratio_score, "lower_is_member"),
    "mink": (mink_score, "higher_is_member"),
}


def roc_auc(records: Sequence[tuple], orientation: str) -> float:
    """Probability a random member outranks a random non-member.

    `records` is (score, member) pairs; ties count one half (midranks).
    """
    if orientation not in ("lower_is_member", "higher_is_member"):
        raise ValueError(f"unknown orientation {orientation!r}")
    scores = np.asarray([s for s, _ in records], dtype=float)
    labels = np.asarray([bool(m) for _, m in records])
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one member and one non-member")
    if orientation == "lower_is_member":
        scores = -scores
    # midranks
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=float)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    rank_sum = float(ranks[labels].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def smooth_curve(curve: CalibrationCurve, window: int = 3) -> CalibrationCurve:
    """Centered moving average; the window is clipped at the curve ends."""
    if not curve.points:
        raise ValueError("empty curve")
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd size")
    half = window // 2
    pts = curve.points
    smoothed = []
    for i, (nu, _) in enumerate(pts):
        lo = max(0, i - half)
        hi = min(len(pts), i + half + 1)
        smoothed.append((nu, float(np.mean([p for _, p in pts[lo:hi]]))))
    return CalibrationCurve(points=smoothed)


def nu_eq(curve: CalibrationCurve, phi_tilde: float) -> float:
    """Invert the calibration curve by piecewise-linear interpolation.

    Scans from low nu for the first bracketing segment. Raises
    CurveExtensionRequired when phi_tilde exceeds the curve maximum; a flat
    bracketing segment returns the segment midpoint with a warning.
    """
    pts = curve.points
    if len(pts) < 2:
        raise ValueError("curve needs at least 2 points")
    for nu_val, phi_val in pts:
        if phi_tilde == phi_val:
            return float(nu_val)
    if phi_tilde > max(p for _, p in pts):
        raise CurveExtensionRequired(
            f"phi_tilde={phi_tilde} above curve maximum; extend the curve"
        )
    for (n1, p1), (n2, p2) in zip(pts, pts[1:]):
        lo, hi = min(p1, p2), max(p1, p2)
        if lo <= phi_tilde <= hi:
            if p1 == p2:
                warnings.warn(
                    "flat calibration segment: returning midpoint", RuntimeWarning
                )
                return (n1 + n2) / 2
            return n1 + (phi_tilde - p1) / (p2 - p1) * (n2 - n1)
    raise ValueError(f"phi_tilde={phi_tilde} not bracketable on the curve")


def rho(nu_eq_value: float, n_dup: int) -> float:
    """(nu_eq - 1) / (n_dup - 1): one duplicate is always the exact copy."""
    if n_dup < 2:
        raise ValueError("n_dup must be >= 2")
    return (nu_eq_value - 1) / (n_dup - 1)


def compute_rho(
    records: Sequence[ScoreRecord],
    metric: str,
    curve: CalibrationCurve,
    n_dup: int,
    k_percent: float = 0.20,
    smooth_window: int = 3,
) -> RhoResult:
    """Full pipeline: score records, AUC, smoothed-curve inversion, rho."""
    if metric not in SCORE_FUNCTIONS:
        raise ValueError(f"unknown metric {metric!r}")
    fn, orientation = SCORE_FUNCTIONS[metric]
    scored = [
        (fn(r, k_percent) if metric == "mink" else fn(r), r.member) for r in records
    ]
    phi_tilde = roc_auc(scored, orientation)
    smoothed = smooth_curve(curve, smooth_window)
    nu = nu_eq(smoothed, phi_tilde)
    return RhoResult(phi_tilde=phi_tilde, nu_eq=nu, rho=rho(nu, n_dup), n_dup=n_dup)


def distance_rho_table(experiments: Sequence[tuple]) -> list:
    """(mean Levenshtein distance to the reference, rho) per experiment.

    The mean is over the perturbed duplicates (the exact copy excluded);
    an all-exact set maps to distance 0.
    """
    rows = []
    for dupset, rho_result in experiments:
        ref = dupset.canary.ref
        perturbed = dupset.dups[1:]
        if perturbed:
            mean_d = float(np.mean([levenshtein(ref, d) for d in perturbed]))
        else:
            mean_d = 0.0
        rows.append((mean_d, rho_result.rho))
    return rows


def load_score_records(path) -> list:
    """Read score JSONL: {canary_id, member, logprobs_target, logprobs_ref?}."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out.append(
                ScoreRecord(
                    canary_id=str(obj["canary_id"]),
                    member=bool(obj["member"]),
                    logprobs_target=tuple(obj["logprobs_target"]),
                    logprobs_ref=tuple(obj["logprobs_ref"])
                    if obj.get("logprobs_ref") is not None
                    else None,
                    metadata={
                        k: v
                        for k, v in obj.items()
                        if k not in {"canary_id", "member", "logprobs_target", "logprobs_ref"}
                    },
                )
            )
    return out


def load_calibration(path) -> CalibrationCurve:
    """Read calibration JSON: {points: [{nu, phi}]}."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    return CalibrationCurve(points=[(p["nu"], p["phi"]) for p in obj["points"]])
