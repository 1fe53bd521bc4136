"""Noise factor and OTOC bound from state-averaged teleportation data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import DomainError, IncompleteCellError
from .protocol import INPUT_LABELS, RunResult, SweepRow

BOUND_CAVEAT = (
    "otoc_bound assumes extrinsic decoherence is negligible (coherent errors dominate); "
    "incoherent noise channels were active in this run"
)


@dataclass(frozen=True)
class StateAverages:
    """Uniform averages over the six input states."""

    mean_P: float
    mean_FP: float
    d_A: int = 2

    def __post_init__(self):
        tol = 1e-12
        if not (-tol <= self.mean_FP <= self.mean_P + tol and self.mean_P <= 1 + tol):
            raise DomainError(
                f"need 0 <= mean_FP <= mean_P <= 1, got mean_FP={self.mean_FP}, mean_P={self.mean_P}"
            )


def noise_factor(avgs: StateAverages) -> float:
    """``d_A * ((d_A + 1) <F P> - <P>)``: 1 when ideal, ``1/d_A**2`` when fully decohered."""
    d = avgs.d_A
    return d * ((d + 1) * avgs.mean_FP - avgs.mean_P)


def otoc_bound(mean_P: float, noise_factor: float) -> float:
    """Upper bound ``4 <P>^2 / N^2`` on the error-free averaged OTOC."""
    if noise_factor <= 0:
        raise DomainError(f"OTOC bound undefined for noise factor {noise_factor} <= 0")
    return 4 * mean_P**2 / noise_factor**2


def fp_product(result: RunResult) -> float:
    # an impossible outcome contributes nothing to <F P>
    return result.fidelity * result.p_success if result.fidelity_defined else 0.0


def aggregate(rows: Iterable[SweepRow | tuple]) -> StateAverages:
    """Average one (scrambler, pair, noise) cell over the six input states.

    ``rows`` may be :class:`SweepRow` objects or ``(label, RunResult)`` pairs.
    """
    by_label: dict[str, RunResult] = {}
    for row in rows:
        if isinstance(row, SweepRow):
            if not row.ok:
                raise DomainError(f"cannot aggregate a failed run: {row.error}")
            label, result = row.config.input.label, row.result
        else:
            label, result = row
            label = getattr(label, "label", label)
        if label in by_label:
            raise DomainError(f"input state {label!r} appears twice in one cell")
        by_label[label] = result
    missing = set(INPUT_LABELS) - set(by_label)
    if missing:
        raise IncompleteCellError(missing)
    n = len(INPUT_LABELS)
    mean_p = sum(by_label[lbl].p_success for lbl in INPUT_LABELS) / n
    mean_fp = sum(fp_product(by_label[lbl]) for lbl in INPUT_LABELS) / n
    return StateAverages(mean_P=mean_p, mean_FP=mean_fp)
