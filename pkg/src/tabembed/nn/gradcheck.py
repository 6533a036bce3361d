"""Central finite-difference gradient checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from tabembed.nn.core import Parameter


@dataclass
class GradCheckReport:
    max_rel_error: float
    n_checked: int
    tolerance: float
    floor: float = 1e-8
    worst: list[tuple[str, tuple[int, ...], float, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance

    def describe(self) -> str:
        lines = [
            f"max relative error {self.max_rel_error:.3e} over {self.n_checked} coordinates "
            f"(tol {self.tolerance:g}, denominator floor {self.floor:.2e})"
        ]
        for name, idx, analytic, numeric, err in self.worst:
            lines.append(f"  {name}{list(idx)}: analytic={analytic:.6e} numeric={numeric:.6e} rel={err:.3e}")
        return "\n".join(lines)


class GradCheckFailure(AssertionError):
    def __init__(self, report: GradCheckReport) -> None:
        super().__init__(report.describe())
        self.report = report


def relative_error(analytic: float, numeric: float, floor: float = 1e-8) -> float:
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def grad_check(
    params: Sequence[Parameter],
    loss_and_backward: Callable[[], float],
    loss_only: Callable[[], float] | None = None,
    tolerance: float = 1e-6,
    h: float = 1e-5,
    max_coords: int = 1000,
    seed: int = 0,
    n_worst: int = 5,
    raise_on_failure: bool = False,
) -> GradCheckReport:
    """Compare analytic gradients with central differences.

    ``loss_and_backward`` must zero gradients, run forward and backward, and
    return the loss; ``loss_only`` (defaults to the same callable) evaluates
    the loss for perturbed values. Parameters must be float64. When more than
    ``max_coords`` coordinates exist a seeded random subset is checked.

    The relative error is ``|a - n| / max(|a| + |n|, floor)``. The floor is
    the larger of 1e-8 and ``noise / tolerance``, where ``noise = 4 eps
    (|L| + 1) / h`` bounds the rounding error of the central difference. A
    discrepancy within that rounding error therefore never exceeds the
    tolerance, which matters for coordinates whose true gradient is zero.
    """
    loss_only = loss_only or loss_and_backward
    for p in params:
        assert p.value.dtype == np.float64, f"gradient checks need float64 parameters ({p.name})"
    base_loss = float(loss_and_backward())
    noise = 4.0 * np.finfo(np.float64).eps * (abs(base_loss) + 1.0) / h
    floor = max(1e-8, noise / tolerance)
    analytic = [p.grad.copy() for p in params]
    coords = [(i, idx) for i, p in enumerate(params) for idx in np.ndindex(*p.value.shape)]
    if len(coords) > max_coords:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[j] for j in sorted(pick)]
    results = []
    for i, idx in coords:
        p = params[i]
        orig = p.value[idx]
        p.value[idx] = orig + h
        up = loss_only()
        p.value[idx] = orig - h
        down = loss_only()
        p.value[idx] = orig
        numeric = (up - down) / (2.0 * h)
        a = float(analytic[i][idx])
        results.append((p.name, tuple(int(v) for v in idx), a, numeric, relative_error(a, numeric, floor)))
    results.sort(key=lambda r: -r[4])
    worst = results[0][4] if results else 0.0
    report = GradCheckReport(worst, len(results), tolerance, floor, results[:n_worst])
    if raise_on_failure and not report.passed:
        raise GradCheckFailure(report)
    return report
