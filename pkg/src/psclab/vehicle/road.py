"""Piecewise-constant-curvature road profiles in arc-length coordinates.

A road is a list of (length, curvature) segments. Curvature rho(s) is looked
up by arc length; beyond the last segment the road runs out straight (rho=0)
so that safety rollouts may look past the finish line without error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RoadProfile:
    segments: tuple[tuple[float, float], ...]  # (length m, curvature 1/m)
    e_bound: float = 5.0                       # drawn lane half-width, plots only

    _breaks: np.ndarray = field(init=False, repr=False, compare=False)
    _rhos: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.segments:
            raise ValueError("road needs at least one segment")
        lengths = np.array([seg[0] for seg in self.segments], dtype=float)
        rhos = np.array([seg[1] for seg in self.segments], dtype=float)
        if np.any(lengths <= 0):
            raise ValueError("segment lengths must be positive")
        if not np.all(np.isfinite(rhos)):
            raise ValueError("curvatures must be finite")
        object.__setattr__(self, "_breaks", np.cumsum(lengths))
        object.__setattr__(self, "_rhos", np.append(rhos, 0.0))  # straight run-out

    @property
    def length(self) -> float:
        return float(self._breaks[-1])

    def curvature(self, s) -> np.ndarray | float:
        """rho(s); total on [0, length], 0 beyond, first segment before 0."""
        s_arr = np.asarray(s, dtype=float)
        idx = np.searchsorted(self._breaks, np.maximum(s_arr, 0.0), side="right")
        out = self._rhos[idx]
        return float(out) if np.isscalar(s) or s_arr.ndim == 0 else out

    def centerline(self, ds: float = 0.5) -> np.ndarray:
        """(N, 4) array of [s, x, y, heading] global centerline samples."""
        s_grid = np.arange(0.0, self.length + ds, ds)
        x = np.zeros_like(s_grid)
        y = np.zeros_like(s_grid)
        th = np.zeros_like(s_grid)
        for i in range(1, len(s_grid)):
            h = s_grid[i] - s_grid[i - 1]
            rho = self.curvature(s_grid[i - 1])
            th[i] = th[i - 1] + rho * h
            th_mid = 0.5 * (th[i - 1] + th[i])
            x[i] = x[i - 1] + h * np.cos(th_mid)
            y[i] = y[i - 1] + h * np.sin(th_mid)
        return np.column_stack([s_grid, x, y, th])

    def frame_at(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Interpolated (x, y, heading) of the centerline at arc length s."""
        line = self.centerline()
        s = np.asarray(s, dtype=float)
        x = np.interp(s, line[:, 0], line[:, 1])
        y = np.interp(s, line[:, 0], line[:, 2])
        th = np.interp(s, line[:, 0], line[:, 3])
        return x, y, th


def default_road(e_bound: float = 5.0) -> RoadProfile:
    """60 m straight approach, 120 m arc at rho = 1/50, 60 m exit."""
    return RoadProfile(segments=((60.0, 0.0), (120.0, 0.02), (60.0, 0.0)), e_bound=e_bound)
