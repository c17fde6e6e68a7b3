"""
Regime maps of the antiplane operator over the (beta, gamma) plane, with CSV
and SVG export.

SVG layout: one ``<g class="region" id="region-XX">`` per regime holding
run-length ``<rect>`` cells, two ``<polyline class="boundary">`` overlays
(beta = 0 for gamma > 0, and gamma = -sqrt(beta)) and one ``<text>`` label per
regime. Colors:

    EI  #4c72b0   EC  #55a868   H  #c44e52   P  #8172b2
"""
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Union
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
from scipy import ndimage

from cosserat_stability.antiplane import REGIMES, regime_labels
from cosserat_stability.utils import atomic_write

logger = logging.getLogger(__name__)

DEFAULT_BETA_RANGE = (-2.0, 3.0)
DEFAULT_GAMMA_RANGE = (-3.0, 3.0)
DEFAULT_RESOLUTION = 600

COLORS = {"EI": "#4c72b0", "EC": "#55a868", "H": "#c44e52", "P": "#8172b2"}
BOUNDARY_NAMES = ("EI/P", "EC/H")


@dataclass(frozen=True)
class RegimeMap:
    betas: np.ndarray
    gammas: np.ndarray
    # Shape (len(gammas), len(betas)), gamma ascending along axis 0
    labels: np.ndarray
    # Name -> (M, 2) array of (beta, gamma) points
    boundaries: dict

    @property
    def shape(self) -> tuple:
        return self.labels.shape

    def as_frame(self) -> pd.DataFrame:
        bb, gg = np.meshgrid(self.betas, self.gammas)
        return pd.DataFrame(
            {
                "beta": bb.ravel(),
                "gamma": gg.ravel(),
                "label": self.labels.ravel().astype(str),
            }
        )

    def mask(self, regime: str) -> np.ndarray:
        return self.labels == regime

    def connected_regions(self) -> dict:
        """Number of 4-connected components per regime present in the map."""
        counts = {}
        for regime in REGIMES:
            mask = self.mask(regime)
            if mask.any():
                _, counts[regime] = ndimage.label(mask)
        return counts


def _check_range(name: str, value) -> tuple[float, float]:
    lo, hi = (float(v) for v in value)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError(f"{name} must be finite, got {value}")
    if hi <= lo:
        raise ValueError(
            f"{name} = ({lo}, {hi}) has zero or negative extent"
        )
    return lo, hi


def _boundary_polylines(beta_range, gamma_range, samples: int) -> dict:
    b_lo, b_hi = beta_range
    g_lo, g_hi = gamma_range
    lines = {}

    if b_lo <= 0 <= b_hi and g_hi > 0:
        g = np.linspace(max(g_lo, 0.0), g_hi, samples)
        lines["EI/P"] = np.stack([np.zeros_like(g), g], axis=1)
    else:
        lines["EI/P"] = np.empty((0, 2))

    b = np.linspace(max(b_lo, 0.0), b_hi, samples) if b_hi > 0 else []
    b = np.asarray(b, dtype=float)
    g = -np.sqrt(b)
    inside = (g >= g_lo) & (g <= g_hi)
    lines["EC/H"] = np.stack([b[inside], g[inside]], axis=1)
    return lines


def regime_map(
    beta_range=DEFAULT_BETA_RANGE,
    gamma_range=DEFAULT_GAMMA_RANGE,
    resolution: Union[int, tuple] = DEFAULT_RESOLUTION,
) -> RegimeMap:
    """
    Regime label at every node of a uniform (beta, gamma) grid.

    ``resolution`` is the number of nodes per axis, or a (n_beta, n_gamma)
    pair.
    """
    beta_range = _check_range("beta_range", beta_range)
    gamma_range = _check_range("gamma_range", gamma_range)
    if np.isscalar(resolution):
        n_beta = n_gamma = int(resolution)
    else:
        n_beta, n_gamma = (int(r) for r in resolution)
    if min(n_beta, n_gamma) < 2:
        raise ValueError(
            f"Resolution must be at least 2 per axis, got {resolution}"
        )
    betas = np.linspace(*beta_range, n_beta)
    gammas = np.linspace(*gamma_range, n_gamma)
    bb, gg = np.meshgrid(betas, gammas)
    labels, _ = regime_labels(bb, gg)
    logger.debug(
        "Regime map %dx%d over beta %s, gamma %s",
        n_beta,
        n_gamma,
        beta_range,
        gamma_range,
    )
    return RegimeMap(
        betas=betas,
        gammas=gammas,
        labels=labels.astype(str),
        boundaries=_boundary_polylines(
            beta_range, gamma_range, max(n_beta, n_gamma)
        ),
    )


def write_csv(rmap: RegimeMap, path: Union[str, Path]) -> Path:
    text = rmap.as_frame().to_csv(index=False, float_format="%.12g")
    return atomic_write(path, text)


def _runs(row: np.ndarray):
    """(start, length, value) runs of equal labels along one row."""
    start = 0
    for i in range(1, len(row) + 1):
        if i == len(row) or row[i] != row[start]:
            yield start, i - start, row[start]
            start = i


def to_svg(rmap: RegimeMap, cell: int = 1) -> str:
    n_gamma, n_beta = rmap.shape
    width, height = n_beta * cell, n_gamma * cell
    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "width": str(width),
            "height": str(height),
            "viewBox": f"0 0 {width} {height}",
        },
    )
    groups = {
        regime: ET.SubElement(
            svg,
            "g",
            {
                "class": "region",
                "id": f"region-{regime}",
                "fill": COLORS[regime],
            },
        )
        for regime in REGIMES
    }
    # Highest gamma on top
    for r, row in enumerate(rmap.labels[::-1]):
        for start, length, label in _runs(row):
            ET.SubElement(
                groups[label],
                "rect",
                {
                    "x": str(start * cell),
                    "y": str(r * cell),
                    "width": str(length * cell),
                    "height": str(cell),
                },
            )

    b_lo, b_hi = rmap.betas[0], rmap.betas[-1]
    g_lo, g_hi = rmap.gammas[0], rmap.gammas[-1]

    def to_px(points):
        x = (points[:, 0] - b_lo) / (b_hi - b_lo) * width
        y = (g_hi - points[:, 1]) / (g_hi - g_lo) * height
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(x, y))

    for name in BOUNDARY_NAMES:
        ET.SubElement(
            svg,
            "polyline",
            {
                "class": "boundary",
                "id": f"boundary-{name.replace('/', '-')}",
                "points": to_px(rmap.boundaries[name]),
                "fill": "none",
                "stroke": "black",
                "stroke-width": str(max(1, cell)),
            },
        )
    for i, regime in enumerate(REGIMES):
        text = ET.SubElement(
            svg,
            "text",
            {"class": "label", "x": "4", "y": str(14 * (i + 1))},
        )
        text.text = regime
    return ET.tostring(svg, encoding="unicode")


def write_svg(
    rmap: RegimeMap, path: Union[str, Path], cell: int = 1
) -> Path:
    return atomic_write(path, to_svg(rmap, cell))
