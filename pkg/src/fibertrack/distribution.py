"""Fiber-component distributions: normalized histograms on a common spectrum.

The count-based distribution (component count per bin over the total) is the
default because component counts carry the topology; the measure-based one
(slab volume per bin over total volume) is available as an alternative.
Distributions from different spectra with equal bin widths can be aligned by
zero padding onto the union lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extract import FiberComponentHistogram
from .quantize import RangeQuantization

__all__ = ["FiberDistribution", "to_distribution", "align_distributions"]

PMF_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiberDistribution:
    """Dense probability mass function over spec(R), with singular flags."""

    quantization: RangeQuantization
    pmf: np.ndarray  # float64, shape = quantization.shape
    singular: np.ndarray  # bool, same shape
    provenance: str  # "count" or "measure"

    def __post_init__(self):
        shape = self.quantization.shape
        if self.pmf.shape != shape or self.singular.shape != shape:
            raise ValueError(f"pmf/flags shape must be {shape}")
        if (self.pmf < 0).any():
            raise ValueError("pmf entries must be non-negative")
        total = float(self.pmf.sum())
        if abs(total - 1.0) > PMF_SUM_TOL:
            raise ValueError(f"pmf sums to {total!r}, expected 1 within {PMF_SUM_TOL}")
        if self.provenance not in ("count", "measure"):
            raise ValueError(f"unknown provenance {self.provenance!r}")


def to_distribution(hist: FiberComponentHistogram, mode: str = "count") -> FiberDistribution:
    """Normalize a histogram into a pmf; absent bins stay zero, flags carry over."""
    if mode == "count":
        total = hist.total_count
        raw = hist.counts.astype(np.float64)
    elif mode == "measure":
        total = hist.total_measure
        raw = hist.measures
    else:
        raise ValueError(f"mode must be 'count' or 'measure', got {mode!r}")
    if total <= 0:
        raise ValueError(f"cannot normalize: total {mode} is {total}")
    return FiberDistribution(
        quantization=hist.quantization,
        pmf=raw / total,
        singular=hist.singular.copy(),
        provenance=mode,
    )


def _union_lattice(ea: np.ndarray, eb: np.ndarray):
    """Union edge sequence of two same-width uniform lattices, plus offsets."""
    wa = ea[1] - ea[0]
    wb = eb[1] - eb[0]
    w = wa
    if abs(wa - wb) > 1e-9 * max(abs(wa), abs(wb)):
        raise ValueError(f"incompatible bin widths {wa} vs {wb}")
    shift = (eb[0] - ea[0]) / w
    if abs(shift - round(shift)) > 1e-6:
        raise ValueError(
            f"bin lattices are offset by a non-integer number of widths ({shift})"
        )
    shift = int(round(shift))
    # anchor at the lower first edge so both embeddings land on whole bins
    if shift >= 0:
        anchor, oa, ob = ea[0], 0, shift
    else:
        anchor, oa, ob = eb[0], -shift, 0
    ma = ea.shape[0] - 1
    mb = eb.shape[0] - 1
    m = max(oa + ma, ob + mb)
    edges = anchor + w * np.arange(m + 1)
    # keep exact edge values wherever an input lattice provides them
    edges[oa : oa + ma + 1] = ea
    edges[ob : ob + mb + 1] = eb
    return edges, oa, ob


def align_distributions(
    a: FiberDistribution, b: FiberDistribution
) -> tuple[FiberDistribution, FiberDistribution]:
    """Re-index both distributions onto the per-field union spectrum.

    Missing bins are zero-filled; pmf values are not renormalized.  Requires
    equal bin widths per field, with lattices coinciding where they overlap.
    """
    if a.quantization.n_fields != b.quantization.n_fields:
        raise ValueError("distributions have different field counts")
    same = all(
        np.array_equal(ea, eb) for ea, eb in zip(a.quantization.edges, b.quantization.edges)
    )
    if same:
        return a, b

    edges = []
    offs_a = []
    offs_b = []
    for ea, eb in zip(a.quantization.edges, b.quantization.edges):
        e, oa, ob = _union_lattice(np.asarray(ea), np.asarray(eb))
        edges.append(e)
        offs_a.append(oa)
        offs_b.append(ob)
    quant = RangeQuantization(edges=tuple(edges))

    def embed(dist: FiberDistribution, offs) -> FiberDistribution:
        pmf = np.zeros(quant.shape)
        flags = np.zeros(quant.shape, dtype=bool)
        sl = tuple(
            slice(o, o + s) for o, s in zip(offs, dist.quantization.shape)
        )
        pmf[sl] = dist.pmf
        flags[sl] = dist.singular
        return FiberDistribution(quant, pmf, flags, dist.provenance)

    return embed(a, offs_a), embed(b, offs_b)
