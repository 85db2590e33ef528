"""Hadamard bias patterns, aperture encoding and decoding of channel data,
and subset selection for reduced-transmit-count imaging.

Encoded acquisitions drive every column on every transmit with a +1 or -1
bias sign taken from a row of a Hadamard matrix. Multiplying the recorded
transmits by the transposed matrix (and dividing by the order) recovers the
data each single column would have produced on its own, which is what the
synthetic-aperture beamformer consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HadamardMatrix",
    "RfDataSet",
    "hadamard",
    "bias_pattern",
    "encode",
    "decode",
    "select_uforces_subset",
]

ENCODED = "encoded"
DECODED = "decoded"


@dataclass(frozen=True)
class HadamardMatrix:
    """Sylvester-type Hadamard matrix of +-1 integers."""

    order: int
    entries: np.ndarray

    def __post_init__(self):
        e = self.entries
        if e.shape != (self.order, self.order):
            raise ValueError(f"entries shape {e.shape} does not match order {self.order}")
        if not np.all(np.abs(e) == 1):
            raise ValueError("entries must be +1 or -1")


def hadamard(order: int) -> HadamardMatrix:
    """Sylvester construction: H(2n) = [[H, H], [H, -H]].

    ``order`` must be a power of two (1 is allowed). The first row and
    first column are all +1, and H @ H.T equals order * I exactly in
    integer arithmetic.
    """
    if order < 1 or (order & (order - 1)) != 0:
        raise ValueError(f"order must be a power of two, got {order}")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    return HadamardMatrix(order, h)


def bias_pattern(h: HadamardMatrix, transmit_index: int) -> np.ndarray:
    """Per-column bias signs (+1/-1) used on the given transmit."""
    if not (0 <= transmit_index < h.order):
        raise IndexError(f"transmit_index {transmit_index} out of range [0, {h.order})")
    return h.entries[transmit_index].copy()


@dataclass
class RfDataSet:
    """Time-sampled channel data, indexed (plane, transmit, channel, sample).

    ``state`` is "encoded" while transmits are Hadamard combinations and
    "decoded" once each transmit axis entry corresponds to one effective
    transmitting column. ``column_indices``, when set on a decoded dataset,
    maps each transmit axis entry to the physical column it represents;
    None means the identity mapping (transmit j is column j).
    """

    data: np.ndarray
    sampling_rate: float
    state: str = ENCODED
    column_indices: tuple[int, ...] | None = field(default=None)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 4:
            raise ValueError(f"data must be 4-D (plane, transmit, channel, sample), got ndim={d.ndim}")
        if min(d.shape) < 1:
            raise ValueError(f"all dimensions must be >= 1, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise ValueError("data contains non-finite samples")
        if self.sampling_rate <= 0:
            raise ValueError(f"sampling_rate must be positive, got {self.sampling_rate}")
        if self.state not in (ENCODED, DECODED):
            raise ValueError(f"state must be '{ENCODED}' or '{DECODED}', got {self.state!r}")
        if self.column_indices is not None:
            if self.state != DECODED:
                raise ValueError("column_indices only applies to decoded data")
            if len(self.column_indices) != d.shape[1]:
                raise ValueError("column_indices length must match the transmit axis")
        self.data = np.ascontiguousarray(d)

    @property
    def planes(self) -> int:
        return self.data.shape[0]

    @property
    def transmits(self) -> int:
        return self.data.shape[1]

    @property
    def receive_channels(self) -> int:
        return self.data.shape[2]

    @property
    def samples(self) -> int:
        return self.data.shape[3]


def encode(per_column: np.ndarray, h: HadamardMatrix) -> np.ndarray:
    """Form encoded transmits from per-column data: out[t] = sum_j H[t, j] * X[j].

    ``per_column`` has the column index on axis 1 of a
    (plane, column, channel, sample) array; the result replaces that axis
    with the transmit index.
    """
    x = np.asarray(per_column, dtype=np.float64)
    if x.ndim != 4 or x.shape[1] != h.order:
        raise ValueError(
            f"per-column data must be (plane, {h.order}, channel, sample), got {x.shape}"
        )
    hm = h.entries.astype(np.float64)
    # optimize=False keeps the reduction inside numpy with a fixed
    # summation order, so results are bit-reproducible.
    return np.einsum("tj,pjcn->ptcn", hm, x, optimize=False)


def decode(rf: RfDataSet, h: HadamardMatrix) -> RfDataSet:
    """Recover per-column data: decoded[j] = (1/order) * sum_t H[t, j] * encoded[t].

    Decoded transmit j is the effective single-column-j transmit. Input must
    be encoded and its transmit count must equal the Hadamard order.
    """
    if rf.state != ENCODED:
        raise ValueError(f"decode expects encoded data, got state {rf.state!r}")
    if rf.transmits != h.order:
        raise ValueError(
            f"dimension mismatch: {rf.transmits} transmits vs Hadamard order {h.order}"
        )
    hm = h.entries.astype(np.float64)
    out = np.einsum("tj,ptcn->pjcn", hm, rf.data, optimize=False) / h.order
    return RfDataSet(out, rf.sampling_rate, state=DECODED)


def uforces_column_indices(n_columns: int, k: int) -> np.ndarray:
    """Effective column indices retained for a k-transmit reduced scheme.

    k transmits yield k - 1 usable synthetic-aperture columns. The columns
    are spread evenly across the aperture by centering k - 1 slots over
    [0, n): slot i sits at (i + 0.5) * n / (k - 1) - 0.5, rounded to the
    nearest index with ties broken toward the lower index.
    """
    if not (2 <= k <= n_columns):
        raise ValueError(f"k must be in [2, {n_columns}], got {k}")
    m = k - 1
    pos = (np.arange(m) + 0.5) * (n_columns / m) - 0.5
    idx = np.ceil(pos - 0.5).astype(np.int64)  # round half down
    return np.clip(idx, 0, n_columns - 1)


def select_uforces_subset(decoded: RfDataSet, k: int) -> RfDataSet:
    """Keep the k - 1 evenly spaced decoded transmits a k-transmit
    reduced acquisition would have provided.

    Returns a new decoded dataset whose ``column_indices`` records which
    physical columns the retained transmits correspond to.
    """
    if decoded.state != DECODED:
        raise ValueError("subset selection operates on decoded data")
    idx = uforces_column_indices(decoded.transmits, k)
    base = decoded.column_indices or tuple(range(decoded.transmits))
    cols = tuple(base[i] for i in idx)
    return RfDataSet(
        decoded.data[:, idx],
        decoded.sampling_rate,
        state=DECODED,
        column_indices=cols,
    )
