"""Slow, direct re-implementation of the single-column acquisition model.

Used as an independent cross-check for the fast simulator: every transmit
fires one column at a time (no encoding), every sample is evaluated with
plain cosine/Gaussian calls, and element pairs are walked with explicit
loops over transmit column, scatterer, and receive column.
"""

import numpy as np

from rcbeam import FocalConfig, elevational_focus_delays, element_position


def reference_pulse(t, spec):
    t = np.asarray(t, dtype=np.float64)
    out = spec.amplitude * np.exp(-(t * t) / (2.0 * spec.sigma ** 2)) * np.cos(
        2.0 * np.pi * spec.center_frequency * t
    )
    return np.where(np.abs(t) <= spec.support, out, 0.0)


def reference_single_column_data(geom, spec, phantom, plane_y, focal_depth, n_samples):
    """Per-column channel data for one elevational plane, brute force."""
    fs = geom.sampling_rate
    c = geom.sound_speed
    delays = elevational_focus_delays(geom, FocalConfig(focal_depth, plane_y))
    t = np.arange(n_samples) / fs
    eps = geom.pitch / 10.0

    col_x = np.array([element_position(geom, 0, j).x for j in range(geom.n_cols)])
    row_y = np.array([element_position(geom, i, 0).y for i in range(geom.n_rows)])

    out = np.zeros((geom.n_cols, geom.n_cols, n_samples))
    for jt in range(geom.n_cols):
        for s in range(phantom.positions.shape[0]):
            px, py, pz = phantom.positions[s]
            d_tx = np.sqrt((col_x[jt] - px) ** 2 + (row_y - py) ** 2 + pz ** 2)
            for jr in range(geom.n_cols):
                d_rx = np.sqrt((col_x[jr] - px) ** 2 + (row_y - py) ** 2 + pz ** 2)
                tau = delays[:, None] + (d_tx[:, None] + d_rx[None, :]) / c
                w = 1.0 / (np.maximum(eps, d_tx[:, None]) * np.maximum(eps, d_rx[None, :]))
                spread = phantom.amplitudes[s] * w.ravel()
                out[jt, jr] += spread @ reference_pulse(
                    t[None, :] - tau.ravel()[:, None], spec
                )
    return out
