"""Decibel conversions, kept at the interfaces; internals stay linear."""

from __future__ import annotations

import numpy as np

__all__ = ["db_to_linear", "linear_to_db", "dbm_to_watts", "watts_to_dbm"]


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def dbm_to_watts(p_dbm):
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(p_watts):
    return 10.0 * np.log10(p_watts) + 30.0
