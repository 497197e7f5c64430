"""Permanent-based amplitudes, computed from a transfer matrix alone.

Shares no expansion code with :mod:`twophoton.circuit`; agreement between
the two is the main correctness check of the simulator.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .elements import LinearElement
from .fock import FockDistribution


def permanent(matrix) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula with Gray-code updates."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    chosen = [False] * n
    # walk subsets of columns in Gray-code order, one column flips per step
    for k in range(1, 2 ** n):
        j = (k & -k).bit_length() - 1
        if chosen[j]:
            row_sums -= a[:, j]
        else:
            row_sums += a[:, j]
        chosen[j] = not chosen[j]
        size = sum(chosen)
        total += (-1) ** size * np.prod(row_sums)
    return complex((-1) ** n * total)


def permanent_naive(matrix) -> complex:
    """Sum over all permutations; exponential and slow, used for cross-checks."""
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"permanent needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    return complex(sum(math.prod(a[i, p[i]] for i in range(n))
                       for p in itertools.permutations(range(n))))


def _repeat_indices(occupation: Sequence[int]) -> list[int]:
    return [i for i, n in enumerate(occupation) for _ in range(n)]


def oracle_amplitude(transfer: LinearElement, input: Sequence[int], output: Sequence[int]) -> complex:
    """``<output| U |input>`` for occupation tuples over ``transfer.modes``."""
    n_modes = len(transfer.modes)
    if len(input) != n_modes or len(output) != n_modes:
        raise ValueError(f"occupation tuples must have {n_modes} entries")
    if sum(input) != sum(output):
        raise ValueError(f"photon number mismatch: {sum(input)} in, {sum(output)} out")
    rows = _repeat_indices(input)
    cols = _repeat_indices(output)
    sub = transfer.matrix[np.ix_(rows, cols)]
    norm = math.prod(math.factorial(n) for n in input) * math.prod(math.factorial(n) for n in output)
    return permanent(sub) / math.sqrt(norm)


def occupations(n_photons: int, n_modes: int):
    """All occupation tuples of ``n_photons`` over ``n_modes`` (lexicographic)."""
    for combo in itertools.combinations_with_replacement(range(n_modes), n_photons):
        occ = [0] * n_modes
        for i in combo:
            occ[i] += 1
        yield tuple(occ)


def oracle_distribution(transfer: LinearElement, input: Sequence[int]) -> FockDistribution:
    n = sum(input)
    amps = {}
    for out in occupations(n, len(transfer.modes)):
        amp = oracle_amplitude(transfer, input, out)
        if abs(amp) > 1e-14:
            amps[out] = amp
    return FockDistribution(transfer.modes, amps)


def phase_aligned_max_deviation(a: FockDistribution, b: FockDistribution) -> float:
    """Largest amplitude difference after removing one global phase.

    The phase is taken from the largest-magnitude entry of ``a``.
    """
    if a.modes != b.modes:
        raise ValueError("distributions are over different mode lists")
    keys = set(a.amplitudes) | set(b.amplitudes)
    if not keys:
        return 0.0
    ref = max(keys, key=lambda k: abs(a.amplitudes.get(k, 0j)))
    x, y = a.amplitudes.get(ref, 0j), b.amplitudes.get(ref, 0j)
    phase = y / x * abs(x) / abs(y) if abs(x) > 0 and abs(y) > 0 else 1.0
    return max(abs(a.amplitudes.get(k, 0j) * phase - b.amplitudes.get(k, 0j)) for k in keys)
