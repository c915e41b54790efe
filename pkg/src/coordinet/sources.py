"""Named target distributions and reference couplings for the CLI and tests."""
from __future__ import annotations

import os
import re

import numpy as np

from .pmf import Alphabet, JointPmf, read_pmf
from .region import InnerCoupling, canonical_couplings

BUILTIN_HELP = ("independent | identical-uniform-K | dsbs-P | triple-abc | "
                "path to a .pmf file")


def _y_alphabets(n1: int, n2: int):
    return (Alphabet("Y1", n1), Alphabet("Y2", n2))


def independent_bits() -> JointPmf:
    return JointPmf(_y_alphabets(2, 2), np.full((2, 2), 0.25))


def identical_uniform(k: int) -> JointPmf:
    t = np.eye(k) / k
    return JointPmf(_y_alphabets(k, k), t)


def dsbs(p: float) -> JointPmf:
    """Doubly symmetric binary source with crossover probability p."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"dsbs crossover must lie in [0, 0.5], got {p}")
    t = np.array([[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]])
    return JointPmf(_y_alphabets(2, 2), t)


def triple_abc() -> JointPmf:
    """Y1 = (A, B), Y2 = (A, C) for i.i.d. fair bits A, B, C."""
    t = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            for c in range(2):
                t[a * 2 + b, a * 2 + c] += 1 / 8
    return JointPmf(_y_alphabets(4, 4), t)


def builtin_source(name: str) -> JointPmf:
    name = name.strip().lower()
    if name == "independent":
        return independent_bits()
    if name == "triple-abc":
        return triple_abc()
    m = re.fullmatch(r"identical-uniform-(\d+)", name)
    if m:
        return identical_uniform(int(m.group(1)))
    m = re.fullmatch(r"dsbs-(0?\.\d+|0|0\.5)", name)
    if m:
        return dsbs(float(m.group(1)))
    raise ValueError(f"unknown builtin source {name!r}; expected {BUILTIN_HELP}")


def load_source(name_or_path: str) -> JointPmf:
    """A source is either a builtin name or a path to a pmf file."""
    if os.path.sep in name_or_path or name_or_path.endswith(".pmf") or os.path.exists(name_or_path):
        return read_pmf(name_or_path)
    return builtin_source(name_or_path)


def builtin_coupling(name: str, q: JointPmf) -> InnerCoupling:
    """Reference couplings (tight auxiliary alphabets) by name."""
    table = canonical_couplings(q)
    if name not in table:
        raise ValueError(f"unknown coupling {name!r}; expected one of {sorted(table)}")
    return table[name]
