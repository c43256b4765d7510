"""Shared, cached groups and categories for the test suite."""

from __future__ import annotations

import functools

from soergelkit.coxeter import default_system, preset
from soergelkit.hecke import HeckeAlgebra
from soergelkit.soergel import SoergelCategory


@functools.lru_cache(maxsize=None)
def system(name: str):
    return default_system(preset(name))


@functools.lru_cache(maxsize=None)
def hecke(name: str) -> HeckeAlgebra:
    return HeckeAlgebra(system(name))


@functools.lru_cache(maxsize=None)
def category(name: str) -> SoergelCategory:
    return SoergelCategory(system(name))


def word(text: str) -> tuple[int, ...]:
    """'sts' style words over the letters s, t, u (generators 1, 2, 3)."""
    return tuple("stu".index(c) for c in text)


def elem(W, text: str):
    return W.from_word(word(text))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []
