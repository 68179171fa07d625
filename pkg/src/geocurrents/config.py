"""Numerical tolerances and resource bounds.

A single mutable default instance is exposed through :func:`get_config`;
:func:`using` swaps it temporarily, which is how tests and the CLI apply
overrides.
"""
from __future__ import annotations

import contextlib
import dataclasses
import threading
from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    eps_det: float = 1e-9
    eps_bdy: float = 1e-9
    eps_hyp: float = 1e-9
    ball_max: int = 12
    ball_max_elements: int = 2_000_000
    crossing_window_start: int = 10
    crossing_window_width: int = 5
    equality_tol: float = 1e-7
    inequality_slack: float = 1e-9
    pair_cap: int = 500
    pair_radius: int = 4
    word_search_bound: int = 200_000

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)


_lock = threading.Lock()
_current = Config()


def get_config() -> Config:
    return _current


def set_config(cfg: Config) -> None:
    global _current
    with _lock:
        _current = cfg


@contextlib.contextmanager
def using(**changes):
    previous = get_config()
    set_config(previous.replace(**changes))
    try:
        yield get_config()
    finally:
        set_config(previous)
