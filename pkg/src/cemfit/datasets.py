"""Bundled right-censored example datasets.

Three small Type-II censored lifetime samples ship with the package so the
test suite and the command line examples are self-contained:

* ``example_normal``:   n = 10, largest 3 censored at 1.778
* ``example_laplace``:  n = 20, largest 2 censored at 54.94154
* ``example_rayleigh``: n = 20, largest 5 censored at 10.627
"""

from __future__ import annotations

from importlib import resources

from .censoring import CensoredSample, read_censored_csv

__all__ = ["example_normal", "example_laplace", "example_rayleigh", "dataset_path"]


def dataset_path(name: str):
    """Filesystem path of a bundled dataset CSV (without the .csv suffix)."""
    ref = resources.files(__package__) / "data" / f"{name}.csv"
    return ref


def _load(name: str) -> CensoredSample:
    with resources.as_file(dataset_path(name)) as path:
        return read_censored_csv(path)


def example_normal() -> CensoredSample:
    """Lifetime sample of 10 units, smallest 7 observed, rest censored."""
    return _load("normal_type2")


def example_laplace() -> CensoredSample:
    """Lifetime sample of 20 units, smallest 18 observed, rest censored."""
    return _load("laplace_type2")


def example_rayleigh() -> CensoredSample:
    """Lifetime sample of 20 units, smallest 15 observed, rest censored."""
    return _load("rayleigh_type2")
