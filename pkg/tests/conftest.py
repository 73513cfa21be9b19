"""Shared fixtures: expensive verification runs are computed once per session
and reused across test modules (several acceptance criteria share grids)."""

import time

import pytest

import transgauss as tg
from transgauss.foliation import obstruction_check
from transgauss.invariants import verify_main_theorem

_scenarios = {}
_verifies = {}
_obstructions = {}


def _scenario(name, orientation=1):
    key = (name, orientation)
    if key not in _scenarios:
        _scenarios[key] = tg.make_scenario(name, orientation=orientation)
    return _scenarios[key]


def _verify(name, vname, resolution, orientation=1):
    key = (name, vname, resolution, orientation)
    if key not in _verifies:
        sc = _scenario(name, orientation)
        t0 = time.perf_counter()
        report = verify_main_theorem(
            sc.surface,
            sc.field(vname),
            resolution,
            scenario=name,
            expected_degree=sc.expected_degree,
        )
        _verifies[key] = (report, time.perf_counter() - t0)
    return _verifies[key]


def _obstruction(name, vname, resolution, orientation=1):
    key = (name, vname, resolution, orientation)
    if key not in _obstructions:
        sc = _scenario(name, orientation)
        _obstructions[key] = obstruction_check(
            sc.surface,
            sc.field(vname),
            resolution,
            scenario=name,
            declared_foliation=vname in sc.leaf_fields,
        )
    return _obstructions[key]


@pytest.fixture(scope="session")
def scenario():
    return _scenario


@pytest.fixture(scope="session")
def cached_verify():
    """cached_verify(name, v, resolution, orientation=1) -> (report, wall_s)."""
    return _verify


@pytest.fixture(scope="session")
def cached_obstruction():
    return _obstruction
