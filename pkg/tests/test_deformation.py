import random

import pytest

from breuilkit.coeff import PrimeCtx
from breuilkit.deformation import (
    COORDS,
    deform,
    excluded_directions,
    monodromy_locus_report,
    monodromy_tangent_directions,
    random_module,
    tangent_dimension,
)
from breuilkit.monodromy import OrdinaryModule, monodromy_bruteforce

CTX = PrimeCtx(13, (0, 4, 8))


def test_worked_example_dimensions():
    m = OrdinaryModule.from_values(CTX, 1, 0, 1, 1, (1, 1, 1))
    assert tangent_dimension("quasi", m) == 7
    assert tangent_dimension("with_monodromy", m) == 6
    assert excluded_directions(m) == ["v20"]


@pytest.mark.parametrize("seed", range(3))
def test_random_bases(seed):
    m = random_module(CTX, random.Random(seed), v20=0)
    assert tangent_dimension("with_monodromy", m) == 6
    assert excluded_directions(m) == ["v20"]


def test_admissible_directions_lift():
    """Each returned direction really carries a first-order monodromy operator."""
    m = random_module(CTX, random.Random(5), v20=0)
    for d in monodromy_tangent_directions(m):
        assert not monodromy_bruteforce(deform(m, d)).empty
    bad = [0] * 7
    bad[COORDS.index("v20")] = 1
    assert monodromy_bruteforce(deform(m, bad)).empty


def test_with_monodromy_needs_admissible_base():
    with pytest.raises(ValueError):
        tangent_dimension("with_monodromy", OrdinaryModule.from_values(CTX, 1, 1, 1, 1))
    with pytest.raises(ValueError):
        tangent_dimension("framed", OrdinaryModule.from_values(CTX))


def test_locus_report():
    r = monodromy_locus_report(CTX, samples=20, lines=2, seed=3)
    assert r["sweep_admissible"] == 1 and r["sweep_total"] == 13
    assert r["sweep_agrees_with_exists"]
    assert r["line_failures"] == 0 and r["line_checks"] > 0
    assert r["tangent_dimensions"] == {"quasi": 7, "with_monodromy": 6}
