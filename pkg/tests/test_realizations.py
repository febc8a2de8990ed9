from fractions import Fraction

import pytest

from opealg.conformal import bracket
from opealg.presentation import data_path
from opealg.realizations import (
    MAP_FILE,
    Realization,
    build_wakimoto_small_n4,
    check_highest_weight,
    read_map,
    verify_realization,
    x_vector,
)

REAL = build_wakimoto_small_n4()


def test_every_target_pair_is_checked_and_holds():
    rep = REAL.verify()
    n = len(REAL.target.names)
    assert len(rep.items) == n * n
    assert rep.ok, [i.label for i in rep.failures()]


def test_odd_fields_regular_where_the_table_is_regular():
    odd = [g for g in REAL.target.names if REAL.target.parity(g)]
    for u in odd:
        for v in odd:
            table = bracket(REAL.target.gen(u), REAL.target.gen(v), REAL.target)
            got = bracket(REAL.images[u], REAL.images[v], REAL.source)
            assert bool(got) == bool(table)


@pytest.mark.parametrize("n", range(5))
def test_highest_weight_vectors(n):
    rep = check_highest_weight(n, REAL)
    assert rep.ok, [(i.label, i.residual) for i in rep.failures()]
    assert any(f"{Fraction(n * (n + 2), 2)} X" in i.label for i in rep.items)


def test_highest_weight_bound_is_enforced():
    with pytest.raises(ValueError):
        check_highest_weight(5, REAL, bound=4)


def test_x_vector_shape():
    src = REAL.source
    assert x_vector(0, src) == src.expr("1")
    assert x_vector(3, src) == src.expr(":b d(b) d^2(b):")
    with pytest.raises(ValueError):
        x_vector(-1)


def test_full_suite():
    rep = verify_realization(4)
    assert rep.ok
    assert rep.counts()["pass"] == len(rep.items)


def test_a_wrong_image_is_caught():
    text = data_path(MAP_FILE).read_text().replace("G^{++}: b", "G^{++}: 2*b")
    bad = Realization(REAL.source, REAL.target, read_map(text, REAL.source, REAL.target))
    assert not bad.verify().ok


def test_map_reader_rejects_mixed_and_missing_images():
    text = data_path(MAP_FILE).read_text()
    with pytest.raises(ValueError):
        read_map(text.replace("L^{C}: 1/2*:h h:", "L^{C}: 1/2*:h beta:"), REAL.source, REAL.target)
    with pytest.raises(ValueError):
        read_map("\n".join(l for l in text.splitlines() if not l.startswith("e:")), REAL.source, REAL.target)
