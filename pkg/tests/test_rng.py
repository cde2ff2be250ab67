import numpy as np
import pytest

from sbicover.rng import RngStream


def test_same_seed_same_draws():
    a = RngStream(7).gen.random(8)
    b = RngStream(7).gen.random(8)
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    a = RngStream(7).gen.random(8)
    b = RngStream(8).gen.random(8)
    assert not np.array_equal(a, b)


def test_child_path_composes():
    a = RngStream(3).child(1).child(4, 2).gen.random(5)
    b = RngStream(3).child(1, 4, 2).gen.random(5)
    c = RngStream(3, (1, 4, 2)).gen.random(5)
    assert np.array_equal(a, b)
    assert np.array_equal(b, c)


def test_child_does_not_consume_parent():
    root = RngStream(11)
    before = RngStream(11).gen.random(4)
    root.child(0).gen.random(100)
    root.child(5, 5).gen.random(100)
    assert np.array_equal(root.gen.random(4), before)


def test_children_independent_of_derivation_order():
    r1 = RngStream(9)
    a_first = r1.child(0).gen.random(4)
    r2 = RngStream(9)
    r2.child(1).gen.random(50)
    a_second = r2.child(0).gen.random(4)
    assert np.array_equal(a_first, a_second)


def test_siblings_differ():
    root = RngStream(2)
    assert not np.array_equal(root.child(0).gen.random(6),
                              root.child(1).gen.random(6))


def test_child_keyed_stable_and_distinct():
    root = RngStream(13)
    a = root.child_keyed("data/gaussian/128/0")
    b = root.child_keyed("data/gaussian/128/0")
    c = root.child_keyed("data/gaussian/128/1")
    assert a.path == b.path
    assert np.array_equal(a.gen.random(4), b.gen.random(4))
    assert a.path != c.path


def test_negative_seed_and_path_rejected():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, (-2,))
