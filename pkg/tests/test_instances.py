import numpy as np
import pytest

from greedy_ocrs.constraints import parse_instance
from greedy_ocrs.instances import gen_random_partition, gen_random_rank1, gen_random_transversal, gen_uniform_rank1


class TestRankOne:
    def test_uniform(self):
        inst = gen_uniform_rank1(4)
        assert inst.x == (0.25,) * 4
        with pytest.raises(ValueError):
            gen_uniform_rank1(0)

    def test_valid_over_seeds(self):
        for seed in range(10_000):
            n = 1 + seed % 12
            inst = gen_random_rank1(n, seed, slack=(seed % 5) / 10)
            assert inst.check(), seed

    def test_on_face(self):
        for n in (1, 2, 17, 500, 10_000):
            assert sum(gen_random_rank1(n, n).x) == pytest.approx(1.0, abs=1e-9)

    def test_slack(self):
        assert sum(gen_random_rank1(5, 0, slack=0.3).x) == pytest.approx(0.7)
        assert gen_random_rank1(5, 0, slack=1.0).x == (0.0,) * 5

    def test_deterministic(self):
        assert gen_random_rank1(8, 3) == gen_random_rank1(8, 3)
        assert gen_random_rank1(8, 3) != gen_random_rank1(8, 4)


class TestPartition:
    def test_valid_over_seeds(self):
        for seed in range(1000):
            n = 2 + seed % 10
            inst = gen_random_partition(n, 1 + seed % n, seed)
            assert inst.check(), seed

    def test_balanced(self):
        sizes = sorted(len(p) for p in gen_random_partition(10, 3, 1).constraint.parts)
        assert sizes == [3, 3, 4]

    def test_singletons(self):
        inst = gen_random_partition(5, 5, 2)
        assert all(len(p) == 1 for p in inst.constraint.parts)
        assert inst.x == (1.0,) * 5

    def test_bad_parts(self):
        with pytest.raises(ValueError):
            gen_random_partition(3, 4, 0)


class TestTransversal:
    def test_valid_over_seeds(self):
        for seed in range(1000):
            nr = 1 + seed % 5
            inst = gen_random_transversal(1 + seed % 7, nr, 1 + seed % nr, seed)
            assert inst.check(), seed

    def test_min_degree(self):
        inst = gen_random_transversal(6, 5, 3, 9)
        assert min(inst.constraint.degrees()) >= 3

    def test_complete(self):
        inst = gen_random_transversal(4, 3, 3, 0)
        assert inst.constraint.adjacency == ((0, 1, 2),) * 4

    def test_some_vertex_tight_when_scaled(self):
        inst = gen_random_transversal(8, 2, 1, 5)
        loads = [sum(inst.x[u] for u in nb) for nb in inst.constraint.right_neighbourhoods() if nb]
        if max(loads) > 0.999:
            assert max(loads) == pytest.approx(1.0)

    def test_bad_degree(self):
        with pytest.raises(ValueError):
            gen_random_transversal(3, 2, 3, 0)


@pytest.mark.parametrize("inst", [
    gen_random_rank1(6, 1),
    gen_random_partition(7, 3, 1),
    gen_random_transversal(5, 4, 2, 1),
])
def test_json_round_trip(inst):
    back = parse_instance(inst.to_json())
    assert back == inst
    assert np.array_equal(back.point(), inst.point())
