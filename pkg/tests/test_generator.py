import numpy as np
import pytest

from app.errors import GenerationFailed, InstanceError
from app.generator import generate_corpus, generate_instance, network_with_index, random_network, random_possession
from app.instance import validate_for_multiround
from app.network import solvability_index


class TestRandomNetwork:

    def test_random_network_is_strongly_connected(self):
        """生成したネットワークは常に強連結であること"""
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert random_network(5, rng).is_strongly_connected()

    @pytest.mark.parametrize('k,d', [(3, 1), (3, 2), (4, 2), (4, 3)])
    def test_network_with_index(self, k, d):
        """指定した可解ラウンド数のネットワークが得られること"""
        net = network_with_index(k, d, np.random.default_rng(1), retries=1000)
        assert solvability_index(net) == d

    def test_single_node(self):
        """1ノードでは可解ラウンド数0のネットワークになること"""
        assert network_with_index(1, 0, np.random.default_rng(0), retries=1).k == 1

    def test_impossible_index(self):
        """ノード数以上の可解ラウンド数は InstanceError になること"""
        with pytest.raises(InstanceError):
            network_with_index(3, 3, np.random.default_rng(0), retries=10)

    def test_retries_exhausted(self):
        """試行回数を使い切った場合は GenerationFailed になること"""
        with pytest.raises(GenerationFailed):
            network_with_index(4, 2, np.random.default_rng(0), retries=0)


class TestRandomInstances:

    def test_every_symbol_is_held(self):
        """全てのシンボルが少なくとも1つのノードに配られること"""
        possess = random_possession(4, 6, np.random.default_rng(2))
        assert set().union(*possess) == set(range(6))

    def test_request_is_complement(self):
        """要求は所持の補集合であること"""
        inst = generate_instance(4, 4, 2, np.random.default_rng(3))

        validate_for_multiround(inst)
        assert all(not (has & wants) for has, wants in zip(inst.possess, inst.request))
        assert solvability_index(inst.net) == 2

    def test_corpus_is_reproducible(self):
        """同じシードからは同じコーパスが得られること"""
        assert generate_corpus(4, 3, 2, 5, seed=42) == generate_corpus(4, 3, 2, 5, seed=42)

    def test_corpus_depends_on_seed(self):
        """シードが異なればコーパスも異なること"""
        assert generate_corpus(4, 3, 2, 5, seed=1) != generate_corpus(4, 3, 2, 5, seed=2)

    def test_field_size(self):
        """体の大きさを指定できること"""
        (inst,) = generate_corpus(3, 2, 1, 1, seed=0, q=3)
        assert inst.q == 3
