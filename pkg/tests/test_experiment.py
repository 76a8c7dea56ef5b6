from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.experiment import (BIN_LABELS, NO_INSTANCES, ExperimentReport, InstanceOutcome, bin_counts, bin_index,
                            evaluate_corpus, integer_percentages, run_experiment, serialize_report)
from app.instance import DisseminationInstance


def zero_dmax_instance():
    return DisseminationInstance.build(1, 2, [(0, 1), (1, 0)], [{0}, {0}], [set(), set()])


class TestBins:
    """ヒストグラムの区間のテスト"""

    @pytest.mark.parametrize('ratio,expected', [
        (Fraction(1), 0),
        (Fraction(119, 100), 0),
        (Fraction(6, 5), 1),
        (Fraction(3, 2), 2),
        (Fraction(17, 10), 3),
        (Fraction(19, 10), 4),
        (Fraction(2), 5),
        (Fraction(7, 2), 5),
    ])
    def test_区間の境界は左閉右開(self, ratio, expected):
        assert bin_index(ratio) == expected

    def test_区間ごとの個数(self):
        assert bin_counts([Fraction(1), Fraction(2), Fraction(5, 2)]) == [1, 0, 0, 0, 0, 2]

    def test_3等分は34_33_33(self):
        assert integer_percentages([1, 1, 1]) == [34, 33, 33]

    def test_0件なら全て0(self):
        assert integer_percentages([0] * 6) == [0] * 6

    @given(st.lists(st.integers(0, 50), min_size=6, max_size=6).filter(any))
    def test_合計はちょうど100(self, counts):
        percentages = integer_percentages(counts)

        assert sum(percentages) == 100
        for count, value in zip(counts, percentages):
            assert abs(value - 100 * count / sum(counts)) < 1


class TestRunExperiment:
    """実験の実行のテスト"""

    def test_有向3閉路は最後の区間に入る(self, three_cycle_instance):
        # When
        report = run_experiment(3, 3, 2, 1, seed=0, instances=[three_cycle_instance])

        # Then
        assert report.succeeded[0].ratio == Fraction(2)
        assert report.percentages() == [0, 0, 0, 0, 0, 100]
        assert report.csv_rows() == [(1, 6, 3, 2.0)]

    def test_失敗したインスタンスは除外して警告する(self, three_cycle_instance, caplog):
        report = run_experiment(3, 3, 2, 2, seed=0, instances=[zero_dmax_instance(), three_cycle_instance])

        assert report.failed == 1
        assert report.outcomes[0].error.startswith('ZeroLowerBound')
        assert len(report.succeeded) == 1
        assert 'excluded' in caplog.text

    def test_全て失敗するとno_instances(self):
        report = run_experiment(2, 1, 1, 1, seed=0, instances=[zero_dmax_instance()])

        body = serialize_report(report)

        assert report.empty
        assert body['histogram'] == NO_INSTANCES
        assert body['excluded'] == 1

    def test_レポートのヒストグラム(self, three_cycle_instance):
        body = serialize_report(run_experiment(3, 3, 2, 1, seed=0, instances=[three_cycle_instance]))

        assert body['histogram'] == {'Range': list(BIN_LABELS), 'Occurrence, %': [0, 0, 0, 0, 0, 100]}
        assert body['instances'][0]['ratio'] == '2'

    def test_空のレポート(self):
        report = ExperimentReport(4, 4, 2, 0, 0)
        assert report.empty
        assert report.percentages() == [0] * 6

    def test_生成からの実行(self):
        report = run_experiment(3, 2, 1, 3, seed=5)

        assert report.count == 3
        assert len(report.outcomes) == 3
        assert all(isinstance(outcome, InstanceOutcome) for outcome in report.outcomes)

    @pytest.mark.slow
    def test_並列でも結果はインスタンス順(self, three_cycle_instance):
        instances = [three_cycle_instance, zero_dmax_instance(), three_cycle_instance]

        sequential = evaluate_corpus(instances)
        parallel = evaluate_corpus(instances, workers=2)

        assert parallel == sequential
        assert [outcome.index for outcome in parallel] == [0, 1, 2]

    @pytest.mark.slow
    def test_既定の設定で50インスタンス(self):
        """直径2の50インスタンス（seed=2024）では比が1に近い区間に偏ること"""
        report = run_experiment(4, 4, 2, 50, seed=2024)

        assert len(report.outcomes) == 50
        assert not report.empty
        assert all(outcome.ratio >= 1 for outcome in report.succeeded)

        percentages = report.percentages()
        assert sum(percentages) == 100
        # [1,1.4) の割合が [1.6,2.0) の割合を上回る
        assert sum(percentages[0:2]) > sum(percentages[3:5])
