import io

import numpy as np
import pytest

from hnswlive import (CSV_HEADER, ConfigError, IndexParams, ScenarioConfig,
                      UpdateStrategy, metrics_to_csv, run_scenario,
                      synthetic_vectors)

GAMMA = UpdateStrategy.from_name("mn-ru-gamma")
PARAMS = IndexParams(M=8, ef_construction=64, rng_seed=5)


def cfg(**overrides):
    kw = dict(kind="full_coverage", data=synthetic_vectors(400, 8, seed=6),
              iterations=4, batch_size=100, strategy=GAMMA, params=PARAMS,
              rng_seed=3)
    kw.update(overrides)
    return ScenarioConfig(**kw)


class TestConfigValidation:
    def test_full_coverage_segmentation(self):
        with pytest.raises(ConfigError):
            cfg(iterations=3).validate()  # 3 * 100 != 400

    def test_new_data_needs_double_size(self):
        with pytest.raises(ConfigError):
            cfg(kind="new_data", iterations=3, batch_size=100).validate()

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            cfg(kind="rolling").validate()

    def test_ef_at_least_k(self):
        with pytest.raises(ConfigError):
            cfg(ef=5, k=10).validate()

    def test_validation_happens_before_mutation(self):
        bad = cfg(iterations=3)
        with pytest.raises(ConfigError):
            run_scenario(bad)


class TestFullCoverage:
    def test_live_count_conserved(self):
        calls = []
        result = run_scenario(cfg(), on_iteration=lambda it, g, d:
                              calls.append((it, g.live_count)))
        assert calls == [(1, 400), (2, 400), (3, 400), (4, 400)]
        assert len(result.records) == 4
        assert [r.iteration for r in result.records] == [1, 2, 3, 4]

    def test_wall_time_and_counts_recorded(self):
        result = run_scenario(cfg())
        for rec in result.records:
            assert rec.update_wall_time > 0
            assert 0 <= rec.indegree_zero_count <= 400
            assert 0 <= rec.search_unreachable_count <= 400


class TestRandomScenario:
    def test_live_count_conserved(self):
        result = run_scenario(cfg(kind="random", iterations=5, batch_size=20))
        assert result.graph.live_count == 400

    def test_exclusion_protocol_avoids_stranded_points(self, monkeypatch):
        import hnswlive.scenarios as scenarios
        stranded = {3, 7}
        deleted = []
        real_mark_delete = scenarios.mark_delete
        monkeypatch.setattr(scenarios, "count_indegree_zero",
                            lambda g: set(stranded))
        monkeypatch.setattr(
            scenarios, "mark_delete",
            lambda g, lbl: (deleted.append(lbl), real_mark_delete(g, lbl))[1])
        run_scenario(cfg(kind="random", iterations=4, batch_size=50,
                         exclude_unreachable=True))
        assert deleted
        assert stranded.isdisjoint(deleted)

    def test_demonstration_protocol_five_percent(self):
        data = synthetic_vectors(400, 8, seed=6)
        config = cfg(kind="random", data=data, iterations=3,
                     batch_size=len(data) // 20, exclude_unreachable=True)
        result = run_scenario(config)
        assert len(result.records) == 3


class TestNewData:
    def test_population_swap(self):
        data = synthetic_vectors(400, 8, seed=9)
        config = cfg(kind="new_data", data=data, iterations=4, batch_size=50)
        result = run_scenario(config)
        live = {int(l) for l in result.graph.live_labels()}
        assert live == set(range(200, 400))
        assert result.graph.size == 200  # slots reused, no growth

    def test_per_iteration_conservation(self):
        data = synthetic_vectors(200, 8, seed=9)
        config = cfg(kind="new_data", data=data, iterations=2, batch_size=50)
        counts = []
        run_scenario(config, on_iteration=lambda it, g, d:
                     counts.append(g.live_count))
        assert counts == [100, 100]


class TestDualIntegration:
    def test_rebuild_events_logged(self):
        config = cfg(kind="random", iterations=6, batch_size=25,
                     dual_index_enabled=True, tau=49)
        result = run_scenario(config)
        assert result.dual is not None
        assert [it for it, _ in result.rebuild_events] == [2, 4, 6]


class TestCsvOutput:
    def test_header_and_shape(self):
        result = run_scenario(cfg(recall_stride=2, k=5, ef=20))
        buf = io.StringIO()
        metrics_to_csv(result.records, buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 5
        # recall present only at the stride
        cells = [line.split(",") for line in lines[1:]]
        assert cells[0][4] == "" and cells[1][4] != ""
        assert [c[0] for c in cells] == ["1", "2", "3", "4"]

    def test_determinism_modulo_wall_time(self):
        def strip_wall(records):
            return [(r.iteration, r.indegree_zero_count,
                     r.search_unreachable_count, r.recall_at_k, r.ef, r.k)
                    for r in records]
        a = run_scenario(cfg(kind="random", iterations=5, batch_size=20,
                             recall_stride=5))
        b = run_scenario(cfg(kind="random", iterations=5, batch_size=20,
                             recall_stride=5))
        assert strip_wall(a.records) == strip_wall(b.records)
