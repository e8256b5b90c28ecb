import copy
import json

import numpy as np
import pytest

from specnet import pipeline
from specnet.errors import ScenarioError
from specnet.graph import WeightedDigraph, degree_stats


def small_scenario(**overrides):
    sc = {
        "version": 1,
        "name": "small",
        "seed": 3,
        "graph": {"generator": "erdos_renyi",
                  "params": {"n": 4, "p": 0.6, "weight_range": [0.5, 1.5], "directed": False}},
        "unit": {"A": [[-1]], "B": [0.1], "C": [1]},
        "inputs": {"channels": 2, "placement": {"sites": [[0, 0, 0], [2, 0, 1]]}},
        "measurement": {"nodes": [0, 1], "states": [0]},
        "timing": {"T": 0.05, "t_end": 10.0},
        "embedding": {"N": 2, "delta": 0.05},
    }
    sc.update(overrides)
    return sc


REQUIRED = ["version", "seed", "graph", "unit", "inputs", "measurement", "timing", "embedding"]


class TestScenarioValidation:
    def test_defaults_filled(self):
        sc = pipeline.validate_scenario(small_scenario())
        assert sc["embedding"]["svd_tol"] == 1e-10
        assert sc["identification"] == {"zero_tol": 1e-6, "dedup_tol": 1e-3}
        assert sc["analysis"]["mode"] == "full"

    def test_input_not_mutated(self):
        doc = small_scenario()
        before = copy.deepcopy(doc)
        pipeline.validate_scenario(doc)
        assert doc == before

    @pytest.mark.parametrize("key", REQUIRED)
    def test_missing_top_level_field(self, key):
        doc = small_scenario()
        del doc[key]
        with pytest.raises(ScenarioError) as err:
            pipeline.validate_scenario(doc)
        assert key in str(err.value)

    @pytest.mark.parametrize("section,key", [("timing", "T"), ("embedding", "N"),
                                             ("unit", "B"), ("graph", "generator")])
    def test_missing_nested_field(self, section, key):
        doc = small_scenario()
        del doc[section][key]
        with pytest.raises(ScenarioError) as err:
            pipeline.validate_scenario(doc)
        assert f"scenario.{section}" in str(err.value) and key in str(err.value)

    def test_delta_not_multiple_of_t(self):
        doc = small_scenario(embedding={"N": 2, "delta": 0.07})
        with pytest.raises(ScenarioError):
            pipeline.validate_scenario(doc)

    def test_wrong_type_names_path(self):
        doc = small_scenario()
        doc["timing"]["T"] = "fast"
        with pytest.raises(ScenarioError) as err:
            pipeline.validate_scenario(doc)
        assert "scenario.timing.T" in str(err.value)

    def test_not_an_object(self):
        with pytest.raises(ScenarioError):
            pipeline.validate_scenario([1, 2])

    def test_bad_json_file(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text("{not json")
        with pytest.raises(ScenarioError):
            pipeline.load_scenario(p)

    def test_seed_override(self, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps(small_scenario()))
        assert pipeline.load_scenario(p, seed_override=11)["seed"] == 11

    @pytest.mark.parametrize("name", pipeline.BUNDLED)
    def test_bundled_scenarios_valid(self, name):
        sc = pipeline.load_bundled(name)
        assert sc["name"] == name and sc["version"] == 1

    def test_unknown_bundled(self):
        with pytest.raises(ScenarioError):
            pipeline.load_bundled("table9")


class TestLayout:
    def test_table1_layout(self, tmp_path):
        sc = pipeline.load_bundled("table1")
        g = WeightedDigraph.load_json(pipeline.stage_gen_graph(sc, tmp_path))
        sites, plan = pipeline.resolve_layout(sc, g)
        assert sites == [(2, 1, 0), (3, 1, 1)]
        assert plan.factored_form == ((0, 1), (0,))

    def test_hub_neighbour_measured(self, tmp_path):
        sc = pipeline.load_bundled("table3")
        g = WeightedDigraph.load_json(pipeline.stage_gen_graph(sc, tmp_path))
        _, plan = pipeline.resolve_layout(sc, g)
        (node,), _ = plan.factored_form
        assert g.weights[node, 0] > 0

    def test_per_cluster_layout(self, tmp_path):
        sc = pipeline.load_bundled("clustering")
        g = WeightedDigraph.load_json(pipeline.stage_gen_graph(sc, tmp_path))
        sites, plan = pipeline.resolve_layout(sc, g)
        nodes, _ = plan.factored_form
        assert np.bincount(g.labels[list(nodes)]).tolist() == [5, 5, 5]
        assert sorted(g.labels[s[0]] for s in sites) == [0, 1, 2]

    def test_node_out_of_range(self, tmp_path):
        sc = pipeline.validate_scenario(small_scenario(measurement={"nodes": [9], "states": [0]}))
        g = WeightedDigraph.load_json(pipeline.stage_gen_graph(sc, tmp_path))
        with pytest.raises(Exception, match="9"):
            pipeline.resolve_layout(sc, g)


class TestRunPipeline:
    def test_trivial_scenario(self, tmp_path):
        res = pipeline.run_pipeline(pipeline.load_bundled("trivial"), tmp_path)
        ident = json.loads((tmp_path / "identification.json").read_text())
        assert len(ident["lambdas"]) == 1 and abs(complex(*ident["lambdas"][0])) < 1e-8
        assert res.report["trivial_graph"]
        assert "trivial graph" in res.text

    def test_artifacts_written(self, tmp_path):
        pipeline.run_pipeline(pipeline.validate_scenario(small_scenario()), tmp_path)
        for name in ("graph.json", "trajectory.csv", "identification.json", "eigenvalues.csv",
                     "summary.json", "report.json", "report.txt"):
            assert (tmp_path / name).exists(), name

    def test_small_scenario_recovers_spectrum(self, tmp_path):
        res = pipeline.run_pipeline(pipeline.validate_scenario(small_scenario()), tmp_path)
        assert res.report["recovered_within_5pct"] == 4
        g = WeightedDigraph.load_json(tmp_path / "graph.json")
        assert res.report["exact"]["M1"] == pytest.approx(degree_stats(g).mean_degree)
        assert res.report["estimated"]["M1"] == pytest.approx(res.report["exact"]["M1"], rel=1e-6)

    def test_determinism(self, tmp_path):
        sc = pipeline.load_bundled("table1")
        pipeline.run_pipeline(sc, tmp_path / "a")
        pipeline.run_pipeline(sc, tmp_path / "b")
        files = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
        for name in files:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_stage_failure_report(self, tmp_path):
        sc = pipeline.validate_scenario(small_scenario(timing={"T": 0.05, "t_end": 0.05}))
        with pytest.raises(pipeline.StageError) as err:
            pipeline.run_pipeline(sc, tmp_path)
        assert err.value.stage == "identify"
        fail = json.loads((tmp_path / "failure.json").read_text())
        assert fail["stage"] == "identify" and fail["error"] == "DataLengthError"
        # artifacts of earlier stages are kept
        assert (tmp_path / "trajectory.csv").exists()

    def test_table1_report_layout(self, tmp_path):
        res = pipeline.run_pipeline(pipeline.load_bundled("table1"), tmp_path)
        header = res.text.splitlines()[1].split()
        assert header == ["M1=D1", "M2", "D2", "v2(1)/v2(2)"]
        assert res.text.splitlines()[2].split()[0] == "Exact"
        assert res.text.splitlines()[3].split()[0] == "Estimated"

    @pytest.mark.filterwarnings("ignore:only .* columns:RuntimeWarning")
    def test_table2_hull_summary(self, tmp_path):
        pipeline.run_pipeline(pipeline.load_bundled("table2"), tmp_path)
        summ = json.loads((tmp_path / "summary.json").read_text())
        assert summ["summary"]["mode"] == "hull"
        assert "mean_edges" in summ
        assert (tmp_path / "hull.csv").read_text().startswith("x,y")


class TestAnalyzeStage:
    def test_k3_spectrum_file(self, tmp_path):
        p = tmp_path / "eig.csv"
        p.write_text("re,im,multiplicity,source_mu_list\n0,0,1,\n3,0,1,\n3,0,1,\n")
        out = pipeline.stage_analyze({"seed": 0, "analysis": {}}, p, tmp_path, n=3)
        s = json.loads(out.read_text())["summary"]
        assert s["M1"] == pytest.approx(2) and s["M2"] == pytest.approx(6)

    def test_floats_round_trip(self, tmp_path):
        lam = [0.1 + 0.2j, 0.30000000000000004, 1 / 3]
        p = tmp_path / "e.json"
        p.write_text(json.dumps({"n": 3, "lambdas": [[z.real, z.imag] for z in map(complex, lam)]}))
        back, doc = pipeline.read_eigenvalues(p)
        assert doc["n"] == 3 and np.array_equal(back, np.array(lam, dtype=complex))
