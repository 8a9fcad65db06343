import json

import pytest
from fastapi.testclient import TestClient

from edfrec.evaluate import LOW_NOISE, LOW_NOISE_SEED, SynthConfig, generate_synthetic_dataset
from edfrec.features import FeatureConfig
from edfrec.ink import write_dataset
from edfrec.service import ServiceState, create_app
from edfrec.smoothing import SmoothingConfig
from edfrec.trainer import TrainerConfig, build_model

TEMPLATES = {
    "sq": [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
    "v": [(0.0, 0.0), (5.0, 10.0), (10.0, 0.0)],
    "ln": [(0.0, 0.0), (10.0, 4.0)],
    "zz": [(0.0, 0.0), (4.0, 8.0), (8.0, 0.0), (12.0, 8.0)],
}
VOCAB = sorted(TEMPLATES)
FEATURES = FeatureConfig(smoothing=SmoothingConfig(levels=1), epsilon=0.5)


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic_dataset(
        SynthConfig(
            templates=TEMPLATES,
            writers=4,
            samples_per_writer_per_label=3,
            noise=LOW_NOISE,
            seed=LOW_NOISE_SEED,
        )
    )


@pytest.fixture(scope="module")
def model(corpus):
    return build_model(corpus, FEATURES, TrainerConfig(min_count=10))


@pytest.fixture
def state(tmp_path, corpus, model):
    base = tmp_path / "base.strokes.jsonl"
    base.write_text(write_dataset(corpus), encoding="utf-8")
    return ServiceState(
        vocabulary=VOCAB,
        pending_path=tmp_path / "pending.strokes.jsonl",
        base_path=base,
        model=model,
        feature_config=FEATURES,
        trainer_config=TrainerConfig(min_count=10),
    )


@pytest.fixture
def client(state):
    return TestClient(create_app(state))


def points_of(stroke):
    return [[p.x, p.y] for p in stroke.points]


class TestBasics:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_primitives(self, client):
        assert client.get("/api/v1/primitives").json() == {"labels": VOCAB}

    def test_model_summary(self, client, model):
        doc = client.get("/api/v1/model").json()
        assert [l["label"] for l in doc["labels"]] == model.label_names()
        assert doc["reference_count"] == len(model.all_references())
        assert all(1 <= l["references"] <= 3 for l in doc["labels"])

    def test_model_summary_without_model(self, state):
        state.model = None
        c = TestClient(create_app(state))
        assert c.get("/api/v1/model").status_code == 503


class TestRecognize:
    def test_reference_stroke_scores_zero(self, client, state, corpus):
        by_id = {s.id: s for s in corpus.strokes}
        for ref in state.model.all_references():
            stroke = by_id[ref.source_id]
            r = client.post(
                "/api/v1/recognize",
                json={"points": points_of(stroke), "method": "1"},
            )
            assert r.status_code == 200
            top = r.json()["ranking"][0]
            assert top["label"] == ref.label
            assert top["score"] == 0

    def test_edf_length_law(self, client, corpus):
        r = client.post(
            "/api/v1/recognize", json={"points": points_of(corpus.strokes[0])}
        )
        doc = r.json()
        k = doc["curvature_count"]
        assert doc["edf_length"] == k * (k - 1) // 2

    def test_top_k_limits_ranking(self, client, corpus):
        pts = points_of(corpus.strokes[0])
        r = client.post("/api/v1/recognize", json={"points": pts, "top_k": 2})
        assert len(r.json()["ranking"]) == 2

    def test_single_point_rejected(self, client):
        r = client.post("/api/v1/recognize", json={"points": [[1, 2]]})
        assert r.status_code == 400

    def test_all_coincident_rejected(self, client):
        r = client.post("/api/v1/recognize", json={"points": [[1, 2], [1, 2]]})
        assert r.status_code == 400

    def test_mixed_arity_rejected(self, client):
        r = client.post(
            "/api/v1/recognize", json={"points": [[0, 0], [1, 1, 5]]}
        )
        assert r.status_code == 400

    def test_timestamps_accepted(self, client):
        r = client.post(
            "/api/v1/recognize", json={"points": [[0, 0, 0], [5, 5, 16]]}
        )
        assert r.status_code == 200

    def test_bad_method(self, client):
        r = client.post(
            "/api/v1/recognize", json={"points": [[0, 0], [1, 1]], "method": "3"}
        )
        assert r.status_code == 400

    def test_without_model_503(self, state):
        state.model = None
        c = TestClient(create_app(state))
        r = c.post("/api/v1/recognize", json={"points": [[0, 0], [1, 1]]})
        assert r.status_code == 503


class TestSamples:
    def test_append_and_unique_ids(self, client, state):
        ids = set()
        for i in range(3):
            r = client.post(
                "/api/v1/samples",
                json={"points": [[0, 0], [i + 1, 1]], "label": "v", "writer": "pad"},
            )
            assert r.status_code == 200
            ids.add(r.json()["id"])
        assert len(ids) == 3
        lines = state.pending_path.read_text("utf-8").splitlines()
        assert len(lines) == 3
        records = [json.loads(l) for l in lines]
        assert {rec["id"] for rec in records} == ids
        assert all(rec["label"] == "v" and rec["writer"] == "pad" for rec in records)

    def test_ids_avoid_existing(self, client, state):
        first = client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [1, 1]], "label": "v", "writer": "pad"},
        ).json()["id"]
        # simulate a restart: a fresh counter must still skip taken ids
        state._id_counter = __import__("itertools").count()
        second = client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [2, 1]], "label": "v", "writer": "pad"},
        ).json()["id"]
        assert second != first

    def test_unknown_label_rejected(self, client, state):
        r = client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [1, 1]], "label": "nope", "writer": "pad"},
        )
        assert r.status_code == 400
        assert not state.pending_path.exists()

    def test_oov_label_accepted(self, client):
        r = client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [1, 1]], "label": "OOV", "writer": "pad"},
        )
        assert r.status_code == 200

    def test_empty_writer_rejected(self, client):
        r = client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [1, 1]], "label": "v", "writer": ""},
        )
        assert r.status_code == 400

    def test_submission_does_not_change_live_model(self, client, state):
        before = state.model
        client.post(
            "/api/v1/samples",
            json={"points": [[0, 0], [1, 1]], "label": "v", "writer": "pad"},
        )
        assert state.model is before


class TestRebuild:
    def test_rebuild_swaps_model(self, state):
        state.model = None
        c = TestClient(create_app(state))
        r = c.post("/api/v1/model/rebuild")
        assert r.status_code == 200
        doc = r.json()
        assert doc["labels"] == VOCAB
        assert doc["reference_count"] <= 3 * len(VOCAB)
        assert state.model is not None
        assert c.post(
            "/api/v1/recognize", json={"points": [[0, 0], [1, 1]]}
        ).status_code == 200

    def test_rebuild_includes_pending_samples(self, client, state, corpus):
        stroke = corpus.strokes[0]
        for i in range(12):
            client.post(
                "/api/v1/samples",
                json={"points": points_of(stroke), "label": stroke.label,
                      "writer": f"pad{i}"},
            )
        r = client.post("/api/v1/model/rebuild")
        assert r.status_code == 200
        combined = state.combined_dataset()
        assert len(combined) == len(corpus) + 12

    def test_rebuild_conflict_409(self, state):
        c = TestClient(create_app(state))
        acquired = state._rebuild_lock.acquire(blocking=False)
        assert acquired
        try:
            assert c.post("/api/v1/model/rebuild").status_code == 409
        finally:
            state._rebuild_lock.release()
        assert c.post("/api/v1/model/rebuild").status_code == 200

    def test_rebuild_with_insufficient_data_422(self, tmp_path):
        state = ServiceState(
            vocabulary=VOCAB, pending_path=tmp_path / "pending.jsonl"
        )
        c = TestClient(create_app(state))
        r = c.post("/api/v1/model/rebuild")
        assert r.status_code == 422
        assert state.model is None
