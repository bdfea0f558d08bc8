"""HTTP API: auth, mapping, suggestions, documents, editing."""

import hashlib
import json

import pytest
from fastapi.testclient import TestClient

from groundfill import resources, synthgen
from groundfill.service import RuleBasedEditor, ServiceConfig, create_app, lcs_diff


class FakeClock:
    def __init__(self, start: float = 1_000_000.0):
        self.time = start

    def __call__(self) -> float:
        return self.time


@pytest.fixture()
def clock():
    return FakeClock()


@pytest.fixture()
def client(reference_schema, clock):
    config = ServiceConfig(
        schema=reference_schema,
        users={"u1": "pw1", "u2": "pw2"},
        clock=clock,
    )
    app = create_app(config)
    with TestClient(app) as test_client:
        test_client.app_config = config
        yield test_client


def login(client, user="u1", secret="pw1") -> dict:
    response = client.post("/v1/auth/login", json={"user_id": user, "secret": secret})
    assert response.status_code == 200
    return {"Authorization": f"Bearer {response.json()['token']}"}


def upload_package(client, headers, rng_seed=21):
    rows = synthgen.default_seed_rows(
        1, rng_seed, resources.seed_name_pool(), resources.school_pool()
    )
    pkg = synthgen.generate_package(rows[0], rng_seed=rng_seed)
    for doc_name, text in synthgen.render_package_text(pkg):
        response = client.post(
            "/v1/documents", json={"doc_name": doc_name, "text": text}, headers=headers
        )
        assert response.status_code == 200
    return pkg


def index_state_hash(client) -> str:
    idx = client.app_config.index
    payload = json.dumps(
        {cid: sorted(idx._tf[cid].items()) for cid in sorted(idx._chunks)},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


class TestAuth:
    def test_login_and_use(self, client):
        headers = login(client)
        response = client.get("/v1/documents", headers=headers)
        assert response.status_code == 200

    def test_wrong_secret_401(self, client):
        response = client.post("/v1/auth/login", json={"user_id": "u1", "secret": "nope"})
        assert response.status_code == 401
        assert response.json()["error_code"] == "unauthorized"

    def test_missing_token_401(self, client):
        response = client.get("/v1/documents")
        assert response.status_code == 401

    def test_garbage_token_401(self, client):
        response = client.get(
            "/v1/documents", headers={"Authorization": "Bearer abc.def"}
        )
        assert response.status_code == 401

    def test_expired_token_401(self, client, clock):
        headers = login(client)
        clock.time += 3601
        response = client.get("/v1/documents", headers=headers)
        assert response.status_code == 401

    def test_tampered_signature_401(self, client):
        headers = login(client)
        token = headers["Authorization"].split(" ")[1]
        payload, signature = token.split(".")
        bad = f"{payload}.{'A' + signature[1:]}"
        response = client.get(
            "/v1/documents", headers={"Authorization": f"Bearer {bad}"}
        )
        assert response.status_code == 401


class TestMapEndpoint:
    def test_gpa_label_maps_direct(self, client):
        headers = login(client)
        response = client.post(
            "/v1/map",
            json={"field_descriptor": {"label_text": "Cumulative GPA"}},
            headers=headers,
        )
        assert response.status_code == 200
        result = response.json()["mapping_result"]
        assert result["field_id"] == "user.education.gpa"
        assert result["tier"] == "Direct"

    def test_gibberish_unmapped(self, client):
        headers = login(client)
        response = client.post(
            "/v1/map",
            json={"field_descriptor": {"label_text": "zzqx"}},
            headers=headers,
        )
        assert response.json()["mapping_result"]["tier"] == "Unmapped"

    def test_missing_body_400(self, client):
        headers = login(client)
        response = client.post("/v1/map", json={}, headers=headers)
        assert response.status_code == 400

    def test_descriptor_without_text_400(self, client):
        headers = login(client)
        response = client.post(
            "/v1/map",
            json={"field_descriptor": {"element_id": "x"}},
            headers=headers,
        )
        assert response.status_code == 400

    def test_requires_auth(self, client):
        response = client.post(
            "/v1/map", json={"field_descriptor": {"label_text": "GPA"}}
        )
        assert response.status_code == 401


class TestSuggest:
    def test_gpa_suggestion_with_citation(self, client):
        headers = login(client)
        pkg = upload_package(client, headers)
        response = client.post(
            "/v1/suggest",
            json={"field": {"label_text": "Cumulative GPA"}, "form_context": {"values": {}}},
            headers=headers,
        )
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "Suggestions"
        assert body["field_id"] == "user.education.gpa"
        candidate = body["candidates"][0]
        assert candidate["value"] == f"{pkg.transcript.gpa:.2f}"
        assert candidate["citations"]
        assert candidate["source_type"] == "Personal"

    def test_no_data_for_unuploaded_field(self, client):
        headers = login(client)
        upload_package(client, headers)
        response = client.post(
            "/v1/suggest",
            json={"field": {"label_text": "Class Rank"}, "form_context": {"values": {}}},
            headers=headers,
        )
        assert response.json()["status"] == "NoData"
        assert response.json()["candidates"] == []

    def test_hidden_field_409(self, client):
        headers = login(client)
        response = client.post(
            "/v1/suggest",
            json={
                "field": {"label_text": "Social Security Number"},
                "form_context": {"values": {"user.profile.us_citizen": "No"}},
            },
            headers=headers,
        )
        assert response.status_code == 409
        assert response.json()["error_code"] == "field_hidden"

    def test_unmapped_status(self, client):
        headers = login(client)
        response = client.post(
            "/v1/suggest",
            json={"field": {"label_text": "zzqx"}, "form_context": {"values": {}}},
            headers=headers,
        )
        assert response.json()["status"] == "Unmapped"

    def test_suggest_is_side_effect_free(self, client):
        headers = login(client)
        upload_package(client, headers)
        before = index_state_hash(client)
        for _ in range(3):
            client.post(
                "/v1/suggest",
                json={"field": {"label_text": "Cumulative GPA"}, "form_context": {"values": {}}},
                headers=headers,
            )
        assert index_state_hash(client) == before

    def test_cross_user_isolation(self, client):
        headers_u1 = login(client, "u1", "pw1")
        upload_package(client, headers_u1)
        headers_u2 = login(client, "u2", "pw2")
        response = client.post(
            "/v1/suggest",
            json={"field": {"label_text": "Cumulative GPA"}, "form_context": {"values": {}}},
            headers=headers_u2,
        )
        assert response.json()["status"] == "NoData"


class TestDocuments:
    def test_upload_counts_chunks(self, client):
        headers = login(client)
        response = client.post(
            "/v1/documents",
            json={"doc_name": "transcript.txt", "text": "Cumulative GPA: 3.9"},
            headers=headers,
        )
        assert response.status_code == 200
        assert response.json()["chunks_indexed"] >= 1

    def test_empty_text_zero_chunks(self, client):
        headers = login(client)
        response = client.post(
            "/v1/documents", json={"doc_name": "empty.txt", "text": ""}, headers=headers
        )
        assert response.json()["chunks_indexed"] == 0

    def test_oversize_413(self, client):
        headers = login(client)
        client.app_config.max_doc_bytes = 100
        response = client.post(
            "/v1/documents",
            json={"doc_name": "big.txt", "text": "x" * 200},
            headers=headers,
        )
        assert response.status_code == 413

    def test_status_pollable(self, client):
        headers = login(client)
        client.post(
            "/v1/documents",
            json={"doc_name": "a.txt", "text": "Some text here."},
            headers=headers,
        )
        listing = client.get("/v1/documents", headers=headers).json()["documents"]
        assert listing == [{"doc_name": "a.txt", "status": "ready", "chunks": 1}]

    def test_same_text_two_users_isolated(self, client):
        text = "Cumulative GPA: 3.77"
        h1 = login(client, "u1", "pw1")
        h2 = login(client, "u2", "pw2")
        client.post("/v1/documents", json={"doc_name": "t.txt", "text": text}, headers=h1)
        client.post("/v1/documents", json={"doc_name": "t.txt", "text": text}, headers=h2)
        for headers in (h1, h2):
            response = client.post(
                "/v1/suggest",
                json={"field": {"label_text": "Cumulative GPA"}, "form_context": {"values": {}}},
                headers=headers,
            )
            body = response.json()
            assert body["status"] == "Suggestions"
            # All citations stay within the requesting user's chunks.
            idx = client.app_config.index
            for candidate in body["candidates"]:
                for cid in candidate["citations"]:
                    assert idx.get(cid).user_id is not None


class TestEdit:
    def test_shorten_produces_deletions(self, client):
        headers = login(client)
        response = client.post(
            "/v1/edit",
            json={
                "selected_text": "I led the robotics team, which met twice a week.",
                "instruction": "shorten",
            },
            headers=headers,
        )
        body = response.json()
        assert len(body["revised_text"]) < len("I led the robotics team, which met twice a week.")
        assert any(op["op"] == "del" for op in body["diff"])
        assert body["original"].startswith("I led the robotics team")

    def test_unknown_instruction_noop_all_keep(self, client):
        headers = login(client)
        response = client.post(
            "/v1/edit",
            json={"selected_text": "Leave me alone.", "instruction": "sing"},
            headers=headers,
        )
        body = response.json()
        assert body["revised_text"] == "Leave me alone."
        assert all(op["op"] == "keep" for op in body["diff"])

    def test_empty_selection_400(self, client):
        headers = login(client)
        response = client.post(
            "/v1/edit", json={"selected_text": "  ", "instruction": "shorten"}, headers=headers
        )
        assert response.status_code == 400

    def test_formalize_expands_contractions(self, client):
        headers = login(client)
        response = client.post(
            "/v1/edit",
            json={"selected_text": "I can't go, it's late.", "instruction": "formalize"},
            headers=headers,
        )
        assert response.json()["revised_text"] == "I cannot go, it is late."


class TestLcsDiff:
    def test_reconstructs_both_sides(self):
        original = "the quick brown fox jumps"
        revised = "the slow brown fox sleeps now"
        ops = lcs_diff(original, revised)
        from_ops_original = " ".join(
            op["text"] for op in ops if op["op"] in ("keep", "del")
        )
        from_ops_revised = " ".join(
            op["text"] for op in ops if op["op"] in ("keep", "ins")
        )
        assert from_ops_original == original
        assert from_ops_revised == revised

    def test_identical_is_single_keep(self):
        ops = lcs_diff("same words", "same words")
        assert ops == [{"op": "keep", "text": "same words"}]


class TestEditorPresets:
    def test_all_presets_deterministic(self):
        editor = RuleBasedEditor()
        text = "I really can't believe we got a big win, it's huge."
        for preset in RuleBasedEditor.PRESETS:
            assert editor.revise(text, preset) == editor.revise(text, preset)


class TestReservedEndpoint:
    def test_profile_snapshot_501(self, client):
        headers = login(client)
        response = client.get("/v1/profile/snapshot", headers=headers)
        assert response.status_code == 501


class TestAuthCoverage:
    def test_all_protected_endpoints_reject_missing_token(self, client):
        probes = [
            ("POST", "/v1/map", {"field_descriptor": {"label_text": "GPA"}}),
            ("POST", "/v1/suggest", {"field": {"label_text": "GPA"}}),
            ("POST", "/v1/documents", {"doc_name": "a", "text": "b"}),
            ("GET", "/v1/documents", None),
            ("POST", "/v1/edit", {"selected_text": "x", "instruction": "shorten"}),
            ("GET", "/v1/profile/snapshot", None),
        ]
        for method, path, body in probes:
            if method == "GET":
                response = client.get(path)
            else:
                response = client.post(path, json=body)
            assert response.status_code == 401, path
