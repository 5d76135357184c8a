from tests.support import corpus_text


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_api_info_lists_the_endpoints(client):
    info = client.get("/api").json()
    assert info["endpoints"]["check"] == "/api/programs/check"
    assert info["dependency_modes"] == ["demand", "maximal"]
    assert "a2" in info["fuzz_checks"]


def test_check_program(client):
    response = client.post("/api/programs/check", json={"source": corpus_text("section2")})
    assert response.status_code == 200
    body = response.json()
    assert body["ok"] is True
    assert body["declarations"] == ["IA", "Utils", "ta", "A", "B"]


def test_program_errors_are_diagnostics(client):
    response = client.post("/api/programs/check", json={
        "source": corpus_text("cpoint_fail"),
        "file_name": "cpoint_fail.l42mu",
    })
    assert response.status_code == 200
    body = response.json()
    assert body["ok"] is False
    diagnostic = body["diagnostics"][0]
    assert diagnostic["code"] == "NotCoherent"
    assert diagnostic["decl_index"] == 4
    assert diagnostic["file"] == "cpoint_fail.l42mu"


def test_invalid_dependency_mode(client):
    response = client.post("/api/programs/check", json={"source": "A = {}", "dependency_mode": "eager"})
    assert response.status_code == 400


def test_flatten_with_trace(client):
    response = client.post("/api/programs/flatten", json={"source": corpus_text("rename"), "trace": True})
    body = response.json()
    assert body["ok"] is True
    assert body["trace"] == ["D: LOOK-UP at root.arg", "D: RENAME at root"]
    assert "D = {" in body["program"]


def test_run_program(client):
    response = client.post("/api/programs/run", json={
        "source": corpus_text("expression_problem"),
        "expression": "Plus.of(Num.of(1), Num.of(2)).double()",
    })
    body = response.json()
    assert body["ok"] is True
    assert body["value"] == "Plus.of(Num.of(2), Num.of(4))"
    assert body["steps"] > 0
    assert body["trace"] == []


def test_run_rejects_non_positive_fuel(client):
    response = client.post("/api/programs/run", json={"source": "A = {}", "expression": "1", "fuel": 0})
    assert response.status_code == 422


def test_run_reports_stuck_terms(client):
    response = client.post("/api/programs/run", json={"source": "A = {}", "expression": "1 / 0"})
    body = response.json()
    assert body["ok"] is False
    assert body["diagnostics"][0]["code"] == "Stuck"


def test_corpus_listing(client):
    body = client.get("/api/corpus/").json()
    names = {entry["name"] for entry in body["programs"]}
    assert body["total"] == len(body["programs"])
    assert {"section2", "expression_problem", "ordering_mutual"} <= names


def test_corpus_program(client):
    response = client.get("/api/corpus/points")
    assert response.status_code == 200
    assert response.json()["source"] == corpus_text("points")
    assert client.get("/api/corpus/missing").status_code == 404


def test_fuzz_endpoint(client):
    assert "divergence" in client.get("/api/fuzz/").json()["checks"]
    response = client.post("/api/fuzz/", json={"check": "algebra", "seed": 2, "count": 30})
    assert response.status_code == 200
    assert response.json()["passed"] is True
    assert client.post("/api/fuzz/", json={"check": "nope"}).status_code == 400


def test_fuzz_failures_carry_the_shrunk_program(client, monkeypatch):
    from app.models.schemas import Verdict
    from app.services import harness_service

    def reject_nonempty(table, dependency_mode="demand"):
        if len(table):
            return Verdict(check="a2", passed=False, samples=1, failures=1, message="rejected")
        return Verdict(check="a2", passed=True)

    monkeypatch.setattr(harness_service, "check_wrong_count_monotone", reject_nonempty)
    body = client.post("/api/fuzz/", json={"check": "a2", "seed": 4, "count": 3}).json()
    assert body["passed"] is False
    assert body["failures"] == 3
    assert len(body["counterexamples"]) == 3
    for example in body["counterexamples"]:
        message, program = example.split("\n", 1)
        assert message == "rejected"
        assert program.count(" = ") == 1
