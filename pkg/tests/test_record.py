import json

import pytest

from hullsim import standard_scene_path
from hullsim.supervisor.record import CorruptRecord, SchemaMismatch, replay
from hullsim.supervisor.session import Session, SessionConfig


def run_headless(path, steps=120, policy="baseline", seed=4, autostart=None):
    cfg = SessionConfig(scene_path=str(standard_scene_path()), policy=policy,
                        seed=seed, max_steps=steps, record_path=str(path),
                        autostart=autostart)
    session = Session(cfg)
    session.run()
    return path


@pytest.fixture(scope="module")
def record_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("rec") / "episode.jsonl"
    return run_headless(path)


class TestReplay:
    def test_unmodified_record_is_exact(self, record_file):
        report = replay(record_file)
        assert report.exact
        assert report.steps == 120
        assert report.divergence_step is None

    def test_perturbed_state_line_diverges_at_that_step(self, record_file, tmp_path):
        lines = record_file.read_text().splitlines()
        step = json.loads(lines[40])
        assert step["kind"] == "step"
        step["world"]["follower"]["pose"][0] += 1e-9
        lines[40] = json.dumps(step, sort_keys=True, separators=(",", ":"))
        bad = tmp_path / "perturbed.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        report = replay(bad)
        assert not report.exact
        assert report.divergence_step == step["k"]

    def test_truncated_record_is_corrupt(self, record_file, tmp_path):
        lines = record_file.read_text().splitlines()
        bad = tmp_path / "truncated.jsonl"
        bad.write_text("\n".join(lines[:-1]) + "\n")   # drop the footer
        with pytest.raises(CorruptRecord):
            replay(bad)

    def test_schema_mismatch(self, record_file, tmp_path):
        lines = record_file.read_text().splitlines()
        header = json.loads(lines[0])
        header["schema"] = 99
        lines[0] = json.dumps(header, sort_keys=True, separators=(",", ":"))
        bad = tmp_path / "schema.jsonl"
        bad.write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaMismatch):
            replay(bad)

    def test_garbage_file_is_corrupt(self, tmp_path):
        bad = tmp_path / "garbage.jsonl"
        bad.write_text("this is not json\n")
        with pytest.raises(CorruptRecord):
            replay(bad)

    def test_empty_file_is_corrupt(self, tmp_path):
        bad = tmp_path / "empty.jsonl"
        bad.write_text("")
        with pytest.raises(CorruptRecord):
            replay(bad)


class TestDeterminism:
    def test_same_seed_bit_identical_records(self, tmp_path):
        a = run_headless(tmp_path / "a.jsonl", steps=100, seed=9)
        b = run_headless(tmp_path / "b.jsonl", steps=100, seed=9)
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self, tmp_path):
        a = run_headless(tmp_path / "a2.jsonl", steps=100, seed=9)
        b = run_headless(tmp_path / "b2.jsonl", steps=100, seed=10)
        assert a.read_bytes() != b.read_bytes()

    def test_record_with_mission_replays_exact(self, tmp_path):
        path = run_headless(tmp_path / "mission.jsonl", steps=300,
                            autostart="inspect the port side of the hull")
        report = replay(path)
        assert report.exact, report.detail

    def test_record_with_random_policy_replays_exact(self, tmp_path):
        path = run_headless(tmp_path / "rand.jsonl", steps=150, policy="random")
        assert replay(path).exact
