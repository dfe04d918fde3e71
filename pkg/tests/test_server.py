import re
import subprocess
import sys
import threading
import time

import pytest

from hullsim import standard_scene_path
from hullsim.supervisor.server import WebSocketClient, WebSocketHub
from hullsim.supervisor.session import Session, SessionConfig
from hullsim.world import load_scene, scene_to_dict


@pytest.fixture
def live_session():
    scene = load_scene(standard_scene_path())
    hub = WebSocketHub("127.0.0.1", 0, scene_to_dict(scene))
    cfg = SessionConfig(scene_path=str(standard_scene_path()), policy="baseline",
                        seed=1, max_steps=10_000, realtime_factor=0.0,
                        snapshot_every=2)
    session = Session(cfg, hub)
    thread = threading.Thread(target=session.run, daemon=True)
    thread.start()
    yield hub, session
    session.running = False
    hub.close()
    thread.join(timeout=5)


def recv_until(client, predicate, tries=200):
    for _ in range(tries):
        frame = client.recv_json()
        if predicate(frame):
            return frame
    raise AssertionError("expected frame never arrived")


class TestWebSocketRoundTrip:
    def test_snapshots_flow_and_first_carries_scene(self, live_session):
        hub, _ = live_session
        client = WebSocketClient("127.0.0.1", hub.port)
        try:
            snap = recv_until(client, lambda f: f["type"] == "snapshot")
            assert "scene" in snap
            assert snap["scene"]["schema"] == 1
            later = recv_until(client, lambda f: f["type"] == "snapshot")
            assert "scene" not in later
            assert later["time"] > snap["time"]
        finally:
            client.close()

    def test_command_ack_over_socket(self, live_session):
        hub, session = live_session
        client = WebSocketClient("127.0.0.1", hub.port)
        try:
            client.send_json({"type": "nl_command", "ref": 42,
                              "text": "inspect the port side of the hull"})
            reply = recv_until(client, lambda f: f.get("ref") == 42)
            assert reply["type"] == "ack"
            assert reply["result"]["command"]["region"] == "Port"
            deadline = time.monotonic() + 5
            while session.mission is None and time.monotonic() < deadline:
                time.sleep(0.01)
            assert session.mission is not None
        finally:
            client.close()

    def test_bad_frame_gets_err(self, live_session):
        hub, _ = live_session
        client = WebSocketClient("127.0.0.1", hub.port)
        try:
            client.send_json({"type": "teleop", "ref": 7, "surge": "fast",
                              "yaw_rate": 0})
            reply = recv_until(client, lambda f: f.get("ref") == 7)
            assert reply["type"] == "err" and reply["code"] == "BadValue"
        finally:
            client.close()

    def test_two_clients_one_teleop_role(self, live_session):
        hub, _ = live_session
        c1 = WebSocketClient("127.0.0.1", hub.port)
        c2 = WebSocketClient("127.0.0.1", hub.port)
        try:
            c1.send_json({"type": "set_mode", "ref": 1, "mode": "Manual"})
            recv_until(c1, lambda f: f.get("ref") == 1)
            c1.send_json({"type": "teleop", "ref": 2, "surge": 1.0, "yaw_rate": 0.0})
            recv_until(c1, lambda f: f.get("ref") == 2 and f["type"] == "ack")
            c2.send_json({"type": "teleop", "ref": 3, "surge": 0.5, "yaw_rate": 0.0})
            reply = recv_until(c2, lambda f: f.get("ref") == 3)
            assert reply["type"] == "err" and reply["code"] == "NotController"
        finally:
            c1.close()
            c2.close()


class TestServeSubprocess:
    def test_cli_serve_end_to_end(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "hullsim.supervisor.cli", "serve",
             "--port", "0", "--realtime", "0", "--steps", "100000"],
            stderr=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        try:
            line = proc.stderr.readline()
            m = re.search(r"ws://[\d.]+:(\d+)", line)
            assert m, f"no listen line: {line!r}"
            port = int(m.group(1))
            client = WebSocketClient("127.0.0.1", port)
            try:
                snap = recv_until(client, lambda f: f["type"] == "snapshot")
                assert "scene" in snap
                client.send_json({"type": "nl_command", "ref": 1,
                                  "text": "inspect the port side of the hull"})
                reply = recv_until(client, lambda f: f.get("ref") == 1)
                assert reply["type"] == "ack"
                with_bt = recv_until(
                    client, lambda f: f["type"] == "snapshot" and f["bt"])
                assert with_bt["bt"]["name"] == "hull_inspection"
            finally:
                client.close()
        finally:
            proc.terminate()
            proc.wait(timeout=10)
