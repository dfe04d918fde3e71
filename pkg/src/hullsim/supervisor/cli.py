"""Command-line entry points: train, eval, replay, serve, parse.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from .. import comms, intent, standard_scene_path
from ..guidance import FormationSpec
from ..rl import dqn
from ..rl.env import EnvParams, RewardWeights
from ..rl.evaluate import evaluate
from ..world import SceneError, load_scene
from . import record as record_mod
from .session import Session, SessionConfig, SceneLoadError, make_controller

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2


def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if val < 1:
        raise argparse.ArgumentTypeError("value must be >= 1")
    return val


def _scene_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scene", default=None,
                        help="scene file path (default: packaged standard scene)")


def _resolve_scene(args) -> str:
    return args.scene if args.scene else str(standard_scene_path())


def _env_params(scene_path: str, args) -> EnvParams:
    world = load_scene(scene_path)
    channel = comms.ChannelConfig(
        period=args.period, latency=args.latency,
        drop_prob=args.drop_prob, seed=args.seed)
    return EnvParams(world=world, channel=channel,
                     formation=FormationSpec(), weights=RewardWeights(),
                     max_steps=args.max_steps)


def _add_channel_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--period", type=float, default=0.5)
    parser.add_argument("--latency", type=float, default=0.2)
    parser.add_argument("--drop-prob", dest="drop_prob", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hullsim",
                                     description="hull-inspection shared-autonomy simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the follower policy")
    _scene_arg(p_train)
    _add_channel_args(p_train)
    p_train.add_argument("--episodes", type=_positive_int, default=400)
    p_train.add_argument("--max-steps", type=_positive_int, default=600)
    p_train.add_argument("--seed", type=int, default=1)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--out", required=True, help="weights file to write")
    p_train.add_argument("--log", default=None, help="JSONL training log path")

    p_eval = sub.add_parser("eval", help="evaluate a policy or controller")
    _scene_arg(p_eval)
    _add_channel_args(p_eval)
    p_eval.add_argument("--policy", default="baseline",
                        help="baseline | random | path to weights file")
    p_eval.add_argument("--episodes", type=_positive_int, default=20)
    p_eval.add_argument("--max-steps", type=_positive_int, default=600)
    p_eval.add_argument("--seed", type=int, default=0)

    p_replay = sub.add_parser("replay", help="verify an episode record")
    p_replay.add_argument("record", help="record file path")

    p_serve = sub.add_parser("serve", help="run a live session")
    _scene_arg(p_serve)
    _add_channel_args(p_serve)
    p_serve.add_argument("--config", default=None, help="session config YAML")
    p_serve.add_argument("--policy", default="baseline")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--realtime", type=float, default=1.0,
                         help="realtime factor; 0 = as fast as possible")
    p_serve.add_argument("--record", default=None, help="episode record path")
    p_serve.add_argument("--steps", type=int, default=None,
                         help="stop after N steps (required with --headless)")
    p_serve.add_argument("--headless", action="store_true",
                         help="no network listener")
    p_serve.add_argument("--autostart", default=None,
                         help="natural-language command issued at start")

    p_parse = sub.add_parser("parse", help="parse a natural-language command")
    p_parse.add_argument("text")
    p_parse.add_argument("--llm-endpoint", default=None)
    p_parse.add_argument("--llm-model", default="llama")
    p_parse.add_argument("--llm-timeout", type=float, default=5.0)
    return parser


def cmd_train(args) -> int:
    scene = _resolve_scene(args)
    try:
        params = _env_params(scene, args)
        config = dqn.TrainConfig(episodes=args.episodes,
                                 max_steps_per_episode=args.max_steps,
                                 lr=args.lr, seed=args.seed)
        policy, logs = dqn.train(config, params)
    except dqn.DivergenceDetected as e:
        if args.log:
            dqn.write_log(e.logs, args.log)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SceneError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    policy.save(args.out)
    if args.log:
        dqn.write_log(logs, args.log)
    tail = [entry.ret for entry in logs[-20:]]
    print(json.dumps({"weights": args.out, "episodes": len(logs),
                      "final_returns_mean": sum(tail) / max(len(tail), 1)},
                     sort_keys=True))
    return EXIT_OK


def cmd_eval(args) -> int:
    scene = _resolve_scene(args)
    try:
        params = _env_params(scene, args)
        controller = make_controller(args.policy, params.world)
        report = evaluate(controller, params, args.episodes, args.seed)
    except (SceneError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        report = record_mod.replay(args.record)
    except (record_mod.CorruptRecord, record_mod.SchemaMismatch, SceneError) as e:
        print(f"error: {e.__class__.__name__}: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    print(json.dumps(report.to_dict(), sort_keys=True))
    return EXIT_OK if report.exact else EXIT_DOMAIN


def cmd_serve(args) -> int:
    overrides = {}
    if args.config:
        try:
            with open(args.config) as f:
                overrides = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            print(f"error: bad session config: {e}", file=sys.stderr)
            return EXIT_DOMAIN
    channel = comms.ChannelConfig(
        period=float(overrides.get("period", args.period)),
        latency=float(overrides.get("latency", args.latency)),
        drop_prob=float(overrides.get("drop_prob", args.drop_prob)),
        seed=int(overrides.get("seed", args.seed)))
    formation = FormationSpec(
        radius=float(overrides.get("formation_radius", FormationSpec().radius)),
        offset=float(overrides.get("formation_offset", FormationSpec().offset)))
    cfg = SessionConfig(
        scene_path=overrides.get("scene", _resolve_scene(args)),
        policy=overrides.get("policy", args.policy),
        channel=channel,
        formation=formation,
        seed=int(overrides.get("seed", args.seed)),
        realtime_factor=float(overrides.get("realtime", args.realtime)),
        host=overrides.get("host", args.host),
        port=int(overrides.get("port", args.port)),
        record_path=overrides.get("record", args.record),
        max_steps=overrides.get("steps", args.steps),
        autostart=overrides.get("autostart", args.autostart),
    )
    if args.headless and cfg.max_steps is None:
        print("error: --headless requires --steps", file=sys.stderr)
        return EXIT_USAGE
    hub = None
    try:
        if not args.headless:
            from .server import WebSocketHub, BindError
            from ..world import scene_to_dict
            try:
                scene_cfg = load_scene(cfg.scene_path)
                hub = WebSocketHub(cfg.host, cfg.port, scene_to_dict(scene_cfg))
            except BindError as e:
                print(f"error: {e}", file=sys.stderr)
                return EXIT_DOMAIN
            print(f"listening on ws://{cfg.host}:{hub.port}", file=sys.stderr)
        session = Session(cfg, hub)
    except (SceneLoadError, SceneError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    try:
        session.run()
    except KeyboardInterrupt:
        session.close()
    finally:
        if hub is not None:
            hub.close()
    if cfg.record_path:
        print(json.dumps({"record": cfg.record_path, "steps": session.steps},
                         sort_keys=True))
    return EXIT_OK


def cmd_parse(args) -> int:
    llm = intent.LlmConfig()
    if args.llm_endpoint:
        llm = intent.LlmConfig(enabled=True, endpoint=args.llm_endpoint,
                               model=args.llm_model, timeout=args.llm_timeout)
    result = intent.parse_command(args.text, llm)
    if result.ok:
        out = {"command": result.command.to_dict(), "source": result.source}
        if result.detail:
            out["detail"] = result.detail
        print(json.dumps(out, sort_keys=True))
        return EXIT_OK
    print(json.dumps({"error": result.error, "detail": result.detail},
                     sort_keys=True))
    return EXIT_DOMAIN


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "train": cmd_train,
        "eval": cmd_eval,
        "replay": cmd_replay,
        "serve": cmd_serve,
        "parse": cmd_parse,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
