"""Conductor: the orchestrating executable.

    conductor simulate [--config C] [--record LOG] [--http-port P]
    conductor replay --trace T [--trace-speed S|max] [...]
    conductor live [--listen-landmarks PORT] [...]
    conductor script run <name|path> [--wall] [...]
    conductor script list

Exit codes: 0 clean, 2 configuration error, 3 runtime fatal.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import math
import threading
import time

from .config import EngineConfig, load_config
from .cues import BUILTIN_SEQUENCES, builtin_old_macdonald, load_sequence
from .engine import Engine, canonical_line
from .errors import ConfigurationError, StagehandError
from .landmarks import LandmarkListener, load_trace, replay
from .service import EngineHost, create_app, serve_api

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="engine config file (YAML or JSON)")
    parser.add_argument("--record", help="write a JSON-Lines run log here")
    parser.add_argument("--http-port", type=int, default=None,
                        help="control API port (default from config)")
    parser.add_argument("--no-api", action="store_true",
                        help="run headless without the control API")
    parser.add_argument("--debug-gestures",
                        help="write per-frame recognizer state here")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conductor",
        description="Gesture theater engine: landmarks in, robot behavior out.")
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("simulate", help="idle stage plus control API")
    _add_common(p)

    p = sub.add_parser("replay", help="drive the engine from a trace file")
    _add_common(p)
    p.add_argument("--trace", required=True, help="JSON-Lines landmark trace")
    p.add_argument("--trace-speed", default=None,
                   help="replay speed multiplier or 'max'")

    p = sub.add_parser("live", help="accept landmarks over TCP")
    _add_common(p)
    p.add_argument("--listen-landmarks", type=int, default=None,
                   help="TCP port for newline-delimited landmark records")

    p = sub.add_parser("script", help="run or list cue sequences")
    script_sub = p.add_subparsers(dest="script_cmd", required=True)
    run_p = script_sub.add_parser("run", help="run a sequence to completion")
    _add_common(run_p)
    run_p.add_argument("name", help="built-in sequence name or cue file path")
    run_p.add_argument("--wall", action="store_true",
                       help="dispatch on the wall clock with the API up")
    list_p = script_sub.add_parser("list", help="list built-in sequences")
    list_p.add_argument("-v", "--verbose", action="store_true")

    return parser


def _load_engine_config(args) -> EngineConfig:
    config = load_config(args.config) if args.config else EngineConfig()
    if getattr(args, "http_port", None):
        config.api_port = args.http_port
    if getattr(args, "trace_speed", None) is not None:
        raw = args.trace_speed
        config.trace_speed = math.inf if raw == "max" else float(raw)
        if not config.trace_speed > 0:
            raise ConfigurationError("input.trace_speed must be positive")
    if getattr(args, "trace", None):
        config.trace_path = args.trace
    if getattr(args, "listen_landmarks", None):
        config.landmark_port = args.listen_landmarks
    return config


@contextlib.contextmanager
def _sinks(args):
    record_sink = None
    debug_sink = None
    with contextlib.ExitStack() as stack:
        if args.record:
            fh = stack.enter_context(open(args.record, "w", encoding="utf-8"))
            record_sink = lambda line: fh.write(line + "\n")
        if getattr(args, "debug_gestures", None):
            dh = stack.enter_context(
                open(args.debug_gestures, "w", encoding="utf-8"))
            debug_sink = lambda obj: dh.write(canonical_line(obj) + "\n")
        yield record_sink, debug_sink


def _serve_until_interrupt(host: EngineHost, config: EngineConfig,
                           no_api: bool, on_idle=None,
                           started: bool = False) -> int:
    if not started:
        host.start()
    server = None
    if not no_api:
        app = create_app(host)
        server, _ = serve_api(app, port=config.api_port)
        log.info("control API on http://127.0.0.1:%d", config.api_port)
    try:
        while True:
            time.sleep(0.2)
            if on_idle is not None and on_idle():
                break
    except KeyboardInterrupt:
        log.info("interrupted; stopping")
    finally:
        if server is not None:
            server.should_exit = True
        host.stop()
    return EXIT_OK


def _resolve_sequence(name: str, engine: Engine):
    if name in BUILTIN_SEQUENCES:
        return BUILTIN_SEQUENCES[name]()
    if name == "old_macdonald":
        return _default_old_macdonald(engine)
    return load_sequence(name)


def _default_old_macdonald(engine: Engine):
    """Blocking for the default cast: walk each sim robot to a mark near
    the first spotlight."""
    stage = engine.stage
    spot = engine.config.stage.spotlights
    cx, cy = (spot[0].x, spot[0].y) if spot else (1.0, 1.0)
    marks = []
    for i, rid in enumerate(stage.robot_ids[:3]):
        offset = (i - 1) * 0.25
        marks.append((rid, (cx + offset, cy - 0.2)))
    poses = {rid: stage.robot(rid) for rid in stage.robot_ids}
    return builtin_old_macdonald(marks, poses, engine.config.stage,
                                 engine.config.roles)


def _run_simulate(args) -> int:
    config = _load_engine_config(args)
    with _sinks(args) as (record_sink, debug_sink):
        engine = Engine(config, record_sink=record_sink, lockstep=False,
                        debug_gestures=debug_sink)
        return _serve_until_interrupt(EngineHost(engine), config, args.no_api)


def _run_replay(args) -> int:
    config = _load_engine_config(args)
    trace = load_trace(config.trace_path)
    with _sinks(args) as (record_sink, debug_sink):
        if math.isinf(config.trace_speed):
            engine = Engine(config, record_sink=record_sink, lockstep=True,
                            debug_gestures=debug_sink)
            engine.replay_trace(trace)
            engine.settle()
            engine.close()
            log.info("replayed %d frames: %d events, %d commands",
                     len(trace), engine.event_count, engine.command_count)
            return EXIT_OK
        engine = Engine(config, record_sink=record_sink, lockstep=False,
                        debug_gestures=debug_sink)
        host = EngineHost(engine)
        done = threading.Event()

        def _feed():
            try:
                for frame in replay(trace, speed=config.trace_speed):
                    host.submit(lambda e, f=frame: e.feed_frame(f))
                host.submit(lambda e: e.finish_input())
            finally:
                done.set()

        feeder = threading.Thread(target=_feed, daemon=True)
        feeder.start()
        return _serve_until_interrupt(host, config, args.no_api,
                                      on_idle=done.is_set)


def _run_live(args) -> int:
    config = _load_engine_config(args)
    with _sinks(args) as (record_sink, debug_sink):
        engine = Engine(config, record_sink=record_sink, lockstep=False,
                        debug_gestures=debug_sink)
        host = EngineHost(engine)
        listener = LandmarkListener(port=config.landmark_port)
        try:
            listener.start()
        except OSError as exc:
            log.error("cannot bind landmark port %d: %s",
                      config.landmark_port, exc)
            return EXIT_RUNTIME
        log.info("listening for landmarks on tcp://127.0.0.1:%d",
                 listener.port)
        stop_pump = threading.Event()

        def _pump():
            import queue as _queue
            while not stop_pump.is_set():
                try:
                    frame = listener.frames.get(timeout=0.1)
                except _queue.Empty:
                    continue
                try:
                    host.submit(lambda e, f=frame: e.feed_frame(f))
                except StagehandError as exc:
                    log.warning("frame dropped: %s", exc)

        pump = threading.Thread(target=_pump, daemon=True)
        pump.start()
        try:
            return _serve_until_interrupt(host, config, args.no_api)
        finally:
            stop_pump.set()
            listener.stop()


def _run_script(args) -> int:
    if args.script_cmd == "list":
        for name in sorted(BUILTIN_SEQUENCES) + ["old_macdonald"]:
            print(name)
        return EXIT_OK
    config = _load_engine_config(args)
    with _sinks(args) as (record_sink, debug_sink):
        if args.wall:
            engine = Engine(config, record_sink=record_sink, lockstep=False,
                            debug_gestures=debug_sink)
            host = EngineHost(engine)
            seq = _resolve_sequence(args.name, engine)
            host.start()
            host.schedule_sequence(seq)
            return _serve_until_interrupt(host, config, args.no_api,
                                          started=True)
        engine = Engine(config, record_sink=record_sink, lockstep=True,
                        debug_gestures=debug_sink)
        seq = _resolve_sequence(args.name, engine)
        engine.run_script(seq, settle=True)
        engine.close()
        log.info("sequence %s complete at t=%.3f s: %d commands",
                 seq.name, engine.sim_time, engine.command_count)
        return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.mode == "simulate":
            return _run_simulate(args)
        if args.mode == "replay":
            return _run_replay(args)
        if args.mode == "live":
            return _run_live(args)
        if args.mode == "script":
            return _run_script(args)
        raise AssertionError(f"unhandled mode {args.mode}")
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except StagehandError as exc:
        log.error("fatal: %s", exc)
        return EXIT_RUNTIME
    except OSError as exc:
        log.error("fatal: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
