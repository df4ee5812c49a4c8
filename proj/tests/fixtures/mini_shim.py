#!/usr/bin/env python3
# Minimal driver speaking the executor's JSON-lines protocol. Test fixture
# only: enough to run the case-study programs, not a hardened sandbox.
import io
import json
import os
import sys
import typing


def emit(channel, obj):
    channel.write(json.dumps(obj) + "\n")
    channel.flush()


def encode(value):
    try:
        json.dumps(value)
        return value
    except (TypeError, ValueError):
        if isinstance(value, (set, frozenset)):
            return sorted(encode(v) for v in value)
        if isinstance(value, tuple):
            return [encode(v) for v in value]
        return str(value)


def resolve_entry(env, entry, own_names):
    fn = env.get(entry)
    if callable(fn) and not isinstance(fn, type):
        return fn
    sol = env.get("Solution")
    if isinstance(sol, type):
        inst = sol()
        if entry and hasattr(inst, entry):
            return getattr(inst, entry)
        methods = [m for m in vars(sol) if not m.startswith("_") and callable(getattr(sol, m))]
        if len(methods) == 1:
            return getattr(inst, methods[0])
    funcs = [n for n in own_names if callable(env.get(n)) and not isinstance(env.get(n), type)]
    if len(funcs) == 1:
        return env[funcs[0]]
    return None


def main():
    args = sys.argv[1:]
    path = args[0]
    kind = args[args.index("--task-kind") + 1] if "--task-kind" in args else "function"
    entry = args[args.index("--entry") + 1] if "--entry" in args else ""

    # keep the protocol channel away from anything the candidate prints
    channel = os.fdopen(os.dup(1), "w")
    devnull = os.open(os.devnull, os.O_WRONLY)
    os.dup2(devnull, 1)
    sys.stdout = io.StringIO()
    requests = sys.stdin

    with open(path) as f:
        source = f.read()
    load_error = None
    code = None
    fn = None
    try:
        code = compile(source, "candidate.py", "exec")
        if kind == "function":
            env = {"__name__": "candidate"}
            exec("from typing import *", env)
            before = set(env)
            exec(code, env)
            fn = resolve_entry(env, entry, [n for n in env if n not in before])
    except BaseException:
        load_error = "LoadError"

    for line in requests:
        if not line.strip():
            continue
        req = json.loads(line)
        rid = req.get("id")
        if load_error:
            emit(channel, {"id": rid, "status": "error", "error_type": load_error})
            continue
        if kind == "function" and fn is None:
            emit(channel, {"id": rid, "status": "error", "error_type": "EntryPointNotFound"})
            continue
        try:
            if kind == "stdin":
                out = io.StringIO()
                sys.stdin, sys.stdout = io.StringIO(req["stdin"]), out
                try:
                    exec(code, {"__name__": "__main__"})
                except SystemExit as e:
                    if e.code not in (None, 0):
                        raise
                result = out.getvalue()
            else:
                result = encode(fn(*req["args"]))
            emit(channel, {"id": rid, "status": "ok", "output": result})
        except BaseException as e:
            emit(channel, {"id": rid, "status": "error", "error_type": type(e).__name__})
        finally:
            sys.stdout = io.StringIO()


if __name__ == "__main__":
    main()
