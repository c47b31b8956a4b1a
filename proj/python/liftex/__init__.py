# SPDX-License-Identifier: Apache-2.0
"""Lifted and ground inference for probabilistic logic programs."""

import json
import os

from ._core import RunError as _CoreRunError
from ._core import bench_json as _bench_json
from ._core import run_json as _run_json

__all__ = ["LiftexError", "run", "bench"]


class LiftexError(Exception):
    """Failure carrying the command-line exit code (2 parse, 3 type, 4 unsupported)."""

    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _program(program=None, text=None):
    if (program is None) == (text is None):
        raise ValueError("give exactly one of program (a path) or text")
    return (os.fspath(program), False) if program is not None else (text, True)


def run(query, program=None, *, text=None, mode="auto", populations=None, recurrences=False):
    """Evaluate a ground query; returns the run report as a dict."""
    src, is_text = _program(program, text)
    try:
        return json.loads(_run_json(src, is_text, query, mode, dict(populations or {}), recurrences))
    except _CoreRunError as e:
        code, message = e.args
        raise LiftexError(code, message) from None


def bench(query, population, sizes, program=None, *, text=None, mode="auto"):
    """Population sweep with lifted evaluation; returns the table as a dict."""
    src, is_text = _program(program, text)
    try:
        return json.loads(_bench_json(src, is_text, query, population, list(sizes), mode))
    except _CoreRunError as e:
        code, message = e.args
        raise LiftexError(code, message) from None
