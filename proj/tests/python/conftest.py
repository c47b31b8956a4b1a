# SPDX-License-Identifier: Apache-2.0
import os
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture
def corpus():
    return pathlib.Path(os.environ.get("LIFTEX_CORPUS", ROOT / "corpus"))


@pytest.fixture
def cli():
    path = os.environ.get("LIFTEX_CLI", str(ROOT / "build" / "liftex"))
    if not pathlib.Path(path).exists():
        pytest.skip("command-line binary not built")
    return path
