# Copyright (c) 2026 The tgverify Authors
# SPDX-License-Identifier: Apache-2.0

from ._core import (
    Graph,
    Result,
    TgvError,
    bug_names,
    compare,
    fixture,
    fixture_names,
    validate_rule,
)

__all__ = [
    "Graph",
    "Result",
    "TgvError",
    "bug_names",
    "compare",
    "fixture",
    "fixture_names",
    "validate_rule",
]
__version__ = "0.1.0"
