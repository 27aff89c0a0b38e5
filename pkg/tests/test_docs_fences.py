from __future__ import annotations

from pathlib import Path

import pytest

DOCS = Path(__file__).resolve().parent.parent / "docs"


@pytest.mark.parametrize("name", sorted(p.name for p in DOCS.glob("*.md")))
def test_docs_code_fences(name):
    doc = (DOCS / name).read_text(encoding="utf-8")
    fence_lines = [line for line in doc.splitlines() if line.startswith("```")]
    assert len(fence_lines) % 2 == 0
    assert all(not line.startswith("``` ") for line in fence_lines)
