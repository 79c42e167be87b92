import numpy as np
import pytest

from rwvideo.io import CorpusSpec, generate_corpus
from rwvideo.metrics import balanced_logo
from rwvideo.video_model import FrameSequence


def corpus(kind, n=18, w=64, h=64, **kw):
    return generate_corpus(CorpusSpec(kind, n, w, h, **kw))


def constant_seq(level, n=4, w=16, h=16):
    return FrameSequence(np.full((n, h, w), level, dtype=np.uint8))


@pytest.fixture
def small_rect():
    return corpus("moving-rect", n=6, w=32, h=32, speed=2, size=8)


@pytest.fixture
def logo16():
    return balanced_logo(16, 16)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py" in rep.nodeid:
                lines.append((rep.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")
