from fractions import Fraction

import pytest

from twospin import graph as gr
from twospin.spin import SpinParams

PARAMS = [
    SpinParams(1, 0, 1),
    SpinParams(1, 0, Fraction(3, 2)),
    SpinParams(2, Fraction(1, 2), 3),
    SpinParams(1, Fraction(1, 3), Fraction(2, 5)),
    SpinParams(Fraction(3, 2), 0, 7),
]


def corpus():
    """Small planar graphs (at most 16 vertices) used as the oracle corpus."""
    out = []
    for w in range(1, 5):
        for h in range(max(w, 2), 17):
            if w * h <= 16:
                out.append((f"grid:{w},{h}", gr.grid(w, h)))
    out += [(f"cycle:{n}", gr.cycle(n)) for n in range(3, 17)]
    out += [(f"path:{n}", gr.path(n)) for n in range(2, 11)]
    for name in ("triangle", "edge", "k4", "prism", "cube", "octahedron"):
        out.append((name, gr.family(name)))
    out += [("k4^2", gr.family("k4^2")), ("triangle^3", gr.family("triangle^3")),
            ("cube^2", gr.family("cube^2")), ("prism^2", gr.family("prism^2"))]
    g = gr.grid(4, 4)
    out.append(("grid4-minus-corners", gr.induced_subgraph(g, [v for v in range(16) if v not in (0, 3, 12, 15)])[0]))
    out.append(("grid4-minus-center", gr.induced_subgraph(g, [v for v in range(16) if v not in (5, 10)])[0]))
    return out


CORPUS = corpus()


@pytest.fixture(scope="session")
def corpus_graphs():
    return CORPUS


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
