import random

import pytest
from hypothesis import strategies as st

from amrx.graph import AmrGraph, Constant, parse_penman

SOVEREIGNTY = "(s / sovereignty :poss (c / country :mod (e / each)) :domain (t / this))"
SOVEREIGNTY_EN = "This is the sovereignty of each country".split()
SOVEREIGNTY_IT = "Questa è la sovranità di ogni paese".split()

# parsed example outputs, one per language
EXAMPLE_PARSES = {
    "adopt": "(a / adopt-01 :ARG0 (c / commission) :time (d / date-entity :year 1998 :mod (f / final))"
             " :ARG1 (c2 / communicate-01 :mod (a2 / another) :ARG0 c))",
    "assess": "(a / assess-01 :ARG1 (i / impact-01 :ARG1 (t / type :mod (t2 / this))"
              " :ARG1 (e / export-01 :ARG1 (c / cocoa) :ARG0 t)))",
    "do": "(d / do-02 :location (c / country) :polarity - :ARG0 (s / state"
          " :ARG0-of (h / have-org-role-91 :ARG2 (m2 / member)) :quant (m / many)))",
    "and": "(a / and :op2 (i / intend-01) :op2 (s / society) :op1 (r / repatriate-01 :ARG1 (r2 / refugee)))",
}

# translational divergence examples
DIVERGENCES = {
    "envy": "(e / envy :domain (i / i))",
    "answer": "(a / answer-01 :ARG0 (w / we))",
    "enter": "(e / enter-01 :ARG1 (h / home))",
    "eat": "(e / eat-01 :ARG0 (i / i))",
    "fear": "(f / fear-01 :ARG0 (i / i) :ARG1 i)",
    "fear-two-nodes": "(f / fear-01 :ARG0 (i / i) :ARG0 (i2 / i))",
    "like": "(l / like-01 :ARG1 (g / grape :ARG0 (i / i)) :ARG0 i)",
}

ALL_DISPLAYED = {"sovereignty": SOVEREIGNTY, **EXAMPLE_PARSES, **DIVERGENCES}

CONCEPTS = ("dog", "cat", "run-01", "see-01", "big", "man", "and", "i")
RELATIONS = (":ARG0", ":ARG1", ":mod", ":domain", ":ARG0-of", ":op1")
CONSTANTS = ("-", "1998", "3", "imperative")


def random_graph(rng: random.Random, max_vars: int = 6, reentrancy: float = 0.3, constants: float = 0.3,
                 concepts=CONCEPTS, relations=RELATIONS) -> AmrGraph:
    n = rng.randint(1, max_vars)
    names = [f"v{k}" for k in range(n)]
    graph_concepts = {v: rng.choice(concepts) for v in names}
    edges = []
    seen = set()

    def add(edge):
        if edge not in seen:
            seen.add(edge)
            edges.append(edge)

    for k in range(1, n):
        add((names[rng.randrange(k)], rng.choice(relations), names[k]))
    for _ in range(rng.randint(0, n)):
        if rng.random() < reentrancy and n > 1:
            a, b = rng.sample(names, 2)
            add((a, rng.choice(relations), b))
        if rng.random() < constants:
            add((rng.choice(names), rng.choice((":polarity", ":quant", ":mode")), Constant(rng.choice(CONSTANTS))))
    rng.shuffle(edges)
    return AmrGraph(names[0], graph_concepts, edges)


@st.composite
def graphs(draw, max_vars=6):
    return random_graph(random.Random(draw(st.integers(0, 2 ** 32 - 1))), max_vars)


@pytest.fixture
def sovereignty():
    return parse_penman(SOVEREIGNTY)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
