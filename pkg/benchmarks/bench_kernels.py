"""Time the compiled and pure-Python kernels on the same workloads.

    python3 benchmarks/bench_kernels.py [--pairs N] [--sentences N]
"""
import argparse
import random
import time

from amrx import kernels
from amrx.graph import AmrGraph
from amrx.smatch import smatch_score
from amrx.wordalign import SentencePair, train_aligner


def random_graph(rng, n_vars, labels=("a", "b", "c", "d"), rels=(":ARG0", ":ARG1", ":mod")):
    names = [f"v{k}" for k in range(n_vars)]
    concepts = {v: rng.choice(labels) for v in names}
    edges = set()
    for k in range(1, n_vars):
        edges.add((names[rng.randrange(k)], rng.choice(rels), names[k]))
    for _ in range(n_vars // 2):
        a, b = rng.sample(names, 2)
        edges.add((a, rng.choice(rels), b))
    return AmrGraph(names[0], concepts, sorted(edges))


def bitext(rng, n):
    vocab = [f"w{k}" for k in range(60)]
    pairs = []
    for _ in range(n):
        src = [rng.choice(vocab) for _ in range(rng.randint(4, 12))]
        pairs.append(SentencePair(src, [w.upper() for w in reversed(src)]))
    return pairs


def timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=100, help="graph pairs for the Smatch run")
    ap.add_argument("--vars", type=int, default=15)
    ap.add_argument("--sentences", type=int, default=2000)
    ap.add_argument("--iterations", type=int, default=5)
    args = ap.parse_args()

    rng = random.Random(0)
    graphs = [(random_graph(rng, args.vars), random_graph(rng, args.vars)) for _ in range(args.pairs)]
    corpus = bitext(rng, args.sentences)
    available = kernels.backends()
    if "cython" not in available:
        print("compiled extension not built; timing the Python kernels only")

    results = {}
    for name, backend in available.items():
        t_smatch = timed(lambda: [smatch_score(a, b, restarts=4, backend=backend) for a, b in graphs])
        t_em = timed(lambda: train_aligner(corpus, args.iterations, "diagonal", backend=backend))
        results[name] = (t_smatch, t_em)
        print(f"{name:>7}: smatch {t_smatch:8.3f}s   em {t_em:8.3f}s")
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        print(f"speedup: smatch x{py[0] / cy[0]:.1f}   em x{py[1] / cy[1]:.1f}")


if __name__ == "__main__":
    main()
