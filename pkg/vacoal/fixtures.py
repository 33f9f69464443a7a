"""
Synthetic genealogy fixtures.

``generate_dag`` lays nodes out in generations; each node below the top
layer draws between 1 and ``max_out_degree`` mentors from earlier layers,
mostly the one directly above. Planted mutual pairs add the reverse of a
random edge so purification has something to remove. Predicates give every
node a field, a language, an era year derived from its layer, employers and
society memberships that grow over time.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .graph import Edge

logger = logging.getLogger(__name__)

FIELDS = (
    "calculus", "geometry", "algebra", "astronomy", "mechanics", "optics",
    "number_theory", "analysis", "logic", "probability", "physics", "philosophy",
)
LANGUAGES = ("latin", "french", "german", "english", "italian", "dutch", "russian", "arabic")
EMPLOYERS = tuple(f"U{i:03d}" for i in range(40))
SOCIETIES = tuple(f"S{i:02d}" for i in range(12))


@dataclass
class SyntheticGraph:
    edges: List[Edge]
    predicates: List[Tuple[str, str, str]]
    starts: List[str]
    layers: List[List[str]]


def node_name(i: int) -> str:
    return f"N{i:06d}"


def generate_dag(
    nodes: int = 1000,
    max_out_degree: int = 3,
    depth: int = 20,
    seed: int = 0,
    mutual_pairs: int = 0,
    first_year: int = 1300,
    years_per_layer: int = 25,
) -> SyntheticGraph:
    """
    Deterministic layered DAG plus predicates.

    Returns:
        SyntheticGraph: edges in generation order, predicate rows, the
        bottom-layer nodes as suggested start nodes, and the layer lists
    """
    if nodes < 2 or depth < 2 or max_out_degree < 1:
        raise ValueError("Need at least 2 nodes, 2 layers and out-degree 1")
    depth = min(depth, nodes)
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, nodes), size=depth - 1, replace=False))
    bounds = [0, *cuts.tolist(), nodes]
    layers = [[node_name(i) for i in range(bounds[k], bounds[k + 1])] for k in range(depth)]

    edges: List[Edge] = []
    for k in range(1, depth):
        above = layers[k - 1]
        older = [n for layer in layers[: k - 1] for n in layer]
        for student in layers[k]:
            degree = int(rng.integers(1, max_out_degree + 1))
            mentors = {above[int(rng.integers(len(above)))]}
            while len(mentors) < degree:
                pool = older if older and rng.random() < 0.2 else above
                mentors.add(pool[int(rng.integers(len(pool)))])
                if len(mentors) >= len(above) + len(older):
                    break
            edges.extend((student, m) for m in sorted(mentors))

    if mutual_pairs:
        picks = rng.choice(len(edges), size=min(mutual_pairs, len(edges)), replace=False)
        edges.extend((edges[i][1], edges[i][0]) for i in sorted(picks.tolist()))

    predicates: List[Tuple[str, str, str]] = []
    for k, layer in enumerate(layers):
        year_base = first_year + k * years_per_layer
        for node in layer:
            predicates.append((node, "ERA", str(year_base + int(rng.integers(years_per_layer)))))
            predicates.append((node, "FIELD", FIELDS[int(rng.integers(len(FIELDS)))]))
            predicates.append((node, "LANGUAGE", LANGUAGES[min(int(rng.integers(k + 1)) // 3, len(LANGUAGES) - 1)]))
            predicates.append((node, "EMPLOYER", EMPLOYERS[int(rng.integers(min(len(EMPLOYERS), 2 + 2 * k)))]))
            for society in sorted(set(rng.choice(len(SOCIETIES), size=int(rng.integers(0, 1 + k * 4 // depth))).tolist())):
                predicates.append((node, "MEMBER_OF", SOCIETIES[society]))

    logger.info(f"Generated DAG: {nodes} nodes in {depth} layers, {len(edges)} edges, {mutual_pairs} planted mutual pairs")
    return SyntheticGraph(edges, predicates, list(layers[-1]), layers)
