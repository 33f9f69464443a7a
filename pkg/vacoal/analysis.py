"""
HDC semantic analysis over traced genealogies.

Node vectors bundle the role-value bindings of a node's predicates; concept
vectors bundle member tokens. Affinity unbinds a role and takes the best
match against the concept's members. The remaining functions turn trace
records and predicate tables into the structural indicators: Giant Score,
path-count statistics, hourglass traffic, era-window signals, entropy,
continuity, and the theoretical error bounds of the voting memory.
"""

import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import poisson

from . import config
from .exceptions import ConfigError, EmptyInputError, NormalizationError
from .graph import PredicateTable
from .hypervector import Hypervector, TokenCodebook, bind, similarity, unbind_role
from .search import PathRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeVector:
    node: str
    hv: Hypervector


@dataclass(frozen=True)
class ConceptVector:
    name: str
    members: Tuple[str, ...]
    member_hvs: Tuple[Hypervector, ...]
    hv: Hypervector


def build_node_vector(node: str, predicates: PredicateTable, codebook: TokenCodebook) -> NodeVector:
    """Bundle of bind(token(p), token(v)); a node without predicates gets its bare token."""
    pairs = predicates.pairs(node)
    if not pairs:
        return NodeVector(node, codebook.token(node))
    bound = [bind(codebook.token(p), codebook.token(v)) for p, v in pairs]
    return NodeVector(node, codebook.bundle(bound))


def build_node_vectors(nodes: Iterable[str], predicates: PredicateTable, codebook: TokenCodebook) -> Dict[str, NodeVector]:
    return {node: build_node_vector(node, predicates, codebook) for node in nodes}


def build_concept(name: str, members: Sequence[str], codebook: TokenCodebook) -> ConceptVector:
    members = tuple(members)
    if not members:
        raise EmptyInputError(f"Concept {name!r} has no member tokens")
    hvs = tuple(codebook.token(m) for m in members)
    return ConceptVector(name, members, hvs, codebook.bundle(list(hvs)))


def field_affinity(node_vector: NodeVector, concept: ConceptVector, role: Hypervector) -> float:
    """
    Best similarity between the role-unbound node vector and any concept member.

    Raises:
        EmptyInputError: If the concept has no members
    """
    if not concept.member_hvs:
        raise EmptyInputError(f"Concept {concept.name!r} has no member tokens")
    value = unbind_role(node_vector.hv, role)
    return max(similarity(value, member) for member in concept.member_hvs)


@dataclass(frozen=True)
class GiantScoreRow:
    node: str
    s: float
    s_hat: float
    t_hat: float
    g: float
    paths: int


def giant_score(s: float, paths: int, max_paths: int, node: str = "") -> GiantScoreRow:
    """
    G = s_hat * t_hat with s_hat = max(s - 0.5, 0) * 10 and t_hat = paths / max_paths.

    Raises:
        NormalizationError: If max_paths is zero
    """
    if max_paths <= 0:
        raise NormalizationError("max_paths must be positive to normalise path traffic")
    if not 0 <= paths <= max_paths:
        raise ValueError(f"paths must lie in [0, {max_paths}], got {paths}")
    s_hat = max(s - 0.5, 0.0) * 10.0
    t_hat = paths / max_paths
    return GiantScoreRow(node, s, s_hat, t_hat, s_hat * t_hat, paths)


def path_counts(records: Iterable[PathRecord]) -> Dict[str, int]:
    """Number of distinct start nodes whose traced paths reach each node."""
    starts = defaultdict(set)
    for r in records:
        starts[r.node].add(r.start)
    return {node: len(s) for node, s in starts.items()}


def path_count_histogram(counts: Mapping[str, int]) -> Dict[int, int]:
    """How many nodes share each path count."""
    return dict(sorted(Counter(counts.values()).items()))


def giant_table(affinities: Mapping[str, float], counts: Mapping[str, int], max_paths: Optional[int] = None) -> List[GiantScoreRow]:
    """Giant Score rows sorted by descending g, then node id."""
    if max_paths is None:
        max_paths = max(counts.values(), default=0)
    rows = [giant_score(s, counts.get(node, 0), max_paths, node) for node, s in affinities.items()]
    return sorted(rows, key=lambda row: (-row.g, row.node))


@dataclass
class TrafficProfile:
    node: str
    up_counts: List[int]
    down_counts: List[int]

    @staticmethod
    def _mean(counts: List[int]) -> float:
        nonzero = [c for c in counts if c]
        return sum(nonzero) / len(nonzero) if nonzero else 0.0

    @property
    def up_mean(self) -> float:
        return self._mean(self.up_counts)

    @property
    def down_mean(self) -> float:
        return self._mean(self.down_counts)

    @property
    def thickness_ratio(self) -> Optional[float]:
        return self.down_mean / self.up_mean if self.up_mean > 0 else None

    def bars(self) -> List[Tuple[str, int, int]]:
        """(direction, generation, count) rows for plotting."""
        return [("up", k + 1, c) for k, c in enumerate(self.up_counts)] + [
            ("down", k + 1, c) for k, c in enumerate(self.down_counts)
        ]

    def as_dict(self) -> dict:
        return {
            "node": self.node,
            "up_counts": self.up_counts,
            "down_counts": self.down_counts,
            "up_mean": self.up_mean,
            "down_mean": self.down_mean,
            "thickness_ratio": self.thickness_ratio,
        }


def _route_counts(links: Mapping[str, Iterable[str]], origin: str, gens: int) -> List[int]:
    ways = {origin: 1}
    counts = []
    for _ in range(gens):
        step: Dict[str, int] = defaultdict(int)
        for node, n in ways.items():
            for nxt in links.get(node, ()):
                step[nxt] += n
        counts.append(sum(step.values()))
        ways = step
    return counts


def traversed_edges(records: Iterable[PathRecord]) -> set:
    """Distinct (student, mentor) edges that some trace record walked."""
    return {(r.parent, r.node) for r in records}


def traffic_profile(records: Sequence[PathRecord], node: str, up_gens: int, down_gens: int) -> TrafficProfile:
    """
    Distinct k-hop routes through ``node`` over the traversed edges, towards
    mentors (up) and towards students (down).
    """
    edges = traversed_edges(records)
    up, down = defaultdict(list), defaultdict(list)
    for student, mentor in sorted(edges):
        up[student].append(mentor)
        down[mentor].append(student)
    if node not in up and node not in down:
        return TrafficProfile(node, [0] * up_gens, [0] * down_gens)
    return TrafficProfile(node, _route_counts(up, node, up_gens), _route_counts(down, node, down_gens))


def era_years(predicates: PredicateTable, era_field: str = "ERA") -> Dict[str, int]:
    """First parseable integer year of each node's era predicate."""
    years = {}
    for node in predicates.nodes():
        for value in predicates.values(node, era_field):
            try:
                years[node] = int(value)
                break
            except ValueError:
                logger.debug(f"Ignoring non-numeric {era_field} value {value!r} for {node}")
    return years


def era_windows(start: int, end: int, width: int = config.default_era_window) -> List[Tuple[int, int]]:
    """Half-open [lo, lo + width) windows covering [start, end)."""
    if width <= 0:
        raise ConfigError("Era window width must be positive")
    return [(lo, min(lo + width, end)) for lo in range(start, end, width)]


@dataclass
class WindowSignal:
    start: int
    end: int
    members: int
    similarity: Optional[float]
    delta: Optional[float]


def window_signal(
    node_vectors: Mapping[str, NodeVector],
    years: Mapping[str, int],
    windows: Sequence[Tuple[int, int]],
    token,
    role: Hypervector,
    codebook: TokenCodebook,
) -> List[WindowSignal]:
    """
    Per window, bundle member node vectors, unbind ``role`` and measure the
    similarity to ``token``, or the best similarity when ``token`` is a
    sequence of concept members. Empty windows report no signal; a delta needs
    both the window and its predecessor.
    """
    targets = [token] if isinstance(token, Hypervector) else list(token)
    signals: List[WindowSignal] = []
    previous = None
    for lo, hi in windows:
        members = sorted(n for n, y in years.items() if lo <= y < hi and n in node_vectors)
        value = None
        if members:
            pooled = codebook.bundle([node_vectors[n].hv for n in members])
            value = max(similarity(unbind_role(pooled, role), t) for t in targets)
        delta = value - previous if value is not None and previous is not None else None
        signals.append(WindowSignal(lo, hi, len(members), value, delta))
        previous = value
    return signals


def shannon_entropy(counts: Mapping[str, int]) -> float:
    """
    H = -sum p log2 p over the positive counts.

    Raises:
        EmptyInputError: If the counts sum to zero
    """
    values = np.array([c for c in counts.values()], dtype=np.float64)
    if (values < 0).any():
        raise ValueError("Counts must be non-negative")
    total = values.sum()
    if total <= 0:
        raise EmptyInputError("Entropy of an empty distribution is undefined")
    p = values[values > 0] / total
    return float(-(p * np.log2(p)).sum()) + 0.0


def continuity(pre_bundle: Hypervector, post_bundle: Hypervector) -> float:
    """Similarity between two population bundles; 0.5 is the random baseline."""
    return similarity(pre_bundle, post_bundle)


@dataclass
class BoundsReport:
    blocks: int
    depth_exp: int
    address_space: int
    p: float
    mu: float
    theta: float
    delta: float
    ln_p_error: float
    poisson_tail: List[float] = field(repr=False)
    cr1: float
    gens: int
    cr2_prediction: float

    def as_dict(self) -> dict:
        return asdict(self)


def bounds(blocks: int, depth_exp: int, cr1: float, gens: int, address_space: Optional[int] = None) -> BoundsReport:
    """
    Chernoff bound on a wrong-winner vote and the CR2 decay prediction.

    Noise votes land on one of M = 2^m - 1 addresses (or ``address_space``)
    with p = 1/M; mu = N p, theta = N / 2 and
    ln P <= mu (delta - (1 + delta) ln(1 + delta)) with delta = theta/mu - 1.
    ``poisson_tail[k]`` is P(k accidental coincidences) for k = 0..theta.
    """
    if blocks < 2:
        raise ConfigError("Block count must be at least 2")
    if depth_exp < 1:
        raise ConfigError("Depth exponent must be at least 1")
    if not 0.0 < cr1 <= 1.0:
        raise ConfigError("cr1 must lie in (0, 1]")
    if gens < 0:
        raise ConfigError("gens must be non-negative")
    m_space = address_space if address_space is not None else (1 << depth_exp) - 1
    if m_space < 1:
        raise ConfigError("Address space must be positive")
    p = 1.0 / m_space
    mu = blocks * p
    theta = blocks / 2
    delta = theta / mu - 1.0
    ln_p = mu * (delta - (1.0 + delta) * math.log1p(delta))
    tail = poisson.pmf(np.arange(int(theta) + 1), mu).tolist()
    return BoundsReport(
        blocks=blocks,
        depth_exp=depth_exp,
        address_space=m_space,
        p=p,
        mu=mu,
        theta=theta,
        delta=delta,
        ln_p_error=ln_p,
        poisson_tail=tail,
        cr1=cr1,
        gens=gens,
        cr2_prediction=cr2_prediction(cr1, gens),
    )


def cr2_prediction(cr1: float, gens: int) -> float:
    """Closed-form path confidence after ``gens`` steps at constant CR1."""
    return cr1 ** gens


# -- era indicators --------------------------------------------------------

ERAS = ("pre", "interim", "post")


def era_of(year: int, pivot_start: int, pivot_end: int) -> str:
    if year < pivot_start:
        return "pre"
    if year < pivot_end:
        return "interim"
    return "post"


def _era_groups(years: Mapping[str, int], pivot_start: int, pivot_end: int) -> Dict[str, List[str]]:
    groups = {era: [] for era in ERAS}
    for node in sorted(years):
        groups[era_of(years[node], pivot_start, pivot_end)].append(node)
    return groups


def era_society_table(predicates: PredicateTable, years: Mapping[str, int], pivot_start: int, pivot_end: int, member_field: str = "MEMBER_OF") -> Dict[str, dict]:
    """Scholars and society memberships per era around a pivot."""
    table = {}
    for era, nodes in _era_groups(years, pivot_start, pivot_end).items():
        memberships = [len(predicates.values(n, member_field)) for n in nodes]
        total = len(nodes)
        members = sum(1 for c in memberships if c)
        table[era] = {
            "scholars": total,
            "members": members,
            "member_pct": 100.0 * members / total if total else None,
            "memberships": sum(memberships),
            "mean_memberships": sum(memberships) / total if total else None,
        }
    return table


def society_explosion(table: Mapping[str, dict]) -> Optional[float]:
    """Post over Pre mean memberships per scholar."""
    pre, post = table["pre"]["mean_memberships"], table["post"]["mean_memberships"]
    if not pre or post is None:
        return None
    return post / pre


def hub_diversification(predicates: PredicateTable, years: Mapping[str, int], pivot_start: int, pivot_end: int, hub_field: str = "EMPLOYER") -> Optional[float]:
    """Post over Pre count of distinct employer values."""
    groups = _era_groups(years, pivot_start, pivot_end)
    distinct = {
        era: {v for n in groups[era] for v in predicates.values(n, hub_field)} for era in ("pre", "post")
    }
    if not distinct["pre"]:
        return None
    return len(distinct["post"]) / len(distinct["pre"])


def predicate_continuity(
    node_vectors: Mapping[str, NodeVector],
    years: Mapping[str, int],
    pivot_start: int,
    pivot_end: int,
    role: Hypervector,
    codebook: TokenCodebook,
) -> Optional[float]:
    """Continuity of the role-unbound Pre and Post population bundles."""
    groups = _era_groups(years, pivot_start, pivot_end)
    bundles = []
    for era in ("pre", "post"):
        nodes = [n for n in groups[era] if n in node_vectors]
        if not nodes:
            return None
        pooled = codebook.bundle([node_vectors[n].hv for n in nodes])
        bundles.append(unbind_role(pooled, role))
    return continuity(*bundles)


def downstream_nodes(records: Iterable[PathRecord], hub: str) -> List[str]:
    """Nodes reachable from ``hub`` towards students over traversed edges."""
    students = defaultdict(set)
    for student, mentor in traversed_edges(records):
        students[mentor].add(student)
    seen, stack = set(), [hub]
    while stack:
        for s in students.get(stack.pop(), ()):
            if s not in seen and s != hub:
                seen.add(s)
                stack.append(s)
    return sorted(seen)


def influence_entropy(records: Sequence[PathRecord], hub: str, predicates: PredicateTable, fields: Sequence[str] = ("FIELD", "LANGUAGE", "EMPLOYER")) -> Optional[float]:
    """Entropy of predicate values over the hub's downstream nodes."""
    counts = Counter(
        f"{p}={v}" for n in downstream_nodes(records, hub) for p in fields for v in predicates.values(n, p)
    )
    if not counts:
        return None
    return shannon_entropy(counts)


def language_entropy_by_era(predicates: PredicateTable, years: Mapping[str, int], windows: Sequence[Tuple[int, int]], language_field: str = "LANGUAGE") -> List[Tuple[int, int, Optional[float]]]:
    rows = []
    for lo, hi in windows:
        counts = Counter(
            v for n, y in years.items() if lo <= y < hi for v in predicates.values(n, language_field)
        )
        rows.append((lo, hi, shannon_entropy(counts) if counts else None))
    return rows
