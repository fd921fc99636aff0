"""Unique-sequence aggregation and signature clustering.

Sequences are grouped by their event-type signature; clustering runs over
the unique signatures (weighted by how many sequences share them) with
average linkage on normalized Levenshtein distance, so cost scales with the
number of distinct signatures rather than sequences.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, NotFoundError
from .model import Dataset

Signature = tuple[str, ...]


@dataclass(frozen=True)
class UniqueSequence:
    signature: Signature
    member_ids: frozenset[str]

    @property
    def count(self) -> int:
        return len(self.member_ids)


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: dict  # sequence_id -> "C1".."Ck"
    method: str

    def members(self, label: str) -> frozenset[str]:
        return frozenset(sid for sid, lab in self.labels.items() if lab == label)

    @property
    def sizes(self) -> dict:
        out: dict = {}
        for lab in self.labels.values():
            out[lab] = out.get(lab, 0) + 1
        return out


def unique_sequences(dataset: Dataset) -> list[UniqueSequence]:
    """Partition sequences by signature, most populous first."""
    groups: dict[Signature, set[str]] = {}
    for seq in dataset.sequences:
        groups.setdefault(seq.signature, set()).add(seq.id)
    uniques = [UniqueSequence(sig, frozenset(ids)) for sig, ids in groups.items()]
    uniques.sort(key=lambda u: (-u.count, u.signature))
    return uniques


def signature_distance(a: Signature, b: Signature) -> float:
    """Levenshtein edit distance over event-type symbols, normalized to [0, 1]
    by the longer length. Two empty signatures are at distance 0."""
    if not a and not b:
        return 0.0
    if a == b:
        return 0.0
    n, m = len(a), len(b)
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[m] / max(n, m)


def cluster(dataset: Dataset, k: int) -> ClusterAssignment:
    """Agglomerative average-linkage clustering of unique signatures, cut at k.

    Linkage means are weighted by signature counts; merge ties break on the
    lexicographically smallest signature pair, so results are deterministic.
    Labels C1..Ck are assigned by descending cluster size.
    """
    uniques = unique_sequences(dataset)
    if not 1 <= k <= len(uniques):
        raise ConfigError(f"k must be in [1, {len(uniques)}], got {k}")

    # cluster state: list of (canonical signature, weight, member unique idxs)
    active = {
        i: (u.signature, float(u.count), [i]) for i, u in enumerate(uniques)
    }
    dist: dict[tuple[int, int], float] = {}
    idxs = sorted(active)
    for ai in range(len(idxs)):
        for bi in range(ai + 1, len(idxs)):
            i, j = idxs[ai], idxs[bi]
            dist[(i, j)] = signature_distance(uniques[i].signature, uniques[j].signature)

    next_id = len(uniques)
    while len(active) > k:
        best = None
        for (i, j), d in dist.items():
            sig_pair = tuple(sorted((active[i][0], active[j][0])))
            cand = (d, sig_pair, i, j)
            if best is None or cand[:2] < best[:2]:
                best = cand
        _, _, i, j = best
        sig_i, w_i, members_i = active[i]
        sig_j, w_j, members_j = active[j]
        merged = (min(sig_i, sig_j), w_i + w_j, members_i + members_j)
        del active[i], active[j]
        # weighted average linkage update
        new_dist: dict[tuple[int, int], float] = {}
        for (a, b), d in dist.items():
            if a in (i, j) or b in (i, j):
                continue
            new_dist[(a, b)] = d
        for other in active:
            d_i = dist.get((min(i, other), max(i, other)))
            d_j = dist.get((min(j, other), max(j, other)))
            new_dist[(min(other, next_id), max(other, next_id))] = (
                w_i * d_i + w_j * d_j
            ) / (w_i + w_j)
        active[next_id] = merged
        dist = new_dist
        next_id += 1

    # order clusters by sequence count desc, then canonical signature
    clusters = sorted(
        active.values(), key=lambda c: (-c[1], c[0])
    )
    labels: dict[str, str] = {}
    for rank, (_, _, members) in enumerate(clusters, start=1):
        label = f"C{rank}"
        for ui in members:
            for sid in uniques[ui].member_ids:
                labels[sid] = label
    return ClusterAssignment(k=k, labels=labels, method=f"average-linkage edit distance, k={k}")


def import_labels(dataset: Dataset, path: str | Path) -> ClusterAssignment:
    """Read precomputed cluster labels from a sequence_id,label CSV.

    Every sequence in the dataset must be labeled; rows for unknown
    sequences raise.
    """
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"sequence_id", "label"}:
            raise ConfigError(f"{path}: expected header sequence_id,label")
        for row in reader:
            labels[row["sequence_id"]] = row["label"]
    known = {seq.id for seq in dataset.sequences}
    unknown = set(labels) - known
    if unknown:
        raise NotFoundError(f"labels for unknown sequences: {sorted(unknown)[:5]}")
    unlabeled = known - set(labels)
    if unlabeled:
        raise ConfigError(f"unlabeled sequences: {sorted(unlabeled)[:5]}")
    k = len(set(labels.values()))
    return ClusterAssignment(k=k, labels=labels, method=f"imported from {path}")


def export_labels(assignment: ClusterAssignment, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sequence_id", "label"])
        for sid in sorted(assignment.labels):
            writer.writerow([sid, assignment.labels[sid]])
