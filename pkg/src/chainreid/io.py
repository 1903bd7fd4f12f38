"""Readers and writers for the on-disk stage formats.

* embeddings: CSV with header ``id,v0,...,v{d-1}``
* matrix: text; ``m n``, row ids, column ids, then m rows of n values
* ground truth: CSV with header ``id,identity,frame`` (frame may be empty
  or the column absent)
* ranking: one ``query_id: gallery_id ...`` line per query

Numbers are written with six decimals so that outputs are byte-stable.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .chain import RetrievalResult
from .core import ChainReIDError, DistanceMatrix, EmbeddingSet, FormatError, GroundTruth

FLOAT_FMT = "{:.6f}"


def _fmt(x: float) -> str:
    s = FLOAT_FMT.format(x)
    return "0.000000" if s == "-0.000000" else s


def _float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"{where}: not a number: {token!r}") from None


def write_embeddings(path, emb: EmbeddingSet):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id"] + [f"v{j}" for j in range(emb.dim)])
        for item, vec in zip(emb.ids, emb.vectors):
            writer.writerow([item] + [_fmt(v) for v in vec])


def read_embeddings(path) -> EmbeddingSet:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError(f"{path}: empty embedding file")
    header = rows[0]
    dim = len(header) - 1
    if header[0] != "id" or dim < 1 or header[1:] != [f"v{j}" for j in range(dim)]:
        raise FormatError(f"{path}: header must be id,v0,...,v{{d-1}}")
    ids, vectors = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim + 1:
            raise FormatError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(row)}")
        ids.append(row[0])
        vectors.append([_float(v, f"{path}:{lineno}") for v in row[1:]])
    try:
        return EmbeddingSet(tuple(ids), np.array(vectors, dtype=np.float64).reshape(len(ids), dim))
    except ChainReIDError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_matrix(path, mat: DistanceMatrix):
    m, n = mat.shape
    lines = [f"{m} {n}", " ".join(mat.row_ids), " ".join(mat.col_ids)]
    lines += [" ".join(_fmt(v) for v in row) for row in mat.values]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_matrix(path) -> DistanceMatrix:
    lines = Path(path).read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 3:
        raise FormatError(f"{path}: matrix file needs a size line and two label lines")
    try:
        m, n = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise FormatError(f"{path}: first line must be 'm n'") from None
    row_ids, col_ids = lines[1].split(), lines[2].split()
    if len(row_ids) != m or len(col_ids) != n:
        raise FormatError(f"{path}: label counts do not match declared size {m}x{n}")
    body = lines[3:]
    if len(body) != m:
        raise FormatError(f"{path}: expected {m} value rows, got {len(body)}")
    values = np.zeros((m, n))
    for i, line in enumerate(body):
        tokens = line.split()
        if len(tokens) != n:
            raise FormatError(f"{path}:{i + 4}: expected {n} values, got {len(tokens)}")
        values[i] = [_float(t, f"{path}:{i + 4}") for t in tokens]
    try:
        return DistanceMatrix(tuple(row_ids), tuple(col_ids), values)
    except ChainReIDError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_truth(path, truth: GroundTruth, ids: Optional[Sequence[str]] = None):
    ids = list(truth.identity_of) if ids is None else list(ids)
    frames = truth.frame_of or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "identity", "frame"])
        for item in ids:
            frame = frames.get(item)
            writer.writerow([item, truth.identity_of[item], "" if frame is None else frame])


def read_truth(path) -> GroundTruth:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["id", "identity"] or rows[0][2:] not in ([], ["frame"]):
        raise FormatError(f"{path}: header must be id,identity[,frame]")
    width = len(rows[0])
    identity_of, frame_of = {}, {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) not in (2, width):
            raise FormatError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
        item, identity = row[0], row[1]
        if item in identity_of:
            raise FormatError(f"{path}:{lineno}: duplicate id {item!r}")
        identity_of[item] = identity
        if len(row) > 2 and row[2] != "":
            try:
                frame_of[item] = int(row[2])
            except ValueError:
                raise FormatError(f"{path}:{lineno}: frame must be an integer") from None
    try:
        return GroundTruth(identity_of, frame_of or None)
    except ChainReIDError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_ranking(path, result: RetrievalResult):
    lines = [f"{q}: " + " ".join(result.ranked_ids(i)) for i, q in enumerate(result.query_ids)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_ranking(path, gallery_ids: Optional[Sequence[str]] = None) -> RetrievalResult:
    """Parse a ranking file.

    Gallery positions are taken from ``gallery_ids`` when given (e.g. a
    matrix's column labels), otherwise from the order of the first line.
    """
    query_ids, lists = [], []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        if not sep or not head.strip():
            raise FormatError(f"{path}:{lineno}: expected 'query_id: gallery ids'")
        query_ids.append(head.strip())
        lists.append(tail.split())
    if not lists:
        raise FormatError(f"{path}: no rankings")
    gallery = tuple(lists[0]) if gallery_ids is None else tuple(gallery_ids)
    position = {g: j for j, g in enumerate(gallery)}
    rankings = np.empty((len(lists), len(gallery)), dtype=np.int64)
    for i, items in enumerate(lists):
        if len(items) != len(gallery) or set(items) != set(gallery):
            raise FormatError(f"{path}: ranking of {query_ids[i]!r} is not a permutation of the gallery")
        rankings[i] = [position[g] for g in items]
    try:
        return RetrievalResult(tuple(query_ids), gallery, rankings)
    except ChainReIDError as exc:
        raise FormatError(f"{path}: {exc}") from None
