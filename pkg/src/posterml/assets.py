"""Embedding retrieval over a visual-asset repository, retrieve-or-generate.

The index is an exact flat scan: repository sizes at desk scale stay
small and exactness keeps oracle testing trivial. Embeddings arrive
precomputed (manifest) or from an embedding provider; the index never
embeds text itself.
"""
from __future__ import annotations

import json
import re
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BackendError,
    DimensionMismatch,
    DuplicateAssetId,
    EmptyIndex,
    IoError,
    ZeroVector,
)
from .model import ImagePrompt
from .providers import (
    Backend,
    ImagePart,
    Message,
    ProviderRequest,
    TextPart,
)

RETRIEVAL_ONLY = "retrieval_only"
GENERATION_ONLY = "generation_only"
HYBRID = "hybrid"
ASSET_POLICIES = (RETRIEVAL_ONLY, GENERATION_ONLY, HYBRID)

JUDGE_CRITERIA = "semantic alignment, stylistic consistency, and composability"


@dataclass(frozen=True)
class AssetRecord:
    asset_id: str
    prompt: str
    embedding: tuple[float, ...]
    uri: str

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "prompt": self.prompt,
            "embedding": list(self.embedding),
            "uri": self.uri,
        }


class AssetIndex:
    """Immutable flat index with unit-normalized embedding copies."""

    def __init__(self, records: Sequence[AssetRecord]):
        self.records: tuple[AssetRecord, ...] = tuple(records)
        if not self.records:
            self.dimension = 0
            self._matrix = np.zeros((0, 0), dtype=np.float64)
            return
        self.dimension = len(self.records[0].embedding)
        rows = []
        for rec in self.records:
            if len(rec.embedding) != self.dimension:
                raise DimensionMismatch(
                    f"asset {rec.asset_id!r} has dim {len(rec.embedding)}, "
                    f"index dim is {self.dimension}"
                )
            v = np.asarray(rec.embedding, dtype=np.float64)
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                raise ZeroVector(f"asset {rec.asset_id!r} has a zero-norm embedding")
            rows.append(v / norm)
        self._matrix = np.vstack(rows)

    def __len__(self) -> int:
        return len(self.records)

    def query(self, embedding: Sequence[float], k: int = 1) -> list[tuple[str, float]]:
        """Exact top-k by cosine similarity, ties broken by ascending id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.records:
            return []
        v = np.asarray(embedding, dtype=np.float64)
        if v.ndim != 1 or v.size != self.dimension:
            raise DimensionMismatch(
                f"query dim {v.size} does not match index dim {self.dimension}"
            )
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            raise ZeroVector("query embedding has zero norm")
        sims = self._matrix @ (v / norm)
        order = sorted(
            range(len(self.records)),
            key=lambda i: (-sims[i], self.records[i].asset_id),
        )
        return [(self.records[i].asset_id, float(sims[i])) for i in order[:k]]

    def record_for(self, asset_id: str) -> AssetRecord:
        for rec in self.records:
            if rec.asset_id == asset_id:
                return rec
        raise KeyError(asset_id)


def build_index(manifest_path: str | Path) -> AssetIndex:
    """Build an index from a JSON-lines manifest; duplicate ids reject."""
    path = Path(manifest_path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read manifest {path}: {exc}") from exc
    records: list[AssetRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            rec = AssetRecord(
                asset_id=str(raw["asset_id"]),
                prompt=str(raw["prompt"]),
                embedding=tuple(float(x) for x in raw["embedding"]),
                uri=str(raw["uri"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise IoError(f"manifest line {lineno} is malformed: {exc}") from exc
        if rec.asset_id in seen:
            raise DuplicateAssetId(f"asset_id {rec.asset_id!r} appears twice")
        seen.add(rec.asset_id)
        records.append(rec)
    return AssetIndex(records)


def query(
    index: AssetIndex, embedding: Sequence[float], k: int
) -> list[tuple[str, float]]:
    return index.query(embedding, k)


@dataclass(frozen=True)
class AssetBinding:
    """Resolved image source for one plan layer."""

    layer_id: int
    uri: str
    provenance: str  # "retrieved" | "generated"
    asset_id: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "layer_id": self.layer_id,
            "uri": self.uri,
            "provenance": self.provenance,
            "asset_id": self.asset_id,
        }


def _judge_accepts(judge_backend: Backend, prompt: str, uri: str, layer_id: int) -> bool:
    request = ProviderRequest(
        messages=(
            Message(
                role="user",
                parts=(
                    TextPart(
                        "Does this asset satisfy "
                        f"{JUDGE_CRITERIA} for the layer description below? "
                        "Answer yes or no.\n\n"
                        f"Layer description: {prompt}"
                    ),
                    ImagePart(uri),
                ),
            ),
        )
    )
    reply = judge_backend.complete(request).text.strip().lower()
    m = re.match(r"[^a-z]*([a-z]+)", reply)
    first = m.group(1) if m else ""
    if first in ("yes", "accept", "accepted"):
        return True
    if first in ("no", "reject", "rejected"):
        return False
    raise BackendError(
        f"asset judge reply is not a yes/no verdict: {reply[:80]!r}"
    )


def _generate_to(generator_backend: Backend, prompt: str, target: Path) -> None:
    request = ProviderRequest(
        messages=(Message(role="user", parts=(TextPart(prompt),)),)
    )
    reply = generator_backend.complete(request)
    target.parent.mkdir(parents=True, exist_ok=True)
    if reply.images:
        shutil.copyfile(reply.images[0], target)
    else:
        # text-only generator mocks still need a file at the uri
        target.write_bytes(reply.text.encode("utf-8"))


def retrieve_or_generate(
    image_prompts: Sequence[ImagePrompt],
    index: Optional[AssetIndex],
    policy: str,
    generator_backend: Optional[Backend],
    judge_backend: Optional[Backend],
    embed: Optional[Callable[[str], Sequence[float]]] = None,
    out_dir: Optional[str | Path] = None,
) -> list[AssetBinding]:
    """Bind every image layer to an asset file, retrieving or generating.

    hybrid retrieves the top match, stages a working copy, and asks the
    judge whether it fits; rejected layers are regenerated in place so
    the bound uri never changes. The repository itself is never mutated.
    """
    if policy not in ASSET_POLICIES:
        raise ValueError(f"policy must be one of {ASSET_POLICIES}")
    if policy in (RETRIEVAL_ONLY, HYBRID):
        if index is None or len(index) == 0:
            raise EmptyIndex(f"{policy} policy needs a non-empty asset index")
        if embed is None:
            raise ValueError(f"{policy} policy needs an embedding function")
    if policy in (GENERATION_ONLY, HYBRID):
        if generator_backend is None:
            raise ValueError(f"{policy} policy needs a generator backend")
        if out_dir is None:
            raise ValueError(f"{policy} policy needs an output directory")
    if policy == HYBRID and judge_backend is None:
        raise ValueError("hybrid policy needs a judge backend")

    out = Path(out_dir) if out_dir is not None else None
    bindings: list[AssetBinding] = []
    for item in image_prompts:
        try:
            if policy == GENERATION_ONLY:
                target = out / f"layer-{item.layer_id}.png"
                _generate_to(generator_backend, item.layer_prompt, target)
                bindings.append(
                    AssetBinding(item.layer_id, str(target), "generated")
                )
                continue

            hits = index.query(list(embed(item.layer_prompt)), k=1)
            asset = index.record_for(hits[0][0])

            if policy == RETRIEVAL_ONLY:
                bindings.append(
                    AssetBinding(item.layer_id, asset.uri, "retrieved", asset.asset_id)
                )
                continue

            # hybrid: judge the staged copy, regenerate in place on rejection
            target = out / f"layer-{item.layer_id}{Path(asset.uri).suffix or '.png'}"
            target.parent.mkdir(parents=True, exist_ok=True)
            try:
                shutil.copyfile(asset.uri, target)
            except OSError as exc:
                raise IoError(f"cannot stage asset {asset.uri}: {exc}") from exc
            if _judge_accepts(judge_backend, item.layer_prompt, str(target), item.layer_id):
                bindings.append(
                    AssetBinding(item.layer_id, str(target), "retrieved", asset.asset_id)
                )
            else:
                _generate_to(generator_backend, item.layer_prompt, target)
                bindings.append(
                    AssetBinding(item.layer_id, str(target), "generated", asset.asset_id)
                )
        except BackendError as exc:
            raise BackendError(f"layer {item.layer_id}: {exc}") from exc
    return bindings
