"""
Chunk sources

A source declares the dataset shape up front (meta) and yields MultiViewChunks of
consecutive instances in a fixed order. Sources are re-playable: every call to
iter_chunks starts again from instance 0.
"""

import logging
from typing import Iterator, List, Optional, Protocol, Sequence

import numpy as np

from data.formats import open_mvc1
from data.preprocess import normalize_instances
from model.types import DatasetMeta, MultiViewChunk, PresenceMask

logger = logging.getLogger(__name__)


class ChunkSource(Protocol):
    @property
    def meta(self) -> DatasetMeta: ...

    def iter_chunks(self, chunk_size: int) -> Iterator[MultiViewChunk]: ...


def _check_chunk_size(chunk_size: int) -> None:
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")


class InMemorySource:
    """Chunks sliced out of resident d_v x N matrices (absent columns zeroed)."""

    def __init__(self, views: Sequence[np.ndarray], mask: PresenceMask, n_clusters: int):
        if len(views) != mask.n_views:
            raise ValueError(f"{len(views)} views but the mask has {mask.n_views} rows")
        for v, x in enumerate(views):
            if x.shape[1] != mask.n_instances:
                raise ValueError(f"view {v} has {x.shape[1]} instances, mask has {mask.n_instances}")

        self.views = [np.where(mask.bits[v], np.asarray(x, dtype=float), 0.0) for v, x in enumerate(views)]
        self.mask = mask
        self._meta = DatasetMeta.from_mask([x.shape[0] for x in views], mask, n_clusters)

    @property
    def meta(self) -> DatasetMeta:
        return self._meta

    def iter_chunks(self, chunk_size: int) -> Iterator[MultiViewChunk]:
        _check_chunk_size(chunk_size)
        for index, start in enumerate(range(0, self.mask.n_instances, chunk_size)):
            stop = min(start + chunk_size, self.mask.n_instances)
            yield MultiViewChunk(
                chunk_index=index,
                start=start,
                data=[x[:, start:stop] for x in self.views],
                mask_slice=self.mask.columns(start, stop),
            )


class BinaryFileSource:
    """
    Chunks read on demand from memory-mapped MVC1 view files.

    Only the mask is resident. Each chunk is copied out of the maps, zero-filled
    where absent and, unless normalize is False, scaled to unit norm per present
    instance. A file holding fewer instances than the mask declares ends the
    stream early.
    """

    def __init__(
        self,
        view_paths: Sequence[str],
        mask: PresenceMask,
        n_clusters: int,
        normalize: bool = True
    ):
        if len(view_paths) != mask.n_views:
            raise ValueError(f"{len(view_paths)} view files but the mask has {mask.n_views} rows")
        self.view_paths: List[str] = list(view_paths)
        self.mask = mask
        self.normalize = normalize
        self._maps: Optional[List[np.memmap]] = None
        dims = [m.shape[0] for m in self._open()]
        self._meta = DatasetMeta.from_mask(dims, mask, n_clusters)

    @property
    def meta(self) -> DatasetMeta:
        return self._meta

    def _open(self) -> List[np.memmap]:
        if self._maps is None:
            self._maps = [open_mvc1(p) for p in self.view_paths]
        return self._maps

    def iter_chunks(self, chunk_size: int) -> Iterator[MultiViewChunk]:
        _check_chunk_size(chunk_size)
        maps = self._open()
        available = min(m.shape[1] for m in maps)
        N = min(available, self.mask.n_instances)
        if available < self.mask.n_instances:
            logger.warning(
                f"View files hold {available} instances, mask declares {self.mask.n_instances}"
            )

        for index, start in enumerate(range(0, N, chunk_size)):
            stop = min(start + chunk_size, N)
            mask_slice = self.mask.columns(start, stop)
            data = []
            for v, m in enumerate(maps):
                block = np.array(m[:, start:stop], dtype=float)
                bad = mask_slice[v] & np.isnan(block).any(axis=0)
                if bad.any():
                    raise ValueError(
                        f"{self.view_paths[v]}: NaN in present instance {start + int(np.flatnonzero(bad)[0])}"
                    )
                if self.normalize:
                    block = normalize_instances(block, mask_slice[v])
                else:
                    block = np.where(mask_slice[v], block, 0.0)
                data.append(block)
            yield MultiViewChunk(chunk_index=index, start=start, data=data, mask_slice=mask_slice)
