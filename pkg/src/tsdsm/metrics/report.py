"""Metric bundle with raw values plus the display scaling used in result tables."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from ..scene import Room
from .ckl import ckl
from .features import FeatureExtractor, RandomProjection
from .fid_kid import frechet_distance, kernel_mmd2
from .raster import DEFAULT_EXTENT, DEFAULT_RESOLUTION, rasterize_corpus
from .sca import sca

NOTE = "computed on rasterized top-down maps; values are self-consistent but not comparable to photoreal-render metrics"


@dataclass
class MetricReport:
    fid: float
    kid: float  # raw
    sca: float  # percent
    ckl: float  # raw
    n_generated: int
    n_reference: int
    extractor: str
    seed: int
    jitter: bool = False
    note: str = NOTE
    display: dict = field(default_factory=dict)

    def __post_init__(self):
        self.display = {"FID": round(self.fid, 4), "KID x0.001": round(self.kid * 1000.0, 4),
                        "SCA %": round(self.sca, 2), "CKL x0.001": round(self.ckl * 1000.0, 4)}

    def to_json(self) -> dict:
        return asdict(self)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "MetricReport":
        d = json.loads(Path(path).read_text())
        d.pop("display", None)
        return cls(**d)


def evaluate(generated: Sequence[Room], reference: Sequence[Room], seed: int = 0,
             extractor: FeatureExtractor | None = None, resolution: int = DEFAULT_RESOLUTION,
             extent: float = DEFAULT_EXTENT) -> MetricReport:
    extractor = extractor or RandomProjection(seed=seed)
    gi = rasterize_corpus(list(generated), resolution, extent)
    ri = rasterize_corpus(list(reference), resolution, extent)
    fg, fr = extractor(gi), extractor(ri)
    fd = frechet_distance(fg, fr)
    return MetricReport(
        fid=fd.value, kid=kernel_mmd2(fg, fr), sca=sca(gi, ri, seed=seed), ckl=ckl(generated, reference),
        n_generated=len(generated), n_reference=len(reference), extractor=extractor.name, seed=seed,
        jitter=fd.jittered,
    )
