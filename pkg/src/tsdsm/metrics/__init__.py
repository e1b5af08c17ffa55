"""Evaluation metrics over generated and reference scene corpora."""
from .ckl import category_counts, ckl, kl_divergence
from .features import RandomProjection, block_mean
from .fid_kid import frechet_distance, kernel_mmd2, polynomial_kernel
from .raster import ExtentWarning, TopDownMap, rasterize_corpus, rasterize_topdown, save_png
from .report import MetricReport, evaluate
from .sca import sca

__all__ = [
    "category_counts", "ckl", "kl_divergence", "RandomProjection", "block_mean", "frechet_distance",
    "kernel_mmd2", "polynomial_kernel", "ExtentWarning", "TopDownMap", "rasterize_corpus", "rasterize_topdown", "save_png",
    "MetricReport", "evaluate", "sca",
]
