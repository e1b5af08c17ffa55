from .augment import augment_delete_replace, augment_rotate, expand_corpus
from .config import CategorySpec, CorpusConfig, CountDistribution, RoomTypeSpec, default_config
from .generate import build_database, generate_corpus, generate_room
from .mesh import MeshProxy, PointCloud, category_color, mesh_proxy, sample_pointcloud, write_ply
from .stats import corpus_stats, format_stats_table

__all__ = [
    "CategorySpec", "CorpusConfig", "CountDistribution", "MeshProxy", "PointCloud", "RoomTypeSpec",
    "augment_delete_replace", "augment_rotate", "build_database", "category_color", "corpus_stats",
    "default_config", "expand_corpus", "format_stats_table", "generate_corpus", "generate_room",
    "mesh_proxy", "sample_pointcloud", "write_ply",
]
