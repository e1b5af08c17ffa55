"""Tiny two-stage models shared by the model tests."""
import torch

from tsdsm.ddpm import NoiseSchedule
from tsdsm.flgm import FLGM, FdnConfig
from tsdsm.lgm import LGM, LdnConfig
from tsdsm.scene import ObjectInstance, Room
from tsdsm.space import SceneSpace
from tsdsm.text import TextVocab


def pair_rooms():
    """Two rooms of two overlapping objects each."""
    a = Room("bedroom", (ObjectInstance("bed", (0.9, 1.0, 0.3), (0.1, 0.2, 0.3), 0.3),
                         ObjectInstance("nightstand", (0.25, 0.2, 0.3), (0.6, 0.9, 0.3), 1.2)), "a")
    b = Room("bedroom", (ObjectInstance("nightstand", (0.3, 0.25, 0.3), (-0.5, 0.1, 0.3), -0.4),
                         ObjectInstance("bed", (0.8, 1.1, 0.25), (-0.1, -0.2, 0.25), 2.0)), "b")
    return [a, b]


def space_for(rooms, n_max):
    return SceneSpace.from_rooms(rooms, n_max)


def tiny_flgm(space, T=20, **cfg):
    torch.manual_seed(0)
    vocab = TextVocab.from_corpus(["bedroom"], space.vocab.names, space.n_max)
    c = FdnConfig(dim=16, depth=2, heads=2, size_hidden=16, class_hidden=16, **cfg)
    return FLGM(c, space, vocab, NoiseSchedule(T, 1e-3, 0.3))


def tiny_lgm(space, T=20, **cfg):
    torch.manual_seed(0)
    c = LdnConfig(**{"dim": 8, "dim_mults": (1, 2), "heads": 2, **cfg})
    return LGM(c, space, NoiseSchedule(T, 1e-3, 0.3))
