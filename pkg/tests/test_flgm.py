import pytest
import torch

from models import pair_rooms, space_for, tiny_flgm
from tsdsm.checkpoint import CheckpointError
from tsdsm.flgm import (FLGM, FdnConfig, decode_furniture, drop_text, encode_text, fdn_forward, flgm_loss,
                        room_prompts, sample_furniture_list, sample_furniture_lists, train_flgm)
from tsdsm.ddpm import NoiseSchedule
from tsdsm.text import NULL, PAD
from tsdsm.training import TrainConfig


@pytest.fixture(scope="module")
def space(bedrooms):
    return space_for(bedrooms, 32)


@pytest.fixture(scope="module")
def model(space):
    return tiny_flgm(space).eval()


def _inputs(model, b=3, seed=0):
    g = torch.Generator().manual_seed(seed)
    n, k = model.space.n_max, model.space.vocab.k
    s = torch.randn(b, n, 3, generator=g)
    c = torch.randn(b, n, k, generator=g)
    t = torch.randint(1, model.sched.T + 1, (b,), generator=g)
    ids, pad = model.text_batch(["a bedroom with 7 objects", "", "a bedroom with 12 objects"][:b])
    return s, c, t, ids, pad


def test_output_shape(model):
    s, c, t, ids, pad = _inputs(model)
    out = fdn_forward(s, c, t, model.fdn.text(ids), model, pad)
    assert out.shape == (3, 32, 3 + model.space.vocab.k)


def test_shape_errors(model):
    s, c, t, ids, pad = _inputs(model)
    with pytest.raises(ValueError):
        model.fdn(s[..., :2], c, t, model.fdn.text(ids), pad)
    with pytest.raises(ValueError):
        model.fdn(s, c, t, model.fdn.text(ids[:1]), pad[:1])


def test_permutation_equivariance(model):
    s, c, t, ids, pad = _inputs(model)
    text = model.fdn.text(ids)
    with torch.no_grad():
        base = fdn_forward(s, c, t, text, model, pad)
        for seed in range(5):
            perm = torch.randperm(32, generator=torch.Generator().manual_seed(seed))
            out = fdn_forward(s[:, perm], c[:, perm], t, text, model, pad)
            torch.testing.assert_close(out, base[:, perm], atol=1e-5, rtol=1e-5)


def test_positional_encoding_breaks_equivariance(space):
    m = tiny_flgm(space, positional_encoding=True).eval()
    s, c, t, ids, pad = _inputs(m)
    perm = torch.randperm(32, generator=torch.Generator().manual_seed(0))
    with torch.no_grad():
        base = m(torch.cat([s, c], -1), t, ids, pad)
        out = m(torch.cat([s[:, perm], c[:, perm]], -1), t, ids, pad)
    assert (out - base[:, perm]).abs().max() > 1e-3


def test_encode_text_null(model):
    f = encode_text("", model)
    assert f.shape == (1, 16)
    torch.testing.assert_close(f[0], model.fdn.text.embed.weight[NULL])
    assert encode_text("a bedroom with 3 objects", model).shape == (5, 16)


def test_drop_text_replaces_with_null():
    ids = torch.tensor([[5, 6, 7], [8, 9, 0]])
    out, pad = drop_text(ids, torch.tensor([False, True]))
    assert out.tolist() == [[5, 6, 7], [NULL, PAD, PAD]]
    assert pad.tolist() == [[False, False, False], [False, True, True]]


def test_loss_matches_manual_oracle(model, bedrooms):
    vals, _ = model.space.encode(bedrooms[:3])
    x0 = torch.as_tensor(vals[..., model.space.layout.size_cls], dtype=torch.float32)
    ids, pad = model.text_batch(room_prompts(bedrooms[:3]))
    g = torch.Generator().manual_seed(1)
    t = torch.tensor([1, 7, 20])
    noise = torch.randn(x0.shape, generator=g)
    uncond = torch.tensor([False, True, False])
    got = flgm_loss(model, x0, ids, pad, t=t, noise=noise, uncond=uncond)
    ab = model.sched.alpha_bar[t - 1].float()[:, None, None]
    xt = ab.sqrt() * x0 + (1 - ab).sqrt() * noise
    ids2 = ids.clone()
    ids2[1] = PAD
    ids2[1, 0] = NULL
    with torch.no_grad():
        eps = model.fdn(xt[..., :3], xt[..., 3:], t, model.fdn.text(ids2), ids2 == PAD)
    ref = ((eps - noise) ** 2).sum() / noise.numel()
    torch.testing.assert_close(got.detach(), ref, atol=1e-6, rtol=1e-5)


def test_loss_gradient_matches_finite_difference():
    rooms = pair_rooms()
    m = tiny_flgm(space_for(rooms, 2)).double()
    vals, _ = m.space.encode(rooms)
    x0 = torch.as_tensor(vals[..., m.space.layout.size_cls])
    ids, pad = m.text_batch(room_prompts(rooms))
    g = torch.Generator().manual_seed(0)
    noise = torch.randn(x0.shape, generator=g, dtype=torch.float64)
    t = torch.tensor([3, 15])
    uncond = torch.tensor([False, False])
    params = [p for p in m.parameters() if p.requires_grad]
    loss = flgm_loss(m, x0, ids, pad, t=t, noise=noise, uncond=uncond)
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    direction = [torch.randn(p.shape, generator=g, dtype=torch.float64) for p in params]
    analytic = sum((gr * d).sum() for gr, d in zip(grads, direction) if gr is not None)
    h = 1e-5
    with torch.no_grad():
        for p, d in zip(params, direction):
            p.add_(h * d)
        up = flgm_loss(m, x0, ids, pad, t=t, noise=noise, uncond=uncond)
        for p, d in zip(params, direction):
            p.sub_(2 * h * d)
        down = flgm_loss(m, x0, ids, pad, t=t, noise=noise, uncond=uncond)
    numeric = (up - down) / (2 * h)
    assert abs(numeric - analytic) / abs(numeric) < 1e-3


def test_decode_drops_empty_rows(model, bedrooms):
    vals, _ = model.space.encode(bedrooms[:1])
    out = decode_furniture(vals[0, :, model.space.layout.size_cls], model.space)
    assert [c for c, _ in out] == bedrooms[0].categories()
    for (_, size), o in zip(out, bedrooms[0].objects):
        assert size == pytest.approx(o.size, abs=1e-9)


def test_sampling_is_deterministic(model):
    a = sample_furniture_lists(model, ["a bedroom with 5 objects", ""], torch.Generator().manual_seed(0))
    b = sample_furniture_lists(model, ["a bedroom with 5 objects", ""], torch.Generator().manual_seed(0))
    assert a == b
    assert len(a) == 2
    one = sample_furniture_list(model, "", torch.Generator().manual_seed(3))
    assert all(c in model.space.vocab for c, _ in one)


def test_training_reduces_loss_and_checkpoint_round_trip(bedrooms, tmp_path):
    sched = NoiseSchedule(20, 1e-3, 0.3)
    cfg = FdnConfig(dim=16, depth=1, heads=2, size_hidden=16, class_hidden=16)
    m, hist = train_flgm(bedrooms, cfg, TrainConfig(epochs=15, batch_size=16, lr_decay_every=1000), sched, 32)
    first = sum(h["loss"] for h in hist[:10]) / 10
    last = sum(h["loss"] for h in hist[-10:]) / 10
    assert last < first
    assert m.steps_trained == len(hist)
    path = tmp_path / "f.pt"
    m.save(path)
    back = FLGM.load(path)
    assert back.steps_trained == m.steps_trained
    for (k1, v1), (k2, v2) in zip(m.state_dict().items(), back.state_dict().items()):
        assert k1 == k2 and torch.equal(v1, v2)
    g1, g2 = torch.Generator().manual_seed(0), torch.Generator().manual_seed(0)
    assert sample_furniture_list(m, "", g1) == sample_furniture_list(back, "", g2)


def test_checkpoint_errors(tmp_path, model):
    with pytest.raises(CheckpointError):
        FLGM.load(tmp_path / "missing.pt")
    from tsdsm.checkpoint import save_checkpoint
    save_checkpoint(tmp_path / "l.pt", "lgm", {}, {})
    with pytest.raises(CheckpointError):
        FLGM.load(tmp_path / "l.pt")


def test_config_validation():
    with pytest.raises(ValueError):
        FdnConfig(dim=10, heads=4)
