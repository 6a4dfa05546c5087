import numpy as np
import pytest
import torch
from PIL import Image

from l1cgan import (PatchDiscriminator, TrainConfig, UNetGenerator,
                    save_checkpoint, train)


def make_label_array(h, w):
    """Structured tri-label: roi block in the middle, edge ring around it."""
    arr = np.zeros((h, w), dtype=np.uint8)
    arr[h // 4:3 * h // 4, w // 4:3 * w // 4] = 2
    arr[h // 4 - 1, w // 4 - 1:3 * w // 4 + 1] = 1
    arr[3 * h // 4, w // 4 - 1:3 * w // 4 + 1] = 1
    arr[h // 4 - 1:3 * h // 4 + 1, w // 4 - 1] = 1
    arr[h // 4 - 1:3 * h // 4 + 1, 3 * w // 4] = 1
    return arr


def write_label_png(path, arr):
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path)


def write_image_png(path, h, w, seed):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    Image.fromarray(arr, mode="RGB").save(path)


def random_pair(seed, size=32):
    g = torch.Generator().manual_seed(seed)
    label = (torch.rand(3, size, size, generator=g) > 0.5).float()
    image = torch.rand(3, size, size, generator=g) * 2 - 1
    return label, image


def tiny_models(seed=0):
    """Small enough to train in milliseconds, same architecture family."""
    torch.manual_seed(seed)
    gen = UNetGenerator(3, 3, base_filters=8, depth=3, dropout_stages=1)
    disc = PatchDiscriminator(6, base_filters=8, layers=1)
    return gen, disc


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory):
    """A real trained checkpoint, shared across tests that only serve."""
    path = tmp_path_factory.mktemp("ckpt") / "toy.pt"
    pairs = [random_pair(s) for s in (1, 2)]
    cfg = TrainConfig(epochs=2, batch_size=2, seed=5)
    gen, disc = tiny_models(seed=5)
    generator, _ = train(pairs, cfg, generator=gen, discriminator=disc)
    save_checkpoint(generator, cfg, path)
    return path
