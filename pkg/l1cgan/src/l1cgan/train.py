"""Alternating discriminator/generator updates with the weighted L1 term.

The generator objective is adversarial loss plus l1_lambda times the
mean absolute error against the target; the discriminator sees the
(label, image) pair and scores real against generated.
"""

import dataclasses
import pickle
import zipfile

import torch
from torch import nn

from .config import TrainConfig, TrainLog
from .errors import TrainError
from .models import PatchDiscriminator, UNetGenerator

CHECKPOINT_KIND = "l1cgan-generator"
CHECKPOINT_VERSION = 1


def _batches(n, batch_size, rng):
    order = torch.randperm(n, generator=rng).tolist()
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def train(pairs, cfg: TrainConfig, generator=None, discriminator=None):
    """Run the full schedule over (label, image) tensor pairs.

    Pairs may carry a leading name element; only the last two elements
    are used. Returns (generator, TrainLog). Raises TrainError on an
    empty dataset or the first non-finite loss.
    """
    pairs = [(p[-2], p[-1]) for p in pairs]
    if not pairs:
        raise TrainError("need at least one training pair")
    for label, image in pairs:
        if label.shape[0] != cfg.label_channels:
            raise TrainError(
                f"label has {label.shape[0]} channels, config says {cfg.label_channels}"
            )
        if image.shape[0] != cfg.image_channels:
            raise TrainError(
                f"image has {image.shape[0]} channels, config says {cfg.image_channels}"
            )
        if label.shape[1:] != image.shape[1:]:
            raise TrainError(
                f"label {tuple(label.shape[1:])} and image "
                f"{tuple(image.shape[1:])} sizes differ"
            )

    torch.manual_seed(cfg.seed)
    if generator is None:
        generator = UNetGenerator(cfg.label_channels, cfg.image_channels)
    if discriminator is None:
        discriminator = PatchDiscriminator(cfg.label_channels + cfg.image_channels)
    generator.train()
    discriminator.train()

    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.learning_rate,
                             betas=(cfg.beta1, cfg.beta2))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.learning_rate,
                             betas=(cfg.beta1, cfg.beta2))
    bce = nn.BCEWithLogitsLoss()
    l1 = nn.L1Loss()
    rng = torch.Generator().manual_seed(cfg.seed)

    log = TrainLog()
    step = 0
    for _ in range(cfg.epochs):
        for batch in _batches(len(pairs), cfg.batch_size, rng):
            x = torch.stack([pairs[i][0] for i in batch])
            y = torch.stack([pairs[i][1] for i in batch])
            step += 1

            fake = generator(x)
            score_real = discriminator(torch.cat([x, y], dim=1))
            score_fake = discriminator(torch.cat([x, fake.detach()], dim=1))
            d_loss = 0.5 * (bce(score_real, torch.ones_like(score_real))
                            + bce(score_fake, torch.zeros_like(score_fake)))
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()

            score_gen = discriminator(torch.cat([x, fake], dim=1))
            g_adv = bce(score_gen, torch.ones_like(score_gen))
            g_l1 = l1(fake, y)
            if cfg.l1_lambda:
                g_loss = g_adv + cfg.l1_lambda * g_l1
            else:
                g_loss = g_adv
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()

            log.append(step, d_loss.item(), g_adv.item(), g_l1.item(),
                       cfg.l1_lambda * g_l1.item())
    return generator, log


def save_checkpoint(generator, cfg, path):
    torch.save({
        "kind": CHECKPOINT_KIND,
        "version": CHECKPOINT_VERSION,
        "config": dataclasses.asdict(cfg),
        "arch": dict(generator.arch),
        "state": generator.state_dict(),
    }, path)


def load_checkpoint(path):
    """Returns (generator in eval mode, TrainConfig)."""
    try:
        payload = torch.load(path, map_location="cpu", weights_only=True)
    except (OSError, RuntimeError, ValueError, EOFError,
            pickle.UnpicklingError, zipfile.BadZipFile) as exc:
        raise TrainError(f"cannot load checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("kind") != CHECKPOINT_KIND:
        raise TrainError(f"{path} is not a generator checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise TrainError(f"unsupported checkpoint version {payload.get('version')}")
    generator = UNetGenerator(**payload["arch"])
    generator.load_state_dict(payload["state"])
    generator.eval()
    return generator, TrainConfig(**payload["config"])
