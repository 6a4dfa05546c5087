"""U-Net generator and patch-level conditional discriminator.

Layer conventions follow the standard L1-conditional translation
recipe: 4x4 convolutions at stride 2, BatchNorm everywhere except the
first encoder layer and the bottleneck, LeakyReLU(0.2) on the way
down, ReLU on the way up, dropout on the innermost decoder stages,
tanh output head. The discriminator scores overlapping patches of the
(condition, image) pair rather than the whole frame.
"""

import torch
from torch import nn


def _pad_to_multiple(x, multiple):
    """Replicate-pad right/bottom so H and W divide `multiple`.

    Index-clamp instead of F.pad: replicate mode caps the pad width at
    the input size, which tiny inputs would hit.
    """
    h, w = x.shape[-2], x.shape[-1]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return x
    rows = torch.arange(h + ph, device=x.device).clamp(max=h - 1)
    cols = torch.arange(w + pw, device=x.device).clamp(max=w - 1)
    return x.index_select(-2, rows).index_select(-1, cols)


class UNetGenerator(nn.Module):
    """Encoder-decoder with skip connections, fully convolutional.

    Output spatial dimensions always equal the input's; inputs whose
    sides do not divide 2**depth are padded in and cropped back out.
    """

    def __init__(self, in_channels=3, out_channels=3, base_filters=64,
                 depth=5, dropout_stages=3):
        super().__init__()
        if depth < 2:
            raise ValueError(f"depth must be >= 2, got {depth}")
        self.arch = {
            "in_channels": in_channels,
            "out_channels": out_channels,
            "base_filters": base_filters,
            "depth": depth,
            "dropout_stages": dropout_stages,
        }
        self.depth = depth
        # channel plan caps at 8x base, like the reference implementation
        chans = [base_filters * min(2 ** i, 8) for i in range(depth)]

        downs = [nn.Sequential(nn.Conv2d(in_channels, chans[0], 4, 2, 1))]
        for i in range(1, depth):
            layers = [nn.LeakyReLU(0.2), nn.Conv2d(chans[i - 1], chans[i], 4, 2, 1)]
            if i < depth - 1:  # bottleneck conv runs without norm
                layers.append(nn.BatchNorm2d(chans[i]))
            downs.append(nn.Sequential(*layers))
        self.downs = nn.ModuleList(downs)

        ups = []
        for j in range(depth - 1):
            in_ch = chans[depth - 1] if j == 0 else 2 * chans[depth - 1 - j]
            out_ch = chans[depth - 2 - j]
            layers = [nn.ReLU(), nn.ConvTranspose2d(in_ch, out_ch, 4, 2, 1),
                      nn.BatchNorm2d(out_ch)]
            if j < min(dropout_stages, depth - 1):
                layers.append(nn.Dropout(0.5))
            ups.append(nn.Sequential(*layers))
        ups.append(nn.Sequential(
            nn.ReLU(),
            nn.ConvTranspose2d(2 * chans[0], out_channels, 4, 2, 1),
            nn.Tanh(),
        ))
        self.ups = nn.ModuleList(ups)

    def forward(self, x):
        h, w = x.shape[-2], x.shape[-1]
        y = _pad_to_multiple(x, 2 ** self.depth)
        feats = []
        for block in self.downs:
            y = block(y)
            feats.append(y)
        y = self.ups[0](feats[-1])
        for j, block in enumerate(self.ups[1:], start=1):
            y = block(torch.cat([y, feats[-1 - j]], dim=1))
        return y[..., :h, :w]


class PatchDiscriminator(nn.Module):
    """Stack of stride-2 convs ending in a 1-channel patch score map.

    Call with the condition and the image concatenated on the channel
    axis; in_channels is their sum.
    """

    def __init__(self, in_channels=6, base_filters=64, layers=3):
        super().__init__()
        if layers < 1:
            raise ValueError(f"layers must be >= 1, got {layers}")
        chans = [base_filters * min(2 ** i, 8) for i in range(layers)]
        seq = [nn.Conv2d(in_channels, chans[0], 4, 2, 1), nn.LeakyReLU(0.2)]
        for i in range(1, layers):
            seq += [nn.Conv2d(chans[i - 1], chans[i], 4, 2, 1),
                    nn.BatchNorm2d(chans[i]), nn.LeakyReLU(0.2)]
        tail = base_filters * min(2 ** layers, 8)
        seq += [nn.Conv2d(chans[-1], tail, 4, 1, 1),
                nn.BatchNorm2d(tail), nn.LeakyReLU(0.2),
                nn.Conv2d(tail, 1, 4, 1, 1)]
        self.net = nn.Sequential(*seq)

    def forward(self, x):
        return self.net(x)
