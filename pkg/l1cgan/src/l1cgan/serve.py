"""The directory protocol: label PNGs in, same-named RGB PNGs out.

This is the whole surface the dataset tooling sees. It hands us a
directory of {0,1,2}-valued tiles, we leave one same-sized RGB image
per tile in the output directory, and the exit code says how it went.
"""

import sys
from pathlib import Path

import torch

from .data import image_to_png, load_label
from .errors import DataError, TrainError
from .train import load_checkpoint


def serve_protocol(input_dir, output_dir, checkpoint_path):
    """Translate every *.png label in input_dir. Returns an exit code.

    Empty input is a success with nothing to do. Unreadable labels are
    collected and reported together on stderr with exit code 1.
    """
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    label_files = sorted(input_dir.glob("*.png"))
    if not label_files:
        return 0

    try:
        generator, _ = load_checkpoint(checkpoint_path)
    except TrainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    labels = []
    bad = []
    for path in label_files:
        try:
            labels.append((path.name, load_label(path)))
        except DataError:
            bad.append(path.name)
    if bad:
        print(f"error: unreadable label values in: {', '.join(bad)}",
              file=sys.stderr)
        return 1

    with torch.no_grad():
        for name, label in labels:
            fake = generator(label.unsqueeze(0))[0]
            image_to_png(fake, output_dir / name)
    return 0
