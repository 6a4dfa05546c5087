"""Training configuration and the per-step loss log.

TrainConfig holds everything a run needs to be reproducible; the JSON
form is what the --config flag reads. TrainLog is the CSV artifact a
run leaves behind, one row per optimizer step.
"""

import csv
import dataclasses
import json
import math
from pathlib import Path

from .errors import ConfigError, TrainError


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Desk-scale defaults. The published run trained 200 epochs at
    batch 16-32; five epochs at batch 4 is enough to watch the loop work.
    """

    epochs: int = 5
    batch_size: int = 4
    l1_lambda: float = 100.0
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0
    label_channels: int = 3
    image_channels: int = 3

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.l1_lambda < 0:
            raise ConfigError(f"l1_lambda must be >= 0, got {self.l1_lambda}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.label_channels < 1 or self.image_channels < 1:
            raise ConfigError("channel counts must be >= 1")

    def to_json(self, path):
        Path(path).write_text(
            json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"
        )

    @classmethod
    def from_json(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**raw)


LOG_COLUMNS = ("step", "disc_loss", "gen_adv", "gen_l1", "gen_l1_weighted")


@dataclasses.dataclass(frozen=True)
class LogRow:
    step: int
    disc_loss: float
    gen_adv: float
    gen_l1: float
    gen_l1_weighted: float


class TrainLog:
    """Append-only per-step record; refuses non-finite losses."""

    def __init__(self):
        self.rows = []

    def append(self, step, disc_loss, gen_adv, gen_l1, gen_l1_weighted):
        values = (disc_loss, gen_adv, gen_l1, gen_l1_weighted)
        if not all(math.isfinite(v) for v in values):
            raise TrainError(f"non-finite loss at step {step}")
        self.rows.append(
            LogRow(int(step), float(disc_loss), float(gen_adv),
                   float(gen_l1), float(gen_l1_weighted))
        )

    def __len__(self):
        return len(self.rows)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_COLUMNS)
            for row in self.rows:
                writer.writerow([
                    row.step,
                    f"{row.disc_loss:.8f}",
                    f"{row.gen_adv:.8f}",
                    f"{row.gen_l1:.8f}",
                    f"{row.gen_l1_weighted:.8f}",
                ])

    @classmethod
    def from_csv(cls, path):
        log = cls()
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != list(LOG_COLUMNS):
                raise TrainError(f"unexpected log header in {path}: {header}")
            for fields in reader:
                step, *losses = fields
                log.append(int(step), *(float(v) for v in losses))
        return log
