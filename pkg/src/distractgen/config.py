"""Run configuration: optimizer defaults, model dims, ablations, limits."""

import dataclasses
import hashlib
import json
from dataclasses import dataclass


@dataclass
class Config:
    # optimization
    batch_size: int = 10
    lr_init: float = 1.0
    lr_decay: float = 0.8
    clip_norm: float = 5.0
    lambda_ssl: float = 0.0001
    epochs: int = 20
    seed: int = 13
    precision: str = "f64"  # f64 | f32
    lr_schedule: str = "plateau"  # plateau | epoch
    early_stop_patience: int = 5
    validate_every: int = 1  # epochs between validation/checkpoint passes
    target_nll: float = 0.0  # stop once valid NLL/token drops below (0 = off)
    # ablations
    coattention: bool = True
    ssl: bool = True
    # model dims
    hidden_size: int = 600
    embed_dim: int = 300
    vocab_size: int = 50000
    # truncation limits
    max_sentences: int = 40
    max_sentence_tokens: int = 50
    max_question_tokens: int = 30
    max_distractor_tokens: int = 30
    # inference
    beam_size: int = 10
    max_decode_len: int = 30
    jaccard_threshold: float = 0.5
    length_norm: bool = True

    def validate(self):
        for name in (
            "batch_size",
            "lr_init",
            "lr_decay",
            "clip_norm",
            "epochs",
            "hidden_size",
            "embed_dim",
            "vocab_size",
            "beam_size",
            "max_decode_len",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"config field {name} must be positive")
        if self.lambda_ssl < 0:
            raise ValueError("lambda_ssl must be nonnegative")
        if self.hidden_size % 4 != 0:
            raise ValueError(f"hidden_size {self.hidden_size} must be divisible by 4")
        if self.precision not in ("f64", "f32"):
            raise ValueError(f"precision must be f64 or f32, got {self.precision!r}")
        if self.lr_schedule not in ("plateau", "epoch"):
            raise ValueError(f"lr_schedule must be plateau or epoch, got {self.lr_schedule!r}")
        return self

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def model_hash(self):
        """Digest of the fields that determine the parameter set and forward pass."""
        keys = ("hidden_size", "embed_dim", "vocab_size", "coattention", "ssl")
        blob = json.dumps({k: getattr(self, k) for k in keys}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


PRESETS = {
    "full": {"coattention": True, "ssl": True},
    "hred": {"coattention": False, "ssl": False},
    "coattn": {"coattention": True, "ssl": False},
    "ssl": {"coattention": False, "ssl": True},
}


def apply_preset(config, name):
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}, expected one of {sorted(PRESETS)}")
    for key, value in PRESETS[name].items():
        setattr(config, key, value)
    return config
