"""Bundled run configuration and its on-disk key/value format.

One INI document mirrors every dataclass field: [preprocess], [mel],
[stft], [generator], [waveform_discriminator], [spectrogram_discriminator]
and [train]. `dump_config` produces a canonical rendering whose SHA-256
digest identifies the configuration inside checkpoints.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, fields

from .dsp.spectral import DEFAULT_RESOLUTIONS, MelConfig, STFTParams
from .errors import ConfigurationError
from .models.discriminators import SpecDiscConfig, WaveDiscConfig
from .models.generator import GeneratorConfig

# Fixed pipeline order; filtering changes measured loudness, so the
# high-pass runs first.
PREPROCESS_ORDER = ("resample", "highpass", "loudness")


@dataclass(frozen=True)
class PreprocessConfig:
    sample_rate: int = 24000
    highpass_hz: float = 50.0
    target_lufs: float = -23.0


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 48
    segment_frames: int = 32
    lr_g: float = 1e-4
    lr_d: float = 5e-5
    adam_beta1: float = 0.5
    adam_beta2: float = 0.9
    pretrain_steps: int = 1000
    total_steps: int = 700_000
    lambda_weight: float = 2.5
    seed: int = 0
    checkpoint_interval: int = 10_000
    # 0 keeps both learning rates constant; N > 0 halves them every N steps.
    lr_halving_interval: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1 or self.segment_frames < 1:
            raise ConfigurationError("batch_size and segment_frames must be positive")
        if self.total_steps < self.pretrain_steps:
            raise ConfigurationError("total_steps must cover pretrain_steps")
        if self.lr_g < 0 or self.lr_d < 0:
            raise ConfigurationError("learning rates must be non-negative")
        if self.lr_halving_interval < 0:
            raise ConfigurationError("lr_halving_interval must be >= 0")

    def lr_at(self, step: int) -> tuple[float, float]:
        """Learning rates in effect for 1-based step `step`."""
        if self.lr_halving_interval:
            factor = 0.5 ** ((step - 1) // self.lr_halving_interval)
        else:
            factor = 1.0
        return self.lr_g * factor, self.lr_d * factor

    @property
    def segment_samples(self) -> int:
        return self.segment_frames * 256


@dataclass(frozen=True)
class Config:
    preprocess: PreprocessConfig = PreprocessConfig()
    mel: MelConfig = MelConfig()
    resolutions: tuple[STFTParams, ...] = DEFAULT_RESOLUTIONS
    generator: GeneratorConfig = GeneratorConfig()
    wave_disc: WaveDiscConfig = WaveDiscConfig()
    spec_disc: SpecDiscConfig = SpecDiscConfig()
    train: TrainConfig = TrainConfig()

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.generator.upsample_factor != self.mel.hop:
            raise ConfigurationError(
                f"generator upsampling {self.generator.upsample_factor} must equal "
                f"the mel hop {self.mel.hop}"
            )
        if self.generator.input_channels != self.mel.n_mels:
            raise ConfigurationError(
                f"generator expects {self.generator.input_channels} bands but mel "
                f"extraction produces {self.mel.n_mels}"
            )
        if self.spec_disc.num_resolutions not in (0, len(self.resolutions)):
            raise ConfigurationError(
                f"spectrogram discriminators must use all {len(self.resolutions)} "
                f"resolutions or be disabled (0), got {self.spec_disc.num_resolutions}"
            )

    @property
    def active_resolutions(self) -> tuple[STFTParams, ...]:
        """Resolutions the spectrogram discriminators consume (may be empty)."""
        return self.resolutions if self.spec_disc.num_resolutions else ()


def default_config() -> Config:
    return Config()


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def _section_from(obj, skip=()) -> dict:
    return {
        f.name: _fmt(getattr(obj, f.name)) for f in fields(obj) if f.name not in skip
    }


def dump_config(cfg: Config) -> str:
    parser = configparser.ConfigParser()
    preprocess = _section_from(cfg.preprocess)
    preprocess["order"] = ",".join(PREPROCESS_ORDER)
    parser["preprocess"] = preprocess
    parser["mel"] = _section_from(cfg.mel)
    parser["stft"] = {
        "resolutions": ", ".join(
            f"{p.fft_size}:{p.hop}:{p.window_length}" for p in cfg.resolutions
        ),
        "window": cfg.resolutions[0].window,
    }
    parser["generator"] = _section_from(cfg.generator)
    parser["waveform_discriminator"] = _section_from(cfg.wave_disc)
    parser["spectrogram_discriminator"] = _section_from(cfg.spec_disc)
    train = _section_from(cfg.train, skip=("lambda_weight",))
    train["lambda"] = _fmt(cfg.train.lambda_weight)
    parser["train"] = train
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def config_digest(cfg: Config) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()


def write_config(cfg: Config, path) -> None:
    with open(path, "w") as f:
        f.write(dump_config(cfg))


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(v.strip()) for v in raw.split(",") if v.strip())


def _read_bool(section, key, default):
    if key not in section:
        return default
    return section[key].strip().lower() in ("1", "true", "yes", "on")


def parse_config(text: str) -> Config:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigurationError(f"unparseable config: {e}") from e

    def sect(name):
        return parser[name] if parser.has_section(name) else {}

    pp = sect("preprocess")
    order = tuple(v.strip() for v in pp.get("order", ",".join(PREPROCESS_ORDER)).split(","))
    if order != PREPROCESS_ORDER:
        raise ConfigurationError(
            f"preprocess order is fixed to {','.join(PREPROCESS_ORDER)}, got {','.join(order)}"
        )
    preprocess = PreprocessConfig(
        sample_rate=int(pp.get("sample_rate", 24000)),
        highpass_hz=float(pp.get("highpass_hz", 50.0)),
        target_lufs=float(pp.get("target_lufs", -23.0)),
    )
    ml = sect("mel")
    mel = MelConfig(
        n_mels=int(ml.get("n_mels", 100)),
        fmin=float(ml.get("fmin", 0.0)),
        fmax=float(ml.get("fmax", 12000.0)),
        fft_size=int(ml.get("fft_size", 1024)),
        hop=int(ml.get("hop", 256)),
        window_length=int(ml.get("window_length", 1024)),
        sample_rate=int(ml.get("sample_rate", preprocess.sample_rate)),
        log_floor=float(ml.get("log_floor", 1e-5)),
        mel_scale=ml.get("mel_scale", "htk"),
    )
    st = sect("stft")
    window = st.get("window", "hann") if st else "hann"
    if st and "resolutions" in st:
        triples = []
        for part in st["resolutions"].split(","):
            part = part.strip()
            if not part:
                continue
            try:
                fft, hop, win = (int(v) for v in part.split(":"))
            except ValueError as e:
                raise ConfigurationError(f"bad STFT triple {part!r}") from e
            triples.append(STFTParams(fft, hop, win, window))
        resolutions = tuple(triples)
    else:
        resolutions = DEFAULT_RESOLUTIONS
    if not resolutions:
        raise ConfigurationError("need at least one STFT resolution")

    gn = sect("generator")
    generator = GeneratorConfig(
        input_channels=int(gn.get("input_channels", 100)),
        channel_schedule=_ints(gn.get("channel_schedule", "2048, 1024, 512, 256")),
        upsample_rates=_ints(gn.get("upsample_rates", "8, 8, 4")),
        residual_dilations=_ints(gn.get("residual_dilations", "1, 3, 9, 27")),
        kernel_boundary=int(gn.get("kernel_boundary", 7)),
        kernel_residual=int(gn.get("kernel_residual", 3)),
        upsample_kernel_factor=int(gn.get("upsample_kernel_factor", 2)),
        gau_enabled=_read_bool(gn, "gau_enabled", True),
        weight_normalization=_read_bool(gn, "weight_normalization", True),
        init_std=float(gn.get("init_std", 0.02)),
    )
    wd = sect("waveform_discriminator")
    wave_disc = WaveDiscConfig(
        num_scales=int(wd.get("num_scales", 3)),
        pooling_kernel=int(wd.get("pooling_kernel", 4)),
        pooling_stride=int(wd.get("pooling_stride", 2)),
        input_kernel=int(wd.get("input_kernel", 15)),
        input_channels_out=int(wd.get("input_channels_out", 16)),
        down_kernel=int(wd.get("down_kernel", 41)),
        down_stride=int(wd.get("down_stride", 4)),
        down_channels=_ints(wd.get("down_channels", "64, 256, 1024, 1024")),
        down_groups=_ints(wd.get("down_groups", "4, 16, 64, 256")),
        penultimate_kernel=int(wd.get("penultimate_kernel", 5)),
        output_kernel=int(wd.get("output_kernel", 3)),
        weight_normalization=_read_bool(wd, "weight_normalization", True),
        init_std=float(wd.get("init_std", 0.02)),
    )
    sd = sect("spectrogram_discriminator")
    spec_disc = SpecDiscConfig(
        num_resolutions=int(sd.get("num_resolutions", len(resolutions))),
        channels=int(sd.get("channels", 32)),
        groups=int(sd.get("groups", 1)),
        dilation=int(sd.get("dilation", 1)),
        kernel_main=int(sd.get("kernel_main", 9)),
        kernel_tail=int(sd.get("kernel_tail", 3)),
        temporal_stride=int(sd.get("temporal_stride", 2)),
        strided_layers=int(sd.get("strided_layers", 3)),
        weight_normalization=_read_bool(sd, "weight_normalization", True),
        init_std=float(sd.get("init_std", 0.02)),
    )
    tr = sect("train")
    train = TrainConfig(
        batch_size=int(tr.get("batch_size", 48)),
        segment_frames=int(tr.get("segment_frames", 32)),
        lr_g=float(tr.get("lr_g", 1e-4)),
        lr_d=float(tr.get("lr_d", 5e-5)),
        adam_beta1=float(tr.get("adam_beta1", 0.5)),
        adam_beta2=float(tr.get("adam_beta2", 0.9)),
        pretrain_steps=int(tr.get("pretrain_steps", 1000)),
        total_steps=int(tr.get("total_steps", 700_000)),
        lambda_weight=float(tr.get("lambda", 2.5)),
        seed=int(tr.get("seed", 0)),
        checkpoint_interval=int(tr.get("checkpoint_interval", 10_000)),
        lr_halving_interval=int(tr.get("lr_halving_interval", 0)),
    )
    return Config(preprocess, mel, resolutions, generator, wave_disc, spec_disc, train)


def load_config(path) -> Config:
    with open(path) as f:
        return parse_config(f.read())
