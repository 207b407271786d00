from .discriminators import (
    ScoreMap,
    SpecDiscConfig,
    SpectrogramDiscriminator,
    SpectrogramDiscriminatorBank,
    WaveDiscConfig,
    WaveformDiscriminator,
    WaveformDiscriminatorBank,
)
from .generator import (
    GeneratorConfig,
    Generator,
    build_generator,
    expected_parameter_count,
    gau,
    generate,
    receptive_field,
)

__all__ = [
    "Generator",
    "GeneratorConfig",
    "ScoreMap",
    "SpecDiscConfig",
    "SpectrogramDiscriminator",
    "SpectrogramDiscriminatorBank",
    "WaveDiscConfig",
    "WaveformDiscriminator",
    "WaveformDiscriminatorBank",
    "build_generator",
    "expected_parameter_count",
    "gau",
    "generate",
    "receptive_field",
]
