"""unimelgan: a GAN vocoder from 100-band log-mel spectrograms to 24 kHz audio."""

__version__ = "0.1.0"
