"""Two-phase optimization: generator pretraining on the spectral loss, then
alternating least-squares adversarial training of the discriminator family
and the generator.

Batch composition is derived from (seed, step), so an interrupted run
resumed from a checkpoint sees exactly the batches the uninterrupted run
would have seen.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import torch

from .checkpoint import read_checkpoint, write_checkpoint
from .config import Config, config_digest, dump_config, parse_config
from .data import DatasetManifest, UtteranceStore, make_batch
from .errors import ConfigurationError, ShapeMismatchError, TrainingDivergedError
from .losses import (
    LossBreakdown,
    MultiResolutionSTFT,
    discriminator_loss,
    generator_loss,
    multires_stft_loss_from_mags,
    score_penalty,
)
from .models.discriminators import (
    SpectrogramDiscriminatorBank,
    WaveformDiscriminatorBank,
)
from .models.generator import Generator

logger = logging.getLogger(__name__)


@dataclass
class TrainState:
    config: Config
    step: int
    generator: Generator
    wave_bank: WaveformDiscriminatorBank
    spec_bank: SpectrogramDiscriminatorBank
    stft_bank: MultiResolutionSTFT
    opt_g: torch.optim.Adam
    opt_d: torch.optim.Adam

    @property
    def in_pretrain(self) -> bool:
        return self.step < self.config.train.pretrain_steps


def build_state(config: Config) -> TrainState:
    seed = config.train.seed
    generator = Generator(config.generator, seed=seed)
    wave_bank = WaveformDiscriminatorBank(config.wave_disc, seed=seed + 1)
    spec_bank = SpectrogramDiscriminatorBank(
        config.active_resolutions, config.spec_disc, seed=seed + 2
    )
    stft_bank = MultiResolutionSTFT(config.resolutions)
    betas = (config.train.adam_beta1, config.train.adam_beta2)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.train.lr_g, betas=betas)
    disc_params = list(wave_bank.parameters()) + list(spec_bank.parameters())
    opt_d = torch.optim.Adam(disc_params, lr=config.train.lr_d, betas=betas)
    return TrainState(config, 0, generator, wave_bank, spec_bank, stft_bank, opt_g, opt_d)


def _to_tensors(batch):
    mel, wave, ids = batch
    return torch.as_tensor(mel), torch.as_tensor(wave), ids


def _check_finite(breakdown: LossBreakdown, ids) -> None:
    if not breakdown.all_finite():
        raise TrainingDivergedError(
            f"non-finite loss on batch of utterances {sorted(set(ids))}: "
            f"{breakdown.to_record()}"
        )


def pretrain_step(state: TrainState, batch) -> LossBreakdown:
    """One Adam update of the generator on the auxiliary loss alone."""
    mel, wave, ids = _to_tensors(batch)
    fake = state.generator(mel)
    mags_real = state.stft_bank(wave.squeeze(1))
    mags_fake = state.stft_bank(fake.squeeze(1))
    aux, terms = multires_stft_loss_from_mags(mags_real, mags_fake)
    breakdown = LossBreakdown(
        sc_per_resolution=terms.sc_per_resolution,
        mag_per_resolution=terms.mag_per_resolution,
        aux=float(aux.detach()),
        adv_wave=0.0,
        adv_spec=0.0,
        total_g=float(aux.detach()),
        total_d=0.0,
        lambda_weight=state.config.train.lambda_weight,
    )
    _check_finite(breakdown, ids)
    state.opt_g.zero_grad()
    aux.backward()
    state.opt_g.step()
    state.step += 1
    return breakdown


def train_step(state: TrainState, batch) -> LossBreakdown:
    """One discriminator update on detached generator output, then one
    generator update; magnitudes are computed once per waveform and shared
    between the auxiliary loss and the spectrogram discriminators."""
    mel, wave, ids = _to_tensors(batch)
    lam = state.config.train.lambda_weight

    fake = state.generator(mel)
    mags_real = state.stft_bank(wave.squeeze(1))
    mags_fake = state.stft_bank(fake.squeeze(1))
    spec_enabled = len(state.spec_bank.discriminators) > 0

    # Discriminator phase: fakes detached so no gradient reaches the generator.
    real_w = state.wave_bank(wave)
    fake_w = state.wave_bank(fake.detach())
    real_s = state.spec_bank(mags_real) if spec_enabled else []
    fake_s = state.spec_bank([m.detach() for m in mags_fake]) if spec_enabled else []
    d_loss = discriminator_loss(real_w, fake_w, real_s, fake_s)
    state.opt_d.zero_grad()
    d_loss.backward()
    state.opt_d.step()

    # Generator phase against the updated discriminators.
    aux, terms = multires_stft_loss_from_mags(mags_real, mags_fake)
    fake_w_g = state.wave_bank(fake)
    fake_s_g = state.spec_bank(mags_fake) if spec_enabled else []
    g_loss = generator_loss(aux, fake_w_g, fake_s_g, lam)
    breakdown = LossBreakdown(
        sc_per_resolution=terms.sc_per_resolution,
        mag_per_resolution=terms.mag_per_resolution,
        aux=float(aux.detach()),
        adv_wave=float(score_penalty(fake_w_g, 1.0).detach()),
        adv_spec=float(score_penalty(fake_s_g, 1.0).detach()),
        total_g=float(g_loss.detach()),
        total_d=float(d_loss.detach()),
        lambda_weight=lam,
    )
    _check_finite(breakdown, ids)
    state.opt_g.zero_grad()
    g_loss.backward()
    state.opt_g.step()
    state.step += 1
    return breakdown


def _step_rng(seed: int, step: int) -> np.random.Generator:
    return np.random.default_rng([seed, step])


def _set_lr(opt: torch.optim.Adam, lr: float) -> None:
    for group in opt.param_groups:
        group["lr"] = lr


def _named_arrays(state: TrainState) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    for prefix, module in (
        ("generator", state.generator),
        ("wave_disc", state.wave_bank),
        ("spec_disc", state.spec_bank),
    ):
        for name, tensor in module.state_dict().items():
            arrays[f"{prefix}.{name}"] = tensor.detach().cpu().numpy()
    for prefix, opt in (("opt_g", state.opt_g), ("opt_d", state.opt_d)):
        for idx, slots in opt.state_dict()["state"].items():
            for slot, value in slots.items():
                arrays[f"{prefix}.state.{idx}.{slot}"] = (
                    value.detach().cpu().numpy()
                    if isinstance(value, torch.Tensor)
                    else np.asarray(value)
                )
    return arrays


def save_checkpoint(state: TrainState, path) -> None:
    meta = {
        "step": state.step,
        "config_text": dump_config(state.config),
        "config_digest": config_digest(state.config),
        "torch_rng": torch.get_rng_state().numpy().tobytes().hex(),
        "opt_param_groups": {
            "opt_g": state.opt_g.state_dict()["param_groups"],
            "opt_d": state.opt_d.state_dict()["param_groups"],
        },
    }
    write_checkpoint(path, meta, _named_arrays(state))


def _load_module(module: torch.nn.Module, prefix: str, arrays: dict, path) -> None:
    state_dict = {}
    for name, tensor in module.state_dict().items():
        key = f"{prefix}.{name}"
        if key not in arrays:
            raise ShapeMismatchError(f"{path}: checkpoint is missing array {key}")
        stored = arrays[key]
        if tuple(stored.shape) != tuple(tensor.shape):
            raise ShapeMismatchError(
                f"{path}: array {key} has shape {tuple(stored.shape)}, "
                f"model expects {tuple(tensor.shape)}"
            )
        state_dict[name] = torch.as_tensor(stored)
    module.load_state_dict(state_dict)


def _load_optimizer(opt, prefix: str, groups, arrays: dict) -> None:
    state = {}
    idx = 0
    while any(k.startswith(f"{prefix}.state.{idx}.") for k in arrays):
        slots = {}
        for key, value in arrays.items():
            head = f"{prefix}.state.{idx}."
            if key.startswith(head):
                slot = key[len(head) :]
                slots[slot] = torch.as_tensor(value)
        state[idx] = slots
        idx += 1
    opt.load_state_dict({"state": state, "param_groups": groups})


def load_checkpoint(path, config: Config | None = None) -> TrainState:
    """Rebuild a TrainState from a checkpoint file.

    If `config` is given it must match the stored digest-relevant model
    shapes; otherwise the stored config text is used.
    """
    meta, arrays = read_checkpoint(path)
    stored = parse_config(meta["config_text"])
    cfg = config if config is not None else stored
    state = build_state(cfg)
    _load_module(state.generator, "generator", arrays, path)
    _load_module(state.wave_bank, "wave_disc", arrays, path)
    _load_module(state.spec_bank, "spec_disc", arrays, path)
    _load_optimizer(state.opt_g, "opt_g", meta["opt_param_groups"]["opt_g"], arrays)
    _load_optimizer(state.opt_d, "opt_d", meta["opt_param_groups"]["opt_d"], arrays)
    state.step = int(meta["step"])
    torch.set_rng_state(
        torch.frombuffer(bytearray.fromhex(meta["torch_rng"]), dtype=torch.uint8).clone()
    )
    return state


def train(
    config: Config,
    manifest: DatasetManifest,
    out_dir,
    resume: str | Path | None = None,
) -> Path:
    """Run (or resume) the full schedule; returns the final checkpoint path.

    Writes `train_log.jsonl` (one record per step) and periodic
    `step_NNNNNNN.ckpt` files plus `final.ckpt` under `out_dir`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest.validate()
    store = UtteranceStore(manifest, expected_bands=config.mel.n_mels)

    if resume is not None:
        state = load_checkpoint(resume, config)
    else:
        state = build_state(config)

    tc = config.train
    log_path = out_dir / "train_log.jsonl"
    final_path = out_dir / "final.ckpt"
    with open(log_path, "a" if resume is not None else "w") as log:
        while state.step < tc.total_steps:
            step_index = state.step  # 0-based draw; recorded as step_index + 1
            rng = _step_rng(tc.seed, step_index)
            batch = make_batch(store, tc.batch_size, tc.segment_frames, rng)
            lr_g, lr_d = tc.lr_at(state.step + 1)
            _set_lr(state.opt_g, lr_g)
            _set_lr(state.opt_d, lr_d)
            if state.in_pretrain:
                breakdown = pretrain_step(state, batch)
            else:
                breakdown = train_step(state, batch)
            record = {"step": state.step, "lr_g": lr_g, "lr_d": lr_d}
            record.update(breakdown.to_record())
            log.write(json.dumps(record, sort_keys=True) + "\n")
            if tc.checkpoint_interval and state.step % tc.checkpoint_interval == 0:
                save_checkpoint(state, out_dir / f"step_{state.step:07d}.ckpt")
    save_checkpoint(state, final_path)
    return final_path


def finetune(
    ckpt_path,
    manifest: DatasetManifest,
    steps: int,
    out_dir,
) -> Path:
    """Adversarial fine-tuning of an existing checkpoint on a new manifest
    (typically ground-truth waveforms paired with predicted features)."""
    if steps < 1:
        raise ConfigurationError("finetune needs at least one step")
    meta, _ = read_checkpoint(ckpt_path)
    cfg = parse_config(meta["config_text"])
    start_step = int(meta["step"])
    tuned = replace(
        cfg,
        train=replace(
            cfg.train,
            total_steps=start_step + steps,
            pretrain_steps=min(cfg.train.pretrain_steps, start_step),
        ),
    )
    return train(tuned, manifest, out_dir, resume=ckpt_path)
