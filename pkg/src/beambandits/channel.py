"""Beam-alignment environments: LOS channel instances and synthetic test instances.

Rewards are linear power (watts) internally; dB/dBm conversions happen only at
construction and reporting.  All beam indices are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import diric

from .core import BanditError, argmax_lowest


class NotUnimodal(BanditError):
    """Constructed mean profile violates strict unimodality (flat ties or a
    secondary lobe inside the beam fan); perturb the spatial angle."""


class InstanceFormatError(BanditError):
    """Serialized instance file is malformed."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float | np.ndarray) -> float | np.ndarray:
    return 10.0 * np.log10(watts) + 30.0


def codebook_angles(arm_count: int) -> np.ndarray:
    """Spatial angles of the DFT beams: w_k = (2k - K) / K for k = 1..K.

    Strictly increasing with spacing 2/K, ending exactly at 1.
    """
    if arm_count < 2:
        raise ValueError("need at least 2 beams")
    k = np.arange(1, arm_count + 1, dtype=float)
    return (2.0 * k - arm_count) / arm_count


def dft_codebook(arm_count: int, spacing_over_wavelength: float = 0.5) -> np.ndarray:
    """Unit-norm DFT beamforming matrix, one column per beam.

    Column k is the sampled spatial sinusoid at ``codebook_angles(K)[k]``
    scaled by 1/sqrt(K); with half-wavelength element spacing the columns are
    orthonormal.
    """
    w = codebook_angles(arm_count)
    m = np.arange(arm_count)[:, None]
    return np.exp(2j * np.pi * spacing_over_wavelength * m * w[None, :]) / math.sqrt(arm_count)


def directivity(
    misalignment: float | np.ndarray, arm_count: int, spacing_over_wavelength: float = 0.5
) -> float | np.ndarray:
    """Array directivity sin^2(K pi c x) / sin^2(pi c x) for misalignment x.

    ``c`` is the element spacing in wavelengths.  Removable singularities
    (x = 0 and the aliased replicas at multiples of 1/c) evaluate to K^2 by
    limit; array nulls at multiples of 1/(cK) evaluate to 0.
    """
    theta = 2.0 * np.pi * spacing_over_wavelength * np.asarray(misalignment, dtype=float)
    value = (arm_count * diric(theta, arm_count)) ** 2
    if np.isscalar(misalignment):
        return float(value)
    return value


def path_loss_db(f_mhz: float, d_m: float, alpha: float, chi_db: float = 0.0) -> float:
    """LOS path loss in dB: -27.5 + 20 log10(f) + 10 alpha log10(d) + chi.

    Frequency in MHz, distance in meters; ``chi_db`` is the shadow-fading
    realization in dB.
    """
    if f_mhz <= 0 or d_m <= 0:
        raise ValueError("frequency and distance must be positive")
    return -27.5 + 20.0 * math.log10(f_mhz) + 10.0 * alpha * math.log10(d_m) + chi_db


def check_unimodal(means: np.ndarray) -> int:
    """Verify strict unimodality and return the (1-based) peak index.

    Strict means: increasing up to the peak, decreasing after it, no tied
    adjacent entries anywhere.
    """
    means = np.asarray(means, dtype=float)
    if means.size < 2:
        raise ValueError("need at least 2 means")
    diffs = np.diff(means)
    peak0 = int(np.argmax(means))
    if np.any(diffs == 0.0):
        raise NotUnimodal("adjacent beams with exactly tied means")
    if not (np.all(diffs[:peak0] > 0.0) and np.all(diffs[peak0:] < 0.0)):
        raise NotUnimodal("mean profile is not strictly rising-then-falling")
    return peak0 + 1


def is_unimodal(means: np.ndarray) -> bool:
    try:
        check_unimodal(means)
        return True
    except NotUnimodal:
        return False


@dataclass(frozen=True)
class ChannelParams:
    """Physical configuration of one LOS beam-alignment link.

    ``spatial_angle`` is cos(theta) of the LOS path in [-1, 1]; ``None`` means
    a fresh uniform draw at instance-construction time.
    """

    num_beams: int
    distance_m: float
    carrier_hz: float = 60e9
    bandwidth_hz: float = 2.16e9
    noise_density_dbm_hz: float = -174.0
    tx_power_dbm: float = 50.0
    path_loss_exponent: float = 1.74
    shadow_sigma_db: float = 2.0
    spatial_angle: float | None = None
    spacing_over_wavelength: float = 0.5

    def __post_init__(self) -> None:
        if self.num_beams < 2:
            raise ValueError("num_beams must be >= 2")
        if self.distance_m <= 0 or self.carrier_hz <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("distance, carrier, and bandwidth must be positive")
        if not 1.0 <= self.path_loss_exponent <= 4.0:
            raise ValueError("path_loss_exponent must be in [1, 4]")
        if self.shadow_sigma_db < 0:
            raise ValueError("shadow_sigma_db must be nonnegative")
        if self.spatial_angle is not None and not -1.0 <= self.spatial_angle <= 1.0:
            raise ValueError("spatial_angle must be in [-1, 1]")

    def noise_floor_watts(self) -> float:
        return dbm_to_watts(
            self.noise_density_dbm_hz + 10.0 * math.log10(self.bandwidth_hz)
        )


NOISE_MODELS = ("complex-gaussian", "gaussian", "bernoulli")


@dataclass(frozen=True)
class ChannelInstance:
    """Frozen environment: per-beam mean rewards plus a sampling noise model.

    ``complex-gaussian`` draws circularly-symmetric receiver noise of power
    ``noise_power`` around the per-beam signal amplitude and returns squared
    magnitudes; ``gaussian`` adds real noise with per-beam std ``sigmas``;
    ``bernoulli`` treats means in [0, 1] as success probabilities.  Every
    sample is confined to ``bound_interval``.
    """

    mean_rewards: np.ndarray
    noise_model: str
    bound_interval: tuple[float, float]
    noise_power: float = 0.0
    sigmas: np.ndarray | None = None
    spatial_angle: float | None = None
    shadow_db: float | None = None

    def __post_init__(self) -> None:
        means = np.asarray(self.mean_rewards, dtype=float).copy()
        means.flags.writeable = False
        object.__setattr__(self, "mean_rewards", means)
        if self.noise_model not in NOISE_MODELS:
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        if self.noise_model == "gaussian":
            sig = np.broadcast_to(
                np.asarray(0.0 if self.sigmas is None else self.sigmas, dtype=float),
                means.shape,
            ).copy()
            if np.any(sig < 0):
                raise ValueError("sigmas must be nonnegative")
            sig.flags.writeable = False
            object.__setattr__(self, "sigmas", sig)
        if self.noise_model == "bernoulli" and (
            means.min() < 0.0 or means.max() > 1.0
        ):
            raise ValueError("bernoulli means must lie in [0, 1]")
        lo, hi = self.bound_interval
        if not lo < hi:
            raise ValueError("bound_interval must be a nonempty open range")
        if means.min() < lo or means.max() > hi:
            raise ValueError("means must lie inside bound_interval")

    @property
    def arm_count(self) -> int:
        return int(self.mean_rewards.size)

    def mean(self, arm: int) -> float:
        return float(self.mean_rewards[arm - 1])

    def means(self) -> np.ndarray:
        return self.mean_rewards

    def optimal_arm(self) -> int:
        return argmax_lowest(self.mean_rewards, list(range(1, self.arm_count + 1)))

    def sample_block(self, arm: int, n: int, rng: np.random.Generator) -> np.ndarray:
        mu = self.mean_rewards[arm - 1]
        lo, hi = self.bound_interval
        if self.noise_model == "complex-gaussian":
            amp = math.sqrt(max(mu - self.noise_power, 0.0))
            s = math.sqrt(self.noise_power / 2.0)
            re = rng.normal(amp, s, n)
            im = rng.normal(0.0, s, n)
            return np.clip(re * re + im * im, lo, hi)
        if self.noise_model == "gaussian":
            return np.clip(rng.normal(mu, self.sigmas[arm - 1], n), lo, hi)
        return (rng.random(n) < mu).astype(float)

    def sample(self, arm: int, rng: np.random.Generator) -> float:
        return float(self.sample_block(arm, 1, rng)[0])


def bernoulli_instance(means) -> ChannelInstance:
    """Synthetic instance with Bernoulli(mean) rewards, bounded in [0, 1]."""
    return ChannelInstance(
        mean_rewards=np.asarray(means, dtype=float),
        noise_model="bernoulli",
        bound_interval=(0.0, 1.0),
    )


def gaussian_instance(means, sigmas=0.0, bound_interval=None) -> ChannelInstance:
    """Synthetic instance with clipped Gaussian rewards.

    With the default bound of [min/10, 10*max] (positive means required) the
    clipping is far in the tails for well-separated arms; ``sigmas=0`` gives
    an exact-mean, zero-noise sampler.
    """
    means = np.asarray(means, dtype=float)
    if bound_interval is None:
        if means.min() <= 0:
            raise ValueError("default bound_interval needs strictly positive means")
        bound_interval = (float(means.min()) / 10.0, 10.0 * float(means.max()))
    return ChannelInstance(
        mean_rewards=means,
        noise_model="gaussian",
        bound_interval=bound_interval,
        sigmas=sigmas,
    )


def exact_instance(means) -> ChannelInstance:
    """Zero-noise oracle environment: every sample equals the arm's mean."""
    return gaussian_instance(means, sigmas=0.0)


def los_mean_rss(params: ChannelParams, spatial_angle: float, chi_db: float) -> np.ndarray:
    """Per-beam mean RSS in watts for a single-path LOS link.

    Transmit power times the path-loss channel gain, spread over K antennas
    and shaped by the array directivity at each beam's misalignment, plus the
    thermal noise floor.
    """
    k = params.num_beams
    pl = path_loss_db(
        params.carrier_hz / 1e6, params.distance_m, params.path_loss_exponent, chi_db
    )
    gain2 = 10.0 ** (-pl / 10.0)
    p_watts = dbm_to_watts(params.tx_power_dbm)
    delta = directivity(
        codebook_angles(k) - spatial_angle, k, params.spacing_over_wavelength
    )
    return p_watts * gain2 / k * delta + params.noise_floor_watts()


def _make_instance(
    params: ChannelParams, spatial_angle: float, chi_db: float, noise_model: str
) -> ChannelInstance:
    means = los_mean_rss(params, spatial_angle, chi_db)
    check_unimodal(means)
    n0w = params.noise_floor_watts()
    if noise_model == "complex-gaussian":
        # Squared magnitudes are nonnegative by construction; only the far
        # upper tail is clipped, which is unreachable at these SNRs.
        bound = (0.0, 10.0 * float(means.max()))
        sigmas = None
    elif noise_model == "gaussian":
        bound = (float(means.min()) / 10.0, 10.0 * float(means.max()))
        sigmas = np.sqrt(2.0 * n0w * (means - n0w / 2.0))
    else:
        raise ValueError(f"noise model {noise_model!r} not available for LOS instances")
    return ChannelInstance(
        mean_rewards=means,
        noise_model=noise_model,
        bound_interval=bound,
        noise_power=n0w if noise_model == "complex-gaussian" else 0.0,
        sigmas=sigmas,
        spatial_angle=spatial_angle,
        shadow_db=chi_db,
    )


def build_los_instance(
    params: ChannelParams,
    seed: int | np.random.Generator = 0,
    noise_model: str = "complex-gaussian",
) -> ChannelInstance:
    """Construct a frozen LOS instance from physical parameters.

    The shadow-fading realization is drawn once here and baked into the mean
    vector; the channel stays invariant for the instance's lifetime.  Raises
    :class:`NotUnimodal` when the spatial angle and beam count produce flat
    ties or an aliased secondary lobe inside the fan.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = params.spatial_angle
    if v is None:
        v = float(rng.uniform(-1.0, 1.0))
    chi = float(rng.normal(0.0, params.shadow_sigma_db)) if params.shadow_sigma_db > 0 else 0.0
    return _make_instance(params, v, chi, noise_model)


def build_unimodal_los_instance(
    params: ChannelParams,
    rng: np.random.Generator,
    noise_model: str = "complex-gaussian",
    max_attempts: int = 10_000,
) -> ChannelInstance:
    """Redraw the spatial angle until the mean profile is strictly unimodal.

    Only random-angle parameter sets can be redrawn; a fixed ``spatial_angle``
    that fails the check raises immediately.  Unimodality does not depend on
    the shadow realization (it scales all beams together), so candidate angles
    are screened before the shadow draw.
    """
    if params.spatial_angle is not None:
        chi = float(rng.normal(0.0, params.shadow_sigma_db)) if params.shadow_sigma_db > 0 else 0.0
        return _make_instance(params, params.spatial_angle, chi, noise_model)
    for _ in range(max_attempts):
        v = float(rng.uniform(-1.0, 1.0))
        if is_unimodal(los_mean_rss(params, v, 0.0)):
            chi = (
                float(rng.normal(0.0, params.shadow_sigma_db))
                if params.shadow_sigma_db > 0
                else 0.0
            )
            return _make_instance(params, v, chi, noise_model)
    raise NotUnimodal(f"no unimodal angle found in {max_attempts} draws for K={params.num_beams}")


# -- flat text serialization --------------------------------------------------
#
# key = value lines plus one comma-separated means line, floats via repr() so
# a saved instance replays bit-exactly.

def save_instance(instance: ChannelInstance, path: str | Path) -> None:
    lines = [
        "kind = channel-instance",
        f"arms = {instance.arm_count}",
        f"noise_model = {instance.noise_model}",
        f"noise_power = {instance.noise_power!r}",
        f"bound_lo = {instance.bound_interval[0]!r}",
        f"bound_hi = {instance.bound_interval[1]!r}",
        f"optimal = {instance.optimal_arm()}",
    ]
    if instance.spatial_angle is not None:
        lines.append(f"spatial_angle = {instance.spatial_angle!r}")
    if instance.shadow_db is not None:
        lines.append(f"shadow_db = {instance.shadow_db!r}")
    if instance.noise_model == "gaussian":
        lines.append("sigmas = " + ",".join(repr(float(s)) for s in instance.sigmas))
    lines.append("means = " + ",".join(repr(float(m)) for m in instance.mean_rewards))
    Path(path).write_text("\n".join(lines) + "\n")


def load_instance(path: str | Path) -> ChannelInstance:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InstanceFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    if fields.get("kind") != "channel-instance":
        raise InstanceFormatError(f"{path}: missing 'kind = channel-instance' header")
    try:
        means = np.array([float(x) for x in fields["means"].split(",")], dtype=float)
        instance = ChannelInstance(
            mean_rewards=means,
            noise_model=fields["noise_model"],
            bound_interval=(float(fields["bound_lo"]), float(fields["bound_hi"])),
            noise_power=float(fields.get("noise_power", "0.0")),
            sigmas=(
                np.array([float(x) for x in fields["sigmas"].split(",")], dtype=float)
                if "sigmas" in fields
                else None
            ),
            spatial_angle=float(fields["spatial_angle"]) if "spatial_angle" in fields else None,
            shadow_db=float(fields["shadow_db"]) if "shadow_db" in fields else None,
        )
    except (KeyError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
    if int(fields["arms"]) != instance.arm_count:
        raise InstanceFormatError(f"{path}: arms field disagrees with means length")
    if int(fields["optimal"]) != instance.optimal_arm():
        raise InstanceFormatError(f"{path}: optimal field disagrees with argmax of means")
    return instance
