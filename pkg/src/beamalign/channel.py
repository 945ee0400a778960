"""mmWave MISO channel synthesis: steering vectors, codebooks, grouped beams, arm means.

Conventions used throughout:
  * powers are linear milliwatts; dB/dBm appear only at config boundaries,
  * arm labels are 1-based, codeword array positions are 0-based; the
    conversion lives in :class:`Codebook`,
  * angles of departure are given as fractions of pi and enter the steering
    vector through cos(theta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SteeringConfig",
    "Codebook",
    "PathSpec",
    "Channel",
    "ArmMeans",
    "array_response",
    "build_codebook",
    "synth_channel",
    "group_beam",
    "mean_reward",
    "arm_means",
    "import_channel",
    "write_channel",
]

_NORM_TOL = 1e-12


@dataclass(frozen=True)
class SteeringConfig:
    """Uniform linear array and codebook dimensions."""

    num_antennas: int
    spacing_ratio: float = 0.5  # antenna spacing over wavelength
    codebook_size: int = 1

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.codebook_size < 1:
            raise ValueError(f"codebook_size must be >= 1, got {self.codebook_size}")
        if self.spacing_ratio <= 0:
            raise ValueError(f"spacing_ratio must be > 0, got {self.spacing_ratio}")


@dataclass(frozen=True)
class Codebook:
    """Ordered set of unit-norm beamforming vectors (0-based positions)."""

    beams: np.ndarray  # shape (K, N), complex

    def __post_init__(self):
        norms = np.linalg.norm(self.beams, axis=1)
        if not np.all(np.abs(norms - 1.0) <= _NORM_TOL):
            raise ValueError("every codebook beam must have unit l2 norm")

    @property
    def size(self) -> int:
        return self.beams.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.beams.shape[1]

    def beam(self, arm: int) -> np.ndarray:
        """Beamforming vector for the 1-based arm label `arm`."""
        if not 1 <= arm <= self.size:
            raise IndexError(f"arm {arm} out of range [1, {self.size}]")
        return self.beams[arm - 1]


@dataclass(frozen=True)
class PathSpec:
    """One propagation path: AoD (units of pi), relative loss (dB), gain phase."""

    aod_fraction_of_pi: float
    loss_db: float = 0.0
    phase_rad: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.aod_fraction_of_pi < 1.0:
            raise ValueError("aod_fraction_of_pi must lie in (0, 1)")
        if self.loss_db > 0:
            raise ValueError("loss_db is a relative loss and must be <= 0")

    @property
    def gain(self) -> complex:
        return 10.0 ** (self.loss_db / 20.0) * np.exp(1j * self.phase_rad)


@dataclass(frozen=True)
class Channel:
    """Complex channel vector of length N."""

    h: np.ndarray

    def __post_init__(self):
        if self.h.ndim != 1 or self.h.size < 1:
            raise ValueError("channel must be a non-empty vector")
        if not np.all(np.isfinite(self.h.view(float))):
            raise ValueError("channel entries must be finite")
        if np.linalg.norm(self.h) == 0.0:
            raise ValueError("degenerate all-zero channel")

    @property
    def num_antennas(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class ArmMeans:
    """Per-arm mean received power mu_k = p |h^H f_k|^2 (mW)."""

    mu: np.ndarray
    tx_power_mw: float
    labels: tuple = field(default=())

    def __post_init__(self):
        if self.tx_power_mw <= 0:
            raise ValueError("tx_power_mw must be positive")
        if not np.all(self.mu > 0):
            raise ValueError("every arm mean must be strictly positive")

    @property
    def best_arm(self) -> int:
        """1-based label of the arm with the largest mean."""
        return int(np.argmax(self.mu)) + 1


def array_response(x: float, cfg: SteeringConfig) -> np.ndarray:
    """ULA response at spatial frequency x, with the Hermitian sign convention.

    Element m equals exp(-j 2 pi (d/lambda) m x) / sqrt(N); the result has
    unit l2 norm.
    """
    n = np.arange(cfg.num_antennas)
    return np.exp(-2j * np.pi * cfg.spacing_ratio * n * x) / np.sqrt(cfg.num_antennas)


def build_codebook(cfg: SteeringConfig) -> Codebook:
    """Codebook with beam k (0-based) steered at spatial frequency -1 + 2k/K.

    Arm label k (1-based) maps to codeword position k-1.
    """
    k = np.arange(cfg.codebook_size)
    freqs = -1.0 + 2.0 * k / cfg.codebook_size
    beams = np.stack([array_response(x, cfg) for x in freqs])
    return Codebook(beams=beams)


def synth_channel(
    paths: list[PathSpec],
    num_antennas: int,
    gain_db: float = 0.0,
    spacing_ratio: float = 0.5,
) -> Channel:
    """Multipath channel h = sqrt(N/L) * sum_l beta_l a(cos theta_l).

    `gain_db` is an overall power anchor applied to the whole channel (it
    fixes the absolute received-power scale without touching the relative
    path losses); it leaves the argmax beam unchanged.
    """
    if not paths:
        raise ValueError("path list must be non-empty")
    aods = [p.aod_fraction_of_pi for p in paths]
    if len(set(aods)) != len(aods):
        raise ValueError("path AoD fractions must be distinct")
    n_losses = sum(1 for p in paths if p.loss_db == 0.0)
    if n_losses != 1:
        raise ValueError("exactly one path must have loss_db = 0 (the LoS reference)")

    L = len(paths)
    cfg = SteeringConfig(num_antennas=num_antennas, spacing_ratio=spacing_ratio)
    h = np.zeros(num_antennas, dtype=complex)
    for p in paths:
        h += p.gain * array_response(np.cos(np.pi * p.aod_fraction_of_pi), cfg)
    h *= np.sqrt(num_antennas / L) * 10.0 ** (gain_db / 20.0)
    return Channel(h=h)


def group_beam(cb: Codebook, indices) -> np.ndarray:
    """Normalized sum of consecutive codebook beams (1-based arm indices).

    Repeated trailing indices are tolerated (padding of a short last group);
    the summed vector must not cancel below norm 1e-12.
    """
    idx = list(indices)
    if not idx:
        raise ValueError("index set must be non-empty")
    uniq = sorted(set(idx))
    if uniq != list(range(uniq[0], uniq[-1] + 1)):
        raise ValueError(f"indices must be consecutive, got {idx}")
    if uniq[0] < 1 or uniq[-1] > cb.size:
        raise ValueError(f"indices {idx} out of range [1, {cb.size}]")
    total = np.zeros(cb.num_antennas, dtype=complex)
    for k in idx:
        total += cb.beam(k)
    norm = np.linalg.norm(total)
    if norm < _NORM_TOL:
        raise ValueError("grouped beams cancel (norm below 1e-12)")
    return total / norm


def mean_reward(channel: Channel, f: np.ndarray, p_mw: float) -> float:
    """Mean received power p |h^H f|^2 for a unit-norm beam f (mW)."""
    return p_mw * float(np.abs(np.vdot(channel.h, f)) ** 2)


def arm_means(channel: Channel, cb: Codebook, p_mw: float) -> ArmMeans:
    """Mean received power of every codebook arm at transmit power p (mW)."""
    proj = cb.beams @ channel.h.conj()
    mu = p_mw * np.abs(proj) ** 2
    # an exactly-zero projection would make the heteroscedastic reward law
    # degenerate; nudge to the smallest positive float instead
    mu = np.maximum(mu, np.finfo(float).tiny)
    labels = tuple((k,) for k in range(1, cb.size + 1))
    return ArmMeans(mu=mu, tx_power_mw=p_mw, labels=labels)


def import_channel(path, expected_n: int | None = None) -> Channel:
    """Read a channel vector from a text file of `re,im` rows.

    Lines starting with `#` and blank lines are skipped. Raises ValueError
    naming the offending line for malformed rows, and on a row-count
    mismatch when `expected_n` is given.
    """
    entries = []
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 2:
                raise ValueError(
                    f"{path}: line {line_no}: expected 2 comma-separated fields, got {len(fields)}"
                )
            try:
                re_part, im_part = float(fields[0]), float(fields[1])
            except ValueError as exc:
                raise ValueError(f"{path}: line {line_no}: non-numeric field") from exc
            if not (np.isfinite(re_part) and np.isfinite(im_part)):
                raise ValueError(f"{path}: line {line_no}: non-finite value")
            entries.append(complex(re_part, im_part))
    if not entries:
        raise ValueError(f"{path}: no channel entries found")
    if expected_n is not None and len(entries) != expected_n:
        raise ValueError(
            f"{path}: row count mismatch: expected {expected_n} entries, found {len(entries)}"
        )
    return Channel(h=np.asarray(entries, dtype=complex))


def write_channel(path, channel: Channel) -> None:
    """Write a channel vector in the `re,im` text format read by import_channel."""
    with open(path, "w") as fh:
        fh.write("# channel vector: one `re,im` row per antenna element\n")
        for z in channel.h:
            fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")
