"""Synthetic cyclic-test data for brace hysteresis.

A displacement-controlled loading protocol (blocks of symmetric cycles
with growing peak amplitude, expressed as multiples of the yield
displacement) drives a degrading hysteresis law of the Bouc-Wen family.
The result is a displacement/force pair that behaves like a small-scale
brace test: nearly elastic response below yield, pinched loops beyond
it, buckling-like tension/compression asymmetry, and strength loss as
dissipated energy accumulates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DivergenceError, ValidationError

DISPLACEMENT = "displacement"
FORCE = "force"

CSV_HEADER = ("t", "displacement", "force")

#: Peak multipliers of the yield displacement, two cycles each: 26 cycles total.
DEFAULT_AMPLITUDE_FACTORS = (
    0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0,
)


@dataclass(frozen=True)
class Series:
    """A uniformly sampled scalar time history.

    ``unit`` tags the physical quantity: ``"displacement"`` or ``"force"``.
    """

    dt: float
    values: np.ndarray
    unit: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be finite and positive, got {self.dt}")
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("values must be a non-empty one-dimensional array")
        if self.unit not in (DISPLACEMENT, FORCE):
            raise ValidationError(
                f"unit must be {DISPLACEMENT!r} or {FORCE!r}, got {self.unit!r}"
            )

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values)) * self.dt


@dataclass(frozen=True)
class LoadingProtocol:
    """Cyclic loading schedule: symmetric cycles at multiples of delta_y.

    Each amplitude factor ``a`` contributes ``cycles_per_amplitude`` full
    cycles peaking at ``+/- a * delta_y``. A cycle rises to the positive
    peak, falls through zero to the negative peak, and returns to zero,
    sampled ``points_per_cycle`` times on a smooth sinusoidal shape.
    """

    delta_y: float = 0.1
    amplitude_factors: tuple[float, ...] = DEFAULT_AMPLITUDE_FACTORS
    cycles_per_amplitude: int = 2
    points_per_cycle: int = 200
    dt: float = 0.01

    def __post_init__(self):
        object.__setattr__(
            self, "amplitude_factors", tuple(float(a) for a in self.amplitude_factors)
        )
        if not (math.isfinite(self.delta_y) and self.delta_y > 0):
            raise ValidationError(f"delta_y must be positive, got {self.delta_y}")
        if len(self.amplitude_factors) == 0:
            raise ValidationError("amplitude_factors must be non-empty")
        if any(a <= 0 for a in self.amplitude_factors):
            raise ValidationError("amplitude_factors must all be positive")
        if any(
            b <= a for a, b in zip(self.amplitude_factors, self.amplitude_factors[1:])
        ):
            raise ValidationError("amplitude_factors must be strictly increasing")
        if self.cycles_per_amplitude < 1:
            raise ValidationError(
                f"cycles_per_amplitude must be >= 1, got {self.cycles_per_amplitude}"
            )
        if self.points_per_cycle < 8:
            raise ValidationError(
                f"points_per_cycle must be >= 8, got {self.points_per_cycle}"
            )
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError(f"dt must be positive, got {self.dt}")

    @property
    def total_cycles(self) -> int:
        return len(self.amplitude_factors) * self.cycles_per_amplitude

    @property
    def num_samples(self) -> int:
        return self.total_cycles * self.points_per_cycle + 1


@dataclass(frozen=True)
class BoucWenParams:
    """Parameters of the degrading, asymmetric Bouc-Wen hysteresis law.

    The restoring force splits into an elastic part ``alpha * k * x`` and a
    hysteretic part ``(1 - alpha) * k * z`` driven by the internal variable
    z. ``delta_nu`` and ``delta_eta`` grow the strength- and stiffness-
    degradation factors linearly in dissipated energy; ``asym`` scales the
    shape parameters on the compression side (z < 0) to mimic buckling.
    """

    k: float = 10.0
    alpha: float = 0.05
    A0: float = 1.0
    beta: float = 5.0
    gamma: float = 5.0
    n: float = 1.5
    delta_nu: float = 0.10
    delta_eta: float = 0.40
    asym: float = 1.5
    substeps: int = 4

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValidationError(f"k must be positive, got {self.k}")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (math.isfinite(self.A0) and self.A0 >= 0):
            raise ValidationError(f"A0 must be non-negative, got {self.A0}")
        for name in ("beta", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if not (math.isfinite(self.n) and self.n >= 1.0):
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.delta_nu < 0:
            raise ValidationError(f"delta_nu must be >= 0, got {self.delta_nu}")
        if self.delta_eta < 0:
            raise ValidationError(f"delta_eta must be >= 0, got {self.delta_eta}")
        if self.asym < 1.0:
            raise ValidationError(f"asym must be >= 1, got {self.asym}")
        if self.substeps < 1:
            raise ValidationError(f"substeps must be >= 1, got {self.substeps}")

    def with_substeps(self, substeps: int) -> "BoucWenParams":
        return BoucWenParams(
            k=self.k, alpha=self.alpha, A0=self.A0, beta=self.beta,
            gamma=self.gamma, n=self.n, delta_nu=self.delta_nu,
            delta_eta=self.delta_eta, asym=self.asym, substeps=substeps,
        )


def specimen_a() -> BoucWenParams:
    """Default parameter set: moderately degrading steel-like brace."""
    return BoucWenParams()


def specimen_b() -> BoucWenParams:
    """Softer, more sharply degrading variant (aluminum-like brace)."""
    return BoucWenParams(
        k=8.0, alpha=0.03, n=2.0, delta_nu=0.15, delta_eta=0.50, asym=2.0
    )


def generate_protocol(protocol: LoadingProtocol) -> Series:
    """Sample the cyclic loading protocol as a displacement series.

    Cycles are smooth sine waves; each cycle contributes
    ``points_per_cycle`` samples and one trailing zero closes the series,
    so the length is ``total_cycles * points_per_cycle + 1``. The series
    starts and ends at zero displacement.
    """
    ppc = protocol.points_per_cycle
    shape = np.sin(2.0 * np.pi * np.arange(ppc) / ppc)
    peaks = [
        a * protocol.delta_y
        for a in protocol.amplitude_factors
        for _ in range(protocol.cycles_per_amplitude)
    ]
    values = np.concatenate([peak * shape for peak in peaks] + [np.zeros(1)])
    return Series(dt=protocol.dt, values=values, unit=DISPLACEMENT)


@dataclass(frozen=True)
class SimulationTrace:
    """Force output plus the internal state histories of a simulation."""

    force: Series
    z: np.ndarray
    energy: np.ndarray


def simulate(params: BoucWenParams, disp: Series) -> Series:
    """Drive the hysteresis law with a displacement series; return force."""
    return simulate_trace(params, disp).force


def simulate_trace(params: BoucWenParams, disp: Series) -> SimulationTrace:
    """Integrate the degrading Bouc-Wen law along a displacement history.

    State: internal variable z (drives the hysteretic force) and
    dissipated energy. Between consecutive displacement samples the state
    advances with classical fourth-order Runge-Kutta over ``substeps``
    equal substeps; the velocity is taken from finite differences of the
    displacement samples (central in the interior, one-sided at the ends)
    and interpolated linearly within each sample interval.
    """
    if disp.unit != DISPLACEMENT:
        raise ValidationError(f"simulate expects a displacement series, got {disp.unit!r}")

    x = disp.values
    dt = disp.dt
    num = len(x)

    v = np.zeros(num)
    if num > 1:
        v[0] = (x[1] - x[0]) / dt
        v[-1] = (x[-1] - x[-2]) / dt
        v[1:-1] = (x[2:] - x[:-2]) / (2.0 * dt)

    k = params.k
    alpha = params.alpha
    a0 = params.A0
    beta = params.beta
    gamma = params.gamma
    n_exp = params.n
    d_nu = params.delta_nu
    d_eta = params.delta_eta
    asym = params.asym
    one_minus_alpha_k = (1.0 - alpha) * k

    def rhs(z, energy, vel):
        nu = 1.0 + d_nu * energy
        eta = 1.0 + d_eta * energy
        if z < 0.0:
            b, g = asym * beta, asym * gamma
        else:
            b, g = beta, gamma
        abs_z = abs(z)
        pow_nm1 = abs_z ** (n_exp - 1.0) if abs_z > 0.0 else (1.0 if n_exp == 1.0 else 0.0)
        dz = (a0 * vel - nu * (b * abs(vel) * pow_nm1 * z + g * vel * pow_nm1 * abs_z)) / eta
        de = one_minus_alpha_k * z * vel
        return dz, de

    substeps = params.substeps
    h = dt / substeps
    z_hist = np.zeros(num)
    e_hist = np.zeros(num)
    z_cur = 0.0
    e_cur = 0.0
    # a blowing-up state is reported via DivergenceError, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(num - 1):
            v0 = v[i]
            dv = v[i + 1] - v0
            for s in range(substeps):
                va = v0 + dv * (s / substeps)
                vm = v0 + dv * ((s + 0.5) / substeps)
                vb = v0 + dv * ((s + 1.0) / substeps)
                k1z, k1e = rhs(z_cur, e_cur, va)
                k2z, k2e = rhs(z_cur + 0.5 * h * k1z, e_cur + 0.5 * h * k1e, vm)
                k3z, k3e = rhs(z_cur + 0.5 * h * k2z, e_cur + 0.5 * h * k2e, vm)
                k4z, k4e = rhs(z_cur + h * k3z, e_cur + h * k3e, vb)
                z_cur += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
                e_cur += (h / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
            if not (math.isfinite(z_cur) and math.isfinite(e_cur)):
                raise DivergenceError(
                    f"hysteresis state became non-finite at sample {i + 1}", index=i + 1
                )
            z_hist[i + 1] = z_cur
            e_hist[i + 1] = e_cur

    force = alpha * k * x + one_minus_alpha_k * z_hist
    return SimulationTrace(
        force=Series(dt=dt, values=force, unit=FORCE), z=z_hist, energy=e_hist
    )


def write_csv(path, disp: Series, force: Series) -> None:
    """Write a ``t,displacement,force`` CSV, one row per sample."""
    if len(disp) != len(force):
        raise ValidationError(
            f"series length mismatch: {len(disp)} displacement vs {len(force)} force"
        )
    if disp.dt != force.dt:
        raise ValidationError(f"dt mismatch: {disp.dt} vs {force.dt}")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for i, (d, f) in enumerate(zip(disp.values, force.values)):
            writer.writerow([repr(i * disp.dt), repr(float(d)), repr(float(f))])


def read_csv(path) -> tuple[Series, Series]:
    """Read a ``t,displacement,force`` CSV back into a series pair."""
    path = Path(path)
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise ValidationError(
                f"{path}: expected header {','.join(CSV_HEADER)!r}, got {header!r}"
            )
        rows = [(float(t), float(d), float(f)) for t, d, f in reader]
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows, got {len(rows)}")
    t = np.array([r[0] for r in rows])
    dt = float(t[1] - t[0])
    disp = Series(dt=dt, values=np.array([r[1] for r in rows]), unit=DISPLACEMENT)
    force = Series(dt=dt, values=np.array([r[2] for r in rows]), unit=FORCE)
    return disp, force
