"""Physical parameters, conventions and shared validation.

Natural units (hbar = c = 1) throughout; the worldsheet parameters tau and
sigma are dimensionless and mode amplitudes carry dimension sqrt(alpha').
The single dimensionful constant is the Regge slope alpha', which doubles
as the diffusion scale of the stochastic process: every non-zero normal
mode diffuses with constant 2*alpha', the zero mode with alpha'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class ValidationError(ValueError):
    """Raised when parameters or state data violate an invariant."""


CONFIG_KEYS = ("alpha_prime", "dims", "mode_cutoff", "p_plus", "seed")


@dataclass(frozen=True)
class StringParams:
    """Immutable physical constants of one string setup.

    Parameters
    ----------
    alpha_prime : float
        Regge slope (length squared, natural units). Must be positive.
    dims : int
        Spacetime dimension D >= 3; the transverse sector has D - 2
        directions.
    mode_cutoff : int
        Largest retained oscillator mode N_max >= 1.
    p_plus : float
        Light-cone momentum. Only rescales Lorentz generators; it never
        affects whether the anomaly vanishes. Defaults to 1.
    """

    alpha_prime: float
    dims: int = 26
    mode_cutoff: int = 4
    p_plus: float = 1.0

    @property
    def transverse_count(self) -> int:
        return self.dims - 2

    def diffusion(self, n: int) -> float:
        """Diffusion constant of mode ``n``: 2*alpha' for n >= 1, alpha' for n = 0."""
        if n < 0:
            raise ValidationError(f"mode index must be >= 0, got {n}")
        return self.alpha_prime if n == 0 else 2.0 * self.alpha_prime

    def validate(self) -> None:
        errors = validate(self)
        if errors:
            raise ValidationError("; ".join(errors))


def diffusion(params: StringParams, n: int) -> float:
    """Functional form of :meth:`StringParams.diffusion`."""
    return params.diffusion(n)


def validate(params: StringParams) -> list[str]:
    """Check every parameter invariant; return one message per violation."""
    errors = []
    if not params.alpha_prime > 0:
        errors.append(f"alpha_prime must be positive, got {params.alpha_prime}")
    if params.dims < 3:
        errors.append(
            f"dims must be >= 3 (no transverse directions otherwise), got {params.dims}"
        )
    if params.mode_cutoff < 1:
        errors.append(f"mode_cutoff must be >= 1, got {params.mode_cutoff}")
    if not params.p_plus > 0:
        errors.append(f"p_plus must be positive, got {params.p_plus}")
    return errors


@dataclass(frozen=True)
class ModeStateSpec:
    """A stationary string state: per-(mode, direction) occupation numbers.

    ``occupations`` maps (n, i) with mode n >= 1 and transverse direction
    i in 1..D-2 to a non-negative excitation number. Directions absent
    from the map are in their ground state. ``zero_mode_momentum`` holds
    the D-2 components of the zero-mode momentum.
    """

    occupations: dict[tuple[int, int], int] = field(default_factory=dict)
    zero_mode_momentum: tuple[float, ...] = ()

    def level(self) -> int:
        """Total oscillator level sum(n * k) of the state."""
        return sum(n * k for (n, _i), k in self.occupations.items())

    def occupation(self, n: int, i: int) -> int:
        return self.occupations.get((n, i), 0)

    def validate(self, params: StringParams) -> None:
        for (n, i), k in self.occupations.items():
            if n < 1:
                raise ValidationError(f"occupied mode index must be >= 1, got {n}")
            if n > params.mode_cutoff:
                raise ValidationError(
                    f"mode {n} exceeds mode_cutoff {params.mode_cutoff}"
                )
            if not 1 <= i <= params.transverse_count:
                raise ValidationError(
                    f"direction {i} outside 1..{params.transverse_count}"
                )
            if k < 0:
                raise ValidationError(f"occupation must be >= 0, got {k} at ({n},{i})")
        if self.zero_mode_momentum and len(self.zero_mode_momentum) != params.transverse_count:
            raise ValidationError(
                f"zero_mode_momentum needs {params.transverse_count} components, "
                f"got {len(self.zero_mode_momentum)}"
            )

    def momentum_component(self, i: int) -> float:
        if not self.zero_mode_momentum:
            return 0.0
        return self.zero_mode_momentum[i - 1]


def parse_config(text: str) -> dict[str, float | int]:
    """Parse ``key = value`` configuration text.

    Recognised keys: alpha_prime, dims, mode_cutoff, p_plus, seed. Blank
    lines and lines starting with ``#`` are ignored.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno} is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ValidationError(f"unknown config key {key!r} on line {lineno}")
        if key in ("dims", "mode_cutoff", "seed"):
            values[key] = int(value)
        else:
            values[key] = float(value)
    return values


def load_config(path: str | Path) -> tuple[StringParams, int | None]:
    """Read parameters (and an optional seed) from a config file."""
    values = parse_config(Path(path).read_text())
    seed = values.pop("seed", None)
    params = StringParams(
        alpha_prime=float(values.get("alpha_prime", 0.5)),
        dims=int(values.get("dims", 26)),
        mode_cutoff=int(values.get("mode_cutoff", 4)),
        p_plus=float(values.get("p_plus", 1.0)),
    )
    errors = validate(params)
    if errors:
        raise ValidationError("; ".join(errors))
    return params, (int(seed) if seed is not None else None)
