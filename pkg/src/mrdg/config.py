"""Flat key=value run configuration with typed access and overrides."""

from __future__ import annotations

from dataclasses import dataclass

from .problems import REGISTRY


def parse_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split(",") if v.strip())


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(v) for v in s.split(",") if v.strip())


_MODES = ("sparse", "full", "adaptive")
_VARIANTS = ("interface", "inner")


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameters of one run or sweep."""

    problem: str
    ndim: int
    k: int
    n: int
    m: int
    variant: str
    mode: str
    t_final: float
    cfl: float
    sigma: float
    eps: float
    n_values: tuple[int, ...]
    eps_values: tuple[float, ...]
    snapshots: tuple[float, ...]
    slice_points: int
    init_n: int

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "RunConfig":
        known = {
            "problem", "ndim", "k", "n", "m", "variant", "mode", "t_final",
            "cfl", "sigma", "eps", "n_values", "eps_values", "snapshots",
            "slice_points", "init_n",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

        problem = raw.get("problem", "cosine-periodic")
        if problem not in REGISTRY:
            raise ValueError(f"unknown problem {problem!r}; choices: {sorted(REGISTRY)}")
        ndim = int(raw.get("ndim", 2))
        k = int(raw.get("k", 1))
        n = int(raw.get("n", 4))
        m = int(raw.get("m", k + 1))
        variant = raw.get("variant", "interface")
        if variant not in _VARIANTS:
            raise ValueError(f"variant must be one of {_VARIANTS}")
        mode = raw.get("mode", "sparse")
        if mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if not 1 <= ndim <= 3:
            raise ValueError("ndim must be 1, 2, or 3")
        if k < 1 or n < 1 or m < 1:
            raise ValueError("k, n, m must be positive")
        return cls(
            problem=problem,
            ndim=ndim,
            k=k,
            n=n,
            m=m,
            variant=variant,
            mode=mode,
            t_final=float(raw.get("t_final", 0.1)),
            cfl=float(raw.get("cfl", 0.1 if ndim <= 2 else 0.05)),
            sigma=float(raw.get("sigma", 10.0 if ndim <= 2 else 30.0)),
            eps=float(raw.get("eps", 1e-3)),
            n_values=_ints(raw.get("n_values", "")),
            eps_values=_floats(raw.get("eps_values", "")),
            snapshots=_floats(raw.get("snapshots", "")),
            slice_points=int(raw.get("slice_points", 64)),
            init_n=int(raw.get("init_n", 0)) or min(4, n),
        )

    def echo_lines(self) -> list[str]:
        """Canonical `key = value` rendering of every resolved field."""

        def show(v):
            if isinstance(v, tuple):
                return ",".join(f"{x:g}" if isinstance(x, float) else str(x) for x in v)
            if isinstance(v, float):
                return f"{v:g}"
            return str(v)

        fields = [
            "problem", "ndim", "k", "n", "m", "variant", "mode", "t_final",
            "cfl", "sigma", "eps", "n_values", "eps_values", "snapshots",
            "slice_points", "init_n",
        ]
        return [f"{name} = {show(getattr(self, name))}" for name in fields]


def load_config(path: str, overrides: list[str] = ()) -> RunConfig:
    """Read a config file and apply `key=value` override strings in order."""
    with open(path) as fh:
        raw = parse_text(fh.read())
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must look like key=value, got {item!r}")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    return RunConfig.from_mapping(raw)
