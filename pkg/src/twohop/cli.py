"""Command-line experiment runner: ``twohop {constants,sweep,gain,throughput}``.

Every data command writes a CSV preceded by ``#`` comment lines holding the
SHA-256 of the canonical config dump and the seed.  Output bytes depend only
on the config; the worker count is deliberately left out of both.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import tomli

from twohop import analytic
from twohop.channel import PathLossModel, SystemParams
from twohop.geometry import IntensityProfile, LatticeSpec
from twohop.montecarlo import RelayScheme, simulate
from twohop.quadrature import QuadratureSpec


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description; defaults are the reference setup."""

    theta: float = 1.5
    alpha: float = 4.0
    path_loss: str = "sum"
    lam_m: float = 5.0
    L: float = 1.0
    offset_x: float = 0.5
    offset_y: float = 0.5
    noise: float = 1.0
    K: int = 2
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    betas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    scheme: str = "best"
    trials: int = 100_000
    seed: int = 0
    out: str = ""
    alphas: tuple[float, ...] = (3.0, 4.0)
    quad_radial_nodes: int = 24
    quad_angular_nodes: int = 24
    quad_square_nodes: int = 16
    quad_laguerre_nodes: int = 48
    quad_lattice_K: int = 64
    quad_tail_correction: bool = True

    def __post_init__(self):
        for name in ("snr_db", "betas", "alphas"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type == "int" and (isinstance(v, bool) or not isinstance(v, int)):
                raise ValueError(f"{f.name} must be an integer, got {v!r}")
            if f.type == "float":
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ValueError(f"{f.name} must be a number, got {v!r}")
                object.__setattr__(self, f.name, float(v))
            if f.type == "bool" and not isinstance(v, bool):
                raise ValueError(f"{f.name} must be true or false, got {v!r}")
            if f.type == "str" and not isinstance(v, str):
                raise ValueError(f"{f.name} must be a string, got {v!r}")
        if self.scheme not in {s.value for s in RelayScheme}:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        # builds and validates the physical parameters
        self.system()

    def system(self) -> SystemParams:
        return SystemParams(
            lattice=LatticeSpec(density=1.0, K=self.K),
            profile=IntensityProfile(lam_m=self.lam_m, L=self.L),
            path_loss=PathLossModel(kind=self.path_loss, alpha=self.alpha),
            theta=self.theta,
            offset=(self.offset_x, self.offset_y),
            noise=self.noise,
        )

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(
            radial_nodes=self.quad_radial_nodes,
            angular_nodes=self.quad_angular_nodes,
            square_nodes=self.quad_square_nodes,
            laguerre_nodes=self.quad_laguerre_nodes,
            lattice_K=self.quad_lattice_K,
            tail_correction=self.quad_tail_correction,
        )

    @property
    def relay_scheme(self) -> RelayScheme:
        return RelayScheme(self.scheme)

    # -- serialisation ---------------------------------------------------

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path, "rb") as fh:
            return cls.from_mapping(tomli.load(fh))

    def dumps(self) -> str:
        """Canonical TOML; ``loads(dumps(c)) == c``."""
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {_toml_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> ExperimentConfig:
        return cls.from_mapping(tomli.loads(text))

    def digest(self) -> str:
        return hashlib.sha256(self.dumps().encode()).hexdigest()


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, tuple):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {v!r}")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".10g")


class _Table:
    def __init__(self, command: str, cfg: ExperimentConfig | None, columns):
        self.buf = io.StringIO()
        self.buf.write(f"# twohop {command}\n")
        if cfg is not None:
            self.buf.write(f"# config_sha256 = {cfg.digest()}\n")
            self.buf.write(f"# seed = {cfg.seed}\n")
            self.buf.write(f"# trials = {cfg.trials}\n")
        self.columns = list(columns)
        self.buf.write(",".join(self.columns) + "\n")

    def row(self, *values):
        if len(values) != len(self.columns):
            raise AssertionError("row does not match header")
        self.buf.write(",".join(_fmt(v) for v in values) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


SWEEP_COLUMNS = (
    "snr_db",
    "beta",
    "scheme",
    "p_d",
    "p_r_cond",
    "p_s",
    "p_d_stderr",
    "p_r_cond_stderr",
    "p_s_stderr",
    "analytic_asymptote",
)
GAIN_COLUMNS = ("snr_db", "beta", "scheme", "gain", "gain_stderr", "gain_defined", "asymptotic_gain")
THROUGHPUT_COLUMNS = ("snr_db", "beta", "scheme", "density", "density_stderr")
CONSTANTS_COLUMNS = ("alpha", "C", "tolerance")


def _asymptote_error(cfg, params, beta):
    """Predicted error of the scheme at this point, nan where no expansion applies."""
    quad = cfg.quadrature()
    try:
        if cfg.scheme == "nearest":
            curve = analytic.nearest_error_asymptote(beta, params, quad)
        elif cfg.scheme == "best":
            curve = analytic.best_error_asymptote(beta, params, quad)
        elif cfg.scheme == "retransmit":
            curve = analytic.p_direct_asymptote(beta, params)
        else:
            return math.nan
    except ValueError:
        return math.nan
    return float(curve(params.snr))


def _asymptotic_gain(cfg, params, beta):
    if cfg.scheme == "retransmit":
        return 1.0
    try:
        return analytic.asymptotic_gain(cfg.scheme, beta, params, cfg.quadrature())
    except ValueError:
        return math.nan


def _grid(cfg):
    base = cfg.system()
    for beta in cfg.betas:
        for s in cfg.snr_db:
            yield s, beta, base.at(s, beta)


def cmd_constants(alphas, tol_head: int = 32) -> str:
    t = _Table("constants", None, CONSTANTS_COLUMNS)
    for a in alphas:
        c = analytic.epstein_C(a)
        s = a / 2
        # change under a doubled exact head bounds the Euler-Maclaurin error
        c2 = (
            analytic.hurwitz_xi(s, 0.0, 2 * tol_head)
            * (analytic.hurwitz_xi(s, 0.25, 2 * tol_head) - analytic.hurwitz_xi(s, 0.75, 2 * tol_head))
            / 2 ** (a - 2)
        )
        t.row(a, c, abs(c - c2))
    return t.text()


def cmd_sweep(cfg: ExperimentConfig, workers: int = 1) -> str:
    t = _Table("sweep", cfg, SWEEP_COLUMNS)
    scheme = cfg.relay_scheme
    for s, beta, p in _grid(cfg):
        b = simulate(p, scheme, cfg.trials, cfg.seed, workers=workers)
        pd, pr, ps = b.p_direct(), b.p_relay(), b.p_two_hop()
        t.row(s, beta, cfg.scheme, pd.value, pr.value, ps.value, pd.stderr, pr.stderr, ps.stderr,
              _asymptote_error(cfg, p, beta))
    return t.text()


def cmd_gain(cfg: ExperimentConfig, workers: int = 1) -> str:
    t = _Table("gain", cfg, GAIN_COLUMNS)
    scheme = cfg.relay_scheme
    for s, beta, p in _grid(cfg):
        g = simulate(p, scheme, cfg.trials, cfg.seed, workers=workers).gain()
        t.row(s, beta, cfg.scheme, g.value, g.stderr, g.defined, _asymptotic_gain(cfg, p, beta))
    return t.text()


def cmd_throughput(cfg: ExperimentConfig, workers: int = 1) -> str:
    t = _Table("throughput", cfg, THROUGHPUT_COLUMNS)
    scheme = cfg.relay_scheme
    for s, beta, p in _grid(cfg):
        e = simulate(p, scheme, cfg.trials, cfg.seed, workers=workers).throughput_density()
        t.row(s, beta, cfg.scheme, e.value, e.stderr)
    return t.text()


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twohop", description="Two-hop cellular relaying experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="lattice constant C(alpha)")
    c.add_argument("--alpha", type=_float_list, default=None, help="comma-separated exponents (> 2)")
    c.add_argument("--config", type=Path)
    c.add_argument("--out", type=Path)

    for name, desc in (
        ("sweep", "outage probabilities over an SNR/beta grid"),
        ("gain", "gain over direct retransmission"),
        ("throughput", "throughput density over an SNR/beta grid"),
    ):
        s = sub.add_parser(name, help=desc)
        s.add_argument("--config", type=Path, help="TOML file with ExperimentConfig keys")
        s.add_argument("--seed", type=_u64)
        s.add_argument("--trials", type=int)
        s.add_argument("--out", type=Path)
        s.add_argument("--scheme", choices=[x.value for x in RelayScheme])
        s.add_argument("--beta", type=_float_list, help="comma-separated beta values")
        s.add_argument("--snr-db", type=_float_list, help="comma-separated SNR values in dB")
        s.add_argument("--workers", type=int, default=1, help="processes; does not change the output")
        s.add_argument("--dump-config", action="store_true", help="print the resolved config and exit")
    return p


def resolve_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    over = {}
    for attr, key in (("seed", "seed"), ("trials", "trials"), ("scheme", "scheme"), ("beta", "betas"),
                      ("snr_db", "snr_db"), ("out", "out"), ("alpha", "alphas")):
        v = getattr(args, attr, None)
        if v is not None:
            over[key] = str(v) if key == "out" else v
    return replace(cfg, **over) if over else cfg


def _emit(text: str, out: str):
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.write_text(text)
    except OSError as exc:
        raise SystemExit(f"twohop: cannot write {path}: {exc.strerror or exc}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ValueError, tomli.TOMLDecodeError) as exc:
        parser.error(str(exc))
    except OSError as exc:
        parser.error(f"cannot read config {args.config}: {exc.strerror or exc}")

    if args.command == "constants":
        try:
            text = cmd_constants(cfg.alphas)
        except ValueError as exc:
            parser.error(str(exc))
        _emit(text, cfg.out)
        return 0
    if args.dump_config:
        sys.stdout.write(cfg.dumps())
        return 0
    if args.workers < 1:
        parser.error("--workers must be >= 1")
    run = {"sweep": cmd_sweep, "gain": cmd_gain, "throughput": cmd_throughput}[args.command]
    _emit(run(cfg, workers=args.workers), cfg.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
