"""Command-line front end.

Input files
-----------
``*.json`` with keys ``a, b, c, d``
    State-space factor ``W``; the spectrum is ``W W*``.  For ``norm`` it is
    the system itself.
``*.json`` with keys ``num, den``
    Scalar spectrum as symmetric Laurent coefficients ``c_{-d} .. c_d``.
    For ``norm`` the pair is read instead as a transfer function in
    descending powers of ``z``, e.g. ``{"num": [1, 0.3333], "den": [1, -0.5]}``.
``*.csv``
    Sampled spectrum on the uniform grid ``theta_k = -pi + 2 pi k / N``:
    column ``theta`` then ``value`` (scalar) or ``re_i_j, im_i_j`` for every
    entry of a matrix spectrum.

Exit status: 0 success, 2 infinite distance, 3 invalid input, 4 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, SpecGeoError
from .factorization import FactoredSpectrum, is_minimum_phase, minimum_phase_factor
from .geodesics import GeodesicSpec, finsler_geodesic, hilbert_geodesic, riemannian_geodesic
from .metrics import (
    frobenius_divergence,
    hilbert_distance,
    riemannian_distance,
    thompson_distance,
)
from .norms import HINF_TOL, h2_norm_sq, hinf_norm, linf_norm_grid
from .rational import (
    DEFAULT_GRID,
    FrequencyGrid,
    SampledSpectrum,
    ScalarRationalSpectrum,
    StateSpace,
)

EXIT_OK, EXIT_INFINITE, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3, 4

__all__ = ["main", "build_parser", "load_spectrum", "load_system", "write_sampled_csv"]


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input; exit 2 is reserved for infinite distances
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- loaders

def _read_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path}: expected a JSON object")
    return data


def _statespace_from_dict(d: dict) -> StateSpace:
    def mat(key):
        v = d[key]
        return np.array(v, dtype=float) if v != [] else np.zeros((0, 0))
    A, B, C, D = (mat(k) for k in "abcd")
    D = np.atleast_2d(D)
    p, m = D.shape
    n = A.shape[0] if A.size else 0
    return StateSpace(A.reshape(n, n), B.reshape(n, m), C.reshape(p, n), D)


def read_sampled_csv(path) -> SampledSpectrum:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if len(rows) < 2 or rows[0][0].strip() != "theta":
        raise InvalidInputError(f"{path}: expected a header starting with 'theta'")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    if data.shape[1] != len(header):
        raise InvalidInputError(f"{path}: row width does not match header")
    grid = FrequencyGrid(data.shape[0])
    if np.max(np.abs(data[:, 0] - grid.theta)) > 1e-9:
        raise InvalidInputError(f"{path}: theta column is not the uniform grid -pi + 2 pi k/N")
    if header[1:] == ["value"]:
        return SampledSpectrum(grid, data[:, 1])
    n = int(round(math.sqrt((len(header) - 1) / 2)))
    expected = [f"{part}_{i + 1}_{j + 1}" for i in range(n) for j in range(n) for part in ("re", "im")]
    if header[1:] != expected:
        raise InvalidInputError(f"{path}: matrix columns must be {expected}")
    vals = data[:, 1::2] + 1j * data[:, 2::2]
    return SampledSpectrum(grid, vals.reshape(-1, n, n))


def load_spectrum(path):
    """Spectrum from a JSON factor, a JSON Laurent pair, or a sampled CSV."""
    if str(path).lower().endswith(".csv"):
        return read_sampled_csv(path)
    d = _read_json(path)
    try:
        if all(k in d for k in "abcd"):
            return _statespace_from_dict(d)
        if "num" in d and "den" in d:
            return ScalarRationalSpectrum(d["num"], d["den"])
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    raise InvalidInputError(f"{path}: expected keys a,b,c,d or num,den")


def load_system(path) -> StateSpace:
    """System for the norm commands: state space or a descending-power transfer function."""
    d = _read_json(path)
    try:
        if all(k in d for k in "abcd"):
            return _statespace_from_dict(d)
        if "num" in d and "den" in d:
            num = np.atleast_1d(np.array(d["num"], dtype=float))
            den = np.atleast_1d(np.array(d["den"], dtype=float))
            if num.size > den.size:
                raise InvalidInputError(f"{path}: transfer function is not proper")
            # descending powers of z, equal length == ascending powers of z^{-1}
            num = np.concatenate([np.zeros(den.size - num.size), num])
            return StateSpace.from_tf(num, den)
    except (ValueError, TypeError) as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc
    raise InvalidInputError(f"{path}: expected keys a,b,c,d or num,den")


# ---------------------------------------------------------------- writers

def _sampled_columns(S: SampledSpectrum) -> tuple[list[str], np.ndarray]:
    if S.n == 1:
        return ["value"], S.values[:, 0, 0].real[:, None]
    n = S.n
    names = [f"{part}_{i + 1}_{j + 1}" for i in range(n) for j in range(n) for part in ("re", "im")]
    flat = S.values.reshape(S.grid.N, n * n)
    cols = np.empty((S.grid.N, 2 * n * n))
    cols[:, 0::2], cols[:, 1::2] = flat.real, flat.imag
    return names, cols


def write_sampled_csv(fh, items: list[tuple[float | None, SampledSpectrum]]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    with_tau = items[0][0] is not None
    names, _ = _sampled_columns(items[0][1])
    writer.writerow((["tau"] if with_tau else []) + ["theta"] + names)
    for tau, S in items:
        _, cols = _sampled_columns(S)
        for th, row in zip(S.grid.theta, cols):
            lead = [repr(float(tau))] if with_tau else []
            writer.writerow(lead + [repr(float(th))] + [repr(float(v)) for v in row])


def _factor_dict(F: FactoredSpectrum) -> dict:
    out = F.W.to_dict()
    if F.scalar is not None:
        out["tf"] = {"num": F.scalar.num.tolist(), "den": F.scalar.den.tolist()}
    return out


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# ---------------------------------------------------------------- commands

def run_distance(args) -> int:
    x1, x2 = load_spectrum(args.first), load_spectrum(args.second)
    grid = FrequencyGrid(args.grid)
    sampled = isinstance(x1, SampledSpectrum) or isinstance(x2, SampledSpectrum)
    path = "grid" if sampled else args.path
    if sampled:
        grid = next(x.grid for x in (x1, x2) if isinstance(x, SampledSpectrum))
    if args.metric in ("thompson", "hilbert"):
        fn = thompson_distance if args.metric == "thompson" else hilbert_distance
        res = fn(x1, x2, path, grid, args.tol)
        _emit(_json(res.to_dict()), args.out)
        return EXIT_INFINITE if res.infinite else EXIT_OK
    if args.metric == "riemannian":
        value = riemannian_distance(x1, x2, grid)
    else:
        value = frobenius_divergence(x1, x2, path, grid)
    _emit(_json({"value": value, "metric": args.metric}), args.out)
    return EXIT_OK


def run_factorize(args) -> int:
    x = load_spectrum(args.spectrum)
    if isinstance(x, SampledSpectrum):
        raise InvalidInputError("factorization needs a rational spectrum")
    F = minimum_phase_factor(x)
    out = _factor_dict(F)
    out["minimum_phase"] = bool(is_minimum_phase(F.W))
    _emit(_json(out), args.out)
    return EXIT_OK


def run_norm(args) -> int:
    G = load_system(args.system)
    if args.kind == "hinf":
        out = hinf_norm(G, args.tol).to_dict()
    elif args.kind == "linf-grid":
        out = linf_norm_grid(G, FrequencyGrid(args.grid)).to_dict()
    else:
        sq = h2_norm_sq(G)
        out = {"value": math.sqrt(sq), "value_squared": sq, "method": "stein"}
    _emit(_json(out), args.out)
    return EXIT_OK


def _parse_taus(text: str) -> list[float]:
    try:
        taus = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidInputError(f"bad tau list {text!r}") from exc
    if not taus or not all(math.isfinite(t) for t in taus):
        raise InvalidInputError("tau values must be finite")
    return taus


def run_geodesic(args) -> int:
    taus = _parse_taus(args.tau)
    x1, x2 = load_spectrum(args.first), load_spectrum(args.second)
    grid = FrequencyGrid(args.grid)
    for x in (x1, x2):
        if isinstance(x, SampledSpectrum):
            grid = x.grid
    points = []
    if args.kind == "finsler":
        path = "grid" if any(isinstance(x, SampledSpectrum) for x in (x1, x2)) else "rational"
        spec = GeodesicSpec.from_spectra(x1, x2, path, grid)
        points = [(t, finsler_geodesic(spec, t, grid)) for t in taus]
    elif args.kind == "riemannian":
        points = [(t, riemannian_geodesic(x1, x2, t, grid)) for t in taus]
    else:
        points = [(t, hilbert_geodesic(x1, x2, t, grid)) for t in taus]

    if args.out_format == "csv":
        sampled = [(t, p if isinstance(p, SampledSpectrum) else p.sample(grid)) for t, p in points]
        buf = io.StringIO()
        write_sampled_csv(buf, sampled)
        _emit(buf.getvalue(), args.out)
        return EXIT_OK
    items = []
    for t, p in points:
        if isinstance(p, FactoredSpectrum):
            items.append({"tau": t, "factor": _factor_dict(p)})
        else:
            names, cols = _sampled_columns(p)
            items.append({"tau": t, "theta": p.grid.theta.tolist(),
                          "columns": names, "values": cols.tolist()})
    _emit(_json({"kind": args.kind, "points": items}), args.out)
    return EXIT_OK


def run_morph(args) -> int:
    from .speech import MorphConfig, morph, read_config, read_wav, write_wav

    overrides = {
        "tau": args.tau, "pitch_mode": args.pitch_mode, "order": args.order,
        "frame_ms": args.frame_ms, "hop_ms": args.hop_ms, "grid": args.grid,
        "seed": args.seed,
    }
    if args.config:
        config = read_config(args.config, **overrides)
    else:
        config = MorphConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})
    if not args.out:
        raise InvalidInputError("morph needs --out PATH for the WAV output")
    y = morph(read_wav(args.first), read_wav(args.second), config)
    write_wav(args.out, y)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=DEFAULT_GRID, help="frequency grid size N")
    common.add_argument("--tol", type=float, default=HINF_TOL, help="H-infinity bisection tolerance")
    common.add_argument("--seed", type=int, default=None, help="noise seed (morph)")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    parser = _Parser(prog="specgeo", description="Distances and geodesics between spectral densities.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("distance", parents=[common], help="distance between two spectra")
    p.add_argument("--metric", choices=["thompson", "hilbert", "riemannian", "frobenius"],
                   default="thompson")
    p.add_argument("--path", choices=["rational", "grid"], default="rational")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=run_distance)

    p = sub.add_parser("factorize", parents=[common], help="minimum-phase spectral factor")
    p.add_argument("spectrum")
    p.set_defaults(func=run_factorize)

    p = sub.add_parser("norm", parents=[common], help="system norm")
    p.add_argument("--kind", choices=["hinf", "h2", "linf-grid"], default="hinf")
    p.add_argument("system")
    p.set_defaults(func=run_norm)

    p = sub.add_parser("geodesic", parents=[common], help="points on a geodesic")
    p.add_argument("--kind", choices=["finsler", "riemannian", "hilbert"], default="finsler")
    p.add_argument("--tau", required=True, help="comma-separated parameters, e.g. 0,0.5,1")
    p.add_argument("--out-format", choices=["json", "csv"], default="json")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=run_geodesic)

    p = sub.add_parser("morph", parents=[common], help="morph two WAV recordings")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--pitch-mode", choices=["linear", "geometric"], default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--frame-ms", type=float, default=None)
    p.add_argument("--hop-ms", type=float, default=None)
    p.add_argument("--config", default=None, help="key = value settings file")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=run_morph)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already reported
        return int(exc.code or 0)
    if args.command == "morph" and args.grid == DEFAULT_GRID:
        args.grid = None
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"specgeo: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SpecGeoError as exc:
        print(f"specgeo: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
