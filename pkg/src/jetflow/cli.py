"""``jetflow`` command line: JSON specs in; JSON, CSV and SVG out.

Every failure exits with status 2 and writes ``{"error": code, "message": ...}``
to standard error, where ``code`` is one of :data:`jetflow.errors.ERROR_CODES`.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION, __version__
from .analysis import Kind, Verdict, certify_not_periodic, classify, random_pair
from .dynamics import DEFAULT_TOL, Trajectory, read_csv, synthesize
from .errors import CriticalEndpoint, InvalidSpec, JetflowError, MalformedTrajectory, OutsideHillInterval
from .periods import DEFAULT_N, HillInterval, delta_theta, hill_intervals
from .polyvec import PolyVec

EXIT_ERROR = 2


@dataclass
class RunSpec:
    F: PolyVec
    interval: HillInterval
    x_init: float
    px_sign: float = 1.0
    duration: float | None = None
    periods: float | None = None
    tol: float = DEFAULT_TOL
    quadrature_N: int = DEFAULT_N
    step: float | None = None
    theta0: np.ndarray | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "RunSpec":
        if not isinstance(data, dict) or "F" not in data:
            raise InvalidSpec("spec must be a JSON object with an 'F' entry")
        F = PolyVec.from_dict(data["F"])
        intervals = hill_intervals(F)
        choice = data.get("interval", 0)
        if isinstance(choice, int) and not isinstance(choice, bool):
            if not 0 <= choice < len(intervals):
                raise InvalidSpec(f"interval index {choice} out of range (F has {len(intervals)})")
            interval = intervals[choice]
        elif isinstance(choice, (list, tuple)) and len(choice) == 2:
            interval = _match_interval(intervals, float(choice[0]), float(choice[1]))
        else:
            raise InvalidSpec("'interval' must be an index or a pair [x0, x1]")
        x_init = data.get("x_init")
        if x_init is None:
            x_init = interval.midpoint if interval.bounded else 0.0
        x_init = float(x_init)
        if not interval.contains(x_init, 1e-9):
            raise OutsideHillInterval(f"x_init = {x_init} is outside [{interval.x0}, {interval.x1}]")
        sign = float(data.get("px_sign", 1))
        if sign not in (1.0, -1.0):
            raise InvalidSpec("px_sign must be +1 or -1")
        tol = float(data.get("tol", DEFAULT_TOL))
        N = int(data.get("quadrature_N", DEFAULT_N))
        if not tol > 0:
            raise InvalidSpec("tol must be positive")
        if N < 8:
            raise InvalidSpec("quadrature_N must be at least 8")
        theta0 = data.get("theta0")
        if theta0 is not None:
            theta0 = np.array(theta0, dtype=float).T
            if theta0.shape != (F.k + 1, F.n):
                raise InvalidSpec("theta0 must be n rows of k+1 numbers")
        step = data.get("step")
        return cls(F, interval, x_init, sign, _opt_float(data.get("duration")),
                   _opt_float(data.get("periods")), tol, N,
                   None if step is None else float(step), theta0)

    def total_time(self) -> float:
        if self.periods is not None:
            cls = classify(self.F, self.interval, self.x_init, self.quadrature_N)
            if cls.kind is Kind.X_PERIODIC:
                return self.periods * cls.L
            if cls.kind is Kind.LINE:
                raise InvalidSpec("a line geodesic has no x-period; give 'duration' instead")
            raise CriticalEndpoint("a critical pair has an infinite x-period; give 'duration' instead")
        if self.duration is None or not self.duration > 0:
            raise InvalidSpec("give a positive 'duration' or a number of 'periods'")
        return self.duration


def _opt_float(v):
    return None if v is None else float(v)


def _match_interval(intervals: list[HillInterval], x0: float, x1: float, tol: float = 1e-8) -> HillInterval:
    for I in intervals:
        if I.bounded and abs(I.x0 - x0) <= tol and abs(I.x1 - x1) <= tol:
            return I
    raise InvalidSpec(f"[{x0}, {x1}] is not a Hill interval of F")


def load_spec(path: str) -> RunSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"spec is not valid JSON: {exc}") from exc
    return RunSpec.from_dict(data)


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- commands -----------------------------------------------------------------

def cmd_geodesic(args) -> dict:
    spec = load_spec(args.spec)
    if args.periods is not None:
        spec.periods, spec.duration = args.periods, None
    if args.duration is not None:
        spec.duration, spec.periods = args.duration, None
    step = args.step if args.step is not None else spec.step
    T = spec.total_time()
    cls = classify(spec.F, spec.interval, spec.x_init, spec.quadrature_N)
    traj = synthesize(spec.F, spec.x_init, spec.px_sign, T, spec.theta0, spec.tol, step, spec.interval)
    if args.out:
        text = dumps(traj.to_dict()) if str(args.out).endswith(".json") else traj.to_csv()
        write_atomic(args.out, text)
    diag = traj.diagnostics()
    diag.update({"classification": cls.to_dict(), "duration": T, "interval": spec.interval.to_dict()})
    return diag


def cmd_periods(args) -> dict:
    spec = load_spec(args.spec)
    return delta_theta(spec.F, spec.interval, args.N or spec.quadrature_N).to_dict()


def cmd_classify(args) -> dict:
    spec = load_spec(args.spec)
    out = classify(spec.F, spec.interval, spec.x_init, args.N or spec.quadrature_N).to_dict()
    out["interval"] = spec.interval.to_dict()
    return out


def cmd_certify(args) -> dict:
    spec = load_spec(args.spec)
    return certify_not_periodic(spec.F, spec.interval, args.N or spec.quadrature_N).to_dict()


def _sweep_case(job):
    seed_seq, kmax, nmax, N = job
    rng = np.random.default_rng(seed_seq)
    F, I = random_pair(rng, kmax, nmax)
    return certify_not_periodic(F, I, N).to_dict()


def run_sweep(count: int, seed: int, kmax: int, nmax: int, N: int = DEFAULT_N,
              workers: int | None = None) -> tuple[dict, list[dict]]:
    if count < 1:
        raise InvalidSpec("count must be at least 1")
    jobs = [(s, kmax, nmax, N) for s in np.random.SeedSequence(seed).spawn(count)]
    if workers is None:
        workers = int(os.environ.get("JETFLOW_THREADS", os.cpu_count() or 1))
    workers = max(1, min(workers, count))
    if workers == 1:
        certs = [_sweep_case(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            certs = list(pool.map(_sweep_case, jobs, chunksize=max(1, count // (4 * workers))))
    summary = {
        "count": count, "seed": seed, "kmax": kmax, "nmax": nmax, "N": N,
        "inconclusive": sum(c["verdict"] != Verdict.NOT_PERIODIC.value for c in certs),
        "min_delta_inf_norm": min(c["delta_inf_norm"] for c in certs),
        "max_reconstruction_error": max(c["reconstruction_error"] for c in certs),
        "min_gram_lambda_min": min(c["gram_lambda_min"] for c in certs),
    }
    return summary, certs


def cmd_sweep(args) -> dict:
    summary, certs = run_sweep(args.count, args.seed, args.kmax, args.nmax, args.N or DEFAULT_N)
    if args.archive:
        write_atomic(args.archive, "".join(json.dumps(c, sort_keys=True) + "\n" for c in certs))
    return summary


def load_trajectory(path: str) -> Trajectory:
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise MalformedTrajectory("trajectory file is not text") from exc
    if path.endswith(".json"):
        try:
            return Trajectory.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise MalformedTrajectory(f"bad trajectory JSON: {exc}") from exc
    return read_csv(text)


def render_svg(xs, ys, xlabel: str, ylabel: str, width: int = 640, height: int = 480) -> str:
    """Static SVG of one polyline with a framed plot area and axis labels."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    pad = 60
    def span(v):
        lo, hi = float(np.min(v)), float(np.max(v))
        return (lo - 0.5, hi + 0.5) if hi - lo < 1e-12 else (lo, hi)
    (x0, x1), (y0, y1) = span(xs), span(ys)
    px = pad + (xs - x0) / (x1 - x0) * (width - 2 * pad)
    py = height - pad - (ys - y0) / (y1 - y0) * (height - 2 * pad)
    points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
        'fill="none" stroke="#888"/>\n'
        f'<polyline fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{points}"/>\n'
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle" font-size="14">{xlabel}</text>\n'
        f'<text x="15" y="{height / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 15 {height / 2})">{ylabel}</text>\n'
        f'<text x="{pad}" y="{height - pad + 16}" font-size="11">{x0:.4g}</text>\n'
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" font-size="11">{x1:.4g}</text>\n'
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" font-size="11">{y0:.4g}</text>\n'
        f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end" font-size="11">{y1:.4g}</text>\n'
        "</svg>\n"
    )


def cmd_plot(args) -> dict:
    traj = load_trajectory(args.trajectory)
    j = args.component
    if not 1 <= j <= traj.n:
        raise InvalidSpec(f"component must be in 1..{traj.n}")
    out = args.out or str(Path(args.trajectory).with_suffix(".svg"))
    write_atomic(out, render_svg(traj.x, traj.theta[:, 0, j - 1], "x", f"theta_0^{j}"))
    return {"svg": out, "samples": len(traj)}


class _Parser(argparse.ArgumentParser):
    """Argument errors go through the same JSON channel as every other failure."""

    def error(self, message):
        sys.exit(fail("usage_error", f"{self.prog}: {message}"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jetflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"jetflow {__version__} (schema {SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("geodesic", help="integrate and lift a geodesic")
    p.add_argument("--spec", required=True)
    p.add_argument("--periods", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--step", type=float, help="uniform output spacing (default: accepted steps)")
    p.add_argument("--out", help="trajectory file (.csv or .json)")
    p.set_defaults(func=cmd_geodesic)

    for name, func, text in (("periods", cmd_periods, "x-period and holonomy"),
                             ("classify", cmd_classify, "classify the geodesic"),
                             ("certify", cmd_certify, "non-periodicity certificate")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--spec", required=True)
        p.add_argument("--N", type=int, help="quadrature nodes (overrides the spec)")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="certificates for seeded random pairs")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=4)
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--N", type=int)
    p.add_argument("--archive", default="certificates.jsonl")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="SVG of the (x, theta_0^j) projection")
    p.add_argument("trajectory")
    p.add_argument("--component", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def fail(code: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except JetflowError as exc:
        return fail(exc.code, str(exc))
    except OSError as exc:
        return fail("io_error", str(exc))
    sys.stdout.write(dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
