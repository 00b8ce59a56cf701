"""Command-line front end.

Subcommands: condition, ens-cgp, equivalence, collapse, kl-sample, enkf.
Inputs are plain-text matrix files (see matio); reports are emitted either
human-readable (``text``) or line-oriented ``key = value`` (``structured``),
with every number printed to 17 significant digits so identical configs
produce byte-identical output. Exit codes: 0 success, 1 computation error,
2 input error. All inputs are loaded and validated before any computation,
and output files are only written after the computation succeeds.

The environment variable ENSCGP_RANK_TOL supplies a default relative rank
tolerance; ``--rank-tol`` overrides it per run.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ensemble as ens_mod
from . import experiments, kernels, matio
from .errors import (DegenerateModelError, DimensionError, InfeasiblePointError,
                     MatrixParseError, NotPsdError, NotSpdError)
from .gaussian import GaussianLaw, ObservationModel, condition
from .matio import format_float

COMMANDS = ("condition", "ens-cgp", "equivalence", "collapse", "kl-sample", "enkf")

_INPUT_ERRORS = (OSError, MatrixParseError, DimensionError, NotSpdError,
                 NotPsdError, ValueError)
_COMPUTE_ERRORS = (NotPsdError, NotSpdError, DegenerateModelError,
                   InfeasiblePointError, DimensionError, ValueError,
                   np.linalg.LinAlgError)


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs; file contents are read in run()."""

    command: str
    inputs: tuple[str, ...] = ()
    rank_tol: float | None = None
    seed: int = 0
    out: str | None = None
    fmt: str = "text"
    k_max: int = 100
    members: int = 10
    count: int = 100
    family: str | None = None
    variance: float = 1.0
    lengthscale: float = 1.0
    modes: int | None = None
    energy: float | None = None
    perturb: bool = True
    center: bool = False
    save_members: str | None = None


def _fmt_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if isinstance(value, str):
        return value
    arr = np.asarray(value)
    if arr.ndim == 1:
        return "[" + " ".join(_fmt_value(v) for v in arr) + "]"
    if arr.ndim == 2:
        return "[" + "".join(
            "[" + " ".join(_fmt_value(v) for v in row) + "]" for row in arr
        ) + "]"
    raise ValueError(f"cannot format value of shape {arr.shape}")


def _render(pairs: list[tuple[str, object]], fmt: str) -> str:
    if fmt == "structured":
        return "\n".join(f"{k} = {_fmt_value(v)}" for k, v in pairs) + "\n"
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k.ljust(width)} : {_fmt_value(v)}" for k, v in pairs) + "\n"


def _load_observation(h_path, r_path, state_dim: int | None):
    h = matio.read_matrix(h_path)
    r = matio.read_matrix(r_path)
    obs = ObservationModel(h, r)
    if state_dim is not None and obs.state_dim != state_dim:
        raise DimensionError(
            f"{h_path}: H has {obs.state_dim} columns, state dimension is {state_dim}"
        )
    return obs


def _load_data(y_path, obs: ObservationModel):
    y = matio.read_vector(y_path)
    if y.shape[0] != obs.n_obs:
        raise DimensionError(
            f"{y_path}: data has length {y.shape[0]}, expected {obs.n_obs}"
        )
    return y


def _law_report(prefix: str, law: GaussianLaw) -> list[tuple[str, object]]:
    return [
        (f"{prefix}_mean", law.mean),
        (f"{prefix}_rank", law.rank),
        (f"{prefix}_cov_eigenvalues", law.cov_factor.eigenvalues),
        (f"{prefix}_cov_factor", law.cov_factor.factor),
    ]


def _run_condition(config: RunConfig):
    mean_p, cov_p, h_p, r_p, y_p = config.inputs
    mean = matio.read_vector(mean_p)
    cov = matio.read_matrix(cov_p)
    prior = GaussianLaw.from_moments(mean, cov, config.rank_tol)
    obs = _load_observation(h_p, r_p, prior.dim)
    y = _load_data(y_p, obs)

    def compute():
        posterior = condition(prior, obs, y, config.rank_tol)
        pairs = [("command", "condition"), ("seed", config.seed),
                 ("rank_tol", _tol_value(config)), ("n", prior.dim),
                 ("m", obs.n_obs), ("prior_rank", prior.rank)]
        pairs += _law_report("posterior", posterior)
        return pairs, {}

    return compute


def _run_ens_cgp(config: RunConfig):
    members_p, h_p, r_p, y_p = config.inputs
    members = ens_mod.Ensemble(matio.read_matrix(members_p))
    obs = _load_observation(h_p, r_p, members.dim)
    y = _load_data(y_p, obs)

    def compute():
        stats = ens_mod.ensemble_stats(members, config.rank_tol)
        posterior = ens_mod.ens_cgp(members, obs, y, config.rank_tol)
        pairs = [("command", "ens-cgp"), ("seed", config.seed),
                 ("rank_tol", _tol_value(config)), ("n", members.dim),
                 ("m", obs.n_obs), ("ensemble_size", members.size),
                 ("prior_mean", stats.mean),
                 ("prior_rank", stats.covariance_factor.rank)]
        pairs += _law_report("posterior", posterior)
        return pairs, {}

    return compute


def _run_equivalence(config: RunConfig):
    def compute():
        reports = experiments.equivalence_corpus(config.count, config.seed)
        passes = sum(r.passed for r in reports)
        pairs = [("command", "equivalence"), ("seed", config.seed),
                 ("count", config.count),
                 ("mean_tol", experiments.MEAN_TOL),
                 ("cov_tol", experiments.COV_TOL),
                 ("mean_pairs", " ".join(f"{a}:{b}" for a, b in experiments.MEAN_PAIRS)),
                 ("passes", passes),
                 ("summary", f"{passes}/{len(reports)} pass")]
        for i, rep in enumerate(reports):
            tag = f"instance_{i:03d}"
            pairs.append((f"{tag}_descriptor",
                          np.array([rep.seed, rep.n, rep.m, rep.rank])))
            pairs.append((f"{tag}_mean_discrepancies",
                          np.array([rep.mean_discrepancies[p]
                                    for p in experiments.MEAN_PAIRS])))
            pairs.append((f"{tag}_cov_discrepancy", rep.cov_discrepancy))
            pairs.append((f"{tag}_pass", rep.passed))
        return pairs, {}

    return compute


def _run_collapse(config: RunConfig):
    mean_p, cov_p, h_p, r_p, y_p = config.inputs
    mean = matio.read_vector(mean_p)
    cov = matio.read_matrix(cov_p)
    prior = GaussianLaw.from_moments(mean, cov, config.rank_tol)
    obs = _load_observation(h_p, r_p, prior.dim)
    y = _load_data(y_p, obs)

    def compute():
        trace = experiments.repeated_reuse(prior, obs, y, config.k_max)
        pairs = [("command", "collapse"), ("seed", config.seed),
                 ("label", trace.label), ("n", prior.dim), ("m", obs.n_obs),
                 ("k_max", config.k_max),
                 ("recursive_max_discrepancy", trace.recursive_max_discrepancy),
                 ("final_mean", trace.means[-1]),
                 ("final_cov", trace.covariances[-1]),
                 ("final_spectral_norm", trace.spectral_norms[-1])]
        trace_lines = ["# k  cov_spectral_norm  mean_shift_norm"]
        shifts = np.linalg.norm(trace.means - trace.means[0], axis=1)
        for k in trace.ks:
            trace_lines.append(
                f"{k} {format_float(trace.spectral_norms[k])} {format_float(shifts[k])}"
            )
        return pairs, {"trace": "\n".join(trace_lines) + "\n"}

    return compute


def _run_kl_sample(config: RunConfig):
    (points_p,) = config.inputs
    points = matio.read_matrix(points_p)
    if config.family is None:
        raise ValueError("kl-sample requires --family")
    spec = kernels.KernelSpec(config.family, config.variance, config.lengthscale)
    if config.modes is not None and config.energy is not None:
        raise ValueError("give at most one of --modes and --energy")

    def compute():
        gram = kernels.gram_matrix(spec, points)
        if config.modes is not None:
            keep = config.modes
        elif config.energy is not None:
            keep = float(config.energy)
        else:
            keep = 1.0
        modes = kernels.kl_truncate(gram, keep, rank_tol=config.rank_tol)
        samples = kernels.sample_kl(modes, config.members, config.seed)
        comments = (
            f"kl-sample family={spec.family.value} variance={format_float(spec.variance)}"
            f" lengthscale={format_float(spec.lengthscale)}",
            f"seed={config.seed} members={config.members} n_modes={modes.n_modes}"
            f" residual={format_float(modes.residual)}",
        )
        return None, {"matrix": (samples, comments)}

    return compute


def _run_enkf(config: RunConfig):
    members_p, h_p, r_p, y_p = config.inputs
    members = ens_mod.Ensemble(matio.read_matrix(members_p))
    obs = _load_observation(h_p, r_p, members.dim)
    y = _load_data(y_p, obs)

    def compute():
        stats = ens_mod.ensemble_stats(members, config.rank_tol)
        exact = ens_mod.enkf_mean_update(stats, obs, y, rank_tol=config.rank_tol)
        updated = ens_mod.enkf_perturbed_obs(
            members, obs, y, config.seed, perturb=config.perturb,
            center_perturbations=config.center, rank_tol=config.rank_tol)
        sample_mean = updated.members.mean(axis=1)
        pairs = [("command", "enkf"), ("seed", config.seed),
                 ("rank_tol", _tol_value(config)), ("n", members.dim),
                 ("m", obs.n_obs), ("ensemble_size", members.size),
                 ("perturbations", config.perturb),
                 ("centered_perturbations", config.center),
                 ("prior_mean", stats.mean),
                 ("prior_rank", stats.covariance_factor.rank),
                 ("exact_mean_update", exact),
                 ("updated_sample_mean", sample_mean),
                 ("sample_mean_discrepancy",
                  experiments.rel_vec_diff(sample_mean, exact))]
        extra = {}
        prior_dev = np.linalg.norm(members.members - stats.mean[:, None], axis=0)
        post_dev = np.linalg.norm(updated.members - sample_mean[:, None], axis=0)
        trace_lines = ["# member  prior_deviation  posterior_deviation"]
        for e in range(members.size):
            trace_lines.append(
                f"{e} {format_float(prior_dev[e])} {format_float(post_dev[e])}"
            )
        extra["trace"] = "\n".join(trace_lines) + "\n"
        if config.save_members:
            extra["save_members"] = (
                updated.members,
                (f"ensemble members={updated.size}",
                 f"enkf seed={config.seed} perturb={str(config.perturb).lower()}"),
            )
        return pairs, extra

    return compute


def _tol_value(config: RunConfig):
    return "default" if config.rank_tol is None else config.rank_tol


_RUNNERS = {"condition": _run_condition, "ens-cgp": _run_ens_cgp,
            "equivalence": _run_equivalence, "collapse": _run_collapse,
            "kl-sample": _run_kl_sample, "enkf": _run_enkf}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        compute = _RUNNERS[config.command](config)
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2

    try:
        pairs, extra = compute()
    except _COMPUTE_ERRORS as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 1

    if "matrix" in extra:  # kl-sample: the output is itself a matrix file
        samples, comments = extra["matrix"]
        text = matio.dumps_matrix(samples, comments)
        if config.out:
            Path(config.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    report = _render(pairs, config.fmt)
    if config.out:
        Path(config.out).write_text(report)
        if "trace" in extra:
            Path(str(config.out) + ".trace").write_text(extra["trace"])
    else:
        sys.stdout.write(report)
    if "save_members" in extra:
        members, comments = extra["save_members"]
        matio.write_matrix(config.save_members, members, comments)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enscgp",
        description="Exact Gaussian conditioning, its quadratic-program and "
                    "RKHS equivalents, and ensemble analysis updates.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--rank-tol", type=float, default=None,
                       help="relative eigenvalue cutoff for numerical rank "
                            "(default: dimension * machine epsilon, or "
                            "ENSCGP_RANK_TOL if set)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="report file (default: stdout)")
        p.add_argument("--format", choices=("text", "structured"), default="text")

    p = sub.add_parser("condition", help="condition a Gaussian prior on linear data")
    p.add_argument("inputs", nargs=5, metavar="FILE",
                   help="MEAN COV H R Y matrix files")
    common(p)

    p = sub.add_parser("ens-cgp", help="condition an ensemble-defined prior")
    p.add_argument("inputs", nargs=4, help="MEMBERS H R Y matrix files")
    common(p)

    p = sub.add_parser("equivalence", help="four-route agreement audit on a seeded corpus")
    p.add_argument("--count", type=int, default=100)
    common(p)

    p = sub.add_parser("collapse", help="posterior collapse under k-fold data reuse")
    p.add_argument("inputs", nargs=5, help="MEAN COV H R Y matrix files")
    p.add_argument("--k-max", type=int, default=100)
    common(p)

    p = sub.add_parser("kl-sample", help="sample through truncated covariance eigenmodes")
    p.add_argument("inputs", nargs=1, help="POINTS matrix file (one point per row)")
    p.add_argument("--family", choices=[f.value for f in kernels.KernelFamily],
                   required=True)
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--lengthscale", type=float, default=1.0)
    p.add_argument("--modes", type=int, default=None, help="number of eigenmodes to keep")
    p.add_argument("--energy", type=float, default=None,
                   help="energy fraction of the trace to keep (0, 1]")
    p.add_argument("--members", type=int, default=10, help="number of samples")
    common(p)

    p = sub.add_parser("enkf", help="perturbed-observation ensemble analysis update")
    p.add_argument("inputs", nargs=4, help="MEMBERS H R Y matrix files")
    p.add_argument("--disable-perturbations", action="store_true",
                   help="eta = 0 variant (deterministic limit)")
    p.add_argument("--center-perturbations", action="store_true",
                   help="subtract the perturbation sample mean")
    p.add_argument("--save-members", default=None,
                   help="write the updated ensemble to this matrix file")
    common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    rank_tol = args.rank_tol
    if rank_tol is None:
        env = os.environ.get("ENSCGP_RANK_TOL")
        if env is not None:
            rank_tol = float(env)
    return RunConfig(
        command=args.command,
        inputs=tuple(getattr(args, "inputs", ())),
        rank_tol=rank_tol,
        seed=args.seed,
        out=args.out,
        fmt=args.format,
        k_max=getattr(args, "k_max", 100),
        members=getattr(args, "members", 10),
        count=getattr(args, "count", 100),
        family=getattr(args, "family", None),
        variance=getattr(args, "variance", 1.0),
        lengthscale=getattr(args, "lengthscale", 1.0),
        modes=getattr(args, "modes", None),
        energy=getattr(args, "energy", None),
        perturb=not getattr(args, "disable_perturbations", False),
        center=getattr(args, "center_perturbations", False),
        save_members=getattr(args, "save_members", None),
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
