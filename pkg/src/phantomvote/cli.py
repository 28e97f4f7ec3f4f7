"""Command-line front end: evaluate rules, audit axioms, estimate welfare, benchmark.

Four subcommands share one executable:

``evaluate``
    Apply a configured rule to a ballot file under a chosen representation,
    or run every representation and cross-check their outcomes.
``audit``
    Run the axiom test batteries against a configured rule or an external
    black-box command.
``welfare``
    Monte-Carlo ex-ante welfare comparison of configured rules, minimax
    phantom synthesis, or welfare-optimal curve synthesis for a prior.
``bench``
    Time the representation evaluators on random profiles and emit CSV.

All JSON output carries ``"schema": 1`` and is emitted with sorted keys so
that identical inputs, flags, and seeds produce byte-identical bytes; the
only nondeterministic fields are wall-clock timings, which ``--no-timings``
removes.  Exit codes: 0 success, 2 unparseable input, 3 infeasible request,
4 representation disagreement, 5 axiom audit failure, 6 non-invertible
welfare transform.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import shlex
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:
    import tomli as _toml

from .axioms import audit_fixed, audit_variable
from .domain import ABSTAIN, AlternativeDomain, ExtremeProfile, Profile, Weights
from .errors import (BallotFileError, BlackBoxRuleError, ConfigError,
                     DiscontinuousCurveError, DomainError, EmptyElectorateError,
                     InfeasibleSizeError, MalformedPhantomError,
                     NonInvertibleTransformError, ProfileError, QuadratureError,
                     TableLookupError)
from .phantoms import (ConstantPhantom, CurvePhantom, DictatorPhantom,
                       LinearCurve, OrderStatisticPhantom, PiecewiseCurve,
                       StepCurve, TablePhantom, TabulatedCurve,
                       UniformOptimalCurve, VariableElectorateRule)
from .representations import (EXPONENTIAL_REPRESENTATIONS, cross_check,
                              eval_curve, eval_issues, eval_maxmin, eval_median,
                              eval_phantom_direct, evaluate)
from .welfare import (OPTIMAL_CURVE_SCAN, Prior, minimax_optimal_phantoms,
                      monte_carlo_ex_ante, optimal_curve)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_DISAGREEMENT = 4
EXIT_AUDIT_FAILED = 5
EXIT_NON_INVERTIBLE = 6

BLACK_BOX_TIMEOUT = 10.0
BENCH_EXPONENTIAL_CAP = 16

REPRESENTATION_CHOICES = ("curve", "median", "direct", "maxmin", "issues", "all")

_CONFIG_KEYS = {"domain", "rule", "weights", "alpha_even",
                "empty_electorate_value", "at_threshold"}
_DOMAIN_KEYS = {"m", "M"}
_RULE_KEYS = {
    "curve": {"curve"},
    "constant": {"value"},
    "dictator": {"voter"},
    "order_statistic": {"k"},
    "table": {"entries"},
}
_CURVE_KEYS = {
    "linear": set(),
    "step": {"threshold", "low", "high", "at_threshold"},
    "piecewise": {"knots"},
    "uniform_optimal": {"q"},
    "numeric": {"shares", "values"},
}


# ---------------------------------------------------------------------------
# Rule configuration files
# ---------------------------------------------------------------------------


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{where} must be finite, got {value!r}")
    return v


def _integer(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return value


def _mapping(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _check_keys(data: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}")


class RuleConfig:
    """A validated rule configuration, kept lossless for re-serialization.

    ``build_phantom`` turns the tagged rule union into a phantom function;
    dictator rules naming a voter by id string need the ballot file's voter
    ids at build time, so they cannot be audited without ballots.
    """

    def __init__(self, raw: dict, source: str, base_dir: Path):
        self.raw = raw
        self.source = source
        _check_keys(_mapping(raw, "config"), _CONFIG_KEYS, "config")
        for key in ("domain", "rule"):
            if key not in raw:
                raise ConfigError(f"config is missing the required field {key!r}")

        dom = _mapping(raw["domain"], "domain")
        _check_keys(dom, _DOMAIN_KEYS, "domain")
        if set(dom) != _DOMAIN_KEYS:
            raise ConfigError("domain must give both bounds m and M")
        try:
            self.domain = AlternativeDomain(_real(dom["m"], "domain.m"),
                                            _real(dom["M"], "domain.M"))
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

        self.rule = _mapping(raw["rule"], "rule")
        kind = self.rule.get("kind")
        if kind not in _RULE_KEYS:
            raise ConfigError(
                f"rule.kind must be one of {sorted(_RULE_KEYS)}, got {kind!r}")
        self.kind = kind
        _check_keys(self.rule, _RULE_KEYS[kind] | {"kind"}, "rule")
        missing = sorted((_RULE_KEYS[kind]) - set(self.rule))
        if missing:
            raise ConfigError(f"rule of kind {kind!r} is missing: {', '.join(missing)}")

        if kind == "curve":
            cd = _mapping(self.rule["curve"], "rule.curve")
            ckind = cd.get("kind")
            if ckind not in _CURVE_KEYS:
                raise ConfigError(
                    f"curve.kind must be one of {sorted(_CURVE_KEYS)}, got {ckind!r}")
            self.curve_kind = ckind
            _check_keys(cd, _CURVE_KEYS[ckind] | {"kind"}, "rule.curve")
        else:
            self.curve_kind = None

        self.weights = self._parse_weights(raw.get("weights"), base_dir)
        self.alpha_even = self._optional_value(raw.get("alpha_even"), "alpha_even")
        self.empty_value = self._optional_value(
            raw.get("empty_electorate_value"), "empty_electorate_value")
        self.at_threshold = self._optional_value(
            raw.get("at_threshold"), "at_threshold")

        if self.at_threshold is not None:
            if self.curve_kind != "step":
                raise ConfigError("at_threshold applies only to step-curve rules")
            if "at_threshold" in self.rule["curve"]:
                raise ConfigError(
                    "at_threshold given both at top level and inside the curve")
        if self.empty_value is not None and self.kind != "curve":
            raise ConfigError(
                "empty_electorate_value applies only to curve rules")
        if self.weights is not None and self.kind != "curve":
            raise ConfigError("weights apply only to curve rules")

    def _optional_value(self, value, name: str) -> float | None:
        if value is None:
            return None
        v = _real(value, name)
        if not self.domain.contains(v):
            raise ConfigError(
                f"{name} {v} is outside the domain "
                f"[{self.domain.mu_minus}, {self.domain.mu_plus}]")
        return v

    def _parse_weights(self, spec, base_dir: Path) -> tuple | None:
        if spec is None:
            return None
        if isinstance(spec, str):
            path = Path(spec)
            if not path.is_absolute():
                path = base_dir / path
            try:
                lines = path.read_text(encoding="utf-8").split()
            except OSError as exc:
                raise ConfigError(f"cannot read weights file {spec!r}: {exc}") from exc
            spec = lines
        if not isinstance(spec, (list, tuple)) or not spec:
            raise ConfigError("weights must be a non-empty list or a file path")
        out = []
        for i, w in enumerate(spec):
            if isinstance(w, str):
                try:
                    w = float(w)
                except ValueError:
                    raise ConfigError(f"weight {i} is not a decimal: {w!r}") from None
            out.append(_real(w, f"weight {i}"))
        return tuple(out)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(self.raw))

    def build_curve(self):
        cd = self.rule["curve"]
        kind = self.curve_kind
        try:
            if kind == "linear":
                return LinearCurve(self.domain)
            if kind == "step":
                at = cd.get("at_threshold", self.at_threshold)
                return StepCurve(self.domain,
                                 _real(cd["threshold"], "curve.threshold"),
                                 _real(cd["low"], "curve.low"),
                                 _real(cd["high"], "curve.high"),
                                 at_threshold=None if at is None
                                 else _real(at, "at_threshold"))
            if kind == "piecewise":
                knots = cd["knots"]
                if not isinstance(knots, (list, tuple)):
                    raise ConfigError("curve.knots must be a list of [share, value] pairs")
                pairs = []
                for i, knot in enumerate(knots):
                    if not isinstance(knot, (list, tuple)) or len(knot) != 2:
                        raise ConfigError(
                            f"curve.knots[{i}] must be a [share, value] pair")
                    pairs.append((_real(knot[0], f"curve.knots[{i}] share"),
                                  _real(knot[1], f"curve.knots[{i}] value")))
                return PiecewiseCurve(self.domain, pairs)
            if kind == "uniform_optimal":
                return UniformOptimalCurve(self.domain, _real(cd["q"], "curve.q"))
            shares = cd["shares"]
            values = cd["values"]
            for name, seq in (("shares", shares), ("values", values)):
                if not isinstance(seq, (list, tuple)):
                    raise ConfigError(f"curve.{name} must be a list of numbers")
            return TabulatedCurve(
                self.domain,
                [_real(s, "curve.shares entry") for s in shares],
                [_real(v, "curve.values entry") for v in values])
        except DomainError as exc:
            raise ConfigError(f"invalid {kind} curve: {exc}") from exc

    def build_phantom(self, voter_ids=None, file_weights=None):
        weights = self.weights
        if file_weights is not None:
            if weights is not None:
                raise ConfigError(
                    "weights given in both the config and the ballot file")
            if self.kind != "curve":
                raise ConfigError("weights apply only to curve rules")
            weights = file_weights
        if self.kind == "curve":
            return CurvePhantom(self.build_curve(), weights=weights,
                                empty_value=self.empty_value)
        if self.kind == "constant":
            value = _real(self.rule["value"], "rule.value")
            if not self.domain.contains(value):
                raise ConfigError(f"constant value {value} is outside the domain")
            return ConstantPhantom(self.domain, value)
        if self.kind == "dictator":
            voter = self.rule["voter"]
            if isinstance(voter, str):
                if voter_ids is None:
                    raise ConfigError(
                        "dictator rules naming a voter id need a ballot file; "
                        "use an integer position instead")
                if voter not in voter_ids:
                    raise ConfigError(
                        f"dictator voter id {voter!r} is not in the ballot file")
                position = list(voter_ids).index(voter)
            else:
                position = _integer(voter, "rule.voter")
            try:
                return DictatorPhantom(self.domain, position)
            except (DomainError, ProfileError) as exc:
                raise ConfigError(str(exc)) from exc
        if self.kind == "order_statistic":
            try:
                return OrderStatisticPhantom(
                    self.domain, _integer(self.rule["k"], "rule.k"))
            except (DomainError, ProfileError) as exc:
                raise ConfigError(str(exc)) from exc
        entries = _mapping(self.rule["entries"], "rule.entries")
        if not entries:
            raise ConfigError("rule.entries must not be empty")
        table = {}
        for marks, value in entries.items():
            try:
                key = ExtremeProfile.from_string(marks)
            except (ProfileError, DomainError, ValueError) as exc:
                raise ConfigError(
                    f"bad extreme-profile key {marks!r}: {exc}") from exc
            table[key] = _real(value, f"rule.entries[{marks!r}]")
        try:
            return TablePhantom(self.domain, table)
        except (DomainError, ProfileError, MalformedPhantomError,
                TableLookupError) as exc:
            raise ConfigError(f"invalid table rule: {exc}") from exc

    def build_variable_rule(self):
        """Size-polymorphic callable for variable-electorate audits."""
        if self.kind == "curve":
            if self.empty_value is None:
                raise ConfigError(
                    "variable-electorate audits of curve rules need "
                    "empty_electorate_value")
            if self.weights is not None:
                raise ConfigError(
                    "weighted rules are fixed-size; drop weights for "
                    "variable-electorate audits")
            return VariableElectorateRule(self.build_curve(), self.empty_value)
        if self.kind == "table":
            raise ConfigError(
                "table rules have a fixed electorate size and cannot be "
                "audited across sizes")
        phantom = self.build_phantom()
        from .representations import as_rule
        return as_rule(phantom)


def load_config(path: str) -> RuleConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    if p.suffix.lower() == ".toml":
        try:
            data = _toml.loads(text)
        except _toml.TOMLDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid TOML: {exc}") from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    return RuleConfig(data, source=str(path), base_dir=p.parent)


# ---------------------------------------------------------------------------
# Ballot files
# ---------------------------------------------------------------------------


def load_ballots(path: str, domain: AlternativeDomain):
    """Read a ballot CSV: header ``voter_id,ballot`` or ``voter_id,ballot,weight``.

    Ballots are decimals in the domain or the literal ``abstain``; voter ids
    must be distinct.  Errors carry the 1-based row number of the offending
    line.  Returns ``(profile, weights-or-None)``.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BallotFileError(f"cannot read ballot file {path!r}: {exc}")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise BallotFileError(
            "ballot file is empty; expected header voter_id,ballot[,weight]", row=1)
    header = rows[0]
    if header not in (["voter_id", "ballot"], ["voter_id", "ballot", "weight"]):
        raise BallotFileError(
            "header must be exactly voter_id,ballot or voter_id,ballot,weight",
            row=1)
    has_weights = len(header) == 3
    ids, ballots, weights = [], [], []
    seen = set()
    for rownum, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise BallotFileError(
                f"expected {len(header)} fields, got {len(row)}", row=rownum)
        vid = row[0]
        if not vid:
            raise BallotFileError("empty voter_id", row=rownum)
        if vid in seen:
            raise BallotFileError(f"duplicate voter_id {vid!r}", row=rownum)
        seen.add(vid)
        raw = row[1]
        if raw == "abstain":
            value = ABSTAIN
        else:
            try:
                value = float(raw)
            except ValueError:
                raise BallotFileError(
                    f"ballot {raw!r} is neither a decimal nor the literal abstain",
                    row=rownum) from None
            if not domain.contains(value):
                raise BallotFileError(
                    f"ballot {value} outside [{domain.mu_minus}, {domain.mu_plus}]",
                    row=rownum)
        if has_weights:
            try:
                w = float(row[2])
            except ValueError:
                raise BallotFileError(
                    f"weight {row[2]!r} is not a decimal", row=rownum) from None
            if not math.isfinite(w) or w < 0:
                raise BallotFileError(
                    f"weight {w} must be finite and nonnegative", row=rownum)
            weights.append(w)
        ids.append(vid)
        ballots.append(value)
    profile = Profile.from_entries(zip(ids, ballots))
    return profile, (Weights(tuple(weights)) if has_weights else None)


# ---------------------------------------------------------------------------
# Black-box rules
# ---------------------------------------------------------------------------


class BlackBoxRule:
    """External command evaluated per profile: ballot CSV in, decimal out.

    The child process receives ``voter_id,ballot`` rows on stdin and must
    print one decimal outcome to stdout within the timeout.
    """

    def __init__(self, command: str, timeout: float = BLACK_BOX_TIMEOUT):
        self.command = command
        self.argv = shlex.split(command)
        if not self.argv:
            raise BlackBoxRuleError("black-box command is empty")
        self.timeout = timeout

    def __call__(self, ballots) -> float:
        lines = ["voter_id,ballot"]
        lines += [f"{i},{float(b)!r}" for i, b in enumerate(ballots)]
        payload = "\n".join(lines) + "\n"
        try:
            proc = subprocess.run(self.argv, input=payload, text=True,
                                  capture_output=True, timeout=self.timeout)
        except subprocess.TimeoutExpired:
            raise BlackBoxRuleError(
                f"black-box rule timed out after {self.timeout:g}s") from None
        except OSError as exc:
            raise BlackBoxRuleError(
                f"cannot run black-box command {self.command!r}: {exc}") from exc
        if proc.returncode != 0:
            tail = proc.stderr.strip().splitlines()[-1:] or ["(no stderr)"]
            raise BlackBoxRuleError(
                f"black-box rule exited with status {proc.returncode}: {tail[0]}")
        out = proc.stdout.strip()
        try:
            return float(out)
        except ValueError:
            raise BlackBoxRuleError(
                f"black-box output {out!r} is not a decimal") from None

    def describe(self) -> dict:
        return {"kind": "black-box", "command": self.command}


# ---------------------------------------------------------------------------
# Benchmark harness
# ---------------------------------------------------------------------------

_BENCH_CURVES = {
    "linear": lambda dom: LinearCurve(dom),
    "step": lambda dom: StepCurve(dom, 0.5, 0.0, 1.0),
    "uniform_optimal": lambda dom: UniformOptimalCurve(dom, 2.0),
}

_BENCH_EVALUATORS = (
    ("direct", eval_phantom_direct),
    ("maxmin", eval_maxmin),
    ("median", eval_median),
    ("curve", eval_curve),
    ("issues", eval_issues),
)


def bench_representations(sizes, curve: str = "linear", repeat: int = 5,
                          seed: int = 0,
                          exponential_cap: int = BENCH_EXPONENTIAL_CAP):
    """Median evaluation time per representation and electorate size.

    Returns ``(representation, n, median_ns)`` rows.  The same seeded random
    profiles are reused across representations at each size so timings are
    comparable; exponential evaluators skip sizes above ``exponential_cap``.
    One warmup evaluation per (representation, size) runs before timing.
    """
    if curve not in _BENCH_CURVES:
        raise ConfigError(
            f"bench curve must be one of {sorted(_BENCH_CURVES)}, got {curve!r}")
    if repeat < 1:
        raise ConfigError("bench repeat must be at least 1")
    sizes = [int(n) for n in sizes]
    if not sizes or any(n < 1 for n in sizes):
        raise ConfigError("bench sizes must be positive integers")
    dom = AlternativeDomain(0.0, 1.0)
    phantom = CurvePhantom(_BENCH_CURVES[curve](dom))
    rng = np.random.default_rng(seed)
    profiles_by_n = {
        n: [rng.uniform(0.0, 1.0, size=n).tolist() for _ in range(repeat)]
        for n in sizes
    }
    rows = []
    for name, fn in _BENCH_EVALUATORS:
        for n in sizes:
            if name in EXPONENTIAL_REPRESENTATIONS and n > exponential_cap:
                continue
            profiles = profiles_by_n[n]
            # repeated warmup settles allocator and dispatch caches
            for _ in range(3):
                fn(phantom, profiles[0])
            times = []
            for p in profiles:
                t0 = time.perf_counter_ns()
                fn(phantom, p)
                times.append(time.perf_counter_ns() - t0)
            rows.append((name, n, int(statistics.median(times))))
    return rows


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _parse_list(text: str, conv, flag: str) -> list:
    try:
        return [conv(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse {flag} value {text!r}") from None


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    profile, file_weights = load_ballots(args.ballots, cfg.domain)
    phantom = cfg.build_phantom(voter_ids=profile.voter_ids,
                                file_weights=None if file_weights is None
                                else file_weights.values)
    payload = {"schema": SCHEMA_VERSION, "representation": args.representation,
               "n": len(profile), "rule": phantom.describe()}
    if args.representation == "all":
        report = cross_check(phantom, profile)
        payload.update(report.to_dict(include_timings=not args.no_timings))
        payload["outcome"] = report.value if report.agreement else None
        _emit(payload)
        return EXIT_OK if report.agreement else EXIT_DISAGREEMENT
    t0 = time.perf_counter_ns()
    out = evaluate(phantom, profile, representation=args.representation)
    elapsed = time.perf_counter_ns() - t0
    payload["outcome"] = out.value
    payload["provenance"] = out.provenance.to_dict()
    if not args.no_timings:
        payload["timings_ns"] = {args.representation: elapsed}
    _emit(payload)
    return EXIT_OK


def cmd_audit(args) -> int:
    if (args.config is None) == (args.black_box is None):
        raise ConfigError("provide exactly one of a config path or --black-box")
    axioms = _parse_list(args.axioms, str, "--axioms") if args.axioms else None
    if args.black_box is not None:
        bounds = _parse_list(args.domain, float, "--domain")
        if len(bounds) != 2:
            raise ConfigError("--domain needs two comma-separated bounds m,M")
        domain = AlternativeDomain(bounds[0], bounds[1])
        fixed_target = variable_target = BlackBoxRule(args.black_box)
    else:
        cfg = load_config(args.config)
        domain = cfg.domain
        fixed_target = cfg.build_phantom() if not args.variable else None
        variable_target = cfg.build_variable_rule() if args.variable else None
    try:
        if args.variable:
            sizes = _parse_list(args.sizes, int, "--sizes")
            report = audit_variable(variable_target, domain, sizes=tuple(sizes),
                                    axioms=axioms, grid_steps=args.grid_steps,
                                    samples=args.samples, seed=args.seed)
        else:
            report = audit_fixed(fixed_target, domain, n=args.n, axioms=axioms,
                                 grid_steps=args.grid_steps,
                                 samples=args.samples, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {"schema": SCHEMA_VERSION, **report.to_dict()}
    _emit(payload)
    return EXIT_OK if report.passed else EXIT_AUDIT_FAILED


def _build_prior(args) -> Prior:
    if args.prior == "uniform":
        return Prior.uniform(args.low, args.high)
    if args.density is None:
        raise ConfigError("--prior custom needs --density with [[x, y], ...] knots")
    try:
        knots = json.loads(args.density)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--density is not valid JSON: {exc}") from exc
    if (not isinstance(knots, list) or len(knots) < 2
            or any(not isinstance(k, list) or len(k) != 2 for k in knots)):
        raise ConfigError("--density must be a JSON list of [x, y] pairs")
    xs = np.asarray([_real(k[0], "density knot x") for k in knots], dtype=float)
    ys = np.asarray([_real(k[1], "density knot y") for k in knots], dtype=float)
    if np.any(np.diff(xs) <= 0):
        raise ConfigError("density knot x values must strictly increase")
    if xs[0] != args.low or xs[-1] != args.high:
        raise ConfigError("density knots must span exactly [--low, --high]")

    def density(x):
        return np.interp(x, xs, ys)

    return Prior.custom(args.low, args.high, density)


def cmd_welfare(args) -> int:
    if args.minimax and args.optimal_curve:
        raise ConfigError("--minimax and --optimal-curve are mutually exclusive")

    if args.minimax:
        if args.weights:
            weights = _parse_list(args.weights, float, "--weights")
        else:
            weights = [1.0] * args.n
        phantom = minimax_optimal_phantoms(weights, args.q,
                                           low=args.low, high=args.high)
        total = sum(weights)
        shares = np.cumsum([0.0] + list(weights)) / total
        chain = [float(v) for v in phantom.curve.batch(np.clip(shares, 0.0, 1.0))]
        _emit({"schema": SCHEMA_VERSION, "q": args.q,
               "weights": list(weights), "phantom_values": chain,
               "rule": phantom.describe()})
        return EXIT_OK

    prior = _build_prior(args)
    if args.optimal_curve:
        curve = optimal_curve(prior, args.q).detach()
        _emit({"schema": SCHEMA_VERSION, "q": args.q,
               "prior": prior.describe(), "knots": OPTIMAL_CURVE_SCAN,
               "curve": curve.describe()})
        return EXIT_OK

    if not args.configs:
        raise ConfigError("welfare comparison needs at least one config path")
    rules = []
    for path in args.configs:
        cfg = load_config(path)
        if (cfg.domain.mu_minus, cfg.domain.mu_plus) != (prior.low, prior.high):
            raise ConfigError(
                f"config {path!r} domain [{cfg.domain.mu_minus}, "
                f"{cfg.domain.mu_plus}] does not match the prior support "
                f"[{prior.low}, {prior.high}]")
        phantom = cfg.build_phantom()
        weights = None if cfg.weights is None else Weights(cfg.weights)
        if weights is not None and len(cfg.weights) != args.n:
            raise ConfigError(
                f"config {path!r} has {len(cfg.weights)} weights but --n is {args.n}")
        est = monte_carlo_ex_ante(phantom, prior, args.q, args.n,
                                  args.samples, seed=args.seed, weights=weights)
        rules.append({"source": str(path), "rule": phantom.describe(),
                      "estimate": est.to_dict()})
    best = min(rules, key=lambda row: row["estimate"]["mean"])
    _emit({"schema": SCHEMA_VERSION, "prior": prior.describe(), "q": args.q,
           "n": args.n, "samples": args.samples, "seed": args.seed,
           "rules": rules, "best": best["source"]})
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = _parse_list(args.sizes, int, "--sizes")
    rows = bench_representations(sizes, curve=args.curve, repeat=args.repeat,
                                 seed=args.seed)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["representation", "n", "median_ns"])
    writer.writerows(rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phantomvote",
        description="Evaluate, audit, and compare interval voting rules.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("evaluate", help="apply a rule to a ballot file")
    p_eval.add_argument("config", help="rule configuration (JSON or TOML)")
    p_eval.add_argument("ballots", help="ballot CSV file")
    p_eval.add_argument("--representation", choices=REPRESENTATION_CHOICES,
                        default="curve",
                        help="evaluator to use; 'all' cross-checks every one")
    p_eval.add_argument("--no-timings", action="store_true",
                        help="omit wall-clock timings for byte-identical output")
    p_eval.set_defaults(func=cmd_evaluate)

    p_audit = sub.add_parser("audit", help="run axiom audits against a rule")
    p_audit.add_argument("config", nargs="?", default=None,
                         help="rule configuration (JSON or TOML)")
    p_audit.add_argument("--black-box", default=None, metavar="CMD",
                         help="external command: ballot CSV on stdin, "
                              "decimal outcome on stdout")
    p_audit.add_argument("--domain", default="0,1", metavar="m,M",
                         help="domain bounds for --black-box rules")
    p_audit.add_argument("--grid-steps", type=int, default=10,
                         help="ballot grid resolution (points = steps + 1)")
    p_audit.add_argument("--n", type=int, default=3,
                         help="electorate size for fixed-electorate audits")
    p_audit.add_argument("--axioms", default=None,
                         help="comma-separated axiom names (default: all)")
    p_audit.add_argument("--variable", action="store_true",
                         help="audit variable-electorate axioms instead")
    p_audit.add_argument("--sizes", default="1,2,3",
                         help="electorate sizes for --variable audits")
    p_audit.add_argument("--samples", type=int, default=20_000,
                         help="random checks per axiom when not exhaustive")
    p_audit.add_argument("--seed", type=int, default=0)
    p_audit.set_defaults(func=cmd_audit)

    p_wel = sub.add_parser("welfare",
                           help="welfare comparison and optimal-rule synthesis")
    p_wel.add_argument("configs", nargs="*",
                       help="rule configurations to compare")
    p_wel.add_argument("--prior", choices=("uniform", "custom"),
                       default="uniform")
    p_wel.add_argument("--density", default=None,
                       help="piecewise-linear density knots [[x, y], ...] "
                            "for --prior custom")
    p_wel.add_argument("--low", type=float, default=0.0,
                       help="prior support lower bound")
    p_wel.add_argument("--high", type=float, default=1.0,
                       help="prior support upper bound")
    p_wel.add_argument("--q", type=float, default=2.0,
                       help="welfare norm exponent")
    p_wel.add_argument("--n", type=int, default=5, help="electorate size")
    p_wel.add_argument("--samples", type=int, default=10_000)
    p_wel.add_argument("--seed", type=int, default=0)
    p_wel.add_argument("--minimax", action="store_true",
                       help="emit the minimax-optimal phantom values")
    p_wel.add_argument("--optimal-curve", action="store_true",
                       help="emit the welfare-optimal grading curve as a "
                            "numeric knot table")
    p_wel.add_argument("--weights", default=None,
                       help="comma-separated voter weights for --minimax")
    p_wel.set_defaults(func=cmd_welfare)

    p_bench = sub.add_parser("bench",
                             help="time the representation evaluators")
    p_bench.add_argument("--sizes", default="4,8,12,16",
                         help="comma-separated electorate sizes")
    p_bench.add_argument("--curve", default="linear",
                         help="grading curve driving the benchmark rule")
    p_bench.add_argument("--repeat", type=int, default=5,
                         help="evaluations per measurement (median taken)")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NonInvertibleTransformError as exc:
        _emit({"schema": SCHEMA_VERSION, "error": "non_invertible_transform",
               "message": str(exc), "witness": exc.witness})
        return EXIT_NON_INVERTIBLE
    except (InfeasibleSizeError, EmptyElectorateError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, BallotFileError, BlackBoxRuleError, ProfileError,
            DomainError, TableLookupError, MalformedPhantomError,
            DiscontinuousCurveError) as exc:
        row = getattr(exc, "row", None)
        where = f" (row {row})" if row is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
