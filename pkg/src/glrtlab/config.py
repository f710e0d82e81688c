"""Experiment configuration: a flat, human-editable key/value text format.

One ``key = value`` pair per line, ``#`` comments.  Attack strengths may
be given absolutely (``eps_act_grid``) or as fractions of the design
budget (``k_grid``); noise may be given as ``sigma_grid`` or as
``snr2_grid`` (values of (eps_des/sigma)^2).  Both sugar forms resolve
at parse time and the canonical serialization emits resolved values, so
parse -> serialize -> parse is the identity.
"""

import hashlib
import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attacks import ATTACK_KINDS, LINF_SLACK, AttackSpec, load_attack_vector
from .model import (BinaryInstance, TwoLevelTemplate, build_two_level_template,
                    vulnerability_threshold)

MODES = ("sweep", "moments")
DETECTOR_NAMES = ("clean", "minimax", "glrt")

_ID_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the line number
    when one applies."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    mode: str = "sweep"
    # template: either the two-level parameters or an explicit mean vector
    d: Optional[int] = None
    p: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    mu: Optional[tuple] = None
    eps_des: float = 1.0
    sigma_grid: tuple = ()
    eps_act_grid: tuple = ()
    t_grid: tuple = ()           # moments mode only
    detectors: tuple = ("glrt", "minimax")
    attack: str = "worst_case"
    attack_vector_file: Optional[str] = None
    n_trials: int = 100000
    master_seed: Optional[int] = None
    output: str = "results.csv"
    stress_over_budget: bool = False

    def uses_template(self):
        return self.mu is None

    def template(self):
        if self.mu is not None:
            raise ConfigError("config carries an explicit mean vector, "
                              "not a two-level template")
        return TwoLevelTemplate(d=self.d, p=self.p, a=self.a, b=self.b,
                                eps_des=self.eps_des)

    def mean_vector(self):
        if self.mu is not None:
            return np.asarray(self.mu, dtype=np.float64)
        return build_two_level_template(self.template())

    def instance(self, sigma):
        return BinaryInstance(mu=self.mean_vector(), sigma=sigma,
                              eps_des=self.eps_des)

    def attack_spec(self, eps_act):
        if self.attack == "none":
            return AttackSpec("none")
        if self.attack == "worst_case":
            return AttackSpec("worst_case", eps_act=eps_act)
        return AttackSpec("explicit",
                          vector=load_attack_vector(self.attack_vector_file))


def _parse_scalar(key, raw, line_no):
    try:
        if key in ("d", "n_trials", "master_seed"):
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {line_no}: {key} expects a number, "
                          f"got {raw!r}") from None


def _parse_list(key, raw, line_no):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"line {line_no}: {key} must not be empty")
    try:
        return tuple(float(s) for s in items)
    except ValueError:
        raise ConfigError(f"line {line_no}: {key} expects comma-separated "
                          f"numbers, got {raw!r}") from None


_SCALAR_KEYS = {"d", "p", "a", "b", "eps_des", "n_trials", "master_seed"}
_LIST_KEYS = {"sigma_grid", "snr2_grid", "eps_act_grid", "k_grid",
              "t_grid", "mu"}
_STRING_KEYS = {"experiment_id", "mode", "attack", "attack_vector_file",
                "output", "detectors"}
_BOOL_KEYS = {"stress_over_budget"}
_ALL_KEYS = _SCALAR_KEYS | _LIST_KEYS | _STRING_KEYS | _BOOL_KEYS


def parse_config_text(text, source="<config>"):
    """Parse configuration text; raises ConfigError with line numbers."""
    seen = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}: line {line_no}: expected "
                              f"'key = value', got {line.strip()!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{source}: line {line_no}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"{source}: line {line_no}: duplicate key "
                              f"{key!r} (first set on line {seen[key][1]})")
        seen[key] = (raw, line_no)

    def take(key, default=None):
        if key not in seen:
            return default, None
        raw, line_no = seen.pop(key)
        return raw, line_no

    try:
        cfg = _build_config(take, source)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return cfg


def _build_config(take, source):
    raw, ln = take("experiment_id")
    if raw is None:
        raise ConfigError(f"{source}: missing required key 'experiment_id'")
    if not _ID_RE.match(raw):
        raise ConfigError(f"{source}: line {ln}: experiment_id must match "
                          f"[A-Za-z0-9_-]+, got {raw!r}")
    experiment_id = raw

    raw, ln = take("mode")
    mode = raw or "sweep"
    if mode not in MODES:
        raise ConfigError(f"{source}: line {ln}: mode must be one of {MODES}")

    values = {}
    for key in ("d", "p", "a", "b", "eps_des", "n_trials", "master_seed"):
        raw, ln = take(key)
        values[key] = None if raw is None else _parse_scalar(key, raw, ln)

    raw, ln = take("mu")
    mu = None if raw is None else _parse_list("mu", raw, ln)

    if mode == "moments":
        if mu is not None or any(values[k] is not None
                                 for k in ("d", "p", "a", "b")):
            raise ConfigError(f"{source}: moments mode takes no template; "
                              f"it sweeps |mu| through t_grid")
    elif mu is None:
        missing = [k for k in ("d", "p", "a", "b") if values[k] is None]
        if missing:
            raise ConfigError(f"{source}: two-level template needs keys "
                              f"{missing} (or give an explicit 'mu')")
    elif any(values[k] is not None for k in ("d", "p", "a", "b")):
        raise ConfigError(f"{source}: give either 'mu' or the two-level "
                          f"template keys d/p/a/b, not both")

    eps_des = values["eps_des"] if values["eps_des"] is not None else 1.0
    if not eps_des > 0:
        raise ConfigError(f"{source}: eps_des must be > 0")

    raw_sigma, ln_s = take("sigma_grid")
    raw_snr2, ln_q = take("snr2_grid")
    if raw_sigma is not None and raw_snr2 is not None:
        raise ConfigError(f"{source}: give sigma_grid or snr2_grid, not both")
    if raw_sigma is not None:
        sigma_grid = _parse_list("sigma_grid", raw_sigma, ln_s)
    elif raw_snr2 is not None:
        snr2 = _parse_list("snr2_grid", raw_snr2, ln_q)
        if any(v <= 0 for v in snr2):
            raise ConfigError(f"{source}: line {ln_q}: snr2_grid values "
                              f"must be > 0")
        sigma_grid = tuple(eps_des / math.sqrt(v) for v in snr2)
    else:
        sigma_grid = (1.0,)
    if any(not s > 0 for s in sigma_grid):
        raise ConfigError(f"{source}: sigma values must be > 0")

    raw_eps, ln_e = take("eps_act_grid")
    raw_k, ln_k = take("k_grid")
    if raw_eps is not None and raw_k is not None:
        raise ConfigError(f"{source}: give eps_act_grid or k_grid, not both")
    if raw_eps is not None:
        eps_act_grid = _parse_list("eps_act_grid", raw_eps, ln_e)
    elif raw_k is not None:
        ks = _parse_list("k_grid", raw_k, ln_k)
        eps_act_grid = tuple(k * eps_des for k in ks)
    else:
        eps_act_grid = (eps_des,)
    if any(e < 0 for e in eps_act_grid):
        raise ConfigError(f"{source}: attack strengths must be >= 0")

    raw, ln = take("t_grid")
    t_grid = () if raw is None else _parse_list("t_grid", raw, ln)
    if mode == "moments" and not t_grid:
        raise ConfigError(f"{source}: moments mode needs a t_grid")

    raw, ln = take("detectors")
    if raw is None:
        detectors = ("glrt", "minimax")
    else:
        detectors = tuple(s.strip() for s in raw.split(",") if s.strip())
        if not detectors:
            raise ConfigError(f"{source}: line {ln}: detectors must not be "
                              f"empty")
        bad = [d for d in detectors if d not in DETECTOR_NAMES]
        if bad:
            raise ConfigError(f"{source}: line {ln}: unknown detectors "
                              f"{bad}; choose from {DETECTOR_NAMES}")
        if len(set(detectors)) != len(detectors):
            raise ConfigError(f"{source}: line {ln}: duplicate detectors")

    raw, ln = take("attack")
    attack = raw or "worst_case"
    if attack not in ATTACK_KINDS:
        raise ConfigError(f"{source}: line {ln}: attack must be one of "
                          f"{ATTACK_KINDS}")

    raw, ln = take("attack_vector_file")
    attack_vector_file = raw
    if attack == "explicit" and not attack_vector_file:
        raise ConfigError(f"{source}: explicit attack needs "
                          f"attack_vector_file")

    raw, ln = take("stress_over_budget")
    if raw is None:
        stress = False
    elif raw.lower() in ("true", "false"):
        stress = raw.lower() == "true"
    else:
        raise ConfigError(f"{source}: line {ln}: stress_over_budget must be "
                          f"true or false")

    raw, ln = take("output")
    output = raw or "results.csv"

    n_trials = values["n_trials"] if values["n_trials"] is not None else 100000
    if n_trials < 1:
        raise ConfigError(f"{source}: n_trials must be >= 1")

    d = None if values["d"] is None else int(values["d"])
    cfg = ExperimentConfig(
        experiment_id=experiment_id, mode=mode,
        d=d, p=values["p"], a=values["a"], b=values["b"],
        mu=mu, eps_des=eps_des,
        sigma_grid=sigma_grid, eps_act_grid=eps_act_grid, t_grid=t_grid,
        detectors=detectors, attack=attack,
        attack_vector_file=attack_vector_file,
        n_trials=n_trials, master_seed=values["master_seed"],
        output=output, stress_over_budget=stress,
    )
    return cfg


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, source=str(path))


def serialize_config(cfg):
    """Canonical text form: resolved values, fixed key order."""
    lines = [f"experiment_id = {cfg.experiment_id}", f"mode = {cfg.mode}"]
    if cfg.mu is not None:
        lines.append("mu = " + ", ".join(repr(v) for v in cfg.mu))
    elif cfg.d is not None:
        lines += [f"d = {cfg.d}", f"p = {cfg.p!r}", f"a = {cfg.a!r}",
                  f"b = {cfg.b!r}"]
    lines.append(f"eps_des = {cfg.eps_des!r}")
    lines.append("sigma_grid = " + ", ".join(repr(v) for v in cfg.sigma_grid))
    lines.append("eps_act_grid = "
                 + ", ".join(repr(v) for v in cfg.eps_act_grid))
    if cfg.t_grid:
        lines.append("t_grid = " + ", ".join(repr(v) for v in cfg.t_grid))
    lines.append("detectors = " + ", ".join(cfg.detectors))
    lines.append(f"attack = {cfg.attack}")
    if cfg.attack_vector_file:
        lines.append(f"attack_vector_file = {cfg.attack_vector_file}")
    lines.append(f"n_trials = {cfg.n_trials}")
    if cfg.master_seed is not None:
        lines.append(f"master_seed = {cfg.master_seed}")
    lines.append(f"output = {cfg.output}")
    lines.append(f"stress_over_budget = {str(cfg.stress_over_budget).lower()}")
    return "\n".join(lines) + "\n"


def config_digest(cfg):
    """sha256 of the canonical serialization (records resolved overrides)."""
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def validate_config(cfg):
    """Semantic checks beyond parsing; returns a human-readable report.

    Raises ConfigError on hard failures (budget violations without the
    stress flag, missing seed, infeasible moment grids).
    """
    report = []
    report.append(f"experiment_id: {cfg.experiment_id}")
    report.append(f"mode: {cfg.mode}")
    if cfg.master_seed is None:
        raise ConfigError("master_seed is required for reproducible runs")
    report.append(f"master_seed: {cfg.master_seed}")

    if cfg.mode == "moments":
        for t in cfg.t_grid:
            if cfg.eps_des + t / 2.0 < 0:
                raise ConfigError(
                    f"t = {t!r} is infeasible: |mu| = eps_des + t/2 would "
                    f"be negative")
        report.append(f"t_grid: {list(cfg.t_grid)!r}")
        report.append(f"sigma_grid: {list(cfg.sigma_grid)!r}")
        report.append(f"eps_act_grid: {list(cfg.eps_act_grid)!r}")
        report.append(f"n_trials: {cfg.n_trials}")
        report.append("ok")
        return "\n".join(report)

    mu = cfg.mean_vector()
    if cfg.uses_template():
        tpl = cfg.template()
        report.append(
            f"template: d={tpl.d} p={tpl.p} a={tpl.a} b={tpl.b} "
            f"eps_des={tpl.eps_des} (strong coordinates: {tpl.n_strong}, "
            f"rounding: half-up)")
        if abs(tpl.p * tpl.d - tpl.n_strong) > 1e-9:
            report.append(f"note: p*d = {tpl.p * tpl.d!r} is fractional; "
                          f"rounded half-up to {tpl.n_strong}")
    else:
        report.append(f"mean vector: d={mu.size}")
    report.append(f"vulnerability_threshold: "
                  f"{vulnerability_threshold(mu)!r}")
    max_eps = max(cfg.eps_act_grid) if cfg.eps_act_grid else 0.0
    if cfg.attack == "explicit":
        vec = load_attack_vector(cfg.attack_vector_file)
        if vec.size != mu.size:
            raise ConfigError(
                f"attack vector length {vec.size} does not match d={mu.size}")
        max_eps = float(np.abs(vec).max())
        report.append(f"explicit attack strength: {max_eps!r}")
    if max_eps > cfg.eps_des + LINF_SLACK and not cfg.stress_over_budget:
        raise ConfigError(
            f"attack strength {max_eps!r} exceeds design budget "
            f"{cfg.eps_des!r}; set stress_over_budget = true to allow")
    if cfg.stress_over_budget and max_eps > cfg.eps_des + LINF_SLACK:
        report.append("note: over-budget attack allowed by stress flag")
    if "minimax" in cfg.detectors or "glrt" in cfg.detectors:
        if np.abs(mu).max() <= cfg.eps_des:
            report.append("warning: eps_des >= max|mu|; the minimax rule is "
                          "degenerate (all-zero weights, always declares H0)")
    report.append(f"detectors: {', '.join(cfg.detectors)}")
    report.append(f"sigma_grid: {list(cfg.sigma_grid)!r}")
    report.append(f"eps_act_grid: {list(cfg.eps_act_grid)!r}")
    report.append(f"n_trials: {cfg.n_trials}")
    report.append("ok")
    return "\n".join(report)
