"""l-inf bounded adversarial perturbations.

The adversary is hypothesis-aware: the harness draws the true hypothesis
first and the attack vector is a function of it.  For the binary
symmetric model the worst-case attack is the sign attack
``-eps * sign(mu)`` under H0 and its negation under H1; it moves every
coordinate toward the competing template.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

LINF_SLACK = 1e-12  # absolute slack for representation noise

ATTACK_KINDS = ("none", "worst_case", "explicit")


@dataclass(frozen=True)
class AttackSpec:
    """Attack description: no attack, worst-case sign attack at strength
    eps_act, or an explicit vector (interpreted as the H0 attack; the H1
    attack is its negation in the symmetric binary model)."""

    kind: str = "none"
    eps_act: float = 0.0
    vector: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"attack kind must be one of {ATTACK_KINDS}")
        if self.eps_act < 0 or not math.isfinite(self.eps_act):
            raise ValueError("eps_act must be finite and >= 0")
        if self.kind == "explicit":
            if self.vector is None:
                raise ValueError("explicit attack needs a vector")
            v = np.asarray(self.vector, dtype=np.float64)
            if v.ndim != 1 or not np.all(np.isfinite(v)):
                raise ValueError("attack vector must be a finite 1-D vector")
            object.__setattr__(self, "vector", v)
            object.__setattr__(self, "eps_act", float(np.abs(v).max(initial=0.0)))
        elif self.vector is not None:
            raise ValueError(f"attack kind {self.kind!r} takes no vector")

    def strength(self):
        """Realized l-inf norm of the attack."""
        return 0.0 if self.kind == "none" else self.eps_act

    def check_budget(self, eps_des, allow_over_budget=False):
        """Reject attacks stronger than the design budget unless the
        over-budget stress flag is set."""
        if self.strength() > eps_des + LINF_SLACK and not allow_over_budget:
            raise ValueError(
                f"attack strength {self.strength()} exceeds design budget "
                f"{eps_des}; enable the over-budget stress flag to allow this"
            )


def worst_case_attack(mu, eps_act, hypothesis):
    """Sign attack at strength eps_act for the given true hypothesis.

    Under H0 (mean +mu) the attack is -eps_act*sign(mu); under H1 it is
    +eps_act*sign(mu).  Zero-mean coordinates are left untouched
    (sign(0) = 0): they carry no signal for any rule here.
    """
    if eps_act < 0:
        raise ValueError("eps_act must be >= 0")
    if hypothesis not in (0, 1):
        raise ValueError("worst-case attack is defined for the binary model")
    mu = np.asarray(mu, dtype=np.float64)
    direction = -1.0 if hypothesis == 0 else 1.0
    return direction * eps_act * np.sign(mu)


def validate_attack(e, eps):
    """True iff max_i |e[i]| <= eps + slack."""
    e = np.asarray(e, dtype=np.float64)
    return bool(np.abs(e).max(initial=0.0) <= eps + LINF_SLACK)


def realize_observation(instance, hypothesis, e, noise,
                        allow_over_budget=False):
    """X = means[hypothesis] + e + noise, with budget validation."""
    means = instance.means
    if not 0 <= hypothesis < len(means):
        raise ValueError("hypothesis index out of range")
    mu_k = means[hypothesis]
    e = np.asarray(e, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if e.shape != mu_k.shape or noise.shape != mu_k.shape:
        raise ValueError("dimension mismatch between mean, attack and noise")
    if not allow_over_budget and not validate_attack(e, instance.eps_des):
        raise ValueError("attack vector violates the design budget; "
                         "enable the over-budget stress flag to allow this")
    return mu_k + e + noise


def attack_vector(spec, mu, hypothesis):
    """Resolve an AttackSpec into the perturbation used under `hypothesis`."""
    mu = np.asarray(mu, dtype=np.float64)
    if spec.kind == "none":
        return np.zeros_like(mu)
    if spec.kind == "worst_case":
        return worst_case_attack(mu, spec.eps_act, hypothesis)
    if hypothesis not in (0, 1):
        raise ValueError("explicit attacks apply to the binary model only")
    return spec.vector if hypothesis == 0 else -spec.vector


def load_attack_vector(path):
    """Read an explicit attack vector: one real value per line."""
    values = np.loadtxt(path, dtype=np.float64, delimiter=",", ndmin=1)
    if values.ndim != 1:
        raise ValueError(f"{path}: expected one value per line")
    return values
