"""Certification that Q_{n,m}(r) >= mu Q_{n,m}(0) on [0, 1].

Starting from s_1 = 1 the sequence

    s_{i+1} = (mu Q(0) / Q(s_i))^{(n+m)/m} s_i

is the longest step down from s_i for which the scaling inequality
Q(s) >= (s/s_i)^{m/(n+m)} Q(s_i) still guarantees Q >= mu Q(0) on
[s_{i+1}, s_i]. Once s_i drops below (1-mu) m(m-1)/(n(n-1)) the small-r
lower bound covers the rest of the interval.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .dimension import Dimensions
from .errors import ArithmeticMismatch, CertificationStall, UnknownQ0
from .yamabe import SolverSettings, boundary_constants, compute_q, ode_params

log = logging.getLogger(__name__)

SCHEMA = 1
CERTIFIED = "Certified"
FAILED = "Failed"
# relative tolerance for re-checking the recursion arithmetic
CHECK_RTOL = 1e-12


@dataclass
class Step:
    i: int
    s: float
    q: float
    uncertainty: float
    q_used: float
    passed: bool
    alpha: float | None = None
    source: str = "shooting"

    def to_dict(self) -> dict:
        return {"i": self.i, "s": self.s, "q": self.q, "uncertainty": self.uncertainty,
                "q_used": self.q_used, "pass": self.passed, "alpha": self.alpha,
                "source": self.source}


@dataclass
class CertificationTrace:
    dims: Dimensions
    mu: float
    q0: float
    q1: float
    steps: list[Step] = field(default_factory=list)
    verdict: str = FAILED
    failed_step: int | None = None

    @property
    def exponent(self) -> Fraction:
        return Fraction(self.dims.k, self.dims.m)

    @property
    def threshold(self) -> float:
        return small_r_threshold(self.dims, self.mu)

    @property
    def final_s(self) -> float:
        return self.steps[-1].s

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "n": self.dims.n,
            "m": self.dims.m,
            "mu": self.mu,
            "q0": self.q0,
            "q1": self.q1,
            "exponent": str(self.exponent),
            "threshold": self.threshold,
            "verdict": self.verdict,
            "failed_step": self.failed_step,
            "step_count": self.step_count,
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CertificationTrace":
        steps = [Step(i=d["i"], s=d["s"], q=d["q"], uncertainty=d["uncertainty"],
                      q_used=d["q_used"], passed=d["pass"], alpha=d.get("alpha"),
                      source=d.get("source", "shooting")) for d in data["steps"]]
        return cls(dims=Dimensions(data["n"], data["m"]), mu=data["mu"], q0=data["q0"],
                   q1=data["q1"], steps=steps, verdict=data["verdict"],
                   failed_step=data.get("failed_step"))


def small_r_threshold(dims: Dimensions, mu: float) -> float:
    """Largest r with (m(m-1) - r n(n-1)) / (m(m-1)) >= mu."""
    n, m = dims.n, dims.m
    return (1.0 - mu) * m * (m - 1) / (n * (n - 1))


def next_s(s: float, q_used: float, target: float, dims: Dimensions) -> float:
    return (target / q_used) ** (dims.k / dims.m) * s


def certify(dims: Dimensions, mu: float = 0.99, settings: SolverSettings | None = None, *,
            q0: float | None = None, max_steps: int = 5000, progress=None) -> CertificationTrace:
    """Run the recursion until s drops below the small-r threshold.

    Each Q(s_i) is deflated by its reported uncertainty before it enters the
    recursion. ``progress`` (optional) is called with every finished step.
    """
    if not 0 < mu < 1:
        raise ValueError(f"mu must lie in (0, 1), got {mu}")
    try:
        bc = boundary_constants(dims)
        q1 = bc.q1
        if q0 is None:
            q0 = bc.q0
    except UnknownQ0 as exc:
        if q0 is None:
            raise
        q1 = exc.q1
    settings = settings or SolverSettings()
    target = mu * q0
    threshold = small_r_threshold(dims, mu)
    trace = CertificationTrace(dims=dims, mu=mu, q0=q0, q1=q1)

    s = 1.0
    alpha = None
    normalized = None
    for i in range(1, max_steps + 1):
        if i == 1:
            step = Step(i=1, s=1.0, q=q1, uncertainty=0.0, q_used=q1, passed=q1 > target,
                        source="sphere")
        else:
            form = ode_params(dims, s).normalized
            guess = alpha if form == normalized else None
            res = compute_q(dims, s, settings, alpha_guess=guess)
            # alpha_lambda is in the integrated form, so it only seeds the
            # next solve while that form stays the same
            alpha, normalized = res.alpha_lambda, form
            q_used = res.q_value - res.uncertainty
            step = Step(i=i, s=s, q=res.q_value, uncertainty=res.uncertainty, q_used=q_used,
                        passed=q_used > target, alpha=res.alpha_lambda)
        trace.steps.append(step)
        if progress is not None:
            progress(step)
        if not step.passed:
            trace.failed_step = i
            return trace
        if s < threshold:
            trace.verdict = CERTIFIED
            return trace
        s_new = next_s(s, step.q_used, target, dims)
        if not s_new < s * (1 - 1e-12):
            log.error("certification stalls at step %d, ratio %.15g", i, s_new / s)
            raise CertificationStall(f"sequence stalls at step {i}: ratio {s_new / s:.15g}")
        s = s_new
    raise CertificationStall(f"no termination within {max_steps} steps (s={s:.6g})")


def check_trace(trace: CertificationTrace, q0: float | None = None) -> str:
    """Re-verify a finished trace without running the solver.

    Raises :class:`ArithmeticMismatch` at the first step whose value or pass
    flag does not follow from the previous one; otherwise returns
    ``"Certified"`` or ``"Failed"``.
    """
    dims = trace.dims
    q0 = trace.q0 if q0 is None else q0
    target = trace.mu * q0
    threshold = small_r_threshold(dims, trace.mu)
    steps = trace.steps
    if not steps:
        return FAILED
    if steps[0].s != 1.0:
        raise ArithmeticMismatch("sequence must start at s = 1", index=steps[0].i)
    for k, st in enumerate(steps):
        if st.i != k + 1:
            raise ArithmeticMismatch(f"step index {st.i} out of order", index=st.i)
        if st.passed != (st.q_used > target):
            raise ArithmeticMismatch(f"pass flag inconsistent at step {st.i}", index=st.i)
        if st.q_used > st.q:
            raise ArithmeticMismatch(f"deflated value exceeds Q at step {st.i}", index=st.i)
        if k == 0:
            continue
        prev = steps[k - 1]
        if not prev.passed:
            raise ArithmeticMismatch(f"sequence continues past failed step {prev.i}", index=st.i)
        expected = next_s(prev.s, prev.q_used, target, dims)
        if not math.isclose(st.s, expected, rel_tol=CHECK_RTOL, abs_tol=0.0):
            raise ArithmeticMismatch(
                f"s_{st.i} = {st.s!r} but the recursion gives {expected!r}", index=st.i)
        if not st.s < prev.s:
            raise ArithmeticMismatch(f"s not decreasing at step {st.i}", index=st.i)
    for st in steps:
        if not st.passed:
            return FAILED
    last = steps[-1]
    if last.s < threshold and all(st.s >= threshold for st in steps[:-1]):
        return CERTIFIED
    return FAILED


def soundness_residuals(trace: CertificationTrace) -> list[float]:
    """Relative residuals of mu Q(0) = (s_{i+1}/s_i)^{m/(n+m)} Q(s_i) per step."""
    dims = trace.dims
    target = trace.mu * trace.q0
    out = []
    for prev, cur in zip(trace.steps, trace.steps[1:]):
        lhs = (cur.s / prev.s) ** (dims.m / dims.k) * prev.q_used
        out.append(abs(lhs - target) / target)
    return out


def markdown_report(trace: CertificationTrace, every: int | None = None) -> str:
    """Markdown summary with a table of the sequence (all rows by default)."""
    d = trace.dims
    lines = [
        f"# Certification for H^{d.n} x S^{d.m}",
        "",
        f"- mu = {trace.mu}",
        f"- Q(0) = {trace.q0:.5f}, Q(1) = {trace.q1:.5f}",
        f"- target mu*Q(0) = {trace.mu * trace.q0:.5f}",
        f"- recursion exponent (n+m)/m = {trace.exponent}",
        f"- small-r threshold = {trace.threshold:.6g}",
        f"- steps = {trace.step_count}, final s = {trace.final_s:.5f}",
        f"- verdict: **{trace.verdict}**"
        + (f" (failed at step {trace.failed_step})" if trace.failed_step else ""),
        "",
        "Each Q(s_i) entering the recursion is deflated by its numerical uncertainty "
        "(bisection spread plus certified tail bound).",
        "",
        "| i | s_i | Q(s_i) | uncertainty | pass |",
        "|---|---|---|---|---|",
    ]
    rows = trace.steps
    if every:
        rows = [st for st in rows if st.i % every == 0 or st.i in (1, trace.step_count)]
    for st in rows:
        lines.append(f"| {st.i} | {st.s:.5f} | {st.q:.5f} | {st.uncertainty:.1e} | "
                     f"{'yes' if st.passed else 'no'} |")
    return "\n".join(lines) + "\n"
