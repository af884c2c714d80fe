"""Irrationality-exponent evidence and Good's criterion for Jarnik sets.

A finite window cannot compute a limsup. :class:`MuReport` therefore keeps
the whole ratio sequence ``log(digit_{n+1}) / log(denominator_n)`` and a
supremum over the second half of the window; treat the estimate as
evidence, not as the value of the exponent.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import BCF, RCF, DigitStream, bcf_convergents, rcf_convergents
from .errors import InsufficientDigitsError, TerminatedStreamError
from .numeric import DyadicInterval, as_fraction, format_fraction, from_iv, log_iv
from .transform import two_runs


@dataclass(frozen=True)
class MuReport:
    kind: str
    window: int
    ratios: tuple[tuple[int, DyadicInterval], ...]
    tail_sup: DyadicInterval
    mu_estimate: DyadicInterval
    max_two_run: int | None = None

    @property
    def bounded_twos_hypothesis(self) -> bool | None:
        """BCF only: whether the window is consistent with bounded 2-blocks.

        Long 2-runs void the BCF formula; the true exponent then exceeds the
        estimate. The cutoff is heuristic: a run longer than half the window.
        """
        if self.max_two_run is None:
            return None
        return self.max_two_run <= self.window // 2

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "window": self.window,
            "ratios": [[n, r.to_json()] for n, r in self.ratios],
            "tailSup": self.tail_sup.to_json(),
            "muEstimate": self.mu_estimate.to_json(),
            "muEstimateDecimal": f"{float(self.mu_estimate):.12f}",
        }
        if self.max_two_run is not None:
            out["maxTwoRun"] = self.max_two_run
            out["boundedTwosHypothesis"] = self.bounded_twos_hypothesis
        return out


def _log_ratio(num: int, den: int) -> DyadicInterval:
    if num == 1:
        return DyadicInterval.point(0)
    if num == den:
        return DyadicInterval.point(1)
    return from_iv(log_iv(num) / log_iv(den))


def _mu_report(kind, stream: DigitStream, window: int) -> MuReport:
    if window < 2:
        raise ValueError("window must be >= 2")
    if stream.terminated:
        raise TerminatedStreamError("the stream is a finite expansion of a rational")
    if len(stream.digits) < window:
        raise InsufficientDigitsError(f"window {window} needs {window} digits, got {len(stream.digits)}")
    table = (rcf_convergents if kind == RCF else bcf_convergents)(stream, window - 1)
    ratios = []
    for n in range(1, window):
        q = table.q(n)
        if q >= 2:
            ratios.append((n, _log_ratio(stream.digits[n], q)))
    tail = [r for n, r in ratios if n >= window // 2]
    if tail:
        sup = DyadicInterval(max(r.lower for r in tail), max(r.upper for r in tail))
    else:
        sup = DyadicInterval.point(0)
    mu = DyadicInterval(sup.lower + 2, sup.upper + 2)
    max_run = None
    if kind == BCF:
        max_run = max(two_runs(stream.digits[:window]), default=0)
    return MuReport(kind, window, tuple(ratios), sup, mu, max_run)


def mu_rcf_estimate(stream: DigitStream, window: int) -> MuReport:
    """Evidence for ``mu(x) = 2 + limsup log a_{n+1} / log q_n``."""
    if stream.kind != RCF:
        raise ValueError("mu_rcf_estimate expects an RCF stream")
    return _mu_report(RCF, stream, window)


def mu_bcf_estimate(stream: DigitStream, window: int) -> MuReport:
    """The BCF analogue ``2 + limsup log b_{n+1} / log s_n``.

    Valid for the exponent only when 2-blocks stay bounded; see
    :attr:`MuReport.bounded_twos_hypothesis`.
    """
    if stream.kind != BCF:
        raise ValueError("mu_bcf_estimate expects a BCF stream")
    return _mu_report(BCF, stream, window)


def parse_alpha(value) -> Fraction:
    """Exponent thresholds are exact rationals so Good's inequality is decidable."""
    if isinstance(value, float):
        raise ValueError("alpha must be an exact rational, not a float")
    alpha = as_fraction(value)
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    return alpha


def exceeds_threshold(a_next: int, q: int, alpha: Fraction) -> bool:
    """Exact ``a_next > q**(alpha - 2)`` via ``a^den > q^(num - 2 den)``."""
    num, den = alpha.numerator, alpha.denominator
    return a_next ** den > q ** (num - 2 * den)


@dataclass(frozen=True)
class GoodHits:
    alpha: Fraction
    window: int
    hits: tuple[int, ...]
    rows: tuple[tuple[int, int, int, bool], ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {"alpha": format_fraction(self.alpha), "window": self.window, "hits": list(self.hits)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "a_next", "q_n", "threshold_exceeded"])
        for n, a, q, hit in self.rows:
            w.writerow([n, a, q, int(hit)])
        return buf.getvalue()


def good_hits(stream: DigitStream, alpha, window: int) -> GoodHits:
    """Indices ``1 <= n < window`` with ``a_{n+1} > q_n^(alpha-2)``, decided exactly."""
    if stream.kind != RCF:
        raise ValueError("good_hits expects an RCF stream")
    alpha = parse_alpha(alpha)
    if window < 1:
        raise ValueError("window must be positive")
    if len(stream.digits) < window:
        raise InsufficientDigitsError(f"window {window} needs {window} digits, got {len(stream.digits)}")
    rows = []
    q_prev, q = 1, stream.digits[0]  # q_0, q_1
    for n in range(1, window):
        a_next = stream.digits[n]
        rows.append((n, a_next, q, exceeds_threshold(a_next, q, alpha)))
        q_prev, q = q, a_next * q + q_prev
    hits = tuple(n for n, _, _, hit in rows if hit)
    return GoodHits(alpha, window, hits, tuple(rows))


def no_hit_threshold(bound: int, alpha) -> int:
    """Index ``n0`` beyond which a stream with all ``a_n <= bound`` has no hits.

    Uses ``q_n >= F_{n+1}`` (Fibonacci): a hit needs ``bound > q_n^(alpha-2)``,
    impossible once ``F_{n+1}^(num - 2 den) >= bound^den``.
    """
    alpha = parse_alpha(alpha)
    if alpha == 2:
        raise ValueError("alpha = 2 has no finite threshold")
    num, den = alpha.numerator, alpha.denominator
    target = bound ** den
    n, f_prev, f = 0, 0, 1  # f = F_{n+1}
    while f ** (num - 2 * den) < target:
        n += 1
        f_prev, f = f, f + f_prev
    return n

