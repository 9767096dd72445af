"""Dual-decomposition solver for the joint pairing/assignment/power problem.

The total-power constraint is priced with a multiplier mu. At fixed mu the
inner problem separates: optimal powers are water-filling levels, and the
choice of mode/user for every candidate pair (k, l) reduces to a score
matrix whose maximum-weight perfect matching gives the pairing. Bisection on
mu (the subgradient p_tot - allocated power is monotone in mu) either hits a
stationary point or converges to within eps, in which case the solution at
the upper bracket end is feasible and carries a duality-gap certificate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import pair_gains
from .assignment import solve_max_assignment
from .channel import GainTable

LOG2E = math.log2(math.e)


class Protocol(Enum):
    PROPOSED = "proposed"      # second-slot source-relay beamforming
    BENCHMARK1 = "bp1"         # relay only in the second slot
    BENCHMARK2 = "bp2"         # additionally fixed identity pairing

    @classmethod
    def parse(cls, name: str) -> "Protocol":
        for p in cls:
            if p.value == name:
                return p
        raise ValueError(f"unknown protocol {name!r}")


class SolveMode(Enum):
    EXACT_STATIONARY = "exact-stationary"
    APPROX_UPPER_BOUND = "approx-upper-bound"


class InfeasibleAllocationError(ValueError):
    """An allocation violates a named feasibility constraint."""

    def __init__(self, constraint: str, detail: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {detail}")


@dataclass(frozen=True)
class PairGainTable:
    """Effective gains for every (k, l, u) plus the per-slot direct gains."""

    protocol: Protocol
    g_eff: np.ndarray     # (K, K, U)
    direct_1: np.ndarray  # (K, U) first-slot direct gains
    direct_2: np.ndarray  # (K, U) second-slot direct gains

    @property
    def K(self) -> int:
        return self.g_eff.shape[0]

    @property
    def U(self) -> int:
        return self.g_eff.shape[2]


@dataclass(frozen=True)
class PairAssignment:
    k: int
    l: int
    user: int
    p_s1: float
    p_s2: float
    p_r: float

    @property
    def total(self) -> float:
        return self.p_s1 + self.p_s2 + self.p_r


@dataclass(frozen=True)
class DirectAssignment:
    subcarrier: int
    user: int
    power: float


@dataclass
class Allocation:
    pairs: list[PairAssignment]
    directs_1: list[DirectAssignment]
    directs_2: list[DirectAssignment]

    def total_power(self) -> float:
        return (sum(p.total for p in self.pairs)
                + sum(d.power for d in self.directs_1)
                + sum(d.power for d in self.directs_2))


@dataclass
class SolveReport:
    wsr: float
    mode: SolveMode
    delta: float
    n_sp: int
    mu_final: float
    iterations: int
    trace: list[tuple[float, float]] = field(default_factory=list)


def build_pair_gain_table(gains: GainTable, protocol: Protocol) -> PairGainTable:
    """Effective gain of every (k, l, u) combination under the protocol."""
    g_sr = gains.g_sr[:, None, None]        # (K, 1, 1)
    g_su_k = gains.g_su[:, None, :]         # (K, 1, U)
    g_su_l = gains.g_su[None, :, :]         # (1, K, U)
    g_ru_l = gains.g_ru[None, :, :]
    if protocol is Protocol.PROPOSED:
        second = g_su_l + g_ru_l
    else:
        second = np.broadcast_to(g_ru_l, g_su_l.shape)
    cond = np.minimum(g_sr, second) > g_su_k
    delta = g_sr - g_su_k
    with np.errstate(divide="ignore", invalid="ignore"):
        relayed = g_sr * second / (delta + second)
    g_eff = np.where(cond, relayed, np.minimum(g_sr, g_su_k))
    return PairGainTable(protocol=protocol, g_eff=np.ascontiguousarray(g_eff),
                         direct_1=gains.g_su, direct_2=gains.g_su)


def lambda_power(w: float, mu: float, g: float) -> float:
    """Water-filling power [w*log2(e)/(2*mu) - 1/g]+ at price mu."""
    if w <= 0:
        raise ValueError(f"weight must be positive, got {w}")
    if mu <= 0:
        raise ValueError(f"multiplier must be positive, got {mu}")
    if g <= 0:
        return 0.0
    return max(w * LOG2E / (2.0 * mu) - 1.0 / g, 0.0)


def mu_upper_bound(K: int, w_max: float, p_tot: float) -> float:
    """Initial upper bracket for the optimal multiplier."""
    if K < 1 or w_max <= 0 or p_tot <= 0:
        raise ValueError("K, w_max and p_tot must all be positive")
    return K * w_max * LOG2E / p_tot


def _lambda_array(w: np.ndarray, mu: float, g: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        inv = np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf)
    return np.maximum(w * LOG2E / (2.0 * mu) - inv, 0.0)


def _metric_array(w: np.ndarray, mu: float,
                  g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel Lagrangian contribution w*R(g*lam) - mu*lam and lam."""
    lam = _lambda_array(w, mu, g)
    return w * 0.5 * np.log2(1.0 + g * lam) - mu * lam, lam


@dataclass
class LrpMetrics:
    """Per-candidate scores at a fixed multiplier.

    The direct-mode score of a virtual pair (k, l) separates into a slot-1
    term depending on (k, a) and a slot-2 term depending on (l, b), so the
    full (k, l, a, b) tensor is never formed.
    """

    a_pair: np.ndarray        # (K, K, U) relay-aided scores
    lam_pair: np.ndarray      # (K, K, U) matching pair powers
    d1_term: np.ndarray       # (K, U) slot-1 direct scores
    d1_lam: np.ndarray        # (K, U)
    d2_term: np.ndarray       # (K, U) slot-2 direct scores
    d2_lam: np.ndarray        # (K, U)
    c: np.ndarray             # (K, K) best score per candidate pair


def lrp_metrics(table: PairGainTable, weights: np.ndarray,
                mu: float) -> LrpMetrics:
    if mu <= 0:
        raise ValueError(f"multiplier must be positive, got {mu}")
    w = np.asarray(weights, dtype=float)
    a_pair, lam_pair = _metric_array(w[None, None, :], mu, table.g_eff)
    d1_term, d1_lam = _metric_array(w[None, :], mu, table.direct_1)
    d2_term, d2_lam = _metric_array(w[None, :], mu, table.direct_2)
    best_pair = a_pair.max(axis=2)
    direct_kl = d1_term.max(axis=1)[:, None] + d2_term.max(axis=1)[None, :]
    c = np.maximum(best_pair, direct_kl)
    return LrpMetrics(a_pair=a_pair, lam_pair=lam_pair,
                      d1_term=d1_term, d1_lam=d1_lam,
                      d2_term=d2_term, d2_lam=d2_lam, c=c)


@dataclass
class LrpOutcome:
    """Inner-maximization solution at one multiplier, in compact form."""

    mu: float
    perm: np.ndarray         # (K,) second-slot subcarrier matched to k
    relay_mask: np.ndarray   # (K,) True where the matched pair is relay-aided
    pair_user: np.ndarray    # (K,)
    pair_power: np.ndarray   # (K,) total pair power
    d1_user: np.ndarray      # (K,) per first-slot subcarrier
    d1_power: np.ndarray
    d2_user: np.ndarray      # (K,) per second-slot subcarrier
    d2_power: np.ndarray
    l_value: float
    subgrad: float


def solve_lrp(table: PairGainTable, weights, mu: float, p_tot: float,
              bp2_same_user: bool = True) -> LrpOutcome:
    """Maximize the Lagrangian at fixed mu; returns choice and subgradient."""
    w = np.asarray(weights, dtype=float)
    m = lrp_metrics(table, w, mu)
    K = table.K
    ks = np.arange(K)

    if table.protocol is Protocol.BENCHMARK2:
        perm = ks.copy()
        pair_best = m.a_pair[ks, ks, :].max(axis=1)
        pair_user = m.a_pair[ks, ks, :].argmax(axis=1)
        if bp2_same_user:
            combined = m.d1_term + m.d2_term
            direct_best = combined.max(axis=1)
            d1_user = combined.argmax(axis=1)
            d2_user = d1_user.copy()
        else:
            direct_best = m.d1_term.max(axis=1) + m.d2_term.max(axis=1)
            d1_user = m.d1_term.argmax(axis=1)
            d2_user = m.d2_term.argmax(axis=1)
        chosen = np.maximum(pair_best, direct_best)
    else:
        d1_user = m.d1_term.argmax(axis=1)
        d2_user = m.d2_term.argmax(axis=1)
        perm = np.asarray(solve_max_assignment(m.c).perm, dtype=int)
        pair_best = m.a_pair[ks, perm, :].max(axis=1)
        pair_user = m.a_pair[ks, perm, :].argmax(axis=1)
        direct_best = m.d1_term.max(axis=1) + m.d2_term.max(axis=1)[perm]
        chosen = np.maximum(pair_best, direct_best)

    # Relay-aided wins ties; argmax already prefers the lowest user index.
    relay_mask = pair_best >= direct_best
    pair_power = m.lam_pair[ks, perm, pair_user]
    d1_power = m.d1_lam[ks, d1_user]
    d2_power = m.d2_lam[ks, d2_user]

    total = float(np.where(relay_mask, pair_power,
                           d1_power + d2_power[perm]).sum())
    l_value = mu * p_tot + float(chosen.sum())
    return LrpOutcome(mu=mu, perm=perm, relay_mask=relay_mask,
                      pair_user=pair_user, pair_power=pair_power,
                      d1_user=d1_user, d1_power=d1_power,
                      d2_user=d2_user, d2_power=d2_power,
                      l_value=l_value, subgrad=p_tot - total)


def _materialize(outcome: LrpOutcome, gains: GainTable,
                 protocol: Protocol) -> Allocation:
    """Turn a compact LRP solution into an explicit feasible allocation."""
    split = (pair_gains.optimal_split_proposed
             if protocol is Protocol.PROPOSED
             else pair_gains.optimal_split_benchmark)
    pairs: list[PairAssignment] = []
    directs_1: list[DirectAssignment] = []
    directs_2: list[DirectAssignment] = []
    for k in range(outcome.perm.size):
        l = int(outcome.perm[k])
        if outcome.relay_mask[k]:
            u = int(outcome.pair_user[k])
            g = pair_gains.LinkGains(float(gains.g_sr[k]),
                                     float(gains.g_su[k, u]),
                                     float(gains.g_su[l, u]),
                                     float(gains.g_ru[l, u]))
            s = split(g, float(outcome.pair_power[k]))
            pairs.append(PairAssignment(k, l, u, s.p_s1, s.p_s2, s.p_r))
        else:
            directs_1.append(DirectAssignment(k, int(outcome.d1_user[k]),
                                              float(outcome.d1_power[k])))
            directs_2.append(DirectAssignment(l, int(outcome.d2_user[l]),
                                              float(outcome.d2_power[l])))
    return Allocation(pairs=pairs, directs_1=directs_1, directs_2=directs_2)


def evaluate_wsr(alloc: Allocation, gains: GainTable, weights,
                 protocol: Protocol, p_tot: float) -> float:
    """Audit an allocation and recompute its weighted sum rate from scratch."""
    w = np.asarray(weights, dtype=float)
    K = gains.g_sr.size

    slot1 = sorted([p.k for p in alloc.pairs]
                   + [d.subcarrier for d in alloc.directs_1])
    if slot1 != list(range(K)):
        raise InfeasibleAllocationError(
            "ofdma-slot1", f"first-slot subcarrier cover is {slot1}")
    slot2 = sorted([p.l for p in alloc.pairs]
                   + [d.subcarrier for d in alloc.directs_2])
    if slot2 != list(range(K)):
        raise InfeasibleAllocationError(
            "ofdma-slot2", f"second-slot subcarrier cover is {slot2}")

    powers = ([p.p_s1 for p in alloc.pairs] + [p.p_s2 for p in alloc.pairs]
              + [p.p_r for p in alloc.pairs]
              + [d.power for d in alloc.directs_1 + alloc.directs_2])
    if any(x < 0 for x in powers):
        raise InfeasibleAllocationError(
            "power-nonnegative", f"minimum power is {min(powers)}")
    total = alloc.total_power()
    if total > p_tot * (1.0 + 1e-9):
        raise InfeasibleAllocationError(
            "power-budget", f"allocated {total} > budget {p_tot}")

    gain_fn = (pair_gains.effective_gain_proposed
               if protocol is Protocol.PROPOSED
               else pair_gains.effective_gain_benchmark)
    wsr = 0.0
    for p in alloc.pairs:
        g = pair_gains.LinkGains(float(gains.g_sr[p.k]),
                                 float(gains.g_su[p.k, p.user]),
                                 float(gains.g_su[p.l, p.user]),
                                 float(gains.g_ru[p.l, p.user]))
        g_eff = gain_fn(g)
        target = g_eff * p.total
        achieved = min(g.g_sr * p.p_s1,
                       pair_gains.snr_relay_aided(g, p.p_s1, p.p_s2, p.p_r))
        if abs(achieved - target) > max(1e-9 * target, 1e-12):
            raise InfeasibleAllocationError(
                "pair-split",
                f"pair ({p.k},{p.l}) reaches SNR {achieved}, expected {target}")
        wsr += w[p.user] * pair_gains.rate(target)
    for d in alloc.directs_1:
        wsr += w[d.user] * pair_gains.rate(float(gains.g_su[d.subcarrier, d.user])
                                           * d.power)
    for d in alloc.directs_2:
        wsr += w[d.user] * pair_gains.rate(float(gains.g_su[d.subcarrier, d.user])
                                           * d.power)
    return wsr


def _refill(outcome: LrpOutcome, table: PairGainTable, weights,
            p_tot: float) -> LrpOutcome:
    """Spend residual budget by water-filling at the fixed assignment."""
    w = np.asarray(weights, dtype=float)
    K = table.K
    ks = np.arange(K)
    ch_w, ch_g = [], []
    for k in range(K):
        l = int(outcome.perm[k])
        if outcome.relay_mask[k]:
            u = int(outcome.pair_user[k])
            ch_w.append(w[u])
            ch_g.append(float(table.g_eff[k, l, u]))
        else:
            ch_w.append(w[int(outcome.d1_user[k])])
            ch_g.append(float(table.direct_1[k, int(outcome.d1_user[k])]))
            ch_w.append(w[int(outcome.d2_user[l])])
            ch_g.append(float(table.direct_2[l, int(outcome.d2_user[l])]))
    ch_w = np.asarray(ch_w)
    ch_g = np.asarray(ch_g)
    if not np.any(ch_g > 0):
        return outcome

    def spent(mu):
        return float(_lambda_array(ch_w, mu, ch_g).sum())

    hi = float(ch_w.max()) * LOG2E * len(ch_w) / (2.0 * p_tot)
    while spent(hi) > p_tot:
        hi *= 2.0
    lo = hi
    while spent(lo) < p_tot:
        lo /= 2.0
        if lo < 1e-300:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spent(mid) > p_tot:
            lo = mid
        else:
            hi = mid
    mu = hi
    pair_power = np.where(
        outcome.relay_mask,
        _lambda_array(w[outcome.pair_user], mu,
                      table.g_eff[ks, outcome.perm, outcome.pair_user]), 0.0)
    d1_power = _lambda_array(w[outcome.d1_user], mu,
                             table.direct_1[ks, outcome.d1_user])
    d2_power = _lambda_array(w[outcome.d2_user], mu,
                             table.direct_2[ks, outcome.d2_user])
    return LrpOutcome(mu=outcome.mu, perm=outcome.perm,
                      relay_mask=outcome.relay_mask,
                      pair_user=outcome.pair_user, pair_power=pair_power,
                      d1_user=outcome.d1_user, d1_power=d1_power,
                      d2_user=outcome.d2_user, d2_power=d2_power,
                      l_value=outcome.l_value, subgrad=outcome.subgrad)


def solve(gains: GainTable, weights, p_tot: float, protocol: Protocol,
          eps: float = 1e-6, bp2_same_user: bool = True,
          refill: bool = False) -> tuple[Allocation, SolveReport]:
    """Full bisection solve; returns a feasible allocation and its report."""
    if p_tot <= 0:
        raise ValueError(f"p_tot must be positive, got {p_tot}")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if gains.g_sr.size < 1:
        raise ValueError("empty gain table")
    w = np.asarray(weights, dtype=float)
    if w.size != gains.g_su.shape[1]:
        raise ValueError("weights length does not match user count")

    table = build_pair_gain_table(gains, protocol)
    mu_lo = 0.0
    mu_hi = mu_upper_bound(table.K, float(w.max()), p_tot)
    zero_tol = 1e-9 * p_tot
    iterations = 0
    trace: list[tuple[float, float]] = []
    exact: LrpOutcome | None = None

    while mu_hi - mu_lo > eps:
        mu_mid = 0.5 * (mu_lo + mu_hi)
        outcome = solve_lrp(table, w, mu_mid, p_tot, bp2_same_user)
        iterations += 1
        trace.append((mu_mid, outcome.subgrad))
        if abs(outcome.subgrad) <= zero_tol:
            exact = outcome
            break
        if outcome.subgrad > 0:
            mu_hi = mu_mid
        else:
            mu_lo = mu_mid

    if exact is not None:
        final = exact
        mode = SolveMode.EXACT_STATIONARY
    else:
        final = solve_lrp(table, w, mu_hi, p_tot, bp2_same_user)
        mode = SolveMode.APPROX_UPPER_BOUND
    mu_final = final.mu

    if refill:
        final = _refill(final, table, w, p_tot)
    alloc = _materialize(final, gains, protocol)
    wsr = evaluate_wsr(alloc, gains, w, protocol, p_tot)

    # Certified gap of the returned allocation: the optimum is at most the
    # dual value L(mu_final), so slack = L(mu_final) - wsr bounds the
    # shortfall. Without refill this equals mu_final * subgrad(mu_final)
    # exactly; refill raises wsr and tightens the certificate.
    slack = final.l_value - wsr
    if mode is SolveMode.EXACT_STATIONARY or slack <= 0.0:
        delta = 0.0
    elif wsr > 0.0:
        delta = slack / wsr
    else:
        delta = math.inf
    report = SolveReport(wsr=wsr, mode=mode, delta=delta,
                         n_sp=len(alloc.pairs), mu_final=mu_final,
                         iterations=iterations, trace=trace)
    return alloc, report
