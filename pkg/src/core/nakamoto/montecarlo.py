"""Fast Monte-Carlo oracles: mining races, overtake trials and selfish-mining revenue."""

import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.nakamoto.errors import InvalidRaceParameters, InvalidWeights


class RaceResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    wins: tuple[int, ...]
    mean_interval_ms: float

    @property
    def shares(self) -> tuple[float, ...]:
        total = sum(self.wins)
        return tuple(w / total for w in self.wins)


def mining_race(
    weights: Sequence[float], blocks: int, difficulty_ms: float, rng: np.random.Generator
) -> RaceResult:
    """Draw `blocks` rounds of the exponential mining race in one batch."""
    w = np.asarray(weights, dtype=float)
    if (w < 0).any() or w.sum() <= 0:
        raise InvalidWeights(list(weights))
    active = np.flatnonzero(w > 0)
    scales = difficulty_ms * w.sum() / w[active]
    times = rng.exponential(scales, size=(blocks, len(active)))
    winners = active[times.argmin(axis=1)]
    wins = np.bincount(winners, minlength=len(w))
    return RaceResult(
        wins=tuple(int(x) for x in wins), mean_interval_ms=float(times.min(axis=1).mean())
    )


class OvertakeResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float
    m: int
    trials: int
    successes: int
    unresolved: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    @property
    def stderr(self) -> float:
        return math.sqrt(max(self.rate * (1 - self.rate), 1e-12) / self.trials)


def overtake_trials(
    p: float,
    m: int,
    trials: int,
    rng: np.random.Generator,
    *,
    max_steps: int = 100_000,
    tolerance: float = 1e-12,
) -> OvertakeResult:
    """
    Monte-Carlo of an attacker starting m blocks behind the honest chain.

    Each step one block is found, the attacker's with probability p. A trial
    succeeds when the deficit reaches zero and fails once the deficit grows
    so large that catching up is less likely than `tolerance`; trials still
    open after `max_steps` count as unresolved failures.
    """
    if not 0.0 <= p <= 1.0 or m < 0:
        raise InvalidRaceParameters(p, m)
    open_deficits = np.full(trials if m > 0 else 0, m, dtype=np.int64)
    successes = trials - open_deficits.size
    if 0 < p < 0.5:
        give_up = m + math.ceil(math.log(tolerance) / math.log(p / (1 - p)))
    elif p == 0:
        give_up = m + 1
    else:
        give_up = None
    for _ in range(max_steps):
        if not open_deficits.size:
            break
        attacker = rng.random(open_deficits.size) < p
        open_deficits += np.where(attacker, -1, 1)
        caught_up = open_deficits == 0
        successes += int(caught_up.sum())
        keep = ~caught_up
        if give_up is not None:
            keep &= open_deficits < give_up
        open_deficits = open_deficits[keep]
    return OvertakeResult(
        p=p, m=m, trials=trials, successes=successes, unresolved=int(open_deficits.size)
    )


class SelfishRevenue(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    gamma: float
    attacker_blocks: int
    honest_blocks: int
    orphaned: int

    @property
    def share(self) -> float:
        return self.attacker_blocks / max(1, self.attacker_blocks + self.honest_blocks)


def selfish_revenue(
    alpha: float, blocks: int, rng: np.random.Generator, *, gamma: float = 0.0
) -> SelfishRevenue:
    """
    Main-chain share of a selfish miner with hash share `alpha`.

    The attacker keeps a private branch, answers an honest block at lead 1
    with a tie race (won by honest miners mining on its branch with
    probability `gamma`), publishes everything at lead 2, and publishes one
    block per honest block above that.
    """
    finds = rng.random(blocks) < alpha
    tie_draws = rng.random(blocks) < gamma
    attacker = honest = orphaned = 0
    lead = 0
    tie = False
    for i, attacker_found in enumerate(finds):
        if tie:
            if attacker_found:
                attacker += 2
            elif tie_draws[i]:
                attacker += 1
                honest += 1
            else:
                honest += 2
            orphaned += 1
            tie = False
            continue
        if attacker_found:
            lead += 1
            continue
        match lead:
            case 0:
                honest += 1
            case 1:
                tie = True
                lead = 0
            case 2:
                attacker += 2
                orphaned += 1
                lead = 0
            case _:
                attacker += 1
                orphaned += 1
                lead -= 1
    attacker += lead
    return SelfishRevenue(
        alpha=alpha,
        gamma=gamma,
        attacker_blocks=attacker,
        honest_blocks=honest,
        orphaned=orphaned,
    )
