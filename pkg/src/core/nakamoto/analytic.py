"""Closed-form mining probabilities and the exponential mining schedule."""

from collections.abc import Sequence
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.nakamoto.errors import InvalidRaceParameters, InvalidWeights

REFERENCE_DEPTH = 6


class MinerPolicy(StrEnum):
    HONEST = 'honest-gossip'
    SELFISH = 'selfish-mining'


class MinerConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    pk: bytes = b''
    hash_power: float = Field(default=1.0, ge=0)
    policy: MinerPolicy = MinerPolicy.HONEST

    @property
    def honest(self) -> bool:
        return self.policy == MinerPolicy.HONEST


class MiningSchedule(BaseModel):
    """Fixed difficulty, expressed as the mean network block interval."""

    model_config = ConfigDict(frozen=True)

    difficulty_ms: float = Field(gt=0)
    weights: tuple[float, ...]

    @model_validator(mode='after')
    def _positive_total(self) -> 'MiningSchedule':
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise InvalidWeights(list(self.weights))
        return self

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    def rate(self, i: int) -> float:
        """Block rate of miner i per ms."""
        return self.weights[i] / self.total_weight / self.difficulty_ms


def pow_win_prob(weights: Sequence[float], i: int) -> float:
    """
    Probability that miner i finds the next block: w_i / sum(w).

    Raises:
        InvalidWeights: If a weight is negative or all are zero.
    """
    if any(w < 0 for w in weights) or sum(weights) <= 0:
        raise InvalidWeights(list(weights))
    return weights[i] / sum(weights)


def attacker_overtake_prob(p: float, m: int) -> float:
    """
    Chance that an attacker holding share p ever makes up an m-block deficit.

    (p / (1 - p))^m, and 1.0 once p >= 0.5 (p = 1 included).

    Raises:
        InvalidRaceParameters: If p is outside [0, 1] or m is negative.
    """
    if not 0.0 <= p <= 1.0 or m < 0:
        raise InvalidRaceParameters(p, m)
    if p >= 0.5 or m == 0:
        return 1.0
    return (p / (1.0 - p)) ** m


def schedule_next_block(
    miner: MinerConfig,
    now: float,
    schedule: MiningSchedule,
    rng: np.random.Generator,
) -> float | None:
    """
    Time at which `miner` next finds a block, or None without hash power.

    Per-miner intervals are exponential with rate (w_i / sum w) / T, so the
    first finisher of a round is miner i with probability w_i / sum w and the
    network interval has mean T.
    """
    if miner.hash_power <= 0:
        return None
    rate = miner.hash_power / schedule.total_weight / schedule.difficulty_ms
    return now + float(rng.exponential(1.0 / rate))
