"""
Run configuration: one TOML document per experiment.

Top-level keys select the protocol, scenario, seed and signature scheme;
tables carry the roster (`[[nodes]]`), the network model (`[network]`), the
adversary (`[adversary]`) and per-protocol settings (`[microchain]`,
`[microchain.rewards]`, `[bft]`, `[nakamoto]`, `[sweep]`). Every table
rejects keys it does not know.
"""

import tomllib
from enum import StrEnum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.core.bft import BftProtocol, QuorumInfeasible, check_roster
from src.core.microchain import MicrochainParams
from src.core.nakamoto import DEFAULT_DIFFICULTY_MS, REFERENCE_DEPTH, MinerConfig, MinerPolicy
from src.core.netsim import AdversarySpec, SynchronyModel
from src.core.run.errors import ConfigError

KB = 2**10
MB = 2**20


class Protocol(StrEnum):
    MICROCHAIN = 'microchain'
    PBFT = 'pbft'
    VR = 'vr'
    OM = 'om'
    NAKAMOTO = 'nakamoto'


DEFAULT_SCENARIO = {
    Protocol.MICROCHAIN: 'microchain',
    Protocol.PBFT: 'pbft',
    Protocol.VR: 'vr',
    Protocol.OM: 'om',
    Protocol.NAKAMOTO: 'mining-share',
}


class NodeConfig(BaseModel):
    """One roster entry; each protocol reads the fields it understands."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    key_seed: str | None = None
    credit: int = Field(default=1, ge=0)
    hash_power: float = Field(default=1.0, ge=0)
    policy: MinerPolicy = MinerPolicy.HONEST
    equivocating: bool = False


class BftSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    f: int = Field(default=1, ge=0)
    ops: list[str] = Field(default_factory=lambda: ['op-1'], min_length=1)
    timeout_ms: float | None = Field(default=None, gt=0)
    until_ms: float = Field(default=30_000.0, gt=0)
    checkpoint_interval: int = Field(default=100, gt=0)
    # PBFT client acceptance; 2f + 1 matching replies when unset
    reply_quorum: int | None = Field(default=None, gt=0)
    commander_value: str = 'attack'


class NakamotoSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    difficulty_ms: float = Field(default=DEFAULT_DIFFICULTY_MS, gt=0)
    blocks: int = Field(default=100, gt=0)
    depth: int = Field(default=REFERENCE_DEPTH, ge=0)
    trials: int = Field(default=100_000, gt=0)
    race_blocks: int = Field(default=100_000, gt=0)
    revenue_blocks: int = Field(default=200_000, gt=0)


def _default_complexity_sizes() -> dict[str, list[int]]:
    return {
        'om': [4, 7, 10, 13],
        'pbft': [4, 7, 10, 13, 16],
        'vr': [5, 9, 13, 17],
        'nakamoto': [4, 8, 12, 16],
    }


class SweepSettings(BaseModel):
    """Parameter grids of the sweep scenarios."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    committee_sizes: list[int] = Field(default_factory=lambda: [4, 8, 12, 16], min_length=1)
    block_sizes: list[int] = Field(
        default_factory=lambda: [512 * KB, 1 * MB, 2 * MB, 4 * MB], min_length=1
    )
    airtime_ms: float = Field(default=10.0, gt=0)
    link_delay_ms: float = Field(default=2.0, gt=0)
    bandwidth_bytes_per_ms: float = Field(default=10.0 * KB, gt=0)
    congestion_window_bytes: float = Field(default=5000.0 * KB, gt=0)
    probabilities: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.3, 0.5])
    depths: list[int] = Field(default_factory=lambda: [1, 2, 3])
    alphas: list[float] = Field(
        default_factory=lambda: [0.1, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]
    )
    gamma: float = Field(default=0.0, ge=0, le=1)
    om_faults: list[int] = Field(default_factory=lambda: [1, 2])
    complexity_sizes: dict[str, list[int]] = Field(default_factory=_default_complexity_sizes)

    @model_validator(mode='after')
    def _check_grids(self) -> 'SweepSettings':
        if any(k <= 0 for k in self.committee_sizes):
            raise ValueError('committee sizes must be positive')
        if any(size <= 0 for size in self.block_sizes):
            raise ValueError('block sizes must be positive')
        if any(not 0 <= p <= 1 for p in self.probabilities):
            raise ValueError('probabilities must lie in [0, 1]')
        if any(not 0 <= a <= 0.5 for a in self.alphas):
            raise ValueError('selfish-mining shares must lie in [0, 0.5]')
        if any(m < 0 for m in self.depths):
            raise ValueError('depths must be non-negative')
        unknown = set(self.complexity_sizes) - {'om', 'pbft', 'vr', 'nakamoto'}
        if unknown:
            raise ValueError(f'no complexity sweep for {sorted(unknown)}')
        return self


def _default_nodes() -> list[NodeConfig]:
    return [NodeConfig() for _ in range(4)]


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    protocol: Protocol = Protocol.MICROCHAIN
    scenario: str | None = None
    seed: int = Field(ge=0, lt=2**64)
    runs: int = Field(default=1, gt=0)
    scheme: Literal['ed25519', 'sim-hash'] | None = None
    workers: int | None = Field(default=None, gt=0)
    output_dir: Path | None = None
    nodes: list[NodeConfig] = Field(default_factory=_default_nodes, min_length=1)
    network: SynchronyModel = Field(default_factory=SynchronyModel)
    adversary: AdversarySpec = Field(default_factory=AdversarySpec)
    microchain: MicrochainParams = Field(default_factory=MicrochainParams)
    bft: BftSettings = Field(default_factory=BftSettings)
    nakamoto: NakamotoSettings = Field(default_factory=NakamotoSettings)
    sweep: SweepSettings = Field(default_factory=SweepSettings)

    @model_validator(mode='after')
    def _check_roster(self) -> 'SimConfig':
        n = len(self.nodes)
        if self.protocol in (Protocol.PBFT, Protocol.VR):
            try:
                check_roster(BftProtocol(self.protocol.value), n, self.bft.f)
            except QuorumInfeasible as exc:
                raise ValueError(str(exc))
        if self.protocol == Protocol.MICROCHAIN and not any(node.credit for node in self.nodes):
            raise ValueError('at least one validator needs positive credit')
        if self.protocol == Protocol.NAKAMOTO and not any(node.hash_power for node in self.nodes):
            raise ValueError('at least one miner needs positive hash power')
        stray = [i for i in self.adversary.behaviors if not 0 <= i <= n]
        if stray:
            raise ValueError(f'adversary names nodes outside the roster: {stray}')
        return self

    @property
    def scenario_name(self) -> str:
        return self.scenario or DEFAULT_SCENARIO[self.protocol]

    @property
    def credits(self) -> list[int]:
        return [node.credit for node in self.nodes]

    @property
    def equivocating(self) -> frozenset[int]:
        return frozenset(i for i, node in enumerate(self.nodes) if node.equivocating)

    @property
    def key_seeds(self) -> list[str] | None:
        if all(node.key_seed is None for node in self.nodes):
            return None
        return [node.key_seed or f'validator-{i}' for i, node in enumerate(self.nodes)]

    @property
    def miners(self) -> list[MinerConfig]:
        return [MinerConfig(hash_power=node.hash_power, policy=node.policy) for node in self.nodes]

    def with_seed(self, seed: int) -> 'SimConfig':
        return self.model_copy(update={'seed': seed})


def _dotted(loc: tuple[int | str, ...]) -> str:
    return '.'.join(str(part) for part in loc)


def parse_config(raw: dict[str, Any], source: Path | None = None) -> SimConfig:
    """
    Validate an already-parsed configuration document.

    Raises:
        ConfigError: With one (dotted key path, message) issue per violation.
    """
    try:
        return SimConfig.model_validate(raw)
    except ValidationError as exc:
        issues = [(_dotted(error['loc']), error['msg']) for error in exc.errors()]
        raise ConfigError(source, issues)


def load_config(path: Path) -> SimConfig:
    """
    Read and validate a TOML run configuration, filling defaults.

    Args:
        path: The TOML file.

    Returns:
        The validated SimConfig.

    Raises:
        ConfigError: If the file is missing, is not TOML, or fails validation.
    """
    try:
        with path.open('rb') as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError:
        raise ConfigError(path, [('', 'file not found')])
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(path, [('', f'not valid TOML ({exc})')])
    return parse_config(raw, source=path)
