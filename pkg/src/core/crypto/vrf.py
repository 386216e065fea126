"""Verifiable random function built from a deterministic signature."""

from pydantic import BaseModel, ConfigDict, Field

from src.core.crypto.hashing import hash_data, leading_u64
from src.core.crypto.signing import sign, verify

TWO_POW_64 = 1 << 64


class VrfOutput(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: int = Field(ge=0, lt=TWO_POW_64)
    proof: bytes

    @property
    def fraction(self) -> float:
        """The output as a uniform fraction in [0, 1)."""
        return self.value / TWO_POW_64


def vrf_evaluate(secret: bytes, data: bytes, scheme: str | None = None) -> VrfOutput:
    """
    Evaluate the VRF on `data`.

    value is the first 8 bytes (big-endian) of hash(signature); the signature
    itself is the proof.
    """
    proof = sign(secret, data, scheme)
    return VrfOutput(value=leading_u64(hash_data(proof)), proof=proof)


def vrf_verify(
    public: bytes, data: bytes, output: VrfOutput, scheme: str | None = None
) -> bool:
    if not verify(public, data, output.proof, scheme):
        return False
    return leading_u64(hash_data(output.proof)) == output.value
