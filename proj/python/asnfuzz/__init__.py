"""Schema-driven ASN.1 UPER fuzzer."""

import json

from ._asnfuzz import (
    AsnfuzzError,
    Schema,
    apply_plan,
    extract,
    generate_pdu,
    mutate_pdu,
    perturb,
    plan_from_seed,
)
from . import _asnfuzz

__all__ = [
    "AsnfuzzError",
    "Schema",
    "apply_plan",
    "decode",
    "encode",
    "extract",
    "generate_pdu",
    "mutate_pdu",
    "parse",
    "perturb",
    "plan_from_seed",
]


def parse(text):
    return Schema(text)


def encode(schema, type_name, value):
    """Encode a JSON-shaped value; returns (hex, bit_length)."""
    return _asnfuzz.encode(schema, type_name, json.dumps(value))


def decode(schema, type_name, hex_pdu, bit_length=None):
    return json.loads(_asnfuzz.decode(schema, type_name, hex_pdu, bit_length))
