"""Deterministic JSON serialization shared by all certificate formats.

Every file carries a "version" field; dumps sort keys so identical data
always produces identical bytes.
"""

import json

import numpy as np

FORMAT_VERSION = 1


class _Encoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (set, frozenset)):
            return sorted(obj)
        return super().default(obj)


def dumps(obj):
    """Canonical bytes-stable JSON text for an object (version field added)."""
    payload = dict(obj)
    payload.setdefault("version", FORMAT_VERSION)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), cls=_Encoder)


def dump(obj, path):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load(path):
    with open(path) as fh:
        return json.load(fh)


def loads(text):
    return json.loads(text)
