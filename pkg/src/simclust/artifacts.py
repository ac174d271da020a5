"""Run manifests and deterministic artifact writing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ValidationError

# keys that never change the content of a run
NON_SEMANTIC_KEYS = frozenset({"workers", "output_dir", "manifest", "error_json", "func", "command"})


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass(frozen=True)
class RunManifest:
    """Everything that determines a run's outputs.

    ``params`` holds the experiment settings (seed, Sinkhorn and simulation
    parameters, staffing universe, replication counts). Output location and
    worker count are recorded but excluded from the hash.
    """

    experiment: str
    params: dict = field(default_factory=dict)
    output_dir: str = ""

    def semantic(self) -> dict:
        return {"experiment": self.experiment,
                "params": {k: v for k, v in _jsonable(self.params).items()
                           if k not in NON_SEMANTIC_KEYS}}

    def digest(self) -> str:
        blob = json.dumps(self.semantic(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        doc = self.semantic()
        doc["manifest_hash"] = self.digest()
        return doc

    @classmethod
    def from_dict(cls, doc: dict, output_dir: str = "") -> "RunManifest":
        if "experiment" not in doc:
            raise ValidationError("manifest lacks an 'experiment' field")
        return cls(doc["experiment"], dict(doc.get("params", {})), output_dir)


def load_manifest(path: str | Path) -> dict:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read manifest ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid manifest JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    return doc


def dump_json(doc: Any) -> str:
    return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def write_json(path: str | Path, doc: dict, manifest: RunManifest | None = None) -> Path:
    path = Path(path)
    if manifest is not None:
        doc = dict(doc)
        doc["manifest_hash"] = manifest.digest()
    path.write_text(dump_json(doc))
    return path


def provenance(manifest: RunManifest | None) -> str | None:
    """Comment line embedded at the top of CSV artifacts."""
    return None if manifest is None else f"manifest {manifest.digest()}"
