"""Run manifests: what was run, on which input, with which parameters."""

from dataclasses import dataclass, field
import hashlib
import json
import logging
import time

from . import __version__

logger = logging.getLogger(__name__)


def digest_file(path):
    """sha256 of a file's bytes, or None without a file."""
    if path is None:
        return None
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            sha.update(block)
    return sha.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    input_digest: str = None
    parameters: dict = field(default_factory=dict)
    version: str = __version__
    started: float = field(default_factory=time.time)
    elapsed: float = None
    exit_code: int = None

    def finish(self, exit_code):
        self.elapsed = round(time.time() - self.started, 3)
        self.exit_code = exit_code
        return self

    def as_json(self):
        return {
            "subcommand": self.subcommand,
            "input_sha256": self.input_digest,
            "parameters": {k: _jsonable(v) for k, v in sorted(self.parameters.items())},
            "version": self.version,
            "elapsed_s": self.elapsed,
            "exit_code": self.exit_code,
        }

    def same_run(self, other):
        """Equal up to timing: such runs must produce identical result streams."""
        a, b = self.as_json(), other.as_json()
        for key in ("elapsed_s", "exit_code"):
            a.pop(key)
            b.pop(key)
        return a == b

    def write(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.as_json(), f, indent=2)
            f.write("\n")
        logger.debug("manifest written to %s", path)


def _jsonable(value):
    if isinstance(value, (list, tuple, set, frozenset)):
        return sorted(_jsonable(v) for v in value) if isinstance(value, (set, frozenset)) else [_jsonable(v) for v in value]
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    return str(value)
