"""JSON run manifest: config snapshot, seeds, timestamps and output checksums."""
from dataclasses import dataclass, field
from datetime import datetime, timezone
import hashlib
import json
import os
import platform

import numpy as np
import scipy

from importlib import metadata


def sha256_file(path, chunk=1 << 20):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(chunk), b""):
            h.update(block)
    return h.hexdigest()


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command: str
    out_dir: str
    config: dict
    seeds: dict = field(default_factory=dict)  # run label -> per-realization seeds
    outputs: dict = field(default_factory=dict)  # relative path -> sha256
    status: str = "running"
    started: str = field(default_factory=_now)
    finished: str = None

    @property
    def path(self):
        return os.path.join(self.out_dir, f"manifest-{self.command}.json")

    def add_output(self, path):
        rel = os.path.relpath(path, self.out_dir)
        self.outputs[rel] = sha256_file(path)

    def add_seeds(self, label, seeds):
        self.seeds[label] = [int(s) for s in seeds]

    def to_dict(self):
        return {
            "command": self.command,
            "status": self.status,
            "started": self.started,
            "finished": self.finished,
            "code_version": _version(),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "config": self.config,
            "seeds": self.seeds,
            "outputs": dict(sorted(self.outputs.items())),
        }

    def write(self):
        os.makedirs(self.out_dir, exist_ok=True)
        tmp = self.path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, default=str)
        os.replace(tmp, self.path)

    def finalize(self, status="complete"):
        self.status = status
        self.finished = _now()
        self.write()


def load_manifest(path):
    with open(path) as fh:
        return json.load(fh)
