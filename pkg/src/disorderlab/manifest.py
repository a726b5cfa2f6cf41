"""Run manifests: every CLI run emits a manifest.json recording the
resolved config, its hash, the seed, library versions, wall-clock time and
a checksum per output file.  Re-running with ``--config manifest.json``
reproduces byte-identical CSV/JSON payloads.
"""

from __future__ import annotations

import hashlib
import json
import os
import time

from . import __version__
from .config import canonical_text, config_hash

SCHEMA_VERSION = 1


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunWriter:
    """Collects output files for one run and writes the manifest."""

    def __init__(self, out_dir: str, command: str, cfg: dict):
        self.out_dir = out_dir
        self.command = command
        self.cfg = cfg
        self.outputs = []
        self.t0 = time.monotonic()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_text(self, name: str, text: str) -> str:
        path = self.path(name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.outputs.append(name)
        return path

    def write_json(self, name: str, obj) -> str:
        return self.write_text(
            name, json.dumps(obj, indent=1, sort_keys=True) + "\n")

    def write_csv(self, name: str, header: list, rows) -> str:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(
                repr(float(v)) if isinstance(v, float) else str(v)
                for v in row))
        return self.write_text(name, "\n".join(lines) + "\n")

    def register(self, name: str) -> None:
        """Track a file written by other means (plots)."""
        self.outputs.append(name)

    def finish(self) -> str:
        import numpy
        import scipy
        cfg_json = {k: (list(v) if isinstance(v, tuple) else v)
                    for k, v in self.cfg.items()}
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": cfg_json,
            "config_hash": config_hash(self.cfg),
            "config_text": canonical_text(self.cfg),
            "seed": self.cfg.get("seed", 0),
            "versions": {
                "disorderlab": __version__,
                "numpy": numpy.__version__,
                "scipy": scipy.__version__,
            },
            "wall_clock_s": time.monotonic() - self.t0,
            "outputs": {name: _sha256(self.path(name))
                        for name in self.outputs},
        }
        path = self.path("manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        return path
