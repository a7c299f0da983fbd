"""
Storage module for run artifacts and manifests.
"""
import json
import shutil
import hashlib
import logging
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from .. import __version__

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class RunStorage:
    """Manages one run's output directory.

    Files are written into a temporary sibling directory which is renamed onto
    the requested path by ``finalize``, so a reader never sees a half-written run.
    The manifest is written first and rewritten with file hashes at the end.
    """

    def __init__(self, out_dir: Path, command: str, config: Dict[str, Any], seed: Optional[int] = None):
        self.out_dir = Path(out_dir)
        self.out_dir.parent.mkdir(parents=True, exist_ok=True)
        self.work_dir = Path(tempfile.mkdtemp(prefix=f".{self.out_dir.name}.", dir=self.out_dir.parent))
        self.files: List[str] = []
        self.manifest: Dict[str, Any] = {
            "command": command,
            "version": __version__,
            "seed": seed,
            "config": config,
            "started": datetime.now(timezone.utc).isoformat(),
            "stages": [],
            "files": {},
        }
        self._write_manifest()

    def path(self, relative: str) -> Path:
        target = self.work_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def _register(self, relative: str) -> Path:
        if relative not in self.files:
            self.files.append(relative)
        return self.work_dir / relative

    def _write_manifest(self):
        with open(self.work_dir / "manifest.json", "w") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True, default=str)

    def write_csv(self, relative: str, frame: pd.DataFrame) -> Path:
        """Store a table with a fixed float format so reruns are byte-identical."""
        target = self.path(relative)
        frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
        return self._register(relative)

    def write_json(self, relative: str, data: Dict[str, Any]) -> Path:
        target = self.path(relative)
        with open(target, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True, default=str)
        return self._register(relative)

    def write_text(self, relative: str, text: str) -> Path:
        target = self.path(relative)
        target.write_text(text)
        return self._register(relative)

    def register(self, relative: str) -> Path:
        """Record a file some other writer (e.g. matplotlib) placed under ``path(relative)``."""
        return self._register(relative)

    def add_stage(self, **stage: Any):
        self.manifest["stages"].append(stage)

    def finalize(self, **extra: Any) -> Path:
        """Hash every emitted file, rewrite the manifest and move the run into place."""
        self.manifest.update(extra)
        self.manifest["finished"] = datetime.now(timezone.utc).isoformat()
        self.manifest["files"] = {
            relative: file_sha256(self.work_dir / relative) for relative in self.files
        }
        self._write_manifest()

        if self.out_dir.exists():
            shutil.rmtree(self.out_dir)
        self.work_dir.rename(self.out_dir)
        logger.info(f"Stored {len(self.files)} artifacts in {self.out_dir}")
        return self.out_dir

    def discard(self):
        shutil.rmtree(self.work_dir, ignore_errors=True)


def load_manifest(run_dir: Path) -> Optional[Dict[str, Any]]:
    """Retrieve the manifest for a finished run."""
    manifest_path = Path(run_dir) / "manifest.json"
    if not manifest_path.exists():
        return None
    with open(manifest_path) as f:
        return json.load(f)
