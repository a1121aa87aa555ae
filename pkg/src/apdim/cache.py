"""Content-addressed store of run artifacts keyed by config digest and version."""
from __future__ import annotations

import os
import shutil
import tempfile
from pathlib import Path


def default_root() -> Path:
    env = os.environ.get("APDIM_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "apdim"


class ResultCache:
    """One directory per key; entries are published with a single rename."""

    def __init__(self, root=None):
        self.root = Path(root) if root is not None else default_root()

    def path(self, key: str) -> Path:
        return self.root / key[:2] / key

    def get(self, key: str) -> dict[str, bytes] | None:
        entry = self.path(key)
        if not entry.is_dir():
            return None
        return {p.name: p.read_bytes() for p in sorted(entry.iterdir()) if p.is_file()}

    def put(self, key: str, files: dict[str, bytes]) -> Path:
        entry = self.path(key)
        if entry.is_dir():
            return entry
        entry.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(dir=entry.parent, prefix=f".{key[:8]}."))
        try:
            for name, data in files.items():
                (tmp / name).write_bytes(data)
            try:
                os.rename(tmp, entry)
            except OSError:
                # another writer published the same key first
                if not entry.is_dir():
                    raise
                shutil.rmtree(tmp)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        return entry
