"""Run persistence: stage flags, artifact checksums, locking."""

from __future__ import annotations

import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import ConfigError, DependencyError

RECORD_NAME = "run_record.json"
LOCK_NAME = ".lock"

STAGE_OF_COMMAND = {
    "preprocess": 1,
    "pair": 1,
    "train_gan": 2,
    "generate": 2,
    "eval_gen": 3,
    "explain": 4,
    "eval_seg": 5,
    "train_clf": 6,
}

COMMAND_DEPENDENCIES = {
    "preprocess": [],
    "pair": ["preprocess"],
    "train_gan": ["pair"],
    "generate": ["train_gan"],
    "eval_gen": ["generate"],
    "train_clf": ["generate"],
    "explain": ["train_clf"],
    "eval_seg": ["preprocess"],
}


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunRecord:
    run_id: str
    config_hash: str
    commands: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)

    @property
    def stages(self) -> dict[int, bool]:
        flags = {}
        for stage in range(1, 7):
            names = [c for c, s in STAGE_OF_COMMAND.items() if s == stage]
            flags[stage] = all(self.commands.get(c, {}).get("completed") for c in names)
        return flags

    def is_completed(self, command: str) -> bool:
        return bool(self.commands.get(command, {}).get("completed"))

    def outputs_of(self, command: str) -> list[dict]:
        return self.commands.get(command, {}).get("outputs", [])

    def mark_completed(self, command: str, run_dir: Path, outputs: list[Path]) -> None:
        entries = []
        for path in sorted(set(map(Path, outputs))):
            entries.append({
                "path": str(path.relative_to(run_dir)),
                "sha256": sha256_file(path),
            })
        self.commands[command] = {"completed": True, "outputs": entries}
        self.timestamps[command] = datetime.now(timezone.utc).isoformat()

    def artifacts_valid(self, command: str, run_dir: Path) -> bool:
        entry = self.commands.get(command)
        if not entry or not entry.get("completed"):
            return False
        for output in entry["outputs"]:
            path = run_dir / output["path"]
            if not path.is_file() or sha256_file(path) != output["sha256"]:
                return False
        return True

    def to_json(self) -> str:
        doc = {
            "run_id": self.run_id,
            "config_hash": self.config_hash,
            "stages": {str(k): v for k, v in self.stages.items()},
            "commands": self.commands,
            "timestamps": self.timestamps,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def save(self, run_dir: str | Path) -> None:
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        tmp = run_dir / (RECORD_NAME + ".tmp")
        tmp.write_text(self.to_json())
        os.replace(tmp, run_dir / RECORD_NAME)

    @classmethod
    def load(cls, run_dir: str | Path) -> "RunRecord":
        doc = json.loads((Path(run_dir) / RECORD_NAME).read_text())
        return cls(
            run_id=doc["run_id"],
            config_hash=doc["config_hash"],
            commands=doc.get("commands", {}),
            timestamps=doc.get("timestamps", {}),
        )

    @classmethod
    def open_or_create(cls, run_dir: str | Path, run_id: str, cfg_hash: str,
                       force: bool = False) -> "RunRecord":
        run_dir = Path(run_dir)
        if (run_dir / RECORD_NAME).exists():
            record = cls.load(run_dir)
            if record.config_hash != cfg_hash:
                if not force:
                    raise ConfigError(
                        f"run {run_id!r} was produced with config hash "
                        f"{record.config_hash}, current is {cfg_hash}; "
                        "pass --force to redo or choose a new --run id"
                    )
                record = cls(run_id=run_id, config_hash=cfg_hash)
            return record
        return cls(run_id=run_id, config_hash=cfg_hash)

    def require_dependencies(self, command: str) -> None:
        missing = [dep for dep in COMMAND_DEPENDENCIES.get(command, [])
                   if not self.is_completed(dep)]
        if missing:
            raise DependencyError(
                f"command {command!r} needs {missing[0]!r} "
                f"(stage {STAGE_OF_COMMAND[missing[0]]}) to run first"
            )


@contextmanager
def run_lock(run_dir: str | Path):
    """Single-writer lock per run directory; read-only commands skip it."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    lock = run_dir / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"run directory {run_dir} is locked by another command "
            f"(remove {lock} if that process is gone)"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        if lock.exists():
            lock.unlink()
