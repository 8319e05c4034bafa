"""Run-directory persistence: artifacts, manifest, lock and reload."""

from __future__ import annotations

import json
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Generator, List, Optional

from pydantic import ValidationError

from ..agents.models import (
    AgentRole,
    CriticReview,
    Hypothesis,
    HypothesisSource,
    HypothesisVerdict,
    PlannerPlan,
)
from ..errors import RunIntegrityError, RunLockedError
from ..gateway.ledger import dump_exchanges, read_exchanges
from ..logging_utils import LogComponent, get_logger
from .models import IterationRecord, LiteratureDigest, RunConfig, RunManifest, RunRecord

logger = get_logger("store", LogComponent.ORCHESTRATOR)

CONFIG_FILE = "config.json"
MANIFEST_FILE = "manifest.json"
HYPOTHESES_FILE = "hypotheses.jsonl"
LOCK_FILE = ".lock"
STAGES_FILE = "stages.jsonl"
EXCHANGES_FILE = "exchanges.jsonl"


def _json_text(payload: Any, sort_keys: bool = False) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=sort_keys) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def _lock_is_stale(path: Path) -> bool:
    """True when the lock file names a process that no longer exists."""
    try:
        pid = int(path.read_text(encoding="ascii").strip())
    except FileNotFoundError:
        return True
    except (OSError, ValueError):
        # empty or half-written: the owner may still be writing its pid
        return False
    if pid <= 0:
        return False
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return True
    except PermissionError:
        return False
    return False


def _hypothesis_item(hypothesis: Hypothesis) -> Dict[str, Any]:
    item: Dict[str, Any] = dict(hypothesis.wire())
    if hypothesis.origin is not None:
        item["origin"] = hypothesis.origin.model_dump(mode="json")
    return item


class RunStore:
    """Owns one run directory; a single writer at a time via an O_EXCL lock file."""

    def __init__(self, run_dir: Path | str):
        self.run_dir = Path(run_dir)
        self._next_seq = self._scan_max_seq() + 1

    @classmethod
    def create(cls, output_dir: Path | str, run_id: str) -> "RunStore":
        run_dir = Path(output_dir) / run_id
        run_dir.parent.mkdir(parents=True, exist_ok=True)
        try:
            run_dir.mkdir()
        except FileExistsError:
            raise RunIntegrityError("Run directory already exists", str(run_dir)) from None
        return cls(run_dir)

    def iteration_dir(self, index: int) -> Path:
        return self.run_dir / f"iteration_{index}"

    def _scan_max_seq(self) -> int:
        highest = 0
        if not self.run_dir.is_dir():
            return highest
        for stages in self.run_dir.glob(f"iteration_*/{STAGES_FILE}"):
            for line in stages.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    highest = max(highest, int(json.loads(line).get("seq", 0)))
        return highest

    def _open_lock(self, path: Path) -> int:
        try:
            return os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            if not _lock_is_stale(path):
                raise RunLockedError(str(self.run_dir)) from None
        logger.warning(
            "Reclaiming lock left by a dead process",
            operation="lock",
            extra_fields={"run_dir": str(self.run_dir)},
        )
        path.unlink(missing_ok=True)
        try:
            return os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise RunLockedError(str(self.run_dir)) from None

    @contextmanager
    def lock(self) -> Generator[None, None, None]:
        """Hold the run lock for the block; a lock whose pid is gone is taken over."""
        path = self.run_dir / LOCK_FILE
        fd = self._open_lock(path)
        try:
            os.write(fd, str(os.getpid()).encode("ascii"))
            os.close(fd)
            yield
        finally:
            path.unlink(missing_ok=True)

    # Writing

    def write_artifact(self, index: int, stage: str, filename: str, text: str) -> Path:
        """Write one artifact and append its stage entry with the next run-wide sequence number."""
        directory = self.iteration_dir(index)
        path = directory / filename
        _atomic_write(path, text)
        entry = json.dumps({"seq": self._next_seq, "stage": stage, "file": filename}, ensure_ascii=False)
        with (directory / STAGES_FILE).open("a", encoding="utf-8") as handle:
            handle.write(entry + "\n")
        self._next_seq += 1
        return path

    def write_json_artifact(self, index: int, stage: str, filename: str, payload: Any) -> Path:
        return self.write_artifact(index, stage, filename, _json_text(payload))

    def write_scientist(self, index: int, agent: int, instruction: str, hypotheses: List[Hypothesis]) -> Path:
        payload = {
            "scientist": agent,
            "instruction": instruction,
            "hypothesis": [h.wire() for h in hypotheses],
        }
        return self.write_json_artifact(index, "scientist", f"scientist_{agent}.json", payload)

    def write_accumulated(
        self,
        index: int,
        accumulated: List[Hypothesis],
        dropped: List[Hypothesis],
        non_verbatim: List[str],
    ) -> Path:
        payload = {
            "hypothesis": [_hypothesis_item(h) for h in accumulated],
            "dropped_by_prefilter": [
                {**h.wire(), "source": h.source.model_dump(mode="json")} for h in dropped
            ],
            "non_verbatim": non_verbatim,
        }
        return self.write_json_artifact(index, "accumulator", "accumulated.json", payload)

    def write_literature(self, index: int, digests: List[LiteratureDigest], text: str) -> None:
        self.write_artifact(index, "literature", "literature.md", text)
        self.write_json_artifact(
            index, "literature", "literature.json", [d.model_dump(mode="json") for d in digests]
        )

    def write_critic(self, index: int, review: CriticReview) -> None:
        self.write_artifact(index, "critic", "critic.md", review.text)
        self.write_json_artifact(
            index,
            "critic",
            "critic.json",
            {"per_hypothesis": {hid: v.model_dump(mode="json") for hid, v in review.per_hypothesis.items()}},
        )

    def write_exchanges(self, index: int, exchanges: List[Any]) -> Path:
        return self.write_artifact(index, "exchanges", EXCHANGES_FILE, dump_exchanges(exchanges))

    def write_config(self, config: RunConfig) -> None:
        _atomic_write(self.run_dir / CONFIG_FILE, _json_text(config.model_dump(mode="json"), sort_keys=True))

    def write_manifest(self, record: RunRecord) -> None:
        manifest = RunManifest.from_record(record)
        _atomic_write(self.run_dir / MANIFEST_FILE, _json_text(manifest.model_dump(mode="json")))

    def write_hypotheses(self, hypotheses: List[Hypothesis]) -> None:
        lines = []
        for hypothesis in hypotheses:
            item = {"key": hypothesis.key, "iteration": hypothesis.iteration, **_hypothesis_item(hypothesis)}
            lines.append(json.dumps(item, ensure_ascii=False) + "\n")
        _atomic_write(self.run_dir / HYPOTHESES_FILE, "".join(lines))

    def clear_iteration(self, index: int) -> None:
        """Remove leftovers of an iteration that never completed."""
        directory = self.iteration_dir(index)
        if directory.exists():
            logger.warning(
                "Discarding partial iteration artifacts",
                operation="clear_iteration",
                extra_fields={"iteration": index, "path": str(directory)},
            )
            shutil.rmtree(directory)
            self._next_seq = self._scan_max_seq() + 1

    # Reading

    def _read_json(self, path: Path) -> Any:
        if not path.is_file():
            raise RunIntegrityError("Missing artifact", str(path))
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RunIntegrityError(f"Corrupt artifact ({exc})", str(path)) from exc

    def _read_text(self, path: Path) -> str:
        if not path.is_file():
            raise RunIntegrityError("Missing artifact", str(path))
        return path.read_text(encoding="utf-8")

    def read_config(self) -> RunConfig:
        data = self._read_json(self.run_dir / CONFIG_FILE)
        try:
            return RunConfig.model_validate(data)
        except ValidationError as exc:
            raise RunIntegrityError(f"Invalid run configuration ({exc.error_count()} errors)",
                                    str(self.run_dir / CONFIG_FILE)) from exc

    def read_manifest(self) -> RunManifest:
        path = self.run_dir / MANIFEST_FILE
        data = self._read_json(path)
        try:
            return RunManifest.model_validate(data)
        except ValidationError as exc:
            raise RunIntegrityError("Corrupt manifest", str(path)) from exc

    def load_iteration(self, index: int, scientist_count: int) -> IterationRecord:
        """Rebuild an iteration from disk; every artifact of a completed iteration must exist."""
        directory = self.iteration_dir(index)
        required = ["analyst.md", "planner.json"]
        required += [f"scientist_{k}.json" for k in range(1, scientist_count + 1)]
        required += ["accumulated.json", "literature.md", "literature.json", "critic.md", "critic.json",
                     EXCHANGES_FILE]
        for name in required:
            if not (directory / name).is_file():
                raise RunIntegrityError("Missing artifact for completed iteration", str(directory / name))

        try:
            plan = PlannerPlan(instructions=tuple(
                self._read_json(directory / "planner.json")[f"Agent{k}_instructions"]
                for k in range(1, scientist_count + 1)
            ))
            scientist_outputs = []
            for k in range(1, scientist_count + 1):
                data = self._read_json(directory / f"scientist_{k}.json")
                source = HypothesisSource(role=AgentRole.SCIENTIST, index=k)
                scientist_outputs.append([
                    Hypothesis(source=source, iteration=index, **item) for item in data["hypothesis"]
                ])

            accumulated_data = self._read_json(directory / "accumulated.json")
            accumulator = HypothesisSource(role=AgentRole.ACCUMULATOR)
            accumulated = [
                Hypothesis(source=accumulator, iteration=index, **item)
                for item in accumulated_data["hypothesis"]
            ]
            dropped = [
                Hypothesis(iteration=index, **item) for item in accumulated_data.get("dropped_by_prefilter", [])
            ]
            literature = [
                LiteratureDigest.model_validate(item) for item in self._read_json(directory / "literature.json")
            ]
            verdicts = self._read_json(directory / "critic.json")["per_hypothesis"]
            critic = CriticReview(
                text=self._read_text(directory / "critic.md"),
                per_hypothesis={hid: HypothesisVerdict.model_validate(v) for hid, v in verdicts.items()},
            )
            return IterationRecord(
                index=index,
                analyst_text=self._read_text(directory / "analyst.md"),
                plan=plan,
                scientist_outputs=scientist_outputs,
                dropped=dropped,
                accumulated=accumulated,
                non_verbatim=list(accumulated_data.get("non_verbatim", [])),
                literature=literature,
                critic=critic,
                exchanges=read_exchanges(directory / EXCHANGES_FILE),
            )
        except (KeyError, TypeError, ValidationError) as exc:
            raise RunIntegrityError(f"Artifact content does not match its schema ({exc})", str(directory)) from exc

    def load_record(self, config: Optional[RunConfig] = None) -> RunRecord:
        config = config or self.read_config()
        manifest = self.read_manifest()
        iterations = [
            self.load_iteration(index, config.scientist_count)
            for index in range(1, manifest.iterations_completed + 1)
        ]
        return RunRecord(
            run_id=manifest.run_id,
            config=config,
            iterations=iterations,
            status=manifest.status,
            created_at=manifest.created_at,
            updated_at=manifest.updated_at,
            failed_stage=manifest.failed_stage,
            failure=manifest.failure,
        )
