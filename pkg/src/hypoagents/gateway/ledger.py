"""Cost ledger over chat exchanges, persisted as JSON Lines."""

from __future__ import annotations

import json
import math
import threading
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List

from ..errors import RunIntegrityError
from .models import ChatExchange


def ledger_total(exchanges: Iterable[ChatExchange]) -> float:
    # fsum is exact, so the total does not depend on record order
    return math.fsum(exchange.cost for exchange in exchanges)


def cost_by_role(exchanges: Iterable[ChatExchange]) -> Dict[str, float]:
    groups: Dict[str, List[float]] = defaultdict(list)
    for exchange in exchanges:
        groups[exchange.request.role.value].append(exchange.cost)
    return {role: math.fsum(costs) for role, costs in sorted(groups.items())}


def cost_by_iteration(exchanges: Iterable[ChatExchange]) -> Dict[str, float]:
    groups: Dict[int, List[float]] = defaultdict(list)
    for exchange in exchanges:
        groups[exchange.request.iteration].append(exchange.cost)
    return {str(iteration): math.fsum(costs) for iteration, costs in sorted(groups.items())}


def recompute_cost(exchange: ChatExchange, rate_in: float, rate_out: float) -> float:
    return exchange.input_tokens * rate_in + exchange.output_tokens * rate_out


class CostLedger:
    """Append-only, thread- and task-safe record of exchanges with a total order."""

    def __init__(self, exchanges: Iterable[ChatExchange] = ()):
        self._lock = threading.Lock()
        self._records: List[ChatExchange] = list(exchanges)
        self._next_seq = max((record.seq for record in self._records), default=0) + 1

    def record(self, exchange: ChatExchange) -> ChatExchange:
        with self._lock:
            stamped = exchange.model_copy(update={"seq": self._next_seq})
            self._next_seq += 1
            self._records.append(stamped)
        return stamped

    @property
    def exchanges(self) -> List[ChatExchange]:
        with self._lock:
            return list(self._records)

    def total(self) -> float:
        return ledger_total(self.exchanges)


def dump_exchanges(exchanges: Iterable[ChatExchange]) -> str:
    return "".join(
        json.dumps(exchange.model_dump(mode="json"), ensure_ascii=False, sort_keys=True) + "\n"
        for exchange in exchanges
    )


def write_exchanges(path: Path, exchanges: Iterable[ChatExchange]) -> None:
    path.write_text(dump_exchanges(exchanges), encoding="utf-8")


def read_exchanges(path: Path) -> List[ChatExchange]:
    records: List[ChatExchange] = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise RunIntegrityError(f"Exchange log unreadable ({exc})", str(path)) from exc
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(ChatExchange.model_validate_json(line))
        except ValueError as exc:
            raise RunIntegrityError(f"Corrupt exchange record on line {number}", str(path)) from exc
    return records
