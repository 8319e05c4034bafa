"""
Test suite for the cost ledger and its JSON Lines persistence.
"""

import threading

import pytest

from src.hypoagents.agents.models import AgentRole
from src.hypoagents.errors import RunIntegrityError
from src.hypoagents.gateway import ChatExchange, ChatRequest, CostLedger, read_exchanges, write_exchanges
from src.hypoagents.gateway.ledger import cost_by_iteration, cost_by_role, ledger_total, recompute_cost


def exchange(role=AgentRole.SCIENTIST, iteration=1, index=1, input_tokens=100, output_tokens=10, cost=None):
    request = ChatRequest(
        role=role,
        system_prompt="prompt",
        provider_id="scripted",
        iteration=iteration,
        agent_index=index,
    )
    if cost is None:
        cost = input_tokens * 3e-6 + output_tokens * 15e-6
    return ChatExchange(
        request=request,
        response_text="reply",
        input_tokens=input_tokens,
        output_tokens=output_tokens,
        cost=cost,
    )


class TestTotals:
    def test_total_is_order_independent(self):
        costs = [0.1, 1e-17, 0.2, 1e-17, 0.3]
        records = [exchange(cost=c) for c in costs]
        assert ledger_total(records) == ledger_total(list(reversed(records)))
        assert ledger_total(records) == pytest.approx(0.6)
        assert ledger_total([]) == 0.0

    def test_grouping(self):
        records = [
            exchange(AgentRole.PLANNER, iteration=1, cost=0.5),
            exchange(AgentRole.SCIENTIST, iteration=1, cost=0.25),
            exchange(AgentRole.SCIENTIST, iteration=2, index=2, cost=0.25),
        ]
        assert cost_by_role(records) == {"Planner": 0.5, "Scientist": 0.5}
        assert cost_by_iteration(records) == {"1": 0.75, "2": 0.25}

    def test_recompute_matches_recorded_cost(self):
        record = exchange(input_tokens=1234, output_tokens=56)
        assert recompute_cost(record, 3e-6, 15e-6) == pytest.approx(record.cost)


class TestCostLedger:
    def test_sequence_numbers(self):
        ledger = CostLedger()
        stamped = [ledger.record(exchange(index=k)) for k in range(1, 4)]
        assert [r.seq for r in stamped] == [1, 2, 3]
        assert [r.seq for r in ledger.exchanges] == [1, 2, 3]

    def test_resumes_after_existing_records(self):
        first = CostLedger()
        first.record(exchange())
        first.record(exchange())
        resumed = CostLedger(first.exchanges)
        assert resumed.record(exchange()).seq == 3
        assert resumed.total() == pytest.approx(3 * exchange().cost)

    def test_concurrent_records_get_unique_sequence(self):
        ledger = CostLedger()

        def worker():
            for _ in range(50):
                ledger.record(exchange())

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert sorted(r.seq for r in ledger.exchanges) == list(range(1, 201))


class TestPersistence:
    def test_write_then_read(self, tmp_path):
        ledger = CostLedger()
        for k in range(1, 4):
            ledger.record(exchange(index=k))
        path = tmp_path / "exchanges.jsonl"
        write_exchanges(path, ledger.exchanges)
        assert read_exchanges(path) == ledger.exchanges
        assert len(path.read_text(encoding="utf-8").splitlines()) == 3

    def test_corrupt_line_is_integrity_error(self, tmp_path):
        path = tmp_path / "exchanges.jsonl"
        write_exchanges(path, [exchange()])
        with path.open("a", encoding="utf-8") as handle:
            handle.write("{truncated\n")
        with pytest.raises(RunIntegrityError, match="line 2"):
            read_exchanges(path)

    def test_missing_file_is_integrity_error(self, tmp_path):
        with pytest.raises(RunIntegrityError):
            read_exchanges(tmp_path / "absent.jsonl")
