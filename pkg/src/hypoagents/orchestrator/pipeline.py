"""The iterative analyst → planner → scientists → accumulator → literature → critic loop."""

from __future__ import annotations

import asyncio
import secrets
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Awaitable, Callable, List, Optional, Sequence, Tuple, TypeVar

from ..agents.dedup import attach_origin, non_verbatim_statements, prefilter_duplicates, renumber_final
from ..agents.models import AgentRole, CriticReview, Hypothesis, HypothesisSource, PlannerPlan
from ..agents.parsing import parse_critic, parse_hypotheses, parse_planner_output, serialize_hypotheses
from ..agents.prompts import load_template, with_json_reminder
from ..context import ContextBundle, assemble_context, load_documents
from ..errors import AgentError, BudgetExceededError, OutputParseError, StageFailedError
from ..gateway.gateway import Gateway
from ..gateway.ledger import CostLedger
from ..gateway.models import ChatExchange, ChatRequest
from ..logging_utils import LogComponent, async_logging_context, get_logger
from ..scholar.client import ScholarClient
from ..scholar.query import build_query
from ..specdata.models import PresenceMatrix
from ..specdata.parser import load_presence_table
from .models import IterationRecord, LiteratureDigest, RunConfig, RunRecord, RunStatus, render_literature, utc_now
from .store import RunStore

logger = get_logger("pipeline", LogComponent.ORCHESTRATOR)

T = TypeVar("T")

DEFAULT_SCIENTISTS = 3
GENERATIVE_TEMPERATURE = 0.7
PARSER_TEMPERATURE = 0.2
_PARSER_ROLES = {AgentRole.PLANNER, AgentRole.ACCUMULATOR}


def temperature_for(role: AgentRole) -> float:
    return PARSER_TEMPERATURE if role in _PARSER_ROLES else GENERATIVE_TEMPERATURE


def new_run_id() -> str:
    return f"{datetime.now(timezone.utc):%Y%m%dT%H%M%SZ}-{secrets.token_hex(3)}"


@dataclass(frozen=True)
class RunInputs:
    matrix: PresenceMatrix
    input_data: str
    context: ContextBundle


def prepare_inputs(config: RunConfig) -> RunInputs:
    """Load the data table and context documents; user instructions follow the table text."""
    with logger.performance_context("prepare_inputs", extra_fields={"data_path": config.data_path}):
        matrix, table_text = load_presence_table(Path(config.data_path), config.sample_classes or None)
        input_data = table_text
        if config.user_instructions.strip():
            input_data = f"{table_text.rstrip()}\n\nUser Instructions:\n{config.user_instructions.strip()}"
        documents = load_documents(config.effective_context_paths)
        context = assemble_context(documents, config.provider.context_budget)
    return RunInputs(matrix=matrix, input_data=input_data, context=context)


def planner_key_line(scientist_count: int) -> str:
    keys = ", ".join(f"Agent{k}_instructions" for k in range(1, scientist_count + 1))
    return f"Return exactly {scientist_count} keys: {keys}."


def collect_hypotheses(run: RunRecord) -> List[Hypothesis]:
    """Accumulated hypotheses of every iteration, in order, without cross-iteration deduplication."""
    return [hypothesis for iteration in run.iterations for hypothesis in iteration.accumulated]


class Orchestrator:
    def __init__(
        self,
        config: RunConfig,
        gateway: Gateway,
        scholar: ScholarClient,
        store: RunStore,
        inputs: Optional[RunInputs] = None,
    ):
        self.config = config
        self.gateway = gateway
        self.scholar = scholar
        self.store = store
        self.inputs = inputs or prepare_inputs(config)
        self.ledger = CostLedger()

    # Stage helpers

    async def _ask(
        self,
        stage: str,
        role: AgentRole,
        prompt: str,
        iteration: int,
        sink: List[ChatExchange],
        parser: Optional[Callable[[str], T]] = None,
        index: int = 1,
    ) -> Tuple[str, Optional[T]]:
        """One agent call; parse failures re-prompt with a JSON reminder up to max_reprompts times."""
        attempt = 1
        current = prompt
        while True:
            request = ChatRequest(
                role=role,
                system_prompt=current,
                provider_id=self.config.provider_id,
                max_output_tokens=self.config.provider.max_output_tokens,
                temperature=temperature_for(role),
                iteration=iteration,
                agent_index=index,
                attempt=attempt,
            )
            try:
                exchange = await self.gateway.complete(request)
            except AgentError as exc:
                raise StageFailedError(stage, iteration, exc) from exc
            sink.append(exchange)
            if parser is None:
                return exchange.response_text, None
            try:
                return exchange.response_text, parser(exchange.response_text)
            except OutputParseError as exc:
                if attempt > self.config.max_reprompts:
                    raise StageFailedError(stage, iteration, exc) from exc
                logger.warning(
                    "Unparseable agent output, re-prompting",
                    operation="ask",
                    extra_fields={"role": role.value, "index": index, "attempt": attempt, "error": exc.message},
                )
                attempt += 1
                current = with_json_reminder(prompt)

    async def _gather_ordered(self, coroutines: Sequence[Awaitable[T]]) -> List[T]:
        """Run concurrently, re-raise the first failure in index order."""
        results = await asyncio.gather(*coroutines, return_exceptions=True)
        ordered: List[T] = []
        for result in results:
            if isinstance(result, BaseException):
                raise result
            ordered.append(result)
        return ordered

    def _render(self, role: AgentRole, **bindings: str) -> str:
        return load_template(role).render(bindings)

    # Stages

    async def _analyst(self, index: int, prior_critique: str, sink: List[ChatExchange]) -> str:
        prompt = self._render(
            AgentRole.DATA_ANALYST,
            SELECTED_PAPERS=self.inputs.context.render(),
            INPUT_DATA=self.inputs.input_data,
            CRITIC_FEEDBACK=prior_critique,
        )
        text, _ = await self._ask("analyst", AgentRole.DATA_ANALYST, prompt, index, sink)
        self.store.write_artifact(index, "analyst", "analyst.md", text)
        return text

    async def _planner(self, index: int, analysis: str, sink: List[ChatExchange]) -> PlannerPlan:
        count = self.config.scientist_count
        prompt = self._render(AgentRole.PLANNER, INPUT_DATA=self.inputs.input_data, DATA_ANALYSIS=analysis)
        if count != DEFAULT_SCIENTISTS:
            prompt = f"{prompt}\n{planner_key_line(count)}"
        _, plan = await self._ask(
            "planner", AgentRole.PLANNER, prompt, index, sink,
            parser=lambda text: parse_planner_output(text, count),
        )
        assert plan is not None
        self.store.write_json_artifact(index, "planner", "planner.json", plan.wire())
        return plan

    async def _scientist(self, index: int, agent: int, plan: PlannerPlan, sink: List[ChatExchange]) -> List[Hypothesis]:
        prompt = self._render(
            AgentRole.SCIENTIST,
            AGENT_ID=str(agent),
            AGENT_INSTRUCTION=plan.for_agent(agent),
            SELECTED_PAPERS=self.inputs.context.render(),
            INPUT_DATA=self.inputs.input_data,
        )
        source = HypothesisSource(role=AgentRole.SCIENTIST, index=agent)
        _, hypotheses = await self._ask(
            "scientists", AgentRole.SCIENTIST, prompt, index, sink,
            parser=lambda text: parse_hypotheses(text, source, index),
            index=agent,
        )
        assert hypotheses is not None
        return hypotheses

    async def _scientists(self, index: int, plan: PlannerPlan, sink: List[ChatExchange]) -> List[List[Hypothesis]]:
        count = self.config.scientist_count
        sinks: List[List[ChatExchange]] = [[] for _ in range(count)]
        try:
            outputs = await self._gather_ordered(
                [self._scientist(index, agent, plan, sinks[agent - 1]) for agent in range(1, count + 1)]
            )
        finally:
            for agent_sink in sinks:
                sink.extend(agent_sink)
        for agent, hypotheses in enumerate(outputs, start=1):
            self.store.write_scientist(index, agent, plan.for_agent(agent), hypotheses)
        return outputs

    async def _accumulator(
        self, index: int, kept: List[Hypothesis], candidates: List[Hypothesis], sink: List[ChatExchange]
    ) -> Tuple[List[Hypothesis], List[str]]:
        prompt = self._render(AgentRole.ACCUMULATOR, HYPOTHESES=serialize_hypotheses(kept))
        source = HypothesisSource(role=AgentRole.ACCUMULATOR)
        _, parsed = await self._ask(
            "accumulator", AgentRole.ACCUMULATOR, prompt, index, sink,
            parser=lambda text: parse_hypotheses(text, source, index),
        )
        assert parsed is not None
        accumulated = attach_origin(renumber_final(parsed), candidates)
        non_verbatim = non_verbatim_statements(accumulated, candidates)
        if non_verbatim:
            logger.warning(
                "Accumulator changed hypothesis statements",
                operation="accumulator",
                extra_fields={"iteration": index, "ids": non_verbatim},
            )
        return accumulated, non_verbatim

    async def _review_one(self, index: int, hypothesis: Hypothesis, sink: List[ChatExchange]) -> LiteratureDigest:
        query = build_query(hypothesis)
        try:
            result = await self.scholar.search(query, self.config.snippet_limit)
        except AgentError as exc:
            raise StageFailedError("literature", index, exc) from exc
        prompt = self._render(
            AgentRole.LITERATURE_REVIEWER,
            HYPOTHESES=hypothesis.statement,
            SEARCH_RESULTS=result.render(),
        )
        review, _ = await self._ask(
            "literature", AgentRole.LITERATURE_REVIEWER, prompt, index, sink, index=hypothesis.ordinal
        )
        return LiteratureDigest(hypothesis_id=hypothesis.id, query=query, snippets=result.snippets, review=review)

    async def _literature(
        self, index: int, accumulated: List[Hypothesis], sink: List[ChatExchange]
    ) -> Tuple[List[LiteratureDigest], str]:
        sinks: List[List[ChatExchange]] = [[] for _ in accumulated]
        try:
            digests = await self._gather_ordered(
                [self._review_one(index, h, s) for h, s in zip(accumulated, sinks)]
            )
        finally:
            for review_sink in sinks:
                sink.extend(review_sink)
        text = render_literature(digests)
        self.store.write_literature(index, digests, text)
        return digests, text

    async def _critic(
        self, index: int, accumulated: List[Hypothesis], literature: str, sink: List[ChatExchange]
    ) -> CriticReview:
        prompt = self._render(
            AgentRole.CRITIC,
            SELECTED_PAPERS=self.inputs.context.render(),
            INPUT_DATA=self.inputs.input_data,
            LITERATURE_REVIEW=literature,
            HYPOTHESES=serialize_hypotheses(accumulated),
        )
        text, _ = await self._ask("critic", AgentRole.CRITIC, prompt, index, sink)
        review = parse_critic(text, [h.id for h in accumulated])
        self.store.write_critic(index, review)
        return review

    async def run_iteration(self, state: RunRecord, prior_critique: Optional[str] = None) -> IterationRecord:
        """Execute one full loop pass; each stage is persisted before the next starts."""
        index = len(state.iterations) + 1
        exchanges: List[ChatExchange] = []
        try:
            async with async_logging_context(run_id=state.run_id, iteration=index):
                async with async_logging_context(stage="analyst"):
                    analysis = await self._analyst(index, prior_critique or "", exchanges)
                async with async_logging_context(stage="planner"):
                    plan = await self._planner(index, analysis, exchanges)
                async with async_logging_context(stage="scientists"):
                    outputs = await self._scientists(index, plan, exchanges)
                candidates = [h for output in outputs for h in output]
                async with async_logging_context(stage="prefilter"):
                    kept, dropped = prefilter_duplicates(candidates, self.config.dedup_threshold)
                async with async_logging_context(stage="accumulator"):
                    accumulated, non_verbatim = await self._accumulator(index, kept, candidates, exchanges)
                    self.store.write_accumulated(index, accumulated, dropped, non_verbatim)
                async with async_logging_context(stage="literature"):
                    digests, literature = await self._literature(index, accumulated, exchanges)
                async with async_logging_context(stage="critic"):
                    critic = await self._critic(index, accumulated, literature, exchanges)
        finally:
            # cost of partial iterations stays inspectable on disk
            exchanges = [self.ledger.record(exchange) for exchange in exchanges]
            self.store.write_exchanges(index, exchanges)

        logger.info(
            "Iteration completed",
            operation="run_iteration",
            extra_fields={"iteration": index, "accumulated": len(accumulated), "dropped": len(dropped),
                          "spent_usd": self.ledger.total()},
        )
        return IterationRecord(
            index=index,
            analyst_text=analysis,
            plan=plan,
            scientist_outputs=outputs,
            dropped=dropped,
            accumulated=accumulated,
            non_verbatim=non_verbatim,
            literature=digests,
            critic=critic,
            exchanges=exchanges,
        )

    def _check_budget(self, record: RunRecord) -> None:
        limit = self.config.cost_limit_usd
        if limit is not None and record.total_cost > limit:
            raise BudgetExceededError(record.total_cost, limit)

    def _save(self, record: RunRecord) -> None:
        record.updated_at = utc_now()
        self.store.write_manifest(record)

    async def drive(self, record: RunRecord) -> RunRecord:
        """Run the remaining iterations of ``record`` under the run lock."""
        with self.store.lock():
            self.ledger = CostLedger(record.all_exchanges())
            record.status = RunStatus.IN_PROGRESS
            record.failed_stage = None
            record.failure = None
            try:
                self._check_budget(record)
                for index in range(len(record.iterations) + 1, self.config.iterations + 1):
                    self.store.clear_iteration(index)
                    async with logger.async_performance_context("run_iteration", extra_fields={"iteration": index}):
                        iteration = await self.run_iteration(record, record.last_critique)
                    record.iterations.append(iteration)
                    self.store.write_hypotheses(collect_hypotheses(record))
                    self._save(record)
                    self._check_budget(record)
                record.status = RunStatus.COMPLETED
                self._save(record)
            except StageFailedError as exc:
                record.status = RunStatus.FAILED
                record.failed_stage = exc.stage
                record.failure = exc.message
                self._save(record)
                logger.error("Run failed", operation="drive", extra_fields=exc.to_dict())
                raise
            except BudgetExceededError as exc:
                record.status = RunStatus.FAILED
                record.failure = exc.message
                self._save(record)
                raise
            except (KeyboardInterrupt, asyncio.CancelledError):
                record.status = RunStatus.IN_PROGRESS
                self._save(record)
                logger.warning("Run interrupted", operation="drive",
                               extra_fields={"iterations_completed": len(record.iterations)})
                raise
        return record


def _default_services(
    config: RunConfig,
    gateway: Optional[Gateway],
    scholar: Optional[ScholarClient],
) -> Tuple[Gateway, ScholarClient, bool, bool]:
    own_gateway = gateway is None
    own_scholar = scholar is None
    return (
        gateway or Gateway.for_profile(config.provider, seed=config.seed),
        scholar or ScholarClient(config.scholar),
        own_gateway,
        own_scholar,
    )


async def _execute(
    config: RunConfig,
    store: RunStore,
    record: RunRecord,
    gateway: Optional[Gateway],
    scholar: Optional[ScholarClient],
    inputs: Optional[RunInputs],
) -> RunRecord:
    gateway_, scholar_, own_gateway, own_scholar = _default_services(config, gateway, scholar)
    try:
        orchestrator = Orchestrator(config, gateway_, scholar_, store, inputs=inputs)
        return await orchestrator.drive(record)
    finally:
        if own_gateway:
            await gateway_.aclose()
        if own_scholar:
            await scholar_.aclose()


async def run(
    config: RunConfig,
    gateway: Optional[Gateway] = None,
    scholar: Optional[ScholarClient] = None,
    run_id: Optional[str] = None,
) -> RunRecord:
    """Start a new run in ``config.output_dir``. Inputs are validated before the run directory exists."""
    inputs = prepare_inputs(config)
    run_id = run_id or new_run_id()
    store = RunStore.create(config.output_dir, run_id)
    store.write_config(config)
    record = RunRecord(run_id=run_id, config=config)
    store.write_manifest(record)
    logger.info("Run started", operation="run",
                extra_fields={"run_id": run_id, "run_dir": str(store.run_dir), "iterations": config.iterations})
    return await _execute(config, store, record, gateway, scholar, inputs)


async def resume(
    run_dir: Path | str,
    gateway: Optional[Gateway] = None,
    scholar: Optional[ScholarClient] = None,
) -> RunRecord:
    """Continue from the first missing iteration; a completed run is returned unchanged."""
    store = RunStore(run_dir)
    config = store.read_config()
    record = store.load_record(config)
    if record.status is RunStatus.COMPLETED and len(record.iterations) >= config.iterations:
        logger.info("Run already completed", operation="resume", extra_fields={"run_id": record.run_id})
        return record
    logger.info(
        "Resuming run",
        operation="resume",
        extra_fields={"run_id": record.run_id, "next_iteration": len(record.iterations) + 1},
    )
    return await _execute(config, store, record, gateway, scholar, None)
