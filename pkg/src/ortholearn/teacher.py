"""Simulated-teacher test-then-train protocol driver and its metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .clouds import DatasetIndex, DatasetView, load_cloud
from .config import PipelineConfig
from .errors import EmptyDataset, EmptyInput, LogError
from .features import ObjectRepresentation
from .learner import PerceptualMemory

ACTION_INTRODUCE = "introduce"
ACTION_TEACH = "teach"
ACTION_ASK = "ask"
ACTION_CORRECT = "correct"

STOP_LACK_OF_DATA = "LackOfData"
STOP_FAILURE = "Failure"


@dataclass
class TeacherConfig:
    """Protocol parameters; tau gates category introduction."""

    tau: float = 0.67
    max_idle_iterations: int = 100
    window_factor: int = 3
    window_min: int = 6
    seed: int = 0
    runs: int = 10
    shuffle_categories: bool = False

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.max_idle_iterations < 1:
            raise ValueError("max_idle_iterations must be >= 1")
        if self.window_min < 1:
            raise ValueError("window_min must be >= 1")
        if self.window_factor < 0:
            raise ValueError("window_factor must be >= 0")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class ProtocolEvent:
    index: int
    action: str
    category: str
    view_id: str
    predicted: str | None = None
    correct: bool | None = None


@dataclass
class ExperimentLog:
    events: list[ProtocolEvent]
    stop_reason: str
    tau: float
    window_factor: int
    window_min: int
    seed: int | None = None
    run: int | None = None

    def to_jsonl(self) -> bytes:
        lines = [json.dumps({
            "record": "config", "tau": self.tau,
            "window_factor": self.window_factor, "window_min": self.window_min,
            "seed": self.seed, "run": self.run,
        }, sort_keys=True)]
        for ev in self.events:
            lines.append(json.dumps({
                "record": "event", "index": ev.index, "action": ev.action,
                "category": ev.category, "view_id": ev.view_id,
                "predicted": ev.predicted, "correct": ev.correct,
            }, sort_keys=True))
        lines.append(json.dumps({"record": "stop", "reason": self.stop_reason},
                                sort_keys=True))
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def from_jsonl(cls, data: bytes) -> "ExperimentLog":
        events = []
        header: dict = {}
        stop_reason = None
        for line in data.decode("utf-8").splitlines():
            if not line.strip():
                continue
            raw = json.loads(line)
            kind = raw.get("record")
            if kind == "config":
                header = raw
            elif kind == "event":
                events.append(ProtocolEvent(
                    index=raw["index"], action=raw["action"],
                    category=raw["category"], view_id=raw["view_id"],
                    predicted=raw.get("predicted"), correct=raw.get("correct")))
            elif kind == "stop":
                stop_reason = raw["reason"]
        if stop_reason is None:
            raise LogError("log has no stop record")
        return cls(events=events, stop_reason=stop_reason,
                   tau=header.get("tau", 0.67),
                   window_factor=header.get("window_factor", 3),
                   window_min=header.get("window_min", 6),
                   seed=header.get("seed"), run=header.get("run"))


@dataclass(frozen=True)
class MetricsReport:
    QCI: int
    NLC: int
    AIC: float
    GCA: float
    APA: float
    stop_reason: str | None = None


class LearningAgent(Protocol):
    def predict(self, view: DatasetView) -> str | None: ...
    def learn(self, view: DatasetView, label: str) -> None: ...


class OracleAgent:
    """Always answers the true label; upper-bounds the protocol."""

    def predict(self, view: DatasetView) -> str:
        return view.category_label

    def learn(self, view: DatasetView, label: str) -> None:
        pass


class AdversarialAgent:
    """Always answers a wrong label; forces the failure stop."""

    def predict(self, view: DatasetView) -> str:
        return f"not-{view.category_label}"

    def learn(self, view: DatasetView, label: str) -> None:
        pass


class ScriptedAgent:
    """Answers right/wrong following a fixed outcome sequence."""

    def __init__(self, outcomes: Iterable[bool]):
        self._outcomes = list(outcomes)
        self._cursor = 0

    def predict(self, view: DatasetView) -> str:
        ok = self._outcomes[self._cursor % len(self._outcomes)]
        self._cursor += 1
        return view.category_label if ok else f"not-{view.category_label}"

    def learn(self, view: DatasetView, label: str) -> None:
        pass


class PipelineAgent:
    """The real agent: representation pipeline feeding a perceptual memory."""

    def __init__(self, config: PipelineConfig | None = None,
                 memory: PerceptualMemory | None = None,
                 pipeline: ObjectRepresentation | None = None):
        self.pipeline = pipeline or ObjectRepresentation(config)
        self.memory = memory if memory is not None else PerceptualMemory(
            reject_distance=self.pipeline.config.reject_distance)
        self._cache: dict = {}

    def _feature(self, view: DatasetView):
        key = str(view.path)
        if key not in self._cache:
            cloud = load_cloud(view.path)
            self._cache[key] = self.pipeline(cloud)
        return self._cache[key]

    def predict(self, view: DatasetView) -> str | None:
        return self.memory.classify(self._feature(view)).label

    def learn(self, view: DatasetView, label: str) -> None:
        self.memory.teach(label, self._feature(view))


def window_accuracy(outcomes: Sequence[bool], n_known: int,
                    config: TeacherConfig) -> float:
    """Sliding-window accuracy over the most recent ask outcomes.

    The window holds ``max(window_min, window_factor * n_known)`` asks; with
    fewer asks available the mean runs over what exists.
    """
    if not outcomes:
        return 0.0
    size = max(config.window_min, config.window_factor * n_known)
    recent = outcomes[-size:]
    return sum(recent) / len(recent)


def introduction_due(accuracy: float, all_tested: bool, tau: float) -> bool:
    """Gate for introducing the next category: accuracy must exceed tau
    (accuracy at least twice the error rate at tau = 0.67) and every known
    category must have been tested since the last introduction."""
    return all_tested and accuracy > tau


def run_experiment(dataset: Sequence[DatasetView] | DatasetIndex,
                   agent: LearningAgent,
                   config: TeacherConfig | None = None,
                   seed=None, run: int | None = None) -> ExperimentLog:
    """Drive one deterministic test-then-train experiment.

    The teacher introduces two categories, then keeps asking about unseen
    views of known categories (correcting mistakes) until the sliding-window
    accuracy exceeds tau with every known category tested, at which point
    the next category is introduced. Runs end with ``LackOfData`` when
    nothing is left to introduce or ask, or ``Failure`` after
    ``max_idle_iterations`` consecutive asks without an introduction.
    """
    config = config or TeacherConfig()
    views = dataset.views if isinstance(dataset, DatasetIndex) else list(dataset)
    by_category: dict[str, list[DatasetView]] = {}
    for view in views:
        by_category.setdefault(view.category_label, []).append(view)
    for label in by_category:
        by_category[label] = sorted(by_category[label],
                                    key=lambda v: (v.instance_id, v.view_id))
    categories = sorted(by_category)
    if len(categories) < 2 or any(len(v) < 2 for v in by_category.values()):
        raise EmptyDataset("protocol needs >= 2 categories with >= 2 views each")

    rng = np.random.default_rng(config.seed if seed is None else seed)
    if config.shuffle_categories:
        order = rng.permutation(len(categories))
        categories = [categories[i] for i in order]

    unseen = {label: list(by_category[label]) for label in categories}
    introduced: list[str] = []
    remaining = list(categories)
    events: list[ProtocolEvent] = []
    outcomes: list[bool] = []
    asked_since_introduction: set[str] = set()
    idle = 0
    index = 0

    def pick_view(label: str) -> DatasetView:
        pool = unseen[label]
        return pool.pop(int(rng.integers(len(pool))))

    def introduce_next() -> None:
        nonlocal idle, index
        label = remaining.pop(0)
        view = pick_view(label)
        agent.learn(view, label)
        index += 1
        events.append(ProtocolEvent(index=index, action=ACTION_INTRODUCE,
                                    category=label, view_id=view.view_id))
        introduced.append(label)
        asked_since_introduction.clear()
        idle = 0

    def finish(reason: str) -> ExperimentLog:
        return ExperimentLog(events=events, stop_reason=reason, tau=config.tau,
                             window_factor=config.window_factor,
                             window_min=config.window_min,
                             seed=config.seed if seed is None else None, run=run)

    introduce_next()
    introduce_next()

    while True:
        askable = [label for label in introduced if unseen[label]]
        if not askable:
            return finish(STOP_LACK_OF_DATA)
        label = askable[int(rng.integers(len(askable)))]
        view = pick_view(label)
        predicted = agent.predict(view)
        ok = predicted == label
        index += 1
        events.append(ProtocolEvent(index=index, action=ACTION_ASK, category=label,
                                    view_id=view.view_id, predicted=predicted,
                                    correct=ok))
        outcomes.append(ok)
        if not ok:
            agent.learn(view, label)
            index += 1
            events.append(ProtocolEvent(index=index, action=ACTION_CORRECT,
                                        category=label, view_id=view.view_id,
                                        predicted=predicted))
        asked_since_introduction.add(label)

        accuracy = window_accuracy(outcomes, len(introduced), config)
        all_tested = asked_since_introduction.issuperset(introduced)
        if introduction_due(accuracy, all_tested, config.tau):
            if remaining:
                introduce_next()
            else:
                return finish(STOP_LACK_OF_DATA)
        else:
            idle += 1
            if idle >= config.max_idle_iterations:
                return finish(STOP_FAILURE)


def compute_metrics(log: ExperimentLog) -> MetricsReport:
    """Recompute QCI/NLC/AIC/GCA/APA from an event trace.

    The sliding-window accuracy is re-derived from scratch, so this also
    cross-checks the driver's internal bookkeeping.
    """
    config = TeacherConfig(tau=log.tau, window_factor=log.window_factor,
                           window_min=log.window_min)
    last_index = 0
    taught: list[str] = []
    stored = 0
    asks = 0
    correct_asks = 0
    outcomes: list[bool] = []
    window_values: list[float] = []
    previous: ProtocolEvent | None = None
    for ev in log.events:
        if ev.index <= last_index:
            raise LogError(f"event indices not strictly increasing at {ev.index}")
        last_index = ev.index
        if ev.action in (ACTION_INTRODUCE, ACTION_TEACH):
            if ev.category not in taught:
                taught.append(ev.category)
            stored += 1
        elif ev.action == ACTION_ASK:
            if ev.correct is None:
                raise LogError(f"ask event {ev.index} lacks a correctness flag")
            asks += 1
            correct_asks += int(ev.correct)
            outcomes.append(ev.correct)
            window_values.append(window_accuracy(outcomes, len(taught), config))
        elif ev.action == ACTION_CORRECT:
            if previous is None or previous.action != ACTION_ASK or previous.correct:
                raise LogError(
                    f"correct event {ev.index} does not follow a failed ask")
            if ev.category != previous.category:
                raise LogError(
                    f"correct event {ev.index} names {ev.category!r}, "
                    f"ask was about {previous.category!r}")
            if ev.category not in taught:
                taught.append(ev.category)
            stored += 1
        else:
            raise LogError(f"unknown action {ev.action!r} at event {ev.index}")
        previous = ev

    nlc = len(taught)
    return MetricsReport(
        QCI=asks,
        NLC=nlc,
        AIC=stored / nlc if nlc else 0.0,
        GCA=correct_asks / asks if asks else 0.0,
        APA=sum(window_values) / len(window_values) if window_values else 0.0,
        stop_reason=log.stop_reason,
    )


@dataclass
class RunSummary:
    mean: MetricsReport
    runs: list[MetricsReport]


def summarize_runs(reports: Sequence[MetricsReport]) -> RunSummary:
    """Arithmetic mean of each metric, keeping the per-run values."""
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to summarize")
    n = len(reports)
    mean = MetricsReport(
        QCI=sum(r.QCI for r in reports) / n,
        NLC=sum(r.NLC for r in reports) / n,
        AIC=sum(r.AIC for r in reports) / n,
        GCA=sum(r.GCA for r in reports) / n,
        APA=sum(r.APA for r in reports) / n,
    )
    return RunSummary(mean=mean, runs=reports)


def run_experiments(dataset, agent_factory: Callable[[], LearningAgent],
                    config: TeacherConfig | None = None) -> list[ExperimentLog]:
    """Run ``config.runs`` independent experiments with derived seeds."""
    config = config or TeacherConfig()
    logs = []
    for i in range(config.runs):
        log = run_experiment(dataset, agent_factory(), config,
                             seed=[config.seed, i], run=i)
        log.seed = config.seed
        logs.append(log)
    return logs
