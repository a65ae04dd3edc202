"""Scenario engine: scripted callers screened end to end on the simulated network.

Every scenario runs as its own session on a fresh network and clock, with a
seed derived from the run seed and the scenario id, so the outcome of one
scenario never depends on which others ran or in what order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

from robocallguard.audio import AudioFrame, OverlapError, Utterance, render_utterances, script_duration_s
from robocallguard.clustering import DEFAULT_EPS, DEFAULT_K, DEFAULT_MIN_PTS, ClusterResult, cluster_corpus, k_distances
from robocallguard.screening import Disposition, LabelBasis, OutcomeStore, Policy, ScreeningOutcome, VirtualAssistant
from robocallguard.telephony import CalleeLog, Dialer, Network
from robocallguard.transcription import load_corpus
from robocallguard.wire import CallerId

logger = logging.getLogger(__name__)

# a live caller stays quiet this long after the VA stops talking
REACTION_TAIL_S = 0.5
VA_ADDRESS = "va"
CALLER_ADDRESS = "caller"
CALLER_KINDS = ("robocall", "human")
# replay rows only need the call blocked, whatever the label
EXPECT_BLOCKED = "Blocked"
BLOCKING = frozenset({Disposition.BLOCKED_ROBOCALL, Disposition.BLOCKED_HUMAN, Disposition.BLACKLIST_DROP})


class ScenarioError(ValueError):
    pass


class MissingDocumentError(LookupError):
    def __init__(self, doc_id: str, corpus_dir: Path):
        self.doc_id = doc_id
        super().__init__(f"representative {doc_id!r} has no transcript in {corpus_dir}")


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    caller_id: CallerId
    script: tuple[Utterance, ...]
    reactive: bool
    expected: Disposition
    expected_label_basis: LabelBasis | None = None
    # ground truth for the aggregates; recordings are robocalls unless stated
    caller_kind: str = ""
    hangup_after_s: float | None = None

    def __post_init__(self) -> None:
        if not self.caller_kind:
            object.__setattr__(self, "caller_kind", "human" if self.reactive else "robocall")
        if self.caller_kind not in CALLER_KINDS:
            raise ValueError(f"caller_kind must be one of {CALLER_KINDS}, got {self.caller_kind!r}")
        if self.hangup_after_s is not None and self.hangup_after_s < 0:
            raise ValueError("hangup_after_s must be non-negative")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "scenario_id": self.scenario_id,
            "caller_id": self.caller_id.digits,
            "reactive": self.reactive,
            "caller_kind": self.caller_kind,
            "expected": self.expected.value,
            "script": [
                {"text": " ".join(u.text), "start_offset_s": u.start_offset_s, "speaking_rate_wps": u.speaking_rate_wps}
                for u in self.script
            ],
        }
        if self.expected_label_basis is not None:
            doc["expected_label_basis"] = self.expected_label_basis.value
        if self.hangup_after_s is not None:
            doc["hangup_after_s"] = self.hangup_after_s
        return doc


_SCENARIO_FIELDS = {"scenario_id", "caller_id", "script", "reactive", "expected", "expected_label_basis", "caller_kind", "hangup_after_s"}
_REQUIRED_FIELDS = {"scenario_id", "caller_id", "script", "reactive", "expected"}
_UTTERANCE_FIELDS = {"text", "start_offset_s", "speaking_rate_wps", "trailing_pause_s"}


def _parse_scenario(raw: Any, where: str) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected an object")
    unknown = sorted(set(raw) - _SCENARIO_FIELDS)
    if unknown:
        raise ScenarioError(f"{where}: unknown field {unknown[0]!r}")
    missing = sorted(_REQUIRED_FIELDS - set(raw))
    if missing:
        raise ScenarioError(f"{where}: missing field {missing[0]!r}")
    if not isinstance(raw["script"], list):
        raise ScenarioError(f"{where}: field 'script' must be a list")
    if not isinstance(raw["reactive"], bool):
        raise ScenarioError(f"{where}: field 'reactive' must be true or false")
    script = []
    for j, item in enumerate(raw["script"]):
        if not isinstance(item, dict):
            raise ScenarioError(f"{where}: script[{j}] must be an object")
        bad = sorted(set(item) - _UTTERANCE_FIELDS)
        if bad:
            raise ScenarioError(f"{where}: script[{j}]: unknown field {bad[0]!r}")
        if not isinstance(item.get("text"), str):
            raise ScenarioError(f"{where}: script[{j}]: field 'text' must be a string")
        try:
            script.append(Utterance(**item))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{where}: script[{j}]: {exc}") from None
    try:
        render_utterances(script, script_duration_s(script))
    except OverlapError as exc:
        raise ScenarioError(f"{where}: field 'script': {exc}") from None
    try:
        basis = raw.get("expected_label_basis")
        return Scenario(
            scenario_id=str(raw["scenario_id"]),
            caller_id=CallerId(str(raw["caller_id"])),
            script=tuple(script),
            reactive=raw["reactive"],
            expected=Disposition(raw["expected"]),
            expected_label_basis=LabelBasis(basis) if basis is not None else None,
            caller_kind=raw.get("caller_kind", ""),
            hangup_after_s=raw.get("hangup_after_s"),
        )
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def parse_scenarios(text: str, source: str = "<scenarios>") -> list[Scenario]:
    """A JSON document ``{"scenarios": [...]}``; errors name the line or the field."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict) or set(doc) != {"scenarios"} or not isinstance(doc["scenarios"], list):
        raise ScenarioError(f"{source}: expected an object with a single 'scenarios' list")
    scenarios = []
    seen: set[str] = set()
    for i, raw in enumerate(doc["scenarios"]):
        sid = raw.get("scenario_id") if isinstance(raw, dict) else None
        scenario = _parse_scenario(raw, f"{source}: scenarios[{i}]" + (f" ({sid})" if sid else ""))
        if scenario.scenario_id in seen:
            raise ScenarioError(f"{source}: scenarios[{i}]: duplicate scenario_id {scenario.scenario_id!r}")
        seen.add(scenario.scenario_id)
        scenarios.append(scenario)
    return scenarios


def load_scenarios(path: str | Path) -> list[Scenario]:
    path = Path(path)
    return parse_scenarios(path.read_text(encoding="utf-8"), str(path))


def dump_scenarios(scenarios: Iterable[Scenario]) -> str:
    return json.dumps({"scenarios": [s.to_json() for s in scenarios]}, indent=2) + "\n"


class ScriptedCaller:
    """Plays a rendered script. A reactive caller goes quiet while the VA talks."""

    def __init__(self, script: Sequence[Utterance], reactive: bool = False, hangup_after_s: float | None = None):
        self.frames = render_utterances(script, script_duration_s(script))
        self.reactive = reactive
        frame_ms = self.frames[0].duration_ms if self.frames else 100
        self.hangup_frame = None if hangup_after_s is None else round(hangup_after_s * 1000 / frame_ms)
        self.tail_ticks = round(REACTION_TAIL_S * 1000 / frame_ms)
        self.quiet_until = -1
        self.suppressed = 0

    def hear(self, frame: AudioFrame, tick: int) -> None:
        # a prompt heard at tick t silences this tick and the reaction tail after it
        self.quiet_until = max(self.quiet_until, tick + self.tail_ticks)

    def next_frame(self, index: int, tick: int) -> AudioFrame | None:
        if self.hangup_frame is not None and index >= self.hangup_frame:
            return None
        frame = self.frames[index] if index < len(self.frames) else AudioFrame(index)
        if self.reactive and tick <= self.quiet_until:
            if frame.energy > 0:
                self.suppressed += 1
            return AudioFrame(index, frame.duration_ms)
        return frame


def scenario_seed(seed: int, scenario_id: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{scenario_id}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "big") >> 1


def seeded_policy(policy: Policy, seed: int) -> Policy:
    return replace(policy, seed=seed, names=replace(policy.names, seed=seed), asr=replace(policy.asr, seed=seed))


@dataclass(frozen=True)
class TraceEvent:
    time_s: float
    event: str
    detail: str = ""


@dataclass
class ReportRow:
    scenario_id: str
    caller_id: str
    caller_kind: str
    expected: str
    actual: str
    expected_basis: str = ""
    actual_basis: str = ""
    hit_s: float | None = None
    reminder_s: float | None = None
    silence_s: float | None = None
    hangup_s: float | None = None
    ring_s: float | None = None
    ended_by: str = ""
    caller_name: str = ""
    transcript: str = ""
    error: str = ""

    @property
    def match(self) -> bool:
        if self.error:
            return False
        if self.expected == EXPECT_BLOCKED:
            ok = self.actual in {d.value for d in BLOCKING}
        else:
            ok = self.actual == self.expected
        return ok and (not self.expected_basis or self.expected_basis == self.actual_basis)


_COLUMNS = [
    "scenario_id", "caller_id", "caller_kind", "expected", "actual", "match", "expected_basis",
    "actual_basis", "hit_s", "reminder_s", "silence_s", "hangup_s", "ring_s", "ended_by",
    "caller_name", "transcript", "error",
]  # fmt: skip
_TIME_COLUMNS = ("hit_s", "reminder_s", "silence_s", "hangup_s", "ring_s")


def _fmt_time(value: float | None) -> str:
    return "" if value is None else f"{value:.1f}"


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ")


def _rate(num: int, den: int) -> float | None:
    return num / den if den else None


@dataclass
class RunReport:
    rows: list[ReportRow]
    traces: dict[str, list[TraceEvent]] = field(default_factory=dict)
    kind: str = "screen"
    t3_s: float = 5.0

    def __post_init__(self) -> None:
        self.rows = sorted(self.rows, key=lambda r: r.scenario_id)

    @property
    def ok(self) -> bool:
        return all(r.match for r in self.rows)

    def aggregates(self) -> dict[str, Any]:
        robo = [r for r in self.rows if r.caller_kind == "robocall"]
        screened = [r for r in robo if r.actual in (Disposition.BLOCKED_ROBOCALL.value, Disposition.BLOCKED_HUMAN.value)]
        wanted = [r for r in self.rows if r.expected in (Disposition.FORWARDED.value, Disposition.WHITELIST_PASS.value)]
        blocking = {d.value for d in BLOCKING}
        counts: dict[str, int] = {}
        for r in self.rows:
            counts[r.actual] = counts.get(r.actual, 0) + 1
        return {
            "calls": len(self.rows),
            "matches": sum(r.match for r in self.rows),
            "errors": sum(bool(r.error) for r in self.rows),
            "robocalls": len(robo),
            "blocked_robocall_rate": _rate(sum(r.actual in blocking for r in robo), len(robo)),
            "label_accuracy": _rate(sum(r.actual == Disposition.BLOCKED_ROBOCALL.value for r in screened), len(screened)),
            "forward_correctness": _rate(sum(r.actual == r.expected for r in wanted), len(wanted)),
            "false_block_count": sum(r.actual in blocking for r in wanted),
            "evasions": sum(r.actual == Disposition.FORWARDED.value for r in robo),
            "dispositions": dict(sorted(counts.items())),
        }

    def to_tsv(self) -> str:
        lines = [f"# kind\t{self.kind}", f"# t3_s\t{self.t3_s}", "\t".join(_COLUMNS)]
        for r in self.rows:
            cells = []
            for col in _COLUMNS:
                value = r.match if col == "match" else getattr(r, col)
                if col in _TIME_COLUMNS:
                    cells.append(_fmt_time(value))
                elif col == "match":
                    cells.append("yes" if value else "no")
                else:
                    cells.append(_clean(str(value)))
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> RunReport:
        meta: dict[str, str] = {}
        header: list[str] | None = None
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("\t")
                meta[key] = value
                continue
            cells = line.split("\t")
            if header is None:
                header = cells
                if header != _COLUMNS:
                    raise ValueError("report header does not match the expected columns")
                continue
            values = dict(zip(header, cells))
            values.pop("match")
            for col in _TIME_COLUMNS:
                values[col] = float(values[col]) if values[col] else None
            rows.append(ReportRow(**values))
        return cls(rows, kind=meta.get("kind", "screen"), t3_s=float(meta.get("t3_s", 5.0)))

    def trace_tsv(self) -> str:
        lines = ["scenario_id\ttime_s\tevent\tdetail"]
        for sid in sorted(self.traces):
            for ev in self.traces[sid]:
                lines.append(f"{sid}\t{ev.time_s:.1f}\t{ev.event}\t{_clean(ev.detail)}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_traces(text: str) -> dict[str, list[TraceEvent]]:
        traces: dict[str, list[TraceEvent]] = {}
        for line in text.splitlines()[1:]:
            sid, time_s, event, detail = line.split("\t")
            traces.setdefault(sid, []).append(TraceEvent(float(time_s), event, detail))
        return traces

    def summary(self) -> str:
        agg = self.aggregates()

        def pct(value: float | None) -> str:
            return "n/a" if value is None else f"{100 * value:.1f}%"

        lines = [
            f"{self.kind} report: {agg['calls']} calls, {agg['matches']} matched expectations, {agg['errors']} errors",
            f"robocalls: {agg['robocalls']}",
            f"blocked robocall rate: {pct(agg['blocked_robocall_rate'])}",
            f"label accuracy: {pct(agg['label_accuracy'])}",
            f"forward correctness: {pct(agg['forward_correctness'])}",
            f"false blocks: {agg['false_block_count']}",
            f"evasions (robocalls forwarded): {agg['evasions']}",
            "dispositions:",
        ]
        lines += [f"  {name}: {count}" for name, count in agg["dispositions"].items()]
        misses = [r for r in self.rows if not r.match]
        if misses:
            lines.append("mismatches:")
            lines += [
                f"  {r.scenario_id}: expected {r.expected}{'/' + r.expected_basis if r.expected_basis else ''}, "
                f"got {r.actual}{'/' + r.actual_basis if r.actual_basis else ''}{' (' + r.error + ')' if r.error else ''}"
                for r in misses
            ]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> None:
        from robocallguard import plots

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_text(out / "report.tsv", self.to_tsv())
        _write_text(out / "trace.tsv", self.trace_tsv())
        _write_text(out / "summary.txt", self.summary())
        plots.report_figures(self, out / "figures")


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _trace(outcome: ScreeningOutcome) -> list[TraceEvent]:
    events = [TraceEvent(t, "prompt", name) for t, name in outcome.prompts]
    if outcome.hit is not None:
        events.append(TraceEvent(outcome.hit.time_s, "hit", " ".join(outcome.hit.matched_text)))
    if outcome.silence_s is not None and outcome.reminder_s is not None and outcome.silence_label is not None:
        events.append(TraceEvent(outcome.reminder_s, "silence", f"{outcome.silence_s:.1f}s {outcome.silence_label.value}"))
    if outcome.ring_s is not None:
        events.append(TraceEvent(outcome.ring_s, "ring", outcome.caller_name))
    if outcome.hangup_s is not None:
        events.append(TraceEvent(outcome.hangup_s, "hangup", outcome.ended_by))
    return sorted(events, key=lambda e: e.time_s)


def run_scenario(
    scenario: Scenario,
    policy: Policy,
    seed: int = 0,
    store_dir: Path | None = None,
    max_ticks: int = 10_000,
) -> tuple[ScreeningOutcome, CalleeLog, ScriptedCaller]:
    """One scenario on a fresh network; the policy seed is replaced by one derived from ``seed``."""
    network = Network()
    callee = CalleeLog()
    store = OutcomeStore(store_dir) if store_dir is not None else None
    va = VirtualAssistant(network, VA_ADDRESS, seeded_policy(policy, scenario_seed(seed, scenario.scenario_id)), callee, store)
    dialer = Dialer(network, CALLER_ADDRESS)
    caller = ScriptedCaller(scenario.script, scenario.reactive, scenario.hangup_after_s)
    handle = dialer.place_call(VA_ADDRESS, scenario.caller_id, caller)
    network.run_until(lambda: handle.session_id in va.outcomes and handle.settled, max_ticks)
    return va.outcomes[handle.session_id], callee, caller


def _row(scenario: Scenario, outcome: ScreeningOutcome, expected: str) -> ReportRow:
    basis = outcome.label_basis.value if outcome.label_basis is not LabelBasis.NONE else ""
    return ReportRow(
        scenario_id=scenario.scenario_id,
        caller_id=scenario.caller_id.digits,
        caller_kind=scenario.caller_kind,
        expected=expected,
        actual=outcome.disposition.value,
        expected_basis=scenario.expected_label_basis.value if scenario.expected_label_basis else "",
        actual_basis=basis,
        hit_s=outcome.hit.time_s if outcome.hit else None,
        reminder_s=outcome.reminder_s,
        silence_s=outcome.silence_s,
        hangup_s=outcome.hangup_s,
        ring_s=outcome.ring_s,
        ended_by=outcome.ended_by,
        caller_name=outcome.caller_name,
        transcript=f"sessions/{scenario.scenario_id}/{outcome.transcript_path}" if outcome.transcript_path else "",
        error=outcome.error,
    )


def _fresh_sessions_dir(out_dir: Path | None) -> Path | None:
    if out_dir is None:
        return None
    sessions = Path(out_dir) / "sessions"
    # owned by the harness: a rerun replaces it instead of appending to old logs
    if sessions.exists():
        shutil.rmtree(sessions)
    return sessions


def run_scenario_list(
    scenarios: Sequence[Scenario], policy: Policy, seed: int = 0, out_dir: str | Path | None = None, kind: str = "screen"
) -> RunReport:
    sessions = _fresh_sessions_dir(Path(out_dir) if out_dir is not None else None)
    rows, traces = [], {}
    for scenario in scenarios:
        store_dir = sessions / scenario.scenario_id if sessions is not None else None
        outcome, _, _ = run_scenario(scenario, policy, seed, store_dir)
        expected = EXPECT_BLOCKED if kind == "replay" else scenario.expected.value
        rows.append(_row(scenario, outcome, expected))
        traces[scenario.scenario_id] = _trace(outcome)
    report = RunReport(rows, traces, kind=kind, t3_s=policy.timers.t3_s)
    if out_dir is not None:
        report.write(out_dir)
    return report


def run_scenarios(path: str | Path, policy_path: str | Path, seed: int | None = None, out_dir: str | Path | None = None) -> RunReport:
    from robocallguard.screening import load_policy

    policy = load_policy(policy_path)
    scenarios = load_scenarios(path)
    return run_scenario_list(scenarios, policy, policy.seed if seed is None else seed, out_dir)


def read_representatives(path: str | Path) -> list[tuple[int, str]]:
    path = Path(path)
    reps = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].lstrip("-").isdigit():
            raise ScenarioError(f"{path}:{lineno}: expected 'cluster_id<TAB>doc_id', got {line!r}")
        reps.append((int(parts[0]), parts[1]))
    return reps


def replay_scenarios(representatives: Sequence[tuple[int, str]], corpus_dir: str | Path) -> list[Scenario]:
    """Each representative transcript becomes a recording played from pickup at the default rate."""
    corpus_dir = Path(corpus_dir)
    docs = {d.doc_id: d for d in load_corpus(corpus_dir)}
    scenarios = []
    for i, (_, doc_id) in enumerate(representatives):
        doc = docs.get(doc_id)
        if doc is None:
            raise MissingDocumentError(doc_id, corpus_dir)
        tokens = doc.caller_tokens
        script = (Utterance(tokens, 0.0),) if tokens else ()
        scenarios.append(
            Scenario(doc_id, CallerId(f"555{i:07d}"), script, False, Disposition.BLOCKED_ROBOCALL, caller_kind="robocall")
        )
    return scenarios


def replay_corpus(
    representatives_path: str | Path,
    corpus_dir: str | Path,
    policy_path: str | Path,
    seed: int | None = None,
    out_dir: str | Path | None = None,
) -> RunReport:
    from robocallguard.screening import load_policy

    policy = load_policy(policy_path)
    scenarios = replay_scenarios(read_representatives(representatives_path), corpus_dir)
    return run_scenario_list(scenarios, policy, policy.seed if seed is None else seed, out_dir, kind="replay")


def write_cluster_outputs(result: ClusterResult, out_dir: str | Path) -> None:
    from robocallguard import plots

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    docs = result.matrix.docs
    labels = result.assignment.labels
    _write_text(out / "clusters.tsv", "".join(f"{d}\t{int(l)}\n" for d, l in zip(docs, labels)))
    _write_text(out / "representatives.tsv", "".join(f"{cid}\t{doc}\n" for cid, doc in sorted(result.reps.items())))
    kd = k_distances(result.distance, result.assignment.min_pts)
    _write_text(
        out / "kdistance.tsv",
        f"# eps\t{result.assignment.eps!r}\n# min_pts\t{result.assignment.min_pts}\n"
        + "".join(f"{i}\t{v!r}\n" for i, v in enumerate(kd.tolist())),
    )
    vectors = result.space.doc_vectors
    _write_text(
        out / "topics.tsv",
        "".join(
            f"{d}\t{int(l)}\t" + "\t".join(repr(float(x)) for x in vectors[i, : min(2, result.space.k)]) + "\n"
            for i, (d, l) in enumerate(zip(docs, labels))
        ),
    )
    s = result.space.singular_values
    summary = [
        f"documents: {len(docs)}",
        f"vocabulary: {len(result.matrix.vocab)}",
        f"empty documents: {len(result.matrix.zero_rows)}",
        f"topics (k): {result.space.k}",
        f"eps: {result.assignment.eps:.6f}",
        f"min_pts: {result.assignment.min_pts}",
        f"clusters: {result.assignment.n_clusters}",
        f"noise: {result.assignment.n_noise}",
        "leading singular values: " + " ".join(f"{v:.4f}" for v in s[:10]),
        "representatives:",
    ]
    for cid, doc in sorted(result.reps.items()):
        summary.append(f"  {cid}\t{doc}\t{len(result.assignment.members(cid))} members")
    _write_text(out / "cluster_summary.txt", "\n".join(summary) + "\n")
    plots.cluster_figures(out, out / "figures")


def cluster_cmd(
    corpus_dir: str | Path,
    k: int = DEFAULT_K,
    eps: float | None = DEFAULT_EPS,
    min_pts: int = DEFAULT_MIN_PTS,
    out_dir: str | Path | None = None,
) -> ClusterResult:
    """``eps=None`` chooses eps from the corpus with the k-distance elbow."""
    corpus = load_corpus(corpus_dir)
    if not corpus:
        raise ValueError(f"no .txt transcripts in {corpus_dir}")
    result = cluster_corpus(corpus, k=k, eps=eps, min_pts=min_pts)
    if out_dir is not None:
        write_cluster_outputs(result, out_dir)
    return result


def rerender(out_dir: str | Path) -> list[str]:
    """Rebuild summaries and figures from the tables already in ``out_dir``."""
    from robocallguard import plots

    out = Path(out_dir)
    done = []
    if (out / "report.tsv").exists():
        report = RunReport.from_tsv((out / "report.tsv").read_text(encoding="utf-8"))
        if (out / "trace.tsv").exists():
            report.traces = RunReport.parse_traces((out / "trace.tsv").read_text(encoding="utf-8"))
        _write_text(out / "summary.txt", report.summary())
        plots.report_figures(report, out / "figures")
        done.append("report")
    if (out / "clusters.tsv").exists():
        plots.cluster_figures(out, out / "figures")
        done.append("clusters")
    if not done:
        raise FileNotFoundError(f"no report.tsv or clusters.tsv in {out}")
    return done
