"""Acceptance criteria 1-9, each at its stated tolerance.

Every test records a PASS/FAIL line (shown inline and again in the terminal
summary) before asserting. Criterion 3b is left red on purpose; see its test.
"""

import filecmp
import os
import random
import subprocess
import sys
import time

import numpy as np
import pytest

from robocallguard.audio import Utterance
from robocallguard.clustering import cluster_corpus, dbscan, lsi_project
from robocallguard.harness import CALLER_ADDRESS, VA_ADDRESS, Scenario, ScriptedCaller, load_scenarios, run_scenario, run_scenario_list
from robocallguard.interceptor import InitialDisposition, ScreeningList, initial_disposition
from robocallguard.kws import NameModel
from robocallguard.screening import Disposition, Label, Policy, VirtualAssistant, label_from_silence, load_policy
from robocallguard.telephony import CalleeLog, Dialer, Network
from robocallguard.transcription import load_corpus
from robocallguard.wire import (
    BadCallerIdError,
    BadMagicError,
    BadVersionError,
    CallerId,
    DecodeError,
    FieldMismatchError,
    MessageKind,
    TrailingBytesError,
    TruncatedError,
    UnknownKindError,
    WireMessage,
    decode_message,
    encode_message,
)

from .oracles import dbscan_oracle, rank_k_error, same_partition
from .strategies import random_message
from .verdicts import record

FRAME_S = 0.1
KEYWORDS = {"press", "enter"}


@pytest.fixture(scope="module")
def policy(data_dir):
    return load_policy(data_dir / "policy.conf")


def test_criterion_1_robocall_blocking(data_dir, policy, capsys):
    scenarios = load_scenarios(data_dir / "scenarios/robocalls.json")
    start = time.perf_counter()
    report = run_scenario_list(scenarios, policy)
    wall = time.perf_counter() - start
    agg = report.aggregates()
    # independent of the report: no script may mention the callee
    clean = all("taylor" not in u.text for s in scenarios for u in s.script)
    ok = len(scenarios) == 50 and clean and agg["blocked_robocall_rate"] == 1.0 and agg["evasions"] == 0 and wall < 5
    record(capsys, "1", ok, f"{agg['robocalls']} robocalls, blocked rate {agg['blocked_robocall_rate']:.0%}, rings {agg['evasions']}, {wall:.2f} s wall")
    assert ok


def label_oracle(scenario) -> tuple[str, str]:
    """Expected disposition from the script alone: a recording from pickup that
    ends by t1 leaves the reminder window silent; otherwise it covers it."""
    (u,) = scenario.script
    end = u.start_offset_s + len(u.text) / u.speaking_rate_wps
    assert end <= 20.0 or end >= 25.0, "ambiguous construction"
    if end >= 25.0:
        return "BlockedRobocall", "silence_rule"
    if KEYWORDS & set(u.text):
        return "BlockedRobocall", "keyword_override"
    return "BlockedHuman", "silence_rule"


def test_criterion_2_labeling(data_dir, policy, capsys):
    scenarios = load_scenarios(data_dir / "scenarios/labeling.json")
    report = run_scenario_list(scenarios, policy)
    by_id = {r.scenario_id: r for r in report.rows}
    oracle = {s.scenario_id: label_oracle(s) for s in scenarios}
    agree = sum((by_id[sid].actual, by_id[sid].actual_basis) == want for sid, want in oracle.items())
    declared = all((s.expected.value, s.expected_label_basis.value) == oracle[s.scenario_id] for s in scenarios)
    agg = report.aggregates()
    counts = agg["dispositions"]
    ok = (
        len(scenarios) == 100
        and declared
        and agree == 100
        and counts == {"BlockedHuman": 10, "BlockedRobocall": 90}
        and agg["label_accuracy"] == 0.9
    )
    record(capsys, "2", ok, f"{agree}/100 match oracle, {counts}, label accuracy {agg['label_accuracy']:.1%}")
    assert ok


def test_criterion_3a_legitimate_forwarding(data_dir, policy, capsys):
    scenarios = load_scenarios(data_dir / "scenarios/legitimate.json")
    report = run_scenario_list(scenarios, policy)
    offsets = {s.scenario_id: s.script[0].start_offset_s for s in scenarios}
    forwarded = sum(r.actual == "Forwarded" for r in report.rows)
    worst = max(abs(r.hit_s - offsets[r.scenario_id]) for r in report.rows if r.hit_s is not None)
    ok = len(scenarios) == 20 and forwarded == 20 and worst <= FRAME_S + 1e-9 and policy.names.miss_probability == 0
    record(capsys, "3a", ok, f"{forwarded}/20 forwarded, max hit offset error {worst:.1f} s")
    assert ok


@pytest.mark.xfail(
    strict=True,
    reason=(
        "unattainable as stated: with independent misses at p = 0.5 a caller whose first "
        "mention is at 30 s gets one mention before the 35 s hangup, so P(all 20 forwarded) ~ 1%"
    ),
)
def test_criterion_3b_forwarding_with_misses(data_dir, capsys):
    policy = load_policy(data_dir / "policy_miss50.conf")
    scenarios = load_scenarios(data_dir / "scenarios/legitimate_repeat.json")
    report = run_scenario_list(scenarios, policy)
    forwarded = sum(r.actual == "Forwarded" for r in report.rows)
    ok = forwarded == len(scenarios) == 20 and policy.names.miss_probability == 0.5
    record(capsys, "3b", ok, f"{forwarded}/20 forwarded with miss probability 0.5 and +8 s repeats")
    assert ok


def silence_call(policy, silence_s: float):
    """50 words (20 s) of speech ending so that the last ``silence_s`` of [20, 25) is quiet."""
    pitch = ("we have an important update about your account " * 7).split()[:50]
    script = (Utterance(tuple(pitch), round(5.0 - silence_s, 1)),)
    scenario = Scenario(f"silence-{silence_s}", CallerId("5550009999"), script, False, Disposition.BLOCKED_ROBOCALL)
    outcome, _, _ = run_scenario(scenario, policy)
    return outcome


def test_criterion_4_timeline_exactness(data_dir, policy, capsys):
    rows = []
    for name in ("robocalls", "labeling"):
        rows += run_scenario_list(load_scenarios(data_dir / f"scenarios/{name}.json"), policy).rows
    blocked = [r for r in rows if r.actual in ("BlockedRobocall", "BlockedHuman")]
    timing = all(abs(r.reminder_s - 20.0) <= FRAME_S and abs(r.hangup_s - 35.0) <= FRAME_S for r in blocked)
    direct = [label_from_silence(s, 5.0) for s in (2.4, 2.5, 2.6)]
    calls = [silence_call(policy, s) for s in (2.4, 2.5, 2.6)]
    measured = [o.silence_s for o in calls]
    end_to_end = [o.silence_label for o in calls]
    want = [Label.ROBOCALL, Label.HUMAN, Label.HUMAN]
    ok = timing and len(blocked) == 150 and direct == want and end_to_end == want and measured == pytest.approx([2.4, 2.5, 2.6])
    record(capsys, "4", ok, f"{len(blocked)} blocked calls at 20.0/35.0 s, silence {measured} -> {[l.value for l in end_to_end]}")
    assert ok


def call_once(policy, caller_id: CallerId):
    network = Network()
    callee = CalleeLog()
    va = VirtualAssistant(network, VA_ADDRESS, policy, callee)
    handle = Dialer(network, CALLER_ADDRESS).place_call(VA_ADDRESS, caller_id, ScriptedCaller(()))
    network.run_until(lambda: handle.session_id in va.outcomes and handle.settled, 10_000)
    return va.outcomes[handle.session_id], callee, handle


def test_criterion_5_interceptor_totality(capsys):
    rng = random.Random(5)

    def number():
        return CallerId("".join(rng.choice("0123456789") for _ in range(rng.randint(7, 15))))

    pool = list({number() for _ in range(3000)})
    rng.shuffle(pool)
    white, glob, black = set(pool[:400]), set(pool[400:800]), set(pool[800:1200])
    lists = ScreeningList(frozenset(white), frozenset(glob), frozenset(black))

    def membership(cid):
        if cid in white or cid in glob:
            return InitialDisposition.PASS_WHITELISTED
        if cid in black:
            return InitialDisposition.DROP_BLACKLISTED
        return InitialDisposition.SCREEN_UNKNOWN

    table = sum(initial_disposition(cid, lists) is membership(cid) for cid in pool)
    policy = Policy(NameModel(("taylor",)), lists=lists)
    expect = {
        InitialDisposition.PASS_WHITELISTED: Disposition.WHITELIST_PASS,
        InitialDisposition.DROP_BLACKLISTED: Disposition.BLACKLIST_DROP,
        InitialDisposition.SCREEN_UNKNOWN: Disposition.BLOCKED_HUMAN,
    }
    sample = pool[:30] + pool[400:430] + pool[800:830] + pool[1200:1230]
    live = bad_white = bad_black = 0
    for cid in sample:
        outcome, callee, handle = call_once(policy, cid)
        live += outcome.disposition is expect[membership(cid)]
        if membership(cid) is InitialDisposition.PASS_WHITELISTED:
            bad_white += outcome.transcript is not None or outcome.recording is not None
        if membership(cid) is InitialDisposition.DROP_BLACKLISTED:
            bad_black += bool(callee.rings() or handle.prompts or outcome.prompts)
    ok = table == len(pool) and live == len(sample) and bad_white == bad_black == 0
    record(capsys, "5", ok, f"{table}/{len(pool)} ids classified, {live}/{len(sample)} live calls, whitelist transcripts {bad_white}, blacklist rings/prompts {bad_black}")
    assert ok


def corruption_cases():
    hangup = encode_message(WireMessage(MessageKind.HANGUP, 1))
    invite = bytearray(encode_message(WireMessage(MessageKind.INVITE, 2, CallerId("5551234"))))
    letters = bytes(invite[:13]) + b"555x234" + bytes(invite[20:])
    as_hangup = bytes(invite[:3]) + bytes([int(MessageKind.HANGUP)]) + bytes(invite[4:])
    return {
        BadMagicError: [b"XG" + hangup[2:]],
        BadVersionError: [hangup[:2] + b"\x09" + hangup[3:]],
        UnknownKindError: [hangup[:3] + b"\x00" + hangup[4:], hangup[:3] + b"\x08" + hangup[4:]],
        TruncatedError: [],
        BadCallerIdError: [letters],
        FieldMismatchError: [as_hangup],
        TrailingBytesError: [hangup + b"\x00"],
    }


def test_criterion_6_protocol(capsys):
    rng = random.Random(6)
    msgs = [random_message(rng) for _ in range(10_000)]
    round_trips = sum(decode_message(encode_message(m)) == m for m in msgs)
    classes = corruption_cases()
    named = 0
    for error, blobs in classes.items():
        for blob in blobs:
            with pytest.raises(DecodeError) as info:
                decode_message(blob)
            named += type(info.value) is error
    # truncation at every byte of one message per kind names the field it cut into
    cuts = fields = 0
    for kind in MessageKind:
        msg = next(m for m in msgs if m.kind is kind)
        data = encode_message(msg)
        for cut in range(len(data)):
            with pytest.raises(DecodeError) as info:
                decode_message(data[:cut])
            cuts += type(info.value) is TruncatedError
            fields += bool(getattr(info.value, "field", ""))
    expected_cuts = sum(len(encode_message(next(m for m in msgs if m.kind is k))) for k in MessageKind)
    n_blobs = sum(len(b) for b in classes.values())
    ok = round_trips == 10_000 and named == n_blobs and cuts == fields == expected_cuts and len(classes) == 7
    record(capsys, "6", ok, f"{round_trips}/10000 round trips, {named}/{n_blobs} corruptions named, {cuts}/{expected_cuts} truncations named by field")
    assert ok


def test_criterion_7_dbscan_oracle(capsys):
    rng = np.random.default_rng(7)
    agree = 0
    for _ in range(200):
        n = int(rng.integers(1, 21))
        pts = rng.random((n, 2)) * 10
        dist = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        eps = float(rng.uniform(0.5, 3.0))
        min_pts = int(rng.integers(1, 6))
        agree += same_partition(dbscan(dist, eps, min_pts).labels.tolist(), dbscan_oracle(dist, eps, min_pts))
    ok = agree == 200
    record(capsys, "7", ok, f"{agree}/200 instances agree with the reachability oracle")
    assert ok


def test_criterion_8_clustering_recovery(data_dir, capsys):
    corpus = load_corpus(data_dir / "campaigns")
    result = cluster_corpus(corpus, k=10, eps=None, min_pts=3)
    a = result.assignment
    campaign = {d.doc_id: d.doc_id.rsplit("-", 1)[0] for d in corpus}
    misdials = {d for d, c in campaign.items() if c == "misdial"}
    labels = result.labels
    noise = {d for d, l in labels.items() if l == -1}
    pure = all(len({campaign[d] for d, l in labels.items() if l == cid}) == 1 for cid in range(a.n_clusters))
    rep_campaigns = sorted(campaign[d] for d in result.reps.values())
    full = lsi_project(result.matrix, min(result.matrix.weights.shape))
    full_err = float(np.linalg.norm(full.reconstruct() - result.matrix.weights))
    k_err = float(np.linalg.norm(result.space.reconstruct() - result.matrix.weights))
    oracle_err = rank_k_error(result.matrix.weights, 10)
    ok = (
        len(corpus) == 57
        and a.n_clusters == 5
        and noise == misdials
        and len(misdials) == 7
        and pure
        and len(set(rep_campaigns)) == 5
        and "misdial" not in rep_campaigns
        and full_err < 1e-9
        and abs(k_err - oracle_err) <= 1e-6
    )
    record(
        capsys,
        "8",
        ok,
        f"{a.n_clusters} clusters, {a.n_noise} noise, reps from {rep_campaigns}, eps {a.eps:.4f}, "
        f"full-rank error {full_err:.1e}, rank-10 error diff {abs(k_err - oracle_err):.1e}",
    )
    assert ok


def run_all_commands(data_dir, out, hash_seed):
    env = {**os.environ, "PYTHONHASHSEED": str(hash_seed)}
    policy = str(data_dir / "policy.conf")

    def cli(*args):
        return subprocess.run([sys.executable, "-m", "robocallguard", *args], env=env, capture_output=True, text=True)

    runs = [
        cli("screen", "--policy", policy, "--scenarios", str(data_dir / "scenarios/examples.json"), "--seed", "11", "--out", str(out / "screen")),
        cli("cluster", "--corpus", str(data_dir / "campaigns"), "--k", "10", "--eps", "auto", "--minpts", "3", "--out", str(out / "cluster")),
        cli("replay", "--policy", policy, "--reps", str(out / "cluster/representatives.tsv"), "--corpus", str(data_dir / "campaigns"), "--out", str(out / "replay")),
        cli("report", "--out", str(out / "screen")),
        cli("synth", "--out", str(out / "synth")),
    ]
    return [r.stdout for r in runs], [r.returncode for r in runs]


def test_criterion_9_determinism(data_dir, tmp_path, capsys):
    out_a, codes_a = run_all_commands(data_dir, tmp_path / "a", 1)
    out_b, codes_b = run_all_commands(data_dir, tmp_path / "b", 2)
    files = sorted(p.relative_to(tmp_path / "a").as_posix() for p in (tmp_path / "a").rglob("*") if p.is_file())
    other = sorted(p.relative_to(tmp_path / "b").as_posix() for p in (tmp_path / "b").rglob("*") if p.is_file())
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    ok = files == other and not mismatch and not errors and out_a == out_b and codes_a == codes_b and 2 not in codes_a
    record(capsys, "9", ok, f"{len(files)} files across 5 commands, {len(mismatch)} differ, exit codes {codes_a}")
    assert ok
