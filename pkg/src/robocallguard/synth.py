"""Deterministic synthetic callers and transcript corpora.

Stand-ins for honeypot recordings and study participants: robocall campaigns
built from paraphrasable sentence templates, unrelated misdial transcripts,
scripted legitimate callers and live unwanted callers.
"""

from __future__ import annotations

import random
from pathlib import Path

from robocallguard.audio import DEFAULT_RATE_WPS, Utterance
from robocallguard.text import levenshtein, normalize

# Each campaign is a list of sentence slots; each slot lists interchangeable phrasings.
CAMPAIGNS: dict[str, list[list[str]]] = {
    "warranty": [
        ["this is an important message about your vehicle warranty", "we are calling about your car warranty coverage", "this is a final notice regarding your auto warranty"],
        ["our records show the factory warranty on your vehicle has expired", "the manufacturer warranty on your car is about to expire", "your vehicle warranty coverage is expiring soon"],
        ["we can extend your coverage before it is too late", "you still qualify to extend your vehicle protection plan", "we can reinstate your warranty coverage today"],
        ["repairs can cost thousands without a protection plan", "without coverage expensive repairs are your responsibility", "engine and transmission repairs are covered under our plan"],
        ["speak with a warranty specialist today", "talk to a vehicle protection advisor now", "get your warranty reinstated by a specialist"],
    ],
    "tax": [
        ["this call is from the tax department regarding a lawsuit", "this is an urgent notice from the federal tax agency", "the tax bureau has filed a lawsuit in your name"],
        ["there is a legal case filed against you for tax fraud", "a warrant has been issued for unpaid back taxes", "your tax return shows serious discrepancies"],
        ["the local sheriff will arrest you unless you respond", "officers will be dispatched to detain you", "failure to respond will lead to arrest and seizure of assets"],
        ["settle the outstanding tax balance immediately", "resolve this tax matter before legal action", "clear the tax penalty today to avoid prosecution"],
        ["contact the tax enforcement officer right away", "return this call to the tax investigation unit", "speak with a tax case officer urgently"],
    ],
    "insurance": [
        ["are you looking for affordable health insurance", "we have great news about low cost health coverage", "health insurance premiums just dropped for your area"],
        ["plans start as low as forty dollars a month", "you may qualify for premium subsidies this season", "coverage includes doctor visits prescriptions and hospital care"],
        ["open enrollment ends very soon", "enrollment deadlines are approaching quickly", "limited enrollment slots remain this month"],
        ["a licensed insurance agent can compare plans for you", "our licensed agents will find the best medical plan", "compare dozens of health plans with a licensed agent"],
        ["get a free health insurance quote today", "receive your free medical coverage quote now", "ask about your free health plan quote"],
    ],
    "loans": [
        ["this message concerns your federal student loans", "we are reaching out about student loan forgiveness", "new student loan forgiveness programs are available"],
        ["you may qualify to have your student debt forgiven", "your student loan payments could be reduced to zero", "borrowers like you qualify for loan discharge"],
        ["the forgiveness application window closes soon", "loan forgiveness funding is limited this year", "the deadline for the forgiveness program is approaching"],
        ["our loan counselors will handle the paperwork", "a student loan counselor will review your eligibility", "let a loan specialist file the forgiveness forms"],
        ["do not miss your chance at student debt relief", "secure your student loan relief today", "find out if your student loans qualify"],
    ],
    "cardrate": [
        ["this is cardholder services calling about your credit card", "cardholder services has an offer on your credit card account", "this is a courtesy call from cardholder services"],
        ["you qualify to lower your credit card interest rate", "your card interest rate can drop to as low as six percent", "we can reduce the interest rate on your credit cards"],
        ["this offer expires at the end of the billing cycle", "the reduced rate offer is only available this cycle", "this is your final chance for the lower interest rate"],
        ["consolidate your card balances and save money", "lower rates could save you thousands on card balances", "pay down card debt faster with a lower rate"],
        ["speak with a cardholder services representative", "talk to a card account specialist today", "a cardholder representative is standing by"],
    ],
    "cruise": [
        ["congratulations you have been selected for a free cruise", "you won a complimentary bahamas cruise vacation", "this is your travel rewards cruise confirmation"],
        ["the cruise includes two nights aboard a luxury ship", "your vacation package covers cabin meals and entertainment", "enjoy sunny beaches and a luxury cruise ship"],
        ["only port taxes and fees are required", "you only cover the small port fee", "a small booking fee reserves your cabin"],
        ["this vacation offer is for adults over twenty five", "the travel promotion is limited to one cabin per household", "the cruise certificate expires in days"],
        ["claim your cruise vacation now", "reserve your bahamas cruise today", "confirm your free vacation immediately"],
    ],
    "benefits": [
        ["this is a notice from the benefits administration office", "your social benefits number has been suspended", "we detected suspicious activity on your benefits number"],
        ["your benefits number was used in criminal activity", "fraudulent activity was found under your benefits identity", "your benefits identity was linked to illegal transactions"],
        ["your benefits account will be frozen", "all benefits payments will be stopped", "your benefit payments will be suspended"],
        ["verify your identity with a federal agent", "an investigator must confirm your identity", "confirm your identity to reactivate your benefits"],
        ["act now to protect your benefits", "respond today to avoid losing benefits", "resolve this benefits suspension immediately"],
    ],
    "solar": [
        ["homeowners in your area qualify for free solar panels", "your home qualifies for a no cost solar installation", "new solar energy programs cover homeowners in your county"],
        ["solar panels cut your electric bill in half", "generate your own clean electricity from the sun", "solar power lowers monthly utility costs"],
        ["government energy rebates pay for the installation", "energy incentives cover installation costs", "solar tax credits make panels nearly free"],
        ["a solar consultant will assess your roof", "our energy advisor will inspect your roof for free", "a roof survey determines your solar savings"],
        ["schedule your free solar assessment", "book your solar energy consultation", "see how much solar can save you"],
    ],
    "shipping": [
        ["this is an automated message about your online order", "we are calling about a suspicious online purchase", "your online retail account placed a large order"],
        ["an order for a new smartphone was charged to your account", "a laptop purchase of nine hundred dollars was flagged", "a gift card order was billed to your account"],
        ["if you did not authorize this purchase we must cancel it", "unauthorized orders must be reported immediately", "the shipment will be delivered unless you cancel"],
        ["our fraud department can issue a refund", "a refund specialist will reverse the charge", "we can block the shipment and refund you"],
        ["speak with our order security team", "talk to an account protection agent", "reach the retail fraud department now"],
    ],
    "medicare": [
        ["seniors on medicare qualify for a free back brace", "medicare recipients can receive free knee braces", "your medicare plan covers a free pain relief brace"],
        ["the brace relieves chronic joint pain", "doctors recommend braces for arthritis pain", "the brace supports your back and knees"],
        ["there is no cost to you under medicare", "medicare pays the full cost of the brace", "your brace ships at zero cost"],
        ["we only need to verify your medicare number", "confirm your medicare card details for shipping", "a benefits coordinator will verify your medicare card"],
        ["order your free brace today", "claim your medicare covered brace now", "have your brace shipped this week"],
    ],
}

CLUSTER_CAMPAIGNS = ("warranty", "tax", "insurance", "loans", "cardrate")

SHORT_KEYWORD_LINES = [
    "press one to speak with an agent now",
    "press nine to be removed from our list",
    "enter your zip code on the keypad to continue",
    "press one now to claim this offer",
    "enter the last four digits of your card to continue",
]

MISDIALS = [
    "mom its jessica running behind pick me up at the train station",
    "grandpa happy birthday we adore you lots of love from the kids",
    "dentist clinic confirming thursday cleaning appointment with hygienist patel",
    "dave bring charcoal saturday barbecue starts at noon",
    "honey forgot groceries grab milk eggs bread and bananas",
    "coach says practice moved to the north field tomorrow evening",
    "neighbor your dog escaped again hes sitting on my porch",
]

COMMON_NAMES = "james mary robert patricia john jennifer michael linda william elizabeth david barbara richard susan joseph jessica thomas sarah"


def _paraphrase(campaign: str, rng: random.Random) -> str:
    slots = CAMPAIGNS[campaign]
    return " ".join(rng.choice(options) for options in slots)


def campaign_transcripts(campaign: str, n: int, seed: int = 0) -> list[str]:
    rng = random.Random(f"{campaign}:{seed}")
    return [_paraphrase(campaign, rng) for _ in range(n)]


def words_for_seconds(seconds: float, rate: float = DEFAULT_RATE_WPS) -> int:
    return int(seconds * rate)


def long_pitch(campaign: str, rng: random.Random, min_seconds: float = 30.0) -> str:
    """A looping recorded pitch that keeps talking past the reminder window."""
    parts: list[str] = []
    while len(" ".join(parts).split()) < words_for_seconds(min_seconds):
        parts.append(_paraphrase(campaign, rng))
    return " ".join(parts)


def short_pitch(campaign: str, rng: random.Random, keyword_line: str | None, max_seconds: float = 15.0) -> str:
    budget = words_for_seconds(max_seconds)
    slots = CAMPAIGNS[campaign]
    words = (rng.choice(slots[0]) + " " + rng.choice(slots[1])).split()
    tail = keyword_line.split() if keyword_line else rng.choice(slots[4]).split()
    words = words[: budget - len(tail)] + tail
    return " ".join(words)


def contains_name(text: str, names: tuple[str, ...] = ("taylor",), max_edit: int = 1) -> bool:
    tokens = normalize(text)
    for name in names:
        parts = normalize(name)
        for i in range(len(tokens) - len(parts) + 1):
            if sum(levenshtein(a, b) for a, b in zip(tokens[i : i + len(parts)], parts)) <= max_edit:
                return True
    return False


def robocall_corpus(n: int = 50, seed: int = 0) -> dict[str, str]:
    """``n`` robocall transcripts spread over all campaigns, keyed by doc id."""
    rng = random.Random(f"robocalls:{seed}")
    names = sorted(CAMPAIGNS)
    docs = {}
    for i in range(n):
        campaign = names[i % len(names)]
        docs[f"robo-{i:03d}-{campaign}"] = long_pitch(campaign, rng)
    return docs


def clustering_corpus(per_campaign: int = 10, seed: int = 0) -> tuple[dict[str, str], dict[str, str]]:
    """Five campaigns of paraphrased transcripts plus unrelated misdials.

    Returns ``(docs, truth)`` where truth maps doc id to campaign name or ``"misdial"``.
    """
    docs, truth = {}, {}
    for campaign in CLUSTER_CAMPAIGNS:
        for j, text in enumerate(campaign_transcripts(campaign, per_campaign, seed)):
            doc_id = f"{campaign}-{j:02d}"
            docs[doc_id] = text
            truth[doc_id] = campaign
    for j, text in enumerate(MISDIALS):
        doc_id = f"misdial-{j:02d}"
        docs[doc_id] = text
        truth[doc_id] = "misdial"
    return docs, truth


def write_corpus(docs: dict[str, str], directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for doc_id, text in sorted(docs.items()):
        (directory / f"{doc_id}.txt").write_text(text + "\n", encoding="utf-8", newline="\n")
    return directory


def caller_number(index: int, prefix: str = "555") -> str:
    return f"{prefix}{index:07d}"


def robocall_script(text: str, offset_s: float = 0.0) -> list[Utterance]:
    return [Utterance(text, offset_s)]


def legitimate_script(
    name: str, offset_s: float, caller_name: str = "alex", repeat_every_s: float | None = None, until_s: float = 35.0
) -> list[Utterance]:
    """A caller who states the callee's name at ``offset_s`` and then their own name.

    With ``repeat_every_s`` the pair is repeated while the next mention still
    falls before ``until_s``.
    """
    script = []
    t = offset_s
    while True:
        script.append(Utterance(f"{name} please", t))
        # answers the VA's follow-up question once it has been asked
        script.append(Utterance(f"this is {caller_name}", t + 3.0))
        if repeat_every_s is None or t + repeat_every_s >= until_s:
            break
        t += repeat_every_s
    return script


def human_unwanted_script(wrong_name: str = "robert", duration_s: float = 33.0) -> list[Utterance]:
    """A telemarketer who keeps asking for the wrong person."""
    line = f"hi i would like to speak with {wrong_name} about an exclusive offer for homeowners"
    n = len(line.split())
    span = n / DEFAULT_RATE_WPS
    script = []
    t = 0.0
    while t + span <= duration_s:
        script.append(Utterance(line, t))
        t = round(t + span + 1.0, 1)
    return script


def common_name_attack(extra: str = COMMON_NAMES + " taylor") -> str:
    return "hello is this " + extra + " we have an important message for you"


# ---------------------------------------------------------------- scenario suites

CALLEE_NAME = "taylor"
LEGIT_OFFSETS = (2.0, 6.0, 15.0, 30.0)
REPEAT_EVERY_S = 8.0
WHITELISTED = ("2125550101", "2125550102")
GLOBAL_WHITELISTED = ("8005550199",)
BLACKLISTED = ("9005550666", "9005550667")


def _scenario(sid: str, number: str, script, reactive: bool, expected: str, basis: str | None = None, **extra):
    from robocallguard.harness import Scenario
    from robocallguard.screening import Disposition, LabelBasis
    from robocallguard.wire import CallerId

    return Scenario(
        sid,
        CallerId(number),
        tuple(script),
        reactive,
        Disposition(expected),
        LabelBasis(basis) if basis else None,
        **extra,
    )


def robocall_scenarios(docs: dict[str, str]) -> list:
    """Every transcript played as a non-reactive recording from pickup."""
    return [
        _scenario(doc_id, caller_number(i), robocall_script(text), False, "BlockedRobocall", "silence_rule")
        for i, (doc_id, text) in enumerate(sorted(docs.items()))
    ]


def labeling_suite(seed: int = 0) -> list:
    """70 long pitches, 20 short pitches asking to press/enter, 10 short pitches without."""
    rng = random.Random(f"labeling:{seed}")
    names = sorted(CAMPAIGNS)
    out = []
    for i in range(70):
        text = long_pitch(names[i % len(names)], rng)
        out.append(_scenario(f"long-{i:03d}", caller_number(1000 + i), robocall_script(text), False, "BlockedRobocall", "silence_rule"))
    for i in range(20):
        line = SHORT_KEYWORD_LINES[i % len(SHORT_KEYWORD_LINES)]
        text = short_pitch(names[i % len(names)], rng, line)
        out.append(_scenario(f"short-kw-{i:03d}", caller_number(2000 + i), robocall_script(text), False, "BlockedRobocall", "keyword_override"))
    for i in range(10):
        text = short_pitch(names[i % len(names)], rng, None)
        # the known failure mode: a short recording is silent during the reminder
        out.append(_scenario(f"short-plain-{i:03d}", caller_number(3000 + i), robocall_script(text), False, "BlockedHuman", "silence_rule"))
    return out


def legitimate_suite(n: int = 20, repeat: bool = False) -> list:
    """Callers asking for the callee by name at offsets cycling through LEGIT_OFFSETS."""
    names = [w for w in COMMON_NAMES.split() if w != CALLEE_NAME]
    out = []
    for i in range(n):
        offset = LEGIT_OFFSETS[i % len(LEGIT_OFFSETS)]
        script = legitimate_script(CALLEE_NAME, offset, names[i % len(names)], REPEAT_EVERY_S if repeat else None)
        prefix = "repeat" if repeat else "legit"
        out.append(_scenario(f"{prefix}-{i:03d}", caller_number(4000 + i), script, False, "Forwarded", caller_kind="human"))
    return out


def example_scenarios() -> list:
    """One scenario per behaviour the screening pipeline distinguishes."""
    rng = random.Random("examples")
    return [
        _scenario("correct-name", caller_number(5000), legitimate_script(CALLEE_NAME, 6.0, "jordan"), False, "Forwarded", caller_kind="human"),
        _scenario("long-pitch", caller_number(5001), robocall_script(long_pitch("warranty", rng)), False, "BlockedRobocall", "silence_rule"),
        _scenario("wrong-name", caller_number(5002), human_unwanted_script(), True, "BlockedHuman", "silence_rule"),
        _scenario(
            "short-press",
            caller_number(5003),
            robocall_script(short_pitch("cardrate", rng, SHORT_KEYWORD_LINES[0])),
            False,
            "BlockedRobocall",
            "keyword_override",
        ),
        _scenario("short-plain", caller_number(5004), robocall_script(short_pitch("solar", rng, None)), False, "BlockedHuman", "silence_rule"),
        _scenario("common-names", caller_number(5005), robocall_script(common_name_attack()), False, "Forwarded", caller_kind="robocall"),
        _scenario("hangs-up", caller_number(5006), robocall_script(short_pitch("tax", rng, None)), False, "BlockedHuman", "silence_rule", hangup_after_s=12.0),
        _scenario("whitelisted", WHITELISTED[0], [], True, "WhitelistPass", caller_kind="human"),
        _scenario("global-whitelisted", GLOBAL_WHITELISTED[0], [], True, "WhitelistPass", caller_kind="human"),
        _scenario("blacklisted", BLACKLISTED[0], robocall_script(long_pitch("tax", rng)), False, "BlacklistDrop"),
    ]


POLICY_TEMPLATE = """# screening policy
names = {names}
lists = lists.txt
t1 = 20
t2 = 35
t3 = 5
miss_probability = {miss}
seed = 0
"""


def lists_text() -> str:
    lines = ["# W: user whitelist, G: global whitelist, B: blacklist"]
    lines += [f"W {n}" for n in WHITELISTED]
    lines += [f"G {n}" for n in GLOBAL_WHITELISTED]
    lines += [f"B {n}" for n in BLACKLISTED]
    return "\n".join(lines) + "\n"


def write_shipped_data(directory: str | Path, seed: int = 0) -> list[Path]:
    """Regenerate the data tree the acceptance suite and README examples use."""
    from robocallguard.harness import dump_scenarios

    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = []

    def put(rel: str, text: str) -> None:
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)

    put("policy.conf", POLICY_TEMPLATE.format(names=CALLEE_NAME, miss=0.0))
    put("policy_miss50.conf", POLICY_TEMPLATE.format(names=CALLEE_NAME, miss=0.5))
    put("lists.txt", lists_text())
    robocalls = robocall_corpus(seed=seed)
    for doc_id, text in sorted(robocalls.items()):
        put(f"robocalls/{doc_id}.txt", text + "\n")
    docs, _ = clustering_corpus(seed=seed)
    for doc_id, text in sorted(docs.items()):
        put(f"campaigns/{doc_id}.txt", text + "\n")
    put("scenarios/examples.json", dump_scenarios(example_scenarios()))
    put("scenarios/robocalls.json", dump_scenarios(robocall_scenarios(robocalls)))
    put("scenarios/labeling.json", dump_scenarios(labeling_suite(seed)))
    put("scenarios/legitimate.json", dump_scenarios(legitimate_suite()))
    put("scenarios/legitimate_repeat.json", dump_scenarios(legitimate_suite(repeat=True)))
    return written
