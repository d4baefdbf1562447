"""Clients and deterministic mocks for the three external model services.

The pipeline depends on a chat LLM, an MT engine and a translation-pair
scorer.  Each service has an HTTP client speaking a small JSON protocol and
a seed-parameterised mock, so the whole pipeline can run offline.  Mocks are
part of the library, not test-only helpers.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import requests

from .languages import lang_code

ENV_LLM_URL = "TERMWEAVE_LLM_URL"
ENV_LLM_API_KEY = "TERMWEAVE_LLM_API_KEY"
ENV_MT_URL = "TERMWEAVE_MT_URL"
ENV_SCORER_URL = "TERMWEAVE_SCORER_URL"

VALID_ROLES = ("system", "user", "assistant")


class BackendError(Exception):
    """Failure reported by or about a model backend."""

    KINDS = ("network", "rate_limited", "malformed_response", "backend_reported")

    def __init__(self, kind: str, message: str, retryable: bool = False):
        if kind not in self.KINDS:
            raise ValueError(f"unknown error kind {kind!r}")
        if kind == "rate_limited" and not retryable:
            raise ValueError("rate_limited errors are retryable by definition")
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.retryable = retryable

    def __repr__(self):
        return f"BackendError(kind={self.kind!r}, retryable={self.retryable}, message={self.message!r})"


@dataclass(frozen=True)
class ChatRequest:
    model_id: str
    messages: tuple  # ((role, content), ...)
    temperature: float = 0.0
    top_p: float = 1.0

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        for role, _content in self.messages:
            if role not in VALID_ROLES:
                raise ValueError(f"unknown role {role!r}")
        if self.messages[-1][0] != "user":
            raise ValueError("last message must have role 'user'")
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must be in [0, 2]")
        if not 0 < self.top_p <= 1:
            raise ValueError("top_p must be in (0, 1]")

    @classmethod
    def user(cls, model_id: str, prompt: str, temperature: float = 0.0, top_p: float = 1.0):
        return cls(model_id=model_id, messages=(("user", prompt),),
                   temperature=temperature, top_p=top_p)

    def canonical(self) -> str:
        """Stable serialisation used for hashing and cache keys.

        Keys are sorted and floats normalised (repr of float) so that the
        same request built from differently-ordered config sources hashes
        identically.
        """
        body = {
            "model": self.model_id,
            "messages": [{"role": r, "content": c} for r, c in self.messages],
            "temperature": float(self.temperature),
            "top_p": float(self.top_p),
        }
        return json.dumps(body, ensure_ascii=False, sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TranslateRequest:
    source_lang: str
    target_lang: str
    texts: tuple
    beam_size: int = 4

    def __post_init__(self):
        if not self.texts:
            raise ValueError("texts must be non-empty")
        if self.source_lang == self.target_lang:
            raise ValueError("source_lang and target_lang must differ")
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")


@dataclass(frozen=True)
class ScoreRequest:
    source_lang: str
    target_lang: str
    pairs: tuple  # ((source, target), ...)
    max_batch_tokens: int = 2024

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("pairs must be non-empty")
        if any(not tgt for _src, tgt in self.pairs):
            raise ValueError("target strings must be non-empty")
        if self.max_batch_tokens < 1:
            raise ValueError("max_batch_tokens must be positive")


# ---------------------------------------------------------------------------
# Retry / rate limiting / parallelism


def with_retries(fn: Callable[[], str], max_attempts: int = 5, base_delay: float = 0.2,
                 sleep: Callable[[float], None] = time.sleep,
                 rng: Optional[random.Random] = None):
    """Call fn, retrying retryable BackendErrors with exponential backoff + jitter."""
    rng = rng or random.Random()
    last: Optional[BackendError] = None
    for attempt in range(max_attempts):
        try:
            return fn()
        except BackendError as err:
            if not err.retryable:
                raise
            last = err
            if attempt < max_attempts - 1:
                sleep(base_delay * (2 ** attempt) * (1 + rng.random()))
    assert last is not None
    raise last


class TokenBucket:
    """Thread-safe token bucket; acquire() blocks until a token is available."""

    def __init__(self, rate_per_sec: float, capacity: Optional[float] = None):
        if rate_per_sec <= 0:
            raise ValueError("rate_per_sec must be positive")
        self.rate = rate_per_sec
        self.capacity = capacity if capacity is not None else rate_per_sec
        self._tokens = self.capacity
        self._last = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = time.monotonic()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1:
                    self._tokens -= 1
                    return
                wait = (1 - self._tokens) / self.rate
            time.sleep(wait)


def parallel_map(fn, items: Sequence, max_workers: int = 4,
                 bucket: Optional[TokenBucket] = None) -> list:
    """Apply fn to items with bounded parallelism; results in input order.

    Exceptions are captured and returned in place of results so callers can
    apply their own per-item failure policy.
    """
    if max_workers <= 1 or len(items) <= 1:
        out = []
        for item in items:
            if bucket:
                bucket.acquire()
            try:
                out.append(fn(item))
            except Exception as err:  # noqa: BLE001 - caller triages
                out.append(err)
        return out

    def call(item):
        if bucket:
            bucket.acquire()
        return fn(item)

    results = [None] * len(items)
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(call, item): i for i, item in enumerate(items)}
        for fut, i in futures.items():
            try:
                results[i] = fut.result()
            except Exception as err:  # noqa: BLE001
                results[i] = err
    return results


# ---------------------------------------------------------------------------
# HTTP clients


def _status_error(status: int, body: str) -> BackendError:
    if status == 429:
        return BackendError("rate_limited", f"HTTP 429: {body[:200]}", retryable=True)
    if status >= 500:
        return BackendError("network", f"HTTP {status}: {body[:200]}", retryable=True)
    return BackendError("backend_reported", f"HTTP {status}: {body[:200]}", retryable=False)


def _post_json(url: str, body: dict, headers: dict, timeout: float) -> dict:
    try:
        resp = requests.post(url, json=body, headers=headers, timeout=timeout)
    except requests.RequestException as err:
        raise BackendError("network", f"transport failure: {err}", retryable=True) from err
    if resp.status_code != 200:
        raise _status_error(resp.status_code, resp.text)
    try:
        return resp.json()
    except ValueError as err:
        raise BackendError("malformed_response", f"non-JSON body: {resp.text[:200]}") from err


class HttpChatClient:
    """OpenAI-style chat-completions client.

    Safe to share across worker threads; every request is independent.
    """

    def __init__(self, url: Optional[str] = None, api_key: Optional[str] = None,
                 max_attempts: int = 5, timeout: float = 60.0,
                 sleep: Callable[[float], None] = time.sleep):
        self.url = url or os.environ.get(ENV_LLM_URL)
        if not self.url:
            raise ValueError(f"no LLM endpoint; set {ENV_LLM_URL} or pass url=")
        self.api_key = api_key or os.environ.get(ENV_LLM_API_KEY)
        self.max_attempts = max_attempts
        self.timeout = timeout
        self._sleep = sleep

    def chat(self, req: ChatRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": req.model_id,
            "messages": [{"role": r, "content": c} for r, c in req.messages],
            "temperature": req.temperature,
            "top_p": req.top_p,
        }

        def attempt():
            data = _post_json(self.url, body, headers, self.timeout)
            try:
                content = data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as err:
                raise BackendError("malformed_response",
                                   f"missing choices[0].message.content: {data!r:.200}") from err
            if not isinstance(content, str):
                raise BackendError("malformed_response", "content is not a string")
            return content

        return with_retries(attempt, max_attempts=self.max_attempts, sleep=self._sleep)


class HttpMTClient:
    """Client for the minimal JSON translate endpoint.

    Request body mirrors TranslateRequest; response is {"translations": [...]}.
    """

    def __init__(self, url: Optional[str] = None, max_attempts: int = 5,
                 timeout: float = 120.0, sleep: Callable[[float], None] = time.sleep):
        self.url = url or os.environ.get(ENV_MT_URL)
        if not self.url:
            raise ValueError(f"no MT endpoint; set {ENV_MT_URL} or pass url=")
        self.max_attempts = max_attempts
        self.timeout = timeout
        self._sleep = sleep

    def translate(self, req: TranslateRequest) -> list:
        body = {
            "source_lang": req.source_lang,
            "target_lang": req.target_lang,
            "texts": list(req.texts),
            "beam_size": req.beam_size,
        }

        def attempt():
            data = _post_json(self.url, body, {"Content-Type": "application/json"}, self.timeout)
            translations = data.get("translations")
            if not isinstance(translations, list) or len(translations) != len(req.texts):
                raise BackendError("malformed_response",
                                   "translations missing or wrong cardinality")
            return [str(t) for t in translations]

        return with_retries(attempt, max_attempts=self.max_attempts, sleep=self._sleep)


class HttpScorerClient:
    """Client for the minimal JSON scoring endpoint.

    Request body mirrors ScoreRequest; response is {"scores": [...]} with one
    average log-probability per target token for each pair.
    """

    def __init__(self, url: Optional[str] = None, max_attempts: int = 5,
                 timeout: float = 120.0, sleep: Callable[[float], None] = time.sleep):
        self.url = url or os.environ.get(ENV_SCORER_URL)
        if not self.url:
            raise ValueError(f"no scorer endpoint; set {ENV_SCORER_URL} or pass url=")
        self.max_attempts = max_attempts
        self.timeout = timeout
        self._sleep = sleep

    def score_pairs(self, req: ScoreRequest) -> list:
        body = {
            "source_lang": req.source_lang,
            "target_lang": req.target_lang,
            "pairs": [{"source": s, "target": t} for s, t in req.pairs],
            "max_batch_tokens": req.max_batch_tokens,
        }

        def attempt():
            data = _post_json(self.url, body, {"Content-Type": "application/json"}, self.timeout)
            scores = data.get("scores")
            if not isinstance(scores, list) or len(scores) != len(req.pairs):
                raise BackendError("malformed_response", "scores missing or wrong cardinality")
            return [float(s) for s in scores]

        return with_retries(attempt, max_attempts=self.max_attempts, sleep=self._sleep)


# ---------------------------------------------------------------------------
# Deterministic mocks

_GEN_PROMPT_RE = re.compile(
    r'^Please use the "(?P<term>.+)" to generate just (?P<n>\d+) numbered sentences '
    r"in (?P<src>[A-Za-z]+)-(?P<tgt>[A-Za-z]+) in one Python dictionary format\.$",
    re.DOTALL,
)

_APE_PROMPT_RE = re.compile(
    r"^In the following (?P<tgtlang>[A-Za-z]+) translation, use the ", re.DOTALL
)
_APE_TERM_RE = re.compile(r'the "(?P<tgt>[^"]+)" to translate the [A-Za-z]+ term "(?P<src>[^"]+)"')

# Sentence skeletons per language, cycled deterministically.  The seeded term
# is embedded on both sides; function words keep the mock language detector
# confident.
_SKELETONS = {
    "de": (
        'Die Kommission und der Ausschuss besprechen die "{t}" in dem Bericht Nummer {i}.',
        'Der Vertreter sagte, dass die "{t}" für das Projekt {i} sehr wichtig ist.',
        'In der Sitzung {i} wurde die "{t}" von dem Ministerium und der Abteilung vorgestellt.',
    ),
    "en": (
        'The committee and the commission discussed the "{t}" in report number {i}.',
        'The representative said that the "{t}" is very important for project {i}.',
        'In meeting {i} the "{t}" was presented by the ministry and the department.',
    ),
    "cs": (
        'Výbor a komise projednaly "{t}" ve zprávě číslo {i}.',
        'Zástupce řekl, že "{t}" je pro projekt {i} velmi důležitá.',
        'Na zasedání {i} byla "{t}" představena ministerstvem a odborem.',
    ),
    "zh": (
        '委员会和部门在第{i}次会议上讨论了"{t}"的问题。',
        '代表说"{t}"对第{i}号项目非常重要。',
        '在第{i}次会议上部门介绍了"{t}"。',
    ),
}


def _skeleton(code: str, variant: int) -> str:
    bank = _SKELETONS.get(code, _SKELETONS["en"])
    return bank[variant % len(bank)]


class MockChatBackend:
    """Deterministic stand-in for the chat LLM.

    The reply is a pure function of (seed, request).  The two prompt
    templates the pipeline emits are recognised and answered usefully:
    generation prompts get a dictionary of numbered sentence pairs embedding
    the requested term, post-editing prompts get the translation with the
    requested terms appended.  Anything else gets a deterministic echo.

    drop_rate > 0 makes the generation reply omit the target side of a
    deterministic fraction of entries, to exercise parser drop handling.
    """

    def __init__(self, seed: int = 0, drop_rate: float = 0.0, ape_fix_all: bool = True):
        self.seed = seed
        self.drop_rate = drop_rate
        self.ape_fix_all = ape_fix_all

    def _rng(self, req: ChatRequest) -> random.Random:
        return random.Random(f"{self.seed}:{req.digest()}")

    def chat(self, req: ChatRequest) -> str:
        prompt = req.messages[-1][1]
        m = _GEN_PROMPT_RE.match(prompt)
        if m:
            return self._gen_reply(req, m)
        if _APE_PROMPT_RE.match(prompt):
            return self._ape_reply(req, prompt)
        rng = self._rng(req)
        return f"mock-reply-{rng.getrandbits(32):08x}"

    def _gen_reply(self, req: ChatRequest, m: re.Match) -> str:
        term = m.group("term")
        n = int(m.group("n"))
        try:
            src_code = lang_code(m.group("src"))
            tgt_code = lang_code(m.group("tgt"))
        except KeyError:
            src_code, tgt_code = "src", "tgt"
        rng = self._rng(req)
        offset = rng.randrange(1000)
        out = {}
        for i in range(1, n + 1):
            entry = {
                src_code: _skeleton(src_code, offset + i).format(t=term, i=offset + i),
                tgt_code: _skeleton(tgt_code, offset + i).format(t=term, i=offset + i),
            }
            if self.drop_rate and rng.random() < self.drop_rate:
                del entry[tgt_code]
            out[str(i)] = entry
        return json.dumps(out, ensure_ascii=False, indent=1)

    def _ape_reply(self, req: ChatRequest, prompt: str) -> str:
        terms = [t for t, _s in _APE_TERM_RE.findall(prompt)]
        tgtlang = _APE_PROMPT_RE.match(prompt).group("tgtlang")
        marker = f"\n{tgtlang}: "
        pos = prompt.rfind(marker)
        translation = prompt[pos + len(marker):] if pos >= 0 else ""
        if not self.ape_fix_all:
            return translation
        missing = [t for t in terms if t not in translation]
        if not missing:
            return translation
        return translation.rstrip() + " " + " ".join(missing)


class ScriptedChatBackend:
    """Chat backend delegating to a caller-supplied function of the request."""

    def __init__(self, fn: Callable[[ChatRequest], str]):
        self._fn = fn

    def chat(self, req: ChatRequest) -> str:
        return self._fn(req)


class EchoTranslator:
    """Mock MT engine: text -> "text-XX" with the target language code.

    Empty inputs map to empty outputs.
    """

    def translate(self, req: TranslateRequest) -> list:
        suffix = "-" + req.target_lang.split("-")[0].upper()
        return [t + suffix if t else "" for t in req.texts]


class ConstantScorer:
    """Mock scorer returning a fixed log-probability for every pair."""

    def __init__(self, logprob: float):
        if logprob > 0:
            raise ValueError("log-probability must be <= 0")
        self.logprob = logprob

    def score_pairs(self, req: ScoreRequest) -> list:
        return [self.logprob for _ in req.pairs]


class CopyScorer:
    """Mock scorer: probability 1 when target equals source, else seed-stable noise."""

    def __init__(self, seed: int = 0, floor: float = -3.0):
        self.seed = seed
        self.floor = floor

    def score_pairs(self, req: ScoreRequest) -> list:
        out = []
        for src, tgt in req.pairs:
            if src == tgt:
                out.append(0.0)
            else:
                h = hashlib.sha256(f"{self.seed}:{src}\t{tgt}".encode()).digest()
                frac = int.from_bytes(h[:8], "big") / 2**64
                out.append(self.floor * (0.2 + 0.8 * frac))
        return out


class SeededScorer:
    """Mock scorer with per-pair deterministic scores around a centre probability."""

    def __init__(self, seed: int = 0, centre: float = 0.5, spread: float = 0.3):
        if not 0 < centre <= 1:
            raise ValueError("centre must be in (0, 1]")
        self.seed = seed
        self.centre = centre
        self.spread = spread

    def score_pairs(self, req: ScoreRequest) -> list:
        out = []
        for src, tgt in req.pairs:
            h = hashlib.sha256(
                f"{self.seed}:{req.source_lang}-{req.target_lang}:{src}\t{tgt}".encode()
            ).digest()
            frac = int.from_bytes(h[:8], "big") / 2**64  # in [0, 1)
            logp = math.log(self.centre) * (1 + self.spread * (2 * frac - 1))
            out.append(min(logp, 0.0))
        return out
