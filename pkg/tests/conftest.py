import json
import random
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

SYLLABLES = ["ka", "lo", "mi", "ten", "ru", "sa", "vo", "pel", "dri", "no", "que", "zan"]


def synthetic_vocabulary(n, seed=0):
    rng = random.Random(seed)
    words = set()
    while len(words) < n:
        words.add("".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3))))
    return sorted(words)


def synthetic_corpus(n_docs, vocabulary, seed=0, p_range=(0.08, 0.4)):
    """Documents where every word appears independently with its own probability."""
    rng = random.Random(seed)
    probs = {w: rng.uniform(*p_range) for w in vocabulary}
    docs = []
    for _ in range(n_docs):
        words = [w for w in vocabulary if rng.random() < probs[w]]
        rng.shuffle(words)
        docs.append(" ".join(words))
    return docs


def hub_corpus(seed, n_themes=5, n_other=6, n_docs=600):
    """A hub word shared by otherwise disjoint themes, plus independent filler words.

    Returns the documents and the 1 + n_themes + n_other word vocabulary.
    """
    rng = random.Random(seed)
    themes = [f"theme{i}" for i in range(n_themes)]
    others = [f"word{i}" for i in range(n_other)]
    probs = {w: rng.uniform(0.05, 0.3) for w in others}
    docs = []
    for _ in range(n_docs):
        tokens = [w for w in others if rng.random() < probs[w]]
        if rng.random() < 0.4:
            tokens += ["hub", rng.choice(themes)]
        elif rng.random() < 0.02:
            tokens += rng.sample(themes, 2)
        docs.append(" ".join(tokens))
    return docs, ["hub", *themes, *others]


def random_corpus(rng, n_docs, vocab, max_len=12):
    return [" ".join(rng.choice(vocab) for _ in range(rng.randint(0, max_len))) for _ in range(n_docs)]


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def toy_corpus_dir():
    return FIXTURES / "toy_corpus"


class MockSearch:
    """State shared with the mock search handler."""

    def __init__(self):
        self.counts = {}
        self.statuses = []
        self.requests = []
        self.body = None
        self.headers = []
        self.lock = threading.Lock()

    def respond(self, query):
        with self.lock:
            self.requests.append((time.monotonic(), query))
            status = self.statuses.pop(0) if self.statuses else 200
        if status != 200:
            return status, json.dumps({"error": status})
        if self.body is not None:
            return 200, self.body.format(count=self.counts.get(query, 0))
        return 200, json.dumps({"result": {"total": self.counts.get(query, 0)}})


@pytest.fixture
def mock_search():
    state = MockSearch()

    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            query = parse_qs(urlsplit(self.path).query).get("q", [""])[0]
            state.headers.append(dict(self.headers))
            status, body = state.respond(query)
            data = body.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, args=(0.05,), daemon=True)
    thread.start()
    state.url = f"http://127.0.0.1:{server.server_address[1]}/search?q={{query}}"
    yield state
    server.shutdown()
    server.server_close()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in RESULTS.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
