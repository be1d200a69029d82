import json
import math
import random
import threading
from decimal import Decimal, getcontext
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from itertools import combinations
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import pytest

from stakeweight.model import ValidatorSnapshot

FIXTURES = Path(__file__).parent / "fixtures"
SYNTHETIC_2023 = FIXTURES / "synthetic-2023-12-14"

getcontext().prec = 60


def hp_sqrt(n: int) -> Decimal:
    """60-digit square root, independent of math.sqrt."""
    return Decimal(n).sqrt()


def exhaustive_min_subset(weights, num, den, tol=None):
    """Smallest k such that SOME k-subset reaches num/den of the total.

    Integer weights are compared exactly. Float weights (tol given) compare
    normalized sums against num/den - tol.
    """
    m = len(weights)
    if tol is None:
        total = sum(weights)
        for k in range(1, m + 1):
            for combo in combinations(weights, k):
                if den * sum(combo) >= num * total:
                    return k
        return m
    total = math.fsum(weights)
    for k in range(1, m + 1):
        for combo in combinations(weights, k):
            if math.fsum(combo) / total >= num / den - tol:
                return k
    return m


def pairwise_gini(weights) -> float:
    """O(m^2) mean-absolute-difference Gini; exact for ints."""
    m = len(weights)
    if all(isinstance(w, int) for w in weights):
        s = sum(abs(a - b) for a in weights for b in weights)
        return float(Fraction(s, 2 * m * sum(weights)))
    s = math.fsum(abs(a - b) for a in weights for b in weights)
    return s / (2 * m * math.fsum(weights))


def log_uniform_stakes(rng: random.Random, m: int, hi: float = 1e12) -> list[int]:
    return [max(1, int(round(math.exp(rng.uniform(0.0, math.log(hi)))))) for _ in range(m)]


def random_snapshot(rng: random.Random, m_lo=4, m_hi=200, hi=1e12) -> ValidatorSnapshot:
    m = rng.randint(m_lo, m_hi)
    return ValidatorSnapshot.from_stakes(log_uniform_stakes(rng, m, hi))


@pytest.fixture
def rng():
    return random.Random(20231214)


# -- mock Cosmos-SDK staking endpoint -----------------------------------------

class MockChain:
    """In-process HTTP server speaking the staking validators API.

    ``fail_first`` makes the first N requests return HTTP 503.
    ``mode`` is "key" or "offset".
    """

    def __init__(self, validators, mode="key", fail_first=0, mutate=None):
        self.validators = validators
        self.mode = mode
        self.fail_first = fail_first
        self.mutate = mutate
        self.requests = []
        chain = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                url = urlparse(self.path)
                q = {k: v[0] for k, v in parse_qs(url.query).items()}
                chain.requests.append((url.path, q))
                if len(chain.requests) <= chain.fail_first:
                    self.send_response(503)
                    self.end_headers()
                    return
                body = json.dumps(chain.page(q)).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *a):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}"
        self.thread = threading.Thread(target=self.server.serve_forever, args=(0.02,), daemon=True)

    def page(self, q):
        limit = int(q.get("pagination.limit", 100))
        if self.mode == "key":
            start = int(q["pagination.key"]) if "pagination.key" in q else 0
        else:
            start = int(q.get("pagination.offset", 0))
        chunk = self.validators[start:start + limit]
        nxt = start + limit
        body = {
            "validators": chunk,
            "pagination": {"next_key": str(nxt) if self.mode == "key" and nxt < len(self.validators) else None,
                           "total": str(len(self.validators))},
        }
        return self.mutate(body, q) if self.mutate else body

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def cosmos_validator(i, tokens, status="BOND_STATUS_BONDED", jailed=False):
    return {
        "operator_address": f"cosmosvaloper1{i:04d}",
        "jailed": jailed,
        "status": status,
        "tokens": str(tokens),
        "description": {"moniker": f"node-{i}"},
    }


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
