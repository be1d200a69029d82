"""Reading, writing and fetching validator-set snapshots.

Two on-disk formats are understood:

* a JSON document (``schema_version`` 1) with stakes as decimal strings, and
* a plain CSV with header ``address,stake[,moniker]``.

Live sets come from a Cosmos-SDK staking REST endpoint
(``/cosmos/staking/v1beta1/validators``), paginated by ``next_key`` or offset.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import requests

from .errors import (
    DuplicateAddressError,
    EmptySetError,
    MalformedResponseError,
    NegativeStakeError,
    NetworkError,
    PaginationError,
    SchemaError,
)
from .model import Validator, ValidatorSnapshot, canonicalize

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_HEADER = ("address", "stake", "moniker")
ENDPOINT_ENV = "STAKEWEIGHT_ENDPOINT"
EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

_INT_RE = re.compile(r"-?[0-9]+")


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text, field="captured_at") -> datetime:
    if not isinstance(text, str) or not text.strip():
        raise SchemaError(field, "expected an ISO-8601 timestamp string")
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError:
        raise SchemaError(field, f"not an ISO-8601 timestamp: {text[:40]!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    try:
        return ts.astimezone(timezone.utc)
    except (OverflowError, ValueError):
        raise SchemaError(field, "timestamp out of range") from None


def parse_stake(raw, address: str, field: str = "stake") -> int:
    """Decimal-integer stake string (or JSON integer) to a positive int."""
    if isinstance(raw, bool):
        raise SchemaError(field, "stake must be a decimal integer")
    if isinstance(raw, int):
        value = raw
    elif isinstance(raw, str) and _INT_RE.fullmatch(raw.strip()):
        try:
            value = int(raw.strip())
        except ValueError:  # digit-count limit on str->int conversion
            raise SchemaError(field, "stake has too many digits") from None
    else:
        raise SchemaError(field, f"stake must be a decimal integer string, got {str(raw)[:40]!r}")
    if value < 0:
        raise NegativeStakeError(address, value)
    if value == 0:
        raise SchemaError(field, f"validator {address!r} has zero stake")
    return value


def _build(chain: str, captured_at: datetime, rows) -> ValidatorSnapshot:
    validators = []
    seen = set()
    for i, (address, stake, moniker) in enumerate(rows):
        where = f"validators[{i}]"
        if not isinstance(address, str) or not address:
            raise SchemaError(f"{where}.address", "must be a non-empty string")
        if moniker is not None and not isinstance(moniker, str):
            raise SchemaError(f"{where}.moniker", "must be a string or null")
        if address in seen:
            raise DuplicateAddressError(address)
        seen.add(address)
        validators.append(Validator(address, parse_stake(stake, address, f"{where}.stake"), moniker))
    if not validators:
        raise EmptySetError()
    return canonicalize(ValidatorSnapshot(chain, captured_at, tuple(validators)))


def _parse_document(text: str) -> ValidatorSnapshot:
    try:
        doc = json.loads(text)
    except (ValueError, RecursionError) as exc:
        raise SchemaError("document", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document", "top level must be an object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION or isinstance(version, bool):
        raise SchemaError("schema_version", f"unsupported version {version!r}")
    chain = doc.get("chain")
    if not isinstance(chain, str) or not chain:
        raise SchemaError("chain", "must be a non-empty string")
    captured_at = parse_timestamp(doc.get("captured_at"))
    entries = doc.get("validators")
    if not isinstance(entries, list):
        raise SchemaError("validators", "must be a list")
    rows = []
    for i, e in enumerate(entries):
        if not isinstance(e, dict):
            raise SchemaError(f"validators[{i}]", "must be an object")
        if "stake" not in e:
            raise SchemaError(f"validators[{i}].stake", "missing")
        rows.append((e.get("address"), e["stake"], e.get("moniker")))
    return _build(chain, captured_at, rows)


def _parse_csv(text: str, chain: str, captured_at: datetime) -> ValidatorSnapshot:
    try:
        records = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    except csv.Error as exc:
        raise SchemaError("csv", str(exc)) from None
    if not records:
        raise EmptySetError()
    header = tuple(c.strip().lower() for c in records[0])
    if header[:2] != CSV_HEADER[:2] or header[2:] not in ((), CSV_HEADER[2:]):
        raise SchemaError("csv", f"header must be 'address,stake[,moniker]', got {','.join(header)[:60]!r}")
    rows = []
    for n, rec in enumerate(records[1:], 2):
        if len(rec) != len(header):
            raise SchemaError(f"csv line {n}", f"expected {len(header)} columns, got {len(rec)}")
        moniker = rec[2] if len(rec) == 3 and rec[2] != "" else None
        rows.append((rec[0].strip(), rec[1], moniker))
    return _build(chain, captured_at, rows)


def parse_snapshot(
    data: bytes | str,
    chain: str | None = None,
    captured_at: datetime | None = None,
) -> ValidatorSnapshot:
    """Parse a snapshot document or CSV into a canonical snapshot.

    ``chain`` and ``captured_at`` label CSV input, which carries neither;
    they are ignored for JSON documents.

    Every failure surfaces as a :class:`~stakeweight.errors.StakeweightError`
    subclass, whatever the input bytes.
    """
    if isinstance(data, (bytes, bytearray, memoryview)):
        try:
            text = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError("encoding", f"not UTF-8: {exc.reason}") from None
    elif isinstance(data, str):
        text = data
    else:
        raise SchemaError("input", f"expected bytes or str, got {type(data).__name__}")
    text = text.lstrip("\ufeff")
    if text.lstrip().startswith(("{", "[")):
        return _parse_document(text)
    return _parse_csv(text, chain or "unknown", captured_at or EPOCH)


def load_snapshot(path: str | os.PathLike) -> ValidatorSnapshot:
    """Read a snapshot file; CSV files take their chain label from the file name."""
    p = Path(path)
    data = p.read_bytes()
    when = datetime.fromtimestamp(p.stat().st_mtime, tz=timezone.utc)
    return parse_snapshot(data, chain=p.stem, captured_at=when)


def snapshot_document(snapshot: ValidatorSnapshot) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "chain": snapshot.chain,
        "captured_at": format_timestamp(snapshot.captured_at),
        "validators": [
            {"address": v.address, "stake": str(v.stake), "moniker": v.moniker}
            for v in snapshot.validators
        ],
    }


def dumps_snapshot(snapshot: ValidatorSnapshot, fmt: str = "json") -> str:
    if not snapshot.validators:
        raise EmptySetError()
    snapshot = canonicalize(snapshot)
    if fmt == "json":
        return json.dumps(snapshot_document(snapshot), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for v in snapshot.validators:
            w.writerow([v.address, str(v.stake), v.moniker or ""])
        return buf.getvalue()
    raise ValueError(f"unknown snapshot format {fmt!r}")


def write_snapshot(snapshot: ValidatorSnapshot, path: str | os.PathLike, fmt: str | None = None) -> None:
    """Write ``snapshot`` to ``path``; the format follows the suffix unless given."""
    p = Path(path)
    if fmt is None:
        fmt = "csv" if p.suffix.lower() == ".csv" else "json"
    text = dumps_snapshot(snapshot, fmt)
    p.write_text(text, encoding="utf-8", newline="")


# -- live fetch ---------------------------------------------------------------

COSMOS_VALIDATORS_PATH = "/cosmos/staking/v1beta1/validators"
BONDED = "BOND_STATUS_BONDED"
MAX_PAGES = 10_000


@dataclass(frozen=True)
class ChainAdapter:
    name: str
    endpoint_url: str
    pagination_limit: int = 100
    path: str = COSMOS_VALIDATORS_PATH
    pagination: str = "key"  # or "offset"
    timeout: float = 10.0
    attempts: int = 3
    backoff: float = 0.5

    def __post_init__(self):
        if self.pagination_limit < 1:
            raise ValueError("pagination_limit must be positive")
        if self.pagination not in ("key", "offset"):
            raise ValueError("pagination must be 'key' or 'offset'")

    @property
    def url(self) -> str:
        return self.endpoint_url.rstrip("/") + "/" + self.path.lstrip("/")

    @classmethod
    def from_env(cls, name: str, **kw) -> "ChainAdapter":
        url = os.environ.get(ENDPOINT_ENV)
        if not url:
            raise NetworkError(f"no endpoint given and ${ENDPOINT_ENV} is unset")
        return cls(name, url, **kw)


def _get_json(session: requests.Session, adapter: ChainAdapter, params: dict):
    last = None
    for attempt in range(adapter.attempts):
        if attempt:
            time.sleep(adapter.backoff * 2 ** (attempt - 1))
        try:
            resp = session.get(adapter.url, params=params, timeout=adapter.timeout)
        except requests.RequestException as exc:
            last = f"{type(exc).__name__}: {exc}"
            log.warning("fetch %s attempt %d failed: %s", adapter.url, attempt + 1, last)
            continue
        if resp.status_code == 429 or resp.status_code >= 500:
            last = f"HTTP {resp.status_code}"
            log.warning("fetch %s attempt %d: %s", adapter.url, attempt + 1, last)
            continue
        if resp.status_code != 200:
            raise NetworkError(f"{adapter.url}: HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError:
            raise MalformedResponseError(f"{adapter.url}: response is not JSON") from None
    raise NetworkError(f"{adapter.url}: giving up after {adapter.attempts} attempts ({last})")


def _page_rows(page) -> tuple[list[tuple[str, int, str | None]], dict]:
    if not isinstance(page, dict) or not isinstance(page.get("validators"), list):
        raise MalformedResponseError("response lacks a 'validators' list")
    rows = []
    for i, v in enumerate(page["validators"]):
        if not isinstance(v, dict):
            raise MalformedResponseError(f"validators[{i}] is not an object")
        addr = v.get("operator_address")
        if not isinstance(addr, str) or not addr:
            raise MalformedResponseError(f"validators[{i}] has no operator_address")
        if v.get("status", BONDED) != BONDED or v.get("jailed") is True:
            continue
        tokens = v.get("tokens")
        if not isinstance(tokens, str) or not tokens.isascii() or not tokens.isdigit():
            raise MalformedResponseError(f"validator {addr!r} has malformed tokens {str(tokens)[:40]!r}")
        stake = int(tokens)
        if stake == 0:
            log.debug("skipping zero-token validator %s", addr)
            continue
        desc = v.get("description")
        moniker = desc.get("moniker") if isinstance(desc, dict) else None
        rows.append((addr, stake, moniker if isinstance(moniker, str) and moniker else None))
    pagination = page.get("pagination") or {}
    if not isinstance(pagination, dict):
        raise MalformedResponseError("'pagination' is not an object")
    return rows, pagination


def fetch_validators(
    adapter: ChainAdapter,
    session: requests.Session | None = None,
    now: datetime | None = None,
) -> ValidatorSnapshot:
    """Collect every bonded, unjailed validator from a Cosmos-SDK staking endpoint."""
    own = session is None
    session = session or requests.Session()
    rows: list = []
    try:
        key = None
        seen_keys = set()
        offset = 0
        for _ in range(MAX_PAGES):
            params = {"status": BONDED, "pagination.limit": str(adapter.pagination_limit)}
            if adapter.pagination == "key":
                if key:
                    params["pagination.key"] = key
            else:
                params["pagination.offset"] = str(offset)
            page = _get_json(session, adapter, params)
            got, pagination = _page_rows(page)
            rows.extend(got)
            n_raw = len(page["validators"])
            if adapter.pagination == "key":
                key = pagination.get("next_key")
                if not key:
                    break
                if not isinstance(key, str):
                    raise MalformedResponseError("pagination.next_key is not a string")
                if key in seen_keys:
                    raise PaginationError(f"next_key {key!r} repeated; endpoint is looping")
                seen_keys.add(key)
            else:
                offset += n_raw
                if n_raw < adapter.pagination_limit:
                    break
        else:
            raise PaginationError(f"more than {MAX_PAGES} pages")
    finally:
        if own:
            session.close()
    if not rows:
        raise EmptySetError("bonded validator set")
    validators = []
    seen = set()
    for addr, stake, moniker in rows:
        if addr in seen:
            raise PaginationError(f"validator {addr!r} returned on more than one page")
        seen.add(addr)
        validators.append(Validator(addr, stake, moniker))
    when = now or datetime.now(timezone.utc)
    return canonicalize(ValidatorSnapshot(adapter.name, when, tuple(validators)))
