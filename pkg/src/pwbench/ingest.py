"""Password-dump ingestion: raw dumps in, canonical frequency tables out.

Supported dump layouts:

  raw_lines             one password per line; blank lines are skipped
  user_colon_password   "user:password" lines; the password is everything
                        after the first colon
  csv_password_count    "password,count" rows, with an optional
                        "password,count" header

Tables are canonical: entries sorted by descending count, ties broken by
ascending UTF-8 byte order of the password. That makes ranks (the 1-based
index into the table) deterministic, which every downstream fit depends on.

Input bytes are decoded as UTF-8 with invalid sequences replaced by U+FFFD.
Real dumps are dirty; silently repairing beats refusing the file. The whole
dump is held in memory: expect roughly 8 GB of RAM per 50 million lines,
larger-than-memory streaming is out of scope.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import WorkbenchError

_CSV_HEADER = ("password", "count")


class DumpFormat(Enum):
    """How a raw dump file is laid out."""

    RAW_LINES = "raw"
    USER_COLON_PASSWORD = "colon"
    CSV_PASSWORD_COUNT = "csv"


class IngestError(WorkbenchError):
    """Base class for dump-parsing failures."""


class EmptyInput(IngestError):
    """The dump contained no usable lines."""


class MalformedCsvRow(IngestError):
    """A CSV row did not have exactly two fields, or the count field was not an integer."""

    def __init__(self, line_no: int, detail: str):
        super().__init__(f"line {line_no}: {detail}")
        self.line_no = line_no


class NonPositiveCount(IngestError):
    """A CSV row carried a count below 1."""

    def __init__(self, line_no: int, count: int):
        super().__init__(f"line {line_no}: count must be >= 1, got {count}")
        self.line_no = line_no
        self.count = count


def _rank_key(password: str, count: int) -> tuple[int, bytes]:
    # Descending count, then ascending byte order of the password.
    return (-count, password.encode("utf-8"))


@dataclass(frozen=True)
class FrequencyTable:
    """Ranked password/count pairs from a dump.

    ``entries`` is ordered by descending count with ties broken by ascending
    UTF-8 byte order, passwords are unique, every count is >= 1 and
    ``total`` is their sum. Rank r is the 1-based index into ``entries``.
    """

    entries: tuple[tuple[str, int], ...]
    total: int
    source_label: str = ""

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("a frequency table must have at least one entry")
        seen: set[str] = set()
        running = 0
        prev_key: tuple[int, bytes] | None = None
        for password, count in self.entries:
            if count < 1:
                raise ValueError(f"count for {password!r} must be >= 1, got {count}")
            if password in seen:
                raise ValueError(f"duplicate password {password!r}")
            seen.add(password)
            key = _rank_key(password, count)
            if prev_key is not None and key < prev_key:
                raise ValueError("entries are not in canonical rank order")
            prev_key = key
            running += count
        if running != self.total:
            raise ValueError(f"total is {self.total} but counts sum to {running}")

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], source_label: str = "") -> "FrequencyTable":
        """Build a canonical table from a password -> count mapping."""
        if not counts:
            raise EmptyInput("no passwords to tabulate")
        entries = tuple(sorted(counts.items(), key=lambda kv: _rank_key(kv[0], kv[1])))
        return cls(entries=entries, total=sum(counts.values()), source_label=source_label)

    def rank_of(self, password: str) -> int | None:
        """1-based rank of a password, or None if absent."""
        for i, (pw, _) in enumerate(self.entries, start=1):
            if pw == password:
                return i
        return None


@dataclass(frozen=True)
class Distribution:
    """Probabilities over passwords, in the same canonical order as the table.

    ``counts`` carries the source counts when the distribution was derived
    from a FrequencyTable; filters preserve them so that cumulative sums can
    be computed exactly from integers. Distributions built directly from
    probabilities have ``counts=None``.
    """

    entries: tuple[tuple[str, float], ...]
    counts: tuple[int, ...] | None = None
    source_label: str = ""

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("a distribution must have at least one entry")
        if self.counts is not None and len(self.counts) != len(self.entries):
            raise ValueError("counts must parallel entries")
        total = 0.0
        for i, (password, p) in enumerate(self.entries):
            if not 0.0 < p <= 1.0:
                raise ValueError(f"probability for {password!r} out of (0, 1]: {p}")
            total += p
            if i == 0:
                continue
            prev_pw, prev_p = self.entries[i - 1]
            if p > prev_p:
                raise ValueError("probabilities are not non-increasing")
            tied = (
                self.counts[i] == self.counts[i - 1]
                if self.counts is not None
                else p == prev_p
            )
            if tied and password.encode("utf-8") <= prev_pw.encode("utf-8"):
                raise ValueError("tie-break order violated")
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1.0")

    @property
    def n_ranks(self) -> int:
        return len(self.entries)

    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.entries)


def parse_dump(data: bytes, fmt: DumpFormat, source_label: str = "") -> FrequencyTable:
    """Parse a raw dump into a canonical FrequencyTable.

    Determinism contract: identical bytes and format always produce an
    identical table.

    Raises EmptyInput when no usable lines remain, MalformedCsvRow /
    NonPositiveCount for broken CSV rows.
    """
    text = data.decode("utf-8", errors="replace")
    counts: Counter[str] = Counter()

    if fmt is DumpFormat.RAW_LINES:
        for line in text.splitlines():
            if line:
                counts[line] += 1
    elif fmt is DumpFormat.USER_COLON_PASSWORD:
        for line in text.splitlines():
            sep = line.find(":")
            if sep < 0:
                continue  # no password field on this line
            password = line[sep + 1 :]
            if password:
                # Empty passwords are representable only via the CSV format.
                counts[password] += 1
    elif fmt is DumpFormat.CSV_PASSWORD_COUNT:
        _parse_csv_rows(text, counts)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown dump format: {fmt}")

    if not counts:
        raise EmptyInput("dump contains no usable lines")
    return FrequencyTable.from_counts(counts, source_label=source_label)


def _iter_csv_records(text: str):
    """Yield (starting line number, fields) per CSV record.

    Hand-rolled instead of the csv module: stdlib csv refuses NUL characters
    (which occur in real dumps) on this Python version, and the dialect here
    is fixed anyway. Quoting matches export_csv: fields may be wrapped in
    double quotes with internal quotes doubled; quoted fields may contain
    commas and line breaks. CR, LF and CRLF all separate records.
    """
    fields: list[str] = []
    buf: list[str] = []
    line = 1
    record_line = 1
    in_quotes = False
    field_started = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if in_quotes:
            if ch == '"':
                if i + 1 < n and text[i + 1] == '"':
                    buf.append('"')
                    i += 2
                    continue
                in_quotes = False
            else:
                if ch == "\n":
                    line += 1
                elif ch == "\r":
                    line += 1
                    if i + 1 < n and text[i + 1] == "\n":
                        buf.append("\r\n")
                        i += 2
                        continue
                buf.append(ch)
            i += 1
            continue
        if ch == '"' and not buf:
            in_quotes = True
            field_started = True
        elif ch == ",":
            fields.append("".join(buf))
            buf.clear()
            field_started = True
        elif ch in "\r\n":
            if buf or fields or field_started:
                fields.append("".join(buf))
                yield record_line, fields
                fields = []
                buf.clear()
                field_started = False
            line += 1
            if ch == "\r" and i + 1 < n and text[i + 1] == "\n":
                i += 1
            record_line = line
        else:
            buf.append(ch)
        i += 1
    if buf or fields or field_started or in_quotes:
        fields.append("".join(buf))
        yield record_line, fields


def _parse_csv_rows(text: str, counts: Counter[str]) -> None:
    first_row = True
    for line_no, row in _iter_csv_records(text):
        if first_row and tuple(row) == _CSV_HEADER:
            first_row = False
            continue
        first_row = False
        if len(row) != 2:
            raise MalformedCsvRow(line_no, f"expected 2 fields, got {len(row)}")
        password, count_field = row
        try:
            count = int(count_field)
        except ValueError:
            raise MalformedCsvRow(line_no, f"count {count_field!r} is not an integer") from None
        if count < 1:
            raise NonPositiveCount(line_no, count)
        counts[password] += count


def to_distribution(table: FrequencyTable) -> Distribution:
    """Empirical probabilities: probability(w) = count(w) / total."""
    entries = tuple((pw, count / table.total) for pw, count in table.entries)
    return Distribution(
        entries=entries,
        counts=tuple(count for _, count in table.entries),
        source_label=table.source_label,
    )


def export_csv(table: FrequencyTable) -> bytes:
    """Serialize a table as CSV: "password,count" header then rank-ordered rows.

    Passwords containing a comma, double quote, CR or LF are double-quoted
    with internal quotes doubled. LF line endings, no BOM, byte-deterministic.
    Round-trips exactly through parse_dump(..., CSV_PASSWORD_COUNT).
    """
    lines = ["password,count"]
    for password, count in table.entries:
        lines.append(f"{_csv_field(password)},{count}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _csv_field(value: str) -> str:
    if any(ch in value for ch in ',"\r\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def count_nonempty_lines(data: bytes) -> int:
    """Number of non-empty lines; the raw_lines total equals this by contract."""
    text = data.decode("utf-8", errors="replace")
    return sum(1 for line in text.splitlines() if line)


def merge_counts(tables: Iterable[FrequencyTable], source_label: str = "") -> FrequencyTable:
    """Sum several tables into one (used when combining dump shards)."""
    counts: Counter[str] = Counter()
    for table in tables:
        for password, count in table.entries:
            counts[password] += count
    return FrequencyTable.from_counts(counts, source_label=source_label)
