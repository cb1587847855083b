"""Reading scored-defendant CSV files into an immutable, columnar dataset.

The default column mapping matches the public Broward County two-year file
(``compas-scores-two-years.csv``). Any compatible file can be audited by
supplying a different :class:`Schema`.
"""

import csv
import io
import json
import logging
import os
import warnings
from dataclasses import asdict, dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .exceptions import (
    ConfigError,
    DomainError,
    EmptyCohortWarning,
    EmptyFileError,
    ParseError,
    SchemaError,
)
from .validation import MAX_SCORE, MIN_SCORE

logger = logging.getLogger(__name__)

FELONY = "felony"
MISDEMEANOR = "misdemeanor"
CHARGE_DEGREES = (FELONY, MISDEMEANOR)

BLACK = "African-American"
WHITE = "Caucasian"
DEFAULT_GROUPS = (BLACK, WHITE)


@dataclass(frozen=True)
class Record:
    """One scored defendant."""

    id: str
    group: str
    score: int
    outcome: int
    charge_degree: str
    priors: int
    extra: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not MIN_SCORE <= self.score <= MAX_SCORE:
            raise DomainError(f"score {self.score} outside {MIN_SCORE}..{MAX_SCORE}")
        if self.outcome not in (0, 1):
            raise DomainError(f"outcome must be 0 or 1, got {self.outcome}")
        if self.priors < 0:
            raise DomainError(f"priors must be non-negative, got {self.priors}")
        if self.charge_degree not in CHARGE_DEGREES:
            raise DomainError(f"unknown charge degree {self.charge_degree!r}")


@dataclass(frozen=True)
class Schema:
    """Mapping from record fields to CSV column names.

    ``id`` may be ``None``, in which case the 1-based data row number is used.
    """

    id: Optional[str] = "id"
    group: str = "race"
    score: str = "decile_score"
    outcome: str = "two_year_recid"
    charge_degree: str = "c_charge_degree"
    priors: str = "priors_count"
    felony_codes: tuple = ("F",)
    misdemeanor_codes: tuple = ("M",)

    def __post_init__(self):
        object.__setattr__(self, "felony_codes", tuple(self.felony_codes))
        object.__setattr__(self, "misdemeanor_codes", tuple(self.misdemeanor_codes))
        if not self.felony_codes or not self.misdemeanor_codes:
            raise ConfigError("schema needs at least one felony and one misdemeanor code")
        if set(self.felony_codes) & set(self.misdemeanor_codes):
            raise ConfigError("felony and misdemeanor codes overlap")

    @classmethod
    def from_mapping(cls, mapping):
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise ConfigError(f"unknown schema keys: {sorted(unknown)}")
        return cls(**mapping)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                mapping = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read schema file {path}: {exc}") from exc
        if not isinstance(mapping, dict):
            raise ConfigError("schema file must hold a JSON object")
        return cls.from_mapping(mapping)

    def to_dict(self):
        d = asdict(self)
        d["felony_codes"] = list(self.felony_codes)
        d["misdemeanor_codes"] = list(self.misdemeanor_codes)
        return d

    def mapped_columns(self):
        cols = {
            "group": self.group,
            "score": self.score,
            "outcome": self.outcome,
            "charge_degree": self.charge_degree,
            "priors": self.priors,
        }
        if self.id is not None:
            cols = {"id": self.id, **cols}
        return cols

    def degree_code(self, degree):
        return self.felony_codes[0] if degree == FELONY else self.misdemeanor_codes[0]


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


class Dataset:
    """Immutable, columnar collection of records in source order.

    Column arrays (``ids``, ``groups``, ``scores``, ``outcomes``,
    ``charge_degrees``, ``priors``) are read-only numpy arrays. ``records``
    materializes :class:`Record` objects on demand.
    """

    def __init__(
        self,
        ids,
        groups,
        scores,
        outcomes,
        charge_degrees,
        priors,
        extra=None,
        schema=None,
        n_rejected=0,
        diagnostics=(),
    ):
        self.ids = _readonly(np.asarray(ids, dtype=object))
        self.groups = _readonly(np.asarray(groups, dtype=object))
        self.scores = _readonly(np.asarray(scores, dtype=np.int64))
        self.outcomes = _readonly(np.asarray(outcomes, dtype=np.int8))
        self.charge_degrees = _readonly(np.asarray(charge_degrees, dtype=object))
        self.priors = _readonly(np.asarray(priors, dtype=np.int64))
        n = len(self.ids)
        for name in ("groups", "scores", "outcomes", "charge_degrees", "priors"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has length {len(getattr(self, name))}, expected {n}")
        if extra is not None and len(extra) != n:
            raise ValueError("extra must have one mapping per record")
        self.extra = None if extra is None else tuple(MappingProxyType(dict(e)) for e in extra)
        self.schema = schema if schema is not None else Schema()
        self.n_rejected = int(n_rejected)
        self.diagnostics = tuple(diagnostics)
        self._records = None
        if n:
            if self.scores.min() < MIN_SCORE or self.scores.max() > MAX_SCORE:
                raise DomainError("scores must lie in 1..10")
            if not np.all((self.outcomes == 0) | (self.outcomes == 1)):
                raise DomainError("outcomes must be 0 or 1")
            if self.priors.min() < 0:
                raise DomainError("priors must be non-negative")

    @classmethod
    def from_records(cls, records, schema=None):
        records = list(records)
        return cls(
            ids=[r.id for r in records],
            groups=[r.group for r in records],
            scores=[r.score for r in records],
            outcomes=[r.outcome for r in records],
            charge_degrees=[r.charge_degree for r in records],
            priors=[r.priors for r in records],
            extra=[dict(r.extra) for r in records],
            schema=schema,
        )

    def __len__(self):
        return len(self.ids)

    def __repr__(self):
        return f"Dataset(n={len(self)}, groups={list(self.group_labels())})"

    @property
    def n_accepted(self):
        return len(self)

    @property
    def records(self):
        if self._records is None:
            extra = self.extra or ({},) * len(self)
            self._records = tuple(
                Record(
                    id=str(i),
                    group=str(g),
                    score=int(s),
                    outcome=int(y),
                    charge_degree=str(c),
                    priors=int(p),
                    extra=e,
                )
                for i, g, s, y, c, p, e in zip(
                    self.ids,
                    self.groups,
                    self.scores,
                    self.outcomes,
                    self.charge_degrees,
                    self.priors,
                    extra,
                )
            )
        return self._records

    def group_labels(self):
        """Distinct group labels in order of first appearance."""
        return tuple(dict.fromkeys(self.groups.tolist()))

    def take(self, mask):
        """Return the sub-dataset selected by a boolean mask, preserving order."""
        mask = np.asarray(mask, dtype=bool)
        idx = np.flatnonzero(mask)
        return Dataset(
            ids=self.ids[idx],
            groups=self.groups[idx],
            scores=self.scores[idx],
            outcomes=self.outcomes[idx],
            charge_degrees=self.charge_degrees[idx],
            priors=self.priors[idx],
            extra=None if self.extra is None else [self.extra[i] for i in idx],
            schema=self.schema,
        )

    def group_mask(self, group):
        return self.groups == group


def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    if isinstance(raw, str):
        return raw
    return raw.decode("utf-8-sig")


def _dedupe_header(header):
    seen = {}
    out = []
    for name in header:
        if name in seen:
            seen[name] += 1
            out.append(f"{name}.{seen[name]}")
        else:
            seen[name] = 0
            out.append(name)
    return out


def _parse_int(text, what):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"{what} {text!r} is not an integer") from None


def parse_dataset(source, schema=None, *, skip_invalid=False):
    """Parse a scored-defendant CSV into a :class:`Dataset`.

    Parameters
    ----------
    source : path, bytes, or file-like
        UTF-8 CSV with a header row containing every column named by
        ``schema``. When a header name is repeated, the first occurrence is
        the one mapped; later copies are kept in ``extra`` with a ``.N``
        suffix.
    schema : Schema, optional
        Column mapping. Defaults to the public two-year file layout.
    skip_invalid : bool, default False
        In the default strict mode the first invalid row raises
        :class:`ParseError`. With ``skip_invalid`` such rows are counted in
        ``Dataset.n_rejected`` and described in ``Dataset.diagnostics``.

    Raises
    ------
    EmptyFileError
        The source holds no header row.
    SchemaError
        A mapped column is absent from the header.
    ParseError
        A row is malformed and ``skip_invalid`` is false.
    """
    schema = schema if schema is not None else Schema()
    text = _open_text(source)
    if not text.strip():
        raise EmptyFileError("input is empty: no header row")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyFileError("input is empty: no header row") from None
    header = [h.strip() for h in header]
    names = _dedupe_header(header)
    index = {}
    for i, name in enumerate(names):
        index.setdefault(name, i)
    cols = schema.mapped_columns()
    for fld, col in cols.items():
        if col not in index:
            raise SchemaError(f"missing mapped column {col!r} (field {fld})", column=col)
    mapped_idx = {fld: index[col] for fld, col in cols.items()}
    extra_idx = [i for i in range(len(names)) if i not in set(mapped_idx.values())]
    degree_of = {code: FELONY for code in schema.felony_codes}
    degree_of.update({code: MISDEMEANOR for code in schema.misdemeanor_codes})

    ids, groups, scores, outcomes, degrees, priors, extra = [], [], [], [], [], [], []
    diagnostics = []
    n_rows = 0
    for rownum, row in enumerate(reader, start=2):
        if not row:
            continue
        n_rows += 1
        try:
            if len(row) != len(names):
                raise ValueError(f"expected {len(names)} fields, found {len(row)}")
            group = row[mapped_idx["group"]].strip()
            if not group:
                raise ValueError("group is empty")
            score = _parse_int(row[mapped_idx["score"]], "score")
            if not MIN_SCORE <= score <= MAX_SCORE:
                raise ValueError(f"score {score} outside {MIN_SCORE}..{MAX_SCORE}")
            outcome = _parse_int(row[mapped_idx["outcome"]], "outcome")
            if outcome not in (0, 1):
                raise ValueError(f"outcome {outcome} not in {{0, 1}}")
            code = row[mapped_idx["charge_degree"]].strip()
            if code not in degree_of:
                raise ValueError(f"charge degree {code!r} not in {sorted(degree_of)}")
            prior = _parse_int(row[mapped_idx["priors"]], "priors")
            if prior < 0:
                raise ValueError(f"priors {prior} is negative")
        except ValueError as exc:
            msg = f"row {rownum}: {exc}"
            if not skip_invalid:
                raise ParseError(msg, row=rownum) from None
            logger.warning("skipping %s", msg)
            diagnostics.append((rownum, str(exc)))
            continue
        ids.append(row[mapped_idx["id"]].strip() if "id" in mapped_idx else str(rownum - 1))
        groups.append(group)
        scores.append(score)
        outcomes.append(outcome)
        degrees.append(degree_of[code])
        priors.append(prior)
        extra.append({names[i]: row[i] for i in extra_idx})

    logger.info("parsed %d rows: %d accepted, %d rejected", n_rows, len(ids), len(diagnostics))
    return Dataset(
        ids, groups, scores, outcomes, degrees, priors,
        extra=extra, schema=schema, n_rejected=len(diagnostics), diagnostics=diagnostics,
    )


def serialize_dataset(d, schema=None, *, include_extra=True):
    """Write ``d`` back to CSV text in the layout described by ``schema``."""
    schema = schema if schema is not None else d.schema
    cols = schema.mapped_columns()
    extra_names = []
    if include_extra and d.extra is not None:
        extra_names = list(dict.fromkeys(k for e in d.extra for k in e))
        extra_names = [n for n in extra_names if n not in cols.values()]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(cols.values()) + extra_names)
    extras = d.extra if d.extra is not None else ({},) * len(d)
    for i in range(len(d)):
        row = {
            "id": d.ids[i],
            "group": d.groups[i],
            "score": int(d.scores[i]),
            "outcome": int(d.outcomes[i]),
            "charge_degree": schema.degree_code(d.charge_degrees[i]),
            "priors": int(d.priors[i]),
        }
        writer.writerow([row[f] for f in cols] + [extras[i].get(n, "") for n in extra_names])
    return buf.getvalue()


def filter_cohort(d, groups):
    """Keep only records whose group is in ``groups``. Order is preserved."""
    groups = set(groups)
    if not groups:
        raise ConfigError("cohort filter needs at least one group")
    out = d.take(np.isin(d.groups, list(groups)))
    if len(out) == 0:
        warnings.warn(f"cohort filter {sorted(groups)} left no records", EmptyCohortWarning, stacklevel=2)
    return out


def filter_records(d, predicate: Callable[[Record], bool]):
    """Keep records for which ``predicate(record)`` is true."""
    out = d.take([bool(predicate(r)) for r in d.records])
    if len(out) == 0:
        warnings.warn("record filter left no records", EmptyCohortWarning, stacklevel=2)
    return out


def _as_int(text):
    try:
        return int(str(text).strip())
    except ValueError:
        return None


def propublica_screening_filter(record):
    """Row filter used by the original ProPublica analysis notebook.

    Keeps rows screened within 30 days of arrest, with a known recidivism
    flag and a non-missing score text. Requires those columns to be present
    in ``record.extra``; off by default everywhere in this package.
    """
    days = _as_int(record.extra.get("days_b_screening_arrest", ""))
    is_recid = _as_int(record.extra.get("is_recid", ""))
    return (
        days is not None
        and -30 <= days <= 30
        and is_recid is not None
        and is_recid != -1
        and record.extra.get("score_text", "N/A") != "N/A"
    )


ROW_FILTERS = {"propublica": propublica_screening_filter}


def load_dataset(path, schema=None, *, skip_invalid=False, groups: Optional[Iterable[str]] = DEFAULT_GROUPS,
                 row_filters: Sequence[str] = ()):
    """Parse ``path``, apply named row filters, then the cohort filter."""
    d = parse_dataset(path, schema, skip_invalid=skip_invalid)
    for name in row_filters:
        if name not in ROW_FILTERS:
            raise ConfigError(f"unknown row filter {name!r}; choose from {sorted(ROW_FILTERS)}")
        d = filter_records(d, ROW_FILTERS[name])
    if groups is not None:
        d = filter_cohort(d, groups)
    return d
