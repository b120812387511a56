"""
File formats

- sequences: text, header line "k N" then one sample per line as k
  space-separated decimals, optionally followed by the integer latent state
- process specs and hypotheses: JSON documents
- tables: RFC-4180 CSV with a header row, '%.17g' floats
"""

import contextlib
import csv
import json
import logging
import sys
from typing import IO, Any, Dict, Iterable, Iterator, Optional, Sequence

import numpy as np

from ..modules.estimator import Hypothesis, SampleSequence
from ..modules.processes import HiddenMarkovSpec
from .base import ArgumentError, ConfigError
from .utils import format_float, to_jsonable

logger = logging.getLogger(__name__)

STDIO = (None, "", "-")


@contextlib.contextmanager
def open_output(path: Optional[str]) -> Iterator[IO[str]]:
    """Yield a text stream on path, or stdout for None / '-'."""
    if path in STDIO:
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as stream:
        yield stream
    logger.info(f"Wrote {path}")


def read_json(path: str) -> Dict[str, Any]:
    """
    Load a JSON document.

    Raises:
        ConfigError: missing file or invalid JSON
    """
    try:
        with open(path, encoding="utf-8") as stream:
            return json.load(stream)
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}")


def write_json(path: Optional[str], data: Any) -> None:
    with open_output(path) as stream:
        json.dump(to_jsonable(data), stream, indent=2, sort_keys=True)
        stream.write("\n")


def write_sequence(path: Optional[str], seq: SampleSequence) -> None:
    """Write a sequence in the columnar text format."""
    with open_output(path) as stream:
        stream.write(f"{seq.k} {seq.N}\n")
        for t, row in enumerate(seq.points):
            line = " ".join(format_float(float(v)) for v in row)
            if seq.latent_states is not None:
                line += f" {int(seq.latent_states[t])}"
            stream.write(line + "\n")


def parse_sequence(text: str, source: str = "<string>") -> SampleSequence:
    """
    Parse the columnar text format.

    Raises:
        ConfigError: malformed header or rows
    """
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or len(lines[0]) != 2:
        raise ConfigError(f"{source}: expected a 'k N' header line")
    try:
        k, n = int(lines[0][0]), int(lines[0][1])
    except ValueError:
        raise ConfigError(f"{source}: header must hold two integers, got {lines[0]}")
    rows = lines[1:]
    if len(rows) != n:
        raise ConfigError(f"{source}: header announces {n} samples, found {len(rows)}")
    widths = {len(row) for row in rows}
    if not widths <= {k, k + 1} or len(widths) > 1:
        raise ConfigError(f"{source}: every row needs {k} values, optionally one latent state")
    try:
        points = np.array([[float(v) for v in row[:k]] for row in rows], dtype=float)
        states = None
        if widths == {k + 1}:
            states = np.array([int(row[k]) for row in rows], dtype=int)
    except ValueError as e:
        raise ConfigError(f"{source}: {e}")
    try:
        return SampleSequence(points.reshape(n, k), states)
    except ArgumentError as e:
        raise ConfigError(f"{source}: {e.message}")


def read_sequence(path: str) -> SampleSequence:
    try:
        with open(path, encoding="utf-8") as stream:
            text = stream.read()
    except FileNotFoundError:
        raise ConfigError(f"File not found: {path}")
    return parse_sequence(text, source=path)


def read_spec(path: str) -> HiddenMarkovSpec:
    """Load a HiddenMarkovSpec JSON document."""
    data = read_json(path)
    try:
        return HiddenMarkovSpec.from_dict(data)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"{path}: incomplete process spec ({e})")
    except ArgumentError as e:
        raise ConfigError(f"{path}: {e.message}")


def read_hypothesis(path: str) -> Hypothesis:
    """Load a {weights, bias, loss_kind} JSON document."""
    data = read_json(path)
    try:
        return Hypothesis.from_dict(data)
    except KeyError as e:
        raise ConfigError(f"{path}: missing hypothesis field {e}")
    except ArgumentError as e:
        raise ConfigError(f"{path}: {e.message}")


def write_csv(
    path: Optional[str], header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> int:
    """
    Write a CSV table, returning the number of data rows.

    Floats are written with '%.17g', None as an empty field.
    """
    count = 0
    with open_output(path) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(value) for value in row])
            count += 1
    return count
