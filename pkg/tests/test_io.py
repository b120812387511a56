"""
Tests for the file formats.
"""

import csv
import json
import os
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_allclose

from crm.core.base import ConfigError
from crm.core.io import (
    parse_sequence,
    read_hypothesis,
    read_json,
    read_sequence,
    read_spec,
    write_csv,
    write_json,
    write_sequence,
)
from crm.modules.estimator import CLIPPED_SQUARED, Hypothesis, SampleSequence
from crm.modules.processes import random_chain, simulate


class TestFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_sequence_round_trip(self):
        seq = simulate(random_chain(3), 250, seed=3)
        write_sequence(self.path("seq.txt"), seq)
        again = read_sequence(self.path("seq.txt"))
        assert_allclose(again.points, seq.points, atol=1e-12)
        self.assertEqual(again.latent_states.tolist(), seq.latent_states.tolist())

    def test_sequence_without_states(self):
        seq = SampleSequence(np.array([[0.25, 1.0], [0.5, 0.0], [0.125, 1.0]]))
        write_sequence(self.path("seq.txt"), seq)
        again = read_sequence(self.path("seq.txt"))
        self.assertIsNone(again.latent_states)
        self.assertEqual(again.labels.tolist(), [1, -1, 1])

    def test_malformed_sequences(self):
        for text in ("", "3\n0.1 0.2 1\n", "2 3\n0.1 1\n0.2 0\n", "2 1\n0.1\n", "2 1\n0.1 x\n", "2 1\n1.5 0\n"):
            with self.subTest(text=text), self.assertRaises(ConfigError):
                parse_sequence(text)

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            read_sequence(self.path("absent.txt"))
        with self.assertRaises(ConfigError):
            read_json(self.path("absent.json"))

    def test_invalid_json(self):
        with open(self.path("bad.json"), "w") as stream:
            stream.write("{not json")
        with self.assertRaises(ConfigError):
            read_json(self.path("bad.json"))

    def test_spec_document(self):
        spec = random_chain(11)
        write_json(self.path("spec.json"), spec.to_dict())
        again = read_spec(self.path("spec.json"))
        assert_allclose(again.transition, spec.transition)
        assert_allclose(again.label_offsets, spec.label_offsets)

    def test_incomplete_spec(self):
        write_json(self.path("spec.json"), {"transition": [[1.0]]})
        with self.assertRaises(ConfigError):
            read_spec(self.path("spec.json"))

    def test_hypothesis_document(self):
        h = Hypothesis(weights=[0.5, -1.25], bias=0.125, loss_kind=CLIPPED_SQUARED)
        write_json(self.path("h.json"), h.to_dict())
        with open(self.path("h.json")) as stream:
            self.assertEqual(json.load(stream)["loss_kind"], CLIPPED_SQUARED)
        again = read_hypothesis(self.path("h.json"))
        self.assertEqual(again.weights.tolist(), [0.5, -1.25])
        self.assertEqual(again.bias, 0.125)

    def test_hypothesis_needs_weights(self):
        write_json(self.path("h.json"), {"bias": 1.0})
        with self.assertRaises(ConfigError):
            read_hypothesis(self.path("h.json"))

    def test_csv(self):
        count = write_csv(self.path("t.csv"), ["a", "b"], [[1, 0.1], [2, None]])
        self.assertEqual(count, 2)
        with open(self.path("t.csv"), newline="") as stream:
            rows = list(csv.reader(stream))
        self.assertEqual(rows[0], ["a", "b"])
        self.assertEqual(float(rows[1][1]), 0.1)
        self.assertEqual(rows[2][1], "")


if __name__ == "__main__":
    unittest.main()
