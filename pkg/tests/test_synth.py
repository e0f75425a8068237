#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Tests for synthetic populations."""
import os
import tempfile
import unittest

import numpy as np

from pymaui.embeddingstore import (
    ALL,
    FORMAT_JSONL,
    build_haystack,
    sample_queries,
    write_store,
)
from pymaui.exceptions import ConfigError
from pymaui.fairness import maui, tally_topk
from pymaui.geometry import (
    centroid,
    centroid_distances,
    distance_histogram,
    geometry_report,
)
from pymaui.ranking import MODE_FULL, MODE_TOP_K, rank_batch
from pymaui.synth import (
    Band,
    IsotropicGaussian,
    PlantedHubs,
    PopulationSpec,
    RadiusBands,
    author_id,
    generate,
    planted_unfairness,
    population_spec_from_dict,
    population_spec_to_dict,
)
from tests.store_factory import isotropic_spec, isotropic_spec_dict


def evaluate(store, k=10):
    """Full ranks and top-k slices of one query per author."""
    haystack = build_haystack(store)
    queries = sample_queries(store, store.query_author_ids, 1, ALL, seed=0)
    table = rank_batch(queries, haystack, MODE_FULL)
    slices = rank_batch(queries, haystack, MODE_TOP_K, k=k)
    return table, slices, haystack


class TestGenerate(unittest.TestCase):
    def test_shape_and_split(self):
        store = generate(isotropic_spec(n_authors=12, docs_per_author=3))

        self.assertEqual(len(store), 12)
        self.assertEqual(store.dimension, 16)
        self.assertEqual(store.author_ids[0], "a0000")
        self.assertEqual(store.n_documents, 12 * 4)
        self.assertEqual(store.split("a0003").haystack, ("d0", "d1", "d2"))
        self.assertEqual(store.split("a0003").query, ("d3",))

    def test_unsplit(self):
        spec = PopulationSpec(
            n_authors=4, docs_per_author=2, dimension=8,
            generator=IsotropicGaussian(), query_docs_per_author=0,
        )
        store = generate(spec)

        self.assertFalse(store.is_split)
        self.assertEqual(store.n_documents, 8)

    def test_zero_noise_gives_identical_documents(self):
        store = generate(isotropic_spec(doc_noise_sigma=0.0))

        for a in store.author_ids:
            vectors = [d.vector for d in store.documents(a)]
            for v in vectors[1:]:
                np.testing.assert_allclose(v, vectors[0])

    def test_same_seed_same_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = [os.path.join(tmp, "%d.jsonl" % i) for i in range(3)]
            write_store(generate(isotropic_spec(seed=9)), paths[0],
                        FORMAT_JSONL)
            write_store(generate(isotropic_spec(seed=9)), paths[1],
                        FORMAT_JSONL)
            write_store(generate(isotropic_spec(seed=10)), paths[2],
                        FORMAT_JSONL)

            contents = []
            for path in paths:
                with open(path, "rb") as handle:
                    contents.append(handle.read())

        self.assertEqual(contents[0], contents[1])
        self.assertNotEqual(contents[0], contents[2])

    def test_author_ids_are_padded(self):
        self.assertEqual(author_id(7, 100), "a0007")
        self.assertEqual(author_id(12345, 20000), "a12345")

    def test_given_mean_direction(self):
        spec = PopulationSpec(
            n_authors=50, docs_per_author=2, dimension=4,
            generator=IsotropicGaussian(
                mean_norm=1.0, sigma=0.01, mean_direction=(0, 0, 3, 0)
            ),
            doc_noise_sigma=0.0,
        )
        c = centroid(build_haystack(generate(spec)))
        np.testing.assert_allclose(c / np.linalg.norm(c), [0, 0, 1, 0],
                                   atol=0.01)

    def test_invalid_specs(self):
        bad = [
            isotropic_spec(n_authors=1),
            isotropic_spec(docs_per_author=0),
            isotropic_spec(sigma=0.0),
            isotropic_spec(doc_noise_sigma=-1.0),
            PopulationSpec(3, 2, 4, RadiusBands((Band(0.5, 0.0, 0.1),))),
            PopulationSpec(3, 2, 4, RadiusBands(())),
            PopulationSpec(3, 2, 4, PlantedHubs(n_hubs=3, hub_pull=0.5)),
            PopulationSpec(3, 2, 4, PlantedHubs(n_hubs=1, hub_pull=0.0)),
        ]
        for spec in bad:
            with self.assertRaises(ConfigError, msg=repr(spec)):
                generate(spec)


class TestRadiusBands(unittest.TestCase):
    def test_distances_are_bimodal(self):
        spec = PopulationSpec(
            n_authors=200,
            docs_per_author=3,
            dimension=32,
            generator=RadiusBands((
                Band(fraction=0.5, radial_offset=0.0, sigma=0.03),
                Band(fraction=0.5, radial_offset=0.8, sigma=0.03),
            )),
            doc_noise_sigma=0.02,
            seed=4,
        )
        haystack = build_haystack(generate(spec))
        distances = centroid_distances(haystack, centroid(haystack))
        counts = [n for _, n in distance_histogram(distances, 20)]

        # inner band sits near the centroid, outer band near 1 - cos(76 deg)
        self.assertEqual(sum(counts[:2]), 100)
        self.assertEqual(sum(counts[2:5]), 0)
        self.assertEqual(sum(counts[5:]), 100)

    def test_band_sizes_use_largest_remainder(self):
        spec = PopulationSpec(
            n_authors=10, docs_per_author=1, dimension=8,
            generator=RadiusBands((
                Band(1 / 3, 0.0, 0.1),
                Band(1 / 3, 0.5, 0.1),
                Band(1 / 3, 0.9, 0.1),
            )),
        )
        self.assertEqual(len(generate(spec)), 10)


class TestPlantedHubs(unittest.TestCase):
    def test_full_pull_puts_hubs_on_the_mean(self):
        spec = isotropic_spec(n_authors=200, doc_noise_sigma=0.0, seed=6)
        store, hubs = planted_unfairness(spec, hub_fraction=0.05,
                                         hub_pull=1.0)
        self.assertEqual(len(hubs), 10)
        self.assertEqual(hubs, sorted(hubs))

        haystack = build_haystack(store)
        distances = dict(zip(
            (a.author_id for a in haystack),
            centroid_distances(haystack, centroid(haystack)),
        ))
        hub_distances = [distances[a] for a in hubs]
        others = [d for a, d in distances.items() if a not in hubs]

        self.assertLess(max(hub_distances), min(others))
        # every hub sits on the same point
        self.assertLess(np.ptp(hub_distances), 1e-9)

    def test_at_least_one_hub(self):
        _, hubs = planted_unfairness(
            isotropic_spec(n_authors=10), hub_fraction=0.01, hub_pull=0.5
        )
        self.assertEqual(len(hubs), 1)

    def test_invalid_fraction(self):
        with self.assertRaises(ConfigError):
            planted_unfairness(isotropic_spec(), 1.0, 0.5)

    def test_hubs_raise_unfairness(self):
        spec = isotropic_spec(
            n_authors=1000, dimension=32, seed=8, sigma=0.25,
            doc_noise_sigma=0.1,
        )
        planted, hubs = planted_unfairness(spec, hub_fraction=0.05,
                                           hub_pull=0.9)
        self.assertEqual(len(hubs), 50)

        # measured with seed 8: spearman 0.99951, mean top-10 count 56.56
        # for hubs against 6.536 for the rest (8.65x)
        table, slices, haystack = evaluate(planted)
        report = geometry_report(haystack, table)
        self.assertGreater(report.correlation.coefficient, 0.5)

        counts = tally_topk(slices, 10, table.haystack_ids).counts
        hub_mean = np.mean([counts[a] for a in hubs])
        other_mean = np.mean([c for a, c in counts.items() if a not in hubs])
        self.assertGreaterEqual(hub_mean, 2 * other_mean)

        _, baseline, _ = evaluate(generate(spec))
        self.assertLess(
            maui(tally_topk(baseline, 10, table.haystack_ids)),
            maui(tally_topk(slices, 10, table.haystack_ids)),
        )


class TestSpecDicts(unittest.TestCase):
    def test_parse(self):
        spec = population_spec_from_dict(isotropic_spec_dict(n_authors=20))

        self.assertEqual(spec.n_authors, 20)
        self.assertIsInstance(spec.generator, IsotropicGaussian)
        self.assertEqual(spec.generator.sigma, 0.25)
        self.assertEqual(
            population_spec_from_dict(population_spec_to_dict(spec)), spec
        )

    def test_parse_bands(self):
        data = isotropic_spec_dict()
        data["generator"] = {
            "kind": "radius_bands",
            "bands": [
                {"fraction": 0.25, "radial_offset": 0.0, "sigma": 0.05},
                {"fraction": 0.75, "radial_offset": 0.6, "sigma": 0.05},
            ],
        }
        spec = population_spec_from_dict(data)

        self.assertEqual(spec.generator.bands[1], Band(0.75, 0.6, 0.05))
        self.assertEqual(
            population_spec_from_dict(population_spec_to_dict(spec)), spec
        )

    def test_parse_hubs(self):
        data = isotropic_spec_dict()
        data["generator"] = {"kind": "planted_hubs", "n_hubs": 3,
                             "hub_pull": 0.9}
        spec = population_spec_from_dict(data)
        self.assertEqual(spec.generator, PlantedHubs(n_hubs=3, hub_pull=0.9))

    def test_unknown_keys(self):
        data = isotropic_spec_dict()
        data["colour"] = "blue"
        with self.assertRaises(ConfigError) as ctx:
            population_spec_from_dict(data)
        self.assertIn("unknown key population.colour", str(ctx.exception))

        data = isotropic_spec_dict()
        data["generator"]["skew"] = 1.0
        with self.assertRaises(ConfigError) as ctx:
            population_spec_from_dict(data)
        self.assertIn("population.generator.skew", str(ctx.exception))

    def test_wrong_types(self):
        cases = [
            ("seed", "seven"),
            ("seed", 1.5),
            ("n_authors", 60.5),
            ("n_authors", True),
            ("dimension", "16"),
            ("docs_per_author", 2.0),
            ("query_docs_per_author", None),
            ("doc_noise_sigma", "0.1"),
        ]
        for key, value in cases:
            data = isotropic_spec_dict()
            data[key] = value
            with self.assertRaises(ConfigError, msg=key) as ctx:
                population_spec_from_dict(data)
            self.assertIn("population." + key, str(ctx.exception))

        for key, value in (("sigma", "wide"), ("mean_norm", float("nan")),
                           ("mean_direction", ["a"] * 16)):
            data = isotropic_spec_dict()
            data["generator"][key] = value
            with self.assertRaises(ConfigError, msg=key):
                population_spec_from_dict(data)

    def test_missing_and_unknown_kind(self):
        data = isotropic_spec_dict()
        del data["dimension"]
        with self.assertRaises(ConfigError):
            population_spec_from_dict(data)

        data = isotropic_spec_dict()
        data["generator"]["kind"] = "gaussian_mixture"
        with self.assertRaises(ConfigError):
            population_spec_from_dict(data)


if __name__ == "__main__":
    unittest.main()
