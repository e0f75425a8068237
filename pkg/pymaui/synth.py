"""
Synthetic embedding populations with controlled geometry.

Every author gets a latent vector from one of three generators; each of
their documents is that latent plus isotropic Gaussian noise, unit
normalised. Stores come out already split into haystack and query
documents.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from pymaui.embeddingstore import (
    DEGENERATE_NORM,
    AuthorSplit,
    DocumentEmbedding,
    EmbeddingStore,
)
from pymaui.exceptions import ConfigError, DataError
from pymaui.utils import check_int, check_keys, check_real, make_rng, unit

logger = logging.getLogger(__name__)

ISOTROPIC_GAUSSIAN = "isotropic_gaussian"
RADIUS_BANDS = "radius_bands"
PLANTED_HUBS = "planted_hubs"

FRACTION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class IsotropicGaussian:
    """latent = mean_norm * mean_direction + sigma * N(0, I)"""

    mean_norm: float = 1.0
    sigma: float = 0.25
    # drawn at random when not given
    mean_direction: Optional[Tuple[float, ...]] = None

    kind = ISOTROPIC_GAUSSIAN


@dataclass(frozen=True)
class Band:
    fraction: float
    radial_offset: float
    sigma: float


@dataclass(frozen=True)
class RadiusBands:
    """
    Authors in a band with offset o sit at
    ``(1 - o) * mean_direction + o * u + sigma * N(0, I)`` where u is a
    random unit vector orthogonal to the mean direction.
    """

    bands: Tuple[Band, ...]

    kind = RADIUS_BANDS


@dataclass(frozen=True)
class PlantedHubs:
    """
    Isotropic population whose first ``n_hubs`` randomly chosen authors are
    pulled toward the population mean by ``hub_pull``.
    """

    n_hubs: int
    hub_pull: float
    mean_norm: float = 1.0
    sigma: float = 0.25
    mean_direction: Optional[Tuple[float, ...]] = None

    kind = PLANTED_HUBS


Generator = Union[IsotropicGaussian, RadiusBands, PlantedHubs]


@dataclass(frozen=True)
class PopulationSpec:
    n_authors: int
    # haystack documents per author
    docs_per_author: int
    dimension: int
    generator: Generator
    doc_noise_sigma: float = 0.1
    seed: int = 0
    # held out per author as query documents; 0 leaves the store unsplit
    query_docs_per_author: int = 1

    def validate(self, path: str = "population") -> None:
        """:raises ConfigError: on a wrongly typed or out of range field"""
        check_int(self.n_authors, path + ".n_authors", minimum=2)
        check_int(self.docs_per_author, path + ".docs_per_author", minimum=1)
        check_int(self.query_docs_per_author,
                  path + ".query_docs_per_author", minimum=0)
        check_int(self.dimension, path + ".dimension", minimum=2)
        check_int(self.seed, path + ".seed")
        if check_real(self.doc_noise_sigma, path + ".doc_noise_sigma") < 0:
            raise ConfigError("doc_noise_sigma must not be negative")

        generator = self.generator
        where = path + ".generator"
        if isinstance(generator, RadiusBands):
            if not generator.bands:
                raise ConfigError("radius_bands needs at least one band")
            for i, band in enumerate(generator.bands):
                band_path = "%s.bands[%d]" % (where, i)
                fraction = check_real(band.fraction, band_path + ".fraction")
                check_real(band.radial_offset, band_path + ".radial_offset")
                sigma = check_real(band.sigma, band_path + ".sigma")
                if fraction < 0 or sigma <= 0:
                    raise ConfigError("invalid band %r" % (band,))
            total = sum(b.fraction for b in generator.bands)
            if abs(total - 1.0) > FRACTION_TOLERANCE:
                raise ConfigError("band fractions sum to %r, not 1" % total)
            return

        if check_real(generator.sigma, where + ".sigma") <= 0:
            raise ConfigError("sigma must be positive")
        if check_real(generator.mean_norm, where + ".mean_norm") < 0:
            raise ConfigError("mean_norm must not be negative")
        if generator.mean_direction is not None and (
            len(generator.mean_direction) != self.dimension
        ):
            raise ConfigError("mean_direction does not match dimension")

        if isinstance(generator, PlantedHubs):
            check_int(generator.n_hubs, where + ".n_hubs")
            check_real(generator.hub_pull, where + ".hub_pull")
            if not 0 < generator.n_hubs < self.n_authors:
                raise ConfigError(
                    "n_hubs must be in [1, n_authors), got %d"
                    % generator.n_hubs
                )
            if not 0 < generator.hub_pull <= 1:
                raise ConfigError("hub_pull must be in (0, 1]")


def _mean_direction(
    given: Optional[Sequence[float]], dimension: int, rng
) -> np.ndarray:
    if given is None:
        return unit(rng.standard_normal(dimension))

    direction = np.asarray(given, dtype=np.float64)
    if np.linalg.norm(direction) <= DEGENERATE_NORM:
        raise DataError("degenerate spec: zero mean_direction")

    return unit(direction)


def _orthogonal_unit(direction: np.ndarray, rng) -> np.ndarray:
    while True:
        v = rng.standard_normal(direction.size)
        v -= np.dot(v, direction) * direction
        if np.linalg.norm(v) > DEGENERATE_NORM:
            return unit(v)


def _band_sizes(fractions: Sequence[float], n: int) -> List[int]:
    """Largest-remainder apportionment of n authors to bands."""
    quotas = [f * n for f in fractions]
    sizes = [int(np.floor(q)) for q in quotas]
    by_remainder = sorted(
        range(len(quotas)), key=lambda i: (sizes[i] - quotas[i], i)
    )
    for i in by_remainder[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def _latents(spec: PopulationSpec, rng) -> Tuple[np.ndarray, List[int]]:
    """Latent vector of every author plus the indices of planted hubs."""
    generator = spec.generator
    n, d = spec.n_authors, spec.dimension

    if isinstance(generator, RadiusBands):
        direction = _mean_direction(None, d, rng)
        rows = []
        sizes = _band_sizes([b.fraction for b in generator.bands], n)
        for band, size in zip(generator.bands, sizes):
            for _ in range(size):
                offset = band.radial_offset
                rows.append(
                    (1.0 - offset) * direction
                    + offset * _orthogonal_unit(direction, rng)
                    + band.sigma * rng.standard_normal(d)
                )
        return np.asarray(rows), []

    direction = _mean_direction(generator.mean_direction, d, rng)
    mean = generator.mean_norm * direction
    latents = mean + generator.sigma * rng.standard_normal((n, d))

    if not isinstance(generator, PlantedHubs):
        return latents, []

    hubs = sorted(rng.choice(n, size=generator.n_hubs, replace=False))
    pull = generator.hub_pull
    for i in hubs:
        latents[i] = (1.0 - pull) * latents[i] + pull * mean

    return latents, [int(i) for i in hubs]


def author_id(index: int, n_authors: int) -> str:
    return "a%0*d" % (max(4, len(str(n_authors - 1))), index)


def _generate(spec: PopulationSpec) -> Tuple[EmbeddingStore, List[str]]:
    spec.validate()
    rng = make_rng(spec.seed)
    latents, hubs = _latents(spec, rng)

    norms = np.linalg.norm(latents, axis=1)
    if np.any(norms <= DEGENERATE_NORM):
        raise DataError("degenerate spec: zero-norm latent")

    n_docs = spec.docs_per_author + spec.query_docs_per_author
    width = len(str(n_docs - 1))
    documents = []
    splits: Dict[str, AuthorSplit] = {}

    for index, latent in enumerate(latents):
        name = author_id(index, spec.n_authors)
        noise = spec.doc_noise_sigma * rng.standard_normal(
            (n_docs, spec.dimension)
        )
        doc_ids = ["d%0*d" % (width, j) for j in range(n_docs)]

        for doc_id, vector in zip(doc_ids, latent + noise):
            if np.linalg.norm(vector) <= DEGENERATE_NORM:
                raise DataError(
                    "degenerate document %s/%s: zero vector" % (name, doc_id)
                )
            documents.append(DocumentEmbedding(name, doc_id, unit(vector)))

        if spec.query_docs_per_author:
            splits[name] = AuthorSplit(
                tuple(doc_ids[: spec.docs_per_author]),
                tuple(doc_ids[spec.docs_per_author:]),
            )

    store = EmbeddingStore(documents, splits=splits or None)
    logger.info(
        "generated %s population: %r", spec.generator.kind, store
    )

    return store, [author_id(i, spec.n_authors) for i in hubs]


def generate(spec: PopulationSpec) -> EmbeddingStore:
    """Deterministic store for ``spec``; the same seed gives the same bytes."""
    return _generate(spec)[0]


def planted_unfairness(
    spec: PopulationSpec, hub_fraction: float, hub_pull: float
) -> Tuple[EmbeddingStore, List[str]]:
    """
    Isotropic population with near-centroid hub authors.

    ``spec.generator`` supplies the base isotropic parameters. A fraction
    ``hub_fraction`` of the authors have their latents interpolated toward
    the population mean by ``hub_pull``; hub_pull = 1 puts them exactly on
    it.

    :return: (store, sorted hub author ids)
    """
    if not 0 < hub_fraction < 1:
        raise ConfigError("hub_fraction must be in (0, 1)")

    base = spec.generator
    if not isinstance(base, (IsotropicGaussian, PlantedHubs)):
        raise ConfigError("planted hubs need an isotropic base population")

    n_hubs = max(1, int(round(hub_fraction * spec.n_authors)))
    hubbed = PopulationSpec(
        n_authors=spec.n_authors,
        docs_per_author=spec.docs_per_author,
        dimension=spec.dimension,
        generator=PlantedHubs(
            n_hubs=n_hubs,
            hub_pull=hub_pull,
            mean_norm=base.mean_norm,
            sigma=base.sigma,
            mean_direction=base.mean_direction,
        ),
        doc_noise_sigma=spec.doc_noise_sigma,
        seed=spec.seed,
        query_docs_per_author=spec.query_docs_per_author,
    )

    return _generate(hubbed)


_SPEC_KEYS = (
    "n_authors",
    "docs_per_author",
    "query_docs_per_author",
    "dimension",
    "generator",
    "doc_noise_sigma",
    "seed",
)
_GENERATOR_KEYS = {
    ISOTROPIC_GAUSSIAN: ("kind", "mean_norm", "sigma", "mean_direction"),
    RADIUS_BANDS: ("kind", "bands"),
    PLANTED_HUBS: (
        "kind", "n_hubs", "hub_pull", "mean_norm", "sigma", "mean_direction"
    ),
}


def _generator_from_dict(data: Dict, path: str) -> Generator:
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind not in _GENERATOR_KEYS:
        raise ConfigError("%s.kind must be one of %s" % (
            path, ", ".join(sorted(_GENERATOR_KEYS))
        ))
    check_keys(data, _GENERATOR_KEYS[kind], path)
    fields = {k: v for k, v in data.items() if k != "kind"}

    direction = fields.get("mean_direction")
    if direction is not None:
        if not isinstance(direction, list):
            raise ConfigError("%s.mean_direction must be an array" % path)
        fields["mean_direction"] = tuple(
            check_real(x, "%s.mean_direction[%d]" % (path, i))
            for i, x in enumerate(direction)
        )

    try:
        if kind == ISOTROPIC_GAUSSIAN:
            return IsotropicGaussian(**fields)
        if kind == PLANTED_HUBS:
            return PlantedHubs(**fields)

        bands = []
        for i, band in enumerate(fields.get("bands") or ()):
            where = "%s.bands[%d]" % (path, i)
            check_keys(
                band, ("fraction", "radial_offset", "sigma"), where,
                required=("fraction", "radial_offset", "sigma"),
            )
            bands.append(Band(**band))
        return RadiusBands(tuple(bands))

    except TypeError as e:
        raise ConfigError("%s: %s" % (path, e))


def population_spec_from_dict(
    data: Dict, path: str = "population"
) -> PopulationSpec:
    """Parse the JSON form of a PopulationSpec; unknown keys are rejected."""
    check_keys(
        data, _SPEC_KEYS, path,
        required=("n_authors", "docs_per_author", "dimension", "generator"),
    )
    fields = dict(data)
    fields["generator"] = _generator_from_dict(
        data["generator"], path + ".generator"
    )
    try:
        spec = PopulationSpec(**fields)
        spec.validate(path)
    except TypeError as e:
        raise ConfigError("%s: %s" % (path, e))

    return spec


def population_spec_to_dict(spec: PopulationSpec) -> Dict:
    generator = spec.generator

    if isinstance(generator, RadiusBands):
        generator_dict = {
            "kind": RADIUS_BANDS,
            "bands": [
                {
                    "fraction": b.fraction,
                    "radial_offset": b.radial_offset,
                    "sigma": b.sigma,
                }
                for b in generator.bands
            ],
        }
    else:
        generator_dict = {
            "kind": generator.kind,
            "mean_norm": generator.mean_norm,
            "sigma": generator.sigma,
            "mean_direction": (
                None if generator.mean_direction is None
                else list(generator.mean_direction)
            ),
        }
        if isinstance(generator, PlantedHubs):
            generator_dict["n_hubs"] = generator.n_hubs
            generator_dict["hub_pull"] = generator.hub_pull

    return {
        "n_authors": spec.n_authors,
        "docs_per_author": spec.docs_per_author,
        "query_docs_per_author": spec.query_docs_per_author,
        "dimension": spec.dimension,
        "doc_noise_sigma": spec.doc_noise_sigma,
        "seed": spec.seed,
        "generator": generator_dict,
    }
