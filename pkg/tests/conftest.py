"""Shared fixtures: synthetic corpora, feature sets, and ORL discovery."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from faceid.dataset import load_orl, split_first_k, synth_corpus, write_pgm
from faceid.evaluation import extract_split_features
from faceid.transforms import DCT, ZonalMask

ORL_ENV = "FACEID_ORL_DIR"
ORL_DEFAULT = Path("data/orl")


def orl_root() -> Path | None:
    env = os.environ.get(ORL_ENV)
    if env and Path(env).is_dir():
        return Path(env)
    if (ORL_DEFAULT / "s1").is_dir():
        return ORL_DEFAULT
    return None


@pytest.fixture(scope="session")
def orl():
    root = orl_root()
    if root is None:
        pytest.skip(f"ORL dataset not present (set ${ORL_ENV} or unpack "
                    f"under {ORL_DEFAULT})")
    return load_orl(root)


@pytest.fixture(scope="session")
def small_corpus():
    return synth_corpus(seed=11, n_subjects=8, samples=6, rows=24, cols=20)


@pytest.fixture(scope="session")
def small_split(small_corpus):
    return split_first_k(small_corpus, 3)


@pytest.fixture(scope="session")
def dct_features(small_split):
    """(gallery, probes) DCT rect:5 feature lists over the synthetic split."""
    return extract_split_features(small_split, DCT, mask=ZonalMask.rectangular(5))


@pytest.fixture()
def pgm_tree(tmp_path):
    """Synthetic corpus laid out as s<N>/<k>.pgm under a temp root."""
    corpus = synth_corpus(seed=4, n_subjects=5, samples=6, rows=16, cols=14)
    for im in corpus.images:
        d = tmp_path / f"s{im.subject_id}"
        d.mkdir(exist_ok=True)
        write_pgm(im, d / f"{im.sample_id}.pgm")
    return tmp_path, corpus
