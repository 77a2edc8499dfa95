"""Locating optional external datasets.

Published corpora and the revised reference are not shipped. Point
``ONOMASTAT_DATA_DIR`` at a directory holding any of the files below and the
dataset-dependent checks pick them up:

    reference_revised_ilan.csv     name_key,count  (revised reference)
    reference_gb_ilan.csv          name_key,count  (reference used by the
                                   contested-name analyses)
    lexicon_revised_ilan.csv       lexicon schema; its three source-type
                                   iterations are built with default criteria
    corpora.csv                    corpus schema; labels listed in CORPUS_LABELS
    rare_pool.csv                  N,R  (composition of the 2,582-occurrence pool)
"""

import csv
import os
from pathlib import Path

ENV_VAR = "ONOMASTAT_DATA_DIR"

FILES = {
    "reference_revised": "reference_revised_ilan.csv",
    "reference_gb": "reference_gb_ilan.csv",
    "lexicon_revised": "lexicon_revised_ilan.csv",
    "corpora": "corpora.csv",
    "rare_pool": "rare_pool.csv",
}

#: corpus label -> role in the dataset-dependent checks
CORPUS_LABELS = {
    "gb_gospels_acts": "82 Gospels+Acts occurrences, contested ones marked attested=false",
    "bauckham_gospels_acts": "Bauckham list",
    "revised_list_gospels_acts": "revised Gospels-Acts list",
    "ben_hur": "Ben Hur, 31 names",
    "gb_talmud": "Babylonian Talmud, 87 occurrences",
    "gb_apocryphal": "combined apocryphal corpus",
    "gb_uniform": "uniform sample",
    "gospels_acts_hellenists": "Gospels-Acts including the Acts 6.5 Hellenists",
    "matthew": "qualifier table column",
    "mark": "qualifier table column",
    "luke_acts": "qualifier table column",
    "john": "qualifier table column",
    "acts_of_pilate": "qualifier table column",
    "book_of_bee": "qualifier table column",
    "clementine_homilies": "qualifier table column",
    "ben_hur_qualifiers": "qualifier table column",
    "the_spear": "qualifier table column",
}


def data_dir():
    root = os.environ.get(ENV_VAR)
    if not root:
        return None
    path = Path(root)
    return path if path.is_dir() else None


def fixture_path(key):
    """Path of a known dataset file, or None when it is not available."""
    root = data_dir()
    if root is None:
        return None
    path = root / FILES[key]
    return path if path.is_file() else None


def read_rare_pool(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        row = next(csv.DictReader(fh))
    return int(row["N"]), int(row["R"])
