"""Bundled data files."""

from importlib import resources

from ..corpus import loads_canonical


def load_synthetic():
    """The 20-sentence synthetic review corpus used for overfit checks."""
    return loads_canonical(resources.files(__package__).joinpath("synthetic.jsonl").read_text("utf-8"))


SYNTHETIC_PATH = resources.files(__package__).joinpath("synthetic.jsonl")
