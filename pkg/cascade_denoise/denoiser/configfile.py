"""
Plain ``key=value`` run configuration files.

    # comment
    steps=200
    model.patch_size=16
    data.noise_sigmas=0.02,0.05,0.1

Dotted keys nest; values stay strings and are coerced by the pydantic schema.
"""
from pathlib import Path
import logging
import os

from autodiff.exceptions import ParseError

logger = logging.getLogger(__name__)

SEED_ENV = "CASCADE_DENOISE_SEED"


def parse_config(text):
    tree = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", line=number)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not part for part in key.split(".")):
            raise ParseError(f"empty key in {raw.strip()!r}", line=number)
        *sections, leaf = key.split(".")
        node = tree
        for section in sections:
            node = node.setdefault(section, {})
            if not isinstance(node, dict):
                raise ParseError(f"{section!r} is both a value and a section", line=number)
        if isinstance(node.get(leaf), dict):
            raise ParseError(f"{key!r} is already a section", line=number)
        node[leaf] = value
    return tree


def apply_seed_override(tree):
    seed = os.environ.get(SEED_ENV)
    if seed:
        logger.info(f"seed overridden to {seed} by {SEED_ENV}")
        tree = dict(tree, seed=seed)
    return tree


def load_config(path, schema, overrides=None):
    """Read, apply the seed override and CLI ``overrides``, then validate with ``schema``."""
    tree = apply_seed_override(parse_config(Path(path).read_text()))
    for key, value in (overrides or {}).items():
        if value is not None:
            tree[key] = value
    return schema.model_validate(tree)
