"""Published mappings shipped as mapping files in ``mdbicm/data``."""

from importlib import resources

from .mapping import MDMapping, parse_mapping_file

NAMES = ("8psk", "8qam", "16qam", "32qam", "64qam", "128qam", "256qam", "512qam", "1024qam")


def fixture_text(name: str) -> str:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    return resources.files("mdbicm.data").joinpath(f"{name}.map").read_text()


def load_fixture(name: str, n: int | None = None) -> MDMapping:
    """Parse a shipped fixture, optionally for a different vector length ``n``."""
    return parse_mapping_file(fixture_text(name), n=n)
