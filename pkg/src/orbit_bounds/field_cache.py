"""
Persistent memo for field discriminants and quadratic class numbers.

The cache file is plain text, one entry per line::

    disc <modulus>:<sorted subgroup residues> <value>
    classno <discriminant> <value>

Blank lines and lines starting with ``#`` are ignored. Values are decimal
integers written bit-exactly.

Readers never take the lock: lookups go to an immutable snapshot that writers
replace wholesale under the lock.
"""

import logging
import os
import re
import threading
from pathlib import Path
from types import MappingProxyType

from orbit_bounds.errors import InstanceError
from orbit_bounds.fields import AbelianFieldSpec

logger = logging.getLogger(__name__)

_LINE = re.compile(
    r"^(?P<kind>disc) (?P<key>\d+:\d+(?:,\d+)*) (?P<value>\d+)$"
    r"|^(?P<ckind>classno) (?P<ckey>-?\d+) (?P<cvalue>\d+)$"
)


class FieldCache:
    """Thread-safe memo of ``(kind, key) -> value`` pairs."""

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path else None
        self._lock = threading.Lock()
        self._entries: MappingProxyType = MappingProxyType({})
        self._dirty = False

    def __len__(self) -> int:
        return len(self._entries)

    def _get(self, kind: str, key: str) -> int | None:
        return self._entries.get((kind, key))

    def _put(self, kind: str, key: str, value: int) -> None:
        with self._lock:
            if self._entries.get((kind, key)) == value:
                return
            entries = dict(self._entries)
            entries[(kind, key)] = int(value)
            self._entries = MappingProxyType(entries)
            self._dirty = True

    def get_discriminant(self, field: AbelianFieldSpec) -> int | None:
        return self._get("disc", field.cache_key)

    def put_discriminant(self, field: AbelianFieldSpec, value: int) -> None:
        self._put("disc", field.cache_key, value)

    def get_class_number(self, d: int) -> int | None:
        return self._get("classno", str(d))

    def put_class_number(self, d: int, value: int) -> None:
        self._put("classno", str(d), value)

    def load(self, path: str | os.PathLike | None = None) -> int:
        """
        Merge entries from a cache file.

        A missing file is not an error; the cache simply starts empty.

        Args:
            path: File to read. Defaults to the path given at construction.

        Returns:
            int: Number of entries read.

        Raises:
            InstanceError: If a line does not follow the cache grammar.
        """
        path = Path(path) if path else self.path
        if path is None or not path.exists():
            return 0

        loaded = {}
        for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            match = _LINE.match(line)
            if match is None:
                raise InstanceError(f"{path}:{number}: malformed cache line {raw!r}")
            if match["kind"]:
                loaded[("disc", match["key"])] = int(match["value"])
            else:
                loaded[("classno", match["ckey"])] = int(match["cvalue"])

        with self._lock:
            entries = dict(self._entries)
            entries.update(loaded)
            self._entries = MappingProxyType(entries)

        logger.info("Loaded %d cache entries from %s", len(loaded), path)
        return len(loaded)

    def save(self, path: str | os.PathLike | None = None) -> None:
        """Write all entries, sorted by kind and key, if anything changed."""
        path = Path(path) if path else self.path
        if path is None:
            return
        with self._lock:
            if not self._dirty and path.exists():
                return
            lines = [
                f"{kind} {key} {value}\n"
                for (kind, key), value in sorted(self._entries.items())
            ]
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("".join(lines), encoding="utf-8")
            self._dirty = False
        logger.info("Saved %d cache entries to %s", len(lines), path)
