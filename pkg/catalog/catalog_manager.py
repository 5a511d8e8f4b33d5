import json
import logging
from pathlib import Path
from typing import Dict, Final, List, Optional

from fuzzywuzzy import process

from errors import InvalidInputError

logger = logging.getLogger(__name__)

CATALOG_DIR: Final = Path(__file__).resolve().parent
KINDS: Final = ("matrix", "sequence", "laurent", "power_series", "function", "kernel")
SUGGESTION_SCORE: Final = 60


class CatalogManager:
    """Named example inputs, loaded from the JSON files next to this module."""

    def __init__(self, catalog_dir: Path = CATALOG_DIR):
        self.catalog_dir = Path(catalog_dir)
        self.entries: Dict[str, Dict] = {}
        self.load_catalog()

    def load_catalog(self) -> None:
        """Load every *.json file of the catalog directory."""
        if not self.catalog_dir.exists():
            logger.error(f"Catalog directory '{self.catalog_dir}' not found!")
            return

        for path in sorted(self.catalog_dir.glob("*.json")):
            try:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                logger.error(f"Error loading {path.name}: {e}")
                continue

            kind = data.get("kind")
            items = data.get("entries")
            if kind not in KINDS or not isinstance(items, dict):
                logger.error(f"No usable entries found in {path.name}")
                continue
            for name, entry in items.items():
                if name in self.entries:
                    logger.warning(f"Catalog entry '{name}' in {path.name} replaces an earlier one")
                self.entries[name] = {"name": name, "kind": kind, **entry}
            logger.debug(f"Loaded {len(items)} {kind} entries from {path.name}")

        logger.debug(f"Total catalog entries loaded: {len(self.entries)}")

    def suggest(self, name: str) -> Optional[str]:
        """Closest entry name, if any is close enough."""
        if not self.entries:
            return None
        match = process.extractOne(name, sorted(self.entries))
        if match and match[1] >= SUGGESTION_SCORE:
            return match[0]
        return None

    def get_entry(self, name: str, kind: Optional[str] = None) -> Dict:
        """Get a catalog entry by name, optionally checking its kind."""
        entry = self.entries.get(name)
        if entry is None:
            suggestion = self.suggest(name)
            hint = f"; did you mean '{suggestion}'?" if suggestion else ""
            raise InvalidInputError(f"Unknown catalog entry '{name}'{hint}")
        if kind is not None and entry["kind"] != kind:
            raise InvalidInputError(f"Catalog entry '{name}' is a {entry['kind']}, expected a {kind}")
        return entry

    def entries_of_kind(self, kind: str) -> List[Dict]:
        """Get all entries of one kind, sorted by name."""
        return [self.entries[name] for name in sorted(self.entries) if self.entries[name]["kind"] == kind]

    def search(self, query: str) -> List[Dict]:
        """Search entries by name or description."""
        if not query:
            return []
        query = query.lower().strip()
        results = [
            entry
            for name, entry in sorted(self.entries.items())
            if query in name.lower() or query in str(entry.get("description", "")).lower()
        ]
        logger.debug(f"Catalog search for '{query}' found {len(results)} entries")
        return results
