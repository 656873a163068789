"""
Family Schema Loader Utility

Loads the parameter schemas of the built-in function families from the JSON
files packaged under ``growthlab/families/``. Schemas are cached so that
repeated catalogue listings and config validation do not re-read the files.
"""

import json
from pathlib import Path
from typing import Dict, List, Optional

from growthlab.services.errors import UnknownFamilyError


class FamilyLoader:
    """
    Singleton loader for family parameter schemas.

    Each family ``<name>`` is described by ``families/<name>.json`` with a
    ``description`` and a ``parameters`` mapping of parameter name to a short
    type/meaning string.
    """

    _instance: Optional['FamilyLoader'] = None
    _schema_cache: Dict[str, dict] = {}

    def __new__(cls) -> 'FamilyLoader':
        """Singleton pattern to ensure only one instance exists."""
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not hasattr(self, 'initialized'):
            # utils/ -> growthlab/ -> families/
            self.families_path = Path(__file__).parent.parent / 'families'
            self.initialized = True

    def load_schema(self, name: str) -> dict:
        """
        Load the schema of one family.

        Raises:
            UnknownFamilyError: if no schema file exists for ``name``
            IOError: if the file exists but cannot be read
        """
        if name in self._schema_cache:
            return self._schema_cache[name]

        schema_path = self.families_path / f"{name}.json"
        if not schema_path.exists():
            raise UnknownFamilyError(f"Unknown family: '{name}'")

        try:
            with open(schema_path, 'r', encoding='utf-8') as file:
                schema = json.load(file)
        except (IOError, json.JSONDecodeError) as e:
            raise IOError(f"Error reading family schema {schema_path}: {e}")

        schema.setdefault("name", name)
        self._schema_cache[name] = schema
        return schema

    def list_available_families(self) -> List[str]:
        if not self.families_path.exists():
            return []
        return sorted(f.stem for f in self.families_path.glob("*.json"))


# Global instance for easy access
family_loader = FamilyLoader()
