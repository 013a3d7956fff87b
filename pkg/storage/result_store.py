import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from utils.errors import InvalidArgumentError
from utils.formatting import dumps

logger = logging.getLogger(__name__)


class ResultStore:
    """Content-addressed archive of computation results.

    A result is stored as ``base/hash[:2]/hash[2:4]/{hash}.json`` with a
    ``{hash}_meta.json`` sidecar; the hash is the SHA-256 of the canonical
    JSON of the request that produced it, so repeating a computation maps
    to the same entry.
    """

    def __init__(self, base_path: str):
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)
        self.logger = logging.getLogger(__name__)

    @staticmethod
    def request_hash(request: Dict[str, Any]) -> str:
        canonical = json.dumps(json.loads(dumps(request, indent=None)), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def _get_storage_path(self, result_hash: str) -> Path:
        if len(result_hash) < 4 or any(c not in "0123456789abcdef" for c in result_hash):
            raise InvalidArgumentError(f"Malformed result hash '{result_hash}'")
        return self.base_path / result_hash[:2] / result_hash[2:4]

    def store(self, kind: str, request: Dict[str, Any], result: Any) -> str:
        result_hash = self.request_hash({"kind": kind, "request": request})
        storage_path = self._get_storage_path(result_hash)
        storage_path.mkdir(parents=True, exist_ok=True)

        (storage_path / f"{result_hash}.json").write_text(dumps(result))
        metadata = {
            "kind": kind,
            "request": request,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "result_hash": result_hash,
        }
        (storage_path / f"{result_hash}_meta.json").write_text(dumps(metadata))
        self.logger.info(f"Archived {kind} result {result_hash[:12]}")
        return result_hash

    def retrieve(self, result_hash: str) -> Optional[Dict[str, Any]]:
        storage_path = self._get_storage_path(result_hash)
        result_file = storage_path / f"{result_hash}.json"
        metadata_file = storage_path / f"{result_hash}_meta.json"
        if not result_file.exists() or not metadata_file.exists():
            return None
        return {
            "result": json.loads(result_file.read_text()),
            "metadata": json.loads(metadata_file.read_text()),
        }

    def list_results(self, kind: Optional[str] = None) -> List[Dict[str, Any]]:
        """Metadata of every archived result, optionally filtered by kind."""
        entries = []
        for hash_dir in self.base_path.glob("[0-9a-f][0-9a-f]"):
            for sub_dir in hash_dir.glob("[0-9a-f][0-9a-f]"):
                for meta_file in sub_dir.glob("*_meta.json"):
                    try:
                        metadata = json.loads(meta_file.read_text())
                    except (OSError, json.JSONDecodeError) as e:
                        self.logger.warning(f"Skipping unreadable metadata {meta_file}: {e}")
                        continue
                    if kind is None or metadata.get("kind") == kind:
                        entries.append(metadata)
        return sorted(entries, key=lambda m: m.get("created_at", ""))
