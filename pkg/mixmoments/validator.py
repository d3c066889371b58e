"""Draft 7 validation of the JSON documents the command line reads."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from jsonschema import Draft7Validator, SchemaError, ValidationError

from .errors import DomainError

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent / "schemas" / "documents.schema.json"

VECTOR = "VectorDocument"
MIXTURE = "MixtureDocument"
UNIVARIATE_MIXTURE = "UnivariateMixtureDocument"


class DocumentValidator:
    """Validator for vector and mixture documents against the bundled schema."""

    def __init__(self, schema_path: Union[str, Path] = SCHEMA_PATH):
        self.schema_path = Path(schema_path)
        self.schema = self._load_schema()

    def _load_schema(self) -> Dict[str, Any]:
        """Load the JSON schema from file.

        Raises:
            FileNotFoundError: If schema file doesn't exist
            json.JSONDecodeError: If schema isn't valid JSON
        """
        try:
            with open(self.schema_path, "r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"Schema file not found: {self.schema_path}")
        except json.JSONDecodeError as e:
            raise json.JSONDecodeError(f"Invalid JSON in schema file: {e.msg}", e.doc, e.pos)

    def validate_file(self, path: Union[str, Path], definition: Optional[str] = None) -> Tuple[bool, Optional[str]]:
        """Validate a JSON file; the definition is detected when not given.

        Returns:
            Tuple of (is_valid, error_message)
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError:
            return False, f"Document file not found: {path}"
        except json.JSONDecodeError as e:
            return False, f"Invalid JSON in document file: {e.msg}"
        return self.validate_dict(document, definition)

    def validate_string(self, text: str, definition: Optional[str] = None) -> Tuple[bool, Optional[str]]:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            return False, f"Invalid JSON string: {e.msg}"
        return self.validate_dict(document, definition)

    def validate_dict(self, document: Any, definition: Optional[str] = None) -> Tuple[bool, Optional[str]]:
        """Validate a parsed document against one definition of the schema.

        Returns:
            Tuple of (is_valid, error_message)
        """
        definition = definition or detect_definition(document)
        if definition is None:
            return False, "Validation error at root: not a vector, mixture or univariate mixture document"
        if definition not in self.schema["definitions"]:
            return False, f"Unknown document definition: {definition}"
        try:
            validator = Draft7Validator(
                {
                    "$schema": "http://json-schema.org/draft-07/schema#",
                    "$ref": f"#/definitions/{definition}",
                    "definitions": self.schema["definitions"],
                }
            )
            errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
        except SchemaError as e:
            return False, f"Schema error: {str(e)}"
        if not errors:
            return True, None
        return False, "\n".join(self._format_validation_error(error) for error in errors)

    def _format_validation_error(self, error: ValidationError) -> str:
        path = " → ".join([str(p) for p in error.path]) if error.path else "root"
        if error.validator == "required":
            missing = [p for p in error.validator_value if p not in error.instance]
            return f"Validation error at {path}: Missing required properties: {', '.join(missing)}"
        if error.validator == "additionalProperties":
            extra = sorted(error.instance.keys() - set(error.schema.get("properties", {}).keys()))
            return f"Validation error at {path}: Additional properties not allowed: {', '.join(extra)}"
        return f"Validation error at {path}: {error.message}"

    def load(self, path: Union[str, Path], accept: Sequence[str]) -> Tuple[Dict[str, Any], str]:
        """Read, detect and validate a document, returning it with its definition name.

        Raises:
            DomainError: If the file is unreadable, of an unexpected kind or invalid.
        """
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError as e:
            raise DomainError(f"Document file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise DomainError(f"Invalid JSON in {path}: {e.msg}") from e
        definition = detect_definition(document)
        if definition not in accept:
            raise DomainError(f"{path}: expected one of {', '.join(accept)}, got {definition or 'unknown document'}")
        is_valid, error = self.validate_dict(document, definition)
        if not is_valid:
            raise DomainError(f"{path}: {error}")
        logger.debug(f"Validated {path} as {definition}")
        return document, definition


def detect_definition(document: Any) -> Optional[str]:
    """Guess which definition a loosely typed document is meant to satisfy."""
    if not isinstance(document, dict):
        return None
    if "values" in document:
        return VECTOR
    if "weights" in document or "components" in document:
        return MIXTURE
    if "lambda" in document:
        return UNIVARIATE_MIXTURE
    return None
