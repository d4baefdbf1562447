"""Language code <-> English name table used in prompts and mocks."""

from __future__ import annotations

LANG_NAMES = {
    "de": "German",
    "en": "English",
    "cs": "Czech",
    "zh": "Chinese",
    "fr": "French",
    "es": "Spanish",
    "it": "Italian",
    "nl": "Dutch",
    "pt": "Portuguese",
    "ru": "Russian",
    "ja": "Japanese",
    "ko": "Korean",
    "ar": "Arabic",
}

_NAME_TO_CODE = {name.lower(): code for code, name in LANG_NAMES.items()}

# Languages written without spaces between words; term matching falls back
# to substring search for these.
NON_SPACE_DELIMITED = {"zh", "ja", "th"}


def lang_name(code: str, extra: dict | None = None) -> str:
    """English name for a language code; extra entries override the table."""
    base = code.split("-")[0].lower()
    if extra and base in extra:
        return extra[base]
    if base in LANG_NAMES:
        return LANG_NAMES[base]
    raise KeyError(f"no language name known for code {code!r}; extend the table via config")


def lang_code(name: str, extra: dict | None = None) -> str:
    """Language code for an English name (inverse of lang_name)."""
    if extra:
        for code, n in extra.items():
            if n.lower() == name.lower():
                return code
    code = _NAME_TO_CODE.get(name.lower())
    if code is None:
        raise KeyError(f"no language code known for name {name!r}")
    return code


def is_space_delimited(code: str) -> bool:
    return code.split("-")[0].lower() not in NON_SPACE_DELIMITED
