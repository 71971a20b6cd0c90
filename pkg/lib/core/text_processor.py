import functools
from typing import List


def sanitize_text(text: str) -> str:
    """
    Sanitize text to a valid file name.

    Args:
        text: Text to sanitize

    Returns:
        str: Sanitized text

    Raises:
        ValueError: If text is invalid
    """
    if not text.strip():
        raise ValueError("Invalid text")

    chars_to_replace = [" ", "-", ".", ":", "(", ")", "/", "\\", ",", "=", "*"]
    sanitized = functools.reduce(
        lambda n, char: n.replace(char, "_"),
        chars_to_replace,
        text.strip().lower(),
    )

    # Replace multiple consecutive underscores with a single underscore
    return "_".join(filter(None, sanitized.split("_")))


def parse_number_list(text: str) -> List[float]:
    """
    Parse a comma separated list of numbers such as ``4,8,16``.

    Args:
        text: Comma separated numbers

    Returns:
        List[float]: Parsed values in input order

    Raises:
        ValueError: If an entry is not a number
    """
    values = []
    for entry in filter(None, (part.strip() for part in text.split(","))):
        try:
            values.append(float(entry))
        except ValueError as exc:
            raise ValueError(f"Not a number: {entry!r}") from exc
    return values


def format_number(value: float) -> str:
    """
    Format a real number with 17 significant digits.

    Args:
        value: Number to format

    Returns:
        str: Scientific notation, round-trip exact for doubles
    """
    return f"{float(value):.16e}"
