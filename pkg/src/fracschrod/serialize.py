"""JSON and CSV writers with a fixed floating-point contract.

All numeric output of the toolkit prints IEEE-754 doubles at 17 significant
digits, enough to round-trip any double exactly.  JSON is built through a
formatting pass of our own because the stdlib encoder does not expose the
float format.
"""

import json


def format_double(x: float) -> str:
    """Render a double at 17 significant digits."""
    return f"{float(x):.17g}"


def _render(obj) -> str:
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return format_double(obj)
    if isinstance(obj, int):
        return str(obj)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return _render(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps(obj) -> str:
    """Serialize to JSON text with the 17-digit float format."""
    return _render(obj)


def dump(obj, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    """Write a CSV file; floats at 17 significant digits, header row first."""
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [format_double(v) if isinstance(v, float) or hasattr(v, "dtype")
                     else str(v) for v in row]
            fh.write(",".join(cells) + "\n")
