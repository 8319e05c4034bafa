"""Presence-table parsing and serialisation.

Accepted sources are a LaTeX ``tabular`` (the format users upload), an equivalent CSV
(``id,name,mw,rt1,rt2,mz,<one column per sample>``) and the canonical JSON written by
``to_json``. Sample classes come from a row whose first cell is ``class`` (optionally
followed by a ``subtype`` row) or from an explicit mapping.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from ..errors import DocumentError, TableParseError
from ..logging_utils import LogComponent, get_logger
from .models import Compound, PresenceMatrix, Sample, SampleClass

logger = get_logger("parser", LogComponent.SPECDATA)

TRUE_MARKERS = frozenset({"x", "X", "1", "✓"})
FALSE_MARKERS = frozenset({"", "-", "0"})

_METADATA_COLUMNS = {
    "mw": "molecular_weight",
    "molecular weight": "molecular_weight",
    "rt1": "rt1",
    "rt2": "rt2",
    "mz": "mz",
    "m/z": "mz",
}
_ID_HEADERS = {"id", "#"}
_NAME_HEADERS = {"name", "compound"}
_CLASS_ROW = "class"
_SUBTYPE_ROW = "subtype"

_LATEX_RULES = re.compile(r"\\(?:toprule|midrule|bottomrule|hline)\b|\\cline\{[^}]*\}")
_LATEX_WRAPPERS = re.compile(r"\\(?:textbf|textit|emph|texttt)\{([^{}]*)\}")
_TRAILING_NOTE = re.compile(r"\s*\([^()]*\)\s*$")
_CHECKMARK = re.compile(r"\$?\\checkmark\$?")

SampleClassMap = Mapping[str, str]


def _clean_latex_cell(cell: str) -> str:
    text = _LATEX_WRAPPERS.sub(r"\1", cell)
    text = _CHECKMARK.sub("✓", text)
    for escaped, plain in (("\\&", "&"), ("\\_", "_"), ("\\%", "%"), ("\\#", "#")):
        text = text.replace(escaped, plain)
    return text.strip()


def _split_latex_cells(row: str) -> List[str]:
    return [_clean_latex_cell(cell) for cell in re.split(r"(?<!\\)&", row)]


def _latex_rows(text: str) -> List[Tuple[int, List[str]]]:
    """Return (1-based source row number, cells) for each non-empty tabular row."""
    begin = re.search(r"\\begin\{tabular\}(?:\{(?:[^{}]|\{[^{}]*\})*\})?", text)
    end = re.search(r"\\end\{tabular\}", text)
    body = text[begin.end() if begin else 0:end.start() if end else len(text)]
    lines = [line for line in body.splitlines() if not line.lstrip().startswith("%")]
    body = _LATEX_RULES.sub("", "\n".join(lines))

    rows: List[Tuple[int, List[str]]] = []
    for raw in re.split(r"\\\\", body):
        if not raw.strip():
            continue
        rows.append((len(rows) + 1, _split_latex_cells(raw)))
    return rows


def _csv_rows(text: str) -> List[Tuple[int, List[str]]]:
    reader = csv.reader(io.StringIO(text))
    rows: List[Tuple[int, List[str]]] = []
    for line_number, cells in enumerate(reader, start=1):
        if not any(cell.strip() for cell in cells):
            continue
        rows.append((line_number, [cell.strip() for cell in cells]))
    return rows


def _parse_marker(cell: str, row: int, column: str) -> bool:
    marker = _TRAILING_NOTE.sub("", cell).strip()
    if marker in TRUE_MARKERS:
        return True
    if marker in FALSE_MARKERS:
        return False
    raise TableParseError(f"Cell marker '{cell}' is not one of x, X, 1, ✓, -, 0 or empty", row=row, column=column)


def _parse_optional_float(cell: str, row: int, column: str) -> Optional[float]:
    if cell in FALSE_MARKERS - {"0"}:
        return None
    try:
        return float(cell)
    except ValueError:
        raise TableParseError(f"Value '{cell}' is not a number", row=row, column=column) from None


def _parse_class(value: str, column: str, row: Optional[int]) -> Tuple[SampleClass, Optional[str]]:
    raw, _, subtype = value.partition(":")
    try:
        sample_class = SampleClass.parse(raw)
    except ValueError:
        raise TableParseError(f"Unknown column: sample class '{value}' is not Meteorite or Soil",
                              row=row, column=column) from None
    return sample_class, subtype.strip() or None


def _build_matrix(
    rows: Sequence[Tuple[int, List[str]]],
    sample_classes: Optional[SampleClassMap],
) -> PresenceMatrix:
    if not rows:
        raise TableParseError("Table has no header row")
    header_row, header = rows[0]
    lowered = [cell.strip().lower() for cell in header]
    if len(header) < 2 or lowered[0] not in _ID_HEADERS or lowered[1] not in _NAME_HEADERS:
        raise TableParseError("Header must start with id and name columns", row=header_row)

    metadata: Dict[int, str] = {}
    position = 2
    while position < len(header) and lowered[position] in _METADATA_COLUMNS:
        field_name = _METADATA_COLUMNS[lowered[position]]
        if field_name in metadata.values():
            raise TableParseError("Repeated metadata column", row=header_row, column=header[position])
        metadata[position] = field_name
        position += 1
    sample_columns = list(range(position, len(header)))
    sample_names = [header[i].strip() for i in sample_columns]
    if len(set(sample_names)) != len(sample_names):
        duplicate = next(name for name in sample_names if sample_names.count(name) > 1)
        raise TableParseError("Duplicate sample column", row=header_row, column=duplicate)
    if any(not name for name in sample_names):
        raise TableParseError("Empty sample column header", row=header_row)

    classes: Dict[str, Tuple[SampleClass, Optional[str]]] = {}
    for name, value in (sample_classes or {}).items():
        classes[name] = _parse_class(value, name, None)

    data_rows: List[Tuple[int, List[str]]] = []
    for row_number, cells in rows[1:]:
        if len(cells) != len(header):
            raise TableParseError(
                f"Row has {len(cells)} cells, header has {len(header)}", row=row_number,
            )
        first = cells[0].strip().lower()
        if first == _CLASS_ROW:
            for index, name in zip(sample_columns, sample_names):
                if cells[index].strip():
                    subtype = classes.get(name, (None, None))[1]
                    sample_class, declared = _parse_class(cells[index], name, row_number)
                    classes[name] = (sample_class, declared or subtype)
        elif first == _SUBTYPE_ROW:
            for index, name in zip(sample_columns, sample_names):
                if cells[index].strip() and name in classes:
                    classes[name] = (classes[name][0], cells[index].strip())
                elif cells[index].strip():
                    raise TableParseError("Subtype given before class", row=row_number, column=name)
        else:
            data_rows.append((row_number, cells))

    samples: List[Sample] = []
    for name in sample_names:
        if name not in classes:
            raise TableParseError("Unknown column: no sample class declared", row=header_row, column=name)
        sample_class, subtype = classes[name]
        samples.append(Sample(name=name, sample_class=sample_class, subtype=subtype))

    compounds: List[Compound] = []
    presence: Set[Tuple[int, str]] = set()
    seen_ids: Set[int] = set()
    for row_number, cells in data_rows:
        try:
            compound_id = int(cells[0])
        except ValueError:
            raise TableParseError(f"Compound id '{cells[0]}' is not an integer", row=row_number,
                                  column=header[0]) from None
        if compound_id in seen_ids:
            raise TableParseError(f"Duplicate compound id {compound_id}", row=row_number, column=header[0])
        seen_ids.add(compound_id)

        name = cells[1].strip()
        alt_names = tuple(part.strip() for part in name.split("/") if part.strip()) if "/" in name else ()
        values = {field_name: _parse_optional_float(cells[i].strip(), row_number, header[i])
                  for i, field_name in metadata.items()}
        try:
            compounds.append(Compound(id=compound_id, name=name, alt_names=alt_names, **values))
        except ValueError as exc:
            raise TableParseError(str(exc), row=row_number) from None

        for index, sample_name in zip(sample_columns, sample_names):
            if _parse_marker(cells[index].strip(), row_number, sample_name):
                presence.add((compound_id, sample_name))

    matrix = PresenceMatrix.build(compounds, samples, presence)
    logger.debug(
        "Parsed presence table",
        operation="parse_presence_table",
        extra_fields={"compounds": len(compounds), "samples": len(samples), "pairs": len(presence)},
    )
    return matrix


def detect_format(text: str) -> str:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return "json"
    if "\\begin{tabular}" in text or "\\\\" in text:
        return "latex"
    return "csv"


def parse_presence_table(
    text: str,
    sample_classes: Optional[SampleClassMap] = None,
    fmt: Optional[str] = None,
) -> PresenceMatrix:
    """Parse a LaTeX, CSV or canonical JSON presence table."""
    fmt = fmt or detect_format(text)
    if fmt == "json":
        return from_json(text)
    if fmt == "latex":
        return _build_matrix(_latex_rows(text), sample_classes)
    if fmt == "csv":
        return _build_matrix(_csv_rows(text), sample_classes)
    raise TableParseError(f"Unsupported table format '{fmt}'")


def load_presence_table(path: Path, sample_classes: Optional[SampleClassMap] = None) -> Tuple[PresenceMatrix, str]:
    """Read and parse a table file, returning the matrix and the raw source text."""
    if not path.is_file():
        raise DocumentError("Data file not found", str(path))
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DocumentError(f"Data file unreadable ({exc})", str(path)) from exc
    fmt = {".tex": "latex", ".csv": "csv", ".json": "json"}.get(path.suffix.lower())
    return parse_presence_table(text, sample_classes, fmt), text


def _format_float(value: Optional[float]) -> str:
    return "" if value is None else repr(value)


def _class_cell(sample: Sample) -> str:
    return sample.sample_class.value


def _table_rows(matrix: PresenceMatrix) -> List[List[str]]:
    header = ["id", "name", "mw", "rt1", "rt2", "mz", *[s.name for s in matrix.samples]]
    rows = [header, [_CLASS_ROW, "", "", "", "", "", *[_class_cell(s) for s in matrix.samples]]]
    if any(s.subtype for s in matrix.samples):
        rows.append([_SUBTYPE_ROW, "", "", "", "", "", *[s.subtype or "" for s in matrix.samples]])
    for compound in matrix.compounds:
        rows.append([
            str(compound.id),
            compound.name,
            _format_float(compound.molecular_weight),
            _format_float(compound.rt1),
            _format_float(compound.rt2),
            _format_float(compound.mz),
            *["x" if matrix.is_present(compound.id, s.name) else "" for s in matrix.samples],
        ])
    return rows


def to_csv(matrix: PresenceMatrix) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(_table_rows(matrix))
    return buffer.getvalue()


def _escape_latex(cell: str) -> str:
    for plain, escaped in (("&", "\\&"), ("_", "\\_"), ("%", "\\%"), ("#", "\\#")):
        cell = cell.replace(plain, escaped)
    return cell


def to_latex(matrix: PresenceMatrix) -> str:
    rows = _table_rows(matrix)
    spec = "ll" + "r" * 4 + "c" * len(matrix.samples)
    lines = [f"\\begin{{tabular}}{{{spec}}}", "\\toprule"]
    lines.append(" & ".join(_escape_latex(cell) for cell in rows[0]) + " \\\\")
    lines.append("\\midrule")
    for row in rows[1:]:
        lines.append(" & ".join(_escape_latex(cell) for cell in row) + " \\\\")
    lines.extend(["\\bottomrule", "\\end{tabular}", ""])
    return "\n".join(lines)


def to_dict(matrix: PresenceMatrix) -> Dict[str, object]:
    return {
        "compounds": [
            {
                "id": c.id,
                "name": c.name,
                "alt_names": list(c.alt_names),
                "molecular_weight": c.molecular_weight,
                "rt1": c.rt1,
                "rt2": c.rt2,
                "mz": c.mz,
            }
            for c in matrix.compounds
        ],
        "samples": [
            {"name": s.name, "class": s.sample_class.value, "subtype": s.subtype} for s in matrix.samples
        ],
        "presence": [[cid, name] for cid, name in sorted(matrix.presence)],
    }


def to_json(matrix: PresenceMatrix) -> str:
    """Canonical JSON: stable key order, presence pairs sorted, newline-terminated."""
    return json.dumps(to_dict(matrix), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> PresenceMatrix:
    try:
        data = json.loads(text)
        compounds = [
            Compound(
                id=int(c["id"]),
                name=c["name"],
                alt_names=tuple(c.get("alt_names") or ()),
                molecular_weight=c.get("molecular_weight"),
                rt1=c.get("rt1"),
                rt2=c.get("rt2"),
                mz=c.get("mz"),
            )
            for c in data["compounds"]
        ]
        samples = [
            Sample(name=s["name"], sample_class=SampleClass.parse(s["class"]), subtype=s.get("subtype"))
            for s in data["samples"]
        ]
        presence = {(int(cid), str(name)) for cid, name in data["presence"]}
        return PresenceMatrix.build(compounds, samples, presence)
    except (KeyError, TypeError, ValueError) as exc:
        raise TableParseError(f"Invalid matrix JSON: {exc}") from exc
