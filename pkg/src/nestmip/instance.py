"""Problem instances: loading, piece parameters, bounds and piece ordering."""
from __future__ import annotations

import json
import logging
import os
import xml.parsers.expat
from dataclasses import dataclass, field

from .errors import FormatError, InvalidGeometry, InvalidInstance
from .geometry import ConvexPart, Polygon, convex_decompose, make_polygon

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PieceType:
    type_id: int
    name: str
    polygon: Polygon  # original coordinates, counter-clockwise
    demand: int
    area: float
    ref_point: tuple
    l_min: float
    l_max: float
    h_min: float
    h_max: float
    convex_parts: tuple  # ConvexPart polygons relative to ref_point

    @property
    def length(self) -> float:
        return self.l_min + self.l_max

    @property
    def height(self) -> float:
        return self.h_min + self.h_max


@dataclass(frozen=True)
class Piece:
    piece_index: int  # 1-based, after sorting by non-increasing area
    type_id: int


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    H: float
    piece_types: tuple
    pieces: tuple
    L_lb: float
    L_ub: float

    @property
    def N(self) -> int:
        return len(self.pieces)

    def piece_type(self, i: int) -> PieceType:
        """Type record of piece ``i`` (1-based)."""
        return self.piece_types[self.pieces[i - 1].type_id]

    @property
    def total_area(self) -> float:
        return sum(t.demand * t.area for t in self.piece_types)


def make_piece_type(type_id, name, vertices, demand) -> PieceType:
    try:
        poly = make_polygon(vertices)
    except InvalidGeometry as exc:
        raise InvalidGeometry(f"piece {name!r}: {exc}") from None
    try:
        parts = convex_decompose(poly)
    except InvalidGeometry as exc:
        raise InvalidGeometry(f"piece {name!r}: {exc}") from None
    rx, ry = parts[0].polygon.vertices[0]
    rel = tuple(
        ConvexPart(Polygon(tuple((x - rx, y - ry) for x, y in p.polygon.vertices)), p.part_index)
        for p in parts
    )
    x0, y0, x1, y1 = poly.bbox()
    if int(demand) != demand or demand < 1:
        raise InvalidInstance(f"piece {name!r}: demand must be a positive integer")
    return PieceType(
        type_id=type_id,
        name=str(name),
        polygon=poly,
        demand=int(demand),
        area=poly.area,
        ref_point=(rx, ry),
        l_min=rx - x0,
        l_max=x1 - rx,
        h_min=ry - y0,
        h_max=y1 - ry,
        convex_parts=rel,
    )


def compute_bounds(instance_or_types, H=None):
    """``(L_lb, L_ub)`` from the piece lengths and areas."""
    if isinstance(instance_or_types, ProblemInstance):
        types, H = instance_or_types.piece_types, instance_or_types.H
    else:
        types = instance_or_types
    if H is None or H <= 0:
        raise InvalidInstance(f"board height must be positive, got {H}")
    L_ub = sum(t.demand * t.length for t in types)
    L_lb = max(max(t.length for t in types), sum(t.demand * t.area for t in types) / H)
    return L_lb, L_ub


def build_instance(name, H, raw_pieces) -> ProblemInstance:
    """``raw_pieces``: iterable of ``(name, vertices, demand)`` in input order."""
    raw = list(raw_pieces)
    if not raw:
        raise InvalidInstance("instance has no pieces")
    H = float(H)
    if H <= 0:
        raise InvalidInstance(f"board height must be positive, got {H}")
    tmp = [make_piece_type(n, nm, v, d) for n, (nm, v, d) in enumerate(raw)]
    # type ids follow non-increasing area, ties by input order
    order = sorted(range(len(tmp)), key=lambda n: -tmp[n].area)
    types = []
    for new_id, old in enumerate(order):
        t = tmp[old]
        types.append(PieceType(new_id, *[getattr(t, f) for f in _TYPE_FIELDS[1:]]))
    pieces = []
    for t in types:
        for _ in range(t.demand):
            pieces.append(Piece(len(pieces) + 1, t.type_id))
    L_lb, L_ub = compute_bounds(types, H)
    return ProblemInstance(str(name), H, tuple(types), tuple(pieces), L_lb, L_ub)


_TYPE_FIELDS = [f for f in PieceType.__dataclass_fields__]


# ---------------------------------------------------------------------------
# canonical JSON


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "name": instance.name,
        "height": instance.H,
        "pieces": [
            {"id": t.name, "quantity": t.demand, "vertices": [list(p) for p in t.polygon.vertices]}
            for t in instance.piece_types
        ],
    }


def write_json(instance: ProblemInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=1)
        fh.write("\n")


def _from_dict(data, path=None) -> ProblemInstance:
    try:
        name = data.get("name") or os.path.splitext(os.path.basename(str(path or "instance")))[0]
        H = float(data["height"])
        pieces = [(p.get("id", f"piece{n}"), p["vertices"], p.get("quantity", 1))
                  for n, p in enumerate(data["pieces"])]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"bad instance structure: {exc}", path=path) from None
    return build_instance(name, H, pieces)


def load_json(path) -> ProblemInstance:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, line=exc.lineno, path=path) from None
    return _from_dict(data, path)


# ---------------------------------------------------------------------------
# ESICUP XML subset


@dataclass
class _Node:
    tag: str
    attrs: dict
    line: int
    children: list = field(default_factory=list)
    text: str = ""

    def find(self, tag):
        return next((c for c in self.children if c.tag == tag), None)

    def findall(self, tag):
        return [c for c in self.children if c.tag == tag]


def _parse_xml(text, path):
    parser = xml.parsers.expat.ParserCreate()
    root = _Node("#root", {}, 0)
    stack = [root]

    def start(tag, attrs):
        tag = tag.rsplit(":", 1)[-1].rsplit("}", 1)[-1]
        node = _Node(tag, dict(attrs), parser.CurrentLineNumber)
        stack[-1].children.append(node)
        stack.append(node)

    def end(tag):
        stack.pop()

    def chars(data):
        stack[-1].text += data

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(text, True)
    except xml.parsers.expat.ExpatError as exc:
        raise FormatError(xml.parsers.expat.ErrorString(exc.code), line=exc.lineno, path=path) from None
    if not root.children:
        raise FormatError("empty document", path=path)
    return root.children[0]


def _num(node, key, path):
    try:
        return float(node.attrs[key])
    except KeyError:
        raise FormatError(f"<{node.tag}> lacks attribute {key!r}", line=node.line, path=path) from None
    except ValueError:
        raise FormatError(f"<{node.tag}> attribute {key!r} is not a number", line=node.line, path=path) from None


def _polygon_vertices(node, path):
    lines = node.find("lines")
    if lines is not None:
        segs = sorted(lines.findall("segment"), key=lambda s: int(s.attrs.get("n", 0)))
        if not segs:
            raise FormatError("polygon without segments", line=node.line, path=path)
        return [(_num(s, "x0", path), _num(s, "y0", path)) for s in segs]
    pts = node.findall("point") or node.findall("vertex")
    if pts:
        return [(_num(p, "x", path), _num(p, "y", path)) for p in pts]
    raise FormatError("polygon without <lines> or <point> children", line=node.line, path=path)


_KNOWN = {"name", "author", "date", "description", "verticesOrientation", "coordinatesOrigin",
          "problem", "polygons", "solutions"}


def load_xml(path) -> ProblemInstance:
    with open(path, "rb") as fh:
        text = fh.read()
    root = _parse_xml(text, path)
    for child in root.children:
        if child.tag not in _KNOWN:
            log.warning("%s:%d: ignoring unrecognised element <%s>", path, child.line, child.tag)
    name_node = root.find("name")
    name = name_node.text.strip() if name_node is not None and name_node.text.strip() else \
        os.path.splitext(os.path.basename(str(path)))[0]
    polys = {}
    pnode = root.find("polygons")
    if pnode is None:
        raise FormatError("missing <polygons>", line=root.line, path=path)
    for poly in pnode.findall("polygon"):
        pid = poly.attrs.get("id")
        if pid is None:
            raise FormatError("<polygon> without id", line=poly.line, path=path)
        polys[pid] = (poly, _polygon_vertices(poly, path))
    problem = root.find("problem")
    if problem is None:
        raise FormatError("missing <problem>", line=root.line, path=path)

    def components(piece):
        comps = piece.findall("component")
        if len(comps) != 1:
            raise FormatError("only single-component pieces are supported", line=piece.line, path=path)
        c = comps[0]
        pid = c.attrs.get("idPolygon")
        if pid not in polys:
            raise FormatError(f"unknown polygon {pid!r}", line=c.line, path=path)
        dx = float(c.attrs.get("xOffset", 0.0))
        dy = float(c.attrs.get("yOffset", 0.0))
        return [(x + dx, y + dy) for x, y in polys[pid][1]]

    boards = problem.find("boards")
    if boards is None or not boards.findall("piece"):
        raise FormatError("missing <boards>", line=problem.line, path=path)
    board = boards.findall("piece")[0]
    bverts = components(board)
    ys = [p[1] for p in bverts]
    H = max(ys) - min(ys)
    lot = problem.find("lot")
    if lot is None:
        raise FormatError("missing <lot>", line=problem.line, path=path)
    raw = []
    for piece in lot.findall("piece"):
        for orient in piece.findall("orientation"):
            angles = [float(e.attrs.get("angle", 0)) for e in orient.findall("enumeration")]
            if any(a % 360 for a in angles):
                log.warning("%s:%d: rotations are not supported; using angle 0 only", path, orient.line)
        try:
            qty = int(piece.attrs.get("quantity", 1))
        except ValueError:
            raise FormatError("quantity is not an integer", line=piece.line, path=path) from None
        raw.append((piece.attrs.get("id", f"piece{len(raw)}"), components(piece), qty))
    return build_instance(name, H, raw)


def load_instance(path, format=None) -> ProblemInstance:
    """Load an instance; ``format`` is ``"xml"`` or ``"json"`` (default: by extension)."""
    if format is None:
        format = "json" if str(path).lower().endswith(".json") else "xml"
    if format == "json":
        return load_json(path)
    if format == "xml":
        return load_xml(path)
    raise ValueError(f"unknown instance format {format!r}")


def find_instances(paths):
    """Expand files and directory trees into a sorted list of instance files."""
    out = []
    for p in paths:
        if os.path.isdir(p):
            for root, _, files in os.walk(p):
                out.extend(os.path.join(root, f) for f in files if f.lower().endswith((".xml", ".json")))
        else:
            out.append(p)
    return sorted(out)
