"""Point-cloud ingest: PCD/CSV parsing, serialization and dataset indexing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateCloud, EmptyDataset, IoError, ParseError

DEFAULT_GRAVITY = (0.0, 0.0, 1.0)
DEFAULT_COLOR = (128, 128, 128)

# Covariance eigenvalues below this fraction of the trace count as zero
# when deciding whether a cloud is degenerate.
RANK_TOLERANCE = 1e-12

MIN_POINTS = 4

SIDECAR_NAME = "meta.txt"
_GRAVITY_LINE = re.compile(
    r"^\s*gravity\s*=\s*\[\s*([^,\]]+)\s*,\s*([^,\]]+)\s*,\s*([^,\]]+)\s*\]\s*$"
)


@dataclass
class ObjectCloud:
    """A segmented, colored object cloud.

    Coordinates are float64 meters, colors uint8 per channel, gravity a unit
    vector pointing away from the support plane.
    """

    xyz: np.ndarray
    rgb: np.ndarray
    gravity: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_GRAVITY))
    source_id: str = ""

    def __post_init__(self):
        self.xyz = np.ascontiguousarray(self.xyz, dtype=np.float64)
        if self.xyz.ndim != 2 or self.xyz.shape[1] != 3:
            raise ValueError(f"xyz must be (n, 3), got {self.xyz.shape}")
        if not np.isfinite(self.xyz).all():
            raise ValueError("coordinates must be finite")
        self.rgb = np.ascontiguousarray(self.rgb)
        if self.rgb.shape != self.xyz.shape:
            raise ValueError(f"rgb must match xyz shape, got {self.rgb.shape}")
        if self.rgb.dtype != np.uint8:
            as_float = np.asarray(self.rgb, dtype=np.float64)
            if ((as_float < 0) | (as_float > 255)).any():
                raise ValueError("color channels must lie in [0, 255]")
            self.rgb = np.ascontiguousarray(np.rint(as_float), dtype=np.uint8)
        self.gravity = np.asarray(self.gravity, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(self.gravity))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"gravity must have unit norm, got {norm}")

    def __len__(self) -> int:
        return self.xyz.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ObjectCloud):
            return NotImplemented
        return (
            np.array_equal(self.xyz, other.xyz)
            and np.array_equal(self.rgb, other.rgb)
            and np.array_equal(self.gravity, other.gravity)
            and self.source_id == other.source_id
        )

    def validate(self) -> "ObjectCloud":
        """Raise :class:`DegenerateCloud` unless the cloud supports an LRF.

        Requires at least four points and a point covariance of rank >= 2
        (eigenvalue tolerance ``RANK_TOLERANCE`` relative to the trace).
        """
        n = len(self)
        if n < MIN_POINTS:
            raise DegenerateCloud(f"need at least {MIN_POINTS} points, got {n}")
        centered = self.xyz - self.xyz.mean(axis=0)
        sigma = centered.T @ centered / n
        trace = float(np.trace(sigma))
        if trace <= 0.0:
            raise DegenerateCloud("all points coincide")
        eigvals = np.linalg.eigvalsh(sigma)
        rank = int((eigvals > RANK_TOLERANCE * trace).sum())
        if rank < 2:
            raise DegenerateCloud(f"covariance rank {rank} < 2 (collinear points)")
        return self


@dataclass(frozen=True)
class DatasetView:
    """One labeled view of one object instance on disk."""

    category_label: str
    instance_id: str
    view_id: str
    path: Path

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.category_label, self.instance_id, self.view_id)


@dataclass
class DatasetIndex:
    views: list[DatasetView]
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.views)

    def categories(self) -> list[str]:
        seen: dict[str, None] = {}
        for view in self.views:
            seen.setdefault(view.category_label, None)
        return sorted(seen)


def _packed_rgb_from_float(values: np.ndarray) -> np.ndarray:
    bits = np.ascontiguousarray(values, dtype="<f4").view(np.uint32)
    return _unpack_rgb(bits)


def _unpack_rgb(bits: np.ndarray) -> np.ndarray:
    r = (bits >> 16) & 0xFF
    g = (bits >> 8) & 0xFF
    b = bits & 0xFF
    return np.stack([r, g, b], axis=1).astype(np.uint8)


def _pack_rgb(rgb: np.ndarray) -> np.ndarray:
    r, g, b = (rgb[:, i].astype(np.uint32) for i in range(3))
    return (r << 16) | (g << 8) | b


_PCD_TYPE_MAP = {("F", 4): "<f4", ("F", 8): "<f8", ("U", 4): "<u4", ("U", 1): "<u1",
                 ("U", 2): "<u2", ("I", 1): "<i1", ("I", 2): "<i2", ("I", 4): "<i4"}


def parse_pcd(data: bytes, *, validate: bool = True) -> ObjectCloud:
    """Parse a PCD v0.7 byte stream (ASCII or little-endian binary).

    Requires fields x, y, z; an optional ``rgb`` field may be packed either
    as a float (PCL convention) or as an unsigned int. Missing color falls
    back to mid-gray. Comment lines ``# gravity gx gy gz`` and
    ``# source_id <id>`` written by :func:`serialize_pcd` are honored.
    """
    header: dict[str, list[str]] = {}
    gravity = np.array(DEFAULT_GRAVITY)
    source_id = ""
    offset = 0
    line_no = 0
    data_mode = None
    while True:
        end = data.find(b"\n", offset)
        if end < 0:
            raise ParseError("header truncated before DATA line", line_no)
        raw = data[offset:end]
        offset = end + 1
        line_no += 1
        line = raw.decode("latin-1").strip()
        if not line:
            continue
        if line.startswith("#"):
            comment = line[1:].strip()
            if comment.startswith("gravity "):
                parts = comment.split()
                if len(parts) == 4:
                    try:
                        gravity = np.array([float(p) for p in parts[1:]])
                    except ValueError:
                        raise ParseError("malformed gravity comment", line_no)
            elif comment.startswith("source_id "):
                source_id = comment[len("source_id "):].strip()
            continue
        parts = line.split()
        key = parts[0].upper()
        header[key] = parts[1:]
        if key == "DATA":
            if not parts[1:]:
                raise ParseError("DATA line missing mode", line_no)
            data_mode = parts[1].lower()
            break

    for required in ("FIELDS", "SIZE", "TYPE"):
        if required not in header:
            raise ParseError(f"missing {required} in header")
    fields = header["FIELDS"]
    try:
        sizes = [int(s) for s in header["SIZE"]]
        types = [t.upper() for t in header["TYPE"]]
        counts = [int(c) for c in header.get("COUNT", ["1"] * len(fields))]
    except ValueError as exc:
        raise ParseError(f"malformed header field: {exc}")
    if not (len(fields) == len(sizes) == len(types) == len(counts)):
        raise ParseError("FIELDS/SIZE/TYPE/COUNT lengths disagree")
    if "POINTS" in header:
        try:
            n_points = int(header["POINTS"][0])
        except (ValueError, IndexError):
            raise ParseError("malformed POINTS")
    elif "WIDTH" in header and "HEIGHT" in header:
        n_points = int(header["WIDTH"][0]) * int(header["HEIGHT"][0])
    else:
        raise ParseError("missing POINTS (or WIDTH/HEIGHT)")

    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise ParseError(f"missing required field {axis!r}")
    field_index = {name: i for i, name in enumerate(fields)}

    if data_mode == "ascii":
        columns = _parse_ascii_rows(data[offset:], fields, counts, n_points, line_no)
    elif data_mode == "binary":
        columns = _parse_binary_rows(data[offset:], fields, sizes, types, counts, n_points)
    else:
        raise ParseError(f"unsupported DATA mode {data_mode!r}", line_no)

    xyz = np.stack([columns["x"], columns["y"], columns["z"]], axis=1).astype(np.float64)
    if not np.isfinite(xyz).all():
        raise ParseError("non-finite coordinates in data section")
    if "rgb" in field_index:
        raw = columns["rgb"]
        i = field_index["rgb"]
        if types[i] == "F":
            rgb = _packed_rgb_from_float(raw.astype(np.float32))
        else:
            rgb = _unpack_rgb(raw.astype(np.uint32))
    else:
        rgb = np.full((n_points, 3), DEFAULT_COLOR, dtype=np.uint8)

    cloud = ObjectCloud(xyz=xyz, rgb=rgb, gravity=gravity, source_id=source_id)
    if validate:
        cloud.validate()
    return cloud


def _parse_ascii_rows(body: bytes, fields, counts, n_points, header_lines):
    # Column start offset of each field within a whitespace-split row.
    starts = np.concatenate([[0], np.cumsum(counts)])
    tokens_per_row = int(starts[-1])
    rows = []
    line_no = header_lines
    for raw in body.splitlines():
        line_no += 1
        line = raw.decode("latin-1").strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != tokens_per_row:
            raise ParseError(
                f"expected {tokens_per_row} values per row, got {len(parts)}", line_no
            )
        rows.append(parts)
    if len(rows) != n_points:
        raise ParseError(f"header declares {n_points} points but {len(rows)} data rows")
    columns = {}
    for i, name in enumerate(fields):
        if counts[i] != 1:
            continue
        col = starts[i]
        try:
            columns[name] = np.array([float(row[col]) for row in rows])
        except ValueError as exc:
            raise ParseError(f"bad value in column {name!r}: {exc}")
    return columns


def _parse_binary_rows(body: bytes, fields, sizes, types, counts, n_points):
    dtype_fields = []
    for name, size, typ, count in zip(fields, sizes, types, counts):
        key = (typ, size)
        if key not in _PCD_TYPE_MAP:
            raise ParseError(f"unsupported field type {typ}{size} for {name!r}")
        shape = (count,) if count > 1 else ()
        dtype_fields.append((name, _PCD_TYPE_MAP[key], shape))
    dtype = np.dtype(dtype_fields)
    expected = dtype.itemsize * n_points
    if len(body) < expected:
        raise ParseError(
            f"binary payload too short: need {expected} bytes, have {len(body)}"
        )
    table = np.frombuffer(body[:expected], dtype=dtype)
    return {name: np.ascontiguousarray(table[name]) for name, _, shape in dtype_fields
            if shape == ()}


def serialize_pcd(cloud: ObjectCloud, data_format: str = "binary") -> bytes:
    """Serialize a cloud as PCD v0.7; exact inverse of :func:`parse_pcd`.

    Coordinates are written as float64 and color as a packed uint32 so the
    round trip is lossless in both ASCII and binary modes.
    """
    if data_format not in ("ascii", "binary"):
        raise ValueError(f"data_format must be 'ascii' or 'binary', got {data_format!r}")
    n = len(cloud)
    lines = ["# .PCD v0.7 - Point Cloud Data file format"]
    gx, gy, gz = (format(v, ".17g") for v in cloud.gravity)
    lines.append(f"# gravity {gx} {gy} {gz}")
    if cloud.source_id and "\n" not in cloud.source_id:
        lines.append(f"# source_id {cloud.source_id}")
    lines += [
        "VERSION 0.7",
        "FIELDS x y z rgb",
        "SIZE 8 8 8 4",
        "TYPE F F F U",
        "COUNT 1 1 1 1",
        f"WIDTH {n}",
        "HEIGHT 1",
        "VIEWPOINT 0 0 0 1 0 0 0",
        f"POINTS {n}",
        f"DATA {data_format}",
    ]
    head = ("\n".join(lines) + "\n").encode("ascii")
    packed = _pack_rgb(cloud.rgb)
    if data_format == "ascii":
        body_lines = []
        for (x, y, z), c in zip(cloud.xyz, packed):
            body_lines.append(
                f"{format(x, '.17g')} {format(y, '.17g')} {format(z, '.17g')} {int(c)}"
            )
        return head + ("\n".join(body_lines) + ("\n" if body_lines else "")).encode("ascii")
    table = np.empty(n, dtype=[("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("rgb", "<u4")])
    table["x"], table["y"], table["z"] = cloud.xyz[:, 0], cloud.xyz[:, 1], cloud.xyz[:, 2]
    table["rgb"] = packed
    return head + table.tobytes()


def parse_csv(data: bytes, *, validate: bool = True) -> ObjectCloud:
    """Parse the fallback CSV format: one ``x,y,z[,r,g,b]`` row per point."""
    xyz_rows, rgb_rows = [], []
    for line_no, raw in enumerate(data.splitlines(), start=1):
        line = raw.decode("latin-1").strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (3, 6):
            raise ParseError(f"expected 3 or 6 columns, got {len(parts)}", line_no)
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line_no)
        xyz_rows.append(values[:3])
        rgb_rows.append(values[3:] if len(values) == 6 else list(DEFAULT_COLOR))
    xyz = np.array(xyz_rows, dtype=np.float64).reshape(-1, 3)
    rgb = np.array(rgb_rows, dtype=np.float64).reshape(-1, 3)
    cloud = ObjectCloud(xyz=xyz, rgb=rgb)
    if validate:
        cloud.validate()
    return cloud


def serialize_csv(cloud: ObjectCloud) -> bytes:
    rows = [
        f"{format(x, '.17g')},{format(y, '.17g')},{format(z, '.17g')},{r},{g},{b}"
        for (x, y, z), (r, g, b) in zip(cloud.xyz, cloud.rgb)
    ]
    return ("\n".join(rows) + ("\n" if rows else "")).encode("ascii")


def read_sidecar_gravity(directory: Path) -> np.ndarray | None:
    """Read ``gravity = [x, y, z]`` from the directory's sidecar, if any."""
    sidecar = Path(directory) / SIDECAR_NAME
    if not sidecar.is_file():
        return None
    for line in sidecar.read_text().splitlines():
        match = _GRAVITY_LINE.match(line)
        if match:
            vec = np.array([float(g) for g in match.groups()])
            norm = float(np.linalg.norm(vec))
            if norm == 0.0 or not np.isfinite(norm):
                raise ParseError(f"gravity in {sidecar} must be a nonzero vector")
            return vec / norm
    return None


def load_cloud(path, gravity=None, *, validate: bool = True) -> ObjectCloud:
    """Load one cloud file (.pcd or .csv), applying sidecar/explicit gravity.

    Precedence: explicit argument > sidecar metadata > value embedded in the
    file > default (0, 0, 1).
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}")
    if path.suffix.lower() == ".csv":
        cloud = parse_csv(data, validate=False)
    else:
        cloud = parse_pcd(data, validate=False)
    if not cloud.source_id:
        cloud.source_id = path.stem
    sidecar = read_sidecar_gravity(path.parent)
    if sidecar is not None:
        cloud.gravity = sidecar
    if gravity is not None:
        vec = np.asarray(gravity, dtype=np.float64).reshape(3)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("gravity override must be a nonzero vector")
        cloud.gravity = vec / norm
    if validate:
        cloud.validate()
    return cloud


CLOUD_SUFFIXES = (".pcd", ".csv")


def load_dataset_index(root) -> DatasetIndex:
    """Index ``<root>/<category>/<instance_dir>/<view files>`` deterministically.

    The result depends only on directory content: entries are sorted by
    (category, instance, view). Categories without readable views are
    dropped with a warning record.
    """
    root = Path(root)
    if not root.is_dir():
        raise IoError(f"dataset root {root} is not a readable directory")
    views: list[DatasetView] = []
    warnings: list[str] = []
    try:
        category_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    except OSError as exc:
        raise IoError(f"cannot list dataset root {root}: {exc}")
    for category_dir in category_dirs:
        category = category_dir.name
        category_views: list[DatasetView] = []
        try:
            instance_dirs = sorted(p for p in category_dir.iterdir() if p.is_dir())
            for instance_dir in instance_dirs:
                for cloud_file in sorted(p for p in instance_dir.iterdir()
                                         if p.is_file()
                                         and p.suffix.lower() in CLOUD_SUFFIXES):
                    category_views.append(DatasetView(
                        category_label=category,
                        instance_id=instance_dir.name,
                        view_id=cloud_file.stem,
                        path=cloud_file,
                    ))
        except OSError as exc:
            warnings.append(f"category {category!r} unreadable ({exc}); skipped")
            continue
        if category_views:
            views.extend(category_views)
        else:
            warnings.append(f"category {category!r} has no readable views; skipped")
    if not views:
        raise EmptyDataset(f"no views found under {root}")
    return DatasetIndex(views=views, warnings=warnings)
