"""YOLO-txt and Pascal-VOC-XML annotation parsing, emission, and conversion.

YOLO format: one "class cx cy w h" line per box, normalized coordinates,
serialized with 6 decimal places. VOC format: per-image XML with pixel
corner boxes and class names; corners are emitted as integers, so a
VOC round-trip is exact only within one pixel.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .geometry import BBox, GeometryError, PixelRect, from_pixel, to_pixel

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")
DIMS_SIDECAR = "dims.tsv"


class AnnotationError(Exception):
    """Base class for annotation failures."""


class ParseError(AnnotationError):
    """Malformed annotation content; carries location context in the message."""


class ValidationError(AnnotationError):
    """Well-formed content with out-of-contract values."""


@dataclass(frozen=True)
class ClassMap:
    """Ordered class names; a box's class_id indexes into this list."""

    names: tuple[str, ...] = ("wound",)

    def __post_init__(self) -> None:
        if not self.names:
            raise ValidationError("class map must not be empty")
        if len(set(self.names)) != len(self.names) or any(not n for n in self.names):
            raise ValidationError(f"class names must be unique and non-empty: {self.names}")

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"unknown class name {name!r}; known: {list(self.names)}") from None

    def name_of(self, class_id: int) -> str:
        if not 0 <= class_id < len(self.names):
            raise ValidationError(f"class id {class_id} out of range for {len(self.names)} classes")
        return self.names[class_id]

    def __len__(self) -> int:
        return len(self.names)

    @classmethod
    def from_file(cls, path: str | Path) -> "ClassMap":
        lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines()]
        return cls(tuple(ln for ln in lines if ln))


@dataclass(frozen=True)
class ImageAnnotation:
    """One image's identity, pixel dimensions, and ground-truth boxes."""

    image_id: str
    img_w: int
    img_h: int
    boxes: tuple[tuple[int, BBox], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.img_w < 1 or self.img_h < 1:
            raise ValidationError(f"{self.image_id}: degenerate image dimensions {self.img_w}x{self.img_h}")
        for class_id, _ in self.boxes:
            if class_id < 0:
                raise ValidationError(f"{self.image_id}: negative class id {class_id}")


def parse_yolo_txt(text: str, img_w: int, img_h: int, image_id: str = "") -> ImageAnnotation:
    """Parse YOLO-format annotation text. Empty text means a negative image."""
    boxes: list[tuple[int, BBox]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise ParseError(f"line {lineno}: expected 5 fields, got {len(fields)}: {line!r}")
        try:
            class_id = int(fields[0])
            cx, cy, w, h = (float(v) for v in fields[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if class_id < 0:
            raise ValidationError(f"line {lineno}: negative class id {class_id}")
        if not all(0.0 <= v <= 1.0 for v in (cx, cy, w, h)):
            raise ValidationError(f"line {lineno}: coordinate outside [0,1]: {line!r}")
        try:
            boxes.append((class_id, BBox(cx, cy, w, h)))
        except GeometryError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    return ImageAnnotation(image_id, img_w, img_h, tuple(boxes))


def emit_yolo_txt(a: ImageAnnotation) -> str:
    """Serialize to YOLO text, coordinates at 6 decimal places, LF line ends."""
    return "".join(
        f"{class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}\n" for class_id, b in a.boxes
    )


def parse_voc_xml(xml: str, classes: ClassMap | None = None) -> ImageAnnotation:
    """Parse a Pascal VOC annotation document.

    Unknown extra elements are ignored. Class names are resolved through
    `classes` (default: the single-class wound map).
    """
    classes = classes or ClassMap()
    try:
        root = ET.fromstring(xml)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc

    img_w = int(_text_of(root, "size/width"))
    img_h = int(_text_of(root, "size/height"))
    if img_w < 1 or img_h < 1:
        raise ValidationError(f"degenerate size {img_w}x{img_h}")
    image_id = Path(root.findtext("filename", default="")).stem

    boxes: list[tuple[int, BBox]] = []
    for obj in root.iter("object"):
        name = _text_of(obj, "name")
        class_id = classes.id_of(name)
        corners = {tag: float(_text_of(obj, f"bndbox/{tag}")) for tag in ("xmin", "ymin", "xmax", "ymax")}
        if corners["xmin"] >= corners["xmax"] or corners["ymin"] >= corners["ymax"]:
            raise ValidationError(f"degenerate bndbox for object {name!r}: {corners}")
        try:
            rect = PixelRect(**corners)
            boxes.append((class_id, from_pixel(rect, img_w, img_h)))
        except GeometryError as exc:
            raise ValidationError(str(exc)) from exc
    return ImageAnnotation(image_id, img_w, img_h, tuple(boxes))


def emit_voc_xml(a: ImageAnnotation, classes: ClassMap | None = None) -> str:
    """Serialize to Pascal VOC XML, corners rounded to the nearest pixel."""
    classes = classes or ClassMap()
    root = ET.Element("annotation")
    ET.SubElement(root, "filename").text = f"{a.image_id}.png"
    size = ET.SubElement(root, "size")
    ET.SubElement(size, "width").text = str(a.img_w)
    ET.SubElement(size, "height").text = str(a.img_h)
    ET.SubElement(size, "depth").text = "3"
    for class_id, b in a.boxes:
        rect = to_pixel(b, a.img_w, a.img_h)
        obj = ET.SubElement(root, "object")
        ET.SubElement(obj, "name").text = classes.name_of(class_id)
        bnd = ET.SubElement(obj, "bndbox")
        ET.SubElement(bnd, "xmin").text = str(round(rect.xmin))
        ET.SubElement(bnd, "ymin").text = str(round(rect.ymin))
        ET.SubElement(bnd, "xmax").text = str(round(rect.xmax))
        ET.SubElement(bnd, "ymax").text = str(round(rect.ymax))
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def load_dataset(
    annotation_dir: str | Path,
    image_dir: str | Path,
    format: str = "yolo",
    classes: ClassMap | None = None,
) -> list[ImageAnnotation]:
    """Load a directory of annotations, ordered lexicographically by image id.

    Images without an annotation file become zero-box (negative) entries.
    YOLO parsing needs pixel dimensions, recovered from the image header or
    from a dims.tsv sidecar ("image_id<TAB>width<TAB>height" lines) in the
    image directory.
    """
    annotation_dir = Path(annotation_dir)
    image_dir = Path(image_dir)
    if not annotation_dir.is_dir():
        raise AnnotationError(f"annotation directory not found: {annotation_dir}")
    if format not in ("yolo", "voc"):
        raise ValidationError(f"unknown annotation format {format!r}")

    dims = _load_dims(image_dir)
    ext = ".txt" if format == "yolo" else ".xml"
    entries: dict[str, ImageAnnotation] = {}

    for path in sorted(annotation_dir.glob(f"*{ext}")):
        stem = path.stem
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise AnnotationError(f"unreadable annotation file {path}: {exc}") from exc
        try:
            if format == "yolo":
                img_w, img_h = _image_dims(stem, image_dir, dims)
                entries[stem] = parse_yolo_txt(text, img_w, img_h, image_id=stem)
            else:
                ann = parse_voc_xml(text, classes)
                entries[stem] = ImageAnnotation(stem, ann.img_w, ann.img_h, ann.boxes)
        except AnnotationError as exc:
            raise type(exc)(f"{path.name}: {exc}") from exc

    # Unannotated images are negative examples, not errors.
    if image_dir.is_dir():
        for path in sorted(image_dir.iterdir()):
            if path.suffix.lower() in IMAGE_EXTENSIONS and path.stem not in entries:
                img_w, img_h = _image_dims(path.stem, image_dir, dims)
                entries[path.stem] = ImageAnnotation(path.stem, img_w, img_h)
        for stem in dims:
            if stem not in entries:
                entries[stem] = ImageAnnotation(stem, *dims[stem])

    return [entries[k] for k in sorted(entries)]


def _image_dims(stem: str, image_dir: Path, dims: dict[str, tuple[int, int]]) -> tuple[int, int]:
    if stem in dims:
        return dims[stem]
    for ext in IMAGE_EXTENSIONS:
        path = image_dir / f"{stem}{ext}"
        if path.exists():
            try:
                with Image.open(path) as im:
                    return im.width, im.height
            except (OSError, UnidentifiedImageError) as exc:
                raise AnnotationError(f"cannot read image header {path}: {exc}") from exc
    raise AnnotationError(f"no image or dims.tsv entry for annotation stem {stem!r} in {image_dir}")


def _load_dims(image_dir: Path) -> dict[str, tuple[int, int]]:
    sidecar = image_dir / DIMS_SIDECAR
    if not sidecar.exists():
        return {}
    dims: dict[str, tuple[int, int]] = {}
    for lineno, line in enumerate(sidecar.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"{sidecar}: line {lineno}: expected 3 tab-separated fields")
        try:
            dims[parts[0]] = (int(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ParseError(f"{sidecar}: line {lineno}: {exc}") from exc
    return dims


def _text_of(elem: ET.Element, path: str) -> str:
    found = elem.findtext(path)
    if found is None:
        raise ParseError(f"missing element <{path}>")
    return found
