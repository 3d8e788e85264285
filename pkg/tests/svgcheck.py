"""Minimal structural SVG 1.1 validator used by the tests."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

NS = "{http://www.w3.org/2000/svg}"
ALLOWED = {"svg", "title", "rect", "g", "line", "polyline", "path", "circle", "text"}
NUMERIC = {
    "circle": ("cx", "cy", "r"),
    "line": ("x1", "y1", "x2", "y2"),
    "rect": ("x", "y", "width", "height"),
    "text": ("x", "y"),
}
NUMBER = re.compile(r"^-?\d+(\.\d+)?$")
PATH = re.compile(r"^([ML] -?\d+(\.\d+)? -?\d+(\.\d+)? ?)+Z?$")


def validate_svg(text: str) -> ET.Element:
    root = ET.fromstring(text.encode("utf-8"))
    assert root.tag == NS + "svg", root.tag
    assert root.get("version") == "1.1"
    for attr in ("width", "height"):
        assert NUMBER.match(root.get(attr, "")) and float(root.get(attr)) > 0
    assert root.find(NS + "title") is not None
    for el in root.iter():
        tag = el.tag.removeprefix(NS)
        assert tag in ALLOWED, f"unexpected element {tag}"
        for attr in NUMERIC.get(tag, ()):
            assert NUMBER.match(el.get(attr, "")), f"{tag}.{attr}={el.get(attr)!r}"
        if tag == "circle":
            assert float(el.get("r")) > 0
        if tag == "path":
            assert PATH.match(el.get("d", "").strip()), el.get("d")
        if tag == "polyline":
            for pair in el.get("points", "").split():
                x, y = pair.split(",")
                assert NUMBER.match(x) and NUMBER.match(y)
    return root


def find_all(root: ET.Element, tag: str, cls: str | None = None) -> list[ET.Element]:
    found = root.iter(NS + tag)
    return [e for e in found if cls is None or e.get("class") == cls]
