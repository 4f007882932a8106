import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from tgraph.errors import EmptyDocumentError
from tgraph.fixtures import deg_plus, get_fixture, sq2
from tgraph.homology import enumerate_sectors, homology_tiles
from tgraph.plotting import save_png
from tgraph.render import PALETTE, render_svg, sector_sheet
from tgraph.tiling import validate

SVG = "{http://www.w3.org/2000/svg}"


def paths(svg):
    return ET.fromstring(svg.encode()).iter(f"{SVG}path")


def test_sq2_render():
    svg = render_svg(sq2().to_json())
    ps = list(paths(svg))
    fills = [p.get("fill") for p in ps]
    assert fills == [PALETTE[0], PALETTE[1], "none"]
    assert ps[-1].get("stroke") == "#1f4fd8"
    assert svg == render_svg(sq2().to_json())


def test_degenerate_vertex_is_circled():
    t = deg_plus()
    doc = {**t.to_json(), **validate(t).to_json()}
    circles = list(ET.fromstring(render_svg(doc).encode()).iter(f"{SVG}circle"))
    assert len(circles) == 1 and circles[0].get("stroke") == "#d62728"
    # the "+" vertex is the centre of the 240-unit panel
    assert (circles[0].get("cx"), circles[0].get("cy")) == ("120", "120")


def test_homology_tiles_use_even_odd_and_hatching():
    h = homology_tiles(sq2(), [1.5])
    doc = h.to_json()
    doc["orientations"] = [1, -1]
    ps = list(paths(render_svg(doc)))
    assert all(p.get("fill-rule") == "evenodd" for p in ps if p.get("data-white") is not None)
    assert [p.get("data-white") for p in ps if p.get("fill") == "url(#hatch)"] == ["1"]


def test_empty_documents():
    with pytest.raises(EmptyDocumentError):
        render_svg({})
    with pytest.raises(EmptyDocumentError):
        render_svg({"panels": []})


def test_tri4_sheet_is_a_four_by_two_grid():
    t = get_fixture("TRI4")
    sweep = enumerate_sectors(t, t.tile_areas())
    sheet = sector_sheet(sweep)
    assert len(sheet["panels"]) == 8
    svg = render_svg(sheet)
    root = ET.fromstring(svg.encode())
    assert (root.get("width"), root.get("height")) == ("960", "480")
    assert len(root.findall(f"{SVG}g")) == 8
    assert svg == render_svg(sector_sheet(enumerate_sectors(t, t.tile_areas())))


def test_numbers_have_at_most_three_decimals():
    svg = render_svg(get_fixture("TRI4").to_json())
    assert not re.search(r"\d\.\d{4,}", svg)


def test_png(tmp_path):
    out = tmp_path / "pin5.png"
    save_png(get_fixture("PIN5").to_json(), out)
    from PIL import Image

    with Image.open(out) as im:
        arr = np.asarray(im.convert("RGB"))
    assert arr.shape[2] == 3 and arr.std() > 0
