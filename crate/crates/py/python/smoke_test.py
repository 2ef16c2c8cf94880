"""Smoke test for the protosample_py extension.

Build and run from the repository root:

    cargo build --release -p protosample-py --features extension-module
    cp target/release/libprotosample_py.so crates/py/python/protosample_py.so
    python3 crates/py/python/smoke_test.py

(or `maturin develop` inside crates/py, then run the script).
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import protosample_py as ps

HERE = os.path.dirname(os.path.abspath(__file__))
CAPTIONS = os.path.join(HERE, "..", "..", "core", "tests", "fixtures", "captions.jsonl")


def check_vectors():
    assert ps.l2_normalize([3.0, 4.0]) == [0.6000000238418579, 0.800000011920929]
    assert abs(ps.cosine_similarity([1.0, 1.0], [1.0, 0.0]) - 1 / math.sqrt(2)) < 1e-6
    db = ps.Container([[1.0, 0.0], [0.0, 1.0], [0.7071, 0.7071]])
    hits = ps.top_k_retrieval([1.0, 0.0], db, 2)
    assert [i for i, _ in hits] == [0, 2], hits
    try:
        ps.l2_normalize([0.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("zero vector accepted")


def check_container_round_trip(tmp):
    c = ps.Container([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    path = os.path.join(tmp, "c.emb")
    c.write(path)
    back = ps.Container.read(path)
    assert back.shape == (2, 3) and back.tolist() == c.tolist()


def check_keywords():
    breast = ps.KeywordQuery(
        [["breast"], ["tumor", "cancer", "carcinoma", "metastases", "metastasis", "metastatic"]],
        [["IHC", "immunohistochemical", "immunohistochemistry", "immunostain"],
         ["photomicrograph", "photomicrography"]],
    )
    assert breast.search(CAPTIONS) == ["c01", "c05", "c08"]
    mitotic = ps.KeywordQuery([["arrow", "arrowhead", "circle"], ["mitotic", "mitoses"]])
    assert mitotic.matches("Mitotic figures (arrows).")


def check_selection():
    values = [0.0] * 64
    for y in range(2, 5):
        for x in range(3, 6):
            values[y * 8 + x] = 1.0
    m = ps.SimilarityMap("s", 8, 8, values)
    (y0, x0, y1, x1, score), = m.standard_windows(3, 1)
    assert (y0, x0, y1, x1, score) == (2, 3, 5, 6, 9.0)
    assert ps.otsu_threshold([10 if i in (50, 200) else 0 for i in range(256)]) in range(51, 201)
    assignments, inertia = ps.kmeans([[0.0], [0.0], [5.0], [5.0]], 2, seed=3)
    assert inertia == 0.0 and assignments[0] == assignments[1] != assignments[2]
    assert abs(ps.region_area_mm2(8192, 0.25) - 4.19) < 0.005


def check_fixture_sweep():
    csv = ps.fixture_sweep(7, 4, ["random", "proto-standard"], [3], [2048], [0, 1, 2, 3, 4])
    lines = csv.strip().split("\n")
    assert lines[0] == "strategy,n,l_px,seed,annotated_tissue_pct,class_area_pct,point_capture_ratio"
    assert len(lines) == 1 + 10 + 2
    med = {l.split(",")[0]: float(l.split(",")[5]) for l in lines if ",median," in l}
    assert med["proto_standard"] > med["random"], med


def main():
    check_vectors()
    with tempfile.TemporaryDirectory() as tmp:
        check_container_round_trip(tmp)
    check_keywords()
    check_selection()
    check_fixture_sweep()
    print("protosample_py", ps.__version__, "smoke test passed")


if __name__ == "__main__":
    main()
