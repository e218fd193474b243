import json

import numpy as np
import pytest

from betaboard.pose import (
    BODY_LANDMARKS,
    CSV_HEADER,
    EXTREMITY_LANDMARKS,
    N_LANDMARKS,
    Extremity,
    LandmarkFrame,
    ParseError,
    dump_landmark_csv,
    dump_landmark_json,
    load_landmark_stream,
)


def make_frame(frame_index=0, value=0.5):
    return LandmarkFrame(frame_index=frame_index, landmarks=np.full((33, 3), value))


def test_topology_partitions_all_landmarks():
    ext = {i for group in EXTREMITY_LANDMARKS.values() for i in group}
    assert len(ext) == 14
    assert set(BODY_LANDMARKS) | ext == set(range(N_LANDMARKS))
    assert len(BODY_LANDMARKS) == 19


def test_extremity_codes_round_trip():
    for ext in Extremity:
        assert Extremity.from_code(ext.code) is ext
    with pytest.raises(ValueError):
        Extremity.from_code("XX")


def test_frame_rejects_wrong_count():
    with pytest.raises(ValueError, match="expected 33 landmarks"):
        LandmarkFrame(frame_index=0, landmarks=np.zeros((32, 3)))


def test_frame_rejects_out_of_range():
    bad = np.full((33, 3), 0.5)
    bad[7, 1] = 1.5
    with pytest.raises(ValueError, match="frame 3.*landmark 7"):
        LandmarkFrame(frame_index=3, landmarks=bad)


def test_csv_round_trip_two_frames():
    frames = [make_frame(0, 0.25), make_frame(1, 0.75)]
    data = dump_landmark_csv(frames)
    loaded = load_landmark_stream(data, "csv")
    assert len(loaded) == 2
    for orig, got in zip(frames, loaded):
        assert got.frame_index == orig.frame_index
        assert np.array_equal(got.landmarks, orig.landmarks)


def test_json_round_trip():
    frames = [make_frame(5, 0.1), make_frame(2, 0.9)]
    loaded = load_landmark_stream(dump_landmark_json(frames), "json")
    # sorted by frame_index
    assert [f.frame_index for f in loaded] == [2, 5]


def test_csv_row_with_98_features_names_frame():
    good = dump_landmark_csv([make_frame(0)]).decode().splitlines()
    row = good[1].split(",")
    broken = ",".join(row[:-1])  # drop one feature
    data = (",".join(CSV_HEADER) + "\n" + broken + "\n").encode()
    with pytest.raises(ParseError, match="expected 99 landmark features, got 98"):
        load_landmark_stream(data, "csv")


def test_csv_out_of_range_value_names_frame_and_field():
    text = dump_landmark_csv([make_frame(4)]).decode().splitlines()
    cols = text[1].split(",")
    cols[2] = "1.2"  # l0_y
    data = (text[0] + "\n" + ",".join(cols) + "\n").encode()
    with pytest.raises(ParseError, match="frame 4.*landmark 0 field y"):
        load_landmark_stream(data, "csv")


def test_json_wrong_landmark_count():
    payload = [{"frame": 0, "landmarks": [[0.5, 0.5, 1.0]] * 32}]
    with pytest.raises(ParseError, match="frame 0: expected 33"):
        load_landmark_stream(json.dumps(payload).encode(), "json")


def test_fixture_stream_matches_manifest(fixture_pack):
    manifest = json.loads((fixture_pack / "manifest.json").read_text())
    stream = load_landmark_stream(
        (fixture_pack / manifest["climber_stream"]).read_bytes(), "csv"
    )
    assert len(stream) == manifest["climber_frames"]
