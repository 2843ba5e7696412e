import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biorecords.metrics import LinkMapError, linkage_eval, validate_link_map
from biorecords.metrics.linkage import format_table, total_row


def entry(pid, new=False, maybe=False):
    return {"person_id": pid, "new_person": new, "maybe_same_person": maybe}


# seven persons; p6 should be new but was matched to an existing id
EXPECTED = {
    "p1.json": entry(1),
    "p2.json": entry(2),
    "p3.json": entry(8, new=True),
    "p4.json": entry(9, new=True, maybe=True),
    "p5.json": entry(3),
    "p6.json": entry(10, new=True),
    "p7.json": entry(4),
}
ACTUAL = {
    "p1.json": entry(1),
    "p2.json": entry(2),
    "p3.json": entry(8, new=True),
    "p4.json": entry(9, new=True, maybe=True),
    "p5.json": entry(3),
    "p6.json": entry(6),
    "p7.json": entry(4),
}


def test_seven_person_fixture():
    r = linkage_eval(EXPECTED, ACTUAL, "v")
    assert r.persons == 7
    assert r.person_id_accuracy == pytest.approx(85.71, abs=0.01)
    assert r.new_person_accuracy == pytest.approx(85.71, abs=0.01)
    assert r.maybe_same_person_accuracy == pytest.approx(100.0, abs=0.01)
    assert r.average == pytest.approx(90.48, abs=0.01)
    assert (r.expected_new_count, r.generated_new_count) == (3, 2)


def test_link_map_shape_accepted_and_checked():
    doc = json.loads(json.dumps(EXPECTED))
    assert validate_link_map(doc) == EXPECTED
    with pytest.raises(LinkMapError):
        validate_link_map({"a.json": {"person_id": "1", "new_person": False, "maybe_same_person": False}})
    with pytest.raises(LinkMapError):
        validate_link_map({"a.json": {"person_id": True, "new_person": False, "maybe_same_person": False}})
    with pytest.raises(LinkMapError):
        validate_link_map({"a.json": {"person_id": 1, "new_person": 0, "maybe_same_person": False}})
    with pytest.raises(LinkMapError):
        validate_link_map({"a.json": {"person_id": 1, "new_person": False}})
    with pytest.raises(LinkMapError):
        validate_link_map({"a.json": {**entry(1), "extra": 1}})
    with pytest.raises(LinkMapError):
        validate_link_map([entry(1)])


def test_missing_actual_entry_counts_wrong():
    r = linkage_eval({"a.json": entry(1)}, {})
    assert (r.person_id_accuracy, r.new_person_accuracy, r.maybe_same_person_accuracy) == (0, 0, 0)


def test_empty_expected_rejected():
    with pytest.raises(LinkMapError):
        linkage_eval({}, {})


def test_total_row_and_table():
    a = linkage_eval(EXPECTED, ACTUAL, "v1")
    b = linkage_eval(EXPECTED, EXPECTED, "v2")
    t = total_row([a, b])
    assert t["person_id_accuracy"] == pytest.approx((a.person_id_accuracy + 100) / 2)
    assert t["persons"] == 14
    text = format_table([a, b])
    assert "v1" in text and "Total" in text


def test_identical_maps_score_full():
    r = linkage_eval(EXPECTED, EXPECTED)
    assert (r.person_id_accuracy, r.new_person_accuracy, r.maybe_same_person_accuracy, r.average) == (100, 100, 100, 100)


entries = st.builds(entry, st.integers(1, 4), st.booleans(), st.booleans())


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.sampled_from(list("abcdef")), entries, min_size=1),
       st.dictionaries(st.sampled_from(list("abcdefg")), entries))
def test_accuracies_bounded_and_averaged(expected, actual):
    r = linkage_eval(expected, actual)
    fields = (r.person_id_accuracy, r.new_person_accuracy, r.maybe_same_person_accuracy)
    assert all(0 <= f <= 100 for f in fields)
    assert r.average == pytest.approx(sum(fields) / 3)
