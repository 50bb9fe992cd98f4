import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gazesal.protocol import BatchRecord, PointMessage, parse, read_batch, serialize, write_batch
from oracles import message_oracle
from strategies import messages, mutate, random_message


def test_serialize_examples():
    assert serialize(PointMessage(2, ((475, 142), (361, 156)))) == "<ref>2</ref><point>[[475,142],[361,156]]</point>"
    assert serialize(PointMessage(0, ())) == "<ref>0</ref><point>[]</point>"


def test_serialize_rejects_out_of_range():
    with pytest.raises(ValueError):
        serialize(PointMessage(1, ((1001, 0),)))
    with pytest.raises(ValueError):
        serialize(PointMessage(-1, ()))


def test_missing_close_names_token():
    out = parse("<ref>2</ref><point>[[1,2],[3,4]]")
    assert not out.valid_format
    assert any("</point>" in d for d in out.diagnostics)


def test_count_mismatch_is_still_valid():
    out = parse("<ref>3</ref><point>[[1,2],[3,4]]</point>")
    assert out.valid_format and out.n_ref == 3 and out.n_actual == 2


def test_out_of_range_point_invalidates():
    out = parse("<ref>1</ref><point>[[1001,2]]</point>")
    assert not out.valid_format and out.points == [(1001, 2)]
    assert not parse("<ref>1</ref><point>[[-1,2]]</point>").valid_format


def test_malformed_list_counts_complete_pairs():
    out = parse("<ref>2</ref><point>[[1,2],[3,]]</point>")
    assert not out.valid_format and out.n_actual == 1


def test_bad_count_and_missing_ref():
    assert not parse("<ref>x</ref><point>[]</point>").valid_format
    assert not parse("<ref>-1</ref><point>[]</point>").valid_format
    out = parse("<point>[[1,2]]</point>")
    assert not out.valid_format and out.n_ref is None and out.points == [(1, 2)]


def test_first_span_wins_and_extras_are_reported():
    out = parse("<ref>1</ref><point>[[1,2]]</point><ref>5</ref><point>[[9,9]]</point>")
    assert out.valid_format and out.n_ref == 1 and out.points == [(1, 2)]
    assert len(out.diagnostics) == 2


def test_one_span_per_point_is_concatenated():
    out = parse("<ref>3</ref><point>[1,2]</point><point>[3,4]</point> <point>[5,6]</point>")
    assert out.valid_format and out.points == [(1, 2), (3, 4), (5, 6)]
    stop = parse("<ref>2</ref><point>[1,2]</point>x<point>[3,4]</point>")
    assert stop.points == [(1, 2)]


def test_whitespace_tolerated_inside_brackets():
    out = parse("<ref> 2 </ref><point> [ [1 , 2] ,[3,4] ] </point>")
    assert out.valid_format and out.points == [(1, 2), (3, 4)] and out.n_ref == 2


def test_huge_numbers_do_not_crash():
    out = parse("<ref>" + "9" * 5000 + "</ref><point>[[" + "1" * 5000 + ",2]]</point>")
    assert not out.valid_format


@given(messages)
def test_round_trip(msg):
    out = parse(serialize(msg))
    assert out.valid_format
    assert out.to_message() == msg
    assert out.diagnostics == []


@given(messages, st.text(max_size=40))
def test_validity_survives_trailing_garbage(msg, junk):
    assert parse(serialize(msg) + junk).valid_format


@given(st.text(alphabet="<>/[],-0123456789 refpoint", max_size=80))
def test_arbitrary_text_matches_oracle(text):
    out = parse(text)
    valid, n_ref, points = message_oracle(text)
    assert out.valid_format == valid
    assert out.n_ref == n_ref


@given(st.integers(0, 2**32 - 1))
def test_mutations_match_oracle(seed):
    rng = random.Random(seed)
    text = mutate(serialize(random_message(rng)), rng)
    out = parse(text)
    valid, n_ref, points = message_oracle(text)
    assert out.valid_format == valid, text
    assert out.n_ref == n_ref
    if points is not None:
        assert out.points == points


def test_to_message_refuses_invalid():
    with pytest.raises(ValueError):
        parse("nothing").to_message()


def test_batch_round_trip():
    recs = [BatchRecord("p1", "<ref>0</ref><point>[]</point>"), BatchRecord("p2", "x\ny")]
    assert read_batch(write_batch(recs).splitlines()) == recs
    with pytest.raises(ValueError, match="line 1"):
        read_batch(['{"text": "x"}'])
