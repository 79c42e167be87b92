import pytest
from hypothesis import given, strategies as st

from rwvideo.errors import MissingFlag
from rwvideo.pee_core import (
    Outcome,
    classify_extract,
    embed_pixel,
    is_ambiguous,
    prediction_error,
    recover_pixel,
)

samples = st.integers(0, 255)
thresholds = st.integers(1, 8)
bits = st.integers(0, 1)


@pytest.mark.parametrize("x,xhat,e", [(100, 100, 0), (100, 98, 2), (0, 255, -255)])
def test_prediction_error(x, xhat, e):
    assert prediction_error(x, xhat) == e


@pytest.mark.parametrize("v,t,expected", [(255, 1, True), (0, 1, False), (1, 3, True), (2, 3, False)])
def test_is_ambiguous(v, t, expected):
    assert is_ambiguous(v, t) is expected


class TestEmbedPixel:
    def test_zero_error_zero_bit(self):
        out = embed_pixel(100, 100, 1, 0)
        assert (out.tag, out.new_value, out.needs_flag) == (Outcome.EMBEDDED, 100, False)

    def test_expansion(self):
        out = embed_pixel(100, 98, 3, 1)
        assert (out.tag, out.new_value, out.bit) == (Outcome.EMBEDDED, 103, 1)

    def test_shift_up(self):
        out = embed_pixel(100, 98, 2)
        assert (out.tag, out.new_value) == (Outcome.SHIFTED, 102)

    def test_shift_down(self):
        out = embed_pixel(100, 105, 3)
        assert (out.tag, out.new_value) == (Outcome.SHIFTED, 98)

    def test_shift_down_identity_at_t1(self):
        assert embed_pixel(100, 105, 1).new_value == 100

    def test_overflow_is_skipped(self):
        out = embed_pixel(255, 254, 2, 1)
        assert (out.tag, out.new_value, out.needs_flag, out.flag_value) == (Outcome.SKIPPED, 255, True, 0)

    def test_underflow_is_skipped(self):
        out = embed_pixel(0, 3, 3)
        assert out.tag == Outcome.SKIPPED and out.new_value == 0

    def test_changed_ambiguous_pixel_needs_flag_one(self):
        out = embed_pixel(253, 253, 3, 1)
        assert (out.tag, out.new_value, out.needs_flag, out.flag_value) == (Outcome.EMBEDDED, 254, True, 1)

    def test_bit_required_for_embeddable_slot(self):
        with pytest.raises(ValueError):
            embed_pixel(100, 100, 2)

    def test_threshold_range(self):
        with pytest.raises(ValueError):
            embed_pixel(100, 100, 9, 0)


class TestExtract:
    def test_classify_embedded(self):
        assert classify_extract(103, 98, 3) == Outcome.EMBEDDED

    def test_classify_shifted(self):
        assert classify_extract(102, 98, 2) == Outcome.SHIFTED

    def test_classify_unchanged_by_flag(self):
        assert classify_extract(255, 254, 2, flag=0) == Outcome.UNCHANGED

    def test_missing_flag(self):
        with pytest.raises(MissingFlag):
            classify_extract(255, 254, 2)

    def test_unexpected_flag(self):
        with pytest.raises(ValueError):
            classify_extract(100, 100, 2, flag=1)

    def test_recover_embedded(self):
        assert recover_pixel(103, 98, 3, Outcome.EMBEDDED) == (100, 1)

    def test_recover_shifted(self):
        assert recover_pixel(102, 98, 2, Outcome.SHIFTED) == (100, None)

    def test_recover_zero_error(self):
        assert recover_pixel(100, 100, 1, Outcome.EMBEDDED) == (100, 0)

    def test_recover_negative_error_bit(self):
        # e = -3, b = 1 -> e' = -5; floored mod gives the bit back
        out = embed_pixel(95, 98, 4, 1)
        assert out.new_value == 93
        assert recover_pixel(93, 98, 4, classify_extract(93, 98, 4)) == (95, 1)


@given(samples, samples, thresholds, bits)
def test_pixel_round_trip(x, xhat, t, b):
    out = embed_pixel(x, xhat, t, b)
    assert out.needs_flag == (out.tag == Outcome.SKIPPED or is_ambiguous(out.new_value, t))
    if out.tag != Outcome.SKIPPED:
        assert abs(out.new_value - x) <= t
    else:
        assert out.new_value == x and is_ambiguous(x, t)
    cls = classify_extract(out.new_value, xhat, t, out.flag_value if out.needs_flag else None)
    restored, bit = recover_pixel(out.new_value, xhat, t, cls)
    assert restored == x
    assert bit == (b if out.tag == Outcome.EMBEDDED else None)
