import pytest

from median_intervals.config import MASK64
from median_intervals.errors import EmptyInputError, PayloadKindError
from median_intervals.semigroup import (
    FINGERPRINT,
    MIN,
    SUM,
    combine,
    fingerprint_token,
    fold,
    fold_optional,
    get_semigroup,
    payload_vector,
)


class TestCombine:
    def test_sum_wraps_at_64_bits(self):
        assert combine(SUM, MASK64, 1) == 0
        assert combine(SUM, MASK64, 5) == 4

    def test_min(self):
        assert combine(MIN, 7, 3) == 3
        assert combine(MIN, -2, 3) == -2

    @pytest.mark.parametrize("bad", [True, 1.5, "3", None])
    def test_rejects_non_integers(self, bad):
        with pytest.raises(PayloadKindError):
            combine(SUM, bad, 1)

    def test_rejects_values_wider_than_a_word(self):
        with pytest.raises(PayloadKindError):
            combine(MIN, 1 << 64, 0)


class TestFold:
    def test_fold(self):
        assert fold(SUM, [3, 5, 7]) == 15
        assert fold(MIN, [3, 5, 7]) == 3

    def test_empty_fold_raises(self):
        with pytest.raises(EmptyInputError):
            fold(SUM, [])

    def test_fold_optional_skips_none(self):
        assert fold_optional(SUM, None, 2, None, 3) == 5
        assert fold_optional(SUM, None) is None


class TestLookup:
    def test_builtins(self):
        assert get_semigroup("sum") is SUM
        assert get_semigroup("fingerprint") is FINGERPRINT

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown semigroup"):
            get_semigroup("product")


class TestPayloadVector:
    def test_defaults(self):
        raw = [None, None, 9]
        assert payload_vector(raw, SUM) == [1, 1, 9]
        assert payload_vector(raw, MIN) == [0, 1, 9]

    def test_sum_reduces_negative_payloads(self):
        assert payload_vector([-1], SUM) == [MASK64]

    def test_fingerprint_is_seeded(self):
        raw = [None] * 6
        a = payload_vector(raw, FINGERPRINT, seed=11)
        assert a == payload_vector(raw, FINGERPRINT, seed=11)
        assert a != payload_vector(raw, FINGERPRINT, seed=12)
        assert all(0 <= x <= MASK64 for x in a)

    def test_fingerprint_tokens_are_nonzero_for_any_payload(self):
        tokens = payload_vector([0, 2, 4, -1, None], FINGERPRINT, seed=3)
        assert all(0 < t <= MASK64 for t in tokens)
        assert len(set(tokens)) == 5

    def test_payload_changes_the_token(self):
        assert fingerprint_token(3, 0, 1) != fingerprint_token(3, 0, 2)
        assert fingerprint_token(3, 0, 1) == fingerprint_token(3, 0, 1)

    def test_distinct_vertex_sets_have_distinct_fingerprints(self):
        tokens = payload_vector(list(range(8)), FINGERPRINT, seed=7)
        sums = {fold(FINGERPRINT, [t for v, t in enumerate(tokens) if mask >> v & 1]) for mask in range(1, 256)}
        assert len(sums) == 255
