from __future__ import annotations

import numpy as np
import pytest

from traitfusion.rng import (
    GOLDEN,
    MASK64,
    Xoshiro256PP,
    Xoshiro256PPBank,
    derive_key,
    derive_keys,
    mix64,
)

# published splitmix64 outputs for seed 0; output i is mix64((i+1) * GOLDEN)
SPLITMIX64_SEED0 = (
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
)


def test_mix64_matches_independent_transcription() -> None:
    def reference(z: int) -> int:
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    rng = np.random.default_rng(0)
    for z in rng.integers(0, 1 << 64, size=100, dtype=np.uint64):
        assert mix64(int(z)) == reference(int(z))


def test_mix64_matches_splitmix64_reference() -> None:
    for i, expected in enumerate(SPLITMIX64_SEED0):
        assert mix64(((i + 1) * GOLDEN) & MASK64) == expected


def test_derive_key_empty_parts_is_seed_mix() -> None:
    assert derive_key(0) == SPLITMIX64_SEED0[0]
    assert derive_key(1) == mix64((1 + GOLDEN) & MASK64)


def test_derive_key_distinct_streams() -> None:
    keys = {derive_key(seed, tag, idx) for seed in range(4) for tag in range(6) for idx in range(8)}
    assert len(keys) == 4 * 6 * 8


def test_derive_keys_matches_scalar() -> None:
    idx = np.arange(50)
    vec = derive_keys(7, 3, idx)
    for i in idx:
        assert int(vec[i]) == derive_key(7, 3, int(i))
    # two array parts broadcast elementwise
    vec2 = derive_keys(7, idx, idx * 2)
    for i in idx:
        assert int(vec2[i]) == derive_key(7, int(i), int(i) * 2)


def _reference_xoshiro(state: list[int], n: int) -> list[int]:
    # independent transcription of the xoshiro256++ reference step
    def rotl(x: int, k: int) -> int:
        return ((x << k) | (x >> (64 - k))) & MASK64

    s = list(state)
    out = []
    for _ in range(n):
        out.append((rotl((s[0] + s[3]) & MASK64, 23) + s[0]) & MASK64)
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
    return out


def test_xoshiro_known_first_outputs() -> None:
    # from state (1,2,3,4): rotl(1+4, 23) + 1, then the updated state by hand
    rng = Xoshiro256PP.from_state([1, 2, 3, 4])
    assert rng.next_u64() == 41943041
    assert rng.next_u64() == 58720359


def test_xoshiro_matches_reference_sequence() -> None:
    for seed in range(5):
        key = derive_key(seed)
        rng = Xoshiro256PP(key)
        state = [mix64((key + (i + 1) * GOLDEN) & MASK64) for i in range(4)]
        assert [rng.next_u64() for _ in range(100)] == _reference_xoshiro(state, 100)


def test_floats_in_unit_interval() -> None:
    rng = Xoshiro256PP(derive_key(11))
    u = rng.floats(2000)
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    # 53-bit resolution: values are k * 2**-53
    assert np.array_equal(u, np.round(u * 2.0**53) * 2.0**-53)


def test_next_below_bounds() -> None:
    rng = Xoshiro256PP(derive_key(3))
    draws = [rng.next_below(7) for _ in range(200)]
    assert set(draws) <= set(range(7))
    with pytest.raises(ValueError):
        rng.next_below(0)


def test_normals_standard_moments() -> None:
    rng = Xoshiro256PP(derive_key(5))
    z = rng.normals(20000)
    assert abs(z.mean()) < 0.03
    assert abs(z.std() - 1.0) < 0.03


def test_normals_odd_count_prefix_of_even() -> None:
    a = Xoshiro256PP(derive_key(9)).normals(7)
    b = Xoshiro256PP(derive_key(9)).normals(8)
    assert np.array_equal(a, b[:7])


def test_bank_matches_scalar_streams() -> None:
    keys = np.array([derive_key(0, 1, i) for i in range(6)], dtype=np.uint64)
    bank = Xoshiro256PPBank(keys)
    got = bank.uniforms(16)
    for i, key in enumerate(keys):
        assert np.array_equal(got[i], Xoshiro256PP(int(key)).floats(16))


def test_bank_normals_match_scalar() -> None:
    keys = np.array([derive_key(2, 4, i) for i in range(4)], dtype=np.uint64)
    got = Xoshiro256PPBank(keys).normals(9)
    for i, key in enumerate(keys):
        assert np.allclose(got[i], Xoshiro256PP(int(key)).normals(9), rtol=0, atol=0)


def test_shuffle_deterministic_and_complete() -> None:
    items = list(range(30))
    a = items.copy()
    Xoshiro256PP(derive_key(1, 7)).shuffle(a)
    b = items.copy()
    Xoshiro256PP(derive_key(1, 7)).shuffle(b)
    assert a == b
    assert sorted(a) == items
    c = items.copy()
    Xoshiro256PP(derive_key(2, 7)).shuffle(c)
    assert c != a
