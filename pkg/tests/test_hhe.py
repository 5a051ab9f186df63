import numpy as np
import pytest

from hhekit import ckks, hhe, rubato
from hhekit.errors import ContractError, FormatError, StateError
from hhekit.fileformats import (
    ckks_from_bytes, ckks_to_bytes, load_keys, save_keys, se_from_bytes, se_to_bytes, sniff,
)


@pytest.fixture(scope="module")
def basis():
    return ckks.default_basis()


@pytest.fixture(scope="module")
def keys(basis):
    return ckks.keygen(b"hhe", basis)


def test_mode_policy():
    cfg = lambda L, load="low", bus="2x256", mode="auto": hhe.SessionConfig(L, mode, bus, load)
    assert hhe.select_mode(cfg(12)) is hhe.Mode.RUBATO_SE
    assert hhe.select_mode(cfg(12, "high")) is hhe.Mode.CKKS
    assert hhe.select_mode(cfg(4096, "high")) is hhe.Mode.CKKS
    assert hhe.select_mode(cfg(4096, "low")) is hhe.Mode.CKKS
    # slow edge bus favours the compact SE ciphertext
    assert hhe.select_mode(cfg(4096, "high", "1x64")) is hhe.Mode.RUBATO_SE
    assert hhe.select_mode(cfg(12, mode="ckks")) is hhe.Mode.CKKS
    assert hhe.select_mode(cfg(4096, "high", mode="rubato")) is hhe.Mode.RUBATO_SE
    with pytest.raises(ContractError):
        cfg(0)
    with pytest.raises(ContractError):
        cfg(5, "medium")


def test_segment_helpers():
    p = rubato.get_params("128S")
    assert hhe.segment_count(12, p) == 1 and hhe.segment_count(13, p) == 2
    n = hhe.segment_nonce(bytes(range(16)), 3)
    assert n[:8] == bytes(range(8)) and n[8:] == (3).to_bytes(8, "little")


def test_rubato_mode_round_trip_multi_segment():
    p = rubato.get_params("128S")
    key = rubato.derive_key(b"k", p)
    m = np.linspace(-3, 3, 40)
    cfg = hhe.SessionConfig(40, "rubato", preset="128S")
    ct = hhe.hhe_encrypt(m, cfg, hhe.HheKeys(rubato_key=key), bytes(16))
    assert len(ct.segments) == 4
    assert len({s.nonce for s in ct.segments}) == 4
    assert np.abs(hhe.hhe_decrypt_segments(ct, key) - m).max() <= 2.0 ** -16


def test_ckks_mode(basis, keys):
    params = ckks.EncodingParams(basis, 64)
    m = np.linspace(-1, 1, 64)
    ct = hhe.hhe_encrypt(m, hhe.SessionConfig(64, "ckks"), hhe.HheKeys(ckks=keys), b"n", params)
    assert ct.mode is hhe.Mode.CKKS
    assert np.abs(ckks.decrypt_message(ct.ckks_ct, params, keys) - m).max() <= 2.0 ** -12
    with pytest.raises(StateError):
        hhe.hhe_decrypt_segments(ct, None)


def test_encrypt_contract_errors(keys):
    with pytest.raises(ContractError):
        hhe.hhe_encrypt(np.zeros(3), hhe.SessionConfig(4, "rubato"), hhe.HheKeys(rubato_key=np.zeros(64)), bytes(16))
    with pytest.raises(StateError):
        hhe.hhe_encrypt(np.zeros(4), hhe.SessionConfig(4, "rubato"), hhe.HheKeys(), bytes(16))
    with pytest.raises(StateError):
        hhe.hhe_encrypt(np.zeros(4), hhe.SessionConfig(4, "ckks"), hhe.HheKeys(ckks=keys), bytes(16))
    with pytest.raises(ContractError):
        hhe.hhe_encrypt(np.array([1j]), hhe.SessionConfig(1, "rubato"),
                        hhe.HheKeys(rubato_key=np.zeros(64)), bytes(16))


def test_crossover_report_shape():
    lat = {"ckks": 379_000, "128S": 1300, "128M": 2100, "128L": 3100}
    rows = hhe.crossover_report(lat)
    assert len(rows) == 10
    first = rows[0]
    assert first.length == 12 and first.preset == "128S" and first.segments == 1
    assert first.compute_speedup == pytest.approx(379_000 / 1300)
    with pytest.raises(StateError):
        hhe.crossover_report({"ckks": 1})


# ---------------------------------------------------------------------------
# file formats


def test_ckks_file_round_trip(basis, keys, tmp_path):
    params = ckks.EncodingParams(basis, 128)
    m = np.exp(1j * np.linspace(0, 3, 128)) * 0.9
    ct = ckks.encrypt_message(m, params, keys, b"f")
    data = ckks_to_bytes(ct, 128, params.scale_bits)
    assert sniff(data) == "ckks"
    assert len(data) == 24 + 3 * 8 + 3 * 2 * 8192 * 8
    back, slots, scale_bits = ckks_from_bytes(data)
    assert (slots, scale_bits) == (128, params.scale_bits)
    assert all(a == b for a, b in zip(ct.ct0 + ct.ct1, back.ct0 + back.ct1))
    save_keys(tmp_path / "k.npz", keys, basis)
    k2, b2, rk, preset = load_keys(tmp_path / "k.npz")
    assert b2 == basis and rk is None and preset == "128L"
    out = ckks.decrypt_message(back, ckks.EncodingParams(b2, slots, scale_bits), k2)
    assert np.abs(out - m).max() <= 2.0 ** -12


def test_ckks_file_errors(basis, keys):
    params = ckks.EncodingParams(basis, 8)
    data = ckks_to_bytes(ckks.encrypt_message(np.zeros(8), params, keys, b"e"), 8, 40)
    with pytest.raises(FormatError) as exc:
        ckks_from_bytes(data[:-1])
    assert exc.value.offset is not None
    with pytest.raises(FormatError):
        ckks_from_bytes(data + b"\0")
    with pytest.raises(FormatError):
        ckks_from_bytes(b"HHECKKSX" + data[8:])
    bad_q = bytearray(data)
    bad_q[24:32] = (12345).to_bytes(8, "little")
    with pytest.raises(FormatError):
        ckks_from_bytes(bytes(bad_q))
    with pytest.raises(FormatError):
        sniff(b"nonsense")


def test_se_file_round_trip():
    p = rubato.get_params("128M")
    key = rubato.derive_key(b"s", p)
    m = np.linspace(-1, 1, 50)
    ct = hhe.hhe_encrypt(m, hhe.SessionConfig(50, "rubato", preset="128M"), hhe.HheKeys(rubato_key=key), bytes(16))
    data = se_to_bytes(ct.segments, 50)
    assert sniff(data) == "rubato"
    segs, length = se_from_bytes(data)
    assert length == 50
    back = hhe.HheCiphertext(hhe.Mode.RUBATO_SE, segments=segs, length=50)
    assert np.abs(hhe.hhe_decrypt_segments(back, key) - m).max() <= 2.0 ** -16
    with pytest.raises(FormatError):
        se_from_bytes(data[:-5])
    with pytest.raises(FormatError):
        se_to_bytes([], 0)


def test_bad_key_file(tmp_path):
    path = tmp_path / "bad.npz"
    path.write_bytes(b"not a zip")
    with pytest.raises(FormatError):
        load_keys(path)


def test_policy_defaults_and_boundary():
    assert hhe.select_mode(hhe.SessionConfig(4096, cloud_load="high")) is hhe.Mode.CKKS
    assert hhe.select_mode(hhe.SessionConfig(12)) is hhe.Mode.RUBATO_SE
    # ties go to CKKS
    assert hhe.select_mode(hhe.SessionConfig(1000)) is hhe.Mode.CKKS
    assert hhe.select_mode(hhe.SessionConfig(999)) is hhe.Mode.RUBATO_SE
    policy = hhe.ModePolicy(length_threshold=50)
    assert hhe.select_mode(hhe.SessionConfig(60, policy=policy)) is hhe.Mode.CKKS


def test_segment_counts_for_128l():
    p = rubato.get_params("128L")
    key = rubato.derive_key(b"L", p)
    for length, segs in ((60, 1), (512, 9)):
        cfg = hhe.SessionConfig(length, "rubato", preset="128L")
        ct = hhe.hhe_encrypt(np.zeros(length), cfg, hhe.HheKeys(rubato_key=key), bytes(16))
        assert len(ct.segments) == segs


def test_ckks_zero_message(basis, keys):
    params = ckks.EncodingParams(basis, 16)
    ct = hhe.hhe_encrypt(np.zeros(16), hhe.SessionConfig(16, "ckks"), hhe.HheKeys(ckks=keys), b"0", params)
    assert np.abs(ckks.decrypt_message(ct.ckks_ct, params, keys)).max() <= 2.0 ** -20
