import numpy as np
import pytest

from hhekit import ckks
from hhekit.errors import ContractError, ParameterError, StateError
from hhekit.field import center, find_rns_primes, to_residues, vec_add, vec_mul
from hhekit.sampling import Xof, gaussian
from hhekit.transforms import COEFF, NTT, Polynomial, intt, ntt

from oracles import canonical_decode, negacyclic_kronecker


@pytest.fixture(scope="module")
def basis():
    return ckks.default_basis()


@pytest.fixture(scope="module")
def keys(basis):
    return ckks.keygen(b"test-keys", basis)


def _unit(rng, n):
    z = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    return z / np.maximum(1.0, np.abs(z))


def _noise_oracle(basis, keys, noise):
    """v*e + e1*s + e0 over the integers, by big-integer convolution, reduced mod q0."""
    q = basis.primes[0].q
    e = gaussian(Xof(keys.seed, b"key/epk"), basis.ring_degree)
    m = lambda a: [int(x) % q for x in a]
    ve = negacyclic_kronecker(m(noise.v), m(e), q)
    e1s = negacyclic_kronecker(m(noise.e1), m(keys.sk_coeffs), q)
    return np.array([(a + b + int(c)) % q for a, b, c in zip(ve, e1s, noise.e0)], dtype=np.uint64)


def test_basis_properties(basis):
    assert len(basis.primes) == 3
    assert basis.within_eta()
    assert all(p.k == 54 for p in basis.primes)
    with pytest.raises(ParameterError):
        ckks.RnsBasis((basis.primes[0], basis.primes[0]))


def test_encoding_params_validation(basis):
    with pytest.raises(ParameterError):
        ckks.EncodingParams(basis, 4097)
    with pytest.raises(ParameterError):
        ckks.EncodingParams(basis, 16, scale_bits=60)
    assert ckks.EncodingParams(basis, 100).packed_slots == 128


def test_slot_permutation_is_bijection():
    for n in (1, 2, 8, 4096):
        assert sorted(ckks.slot_permutation(n).tolist()) == list(range(n))


def test_encode_zero(basis):
    pt = ckks.encode(np.zeros(64), ckks.EncodingParams(basis, 64))
    assert all(not p.coeffs.any() for p in pt.polys)


def test_encode_constant(basis):
    params = ckks.EncodingParams(basis, 4096, scale_bits=26)
    c = 0.3
    coeffs = ckks.encode_coefficients(np.full(4096, c), params)
    assert abs(coeffs[0] - round(c * 2 ** 26)) <= 2
    assert np.abs(coeffs[1:]).max() <= 2


def test_encode_against_canonical_embedding_oracle(basis):
    # small ring so the O(N * slots) embedding oracle is cheap
    small = ckks.RnsBasis(tuple(find_rns_primes(54, 32, 10)[:2]))
    params = ckks.EncodingParams(small, 16, scale_bits=40)
    rng = np.random.default_rng(0)
    m = _unit(rng, 16)
    coeffs = ckks.encode_coefficients(m, params) / 2.0 ** 40
    assert np.abs(np.array(canonical_decode(coeffs.tolist(), 16)) - m).max() <= 2.0 ** -18


def test_encode_decode_round_trip(basis):
    rng = np.random.default_rng(1)
    for slots in (1, 7, 512, 4096):
        params = ckks.EncodingParams(basis, slots)
        for _ in range(3):
            m = _unit(rng, slots)
            assert np.abs(ckks.decode(ckks.encode(m, params), params) - m).max() <= 2.0 ** -18


def test_encode_rejects_bad_shapes(basis):
    params = ckks.EncodingParams(basis, 8)
    with pytest.raises(ContractError):
        ckks.encode(np.zeros(9), params)


def test_keygen_deterministic_and_seed_sensitive(basis):
    a = ckks.keygen(b"k1", basis)
    b = ckks.keygen(b"k1", basis)
    assert all(x == y for x, y in zip(a.pk0 + a.pk1, b.pk0 + b.pk1))
    pk1s = {ckks.keygen(b"seed%d" % i, basis).pk1[0].coeffs[:8].tobytes() for i in range(100)}
    assert len(pk1s) == 100
    with pytest.raises(ContractError):
        ckks.keygen(b"", basis)


def test_public_key_decrypts_to_small_noise(basis, keys):
    e = gaussian(Xof(keys.seed, b"key/epk"), basis.ring_degree)
    for i, spec in enumerate(basis.primes):
        r = intt(Polynomial(vec_add(vec_mul(keys.pk1[i].coeffs, keys.sk[i].coeffs, spec),
                                    keys.pk0[i].coeffs, spec), spec, NTT, i))
        r = center(r.coeffs, spec)
        assert np.array_equal(r, e)
        assert np.abs(r).max() <= 6 * 3.2


def test_degenerate_randomness_gives_plaintext(basis, keys):
    params = ckks.EncodingParams(basis, 4096)
    pt = ckks.encode(_unit(np.random.default_rng(2), 4096), params)
    ct = ckks.encrypt(pt, keys, ckks.EncryptionNoise.zeros(basis.ring_degree))
    for i, p in enumerate(pt.polys):
        assert ct.ct0[i] == ntt(p)
        assert not ct.ct1[i].coeffs.any() and ct.ct1[i].domain == NTT
    assert ckks.decrypt(ct, keys).polys[0] == pt.polys[0]


def test_decrypt_noise_equals_direct_expansion(basis, keys):
    params = ckks.EncodingParams(basis, 4096)
    pt = ckks.encode(_unit(np.random.default_rng(3), 4096), params)
    noise = ckks.EncryptionNoise.sample(b"enc-seed", basis.ring_degree)
    dec = ckks.decrypt(ckks.encrypt(pt, keys, noise), keys).polys[0]
    spec = basis.primes[0]
    got = (dec.coeffs.astype(object) - pt.polys[0].coeffs.astype(object)) % spec.q
    want = _noise_oracle(basis, keys, noise)
    assert np.array_equal(got.astype(np.uint64), want)
    bound = 6 * 3.2
    b_clean = 2 * basis.ring_degree * bound + bound
    assert np.abs(center(want, spec)).max() <= b_clean


def test_zero_plaintext_is_noise_only(basis, keys):
    params = ckks.EncodingParams(basis, 16)
    ct = ckks.encrypt_message(np.zeros(16), params, keys, b"z")
    r = center(ckks.decrypt(ct, keys).polys[0].coeffs, basis.primes[0])
    assert 0 < np.abs(r).max() <= 2 * basis.ring_degree * 19.2 + 19.2


def test_decrypt_linearity(basis, keys):
    params = ckks.EncodingParams(basis, 64)
    rng = np.random.default_rng(4)
    a = ckks.encrypt_message(_unit(rng, 64), params, keys, b"a")
    b = ckks.encrypt_message(_unit(rng, 64), params, keys, b"b")
    s = ckks.decrypt(ckks.add_ciphertexts(a, b), keys).polys[0].coeffs
    q = np.uint64(basis.primes[0].q)
    want = (ckks.decrypt(a, keys).polys[0].coeffs + ckks.decrypt(b, keys).polys[0].coeffs) % q
    assert np.array_equal(s, want)


def test_rns_basis_independence(basis, keys):
    # each basis component equals the single-prime computation on that prime alone
    params = ckks.EncodingParams(basis, 32)
    m = _unit(np.random.default_rng(5), 32)
    noise = ckks.EncryptionNoise.sample(b"n", basis.ring_degree)
    ct = ckks.encrypt(ckks.encode(m, params), keys, noise)
    coeffs = ckks.encode_coefficients(m, params)
    for i, spec in enumerate(basis.primes):
        pt_i = Polynomial(to_residues(coeffs, spec), spec, COEFF, i)
        single = ckks.KeyMaterial([keys.sk[i]], [keys.pk0[i]], [keys.pk1[i]], keys.seed)
        one = ckks.encrypt(ckks.Plaintext([pt_i], 32, params.scale_bits), single, noise)
        assert one.ct0[0] == ct.ct0[i] and one.ct1[0] == ct.ct1[i]


def test_encrypt_message_deterministic(basis, keys):
    params = ckks.EncodingParams(basis, 8)
    m = np.arange(8) / 10
    a = ckks.encrypt_message(m, params, keys, b"same")
    b = ckks.encrypt_message(m, params, keys, b"same")
    assert all(x == y for x, y in zip(a.ct0 + a.ct1, b.ct0 + b.ct1))


def test_round_trip_small_batch(basis, keys):
    rng = np.random.default_rng(6)
    params = ckks.EncodingParams(basis, 4096)
    for i in range(5):
        m = _unit(rng, 4096)
        out = ckks.decrypt_message(ckks.encrypt_message(m, params, keys, b"%d" % i), params, keys)
        assert np.abs(out - m).max() <= 2.0 ** -12


def test_decrypt_state_errors(basis, keys):
    params = ckks.EncodingParams(basis, 8)
    ct = ckks.encrypt_message(np.zeros(8), params, keys, b"x")
    with pytest.raises(StateError):
        ckks.decrypt(ckks.Ciphertext([], [], 0), keys)
    bad = ckks.Ciphertext([intt(ct.ct0[0])], [intt(ct.ct1[0])], 0)
    with pytest.raises(StateError):
        ckks.decrypt(bad, keys)
    with pytest.raises(StateError):
        ckks.decode(ckks.Plaintext([ntt(ckks.encode(np.zeros(8), params).polys[0])], 8, 40), params)


def test_noise_std_formula():
    assert ckks.noise_std(8192) == pytest.approx(3.2 * np.sqrt(8193))
