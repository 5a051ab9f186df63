"""Built-in accelerator programs: CKKS m-to-ct / ct-to-m and one Rubato keystream block."""
from __future__ import annotations

from ..ckks import RnsBasis, default_basis
from ..rubato import RubatoParams, get_params


def _header(basis: RnsBasis, count: int, header_bytes: int, segment_words: int) -> list[str]:
    lines = [f"SET_MOD {i} {p.q} {p.log_n}" for i, p in enumerate(basis.primes[:count])]
    lines.append(f"SET_PKT {header_bytes} {segment_words}")
    return lines


def ckks_m_to_ct(basis: RnsBasis | None = None, slots: int = 4096, network: bool = False,
                 header_bytes: int = 8, segment_words: int = 512) -> str:
    """Encode + encrypt over every RNS prime, results staged in the NIC buffer.

    Keys are resident in BUF0 (RAM0); the message arrives by DMA as one
    packed 64-bit word per slot.
    """
    basis = basis or default_basis()
    n = basis.ring_degree
    out = ["# m-to-ct: encode, then encrypt per RNS prime"]
    out += _header(basis, len(basis.primes), header_bytes, segment_words)
    out += [
        f"DMA_LOAD RAM3.msg {slots} msg",
        f"SAMPLE TERNARY RAM4.v {n} enc/v",
        f"SAMPLE GAUSS RAM4.e0 {n} enc/e0",
        f"SAMPLE GAUSS RAM4.e1 {n} enc/e1",
        f"IFFT RAM3.pt RAM3.msg {slots}",
    ]
    for i in range(len(basis.primes)):
        out += [
            f"# basis {i}",
            f"NTT RAM1.v{i} RAM4.v {i}",
            f"NTT RAM1.e0_{i} RAM4.e0 {i}",
            f"MAC PW RAM0.ct0_{i} RAM1.v{i} RAM0.pk0_{i} RAM1.e0_{i} {i}",
            f"NTT RAM1.pt{i} RAM3.pt {i}",
            f"PWADD RAM0.ct0_{i} RAM0.ct0_{i} RAM1.pt{i} {i}",
            f"NTT RAM1.e1_{i} RAM4.e1 {i}",
            f"MAC PW RAM0.ct1_{i} RAM1.v{i} RAM0.pk1_{i} RAM1.e1_{i} {i}",
            f"MOVE NIC.ct0_{i} RAM0.ct0_{i} {n}",
            f"MOVE NIC.ct1_{i} RAM0.ct1_{i} {n}",
        ]
        if network:
            out += [f"SEND NIC.ct0_{i} {n}", f"SEND NIC.ct1_{i} {n}"]
    return "\n".join(out) + "\n"


def ckks_ct_to_m(basis: RnsBasis | None = None, slots: int = 4096, network: bool = False,
                 header_bytes: int = 8, segment_words: int = 512) -> str:
    """Decrypt over the first prime and decode; the ciphertext sits in the NIC buffer."""
    basis = basis or default_basis()
    n = basis.ring_degree
    out = ["# ct-to-m: decrypt over basis 0, then decode"]
    out += _header(basis, 1, header_bytes, segment_words)
    if network:
        out += [f"RECV NIC.ct1 {n} ct1", f"RECV NIC.ct0 {n} ct0"]
    out += [
        f"MOVE RAM0.ct1 NIC.ct1 {n}",
        f"MOVE RAM0.ct0 NIC.ct0 {n}",
        "MAC PW RAM1.pt RAM0.ct1 RAM0.sk0 RAM0.ct0 0",
        "INTT RAM3.pt RAM1.pt 0",
        f"FFT RAM4.msg RAM3.pt {slots} 0",
        f"DMA_STORE RAM4.msg {slots} msg",
    ]
    return "\n".join(out) + "\n"


def rubato_block(preset: str | RubatoParams = "128S") -> str:
    """One keystream block; key and the initial constant state are resident."""
    p = get_params(preset) if isinstance(preset, str) else preset
    n = p.n
    out = [f"# Rubato {p.preset}: one keystream block", f"SET_RUBATO {p.preset}"]
    out += [f"SAMPLE XOF RAM1.rc{i} {n} {i}" for i in range(p.r + 1)]
    out += [f"MOVE RF.x RAM1.ic {n}", "MAC ARK RF.x RF.x RAM0.key RAM1.rc0"]
    for i in range(1, p.r):
        out += ["MAC FEISTEL RF.x RF.x", "MAC MIXROW RF.x RF.x", "MAC MIXCOL RF.x RF.x",
                f"MAC ARK RF.x RF.x RAM0.key RAM1.rc{i}"]
    out += ["MAC MIXROW RF.x RF.x", "MAC MIXCOL RF.x RF.x", "MAC FEISTEL RF.x RF.x",
            "MAC MIXROW RF.x RF.x", "MAC MIXCOL RF.x RF.x", f"MAC ARK RF.x RF.x RAM0.key RAM1.rc{p.r}",
            f"MOVE NIC.ks RF.x {p.l}"]
    return "\n".join(out) + "\n"
