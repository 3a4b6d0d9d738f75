"""Straight-line turbo encoder kept apart from the package implementation.

Hard-wired to the default code: RSC feedback 1 + D + D^2, feedforward 1 + D^2,
parity of encoder 1 kept on even steps and of encoder 2 on odd steps.
"""


def rsc_parity(bits):
    a1 = a2 = 0
    out = []
    for u in bits:
        a = u ^ a1 ^ a2
        out.append(a ^ a2)
        a2, a1 = a1, a
    return out


def reference_encode(bits, perm):
    p1 = rsc_parity(bits)
    p2 = rsc_parity([bits[j] for j in perm])
    out = []
    for k, u in enumerate(bits):
        out.append(u)
        out.append(p1[k] if k % 2 == 0 else p2[k])
    return out


def bits_to_hex(bits):
    padded = list(bits) + [0] * (-len(bits) % 4)
    return "".join("%x" % (padded[i] << 3 | padded[i + 1] << 2 | padded[i + 2] << 1 | padded[i + 3])
                   for i in range(0, len(padded), 4))


def hex_to_bits(text, n):
    bits = []
    for ch in text.strip():
        v = int(ch, 16)
        bits.extend([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1])
    return bits[:n]
