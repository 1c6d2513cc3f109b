"""Independent reference implementations used only to check the package.

Each oracle deliberately takes a different route than the code under
test: CRC by explicit polynomial long division instead of a shift
register, arbitration by simulating wire contention bit position by bit
position instead of sorting.
"""

# x^15 + x^14 + x^10 + x^8 + x^7 + x^4 + x^3 + 1, coefficients msb-first
CRC15_GENERATOR = [1, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 0, 1]


def crc15_longdiv(bits) -> int:
    """Remainder of message(x) * x^15 divided by the CAN generator,
    computed by textbook GF(2) long division."""
    work = [int(b) for b in bits] + [0] * 15
    for i in range(len(work) - 15):
        if work[i]:
            for j, g in enumerate(CRC15_GENERATOR):
                work[i + j] ^= g
    value = 0
    for bit in work[-15:]:
        value = (value << 1) | bit
    return value


def arbitration_field_bits(frame) -> list[int]:
    """11 identifier bits msb-first followed by the RTR bit."""
    return [(frame.can_id >> k) & 1 for k in range(10, -1, -1)] + [1 if frame.rtr else 0]


def arbitrate_bitwise(pending):
    """Winner by simulated wire contention: at every bit position the
    dominant level (0) survives and recessive transmitters drop out."""
    contenders = list(pending)
    if not contenders:
        raise ValueError("empty pending set")
    for pos in range(12):
        level = min(arbitration_field_bits(f)[pos] for _node, f in contenders)
        contenders = [
            (node, f) for node, f in contenders
            if arbitration_field_bits(f)[pos] == level
        ]
        if len(contenders) == 1:
            return contenders[0]
    # Identical arbitration fields: same deterministic tie-break as the bus.
    return min(contenders, key=lambda nf: nf[0].node_id)
