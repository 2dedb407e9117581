#!/usr/bin/env python3
"""Generate src/unicode_tables.inc from Python's unicodedata.

Emits canonical decompositions (fully expanded), combining classes, primary
composition pairs, simple lowercase mappings and a coarse character class
table used by the tokenizer. Hangul syllables are handled algorithmically in
C++ and are skipped here.

Usage: gen_unicode_tables.py > src/unicode_tables.inc
"""
import sys
import unicodedata

MAX_CP = 0x110000
S_BASE, S_COUNT = 0xAC00, 11172


def canonical_decomposition(cp):
    d = unicodedata.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    return [int(x, 16) for x in d.split()]


def full_decomposition(cp):
    d = canonical_decomposition(cp)
    if d is None:
        return [cp]
    out = []
    for c in d:
        out.extend(full_decomposition(c))
    return out


def char_class(cp):
    ch = chr(cp)
    if ch in "\t\n\v\f\r\x1c\x1d\x1e\x1f\x85" or unicodedata.category(ch) in ("Zs", "Zl", "Zp"):
        return 1  # space
    cat = unicodedata.category(ch)
    if cat[0] in "LM":
        return 2  # letter (marks continue a word)
    if cat[0] == "N":
        return 3  # digit
    if cat == "Cc":
        return 1  # remaining control characters separate like spaces
    return 0  # punctuation / symbol


def main():
    decomp, ccc, compose, lower = [], [], [], []
    for cp in range(MAX_CP):
        if S_BASE <= cp < S_BASE + S_COUNT:
            continue
        ch = chr(cp)
        c = unicodedata.combining(ch)
        if c:
            ccc.append((cp, c))
        d = canonical_decomposition(cp)
        if d is not None:
            decomp.append((cp, full_decomposition(cp)))
            if len(d) == 2 and unicodedata.normalize("NFC", chr(d[0]) + chr(d[1])) == ch:
                compose.append((d[0], d[1], cp))
        lo = ch.lower()
        if len(lo) == 1 and lo != ch:
            lower.append((cp, ord(lo)))

    # Run-length encode the class table.
    ranges = []
    prev = None
    for cp in range(MAX_CP):
        k = char_class(cp)
        if k != prev:
            ranges.append((cp, k))
            prev = k

    w = sys.stdout.write
    w("// Generated by tools/gen_unicode_tables.py from Unicode %s. Do not edit.\n" % unicodedata.unidata_version)
    w("// NOLINTBEGIN\n")
    w("inline constexpr const char* kUnicodeVersion = \"%s\";\n\n" % unicodedata.unidata_version)

    w("struct DecompEntry { char32_t cp; std::uint16_t offset; std::uint8_t length; };\n")
    pool = []
    entries = []
    for cp, seq in decomp:
        entries.append((cp, len(pool), len(seq)))
        pool.extend(seq)
    w("inline constexpr char32_t kDecompPool[] = {\n")
    for i in range(0, len(pool), 12):
        w("  " + ", ".join("0x%X" % x for x in pool[i:i + 12]) + ",\n")
    w("};\n")
    w("inline constexpr DecompEntry kDecomp[] = {\n")
    for cp, off, n in entries:
        w("  {0x%X, %d, %d},\n" % (cp, off, n))
    w("};\n\n")

    w("struct CccEntry { char32_t cp; std::uint8_t ccc; };\n")
    w("inline constexpr CccEntry kCcc[] = {\n")
    for cp, c in ccc:
        w("  {0x%X, %d},\n" % (cp, c))
    w("};\n\n")

    compose.sort()
    w("struct ComposeEntry { char32_t first; char32_t second; char32_t composite; };\n")
    w("inline constexpr ComposeEntry kCompose[] = {\n")
    for a, b, c in compose:
        w("  {0x%X, 0x%X, 0x%X},\n" % (a, b, c))
    w("};\n\n")

    w("struct LowerEntry { char32_t cp; char32_t lower; };\n")
    w("inline constexpr LowerEntry kLower[] = {\n")
    for a, b in lower:
        w("  {0x%X, 0x%X},\n" % (a, b))
    w("};\n\n")

    w("struct ClassRange { char32_t start; std::uint8_t cls; };\n")
    w("inline constexpr ClassRange kClassRanges[] = {\n")
    for a, k in ranges:
        w("  {0x%X, %d},\n" % (a, k))
    w("};\n")
    w("// NOLINTEND\n")


if __name__ == "__main__":
    main()
