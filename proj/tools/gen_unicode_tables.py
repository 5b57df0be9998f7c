#!/usr/bin/env python3
"""Regenerate include/finmoji/unicode_tables.hpp from the `regex` module's UCD."""
import sys

import regex

UNICODE_VERSION = "17.0.0"

PROPERTIES = [
    ("kExtendedPictographic", r"\p{Extended_Pictographic}"),
    ("kAlphabetic", r"\p{Alphabetic}"),
    ("kDecimalNumber", r"\p{Nd}"),
    ("kWhiteSpace", r"\p{White_Space}"),
]


def ranges(pattern):
    pat = regex.compile(pattern)
    out, start, prev = [], None, None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if pat.match(chr(cp)):
            if start is None:
                start = cp
            elif cp != prev + 1:
                out.append((start, prev))
                start = cp
            prev = cp
    if start is not None:
        out.append((start, prev))
    return out


def main(path):
    lines = [
        "// Generated by tools/gen_unicode_tables.py; do not edit.",
        "#pragma once",
        "",
        "#include <array>",
        "#include <cstdint>",
        "",
        "namespace finmoji::unicode {",
        "",
        "struct CodeRange {",
        "  char32_t lo;",
        "  char32_t hi;",
        "};",
        "",
        f'inline constexpr const char* kVersion = "{UNICODE_VERSION}";',
        "",
    ]
    for name, pattern in PROPERTIES:
        rs = ranges(pattern)
        lines.append(f"inline constexpr std::array<CodeRange, {len(rs)}> {name}{{{{")
        for lo, hi in rs:
            lines.append(f"    {{0x{lo:05X}, 0x{hi:05X}}},")
        lines.append("}};")
        lines.append("")
    lines.append("}  // namespace finmoji::unicode")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/finmoji/unicode_tables.hpp")
