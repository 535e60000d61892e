"""Brute-force WCAG contrast ratios, independent of the Rust code.

Usage: python3 contrast_oracle.py FG BG [FG BG ...]
"""
import sys


def channel(c8):
    c = c8 / 255.0
    return c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4


def luminance(hex_color):
    h = hex_color.lstrip("#")
    r, g, b = (int(h[i:i + 2], 16) for i in (0, 2, 4))
    return 0.2126 * channel(r) + 0.7152 * channel(g) + 0.0722 * channel(b)


def ratio(fg, bg):
    a, b = sorted((luminance(fg), luminance(bg)), reverse=True)
    return (a + 0.05) / (b + 0.05)


if __name__ == "__main__":
    args = sys.argv[1:]
    for fg, bg in zip(args[::2], args[1::2]):
        print(f"{fg} {bg} {ratio(fg, bg)!r}")
