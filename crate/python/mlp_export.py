#!/usr/bin/env python3
"""Convert a plain-text layer dump into the binary "MLP1" container.

Training stacks export to an intermediate text file so no framework needs
to know the binary layout. The text format, repeated once per layer:

    layer <rows> <cols> <relu|identity>
    <rows * cols weights, row-major, any whitespace>
    <rows biases>

Conventions the exporter must honor for the bundled 15-puzzle policy:
the canonical shape is 256 -> 160 -> 80 -> 16 -> 4; the input one-hot is
cell-major (tile t on cell c sets component 16*c + t); the four outputs
are the blank moves Up, Down, Left, Right in that order. The final layer
is softmaxed by the loader, so export raw logit weights with activation
"identity".

Usage: mlp_export.py dump.txt model.mlp1
"""

import struct
import sys

ACTIVATIONS = {"identity": 0, "relu": 1}


def main() -> None:
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    dump_path, out_path = sys.argv[1], sys.argv[2]
    tokens = open(dump_path).read().split()
    layers = []
    i = 0
    while i < len(tokens):
        if tokens[i] != "layer":
            sys.exit(f"expected 'layer', got {tokens[i]!r} at token {i}")
        rows, cols = int(tokens[i + 1]), int(tokens[i + 2])
        activation = tokens[i + 3]
        if activation not in ACTIVATIONS:
            sys.exit(f"unknown activation {activation!r}")
        i += 4
        need = rows * cols + rows
        values = [float(t) for t in tokens[i : i + need]]
        if len(values) != need:
            sys.exit(f"layer {len(layers)}: expected {need} numbers, got {len(values)}")
        i += need
        layers.append((rows, cols, activation, values[: rows * cols], values[rows * cols :]))

    with open(out_path, "wb") as f:
        f.write(b"MLP1")
        f.write(struct.pack("<I", len(layers)))
        for rows, cols, activation, weights, biases in layers:
            f.write(struct.pack("<II", rows, cols))
            f.write(struct.pack("<B", ACTIVATIONS[activation]))
            f.write(struct.pack(f"<{len(weights)}d", *weights))
            f.write(struct.pack(f"<{len(biases)}d", *biases))
    total = sum(r * c + r for r, c, _, _, _ in layers)
    print(f"wrote {out_path}: {len(layers)} layers, {total} parameters")


if __name__ == "__main__":
    main()
