#!/usr/bin/env python3
"""Generates the bundled architecture descriptor files under arch/.

Layer rows are: layer <id> <block> <c_out> <c_in> <k> <groups> <bias> <compressible>
Normalization layers (batch norm / layer norm affine pairs, layer scale) are
modeled as 1x1 depthwise rows so their parameters land in the totals.
"""

import os

OUT = os.path.join(os.path.dirname(__file__), "..", "arch")


class Writer:
    def __init__(self, name, delta_mode="total"):
        self.lines = [f"name {name}", f"delta_mode {delta_mode}", ""]
        self.total = 0
        self.compressible = 0

    def layer(self, lid, block, c_out, c_in, k, groups=1, bias=0, compressible=0):
        assert c_in % groups == 0 and c_out % groups == 0
        self.lines.append(
            f"layer {lid:<28s} {block:<8s} {c_out:>5d} {c_in:>5d} {k} {groups:>4d} {bias} {compressible}"
        )
        params = c_out * (c_in // groups) * k * k + (c_out if bias else 0)
        self.total += params
        if compressible:
            self.compressible += params

    def norm(self, lid, block, channels):
        # scale + shift: a 1x1 depthwise conv with bias
        self.layer(lid, block, channels, channels, 1, groups=channels, bias=1)

    def save(self, filename):
        path = os.path.join(OUT, filename)
        with open(path, "w") as f:
            f.write("\n".join(self.lines) + "\n")
        print(f"{filename}: total={self.total} compressible={self.compressible}")


def resnet_cifar(depth):
    # 6n+2 layers: stem conv + 3 stages of n basic blocks, option-A shortcuts
    n = (depth - 2) // 6
    w = Writer(f"resnet{depth}")
    w.layer("conv1", "stem", 16, 3, 3, bias=0, compressible=1)
    w.norm("bn1", "stem", 16)
    channels = [16, 32, 64]
    for stage, c in enumerate(channels, start=1):
        c_prev = 16 if stage == 1 else channels[stage - 2]
        for block in range(n):
            cin = c_prev if block == 0 else c
            w.layer(f"stage{stage}.{block}.conv1", f"block{stage}", c, cin, 3, compressible=1)
            w.norm(f"stage{stage}.{block}.bn1", f"block{stage}", c)
            w.layer(f"stage{stage}.{block}.conv2", f"block{stage}", c, c, 3, compressible=1)
            w.norm(f"stage{stage}.{block}.bn2", f"block{stage}", c)
    w.layer("fc", "head", 10, 64, 1, bias=1)
    w.save(f"resnet{depth}.arch")


def resnet18():
    w = Writer("resnet18")
    w.layer("conv1", "stem", 64, 3, 7, bias=0, compressible=1)
    w.norm("bn1", "stem", 64)
    channels = [64, 128, 256, 512]
    for stage, c in enumerate(channels, start=1):
        c_prev = 64 if stage == 1 else channels[stage - 2]
        for block in range(2):
            cin = c_prev if block == 0 else c
            tag = f"layer{stage}"
            w.layer(f"{tag}.{block}.conv1", tag, c, cin, 3, compressible=1)
            w.norm(f"{tag}.{block}.bn1", tag, c)
            w.layer(f"{tag}.{block}.conv2", tag, c, c, 3, compressible=1)
            w.norm(f"{tag}.{block}.bn2", tag, c)
            if block == 0 and stage > 1:
                w.layer(f"{tag}.{block}.downsample.conv", tag, c, cin, 1)
                w.norm(f"{tag}.{block}.downsample.bn", tag, c)
    w.layer("fc", "head", 1000, 512, 1, bias=1)
    w.save("resnet18.arch")


def convnext_tiny():
    w = Writer("convnext_tiny", delta_mode="compressible")
    depths = [3, 3, 9, 3]
    dims = [96, 192, 384, 768]
    w.layer("stem.conv", "stem", 96, 3, 4, bias=1)
    w.norm("stem.norm", "stem", 96)
    for stage in range(4):
        c = dims[stage]
        tag = f"stage{stage + 1}"
        if stage > 0:
            w.norm(f"downsample{stage}.norm", tag, dims[stage - 1])
            w.layer(f"downsample{stage}.conv", tag, c, dims[stage - 1], 2, bias=1)
        for block in range(depths[stage]):
            base = f"{tag}.{block}"
            w.layer(f"{base}.dwconv", tag, c, c, 7, groups=c, bias=1, compressible=1)
            w.norm(f"{base}.norm", tag, c)
            w.layer(f"{base}.pwconv1", tag, 4 * c, c, 1, bias=1)
            w.layer(f"{base}.pwconv2", tag, c, 4 * c, 1, bias=1)
            # layer scale: one gamma per channel
            w.layer(f"{base}.gamma", tag, c, c, 1, groups=c, bias=0)
    w.norm("head.norm", "head", 768)
    w.layer("head.fc", "head", 1000, 768, 1, bias=1)
    w.save("convnext_tiny.arch")


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    resnet_cifar(20)
    resnet_cifar(32)
    resnet18()
    convnext_tiny()
