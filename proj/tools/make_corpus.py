#!/usr/bin/env python3
# Copyright 2026 The musex Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Exports 512x512 natural grayscale images bundled with scikit-image as PGM."""

import argparse
import pathlib
import sys

IMAGES = ("camera", "astronaut", "moon", "immunohistochemistry")


def to_gray(image):
    import numpy as np

    if image.ndim == 2:
        return image.astype(np.uint8)
    rgb = image[..., :3].astype(np.float64)
    # ITU-R BT.601 luma
    gray = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("output", type=pathlib.Path)
    args = parser.parse_args()
    try:
        import skimage.data
    except ImportError:
        print("scikit-image is not installed; no corpus written", file=sys.stderr)
        return 1
    args.output.mkdir(parents=True, exist_ok=True)
    for name in IMAGES:
        gray = to_gray(getattr(skimage.data, name)())
        if gray.shape != (512, 512):
            print(f"skipping {name}: shape {gray.shape}", file=sys.stderr)
            continue
        path = args.output / f"{name}.pgm"
        with open(path, "wb") as f:
            f.write(b"P5\n%d %d\n255\n" % (gray.shape[1], gray.shape[0]))
            f.write(gray.tobytes())
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
