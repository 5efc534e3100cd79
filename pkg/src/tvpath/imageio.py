"""Reading and writing PNG / PGM / PPM images as float arrays in [0, 1]."""
from pathlib import Path

import numpy as np
from PIL import Image

SUPPORTED_SUFFIXES = (".png", ".pgm", ".ppm", ".pnm")
# ITU-R BT.601 luma weights.
LUMA = np.array([0.299, 0.587, 0.114])


class ImageFormatError(ValueError):
    pass


def is_supported(path) -> bool:
    return Path(path).suffix.lower() in SUPPORTED_SUFFIXES


def to_gray(rgb):
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb[..., :3] @ LUMA


def read_image(path, color="auto"):
    """Load ``path`` as float64 in [0, 1].

    ``color``: 'auto' keeps the file's layout, 'gray' converts colour with the
    BT.601 weights, 'rgb' replicates a single channel three times.
    """
    if color not in ("auto", "gray", "rgb"):
        raise ValueError(f"color must be auto, gray or rgb, got {color!r}")
    path = Path(path)
    if not is_supported(path):
        raise ImageFormatError(f"unsupported format: {path.suffix or '(none)'}")
    with Image.open(path) as im:
        im.load()
        mode = im.mode
        if mode in ("1", "L"):
            arr = np.asarray(im, dtype=np.float64)
            arr = arr if mode == "1" else arr / 255.0
        elif mode.startswith("I"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif mode == "LA":
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    if arr.ndim == 3 and color == "gray":
        arr = to_gray(arr)
    elif arr.ndim == 2 and color == "rgb":
        arr = np.repeat(arr[..., None], 3, axis=2)
    return np.clip(arr, 0.0, 1.0)


def quantize(img):
    """``round(img * 255)`` clamped to [0, 255] as uint8."""
    return np.clip(np.rint(np.asarray(img, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_image(path, img):
    path = Path(path)
    q = quantize(img)
    if q.ndim == 3 and q.shape[2] == 1:
        q = q[..., 0]
    suffix = path.suffix.lower()
    if suffix == ".png":
        Image.fromarray(q).save(path, format="PNG")
    elif suffix in (".pgm", ".ppm", ".pnm"):
        Image.fromarray(q).save(path, format="PPM")
    else:
        raise ImageFormatError(f"cannot write {suffix}")
