"""Data augmentation by a transformation group."""
from __future__ import annotations

import numpy as np

from ..transforms import as_image_stack, enumerate_group


def augment_dataset(images, labels, group):
    """Every ``(T x_i, y_i)`` for every enumerated ``T``.

    Output is sample-major: the ``|G|`` copies of ``x_0`` come first, the
    identity copy leading each block.
    """
    images = as_image_stack(images)
    labels = np.asarray(labels)
    if len(labels) != len(images):
        raise ValueError("images and labels differ in length")
    elements = enumerate_group(group, images.shape[1:])
    out = np.stack([t.apply(x) for x in images for t in elements])
    return out, np.repeat(labels, len(elements))
