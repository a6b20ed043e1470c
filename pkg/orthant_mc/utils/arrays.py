"""
Small numpy helpers
"""
import numpy as np


def readonly(array: np.ndarray) -> np.ndarray:
    """Contiguous private copy with the write flag cleared"""
    array = np.array(array, copy=True, order="C")
    array.flags.writeable = False
    return array
