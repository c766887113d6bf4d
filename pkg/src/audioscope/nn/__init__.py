from . import kernels
from .checkpoint import (load_checkpoint, load_checkpoint_file,
                         save_checkpoint, save_checkpoint_file)
from .layers import (Conv2D, Dense, Dropout, Flatten, Layer, MaxPool2D, ReLU,
                     Softmax, softmax, softmax_cross_entropy)
from .model import (CONV_FILTERS, CONV_KERNELS, DIGIT_LABELS,
                    MODEL_INPUT_SHAPE, ForwardTrace, Model, build_model,
                    conv_block_layer_indices)
from .optim import AdamState, adam_step

__all__ = [
    "kernels", "Conv2D", "Dense", "Dropout", "Flatten", "Layer", "MaxPool2D",
    "ReLU", "Softmax", "softmax", "softmax_cross_entropy", "Model",
    "ForwardTrace", "build_model", "conv_block_layer_indices", "AdamState",
    "adam_step", "save_checkpoint", "load_checkpoint", "save_checkpoint_file",
    "load_checkpoint_file", "DIGIT_LABELS", "MODEL_INPUT_SHAPE",
    "CONV_FILTERS", "CONV_KERNELS",
]
