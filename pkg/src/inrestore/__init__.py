"""Single-image restoration by fitting a sine-activated coordinate network.

A network mapping pixel coordinates to RGB is fit directly to one corrupted
observation through the linear operator that produced it (identity,
lanczos2 downsampling, Bernoulli masking, or Gaussian blur); no training
dataset is involved.  See the README for the CLI.
"""

from .degradations import (
    Blur,
    BlurKernel,
    CoordGrid,
    DegradationOp,
    Downsample,
    Identity,
    Mask,
    add_gaussian_noise,
    gaussian_kernel,
    make_coord_grid,
    sample_mask,
)
from .image_io import (
    ImageFormatError,
    UnsupportedBitDepthError,
    load_image,
    load_mask,
    save_image,
    save_mask,
    write_trace,
)
from .metrics import psnr, ssim
from .network import (
    Activation,
    ForwardTape,
    LayerParams,
    Network,
    PositionalEncoding,
    RawCoords,
    backward,
    encode,
    forward,
    init_network,
)
from .numerics import Rng, matmul
from .restoration import (
    AdamState,
    NonFiniteLossError,
    RestorationResult,
    TaskSpec,
    TraceRow,
    TrainConfig,
    TrainTrace,
    adam_step,
    loss_and_grads,
    render,
    restore,
)

__version__ = "0.1.0"
