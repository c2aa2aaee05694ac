"""Codec-sandwich image compression: a pre-processing network and a
super-resolution-style post-processing network wrapped around baseline
JPEG, trained with an edge-aware loss, plus the rate-distortion
evaluation stack (PSNR, SSIM, MS-SSIM, PSNRB, mIoU, BD metrics)."""

from edgepress._core import (
    Model,
    bd_psnr,
    bd_rate,
    bits_per_pixel,
    canny,
    edge_aware_loss,
    edge_density,
    jpeg_decode,
    jpeg_encode,
    jpeg_reference_roundtrip,
    miou,
    mse_loss,
    ms_ssim,
    psnr,
    psnrb,
    quant_table,
    ssim,
    train,
)

__all__ = [
    "Model",
    "bd_psnr",
    "bd_rate",
    "bits_per_pixel",
    "canny",
    "edge_aware_loss",
    "edge_density",
    "jpeg_decode",
    "jpeg_encode",
    "jpeg_reference_roundtrip",
    "miou",
    "mse_loss",
    "ms_ssim",
    "psnr",
    "psnrb",
    "quant_table",
    "ssim",
    "train",
]

__version__ = "0.1.0"
