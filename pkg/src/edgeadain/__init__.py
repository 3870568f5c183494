"""Edge-AdaIN: style-transfer based vessel segmentation for X-ray angiograms."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .core import ChannelStats, channel_stats, random_crop, read_image, to_gray, write_image
from .stylenet import adain, build_network, decode, encode, encode_taps, fuse, stylize

__all__ = [
    "BACKEND",
    "ChannelStats",
    "adain",
    "build_network",
    "channel_stats",
    "decode",
    "encode",
    "encode_taps",
    "fuse",
    "random_crop",
    "read_image",
    "stylize",
    "to_gray",
    "write_image",
]
