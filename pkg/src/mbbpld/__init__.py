"""Multiple-bases belief-propagation list decoding for quantum LDPC CSS codes."""

__version__ = "0.1.0"

from .bp import BpConfig, BpDecoder, BpOutcome, decode, decode_serial
from .codes import CssCode, FailureTest, build_bivariate_bicycle, load_preset, validate_css
from .gf2 import SparseBinaryMatrix, mat_vec_mod2, rank_mod2
from .mbbp import MbbpDecoder, MbbpOutcome, fws_select, mbbp_decode
from .subtree import build_augmented_bases, build_partition, build_partitions
from .tanner import TannerGraph

__all__ = [
    "BpConfig", "BpDecoder", "BpOutcome", "CssCode", "FailureTest", "MbbpDecoder",
    "MbbpOutcome", "SparseBinaryMatrix", "TannerGraph", "build_augmented_bases",
    "build_bivariate_bicycle", "build_partition", "build_partitions", "decode",
    "decode_serial", "fws_select", "load_preset", "mat_vec_mod2", "mbbp_decode",
    "rank_mod2", "validate_css",
]
