"""BICM-ID link simulation over block Rayleigh fading."""

from .bicmid import BerPoint, SimConfig, SimulationGuardError, genie_floor, run_bicmid
from .channel import ChannelKind, channel, ebn0_to_n0, modulate
from .coding import bcjr_decode, conv_encode, viterbi_decode
from .demapper import demap_extrinsic, demap_genie
from .exit import ExitCurve, exit_decoder, exit_demapper, tunnel_open, tunnel_threshold
from .interleave import deinterleave, interleave

__all__ = [
    "BerPoint", "ChannelKind", "ExitCurve", "SimConfig", "SimulationGuardError",
    "bcjr_decode", "channel", "conv_encode", "deinterleave", "demap_extrinsic",
    "demap_genie", "ebn0_to_n0", "exit_decoder", "exit_demapper", "genie_floor",
    "interleave", "modulate", "run_bicmid", "tunnel_open", "tunnel_threshold",
    "viterbi_decode",
]
