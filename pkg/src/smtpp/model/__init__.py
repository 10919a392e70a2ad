"""Image-to-sequence transcription model."""

from smtpp.model.checkpoint import load_checkpoint, read_checkpoint, save_checkpoint
from smtpp.model.config import DecoderConfig, EncoderConfig, ModelConfig
from smtpp.model.decoder import Decoder, causal_mask
from smtpp.model.encoder import build_encoder, encoder_forward, pad_to_multiple
from smtpp.model.gradcheck import gradient_check, linear_gradient_check
from smtpp.model.network import SMTModel, argmax_lowest, greedy_decode, init_uniform_, to_tensor
from smtpp.model.positional import flatten, output_shape, positional_encoding_1d, positional_encoding_2d, unflatten
from smtpp.model.training import make_batch, make_optimizer, sequence_loss, train_step

__all__ = [
    "load_checkpoint", "read_checkpoint", "save_checkpoint",
    "DecoderConfig", "EncoderConfig", "ModelConfig", "Decoder", "causal_mask",
    "build_encoder", "encoder_forward", "pad_to_multiple",
    "gradient_check", "linear_gradient_check",
    "SMTModel", "argmax_lowest", "greedy_decode", "init_uniform_", "to_tensor",
    "flatten", "output_shape", "positional_encoding_1d", "positional_encoding_2d", "unflatten",
    "make_batch", "make_optimizer", "sequence_loss", "train_step",
]
