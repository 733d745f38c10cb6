"""
Transformer model predictor: joint encoding of training and test tokens,
single-query decoding and the linear split into classifier and box-regressor
weights. Layers are post-norm; positional encodings are added to queries and
keys, never to values.
"""
from typing import Optional, Tuple

import torch
from torch import nn
from torch.nn import functional as F

from tompTracker.config import TransformerConfig
from tompTracker.Models.Fields.tokenSequence import (
    PredictedWeights,
    TokenSequence
)


class EncoderLayer(nn.Module):

    def __init__(self, channels: int, heads: int, ffn_width: int,
                 dropout: float):
        super(EncoderLayer, self).__init__()
        self.self_attn = nn.MultiheadAttention(channels, heads,
                                               dropout=dropout,
                                               batch_first=True)
        self.linear1 = nn.Linear(channels, ffn_width)
        self.linear2 = nn.Linear(ffn_width, channels)
        self.norm1 = nn.LayerNorm(channels)
        self.norm2 = nn.LayerNorm(channels)
        self.dropout = nn.Dropout(dropout)
        self.dropout1 = nn.Dropout(dropout)
        self.dropout2 = nn.Dropout(dropout)

    def forward(self, src: torch.Tensor, pos: torch.Tensor,
                padding_mask: torch.Tensor) -> torch.Tensor:
        q = k = src + pos
        attended = self.self_attn(q, k, value=src,
                                  key_padding_mask=padding_mask,
                                  need_weights=False)[0]
        src = self.norm1(src + self.dropout1(attended))
        hidden = self.linear2(self.dropout(F.relu(self.linear1(src))))
        return self.norm2(src + self.dropout2(hidden))


class DecoderLayer(nn.Module):

    def __init__(self, channels: int, heads: int, ffn_width: int,
                 dropout: float):
        super(DecoderLayer, self).__init__()
        self.self_attn = nn.MultiheadAttention(channels, heads,
                                               dropout=dropout,
                                               batch_first=True)
        self.cross_attn = nn.MultiheadAttention(channels, heads,
                                                dropout=dropout,
                                                batch_first=True)
        self.linear1 = nn.Linear(channels, ffn_width)
        self.linear2 = nn.Linear(ffn_width, channels)
        self.norm1 = nn.LayerNorm(channels)
        self.norm2 = nn.LayerNorm(channels)
        self.norm3 = nn.LayerNorm(channels)
        self.dropout = nn.Dropout(dropout)
        self.dropout1 = nn.Dropout(dropout)
        self.dropout2 = nn.Dropout(dropout)
        self.dropout3 = nn.Dropout(dropout)

    def forward(self, tgt: torch.Tensor, memory: torch.Tensor,
                query_pos: torch.Tensor, pos: torch.Tensor,
                padding_mask: torch.Tensor):
        q = k = tgt + query_pos
        attended = self.self_attn(q, k, value=tgt, need_weights=False)[0]
        tgt = self.norm1(tgt + self.dropout1(attended))
        attended, weights = self.cross_attn(tgt + query_pos, memory + pos,
                                            value=memory,
                                            key_padding_mask=padding_mask)
        tgt = self.norm2(tgt + self.dropout2(attended))
        hidden = self.linear2(self.dropout(F.relu(self.linear1(tgt))))
        return self.norm3(tgt + self.dropout3(hidden)), weights


class ModelPredictor(nn.Module):

    def __init__(self, channels: int = 256,
                 config: Optional[TransformerConfig] = None):
        super(ModelPredictor, self).__init__()
        config = config or TransformerConfig()
        self.config = config
        args = (channels, config.heads, config.ffn_width, config.dropout)
        self.encoder_layers = nn.ModuleList(
            [EncoderLayer(*args) for _ in range(config.enc_layers)])
        self.decoder_layers = nn.ModuleList(
            [DecoderLayer(*args) for _ in range(config.dec_layers)])
        self.decoder_norm = nn.LayerNorm(channels)
        self.split = nn.Linear(channels, 2 * channels)

        # Decoder queries used instead of e_fg
        self.queries = None
        if config.two_queries:
            self.queries = nn.Parameter(torch.randn(2, channels))
        elif not config.shared_query:
            self.queries = nn.Parameter(torch.randn(1, channels))

    def encode_joint(self, seq: TokenSequence) -> TokenSequence:
        if seq.tokens.shape[:2] != seq.padding_mask.shape:
            raise ValueError("Token sequence and padding mask disagree")
        src = seq.tokens
        pos = seq.pos.unsqueeze(0)
        for layer in self.encoder_layers:
            src = layer(src, pos, seq.padding_mask)
        src = src.masked_fill(seq.padding_mask.unsqueeze(-1), 0.0)
        return seq.with_tokens(src)

    def decode_model(self, z: TokenSequence, e_fg: torch.Tensor,
                     return_attention: bool = False):
        """
        Cross-attend the decoder query over the encoded tokens.

        Returns:
            (B, C) weights, or (B, 2, C) with two queries; with
            return_attention also the last layer's (B, Q, L) attention.
        """
        batch, _, channels = z.tokens.shape
        query = self.queries if self.queries is not None \
            else e_fg.view(1, channels)
        query_pos = query.unsqueeze(0).expand(batch, -1, -1)
        tgt = torch.zeros_like(query_pos)
        pos = z.pos.unsqueeze(0)
        weights = None
        for layer in self.decoder_layers:
            tgt, weights = layer(tgt, z.tokens, query_pos, pos,
                                 z.padding_mask)
        out = self.decoder_norm(tgt)
        if out.shape[1] == 1:
            out = out[:, 0]
        if return_attention:
            return out, weights
        return out

    def split_weights(self, w: torch.Tensor) -> PredictedWeights:
        w_cls, w_bbreg = self.split(w).chunk(2, dim=-1)
        return PredictedWeights(w_cls, w_bbreg)

    def forward(self, seq: TokenSequence,
                e_fg: torch.Tensor) -> Tuple[PredictedWeights, torch.Tensor]:
        """
        Returns:
            predicted weights and the encoded test features (B, C, H, W)
        """
        z = self.encode_joint(seq)
        w = self.decode_model(z, e_fg)
        if w.dim() == 3:
            first = self.split_weights(w[:, 0])
            second = self.split_weights(w[:, 1])
            weights = PredictedWeights(first.w_cls, second.w_bbreg)
        else:
            weights = self.split_weights(w)
        return weights, z.test_tokens()
