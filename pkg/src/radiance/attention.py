from __future__ import annotations
import math

from src.autodiff import ops
from src.autodiff.tensor import Tensor
from src.autodiff.layers import Linear
from src.autodiff.parameters import ParameterStore
from src.encoding import QueryProjection
from src.radiance.codebook import LatentCodebook


class AttentionInterpolator:
    """Multi-head attention from point queries over a latent codebook.

    Per head h, weights = softmax(q_h K_h^T / sqrt(d_h)) over the B codes
    and output_h = weights V_h. Heads are concatenated and merged by a
    linear projection. With `literal_scaling` the logits are left
    unscaled and the attention output is divided by sqrt(d_h) instead.
    """

    def __init__(self,
                 store: ParameterStore,
                 name: str,
                 d_query_in: int,
                 F: int,
                 heads: int,
                 d_h: int,
                 d_out: int,
                 literal_scaling: bool=False):
        self.heads = heads
        self.d_h = d_h
        self.d_out = d_out
        self.literal_scaling = literal_scaling
        width = heads * d_h
        self.query = QueryProjection(store, f'{name}.query', d_query_in,
                                     width)
        self.key = Linear(store, f'{name}.key', F, width, 'attention')
        self.value = Linear(store, f'{name}.value', F, width, 'attention')
        self.merge = Linear(store, f'{name}.merge', width, d_out,
                            'mlp_early')

    def _heads(self, projected: Tensor) -> Tensor:
        """[B, heads * d_h] -> [B, heads, d_h]"""

        return ops.reshape(projected, (projected.shape[0], self.heads,
                                       self.d_h))

    def query_weights(self, query: Tensor, codes: Tensor) -> Tensor:
        """Attention weights `[P, heads, B]` for projected queries."""

        P = query.shape[0]
        q = ops.reshape(query, (P, self.heads, 1, self.d_h))
        k = ops.transpose(self._heads(self.key(codes)), (1, 2, 0))
        logits = ops.matmul(q, k)
        if not self.literal_scaling:
            logits = ops.scale(logits, 1.0 / math.sqrt(self.d_h))
        weights = ops.softmax(logits, axis=-1)
        return ops.reshape(weights, (P, self.heads, codes.shape[0]))

    def weights(self, query_enc: Tensor, codes: Tensor) -> Tensor:
        return self.query_weights(self.query(query_enc), codes)

    def attend_query(self, query: Tensor, codes: Tensor) -> Tensor:
        P, B = query.shape[0], codes.shape[0]
        weights = ops.reshape(self.query_weights(query, codes),
                              (P, self.heads, 1, B))
        v = ops.transpose(self._heads(self.value(codes)), (1, 0, 2))
        out = ops.matmul(weights, v)
        if self.literal_scaling:
            out = ops.scale(out, 1.0 / math.sqrt(self.d_h))
        out = ops.reshape(out, (P, self.heads * self.d_h))
        return self.merge(out)

    def __call__(self, query_enc: Tensor, codes: Tensor) -> Tensor:
        return self.attend_query(self.query(query_enc), codes)


def attend(p_query: Tensor,
           codebook: LatentCodebook,
           interp: AttentionInterpolator) -> Tensor:
    """Interpolated feature `[P, d_out]` for queries from `project_query`."""

    return interp.attend_query(p_query, codebook.codes)
