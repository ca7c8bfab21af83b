import math
import unittest as ut

import numpy as np
from scipy.special import softmax

from src.autodiff.gradcheck import check_gradients
from src.autodiff.parameters import ParameterStore
from src.autodiff.tensor import Tensor, precision
from src.radiance import AttentionInterpolator, LatentCodebook, attend
from tests.utils import get_test_methods


def make_interp(heads: int=2,
                d_h: int=3,
                F: int=4,
                d_in: int=5,
                literal: bool=False,
                seed: int=0) -> AttentionInterpolator:
    store = ParameterStore(dtype=np.float64, seed=seed)
    return AttentionInterpolator(store, 'attention', d_in, F, heads, d_h, 6,
                                 literal_scaling=literal)


def affine(x: np.ndarray, layer) -> np.ndarray:
    return x @ layer.weight.data + layer.bias.data


def dense_oracle(interp: AttentionInterpolator,
                 enc: np.ndarray,
                 codes: np.ndarray) -> np.ndarray:
    q = affine(enc, interp.query)
    k = affine(codes, interp.key)
    v = affine(codes, interp.value)
    outputs = []
    for h in range(interp.heads):
        sl = slice(h * interp.d_h, (h + 1) * interp.d_h)
        logits = q[:, sl] @ k[:, sl].T
        if interp.literal_scaling:
            out = softmax(logits, axis=-1) @ v[:, sl] / math.sqrt(interp.d_h)
        else:
            out = softmax(logits / math.sqrt(interp.d_h), axis=-1) @ v[:, sl]
        outputs.append(out)
    return affine(np.concatenate(outputs, axis=-1), interp.merge)


class TestAttend(ut.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.enc = Tensor.wrap(self.rng.normal(size=(7, 5)))

    def test_single_code(self):
        interp = make_interp()
        codes = Tensor.wrap(self.rng.normal(size=(1, 4)))
        out = interp(self.enc, codes).data
        expected = affine(affine(codes.data, interp.value), interp.merge)
        for row in out:
            np.testing.assert_allclose(row, expected[0])

    def test_identical_codes(self):
        interp = make_interp()
        code = self.rng.normal(size=(1, 4))
        single = interp(self.enc, Tensor.wrap(code)).data
        pair = Tensor.wrap(np.concatenate([code, code]))
        np.testing.assert_allclose(interp.weights(self.enc, pair).data, 0.5)
        np.testing.assert_allclose(interp(self.enc, pair).data, single)

    def test_dense_oracle(self):
        interp = make_interp(heads=1, d_h=4)
        codes = self.rng.normal(size=(3, 4))
        np.testing.assert_allclose(
            interp(self.enc, Tensor.wrap(codes)).data,
            dense_oracle(interp, self.enc.data, codes)
        )

    def test_multi_head_oracle(self):
        interp = make_interp(heads=3, d_h=2)
        codes = self.rng.normal(size=(6, 4))
        np.testing.assert_allclose(
            interp(self.enc, Tensor.wrap(codes)).data,
            dense_oracle(interp, self.enc.data, codes)
        )

    def test_literal_scaling(self):
        interp = make_interp(heads=2, d_h=3, literal=True)
        codes = self.rng.normal(size=(5, 4))
        np.testing.assert_allclose(
            interp(self.enc, Tensor.wrap(codes)).data,
            dense_oracle(interp, self.enc.data, codes)
        )

    def test_weights_are_distributions(self):
        interp = make_interp(heads=2)
        weights = interp.weights(self.enc,
                                 Tensor.wrap(self.rng.normal(size=(9, 4))))
        self.assertEqual(weights.shape, (7, 2, 9))
        self.assertTrue(np.all(weights.data >= 0.0))
        self.assertTrue(np.all(np.abs(weights.data.sum(axis=-1) - 1.0)
                               < 1e-6))

    def test_permutation_equivariance(self):
        interp = make_interp()
        codes = self.rng.normal(size=(8, 4))
        order = self.rng.permutation(8)
        np.testing.assert_allclose(
            interp(self.enc, Tensor.wrap(codes)).data,
            interp(self.enc, Tensor.wrap(codes[order])).data
        )

    def test_attend_uses_codebook(self):
        store = ParameterStore(dtype=np.float64, seed=2)
        codebook = LatentCodebook(store, 'codebook', 4, 4)
        interp = AttentionInterpolator(store, 'attention', 5, 4, 2, 3, 6)
        query = interp.query(self.enc)
        np.testing.assert_allclose(attend(query, codebook, interp).data,
                                   interp(self.enc, codebook.codes).data)

    def test_gradients(self):
        store = ParameterStore(dtype=np.float64, seed=3)
        codebook = LatentCodebook(store, 'codebook', 4, 4, std=1.0)
        interp = AttentionInterpolator(store, 'attention', 5, 4, 2, 3, 6)
        enc = Tensor(self.rng.normal(size=(3, 5)), requires_grad=True,
                     dtype=np.float64)
        with precision(64):
            result = check_gradients(
                lambda e, c, k: interp(e, c),
                [enc, codebook.codes, interp.key.weight]
            )
        self.assertTrue(result.passed, str(result))


def suite() -> ut.TestSuite:
    suite = ut.TestSuite()
    test_cases: list[ut.TestCase] = [
        TestAttend
    ]

    for test_case in test_cases:
        methods = get_test_methods(test_case)
        suite.addTests(methods)

    return suite


if __name__ == '__main__':
    runner = ut.TextTestRunner()
    runner.run(suite())
