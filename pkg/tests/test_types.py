import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsmix import (
    AugConfig,
    ClassMap,
    DomainError,
    ImageTensor,
    MixMask,
    SaliencyMap,
    SuperpixelGrid,
    argmax_decode,
    minmax_normalize,
    one_hot,
)


class TestImageTensor:
    def test_valid_rgb(self):
        t = ImageTensor(np.zeros((4, 5, 3)))
        assert (t.height, t.width, t.channels) == (4, 5, 3)

    def test_data_is_read_only_copy(self):
        src = np.zeros((2, 2, 1))
        t = ImageTensor(src)
        src[0, 0, 0] = 1.0
        assert t.data[0, 0, 0] == 0.0
        with pytest.raises(ValueError):
            t.data[0, 0, 0] = 0.5

    @pytest.mark.parametrize(
        "data",
        [
            np.zeros((4, 4)),
            np.zeros((4, 4, 2)),
            np.full((2, 2, 1), 1.5),
            np.full((2, 2, 1), -0.1),
            np.full((2, 2, 1), np.nan),
        ],
    )
    def test_rejects_bad_data(self, data):
        with pytest.raises(DomainError):
            ImageTensor(data)


class TestClassMap:
    def test_hard_flag_enforced(self):
        with pytest.raises(DomainError):
            ClassMap(np.full((2, 2, 2), 0.5), hard=True)

    def test_sum_to_one_enforced(self):
        bad = np.zeros((2, 2, 2))
        bad[..., 0] = 0.7
        bad[..., 1] = 0.2
        with pytest.raises(DomainError):
            ClassMap(bad)

    def test_soft_values_ok(self):
        data = np.stack([np.full((2, 2), 0.3), np.full((2, 2), 0.7)], axis=2)
        m = ClassMap(data)
        assert m.num_classes == 2 and not m.hard


class TestSuperpixelGrid:
    def test_rejects_gap_in_labels(self):
        labels = np.array([[0, 0], [2, 2]])
        with pytest.raises(DomainError):
            SuperpixelGrid(labels, 3)

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            SuperpixelGrid(np.array([[0, 1]]), 1)

    def test_valid(self):
        g = SuperpixelGrid(np.array([[0, 1], [0, 1]]), 2)
        assert g.num_labels == 2


class TestMixMask:
    def test_hard_must_be_binary(self):
        with pytest.raises(DomainError):
            MixMask(np.full((2, 2), 0.5), "hard")

    def test_soft_accepts_fractions(self):
        m = MixMask(np.full((2, 2), 0.5), "soft")
        assert m.kind == "soft"

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            MixMask(np.zeros((2, 2)), "fuzzy")


class TestAugConfig:
    def test_defaults_valid(self):
        cfg = AugConfig()
        assert cfg.square_cells() is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"l_min": 0},
            {"l_min": 10, "l_max": 5},
            {"p": 0.0},
            {"p": 1.0},
            {"compactness": 0.0},
            {"slic_iters": 0},
            {"epsilon": -1.0},
            {"grid_strategy": "hex"},
            {"grid_strategy": "square:0"},
            {"grid_strategy": "square:abc"},
            {"lambda_strategy": "fixed"},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(DomainError):
            AugConfig(**kwargs)

    def test_square_cells_parsed(self):
        assert AugConfig(grid_strategy="square:7").square_cells() == 7


class TestOneHot:
    def test_single_pixel(self):
        m = one_hot(np.array([[0]]), 2)
        assert m.data[0, 0].tolist() == [1.0, 0.0]

    def test_all_ones_mask(self):
        m = one_hot(np.ones((2, 2), dtype=np.int64), 2)
        assert (m.data[..., 1] == 1.0).all() and (m.data[..., 0] == 0.0).all()

    def test_argmax_recovers_input_oracle(self):
        rng = np.random.default_rng(3)
        ids = rng.integers(0, 3, (4, 4))
        m = one_hot(ids, 3)
        # independent loop oracle
        for r in range(4):
            for c in range(4):
                expect = np.zeros(3)
                expect[ids[r, c]] = 1.0
                assert m.data[r, c].tolist() == expect.tolist()
        assert np.array_equal(argmax_decode(m), ids)

    def test_id_out_of_range(self):
        with pytest.raises(DomainError):
            one_hot(np.array([[2]]), 2)

    def test_rejects_float_ids(self):
        with pytest.raises(DomainError):
            one_hot(np.array([[0.0]]), 2)

    @given(st.integers(0, 2**32))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        ids = rng.integers(0, n, (int(rng.integers(1, 9)), int(rng.integers(1, 9))))
        m = one_hot(ids, n)
        assert np.array_equal(argmax_decode(m), ids)
        assert (m.data.sum(axis=2) == 1.0).all()


class TestArgmaxDecode:
    def test_tie_breaks_low(self):
        m = ClassMap(np.full((1, 1, 2), 0.5))
        assert argmax_decode(m)[0, 0] == 0

    def test_soft_mix_style_map(self):
        # blend of class0 and class1 at fraction 0.4 stays class 0
        data = np.zeros((3, 3, 2))
        data[..., 0] = 0.6
        data[..., 1] = 0.4
        assert (argmax_decode(ClassMap(data)) == 0).all()


class TestMinmaxNormalize:
    def test_affine(self):
        # raw values {2,4,6} scaled into the valid range first
        m = SaliencyMap(np.array([[0.2, 0.4, 0.6]]))
        out = minmax_normalize(m)
        assert np.allclose(out.data, [[0.0, 0.5, 1.0]])

    def test_constant_becomes_half(self):
        out = minmax_normalize(SaliencyMap(np.full((3, 3), 0.7)))
        assert (out.data == 0.5).all()

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        m = minmax_normalize(SaliencyMap(rng.random((5, 5))))
        again = minmax_normalize(m)
        assert np.array_equal(m.data, again.data)

    @given(st.integers(0, 2**32))
    @settings(max_examples=50, deadline=None)
    def test_order_preserving(self, seed):
        rng = np.random.default_rng(seed)
        vals = rng.random((4, 6))
        out = minmax_normalize(SaliencyMap(vals)).data
        flat_in = vals.ravel()
        flat_out = out.ravel()
        order = np.argsort(flat_in, kind="stable")
        assert (np.diff(flat_out[order]) >= 0).all()
