import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from microbeam.dsp import Spectrogram
from microbeam.errors import DomainError, StructuralError
from microbeam.features import (dominant_eigenpairs, extract, fit, fit_model, fuse, image_covariance,
                                normalize, project, reconstruct, to_db)


def spec(power, angle=75.0):
    return Spectrogram(power=np.asarray(power, dtype=float), look_angle_deg=angle, hop=31, window_kind="hamming")


def random_specs(n, F=12, T=9, seed=0):
    rng = np.random.default_rng(seed)
    return [spec(rng.exponential(size=(F, T)) + 1e-3) for _ in range(n)]


def covariance_oracle(images):
    F, T = images[0].shape
    C = np.zeros((T, T))
    for S in images:
        for a in range(T):
            for b in range(T):
                for f in range(F):
                    C[a, b] += S[f, a] * S[f, b]
    return C


def test_normalize_against_own_db_is_zero():
    s = random_specs(1)[0]
    assert not np.any(normalize(s, to_db(s)))


def test_normalize_with_zero_mean_is_db():
    s = random_specs(1)[0]
    np.testing.assert_array_equal(normalize(s, np.zeros(s.shape)), to_db(s))


@given(st.integers(0, 2**31))
@settings(max_examples=30)
def test_db_dynamic_range_capped(seed):
    rng = np.random.default_rng(seed)
    power = rng.exponential(size=(8, 8)) * 10.0 ** rng.uniform(-12, 3, size=(8, 8))
    db = to_db(power)
    assert db.max() - db.min() <= 60.0 + 1e-9


def test_db_rejects_all_zero():
    with pytest.raises(DomainError):
        to_db(np.zeros((4, 4)))


def test_normalize_shape_mismatch():
    with pytest.raises(StructuralError):
        normalize(random_specs(1)[0], np.zeros((3, 3)))


def test_single_entry_covariance_is_rank_one():
    S = np.zeros((5, 4))
    S[2, 1] = 3.0
    C = image_covariance([S])
    expected = np.zeros((4, 4))
    expected[1, 1] = 9.0
    np.testing.assert_array_equal(C, expected)
    values, _ = dominant_eigenpairs(C, 1)
    assert values[0] == pytest.approx(9.0)


def test_two_example_covariance_matches_triple_loop():
    rng = np.random.default_rng(1)
    images = [rng.standard_normal((6, 5)) for _ in range(2)]
    np.testing.assert_allclose(image_covariance(images), covariance_oracle(images), atol=1e-10)


def test_covariance_symmetric_and_psd():
    rng = np.random.default_rng(2)
    C = image_covariance([rng.standard_normal((20, 11)) for _ in range(7)])
    np.testing.assert_array_equal(C, C.T)
    assert np.linalg.eigvalsh(C).min() >= -1e-9


def test_fit_model_properties():
    specs = random_specs(10)
    model = fit_model(specs, 3)
    np.testing.assert_allclose(model.basis.T @ model.basis, np.eye(3), atol=1e-9)
    assert np.all(np.diff(model.eigenvalues) <= 0)
    assert model.basis.shape == (9, 3)
    assert model.mean_image.shape == (12, 9)
    np.testing.assert_allclose(model.mean_image, np.mean([to_db(s) for s in specs], axis=0))


def test_sign_canonicalization_and_determinism():
    specs = random_specs(8)
    a, b = fit_model(specs, 4), fit_model(specs, 4)
    assert a.basis.tobytes() == b.basis.tobytes()
    for col in a.basis.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_k_out_of_range():
    with pytest.raises(DomainError):
        fit_model(random_specs(3), 0)
    with pytest.raises(DomainError):
        fit_model(random_specs(3), 10)
    with pytest.raises(DomainError):
        fit([], 1)


def test_energy_capture_monotone_and_complete():
    specs = random_specs(6)
    db = np.stack([to_db(s) for s in specs])
    C = image_covariance(list(db - db.mean(axis=0)))
    sums = [fit_model(specs, k).eigenvalues.sum() for k in range(1, 10)]
    assert all(b >= a for a, b in zip(sums, sums[1:]))
    assert sums[-1] == pytest.approx(np.trace(C), rel=1e-9)


def test_full_basis_reconstruction():
    specs = random_specs(6)
    model = fit_model(specs, 9)
    for s in specs:
        centred = normalize(s, model.mean_image)
        rec = reconstruct(project(s, model), model)
        assert np.linalg.norm(rec - centred) <= 1e-8 * np.linalg.norm(centred)


def test_reconstruction_error_non_increasing_in_k():
    specs = random_specs(6)
    errors = []
    for k in range(1, 10):
        model = fit_model(specs, k)
        errors.append([np.linalg.norm(reconstruct(project(s, model), model) - normalize(s, model.mean_image))
                       for s in specs])
    errors = np.array(errors)
    assert np.all(np.diff(errors, axis=0) <= 1e-9)


def test_null_space_projection_is_zero():
    # two centred images span at most a rank-deficient covariance over 9 time columns
    specs = random_specs(2, F=3, T=9)
    model = fit_model(specs, 9)
    null = model.eigenvalues < 1e-10 * model.eigenvalues[0]
    assert null.any()
    for s in specs:
        proj = project(s, model)
        np.testing.assert_allclose(proj[:, null], 0.0, atol=1e-8)


def test_projection_shape_full_scale():
    rng = np.random.default_rng(3)
    specs = [spec(rng.exponential(size=(128, 384)) + 1e-3) for _ in range(3)]
    model = fit_model(specs, 2)
    assert project(specs[0], model).shape == (128, 2)


def test_fit_builds_independent_models_per_angle():
    a, b = random_specs(5, seed=1), random_specs(5, seed=2)
    training = [((x, y), 1 + i % 2) for i, (x, y) in enumerate(zip(a, b))]
    m1, m2 = fit(training, 2)
    np.testing.assert_array_equal(m1.basis, fit_model(a, 2).basis)
    np.testing.assert_array_equal(m2.basis, fit_model(b, 2).basis)


@pytest.mark.parametrize("k,length", [(1, 256), (2, 512)])
def test_fused_length(k, length):
    proj = np.ones((128, k))
    assert fuse(proj, proj).values.shape == (length,)


def test_fuse_order_and_zero():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = -a
    np.testing.assert_array_equal(fuse(a, b).values, [1, 3, 2, 4, -1, -3, -2, -4])
    assert not np.any(fuse(np.zeros((4, 2)), np.zeros((4, 2))).values)
    with pytest.raises(StructuralError):
        fuse(np.zeros((4, 2)), np.zeros((4, 1)))


def test_extract_carries_label():
    specs = random_specs(4)
    models = fit([((s, s), 1) for s in specs], 1)
    f = extract((specs[0], specs[1]), models, label=2)
    assert f.label == 2 and f.values.shape == (24,)
