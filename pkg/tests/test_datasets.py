import numpy as np
import pytest
from PIL import Image

from csmc.datasets import (
    RatingsMatrix,
    SyntheticSpec,
    gen_synthetic,
    load_image_gray,
    load_movielens,
    save_image_gray,
)
from csmc.errors import DataError, DomainError, ParseError

ML_HEADER = "userId,movieId,rating,timestamp\n"


def write_ratings(path, rows):
    path.write_text(ML_HEADER + "".join(f"{u},{m},{r},0\n" for u, m, r in rows))


# ------------------------------------------------------------------ synthetic


def test_gen_synthetic_exact_rank_without_noise():
    m = gen_synthetic(SyntheticSpec(30, 40, 3, noise_density=0.0, seed=1))
    s = np.linalg.svd(m, compute_uv=False)
    assert s[2] / s[0] > 1e-10  # full factor rank almost surely
    assert s[3] / s[0] < 1e-12


def test_gen_synthetic_rank_bounded_with_noise():
    for seed in range(5):
        m = gen_synthetic(SyntheticSpec(25, 50, 4, noise_density=0.3, seed=seed))
        s = np.linalg.svd(m, compute_uv=False)
        assert s[4] / s[0] < 1e-10


def test_gen_synthetic_deterministic_replay():
    spec = SyntheticSpec(300, 1000, 5, 0.3, seed=123)
    assert np.array_equal(gen_synthetic(spec), gen_synthetic(spec))


def test_gen_synthetic_noise_density_changes_output():
    clean = gen_synthetic(SyntheticSpec(10, 12, 2, noise_density=0.0, seed=7))
    noisy = gen_synthetic(SyntheticSpec(10, 12, 2, noise_density=0.5, seed=7))
    assert not np.allclose(clean, noisy)


def test_synthetic_spec_validation():
    with pytest.raises(DomainError):
        SyntheticSpec(10, 10, 11)
    with pytest.raises(DomainError):
        SyntheticSpec(10, 10, 2, noise_density=1.5)


# ------------------------------------------------------------------ movielens


def test_load_movielens_no_filtering(tmp_path):
    path = tmp_path / "ratings.csv"
    write_ratings(path, [(1, 10, 4.0), (1, 20, 3.0), (2, 10, 5.0), (3, 20, 2.0)])
    out = load_movielens(path, user_frac=1.0, item_frac=1.0, scale=(0.5, 5.0))
    assert isinstance(out, RatingsMatrix)
    assert out.matrix.shape == (3, 2)
    assert len(out.matrix.mask) == 4
    assert out.user_ids == [1, 2, 3] and out.item_ids == [10, 20]
    assert out.matrix.values[0, 0] == 4.0  # user 1, movie 10


def test_load_movielens_keeps_most_active_users(tmp_path):
    path = tmp_path / "ratings.csv"
    rows = [(1, 10, 3.0), (1, 20, 3.5), (1, 30, 4.0), (2, 10, 2.0), (2, 20, 1.0), (3, 10, 5.0)]
    write_ratings(path, rows)
    out = load_movielens(path, user_frac=0.5, item_frac=1.0)
    # round(0.5 * 3 users) = 2 kept: users 1 and 2 by count
    assert out.user_ids == [1, 2]
    assert out.provenance["ratings_kept"] == 5


def test_load_movielens_tie_breaks_to_smaller_id(tmp_path):
    path = tmp_path / "ratings.csv"
    write_ratings(path, [(2, 10, 3.0), (1, 10, 4.0)])
    out = load_movielens(path, user_frac=0.5, item_frac=1.0)
    assert out.user_ids == [1]


def test_load_movielens_item_filter_runs_after_user_filter(tmp_path):
    path = tmp_path / "ratings.csv"
    rows = [
        (1, 10, 3.0), (1, 20, 3.0), (1, 30, 3.0),
        (2, 10, 3.0), (2, 20, 3.0),
        (3, 30, 3.0), (3, 30 + 1, 3.0),
    ]
    write_ratings(path, rows)
    out = load_movielens(path, user_frac=2 / 3, item_frac=0.5)
    # users 1, 2 survive; their movies are {10, 20, 30}; keep round(1.5) = 2
    assert out.user_ids == [1, 2]
    assert out.item_ids == [10, 20]


def test_load_movielens_errors(tmp_path):
    path = tmp_path / "ratings.csv"
    path.write_text("wrong,header\n")
    with pytest.raises(DataError):
        load_movielens(path)
    path.write_text(ML_HEADER + "1,10,notanumber,0\n")
    with pytest.raises(ParseError) as err:
        load_movielens(path)
    assert err.value.line == 2
    path.write_text(ML_HEADER + "1,10,9.5,0\n")
    with pytest.raises(ParseError):
        load_movielens(path, scale=(0.5, 5.0))
    with pytest.raises(DataError):
        load_movielens(tmp_path / "missing.csv")


def test_load_movielens_sidecar(tmp_path):
    path = tmp_path / "ratings.csv"
    write_ratings(path, [(1, 10, 4.0), (2, 10, 2.0)])
    load_movielens(path, sidecar_dir=tmp_path / "out")
    sidecar = tmp_path / "out" / "ratings.provenance.json"
    assert sidecar.exists()
    assert '"ratings_total": 2' in sidecar.read_text()


# -------------------------------------------------------------------- images


def test_image_black_white_and_levels(tmp_path):
    path = tmp_path / "img.png"
    Image.fromarray(np.zeros((4, 5), dtype=np.uint8), mode="L").save(path)
    assert np.array_equal(load_image_gray(path), np.zeros((4, 5)))
    Image.fromarray(np.full((4, 5), 255, dtype=np.uint8), mode="L").save(path)
    assert np.array_equal(load_image_gray(path), np.ones((4, 5)))
    levels = np.array([[0, 51], [102, 255]], dtype=np.uint8)
    Image.fromarray(levels, mode="L").save(path)
    assert np.allclose(load_image_gray(path), [[0.0, 0.2], [0.4, 1.0]])


@pytest.mark.parametrize("suffix", [".png", ".pgm"])
def test_image_round_trip(tmp_path, suffix):
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(12, 9), dtype=np.uint8)
    src = tmp_path / ("src" + suffix)
    Image.fromarray(pixels, mode="L").save(src) if suffix == ".png" else save_image_gray(
        pixels / 255.0, src
    )
    loaded = load_image_gray(src)
    dst = tmp_path / ("dst" + suffix)
    save_image_gray(loaded, dst)
    assert np.array_equal(load_image_gray(dst), loaded)
    assert np.array_equal((loaded * 255).round().astype(np.uint8), pixels)


def test_save_image_clamps_out_of_range(tmp_path):
    path = tmp_path / "clamped.png"
    save_image_gray(np.array([[-0.5, 0.5], [1.5, 0.2]]), path)
    back = load_image_gray(path)
    assert back[0, 0] == 0.0 and back[1, 0] == 1.0


def test_image_format_errors(tmp_path):
    rgb = tmp_path / "rgb.png"
    Image.fromarray(np.zeros((3, 3, 3), dtype=np.uint8), mode="RGB").save(rgb)
    with pytest.raises(DataError):
        load_image_gray(rgb)
    notimg = tmp_path / "junk.png"
    notimg.write_text("not an image")
    with pytest.raises(DataError):
        load_image_gray(notimg)
    with pytest.raises(DataError):
        load_image_gray(tmp_path / "missing.png")
    with pytest.raises(DataError):
        save_image_gray(np.zeros((2, 2)), tmp_path / "img.bmp")
