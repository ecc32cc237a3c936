import io

import numpy as np
import pytest

from tfobi import io as tio
from tfobi.cli import main
from tfobi.errors import ParseError
from tfobi.estimators import tfobi_fit
from tfobi.moments import m_mode_covariance
from tfobi.simulation.distributions import get_distribution


def run(argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


def skewed(n, dims, seed):
    rng = np.random.default_rng(seed)
    df = np.linspace(1.0, 12.0, int(np.prod(dims))).reshape(dims)
    Z = rng.chisquare(df, size=(n,) + dims)
    A = rng.standard_normal((dims[0], dims[0]))
    return np.einsum("ij,nj...->ni...", A, Z)


# -- tensor sample files -----------------------------------------------------


def test_tensor_sample_round_trip(tmp_path):
    X = np.random.default_rng(0).standard_normal((4, 2, 3)) * 1e3
    path = tmp_path / "x.tbss"
    tio.write_tensor_sample(path, X)
    np.testing.assert_array_equal(tio.read_tensor_sample(path), X)
    text = path.read_text()
    assert text.splitlines()[:3] == ["TBSS 1", "4 2", "2 3"]
    # canonical files are reproduced byte for byte
    assert tio.format_tensor_sample(tio.parse_tensor_sample(text)) == text


def test_storage_order_is_last_index_fastest():
    X = tio.parse_tensor_sample("TBSS 1\n1 2\n2 3\n1 2 3 4 5 6\n")
    np.testing.assert_array_equal(X[0], [[1, 2, 3], [4, 5, 6]])


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("TBSX 1\n", 1, 1),
        ("TBSS 1\n2\n", 3, None),
        ("TBSS 1\n1 x\n2\n1 2\n", 2, 2),
        ("TBSS 1\n1 2\n2\n1 2\n", 3, None),
        ("TBSS 1\n1 1\n2\n1 z\n", 4, 2),
        ("TBSS 1\n2 1\n2\n1 2\n3\n", 5, 2),
        ("TBSS 1\n2 1\n2\n1 2\n", 5, None),
    ],
)
def test_tensor_parse_errors_name_position(text, line, column):
    with pytest.raises(ParseError) as info:
        tio.parse_tensor_sample(text)
    assert info.value.line == line
    assert info.value.column == column
    assert f"line {line}" in str(info.value)


def test_matrix_files(tmp_path):
    M = np.array([[1.0, -2.5], [1e-300, np.pi]])
    tio.write_matrix(tmp_path / "m.txt", M)
    np.testing.assert_array_equal(tio.read_matrix(tmp_path / "m.txt"), M)
    (tmp_path / "c.txt").write_text("# comment\n1 2\n\n3 4  # trailing\n")
    np.testing.assert_array_equal(tio.read_matrix(tmp_path / "c.txt"), [[1, 2], [3, 4]])
    (tmp_path / "r.txt").write_text("1 2\n3\n")
    with pytest.raises(ParseError, match="line 2"):
        tio.read_matrix(tmp_path / "r.txt")


# -- model files -------------------------------------------------------------


@pytest.mark.parametrize("whitening", ["joint", "single"])
def test_model_round_trip(whitening):
    model = tfobi_fit(skewed(200, (3, 2), 1), (1, 0), whitening=whitening)
    text = tio.format_model(model)
    back = tio.parse_model(text)
    for a, b in zip(model.gammas + model.eigenvalues + model.whitening, back.gammas + back.eigenvalues + back.whitening):
        np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(back.mean, model.mean)
    assert (back.scale, back.dims, back.n, back.n_variant, back.method) == (
        model.scale, model.dims, model.n, model.n_variant, model.method)
    assert tio.format_model(back) == text


def test_model_parse_errors():
    good = tio.format_model(tfobi_fit(skewed(50, (2, 2), 2))).splitlines()
    bad_variant = good.copy()
    bad_variant[4] = "variant 0 2"
    with pytest.raises(ParseError, match="line 5"):
        tio.parse_model("\n".join(bad_variant))
    with pytest.raises(ParseError, match="end of file"):
        tio.parse_model("\n".join(good[:9]))
    with pytest.raises(ParseError, match="unknown section"):
        tio.parse_model("\n".join(good + ["bogus 1"]))
    with pytest.raises(ParseError, match="line 1"):
        tio.parse_model("MODEL\n")


# -- grid specs, configs, semeion ----------------------------------------------


def test_grid_spec_forms():
    prof = tio.parse_grid_spec("# setting\nnormal uniform\nbernoulli 2.5:0:9\n")
    assert prof.dims == (2, 2)
    assert prof.beta[0, 1] == pytest.approx(get_distribution("uniform").beta)
    assert prof.beta[1, 1] == 2.5 and prof.omega[1, 1] == 9.0
    cube = tio.parse_grid_spec("dims 2 2 2\nnormal uniform bernoulli exp\nlaplace t10 chisq3 invgauss\n")
    assert cube.dims == (2, 2, 2) and cube.beta[1, 1, 1] == 18.0


@pytest.mark.parametrize(
    "text, match",
    [("normal foo\n", "column 2"), ("normal uniform\nexp\n", "ragged"), ("", "empty"), ("dims 2 2\nnormal\n", "need 4")],
)
def test_grid_spec_errors(text, match):
    with pytest.raises(ParseError, match=match):
        tio.parse_grid_spec(text)


def test_config_parsing():
    assert tio.parse_config("# c\nreps = 5\nns=1,2\n\n") == {"reps": "5", "ns": "1,2"}
    with pytest.raises(ParseError, match="line 2"):
        tio.parse_config("a=1\nnovalue\n")


def semeion_line(digit, rng):
    pixels = rng.integers(0, 2, 256)
    onehot = np.zeros(10, dtype=int)
    onehot[digit] = 1
    return " ".join(f"{v}.0000" if i < 256 else str(v) for i, v in enumerate(np.concatenate([pixels, onehot])))


def test_semeion_parsing():
    rng = np.random.default_rng(3)
    digits = [3, 8, 1, 3, 0, 8, 8]
    lines = [semeion_line(d, rng) for d in digits]
    images, labels = tio.parse_semeion("\n".join(lines) + "\n")
    assert images.shape == (7, 16, 16)
    np.testing.assert_array_equal(labels, digits)
    first = np.array([float(t) for t in lines[0].split()[:256]]).reshape(16, 16)
    np.testing.assert_array_equal(images[0], first)
    sub, lab = tio.filter_digits(images, labels, (3, 8))
    assert list(lab) == [3, 8, 3, 8, 8] and sub.shape[0] == 5


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda t: t[:-1], "266 fields"),
        (lambda t: ["2"] + t[1:], "column 1"),
        (lambda t: t[:256] + ["1"] * 10, "exactly one"),
    ],
)
def test_semeion_errors(mutate, match):
    tokens = semeion_line(5, np.random.default_rng(4)).split()
    with pytest.raises(ParseError, match=match):
        tio.parse_semeion(" ".join(mutate(tokens)))


# -- CLI -----------------------------------------------------------------------


def test_cli_fit_transform_whitens(tmp_path):
    X = skewed(400, (4, 3, 2), 5)
    tio.write_tensor_sample(tmp_path / "x.tbss", X)
    code, text = run(["fit", tmp_path / "x.tbss", "--variant", "0,1,0", "--out", tmp_path / "m.model"])
    assert code == 0 and "n=400" in text
    assert tio.read_model(tmp_path / "m.model").n_variant == (0, 1, 0)
    code, _ = run(["transform", tmp_path / "m.model", tmp_path / "x.tbss", "--out", tmp_path / "z.tbss"])
    assert code == 0
    Z = tio.read_tensor_sample(tmp_path / "z.tbss")
    for m, p in enumerate(Z.shape[1:], start=1):
        np.testing.assert_allclose(m_mode_covariance(Z, m), np.eye(p), atol=1e-8)


def test_cli_mdi_of_exact_inverse(tmp_path):
    rng = np.random.default_rng(6)
    omegas = [rng.standard_normal((p, p)) for p in (2, 3)]
    paths = []
    for i, o in enumerate(omegas):
        tio.write_matrix(tmp_path / f"o{i}", o)
        tio.write_matrix(tmp_path / f"g{i}", np.linalg.inv(o))
    code, text = run(["mdi", "--gamma", tmp_path / "g0", tmp_path / "g1", "--omega", tmp_path / "o0", tmp_path / "o1"])
    assert code == 0
    d = float(text.split()[1])
    assert d <= 1e-10
    tio.write_matrix(tmp_path / "i", np.eye(2))
    code, text = run(["mdi", "--gamma", tmp_path / "i", "--omega", tmp_path / "i", "--n", 5])
    assert text.splitlines() == ["mdi 0.0", "transformed 0.0"]


def test_cli_asv(tmp_path):
    (tmp_path / "g.txt").write_text("bernoulli normal normal\nnormal uniform normal\nnormal normal normal\n")
    code, text = run(["asv", tmp_path / "g.txt"])
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "mode 1 variant 0" and lines[-1].startswith("limit ")
    code, text = run(["asv", tmp_path / "g.txt", "--mode", 2, "--variant", 1])
    assert code == 0 and text.splitlines()[0] == "mode 2 variant 1" and "limit" not in text


def test_cli_study_csv_is_reproducible(tmp_path):
    (tmp_path / "c.cfg").write_text("regimes = haar\nns = 300\n")
    argv = ["study", "separation", "--config", tmp_path / "c.cfg", "--reps", 2, "--seed", 7]
    code, _ = run(argv + ["--out", tmp_path / "a.csv"])
    assert code == 0
    run(argv + ["--out", tmp_path / "b.csv"])
    a = (tmp_path / "a.csv").read_text()
    assert a == (tmp_path / "b.csv").read_text()
    assert a.splitlines()[0] == "replication,seed,n,regime,method,variant,metric"
    assert len(a.splitlines()) == 1 + 2 * 2
    code, text = run(["study", "variant", "--n", "300", "--reps", 1])
    assert code == 0 and text.count("\n") == 1 + 2 * 4


def test_cli_semeion(tmp_path):
    rng = np.random.default_rng(8)
    digits = [3] * 4 + [8] * 3 + [5] * 2
    (tmp_path / "s.data").write_text("\n".join(semeion_line(d, rng) for d in digits) + "\n")
    code, text = run(["semeion", tmp_path / "s.data", "--out", tmp_path / "d.tbss"])
    assert code == 0 and text.strip() == "7 records (3: 4, 8: 3)"
    assert tio.read_tensor_sample(tmp_path / "d.tbss").shape == (7, 16, 16)
    labels = (tmp_path / "d.tbss.labels.csv").read_text().splitlines()
    assert labels[0] == "index,digit" and labels[1:] == [f"{i},{d}" for i, d in enumerate([3] * 4 + [8] * 3)]


def test_cli_exit_codes(tmp_path, capsys):
    # 1: parse error, with line and column on stderr
    (tmp_path / "bad.tbss").write_text("TBSS 1\n1 1\n2\n1 x\n")
    assert run(["fit", tmp_path / "bad.tbss", "--out", tmp_path / "m"])[0] == 1
    assert "line 4, column 2" in capsys.readouterr().err
    # 1: usage errors and missing files
    assert run(["fit"])[0] == 1
    assert run(["fit", tmp_path / "missing", "--out", tmp_path / "m"])[0] == 1
    assert run(["study", "separation", "--config", tmp_path / "k.cfg"])[0] == 1
    (tmp_path / "k.cfg").write_text("bogus = 1\n")
    assert run(["study", "separation", "--config", tmp_path / "k.cfg"])[0] == 1
    assert "unknown separation config key" in capsys.readouterr().err
    # 2: singular covariance
    X = np.random.default_rng(9).standard_normal((20, 2, 2))
    X[:, 1, :] = X[:, 0, :]
    tio.write_tensor_sample(tmp_path / "sing.tbss", X)
    assert run(["fit", tmp_path / "sing.tbss", "--out", tmp_path / "m"])[0] == 2
    assert "smallest eigenvalue" in capsys.readouterr().err
    # 3: tied kurtoses
    (tmp_path / "tie.txt").write_text("normal normal\nuniform uniform\n")
    assert run(["asv", tmp_path / "tie.txt", "--mode", 2])[0] == 3


def test_cli_warnings_go_to_stderr(tmp_path, capsys):
    base = skewed(50, (2, 3), 10)
    copies = [base[:, perm] * np.array(s, dtype=float)[None, :, None]
              for perm in ([0, 1], [1, 0]) for s in ([1, 1], [1, -1], [-1, 1], [-1, -1])]
    tio.write_tensor_sample(tmp_path / "t.tbss", np.concatenate(copies))
    code, _ = run(["fit", tmp_path / "t.tbss", "--out", tmp_path / "m"])
    assert code == 0
    assert "warning: mode 1: near-tied" in capsys.readouterr().err
    assert tio.read_model(tmp_path / "m").warnings


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "tfobi", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "semeion" in res.stdout
