import csv
import io
import json
import math

import pytest

from shafstats import arith, store
from shafstats.cli import default_checkpoints, main, parse_int
from shafstats.curve import ApTable


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def tiny_cache(tmp_path, curve11):
    path = tmp_path / "tiny.csv"
    store.save(ApTable.from_records(curve11, 7, [(5, -3), (7, 3)]), path)
    return path


@pytest.fixture
def sha4_cache(tmp_path, curve11):
    path = tmp_path / "sha4.csv"
    store.save(ApTable.from_records(curve11, 5, [(5, 2)]), path)
    return path


def test_parse_int():
    assert parse_int("10^6") == parse_int("1e6") == parse_int("10**6") == parse_int("1_000_000") == 10**6
    assert default_checkpoints(1000) == [10, 100, 1000]
    assert default_checkpoints(5000) == [10, 100, 1000, 5000]


def test_trace_writes_cache(capsys, tmp_path, curve11):
    path = tmp_path / "t.csv"
    code, out, err = run(capsys, "trace", "--a", "1", "--b", "1", "--x", "1000", "--cache", str(path))
    assert code == 0
    expected = sum(1 for p in arith.primes_up_to(1000).tolist() if curve11.is_good(p))
    assert store.read_manifest(path).record_count == expected
    assert rows_of(out)[0]["records"] == str(expected)
    assert "tracing" in err


def test_trace_x20(capsys):
    code, out, _ = run(capsys, "trace", "--a", "1", "--b", "1", "--x", "20")
    assert code == 0
    assert rows_of(out)[0]["records"] == "6"
    assert rows_of(out)[0]["irrational_two_torsion"] == "true"


def test_missing_x_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["trace", "--a", "1", "--b", "1"])
    assert exc.value.code == 2


def test_singular_curve_exit_code(capsys):
    code, _, err = run(capsys, "trace", "--a", "0", "--b", "0", "--x", "20")
    assert code == 2 and "singular" in err


def test_sha_stats_tiny(capsys, tiny_cache):
    code, out, _ = run(capsys, "sha-stats", "--a", "1", "--b", "1", "--x", "7", "--cache", str(tiny_cache))
    assert code == 0
    (row,) = rows_of(out)
    assert (row["pi"], row["good_count"], row["pi_ts"], row["ratio"]) == ("4", "2", "2", "0.5")


def test_sha_stats_empty(capsys, tmp_path, curve11):
    path = tmp_path / "e.csv"
    store.save(ApTable.from_records(curve11, 4, []), path)
    code, out, _ = run(capsys, "sha-stats", "--a", "1", "--b", "1", "--x", "4", "--cache", str(path))
    assert code == 0
    (row,) = rows_of(out)
    assert (row["good_count"], row["pi_ts"], row["ratio"], row["histogram_top"]) == ("0", "0", "0", "")


def test_json_and_csv_agree(capsys, tmp_path):
    path = str(tmp_path / "c.csv")
    base = ["sha-stats", "--a", "1", "--b", "1", "--x", "3000", "--cache", path]
    _, out_csv, _ = run(capsys, *base)
    _, out_json, _ = run(capsys, *base, "--format", "json")
    doc = json.loads(out_json)
    assert doc["command"] == "sha-stats"
    assert list(doc["params"])[:3] == ["a", "b", "x"]
    csv_rows = rows_of(out_csv)
    assert len(csv_rows) == len(doc["rows"])
    for c_row, j_row in zip(csv_rows, doc["rows"]):
        assert list(c_row) == list(j_row)
        for key, value in j_row.items():
            if isinstance(value, float):
                assert float(c_row[key]) == value
            else:
                assert c_row[key] == str(value)


def test_dxy(capsys, sha4_cache):
    code, out, _ = run(capsys, "dxy", "--a", "1", "--b", "1", "--x", "5", "--y", "2", "--cache", str(sha4_cache))
    assert code == 0
    (row,) = rows_of(out)
    assert row["D"] == "1"
    assert float(row["diagnostic_x^13/7*y^-13/7"]) == pytest.approx(5 ** (13 / 7) * 2 ** (-13 / 7), rel=1e-5)


def test_sm(capsys, tiny_cache):
    code, out, _ = run(capsys, "sm", "--a", "1", "--b", "1", "--x", "7", "--m", "11,19,2,44", "--cache", str(tiny_cache))
    assert code == 0
    rows = {r["m"]: r for r in rows_of(out)}
    assert rows["11"]["S_m"] == rows["11"]["pi_K"] == "1"
    assert rows["19"]["S_m"] == "1"
    assert rows["2"]["S_m"] == "0"
    assert rows["44"]["S_m"] == "1" and rows["44"]["pi_K"] == "" and rows["44"]["squarefree"] == "false"


def test_sigma_prints_suggested_z(capsys, tmp_path):
    x = 10**4
    v = round(x ** (1 / 14))
    code, out, _ = run(capsys, "sigma", "--a", "1", "--b", "1", "--x", str(x), "--u", str(v), "--v", str(v),
                       "--checkpoints", str(x), "--cache", str(tmp_path / "c.csv"))
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["suggested_z_short"]) == pytest.approx((v * x) ** (1 / 14), rel=1e-5)
    assert float(row["diagnostic_(vx)^55/59"]) == pytest.approx((v * x) ** (55 / 59), rel=1e-5)


def test_mset(capsys, tiny_cache):
    code, out, _ = run(capsys, "mset", "--a", "1", "--b", "1", "--x", "7", "--cache", str(tiny_cache))
    assert code == 0
    (row,) = rows_of(out)
    assert (row["size"], row["max_m"]) == ("2", "19")


def test_charsum_kinds(capsys, tmp_path):
    cache = str(tmp_path / "c.csv")
    code, out, _ = run(capsys, "charsum", "--a", "1", "--b", "1", "--x", "10^4", "--cache", cache)
    assert code == 0
    assert float(rows_of(out)[0]["main_term"]) == pytest.approx(1229 / 1152, rel=1e-5)
    code, out, _ = run(capsys, "charsum", "--a", "1", "--b", "1", "--x", "100", "--kind", "burgess",
                       "--u", "10", "--v", "3", "--s", "15")
    assert code == 0 and rows_of(out)[0]["value"] == "0"
    code, out, _ = run(capsys, "charsum", "--a", "1", "--b", "1", "--x", "100", "--kind", "hb", "--X", "4", "--Y", "3")
    assert code == 0 and rows_of(out)[0]["value"] == "9"
    with pytest.raises(SystemExit) as exc:
        main(["charsum", "--a", "1", "--b", "1", "--x", "100", "--kind", "hb"])
    assert exc.value.code == 2


def test_sieve(capsys, tmp_path):
    code, out, _ = run(capsys, "sieve", "--a", "1", "--b", "1", "--x", "100", "--m", "1,11", "--z", "5",
                       "--cache", str(tmp_path / "c.csv"))
    assert code == 0
    rows = rows_of(out)
    assert [r["L"] for r in rows] == ["2", "2"]
    for r in rows:
        assert float(r["value"]) >= int(r["S_m"])


def test_sieve_empty_window_exit_code(capsys):
    code, _, err = run(capsys, "sieve", "--a", "1", "--b", "1", "--x", "100", "--m", "1", "--z", "2")
    assert code == 2 and "no usable primes" in err


def test_data_error_exit_codes(capsys, tmp_path, tiny_cache):
    code, _, _ = run(capsys, "sha-stats", "--a", "1", "--b", "2", "--x", "7", "--cache", str(tiny_cache))
    assert code == 3
    raw = tiny_cache.read_bytes().replace(b"7,3", b"7,2")
    tiny_cache.write_bytes(raw)
    code, _, err = run(capsys, "sha-stats", "--a", "1", "--b", "1", "--x", "7", "--cache", str(tiny_cache))
    assert code == 3 and "checksum" in err


def test_capacity_exit_code(capsys, monkeypatch):
    from shafstats import arith as arith_mod

    monkeypatch.setattr(arith_mod, "MAX_SIEVE_BOUND", 100)
    code, _, _ = run(capsys, "trace", "--a", "1", "--b", "1", "--x", "1000")
    assert code == 4


def test_reports_are_reproducible(capsys, tmp_path):
    args = ["dxy", "--a", "1", "--b", "1", "--x", "5000", "--y", "1,3.5,10", "--format", "json"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args, "--cache", str(tmp_path / "c.csv"))
    _, third, _ = run(capsys, *args, "--cache", str(tmp_path / "c.csv"), "--threads", "4")
    assert first == second == third
    assert not math.isnan(json.loads(first)["rows"][0]["D"])
