import pytest

from mtsp_report.tables import (SchemaError, load_bench_csv,
                                published_results_path, summarize, to_markdown)

HEADER = "name,m,bks,best,avg,delta_pct,time_ms\n"


def write(tmp_path, body, name="bench.csv"):
    p = tmp_path / name
    p.write_text(HEADER + body)
    return str(p)


def test_single_row_at_bks_is_a_tie(tmp_path):
    path = write(tmp_path, "a,3,100.0,100.0,101.0,,\n")
    s = summarize(path)
    assert (s[3].wins, s[3].ties, s[3].losses) == (0, 1, 0)


def test_win_tie_loss_split(tmp_path):
    body = ("w,5,100.0,99.0,99.5,,\n"
            "t,5,100.0,100.0,100.0,,\n"
            "l,5,100.0,101.0,101.5,,\n")
    s = summarize(write(tmp_path, body))
    assert (s[5].wins, s[5].ties, s[5].losses) == (1, 1, 1)
    assert s[5].mean_delta == pytest.approx(0.0, abs=1e-9)


def test_schema_error_names_missing_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("name,m,best,avg\nx,3,1.0,1.0\n")
    with pytest.raises(SchemaError, match="bks"):
        load_bench_csv(str(p))


def test_stored_delta_must_match_recomputation(tmp_path):
    path = write(tmp_path, "a,3,100.0,99.0,99.0,-1.0,\n")
    assert load_bench_csv(path)[0].delta_pct == pytest.approx(-1.0)
    bad = write(tmp_path, "a,3,100.0,99.0,99.0,-2.0,\n", name="bad.csv")
    with pytest.raises(SchemaError, match="delta_pct"):
        load_bench_csv(bad)


def test_failed_and_unreferenced_rows_skipped(tmp_path):
    body = ("ok,3,100.0,100.0,100.0,,\n"
            "boom,3,,FAILED,FAILED,,\n"
            "nobks,3,,90.0,91.0,,\n")
    rows = load_bench_csv(write(tmp_path, body))
    assert [r.name for r in rows] == ["ok"]


def test_summarize_is_pure(tmp_path):
    path = write(tmp_path, "a,3,100.0,98.0,99.0,,\nb,10,50.0,51.0,52.0,,\n")
    a = summarize(path)
    b = summarize(path)
    assert {m: (g.wins, g.ties, g.losses, g.mean_delta) for m, g in a.items()} == \
           {m: (g.wins, g.ties, g.losses, g.mean_delta) for m, g in b.items()}


def test_summarize_merges_multiple_files(tmp_path):
    p1 = write(tmp_path, "a,3,100.0,99.0,99.0,,\n", name="one.csv")
    p2 = write(tmp_path, "b,3,100.0,101.0,101.0,,\n", name="two.csv")
    s = summarize(p1, p2)
    assert (s[3].wins, s[3].ties, s[3].losses) == (1, 0, 1)


def test_markdown_contains_groups(tmp_path):
    path = write(tmp_path, "a,3,100.0,99.0,99.0,,\nb,5,100.0,100.0,100.0,,\n")
    md = to_markdown(path)
    assert md.splitlines()[0].startswith("| m | wins | ties | losses |")
    assert "| 3 | 1 | 0 | 0 |" in md
    assert "| 5 | 0 | 1 | 0 |" in md


def test_published_fixture_loads_fully():
    rows = load_bench_csv(published_results_path())
    assert len(rows) == 77
    assert {r.m for r in rows} == {3, 5, 10, 20, 30}


def test_wilcoxon_column_when_scipy_available(tmp_path):
    pytest.importorskip("scipy")
    body = "".join(f"i{k},3,100.0,{100.0 - k * 0.5},{100.0 - k * 0.4},,\n"
                   for k in range(1, 7))
    md = to_markdown(write(tmp_path, body))
    assert "Wilcoxon p" in md.splitlines()[0]
    cells = [c.strip() for c in md.splitlines()[2].split("|")]
    assert float(cells[6]) < 0.05  # six consistent improvements


def test_wilcoxon_dash_when_all_ties(tmp_path):
    pytest.importorskip("scipy")
    md = to_markdown(write(tmp_path, "a,3,100.0,100.0,100.0,,\n"))
    assert md.splitlines()[2].rstrip().endswith("- |")
