import pytest

from app.cli import EXIT_OK, EXIT_PROGRAM_ERROR, EXIT_USAGE, main


def test_check_reports_the_declaration_count(corpus_path, capsys):
    assert main(["check", corpus_path("section2")]) == EXIT_OK
    assert capsys.readouterr().out == "ok: 5 declarations\n"


def test_check_explains_coherence(corpus_path, capsys):
    assert main(["check", corpus_path("points"), "--explain-coherence", "Point"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("abstract state of Point:\n")
    assert "  coherent: yes\n" in out


def test_flatten_prints_the_program_and_the_trace(corpus_path, capsys):
    assert main(["flatten", "--trace", corpus_path("rename")]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.err.splitlines()[-2:] == ["D: LOOK-UP at root.arg", "D: RENAME at root"]
    assert "  method D.C m()" in captured.out
    assert captured.out.endswith("\n")


def test_flatten_is_byte_stable(corpus_path, capsys):
    main(["flatten", corpus_path("fcpoint")])
    first = capsys.readouterr().out
    main(["flatten", corpus_path("fcpoint")])
    assert capsys.readouterr().out == first


def test_run_prints_the_value(corpus_path, capsys):
    code = main(["run", corpus_path("expression_problem"), "--expr", "Plus.of(Num.of(1), Num.of(2)).eval()"])
    assert code == EXIT_OK
    assert capsys.readouterr().out == "3\n"


def test_run_with_steps(corpus_path, capsys):
    code = main(["run", corpus_path("points"), "--expr", "Point.of(1, 2).withX(5)", "--steps"])
    assert code == EXIT_OK
    assert capsys.readouterr().out == "1: M-WITH Point.of(5, 2)\nPoint.of(5, 2)\n"


def test_run_out_of_fuel(corpus_path, capsys):
    code = main(["run", corpus_path("points"), "--expr", "Point.of(1, 2).withX(5).x()", "--fuel", "1"])
    assert code == EXIT_PROGRAM_ERROR
    assert "FuelExhausted" in capsys.readouterr().err


def test_program_errors_exit_with_one(corpus_path, capsys):
    assert main(["check", corpus_path("cpoint_fail")]) == EXIT_PROGRAM_ERROR
    err = capsys.readouterr().err
    assert "cpoint_fail.l42mu:" in err
    assert ": NotCoherent: " in err


def test_files_are_concatenated_in_order(tmp_path, capsys):
    first = tmp_path / "one.l42mu"
    second = tmp_path / "two.l42mu"
    first.write_text("t = {method int a(){return 1;}}\n", encoding="utf-8")
    second.write_text("K = Use t\n", encoding="utf-8")
    assert main(["check", str(first), str(second)]) == EXIT_OK
    assert main(["check", str(second), str(first)]) == EXIT_PROGRAM_ERROR
    capsys.readouterr()


def test_missing_file_is_a_usage_error(tmp_path, capsys):
    assert main(["check", str(tmp_path / "missing.l42mu")]) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("reuse42: ")


def test_undecodable_file_is_a_usage_error(tmp_path, capsys):
    program = tmp_path / "binary.l42mu"
    program.write_bytes(b"\xff\xfe class")
    assert main(["check", str(program)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert err.startswith("reuse42: ")
    assert "not valid UTF-8" in err


def test_bad_arguments_exit_with_two():
    with pytest.raises(SystemExit) as info:
        main(["run", "x.l42mu", "--expr", "1", "--fuel", "0"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit):
        main(["fuzz", "--check", "nope"])


def test_maximal_mode_from_the_command_line(tmp_path, capsys):
    program = tmp_path / "forward.l42mu"
    program.write_text(
        "Y = {method Y f(Z z){return this;}}\n"
        "X = {method X h(Y y){return this;}}\n"
        "t = {method X k(X x){return x;}}\n"
        "K = Use t\n"
        "Z = {}\n",
        encoding="utf-8",
    )
    assert main(["check", str(program)]) == EXIT_PROGRAM_ERROR
    assert main(["check", "--dependency-mode", "maximal", str(program)]) == EXIT_OK
    assert capsys.readouterr().out == "ok: 5 declarations\n"


def test_fuzz_summary(capsys):
    assert main(["fuzz", "--check", "algebra", "--seed", "1", "--count", "50"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "algebra: pass (50 samples, 0 failures)"
