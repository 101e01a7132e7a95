import pytest
from hypothesis import given, settings

from helpers import networks, star
from ncgame.graph import IndexOutOfRange, SelfLoop, build_network
from ncgame.netio import ParseError, parse_network, parse_network_file, serialize, write_network_file


def test_single_edge():
    assert parse_network("2\n0 1\n") == build_network(2, [(0, 1)])


def test_star():
    assert parse_network("4\n0 1\n0 2\n0 3\n") == star(4)


def test_out_of_range_names_line():
    with pytest.raises(IndexOutOfRange, match="line 2"):
        parse_network("3\n0 3\n")


def test_self_loop():
    with pytest.raises(SelfLoop, match="line 3"):
        parse_network("3\n0 1\n2 2\n")


def test_comments_blanks_and_duplicates():
    text = "# a path\n\n3  # agents\n0 1\n0 1\n\n1 2 # second\n"
    assert parse_network(text) == build_network(3, [(0, 1), (1, 2)])


@pytest.mark.parametrize("text,line", [("", 1), ("x\n", 1), ("3\n0\n", 2), ("3\n0 1 2\n", 2), ("0\n", 1)])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        parse_network(text)
    assert exc.value.line == line


def test_serialize_format():
    assert serialize(build_network(3, [(1, 0), (0, 2)])) == "3\n0 2\n1 0\n"


@settings(max_examples=200, deadline=None)
@given(networks(max_n=10))
def test_round_trip(net):
    assert parse_network(serialize(net)) == net


def test_files(tmp_path):
    target = tmp_path / "star.net"
    write_network_file(target, star(5))
    assert parse_network_file(target) == star(5)
