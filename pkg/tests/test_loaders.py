"""Tests for dataset readers, the corpus converter and side tables."""

import pytest

from src.exceptions import FormatError, HyperedgeTooSmall
from src.services.loaders import (
    convert,
    load_hypergraph,
    read_edgelist,
    read_label_set,
    read_label_table,
    read_sizes_members,
    write_edgelist,
)


@pytest.fixture
def corpus(tmp_path):
    sizes = tmp_path / "sizes.txt"
    members = tmp_path / "members.txt"
    sizes.write_text("3\n2\n", encoding="utf-8")
    members.write_text("1\n2\n3\n2\n3\n", encoding="utf-8")
    return sizes, members


class TestEdgelist:
    def test_skips_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("# header\n1 2 3\n\n2   3\n", encoding="utf-8")
        assert read_edgelist(path) == [["1", "2", "3"], ["2", "3"]]

    def test_write_then_load(self, tmp_path, h_tri):
        path = tmp_path / "out.txt"
        write_edgelist(h_tri, path)
        assert path.read_text(encoding="utf-8") == "1 2 3\n2 3\n"
        assert load_hypergraph(path) == h_tri


class TestSizesMembers:
    def test_reads_hyperedges_in_order(self, corpus):
        sizes, members = corpus
        assert read_sizes_members(sizes, members) == [["1", "2", "3"], ["2", "3"]]

    def test_count_mismatch(self, corpus):
        sizes, members = corpus
        members.write_text("1 2 3 2\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_sizes_members(sizes, members)

    def test_non_integer_size(self, corpus):
        sizes, members = corpus
        sizes.write_text("3\nx\n", encoding="utf-8")
        with pytest.raises(FormatError, match="not an integer"):
            read_sizes_members(sizes, members)

    def test_negative_size(self, corpus):
        sizes, members = corpus
        sizes.write_text("-1\n", encoding="utf-8")
        with pytest.raises(FormatError, match="negative"):
            read_sizes_members(sizes, members)

    def test_convert_writes_verbatim(self, tmp_path, corpus):
        sizes, members = corpus
        sizes.write_text("3\n1\n", encoding="utf-8")
        members.write_text("1 2 3 9\n", encoding="utf-8")
        out = tmp_path / "converted.txt"
        assert convert(sizes, members, out) == 2
        assert out.read_text(encoding="utf-8") == "1 2 3\n9\n"

    def test_load_from_pair(self, corpus, h_tri):
        sizes, members = corpus
        assert load_hypergraph(sizes_path=sizes, members_path=members) == h_tri


class TestLoadHypergraph:
    def test_extracts_lcc_by_default(self, disconnected_file, caplog):
        h = load_hypergraph(disconnected_file)
        assert h.node_count == 3
        assert h.is_connected()
        assert "largest component" in caplog.text

    def test_no_lcc_keeps_everything(self, disconnected_file):
        h = load_hypergraph(disconnected_file, lcc=False)
        assert h.node_count == 5
        assert not h.is_connected()

    def test_rejects_singletons_unless_dropped(self, tmp_path):
        path = tmp_path / "single.txt"
        path.write_text("1 2\n3\n2 3\n", encoding="utf-8")
        with pytest.raises(HyperedgeTooSmall):
            load_hypergraph(path)
        h = load_hypergraph(path, drop_singletons=True)
        assert h.hyperedge_labels == ("0", "2")

    def test_requires_exactly_one_source(self, tri_file, corpus):
        sizes, members = corpus
        with pytest.raises(ValueError):
            load_hypergraph()
        with pytest.raises(ValueError):
            load_hypergraph(tri_file, sizes_path=sizes, members_path=members)


class TestLabelTables:
    def test_label_table_keeps_rest_of_line(self, tmp_path):
        path = tmp_path / "fields.txt"
        path.write_text("# comment\n1 Computer Science\n2 Biology\n", encoding="utf-8")
        assert read_label_table(path) == {"1": "Computer Science", "2": "Biology"}

    def test_label_table_rejects_missing_value(self, tmp_path):
        path = tmp_path / "fields.txt"
        path.write_text("1\n", encoding="utf-8")
        with pytest.raises(FormatError):
            read_label_table(path)

    def test_label_set(self, tmp_path):
        path = tmp_path / "subset.txt"
        path.write_text("2\n\n3\n2\n", encoding="utf-8")
        assert read_label_set(path) == {"2", "3"}
