#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "sentdoc/corpus.hpp"

using namespace sentdoc;

namespace {

std::filesystem::path scratch_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("The QUICK, brown fox!") ==
          std::vector<std::string>{"the", "quick", "brown", "fox"});
    CHECK(tokenize("it's a trap") ==
          std::vector<std::string>{"it", "s", "a", "trap"});
    CHECK(tokenize("abc123 x-y") ==
          std::vector<std::string>{"abc123", "x", "y"});
    CHECK(tokenize("  ") == std::vector<std::string>{});
  }

  TEST_CASE("segment_sentences splits on terminators and keeps them") {
    const auto s = segment_sentences("One. Two!  Three? Also Mr not split");
    REQUIRE(s.size() == 4);
    CHECK(s[0] == "One.");
    CHECK(s[1] == "Two!");
    CHECK(s[2] == "Three?");
    CHECK(s[3] == "Also Mr not split");
    CHECK(segment_sentences("no terminator") ==
          std::vector<std::string>{"no terminator"});
    CHECK(segment_sentences("").empty());
  }

  TEST_CASE("vocabulary orders ids by descending frequency, ties lexicographic") {
    std::vector<RawDocument> docs = {
        {"d1", {"b b b c c a", "a c"}},
    };
    const Vocabulary v = build_vocabulary(docs, 1);
    // counts: b=3, c=3, a=2 -> b and c tie, b first lexicographically.
    REQUIRE(v.size() == 5);
    CHECK(v.id_to_token[0] == "<pad>");
    CHECK(v.id_to_token[1] == "<unk>");
    CHECK(v.id_to_token[2] == "b");
    CHECK(v.id_to_token[3] == "c");
    CHECK(v.id_to_token[4] == "a");
    CHECK(v.id_of("b") == 2);
    CHECK(v.id_of("zzz") == kUnkId);
    CHECK(v.counts[2] == 3);
  }

  TEST_CASE("min_count filters tokens to UNK") {
    std::vector<RawDocument> docs = {{"d1", {"a a a b"}}};
    const Vocabulary v = build_vocabulary(docs, 2);
    CHECK(v.size() == 3);  // pad, unk, a
    CHECK(v.id_of("b") == kUnkId);
    CHECK_THROWS_AS((void)build_vocabulary(docs, 10), std::runtime_error);
  }

  TEST_CASE("encode_corpus maps tokens and drops empty material") {
    std::vector<RawDocument> docs = {
        {"d1", {"a a b", "", "zzz zzz"}},
        {"d2", {"???"}},  // tokenizes to nothing -> document dropped
    };
    const Vocabulary v = build_vocabulary({{"x", {"a a b"}}}, 1);
    const Corpus c = encode_corpus(docs, v);
    REQUIRE(c.documents.size() == 1);
    CHECK(c.dropped_documents == 1);
    REQUIRE(c.documents[0].sentences.size() == 2);
    CHECK(c.documents[0].sentences[0] ==
          Sentence{v.id_of("a"), v.id_of("a"), v.id_of("b")});
    CHECK(c.documents[0].sentences[1] == Sentence{kUnkId, kUnkId});
    CHECK(c.total_sentences() == 2);
    CHECK(c.doc_first_sentence == std::vector<std::size_t>{0, 2});
  }

  TEST_CASE("read_raw_corpus handles plain text and pre-segmented lines") {
    const auto path = scratch_file("corpus_read_test.tsv");
    write_file(path,
               "d1\tHello there. Second one!\n"
               "d2\tpre\x1fsegmented\x1fhere\n"
               "\n");
    const auto docs = read_raw_corpus(path.string());
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].sentences ==
          std::vector<std::string>{"Hello there.", "Second one!"});
    CHECK(docs[1].sentences ==
          std::vector<std::string>{"pre", "segmented", "here"});
    std::filesystem::remove(path);
    CHECK_THROWS_AS((void)read_raw_corpus(path.string()), std::runtime_error);
  }

  TEST_CASE("read_raw_corpus rejects lines without a tab") {
    const auto path = scratch_file("corpus_bad_line.tsv");
    write_file(path, "no_tab_here\n");
    CHECK_THROWS_AS((void)read_raw_corpus(path.string()), std::runtime_error);
    std::filesystem::remove(path);
  }

  TEST_CASE("sample_negatives never draws from the excluded document") {
    std::vector<RawDocument> docs;
    for (int d = 0; d < 5; ++d)
      docs.push_back({"d" + std::to_string(d), {"a b", "b a", "a a"}});
    const Vocabulary v = build_vocabulary(docs, 1);
    const Corpus c = encode_corpus(docs, v);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      const auto negs = sample_negatives(c, 2, 6, rng);
      REQUIRE(negs.size() == 6);
      for (const auto& [nd, ns] : negs) {
        CHECK(nd != 2);
        CHECK(nd < 5);
        CHECK(ns < 3);
      }
    }
  }

  TEST_CASE("sample_negatives throws when nothing is eligible") {
    std::vector<RawDocument> docs = {{"only", {"a b"}}};
    const Vocabulary v = build_vocabulary(docs, 1);
    const Corpus c = encode_corpus(docs, v);
    Rng rng(1);
    CHECK_THROWS_AS((void)sample_negatives(c, 0, 1, rng), std::runtime_error);
    CHECK(sample_negatives(c, 0, 0, rng).empty());
  }

  TEST_CASE("sample_negatives covers all other documents") {
    std::vector<RawDocument> docs;
    for (int d = 0; d < 4; ++d)
      docs.push_back({"d" + std::to_string(d), {"a", "b"}});
    const Vocabulary v = build_vocabulary(docs, 1);
    const Corpus c = encode_corpus(docs, v);
    Rng rng(3);
    std::set<std::uint32_t> seen;
    for (const auto& [nd, ns] : sample_negatives(c, 1, 200, rng))
      seen.insert(nd);
    CHECK(seen == std::set<std::uint32_t>{0, 2, 3});
  }

  TEST_CASE("vocabulary round-trips through its file format") {
    std::vector<RawDocument> docs = {{"d1", {"red green green blue"}}};
    const Vocabulary v = build_vocabulary(docs, 1);
    const auto path = scratch_file("vocab_roundtrip.tsv");
    save_vocabulary(v, path.string());
    const Vocabulary w = load_vocabulary(path.string());
    CHECK(w.id_to_token == v.id_to_token);
    CHECK(w.counts == v.counts);
    CHECK(w.token_to_id.at("green") == v.token_to_id.at("green"));
    std::filesystem::remove(path);
  }

  TEST_CASE("rebuild_sentence_index matches document layout") {
    Corpus c;
    c.documents.push_back({"a", {{2, 3}, {4}}});
    c.documents.push_back({"b", {{5}}});
    rebuild_sentence_index(c);
    REQUIRE(c.sentence_index.size() == 3);
    CHECK(c.sentence_index[0] == std::make_pair(0u, 0u));
    CHECK(c.sentence_index[2] == std::make_pair(1u, 0u));
    CHECK(c.doc_first_sentence == std::vector<std::size_t>{0, 2, 3});
  }
}
