#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "doctest.h"
#include "rtnlab/errors.hpp"
#include "rtnlab/ndtensor.hpp"
#include "rtnlab/textfeat.hpp"
#include "test_util.hpp"

using namespace rtnlab;

namespace {

RuleScorerConfig test_rule_cfg() {
  RuleScorerConfig cfg;
  cfg.valence = {{"good", 1.9}, {"great", 3.1}, {"bad", -2.5},
                 {"terrible", -2.1}};
  cfg.boosters = {"very", "extremely"};
  cfg.negators = {"not", "never"};
  return cfg;
}

double vader_norm(double x) { return x / std::sqrt(x * x + 15.0); }

}  // namespace

TEST_SUITE("textfeat") {

TEST_CASE("lower_ascii") {
  CHECK(lower_ascii("GREAT") == "great");
  CHECK(lower_ascii("MoViE42!") == "movie42!");
}

TEST_CASE("rule_score frozen cases") {
  const RuleScorerConfig cfg = test_rule_cfg();

  // Plain hit: good = 1.9.
  CHECK(rule_score({"good"}, cfg) ==
        doctest::Approx(vader_norm(1.9)).epsilon(1e-12));

  // Negation within three tokens: 1.9 * -0.74.
  CHECK(rule_score({"not", "good"}, cfg) ==
        doctest::Approx(-0.34124).epsilon(1e-3));
  CHECK(rule_score({"not", "good"}, cfg) ==
        doctest::Approx(vader_norm(1.9 * -0.74)).epsilon(1e-12));

  // All-caps among mixed-case text plus two exclamation tokens:
  // 3.1 * 1.733, then +0.292 * 2 toward the sign.
  CHECK(rule_score({"GREAT", "movie", "!", "!"}, cfg) ==
        doctest::Approx(0.8383).epsilon(1e-3));
  CHECK(rule_score({"GREAT", "movie", "!", "!"}, cfg) ==
        doctest::Approx(vader_norm(3.1 * 1.733 + 0.292 * 2)).epsilon(1e-9));

  // Booster within two preceding tokens pushes away from zero.
  CHECK(rule_score({"very", "good"}, cfg) ==
        doctest::Approx(vader_norm(1.9 + 0.293)).epsilon(1e-12));
  CHECK(rule_score({"very", "bad"}, cfg) ==
        doctest::Approx(vader_norm(-2.5 - 0.293)).epsilon(1e-12));

  // No valence hit -> 0; empty -> 0.
  CHECK(rule_score({"the", "movie"}, cfg) == 0.0);
  CHECK(rule_score({}, cfg) == 0.0);

  // Exclamation count is capped.
  CHECK(rule_score({"good", "!", "!", "!", "!", "!"}, cfg) ==
        doctest::Approx(vader_norm(1.9 + 0.292 * 3)).epsilon(1e-12));

  // All-caps text (no mixed-case contrast) takes no caps boost.
  CHECK(rule_score({"GREAT", "MOVIE"}, cfg) ==
        doctest::Approx(vader_norm(3.1)).epsilon(1e-12));

  // Output stays within (-1, 1).
  CHECK(std::fabs(rule_score({"great", "great", "great", "great"}, cfg)) < 1.0);
}

TEST_CASE("lexicon load applies per-category min-max normalization") {
  testutil::TempDir tmp;
  const std::string path = tmp.file("lex.tsv");
  testutil::write_file(path,
                       "calm\t0,5\n"
                       "angry\t10,5\n"
                       "tense\t5,5\n");
  const Lexicon lex = load_lexicon(path, "test");
  CHECK(lex.width == 2);
  CHECK(lex.name == "test");
  // Category 0: min 0, max 10 -> calm -1, angry +1, tense 0.
  CHECK(lex.entries.at("calm")[0] == doctest::Approx(-1.0));
  CHECK(lex.entries.at("angry")[0] == doctest::Approx(1.0));
  CHECK(lex.entries.at("tense")[0] == doctest::Approx(0.0));
  // Category 1 is constant -> all zero.
  CHECK(lex.entries.at("calm")[1] == 0.0);
  CHECK(lex.entries.at("angry")[1] == 0.0);

  // Ragged widths are parse errors with the line number.
  const std::string bad = tmp.file("bad.tsv");
  testutil::write_file(bad, "a\t1,2\nb\t1\n");
  CHECK_THROWS_WITH_AS(load_lexicon(bad, "bad"),
                       doctest::Contains(":2"), ParseError);
}

TEST_CASE("lexicon_embed appends scores or zeros") {
  Lexicon lex;
  lex.width = 2;
  lex.entries = {{"good", {0.5, -1.0}}};
  const Tensor base = Tensor::vec({9.0, 8.0});

  const Tensor hit = lexicon_embed("good", base, lex);
  CHECK(hit.values() == std::vector<double>{9.0, 8.0, 0.5, -1.0});

  const Tensor miss = lexicon_embed("unknown", base, lex);
  CHECK(miss.values() == std::vector<double>{9.0, 8.0, 0.0, 0.0});
}

TEST_CASE("segment_text_vector averages resolvable tokens") {
  std::unordered_map<std::string, Tensor> wv = {
      {"good", Tensor::vec({1.0, 2.0})}, {"movie", Tensor::vec({3.0, 4.0})}};

  // Plain mean of the two embeddings; "xyz" is skipped.
  const Tensor v =
      segment_text_vector({"good", "xyz", "movie"}, wv, nullptr, nullptr,
                          nullptr);
  CHECK(v.values() == std::vector<double>{2.0, 3.0});

  // With a lexicon the per-word scores are appended before averaging.
  Lexicon lex;
  lex.width = 1;
  lex.entries = {{"good", {1.0}}};
  const Tensor vl =
      segment_text_vector({"good", "movie"}, wv, &lex, nullptr, nullptr);
  CHECK(vl.values() == std::vector<double>{2.0, 3.0, 0.5});

  // Rule score appends one trailing coordinate for the whole segment.
  const RuleScorerConfig cfg = test_rule_cfg();
  const Tensor vr =
      segment_text_vector({"good", "movie"}, wv, nullptr, nullptr, &cfg);
  REQUIRE(vr.size() == 3);
  CHECK(vr[2] == doctest::Approx(vader_norm(1.9)).epsilon(1e-12));

  // Contextual vectors are averaged alongside and must align 1:1.
  const std::vector<Tensor> ctx = {Tensor::vec({10.0}), Tensor::vec({20.0})};
  const Tensor vc =
      segment_text_vector({"good", "movie"}, wv, nullptr, &ctx, nullptr);
  CHECK(vc.values() == std::vector<double>{2.0, 3.0, 15.0});

  const std::vector<Tensor> short_ctx = {Tensor::vec({10.0})};
  CHECK_THROWS_AS(segment_text_vector({"good", "movie"}, wv, nullptr,
                                      &short_ctx, nullptr),
                  DimensionError);

  // No resolvable token is a data error.
  CHECK_THROWS_AS(
      segment_text_vector({"nope"}, wv, nullptr, nullptr, nullptr), DataError);
}

TEST_CASE("word vector and word list loaders") {
  testutil::TempDir tmp;
  const std::string wv_path = tmp.file("wv.tsv");
  testutil::write_file(wv_path, "alpha\t1,2,3\nbeta\t-1,0,1\n");
  const auto wv = load_word_vectors(wv_path);
  CHECK(wv.size() == 2);
  CHECK(wv.at("alpha").values() == std::vector<double>{1, 2, 3});

  const std::string ragged = tmp.file("ragged.tsv");
  testutil::write_file(ragged, "a\t1,2\nb\t1,2,3\n");
  CHECK_THROWS_AS(load_word_vectors(ragged), ParseError);

  const std::string wl_path = tmp.file("words.txt");
  testutil::write_file(wl_path, "# comment\nvery\n\nnot\n");
  const auto words = load_word_list(wl_path);
  CHECK(words.size() == 2);
  CHECK(words.count("very") == 1);
  CHECK(words.count("not") == 1);

  const std::string val_path = tmp.file("val.tsv");
  testutil::write_file(val_path, "good\t1.9\nbad\t-2.5\n");
  const auto val = load_valence(val_path);
  CHECK(val.at("good") == 1.9);
  CHECK(val.at("bad") == -2.5);

  CHECK_THROWS_AS(load_word_vectors(tmp.file("missing.tsv")), DataError);
}

}  // TEST_SUITE
