#include <doctest.h>

#include <string>
#include <variant>

#include "compstat/model_format.hpp"

using namespace compstat;
using doctest::Approx;

namespace {

const char* kTwoModels = R"(
# binary sources
model bern02 {
  alphabet a b
  order 0
  row : 0.8 0.2
}

model lazy_flip {
  alphabet a b
  order 1
  row a : 0.9 0.1
  row b : 0.1 0.9
  initial 0.25 0.75
}
)";

}  // namespace

TEST_SUITE("model_format") {

TEST_CASE("models parse with rows in context order") {
  const auto file = parse_model_text(kTwoModels);
  REQUIRE(file.models.size() == 2);
  const auto& bern = find_model(file, "bern02");
  CHECK(bern.order == 0);
  CHECK(bern.transition == std::vector<double>{0.8, 0.2});
  CHECK(bern.initial.empty());

  const auto& flip = find_model(file, "lazy_flip");
  CHECK(flip.order == 1);
  CHECK(flip.transition == std::vector<double>{0.9, 0.1, 0.1, 0.9});
  CHECK(flip.initial == std::vector<double>{0.25, 0.75});
  CHECK(flip.alphabet->token(0) == "a");
  CHECK(limit_entropy(flip) == Approx(0.4689955935892812).epsilon(1e-12));

  CHECK_THROWS_AS(find_model(file, "missing"), Error);
}

TEST_CASE("row order in the file does not matter") {
  const auto file = parse_model_text(R"(
model swapped {
  alphabet a b
  order 1
  row b : 0.1 0.9
  row a : 0.9 0.1
}
)");
  CHECK(find_model(file, "swapped").transition == std::vector<double>{0.9, 0.1, 0.1, 0.9});
}

TEST_CASE("order-2 contexts read oldest token first") {
  const auto file = parse_model_text(R"(
model two_back {
  alphabet a b
  order 2
  row a a : 1.0 0.0
  row a b : 0.7 0.3
  row b a : 0.4 0.6
  row b b : 0.0 1.0
}
)");
  const auto& model = find_model(file, "two_back");
  // context index = oldest*2 + newest
  CHECK(model.transition[0 * 2 + 0] == 1.0);   // after "aa"
  CHECK(model.transition[1 * 2 + 1] == 0.3);   // after "ab"
  CHECK(model.transition[2 * 2 + 1] == 0.6);   // after "ba"
  CHECK(model.transition[3 * 2 + 1] == 1.0);   // after "bb"
}

TEST_CASE("experiments resolve models and defaults") {
  const std::string text = std::string(kTwoModels) + R"(
experiment growth {
  kind delta_growth
  x bern02
  y lazy_flip
  m_grid 100 50 100
  context_length 1234
  trials 17
  seed 99
  threads 2
}

experiment errors {
  kind homogeneity_error
  x bern02
  y bern02
  split random
  alpha 0.01
  seed 5
}

experiment label_them {
  kind classification
  sources bern02 lazy_flip
  backend lz78
  target_length 700
  trials 9
  seed 3
}
)";
  const auto file = parse_model_text(text);
  REQUIRE(file.experiments.size() == 3);

  const auto& growth = std::get<DeltaGrowthConfig>(file.experiments[0].config);
  CHECK(file.experiments[0].kind == "delta_growth");
  CHECK(growth.m_grid == std::vector<std::size_t>{100, 50, 100});
  CHECK(growth.context_length == 1234);
  CHECK(growth.trials == 17);
  CHECK(growth.seed == 99);
  CHECK(growth.threads == 2);
  CHECK(growth.confidence == 0.99);
  CHECK(std::get<PpmSpec>(growth.codec).order == 3);  // default backend
  CHECK(same_model(growth.model_x, find_model(file, "bern02")));

  const auto& errors = std::get<HomogeneityErrorConfig>(file.experiments[1].config);
  CHECK(errors.split_policy == SplitPolicy::seeded_random);
  CHECK(errors.alpha == 0.01);
  CHECK(errors.sequences_per_group == 20);  // default
  CHECK(errors.seed == 5);

  const auto& cls = std::get<ClassificationExperimentConfig>(file.experiments[2].config);
  REQUIRE(cls.sources.size() == 2);
  CHECK(cls.sources[0].label == "bern02");
  CHECK(cls.sources[1].label == "lazy_flip");
  CHECK(cls.target_length == 700);
  CHECK(cls.reference_length == 100000);  // default
  CHECK(std::holds_alternative<Lz78Spec>(cls.codec));
}

TEST_CASE("parse errors carry line numbers") {
  auto message_of = [](const std::string& text) {
    try {
      parse_model_text(text);
    } catch (const Error& e) {
      CHECK(e.code() == errc::parse_error);
      return std::string(e.what());
    }
    return std::string();
  };

  // missing row for context b
  const auto missing = message_of("model m {\n alphabet a b\n order 1\n row a : 0.5 0.5\n}");
  CHECK(missing.find("missing") != std::string::npos);

  // rows must sum to one
  const auto sum = message_of("model m {\n alphabet a b\n order 0\n row : 0.5 0.6\n}");
  CHECK(sum.find("line 1") != std::string::npos);

  CHECK(!message_of("model m {\n alphabet a\n order 0\n row : 1.0\n}").empty());
  CHECK(!message_of("model m {\n alphabet a b\n order 0\n row : 0.5 0.5\n").empty());
  CHECK(!message_of("widget m {\n}").empty());
  CHECK(!message_of("model m {\n alphabet a b\n order 0\n row : 0.5 0.5\n rows : 1\n}").empty());

  // duplicate context row
  const auto duplicate =
      message_of("model m {\n alphabet a b\n order 0\n row : 0.5 0.5\n row : 0.5 0.5\n}");
  CHECK(duplicate.find("duplicate") != std::string::npos);

  // unknown model reference
  const auto unknown = message_of(
      "experiment e {\n kind delta_growth\n x ghost\n y ghost\n m_grid 1 2\n seed 1\n}");
  CHECK(unknown.find("ghost") != std::string::npos);

  // unknown experiment key
  const auto stray = std::string(kTwoModels) +
                     "experiment e {\n kind classification\n sources bern02\n seed 1\n frobs 3\n}";
  CHECK(message_of(stray).find("frobs") != std::string::npos);

  // seed is mandatory
  const auto seedless =
      std::string(kTwoModels) + "experiment e {\n kind classification\n sources bern02\n}";
  CHECK(message_of(seedless).find("seed") != std::string::npos);
}

TEST_CASE("backend selector tokens") {
  CHECK(std::holds_alternative<Lz78Spec>(parse_backend_tokens({"lz78"})));
  CHECK(std::get<PpmSpec>(parse_backend_tokens({"ppm"})).order == 3);
  CHECK(std::get<PpmSpec>(parse_backend_tokens({"ppm", "1"})).order == 1);
  CHECK_FALSE(std::get<BwtSpec>(parse_backend_tokens({"bwt"})).block_size.has_value());
  CHECK(std::get<BwtSpec>(parse_backend_tokens({"bwt", "4096"})).block_size == 4096);
  CHECK(std::get<ExternalSpec>(parse_backend_tokens({"external", "cat", "{in}"})).command ==
        "cat {in}");
  CHECK_THROWS_AS(parse_backend_tokens({}), Error);
  CHECK_THROWS_AS(parse_backend_tokens({"zip"}), Error);
  CHECK_THROWS_AS(parse_backend_tokens({"lz78", "9"}), Error);
  CHECK_THROWS_AS(parse_backend_tokens({"ppm", "x"}), Error);
}

TEST_CASE("file loading") {
  CHECK_THROWS_AS(load_model_file("/nonexistent/path/models.txt"), Error);
}

}  // TEST_SUITE
