// Acceptance gate: one line per criterion, nonzero exit when any fails.
// Tolerances are pinned here and nowhere else.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "compstat/association.hpp"
#include "compstat/classify.hpp"
#include "compstat/codec.hpp"
#include "compstat/experiments.hpp"
#include "compstat/homogeneity.hpp"
#include "compstat/markov.hpp"
#include "compstat/rng.hpp"
#include "compstat/types.hpp"

namespace fs = std::filesystem;
using namespace compstat;
using clock_type = std::chrono::steady_clock;

namespace {

std::string g_cli_path;  // argv[1]: the command-line binary, for criterion 10

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& message) {
    if (!condition && ok) {
      ok = false;
      detail = message;
    }
  }
};

int g_failures = 0;

void criterion(int id, const char* name, const std::function<void(Outcome&)>& body) {
  Outcome outcome;
  const auto start = clock_type::now();
  try {
    body(outcome);
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(clock_type::now() - start).count();
  if (outcome.ok) {
    std::printf("PASS  %2d  %s  (%.1fs)\n", id, name, seconds);
  } else {
    std::printf("FAIL  %2d  %s  (%.1fs): %s\n", id, name, seconds,
                outcome.detail.c_str());
    ++g_failures;
  }
  std::fflush(stdout);
}

std::string fmt(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

Sequence random_binary(const AlphabetRef& alphabet, std::size_t length,
                       std::mt19937_64& rng) {
  std::vector<Symbol> data(length);
  for (auto& s : data) s = static_cast<Symbol>(rng() & 1);
  return Sequence(alphabet, std::move(data));
}

unsigned worker_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Exact-binomial Fisher oracle, independent of the production code path:
// Pascal-triangle binomials (exact in doubles through n = 40) and direct
// probability sums with the same tie rule the implementation documents.
double fisher_oracle(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
  static std::vector<std::vector<double>> pascal;
  if (pascal.empty()) {
    pascal.resize(41);
    for (std::size_t n = 0; n <= 40; ++n) {
      pascal[n].resize(n + 1, 1.0);
      for (std::size_t k = 1; k < n; ++k) {
        pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
      }
    }
  }
  const std::uint64_t r1 = a + b, r2 = c + d, c1 = a + c, n = r1 + r2;
  if (n == 0 || r1 == 0 || r2 == 0 || c1 == 0 || c1 == n) return 1.0;
  const auto probability = [&](std::uint64_t x) {
    return pascal[r1][x] / pascal[n][c1] * pascal[r2][c1 - x];
  };
  const double observed = probability(a);
  const std::uint64_t lo = c1 > r2 ? c1 - r2 : 0;
  const std::uint64_t hi = std::min(r1, c1);
  double total = 0.0;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    const double p = probability(x);
    if (std::log(p) <= std::log(observed) + 1e-7) total += p;
  }
  return std::min(total, 1.0);
}

std::string read_file(const fs::path& path) {
  std::ifstream stream(path, std::ios::binary);
  std::stringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

}  // namespace

// --- 1: code lengths are (sub-)normalized ------------------------------------

void criterion_kraft(Outcome& out) {
  const auto start = clock_type::now();
  const auto binary = std::make_shared<Alphabet>(Alphabet::binary());
  for (int order = 0; order <= 3; ++order) {
    for (std::size_t n = 1; n <= 10; ++n) {
      const double sum = kraft_sum(PpmSpec{order}, n, binary);
      out.require(std::fabs(sum - 1.0) <= 1e-9,
                  "ppm order " + std::to_string(order) + " n=" + std::to_string(n) +
                      " kraft sum " + fmt(sum));
    }
  }
  for (std::size_t n = 1; n <= 10; ++n) {
    const double sum = kraft_sum(Lz78Spec{}, n, binary);
    out.require(sum <= 1.0 + 1e-9,
                "lz78 n=" + std::to_string(n) + " kraft sum " + fmt(sum) + " > 1");
  }
  const double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
  out.require(seconds < 10.0, "runtime " + fmt(seconds) + "s exceeds 10s");
}

// --- 2: conditional lengths are additive and positive -------------------------

void criterion_additivity(Outcome& out) {
  const auto binary = std::make_shared<Alphabet>(Alphabet::binary());
  const std::vector<std::pair<std::string, CompressorSpec>> backends = {
      {"lz78", Lz78Spec{}}, {"ppm0", PpmSpec{0}}, {"ppm3", PpmSpec{3}},
      {"bwt", BwtSpec{}},   {"external", ExternalSpec{"cat"}},
  };
  for (const auto& [name, spec] : backends) {
    std::mt19937_64 rng(derive_seed(20260818, std::hash<std::string>{}(name)));
    for (int pair = 0; pair < 10000 && out.ok; ++pair) {
      const std::size_t lu = 64 + rng() % 961, lv = 64 + rng() % 961;
      const Sequence u = random_binary(binary, lu, rng);
      const Sequence v = random_binary(binary, lv, rng);
      const double whole = compress_length(spec, concat(u, v)).bits;
      const double context = compress_length(spec, u).bits;
      const double conditional = conditional_length(spec, v, u).bits;
      out.require(std::fabs(whole - (context + conditional)) <= 1e-9,
                  name + " pair " + std::to_string(pair) + ": |uv|=" + fmt(whole) +
                      " vs " + fmt(context) + "+" + fmt(conditional));
      out.require(conditional > 0.0,
                  name + " pair " + std::to_string(pair) +
                      ": conditional length not positive: " + fmt(conditional));
    }
  }
}

// --- 3: a high-order code reaches the source's entropy floor ------------------

void criterion_universality(Outcome& out) {
  const auto start = clock_type::now();
  const MarkovModel model = binary_flip_model(0.3);
  const double floor = limit_entropy(model);
  const std::vector<std::size_t> lengths = {1000, 10000, 100000};
  std::vector<double> per_symbol;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    double total = 0.0;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const Sequence s = generate(model, lengths[i], derive_seed(301, i * 8 + rep));
      total += compress_length(PpmSpec{3}, s).bits / static_cast<double>(lengths[i]);
    }
    per_symbol.push_back(total / 5.0);
  }
  out.require(per_symbol.back() - floor <= 0.1,
              "per-symbol length at 1e5 = " + fmt(per_symbol.back()) +
                  " exceeds entropy " + fmt(floor) + " + 0.1");
  out.require(per_symbol.back() >= floor - 1e-6,
              "per-symbol length " + fmt(per_symbol.back()) +
                  " dips below the entropy floor " + fmt(floor));
  for (std::size_t i = 1; i < per_symbol.size(); ++i) {
    out.require(per_symbol[i] < per_symbol[i - 1],
                "no improvement from length " + std::to_string(lengths[i - 1]) + " (" +
                    fmt(per_symbol[i - 1]) + ") to " + std::to_string(lengths[i]) +
                    " (" + fmt(per_symbol[i]) + ")");
  }
  const double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
  out.require(seconds < 60.0, "runtime " + fmt(seconds) + "s exceeds 60s");
}

// --- 4: the conditional-length gap grows linearly at the divergence rate ------

void criterion_growth(Outcome& out) {
  const auto start = clock_type::now();
  DeltaGrowthConfig config;
  config.model_x = bernoulli_model(0.2);
  config.model_y = bernoulli_model(0.8);
  config.codec = PpmSpec{0};
  config.m_grid = {250, 500, 1000, 2000, 4000};
  config.context_length = 100000;
  config.trials = 200;
  config.seed = 401;
  config.confidence = 0.99;
  config.threads = worker_threads();

  const double anchor = kl_divergence(std::vector<double>{0.8, 0.2},
                                      std::vector<double>{0.2, 0.8});  // = 1.2 exactly
  const DeltaGrowthReport spread = delta_growth_experiment(config);
  out.require(std::fabs(spread.slope - anchor) <= 0.15 * anchor,
              "slope " + fmt(spread.slope) + " outside " + fmt(anchor) + " +/- 15%");

  config.model_y = config.model_x;
  config.seed = 402;
  const DeltaGrowthReport control = delta_growth_experiment(config);
  out.require(control.slope_ci.low <= 0.0 && 0.0 <= control.slope_ci.high,
              "control 99% CI [" + fmt(control.slope_ci.low) + ", " +
                  fmt(control.slope_ci.high) + "] excludes 0");

  const double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
  out.require(seconds < 300.0, "runtime " + fmt(seconds) + "s exceeds 5min");
}

// --- 5: the homogeneity test keeps its level and finds real differences -------

void criterion_error_rates(Outcome& out) {
  const auto start = clock_type::now();
  HomogeneityErrorConfig config;
  config.codec = PpmSpec{3};
  config.sequences_per_group = 20;
  config.sequence_length = 5000;
  config.trials = 400;
  config.alpha = 0.05;
  config.seed = 501;
  config.threads = worker_threads();

  config.model_x = binary_flip_model(0.3);
  config.model_y = binary_flip_model(0.3);
  const ErrorRateReport level = homogeneity_error_experiment(config);
  out.require(level.type_i_rate.has_value(), "type I rate missing for identical sources");
  out.require(level.type_i_rate.value_or(1.0) <= 0.08,
              "type I rate " + fmt(level.rate) + " exceeds 0.08");

  config.model_x = bernoulli_model(0.2);
  config.model_y = bernoulli_model(0.8);
  config.seed = 502;
  const ErrorRateReport power = homogeneity_error_experiment(config);
  out.require(power.type_ii_rate.has_value(), "type II rate missing for distinct sources");
  const double rejection = 1.0 - power.type_ii_rate.value_or(1.0);
  out.require(rejection >= 0.9, "rejection rate " + fmt(rejection) + " below 0.9");

  const double seconds = std::chrono::duration<double>(clock_type::now() - start).count();
  out.require(seconds < 600.0, "runtime " + fmt(seconds) + "s exceeds 10min");
}

// --- 6: classification accuracy is high and grows with the sample -------------

void criterion_classification(Outcome& out) {
  ClassificationExperimentConfig config;
  config.sources = {{"sticky", binary_flip_model(0.25)}, {"jumpy", binary_flip_model(0.40)}};
  config.codec = PpmSpec{3};
  config.reference_length = 100000;
  config.trials = 500;
  config.seed = 601;
  config.threads = worker_threads();

  std::vector<double> accuracy;
  for (const std::size_t target_length : {std::size_t{250}, std::size_t{1000}, std::size_t{4000}}) {
    config.target_length = target_length;
    const ErrorRateReport report = classification_experiment(config);
    out.require(report.accuracy.has_value(), "accuracy missing from the report");
    accuracy.push_back(report.accuracy.value_or(0.0));
  }
  out.require(accuracy.back() >= 0.95,
              "accuracy at |u|=4000 is " + fmt(accuracy.back()) + " < 0.95");
  for (std::size_t i = 1; i < accuracy.size(); ++i) {
    out.require(accuracy[i] >= accuracy[i - 1] - 0.03,
                "accuracy dropped more than 3 points: " + fmt(accuracy[i - 1]) +
                    " -> " + fmt(accuracy[i]));
  }
}

// --- 7: the exact test matches independent enumeration ------------------------

void criterion_fisher_oracle(Outcome& out) {
  for (std::uint64_t a = 0; a <= 40 && out.ok; ++a) {
    for (std::uint64_t b = 0; a + b <= 40 && out.ok; ++b) {
      for (std::uint64_t c = 0; a + b + c <= 40 && out.ok; ++c) {
        for (std::uint64_t d = 0; a + b + c + d <= 40; ++d) {
          const double got = fisher_exact_2x2(ContingencyTable::make_2x2(a, b, c, d));
          const double want = fisher_oracle(a, b, c, d);
          if (std::fabs(got - want) > 1e-9) {
            out.require(false, "fisher mismatch at (" + std::to_string(a) + "," +
                                   std::to_string(b) + "," + std::to_string(c) + "," +
                                   std::to_string(d) + "): " + fmt(got) + " vs " +
                                   fmt(want));
            break;
          }
        }
      }
    }
  }
  const auto report = chi_square_2x2(ContingencyTable::make_2x2(30, 10, 10, 30), 0.05,
                                     /*yates=*/false);
  out.require(report.statistic.has_value() &&
                  std::fabs(*report.statistic - 20.0) <= 1e-9,
              "chi-square (30,10,10,30) = " +
                  fmt(report.statistic.value_or(-1.0)) + ", want 20");
}

// --- 8: association coefficients behave like association coefficients ---------

void criterion_association(Outcome& out) {
  const auto table = ContingencyTable::make_2x2(40, 10, 10, 40);
  out.require(std::fabs(yule_q(table) - 0.882353) <= 1e-6,
              "Q(40,10,10,40) = " + fmt(yule_q(table)));
  out.require(std::fabs(coefficient_v(table) - 0.6) <= 1e-6,
              "V(40,10,10,40) = " + fmt(coefficient_v(table)));

  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 10000 && out.ok; ++trial) {
    const auto cell = [&] { return 1 + rng() % 50; };
    const std::uint64_t a = cell(), b = cell(), c = cell(), d = cell();
    const auto t = ContingencyTable::make_2x2(a, b, c, d);
    const auto swapped = ContingencyTable::make_2x2(b, a, d, c);
    out.require(std::fabs(yule_q(swapped) + yule_q(t)) <= 1e-12,
                "Q not antisymmetric under column swap at trial " + std::to_string(trial));
    out.require(std::fabs(coefficient_v(swapped) + coefficient_v(t)) <= 1e-12,
                "V not antisymmetric under column swap at trial " + std::to_string(trial));
    out.require(std::fabs(yule_q(t.transposed()) - yule_q(t)) <= 1e-12,
                "Q not transpose-invariant at trial " + std::to_string(trial));
    out.require(std::fabs(coefficient_v(t.transposed()) - coefficient_v(t)) <= 1e-12,
                "V not transpose-invariant at trial " + std::to_string(trial));
  }

  for (std::uint64_t a = 0; a <= 30 && out.ok; ++a) {
    for (std::uint64_t b = 0; a + b <= 30 && out.ok; ++b) {
      for (std::uint64_t c = 0; a + b + c <= 30 && out.ok; ++c) {
        for (std::uint64_t d = 0; a + b + c + d <= 30; ++d) {
          const auto t = ContingencyTable::make_2x2(a, b, c, d);
          if (t.row_total(0) == 0 || t.row_total(1) == 0 || t.col_total(0) == 0 ||
              t.col_total(1) == 0) {
            continue;  // coefficients undefined on zero margins
          }
          if (std::fabs(yule_q(t)) < std::fabs(coefficient_v(t)) - 1e-12) {
            out.require(false, "|Q| < |V| at (" + std::to_string(a) + "," +
                                   std::to_string(b) + "," + std::to_string(c) + "," +
                                   std::to_string(d) + ")");
            break;
          }
        }
      }
    }
  }
}

// --- 9: entropy and divergence pins --------------------------------------------

void criterion_entropy(Outcome& out) {
  out.require(entropy_m(bernoulli_model(0.5), 0) == 1.0,
              "h(Bern(0.5)) = " + fmt(entropy_m(bernoulli_model(0.5), 0)) +
                  ", want exactly 1");
  out.require(std::fabs(entropy_m(bernoulli_model(0.2), 0) - 0.721928) <= 1e-6,
              "h(Bern(0.2)) = " + fmt(entropy_m(bernoulli_model(0.2), 0)));
  const double divergence = kl_divergence(std::vector<double>{0.5, 0.5},
                                          std::vector<double>{0.75, 0.25});
  out.require(std::fabs(divergence - 0.207519) <= 1e-6,
              "D(Bern(0.5)||Bern(0.25)) = " + fmt(divergence));

  std::mt19937_64 rng(909);
  for (int pair = 0; pair < 1000 && out.ok; ++pair) {
    const std::size_t k = 2 + rng() % 4;
    std::vector<double> p(k), q(k);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      p[i] = 0.01 + uniform01(rng);
      q[i] = 0.01 + uniform01(rng);
      sp += p[i];
      sq += q[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    const double d = kl_divergence(p, q);
    out.require(d >= -1e-12, "negative divergence " + fmt(d) + " at pair " +
                                 std::to_string(pair));
  }
}

// --- 10: fixed-seed CLI runs are byte-identical --------------------------------

void criterion_cli_determinism(Outcome& out) {
  if (g_cli_path.empty()) {
    out.require(false, "CLI binary path not supplied as argv[1]");
    return;
  }
  const fs::path root = fs::temp_directory_path() / "compstat_acceptance";
  fs::remove_all(root);
  fs::create_directories(root / "x");
  fs::create_directories(root / "y");
  std::mt19937_64 rng(1010);
  for (int i = 0; i < 6; ++i) {
    for (const char* group : {"x", "y"}) {
      std::ofstream file(root / group / ("s" + std::to_string(i) + ".txt"));
      const double p = group[0] == 'x' ? 0.25 : 0.75;
      for (int j = 0; j < 600; ++j) file << (uniform01(rng) < p ? 'a' : 'b');
    }
  }
  {
    std::ofstream config(root / "sim.cfg");
    config << "model low {\n  alphabet a b\n  order 0\n  row : 0.8 0.2\n}\n"
              "model high {\n  alphabet a b\n  order 0\n  row : 0.2 0.8\n}\n"
              "experiment check {\n  kind classification\n  sources low high\n"
              "  backend ppm 0\n  reference_length 1000\n  target_length 200\n"
              "  trials 8\n  seed 1\n}\n";
  }

  const auto invoke = [&](const std::string& args, const fs::path& out_path) {
    const std::string command =
        "\"" + g_cli_path + "\" " + args + " --out \"" + out_path.string() + "\"";
    return std::system(command.c_str());
  };
  const std::string homogeneity_args = "homogeneity \"" + (root / "x").string() +
                                       "\" \"" + (root / "y").string() +
                                       "\" --split random --seed 7";
  const int h1 = invoke(homogeneity_args, root / "h1.json");
  const int h2 = invoke(homogeneity_args, root / "h2.json");
  out.require(h1 == h2, "homogeneity exit codes differ between runs");
  out.require(read_file(root / "h1.json") == read_file(root / "h2.json"),
              "homogeneity reports differ between identical runs");
  out.require(!read_file(root / "h1.json").empty(), "homogeneity report is empty");

  const std::string simulate_args = "simulate --config \"" + (root / "sim.cfg").string() + "\"";
  const int s1 = invoke(simulate_args, root / "s1.json");
  const int s2 = invoke(simulate_args, root / "s2.json");
  out.require(s1 == 0 && s2 == 0, "simulate did not exit cleanly");
  out.require(read_file(root / "s1.json") == read_file(root / "s2.json"),
              "simulate reports differ between identical runs");
}

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  criterion(1, "code lengths are (sub-)normalized", criterion_kraft);
  criterion(2, "conditional lengths are additive and positive", criterion_additivity);
  criterion(3, "high-order code reaches the entropy floor", criterion_universality);
  criterion(4, "conditional-length gap grows at the divergence rate", criterion_growth);
  criterion(5, "homogeneity test holds its level and its power", criterion_error_rates);
  criterion(6, "classification is accurate and improves with length",
            criterion_classification);
  criterion(7, "exact test matches independent enumeration", criterion_fisher_oracle);
  criterion(8, "association coefficients: pins and symmetries", criterion_association);
  criterion(9, "entropy and divergence reference values", criterion_entropy);
  criterion(10, "fixed-seed runs are byte-identical", criterion_cli_determinism);

  if (g_failures == 0) {
    std::printf("acceptance: 10/10 criteria satisfied\n");
    return 0;
  }
  std::printf("acceptance: %d criteria FAILED\n", g_failures);
  return 1;
}
