#include "compstat/markov.hpp"

#include <cmath>
#include <limits>

#include "compstat/rng.hpp"

namespace compstat {

namespace {

constexpr std::size_t context_guard = std::size_t{1} << 20;
constexpr double row_tolerance = 1e-12;

std::size_t checked_context_count(const MarkovModel& model) {
  const std::size_t a = model.alphabet->size();
  std::size_t k = 1;
  for (unsigned i = 0; i < model.order; ++i) {
    if (k > context_guard / a) {
      throw Error(errc::resource_error, "markov context space exceeds 2^20");
    }
    k *= a;
  }
  return k;
}

void check_distribution(std::span<const double> dist, const char* what) {
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(errc::domain_error, std::string(what) + " has a negative or non-finite entry");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > row_tolerance) {
    throw Error(errc::domain_error, std::string(what) + " does not sum to 1");
  }
}

// Tarjan over the context graph; returns the number of closed strongly
// connected components (no edge leaving the component). The stationary law
// is unique exactly when there is one.
std::size_t closed_scc_count(const MarkovModel& model) {
  const std::size_t a = model.alphabet->size();
  const std::size_t k = model.context_count();
  constexpr std::uint32_t none = 0xFFFFFFFFu;
  std::vector<std::uint32_t> index(k, none), lowlink(k, 0), scc(k, none);
  std::vector<bool> on_stack(k, false);
  std::vector<std::uint32_t> stack;
  struct Frame {
    std::uint32_t node;
    std::uint32_t edge;
  };
  std::vector<Frame> frames;
  std::uint32_t counter = 0, scc_count = 0;

  auto edge_target = [&](std::size_t u, std::size_t s) -> std::uint32_t {
    return static_cast<std::uint32_t>((u * a + s) % k);
  };

  for (std::uint32_t root = 0; root < k; ++root) {
    if (index[root] != none) continue;
    frames.push_back({root, 0});
    while (!frames.empty()) {
      Frame& f = frames.back();
      const std::uint32_t v = f.node;
      if (f.edge == 0) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (f.edge < a) {
        const std::size_t s = f.edge++;
        if (model.transition[static_cast<std::size_t>(v) * a + s] <= 0.0) continue;
        const std::uint32_t w = edge_target(v, s);
        if (index[w] == none) {
          frames.push_back({w, 0});  // invalidates f; handled by the continue below
          descended = true;
          break;
        }
        if (on_stack[w] && index[w] < lowlink[v]) lowlink[v] = index[w];
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        while (true) {
          const std::uint32_t w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          scc[w] = scc_count;
          if (w == v) break;
        }
        ++scc_count;
      }
      frames.pop_back();
      if (!frames.empty()) {
        Frame& parent = frames.back();
        if (lowlink[v] < lowlink[parent.node]) lowlink[parent.node] = lowlink[v];
      }
    }
  }

  std::vector<bool> open(scc_count, false);
  for (std::size_t u = 0; u < k; ++u) {
    for (std::size_t s = 0; s < a; ++s) {
      if (model.transition[u * a + s] <= 0.0) continue;
      const std::uint32_t w = edge_target(u, s);
      if (scc[u] != scc[w]) open[scc[u]] = true;
    }
  }
  std::size_t closed = 0;
  for (bool o : open) closed += o ? 0 : 1;
  return closed;
}

}  // namespace

std::size_t MarkovModel::context_count() const {
  std::size_t k = 1;
  for (unsigned i = 0; i < order; ++i) k *= alphabet->size();
  return k;
}

bool same_model(const MarkovModel& a, const MarkovModel& b) {
  return same_alphabet(a.alphabet, b.alphabet) && a.order == b.order &&
         a.transition == b.transition && a.initial == b.initial;
}

void validate(const MarkovModel& model) {
  if (!model.alphabet) throw Error(errc::domain_error, "markov model requires an alphabet");
  const std::size_t a = model.alphabet->size();
  const std::size_t k = checked_context_count(model);
  if (model.transition.size() != k * a) {
    throw Error(errc::domain_error, "markov transition table has wrong dimensions");
  }
  for (std::size_t u = 0; u < k; ++u) {
    check_distribution(std::span(model.transition).subspan(u * a, a), "transition row");
  }
  if (!model.initial.empty()) {
    if (model.initial.size() != k) {
      throw Error(errc::domain_error, "markov initial distribution has wrong dimension");
    }
    check_distribution(model.initial, "initial distribution");
  }
}

std::vector<double> stationary_distribution(const MarkovModel& model) {
  validate(model);
  const std::size_t a = model.alphabet->size();
  const std::size_t k = model.context_count();
  if (model.order == 0) return {1.0};
  if (closed_scc_count(model) != 1) {
    throw Error(errc::domain_error,
                "stationary law is not unique: chain has multiple closed classes");
  }
  // Damped fixed-point iteration x <- (x + xP)/2; damping removes
  // periodicity so the iteration always converges to the unique fixed point.
  std::vector<double> x(k, 1.0 / static_cast<double>(k)), y(k);
  for (int iter = 0; iter < 500000; ++iter) {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t u = 0; u < k; ++u) {
      const double mass = x[u];
      if (mass == 0.0) continue;
      for (std::size_t s = 0; s < a; ++s) {
        const double p = model.transition[u * a + s];
        if (p > 0.0) y[(u * a + s) % k] += mass * p;
      }
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = 0.5 * (x[i] + y[i]);
      diff += std::fabs(y[i] - x[i]);
    }
    x.swap(y);
    if (diff < 1e-15) {
      double sum = 0.0;
      for (double v : x) sum += v;
      for (double& v : x) v /= sum;
      return x;
    }
  }
  throw Error(errc::domain_error, "stationary distribution iteration did not converge");
}

Sequence generate(const MarkovModel& model, std::size_t length, std::uint64_t seed) {
  validate(model);
  if (length == 0) throw Error(errc::domain_error, "generated length must be >= 1");
  const std::size_t a = model.alphabet->size();
  const std::size_t k = model.context_count();
  std::mt19937_64 rng(seed);
  auto draw = [&](std::span<const double> dist) -> std::size_t {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    bool seen = false;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      if (dist[i] <= 0.0) continue;
      acc += dist[i];
      last = i;
      seen = true;
      if (u < acc) return i;
    }
    (void)seen;
    return last;  // absorb floating-point residue into the top bucket
  };

  std::size_t ctx = 0;
  if (model.order > 0) {
    ctx = model.initial.empty() ? draw(stationary_distribution(model)) : draw(model.initial);
  }
  std::vector<Symbol> out;
  out.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t s = draw(std::span(model.transition).subspan(ctx * a, a));
    out.push_back(static_cast<Symbol>(s));
    if (model.order > 0) ctx = (ctx * a + s) % k;
  }
  return Sequence(model.alphabet, std::move(out));
}

double entropy_m(const MarkovModel& model, unsigned m) {
  const auto tau = stationary_distribution(model);  // validates
  const std::size_t a = model.alphabet->size();
  const std::size_t k = model.context_count();

  if (m >= model.order) {
    // Conditioning on at least the full memory: the conditional law given the
    // last m symbols depends only on the last `order`, so h_m = h_order.
    double h = 0.0;
    for (std::size_t u = 0; u < k; ++u) {
      const double w = tau[u];
      if (w <= 0.0) continue;
      for (std::size_t s = 0; s < a; ++s) {
        const double p = model.transition[u * a + s];
        if (p > 0.0) h -= w * p * std::log2(p);
      }
    }
    return h;
  }

  // m < order: marginalize the stationary context law onto length-m suffixes.
  std::size_t km = 1;
  for (unsigned i = 0; i < m; ++i) km *= a;
  std::vector<double> joint(km * a, 0.0);
  for (std::size_t u = 0; u < k; ++u) {
    if (tau[u] <= 0.0) continue;
    const std::size_t v = u % km;
    for (std::size_t s = 0; s < a; ++s) {
      joint[v * a + s] += tau[u] * model.transition[u * a + s];
    }
  }
  double h = 0.0;
  for (std::size_t v = 0; v < km; ++v) {
    double margin = 0.0;
    for (std::size_t s = 0; s < a; ++s) margin += joint[v * a + s];
    if (margin <= 0.0) continue;
    for (std::size_t s = 0; s < a; ++s) {
      const double j = joint[v * a + s];
      if (j > 0.0) h -= j * std::log2(j / margin);
    }
  }
  return h;
}

double limit_entropy(const MarkovModel& model) { return entropy_m(model, model.order); }

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) {
    throw Error(errc::domain_error, "kl_divergence needs two distributions of equal size");
  }
  check_distribution(p, "first distribution");
  check_distribution(q, "second distribution");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  return d;
}

namespace {
AlphabetRef shared_binary() {
  static const AlphabetRef alphabet = std::make_shared<Alphabet>(Alphabet::binary());
  return alphabet;
}
}  // namespace

MarkovModel bernoulli_model(double p1) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) {
    throw Error(errc::domain_error, "bernoulli parameter must lie in [0, 1]");
  }
  MarkovModel m;
  m.alphabet = shared_binary();
  m.order = 0;
  m.transition = {1.0 - p1, p1};
  return m;
}

MarkovModel binary_flip_model(double flip) {
  if (!(flip >= 0.0 && flip <= 1.0)) {
    throw Error(errc::domain_error, "flip probability must lie in [0, 1]");
  }
  MarkovModel m;
  m.alphabet = shared_binary();
  m.order = 1;
  m.transition = {1.0 - flip, flip, flip, 1.0 - flip};
  return m;
}

}  // namespace compstat
