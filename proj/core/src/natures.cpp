#include "df/natures.hpp"

#include <cmath>
#include <numbers>

#include "df/trace_io.hpp"

namespace df {

namespace {

struct SpecParts {
  std::string name;
  std::string args;
  std::string ctx_name;
  std::string ctx_args;
};

// "<name>[:<args>][+<ctx>[:<args>]]". The '+' split happens first, so csv
// paths containing '+' are not supported.
SpecParts split_spec(const std::string& spec) {
  SpecParts parts;
  const std::size_t plus = spec.find('+');
  const std::string outcome = spec.substr(0, plus);
  std::string ctx = plus == std::string::npos ? std::string() : spec.substr(plus + 1);

  const std::size_t colon = outcome.find(':');
  parts.name = outcome.substr(0, colon);
  if (colon != std::string::npos) parts.args = outcome.substr(colon + 1);

  const std::size_t ctx_colon = ctx.find(':');
  parts.ctx_name = ctx.substr(0, ctx_colon);
  if (ctx_colon != std::string::npos) parts.ctx_args = ctx.substr(ctx_colon + 1);

  if (parts.name.empty()) throw config_error("nature spec '" + spec + "': empty rule name");
  return parts;
}

std::pair<double, double> parse_bracket_interval(const std::string& args, const std::string& who) {
  if (args.size() < 5 || args.front() != '[' || args.back() != ']')
    throw config_error(who + ": expected an interval like [0,1], got '" + args + "'");
  const std::string body = args.substr(1, args.size() - 2);
  const std::size_t comma = body.find(',');
  if (comma == std::string::npos)
    throw config_error(who + ": expected an interval like [0,1], got '" + args + "'");
  return {parse_double(body.substr(0, comma)), parse_double(body.substr(comma + 1))};
}

int parse_dim(const std::string& args, const std::string& who) {
  try {
    std::size_t used = 0;
    const int d = std::stoi(args, &used);
    if (used != args.size() || d < 1 || d > 4096) throw std::invalid_argument(args);
    return d;
  } catch (const std::exception&) {
    throw config_error(who + ": bad dimension '" + args + "'");
  }
}

double std_normal(Rng& rng) {
  const double u1 = rng.uniform01_oc();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Context sphere_point(int d, Rng& rng) {
  Context x(static_cast<std::size_t>(d));
  double norm2 = 0;
  do {
    norm2 = 0;
    for (double& v : x) {
      v = std_normal(rng);
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : x) v *= inv;
  return x;
}

Context ball_point(int d, Rng& rng) {
  Context x = sphere_point(d, rng);
  const double r = std::pow(rng.uniform01(), 1.0 / d);
  for (double& v : x) v *= r;
  return x;
}

// Context source from its spec; empty name means "no context".
ContextRule make_context_rule(const std::string& name, const std::string& args) {
  if (name.empty() || name == "none") return {};
  if (name == "uniform") {
    const int d = parse_dim(args, "context 'uniform'");
    return [d](const GameTrace&, Rng& rng) {
      Context x(static_cast<std::size_t>(d));
      for (double& v : x) v = rng.uniform01();
      return x;
    };
  }
  if (name == "ball") {
    const int d = parse_dim(args, "context 'ball'");
    return [d](const GameTrace&, Rng& rng) { return ball_point(d, rng); };
  }
  if (name == "sphere") {
    const int d = parse_dim(args, "context 'sphere'");
    return [d](const GameTrace&, Rng& rng) { return sphere_point(d, rng); };
  }
  throw config_error("unknown context source '" + name + "'");
}

int context_dim(const std::string& name, const std::string& args) {
  if (name.empty() || name == "none") return 0;
  return parse_dim(args, "context '" + name + "'");
}

std::vector<int> parse_bits(const std::string& args) {
  if (args.empty()) throw config_error("nature 'pattern': empty bit string");
  std::vector<int> bits;
  for (char c : args) {
    if (c != '0' && c != '1')
      throw config_error("nature 'pattern': bits must be 0/1, got '" + args + "'");
    bits.push_back(c - '0');
  }
  return bits;
}

double parse_prob(const std::string& args, const std::string& who) {
  const double v = parse_double(args);
  if (!(v >= 0.0 && v <= 1.0)) throw config_error(who + ": needs a probability in [0,1]");
  return v;
}

// Contexts uniform in the unit ball; a unit direction w is drawn from the
// game's stream on first use, then y ~ Ber(sigmoid(<w, x>)).
class LinearLogisticNature final : public Nature {
 public:
  explicit LinearLogisticNature(int d) : d_(d) {}

  OutcomeSpace space() const override { return OutcomeSpace::binary(); }

  Context next_context(const GameTrace&, Rng& rng) override {
    ensure_w(rng);
    return ball_point(d_, rng);
  }

  double next_outcome(const GameTrace&, const Context& x, const Forecast&, Rng& rng) override {
    ensure_w(rng);
    if (x.size() != w_.size()) throw game_error("linear-logistic nature: context dimension");
    double z = 0;
    for (std::size_t i = 0; i < x.size(); ++i) z += w_[i] * x[i];
    return rng.bernoulli(1.0 / (1.0 + std::exp(-z))) ? 1.0 : 0.0;
  }

 private:
  void ensure_w(Rng& rng) {
    if (w_.empty()) w_ = sphere_point(d_, rng);
  }

  int d_;
  std::vector<double> w_;
};

// Replays a stored dataset in order; errors once the rows run out.
class CsvNature final : public Nature {
 public:
  explicit CsvNature(Dataset data) : data_(std::move(data)) {}

  OutcomeSpace space() const override { return data_.space; }

  Context next_context(const GameTrace& sofar, Rng&) override {
    return data_.xs.at(index(sofar));
  }

  double next_outcome(const GameTrace& sofar, const Context&, const Forecast&, Rng&) override {
    return data_.ys.at(index(sofar));
  }

 private:
  std::size_t index(const GameTrace& sofar) const {
    const std::size_t i = static_cast<std::size_t>(sofar.T());
    if (i >= data_.size())
      throw game_error("csv nature exhausted after " + std::to_string(data_.size()) + " rows");
    return i;
  }

  Dataset data_;
};

// Logistic-quantile parameters are fixed functions of the interval so runs
// are reproducible from the spec string alone.
CdfFamily logistic_family_for(double a, double b, int dim) {
  const OutcomeSpace space = OutcomeSpace::interval(a, b);
  const double width = b - a;
  std::vector<double> w(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = width * (i % 2 == 0 ? 0.25 : -0.15);
  return logistic_cdf_family(space, a + 0.45 * width, std::move(w), 0.08 * width);
}

}  // namespace

std::unique_ptr<Nature> make_nature(const std::string& spec) {
  const SpecParts parts = split_spec(spec);
  ContextRule ctx = make_context_rule(parts.ctx_name, parts.ctx_args);
  const OutcomeSpace binary = OutcomeSpace::binary();

  if (parts.name == "bernoulli") {
    const double theta = parse_prob(parts.args, "nature 'bernoulli'");
    return nature_adaptive(
        [theta](const GameTrace&, const Context&, const Forecast&, Rng& rng) {
          return rng.bernoulli(theta) ? 1.0 : 0.0;
        },
        binary, std::move(ctx));
  }
  if (parts.name == "constant") {
    const double v = parse_double(parts.args);
    if (v != 0.0 && v != 1.0) throw config_error("nature 'constant': binary outcome must be 0 or 1");
    return nature_adaptive(
        [v](const GameTrace&, const Context&, const Forecast&, Rng&) { return v; }, binary,
        std::move(ctx));
  }
  if (parts.name == "pattern") {
    std::vector<int> bits = parse_bits(parts.args);
    return nature_adaptive(
        [bits = std::move(bits)](const GameTrace& sofar, const Context&, const Forecast&, Rng&) {
          return static_cast<double>(bits[static_cast<std::size_t>(sofar.T()) % bits.size()]);
        },
        binary, std::move(ctx));
  }
  if (parts.name == "flip" || parts.name == "adversarial-flip") {
    return nature_adaptive(
        [](const GameTrace&, const Context&, const Forecast& f, Rng&) {
          return f.value < 0.5 ? 1.0 : 0.0;
        },
        binary, std::move(ctx));
  }
  if (parts.name == "match") {
    return nature_adaptive(
        [](const GameTrace&, const Context&, const Forecast& f, Rng&) {
          return f.value >= 0.5 ? 1.0 : 0.0;
        },
        binary, std::move(ctx));
  }
  if (parts.name == "noisy-flip") {
    const double rho = parse_prob(parts.args, "nature 'noisy-flip'");
    return nature_adaptive(
        [rho](const GameTrace&, const Context&, const Forecast& f, Rng& rng) {
          if (rng.bernoulli(rho)) return rng.bernoulli(0.5) ? 1.0 : 0.0;
          return f.value < 0.5 ? 1.0 : 0.0;
        },
        binary, std::move(ctx));
  }
  if (parts.name == "linear-logistic") {
    if (!parts.ctx_name.empty())
      throw config_error("nature 'linear-logistic' draws its own contexts");
    return std::make_unique<LinearLogisticNature>(parse_dim(parts.args, "nature 'linear-logistic'"));
  }
  if (parts.name == "uniform-quantile") {
    const auto [a, b] = parse_bracket_interval(parts.args, "nature 'uniform-quantile'");
    return lipschitz_nature(uniform_cdf_family(a, b), std::move(ctx));
  }
  if (parts.name == "logistic-quantile") {
    const auto [a, b] = parse_bracket_interval(parts.args, "nature 'logistic-quantile'");
    if (!(parts.ctx_name.empty() || parts.ctx_name == "none" || parts.ctx_name == "uniform"))
      throw config_error("nature 'logistic-quantile' needs uniform contexts (its location range assumes x in [0,1]^d)");
    const int dim = context_dim(parts.ctx_name, parts.ctx_args);
    return lipschitz_nature(logistic_family_for(a, b, dim), std::move(ctx));
  }
  if (parts.name == "csv") {
    if (parts.args.empty()) throw config_error("nature 'csv': missing path");
    if (!parts.ctx_name.empty()) throw config_error("nature 'csv' carries its own contexts");
    return std::make_unique<CsvNature>(read_dataset_file(parts.args).data);
  }
  throw config_error("unknown nature '" + parts.name + "'");
}

double nature_lipschitz(const std::string& spec) {
  const SpecParts parts = split_spec(spec);
  if (parts.name == "uniform-quantile") {
    const auto [a, b] = parse_bracket_interval(parts.args, "nature 'uniform-quantile'");
    return uniform_cdf_family(a, b).L;
  }
  if (parts.name == "logistic-quantile") {
    const auto [a, b] = parse_bracket_interval(parts.args, "nature 'logistic-quantile'");
    return logistic_family_for(a, b, context_dim(parts.ctx_name, parts.ctx_args)).L;
  }
  throw config_error("nature '" + parts.name + "' declares no Lipschitz constant");
}

std::vector<std::pair<std::string, GroupIndicator>> quadrant_groups(double split) {
  std::vector<std::pair<std::string, GroupIndicator>> groups;
  for (int g = 0; g < 4; ++g) {
    const bool hi0 = (g & 2) != 0;
    const bool hi1 = (g & 1) != 0;
    std::string name = std::string("q") + (hi0 ? '1' : '0') + (hi1 ? '1' : '0');
    groups.emplace_back(std::move(name), [split, hi0, hi1](const Context& x) {
      if (x.size() < 2) throw game_error("quadrant groups need at least 2 context coordinates");
      return (x[0] >= split) == hi0 && (x[1] >= split) == hi1;
    });
  }
  return groups;
}

PairSampler make_sampler(const std::string& spec) {
  const SpecParts parts = split_spec(spec);
  ContextRule ctx = make_context_rule(parts.ctx_name, parts.ctx_args);
  const auto draw_ctx = [ctx = std::move(ctx)](Rng& rng) {
    static const GameTrace empty;
    return ctx ? ctx(empty, rng) : Context{};
  };

  PairSampler sampler;
  if (parts.name == "bernoulli") {
    const double theta = parse_prob(parts.args, "nature 'bernoulli'");
    sampler.space = OutcomeSpace::binary();
    sampler.draw = [theta, draw_ctx](Rng& rng) {
      Context x = draw_ctx(rng);
      return std::make_pair(std::move(x), rng.bernoulli(theta) ? 1.0 : 0.0);
    };
    return sampler;
  }
  if (parts.name == "constant") {
    const double v = parse_double(parts.args);
    if (v != 0.0 && v != 1.0) throw config_error("nature 'constant': binary outcome must be 0 or 1");
    sampler.space = OutcomeSpace::binary();
    sampler.draw = [v, draw_ctx](Rng& rng) { return std::make_pair(draw_ctx(rng), v); };
    return sampler;
  }
  if (parts.name == "uniform-quantile" || parts.name == "logistic-quantile") {
    const auto [a, b] = parse_bracket_interval(parts.args, "nature '" + parts.name + "'");
    CdfFamily family = parts.name == "uniform-quantile"
                           ? uniform_cdf_family(a, b)
                           : logistic_family_for(a, b, context_dim(parts.ctx_name, parts.ctx_args));
    sampler.space = family.space;
    sampler.draw = [family = std::move(family), draw_ctx](Rng& rng) {
      Context x = draw_ctx(rng);
      const double y = family.inv(x, rng.uniform01_oc());
      return std::make_pair(std::move(x), y);
    };
    return sampler;
  }
  throw config_error("nature '" + parts.name + "' is adaptive or unsupported as an i.i.d. sampler");
}

}  // namespace df
